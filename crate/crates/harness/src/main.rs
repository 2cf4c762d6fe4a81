use clap::Parser;

fn main() {
    let cli = khm_harness::cli::Cli::parse();
    if let Err(e) = khm_harness::cli::execute(cli) {
        eprintln!("khm: {e}");
        std::process::exit(e.exit_code());
    }
}
