use khm_core::quadrature::SphericalQuadrature;
use khm_core::stats::{gamma_bar, SparseModes};
use khm_core::{Fft3, GridSpec, SpectralField};
use proptest::prelude::*;

fn grid() -> GridSpec {
    GridSpec::new(16).unwrap()
}

fn mode() -> impl Strategy<Value = ([i64; 3], usize, f64, f64)> {
    (prop::array::uniform3(-4i64..=4), 0usize..3, -1.0f64..1.0, -1.0f64..1.0)
}

fn field(modes: &[([i64; 3], usize, f64, f64)]) -> SpectralField {
    let mut v = SpectralField::zeros(grid());
    for &(k, c, a, b) in modes {
        if k != [0, 0, 0] {
            v.add_real_mode(k, c, a, b);
        }
    }
    v
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parseval_and_round_trip(modes in prop::collection::vec(mode(), 1..6)) {
        let v = field(&modes);
        let fft = Fft3::new(grid());
        let phys = v.to_physical(&fft);
        prop_assert!(close(phys.l2_sq(), v.l2_sq(), 1e-12));
        let back = SpectralField::from_physical(&phys, &fft);
        let mut d = back.clone();
        d.add_scaled(&v, -1.0);
        prop_assert!(d.max_abs() <= 1e-13 * v.max_abs().max(1.0));
        prop_assert!(back.hermitian_defect() == 0.0);
    }

    #[test]
    fn shift_is_an_isometry(modes in prop::collection::vec(mode(), 1..6), h in prop::array::uniform3(-3.0f64..3.0)) {
        let v = field(&modes);
        let s = v.shift(h);
        prop_assert!(close(s.l2_sq(), v.l2_sq(), 1e-12));
        let back = s.shift(h.map(|x| -x));
        let mut d = back;
        d.add_scaled(&v, -1.0);
        prop_assert!(d.max_abs() <= 1e-13 * v.max_abs().max(1.0));
    }

    #[test]
    fn leray_projection(modes in prop::collection::vec(mode(), 1..6)) {
        let v = field(&modes);
        let p = v.leray_project();
        prop_assert!(p.relative_divergence() < 1e-13);
        let pp = p.leray_project();
        let mut d = pp;
        d.add_scaled(&p, -1.0);
        prop_assert!(d.max_abs() <= 1e-14 * v.max_abs().max(1.0));
        prop_assert!(p.l2_sq() <= v.l2_sq() * (1.0 + 1e-14));
    }

    #[test]
    fn correlation_bounded_by_energy(modes in prop::collection::vec(mode(), 1..6), ell in 0.0f64..3.0) {
        let v = field(&modes);
        let q = SphericalQuadrature::fibonacci(32).unwrap();
        prop_assert!(gamma_bar(&v, ell, &q).abs() <= v.l2_sq() * (1.0 + 1e-13));
    }

    #[test]
    fn averages_scale_quadratically(modes in prop::collection::vec(mode(), 1..6), s in -3.0f64..3.0, ell in 0.1f64..2.0) {
        let v = field(&modes);
        let q = SphericalQuadrature::fibonacci(16).unwrap();
        let a = SparseModes::new(&v, None).averages(ell, &q);
        let b = SparseModes::new(&v.scaled(s), None).averages(ell, &q);
        let s2 = s * s;
        prop_assert!(close(b.j, s2 * a.j, 1e-12));
        prop_assert!(close(b.g, s2 * a.g, 1e-12));
        prop_assert!(close(b.h, s2 * a.h, 1e-12));
    }
}
