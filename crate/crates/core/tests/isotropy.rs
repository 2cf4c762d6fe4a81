//! Statistics averaged over a cubic-group-invariant rule do not change when
//! the field is rotated by an element of that group.

use khm_core::quadrature::SphericalQuadrature;
use khm_core::stats::{IncrementEngine, SparseModes};
use khm_core::{Fft3, GridSpec, SpectralField};

type Mode = ([i64; 3], usize, f64, f64);

const MODES: [Mode; 4] = [
    ([1, 2, 0], 2, 0.8, 0.1),
    ([0, 1, -3], 0, 0.4, -0.5),
    ([2, -1, 1], 1, -0.3, 0.6),
    ([1, 1, 1], 0, 0.5, 0.0),
];

/// Field built from `MODES` after applying the signed axis permutation
/// x_i ↦ s_i x_{perm[i]} to both wavevectors and components.
fn rotated(g: GridSpec, perm: [usize; 3], sign: [f64; 3]) -> SpectralField {
    let mut v = SpectralField::zeros(g);
    for &(k, c, a, b) in &MODES {
        let mut rk = [0i64; 3];
        for i in 0..3 {
            rk[perm[i]] = sign[i] as i64 * k[i];
        }
        // a component along e_c maps to s_c e_{perm[c]}
        v.add_real_mode(rk, perm[c], sign[c] * a, sign[c] * b);
    }
    v.leray_project()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-11 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn cubic_rotations_leave_averages_invariant() {
    let g = GridSpec::new(16).unwrap();
    let fft = Fft3::new(g);
    let quad = SphericalQuadrature::fibonacci(20).unwrap().octahedral_closure();
    let base = rotated(g, [0, 1, 2], [1.0; 3]);
    let rotations = [([1, 2, 0], [1.0, 1.0, 1.0]), ([0, 1, 2], [-1.0, 1.0, 1.0]), ([2, 0, 1], [1.0, -1.0, -1.0]), ([1, 0, 2], [1.0, 1.0, -1.0])];
    for ell in [0.4, 0.9] {
        let a0 = SparseModes::new(&base, None).averages(ell, &quad);
        let c0 = IncrementEngine::new(&base, &fft).cubic_moments(ell, &quad, &[2.0, 3.0]);
        for (perm, sign) in rotations {
            let r = rotated(g, perm, sign);
            let a = SparseModes::new(&r, None).averages(ell, &quad);
            assert!(close(a.j, a0.j) && close(a.g, a0.g) && close(a.h, a0.h) && close(a.dgamma, a0.dgamma), "{perm:?}");
            let c = IncrementEngine::new(&r, &fft).cubic_moments(ell, &quad, &[2.0, 3.0]);
            assert!(close(c.s_par, c0.s_par) && close(c.s_zero, c0.s_zero), "{perm:?} at {ell}");
            for (x, y) in c.s_p.iter().zip(&c0.s_p) {
                assert!(close(x.1, y.1));
            }
        }
    }
}

#[test]
fn odd_moments_vanish_for_reflection_symmetric_rule() {
    let q = SphericalQuadrature::fibonacci(50).unwrap().symmetrized();
    let m = q.first_moment();
    assert!(m.iter().all(|x| x.abs() < 1e-15));
    let third = q.average(|n| n[0] * n[1] * n[1] + n[2].powi(3));
    assert!(third.abs() < 1e-15);
}
