//! Averaging rules on the unit sphere and one-dimensional integration rules.
//!
//! Spherical weights are normalized to sum to one, so a rule computes the
//! mean `(1/4π)∫_{S²} f dS`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalQuadrature {
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

/// Named rules accepted by configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureKind {
    Fibonacci(usize),
    FibonacciSymmetric(usize),
    Lebedev(usize),
    Gauss(usize, usize),
}

impl QuadratureKind {
    pub fn build(self) -> Result<SphericalQuadrature> {
        match self {
            QuadratureKind::Fibonacci(m) => SphericalQuadrature::fibonacci(m),
            QuadratureKind::FibonacciSymmetric(m) => Ok(SphericalQuadrature::fibonacci(m)?.symmetrized()),
            QuadratureKind::Lebedev(m) => SphericalQuadrature::lebedev(m),
            QuadratureKind::Gauss(a, b) => SphericalQuadrature::gauss_product(a, b),
        }
    }

    /// Parses `fibonacci:64`, `fibonacci_sym:64`, `lebedev:26` or `gauss:8x16`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unknown quadrature '{s}'"));
        let (name, arg) = s.split_once(':').ok_or_else(bad)?;
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        Ok(match name.trim() {
            "fibonacci" => QuadratureKind::Fibonacci(num(arg)?),
            "fibonacci_sym" => QuadratureKind::FibonacciSymmetric(num(arg)?),
            "lebedev" => QuadratureKind::Lebedev(num(arg)?),
            "gauss" => {
                let (a, b) = arg.split_once('x').ok_or_else(bad)?;
                QuadratureKind::Gauss(num(a)?, num(b)?)
            }
            _ => return Err(bad()),
        })
    }
}

impl Default for QuadratureKind {
    fn default() -> Self {
        QuadratureKind::Fibonacci(64)
    }
}

impl SphericalQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 3], f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Equal-weight golden-angle spiral with `m` nodes.
    pub fn fibonacci(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("quadrature needs at least one node".into()));
        }
        let golden = PI * (3.0 - 5f64.sqrt());
        let nodes = (0..m)
            .map(|i| {
                let z = 1.0 - (2 * i + 1) as f64 / m as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                [r * phi.cos(), r * phi.sin(), z]
            })
            .collect();
        Ok(Self {
            nodes,
            weights: vec![1.0 / m as f64; m],
        })
    }

    /// Union with the antipodal set; odd moments then vanish exactly.
    pub fn symmetrized(&self) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.extend(self.nodes.iter().map(|p| p.map(|x| -x)));
        let weights = self.weights.iter().chain(&self.weights).map(|w| 0.5 * w).collect();
        Self { nodes, weights }
    }

    /// Closure under the 48-element octahedral group, merging coincident
    /// nodes. Every averaged cubic-invariant polynomial is reproduced up to
    /// the degree of the input rule and all rotations by the group leave the
    /// rule unchanged.
    pub fn octahedral_closure(&self) -> Self {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut nodes: Vec<[f64; 3]> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (p, w) in self.iter() {
            for perm in &perms {
                for signs in 0..8 {
                    let mut q = [0.0; 3];
                    for a in 0..3 {
                        let s = if signs & (1 << a) != 0 { -1.0 } else { 1.0 };
                        q[a] = s * p[perm[a]];
                    }
                    let w = w / 48.0;
                    match nodes.iter().position(|r| (0..3).all(|a| (r[a] - q[a]).abs() < 1e-13)) {
                        Some(i) => weights[i] += w,
                        None => {
                            nodes.push(q);
                            weights.push(w);
                        }
                    }
                }
            }
        }
        Self { nodes, weights }
    }

    /// Lebedev rules with 6, 14, 26 or 50 nodes (exact to degree 3, 5, 7, 11).
    pub fn lebedev(m: usize) -> Result<Self> {
        let mut q = Self { nodes: Vec::new(), weights: Vec::new() };
        match m {
            6 => q.orbit_axes(1.0 / 6.0),
            14 => {
                q.orbit_axes(1.0 / 15.0);
                q.orbit_corners(3.0 / 40.0);
            }
            26 => {
                q.orbit_axes(1.0 / 21.0);
                q.orbit_edges(4.0 / 105.0);
                q.orbit_corners(27.0 / 840.0);
            }
            50 => {
                q.orbit_axes(4.0 / 315.0);
                q.orbit_edges(64.0 / 2835.0);
                q.orbit_corners(27.0 / 1280.0);
                let s = 11f64.sqrt();
                q.orbit_aab(1.0 / s, 3.0 / s, 14641.0 / 725760.0);
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "no Lebedev rule with {m} nodes (have 6, 14, 26, 50)"
                )))
            }
        }
        Ok(q)
    }

    fn orbit_axes(&mut self, w: f64) {
        for a in 0..3 {
            for s in [1.0, -1.0] {
                let mut p = [0.0; 3];
                p[a] = s;
                self.nodes.push(p);
                self.weights.push(w);
            }
        }
    }

    fn orbit_edges(&mut self, w: f64) {
        let r = 0.5f64.sqrt();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            for sa in [r, -r] {
                for sb in [r, -r] {
                    let mut p = [0.0; 3];
                    p[a] = sa;
                    p[b] = sb;
                    self.nodes.push(p);
                    self.weights.push(w);
                }
            }
        }
    }

    fn orbit_corners(&mut self, w: f64) {
        let r = 1.0 / 3f64.sqrt();
        for sx in [r, -r] {
            for sy in [r, -r] {
                for sz in [r, -r] {
                    self.nodes.push([sx, sy, sz]);
                    self.weights.push(w);
                }
            }
        }
    }

    fn orbit_aab(&mut self, a: f64, b: f64, w: f64) {
        for pos in 0..3 {
            for signs in 0..8 {
                let mut p = [a; 3];
                p[pos] = b;
                for (k, x) in p.iter_mut().enumerate() {
                    if signs & (1 << k) != 0 {
                        *x = -*x;
                    }
                }
                self.nodes.push(p);
                self.weights.push(w);
            }
        }
    }

    /// Gauss–Legendre in cos θ times the uniform rule in φ; exact for
    /// polynomials of degree < min(2 n_theta, n_phi).
    pub fn gauss_product(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::InvalidInput("product rule needs positive sizes".into()));
        }
        let (x, w) = gauss_legendre(n_theta);
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (z, wz) in x.iter().zip(&w) {
            let r = (1.0 - z * z).sqrt();
            for j in 0..n_phi {
                let phi = 2.0 * PI * (j as f64 + 0.5) / n_phi as f64;
                nodes.push([r * phi.cos(), r * phi.sin(), *z]);
                weights.push(0.5 * wz / n_phi as f64);
            }
        }
        Ok(Self { nodes, weights })
    }

    /// Σ w_i f(n_i).
    pub fn average(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        self.iter().map(|(n, w)| w * f(n)).sum()
    }

    pub fn first_moment(&self) -> [f64; 3] {
        let mut m = [0.0; 3];
        for (n, w) in self.iter() {
            for a in 0..3 {
                m[a] += w * n[a];
            }
        }
        m
    }
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm1) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Separation grid for scale integrals: 0 followed by `nodes` log-spaced
/// points from `ell * ratio` to `ell`.
pub fn log_tau_grid(ell: f64, nodes: usize, ratio: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nodes + 1);
    out.push(0.0);
    if nodes == 1 {
        out.push(ell);
        return out;
    }
    let (lo, hi) = ((ell * ratio).ln(), ell.ln());
    for i in 0..nodes {
        let s = i as f64 / (nodes - 1) as f64;
        out.push((lo + s * (hi - lo)).exp());
    }
    *out.last_mut().unwrap() = ell;
    out
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

pub fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..x.len() {
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
        out.push(acc);
    }
    out
}

/// ∫₀^S of the quadratic through (x_a, y_a), (x_b, y_b), (x_c, y_c), with S
/// measured from x_a.
fn quad_integral(x: [f64; 3], y: [f64; 3], s: f64) -> f64 {
    let h0 = x[1] - x[0];
    let c1 = (y[1] - y[0]) / h0;
    let c2 = ((y[2] - y[1]) / (x[2] - x[1]) - c1) / (x[2] - x[0]);
    y[0] * s + c1 * s * s / 2.0 + c2 * (s * s * s / 3.0 - h0 * s * s / 2.0)
}

/// Running integral by composite Simpson on a non-uniform grid. Pairs of
/// intervals are integrated with their interpolating quadratic; a leftover
/// last interval uses the quadratic through the last three points, and two
/// points fall back to the trapezoid.
pub fn cumulative_simpson(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert_eq!(n, y.len());
    if n < 3 {
        return cumulative_trapezoid(x, y);
    }
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i + 2 < n {
        let xs = [x[i], x[i + 1], x[i + 2]];
        let ys = [y[i], y[i + 1], y[i + 2]];
        out[i + 1] = out[i] + quad_integral(xs, ys, xs[1] - xs[0]);
        out[i + 2] = out[i] + quad_integral(xs, ys, xs[2] - xs[0]);
        i += 2;
    }
    if i + 1 < n {
        let xs = [x[n - 3], x[n - 2], x[n - 1]];
        let ys = [y[n - 3], y[n - 2], y[n - 1]];
        let whole = quad_integral(xs, ys, xs[2] - xs[0]);
        let part = quad_integral(xs, ys, xs[1] - xs[0]);
        out[n - 1] = out[n - 2] + whole - part;
    }
    out
}

pub fn simpson(x: &[f64], y: &[f64]) -> f64 {
    cumulative_simpson(x, y).last().copied().unwrap_or(0.0)
}
