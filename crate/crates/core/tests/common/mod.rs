//! Oracles and fixtures shared by the integration tests. Nothing here calls
//! into the library's quadrature or series code.
#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spps::{build_seed, make_grid, sample, CoeffExpr, SeedMode, SppsBasis};

pub const TOL: f64 = 1e-12;
pub const N_POINTS: usize = 10001;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn expr(src: &str) -> CoeffExpr {
    CoeffExpr::parse(src).unwrap_or_else(|e| panic!("{src}: {e}"))
}

/// Basis on `[0, a]` deep enough for `|omega| <= omega_max`.
pub fn basis(a: f64, p: &str, q: &str, mode: SeedMode, omega_max: f64) -> SppsBasis {
    let g = make_grid(a, N_POINTS).unwrap();
    let p = sample(&expr(p), g).unwrap();
    let q = sample(&expr(q), g).unwrap();
    let seed = build_seed(&p, &q, &mode).unwrap();
    SppsBasis::for_omega_max(p, q, seed, omega_max, TOL).unwrap()
}

pub fn unit_seed() -> SeedMode {
    SeedMode::Explicit(expr("1"))
}

/// `sum_{k > n} z^k / k!` term by term from a log-factorial table.
pub fn brute_tail(z: f64, n: usize) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let mut ln_fact = vec![0.0f64; n + 2000];
    for k in 1..ln_fact.len() {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    (n + 1..ln_fact.len())
        .map(|k| (k as f64 * z.ln() - ln_fact[k]).exp())
        .sum()
}

/// Smallest even `n >= 2` with `brute_tail(z, n) <= tol`.
pub fn brute_order(z: f64, tol: f64, n_max: usize) -> Option<usize> {
    (2..=n_max).step_by(2).find(|&n| brute_tail(z, n) <= tol)
}

/// `u(a)` for `u'' = (lambda - q(x)) u`, `u(0) = 0`, `u'(0) = 1`, by classical RK4.
pub fn shoot(q: fn(f64) -> f64, a: f64, lambda: f64, steps: usize) -> f64 {
    let h = a / steps as f64;
    let rhs = |x: f64, u: f64, v: f64| (v, (lambda - q(x)) * u);
    let (mut u, mut v) = (0.0, 1.0);
    for k in 0..steps {
        let x = k as f64 * h;
        let (k1u, k1v) = rhs(x, u, v);
        let (k2u, k2v) = rhs(x + h / 2.0, u + h / 2.0 * k1u, v + h / 2.0 * k1v);
        let (k3u, k3v) = rhs(x + h / 2.0, u + h / 2.0 * k2u, v + h / 2.0 * k2v);
        let (k4u, k4v) = rhs(x + h, u + h * k3u, v + h * k3v);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    u
}

/// Dirichlet eigenvalues of `u'' + q u = lambda u` on `(0, a)`, largest first,
/// by scanning `lambda` downward from `lambda_max` and bisecting sign changes.
pub fn shooting_eigenvalues(q: fn(f64) -> f64, a: f64, lambda_max: f64, count: usize) -> Vec<f64> {
    const STEPS: usize = 4000;
    let f = |l: f64| shoot(q, a, l, STEPS);
    let mut found = Vec::new();
    let mut hi = lambda_max;
    let mut f_hi = f(hi);
    while found.len() < count {
        let lo = hi - 0.25;
        let f_lo = f(lo);
        if f_lo * f_hi <= 0.0 {
            let (mut l, mut r, mut fr) = (lo, hi, f_hi);
            for _ in 0..200 {
                let m = 0.5 * (l + r);
                let fm = f(m);
                if fm * fr <= 0.0 {
                    l = m;
                } else {
                    r = m;
                    fr = fm;
                }
                if r - l <= 1e-13 * m.abs().max(1.0) {
                    break;
                }
            }
            found.push(0.5 * (l + r));
        }
        hi = lo;
        f_hi = f_lo;
    }
    found
}
