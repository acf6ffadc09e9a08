//! Zero-energy seed `g0` solving `(p g0')' + q g0 = 0` and the two weights
//! `g0^2` and `1 / (p g0^2)` that drive the power recursion.

use num_complex::Complex64;

use crate::expr::CoeffExpr;
use crate::grid::{apply_operator, derivative, interior_max, is_finite, sample, SampledFn};
use crate::{Error, Result};

/// Relative threshold below which `|g0|` counts as vanishing.
pub const VANISH_THRESHOLD: f64 = 1e-10;

/// Relative ODE residual an explicit seed must stay under.
pub const EXPLICIT_RESIDUAL_THRESHOLD: f64 = 1e-5;

/// Relative threshold below which `|p|` counts as vanishing.
const P_VANISH_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum SeedMode {
    /// `g0 = g1 + i g2` with `(g1, p g1')(0) = (1, 0)` and `(g2, p g2')(0) = (0, 1)`.
    Auto,
    /// A closed-form seed; checked against the ODE residual.
    Explicit(CoeffExpr),
    /// Integrate from `g0(0) = u0`, `(p g0')(0) = v0`.
    InitialValues { u0: Complex64, v0: Complex64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    g0: SampledFn,
    g0_prime: SampledFn,
    w_plus: SampledFn,
    w_minus: SampledFn,
    bound_m: f64,
}

impl Seed {
    /// Assembles a seed from tabulated `g0`, `g0'` and `p`, checking that `g0`
    /// does not vanish. No ODE residual check is made here.
    pub fn from_parts(p: &SampledFn, g0: SampledFn, g0_prime: SampledFn) -> Result<Seed> {
        Seed::assemble(p, g0, g0_prime, "")
    }

    fn assemble(p: &SampledFn, g0: SampledFn, g0_prime: SampledFn, hint: &'static str) -> Result<Seed> {
        if p.grid() != g0.grid() || p.grid() != g0_prime.grid() {
            return Err(Error::GridMismatch);
        }
        check_p(p)?;
        let threshold = VANISH_THRESHOLD * g0.max_abs();
        let (node, modulus) =
            g0.values()
                .iter()
                .map(|v| v.norm())
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |best, (j, m)| if m < best.1 { (j, m) } else { best },
                );
        if modulus.is_nan() || modulus <= threshold {
            return Err(Error::SeedVanishes { node, modulus, hint });
        }
        let w_plus = g0.map(|g| g * g);
        let w_minus = w_plus.zip_with(p, |g2, p| 1.0 / (p * g2))?;
        if let Some(node) = w_minus.values().iter().position(|v| !is_finite(*v)) {
            return Err(Error::NonFinite {
                what: "seed weight 1/(p g0^2)",
                node,
            });
        }
        let bound_m = w_plus
            .values()
            .iter()
            .zip(w_minus.values())
            .fold(0.0f64, |m, (a, b)| m.max(a.norm()).max(b.norm()));
        Ok(Seed {
            g0,
            g0_prime,
            w_plus,
            w_minus,
            bound_m,
        })
    }

    pub fn g0(&self) -> &SampledFn {
        &self.g0
    }

    pub fn g0_prime(&self) -> &SampledFn {
        &self.g0_prime
    }

    /// `g0^2`
    pub fn w_plus(&self) -> &SampledFn {
        &self.w_plus
    }

    /// `1 / (p g0^2)`
    pub fn w_minus(&self) -> &SampledFn {
        &self.w_minus
    }

    /// Supremum of `|g0^2|` and `|1/(p g0^2)|` over the grid.
    pub fn bound_m(&self) -> f64 {
        self.bound_m
    }
}

fn check_p(p: &SampledFn) -> Result<()> {
    let threshold = P_VANISH_THRESHOLD * p.max_abs();
    match p
        .values()
        .iter()
        .position(|v| v.norm().is_nan() || v.norm() <= threshold)
    {
        Some(node) => Err(Error::PVanishes { node }),
        None => Ok(()),
    }
}

/// Solves `g' = v / p`, `v' = -q g` from `(g, v)(0) = (u0, v0)` by classical
/// RK4 with step `h`. Half-step coefficients come from cubic interpolation.
/// Returns `(g, v)` where `v = p g'`.
pub fn integrate_zero_energy(
    p: &SampledFn,
    q: &SampledFn,
    u0: Complex64,
    v0: Complex64,
) -> Result<(SampledFn, SampledFn)> {
    let grid = p.grid();
    if q.grid() != grid {
        return Err(Error::GridMismatch);
    }
    check_p(p)?;
    let h = grid.h();
    let n = grid.n_points();
    let (pv, qv) = (p.values(), q.values());
    let rhs = |p: Complex64, q: Complex64, g: Complex64, v: Complex64| (v / p, -q * g);

    let mut g = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    g.push(u0);
    v.push(v0);
    let (mut gc, mut vc) = (u0, v0);
    for j in 0..n - 1 {
        let (pm, qm) = (p.midpoint(j), q.midpoint(j));
        let (k1g, k1v) = rhs(pv[j], qv[j], gc, vc);
        let (k2g, k2v) = rhs(pm, qm, gc + 0.5 * h * k1g, vc + 0.5 * h * k1v);
        let (k3g, k3v) = rhs(pm, qm, gc + 0.5 * h * k2g, vc + 0.5 * h * k2v);
        let (k4g, k4v) = rhs(pv[j + 1], qv[j + 1], gc + h * k3g, vc + h * k3v);
        gc += h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        vc += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !(is_finite(gc) && is_finite(vc)) {
            return Err(Error::NonFinite {
                what: "zero-energy integration",
                node: j + 1,
            });
        }
        g.push(gc);
        v.push(vc);
    }
    Ok((SampledFn::from_vec(grid, g), SampledFn::from_vec(grid, v)))
}

pub fn build_seed(p: &SampledFn, q: &SampledFn, mode: &SeedMode) -> Result<Seed> {
    if p.grid() != q.grid() {
        return Err(Error::GridMismatch);
    }
    match mode {
        SeedMode::Auto => {
            let one = Complex64::new(1.0, 0.0);
            let zero = Complex64::new(0.0, 0.0);
            let (g1, v1) = integrate_zero_energy(p, q, one, zero)?;
            let (g2, v2) = integrate_zero_energy(p, q, zero, one)?;
            let i = Complex64::new(0.0, 1.0);
            let g0 = g1.zip_with(&g2, |a, b| a + i * b)?;
            let flux = v1.zip_with(&v2, |a, b| a + i * b)?;
            let g0_prime = flux.zip_with(p, |f, p| f / p)?;
            let hint = if p.is_real(0.0) && q.is_real(0.0) {
                ""
            } else {
                "; complex coefficients do not guarantee a nonvanishing auto seed, supply an explicit one"
            };
            Seed::assemble(p, g0, g0_prime, hint)
        }
        SeedMode::InitialValues { u0, v0 } => {
            let (g0, flux) = integrate_zero_energy(p, q, *u0, *v0)?;
            let g0_prime = flux.zip_with(p, |f, p| f / p)?;
            Seed::assemble(p, g0, g0_prime, "")
        }
        SeedMode::Explicit(expr) => {
            let g0 = sample(expr, p.grid())?;
            let g0_prime = derivative(&g0);
            let seed = Seed::assemble(p, g0, g0_prime, "")?;
            let residual = interior_max(apply_operator(p, q, seed.g0())?.values(), 3) / seed.g0().max_abs();
            if residual.is_nan() || residual > EXPLICIT_RESIDUAL_THRESHOLD {
                return Err(Error::SeedResidualTooLarge {
                    residual,
                    threshold: EXPLICIT_RESIDUAL_THRESHOLD,
                });
            }
            Ok(seed)
        }
    }
}
