//! Solutions of `(p u')' + q u = omega^2 u` assembled from a [`PowerTable`].
//!
//! With `S` denoting sums over the table,
//!
//! ```text
//! u1  = g0 * sum_{even n} omega^n / n! * X~^(n)
//! u2  = g0 * sum_{odd n}  omega^(n-1) / n! * X^(n)          (normalized)
//! u1' = g0'/g0 * u1 + 1/(g0 p) * sum_{odd k} omega^(k+1) / k! * X~^(k)
//! u2' = g0'/g0 * u2 + 1/(g0 p) * sum_{even k} omega^k / k! * X^(k)
//! ```
//!
//! so that `u1(0) = g0(0)`, `u1'(0) = g0'(0)`, `u2(0) = 0` and
//! `u2'(0) = 1 / (g0(0) p(0))`. Every coefficient attached to table index `k`
//! has the form `omega^(k+s) / k!` and is accumulated two indices at a time
//! with the scalar `omega^2 / ((k+1)(k+2))`, so neither `omega^n` nor `n!` is
//! ever formed on its own.

use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;

use crate::grid::{apply_operator, interior_max, Grid, SampledFn};
use crate::powers::{build_power_table, tail_bound, truncation_order, PowerTable};
use crate::seed::Seed;
use crate::{Error, Result};

/// Nodes trimmed at each end of the grid by residual checks.
pub const RESIDUAL_TRIM: usize = 3;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Everything needed to evaluate solutions at any `omega`. The power table is
/// built once and shared.
#[derive(Debug, Clone)]
pub struct SppsBasis {
    p: SampledFn,
    q: SampledFn,
    table: Arc<PowerTable>,
}

/// The normalized solution pair at one `omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPair {
    pub omega: Complex64,
    pub u1: SampledFn,
    pub u2: SampledFn,
    pub u1_prime: SampledFn,
    pub u2_prime: SampledFn,
    pub trunc_n: usize,
    pub tail_bound: f64,
}

impl SolutionPair {
    /// `p (u1 u2' - u1' u2)`; identically one for the normalized pair.
    pub fn wronskian(&self, p: &SampledFn) -> Result<SampledFn> {
        let values = (0..p.values().len())
            .map(|j| {
                p.values()[j]
                    * (self.u1.values()[j] * self.u2_prime.values()[j]
                        - self.u1_prime.values()[j] * self.u2.values()[j])
            })
            .collect();
        SampledFn::new(p.grid(), values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    /// `max |(p u')' + q u - omega^2 u|` over interior nodes divided by `max |u|`.
    pub norm: f64,
    /// Set when `u` is identically zero; `norm` is then reported as zero.
    pub degenerate: bool,
}

/// Output of the Darboux transformation for `p == 1`.
///
/// `v1`, `v2` solve `v'' + q_new v = omega^2 v`. In Schrödinger form
/// `(-d^2 + r + omega^2) v = 0` the potential is `r = -q_new`, i.e.
/// `r = 2 (g0'/g0)^2 - q_s` with `q_s = -q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DarbouxTransform {
    pub q_new: SampledFn,
    pub v1: SampledFn,
    pub v2: SampledFn,
    /// `1 / g0`, a zero-energy solution of the transformed equation.
    pub seed_new: SampledFn,
}

/// `(k, omega^(k+s) / k!)` for `k = first, first + 2, ..., <= last`, given the
/// coefficient at `first`.
fn ladder(first: usize, start: Complex64, omega2: Complex64, last: usize) -> Vec<(usize, Complex64)> {
    let mut out = Vec::new();
    let mut k = first;
    let mut c = start;
    while k <= last {
        out.push((k, c));
        c = c * omega2 / ((k + 1) as f64 * (k + 2) as f64);
        k += 2;
    }
    out
}

fn sum_family(family: &[SampledFn], terms: &[(usize, Complex64)], range: Range<usize>) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); range.len()];
    for &(k, c) in terms {
        let values = &family[k].values()[range.clone()];
        for (a, v) in acc.iter_mut().zip(values) {
            *a += c * v;
        }
    }
    acc
}

/// Raw solution values on a node range.
pub(crate) struct RawPair {
    pub u1: Vec<Complex64>,
    pub u2: Vec<Complex64>,
    pub u1_prime: Vec<Complex64>,
    pub u2_prime: Vec<Complex64>,
    pub trunc_n: usize,
    pub tail_bound: f64,
}

impl SppsBasis {
    /// Builds the power table of the given depth for `seed`.
    pub fn new(p: SampledFn, q: SampledFn, seed: Seed, depth: usize) -> Result<SppsBasis> {
        let table = build_power_table(Arc::new(seed), depth)?;
        SppsBasis::from_table(p, q, Arc::new(table))
    }

    /// Builds a table deep enough for `|omega| <= omega_max` at `tol`, with two
    /// extra indices so characteristic series of the same order fit.
    pub fn for_omega_max(p: SampledFn, q: SampledFn, seed: Seed, omega_max: f64, tol: f64) -> Result<SppsBasis> {
        let depth = SppsBasis::required_depth(&seed, omega_max, tol)?;
        SppsBasis::new(p, q, seed, depth)
    }

    pub fn required_depth(seed: &Seed, omega_max: f64, tol: f64) -> Result<usize> {
        Ok(truncation_order(seed, seed.g0().grid().a(), omega_max, tol)? + 2)
    }

    pub fn from_table(p: SampledFn, q: SampledFn, table: Arc<PowerTable>) -> Result<SppsBasis> {
        let grid = table.grid();
        if p.grid() != grid || q.grid() != grid {
            return Err(Error::GridMismatch);
        }
        Ok(SppsBasis { p, q, table })
    }

    pub fn grid(&self) -> Grid {
        self.table.grid()
    }

    pub fn p(&self) -> &SampledFn {
        &self.p
    }

    pub fn q(&self) -> &SampledFn {
        &self.q
    }

    pub fn seed(&self) -> &Arc<Seed> {
        self.table.seed()
    }

    pub fn table(&self) -> &Arc<PowerTable> {
        &self.table
    }

    /// True when `p` and `q` are real-valued on the grid.
    pub fn has_real_coefficients(&self) -> bool {
        self.p.is_real(0.0) && self.q.is_real(0.0)
    }

    /// Even truncation order and its tail bound for `|omega|`; fails if the
    /// table is too shallow.
    pub fn truncation(&self, omega: Complex64, tol: f64) -> Result<(usize, f64)> {
        let seed = self.seed();
        let a = self.grid().a();
        let n = truncation_order(seed, a, omega.norm(), tol)?;
        if n > self.table.depth() {
            return Err(Error::TableTooShallow {
                required: n,
                available: self.table.depth(),
            });
        }
        Ok((n, tail_bound(omega.norm() * seed.bound_m() * a, n)))
    }

    /// The `(n, omega^n / n!)` terms summed against `X~^(n)` in `u1`.
    pub fn u1_terms(&self, omega: Complex64, tol: f64) -> Result<Vec<(usize, Complex64)>> {
        let (n, _) = self.truncation(omega, tol)?;
        Ok(ladder(0, ONE, omega * omega, n))
    }

    pub fn eval_u1(&self, omega: Complex64, tol: f64) -> Result<SampledFn> {
        let (n, _) = self.truncation(omega, tol)?;
        let range = 0..self.grid().n_points();
        let s = sum_family(self.table.xt_family(), &ladder(0, ONE, omega * omega, n), range);
        Ok(self.times_g0(s))
    }

    /// `u2`; `normalized` divides the series by `omega`, which keeps it
    /// well-defined at `omega = 0`.
    pub fn eval_u2(&self, omega: Complex64, tol: f64, normalized: bool) -> Result<SampledFn> {
        let (n, _) = self.truncation(omega, tol)?;
        let range = 0..self.grid().n_points();
        let start = if normalized { ONE } else { omega };
        let s = sum_family(self.table.x_family(), &ladder(1, start, omega * omega, n - 1), range);
        Ok(self.times_g0(s))
    }

    /// `(u1', u2')` from their own series, `u2` normalized.
    pub fn eval_derivatives(&self, omega: Complex64, tol: f64) -> Result<(SampledFn, SampledFn)> {
        let raw = self.evaluate_range(omega, tol, 0..self.grid().n_points())?;
        let grid = self.grid();
        Ok((
            SampledFn::from_vec(grid, raw.u1_prime),
            SampledFn::from_vec(grid, raw.u2_prime),
        ))
    }

    pub fn solve(&self, omega: Complex64, tol: f64) -> Result<SolutionPair> {
        let raw = self.evaluate_range(omega, tol, 0..self.grid().n_points())?;
        let grid = self.grid();
        Ok(SolutionPair {
            omega,
            u1: SampledFn::from_vec(grid, raw.u1),
            u2: SampledFn::from_vec(grid, raw.u2),
            u1_prime: SampledFn::from_vec(grid, raw.u1_prime),
            u2_prime: SampledFn::from_vec(grid, raw.u2_prime),
            trunc_n: raw.trunc_n,
            tail_bound: raw.tail_bound,
        })
    }

    /// `c1 u1 + c2 u2` with the normalized `u2`.
    pub fn general_solution(&self, omega: Complex64, c1: Complex64, c2: Complex64, tol: f64) -> Result<SampledFn> {
        let u1 = self.eval_u1(omega, tol)?;
        let u2 = self.eval_u2(omega, tol, true)?;
        u1.zip_with(&u2, |a, b| c1 * a + c2 * b)
    }

    pub(crate) fn evaluate_range(&self, omega: Complex64, tol: f64, range: Range<usize>) -> Result<RawPair> {
        let (n, tail) = self.truncation(omega, tol)?;
        let omega2 = omega * omega;
        let xt = self.table.xt_family();
        let x = self.table.x_family();
        let s1 = sum_family(xt, &ladder(0, ONE, omega2, n), range.clone());
        let s2 = sum_family(x, &ladder(1, ONE, omega2, n - 1), range.clone());
        let s3 = sum_family(xt, &ladder(1, omega2, omega2, n - 1), range.clone());
        let s4 = sum_family(x, &ladder(0, ONE, omega2, n), range.clone());

        let seed = self.seed();
        let mut raw = RawPair {
            u1: Vec::with_capacity(range.len()),
            u2: Vec::with_capacity(range.len()),
            u1_prime: Vec::with_capacity(range.len()),
            u2_prime: Vec::with_capacity(range.len()),
            trunc_n: n,
            tail_bound: tail,
        };
        for (i, j) in range.enumerate() {
            let g0 = seed.g0().values()[j];
            let dg0 = seed.g0_prime().values()[j];
            let inv_flux = 1.0 / (g0 * self.p.values()[j]);
            raw.u1.push(g0 * s1[i]);
            raw.u2.push(g0 * s2[i]);
            raw.u1_prime.push(dg0 * s1[i] + inv_flux * s3[i]);
            raw.u2_prime.push(dg0 * s2[i] + inv_flux * s4[i]);
        }
        Ok(raw)
    }

    fn times_g0(&self, s: Vec<Complex64>) -> SampledFn {
        let values = s
            .into_iter()
            .zip(self.seed().g0().values())
            .map(|(s, g)| s * g)
            .collect();
        SampledFn::from_vec(self.grid(), values)
    }

    /// Discrete certificate that `u` solves the equation at `omega`.
    pub fn residual(&self, omega: Complex64, u: &SampledFn) -> Result<Residual> {
        let scale = u.max_abs();
        if scale == 0.0 {
            return Ok(Residual {
                norm: 0.0,
                degenerate: true,
            });
        }
        let omega2 = omega * omega;
        let r = apply_operator(&self.p, &self.q, u)?.zip_with(u, |lu, u| lu - omega2 * u)?;
        Ok(Residual {
            norm: interior_max(r.values(), RESIDUAL_TRIM) / scale,
            degenerate: false,
        })
    }

    /// Applies `d/dx - g0'/g0` to the solution pair through the series.
    /// Requires `p == 1`.
    pub fn darboux(&self, omega: Complex64, tol: f64) -> Result<DarbouxTransform> {
        if self.p.values().iter().any(|p| (p - ONE).norm() > 1e-12) {
            return Err(Error::NonUnitP);
        }
        let (n, _) = self.truncation(omega, tol)?;
        let omega2 = omega * omega;
        let range = 0..self.grid().n_points();
        let s1 = sum_family(self.table.xt_family(), &ladder(1, omega2, omega2, n - 1), range.clone());
        let s2 = sum_family(self.table.x_family(), &ladder(0, omega, omega2, n), range);
        let seed = self.seed();
        let grid = self.grid();
        let inv_g0 = seed.g0().map(|g| 1.0 / g);
        let v1 = SampledFn::from_vec(grid, s1.iter().zip(inv_g0.values()).map(|(s, r)| s * r).collect());
        let v2 = SampledFn::from_vec(grid, s2.iter().zip(inv_g0.values()).map(|(s, r)| s * r).collect());
        let log_deriv = seed.g0_prime().zip_with(seed.g0(), |d, g| d / g)?;
        let q_new = self.q.zip_with(&log_deriv, |q, l| -q - 2.0 * l * l)?;
        Ok(DarbouxTransform {
            q_new,
            v1,
            v2,
            seed_new: inv_g0,
        })
    }
}
