//! The omega-independent families `X^(n)` and `X~^(n)`.
//!
//! Both start at `1` and are built by `X^(n) = n * int_0^x X^(n-1) w_n`, where
//! the weight alternates between `g0^2` and `1 / (p g0^2)`:
//!
//! | index | `X~^(n)` weight | `X^(n)` weight |
//! |-------|-----------------|----------------|
//! | odd   | `g0^2`          | `1/(p g0^2)`   |
//! | even  | `1/(p g0^2)`    | `g0^2`         |
//!
//! The factor `n` is kept inside the table; series consumers divide by `n!`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::grid::{cumulative_integral, is_finite, Grid, SampledFn};
use crate::seed::Seed;
use crate::{Error, Result};

/// Largest truncation order [`truncation_order`] will return.
pub const N_MAX: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerTable {
    seed: Arc<Seed>,
    x: Vec<SampledFn>,
    xt: Vec<SampledFn>,
}

impl PowerTable {
    pub fn seed(&self) -> &Arc<Seed> {
        &self.seed
    }

    pub fn grid(&self) -> Grid {
        self.seed.g0().grid()
    }

    /// Highest index `N` held in the table.
    pub fn depth(&self) -> usize {
        self.x.len() - 1
    }

    /// `X^(n)`
    pub fn x(&self, n: usize) -> &SampledFn {
        &self.x[n]
    }

    /// `X~^(n)`
    pub fn xt(&self, n: usize) -> &SampledFn {
        &self.xt[n]
    }

    pub fn x_family(&self) -> &[SampledFn] {
        &self.x
    }

    pub fn xt_family(&self) -> &[SampledFn] {
        &self.xt
    }
}

pub fn build_power_table(seed: Arc<Seed>, depth: usize) -> Result<PowerTable> {
    if depth < 1 {
        return Err(Error::InvalidArgument("power table depth must be at least 1".into()));
    }
    let grid = seed.g0().grid();
    let one = SampledFn::constant(grid, Complex64::new(1.0, 0.0));
    let mut x = Vec::with_capacity(depth + 1);
    let mut xt = Vec::with_capacity(depth + 1);
    x.push(one.clone());
    xt.push(one);
    for n in 1..=depth {
        let (wt, w) = if n % 2 == 1 {
            (seed.w_plus(), seed.w_minus())
        } else {
            (seed.w_minus(), seed.w_plus())
        };
        let next_xt = recursion_step(&xt[n - 1], wt, n)?;
        let next_x = recursion_step(&x[n - 1], w, n)?;
        xt.push(next_xt);
        x.push(next_x);
    }
    Ok(PowerTable { seed, x, xt })
}

fn recursion_step(prev: &SampledFn, weight: &SampledFn, n: usize) -> Result<SampledFn> {
    let integrand = prev.zip_with(weight, |a, b| a * b)?;
    let next = cumulative_integral(&integrand).scale(Complex64::new(n as f64, 0.0));
    if next.values().iter().any(|v| !is_finite(*v)) {
        return Err(Error::PowerOverflow { n });
    }
    Ok(next)
}

/// `sum_{k > n} z^k / k!`, the tail of the exponential series after index `n`.
pub fn tail_bound(z: f64, n: usize) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let first = n + 1;
    let ln_fact: f64 = (2..=first).map(|k| (k as f64).ln()).sum();
    let ln_term = first as f64 * z.ln() - ln_fact;
    if ln_term > f64::MAX.ln() {
        return f64::INFINITY;
    }
    let mut term = ln_term.exp();
    let mut sum = 0.0;
    let mut k = first;
    loop {
        sum += term;
        if !sum.is_finite() {
            return f64::INFINITY;
        }
        k += 1;
        term *= z / k as f64;
        if (k as f64 > z && term <= sum * 1e-17) || term == 0.0 {
            return sum;
        }
    }
}

/// Smallest even `N >= 2` with `tail_bound(z, N) <= tol`, capped at `n_max`.
pub fn truncation_order_for(z: f64, tol: f64, n_max: usize) -> Result<usize> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "series argument must be finite and non-negative, got {z}"
        )));
    }
    (2..=n_max)
        .step_by(2)
        .find(|&n| tail_bound(z, n) <= tol)
        .ok_or(Error::TruncationCapExceeded { z, tol, n_max })
}

/// Truncation order for the solution series at `|omega|` on `[0, a]`, using
/// the sup bound `|X^(n)(x)| <= (M x)^n` with `M` from the seed.
pub fn truncation_order(seed: &Seed, a: f64, omega_abs: f64, tol: f64) -> Result<usize> {
    truncation_order_for(omega_abs * seed.bound_m() * a, tol, N_MAX)
}
