//! Sturm–Liouville spectra on `(0, a)` with Robin conditions
//!
//! ```text
//! u(0) cos(alpha) + u'(0) sin(alpha) = 0
//! u(a) cos(beta)  + u'(a) sin(beta)  = 0
//! ```
//!
//! The left condition fixes the combination `u2` (Dirichlet-left) or
//! `u1 + gamma u2`; the right condition applied to that combination is an even
//! analytic function of `omega`. Its Taylor coefficients come straight from the
//! endpoint values of the power table, giving the entire function
//! `K(lambda) = sum_j a_{2j} lambda^j` whose zeros are the eigenvalues.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::grid::SampledFn;
use crate::powers::truncation_order;
use crate::solver::SppsBasis;
use crate::{Error, Result};

/// `|sin(alpha)|` below this counts as a Dirichlet-left condition.
const ANGLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConditions {
    pub alpha: f64,
    pub beta: f64,
}

impl BoundaryConditions {
    pub fn new(alpha: f64, beta: f64) -> BoundaryConditions {
        BoundaryConditions { alpha, beta }
    }

    pub fn dirichlet() -> BoundaryConditions {
        BoundaryConditions::new(0.0, 0.0)
    }

    /// `alpha` is a multiple of pi.
    pub fn is_dirichlet_left(&self) -> bool {
        self.alpha.sin().abs() < ANGLE_EPS
    }
}

/// `gamma = -g0(0) p(0) (g0(0) cot(alpha) + g0'(0))`, so that `u1 + gamma u2`
/// satisfies the left Robin condition.
pub fn robin_gamma(basis: &SppsBasis, alpha: f64) -> Result<Complex64> {
    if BoundaryConditions::new(alpha, 0.0).is_dirichlet_left() {
        return Err(Error::DirichletLeft);
    }
    let seed = basis.seed();
    let g0 = seed.g0().first();
    let dg0 = seed.g0_prime().first();
    let p0 = basis.p().first();
    let cot = alpha.cos() / alpha.sin();
    Ok(-g0 * p0 * (g0 * cot + dg0))
}

/// Coefficients `a_m` of `kappa(omega) = sum_m a_m omega^m`; odd entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicSeries {
    coeffs: Vec<Complex64>,
    gamma: Option<Complex64>,
    bc: BoundaryConditions,
}

impl CharacteristicSeries {
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `None` in the Dirichlet-left branch.
    pub fn gamma(&self) -> Option<Complex64> {
        self.gamma
    }

    pub fn bc(&self) -> BoundaryConditions {
        self.bc
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients of `K` in powers of `lambda`.
    pub fn lambda_coeffs(&self) -> Vec<Complex64> {
        self.coeffs.iter().step_by(2).copied().collect()
    }

    /// `K(lambda)`
    pub fn eval(&self, lambda: Complex64) -> Complex64 {
        self.eval_with_derivative(lambda).0
    }

    /// `(K(lambda), K'(lambda))` by Horner's scheme.
    pub fn eval_with_derivative(&self, lambda: Complex64) -> (Complex64, Complex64) {
        let mut k = Complex64::new(0.0, 0.0);
        let mut dk = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().step_by(2).rev() {
            dk = dk * lambda + k;
            k = k * lambda + c;
        }
        (k, dk)
    }

    /// `kappa(omega) = K(omega^2)`
    pub fn eval_omega(&self, omega: Complex64) -> Complex64 {
        self.eval(omega * omega)
    }
}

pub fn characteristic_series(basis: &SppsBasis, bc: BoundaryConditions, order: usize) -> Result<CharacteristicSeries> {
    let top_even = order - order % 2;
    let table = basis.table();
    if top_even + 1 > table.depth() {
        return Err(Error::TableTooShallow {
            required: top_even + 1,
            available: table.depth(),
        });
    }
    let seed = basis.seed();
    let (g0, dg0, pa) = (seed.g0().last(), seed.g0_prime().last(), basis.p().last());
    let (sb, cb) = bc.beta.sin_cos();
    let value_weight = g0 * cb + dg0 * sb;
    let flux_weight = sb / (g0 * pa);

    // inv_fact[k] = 1/k!
    let mut inv_fact = vec![1.0f64; top_even + 2];
    for k in 1..inv_fact.len() {
        inv_fact[k] = inv_fact[k - 1] / k as f64;
    }
    let x = |k: usize| table.x(k).last() * inv_fact[k];
    let xt = |k: usize| table.xt(k).last() * inv_fact[k];

    let gamma = if bc.is_dirichlet_left() {
        None
    } else {
        Some(robin_gamma(basis, bc.alpha)?)
    };
    let zero = Complex64::new(0.0, 0.0);
    let coeffs = (0..=order)
        .map(|m| {
            if m % 2 == 1 {
                return zero;
            }
            match gamma {
                None => value_weight * x(m + 1) + flux_weight * x(m),
                Some(gamma) => {
                    let flux_xt = if m >= 2 { xt(m - 1) } else { zero };
                    value_weight * (xt(m) + gamma * x(m + 1)) + flux_weight * (flux_xt + gamma * x(m))
                }
            }
        })
        .collect();
    Ok(CharacteristicSeries { coeffs, gamma, bc })
}

/// Default series order for `|lambda| <= lambda_abs_max`: the solver's
/// truncation order at `|omega| = sqrt(lambda_abs_max)`.
pub fn default_order(basis: &SppsBasis, lambda_abs_max: f64, tol: f64) -> Result<usize> {
    truncation_order(basis.seed(), basis.grid().a(), lambda_abs_max.sqrt(), tol)
}

/// Builds the solution satisfying the left condition and returns
/// `u(a) cos(beta) + u'(a) sin(beta)`, with `u = u2` (Dirichlet-left) or
/// `u = u1 + gamma u2`.
pub fn characteristic_eval_direct(
    basis: &SppsBasis,
    bc: BoundaryConditions,
    omega: Complex64,
    tol: f64,
) -> Result<Complex64> {
    let last = basis.grid().n_points() - 1;
    let raw = basis.evaluate_range(omega, tol, last..last + 1)?;
    let (c1, c2) = if bc.is_dirichlet_left() {
        (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    } else {
        let seed = basis.seed();
        let (g0, dg0, p0) = (seed.g0().first(), seed.g0_prime().first(), basis.p().first());
        let (sa, ca) = bc.alpha.sin_cos();
        // c1 (g0 cos + g0' sin) + c2 sin / (g0 p) = 0 with c1 = 1
        (Complex64::new(1.0, 0.0), -(g0 * ca + dg0 * sa) * g0 * p0 / sa)
    };
    let u = c1 * raw.u1[0] + c2 * raw.u2[0];
    let du = c1 * raw.u1_prime[0] + c2 * raw.u2_prime[0];
    let (sb, cb) = bc.beta.sin_cos();
    Ok(u * cb + du * sb)
}

/// Constant `c` with `K(omega^2) = c * direct(omega)`, measured at `omega_ref`.
pub fn direct_normalizer(
    series: &CharacteristicSeries,
    basis: &SppsBasis,
    omega_ref: Complex64,
    tol: f64,
) -> Result<Complex64> {
    let direct = characteristic_eval_direct(basis, series.bc(), omega_ref, tol)?;
    Ok(series.eval_omega(omega_ref) / direct)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootMethod {
    /// Scan `|K|` along the window, refine each local minimum by Newton.
    ScanNewton,
    /// All roots of the truncated polynomial by Aberth–Ehrlich, filtered to
    /// the window and polished by Newton.
    Aberth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumOptions {
    pub scan_points: usize,
    pub accept_tol: f64,
    pub max_newton: usize,
    /// Allowed `|Im lambda| / max(1, |lambda|)` for real self-adjoint problems.
    pub im_tol: f64,
    /// Truncation tolerance used to pick the series order.
    pub tol: f64,
    /// Series order; defaults to [`default_order`].
    pub order: Option<usize>,
    pub method: RootMethod,
    /// Treat the problem as real self-adjoint; detected from `p`, `q` if unset.
    pub real_problem: Option<bool>,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            scan_points: 2000,
            accept_tol: 1e-9,
            max_newton: 50,
            im_tol: 1e-6,
            tol: 1e-12,
            order: None,
            method: RootMethod::ScanNewton,
            real_problem: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub lambda: Complex64,
    /// `|K(lambda)|` at the accepted root.
    pub kappa_residual: f64,
    pub newton_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Sorted by real part.
    pub eigenvalues: Vec<Eigenvalue>,
    pub window: (f64, f64),
    pub bc: BoundaryConditions,
    pub options: SpectrumOptions,
    pub order: usize,
    /// `max |K|` over the scan grid; acceptance is relative to it.
    pub scale: f64,
    pub diagnostics: Vec<String>,
}

impl Spectrum {
    pub fn eigenfunction(&self, basis: &SppsBasis, index: usize) -> Result<Eigenfunction> {
        let ev = self
            .eigenvalues
            .get(index)
            .ok_or_else(|| Error::InvalidArgument(format!("no eigenvalue with index {index}")))?;
        eigenfunction(basis, self.bc, ev.lambda, self.options.tol)
    }
}

struct NewtonOutcome {
    lambda: Complex64,
    iters: usize,
    converged: bool,
}

/// Newton steps below this (relative to `max(1, |z|)`) count as converged once
/// they stop shrinking, since rounding noise in `K` then dominates.
const NEWTON_NOISE: f64 = 1e-9;

fn newton(series: &CharacteristicSeries, start: Complex64, max_iter: usize) -> NewtonOutcome {
    let mut z = start;
    let mut prev_step = f64::INFINITY;
    for it in 1..=max_iter {
        let (k, dk) = series.eval_with_derivative(z);
        if k == Complex64::new(0.0, 0.0) {
            return NewtonOutcome {
                lambda: z,
                iters: it - 1,
                converged: true,
            };
        }
        if dk == Complex64::new(0.0, 0.0) {
            break;
        }
        let step = k / dk;
        let size = step.norm();
        let scale = z.norm().max(1.0);
        if size >= prev_step && size <= NEWTON_NOISE * scale {
            return NewtonOutcome {
                lambda: z,
                iters: it - 1,
                converged: true,
            };
        }
        z -= step;
        if !(z.re.is_finite() && z.im.is_finite()) {
            break;
        }
        if size <= 4.0 * f64::EPSILON * scale {
            return NewtonOutcome {
                lambda: z,
                iters: it,
                converged: true,
            };
        }
        prev_step = size;
    }
    NewtonOutcome {
        lambda: z,
        iters: max_iter,
        converged: false,
    }
}

pub fn find_eigenvalues(
    basis: &SppsBasis,
    bc: BoundaryConditions,
    window: (f64, f64),
    options: &SpectrumOptions,
) -> Result<Spectrum> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!("invalid lambda window [{lo}, {hi}]")));
    }
    if options.scan_points < 3 {
        return Err(Error::InvalidArgument("scan_points must be at least 3".into()));
    }
    let order = match options.order {
        Some(order) => order,
        None => default_order(basis, lo.abs().max(hi.abs()), options.tol)?,
    };
    let series = characteristic_series(basis, bc, order)?;
    let real_problem = options.real_problem.unwrap_or_else(|| basis.has_real_coefficients());
    let width = hi - lo;

    let n = options.scan_points;
    let grid: Vec<f64> = (0..n)
        .map(|k| {
            if k + 1 == n {
                hi
            } else {
                lo + width * k as f64 / (n - 1) as f64
            }
        })
        .collect();
    let values: Vec<Complex64> = grid.par_iter().map(|&l| series.eval(Complex64::new(l, 0.0))).collect();
    let moduli: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let scale = moduli.iter().copied().fold(0.0, f64::max);

    let mut spectrum = Spectrum {
        eigenvalues: Vec::new(),
        window,
        bc,
        options: options.clone(),
        order,
        scale,
        diagnostics: Vec::new(),
    };
    if scale == 0.0 || !scale.is_finite() {
        spectrum.diagnostics.push(format!(
            "characteristic function is degenerate on the window (max |K| = {scale})"
        ));
        return Ok(spectrum);
    }

    let in_window = |z: Complex64| {
        let slack = 1e-8 * width;
        z.re >= lo - slack && z.re <= hi + slack && (!real_problem || z.im.abs() <= options.im_tol * z.norm().max(1.0))
    };

    let candidates: Vec<(Option<usize>, NewtonOutcome)> = match options.method {
        RootMethod::ScanNewton => {
            let minima: Vec<usize> = (0..n)
                .filter(|&k| {
                    let left = k == 0 || moduli[k] <= moduli[k - 1];
                    let right = k + 1 == n || moduli[k] <= moduli[k + 1];
                    left && right
                })
                .collect();
            minima
                .par_iter()
                .map(|&k| {
                    (
                        Some(k),
                        newton(&series, Complex64::new(grid[k], 0.0), options.max_newton),
                    )
                })
                .collect()
        }
        RootMethod::Aberth => aberth(&series.lambda_coeffs(), 500)
            .into_iter()
            .filter(|z| z.re >= lo - width && z.re <= hi + width && z.im.abs() <= width)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&z| (None, newton(&series, z, options.max_newton)))
            .collect(),
    };

    let mut found: Vec<Eigenvalue> = Vec::new();
    for (origin, outcome) in candidates {
        if !outcome.converged {
            if let Some(k) = origin {
                if brackets_sign_change(&values, k) {
                    return Err(Error::ConvergenceFailure {
                        lambda: grid[k],
                        iterations: outcome.iters,
                    });
                }
                spectrum.diagnostics.push(format!(
                    "Newton did not converge from lambda = {}; candidate dropped",
                    grid[k]
                ));
            }
            continue;
        }
        let residual = series.eval(outcome.lambda).norm();
        if residual > options.accept_tol * scale || !in_window(outcome.lambda) {
            continue;
        }
        found.push(Eigenvalue {
            lambda: outcome.lambda,
            kappa_residual: residual,
            newton_iters: outcome.iters,
        });
    }

    found.sort_by(|a, b| {
        a.lambda
            .re
            .total_cmp(&b.lambda.re)
            .then(a.lambda.im.total_cmp(&b.lambda.im))
    });
    let merge = 1e-8 * width;
    for ev in found {
        match spectrum.eigenvalues.last_mut() {
            Some(prev) if (prev.lambda - ev.lambda).norm() <= merge => {
                if ev.kappa_residual < prev.kappa_residual {
                    *prev = ev;
                }
            }
            _ => spectrum.eigenvalues.push(ev),
        }
    }
    if spectrum.eigenvalues.is_empty() {
        spectrum
            .diagnostics
            .push(format!("no eigenvalues found in [{lo}, {hi}]"));
    }
    Ok(spectrum)
}

/// True when `K` is numerically real around scan point `k` and its real part
/// changes sign between the neighbours.
fn brackets_sign_change(values: &[Complex64], k: usize) -> bool {
    if k == 0 || k + 1 == values.len() {
        return false;
    }
    let (a, b) = (values[k - 1], values[k + 1]);
    let real = |z: Complex64| z.im.abs() <= 1e-6 * z.norm();
    real(a) && real(b) && a.re * b.re < 0.0
}

/// Simultaneous root finding for `sum_i coeffs[i] z^i`.
pub fn aberth(coeffs: &[Complex64], max_iter: usize) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let Some(top) = coeffs.iter().rposition(|c| *c != zero) else {
        return Vec::new();
    };
    let low = coeffs.iter().position(|c| *c != zero).unwrap_or(0);
    let poly = &coeffs[low..=top];
    let mut roots = vec![zero; low];
    let degree = poly.len() - 1;
    if degree == 0 {
        return roots;
    }

    let mut z = initial_guesses(poly);
    let mut done = vec![false; degree];
    for _ in 0..max_iter {
        for i in 0..degree {
            if done[i] {
                continue;
            }
            let Some(ratio) = newton_ratio(poly, z[i]) else {
                done[i] = true;
                continue;
            };
            let mut s = zero;
            for j in 0..degree {
                if j != i {
                    s += 1.0 / (z[i] - z[j]);
                }
            }
            let w = ratio / (1.0 - ratio * s);
            if !(w.re.is_finite() && w.im.is_finite()) {
                done[i] = true;
                continue;
            }
            z[i] -= w;
            if w.norm() <= 2.0 * f64::EPSILON * z[i].norm() {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            break;
        }
    }
    roots.extend(z);
    roots
}

/// `p(z) / p'(z)`, evaluated on the reversed polynomial when `|z| > 1`.
/// `None` when `z` is an exact root.
fn newton_ratio(poly: &[Complex64], z: Complex64) -> Option<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let horner = |coeffs: &mut dyn Iterator<Item = &Complex64>, t: Complex64| {
        let (mut p, mut dp) = (zero, zero);
        for &c in coeffs {
            dp = dp * t + p;
            p = p * t + c;
        }
        (p, dp)
    };
    if z.norm() <= 1.0 {
        let (p, dp) = horner(&mut poly.iter().rev(), z);
        if p == zero {
            return None;
        }
        Some(p / dp)
    } else {
        // p(z) = z^d r(y), y = 1/z, r has the coefficients in reverse order
        let d = (poly.len() - 1) as f64;
        let y = 1.0 / z;
        let (r, dr) = horner(&mut poly.iter(), y);
        if r == zero {
            return None;
        }
        Some(z * r / (d * r - y * dr))
    }
}

/// Starting points on circles whose radii follow the upper convex hull of
/// `(i, ln |c_i|)` (the Newton polygon).
fn initial_guesses(poly: &[Complex64]) -> Vec<Complex64> {
    let degree = poly.len() - 1;
    let points: Vec<(usize, f64)> = poly
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(i, c)| (i, c.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &pt in &points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut guesses = Vec::with_capacity(degree);
    for seg in hull.windows(2) {
        let ((i, li), (k, lk)) = (seg[0], seg[1]);
        let count = k - i;
        let radius = ((li - lk) / count as f64).exp();
        for t in 0..count {
            let angle = std::f64::consts::TAU * (t as f64 / count as f64 + i as f64 / degree as f64) + 0.4;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    guesses
}

/// Eigenfunction normalized so that its largest-modulus value is exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenfunction {
    pub lambda: Complex64,
    pub u: SampledFn,
    pub u_prime: SampledFn,
    /// `|u(0) cos(alpha) + u'(0) sin(alpha)|`
    pub left_defect: f64,
    /// `|u(a) cos(beta) + u'(a) sin(beta)|`
    pub right_defect: f64,
    pub residual: f64,
}

pub fn eigenfunction(basis: &SppsBasis, bc: BoundaryConditions, lambda: Complex64, tol: f64) -> Result<Eigenfunction> {
    let omega = lambda.sqrt();
    let pair = basis.solve(omega, tol)?;
    let (c1, c2) = if bc.is_dirichlet_left() {
        (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    } else {
        (Complex64::new(1.0, 0.0), robin_gamma(basis, bc.alpha)?)
    };
    let u = pair.u1.zip_with(&pair.u2, |a, b| c1 * a + c2 * b)?;
    let du = pair.u1_prime.zip_with(&pair.u2_prime, |a, b| c1 * a + c2 * b)?;
    let peak = u.values().iter().copied().fold(
        Complex64::new(0.0, 0.0),
        |best, v| if v.norm() > best.norm() { v } else { best },
    );
    if peak == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidArgument("eigenfunction vanishes identically".into()));
    }
    let u = u.map(|v| v / peak);
    let du = du.map(|v| v / peak);
    let (sa, ca) = bc.alpha.sin_cos();
    let (sb, cb) = bc.beta.sin_cos();
    let left_defect = (u.first() * ca + du.first() * sa).norm();
    let right_defect = (u.last() * cb + du.last() * sb).norm();
    let residual = basis.residual(omega, &u)?.norm;
    Ok(Eigenfunction {
        lambda,
        u,
        u_prime: du,
        left_defect,
        right_defect,
        residual,
    })
}
