//! Uniform grids on `[0, a]`, tabulated complex functions, and the cumulative
//! trapezoidal quadrature every power family is built from.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::expr::CoeffExpr;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Uniform grid `x_j = j a / (n_points - 1)` on `[0, a]`; `n_points` is odd.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    n_points: usize,
    h: f64,
}

impl Grid {
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node(&self, j: usize) -> f64 {
        if j + 1 == self.n_points {
            self.a
        } else {
            self.a * j as f64 / (self.n_points - 1) as f64
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(|j| self.node(j))
    }
}

pub fn make_grid(a: f64, n_points: usize) -> Result<Grid> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidGrid(format!("interval length must be positive, got {a}")));
    }
    if n_points < 3 {
        return Err(Error::InvalidGrid(format!(
            "n_points must be at least 3, got {n_points}"
        )));
    }
    if n_points.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!("n_points must be odd, got {n_points}")));
    }
    Ok(Grid {
        a,
        n_points,
        h: a / (n_points - 1) as f64,
    })
}

/// A complex-valued function tabulated at every node of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    grid: Grid,
    values: Vec<Complex64>,
}

impl SampledFn {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<SampledFn> {
        if values.len() != grid.n_points {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.n_points,
                values.len()
            )));
        }
        if let Some(node) = values.iter().position(|v| !is_finite(*v)) {
            return Err(Error::NonFinite {
                what: "sampled function",
                node,
            });
        }
        Ok(SampledFn { grid, values })
    }

    /// Builds from values already known to be finite.
    pub(crate) fn from_vec(grid: Grid, values: Vec<Complex64>) -> SampledFn {
        debug_assert_eq!(values.len(), grid.n_points);
        SampledFn { grid, values }
    }

    pub fn constant(grid: Grid, value: Complex64) -> SampledFn {
        SampledFn::from_vec(grid, vec![value; grid.n_points])
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<SampledFn> {
        SampledFn::new(grid, grid.nodes().map(f).collect())
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn first(&self) -> Complex64 {
        self.values[0]
    }

    pub fn last(&self) -> Complex64 {
        self.values[self.values.len() - 1]
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> SampledFn {
        SampledFn::from_vec(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &SampledFn, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<SampledFn> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(SampledFn::from_vec(
            self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn scale(&self, s: Complex64) -> SampledFn {
        self.map(|v| v * s)
    }

    /// Maximum modulus over all nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// True when every imaginary part is zero within `tol` times the max modulus.
    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        self.values.iter().all(|v| v.im.abs() <= tol * scale)
    }

    /// Value halfway between node `j` and `j + 1` by local cubic interpolation
    /// (quadratic on three-point grids).
    pub fn midpoint(&self, j: usize) -> Complex64 {
        let f = &self.values;
        let n = f.len();
        debug_assert!(j + 1 < n);
        if n < 4 {
            return if j == 0 {
                (3.0 * f[0] + 6.0 * f[1] - f[2]) / 8.0
            } else {
                (-f[0] + 6.0 * f[1] + 3.0 * f[2]) / 8.0
            };
        }
        if j == 0 {
            (5.0 * f[0] + 15.0 * f[1] - 5.0 * f[2] + f[3]) / 16.0
        } else if j + 2 == n {
            (f[n - 4] - 5.0 * f[n - 3] + 15.0 * f[n - 2] + 5.0 * f[n - 1]) / 16.0
        } else {
            (-f[j - 1] + 9.0 * f[j] + 9.0 * f[j + 1] - f[j + 2]) / 16.0
        }
    }

    /// Resamples scattered samples `(xs, ys)` onto `grid` by piecewise cubic
    /// Lagrange interpolation. `xs` must be strictly increasing and cover `[0, a]`.
    pub fn from_table(grid: Grid, xs: &[f64], ys: &[Complex64]) -> Result<SampledFn> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidArgument(
                "a coefficient table needs at least two (x, value) rows".into(),
            ));
        }
        if xs
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(Ordering::Greater))
        {
            return Err(Error::InvalidArgument(
                "coefficient table abscissae must be strictly increasing".into(),
            ));
        }
        let slack = 1e-12 * grid.a.max(1.0);
        if xs[0] > slack || xs[xs.len() - 1] < grid.a - slack {
            return Err(Error::InvalidArgument(format!(
                "coefficient table covers [{}, {}] but the interval is [0, {}]",
                xs[0],
                xs[xs.len() - 1],
                grid.a
            )));
        }
        let m = xs.len();
        let width = m.min(4);
        let values = grid
            .nodes()
            .map(|x| {
                // interval k with xs[k] <= x < xs[k + 1]
                let k = xs.partition_point(|&t| t <= x).saturating_sub(1).min(m - 2);
                let start = k.saturating_sub(1).min(m - width);
                lagrange(&xs[start..start + width], &ys[start..start + width], x)
            })
            .collect();
        SampledFn::new(grid, values)
    }
}

fn lagrange(xs: &[f64], ys: &[Complex64], x: f64) -> Complex64 {
    let mut sum = ZERO;
    for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
        let mut w = 1.0;
        for (k, &xk) in xs.iter().enumerate() {
            if k != i {
                w *= (x - xk) / (xi - xk);
            }
        }
        sum += yi * w;
    }
    sum
}

pub(crate) fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Tabulates `expr` on `grid`; evaluation errors carry the node index.
pub fn sample(expr: &CoeffExpr, grid: Grid) -> Result<SampledFn> {
    let values = grid
        .nodes()
        .enumerate()
        .map(|(node, x)| expr.eval(x).map_err(|source| Error::Eval { node, x, source }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledFn::from_vec(grid, values))
}

/// Cumulative trapezoidal rule anchored at `x = 0`:
/// `F_0 = 0`, `F_{j+1} = F_j + h (f_j + f_{j+1}) / 2`.
pub fn cumulative_integral(f: &SampledFn) -> SampledFn {
    let half_h = 0.5 * f.grid.h;
    let mut out = Vec::with_capacity(f.values.len());
    let mut acc = ZERO;
    out.push(acc);
    for w in f.values.windows(2) {
        acc += (w[0] + w[1]) * half_h;
        out.push(acc);
    }
    SampledFn::from_vec(f.grid, out)
}

/// Second-order finite differences: central inside, one-sided at the ends.
pub fn derivative(f: &SampledFn) -> SampledFn {
    let v = &f.values;
    let n = v.len();
    let inv_2h = 1.0 / (2.0 * f.grid.h);
    let mut out = Vec::with_capacity(n);
    out.push((-3.0 * v[0] + 4.0 * v[1] - v[2]) * inv_2h);
    for j in 1..n - 1 {
        out.push((v[j + 1] - v[j - 1]) * inv_2h);
    }
    out.push((3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) * inv_2h);
    SampledFn::from_vec(f.grid, out)
}

/// Discrete `(p u')' + q u`. Interior nodes use the conservative three-point
/// stencil with `p` at the half nodes from [`SampledFn::midpoint`]; the two
/// end nodes fall back to [`derivative`] applied twice.
pub fn apply_operator(p: &SampledFn, q: &SampledFn, u: &SampledFn) -> Result<SampledFn> {
    if p.grid != u.grid || q.grid != u.grid {
        return Err(Error::GridMismatch);
    }
    let n = u.values.len();
    let inv_h2 = 1.0 / (u.grid.h * u.grid.h);
    let flux = derivative(u).zip_with(p, |du, p| p * du)?;
    let ends = derivative(&flux);
    let f = &u.values;
    let half: Vec<Complex64> = (0..n - 1).map(|j| p.midpoint(j)).collect();
    let values = (0..n)
        .map(|j| {
            let second = if j == 0 || j + 1 == n {
                ends.values[j]
            } else {
                (half[j] * (f[j + 1] - f[j]) - half[j - 1] * (f[j] - f[j - 1])) * inv_h2
            };
            second + q.values[j] * f[j]
        })
        .collect();
    Ok(SampledFn::from_vec(u.grid, values))
}

pub(crate) fn interior_max(values: &[Complex64], trim: usize) -> f64 {
    values[trim..values.len() - trim]
        .iter()
        .fold(0.0, |m, v| m.max(v.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sampled(src: &str, grid: Grid) -> SampledFn {
        sample(&CoeffExpr::parse(src).unwrap(), grid).unwrap()
    }

    #[test]
    fn grid_nodes() {
        let g = make_grid(1.0, 5).unwrap();
        assert_eq!(g.nodes().collect::<Vec<_>>(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = make_grid(2.0, 3).unwrap();
        assert_eq!(g.nodes().collect::<Vec<_>>(), vec![0.0, 1.0, 2.0]);
        let g = make_grid(0.3, 10001).unwrap();
        assert_eq!(g.node(10000), 0.3);
    }

    #[test]
    fn grid_contract() {
        assert!(matches!(make_grid(1.0, 4), Err(Error::InvalidGrid(m)) if m.contains("odd")));
        assert!(make_grid(1.0, 1).is_err());
        assert!(make_grid(0.0, 5).is_err());
        assert!(make_grid(-1.0, 5).is_err());
        assert!(make_grid(f64::NAN, 5).is_err());
    }

    #[test]
    fn sample_examples() {
        let g = make_grid(1.0, 5).unwrap();
        assert!(sampled("1", g).values().iter().all(|&v| v == c(1.0)));
        let x = sampled("x", g);
        assert_eq!(x.values(), &[c(0.0), c(0.25), c(0.5), c(0.75), c(1.0)]);
        let err = sample(&CoeffExpr::parse("1/(x-0.5)").unwrap(), g).unwrap_err();
        assert!(matches!(err, Error::Eval { node: 2, .. }), "{err:?}");
    }

    #[test]
    fn trapezoid_exact_on_constants_and_lines() {
        let g = make_grid(1.0, 5).unwrap();
        let f = cumulative_integral(&SampledFn::constant(g, c(1.0)));
        for (v, x) in f.values().iter().zip(g.nodes()) {
            assert_eq!(*v, c(x));
        }
        for n in [3, 11, 1001] {
            let g = make_grid(1.0, n).unwrap();
            let f = cumulative_integral(&sampled("x", g));
            assert_abs_diff_eq!(f.last().re, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn trapezoid_exp() {
        let g = make_grid(1.0, 10001).unwrap();
        let f = cumulative_integral(&sampled("exp(x)", g));
        assert_abs_diff_eq!(f.last().re, std::f64::consts::E - 1.0, epsilon = 1e-8);
    }

    #[test]
    fn trapezoid_refinement_is_second_order() {
        let err = |n| {
            let g = make_grid(1.0, n).unwrap();
            (cumulative_integral(&sampled("exp(x)", g)).last().re - (std::f64::consts::E - 1.0)).abs()
        };
        for (coarse, fine) in [(101, 201), (201, 401), (401, 801)] {
            let ratio = err(coarse) / err(fine);
            assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
        }
    }

    #[test]
    fn derivative_examples() {
        let g = make_grid(1.0, 101).unwrap();
        let d = derivative(&sampled("x", g));
        assert!(d.values().iter().all(|v| (v - c(1.0)).norm() < 1e-12));
        let d = derivative(&sampled("x^2", g));
        for (j, x) in g.nodes().enumerate() {
            assert_abs_diff_eq!(d.values()[j].re, 2.0 * x, epsilon = 1e-12);
        }
        let g = make_grid(1.0, 10001).unwrap();
        let d = derivative(&sampled("sin(x)", g));
        for (j, x) in g.nodes().enumerate() {
            assert_abs_diff_eq!(d.values()[j].re, x.cos(), epsilon = 1e-7);
        }
    }

    #[test]
    fn discrete_fundamental_theorem() {
        let g = make_grid(1.0, 2001).unwrap();
        let f = sampled("cos(3*x) + i*x^3", g);
        let back = derivative(&cumulative_integral(&f));
        for j in 1..g.n_points() - 1 {
            assert!((back.values()[j] - f.values()[j]).norm() < 1e-5);
        }
    }

    #[test]
    fn midpoint_is_fourth_order() {
        let g = make_grid(1.0, 101).unwrap();
        let f = sampled("exp(x)", g);
        for j in 0..g.n_points() - 1 {
            let x = g.node(j) + 0.5 * g.h();
            // cubic interpolation error h^4 |f''''| |w(1/2)| / 24, with |w| <= 15/16 at the ends
            let bound = g.h().powi(4) * 1f64.exp() * (15.0 / 16.0) / 24.0;
            assert_abs_diff_eq!(f.midpoint(j).re, x.exp(), epsilon = bound);
        }
        let g3 = make_grid(2.0, 3).unwrap();
        let f = sampled("x^2", g3);
        assert_abs_diff_eq!(f.midpoint(0).re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(f.midpoint(1).re, 2.25, epsilon = 1e-15);
    }

    #[test]
    fn table_resampling_is_exact_on_cubics() {
        let xs: Vec<f64> = (0..=40).map(|k| (k as f64 / 40.0).powf(1.3)).collect();
        let ys: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x * x * x - x, 2.0 * x)).collect();
        let g = make_grid(1.0, 101).unwrap();
        let f = SampledFn::from_table(g, &xs, &ys).unwrap();
        for (j, x) in g.nodes().enumerate() {
            assert!((f.values()[j] - Complex64::new(x * x * x - x, 2.0 * x)).norm() < 1e-12);
        }
    }

    #[test]
    fn table_must_cover_interval() {
        let g = make_grid(2.0, 5).unwrap();
        let xs = [0.0, 0.5, 1.0];
        let ys = [c(1.0); 3];
        assert!(SampledFn::from_table(g, &xs, &ys).is_err());
        assert!(SampledFn::from_table(g, &[0.0, 0.0, 2.0], &ys).is_err());
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = SampledFn::constant(make_grid(1.0, 5).unwrap(), c(1.0));
        let b = SampledFn::constant(make_grid(1.0, 7).unwrap(), c(1.0));
        assert_eq!(a.zip_with(&b, |x, y| x + y), Err(Error::GridMismatch));
    }

    proptest! {
        #[test]
        fn integral_is_linear(
            alpha in -10.0f64..10.0,
            beta in -10.0f64..10.0,
            k in 0.1f64..5.0,
        ) {
            let g = make_grid(1.0, 201).unwrap();
            let f = sampled(&format!("sin({k}*x)"), g);
            let h = sampled(&format!("exp(-{k}*x) + i*x"), g);
            let combo = f.zip_with(&h, |a, b| a * alpha + b * beta).unwrap();
            let lhs = cumulative_integral(&combo);
            let rhs = cumulative_integral(&f)
                .zip_with(&cumulative_integral(&h), |a, b| a * alpha + b * beta)
                .unwrap();
            for (l, r) in lhs.values().iter().zip(rhs.values()) {
                prop_assert!((l - r).norm() <= 1e-13 * (1.0 + r.norm()));
            }
        }
    }
}
