//! Spectral parameter power series (SPPS) for Sturm–Liouville equations.
//!
//! Given one nonvanishing solution `g0` of `(p g0')' + q g0 = 0` on `[0, a]`,
//! the crate builds two families of iterated integrals `X^(n)`, `X~^(n)` that
//! do not depend on the spectral parameter. Any solution of
//!
//! ```text
//! (p u')' + q u = omega^2 u
//! ```
//!
//! is then a power series in `omega` with those tables as coefficients, and
//! boundary-value spectral problems become root-finding for an analytic
//! characteristic function `K(lambda)`, `lambda = omega^2`.
//!
//! ```
//! use num_complex::Complex64;
//! use spps::{build_seed, make_grid, sample, CoeffExpr, SeedMode, SppsBasis};
//!
//! let grid = make_grid(1.0, 1001).unwrap();
//! let p = sample(&CoeffExpr::parse("1").unwrap(), grid).unwrap();
//! let q = sample(&CoeffExpr::parse("0").unwrap(), grid).unwrap();
//! let seed = build_seed(&p, &q, &SeedMode::Auto).unwrap();
//! let basis = SppsBasis::new(p, q, seed, 40).unwrap();
//!
//! let pair = basis.solve(Complex64::new(1.0, 0.0), 1e-12).unwrap();
//! let last = pair.u2.values().len() - 1;
//! // Dirichlet-left solution at x = 1 for omega = 1 is sinh(1).
//! assert!((pair.u2.values()[last] - 1f64.sinh()).norm() < 1e-6);
//! ```

#![allow(clippy::needless_range_loop)]

mod error;
pub mod expr;
pub mod grid;
pub mod powers;
pub mod seed;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use expr::{CoeffExpr, EvalError, ParseError};
pub use grid::{cumulative_integral, derivative, make_grid, sample, Grid, SampledFn};
pub use powers::{build_power_table, tail_bound, truncation_order, truncation_order_for, PowerTable};
pub use seed::{build_seed, integrate_zero_energy, Seed, SeedMode};
pub use solver::{DarbouxTransform, Residual, SolutionPair, SppsBasis};
pub use spectral::{
    BoundaryConditions, CharacteristicSeries, Eigenfunction, Eigenvalue, RootMethod, Spectrum, SpectrumOptions,
};

pub use num_complex::Complex64;
