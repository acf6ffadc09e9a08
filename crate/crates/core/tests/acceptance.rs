//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p spps --test acceptance`.

mod common;

use std::f64::consts::{FRAC_PI_4, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use common::{basis, brute_order, expr, rng, shooting_eigenvalues, unit_seed, TOL};
use num_complex::Complex64;
use rand::Rng;
use spps::grid::apply_operator;
use spps::powers::N_MAX;
use spps::spectral::{
    characteristic_eval_direct, characteristic_series, default_order, direct_normalizer, find_eigenvalues,
};
use spps::{
    build_power_table, derivative, make_grid, sample, truncation_order_for, BoundaryConditions, Seed, SeedMode,
    SolutionPair, SpectrumOptions, SppsBasis,
};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Three eigenvalues closest to zero in `[-100, 0]`, largest first.
fn leading_eigenvalues(b: &SppsBasis) -> Vec<Complex64> {
    let spec = find_eigenvalues(
        b,
        BoundaryConditions::dirichlet(),
        (-100.0, 0.0),
        &SpectrumOptions::default(),
    )
    .unwrap();
    spec.eigenvalues.iter().rev().take(3).map(|e| e.lambda).collect()
}

fn spectrum_check(b: &SppsBasis, exact: impl Fn(f64) -> f64) -> Verdict {
    let found = leading_eigenvalues(b);
    if found.len() < 3 {
        return Err(format!("only {} eigenvalues found: {found:?}", found.len()));
    }
    let mut worst: f64 = 0.0;
    for (k, lambda) in found.iter().enumerate() {
        let e = exact((k + 1) as f64);
        worst = worst.max((lambda - e).norm() / e.abs());
    }
    ensure(worst <= 1e-6, format!("max relative error {worst:.2e}"))
}

fn free_basis() -> SppsBasis {
    basis(1.0, "1", "0", SeedMode::Auto, 10.0)
}

fn constant_potential_basis() -> SppsBasis {
    basis(1.0, "1", "1", SeedMode::Auto, 10.0)
}

fn closed_form_basis() -> SppsBasis {
    basis(1.0, "1", "0", unit_seed(), 3.0)
}

struct RandomCase {
    label: String,
    basis: SppsBasis,
    omega: Complex64,
}

/// Ten fixed-seed problems with smooth coefficients: real ones use the
/// automatic seed, complex ones a seed integrated from `g(0) = 1, g'(0) = 0`.
fn random_cases() -> Vec<RandomCase> {
    let mut r = rng(20240611);
    (0..10)
        .map(|k| {
            let a = r.gen_range(0.5..2.0);
            let p = if k % 3 == 0 {
                format!("{:?}*exp({:?}*x)", r.gen_range(0.5..2.0), r.gen_range(-0.5..0.5))
            } else {
                format!("{:?} + {:?}*x^2", r.gen_range(0.5..2.0), r.gen_range(0.0..1.0))
            };
            let (q, mode) = if k % 2 == 0 {
                let q = format!(
                    "{:?}*cos({:?}*x) - {:?}",
                    r.gen_range(0.0..3.0),
                    r.gen_range(0.5..3.0),
                    r.gen_range(0.0..2.0)
                );
                (q, SeedMode::Auto)
            } else {
                let q = format!("{:?}*x + i*{:?}*sin(x)", r.gen_range(-2.0..2.0), r.gen_range(0.1..2.0));
                (
                    q,
                    SeedMode::InitialValues {
                        u0: c(1.0, 0.0),
                        v0: c(0.0, 0.0),
                    },
                )
            };
            let omega = c(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
            RandomCase {
                label: format!("a={a:.3}, p={p}, q={q}, omega={omega:.3}"),
                basis: basis(a, &p, &q, mode, omega.norm()),
                omega,
            }
        })
        .collect()
}

/// Every (basis, omega) pair used by the spectrum, closed-form and
/// initial-value criteria.
fn fixture_cases() -> Vec<(String, SppsBasis, Complex64)> {
    let mut cases = Vec::new();
    for (name, b) in [("free", free_basis()), ("q=1", constant_potential_basis())] {
        for lambda in leading_eigenvalues(&b) {
            cases.push((
                format!("{name} eigen lambda={:.6}", lambda.re),
                b.clone(),
                lambda.sqrt(),
            ));
        }
    }
    cases.push(("cosh/sinh".into(), closed_form_basis(), c(1.0, 0.0)));
    for rc in random_cases() {
        cases.push((rc.label, rc.basis, rc.omega));
    }
    cases
}

fn free_dirichlet() -> Verdict {
    spectrum_check(&free_basis(), |k| -(k * PI).powi(2))
}

fn constant_potential() -> Verdict {
    spectrum_check(&constant_potential_basis(), |k| 1.0 - (k * PI).powi(2))
}

fn closed_forms() -> Verdict {
    let b = closed_form_basis();
    let pair = b.solve(c(1.0, 0.0), TOL).unwrap();
    let mut worst: f64 = 0.0;
    for (j, x) in b.grid().nodes().enumerate() {
        for (got, exact) in [
            (pair.u1.values()[j], x.cosh()),
            (pair.u2.values()[j], x.sinh()),
            (pair.u1_prime.values()[j], x.sinh()),
            (pair.u2_prime.values()[j], x.cosh()),
        ] {
            worst = worst.max((got - exact).norm());
        }
    }
    ensure(
        worst <= 1e-8,
        format!("max abs error over u1, u2, u1', u2' = {worst:.2e}"),
    )
}

fn initial_values() -> Verdict {
    let mut worst: f64 = 0.0;
    for rc in random_cases() {
        let pair = rc.basis.solve(rc.omega, TOL).unwrap();
        let seed = rc.basis.seed();
        let g0 = seed.g0().first();
        let dg0 = seed.g0_prime().first();
        let flux = 1.0 / (g0 * rc.basis.p().first());
        let errs = [
            (pair.u1.first() - g0).norm() / g0.norm(),
            pair.u2.first().norm() / pair.u2.max_abs(),
            (pair.u1_prime.first() - dg0).norm() / dg0.norm().max(g0.norm()),
            (pair.u2_prime.first() - flux).norm() / flux.norm(),
        ];
        worst = errs.iter().copied().fold(worst, f64::max);
    }
    ensure(
        worst <= 1e-9,
        format!("max relative initial-value error over 10 cases = {worst:.2e}"),
    )
}

fn wronskian() -> Verdict {
    let mut worst: (f64, String) = (0.0, String::new());
    for (label, b, omega) in fixture_cases() {
        let pair: SolutionPair = b.solve(omega, TOL).unwrap();
        let w = pair.wronskian(b.p()).unwrap();
        let err = w.values().iter().map(|v| (v - 1.0).norm()).fold(0.0, f64::max);
        if err > worst.0 {
            worst = (err, label);
        }
    }
    ensure(worst.0 <= 1e-6, format!("max |W - 1| = {:.2e} ({})", worst.0, worst.1))
}

fn operator_identity() -> Verdict {
    let b = constant_potential_basis();
    let table = b.table();
    let g0 = b.seed().g0();
    let n_points = b.grid().n_points();
    let mut worst: f64 = 0.0;
    for n in (2..=20).step_by(2) {
        let u = table.xt(n).zip_with(g0, |x, g| x * g).unwrap();
        let lhs = apply_operator(b.p(), b.q(), &u).unwrap();
        let rhs = table
            .xt(n - 2)
            .zip_with(g0, |x, g| (n * (n - 1)) as f64 * x * g)
            .unwrap();
        let scale = rhs.max_abs();
        for j in 1..n_points - 1 {
            worst = worst.max((lhs.values()[j] - rhs.values()[j]).norm() / scale);
        }
    }
    ensure(
        worst <= 1e-5,
        format!("max interior error relative to sup of the right side = {worst:.2e}"),
    )
}

fn residual_certificates() -> Verdict {
    let mut cases = fixture_cases();
    cases.push((
        "q=i*x, omega=1+i".into(),
        basis(
            1.0,
            "1",
            "i*x",
            SeedMode::InitialValues {
                u0: c(1.0, 0.0),
                v0: c(0.0, 0.0),
            },
            2f64.sqrt(),
        ),
        c(1.0, 1.0),
    ));
    let mut worst: f64 = 0.0;
    let mut over = Vec::new();
    for (label, b, omega) in cases {
        let pair = b.solve(omega, TOL).unwrap();
        for (name, u) in [("u1", &pair.u1), ("u2", &pair.u2)] {
            let r = b.residual(omega, u).unwrap();
            if r.degenerate {
                return Err(format!("degenerate solution in case {label}"));
            }
            worst = worst.max(r.norm);
            if r.norm > 1e-5 {
                over.push(format!("{name} {:.2e} ({label})", r.norm));
            }
        }
    }
    ensure(
        over.is_empty(),
        format!("max residual = {worst:.2e}; above 1e-5: {over:?}"),
    )
}

fn coefficient_direct_agreement() -> Verdict {
    let omega_max = 3.0 * 2f64.sqrt();
    let b = basis(1.0, "1", "0", SeedMode::Auto, omega_max);
    let mut r = rng(7);
    let omegas: Vec<Complex64> = (0..20)
        .map(|_| c(r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0)))
        .collect();
    let order = default_order(&b, omega_max * omega_max, TOL).unwrap();
    let mut worst: f64 = 0.0;
    for bc in [
        BoundaryConditions::dirichlet(),
        BoundaryConditions::new(FRAC_PI_4, FRAC_PI_4),
    ] {
        let series = characteristic_series(&b, bc, order).unwrap();
        let norm = direct_normalizer(&series, &b, c(0.5, 0.0), TOL).unwrap();
        for &w in &omegas {
            let direct = characteristic_eval_direct(&b, bc, w, TOL).unwrap();
            worst = worst.max((series.eval(w * w) - norm * direct).norm());
        }
    }
    ensure(
        worst <= 1e-9,
        format!("max |K(omega^2) - c*direct| over 20 omegas, 2 conditions = {worst:.2e}"),
    )
}

fn darboux() -> Verdict {
    let b = basis(1.0, "1", "0", SeedMode::Auto, 2.0);
    let mut worst_map: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for omega in [c(1.5, 0.0), c(1.0, 0.5)] {
        let pair = b.solve(omega, TOL).unwrap();
        let dt = b.darboux(omega, TOL).unwrap();
        let seed = b.seed();
        let du1 = derivative(&pair.u1);
        let mapped = du1
            .values()
            .iter()
            .zip(pair.u1.values())
            .zip(seed.g0().values().iter().zip(seed.g0_prime().values()))
            .map(|((du, u), (g, dg))| du - dg / g * u);
        let scale = dt.v1.max_abs();
        for (m, v) in mapped.zip(dt.v1.values()) {
            worst_map = worst_map.max((m - v).norm() / scale);
        }

        let g = b.grid();
        let p = sample(&expr("1"), g).unwrap();
        let new_seed = Seed::from_parts(&p, dt.seed_new.clone(), derivative(&dt.seed_new)).unwrap();
        let partner = SppsBasis::new(p, dt.q_new.clone(), new_seed, 1).unwrap();
        worst_res = worst_res.max(partner.residual(omega, &dt.v1).unwrap().norm);
    }
    ensure(
        worst_map <= 1e-5 && worst_res <= 1e-5,
        format!("intertwining error {worst_map:.2e}, partner residual {worst_res:.2e}"),
    )
}

fn imaginary_frequency() -> Verdict {
    let b = closed_form_basis();
    let mut worst: f64 = 0.0;
    for w in [1.0, 2.0] {
        let u1 = b.eval_u1(c(0.0, w), TOL).unwrap();
        for (x, v) in b.grid().nodes().zip(u1.values()) {
            worst = worst.max((v - (w * x).cos()).norm());
        }
    }
    ensure(worst <= 1e-8, format!("max |u1(i omega) - cos(omega x)| = {worst:.2e}"))
}

fn shooting_cross_check() -> Verdict {
    let b = basis(1.0, "1", "cos(x)", SeedMode::Auto, 10.0);
    let found = leading_eigenvalues(&b);
    let oracle = shooting_eigenvalues(f64::cos, 1.0, 0.0, 3);
    if found.len() < 3 {
        return Err(format!("only {} eigenvalues found", found.len()));
    }
    let worst = found
        .iter()
        .zip(&oracle)
        .map(|(l, o)| (l - o).norm() / o.abs())
        .fold(0.0, f64::max);
    ensure(
        worst <= 1e-4,
        format!("max relative difference {worst:.2e}; oracle {oracle:.8?}"),
    )
}

fn truncation_bound() -> Verdict {
    let g = make_grid(1.0, common::N_POINTS).unwrap();
    let p = sample(&expr("1"), g).unwrap();
    let q = sample(&expr("1"), g).unwrap();
    let seed = spps::build_seed(&p, &q, &SeedMode::Auto).unwrap();
    let m = seed.bound_m();
    let a = g.a();
    let table = build_power_table(std::sync::Arc::new(seed), 100).unwrap();
    let mut worst_ratio: f64 = 0.0;
    for n in 0..=100 {
        let bound = (m * a).powi(n as i32);
        worst_ratio = worst_ratio.max(table.x(n).last().norm() / bound);
    }
    let mut mismatches = Vec::new();
    for &omega_abs in &[0.0, 0.5, 1.0, 3.0, 10.0, 25.0, 50.0, 80.0] {
        let z = omega_abs * m * a;
        for tol in [1e-6, 1e-12, 1e-15] {
            let got = truncation_order_for(z, tol, N_MAX).ok();
            let want = if z == 0.0 { Some(2) } else { brute_order(z, tol, N_MAX) };
            if got != want {
                mismatches.push(format!("z={z}, tol={tol}: {got:?} vs {want:?}"));
            }
        }
    }
    ensure(
        worst_ratio <= 1.0 + 1e-6 && mismatches.is_empty(),
        format!("max |X^(n)(a)|/(M a)^n = {worst_ratio:.6}, order mismatches: {mismatches:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("free Dirichlet spectrum", free_dirichlet),
        ("constant-potential spectrum", constant_potential),
        ("closed-form solutions", closed_forms),
        ("initial-value contract", initial_values),
        ("Wronskian invariant", wronskian),
        ("operator identity", operator_identity),
        ("residual certificates", residual_certificates),
        ("coefficient/direct agreement", coefficient_direct_agreement),
        ("Darboux transformation", darboux),
        ("imaginary-frequency equivalence", imaginary_frequency),
        ("shooting oracle cross-check", shooting_cross_check),
        ("truncation bound", truncation_bound),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2}s]", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.2}s]", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
