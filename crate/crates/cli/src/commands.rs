use std::fs::File;
use std::io::{self, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use spps::spectral::{find_eigenvalues, Spectrum};
use spps::{
    build_power_table, build_seed, make_grid, BoundaryConditions, RootMethod, SampledFn, SpectrumOptions, SppsBasis,
};

use crate::config::{constant_expr, load_coefficient, Method, ProblemConfig};
use crate::error::{CliError, CliResult};

/// Seventeen significant digits, independent of locale.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: Vec<String>) -> Table {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    fn write_to(&self, sink: Box<dyn Write>) -> CliResult<()> {
        let io_err = |e: csv::Error| CliError::Io(e.to_string());
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(&self.header).map_err(io_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(io_err)?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn write(&self, path: Option<&Path>) -> CliResult<()> {
        match path {
            Some(p) => {
                let file = File::create(p).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
                self.write_to(Box::new(io::BufWriter::new(file)))
            }
            None => self.write_to(Box::new(io::stdout().lock())),
        }
    }
}

fn complex_header(names: &[&str]) -> Vec<String> {
    names
        .iter()
        .flat_map(|n| [format!("{n}_re"), format!("{n}_im")])
        .collect()
}

/// One row per grid node: `x` followed by each function split into re/im.
fn function_table(names: &[&str], columns: &[&SampledFn]) -> Table {
    let mut header = vec!["x".to_string()];
    header.extend(complex_header(names));
    let mut table = Table::new(header);
    let grid = columns[0].grid();
    for (j, x) in grid.nodes().enumerate() {
        let mut row = vec![num(x)];
        for col in columns {
            let v = col.values()[j];
            row.push(num(v.re));
            row.push(num(v.im));
        }
        table.rows.push(row);
    }
    table
}

/// Complex literal such as `1+0i`, `-2.5i`, `3`, or any constant expression.
pub fn parse_complex(src: &str) -> Result<Complex64, String> {
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(body) = s.strip_suffix('i') {
        let split = body
            .char_indices()
            .rev()
            .find(|&(k, ch)| (ch == '+' || ch == '-') && k > 0 && !matches!(body.as_bytes()[k - 1], b'e' | b'E'))
            .map(|(k, _)| k);
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            other => other.parse::<f64>().ok(),
        };
        if let (Ok(re), Some(im)) = (re.parse::<f64>(), im) {
            return Ok(Complex64::new(re, im));
        }
    } else if let Ok(re) = s.parse::<f64>() {
        return Ok(Complex64::new(re, 0.0));
    }
    constant_expr(src)
}

pub struct Problem {
    pub cfg: ProblemConfig,
    pub p: SampledFn,
    pub q: SampledFn,
}

impl Problem {
    pub fn load(path: &Path) -> CliResult<Problem> {
        let cfg = ProblemConfig::load(path)?;
        let grid = make_grid(cfg.a, cfg.n_points)?;
        let p = load_coefficient(&cfg.p, grid)?;
        let q = load_coefficient(&cfg.q, grid)?;
        Ok(Problem { cfg, p, q })
    }

    fn basis(&self, omega_max: f64) -> CliResult<SppsBasis> {
        let seed = build_seed(&self.p, &self.q, &self.cfg.seed_mode())?;
        Ok(SppsBasis::for_omega_max(
            self.p.clone(),
            self.q.clone(),
            seed,
            omega_max,
            self.cfg.tol,
        )?)
    }
}

pub fn solve(problem: &Problem, omega: Complex64, out: Option<&Path>) -> CliResult<()> {
    let basis = problem.basis(omega.norm())?;
    let pair = basis.solve(omega, problem.cfg.tol)?;
    function_table(
        &["u1", "u2", "u1_prime", "u2_prime"],
        &[&pair.u1, &pair.u2, &pair.u1_prime, &pair.u2_prime],
    )
    .write(out)
}

pub struct SpectrumRequest<'a> {
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub out: Option<&'a Path>,
    pub eigenfunctions_out: Option<&'a Path>,
}

pub fn spectrum(problem: &Problem, req: &SpectrumRequest) -> CliResult<Vec<String>> {
    let cfg = &problem.cfg;
    let lo = req.lambda_min.or(cfg.lambda_min);
    let hi = req.lambda_max.or(cfg.lambda_max);
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return Err(CliError::Usage(
            "spectrum needs lambda_min and lambda_max (flags or [spectrum] section)".into(),
        ));
    };
    let defaults = SpectrumOptions::default();
    let options = SpectrumOptions {
        scan_points: cfg.scan_points.unwrap_or(defaults.scan_points),
        accept_tol: cfg.accept_tol.unwrap_or(defaults.accept_tol),
        max_newton: cfg.max_newton.unwrap_or(defaults.max_newton),
        im_tol: cfg.im_tol.unwrap_or(defaults.im_tol),
        tol: cfg.tol,
        method: match cfg.method {
            Method::Scan => RootMethod::ScanNewton,
            Method::Aberth => RootMethod::Aberth,
        },
        ..defaults
    };
    let basis = problem.basis(lo.abs().max(hi.abs()).sqrt())?;
    let bc = BoundaryConditions::new(cfg.alpha, cfg.beta);
    let spec = find_eigenvalues(&basis, bc, (lo, hi), &options)?;
    eigenvalue_table(&spec).write(req.out.or(cfg.out.as_deref()))?;

    let count = cfg.eigenfunctions.min(spec.eigenvalues.len());
    if count > 0 {
        let path = req
            .eigenfunctions_out
            .or(cfg.eigenfunctions_out.as_deref())
            .ok_or_else(|| CliError::Usage("eigenfunctions requested but no eigenfunctions_out path given".into()))?;
        let funcs = (0..count)
            .map(|k| spec.eigenfunction(&basis, k).map(|e| e.u))
            .collect::<Result<Vec<_>, _>>()?;
        let names: Vec<String> = (1..=count).map(|k| format!("u{k}")).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        function_table(&names, &funcs.iter().collect::<Vec<_>>()).write(Some(path))?;
    }
    Ok(spec.diagnostics)
}

fn eigenvalue_table(spec: &Spectrum) -> Table {
    let mut table = Table::new(
        ["k", "lambda_re", "lambda_im", "kappa_residual", "newton_iters"]
            .map(String::from)
            .to_vec(),
    );
    for (k, ev) in spec.eigenvalues.iter().enumerate() {
        table.rows.push(vec![
            (k + 1).to_string(),
            num(ev.lambda.re),
            num(ev.lambda.im),
            num(ev.kappa_residual),
            ev.newton_iters.to_string(),
        ]);
    }
    table
}

pub fn powers(problem: &Problem, n: usize, out: Option<&Path>) -> CliResult<()> {
    let seed = build_seed(&problem.p, &problem.q, &problem.cfg.seed_mode())?;
    let table = build_power_table(Arc::new(seed), n)?;
    let names: Vec<String> = (0..=n)
        .map(|k| format!("X{k}"))
        .chain((0..=n).map(|k| format!("Xt{k}")))
        .collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let columns: Vec<&SampledFn> = table.x_family().iter().chain(table.xt_family()).collect();
    function_table(&names, &columns).write(out)
}

pub fn darboux(problem: &Problem, omega: Complex64, out: Option<&Path>) -> CliResult<()> {
    let basis = problem.basis(omega.norm())?;
    let dt = basis.darboux(omega, problem.cfg.tol)?;
    function_table(&["q_new", "v1", "v2"], &[&dt.q_new, &dt.v1, &dt.v2]).write(out)
}

/// Residual and Wronskian certificates; fails when a residual exceeds `threshold`.
pub fn verify(problem: &Problem, omegas: &[Complex64], threshold: f64, out: Option<&Path>) -> CliResult<()> {
    let omega_max = omegas.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let basis = problem.basis(omega_max)?;
    let mut table = Table::new(
        [
            "k",
            "omega_re",
            "omega_im",
            "residual_u1",
            "residual_u2",
            "wronskian_defect",
            "trunc_n",
            "tail_bound",
        ]
        .map(String::from)
        .to_vec(),
    );
    let mut failed = Vec::new();
    for (k, &omega) in omegas.iter().enumerate() {
        let pair = basis.solve(omega, problem.cfg.tol)?;
        let r1 = basis.residual(omega, &pair.u1)?.norm;
        let r2 = basis.residual(omega, &pair.u2)?.norm;
        let w = pair.wronskian(basis.p())?;
        let defect = w.values().iter().map(|v| (v - 1.0).norm()).fold(0.0, f64::max);
        if r1.max(r2) > threshold {
            failed.push(format!("{omega}"));
        }
        table.rows.push(vec![
            (k + 1).to_string(),
            num(omega.re),
            num(omega.im),
            num(r1),
            num(r2),
            num(defect),
            pair.trunc_n.to_string(),
            num(pair.tail_bound),
        ]);
    }
    table.write(out)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "residual above {threshold:e} at omega = {}",
            failed.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let c = Complex64::new;
        assert_eq!(parse_complex("1+0i").unwrap(), c(1.0, 0.0));
        assert_eq!(parse_complex("2.5-3i").unwrap(), c(2.5, -3.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("4i").unwrap(), c(0.0, 4.0));
        assert_eq!(parse_complex("1e-3+2e1i").unwrap(), c(1e-3, 20.0));
        assert_eq!(parse_complex("-7").unwrap(), c(-7.0, 0.0));
        assert_eq!(parse_complex(" 1 + 2i ").unwrap(), c(1.0, 2.0));
        assert!((parse_complex("pi*i").unwrap() - c(0.0, std::f64::consts::PI)).norm() < 1e-15);
        assert!(parse_complex("x").is_err());
        assert!(parse_complex("1+").is_err());
    }

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(num(1.0f64.cosh()), "1.5430806348152437e0");
        assert_eq!(num(-0.1).parse::<f64>().unwrap(), -0.1);
    }
}
