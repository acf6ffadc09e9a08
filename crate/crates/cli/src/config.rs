//! Problem files: UTF-8 sections of `key = value` lines, `#` starts a comment.
//!
//! ```text
//! [problem]
//! a = 1
//! p = 1               # or p_table = p.csv
//! q = cos(x)          # or q_table = q.csv
//! seed = auto         # auto | ivp(u0, v0) | an expression in x
//! tol = 1e-12
//!
//! [grid]
//! n_points = 10001
//!
//! [spectrum]
//! lambda_min = -100
//! lambda_max = 0
//! alpha = 0           # constant expressions, e.g. pi/2
//! beta = 0
//! method = scan       # scan | aberth
//! eigenfunctions = 0  # how many eigenfunctions to tabulate
//!
//! [output]
//! out = result.csv
//! eigenfunctions_out = modes.csv
//! ```
//!
//! Table paths are relative to the directory holding the config file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use spps::{CoeffExpr, Grid, SampledFn, SeedMode};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub enum Coefficient {
    Expr(CoeffExpr),
    Table(PathBuf),
}

#[derive(Debug, Clone)]
pub enum SeedSpec {
    Auto,
    Ivp(Complex64, Complex64),
    Expr(CoeffExpr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Scan,
    Aberth,
}

#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub a: f64,
    pub n_points: usize,
    pub p: Coefficient,
    pub q: Coefficient,
    pub seed: SeedSpec,
    pub tol: f64,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub scan_points: Option<usize>,
    pub accept_tol: Option<f64>,
    pub max_newton: Option<usize>,
    pub im_tol: Option<f64>,
    pub method: Method,
    pub eigenfunctions: usize,
    pub out: Option<PathBuf>,
    pub eigenfunctions_out: Option<PathBuf>,
}

const KNOWN: &[(&str, &[&str])] = &[
    ("problem", &["a", "p", "p_table", "q", "q_table", "seed", "tol"]),
    ("grid", &["n_points"]),
    (
        "spectrum",
        &[
            "lambda_min",
            "lambda_max",
            "alpha",
            "beta",
            "scan_points",
            "accept_tol",
            "max_newton",
            "im_tol",
            "method",
            "eigenfunctions",
        ],
    ),
    ("output", &["out", "eigenfunctions_out"]),
];

type Sections = BTreeMap<String, BTreeMap<String, String>>;

fn parse_sections(text: &str) -> CliResult<Sections> {
    let mut sections = Sections::new();
    let mut current: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |msg: String| CliError::Config(format!("line {}: {msg}", lineno + 1));
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !KNOWN.iter().any(|(s, _)| *s == name) {
                return Err(at(format!("unknown section [{name}]")));
            }
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(at(format!("expected `key = value`, got `{line}`")));
        };
        let section = current
            .as_ref()
            .ok_or_else(|| at("key outside of any section".into()))?;
        let key = key.trim();
        let allowed = KNOWN.iter().find(|(s, _)| s == section).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(at(format!("unknown key `{key}` in [{section}]")));
        }
        let entries = sections.get_mut(section).expect("section registered above");
        if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(at(format!("duplicate key `{key}` in [{section}]")));
        }
    }
    Ok(sections)
}

struct Reader<'a> {
    sections: &'a Sections,
}

impl Reader<'_> {
    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, section: &str, key: &str) -> CliResult<Option<T>> {
        self.get(section, key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Config(format!("[{section}] {key}: cannot parse `{v}`")))
            })
            .transpose()
    }

    /// Real constant given as an expression such as `pi/4`.
    fn constant(&self, section: &str, key: &str) -> CliResult<Option<f64>> {
        let Some(src) = self.get(section, key) else {
            return Ok(None);
        };
        let z = constant_expr(src).map_err(|e| CliError::Config(format!("[{section}] {key}: {e}")))?;
        if z.im != 0.0 {
            return Err(CliError::Config(format!("[{section}] {key}: must be real, got {z}")));
        }
        Ok(Some(z.re))
    }
}

/// Evaluates an expression that must not depend on `x`.
pub fn constant_expr(src: &str) -> Result<Complex64, String> {
    let expr = CoeffExpr::parse(src).map_err(|e| format!("`{src}`: {e}"))?;
    if !expr.is_constant() {
        return Err(format!("`{src}` must not depend on x"));
    }
    expr.eval(0.0).map_err(|e| format!("`{src}`: {e}"))
}

fn coefficient(reader: &Reader, name: &str, base: &Path) -> CliResult<Coefficient> {
    let table_key = format!("{name}_table");
    match (reader.get("problem", name), reader.get("problem", &table_key)) {
        (Some(src), None) => CoeffExpr::parse(src)
            .map(Coefficient::Expr)
            .map_err(|e| CliError::Config(format!("[problem] {name}: {e}"))),
        (None, Some(path)) => {
            let path = base.join(path);
            if !path.is_file() {
                return Err(CliError::Config(format!(
                    "[problem] {table_key}: table not found: {}",
                    path.display()
                )));
            }
            Ok(Coefficient::Table(path))
        }
        (Some(_), Some(_)) => Err(CliError::Config(format!(
            "[problem] give either {name} or {table_key}, not both"
        ))),
        (None, None) => Err(CliError::Config(format!("[problem] missing {name} (or {table_key})"))),
    }
}

fn seed_spec(src: Option<&str>) -> CliResult<SeedSpec> {
    let Some(src) = src else {
        return Ok(SeedSpec::Auto);
    };
    if src == "auto" {
        return Ok(SeedSpec::Auto);
    }
    if let Some(args) = src.strip_prefix("ivp(").and_then(|s| s.strip_suffix(')')) {
        let parts: Vec<&str> = args.split(',').collect();
        if parts.len() != 2 {
            return Err(CliError::Config(format!(
                "[problem] seed: ivp takes two values, got `{src}`"
            )));
        }
        let value = |s: &str| constant_expr(s.trim()).map_err(|e| CliError::Config(format!("[problem] seed: {e}")));
        return Ok(SeedSpec::Ivp(value(parts[0])?, value(parts[1])?));
    }
    CoeffExpr::parse(src)
        .map(SeedSpec::Expr)
        .map_err(|e| CliError::Config(format!("[problem] seed: {e}")))
}

impl ProblemConfig {
    pub fn load(path: &Path) -> CliResult<ProblemConfig> {
        if !path.is_file() {
            return Err(CliError::Config(format!("config not found: {}", path.display())));
        }
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        ProblemConfig::parse(&text, &base)
    }

    pub fn parse(text: &str, base: &Path) -> CliResult<ProblemConfig> {
        let sections = parse_sections(text)?;
        let r = Reader { sections: &sections };
        let a = r
            .constant("problem", "a")?
            .ok_or_else(|| CliError::Config("[problem] missing a".into()))?;
        let method = match r.get("spectrum", "method").unwrap_or("scan") {
            "scan" => Method::Scan,
            "aberth" => Method::Aberth,
            other => {
                return Err(CliError::Config(format!(
                    "[spectrum] method: expected scan or aberth, got `{other}`"
                )))
            }
        };
        let path = |key: &str| r.get("output", key).map(|p| base.join(p));
        Ok(ProblemConfig {
            a,
            n_points: r.parsed("grid", "n_points")?.unwrap_or(10001),
            p: coefficient(&r, "p", base)?,
            q: coefficient(&r, "q", base)?,
            seed: seed_spec(r.get("problem", "seed"))?,
            tol: r.parsed("problem", "tol")?.unwrap_or(1e-12),
            lambda_min: r.constant("spectrum", "lambda_min")?,
            lambda_max: r.constant("spectrum", "lambda_max")?,
            alpha: r.constant("spectrum", "alpha")?.unwrap_or(0.0),
            beta: r.constant("spectrum", "beta")?.unwrap_or(0.0),
            scan_points: r.parsed("spectrum", "scan_points")?,
            accept_tol: r.parsed("spectrum", "accept_tol")?,
            max_newton: r.parsed("spectrum", "max_newton")?,
            im_tol: r.parsed("spectrum", "im_tol")?,
            method,
            eigenfunctions: r.parsed("spectrum", "eigenfunctions")?.unwrap_or(0),
            out: path("out"),
            eigenfunctions_out: path("eigenfunctions_out"),
        })
    }

    pub fn seed_mode(&self) -> SeedMode {
        match &self.seed {
            SeedSpec::Auto => SeedMode::Auto,
            SeedSpec::Ivp(u0, v0) => SeedMode::InitialValues { u0: *u0, v0: *v0 },
            SeedSpec::Expr(e) => SeedMode::Explicit(e.clone()),
        }
    }
}

/// Samples an expression or resamples a table onto `grid`.
pub fn load_coefficient(coef: &Coefficient, grid: Grid) -> CliResult<SampledFn> {
    match coef {
        Coefficient::Expr(e) => Ok(spps::sample(e, grid)?),
        Coefficient::Table(path) => {
            let (xs, ys) = read_table(path)?;
            SampledFn::from_table(grid, &xs, &ys)
                .map_err(|e| CliError::Config(format!("table {}: {e}", path.display())))
        }
    }
}

/// Rows `x, value` or `x, re, im`; a non-numeric first row is a header.
fn read_table(path: &Path) -> CliResult<(Vec<f64>, Vec<Complex64>)> {
    let fail = |msg: String| CliError::Config(format!("table {}: {msg}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| fail(e.to_string()))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| fail(e.to_string()))?;
        let nums: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let nums = match nums {
            Ok(n) => n,
            Err(_) if k == 0 => continue,
            Err(_) => return Err(fail(format!("row {}: non-numeric field", k + 1))),
        };
        match nums[..] {
            [x, v] => {
                xs.push(x);
                ys.push(Complex64::new(v, 0.0));
            }
            [x, re, im] => {
                xs.push(x);
                ys.push(Complex64::new(re, im));
            }
            _ => {
                return Err(fail(format!(
                    "row {}: expected 2 or 3 columns, got {}",
                    k + 1,
                    nums.len()
                )))
            }
        }
    }
    Ok((xs, ys))
}
