//! Config-driven experiment runner behind the `torsion-lab` binary.
//!
//! Every table is computed into memory first and written afterwards, so
//! output files only depend on the config and never on the worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex;
use num_rational::BigRational;

use crate::config::{parse_config, Diagnostic, ExperimentConfig, TestFnSpec};
use crate::equidist::{convergence_report, Part, weyl_prediction, weyl_sums, write_rows, CSV_HEADER};
use crate::error::Error;
use crate::exact::FieldElement;
use crate::good_reduction::{
    subvariety_torsion_count, supersingular_p_torsion_check, vanishing_fraction, EllipticCurve,
};
use crate::scalar::fmt_rational;
use crate::tropical::corner_hit_count;
use crate::uniformization::{coordinate_monomials, torsion_coordinates, torsion_points, valuation};

type Q = BigRational;

/// Default worker count when neither `--jobs` nor the config sets one.
pub const JOBS_ENV: &str = "TORSION_LAB_JOBS";
pub const SCHEMA: u32 = 1;
/// Largest accepted deviation of a Weyl sum from its predicted indicator.
pub const WEYL_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Torsion,
    Weyl,
    Corner,
    Equidist,
    Goodred,
    All,
}

impl Subcommand {
    pub const ALL: [Subcommand; 5] = [
        Subcommand::Torsion,
        Subcommand::Weyl,
        Subcommand::Corner,
        Subcommand::Equidist,
        Subcommand::Goodred,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Torsion => "torsion",
            Subcommand::Weyl => "weyl",
            Subcommand::Corner => "corner",
            Subcommand::Equidist => "equidist",
            Subcommand::Goodred => "goodred",
            Subcommand::All => "all",
        }
    }
}

impl FromStr for Subcommand {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Subcommand::ALL
            .into_iter()
            .chain([Subcommand::All])
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown subcommand `{s}`"))
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    /// Write measured wall-clock times instead of zeros.
    pub timings: bool,
}

#[derive(Debug)]
pub enum RunError {
    Config(Diagnostic),
    Io(PathBuf, std::io::Error),
    Input(Error),
    Violation(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Violation(_) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(d) => write!(f, "{d}"),
            RunError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            RunError::Input(e) => write!(f, "{e}"),
            RunError::Violation(msg) => write!(f, "assertion violated: {msg}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::BoundViolation(msg) => RunError::Violation(msg),
            other => RunError::Input(other),
        }
    }
}

/// One CSV file.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub text: String,
    /// Rows were written but an internal assertion failed.
    pub violation: Option<String>,
}

impl Table {
    fn new(name: &str, columns: &str) -> Self {
        Table {
            name: name.to_string(),
            text: format!("# schema={SCHEMA} table={name}\n{columns}\n"),
            violation: None,
        }
    }

    fn flag(&mut self, msg: String) {
        self.violation.get_or_insert(msg);
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

/// `cli` beats the config, which beats the environment.
pub fn resolve_jobs(cli: Option<usize>, config: Option<usize>, env: Option<&str>) -> Option<usize> {
    cli.or(config)
        .or_else(|| env.and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(";")
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Every representative with its valuation and exact coordinates. Checks
/// `x^m = prod_j q_j^{c_j}` coordinatewise.
pub fn torsion_table(cfg: &ExperimentConfig) -> Result<Table, RunError> {
    let data = &cfg.data;
    let mut t = Table::new("torsion", "m,index,order,c,e,multiplicity,beta,zeta_exp,t_exp");
    let periods: Vec<Vec<FieldElement<Q>>> = (0..data.r()).map(|j| data.generator_coordinates(j)).collect();
    for &m in &cfg.m_list {
        let order = m * data.n0();
        let mult = data.multiplicity(m)?;
        for (index, x) in torsion_points(data, m)?.enumerate() {
            let mono = coordinate_monomials(&x, data);
            let coords = torsion_coordinates::<Q>(&x, data);
            for (i, xi) in coords.iter().enumerate() {
                let mut target = FieldElement::one(data.n0());
                for (j, period) in periods.iter().enumerate() {
                    target = &target * &period[i].pow(x.c[j]);
                }
                if xi.pow(m) != target.lift(order)? {
                    t.flag(format!("m = {m}, index {index}: coordinate {i} is not an m-th root"));
                }
            }
            let beta = valuation(&x, data).beta;
            let _ = writeln!(
                t.text,
                "{m},{index},{order},{},{},{mult},{},{},{}",
                join(&x.c, |v| v.to_string()),
                join(&x.e, |v| v.to_string()),
                join(&beta, fmt_rational),
                join(&mono, |(b, _)| b.to_string()),
                join(&mono, |(_, u)| fmt_rational(u)),
            );
        }
    }
    Ok(t)
}

/// All `n in [-K, K]^r \ {0}` in lexicographic order.
pub fn dual_box(r: usize, k_max: i64) -> Vec<Vec<i64>> {
    let side = (2 * k_max + 1) as usize;
    let total = side.pow(r as u32);
    (0..total)
        .map(|mut flat| {
            let mut n = vec![0i64; r];
            for slot in n.iter_mut().rev() {
                *slot = (flat % side) as i64 - k_max;
                flat /= side;
            }
            n
        })
        .filter(|n| n.iter().any(|&x| x != 0))
        .collect()
}

pub fn weyl_table(cfg: &ExperimentConfig) -> Result<Table, RunError> {
    let data = &cfg.data;
    let mut t = Table::new("weyl", "m,n,k,re,im,predicted,abs_error");
    for &m in &cfg.m_list {
        let ns = dual_box(data.r(), cfg.weyl_k_max);
        let ks: Vec<Vec<Q>> = ns.iter().map(|n| data.lattice().dual_vector(n)).collect();
        let sums: Vec<Complex<f64>> = weyl_sums(data, m, &ks)?;
        for ((n, k), z) in ns.iter().zip(&ks).zip(sums) {
            let predicted = if weyl_prediction(data, m, k)? { 1.0 } else { 0.0 };
            let err = (z - Complex::new(predicted, 0.0)).norm();
            if err > WEYL_TOLERANCE {
                t.flag(format!("Weyl sum at m = {m}, n = {n:?} is {err:e} from {predicted}"));
            }
            let _ = writeln!(
                t.text,
                "{m},{},{},{},{},{},{}",
                join(n, |v| v.to_string()),
                join(k, fmt_rational),
                sci(z.re),
                sci(z.im),
                predicted as u8,
                sci(err)
            );
        }
    }
    Ok(t)
}

pub fn corner_table(cfg: &ExperimentConfig) -> Result<Table, RunError> {
    let mut t = Table::new("corner", "m,poly,hits,total,ratio");
    for named in cfg.corner_polynomials() {
        if named.poly.is_zero() {
            continue;
        }
        for &m in &cfg.m_list {
            let c = corner_hit_count(&named.poly, &cfg.data, m)?;
            let _ = writeln!(t.text, "{m},{},{},{},{}", named.name, c.hits, c.total, sci(c.ratio()));
        }
    }
    Ok(t)
}

/// Convergence rows plus one note per test function with its decay exponent.
pub fn equidist_table(cfg: &ExperimentConfig, timings: bool) -> Result<(Table, Vec<String>), RunError> {
    let mut t = Table::new("equidist", CSV_HEADER);
    let mut notes = Vec::new();
    for (name, spec) in &cfg.test_functions {
        let f = cfg.test_function(spec);
        let report = convergence_report::<f64, Q>(&cfg.data, name, &f, &cfg.m_list, cfg.grid)?;
        if let TestFnSpec::Character { k, part } = spec {
            for row in &report.rows {
                let aliased = weyl_prediction(&cfg.data, row.m, k)?;
                let predicted = if aliased && *part == Part::Re { 1.0 } else { 0.0 };
                if (row.empirical - predicted).abs() > WEYL_TOLERANCE {
                    t.flag(format!("character {name} at m = {} averages {:e}, expected {predicted}", row.m, row.empirical));
                }
            }
        }
        let mut buf = Vec::new();
        write_rows(&mut buf, &report.rows, timings).expect("writing to memory");
        t.text.push_str(&String::from_utf8(buf).expect("ascii"));
        notes.push(match report.decay_exponent {
            Some(s) => format!("{name}: fitted decay exponent {s:.4}"),
            None => format!("{name}: errors below the fit floor"),
        });
    }
    Ok((t, notes))
}

pub fn goodred_tables(cfg: &ExperimentConfig) -> Result<Vec<Table>, RunError> {
    let mut tables = Vec::new();
    if let Some(g) = &cfg.good_reduction {
        let e = g.curve()?;
        let mut t = Table::new("goodred", "m,model,degree,count,bound");
        for &m in &g.m_list {
            for z in &g.subvarieties {
                let c = subvariety_torsion_count(&e, &e, z, m)?;
                let _ = writeln!(t.text, "{m},{z},{},{},{}", z.intersection_degree(), c.count, c.bound);
            }
        }
        tables.push(t);
        if let Some((_, h)) = &g.h {
            let mut t = Table::new("vanishing", "m,torsion_zeros,curve_zeros,torsion_size,fraction");
            for &m in &g.m_list {
                let r = vanishing_fraction(&e, h, m)?;
                let _ = writeln!(
                    t.text,
                    "{m},{},{},{},{}",
                    r.torsion_zeros,
                    r.curve_zeros,
                    r.torsion_size,
                    fmt_rational(&r.fraction())
                );
            }
            tables.push(t);
        }
    }
    if let Some(ss) = &cfg.supersingular {
        let e = EllipticCurve::from_integers(ss.p, 1, ss.a, ss.b)?;
        let r = supersingular_p_torsion_check(&e, ss.k_max)?;
        let mut t = Table::new("supersingular", "k,count,predicted,p_torsion");
        for k in 0..r.counts.len() {
            let _ = writeln!(t.text, "{},{},{},{}", k + 1, r.counts[k], r.predicted[k], r.p_torsion[k]);
        }
        if !r.holds {
            t.flag(format!("points of order {} found on a supersingular curve", r.p));
        }
        tables.push(t);
    }
    Ok(tables)
}

/// Computes the tables for one subcommand without touching the filesystem.
pub fn compute(cmd: Subcommand, cfg: &ExperimentConfig, timings: bool) -> Result<(Vec<Table>, Vec<String>), RunError> {
    let mut notes = Vec::new();
    let tables = match cmd {
        Subcommand::Torsion => vec![torsion_table(cfg)?],
        Subcommand::Weyl => vec![weyl_table(cfg)?],
        Subcommand::Corner => vec![corner_table(cfg)?],
        Subcommand::Equidist => {
            let (t, n) = equidist_table(cfg, timings)?;
            notes = n;
            vec![t]
        }
        Subcommand::Goodred => {
            if cfg.good_reduction.is_none() && cfg.supersingular.is_none() {
                return Err(RunError::Input(Error::Unsupported(
                    "goodred needs a [good_reduction] or [supersingular] section".into(),
                )));
            }
            goodred_tables(cfg)?
        }
        Subcommand::All => {
            let mut all = Vec::new();
            for sub in Subcommand::ALL {
                if sub == Subcommand::Goodred && cfg.good_reduction.is_none() && cfg.supersingular.is_none() {
                    continue;
                }
                let (t, n) = compute(sub, cfg, timings)?;
                all.extend(t);
                notes.extend(n);
            }
            all
        }
    };
    Ok((tables, notes))
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Runs a parsed config and writes `<out>/<table>.csv` for every table.
pub fn run_config(cmd: Subcommand, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary, RunError> {
    let env = std::env::var(JOBS_ENV).ok();
    let jobs = resolve_jobs(opts.jobs, cfg.jobs, env.as_deref());
    let (tables, notes) = with_pool(jobs, || compute(cmd, cfg, opts.timings))?;
    let dir = opts
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(|e| RunError::Io(dir.clone(), e))?;
    let mut summary = RunSummary {
        files: Vec::new(),
        notes,
    };
    let mut violation = None;
    for t in tables {
        let path = dir.join(format!("{}.csv", t.name));
        fs::write(&path, &t.text).map_err(|e| RunError::Io(path.clone(), e))?;
        summary.files.push(path);
        if violation.is_none() {
            violation = t.violation;
        }
    }
    match violation {
        Some(msg) => Err(RunError::Violation(msg)),
        None => Ok(summary),
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Io(path.to_path_buf(), e))?;
    parse_config(&text).map_err(RunError::Config)
}

pub fn run(cmd: Subcommand, config_path: &Path, opts: &RunOptions) -> Result<RunSummary, RunError> {
    run_config(cmd, &load_config(config_path)?, opts)
}
