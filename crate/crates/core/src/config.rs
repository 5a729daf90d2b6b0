//! Experiment configuration: a sectioned `key = value` file with exact
//! rationals written as `p/q`.
//!
//! ```text
//! [experiment]
//! m_list = [2, 3, 4]
//! grid = 64
//!
//! [uniformization]
//! gamma = [[1, 0], [1/2, 3/2]]
//!
//! [polynomials]
//! f = X1 - 1
//!
//! [test_functions]
//! chi = character([0, 2/3])
//! tent = piecewise([[0, 0], [1/2, 1/2], [1, 0]])
//! pull = seminorm(f)
//! ```
//!
//! `#` starts a comment. Parsing is total: every input yields either a
//! validated [`ExperimentConfig`] or a single [`Diagnostic`] with a position.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::equidist::{Part, PiecewiseLinear, TestFunction};
use crate::error::Error;
use crate::good_reduction::{parse_bivariate, Bivariate, EllipticCurve, Point, SubvarietyModel};
use crate::scalar::fmt_rational;
use crate::syntax::parse_laurent;
use crate::tropical::LaurentPoly;
use crate::uniformization::{validate, RaynaudData, RaynaudSpec};

type Q = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagCode {
    Syntax,
    UnknownSection,
    UnknownKey,
    MissingKey,
    Duplicate,
    InvalidValue,
    DegenerateLattice,
    RankMismatch,
    UndefinedSymbol,
    UndefinedName,
    NotAscending,
    InvalidCurve,
}

impl DiagCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagCode::Syntax => "C001",
            DiagCode::UnknownSection => "C002",
            DiagCode::UnknownKey => "C003",
            DiagCode::MissingKey => "C004",
            DiagCode::Duplicate => "C005",
            DiagCode::InvalidValue => "C006",
            DiagCode::DegenerateLattice => "C007",
            DiagCode::RankMismatch => "C008",
            DiagCode::UndefinedSymbol => "C009",
            DiagCode::UndefinedName => "C010",
            DiagCode::NotAscending => "C011",
            DiagCode::InvalidCurve => "C012",
        }
    }
}

/// A config error at a 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: DiagCode,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: error[{}]: {}",
            self.line,
            self.column,
            self.code.as_str(),
            self.message
        )
    }
}

impl std::error::Error for Diagnostic {}

type DResult<T> = std::result::Result<T, Diagnostic>;

fn diag<T>(code: DiagCode, line: usize, column: usize, message: impl Into<String>) -> DResult<T> {
    Err(Diagnostic {
        code,
        line,
        column,
        message: message.into(),
    })
}

/// Test function as written; seminorm pullbacks refer to a polynomial by name.
#[derive(Clone, Debug, PartialEq)]
pub enum TestFnSpec {
    Character { k: Vec<Q>, part: Part },
    Piecewise(PiecewiseLinear),
    Seminorm(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedPoly {
    pub name: String,
    pub poly: LaurentPoly<Q>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoodReductionConfig {
    pub p: u64,
    pub k: u32,
    pub a: i64,
    pub b: i64,
    pub m_list: Vec<u64>,
    pub subvarieties: Vec<SubvarietyModel>,
    /// Source text and its reduction mod p.
    pub h: Option<(String, Bivariate)>,
}

impl GoodReductionConfig {
    pub fn curve(&self) -> crate::Result<EllipticCurve> {
        EllipticCurve::from_integers(self.p, self.k, self.a, self.b)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupersingularConfig {
    pub p: u64,
    pub a: i64,
    pub b: i64,
    pub k_max: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub m_list: Vec<u64>,
    pub grid: usize,
    pub jobs: Option<usize>,
    pub output: Option<String>,
    pub uniformization: RaynaudSpec,
    pub data: RaynaudData,
    pub order: u64,
    pub polynomials: Vec<NamedPoly>,
    pub test_functions: Vec<(String, TestFnSpec)>,
    pub weyl_k_max: i64,
    /// Polynomials swept by `corner`; `None` means all of them.
    pub corner: Option<Vec<String>>,
    pub good_reduction: Option<GoodReductionConfig>,
    pub supersingular: Option<SupersingularConfig>,
}

pub const DEFAULT_GRID: usize = 64;
pub const DEFAULT_WEYL_K_MAX: i64 = 2;

impl ExperimentConfig {
    pub fn polynomial(&self, name: &str) -> Option<&LaurentPoly<Q>> {
        self.polynomials.iter().find(|p| p.name == name).map(|p| &p.poly)
    }

    pub fn corner_polynomials(&self) -> Vec<&NamedPoly> {
        match &self.corner {
            None => self.polynomials.iter().collect(),
            Some(names) => names
                .iter()
                .filter_map(|n| self.polynomials.iter().find(|p| &p.name == n))
                .collect(),
        }
    }

    /// The resolved test function; names are checked during parsing.
    pub fn test_function(&self, spec: &TestFnSpec) -> TestFunction<Q> {
        match spec {
            TestFnSpec::Character { k, part } => TestFunction::Character { k: k.clone(), part: *part },
            TestFnSpec::Piecewise(pl) => TestFunction::PiecewiseLinear(pl.clone()),
            TestFnSpec::Seminorm(name) => {
                TestFunction::SeminormPullback(self.polynomial(name).expect("resolved at parse time").clone())
            }
        }
    }
}

// ---- lexical layer -------------------------------------------------------

#[derive(Clone, Debug)]
struct Entry {
    key: String,
    value: String,
    line: usize,
    key_col: usize,
    value_col: usize,
}

#[derive(Clone, Debug)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn require(&self, key: &str) -> DResult<&Entry> {
        match self.get(key) {
            Some(e) => Ok(e),
            None => diag(
                DiagCode::MissingKey,
                self.line,
                1,
                format!("missing key `{key}` in [{}]", self.name),
            ),
        }
    }

    fn check_keys(&self, allowed: &[&str]) -> DResult<()> {
        match self.entries.iter().find(|e| !allowed.contains(&e.key.as_str())) {
            Some(e) => diag(
                DiagCode::UnknownKey,
                e.line,
                e.key_col,
                format!("unknown key `{}` in [{}]", e.key, self.name),
            ),
            None => Ok(()),
        }
    }
}

const SECTIONS: &[&str] = &[
    "experiment",
    "uniformization",
    "polynomials",
    "test_functions",
    "weyl",
    "corner",
    "good_reduction",
    "supersingular",
];

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn split_sections(text: &str) -> DResult<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return diag(DiagCode::Syntax, line, indent + 1, "expected `]` closing the section header");
            };
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return diag(DiagCode::UnknownSection, line, indent + 2, format!("unknown section [{name}]"));
            }
            if sections.iter().any(|s| s.name == name) {
                return diag(DiagCode::Duplicate, line, indent + 1, format!("duplicate section [{name}]"));
            }
            sections.push(Section {
                name: name.to_string(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let Some(eq) = content.find('=') else {
            return diag(DiagCode::Syntax, line, indent + 1, "expected `key = value`");
        };
        let key = content[..eq].trim();
        if !is_ident(key) {
            return diag(DiagCode::Syntax, line, indent + 1, format!("invalid key `{key}`"));
        }
        let after = &content[eq + 1..];
        let value = after.trim();
        if value.is_empty() {
            return diag(DiagCode::Syntax, line, eq + 2, format!("missing value for `{key}`"));
        }
        let value_col = eq + 2 + (after.len() - after.trim_start().len());
        let Some(section) = sections.last_mut() else {
            return diag(DiagCode::Syntax, line, indent + 1, "key outside of any section");
        };
        if section.get(key).is_some() {
            return diag(
                DiagCode::Duplicate,
                line,
                indent + 1,
                format!("duplicate name `{key}` in [{}]", section.name),
            );
        }
        section.entries.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line,
            key_col: indent + 1,
            value_col,
        });
    }
    Ok(sections)
}

// ---- structured values ---------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Value {
    Atom(String, usize),
    List(Vec<Value>, usize),
    Call(String, Vec<Value>, usize),
}

impl Value {
    fn col(&self) -> usize {
        match self {
            Value::Atom(_, c) | Value::List(_, c) | Value::Call(_, _, c) => *c,
        }
    }
}

struct ValueParser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    base: usize,
}

impl ValueParser {
    fn parse(entry: &Entry) -> DResult<Value> {
        let mut p = ValueParser {
            chars: entry.value.chars().collect(),
            pos: 0,
            line: entry.line,
            base: entry.value_col,
        };
        let v = p.value()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return p.fail("unexpected trailing input");
        }
        Ok(v)
    }

    fn col(&self) -> usize {
        self.base + self.pos
    }

    fn fail<T>(&self, message: &str) -> DResult<T> {
        diag(DiagCode::Syntax, self.line, self.col(), message)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn items(&mut self, close: char) -> DResult<Vec<Value>> {
        let mut out = Vec::new();
        self.skip_ws();
        if self.peek() == Some(close) {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.value()?);
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(c) if c == close => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return self.fail(&format!("expected `,` or `{close}`")),
            }
        }
    }

    fn value(&mut self) -> DResult<Value> {
        self.skip_ws();
        let col = self.col();
        if self.peek() == Some('[') {
            self.pos += 1;
            return Ok(Value::List(self.items(']')?, col));
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if matches!(c, ',' | '[' | ']' | '(' | ')') {
                break;
            }
            self.pos += 1;
        }
        let atom: String = self.chars[start..self.pos].iter().collect::<String>().trim().to_string();
        if self.peek() == Some('(') && is_ident(&atom) {
            self.pos += 1;
            return Ok(Value::Call(atom, self.items(')')?, col));
        }
        if atom.is_empty() {
            return self.fail("expected a value");
        }
        Ok(Value::Atom(atom, col))
    }
}

fn invalid<T>(line: usize, col: usize, message: impl Into<String>) -> DResult<T> {
    diag(DiagCode::InvalidValue, line, col, message)
}

fn as_rational(v: &Value, line: usize) -> DResult<Q> {
    let Value::Atom(s, col) = v else {
        return invalid(line, v.col(), "expected a rational number");
    };
    let parse_int = |t: &str| t.trim().parse::<BigInt>().ok();
    let q = match s.split_once('/') {
        Some((n, d)) => match (parse_int(n), parse_int(d)) {
            (Some(n), Some(d)) if !d.is_zero() => Some(Q::new(n, d)),
            _ => None,
        },
        None => parse_int(s).map(Q::from_integer),
    };
    match q {
        Some(q) => Ok(q),
        None => invalid(line, *col, format!("`{s}` is not a rational number")),
    }
}

fn as_int(v: &Value, line: usize) -> DResult<i64> {
    match v {
        Value::Atom(s, col) => s
            .parse::<i64>()
            .or_else(|_| invalid(line, *col, format!("`{s}` is not an integer"))),
        _ => invalid(line, v.col(), "expected an integer"),
    }
}

fn as_list(v: &Value, line: usize) -> DResult<&[Value]> {
    match v {
        Value::List(items, _) => Ok(items),
        _ => invalid(line, v.col(), "expected a list `[...]`"),
    }
}

fn int_entry(e: &Entry) -> DResult<i64> {
    as_int(&ValueParser::parse(e)?, e.line)
}

fn positive(e: &Entry) -> DResult<u64> {
    let n = int_entry(e)?;
    if n < 1 {
        return invalid(e.line, e.value_col, format!("`{}` must be positive", e.key));
    }
    Ok(n as u64)
}

fn m_list(e: &Entry) -> DResult<Vec<u64>> {
    let v = ValueParser::parse(e)?;
    let items = as_list(&v, e.line)?;
    if items.is_empty() {
        return invalid(e.line, e.value_col, "m_list is empty");
    }
    let mut out = Vec::new();
    for item in items {
        let n = as_int(item, e.line)?;
        if n < 1 {
            return invalid(e.line, item.col(), "m_list entries must be positive");
        }
        if out.last().is_some_and(|&prev| prev >= n as u64) {
            return diag(DiagCode::NotAscending, e.line, item.col(), "m_list must be strictly ascending");
        }
        out.push(n as u64);
    }
    Ok(out)
}

fn rational_matrix(e: &Entry) -> DResult<Vec<Vec<Q>>> {
    let v = ValueParser::parse(e)?;
    as_list(&v, e.line)?
        .iter()
        .map(|row| as_list(row, e.line)?.iter().map(|x| as_rational(x, e.line)).collect())
        .collect()
}

fn int_matrix(e: &Entry) -> DResult<Vec<Vec<i64>>> {
    let v = ValueParser::parse(e)?;
    as_list(&v, e.line)?
        .iter()
        .map(|row| as_list(row, e.line)?.iter().map(|x| as_int(x, e.line)).collect())
        .collect()
}

// ---- section interpreters ------------------------------------------------

fn map_poly_error(err: Error, e: &Entry) -> Diagnostic {
    let (code, col, message) = match err {
        Error::UndefinedSymbol(name) => (
            DiagCode::UndefinedSymbol,
            e.value_col,
            format!("undefined symbol `{name}` in `{}`", e.key),
        ),
        Error::VariableOutOfRange { index, rank } => (
            DiagCode::RankMismatch,
            e.value_col,
            format!("`{}` uses X{index} but the rank is {rank}", e.key),
        ),
        Error::Parse { offset, message } => (DiagCode::Syntax, e.value_col + offset, message),
        other => (DiagCode::InvalidValue, e.value_col, other.to_string()),
    };
    Diagnostic {
        code,
        line: e.line,
        column: col,
        message,
    }
}

fn uniformization(sec: &Section) -> DResult<(RaynaudSpec, RaynaudData)> {
    sec.check_keys(&["r", "s", "n0", "alpha", "gamma"])?;
    let gamma_entry = sec.require("gamma")?;
    let gamma = rational_matrix(gamma_entry)?;
    let rank = gamma.len();
    if let Some(row) = gamma.iter().find(|row| row.len() != rank) {
        return diag(
            DiagCode::RankMismatch,
            gamma_entry.line,
            gamma_entry.value_col,
            format!("gamma rows must have length {rank}, found {}", row.len()),
        );
    }
    let r = match sec.get("r") {
        Some(e) => {
            let r = int_entry(e)?;
            if r != rank as i64 {
                return diag(
                    DiagCode::RankMismatch,
                    e.line,
                    e.value_col,
                    format!("r = {r} but gamma has {rank} generators"),
                );
            }
            r
        }
        None => rank as i64,
    };
    let s = sec.get("s").map(int_entry).transpose()?.unwrap_or(0);
    let n0 = sec.get("n0").map(int_entry).transpose()?.unwrap_or(1);
    let alpha = match sec.get("alpha") {
        Some(e) => {
            let a = int_matrix(e)?;
            if a.len() != rank || a.iter().any(|row| row.len() != rank) {
                return diag(DiagCode::RankMismatch, e.line, e.value_col, format!("alpha must be {rank} x {rank}"));
            }
            a
        }
        None => vec![vec![0; rank]; rank],
    };
    let spec = RaynaudSpec { r, s, n0, alpha, gamma };
    match validate(&spec) {
        Ok(data) => Ok((spec, data)),
        Err(Error::DegenerateLattice) => diag(
            DiagCode::DegenerateLattice,
            gamma_entry.line,
            gamma_entry.value_col,
            "degenerate lattice",
        ),
        Err(err) => diag(DiagCode::InvalidValue, sec.line, 1, err.to_string()),
    }
}

fn polynomials(sec: Option<&Section>, rank: usize) -> DResult<(u64, Vec<NamedPoly>)> {
    let Some(sec) = sec else {
        return Ok((1, Vec::new()));
    };
    let order = sec.get("order").map(positive).transpose()?.unwrap_or(1);
    let mut out = Vec::new();
    for e in sec.entries.iter().filter(|e| e.key != "order") {
        let poly = parse_laurent(&e.value, rank, order).map_err(|err| map_poly_error(err, e))?;
        out.push(NamedPoly {
            name: e.key.clone(),
            poly,
        });
    }
    Ok((order, out))
}

fn test_functions(sec: Option<&Section>, data: &RaynaudData, polys: &[NamedPoly]) -> DResult<Vec<(String, TestFnSpec)>> {
    let Some(sec) = sec else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for e in &sec.entries {
        let v = ValueParser::parse(e)?;
        let Value::Call(kind, args, col) = &v else {
            return invalid(e.line, e.value_col, "expected character(...), piecewise(...) or seminorm(...)");
        };
        let spec = match (kind.as_str(), args.as_slice()) {
            ("character", [k, rest @ ..]) if rest.len() <= 1 => {
                let k: Vec<Q> = as_list(k, e.line)?.iter().map(|x| as_rational(x, e.line)).collect::<DResult<_>>()?;
                if k.len() != data.r() {
                    return diag(DiagCode::RankMismatch, e.line, *col, format!("character has {} entries, rank is {}", k.len(), data.r()));
                }
                if !data.lattice().contains_dual(&k) {
                    return invalid(e.line, *col, "character is not in the dual lattice");
                }
                let part = match rest {
                    [] => Part::Re,
                    [Value::Atom(s, _)] if s == "re" => Part::Re,
                    [Value::Atom(s, _)] if s == "im" => Part::Im,
                    [other] => return invalid(e.line, other.col(), "expected `re` or `im`"),
                    _ => unreachable!(),
                };
                TestFnSpec::Character { k, part }
            }
            ("piecewise", profiles) if !profiles.is_empty() => {
                let mut parsed = Vec::new();
                for prof in profiles {
                    let mut pts = Vec::new();
                    for pt in as_list(prof, e.line)? {
                        match as_list(pt, e.line)? {
                            [b, y] => pts.push((as_rational(b, e.line)?, as_rational(y, e.line)?)),
                            _ => return invalid(e.line, pt.col(), "breakpoints are pairs `[beta, value]`"),
                        }
                    }
                    parsed.push(pts);
                }
                if parsed.len() != 1 && parsed.len() != data.r() {
                    return diag(DiagCode::RankMismatch, e.line, *col, format!("{} profiles for rank {}", parsed.len(), data.r()));
                }
                match PiecewiseLinear::new(parsed) {
                    Ok(pl) => TestFnSpec::Piecewise(pl),
                    Err(err) => return invalid(e.line, *col, err.to_string()),
                }
            }
            ("seminorm", [Value::Atom(name, ncol)]) => {
                if !polys.iter().any(|p| &p.name == name) {
                    return diag(DiagCode::UndefinedName, e.line, *ncol, format!("undefined polynomial `{name}`"));
                }
                TestFnSpec::Seminorm(name.clone())
            }
            _ => return invalid(e.line, *col, format!("malformed test function `{kind}(...)`")),
        };
        out.push((e.key.clone(), spec));
    }
    Ok(out)
}

fn name_list(e: &Entry) -> DResult<Vec<(String, usize)>> {
    let v = ValueParser::parse(e)?;
    as_list(&v, e.line)?
        .iter()
        .map(|x| match x {
            Value::Atom(s, c) if is_ident(s) => Ok((s.clone(), *c)),
            other => invalid(e.line, other.col(), "expected a name"),
        })
        .collect()
}

fn fiber_point(args: &[Value], curve: &EllipticCurve, line: usize, col: usize) -> DResult<Point> {
    match args {
        [Value::Atom(s, _)] if s == "O" => Ok(Point::Infinity),
        [x, y] => {
            let f = curve.field();
            let coord = |v: &Value| -> DResult<_> {
                let n = as_int(v, line)?;
                if n < 0 {
                    return invalid(line, v.col(), "field element index must be non-negative");
                }
                f.element(n as u64).or_else(|err| invalid(line, v.col(), err.to_string()))
            };
            curve
                .point(coord(x)?, coord(y)?)
                .or_else(|_| diag(DiagCode::InvalidCurve, line, col, "fiber point is not on the curve"))
        }
        _ => invalid(line, col, "expected a point `(x, y)` or `(O)`"),
    }
}

fn good_reduction(sec: &Section) -> DResult<GoodReductionConfig> {
    sec.check_keys(&["p", "k", "a", "b", "m_list", "subvarieties", "h"])?;
    let p_entry = sec.require("p")?;
    let p = positive(p_entry)?;
    let k = sec.get("k").map(positive).transpose()?.unwrap_or(1);
    let a = int_entry(sec.require("a")?)?;
    let b = int_entry(sec.require("b")?)?;
    let m_list = m_list(sec.require("m_list")?)?;
    let k32 = u32::try_from(k).or_else(|_| invalid(p_entry.line, 1, "extension degree too large"))?;
    let curve = EllipticCurve::from_integers(p, k32, a, b)
        .or_else(|err| diag(DiagCode::InvalidCurve, p_entry.line, p_entry.value_col, err.to_string()))?;
    let mut subvarieties = Vec::new();
    if let Some(e) = sec.get("subvarieties") {
        let v = ValueParser::parse(e)?;
        for item in as_list(&v, e.line)? {
            let z = match item {
                Value::Atom(s, _) if s == "diagonal" => SubvarietyModel::Diagonal,
                Value::Call(name, args, col) => match (name.as_str(), args.as_slice()) {
                    ("graph", [n]) => SubvarietyModel::GraphOfMultiplication(as_int(n, e.line)?),
                    ("horizontal", args) => SubvarietyModel::HorizontalFiber(fiber_point(args, &curve, e.line, *col)?),
                    ("vertical", args) => SubvarietyModel::VerticalFiber(fiber_point(args, &curve, e.line, *col)?),
                    _ => return invalid(e.line, *col, format!("unknown subvariety `{name}`")),
                },
                other => return invalid(e.line, other.col(), "expected diagonal, graph(n), horizontal(x, y) or vertical(x, y)"),
            };
            subvarieties.push(z);
        }
    }
    let h = match sec.get("h") {
        Some(e) => Some((
            e.value.clone(),
            parse_bivariate(&e.value, p).map_err(|err| map_poly_error(err, e))?,
        )),
        None => None,
    };
    Ok(GoodReductionConfig {
        p,
        k: k32,
        a,
        b,
        m_list,
        subvarieties,
        h,
    })
}

fn supersingular(sec: &Section) -> DResult<SupersingularConfig> {
    sec.check_keys(&["p", "a", "b", "k_max"])?;
    let p_entry = sec.require("p")?;
    let cfg = SupersingularConfig {
        p: positive(p_entry)?,
        a: int_entry(sec.require("a")?)?,
        b: int_entry(sec.require("b")?)?,
        k_max: u32::try_from(positive(sec.require("k_max")?)?).unwrap_or(u32::MAX),
    };
    EllipticCurve::from_integers(cfg.p, 1, cfg.a, cfg.b)
        .or_else(|err| diag(DiagCode::InvalidCurve, p_entry.line, p_entry.value_col, err.to_string()))?;
    Ok(cfg)
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> DResult<ExperimentConfig> {
    let sections = split_sections(text)?;
    let find = |name: &str| sections.iter().find(|s| s.name == name);
    let missing_section = |name: &str| {
        diag::<Section>(DiagCode::MissingKey, 1, 1, format!("missing section [{name}]")).unwrap_err()
    };

    let exp = find("experiment").ok_or_else(|| missing_section("experiment"))?;
    exp.check_keys(&["m_list", "grid", "jobs", "output"])?;
    let m_list = m_list(exp.require("m_list")?)?;
    let grid = exp.get("grid").map(positive).transpose()?.unwrap_or(DEFAULT_GRID as u64) as usize;
    let jobs = exp.get("jobs").map(positive).transpose()?.map(|j| j as usize);
    let output = exp.get("output").map(|e| e.value.clone());

    let uni = find("uniformization").ok_or_else(|| missing_section("uniformization"))?;
    let (spec, data) = uniformization(uni)?;
    let (order, polys) = polynomials(find("polynomials"), data.r())?;
    let tfs = test_functions(find("test_functions"), &data, &polys)?;

    let weyl_k_max = match find("weyl") {
        Some(sec) => {
            sec.check_keys(&["k_max"])?;
            sec.get("k_max").map(positive).transpose()?.unwrap_or(DEFAULT_WEYL_K_MAX as u64) as i64
        }
        None => DEFAULT_WEYL_K_MAX,
    };
    let corner = match find("corner") {
        Some(sec) => {
            sec.check_keys(&["polynomials"])?;
            match sec.get("polynomials") {
                Some(e) => {
                    let names = name_list(e)?;
                    let mut seen = BTreeSet::new();
                    for (n, c) in &names {
                        if !polys.iter().any(|p| &p.name == n) {
                            return diag(DiagCode::UndefinedName, e.line, *c, format!("undefined polynomial `{n}`"));
                        }
                        if !seen.insert(n.clone()) {
                            return diag(DiagCode::Duplicate, e.line, *c, format!("duplicate name `{n}`"));
                        }
                    }
                    Some(names.into_iter().map(|(n, _)| n).collect())
                }
                None => None,
            }
        }
        None => None,
    };
    let good = find("good_reduction").map(good_reduction).transpose()?;
    let ss = find("supersingular").map(supersingular).transpose()?;

    Ok(ExperimentConfig {
        m_list,
        grid,
        jobs,
        output,
        uniformization: spec,
        data,
        order,
        polynomials: polys,
        test_functions: tfs,
        weyl_k_max,
        corner,
        good_reduction: good,
        supersingular: ss,
    })
}

// ---- canonical printer ---------------------------------------------------

fn list<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    format!("[{}]", items.iter().map(f).collect::<Vec<_>>().join(", "))
}

fn point_args(p: &Point) -> String {
    match p {
        Point::Infinity => "O".to_string(),
        Point::Affine(x, y) => format!("{}, {}", x.0, y.0),
    }
}

/// Canonical text; `parse_config(&print_config(c)) == Ok(c)`.
pub fn print_config(c: &ExperimentConfig) -> String {
    let mut s = String::new();
    let q = |x: &Q| fmt_rational(x);
    let _ = writeln!(s, "[experiment]");
    let _ = writeln!(s, "m_list = {}", list(&c.m_list, |m| m.to_string()));
    let _ = writeln!(s, "grid = {}", c.grid);
    if let Some(j) = c.jobs {
        let _ = writeln!(s, "jobs = {j}");
    }
    if let Some(o) = &c.output {
        let _ = writeln!(s, "output = {o}");
    }
    let u = &c.uniformization;
    let _ = writeln!(s, "\n[uniformization]");
    let _ = writeln!(s, "r = {}\ns = {}\nn0 = {}", u.r, u.s, u.n0);
    let _ = writeln!(s, "alpha = {}", list(&u.alpha, |row| list(row, |x| x.to_string())));
    let _ = writeln!(s, "gamma = {}", list(&u.gamma, |row| list(row, q)));
    if !c.polynomials.is_empty() || c.order != 1 {
        let _ = writeln!(s, "\n[polynomials]\norder = {}", c.order);
        for p in &c.polynomials {
            let _ = writeln!(s, "{} = {}", p.name, p.poly);
        }
    }
    if !c.test_functions.is_empty() {
        let _ = writeln!(s, "\n[test_functions]");
        for (name, tf) in &c.test_functions {
            let body = match tf {
                TestFnSpec::Character { k, part } => match part {
                    Part::Re => format!("character({})", list(k, q)),
                    Part::Im => format!("character({}, im)", list(k, q)),
                },
                TestFnSpec::Piecewise(pl) => format!(
                    "piecewise({})",
                    pl.profiles()
                        .iter()
                        .map(|prof| list(prof, |(b, y)| format!("[{}, {}]", q(b), q(y))))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
                TestFnSpec::Seminorm(n) => format!("seminorm({n})"),
            };
            let _ = writeln!(s, "{name} = {body}");
        }
    }
    let _ = writeln!(s, "\n[weyl]\nk_max = {}", c.weyl_k_max);
    if let Some(names) = &c.corner {
        let _ = writeln!(s, "\n[corner]\npolynomials = {}", list(names, |n| n.clone()));
    }
    if let Some(g) = &c.good_reduction {
        let _ = writeln!(s, "\n[good_reduction]");
        let _ = writeln!(s, "p = {}\nk = {}\na = {}\nb = {}", g.p, g.k, g.a, g.b);
        let _ = writeln!(s, "m_list = {}", list(&g.m_list, |m| m.to_string()));
        if !g.subvarieties.is_empty() {
            let _ = writeln!(
                s,
                "subvarieties = {}",
                list(&g.subvarieties, |z| match z {
                    SubvarietyModel::Diagonal => "diagonal".to_string(),
                    SubvarietyModel::GraphOfMultiplication(n) => format!("graph({n})"),
                    SubvarietyModel::HorizontalFiber(p) => format!("horizontal({})", point_args(p)),
                    SubvarietyModel::VerticalFiber(p) => format!("vertical({})", point_args(p)),
                })
            );
        }
        if let Some((text, _)) = &g.h {
            let _ = writeln!(s, "h = {text}");
        }
    }
    if let Some(ss) = &c.supersingular {
        let _ = writeln!(s, "\n[supersingular]");
        let _ = writeln!(s, "p = {}\na = {}\nb = {}\nk_max = {}", ss.p, ss.a, ss.b, ss.k_max);
    }
    s
}
