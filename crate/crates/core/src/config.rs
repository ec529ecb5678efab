//! Run configuration: flat `key=value` lines or a JSON object.
//!
//! ```text
//! example=example1
//! alpha=0.3,0.5
//! N=32
//! gamma=25
//! scheme=all
//! ```
//!
//! List-valued `alpha`, `N` and `gamma` span a Cartesian product. `rows`
//! lists explicit `(alpha, N, gamma)` triples instead (`0.5,32,25; 1,32,15`
//! in flat form, `[[0.5,32,25],[1,32,15]]` in JSON).

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::problem::{make_grid, ProblemSpec, SchemeKind, TimeGrid};

/// Initial datum or obstacle: an expression in `x` or values on the
/// interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum FnSource {
    Expr(Expr),
    Table(Vec<f64>),
}

impl FnSource {
    fn sample(&self, nodes: &[f64], key: &str) -> Result<Vec<f64>> {
        match self {
            FnSource::Expr(e) => Ok(nodes.iter().map(|&x| e.eval(x)).collect()),
            FnSource::Table(v) if v.len() == nodes.len() => Ok(v.clone()),
            FnSource::Table(v) => Err(Error::ConfigKey {
                key: key.into(),
                msg: format!("{} tabulated values for {} interior nodes", v.len(), nodes.len()),
            }),
        }
    }
}

/// Domain, initial datum and obstacle of one problem family.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemData {
    pub name: String,
    pub domain: (f64, f64),
    pub u0: FnSource,
    pub psi: FnSource,
    /// Obstacle at the endpoints; `None` evaluates an expression obstacle there.
    pub psi_boundary: Option<(f64, f64)>,
}

impl ProblemData {
    /// `u0 = 0.7 - 0.7 x^2`, `psi = 0.5 - 2 x^2` on `(-1, 1)`.
    pub fn example1() -> Self {
        Self::from_exprs("example1", "0.7 - 0.7*x^2", "0.5 - 2*x^2")
    }

    /// `u0 = 1 - x^2`, `psi = 0.5 - (2 x^2 - 0.5)^2` on `(-1, 1)`.
    pub fn example2() -> Self {
        Self::from_exprs("example2", "1 - x^2", "0.5 - (2*x^2 - 0.5)^2")
    }

    fn from_exprs(name: &str, u0: &str, psi: &str) -> Self {
        ProblemData {
            name: name.into(),
            domain: (-1.0, 1.0),
            u0: FnSource::Expr(Expr::parse(u0).expect("built-in expression")),
            psi: FnSource::Expr(Expr::parse(psi).expect("built-in expression")),
            psi_boundary: None,
        }
    }

    /// Sample on an `n_intervals` mesh and validate.
    pub fn spec(
        &self,
        alpha: f64,
        n_intervals: usize,
        time: TimeGrid,
        scheme: SchemeKind,
        tol: f64,
    ) -> Result<ProblemSpec> {
        let grid = make_grid(self.domain.0, self.domain.1, n_intervals)?;
        let u0 = self.u0.sample(grid.nodes(), "u0")?;
        let psi = self.psi.sample(grid.nodes(), "psi")?;
        let psi_boundary = match (self.psi_boundary, &self.psi) {
            (Some(pb), _) => pb,
            (None, FnSource::Expr(e)) => (e.eval(grid.a()), e.eval(grid.b())),
            (None, FnSource::Table(_)) => {
                return Err(Error::ConfigKey {
                    key: "psi_boundary".into(),
                    msg: "required when psi is tabulated".into(),
                })
            }
        };
        ProblemSpec::from_nodal(alpha, grid, time, u0, psi, psi_boundary, scheme, tol)
    }

    /// Spec on the mesh `n_intervals` whose step is derived from `gamma_alpha`.
    pub fn spec_for_ratio(
        &self,
        alpha: f64,
        n_intervals: usize,
        gamma_alpha: f64,
        horizon: Horizon,
        scheme: SchemeKind,
        tol: f64,
    ) -> Result<ProblemSpec> {
        let h = (self.domain.1 - self.domain.0) / n_intervals as f64;
        let tau = derive_tau(alpha, gamma_alpha, h)?;
        let time = horizon.time_grid(tau)?;
        self.spec(alpha, n_intervals, time, scheme, tol)
    }
}

/// `tau = (gamma h^2)^{1/alpha}` for `alpha > 0`.
pub fn derive_tau(alpha: f64, gamma_alpha: f64, h: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if !(gamma_alpha.is_finite() && gamma_alpha > 0.0) {
        return Err(Error::ConfigKey {
            key: "gamma".into(),
            msg: format!("must be positive, got {gamma_alpha}"),
        });
    }
    let tau = (gamma_alpha * h * h).powf(1.0 / alpha);
    let back = tau.powf(alpha) / (h * h);
    if !(tau > 0.0 && tau.is_finite()) || ((back - gamma_alpha) / gamma_alpha).abs() > 1e-9 {
        return Err(Error::ConfigKey {
            key: "gamma".into(),
            msg: format!("tau = {tau:e} does not reproduce gamma {gamma_alpha} at alpha {alpha}"),
        });
    }
    Ok(tau)
}

/// How far a run may go.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    /// `M = round(T / tau)`.
    Final(f64),
    /// A fixed number of steps; the stopping test usually ends the run first.
    Steps(usize),
}

impl Horizon {
    pub fn time_grid(&self, tau: f64) -> Result<TimeGrid> {
        match *self {
            Horizon::Final(t) => TimeGrid::from_horizon(tau, t),
            Horizon::Steps(m) => TimeGrid::new(tau, m),
        }
    }
}

/// One scheme or all three.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeChoice {
    One(SchemeKind),
    All,
}

impl SchemeChoice {
    pub fn kinds(&self) -> Vec<SchemeKind> {
        match self {
            SchemeChoice::One(s) => vec![*s],
            SchemeChoice::All => SchemeKind::ALL.to_vec(),
        }
    }
}

/// One `(alpha, N, gamma)` combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Combo {
    pub alpha: f64,
    pub n_intervals: usize,
    pub gamma_alpha: f64,
}

/// The parameter set: a product of lists or explicit rows.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    Product {
        alpha: Vec<f64>,
        n_intervals: Vec<usize>,
        gamma_alpha: Vec<f64>,
    },
    Rows(Vec<Combo>),
}

impl Sweep {
    pub fn combos(&self) -> Vec<Combo> {
        match self {
            Sweep::Rows(rows) => rows.clone(),
            Sweep::Product {
                alpha,
                n_intervals,
                gamma_alpha,
            } => {
                let mut out = Vec::new();
                for &a in alpha {
                    for &n in n_intervals {
                        for &g in gamma_alpha {
                            out.push(Combo {
                                alpha: a,
                                n_intervals: n,
                                gamma_alpha: g,
                            });
                        }
                    }
                }
                out
            }
        }
    }
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemData,
    pub sweep: Sweep,
    /// Final time `T`; `None` runs until the stopping test or the budget.
    pub horizon: Option<f64>,
    pub tol: f64,
    pub scheme: SchemeChoice,
    pub truncate_memory: bool,
    pub output_dir: Option<PathBuf>,
    /// Time step used at `alpha = 0`, where `gamma` does not determine it.
    pub tau_alpha_zero: f64,
    /// Decay sampling window `[decay_from, decay_to]` and sample count.
    pub decay_window: (f64, f64),
    pub decay_samples: usize,
    /// Stopping tolerance of the stationary reference.
    pub ref_tol: f64,
}

const KEYS: &[&str] = &[
    "example",
    "alpha",
    "N",
    "gamma",
    "rows",
    "T",
    "tol",
    "scheme",
    "truncate_memory",
    "output_dir",
    "domain",
    "u0",
    "psi",
    "psi_boundary",
    "tau",
    "decay_from",
    "decay_to",
    "decay_samples",
    "ref_tol",
];

fn canonical_key(key: &str) -> Option<&'static str> {
    let k = match key {
        "n_intervals" => "N",
        "gamma_alpha" => "gamma",
        "horizon" => "T",
        other => other,
    };
    KEYS.iter().copied().find(|&c| c == k)
}

/// Parse a flat `key=value` document or, when the first non-blank character
/// is `{`, a JSON object.
pub fn parse_config(source: &str) -> Result<RunConfig> {
    let raw = if source.trim_start().starts_with('{') {
        parse_json(source)?
    } else {
        parse_flat(source)?
    };
    RawConfig(raw).validate()
}

fn parse_flat(source: &str) -> Result<BTreeMap<&'static str, Value>> {
    let mut map = BTreeMap::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let text = line.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let (key, value) = text.split_once('=').ok_or_else(|| Error::ConfigLine {
            line: line_no,
            msg: format!("expected `key=value`, got `{text}`"),
        })?;
        let key = key.trim();
        let canon = canonical_key(key).ok_or_else(|| Error::ConfigLine {
            line: line_no,
            msg: format!("unknown key `{key}`"),
        })?;
        if map
            .insert(canon, Value::String(value.trim().to_string()))
            .is_some()
        {
            return Err(Error::ConfigLine {
                line: line_no,
                msg: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(map)
}

fn parse_json(source: &str) -> Result<BTreeMap<&'static str, Value>> {
    let value: Value = serde_json::from_str(source).map_err(|e| Error::ConfigLine {
        line: e.line(),
        msg: e.to_string(),
    })?;
    let Value::Object(obj) = value else {
        return Err(Error::Config("JSON config must be an object".into()));
    };
    let mut map = BTreeMap::new();
    for (key, v) in obj {
        let canon = canonical_key(&key).ok_or_else(|| Error::ConfigKey {
            key: key.clone(),
            msg: "unknown key".into(),
        })?;
        if map.insert(canon, v).is_some() {
            return Err(Error::ConfigKey {
                key,
                msg: "given twice (via an alias)".into(),
            });
        }
    }
    Ok(map)
}

fn key_err(key: &str, msg: impl Into<String>) -> Error {
    Error::ConfigKey {
        key: key.into(),
        msg: msg.into(),
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| key_err(key, format!("`{}` is not a number", s.trim())))
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| key_err(key, "not a number")),
        Value::String(s) => parse_f64(key, s),
        _ => Err(key_err(key, "expected a number")),
    }
}

fn as_f64_list(key: &str, v: &Value) -> Result<Vec<f64>> {
    let list = match v {
        Value::Array(items) => items.iter().map(|x| as_f64(key, x)).collect::<Result<Vec<_>>>()?,
        Value::String(s) => {
            let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
            inner
                .split(',')
                .map(|p| parse_f64(key, p))
                .collect::<Result<Vec<_>>>()?
        }
        other => vec![as_f64(key, other)?],
    };
    if list.is_empty() {
        return Err(key_err(key, "empty list"));
    }
    Ok(list)
}

fn as_count(key: &str, x: f64) -> Result<usize> {
    if x.fract() != 0.0 || x < 0.0 || x > u32::MAX as f64 {
        return Err(key_err(key, format!("{x} is not a non-negative integer")));
    }
    Ok(x as usize)
}

fn as_bool(key: &str, v: &Value) -> Result<bool> {
    match v {
        Value::Bool(b) => Ok(*b),
        Value::String(s) => match s.trim() {
            "true" | "1" | "yes" | "on" => Ok(true),
            "false" | "0" | "no" | "off" => Ok(false),
            other => Err(key_err(key, format!("`{other}` is not a boolean"))),
        },
        _ => Err(key_err(key, "expected a boolean")),
    }
}

fn as_str<'v>(key: &str, v: &'v Value) -> Result<&'v str> {
    match v {
        Value::String(s) => Ok(s.trim()),
        _ => Err(key_err(key, "expected a string")),
    }
}

fn as_pair(key: &str, v: &Value) -> Result<(f64, f64)> {
    match as_f64_list(key, v)?.as_slice() {
        &[a, b] => Ok((a, b)),
        other => Err(key_err(key, format!("expected two values, got {}", other.len()))),
    }
}

fn as_fn_source(key: &str, v: &Value) -> Result<FnSource> {
    match v {
        Value::Array(_) => Ok(FnSource::Table(as_f64_list(key, v)?)),
        Value::String(s) if s.trim_start().starts_with('[') => {
            Ok(FnSource::Table(as_f64_list(key, v)?))
        }
        Value::String(s) => Expr::parse(s)
            .map(FnSource::Expr)
            .map_err(|e| key_err(key, e.to_string())),
        _ => Err(key_err(key, "expected an expression or a list of values")),
    }
}

fn as_rows(key: &str, v: &Value) -> Result<Vec<Combo>> {
    let triples: Vec<Vec<f64>> = match v {
        Value::Array(items) => items
            .iter()
            .map(|row| as_f64_list(key, row))
            .collect::<Result<_>>()?,
        Value::String(s) => s
            .split(';')
            .filter(|r| !r.trim().is_empty())
            .map(|r| as_f64_list(key, &Value::String(r.to_string())))
            .collect::<Result<_>>()?,
        _ => return Err(key_err(key, "expected a list of (alpha, N, gamma) rows")),
    };
    if triples.is_empty() {
        return Err(key_err(key, "no rows"));
    }
    triples
        .into_iter()
        .map(|t| match t.as_slice() {
            &[alpha, n, gamma] => Ok(Combo {
                alpha,
                n_intervals: as_count(key, n)?,
                gamma_alpha: gamma,
            }),
            other => Err(key_err(
                key,
                format!("row needs (alpha, N, gamma), got {} values", other.len()),
            )),
        })
        .collect()
}

struct RawConfig(BTreeMap<&'static str, Value>);

impl RawConfig {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.0.remove(key)
    }

    fn validate(mut self) -> Result<RunConfig> {
        let mut missing = Vec::new();
        for key in ["example", "scheme"] {
            if !self.0.contains_key(key) {
                missing.push(key);
            }
        }
        let has_rows = self.0.contains_key("rows");
        if !has_rows {
            for key in ["alpha", "N", "gamma"] {
                if !self.0.contains_key(key) {
                    missing.push(key);
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::Config(format!(
                "missing required keys: {}",
                missing.join(", ")
            )));
        }

        let example = self.take("example").unwrap();
        let domain_v = self.take("domain");
        let u0_v = self.take("u0");
        let psi_v = self.take("psi");
        let psi_b_v = self.take("psi_boundary");
        let problem = match as_str("example", &example)? {
            "example1" | "example2" => {
                let given: Vec<&str> = [("domain", &domain_v), ("u0", &u0_v), ("psi", &psi_v)]
                    .iter()
                    .filter(|(_, v)| v.is_some())
                    .map(|(k, _)| *k)
                    .collect();
                if let Some(k) = given.first() {
                    return Err(key_err(k, "only valid with example=custom"));
                }
                let mut p = if as_str("example", &example)? == "example1" {
                    ProblemData::example1()
                } else {
                    ProblemData::example2()
                };
                if let Some(v) = psi_b_v {
                    p.psi_boundary = Some(as_pair("psi_boundary", &v)?);
                }
                p
            }
            "custom" => {
                let u0 = u0_v.ok_or_else(|| key_err("u0", "required with example=custom"))?;
                let psi = psi_v.ok_or_else(|| key_err("psi", "required with example=custom"))?;
                let domain = match domain_v {
                    Some(v) => as_pair("domain", &v)?,
                    None => (-1.0, 1.0),
                };
                ProblemData {
                    name: "custom".into(),
                    domain,
                    u0: as_fn_source("u0", &u0)?,
                    psi: as_fn_source("psi", &psi)?,
                    psi_boundary: psi_b_v.map(|v| as_pair("psi_boundary", &v)).transpose()?,
                }
            }
            other => {
                return Err(key_err(
                    "example",
                    format!("`{other}` is not one of example1, example2, custom"),
                ))
            }
        };

        let sweep = if let Some(rows) = self.take("rows") {
            if let Some(k) = ["alpha", "N", "gamma"].iter().find(|k| self.0.contains_key(*k)) {
                return Err(key_err(k, "cannot be combined with rows"));
            }
            Sweep::Rows(as_rows("rows", &rows)?)
        } else {
            let alpha = as_f64_list("alpha", &self.take("alpha").unwrap())?;
            let n_intervals = as_f64_list("N", &self.take("N").unwrap())?
                .into_iter()
                .map(|n| as_count("N", n))
                .collect::<Result<Vec<_>>>()?;
            let gamma_alpha = as_f64_list("gamma", &self.take("gamma").unwrap())?;
            Sweep::Product {
                alpha,
                n_intervals,
                gamma_alpha,
            }
        };
        for c in sweep.combos() {
            let key = if has_rows { "rows" } else { "alpha" };
            if !(0.0..=1.0).contains(&c.alpha) {
                return Err(key_err(key, format!("alpha {} outside [0, 1]", c.alpha)));
            }
            let key = if has_rows { "rows" } else { "N" };
            if c.n_intervals < 2 {
                return Err(key_err(key, format!("N = {} needs to be at least 2", c.n_intervals)));
            }
            let key = if has_rows { "rows" } else { "gamma" };
            if !(c.gamma_alpha.is_finite() && c.gamma_alpha > 0.0) {
                return Err(key_err(key, format!("gamma {} must be positive", c.gamma_alpha)));
            }
        }

        let scheme_v = self.take("scheme").unwrap();
        let scheme = match as_str("scheme", &scheme_v)? {
            "all" | "ALL" => SchemeChoice::All,
            s => SchemeChoice::One(s.parse().map_err(|_| {
                key_err("scheme", format!("`{s}` is not one of S1, S2, S3, all"))
            })?),
        };

        let positive = |key: &str, v: Option<Value>, default: Option<f64>| -> Result<Option<f64>> {
            match v {
                None => Ok(default),
                Some(v) => {
                    let x = as_f64(key, &v)?;
                    if !(x.is_finite() && x > 0.0) {
                        return Err(key_err(key, format!("must be positive, got {x}")));
                    }
                    Ok(Some(x))
                }
            }
        };
        let horizon = positive("T", self.take("T"), None)?;
        let tol = positive("tol", self.take("tol"), Some(1e-4))?.unwrap();
        let tau_alpha_zero = positive("tau", self.take("tau"), Some(1.0))?.unwrap();
        let ref_tol = positive("ref_tol", self.take("ref_tol"), Some(1e-10))?.unwrap();
        let decay_from = positive("decay_from", self.take("decay_from"), Some(1.0))?.unwrap();
        let decay_to = positive("decay_to", self.take("decay_to"), Some(20.0))?.unwrap();
        if decay_to <= decay_from {
            return Err(key_err("decay_to", "must exceed decay_from"));
        }
        let decay_samples = match self.take("decay_samples") {
            None => 10,
            Some(v) => match as_count("decay_samples", as_f64("decay_samples", &v)?)? {
                n if n >= 2 => n,
                n => return Err(key_err("decay_samples", format!("{n} < 2"))),
            },
        };
        let truncate_memory = match self.take("truncate_memory") {
            None => true,
            Some(v) => as_bool("truncate_memory", &v)?,
        };
        let output_dir = self
            .take("output_dir")
            .map(|v| as_str("output_dir", &v).map(PathBuf::from))
            .transpose()?;

        debug_assert!(self.0.is_empty(), "unconsumed keys {:?}", self.0.keys());
        Ok(RunConfig {
            problem,
            sweep,
            horizon,
            tol,
            scheme,
            truncate_memory,
            output_dir,
            tau_alpha_zero,
            decay_window: (decay_from, decay_to),
            decay_samples,
            ref_tol,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_one_row() {
        let cfg =
            parse_config("example=example1\nalpha=0.5\nN=32\ngamma=25\ntol=1e-4\nscheme=S1").unwrap();
        assert_eq!(cfg.problem.name, "example1");
        assert_eq!(
            cfg.sweep.combos(),
            vec![Combo {
                alpha: 0.5,
                n_intervals: 32,
                gamma_alpha: 25.0
            }]
        );
        assert_eq!(cfg.scheme, SchemeChoice::One(SchemeKind::S1));
        assert_eq!(cfg.tol, 1e-4);
        assert!(cfg.truncate_memory);
        assert_eq!(cfg.horizon, None);
    }

    #[test]
    fn empty_document_lists_missing_keys() {
        match parse_config("") {
            Err(Error::Config(msg)) => {
                for k in ["example", "scheme", "alpha", "N", "gamma"] {
                    assert!(msg.contains(k), "{msg}");
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn alpha_out_of_range() {
        let err = parse_config("example=example1\nalpha=1.5\nN=32\ngamma=25\nscheme=S1").unwrap_err();
        assert!(matches!(err, Error::ConfigKey { ref key, .. } if key == "alpha"), "{err:?}");
    }

    #[test]
    fn unknown_and_duplicate_keys_report_lines() {
        let err = parse_config("example=example1\nalpah=0.5").unwrap_err();
        assert!(matches!(err, Error::ConfigLine { line: 2, .. }), "{err:?}");
        let err = parse_config("example=example1\n\nN=32\nn_intervals=64").unwrap_err();
        assert!(matches!(err, Error::ConfigLine { line: 4, .. }), "{err:?}");
        let err = parse_config("example=example1\njust words").unwrap_err();
        assert!(matches!(err, Error::ConfigLine { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn json_and_flat_agree() {
        let flat = parse_config(
            "# sweep\nexample = example2\nalpha = 0.3, 0.5\nN = 32\ngamma_alpha = 50\nT = 10\nscheme = all\n",
        )
        .unwrap();
        let json = parse_config(
            r#"{"example": "example2", "alpha": [0.3, 0.5], "N": 32, "gamma": 50, "T": 10, "scheme": "all"}"#,
        )
        .unwrap();
        assert_eq!(flat, json);
        assert_eq!(flat.sweep.combos().len(), 2);
        assert_eq!(flat.scheme.kinds(), SchemeKind::ALL.to_vec());
    }

    #[test]
    fn json_errors() {
        let err = parse_config("{\n\"example\": \"example1\",\n\"alpha\": }").unwrap_err();
        assert!(matches!(err, Error::ConfigLine { line: 3, .. }), "{err:?}");
        let err = parse_config(r#"{"example": "example1", "bogus": 1}"#).unwrap_err();
        assert!(matches!(err, Error::ConfigKey { ref key, .. } if key == "bogus"), "{err:?}");
    }

    #[test]
    fn rows_and_product() {
        let cfg = parse_config("example=example1\nrows=0.5,32,25; 1,32,15\nscheme=S3").unwrap();
        let combos = cfg.sweep.combos();
        assert_eq!(combos.len(), 2);
        assert_eq!(combos[1].n_intervals, 32);
        assert_eq!(combos[1].gamma_alpha, 15.0);
        assert!(parse_config("example=example1\nrows=0.5,32\nscheme=S3").is_err());
        assert!(parse_config("example=example1\nrows=0.5,32,25\nalpha=0.3\nscheme=S3").is_err());
        assert!(parse_config("example=example1\nrows=0.5,32.5,25\nscheme=S3").is_err());

        let cfg = parse_config("example=example1\nalpha=0.3,0.5\nN=32,64\ngamma=1,2,3\nscheme=S3")
            .unwrap();
        assert_eq!(cfg.sweep.combos().len(), 12);
    }

    #[test]
    fn custom_problem() {
        let cfg = parse_config(
            "example=custom\ndomain=0,2\nu0=x*(2-x)\npsi=0.1 - (x-1)^2\nalpha=1\nN=4\ngamma=2\nscheme=S3",
        )
        .unwrap();
        let spec = cfg
            .problem
            .spec_for_ratio(1.0, 4, 2.0, Horizon::Steps(5), SchemeKind::S3, 1e-4)
            .unwrap();
        assert_eq!(spec.u0(), &[0.75, 1.0, 0.75]);
        assert_eq!(spec.psi_boundary(), (-0.9, -0.9));

        let cfg = parse_config(
            "example=custom\nu0=[0.5, 0.5, 0.5]\npsi=[0, 0.1, 0]\npsi_boundary=0,0\nalpha=0.5\nN=4\ngamma=1\nscheme=S1",
        )
        .unwrap();
        let spec = cfg
            .problem
            .spec_for_ratio(0.5, 4, 1.0, Horizon::Steps(5), SchemeKind::S1, 1e-4)
            .unwrap();
        assert_eq!(spec.psi(), &[0.0, 0.1, 0.0]);
        // wrong table length
        assert!(cfg
            .problem
            .spec_for_ratio(0.5, 8, 1.0, Horizon::Steps(5), SchemeKind::S1, 1e-4)
            .is_err());

        assert!(parse_config("example=custom\nu0=1\nalpha=1\nN=4\ngamma=1\nscheme=S1").is_err());
        assert!(parse_config("example=example1\nu0=1\nalpha=1\nN=4\ngamma=1\nscheme=S1").is_err());
        assert!(parse_config("example=custom\nu0=sin(x)\npsi=0\nalpha=1\nN=4\ngamma=1\nscheme=S1")
            .is_err());
    }

    #[test]
    fn derived_tau_reproduces_ratio() {
        let h = 2.0 / 32.0;
        for &(alpha, gamma) in &[(0.3, 60.0), (0.5, 25.0), (0.7, 50.0), (1.0, 15.0), (0.05, 3.0)] {
            let tau = derive_tau(alpha, gamma, h).unwrap();
            assert!((tau.powf(alpha) / (h * h) / gamma - 1.0).abs() < 1e-9);
        }
        assert!((derive_tau(0.5, 25.0, h).unwrap() - 0.0095367431640625).abs() < 1e-15);
        assert!(derive_tau(0.0, 256.0, h).is_err());
    }

    #[test]
    fn scalar_checks() {
        let base = "example=example1\nalpha=0.5\nN=32\ngamma=25\n";
        assert!(parse_config(&format!("{base}scheme=S4")).is_err());
        assert!(parse_config(&format!("{base}scheme=S2\ntol=0")).is_err());
        assert!(parse_config(&format!("{base}scheme=S2\ntruncate_memory=maybe")).is_err());
        let cfg = parse_config(&format!("{base}scheme=S2\ntruncate_memory=false\nT=10")).unwrap();
        assert!(!cfg.truncate_memory);
        assert_eq!(cfg.horizon, Some(10.0));
        assert!(parse_config("example=example3\nalpha=0.5\nN=32\ngamma=25\nscheme=S1").is_err());
        assert!(parse_config("example=example1\nalpha=0.5\nN=1\ngamma=25\nscheme=S1").is_err());
    }
}
