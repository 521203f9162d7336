//! Flat key-value run configuration, stored as TOML with dotted keys.
//!
//! ```toml
//! n_cells = 64
//! domain_length = 1.0
//! obstacle.lower = 0.0
//! obstacle.upper = "inf"
//! kappa.kind = "constant"      # constant | saturating | lifted_saturating
//! kappa.value = 1.0
//! f.kind = "zero"              # zero | constant | table | intro_step | per_step
//! theta0.kind = "constant"     # constant | cosine | values
//! theta0.value = -1.0
//! rho = 2.0
//! epsilon = 1e-3
//! alpha = 0.0
//! t_final = 1.0
//! dt = 1e-4
//! ```
//!
//! Missing keys take the defaults of [`ConfigSpec::default`].

use std::collections::BTreeMap;

use toml::Value;

use crate::error::{Error, Result};
use crate::solver::{ConfigSpec, Diffusivity, InitialDatum, KappaKind, NamedKappa, SimulationConfig, SourceTerm};

/// Every key the schema accepts.
pub const KEYS: &[&str] = &[
    "n_cells",
    "domain_length",
    "obstacle.lower",
    "obstacle.upper",
    "kappa.kind",
    "kappa.value",
    "f.kind",
    "f.value",
    "f.table",
    "f.values",
    "theta0.kind",
    "theta0.value",
    "theta0.amplitude",
    "theta0.frequency",
    "theta0.values",
    "rho",
    "epsilon",
    "alpha",
    "t_final",
    "dt",
    "fp_tol",
    "fp_max_iter",
    "hit_tol",
    "snapshot_times",
];

pub type ConfigDocument = BTreeMap<String, Value>;

fn flatten(prefix: &str, table: &toml::Table, out: &mut ConfigDocument) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

fn check_keys(doc: &ConfigDocument) -> Result<()> {
    match doc.keys().find(|k| !KEYS.contains(&k.as_str())) {
        Some(k) => Err(Error::Config(format!("unknown key `{k}`"))),
        None => Ok(()),
    }
}

pub fn parse_document(text: &str) -> Result<ConfigDocument> {
    let table: toml::Table = text.parse().map_err(|e| Error::Config(format!("malformed document: {e}")))?;
    let mut doc = ConfigDocument::new();
    flatten("", &table, &mut doc);
    check_keys(&doc)?;
    Ok(doc)
}

/// Applies one `key=value` override. The value is read as a TOML value
/// when possible and as a bare string otherwise.
pub fn apply_override(doc: &mut ConfigDocument, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    if !KEYS.contains(&key) {
        return Err(Error::Config(format!("unknown key `{key}`")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    doc.insert(key.to_string(), value);
    Ok(())
}

fn number(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        Value::String(s) => match s.trim() {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
            other => other
                .parse()
                .map_err(|_| Error::param(key, format!("expected a number, got \"{other}\""))),
        },
        other => Err(Error::param(key, format!("expected a number, got {other}"))),
    }
}

fn count(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        other => Err(Error::param(key, format!("expected a nonnegative integer, got {other}"))),
    }
}

fn text<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::param(key, format!("expected a string, got {v}")))
}

fn numbers(key: &str, v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| Error::param(key, "expected an array of numbers"))?
        .iter()
        .map(|x| number(key, x))
        .collect()
}

struct Reader<'a>(&'a ConfigDocument);

impl Reader<'_> {
    fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    fn num(&self, key: &str, default: f64) -> Result<f64> {
        self.get(key).map_or(Ok(default), |v| number(key, v))
    }
}

/// Reads the document into an unvalidated [`ConfigSpec`].
pub fn spec_from_document(doc: &ConfigDocument) -> Result<ConfigSpec> {
    check_keys(doc)?;
    let d = ConfigSpec::default();
    let r = Reader(doc);

    let kappa = match r.get("kappa.kind").map(|v| text("kappa.kind", v)).transpose()? {
        None | Some("constant") => Diffusivity::constant(r.num("kappa.value", 1.0)?)?,
        Some(name) => Diffusivity::named(
            NamedKappa::from_name(name).ok_or_else(|| Error::param("kappa.kind", format!("unknown kind \"{name}\"")))?,
        ),
    };

    let source = match r.get("f.kind").map(|v| text("f.kind", v)).transpose()? {
        None | Some("zero") => SourceTerm::Zero,
        Some("constant") => SourceTerm::Constant(r.num("f.value", 0.0)?),
        Some("intro_step") => SourceTerm::IntroStep,
        Some("table") => {
            let rows = r
                .get("f.table")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::param("f.table", "expected an array of [t, value] pairs"))?;
            let knots = rows
                .iter()
                .map(|row| match numbers("f.table", row)?.as_slice() {
                    [t, c] => Ok((*t, *c)),
                    _ => Err(Error::param("f.table", "each row must be [t, value]")),
                })
                .collect::<Result<Vec<_>>>()?;
            SourceTerm::Table(knots)
        }
        Some("per_step") => SourceTerm::PerStep(numbers(
            "f.values",
            r.get("f.values").ok_or_else(|| Error::param("f.values", "required for f.kind = \"per_step\""))?,
        )?),
        Some(other) => return Err(Error::param("f.kind", format!("unknown kind \"{other}\""))),
    };

    let theta0 = match r.get("theta0.kind").map(|v| text("theta0.kind", v)).transpose()? {
        None | Some("constant") => InitialDatum::Constant(r.num("theta0.value", -1.0)?),
        Some("cosine") => InitialDatum::Cosine {
            amplitude: r.num("theta0.amplitude", 1.0)?,
            frequency: r.num("theta0.frequency", 1.0)?,
        },
        Some("values") => InitialDatum::Values(numbers(
            "theta0.values",
            r.get("theta0.values").ok_or_else(|| Error::param("theta0.values", "required for theta0.kind = \"values\""))?,
        )?),
        Some(other) => return Err(Error::param("theta0.kind", format!("unknown kind \"{other}\""))),
    };

    Ok(ConfigSpec {
        n_cells: r.get("n_cells").map_or(Ok(d.n_cells), |v| count("n_cells", v))?,
        domain_length: r.num("domain_length", d.domain_length)?,
        obstacle_lower: r.num("obstacle.lower", d.obstacle_lower)?,
        obstacle_upper: r.num("obstacle.upper", d.obstacle_upper)?,
        kappa,
        source,
        theta0,
        rho: r.num("rho", d.rho)?,
        epsilon: r.num("epsilon", d.epsilon)?,
        alpha: r.num("alpha", d.alpha)?,
        t_final: r.num("t_final", d.t_final)?,
        dt: r.num("dt", d.dt)?,
        fp_tol: r.num("fp_tol", d.fp_tol)?,
        fp_max_iter: r.get("fp_max_iter").map_or(Ok(d.fp_max_iter), |v| count("fp_max_iter", v))?,
        hit_tol: r.get("hit_tol").map(|v| number("hit_tol", v)).transpose()?,
        snapshot_times: r.get("snapshot_times").map_or(Ok(vec![]), |v| numbers("snapshot_times", v))?,
    })
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<SimulationConfig> {
    spec_from_document(&parse_document(text)?)?.build()
}

fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| Value::Float(x)).collect())
}

pub fn document_from_spec(spec: &ConfigSpec) -> ConfigDocument {
    let mut doc = ConfigDocument::new();
    let mut put = |k: &str, v: Value| {
        doc.insert(k.to_string(), v);
    };
    put("n_cells", Value::Integer(spec.n_cells as i64));
    put("domain_length", Value::Float(spec.domain_length));
    put("obstacle.lower", Value::Float(spec.obstacle_lower));
    put("obstacle.upper", Value::Float(spec.obstacle_upper));
    match spec.kappa.kind() {
        KappaKind::Constant(c) => {
            put("kappa.kind", Value::String("constant".into()));
            put("kappa.value", Value::Float(c));
        }
        KappaKind::Named(k) => put("kappa.kind", Value::String(k.name().into())),
    }
    match &spec.source {
        SourceTerm::Zero => put("f.kind", Value::String("zero".into())),
        SourceTerm::Constant(c) => {
            put("f.kind", Value::String("constant".into()));
            put("f.value", Value::Float(*c));
        }
        SourceTerm::IntroStep => put("f.kind", Value::String("intro_step".into())),
        SourceTerm::Table(knots) => {
            put("f.kind", Value::String("table".into()));
            put("f.table", Value::Array(knots.iter().map(|&(t, c)| floats(&[t, c])).collect()));
        }
        SourceTerm::PerStep(values) => {
            put("f.kind", Value::String("per_step".into()));
            put("f.values", floats(values));
        }
    }
    match &spec.theta0 {
        InitialDatum::Constant(c) => {
            put("theta0.kind", Value::String("constant".into()));
            put("theta0.value", Value::Float(*c));
        }
        InitialDatum::Cosine { amplitude, frequency } => {
            put("theta0.kind", Value::String("cosine".into()));
            put("theta0.amplitude", Value::Float(*amplitude));
            put("theta0.frequency", Value::Float(*frequency));
        }
        InitialDatum::Values(v) => {
            put("theta0.kind", Value::String("values".into()));
            put("theta0.values", floats(v));
        }
    }
    put("rho", Value::Float(spec.rho));
    put("epsilon", Value::Float(spec.epsilon));
    put("alpha", Value::Float(spec.alpha));
    put("t_final", Value::Float(spec.t_final));
    put("dt", Value::Float(spec.dt));
    put("fp_tol", Value::Float(spec.fp_tol));
    put("fp_max_iter", Value::Integer(spec.fp_max_iter as i64));
    if let Some(h) = spec.hit_tol {
        put("hit_tol", Value::Float(h));
    }
    if !spec.snapshot_times.is_empty() {
        put("snapshot_times", floats(&spec.snapshot_times));
    }
    doc
}

/// One `key = value` line per entry, readable by [`parse_document`].
pub fn render_document(doc: &ConfigDocument) -> String {
    doc.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
rho = 2.0
epsilon = 1e-3
dt = 1e-4
t_final = 1.0
obstacle.lower = 0.0
obstacle.upper = "inf"
theta0.kind = "constant"
theta0.value = -1.0
"#;

    #[test]
    fn minimal_document() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.rho(), 2.0);
        assert_eq!(cfg.obstacle().upper(), None);
        assert_eq!(cfg.n_steps(), 10_000);
    }

    #[test]
    fn epsilon_zero_names_the_invariant() {
        let err = parse_config(&format!("{MINIMAL}\nepsilon = 0\n").replace("epsilon = 1e-3\n", "")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("epsilon") && msg.contains("RegularizationParams"), "{msg}");
    }

    #[test]
    fn trivial_set_rejected() {
        let err = parse_config("obstacle.lower = \"-inf\"\nobstacle.upper = \"inf\"\n").unwrap_err();
        assert!(err.to_string().contains("trivial constraint set"), "{err}");
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(parse_config("rhoo = 1.0\n").unwrap_err().to_string().contains("unknown key `rhoo`"));
        let mut doc = parse_document(MINIMAL).unwrap();
        assert!(apply_override(&mut doc, "bogus=1").is_err());
        assert!(apply_override(&mut doc, "rho").is_err());
    }

    #[test]
    fn contraction_violation_prints_inequality() {
        let err = parse_config(&MINIMAL.replace("dt = 1e-4", "dt = 5e-3")).unwrap_err();
        assert!(err.to_string().contains("dt*rho/epsilon = 10 > 0.5"), "{err}");
    }

    #[test]
    fn overrides() {
        let mut doc = parse_document(MINIMAL).unwrap();
        apply_override(&mut doc, "rho=4").unwrap();
        apply_override(&mut doc, "kappa.kind=saturating").unwrap();
        apply_override(&mut doc, "alpha = 0.1").unwrap();
        let spec = spec_from_document(&doc).unwrap();
        assert_eq!(spec.rho, 4.0);
        assert_eq!(spec.kappa, Diffusivity::saturating());
        assert_eq!(spec.alpha, 0.1);
    }

    #[test]
    fn source_table_and_sections() {
        let text = "[f]\nkind = \"table\"\ntable = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]\n";
        let spec = spec_from_document(&parse_document(text).unwrap()).unwrap();
        assert_eq!(spec.source, SourceTerm::Table(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]));
    }

    #[test]
    fn document_round_trip() {
        for s in crate::experiments::all_scenarios() {
            let text = render_document(&document_from_spec(&s.spec));
            let back = spec_from_document(&parse_document(&text).unwrap()).unwrap();
            assert_eq!(back, s.spec, "{}\n{text}", s.name);
        }
    }
}
