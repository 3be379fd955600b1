//! Experiment configuration: a JSON document, dotted-path overrides, and
//! validation with field-path diagnostics.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::green::{solve_first_passage, green_potential, WalkSpec};
use crate::potential::WeightedPotential;
use crate::word::{Alphabet, ReducedWord};

/// Name of the word-length potential, available without being declared.
pub const WORD_POTENTIAL: &str = "word";

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    /// Letter → weight, one entry per letter of the alphabet.
    #[serde(default)]
    pub weights: Option<BTreeMap<String, f64>>,
    /// Green potential of a named walk.
    #[serde(default)]
    pub walk: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfig {
    /// Letter → step probability.
    pub steps: BTreeMap<String, f64>,
}

macro_rules! defaults {
    ($($name:ident: $ty:ty = $val:expr;)*) => {
        $(fn $name() -> $ty { $val })*
    };
}

defaults! {
    word: String = WORD_POTENTIAL.to_string();
    fit_radius: f64 = 12.0;
    tol: f64 = 1e-12;
    csv_radii: Vec<f64> = (0..=12).map(f64::from).collect();
    two: usize = 2;
    one: usize = 1;
    three: usize = 3;
    s_offsets: Vec<f64> = vec![1e-1, 1e-2, 1e-3];
    max_radius: f64 = 14.0;
    rel_tail: f64 = 1e-4;
    ten: f64 = 10.0;
    ray: String = "a".to_string();
    eight: usize = 8;
    nesting_radius: Option<f64> = Some(5.0);
    word_list: Vec<String> = vec![WORD_POTENTIAL.to_string()];
    samples: usize = 10_000;
    bms_elements: Vec<String> = vec!["a".into(), "ab".into()];
    duality_radius: f64 = 8.0;
    paths: u64 = 1_000_000;
    cap: u64 = 10_000;
    kill: usize = 64;
    cylinders: Vec<String> = vec!["a".into(), "ab".into()];
    pair_paths: u64 = 20_000;
    pairs: Vec<[String; 2]> = vec![[WORD_POTENTIAL.to_string(), WORD_POTENTIAL.to_string()]];
    lambdas: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    depths: Vec<f64> = (0..=8).map(f64::from).collect();
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentConfig {
    #[serde(default = "word")]
    pub potential: String,
    #[serde(default = "fit_radius")]
    pub fit_radius: f64,
    #[serde(default = "tol")]
    pub tol: f64,
    /// Radii of the `R, N(R), partial_sum, s` table.
    #[serde(default = "csv_radii")]
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsMeasureConfig {
    #[serde(default = "word")]
    pub potential: String,
    #[serde(default = "two")]
    pub depth: usize,
    /// `s − δ*` values of the schedule.
    #[serde(default = "s_offsets")]
    pub s_offsets: Vec<f64>,
    /// Fixed truncation radius; chosen from the tail bound when absent.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default = "max_radius")]
    pub max_radius: f64,
    #[serde(default = "rel_tail")]
    pub rel_tail: f64,
    /// Quasi-invariance is checked for all `|g| ≤` this, at depth `|g| + 2`.
    #[serde(default = "three")]
    pub qi_max_len: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowLemmaConfig {
    #[serde(default = "word")]
    pub potential: String,
    #[serde(default = "one")]
    pub m: usize,
    #[serde(default = "ten")]
    pub radius: f64,
    #[serde(default = "ray")]
    pub ray: String,
    #[serde(default = "eight")]
    pub ray_max: usize,
    #[serde(default = "nesting_radius")]
    pub nesting_radius: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpsCheckConfig {
    #[serde(default = "word_list")]
    pub potentials: Vec<String>,
    #[serde(default = "samples")]
    pub samples: usize,
    #[serde(default = "bms_elements")]
    pub bms_elements: Vec<String>,
    #[serde(default = "three")]
    pub bms_depth: usize,
    #[serde(default = "duality_radius")]
    pub duality_radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenConfig {
    #[serde(default)]
    pub walk: Option<String>,
    #[serde(default = "tol")]
    pub tol: f64,
    #[serde(default = "paths")]
    pub paths: u64,
    #[serde(default = "cap")]
    pub cap: u64,
    #[serde(default = "kill")]
    pub kill_distance: usize,
    #[serde(default = "cylinders")]
    pub cylinders: Vec<String>,
    /// Random `(p, q)` pairs for the multiplicativity check.
    #[serde(default)]
    pub pairs: usize,
    #[serde(default = "pair_paths")]
    pub pair_paths: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidityConfig {
    #[serde(default = "pairs")]
    pub pairs: Vec<[String; 2]>,
    #[serde(default = "fit_radius")]
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexityConfig {
    #[serde(default = "pairs")]
    pub pairs: Vec<[String; 2]>,
    #[serde(default = "lambdas")]
    pub lambdas: Vec<f64>,
    /// Radius of the rigidity cross-check.
    #[serde(default = "fit_radius")]
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapConfig {
    #[serde(default = "word")]
    pub potential: String,
    #[serde(default = "two")]
    pub sub_rank: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConicalConfig {
    #[serde(default = "word")]
    pub potential: String,
    #[serde(default = "one")]
    pub m: usize,
    #[serde(default = "depths")]
    pub depths: Vec<f64>,
    #[serde(default)]
    pub window: Option<f64>,
    /// Also report the coverage by a free factor's orbit.
    #[serde(default)]
    pub sub_rank: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BmsConfig {
    #[serde(default = "word")]
    pub potential: String,
    #[serde(default = "bms_elements")]
    pub elements: Vec<String>,
    #[serde(default = "three")]
    pub depth: usize,
}

macro_rules! section_defaults {
    ($($ty:ident),*) => {
        $(impl Default for $ty {
            fn default() -> Self {
                serde_json::from_value(Value::Object(Default::default())).expect("all fields defaulted")
            }
        })*
    };
}

section_defaults!(
    ExponentConfig,
    PsMeasureConfig,
    ShadowLemmaConfig,
    GpsCheckConfig,
    GreenConfig,
    RigidityConfig,
    ConvexityConfig,
    GapConfig,
    ConicalConfig,
    BmsConfig
);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub rank: usize,
    #[serde(default)]
    pub potentials: BTreeMap<String, PotentialSpec>,
    #[serde(default)]
    pub walks: BTreeMap<String, WalkConfig>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub exponent: ExponentConfig,
    #[serde(default)]
    pub psmeasure: PsMeasureConfig,
    #[serde(default)]
    pub shadowlemma: ShadowLemmaConfig,
    #[serde(default)]
    pub gpscheck: GpsCheckConfig,
    #[serde(default)]
    pub green: GreenConfig,
    #[serde(default)]
    pub rigidity: RigidityConfig,
    #[serde(default)]
    pub convexity: ConvexityConfig,
    #[serde(default)]
    pub gap: GapConfig,
    #[serde(default)]
    pub conical: ConicalConfig,
    #[serde(default)]
    pub bms: BmsConfig,
}

/// A parsed configuration together with the JSON value it came from
/// (after overrides), which is what the manifest hash covers.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub value: Value,
}

/// Experiment sections of the configuration.
pub const SECTIONS: [&str; 10] =
    ["exponent", "psmeasure", "shadowlemma", "gpscheck", "green", "rigidity", "convexity", "gap", "conical", "bms"];

impl LoadedConfig {
    /// Diagnostics relevant to running `section`: global ones plus that
    /// section's. With `None`, every section written out in the file is
    /// checked; sections left to their defaults are not.
    pub fn diagnostics_for(&self, section: Option<&str>) -> Vec<Diagnostic> {
        let present = |s: &str| self.value.get(s).is_some();
        self.config
            .validate()
            .into_iter()
            .filter(|d| {
                let head = d.path.split(['.', '[']).next().unwrap_or("");
                if !SECTIONS.contains(&head) {
                    return true;
                }
                match section {
                    Some(s) => head == s,
                    None => present(head),
                }
            })
            .collect()
    }
}

/// Parses a JSON document and applies `path=value` overrides. Syntax and
/// type errors come back as a single diagnostic naming the line or field.
pub fn load(text: &str, overrides: &[String]) -> Result<LoadedConfig, Vec<Diagnostic>> {
    let mut value: Value = serde_json::from_str(text)
        .map_err(|e| vec![Diagnostic::new("", format!("invalid JSON at line {}, column {}: {e}", e.line(), e.column()))])?;
    if overrides.is_empty() {
        // typed parse straight from the text keeps line numbers
        let mut de = serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let inner = e.inner();
            vec![Diagnostic::new(
                e.path().to_string(),
                format!("{inner} (line {}, column {})", inner.line(), inner.column()),
            )]
        })?;
        return Ok(LoadedConfig { config, value });
    }
    for o in overrides {
        apply_override(&mut value, o).map_err(|d| vec![d])?;
    }
    let config: ExperimentConfig = serde_path_to_error::deserialize(value.clone())
        .map_err(|e| vec![Diagnostic::new(e.path().to_string(), e.inner().to_string())])?;
    Ok(LoadedConfig { config, value })
}

/// `a.b.c=value`; the value is read as JSON when it parses, else as a string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), Diagnostic> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Diagnostic::new(assignment, "override must have the form path=value"))?;
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    // `a.b[2]` and `a.b.2` address the same element
    let dotted = path.replace('[', ".").replace(']', "");
    let keys: Vec<&str> = dotted.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Diagnostic::new(path, "empty path component"));
    }
    let mut node = root;
    for (i, key) in keys.iter().enumerate() {
        let is_last = i + 1 == keys.len();
        match node {
            Value::Object(map) => {
                if is_last {
                    map.insert(key.to_string(), parsed);
                    return Ok(());
                }
                node = map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
            }
            Value::Array(items) => {
                let idx: usize = key
                    .parse()
                    .map_err(|_| Diagnostic::new(keys[..=i].join("."), "expected an array index"))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| Diagnostic::new(keys[..=i].join("."), format!("index out of range (length {len})")))?;
                if is_last {
                    *slot = parsed;
                    return Ok(());
                }
                node = slot;
            }
            _ => return Err(Diagnostic::new(keys[..i].join("."), "cannot descend into a scalar")),
        }
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn alphabet(&self) -> Result<Alphabet, Diagnostic> {
        Alphabet::new(self.rank).map_err(|e| Diagnostic::new("rank", e.to_string()))
    }

    fn letter_table(&self, path: &str, table: &BTreeMap<String, f64>, what: &str) -> Result<Vec<f64>, Vec<Diagnostic>> {
        let alphabet = self.alphabet().map_err(|d| vec![d])?;
        let mut values = vec![f64::NAN; alphabet.size()];
        let mut diags = Vec::new();
        for (key, &v) in table {
            let mut chars = key.chars();
            match (chars.next().and_then(|c| alphabet.parse_letter(c)), chars.next()) {
                (Some(l), None) => values[l as usize] = v,
                _ => diags.push(Diagnostic::new(format!("{path}.{key}"), format!("`{key}` is not a letter of the rank-{} alphabet", self.rank))),
            }
        }
        for l in alphabet.letters() {
            if values[l as usize].is_nan() {
                diags.push(Diagnostic::new(path, format!("missing {what} for letter `{}`", Alphabet::letter_name(l))));
            }
        }
        if diags.is_empty() {
            Ok(values)
        } else {
            Err(diags)
        }
    }

    pub fn walk(&self, name: &str, path: &str) -> Result<WalkSpec, Vec<Diagnostic>> {
        let spec = self
            .walks
            .get(name)
            .ok_or_else(|| vec![Diagnostic::new(path, format!("unknown walk `{name}`"))])?;
        let wpath = format!("walks.{name}.steps");
        let values = self.letter_table(&wpath, &spec.steps, "step probability")?;
        WalkSpec::new(self.alphabet().map_err(|d| vec![d])?, values).map_err(|e| vec![Diagnostic::new(wpath, e.to_string())])
    }

    /// Resolves a named potential. Walk-defined potentials are solved here.
    pub fn potential(&self, name: &str, path: &str) -> Result<WeightedPotential, Vec<Diagnostic>> {
        let alphabet = self.alphabet().map_err(|d| vec![d])?;
        let Some(spec) = self.potentials.get(name) else {
            if name == WORD_POTENTIAL {
                return Ok(WeightedPotential::unit(alphabet));
            }
            return Err(vec![Diagnostic::new(path, format!("unknown potential `{name}`"))]);
        };
        let ppath = format!("potentials.{name}");
        match (&spec.weights, &spec.walk) {
            (Some(table), None) => {
                let wpath = format!("{ppath}.weights");
                let values = self.letter_table(&wpath, table, "weight")?;
                for (l, &w) in values.iter().enumerate() {
                    if !(w > 0.0 && w.is_finite()) {
                        let name = Alphabet::letter_name(l as u8);
                        return Err(vec![Diagnostic::new(
                            format!("{wpath}.{name}"),
                            format!("NonPositiveWeight: weight {w} of `{name}` must be positive"),
                        )]);
                    }
                }
                WeightedPotential::new(alphabet, values).map_err(|e| vec![Diagnostic::new(wpath, e.to_string())])
            }
            (None, Some(walk)) => {
                let w = self.walk(walk, &format!("{ppath}.walk"))?;
                let fp = solve_first_passage(&w, 1e-13).map_err(|e| vec![Diagnostic::new(format!("{ppath}.walk"), e.to_string())])?;
                green_potential(&fp).map_err(|e| vec![Diagnostic::new(format!("{ppath}.walk"), e.to_string())])
            }
            _ => Err(vec![Diagnostic::new(ppath, "give exactly one of `weights` or `walk`")]),
        }
    }

    pub fn word(&self, s: &str, path: &str) -> Result<ReducedWord, Diagnostic> {
        let alphabet = self.alphabet()?;
        alphabet.parse_word(s).map_err(|e| Diagnostic::new(path, e.to_string()))
    }

    /// Schema and range checks for every section; no computation beyond
    /// resolving walk-defined potentials.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        if let Err(e) = self.alphabet() {
            return vec![e];
        }
        for name in self.potentials.keys() {
            if let Err(e) = self.potential(name, &format!("potentials.{name}")) {
                d.extend(e);
            }
        }
        for name in self.walks.keys() {
            if let Err(e) = self.walk(name, &format!("walks.{name}")) {
                d.extend(e);
            }
        }
        let pot = |name: &str, path: &str, d: &mut Vec<Diagnostic>| {
            if name != WORD_POTENTIAL && !self.potentials.contains_key(name) {
                d.push(Diagnostic::new(path, format!("unknown potential `{name}`")));
            }
        };
        let positive = |v: f64, path: &str, d: &mut Vec<Diagnostic>| {
            if !(v > 0.0 && v.is_finite()) {
                d.push(Diagnostic::new(path, format!("must be positive, got {v}")));
            }
        };
        let words = |ws: &[String], path: &str, d: &mut Vec<Diagnostic>| {
            for (i, w) in ws.iter().enumerate() {
                if let Err(e) = self.word(w, &format!("{path}[{i}]")) {
                    d.push(e);
                }
            }
        };

        let e = &self.exponent;
        pot(&e.potential, "exponent.potential", &mut d);
        positive(e.fit_radius, "exponent.fit_radius", &mut d);
        positive(e.tol, "exponent.tol", &mut d);
        for (i, r) in e.radii.iter().enumerate() {
            if !(*r >= 0.0 && r.is_finite()) {
                d.push(Diagnostic::new(format!("exponent.radii[{i}]"), format!("must be nonnegative, got {r}")));
            }
        }

        let p = &self.psmeasure;
        pot(&p.potential, "psmeasure.potential", &mut d);
        if p.depth == 0 {
            d.push(Diagnostic::new("psmeasure.depth", "must be at least 1"));
        }
        for (i, s) in p.s_offsets.iter().enumerate() {
            positive(*s, &format!("psmeasure.s_offsets[{i}]"), &mut d);
        }
        if let Some(r) = p.radius {
            positive(r, "psmeasure.radius", &mut d);
        }
        positive(p.max_radius, "psmeasure.max_radius", &mut d);
        positive(p.rel_tail, "psmeasure.rel_tail", &mut d);

        let s = &self.shadowlemma;
        pot(&s.potential, "shadowlemma.potential", &mut d);
        if s.m == 0 {
            d.push(Diagnostic::new("shadowlemma.m", "must be at least 1 (ε = 2^-m < 1)"));
        }
        positive(s.radius, "shadowlemma.radius", &mut d);
        if let Err(e) = self.word(&s.ray, "shadowlemma.ray") {
            d.push(e);
        }
        if let Some(r) = s.nesting_radius {
            positive(r, "shadowlemma.nesting_radius", &mut d);
        }

        let g = &self.gpscheck;
        for (i, name) in g.potentials.iter().enumerate() {
            pot(name, &format!("gpscheck.potentials[{i}]"), &mut d);
        }
        words(&g.bms_elements, "gpscheck.bms_elements", &mut d);
        positive(g.duality_radius, "gpscheck.duality_radius", &mut d);

        let gr = &self.green;
        if let Some(w) = &gr.walk {
            if !self.walks.contains_key(w) {
                d.push(Diagnostic::new("green.walk", format!("unknown walk `{w}`")));
            }
        }
        positive(gr.tol, "green.tol", &mut d);
        if gr.paths == 0 {
            d.push(Diagnostic::new("green.paths", "must be at least 1"));
        }
        if gr.pair_paths == 0 {
            d.push(Diagnostic::new("green.pair_paths", "must be at least 1"));
        }
        words(&gr.cylinders, "green.cylinders", &mut d);

        for (section, pairs) in [("rigidity", &self.rigidity.pairs), ("convexity", &self.convexity.pairs)] {
            for (i, [a, b]) in pairs.iter().enumerate() {
                pot(a, &format!("{section}.pairs[{i}][0]"), &mut d);
                pot(b, &format!("{section}.pairs[{i}][1]"), &mut d);
            }
        }
        positive(self.rigidity.radius, "rigidity.radius", &mut d);
        positive(self.convexity.radius, "convexity.radius", &mut d);
        for (i, l) in self.convexity.lambdas.iter().enumerate() {
            if !(*l > 0.0 && *l < 1.0) {
                d.push(Diagnostic::new(format!("convexity.lambdas[{i}]"), format!("λ = {l} outside (0, 1)")));
            }
        }

        pot(&self.gap.potential, "gap.potential", &mut d);
        if self.gap.sub_rank < 2 || self.gap.sub_rank >= self.rank {
            d.push(Diagnostic::new(
                "gap.sub_rank",
                format!("free factor rank {} must be in 2..{} (strictly below the rank)", self.gap.sub_rank, self.rank),
            ));
        }

        let c = &self.conical;
        pot(&c.potential, "conical.potential", &mut d);
        if c.m == 0 {
            d.push(Diagnostic::new("conical.m", "must be at least 1"));
        }
        for (i, n) in c.depths.iter().enumerate() {
            if !(*n >= 0.0 && n.is_finite()) {
                d.push(Diagnostic::new(format!("conical.depths[{i}]"), format!("must be nonnegative, got {n}")));
            }
        }
        if let Some(w) = c.window {
            positive(w, "conical.window", &mut d);
        }
        if let Some(k) = c.sub_rank {
            if k < 2 || k >= self.rank {
                d.push(Diagnostic::new("conical.sub_rank", format!("free factor rank {k} must be in 2..{}", self.rank)));
            }
        }

        pot(&self.bms.potential, "bms.potential", &mut d);
        words(&self.bms.elements, "bms.elements", &mut d);
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "rank": 2,
        "potentials": {
            "heavy": {"weights": {"a": 1, "A": 1, "b": 2, "B": 2}},
            "green": {"walk": "iso"}
        },
        "walks": {"iso": {"steps": {"a": 0.25, "A": 0.25, "b": 0.25, "B": 0.25}}}
    }"#;

    #[test]
    fn valid_config() {
        let c = load(BASE, &[]).unwrap();
        assert!(c.diagnostics_for(None).is_empty(), "{:?}", c.diagnostics_for(None));
        assert_eq!(c.diagnostics_for(Some("gap"))[0].path, "gap.sub_rank");
        let g = c.config.potential("green", "").unwrap();
        assert!((g.weight(0) - 3f64.ln()).abs() < 1e-10);
        assert_eq!(c.config.potential("word", "").unwrap(), WeightedPotential::unit(Alphabet::new(2).unwrap()));
        assert_eq!(c.config.exponent.fit_radius, 12.0);
        assert_eq!(c.config.convexity.lambdas.len(), 9);
    }

    #[test]
    fn missing_letter_is_named() {
        let text = BASE.replace(r#", "B": 2}"#, "}");
        let c = load(&text, &[]).unwrap();
        let d = c.config.validate();
        assert!(d.iter().any(|d| d.message.contains("letter `B`") && d.path == "potentials.heavy.weights"), "{d:?}");
    }

    #[test]
    fn negative_weight_has_path() {
        let c = load(BASE, &["potentials.heavy.weights.a=-1".into()]).unwrap();
        let d = c.diagnostics_for(None);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].path, "potentials.heavy.weights.a");
        assert!(d[0].message.contains("NonPositiveWeight"));
    }

    #[test]
    fn lambda_range() {
        let c = load(BASE, &["convexity.lambdas=[0.5, 1.2]".into()]).unwrap();
        let d = c.config.validate();
        assert_eq!(d[0].path, "convexity.lambdas[1]");
    }

    #[test]
    fn syntax_and_type_errors_locate() {
        let e = load("{\n \"rank\": 2,\n}", &[]).unwrap_err();
        assert!(e[0].message.contains("line 3"), "{e:?}");
        let e = load("{\"rank\": 2, \"exponent\": {\"fit_radius\": \"x\"}}", &[]).unwrap_err();
        assert_eq!(e[0].path, "exponent.fit_radius");
        let e = load("{\"rank\": 2, \"typo\": 1}", &[]).unwrap_err();
        assert!(e[0].message.contains("typo"));
    }

    #[test]
    fn overrides() {
        let c = load(BASE, &["exponent.fit_radius=8".into(), "seed=7".into(), "exponent.potential=heavy".into()]).unwrap();
        assert_eq!(c.config.exponent.fit_radius, 8.0);
        assert_eq!(c.config.seed, Some(7));
        assert_eq!(c.config.exponent.potential, "heavy");
        assert!(load(BASE, &["rank".into()]).is_err());
        let lambdas = r#"{"rank": 2, "convexity": {"lambdas": [0.1, 0.2]}}"#;
        let c = load(lambdas, &["convexity.lambdas[1]=0.5".into()]).unwrap();
        assert_eq!(c.config.convexity.lambdas, vec![0.1, 0.5]);
        let c = load(lambdas, &["convexity.lambdas.0=0.3".into()]).unwrap();
        assert_eq!(c.config.convexity.lambdas, vec![0.3, 0.2]);
    }
}
