//! Reproducible experiment suites. A suite reads an [`ExperimentConfig`],
//! fills in defaults, and produces a [`RunRecord`] whose bytes depend only
//! on the resolved configuration.

mod suites;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};
use sha2::{Digest, Sha256};

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::format::Value;
use crate::generators::SourceSpec;
use crate::measure::BernoulliMeasure;
use crate::rng::PRNG_ALGORITHM;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    #[serde(rename = "agafonov-dfa")]
    SelectionDfa,
    #[serde(rename = "agafonov-pfa")]
    SelectionPfa,
    #[serde(rename = "schnorr-stimm")]
    GamblerRates,
    Dichotomy,
    Derand,
    BlockNormality,
    Balancedness,
    Ergodic,
    Join,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::SelectionDfa,
        Suite::SelectionPfa,
        Suite::GamblerRates,
        Suite::Dichotomy,
        Suite::Derand,
        Suite::BlockNormality,
        Suite::Balancedness,
        Suite::Ergodic,
        Suite::Join,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::SelectionDfa => "agafonov-dfa",
            Suite::SelectionPfa => "agafonov-pfa",
            Suite::GamblerRates => "schnorr-stimm",
            Suite::Dichotomy => "dichotomy",
            Suite::Derand => "derand",
            Suite::BlockNormality => "block-normality",
            Suite::Balancedness => "balancedness",
            Suite::Ergodic => "ergodic",
            Suite::Join => "join",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown suite {s:?}")))
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Experiment parameters. Unset fields take suite defaults in [`ExperimentConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Suite,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Word-length cap (`m` for balancedness).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Relative tolerance on rates (schnorr-stimm, dichotomy).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_tolerance: Option<f64>,
    /// Smallest selected length for a selection to be judged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_selected: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measures: Option<Vec<Vec<Value>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub battery: Option<Vec<String>>,
    /// Automaton files used instead of the battery.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub automata: Option<Vec<PathBuf>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<SourceSpec>>,
    /// NSEQ1 input file used instead of generated sources.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chunk_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chunks: Option<u64>,
    /// Trajectory sampling stride.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<u64>,
}

fn v(s: &str) -> Value {
    Value(s.to_string())
}

fn default_measures() -> Vec<Vec<Value>> {
    vec![vec![v("1/2"), v("1/2")], vec![v("1/4"), v("3/4")]]
}

impl ExperimentConfig {
    pub fn new(suite: Suite) -> Self {
        ExperimentConfig {
            suite,
            seed: 0,
            n: None,
            trials: None,
            max_len: None,
            tolerance: None,
            rate_tolerance: None,
            min_selected: None,
            measures: None,
            battery: None,
            automata: None,
            sources: None,
            input: None,
            chunk_len: None,
            chunks: None,
            stride: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Fills every parameter the suite reads with its default.
    pub fn resolve(&self) -> ExperimentConfig {
        let mut c = self.clone();
        let battery = |names: &[&str]| Some(names.iter().map(|s| s.to_string()).collect());
        macro_rules! default {
            ($field:ident, $value:expr) => {
                if c.$field.is_none() {
                    c.$field = Some($value);
                }
            };
        }
        match c.suite {
            Suite::SelectionDfa | Suite::SelectionPfa => {
                let pfa = c.suite == Suite::SelectionPfa;
                default!(n, 10_000_000);
                default!(trials, if pfa { 100 } else { 10 });
                default!(max_len, 3);
                default!(tolerance, 0.02);
                default!(min_selected, 100_000);
                default!(measures, default_measures());
                if c.automata.is_none() {
                    default!(battery, battery(&[if pfa { "pfas" } else { "selectors" }]).unwrap());
                }
            }
            Suite::GamblerRates => {
                default!(n, 10_000_000);
                default!(trials, 100);
                default!(rate_tolerance, 0.15);
                if c.automata.is_none() {
                    default!(battery, battery(&["gamblers"]).unwrap());
                }
                let n = c.n.unwrap();
                default!(stride, (n / 10_000).max(1));
            }
            Suite::Dichotomy => {
                default!(n, 1_000_000);
                default!(max_len, 4);
                default!(tolerance, 0.02);
                default!(rate_tolerance, 0.25);
                default!(measures, vec![vec![v("1/2"), v("1/2")]]);
                default!(
                    sources,
                    vec![
                        SourceSpec::CorrelatedBinary { stay: 2.0 / 3.0 },
                        SourceSpec::ThueMorse,
                        SourceSpec::Periodic { word: "01".into(), alphabet_size: None },
                        SourceSpec::Periodic { word: "0".into(), alphabet_size: Some(2) },
                        SourceSpec::Iid { measure: vec![0.5, 0.5] },
                    ]
                );
                let n = c.n.unwrap();
                default!(stride, (n / 10_000).max(1));
            }
            Suite::Derand => {
                default!(max_len, 8);
                if c.automata.is_none() {
                    default!(battery, battery(&["pfas"]).unwrap());
                }
            }
            Suite::BlockNormality => {
                default!(n, 1_000_000);
                default!(max_len, 3);
                default!(tolerance, 0.02);
                default!(measures, default_measures());
            }
            Suite::Balancedness => {
                default!(chunk_len, 10_000);
                default!(chunks, 100);
                default!(trials, 100);
                default!(max_len, 1);
                default!(tolerance, 0.05);
                default!(measures, vec![vec![v("1/2"), v("1/2")]]);
                if c.automata.is_none() {
                    default!(battery, battery(&["pfas"]).unwrap());
                }
            }
            Suite::Ergodic => {
                default!(n, 10_000_000);
                default!(tolerance, 0.01);
                default!(measures, default_measures());
                if c.automata.is_none() {
                    default!(battery, battery(&["selectors", "gamblers"]).unwrap());
                }
            }
            Suite::Join => {
                default!(n, 1_000_000);
                default!(max_len, 2);
                default!(tolerance, 0.02);
            }
        }
        c
    }

    /// SHA-256 of the resolved configuration's JSON.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&self.resolve()).expect("config serializes");
        Sha256::digest(text.as_bytes())
            .iter()
            .fold(String::new(), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }

    pub(crate) fn parsed_measures(&self) -> Result<Vec<BernoulliMeasure>> {
        self.measures
            .clone()
            .unwrap_or_default()
            .iter()
            .map(|m| {
                let w = m.iter().map(|x| x.get::<f64>()).collect::<Result<Vec<_>>>()?;
                BernoulliMeasure::new(Alphabet::digits(w.len())?, w)
            })
            .collect()
    }
}

/// Output of one suite run: one row per trial or item, plus a summary.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub suite: Suite,
    pub config_hash: String,
    pub version: String,
    pub prng: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub pass: bool,
    pub summary: Map<String, Json>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Json>>,
}

/// JSON number, or a string for non-finite values.
pub fn num(x: f64) -> Json {
    if x.is_finite() {
        Json::from(x)
    } else if x.is_nan() {
        Json::from("nan")
    } else if x > 0.0 {
        Json::from("inf")
    } else {
        Json::from("-inf")
    }
}

fn csv_cell(v: &Json) -> String {
    let s = match v {
        Json::String(s) => s.clone(),
        Json::Null => String::new(),
        other => other.to_string(),
    };
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

impl RunRecord {
    pub fn column(&self, name: &str) -> Option<Vec<&Json>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes") + "\n"
    }

    /// Rows as CSV, preceded by `#` lines naming the suite, config hash, seed and version.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# suite={} config_hash={} seed={} version={} prng={}", self.suite, self.config_hash, self.seed, self.version, self.prng);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(csv_cell).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

pub(crate) struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Json>>,
    pub summary: Map<String, Json>,
    pub pass: bool,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            summary: Map::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, row: Vec<Json>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Json>) {
        self.summary.insert(key.to_string(), value.into());
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunRecord> {
    let resolved = config.resolve();
    let table = suites::run(&resolved)?;
    Ok(RunRecord {
        suite: resolved.suite,
        config_hash: config.hash(),
        version: VERSION.to_string(),
        prng: PRNG_ALGORITHM.to_string(),
        seed: resolved.seed,
        config: resolved,
        pass: table.pass,
        summary: table.summary,
        columns: table.columns,
        rows: table.rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn hash_depends_on_resolved_config() {
        let a = ExperimentConfig::new(Suite::Derand);
        let mut b = a.clone();
        b.max_len = Some(8);
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn config_parsing() {
        let c = ExperimentConfig::parse(r#"{"suite": "block-normality", "n": 5000, "measures": [["1/3", "2/3"]]}"#).unwrap();
        assert_eq!(c.n, Some(5000));
        assert_eq!(c.resolve().parsed_measures().unwrap()[0].weights()[0], 1.0 / 3.0);
        assert!(ExperimentConfig::parse(r#"{"suite": "block-normality", "bogus": 1}"#).is_err());
        assert!(ExperimentConfig::parse(r#"{"suite": "unknown"}"#).is_err());
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_cell(&Json::from("a,b")), "\"a,b\"");
        assert_eq!(csv_cell(&num(f64::NEG_INFINITY)), "-inf");
        assert_eq!(csv_cell(&Json::from(0.5)), "0.5");
    }
}
