use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;
use serde_json::{json, Value as Json};

use fsnormal::adversary::{attack, AttackOptions, ClusterRule, DEFAULT_MAX_LEN, DEFAULT_TOLERANCE};
use fsnormal::alphabet::words_of_length;
use fsnormal::analysis::{build_pfa_chain, classify_sampled, stationary, DichotomyThresholds};
use fsnormal::experiment::{num, run_experiment, ExperimentConfig, Suite};
use fsnormal::format::{read_automaton, Automaton};
use fsnormal::generators::SourceSpec;
use fsnormal::nseq::SequenceFile;
use fsnormal::probabilistic::{
    capital_distribution, exact_select_distribution, lift_gambler, lift_selector, lifted_capital_distribution,
    lifted_select_distribution, ExactLimits, DEFAULT_TABLE_LIMIT,
};
use fsnormal::stats::{stream_profile_with, OccurrenceCounter, ProfileOptions};
use fsnormal::{Alphabet, BernoulliMeasure, RandomSource, Rational, Weight};

use crate::input::{measure_for, output, parse_weights, InputArgs, SourceArgs};
use crate::Format;

const VERSION: &str = env!("CARGO_PKG_VERSION");
const EXACT_CAPITAL_MAX: u64 = 100_000;

fn write_json(out: Option<&PathBuf>, value: &Json) -> Result<()> {
    let mut w = output(out.map(|p| p.as_path()))?;
    writeln!(w, "{}", serde_json::to_string_pretty(value)?)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    n: u64,
    /// IID law, e.g. 0.5,0.5 or 1/4,3/4.
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

pub fn gen(a: GenArgs) -> Result<()> {
    let spec = a.source.spec(a.measure.as_deref())?.context("--source is required")?;
    let mut s = spec.build(RandomSource::new(a.source.seed()))?;
    let k = s.alphabet().size();
    let n = usize::try_from(a.n).context("--n too large")?;
    let word = s.take_word(n);
    let file = SequenceFile::from_word(k, word.letters())?;
    let mut w = output(Some(&a.out))?;
    file.write_to(&mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Reference measure (and IID law for generated input).
    #[arg(long)]
    measure: Option<String>,
    /// Longest word counted.
    #[arg(long)]
    max_len: Option<usize>,
    /// Word table destination (stdout by default).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Checkpoint CSV (n, word, freq) for words up to length 2.
    #[arg(long)]
    checkpoints: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

pub fn analyze(a: AnalyzeArgs) -> Result<()> {
    let mut opened = a.input.open(a.measure.as_deref(), None)?;
    let alphabet = opened.stream.alphabet().clone();
    let mu = measure_for(&alphabet, a.measure.as_deref())?;
    let max_len = a.max_len.unwrap_or_else(|| OccurrenceCounter::default_max_len(alphabet.size()).min(4));
    let opts = ProfileOptions::default();
    let report = stream_profile_with(&mut opened.stream, opened.n, max_len, &opts)?;
    let rows = report.rows(&mu)?;
    let mut w = output(a.out.as_deref())?;
    match a.format {
        Format::Csv => {
            writeln!(w, "word,length,count,freq,mu_w,deviation,freq_min,freq_max")?;
            for r in &rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    alphabet.render(r.word.letters()),
                    r.length,
                    r.count,
                    r.freq,
                    r.mu_w,
                    r.deviation,
                    r.freq_min,
                    r.freq_max
                )?;
            }
        }
        Format::Json => {
            let rows: Vec<Json> = rows
                .iter()
                .map(|r| {
                    json!({
                        "word": alphabet.render(r.word.letters()),
                        "length": r.length,
                        "count": r.count,
                        "freq": r.freq,
                        "mu_w": r.mu_w,
                        "deviation": r.deviation,
                        "freq_min": r.freq_min,
                        "freq_max": r.freq_max,
                    })
                })
                .collect();
            let record = json!({ "n": report.n(), "max_len": max_len, "seed": a.input.source.seed(), "version": VERSION, "words": rows });
            writeln!(w, "{}", serde_json::to_string_pretty(&record)?)?;
        }
    }
    w.flush()?;
    if let Some(path) = &a.checkpoints {
        let mut c = output(Some(path))?;
        writeln!(c, "n,word,freq")?;
        for (n, tables) in report.snapshots() {
            for (i, table) in tables.iter().enumerate() {
                for (code, f) in table.iter().enumerate() {
                    let word = fsnormal::Word::from_code(code as u64, i + 1, alphabet.size());
                    writeln!(c, "{n},{},{f}", alphabet.render(word.letters()))?;
                }
            }
        }
        c.flush()?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Selector or probabilistic selector JSON file.
    #[arg(long)]
    automaton: PathBuf,
    /// IID law for generated input.
    #[arg(long)]
    measure: Option<String>,
    /// NSEQ1 file receiving the selected subsequence.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn select(a: SelectArgs) -> Result<()> {
    let automaton: Automaton = read_automaton(&a.automaton, None)?;
    let sel = automaton.prob_selector()?;
    let alphabet = automaton.alphabet().clone();
    let mut opened = a.input.open(a.measure.as_deref(), Some(&alphabet))?;
    check_alphabet(&alphabet, opened.stream.alphabet())?;
    let mut rng = RandomSource::new(a.input.source.seed()).derive(1);
    let mut picked = Vec::new();
    sel.run(&mut opened.stream, opened.n, &mut rng, |s| picked.push(s));
    let mut summary = json!({
        "n": opened.n,
        "selected": picked.len(),
        "rate": if opened.n > 0 { picked.len() as f64 / opened.n as f64 } else { 0.0 },
        "seed": a.input.source.seed(),
        "version": VERSION,
    });
    match &a.out {
        Some(path) => {
            let mut w = output(Some(path))?;
            SequenceFile::from_word(alphabet.size(), &picked)?.write_to(&mut w)?;
            w.flush()?;
        }
        None => summary["output"] = json!(alphabet.render(&picked)),
    }
    write_json(None, &summary)
}

fn check_alphabet(automaton: &Alphabet, input: &Alphabet) -> Result<()> {
    if automaton.size() != input.size() {
        bail!(fsnormal::Error::AlphabetMismatch { expected: automaton.size(), got: input.size() });
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct GambleArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Gambler or probabilistic gambler JSON file.
    #[arg(long)]
    automaton: PathBuf,
    /// Measure replacing the one in the file (also the IID law for generated input).
    #[arg(long)]
    measure: Option<String>,
    /// Keep every stride-th trajectory point (default n/10^4).
    #[arg(long)]
    stride: Option<u64>,
    /// Trajectory CSV (n, log_capital).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn gamble(a: GambleArgs) -> Result<()> {
    let alphabet = alphabet_of(&a.automaton)?;
    let mu = match &a.measure {
        Some(m) => Some(BernoulliMeasure::<f64>::parse(alphabet.clone(), m)?),
        None => None,
    };
    let automaton: Automaton = read_automaton(&a.automaton, mu.as_ref())?;
    let g = automaton.prob_gambler()?;
    let source_law = a.measure.clone().or_else(|| {
        Some(g.measure().weights().iter().map(|w| w.to_string()).collect::<Vec<_>>().join(","))
    });
    let mut opened = a.input.open(source_law.as_deref(), Some(&alphabet))?;
    check_alphabet(&alphabet, opened.stream.alphabet())?;
    let n = opened.n;
    let stride = a.stride.unwrap_or((n / 10_000).max(1));
    let mut rng = RandomSource::new(a.input.source.seed()).derive(1);
    let series = g.run(&mut opened.stream, n, &mut rng, stride);
    let finite = a.input.input.is_some() || a.input.text.is_some();
    let exact = match &automaton {
        Automaton::Gambler(_) if finite && n <= EXACT_CAPITAL_MAX => {
            let mu_exact = match &a.measure {
                Some(m) => Some(BernoulliMeasure::<Rational>::parse(alphabet.clone(), m)?),
                None => None,
            };
            let Automaton::Gambler(ge) = read_automaton::<Rational>(&a.automaton, mu_exact.as_ref())? else {
                unreachable!()
            };
            let mut again = a.input.open(source_law.as_deref(), Some(&alphabet))?;
            let word = again.stream.take_word(n as usize);
            Some(ge.capital(word.letters()).to_string())
        }
        _ => None,
    };
    let verdict = (n >= DichotomyThresholds::default().min_len).then(|| classify_sampled(&series.samples, DichotomyThresholds::default()));
    let summary = json!({
        "n": n,
        "final_log_capital": num(series.summary.final_log_capital),
        "capital": num(series.summary.final_log_capital.exp()),
        "capital_exact": exact,
        "max_log_capital": num(series.summary.max_log_capital),
        "verdict": verdict.as_ref().map(|v| v.tag.as_str()),
        "rate": verdict.as_ref().map(|v| num(v.rate)),
        "seed": a.input.source.seed(),
        "version": VERSION,
    });
    if let Some(path) = &a.out {
        let mut w = output(Some(path))?;
        writeln!(w, "n,log_capital")?;
        writeln!(w, "0,0")?;
        for (m, v) in &series.samples {
            writeln!(w, "{m},{v}")?;
        }
        w.flush()?;
    }
    write_json(None, &summary)
}

fn alphabet_of(path: &std::path::Path) -> Result<Alphabet> {
    let text = std::fs::read_to_string(path)?;
    let v: Json = serde_json::from_str(&text)?;
    if let Some(labels) = v.get("alphabet").and_then(|l| l.as_array()) {
        let labels: Vec<String> = labels.iter().filter_map(|l| l.as_str().map(String::from)).collect();
        return Ok(Alphabet::new(labels)?);
    }
    let k = v.get("alphabet_size").and_then(|k| k.as_u64()).context("missing alphabet")?;
    Ok(Alphabet::digits(k as usize)?)
}

/// Adversary settings read from `--config`; flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AdversaryConfig {
    source: Option<SourceSpec>,
    measure: Option<Vec<f64>>,
    n: Option<u64>,
    seed: Option<u64>,
    tolerance: Option<f64>,
    max_len: Option<usize>,
    stride: Option<u64>,
    nu_floor: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AdversaryArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target measure mu (uniform by default).
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    n: Option<u64>,
    /// Frequency tolerance at 10^6 symbols.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    stride: Option<u64>,
    /// Cluster point: the most divergent tail checkpoint, or the last one.
    #[arg(long, default_value = "max-kl")]
    cluster: String,
    /// JSON record destination (stdout by default).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trajectory CSV (n, log_capital).
    #[arg(long)]
    trajectory: Option<PathBuf>,
}

pub fn adversary(a: AdversaryArgs) -> Result<()> {
    let cfg: AdversaryConfig = match &a.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?).context("bad adversary config")?,
        None => AdversaryConfig::default(),
    };
    let spec = match a.source.spec(a.measure.as_deref())? {
        Some(s) => s,
        None => cfg.source.clone().context("give --source or a config with a source")?,
    };
    let seed = a.source.seed.or(cfg.seed).unwrap_or(0);
    let alphabet = spec.alphabet()?;
    let mu = match (&a.measure, &cfg.measure) {
        (Some(m), _) if a.source.source.as_deref() != Some("iid") => measure_for(&alphabet, Some(m))?,
        (_, Some(w)) => BernoulliMeasure::new(alphabet.clone(), w.clone())?,
        _ => BernoulliMeasure::uniform(alphabet.clone()),
    };
    let rule = match a.cluster.as_str() {
        "max-kl" => ClusterRule::MaxKl,
        "last" => ClusterRule::Last,
        other => bail!(fsnormal::Error::Invalid(format!("unknown cluster rule {other:?}"))),
    };
    let opts = AttackOptions {
        n: a.n.or(cfg.n).unwrap_or(AttackOptions::default().n),
        tolerance: a.tolerance.or(cfg.tolerance).unwrap_or(DEFAULT_TOLERANCE),
        max_len: a.max_len.or(cfg.max_len).unwrap_or(DEFAULT_MAX_LEN),
        rule,
        nu_floor: cfg.nu_floor,
        stride: a.stride.or(cfg.stride).unwrap_or(AttackOptions::default().stride),
    };
    let report = attack(|| spec.build(RandomSource::new(seed)), &mu, opts.clone())?;
    let render = |w: &[u32]| alphabet.render(w);
    let mut record = json!({
        "source": spec,
        "measure": mu.weights(),
        "n": opts.n,
        "tolerance": opts.tolerance,
        "max_len": opts.max_len,
        "seed": seed,
        "version": VERSION,
    });
    match &report {
        Some(r) => {
            record["witness"] = json!({
                "word": render(r.witness.word.letters()),
                "context": render(r.witness.context.letters()),
                "letter": alphabet.label(r.witness.letter),
                "freq": r.witness.freq,
                "target": r.witness.target,
                "tolerance": r.witness.tolerance,
            });
            record["nu"] = json!(r.cluster.nu);
            record["cluster_checkpoint"] = json!(r.cluster.checkpoint_n);
            record["kl"] = num(r.cluster.kl);
            record["context_probability"] = num(r.context_probability);
            record["predicted_rate"] = num(r.predicted_rate);
            record["measured_rate"] = num(r.measured_rate);
            record["final_log_capital"] = num(r.final_log_capital);
            record["verdict"] = json!(r.verdict.tag.as_str());
        }
        None => record["witness"] = Json::Null,
    }
    if let (Some(path), Some(r)) = (&a.trajectory, &report) {
        let mut w = output(Some(path))?;
        writeln!(w, "n,log_capital")?;
        for (m, v) in &r.trajectory {
            writeln!(w, "{m},{v}")?;
        }
        w.flush()?;
    }
    write_json(a.out.as_ref(), &record)
}

#[derive(Debug, Args)]
pub struct AnalyzeAutomatonArgs {
    #[arg(long)]
    automaton: PathBuf,
    /// Input measure (the file's measure, else uniform).
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn analyze_automaton(a: AnalyzeAutomatonArgs) -> Result<()> {
    let alphabet = alphabet_of(&a.automaton)?;
    let over = match &a.measure {
        Some(m) => Some(BernoulliMeasure::<f64>::parse(alphabet.clone(), m)?),
        None => None,
    };
    let automaton: Automaton = read_automaton(&a.automaton, over.as_ref())?;
    let mu = match (&over, &automaton) {
        (Some(m), _) => m.clone(),
        (None, Automaton::Gambler(g)) => g.measure().clone(),
        (None, Automaton::PfaGambler(g)) => g.measure().clone(),
        (None, _) => BernoulliMeasure::uniform(alphabet.clone()),
    };
    let pfa = automaton.pfa();
    let chain = build_pfa_chain(&pfa, &mu)?;
    let info = stationary(&chain);
    let mut record = json!({
        "kind": automaton.kind(),
        "states": pfa.states(),
        "measure": mu.weights(),
        "matrix": chain.matrix,
        "bsccs": chain.bsccs,
        "transient": chain.transient,
        "pi": info.pi,
        "per_bscc": info.per_bscc,
        "absorption": info.absorption,
        "input_dependent": info.input_dependent,
    });
    let alphas: Option<Vec<f64>> = match &automaton {
        Automaton::Gambler(_) | Automaton::PfaGambler(_) => {
            let g = automaton.prob_gambler()?;
            Some(
                (0..pfa.states())
                    .map(|q| {
                        (0..alphabet.size() as u32)
                            .map(|x| {
                                let p = g.measure().prob(x);
                                if *p == 0.0 { 0.0 } else { p * g.log_bet(q, x) }
                            })
                            .sum()
                    })
                    .collect(),
            )
        }
        _ => None,
    };
    if let Some(alphas) = alphas {
        let exponent: f64 = alphas
            .iter()
            .zip(&info.pi)
            .filter(|(_, &p)| p > 0.0)
            .map(|(al, p)| al * p)
            .sum();
        record["alpha"] = json!(alphas.iter().map(|&x| num(x)).collect::<Vec<_>>());
        record["exponent"] = num(exponent);
    }
    write_json(a.out.as_ref(), &record)
}

#[derive(Debug, Args)]
pub struct DerandArgs {
    /// Probabilistic selector or gambler JSON file.
    #[arg(long)]
    automaton: PathBuf,
    /// Input word; without it every word up to --max-len is checked.
    #[arg(long)]
    text: Option<String>,
    #[arg(long, default_value_t = 4)]
    max_len: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn exact_tv<K: Ord + Clone>(p: &BTreeMap<K, Rational>, q: &BTreeMap<K, Rational>) -> Rational {
    let zero = Rational::from_u64(0);
    let mut keys: Vec<&K> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    let sum = keys.into_iter().fold(zero.clone(), |acc, k| {
        let x = p.get(k).unwrap_or(&zero);
        let y = q.get(k).unwrap_or(&zero);
        acc + if x > y { x - y } else { y - x }
    });
    sum / Rational::from_u64(2)
}

fn law<K, F: Fn(&K) -> String>(d: &BTreeMap<K, Rational>, key: F) -> Json {
    Json::Object(d.iter().map(|(k, p)| (key(k), json!(p.to_string()))).collect())
}

pub fn derand_check(a: DerandArgs) -> Result<()> {
    let automaton: Automaton<Rational> = read_automaton(&a.automaton, None)?;
    let alphabet = automaton.alphabet().clone();
    let limits = ExactLimits { max_word_len: a.max_len.max(ExactLimits::default().max_word_len), ..ExactLimits::default() };
    let words: Vec<fsnormal::Word> = match &a.text {
        Some(t) => vec![alphabet.parse_word(t)?],
        None => (0..=a.max_len).flat_map(|l| words_of_length(alphabet.size(), l)).collect(),
    };
    let mut rows = Vec::new();
    match &automaton {
        Automaton::Selector(_) | Automaton::PfaSelector(_) => {
            let sel = automaton.prob_selector()?;
            let lifted = lift_selector(&sel, DEFAULT_TABLE_LIMIT)?;
            for w in &words {
                let direct = exact_select_distribution(&sel, w.letters(), limits)?;
                let via = lifted_select_distribution(&lifted, w.letters(), limits)?;
                let tv = exact_tv(&direct, &via);
                let r = |k: &fsnormal::Word| alphabet.render(k.letters());
                rows.push((w.clone(), law(&direct, r), law(&via, r), tv, lifted.tau.len()));
            }
        }
        Automaton::Gambler(_) | Automaton::PfaGambler(_) => {
            let g = automaton.prob_gambler()?;
            let (lg, tau) = lift_gambler(&g, DEFAULT_TABLE_LIMIT)?;
            for w in &words {
                let direct = capital_distribution(&g, w.letters(), limits)?;
                let via = lifted_capital_distribution(&lg, &tau, w.letters(), limits)?;
                let tv = exact_tv(&direct, &via);
                let r = |k: &Rational| k.to_string();
                rows.push((w.clone(), law(&direct, r), law(&via, r), tv, tau.len()));
            }
        }
        other => bail!(fsnormal::Error::Invalid(format!("{:?} is neither a selector nor a gambler", other.kind()))),
    }
    let mut out = output(a.out.as_deref())?;
    match a.format {
        Format::Json => {
            let list: Vec<Json> = rows
                .iter()
                .map(|(w, d, l, tv, t)| {
                    json!({
                        "word": alphabet.render(w.letters()),
                        "tables": t,
                        "direct": d,
                        "lifted": l,
                        "tv": tv.to_string(),
                        "tv_f64": tv.to_f64(),
                    })
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&json!({ "version": VERSION, "words": list }))?)?;
        }
        Format::Csv => {
            writeln!(out, "word,tables,direct_support,lifted_support,tv")?;
            for (w, d, l, tv, t) in &rows {
                let size = |j: &Json| j.as_object().map_or(0, |o| o.len());
                writeln!(out, "{},{t},{},{},{tv}", alphabet.render(w.letters()), size(d), size(l))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Suite name; required unless --config is given.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    max_len: Option<usize>,
    /// Comma-separated measure list entry, replacing the suite's measures.
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

pub fn experiment(a: ExperimentArgs) -> Result<()> {
    let mut config = match (&a.config, &a.suite) {
        (Some(p), _) => ExperimentConfig::parse(&std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?)?,
        (None, Some(s)) => ExperimentConfig::new(s.parse::<Suite>()?),
        (None, None) => bail!(fsnormal::Error::Invalid("give --suite or --config".into())),
    };
    if let (Some(_), Some(s)) = (&a.config, &a.suite) {
        config.suite = s.parse::<Suite>()?;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    config.n = a.n.or(config.n);
    config.trials = a.trials.or(config.trials);
    config.max_len = a.max_len.or(config.max_len);
    if let Some(m) = &a.measure {
        parse_weights(m)?;
        config.measures = Some(vec![m.split(',').map(|x| fsnormal::format::Value(x.trim().to_string())).collect()]);
    }
    let record = run_experiment(&config)?;
    let mut w = output(a.out.as_deref())?;
    match a.format {
        Format::Json => write!(w, "{}", record.to_json())?,
        Format::Csv => write!(w, "{}", record.to_csv())?,
    }
    w.flush()?;
    if !record.pass {
        eprintln!("suite {} did not pass", record.suite);
    }
    Ok(())
}
