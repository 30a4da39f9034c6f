use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use fsnormal::generators::{parse_digit_word, FibonacciVariant, SourceSpec};
use fsnormal::nseq::SequenceFile;
use fsnormal::stream::FiniteStream;
use fsnormal::{Alphabet, BernoulliMeasure, BoxedStream, RandomSource, Weight};

pub const DEFAULT_N: u64 = 1_000_000;

/// Where symbols come from: a file, a literal word, or a generator.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// NSEQ1 file to read.
    #[arg(long, conflicts_with_all = ["source", "text"])]
    pub input: Option<PathBuf>,
    /// Literal input word, one label per character.
    #[arg(long, conflicts_with = "source")]
    pub text: Option<String>,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Number of symbols to read (defaults to the whole file, or 10^6 for generators).
    #[arg(long)]
    pub n: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Generator name (thue-morse, fibonacci, fibonacci-full, champernowne,
    /// periodic, iid, markov) or a JSON source object.
    #[arg(long)]
    pub source: Option<String>,
    /// Base for champernowne.
    #[arg(long, default_value_t = 10)]
    pub base: usize,
    /// Period for periodic sources, e.g. "01".
    #[arg(long)]
    pub period: Option<String>,
    /// Probability of repeating the previous bit for markov.
    #[arg(long, default_value_t = 2.0 / 3.0)]
    pub stay: f64,
    /// Alphabet size for periodic sources.
    #[arg(long)]
    pub alphabet_size: Option<usize>,
    /// Seed for stochastic sources and automata (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn parse_weights(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| f64::parse(t.trim()).map_err(Into::into))
        .collect()
}

impl SourceArgs {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// `measure` is the `--measure` flag, used as the IID law.
    pub fn spec(&self, measure: Option<&str>) -> Result<Option<SourceSpec>> {
        let Some(name) = self.source.as_deref() else {
            return Ok(None);
        };
        if name.trim_start().starts_with('{') {
            return Ok(Some(serde_json::from_str(name).context("bad source JSON")?));
        }
        Ok(Some(match name {
            "thue-morse" => SourceSpec::ThueMorse,
            "fibonacci" => SourceSpec::Fibonacci { variant: FibonacciVariant::default() },
            "fibonacci-full" => SourceSpec::Fibonacci { variant: FibonacciVariant::FixedPoint },
            "champernowne" => SourceSpec::Champernowne { base: self.base },
            "periodic" => {
                let word = self.period.clone().context("periodic source needs --period")?;
                parse_digit_word(&word)?;
                SourceSpec::Periodic { word, alphabet_size: self.alphabet_size }
            }
            "iid" => SourceSpec::Iid {
                measure: match measure {
                    Some(m) => parse_weights(m)?,
                    None => vec![0.5, 0.5],
                },
            },
            "markov" => SourceSpec::CorrelatedBinary { stay: self.stay },
            other => bail!(fsnormal::Error::InvalidGenerator(format!("unknown source {other:?}"))),
        }))
    }
}

pub struct Opened {
    pub stream: BoxedStream,
    pub n: u64,
}

impl InputArgs {
    /// Opens the input. `alphabet` is used to read `--text`.
    pub fn open(&self, measure: Option<&str>, alphabet: Option<&Alphabet>) -> Result<Opened> {
        if let Some(path) = &self.input {
            let file = read_sequence(path)?;
            let len = file.symbols.len() as u64;
            let n = self.n.unwrap_or(len);
            if n > len {
                bail!(fsnormal::Error::Invalid(format!("--n {n} exceeds the {len} symbols in {}", path.display())));
            }
            let alphabet = Alphabet::digits(file.alphabet_size as usize)?;
            return Ok(Opened { stream: Box::new(FiniteStream::new(alphabet, file.word())), n });
        }
        if let Some(text) = &self.text {
            let alphabet = match alphabet {
                Some(a) => a.clone(),
                None => {
                    let max = parse_digit_word(text)?.into_iter().max().unwrap_or(0) as usize;
                    Alphabet::digits((max + 1).max(2))?
                }
            };
            let word = alphabet.parse_word(text)?;
            let len = word.len() as u64;
            let n = self.n.unwrap_or(len).min(len);
            return Ok(Opened { stream: Box::new(FiniteStream::new(alphabet, word)), n });
        }
        match self.source.spec(measure)? {
            Some(spec) => Ok(Opened {
                stream: spec.build(RandomSource::new(self.source.seed()))?,
                n: self.n.unwrap_or(DEFAULT_N),
            }),
            None => bail!(fsnormal::Error::Invalid("give one of --input, --text or --source".into())),
        }
    }
}

pub fn read_sequence(path: &Path) -> Result<SequenceFile> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(SequenceFile::read_from(BufReader::new(f))?)
}

/// Measure from `--measure`, or uniform over `alphabet`.
pub fn measure_for(alphabet: &Alphabet, text: Option<&str>) -> Result<BernoulliMeasure> {
    match text {
        Some(t) => Ok(BernoulliMeasure::parse(alphabet.clone(), t)?),
        None => Ok(BernoulliMeasure::uniform(alphabet.clone())),
    }
}

/// Opens `path` for writing, or stdout.
pub fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}
