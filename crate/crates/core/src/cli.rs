//! The `olsen` command line.
//!
//! Every run resolves a [`RunConfig`] (from `--config`, subcommand flags, or
//! both), writes its artifacts into `--out`, and records the resolved config
//! in `manifest.json`. Feeding that manifest back through `--config`
//! reproduces the artifacts byte for byte.
//!
//! Exit codes: `0` success, `1` rejected input, `2` numeric failure. Errors
//! are printed to stderr as one JSON object.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::dirichlet::{count_all_zeros, count_zeros, DirichletPolynomial};
use crate::error::{Error, Result};
use crate::gray::{doubling_estimate, gray, gray_alt, CadicInterval, CodeKind, PushforwardMeasure};
use crate::measure::{write_trajectory_csv, MeasureSpec, ProbabilityVector, WordSampler};
use crate::numeric::linspace;
use crate::olsen::{spectrum, write_spectrum_csv, write_tau_csv, OlsenPair};
use crate::space::{enumerate_index, level_count, words_of_level, Alphabet, Word};
use crate::tangency::{
    build_measure_pair, certify_tangency, solve_uv, BaseQuadruple, PerturbationState,
    TangencyCertificate,
};

pub const TOOL: &str = "olsen";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";
/// Largest number of intervals swept per level by `doubling`.
pub const DOUBLING_MAX_INTERVALS: u64 = 1 << 24;

/// A named preset or four explicit entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseChoice {
    Preset(String),
    Custom([f64; 4]),
}

impl Default for BaseChoice {
    fn default() -> Self {
        BaseChoice::Preset("paper-110".into())
    }
}

impl BaseChoice {
    pub fn resolve(&self) -> Result<BaseQuadruple> {
        Ok(match self {
            BaseChoice::Preset(name) => BaseQuadruple::preset(name)?,
            BaseChoice::Custom([a, b, c, d]) => BaseQuadruple::new(*a, *b, *c, *d)?,
        })
    }

    /// `paper-110`, `paper-9`, `custom a,b,c,d` or `a,b,c,d`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with("paper-") {
            return Ok(BaseChoice::Preset(s.to_string()));
        }
        let body = s
            .strip_prefix("custom")
            .map(|r| r.trim_start_matches([' ', ':', '=']))
            .unwrap_or(s);
        let v = parse_list(body)?;
        let arr: [f64; 4] = v
            .try_into()
            .map_err(|_| Error::Config(format!("custom base needs four entries, got {s:?}")))?;
        Ok(BaseChoice::Custom(arr))
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number {x:?}: {e}")))
        })
        .collect()
}

/// Where the measure comes from: a solved tangent pair or explicit vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSource {
    Tangent { base: BaseChoice, t: f64, w: f64 },
    Explicit(MeasureSpec),
}

impl Default for MeasureSource {
    fn default() -> Self {
        MeasureSource::Tangent {
            base: BaseChoice::default(),
            t: 1e-3,
            w: 1e-3,
        }
    }
}

impl MeasureSource {
    pub fn resolve(&self) -> Result<MeasureSpec> {
        match self {
            MeasureSource::Tangent { base, t, w } => {
                let (a, b) = build_measure_pair(*t, *w, &base.resolve()?)?;
                Ok(MeasureSpec::with_factorial_schedule(a, b)?)
            }
            MeasureSource::Explicit(spec) => Ok(spec.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveParams {
    pub base: BaseChoice,
    pub t: f64,
    pub w: f64,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            base: BaseChoice::default(),
            t: 1e-3,
            w: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZerosParams {
    /// `[[coefficient, exponent], …]`
    pub terms: Vec<(f64, f64)>,
    /// Search window; all real zeros when absent.
    pub window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TauParams {
    pub measure: MeasureSource,
    pub q_min: f64,
    pub q_max: f64,
    pub points: usize,
}

impl Default for TauParams {
    fn default() -> Self {
        Self {
            measure: MeasureSource::default(),
            q_min: -10.0,
            q_max: 10.0,
            points: 401,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectrumParams {
    pub measure: MeasureSource,
    pub points: usize,
    /// Defaults to the open admissible window, endpoints excluded.
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        Self {
            measure: MeasureSource::default(),
            points: 100,
            alpha_min: None,
            alpha_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrayParams {
    pub alphabet: usize,
    /// Words to code; when empty, every word of `level`.
    pub words: Vec<String>,
    pub level: usize,
}

impl Default for GrayParams {
    fn default() -> Self {
        Self {
            alphabet: 4,
            words: Vec::new(),
            level: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PushforwardParams {
    pub measure: MeasureSource,
    pub code: CodeKind,
    pub level: usize,
    /// One interval, or all of them at `level` when absent.
    pub index: Option<u64>,
}

impl Default for PushforwardParams {
    fn default() -> Self {
        Self {
            measure: MeasureSource::default(),
            code: CodeKind::Standard,
            level: 3,
            index: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DoublingParams {
    pub measure: MeasureSource,
    pub code: CodeKind,
    pub max_level: usize,
}

impl Default for DoublingParams {
    fn default() -> Self {
        Self {
            measure: MeasureSource::default(),
            code: CodeKind::Standard,
            max_level: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleParams {
    pub measure: MeasureSource,
    pub samples: usize,
    pub depth: usize,
    /// Only every `stride`-th depth (and the last) is written.
    pub stride: usize,
}

impl Default for SampleParams {
    fn default() -> Self {
        Self {
            measure: MeasureSource::default(),
            samples: 10,
            depth: 719,
            stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    Solve(SolveParams),
    Zeros(ZerosParams),
    Tau(TauParams),
    Spectrum(SpectrumParams),
    Gray(GrayParams),
    Pushforward(PushforwardParams),
    Doubling(DoublingParams),
    SampleExponent(SampleParams),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Zeros(_) => "zeros",
            Command::Tau(_) => "tau",
            Command::Spectrum(_) => "spectrum",
            Command::Gray(_) => "gray",
            Command::Pushforward(_) => "pushforward",
            Command::Doubling(_) => "doubling",
            Command::SampleExponent(_) => "sample-exponent",
        }
    }
}

/// The fully resolved input of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads for parallel sweeps; the rayon default when absent.
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub artifacts: Vec<String>,
}

/// `--config` accepts either a bare [`RunConfig`] or a [`Manifest`].
#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigFile {
    Manifest(Manifest),
    Plain(RunConfig),
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    let parsed: ConfigFile = serde_json::from_str(&text).map_err(|e| {
        Error::Config(format!(
            "{}: not a run config or manifest ({e})",
            path.display()
        ))
    })?;
    Ok(match parsed {
        ConfigFile::Manifest(m) => m.config,
        ConfigFile::Plain(c) => c,
    })
}

fn validate_grid(lo: f64, hi: f64, points: usize, what: &str) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Config(format!(
            "{what}: need finite bounds with lo < hi, got [{lo}, {hi}]"
        )));
    }
    if points < 2 {
        return Err(Error::Config(format!(
            "{what}: need at least 2 points, got {points}"
        )));
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    base: [f64; 4],
    state: PerturbationState,
    params_a: &'a ProbabilityVector,
    params_b: &'a ProbabilityVector,
    residuals: [f64; 4],
    certificate: &'a TangencyCertificate,
}

/// Executes `config`, writing artifacts and the manifest into `out`.
/// Returns the artifact file names (manifest excluded).
pub fn run(config: &RunConfig, out: &Path) -> Result<Vec<String>> {
    match config.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| run_inner(config, out))
        }
        None => run_inner(config, out),
    }
}

fn run_inner(config: &RunConfig, out: &Path) -> Result<Vec<String>> {
    fs::create_dir_all(out)?;
    let artifacts = match &config.command {
        Command::Solve(p) => run_solve(p, out)?,
        Command::Zeros(p) => run_zeros(p, out)?,
        Command::Tau(p) => run_tau(p, out)?,
        Command::Spectrum(p) => run_spectrum(p, out)?,
        Command::Gray(p) => run_gray(p, out)?,
        Command::Pushforward(p) => run_pushforward(p, out)?,
        Command::Doubling(p) => run_doubling(p, out)?,
        Command::SampleExponent(p) => run_sample(p, config.seed, out)?,
    };
    let manifest = Manifest {
        tool: TOOL.into(),
        version: VERSION.into(),
        config: config.clone(),
        artifacts: artifacts.clone(),
    };
    let mut f = create(&out.join(MANIFEST_FILE))?;
    serde_json::to_writer_pretty(&mut f, &manifest)?;
    writeln!(f)?;
    f.flush()?;
    Ok(artifacts)
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<Vec<String>> {
    let mut f = create(&out.join(name))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(vec![name.to_string()])
}

fn run_solve(p: &SolveParams, out: &Path) -> Result<Vec<String>> {
    let base = p.base.resolve()?;
    let (u, v) = solve_uv(p.t, p.w, &base)?;
    let (a, b) = build_measure_pair(p.t, p.w, &base)?;
    let cert = certify_tangency(&a, &b)?;
    let output = SolveOutput {
        base: base.entries(),
        state: PerturbationState::new(p.t, u, v, p.w),
        params_a: &a,
        params_b: &b,
        residuals: cert.residuals,
        certificate: &cert,
    };
    write_json(out, "solve.json", &output)
}

fn run_zeros(p: &ZerosParams, out: &Path) -> Result<Vec<String>> {
    if p.terms.is_empty() {
        return Err(Error::Config("zeros: no terms given".into()));
    }
    if p.terms
        .iter()
        .any(|(a, e)| !a.is_finite() || !e.is_finite())
    {
        return Err(Error::Config("zeros: terms must be finite".into()));
    }
    let f = DirichletPolynomial::new(p.terms.iter().copied());
    let report = match p.window {
        Some((lo, hi)) => count_zeros(&f, lo, hi)?,
        None => count_all_zeros(&f)?,
    };
    write_json(out, "zeros.json", &report)
}

fn run_tau(p: &TauParams, out: &Path) -> Result<Vec<String>> {
    validate_grid(p.q_min, p.q_max, p.points, "q grid")?;
    let spec = p.measure.resolve()?;
    let pair = OlsenPair::from_spec(&spec);
    let mut f = create(&out.join("tau.csv"))?;
    write_tau_csv(&mut f, &pair, &linspace(p.q_min, p.q_max, p.points))?;
    f.flush()?;
    Ok(vec!["tau.csv".into()])
}

fn run_spectrum(p: &SpectrumParams, out: &Path) -> Result<Vec<String>> {
    let spec = p.measure.resolve()?;
    let pair = OlsenPair::from_spec(&spec);
    let (wlo, whi) = pair.spectrum_window();
    let alphas = match (p.alpha_min, p.alpha_max) {
        (None, None) => {
            if p.points < 2 {
                return Err(Error::Config("alpha grid: need at least 2 points".into()));
            }
            let n = p.points as f64 + 1.0;
            (1..=p.points)
                .map(|i| wlo + (whi - wlo) * i as f64 / n)
                .collect()
        }
        (lo, hi) => {
            let (lo, hi) = (lo.unwrap_or(wlo), hi.unwrap_or(whi));
            validate_grid(lo, hi, p.points, "alpha grid")?;
            linspace(lo, hi, p.points)
        }
    };
    let points = alphas
        .into_iter()
        .map(|a| spectrum(&pair, a))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut f = create(&out.join("spectrum.csv"))?;
    write_spectrum_csv(&mut f, &points)?;
    f.flush()?;
    Ok(vec!["spectrum.csv".into()])
}

fn run_gray(p: &GrayParams, out: &Path) -> Result<Vec<String>> {
    let alphabet = Alphabet::new(p.alphabet)?;
    let words: Vec<Word> = if p.words.is_empty() {
        level_count(p.level, alphabet)?;
        words_of_level(p.level, alphabet).collect()
    } else {
        p.words
            .iter()
            .map(|s| {
                let w = Word::parse(s)?;
                w.check(alphabet)?;
                Ok(w)
            })
            .collect::<Result<_>>()?
    };
    let mut f = create(&out.join("gray.csv"))?;
    writeln!(f, "word,index,gray,gray_alt")?;
    for w in &words {
        let index = enumerate_index(w, alphabet)?;
        writeln!(
            f,
            "{w},{index},{},{}",
            gray(w, alphabet),
            gray_alt(w, alphabet)
        )?;
    }
    f.flush()?;
    Ok(vec!["gray.csv".into()])
}

fn run_pushforward(p: &PushforwardParams, out: &Path) -> Result<Vec<String>> {
    let pf = PushforwardMeasure::new(p.measure.resolve()?, p.code)?;
    let alphabet = pf.alphabet();
    let count = level_count(p.level, alphabet)?;
    if count > DOUBLING_MAX_INTERVALS {
        return Err(Error::Config(format!(
            "pushforward: level {} has {count} intervals, limit {DOUBLING_MAX_INTERVALS}",
            p.level
        )));
    }
    let rows: Vec<(CadicInterval, f64)> = match p.index {
        Some(i) => {
            let iv = CadicInterval::new(alphabet, p.level, i)?;
            vec![(iv, pf.log_mass(&iv)?)]
        }
        None => pf
            .level_log_masses(p.level)?
            .into_iter()
            .enumerate()
            .map(|(i, lm)| Ok((CadicInterval::new(alphabet, p.level, i as u64)?, lm)))
            .collect::<Result<_>>()?,
    };
    let mut f = create(&out.join("pushforward.csv"))?;
    writeln!(
        f,
        "level,index,lo_numerator,hi_numerator,denominator,mass,log_mass"
    )?;
    for (iv, lm) in rows {
        let (lo, hi) = iv.numerators();
        writeln!(
            f,
            "{},{},{lo},{hi},{},{},{lm}",
            iv.level,
            iv.index,
            iv.denominator(),
            lm.exp()
        )?;
    }
    f.flush()?;
    Ok(vec!["pushforward.csv".into()])
}

fn run_doubling(p: &DoublingParams, out: &Path) -> Result<Vec<String>> {
    let pf = PushforwardMeasure::new(p.measure.resolve()?, p.code)?;
    if p.max_level == 0 {
        return Err(Error::Config("doubling: max_level must be positive".into()));
    }
    let count = level_count(p.max_level, pf.alphabet())?;
    if count > DOUBLING_MAX_INTERVALS {
        return Err(Error::Config(format!(
            "doubling: level {} has {count} intervals, limit {DOUBLING_MAX_INTERVALS}",
            p.max_level
        )));
    }
    let report = doubling_estimate(&pf, p.max_level);
    let mut f = create(&out.join("doubling.csv"))?;
    writeln!(f, "level,ratio,running_max,odds_bound")?;
    for l in &report.levels {
        writeln!(
            f,
            "{},{},{},{}",
            l.level, l.ratio, l.running_max, report.odds_bound
        )?;
    }
    f.flush()?;
    Ok(vec!["doubling.csv".into()])
}

fn run_sample(p: &SampleParams, seed: u64, out: &Path) -> Result<Vec<String>> {
    if p.samples == 0 || p.depth == 0 {
        return Err(Error::Config(
            "sample-exponent: samples and depth must be positive".into(),
        ));
    }
    let spec = p.measure.resolve()?;
    let mut sampler = WordSampler::new(&spec, seed);
    let trajectories = (0..p.samples)
        .map(|_| spec.exponent_trajectory(&sampler.sample(p.depth)))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut f = create(&out.join("sample_exponent.csv"))?;
    write_trajectory_csv(&mut f, &trajectories, p.stride)?;
    f.flush()?;
    Ok(vec!["sample_exponent.csv".into()])
}

#[derive(Debug, Parser)]
#[command(
    name = "olsen",
    version,
    about = "Inhomogeneous multinomial measures: Olsen functions, tangency, spectra, Gray codes"
)]
pub struct Cli {
    /// JSON run config or a manifest from an earlier run.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "olsen-out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Option<CliCommand>,
}

/// Measure selection shared by several subcommands.
#[derive(Debug, Args, Default)]
pub struct MeasureArgs {
    /// Comma-separated first vector (with --probs-b: explicit measure).
    #[arg(long)]
    pub probs_a: Option<String>,
    #[arg(long)]
    pub probs_b: Option<String>,
    /// Base for a solved tangent pair.
    #[arg(long)]
    pub base: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<f64>,
}

impl MeasureArgs {
    fn apply(&self, m: &mut MeasureSource) -> Result<()> {
        match (&self.probs_a, &self.probs_b) {
            (Some(a), Some(b)) => {
                let a = ProbabilityVector::new(parse_list(a)?)?;
                let b = ProbabilityVector::new(parse_list(b)?)?;
                *m = MeasureSource::Explicit(MeasureSpec::with_factorial_schedule(a, b)?);
                return Ok(());
            }
            (None, None) => {}
            _ => return Err(Error::Config("--probs-a and --probs-b go together".into())),
        }
        if self.base.is_none() && self.t.is_none() && self.w.is_none() {
            return Ok(());
        }
        let (mut base, mut t, mut w) = match m {
            MeasureSource::Tangent { base, t, w } => (base.clone(), *t, *w),
            MeasureSource::Explicit(_) => {
                let SolveParams { base, t, w } = SolveParams::default();
                (base, t, w)
            }
        };
        if let Some(b) = &self.base {
            base = BaseChoice::parse(b)?;
        }
        t = self.t.unwrap_or(t);
        w = self.w.unwrap_or(w);
        *m = MeasureSource::Tangent { base, t, w };
        Ok(())
    }
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Solve for a tangent pair and certify it.
    Solve {
        /// paper-110, paper-9, or "custom a,b,c,d".
        #[arg(long)]
        base: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        w: Option<f64>,
    },
    /// Count zeros of a Dirichlet polynomial given as JSON [[a, p], …].
    Zeros {
        #[arg(long)]
        terms: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<f64>,
    },
    /// Free-energy curves b and B with right derivatives.
    Tau {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, allow_hyphen_values = true)]
        q_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        q_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Hausdorff and packing spectra over an alpha grid.
    Spectrum {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        alpha_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        alpha_max: Option<f64>,
    },
    /// Gray-coded images of words.
    Gray {
        #[arg(long)]
        alphabet: Option<usize>,
        /// Repeatable; digits like 102 or 1,0,12.
        #[arg(long = "word")]
        words: Vec<String>,
        #[arg(long)]
        level: Option<usize>,
    },
    /// Masses of c-adic intervals under the image measure.
    Pushforward {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, value_parser = parse_code)]
        code: Option<CodeKind>,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        index: Option<u64>,
    },
    /// Adjacent-interval mass ratios per level.
    Doubling {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, value_parser = parse_code)]
        code: Option<CodeKind>,
        #[arg(long)]
        max_level: Option<usize>,
    },
    /// Running local exponents along sampled words.
    SampleExponent {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        stride: Option<usize>,
    },
}

fn parse_code(s: &str) -> std::result::Result<CodeKind, String> {
    match s {
        "standard" => Ok(CodeKind::Standard),
        "alternative" => Ok(CodeKind::Alternative),
        "identity" => Ok(CodeKind::Identity),
        _ => Err(format!(
            "unknown code {s:?} (standard, alternative, identity)"
        )),
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl CliCommand {
    fn name(&self) -> &'static str {
        match self {
            CliCommand::Solve { .. } => "solve",
            CliCommand::Zeros { .. } => "zeros",
            CliCommand::Tau { .. } => "tau",
            CliCommand::Spectrum { .. } => "spectrum",
            CliCommand::Gray { .. } => "gray",
            CliCommand::Pushforward { .. } => "pushforward",
            CliCommand::Doubling { .. } => "doubling",
            CliCommand::SampleExponent { .. } => "sample-exponent",
        }
    }

    /// Layers the flags over `base` (which must be the same subcommand) or
    /// over the defaults.
    fn apply(self, base: Option<Command>) -> Result<Command> {
        if let Some(b) = &base {
            if b.name() != self.name() {
                return Err(Error::Config(format!(
                    "config is for `{}` but the command line asks for `{}`",
                    b.name(),
                    self.name()
                )));
            }
        }
        Ok(match self {
            CliCommand::Solve { base: b, t, w } => {
                let mut p = match base {
                    Some(Command::Solve(p)) => p,
                    _ => SolveParams::default(),
                };
                if let Some(b) = b {
                    p.base = BaseChoice::parse(&b)?;
                }
                set(&mut p.t, t);
                set(&mut p.w, w);
                Command::Solve(p)
            }
            CliCommand::Zeros { terms, lo, hi } => {
                let mut p = match base {
                    Some(Command::Zeros(p)) => p,
                    _ => ZerosParams::default(),
                };
                if let Some(t) = terms {
                    p.terms = serde_json::from_str(&t)
                        .map_err(|e| Error::Config(format!("--terms: {e}")))?;
                }
                match (lo, hi) {
                    (Some(lo), Some(hi)) => p.window = Some((lo, hi)),
                    (None, None) => {}
                    _ => return Err(Error::Config("--lo and --hi go together".into())),
                }
                Command::Zeros(p)
            }
            CliCommand::Tau {
                measure,
                q_min,
                q_max,
                points,
            } => {
                let mut p = match base {
                    Some(Command::Tau(p)) => p,
                    _ => TauParams::default(),
                };
                measure.apply(&mut p.measure)?;
                set(&mut p.q_min, q_min);
                set(&mut p.q_max, q_max);
                set(&mut p.points, points);
                Command::Tau(p)
            }
            CliCommand::Spectrum {
                measure,
                points,
                alpha_min,
                alpha_max,
            } => {
                let mut p = match base {
                    Some(Command::Spectrum(p)) => p,
                    _ => SpectrumParams::default(),
                };
                measure.apply(&mut p.measure)?;
                set(&mut p.points, points);
                if alpha_min.is_some() {
                    p.alpha_min = alpha_min;
                }
                if alpha_max.is_some() {
                    p.alpha_max = alpha_max;
                }
                Command::Spectrum(p)
            }
            CliCommand::Gray {
                alphabet,
                words,
                level,
            } => {
                let mut p = match base {
                    Some(Command::Gray(p)) => p,
                    _ => GrayParams::default(),
                };
                set(&mut p.alphabet, alphabet);
                if !words.is_empty() {
                    p.words = words;
                }
                set(&mut p.level, level);
                Command::Gray(p)
            }
            CliCommand::Pushforward {
                measure,
                code,
                level,
                index,
            } => {
                let mut p = match base {
                    Some(Command::Pushforward(p)) => p,
                    _ => PushforwardParams::default(),
                };
                measure.apply(&mut p.measure)?;
                set(&mut p.code, code);
                set(&mut p.level, level);
                if index.is_some() {
                    p.index = index;
                }
                Command::Pushforward(p)
            }
            CliCommand::Doubling {
                measure,
                code,
                max_level,
            } => {
                let mut p = match base {
                    Some(Command::Doubling(p)) => p,
                    _ => DoublingParams::default(),
                };
                measure.apply(&mut p.measure)?;
                set(&mut p.code, code);
                set(&mut p.max_level, max_level);
                Command::Doubling(p)
            }
            CliCommand::SampleExponent {
                measure,
                samples,
                depth,
                stride,
            } => {
                let mut p = match base {
                    Some(Command::SampleExponent(p)) => p,
                    _ => SampleParams::default(),
                };
                measure.apply(&mut p.measure)?;
                set(&mut p.samples, samples);
                set(&mut p.depth, depth);
                set(&mut p.stride, stride);
                Command::SampleExponent(p)
            }
        })
    }
}

impl Cli {
    /// Merges `--config` with the subcommand flags and global overrides.
    pub fn resolve(self) -> Result<(RunConfig, PathBuf)> {
        let loaded = self.config.as_deref().map(load_config).transpose()?;
        let (command, mut seed, mut threads) = match loaded {
            Some(c) => (Some(c.command), c.seed, c.threads),
            None => (None, 0, None),
        };
        let command = match (self.command, command) {
            (Some(cli), base) => cli.apply(base)?,
            (None, Some(c)) => c,
            (None, None) => {
                return Err(Error::Config("no subcommand given and no --config".into()));
            }
        };
        set(&mut seed, self.seed);
        if self.threads.is_some() {
            threads = self.threads;
        }
        if threads == Some(0) {
            return Err(Error::Config("--threads must be positive".into()));
        }
        Ok((
            RunConfig {
                command,
                seed,
                threads,
            },
            self.out,
        ))
    }
}

/// Exit code for an error: `2` for numeric failures, `1` otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numeric() {
        2
    } else {
        1
    }
}

/// One-line JSON error description for stderr.
pub fn error_json(e: &Error) -> String {
    serde_json::json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": exit_code(e),
    })
    .to_string()
}

/// Parses `args`, runs, reports, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let err = Error::Config(e.to_string().trim().to_string());
            eprintln!("{}", error_json(&err));
            return 1;
        }
    };
    match cli.resolve().and_then(|(cfg, out)| run(&cfg, &out)) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}
