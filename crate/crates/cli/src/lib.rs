//! `bm`: reproducible command-line runner for the bilinear multiplier toolkit.
//!
//! Every command turns into a [`RunConfig`], runs without side effects through [`run`],
//! and yields an artifact embedding the config, the library version and the result.
//! [`emit`] writes the artifact (and any CSV tables) to `--out` or prints it.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use bilinear_core::approx::{verify_p, ApproxSequence, VerifyOptions};
use bilinear_core::bilinear::{
    apply_symbol, apply_symbol_direct, kernel_apply_direct, measure_convolve, pullback_symbol, symbol_from_kernel,
    transferred_apply, BilinearOperator, BilinearSymbol, DirectSymbolOperator, FiniteMeasure, Kernel, KernelOperator,
    PositiveKernelOperator, SymbolOperator,
};
use bilinear_core::experiments::{
    anisotropic_family, bht_experiment, corpus_generate, deleeuw_restrict, necessity_pack, positive_kernel_truncation,
    pullback_check, CorpusKind, ExperimentConfig, ExperimentReport, KernelBox, PackSetup, Status,
};
use bilinear_core::group::{GroupHom, Subgroup};
use bilinear_core::io::{from_json_str, to_json_string, write_signal_csv};
use bilinear_core::norm::{
    constants_for, estimate_operator_norm, exhaustive_operator_oracle, reference_bound, Budget, KhintchineTable,
    SpaceTriple,
};
use bilinear_core::transform::Signal;
use bilinear_core::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const TRANSFER_TOLERANCE: f64 = 1e-9;
const PACK_TOLERANCE: f64 = 0.05;
const BHT_GROWTH_LIMIT: f64 = 3.0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Input { path: String, source: Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug, Clone)]
#[command(name = "bm", version, about = "Bilinear Fourier multipliers on finite abelian groups")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Global {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Norm-search budget, written RESTARTSxSWEEPS.
    #[arg(long, global = true, default_value = "16x200")]
    pub budget: Budget,
    /// Output directory; the artifact is printed to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the command's default tolerance.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Use the direct summation paths instead of the FFT.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Record wall-clock time; the artifact is then no longer byte-reproducible.
    #[arg(long, global = true)]
    pub timing: bool,
    /// Fail when a quantity that the theory bounds is seen to grow.
    #[arg(long, global = true)]
    pub assert_bounded: bool,
    /// Exponents `p1,p2,p`; entries `p:q` are Lorentz spaces.
    #[arg(long, global = true, default_value = "2,2,1")]
    pub spaces: String,
    /// `lebesgue`, `weak` (weak target) or `lorentz`.
    #[arg(long, global = true, default_value = "lebesgue")]
    pub kind: String,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Apply a symbol or kernel operator to a pair of signals.
    Apply {
        #[arg(long, conflicts_with = "kernel", required_unless_present = "kernel")]
        symbol: Option<PathBuf>,
        #[arg(long)]
        kernel: Option<PathBuf>,
        #[arg(long = "f")]
        f: PathBuf,
        #[arg(long = "g")]
        g: PathBuf,
    },
    /// Pull a symbol back along a dual-group homomorphism.
    Pullback {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long)]
        hom: PathBuf,
        /// Also compare the pulled-back norm with the reference bound of the symbol.
        #[arg(long)]
        check: bool,
    },
    /// Transferred operator against the pullback route.
    Transfer {
        #[arg(long)]
        kernel: PathBuf,
        /// `π̃ : Γ → G`.
        #[arg(long)]
        hom: PathBuf,
        #[arg(long = "f")]
        f: PathBuf,
        #[arg(long = "g")]
        g: PathBuf,
    },
    /// Convolve a symbol with a product of finite measures.
    ConvolveMeasure {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long)]
        lambda: PathBuf,
        #[arg(long)]
        mu: PathBuf,
    },
    /// Lower-bound estimate of the operator norm.
    Norm {
        #[arg(long, conflicts_with = "kernel", required_unless_present = "kernel")]
        symbol: Option<PathBuf>,
        #[arg(long)]
        kernel: Option<PathBuf>,
        /// Also run the exhaustive grid oracle at this many levels.
        #[arg(long)]
        exhaustive: Option<usize>,
    },
    /// Smoothed approximating symbols and their properties.
    Approx {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, default_value_t = 8)]
        stages: usize,
        /// The symbol comes from a continuous model; checks monotone convergence.
        #[arg(long)]
        continuous: bool,
    },
    /// Restriction to an annihilator and lifting from a subgroup dual.
    Deleeuw {
        #[arg(long)]
        symbol: PathBuf,
        /// Generators of H, `;`-separated, coordinates `,`-separated.
        #[arg(long)]
        subgroup: String,
        #[arg(long)]
        companion: Option<PathBuf>,
    },
    /// Pullbacks along diagonal dilations.
    Aniso {
        #[arg(long)]
        symbol: PathBuf,
        /// Dilation vectors, `;`-separated, entries `,`-separated.
        #[arg(long)]
        eps: String,
    },
    /// Bilinear Hilbert transform model across group orders.
    Bht {
        #[arg(long, default_value = "9,27,81")]
        n: String,
        /// Exponent triples, `;`-separated.
        #[arg(long, default_value = "2,2,1;4,4,2;3,3,1.5")]
        triples: String,
    },
    /// Disjoint-translate exponent law.
    Pack {
        /// PackSetup JSON; defaults to indicator profiles with a 2×2 kernel.
        #[arg(long)]
        setup: Option<PathBuf>,
        /// Translate counts: `a-b` or a `,`-list.
        #[arg(long, default_value = "1-16")]
        j: String,
    },
    /// Truncations of a nonnegative kernel.
    Poskernel {
        #[arg(long)]
        kernel: PathBuf,
        /// Boxes `full`, `empty` or a centered radius, `;`-separated.
        #[arg(long, default_value = "full;1;empty")]
        boxes: String,
        #[arg(long, default_value = "1-8")]
        j: String,
    },
    /// Deterministic symbol fixtures.
    Corpus {
        /// `random-symbol`, `bht`, `modulation`, `tensor` or `kernel-bump`.
        #[arg(id = "family", long = "family")]
        kind: String,
        #[arg(long, default_value = "8")]
        sizes: String,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Apply { .. } => "apply",
            Command::Pullback { .. } => "pullback",
            Command::Transfer { .. } => "transfer",
            Command::ConvolveMeasure { .. } => "convolve-measure",
            Command::Norm { .. } => "norm",
            Command::Approx { .. } => "approx",
            Command::Deleeuw { .. } => "deleeuw",
            Command::Aniso { .. } => "aniso",
            Command::Bht { .. } => "bht",
            Command::Pack { .. } => "pack",
            Command::Poskernel { .. } => "poskernel",
            Command::Corpus { .. } => "corpus",
        }
    }
}

/// Everything needed to rerun a command; embedded in its artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub global: Global,
    pub command: Command,
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        RunConfig { global: cli.global, command: cli.command }
    }
}

impl RunConfig {
    pub fn spaces(&self) -> Result<SpaceTriple> {
        Ok(SpaceTriple::parse(&self.global.spaces, &self.global.kind)?)
    }

    fn experiment(&self) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig::new(self.spaces()?, self.global.budget, self.global.seed)?)
    }
}

#[derive(Serialize)]
struct Artifact<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_seconds: Option<f64>,
    result: Value,
}

/// Result of a run: the artifact JSON and the files to place in `--out`.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    pub artifact: String,
    /// `(file name, contents)`; the artifact itself is the first entry.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn result(&self) -> Value {
        serde_json::from_str::<Value>(&self.artifact).map(|v| v["result"].clone()).unwrap_or(Value::Null)
    }
}

struct Produced {
    passed: bool,
    result: Value,
    csv: Option<String>,
    extra: Vec<(String, String)>,
}

impl Produced {
    fn new(result: impl Serialize) -> Result<Self> {
        Ok(Produced {
            passed: true,
            result: serde_json::to_value(result).map_err(Error::from)?,
            csv: None,
            extra: Vec::new(),
        })
    }

    fn passed(mut self, ok: bool) -> Self {
        self.passed = ok;
        self
    }

    fn csv(mut self, text: String) -> Self {
        self.csv = Some(text);
        self
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| CliError::Input { path: name.clone(), source: e.into() })?;
    from_json_str(&text).map_err(|source| CliError::Input { path: name, source })
}

fn csv_text(write: impl FnOnce(&mut Vec<u8>) -> bilinear_core::Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    String::from_utf8(buf).map_err(|e| CliError::Usage(e.to_string()))
}

fn report_output(report: ExperimentReport) -> Result<Produced> {
    let csv = csv_text(|b| report.write_csv(b))?;
    let passed = report.passed();
    Ok(Produced::new(&report)?.passed(passed).csv(csv))
}

fn parse_list<T: std::str::FromStr>(s: &str, sep: char, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(sep)
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| CliError::Usage(format!("bad {what} {t:?}: {e}"))))
        .collect()
}

/// `a-b` (inclusive) or a comma list.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    match s.split_once('-') {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|e| CliError::Usage(format!("bad range {s:?}: {e}")))?;
            let b: usize = b.trim().parse().map_err(|e| CliError::Usage(format!("bad range {s:?}: {e}")))?;
            if a > b {
                return Err(CliError::Usage(format!("empty range {s:?}")));
            }
            Ok((a..=b).collect())
        }
        None => parse_list(s, ',', "count"),
    }
}

fn parse_vectors(s: &str, what: &str) -> Result<Vec<Vec<i64>>> {
    s.split(';').map(str::trim).filter(|t| !t.is_empty()).map(|t| parse_list(t, ',', what)).collect()
}

fn parse_boxes(s: &str, group: &bilinear_core::group::FiniteAbelianGroup) -> Result<Vec<KernelBox>> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t {
            "full" => Ok(KernelBox::full(group)),
            "empty" => Ok(KernelBox::empty(group)),
            r => r
                .parse::<i64>()
                .map(|r| KernelBox::centered(group, r))
                .map_err(|e| CliError::Usage(format!("bad box {r:?}: {e}"))),
        })
        .collect()
}

fn symbol_or_kernel(
    symbol: &Option<PathBuf>,
    kernel: &Option<PathBuf>,
) -> Result<(BilinearSymbol<f64>, Option<Kernel<f64>>)> {
    match (symbol, kernel) {
        (Some(p), None) => Ok((read_json(p)?, None)),
        (None, Some(p)) => {
            let k: Kernel<f64> = read_json(p)?;
            Ok((symbol_from_kernel(&k), Some(k)))
        }
        _ => Err(CliError::Usage("give exactly one of --symbol and --kernel".into())),
    }
}

/// Runs a command without touching the filesystem beyond reading its inputs.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let start = Instant::now();
    let g = &cfg.global;
    let produced = match &cfg.command {
        Command::Apply { symbol, kernel, f, g: gp } => {
            let (m, k) = symbol_or_kernel(symbol, kernel)?;
            let (fs, gs): (Signal<f64>, Signal<f64>) = (read_json(f)?, read_json(gp)?);
            let out = match (k, g.oracle) {
                (Some(k), true) => kernel_apply_direct(&k, &fs, &gs)?,
                (None, true) => apply_symbol_direct(&m, &fs, &gs)?,
                (_, false) => apply_symbol(&m, &fs, &gs)?,
            };
            let csv = csv_text(|b| write_signal_csv(&out, b))?;
            Produced::new(&out)?.csv(csv)
        }
        Command::Pullback { symbol, hom, check } => {
            let m: BilinearSymbol<f64> = read_json(symbol)?;
            let pi: GroupHom = read_json(hom)?;
            let pulled = pullback_symbol(&m, &pi)?;
            if *check {
                let row = pullback_check("pullback", &m, &pi, &cfg.experiment()?)?;
                let ok = row.status != Status::Fail;
                Produced::new(json!({ "symbol": pulled, "check": row }))?.passed(ok)
            } else {
                Produced::new(json!({ "symbol": pulled }))?
            }
        }
        Command::Transfer { kernel, hom, f, g: gp } => {
            let k: Kernel<f64> = read_json(kernel)?;
            let pt: GroupHom = read_json(hom)?;
            let (fs, gs): (Signal<f64>, Signal<f64>) = (read_json(f)?, read_json(gp)?);
            let out = transferred_apply(&k, &pt, &fs, &gs)?;
            let pulled = pullback_symbol(&symbol_from_kernel(&k), &pt.dual())?;
            let route =
                if g.oracle { apply_symbol_direct(&pulled, &fs, &gs)? } else { apply_symbol(&pulled, &fs, &gs)? };
            let diff = out.max_abs_diff(&route);
            let tol = g.tolerance.unwrap_or(TRANSFER_TOLERANCE);
            let csv = csv_text(|b| write_signal_csv(&out, b))?;
            Produced::new(json!({
                "output": out,
                "pullback_route": route,
                "max_abs_diff": diff,
                "tolerance": tol,
            }))?
            .passed(diff <= tol)
            .csv(csv)
        }
        Command::ConvolveMeasure { symbol, lambda, mu } => {
            let m: BilinearSymbol<f64> = read_json(symbol)?;
            let l: FiniteMeasure<f64> = read_json(lambda)?;
            let u: FiniteMeasure<f64> = read_json(mu)?;
            Produced::new(measure_convolve(&l, &u, &m)?)?
        }
        Command::Norm { symbol, kernel, exhaustive } => {
            let spaces = cfg.spaces()?;
            let (m, k) = symbol_or_kernel(symbol, kernel)?;
            let op: Box<dyn BilinearOperator<f64>> = match (k, g.oracle) {
                (Some(k), true) => Box::new(KernelOperator::new(k)),
                (_, true) => Box::new(DirectSymbolOperator::new(m.clone())),
                (_, false) => Box::new(SymbolOperator::new(m.clone())),
            };
            let est = estimate_operator_norm(op.as_ref(), &spaces, g.budget, g.seed)?;
            let oracle =
                exhaustive.map(|levels| exhaustive_operator_oracle(op.as_ref(), &spaces, levels)).transpose()?;
            let bound = reference_bound(&m, &spaces)?;
            let (c, _) = constants_for(&spaces, &KhintchineTable::for_spaces(&spaces, g.seed)?)?;
            let ok = match (&bound, g.assert_bounded) {
                (Some(b), true) => b.admits(est.value, c),
                _ => true,
            };
            Produced::new(json!({ "estimate": est, "exhaustive": oracle, "bound": bound, "c": c }))?.passed(ok)
        }
        Command::Approx { symbol, stages, continuous } => {
            let spaces = cfg.spaces()?;
            let m: BilinearSymbol<f64> = read_json(symbol)?;
            let seq = ApproxSequence::standard(&m, *stages)?;
            let (_, d) = constants_for(&spaces, &KhintchineTable::for_spaces(&spaces, g.seed)?)?;
            let opts = VerifyOptions {
                spaces,
                budget: g.budget,
                seed: g.seed,
                continuous: *continuous,
                d,
                bound: reference_bound(&m, &spaces)?,
            };
            let report = verify_p(&m, &seq, &opts)?;
            let csv = csv_text(|b| report.write_csv(b))?;
            Produced::new(&report)?.passed(report.passed()).csv(csv)
        }
        Command::Deleeuw { symbol, subgroup, companion } => {
            let m: BilinearSymbol<f64> = read_json(symbol)?;
            let grp = m.spatial_group();
            let gens = parse_vectors(subgroup, "generator")?
                .iter()
                .map(|c| grp.element(c))
                .collect::<bilinear_core::Result<Vec<_>>>()?;
            let h = Subgroup::new(grp, gens)?;
            let comp: Option<BilinearSymbol<f64>> = companion.as_deref().map(read_json).transpose()?;
            report_output(deleeuw_restrict(&m, &h, comp.as_ref(), &cfg.experiment()?)?)?
        }
        Command::Aniso { symbol, eps } => {
            let m: BilinearSymbol<f64> = read_json(symbol)?;
            report_output(anisotropic_family(&m, &parse_vectors(eps, "dilation")?, &cfg.experiment()?)?)?
        }
        Command::Bht { n, triples } => {
            let ns: Vec<usize> = parse_list(n, ',', "order")?;
            let spaces = triples
                .split(';')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| SpaceTriple::parse(t, &g.kind))
                .collect::<bilinear_core::Result<Vec<_>>>()?;
            let mut report = bht_experiment(&ns, &spaces, g.budget, g.seed)?;
            if g.assert_bounded {
                let limit = g.tolerance.unwrap_or(BHT_GROWTH_LIMIT);
                for row in report.rows.iter_mut().filter(|r| r.case.starts_with("growth")) {
                    let grow = row.get("growth").unwrap_or(f64::INFINITY);
                    row.metrics.insert("limit".into(), limit);
                    row.status = if grow < limit { Status::Pass } else { Status::Fail };
                }
            }
            report_output(report)?
        }
        Command::Pack { setup, j } => {
            let setup: PackSetup = match setup {
                Some(p) => read_json(p)?,
                None => PackSetup::standard(),
            };
            let tol = g.tolerance.unwrap_or(PACK_TOLERANCE);
            let mut report = necessity_pack(&setup, &parse_range(j)?, &cfg.spaces()?, tol)?;
            if g.assert_bounded {
                bound_growth(&mut report, "fit", tol);
            }
            report_output(report)?
        }
        Command::Poskernel { kernel, boxes, j } => {
            let k: Kernel<f64> = read_json(kernel)?;
            PositiveKernelOperator::new(k.clone())?;
            let tol = g.tolerance.unwrap_or(PACK_TOLERANCE);
            let boxes = parse_boxes(boxes, k.group())?;
            let mut report = positive_kernel_truncation(&k, &boxes, &parse_range(j)?, &cfg.experiment()?, tol)?;
            if g.assert_bounded {
                let fits: Vec<String> =
                    report.rows.iter().filter(|r| r.case.ends_with("pack fit")).map(|r| r.case.clone()).collect();
                for case in fits {
                    bound_growth(&mut report, &case, tol);
                }
            }
            report_output(report)?
        }
        Command::Corpus { kind, sizes, count } => {
            let kind: CorpusKind = kind.parse()?;
            let sizes: Vec<usize> = parse_list(sizes, ',', "size")?;
            let entries = corpus_generate(kind, &sizes, *count, g.seed)?;
            let mut extra = Vec::new();
            let mut manifest = Vec::new();
            for e in &entries {
                let file = format!("{}.json", e.name);
                let mut item =
                    json!({ "name": e.name, "kind": e.kind, "size": e.size, "index": e.index, "seed": e.seed });
                if g.out.is_some() {
                    item["file"] = json!(file);
                    extra.push((file, to_json_string(&e.symbol)?));
                } else {
                    item["symbol"] = serde_json::to_value(&e.symbol).map_err(Error::from)?;
                }
                manifest.push(item);
            }
            let mut p = Produced::new(manifest)?;
            p.extra = extra;
            p
        }
    };
    let artifact = Artifact {
        tool: "bm",
        version: VERSION,
        config: cfg,
        passed: produced.passed,
        runtime_seconds: g.timing.then(|| start.elapsed().as_secs_f64()),
        result: produced.result,
    };
    let text = to_json_string(&artifact)?;
    let name = cfg.command.name();
    let main = if matches!(cfg.command, Command::Corpus { .. }) {
        "manifest.json".to_string()
    } else {
        format!("{name}.json")
    };
    let mut files = vec![(main, text.clone())];
    if let Some(csv) = produced.csv {
        files.push((format!("{name}.csv"), csv));
    }
    files.extend(produced.extra);
    Ok(Outcome { passed: produced.passed, artifact: text, files })
}

/// Asserts that the fitted exponent in `case` stays at most `tol`, i.e. no growth.
fn bound_growth(report: &mut ExperimentReport, case: &str, tol: f64) {
    if let Some(row) = report.rows.iter_mut().find(|r| r.case == case) {
        let slope = row.get("slope").unwrap_or(f64::INFINITY);
        row.metrics.insert("bounded_limit".into(), tol);
        if slope > tol {
            row.status = Status::Fail;
        }
    }
}

/// Writes the outcome to `--out`, or prints the artifact when no directory is given.
pub fn emit(cfg: &RunConfig, outcome: &Outcome) -> Result<()> {
    match &cfg.global.out {
        Some(dir) => {
            let io = |e: std::io::Error| CliError::Input { path: dir.display().to_string(), source: e.into() };
            fs::create_dir_all(dir).map_err(io)?;
            for (name, text) in &outcome.files {
                fs::write(dir.join(name), text).map_err(io)?;
            }
        }
        None => print!("{}", outcome.artifact),
    }
    Ok(())
}

/// Parses nothing further: runs and emits, returning the exit code.
pub fn execute(cli: Cli) -> Result<u8> {
    let cfg = RunConfig::from(cli);
    let outcome = run(&cfg)?;
    emit(&cfg, &outcome)?;
    Ok(outcome.exit_code())
}
