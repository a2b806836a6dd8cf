//! Command-line front end. [`dispatch`] parses arguments, runs one command
//! and returns the process exit code: 0 on success, 1 on a domain error
//! (printed with its reason code), 2 on a usage or configuration error.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{load_model, read_json, MeasureConfig};
use crate::empirical::{kgen_counts, offspring_counts, pair_counts};
use crate::exact::{
    admissible_set, exact_statistic_distribution, size_law, Backend, StatKey, StatKind,
};
use crate::experiments::{
    decay_curve, genetic_scan, grid_infimum_pair, jk_monotonicity, ldp_curve, spec_digest,
    tilt_invariance_report, CsvHeader, CurveSeries, LdpMethod,
};
use crate::model::{analyze_model, find_critical_tilt, mean_matrix, GWSpec, TypedTree};
use crate::numeric::sci;
use crate::rates::{
    contraction_infimum, cramer_rate, critical_genetic_laws, genetic_rate, kgen_rate_jk, offspring_rate_j,
    pair_rate, stationary_kgen_measure, tilted_kernel_from_measure, DualSolution, RateValue,
};
use crate::sampler::{rejection_with, ExactSampler, ForwardSampler, RngHandle, SampleBudget};
use crate::verify;
use crate::{Error, Result, DEFAULT_SHIFT_TOL};

#[derive(Debug, Parser)]
#[command(name = "gwldp", version, about = "Conditioned multitype Galton-Watson trees and their rate functions")]
struct Cli {
    /// Model configuration (JSON).
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance of the shift-invariance gate.
    #[arg(long, global = true, default_value_t = DEFAULT_SHIFT_TOL)]
    tol_shift: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inspect a model.
    #[command(subcommand)]
    Model(ModelCmd),
    /// Exact law of the total size.
    Sizelaw {
        #[arg(long)]
        nmax: usize,
    },
    /// Draw trees conditioned on their size.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, value_enum, default_value_t = SampleMethod::Exact)]
        method: SampleMethod,
    },
    /// Empirical measure of a given or sampled tree.
    Empirical {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Tree written as `a(b,a(b,b))`.
        #[arg(long, conflicts_with = "n")]
        tree: Option<String>,
        /// Sample a tree of this size instead.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Evaluate a rate function.
    #[command(subcommand)]
    Rate(RateCmd),
    /// Exact conditioned law of an integer statistic.
    Exactdist {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
        backend: BackendArg,
    },
    /// Numerical experiments emitting CSV.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Acceptance checks.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Debug, Subcommand)]
enum ModelCmd {
    /// Validate and print the spectral data.
    Validate,
    /// Critical exponential tilt of a product model's offspring law.
    Tilt,
}

#[derive(Debug, Subcommand)]
enum RateCmd {
    /// Cramér rate of the model's offspring-number law.
    Cramer {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// Pair rate of a pair measure.
    Pair {
        #[arg(long)]
        measure: PathBuf,
        /// Also evaluate the contracted offspring rate.
        #[arg(long)]
        contraction: bool,
    },
    /// Offspring rate of an offspring measure.
    Offspring {
        #[arg(long)]
        measure: PathBuf,
        /// Also build and certify the tilted kernel.
        #[arg(long)]
        tilt: bool,
    },
    /// k-generation rate of a pattern measure.
    Kgen {
        #[arg(long)]
        measure: PathBuf,
    },
    /// Rate of the type ratio in the two-type mutation model.
    Genetic(GeneticArgs),
}

#[derive(Debug, Args)]
struct GeneticArgs {
    #[arg(long)]
    x: Option<f64>,
    #[arg(long, default_value_t = verify::GENETIC_ETA)]
    eta: f64,
    #[arg(long, default_value_t = verify::GENETIC_P)]
    p: f64,
    #[arg(long, default_value_t = verify::GENETIC_NMAX)]
    nmax: usize,
}

#[derive(Debug, Subcommand)]
enum ExperimentCmd {
    /// `-(1/n) log P{|T| = n}` over admissible sizes.
    Decay {
        #[arg(long)]
        nmax: usize,
    },
    /// Finite-n rates of `{L(a, b) >= t}` or `{L(a, b) <= t}`.
    Ldp {
        /// Event such as `a,a>=0.4`.
        #[arg(long)]
        event: String,
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        #[arg(long, value_enum, default_value_t = LdpArg::Exact)]
        method: LdpArg,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Grid resolution of the reference infimum (0 disables it).
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// Total variation between conditioned laws under tilted offspring laws.
    Tilt {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        thetas: Vec<f64>,
        #[arg(long)]
        n: usize,
    },
    /// `J_k` for `k = 1..K` of the model's stationary construction, against
    /// the kernel of `--against` (default: the model itself).
    Jk {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Scan of the genetic type-ratio rate with argmin refinement.
    Genetic {
        #[arg(long, default_value_t = verify::GENETIC_ETA)]
        eta: f64,
        #[arg(long, default_value_t = verify::GENETIC_P)]
        p: f64,
        #[arg(long, default_value_t = verify::GENETIC_NMAX)]
        nmax: usize,
        #[arg(long, default_value_t = 0.2)]
        xmin: f64,
        #[arg(long, default_value_t = 8.0)]
        xmax: f64,
        #[arg(long, default_value_t = 40)]
        points: usize,
    },
}

#[derive(Debug, Subcommand)]
enum VerifyCmd {
    /// Run every acceptance criterion.
    All,
    /// Run one criterion by number.
    One {
        #[arg(long)]
        id: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SampleMethod {
    Exact,
    Rejection,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Pair,
    Offspring,
    Kgen,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Auto,
    Enumeration,
    Dp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LdpArg {
    Exact,
    Mc,
}

/// Settings common to every command, recorded in CSV headers.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub model: Option<PathBuf>,
    pub command: String,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub tol_shift: f64,
}

impl RunConfig {
    fn header(&self, spec: Option<&GWSpec>, method: &str, seeded: bool) -> CsvHeader {
        CsvHeader {
            config_digest: spec.map(spec_digest).unwrap_or_else(|| "none".into()),
            seed: seeded.then_some(self.seed),
            method: method.into(),
            extra: vec![("command".into(), self.command.clone()), ("tol_shift".into(), sci(self.tol_shift))],
        }
    }
}

/// Run the CLI on `argv` (including the program name), writing normal
/// output to `out` (unless `--out` redirects it) and diagnostics to `err`.
pub fn dispatch<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let run = RunConfig {
        model: cli.model.clone(),
        command: command_name(&cli.command),
        seed: cli.seed,
        out: cli.out.clone(),
        tol_shift: cli.tol_shift,
    };
    match execute(&cli, &run) {
        Ok((text, success)) => {
            let written = match &run.out {
                Some(path) => std::fs::write(path, &text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
                None => out.write_all(text.as_bytes()).map_err(Error::from),
            };
            match written {
                Ok(()) if success => 0,
                Ok(()) => 1,
                Err(e) => report(err, &e),
            }
        }
        Err(e) => report(err, &e),
    }
}

fn report(err: &mut dyn Write, e: &Error) -> i32 {
    let _ = writeln!(err, "error[{}]: {e}", e.reason_code());
    match e {
        Error::Config { .. } | Error::Io(_) | Error::Parse(_) => 2,
        _ => 1,
    }
}

fn command_name(c: &Command) -> String {
    let name = match c {
        Command::Model(ModelCmd::Validate) => "model validate",
        Command::Model(ModelCmd::Tilt) => "model tilt",
        Command::Sizelaw { .. } => "sizelaw",
        Command::Sample { .. } => "sample",
        Command::Empirical { .. } => "empirical",
        Command::Rate(RateCmd::Cramer { .. }) => "rate cramer",
        Command::Rate(RateCmd::Pair { .. }) => "rate pair",
        Command::Rate(RateCmd::Offspring { .. }) => "rate offspring",
        Command::Rate(RateCmd::Kgen { .. }) => "rate kgen",
        Command::Rate(RateCmd::Genetic(_)) => "rate genetic",
        Command::Exactdist { .. } => "exactdist",
        Command::Experiment(ExperimentCmd::Decay { .. }) => "experiment decay",
        Command::Experiment(ExperimentCmd::Ldp { .. }) => "experiment ldp",
        Command::Experiment(ExperimentCmd::Tilt { .. }) => "experiment tilt",
        Command::Experiment(ExperimentCmd::Jk { .. }) => "experiment jk",
        Command::Experiment(ExperimentCmd::Genetic { .. }) => "experiment genetic",
        Command::Verify(_) => "verify",
    };
    name.to_string()
}

fn model(cli: &Cli) -> Result<GWSpec> {
    let path = cli.model.as_ref().ok_or_else(|| Error::Config {
        path: "--model".into(),
        message: "this command needs a model file".into(),
    })?;
    load_model(path)
}

fn rate_lines(out: &mut String, r: &RateValue) {
    writeln!(out, "value={}", sci(r.value)).unwrap();
    writeln!(out, "reason={}", r.reason.code()).unwrap();
}

fn dual_lines(out: &mut String, d: &DualSolution) {
    let join = |v: &[f64]| v.iter().map(|&x| sci(x)).collect::<Vec<_>>().join(" ");
    writeln!(out, "multipliers={}", join(&d.multipliers)).unwrap();
    writeln!(out, "moments={}", join(&d.moments)).unwrap();
    writeln!(out, "iterations={}", d.iterations).unwrap();
    writeln!(out, "converged={}", d.converged).unwrap();
}

fn csv_key(key: &str) -> String {
    format!("\"{}\"", key.replace('"', "\"\""))
}

fn stat_kind(kind: Kind, k: usize) -> StatKind {
    match kind {
        Kind::Pair => StatKind::PairCounts,
        Kind::Offspring => StatKind::OffspringCounts,
        Kind::Kgen => StatKind::KgenCounts { k },
    }
}

/// Parse `a,b>=t` or `a,b<=t` into (cell index, at-least flag, threshold).
fn parse_event(text: &str, spec: &GWSpec) -> Result<(usize, bool, f64)> {
    let bad = || Error::Config { path: "--event".into(), message: format!("expected `a,b>=t` or `a,b<=t`, got {text:?}") };
    let (cell, ge, t) = if let Some((l, r)) = text.split_once(">=") {
        (l, true, r)
    } else if let Some((l, r)) = text.split_once("<=") {
        (l, false, r)
    } else {
        return Err(bad());
    };
    let (a, b) = cell.split_once(',').ok_or_else(bad)?;
    let alphabet = spec.alphabet();
    let idx = |s: &str| alphabet.index_of(s.trim()).ok_or_else(bad);
    let t: f64 = t.trim().parse().map_err(|_| bad())?;
    Ok((idx(a)? * alphabet.len() + idx(b)?, ge, t))
}

fn execute(cli: &Cli, run: &RunConfig) -> Result<(String, bool)> {
    let mut out = String::new();
    match &cli.command {
        Command::Model(ModelCmd::Validate) => {
            let spec = model(cli)?;
            let s = spec.spectral()?;
            let labels = |v: &[usize]| v.iter().map(|&a| spec.alphabet().label(a)).collect::<Vec<_>>().join(" ");
            writeln!(out, "types={}", spec.alphabet().labels().join(" ")).unwrap();
            writeln!(out, "rho={}", sci(s.rho)).unwrap();
            writeln!(out, "recurrent={}", labels(&s.recurrent)).unwrap();
            writeln!(out, "transient={}", labels(&s.transient)).unwrap();
            writeln!(out, "irreducible={}", s.irreducible).unwrap();
            writeln!(out, "critical={}", spec.is_critical()).unwrap();
            let vec = |v: &[f64]| v.iter().map(|&x| sci(x)).collect::<Vec<_>>().join(" ");
            writeln!(out, "right_vec={}", vec(&s.right_vec)).unwrap();
            writeln!(out, "left_vec={}", vec(&s.left_vec)).unwrap();
        }
        Command::Model(ModelCmd::Tilt) => {
            let spec = model(cli)?;
            let (law, _) = spec
                .product_parts()
                .ok_or_else(|| Error::InvalidArgument("tilting needs a model given by an offspring law".into()))?;
            let t = find_critical_tilt(law)?;
            writeln!(out, "theta={}", sci(t.theta)).unwrap();
            writeln!(out, "mean={}", sci(t.law.mean())).unwrap();
            let probs = t.law.probs().iter().map(|&p| sci(p)).collect::<Vec<_>>().join(" ");
            writeln!(out, "probs={probs}").unwrap();
        }
        Command::Sizelaw { nmax } => {
            let spec = model(cli)?;
            let table = size_law(&spec, *nmax)?;
            let adm = admissible_set(&table, spec.root_dist());
            let header = run.header(Some(&spec), "exact", false);
            write_header(&mut out, &header);
            writeln!(out, "# period={} residue={}", adm.period, adm.residue).unwrap();
            writeln!(out, "n,log_prob,admissible").unwrap();
            for n in 1..=*nmax {
                let lp = table.log_total(spec.root_dist(), n);
                writeln!(out, "{n},{},{}", sci(lp), adm.contains(n) == Some(true)).unwrap();
            }
        }
        Command::Sample { n, count, method } => {
            let spec = model(cli)?;
            let table = size_law(&spec, *n)?;
            if admissible_set(&table, spec.root_dist()).contains(*n) != Some(true) {
                return Err(Error::NotAdmissible(*n));
            }
            let mut rng = RngHandle::new(run.seed, 0);
            match method {
                SampleMethod::Exact => {
                    let s = ExactSampler::new(&spec, &table)?;
                    for _ in 0..*count {
                        writeln!(out, "{}", s.sample(*n, &mut rng)?.render(spec.alphabet())).unwrap();
                    }
                }
                SampleMethod::Rejection => {
                    let f = ForwardSampler::new(&spec)?;
                    for _ in 0..*count {
                        let t = rejection_with(&f, *n, &mut rng, SampleBudget::default())?;
                        writeln!(out, "{}", t.render(spec.alphabet())).unwrap();
                    }
                }
            }
        }
        Command::Empirical { kind, k, tree, n } => {
            let spec = model(cli)?;
            let alphabet = spec.alphabet();
            let tree = match (tree, n) {
                (Some(text), _) => TypedTree::parse(text, alphabet)?,
                (None, Some(n)) => {
                    let table = size_law(&spec, *n)?;
                    ExactSampler::new(&spec, &table)?.sample(*n, &mut RngHandle::new(run.seed, 0))?
                }
                (None, None) => {
                    return Err(Error::Config { path: "--tree".into(), message: "give --tree or --n".into() })
                }
            };
            let size = tree.size() as f64;
            write_header(&mut out, &run.header(Some(&spec), "empirical", n.is_some()));
            writeln!(out, "# tree={}", tree.render(alphabet)).unwrap();
            writeln!(out, "key,count,mass").unwrap();
            let k_types = spec.num_types();
            match kind {
                Kind::Pair => {
                    let pc = pair_counts(&tree, k_types);
                    let edges = pc.edges() as f64;
                    for a in 0..k_types {
                        for b in 0..k_types {
                            let c = pc.get(a, b);
                            let key = format!("{}>{}", alphabet.label(a), alphabet.label(b));
                            let mass = if edges > 0.0 { c as f64 / edges } else { f64::NAN };
                            writeln!(out, "{},{c},{}", csv_key(&key), sci(mass)).unwrap();
                        }
                    }
                }
                Kind::Offspring => {
                    for ((a, c), &cnt) in offspring_counts(&tree, k_types).counts() {
                        let key = format!("{}:{}", alphabet.label(*a), c.render(alphabet));
                        writeln!(out, "{},{cnt},{}", csv_key(&key), sci(cnt as f64 / size)).unwrap();
                    }
                }
                Kind::Kgen => {
                    for (p, cnt) in kgen_counts(&tree, *k) {
                        writeln!(out, "{},{cnt},{}", csv_key(&p.render(alphabet)), sci(cnt as f64 / size)).unwrap();
                    }
                }
            }
        }
        Command::Rate(cmd) => rate(cli, cmd, &mut out)?,
        Command::Exactdist { n, kind, k, backend } => {
            let spec = model(cli)?;
            let backend = match backend {
                BackendArg::Auto => Backend::Auto,
                BackendArg::Enumeration => Backend::Enumeration,
                BackendArg::Dp => Backend::CountDp,
            };
            let dist = exact_statistic_distribution(&spec, *n, stat_kind(*kind, *k), backend)?;
            if !(dist.total > 0.0) {
                return Err(Error::NullConditioning(format!("P{{|T| = {n}}} = 0")));
            }
            write_header(&mut out, &run.header(Some(&spec), "exact", false));
            writeln!(out, "# p_size={}", sci(dist.total)).unwrap();
            writeln!(out, "key,probability").unwrap();
            for (key, p) in &dist.entries {
                writeln!(out, "{},{}", csv_key(&key.render()), sci(p / dist.total)).unwrap();
            }
        }
        Command::Experiment(cmd) => experiment(cli, run, cmd, &mut out)?,
        Command::Verify(cmd) => {
            let results = match cmd {
                VerifyCmd::All => verify::run_all(),
                VerifyCmd::One { id } => vec![verify::run_criterion(*id).ok_or_else(|| Error::Config {
                    path: "--id".into(),
                    message: format!("criteria are numbered 1..={}", verify::NUM_CRITERIA),
                })?],
            };
            for r in &results {
                writeln!(out, "{r}").unwrap();
            }
            let passed = results.iter().filter(|r| r.passed).count();
            writeln!(out, "{passed}/{} passed", results.len()).unwrap();
            return Ok((out, passed == results.len()));
        }
    }
    Ok((out, true))
}

fn write_header(out: &mut String, header: &CsvHeader) {
    // Same header lines as CurveSeries::to_csv, for non-curve tables.
    let csv = CurveSeries::new("table", Vec::new()).to_csv(header);
    for line in csv.lines().skip(1).filter(|l| l.starts_with('#')) {
        writeln!(out, "{line}").unwrap();
    }
}

fn rate(cli: &Cli, cmd: &RateCmd, out: &mut String) -> Result<()> {
    match cmd {
        RateCmd::Cramer { x } => {
            let spec = model(cli)?;
            let (law, _) = spec
                .product_parts()
                .ok_or_else(|| Error::InvalidArgument("the Cramér rate needs a model given by an offspring law".into()))?;
            rate_lines(out, &cramer_rate(law, *x));
        }
        RateCmd::Pair { measure, contraction } => {
            let spec = model(cli)?;
            let mu = read_json::<MeasureConfig>(measure)?.pair_measure(spec.alphabet())?;
            let (law, pair) = spec
                .product_parts()
                .ok_or_else(|| Error::InvalidArgument("the pair rate needs a model given by an offspring law".into()))?;
            rate_lines(out, &pair_rate(&mu, law, pair)?);
            if *contraction {
                let c = contraction_infimum(&mu, spec.kernel())?;
                writeln!(out, "contraction_value={}", sci(c.value)).unwrap();
                writeln!(out, "contraction_reason={}", c.reason.code()).unwrap();
            }
        }
        RateCmd::Offspring { measure, tilt } => {
            let spec = model(cli)?;
            let nu = read_json::<MeasureConfig>(measure)?.offspring_measure(spec.alphabet())?;
            rate_lines(out, &offspring_rate_j(&nu, spec.kernel(), cli.tol_shift)?);
            if *tilt {
                let t = tilted_kernel_from_measure(&nu, spec.kernel(), cli.tol_shift)?;
                writeln!(out, "tilt_rho={}", sci(t.rho)).unwrap();
                writeln!(out, "tilt_rho_residual={}", sci(t.certificate.rho)).unwrap();
                writeln!(out, "tilt_eigenvector_residual={}", sci(t.certificate.eigenvector)).unwrap();
                writeln!(out, "tilt_entropy_residual={}", sci(t.certificate.entropy)).unwrap();
            }
        }
        RateCmd::Kgen { measure } => {
            let spec = model(cli)?;
            let mu = read_json::<MeasureConfig>(measure)?.kgen_measure(spec.alphabet())?;
            rate_lines(out, &kgen_rate_jk(&mu, spec.kernel(), cli.tol_shift)?);
        }
        RateCmd::Genetic(g) => {
            let (pa, pb) = critical_genetic_laws(g.eta, g.p, g.nmax)?;
            let x = g.x.unwrap_or_else(|| crate::rates::genetic_fixed_point(g.eta, g.p));
            let (r, dual) = genetic_rate(x, &pa, &pb, g.p, g.nmax)?;
            writeln!(out, "x={}", sci(x)).unwrap();
            rate_lines(out, &r);
            dual_lines(out, &dual);
        }
    }
    Ok(())
}

fn experiment(cli: &Cli, run: &RunConfig, cmd: &ExperimentCmd, out: &mut String) -> Result<()> {
    match cmd {
        ExperimentCmd::Decay { nmax } => {
            let spec = model(cli)?;
            out.push_str(&decay_curve(&spec, *nmax)?.to_csv(&run.header(Some(&spec), "exact", false)));
        }
        ExperimentCmd::Ldp { event, ns, method, samples, grid } => {
            let spec = model(cli)?;
            let (cell, ge, t) = parse_event(event, &spec)?;
            let k = spec.num_types();
            let predicate = move |key: &StatKey| {
                let edges: u32 = key.0.iter().sum();
                let frac = key.0[cell] as f64 / edges.max(1) as f64;
                if ge {
                    frac >= t - 1e-12
                } else {
                    frac <= t + 1e-12
                }
            };
            let reference = match (spec.product_parts(), *grid) {
                (Some((law, pair)), g) if g > 0 => {
                    let inside = |w: &[f64]| if ge { w[cell] >= t } else { w[cell] <= t };
                    let inf = grid_infimum_pair(k, g, inside, |mu| {
                        pair_rate(mu, law, pair).map(|r| r.value).unwrap_or(f64::INFINITY)
                    })?;
                    Some(inf.value)
                }
                _ => None,
            };
            let (m, seeded) = match method {
                LdpArg::Exact => (LdpMethod::Exact(Backend::Auto), false),
                LdpArg::Mc => (LdpMethod::MonteCarlo { samples: *samples, seed: run.seed }, true),
            };
            let curve = ldp_curve(&spec, StatKind::PairCounts, &predicate, ns, m, reference)?;
            let mut header = run.header(Some(&spec), m.name(), seeded);
            header.extra.push(("event".into(), event.clone()));
            if seeded {
                header.extra.push(("samples".into(), samples.to_string()));
            }
            out.push_str(&curve.to_csv(&header));
        }
        ExperimentCmd::Tilt { thetas, n } => {
            let spec = model(cli)?;
            write_header(out, &run.header(Some(&spec), "exact", false));
            writeln!(out, "theta,total_variation").unwrap();
            for (theta, tv) in tilt_invariance_report(&spec, thetas, *n)? {
                writeln!(out, "{},{}", sci(theta), sci(tv)).unwrap();
            }
        }
        ExperimentCmd::Jk { k, against } => {
            let spec = model(cli)?;
            let reference = match against {
                Some(p) => load_model(p)?,
                None => spec.clone(),
            };
            let u = analyze_model(&mean_matrix(spec.kernel()))?.right_vec;
            let mu = stationary_kgen_measure(spec.kernel(), &u, *k)?;
            let curve = jk_monotonicity(&mu, reference.kernel(), cli.tol_shift)?;
            let mut header = run.header(Some(&spec), "exact", false);
            header.extra.push(("against_sha256".into(), spec_digest(&reference)));
            out.push_str(&curve.to_csv(&header));
        }
        ExperimentCmd::Genetic { eta, p, nmax, xmin, xmax, points } => {
            let (pa, pb) = critical_genetic_laws(*eta, *p, *nmax)?;
            let points = (*points).max(3);
            let grid: Vec<f64> =
                (0..points).map(|i| xmin + (xmax - xmin) * i as f64 / (points - 1) as f64).collect();
            let scan = genetic_scan(&pa, &pb, *p, *eta, *nmax, &grid)?;
            let mut header = run.header(None, "dual", false);
            header.extra.push(("argmin".into(), sci(scan.argmin)));
            header.extra.push(("min_value".into(), sci(scan.min_value)));
            header.extra.push(("fixed_point_residual".into(), sci(scan.residual)));
            out.push_str(&scan.series.to_csv(&header));
        }
    }
    Ok(())
}
