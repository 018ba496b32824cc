//! Batch command-line front end behind the `netbell` binary.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::accept;
use crate::bell;
use crate::bounds;
use crate::engine::{born_distribution, DEFAULT_DENSE_LIMIT};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::nslp::{self, NsLpProblem};
use crate::observables::{build_settings_variants, SettingsPlan};
use crate::report::{self, Format, Table};
use crate::sim::{self, SimConfig};
use crate::transform;

#[derive(Parser, Debug)]
#[command(name = "netbell", version, about = "Network Bell functional, device-independent bounds and NS-LP guessing")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// largest particle count for dense routes
    #[arg(long, env = "NETBELL_DENSE_LIMIT", default_value_t = DEFAULT_DENSE_LIMIT, global = true)]
    pub dense_limit: usize,
    /// write result and run manifest here instead of the manifest to stderr
    #[arg(long, env = "NETBELL_MANIFEST_DIR", global = true)]
    pub manifest_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Command {
    /// Structural checks of a network file
    Validate { net: PathBuf },
    /// Odd-parity transformed networks and their traces
    Transform { net: PathBuf },
    /// Measurement settings plan
    Settings {
        net: PathBuf,
        #[arg(long, default_value_t = FRAC_PI_4)]
        theta: f64,
    },
    /// Evaluate the Bell functional
    Verify(VerifyArgs),
    /// Uniform-visibility threshold
    Visibility { net: PathBuf },
    /// Born-rule distribution for a settings plan
    Born { net: PathBuf, plan: PathBuf },
    /// Key-rate bound from the functional value and a key-input slice
    Keyrate {
        net: PathBuf,
        #[arg(long, default_value_t = FRAC_PI_4)]
        theta: f64,
        #[arg(long, value_delimiter = ',')]
        key_inputs: Option<Vec<usize>>,
    },
    /// Monogamy bound on the eavesdropper's advantage
    Monogamy {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        varpi: f64,
    },
    /// Numerical check of the operator SOS certificate
    Sos {
        #[arg(long)]
        varpi: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Non-signalling guessing LP
    Lp { problem: PathBuf },
    /// LP optimum over ascending violation floors
    LpSweep {
        problem: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        floors: Vec<f64>,
    },
    /// Classical simulation of a swapping chain (k = 1: a single singlet)
    Simulate {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        theta_a: f64,
        #[arg(long)]
        theta_b: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the acceptance suite
    Accept {
        /// criterion ids to run (default: all)
        #[arg(value_delimiter = ',')]
        ids: Vec<String>,
    },
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    net: PathBuf,
    #[arg(long, conflicts_with = "optimize")]
    theta: Option<f64>,
    #[arg(long)]
    optimize: bool,
    /// overrides every source visibility
    #[arg(long)]
    visibility: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub input_files: Vec<String>,
    pub flags: BTreeMap<String, Value>,
    pub toolkit_version: String,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
}

struct Output {
    value: Value,
    table: Option<String>,
    inputs: Vec<PathBuf>,
    seed: Option<u64>,
    ok: bool,
}

impl Output {
    fn new<T: Serialize>(x: &T, inputs: &[&Path]) -> Result<Self> {
        Ok(Output { value: serde_json::to_value(x)?, table: None, inputs: inputs.iter().map(|p| p.to_path_buf()).collect(), seed: None, ok: true })
    }
}

fn load_net(p: &Path) -> Result<Network> {
    let net = Network::load(p)?;
    net.check()?;
    Ok(net)
}

fn load_problem(p: &Path) -> Result<NsLpProblem> {
    Ok(serde_json::from_str(&std::fs::read_to_string(p)?)?)
}

fn bell_table(r: &bell::BellReport) -> String {
    let mut t = Table::new(&["bipartition", "variant", "CH", "predicted"]);
    for term in &r.terms {
        t.rows.push(vec![format!("{:?}", term.bipartition), term.variant.to_string(), report::fmt_g(term.value), report::fmt_g(term.predicted)]);
    }
    format!(
        "{}\nvalue {}  biseparable bound {}  quantum max {}  verdict {:?}  theta {}\n",
        t.render(),
        report::fmt_g(r.value),
        report::fmt_g(r.biseparable_bound),
        report::fmt_g(r.quantum_max),
        r.verdict,
        report::fmt_g(r.theta)
    )
}

fn execute(cli: &Cli) -> Result<Output> {
    let dl = cli.dense_limit;
    match &cli.command {
        Command::Validate { net } => {
            let n = Network::load(net)?;
            let r = n.validate();
            let mut o = Output::new(&r, &[net])?;
            o.ok = r.ok;
            Ok(o)
        }
        Command::Transform { net } => {
            let n = load_net(net)?;
            let v = transform::prepare_variants(&n)?;
            let nets: Vec<Value> = v.nets.iter().map(Network::to_json_value).collect();
            Output::new(&json!({ "networks": nets, "traces": v.traces, "cycles": transform::decompose_cycles(&n) }), &[net])
        }
        Command::Settings { net, theta } => {
            let n = load_net(net)?;
            let v = transform::prepare_variants(&n)?;
            Output::new(&build_settings_variants(&v, *theta, None)?, &[net])
        }
        Command::Verify(a) => {
            let mut n = load_net(&a.net)?;
            if let Some(v) = a.visibility {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(Error::Domain(format!("visibility {v} outside (0, 1]")));
                }
                n.sources.iter_mut().filter(|s| s.is_entangled()).for_each(|s| s.visibility = v);
            }
            let r = if a.optimize { bell::optimize_theta(&n)?.1 } else { bell::evaluate(&n, a.theta.unwrap_or(FRAC_PI_4))? };
            let mut o = Output::new(&r, &[&a.net])?;
            o.table = Some(bell_table(&r));
            Ok(o)
        }
        Command::Visibility { net } => Output::new(&bell::visibility_threshold(&load_net(net)?)?, &[net]),
        Command::Born { net, plan } => {
            let n = load_net(net)?;
            let p: SettingsPlan = serde_json::from_str(&std::fs::read_to_string(plan)?)?;
            let v = transform::prepare_variants(&n)?;
            if p.inputs.len() != n.parties {
                return Err(Error::Domain(format!("plan has {} parties, network {}", p.inputs.len(), n.parties)));
            }
            if p.inputs.iter().flatten().any(|pi| pi.variant >= v.nets.len()) {
                return Err(Error::Domain("plan refers to a variant the network does not have".into()));
            }
            let p = full_precision(&v, p)?;
            let d = born_distribution(v.last(), &p.physical_inputs(&v), dl)?;
            Ok(Output { value: d.to_json_value(), table: None, inputs: vec![net.clone(), plan.clone()], seed: None, ok: true })
        }
        Command::Keyrate { net, theta, key_inputs } => {
            let n = load_net(net)?;
            let varpi = bell::evaluate(&n, *theta)?.value;
            let (plan, dist) = bell::observed_statistics(&n, *theta, dl)?;
            let key = match key_inputs {
                Some(k) => k.clone(),
                None => bell::all_z_inputs(&plan).ok_or_else(|| Error::Domain("no all-Z input for some party; pass --key-inputs".into()))?,
            };
            let r = bounds::key_rate(varpi, &dist, &key)?;
            Output::new(&json!({ "varpi": varpi, "key_inputs": key, "rate": r }), &[net])
        }
        Command::Monogamy { n, varpi } => {
            let b = bounds::monogamy_bound(*n, *varpi)?;
            Output::new(&json!({ "n": n, "varpi": varpi, "alpha": bounds::monogamy_alpha(*n), "bound": b }), &[])
        }
        Command::Sos { varpi, trials, seed } => {
            let mut o = Output::new(&bounds::verify_sos_certificate(*varpi, *trials, *seed)?, &[])?;
            o.seed = Some(*seed);
            Ok(o)
        }
        Command::Lp { problem } => {
            let s = nslp::solve(&load_problem(problem)?)?;
            Output::new(&json!({ "status": s.status, "optimum": s.optimum, "residual": s.residual, "iterations": s.iterations, "argument": s.argument }), &[problem])
        }
        Command::LpSweep { problem, floors } => {
            let pts = nslp::sweep(&load_problem(problem)?, floors)?;
            let mut o = Output::new(&pts, &[problem])?;
            let items: Vec<Value> = pts.iter().map(|p| serde_json::to_value(p).expect("serializes")).collect();
            o.table = Some(Table::from_objects(&["floor", "status", "optimum"], &items).render());
            Ok(o)
        }
        Command::Simulate { k, theta_a, theta_b, samples, seed } => {
            let (result, value) = if *k == 1 {
                let r = sim::simulate_singlet(sim::xz(*theta_a), sim::xz(*theta_b), *samples, *seed)?;
                (r.clone(), serde_json::to_value(&r)?)
            } else {
                let r = sim::compose_chain(&SimConfig { k: *k, theta_a: *theta_a, theta_b: *theta_b, samples: *samples, seed: *seed })?;
                (r.result.clone(), serde_json::to_value(&r)?)
            };
            let t = Table::from_objects(&["estimate", "target", "stderr", "bits_per_round", "analytic_only"], &[serde_json::to_value(&result)?]);
            Ok(Output { value, table: Some(t.render()), inputs: vec![], seed: Some(*seed), ok: true })
        }
        Command::Accept { ids } => {
            let outcomes: Vec<accept::Outcome> = if ids.is_empty() {
                accept::IDS.iter().map(|id| run_printing(id)).collect()
            } else {
                ids.iter().map(|id| run_printing(id)).collect()
            };
            let ok = outcomes.iter().all(|o| o.passed);
            let mut o = Output::new(&outcomes, &[])?;
            o.ok = ok;
            o.table = Some(String::new());
            Ok(o)
        }
    }
}

/// Plans written with 12 significant digits are swapped for the rebuilt
/// plan they agree with, so rounding cannot push norms past 1.
fn full_precision(v: &transform::Variants, p: SettingsPlan) -> Result<SettingsPlan> {
    let Ok(rebuilt) = build_settings_variants(v, p.theta, None) else { return Ok(p) };
    let close = rebuilt.entries.len() == p.entries.len()
        && rebuilt.entries.iter().zip(&p.entries).all(|(a, b)| {
            a.bipartition == b.bipartition && a.variant == b.variant && a.roles == b.roles && (a.theta - b.theta).abs() <= 1e-9
        })
        && rebuilt.inputs.len() == p.inputs.len()
        && rebuilt.inputs.iter().flatten().zip(p.inputs.iter().flatten()).all(|(a, b)| {
            a.variant == b.variant
                && a.observable.party == b.observable.party
                && a.observable.terms.len() == b.observable.terms.len()
                && a.observable.terms.iter().zip(&b.observable.terms).all(|(x, y)| x.1 == y.1 && (x.0 - y.0).abs() <= 1e-9)
        });
    Ok(if close { rebuilt } else { p })
}

fn run_printing(id: &str) -> accept::Outcome {
    let o = accept::run(id).unwrap_or_else(|| accept::Outcome { id: id.into(), passed: false, detail: "unknown criterion".into(), seconds: 0.0 });
    eprintln!("{} {}  {}  ({:.2} s)", o.id, if o.passed { "PASS" } else { "FAIL" }, o.detail, o.seconds);
    o
}

fn command_name(c: &Command) -> String {
    let v = serde_json::to_value(c).expect("serializes");
    match v {
        Value::Object(m) => m.keys().next().cloned().unwrap_or_default(),
        Value::String(s) => s,
        _ => String::new(),
    }
    .to_lowercase()
}

fn flags(c: &Command) -> BTreeMap<String, Value> {
    match serde_json::to_value(c).expect("serializes") {
        Value::Object(m) => match m.into_iter().next().map(|(_, v)| v) {
            Some(Value::Object(f)) => f.into_iter().collect(),
            _ => BTreeMap::new(),
        },
        _ => BTreeMap::new(),
    }
}

/// Runs one command; returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let out = execute(cli)?;
    let text = match cli.format {
        Format::Json => report::canonical_json(&out.value),
        Format::Table => out.table.clone().unwrap_or_else(|| report::value_table(&out.value)),
    };
    let name = command_name(&cli.command);
    let mut manifest = RunManifest {
        command: name.clone(),
        input_files: out.inputs.iter().map(|p| p.display().to_string()).collect(),
        flags: flags(&cli.command),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: out.seed,
        outputs: vec!["stdout".into()],
    };
    std::io::stdout().write_all(text.as_bytes())?;
    match &cli.manifest_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let ext = if cli.format == Format::Json { "json" } else { "txt" };
            let result = dir.join(format!("{name}.{ext}"));
            std::fs::write(&result, &text)?;
            manifest.outputs.push(result.display().to_string());
            std::fs::write(dir.join(format!("{name}.manifest.json")), report::to_canonical(&manifest)?)?;
        }
        None => {
            let line = serde_json::to_string(&manifest)?;
            eprintln!("manifest: {line}");
        }
    }
    Ok(out.ok)
}
