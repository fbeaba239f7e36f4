//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for unreadable or malformed input (including
//! bad flags), 2 when the analysis itself fails or an assumption is violated.
//! All numbers are written in shortest round-trip form, so outputs are
//! byte-identical for identical inputs.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::builtin;
use crate::error::{Error, Result};
use crate::grid::{self, DynamicsConfig, GridModel};
use crate::matrix;
use crate::network::{check_assumptions, AssembledNetwork, AssumptionReport};
use crate::sensitivity::{self, SensitivityReport};
use crate::spec_file::NetworkSpec;
use crate::stability::{self, MonteCarloConfig, SigmaAssignment};

#[derive(Debug, Parser)]
#[command(name = "gridsens", version, about = "Contingency sensitivity analysis for networks with uncertain links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check nominal stability, invertibility and per-link observability.
    Check(SourceArgs),
    /// Compute F, S, the interaction index and the ranking.
    Analyze {
        #[command(flatten)]
        source: SourceArgs,
        /// Directory for sensitivity.csv and report.txt.
        #[arg(long)]
        out: PathBuf,
    },
    /// Map the stable (σ₁, σ₂) region of a two-link network.
    Region {
        #[command(flatten)]
        source: SourceArgs,
        /// Directory for boundary.csv and rectangles.csv.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = stability::region::DEFAULT_ANGLES)]
        angles: usize,
        #[arg(long, default_value_t = stability::region::DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Monte Carlo estimate of the mean-square growth rate.
    Simulate {
        #[command(flatten)]
        source: SourceArgs,
        /// Comma-separated sigma per link; defaults to the network's own.
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 100)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for growth.csv; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a built-in example: matrices, eigenvalues, F, S and I.
    Example {
        /// Example number (1 or 2).
        number: Option<u8>,
        #[arg(long = "example", conflicts_with = "number")]
        flag: Option<u8>,
    },
}

/// Where the network comes from.
#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Built-in example network (1 or 2).
    #[arg(long, conflicts_with_all = ["network", "case", "config"])]
    pub example: Option<u8>,
    /// JSON network description.
    #[arg(long, conflicts_with_all = ["case", "config"])]
    pub network: Option<PathBuf>,
    /// MATPOWER case file; the bundled 39-bus case when omitted.
    #[arg(long)]
    pub case: Option<PathBuf>,
    /// JSON dynamics configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_input_error() {
        1
    } else {
        2
    }
}

/// Parses `args` and runs the command, writing human-readable output to
/// `stdout`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(code) => code,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            exit_code(&err)
        }
    }
}

fn execute(command: &Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Check(source) => cmd_check(source, out),
        Command::Analyze { source, out: dir } => cmd_analyze(source, dir, out),
        Command::Region { source, out: dir, angles, tol } => cmd_region(source, dir, *angles, *tol, out),
        Command::Simulate { source, sigma, trials, horizon, seed, out: dir } => {
            let config = MonteCarloConfig { trials: *trials, horizon: *horizon, seed: *seed, initial_state: None };
            cmd_simulate(source, sigma.as_deref(), &config, dir.as_deref(), out)
        }
        Command::Example { number, flag } => {
            let n = number.or(*flag).ok_or_else(|| usage("example needs a number (1 or 2)"))?;
            cmd_example(n, out)
        }
    }
}

fn usage(message: &str) -> Error {
    Error::Parse { line: 0, message: format!("usage: {message}") }
}

/// A loaded network plus a description of where it came from.
struct Loaded {
    network: AssembledNetwork,
    provenance: Vec<(&'static str, String)>,
    is_grid: bool,
}

fn load(source: &SourceArgs) -> Result<Loaded> {
    let version = ("version", env!("CARGO_PKG_VERSION").to_string());
    if let Some(n) = source.example {
        let network = builtin::example(n).ok_or_else(|| usage("--example must be 1 or 2"))?;
        return Ok(Loaded { network, provenance: vec![("example", n.to_string()), version], is_grid: false });
    }
    if let Some(path) = &source.network {
        let text = read(path)?;
        let network = NetworkSpec::from_json(&text)?.build()?;
        let provenance = vec![("network", path.display().to_string()), ("network_sha256", sha256(&text)), version];
        return Ok(Loaded { network, provenance, is_grid: false });
    }
    let (case_text, case_name) = match &source.case {
        Some(path) => (read(path)?, path.display().to_string()),
        None => (grid::CASE39.to_string(), "bundled case39".to_string()),
    };
    let (config, config_name, config_hash) = match &source.config {
        Some(path) => {
            let text = read(path)?;
            (DynamicsConfig::from_json(&text)?, path.display().to_string(), sha256(&text))
        }
        None => (DynamicsConfig::default(), "defaults".to_string(), "none".to_string()),
    };
    let case = grid::parse_matpower(&case_text)?;
    log::info!("parsed {case_name}: {} buses, {} generators", case.buses.len(), case.generator_count());
    let model = GridModel::build(&case, &config)?;
    log::info!("reduced network: {} states, {} contingencies", model.network.dim(), model.lines.len());
    Ok(Loaded {
        network: model.network,
        provenance: vec![
            ("case", case_name),
            ("case_sha256", sha256(&case_text)),
            ("config", config_name),
            ("config_sha256", config_hash),
            version,
        ],
        is_grid: true,
    })
}

/// Loads a network that the Gramian-based commands can use.
fn load_stable(source: &SourceArgs) -> Result<Loaded> {
    let loaded = load(source)?;
    if loaded.is_grid {
        if loaded.network.links().is_empty() {
            return Err(Error::Config("no contingency lines given".into()));
        }
        grid::require_stable_swing(&loaded.network)?;
    }
    Ok(loaded)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn sha256(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Shortest decimal that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

fn provenance_lines(p: &[(&str, String)]) -> String {
    p.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
}

fn assumption_lines(report: &AssumptionReport) -> String {
    let mut s = String::new();
    let verdict = |ok: bool| if ok { "ok" } else { "FAIL" };
    let _ = writeln!(s, "spectral radius: {} ({})", num(report.radius), verdict(report.stable()));
    let _ = writeln!(s, "min singular value: {} ({})", num(report.min_singular), verdict(report.lower_bounded()));
    for l in &report.links {
        let _ = writeln!(
            s,
            "link {}: {} (margin {})",
            l.id,
            if l.observable { "observable" } else { "NOT observable" },
            num(l.margin)
        );
    }
    let _ = writeln!(s, "all assumptions hold: {}", if report.all_pass() { "yes" } else { "no" });
    s
}

fn cmd_check(source: &SourceArgs, out: &mut dyn Write) -> Result<i32> {
    let loaded = load(source)?;
    let report = check_assumptions(&loaded.network)?;
    let mut text = provenance_lines(&loaded.provenance);
    let _ = writeln!(text, "state dimension: {}", loaded.network.dim());
    text.push_str(&assumption_lines(&report));
    out.write_all(text.as_bytes())?;
    Ok(if report.all_pass() { 0 } else { 2 })
}

fn sensitivity_csv(report: &SensitivityReport) -> String {
    let mut s = String::from("link,F,S,F_normalized,S_normalized,rank\n");
    for (k, (id, f)) in report.f.iter().enumerate() {
        let _ = writeln!(
            s,
            "{id},{},{},{},{},{}",
            num(*f),
            num(report.s[k].1),
            num(report.normalized_f[k].1),
            num(report.normalized_s[k].1),
            report.rank_of(id).expect("every link is ranked")
        );
    }
    s
}

fn join_ids(ids: &[crate::network::LinkId]) -> String {
    ids.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(", ")
}

fn cmd_analyze(source: &SourceArgs, dir: &Path, out: &mut dyn Write) -> Result<i32> {
    let loaded = load_stable(source)?;
    let assumptions = check_assumptions(&loaded.network)?;
    let report = sensitivity::analyze(&loaded.network)?;
    let mut text = provenance_lines(&loaded.provenance);
    let _ = writeln!(text, "state dimension: {}", loaded.network.dim());
    text.push_str(&assumption_lines(&assumptions));
    let _ = writeln!(text, "interaction index I: {}", num(report.interaction));
    let _ = writeln!(text, "ranking by F (most critical first): {}", join_ids(&report.ranking));
    let _ = writeln!(text, "ranking by S (most critical first): {}", join_ids(&report.s_ranking));
    let _ = writeln!(text, "orderings agree: {}", if report.orderings_agree() { "yes" } else { "no" });
    fs::create_dir_all(dir)?;
    fs::write(dir.join("sensitivity.csv"), sensitivity_csv(&report))?;
    fs::write(dir.join("report.txt"), &text)?;
    out.write_all(text.as_bytes())?;
    Ok(0)
}

fn cmd_region(source: &SourceArgs, dir: &Path, angles: usize, tol: f64, out: &mut dyn Write) -> Result<i32> {
    let loaded = load_stable(source)?;
    let region = stability::feasibility_boundary(&loaded.network, angles, tol)?;
    let mut boundary = String::from("angle,sigma1,sigma2\n");
    for r in &region.rays {
        let _ = writeln!(boundary, "{},{},{}", num(r.angle), num(r.sigma1), num(r.sigma2));
    }
    let mut rects = String::from("name,corner_sigma1,corner_sigma2,area\n");
    for (name, r) in [("uniform", region.uniform_square), ("f_scaled", region.f_scaled), ("s_scaled", region.s_scaled)] {
        let _ = writeln!(rects, "{name},{},{},{}", num(r.corner.0), num(r.corner.1), num(r.area));
    }
    fs::create_dir_all(dir)?;
    fs::write(dir.join("boundary.csv"), &boundary)?;
    fs::write(dir.join("rectangles.csv"), &rects)?;
    let mut text = provenance_lines(&loaded.provenance);
    let _ = writeln!(text, "links: {}, {}", region.links.0, region.links.1);
    let _ = writeln!(text, "single-link bounds: {}, {}", num(region.siso_bounds.0), num(region.siso_bounds.1));
    text.push_str(&rects);
    out.write_all(text.as_bytes())?;
    Ok(0)
}

fn parse_sigmas(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|_| Error::Validation(format!("sigma value {t:?} is not a number")))
        })
        .collect()
}

fn cmd_simulate(
    source: &SourceArgs,
    sigma: Option<&str>,
    config: &MonteCarloConfig,
    dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32> {
    let loaded = load(source)?;
    let net = &loaded.network;
    let sigmas = match sigma {
        Some(text) => SigmaAssignment::new(net, parse_sigmas(text)?)?,
        None => SigmaAssignment::from_network(net),
    };
    let rho = stability::mss_spectral_radius(net, &sigmas)?;
    let result = stability::monte_carlo_growth(net, &sigmas, config)?;
    let mut csv = String::from("t,mean_sq_norm\n");
    for (t, v) in result.mean_sq_norm.iter().enumerate() {
        let _ = writeln!(csv, "{t},{}", num(*v));
    }
    let label = |grows: bool| if grows { "grow" } else { "decay" };
    let _ = writeln!(csv, "# rate={}", num(result.rate));
    let _ = writeln!(csv, "# rate_half_width={}", num(result.half_width));
    let _ = writeln!(csv, "# rho_T={}", num(rho));
    let _ = writeln!(csv, "# classification={}", label(result.grows()));
    let _ = writeln!(csv, "# operator_classification={}", label(rho >= 1.0));
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("growth.csv"), &csv)?;
            let mut text = provenance_lines(&loaded.provenance);
            let _ = writeln!(text, "rate: {} +/- {}", num(result.rate), num(result.half_width));
            let _ = writeln!(text, "rho_T: {}", num(rho));
            let _ = writeln!(text, "classification: {}", label(result.grows()));
            out.write_all(text.as_bytes())?;
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(0)
}

fn cmd_example(n: u8, out: &mut dyn Write) -> Result<i32> {
    let net = builtin::example(n).ok_or_else(|| usage("example must be 1 or 2"))?;
    let mut text = String::new();
    let _ = writeln!(text, "example {n}");
    let _ = writeln!(text, "A =");
    for i in 0..3 {
        let row: Vec<String> = (0..3).map(|j| num(net.state_map()[(i, j)])).collect();
        let _ = writeln!(text, "  [{}]", row.join(", "));
    }
    for d in net.links() {
        let b: Vec<String> = d.b.iter().map(|v| num(*v)).collect();
        let c: Vec<String> = d.c.iter().map(|v| num(*v)).collect();
        let _ = writeln!(text, "{}: B = [{}], C = [{}]", d.id, b.join(", "), c.join(", "));
    }
    let spectrum = matrix::eigenvalues(net.state_map())?;
    let eig: Vec<String> = spectrum
        .eigenvalues
        .iter()
        .map(|e| if e.im == 0.0 { format!("{:.6}", e.re) } else { format!("{:.6}{:+.6}i", e.re, e.im) })
        .collect();
    let _ = writeln!(text, "eigenvalues: {}", eig.join(", "));
    let report = sensitivity::analyze(&net)?;
    for (k, (id, f)) in report.f.iter().enumerate() {
        let _ = writeln!(text, "{id}: F = {}, S = {}", num(*f), num(report.s[k].1));
    }
    let _ = writeln!(text, "interaction index I: {}", num(report.interaction));
    out.write_all(text.as_bytes())?;
    Ok(0)
}
