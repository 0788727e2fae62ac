use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracpoisson::lab::{run_experiment, ExperimentConfig, ExperimentId, ExperimentReport};

#[derive(Parser)]
#[command(name = "fplab", version, about = "Fractional Poisson transform experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Linear growth at 0 of the alternating transform of the both-sided shell function
    Diverge(Common),
    /// Local means of T* on [-r, r] and their logarithmic growth exponents
    Growth(Common),
    /// Cauchy ladder of T_(-L,L) and tail decay rates
    Converge(Common),
    /// Weighted L^p, weak-(1,1) and BMO quotients of T*_M
    Norms(Common),
    /// Kernel mass and the size bounds of K_N and its derivative
    KernelBounds(Common),
    /// sup |m_N| over frequencies for growing windows
    Multiplier(Common),
    /// Empirical Cotlar constants
    Cotlar(Common),
    /// One-sided A_1 and A_p weight checks
    Weights(Common),
    /// The Bessel-type contour identity on nine (alpha, z0) pairs
    #[command(name = "lemma21")]
    ContourIdentity(Common),
    /// Normalize a lacunary sequence and compare the transforms
    Normalize {
        #[command(flatten)]
        common: Common,
        /// sequence file with a `# rho x` header and `j a_j v_j` lines
        #[arg(long)]
        sequence: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long)]
    alpha: Option<f64>,
    /// base of the geometric sequence a_j = a^j
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// largest truncation level
    #[arg(long = "M", id = "M")]
    m: Option<i32>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    grid_lo: Option<f64>,
    #[arg(long)]
    grid_hi: Option<f64>,
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    /// output directory for the CSV files and report.txt
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key = value` file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn to_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            experiment: None,
            alpha: self.alpha,
            a: self.a,
            rho: self.rho,
            m: self.m,
            p: self.p,
            q: self.q,
            eps: self.eps,
            grid_lo: self.grid_lo,
            grid_hi: self.grid_hi,
            grid_step: self.grid_step,
            rel_tol: self.rel_tol,
            out: self.out.as_ref().map(|p| p.display().to_string()),
            sequence: None,
        }
    }
}

fn write_report(dir: &Path, rep: &ExperimentReport) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for a in &rep.artifacts {
        fs::write(dir.join(&a.name), &a.content)?;
    }
    fs::write(dir.join("report.txt"), rep.to_text())
}

fn run(cli: Cli) -> Result<bool, String> {
    let (id, common, sequence) = match cli.command {
        Command::Diverge(c) => (ExperimentId::Diverge, c, None),
        Command::Growth(c) => (ExperimentId::Growth, c, None),
        Command::Converge(c) => (ExperimentId::Converge, c, None),
        Command::Norms(c) => (ExperimentId::Norms, c, None),
        Command::KernelBounds(c) => (ExperimentId::KernelBounds, c, None),
        Command::Multiplier(c) => (ExperimentId::Multiplier, c, None),
        Command::Cotlar(c) => (ExperimentId::Cotlar, c, None),
        Command::Weights(c) => (ExperimentId::Weights, c, None),
        Command::ContourIdentity(c) => (ExperimentId::ContourIdentity, c, None),
        Command::Normalize { common, sequence } => (ExperimentId::Normalize, common, sequence),
    };
    let file_cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            ExperimentConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    let mut cfg = file_cfg.overridden_by(&common.to_config());
    if let Some(path) = sequence {
        cfg.sequence = Some(fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?);
    }
    if let Some(e) = cfg.experiment {
        if e != id {
            return Err(format!("config file selects `{e}` but the command is `{id}`"));
        }
    }
    let rep = run_experiment(id, &cfg).map_err(|e| e.to_string())?;
    let out = PathBuf::from(cfg.out.clone().unwrap_or_else(|| format!("out/{id}")));
    write_report(&out, &rep).map_err(|e| format!("{}: {e}", out.display()))?;
    for v in &rep.verdicts {
        println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.criterion, v.detail);
    }
    println!("wrote {} files to {}", rep.artifacts.len() + 1, out.display());
    Ok(rep.all_passed())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
