use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use riemann_lab::cli::{init_threads, run_command};
use riemann_lab::config::{Command, RunConfig};
use riemann_lab::llf::Scheme;
use riemann_lab::{Error, State};

/// Riemann solutions, delta shocks and blow-up checks for a crowding-limited transport system.
///
/// Settings are resolved as defaults, then the --config file, then flags.
#[derive(Parser)]
#[command(name = "riemann-lab", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    rho_bar: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Left state as "rho,u".
    #[arg(long, allow_hyphen_values = true, value_parser = parse_state)]
    left: Option<State>,
    /// Right state as "rho,u".
    #[arg(long, allow_hyphen_values = true, value_parser = parse_state)]
    right: Option<State>,
    /// Run directory for CSV, JSON and plot files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the machine-readable result instead of the text summary.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Case, region label and wave sequence of one Riemann problem.
    Classify(Common),
    /// Region raster and wave-curve overlays for one left state.
    Regions {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
    },
    /// Finite-volume run with snapshots and delta diagnostics.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        cfl: Option<f64>,
        #[arg(long, value_parser = parse_scheme)]
        scheme: Option<Scheme>,
    },
    /// Spectra, invariant regions, heteroclinic orbit and viscous profiles.
    Gspt {
        #[command(flatten)]
        common: Common,
        /// Comma-separated regularization values.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Region census over the 24-case parameter menu.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
    },
}

fn parse_state(s: &str) -> Result<State, String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected rho,u but got {s:?}"))?;
    let rho = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let u = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok(State::new(rho, u))
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown scheme {s:?}; use global_lf or rusanov"))
}

fn load(c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    if let Some(v) = c.rho_bar {
        cfg.params.rho_bar = v;
    }
    if let Some(v) = c.a {
        cfg.params.a = v;
    }
    if c.left.is_some() {
        cfg.left = c.left;
    }
    if c.right.is_some() {
        cfg.right = c.right;
    }
    Ok(cfg)
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn execute(cli: Cli) -> Result<i32, Error> {
    init_threads()?;
    let (cmd, common, cfg) = match cli.cmd {
        Cmd::Classify(c) => (Command::Classify, c.clone(), load(&c)?),
        Cmd::Regions { common, nx, ny } => {
            let mut cfg = load(&common)?;
            cfg.regions.nx = nx.unwrap_or(cfg.regions.nx);
            cfg.regions.ny = ny.unwrap_or(cfg.regions.ny);
            (Command::Regions, common, cfg)
        }
        Cmd::Sweep { common, nx, ny } => {
            let mut cfg = load(&common)?;
            cfg.regions.nx = nx.unwrap_or(cfg.regions.nx);
            cfg.regions.ny = ny.unwrap_or(cfg.regions.ny);
            (Command::Sweep, common, cfg)
        }
        Cmd::Simulate { common, cells, t_end, cfl, scheme } => {
            let mut cfg = load(&common)?;
            let s = &mut cfg.simulate;
            s.n_cells = cells.unwrap_or(s.n_cells);
            s.t_end = t_end.unwrap_or(s.t_end);
            s.cfl = cfl.unwrap_or(s.cfl);
            s.scheme = scheme.unwrap_or(s.scheme);
            (Command::Simulate, common, cfg)
        }
        Cmd::Gspt { common, eps } => {
            let mut cfg = load(&common)?;
            if let Some(e) = eps {
                cfg.gspt.eps = e;
            }
            (Command::Gspt, common, cfg)
        }
    };
    let bundle = run_command(cmd, &cfg)?;
    if common.json {
        let doc = serde_json::json!({
            "command": bundle.command,
            "config_sha256": bundle.hash,
            "data": bundle.json,
            "findings": bundle.findings,
        });
        emit(&format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")));
    } else {
        emit(&bundle.summary);
        for f in &bundle.findings {
            eprintln!("finding [{}]: {}", f.kind, f.message);
        }
    }
    if let Some(dir) = &common.out {
        bundle.write_to(dir)?;
    }
    Ok(bundle.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
