//! Command-line front end: Monte Carlo sweeps, analytic curves, named
//! experiment presets, the efficiency comparison table, and codec table
//! dumps. Results are plain CSV for external plotting; every run writes a
//! manifest that reproduces it exactly.

mod config;
mod presets;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use noma_ie::codec::{NomaIeCodec, SubblockGeometry};
use noma_ie::metrics::{comparison_csv, SchemeKind, SchemeSpec, DEFAULT_CP, DEFAULT_N_T};

use config::{build_config, parse_pairs, RunConfig};
use runner::{execute, RunMode};

/// CLI failure classes; the process exit code depends on the class.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments (exit code 2).
    Config(String),
    /// Numerical failure while evaluating analytic expressions (exit 3).
    Numeric(String),
    /// Filesystem trouble (exit 1).
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Numeric(msg) => write!(f, "{msg}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<noma_ie::Error> for CliError {
    fn from(e: noma_ie::Error) -> Self {
        match e {
            noma_ie::Error::Quadrature(_) => CliError::Numeric(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "noma-ie",
    version,
    about = "Link-level BER simulator and analytic calculator for two-user \
             power-domain superposition with index-modulated envelopes"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Scenario keys as flags; every flag overrides the matching file entry.
#[derive(Args, Clone)]
struct RunArgs {
    /// Plain-text `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// noma-ie | ofdm-noma | im-noma | ofdm-ask
    #[arg(long)]
    scheme: Option<String>,
    /// Subcarriers per subblock.
    #[arg(long)]
    l: Option<String>,
    /// Far-user active subcarriers.
    #[arg(long)]
    k_f: Option<String>,
    /// Near-user active subcarriers.
    #[arg(long)]
    k_n: Option<String>,
    /// Far-user placement bits lent to the near user.
    #[arg(long)]
    delta_m_n: Option<String>,
    /// Far user's power share, in (0.5, 1).
    #[arg(long)]
    a_f: Option<String>,
    /// Total transmit power.
    #[arg(long)]
    p_max: Option<String>,
    /// Envelope detection coefficient: a number or `feasible`.
    #[arg(long)]
    beta_e: Option<String>,
    /// Far-user average channel gain in dB.
    #[arg(long)]
    omega_f_db: Option<String>,
    /// Near-user average channel gain in dB.
    #[arg(long)]
    omega_n_db: Option<String>,
    /// max-power | reallocation
    #[arg(long)]
    policy: Option<String>,
    /// envelope | genie
    #[arg(long)]
    sic: Option<String>,
    /// Stream seed for reproducible noise and fading.
    #[arg(long)]
    seed: Option<String>,
    /// SNR grid: `a,b,c` or `start:step:stop`.
    #[arg(long)]
    snr_db: Option<String>,
    /// Per-user bit-error target per SNR point.
    #[arg(long)]
    target_errors: Option<String>,
    /// Per-user bit budget per SNR point.
    #[arg(long)]
    max_bits: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// File stem for the CSVs and manifest.
    #[arg(long)]
    stem: Option<String>,
    /// Suppress progress output.
    #[arg(long, short)]
    quiet: bool,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut pairs = Vec::new();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            pairs.extend(parse_pairs(&text)?);
        }
        let flags: [(&str, &Option<String>); 16] = [
            ("scheme", &self.scheme),
            ("l", &self.l),
            ("k_f", &self.k_f),
            ("k_n", &self.k_n),
            ("delta_m_n", &self.delta_m_n),
            ("a_f", &self.a_f),
            ("p_max", &self.p_max),
            ("beta_e", &self.beta_e),
            ("omega_f_db", &self.omega_f_db),
            ("omega_n_db", &self.omega_n_db),
            ("policy", &self.policy),
            ("sic", &self.sic),
            ("seed", &self.seed),
            ("snr_db", &self.snr_db),
            ("target_errors", &self.target_errors),
            ("max_bits", &self.max_bits),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                pairs.push((key.to_string(), v.clone()));
            }
        }
        Ok(build_config(pairs)?)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a Monte Carlo BER sweep and write per-user CSVs plus a manifest.
    Simulate(RunArgs),
    /// Evaluate the analytic BER curves and write per-user CSVs plus a
    /// manifest.
    Theory(RunArgs),
    /// Run a named experiment preset (fig3a, fig3b, fig4, fig5a, fig5b,
    /// fig6, fig7, fig8, table2).
    Preset {
        name: String,
        /// Root output directory; files go to `<out>/<name>/`.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Suppress progress output.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Print the spectral/energy efficiency comparison table.
    Table2 {
        /// Far user's power share used for the superposed schemes.
        #[arg(long, default_value_t = 0.75)]
        a_f: f64,
        /// Also write the table to `<out>/table2.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the joint activation-pattern table of the nested codec.
    Mapdump {
        /// Subcarriers per subblock.
        #[arg(long, default_value_t = 4)]
        l: usize,
        /// Far-user active subcarriers.
        #[arg(long, default_value_t = 3)]
        k_f: usize,
        /// Near-user active subcarriers.
        #[arg(long, default_value_t = 2)]
        k_n: usize,
    },
}

/// Efficiency comparison rows for the five transmission schemes at BPSK-class
/// modulation (4-ASK for the single-user reference).
pub fn table2_csv(a_f: f64, p_max: f64) -> Result<String, CliError> {
    let rows = [
        ("ofdm", SchemeKind::Ofdm { m: 4 }),
        ("ofdm-noma", SchemeKind::OfdmNoma { m_f: 2, m_n: 2 }),
        ("ofdm-im", SchemeKind::OfdmIm { l: 4, k: 2, m: 2 }),
        (
            "im-noma",
            SchemeKind::ImNoma {
                l: 4,
                k_f: 2,
                k_n: 2,
                m_f: 2,
                m_n: 2,
                a_f,
            },
        ),
        (
            "noma-ie",
            SchemeKind::NomaIe {
                l: 4,
                k_f: 3,
                k_n: 2,
                m_f: 2,
                m_n: 2,
                a_f,
            },
        ),
    ];
    let specs: Result<Vec<(&str, SchemeSpec)>, noma_ie::Error> = rows
        .into_iter()
        .map(|(label, kind)| Ok((label, SchemeSpec::new(kind, DEFAULT_N_T, DEFAULT_CP, p_max)?)))
        .collect();
    Ok(comparison_csv(&specs?)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Simulate(args) => {
            let cfg = args.load()?;
            let stem = args
                .stem
                .clone()
                .unwrap_or_else(|| format!("sim-{}", cfg.scheme.label()));
            let paths = execute(&cfg, RunMode::Sim, &args.out, &stem, &[], args.quiet)?;
            for p in paths {
                println!("{}", p.display());
            }
        }
        Cmd::Theory(args) => {
            let cfg = args.load()?;
            let stem = args
                .stem
                .clone()
                .unwrap_or_else(|| format!("theory-{}", cfg.scheme.label()));
            let paths = execute(&cfg, RunMode::Theory, &args.out, &stem, &[], args.quiet)?;
            for p in paths {
                println!("{}", p.display());
            }
        }
        Cmd::Preset { name, out, quiet } => {
            let paths = presets::run_preset(&name, &out, quiet)?;
            for p in paths {
                println!("{}", p.display());
            }
        }
        Cmd::Table2 { a_f, out } => {
            if !(a_f > 0.5 && a_f < 1.0) {
                return Err(CliError::Config(format!(
                    "key `a_f`: a_F must exceed a_N, so a_F must lie in (0.5, 1); got {a_f}"
                )));
            }
            let csv = table2_csv(a_f, 1.0)?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    let path = dir.join("table2.csv");
                    std::fs::write(&path, &csv)?;
                    println!("{}", path.display());
                }
                None => print!("{csv}"),
            }
        }
        Cmd::Mapdump { l, k_f, k_n } => {
            let codec = NomaIeCodec::new(SubblockGeometry::new(l, k_f, k_n)?)?;
            print!("{}", codec.table_csv());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
