//! Sweep execution and artifact writing shared by the subcommands and the
//! experiment presets: one CSV per user curve plus a manifest per run.

use std::fs;
use std::path::{Path, PathBuf};

use noma_ie::codec::{NomaIeCodec, SubblockGeometry};
use noma_ie::metrics::{csv_header, BerRecord, PointTally, PowerPolicy, Source, User, UserTally};
use noma_ie::phy::{
    db_to_linear, noise_power_from_snr_db, power_reallocation_scale, PowerAllocation,
};
use noma_ie::sim::{run_point, Scenario};
use noma_ie::theory::{
    ber_fu_four, ber_fu_two, ber_nu_four, ber_nu_four_perfect_sic, ber_nu_two, pep_symbol,
    TheoryInputs,
};
use noma_ie::sim::SicMode;
use noma_ie::Error;

use crate::config::{render_manifest, RunConfig, SchemeKey};

/// Whether a run simulates or evaluates the analytic curves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Sim,
    Theory,
}

fn record(
    cfg: &RunConfig,
    beta: f64,
    snr_db: f64,
    user: User,
    tally: UserTally,
    ber: f64,
    source: Source,
) -> BerRecord {
    BerRecord {
        snr_db,
        user,
        scheme: cfg.scheme.label().to_string(),
        beta_e: beta,
        a_f: cfg.a_f,
        tally,
        ber,
        source,
    }
}

/// Runs the Monte Carlo sweep and returns one record per (SNR, user).
/// Progress goes to stderr so stdout stays machine-readable.
pub fn simulate_records(cfg: &RunConfig, quiet: bool) -> Result<Vec<BerRecord>, Error> {
    let scenario = Scenario::new(cfg.scenario())?;
    let beta = scenario.beta_e();
    let mut records = Vec::new();
    for &snr in &cfg.snr_db {
        let point = run_point(&scenario, snr);
        if !quiet {
            eprintln!(
                "  {} snr {:>5} dB: {} trials in {:.1}s, fu {:.3e} nu {:.3e}",
                cfg.scheme.label(),
                snr,
                point.trials,
                point.seconds,
                point.tally.fu.ber().unwrap_or(f64::NAN),
                point.tally.nu.ber().unwrap_or(f64::NAN),
            );
        }
        for (user, tally) in [(User::Fu, point.tally.fu), (User::Nu, point.tally.nu)] {
            let ber = tally.ber()?;
            records.push(record(cfg, beta, snr, user, tally, ber, Source::Sim));
        }
    }
    Ok(records)
}

/// Evaluates the analytic BER curves for the nested-activation scheme at
/// subblock lengths 2 and 4. `sic = genie` selects the perfect-SIC
/// near-user reference curve.
pub fn theory_records(cfg: &RunConfig) -> Result<Vec<BerRecord>, Error> {
    if cfg.scheme != SchemeKey::NomaIe {
        return Err(Error::Config(format!(
            "analytic curves cover only the noma-ie scheme, not `{}`",
            cfg.scheme.label()
        )));
    }
    let alloc = PowerAllocation::with_p_max(cfg.a_f, cfg.p_max)?;
    let beta = cfg.resolved_beta()?;
    let omega_f = db_to_linear(cfg.omega_f_db);
    let omega_n = db_to_linear(cfg.omega_n_db);
    let scale = match cfg.policy {
        PowerPolicy::MaxPower => 1.0,
        PowerPolicy::Reallocation => {
            let geom = SubblockGeometry::new(cfg.l, cfg.k_f, cfg.k_n)?;
            power_reallocation_scale(&alloc, &geom)?
        }
    };
    let mut records = Vec::new();
    match cfg.l {
        2 => {
            if (cfg.k_f, cfg.k_n) != (1, 1) {
                return Err(Error::Config(format!(
                    "two-subcarrier analytic curves require k_f = 1 and k_n = 1, got ({}, {})",
                    cfg.k_f, cfg.k_n
                )));
            }
            if cfg.delta_m_n != 0 {
                return Err(Error::Config(
                    "two-subcarrier analytic curves assume no borrowed bits".into(),
                ));
            }
            for &snr in &cfg.snr_db {
                let n0 = noise_power_from_snr_db(cfg.p_max, snr);
                let inputs = TheoryInputs::new(&alloc, beta, omega_f, omega_n, n0)
                    .with_amplitude_scale(scale);
                let fu = ber_fu_two(&inputs)?;
                let nu = match cfg.sic {
                    SicMode::Envelope => ber_nu_two(&inputs)?,
                    // Perfect subtraction leaves the near user alone on its
                    // own channel: plain symbol decisions.
                    SicMode::Genie => {
                        pep_symbol(inputs.alpha_n, inputs.omega_n, inputs.n0, inputs.policy)
                    }
                };
                records.push(record(cfg, beta, snr, User::Fu, UserTally::default(), fu, Source::Theory));
                records.push(record(cfg, beta, snr, User::Nu, UserTally::default(), nu, Source::Theory));
            }
        }
        4 => {
            let codec = NomaIeCodec::new(SubblockGeometry::new(4, cfg.k_f, cfg.k_n)?)?;
            for &snr in &cfg.snr_db {
                let n0 = noise_power_from_snr_db(cfg.p_max, snr);
                let inputs = TheoryInputs::new(&alloc, beta, omega_f, omega_n, n0)
                    .with_amplitude_scale(scale);
                let fu = ber_fu_four(&inputs, &codec, cfg.delta_m_n)?;
                let nu = match cfg.sic {
                    SicMode::Envelope => ber_nu_four(&inputs, &codec, cfg.delta_m_n)?,
                    SicMode::Genie => ber_nu_four_perfect_sic(&inputs, &codec, cfg.delta_m_n)?,
                };
                records.push(record(cfg, beta, snr, User::Fu, UserTally::default(), fu, Source::Theory));
                records.push(record(cfg, beta, snr, User::Nu, UserTally::default(), nu, Source::Theory));
            }
        }
        other => {
            return Err(Error::Config(format!(
                "analytic curves are available for subblock lengths 2 and 4, got {other}"
            )))
        }
    }
    Ok(records)
}

/// Writes one CSV per user from a record list sharing a stem.
pub fn write_user_csvs(
    records: &[BerRecord],
    dir: &Path,
    stem: &str,
) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for user in [User::Fu, User::Nu] {
        let mut text = String::from(csv_header());
        text.push('\n');
        for r in records.iter().filter(|r| r.user == user) {
            text.push_str(&r.csv_row());
            text.push('\n');
        }
        let path = dir.join(format!("{stem}_{}.csv", user.label()));
        fs::write(&path, text)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Executes a sweep in the given mode and writes `<stem>_fu.csv`,
/// `<stem>_nu.csv`, and the `<stem>.cfg` manifest into `dir`.
pub fn execute(
    cfg: &RunConfig,
    mode: RunMode,
    dir: &Path,
    stem: &str,
    comments: &[&str],
    quiet: bool,
) -> Result<Vec<PathBuf>, crate::CliError> {
    let records = match mode {
        RunMode::Sim => simulate_records(cfg, quiet)?,
        RunMode::Theory => theory_records(cfg)?,
    };
    let mut paths = write_user_csvs(&records, dir, stem)?;
    let manifest_text = render_manifest(cfg, comments);
    // A manifest that failed to reproduce its configuration would poison
    // every downstream rerun, so refuse to write one.
    match crate::config::parse_config(&manifest_text) {
        Ok(back) if back == *cfg => {}
        _ => {
            return Err(crate::CliError::Config(
                "internal error: manifest does not round-trip to its configuration".into(),
            ))
        }
    }
    let manifest = dir.join(format!("{stem}.cfg"));
    fs::write(&manifest, manifest_text)?;
    paths.push(manifest);
    Ok(paths)
}

/// Point result exposed for sweep-over-parameter presets that aggregate
/// rows themselves.
pub fn simulate_single_point(cfg: &RunConfig, snr_db: f64) -> Result<(PointTally, f64), Error> {
    let scenario = Scenario::new(cfg.scenario())?;
    let point = run_point(&scenario, snr_db);
    Ok((point.tally, scenario.beta_e()))
}
