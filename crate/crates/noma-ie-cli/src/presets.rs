//! Named experiment presets covering the standard evaluation scenarios:
//! error-floor demonstrations, analytic-curve validation, configuration
//! comparisons, detection-coefficient and power-split sweeps, benchmark
//! comparisons under power reallocation, and the efficiency table.

use std::fs;
use std::path::{Path, PathBuf};

use noma_ie::metrics::{csv_header, PowerPolicy, Source, User};
use noma_ie::sim::{BetaPolicy, SicMode};

use crate::config::{render_manifest, RunConfig, SchemeKey};
use crate::runner::{execute, simulate_single_point, RunMode};
use crate::table2_csv;
use crate::CliError;

pub const PRESET_NAMES: [&str; 9] = [
    "fig3a", "fig3b", "fig4", "fig5a", "fig5b", "fig6", "fig7", "fig8", "table2",
];

fn two_carrier(a_f: f64) -> RunConfig {
    RunConfig {
        l: 2,
        k_f: 1,
        k_n: 1,
        delta_m_n: 0,
        a_f,
        ..Default::default()
    }
}

fn four_carrier(a_f: f64) -> RunConfig {
    RunConfig {
        l: 4,
        k_f: 3,
        k_n: 2,
        delta_m_n: 1,
        a_f,
        ..Default::default()
    }
}

/// Two-subcarrier BER-vs-SNR set: unit detection coefficient, floor-free
/// coefficient, and the analytic overlay.
fn error_floor_set(a_f: f64, dir: &Path, quiet: bool) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = Vec::new();
    let base = two_carrier(a_f);
    let beta1 = RunConfig {
        beta: BetaPolicy::Fixed(1.0),
        ..base.clone()
    };
    paths.extend(execute(
        &beta1,
        RunMode::Sim,
        dir,
        "sim-beta1",
        &["unit detection coefficient (conventional joint detection)"],
        quiet,
    )?);
    paths.extend(execute(
        &base,
        RunMode::Sim,
        dir,
        "sim-beta-star",
        &["floor-free detection coefficient"],
        quiet,
    )?);
    paths.extend(execute(
        &base,
        RunMode::Theory,
        dir,
        "theory-beta-star",
        &["analytic overlay at the floor-free detection coefficient"],
        quiet,
    )?);
    Ok(paths)
}

/// BER versus the detection coefficient at a fixed SNR, one curve pair per
/// power split. Rows carry the swept coefficient in the `beta_e` column.
fn beta_sweep(dir: &Path, quiet: bool) -> Result<Vec<PathBuf>, CliError> {
    const SNR_DB: f64 = 40.0;
    let betas: Vec<f64> = (0..23).map(|i| 0.1 + 0.05 * i as f64).collect();
    let mut paths = Vec::new();
    for a_f in [0.7, 0.8, 0.9] {
        let stem = format!("a{:03.0}", a_f * 100.0);
        let base = RunConfig {
            snr_db: vec![SNR_DB],
            ..two_carrier(a_f)
        };
        let mut rows_fu = Vec::new();
        let mut rows_nu = Vec::new();
        for &beta in &betas {
            let cfg = RunConfig {
                beta: BetaPolicy::Fixed(beta),
                ..base.clone()
            };
            let (tally, resolved) = simulate_single_point(&cfg, SNR_DB)?;
            if !quiet {
                eprintln!(
                    "  beta sweep a_f {a_f}: beta {resolved:.2} fu {:.3e} nu {:.3e}",
                    tally.fu.ber().unwrap_or(f64::NAN),
                    tally.nu.ber().unwrap_or(f64::NAN)
                );
            }
            for (user, t, rows) in [
                (User::Fu, tally.fu, &mut rows_fu),
                (User::Nu, tally.nu, &mut rows_nu),
            ] {
                rows.push(
                    noma_ie::metrics::BerRecord {
                        snr_db: SNR_DB,
                        user,
                        scheme: SchemeKey::NomaIe.label().to_string(),
                        beta_e: resolved,
                        a_f,
                        tally: t,
                        ber: t.ber()?,
                        source: Source::Sim,
                    }
                    .csv_row(),
                );
            }
        }
        fs::create_dir_all(dir)?;
        for (user, rows) in [("fu", rows_fu), ("nu", rows_nu)] {
            let path = dir.join(format!("{stem}_{user}.csv"));
            let mut text = String::from(csv_header());
            text.push('\n');
            text.push_str(&rows.join("\n"));
            text.push('\n');
            fs::write(&path, text)?;
            paths.push(path);
        }
        let manifest = dir.join(format!("{stem}.cfg"));
        fs::write(
            &manifest,
            render_manifest(
                &base,
                &["detection coefficient swept over 0.1:0.05:1.2; each CSV row records its value in the beta_e column"],
            ),
        )?;
        paths.push(manifest);
    }
    Ok(paths)
}

/// Four-subcarrier validation set: measured and perfect-subtraction
/// receivers against both analytic curves.
fn sic_validation_set(a_f: f64, dir: &Path, quiet: bool) -> Result<Vec<PathBuf>, CliError> {
    let base = four_carrier(a_f);
    let genie = RunConfig {
        sic: SicMode::Genie,
        ..base.clone()
    };
    let mut paths = Vec::new();
    paths.extend(execute(
        &base,
        RunMode::Sim,
        dir,
        "sim-esic",
        &["measured interference cancellation"],
        quiet,
    )?);
    paths.extend(execute(
        &genie,
        RunMode::Sim,
        dir,
        "sim-genie",
        &["perfect interference subtraction reference"],
        quiet,
    )?);
    paths.extend(execute(
        &base,
        RunMode::Theory,
        dir,
        "theory",
        &["analytic curves with modelled cancellation failures"],
        quiet,
    )?);
    paths.extend(execute(
        &genie,
        RunMode::Theory,
        dir,
        "theory-perfect-sic",
        &["analytic near-user curve assuming perfect cancellation"],
        quiet,
    )?);
    Ok(paths)
}

/// Three envelope-forming geometries carrying the same eight bits per
/// subblock, split four and four between the users.
fn geometry_set(dir: &Path, quiet: bool) -> Result<Vec<PathBuf>, CliError> {
    let geometries = [
        ("g432", 3usize, 2usize, 1u32),
        ("g433", 3, 3, 1),
        ("g442", 4, 2, 0),
    ];
    let mut paths = Vec::new();
    for (tag, k_f, k_n, delta) in geometries {
        let cfg = RunConfig {
            k_f,
            k_n,
            delta_m_n: delta,
            ..four_carrier(0.9)
        };
        let comment = format!(
            "geometry (4,{k_f},{k_n}) with {delta} borrowed placement bit(s): eight bits per subblock, four per user"
        );
        paths.extend(execute(
            &cfg,
            RunMode::Sim,
            dir,
            &format!("{tag}-sim"),
            &[&comment],
            quiet,
        )?);
        paths.extend(execute(
            &cfg,
            RunMode::Theory,
            dir,
            &format!("{tag}-theory"),
            &[&comment],
            quiet,
        )?);
    }
    Ok(paths)
}

/// BER versus the far user's power share at a fixed SNR, against the
/// independent-pattern superposition benchmark.
fn power_split_sweep(dir: &Path, quiet: bool) -> Result<Vec<PathBuf>, CliError> {
    const SNR_DB: f64 = 40.0;
    let shares: Vec<f64> = (0..9).map(|i| 0.55 + 0.05 * i as f64).collect();
    let mut paths = Vec::new();
    let runs = [
        ("noma-ie", SchemeKey::NomaIe, BetaPolicy::Feasible),
        ("im-noma", SchemeKey::ImNoma, BetaPolicy::Fixed(1.0)),
    ];
    for (stem, scheme, beta) in runs {
        let mut rows_fu = Vec::new();
        let mut rows_nu = Vec::new();
        for &a_f in &shares {
            let cfg = RunConfig {
                scheme,
                a_f,
                beta,
                snr_db: vec![SNR_DB],
                ..four_carrier(a_f)
            };
            let (tally, resolved) = simulate_single_point(&cfg, SNR_DB)?;
            if !quiet {
                eprintln!(
                    "  power sweep {stem}: a_f {a_f:.2} fu {:.3e} nu {:.3e}",
                    tally.fu.ber().unwrap_or(f64::NAN),
                    tally.nu.ber().unwrap_or(f64::NAN)
                );
            }
            for (user, t, rows) in [
                (User::Fu, tally.fu, &mut rows_fu),
                (User::Nu, tally.nu, &mut rows_nu),
            ] {
                rows.push(
                    noma_ie::metrics::BerRecord {
                        snr_db: SNR_DB,
                        user,
                        scheme: scheme.label().to_string(),
                        beta_e: resolved,
                        a_f,
                        tally: t,
                        ber: t.ber()?,
                        source: Source::Sim,
                    }
                    .csv_row(),
                );
            }
        }
        fs::create_dir_all(dir)?;
        for (user, rows) in [("fu", rows_fu), ("nu", rows_nu)] {
            let path = dir.join(format!("{stem}_{user}.csv"));
            let mut text = String::from(csv_header());
            text.push('\n');
            text.push_str(&rows.join("\n"));
            text.push('\n');
            fs::write(&path, text)?;
            paths.push(path);
        }
        let manifest = dir.join(format!("{stem}.cfg"));
        let cfg = RunConfig {
            scheme,
            beta,
            snr_db: vec![SNR_DB],
            ..four_carrier(0.75)
        };
        fs::write(
            &manifest,
            render_manifest(
                &cfg,
                &["far-user power share swept over 0.55:0.05:0.95; each CSV row records its value in the a_f column"],
            ),
        )?;
        paths.push(manifest);
    }
    Ok(paths)
}

/// Benchmark comparison under power reallocation at equal spectral
/// efficiency: nested-activation superposition, full-activation
/// superposition, and the orthogonal paired 4-ASK reference.
fn benchmark_set(dir: &Path, quiet: bool) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = Vec::new();
    for a_f in [0.75, 0.9] {
        let prefix = format!("a{:03.0}", a_f * 100.0);
        let noma_ie = RunConfig {
            policy: PowerPolicy::Reallocation,
            ..four_carrier(a_f)
        };
        let ofdm_noma = RunConfig {
            scheme: SchemeKey::OfdmNoma,
            policy: PowerPolicy::Reallocation,
            ..four_carrier(a_f)
        };
        let ofdm_ask = RunConfig {
            scheme: SchemeKey::OfdmAsk,
            policy: PowerPolicy::Reallocation,
            ..four_carrier(a_f)
        };
        for (tag, cfg) in [
            ("noma-ie", &noma_ie),
            ("ofdm-noma", &ofdm_noma),
            ("ofdm-ask", &ofdm_ask),
        ] {
            paths.extend(execute(
                cfg,
                RunMode::Sim,
                dir,
                &format!("{prefix}-{tag}"),
                &["equal spectral efficiency: eight bits per four subcarriers"],
                quiet,
            )?);
        }
    }
    Ok(paths)
}

fn efficiency_table(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join("table2.csv");
    fs::write(&path, table2_csv(0.75, 1.0)?)?;
    Ok(vec![path])
}

/// Runs a named preset into `out_root/<name>/` and returns the files
/// written.
pub fn run_preset(name: &str, out_root: &Path, quiet: bool) -> Result<Vec<PathBuf>, CliError> {
    let dir = out_root.join(name);
    match name {
        "fig3a" => error_floor_set(0.75, &dir, quiet),
        "fig3b" => error_floor_set(0.9, &dir, quiet),
        "fig4" => beta_sweep(&dir, quiet),
        "fig5a" => sic_validation_set(0.75, &dir, quiet),
        "fig5b" => sic_validation_set(0.9, &dir, quiet),
        "fig6" => geometry_set(&dir, quiet),
        "fig7" => power_split_sweep(&dir, quiet),
        "fig8" => benchmark_set(&dir, quiet),
        "table2" => efficiency_table(&dir),
        other => Err(CliError::Config(format!(
            "unknown preset `{other}` (expected one of {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}
