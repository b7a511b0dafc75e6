//! Monte Carlo link-level simulator.
//!
//! One trial is one subblock: draw both users' payload bits, map, superpose,
//! push through independent Rayleigh channels to each receiver, detect, and
//! count bit errors split by error case. Trials are keyed by a counter-based
//! RNG stream so any parallel execution order produces identical results,
//! and the same trial index reuses the same fading/noise draws at every SNR
//! point (noise only scales).

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codec::{ImNomaCodec, NomaIeCodec, SubblockGeometry};
use crate::detect::{e_detect_nu, e_sic_detect, fu_detect, ml_scan, sic_subtract};
use crate::metrics::{PointTally, PowerPolicy, UserTally};
use crate::phy::{
    draw_channel, draw_noise, feasible_beta, noise_power_from_snr_db, power_reallocation_scale,
    receive, superpose, PowerAllocation,
};
use crate::{Error, Result};

/// Which transmission scheme a scenario simulates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimScheme {
    /// Nested-activation superposition with bit borrowing (the scheme under
    /// study).
    NomaIe {
        l: usize,
        k_f: usize,
        k_n: usize,
        delta_m_n: u32,
    },
    /// Power-domain superposition with every subcarrier active for both
    /// users (no index bits).
    OfdmNoma { l: usize },
    /// Superposition of two independently index-modulated users, each
    /// activating 2 of 4 subcarriers from the published four-pattern table.
    ImNoma,
    /// Orthogonal benchmark: the pair splits four subcarriers two each and
    /// transmits 4-ASK on its own half (no superposition).
    OfdmAsk,
}

impl SimScheme {
    pub fn label(self) -> &'static str {
        match self {
            SimScheme::NomaIe { .. } => "noma-ie",
            SimScheme::OfdmNoma { .. } => "ofdm-noma",
            SimScheme::ImNoma => "im-noma",
            SimScheme::OfdmAsk => "ofdm-ask",
        }
    }
}

/// How the envelope detection coefficient is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BetaPolicy {
    /// The floor-free value (alpha_F - alpha_N) / alpha_F.
    Feasible,
    Fixed(f64),
}

/// Whether SIC subtracts the detected or the true far-user subblock.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SicMode {
    Envelope,
    Genie,
}

/// Everything needed to reproduce a simulation run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scheme: SimScheme,
    pub a_f: f64,
    pub p_max: f64,
    pub beta: BetaPolicy,
    pub omega_f_db: f64,
    pub omega_n_db: f64,
    pub policy: PowerPolicy,
    pub sic: SicMode,
    pub seed: u64,
    /// Stop a point once every user has at least this many bit errors...
    pub target_errors: u64,
    /// ...or has transmitted this many bits, whichever comes first.
    pub max_bits: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scheme: SimScheme::NomaIe {
                l: 4,
                k_f: 3,
                k_n: 2,
                delta_m_n: 1,
            },
            a_f: 0.75,
            p_max: 1.0,
            beta: BetaPolicy::Feasible,
            omega_f_db: -6.0,
            omega_n_db: 0.0,
            policy: PowerPolicy::MaxPower,
            sic: SicMode::Envelope,
            seed: 1,
            target_errors: 400,
            max_bits: 100_000_000,
        }
    }
}

enum Kernel {
    NomaIe { codec: NomaIeCodec, delta: u32 },
    OfdmNoma { l: usize },
    ImNoma { codec: ImNomaCodec },
    OfdmAsk { levels: [f64; 4] },
}

/// A validated, precompiled scenario: codebooks built, reallocation applied
/// to the transmit amplitudes, detection coefficient resolved.
pub struct Scenario {
    config: ScenarioConfig,
    kernel: Kernel,
    tx_alloc: PowerAllocation,
    beta_e: f64,
    omega_f: f64,
    omega_n: f64,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        let alloc = PowerAllocation::with_p_max(config.a_f, config.p_max)?;
        let beta_e = match config.beta {
            BetaPolicy::Feasible => feasible_beta(&alloc),
            BetaPolicy::Fixed(v) => {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Config(format!(
                        "envelope detection coefficient must be positive, got {v}"
                    )));
                }
                v
            }
        };
        if config.target_errors == 0 || config.max_bits == 0 {
            return Err(Error::Config("stopping rule needs positive targets".into()));
        }
        let (kernel, scale) = match config.scheme {
            SimScheme::NomaIe {
                l,
                k_f,
                k_n,
                delta_m_n,
            } => {
                let geom = SubblockGeometry::new(l, k_f, k_n)?;
                if delta_m_n > geom.fu_index_bits() {
                    return Err(Error::Config(format!(
                        "cannot borrow {delta_m_n} of {} far-user index bits",
                        geom.fu_index_bits()
                    )));
                }
                let scale = match config.policy {
                    PowerPolicy::MaxPower => 1.0,
                    PowerPolicy::Reallocation => power_reallocation_scale(&alloc, &geom)?,
                };
                (
                    Kernel::NomaIe {
                        codec: NomaIeCodec::new(geom)?,
                        delta: delta_m_n,
                    },
                    scale,
                )
            }
            SimScheme::OfdmNoma { l } => {
                if l == 0 || l > 24 {
                    return Err(Error::Geometry(format!(
                        "subblock length must lie in 1..=24, got {l}"
                    )));
                }
                // Full activation leaves no power to reallocate.
                (Kernel::OfdmNoma { l }, 1.0)
            }
            SimScheme::ImNoma => {
                let geom = SubblockGeometry::new(ImNomaCodec::L, ImNomaCodec::K, ImNomaCodec::K)?;
                let scale = match config.policy {
                    PowerPolicy::MaxPower => 1.0,
                    PowerPolicy::Reallocation => power_reallocation_scale(&alloc, &geom)?,
                };
                (
                    Kernel::ImNoma {
                        codec: ImNomaCodec::new(),
                    },
                    scale,
                )
            }
            SimScheme::OfdmAsk => {
                // Peak-power-normalised unipolar 4-ASK amplitudes in
                // amplitude-rank order; always-on subcarriers, nothing to
                // reallocate.
                let peak = config.p_max.sqrt();
                (
                    Kernel::OfdmAsk {
                        levels: [0.0, peak / 3.0, 2.0 * peak / 3.0, peak],
                    },
                    1.0,
                )
            }
        };
        let tx_alloc =
            PowerAllocation::with_p_max(config.a_f, config.p_max * scale * scale)?;
        Ok(Self {
            kernel,
            tx_alloc,
            beta_e,
            omega_f: crate::phy::db_to_linear(config.omega_f_db),
            omega_n: crate::phy::db_to_linear(config.omega_n_db),
            config,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    /// The resolved envelope detection coefficient.
    pub fn beta_e(&self) -> f64 {
        self.beta_e
    }

    /// Effective transmit amplitudes after any power reallocation.
    pub fn amplitudes(&self) -> (f64, f64) {
        (self.tx_alloc.alpha_f(), self.tx_alloc.alpha_n())
    }

    /// Bits each user is charged per trial (borrowing included).
    pub fn bits_per_trial(&self) -> (u64, u64) {
        match &self.kernel {
            Kernel::NomaIe { codec, delta } => {
                let g = codec.geometry();
                (
                    (g.fu_bits() - delta) as u64,
                    (g.nu_bits() + delta) as u64,
                )
            }
            Kernel::OfdmNoma { l } => (*l as u64, *l as u64),
            Kernel::ImNoma { codec } => {
                (codec.user_bits() as u64, codec.user_bits() as u64)
            }
            Kernel::OfdmAsk { .. } => (4, 4),
        }
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn draw_bits(rng: &mut ChaCha8Rng, bits: u32) -> usize {
    debug_assert!(bits < 63);
    rng.gen_range(0..(1u64 << bits)) as usize
}

fn bpsk_int(word: usize, width: usize, pos: usize) -> f64 {
    // MSB-first bit string; bit 0 -> +1, bit 1 -> -1.
    if (word >> (width - 1 - pos)) & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

fn case_split(pattern_matched: bool, idx_err: u64, sym_err: u64) -> (u64, u64) {
    if pattern_matched {
        (idx_err, sym_err)
    } else {
        (idx_err + sym_err, 0)
    }
}

/// Runs one subblock through the whole chain and returns both users' error
/// counts. Deterministic in (scenario seed, trial index); the noise power
/// `n0` only scales the pre-drawn noise, so different SNR points share
/// their randomness.
pub fn run_trial(s: &Scenario, n0: f64, trial: u64) -> PointTally {
    let mut rng = trial_rng(s.config.seed, trial);
    let (alpha_f, alpha_n) = s.amplitudes();
    let (fu_bits, nu_bits) = s.bits_per_trial();
    match &s.kernel {
        Kernel::NomaIe { codec, delta } => {
            let g = codec.geometry();
            let (l, k_f, k_n) = (g.l(), g.k_f(), g.k_n());
            let r = draw_bits(&mut rng, g.fu_index_bits());
            let s_f = draw_bits(&mut rng, k_f as u32);
            let v = draw_bits(&mut rng, g.nu_index_bits());
            let s_n = draw_bits(&mut rng, k_n as u32);
            let chi_f = codec.fu_realizations();
            let x_f = &chi_f[(r << k_f) | s_f];
            let x_n = &codec.nu_realizations(r)[(v << k_n) | s_n];
            let x = superpose(&x_f.vector, &x_n.vector, &s.tx_alloc).expect("equal lengths");

            let h_f = draw_channel(&mut rng, l, s.omega_f).expect("positive gain");
            let h_n = draw_channel(&mut rng, l, s.omega_n).expect("positive gain");
            let w_f = draw_noise(&mut rng, l, n0).expect("positive noise");
            let w_n = draw_noise(&mut rng, l, n0).expect("positive noise");
            let y_f = receive(&x, &h_f, &w_f).expect("equal lengths");
            let y_n = receive(&x, &h_n, &w_n).expect("equal lengths");

            let det_f = &chi_f[fu_detect(&y_f, &h_f, s.beta_e, alpha_f, chi_f)];
            let sic = match s.config.sic {
                SicMode::Envelope => {
                    &chi_f[e_sic_detect(&y_n, &h_n, s.beta_e, alpha_f, chi_f)]
                }
                SicMode::Genie => x_f,
            };
            let y_sic = sic_subtract(&y_n, &h_n, alpha_f, &sic.vector);
            let chi_n = codec.nu_realizations(sic.pattern_rank);
            let support = codec.fu_pattern(sic.pattern_rank);
            let det_n = &chi_n[e_detect_nu(&y_sic, &h_n, alpha_n, chi_n, support)];

            // Far user owns the high index bits; the low `delta` bits are
            // lent to the near user and recovered through its SIC stage.
            let idx_xor = (r ^ det_f.pattern_rank) as u64;
            let fu_idx = (idx_xor >> delta).count_ones() as u64;
            let fu_sym = ((s_f ^ det_f.symbol_index) as u64).count_ones() as u64;
            let (fu_e1, fu_e2) = case_split(det_f.pattern_rank == r, fu_idx, fu_sym);

            let nu_idx = ((v ^ det_n.pattern_rank) as u64).count_ones() as u64;
            let nu_sym = ((s_n ^ det_n.symbol_index) as u64).count_ones() as u64;
            let borrowed = ((r ^ sic.pattern_rank) as u64 & ((1u64 << delta) - 1)).count_ones()
                as u64;
            let (nu_e1, nu_e2) = case_split(det_n.mask == x_n.mask, nu_idx, nu_sym);

            PointTally {
                fu: UserTally {
                    bits: fu_bits,
                    errors_case1: fu_e1,
                    errors_case2: fu_e2,
                    errors_borrowed: 0,
                },
                nu: UserTally {
                    bits: nu_bits,
                    errors_case1: nu_e1,
                    errors_case2: nu_e2,
                    errors_borrowed: borrowed,
                },
            }
        }
        Kernel::OfdmNoma { l } => {
            let l = *l;
            let s_f = draw_bits(&mut rng, l as u32);
            let s_n = draw_bits(&mut rng, l as u32);
            let x: Vec<Complex64> = (0..l)
                .map(|i| {
                    Complex64::new(
                        alpha_f * bpsk_int(s_f, l, i) + alpha_n * bpsk_int(s_n, l, i),
                        0.0,
                    )
                })
                .collect();
            let h_f = draw_channel(&mut rng, l, s.omega_f).expect("positive gain");
            let h_n = draw_channel(&mut rng, l, s.omega_n).expect("positive gain");
            let w_f = draw_noise(&mut rng, l, n0).expect("positive noise");
            let w_n = draw_noise(&mut rng, l, n0).expect("positive noise");
            let y_f = receive(&x, &h_f, &w_f).expect("equal lengths");
            let y_n = receive(&x, &h_n, &w_n).expect("equal lengths");

            // With every subcarrier active the joint scan factorises into
            // per-subcarrier sign decisions, independent of any positive
            // hypothesis amplitude (the detection coefficient cannot matter).
            let sign_bits = |y: &[Complex64], h: &[Complex64]| -> usize {
                let mut word = 0usize;
                for i in 0..l {
                    let aligned = (y[i] * h[i].conj()).re;
                    word = (word << 1) | usize::from(aligned < 0.0);
                }
                word
            };
            let det_f = sign_bits(&y_f, &h_f);
            let sic = match s.config.sic {
                SicMode::Envelope => sign_bits(&y_n, &h_n),
                SicMode::Genie => s_f,
            };
            let resid: Vec<Complex64> = y_n
                .iter()
                .zip(&h_n)
                .enumerate()
                .map(|(i, (y, h))| y - alpha_f * bpsk_int(sic, l, i) * h)
                .collect();
            let det_n = sign_bits(&resid, &h_n);

            PointTally {
                fu: UserTally {
                    bits: fu_bits,
                    errors_case2: ((s_f ^ det_f) as u64).count_ones() as u64,
                    ..Default::default()
                },
                nu: UserTally {
                    bits: nu_bits,
                    errors_case2: ((s_n ^ det_n) as u64).count_ones() as u64,
                    ..Default::default()
                },
            }
        }
        Kernel::ImNoma { codec } => {
            let l = ImNomaCodec::L;
            let r_f = draw_bits(&mut rng, codec.index_bits());
            let s_f = draw_bits(&mut rng, ImNomaCodec::K as u32);
            let r_n = draw_bits(&mut rng, codec.index_bits());
            let s_n = draw_bits(&mut rng, ImNomaCodec::K as u32);
            let chi = codec.realizations();
            let x_f = &chi[(r_f << ImNomaCodec::K) | s_f];
            let x_n = &chi[(r_n << ImNomaCodec::K) | s_n];
            let x = superpose(&x_f.vector, &x_n.vector, &s.tx_alloc).expect("equal lengths");

            let h_f = draw_channel(&mut rng, l, s.omega_f).expect("positive gain");
            let h_n = draw_channel(&mut rng, l, s.omega_n).expect("positive gain");
            let w_f = draw_noise(&mut rng, l, n0).expect("positive noise");
            let w_n = draw_noise(&mut rng, l, n0).expect("positive noise");
            let y_f = receive(&x, &h_f, &w_f).expect("equal lengths");
            let y_n = receive(&x, &h_n, &w_n).expect("equal lengths");

            let det_f = &chi[fu_detect(&y_f, &h_f, s.beta_e, alpha_f, chi)];
            let sic = match s.config.sic {
                SicMode::Envelope => &chi[e_sic_detect(&y_n, &h_n, s.beta_e, alpha_f, chi)],
                SicMode::Genie => x_f,
            };
            let y_sic = sic_subtract(&y_n, &h_n, alpha_f, &sic.vector);
            // Independent patterns: the near user's scan cannot be support-
            // restricted, it searches the full codebook.
            let det_n = &chi[ml_scan(&y_sic, &h_n, alpha_n, chi, None)];

            let fu_idx = ((r_f ^ det_f.pattern_rank) as u64).count_ones() as u64;
            let fu_sym = ((s_f ^ det_f.symbol_index) as u64).count_ones() as u64;
            let (fu_e1, fu_e2) = case_split(det_f.pattern_rank == r_f, fu_idx, fu_sym);
            let nu_idx = ((r_n ^ det_n.pattern_rank) as u64).count_ones() as u64;
            let nu_sym = ((s_n ^ det_n.symbol_index) as u64).count_ones() as u64;
            let (nu_e1, nu_e2) = case_split(det_n.pattern_rank == r_n, nu_idx, nu_sym);

            PointTally {
                fu: UserTally {
                    bits: fu_bits,
                    errors_case1: fu_e1,
                    errors_case2: fu_e2,
                    errors_borrowed: 0,
                },
                nu: UserTally {
                    bits: nu_bits,
                    errors_case1: nu_e1,
                    errors_case2: nu_e2,
                    errors_borrowed: 0,
                },
            }
        }
        Kernel::OfdmAsk { levels } => {
            // Two subcarriers per user, two Gray-labelled bits per
            // subcarrier; each user rides its own channel.
            let b_f = draw_bits(&mut rng, 4);
            let b_n = draw_bits(&mut rng, 4);
            let h_f = draw_channel(&mut rng, 2, s.omega_f).expect("positive gain");
            let h_n = draw_channel(&mut rng, 2, s.omega_n).expect("positive gain");
            let w_f = draw_noise(&mut rng, 2, n0).expect("positive noise");
            let w_n = draw_noise(&mut rng, 2, n0).expect("positive noise");

            let rank_of = |bits2: usize| bits2 ^ (bits2 >> 1);
            let run_user = |word: usize, h: &[Complex64], w: &[Complex64]| -> u64 {
                let mut errors = 0u64;
                for i in 0..2 {
                    let bits2 = (word >> (2 * (1 - i))) & 3;
                    let y = levels[rank_of(bits2)] * h[i] + w[i];
                    let mut best = 0usize;
                    let mut best_metric = f64::INFINITY;
                    for (g, &a) in levels.iter().enumerate() {
                        let m = (y - a * h[i]).norm_sqr();
                        if m < best_metric {
                            best_metric = m;
                            best = g;
                        }
                    }
                    // The two-bit Gray map is an involution.
                    let det = rank_of(best);
                    errors += ((bits2 ^ det) as u64).count_ones() as u64;
                }
                errors
            };
            PointTally {
                fu: UserTally {
                    bits: fu_bits,
                    errors_case2: run_user(b_f, &h_f, &w_f),
                    ..Default::default()
                },
                nu: UserTally {
                    bits: nu_bits,
                    errors_case2: run_user(b_n, &h_n, &w_n),
                    ..Default::default()
                },
            }
        }
    }
}

/// One simulated operating point.
#[derive(Clone, Copy, Debug)]
pub struct PointResult {
    pub snr_db: f64,
    pub tally: PointTally,
    pub trials: u64,
    pub seconds: f64,
}

fn point_done(tally: &PointTally, target_errors: u64, max_bits: u64) -> bool {
    [tally.fu, tally.nu]
        .iter()
        .all(|u| u.total_errors() >= target_errors || u.bits >= max_bits)
}

/// Accumulates trials at one SNR until every user reaches the error target
/// or the bit cap. Batches grow geometrically; trials are independent and
/// merge through integer sums, so the result does not depend on the parallel
/// schedule.
pub fn run_point(s: &Scenario, snr_db: f64) -> PointResult {
    let start = std::time::Instant::now();
    let n0 = noise_power_from_snr_db(s.config.p_max, snr_db);
    let mut tally = PointTally::default();
    let mut next_trial = 0u64;
    let mut batch = 4096u64;
    while !point_done(&tally, s.config.target_errors, s.config.max_bits) {
        let part = (next_trial..next_trial + batch)
            .into_par_iter()
            .map(|t| run_trial(s, n0, t))
            .reduce(PointTally::default, PointTally::merge);
        tally = tally.merge(part);
        next_trial += batch;
        batch = (batch * 2).min(1 << 21);
    }
    PointResult {
        snr_db,
        tally,
        trials: next_trial,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs every SNR point of a sweep.
pub fn run_sweep(s: &Scenario, snr_db: &[f64]) -> Vec<PointResult> {
    snr_db.iter().map(|&p| run_point(s, p)).collect()
}
