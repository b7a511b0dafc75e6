//! Analytic error-rate engine.
//!
//! Everything here is a pairwise-error-probability (PEP) union-bound
//! calculation averaged over Rayleigh fading. Two building blocks cover all
//! cases:
//!
//! * symbol-only errors (activation pattern right, a BPSK sign wrong) average
//!   to closed forms over a single exponential fading power;
//! * index errors (the detector moves an active subcarrier) depend on two
//!   fading powers — the truly active subcarrier and the swap target — and
//!   need one- or two-dimensional quadrature.
//!
//! Subblocks longer than two subcarriers are decomposed into pair terms:
//! each active subcarrier is paired with the single inactive subcarrier,
//! whose fading power is shared by all pairs, giving products of pair-term
//! probabilities under one outer integral.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::codec::{binomial, NomaIeCodec};
use crate::phy::{AmplitudeTriple, PowerAllocation};
use crate::quad::{integrate_exp_weighted_split, EXP_TAIL_CUTOFF};
use crate::{Error, Result};

/// How Q-function evaluations are performed.
///
/// The closed forms only exist under the two-exponential approximation of Q,
/// while the raw integral kernels leave Q symbolic; the default keeps that
/// split. The forced modes exist for sensitivity checks and for comparing
/// integral against closed-form paths on equal footing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QPolicy {
    /// Closed forms use the two-exponential approximation, raw integral
    /// kernels use the exact Q.
    #[default]
    Mixed,
    /// Exact Q everywhere; closed forms switch to exact Rayleigh averages.
    ForceExact,
    /// The two-exponential approximation everywhere.
    ForceApprox,
}

/// Gaussian tail probability via the complementary error function.
pub fn q_exact(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Two-exponential approximation of the Gaussian tail, extended to negative
/// arguments through Q(-x) = 1 - Q(x).
pub fn q_approx(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - q_approx(-x);
    }
    (-x * x / 2.0).exp() / 12.0 + 0.25 * (-2.0 * x * x / 3.0).exp()
}

/// All channel/power parameters the analytic expressions need. Amplitudes
/// are the effective transmit values (any power-reallocation scaling must
/// already be applied via [`TheoryInputs::with_amplitude_scale`]).
#[derive(Clone, Copy, Debug)]
pub struct TheoryInputs {
    pub alpha_f: f64,
    pub alpha_n: f64,
    pub beta_e: f64,
    pub omega_f: f64,
    pub omega_n: f64,
    pub n0: f64,
    pub policy: QPolicy,
}

impl TheoryInputs {
    pub fn new(alloc: &PowerAllocation, beta_e: f64, omega_f: f64, omega_n: f64, n0: f64) -> Self {
        Self {
            alpha_f: alloc.alpha_f(),
            alpha_n: alloc.alpha_n(),
            beta_e,
            omega_f,
            omega_n,
            n0,
            policy: QPolicy::default(),
        }
    }

    pub fn with_policy(mut self, policy: QPolicy) -> Self {
        self.policy = policy;
        self
    }

    /// Scales both user amplitudes, e.g. by the power-reallocation factor.
    pub fn with_amplitude_scale(mut self, scale: f64) -> Self {
        self.alpha_f *= scale;
        self.alpha_n *= scale;
        self
    }

    /// The three superimposed amplitudes under these effective powers.
    pub fn levels(&self) -> AmplitudeTriple {
        AmplitudeTriple::from_amplitudes(self.alpha_f, self.alpha_n)
    }

    fn omega(&self, side: Side) -> f64 {
        match side {
            Side::Fu => self.omega_f,
            Side::Sic => self.omega_n,
        }
    }

    fn level_value(&self, level: Level) -> f64 {
        let t = self.levels();
        match level {
            Level::Minus => t.minus,
            Level::Star => t.star,
            Level::Plus => t.plus,
        }
    }
}

/// Which channel a far-user-subblock detection runs through: the far user's
/// own receiver, or the SIC stage at the near user.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Side {
    Fu,
    Sic,
}

/// Superimposed amplitude class on one active subcarrier: both users with
/// opposed signs, far user alone, both users aligned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Minus,
    Star,
    Plus,
}

fn clamp01(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

fn clamp_ber(b: f64) -> f64 {
    b.clamp(0.0, 0.5)
}

/// Rayleigh-averaged pairwise error probability of a single-subcarrier sign
/// decision at superimposed amplitude `lambda` over average channel power
/// `omega` — the conventional-OFDM PEP.
pub fn pep_conventional(lambda: f64, omega: f64, n0: f64, policy: QPolicy) -> f64 {
    let g = omega * lambda * lambda / n0;
    match policy {
        QPolicy::ForceExact => 0.5 * (1.0 - (g / (1.0 + g)).sqrt()),
        _ => 1.0 / (12.0 * (g + 1.0)) + 0.25 / (4.0 * g / 3.0 + 1.0),
    }
}

/// Symbol-only error within an index-modulated subblock: identical averaging
/// to the conventional per-subcarrier case.
pub fn pep_symbol(lambda: f64, omega: f64, n0: f64, policy: QPolicy) -> f64 {
    pep_conventional(lambda, omega, n0, policy)
}

/// Rayleigh-averaged PEP when the hypothesis pair differs by amplitude
/// `lambda` on `branches` independent subcarriers, combined coherently —
/// diversity order equal to the branch count.
pub fn pep_index_mrc(lambda: f64, omega: f64, n0: f64, branches: u32, policy: QPolicy) -> f64 {
    debug_assert!(branches >= 1);
    match policy {
        QPolicy::ForceExact => {
            let g = omega * lambda * lambda / (4.0 * n0);
            let mu = (g / (1.0 + g)).sqrt();
            let p = 0.5 * (1.0 - mu);
            let mut sum = 0.0;
            for k in 0..branches {
                sum += binomial((branches - 1 + k) as usize, k as usize) as f64
                    * (1.0 - p).powi(k as i32);
            }
            p.powi(branches as i32) * sum
        }
        _ => {
            let g1 = omega * lambda * lambda / (4.0 * n0);
            let g2 = omega * lambda * lambda / (3.0 * n0);
            let d = branches as i32;
            1.0 / (12.0 * (1.0 + g1).powi(d)) + 0.25 / (1.0 + g2).powi(d)
        }
    }
}

/// Rayleigh-averaged PEP when the hypothesis pair differs by amplitude
/// `lambda` on two independent subcarriers (an equal-energy index swap seen
/// over both fading powers) — second-order diversity.
pub fn pep_index_two_branch(lambda: f64, omega: f64, n0: f64, policy: QPolicy) -> f64 {
    pep_index_mrc(lambda, omega, n0, 2, policy)
}

/// High-power limit of the index-swap PEP: with the partner user negligible
/// the difference matrix is diagonal with the lone-user amplitude on both
/// swapped subcarriers, so the two-branch determinant form applies directly.
pub fn pep_index_high_power(inputs: &TheoryInputs) -> f64 {
    pep_index_two_branch(inputs.alpha_f, inputs.omega_f, inputs.n0, inputs.policy)
}

/// Conditional Q argument of an index swap: the truly active subcarrier has
/// unit-mean fading power `u` and superimposed amplitude `lambda`; the swap
/// target has power `v`; both are scaled by the average gain.
fn index_swap_arg(lambda: f64, half_beta_star: f64, omega: f64, n0: f64, u: f64, v: f64) -> f64 {
    let num = (lambda - half_beta_star) * u + half_beta_star * v;
    num * (omega / (n0 * (u + v) / 2.0)).sqrt()
}

fn kernel_q(policy: QPolicy) -> fn(f64) -> f64 {
    match policy {
        QPolicy::ForceApprox => q_approx,
        _ => q_exact,
    }
}

const INNER_TOL: f64 = 1e-10;
const OUTER_TOL: f64 = 1e-9;

/// Geometric ladder of quadrature breakpoints resolving the high-SNR
/// concentration of the swap kernels: their mass sits at fading powers of
/// order n0 / (2 omega lambda^2), far below the unit-mean fading scale, so
/// plain bisection of [0, cutoff] never samples it.
fn fading_scale_breakpoints(inputs: &TheoryInputs, side: Side) -> Vec<f64> {
    let coeff = inputs.levels().plus;
    let scale = inputs.n0 / (2.0 * inputs.omega(side) * coeff * coeff);
    let mut pts = Vec::new();
    if !(scale > 0.0 && scale.is_finite()) {
        return pts;
    }
    let mut s = (scale / 4.0).max(1e-300);
    while s < EXP_TAIL_CUTOFF && pts.len() < 80 {
        pts.push(s);
        s *= 4.0;
    }
    pts
}

fn pep_index_cond_impl(
    inputs: &TheoryInputs,
    side: Side,
    lambda: f64,
    x: f64,
    breakpoints: &[f64],
) -> Result<f64> {
    let q = kernel_q(inputs.policy);
    let omega = inputs.omega(side);
    let b = 0.5 * inputs.beta_e * inputs.alpha_f;
    let n0 = inputs.n0;
    let quad = integrate_exp_weighted_split(
        move |u| q(index_swap_arg(lambda, b, omega, n0, u, x)),
        INNER_TOL,
        breakpoints,
    )?;
    Ok(clamp01(quad.value))
}

fn pep_index_impl(inputs: &TheoryInputs, side: Side, lambda: f64) -> Result<f64> {
    let pts = fading_scale_breakpoints(inputs, side);
    let quad = integrate_exp_weighted_split(
        |x| pep_index_cond_impl(inputs, side, lambda, x, &pts).unwrap_or(f64::NAN),
        OUTER_TOL,
        &pts,
    )?;
    Ok(clamp01(quad.value))
}

/// Index-swap PEP seen by the far user's own detector, averaged over both
/// fading powers.
pub fn pep_index_fu(inputs: &TheoryInputs, lambda: f64) -> Result<f64> {
    pep_index_impl(inputs, Side::Fu, lambda)
}

/// Same swap PEP as [`pep_index_fu`] but conditioned on the swap target's
/// unit-mean fading power `x` — the shared-subcarrier building block of the
/// multi-subcarrier decomposition.
pub fn pep_index_fu_cond(inputs: &TheoryInputs, lambda: f64, x: f64) -> Result<f64> {
    let pts = fading_scale_breakpoints(inputs, Side::Fu);
    pep_index_cond_impl(inputs, Side::Fu, lambda, x, &pts)
}

/// Index-swap PEP of the far-user subblock detection performed at the near
/// user ahead of SIC (near-user channel statistics).
pub fn pep_index_sic(inputs: &TheoryInputs, lambda: f64) -> Result<f64> {
    pep_index_impl(inputs, Side::Sic, lambda)
}

pub fn pep_index_sic_cond(inputs: &TheoryInputs, lambda: f64, x: f64) -> Result<f64> {
    let pts = fading_scale_breakpoints(inputs, Side::Sic);
    pep_index_cond_impl(inputs, Side::Sic, lambda, x, &pts)
}

// ---------------------------------------------------------------------------
// Two-subcarrier subblock: one active subcarrier per user, shared.
// ---------------------------------------------------------------------------

/// Far-user BER for the two-subcarrier geometry: averaged over the two
/// superimposed amplitudes, one symbol-PEP plus the bit-weighted union of
/// the two index-swap realizations (3 = 1 index bit + 2 possible symbol-bit
/// mismatches across the two swapped-in realizations).
pub fn ber_fu_two(inputs: &TheoryInputs) -> Result<f64> {
    let t = inputs.levels();
    let mut acc = 0.0;
    for lambda in [t.minus, t.plus] {
        acc += pep_symbol(lambda, inputs.omega_f, inputs.n0, inputs.policy)
            + 3.0 * pep_index_fu(inputs, lambda)?;
    }
    Ok(clamp_ber(acc / 4.0))
}

/// Probability that the SIC stage recovers the far-user subblock wrongly,
/// conditioned on the near user's sign (through the superimposed amplitude).
pub fn sic_error_prob_two(inputs: &TheoryInputs, lambda: f64) -> Result<f64> {
    let p = pep_symbol(lambda, inputs.omega_n, inputs.n0, inputs.policy)
        + 2.0 * pep_index_sic(inputs, lambda)?;
    Ok(clamp01(p))
}

/// SIC error probability averaged over the near user's equiprobable signs.
pub fn sic_error_prob_two_avg(inputs: &TheoryInputs) -> Result<f64> {
    let t = inputs.levels();
    Ok(0.5 * (sic_error_prob_two(inputs, t.minus)? + sic_error_prob_two(inputs, t.plus)?))
}

/// Near-user BER for the two-subcarrier geometry: half the bits are lost
/// when SIC fails; otherwise the near user faces its own single-subcarrier
/// sign decision at amplitude alpha_N.
pub fn ber_nu_two(inputs: &TheoryInputs) -> Result<f64> {
    let t = inputs.levels();
    let p_own = pep_symbol(inputs.alpha_n, inputs.omega_n, inputs.n0, inputs.policy);
    let mut acc = 0.0;
    let mut avg_sic = 0.0;
    for lambda in [t.minus, t.plus] {
        let p_sic = sic_error_prob_two(inputs, lambda)?;
        avg_sic += 0.5 * p_sic;
        acc += 0.5 * (1.0 - p_sic) * p_own;
    }
    Ok(clamp_ber(0.5 * avg_sic + acc))
}

// ---------------------------------------------------------------------------
// Multi-subcarrier subblock via pair terms sharing the inactive subcarrier.
// ---------------------------------------------------------------------------

/// Memoizing table of pair-term probabilities: symbol PEPs per amplitude
/// level (closed form) and index PEPs conditioned on the shared inactive
/// subcarrier's fading power (1-D quadrature, cached on the evaluation
/// point so product integrands reuse them across levels and outer calls).
struct PairTable<'a> {
    inputs: &'a TheoryInputs,
    breakpoints: [Vec<f64>; 2],
    index_cache: RefCell<HashMap<(Side, Level, u64), f64>>,
}

impl<'a> PairTable<'a> {
    fn new(inputs: &'a TheoryInputs) -> Self {
        Self {
            inputs,
            breakpoints: [
                fading_scale_breakpoints(inputs, Side::Fu),
                fading_scale_breakpoints(inputs, Side::Sic),
            ],
            index_cache: RefCell::new(HashMap::new()),
        }
    }

    fn breakpoints(&self, side: Side) -> &[f64] {
        match side {
            Side::Fu => &self.breakpoints[0],
            Side::Sic => &self.breakpoints[1],
        }
    }

    fn index_pep(&self, side: Side, level: Level, x: f64) -> Result<f64> {
        let key = (side, level, x.to_bits());
        if let Some(&v) = self.index_cache.borrow().get(&key) {
            return Ok(v);
        }
        let v = pep_index_cond_impl(
            self.inputs,
            side,
            self.inputs.level_value(level),
            x,
            self.breakpoints(side),
        )?;
        self.index_cache.borrow_mut().insert(key, v);
        Ok(v)
    }

    fn symbol_pep(&self, side: Side, level: Level) -> f64 {
        pep_symbol(
            self.inputs.level_value(level),
            self.inputs.omega(side),
            self.inputs.n0,
            self.inputs.policy,
        )
    }
}

/// A level vector spanning all four subcarriers means full activation:
/// there is no inactive subcarrier to swap with, so index terms vanish.
fn has_pair_terms(c: &[Level]) -> bool {
    c.len() < 4
}

/// Probability that every pair term decides correctly (no index swap, no
/// symbol error), integrated over the shared inactive-subcarrier power.
fn correct_block_integral(table: &PairTable, side: Side, c: &[Level]) -> Result<f64> {
    if !has_pair_terms(c) {
        let product: f64 = c.iter().map(|&lv| 1.0 - table.symbol_pep(side, lv)).product();
        return Ok(clamp01(product));
    }
    let quad = integrate_exp_weighted_split(
        |x| {
            c.iter()
                .map(|&lv| {
                    let pi = table.index_pep(side, lv, x).unwrap_or(f64::NAN);
                    1.0 - 2.0 * pi - table.symbol_pep(side, lv)
                })
                .product::<f64>()
        },
        OUTER_TOL,
        table.breakpoints(side),
    )?;
    Ok(clamp01(quad.value))
}

/// Probability that exactly pair term `k` suffers an index swap (union over
/// its two swapped-in symbol realizations) while no other pair term does.
fn index_error_integral(table: &PairTable, side: Side, c: &[Level], k: usize) -> Result<f64> {
    if !has_pair_terms(c) {
        return Ok(0.0);
    }
    let quad = integrate_exp_weighted_split(
        |x| {
            let mut val = 2.0 * table.index_pep(side, c[k], x).unwrap_or(f64::NAN);
            for (j, &lv) in c.iter().enumerate() {
                if j != k {
                    val *= 1.0 - 2.0 * table.index_pep(side, lv, x).unwrap_or(f64::NAN);
                }
            }
            val
        },
        OUTER_TOL,
        table.breakpoints(side),
    )?;
    Ok(clamp01(quad.value))
}

/// Probability that no pair term suffers an index swap (symbol decisions
/// unconstrained).
fn index_correct_integral(table: &PairTable, side: Side, c: &[Level]) -> Result<f64> {
    if !has_pair_terms(c) {
        return Ok(1.0);
    }
    let quad = integrate_exp_weighted_split(
        |x| {
            c.iter()
                .map(|&lv| 1.0 - 2.0 * table.index_pep(side, lv, x).unwrap_or(f64::NAN))
                .product::<f64>()
        },
        OUTER_TOL,
        table.breakpoints(side),
    )?;
    Ok(clamp01(quad.value))
}

/// Probability the far-user subblock is detected entirely correctly, for a
/// given per-position amplitude-level vector `c` (far-user channel).
pub fn block_correct_prob_four(inputs: &TheoryInputs, c: &[Level]) -> Result<f64> {
    correct_block_integral(&PairTable::new(inputs), Side::Fu, c)
}

/// Probability of an index swap at active position `k` of the far-user
/// subblock (far-user channel).
pub fn index_error_prob_four(inputs: &TheoryInputs, c: &[Level], k: usize) -> Result<f64> {
    index_error_integral(&PairTable::new(inputs), Side::Fu, c, k)
}

/// Probability the far-user activation pattern is detected correctly.
pub fn index_correct_prob_four(inputs: &TheoryInputs, c: &[Level]) -> Result<f64> {
    index_correct_integral(&PairTable::new(inputs), Side::Fu, c)
}

/// Probability the SIC stage at the near user fails to reproduce the
/// far-user subblock, for a given level vector.
pub fn sic_error_prob_four(inputs: &TheoryInputs, c: &[Level]) -> Result<f64> {
    Ok(clamp01(
        1.0 - correct_block_integral(&PairTable::new(inputs), Side::Sic, c)?,
    ))
}

/// Conditional probability of one specific symbol-decision outcome given the
/// pattern-detection outcome: positions outside the synchronized set resolve
/// by a fair coin, synchronized positions flip independently with their
/// symbol PEP. `sync` marks synchronized positions (all true when the
/// pattern was right); `flips[i]` asks for a flipped decision at position i
/// and is ignored outside the synchronized set.
pub fn conditional_symbol_pep(
    inputs: &TheoryInputs,
    c: &[Level],
    sync: &[bool],
    flips: &[bool],
) -> f64 {
    let mut pr = 1.0;
    for i in 0..c.len() {
        if !sync[i] {
            pr *= 0.5;
        } else {
            let ps = pep_symbol(
                inputs.level_value(c[i]),
                inputs.omega_f,
                inputs.n0,
                inputs.policy,
            );
            pr *= if flips[i] { ps } else { 1.0 - ps };
        }
    }
    pr
}

/// One admissible index-swap transition of the far-user pattern: position
/// `k`'s active subcarrier trades places with the single inactive one.
struct Transition {
    index_bit_errors: f64,
    /// Synchronized positions: i-th active subcarrier (sorted) unchanged.
    sync: Vec<bool>,
}

/// Swap transitions per far-user pattern rank; `None` at position k when the
/// swapped pattern is not in the codebook (possible only off the power-of-two
/// pattern counts).
fn build_transitions(codec: &NomaIeCodec) -> Result<Vec<Vec<Option<Transition>>>> {
    let g = codec.geometry();
    let (l, k_f) = (g.l(), g.k_f());
    if l - k_f > 1 {
        return Err(Error::Config(format!(
            "pair-term analysis needs at most one inactive subcarrier per subblock, got {} of {}",
            l - k_f,
            l
        )));
    }
    let mut all = Vec::with_capacity(codec.fu_pattern_count());
    for r in 0..codec.fu_pattern_count() {
        let pattern = codec.fu_pattern(r);
        let inactive = (0..l).find(|i| !pattern.contains(i));
        let mut per_k = Vec::with_capacity(k_f);
        for k in 0..k_f {
            let Some(t) = inactive else {
                break; // full activation: no index transitions at all
            };
            let mut swapped: Vec<usize> =
                pattern.iter().copied().filter(|&i| i != pattern[k]).collect();
            swapped.push(t);
            swapped.sort_unstable();
            per_k.push(codec.fu_rank_of(&swapped).map(|to_rank| Transition {
                index_bit_errors: ((r ^ to_rank) as u32).count_ones() as f64,
                sync: pattern
                    .iter()
                    .zip(&swapped)
                    .map(|(a, b)| a == b)
                    .collect(),
            }));
        }
        all.push(per_k);
    }
    Ok(all)
}

/// Per-position amplitude levels for one near-user placement and sign
/// combination: positions carrying the near user see an aligned or opposed
/// superposition, the rest the far user alone.
fn level_vector(codec: &NomaIeCodec, nu_rank: usize, signs: usize) -> Vec<Level> {
    let k_f = codec.geometry().k_f();
    let mut c = vec![Level::Star; k_f];
    for (t, &pos) in codec.nu_positions(nu_rank).iter().enumerate() {
        c[pos] = if (signs >> t) & 1 == 1 {
            Level::Minus
        } else {
            Level::Plus
        };
    }
    c
}

fn borrowing_share(codec: &NomaIeCodec, delta_m_n: u32) -> Result<f64> {
    let b_f = codec.geometry().fu_index_bits();
    if delta_m_n == 0 {
        return Ok(0.0);
    }
    if delta_m_n > b_f {
        return Err(Error::Config(format!(
            "cannot borrow {delta_m_n} index bits from a {b_f}-bit pattern choice"
        )));
    }
    Ok(delta_m_n as f64 / b_f as f64)
}

/// Expected far-user error bits per subblock, split by error case, averaged
/// over equiprobable patterns, near-user placements, and sign combinations.
#[derive(Clone, Copy, Debug)]
pub struct FuErrorBits {
    /// Expected error bits from index-error subblocks.
    pub m_e1: f64,
    /// Expected error bits from symbol-only-error subblocks.
    pub m_e2: f64,
    /// Correction removing the borrowed index bits' share from the far
    /// user's account (nonpositive).
    pub delta_m_e1: f64,
}

pub fn error_bits_fu_four(
    inputs: &TheoryInputs,
    codec: &NomaIeCodec,
    delta_m_n: u32,
) -> Result<FuErrorBits> {
    let g = codec.geometry();
    let p1 = borrowing_share(codec, delta_m_n)?;
    let transitions = build_transitions(codec)?;
    let table = PairTable::new(inputs);

    let n_rank = codec.fu_pattern_count();
    let n_place = codec.nu_pattern_count();
    let n_sign = 1usize << g.k_n();
    let combos = (n_rank * n_place * n_sign) as f64;

    let (mut m_e1, mut m_e2, mut borrowed) = (0.0, 0.0, 0.0);
    for nu_rank in 0..n_place {
        for signs in 0..n_sign {
            let c = level_vector(codec, nu_rank, signs);
            // Pattern-independent pieces of this level vector.
            let p_index_correct = index_correct_integral(&table, Side::Fu, &c)?;
            let sym_sum: f64 = c.iter().map(|&lv| table.symbol_pep(Side::Fu, lv)).sum();
            let pr_k: Vec<f64> = (0..c.len())
                .map(|k| index_error_integral(&table, Side::Fu, &c, k))
                .collect::<Result<_>>()?;
            for r in 0..n_rank {
                m_e2 += p_index_correct * sym_sum;
                for (k, tr) in transitions[r].iter().enumerate() {
                    let Some(tr) = tr else { continue };
                    let unsync = tr.sync.iter().filter(|&&s| !s).count() as f64;
                    let sym_exp: f64 = 0.5 * unsync
                        + tr.sync
                            .iter()
                            .zip(&c)
                            .filter(|(&s, _)| s)
                            .map(|(_, &lv)| table.symbol_pep(Side::Fu, lv))
                            .sum::<f64>();
                    m_e1 += pr_k[k] * (tr.index_bit_errors + sym_exp);
                    borrowed += pr_k[k] * tr.index_bit_errors;
                }
            }
        }
    }
    Ok(FuErrorBits {
        m_e1: m_e1 / combos,
        m_e2: m_e2 / combos,
        delta_m_e1: -p1 * borrowed / combos,
    })
}

/// Far-user BER for the multi-subcarrier geometry with index-bit borrowing:
/// expected error bits over the bits the far user actually owns.
pub fn ber_fu_four(inputs: &TheoryInputs, codec: &NomaIeCodec, delta_m_n: u32) -> Result<f64> {
    let bits = error_bits_fu_four(inputs, codec, delta_m_n)?;
    let m_f = codec.geometry().fu_bits() as f64;
    Ok(clamp_ber(
        (bits.m_e1 + bits.m_e2 + bits.delta_m_e1) / (m_f - delta_m_n as f64),
    ))
}

/// SIC failure probability averaged over near-user placements and signs.
pub fn sic_error_prob_four_avg(inputs: &TheoryInputs, codec: &NomaIeCodec) -> Result<f64> {
    let g = codec.geometry();
    let table = PairTable::new(inputs);
    let n_place = codec.nu_pattern_count();
    let n_sign = 1usize << g.k_n();
    let mut acc = 0.0;
    for nu_rank in 0..n_place {
        for signs in 0..n_sign {
            let c = level_vector(codec, nu_rank, signs);
            acc += 1.0 - correct_block_integral(&table, Side::Sic, &c)?;
        }
    }
    Ok(clamp01(acc / (n_place * n_sign) as f64))
}

/// Expected near-user error bits per subblock given successful SIC.
#[derive(Clone, Copy, Debug)]
pub struct NuErrorBits {
    /// Expected error bits when the near user's own placement is misdetected.
    pub m_e1: f64,
    /// Expected error bits from symbol decisions with the placement right.
    pub m_e2: f64,
}

/// Placement-error statistics of the near user after successful SIC: a
/// union bound over ordered codebook pattern pairs. A pair differing by `d`
/// relocated subcarriers separates on `2d` fading branches at the near
/// user's own amplitude, with `2^d` equidistant sign assignments of the
/// swapped-in symbols.
#[derive(Clone, Copy, Debug)]
pub struct NuIndexModel {
    /// Union probability of any placement error.
    pub pattern_error: f64,
    /// Expected placement-bit errors per subblock.
    pub index_bit_errors: f64,
}

pub fn nu_index_model(inputs: &TheoryInputs, codec: &NomaIeCodec) -> Result<NuIndexModel> {
    let g = codec.geometry();
    let b_n = g.nu_index_bits();
    if b_n == 0 {
        return Ok(NuIndexModel {
            pattern_error: 0.0,
            index_bit_errors: 0.0,
        });
    }
    let n = codec.nu_pattern_count();
    let mut pattern_error = 0.0;
    let mut bit_errors = 0.0;
    for rank in 0..n {
        let truth = codec.nu_positions(rank);
        let mut union = 0.0;
        let mut bits = 0.0;
        for alt in 0..n {
            if alt == rank {
                continue;
            }
            let d = codec
                .nu_positions(alt)
                .iter()
                .filter(|p| !truth.contains(p))
                .count() as u32;
            let pep = (1u64 << d) as f64
                * pep_index_mrc(inputs.alpha_n, inputs.omega_n, inputs.n0, 2 * d, inputs.policy);
            union += pep;
            bits += pep * ((rank ^ alt) as u64).count_ones() as f64;
        }
        pattern_error += clamp01(union);
        bit_errors += bits.min(b_n as f64);
    }
    Ok(NuIndexModel {
        pattern_error: pattern_error / n as f64,
        index_bit_errors: bit_errors / n as f64,
    })
}

/// Union probability of any near-user placement error after successful SIC.
pub fn nu_index_error_prob(inputs: &TheoryInputs, codec: &NomaIeCodec) -> Result<f64> {
    Ok(nu_index_model(inputs, codec)?.pattern_error)
}

pub fn error_bits_nu_four(inputs: &TheoryInputs, codec: &NomaIeCodec) -> Result<NuErrorBits> {
    let g = codec.geometry();
    let k_n = g.k_n() as f64;
    let model = nu_index_model(inputs, codec)?;
    let p_idx = model.pattern_error;
    let p_s = pep_symbol(inputs.alpha_n, inputs.omega_n, inputs.n0, inputs.policy);
    // Placement wrong: the mismatched placement bits plus half the symbol
    // bits on average.
    let m_e1 = model.index_bit_errors + p_idx * 0.5 * k_n;
    // Placement right: binomial symbol errors across the active subcarriers.
    let k = g.k_n() as u32;
    let mut sym = 0.0;
    for i in 1..=k {
        sym += i as f64
            * binomial(k as usize, i as usize) as f64
            * p_s.powi(i as i32)
            * (1.0 - p_s).powi((k - i) as i32);
    }
    Ok(NuErrorBits {
        m_e1,
        m_e2: (1.0 - p_idx) * sym,
    })
}

/// Expected borrowed-bit errors charged to the near user: its share of the
/// far-user index-bit errors committed by the SIC stage.
pub fn delta_error_bits_nu_four(
    inputs: &TheoryInputs,
    codec: &NomaIeCodec,
    delta_m_n: u32,
) -> Result<f64> {
    let g = codec.geometry();
    let p1 = borrowing_share(codec, delta_m_n)?;
    if p1 == 0.0 {
        return Ok(0.0);
    }
    let transitions = build_transitions(codec)?;
    let table = PairTable::new(inputs);
    let n_rank = codec.fu_pattern_count();
    let n_place = codec.nu_pattern_count();
    let n_sign = 1usize << g.k_n();
    let mut acc = 0.0;
    for nu_rank in 0..n_place {
        for signs in 0..n_sign {
            let c = level_vector(codec, nu_rank, signs);
            let pr_k: Vec<f64> = (0..c.len())
                .map(|k| index_error_integral(&table, Side::Sic, &c, k))
                .collect::<Result<_>>()?;
            for r in 0..n_rank {
                for (k, tr) in transitions[r].iter().enumerate() {
                    if let Some(tr) = tr {
                        acc += pr_k[k] * tr.index_bit_errors;
                    }
                }
            }
        }
    }
    Ok(p1 * acc / (n_rank * n_place * n_sign) as f64)
}

/// Near-user BER for the multi-subcarrier geometry: SIC failures cost half
/// of all near-user bits; otherwise placement and symbol errors accrue, plus
/// the borrowed far-user index bits' error share.
pub fn ber_nu_four(inputs: &TheoryInputs, codec: &NomaIeCodec, delta_m_n: u32) -> Result<f64> {
    let m_n = codec.geometry().nu_bits() as f64;
    let p_sic = sic_error_prob_four_avg(inputs, codec)?;
    let bits = error_bits_nu_four(inputs, codec)?;
    let delta = delta_error_bits_nu_four(inputs, codec, delta_m_n)?;
    let numer = 0.5 * m_n * p_sic + (1.0 - p_sic) * (bits.m_e1 + bits.m_e2) + delta;
    Ok(clamp_ber(numer / (m_n + delta_m_n as f64)))
}

/// Near-user BER when SIC is assumed perfect (reference curve).
pub fn ber_nu_four_perfect_sic(
    inputs: &TheoryInputs,
    codec: &NomaIeCodec,
    delta_m_n: u32,
) -> Result<f64> {
    let m_n = codec.geometry().nu_bits() as f64;
    let bits = error_bits_nu_four(inputs, codec)?;
    Ok(clamp_ber((bits.m_e1 + bits.m_e2) / (m_n + delta_m_n as f64)))
}
