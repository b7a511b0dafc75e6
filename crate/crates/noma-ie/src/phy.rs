//! Power allocation, superposition coding, and the per-subcarrier
//! frequency-domain channel: independent Rayleigh fading plus AWGN.
//!
//! The time-domain IFFT/CP chain is bypassed on purpose — with independent
//! per-subcarrier fading it is statistically equivalent, and the cyclic
//! prefix length only ever enters the spectral-efficiency bookkeeping.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::codec::SubblockGeometry;
use crate::{Error, Result};

/// Power split between the far user (higher power) and near user.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerAllocation {
    a_f: f64,
    a_n: f64,
    p_max: f64,
}

impl PowerAllocation {
    /// Far-user power fraction with total power 1.
    pub fn new(a_f: f64) -> Result<Self> {
        Self::with_p_max(a_f, 1.0)
    }

    pub fn with_p_max(a_f: f64, p_max: f64) -> Result<Self> {
        let a_n = 1.0 - a_f;
        if !(a_f > a_n && a_n > 0.0) {
            return Err(Error::Allocation(format!(
                "far-user fraction must satisfy 0.5 < a_f < 1, got {a_f}"
            )));
        }
        if !(p_max > 0.0) {
            return Err(Error::Allocation(format!("total power must be positive, got {p_max}")));
        }
        Ok(Self { a_f, a_n, p_max })
    }

    pub fn a_f(&self) -> f64 {
        self.a_f
    }

    pub fn a_n(&self) -> f64 {
        self.a_n
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    /// Far-user amplitude sqrt(a_F * P_max).
    pub fn alpha_f(&self) -> f64 {
        (self.a_f * self.p_max).sqrt()
    }

    /// Near-user amplitude sqrt(a_N * P_max).
    pub fn alpha_n(&self) -> f64 {
        (self.a_n * self.p_max).sqrt()
    }
}

/// The three amplitudes a superimposed BPSK pair can take on one subcarrier:
/// opposed signs, far user alone, aligned signs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudeTriple {
    pub minus: f64,
    pub star: f64,
    pub plus: f64,
}

impl AmplitudeTriple {
    pub fn from_amplitudes(alpha_f: f64, alpha_n: f64) -> Self {
        Self {
            minus: alpha_f - alpha_n,
            star: alpha_f,
            plus: alpha_f + alpha_n,
        }
    }
}

/// The three superimposed amplitudes implied by an allocation.
pub fn amplitude_levels(alloc: &PowerAllocation) -> AmplitudeTriple {
    AmplitudeTriple::from_amplitudes(alloc.alpha_f(), alloc.alpha_n())
}

/// Detection-metric scaling that removes the error floor:
/// (alpha_F - alpha_N) / alpha_F.
pub fn feasible_beta(alloc: &PowerAllocation) -> f64 {
    (alloc.alpha_f() - alloc.alpha_n()) / alloc.alpha_f()
}

/// Whether a detection error floor persists at any SNR for the given
/// metric scaling: true iff alpha_F <= 2 alpha_N / (2 - beta_e).
pub fn error_floor_exists(alloc: &PowerAllocation, beta_e: f64) -> Result<bool> {
    if !(beta_e > 0.0 && beta_e < 2.0) {
        return Err(Error::Config(format!(
            "floor condition needs 0 < beta_e < 2, got {beta_e}"
        )));
    }
    Ok(alloc.alpha_f() <= 2.0 * alloc.alpha_n() / (2.0 - beta_e))
}

/// Entrywise alpha_F * x_F + alpha_N * x_N.
pub fn superpose(
    x_f: &[Complex64],
    x_n: &[Complex64],
    alloc: &PowerAllocation,
) -> Result<Vec<Complex64>> {
    if x_f.len() != x_n.len() {
        return Err(Error::Length(format!(
            "superposition of lengths {} and {}",
            x_f.len(),
            x_n.len()
        )));
    }
    let (af, an) = (alloc.alpha_f(), alloc.alpha_n());
    Ok(x_f
        .iter()
        .zip(x_n)
        .map(|(f, n)| af * f + an * n)
        .collect())
}

/// Amplitude scale that makes the expected transmit energy per subblock equal
/// to L * P_max when only some subcarriers are active:
/// sqrt(L / (a_F K_F + a_N K_N)).
pub fn power_reallocation_scale(alloc: &PowerAllocation, geom: &SubblockGeometry) -> Result<f64> {
    let used = alloc.a_f() * geom.k_f() as f64 + alloc.a_n() * geom.k_n() as f64;
    if used <= 0.0 {
        return Err(Error::Geometry(
            "reallocation needs at least one active subcarrier".into(),
        ));
    }
    Ok((geom.l() as f64 / used).sqrt())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Noise spectral density for a transmit SNR (= P_max / N_0) given in dB.
pub fn noise_power_from_snr_db(p_max: f64, snr_db: f64) -> f64 {
    p_max / db_to_linear(snr_db)
}

fn draw_cn(rng: &mut impl Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Independent Rayleigh-fading gains with average power `omega` per entry.
pub fn draw_channel(rng: &mut impl Rng, l: usize, omega: f64) -> Result<Vec<Complex64>> {
    if !(omega > 0.0) {
        return Err(Error::Config(format!("channel gain must be positive, got {omega}")));
    }
    Ok((0..l).map(|_| draw_cn(rng, omega)).collect())
}

/// Independent complex Gaussian noise with variance `n0` per entry.
pub fn draw_noise(rng: &mut impl Rng, l: usize, n0: f64) -> Result<Vec<Complex64>> {
    if !(n0 > 0.0) {
        return Err(Error::Config(format!("noise power must be positive, got {n0}")));
    }
    Ok((0..l).map(|_| draw_cn(rng, n0)).collect())
}

/// Per-subcarrier reception y = x .* h + w.
pub fn receive(x: &[Complex64], h: &[Complex64], w: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.len() != h.len() || x.len() != w.len() {
        return Err(Error::Length(format!(
            "receive with lengths {}, {}, {}",
            x.len(),
            h.len(),
            w.len()
        )));
    }
    Ok(x.iter()
        .zip(h)
        .zip(w)
        .map(|((x, h), w)| x * h + w)
        .collect())
}
