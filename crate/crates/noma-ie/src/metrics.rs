//! Spectral efficiency, energy efficiency, and BER bookkeeping.
//!
//! The efficiency formulas compare the subcarrier-activation multiplexing
//! scheme against its OFDM-based alternatives on common terms: data bits per
//! OFDM subcarrier (including the cyclic prefix overhead) and data bits per
//! joule under two power policies. BER bookkeeping is a mergeable tally so
//! parallel simulation batches can reduce in any order.

use crate::codec::index_bit_capacity;
use crate::{Error, Result};

/// Transmit power policy: either every user sends at its allocated share of
/// the per-subcarrier maximum, or the saved power of inactive subcarriers is
/// reallocated so each subblock always consumes the full budget.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PowerPolicy {
    #[default]
    MaxPower,
    Reallocation,
}

/// Scheme-specific parameters entering the efficiency formulas. Modulation
/// orders are the APM alphabet sizes (2 for BPSK, 4 for 4-ASK); `a_f` is the
/// far user's power share where two users superimpose.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemeKind {
    /// Single user, all subcarriers active, M-ary APM.
    Ofdm { m: u32 },
    /// Two superimposed users, all subcarriers active.
    OfdmNoma { m_f: u32, m_n: u32 },
    /// Single user, K of L subcarriers active plus index bits.
    OfdmIm { l: usize, k: usize, m: u32 },
    /// Two superimposed users with independent activation patterns.
    ImNoma {
        l: usize,
        k_f: usize,
        k_n: usize,
        m_f: u32,
        m_n: u32,
        a_f: f64,
    },
    /// Two superimposed users with nested activation patterns (the scheme
    /// under study).
    NomaIe {
        l: usize,
        k_f: usize,
        k_n: usize,
        m_f: u32,
        m_n: u32,
        a_f: f64,
    },
}

/// A scheme embedded in its OFDM frame: `n_t` data subcarriers and a cyclic
/// prefix of `q` samples, with per-subcarrier power budget `p_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    pub n_t: u32,
    pub q: u32,
    pub p_max: f64,
}

pub const DEFAULT_N_T: u32 = 128;
pub const DEFAULT_CP: u32 = 16;

impl SchemeSpec {
    pub fn new(kind: SchemeKind, n_t: u32, q: u32, p_max: f64) -> Result<Self> {
        if n_t == 0 {
            return Err(Error::Config("need at least one subcarrier".into()));
        }
        if !(p_max > 0.0) {
            return Err(Error::Config(format!("p_max must be positive, got {p_max}")));
        }
        let check_m = |m: u32| -> Result<()> {
            if m < 2 {
                return Err(Error::Config(format!("APM order must be at least 2, got {m}")));
            }
            Ok(())
        };
        match kind {
            SchemeKind::Ofdm { m } => check_m(m)?,
            SchemeKind::OfdmNoma { m_f, m_n } => {
                check_m(m_f)?;
                check_m(m_n)?;
            }
            SchemeKind::OfdmIm { l, k, m } => {
                check_m(m)?;
                if k == 0 || k > l {
                    return Err(Error::Config(format!(
                        "need 1..=L active subcarriers, got {k} of {l}"
                    )));
                }
            }
            SchemeKind::ImNoma {
                l,
                k_f,
                k_n,
                m_f,
                m_n,
                a_f,
            } => {
                check_m(m_f)?;
                check_m(m_n)?;
                if k_f == 0 || k_f > l || k_n == 0 || k_n > l {
                    return Err(Error::Config(format!(
                        "need 1..=L active subcarriers per user, got {k_f} and {k_n} of {l}"
                    )));
                }
                check_share(a_f)?;
            }
            SchemeKind::NomaIe {
                l,
                k_f,
                k_n,
                m_f,
                m_n,
                a_f,
            } => {
                check_m(m_f)?;
                check_m(m_n)?;
                if k_f == 0 || k_f > l || k_n > k_f {
                    return Err(Error::Config(format!(
                        "need nested activation 1 <= K_N <= K_F <= L, got {k_n} <= {k_f} <= {l}"
                    )));
                }
                check_share(a_f)?;
            }
        }
        Ok(Self { kind, n_t, q, p_max })
    }

    /// Data bits carried per subblock (per subcarrier for the full-activation
    /// schemes, scaled up to a nominal subblock of that length).
    fn bits_per_subblock(&self) -> Result<(f64, usize)> {
        let lg = |m: u32| (m as f64).log2();
        Ok(match self.kind {
            SchemeKind::Ofdm { m } => (lg(m), 1),
            SchemeKind::OfdmNoma { m_f, m_n } => (lg(m_f) + lg(m_n), 1),
            SchemeKind::OfdmIm { l, k, m } => (
                index_bit_capacity(l, k)? as f64 + k as f64 * lg(m),
                l,
            ),
            SchemeKind::ImNoma {
                l,
                k_f,
                k_n,
                m_f,
                m_n,
                ..
            } => (
                index_bit_capacity(l, k_f)? as f64
                    + k_f as f64 * lg(m_f)
                    + index_bit_capacity(l, k_n)? as f64
                    + k_n as f64 * lg(m_n),
                l,
            ),
            SchemeKind::NomaIe {
                l,
                k_f,
                k_n,
                m_f,
                m_n,
                ..
            } => (
                index_bit_capacity(l, k_f)? as f64
                    + k_f as f64 * lg(m_f)
                    + index_bit_capacity(k_f, k_n)? as f64
                    + k_n as f64 * lg(m_n),
                l,
            ),
        })
    }

    /// Average transmit power consumed per subblock under the maximum
    /// transmit power policy.
    fn max_power_energy(&self) -> f64 {
        let e = match self.kind {
            SchemeKind::Ofdm { .. } | SchemeKind::OfdmNoma { .. } => 1.0,
            SchemeKind::OfdmIm { k, .. } => k as f64,
            SchemeKind::ImNoma {
                k_f, k_n, a_f, ..
            }
            | SchemeKind::NomaIe {
                k_f, k_n, a_f, ..
            } => a_f * k_f as f64 + (1.0 - a_f) * k_n as f64,
        };
        e * self.p_max
    }
}

fn check_share(a_f: f64) -> Result<()> {
    if !(a_f > 0.5 && a_f < 1.0) {
        return Err(Error::Allocation(format!(
            "far-user power share must lie in (0.5, 1), got {a_f}"
        )));
    }
    Ok(())
}

/// Data bits per OFDM subcarrier including cyclic prefix overhead:
/// (N_T / L) * (bits per subblock) / (N_T + Q).
pub fn spectral_efficiency(spec: &SchemeSpec) -> Result<f64> {
    let (bits, l) = spec.bits_per_subblock()?;
    Ok(spec.n_t as f64 * bits / (l as f64 * (spec.n_t + spec.q) as f64))
}

/// Data bits per unit transmit energy. Under the maximum transmit power
/// policy each user spends its allocated share on its active subcarriers;
/// under reallocation every subblock consumes the full L * p_max budget.
pub fn energy_efficiency(spec: &SchemeSpec, policy: PowerPolicy) -> Result<f64> {
    let (bits, l) = spec.bits_per_subblock()?;
    // The full-activation schemes are normalised to a one-subcarrier
    // subblock, whose reallocation budget is just p_max.
    let energy = match policy {
        PowerPolicy::MaxPower => spec.max_power_energy(),
        PowerPolicy::Reallocation => l as f64 * spec.p_max,
    };
    if !(energy > 0.0) {
        return Err(Error::Config("scheme consumes no transmit energy".into()));
    }
    Ok(bits / energy)
}

/// CSV table comparing labelled schemes on both efficiency metrics.
pub fn comparison_csv(rows: &[(&str, SchemeSpec)]) -> Result<String> {
    let mut out = String::from("scheme,se,ee_maxpower,ee_realloc\n");
    for (label, spec) in rows {
        let se = spectral_efficiency(spec)?;
        let ee_max = energy_efficiency(spec, PowerPolicy::MaxPower)?;
        let ee_re = energy_efficiency(spec, PowerPolicy::Reallocation)?;
        out.push_str(&format!("{label},{se},{ee_max},{ee_re}\n"));
    }
    Ok(out)
}

/// Which of the two superimposed users a record belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum User {
    Fu,
    Nu,
}

impl User {
    pub fn label(self) -> &'static str {
        match self {
            User::Fu => "fu",
            User::Nu => "nu",
        }
    }
}

/// Per-user running error account. `errors_case1` counts wrong bits from
/// subblocks whose activation pattern was misdetected, `errors_case2` wrong
/// bits from subblocks with the pattern right, and `errors_borrowed` wrong
/// bits among index bits this user borrowed from its partner. `bits` counts
/// everything the user is charged for, borrowed bits included.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct UserTally {
    pub bits: u64,
    pub errors_case1: u64,
    pub errors_case2: u64,
    pub errors_borrowed: u64,
}

impl UserTally {
    pub fn total_errors(&self) -> u64 {
        self.errors_case1 + self.errors_case2 + self.errors_borrowed
    }

    /// Running bit error rate; zero bits is a bookkeeping error.
    pub fn ber(&self) -> Result<f64> {
        if self.bits == 0 {
            return Err(Error::Config("BER undefined without transmitted bits".into()));
        }
        Ok(self.total_errors() as f64 / self.bits as f64)
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            bits: self.bits + other.bits,
            errors_case1: self.errors_case1 + other.errors_case1,
            errors_case2: self.errors_case2 + other.errors_case2,
            errors_borrowed: self.errors_borrowed + other.errors_borrowed,
        }
    }
}

/// Both users' tallies for one operating point; the parallel-reduction
/// monoid of the simulator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PointTally {
    pub fu: UserTally,
    pub nu: UserTally,
}

impl PointTally {
    pub fn merge(self, other: Self) -> Self {
        Self {
            fu: self.fu.merge(other.fu),
            nu: self.nu.merge(other.nu),
        }
    }
}

/// Where a BER value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Sim,
    Theory,
}

impl Source {
    pub fn label(self) -> &'static str {
        match self {
            Source::Sim => "sim",
            Source::Theory => "theory",
        }
    }
}

/// One row of a BER result file.
#[derive(Clone, Debug)]
pub struct BerRecord {
    pub snr_db: f64,
    pub user: User,
    pub scheme: String,
    pub beta_e: f64,
    pub a_f: f64,
    pub tally: UserTally,
    pub ber: f64,
    pub source: Source,
}

pub fn csv_header() -> &'static str {
    "snr_db,user,scheme,beta_e,a_f,bits,errors_case1,errors_case2,errors_borrowed,ber,source"
}

impl BerRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.snr_db,
            self.user.label(),
            self.scheme,
            self.beta_e,
            self.a_f,
            self.tally.bits,
            self.tally.errors_case1,
            self.tally.errors_case2,
            self.tally.errors_borrowed,
            self.ber,
            self.source.label(),
        )
    }
}
