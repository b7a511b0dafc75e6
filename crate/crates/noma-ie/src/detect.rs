//! Joint maximum-likelihood detection.
//!
//! Every detector is an exhaustive metric scan over a precomputed set of
//! legal subblock hypotheses: the near user first detects the far-user
//! subblock with a scaled hypothesis amplitude (envelope-aware SIC), then
//! subtracts it at full amplitude and detects its own subblock restricted to
//! the detected support; the far user detects its subblock directly.
//! Hypothesis sets are tiny at desk-scale geometries, so a flat scan is both
//! the definition and the fastest implementation.

use num_complex::Complex64;

use crate::codec::Realization;

/// Index of the metric-minimizing hypothesis.
///
/// The metric for hypothesis x is sum over gamma of |y(g) - amp*h(g)*x(g)|^2,
/// restricted to `support` when given. Ties break toward the lowest index in
/// the enumeration (pattern rank major, symbol bits minor), which makes the
/// detectors deterministic.
pub fn ml_scan(
    y: &[Complex64],
    h: &[Complex64],
    amp: f64,
    hypotheses: &[Realization],
    support: Option<&[usize]>,
) -> usize {
    debug_assert!(!hypotheses.is_empty());
    debug_assert_eq!(y.len(), h.len());
    let ah: Vec<Complex64> = h.iter().map(|v| amp * v).collect();
    let mut best = 0usize;
    let mut best_metric = f64::INFINITY;
    for (j, hyp) in hypotheses.iter().enumerate() {
        let mut metric = 0.0;
        match support {
            Some(idx) => {
                for &g in idx {
                    metric += (y[g] - ah[g] * hyp.vector[g]).norm_sqr();
                }
            }
            None => {
                for g in 0..y.len() {
                    metric += (y[g] - ah[g] * hyp.vector[g]).norm_sqr();
                }
            }
        }
        if metric < best_metric {
            best_metric = metric;
            best = j;
        }
    }
    best
}

/// Far-user subblock detection at the near user ahead of SIC: the hypothesis
/// amplitude is beta_e * alpha_F, with beta_e the envelope detection
/// coefficient.
pub fn e_sic_detect(
    y_n: &[Complex64],
    h_n: &[Complex64],
    beta_e: f64,
    alpha_f: f64,
    chi_f: &[Realization],
) -> usize {
    ml_scan(y_n, h_n, beta_e * alpha_f, chi_f, None)
}

/// Removes the detected far-user subblock at full amplitude alpha_F
/// (the detection coefficient never enters the subtraction).
pub fn sic_subtract(
    y_n: &[Complex64],
    h_n: &[Complex64],
    alpha_f: f64,
    x_f_hat: &[Complex64],
) -> Vec<Complex64> {
    y_n.iter()
        .zip(h_n)
        .zip(x_f_hat)
        .map(|((y, h), x)| y - alpha_f * h * x)
        .collect()
}

/// Near-user subblock detection after SIC, restricted to the subcarriers of
/// the detected far-user support; hypothesis amplitude is plain alpha_N.
pub fn e_detect_nu(
    y_sic: &[Complex64],
    h_n: &[Complex64],
    alpha_n: f64,
    chi_n: &[Realization],
    support: &[usize],
) -> usize {
    ml_scan(y_sic, h_n, alpha_n, chi_n, Some(support))
}

/// Direct far-user detection from its own observation, same scaled-amplitude
/// metric as the SIC stage but through the far-user channel.
pub fn fu_detect(
    y_f: &[Complex64],
    h_f: &[Complex64],
    beta_e: f64,
    alpha_f: f64,
    chi_f: &[Realization],
) -> usize {
    ml_scan(y_f, h_f, beta_e * alpha_f, chi_f, None)
}

pub fn hamming(a: &[bool], b: &[bool]) -> u64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

/// Splits the bit errors between one truth/detected pair into the two error
/// cases: index-error trials (wrong activation pattern) charge index and
/// symbol errors to case 1; pattern-correct trials charge symbol errors to
/// case 2. Index-bit mismatches with a matching pattern (possible for the
/// near user when the SIC stage detected a different far-user support that
/// happens to contain the same absolute set) stay in case 1.
pub fn count_bit_errors(
    truth_index: &[bool],
    truth_symbol: &[bool],
    detected_index: &[bool],
    detected_symbol: &[bool],
    pattern_matched: bool,
) -> (u64, u64) {
    let idx = hamming(truth_index, detected_index);
    let sym = hamming(truth_symbol, detected_symbol);
    if pattern_matched {
        (idx, sym)
    } else {
        (idx + sym, 0)
    }
}
