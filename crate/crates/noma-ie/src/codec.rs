//! Bit-to-subblock mapping for the two-user scheme.
//!
//! Each subblock spans `L` subcarriers. The far user (FU) activates `K_F` of
//! them and the near user (NU) activates `K_N` drawn from the FU's active
//! set, so the joint activation pattern (the envelope) itself carries data
//! bits on top of the BPSK symbols riding the active subcarriers.
//!
//! The (4,3,2) codebook is hard-coded to match the published mapping table;
//! every other geometry falls back to lexicographic subset unranking.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::{Error, Result};

/// Binomial coefficient C(n, k) in exact integer arithmetic.
///
/// Callers stay in desk-scale ranges (n <= 64); u128 keeps every
/// intermediate product exact there.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn floor_log2(x: u128) -> u32 {
    debug_assert!(x >= 1);
    127 - x.leading_zeros()
}

/// Number of index bits an (L, K)-subset choice can carry: floor(log2 C(L,K)).
pub fn index_bit_capacity(l: usize, k: usize) -> Result<u32> {
    if k > l {
        return Err(Error::Geometry(format!(
            "active count {k} exceeds subblock length {l}"
        )));
    }
    Ok(floor_log2(binomial(l, k)))
}

/// Upper bound on envelope-borne bits per subblock when every subcarrier may
/// take one of three states (inactive / FU only / FU+NU): L * log2(3).
pub fn ternary_envelope_bound(l: usize) -> f64 {
    l as f64 * 3f64.log2()
}

/// The `rank`-th K-subset of {0..L-1} in lexicographic order.
pub fn unrank_index_set(rank: u128, l: usize, k: usize) -> Result<Vec<usize>> {
    if k > l || rank >= binomial(l, k) {
        return Err(Error::Geometry(format!(
            "rank {rank} out of range for ({l} choose {k})"
        )));
    }
    let mut rank = rank;
    let mut set = Vec::with_capacity(k);
    let mut remaining = k;
    let mut elem = 0usize;
    while remaining > 0 {
        let with_elem = binomial(l - 1 - elem, remaining - 1);
        if rank < with_elem {
            set.push(elem);
            remaining -= 1;
        } else {
            rank -= with_elem;
        }
        elem += 1;
    }
    Ok(set)
}

/// Lexicographic rank of a strictly increasing K-subset of {0..L-1}.
pub fn rank_index_set(set: &[usize], l: usize) -> Result<u128> {
    let k = set.len();
    let mut rank: u128 = 0;
    let mut prev = 0usize;
    for (i, &elem) in set.iter().enumerate() {
        if elem >= l || (i > 0 && elem <= set[i - 1]) {
            return Err(Error::Geometry(format!(
                "not a strictly increasing subset of 0..{l}: {set:?}"
            )));
        }
        for skipped in prev..elem {
            rank += binomial(l - 1 - skipped, k - 1 - i);
        }
        prev = elem + 1;
    }
    Ok(rank)
}

/// Subblock geometry: L subcarriers, K_F active for the far user, K_N active
/// for the near user (always a subset of the FU's set). Modulation is BPSK
/// on both users.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubblockGeometry {
    l: usize,
    k_f: usize,
    k_n: usize,
}

impl SubblockGeometry {
    pub fn new(l: usize, k_f: usize, k_n: usize) -> Result<Self> {
        if l == 0 || l > 24 {
            return Err(Error::Geometry(format!(
                "subblock length {l} outside supported range 1..=24"
            )));
        }
        if k_f > l || k_n > k_f {
            return Err(Error::Geometry(format!(
                "activation counts must satisfy k_n <= k_f <= l, got ({l},{k_f},{k_n})"
            )));
        }
        Ok(Self { l, k_f, k_n })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn k_f(&self) -> usize {
        self.k_f
    }

    pub fn k_n(&self) -> usize {
        self.k_n
    }

    /// FU index bits: floor(log2 C(L, K_F)).
    pub fn fu_index_bits(&self) -> u32 {
        index_bit_capacity(self.l, self.k_f).expect("validated geometry")
    }

    /// NU index bits: floor(log2 C(K_F, K_N)).
    pub fn nu_index_bits(&self) -> u32 {
        index_bit_capacity(self.k_f, self.k_n).expect("validated geometry")
    }

    /// Total envelope (index) bits carried by the joint pattern choice.
    pub fn envelope_bits(&self) -> u32 {
        self.fu_index_bits() + self.nu_index_bits()
    }

    /// FU bits per subblock: index bits plus one BPSK bit per active subcarrier.
    pub fn fu_bits(&self) -> u32 {
        self.fu_index_bits() + self.k_f as u32
    }

    /// NU bits per subblock.
    pub fn nu_bits(&self) -> u32 {
        self.nu_index_bits() + self.k_n as u32
    }
}

/// One legal transmit hypothesis: a unit-amplitude subblock plus the
/// codebook coordinates it decodes to.
#[derive(Clone, Debug)]
pub struct Realization {
    /// Length-L vector with entries in {0, +1, -1}.
    pub vector: Vec<Complex64>,
    /// Activation-pattern rank in the codebook enumeration.
    pub pattern_rank: usize,
    /// Symbol bits packed as an integer, first modulated subcarrier = MSB.
    pub symbol_index: usize,
    /// Bitmask of active subcarriers (bit i set = subcarrier i active).
    pub mask: u32,
}

/// Decoded bits for one user, split by how they were carried.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitGroup {
    pub index_bits: Vec<bool>,
    pub symbol_bits: Vec<bool>,
    /// Index bits lent to (negative) or borrowed from (positive) the partner
    /// user by the bit-borrowing arrangement; bookkeeping only.
    pub borrowed: i32,
}

/// BPSK map: bit 0 -> +1, bit 1 -> -1.
pub fn bpsk(bit: bool) -> Complex64 {
    if bit {
        Complex64::new(-1.0, 0.0)
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// Places BPSK symbols on the given active subcarriers (ascending order);
/// inactive entries are zero.
pub fn map_subblock(index_set: &[usize], symbol_bits: &[bool], l: usize) -> Result<Vec<Complex64>> {
    if symbol_bits.len() != index_set.len() {
        return Err(Error::BitLength {
            got: symbol_bits.len(),
            want: index_set.len(),
        });
    }
    let mut x = vec![Complex64::new(0.0, 0.0); l];
    for (&idx, &bit) in index_set.iter().zip(symbol_bits) {
        if idx >= l {
            return Err(Error::Geometry(format!("subcarrier {idx} outside 0..{l}")));
        }
        x[idx] = bpsk(bit);
    }
    Ok(x)
}

pub fn bits_to_int(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

pub fn int_to_bits(value: usize, width: u32) -> Vec<bool> {
    (0..width).rev().map(|i| (value >> i) & 1 == 1).collect()
}

fn active_set(x: &[Complex64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| v.norm_sqr() > 0.0)
        .map(|(i, _)| i)
        .collect()
}

fn mask_of(set: &[usize]) -> u32 {
    set.iter().fold(0u32, |m, &i| m | (1 << i))
}

fn fmt_set_one_based(set: &[usize]) -> String {
    if set.is_empty() {
        return "-".to_string();
    }
    set.iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join("|")
}

/// Published (4,3,2) codebook: FU patterns by rank, then the NU's choice of
/// positions within the (sorted) FU set by rank. Neither list is in
/// lexicographic order, so both are pinned verbatim.
const FU_PATTERNS_432: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];
const NU_POSITIONS_432: [[usize; 2]; 2] = [[1, 2], [0, 1]];

/// Joint codebook for the two-user scheme: envelope forming, symbol mapping,
/// demapping, and the realization enumerations the detectors scan.
///
/// All tables are built once; the codec is immutable afterwards.
pub struct NomaIeCodec {
    geom: SubblockGeometry,
    fu_patterns: Vec<Vec<usize>>,
    /// NU choices as positions within the sorted FU set, by NU rank.
    nu_positions: Vec<Vec<usize>>,
    fu_rank_by_mask: HashMap<u32, usize>,
    fu_realizations: Vec<Realization>,
    /// Per FU rank: NU realizations conditioned on that FU pattern.
    nu_realizations: Vec<Vec<Realization>>,
}

impl NomaIeCodec {
    pub fn new(geom: SubblockGeometry) -> Result<Self> {
        let (l, k_f, k_n) = (geom.l(), geom.k_f(), geom.k_n());
        let n_fu = 1usize << geom.fu_index_bits();
        let n_nu = 1usize << geom.nu_index_bits();

        let (fu_patterns, nu_positions) = if (l, k_f, k_n) == (4, 3, 2) {
            (
                FU_PATTERNS_432.iter().map(|p| p.to_vec()).collect(),
                NU_POSITIONS_432.iter().map(|p| p.to_vec()).collect(),
            )
        } else {
            let fu = (0..n_fu)
                .map(|r| unrank_index_set(r as u128, l, k_f))
                .collect::<Result<Vec<_>>>()?;
            let nu = (0..n_nu)
                .map(|r| unrank_index_set(r as u128, k_f, k_n))
                .collect::<Result<Vec<_>>>()?;
            (fu, nu)
        };

        let fu_rank_by_mask = fu_patterns
            .iter()
            .enumerate()
            .map(|(r, p)| (mask_of(p), r))
            .collect();

        let fu_realizations = enumerate_realizations(&fu_patterns, l);
        let nu_realizations = fu_patterns
            .iter()
            .map(|i_f| {
                let abs: Vec<Vec<usize>> = nu_positions
                    .iter()
                    .map(|pos| pos.iter().map(|&p| i_f[p]).collect())
                    .collect();
                enumerate_realizations(&abs, l)
            })
            .collect();

        Ok(Self {
            geom,
            fu_patterns,
            nu_positions,
            fu_rank_by_mask,
            fu_realizations,
            nu_realizations,
        })
    }

    pub fn geometry(&self) -> SubblockGeometry {
        self.geom
    }

    /// Splits mixed index bits into the FU pattern choice (leading bits) and
    /// the NU within-pattern choice (trailing bits) and returns both active
    /// sets. The NU set is always contained in the FU set.
    pub fn form_envelope(&self, mixed_index_bits: &[bool]) -> Result<(Vec<usize>, Vec<usize>)> {
        let want = self.geom.envelope_bits() as usize;
        if mixed_index_bits.len() != want {
            return Err(Error::BitLength {
                got: mixed_index_bits.len(),
                want,
            });
        }
        let split = self.geom.fu_index_bits() as usize;
        let fu_rank = bits_to_int(&mixed_index_bits[..split]);
        let nu_rank = bits_to_int(&mixed_index_bits[split..]);
        Ok((
            self.fu_patterns[fu_rank].clone(),
            self.nu_absolute_set(fu_rank, nu_rank),
        ))
    }

    pub fn fu_pattern(&self, rank: usize) -> &[usize] {
        &self.fu_patterns[rank]
    }

    pub fn fu_pattern_count(&self) -> usize {
        self.fu_patterns.len()
    }

    pub fn nu_pattern_count(&self) -> usize {
        self.nu_positions.len()
    }

    /// NU positions within the sorted FU set for a given NU rank.
    pub fn nu_positions(&self, nu_rank: usize) -> &[usize] {
        &self.nu_positions[nu_rank]
    }

    /// Absolute NU active set for a (FU rank, NU rank) pair.
    pub fn nu_absolute_set(&self, fu_rank: usize, nu_rank: usize) -> Vec<usize> {
        let i_f = &self.fu_patterns[fu_rank];
        let mut set: Vec<usize> = self.nu_positions[nu_rank].iter().map(|&p| i_f[p]).collect();
        set.sort_unstable();
        set
    }

    pub fn fu_rank_of(&self, pattern: &[usize]) -> Option<usize> {
        self.fu_rank_by_mask.get(&mask_of(pattern)).copied()
    }

    /// Rank of an absolute NU set under a given FU pattern, if legal.
    pub fn nu_rank_of(&self, fu_rank: usize, abs_set: &[usize]) -> Option<usize> {
        let target = mask_of(abs_set);
        (0..self.nu_positions.len())
            .find(|&r| mask_of(&self.nu_absolute_set(fu_rank, r)) == target)
    }

    /// All legal FU subblock hypotheses in canonical order (pattern rank
    /// major, symbol bits minor) — the set the detectors scan.
    pub fn fu_realizations(&self) -> &[Realization] {
        &self.fu_realizations
    }

    /// Legal NU hypotheses conditioned on a detected FU pattern.
    pub fn nu_realizations(&self, fu_rank: usize) -> &[Realization] {
        &self.nu_realizations[fu_rank]
    }

    /// Recovers the FU bit group from a legal FU subblock realization.
    pub fn demap_fu(&self, x_f: &[Complex64]) -> Result<BitGroup> {
        let set = active_set(x_f);
        let rank = self
            .fu_rank_of(&set)
            .ok_or_else(|| Error::Pattern(format!("FU active set {set:?} not in codebook")))?;
        Ok(BitGroup {
            index_bits: int_to_bits(rank, self.geom.fu_index_bits()),
            symbol_bits: set.iter().map(|&i| x_f[i].re < 0.0).collect(),
            borrowed: 0,
        })
    }

    /// Recovers the NU bit group from a legal NU subblock realization, given
    /// the FU active set it was nested in.
    pub fn demap_nu(&self, x_n: &[Complex64], i_f: &[usize]) -> Result<BitGroup> {
        let set = active_set(x_n);
        let fu_rank = self
            .fu_rank_of(i_f)
            .ok_or_else(|| Error::Pattern(format!("FU active set {i_f:?} not in codebook")))?;
        let rank = self.nu_rank_of(fu_rank, &set).ok_or_else(|| {
            Error::Pattern(format!("NU active set {set:?} not nested in {i_f:?}"))
        })?;
        Ok(BitGroup {
            index_bits: int_to_bits(rank, self.geom.nu_index_bits()),
            symbol_bits: set.iter().map(|&i| x_n[i].re < 0.0).collect(),
            borrowed: 0,
        })
    }

    /// Full codebook as CSV (`mixed_index_bits,I_F,I_N`), subcarriers
    /// numbered from 1, sets joined with `|`.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("mixed_index_bits,I_F,I_N\n");
        let width = self.geom.envelope_bits();
        for value in 0..(1usize << width) {
            let bits = int_to_bits(value, width);
            let (i_f, i_n) = self.form_envelope(&bits).expect("width matches");
            let bit_str: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
            out.push_str(&format!(
                "{},{},{}\n",
                if bit_str.is_empty() { "-" } else { &bit_str },
                fmt_set_one_based(&i_f),
                fmt_set_one_based(&i_n)
            ));
        }
        out
    }
}

fn enumerate_realizations(patterns: &[Vec<usize>], l: usize) -> Vec<Realization> {
    let mut out = Vec::new();
    for (rank, pattern) in patterns.iter().enumerate() {
        let k = pattern.len();
        for sym in 0..(1usize << k) {
            let bits = int_to_bits(sym, k as u32);
            let vector = map_subblock(pattern, &bits, l).expect("consistent lengths");
            out.push(Realization {
                vector,
                pattern_rank: rank,
                symbol_index: sym,
                mask: mask_of(pattern),
            });
        }
    }
    out
}

/// Published reference codebook for the scheme where both users run index
/// modulation independently (no nesting): L=4, two active subcarriers each,
/// same table for both users.
const IM_NOMA_PATTERNS: [[usize; 2]; 4] = [[0, 1], [1, 2], [2, 3], [0, 3]];

/// Codebook for the independent-pattern reference scheme (L=4, K=2, BPSK).
pub struct ImNomaCodec {
    realizations: Vec<Realization>,
}

impl Default for ImNomaCodec {
    fn default() -> Self {
        Self::new()
    }
}

impl ImNomaCodec {
    pub const L: usize = 4;
    pub const K: usize = 2;

    pub fn new() -> Self {
        let patterns: Vec<Vec<usize>> = IM_NOMA_PATTERNS.iter().map(|p| p.to_vec()).collect();
        Self {
            realizations: enumerate_realizations(&patterns, Self::L),
        }
    }

    pub fn pattern(&self, rank: usize) -> &'static [usize] {
        &IM_NOMA_PATTERNS[rank]
    }

    pub fn pattern_rank_of(&self, set: &[usize]) -> Option<usize> {
        IM_NOMA_PATTERNS
            .iter()
            .position(|p| mask_of(p) == mask_of(set))
    }

    /// Index bits per user (2) — four patterns.
    pub fn index_bits(&self) -> u32 {
        2
    }

    /// Total bits per user per subblock (2 index + 2 BPSK).
    pub fn user_bits(&self) -> u32 {
        4
    }

    pub fn realizations(&self) -> &[Realization] {
        &self.realizations
    }

    pub fn demap(&self, x: &[Complex64]) -> Result<BitGroup> {
        let set = active_set(x);
        let rank = self
            .pattern_rank_of(&set)
            .ok_or_else(|| Error::Pattern(format!("active set {set:?} not in codebook")))?;
        Ok(BitGroup {
            index_bits: int_to_bits(rank, self.index_bits()),
            symbol_bits: set.iter().map(|&i| x[i].re < 0.0).collect(),
            borrowed: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(l: usize, k_f: usize, k_n: usize) -> SubblockGeometry {
        SubblockGeometry::new(l, k_f, k_n).unwrap()
    }

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    fn one_based(set: &[usize]) -> Vec<usize> {
        set.iter().map(|&i| i + 1).collect()
    }

    #[test]
    fn index_bit_capacity_reference_values() {
        assert_eq!(index_bit_capacity(4, 3).unwrap(), 2);
        assert_eq!(index_bit_capacity(3, 2).unwrap(), 1);
        assert_eq!(index_bit_capacity(7, 0).unwrap(), 0);
        assert_eq!(index_bit_capacity(8, 4).unwrap(), 6); // C(8,4)=70
        assert!(index_bit_capacity(3, 4).is_err());
    }

    #[test]
    fn envelope_capacity_reference_values() {
        assert_eq!(geom(4, 3, 2).envelope_bits(), 3);
        assert_eq!(geom(2, 1, 1).envelope_bits(), 1);
        assert_eq!(geom(4, 4, 4).envelope_bits(), 0);
        assert_eq!(geom(4, 3, 2).fu_bits(), 5);
        assert_eq!(geom(4, 3, 2).nu_bits(), 3);
        assert_eq!(geom(2, 1, 1).fu_bits(), 2);
        assert_eq!(geom(2, 1, 1).nu_bits(), 1);
    }

    #[test]
    fn ternary_bound_values() {
        assert!((ternary_envelope_bound(4) - 81f64.log2()).abs() < 1e-12);
        assert!((ternary_envelope_bound(1) - 1.584962500721156).abs() < 1e-12);
        assert!((ternary_envelope_bound(2) - 3.169925001442312).abs() < 1e-12);
    }

    #[test]
    fn unrank_is_lexicographic_and_invertible() {
        // 3-subsets of 4 elements in lex order; rank 3 is {1,2,3} (0-based).
        assert_eq!(unrank_index_set(3, 4, 3).unwrap(), vec![1, 2, 3]);
        assert_eq!(unrank_index_set(0, 4, 2).unwrap(), vec![0, 1]);
        for l in 1..=8 {
            for k in 0..=l {
                let total = binomial(l, k);
                let mut prev: Option<Vec<usize>> = None;
                for r in 0..total {
                    let set = unrank_index_set(r, l, k).unwrap();
                    assert_eq!(rank_index_set(&set, l).unwrap(), r);
                    if let Some(p) = prev {
                        assert!(p < set, "lex order violated at l={l} k={k} r={r}");
                    }
                    prev = Some(set);
                }
                assert!(unrank_index_set(total, l, k).is_err());
            }
        }
    }

    #[test]
    fn published_432_table_rows() {
        let codec = NomaIeCodec::new(geom(4, 3, 2)).unwrap();
        let expected = [
            ("000", vec![2, 3, 4], vec![3, 4]),
            ("001", vec![2, 3, 4], vec![2, 3]),
            ("010", vec![1, 3, 4], vec![3, 4]),
            ("011", vec![1, 3, 4], vec![1, 3]),
            ("100", vec![1, 2, 4], vec![2, 4]),
            ("101", vec![1, 2, 4], vec![1, 2]),
            ("110", vec![1, 2, 3], vec![2, 3]),
            ("111", vec![1, 2, 3], vec![1, 2]),
        ];
        for (bit_str, i_f, i_n) in expected {
            let (got_f, got_n) = codec.form_envelope(&bits(bit_str)).unwrap();
            assert_eq!(one_based(&got_f), i_f, "I_F for {bit_str}");
            assert_eq!(one_based(&got_n), i_n, "I_N for {bit_str}");
        }
    }

    #[test]
    fn table_csv_format() {
        let codec = NomaIeCodec::new(geom(4, 3, 2)).unwrap();
        let csv = codec.table_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "mixed_index_bits,I_F,I_N");
        assert_eq!(lines.next().unwrap(), "000,2|3|4,3|4");
        assert_eq!(csv.lines().count(), 9);
        assert!(csv.contains("011,1|3|4,1|3"));
    }

    #[test]
    fn map_subblock_reference_values() {
        let x = map_subblock(&[0, 2, 3], &bits("000"), 4).unwrap();
        let want = [1.0, 0.0, 1.0, 1.0];
        for (v, w) in x.iter().zip(want) {
            assert_eq!(v.re, w);
            assert_eq!(v.im, 0.0);
        }
        let x = map_subblock(&[0, 2], &bits("10"), 4).unwrap();
        assert_eq!(x[0].re, -1.0);
        assert_eq!(x[2].re, 1.0);
        assert_eq!(x[1].norm_sqr(), 0.0);
        let empty = map_subblock(&[], &[], 4).unwrap();
        assert!(empty.iter().all(|v| v.norm_sqr() == 0.0));
        assert!(map_subblock(&[0, 1], &bits("1"), 4).is_err());
    }

    fn roundtrip_exhaustive(g: SubblockGeometry) {
        let codec = NomaIeCodec::new(g).unwrap();
        let env = g.envelope_bits();
        let split = g.fu_index_bits() as usize;
        let mut seen = std::collections::HashSet::new();
        for idx in 0..(1usize << env) {
            let mixed = int_to_bits(idx, env);
            let (i_f, i_n) = codec.form_envelope(&mixed).unwrap();
            assert!(i_n.iter().all(|i| i_f.contains(i)), "nesting violated");
            assert_eq!(i_f.len(), g.k_f());
            assert_eq!(i_n.len(), g.k_n());
            seen.insert((i_f.clone(), i_n.clone()));
            for sf in 0..(1usize << g.k_f()) {
                for sn in 0..(1usize << g.k_n()) {
                    let fb = int_to_bits(sf, g.k_f() as u32);
                    let nb = int_to_bits(sn, g.k_n() as u32);
                    let x_f = map_subblock(&i_f, &fb, g.l()).unwrap();
                    let x_n = map_subblock(&i_n, &nb, g.l()).unwrap();
                    let df = codec.demap_fu(&x_f).unwrap();
                    let dn = codec.demap_nu(&x_n, &i_f).unwrap();
                    assert_eq!(df.index_bits, mixed[..split].to_vec());
                    assert_eq!(dn.index_bits, mixed[split..].to_vec());
                    assert_eq!(df.symbol_bits, fb);
                    assert_eq!(dn.symbol_bits, nb);
                }
            }
        }
        assert_eq!(seen.len(), 1 << env, "pattern pairs must be distinct");
    }

    #[test]
    fn roundtrip_exhaustive_432() {
        roundtrip_exhaustive(geom(4, 3, 2));
    }

    #[test]
    fn roundtrip_exhaustive_211() {
        roundtrip_exhaustive(geom(2, 1, 1));
    }

    #[test]
    fn roundtrip_more_geometries() {
        for (l, k_f, k_n) in [(4, 2, 1), (5, 3, 2), (6, 4, 2), (4, 4, 4), (4, 3, 0), (8, 4, 3)] {
            roundtrip_exhaustive(geom(l, k_f, k_n));
        }
    }

    #[test]
    fn full_activation_collapses_to_plain_superposition() {
        // Degenerate geometry: K_N=K_F=L leaves no index bits at all.
        let g = geom(4, 4, 4);
        let codec = NomaIeCodec::new(g).unwrap();
        let (i_f, i_n) = codec.form_envelope(&[]).unwrap();
        assert_eq!(i_f, vec![0, 1, 2, 3]);
        assert_eq!(i_n, vec![0, 1, 2, 3]);
        assert_eq!(codec.fu_realizations().len(), 16);
    }

    #[test]
    fn empty_nu_set_is_legal() {
        let g = geom(4, 3, 0);
        let codec = NomaIeCodec::new(g).unwrap();
        let (i_f, i_n) = codec.form_envelope(&bits("01")).unwrap();
        assert_eq!(i_n, Vec::<usize>::new());
        assert!(i_n.iter().all(|i| i_f.contains(i)));
        let x_n = map_subblock(&i_n, &[], 4).unwrap();
        let dn = codec.demap_nu(&x_n, &i_f).unwrap();
        assert!(dn.index_bits.is_empty() && dn.symbol_bits.is_empty());
    }

    #[test]
    fn demap_rejects_illegal_patterns() {
        let codec = NomaIeCodec::new(geom(4, 3, 2)).unwrap();
        // Two active subcarriers is not a legal FU pattern at (4,3,2).
        let x = map_subblock(&[0, 1], &bits("00"), 4).unwrap();
        assert!(matches!(codec.demap_fu(&x), Err(Error::Pattern(_))));
        // NU set not nested in the stated FU set.
        let x_n = map_subblock(&[0, 1], &bits("00"), 4).unwrap();
        assert!(codec.demap_nu(&x_n, &[1, 2, 3]).is_err());
    }

    #[test]
    fn form_envelope_rejects_wrong_length() {
        let codec = NomaIeCodec::new(geom(4, 3, 2)).unwrap();
        assert!(matches!(
            codec.form_envelope(&bits("01")),
            Err(Error::BitLength { got: 2, want: 3 })
        ));
    }

    #[test]
    fn realization_enumeration_order_and_size() {
        let codec = NomaIeCodec::new(geom(4, 3, 2)).unwrap();
        let chi = codec.fu_realizations();
        assert_eq!(chi.len(), 32); // 4 patterns x 8 symbol combos
        for (i, r) in chi.iter().enumerate() {
            assert_eq!(r.pattern_rank, i / 8);
            assert_eq!(r.symbol_index, i % 8);
            assert_eq!(r.mask.count_ones(), 3);
        }
        for fu_rank in 0..4 {
            let chi_n = codec.nu_realizations(fu_rank);
            assert_eq!(chi_n.len(), 8); // 2 placements x 4 symbol combos
            let fu_mask = chi[fu_rank * 8].mask;
            for r in chi_n {
                assert_eq!(r.mask & !fu_mask, 0, "NU support must nest in FU support");
            }
        }
    }

    #[test]
    fn im_noma_published_table() {
        let codec = ImNomaCodec::new();
        let expected = [
            ("00", vec![1, 2]),
            ("01", vec![2, 3]),
            ("10", vec![3, 4]),
            ("11", vec![1, 4]),
        ];
        for (bit_str, set) in expected {
            let rank = bits_to_int(&bits(bit_str));
            assert_eq!(one_based(codec.pattern(rank)), set, "pattern for {bit_str}");
        }
        assert_eq!(codec.realizations().len(), 16);
        // Roundtrip across the whole codebook.
        for r in codec.realizations() {
            let g = codec.demap(&r.vector).unwrap();
            assert_eq!(bits_to_int(&g.index_bits), r.pattern_rank);
            assert_eq!(bits_to_int(&g.symbol_bits), r.symbol_index);
        }
    }
}
