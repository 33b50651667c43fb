//! Length recursions, the β sequence, the ε bound, the eigenvalue given by
//! the generalized continued fraction, and a Weyl-sum probe.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sadic::{SadicParams, Tier};

/// `a_k`, `b_k`, `d_k`, `c_k`, `e_k` with `d_{k+1} = b_{k+1} d_k + a_{k+1} d_{k-1}`.
///
/// Indices follow the recursion: `a` and `b` are defined for `1 ≤ k ≤ K + 1`
/// (as far as the parameters reach), `d`, `c`, `e` for `-1 ≤ k ≤ K`.
#[derive(Clone, Debug)]
pub struct LengthSeq {
    a: Vec<BigInt>,
    b: Vec<BigInt>,
    d: Vec<BigInt>,
    c: Vec<BigInt>,
    e: Vec<BigInt>,
    pi0: BigInt,
    pi1: BigInt,
}

impl LengthSeq {
    pub fn levels(&self) -> usize {
        self.d.len() - 2
    }

    /// `a_k` for `1 ≤ k`.
    pub fn a(&self, k: usize) -> &BigInt {
        &self.a[k]
    }

    pub fn b(&self, k: usize) -> &BigInt {
        &self.b[k]
    }

    pub fn d(&self, k: isize) -> &BigInt {
        &self.d[(k + 1) as usize]
    }

    pub fn c(&self, k: isize) -> &BigInt {
        &self.c[(k + 1) as usize]
    }

    pub fn e(&self, k: isize) -> &BigInt {
        &self.e[(k + 1) as usize]
    }

    pub fn pi0_len(&self) -> &BigInt {
        &self.pi0
    }

    pub fn pi1_len(&self) -> &BigInt {
        &self.pi1
    }

    /// `a_1 ⋯ a_k` (empty product 1).
    pub fn a_product(&self, k: usize) -> BigInt {
        self.a[1..=k].iter().product()
    }

    /// Largest `a`/`b` index available.
    pub fn ab_len(&self) -> usize {
        self.a.len() - 1
    }
}

/// Exact length sequences up to `d_K`. Needs `K ≤ params.len()`; `a_{K+1}`
/// is included when the parameters reach it.
pub fn length_sequences(p: &SadicParams, k_max: usize) -> Result<LengthSeq> {
    let levels = p.levels();
    if k_max > levels.len() {
        return Err(Error::InvalidArgument(format!("level {k_max} requested but only {} parameter pairs given", levels.len())));
    }
    let big = |x: &BigUint| BigInt::from(x.clone());
    let pi0 = BigInt::from(p.pi().image(0).len());
    let pi1 = BigInt::from(p.pi().image(1).len());
    let mut a = vec![BigInt::zero(), BigInt::one()];
    let mut b = vec![BigInt::zero()];
    for t in levels {
        a.push(big(&t.n) - big(&t.m));
        b.push(big(&t.m));
    }
    // a has indices 0..=len+1, b 0..=len.
    let mut d = vec![&pi1 - &pi0, pi0.clone()];
    let mut c = vec![BigInt::one(), BigInt::zero()];
    let mut e = vec![BigInt::zero(), BigInt::one()];
    for k in 1..=k_max {
        for seq in [&mut d, &mut c, &mut e] {
            let next = &b[k] * &seq[k] + &a[k] * &seq[k - 1];
            seq.push(next);
        }
    }
    a.truncate((k_max + 2).min(a.len()));
    b.truncate((k_max + 2).min(b.len()));
    Ok(LengthSeq { a, b, d, c, e, pi0, pi1 })
}

/// Which step of the case analysis bounds `β_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseLabel {
    /// `j = 1` with `b_1 ≤ 4`: only `0 < β_1 < 2` is claimed.
    Initial,
    /// `b_j > 4`: `β_j < 0.9`.
    Case1,
    /// `a_{j+1} ≤ b_j ≤ 4`, `b_{j-1} ≤ 4`: `β_j < 0.96`.
    Case2,
    /// `a_{j+1} ≤ b_j ≤ 4`, `b_{j-1} > 4`: `β_j < 0.96` or `β_j β_{j-1} < 0.5`.
    Case3,
    /// `a_{j+1} = 2`, `b_j = 1`: `β_j β_{j-1} < 48/49` or `β_j β_{j-1} β_{j-2} < 0.52`.
    Case4,
    /// None of the hypotheses apply; only possible off the full-4/3 tier.
    Unclassified,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseLabel::Initial => "initial",
            CaseLabel::Case1 => "case1",
            CaseLabel::Case2 => "case2",
            CaseLabel::Case3 => "case3",
            CaseLabel::Case4 => "case4",
            CaseLabel::Unclassified => "unclassified",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct BetaSequence {
    /// `β_0, …, β_K` exactly; `β_j = a_{j+1} d_{j-1} / d_j`.
    pub betas: Vec<BigRational>,
    /// Labels for `j = 1..=K` (index 0 unused and set to `Initial`).
    pub labels: Vec<CaseLabel>,
    /// `Π_{j=1}^K β_j`.
    pub product: BigRational,
    /// `|π(0)| a_1 ⋯ a_{K+1} / d_K`, which must equal `product`.
    pub closed_product: BigRational,
}

fn ratio(n: impl Into<BigInt>, d: impl Into<BigInt>) -> BigRational {
    BigRational::new(n.into(), d.into())
}

impl BetaSequence {
    pub fn k(&self) -> usize {
        self.betas.len() - 1
    }

    pub fn beta_f64(&self, j: usize) -> f64 {
        rational_to_f64(&self.betas[j])
    }

    /// Whether the post-condition attached to the label of `β_j` holds.
    pub fn post_condition_holds(&self, j: usize) -> bool {
        let b = &self.betas;
        let lt = |x: &BigRational, n: i64, d: i64| *x < ratio(n, d);
        let two = || b[j].clone() * &b[j - 1];
        match self.labels[j] {
            // Reached with equality when |π(0)| = |π(1)| and (m_1, n_1) = (1, 3).
            CaseLabel::Initial => b[j].is_positive() && b[j] <= ratio(2, 1),
            CaseLabel::Case1 => lt(&b[j], 9, 10),
            CaseLabel::Case2 => lt(&b[j], 24, 25),
            CaseLabel::Case3 => lt(&b[j], 24, 25) || lt(&two(), 1, 2),
            CaseLabel::Case4 => lt(&two(), 48, 49) || (j >= 2 && lt(&(two() * &b[j - 2]), 13, 25)),
            CaseLabel::Unclassified => false,
        }
    }

    /// `Π_{j=1}^k β_j < 2 (48/49)^{k/2}`, compared exactly after squaring.
    pub fn product_bound_holds(&self, k: usize) -> bool {
        let prod: BigRational = self.betas[1..=k].iter().product();
        let lhs = &prod * &prod;
        let rhs = ratio(4, 1) * pow_ratio(48, 49, k as u32);
        lhs < rhs
    }
}

fn pow_ratio(n: u64, d: u64, e: u32) -> BigRational {
    BigRational::new(BigInt::from(n).pow(e), BigInt::from(d).pow(e))
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    // Scale so both parts fit in f64 without overflow.
    let n = x.numer();
    let d = x.denom();
    let shift = (n.bits().max(d.bits()) as i64 - 1000).max(0) as usize;
    let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

fn require_full(p: &SadicParams, what: &str) -> Result<()> {
    if p.admissibility().tier != Tier::Full43 {
        return Err(Error::Unsupported(format!(
            "{what} requires full-4/3 admissible parameters; violated: {}",
            p.admissibility().summary()
        )));
    }
    Ok(())
}

pub fn beta_sequence(p: &SadicParams, k_max: usize) -> Result<BetaSequence> {
    require_full(p, "the β case analysis")?;
    beta_sequence_unchecked(p, k_max)
}

/// β sequence without the admissibility gate; labels may be `Unclassified`.
pub fn beta_sequence_unchecked(p: &SadicParams, k_max: usize) -> Result<BetaSequence> {
    if k_max + 1 > p.levels().len() {
        return Err(Error::InvalidArgument(format!("β_{k_max} needs {} parameter pairs, have {}", k_max + 1, p.levels().len())));
    }
    let ls = length_sequences(p, k_max)?;
    let mut betas = Vec::with_capacity(k_max + 1);
    for j in 0..=k_max {
        let j = j as isize;
        betas.push(BigRational::new(ls.a(j as usize + 1) * ls.d(j - 1), ls.d(j).clone()));
    }
    let four = BigInt::from(4);
    let mut labels = vec![CaseLabel::Initial; k_max + 1];
    for j in 1..=k_max {
        let (aj1, bj) = (ls.a(j + 1), ls.b(j));
        labels[j] = if *bj > four {
            CaseLabel::Case1
        } else if j == 1 {
            CaseLabel::Initial
        } else if aj1 <= bj {
            if *ls.b(j - 1) <= four {
                CaseLabel::Case2
            } else {
                CaseLabel::Case3
            }
        } else if *aj1 == BigInt::from(2) && bj.is_one() {
            CaseLabel::Case4
        } else {
            CaseLabel::Unclassified
        };
    }
    let product: BigRational = betas[1..].iter().product();
    let closed_product = BigRational::new(ls.pi0_len() * ls.a_product(k_max + 1), ls.d(k_max as isize).clone());
    Ok(BetaSequence { betas, labels, product, closed_product })
}

#[derive(Clone, Debug)]
pub struct EpsilonBound {
    /// `(n_{K+1} + 1) |π(0)| Π_{i=1}^K (n_i − m_i) / d_{K+1}`.
    pub lhs: BigRational,
    /// `8 (48/49)^{K/2}` in floating point, for display.
    pub eps: f64,
    pub holds: bool,
}

pub fn epsilon_bound(p: &SadicParams, k: usize) -> Result<EpsilonBound> {
    require_full(p, "the ε bound")?;
    if k + 1 > p.levels().len() {
        return Err(Error::InvalidArgument(format!("ε_{k} needs {} parameter pairs", k + 1)));
    }
    let ls = length_sequences(p, k + 1)?;
    let n_next = BigInt::from(p.levels()[k].n.clone());
    let lhs = BigRational::new((n_next + 1u32) * ls.pi0_len() * ls.a_product(k + 1), ls.d(k as isize + 1).clone());
    // lhs < 8 (48/49)^{k/2}  ⇔  lhs² < 64 (48/49)^k.
    let holds = &lhs * &lhs < ratio(64, 1) * pow_ratio(48, 49, k as u32);
    if !holds {
        return Err(Error::BoundViolation(format!("ε bound fails at K = {k}: lhs = {}", rational_to_f64(&lhs))));
    }
    Ok(EpsilonBound { lhs, eps: 8.0 * (48.0f64 / 49.0).powf(k as f64 / 2.0), holds })
}

/// Fixed-point binary number `mantissa / 2^bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixed {
    pub mantissa: BigInt,
    pub bits: u64,
}

impl Fixed {
    pub fn from_rational(x: &BigRational, bits: u64) -> Self {
        let scaled = x * BigRational::from_integer(BigInt::one() << bits);
        Fixed { mantissa: round_half_up(&scaled), bits }
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&BigRational::new(self.mantissa.clone(), BigInt::one() << self.bits))
    }

    /// Decimal expansion with `digits` digits after the point (truncated).
    pub fn to_decimal(&self, digits: usize) -> String {
        let neg = self.mantissa.is_negative();
        let m = self.mantissa.abs();
        let int = &m >> self.bits;
        let frac = &m - (&int << self.bits);
        let scaled = (frac * BigInt::from(10).pow(digits as u32)) >> self.bits;
        let sign = if neg { "-" } else { "" };
        format!("{sign}{int}.{:0>width$}", scaled.to_string(), width = digits)
    }
}

fn round_half_up(x: &BigRational) -> BigInt {
    let two = BigInt::from(2);
    (x.numer() * &two + x.denom()).div_floor(&(x.denom() * &two))
}

/// Distance from `x` to the nearest integer, exactly.
pub fn dist_to_integer(x: &BigRational) -> BigRational {
    let fl = x.floor();
    let frac = x - &fl;
    let other = BigRational::one() - &frac;
    if frac < other {
        frac
    } else {
        other
    }
}

#[derive(Clone, Debug)]
pub struct EigenvalueEstimate {
    pub k: usize,
    /// Convergent `c_K / d_K`.
    pub alpha: BigRational,
    /// `|π(0)| a_1 ⋯ a_{K+1} / (d_K d_{K+1})`, strict bound on `|α − c_K/d_K|`.
    pub error_bound: BigRational,
    /// Convergent `c_K / e_K` of the continued fraction `β`.
    pub beta_cf: BigRational,
    pub alpha_fixed: Fixed,
    pub beta_fixed: Fixed,
    pub precision_bits: u64,
    /// `⟨d_k c_K/d_K⟩` for `k = 0..=K`, with the certified enclosure of
    /// `⟨d_k α⟩` obtained by widening with `d_k · error_bound`.
    pub distances: Vec<DistanceEntry>,
}

#[derive(Clone, Debug)]
pub struct DistanceEntry {
    pub k: usize,
    pub d_k: BigInt,
    pub approx: BigRational,
    /// Upper bound on `⟨d_k α⟩`.
    pub upper: BigRational,
    /// `|π(0)| a_1 ⋯ a_{k+1} / d_{k+1}`.
    pub decay_bound: BigRational,
}

/// α from the convergent `c_K / d_K`. Needs `K + 1` parameter pairs.
/// `bits` is the output precision; fails with `InsufficientPrecision` when
/// the certified error exceeds `2^-bits`.
pub fn eigenvalue(p: &SadicParams, k: usize, bits: u64) -> Result<EigenvalueEstimate> {
    if k < 2 {
        return Err(Error::InvalidArgument("eigenvalue needs K ≥ 2".into()));
    }
    if bits < 64 {
        return Err(Error::InvalidArgument("eigenvalue needs at least 64 bits".into()));
    }
    if k + 1 > p.levels().len() {
        return Err(Error::InvalidArgument(format!("eigenvalue at K = {k} needs {} parameter pairs", k + 1)));
    }
    let ls = length_sequences(p, k + 1)?;
    let ki = k as isize;
    let alpha = BigRational::new(ls.c(ki).clone(), ls.d(ki).clone());
    let error_bound = BigRational::new(ls.pi0_len() * ls.a_product(k + 1), ls.d(ki) * ls.d(ki + 1));
    // Rounding to `bits` must not swamp the certified error.
    let resolution = |b: u64| BigRational::new(BigInt::one(), BigInt::one() << b);
    if resolution(bits) > error_bound {
        let mut needed = (error_bound.denom().bits() as i64 - error_bound.numer().bits() as i64 - 1).max(0) as u64;
        while resolution(needed) > error_bound {
            needed += 1;
        }
        return Err(Error::InsufficientPrecision { needed_bits: needed });
    }
    let beta_cf = BigRational::new(ls.c(ki).clone(), ls.e(ki).clone());
    let mut distances = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let dj = ls.d(j as isize).clone();
        let approx = dist_to_integer(&(BigRational::from_integer(dj.clone()) * &alpha));
        let upper = &approx + BigRational::from_integer(dj.clone()) * &error_bound;
        let decay_bound = BigRational::new(ls.pi0_len() * ls.a_product(j + 1), ls.d(j as isize + 1).clone());
        distances.push(DistanceEntry { k: j, d_k: dj, approx, upper, decay_bound });
    }
    Ok(EigenvalueEstimate {
        k,
        alpha_fixed: Fixed::from_rational(&alpha, bits),
        beta_fixed: Fixed::from_rational(&beta_cf, bits),
        alpha,
        error_bound,
        beta_cf,
        precision_bits: bits,
        distances,
    })
}

/// `β / (|π(1)| β + |π(0)| (1 − β))`.
pub fn alpha_from_beta(beta: &BigRational, pi0: usize, pi1: usize) -> BigRational {
    let one = BigRational::one();
    let denom = BigRational::from_integer(pi1.into()) * beta + BigRational::from_integer(pi0.into()) * (one - beta);
    beta / denom
}

/// A probe frequency `num / den` with `den < 2^64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Frequency {
    pub num: u64,
    pub den: u64,
}

impl Frequency {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("frequency denominator is zero".into()));
        }
        Ok(Frequency { num: num % den, den })
    }

    /// Nearest fraction with denominator `2^62` (error below `2^-63`).
    pub fn from_rational(x: &BigRational) -> Self {
        let den = 1u64 << 62;
        let frac = x - x.floor();
        let scaled = round_half_up(&(frac * BigRational::from_integer(BigInt::from(den))));
        let num = scaled.to_u64().unwrap_or(0) % den;
        Frequency { num, den }
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!("frequency {x} is not finite")));
        }
        let r = BigRational::from_float(x).ok_or_else(|| Error::InvalidArgument(format!("frequency {x}")))?;
        Ok(Self::from_rational(&r))
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

const PROBE_CHUNK: usize = 1 << 16;

/// `|(1/N) Σ_{j<N} e^{-2πi f j} χ(x_j)|` with `χ(0) = 1`, `χ(1) = -1`,
/// evaluated at every `N` in `ladder` (ascending, each ≤ `|x|`). Phases are
/// reduced exactly; chunk sums are merged in index order.
pub fn weyl_ladder(x: &[u8], freq: Frequency, ladder: &[usize]) -> Result<Vec<f64>> {
    let top = *ladder.last().ok_or_else(|| Error::InvalidArgument("empty ladder".into()))?;
    if ladder.windows(2).any(|w| w[0] > w[1]) || ladder[0] == 0 {
        return Err(Error::InvalidArgument("ladder must be positive and ascending".into()));
    }
    if x.len() < top {
        return Err(Error::WordTooShort { needed: top, have: x.len() });
    }
    // Chunk boundaries include every ladder point so each prefix sum is a
    // sum of whole chunks.
    let mut cuts: Vec<usize> = (0..top).step_by(PROBE_CHUNK).collect();
    cuts.extend_from_slice(ladder);
    cuts.sort_unstable();
    cuts.dedup();
    let mut bounds: Vec<(usize, usize)> = Vec::with_capacity(cuts.len());
    let mut start = 0;
    for &c in &cuts {
        if c > start {
            bounds.push((start, c));
            start = c;
        }
    }
    let sums: Vec<(f64, f64)> = bounds.par_iter().map(|&(lo, hi)| chunk_sum(x, freq, lo, hi)).collect();
    let mut out = Vec::with_capacity(ladder.len());
    let (mut re, mut im) = (0.0f64, 0.0f64);
    let mut li = 0;
    for (&(_, hi), &(r, i)) in bounds.iter().zip(&sums) {
        re += r;
        im += i;
        while li < ladder.len() && ladder[li] == hi {
            out.push((re * re + im * im).sqrt() / hi as f64);
            li += 1;
        }
    }
    Ok(out)
}

fn chunk_sum(x: &[u8], freq: Frequency, lo: usize, hi: usize) -> (f64, f64) {
    let den = freq.den as u128;
    let step = freq.num as u128;
    let mut phase = (lo as u128 * step) % den;
    let tau = std::f64::consts::TAU;
    // Kahan-compensated sums keep the per-chunk error near one ulp.
    let (mut re, mut im, mut cre, mut cim) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &s in &x[lo..hi] {
        let theta = tau * (phase as f64 / den as f64);
        let sign = if s == 0 { 1.0 } else { -1.0 };
        let (sn, cs) = theta.sin_cos();
        let yr = sign * cs - cre;
        let tr = re + yr;
        cre = (tr - re) - yr;
        re = tr;
        let yi = -sign * sn - cim;
        let ti = im + yi;
        cim = (ti - im) - yi;
        im = ti;
        phase += step;
        if phase >= den {
            phase -= den;
        }
    }
    (re, im)
}

pub fn weyl_probe(x: &[u8], freq: Frequency, n: usize) -> Result<f64> {
    Ok(weyl_ladder(x, freq, &[n])?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::substitution::Substitution;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> BigRational {
        ratio(n, d)
    }

    #[test]
    fn fibonacci_lengths() {
        let p = fixtures::fibonacci(40);
        let ls = length_sequences(&p, 10).unwrap();
        let d: Vec<i64> = (-1..=10).map(|k| ls.d(k).to_i64().unwrap()).collect();
        assert_eq!(d, vec![0, 1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
        assert_eq!(ls.d(1), &(ls.b(1) * ls.d(0) + ls.a(1) * ls.d(-1)));
    }

    #[test]
    fn weak_mix_seed_d2() {
        let p = SadicParams::from_pairs(crate::Substitution::identity(2), &[(1, 2), (4, 8)]).unwrap();
        let ls = length_sequences(&p, 2).unwrap();
        assert_eq!(ls.d(2), &BigInt::from(5));
    }

    #[test]
    fn fibonacci_betas() {
        let b = beta_sequence(&fixtures::fibonacci(10), 4).unwrap();
        assert_eq!(b.betas[1..], [r(1, 1), r(1, 2), r(2, 3), r(3, 5)]);
        assert_eq!(b.product, r(1, 5));
        assert_eq!(b.product, b.closed_product);
    }

    #[test]
    fn constant_24_is_case2() {
        let b = beta_sequence(&fixtures::constant(2, 4, 40), 30).unwrap();
        for j in 2..=30 {
            assert_eq!(b.labels[j], CaseLabel::Case2);
            assert!(b.betas[j] < r(24, 25));
            assert!(b.post_condition_holds(j));
        }
    }

    #[test]
    fn epsilon_examples() {
        let e = epsilon_bound(&fixtures::fibonacci(10), 4).unwrap();
        assert_eq!(e.lhs, r(3, 8));
        assert!((e.eps - 7.68).abs() < 0.01);
        assert_eq!(epsilon_bound(&fixtures::fibonacci(10), 0).unwrap().eps, 8.0);
        let e = epsilon_bound(&fixtures::constant(2, 4, 30), 20).unwrap();
        assert!(e.holds && rational_to_f64(&e.lhs) < 8.0 * (48.0f64 / 49.0).powi(10));
    }

    #[test]
    fn eigenvalue_fibonacci() {
        let est = eigenvalue(&fixtures::fibonacci(60), 40, 64).unwrap();
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!((est.alpha_fixed.to_f64() - golden).abs() < 1e-15);
        assert_eq!(est.alpha, est.beta_cf);
        let d3 = &est.distances[3];
        assert!((rational_to_f64(&d3.approx) - 0.1459).abs() < 1e-4);
        assert_eq!(d3.decay_bound, r(1, 5));
        assert!(d3.upper < d3.decay_bound);
        let ls = length_sequences(&fixtures::fibonacci(60), 40).unwrap();
        for k in -1..=40 {
            assert_eq!(ls.d(k), &(ls.d(-1) * ls.c(k) + ls.d(0) * ls.e(k)));
        }
    }

    #[test]
    fn eigenvalue_precision_request() {
        let est = eigenvalue(&fixtures::fibonacci(40), 30, 256).unwrap();
        assert!(rational_to_f64(&est.error_bound) < 1e-12);
        assert!(est.alpha_fixed.to_decimal(10).starts_with("0.6180339887"));
        match eigenvalue(&fixtures::fibonacci(400), 200, 256) {
            Err(Error::InsufficientPrecision { needed_bits }) => {
                assert!(needed_bits > 256);
                assert!(eigenvalue(&fixtures::fibonacci(400), 200, needed_bits).is_ok());
                assert!(eigenvalue(&fixtures::fibonacci(400), 200, needed_bits - 1).is_err());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn alpha_from_beta_matches_convergents() {
        let p = fixtures::pi_variant(60);
        let est = eigenvalue(&p, 30, 4096).unwrap();
        let via_beta = alpha_from_beta(&est.beta_cf, 2, 3);
        let diff = rational_to_f64(&(via_beta - &est.alpha)).abs();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn weyl_probe_basics() {
        let zeros = vec![0u8; 5000];
        let m = weyl_probe(&zeros, Frequency::new(0, 1).unwrap(), 5000).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
        let alt: Vec<u8> = (0..5000).map(|i| (i % 2) as u8).collect();
        assert!((weyl_probe(&alt, Frequency::new(1, 2).unwrap(), 5000).unwrap() - 1.0).abs() < 1e-9);
        assert!(weyl_probe(&alt, Frequency::new(0, 1).unwrap(), 5000).unwrap() < 1e-12);
    }

    #[test]
    fn weyl_ladder_matches_direct_sum() {
        let x: Vec<u8> = (0..200_000u64).map(|i| ((i * 7 + i / 3) % 2) as u8).collect();
        let f = Frequency::new(3, 7).unwrap();
        let ladder = [1000, 70_000, 200_000];
        let got = weyl_ladder(&x, f, &ladder).unwrap();
        for (&n, g) in ladder.iter().zip(got) {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for (j, &s) in x[..n].iter().enumerate() {
                let th = std::f64::consts::TAU * ((j as u64 * 3 % 7) as f64 / 7.0);
                let c = if s == 0 { 1.0 } else { -1.0 };
                re += c * th.cos();
                im -= c * th.sin();
            }
            assert!(((re * re + im * im).sqrt() / n as f64 - g).abs() < 1e-9);
        }
    }

    #[test]
    fn product_bound_fails_at_one_when_beta_one_is_two() {
        let p = SadicParams::from_pairs(Substitution::identity(2), &[(1, 3), (3, 6), (1, 2)]).unwrap();
        let b = beta_sequence(&p, 2).unwrap();
        assert_eq!(b.betas[1], r(2, 1));
        assert!(b.post_condition_holds(1));
        assert!(!b.product_bound_holds(1));
        assert!(b.product_bound_holds(2));
    }

    fn ls_first_gap_zero(p: &SadicParams) -> bool {
        p.pi().image(0).len() == p.pi().image(1).len()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn betaprod_and_telescoping(p in fixtures::full_stream_strategy(60)) {
            let b = beta_sequence(&p, 58).unwrap();
            prop_assert_eq!(&b.product, &b.closed_product);
            for j in 1..=58 {
                // With d_{-1} = 0 and (m_1, n_1) = (1, 3), beta_1 = 2 exactly.
                let edge = j == 1 && ls_first_gap_zero(&p);
                prop_assert!(b.betas[j].is_positive());
                prop_assert!(b.betas[j] < r(2, 1) || (edge && b.betas[j] == r(2, 1)));
                prop_assert!(b.post_condition_holds(j), "j={} label={}", j, b.labels[j]);
                // At k = 1 the bound reads β_1 < 2√(48/49), which a β_1 close to 2 breaks.
                let exempt = j == 1 && &b.betas[1] * &b.betas[1] >= r(4 * 48, 49);
                prop_assert!(exempt || b.product_bound_holds(j), "j={}", j);
            }
            let ls = length_sequences(&p, 59).unwrap();
            for k in 0..58isize {
                let lhs = (ls.c(k) * ls.d(k + 1) - ls.c(k + 1) * ls.d(k)).abs();
                prop_assert_eq!(lhs, ls.pi0_len() * ls.a_product(k as usize + 1));
            }
        }
    }
}
