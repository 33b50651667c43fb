//! The weakly mixing example: `π = id`, `n_k = 2m_k`, and every height
//! `d_k = |ρ_k(0)|` prime for `k ≥ 2`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::language::LanguageTable;
use crate::sadic::{derived_lengths, ClosedForm, SadicParams};
use crate::substitution::{Substitution, TauParams};

/// Minimum `m_k` given the accepted `m_{k-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Growth {
    /// `m_k ≥ max(floor, m_{k-1}²)`.
    Squaring { floor: u64 },
    /// `m_k ≥ max(floor, ratio · m_{k-1})`, summable for `ratio ≥ 2`.
    Geometric { ratio: u64, floor: u64 },
}

impl Default for Growth {
    fn default() -> Self {
        Growth::Squaring { floor: 4 }
    }
}

impl Growth {
    fn minimum(&self, prev: &BigUint) -> BigUint {
        match *self {
            Growth::Squaring { floor } => (prev * prev).max(BigUint::from(floor)),
            Growth::Geometric { ratio, floor } => (prev * ratio).max(BigUint::from(floor)),
        }
    }
}

/// A slowly growing `f` with `f(q) → ∞`. When set, `m_k` is also made large
/// enough that `p(q) < q + f(q)` at `q = |v_k^{m_k-1} p_k|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slack {
    Sqrt,
    Log2,
}

impl Slack {
    pub fn eval(&self, q: &BigUint) -> BigUint {
        match self {
            Slack::Sqrt => q.sqrt(),
            Slack::Log2 => BigUint::from(q.bits().saturating_sub(1)),
        }
    }
}

/// Requirements on `m_k` from the slack function are refused past this size.
const SLACK_BITS_CAP: u64 = 4096;

#[derive(Clone, Debug)]
pub struct ExampleConfig {
    pub growth: Growth,
    pub kmax: usize,
    /// Candidates tried per level before giving up.
    pub search_cap: u64,
    pub slack: Option<Slack>,
}

impl Default for ExampleConfig {
    fn default() -> Self {
        ExampleConfig { growth: Growth::default(), kmax: 8, search_cap: 1 << 20, slack: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelChoice {
    pub k: usize,
    #[serde(serialize_with = "crate::ser_display")]
    pub minimum: BigUint,
    #[serde(serialize_with = "crate::ser_display")]
    pub m: BigUint,
    #[serde(serialize_with = "crate::ser_display")]
    pub d: BigUint,
    /// Candidates examined, including the accepted one.
    pub tried: u64,
    /// `gcd(d_{k-1}, a_k d_{k-2}) = 1`, which makes the progression hit primes.
    pub coprime: bool,
}

#[derive(Clone, Debug)]
pub struct WeakMixExample {
    pub params: SadicParams,
    /// `d_0, …, d_kmax`.
    pub heights: Vec<BigUint>,
    pub choices: Vec<LevelChoice>,
}

fn is_prime(n: &BigUint) -> bool {
    match n.to_u64() {
        Some(small) => num_prime::nt_funcs::is_prime64(small),
        None => num_prime::nt_funcs::is_prime(n, None).probably(),
    }
}

/// Smallest `m ≥ lo` with `slack((m − 1)|v| + |p|) > |p| + K`.
fn slack_minimum(slack: Slack, lo: BigUint, v: &BigUint, p: &BigUint, k_const: &BigUint, level: usize) -> Result<BigUint> {
    let ok = |m: &BigUint| slack.eval(&((m - 1u32) * v + p)) > p + k_const;
    if ok(&lo) {
        return Ok(lo);
    }
    let mut hi = &lo * 2u32;
    while !ok(&hi) {
        if hi.bits() > SLACK_BITS_CAP {
            return Err(Error::ScheduleTooTight { level, tried: 0 });
        }
        hi *= 2u32;
    }
    let mut lo = lo;
    // ok(hi) holds, ok(lo) does not.
    while &hi - &lo > BigUint::one() {
        let mid = (&lo + &hi) >> 1;
        if ok(&mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// First `b ≥ minimum` with `b · d1 + c` prime, scanning in parallel chunks.
fn scan(minimum: &BigUint, d1: &BigUint, c: &BigUint, cap: u64) -> Option<(u64, BigUint)> {
    const CHUNK: u64 = 256;
    let mut start = 0u64;
    while start < cap {
        let end = (start + CHUNK).min(cap);
        let hit = (start..end).into_par_iter().find_first(|&t| is_prime(&((minimum + t) * d1 + c)));
        if let Some(t) = hit {
            return Some((t, minimum + t));
        }
        start = end;
    }
    None
}

pub fn build_example(cfg: &ExampleConfig) -> Result<WeakMixExample> {
    if cfg.kmax < 2 {
        return Err(Error::InvalidArgument("kmax must be at least 2".into()));
    }
    // The additive constant is p(1) − 1 = 1, since |s_2 p_2| = 1 here.
    let k_const = BigUint::one();
    let mut ms: Vec<BigUint> = vec![BigUint::one()];
    // d_{-1} = 0, d_0 = 1, d_1 = 1.
    let mut heights = vec![BigUint::one(), BigUint::one()];
    let (mut v, mut u, mut pre) = (BigUint::one(), BigUint::one(), BigUint::zero());
    // Advance lengths from level 1 to level 2 with (m_1, n_1) = (1, 2).
    let advance = |v: &BigUint, u: &BigUint, pre: &BigUint, m: &BigUint| {
        let m1 = m - 1u32;
        let n1 = m * 2u32 - 1u32;
        (v * &m1 + u, v * &n1 + u, v * &m1 + pre)
    };
    (v, u, pre) = advance(&v, &u, &pre, &ms[0]);
    let mut choices = Vec::new();
    for k in 2..=cfg.kmax {
        let prev_m = &ms[k - 2];
        let mut minimum = cfg.growth.minimum(prev_m);
        if let Some(s) = cfg.slack {
            minimum = slack_minimum(s, minimum, &v, &pre, &k_const, k)?;
        }
        // d_k = b_k d_{k-1} + a_k d_{k-2} with a_k = n_{k-1} − m_{k-1} = m_{k-1}.
        let d1 = &heights[k - 1];
        let c = prev_m * &heights[k - 2];
        let coprime = d1.gcd(&c).is_one();
        let (t, m) = scan(&minimum, d1, &c, cfg.search_cap).ok_or(Error::ScheduleTooTight { level: k, tried: cfg.search_cap })?;
        let d = &m * d1 + &c;
        (v, u, pre) = advance(&v, &u, &pre, &m);
        choices.push(LevelChoice { k, minimum, m: m.clone(), d: d.clone(), tried: t + 1, coprime });
        heights.push(d);
        ms.push(m);
    }
    let levels = ms
        .into_iter()
        .map(|m| {
            let n = &m * 2u32;
            TauParams::big(m, n)
        })
        .collect::<Result<Vec<_>>>()?;
    let params = SadicParams::new(Substitution::identity(2), levels)?;
    Ok(WeakMixExample { params, heights, choices })
}

/// `p` at the two landmark lengths of one level.
#[derive(Clone, Debug, Serialize)]
pub struct Landmark {
    pub k: usize,
    /// `|s_k v_k^{2m_k-2} p_k|`, where `p(q)/q` approaches 3/2.
    #[serde(serialize_with = "crate::ser_display")]
    pub q_hi: BigUint,
    /// Stated two-branch formula at `q_hi`.
    #[serde(serialize_with = "crate::ser_display")]
    pub p_hi_stated: BigInt,
    /// Brute-force-exact value at `q_hi`.
    #[serde(serialize_with = "crate::ser_display")]
    pub p_hi: BigInt,
    pub p_hi_table: Option<u64>,
    pub ratio_hi: f64,
    /// `2p(q_hi) − 3q_hi`, twice the excess over `1.5q`.
    #[serde(serialize_with = "crate::ser_display")]
    pub excess2_hi: BigInt,
    /// The stated value equals `1.5q − (|s_k| − |p_k|)/2 + K`.
    pub stated_identity: bool,
    /// `|v_k^{m_k-1} p_k|`, where `p(q)/q` approaches 1.
    #[serde(serialize_with = "crate::ser_display")]
    pub q_lo: BigUint,
    #[serde(serialize_with = "crate::ser_display")]
    pub p_lo: BigInt,
    pub p_lo_table: Option<u64>,
    pub ratio_lo: f64,
    /// `p(q_lo) < q_lo + f(q_lo)` for the requested slack function.
    pub below_slack: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LandmarkReport {
    #[serde(serialize_with = "crate::ser_display")]
    pub constant: BigInt,
    pub landmarks: Vec<Landmark>,
    /// `p(q_hi) − 1.5q_hi` strictly decreases with `k`.
    pub excess_decreasing: bool,
}

fn ratio_f64(p: &BigInt, q: &BigUint) -> f64 {
    crate::spectrum::rational_to_f64(&BigRational::new(p.clone(), BigInt::from(q.clone())))
}

/// Landmark values for `2 ≤ k ≤ kmax`, from the closed form and, where the
/// table reaches, from brute force. Without a table, `K` is derived from
/// `p(1) = 2`, which needs `|s_2 p_2| = 1`.
pub fn landmark_complexities(
    p: &SadicParams,
    kmax: usize,
    table: Option<&LanguageTable>,
    slack: Option<Slack>,
) -> Result<LandmarkReport> {
    if kmax < 2 || kmax > p.levels().len() {
        return Err(Error::InvalidArgument(format!("landmarks for k = 2..={kmax} need at least {kmax} parameter pairs")));
    }
    let cf = match table {
        Some(t) => ClosedForm::calibrate(&p.truncated(kmax), t)?,
        None => {
            let cf = ClosedForm::with_constant(&p.truncated(kmax), BigInt::one())?;
            if !cf.base.is_one() {
                return Err(Error::InsufficientData(format!("calibrating K needs p({}); pass a validated table", cf.base)));
            }
            cf
        }
    };
    let lens = derived_lengths(p, kmax)?;
    let mut landmarks = Vec::with_capacity(kmax - 1);
    for k in 2..=kmax {
        let l = &lens[k - 1];
        let m1 = p.m(k) - 1u32;
        let q_hi = &l.s + &l.v * (p.n(k) - 2u32) + &l.p;
        let q_lo = &l.v * &m1 + &l.p;
        let p_hi_stated = cf.eval_extended(&q_hi)?;
        let p_hi = cf.eval_corrected(&q_hi)?;
        let p_lo = cf.eval_corrected(&q_lo)?;
        let lookup = |q: &BigUint| -> Option<u64> {
            let t = table?;
            let q = q.to_usize()?;
            (q <= t.n_max()).then(|| t.p(q))
        };
        let p_hi_table = lookup(&q_hi);
        let p_lo_table = lookup(&q_lo);
        for (q, got, want) in [(&q_hi, &p_hi, p_hi_table), (&q_lo, &p_lo, p_lo_table)] {
            if let Some(w) = want {
                if *got != BigInt::from(w) {
                    return Err(Error::BoundViolation(format!("closed form gives {got} at q = {q}, table has {w}")));
                }
            }
        }
        let qi = BigInt::from(q_hi.clone());
        let excess2_hi = 2 * &p_hi - 3 * &qi;
        let stated_identity =
            2 * &p_hi_stated == 3 * &qi - (BigInt::from(l.s.clone()) - BigInt::from(l.p.clone())) + 2 * &cf.constant;
        let below_slack = slack.map(|s| p_lo < BigInt::from(&q_lo + s.eval(&q_lo)));
        landmarks.push(Landmark {
            k,
            ratio_hi: ratio_f64(&p_hi, &q_hi),
            ratio_lo: ratio_f64(&p_lo, &q_lo),
            q_hi,
            p_hi_stated,
            p_hi,
            p_hi_table,
            excess2_hi,
            stated_identity,
            q_lo,
            p_lo,
            p_lo_table,
            below_slack,
        });
    }
    let excess_decreasing = landmarks.windows(2).all(|w| w[1].excess2_hi < w[0].excess2_hi);
    Ok(LandmarkReport { constant: cf.constant.clone(), landmarks, excess_decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::certified_table;
    use crate::sadic::Tier;
    use crate::substitution::DEFAULT_BUDGET;

    fn small(kmax: usize) -> WeakMixExample {
        build_example(&ExampleConfig { kmax, ..Default::default() }).unwrap()
    }

    #[test]
    fn first_heights() {
        let ex = small(3);
        assert_eq!(ex.params.m(2), &BigUint::from(4u32));
        assert_eq!(ex.heights[2], BigUint::from(5u32));
        assert_eq!(ex.params.m(3), &BigUint::from(17u32));
        assert_eq!(ex.heights[3], BigUint::from(89u32));
        // 16 · 5 + 4 = 84 is rejected first.
        assert_eq!(ex.choices[1].tried, 2);
        assert_eq!(ex.params.admissibility().tier, Tier::Structural);
    }

    #[test]
    fn heights_prime_and_symmetric() {
        let ex = small(8);
        let ls = crate::spectrum::length_sequences(&ex.params, 7).unwrap();
        for k in 2..=8 {
            let d = &ex.heights[k];
            // Independent check of the height against the generic recursion.
            if k <= 7 {
                assert_eq!(BigInt::from(d.clone()), *ls.d(k as isize));
            }
            assert!(is_prime(d), "d_{k} = {d}");
            assert!(d > &ex.heights[k - 1]);
            assert!(ex.choices[k - 2].coprime);
            assert_eq!(ex.params.n(k), &(ex.params.m(k) * 2u32));
        }
        for k in 1..7 {
            // a_{k+1} = n_k − m_k = m_k = b_k.
            assert_eq!(ls.a(k + 1), ls.b(k));
        }
    }

    #[test]
    fn small_heights_by_trial_division() {
        let ex = small(4);
        for d in &ex.heights[2..] {
            let d = d.to_u64().unwrap();
            assert!((2..).take_while(|i| i * i <= d).all(|i| d % i != 0));
        }
    }

    #[test]
    fn tight_schedule_is_reported() {
        let err = build_example(&ExampleConfig { kmax: 4, search_cap: 1, ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::ScheduleTooTight { level: 3, tried: 1 }));
    }

    #[test]
    fn landmarks_against_table() {
        let ex = small(5);
        let (k, t) = certified_table(ex.params.pi(), ex.params.levels(), 2, 400, DEFAULT_BUDGET).unwrap();
        assert_eq!(k, 4);
        let with_table = landmark_complexities(&ex.params, 4, Some(&t), None).unwrap();
        let without = landmark_complexities(&ex.params, 4, None, None).unwrap();
        assert_eq!(with_table.constant, BigInt::one());
        for l in &with_table.landmarks[..2] {
            assert_eq!(l.p_hi_table.map(BigInt::from), Some(l.p_hi.clone()));
            assert_eq!(l.p_lo_table.map(BigInt::from), Some(l.p_lo.clone()));
        }
        for (l, w) in with_table.landmarks.iter().zip(&without.landmarks) {
            assert_eq!(l.p_hi, w.p_hi);
            assert!(l.stated_identity);
            assert_eq!(&l.p_hi_stated - 1, l.p_hi);
        }
    }

    #[test]
    fn landmark_ratios() {
        let ex = small(8);
        let r = landmark_complexities(&ex.params, 8, None, Some(Slack::Sqrt)).unwrap();
        assert!(r.excess_decreasing);
        let lens = derived_lengths(&ex.params, 8).unwrap();
        for l in &r.landmarks {
            let q = BigRational::from(BigInt::from(l.q_hi.clone()));
            let ratio = BigRational::new(l.p_hi.clone(), BigInt::from(l.q_hi.clone()));
            let v = BigInt::from(lens[l.k - 1].v.clone());
            let lo = BigRational::new(3.into(), 2.into()) - BigRational::from(3 * v) / &q;
            let hi = BigRational::new(3.into(), 2.into()) + BigRational::from(r.constant.clone()) / &q;
            assert!(lo < ratio && ratio < hi, "k = {}", l.k);
        }
        assert!((r.landmarks[3].ratio_hi - 1.5).abs() < 0.02);
        assert!(r.landmarks.last().unwrap().ratio_lo < 1.01);
    }

    #[test]
    fn slack_raises_the_schedule() {
        let cfg = ExampleConfig {
            kmax: 5,
            slack: Some(Slack::Sqrt),
            growth: Growth::Geometric { ratio: 2, floor: 4 },
            ..Default::default()
        };
        let ex = build_example(&cfg).unwrap();
        let r = landmark_complexities(&ex.params, 5, None, Some(Slack::Sqrt)).unwrap();
        assert!(r.landmarks.iter().all(|l| l.below_slack == Some(true)));
    }
}
