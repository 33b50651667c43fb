//! Recovering `π` and `(m_k, n_k)` from raw symbolic data: bi-special words,
//! return words, the `(a, b)` bootstrap and the gap-value induction.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::language::{block_table, special_words, LanguageTable};
use crate::sadic::{SadicParams, Tier};
use crate::substitution::{Substitution, TauParams, DEFAULT_BUDGET};
use crate::word::{is_root, Word};

fn letters(t: &LanguageTable) -> Vec<u8> {
    t.factors(1).into_iter().map(|f| f[0]).collect()
}

fn right_ext(t: &LanguageTable, alphabet: &[u8], w: &[u8]) -> Vec<u8> {
    let mut buf = w.to_vec();
    buf.push(0);
    alphabet
        .iter()
        .copied()
        .filter(|&c| {
            *buf.last_mut().expect("nonempty") = c;
            t.contains(&buf)
        })
        .collect()
}

fn need_length(t: &LanguageTable, n: usize) -> Result<()> {
    if n + 1 > t.n_max() {
        return Err(Error::InsufficientDepth { n: n + 1 });
    }
    Ok(())
}

/// The bi-special word that is the unique right-special and unique
/// left-special word of its length, reached by walking the Rauzy graph of
/// length-`q` words from the left-special to the right-special vertex.
pub fn unique_bispecial(t: &LanguageTable, q: usize) -> Result<Word> {
    t.require_validated()?;
    if q == 0 {
        return Err(Error::InvalidArgument("q must be positive".into()));
    }
    need_length(t, q)?;
    if t.p(q + 1) != t.p(q) + 1 {
        return Err(Error::NotApplicable(format!("p({}) − p({q}) = {}", q + 1, t.p(q + 1) as i64 - t.p(q) as i64)));
    }
    let report = special_words(t, q)?;
    let (Some(rs), Some(ls)) = (report.right_special.first(), report.left_special.first()) else {
        return Err(Error::NotApplicable(format!("no special words of length {q}")));
    };
    let alphabet = letters(t);
    let target = rs.word.letters();
    let mut cur = ls.word.letters().to_vec();
    let mut word = cur.clone();
    let mut steps = 0u64;
    while cur != target {
        let ext = right_ext(t, &alphabet, &cur);
        let [c] = ext[..] else {
            return Err(Error::InsufficientDepth { n: q + 1 });
        };
        word.push(c);
        cur.remove(0);
        cur.push(c);
        steps += 1;
        if steps > t.p(q) {
            return Err(Error::InsufficientDepth { n: q + 1 });
        }
    }
    let n = word.len();
    need_length(t, n)?;
    let check = special_words(t, n)?;
    let unique = check.right_special.len() == 1
        && check.left_special.len() == 1
        && check.right_special[0].word.letters() == &word[..]
        && check.left_special[0].word.letters() == &word[..]
        && check.right_special[0].letters.len() == 2;
    if !unique {
        return Err(Error::NotApplicable(format!("walk from length {q} does not end at a unique bi-special word")));
    }
    Ok(Word::from_slice(&word))
}

/// The two return words of `w`: cycle labels in the Rauzy graph, so that
/// `w u` and `w v` both end with `w`. `v` is the shorter one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReturnWords {
    pub u: Word,
    pub v: Word,
}

pub fn return_words(t: &LanguageTable, w: &[u8]) -> Result<ReturnWords> {
    t.require_validated()?;
    let n = w.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty word".into()));
    }
    need_length(t, n)?;
    let report = special_words(t, n)?;
    let unique = report.right_special.len() == 1
        && report.right_special[0].word.letters() == w
        && report.right_special[0].letters.len() == 2;
    if !unique {
        return Err(Error::NotApplicable(format!(
            "{} is not the unique right-special word of its length with two successors",
            Word::from_slice(w)
        )));
    }
    let alphabet = letters(t);
    let mut cycles = Vec::with_capacity(2);
    for &first in &report.right_special[0].letters {
        let mut cur = w.to_vec();
        let mut label = Vec::new();
        let mut c = first;
        loop {
            label.push(c);
            cur.remove(0);
            cur.push(c);
            if cur == w {
                break;
            }
            if label.len() as u64 > t.p(n) {
                return Err(Error::InsufficientDepth { n: n + 1 });
            }
            match right_ext(t, &alphabet, &cur)[..] {
                [next] => c = next,
                [] => return Err(Error::InsufficientDepth { n: n + 1 }),
                _ => return Err(Error::NotApplicable("second right-special vertex on a cycle".into())),
            }
        }
        cycles.push(Word::new(label)?);
    }
    cycles.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let v = cycles.pop().expect("two cycles");
    let u = cycles.pop().expect("two cycles");
    Ok(ReturnWords { u, v })
}

/// `r = head · root^j` with `j` maximal; `None` if `root` is empty.
fn strip_power<'a>(r: &'a [u8], root: &[u8]) -> (&'a [u8], usize) {
    let mut head = r;
    let mut j = 0;
    while !root.is_empty() && head.len() >= root.len() && head.ends_with(root) {
        head = &head[..head.len() - root.len()];
        j += 1;
    }
    (head, j)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BootstrapCase {
    /// `|w| < 3|v|`: `a = v`, `b = u^⋆ v`.
    Short,
    /// `|w| ≥ 3|v|` and `|u_0| ≤ |v|`: `a = u_0`, `b = v^⋆ u_0`.
    RefinedShortU0,
    /// `|w| ≥ 3|v|` and `|u_0| > |v|`: `a = v`, `b = u^⋆ v` from `u_0`.
    RefinedLongU0,
}

/// Result of the `(a, b)` construction at one bi-special word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bootstrap {
    pub q: usize,
    pub bispecial: Word,
    /// The bi-special word whose return words are parsed: `w` or `w_00`.
    pub anchor: Word,
    pub case: BootstrapCase,
    pub a: Word,
    pub b: Word,
    /// Return words of `anchor`, each `a` or `b a^j`.
    pub returns: ReturnWords,
}

fn check_ab(a: &[u8], b: &[u8]) -> bool {
    !a.is_empty() && !b.is_empty() && a[0] != b[0] && a.len() < b.len() && b.len() < 2 * a.len() && is_root(a, b)
}

/// The case analysis producing `a, b` from the bi-special word at length
/// `q`. Candidates that do not satisfy the expected shapes are refused with
/// `NotApplicable`; a missing short unique right-special suffix is the
/// complexity guard.
pub fn bootstrap(t: &LanguageTable, q: usize) -> Result<Bootstrap> {
    let w = unique_bispecial(t, q)?;
    let rw = return_words(t, &w)?;
    let (u, v) = (rw.u.letters(), rw.v.letters());
    if !is_root(v, &w) {
        return Err(Error::NotApplicable("shorter return word is not a root of w".into()));
    }
    if w.len() < 3 * v.len() {
        let (star, s) = strip_power(u, v);
        if s == 0 || star.is_empty() || star.len() >= v.len() {
            return Err(Error::NotApplicable("u is not u⋆v^s with a proper suffix u⋆ of v".into()));
        }
        let b = Word::from_slice(star).concat(&rw.v);
        if !check_ab(v, &b) {
            return Err(Error::NotApplicable("a, b fail the shape conditions".into()));
        }
        return Ok(Bootstrap { q, bispecial: w.clone(), anchor: w, case: BootstrapCase::Short, a: rw.v.clone(), b, returns: rw });
    }
    // A unique right-special suffix w_0 with |v| ≤ |w_0| < 2|v|.
    let w0_len = (v.len()..2 * v.len())
        .find(|&l| {
            l < t.n_max()
                && t.p(l + 1) == t.p(l) + 1
                && special_words(t, l)
                    .is_ok_and(|r| r.right_special.len() == 1 && r.right_special[0].word.letters() == &w[w.len() - l..])
        })
        .ok_or_else(|| {
            Error::ComplexityTooHigh(format!(
                "no suffix of the bi-special word with length in [{}, {}) is the unique right-special word of its length",
                v.len(),
                2 * v.len()
            ))
        })?;
    let w00 = unique_bispecial(t, w0_len)?;
    let rw0 = return_words(t, &w00)?;
    // v_0 starts with the same letter as v.
    let (v0, u0) = if rw0.v.letters()[0] == v[0] { (&rw0.v, &rw0.u) } else { (&rw0.u, &rw0.v) };
    if v0.letters() != v {
        return Err(Error::NotApplicable("return word v_0 of w_00 differs from v".into()));
    }
    let (case, a, b) = if u0.len() <= v.len() {
        let (star, s) = strip_power(v, u0.letters());
        if s == 0 || star.is_empty() || star.len() >= u0.len() {
            return Err(Error::NotApplicable("v is not v⋆u_0^s".into()));
        }
        (BootstrapCase::RefinedShortU0, u0.clone(), Word::from_slice(star).concat(u0))
    } else {
        let (star, s) = strip_power(u0.letters(), v);
        if s == 0 || star.is_empty() || star.len() >= v.len() {
            return Err(Error::NotApplicable("u_0 is not u⋆v^s".into()));
        }
        (BootstrapCase::RefinedLongU0, rw.v.clone(), Word::from_slice(star).concat(&rw.v))
    };
    if !check_ab(&a, &b) {
        return Err(Error::NotApplicable("a, b fail the shape conditions".into()));
    }
    Ok(Bootstrap { q, bispecial: w, anchor: w00, case, a, b, returns: rw0 })
}

/// Codes the stretch of `x` between the first and last occurrence of the
/// anchor as a word over `{0 = a, 1 = b}`.
fn code_over_ab(x: &[u8], boot: &Bootstrap) -> Result<Vec<u8>> {
    let anchor = boot.anchor.letters();
    let ends: Vec<usize> =
        x.windows(anchor.len()).enumerate().filter(|(_, f)| *f == anchor).map(|(i, _)| i + anchor.len()).collect();
    let (a, b) = (boot.a.letters(), boot.b.letters());
    let mut out = Vec::new();
    for pair in ends.windows(2) {
        let r = &x[pair[0]..pair[1]];
        if r == a {
            out.push(0);
            continue;
        }
        // `b` may itself end with `a`, so strip `b` from the front.
        let tail = r.strip_prefix(b).ok_or(Error::NotAConcatenation { level: 0, offset: pair[0] })?;
        let (rest, j) = strip_power(tail, a);
        if !rest.is_empty() {
            return Err(Error::NotAConcatenation { level: 0, offset: pair[0] });
        }
        out.push(1);
        out.extend(std::iter::repeat_n(0, j));
    }
    Ok(out)
}

/// One level of the induction: the two gap values between consecutive 1s
/// and the recoded stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelGaps {
    pub m: u64,
    pub n: u64,
    /// Full level blocks seen in the data.
    pub blocks: usize,
}

/// Reads `(m, n)` off the zero-runs between consecutive 1s and recodes the
/// full blocks `0^{m-1}1 ↦ 0`, `0^{n-1}1 ↦ 1`. `Ok(None)` unless both
/// gap values are visible.
fn induct(y: &[u8]) -> Result<Option<(LevelGaps, Vec<u8>)>> {
    let ones: Vec<usize> = y.iter().enumerate().filter(|(_, &c)| c == 1).map(|(i, _)| i).collect();
    let gaps: Vec<u64> = ones.windows(2).map(|p| (p[1] - p[0] - 1) as u64).collect();
    let distinct: BTreeSet<u64> = gaps.iter().copied().collect();
    if distinct.len() > 2 {
        return Err(Error::ComplexityTooHigh(format!(
            "three gap values between consecutive blocks: {:?}",
            distinct.iter().take(3).collect::<Vec<_>>()
        )));
    }
    if distinct.len() < 2 {
        return Ok(None);
    }
    let (lo, hi) = (*distinct.first().expect("two"), *distinct.last().expect("two"));
    let next = gaps.iter().map(|&g| u8::from(g == hi)).collect();
    Ok(Some((LevelGaps { m: lo + 1, n: hi + 1, blocks: gaps.len() }, next)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateStatus {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub status: CertificateStatus,
    /// Factor sets were compared for all lengths up to this one.
    pub length: usize,
    pub first_disagreement: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryResult {
    pub pi0: Word,
    pub pi1: Word,
    pub mk: Vec<u64>,
    pub nk: Vec<u64>,
    pub depth: usize,
    pub blocks: Vec<usize>,
    pub tier: Tier,
    pub bootstrap: Bootstrap,
    /// Length up to which the input's factor sets were treated as exact.
    pub working_length: usize,
    pub certificate: Certificate,
    pub canonicalization: &'static str,
}

impl RecoveryResult {
    pub fn params(&self) -> Result<SadicParams> {
        let pi = Substitution::new(vec![self.pi0.clone(), self.pi1.clone()])?;
        let pairs: Vec<(u64, u64)> = self.mk.iter().copied().zip(self.nk.iter().copied()).collect();
        SadicParams::from_pairs(pi, &pairs)
    }
}

/// Largest `n` for which the first three quarters of `x` already show every
/// factor of `x` of each length up to `n`.
pub fn working_length(x: &[u8], cap: usize) -> Result<usize> {
    let cap = cap.min(x.len() / 8);
    if cap < 2 {
        return Err(Error::InsufficientData(format!("{} symbols are too few", x.len())));
    }
    let full = LanguageTable::from_words(&[Word::from_slice(x)], cap, "input")?;
    let head = LanguageTable::from_words(&[Word::from_slice(&x[..x.len() * 3 / 4])], cap, "input head")?;
    Ok(head.first_disagreement(&full, cap).map_or(cap, |n| n - 1))
}

const WORKING_CAP: usize = 4096;

struct Attempt {
    boot: Bootstrap,
    levels: Vec<LevelGaps>,
}

fn attempt(x: &[u8], boot: Bootstrap, depth: usize) -> Result<Attempt> {
    let mut y = code_over_ab(x, &boot)?;
    let mut levels = Vec::new();
    while levels.len() < depth {
        match induct(&y)? {
            Some((g, next)) => {
                levels.push(g);
                y = next;
            }
            None => break,
        }
    }
    Ok(Attempt { boot, levels })
}

fn certify(x_table: &LanguageTable, a: &Attempt, working: usize) -> Result<Certificate> {
    let d = a.levels.len();
    let pi = Substitution::new(vec![a.boot.a.clone(), a.boot.b.clone()])?;
    let params: Vec<TauParams> = a.levels.iter().map(|g| TauParams::new(g.m, g.n)).collect::<Result<_>>()?;
    let lens = crate::substitution::level_lengths(&pi, &params, d - 1);
    let (v, u) = &lens[d - 1];
    let reach = (v.min(u) + 1u32).min(BigUint::from(working));
    let length = usize::try_from(reach).expect("bounded by the working length");
    let regenerated = block_table(&pi, &params, d - 1, length, DEFAULT_BUDGET)?;
    let first_disagreement = regenerated.first_disagreement(x_table, length);
    let status = if first_disagreement.is_none() { CertificateStatus::Pass } else { CertificateStatus::Fail };
    Ok(Certificate { status, length, first_disagreement })
}

/// Recovers `π = (a, b)` and up to `depth` pairs `(m_k, n_k)` from `x`.
///
/// Every bi-special candidate in the working range is bootstrapped. The
/// result is the candidate reaching the greatest depth (at most `depth`),
/// ties broken by the longest `a`, among those that certify; if none
/// certifies, that candidate is returned with a failed certificate.
pub fn recover_structure(x: &[u8], depth: usize) -> Result<RecoveryResult> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let working = working_length(x, WORKING_CAP)?;
    let table = LanguageTable::from_words(&[Word::from_slice(x)], working, "input (prefix-stable)")?.assume_validated();
    if working >= 8 && (working / 2..=working).all(|q| 3 * table.p(q) >= 4 * q as u64) {
        return Err(Error::ComplexityTooHigh(format!("p(q) ≥ 4q/3 for every q in [{}, {working}]", working / 2)));
    }
    let mut seen = BTreeSet::new();
    let mut attempts = Vec::new();
    let mut too_high = None;
    let mut q = 1;
    while q < working {
        if table.p(q + 1) != table.p(q) + 1 {
            q += 1;
            continue;
        }
        // Every length up to that of the bi-special word leads to the same word.
        let next = unique_bispecial(&table, q).map_or(q + 1, |w| w.len().max(q) + 1);
        match bootstrap(&table, q) {
            Ok(boot) => {
                if seen.insert((boot.a.clone(), boot.b.clone())) {
                    attempts.push(attempt(x, boot, depth));
                }
            }
            Err(e @ Error::ComplexityTooHigh(_)) => too_high = Some(e),
            Err(_) => {}
        }
        q = next;
    }
    let mut ok: Vec<Attempt> = Vec::new();
    for a in attempts {
        match a {
            Ok(a) if !a.levels.is_empty() => ok.push(a),
            Ok(_) => {}
            Err(e @ Error::ComplexityTooHigh(_)) => return Err(e),
            Err(_) => {}
        }
    }
    if ok.is_empty() {
        return Err(too_high
            .unwrap_or_else(|| Error::InsufficientData("no bi-special word yields a bootstrap with a visible level".into())));
    }
    ok.sort_by(|p, q| q.levels.len().cmp(&p.levels.len()).then(q.boot.a.len().cmp(&p.boot.a.len())));
    let mut chosen = None;
    for a in &ok {
        let cert = certify(&table, a, working)?;
        let pass = cert.status == CertificateStatus::Pass;
        if chosen.is_none() || pass {
            chosen = Some((a, cert));
        }
        if pass {
            break;
        }
    }
    let (a, certificate) = chosen.expect("at least one attempt");
    let mk: Vec<u64> = a.levels.iter().map(|g| g.m).collect();
    let nk: Vec<u64> = a.levels.iter().map(|g| g.n).collect();
    let mut result = RecoveryResult {
        pi0: a.boot.a.clone(),
        pi1: a.boot.b.clone(),
        depth: mk.len(),
        blocks: a.levels.iter().map(|g| g.blocks).collect(),
        mk,
        nk,
        tier: Tier::Structural,
        bootstrap: a.boot.clone(),
        working_length: working,
        certificate,
        canonicalization: "deepest recovered level count, then longest a, among certifying bootstraps",
    };
    result.tier = result.params()?.admissibility().tier;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::language::certified_table;
    use crate::substitution::generate_at_least;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn fib_table(n: usize) -> LanguageTable {
        let p = fixtures::fibonacci(30);
        certified_table(p.pi(), p.levels(), 1, n, DEFAULT_BUDGET).unwrap().1
    }

    fn prefix(p: &SadicParams, len: usize) -> Vec<u8> {
        let (_, x) = generate_at_least(p.pi(), p.levels(), len, DEFAULT_BUDGET).unwrap();
        x.letters()[..len].to_vec()
    }

    #[test]
    fn bispecial_examples() {
        // The fixture is the Fibonacci language with 0 and 1 exchanged.
        let t = fib_table(40);
        assert_eq!(unique_bispecial(&t, 1).unwrap(), w("1"));
        let b = unique_bispecial(&t, 2).unwrap();
        assert!((2..=2 + 3).contains(&b.len()));
        assert_eq!(b, w("101"));
        let golden = LanguageTable::from_factor_data(&fixtures::golden_mean_words(8), "golden mean").unwrap();
        // p(2) − p(1) = 3 − 2 = 1 but p(3) − p(2) = 2.
        assert!(matches!(unique_bispecial(&golden, 2), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn return_word_examples() {
        let t = fib_table(40);
        assert_eq!(return_words(&t, &w("1")).unwrap(), ReturnWords { u: w("01"), v: w("1") });
        let golden = LanguageTable::from_factor_data(&fixtures::golden_mean_words(8), "golden mean").unwrap();
        assert_eq!(return_words(&golden, &w("0")).unwrap(), ReturnWords { u: w("10"), v: w("0") });
        assert!(matches!(return_words(&t, &w("0")), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn return_words_are_returns() {
        let t = fib_table(200);
        for q in 1..100 {
            let Ok(b) = unique_bispecial(&t, q) else { continue };
            let rw = return_words(&t, &b).unwrap();
            for r in [&rw.u, &rw.v] {
                let wr = b.concat(r);
                assert!(b.is_suffix_of(&wr));
                // No earlier return inside the label.
                for cut in 1..r.len() {
                    assert!(!b.is_suffix_of(&Word::from_slice(&wr[..b.len() + cut])));
                }
            }
        }
    }

    #[test]
    fn fibonacci_recovery() {
        let x = prefix(&fixtures::fibonacci(40), 10_000);
        let r = recover_structure(&x, 4).unwrap();
        assert_eq!(r.mk, vec![1, 1, 1, 1]);
        assert_eq!(r.nk, vec![2, 2, 2, 2]);
        assert_eq!(r.certificate.status, CertificateStatus::Pass);
        assert!(check_ab(&r.pi0, &r.pi1));
    }

    #[test]
    fn constant_24_recovery() {
        let x = prefix(&fixtures::constant(2, 4, 20), 10_000);
        let r = recover_structure(&x, 3).unwrap();
        assert_eq!(r.mk, vec![2, 2, 2]);
        assert_eq!(r.nk, vec![4, 4, 4]);
        assert_eq!(r.certificate.status, CertificateStatus::Pass);
    }

    #[test]
    fn high_complexity_is_refused() {
        // Binary Champernowne: all binary numerals written one after another.
        let mut x = Vec::new();
        let mut i = 1u32;
        while x.len() < 10_000 {
            let bits = 32 - i.leading_zeros();
            x.extend((0..bits).rev().map(|j| ((i >> j) & 1) as u8));
            i += 1;
        }
        assert!(matches!(recover_structure(&x, 3), Err(Error::ComplexityTooHigh(_))));
    }

    #[test]
    fn gap_dichotomy_on_fixtures() {
        for p in [fixtures::constant(2, 3, 20), fixtures::mixed(20), fixtures::pi_variant(20)] {
            let x = prefix(&p, 20_000);
            let r = recover_structure(&x, 3).unwrap();
            assert_eq!(r.certificate.status, CertificateStatus::Pass, "{:?}", p.levels());
            assert_eq!(r.tier, Tier::Full43);
        }
    }

    #[test]
    fn three_gaps_are_refused() {
        assert!(matches!(induct(&[1, 0, 1, 0, 0, 1, 0, 0, 0, 1, 1]), Err(Error::ComplexityTooHigh(_))));
        let (g, next) = induct(&[1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 1]).unwrap().unwrap();
        assert_eq!((g.m, g.n, g.blocks), (2, 3, 4));
        assert_eq!(next, vec![0, 1, 0, 1]);
    }

    #[test]
    fn random_streams_round_trip() {
        for seed in 0..6 {
            let p = fixtures::random_full_stream(seed, 30, seed % 2 == 1);
            let x = prefix(&p, 12_000);
            let r = recover_structure(&x, 2).unwrap();
            assert_eq!(r.certificate.status, CertificateStatus::Pass, "seed {seed}");
            assert_eq!(r.tier, Tier::Full43, "seed {seed}");
            assert!(r.certificate.length >= 100, "seed {seed}");
        }
    }
}
