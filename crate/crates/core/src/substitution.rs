//! Substitutions, the two-parameter family `τ_{m,n}: 0 ↦ 0^{m-1}1, 1 ↦ 0^{n-1}1`,
//! composition, 2×2 abelianization and word generation.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::Word;

/// Default cap on the number of symbols any generated word may hold.
pub const DEFAULT_BUDGET: usize = 1 << 27;

/// Parameters of one `τ_{m,n}`. Values are arbitrary precision because
/// the weak-mixing construction squares `m` at every level.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TauParams {
    pub m: BigUint,
    pub n: BigUint,
}

impl TauParams {
    pub fn new(m: u64, n: u64) -> Result<Self> {
        Self::big(BigUint::from(m), BigUint::from(n))
    }

    pub fn big(m: BigUint, n: BigUint) -> Result<Self> {
        if m.is_zero() || m >= n {
            return Err(Error::InvalidArgument(format!("tau parameters need 0 < m < n, got m={m}, n={n}")));
        }
        Ok(TauParams { m, n })
    }

    /// `m` as a machine integer, when it fits.
    pub fn m_small(&self) -> Option<u64> {
        self.m.to_u64()
    }

    pub fn n_small(&self) -> Option<u64> {
        self.n.to_u64()
    }
}

impl fmt::Debug for TauParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.n)
    }
}

/// A letter-to-word map on the domain `{0, …, images.len() - 1}`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Substitution {
    images: Vec<Word>,
}

impl Substitution {
    pub fn new(images: Vec<Word>) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::InvalidArgument("substitution needs a nonempty domain".into()));
        }
        if images.iter().any(|w| w.is_empty()) {
            return Err(Error::InvalidArgument("substitution images must be nonempty".into()));
        }
        Ok(Substitution { images })
    }

    pub fn identity(domain_size: usize) -> Self {
        assert!(domain_size > 0 && domain_size <= 255);
        Substitution { images: (0..domain_size as u8).map(|a| Word::from_slice(&[a])).collect() }
    }

    pub fn domain_size(&self) -> usize {
        self.images.len()
    }

    /// One more than the largest letter used by any image.
    pub fn codomain_bound(&self) -> usize {
        self.images.iter().map(Word::alphabet_bound).max().unwrap_or(0)
    }

    pub fn image(&self, letter: u8) -> &Word {
        &self.images[letter as usize]
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn apply(&self, word: &[u8]) -> Result<Word> {
        let mut out = Word::empty();
        for &a in word {
            let img =
                self.images.get(a as usize).ok_or_else(|| Error::InvalidArgument(format!("letter {a} outside the domain")))?;
            out.push_word(img);
        }
        Ok(out)
    }
}

/// `τ_{m,n}` as an explicit substitution. Only sensible for parameters
/// small enough to materialize.
pub fn make_tau(params: &TauParams) -> Result<Substitution> {
    let m = params.m_small().and_then(|m| usize::try_from(m).ok()).ok_or_else(|| budget_error(&params.n, DEFAULT_BUDGET))?;
    let n = params
        .n_small()
        .and_then(|n| usize::try_from(n).ok())
        .filter(|&n| n <= DEFAULT_BUDGET)
        .ok_or_else(|| budget_error(&params.n, DEFAULT_BUDGET))?;
    let mut zero = Word::repeat_letter(0, m - 1);
    zero.push_word(&[1]);
    let mut one = Word::repeat_letter(0, n - 1);
    one.push_word(&[1]);
    Substitution::new(vec![zero, one])
}

/// `outer ∘ inner`: apply `inner` first, then `outer` letter by letter.
pub fn compose(outer: &Substitution, inner: &Substitution) -> Result<Substitution> {
    if inner.codomain_bound() > outer.domain_size() {
        return Err(Error::InvalidArgument(format!(
            "inner substitution uses {} letters but outer domain has {}",
            inner.codomain_bound(),
            outer.domain_size()
        )));
    }
    let images = inner.images.iter().map(|img| outer.apply(img)).collect::<Result<Vec<_>>>()?;
    Substitution::new(images)
}

/// Letter-count matrix of a binary substitution. Row `a` counts the 0s and
/// 1s in the image of `a`. Eigenvalues are kept as trace and determinant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AbelianMatrix {
    pub entries: [[i128; 2]; 2],
    pub trace: i128,
    pub det: i128,
    pub pisot: bool,
}

impl AbelianMatrix {
    pub fn from_entries(entries: [[i128; 2]; 2]) -> Self {
        let trace = entries[0][0] + entries[1][1];
        let det = entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0];
        // With real roots l- <= l+ of x^2 - tr x + det, l- < 1 < l+ iff the
        // polynomial is negative at 1, and then l- > -1 iff it is positive
        // at -1. Complex roots share one modulus and are never Pisot.
        let at_one = 1 - trace + det;
        let at_minus_one = 1 + trace + det;
        let pisot = at_one < 0 && at_minus_one > 0;
        AbelianMatrix { entries, trace, det, pisot }
    }

    pub fn discriminant(&self) -> i128 {
        self.trace * self.trace - 4 * self.det
    }

    /// `(dominant, other)` as floating point; `None` for complex roots.
    pub fn eigenvalues(&self) -> Option<(f64, f64)> {
        let disc = self.discriminant();
        if disc < 0 {
            return None;
        }
        let root = (disc as f64).sqrt();
        let tr = self.trace as f64;
        Some(((tr + root) / 2.0, (tr - root) / 2.0))
    }

    /// Matrix of `outer ∘ inner` from the matrices of its factors.
    pub fn product(inner: &AbelianMatrix, outer: &AbelianMatrix) -> AbelianMatrix {
        let mut e = [[0i128; 2]; 2];
        for (i, row) in e.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..2).map(|k| inner.entries[i][k] * outer.entries[k][j]).sum();
            }
        }
        AbelianMatrix::from_entries(e)
    }
}

pub fn abelian_analysis(s: &Substitution) -> Result<AbelianMatrix> {
    if s.domain_size() != 2 || s.codomain_bound() > 2 {
        return Err(Error::Unsupported("abelianization is implemented for binary substitutions only".into()));
    }
    let mut entries = [[0i128; 2]; 2];
    for (a, row) in entries.iter_mut().enumerate() {
        for &b in s.image(a as u8).letters() {
            row[b as usize] += 1;
        }
    }
    Ok(AbelianMatrix::from_entries(entries))
}

/// Abelianization of `τ_{m,n}` without materializing the images.
pub fn tau_matrix(params: &TauParams) -> Option<AbelianMatrix> {
    let m = params.m.to_i128()?;
    let n = params.n.to_i128()?;
    Some(AbelianMatrix::from_entries([[m - 1, 1], [n - 1, 1]]))
}

pub(crate) fn budget_error(predicted: &BigUint, budget: usize) -> Error {
    Error::BudgetExceeded { predicted: predicted.clone(), budget }
}

pub(crate) fn to_count(x: &BigUint, budget: usize) -> Result<usize> {
    x.to_usize().filter(|&v| v <= budget).ok_or_else(|| budget_error(x, budget))
}

/// Lengths `(|π(ρ_k(0))|, |π(ρ_k(1))|)` for `k = 0..=levels`.
pub fn level_lengths(pi: &Substitution, params: &[TauParams], levels: usize) -> Vec<(BigUint, BigUint)> {
    let mut v = BigUint::from(pi.image(0).len());
    let mut u = BigUint::from(pi.image(1).len());
    let mut out = Vec::with_capacity(levels + 1);
    out.push((v.clone(), u.clone()));
    for p in params.iter().take(levels) {
        let base = &v * (&p.m - BigUint::one());
        let nv = &base + &u;
        let nu = &v * (&p.n - BigUint::one()) + &u;
        v = nv;
        u = nu;
        out.push((v.clone(), u.clone()));
    }
    out
}

fn check_levels(pi: &Substitution, params: &[TauParams], k: usize) -> Result<()> {
    if pi.domain_size() != 2 {
        return Err(Error::InvalidArgument("π must have domain {0, 1}".into()));
    }
    if k > params.len() {
        return Err(Error::InvalidArgument(format!("level {k} requested but only {} parameter pairs given", params.len())));
    }
    Ok(())
}

fn append_power(out: &mut Vec<u8>, w: &[u8], times: usize) {
    for _ in 0..times {
        out.extend_from_slice(w);
    }
}

/// `((π∘ρ_k)(0), (π∘ρ_k)(1))` via `v ← v^{m-1}u`, `u ← v^{n-1}u`.
pub fn level_words(pi: &Substitution, params: &[TauParams], k: usize, budget: usize) -> Result<(Word, Word)> {
    check_levels(pi, params, k)?;
    let lengths = level_lengths(pi, params, k);
    let (dv, du) = &lengths[k];
    let lv = to_count(dv, budget)?;
    let lu = to_count(du, budget)?;
    let mut v = pi.image(0).letters().to_vec();
    let mut u = pi.image(1).letters().to_vec();
    for (level, p) in params.iter().take(k).enumerate() {
        let (nv_len, nu_len) = &lengths[level + 1];
        let m = to_count(&p.m, budget)?;
        let n = to_count(&p.n, budget)?;
        let mut nv = Vec::with_capacity(to_count(nv_len, budget)?);
        append_power(&mut nv, &v, m - 1);
        nv.extend_from_slice(&u);
        let mut nu = Vec::with_capacity(to_count(nu_len, budget)?);
        append_power(&mut nu, &v, n - 1);
        nu.extend_from_slice(&u);
        v = nv;
        u = nu;
    }
    debug_assert_eq!((v.len(), u.len()), (lv, lu));
    Ok((Word::from_slice(&v), Word::from_slice(&u)))
}

/// `π(ρ_k(0))`, the level-`k` word. For `k = 0` this is `π(0)`.
pub fn generate_word(pi: &Substitution, params: &[TauParams], k: usize, budget: usize) -> Result<Word> {
    check_levels(pi, params, k)?;
    if k == 0 {
        return Ok(pi.image(0).clone());
    }
    let lengths = level_lengths(pi, params, k);
    let total = to_count(&lengths[k].0, budget)?;
    // Only v is needed at the top, so stop one level early and build it directly.
    let (v, u) = level_words(pi, params, k - 1, budget)?;
    let p = &params[k - 1];
    let mut out = Vec::with_capacity(total);
    append_power(&mut out, &v, to_count(&p.m, budget)? - 1);
    out.extend_from_slice(&u);
    Ok(Word::from_slice(&out))
}

/// Smallest level whose word has at least `min_len` symbols, and that word.
pub fn generate_at_least(pi: &Substitution, params: &[TauParams], min_len: usize, budget: usize) -> Result<(usize, Word)> {
    let lengths = level_lengths(pi, params, params.len());
    let target = BigUint::from(min_len);
    let k = lengths
        .iter()
        .position(|(v, _)| *v >= target)
        .ok_or_else(|| Error::InsufficientData(format!("{} parameter levels give fewer than {min_len} symbols", params.len())))?;
    Ok((k, generate_word(pi, params, k, budget)?))
}

/// The first `len` symbols of the word [`generate_at_least`] would return,
/// without building that word in full, so a huge `m_k` costs nothing.
pub fn generate_prefix(pi: &Substitution, params: &[TauParams], len: usize, budget: usize) -> Result<Word> {
    check_levels(pi, params, 0)?;
    to_count(&BigUint::from(len), budget)?;
    let lengths = level_lengths(pi, params, params.len());
    let target = BigUint::from(len);
    let k = lengths
        .iter()
        .position(|(v, _)| *v >= target)
        .ok_or_else(|| Error::InsufficientData(format!("{} parameter levels give fewer than {len} symbols", params.len())))?;
    if k == 0 {
        return Ok(Word::from_slice(&pi.image(0).letters()[..len]));
    }
    let (v, u) = level_words(pi, params, k - 1, budget)?;
    let needed = len.div_ceil(v.len());
    let reps = (&params[k - 1].m - 1u32).to_usize().map_or(needed, |r| r.min(needed));
    let mut out = Vec::with_capacity(len + v.len() + u.len());
    append_power(&mut out, v.letters(), reps);
    if out.len() < len {
        out.extend_from_slice(u.letters());
    }
    out.truncate(len);
    Ok(Word::from_slice(&out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn tau(m: u64, n: u64) -> Substitution {
        make_tau(&TauParams::new(m, n).unwrap()).unwrap()
    }

    fn repeated(m: u64, n: u64, k: usize) -> Vec<TauParams> {
        vec![TauParams::new(m, n).unwrap(); k]
    }

    #[test]
    fn tau_images() {
        assert_eq!(tau(2, 3).images(), &[w("01"), w("001")]);
        assert_eq!(tau(1, 2).images(), &[w("1"), w("01")]);
        assert_eq!(tau(3, 5).images(), &[w("001"), w("00001")]);
        assert!(TauParams::new(3, 3).is_err());
        assert!(TauParams::new(0, 3).is_err());
    }

    #[test]
    fn composition_examples() {
        let c = compose(&tau(1, 2), &tau(2, 3)).unwrap();
        assert_eq!(c.image(0), &w("101"));
        assert_eq!(compose(&Substitution::identity(2), &tau(2, 3)).unwrap(), tau(2, 3));
        // Row convention: M(outer ∘ inner) = M(inner) M(outer).
        let m13 = abelian_analysis(&compose(&tau(2, 3), &tau(1, 3)).unwrap()).unwrap();
        assert_eq!(m13.entries, [[2, 1], [4, 3]]);
        assert!(m13.pisot);
        let bad = Substitution::new(vec![w("2"), w("0")]).unwrap();
        assert!(compose(&tau(1, 2), &bad).is_err());
    }

    #[test]
    fn abelian_examples() {
        let a = abelian_analysis(&tau(2, 3)).unwrap();
        assert_eq!(a.entries, [[1, 1], [2, 1]]);
        let (hi, lo) = a.eigenvalues().unwrap();
        assert!((hi - (1.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!((lo - (1.0 - 2f64.sqrt())).abs() < 1e-12);
        assert!(a.pisot);

        let b = abelian_analysis(&tau(1, 3)).unwrap();
        assert_eq!(b.entries, [[0, 1], [2, 1]]);
        assert_eq!(b.eigenvalues().unwrap(), (2.0, -1.0));
        assert!(!b.pisot);

        let c = abelian_analysis(&tau(1, 2)).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let (hi, lo) = c.eigenvalues().unwrap();
        assert!((hi - phi).abs() < 1e-12 && (lo + 1.0 / phi).abs() < 1e-12);
        assert!(c.pisot);

        let ternary = Substitution::new(vec![w("0"), w("1"), w("2")]).unwrap();
        assert!(matches!(abelian_analysis(&ternary), Err(Error::Unsupported(_))));
    }

    #[test]
    fn pisot_matches_closed_form() {
        for m in 1..=50u64 {
            for n in m + 1..=2 * m + 2 {
                let a = abelian_analysis(&tau(m, n)).unwrap();
                assert_eq!(a.pisot, n <= 2 * m, "m={m} n={n}");
                assert_eq!(Some(a), tau_matrix(&TauParams::new(m, n).unwrap()));
            }
        }
    }

    #[test]
    fn prefix_matches_full_generation() {
        let id = Substitution::identity(2);
        let pi = Substitution::new(vec![w("01"), w("101")]).unwrap();
        for (pi, params) in [(&id, repeated(1, 2, 20)), (&pi, repeated(2, 3, 10)), (&id, repeated(3, 5, 8))] {
            for len in [1, 2, 7, 100, 4999, 5000] {
                let (_, full) = generate_at_least(pi, &params, len, DEFAULT_BUDGET).unwrap();
                let p = generate_prefix(pi, &params, len, DEFAULT_BUDGET).unwrap();
                assert_eq!(p.letters(), &full.letters()[..len]);
            }
        }
        // m_2 far beyond the budget still gives a prefix.
        let huge = vec![TauParams::new(2, 4).unwrap(), TauParams::new(1 << 40, 1 << 41).unwrap()];
        let p = generate_prefix(&id, &huge, 1000, DEFAULT_BUDGET).unwrap();
        assert_eq!(p.letters()[..6], [0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn generate_examples() {
        let id = Substitution::identity(2);
        assert_eq!(generate_word(&id, &repeated(1, 2, 4), 4, DEFAULT_BUDGET).unwrap(), w("01101"));
        assert_eq!(generate_word(&id, &repeated(2, 3, 2), 2, DEFAULT_BUDGET).unwrap(), w("01001"));
        let pi = Substitution::new(vec![w("01"), w("101")]).unwrap();
        assert_eq!(generate_word(&pi, &[], 0, DEFAULT_BUDGET).unwrap(), w("01"));
    }

    #[test]
    fn generate_respects_budget() {
        let id = Substitution::identity(2);
        let err = generate_word(&id, &repeated(1, 2, 30), 30, 1000).unwrap_err();
        match err {
            Error::BudgetExceeded { predicted, budget } => {
                assert_eq!(budget, 1000);
                assert_eq!(predicted, BigUint::from(1_346_269u32));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn generate_matches_explicit_composition() {
        let params = [TauParams::new(2, 3).unwrap(), TauParams::new(1, 3).unwrap(), TauParams::new(3, 5).unwrap()];
        let pi = Substitution::new(vec![w("01"), w("101")]).unwrap();
        let mut rho = Substitution::identity(2);
        for (k, p) in params.iter().enumerate() {
            rho = compose(&rho, &make_tau(p).unwrap()).unwrap();
            let explicit = pi.apply(rho.image(0)).unwrap();
            assert_eq!(generate_word(&pi, &params, k + 1, DEFAULT_BUDGET).unwrap(), explicit);
        }
    }

    fn small_binary_substitution() -> impl Strategy<Value = Substitution> {
        prop::collection::vec(prop::collection::vec(0u8..2, 1..=8), 2..=2)
            .prop_map(|imgs| Substitution::new(imgs.into_iter().map(|v| Word::new(v).unwrap()).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn composition_lengths_follow_matrix_product(
            outer in small_binary_substitution(),
            inner in small_binary_substitution(),
        ) {
            let composed = compose(&outer, &inner).unwrap();
            let mi = abelian_analysis(&inner).unwrap();
            let mo = abelian_analysis(&outer).unwrap();
            let product = AbelianMatrix::product(&mi, &mo);
            prop_assert_eq!(abelian_analysis(&composed).unwrap().entries, product.entries);
            for a in 0..2u8 {
                let predicted: i128 = product.entries[a as usize].iter().sum();
                prop_assert_eq!(composed.image(a).len() as i128, predicted);
            }
        }

        #[test]
        fn tau_image_lengths(m in 1u64..40, extra in 1u64..40) {
            let t = tau(m, m + extra);
            prop_assert_eq!(t.image(0).len() as u64, m);
            prop_assert_eq!(t.image(1).len() as u64, m + extra);
        }
    }
}
