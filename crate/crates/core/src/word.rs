//! Finite words over a small alphabet and the handful of periodicity
//! operations the structure theory needs: roots, maximal common
//! prefixes, and maximal common suffixes against periodic extensions.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest admissible symbol. The value 255 is reserved as a separator
/// inside factor indexes.
pub const MAX_SYMBOL: u8 = 254;

/// A finite word. Symbols are stored contiguously; the empty word is a
/// valid value.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if letters.iter().any(|&a| a > MAX_SYMBOL) {
            return Err(Error::InvalidArgument(format!("symbols must be at most {MAX_SYMBOL}")));
        }
        Ok(Word(letters))
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_slice(letters: &[u8]) -> Self {
        debug_assert!(letters.iter().all(|&a| a <= MAX_SYMBOL));
        Word(letters.to_vec())
    }

    /// `a^n` for a single letter.
    pub fn repeat_letter(a: u8, n: usize) -> Self {
        Word(vec![a; n])
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<u8> {
        self.0
    }

    pub fn push_word(&mut self, other: &[u8]) {
        self.0.extend_from_slice(other);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = Vec::with_capacity(self.len() + other.len());
        out.extend_from_slice(&self.0);
        out.extend_from_slice(&other.0);
        Word(out)
    }

    /// `self^n`.
    pub fn pow(&self, n: usize) -> Word {
        Word(self.0.repeat(n))
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn is_suffix_of(&self, other: &Word) -> bool {
        other.0.ends_with(&self.0)
    }

    /// Largest symbol plus one, or zero for the empty word.
    pub fn alphabet_bound(&self) -> usize {
        self.0.iter().max().map_or(0, |&a| a as usize + 1)
    }
}

impl Deref for Word {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl From<&[u8]> for Word {
    fn from(s: &[u8]) -> Self {
        Word::from_slice(s)
    }
}

/// Formats a symbol slice as a plain digit string when every symbol is
/// below ten, and as comma-separated integers otherwise.
pub fn format_symbols(letters: &[u8]) -> String {
    if letters.iter().all(|&a| a < 10) {
        letters.iter().map(|&a| char::from(b'0' + a)).collect()
    } else {
        letters.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Inverse of [`format_symbols`]. Surrounding whitespace is ignored.
pub fn parse_symbols(s: &str) -> Result<Vec<u8>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if s.contains(',') {
        s.split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<u8>()
                    .ok()
                    .filter(|&a| a <= MAX_SYMBOL)
                    .ok_or_else(|| Error::InvalidArgument(format!("bad symbol {tok:?}")))
            })
            .collect()
    } else {
        s.chars()
            .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(|| Error::InvalidArgument(format!("bad symbol {c:?}"))))
            .collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_symbols(&self.0))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({:?})", format_symbols(&self.0))
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(Word(parse_symbols(s)?))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Letter of the left-infinite word `v^∞` at distance `j` from its right end.
#[inline]
fn periodic_from_right(v: &[u8], j: usize) -> u8 {
    v[v.len() - 1 - j % v.len()]
}

/// True iff `|v| ≤ |w|` and `w` is a suffix of the left-infinite word `v^∞`.
pub fn is_root(v: &[u8], w: &[u8]) -> bool {
    if v.is_empty() || v.len() > w.len() {
        return false;
    }
    (0..w.len()).all(|j| w[w.len() - 1 - j] == periodic_from_right(v, j))
}

/// Shortest root of `w`. Every root of `w` is a suffix of `w`, and `w`
/// roots itself, so the search is over suffix lengths.
pub fn minimal_root(w: &[u8]) -> Result<Word> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("minimal root of the empty word".into()));
    }
    let len = (1..=w.len()).find(|&l| is_root(&w[w.len() - l..], w)).expect("w is a root of itself");
    Ok(Word::from_slice(&w[w.len() - len..]))
}

/// Maximal common suffix of the left-infinite words `v^∞` and `v^∞u`.
///
/// The scan stops after `|v| + |u|` agreeing letters: at that point `u` and
/// `v` are powers of a common word and the two infinite words coincide.
pub fn max_common_suffix_periodic(v: &[u8], u: &[u8]) -> Result<Word> {
    if v.is_empty() || u.is_empty() {
        return Err(Error::InvalidArgument("both words must be nonempty".into()));
    }
    let cap = v.len() + u.len();
    let vu_from_right = |j: usize| {
        if j < u.len() {
            u[u.len() - 1 - j]
        } else {
            periodic_from_right(v, j - u.len())
        }
    };
    let mut j = 0;
    while j < cap && periodic_from_right(v, j) == vu_from_right(j) {
        j += 1;
    }
    if j == cap {
        return Err(Error::PowersOfSameWord);
    }
    let letters: Vec<u8> = (0..j).rev().map(|i| periodic_from_right(v, i)).collect();
    Ok(Word(letters))
}

/// Length of the longest common prefix.
pub fn common_prefix_len(u: &[u8], v: &[u8]) -> usize {
    u.iter().zip(v).take_while(|(a, b)| a == b).count()
}

/// Length of the longest common suffix.
pub fn common_suffix_len(u: &[u8], v: &[u8]) -> usize {
    u.iter().rev().zip(v.iter().rev()).take_while(|(a, b)| a == b).count()
}

pub fn max_common_prefix(u: &[u8], v: &[u8]) -> Word {
    Word::from_slice(&u[..common_prefix_len(u, v)])
}

/// Shortest `p` with `w = p^k` for some `k ≥ 1`.
pub fn primitive_root(w: &[u8]) -> &[u8] {
    let n = w.len();
    for d in 1..=n {
        if n.is_multiple_of(d) && w.chunks(d).all(|c| c == &w[..d]) {
            return &w[..d];
        }
    }
    w
}

/// For commuting nonempty `u`, `v`, returns `(base, t, s)` with
/// `u = base^t`, `v = base^s` and `base` primitive.
pub fn common_power_decomposition(u: &[u8], v: &[u8]) -> Result<(Word, usize, usize)> {
    if u.is_empty() || v.is_empty() {
        return Err(Error::InvalidArgument("both words must be nonempty".into()));
    }
    if !u.iter().chain(v).eq(v.iter().chain(u)) {
        return Err(Error::NotCommuting);
    }
    let base = primitive_root(u);
    Ok((Word::from_slice(base), u.len() / base.len(), v.len() / base.len()))
}

/// Number of positions at which two equal-length words differ.
pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn minimal_root_examples() {
        assert_eq!(minimal_root(&w("0")).unwrap(), w("0"));
        assert_eq!(minimal_root(&w("0101")).unwrap(), w("01"));
        assert_eq!(minimal_root(&w("100")).unwrap(), w("100"));
        assert!(matches!(minimal_root(&[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn max_common_suffix_examples() {
        assert_eq!(max_common_suffix_periodic(&w("0"), &w("1")).unwrap(), Word::empty());
        assert_eq!(max_common_suffix_periodic(&w("01"), &w("001")).unwrap(), w("01"));
        assert_eq!(max_common_suffix_periodic(&w("01"), &w("0101")), Err(Error::PowersOfSameWord));
    }

    #[test]
    fn max_common_prefix_examples() {
        assert_eq!(max_common_prefix(&w("01"), &w("001")), w("0"));
        assert_eq!(max_common_prefix(&w("0"), &w("1")), Word::empty());
        assert_eq!(max_common_prefix(&w("0101"), &w("0100")), w("010"));
    }

    #[test]
    fn common_power_examples() {
        assert_eq!(common_power_decomposition(&w("0101"), &w("01")).unwrap(), (w("01"), 2, 1));
        assert_eq!(common_power_decomposition(&w("00"), &w("000")).unwrap(), (w("0"), 2, 3));
        assert_eq!(common_power_decomposition(&w("01"), &w("10")), Err(Error::NotCommuting));
    }

    #[test]
    fn is_root_examples() {
        assert!(is_root(&w("01"), &w("0101")));
        assert!(!is_root(&w("0"), &w("100")));
        assert!(is_root(&w("01"), &w("101")));
        assert!(!is_root(&w("0101"), &w("01")));
    }

    #[test]
    fn symbol_formats() {
        assert_eq!(w("0120").to_string(), "0120");
        let big = Word::new(vec![3, 12, 0]).unwrap();
        assert_eq!(big.to_string(), "3,12,0");
        assert_eq!("3, 12,0".parse::<Word>().unwrap(), big);
        assert!("01x".parse::<Word>().is_err());
        assert!(Word::new(vec![255]).is_err());
    }

    fn word_strategy(max_len: usize, alphabet: u8) -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(0..alphabet, 1..=max_len)
    }

    /// Independent check: `v` is a root of `w` iff some power of `v` long
    /// enough to cover `w` ends with `w`.
    fn root_by_power(v: &[u8], w: &[u8]) -> bool {
        v.len() <= w.len() && v.repeat(w.len() / v.len() + 1).ends_with(w)
    }

    /// All concatenations of `u` and `v` with total length at most `cap`.
    fn concatenations(u: &[u8], v: &[u8], cap: usize) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let mut stack = vec![Vec::new()];
        while let Some(cur) = stack.pop() {
            for piece in [u, v] {
                if cur.len() + piece.len() <= cap {
                    let mut next = cur.clone();
                    next.extend_from_slice(piece);
                    out.push(next.clone());
                    stack.push(next);
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn minimal_root_is_shortest_root(word in word_strategy(64, 3)) {
            let root = minimal_root(&word).unwrap();
            prop_assert!(root_by_power(&root, &word));
            for l in 1..root.len() {
                prop_assert!(!root_by_power(&word[word.len() - l..], &word));
            }
        }

        #[test]
        fn suffix_return_gives_root(v in word_strategy(8, 2), w in word_strategy(24, 2)) {
            prop_assume!(v.len() <= w.len());
            let mut wv = w.clone();
            wv.extend_from_slice(&v);
            if wv.ends_with(&w) {
                prop_assert!(is_root(&v, &w));
            }
        }

        #[test]
        fn common_suffix_is_suffix_of_all_concatenations(
            v in word_strategy(5, 2), prefix in word_strategy(5, 2)
        ) {
            let mut u = prefix.clone();
            u.extend_from_slice(&v);
            prop_assume!(common_power_decomposition(&u, &v).is_err());
            let s = max_common_suffix_periodic(&v, &u).unwrap();
            prop_assert!(s.len() < u.len() + v.len());
            let cap = 4 * (u.len() + v.len());
            for c in concatenations(&u, &v, cap) {
                if c.len() >= s.len() {
                    prop_assert!(c.ends_with(&s), "{:?} lacks suffix {:?}", c, s);
                }
            }
        }

        #[test]
        fn common_suffix_of_yv_and_zu(
            v in word_strategy(4, 2),
            prefix in word_strategy(4, 2),
            picks_y in prop::collection::vec(any::<bool>(), 1..6),
            picks_z in prop::collection::vec(any::<bool>(), 1..6),
            tail in prop::collection::vec(0u8..2, 0..6),
        ) {
            let mut u = prefix.clone();
            u.extend_from_slice(&v);
            prop_assume!(common_power_decomposition(&u, &v).is_err());
            let s = max_common_suffix_periodic(&v, &u).unwrap();
            let build = |picks: &[bool]| {
                let mut out = Vec::new();
                for &p in picks {
                    out.extend_from_slice(if p { &u } else { &v });
                }
                // enough material to cover |s|
                while out.len() < s.len() {
                    let mut longer = u.clone();
                    longer.extend_from_slice(&out);
                    out = longer;
                }
                out
            };
            let mut yvw = build(&picks_y);
            yvw.extend_from_slice(&v);
            yvw.extend_from_slice(&tail);
            let mut zuw = build(&picks_z);
            zuw.extend_from_slice(&u);
            zuw.extend_from_slice(&tail);
            prop_assert_eq!(common_suffix_len(&yvw, &zuw), s.len() + tail.len());
        }
    }
}
