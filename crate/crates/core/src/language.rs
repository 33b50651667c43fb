//! Factor sets, word complexity, special words and Rauzy graphs.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::substitution::{generate_word, level_lengths, level_words, Substitution, TauParams};
use crate::suffix::SuffixIndex;
use crate::word::{format_symbols, Word};

/// Factor sets `L_1..L_{n_max}` of one or more source words.
pub struct LanguageTable {
    index: SuffixIndex,
    n_max: usize,
    counts: Vec<u64>,
    source: String,
    validated: bool,
}

impl std::fmt::Debug for LanguageTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LanguageTable")
            .field("n_max", &self.n_max)
            .field("source", &self.source)
            .field("validated", &self.validated)
            .field("text_len", &self.index.len())
            .finish()
    }
}

impl LanguageTable {
    /// Sliding-window factors of a single word. Needs `|w| ≥ 2·n_max`.
    pub fn build(w: &Word, n_max: usize) -> Result<Self> {
        if w.len() < 2 * n_max {
            return Err(Error::WordTooShort { needed: 2 * n_max, have: w.len() });
        }
        Ok(Self::from_index(SuffixIndex::new([w]), n_max, format!("word of length {}", w.len())))
    }

    /// Factors of every word in `words`. Words shorter than `n_max` simply
    /// contribute nothing at the longer lengths.
    pub fn from_words(words: &[Word], n_max: usize, source: impl Into<String>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::InvalidArgument("no source words".into()));
        }
        Ok(Self::from_index(SuffixIndex::new(words), n_max, source.into()))
    }

    /// A table from a complete list of admissible words (for example all
    /// length-8 words of a shift of finite type). It is certified when every
    /// factor shorter than `n_max` extends on both sides inside the data.
    pub fn from_factor_data(words: &[Word], source: impl Into<String>) -> Result<Self> {
        let n_max = words.iter().map(|w| w.len()).min().unwrap_or(0);
        let mut t = Self::from_words(words, n_max, source)?;
        t.certify_by_extension()?;
        Ok(t)
    }

    fn from_index(index: SuffixIndex, n_max: usize, source: String) -> Self {
        let counts = index.distinct_counts(n_max);
        LanguageTable { index, n_max, counts, source, validated: false }
    }

    fn certify_by_extension(&mut self) -> Result<()> {
        for n in 1..self.n_max {
            let ext = self.extensions(n);
            if ext.iter().any(|e| e.left.is_empty() || e.right.is_empty()) {
                return Err(Error::InsufficientDepth { n });
            }
        }
        self.validated = true;
        Ok(())
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    /// Marks the table as exact without a certificate. Intended for tests and
    /// for callers that establish exactness by other means.
    pub fn assume_validated(mut self) -> Self {
        self.validated = true;
        self
    }

    /// `p(n)` for `0 ≤ n ≤ n_max` (`p(0) = 1` for nonempty data).
    pub fn p(&self, n: usize) -> u64 {
        self.counts[n]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Sorted `L_n`.
    pub fn factors(&self, n: usize) -> Vec<&[u8]> {
        assert!(n >= 1 && n <= self.n_max, "length {n} outside 1..={}", self.n_max);
        let text = self.index.text();
        self.index.factor_starts(n).into_iter().map(|p| &text[p..p + n]).collect()
    }

    pub fn contains(&self, w: &[u8]) -> bool {
        w.len() <= self.n_max && self.index.contains(w)
    }

    /// Whether `w` occurs in the underlying sources, at any length.
    pub fn occurs(&self, w: &[u8]) -> bool {
        self.index.contains(w)
    }

    pub fn require_validated(&self) -> Result<()> {
        if self.validated {
            Ok(())
        } else {
            Err(Error::NotValidated)
        }
    }

    /// Compares the factor sets of two tables without materializing them:
    /// `A = B` iff `|A| = |B| = |A ∪ B|`.
    pub fn first_disagreement(&self, other: &LanguageTable, n_max: usize) -> Option<usize> {
        let mut joined = self.index.text().to_vec();
        joined.extend_from_slice(other.index.text());
        let union = SuffixIndex::from_text(joined).distinct_counts(n_max);
        (1..=n_max).find(|&n| {
            let a = self.counts.get(n).copied();
            let b = other.counts.get(n).copied();
            a != b || a != Some(union[n])
        })
    }

    fn extensions(&self, n: usize) -> Vec<Extensions<'_>> {
        let text = self.index.text();
        let longer = self.index.factor_starts(n + 1);
        let mut order: Vec<&[u8]> = Vec::with_capacity(self.counts[n] as usize);
        let mut slots: HashMap<&[u8], usize> = HashMap::with_capacity(self.counts[n] as usize);
        for p in self.index.factor_starts(n) {
            slots.insert(&text[p..p + n], order.len());
            order.push(&text[p..p + n]);
        }
        let mut ext: Vec<Extensions<'_>> =
            order.iter().map(|w| Extensions { word: w, left: BTreeSet::new(), right: BTreeSet::new() }).collect();
        for p in longer {
            let f = &text[p..p + n + 1];
            ext[slots[&f[..n]]].right.insert(f[n]);
            ext[slots[&f[1..]]].left.insert(f[0]);
        }
        ext
    }

    /// Right-extension excess `Σ_{w ∈ L_n} max(|F(w)| − 1, 0)`, number of
    /// right-special words, and number of words with no right extension.
    fn right_excess(&self, n: usize) -> (u64, u64, u64) {
        let text = self.index.text();
        let mut followers: HashMap<&[u8], u8> = HashMap::new();
        for p in self.index.factor_starts(n + 1) {
            *followers.entry(&text[p..p + n]).or_insert(0) += 1;
        }
        let excess = followers.values().map(|&c| u64::from(c) - 1).sum();
        let special = followers.values().filter(|&&c| c >= 2).count() as u64;
        let dead = self.counts[n] - followers.len() as u64;
        (excess, special, dead)
    }
}

struct Extensions<'a> {
    word: &'a [u8],
    left: BTreeSet<u8>,
    right: BTreeSet<u8>,
}

/// Certifies tables from consecutive generation levels: `t1` is returned
/// validated if both have the same factor sets up to `t1.n_max`.
pub fn stability_check(t1: LanguageTable, t2: &LanguageTable) -> Result<LanguageTable> {
    if t2.n_max < t1.n_max {
        return Err(Error::InvalidArgument(format!("second table reaches n = {} but the first needs {}", t2.n_max, t1.n_max)));
    }
    match t1.first_disagreement(t2, t1.n_max) {
        Some(n) => Err(Error::InsufficientDepth { n }),
        None => Ok(LanguageTable { validated: true, ..t1 }),
    }
}

/// Generates levels `K, K + 1, …` starting at `start_level` until the
/// level-`K` word is long enough for `n_max` and agrees with level `K + 1`.
///
/// Agreement is not a proof: when both level words have the form `v^j u`
/// they can agree while missing every factor across `u v`. Use
/// [`certified_table`] for exact languages.
pub fn stability_table(
    pi: &Substitution,
    params: &[TauParams],
    start_level: usize,
    n_max: usize,
    budget: usize,
) -> Result<(usize, LanguageTable)> {
    let lengths = level_lengths(pi, params, params.len());
    let need = num_bigint::BigUint::from(2 * n_max);
    let first = (start_level..params.len())
        .find(|&k| lengths[k].0 >= need)
        .ok_or_else(|| Error::InsufficientData(format!("parameters too short for n_max = {n_max}")))?;
    let mut last_err = Error::InsufficientData(format!("parameters too short for n_max = {n_max}"));
    let mut current = LanguageTable::build(&generate_word(pi, params, first, budget)?, n_max)?;
    for k in first..params.len() {
        let next = LanguageTable::build(&generate_word(pi, params, k + 1, budget)?, n_max)?;
        match stability_check(current, &next) {
            Ok(mut t) => {
                t.source = format!("level {k} word (stable against level {})", k + 1);
                return Ok((k, t));
            }
            Err(e @ Error::InsufficientDepth { .. }) => {
                last_err = e;
                current = next;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

/// Table certified from the block structure at level `k`.
///
/// The sequence is a concatenation of the blocks `B_0 = (π∘ρ_k)(0)` and
/// `B_1 = (π∘ρ_k)(1)` along a coding sequence in the image of
/// `τ_{m_{k+1}, n_{k+1}}`. Its 2-letter factors are 01 and 10, plus 00 when
/// `n_{k+1} ≥ 3` and 11 when `m_{k+1} = 1`. A window of length at most
/// `min(|B_0|, |B_1|) + 1` meets at most two consecutive blocks, so up to
/// that length the factors are exactly those of the admissible block pairs.
pub fn block_table(pi: &Substitution, params: &[TauParams], k: usize, n_max: usize, budget: usize) -> Result<LanguageTable> {
    let next = params
        .get(k)
        .ok_or_else(|| Error::InsufficientData(format!("block certification at level {k} needs parameter pair {}", k + 1)))?;
    let (b0, b1) = level_words(pi, params, k, budget)?;
    let reach = b0.len().min(b1.len()) + 1;
    if n_max > reach {
        return Err(Error::InsufficientDepth { n: reach + 1 });
    }
    let mut pairs = vec![b0.concat(&b1), b1.concat(&b0)];
    if next.n > num_bigint::BigUint::from(2u32) {
        pairs.push(b0.concat(&b0));
    }
    if next.m == num_bigint::BigUint::from(1u32) {
        pairs.push(b1.concat(&b1));
    }
    let mut t = LanguageTable::from_words(&pairs, n_max, format!("level {k} block pairs"))?;
    t.validated = true;
    Ok(t)
}

/// Shallowest level from `start_level` whose blocks certify `n_max`.
/// Returns the level used and the validated table.
pub fn certified_table(
    pi: &Substitution,
    params: &[TauParams],
    start_level: usize,
    n_max: usize,
    budget: usize,
) -> Result<(usize, LanguageTable)> {
    let lengths = level_lengths(pi, params, params.len());
    let need = num_bigint::BigUint::from(n_max.saturating_sub(1));
    let k = (start_level..params.len())
        .find(|&k| lengths[k].0.clone().min(lengths[k].1.clone()) >= need)
        .ok_or_else(|| Error::InsufficientData(format!("parameters too short for n_max = {n_max}")))?;
    Ok((k, block_table(pi, params, k, n_max, budget)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplexityProfile {
    /// `p[n]` for `0 ≤ n ≤ n_max`.
    pub p: Vec<u64>,
    /// Smallest `n` with `p(n + 1) = p(n)`, if any.
    pub periodic_from: Option<usize>,
}

impl ComplexityProfile {
    pub fn is_periodic(&self) -> bool {
        self.periodic_from.is_some()
    }
}

pub fn complexity_profile(t: &LanguageTable) -> Result<ComplexityProfile> {
    t.require_validated()?;
    let p = t.counts.clone();
    let periodic_from = (1..t.n_max).find(|&n| p[n + 1] == p[n]);
    Ok(ComplexityProfile { p, periodic_from })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpecialWord {
    pub word: Word,
    pub letters: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpecialReport {
    pub n: usize,
    pub right_special: Vec<SpecialWord>,
    pub left_special: Vec<SpecialWord>,
    pub bi_special: Vec<Word>,
}

pub fn special_words(t: &LanguageTable, n: usize) -> Result<SpecialReport> {
    t.require_validated()?;
    check_length(t, n)?;
    let mut report = SpecialReport { n, right_special: Vec::new(), left_special: Vec::new(), bi_special: Vec::new() };
    for e in t.extensions(n) {
        let word = Word::from_slice(e.word);
        let rs = e.right.len() >= 2;
        let ls = e.left.len() >= 2;
        if rs {
            report.right_special.push(SpecialWord { word: word.clone(), letters: e.right.iter().copied().collect() });
        }
        if ls {
            report.left_special.push(SpecialWord { word: word.clone(), letters: e.left.iter().copied().collect() });
        }
        if rs && ls {
            report.bi_special.push(word);
        }
    }
    Ok(report)
}

fn check_length(t: &LanguageTable, n: usize) -> Result<()> {
    if n == 0 || n >= t.n_max {
        return Err(Error::InvalidArgument(format!("length {n} must lie in 1..{} for this table", t.n_max)));
    }
    Ok(())
}

/// Per-length right-special data for `p(q) = p(r) + Σ_{i=r}^{q-1} Σ_{w ∈ RS_i} (|F(w)| − 1)`.
pub struct RightSpecialSums {
    p: Vec<u64>,
    contribution: Vec<u64>,
    special_count: Vec<u64>,
    dead_ends: Vec<u64>,
    periodic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RsReport {
    pub r: usize,
    pub q: usize,
    pub lhs: u64,
    pub rhs: u64,
    pub equal: bool,
    /// `Σ_{w ∈ RS_i} (|F(w)| − 1)` for `i = r..q`.
    pub contributions: Vec<u64>,
    /// `p(q) ≥ p(r) + (q − r) + |T ∩ [r, q)|` where `T` holds the lengths with
    /// more than one right-special word. `None` for eventually periodic data.
    pub corollary_holds: Option<bool>,
    /// Words of `L_i` with no right extension; nonzero means corrupt data.
    pub dead_ends: u64,
}

impl RightSpecialSums {
    /// Precomputes right-special contributions for lengths `1..q_max`.
    pub fn new(t: &LanguageTable, q_max: usize) -> Result<Self> {
        t.require_validated()?;
        if q_max > t.n_max {
            return Err(Error::InvalidArgument(format!("q = {q_max} exceeds n_max = {}", t.n_max)));
        }
        let mut contribution = vec![0; q_max];
        let mut special_count = vec![0; q_max];
        let mut dead_ends = vec![0; q_max];
        for i in 1..q_max {
            let (c, s, d) = t.right_excess(i);
            contribution[i] = c;
            special_count[i] = s;
            dead_ends[i] = d;
        }
        let periodic = complexity_profile(t)?.periodic_from.is_some_and(|n| n < q_max);
        Ok(RightSpecialSums { p: t.counts[..=q_max].to_vec(), contribution, special_count, dead_ends, periodic })
    }

    pub fn verify(&self, r: usize, q: usize) -> RsReport {
        assert!(1 <= r && r < q && q < self.p.len(), "need 1 ≤ r < q ≤ q_max");
        let contributions = self.contribution[r..q].to_vec();
        let lhs = self.p[q];
        let rhs = self.p[r] + contributions.iter().sum::<u64>();
        let corollary_holds = (!self.periodic).then(|| {
            let t_count = self.special_count[r..q].iter().filter(|&&c| c > 1).count() as u64;
            lhs >= self.p[r] + (q - r) as u64 + t_count
        });
        RsReport {
            r,
            q,
            lhs,
            rhs,
            equal: lhs == rhs,
            contributions,
            corollary_holds,
            dead_ends: self.dead_ends[r..q].iter().sum(),
        }
    }
}

pub fn verify_rslem(t: &LanguageTable, r: usize, q: usize) -> Result<RsReport> {
    if r == 0 || r >= q {
        return Err(Error::InvalidArgument(format!("need 1 ≤ r < q, got r = {r}, q = {q}")));
    }
    Ok(RightSpecialSums::new(t, q)?.verify(r, q))
}

#[derive(Clone, Debug, Serialize)]
pub struct RauzyEdge {
    pub from: usize,
    pub to: usize,
    pub label: Word,
}

#[derive(Clone, Debug, Serialize)]
pub struct RauzyGraph {
    pub n: usize,
    pub vertices: Vec<Word>,
    pub edges: Vec<RauzyEdge>,
}

pub fn rauzy_graph(t: &LanguageTable, n: usize) -> Result<RauzyGraph> {
    t.require_validated()?;
    check_length(t, n)?;
    let vertices: Vec<Word> = t.factors(n).into_iter().map(Word::from_slice).collect();
    let slot: HashMap<&[u8], usize> = vertices.iter().enumerate().map(|(i, v)| (v.letters(), i)).collect();
    let mut edges = Vec::with_capacity(t.counts[n + 1] as usize);
    for f in t.factors(n + 1) {
        let (Some(&from), Some(&to)) = (slot.get(&f[..n]), slot.get(&f[1..])) else {
            return Err(Error::InsufficientDepth { n });
        };
        edges.push(RauzyEdge { from, to, label: Word::from_slice(f) });
    }
    Ok(RauzyGraph { n, vertices, edges })
}

impl RauzyGraph {
    pub fn out_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertices.len()];
        for e in &self.edges {
            d[e.from] += 1;
        }
        d
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertices.len()];
        for e in &self.edges {
            d[e.to] += 1;
        }
        d
    }

    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.from].push(i);
        }
        adj
    }

    pub fn is_strongly_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return true;
        }
        let reach = |forward: bool| {
            let mut adj = vec![Vec::new(); n];
            for e in &self.edges {
                if forward {
                    adj[e.from].push(e.to);
                } else {
                    adj[e.to].push(e.from);
                }
            }
            let mut seen = vec![false; n];
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    pub fn to_dot(&self) -> String {
        let mut out = format!("digraph rauzy_{} {{\n", self.n);
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "  v{i} [label=\"{}\"];", format_symbols(v));
        }
        for e in &self.edges {
            let _ = writeln!(out, "  v{} -> v{} [label=\"{}\"];", e.from, e.to, format_symbols(&e.label));
        }
        out.push_str("}\n");
        out
    }
}
