//! Suffix array and LCP array over one or more source words.
//!
//! Sources are joined with the separator byte [`SEPARATOR`], which no word
//! may contain. A factor is a window that does not cross a separator.

use crate::word::Word;

pub const SEPARATOR: u8 = 255;

pub struct SuffixIndex {
    text: Vec<u8>,
    sa: Vec<u32>,
    /// `lcp[r]` = longest common prefix of suffixes at ranks `r - 1` and `r`; `lcp[0] = 0`.
    lcp: Vec<u32>,
    /// `usable[r]` = distance from `sa[r]` to the next separator.
    usable: Vec<u32>,
}

impl SuffixIndex {
    pub fn new<'a, I>(sources: I) -> Self
    where
        I: IntoIterator<Item = &'a Word>,
    {
        let mut text = Vec::new();
        for w in sources {
            text.extend_from_slice(w.letters());
            text.push(SEPARATOR);
        }
        Self::from_text(text)
    }

    /// Index over raw text in which every source already ends with [`SEPARATOR`].
    pub fn from_text(text: Vec<u8>) -> Self {
        debug_assert!(text.last().is_none_or(|&c| c == SEPARATOR));
        assert!(text.len() < i32::MAX as usize, "source text too large for a 32-bit suffix array");
        let mut raw = vec![0i32; text.len()];
        if !text.is_empty() {
            divsufsort::sort_in_place(&text, &mut raw);
        }
        let sa: Vec<u32> = raw.into_iter().map(|i| i as u32).collect();

        let mut dist = vec![0u32; text.len()];
        let mut next = 0u32;
        for i in (0..text.len()).rev() {
            if text[i] == SEPARATOR {
                next = 0;
            } else {
                next += 1;
            }
            dist[i] = next;
        }
        let usable: Vec<u32> = sa.iter().map(|&p| dist[p as usize]).collect();
        drop(dist);

        let lcp = kasai(&text, &sa);
        SuffixIndex { text, sa, lcp, usable }
    }

    pub fn text(&self) -> &[u8] {
        &self.text
    }

    pub fn len(&self) -> usize {
        self.sa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sa.is_empty()
    }

    /// Number of distinct factors of each length `0..=n_max`.
    pub fn distinct_counts(&self, n_max: usize) -> Vec<u64> {
        let mut diff = vec![0i64; n_max + 2];
        for r in 0..self.sa.len() {
            let lo = self.lcp[r] as usize + 1;
            let hi = (self.usable[r] as usize).min(n_max);
            if lo <= hi {
                diff[lo] += 1;
                diff[hi + 1] -= 1;
            }
        }
        let mut counts = vec![0u64; n_max + 1];
        counts[0] = u64::from(!self.text.iter().all(|&c| c == SEPARATOR));
        let mut running = 0i64;
        for n in 1..=n_max {
            running += diff[n];
            counts[n] = running as u64;
        }
        counts
    }

    /// Distinct factors of length `n` in lexicographic order, as text offsets.
    pub fn factor_starts(&self, n: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for r in 0..self.sa.len() {
            if self.usable[r] as usize >= n && (self.lcp[r] as usize) < n {
                out.push(self.sa[r] as usize);
            }
        }
        out
    }

    /// Whether `w` occurs without crossing a separator.
    pub fn contains(&self, w: &[u8]) -> bool {
        if w.is_empty() {
            return !self.is_empty();
        }
        let text = &self.text;
        let idx = self.sa.partition_point(|&p| {
            let p = p as usize;
            let end = (p + w.len()).min(text.len());
            text[p..end] < *w
        });
        idx < self.sa.len() && {
            let p = self.sa[idx] as usize;
            text.len() >= p + w.len() && &text[p..p + w.len()] == w
        }
    }
}

fn kasai(text: &[u8], sa: &[u32]) -> Vec<u32> {
    let n = sa.len();
    let mut rank = vec![0u32; n];
    for (r, &p) in sa.iter().enumerate() {
        rank[p as usize] = r as u32;
    }
    let mut lcp = vec![0u32; n];
    let mut h = 0usize;
    for i in 0..n {
        let r = rank[i] as usize;
        if r == 0 {
            h = 0;
            continue;
        }
        let j = sa[r - 1] as usize;
        while i + h < n && j + h < n && text[i + h] == text[j + h] {
            h += 1;
        }
        lcp[r] = h as u32;
        h = h.saturating_sub(1);
    }
    lcp
}
