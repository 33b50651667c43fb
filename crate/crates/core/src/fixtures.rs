//! Reference systems used by tests, the acceptance suite and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sadic::SadicParams;
use crate::substitution::Substitution;
use crate::word::Word;

fn identity() -> Substitution {
    Substitution::identity(2)
}

fn repeated(pi: Substitution, m: u64, n: u64, levels: usize) -> SadicParams {
    SadicParams::from_pairs(pi, &vec![(m, n); levels]).expect("valid constant parameters")
}

/// `π = id`, `(m_k, n_k) = (1, 2)`: the (letter-exchanged) Fibonacci shift.
pub fn fibonacci(levels: usize) -> SadicParams {
    repeated(identity(), 1, 2, levels)
}

/// `π = id` with a constant pair.
pub fn constant(m: u64, n: u64, levels: usize) -> SadicParams {
    repeated(identity(), m, n, levels)
}

/// Cycle through every admissibility clause: `(1, 3)` after a pair with
/// `n = m + 1`, `m > 4` with `n < 1.9m`, `n = 2m` with `m ≤ 4`.
pub const MIXED_CYCLE: [(u64, u64); 7] = [(2, 3), (1, 3), (3, 5), (5, 9), (1, 2), (4, 8), (2, 4)];

pub fn mixed(levels: usize) -> SadicParams {
    let pairs: Vec<(u64, u64)> = MIXED_CYCLE.iter().copied().cycle().take(levels).collect();
    SadicParams::from_pairs(identity(), &pairs).expect("valid mixed parameters")
}

/// `π(0) = 01`, `π(1) = 101` with `(2, 3)` repeated.
pub fn pi_variant(levels: usize) -> SadicParams {
    let pi = Substitution::new(vec!["01".parse().expect("word"), "101".parse().expect("word")]).expect("valid π");
    repeated(pi, 2, 3, levels)
}

/// All words of length `len` over `{0, 1}` without `11`.
pub fn golden_mean_words(len: usize) -> Vec<Word> {
    (0u64..1 << len)
        .map(|bits| (0..len).map(|i| ((bits >> (len - 1 - i)) & 1) as u8).collect::<Vec<_>>())
        .filter(|v| !v.windows(2).any(|p| p == [1, 1]))
        .map(|v| Word::new(v).expect("binary word"))
        .collect()
}

/// Random pair obeying the admissibility clauses given the previous pair.
fn random_pair(rng: &mut impl Rng, prev: Option<(u64, u64)>, max_m: u64) -> (u64, u64) {
    loop {
        let m = if rng.gen_bool(0.35) { 1 } else { rng.gen_range(1..=max_m) };
        let n = match m {
            1 => rng.gen_range(2..=3),
            2..=4 => rng.gen_range(m + 1..=2 * m),
            // n < 1.9m  ⇔  10n < 19m
            _ => rng.gen_range(m + 1..=(19 * m - 1) / 10),
        };
        if (m, n) == (1, 3) && prev.is_some_and(|(pm, pn)| pn != pm + 1) {
            continue;
        }
        return (m, n);
    }
}

/// Random full-4/3 parameters. With `random_pi`, `π(0)`, `π(1)` are random
/// binary words with distinct first letters and `|π(0)| ≤ |π(1)| < 2|π(0)|`.
pub fn random_full_stream(seed: u64, levels: usize, random_pi: bool) -> SadicParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = if random_pi {
        let l0 = rng.gen_range(1..=4usize);
        let l1 = rng.gen_range(l0..2 * l0.max(1)).max(l0);
        let first = rng.gen_range(0..2u8);
        let mut w0 = vec![first];
        w0.extend((1..l0).map(|_| rng.gen_range(0..2u8)));
        let mut w1 = vec![1 - first];
        w1.extend((1..l1).map(|_| rng.gen_range(0..2u8)));
        Substitution::new(vec![Word::new(w0).expect("word"), Word::new(w1).expect("word")]).expect("π")
    } else {
        identity()
    };
    let mut pairs = Vec::with_capacity(levels);
    let mut prev = None;
    for _ in 0..levels {
        let pair = random_pair(&mut rng, prev, 7);
        pairs.push(pair);
        prev = Some(pair);
    }
    SadicParams::from_pairs(pi, &pairs).expect("valid random parameters")
}

#[cfg(test)]
pub(crate) fn full_stream_strategy(levels: usize) -> impl proptest::strategy::Strategy<Value = SadicParams> {
    use proptest::prelude::*;
    (any::<u64>(), any::<bool>()).prop_map(move |(seed, random_pi)| random_full_stream(seed, levels, random_pi))
}
