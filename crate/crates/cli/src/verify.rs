//! `sadic verify`: the invariant battery over one parameter file.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::json;
use subshift_lab::language::certified_table;
use subshift_lab::params_io::load_params;
use subshift_lab::sadic::{derived_lengths, derived_words, unique_decompose, yz_diff_count, ClosedForm, SadicParams, Tier};
use subshift_lab::spectrum::{beta_sequence, eigenvalue};
use subshift_lab::substitution::level_words;
use subshift_lab::{Error, Result};

use crate::commands::{to_json, Outcome};

/// Words longer than this are not materialized by the battery.
const WORD_CAP: u64 = 1 << 20;
const CLOSED_FORM_CAP: usize = 2000;

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
enum Status {
    Pass,
    Fail,
    Skipped,
    /// A documented departure of the stated formula or bound.
    Deviation,
}

#[derive(Serialize)]
struct Check {
    status: Status,
    witness: String,
}

fn check(pass: bool, witness: impl Into<String>) -> Check {
    Check { status: if pass { Status::Pass } else { Status::Fail }, witness: witness.into() }
}

fn skipped(why: impl Into<String>) -> Check {
    Check { status: Status::Skipped, witness: why.into() }
}

fn small(x: &BigUint) -> bool {
    x.to_u64().is_some_and(|v| v <= WORD_CAP)
}

fn derived(p: &SadicParams, kmax: usize, budget: usize) -> Result<Check> {
    let top = (kmax + 1).min(p.levels().len() + 1);
    let lens = derived_lengths(p, top)?;
    let mut checked = 0;
    for k in 1..top {
        if !small(&lens[k].u) || !small(&lens[k].s) {
            break;
        }
        let cur = derived_words(p, k, budget)?;
        let next = derived_words(p, k + 1, budget)?;
        let m = p.m(k).to_usize().expect("small level");
        let n = p.n(k).to_usize().expect("small level");
        let vm = cur.v.pow(m - 1);
        let ok = next.v == vm.concat(&cur.u)
            && next.u == cur.v.pow(n - 1).concat(&cur.u)
            && next.s == cur.s.concat(&next.v)
            && next.p == vm.concat(&cur.p)
            && level_words(p.pi(), p.levels(), k, budget)?.0 == next.v;
        if !ok {
            return Ok(check(false, format!("recursions fail between levels {k} and {}", k + 1)));
        }
        checked = k + 1;
    }
    if checked == 0 {
        return Ok(skipped("level-2 words exceed the size cap"));
    }
    Ok(check(true, format!("levels 1..={checked} agree with the generated words")))
}

fn ps_bound(p: &SadicParams, kmax: usize) -> Result<Check> {
    if p.admissibility().tier != Tier::Full43 {
        return Ok(skipped("needs full-4/3 parameters"));
    }
    let top = (kmax + 1).min(p.levels().len() + 1);
    for (i, l) in derived_lengths(p, top)?.iter().enumerate() {
        let lhs = &l.p + &l.s;
        if lhs >= (&l.u + &l.v).min(&l.v * 3u32) {
            return Ok(check(false, format!("level {}: |p| + |s| = {lhs}", i + 1)));
        }
    }
    Ok(check(true, format!("levels 1..={top}")))
}

fn decomposition(p: &SadicParams, kmax: usize, budget: usize) -> Result<Check> {
    let mut checked = Vec::new();
    for k in 0..kmax.min(p.levels().len().saturating_sub(1)) {
        let (w, _) = match level_words(p.pi(), p.levels(), k + 1, budget.min(WORD_CAP as usize)) {
            Ok(pair) => pair,
            Err(Error::BudgetExceeded { .. }) => break,
            Err(e) => return Err(e),
        };
        let m = p.m(k + 1).to_usize().expect("materialized");
        let mut expect = vec![0u8; m - 1];
        expect.push(1);
        let d = unique_decompose(&w, p, k, budget)?;
        if d.blocks != expect {
            return Ok(check(false, format!("level {k}: parse {:?}", d.blocks)));
        }
        checked.push(k);
    }
    match checked.last() {
        None => Ok(skipped("no level word fits the size cap")),
        Some(&k) => Ok(check(true, format!("unique parses at levels 0..={k}"))),
    }
}

fn closed_form(p: &SadicParams, budget: usize) -> Result<(Check, Check)> {
    if p.levels().len() < 2 {
        let s = || skipped("needs two parameter pairs");
        return Ok((s(), s()));
    }
    let probe = ClosedForm::with_constant(p, 0.into())?;
    let hi = probe.max_q_corrected().to_usize().unwrap_or(usize::MAX).min(CLOSED_FORM_CAP);
    let lo = probe.base.to_usize().expect("small base");
    let (_, t) = match certified_table(p.pi(), p.levels(), 1, hi, budget) {
        Ok(pair) => pair,
        Err(e @ (Error::BudgetExceeded { .. } | Error::InsufficientData(_))) => {
            let s = || skipped(format!("no table to n = {hi}: {e}"));
            return Ok((s(), s()));
        }
        Err(e) => return Err(e),
    };
    let cf = ClosedForm::calibrate(p, &t)?;
    for q in lo..=hi {
        let exact = cf.eval_corrected(&BigUint::from(q))?;
        if exact != t.p(q).into() {
            return Ok((check(false, format!("q = {q}: formula {exact}, brute force {}", t.p(q))), skipped("")));
        }
    }
    let corrected = check(true, format!("K = {}, q = {lo}..={hi}", cf.constant));
    let stated_hi = cf.max_q().to_usize().unwrap_or(usize::MAX).min(hi);
    let lo_stated = cf.min_q().to_usize().expect("below hi");
    let misses: Vec<usize> =
        (lo_stated..=stated_hi).filter(|&q| cf.eval(&BigUint::from(q)).is_ok_and(|v| v != t.p(q).into())).collect();
    let stated = if misses.is_empty() {
        check(true, format!("q = {lo_stated}..={stated_hi}"))
    } else {
        Check {
            status: Status::Deviation,
            witness: format!("stated form exceeds p(q) by one at {} lengths, first q = {}", misses.len(), misses[0]),
        }
    };
    Ok((corrected, stated))
}

fn yz(p: &SadicParams, kmax: usize, budget: usize) -> Result<Check> {
    let mut done = 0;
    for k in 0..=kmax.min(8).min(p.levels().len().saturating_sub(1)) {
        for reps in 1..=5 {
            for i in 0..=1 {
                match yz_diff_count(p, i, k, reps, budget.min(WORD_CAP as usize)) {
                    Ok(d) if BigUint::from(d.count) > d.bound => {
                        return Ok(check(false, format!("k = {k}, p = {reps}, i = {i}: {} > {}", d.count, d.bound)))
                    }
                    Ok(_) => done += 1,
                    Err(Error::BudgetExceeded { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    if done == 0 {
        return Ok(skipped("no level word fits the size cap"));
    }
    Ok(check(true, format!("{done} (k, p, i) triples")))
}

fn beta(p: &SadicParams, kmax: usize) -> Result<Check> {
    if p.admissibility().tier != Tier::Full43 {
        return Ok(skipped("needs full-4/3 parameters"));
    }
    let k = kmax.min(p.levels().len().saturating_sub(1));
    if k == 0 {
        return Ok(skipped("needs two parameter pairs"));
    }
    let b = beta_sequence(p, k)?;
    if b.product != b.closed_product {
        return Ok(check(false, "product of β_j differs from |π(0)| a_1⋯a_{K+1} / d_K"));
    }
    if let Some(j) = (1..=k).find(|&j| !b.post_condition_holds(j)) {
        return Ok(check(false, format!("β_{j} ({}) fails its {} post-condition", b.beta_f64(j), b.labels[j])));
    }
    let mut gap = false;
    for j in 1..=k {
        if !b.product_bound_holds(j) {
            // β_1 ≥ 2√(48/49) is possible when |π(0)| = |π(1)|.
            let b1 = &b.betas[1];
            if j == 1 && b1 * b1 >= BigRational::new(192.into(), 49.into()) {
                gap = true;
                continue;
            }
            return Ok(check(false, format!("product bound fails at k = {j}")));
        }
    }
    if gap {
        return Ok(Check {
            status: Status::Deviation,
            witness: format!("β_1 = {} reaches 2√(48/49); bound holds for 2 ≤ k ≤ {k}", b.beta_f64(1)),
        });
    }
    Ok(check(true, format!("identity, labels and product bound for k ≤ {k}")))
}

/// α is taken from a convergent well past the checked levels, since the
/// enclosure of `⟨d_k α⟩` is loose for `k` near the convergent index.
const DECAY_MARGIN: usize = 10;

fn decay(p: &SadicParams, kmax: usize) -> Result<Check> {
    if p.admissibility().tier != Tier::Full43 {
        return Ok(skipped("needs full-4/3 parameters"));
    }
    let big_k = (kmax + 2 * DECAY_MARGIN).min(p.levels().len().saturating_sub(1));
    let top = kmax.min(big_k.saturating_sub(DECAY_MARGIN));
    if big_k < 2 || top == 0 {
        return Ok(skipped(format!("needs more than {DECAY_MARGIN} parameter pairs beyond the checked levels")));
    }
    let e = match eigenvalue(p, big_k, 64) {
        Err(Error::InsufficientPrecision { needed_bits }) => eigenvalue(p, big_k, needed_bits)?,
        other => other?,
    };
    if let Some(d) = e.distances[..=top].iter().find(|d| d.upper >= d.decay_bound) {
        return Ok(check(false, format!("k = {}: ⟨d_k α⟩ is not below its bound", d.k)));
    }
    Ok(check(true, format!("⟨d_k α⟩ below |π(0)| a_1⋯a_{{k+1}} / d_{{k+1}} for k ≤ {top}, α from the convergent at K = {big_k}")))
}

pub fn run(path: &Path, kmax: usize, budget: usize) -> Result<Outcome> {
    if kmax == 0 {
        return Err(Error::InvalidArgument("--kmax must be positive".into()));
    }
    let p = load_params(path)?;
    let mut checks = BTreeMap::new();
    let tier = p.admissibility().tier;
    checks.insert(
        "admissibility",
        Check {
            status: Status::Pass,
            witness: if tier == Tier::Full43 {
                "full-4/3".into()
            } else {
                format!("structural only: {}", p.admissibility().summary())
            },
        },
    );
    checks.insert("derived_recursions", derived(&p, kmax, budget)?);
    checks.insert("ps_bound", ps_bound(&p, kmax)?);
    checks.insert("unique_decomposition", decomposition(&p, kmax, budget)?);
    let (corrected, stated) = closed_form(&p, budget)?;
    checks.insert("closed_form", corrected);
    checks.insert("closed_form_stated", stated);
    checks.insert("yz_difference_bound", yz(&p, kmax, budget)?);
    checks.insert("beta", beta(&p, kmax)?);
    checks.insert("eigenvalue_decay", decay(&p, kmax)?);
    let failed = checks.values().any(|c| matches!(c.status, Status::Fail));
    let text = to_json(json!({ "kmax": kmax, "tier": tier, "checks": checks, "passed": !failed }), "sadic-verify");
    Ok(Outcome { text, code: if failed { 3 } else { 0 } })
}
