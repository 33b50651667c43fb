use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};
use subshift_lab::language::{block_table, certified_table, complexity_profile, rauzy_graph, special_words};
use subshift_lab::params_io::{load_params, load_source, load_symbols, params_to_json, Source};
use subshift_lab::recover::{recover_structure, CertificateStatus};
use subshift_lab::sadic::shift_diff_density;
use subshift_lab::spectrum::{eigenvalue, length_sequences, rational_to_f64, weyl_ladder, Frequency};
use subshift_lab::substitution::generate_prefix;
use subshift_lab::weakmix::{build_example, landmark_complexities, ExampleConfig, Growth, Slack};
use subshift_lab::word::format_symbols;
use subshift_lab::{Error, LanguageTable, Result};

use crate::{Format, Schedule, SlackArg};

pub struct Outcome {
    pub text: String,
    pub code: u8,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, code: 0 }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InsufficientDepth { .. }
        | Error::WordTooShort { .. }
        | Error::InsufficientData(_)
        | Error::InsufficientPrecision { .. }
        | Error::NotApplicable(_)
        | Error::NotAConcatenation { .. }
        | Error::OutOfRange(_) => 2,
        Error::ComplexityTooHigh(_) | Error::BoundViolation(_) | Error::NotValidated => 3,
        Error::BudgetExceeded { .. } | Error::ScheduleTooTight { .. } => 4,
        Error::InvalidArgument(_) | Error::PowersOfSameWord | Error::NotCommuting | Error::Unsupported(_) => 1,
    }
}

fn schema(name: &str) -> String {
    format!("subshift-lab/{name}/v1")
}

pub fn to_json(mut v: Value, name: &str) -> String {
    v.as_object_mut().expect("reports are objects").insert("schema".into(), Value::from(schema(name)));
    let mut s = serde_json::to_string_pretty(&v).expect("plain data");
    s.push('\n');
    s
}

fn only(out: Format, allowed: &[Format]) -> Result<()> {
    if allowed.contains(&out) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("--out {out:?} is not available for this command").to_lowercase()))
    }
}

pub fn rational_str(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// A validated table reaching `n_max`, plus the level it was read from.
fn table_for(source: &Source, level: Option<usize>, n_max: usize, budget: usize) -> Result<(Option<usize>, LanguageTable)> {
    match (source, level) {
        (Source::Sadic(p), Some(k)) => Ok((Some(k), block_table(p.pi(), p.levels(), k, n_max, budget)?)),
        (Source::Sadic(p), None) => {
            let (k, t) = certified_table(p.pi(), p.levels(), 1, n_max, budget)?;
            Ok((Some(k), t))
        }
        (Source::Factors(_), Some(_)) => Err(Error::InvalidArgument("--level needs S-adic parameters".into())),
        (Source::Factors(words), None) => {
            let t = LanguageTable::from_factor_data(words, "factor data")?;
            if t.n_max() < n_max {
                return Err(Error::InsufficientDepth { n: t.n_max() + 1 });
            }
            Ok((None, t))
        }
    }
}

pub fn complexity(path: &Path, level: Option<usize>, n_max: usize, out: Format, budget: usize) -> Result<Outcome> {
    only(out, &[Format::Csv, Format::Json])?;
    if n_max == 0 {
        return Err(Error::InvalidArgument("--nmax must be positive".into()));
    }
    let (level, t) = table_for(&load_source(path)?, level, n_max, budget)?;
    let profile = complexity_profile(&t)?;
    let p = &profile.p[1..=n_max];
    Ok(Outcome::ok(match out {
        Format::Csv => {
            let mut s = String::from("n,p\n");
            for (i, v) in p.iter().enumerate() {
                let _ = writeln!(s, "{},{v}", i + 1);
            }
            s
        }
        _ => to_json(
            json!({
                "level": level,
                "n_max": n_max,
                "p": p,
                "periodic_from": profile.periodic_from.filter(|&n| n < n_max),
            }),
            "complexity",
        ),
    }))
}

pub fn rauzy(path: &Path, n: usize, out: Format, budget: usize) -> Result<Outcome> {
    only(out, &[Format::Dot, Format::Json])?;
    if n == 0 {
        return Err(Error::InvalidArgument("--n must be positive".into()));
    }
    let (_, t) = table_for(&load_source(path)?, None, n + 1, budget)?;
    let g = rauzy_graph(&t, n)?;
    Ok(Outcome::ok(match out {
        Format::Dot => g.to_dot(),
        _ => to_json(
            json!({
                "n": n,
                "vertices": g.vertices,
                "edges": g.edges,
                "strongly_connected": g.is_strongly_connected(),
            }),
            "rauzy",
        ),
    }))
}

pub fn special(path: &Path, n: usize, out: Format, budget: usize) -> Result<Outcome> {
    only(out, &[Format::Json, Format::Csv])?;
    if n == 0 {
        return Err(Error::InvalidArgument("--n must be positive".into()));
    }
    let (_, t) = table_for(&load_source(path)?, None, n + 1, budget)?;
    let r = special_words(&t, n)?;
    Ok(Outcome::ok(match out {
        Format::Csv => {
            let mut s = String::from("kind,word,letters\n");
            for (kind, list) in [("right", &r.right_special), ("left", &r.left_special)] {
                for w in list {
                    let _ = writeln!(s, "{kind},{},{}", format_symbols(&w.word), format_symbols(&w.letters).replace(',', " "));
                }
            }
            for w in &r.bi_special {
                let _ = writeln!(s, "bi,{},", format_symbols(w));
            }
            s
        }
        _ => to_json(serde_json::to_value(&r).expect("plain data"), "special"),
    }))
}

pub fn density(path: &Path, k: usize, n: usize, out: Format, budget: usize) -> Result<Outcome> {
    only(out, &[Format::Csv, Format::Json])?;
    let p = load_params(path)?;
    if k == 0 || k >= p.levels().len() {
        return Err(Error::InvalidArgument(format!("--q-from-dk needs 1 ≤ k < {}", p.levels().len())));
    }
    let ls = length_sequences(&p, k)?;
    let q = ls
        .d(k as isize)
        .to_usize()
        .filter(|&q| q <= budget)
        .ok_or(Error::BudgetExceeded { predicted: ls.d(k as isize).to_biguint().expect("positive"), budget })?;
    let r = shift_diff_density(&p, q, n, budget)?;
    let bound = r.bound.as_ref();
    let bound_f = bound.map(|(_, b)| rational_to_f64(b));
    let within = bound.map(|(_, b)| BigRational::new(BigInt::from(r.count), BigInt::from(r.n)) <= *b);
    Ok(Outcome::ok(match out {
        Format::Csv => format!(
            "k,q,N,count,density,bound,within\n{k},{q},{},{},{},{},{}\n",
            r.n,
            r.count,
            r.density_f64(),
            bound_f.map_or(String::new(), |b| b.to_string()),
            within.map_or(String::new(), |b| b.to_string()),
        ),
        _ => to_json(
            json!({
                "k": k,
                "q": q,
                "N": r.n,
                "count": r.count,
                "density": r.density_f64(),
                "bound": bound.map(|(_, b)| rational_str(b)),
                "bound_f64": bound_f,
                "within_bound": within,
            }),
            "density",
        ),
    }))
}

pub fn alpha(path: &Path, k: usize, bits: u64) -> Result<Outcome> {
    let p = load_params(path)?;
    let e = eigenvalue(&p, k, bits)?;
    let digits = (bits as f64 * std::f64::consts::LOG10_2).floor() as usize;
    let distances: Vec<Value> = e
        .distances
        .iter()
        .map(|d| {
            json!({
                "k": d.k,
                "d_k": d.d_k.to_string(),
                "distance": rational_to_f64(&d.approx),
                "upper": rational_to_f64(&d.upper),
                "bound": rational_to_f64(&d.decay_bound),
                "below_bound": d.upper < d.decay_bound,
            })
        })
        .collect();
    let err_log2 = e.error_bound.numer().bits() as i64 - e.error_bound.denom().bits() as i64;
    Ok(Outcome::ok(to_json(
        json!({
            "K": k,
            "bits": bits,
            "alpha": e.alpha_fixed.to_decimal(digits),
            "beta": e.beta_fixed.to_decimal(digits),
            "error_bound": rational_to_f64(&e.error_bound),
            "error_bound_log2_at_most": err_log2 + 1,
            "certified_digits": ((-(err_log2 + 1)).max(0) as f64 * std::f64::consts::LOG10_2).floor() as u64,
            "distances": distances,
        }),
        "spectrum-alpha",
    )))
}

fn parse_frequency(s: &str, p: &subshift_lab::SadicParams) -> Result<Frequency> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("alpha") {
        let k = (p.levels().len().saturating_sub(1)).min(60);
        let e = eigenvalue(p, k, 128).or_else(|_| eigenvalue(p, k, 64))?;
        return Ok(Frequency::from_rational(&e.alpha));
    }
    if let Some((c, d)) = s.split_once('/') {
        let c: u64 = c.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad frequency {s:?}")))?;
        let d: u64 = d.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad frequency {s:?}")))?;
        return Frequency::new(c, d);
    }
    let x: f64 = s.parse().map_err(|_| Error::InvalidArgument(format!("bad frequency {s:?}")))?;
    Frequency::from_f64(x)
}

pub fn probe(path: &Path, freq: &str, n: usize, out: Format, budget: usize) -> Result<Outcome> {
    only(out, &[Format::Csv, Format::Json])?;
    if n == 0 {
        return Err(Error::InvalidArgument("--N must be positive".into()));
    }
    let p = load_params(path)?;
    let f = parse_frequency(freq, &p)?;
    let x = generate_prefix(p.pi(), p.levels(), n, budget)?;
    let mut ladder: Vec<usize> = std::iter::successors(Some(1000usize), |v| v.checked_mul(10)).take_while(|&v| v < n).collect();
    ladder.push(n);
    let moduli = weyl_ladder(&x, f, &ladder)?;
    Ok(Outcome::ok(match out {
        Format::Csv => {
            let mut s = String::from("N,modulus\n");
            for (l, m) in ladder.iter().zip(&moduli) {
                let _ = writeln!(s, "{l},{m}");
            }
            s
        }
        _ => to_json(
            json!({
                "frequency": format!("{}/{}", f.num, f.den),
                "frequency_f64": f.to_f64(),
                "ladder": ladder.iter().zip(&moduli).map(|(l, m)| json!({"N": l, "modulus": m})).collect::<Vec<_>>(),
            }),
            "spectrum-probe",
        ),
    }))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn params_text(p: &subshift_lab::SadicParams) -> String {
    let mut s = serde_json::to_string_pretty(&params_to_json(p)).expect("plain data");
    s.push('\n');
    s
}

pub fn example_build(kmax: usize, schedule: Schedule, cap: u64, slack: Option<SlackArg>, out: Option<&Path>) -> Result<Outcome> {
    let growth = match schedule {
        Schedule::Default => Growth::default(),
        Schedule::Geometric => Growth::Geometric { ratio: 2, floor: 4 },
    };
    let slack = slack.map(|s| match s {
        SlackArg::Sqrt => Slack::Sqrt,
        SlackArg::Log2 => Slack::Log2,
    });
    let ex = build_example(&ExampleConfig { growth, kmax, search_cap: cap, slack })?;
    if let Some(path) = out {
        write_file(path, &params_text(&ex.params))?;
    }
    Ok(Outcome::ok(to_json(
        json!({
            "params": params_to_json(&ex.params),
            "heights": ex.heights.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
            "choices": ex.choices,
            "tier": ex.params.admissibility().tier,
        }),
        "example-build",
    )))
}

pub fn landmarks(path: &Path, k: usize, out: Format) -> Result<Outcome> {
    only(out, &[Format::Csv, Format::Json])?;
    let p = load_params(path)?;
    let r = landmark_complexities(&p, k, None, None)?;
    Ok(Outcome::ok(match out {
        Format::Csv => {
            let mut s = String::from("k,q_hi,p_hi,p_hi_stated,ratio_hi,excess2_hi,q_lo,p_lo,ratio_lo\n");
            for l in &r.landmarks {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{}",
                    l.k, l.q_hi, l.p_hi, l.p_hi_stated, l.ratio_hi, l.excess2_hi, l.q_lo, l.p_lo, l.ratio_lo
                );
            }
            s
        }
        _ => to_json(serde_json::to_value(&r).expect("plain data"), "example-landmarks"),
    }))
}

pub fn recover(input: &Path, depth: usize, out: Option<&Path>) -> Result<Outcome> {
    let x = load_symbols(input)?;
    let r = recover_structure(&x, depth)?;
    let params = r.params()?;
    if let Some(path) = out {
        write_file(path, &params_text(&params))?;
    }
    let code = if r.certificate.status == CertificateStatus::Pass { 0 } else { 3 };
    let b = &r.bootstrap;
    let text = to_json(
        json!({
            "params": params_to_json(&params),
            "depth": r.depth,
            "blocks": r.blocks,
            "tier": r.tier,
            "working_length": r.working_length,
            "certificate": r.certificate,
            "bootstrap": {
                "q": b.q,
                "bispecial": b.bispecial,
                "anchor": b.anchor,
                "case": b.case,
                "a": b.a,
                "b": b.b,
            },
            "canonicalization": r.canonicalization,
        }),
        "recover",
    );
    Ok(Outcome { text, code })
}
