//! Acceptance checks. Prints one `PASS` or `FAIL` line per criterion and
//! exits non-zero when any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use altbase::density::{
    closed_form_density, dk10_density, is_invariant_density, solve_density_exact,
    PiecewiseConstantFn,
};
use altbase::empirics::{birkhoff_histogram, l1_distance, ulam_density, BirkhoffConfig};
use altbase::maps::{compose, PiecewiseAffineMap};
use altbase::measures::{
    coincidence_search, compare_general_pair, decide_coincidence_closed_form, rational_grid,
    CoincidenceEngine, CoincidentPair, WitnessKind,
};
use altbase::orbits::{
    orbit_of_one, orbit_set_with_zero, quadratic_orbit_table, InfiniteReason, OrbitConfig,
    OrbitStatus,
};
use altbase::{Error, FieldElem};
use num_bigint::BigInt;
use num_integer::Integer;
use rayon::prelude::*;

type Outcome = std::result::Result<String, String>;

/// Every exact density produced by criteria 1 to 4, with its map.
type Produced = Mutex<Vec<(PiecewiseAffineMap, PiecewiseConstantFn)>>;

fn q(s: &str) -> FieldElem {
    s.parse().expect("literal")
}

fn comp(f: &[FieldElem]) -> PiecewiseAffineMap {
    compose(f).expect("valid factors")
}

fn within(limit: Duration, start: Instant) -> Outcome {
    let t = start.elapsed();
    if t <= limit {
        Ok(format!("{:.2}s", t.as_secs_f64()))
    } else {
        Err(format!(
            "took {:.2}s, limit {}s",
            t.as_secs_f64(),
            limit.as_secs()
        ))
    }
}

fn criterion1(produced: &Produced) -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for p in 3u64..=12 {
        for qq in 2..p {
            if p.gcd(&qq) != 1 {
                continue;
            }
            let expected = closed_form_density(p, qq, 1).map_err(|e| e.to_string())?;
            for k in 1..=3u64 {
                let map = comp(&[FieldElem::from_int(k * qq), FieldElem::ratio(p, qq)]);
                let r = dk10_density(&map, 64).map_err(|e| format!("{p}/{qq}, k={k}: {e}"))?;
                if !r.exact {
                    return Err(format!("{p}/{qq}, k={k}: not exact ({:?})", r.mode));
                }
                let closed = closed_form_density(p, qq, k).map_err(|e| e.to_string())?;
                if r.density.breakpoints() != closed.breakpoints()
                    || r.density.values() != closed.values()
                {
                    return Err(format!("{p}/{qq}, k={k}: {:?} vs {:?}", r.density, closed));
                }
                if closed != expected {
                    return Err(format!("{p}/{qq}: closed form depends on k"));
                }
                produced.lock().unwrap().push((map, r.density));
                checked += 1;
            }
        }
    }
    let t = within(Duration::from_secs(10), start)?;
    Ok(format!("{checked} maps match cell by cell, {t}"))
}

fn criterion2(produced: &Produced) -> Outcome {
    let m1 = comp(&[q("4/3"), q("3/2")]);
    let m2 = comp(&[q("4/3"), q("9/2")]);
    let f1 = solve_density_exact(&m1).map_err(|e| e.to_string())?;
    let f2 = solve_density_exact(&m2).map_err(|e| e.to_string())?;
    let half = [q("0"), q("1/2"), q("1")];
    if f1.breakpoints() != half || f1.values() != [q("4/3"), q("2/3")] {
        return Err(format!("first density {f1:?}"));
    }
    if f2.breakpoints() != half || f2.values() != [q("8/7"), q("6/7")] {
        return Err(format!("second density {f2:?}"));
    }
    produced.lock().unwrap().push((m1, f1));
    produced.lock().unwrap().push((m2, f2));
    let r = |s: &str| s.parse().expect("rational");
    let v = compare_general_pair(&r("3/2"), &r("4/3"), &r("9/2"), &r("4/3"))
        .map_err(|e| e.to_string())?;
    if v.equal {
        return Err("verdict is equal".into());
    }
    let w = v
        .witnesses
        .iter()
        .find(|w| w.kind == WitnessKind::DensityValues && w.point < q("1/2"))
        .ok_or("no density witness in [0, 1/2)")?;
    let (a, b) = w.values.clone().ok_or("witness without values")?;
    Ok(format!(
        "not equal, witness at {} with values {a} and {b}",
        w.point
    ))
}

fn criterion3() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for p in 1i64..=12 {
        for qq in 1..=p {
            for n in 2i64..=6 {
                let nb = FieldElem::positive_root(p, qq).map_err(|e| e.to_string())?;
                if nb.is_rational() {
                    continue;
                }
                let beta = &nb / &FieldElem::from_int(n);
                if beta <= FieldElem::one() {
                    continue;
                }
                let expected = quadratic_orbit_table(p, qq, n)
                    .ok_or(format!("({p}, {qq}, {n}): no table row"))?;
                let map = comp(&[FieldElem::from_int(n), beta]);
                let o = orbit_of_one(&map, 100).map_err(|e| e.to_string())?;
                if !o.is_finite() {
                    return Err(format!("({p}, {qq}, {n}): {:?}", o.status));
                }
                let got = orbit_set_with_zero(&o);
                if got != expected || got.len() > 3 {
                    return Err(format!("({p}, {qq}, {n}): got {got:?}, table {expected:?}"));
                }
                checked += 1;
            }
        }
    }
    let t = within(Duration::from_secs(30), start)?;
    Ok(format!("{checked} triples match the table, {t}"))
}

fn criterion4(produced: &Produced) -> Outcome {
    let start = Instant::now();
    let grid: Vec<FieldElem> = rational_grid(12, 5);
    let systems: Vec<(FieldElem, u64)> = grid
        .iter()
        .flat_map(|b| (2..=10u64).map(move |n| (b.clone(), n)))
        .collect();
    let engine = CoincidenceEngine::new(OrbitConfig::from_env());
    let pairs: Vec<(usize, usize)> = (0..systems.len())
        .flat_map(|i| (i..systems.len()).map(move |j| (i, j)))
        .collect();
    let mismatches: Vec<String> = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let (b1, n) = &systems[i];
            let (b2, m) = &systems[j];
            let closed = decide_coincidence_closed_form(b1, *n, b2, *m);
            let exact = engine.decide_exact(b1, *n, b2, *m);
            match (closed, exact) {
                (Ok(c), Ok(e)) if c.equal == e.equal => None,
                (c, e) => Some(format!(
                    "({b1}, {n}) vs ({b2}, {m}): closed {:?}, exact {:?}",
                    c.map(|v| v.equal),
                    e.map(|v| v.equal)
                )),
            }
        })
        .collect();
    if let Some(first) = mismatches.first() {
        return Err(format!(
            "{} disagreements, first: {first}",
            mismatches.len()
        ));
    }
    let densities: Vec<_> = systems
        .par_iter()
        .flat_map(|(b, n)| {
            let nf = FieldElem::from_int(*n);
            [vec![nf.clone(), b.clone()], vec![b.clone(), nf]]
        })
        .filter_map(|f| {
            let map = comp(&f);
            match solve_density_exact(&map) {
                Ok(d) => Some(Ok((map, d))),
                Err(Error::OrbitNotFinite(_)) => None,
                Err(e) => Some(Err(e.to_string())),
            }
        })
        .collect::<std::result::Result<_, _>>()?;
    produced.lock().unwrap().extend(densities);
    Ok(format!(
        "{} pairs agree, {:.2}s",
        pairs.len(),
        start.elapsed().as_secs_f64()
    ))
}

fn criterion5(produced: &Produced) -> Outcome {
    let all = produced.lock().unwrap();
    if all.is_empty() {
        return Err("no densities collected".into());
    }
    let bad: Vec<String> = all
        .par_iter()
        .filter_map(|(m, f)| match is_invariant_density(m, f) {
            Ok(true) => None,
            Ok(false) => Some(format!("{m}")),
            Err(e) => Some(format!("{m}: {e}")),
        })
        .collect();
    match bad.first() {
        None => Ok(format!(
            "{} densities are exact fixed points with unit mass",
            all.len()
        )),
        Some(b) => Err(format!("{} failures, first: {b}", bad.len())),
    }
}

fn criterion6() -> Outcome {
    // T_{7/4} after T_{5/3}.
    let map = comp(&[q("5/3"), q("7/4")]);
    let o = orbit_of_one(&map, 100).map_err(|e| e.to_string())?;
    let mut failures = Vec::new();
    match &o.status {
        OrbitStatus::DiagnosedInfinite {
            reason: InfiniteReason::DenominatorGrowth { z },
        } if *z == BigInt::from(3) => {}
        s => failures.push(format!("orbit of 1: {s:?}")),
    }
    let mut x = map.eval_at_one();
    for n in 1..=12u32 {
        let r = x.as_rational().ok_or("irrational iterate")?.clone();
        if !r.denom().is_multiple_of(&BigInt::from(3).pow(n)) {
            failures.push(format!(
                "iterate {n} = {r}: denominator not divisible by 3^{n}"
            ));
            break;
        }
        x = map.eval(&x).map_err(|e| e.to_string())?;
    }
    let y = map.eval(&q("3/4")).map_err(|e| e.to_string())?;
    if !y.is_zero() {
        failures.push(format!("seed 3/4 maps to {y}, not 0"));
    }
    if failures.is_empty() {
        Ok("z = 3, denominators grow as 3^n, seed 3/4 terminates".into())
    } else {
        Err(failures.join("; "))
    }
}

fn criterion7() -> Outcome {
    let maps = [
        vec![q("3"), q("7/3")],
        vec![q("4/3"), q("3/2")],
        vec![q("4/3"), q("9/2")],
    ];
    let mut notes = Vec::new();
    for f in maps {
        let start = Instant::now();
        let map = comp(&f);
        let exact = solve_density_exact(&map).map_err(|e| e.to_string())?;
        let cfg = BirkhoffConfig {
            x0: None,
            iterations: 10_000_000,
            bins: 300,
            burn_in: 100,
            seed: 0,
        };
        let h = birkhoff_histogram(&map, &cfg).map_err(|e| e.to_string())?;
        let u = ulam_density(&map, 10_000, 10_000).map_err(|e| e.to_string())?;
        let lb = l1_distance(&h, &exact);
        let lu = l1_distance(&u, &exact);
        if lb >= 1e-2 || lu >= 1e-3 {
            return Err(format!("{map}: Birkhoff L1 {lb:.3e}, Ulam L1 {lu:.3e}"));
        }
        let t = within(Duration::from_secs(60), start).map_err(|e| format!("{map}: {e}"))?;
        notes.push(format!("{map}: {lb:.1e}/{lu:.1e} in {t}"));
    }
    Ok(notes.join(", "))
}

fn criterion8() -> Outcome {
    let start = Instant::now();
    let found = coincidence_search(7, 4, 8).map_err(|e| e.to_string())?;
    if let Some(bad) = found.iter().find(|c| !c.matches_prediction()) {
        return Err(format!("unpredicted coincidence {bad:?}"));
    }
    let example = CoincidentPair {
        first: (q("4/3"), q("3/2")),
        second: (q("4/3"), q("9/2")),
    };
    if found.contains(&example) {
        return Err("the (4/3, 3/2), (4/3, 9/2) pair is reported as coincident".into());
    }
    let firsts: BTreeSet<_> = found.iter().map(|c| c.first.0.clone()).collect();
    let t = within(Duration::from_secs(300), start)?;
    Ok(format!(
        "{} coincidences over {} first bases, all predicted, {t}",
        found.len(),
        firsts.len()
    ))
}

fn main() -> ExitCode {
    let produced: Produced = Mutex::new(Vec::new());
    let results: Vec<(&str, Outcome)> = vec![
        ("1 closed-form densities", criterion1(&produced)),
        ("2 two-map example", criterion2(&produced)),
        ("3 quadratic orbit tables", criterion3()),
        ("4 exact vs closed-form verdicts", criterion4(&produced)),
        ("5 fixed-point property", criterion5(&produced)),
        ("6 growing-denominator orbit", criterion6()),
        ("7 empirical cross-validation", criterion7()),
        ("8 coincidence search", criterion8()),
    ];
    let mut ok = true;
    for (name, r) in &results {
        match r {
            Ok(msg) => println!("criterion {name}: PASS ({msg})"),
            Err(msg) => {
                ok = false;
                println!("criterion {name}: FAIL ({msg})");
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
