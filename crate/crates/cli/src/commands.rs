use std::fs;

use altbase::density::{
    closed_form_density, dk10_density, is_invariant_density, renyi_parry_density,
    solve_density_exact, PiecewiseConstantFn,
};
use altbase::empirics::{birkhoff_histogram, l1_distance, ulam_density, BirkhoffConfig, Histogram};
use altbase::expansions::{greedy_digits_from, reconstruct};
use altbase::maps::{compose, parse_descriptor, AltBaseSystem, PiecewiseAffineMap};
use altbase::measures::{
    coincidence_search, decide_coincidence_closed_form, decide_coincidence_exact, CoincidentPair,
};
use altbase::orbits::{orbit_of_one_with, orbit_of_point_with, OrbitConfig, MAX_BITS_ENV};
use altbase::{Error, FieldElem};
use serde_json::{json, Map, Value};

use crate::{Command, Method};

pub struct CliError {
    pub code: String,
    pub message: String,
    pub exit: u8,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let exit = match e {
            Error::Parse(..) | Error::MapDescriptor(..) => 2,
            _ => 3,
        };
        CliError {
            code: e.code().to_string(),
            message: e.to_string(),
            exit,
        }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: "UsageError".into(),
        message: message.into(),
        exit: 2,
    }
}

fn io_error(e: std::io::Error) -> CliError {
    CliError {
        code: "IoError".into(),
        message: e.to_string(),
        exit: 3,
    }
}

type Out = Result<Value, CliError>;

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn parse_elem(s: &str) -> Result<FieldElem, CliError> {
    Ok(s.trim().parse::<FieldElem>()?)
}

fn parse_map(s: &str) -> Result<PiecewiseAffineMap, CliError> {
    if s.trim_start().starts_with("comp:") {
        Ok(parse_descriptor(s)?)
    } else {
        Ok(compose(&[parse_elem(s)?])?)
    }
}

fn parse_pair(s: &str) -> Result<(FieldElem, u64), CliError> {
    let (b, n) = s
        .rsplit_once(',')
        .ok_or_else(|| usage(format!("expected `beta,n`, got `{s}`")))?;
    let n: u64 = n
        .trim()
        .parse()
        .map_err(|_| usage(format!("`{n}` is not a positive integer")))?;
    Ok((parse_elem(b)?, n))
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(usage("--jobs must be positive")),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map(|p| p.install(f))
            .map_err(|e| usage(e.to_string())),
    }
}

fn orbit_config() -> Result<OrbitConfig, CliError> {
    match std::env::var(MAX_BITS_ENV) {
        Ok(v) if v.trim().parse::<u64>().is_err() => Err(usage(format!(
            "{MAX_BITS_ENV} must be a positive integer, got `{v}`"
        ))),
        _ => Ok(OrbitConfig::from_env()),
    }
}

fn approx(x: f64) -> Value {
    json!({ "approximate": true, "value": x })
}

/// Writes `bin_lo,bin_hi,height` rows and reads them back to confirm they
/// describe the same step function as the JSON output.
fn write_exact_csv(path: &str, f: &PiecewiseConstantFn) -> Out {
    let mut s = String::from("bin_lo,bin_hi,height\n");
    for (w, v) in f.breakpoints().windows(2).zip(f.values()) {
        s.push_str(&format!("{},{},{}\n", w[0], w[1], v));
    }
    fs::write(path, &s).map_err(io_error)?;
    let back = fs::read_to_string(path).map_err(io_error)?;
    let mut bps = vec![FieldElem::zero()];
    let mut vals = Vec::new();
    for line in back.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(usage(format!("malformed CSV row `{line}`")));
        }
        bps.push(parse_elem(cols[1])?);
        vals.push(parse_elem(cols[2])?);
    }
    let consistent = PiecewiseConstantFn::new(bps, vals)?.same_function(f);
    check_csv(path, f.cells(), consistent)
}

fn write_hist_csv(path: &str, h: &Histogram) -> Out {
    let s = h.to_csv();
    fs::write(path, &s).map_err(io_error)?;
    let back = fs::read_to_string(path).map_err(io_error)?;
    let heights: Vec<f64> = back
        .lines()
        .skip(1)
        .filter_map(|l| l.rsplit(',').next().and_then(|x| x.parse().ok()))
        .collect();
    check_csv(path, h.bins, heights == h.heights)
}

fn check_csv(path: &str, rows: usize, consistent: bool) -> Out {
    if !consistent {
        return Err(CliError {
            code: "CsvMismatch".into(),
            message: format!("{path} does not match the JSON output"),
            exit: 3,
        });
    }
    Ok(json!({ "path": path, "rows": rows, "consistent": true }))
}

/// `(p, q, k)` for a map `comp:kq,p/q`.
fn closed_form_params(map: &PiecewiseAffineMap) -> Result<(u64, u64, u64), CliError> {
    let bad = || {
        usage(format!(
            "{map} is not of the form comp:kq,p/q; pass --p --q --k"
        ))
    };
    let [n, beta] = map.factors() else {
        return Err(bad());
    };
    let (n, beta) = (
        n.as_rational().ok_or_else(bad)?,
        beta.as_rational().ok_or_else(bad)?,
    );
    if !n.is_integer() || beta.is_integer() {
        return Err(bad());
    }
    let p: u64 = beta.numer().try_into().map_err(|_| bad())?;
    let q: u64 = beta.denom().try_into().map_err(|_| bad())?;
    let n: u64 = n.numer().try_into().map_err(|_| bad())?;
    if !n.is_multiple_of(q) {
        return Err(bad());
    }
    Ok((p, q, n / q))
}

pub fn run(cmd: &Command) -> Out {
    let mut out = match cmd {
        Command::Expand {
            bases,
            x,
            digits,
            start_level,
        } => {
            let bases = bases
                .split(',')
                .map(parse_elem)
                .collect::<Result<Vec<_>, _>>()?;
            let system = AltBaseSystem::new(bases)?;
            let x = parse_elem(x)?;
            let ds = greedy_digits_from(&system, &x, *digits, *start_level)?;
            let (value, bound) = reconstruct(&ds);
            json!({
                "expansion": to_json(&ds),
                "partial_sum": to_json(&value),
                "error_bound": to_json(&bound),
            })
        }
        Command::Orbit {
            map,
            point,
            max_iter,
        } => {
            let m = parse_map(map)?;
            let cfg = orbit_config()?;
            let report = if point.trim() == "one" {
                orbit_of_one_with(&m, *max_iter, &cfg)?
            } else {
                orbit_of_point_with(&m, &parse_elem(point)?, *max_iter, &cfg)?
            };
            json!({ "map": m.descriptor(), "orbit": to_json(&report) })
        }
        Command::Partition { map, rank } => {
            let m = parse_map(map)?;
            if *rank == 0 {
                return Err(usage("--rank must be positive"));
            }
            json!({ "map": m.descriptor(), "partition": to_json(&altbase::density::refine(&m, *rank)) })
        }
        Command::Density {
            map,
            method,
            max_rank,
            p,
            q,
            k,
            csv,
        } => {
            let m = parse_map(map)?;
            let mut body = Map::new();
            let f = match method {
                Method::Dk10 => {
                    let r = dk10_density(&m, *max_rank)?;
                    body.insert("exact".into(), json!(r.exact));
                    body.insert("tail_bound".into(), to_json(&r.tail));
                    body.insert("mode".into(), to_json(&r.mode));
                    r.density
                }
                Method::Solve => {
                    body.insert("exact".into(), json!(true));
                    solve_density_exact(&m)?
                }
                Method::Closed => {
                    let (p, q, k) = match (p, q, k) {
                        (Some(p), Some(q), Some(k)) => (*p, *q, *k),
                        (None, None, None) => closed_form_params(&m)?,
                        _ => return Err(usage("--p, --q and --k go together")),
                    };
                    body.insert("params".into(), json!({ "p": p, "q": q, "k": k }));
                    body.insert("exact".into(), json!(true));
                    closed_form_density(p, q, k)?
                }
                Method::Rp => {
                    let [beta] = m.factors() else {
                        return Err(usage("--method rp needs a single base"));
                    };
                    let (f, exact) = renyi_parry_density(beta, *max_rank)?;
                    body.insert("exact".into(), json!(exact));
                    f
                }
            };
            body.insert("invariant".into(), json!(is_invariant_density(&m, &f)?));
            body.insert("density".into(), to_json(&f));
            if let Some(path) = csv {
                body.insert("csv".into(), write_exact_csv(path, &f)?);
            }
            body.insert("map".into(), json!(m.descriptor()));
            Value::Object(body)
        }
        Command::Compare { pair, pair2 } => {
            let (b1, n) = parse_pair(pair)?;
            let (b2, m) = parse_pair(pair2)?;
            let closed = decide_coincidence_closed_form(&b1, n, &b2, m)?;
            let check = match decide_coincidence_exact(&b1, n, &b2, m) {
                Ok(v) => json!({
                    "agrees": v.equal == closed.equal,
                    "verdict": to_json(&v),
                }),
                Err(e) => {
                    json!({ "agrees": Value::Null, "error": { "code": e.code(), "message": e.to_string() } })
                }
            };
            let mut v = to_json(&closed);
            v["exact_check"] = check;
            v
        }
        Command::Search {
            pmax,
            denmax,
            nmax,
            jobs,
        } => {
            let found = with_pool(*jobs, || coincidence_search(*pmax, *denmax, *nmax))??;
            json!({
                "count": found.len(),
                "all_predicted": found.iter().all(CoincidentPair::matches_prediction),
                "coincidences": to_json(&found),
            })
        }
        Command::Simulate {
            map,
            iters,
            bins,
            seed,
            burn_in,
            x0,
            csv,
            jobs,
        } => {
            let m = parse_map(map)?;
            let cfg = BirkhoffConfig {
                x0: *x0,
                iterations: *iters,
                bins: *bins,
                burn_in: *burn_in,
                seed: *seed,
            };
            let h = with_pool(*jobs, || birkhoff_histogram(&m, &cfg))??;
            histogram_output(&m, &h, csv.as_deref())?
        }
        Command::Ulam {
            map,
            cells,
            power_iters,
            csv,
        } => {
            let m = parse_map(map)?;
            let h = ulam_density(&m, *cells, *power_iters)?;
            histogram_output(&m, &h, csv.as_deref())?
        }
    };
    out["schema"] = json!(1);
    out["command"] = json!(std::env::args().skip(1).collect::<Vec<_>>());
    Ok(out)
}

fn histogram_output(m: &PiecewiseAffineMap, h: &Histogram, csv: Option<&str>) -> Out {
    let mut v = json!({
        "map": m.descriptor(),
        "histogram": { "approximate": true, "value": to_json(h) },
    });
    if let Ok(f) = solve_density_exact(m) {
        v["l1_to_exact"] = approx(l1_distance(h, &f));
    }
    if let Some(path) = csv {
        v["csv"] = write_hist_csv(path, h)?;
    }
    Ok(v)
}
