//! Floating-point cross-checks: Birkhoff histograms along random orbits and
//! Ulam discretizations of the transfer operator.
//!
//! Both are deterministic given their inputs. Birkhoff sampling runs a fixed
//! number of chunks, each with its own ChaCha8 stream, and sums them in chunk
//! order, so the result does not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::FieldElem;
use crate::density::PiecewiseConstantFn;
use crate::error::{Error, Result};
use crate::maps::PiecewiseAffineMap;

/// Independent trajectories per Birkhoff run.
pub const CHUNKS: u64 = 64;
/// Size of the uniform perturbation added after every step.
pub const NOISE: f64 = 1.0 / (1u64 << 40) as f64;

/// Float rendering of a map: branch left ends and the common slope.
#[derive(Clone, Debug)]
pub struct FloatMap {
    los: Vec<f64>,
    slope: f64,
}

impl FloatMap {
    pub fn new(map: &PiecewiseAffineMap) -> Self {
        FloatMap {
            los: map.branches().iter().map(|b| b.lo.to_f64()).collect(),
            slope: map.slope().to_f64(),
        }
    }

    /// Image of `x` in `[0, 1)`; ties at a rendered breakpoint go right.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.los.partition_point(|&lo| lo <= x).max(1) - 1;
        let y = self.slope * (x - self.los[i]);
        y.clamp(0.0, 1.0 - f64::EPSILON)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub bins: usize,
    /// Per-bin tallies; empty for Ulam estimates.
    pub counts: Vec<u64>,
    pub samples: u64,
    /// Density heights; they integrate to 1 over `[0, 1)`.
    pub heights: Vec<f64>,
    /// Standard error of each height, from the spread across chunks.
    pub std_errors: Vec<f64>,
}

impl Histogram {
    pub fn bin_edges(&self) -> Vec<f64> {
        (0..=self.bins)
            .map(|i| i as f64 / self.bins as f64)
            .collect()
    }

    /// Rows `bin_lo,bin_hi,height`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_lo,bin_hi,height\n");
        let e = self.bin_edges();
        for (i, h) in self.heights.iter().enumerate() {
            s.push_str(&format!("{},{},{}\n", e[i], e[i + 1], h));
        }
        s
    }

    /// Largest standard error over all bins.
    pub fn max_std_error(&self) -> f64 {
        self.std_errors.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BirkhoffConfig {
    /// Start point; when absent each chunk starts at a uniform random point.
    pub x0: Option<f64>,
    pub iterations: u64,
    pub bins: usize,
    /// Steps discarded at the start of each chunk.
    pub burn_in: u64,
    pub seed: u64,
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Histogram of the orbit, with a perturbation of size [`NOISE`] per step so
/// that float orbits of maps such as `x ↦ 2x` do not collapse onto 0.
pub fn birkhoff_histogram(map: &PiecewiseAffineMap, cfg: &BirkhoffConfig) -> Result<Histogram> {
    if cfg.bins < 2 {
        return Err(Error::InvalidArgument("bins must be at least 2".into()));
    }
    if cfg.iterations <= cfg.burn_in {
        return Err(Error::InvalidArgument(
            "iterations must exceed burn_in".into(),
        ));
    }
    let fm = FloatMap::new(map);
    let per_chunk = cfg.iterations / CHUNKS;
    let extra = cfg.iterations % CHUNKS;
    let nb = cfg.bins;
    let chunks: Vec<Vec<u64>> = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(cfg.seed, c);
            let mut x = match cfg.x0 {
                Some(x0) => (x0 + rng.random::<f64>() * NOISE).rem_euclid(1.0),
                None => rng.random::<f64>(),
            };
            let n = per_chunk + u64::from(c < extra);
            let burn = cfg.burn_in.min(n);
            let mut counts = vec![0u64; nb];
            for step in 0..n {
                x = fm.eval(x) + rng.random::<f64>() * NOISE;
                if x >= 1.0 {
                    x -= 1.0;
                }
                if step >= burn {
                    counts[((x * nb as f64) as usize).min(nb - 1)] += 1;
                }
            }
            counts
        })
        .collect();
    let mut counts = vec![0u64; nb];
    for ch in &chunks {
        for (t, c) in counts.iter_mut().zip(ch) {
            *t += c;
        }
    }
    let samples: u64 = counts.iter().sum();
    let scale = nb as f64 / samples.max(1) as f64;
    let heights: Vec<f64> = counts.iter().map(|&c| c as f64 * scale).collect();
    let std_errors = (0..nb)
        .map(|b| {
            let per: Vec<f64> = chunks
                .iter()
                .map(|ch| {
                    let tot: u64 = ch.iter().sum();
                    ch[b] as f64 * nb as f64 / tot.max(1) as f64
                })
                .collect();
            let k = per.len() as f64;
            let mean = per.iter().sum::<f64>() / k;
            let var = per.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        })
        .collect();
    Ok(Histogram {
        bins: nb,
        counts,
        samples,
        heights,
        std_errors,
    })
}

/// Sparse row-stochastic Ulam matrix: row `i` lists `(j, P_ij)`.
pub fn ulam_matrix(map: &PiecewiseAffineMap, cells: usize) -> Result<Vec<Vec<(usize, f64)>>> {
    if cells < 2 {
        return Err(Error::InvalidArgument("cells must be at least 2".into()));
    }
    let n = FieldElem::from_int(cells as i64);
    let inv_s = map.slope().recip()?;
    let nf = cells as f64;
    let interior = 1.0 / (nf * map.slope().to_f64());
    Ok((0..cells)
        .into_par_iter()
        .map(|i| {
            let lo = FieldElem::ratio(i as i64, cells as i64);
            let hi = FieldElem::ratio(i as i64 + 1, cells as i64);
            let mut row: Vec<(usize, f64)> = Vec::new();
            for b in map.branches() {
                if b.hi <= lo || b.lo >= hi {
                    continue;
                }
                let a = if b.lo > lo { b.lo.clone() } else { lo.clone() };
                let z = if b.hi < hi { b.hi.clone() } else { hi.clone() };
                // The piece [a, z) maps onto [y0, y1).
                let y0 = b.apply(&a);
                let y1 = b.apply(&z);
                let j0 = (&y0 * &n).floor();
                let j1 = (&y1 * &n).ceil();
                let j0u: usize = j0.try_into().expect("cell index");
                let j1u: usize = j1.try_into().expect("cell index");
                for j in j0u..j1u.min(cells) {
                    let c_lo = FieldElem::ratio(j as i64, cells as i64);
                    let c_hi = FieldElem::ratio(j as i64 + 1, cells as i64);
                    let w = if c_lo >= y0 && c_hi <= y1 {
                        interior
                    } else {
                        let l = if c_lo > y0 { c_lo } else { y0.clone() };
                        let r = if c_hi < y1 { c_hi } else { y1.clone() };
                        (&(&r - &l) * &inv_s).to_f64()
                    };
                    if w > 0.0 {
                        row.push((j, w * nf));
                    }
                }
            }
            row
        })
        .collect())
}

/// Stationary vector of the Ulam matrix by power iteration, as a histogram.
pub fn ulam_density(
    map: &PiecewiseAffineMap,
    cells: usize,
    power_iters: usize,
) -> Result<Histogram> {
    let rows = ulam_matrix(map, cells)?;
    let mut pi = vec![1.0 / cells as f64; cells];
    let mut next = vec![0.0; cells];
    for _ in 0..power_iters {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (i, row) in rows.iter().enumerate() {
            let w = pi[i];
            for &(j, p) in row {
                next[j] += w * p;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if diff < 1e-12 {
            let heights = pi.iter().map(|v| v * cells as f64).collect();
            return Ok(Histogram {
                bins: cells,
                counts: Vec::new(),
                samples: 0,
                heights,
                std_errors: vec![0.0; cells],
            });
        }
    }
    Err(Error::NonConvergence(power_iters))
}

/// A step function on `[0, 1)` with float breakpoints and values.
pub trait StepFunction {
    fn steps(&self) -> (Vec<f64>, Vec<f64>);
}

impl StepFunction for PiecewiseConstantFn {
    fn steps(&self) -> (Vec<f64>, Vec<f64>) {
        self.to_f64_steps()
    }
}

impl StepFunction for Histogram {
    fn steps(&self) -> (Vec<f64>, Vec<f64>) {
        (self.bin_edges(), self.heights.clone())
    }
}

/// `∫ |f - g|` over the common refinement of both partitions.
pub fn l1_distance(f: &impl StepFunction, g: &impl StepFunction) -> f64 {
    let (fb, fv) = f.steps();
    let (gb, gv) = g.steps();
    let mut cuts: Vec<f64> = fb.iter().chain(gb.iter()).cloned().collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let at = |b: &[f64], v: &[f64], x: f64| {
        v[(b.partition_point(|&t| t <= x).max(1) - 1).min(v.len() - 1)]
    };
    cuts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (at(&fb, &fv, mid) - at(&gb, &gv, mid)).abs() * (w[1] - w[0])
        })
        .sum()
}
