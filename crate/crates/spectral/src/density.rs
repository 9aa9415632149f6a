//! Spectral density functions `F_p(λ)` by sampling the symbol over the torus,
//! and Novikov–Shubin exponents from their low-λ tails.

use std::f64::consts::PI;

use l2inv_core::ns_calculus::NSValue;
use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::AbelianCWComplex;
use crate::SpectralError;

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// λ at which `F̂` is read off as the `F(0⁺)` extrapolation.
pub const ZERO_PLUS: f64 = 1e-9;

/// A point must clear `b̂` by this many samples' worth of mass to be fitted.
pub const MIN_EXCESS_COUNTS: f64 = 50.0;

pub const MIN_WINDOW_POINTS: usize = 5;

/// Half-window slopes further apart than this flag a liminf/limsup gap.
pub const LIMIT_GAP_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub degree: usize,
    pub rank: usize,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `F̂(ZERO_PLUS)`.
    pub betti: f64,
    pub samples: u64,
    pub seed: u64,
    pub sampler: String,
    pub exponent: Option<NsEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NsEstimate {
    Exponent {
        value: f64,
        ci_low: f64,
        ci_high: f64,
        window: (f64, f64),
        points: usize,
        half_slopes: (f64, f64),
        limit_property_suspect: bool,
    },
    /// `F̂ - b̂` vanishes on the decade below the first resolvable point.
    InfinityPlusCandidate { gap_at_least: f64 },
}

impl NsEstimate {
    /// Rounded to three decimals as an exact value.
    pub fn ns_value(&self) -> NSValue {
        match self {
            NsEstimate::Exponent { value, .. } => NSValue::finite((value * 1000.0).round() as i64, 1000),
            NsEstimate::InfinityPlusCandidate { .. } => NSValue::InfinityPlus,
        }
    }
}

/// Log-spaced from `lo` to `hi` inclusive with about `per_decade` points per
/// decade.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    (0..=n).map(|k| lo * (hi / lo).powf(k as f64 / n as f64)).collect()
}

/// Grid from `1e-8` up to just above the norm bound of `Δ_p`, 20 per decade.
pub fn default_grid(c: &AbelianCWComplex, p: usize) -> Vec<f64> {
    let top = (c.norm_bound(p) * (1.0 + 1e-9)).max(1e-6) + 1e-12;
    log_grid(1e-8, top, 20)
}

/// Pool-adjacent-violators projection onto nondecreasing sequences.
pub fn isotonic(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a <= b {
                break;
            }
            blocks.pop();
            let last = blocks.last_mut().unwrap();
            *last = ((a * na as f64 + b * nb as f64) / (na + nb) as f64, na + nb);
        }
    }
    blocks.into_iter().flat_map(|(v, n)| std::iter::repeat_n(v, n)).collect()
}

/// Additive recurrence on the torus with the generalized golden ratio of the
/// dimension, shifted by a seeded offset. Point k depends only on (seed, k).
struct Kronecker {
    alpha: Vec<f64>,
    shift: Vec<f64>,
}

impl Kronecker {
    fn new(dim: usize, seed: u64) -> Self {
        let mut phi = 2.0f64;
        for _ in 0..64 {
            phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
        }
        let alpha = (1..=dim).map(|j| (1.0 / phi.powi(j as i32)).fract()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.gen::<f64>()).collect();
        Kronecker { alpha, shift }
    }

    fn point(&self, k: u64, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            // split k to keep the product exact enough for large k
            let hi = (k >> 20) as f64 * ((1u64 << 20) as f64 * self.alpha[j]).fract();
            let lo = (k & ((1 << 20) - 1)) as f64 * self.alpha[j];
            *o = 2.0 * PI * (self.shift[j] + hi + lo).rem_euclid(1.0);
        }
    }
}

fn eigenvalues(c: &AbelianCWComplex, p: usize, theta: &[f64]) -> Vec<f64> {
    let m = c.symbol_at(p, theta).expect("degree and θ checked by caller");
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re];
    }
    SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
}

/// Histogram over grid cells: `hist[i]` counts eigenvalues in `(grid[i-1], grid[i]]`.
fn count_range(c: &AbelianCWComplex, p: usize, grid: &[f64], sampler: &Kronecker, range: std::ops::Range<u64>) -> Vec<u64> {
    let mut hist = vec![0u64; grid.len() + 1];
    let mut theta = vec![0.0; c.deck_rank];
    for k in range {
        sampler.point(k, &mut theta);
        for ev in eigenvalues(c, p, &theta) {
            hist[grid.partition_point(|g| *g < ev)] += 1;
        }
    }
    hist
}

/// Estimates `F_p` on `grid`. Counts are integers summed per grid point, so
/// the result depends on `(samples, seed, grid)` only, not on `workers`.
pub fn estimate_density(
    c: &AbelianCWComplex,
    p: usize,
    grid: &[f64],
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<DensityEstimate, SpectralError> {
    if p > c.top_degree() {
        return Err(SpectralError::DegreeOutOfRange { degree: p, top: c.top_degree() });
    }
    if samples == 0 {
        return Err(SpectralError::InvalidSamples);
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] < 0.0 {
        return Err(SpectralError::InvalidGrid);
    }
    let mut full_grid: Vec<f64> = grid.to_vec();
    let zero_at = full_grid.partition_point(|g| *g < ZERO_PLUS);
    let insert_zero = full_grid.get(zero_at) != Some(&ZERO_PLUS);
    if insert_zero {
        full_grid.insert(zero_at, ZERO_PLUS);
    }
    let rank = c.rank(p);
    let mut hist = vec![0u64; full_grid.len() + 1];
    if rank > 0 {
        let sampler = Kronecker::new(c.deck_rank, seed);
        let workers = workers.clamp(1, samples as usize);
        let chunk = samples.div_ceil(workers as u64);
        let parts: Vec<Vec<u64>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers as u64)
                .map(|w| {
                    let (sampler, g) = (&sampler, &full_grid);
                    let range = (w * chunk).min(samples)..((w + 1) * chunk).min(samples);
                    s.spawn(move || count_range(c, p, g, sampler, range))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("sampling worker panicked")).collect()
        });
        for part in parts {
            for (h, x) in hist.iter_mut().zip(part) {
                *h += x;
            }
        }
    }
    let mut running = 0u64;
    let mut raw = Vec::with_capacity(full_grid.len());
    for h in &hist[..full_grid.len()] {
        running += h;
        raw.push(running as f64 / samples as f64);
    }
    let values = isotonic(&raw);
    let betti = values[zero_at];
    if insert_zero {
        full_grid.remove(zero_at);
    }
    let values: Vec<f64> =
        values.iter().enumerate().filter(|(i, _)| !insert_zero || *i != zero_at).map(|(_, v)| *v).collect();
    let mut est = DensityEstimate {
        degree: p,
        rank,
        grid: full_grid,
        values,
        betti,
        samples,
        seed,
        sampler: "kronecker".into(),
        exponent: None,
    };
    est.exponent = estimate_ns(&est).ok();
    Ok(est)
}

fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    let se = if x.len() > 2 { (ssr / (n - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    (slope, se)
}

/// Slope of `log(F̂ - b̂)` against `log λ` over the first decade of
/// resolvable grid points.
pub fn estimate_ns(e: &DensityEstimate) -> Result<NsEstimate, SpectralError> {
    let floor = MIN_EXCESS_COUNTS / e.samples as f64;
    let excess: Vec<f64> = e.values.iter().map(|v| v - e.betti).collect();
    let Some(first) = (0..e.grid.len()).find(|&i| e.grid[i] > ZERO_PLUS && excess[i] >= floor) else {
        if excess.iter().all(|x| *x <= 0.0) {
            return Ok(NsEstimate::InfinityPlusCandidate { gap_at_least: *e.grid.last().unwrap_or(&0.0) });
        }
        return Err(SpectralError::WindowTooSmall { usable: 0, needed: MIN_WINDOW_POINTS, floor, lambda_range: None });
    };
    let lam0 = e.grid[first];
    let below: Vec<usize> = (0..first).filter(|&i| e.grid[i] >= lam0 / 10.0 && e.grid[i] > ZERO_PLUS).collect();
    if !below.is_empty() && below.iter().all(|&i| excess[i] <= 0.0) {
        let gap = e.grid[..first].iter().zip(&excess).filter(|(_, x)| **x <= 0.0).map(|(g, _)| *g).fold(0.0, f64::max);
        return Ok(NsEstimate::InfinityPlusCandidate { gap_at_least: gap });
    }
    let window: Vec<usize> =
        (first..e.grid.len()).filter(|&i| e.grid[i] <= lam0 * 10.0 && excess[i] >= floor).collect();
    if window.len() < MIN_WINDOW_POINTS {
        return Err(SpectralError::WindowTooSmall {
            usable: window.len(),
            needed: MIN_WINDOW_POINTS,
            floor,
            lambda_range: Some((lam0, lam0 * 10.0)),
        });
    }
    let x: Vec<f64> = window.iter().map(|&i| e.grid[i].ln()).collect();
    let y: Vec<f64> = window.iter().map(|&i| excess[i].ln()).collect();
    let (slope, se) = ols(&x, &y);
    let mid = x.len() / 2;
    let (s1, _) = ols(&x[..mid.max(2)], &y[..mid.max(2)]);
    let (s2, _) = ols(&x[mid.min(x.len() - 2)..], &y[mid.min(x.len() - 2)..]);
    Ok(NsEstimate::Exponent {
        value: slope,
        ci_low: slope - 1.96 * se,
        ci_high: slope + 1.96 * se,
        window: (e.grid[window[0]], e.grid[*window.last().unwrap()]),
        points: window.len(),
        half_slopes: (s1, s2),
        limit_property_suspect: (s1 - s2).abs() > LIMIT_GAP_TOLERANCE,
    })
}
