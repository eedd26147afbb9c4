//! Dyadic averaging of kernels on `T¹ × T¹` and the averaged-diagonal trace.
//!
//! `A_j K(x, y)` is the mean of `K` over the product of the level-`j` dyadic
//! arcs containing `x` and `y`. The limit of `A_j K` on the diagonal ignores
//! what the kernel does on the (measure zero) diagonal itself.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{KernelSpec, TruncatedKernel};
use crate::torus_fourier::GridFunction;

pub const MAX_LEVEL: u32 = 24;

/// Half-open arcs `[2π i / 2^j, 2π (i+1) / 2^j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DyadicPartition {
    pub level: u32,
}

impl DyadicPartition {
    pub fn new(level: u32) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::InvalidParameter(format!("level {level} exceeds {MAX_LEVEL}")));
        }
        Ok(Self { level })
    }

    pub fn cells(&self) -> u64 {
        1 << self.level
    }

    pub fn width(&self) -> f64 {
        2.0 * PI / self.cells() as f64
    }

    pub fn cell_of(&self, x: f64) -> u64 {
        let t = x.rem_euclid(2.0 * PI) / (2.0 * PI);
        ((t * self.cells() as f64).floor() as u64).min(self.cells() - 1)
    }

    pub fn bounds(&self, cell: u64) -> (f64, f64) {
        let w = self.width();
        (cell as f64 * w, (cell + 1) as f64 * w)
    }

    pub fn center(&self, cell: u64) -> f64 {
        (cell as f64 + 0.5) * self.width()
    }
}

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// Mean of `e^{iks}` over an arc of width `h` centred at `c`.
fn character_mean(k: i64, c: f64, h: f64) -> Complex64 {
    let k = k as f64;
    Complex64::from_polar(sinc(k * h / 2.0), k * c)
}

/// Cell-pair averages of a kernel given by its Fourier series.
#[derive(Debug, Clone)]
pub struct Averager {
    kernel: TruncatedKernel,
}

impl Averager {
    /// `series_cutoff` may be omitted only for closed-form families.
    pub fn new(spec: &KernelSpec, series_cutoff: Option<usize>) -> Result<Self> {
        if spec.dim != 1 {
            return Err(Error::UnsupportedDim(spec.dim));
        }
        Ok(Self {
            kernel: TruncatedKernel::new(spec, series_cutoff)?,
        })
    }

    /// `A_j K(x, y)`, integrating each Fourier mode exactly.
    pub fn average(&self, level: u32, x: f64, y: f64) -> Result<Complex64> {
        let part = DyadicPartition::new(level)?;
        let (cx, cy) = (part.center(part.cell_of(x)), part.center(part.cell_of(y)));
        let h = part.width();
        let c = self.kernel.coefficients();
        let lat = c.lattice();
        Ok(c.entries()
            .iter()
            .map(|e| {
                e.value * character_mean(lat.index(e.row)[0], cx, h) * character_mean(lat.index(e.col)[0], cy, h)
            })
            .sum())
    }
}

pub fn average_kernel(spec: &KernelSpec, level: u32, x: f64, y: f64, series_cutoff: Option<usize>) -> Result<Complex64> {
    Averager::new(spec, series_cutoff)?.average(level, x, y)
}

const GAUSS_POINTS: usize = 32;

/// Nodes and weights of the 32-point Gauss–Legendre rule on `[−1, 1]`.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GAUSS_POINTS;
        (0..n)
            .map(|i| {
                let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let k = k as f64;
                        (p0, p1) = (p1, ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k);
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

/// `A_j K(x, y)` for a kernel known only pointwise, by a 32-point
/// Gauss–Legendre rule per cell and axis.
pub fn average_pointwise(kernel: impl Fn(f64, f64) -> Complex64, level: u32, x: f64, y: f64) -> Result<Complex64> {
    let part = DyadicPartition::new(level)?;
    let (ax, _) = part.bounds(part.cell_of(x));
    let (ay, _) = part.bounds(part.cell_of(y));
    let half = part.width() / 2.0;
    let rule = gauss_legendre();
    let mut total = Complex64::default();
    for &(u, wu) in rule {
        let xs = ax + half * (u + 1.0);
        for &(v, wv) in rule {
            total += wu * wv * kernel(xs, ay + half * (v + 1.0));
        }
    }
    let value = total / 4.0;
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter("cell quadrature produced a non-finite value".into()))
    }
}

/// `K̃(x, x) ≈ A_{j_max} K(x, x)` at the `G` grid nodes `2π i / G`.
pub fn averaged_diagonal(spec: &KernelSpec, j_max: u32, resolution: usize, series_cutoff: Option<usize>) -> Result<GridFunction> {
    DyadicPartition::new(j_max)?;
    let avg = Averager::new(spec, series_cutoff)?;
    let h = 2.0 * PI / resolution.max(1) as f64;
    let samples = (0..resolution)
        .into_par_iter()
        .map(|i| avg.average(j_max, i as f64 * h, i as f64 * h))
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(1, resolution, samples)
}

/// `∫ K̃(x, x) dx` by the rectangle rule on the averaged diagonal.
pub fn trace_averaged(spec: &KernelSpec, j_max: u32, resolution: usize, series_cutoff: Option<usize>) -> Result<Complex64> {
    let diag = averaged_diagonal(spec, j_max, resolution, series_cutoff)?;
    Ok(diag.samples.iter().sum::<Complex64>() / resolution as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{diagonal_evaluate, Mode};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn table() -> KernelSpec {
        KernelSpec::conv_table(1, vec![(vec![0], c(1.0)), (vec![1], c(0.5)), (vec![-1], c(0.5))]).unwrap()
    }

    #[test]
    fn partition_tiles_and_refines() {
        let p = DyadicPartition::new(3).unwrap();
        assert_eq!(p.cells(), 8);
        assert_eq!(p.bounds(0).0, 0.0);
        assert!((p.bounds(7).1 - 2.0 * PI).abs() < 1e-15);
        for i in 0..p.cells() - 1 {
            assert_eq!(p.bounds(i).1, p.bounds(i + 1).0);
        }
        let fine = DyadicPartition::new(4).unwrap();
        for x in (0..100).map(|i| i as f64 * 0.0628) {
            assert_eq!(fine.cell_of(x) / 2, p.cell_of(x));
        }
        assert_eq!(p.cell_of(2.0 * PI), 0);
        assert_eq!(p.cell_of(-1e-12), 7);
        assert!(DyadicPartition::new(25).is_err());
    }

    #[test]
    fn gauss_rule_is_exact_on_polynomials() {
        let rule = gauss_legendre();
        assert_eq!(rule.len(), 32);
        let w: f64 = rule.iter().map(|r| r.1).sum();
        assert!((w - 2.0).abs() < 1e-14);
        let m: f64 = rule.iter().map(|r| r.1 * r.0.powi(62)).sum();
        assert!((m - 2.0 / 63.0).abs() < 1e-14);
    }

    #[test]
    fn average_examples() {
        let one = KernelSpec::rank_one(1);
        for (j, x, y) in [(0, 0.3, 5.0), (7, 1.0, 1.0), (24, 6.0, 0.1)] {
            assert!((average_kernel(&one, j, x, y, None).unwrap() - c(1.0)).norm() < 1e-15);
        }
        let bad = KernelSpec::diag_corrupt(one, c(5.0)).unwrap();
        assert!((average_kernel(&bad, 5, 2.0, 2.0, None).unwrap() - c(1.0)).norm() < 1e-15);

        let char1 = KernelSpec::mode_sum(1, vec![Mode { k: vec![1], l: vec![0], value: c(1.0) }]).unwrap();
        let part = DyadicPartition::new(3).unwrap();
        let x = 2.0;
        let xc = part.center(part.cell_of(x));
        let h = part.width();
        let expect = Complex64::from_polar((h / 2.0).sin() / (h / 2.0), xc);
        assert!((average_kernel(&char1, 3, x, 0.4, None).unwrap() - expect).norm() < 1e-15);
    }

    #[test]
    fn gauss_fallback_matches_closed_form() {
        let spec = KernelSpec::conv_power(1, 2.0).unwrap();
        let kernel = TruncatedKernel::new(&spec, Some(12)).unwrap();
        let avg = Averager::new(&spec, Some(12)).unwrap();
        for (j, x, y) in [(2, 0.5, 4.0), (4, 1.1, 1.1), (6, 3.0, 0.2)] {
            let q = average_pointwise(|a, b| kernel.evaluate(&[a], &[b]), j, x, y).unwrap();
            assert!((q - avg.average(j, x, y).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn tower_property() {
        let spec = table();
        let avg = Averager::new(&spec, None).unwrap();
        let kernel = TruncatedKernel::new(&spec, None).unwrap();
        for j in [0u32, 3, 10] {
            let part = DyadicPartition::new(j).unwrap();
            let (x, y) = (1.3, 4.4);
            let (x0, _) = part.bounds(part.cell_of(x));
            let (y0, _) = part.bounds(part.cell_of(y));
            let q = part.width() / 4.0;
            let mut exact = Complex64::default();
            let mut quad = Complex64::default();
            for a in [q, 3.0 * q] {
                for b in [q, 3.0 * q] {
                    exact += avg.average(j + 1, x0 + a, y0 + b).unwrap() / 4.0;
                    quad += average_pointwise(|s, t| kernel.evaluate(&[s], &[t]), j + 1, x0 + a, y0 + b).unwrap() / 4.0;
                }
            }
            let direct = avg.average(j, x, y).unwrap();
            assert!((exact - direct).norm() < 1e-14);
            let direct_q = average_pointwise(|s, t| kernel.evaluate(&[s], &[t]), j, x, y).unwrap();
            assert!((quad - direct_q).norm() < 1e-10);
        }
    }

    #[test]
    fn averaged_diagonal_examples() {
        let one = KernelSpec::rank_one(1);
        let d = averaged_diagonal(&one, 10, 16, None).unwrap();
        assert!(d.samples.iter().all(|v| (v - c(1.0)).norm() < 1e-15));
        let bad = KernelSpec::diag_corrupt(one.clone(), c(5.0)).unwrap();
        let d2 = averaged_diagonal(&bad, 10, 16, None).unwrap();
        assert_eq!(d.samples, d2.samples);

        let d = averaged_diagonal(&table(), 20, 32, None).unwrap();
        assert!(d.samples.iter().all(|v| (v - c(2.0)).norm() < 1e-6));
    }

    #[test]
    fn averaged_trace_examples() {
        assert!((trace_averaged(&KernelSpec::rank_one(1), 24, 8, None).unwrap() - c(1.0)).norm() < 1e-15);
        let bad = KernelSpec::diag_corrupt(table(), c(99.0)).unwrap();
        assert!((trace_averaged(&bad, 24, 16, None).unwrap() - c(2.0)).norm() < 1e-12);
        assert!(matches!(
            trace_averaged(&KernelSpec::conv_power(1, 2.0).unwrap(), 10, 8, None),
            Err(Error::MissingSeriesCutoff(_))
        ));
        assert!(averaged_diagonal(&KernelSpec::rank_one(2), 4, 4, None).is_err());
    }

    #[test]
    fn diagonal_error_decays_with_level() {
        let spec = KernelSpec::conv_power(1, 3.0).unwrap();
        let n = Some(64);
        let x = 0.9;
        let exact = diagonal_evaluate(&spec, &[x], n).unwrap();
        let avg = Averager::new(&spec, n).unwrap();
        let points: Vec<(f64, f64)> = (4..=12)
            .map(|j| (j as f64, (avg.average(j, x, x).unwrap() - exact).norm().log2()))
            .collect();
        let (slope, _) = crate::powers::fit_line(&points).unwrap();
        assert!(-slope >= 0.9, "decay per level {}", -slope);
    }
}
