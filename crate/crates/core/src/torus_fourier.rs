//! Discrete Fourier analysis on `Tⁿ = [0, 2π)ⁿ`, `n ∈ {1, 2}`.
//!
//! The torus carries the normalised measure `dx / (2π)ⁿ`, so the characters
//! `e^{ik·x}` are orthonormal and Plancherel holds without constants.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Truncated set of Laplacian eigenfunction indices `{k ∈ ℤⁿ : |k|_∞ ≤ N}`.
///
/// Indices are stored in lexicographic order of `(k₁, …, kₙ)`, so position
/// arithmetic is closed form and the lattice is symmetric: the position of
/// `−k` is `len − 1 − pos(k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyLattice {
    dim: usize,
    cutoff: usize,
    indices: Vec<i64>,
}

pub fn build_lattice(dim: usize, cutoff: usize) -> Result<FrequencyLattice> {
    FrequencyLattice::new(dim, cutoff)
}

impl FrequencyLattice {
    pub fn new(dim: usize, cutoff: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::UnsupportedDim(dim));
        }
        let n = cutoff as i64;
        let mut indices = Vec::with_capacity(dim * (2 * cutoff + 1).pow(dim as u32));
        match dim {
            1 => indices.extend(-n..=n),
            _ => {
                for k1 in -n..=n {
                    for k2 in -n..=n {
                        indices.push(k1);
                        indices.push(k2);
                    }
                }
            }
        }
        Ok(Self { dim, cutoff, indices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Number of indices per axis, `2N + 1`.
    pub fn side(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn len(&self) -> usize {
        self.indices.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn index(&self, pos: usize) -> &[i64] {
        &self.indices[pos * self.dim..(pos + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[i64]> + '_ {
        self.indices.chunks_exact(self.dim)
    }

    pub fn position(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let n = self.cutoff as i64;
        let side = self.side();
        let mut pos = 0usize;
        for &ki in k {
            if ki.abs() > n {
                return None;
            }
            pos = pos * side + (ki + n) as usize;
        }
        Some(pos)
    }

    /// Position of `−k` given the position of `k`.
    pub fn negate(&self, pos: usize) -> usize {
        self.len() - 1 - pos
    }

    /// Integer Laplacian eigenvalue `|k|²`.
    pub fn eigenvalue_exact(&self, pos: usize) -> u64 {
        self.index(pos).iter().map(|&k| (k * k) as u64).sum()
    }

    pub fn eigenvalue(&self, pos: usize) -> f64 {
        self.eigenvalue_exact(pos) as f64
    }
}

/// Samples of a function on the uniform grid of `[0, 2π)ⁿ`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub dim: usize,
    pub resolution: usize,
    pub samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(dim: usize, resolution: usize, samples: Vec<Complex64>) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::UnsupportedDim(dim));
        }
        if samples.len() != resolution.pow(dim as u32) {
            return Err(Error::InconsistentDims(format!(
                "{} samples for a {}-dimensional grid of resolution {}",
                samples.len(),
                dim,
                resolution
            )));
        }
        Ok(Self {
            dim,
            resolution,
            samples,
        })
    }

    pub fn from_fn(dim: usize, resolution: usize, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::UnsupportedDim(dim));
        }
        let h = 2.0 * PI / resolution as f64;
        let samples = match dim {
            1 => (0..resolution).map(|i| f(&[i as f64 * h])).collect(),
            _ => (0..resolution * resolution)
                .map(|p| f(&[(p / resolution) as f64 * h, (p % resolution) as f64 * h]))
                .collect(),
        };
        Ok(Self {
            dim,
            resolution,
            samples,
        })
    }

    /// Grid coordinate of sample `i` along one axis.
    pub fn node(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.resolution as f64
    }

    /// `‖f‖²_{L²}` under the normalised measure, by the rectangle rule.
    pub fn l2_norm_sq(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            resolution: self.resolution,
            samples: self.samples.iter().map(|z| z.conj()).collect(),
        }
    }
}

fn fft_in_place(data: &mut [Complex64], dim: usize, g: usize, direction: FftDirection) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft(g, direction);
    match dim {
        1 => fft.process(data),
        _ => {
            // rows, then columns through a transpose buffer
            fft.process(data);
            let mut col = vec![Complex64::default(); g];
            for c in 0..g {
                for r in 0..g {
                    col[r] = data[r * g + c];
                }
                fft.process(&mut col);
                for r in 0..g {
                    data[r * g + c] = col[r];
                }
            }
        }
    }
}

fn check_pair(f_dim: usize, resolution: usize, lattice: &FrequencyLattice) -> Result<()> {
    if f_dim != lattice.dim() {
        return Err(Error::InconsistentDims(format!(
            "grid dimension {} vs lattice dimension {}",
            f_dim,
            lattice.dim()
        )));
    }
    if resolution < lattice.side() {
        return Err(Error::Aliasing {
            resolution,
            cutoff: lattice.cutoff(),
        });
    }
    Ok(())
}

fn wrap(k: i64, g: usize) -> usize {
    k.rem_euclid(g as i64) as usize
}

/// Fourier coefficients `f̂(k) = ∫ f(x) e^{−ik·x} dx/(2π)ⁿ` for every `k` in
/// the lattice, in lattice order. Exact for band-limited samples.
pub fn forward(f: &GridFunction, lattice: &FrequencyLattice) -> Result<Vec<Complex64>> {
    check_pair(f.dim, f.resolution, lattice)?;
    let g = f.resolution;
    let mut data = f.samples.clone();
    fft_in_place(&mut data, f.dim, g, FftDirection::Forward);
    let scale = 1.0 / data.len() as f64;
    Ok(lattice
        .iter()
        .map(|k| {
            let at = match f.dim {
                1 => wrap(k[0], g),
                _ => wrap(k[0], g) * g + wrap(k[1], g),
            };
            data[at] * scale
        })
        .collect())
}

/// Samples of `Σ_k c_k e^{ik·x}` on a grid of the given resolution.
pub fn inverse(
    coeffs: &[Complex64],
    lattice: &FrequencyLattice,
    resolution: usize,
) -> Result<GridFunction> {
    if coeffs.len() != lattice.len() {
        return Err(Error::InconsistentDims(format!(
            "{} coefficients for a lattice of {} indices",
            coeffs.len(),
            lattice.len()
        )));
    }
    check_pair(lattice.dim(), resolution, lattice)?;
    let g = resolution;
    let dim = lattice.dim();
    let mut data = vec![Complex64::default(); g.pow(dim as u32)];
    for (k, &c) in lattice.iter().zip(coeffs) {
        let at = match dim {
            1 => wrap(k[0], g),
            _ => wrap(k[0], g) * g + wrap(k[1], g),
        };
        data[at] += c;
    }
    fft_in_place(&mut data, dim, g, FftDirection::Inverse);
    GridFunction::new(dim, g, data)
}

/// Returns `(‖f‖², Σ|f̂(k)|²)`; the two agree for band-limited `f`.
pub fn plancherel_check(f: &GridFunction, lattice: &FrequencyLattice) -> Result<(f64, f64)> {
    let coeffs = forward(f, lattice)?;
    let rhs = coeffs.iter().map(|c| c.norm_sqr()).sum();
    Ok((f.l2_norm_sq(), rhs))
}
