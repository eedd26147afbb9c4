//! Model eigenvalue sequences, Weyl-type bounds, and the geometric-cutoff
//! convergence classifier used throughout the crate.
//!
//! No finite computation decides whether a series converges. The classifier
//! looks at partial sums `F(N₀), F(N₁), …` on a geometric ladder of cutoffs and
//! at the ratios of consecutive increments `Δᵢ = F(Nᵢ) − F(Nᵢ₋₁)`. For a tail
//! behaving like `k^{−s}` the ratio tends to `factor^{1−s}`, which is below one
//! exactly when the series converges.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Increment ratios at or below this value count as convergent.
pub const CONVERGENT_RATIO: f64 = 0.9;
/// Increment ratios at or above this value count as divergent.
pub const DIVERGENT_RATIO: f64 = 0.95;
/// Number of trailing ratios that must agree.
pub const RATIO_WINDOW: usize = 3;

/// Geometric cutoffs `top / factor^{levels−1}, …, top / factor, top`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ladder {
    pub top: u64,
    pub factor: u64,
    pub levels: usize,
}

impl Ladder {
    pub const fn new(top: u64, factor: u64, levels: usize) -> Self {
        Self { top, factor, levels }
    }

    /// 64, 256, …, 65536.
    pub const TORUS_1D: Ladder = Ladder::new(65_536, 4, 6);
    /// 16, 64, …, 4096.
    pub const TORUS_2D: Ladder = Ladder::new(4_096, 4, 5);

    pub fn for_dim(dim: usize) -> Self {
        if dim == 1 {
            Self::TORUS_1D
        } else {
            Self::TORUS_2D
        }
    }

    /// Ladder ending at `top` with as many quadrupling steps as fit above `floor`.
    pub fn down_from(top: u64, floor: u64) -> Self {
        let mut levels = 1;
        let mut c = top;
        while c / 4 >= floor.max(1) && levels < 12 {
            c /= 4;
            levels += 1;
        }
        Self::new(top, 4, levels)
    }

    pub fn cutoffs(&self) -> Vec<u64> {
        let mut out: Vec<u64> = (0..self.levels as u32)
            .map(|i| self.top / self.factor.pow(i))
            .collect();
        out.reverse();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Convergent,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub cutoffs: Vec<u64>,
    pub partial_sums: Vec<f64>,
    /// `Δᵢ / Δᵢ₋₁` for every consecutive pair of increments.
    pub ratios: Vec<f64>,
    /// Least-squares slope of `ln F` against `ln N`.
    pub growth_exponent: f64,
}

/// Classifies a nondecreasing sequence of partial sums taken at `cutoffs`.
pub fn classify(cutoffs: &[u64], partial_sums: &[f64]) -> Classification {
    assert_eq!(cutoffs.len(), partial_sums.len());
    let increments: Vec<f64> = partial_sums.windows(2).map(|w| w[1] - w[0]).collect();
    let ratios: Vec<f64> = increments
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (a, b) if a == 0.0 && b == 0.0 => 0.0,
            (a, _) if a == 0.0 => f64::INFINITY,
            (a, b) => b / a,
        })
        .collect();
    let verdict = if ratios.len() < RATIO_WINDOW || partial_sums.iter().any(|v| !v.is_finite()) {
        Verdict::Inconclusive
    } else {
        let tail = &ratios[ratios.len() - RATIO_WINDOW..];
        if tail.iter().all(|&r| r <= CONVERGENT_RATIO) {
            Verdict::Convergent
        } else if tail.iter().all(|&r| r >= DIVERGENT_RATIO) {
            Verdict::Divergent
        } else {
            Verdict::Inconclusive
        }
    };
    let points: Vec<(f64, f64)> = cutoffs
        .iter()
        .zip(partial_sums)
        .filter(|(&n, &f)| n > 0 && f > 0.0)
        .map(|(&n, &f)| ((n as f64).ln(), f.ln()))
        .collect();
    Classification {
        verdict,
        cutoffs: cutoffs.to_vec(),
        partial_sums: partial_sums.to_vec(),
        ratios,
        growth_exponent: fit_line(&points).map(|(slope, _)| slope).unwrap_or(0.0),
    }
}

/// Ordinary least squares `y = slope·x + intercept`; returns `(slope, stderr)`.
pub fn fit_line(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let stderr = if points.len() > 2 {
        let rss: f64 = points
            .iter()
            .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
            .sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some((slope, stderr))
}

/// Index `β` of regular variation of partial sums `F(N) ≈ N^β L(N)` with
/// `L(N) = (ln N)^γ`.
///
/// Block-average terms `(F(Nᵢ) − F(Nᵢ₋₁)) / (Nᵢ − Nᵢ₋₁)` are regressed on
/// `ln N` and `ln ln N` (at the block's geometric midpoint); the power part of
/// the term decay plus one is the index. Fitting the increments removes the
/// finite head of the sum, and the `ln ln N` regressor absorbs the logarithmic
/// factor that biases a plain log–log slope.
pub fn regular_variation_index(cutoffs: &[u64], partial_sums: &[f64]) -> Option<f64> {
    let rows: Vec<[f64; 3]> = cutoffs
        .windows(2)
        .zip(partial_sums.windows(2))
        .filter(|(n, f)| n[1] > n[0] && f[1] > f[0] && n[0] > 1)
        .map(|(n, f)| {
            let mean_term = (f[1] - f[0]) / (n[1] - n[0]) as f64;
            let mid = ((n[0] as f64) * (n[1] as f64)).sqrt().ln();
            [mid, mid.ln(), mean_term.ln()]
        })
        .collect();
    if rows.len() < 4 {
        return None;
    }
    let x = nalgebra::DMatrix::from_fn(rows.len(), 3, |i, j| match j {
        0 => rows[i][0],
        1 => rows[i][1],
        _ => 1.0,
    });
    let y = nalgebra::DVector::from_fn(rows.len(), |i, _| rows[i][2]);
    let coef = x.svd(true, true).solve(&y, 1e-12).ok()?;
    Some(1.0 + coef[0])
}

/// Lattice truncation shape for [`lattice_ladder_sums`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// `|k|₂ ≤ R`
    Ball,
    /// `|k|_∞ ≤ R`
    Box,
}

/// Partial sums of `Σ_{k ∈ ℤⁿ, k within R} w(k₁², k₂²)` for every ladder radius
/// `R`, in one exact integer scan of the largest region.
///
/// The weight sees squared coordinates, so it must be even in each one; for
/// `dim = 1` the second argument is always 0.
pub fn lattice_ladder_sums<W>(dim: usize, cutoffs: &[u64], shape: Truncation, weight: W) -> Result<Vec<f64>>
where
    W: Fn(u64, u64) -> f64 + Sync,
{
    let mut sums = lattice_ladder_sums_multi(dim, cutoffs, shape, 1, |a, b, out| out[0] = weight(a, b))?;
    Ok(sums.pop().unwrap_or_default())
}

/// [`lattice_ladder_sums`] for `count` weights sharing one scan; `weight`
/// fills one value per series and the result holds one ladder per series.
pub fn lattice_ladder_sums_multi<W>(
    dim: usize,
    cutoffs: &[u64],
    shape: Truncation,
    count: usize,
    weight: W,
) -> Result<Vec<Vec<f64>>>
where
    W: Fn(u64, u64, &mut [f64]) + Sync,
{
    if !(1..=2).contains(&dim) {
        return Err(Error::UnsupportedDim(dim));
    }
    if cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("ladder cutoffs must increase".into()));
    }
    let Some(&top) = cutoffs.last() else {
        return Ok(vec![Vec::new(); count]);
    };
    let levels = cutoffs.len();
    let sq: Vec<u64> = cutoffs.iter().map(|c| c * c).collect();
    let bucket_of = |k1: u64, k2: u64| -> usize {
        match shape {
            Truncation::Ball => sq.partition_point(|&c2| c2 < k1 * k1 + k2 * k2),
            Truncation::Box => cutoffs.partition_point(|&c| c < k1.max(k2)),
        }
    };
    // one row of the quadrant per k₁, flattened as buckets[level * count + series]
    let rows: Vec<Vec<f64>> = (0..=top)
        .into_par_iter()
        .map(|k1| {
            let mut buckets = vec![0.0; levels * count];
            let mut w = vec![0.0; count];
            let m1 = if k1 == 0 { 1.0 } else { 2.0 };
            let mut add = |k2: u64, mult: f64, w: &mut [f64]| {
                weight(k1 * k1, k2 * k2, w);
                let b = bucket_of(k1, k2) * count;
                for (slot, v) in buckets[b..b + count].iter_mut().zip(w.iter()) {
                    *slot += mult * v;
                }
            };
            if dim == 1 {
                add(0, m1, &mut w);
            } else {
                let k2_max = match shape {
                    Truncation::Ball => isqrt(top * top - k1 * k1),
                    Truncation::Box => top,
                };
                for k2 in 0..=k2_max {
                    add(k2, m1 * if k2 == 0 { 1.0 } else { 2.0 }, &mut w);
                }
            }
            buckets
        })
        .collect();
    let mut totals = vec![0.0; levels * count];
    for row in &rows {
        for (t, b) in totals.iter_mut().zip(row) {
            *t += b;
        }
    }
    Ok((0..count)
        .map(|j| {
            let mut acc = 0.0;
            (0..levels)
                .map(|i| {
                    acc += totals[i * count + j];
                    acc
                })
                .collect()
        })
        .collect())
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Shell {
    pub lambda: f64,
    pub multiplicity: u64,
}

/// Eigenvalues with multiplicities in nondecreasing order, complete up to
/// `lambda_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSequence {
    pub label: String,
    pub order: f64,
    pub dim: usize,
    pub lambda_max: f64,
    pub shells: Vec<Shell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// `−Δ` on `Tⁿ`, eigenvalues `|k|²`.
    TorusLaplacian { dim: usize },
    /// `Δ²` on `Tⁿ`, eigenvalues `|k|⁴`.
    TorusBilaplacian { dim: usize },
}

impl Model {
    pub fn dim(&self) -> usize {
        match *self {
            Model::TorusLaplacian { dim } | Model::TorusBilaplacian { dim } => dim,
        }
    }

    pub fn order(&self) -> f64 {
        match self {
            Model::TorusLaplacian { .. } => 2.0,
            Model::TorusBilaplacian { .. } => 4.0,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Model::TorusLaplacian { dim } => format!("torus-laplacian(T^{dim})"),
            Model::TorusBilaplacian { dim } => format!("torus-bilaplacian(T^{dim})"),
        }
    }

    /// Summability threshold `n / ν`.
    pub fn critical_exponent(&self) -> f64 {
        self.dim() as f64 / self.order()
    }

    /// Eigenvalue of the shell `|k|² = m`.
    pub fn lambda(&self, m: u64) -> f64 {
        match self {
            Model::TorusLaplacian { .. } => m as f64,
            Model::TorusBilaplacian { .. } => (m as f64) * (m as f64),
        }
    }

    fn check(&self) -> Result<()> {
        if (1..=2).contains(&self.dim()) {
            Ok(())
        } else {
            Err(Error::UnsupportedDim(self.dim()))
        }
    }

    /// All shells with `λ ≤ lambda_max`, by exhaustive lattice scan.
    pub fn sequence(&self, lambda_max: f64) -> Result<EigenSequence> {
        self.check()?;
        let m_max = match self {
            Model::TorusLaplacian { .. } => lambda_max.max(0.0).floor() as u64,
            Model::TorusBilaplacian { .. } => lambda_max.max(0.0).sqrt().floor() as u64,
        };
        let r = isqrt(m_max);
        let mut counts = vec![0u64; m_max as usize + 1];
        let r = r as i64;
        match self.dim() {
            1 => {
                for k in -r..=r {
                    counts[(k * k) as usize] += 1;
                }
            }
            _ => {
                for k1 in -r..=r {
                    for k2 in -r..=r {
                        let m = (k1 * k1 + k2 * k2) as u64;
                        if m <= m_max {
                            counts[m as usize] += 1;
                        }
                    }
                }
            }
        }
        let shells = counts
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > 0)
            .map(|(m, &d)| Shell {
                lambda: self.lambda(m as u64),
                multiplicity: d,
            })
            .collect();
        Ok(EigenSequence {
            label: self.label(),
            order: self.order(),
            dim: self.dim(),
            lambda_max,
            shells,
        })
    }

    /// The first `count` shells.
    pub fn first_shells(&self, count: usize) -> Result<EigenSequence> {
        let mut bound = 16.0;
        loop {
            let mut seq = self.sequence(bound)?;
            if seq.shells.len() >= count {
                seq.shells.truncate(count);
                seq.lambda_max = seq.shells.last().map(|s| s.lambda).unwrap_or(0.0);
                return Ok(seq);
            }
            bound *= 4.0;
        }
    }

    /// `Σ_{|k| ≤ R} w(λ_k)` for every ladder radius `R`.
    pub fn ladder_sums(&self, cutoffs: &[u64], weight: impl Fn(f64) -> f64 + Sync) -> Result<Vec<f64>> {
        self.check()?;
        lattice_ladder_sums(self.dim(), cutoffs, Truncation::Ball, |a, b| {
            weight(self.lambda(a + b))
        })
    }
}

pub fn torus_laplacian_sequence(dim: usize, lambda_max: f64) -> Result<EigenSequence> {
    Model::TorusLaplacian { dim }.sequence(lambda_max)
}

pub fn torus_bilaplacian_sequence(dim: usize, lambda_max: f64) -> Result<EigenSequence> {
    Model::TorusBilaplacian { dim }.sequence(lambda_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylCheck {
    /// `Σ_{λ_j ≤ Λ} d_j`
    pub count: u64,
    /// `max_{λ_j ≤ Λ} d_j / (1 + λ_j)^{n/ν}`
    pub bound_constant: f64,
}

pub fn weyl_check(seq: &EigenSequence, lambda: f64) -> Result<WeylCheck> {
    if lambda > seq.lambda_max {
        return Err(Error::InvalidParameter(format!(
            "Λ = {lambda} exceeds the generated range {}",
            seq.lambda_max
        )));
    }
    let exponent = seq.dim as f64 / seq.order;
    let mut count = 0;
    let mut bound_constant: f64 = 0.0;
    for s in seq.shells.iter().take_while(|s| s.lambda <= lambda) {
        count += s.multiplicity;
        bound_constant = bound_constant.max(s.multiplicity as f64 / (1.0 + s.lambda).powf(exponent));
    }
    Ok(WeylCheck { count, bound_constant })
}

/// Classifies `Σ d_j (1 + λ_j)^{−q}` on the given ladder of lattice radii.
pub fn summability_classify(model: Model, q: f64, ladder: Ladder) -> Result<Classification> {
    let cutoffs = ladder.cutoffs();
    let sums = model.ladder_sums(&cutoffs, |lambda| (1.0 + lambda).powf(-q))?;
    Ok(classify(&cutoffs, &sums))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSchatten {
    pub alpha: f64,
    pub p: f64,
    pub classification: Classification,
    /// `‖(I + E)^{−α}‖_{S_p}` at each ladder cutoff.
    pub partial_norms: Vec<f64>,
    /// `α > n / (pν)`
    pub analytic_member: bool,
}

/// Schatten membership of `(I + E)^{−α}`: its singular values are
/// `(1 + λ_j)^{−α}` with multiplicity `d_j`.
pub fn power_schatten(model: Model, alpha: f64, p: f64, ladder: Ladder) -> Result<PowerSchatten> {
    if !(alpha >= 0.0) || !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("need α ≥ 0 and p > 0, got α = {alpha}, p = {p}")));
    }
    let classification = summability_classify(model, alpha * p, ladder)?;
    let partial_norms = classification.partial_sums.iter().map(|s| s.powf(1.0 / p)).collect();
    Ok(PowerSchatten {
        alpha,
        p,
        analytic_member: alpha > model.critical_exponent() / p,
        classification,
        partial_norms,
    })
}

/// Exact value of `Σ d_j (1 + λ_j)^{−q}` where one is known: the circle
/// Laplacian with `q = 1` (`π coth π`) or `q = 2`.
pub fn closed_form_limit(model: Model, q: f64) -> Option<f64> {
    let pi = std::f64::consts::PI;
    let coth = 1.0 / pi.tanh();
    match model {
        Model::TorusLaplacian { dim: 1 } if q == 1.0 => Some(pi * coth),
        Model::TorusLaplacian { dim: 1 } if q == 2.0 => {
            let csch = 1.0 / pi.sinh();
            Some((pi * coth + pi * pi * csch * csch) / 2.0)
        }
        _ => None,
    }
}
