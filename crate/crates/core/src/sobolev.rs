//! Mixed and isotropic Sobolev norms of kernels, computed from their double
//! Fourier coefficients with Laplacian weights `1 + |k|²`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{coefficients, CoefficientMatrix, KernelFamily, KernelSpec};
use crate::powers::{classify, lattice_ladder_sums, lattice_ladder_sums_multi, Classification, Ladder, Truncation};

/// Regularity `μ₁` in `x` and `μ₂` in `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevOrder {
    pub mu1: f64,
    pub mu2: f64,
}

impl SobolevOrder {
    pub fn new(mu1: f64, mu2: f64) -> Result<Self> {
        if !(mu1 >= 0.0 && mu2 >= 0.0) || !mu1.is_finite() || !mu2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Sobolev orders must be finite and nonnegative, got ({mu1}, {mu2})"
            )));
        }
        Ok(Self { mu1, mu2 })
    }

    pub fn total(&self) -> f64 {
        self.mu1 + self.mu2
    }
}

fn weighted_norm(c: &CoefficientMatrix, weight: impl Fn(f64, f64) -> f64) -> f64 {
    let lat = c.lattice();
    c.entries()
        .iter()
        .map(|e| weight(lat.eigenvalue(e.row), lat.eigenvalue(e.col)) * e.value.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `(Σ (1+|k|²)^{μ₁} (1+|l|²)^{μ₂} |Ĥ[k,l]|²)^{1/2}`
pub fn mixed_norm(c: &CoefficientMatrix, ord: SobolevOrder) -> f64 {
    weighted_norm(c, |a, b| (1.0 + a).powf(ord.mu1) * (1.0 + b).powf(ord.mu2))
}

/// `(Σ (1+|k|²+|l|²)^{μ} |Ĥ[k,l]|²)^{1/2}`
pub fn isotropic_norm(c: &CoefficientMatrix, mu: f64) -> f64 {
    weighted_norm(c, |a, b| (1.0 + a + b).powf(mu))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightChain {
    pub lo: f64,
    pub mid: f64,
    pub hi: f64,
}

impl WeightChain {
    pub fn holds(&self) -> bool {
        self.lo <= self.mid && self.mid <= self.hi
    }
}

/// Pointwise comparison of isotropic and mixed weights at eigenvalues `a`, `b`.
pub fn inclusion_weight_check(a: f64, b: f64, ord: SobolevOrder) -> WeightChain {
    WeightChain {
        lo: (1.0 + a + b).powf(ord.mu1.min(ord.mu2)),
        mid: (1.0 + a).powf(ord.mu1) * (1.0 + b).powf(ord.mu2),
        hi: (1.0 + a + b).powf(ord.total()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticEquivalence {
    /// Isotropic norm with weights from `(I − Δ)²`.
    pub norm_e1: f64,
    /// Isotropic norm with weights from `I + Δ²`.
    pub norm_e2: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Compares the weights `(1+t)^μ` and `(1+t²)^{μ/2}`, `t = |k|² + |l|²`, over
/// the nonzero entries of `c`.
pub fn elliptic_equivalence_check(c: &CoefficientMatrix, mu: f64) -> Result<EllipticEquivalence> {
    if !(mu >= 0.0) {
        return Err(Error::InvalidParameter(format!("μ must be nonnegative, got {mu}")));
    }
    let w1 = |t: f64| (1.0 + t).powf(mu);
    let w2 = |t: f64| (1.0 + t * t).powf(mu / 2.0);
    let lat = c.lattice();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for e in c.entries() {
        let t = lat.eigenvalue(e.row) + lat.eigenvalue(e.col);
        let r = w1(t) / w2(t);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if c.entries().is_empty() {
        (lo, hi) = (1.0, 1.0);
    }
    Ok(EllipticEquivalence {
        norm_e1: weighted_norm(c, |a, b| w1(a + b)),
        norm_e2: weighted_norm(c, |a, b| w2(a + b)),
        min_ratio: lo,
        max_ratio: hi,
    })
}

/// Classifies finiteness of the squared mixed norm at infinite cutoff from
/// its values on a ladder of lattice cutoffs.
///
/// Convolution families with closed-form symbols are summed directly over the
/// anti-diagonal; other families rebuild the coefficient matrix per cutoff, so
/// the ladder must stay small for dense families.
pub fn mixed_norm_finiteness(spec: &KernelSpec, ord: SobolevOrder, ladder: Ladder) -> Result<Classification> {
    let cutoffs = ladder.cutoffs();
    let mu = ord.total();
    let sums = match &spec.family {
        KernelFamily::ConvPower { a } => {
            let a = *a;
            lattice_ladder_sums(spec.dim, &cutoffs, Truncation::Box, |k1, k2| {
                let m = (k1 + k2) as f64;
                (1.0 + m).powf(mu) * (1.0 + m.sqrt()).powf(-2.0 * a)
            })?
        }
        KernelFamily::Carleman { .. } => {
            let mut acc = 0.0;
            let mut k = 0u64;
            cutoffs
                .iter()
                .map(|&n| {
                    while k < n {
                        k += 1;
                        let c = crate::kernels::carleman_coefficient(k as usize);
                        acc += (1.0 + (k * k) as f64).powf(mu) * c.norm_sqr();
                    }
                    acc
                })
                .collect()
        }
        _ => cutoffs
            .iter()
            .map(|&n| Ok(mixed_norm(&coefficients(spec, n as usize)?, ord).powi(2)))
            .collect::<Result<Vec<f64>>>()?,
    };
    Ok(classify(&cutoffs, &sums))
}

/// Evidence that `Σ |K̂(k,l)| < ∞` follows from `K ∈ H^ν` for the model
/// coefficients `K̂(k,l) = (1+k²+l²)^{−s}` on `T¹ × T¹`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummabilityEvidence {
    pub s: f64,
    pub nu: f64,
    /// `Σ |K̂(k,l)|`
    pub absolute_sum: Classification,
    /// `Σ (1+k²+l²)^ν |K̂(k,l)|²`
    pub sobolev_norm_sq: Classification,
}

impl SummabilityEvidence {
    /// A convergent Sobolev verdict must come with a convergent summability
    /// verdict.
    pub fn implication_holds(&self) -> bool {
        use crate::powers::Verdict::Convergent;
        self.sobolev_norm_sq.verdict != Convergent || self.absolute_sum.verdict == Convergent
    }
}

pub fn coefficient_summability_check(s: f64, nu: f64, ladder: Ladder) -> Result<SummabilityEvidence> {
    Ok(coefficient_summability_sweep(s, &[nu], ladder)?.remove(0))
}

/// [`coefficient_summability_check`] for several `ν` at one `s`, in a single
/// lattice scan.
pub fn coefficient_summability_sweep(s: f64, nus: &[f64], ladder: Ladder) -> Result<Vec<SummabilityEvidence>> {
    if !(s > 0.0) || nus.iter().any(|&nu| !(nu >= 0.0)) {
        return Err(Error::InvalidParameter(format!("need s > 0 and ν ≥ 0, got s = {s}, ν = {nus:?}")));
    }
    let cutoffs = ladder.cutoffs();
    let sums = lattice_ladder_sums_multi(2, &cutoffs, Truncation::Box, nus.len() + 1, |a, b, out| {
        let log = (1.0 + (a + b) as f64).ln();
        out[0] = (-s * log).exp();
        for (slot, nu) in out[1..].iter_mut().zip(nus) {
            *slot = ((nu - 2.0 * s) * log).exp();
        }
    })?;
    let absolute_sum = classify(&cutoffs, &sums[0]);
    Ok(nus
        .iter()
        .zip(&sums[1..])
        .map(|(&nu, sob)| SummabilityEvidence {
            s,
            nu,
            absolute_sum: absolute_sum.clone(),
            sobolev_norm_sq: classify(&cutoffs, sob),
        })
        .collect())
}
