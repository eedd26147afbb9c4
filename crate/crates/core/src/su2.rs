//! Left-invariant operators on `SU(2)` and `SO(3)` through their symbols.
//!
//! On the representation of spin `ℓ` the symbol of a left-invariant operator
//! built from `X = iJ_x`, `Y = iJ_y`, `Z = iJ_z` is diagonal in the `J_z`
//! basis, and each eigenvalue occurs `2ℓ + 1` times in `L²(G)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::powers::{classify, Classification, Ladder};

/// Unitary dual point of spin `ℓ = two_ell / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct DualPoint {
    pub two_ell: u32,
}

impl DualPoint {
    pub fn from_ell(ell: f64) -> Result<Self> {
        let t = 2.0 * ell;
        if !(t >= 0.0) || t.fract() != 0.0 || t > u32::MAX as f64 {
            return Err(Error::InvalidParameter(format!("spin must be a nonnegative half-integer, got {ell}")));
        }
        Ok(Self { two_ell: t as u32 })
    }

    pub fn ell(&self) -> f64 {
        self.two_ell as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_ell as usize + 1
    }

    pub fn laplace_eig(&self) -> f64 {
        let l = self.ell();
        l * (l + 1.0)
    }

    /// `m = −ℓ, −ℓ+1, …, ℓ`
    pub fn weights(&self) -> impl Iterator<Item = f64> {
        let l = self.ell();
        (0..=self.two_ell).map(move |i| i as f64 - l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Su2,
    So3,
}

impl Group {
    pub fn contains(&self, p: DualPoint) -> bool {
        match self {
            Group::Su2 => true,
            Group::So3 => p.two_ell % 2 == 0,
        }
    }

    /// Dual points with `ℓ ≤ l_max`.
    pub fn dual(&self, l_max: u32) -> impl Iterator<Item = DualPoint> + '_ {
        (0..=2 * l_max).map(|two_ell| DualPoint { two_ell }).filter(|p| self.contains(*p))
    }
}

/// Realization of `iZ`: `−J_z` (default) or `+J_z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZSign {
    #[default]
    MinusJz,
    PlusJz,
}

impl ZSign {
    fn factor(self) -> f64 {
        match self {
            ZSign::MinusJz => -1.0,
            ZSign::PlusJz => 1.0,
        }
    }
}

/// Eigenvalues of `−(X² + Y²)`: `ℓ(ℓ+1) − m²`.
pub fn sublaplacian_symbol(p: DualPoint) -> Vec<f64> {
    let l = p.laplace_eig();
    p.weights().map(|m| l - m * m).collect()
}

/// Eigenvalues of `H_γ = iZ − γ(X² + Y²)`: `γ(ℓ(ℓ+1) − m²) ∓ m`.
pub fn hgamma_symbol(gamma: f64, p: DualPoint, sign: ZSign) -> Vec<f64> {
    let l = p.laplace_eig();
    p.weights().map(|m| gamma * (l - m * m) + sign.factor() * m).collect()
}

/// Sorted eigenvalues of `±J_z + γ(J_x² + J_y²)` built from ladder matrices.
pub fn hgamma_matrix_oracle(gamma: f64, p: DualPoint, sign: ZSign) -> Result<Vec<f64>> {
    if p.two_ell > 100 {
        return Err(Error::InvalidParameter(format!("oracle limited to ℓ ≤ 50, got {}", p.ell())));
    }
    let d = p.dim();
    let l = p.ell();
    let ms: Vec<f64> = p.weights().collect();
    let ladder = |m: f64, up: f64| (l * (l + 1.0) - m * (m + up)).max(0.0).sqrt();
    let mut jp = DMatrix::<Complex64>::zeros(d, d);
    let mut jz = DMatrix::<Complex64>::zeros(d, d);
    for (i, &m) in ms.iter().enumerate() {
        jz[(i, i)] = m.into();
        if i + 1 < d {
            // J₊ |m⟩ = c |m+1⟩
            jp[(i + 1, i)] = ladder(m, 1.0).into();
        }
    }
    let jm = jp.adjoint();
    let half = Complex64::new(0.5, 0.0);
    let jx = (&jp + &jm) * half;
    let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
    let h = &jz * Complex64::from(sign.factor()) + (&jx * &jx + &jy * &jy) * Complex64::from(gamma);
    let eig = h.try_symmetric_eigen(1e-15, 0).ok_or(Error::EigenFailed)?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Left-invariant operator families analysed by [`invariant_power_schatten`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum SymbolFamily {
    Laplacian,
    Sublaplacian,
    Hgamma { gamma: f64, sign: ZSign },
}

impl SymbolFamily {
    pub fn symbol(&self, p: DualPoint) -> Vec<f64> {
        match *self {
            SymbolFamily::Laplacian => vec![p.laplace_eig(); p.dim()],
            SymbolFamily::Sublaplacian => sublaplacian_symbol(p),
            SymbolFamily::Hgamma { gamma, sign } => hgamma_symbol(gamma, p, sign),
        }
    }

    /// Power-sum exponent beyond which `(I + A)^{−α/2} ∈ S_p`, i.e. the
    /// condition `αp > threshold`.
    pub fn critical_alpha_p(&self) -> f64 {
        match self {
            SymbolFamily::Laplacian => 3.0,
            _ => 4.0,
        }
    }
}

/// Default ladder on `ℓ`: `L_max / 16, …, L_max`.
pub fn default_ladder(l_max: u32) -> Ladder {
    Ladder::new(l_max as u64, 2, 5)
}

/// Classifies `Σ_ℓ (2ℓ+1) Σ_m |1 + σ(ℓ, m)|^{−αp/2}` on a ladder of spin
/// cutoffs.
pub fn invariant_power_schatten(
    family: SymbolFamily,
    alpha: f64,
    p: f64,
    group: Group,
    ladder: Ladder,
) -> Result<Classification> {
    if !(alpha >= 0.0 && p > 0.0) {
        return Err(Error::InvalidParameter(format!("need α ≥ 0 and p > 0, got α = {alpha}, p = {p}")));
    }
    if let SymbolFamily::Hgamma { gamma, .. } = family {
        if !(gamma > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "I + H_γ is only known to be globally hypoelliptic for γ > 1, got γ = {gamma}"
            )));
        }
    }
    let cutoffs = ladder.cutoffs();
    let q = alpha * p / 2.0;
    let top = *cutoffs.last().unwrap_or(&0) as u32;
    let shells: Vec<(u32, f64)> = group
        .dual(top)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|pt| {
            let d = pt.dim() as f64;
            let s: f64 = family.symbol(pt).iter().map(|&v| (1.0 + v).abs().powf(-q)).sum();
            (pt.two_ell, d * s)
        })
        .collect();
    let mut acc = 0.0;
    let mut it = shells.iter().peekable();
    let sums: Vec<f64> = cutoffs
        .iter()
        .map(|&c| {
            while let Some(&&(two_ell, v)) = it.peek() {
                if two_ell as u64 > 2 * c {
                    break;
                }
                acc += v;
                it.next();
            }
            acc
        })
        .collect();
    Ok(classify(&cutoffs, &sums))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sharper {
    Refined,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupThresholds {
    /// `2n / (n + μ₁ + μ₂)`, valid on any compact Lie group of dimension `n`.
    pub general: f64,
    /// `4 / (2 + μ₁ + μ₂)` on `SU(2)` and `SO(3)`.
    pub refined: f64,
    pub sharper: Sharper,
}

pub fn kernel_membership_threshold_group(n: usize, mu1: f64, mu2: f64) -> Result<GroupThresholds> {
    if n != 3 {
        return Err(Error::UnsupportedDim(n));
    }
    if !(mu1 >= 0.0 && mu2 >= 0.0) {
        return Err(Error::InvalidParameter(format!("orders must be nonnegative, got ({mu1}, {mu2})")));
    }
    let mu = mu1 + mu2;
    let general = 2.0 * n as f64 / (n as f64 + mu);
    let refined = 4.0 / (2.0 + mu);
    Ok(GroupThresholds {
        general,
        refined,
        sharper: if refined < general { Sharper::Refined } else { Sharper::Equal },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hypoellipticity {
    pub c: f64,
    pub l_max: u64,
    pub pass: bool,
    /// `(ℓ, m)` with `c + ℓ(ℓ+1) − m(m+1) = 0`.
    pub witness: Option<(u64, i64)>,
    /// Whether the witness lies beyond the scanned range.
    pub witness_beyond_scan: bool,
}

/// Whether `0 ∉ {c + ℓ(ℓ+1) − m(m+1) : ℓ ≥ 1, |m| ≤ ℓ}`.
///
/// The scan visits `ℓ = 1, …, L_max` and `m = ℓ, ℓ−1, …, −ℓ`. The values
/// `ℓ(ℓ+1) − m(m+1)` are exactly the even numbers `0, 2, 4, …` (with `2t`
/// reached at `ℓ = t, m = t − 1`), which settles every `ℓ > L_max`.
pub fn hypoellipticity_check(c: f64, l_max: u64) -> Result<Hypoellipticity> {
    if l_max < 1 {
        return Err(Error::InvalidParameter("L_max must be at least 1".into()));
    }
    if !c.is_finite() {
        return Err(Error::InvalidParameter(format!("shift must be finite, got {c}")));
    }
    let mut out = Hypoellipticity {
        c,
        l_max,
        pass: true,
        witness: None,
        witness_beyond_scan: false,
    };
    let target = -c;
    if target.fract() != 0.0 || target < 0.0 || target % 2.0 != 0.0 {
        return Ok(out);
    }
    out.pass = false;
    for ell in 1..=l_max as i64 {
        for m in (-ell..=ell).rev() {
            if (ell * (ell + 1) - m * (m + 1)) as f64 == target {
                out.witness = Some((ell as u64, m));
                return Ok(out);
            }
        }
    }
    let t = (target / 2.0) as u64;
    out.witness = Some(if t == 0 { (1, 1) } else { (t, t as i64 - 1) });
    out.witness_beyond_scan = true;
    Ok(out)
}
