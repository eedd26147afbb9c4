//! Operator matrices of kernels, singular values, Schatten norms, traces, and
//! the membership prediction for mixed Sobolev kernels.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{CoefficientMatrix, KernelSpec, TruncatedKernel};
use crate::powers::{classify, fit_line, Classification, Ladder};

/// Singular values below this fraction of the largest are reported as zero.
pub const SVD_RELATIVE_TOL: f64 = 1e-13;

/// Square complex matrix stored as sorted triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    size: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl OperatorMatrix {
    pub fn new(size: usize, mut entries: Vec<(usize, usize, Complex64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = entries.iter().find(|&&(r, c, _)| r >= size || c >= size) {
            return Err(Error::InconsistentDims(format!("entry ({r}, {c}) outside a {size}×{size} matrix")));
        }
        if entries.iter().any(|(_, _, v)| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        entries.retain(|e| e.2 != Complex64::default());
        entries.sort_by_key(|e| (e.0, e.1));
        if entries.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidParameter("duplicate matrix entry".into()));
        }
        Ok(Self { size, entries })
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InconsistentDims(format!("{}×{} matrix is not square", m.nrows(), m.ncols())));
        }
        let entries = (0..m.nrows())
            .flat_map(|r| (0..m.ncols()).map(move |c| (r, c, m[(r, c)])))
            .collect();
        Self::new(m.nrows(), entries)
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        Self::new(values.len(), values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
            .expect("diagonal entries are in range")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries
            .binary_search_by_key(&(r, c), |e| (e.0, e.1))
            .map(|i| self.entries[i].2)
            .unwrap_or_default()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.size, self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect())
            .expect("adjoint of a valid matrix")
    }

    /// `P M Pᵀ` for the permutation sending basis vector `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.size {
            return Err(Error::InconsistentDims("permutation length".into()));
        }
        Self::new(self.size, self.entries.iter().map(|&(r, c, v)| (perm[r], perm[c], v)).collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.2.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `M[k, m] = Ĥ[k, −m]`, the matrix of the integral operator in the character
/// basis under the normalized measure.
pub fn operator_matrix(c: &CoefficientMatrix) -> OperatorMatrix {
    let lat = c.lattice();
    let entries = c.entries().iter().map(|e| (e.row, lat.negate(e.col), e.value)).collect();
    OperatorMatrix::new(lat.len(), entries).expect("coefficient positions lie in the lattice")
}

/// Nonincreasing singular values, one per basis vector.
///
/// The matrix is split into independent blocks (connected components of its
/// row/column incidence graph) and each block gets a dense SVD.
pub fn singular_values(m: &OperatorMatrix) -> Result<Vec<f64>> {
    let n = m.size;
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(r, c, _) in &m.entries {
        let (a, b) = (find(&mut parent, r), find(&mut parent, n + c));
        if a != b {
            parent[a] = b;
        }
    }
    let mut blocks: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>, Vec<usize>)> = Default::default();
    for (i, &(r, _, _)) in m.entries.iter().enumerate() {
        let root = find(&mut parent, r);
        blocks.entry(root).or_default().2.push(i);
    }
    for x in 0..2 * n {
        let root = find(&mut parent, x);
        if let Some(b) = blocks.get_mut(&root) {
            if x < n {
                b.0.push(x);
            } else {
                b.1.push(x - n);
            }
        }
    }
    let mut values = Vec::with_capacity(n);
    for (rows, cols, idx) in blocks.values() {
        if idx.len() == 1 {
            values.push(m.entries[idx[0]].2.norm());
            continue;
        }
        let mut dense = DMatrix::zeros(rows.len(), cols.len());
        for &i in idx {
            let (r, c, v) = m.entries[i];
            let ri = rows.binary_search(&r).expect("row in block");
            let ci = cols.binary_search(&c).expect("col in block");
            dense[(ri, ci)] = v;
        }
        values.extend(svd_values(dense)?);
    }
    values.resize(n, 0.0);
    Ok(finish(values))
}

/// Nonincreasing singular values of a dense (possibly rectangular) matrix.
pub fn singular_values_dense(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    Ok(finish(svd_values(m.clone())?))
}

fn svd_values(m: DMatrix<Complex64>) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::SvdFailed);
    }
    let svd = m.try_svd(false, false, f64::EPSILON, 0).ok_or(Error::SvdFailed)?;
    Ok(svd.singular_values.iter().copied().collect())
}

fn finish(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(|a, b| b.total_cmp(a));
    let cut = values.first().copied().unwrap_or(0.0) * SVD_RELATIVE_TOL;
    for v in &mut values {
        if *v < cut {
            *v = 0.0;
        }
    }
    values
}

/// `(Σ s_j^p)^{1/p}`; `p = ∞` gives the largest value.
pub fn schatten_norm(s: &[f64], p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("Schatten index must be positive, got {p}")));
    }
    let top = s.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0.0);
    }
    if p.is_infinite() {
        return Ok(top);
    }
    let sum: f64 = s.iter().map(|&v| (v / top).powf(p)).sum();
    Ok(top * sum.powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    pub beta: f64,
    pub halfwidth: f64,
}

/// Decay exponent `β` in `s_j ≍ j^{−β}`, fitted by least squares on
/// `ln s_j` against `ln j` over `j ∈ [J/4, J]`, where `J` counts the positive
/// values. The halfwidth is two standard errors.
pub fn tail_exponent(s: &[f64]) -> Result<TailFit> {
    let mut pos: Vec<f64> = s.iter().copied().filter(|&v| v > 0.0).collect();
    if pos.len() < 16 {
        return Err(Error::TooFewValues { needed: 16, got: pos.len() });
    }
    pos.sort_by(|a, b| b.total_cmp(a));
    let j = pos.len();
    let points: Vec<(f64, f64)> = ((j / 4).max(1)..=j)
        .map(|i| ((i as f64).ln(), pos[i - 1].ln()))
        .collect();
    let (slope, se) = fit_line(&points).expect("at least four distinct abscissae");
    Ok(TailFit {
        beta: -slope,
        halfwidth: 2.0 * se,
    })
}

/// Partial sums of `s_j^p` (sorted nonincreasing) at a quadrupling ladder of
/// indices ending at the number of positive values.
pub fn observed_membership(s: &[f64], p: f64) -> Result<Classification> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("Schatten index must be positive, got {p}")));
    }
    let mut pos: Vec<f64> = s.iter().copied().filter(|&v| v > 0.0).collect();
    pos.sort_by(|a, b| b.total_cmp(a));
    if pos.is_empty() {
        return Ok(classify(&[0, 0, 0, 0], &[0.0; 4]));
    }
    let cutoffs = Ladder::down_from(pos.len() as u64, 16).cutoffs();
    let mut acc = 0.0;
    let mut j = 0usize;
    let sums: Vec<f64> = cutoffs
        .iter()
        .map(|&c| {
            while j < c as usize {
                acc += pos[j].powf(p);
                j += 1;
            }
            acc
        })
        .collect();
    Ok(classify(&cutoffs, &sums))
}

/// `Σ_k M[k, k]`
pub fn trace_eigensum(m: &OperatorMatrix) -> Complex64 {
    m.entries.iter().filter(|e| e.0 == e.1).map(|e| e.2).sum()
}

/// `Gⁿ`-point rectangle rule for `∫ K(x, x) dx`, evaluating the kernel
/// pointwise on the diagonal.
pub fn trace_quadrature(spec: &KernelSpec, resolution: usize, series_cutoff: Option<usize>) -> Result<Complex64> {
    if resolution == 0 {
        return Err(Error::InvalidParameter("quadrature resolution must be positive".into()));
    }
    let kernel = TruncatedKernel::new(spec, series_cutoff)?;
    let h = 2.0 * std::f64::consts::PI / resolution as f64;
    let total: Complex64 = match spec.dim {
        1 => (0..resolution).map(|i| kernel.diagonal_evaluate(&[i as f64 * h])).sum(),
        2 => (0..resolution)
            .flat_map(|i| (0..resolution).map(move |j| [i as f64 * h, j as f64 * h]))
            .map(|x| kernel.diagonal_evaluate(&x))
            .sum(),
        d => return Err(Error::UnsupportedDim(d)),
    };
    Ok(total / (resolution as f64).powi(spec.dim as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PVerdict {
    Guaranteed,
    NotCovered,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipPrediction {
    pub n: usize,
    pub mu1: f64,
    pub mu2: f64,
    /// `r* = 2n / (n + 2(μ₁ + μ₂))`
    pub threshold: f64,
    pub verdicts: Vec<(f64, PVerdict)>,
    /// `μ₁ + μ₂ > n/2`, when asked for.
    pub trace_class: Option<bool>,
}

pub fn membership_threshold(n: usize, mu1: f64, mu2: f64) -> f64 {
    let n = n as f64;
    2.0 * n / (n + 2.0 * (mu1 + mu2))
}

/// Schatten indices covered by the mixed Sobolev regularity `(μ₁, μ₂)` of a
/// kernel on `Tⁿ × Tⁿ`: every `p > r*`, and every `p ≥ 2` since the kernel is
/// square integrable.
pub fn predict_membership(n: usize, mu1: f64, mu2: f64, ps: &[f64], trace_class_query: bool) -> Result<MembershipPrediction> {
    if !(1..=2).contains(&n) {
        return Err(Error::UnsupportedDim(n));
    }
    if !(mu1 >= 0.0 && mu2 >= 0.0) {
        return Err(Error::InvalidParameter(format!("orders must be nonnegative, got ({mu1}, {mu2})")));
    }
    let threshold = membership_threshold(n, mu1, mu2);
    let verdicts = ps
        .iter()
        .map(|&p| {
            let v = if p > threshold || p >= 2.0 {
                PVerdict::Guaranteed
            } else {
                PVerdict::NotCovered
            };
            (p, v)
        })
        .collect();
    Ok(MembershipPrediction {
        n,
        mu1,
        mu2,
        threshold,
        verdicts,
        trace_class: trace_class_query.then_some(mu1 + mu2 > n as f64 / 2.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSummary {
    pub cutoff: usize,
    pub singular_values: Vec<f64>,
    pub trace_eigensum: Complex64,
    pub tail_exponent: Option<TailFit>,
}

impl SpectralSummary {
    pub fn from_coefficients(c: &CoefficientMatrix) -> Result<Self> {
        let m = operator_matrix(c);
        let singular_values = singular_values(&m)?;
        Ok(Self {
            cutoff: c.lattice().cutoff(),
            tail_exponent: tail_exponent(&singular_values).ok(),
            trace_eigensum: trace_eigensum(&m),
            singular_values,
        })
    }

    pub fn schatten(&self, p: f64) -> Result<f64> {
        schatten_norm(&self.singular_values, p)
    }
}

fn dense_sv(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    singular_values_dense(m)
}

/// `(‖M‖_{S₁}, Σ |M_ij|)`; the first never exceeds the second.
pub fn lem11_check(m: &DMatrix<Complex64>) -> Result<(f64, f64)> {
    let nuclear = dense_sv(m)?.iter().sum();
    let l1 = m.iter().map(|v| v.norm()).sum();
    Ok((nuclear, l1))
}

/// `(‖AB‖_{S_r}, ‖A‖_{S_p} ‖B‖_{S_q})` with `1/r = 1/p + 1/q`.
pub fn multiplication_check(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, p: f64, q: f64) -> Result<(f64, f64)> {
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::InvalidParameter(format!("need p, q > 0, got {p}, {q}")));
    }
    if a.ncols() != b.nrows() {
        return Err(Error::InconsistentDims(format!(
            "cannot multiply {}×{} by {}×{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let r = 1.0 / (1.0 / p + 1.0 / q);
    let lhs = schatten_norm(&dense_sv(&(a * b))?, r)?;
    let rhs = schatten_norm(&dense_sv(a)?, p)? * schatten_norm(&dense_sv(b)?, q)?;
    Ok((lhs, rhs))
}

/// Whether `‖s‖_{ℓ^q} ≤ ‖s‖_{ℓ^p}` for `p < q`.
pub fn nesting_check(s: &[f64], p: f64, q: f64) -> Result<bool> {
    if !(0.0 < p && p < q) {
        return Err(Error::InvalidParameter(format!("need 0 < p < q, got {p}, {q}")));
    }
    Ok(schatten_norm(s, q)? <= schatten_norm(s, p)? * (1.0 + 1e-14))
}

/// `(‖T‖_{S₁}, Σ |κ̂(k)|)` for the multiplier with symbol `kappa_hat`.
pub fn invariant_s1_equals_symbol_l1(kappa_hat: &[Complex64]) -> Result<(f64, f64)> {
    let s = singular_values(&OperatorMatrix::diagonal(kappa_hat))?;
    Ok((s.iter().sum(), kappa_hat.iter().map(|v| v.norm()).sum()))
}
