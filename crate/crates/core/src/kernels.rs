//! Kernel families on `Tⁿ × Tⁿ` and their truncated double Fourier coefficients.
//!
//! A kernel is expanded as `K(x, y) = Σ_{k,l} Ĥ[k, l] e^{ik·x} e^{il·y}`; a
//! convolution kernel `κ(x − y)` therefore sits on the anti-diagonal
//! `Ĥ[k, −k] = κ̂(k)`.

use std::path::Path;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::torus_fourier::FrequencyLattice;

/// One explicit Fourier mode `value · e^{ik·x} e^{il·y}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mode {
    pub k: Vec<i64>,
    pub l: Vec<i64>,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    /// Finite sum of explicit modes.
    ModeSum { modes: Vec<Mode> },
    /// Convolution with `κ̂(k) = (1 + |k|)^{−a}`.
    ConvPower { a: f64 },
    /// Convolution with a finite symbol table.
    ConvTable { symbol: Vec<(Vec<i64>, Complex64)> },
    /// `Ĥ[k, l] = ε_{k,l} (1 + |k|)^{−a} (1 + |l|)^{−b}` with seeded signs.
    ProductRandom { a: f64, b: f64, seed: u64 },
    /// `K ≡ 1`.
    RankOne,
    /// Convolution with the Carleman-type witness of [`carleman_coefficients`].
    Carleman { p_demo: f64 },
    /// `base` with its diagonal overwritten by `value`.
    DiagCorrupt {
        base: Box<KernelSpec>,
        value: Complex64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSpec {
    pub dim: usize,
    #[serde(flatten)]
    pub family: KernelFamily,
}

impl KernelSpec {
    pub fn new(dim: usize, family: KernelFamily) -> Result<Self> {
        let spec = Self { dim, family };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rank_one(dim: usize) -> Self {
        Self {
            dim,
            family: KernelFamily::RankOne,
        }
    }

    pub fn conv_power(dim: usize, a: f64) -> Result<Self> {
        Self::new(dim, KernelFamily::ConvPower { a })
    }

    pub fn conv_table(dim: usize, symbol: Vec<(Vec<i64>, Complex64)>) -> Result<Self> {
        Self::new(dim, KernelFamily::ConvTable { symbol })
    }

    pub fn product_random(dim: usize, a: f64, b: f64, seed: u64) -> Result<Self> {
        Self::new(dim, KernelFamily::ProductRandom { a, b, seed })
    }

    pub fn mode_sum(dim: usize, modes: Vec<Mode>) -> Result<Self> {
        Self::new(dim, KernelFamily::ModeSum { modes })
    }

    pub fn carleman(p_demo: f64) -> Result<Self> {
        Self::new(1, KernelFamily::Carleman { p_demo })
    }

    pub fn diag_corrupt(base: KernelSpec, value: Complex64) -> Result<Self> {
        Self::new(
            base.dim,
            KernelFamily::DiagCorrupt {
                base: Box::new(base),
                value,
            },
        )
    }

    pub fn name(&self) -> &'static str {
        match &self.family {
            KernelFamily::ModeSum { .. } => "mode_sum",
            KernelFamily::ConvPower { .. } => "conv_power",
            KernelFamily::ConvTable { .. } => "conv_table",
            KernelFamily::ProductRandom { .. } => "product_random",
            KernelFamily::RankOne => "rank_one",
            KernelFamily::Carleman { .. } => "carleman",
            KernelFamily::DiagCorrupt { .. } => "diag_corrupt",
        }
    }

    /// Kernels of the form `κ(x − y)`.
    pub fn is_convolution(&self) -> bool {
        match &self.family {
            KernelFamily::ConvPower { .. }
            | KernelFamily::ConvTable { .. }
            | KernelFamily::Carleman { .. }
            | KernelFamily::RankOne => true,
            KernelFamily::DiagCorrupt { base, .. } => base.is_convolution(),
            _ => false,
        }
    }

    /// Strips any diagonal corruption.
    pub fn base(&self) -> &KernelSpec {
        match &self.family {
            KernelFamily::DiagCorrupt { base, .. } => base.base(),
            _ => self,
        }
    }

    /// Families whose kernel is a finite sum of modes and can be evaluated
    /// without choosing a series cutoff.
    pub fn has_closed_form(&self) -> bool {
        match &self.family {
            KernelFamily::ModeSum { .. } | KernelFamily::ConvTable { .. } | KernelFamily::RankOne => true,
            KernelFamily::DiagCorrupt { base, .. } => base.has_closed_form(),
            _ => false,
        }
    }

    /// Smallest cutoff containing every mode of a closed-form family.
    fn closed_form_cutoff(&self) -> usize {
        let max_abs = |v: &[i64]| v.iter().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0);
        match &self.family {
            KernelFamily::ModeSum { modes } => modes
                .iter()
                .map(|m| max_abs(&m.k).max(max_abs(&m.l)))
                .max()
                .unwrap_or(0),
            KernelFamily::ConvTable { symbol } => symbol.iter().map(|(k, _)| max_abs(k)).max().unwrap_or(0),
            KernelFamily::DiagCorrupt { base, .. } => base.closed_form_cutoff(),
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dim) {
            return Err(Error::UnsupportedDim(self.dim));
        }
        let half_dim = self.dim as f64 / 2.0;
        let check_index = |k: &[i64]| -> Result<()> {
            if k.len() != self.dim {
                return Err(Error::InvalidParameter(format!(
                    "index {k:?} does not match dimension {}",
                    self.dim
                )));
            }
            Ok(())
        };
        match &self.family {
            KernelFamily::ModeSum { modes } => {
                for m in modes {
                    check_index(&m.k)?;
                    check_index(&m.l)?;
                    finite(m.value)?;
                }
            }
            KernelFamily::ConvPower { a } => {
                if !(*a > half_dim) {
                    return Err(Error::InvalidParameter(format!(
                        "conv_power needs a > {half_dim} for a square-summable symbol, got {a}"
                    )));
                }
            }
            KernelFamily::ConvTable { symbol } => {
                for (i, (k, v)) in symbol.iter().enumerate() {
                    check_index(k)?;
                    finite(*v)?;
                    if symbol[..i].iter().any(|(k2, _)| k2 == k) {
                        return Err(Error::InvalidParameter(format!("duplicate symbol index {k:?}")));
                    }
                }
            }
            KernelFamily::ProductRandom { a, b, .. } => {
                if !(*a > half_dim && *b > half_dim) {
                    return Err(Error::InvalidParameter(format!(
                        "product_random needs a, b > {half_dim}, got a = {a}, b = {b}"
                    )));
                }
            }
            KernelFamily::RankOne => {}
            KernelFamily::Carleman { p_demo } => {
                if self.dim != 1 {
                    return Err(Error::UnsupportedDim(self.dim));
                }
                if !(*p_demo > 0.0) {
                    return Err(Error::InvalidParameter(format!("p_demo must be positive, got {p_demo}")));
                }
            }
            KernelFamily::DiagCorrupt { base, value } => {
                if base.dim != self.dim {
                    return Err(Error::InvalidParameter("diag_corrupt base dimension mismatch".into()));
                }
                finite(*value)?;
                base.validate()?;
            }
        }
        Ok(())
    }
}

fn finite(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("non-finite coefficient {z}")))
    }
}

fn euclid(k: &[i64]) -> f64 {
    (k.iter().map(|&v| (v * v) as u64).sum::<u64>() as f64).sqrt()
}

/// Deterministic `±1` from a splitmix64 chain over `(seed, k, l)`.
pub fn random_sign(seed: u64, k: &[i64], l: &[i64]) -> f64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut h = mix(seed);
    for &v in k.iter().chain(l) {
        h = mix(h ^ v as u64);
    }
    if h >> 63 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `c_k = k^{−1/2} (ln(k+1))^{−2} e^{i k ln k}` for `k = 1..=n`.
///
/// `|c_k|` is square-summable but not `p`-summable for any `p < 2`.
pub fn carleman_coefficients(n: usize) -> Vec<Complex64> {
    (1..=n).map(carleman_coefficient).collect()
}

pub fn carleman_coefficient(k: usize) -> Complex64 {
    let kf = k as f64;
    let modulus = kf.powf(-0.5) * (kf + 1.0).ln().powi(-2);
    Complex64::from_polar(modulus, kf * kf.ln())
}

/// `max_x |Σ_{k≤n} c_k e^{ikx}|` over the uniform grid of the given size.
///
/// Frequencies are folded modulo the grid size, so the grid values are exact.
pub fn carleman_sup_norm(n: usize, grid: usize) -> f64 {
    let mut folded = vec![Complex64::default(); grid];
    for k in 1..=n {
        folded[k % grid] += carleman_coefficient(k);
    }
    FftPlanner::new()
        .plan_fft_inverse(grid)
        .process(&mut folded);
    folded.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefEntry {
    /// Lattice position of `k`.
    pub row: usize,
    /// Lattice position of `l`.
    pub col: usize,
    pub value: Complex64,
}

/// Sparse truncated coefficients `Ĥ[k, l]`, entries sorted by `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    lattice: FrequencyLattice,
    entries: Vec<CoefEntry>,
    /// Set when the kernel is real valued, i.e. `Ĥ[k, l] = conj(Ĥ[−k, −l])`.
    pub conjugate_symmetric: bool,
}

impl CoefficientMatrix {
    pub fn new(lattice: FrequencyLattice, mut entries: Vec<CoefEntry>) -> Result<Self> {
        let n = lattice.len();
        for e in &entries {
            if e.row >= n || e.col >= n {
                return Err(Error::InconsistentDims(format!(
                    "entry ({}, {}) outside a lattice of {} indices",
                    e.row, e.col, n
                )));
            }
            finite(e.value)?;
        }
        entries.sort_by_key(|e| (e.row, e.col));
        if entries.windows(2).any(|w| (w[0].row, w[0].col) == (w[1].row, w[1].col)) {
            return Err(Error::InvalidParameter("duplicate coefficient entry".into()));
        }
        Ok(Self {
            lattice,
            entries,
            conjugate_symmetric: false,
        })
    }

    pub fn zeros(lattice: FrequencyLattice) -> Self {
        Self {
            lattice,
            entries: Vec::new(),
            conjugate_symmetric: true,
        }
    }

    pub fn from_fn(lattice: FrequencyLattice, f: impl Fn(&[i64], &[i64]) -> Complex64) -> Result<Self> {
        let mut entries = Vec::new();
        for row in 0..lattice.len() {
            for col in 0..lattice.len() {
                let value = f(lattice.index(row), lattice.index(col));
                if value != Complex64::default() {
                    entries.push(CoefEntry { row, col, value });
                }
            }
        }
        Self::new(lattice, entries)
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    pub fn entries(&self) -> &[CoefEntry] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, k: &[i64], l: &[i64]) -> Complex64 {
        match (self.lattice.position(k), self.lattice.position(l)) {
            (Some(row), Some(col)) => self
                .entries
                .binary_search_by_key(&(row, col), |e| (e.row, e.col))
                .map(|i| self.entries[i].value)
                .unwrap_or_default(),
            _ => Complex64::default(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.value.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Whether the entries actually satisfy `Ĥ[k, l] = conj(Ĥ[−k, −l])`.
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        self.entries.iter().all(|e| {
            let mirror = self.get_pos(self.lattice.negate(e.row), self.lattice.negate(e.col));
            (e.value - mirror.conj()).norm() <= tol
        })
    }

    fn get_pos(&self, row: usize, col: usize) -> Complex64 {
        self.entries
            .binary_search_by_key(&(row, col), |e| (e.row, e.col))
            .map(|i| self.entries[i].value)
            .unwrap_or_default()
    }

    /// Checks the declared flag against the entries.
    pub fn validate(&self) -> Result<()> {
        if self.conjugate_symmetric && !self.is_conjugate_symmetric(1e-12) {
            return Err(Error::InvalidParameter(
                "conjugate-symmetry flag set on non-symmetric coefficients".into(),
            ));
        }
        Ok(())
    }

    /// `Σ Ĥ[k, l] e^{ik·x} e^{il·y}`.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Complex64 {
        let dot = |k: &[i64], p: &[f64]| k.iter().zip(p).map(|(&a, &b)| a as f64 * b).sum::<f64>();
        self.entries
            .iter()
            .map(|e| {
                let phase = dot(self.lattice.index(e.row), x) + dot(self.lattice.index(e.col), y);
                e.value * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let header: &[&str] = match self.lattice.dim() {
            1 => &["k1", "l1", "re", "im"],
            _ => &["k1", "k2", "l1", "l2", "re", "im"],
        };
        w.write_record(header)?;
        for e in self.entries.iter().filter(|e| e.value != Complex64::default()) {
            let mut record: Vec<String> = Vec::with_capacity(header.len());
            record.extend(self.lattice.index(e.row).iter().map(i64::to_string));
            record.extend(self.lattice.index(e.col).iter().map(i64::to_string));
            record.push(format!("{}", e.value.re));
            record.push(format!("{}", e.value.im));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a coefficient file; the cutoff is the largest index magnitude present.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(path, None)
    }

    /// Reads a coefficient file into a lattice of the given cutoff.
    pub fn load_csv_with_cutoff(path: impl AsRef<Path>, cutoff: usize) -> Result<Self> {
        Self::read_csv(path, Some(cutoff))
    }

    fn read_csv(path: impl AsRef<Path>, cutoff: Option<usize>) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_path(path)?;
        let header: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
        let dim = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
            ["k1", "l1", "re", "im"] => 1,
            ["k1", "k2", "l1", "l2", "re", "im"] => 2,
            other => {
                return Err(Error::MalformedRow {
                    line: 1,
                    reason: format!("unexpected header {other:?}"),
                })
            }
        };
        let mut raw: Vec<(Vec<i64>, Vec<i64>, Complex64)> = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec?;
            if rec.len() != 2 * dim + 2 {
                return Err(Error::InconsistentDims(format!(
                    "row {line} has {} fields, header declares {}",
                    rec.len(),
                    2 * dim + 2
                )));
            }
            let int = |s: &str| {
                s.trim().parse::<i64>().map_err(|e| Error::MalformedRow {
                    line,
                    reason: format!("index `{s}`: {e}"),
                })
            };
            let float = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| Error::MalformedRow {
                    line,
                    reason: format!("value `{s}`: {e}"),
                })
            };
            let k = (0..dim).map(|j| int(&rec[j])).collect::<Result<Vec<_>>>()?;
            let l = (dim..2 * dim).map(|j| int(&rec[j])).collect::<Result<Vec<_>>>()?;
            let value = Complex64::new(float(&rec[2 * dim])?, float(&rec[2 * dim + 1])?);
            raw.push((k, l, value));
        }
        let needed = raw
            .iter()
            .flat_map(|(k, l, _)| k.iter().chain(l))
            .map(|v| v.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let cutoff = match cutoff {
            Some(c) if c < needed => {
                return Err(Error::InconsistentDims(format!(
                    "index magnitude {needed} exceeds requested cutoff {c}"
                )))
            }
            Some(c) => c,
            None => needed,
        };
        let lattice = FrequencyLattice::new(dim, cutoff)?;
        let entries = raw
            .into_iter()
            .map(|(k, l, value)| CoefEntry {
                row: lattice.position(&k).expect("within cutoff"),
                col: lattice.position(&l).expect("within cutoff"),
                value,
            })
            .collect();
        let mut m = Self::new(lattice, entries)?;
        m.conjugate_symmetric = m.is_conjugate_symmetric(0.0);
        Ok(m)
    }
}

/// Truncated coefficients of `spec` on the lattice of cutoff `n`.
pub fn coefficients(spec: &KernelSpec, n: usize) -> Result<CoefficientMatrix> {
    spec.validate()?;
    let lattice = FrequencyLattice::new(spec.dim, n)?;
    let anti_diagonal = |lattice: &FrequencyLattice, f: &dyn Fn(&[i64]) -> Complex64| -> Vec<CoefEntry> {
        (0..lattice.len())
            .filter_map(|row| {
                let value = f(lattice.index(row));
                (value != Complex64::default()).then(|| CoefEntry {
                    row,
                    col: lattice.negate(row),
                    value,
                })
            })
            .collect()
    };
    let (entries, conj_sym) = match &spec.family {
        KernelFamily::ModeSum { modes } => {
            let entries = modes
                .iter()
                .filter_map(|m| {
                    Some(CoefEntry {
                        row: lattice.position(&m.k)?,
                        col: lattice.position(&m.l)?,
                        value: m.value,
                    })
                })
                .filter(|e| e.value != Complex64::default())
                .collect();
            (entries, None)
        }
        KernelFamily::ConvPower { a } => {
            let a = *a;
            (
                anti_diagonal(&lattice, &|k| Complex64::new((1.0 + euclid(k)).powf(-a), 0.0)),
                Some(true),
            )
        }
        KernelFamily::ConvTable { symbol } => {
            let entries = symbol
                .iter()
                .filter_map(|(k, v)| {
                    let row = lattice.position(k)?;
                    Some(CoefEntry {
                        row,
                        col: lattice.negate(row),
                        value: *v,
                    })
                })
                .filter(|e| e.value != Complex64::default())
                .collect();
            (entries, None)
        }
        KernelFamily::ProductRandom { a, b, seed } => {
            let mut entries = Vec::with_capacity(lattice.len() * lattice.len());
            for row in 0..lattice.len() {
                let k = lattice.index(row);
                let wk = (1.0 + euclid(k)).powf(-a);
                for col in 0..lattice.len() {
                    let l = lattice.index(col);
                    let value = random_sign(*seed, k, l) * wk * (1.0 + euclid(l)).powf(-b);
                    entries.push(CoefEntry {
                        row,
                        col,
                        value: Complex64::new(value, 0.0),
                    });
                }
            }
            (entries, None)
        }
        KernelFamily::RankOne => {
            let zero = lattice.position(&vec![0; spec.dim]).expect("origin");
            (
                vec![CoefEntry {
                    row: zero,
                    col: zero,
                    value: Complex64::new(1.0, 0.0),
                }],
                Some(true),
            )
        }
        KernelFamily::Carleman { .. } => (
            anti_diagonal(&lattice, &|k| {
                if k[0] >= 1 {
                    carleman_coefficient(k[0] as usize)
                } else {
                    Complex64::default()
                }
            }),
            Some(false),
        ),
        KernelFamily::DiagCorrupt { base, .. } => return coefficients(base, n),
    };
    let mut m = CoefficientMatrix::new(lattice, entries)?;
    m.conjugate_symmetric = match conj_sym {
        Some(flag) => flag,
        None => m.is_conjugate_symmetric(0.0),
    };
    Ok(m)
}

/// A kernel together with the truncation used to evaluate it.
#[derive(Debug, Clone)]
pub struct TruncatedKernel {
    spec: KernelSpec,
    coeffs: CoefficientMatrix,
}

impl TruncatedKernel {
    /// `series_cutoff` may be omitted only for closed-form families.
    pub fn new(spec: &KernelSpec, series_cutoff: Option<usize>) -> Result<Self> {
        let cutoff = match series_cutoff {
            Some(n) => n.max(if spec.has_closed_form() { spec.closed_form_cutoff() } else { 0 }),
            None if spec.has_closed_form() => spec.closed_form_cutoff(),
            None => return Err(Error::MissingSeriesCutoff(spec.base().name())),
        };
        Ok(Self {
            spec: spec.clone(),
            coeffs: coefficients(spec, cutoff)?,
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn coefficients(&self) -> &CoefficientMatrix {
        &self.coeffs
    }

    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Complex64 {
        if let KernelFamily::DiagCorrupt { value, .. } = &self.spec.family {
            if same_point(x, y) {
                return *value;
            }
        }
        self.coeffs.evaluate(x, y)
    }

    pub fn diagonal_evaluate(&self, x: &[f64]) -> Complex64 {
        self.evaluate(x, x)
    }
}

fn same_point(x: &[f64], y: &[f64]) -> bool {
    let tau = 2.0 * std::f64::consts::PI;
    x.iter().zip(y).all(|(a, b)| a.rem_euclid(tau) == b.rem_euclid(tau))
}

pub fn evaluate(spec: &KernelSpec, x: &[f64], y: &[f64], series_cutoff: Option<usize>) -> Result<Complex64> {
    check_point(spec, x)?;
    check_point(spec, y)?;
    Ok(TruncatedKernel::new(spec, series_cutoff)?.evaluate(x, y))
}

pub fn diagonal_evaluate(spec: &KernelSpec, x: &[f64], series_cutoff: Option<usize>) -> Result<Complex64> {
    evaluate(spec, x, x, series_cutoff)
}

fn check_point(spec: &KernelSpec, x: &[f64]) -> Result<()> {
    if x.len() != spec.dim {
        return Err(Error::InconsistentDims(format!(
            "point of dimension {} for a kernel on T^{}",
            x.len(),
            spec.dim
        )));
    }
    Ok(())
}
