use serde::Serialize;

use schatlab::diag_avg::trace_averaged;
use schatlab::kernels::{KernelFamily, KernelSpec};
use schatlab::powers::{Classification, Ladder, Verdict};
use schatlab::sobolev::{isotropic_norm, mixed_norm, mixed_norm_finiteness, SobolevOrder};
use schatlab::spectral::{
    observed_membership, predict_membership, trace_quadrature, MembershipPrediction, PVerdict, SpectralSummary,
    TailFit,
};
use schatlab::Complex64;

use crate::args::AnalyzeArgs;
use crate::error::CliError;
use crate::kernel::{self, Source};
use crate::report::Output;

const LEADING: usize = 16;

#[derive(Debug, Serialize)]
struct Input<'a> {
    flags: &'a AnalyzeArgs,
    cutoff: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    spec: Option<&'a KernelSpec>,
}

#[derive(Debug, Serialize)]
struct Sobolev {
    order: SobolevOrder,
    mixed_norm: f64,
    /// Isotropic norms of order `min(μ₁, μ₂)` and `μ₁ + μ₂`, which bracket
    /// the mixed norm.
    isotropic_norm_lower: f64,
    isotropic_norm_upper: f64,
    /// Squared mixed norm on a ladder of cutoffs.
    finiteness: Option<Classification>,
}

#[derive(Debug, Serialize)]
struct Spectrum {
    cutoff: usize,
    rank: usize,
    leading_singular_values: Vec<f64>,
    tail_exponent: Option<TailFit>,
    schatten_norms: Vec<(f64, f64)>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum TraceBasis {
    FiniteRank,
    Prediction,
    Observed,
}

#[derive(Debug, Serialize)]
struct Traces {
    basis: TraceBasis,
    eigensum: Complex64,
    #[serde(skip_serializing_if = "Option::is_none")]
    quadrature: Option<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    averaged: Option<Complex64>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ObservedBasis {
    FiniteRank,
    Classifier,
}

#[derive(Debug, Serialize)]
struct PReport {
    p: f64,
    predicted: PVerdict,
    observed: Verdict,
    observed_basis: ObservedBasis,
    consistent: bool,
}

#[derive(Debug, Serialize)]
struct Analysis {
    sobolev: Sobolev,
    prediction: MembershipPrediction,
    spectrum: Spectrum,
    #[serde(skip_serializing_if = "Option::is_none")]
    traces: Option<Traces>,
    verdicts: Vec<PReport>,
    consistent: bool,
}

/// Ladder for the squared mixed norm: the long default ladder where the
/// family has a fast path, otherwise doublings up to the analysis cutoff.
fn finiteness_ladder(spec: &KernelSpec, cutoff: usize) -> Ladder {
    match spec.family {
        KernelFamily::ConvPower { .. } | KernelFamily::Carleman { .. } => Ladder::for_dim(spec.dim),
        _ => {
            let levels = (usize::BITS - cutoff.max(1).leading_zeros()).min(5) as usize;
            Ladder::new(cutoff as u64, 2, levels)
        }
    }
}

pub fn run(args: &AnalyzeArgs) -> Result<Output, CliError> {
    if args.p.is_empty() || args.p.iter().any(|&p| !(p > 0.0)) {
        return Err(CliError::Usage("--p needs positive Schatten indices".into()));
    }
    let source = kernel::build(&args.kernel, args.common.seed)?;
    let dim = source.dim();
    let cutoff = args.cutoff.unwrap_or_else(|| kernel::default_cutoff(&source));
    let spec = match &source {
        Source::Family(s) => Some(s),
        Source::Table(_) => None,
    };
    let finite_rank = spec.map_or(true, KernelSpec::has_closed_form);

    let c = source.coefficients(cutoff)?;
    let order = SobolevOrder::new(args.mu1, args.mu2)?;
    let finiteness = spec
        .map(|s| mixed_norm_finiteness(s, order, finiteness_ladder(s, cutoff)))
        .transpose()?;
    let sobolev = Sobolev {
        order,
        mixed_norm: mixed_norm(&c, order),
        isotropic_norm_lower: isotropic_norm(&c, args.mu1.min(args.mu2)),
        isotropic_norm_upper: isotropic_norm(&c, order.total()),
        finiteness,
    };
    let prediction = predict_membership(dim, args.mu1, args.mu2, &args.p, true)?;

    let summary = SpectralSummary::from_coefficients(&c)?;
    let rank = summary.singular_values.iter().filter(|&&s| s > 0.0).count();
    let mut schatten_norms = Vec::with_capacity(args.p.len());
    let mut verdicts = Vec::with_capacity(args.p.len());
    for (&p, &(_, predicted)) in args.p.iter().zip(&prediction.verdicts) {
        schatten_norms.push((p, summary.schatten(p)?));
        let (observed, observed_basis) = if finite_rank {
            (Verdict::Convergent, ObservedBasis::FiniteRank)
        } else {
            (observed_membership(&summary.singular_values, p)?.verdict, ObservedBasis::Classifier)
        };
        verdicts.push(PReport {
            p,
            predicted,
            observed,
            observed_basis,
            consistent: !(predicted == PVerdict::Guaranteed && observed == Verdict::Divergent),
        });
    }

    let basis = if finite_rank {
        Some(TraceBasis::FiniteRank)
    } else if prediction.trace_class == Some(true) {
        Some(TraceBasis::Prediction)
    } else if observed_membership(&summary.singular_values, 1.0)?.verdict == Verdict::Convergent {
        Some(TraceBasis::Observed)
    } else {
        None
    };
    let traces = basis
        .map(|basis| -> Result<Traces, CliError> {
            let (quadrature, averaged) = match spec {
                Some(s) => {
                    let series = (!s.has_closed_form()).then_some(cutoff);
                    let quad = trace_quadrature(s, args.grid, series)?;
                    let avg = (dim == 1).then(|| trace_averaged(s, args.levels, args.grid, series)).transpose()?;
                    (Some(quad), avg)
                }
                None => (None, None),
            };
            Ok(Traces {
                basis,
                eigensum: summary.trace_eigensum,
                quadrature,
                averaged,
            })
        })
        .transpose()?;

    let series = match &sobolev.finiteness {
        Some(f) => f.cutoffs.iter().zip(&f.partial_sums).map(|(&n, &s)| (n as f64, s)).collect(),
        None => summary
            .singular_values
            .iter()
            .enumerate()
            .map(|(j, &s)| ((j + 1) as f64, s))
            .collect(),
    };
    let consistent = verdicts.iter().all(|v| v.consistent);
    let analysis = Analysis {
        sobolev,
        prediction,
        spectrum: Spectrum {
            cutoff: summary.cutoff,
            rank,
            leading_singular_values: summary.singular_values.iter().take(LEADING).copied().collect(),
            tail_exponent: summary.tail_exponent,
            schatten_norms,
        },
        traces,
        verdicts,
        consistent,
    };
    let input = Input { flags: args, cutoff, spec };
    Output::new("analyze", &input, &analysis, &args.common, series)
}
