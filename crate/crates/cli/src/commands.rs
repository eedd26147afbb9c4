use serde::Serialize;

use schatlab::diag_avg::trace_averaged;
use schatlab::kernels::{carleman_coefficients, carleman_sup_norm, KernelSpec};
use schatlab::powers::{
    classify, closed_form_limit, fit_line, power_schatten, regular_variation_index, weyl_check, Classification,
    Ladder, Model, PowerSchatten, WeylCheck,
};
use schatlab::spectral::{operator_matrix, trace_eigensum, trace_quadrature};
use schatlab::su2::{
    default_ladder, hgamma_matrix_oracle, hgamma_symbol, hypoellipticity_check, invariant_power_schatten,
    kernel_membership_threshold_group, DualPoint, Group, GroupThresholds, Hypoellipticity, SymbolFamily, ZSign,
};
use schatlab::Complex64;

use crate::args::{CarlemanArgs, GroupKind, ModelKind, OpKind, PowersArgs, Su2Args, TraceArgs, WeylArgs, ZSignKind};
use crate::error::CliError;
use crate::kernel::{self, Source};
use crate::report::Output;

fn series(c: &Classification) -> Vec<(f64, f64)> {
    c.cutoffs.iter().zip(&c.partial_sums).map(|(&n, &s)| (n as f64, s)).collect()
}

fn model(kind: ModelKind, dim: usize) -> Model {
    match kind {
        ModelKind::TorusLaplacian => Model::TorusLaplacian { dim },
        ModelKind::TorusBilaplacian => Model::TorusBilaplacian { dim },
    }
}

#[derive(Debug, Serialize)]
struct SpecInput<'a, A: Serialize> {
    flags: &'a A,
    cutoff: usize,
    spec: &'a KernelSpec,
}

#[derive(Debug, Serialize)]
struct TraceReport {
    /// The three values are computed from the series truncated at this cutoff.
    truncation: usize,
    eigensum: Complex64,
    quadrature: Complex64,
    #[serde(skip_serializing_if = "Option::is_none")]
    averaged: Option<Complex64>,
    quadrature_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    averaged_gap: Option<f64>,
}

pub fn trace(args: &TraceArgs) -> Result<Output, CliError> {
    let source = kernel::build(&args.kernel, args.common.seed)?;
    let cutoff = args.cutoff.unwrap_or_else(|| kernel::default_cutoff(&source));
    let Source::Family(spec) = source else {
        return Err(CliError::Usage("trace needs a kernel family, not a coefficient table".into()));
    };
    let series_cutoff = (!spec.has_closed_form()).then_some(cutoff);
    let m = operator_matrix(&schatlab::kernels::coefficients(&spec, cutoff)?);
    let eigensum = trace_eigensum(&m);
    let quadrature = trace_quadrature(&spec, args.grid, series_cutoff)?;
    // averaged trace per dyadic level, for plotting its convergence
    let per_level = if spec.dim == 1 {
        (0..=args.levels)
            .map(|j| trace_averaged(&spec, j, args.grid, series_cutoff))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };
    let averaged = per_level.last().copied();
    let levels = per_level.iter().enumerate().map(|(j, t)| (j as f64, t.re)).collect();
    let report = TraceReport {
        truncation: cutoff,
        eigensum,
        quadrature,
        averaged,
        quadrature_gap: (quadrature - eigensum).norm(),
        averaged_gap: averaged.map(|a| (a - eigensum).norm()),
    };
    let input = SpecInput { flags: args, cutoff, spec: &spec };
    Output::new("trace", &input, &report, &args.common, levels)
}

#[derive(Debug, Serialize)]
struct PowersReport {
    model: String,
    alpha_p: f64,
    critical_exponent: f64,
    #[serde(flatten)]
    schatten: PowerSchatten,
    /// `Σ d_j (1 + λ_j)^{−αp}` where a closed form is known.
    closed_form_limit: Option<f64>,
    last_partial_sum: f64,
}

pub fn powers(args: &PowersArgs) -> Result<Output, CliError> {
    let model = model(args.model, args.n);
    let ladder = match args.top {
        Some(top) => Ladder::down_from(top, 1),
        None => Ladder::for_dim(args.n),
    };
    let schatten = power_schatten(model, args.alpha, args.p, ladder)?;
    let report = PowersReport {
        model: model.label(),
        alpha_p: args.alpha * args.p,
        critical_exponent: model.critical_exponent(),
        closed_form_limit: closed_form_limit(model, args.alpha * args.p),
        last_partial_sum: schatten.classification.partial_sums.last().copied().unwrap_or(0.0),
        schatten,
    };
    let series = series(&report.schatten.classification);
    Output::new("powers", args, &report, &args.common, series)
}

#[derive(Debug, Serialize)]
struct OracleCheck {
    ell_max: f64,
    max_error: f64,
}

#[derive(Debug, Serialize)]
struct Su2Report {
    family: SymbolFamily,
    alpha_p: f64,
    critical_alpha_p: f64,
    analytic_member: bool,
    classification: Classification,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleCheck>,
    thresholds: GroupThresholds,
    #[serde(skip_serializing_if = "Option::is_none")]
    hypoellipticity: Option<Hypoellipticity>,
}

pub fn su2(args: &Su2Args) -> Result<Output, CliError> {
    let sign = match args.z_sign {
        ZSignKind::Minus => ZSign::MinusJz,
        ZSignKind::Plus => ZSign::PlusJz,
    };
    let family = match args.op {
        OpKind::Laplacian => SymbolFamily::Laplacian,
        OpKind::Sublaplacian => SymbolFamily::Sublaplacian,
        OpKind::Hgamma => SymbolFamily::Hgamma { gamma: args.gamma, sign },
    };
    let group = match args.group {
        GroupKind::Su2 => Group::Su2,
        GroupKind::So3 => Group::So3,
    };
    if args.l_max < 16 {
        return Err(CliError::Usage("--l-max must be at least 16".into()));
    }
    let classification = invariant_power_schatten(family, args.alpha, args.p, group, default_ladder(args.l_max))?;
    let oracle = match family {
        SymbolFamily::Hgamma { gamma, sign } => {
            let mut max_error: f64 = 0.0;
            for two_ell in 0..=20u32 {
                let pt = DualPoint::from_ell(two_ell as f64 / 2.0)?;
                let mut exact = hgamma_symbol(gamma, pt, sign);
                exact.sort_by(f64::total_cmp);
                let mut oracle = hgamma_matrix_oracle(gamma, pt, sign)?;
                oracle.sort_by(f64::total_cmp);
                for (a, b) in exact.iter().zip(&oracle) {
                    max_error = max_error.max((a - b).abs());
                }
            }
            Some(OracleCheck { ell_max: 10.0, max_error })
        }
        _ => None,
    };
    let hypoellipticity = args
        .hypo_c
        .map(|c| hypoellipticity_check(c, args.l_max as u64))
        .transpose()?;
    let report = Su2Report {
        family,
        alpha_p: args.alpha * args.p,
        critical_alpha_p: family.critical_alpha_p(),
        analytic_member: args.alpha * args.p > family.critical_alpha_p(),
        classification,
        oracle,
        thresholds: kernel_membership_threshold_group(3, args.mu1, args.mu2)?,
        hypoellipticity,
    };
    let series = series(&report.classification);
    Output::new("su2", args, &report, &args.common, series)
}

#[derive(Debug, Serialize)]
struct WeylReport {
    model: String,
    lambda: f64,
    exponent: f64,
    shells: usize,
    #[serde(flatten)]
    check: WeylCheck,
}

pub fn weyl(args: &WeylArgs) -> Result<Output, CliError> {
    if !(args.lambda >= 0.0 && args.lambda.is_finite()) {
        return Err(CliError::Usage("--lambda must be finite and nonnegative".into()));
    }
    let model = model(args.model, args.n);
    let seq = model.sequence(args.lambda)?;
    let check = weyl_check(&seq, args.lambda)?;
    let mut count = 0u64;
    let series = seq
        .shells
        .iter()
        .map(|s| {
            count += s.multiplicity;
            (s.lambda, count as f64)
        })
        .collect();
    let report = WeylReport {
        model: model.label(),
        lambda: args.lambda,
        exponent: model.critical_exponent(),
        shells: seq.shells.len(),
        check,
    };
    Output::new("weyl", args, &report, &args.common, series)
}

#[derive(Debug, Serialize)]
struct CarlemanReport {
    /// `Σ_{k≤N} |c_k|²` at the largest and smallest ladder cutoffs.
    square_sum: f64,
    square_sum_change: f64,
    /// `Σ |c_k|^p` on the ladder.
    power_sum: Classification,
    /// Index of regular variation of `Σ_{k≤N} |c_k|`.
    growth_index: Option<f64>,
    /// Plain least-squares slope of `ln Σ_{k≤N} |c_k|` against `ln N`.
    naive_loglog_slope: Option<f64>,
    sup_norms: Vec<(usize, f64)>,
    sup_ratio: f64,
    continuity: &'static str,
}

pub fn carleman(args: &CarlemanArgs) -> Result<Output, CliError> {
    if args.cutoff < 1000 {
        return Err(CliError::Usage("--cutoff must be at least 1000".into()));
    }
    if !(args.p > 0.0) || args.grid == 0 {
        return Err(CliError::Usage("--p must be positive and --grid nonzero".into()));
    }
    let coeffs = carleman_coefficients(args.cutoff);
    let top = args.cutoff as u64;
    let mut levels = 1;
    while top >> levels >= 1000 {
        levels += 1;
    }
    let cutoffs = Ladder::new(top, 2, levels).cutoffs();
    let ladder_sums = |f: &dyn Fn(Complex64) -> f64| -> Vec<f64> {
        let mut acc = 0.0;
        let mut k = 0usize;
        cutoffs
            .iter()
            .map(|&n| {
                while k < n as usize {
                    acc += f(coeffs[k]);
                    k += 1;
                }
                acc
            })
            .collect()
    };
    let squares = ladder_sums(&|z| z.norm_sqr());
    let abs = ladder_sums(&|z| z.norm());
    let p = args.p;
    let power_sum = classify(&cutoffs, &ladder_sums(&|z| z.norm().powf(p)));
    let loglog: Vec<(f64, f64)> = cutoffs.iter().zip(&abs).map(|(&n, &f)| ((n as f64).ln(), f.ln())).collect();

    let small = (args.cutoff / 10).max(1);
    let sup_small = carleman_sup_norm(small, args.grid);
    let sup_large = carleman_sup_norm(args.cutoff, args.grid);
    let report = CarlemanReport {
        square_sum: squares[squares.len() - 1],
        square_sum_change: squares[squares.len() - 1] - squares[0],
        growth_index: regular_variation_index(&cutoffs, &abs),
        naive_loglog_slope: fit_line(&loglog).map(|(s, _)| s),
        sup_norms: vec![(small, sup_small), (args.cutoff, sup_large)],
        sup_ratio: sup_large / sup_small,
        continuity: "bounded sup norms of partial sums are numerical evidence of continuity, not a proof",
        power_sum,
    };
    let series = cutoffs.iter().zip(&abs).map(|(&n, &s)| (n as f64, s)).collect();
    Output::new("carleman", args, &report, &args.common, series)
}
