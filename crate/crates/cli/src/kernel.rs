use std::str::FromStr;

use schatlab::kernels::{coefficients, CoefficientMatrix, KernelFamily, KernelSpec, Mode};
use schatlab::Complex64;

use crate::args::{KernelArgs, KernelKind};
use crate::error::CliError;

/// What is being analysed: a kernel family, or a fixed coefficient table.
pub enum Source {
    Family(KernelSpec),
    Table(CoefficientMatrix),
}

impl Source {
    pub fn dim(&self) -> usize {
        match self {
            Source::Family(s) => s.dim,
            Source::Table(c) => c.lattice().dim(),
        }
    }

    pub fn coefficients(&self, cutoff: usize) -> Result<CoefficientMatrix, CliError> {
        Ok(match self {
            Source::Family(s) => coefficients(s, cutoff)?,
            Source::Table(c) => c.clone(),
        })
    }
}

/// Default lattice cutoff. The Carleman witness carries a `(ln k)^{−2}`
/// factor that hides its divergence below a few thousand modes.
pub fn default_cutoff(source: &Source) -> usize {
    match source {
        Source::Family(KernelSpec {
            family: KernelFamily::Carleman { .. },
            ..
        }) => 16_384,
        _ if source.dim() == 2 => 24,
        _ => 1024,
    }
}

pub fn build(args: &KernelArgs, seed: u64) -> Result<Source, CliError> {
    if let Some(path) = &args.coefficients {
        let c = CoefficientMatrix::load_csv(path)?;
        return Ok(Source::Table(c));
    }
    let n = args.n;
    let spec = match args.kernel {
        KernelKind::RankOne => KernelSpec::rank_one(n),
        KernelKind::ConvPower => KernelSpec::conv_power(n, args.a)?,
        KernelKind::ProductRandom => KernelSpec::product_random(n, args.a, args.b, seed)?,
        KernelKind::Carleman => {
            if n != 1 {
                return Err(CliError::Usage("the Carleman kernel lives on T¹ (--n 1)".into()));
            }
            KernelSpec::carleman(args.p_demo)?
        }
        KernelKind::ConvTable => {
            let text = args
                .kappa
                .as_deref()
                .ok_or_else(|| CliError::Usage("conv-table needs --kappa".into()))?;
            KernelSpec::conv_table(n, parse_symbol(text, n)?)?
        }
        KernelKind::ModeSum => {
            let text = args
                .modes
                .as_deref()
                .ok_or_else(|| CliError::Usage("mode-sum needs --modes".into()))?;
            KernelSpec::mode_sum(n, parse_modes(text, n)?)?
        }
    };
    spec.validate()?;
    let spec = match &args.corrupt {
        Some(v) => KernelSpec::diag_corrupt(spec, parse_complex(v)?)?,
        None => spec,
    };
    Ok(Source::Family(spec))
}

pub fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    Complex64::from_str(text.trim()).map_err(|_| CliError::Usage(format!("not a complex number: `{text}`")))
}

fn parse_index(text: &str, dim: usize) -> Result<Vec<i64>, CliError> {
    let k = text
        .split(',')
        .map(|c| c.trim().parse::<i64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("not a frequency: `{text}`")))?;
    if k.len() != dim {
        return Err(CliError::Usage(format!("frequency `{text}` should have {dim} components")));
    }
    Ok(k)
}

fn entries(text: &str) -> impl Iterator<Item = Result<(&str, &str), CliError>> {
    text.split(';').map(str::trim).filter(|e| !e.is_empty()).map(|e| {
        e.split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected index=value, got `{e}`")))
    })
}

/// `k=v;k=v`, with `k` a comma-separated frequency.
pub fn parse_symbol(text: &str, dim: usize) -> Result<Vec<(Vec<i64>, Complex64)>, CliError> {
    entries(text)
        .map(|e| {
            let (k, v) = e?;
            Ok((parse_index(k, dim)?, parse_complex(v)?))
        })
        .collect()
}

/// `k:l=v;…`
pub fn parse_modes(text: &str, dim: usize) -> Result<Vec<Mode>, CliError> {
    entries(text)
        .map(|e| {
            let (kl, v) = e?;
            let (k, l) = kl
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("expected k:l, got `{kl}`")))?;
            Ok(Mode {
                k: parse_index(k, dim)?,
                l: parse_index(l, dim)?,
                value: parse_complex(v)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_tables() {
        let s = parse_symbol("0=1; 1=0.5;-1=0.5", 1).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[2], (vec![-1], Complex64::new(0.5, 0.0)));
        let s = parse_symbol("1,-2=1+2i", 2).unwrap();
        assert_eq!(s[0], (vec![1, -2], Complex64::new(1.0, 2.0)));
        assert!(parse_symbol("1,2=1", 1).is_err());
        assert!(parse_symbol("x=1", 1).is_err());
        assert!(parse_symbol("1", 1).is_err());
    }

    #[test]
    fn mode_lists() {
        let m = parse_modes("1:1=1;0:-2=0.5", 1).unwrap();
        assert_eq!(m[1].l, vec![-2]);
        assert!(parse_modes("1=1", 1).is_err());
    }
}
