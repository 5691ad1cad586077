//! Parsers for the compound flag values (`100/n`, `0..10`, `warm:0.1`).

use anyhow::{anyhow, bail, Context, Result};
use rpr_core::bench::{Algorithm, Gain, InitSpec};
use rpr_core::problem_gen::DEFAULT_SELECTION_QUANTILE;
use rpr_core::prox_linear::{InnerSolverKind, InnerStop};

/// `0.5`, `100/n`.
pub fn parse_gain(s: &str) -> Result<Gain> {
    let s = s.trim();
    let gain = match s.strip_suffix("/n") {
        Some(num) => Gain::PerDim(num.trim().parse().with_context(|| format!("bad gain {s:?}"))?),
        None => Gain::Fixed(s.parse().with_context(|| format!("bad gain {s:?}"))?),
    };
    let value = match gain {
        Gain::Fixed(v) | Gain::PerDim(v) => v,
    };
    if !(value > 0.0 && value.is_finite()) {
        bail!("gain must be positive, got {s:?}");
    }
    Ok(gain)
}

/// `0..10` (half open), `3`, or `1,4,9`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().with_context(|| format!("bad seed range {s:?}"))?;
        let b: u64 = b.trim().parse().with_context(|| format!("bad seed range {s:?}"))?;
        if a >= b {
            bail!("empty seed range {s:?}");
        }
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<u64>().with_context(|| format!("bad seed {t:?}")))
        .collect()
}

/// `spectral`, `spectral:0.4`, `warm:0.1`.
pub fn parse_init(s: &str) -> Result<InitSpec> {
    let (kind, arg) = match s.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (s, None),
    };
    let value = |a: &str| a.trim().parse::<f64>().with_context(|| format!("bad init parameter in {s:?}"));
    match (kind.trim(), arg) {
        ("spectral", None) => Ok(InitSpec::Spectral { select: DEFAULT_SELECTION_QUANTILE }),
        ("spectral", Some(a)) => Ok(InitSpec::Spectral { select: value(a)? }),
        ("warm", Some(a)) => Ok(InitSpec::Warm { rel_delta: value(a)? }),
        ("warm", None) => bail!("warm start needs a distance, e.g. warm:0.1"),
        _ => bail!("unknown init {s:?}; expected spectral or warm:<δ>"),
    }
}

/// Shared hyper-parameters used to instantiate algorithm names.
#[derive(Clone, Debug)]
pub struct HyperParams {
    pub ptilde: f64,
    pub rho_l: f64,
    pub rho_h: f64,
    pub q: f64,
    pub lambda0_scale: f64,
    pub inner: InnerSolverKind,
    pub subgrad_gain: Gain,
    pub ipl_gain: Gain,
    /// `algo=gain` overrides, keyed by lowercase name.
    pub overrides: Vec<(String, Gain)>,
}

impl HyperParams {
    /// Applies one `--G` item: either a bare gain for every adaptive method
    /// or `name=gain` for one of them.
    pub fn apply_gain(&mut self, item: &str) -> Result<()> {
        match item.split_once('=') {
            Some((name, g)) => {
                let name = name.trim().to_ascii_lowercase();
                if !matches!(name.as_str(), "adasubgrad" | "adaipl-lac" | "adaipl-hac") {
                    bail!("--G override for {name:?}: only adaptive methods take a gain");
                }
                self.overrides.push((name, parse_gain(g)?));
            }
            None => {
                let g = parse_gain(item)?;
                self.subgrad_gain = g;
                self.ipl_gain = g;
            }
        }
        Ok(())
    }

    fn gain_for(&self, name: &str, default: Gain) -> Gain {
        self.overrides.iter().rev().find(|(n, _)| n == name).map_or(default, |(_, g)| *g)
    }

    pub fn algorithm(&self, name: &str) -> Result<Algorithm> {
        let key = name.trim().to_ascii_lowercase();
        let lac = InnerStop::Lac { rho: self.rho_l };
        let hac = InnerStop::Hac { rho: self.rho_h };
        let inner = self.inner;
        Ok(match key.as_str() {
            "adasubgrad" => Algorithm::AdaSubGrad { gain: self.gain_for(&key, self.subgrad_gain), quantile: self.ptilde },
            "gsubgrad" => Algorithm::GSubGrad { decay: self.q, lambda0_scale: self.lambda0_scale },
            "psubgrad" => Algorithm::PSubGrad,
            "ipl-lac" => Algorithm::Ipl { stop: lac, inner },
            "ipl-hac" => Algorithm::Ipl { stop: hac, inner },
            "adaipl-lac" => Algorithm::AdaIpl { gain: self.gain_for(&key, self.ipl_gain), quantile: self.ptilde, stop: lac, inner },
            "adaipl-hac" => Algorithm::AdaIpl { gain: self.gain_for(&key, self.ipl_gain), quantile: self.ptilde, stop: hac, inner },
            _ => return Err(anyhow!("unknown algorithm {name:?}")),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gains() {
        assert_eq!(parse_gain("100/n").unwrap(), Gain::PerDim(100.0));
        assert_eq!(parse_gain("0.5").unwrap(), Gain::Fixed(0.5));
        assert!(parse_gain("-1").is_err());
        assert!(parse_gain("x/n").is_err());
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("4, 2").unwrap(), vec![4, 2]);
        assert!(parse_seeds("3..3").is_err());
        assert!(parse_seeds("a").is_err());
    }

    #[test]
    fn inits() {
        assert_eq!(parse_init("warm:0.1").unwrap(), InitSpec::Warm { rel_delta: 0.1 });
        assert_eq!(parse_init("spectral:0.3").unwrap(), InitSpec::Spectral { select: 0.3 });
        assert!(parse_init("warm").is_err());
        assert!(parse_init("random").is_err());
    }
}
