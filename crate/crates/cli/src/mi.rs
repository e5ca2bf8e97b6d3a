//! Monte-Carlo mutual information of a discrete input.

use std::io::Write;
use std::path::PathBuf;

use ampcap_core::distribution::{InputDistribution, PamConstellation};
use ampcap_core::oracle::{mutual_information_discrete, McBudget, McEstimate};
use ampcap_core::ChannelMatrix;

use crate::config::{parse_floats, RawConfig};
use crate::error::{CliError, CliResult};

pub const DEFAULT_MI_SAMPLES: usize = 1_000_000;

pub const MI_KEYS: &[&str] = &["channel", "channel_csv", "input", "pam", "point", "samples", "seed", "out"];

#[derive(Debug, Clone)]
pub struct MiConfig {
    pub channel: ChannelMatrix,
    pub input: InputDistribution,
    pub budget: McBudget,
    pub out: Option<PathBuf>,
}

/// `points:amplitude` per dimension, comma separated.
fn parse_pam(spec: &str) -> Result<Vec<PamConstellation>, String> {
    spec.split(',')
        .map(|part| {
            let (n, a) = part
                .trim()
                .split_once(':')
                .ok_or_else(|| format!("`{}` is not `points:amplitude`", part.trim()))?;
            let n: usize = n.trim().parse().map_err(|_| format!("`{}` is not a point count", n.trim()))?;
            let a: f64 = a.trim().parse().map_err(|_| format!("`{}` is not an amplitude", a.trim()))?;
            PamConstellation::new(n, a).map_err(|e| e.to_string())
        })
        .collect()
}

impl MiConfig {
    pub fn from_raw(raw: &RawConfig) -> CliResult<Self> {
        raw.check_keys(MI_KEYS)?;
        let channel = raw.channel()?;
        let input = match raw.string("input").unwrap_or("pam") {
            "pam" => {
                let spec = raw.string("pam").ok_or_else(|| CliError::config(0, "missing `pam`"))?;
                let marginals = parse_pam(spec).map_err(|m| CliError::config(0, format!("`pam`: {m}")))?;
                InputDistribution::pam_product(marginals)?
            }
            "point" => {
                let spec = raw.string("point").ok_or_else(|| CliError::config(0, "missing `point`"))?;
                let x = parse_floats(spec).map_err(|m| CliError::config(0, format!("`point`: {m}")))?;
                InputDistribution::point_mass(x)?
            }
            other => return Err(CliError::config(0, format!("`input` must be `pam` or `point`, got `{other}`"))),
        };
        Ok(Self {
            channel,
            input,
            budget: McBudget::new(
                raw.parse_value("samples")?.unwrap_or(DEFAULT_MI_SAMPLES),
                raw.parse_value("seed")?.unwrap_or(0),
            ),
            out: raw.path("out"),
        })
    }
}

pub fn run_mi(cfg: &MiConfig) -> CliResult<McEstimate> {
    Ok(mutual_information_discrete(&cfg.input, &cfg.channel, cfg.budget)?)
}

pub fn write_mi_csv<W: Write>(cfg: &MiConfig, est: &McEstimate, mut w: W) -> CliResult<()> {
    writeln!(w, "# seed={}", est.seed).map_err(|e| CliError::io("<output>", e))?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["estimate_bits", "std_error_bits", "seed", "samples", "support_points"])?;
    csv.write_record([
        est.value.to_string(),
        est.std_error.to_string(),
        est.seed.to_string(),
        est.samples.to_string(),
        cfg.input.support_size().unwrap_or(0).to_string(),
    ])?;
    csv.flush().map_err(|e| CliError::io("<output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pam_spec() {
        let p = parse_pam("73:500, 2:1").unwrap();
        assert_eq!(p[0].points(), 73);
        assert_eq!(p[1].amplitude(), 1.0);
        assert!(parse_pam("73").is_err());
        assert!(parse_pam("x:1").is_err());
    }

    #[test]
    fn point_mass_carries_nothing() {
        let raw = RawConfig::parse("channel = 1 0; 0 1\ninput = point\npoint = 1 -2\nsamples = 10000\n", ".").unwrap();
        let cfg = MiConfig::from_raw(&raw).unwrap();
        assert_eq!(run_mi(&cfg).unwrap().value, 0.0);
    }
}
