//! Gap certificates over the shipped ensembles.

use std::io::Write;
use std::path::PathBuf;

use ampcap_core::audit::{
    audit_ensembles, ball_ensemble, default_ensembles, diagonal_grid_ensemble, fig2_ensemble, fig3_ensemble,
    pam_gap_constant, random_invertible_ensemble, rectangular_ensemble, Ensemble, GapCertificate,
    DEFAULT_RANDOM_SEED,
};

use crate::config::RawConfig;
use crate::error::{CliError, CliResult};

pub const AUDIT_KEYS: &[&str] = &["ensemble", "pam_constant", "report", "out"];

pub const ENSEMBLE_NAMES: &[&str] = &["default", "fig2", "fig3", "random3x3", "random2x2", "diagonal-grid", "ball", "rectangular"];

#[derive(Debug, Clone)]
pub struct AuditConfig {
    pub ensembles: Vec<String>,
    /// Per-dimension constant of the PAM gap certificate.
    pub pam_constant: f64,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            ensembles: vec!["default".into()],
            pam_constant: pam_gap_constant(),
            out: None,
            report: None,
        }
    }
}

impl AuditConfig {
    pub fn from_raw(raw: &RawConfig) -> CliResult<Self> {
        raw.check_keys(AUDIT_KEYS)?;
        let mut cfg = Self::default();
        if let Some(names) = raw.words("ensemble") {
            if let Some(bad) = names.iter().find(|n| !ENSEMBLE_NAMES.contains(&n.as_str())) {
                return Err(CliError::config(
                    0,
                    format!("unknown ensemble `{bad}` (expected one of: {})", ENSEMBLE_NAMES.join(", ")),
                ));
            }
            if names.is_empty() {
                return Err(CliError::config(0, "`ensemble` selects nothing"));
            }
            cfg.ensembles = names;
        }
        if let Some(c) = raw.parse_value::<f64>("pam_constant")? {
            cfg.pam_constant = c;
        }
        cfg.out = raw.path("out");
        cfg.report = raw.path("report");
        Ok(cfg)
    }

    pub fn build_ensembles(&self) -> Vec<Ensemble> {
        self.ensembles
            .iter()
            .flat_map(|name| match name.as_str() {
                "default" => default_ensembles(),
                "fig2" => vec![fig2_ensemble()],
                "fig3" => vec![fig3_ensemble()],
                "random3x3" => vec![random_invertible_ensemble(3, 20, &[1.0, 10.0, 100.0], DEFAULT_RANDOM_SEED)],
                "random2x2" => vec![random_invertible_ensemble(2, 10, &[1.0, 100.0], DEFAULT_RANDOM_SEED + 1000)],
                "diagonal-grid" => vec![diagonal_grid_ensemble()],
                "ball" => vec![ball_ensemble()],
                "rectangular" => vec![rectangular_ensemble()],
                _ => unreachable!("validated ensemble name"),
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct AuditOutcome {
    pub certificates: Vec<GapCertificate>,
    pub instances: usize,
}

impl AuditOutcome {
    pub fn failures(&self) -> usize {
        self.certificates.iter().filter(|c| c.fails_audit()).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn write_csv<W: Write>(&self, w: W) -> CliResult<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["instance", "check", "lhs_bits", "rhs_bits", "slack", "pass", "gating", "note"])?;
        for c in &self.certificates {
            csv.write_record([
                c.instance.clone(),
                c.check.to_string(),
                c.lhs_bits.to_string(),
                c.rhs_bits.to_string(),
                c.slack.to_string(),
                c.pass.to_string(),
                c.gating.to_string(),
                c.note.clone(),
            ])?;
        }
        csv.flush().map_err(|e| CliError::io("<output>", e))?;
        Ok(())
    }

    pub fn write_report<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let gating = self.certificates.iter().filter(|c| c.gating).count();
        let informational_fail = self.certificates.iter().filter(|c| !c.gating && !c.pass).count();
        writeln!(w, "ampcap audit")?;
        writeln!(w, "instances: {}", self.instances)?;
        writeln!(w, "certificates: {} ({} gating)", self.certificates.len(), gating)?;
        writeln!(w, "gating failures: {}", self.failures())?;
        writeln!(w, "informational rows below their right-hand side: {informational_fail}")?;
        writeln!(w, "result: {}", if self.passed() { "PASS" } else { "FAIL" })?;
        writeln!(w)?;
        for c in &self.certificates {
            writeln!(w, "{c}")?;
        }
        Ok(())
    }
}

pub fn run_audit(cfg: &AuditConfig) -> CliResult<AuditOutcome> {
    let ensembles = cfg.build_ensembles();
    let instances = ensembles.iter().map(|e| e.instances.len()).sum();
    Ok(AuditOutcome {
        certificates: audit_ensembles(&ensembles, cfg.pam_constant)?,
        instances,
    })
}
