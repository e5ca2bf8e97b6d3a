//! Amplitude sweeps: every selected bound at every grid point.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use ampcap_core::distribution::InputDistribution;
use ampcap_core::lower_bounds::{
    epi_paper_vol, epi_svd, epi_svd_paper_vol, epi_uniform_invertible, jensen_bound_diag, jensen_bound_general,
    ow_pam_diag,
};
use ampcap_core::oracle::McBudget;
use ampcap_core::presets::{fig2_channel, fig2_db_grid, fig3_channel, fig3_db_grid, DbConvention};
use ampcap_core::svd_precoding::{feasible_precoder_box, jensen_svd, jensen_svd_ball};
use ampcap_core::upper_bounds::{dual2_diag_ball_paper, duality_ball_bound, duality_box_bound, moment_bound};
use ampcap_core::{BoundKind, BoundResult, ChannelMatrix, Error, InputSpace};
use rayon::prelude::*;

use crate::config::{amplitude_grid, constraint, Constraint, RawConfig};
use crate::error::{CliError, CliResult};

pub const DEFAULT_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Moment,
    DualityBall,
    DualityBox,
    Dual2DiagBallPaper,
    Epi,
    EpiPaperVol,
    EpiSvd,
    EpiSvdPaperVol,
    JensenDiag,
    JensenSvd,
    JensenSvdBall,
    JensenGeneral,
    OwPamDiag,
}

impl Bound {
    pub const ALL: [Bound; 13] = [
        Self::Moment,
        Self::DualityBall,
        Self::DualityBox,
        Self::Dual2DiagBallPaper,
        Self::Epi,
        Self::EpiPaperVol,
        Self::EpiSvd,
        Self::EpiSvdPaperVol,
        Self::JensenDiag,
        Self::JensenSvd,
        Self::JensenSvdBall,
        Self::JensenGeneral,
        Self::OwPamDiag,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Moment => "moment",
            Self::DualityBall => "duality_ball",
            Self::DualityBox => "duality_box",
            Self::Dual2DiagBallPaper => "dual2_diag_ball_paper",
            Self::Epi => "epi",
            Self::EpiPaperVol => "epi_paper_vol",
            Self::EpiSvd => "epi_svd",
            Self::EpiSvdPaperVol => "epi_svd_paper_vol",
            Self::JensenDiag => "jensen_diag",
            Self::JensenSvd => "jensen_svd",
            Self::JensenSvdBall => "jensen_svd_ball",
            Self::JensenGeneral => "jensen_general",
            Self::OwPamDiag => "ow_pam_diag",
        }
    }

    pub fn kind(self) -> BoundKind {
        match self {
            Self::Moment | Self::DualityBall | Self::DualityBox | Self::Dual2DiagBallPaper => BoundKind::Upper,
            _ => BoundKind::Lower,
        }
    }

    /// Precoded bounds on boxes take the box half-widths as precoder-domain
    /// amplitudes; on balls they use a feasible allocation.
    pub fn evaluate(self, h: &ChannelMatrix, x: &InputSpace, budget: McBudget) -> ampcap_core::Result<BoundResult> {
        let precoder_box = || match x {
            InputSpace::Box { halfwidths } => Ok(halfwidths.clone()),
            InputSpace::Ball { .. } => feasible_precoder_box(h, x),
        };
        match self {
            Self::Moment => moment_bound(h, x),
            Self::DualityBall => duality_ball_bound(h, x),
            Self::DualityBox => duality_box_bound(h, x),
            Self::Dual2DiagBallPaper => dual2_diag_ball_paper(h, x),
            Self::Epi => epi_uniform_invertible(h, x),
            Self::EpiPaperVol => epi_paper_vol(h, x),
            Self::EpiSvd => epi_svd(h, &precoder_box()?),
            Self::EpiSvdPaperVol => epi_svd_paper_vol(h, &precoder_box()?),
            Self::JensenDiag => {
                let gains = h
                    .diagonal_entries()
                    .ok_or_else(|| Error::Precondition("jensen_diag needs a diagonal channel".into()))?;
                jensen_bound_diag(&gains.iter().map(|g| g.abs()).collect::<Vec<_>>(), x)
            }
            Self::JensenSvd => jensen_svd(h, &precoder_box()?),
            Self::JensenSvdBall => match x {
                InputSpace::Ball { radius, .. } => jensen_svd_ball(h, *radius),
                InputSpace::Box { .. } => Err(Error::Precondition("jensen_svd_ball needs a ball constraint".into())),
            },
            Self::JensenGeneral => match x {
                InputSpace::Box { halfwidths } => {
                    jensen_bound_general(h, &InputDistribution::uniform_box(halfwidths.clone())?, budget)
                }
                InputSpace::Ball { .. } => {
                    Err(Error::Precondition("jensen_general sweeps use a uniform box input".into()))
                }
            },
            Self::OwPamDiag => ow_pam_diag(h, x),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Bound {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown bound `{s}`"))
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub channel: ChannelMatrix,
    pub constraint: Constraint,
    /// Linear amplitudes, strictly increasing.
    pub grid: Vec<f64>,
    pub convention: DbConvention,
    pub bounds: Vec<Bound>,
    pub budget: McBudget,
    pub out: Option<PathBuf>,
}

pub const SWEEP_KEYS: &[&str] = &[
    "channel",
    "channel_csv",
    "constraint",
    "halfwidths",
    "amplitudes",
    "db",
    "db_range",
    "db_convention",
    "bounds",
    "samples",
    "seed",
    "out",
];

impl SweepConfig {
    pub fn from_raw(raw: &RawConfig) -> CliResult<Self> {
        raw.check_keys(SWEEP_KEYS)?;
        let channel = raw.channel()?;
        let constraint = constraint(raw, channel.n_t())?;
        let convention = raw.convention()?;
        let grid = amplitude_grid(raw, convention)?;
        let names = raw
            .words("bounds")
            .ok_or_else(|| CliError::config(0, "missing `bounds`"))?;
        let bounds = if names == ["all"] {
            Bound::ALL.to_vec()
        } else {
            names
                .iter()
                .map(|n| n.parse::<Bound>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|m| CliError::config(0, format!("`bounds`: {m}")))?
        };
        if bounds.is_empty() {
            return Err(CliError::config(0, "`bounds` selects no bound"));
        }
        let budget = McBudget::new(
            raw.parse_value("samples")?.unwrap_or(DEFAULT_SAMPLES),
            raw.parse_value("seed")?.unwrap_or(0),
        );
        Ok(Self {
            channel,
            constraint,
            grid,
            convention,
            bounds,
            budget,
            out: raw.path("out"),
        })
    }

    /// `diag(0.3, 0.1)`, `Box(A, A)`, 40 points over 0..30 dB.
    pub fn fig2() -> Self {
        let convention = DbConvention::HalfRange;
        Self {
            channel: fig2_channel(),
            constraint: Constraint::Box(vec![1.0, 1.0]),
            grid: fig2_db_grid().into_iter().map(|d| convention.to_linear(d)).collect(),
            convention,
            bounds: vec![
                Bound::Moment,
                Bound::DualityBox,
                Bound::DualityBall,
                Bound::JensenDiag,
                Bound::Epi,
                Bound::EpiPaperVol,
                Bound::OwPamDiag,
            ],
            budget: McBudget::new(DEFAULT_SAMPLES, 0),
            out: None,
        }
    }

    /// The 1×3 channel with `Box(A, A, A)`, 14 points over 0..16.25 dB.
    pub fn fig3() -> Self {
        let convention = DbConvention::HalfRange;
        Self {
            channel: fig3_channel(),
            constraint: Constraint::Box(vec![1.0; 3]),
            grid: fig3_db_grid().into_iter().map(|d| convention.to_linear(d)).collect(),
            convention,
            bounds: vec![
                Bound::Moment,
                Bound::DualityBall,
                Bound::DualityBox,
                Bound::JensenSvd,
                Bound::EpiSvd,
                Bound::EpiSvdPaperVol,
            ],
            budget: McBudget::new(DEFAULT_SAMPLES, 0),
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub amplitude_linear: f64,
    pub amplitude_db: f64,
    pub bound: &'static str,
    pub kind: BoundKind,
    /// `None` when the bound does not apply; the note says why.
    pub bits: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

fn row_note(r: &BoundResult) -> String {
    let mut parts: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    if r.reference_variant {
        parts.push("reference variant".into());
    }
    parts.extend(r.diagnostics.iter().cloned());
    parts.join("; ")
}

/// Evaluates the grid points in parallel; rows come out in grid order, then
/// bound order.
pub fn run_sweep(cfg: &SweepConfig) -> CliResult<SweepTable> {
    let per_point: Vec<Vec<SweepRow>> = cfg
        .grid
        .par_iter()
        .map(|&a| {
            let x = cfg.constraint.at(a)?;
            Ok(cfg
                .bounds
                .iter()
                .map(|&b| {
                    let (bits, note) = match b.evaluate(&cfg.channel, &x, cfg.budget) {
                        Ok(r) => (Some(r.value_bits), row_note(&r)),
                        Err(e) => (None, format!("not evaluated: {e}")),
                    };
                    SweepRow {
                        amplitude_linear: a,
                        amplitude_db: cfg.convention.to_db(a),
                        bound: b.name(),
                        kind: b.kind(),
                        bits,
                        note,
                    }
                })
                .collect())
        })
        .collect::<CliResult<_>>()?;
    Ok(SweepTable {
        seed: cfg.budget.seed,
        rows: per_point.into_iter().flatten().collect(),
    })
}

impl SweepTable {
    pub fn rows_for<'a>(&'a self, bound: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.bound == bound)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> CliResult<()> {
        writeln!(w, "# seed={}", self.seed).map_err(|e| CliError::io("<output>", e))?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["amplitude_linear", "amplitude_dB", "bound", "kind", "bits", "note"])?;
        for r in &self.rows {
            csv.write_record([
                r.amplitude_linear.to_string(),
                r.amplitude_db.to_string(),
                r.bound.to_string(),
                r.kind.to_string(),
                r.bits.map(|b| b.to_string()).unwrap_or_default(),
                r.note.clone(),
            ])?;
        }
        csv.flush().map_err(|e| CliError::io("<output>", e))?;
        Ok(())
    }
}
