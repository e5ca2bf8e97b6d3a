//! Input laws: PAM constellations, uniform boxes, point masses and the
//! SVD-precoded uniform law, plus the dither used by the Ozarow-Wyner bound.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::geometry::{orthogonality_defect, InputSpace};

/// `N` equispaced points on `[-A, A]`; the single point is `0` when `N = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PamConstellation {
    points: usize,
    amplitude: f64,
}

impl PamConstellation {
    pub fn new(points: usize, amplitude: f64) -> Result<Self> {
        if points == 0 {
            return Err(domain("PamConstellation", "at least one point required"));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(domain(
                "PamConstellation",
                format!("amplitude must be finite and nonnegative, got {amplitude}"),
            ));
        }
        Ok(Self { points, amplitude })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Half the distance between adjacent points, `A/(N-1)`; zero for `N = 1`.
    pub fn half_spacing(&self) -> f64 {
        if self.points < 2 {
            0.0
        } else {
            self.amplitude / (self.points - 1) as f64
        }
    }

    /// The `k`-th point, `-A + 2kΔ`.
    pub fn point(&self, k: usize) -> f64 {
        debug_assert!(k < self.points);
        if self.points < 2 {
            0.0
        } else {
            -self.amplitude + 2.0 * k as f64 * self.half_spacing()
        }
    }

    pub fn support(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.point(k)).collect()
    }

    pub fn entropy_bits(&self) -> f64 {
        (self.points as f64).log2()
    }
}

/// An input law that can be sampled and, when discrete, enumerated.
#[derive(Debug, Clone, PartialEq)]
pub enum InputDistribution {
    /// Independent uniform components on `[-a_i, a_i]`.
    UniformBox(Vec<f64>),
    /// Independent uniform PAM components.
    PamProduct(Vec<PamConstellation>),
    PointMass(Vec<f64>),
    /// `X = V X̃` with `X̃` uniform on `Box(a)`.
    PrecodedUniform { v: DMatrix<f64>, halfwidths: Vec<f64> },
}

impl InputDistribution {
    pub fn uniform_box(halfwidths: Vec<f64>) -> Result<Self> {
        InputSpace::new_box(halfwidths.clone())?;
        Ok(Self::UniformBox(halfwidths))
    }

    pub fn pam_product(marginals: Vec<PamConstellation>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(domain("InputDistribution", "at least one PAM marginal required"));
        }
        Ok(Self::PamProduct(marginals))
    }

    pub fn point_mass(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() || x.iter().any(|v| !v.is_finite()) {
            return Err(domain("InputDistribution", "point mass needs finite coordinates"));
        }
        Ok(Self::PointMass(x))
    }

    pub fn precoded_uniform(v: DMatrix<f64>, halfwidths: Vec<f64>) -> Result<Self> {
        if !v.is_square() || v.nrows() != halfwidths.len() {
            return Err(Error::DimensionMismatch(format!(
                "precoder is {}x{} but {} half-widths were given",
                v.nrows(),
                v.ncols(),
                halfwidths.len()
            )));
        }
        let defect = orthogonality_defect(&v);
        if defect > 1e-10 {
            return Err(Error::NotOrthogonal(defect));
        }
        InputSpace::new_box(halfwidths.clone())?;
        Ok(Self::PrecodedUniform { v, halfwidths })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::UniformBox(a) => a.len(),
            Self::PamProduct(m) => m.len(),
            Self::PointMass(x) => x.len(),
            Self::PrecodedUniform { halfwidths, .. } => halfwidths.len(),
        }
    }

    /// Invariant under `x ↦ -x`.
    pub fn is_symmetric(&self) -> bool {
        match self {
            Self::PointMass(x) => x.iter().all(|&v| v == 0.0),
            _ => true,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Self::PamProduct(_) | Self::PointMass(_))
    }

    /// Number of support points of a discrete law (saturating).
    pub fn support_size(&self) -> Option<usize> {
        match self {
            Self::PamProduct(m) => Some(
                m.iter()
                    .try_fold(1usize, |acc, c| acc.checked_mul(c.points()))
                    .unwrap_or(usize::MAX),
            ),
            Self::PointMass(_) => Some(1),
            _ => None,
        }
    }

    /// Support points of a discrete law, all equally likely, in
    /// lexicographic order (last coordinate fastest).
    pub fn support(&self) -> Option<Vec<DVector<f64>>> {
        match self {
            Self::PointMass(x) => Some(vec![DVector::from_column_slice(x)]),
            Self::PamProduct(m) => {
                let axes: Vec<Vec<f64>> = m.iter().map(PamConstellation::support).collect();
                let total = self.support_size()?;
                let mut out = Vec::with_capacity(total);
                let mut idx = vec![0usize; m.len()];
                for _ in 0..total {
                    out.push(DVector::from_iterator(
                        m.len(),
                        idx.iter().enumerate().map(|(d, &k)| axes[d][k]),
                    ));
                    for d in (0..m.len()).rev() {
                        idx[d] += 1;
                        if idx[d] < axes[d].len() {
                            break;
                        }
                        idx[d] = 0;
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Entropy in bits of a discrete law.
    pub fn entropy_bits(&self) -> Option<f64> {
        match self {
            Self::PamProduct(m) => Some(m.iter().map(PamConstellation::entropy_bits).sum()),
            Self::PointMass(_) => Some(0.0),
            _ => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        match self {
            Self::UniformBox(a) => uniform_box_draw(a, rng),
            Self::PamProduct(m) => DVector::from_iterator(
                m.len(),
                m.iter().map(|c| c.point(rng.random_range(0..c.points()))),
            ),
            Self::PointMass(x) => DVector::from_column_slice(x),
            Self::PrecodedUniform { v, halfwidths } => v * uniform_box_draw(halfwidths, rng),
        }
    }

    /// Support lies inside `x` (relative slack `1e-12`).
    pub fn fits_within(&self, x: &InputSpace) -> bool {
        if self.dim() != x.dim() {
            return false;
        }
        let extents: Vec<f64> = match self {
            Self::UniformBox(a) => a.clone(),
            Self::PamProduct(m) => m.iter().map(PamConstellation::amplitude).collect(),
            Self::PointMass(p) => p.iter().map(|v| v.abs()).collect(),
            Self::PrecodedUniform { v, halfwidths } => match x {
                InputSpace::Ball { radius, .. } => {
                    let norm = halfwidths.iter().map(|a| a * a).sum::<f64>().sqrt();
                    return norm <= radius * (1.0 + 1e-12);
                }
                InputSpace::Box { .. } => (0..v.nrows())
                    .map(|i| {
                        v.row(i)
                            .iter()
                            .zip(halfwidths)
                            .map(|(vij, a)| vij.abs() * a)
                            .sum()
                    })
                    .collect(),
            },
        };
        match x {
            InputSpace::Box { halfwidths } => extents
                .iter()
                .zip(halfwidths)
                .all(|(e, a)| *e <= a * (1.0 + 1e-12)),
            InputSpace::Ball { radius, .. } => {
                extents.iter().map(|e| e * e).sum::<f64>().sqrt() <= radius * (1.0 + 1e-12)
            }
        }
    }
}

fn uniform_box_draw<R: Rng + ?Sized>(a: &[f64], rng: &mut R) -> DVector<f64> {
    DVector::from_iterator(
        a.len(),
        a.iter().map(|&ai| if ai > 0.0 { rng.random_range(-ai..=ai) } else { 0.0 }),
    )
}

/// Uniform dither on `Π [-Δ_i, Δ_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DitherSpec {
    halfwidths: Vec<f64>,
}

impl DitherSpec {
    pub fn new(halfwidths: Vec<f64>) -> Result<Self> {
        if halfwidths.is_empty() || halfwidths.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(domain("DitherSpec", "half-widths must be finite and positive"));
        }
        Ok(Self { halfwidths })
    }

    /// Largest dither with disjoint translates: `Δ_i` equal to the PAM half
    /// spacing (any positive width for single-point axes, here 1).
    pub fn matched(marginals: &[PamConstellation]) -> Result<Self> {
        Self::new(
            marginals
                .iter()
                .map(|c| if c.points() > 1 { c.half_spacing() } else { 1.0 })
                .collect(),
        )
    }

    pub fn halfwidths(&self) -> &[f64] {
        &self.halfwidths
    }

    /// `h(U)` in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.halfwidths.iter().map(|d| (2.0 * d).log2()).sum()
    }

    /// `E‖U‖²`.
    pub fn second_moment(&self) -> f64 {
        self.halfwidths.iter().map(|d| d * d / 3.0).sum()
    }

    /// Checks `2Δ_i ≤` the point spacing on every multi-point axis.
    pub fn check_disjoint(&self, marginals: &[PamConstellation]) -> Result<()> {
        if marginals.len() != self.halfwidths.len() {
            return Err(Error::DimensionMismatch(format!(
                "dither has {} dimensions, constellation has {}",
                self.halfwidths.len(),
                marginals.len()
            )));
        }
        for (i, (c, d)) in marginals.iter().zip(&self.halfwidths).enumerate() {
            if c.points() > 1 && *d > c.half_spacing() * (1.0 + 1e-12) {
                return Err(Error::Precondition(format!(
                    "dithered translates overlap on axis {}: dither half-width {d} exceeds half spacing {}",
                    i + 1,
                    c.half_spacing()
                )));
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        uniform_box_draw(&self.halfwidths, rng)
    }
}
