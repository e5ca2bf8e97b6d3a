//! Input constraint sets, the channel matrix with its cached SVD, and the
//! geometric functionals (enclosing radius, inscribed radius, bounding box,
//! volume, packing efficiency) that parameterize the capacity bounds.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::specialfn::ln_ball_volume;

/// Largest number of nonzero box half-widths for exact vertex enumeration.
pub const MAX_VERTEX_DIMS: usize = 24;

/// Singular values below this fraction of `σ₁` are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

/// Convex, compact input space containing the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSpace {
    /// Per-antenna amplitude limits `|x_i| ≤ a_i`.
    Box { halfwidths: Vec<f64> },
    /// Euclidean ball `‖x‖ ≤ radius` in `dim` dimensions.
    Ball { radius: f64, dim: usize },
}

impl InputSpace {
    pub fn new_box(halfwidths: Vec<f64>) -> Result<Self> {
        if halfwidths.is_empty() {
            return Err(domain("InputSpace::Box", "at least one dimension required"));
        }
        if let Some(a) = halfwidths.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
            return Err(domain(
                "InputSpace::Box",
                format!("half-widths must be finite and nonnegative, got {a}"),
            ));
        }
        Ok(Self::Box { halfwidths })
    }

    /// Hypercube with equal half-width `amplitude` in every dimension.
    pub fn cube(dim: usize, amplitude: f64) -> Result<Self> {
        Self::new_box(vec![amplitude; dim])
    }

    pub fn ball(radius: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(domain("InputSpace::Ball", "at least one dimension required"));
        }
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(domain(
                "InputSpace::Ball",
                format!("radius must be finite and nonnegative, got {radius}"),
            ));
        }
        Ok(Self::Ball { radius, dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Box { halfwidths } => halfwidths.len(),
            Self::Ball { dim, .. } => *dim,
        }
    }

    /// The space `c · X`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        match self {
            Self::Box { halfwidths } => Self::new_box(halfwidths.iter().map(|a| a * c).collect()),
            Self::Ball { radius, dim } => Self::ball(radius * c, *dim),
        }
    }

    pub fn is_box(&self) -> bool {
        matches!(self, Self::Box { .. })
    }

    /// Zero volume (some half-width or the radius is zero).
    pub fn is_degenerate(&self) -> bool {
        match self {
            Self::Box { halfwidths } => halfwidths.iter().any(|&a| a == 0.0),
            Self::Ball { radius, .. } => *radius == 0.0,
        }
    }
}

/// Thin-to-full singular value decomposition `H = U Σ Vᵀ`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `n_r × n_r` orthogonal.
    pub u: DMatrix<f64>,
    /// Nonincreasing, length `n_min`; values under the rank tolerance are zero.
    pub sigmas: Vec<f64>,
    /// `n_t × n_t` orthogonal.
    pub v: DMatrix<f64>,
    pub rank: usize,
}

/// Dense real `n_r × n_t` channel matrix, immutable, with its SVD cached.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    entries: DMatrix<f64>,
    svd: SvdFactors,
}

impl ChannelMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(domain("ChannelMatrix", "matrix must be nonempty"));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(domain("ChannelMatrix", "entries must be finite"));
        }
        let svd = decompose(&entries)?;
        Ok(Self { entries, svd })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_r = rows.len();
        let n_t = rows.first().map_or(0, Vec::len);
        if n_r == 0 || n_t == 0 {
            return Err(domain("ChannelMatrix", "matrix must be nonempty"));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_t) {
            return Err(Error::DimensionMismatch(format!(
                "row {} has {} entries, expected {n_t}",
                i + 1,
                r.len()
            )));
        }
        Self::new(DMatrix::from_fn(n_r, n_t, |i, j| rows[i][j]))
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn svd(&self) -> &SvdFactors {
        &self.svd
    }

    pub fn n_r(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_t(&self) -> usize {
        self.entries.ncols()
    }

    pub fn n_min(&self) -> usize {
        self.n_r().min(self.n_t())
    }

    pub fn rank(&self) -> usize {
        self.svd.rank
    }

    /// Operator norm `σ₁`.
    pub fn spectral_norm(&self) -> f64 {
        self.svd.sigmas[0]
    }

    pub fn is_square(&self) -> bool {
        self.n_r() == self.n_t()
    }

    pub fn is_diagonal(&self) -> bool {
        self.is_square()
            && self
                .entries
                .iter()
                .enumerate()
                .all(|(k, &x)| x == 0.0 || k % self.n_r() == k / self.n_r())
    }

    /// Diagonal entries of a diagonal matrix.
    pub fn diagonal_entries(&self) -> Option<Vec<f64>> {
        self.is_diagonal()
            .then(|| (0..self.n_r()).map(|i| self.entries[(i, i)]).collect())
    }

    /// `ln |det H|` for square matrices (`-inf` when singular).
    pub fn ln_abs_det(&self) -> Option<f64> {
        self.is_square()
            .then(|| self.svd.sigmas.iter().map(|s| s.ln()).sum())
    }

    /// Square with `|det H| > 1e-12 σ₁^n`.
    pub fn is_invertible(&self) -> bool {
        self.is_square()
            && self.spectral_norm() > 0.0
            && self
                .svd
                .sigmas
                .iter()
                .map(|s| (s / self.spectral_norm()).ln())
                .sum::<f64>()
                > RANK_TOLERANCE.ln()
    }

    /// Channel `Σ_r V_rᵀ` restricted to the `rank` nonzero singular directions:
    /// `U_rᵀ Y` is a sufficient statistic, so capacity is unchanged.
    pub fn row_reduced(&self) -> Result<Self> {
        let r = self.rank().max(1);
        let v = &self.svd.v;
        Self::new(DMatrix::from_fn(r, self.n_t(), |i, j| {
            self.svd.sigmas[i] * v[(j, i)]
        }))
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.entries * x
    }
}

fn decompose(h: &DMatrix<f64>) -> Result<SvdFactors> {
    let (n_r, n_t) = h.shape();
    let n_min = n_r.min(n_t);
    let svd = h.clone().svd(true, true);
    let (u_thin, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v)) => (u, v),
        _ => {
            return Err(Error::NonConvergence {
                what: "singular value decomposition",
                partial: f64::NAN,
            })
        }
    };
    let mut order: Vec<usize> = (0..n_min).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let top = svd.singular_values[order[0]].max(0.0);
    let mut sigmas = Vec::with_capacity(n_min);
    let mut u_cols = Vec::new();
    let mut v_cols = Vec::new();
    for &k in &order {
        let s = svd.singular_values[k];
        if top > 0.0 && s >= RANK_TOLERANCE * top {
            let mut u = u_thin.column(k).into_owned();
            let mut v = v_t.row(k).transpose();
            if first_significant(&v) < 0.0 {
                u.neg_mut();
                v.neg_mut();
            }
            sigmas.push(s);
            u_cols.push(u);
            v_cols.push(v);
        } else {
            sigmas.push(0.0);
        }
    }
    let rank = u_cols.len();
    let u = complete_basis(u_cols, n_r);
    let v = complete_basis(v_cols, n_t);

    let mut sigma = DMatrix::zeros(n_r, n_t);
    for (i, &s) in sigmas.iter().enumerate() {
        sigma[(i, i)] = s;
    }
    let deviation = (&u * sigma * v.transpose() - h).norm();
    if deviation > 1e-9 * h.norm().max(f64::MIN_POSITIVE) && h.norm() > 0.0 {
        return Err(Error::NonConvergence {
            what: "singular value decomposition",
            partial: deviation,
        });
    }
    Ok(SvdFactors {
        u,
        sigmas,
        v,
        rank,
    })
}

fn first_significant(v: &DVector<f64>) -> f64 {
    let scale = v.amax();
    v.iter()
        .copied()
        .find(|x| x.abs() > 1e-10 * scale)
        .unwrap_or(0.0)
}

// Extends orthonormal columns to an orthonormal basis of R^dim with
// re-orthogonalized coordinate vectors.
fn complete_basis(mut cols: Vec<DVector<f64>>, dim: usize) -> DMatrix<f64> {
    for e in 0..dim {
        if cols.len() == dim {
            break;
        }
        let mut w = DVector::zeros(dim);
        w[e] = 1.0;
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dot(&w);
                w.axpy(-proj, c, 1.0);
            }
        }
        let norm = w.norm();
        if norm > 1e-3 {
            w /= norm;
            if first_significant(&w) < 0.0 {
                w.neg_mut();
            }
            cols.push(w);
        }
    }
    DMatrix::from_columns(&cols)
}

/// Largest deviation of `QᵀQ` from the identity.
pub fn orthogonality_defect(q: &DMatrix<f64>) -> f64 {
    let gram = q.transpose() * q;
    (gram - DMatrix::identity(q.ncols(), q.ncols())).amax()
}

fn check_dims(h: &ChannelMatrix, x: &InputSpace) -> Result<()> {
    if h.n_t() != x.dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel has {} inputs but the input space has dimension {}",
            h.n_t(),
            x.dim()
        )));
    }
    Ok(())
}

/// Ball relaxation `σ₁ ‖a‖ ≥ r_max(H Box(a))`.
pub fn r_max_ball_relaxation(h: &ChannelMatrix, halfwidths: &[f64]) -> f64 {
    h.spectral_norm() * halfwidths.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// `max_{x ∈ X} ‖Hx‖`. Exact for boxes via sign-vertex enumeration.
pub fn r_max_image(h: &ChannelMatrix, x: &InputSpace) -> Result<f64> {
    check_dims(h, x)?;
    match x {
        InputSpace::Ball { radius, .. } => Ok(h.spectral_norm() * radius),
        InputSpace::Box { halfwidths } => box_vertex_max(h, halfwidths),
    }
}

fn box_vertex_max(h: &ChannelMatrix, halfwidths: &[f64]) -> Result<f64> {
    let active: Vec<usize> = (0..halfwidths.len()).filter(|&j| halfwidths[j] > 0.0).collect();
    let m = active.len();
    if m == 0 {
        return Ok(0.0);
    }
    if m > MAX_VERTEX_DIMS {
        return Err(Error::VertexBudget {
            dims: m,
            max: MAX_VERTEX_DIMS,
            relaxation: r_max_ball_relaxation(h, halfwidths),
        });
    }
    let hm = h.entries();
    let cols: Vec<DVector<f64>> = active
        .iter()
        .map(|&j| hm.column(j) * halfwidths[j])
        .collect();
    // ±x give the same norm: fix the sign of the first active coordinate
    // and walk the remaining signs in Gray-code order.
    let mut y = cols.iter().fold(DVector::zeros(h.n_r()), |acc, c| acc + c);
    let mut signs: u64 = 0; // bit set => coordinate negated
    let mut best = (y.norm_squared(), 0u64);
    for i in 1u64..(1u64 << (m - 1)) {
        let bit = i.trailing_zeros() as usize + 1;
        let negated = signs & (1 << bit) != 0;
        let step = if negated { 2.0 } else { -2.0 };
        y.axpy(step, &cols[bit], 1.0);
        signs ^= 1 << bit;
        let n2 = y.norm_squared();
        if n2 > best.0 {
            best = (n2, signs);
        }
    }
    let exact = cols
        .iter()
        .enumerate()
        .fold(DVector::zeros(h.n_r()), |acc, (k, c)| {
            if best.1 & (1 << k) != 0 {
                acc - c
            } else {
                acc + c
            }
        });
    Ok(exact.norm())
}

/// Largest centered ball inside `X`.
pub fn r_min(x: &InputSpace) -> f64 {
    match x {
        InputSpace::Box { halfwidths } => halfwidths.iter().copied().fold(f64::INFINITY, f64::min),
        InputSpace::Ball { radius, .. } => *radius,
    }
}

/// Half-widths of the smallest axis-aligned box containing `H X`, from the
/// support function of `X` along each coordinate axis.
pub fn enclosing_box_of_image(h: &ChannelMatrix, x: &InputSpace) -> Result<Vec<f64>> {
    check_dims(h, x)?;
    let hm = h.entries();
    Ok(match x {
        InputSpace::Box { halfwidths } => (0..h.n_r())
            .map(|i| {
                hm.row(i)
                    .iter()
                    .zip(halfwidths)
                    .map(|(hij, a)| hij.abs() * a)
                    .sum()
            })
            .collect(),
        InputSpace::Ball { radius, .. } => (0..h.n_r()).map(|i| radius * hm.row(i).norm()).collect(),
    })
}

/// `ln Vol(X)`, `-inf` for degenerate spaces.
pub fn ln_volume(x: &InputSpace) -> f64 {
    match x {
        InputSpace::Box { halfwidths } => halfwidths.iter().map(|a| (2.0 * a).ln()).sum(),
        InputSpace::Ball { radius, dim } => {
            ln_ball_volume(*dim, *radius).expect("validated ball")
        }
    }
}

pub fn volume(x: &InputSpace) -> f64 {
    ln_volume(x).exp()
}

/// Packing efficiency of `H X`, exactly and via the closed-form estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PackingEfficiency {
    /// `Vol(B(r_max(HX))) / (|det H| Vol(X))` with exact `r_max` and volume.
    pub exact: f64,
    /// Boxes: `V_n(1) ‖H‖ⁿ ‖a‖ⁿ / (|det H| Π a_i)`, which drops the `2ⁿ`
    /// volume factor; balls: `‖H‖ⁿ / |det H|`.
    pub estimate: f64,
}

pub fn packing_efficiency(h: &ChannelMatrix, x: &InputSpace) -> Result<PackingEfficiency> {
    check_dims(h, x)?;
    if !h.is_invertible() {
        return Err(Error::RankDeficient(format!(
            "packing efficiency needs a square invertible channel (singular values {:?})",
            h.svd().sigmas
        )));
    }
    if x.is_degenerate() {
        return Err(Error::Degenerate("input space has zero volume".into()));
    }
    let n = h.n_r();
    let nf = n as f64;
    let ln_det = h.ln_abs_det().expect("square");
    let ln_norm = h.spectral_norm().ln();
    let ln_exact = ln_ball_volume(n, r_max_image(h, x)?)? - ln_det - ln_volume(x);
    let ln_estimate = match x {
        InputSpace::Box { halfwidths } => {
            let a_norm = halfwidths.iter().map(|a| a * a).sum::<f64>().sqrt();
            ln_ball_volume(n, 1.0)? + nf * (ln_norm + a_norm.ln())
                - ln_det
                - halfwidths.iter().map(|a| a.ln()).sum::<f64>()
        }
        InputSpace::Ball { .. } => nf * ln_norm - ln_det,
    };
    Ok(PackingEfficiency {
        exact: ln_exact.exp(),
        estimate: ln_estimate.exp(),
    })
}

/// Draws `x = V x̃` with `x̃` uniform on `Box(a)` (independent components).
#[derive(Debug, Clone)]
pub struct PrecodedSampler {
    v: DMatrix<f64>,
    halfwidths: Vec<f64>,
    rng: ChaCha8Rng,
}

impl PrecodedSampler {
    /// Draws the precoder-domain vector `x̃` and its image `V x̃`.
    pub fn draw(&mut self) -> (DVector<f64>, DVector<f64>) {
        let rng = &mut self.rng;
        let xt = DVector::from_iterator(
            self.halfwidths.len(),
            self.halfwidths.iter().map(|&a| {
                if a > 0.0 {
                    rng.random_range(-a..=a)
                } else {
                    0.0
                }
            }),
        );
        let x = &self.v * &xt;
        (xt, x)
    }
}

impl Iterator for PrecodedSampler {
    type Item = DVector<f64>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.draw().1)
    }
}

pub fn precoded_uniform_sampler(
    v: &DMatrix<f64>,
    halfwidths: &[f64],
    seed: u64,
) -> Result<PrecodedSampler> {
    if !v.is_square() || v.nrows() != halfwidths.len() {
        return Err(Error::DimensionMismatch(format!(
            "precoder is {}x{} but {} half-widths were given",
            v.nrows(),
            v.ncols(),
            halfwidths.len()
        )));
    }
    let defect = orthogonality_defect(v);
    if defect > ORTHOGONALITY_TOLERANCE {
        return Err(Error::NotOrthogonal(defect));
    }
    InputSpace::new_box(halfwidths.to_vec())?;
    Ok(PrecodedSampler {
        v: v.clone(),
        halfwidths: halfwidths.to_vec(),
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn r_max_examples() {
        let h = ChannelMatrix::diagonal(&[0.3, 0.1]).unwrap();
        let x = InputSpace::cube(2, 500.0).unwrap();
        assert!(close(r_max_image(&h, &x).unwrap(), 158.113_883_008_418_97, 1e-12));

        let id = ChannelMatrix::identity(3).unwrap();
        assert!(close(r_max_image(&id, &InputSpace::ball(4.5, 3).unwrap()).unwrap(), 4.5, 1e-12));

        let row = ChannelMatrix::from_rows(&[vec![0.6557, 0.0357, 0.8491]]).unwrap();
        let a = 7.0;
        let got = r_max_image(&row, &InputSpace::cube(3, a).unwrap()).unwrap();
        assert!(close(got, 1.5405 * a, 1e-12));
    }

    #[test]
    fn r_max_budget_error_suggests_relaxation() {
        let h = ChannelMatrix::new(DMatrix::from_element(2, 25, 0.1)).unwrap();
        match r_max_image(&h, &InputSpace::cube(25, 1.0).unwrap()) {
            Err(Error::VertexBudget { dims, relaxation, .. }) => {
                assert_eq!(dims, 25);
                assert!(close(relaxation, h.spectral_norm() * 5.0, 1e-12));
            }
            other => panic!("expected budget error, got {other:?}"),
        }
        // zero half-widths do not count against the budget
        let mut a = vec![0.0; 25];
        a[3] = 1.0;
        assert!(r_max_image(&h, &InputSpace::new_box(a).unwrap()).is_ok());
    }

    #[test]
    fn r_min_examples() {
        assert_eq!(r_min(&InputSpace::new_box(vec![1.0, 2.0, 3.0]).unwrap()), 1.0);
        assert_eq!(r_min(&InputSpace::ball(7.0, 4).unwrap()), 7.0);
        assert_eq!(r_min(&InputSpace::new_box(vec![0.0, 5.0]).unwrap()), 0.0);
    }

    #[test]
    fn enclosing_box_examples() {
        let h = ChannelMatrix::diagonal(&[-0.3, 0.1, 2.0]).unwrap();
        let x = InputSpace::new_box(vec![1.0, 2.0, 3.0]).unwrap();
        let b = enclosing_box_of_image(&h, &x).unwrap();
        assert_eq!(b, vec![0.3, 0.2, 6.0]);

        let id = ChannelMatrix::identity(2).unwrap();
        let b = enclosing_box_of_image(&id, &InputSpace::ball(3.0, 2).unwrap()).unwrap();
        assert_eq!(b, vec![3.0, 3.0]);

        let row = ChannelMatrix::from_rows(&[vec![0.6557, 0.0357, 0.8491]]).unwrap();
        let b = enclosing_box_of_image(&row, &InputSpace::ball(1.0, 3).unwrap()).unwrap();
        assert!(close(b[0], 1.073_41, 1e-5));
    }

    #[test]
    fn volumes() {
        assert!(close(volume(&InputSpace::cube(2, 1.0).unwrap()), 4.0, 1e-14));
        assert!(close(volume(&InputSpace::ball(1.0, 2).unwrap()), PI, 1e-14));
        assert!(close(volume(&InputSpace::cube(2, 500.0).unwrap()), 1e6, 1e-14));
        assert_eq!(volume(&InputSpace::new_box(vec![0.0, 3.0]).unwrap()), 0.0);
    }

    #[test]
    fn packing_efficiency_cases() {
        let id = ChannelMatrix::identity(3).unwrap();
        let p = packing_efficiency(&id, &InputSpace::ball(2.5, 3).unwrap()).unwrap();
        assert!(close(p.exact, 1.0, 1e-12));

        let id2 = ChannelMatrix::identity(2).unwrap();
        let p = packing_efficiency(&id2, &InputSpace::cube(2, 1.0).unwrap()).unwrap();
        // exact: Vol(B(√2)) / Vol([-1,1]²) = 2π / 4; estimate drops the 2ⁿ factor
        assert!(close(p.exact, PI / 2.0, 1e-12));
        assert!(close(p.estimate, 2.0 * PI, 1e-12));

        let h = ChannelMatrix::diagonal(&[2.0, 1.0]).unwrap();
        let p = packing_efficiency(&h, &InputSpace::ball(1.0, 2).unwrap()).unwrap();
        assert!(close(p.exact, 2.0, 1e-12));
        assert!(close(p.estimate, 2.0, 1e-12));

        let singular = ChannelMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            packing_efficiency(&singular, &InputSpace::cube(2, 1.0).unwrap()),
            Err(Error::RankDeficient(_))
        ));
        assert!(matches!(
            packing_efficiency(&id2, &InputSpace::new_box(vec![0.0, 1.0]).unwrap()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn svd_conventions() {
        let h = ChannelMatrix::diagonal(&[3.0, 2.0, 0.5]).unwrap();
        let s = h.svd();
        assert_eq!(s.sigmas, vec![3.0, 2.0, 0.5]);
        assert!((s.u.clone() - DMatrix::identity(3, 3)).amax() < 1e-14);
        assert!((s.v.clone() - DMatrix::identity(3, 3)).amax() < 1e-14);

        let row = ChannelMatrix::from_rows(&[vec![0.6557, 0.0357, 0.8491]]).unwrap();
        assert!(close(row.spectral_norm(), 1.073_41, 1e-5));
        assert_eq!(row.svd().v.shape(), (3, 3));
        assert!(orthogonality_defect(&row.svd().v) < 1e-12);
        assert_eq!(row.rank(), 1);

        let rank1 = ChannelMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(rank1.rank(), 1);
        assert_eq!(rank1.svd().sigmas[1], 0.0);
        assert!(!rank1.is_invertible());
    }

    #[test]
    fn row_reduction_preserves_gram() {
        let h = ChannelMatrix::from_rows(&[
            vec![0.2, -1.0],
            vec![0.7, 0.4],
            vec![-0.3, 0.9],
            vec![1.1, 0.05],
        ])
        .unwrap();
        let r = h.row_reduced().unwrap();
        assert_eq!(r.n_r(), 2);
        let g1 = h.entries().transpose() * h.entries();
        let g2 = r.entries().transpose() * r.entries();
        assert!((g1 - g2).amax() < 1e-12);
    }

    #[test]
    fn channel_validation() {
        assert!(ChannelMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(ChannelMatrix::from_rows(&[vec![f64::NAN]]).is_err());
        assert!(ChannelMatrix::from_rows(&[]).is_err());
        let h = ChannelMatrix::identity(2).unwrap();
        assert!(matches!(
            r_max_image(&h, &InputSpace::cube(3, 1.0).unwrap()),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(InputSpace::new_box(vec![-1.0]).is_err());
        assert!(InputSpace::ball(f64::INFINITY, 2).is_err());
    }

    #[test]
    fn zero_channel_is_well_formed() {
        let h = ChannelMatrix::new(DMatrix::zeros(2, 3)).unwrap();
        assert_eq!(h.rank(), 0);
        assert!(orthogonality_defect(&h.svd().u) < 1e-12);
        assert!(orthogonality_defect(&h.svd().v) < 1e-12);
        assert_eq!(r_max_image(&h, &InputSpace::cube(3, 4.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn sampler_rejects_non_orthogonal() {
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(
            precoded_uniform_sampler(&v, &[1.0, 1.0], 0),
            Err(Error::NotOrthogonal(_))
        ));
    }

    #[test]
    fn sampler_identity_stays_in_box_and_is_seeded() {
        let v = DMatrix::identity(3, 3);
        let a = [1.0, 2.0, 0.5];
        let xs: Vec<_> = precoded_uniform_sampler(&v, &a, 9).unwrap().take(1000).collect();
        for x in &xs {
            for i in 0..3 {
                assert!(x[i].abs() <= a[i]);
            }
        }
        let again: Vec<_> = precoded_uniform_sampler(&v, &a, 9).unwrap().take(1000).collect();
        assert_eq!(xs, again);
    }
}
