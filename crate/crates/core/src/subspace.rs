//! Linear subspaces of `C^d` held as orthonormal bases.
//!
//! Rank decisions use a cutoff relative to the largest singular value;
//! equality and containment are decided by projector distances against a
//! separate, looser threshold.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Numerical thresholds shared by every subspace decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff for rank decisions.
    pub eps_rank: f64,
    /// Projector-distance threshold for equality and membership.
    pub eps_eq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eps_rank: 1e-9, eps_eq: 1e-8 }
    }
}

impl Tolerances {
    pub fn new(eps_rank: f64, eps_eq: f64) -> Result<Self> {
        if !(0.0 < eps_rank && eps_rank < eps_eq && eps_eq < 1e-2) {
            return Err(invalid(format!(
                "tolerances must satisfy 0 < eps_rank < eps_eq < 1e-2 (got {eps_rank:e}, {eps_eq:e})"
            )));
        }
        Ok(Tolerances { eps_rank, eps_eq })
    }
}

/// Outcome of a tolerance-aware comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub holds: bool,
    pub residual: f64,
}

impl Verdict {
    pub(crate) fn below(residual: f64, threshold: f64) -> Self {
        Verdict { holds: residual < threshold, residual }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: CMat,
}

/// Full SVD `m = U Σ V*`: singular values in descending order, `U` square of
/// size `rows`, `V` square of size `cols`.
///
/// Backed by faer, whose complex SVD stays accurate on rank-deficient input.
pub(crate) fn svd(m: &CMat) -> (Vec<f64>, CMat, CMat) {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return (Vec::new(), CMat::identity(rows, rows), CMat::identity(cols, cols));
    }
    let fm = faer::Mat::<faer::c64>::from_fn(rows, cols, |r, c| faer::c64::new(m[(r, c)].re, m[(r, c)].im));
    let dec = fm.svd().expect("SVD converges");
    let sigma: Vec<f64> = (0..rows.min(cols)).map(|i| dec.S().column_vector()[i].re).collect();
    let (u, v) = (dec.U(), dec.V());
    let u = CMat::from_fn(rows, rows, |r, c| Complex64::new(u[(r, c)].re, u[(r, c)].im));
    let v = CMat::from_fn(cols, cols, |r, c| Complex64::new(v[(r, c)].re, v[(r, c)].im));
    (sigma, u, v)
}

/// Singular values in descending order.
pub(crate) fn singular_values(m: &CMat) -> Vec<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let fm = faer::Mat::<faer::c64>::from_fn(rows, cols, |r, c| faer::c64::new(m[(r, c)].re, m[(r, c)].im));
    let mut s = fm.singular_values().expect("SVD converges");
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Orthonormal basis for the column range of `m`.
pub(crate) fn range(m: &CMat, eps_rank: f64) -> CMat {
    range_scaled(m, eps_rank, 0.0)
}

/// Largest singular value.
pub(crate) fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Like [`range`], but singular values are judged against
/// `max(σ_max, scale)`, so a matrix that is zero up to rounding relative to
/// `scale` has empty range.
pub(crate) fn range_scaled(m: &CMat, eps_rank: f64, scale: f64) -> CMat {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return CMat::zeros(rows, 0);
    }
    let (sigma, u, _) = svd(m);
    let smax = sigma.first().copied().unwrap_or(0.0).max(scale);
    if smax == 0.0 {
        return CMat::zeros(rows, 0);
    }
    let keep = sigma.iter().filter(|&&x| x > eps_rank * smax).count();
    u.columns(0, keep).into_owned()
}

/// Orthonormal basis for the kernel of `m`; singular values are judged
/// against `max(σ_max, scale)`.
pub(crate) fn null_space(m: &CMat, eps_rank: f64, scale: f64) -> CMat {
    let cols = m.ncols();
    if cols == 0 {
        return CMat::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMat::identity(cols, cols);
    }
    let (sigma, _, v) = svd(m);
    let smax = sigma.first().copied().unwrap_or(0.0).max(scale);
    if smax == 0.0 {
        return CMat::identity(cols, cols);
    }
    let rank = sigma.iter().filter(|&&x| x > eps_rank * smax).count();
    v.columns(rank, cols - rank).into_owned()
}

fn check_same_ambient(a: &Subspace, b: &Subspace) -> Result<()> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(invalid(format!("ambient dimension mismatch: {} vs {}", a.ambient_dim(), b.ambient_dim())));
    }
    Ok(())
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace { basis: CMat::zeros(ambient_dim, 0) }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace { basis: CMat::identity(ambient_dim, ambient_dim) }
    }

    /// Span of the given vectors.
    pub fn span(ambient_dim: usize, vectors: &[CVec], tol: &Tolerances) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(invalid("empty ambient space"));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != ambient_dim) {
            return Err(invalid(format!("vector of length {} in ambient {ambient_dim}", v.len())));
        }
        let m = CMat::from_fn(ambient_dim, vectors.len(), |r, c| vectors[c][r]);
        Ok(Self::column_span(&m, tol))
    }

    /// Span of the columns of `m`.
    pub fn column_span(m: &CMat, tol: &Tolerances) -> Self {
        Subspace { basis: range(m, tol.eps_rank) }
    }

    /// Span of coordinate vectors, 0-based indices.
    pub fn coordinate(ambient_dim: usize, indices: &[usize]) -> Self {
        let mut basis = CMat::zeros(ambient_dim, indices.len());
        for (c, &i) in indices.iter().enumerate() {
            basis[(i, c)] = Complex64::new(1.0, 0.0);
        }
        Subspace { basis }
    }

    /// Accepts an externally supplied basis, verifying orthonormality.
    pub fn from_basis(basis: CMat) -> Result<Self> {
        let s = Subspace { basis };
        let defect = s.gram_defect();
        if defect >= 1e-10 {
            return Err(Error::Precondition { what: "basis is not orthonormal".into(), residual: defect });
        }
        Ok(s)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthonormal basis, one column per direction.
    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    /// `‖Q*Q − I‖_F`.
    pub fn gram_defect(&self) -> f64 {
        let k = self.dim();
        (self.basis.adjoint() * &self.basis - CMat::identity(k, k)).norm()
    }

    pub fn projector(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }

    /// `(I − P) m`.
    pub fn reject(&self, m: &CMat) -> CMat {
        m - &self.basis * (self.basis.adjoint() * m)
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &CVec) -> CVec {
        &self.basis * (self.basis.adjoint() * v)
    }

    /// `‖(I − P) v‖`.
    pub fn distance_to(&self, v: &CVec) -> f64 {
        (v - self.project(v)).norm()
    }

    /// Equality of subspaces; the residual is `‖P_A − P_B‖_F`.
    pub fn equals(&self, other: &Subspace, tol: &Tolerances) -> Result<Verdict> {
        check_same_ambient(self, other)?;
        let residual = if self.dim() == other.dim() {
            // For equal dimensions ‖P_A − P_B‖_F = √2 ‖(I − P_A) Q_B‖_F; this
            // form avoids the cancellation of subtracting two projectors.
            std::f64::consts::SQRT_2 * self.reject(&other.basis).norm()
        } else {
            (self.projector() - other.projector()).norm()
        };
        Ok(Verdict { holds: self.dim() == other.dim() && residual < tol.eps_eq, residual })
    }

    /// `other ⊆ self`; the residual is `‖(I − P_self) Q_other‖_F`.
    pub fn contains(&self, other: &Subspace, tol: &Tolerances) -> Result<Verdict> {
        check_same_ambient(self, other)?;
        Ok(Verdict::below(self.reject(&other.basis).norm(), tol.eps_eq))
    }

    pub fn intersect(&self, other: &Subspace, tol: &Tolerances) -> Result<Subspace> {
        check_same_ambient(self, other)?;
        let d = self.ambient_dim();
        let id = CMat::identity(d, d);
        let mut stacked = CMat::zeros(2 * d, d);
        stacked.view_mut((0, 0), (d, d)).copy_from(&(&id - self.projector()));
        stacked.view_mut((d, 0), (d, d)).copy_from(&(&id - other.projector()));
        Ok(Subspace { basis: null_space(&stacked, tol.eps_rank, 1.0) })
    }

    /// `self + other`.
    pub fn join(&self, other: &Subspace, tol: &Tolerances) -> Result<Subspace> {
        check_same_ambient(self, other)?;
        let mut m = CMat::zeros(self.ambient_dim(), self.dim() + other.dim());
        m.view_mut((0, 0), (self.ambient_dim(), self.dim())).copy_from(&self.basis);
        m.view_mut((0, self.dim()), (self.ambient_dim(), other.dim())).copy_from(&other.basis);
        Ok(Self::column_span(&m, tol))
    }

    /// `self ⊕ span(v)` for `v` orthogonal to `self`; `v` is normalized.
    pub(crate) fn extend_orthogonal(&self, v: &CVec) -> Subspace {
        let d = self.ambient_dim();
        let k = self.dim();
        let mut basis = CMat::zeros(d, k + 1);
        basis.view_mut((0, 0), (d, k)).copy_from(&self.basis);
        // one re-orthogonalization pass keeps the Gram defect at rounding level
        let v = v - self.project(v);
        let v = &v / Complex64::new(v.norm(), 0.0);
        basis.set_column(k, &v);
        Subspace { basis }
    }

    /// Orthogonal complement in the ambient space.
    pub fn complement(&self) -> Subspace {
        let d = self.ambient_dim();
        if self.dim() == 0 {
            return Subspace::full(d);
        }
        let mut basis = null_space(&self.basis.adjoint(), 1e-12, 1.0);
        // The kernel of Q* has exact dimension d − k; a tiny absolute cutoff
        // on an isometry is safe.
        if basis.ncols() != d - self.dim() {
            basis = null_space(&self.basis.adjoint(), 1e-6, 1.0);
        }
        Subspace { basis }
    }

    /// `V ∩ W^⊥` for `W ⊆ V` (here `self` is `V`).
    pub fn relative_complement(&self, w: &Subspace, tol: &Tolerances) -> Result<Subspace> {
        let inside = self.contains(w, tol)?;
        if !inside.holds {
            return Err(Error::Precondition {
                what: "relative complement needs W ⊆ V".into(),
                residual: inside.residual,
            });
        }
        let basis = range_scaled(&w.reject(&self.basis), tol.eps_rank, 1.0);
        let expected = self.dim() - w.dim();
        if basis.ncols() != expected {
            return Err(Error::NumericalDegeneracy {
                what: format!("relative complement has dim {} instead of {expected}", basis.ncols()),
                residual: inside.residual,
            });
        }
        Ok(Subspace { basis })
    }

    /// `span(M · Q)`.
    pub fn image(&self, m: &CMat, tol: &Tolerances) -> Result<Subspace> {
        if m.ncols() != self.ambient_dim() {
            return Err(invalid(format!("map with {} columns on ambient {}", m.ncols(), self.ambient_dim())));
        }
        Ok(Subspace { basis: range_scaled(&(m * &self.basis), tol.eps_rank, spectral_norm(m)) })
    }

    /// `{v : M v ∈ self}`.
    pub fn preimage(&self, m: &CMat, tol: &Tolerances) -> Result<Subspace> {
        if m.nrows() != self.ambient_dim() {
            return Err(invalid(format!("map with {} rows into ambient {}", m.nrows(), self.ambient_dim())));
        }
        Ok(Subspace { basis: null_space(&self.reject(m), tol.eps_rank, spectral_norm(m)) })
    }

    /// Principal angles in ascending order, `min(dim A, dim B)` of them.
    pub fn principal_angles(&self, other: &Subspace) -> Result<Vec<f64>> {
        check_same_ambient(self, other)?;
        let (small, big) = if self.dim() <= other.dim() { (self, other) } else { (other, self) };
        let k = small.dim();
        if k == 0 {
            return Ok(Vec::new());
        }
        let singular = |m: CMat| -> Vec<f64> {
            let mut s: Vec<f64> = singular_values(&m).iter().map(|x| x.clamp(0.0, 1.0)).collect();
            s.resize(k, 0.0);
            s
        };
        let mut cos = singular(big.basis.adjoint() * &small.basis);
        let mut sin = singular(big.reject(&small.basis));
        cos.sort_by(|a, b| b.total_cmp(a));
        sin.sort_by(|a, b| a.total_cmp(b));
        let mut angles: Vec<f64> = cos.iter().zip(&sin).map(|(c, s)| s.atan2(*c)).collect();
        angles.sort_by(|a, b| a.total_cmp(b));
        Ok(angles)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn unit(d: usize, i: usize) -> CVec {
        let mut v = CVec::zeros(d);
        v[i] = c(1.0);
        v
    }

    fn gaussian_vec(d: usize, rng: &mut impl Rng) -> CVec {
        CVec::from_fn(d, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
    }

    fn random_subspace(d: usize, k: usize, rng: &mut impl Rng) -> Subspace {
        let vs: Vec<_> = (0..k).map(|_| gaussian_vec(d, rng)).collect();
        Subspace::span(d, &vs, &Tolerances::default()).unwrap()
    }

    /// Singular values of `m` gathered independently of the subspace code, as
    /// the numbers above the relative cutoff.
    fn numerical_rank(m: &CMat) -> usize {
        let s = singular_values(m);
        let smax = s.iter().cloned().fold(0.0, f64::max);
        s.iter().filter(|&&x| x > 1e-9 * smax).count()
    }

    #[test]
    fn span_examples() {
        let tol = Tolerances::default();
        let s = Subspace::span(2, &[unit(2, 0), unit(2, 0) * c(2.0)], &tol).unwrap();
        assert_eq!(s.dim(), 1);
        assert!(s.equals(&Subspace::coordinate(2, &[0]), &tol).unwrap().holds);
        assert_eq!(Subspace::span(3, &[], &tol).unwrap().dim(), 0);
        assert_eq!(Subspace::span(3, &[CVec::zeros(3)], &tol).unwrap().dim(), 0);
        assert!(matches!(Subspace::span(0, &[], &tol), Err(Error::InvalidArgument(_))));

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let vs: Vec<_> = (0..5).map(|_| gaussian_vec(8, &mut rng)).collect();
        let raw = CMat::from_fn(8, 5, |r, cc| vs[cc][r]);
        let s = Subspace::span(8, &vs, &tol).unwrap();
        assert_eq!(s.dim(), numerical_rank(&raw));
        assert_eq!(s.dim(), 5);
        assert!(s.gram_defect() < 1e-12);
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerances::new(1e-9, 1e-8).is_ok());
        assert!(Tolerances::new(1e-8, 1e-9).is_err());
        assert!(Tolerances::new(0.0, 1e-8).is_err());
        assert!(Tolerances::new(1e-9, 0.1).is_err());
    }

    #[test]
    fn equals_examples() {
        let tol = Tolerances::default();
        let a = Subspace::span(3, &[unit(3, 0)], &tol).unwrap();
        let b = Subspace::span(3, &[unit(3, 0) * c(2.0)], &tol).unwrap();
        let v = a.equals(&b, &tol).unwrap();
        assert!(v.holds && v.residual < 1e-15);

        let e2 = Subspace::coordinate(3, &[1]);
        let v = a.equals(&e2, &tol).unwrap();
        assert!(!v.holds);
        assert!((v.residual - 2f64.sqrt()).abs() < 1e-14);

        assert!(a.equals(&Subspace::zero(4), &tol).is_err());
    }

    #[test]
    fn equals_after_unitary_change_of_basis() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_subspace(8, 4, &mut rng);
        let g = CMat::from_fn(4, 4, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let u = g.qr().q();
        let rotated = Subspace::column_span(&(s.basis() * u), &tol);
        let v = s.equals(&rotated, &tol).unwrap();
        assert!(v.holds, "residual {}", v.residual);
    }

    #[test]
    fn contains_examples() {
        let tol = Tolerances::default();
        let e12 = Subspace::coordinate(4, &[0, 1]);
        assert!(e12.contains(&Subspace::zero(4), &tol).unwrap().holds);
        assert!(e12.contains(&Subspace::coordinate(4, &[0]), &tol).unwrap().holds);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_subspace(8, 3, &mut rng);
        let bigger = s.join(&Subspace::span(8, &[gaussian_vec(8, &mut rng)], &tol).unwrap(), &tol).unwrap();
        assert_eq!(bigger.dim(), 4);
        assert!(!s.contains(&bigger, &tol).unwrap().holds);
        assert!(bigger.contains(&s, &tol).unwrap().holds);
    }

    #[test]
    fn intersect_examples() {
        let tol = Tolerances::default();
        let a = Subspace::coordinate(4, &[0, 1]);
        let b = Subspace::coordinate(4, &[1, 2]);
        let i = a.intersect(&b, &tol).unwrap();
        assert!(i.equals(&Subspace::coordinate(4, &[1]), &tol).unwrap().holds);
        assert!(a.intersect(&a, &tol).unwrap().equals(&a, &tol).unwrap().holds);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_subspace(8, 5, &mut rng);
        let b = random_subspace(8, 5, &mut rng);
        let sum = a.join(&b, &tol).unwrap();
        assert_eq!(sum.dim(), 8);
        assert_eq!(a.intersect(&b, &tol).unwrap().dim(), 5 + 5 - 8);
    }

    #[test]
    fn complement_examples() {
        let tol = Tolerances::default();
        let e1 = Subspace::coordinate(2, &[0]);
        assert!(e1.complement().equals(&Subspace::coordinate(2, &[1]), &tol).unwrap().holds);
        assert_eq!(Subspace::zero(5).complement().dim(), 5);
        assert_eq!(Subspace::full(5).complement().dim(), 0);
    }

    #[test]
    fn relative_complement_examples() {
        let tol = Tolerances::default();
        let v = Subspace::coordinate(3, &[0, 1]);
        let w = Subspace::coordinate(3, &[0]);
        let r = v.relative_complement(&w, &tol).unwrap();
        assert!(r.equals(&Subspace::coordinate(3, &[1]), &tol).unwrap().holds);
        assert_eq!(v.relative_complement(&v, &tol).unwrap().dim(), 0);
        assert!(matches!(w.relative_complement(&v, &tol), Err(Error::Precondition { .. })));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = random_subspace(8, 3, &mut rng);
        let extra = random_subspace(8, 2, &mut rng);
        let v = w.join(&extra, &tol).unwrap();
        let r = v.relative_complement(&w, &tol).unwrap();
        assert_eq!(r.dim(), 2);
        assert!((w.basis().adjoint() * r.basis()).norm() < 1e-12);
        assert!(r.join(&w, &tol).unwrap().equals(&v, &tol).unwrap().holds);
    }

    #[test]
    fn image_and_preimage() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = random_subspace(6, 3, &mut rng);
        let id = CMat::identity(6, 6);
        assert!(s.image(&id, &tol).unwrap().equals(&s, &tol).unwrap().holds);
        assert!(s.preimage(&id, &tol).unwrap().equals(&s, &tol).unwrap().holds);
        assert!(s.image(&CMat::identity(5, 5), &tol).is_err());

        // a rank-4 map: preimage dimension = dim(S ∩ im M) + dim ker M
        let g = CMat::from_fn(6, 4, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let h = CMat::from_fn(4, 6, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let m = &g * &h;
        let im = Subspace::column_span(&m, &tol);
        let expected = s.intersect(&im, &tol).unwrap().dim() + 2;
        assert_eq!(s.preimage(&m, &tol).unwrap().dim(), expected);
    }

    #[test]
    fn principal_angle_examples() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = random_subspace(6, 3, &mut rng);
        assert!(s.principal_angles(&s).unwrap().iter().all(|&a| a.abs() < 1e-12));
        let e1 = Subspace::coordinate(2, &[0]);
        let e2 = Subspace::coordinate(2, &[1]);
        let a = e1.principal_angles(&e2).unwrap();
        assert!((a[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
        let diag = Subspace::span(2, &[CVec::from_vec(vec![c(1.0), c(1.0)])], &tol).unwrap();
        let a = e1.principal_angles(&diag).unwrap();
        assert!((a[0] - std::f64::consts::FRAC_PI_4).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn constructed_bases_are_orthonormal(seed in any::<u64>(), d in 2usize..12, k in 0usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_subspace(d, k.min(d), &mut rng);
            prop_assert!(s.gram_defect() < 1e-12);
            prop_assert!(s.complement().gram_defect() < 1e-12);
        }

        #[test]
        fn dimension_formula(seed in any::<u64>(), d in 2usize..10, ka in 0usize..10, kb in 0usize..10) {
            let tol = Tolerances::default();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // share some directions so the intersection is nontrivial
            let common = random_subspace(d, (ka.min(kb) / 2).min(d), &mut rng);
            let a = common.join(&random_subspace(d, ka.min(d), &mut rng), &tol).unwrap();
            let b = common.join(&random_subspace(d, kb.min(d), &mut rng), &tol).unwrap();
            let inter = a.intersect(&b, &tol).unwrap();
            let sum = a.join(&b, &tol).unwrap();
            prop_assert_eq!(inter.dim() + sum.dim(), a.dim() + b.dim());
        }

        #[test]
        fn complement_is_involution(seed in any::<u64>(), d in 1usize..10, k in 0usize..10) {
            let tol = Tolerances::default();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_subspace(d, k.min(d), &mut rng);
            let cc = s.complement().complement();
            prop_assert!(s.equals(&cc, &tol).unwrap().holds);
            prop_assert!((s.basis().adjoint() * s.complement().basis()).norm() < 1e-12);
        }

        #[test]
        fn galois_connection(seed in any::<u64>(), k in 0usize..6) {
            let tol = Tolerances::default();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = CMat::from_fn(6, 4, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
            let h = CMat::from_fn(4, 6, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
            let m = &g * &h;
            let s = random_subspace(6, k, &mut rng);
            let back = s.image(&m, &tol).unwrap().preimage(&m, &tol).unwrap();
            prop_assert!(back.contains(&s, &tol).unwrap().holds);
            let ker = Subspace::zero(6).preimage(&m, &tol).unwrap();
            let with_ker = s.join(&ker, &tol).unwrap();
            let back = with_ker.image(&m, &tol).unwrap().preimage(&m, &tol).unwrap();
            prop_assert!(back.equals(&with_ker, &tol).unwrap().holds);
        }

        #[test]
        fn equals_is_an_equivalence(seed in any::<u64>()) {
            let tol = Tolerances::default();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_subspace(7, 3, &mut rng);
            let t = random_subspace(7, 3, &mut rng);
            // s, two re-spanned copies of it, and an unrelated t
            let family = [
                s.clone(),
                Subspace::column_span(&(s.basis() * c(3.0)), &tol),
                s.join(&Subspace::zero(7), &tol).unwrap(),
                t,
            ];
            for x in &family {
                prop_assert!(x.equals(x, &tol).unwrap().holds);
                for y in &family {
                    let xy = x.equals(y, &tol).unwrap();
                    prop_assert!(xy.residual < tol.eps_eq / 10.0 || xy.residual > 10.0 * tol.eps_eq);
                    prop_assert_eq!(xy.holds, y.equals(x, &tol).unwrap().holds);
                    for z in &family {
                        if xy.holds && y.equals(z, &tol).unwrap().holds {
                            prop_assert!(x.equals(z, &tol).unwrap().holds);
                        }
                    }
                }
            }
        }

        #[test]
        fn equals_residual_tracks_largest_angle(seed in any::<u64>(), eps in 1e-6f64..1e-1) {
            let tol = Tolerances::default();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = 2;
            let s = random_subspace(6, k, &mut rng);
            let noise = CMat::from_fn(6, k, |_, _| c(rng.sample::<f64, _>(StandardNormal) * eps));
            let near = Subspace::column_span(&(s.basis() + noise), &tol);
            let sin_max = near.principal_angles(&s).unwrap().last().unwrap().sin();
            let residual = s.equals(&near, &tol).unwrap().residual;
            // √2 sin θ_max ≤ ‖P_A − P_B‖_F ≤ √(2k) sin θ_max
            prop_assert!(residual >= 2f64.sqrt() * sin_max * (1.0 - 1e-9));
            prop_assert!(residual <= (2.0 * k as f64).sqrt() * sin_max * (1.0 + 1e-9));
        }
    }
}
