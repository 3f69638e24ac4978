//! Points of `(P^1)^m`, the subsets `S_a`, `T_a`, `A_{m,i}`, the
//! involution `I`, the forgetful maps, and the trivialization `phi` of
//! `Y_m` together with its inverse.

use nalgebra::Vector2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::flagside::Flag;
use crate::matchings::Matching;
use crate::membership::Membership;
use crate::nilspace::NilpotentSpace;
use crate::subspace::{CVec, Subspace, Tolerances, Verdict};

/// A complex line in `C^2`, held as a unit vector with arbitrary phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    rep: Vector2<Complex64>,
}

impl Line {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(norm > 1e-300 && norm.is_finite()) {
            return Err(invalid("a line needs a nonzero finite representative"));
        }
        let s = Complex64::new(1.0 / norm, 0.0);
        Ok(Line { rep: Vector2::new(alpha * s, beta * s) })
    }

    pub fn from_vec(v: &CVec) -> Result<Self> {
        if v.len() != 2 {
            return Err(invalid(format!("line representative of length {}", v.len())));
        }
        Self::new(v[0], v[1])
    }

    /// The line through `e`.
    pub fn e() -> Self {
        Line { rep: Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)) }
    }

    /// The line through `f`.
    pub fn f() -> Self {
        Line { rep: Vector2::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)) }
    }

    /// Haar-uniform random line: a normalized complex Gaussian.
    pub fn random(rng: &mut impl Rng) -> Self {
        loop {
            let a = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let b = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            if let Ok(l) = Line::new(a, b) {
                return l;
            }
        }
    }

    /// Line at polar angle `theta` and azimuth `phi` on the Riemann sphere.
    pub fn from_sphere(theta: f64, phi: f64) -> Self {
        Line::new(Complex64::new((theta / 2.0).cos(), 0.0), Complex64::from_polar((theta / 2.0).sin(), phi))
            .expect("unit representative")
    }

    /// Bloch vector `(2 Re(ᾱβ), 2 Im(ᾱβ), |α|² − |β|²)`.
    pub fn bloch(&self) -> [f64; 3] {
        let (a, b) = (self.rep[0], self.rep[1]);
        let ab = a.conj() * b;
        [2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr()]
    }

    pub fn rep(&self) -> Vector2<Complex64> {
        self.rep
    }

    pub fn rep_vec(&self) -> CVec {
        CVec::from_column_slice(self.rep.as_slice())
    }

    /// Multiplies the representative by a unit scalar; the line is unchanged.
    pub fn with_phase(&self, angle: f64) -> Self {
        Line { rep: self.rep * Complex64::from_polar(1.0, angle) }
    }

    /// Orthogonal complement, the antipode on the sphere: `(α, β) ↦ (−β̄, ᾱ)`.
    pub fn perp(&self) -> Self {
        Line { rep: Vector2::new(-self.rep[1].conj(), self.rep[0].conj()) }
    }

    /// Fubini–Study residual `√(1 − |⟨u, v⟩|²)`, evaluated as `|det[u v]|`,
    /// which is the same quantity for unit vectors without the cancellation.
    pub fn eq_residual(&self, other: &Line) -> f64 {
        (self.rep[0] * other.rep[1] - self.rep[1] * other.rep[0]).norm()
    }

    pub fn line_eq(&self, other: &Line, tol: &Tolerances) -> Verdict {
        Verdict::below(self.eq_residual(other), tol.eps_eq)
    }

    /// Hermitian product of the representatives.
    pub fn inner(&self, other: &Line) -> Complex64 {
        self.rep.dotc(&other.rep)
    }
}

/// A point of `(P^1)^m`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LineTuple(pub Vec<Line>);

impl LineTuple {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `l_j`, 1-based.
    pub fn get(&self, j: usize) -> &Line {
        &self.0[j - 1]
    }

    pub fn random(m: usize, rng: &mut impl Rng) -> Self {
        LineTuple((0..m).map(|_| Line::random(rng)).collect())
    }

    /// Worst componentwise line residual; tuples must have equal length.
    pub fn distance(&self, other: &LineTuple) -> Result<f64> {
        if self.len() != other.len() {
            return Err(invalid(format!("tuple lengths differ: {} vs {}", self.len(), other.len())));
        }
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a.eq_residual(b)).fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &LineTuple, tol: &Tolerances) -> Result<Verdict> {
        Ok(Verdict::below(self.distance(other)?, tol.eps_eq))
    }
}

/// `I`: antipode at even positions, identity at odd ones.
pub fn i_map(t: &LineTuple) -> LineTuple {
    LineTuple(t.0.iter().enumerate().map(|(idx, l)| if (idx + 1) % 2 == 0 { l.perp() } else { *l }).collect())
}

fn check_len(t: &LineTuple, a: &Matching) -> Result<()> {
    if t.len() != a.points() {
        return Err(invalid(format!("tuple of length {} for a matching of {} points", t.len(), a.points())));
    }
    Ok(())
}

/// `S_a`: `l_j = l_{s_a(j)}` for every cup.
pub fn is_in_sa(t: &LineTuple, a: &Matching, tol: &Tolerances) -> Result<Membership> {
    check_len(t, a)?;
    let mut m = Membership::new();
    for (i, j) in a.pairs() {
        m.push(format!("l_{j} = l_{i}"), t.get(j).line_eq(t.get(i), tol));
    }
    Ok(m)
}

/// `T_a`: `l_{s_a(j)} = l_j^⊥` for every cup.
pub fn is_in_ta(t: &LineTuple, a: &Matching, tol: &Tolerances) -> Result<Membership> {
    check_len(t, a)?;
    let mut m = Membership::new();
    for (i, j) in a.pairs() {
        m.push(format!("l_{j} = l_{i}^perp"), t.get(j).line_eq(&t.get(i).perp(), tol));
    }
    Ok(m)
}

fn sample_cups(a: &Matching, rng: &mut impl Rng, partner: impl Fn(&Line) -> Line) -> LineTuple {
    let mut lines = vec![Line::e(); a.points()];
    for (i, j) in a.pairs() {
        let l = Line::random(rng);
        lines[i - 1] = l;
        lines[j - 1] = partner(&l);
    }
    LineTuple(lines)
}

pub fn sample_sa(a: &Matching, rng: &mut impl Rng) -> LineTuple {
    // fresh phase on the copy so that membership tests stay phase-blind
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    sample_cups(a, rng, |l| l.with_phase(phase))
}

pub fn sample_ta(a: &Matching, rng: &mut impl Rng) -> LineTuple {
    sample_cups(a, rng, Line::perp)
}

fn check_index(m: usize, i: usize) -> Result<()> {
    if !(1 <= i && i < m) {
        return Err(invalid(format!("index i = {i} outside 1..={}", m.saturating_sub(1))));
    }
    Ok(())
}

/// `A_{m,i}`: `l_{i+1} = l_i^⊥`.
pub fn is_in_ami(t: &LineTuple, i: usize, tol: &Tolerances) -> Result<Membership> {
    check_index(t.len(), i)?;
    let mut m = Membership::new();
    m.push(format!("l_{} = l_{i}^perp", i + 1), t.get(i + 1).line_eq(&t.get(i).perp(), tol));
    Ok(m)
}

/// Random point of `A_{m,i}`.
pub fn sample_ami(m: usize, i: usize, rng: &mut impl Rng) -> Result<LineTuple> {
    check_index(m, i)?;
    let mut t = LineTuple::random(m, rng);
    t.0[i] = t.0[i - 1].perp();
    Ok(t)
}

/// Forgetful map dropping positions `i` and `i + 1`.
pub fn f_map(t: &LineTuple, i: usize) -> Result<LineTuple> {
    check_index(t.len(), i)?;
    let mut lines = t.0.clone();
    lines.drain(i - 1..=i);
    Ok(LineTuple(lines))
}

/// `f_map` restricted to `A_{m,i}`.
pub fn g_map(t: &LineTuple, i: usize, tol: &Tolerances) -> Result<LineTuple> {
    let inside = is_in_ami(t, i, tol)?;
    if !inside.holds() {
        return Err(Error::Precondition {
            what: format!("tuple is not in A_(m,{i})"),
            residual: inside.worst_residual(),
        });
    }
    f_map(t, i)
}

/// Right inverse of `g_map`: inserts `(l, l^⊥)` at positions `i, i + 1`.
pub fn g_insert(t: &LineTuple, i: usize, l: Line) -> Result<LineTuple> {
    if i == 0 || i > t.len() + 1 {
        return Err(invalid(format!("cannot insert at position {i} of a tuple of length {}", t.len())));
    }
    let mut lines = t.0.clone();
    lines.splice(i - 1..i - 1, [l, l.perp()]);
    Ok(LineTuple(lines))
}

fn check_headroom(m: usize, space: &NilpotentSpace) -> Result<()> {
    if m + 1 > space.blocks() {
        return Err(invalid(format!("flags of length {m} need N >= {}, have N = {}", m + 1, space.blocks())));
    }
    Ok(())
}

/// `phi_m` together with the worst deviation of `‖C v_j‖` from 1.
pub fn phi_with_residual(flag: &Flag, space: &NilpotentSpace, tol: &Tolerances) -> Result<(LineTuple, f64)> {
    check_headroom(flag.len(), space)?;
    flag.check_space(space)?;
    let mut lines = Vec::with_capacity(flag.len());
    let mut worst = 0.0f64;
    for j in 1..=flag.len() {
        let step = flag.get(j).relative_complement(flag.get(j - 1), tol)?;
        if step.dim() != 1 {
            return Err(Error::Precondition {
                what: format!("L_{j} ∩ L_{}^⊥ has dim {}", j - 1, step.dim()),
                residual: 1.0,
            });
        }
        let v = step.basis().column(0).into_owned();
        let c = space.c_apply(&v);
        let deviation = (c.norm() - v.norm()).abs();
        if deviation >= tol.eps_eq {
            return Err(Error::LemmaViolation {
                what: format!("C is not isometric on L_{j} ∩ L_{}^⊥", j - 1),
                residual: deviation,
            });
        }
        worst = worst.max(deviation);
        lines.push(Line::from_vec(&c)?);
    }
    Ok((LineTuple(lines), worst))
}

/// `phi_m(L_1, .., L_m) = (C(L_1), C(L_2 ∩ L_1^⊥), .., C(L_m ∩ L_{m−1}^⊥))`.
pub fn phi(flag: &Flag, space: &NilpotentSpace, tol: &Tolerances) -> Result<LineTuple> {
    phi_with_residual(flag, space, tol).map(|(t, _)| t)
}

/// Inverse of `phi`: `L_j = L_{j−1} ⊕ span(u_j)` with `u_j` the unique unit
/// vector in `(z^{-1} L_{j−1}) ∩ L_{j−1}^⊥` over `l_j`.
pub fn phi_inv(t: &LineTuple, space: &NilpotentSpace, tol: &Tolerances) -> Result<Flag> {
    check_headroom(t.len(), space)?;
    let mut spaces: Vec<Subspace> = Vec::with_capacity(t.len());
    let mut prev = Subspace::zero(space.ambient_dim());
    for l in &t.0 {
        let u = space.c_restricted_inverse(&prev, l, tol)?;
        let next = prev.extend_orthogonal(&u);
        spaces.push(next.clone());
        prev = next;
    }
    Flag::new(space.ambient_dim(), spaces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flagside;
    use crate::matchings::enumerate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn line_eq_examples() {
        let e = Line::e();
        let ei = Line::new(Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)).unwrap();
        assert!(e.line_eq(&ei, &tol()).holds);
        let v = e.line_eq(&Line::f(), &tol());
        assert!(!v.holds);
        assert_eq!(v.residual, 1.0);
        let mut r = rng(1);
        for _ in 0..100 {
            let l = Line::random(&mut r);
            assert!(l.line_eq(&l.perp().perp(), &tol()).holds);
            assert!(l.inner(&l.perp()).norm() < 1e-15);
            assert!(l.eq_residual(&l.with_phase(1.3)) < 1e-15);
        }
        assert!(Line::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn residual_agrees_with_fubini_study() {
        let mut r = rng(9);
        for _ in 0..200 {
            let (a, b) = (Line::random(&mut r), Line::random(&mut r));
            let fs = (1.0 - a.inner(&b).norm_sqr()).max(0.0).sqrt();
            assert!((a.eq_residual(&b) - fs).abs() < 1e-7 * fs.max(1e-8));
        }
    }

    #[test]
    fn perp_examples() {
        assert!(Line::e().perp().line_eq(&Line::f(), &tol()).holds);
        assert!(Line::f().perp().line_eq(&Line::e(), &tol()).holds);
    }

    #[test]
    fn i_map_examples() {
        let t = LineTuple(vec![Line::e(), Line::f()]);
        let it = i_map(&t);
        assert!(it.approx_eq(&LineTuple(vec![Line::e(), Line::e()]), &tol()).unwrap().holds);
        let mut r = rng(2);
        for m in 0..7 {
            let t = LineTuple::random(m, &mut r);
            assert!(i_map(&i_map(&t)).approx_eq(&t, &tol()).unwrap().holds);
            let it = i_map(&t);
            for j in (1..=m).step_by(2) {
                assert_eq!(it.get(j), t.get(j));
            }
        }
    }

    #[test]
    fn sa_ta_examples() {
        let a = Matching::from_pairs(&[(1, 2)]).unwrap();
        let ee = LineTuple(vec![Line::e(), Line::e()]);
        let ef = LineTuple(vec![Line::e(), Line::f()]);
        assert!(is_in_sa(&ee, &a, &tol()).unwrap().holds());
        assert!(is_in_ta(&ef, &a, &tol()).unwrap().holds());
        assert!(!is_in_sa(&ef, &a, &tol()).unwrap().holds());
        assert!(is_in_sa(&LineTuple(vec![Line::e()]), &a, &tol()).is_err());
    }

    #[test]
    fn samplers_and_exchange() {
        let mut r = rng(3);
        for n in 1..=4 {
            let all = enumerate(n).unwrap();
            for a in &all {
                for _ in 0..10 {
                    let s = sample_sa(a, &mut r);
                    let t = sample_ta(a, &mut r);
                    assert!(is_in_sa(&s, a, &tol()).unwrap().worst_residual() < 1e-12);
                    assert!(is_in_ta(&t, a, &tol()).unwrap().worst_residual() < 1e-12);
                    assert!(is_in_ta(&i_map(&s), a, &tol()).unwrap().holds());
                    assert!(is_in_sa(&i_map(&t), a, &tol()).unwrap().holds());
                    for b in all.iter().filter(|b| *b != a) {
                        assert!(!is_in_sa(&s, b, &tol()).unwrap().holds());
                    }
                }
            }
        }
    }

    #[test]
    fn left_endpoint_marginal_is_uniform() {
        // Archimedes: the height of a uniform point on S^2 is uniform on
        // [-1, 1]. Coarse χ² over 10 bins; 27.88 is the 0.999 quantile at 9 dof.
        let a = Matching::from_pairs(&[(1, 4), (2, 3)]).unwrap();
        let mut r = rng(4);
        let samples = 5000;
        for pos in a.left_endpoints() {
            let mut bins = [0usize; 10];
            for _ in 0..samples {
                let h = sample_sa(&a, &mut r).get(pos).bloch()[2];
                bins[(((h + 1.0) / 2.0 * 10.0) as usize).min(9)] += 1;
            }
            let expected = samples as f64 / 10.0;
            let chi2: f64 = bins.iter().map(|&b| (b as f64 - expected).powi(2) / expected).sum();
            assert!(chi2 < 27.88, "chi2 = {chi2} at position {pos}");
        }
    }

    #[test]
    fn ami_and_forgetful_maps() {
        let t = LineTuple(vec![Line::e(), Line::f()]);
        assert!(is_in_ami(&t, 1, &tol()).unwrap().holds());
        assert!(g_map(&t, 1, &tol()).unwrap().is_empty());
        let mut r = rng(5);
        let t = LineTuple::random(6, &mut r);
        assert_eq!(f_map(&t, 3).unwrap().len(), 4);
        assert!(matches!(g_map(&t, 3, &tol()), Err(Error::Precondition { .. })));
        assert!(f_map(&t, 6).is_err());
        assert!(f_map(&t, 0).is_err());
        let s = sample_ami(6, 3, &mut r).unwrap();
        let back = g_insert(&g_map(&s, 3, &tol()).unwrap(), 3, *s.get(3)).unwrap();
        assert!(back.approx_eq(&s, &tol()).unwrap().holds);
    }

    #[test]
    fn phi_of_the_simplest_flag() {
        let space = NilpotentSpace::for_flags(2);
        let l1 = Subspace::span(space.ambient_dim(), &[space.e(1)], &tol()).unwrap();
        let flag = Flag::new(space.ambient_dim(), vec![l1, space.e_sub(1).unwrap()]).unwrap();
        let t = phi(&flag, &space, &tol()).unwrap();
        assert!(t.approx_eq(&LineTuple(vec![Line::e(), Line::f()]), &tol()).unwrap().holds);
    }

    #[test]
    fn phi_inv_single_step() {
        let space = NilpotentSpace::for_flags(1);
        let flag = phi_inv(&LineTuple(vec![Line::e()]), &space, &tol()).unwrap();
        let e1 = Subspace::span(space.ambient_dim(), &[space.e(1)], &tol()).unwrap();
        assert!(flag.get(1).equals(&e1, &tol()).unwrap().holds);
    }

    #[test]
    fn phi_round_trips() {
        let mut r = rng(6);
        for m in 1..=10 {
            let space = NilpotentSpace::for_flags(m);
            for _ in 0..5 {
                let t = LineTuple::random(m, &mut r);
                let flag = phi_inv(&t, &space, &tol()).unwrap();
                assert!(flagside::is_in_ym(&flag, &space, &tol()).unwrap().holds());
                assert!(phi(&flag, &space, &tol()).unwrap().distance(&t).unwrap() < 1e-9, "m = {m}");

                let y = flagside::sample_ym(m, &space, &mut r, &tol()).unwrap();
                let back = phi_inv(&phi(&y, &space, &tol()).unwrap(), &space, &tol()).unwrap();
                assert!(y.distance(&back).unwrap() < 1e-8, "m = {m}");
            }
        }
    }

    #[test]
    fn phi_needs_headroom() {
        let space = NilpotentSpace::with_blocks(2).unwrap();
        assert!(phi_inv(&LineTuple(vec![Line::e(), Line::f()]), &space, &tol()).is_err());
    }
}
