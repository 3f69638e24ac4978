//! Flags of `z`-stable subspaces: `Y_m`, the Springer fiber inside
//! `Y_{2n}`, the components `K_a`, the subvarieties `X_{m,i}` and the
//! contraction `q_{m,i}`, with samplers for each.
//!
//! `L_0` is always the zero subspace. Indices are 1-based.

use rand::Rng;
use rand_distr::StandardNormal;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::matchings::Matching;
use crate::membership::Membership;
use crate::nilspace::NilpotentSpace;
use crate::sphereside::Line;
use crate::subspace::{CMat, CVec, Subspace, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct Flag {
    origin: Subspace,
    spaces: Vec<Subspace>,
}

impl Flag {
    pub fn new(ambient_dim: usize, spaces: Vec<Subspace>) -> Result<Self> {
        if let Some(s) = spaces.iter().find(|s| s.ambient_dim() != ambient_dim) {
            return Err(invalid(format!("subspace in ambient {} inside a flag over {ambient_dim}", s.ambient_dim())));
        }
        Ok(Flag { origin: Subspace::zero(ambient_dim), spaces })
    }

    pub fn empty(ambient_dim: usize) -> Self {
        Flag { origin: Subspace::zero(ambient_dim), spaces: Vec::new() }
    }

    /// `m`.
    pub fn len(&self) -> usize {
        self.spaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spaces.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.origin.ambient_dim()
    }

    /// `L_j` for `0 <= j <= m`.
    pub fn get(&self, j: usize) -> &Subspace {
        if j == 0 {
            &self.origin
        } else {
            &self.spaces[j - 1]
        }
    }

    pub fn spaces(&self) -> &[Subspace] {
        &self.spaces
    }

    pub(crate) fn check_space(&self, space: &NilpotentSpace) -> Result<()> {
        if self.ambient_dim() != space.ambient_dim() {
            return Err(invalid(format!(
                "flag over ambient {} used with a space of ambient {}",
                self.ambient_dim(),
                space.ambient_dim()
            )));
        }
        Ok(())
    }

    /// Worst `‖P_{L_j} − P_{L'_j}‖_F` over `j`.
    pub fn distance(&self, other: &Flag) -> Result<f64> {
        if self.len() != other.len() {
            return Err(invalid(format!("flag lengths differ: {} vs {}", self.len(), other.len())));
        }
        let mut worst = 0.0f64;
        for (a, b) in self.spaces.iter().zip(&other.spaces) {
            worst = worst.max(a.equals(b, &Tolerances::default())?.residual);
        }
        Ok(worst)
    }

    /// Copy with `L_j` replaced by a random perturbation of relative size
    /// `delta` (Frobenius norm of the basis offset).
    pub fn perturbed(&self, j: usize, delta: f64, rng: &mut impl Rng) -> Result<Flag> {
        if j == 0 || j > self.len() {
            return Err(invalid(format!("no subspace L_{j} in a flag of length {}", self.len())));
        }
        let l = self.get(j);
        // generic direction outside L_j
        let noise = l.reject(&CMat::from_fn(l.ambient_dim(), l.dim(), |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        }));
        let scale = delta / noise.norm();
        let moved = l.basis() + noise * Complex64::new(scale, 0.0);
        let mut spaces = self.spaces.clone();
        spaces[j - 1] = Subspace::column_span(&moved, &Tolerances::default());
        Flag::new(self.ambient_dim(), spaces)
    }
}

/// Which description of `K_a` to test against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KaVariant {
    /// `Y_{2n}` with `L_{s_a(j)} = z^{-d_a(j)} L_{j−1}`.
    FullZ,
    /// The Springer fiber with `L_{s_a(j)} = z_n^{-d_a(j)} L_{j−1}`, where `z_n`
    /// is `z` restricted to `E_n`.
    RestrictedZn,
}

/// Conditions of `Y_m`: `dim L_j = j`, `L_{j−1} ⊆ L_j`, `z L_j ⊆ L_{j−1}`.
pub fn is_in_ym(flag: &Flag, space: &NilpotentSpace, tol: &Tolerances) -> Result<Membership> {
    flag.check_space(space)?;
    let mut m = Membership::new();
    for j in 1..=flag.len() {
        let (prev, cur) = (flag.get(j - 1), flag.get(j));
        m.push_exact(format!("dim L_{j} = {j}"), cur.dim() == j);
        m.push(format!("L_{} ⊆ L_{j}", j - 1), cur.contains(prev, tol)?);
        let image = cur.image(space.z(), tol)?;
        m.push(format!("z L_{j} ⊆ L_{}", j - 1), prev.contains(&image, tol)?);
    }
    Ok(m)
}

fn check_even(flag: &Flag, n: usize) -> Result<()> {
    if flag.len() != 2 * n {
        return Err(invalid(format!("flag of length {} tested against n = {n}", flag.len())));
    }
    Ok(())
}

/// `Y_{2n}` together with `L_{2n} = E_n`.
pub fn is_in_springer(flag: &Flag, space: &NilpotentSpace, n: usize, tol: &Tolerances) -> Result<Membership> {
    check_even(flag, n)?;
    let mut m = is_in_ym(flag, space, tol)?;
    m.push(format!("L_{} = E_{n}", 2 * n), flag.get(2 * n).equals(&space.e_sub(n)?, tol)?);
    Ok(m)
}

/// Membership in the component `K_a`.
pub fn is_in_ka(
    flag: &Flag,
    space: &NilpotentSpace,
    a: &Matching,
    variant: KaVariant,
    tol: &Tolerances,
) -> Result<Membership> {
    let n = a.n();
    check_even(flag, n)?;
    let mut m = match variant {
        KaVariant::FullZ => is_in_ym(flag, space, tol)?,
        KaVariant::RestrictedZn => is_in_springer(flag, space, n, tol)?,
    };
    let en = space.e_sub(n)?;
    for (i, s) in a.pairs() {
        let d = a.d(i)?;
        let pre = space.z_pow_preimage(d, flag.get(i - 1), tol)?;
        let target = match variant {
            KaVariant::FullZ => pre,
            KaVariant::RestrictedZn => pre.intersect(&en, tol)?,
        };
        m.push(format!("L_{s} = z^-{d} L_{}", i - 1), flag.get(s).equals(&target, tol)?);
    }
    Ok(m)
}

/// Random unit vector in `(z^{-1} W) ∩ W^⊥`, drawn without reference to `C`.
fn random_fiber_vector(space: &NilpotentSpace, w: &Subspace, rng: &mut impl Rng, tol: &Tolerances) -> Result<CVec> {
    let k = space.fiber(w, tol)?;
    let coeffs = CVec::from_fn(k.dim(), |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let v = k.basis() * coeffs;
    let norm = v.norm();
    Ok(v / Complex64::new(norm, 0.0))
}

fn ensure_headroom(m: usize, space: &NilpotentSpace) -> Result<()> {
    if m + 1 > space.blocks() {
        return Err(invalid(format!("flags of length {m} need N >= {}, have N = {}", m + 1, space.blocks())));
    }
    Ok(())
}

/// Random point of `Y_m`: each step adds a Gaussian direction of the
/// two-dimensional fiber `(z^{-1} L_{j−1}) ∩ L_{j−1}^⊥`.
pub fn sample_ym(m: usize, space: &NilpotentSpace, rng: &mut impl Rng, tol: &Tolerances) -> Result<Flag> {
    ensure_headroom(m, space)?;
    let mut spaces = Vec::with_capacity(m);
    let mut prev = Subspace::zero(space.ambient_dim());
    for _ in 0..m {
        let v = random_fiber_vector(space, &prev, rng, tol)?;
        let next = prev.extend_orthogonal(&v);
        spaces.push(next.clone());
        prev = next;
    }
    Flag::new(space.ambient_dim(), spaces)
}

/// Random point of `K_a`: a uniform line at each left endpoint, the forced
/// preimage at each right endpoint.
pub fn sample_ka(a: &Matching, space: &NilpotentSpace, rng: &mut impl Rng, tol: &Tolerances) -> Result<Flag> {
    let m = a.points();
    ensure_headroom(m, space)?;
    let mut spaces: Vec<Subspace> = Vec::with_capacity(m);
    let zero = Subspace::zero(space.ambient_dim());
    for j in 1..=m {
        let prev = if j == 1 { &zero } else { &spaces[j - 2] };
        let next = if a.is_left_endpoint(j) {
            let u = space.c_restricted_inverse(prev, &Line::random(rng), tol)?;
            prev.extend_orthogonal(&u)
        } else {
            let i = a.partner(j)?;
            let base = if i == 1 { &zero } else { &spaces[i - 2] };
            let forced = space.z_pow_preimage(a.d(i)?, base, tol)?;
            let inside = forced.contains(prev, tol)?;
            if !inside.holds {
                return Err(Error::SamplerAssumption {
                    what: format!("L_{} ⊄ z^-{} L_{}", j - 1, a.d(i)?, i - 1),
                    residual: inside.residual,
                });
            }
            if forced.dim() != j {
                return Err(Error::SamplerAssumption {
                    what: format!("forced L_{j} has dim {}", forced.dim()),
                    residual: inside.residual,
                });
            }
            forced
        };
        spaces.push(next);
    }
    let flag = Flag::new(space.ambient_dim(), spaces)?;
    let check = is_in_ka(&flag, space, a, KaVariant::FullZ, tol)?;
    if !check.holds() {
        return Err(Error::SamplerAssumption {
            what: format!("sample not in K_a: {check}"),
            residual: check.worst_residual(),
        });
    }
    Ok(flag)
}

fn check_index(m: usize, i: usize) -> Result<()> {
    if !(1 <= i && i < m) {
        return Err(invalid(format!("index i = {i} outside 1..={}", m.saturating_sub(1))));
    }
    Ok(())
}

/// `Y_m` together with `L_{i+1} = z^{-1} L_{i−1}`.
pub fn is_in_xmi(flag: &Flag, space: &NilpotentSpace, i: usize, tol: &Tolerances) -> Result<Membership> {
    check_index(flag.len(), i)?;
    let mut m = is_in_ym(flag, space, tol)?;
    let pre = space.z_pow_preimage(1, flag.get(i - 1), tol)?;
    m.push(format!("L_{} = z^-1 L_{}", i + 1, i - 1), flag.get(i + 1).equals(&pre, tol)?);
    Ok(m)
}

/// Random point of `X_{m,i}`: free choices everywhere except step `i + 1`.
pub fn sample_xmi(m: usize, i: usize, space: &NilpotentSpace, rng: &mut impl Rng, tol: &Tolerances) -> Result<Flag> {
    check_index(m, i)?;
    ensure_headroom(m, space)?;
    let mut spaces: Vec<Subspace> = Vec::with_capacity(m);
    let zero = Subspace::zero(space.ambient_dim());
    for j in 1..=m {
        let prev = if j == 1 { &zero } else { &spaces[j - 2] };
        let next = if j == i + 1 {
            let base = if i == 1 { &zero } else { &spaces[i - 2] };
            space.z_pow_preimage(1, base, tol)?
        } else {
            prev.extend_orthogonal(&random_fiber_vector(space, prev, rng, tol)?)
        };
        spaces.push(next);
    }
    Flag::new(space.ambient_dim(), spaces)
}

/// `q_{m,i}(L) = (L_1, .., L_{i−1}, z L_{i+2}, .., z L_m)`.
pub fn q_map(flag: &Flag, space: &NilpotentSpace, i: usize, tol: &Tolerances) -> Result<Flag> {
    let inside = is_in_xmi(flag, space, i, tol)?;
    if !inside.holds() {
        return Err(Error::Precondition {
            what: format!("flag not in X_(m,{i}): {inside}"),
            residual: inside.worst_residual(),
        });
    }
    let mut spaces: Vec<Subspace> = flag.spaces()[..i - 1].to_vec();
    for j in i + 2..=flag.len() {
        spaces.push(flag.get(j).image(space.z(), tol)?);
    }
    let out = Flag::new(space.ambient_dim(), spaces)?;
    let ym = is_in_ym(&out, space, tol)?;
    if !ym.holds() {
        return Err(Error::NumericalDegeneracy {
            what: format!("q image not in Y_(m-2): {ym}"),
            residual: ym.worst_residual(),
        });
    }
    Ok(out)
}

/// Random point of the fiber `q_{m,i}^{-1}(flag_prime)`, `m = len + 2`.
pub fn q_fiber_sample(
    flag_prime: &Flag,
    i: usize,
    space: &NilpotentSpace,
    rng: &mut impl Rng,
    tol: &Tolerances,
) -> Result<Flag> {
    let m = flag_prime.len() + 2;
    check_index(m, i)?;
    ensure_headroom(m, space)?;
    let base = is_in_ym(flag_prime, space, tol)?;
    if !base.holds() {
        return Err(Error::Precondition {
            what: format!("base flag not in Y_(m-2): {base}"),
            residual: base.worst_residual(),
        });
    }
    let mut spaces: Vec<Subspace> = flag_prime.spaces()[..i - 1].to_vec();
    let below = flag_prime.get(i - 1).clone();
    spaces.push(below.extend_orthogonal(&random_fiber_vector(space, &below, rng, tol)?));
    spaces.push(space.z_pow_preimage(1, &below, tol)?);
    for j in i + 2..=m {
        spaces.push(space.z_pow_preimage(1, flag_prime.get(j - 2), tol)?);
    }
    let flag = Flag::new(space.ambient_dim(), spaces)?;
    let back = q_map(&flag, space, i, tol)?;
    let gap = back.distance(flag_prime)?;
    if gap >= tol.eps_eq {
        return Err(Error::NumericalDegeneracy { what: "q does not return the base flag".into(), residual: gap });
    }
    Ok(flag)
}
