//! The space `E = C^N ⊕ C^N` with its two-block shift `z` and the collapse
//! map `C: E → C^2`.
//!
//! Coordinates: `e_j` is at 0-based index `j - 1`, `f_j` at `N + j - 1`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::sphereside::Line;
use crate::subspace::{CMat, CVec, Subspace, Tolerances};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative residual below which a Krylov direction counts as dependent.
const KRYLOV_DROP: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct NilpotentSpace {
    blocks: usize,
    z: CMat,
    c: CMat,
}

impl NilpotentSpace {
    /// A space with `N` = `blocks`.
    pub fn with_blocks(blocks: usize) -> Result<Self> {
        if blocks == 0 {
            return Err(invalid("N must be positive"));
        }
        let d = 2 * blocks;
        let mut z = CMat::zeros(d, d);
        let mut c = CMat::zeros(2, d);
        for j in 0..blocks {
            if j + 1 < blocks {
                // z e_{j+2} = e_{j+1}, z f_{j+2} = f_{j+1}
                z[(j, j + 1)] = ONE;
                z[(blocks + j, blocks + j + 1)] = ONE;
            }
            c[(0, j)] = ONE;
            c[(1, blocks + j)] = ONE;
        }
        Ok(NilpotentSpace { blocks, z, c })
    }

    /// The standard space for flags of length `m`: `N = m + 1`, so that
    /// `E_m ⊆ im z`.
    pub fn for_flags(m: usize) -> Self {
        Self::with_blocks(m + 1).expect("m + 1 > 0")
    }

    /// `N`.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn ambient_dim(&self) -> usize {
        2 * self.blocks
    }

    pub fn z(&self) -> &CMat {
        &self.z
    }

    pub fn collapse(&self) -> &CMat {
        &self.c
    }

    /// `z^k`, exact 0/1 entries.
    pub fn z_power(&self, k: usize) -> CMat {
        let d = self.ambient_dim();
        let mut m = CMat::zeros(d, d);
        for j in 0..self.blocks {
            if j + k < self.blocks {
                m[(j, j + k)] = ONE;
                m[(self.blocks + j, self.blocks + j + k)] = ONE;
            }
        }
        m
    }

    /// `e_j`, 1-based.
    pub fn e(&self, j: usize) -> CVec {
        assert!(j >= 1 && j <= self.blocks);
        let mut v = CVec::zeros(self.ambient_dim());
        v[j - 1] = ONE;
        v
    }

    /// `f_j`, 1-based.
    pub fn f(&self, j: usize) -> CVec {
        assert!(j >= 1 && j <= self.blocks);
        let mut v = CVec::zeros(self.ambient_dim());
        v[self.blocks + j - 1] = ONE;
        v
    }

    /// `E_k = span(e_1..e_k, f_1..f_k) = ker z^k`.
    pub fn e_sub(&self, k: usize) -> Result<Subspace> {
        if k > self.blocks {
            return Err(invalid(format!("E_{k} does not exist for N = {}", self.blocks)));
        }
        let idx: Vec<usize> = (0..k).chain(self.blocks..self.blocks + k).collect();
        Ok(Subspace::coordinate(self.ambient_dim(), &idx))
    }

    /// `E_{N-1} = im z`.
    pub fn image_of_z(&self) -> Subspace {
        self.e_sub(self.blocks - 1).expect("N - 1 <= N")
    }

    pub fn z_pow_image(&self, k: usize, s: &Subspace, tol: &Tolerances) -> Result<Subspace> {
        if k == 0 {
            return Ok(s.clone());
        }
        s.image(&self.z_power(k), tol)
    }

    /// `z^{-k} S`. When `S` is stable and inside `E_{N-k}` the result must
    /// have dimension `dim S + 2k`; a mismatch is reported as degeneracy.
    pub fn z_pow_preimage(&self, k: usize, s: &Subspace, tol: &Tolerances) -> Result<Subspace> {
        if k == 0 {
            return Ok(s.clone());
        }
        let out = s.preimage(&self.z_power(k), tol)?;
        let expected = s.dim() + 2 * k;
        if out.dim() != expected && k <= self.blocks && self.is_stable(s, tol)? {
            let room = self.e_sub(self.blocks - k)?.contains(s, tol)?;
            if room.holds {
                return Err(Error::NumericalDegeneracy {
                    what: format!("dim z^-{k} S = {} but expected {expected}", out.dim()),
                    residual: room.residual,
                });
            }
        }
        Ok(out)
    }

    /// `C(v) = (Σ a_j) e + (Σ b_j) f`.
    pub fn c_apply(&self, v: &CVec) -> CVec {
        &self.c * v
    }

    /// `(z^{-1} W) ∩ W^⊥`, two-dimensional for stable `W ⊆ im z`.
    pub fn fiber(&self, w: &Subspace, tol: &Tolerances) -> Result<Subspace> {
        let inside = self.image_of_z().contains(w, tol)?;
        if !inside.holds {
            return Err(Error::Precondition { what: "W ⊄ im z".into(), residual: inside.residual });
        }
        let pre = self.z_pow_preimage(1, w, tol)?;
        let k = pre.relative_complement(w, tol).map_err(|e| match e {
            Error::Precondition { residual, .. } => {
                Error::Precondition { what: "W is not stable under z".into(), residual }
            }
            other => other,
        })?;
        if k.dim() != 2 {
            return Err(Error::LemmaViolation {
                what: format!("dim (z^-1 W) ∩ W^⊥ = {} instead of 2", k.dim()),
                residual: 0.0,
            });
        }
        Ok(k)
    }

    /// `C` restricted to `(z^{-1} W) ∩ W^⊥`, written in the basis of `fiber`.
    /// Returns the basis and a 2×2 matrix that must be unitary.
    pub fn collapse_on_fiber(&self, w: &Subspace, tol: &Tolerances) -> Result<(Subspace, Matrix2<Complex64>)> {
        let k = self.fiber(w, tol)?;
        let cb = &self.c * k.basis();
        let m = Matrix2::new(cb[(0, 0)], cb[(0, 1)], cb[(1, 0)], cb[(1, 1)]);
        let defect = (m.adjoint() * m - Matrix2::identity()).norm();
        if defect >= tol.eps_eq {
            return Err(Error::LemmaViolation {
                what: "C is not isometric on (z^-1 W) ∩ W^⊥".into(),
                residual: defect,
            });
        }
        Ok((k, m))
    }

    /// The unit vector `u ∈ (z^{-1} W) ∩ W^⊥` with `C(u)` on the line `l`.
    pub fn c_restricted_inverse(&self, w: &Subspace, l: &Line, tol: &Tolerances) -> Result<CVec> {
        let (k, m) = self.collapse_on_fiber(w, tol)?;
        let inv = m.try_inverse().ok_or_else(|| Error::LemmaViolation {
            what: "C restricted to the fiber is singular".into(),
            residual: f64::INFINITY,
        })?;
        let x = inv * l.rep();
        let u = k.basis() * CVec::from_column_slice(x.as_slice());
        let norm = u.norm();
        Ok(u / Complex64::new(norm, 0.0))
    }

    /// `z W ⊆ W`.
    pub fn is_stable(&self, w: &Subspace, tol: &Tolerances) -> Result<bool> {
        Ok(w.contains(&w.image(&self.z, tol)?, tol)?.holds)
    }

    /// `span{v, zv, z²v, …}` over all given vectors.
    ///
    /// Built Arnoldi-style: each accepted direction is orthonormalized
    /// before `z` is applied to it, which avoids the ill-conditioning of raw
    /// power sequences. A direction is dropped only when its residual after
    /// two orthogonalization passes is at rounding level.
    pub fn krylov_closure(&self, vectors: &[CVec]) -> Result<Subspace> {
        if let Some(v) = vectors.iter().find(|v| v.len() != self.ambient_dim()) {
            return Err(invalid(format!("vector of length {} in ambient {}", v.len(), self.ambient_dim())));
        }
        let mut basis: Vec<CVec> = Vec::new();
        let mut queue: std::collections::VecDeque<CVec> = vectors.iter().cloned().collect();
        while let Some(v) = queue.pop_front() {
            let scale = v.norm();
            if scale == 0.0 {
                continue;
            }
            let mut w = v;
            for _ in 0..2 {
                for q in &basis {
                    let c = q.dotc(&w);
                    w -= q * c;
                }
            }
            let r = w.norm();
            if r <= KRYLOV_DROP * scale {
                continue;
            }
            let q = w / Complex64::new(r, 0.0);
            queue.push_back(&self.z * &q);
            basis.push(q);
        }
        let d = self.ambient_dim();
        let m = CMat::from_fn(d, basis.len(), |r, c| basis[c][r]);
        Subspace::from_basis(m)
    }

    /// Gaussian random vector in `E_k`.
    pub fn random_in_e(&self, k: usize, rng: &mut impl Rng) -> CVec {
        let mut v = CVec::zeros(self.ambient_dim());
        for j in 0..k {
            v[j] = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            v[self.blocks + j] = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
        v
    }

    /// Random stable subspace: the Krylov closure of `generators` random
    /// vectors, each drawn in `E_k` for a random depth `k` (capped at `N - 1`
    /// when `require_in_im`), joined with `E_1` when `require_ker`.
    pub fn random_stable(
        &self,
        generators: usize,
        require_ker: bool,
        require_in_im: bool,
        rng: &mut impl Rng,
        tol: &Tolerances,
    ) -> Result<Subspace> {
        let top = if require_in_im { self.blocks - 1 } else { self.blocks };
        if top == 0 {
            return Err(invalid("no room for generators inside im z"));
        }
        let vs: Vec<CVec> = (0..generators)
            .map(|_| {
                let depth = rng.random_range(1..=top);
                self.random_in_e(depth, rng)
            })
            .collect();
        let mut w = self.krylov_closure(&vs)?;
        if require_ker {
            w = w.join(&self.e_sub(1)?, tol)?;
        }
        if !self.is_stable(&w, tol)? {
            return Err(Error::NumericalDegeneracy { what: "Krylov closure is not stable".into(), residual: f64::NAN });
        }
        if require_ker {
            let v = w.contains(&self.e_sub(1)?, tol)?;
            if !v.holds {
                return Err(Error::NumericalDegeneracy { what: "ker z ⊄ W".into(), residual: v.residual });
            }
        }
        if require_in_im {
            let v = self.image_of_z().contains(&w, tol)?;
            if !v.holds {
                return Err(Error::NumericalDegeneracy { what: "W ⊄ im z".into(), residual: v.residual });
            }
        }
        Ok(w)
    }
}
