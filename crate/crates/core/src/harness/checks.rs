//! The individual checks. Each one samples its inputs independently of the
//! map under test wherever an independent sampler exists.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{run_cases, Case, CheckConfig, CheckResult, Measure};
use crate::error::Result;
use crate::flagside::{self, KaVariant};
use crate::matchings::{enumerate, Matching};
use crate::nilspace::NilpotentSpace;
use crate::sphereside::{self, Line};
use crate::subspace::{CVec, Subspace};

/// Check names in dependency order.
pub const CHECK_NAMES: &[&str] = &[
    "isometry",
    "key_lemma",
    "phi_bijection",
    "x_to_a",
    "commute",
    "zn_vs_z",
    "q_pullback",
    "g_pullback",
    "main",
    "sensitivity",
];

/// Checks whose failure undermines `main`.
pub const MAIN_PREREQUISITES: &[&str] =
    &["isometry", "key_lemma", "phi_bijection", "x_to_a", "commute", "zn_vs_z", "q_pullback", "g_pullback"];

const MAIN_CAVEAT: &str = "samples verify pointwise containment in both directions and bijectivity of phi, \
                           not continuity of the restricted maps";

/// Perturbation size used by the `sensitivity` check.
pub const FAULT_DELTA: f64 = 1e-3;

pub fn run_named(name: &str, cfg: &CheckConfig) -> CheckResult {
    match name {
        "isometry" => check_isometry(cfg),
        "key_lemma" => check_key_lemma(cfg),
        "phi_bijection" => check_phi_bijection(cfg),
        "x_to_a" => check_x_to_a(cfg),
        "commute" => check_commute(cfg),
        "zn_vs_z" => check_zn_vs_z(cfg),
        "q_pullback" => check_q_pullback(cfg),
        "g_pullback" => check_g_pullback(cfg),
        "main" => check_main(cfg),
        "sensitivity" => check_sensitivity(cfg, FAULT_DELTA),
        other => panic!("unknown check {other}"),
    }
}

fn single() -> Vec<Case<()>> {
    vec![Case { label: "all".into(), data: () }]
}

fn random_unit_in(s: &Subspace, rng: &mut impl Rng) -> CVec {
    let coeffs = CVec::from_fn(s.dim(), |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let v = s.basis() * coeffs;
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

fn matchings(n: usize) -> Vec<Matching> {
    enumerate(n).expect("n within the enumeration cap")
}

fn matching_cases(n: usize) -> Vec<Case<Matching>> {
    matchings(n).into_iter().map(|a| Case { label: a.to_parens(), data: a }).collect()
}

fn adjacent_cases(n: usize) -> Vec<Case<(Matching, usize)>> {
    matchings(n)
        .into_iter()
        .flat_map(|a| {
            a.adjacent_pairs()
                .into_iter()
                .map(move |i| Case { label: format!("{} i={i}", a.to_parens()), data: (a.clone(), i) })
        })
        .collect()
}

fn index_cases(m: usize) -> Vec<Case<usize>> {
    (1..m).map(|i| Case { label: format!("m={m} i={i}"), data: i }).collect()
}

/// `C` is isometric on `(z^{-1} W) ∩ W^⊥` for stable `W ⊆ im z`.
pub fn check_isometry(cfg: &CheckConfig) -> CheckResult {
    let space = NilpotentSpace::for_flags(2 * cfg.n);
    let tol = cfg.tol;
    run_cases("isometry", cfg, &single(), |_, rng| {
        let g = rng.random_range(1..=2);
        let w = space.random_stable(g, false, true, rng, &tol)?;
        isometry_trial(&space, &w, rng, &tol)
    })
}

pub fn isometry_trial(
    space: &NilpotentSpace,
    w: &Subspace,
    rng: &mut impl Rng,
    tol: &crate::subspace::Tolerances,
) -> Result<Vec<Measure>> {
    let k = space.fiber(w, tol)?;
    let mut worst = 0.0f64;
    let mut vectors: Vec<CVec> = (0..k.dim()).map(|c| k.basis().column(c).into_owned()).collect();
    vectors.extend((0..4).map(|_| random_unit_in(&k, rng)));
    for v in &vectors {
        for u in &vectors {
            let lhs = v.dotc(u);
            let rhs = space.c_apply(v).dotc(&space.c_apply(u));
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(vec![Measure::flag("fiber_dim", k.dim() == 2), Measure::below("isometry", worst, tol.eps_eq)])
}

/// `z` carries `(z^{-1} W) ∩ W^⊥` onto `W ∩ (zW)^⊥` and `C z = C` on it.
pub fn check_key_lemma(cfg: &CheckConfig) -> CheckResult {
    let space = NilpotentSpace::for_flags(2 * cfg.n);
    let tol = cfg.tol;
    run_cases("key_lemma", cfg, &single(), |_, rng| {
        let g = rng.random_range(1..=2);
        let w = space.random_stable(g, true, true, rng, &tol)?;
        key_lemma_trial(&space, &w, rng, &tol)
    })
}

pub fn key_lemma_trial(
    space: &NilpotentSpace,
    w: &Subspace,
    rng: &mut impl Rng,
    tol: &crate::subspace::Tolerances,
) -> Result<Vec<Measure>> {
    let source = space.fiber(w, tol)?;
    let moved = source.image(space.z(), tol)?;
    let zw = w.image(space.z(), tol)?;
    let target = w.relative_complement(&zw, tol)?;
    let subspace = moved.equals(&target, tol)?;
    let mut worst = 0.0f64;
    let mut vectors: Vec<CVec> = (0..source.dim()).map(|c| source.basis().column(c).into_owned()).collect();
    vectors.extend((0..2).map(|_| random_unit_in(&source, rng)));
    for u in &vectors {
        let czu = space.c_apply(&(space.z() * u));
        worst = worst.max((czu - space.c_apply(u)).norm());
    }
    Ok(vec![
        Measure::flag("image_dim", moved.dim() == 2 && target.dim() == 2),
        Measure::below("subspace", subspace.residual, tol.eps_eq),
        Measure::below("collapse", worst, tol.eps_eq),
    ])
}

/// Both compositions of `phi` and `phi_inv` are the identity, `m = 2n`.
pub fn check_phi_bijection(cfg: &CheckConfig) -> CheckResult {
    check_phi_bijection_m(cfg, 2 * cfg.n)
}

pub fn check_phi_bijection_m(cfg: &CheckConfig, m: usize) -> CheckResult {
    let space = NilpotentSpace::for_flags(m);
    let tol = cfg.tol;
    run_cases("phi_bijection", cfg, &single(), |_, rng| {
        let t = sphereside::LineTuple::random(m, rng);
        let flag = sphereside::phi_inv(&t, &space, &tol)?;
        let ym = flagside::is_in_ym(&flag, &space, &tol)?;
        let (back, isometry) = sphereside::phi_with_residual(&flag, &space, &tol)?;
        let tuple_gap = back.distance(&t)?;

        let y = flagside::sample_ym(m, &space, rng, &tol)?;
        let again = sphereside::phi_inv(&sphereside::phi(&y, &space, &tol)?, &space, &tol)?;
        let flag_gap = again.distance(&y)?;
        Ok(vec![
            Measure::below("phi_inv_in_ym", ym.worst_residual(), tol.eps_eq),
            Measure::below("phi_norm", isometry, tol.eps_eq),
            Measure::below("phi_after_inv", tuple_gap, tol.eps_eq),
            Measure::below("inv_after_phi", flag_gap, tol.eps_eq),
        ])
    })
}

/// `phi(X_{m,i}) ⊆ A_{m,i}` and `phi_inv(A_{m,i}) ⊆ X_{m,i}` for every `i`.
pub fn check_x_to_a(cfg: &CheckConfig) -> CheckResult {
    check_x_to_a_m(cfg, 2 * cfg.n)
}

pub fn check_x_to_a_m(cfg: &CheckConfig, m: usize) -> CheckResult {
    let space = NilpotentSpace::for_flags(m);
    let tol = cfg.tol;
    run_cases("x_to_a", cfg, &index_cases(m), |&i, rng| {
        let flag = flagside::sample_xmi(m, i, &space, rng, &tol)?;
        let forward = sphereside::is_in_ami(&sphereside::phi(&flag, &space, &tol)?, i, &tol)?;
        let t = sphereside::sample_ami(m, i, rng)?;
        let backward = flagside::is_in_xmi(&sphereside::phi_inv(&t, &space, &tol)?, &space, i, &tol)?;
        Ok(vec![
            Measure::below("x_to_a", forward.worst_residual(), tol.eps_eq),
            Measure::below("a_to_x", backward.worst_residual(), tol.eps_eq),
        ])
    })
}

/// `g ∘ psi = phi ∘ q` on `X_{m,i}`.
pub fn check_commute(cfg: &CheckConfig) -> CheckResult {
    check_commute_m(cfg, 2 * cfg.n)
}

pub fn check_commute_m(cfg: &CheckConfig, m: usize) -> CheckResult {
    let space = NilpotentSpace::for_flags(m);
    let tol = cfg.tol;
    run_cases("commute", cfg, &index_cases(m), |&i, rng| {
        let flag = flagside::sample_xmi(m, i, &space, rng, &tol)?;
        let lhs = sphereside::g_map(&sphereside::phi(&flag, &space, &tol)?, i, &tol)?;
        let rhs = sphereside::phi(&flagside::q_map(&flag, &space, i, &tol)?, &space, &tol)?;
        Ok(vec![Measure::below("square", lhs.distance(&rhs)?, tol.eps_eq)])
    })
}

/// The `z_n` and `z` descriptions of `K_a` agree, and `L_{2n} = E_n` follows
/// by telescoping over the outermost cups.
pub fn check_zn_vs_z(cfg: &CheckConfig) -> CheckResult {
    let n = cfg.n;
    let space = NilpotentSpace::for_flags(2 * n);
    let tol = cfg.tol;
    run_cases("zn_vs_z", cfg, &matching_cases(n), |a, rng| {
        let flag = flagside::sample_ka(a, &space, rng, &tol)?;
        let full = flagside::is_in_ka(&flag, &space, a, KaVariant::FullZ, &tol)?;
        let restricted = flagside::is_in_ka(&flag, &space, a, KaVariant::RestrictedZn, &tol)?;

        let en = space.e_sub(n)?;
        let mut gap = 0.0f64;
        let mut dims_ok = true;
        for i in a.left_endpoints() {
            let pre = space.z_pow_preimage(a.d(i)?, flag.get(i - 1), &tol)?;
            dims_ok &= pre.dim() == 2 * a.d(i)? + i - 1 && pre.dim() == a.s(i)?;
            gap = gap.max(pre.equals(&pre.intersect(&en, &tol)?, &tol)?.residual);
        }

        let mut telescoped = Subspace::zero(space.ambient_dim());
        for (k, _) in a.outermost() {
            telescoped = space.z_pow_preimage(a.d(k)?, &telescoped, &tol)?;
        }
        let tele = telescoped.equals(&en, &tol)?.residual.max(flag.get(2 * n).equals(&telescoped, &tol)?.residual);

        let generic = flagside::sample_ym(2 * n, &space, rng, &tol)?;
        let g_full = flagside::is_in_ka(&generic, &space, a, KaVariant::FullZ, &tol)?.holds();
        let g_restricted = flagside::is_in_ka(&generic, &space, a, KaVariant::RestrictedZn, &tol)?.holds();

        Ok(vec![
            Measure::flag("agree_on_ka", full.holds() && restricted.holds()),
            Measure::below("ka_residual", full.worst_residual().max(restricted.worst_residual()), tol.eps_eq),
            Measure::flag("preimage_dims", dims_ok),
            Measure::below("z_vs_zn", gap, tol.eps_eq),
            Measure::below("telescope", tele, tol.eps_eq),
            Measure::flag("agree_on_generic", g_full == g_restricted),
        ])
    })
}

/// `K_a = q^{-1}(K_{a'})` in both directions, for every adjacent cup.
pub fn check_q_pullback(cfg: &CheckConfig) -> CheckResult {
    let n = cfg.n;
    let space = NilpotentSpace::for_flags(2 * n);
    let tol = cfg.tol;
    run_cases("q_pullback", cfg, &adjacent_cases(n), |(a, i), rng| {
        let i = *i;
        let reduced = a.reduce(i)?;
        let flag = flagside::sample_ka(a, &space, rng, &tol)?;
        let in_x = flagside::is_in_xmi(&flag, &space, i, &tol)?;
        let down = flagside::q_map(&flag, &space, i, &tol)?;
        let forward = flagside::is_in_ka(&down, &space, &reduced, KaVariant::FullZ, &tol)?;

        let base = flagside::sample_ka(&reduced, &space, rng, &tol)?;
        let up = flagside::q_fiber_sample(&base, i, &space, rng, &tol)?;
        let backward = flagside::is_in_ka(&up, &space, a, KaVariant::FullZ, &tol)?;
        Ok(vec![
            Measure::below("ka_in_x", in_x.worst_residual(), tol.eps_eq),
            Measure::below("forward", forward.worst_residual(), tol.eps_eq),
            Measure::below("backward", backward.worst_residual(), tol.eps_eq),
        ])
    })
}

/// `T_a = g^{-1}(T_{a'})` in both directions, for every adjacent cup.
pub fn check_g_pullback(cfg: &CheckConfig) -> CheckResult {
    let tol = cfg.tol;
    run_cases("g_pullback", cfg, &adjacent_cases(cfg.n), |(a, i), rng| {
        let i = *i;
        let reduced = a.reduce(i)?;
        let t = sphereside::sample_ta(a, rng);
        let in_a = sphereside::is_in_ami(&t, i, &tol)?;
        let forward = sphereside::is_in_ta(&sphereside::g_map(&t, i, &tol)?, &reduced, &tol)?;

        let base = sphereside::sample_ta(&reduced, rng);
        let up = sphereside::g_insert(&base, i, Line::random(rng))?;
        let backward = sphereside::is_in_ta(&up, a, &tol)?;
        Ok(vec![
            Measure::below("ta_in_a", in_a.worst_residual(), tol.eps_eq),
            Measure::below("forward", forward.worst_residual(), tol.eps_eq),
            Measure::below("backward", backward.worst_residual(), tol.eps_eq),
        ])
    })
}

/// `I ∘ phi` maps `K_a` into `S_a`, and `phi_inv ∘ I` maps `S_a` into `K_a`.
pub fn check_main(cfg: &CheckConfig) -> CheckResult {
    let n = cfg.n;
    let space = NilpotentSpace::for_flags(2 * n);
    let tol = cfg.tol;
    let mut result = run_cases("main", cfg, &matching_cases(n), |a, rng| {
        let flag = flagside::sample_ka(a, &space, rng, &tol)?;
        let springer = flagside::is_in_springer(&flag, &space, n, &tol)?;
        let image = sphereside::i_map(&sphereside::phi(&flag, &space, &tol)?);
        let forward = sphereside::is_in_sa(&image, a, &tol)?;

        let s = sphereside::sample_sa(a, rng);
        let back = sphereside::phi_inv(&sphereside::i_map(&s), &space, &tol)?;
        let backward = flagside::is_in_ka(&back, &space, a, KaVariant::FullZ, &tol)?;
        let back_springer = flagside::is_in_springer(&back, &space, n, &tol)?;
        Ok(vec![
            Measure::below("sample_in_springer", springer.worst_residual(), tol.eps_eq),
            Measure::below("flag_to_sphere", forward.worst_residual(), tol.eps_eq),
            Measure::below("sphere_to_flag", backward.worst_residual(), tol.eps_eq),
            Measure::below("image_in_springer", back_springer.worst_residual(), tol.eps_eq),
        ])
    });
    result.notes.push_str(&format!("; union over {} matching(s); {MAIN_CAVEAT}", matchings(n).len()));
    result
}

/// What the `sensitivity` check perturbs.
#[derive(Debug, Clone)]
pub enum FaultTarget {
    Ka(Matching),
    Xmi(usize),
    Ym,
}

pub(crate) fn fault_cases(n: usize) -> Vec<Case<FaultTarget>> {
    let m = 2 * n;
    let mut cases: Vec<Case<FaultTarget>> = matchings(n)
        .into_iter()
        .map(|a| Case { label: format!("K_{}", a.to_parens()), data: FaultTarget::Ka(a) })
        .collect();
    cases.extend((1..m).map(|i| Case { label: format!("X_{m},{i}"), data: FaultTarget::Xmi(i) }));
    cases.push(Case { label: format!("Y_{m}"), data: FaultTarget::Ym });
    cases
}

/// Perturbs one random subspace of a sampled member by `delta`; detection
/// means the membership test then fails.
pub fn check_sensitivity(cfg: &CheckConfig, delta: f64) -> CheckResult {
    let n = cfg.n;
    let m = 2 * n;
    let space = NilpotentSpace::for_flags(m);
    let tol = cfg.tol;
    run_cases("sensitivity", cfg, &fault_cases(n), |target, rng| {
        let flag = match target {
            FaultTarget::Ka(a) => flagside::sample_ka(a, &space, rng, &tol)?,
            FaultTarget::Xmi(i) => flagside::sample_xmi(m, *i, &space, rng, &tol)?,
            FaultTarget::Ym => flagside::sample_ym(m, &space, rng, &tol)?,
        };
        let j = rng.random_range(1..=m);
        let bad = flag.perturbed(j, delta, rng)?;
        let membership = match target {
            FaultTarget::Ka(a) => flagside::is_in_ka(&bad, &space, a, KaVariant::FullZ, &tol)?,
            FaultTarget::Xmi(i) => flagside::is_in_xmi(&bad, &space, *i, &tol)?,
            FaultTarget::Ym => flagside::is_in_ym(&bad, &space, &tol)?,
        };
        Ok(vec![Measure::flag("detected", !membership.holds())])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::Tolerances;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(n: usize, trials: usize) -> CheckConfig {
        CheckConfig::new(n, trials, Tolerances::default(), 42).unwrap()
    }

    #[test]
    fn isometry_on_fixed_subspaces() {
        let tol = Tolerances::default();
        let space = NilpotentSpace::for_flags(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zero = Subspace::zero(space.ambient_dim());
        let m = isometry_trial(&space, &zero, &mut rng, &tol).unwrap();
        assert!(m[1].residual < 1e-15);
        let m = isometry_trial(&space, &space.e_sub(1).unwrap(), &mut rng, &tol).unwrap();
        assert!(m.iter().all(|x| x.pass));
    }

    #[test]
    fn key_lemma_on_coordinate_subspaces() {
        let tol = Tolerances::default();
        let space = NilpotentSpace::for_flags(4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // W = E_1: the fiber is span{e_2, f_2}; z moves it to span{e_1, f_1},
        // which is W ∩ (zW)^⊥ = E_1 ∩ 0^⊥.
        let e1 = space.e_sub(1).unwrap();
        let source = space.fiber(&e1, &tol).unwrap();
        let expected = Subspace::span(space.ambient_dim(), &[space.e(2), space.f(2)], &tol).unwrap();
        assert!(source.equals(&expected, &tol).unwrap().holds);
        let m = key_lemma_trial(&space, &e1, &mut rng, &tol).unwrap();
        assert!(m.iter().all(|x| x.pass), "{m:?}");
        let m = key_lemma_trial(&space, &space.e_sub(2).unwrap(), &mut rng, &tol).unwrap();
        assert!(m.iter().all(|x| x.pass), "{m:?}");
    }

    #[test]
    fn small_runs_pass() {
        let c = cfg(2, 10);
        for &name in CHECK_NAMES {
            let r = run_named(name, &c);
            assert!(r.passed(), "{name}: {}", r.notes);
            assert!(r.failures <= r.trials);
        }
    }

    #[test]
    fn main_on_a_grid_for_one_cup() {
        // n = 1: every pair (l, l) over a 10 x 10 grid of the sphere.
        let tol = Tolerances::default();
        let space = NilpotentSpace::for_flags(2);
        let a = Matching::from_pairs(&[(1, 2)]).unwrap();
        for p in 0..10 {
            for q in 0..10 {
                let theta = std::f64::consts::PI * (p as f64 + 0.5) / 10.0;
                let phi = std::f64::consts::TAU * q as f64 / 10.0;
                let l = Line::from_sphere(theta, phi);
                let s = sphereside::LineTuple(vec![l, l]);
                let flag = sphereside::phi_inv(&sphereside::i_map(&s), &space, &tol).unwrap();
                assert!(flagside::is_in_ka(&flag, &space, &a, KaVariant::FullZ, &tol).unwrap().holds());
                let round = sphereside::i_map(&sphereside::phi(&flag, &space, &tol).unwrap());
                assert!(sphereside::is_in_sa(&round, &a, &tol).unwrap().holds());
            }
        }
    }

    #[test]
    fn corrupted_sample_is_caught_by_main_membership() {
        let tol = Tolerances::default();
        let space = NilpotentSpace::for_flags(4);
        let a = Matching::from_pairs(&[(1, 4), (2, 3)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let flag = flagside::sample_ka(&a, &space, &mut rng, &tol).unwrap();
            let bad = flag.perturbed(3, 1e-3, &mut rng).unwrap();
            assert!(!flagside::is_in_ka(&bad, &space, &a, KaVariant::FullZ, &tol).unwrap().holds());
        }
    }
}
