//! Multiplier recovery, stationarity classes and MPCC-LICQ.
//!
//! A feasible point is weakly stationary when
//!
//! ```text
//! ∇f + Σ_{j∈I_g} μ_j ∇g_j + Σ_i ξ_i ∇h_i − Σ_k η_k ∇G_k − Σ_k ζ_k ∇H_k = 0
//! ```
//!
//! with `μ >= 0`, `η_k = 0` on `I+0` and `ζ_k = 0` on `I0+`. The stronger
//! classes only restrict the signs of `η_k, ζ_k` on the biactive set `I00`:
//!
//! | class | condition for every `k ∈ I00`        |
//! |-------|--------------------------------------|
//! | S     | `η_k >= 0` and `ζ_k >= 0`            |
//! | M     | `η_k > 0, ζ_k > 0` or `η_k ζ_k = 0`  |
//! | C     | `η_k ζ_k >= 0`                       |
//! | W     | none                                 |

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lsq::{bounded_lsq, numerical_rank, Bound};
use crate::error::{Error, Result};
use crate::model::{IndexSets, ProblemDef};

/// Largest biactive set for which the M and C sign patterns are enumerated.
pub const MAX_ENUMERATED_BIACTIVE: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stationarity {
    S,
    M,
    C,
    W,
    #[serde(rename = "none")]
    None,
}

impl Stationarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::S => "S",
            Self::M => "M",
            Self::C => "C",
            Self::W => "W",
            Self::None => "none",
        }
    }

    /// `self` implies `other` (S ⇒ M ⇒ C ⇒ W).
    pub fn implies(self, other: Stationarity) -> bool {
        self != Self::None && self <= other
    }
}

/// Multipliers in layout order: `mu` per inequality (zero when inactive),
/// `xi` per equality, `eta`/`zeta` per complementarity pair.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub mu: Vec<f64>,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub zeta: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierEstimate {
    pub multipliers: Multipliers,
    /// `‖∇f + Σ μ∇g + Σ ξ∇h − Σ η∇G − Σ ζ∇H‖₂`.
    pub residual: f64,
    pub rank_deficient: bool,
    pub index_sets: IndexSets,
}

/// Sign pattern imposed on one biactive pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PairPattern {
    Free,
    BothNonNeg,
    BothNonPos,
    EtaZero,
    ZetaZero,
}

/// Columns of the stationarity system and where each one lands.
struct System {
    a: DMatrix<f64>,
    b: DVector<f64>,
    base_bounds: Vec<Bound>,
    slots: Vec<Slot>,
    /// Column indices `(η_k, ζ_k)` per biactive pair, in `biactive` order.
    biactive_cols: Vec<(usize, usize)>,
}

#[derive(Clone, Copy)]
enum Slot {
    Mu(usize),
    Xi(usize),
    Eta(usize),
    Zeta(usize),
}

fn build_system(problem: &ProblemDef, w: &[f64], sets: &IndexSets) -> System {
    let n = problem.dim();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut bounds = Vec::new();
    let mut slots = Vec::new();
    let mut push = |col: Vec<f64>, bound: Bound, slot: Slot| {
        cols.push(col);
        bounds.push(bound);
        slots.push(slot);
        cols.len() - 1
    };
    for &j in &sets.active_ineq {
        push(problem.ineq()[j].gradient(w), Bound::NonNeg, Slot::Mu(j));
    }
    for (i, h) in problem.eq().iter().enumerate() {
        push(h.gradient(w), Bound::Free, Slot::Xi(i));
    }
    let neg = |mut v: Vec<f64>| {
        v.iter_mut().for_each(|x| *x = -*x);
        v
    };
    let mut biactive_cols = Vec::new();
    for &k in &sets.g_zero_h_pos {
        push(neg(problem.pairs()[k].g.gradient(w)), Bound::Free, Slot::Eta(k));
    }
    for &k in &sets.g_pos_h_zero {
        push(neg(problem.pairs()[k].h.gradient(w)), Bound::Free, Slot::Zeta(k));
    }
    for &k in &sets.biactive {
        let ce = push(neg(problem.pairs()[k].g.gradient(w)), Bound::Free, Slot::Eta(k));
        let cz = push(neg(problem.pairs()[k].h.gradient(w)), Bound::Free, Slot::Zeta(k));
        biactive_cols.push((ce, cz));
    }
    let a = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
    let b = -DVector::from_vec(problem.objective().gradient(w));
    System { a, b, base_bounds: bounds, slots, biactive_cols }
}

impl System {
    fn solve(&self, patterns: &[PairPattern], problem: &ProblemDef, sets: &IndexSets) -> MultiplierEstimate {
        let mut bounds = self.base_bounds.clone();
        for (&(ce, cz), pat) in self.biactive_cols.iter().zip(patterns) {
            let (be, bz) = match pat {
                PairPattern::Free => (Bound::Free, Bound::Free),
                PairPattern::BothNonNeg => (Bound::NonNeg, Bound::NonNeg),
                PairPattern::BothNonPos => (Bound::NonPos, Bound::NonPos),
                PairPattern::EtaZero => (Bound::Zero, Bound::Free),
                PairPattern::ZetaZero => (Bound::Free, Bound::Zero),
            };
            bounds[ce] = be;
            bounds[cz] = bz;
        }
        let sol = bounded_lsq(&self.a, &self.b, &bounds);
        let mut m = Multipliers {
            mu: vec![0.0; problem.n_ineq()],
            xi: vec![0.0; problem.n_eq()],
            eta: vec![0.0; problem.n_pairs()],
            zeta: vec![0.0; problem.n_pairs()],
        };
        for (slot, x) in self.slots.iter().zip(&sol.x) {
            match *slot {
                Slot::Mu(j) => m.mu[j] = *x,
                Slot::Xi(i) => m.xi[i] = *x,
                Slot::Eta(k) => m.eta[k] = *x,
                Slot::Zeta(k) => m.zeta[k] = *x,
            }
        }
        MultiplierEstimate {
            multipliers: m,
            residual: sol.residual,
            rank_deficient: sol.rank_deficient,
            index_sets: sets.clone(),
        }
    }
}

fn prepare(problem: &ProblemDef, w: &[f64], tol: f64) -> Result<IndexSets> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive and finite, got {tol}")));
    }
    let feas = problem.mpcc_feasibility(w, 100.0 * tol)?;
    if !feas.is_feasible {
        return Err(Error::Infeasible { max_violation: feas.max_violation, tol: 100.0 * tol });
    }
    let sets = problem.classify_indices(w, tol)?;
    if let Some(&k) = sets.infeasible_pairs.first() {
        return Err(Error::InfeasiblePair(k));
    }
    Ok(sets)
}

/// Least-squares multipliers of the weak stationarity system at `w`.
/// Biactive multipliers are unrestricted.
pub fn estimate_multipliers(problem: &ProblemDef, w: &[f64], tol: f64) -> Result<MultiplierEstimate> {
    let sets = prepare(problem, w, tol)?;
    let sys = build_system(problem, w, &sets);
    Ok(sys.solve(&vec![PairPattern::Free; sets.biactive.len()], problem, &sets))
}

/// Multipliers certifying the strongest class whose sign pattern admits a
/// residual `<= residual_tol`.
///
/// Tries S (one nonnegative solve), then M (`3^|I00|` patterns: `η = 0`,
/// `ζ = 0`, or both nonnegative), then C (`2^|I00|` patterns: both
/// nonnegative or both nonpositive), then W. For each class the pattern
/// with the smallest residual wins. M and C are only enumerated up to
/// [`MAX_ENUMERATED_BIACTIVE`] biactive pairs. When no class passes, the
/// unrestricted estimate is returned.
pub fn certify_multipliers(problem: &ProblemDef, w: &[f64], tol: f64, residual_tol: f64) -> Result<MultiplierEstimate> {
    let sets = prepare(problem, w, tol)?;
    let sys = build_system(problem, w, &sets);
    let nb = sets.biactive.len();
    let pass = |e: &MultiplierEstimate| e.residual <= residual_tol;

    let s = sys.solve(&vec![PairPattern::BothNonNeg; nb], problem, &sets);
    if pass(&s) || nb == 0 {
        return Ok(s);
    }
    if nb <= MAX_ENUMERATED_BIACTIVE {
        let choices_m = [PairPattern::EtaZero, PairPattern::ZetaZero, PairPattern::BothNonNeg];
        let choices_c = [PairPattern::BothNonNeg, PairPattern::BothNonPos];
        for choices in [&choices_m[..], &choices_c[..]] {
            let mut best: Option<MultiplierEstimate> = None;
            for pat in patterns(choices, nb) {
                let e = sys.solve(&pat, problem, &sets);
                if pass(&e) && best.as_ref().is_none_or(|b| e.residual < b.residual) {
                    best = Some(e);
                }
            }
            if let Some(b) = best {
                return Ok(b);
            }
        }
    }
    Ok(sys.solve(&vec![PairPattern::Free; nb], problem, &sets))
}

/// All `choices.len()^n` assignments, in lexicographic order.
fn patterns(choices: &[PairPattern], n: usize) -> impl Iterator<Item = Vec<PairPattern>> + '_ {
    let total = choices.len().pow(n as u32);
    (0..total).map(move |mut idx| {
        let mut p = Vec::with_capacity(n);
        for _ in 0..n {
            p.push(choices[idx % choices.len()]);
            idx /= choices.len();
        }
        p
    })
}

/// Strongest class satisfied by `(η, ζ)` on the biactive set of `sets`.
///
/// `None` when `residual > tol`. Multipliers with `|·| <= tol` are treated
/// as exact zeros before the sign conditions are applied, which keeps the
/// S ⇒ M ⇒ C ⇒ W chain exact. An empty biactive set gives S.
pub fn classify_stationarity(sets: &IndexSets, eta: &[f64], zeta: &[f64], residual: f64, tol: f64) -> Stationarity {
    if !(residual <= tol) {
        return Stationarity::None;
    }
    let snap = |x: f64| if x.abs() <= tol { 0.0 } else { x };
    let mut class = Stationarity::S;
    for &k in &sets.biactive {
        let (e, z) = match (eta.get(k), zeta.get(k)) {
            (Some(&e), Some(&z)) => (snap(e), snap(z)),
            _ => return Stationarity::None,
        };
        if e.is_nan() || z.is_nan() {
            return Stationarity::None;
        }
        let pair_class = if e >= 0.0 && z >= 0.0 {
            Stationarity::S
        } else if e * z == 0.0 {
            Stationarity::M
        } else if e * z > 0.0 {
            Stationarity::C
        } else {
            Stationarity::W
        };
        class = class.max(pair_class);
    }
    class
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LicqCheck {
    pub ok: bool,
    pub rank: usize,
    pub count: usize,
}

/// MPCC-LICQ: the gradients of the active `g_j`, all `h_i`, `G_k` on
/// `I0+ ∪ I00` and `H_k` on `I+0 ∪ I00` are linearly independent.
/// Singular values above `tol · σ_max` count towards the rank.
pub fn check_mpcc_licq(problem: &ProblemDef, w: &[f64], tol: f64) -> Result<LicqCheck> {
    let sets = problem.classify_indices(w, tol)?;
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for &j in &sets.active_ineq {
        cols.push(problem.ineq()[j].gradient(w));
    }
    for h in problem.eq() {
        cols.push(h.gradient(w));
    }
    for &k in sets.g_zero_h_pos.iter().chain(&sets.biactive) {
        cols.push(problem.pairs()[k].g.gradient(w));
    }
    for &k in sets.g_pos_h_zero.iter().chain(&sets.biactive) {
        cols.push(problem.pairs()[k].h.gradient(w));
    }
    let count = cols.len();
    let a = DMatrix::from_fn(problem.dim(), count, |i, j| cols[j][i]);
    let rank = numerical_rank(&a, tol);
    Ok(LicqCheck { ok: rank == count, rank, count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScalarField;
    use crate::suite;
    use proptest::prelude::*;

    fn biactive_sets(n: usize) -> IndexSets {
        IndexSets { biactive: (0..n).collect(), tol: 1e-6, ..IndexSets::default() }
    }

    #[test]
    fn classify_examples() {
        let empty = IndexSets::default();
        assert_eq!(classify_stationarity(&empty, &[], &[], 0.0, 1e-6), Stationarity::S);
        let one = biactive_sets(1);
        assert_eq!(classify_stationarity(&one, &[1.0], &[-1.0], 0.0, 1e-6), Stationarity::W);
        assert_eq!(classify_stationarity(&one, &[2.0], &[0.0], 0.0, 1e-6), Stationarity::S);
        assert_eq!(classify_stationarity(&one, &[-2.0], &[0.0], 0.0, 1e-6), Stationarity::M);
        assert_eq!(classify_stationarity(&one, &[-2.0], &[-1.0], 0.0, 1e-6), Stationarity::C);
        assert_eq!(classify_stationarity(&one, &[1.0], &[1.0], 1.0, 1e-6), Stationarity::None);
    }

    #[test]
    fn non_biactive_multipliers_are_ignored() {
        let sets = IndexSets { g_zero_h_pos: vec![0], biactive: vec![1], tol: 1e-6, ..IndexSets::default() };
        assert_eq!(classify_stationarity(&sets, &[-5.0, 1.0], &[0.0, 1.0], 0.0, 1e-6), Stationarity::S);
    }

    #[test]
    fn mpcc1_origin_has_zero_multipliers() {
        let p = suite::mpcc1();
        let est = estimate_multipliers(&p, &[0.0, 0.0], 1e-6).unwrap();
        assert_eq!(est.multipliers.eta, vec![0.0]);
        assert_eq!(est.multipliers.zeta, vec![0.0]);
        assert_eq!(est.residual, 0.0);
        assert_eq!(est.index_sets.biactive, vec![0]);
    }

    #[test]
    fn unconstrained_residual_is_gradient_norm() {
        let p = ProblemDef::builder("quad", 2)
            .objective(ScalarField::new(
                |w: &[f64]| (w[0] - 1.0).powi(2) + w[1] * w[1],
                |w: &[f64], g: &mut [f64]| {
                    g[0] = 2.0 * (w[0] - 1.0);
                    g[1] = 2.0 * w[1];
                },
            ))
            .build()
            .unwrap();
        let est = estimate_multipliers(&p, &[1.0, 0.0], 1e-6).unwrap();
        assert_eq!(est.residual, 0.0);
        assert!(est.multipliers.mu.is_empty() && est.multipliers.eta.is_empty());
        let est = estimate_multipliers(&p, &[0.0, 2.0], 1e-6).unwrap();
        assert!((est.residual - 20f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mpcc3_published_point_has_small_residual() {
        // G ≈ H ≈ 0.008 there, so a loose activity tolerance makes the pair
        // biactive and -w2 <= 0 active
        let p = suite::mpcc3();
        let w = [0.00402025441315761, -4.97464725953594e-07];
        let est = estimate_multipliers(&p, &w, 1e-2).unwrap();
        assert_eq!(est.index_sets.biactive, vec![0]);
        assert_eq!(est.index_sets.active_ineq, vec![1]);
        // oracle: the 2x3 system [-(∇G) -(∇H) ∇g2] x = -∇f has full row
        // rank, so the unrestricted residual is zero
        assert!(est.residual < 1e-10, "{}", est.residual);
    }

    #[test]
    fn mpcc3_origin_is_m_but_not_s_stationary() {
        // ∇f = (-2, -1), ∇G = (2, 1), ∇H = (2, 2), ∇(-w2) = (0, -1):
        // the first row forces η + ζ = -1, so S fails; both (η, ζ, μ2) =
        // (0, -1, 1) and (-1, 0, 0) solve the system exactly and certify M
        let p = suite::mpcc3();
        let w = [0.0, 0.0];
        let tol = 1e-6;
        let cert = certify_multipliers(&p, &w, tol, 1e-9).unwrap();
        let m = &cert.multipliers;
        assert_eq!(classify_stationarity(&cert.index_sets, &m.eta, &m.zeta, cert.residual, tol), Stationarity::M);
        assert!(cert.residual < 1e-12);
        assert_eq!(m.eta[0] * m.zeta[0], 0.0);
        assert!((m.eta[0] + m.zeta[0] + 1.0).abs() < 1e-12);
        assert_eq!(m.mu[0], 0.0);
    }

    #[test]
    fn infeasible_points_are_rejected() {
        let p = suite::mpcc1();
        assert!(matches!(estimate_multipliers(&p, &[1.0, 1.0], 1e-6), Err(Error::Infeasible { .. })));
        assert!(estimate_multipliers(&p, &[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn licq_examples() {
        let p = suite::mpcc1();
        let c = check_mpcc_licq(&p, &[0.0, 0.0], 1e-6).unwrap();
        assert_eq!(c, LicqCheck { ok: true, rank: 2, count: 2 });

        let dup = ProblemDef::builder("dup", 2)
            .objective(ScalarField::new(|_: &[f64]| 0.0, |_: &[f64], g: &mut [f64]| g.fill(0.0)))
            .ineq(ScalarField::new(|w: &[f64]| w[0], |_: &[f64], g: &mut [f64]| g.copy_from_slice(&[1.0, 0.0])))
            .ineq(ScalarField::new(|w: &[f64]| 2.0 * w[0], |_: &[f64], g: &mut [f64]| g.copy_from_slice(&[2.0, 0.0])))
            .build()
            .unwrap();
        let c = check_mpcc_licq(&dup, &[0.0, 0.0], 1e-6).unwrap();
        assert!(!c.ok);
        assert_eq!((c.rank, c.count), (1, 2));

        // MPCC3 at the origin: -w2, G and H all active, three gradients in ℝ²
        let c = check_mpcc_licq(&suite::mpcc3(), &[0.0, 0.0], 1e-6).unwrap();
        assert!(!c.ok && c.count == 3 && c.rank <= 2);
    }

    #[test]
    fn pattern_enumeration_counts() {
        let ch = [PairPattern::EtaZero, PairPattern::ZetaZero, PairPattern::BothNonNeg];
        assert_eq!(patterns(&ch, 0).count(), 1);
        assert_eq!(patterns(&ch, 3).count(), 27);
    }

    fn sample_value() -> impl Strategy<Value = f64> {
        prop_oneof![Just(0.0), Just(1e-9), Just(-1e-9), -3.0f64..3.0]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn class_chain_and_definitions(
            k in 0usize..=4,
            eta in proptest::collection::vec(sample_value(), 4),
            zeta in proptest::collection::vec(sample_value(), 4),
        ) {
            let tol = 1e-6;
            let sets = biactive_sets(k);
            let class = classify_stationarity(&sets, &eta, &zeta, 0.0, tol);
            prop_assert!(class != Stationarity::None);
            let snap = |x: f64| if x.abs() <= tol { 0.0 } else { x };
            let pairs: Vec<(f64, f64)> = (0..k).map(|i| (snap(eta[i]), snap(zeta[i]))).collect();
            let s = pairs.iter().all(|&(e, z)| e >= 0.0 && z >= 0.0);
            let m = pairs.iter().all(|&(e, z)| (e > 0.0 && z > 0.0) || e * z == 0.0);
            let c = pairs.iter().all(|&(e, z)| e * z >= 0.0);
            // chain holds on the definitions themselves
            prop_assert!(!s || m);
            prop_assert!(!m || c);
            // and the returned class is the strongest satisfied one
            let expected = if s { Stationarity::S } else if m { Stationarity::M } else if c { Stationarity::C } else { Stationarity::W };
            prop_assert_eq!(class, expected);
            for weaker in [Stationarity::S, Stationarity::M, Stationarity::C, Stationarity::W] {
                if class <= weaker {
                    prop_assert!(class.implies(weaker));
                }
            }
        }
    }
}
