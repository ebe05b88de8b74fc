//! Least squares with per-variable sign bounds.
//!
//! Solves `min ‖A x − b‖₂` where each variable is free, `>= 0`, `<= 0` or
//! fixed at zero. Sign-bounded variables are handled by the Lawson–Hanson
//! active-set method with free variables kept permanently passive; every
//! subproblem is solved in the minimum-norm sense through an SVD so rank
//! deficiency never breaks the iteration.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Free,
    NonNeg,
    NonPos,
    Zero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LsqSolution {
    pub x: Vec<f64>,
    /// `‖A x − b‖₂`.
    pub residual: f64,
    /// The columns of the non-fixed variables have deficient numerical rank.
    pub rank_deficient: bool,
}

/// Relative singular-value cutoff for the minimum-norm subproblem solves.
const SVD_EPS: f64 = 1e-12;

fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>, cols: &[usize]) -> Vec<f64> {
    if cols.is_empty() {
        return Vec::new();
    }
    let sub = a.select_columns(cols);
    let svd = sub.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = SVD_EPS * smax.max(f64::MIN_POSITIVE) * (a.nrows().max(cols.len()) as f64);
    match svd.solve(b, eps) {
        Ok(x) => x.iter().copied().collect(),
        Err(_) => vec![0.0; cols.len()],
    }
}

pub(crate) fn numerical_rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0;
    }
    let sv = a.singular_values();
    let smax = sv.max();
    if !(smax > 0.0) {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

fn residual_norm(a: &DMatrix<f64>, b: &DVector<f64>, x: &[f64]) -> f64 {
    let xv = DVector::from_column_slice(x);
    (a * xv - b).norm()
}

/// Solves the sign-bounded least-squares problem. `bounds.len()` must equal
/// the column count of `a`.
pub fn bounded_lsq(a: &DMatrix<f64>, b: &DVector<f64>, bounds: &[Bound]) -> LsqSolution {
    let nv = a.ncols();
    assert_eq!(bounds.len(), nv, "one bound per column");
    // flip NonPos columns so every bounded variable is NonNeg
    let mut am = a.clone();
    for (j, bd) in bounds.iter().enumerate() {
        if *bd == Bound::NonPos {
            am.column_mut(j).neg_mut();
        }
    }
    let free: Vec<usize> = (0..nv).filter(|&j| bounds[j] == Bound::Free).collect();
    let signed: Vec<usize> = (0..nv).filter(|&j| matches!(bounds[j], Bound::NonNeg | Bound::NonPos)).collect();
    let live: Vec<usize> = (0..nv).filter(|&j| bounds[j] != Bound::Zero).collect();
    let rank_deficient = numerical_rank(&am.select_columns(&live), 1e-10) < live.len();

    let mut x = vec![0.0; nv];
    let mut passive = vec![false; nv];
    for &j in &free {
        passive[j] = true;
    }
    let solve_passive = |passive: &[bool]| -> (Vec<usize>, Vec<f64>) {
        let cols: Vec<usize> = (0..nv).filter(|&j| passive[j]).collect();
        let z = min_norm_solve(&am, b, &cols);
        (cols, z)
    };
    {
        let (cols, z) = solve_passive(&passive);
        for (c, v) in cols.iter().zip(z) {
            x[*c] = v;
        }
    }

    let scale = am.norm().max(1.0) * b.norm().max(1.0);
    let grad_tol = 1e-12 * scale;
    let max_outer = 3 * nv + 10;
    for _ in 0..max_outer {
        let r = b - &am * DVector::from_column_slice(&x);
        let g = am.transpose() * r;
        let entering = signed
            .iter()
            .copied()
            .filter(|&j| !passive[j] && g[j] > grad_tol)
            .max_by(|&i, &j| g[i].total_cmp(&g[j]));
        let Some(j_in) = entering else { break };
        passive[j_in] = true;

        let mut inner = 0;
        loop {
            inner += 1;
            let (cols, z) = solve_passive(&passive);
            let mut zfull = vec![0.0; nv];
            for (c, v) in cols.iter().zip(&z) {
                zfull[*c] = *v;
            }
            let blocking: Vec<usize> = signed.iter().copied().filter(|&j| passive[j] && zfull[j] <= 0.0).collect();
            if blocking.is_empty() || inner > nv + 2 {
                for &j in &signed {
                    if passive[j] {
                        zfull[j] = zfull[j].max(0.0);
                    }
                }
                x = zfull;
                break;
            }
            let mut alpha = 1.0f64;
            for &j in &blocking {
                let d = x[j] - zfull[j];
                if d > 0.0 {
                    alpha = alpha.min(x[j] / d);
                }
            }
            for j in 0..nv {
                if passive[j] {
                    x[j] += alpha * (zfull[j] - x[j]);
                }
            }
            for &j in &signed {
                if passive[j] && x[j] <= 1e-15 * scale {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
        }
    }

    for (j, bd) in bounds.iter().enumerate() {
        match bd {
            Bound::NonPos => x[j] = -x[j],
            Bound::Zero => x[j] = 0.0,
            _ => {}
        }
    }
    let residual = residual_norm(a, b, &x);
    LsqSolution { x, residual, rank_deficient }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive oracle: every subset of sign-bounded variables pinned at
    /// zero, the rest solved unconstrained; keep the best sign-feasible
    /// candidate.
    fn brute_force(a: &DMatrix<f64>, b: &DVector<f64>, bounds: &[Bound]) -> f64 {
        let nv = a.ncols();
        let signed: Vec<usize> = (0..nv).filter(|&j| matches!(bounds[j], Bound::NonNeg | Bound::NonPos)).collect();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << signed.len()) {
            let mut cols: Vec<usize> = (0..nv).filter(|&j| bounds[j] == Bound::Free).collect();
            for (bit, &j) in signed.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    cols.push(j);
                }
            }
            cols.sort_unstable();
            let z = min_norm_solve(a, b, &cols);
            let mut x = vec![0.0; nv];
            let mut ok = true;
            for (c, v) in cols.iter().zip(z) {
                x[*c] = v;
                match bounds[*c] {
                    Bound::NonNeg if v < -1e-9 => ok = false,
                    Bound::NonPos if v > 1e-9 => ok = false,
                    _ => {}
                }
            }
            if ok {
                best = best.min(residual_norm(a, b, &x));
            }
        }
        best
    }

    fn bound_strategy() -> impl Strategy<Value = Bound> {
        prop_oneof![Just(Bound::Free), Just(Bound::NonNeg), Just(Bound::NonPos), Just(Bound::Zero)]
    }

    #[test]
    fn unconstrained_exact_solution() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let b = DVector::from_vec(vec![3.0, 4.0]);
        let s = bounded_lsq(&a, &b, &[Bound::Free, Bound::Free]);
        assert!((s.x[0] - 3.0).abs() < 1e-12 && (s.x[1] - 2.0).abs() < 1e-12);
        assert!(s.residual < 1e-12);
        assert!(!s.rank_deficient);
    }

    #[test]
    fn sign_bound_clamps() {
        let a = DMatrix::from_row_slice(1, 1, &[1.0]);
        let b = DVector::from_vec(vec![-2.0]);
        let s = bounded_lsq(&a, &b, &[Bound::NonNeg]);
        assert_eq!(s.x, vec![0.0]);
        assert!((s.residual - 2.0).abs() < 1e-12);
        let s = bounded_lsq(&a, &b, &[Bound::NonPos]);
        assert!((s.x[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_columns_flag_rank_deficiency_and_take_min_norm() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        let b = DVector::from_vec(vec![2.0, 0.0]);
        let s = bounded_lsq(&a, &b, &[Bound::Free, Bound::Free]);
        assert!(s.rank_deficient);
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_system() {
        let a = DMatrix::<f64>::zeros(3, 0);
        let b = DVector::from_vec(vec![1.0, 2.0, 2.0]);
        let s = bounded_lsq(&a, &b, &[]);
        assert!(s.x.is_empty());
        assert!((s.residual - 3.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn matches_exhaustive_oracle(
            rows in 1usize..6,
            data in proptest::collection::vec(-3.0f64..3.0, 36),
            rhs in proptest::collection::vec(-3.0f64..3.0, 6),
            bounds in proptest::collection::vec(bound_strategy(), 1..6),
        ) {
            let nv = bounds.len();
            let a = DMatrix::from_fn(rows, nv, |i, j| data[i * 6 + j]);
            let b = DVector::from_fn(rows, |i, _| rhs[i]);
            let s = bounded_lsq(&a, &b, &bounds);
            for (x, bd) in s.x.iter().zip(&bounds) {
                match bd {
                    Bound::NonNeg => prop_assert!(*x >= 0.0),
                    Bound::NonPos => prop_assert!(*x <= 0.0),
                    Bound::Zero => prop_assert_eq!(*x, 0.0),
                    Bound::Free => {}
                }
            }
            let oracle = brute_force(&a, &b, &bounds);
            prop_assert!(s.residual <= oracle + 1e-8 * (1.0 + oracle), "solver {} oracle {}", s.residual, oracle);
        }
    }
}
