//! Regularization of the complementarity constraints.
//!
//! Each pair `0 <= G ⟂ H >= 0` is relaxed through the NCP function
//!
//! ```text
//! φ(p, q) = p·q              if p + q >= 0
//!         = -(p² + q²) / 2   otherwise
//! ```
//!
//! into `G >= 0, H >= 0, B(w, β) = φ(G - β, H - β) <= 0`. The relaxed program
//! stacks all inequality rows into one vector
//! `N(w, β) = [g_1..g_m, -G_1..-G_s, -H_1..-H_s, B_1..B_s]`.

use crate::error::{check_dim, Error, Result};
use crate::model::ProblemDef;

/// The NCP function. Ties on `p + q = 0` take the product branch; both
/// branches agree there in value and gradient.
#[inline]
pub fn phi(p: f64, q: f64) -> f64 {
    if p + q >= 0.0 {
        p * q
    } else {
        -0.5 * (p * p + q * q)
    }
}

#[inline]
pub fn grad_phi(p: f64, q: f64) -> (f64, f64) {
    if p + q >= 0.0 {
        (q, p)
    } else {
        (-p, -q)
    }
}

/// True when `|φ(p,q)| <= tol` agrees with the complementarity test
/// `p >= -tol, q >= -tol, |pq| <= tol`.
pub fn ncp_check(p: f64, q: f64, tol: f64) -> bool {
    let phi_zero = phi(p, q).abs() <= tol;
    let complementary = p >= -tol && q >= -tol && (p * q).abs() <= tol;
    phi_zero == complementary
}

/// Exhaustive sign check of φ on the grid `{i/20 : -40 <= i <= 40}²`.
///
/// Returns the grid points where either `φ = 0 ⇔ (p >= 0, q >= 0, pq = 0)`
/// or `φ > 0` when `p, q > 0` and `φ < 0` when `p < 0` or `q < 0` fails.
pub fn ncp_grid_violations() -> Vec<(f64, f64)> {
    let grid: Vec<f64> = (-40..=40).map(|i| f64::from(i) / 20.0).collect();
    let mut bad = Vec::new();
    for &p in &grid {
        for &q in &grid {
            let v = phi(p, q);
            let zero_ok = (v == 0.0) == (p >= 0.0 && q >= 0.0 && p * q == 0.0);
            let sign_ok = if p > 0.0 && q > 0.0 {
                v > 0.0
            } else if p < 0.0 || q < 0.0 {
                v < 0.0
            } else {
                true
            };
            if !(zero_ok && sign_ok) {
                bad.push((p, q));
            }
        }
    }
    bad
}

/// `B_k(w, β) = φ(G_k(w) - β, H_k(w) - β)` for the 0-based pair index `k`.
pub fn relax_b(problem: &ProblemDef, k: usize, w: &[f64], beta: f64) -> Result<f64> {
    check_beta(beta)?;
    problem.check_point(w)?;
    let pair = problem
        .pairs()
        .get(k)
        .ok_or_else(|| Error::InvalidParameter(format!("pair index {k} out of range")))?;
    Ok(phi(pair.g.value(w) - beta, pair.h.value(w) - beta))
}

fn check_beta(beta: f64) -> Result<()> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("relaxation parameter must be finite and >= 0, got {beta}")))
    }
}

/// Offsets of each block inside `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub m: usize,
    pub s: usize,
    pub l: usize,
}

impl Layout {
    pub fn n_len(&self) -> usize {
        self.m + 3 * self.s
    }
    pub fn neg_g(&self, k: usize) -> usize {
        self.m + k
    }
    pub fn neg_h(&self, k: usize) -> usize {
        self.m + self.s + k
    }
    pub fn relax(&self, k: usize) -> usize {
        self.m + 2 * self.s + k
    }
}

/// Values of the relaxed constraint system at a point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StackedValues {
    /// `N(w, β)` in layout order.
    pub n: Vec<f64>,
    /// `h(w)`.
    pub h: Vec<f64>,
    pub(crate) comp_g: Vec<f64>,
    pub(crate) comp_h: Vec<f64>,
}

/// The relaxed constraint system of a problem at a fixed `β`.
#[derive(Clone, Copy, Debug)]
pub struct RegularizedStack<'a> {
    problem: &'a ProblemDef,
    beta: f64,
    layout: Layout,
}

impl<'a> RegularizedStack<'a> {
    pub fn new(problem: &'a ProblemDef, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let layout = Layout { m: problem.n_ineq(), s: problem.n_pairs(), l: problem.n_eq() };
        Ok(Self { problem, beta, layout })
    }

    pub fn problem(&self) -> &'a ProblemDef {
        self.problem
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn stack_constraints(&self, w: &[f64]) -> Result<StackedValues> {
        self.problem.check_point(w)?;
        Ok(self.stack_unchecked(w))
    }

    pub(crate) fn stack_unchecked(&self, w: &[f64]) -> StackedValues {
        let mut v = StackedValues::default();
        self.stack_into(w, &mut v);
        v
    }

    /// Like `stack_unchecked` but reuses the buffers of `v`.
    pub(crate) fn stack_into(&self, w: &[f64], v: &mut StackedValues) {
        let p = self.problem;
        let lay = self.layout;
        v.n.resize(lay.n_len(), 0.0);
        v.comp_g.resize(lay.s, 0.0);
        v.comp_h.resize(lay.s, 0.0);
        v.h.resize(lay.l, 0.0);
        for (j, g) in p.ineq().iter().enumerate() {
            v.n[j] = g.value(w);
        }
        for (k, pair) in p.pairs().iter().enumerate() {
            let a = pair.g.value(w);
            let b = pair.h.value(w);
            v.n[lay.neg_g(k)] = -a;
            v.n[lay.neg_h(k)] = -b;
            v.n[lay.relax(k)] = phi(a - self.beta, b - self.beta);
            v.comp_g[k] = a;
            v.comp_h[k] = b;
        }
        for (i, c) in p.eq().iter().enumerate() {
            v.h[i] = c.value(w);
        }
    }

    /// `Σ_α vN_α ∇N_α(w) + Σ_i vh_i ∇h_i(w)`.
    pub fn jacobian_transpose_apply(&self, w: &[f64], vn: &[f64], vh: &[f64]) -> Result<Vec<f64>> {
        self.problem.check_point(w)?;
        check_dim(self.layout.n_len(), vn.len())?;
        check_dim(self.layout.l, vh.len())?;
        let vals = self.stack_unchecked(w);
        let mut out = vec![0.0; w.len()];
        let mut scratch = vec![0.0; w.len()];
        self.jt_apply_into(w, &vals, vn, vh, &mut out, &mut scratch);
        Ok(out)
    }

    /// Accumulates `Jᵀv` into `out` (overwritten) using pair values already
    /// computed in `vals`. Rows with a zero weight are skipped.
    pub(crate) fn jt_apply_into(
        &self,
        w: &[f64],
        vals: &StackedValues,
        vn: &[f64],
        vh: &[f64],
        out: &mut [f64],
        scratch: &mut [f64],
    ) {
        let p = self.problem;
        let lay = self.layout;
        out.iter_mut().for_each(|x| *x = 0.0);

        for (j, g) in p.ineq().iter().enumerate() {
            if vn[j] != 0.0 {
                g.gradient_into(w, scratch);
                axpy(vn[j], scratch, out);
            }
        }
        for (k, pair) in p.pairs().iter().enumerate() {
            // ∇B = ∂₁φ ∇G + ∂₂φ ∇H, so B folds into the -G and -H weights.
            let vb = vn[lay.relax(k)];
            let (dp, dq) = if vb != 0.0 {
                grad_phi(vals.comp_g[k] - self.beta, vals.comp_h[k] - self.beta)
            } else {
                (0.0, 0.0)
            };
            let cg = vb * dp - vn[lay.neg_g(k)];
            let ch = vb * dq - vn[lay.neg_h(k)];
            if cg != 0.0 {
                pair.g.gradient_into(w, scratch);
                axpy(cg, scratch, out);
            }
            if ch != 0.0 {
                pair.h.gradient_into(w, scratch);
                axpy(ch, scratch, out);
            }
        }
        for (i, h) in p.eq().iter().enumerate() {
            if vh[i] != 0.0 {
                h.gradient_into(w, scratch);
                axpy(vh[i], scratch, out);
            }
        }
    }
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite;

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0, 0.0), 0.0);
        assert_eq!(phi(1.0, 2.0), 2.0);
        assert_eq!(phi(-1.0, -2.0), -2.5);
        // on the switching line both branches give -p²
        assert_eq!(phi(3.0, -3.0), -9.0);
        let eps = 1e-9;
        let below = -0.5 * ((3.0 - eps) * (3.0 - eps) + 9.0);
        assert!((phi(3.0 - eps, -3.0) - below).abs() < 1e-15);
        assert!((below - (-9.0)).abs() < 1e-8);
    }

    #[test]
    fn grad_phi_values() {
        assert_eq!(grad_phi(1.0, 2.0), (2.0, 1.0));
        assert_eq!(grad_phi(-1.0, -2.0), (1.0, 2.0));
        assert_eq!(grad_phi(2.0, -2.0), (-2.0, 2.0));
        // on q = -p the two branch formulas coincide
        let (p, q) = (2.0f64, -2.0f64);
        assert_eq!((-p, -q), (q, p));
    }

    #[test]
    fn ncp_grid_is_clean() {
        assert!(ncp_grid_violations().is_empty());
    }

    #[test]
    fn ncp_check_examples() {
        assert!(ncp_check(0.0, 5.0, 0.0));
        assert!(ncp_check(-1.0, 0.0, 0.0));
        assert!(ncp_check(2.0, 3.0, 1e-12));
    }

    #[test]
    fn relax_b_examples() {
        let p = suite::mpcc1();
        let b = relax_b(&p, 0, &[0.3, 0.0], 0.1).unwrap();
        assert!((b - (-0.02)).abs() < 1e-15);
        let b = relax_b(&p, 0, &[0.0, 0.0], 0.1).unwrap();
        assert!((b - (-0.01)).abs() < 1e-15);
        assert_eq!(relax_b(&p, 0, &[0.1, 0.1], 0.1).unwrap(), 0.0);
        assert!(relax_b(&p, 1, &[0.1, 0.1], 0.1).is_err());
        assert!(relax_b(&p, 0, &[0.1, 0.1], -0.1).is_err());
    }

    #[test]
    fn relax_b_at_zero_beta_is_phi() {
        let p = suite::mpcc3();
        for w in [[0.3, -0.2], [1.0, 1.0], [-2.0, 0.5]] {
            let e = p.evaluate(&w).unwrap();
            assert_eq!(relax_b(&p, 0, &w, 0.0).unwrap(), phi(e.comp_g[0], e.comp_h[0]));
        }
    }

    #[test]
    fn stack_mpcc1() {
        let p = suite::mpcc1();
        let st = RegularizedStack::new(&p, 0.0).unwrap();
        let v = st.stack_constraints(&[1.0, 1.0]).unwrap();
        assert_eq!(v.n, vec![-1.0, -1.0, 1.0]);
        assert!(v.h.is_empty());
        let v = st.stack_constraints(&[0.0, 0.0]).unwrap();
        assert!(v.n.iter().all(|&x| x == 0.0));
        assert!(st.stack_constraints(&[0.0]).is_err());
    }

    #[test]
    fn stack_mpcc3_origin() {
        let p = suite::mpcc3();
        let st = RegularizedStack::new(&p, 0.0).unwrap();
        let v = st.stack_constraints(&[0.0, 0.0]).unwrap();
        // [w1 - 1, -w2, -G, -H, B] with G = 0, H = 2 - 1 - 1 = 0
        assert_eq!(v.n, vec![-1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn jt_apply_examples() {
        let p = suite::mpcc1();
        let st = RegularizedStack::new(&p, 0.0).unwrap();
        let z = st.jacobian_transpose_apply(&[0.7, -0.2], &[0.0; 3], &[]).unwrap();
        assert_eq!(z, vec![0.0, 0.0]);
        let v = st.jacobian_transpose_apply(&[1.0, 1.0], &[0.0, 0.0, 1.0], &[]).unwrap();
        assert_eq!(v, vec![1.0, 1.0]);
        assert!(st.jacobian_transpose_apply(&[1.0, 1.0], &[0.0; 2], &[]).is_err());
    }
}
