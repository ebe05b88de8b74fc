//! Problem definitions for mathematical programs with complementarity
//! constraints:
//!
//! ```text
//! min f(w)  s.t.  g_j(w) <= 0,  h_i(w) = 0,  0 <= G_k(w) ⟂ H_k(w) >= 0
//! ```
//!
//! Every scalar field carries its gradient. Built-in problems supply analytic
//! gradients; user problems may omit them and fall back to central
//! differences.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// Step used by the finite-difference gradient fallback, relative to
/// `max(1, |w_i|)`.
pub const FD_STEP: f64 = 1e-6;

/// Default activity tolerance for index-set classification.
pub const DEFAULT_ACTIVITY_TOL: f64 = 1e-6;

/// Sampling box used when a problem provides no `box_hint`.
pub const DEFAULT_BOX: (f64, f64) = (-5.0, 5.0);

/// A smooth scalar field `ℝⁿ → ℝ` together with its gradient.
#[derive(Clone)]
pub struct ScalarField {
    value: Arc<ValueFn>,
    grad: Option<Arc<GradFn>>,
}

impl ScalarField {
    /// `grad` must overwrite every entry of its output slice.
    pub fn new<V, G>(value: V, grad: G) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self { value: Arc::new(value), grad: Some(Arc::new(grad)) }
    }

    /// A field whose gradient is approximated by central differences.
    pub fn without_gradient<V>(value: V) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self { value: Arc::new(value), grad: None }
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }

    #[inline]
    pub fn value(&self, w: &[f64]) -> f64 {
        (self.value)(w)
    }

    /// Writes `∇φ(w)` into `out`.
    #[inline]
    pub fn gradient_into(&self, w: &[f64], out: &mut [f64]) {
        match &self.grad {
            Some(g) => g(w, out),
            None => central_difference(&*self.value, w, out),
        }
    }

    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; w.len()];
        self.gradient_into(w, &mut out);
        out
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("analytic_gradient", &self.grad.is_some())
            .finish()
    }
}

/// Central-difference gradient with step `FD_STEP * max(1, |w_i|)`.
pub fn central_difference(f: &(dyn Fn(&[f64]) -> f64 + Send + Sync), w: &[f64], out: &mut [f64]) {
    let mut x = w.to_vec();
    for i in 0..w.len() {
        let h = FD_STEP * w[i].abs().max(1.0);
        x[i] = w[i] + h;
        let fp = f(&x);
        x[i] = w[i] - h;
        let fm = f(&x);
        x[i] = w[i];
        out[i] = (fp - fm) / (2.0 * h);
    }
}

/// A complementarity pair `0 <= G(w) ⟂ H(w) >= 0`.
#[derive(Clone, Debug)]
pub struct ComplementarityPair {
    pub g: ScalarField,
    pub h: ScalarField,
}

/// Known optimum of a problem, when one is published or analytic.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub point: Option<Vec<f64>>,
    pub value: f64,
}

/// An MPCC instance. Immutable once built.
#[derive(Clone, Debug)]
pub struct ProblemDef {
    name: String,
    dim: usize,
    objective: ScalarField,
    ineq: Vec<ScalarField>,
    eq: Vec<ScalarField>,
    pairs: Vec<ComplementarityPair>,
    box_hint: Option<Vec<(f64, f64)>>,
    reference: Option<Reference>,
}

pub struct ProblemBuilder {
    name: String,
    dim: usize,
    objective: Option<ScalarField>,
    ineq: Vec<ScalarField>,
    eq: Vec<ScalarField>,
    pairs: Vec<ComplementarityPair>,
    box_hint: Option<Vec<(f64, f64)>>,
    reference: Option<Reference>,
}

impl ProblemBuilder {
    pub fn objective(mut self, f: ScalarField) -> Self {
        self.objective = Some(f);
        self
    }

    /// Adds `g(w) <= 0`.
    pub fn ineq(mut self, g: ScalarField) -> Self {
        self.ineq.push(g);
        self
    }

    /// Adds `h(w) = 0`.
    pub fn eq(mut self, h: ScalarField) -> Self {
        self.eq.push(h);
        self
    }

    /// Adds `0 <= g(w) ⟂ h(w) >= 0`.
    pub fn pair(mut self, g: ScalarField, h: ScalarField) -> Self {
        self.pairs.push(ComplementarityPair { g, h });
        self
    }

    pub fn box_hint(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.box_hint = Some(bounds);
        self
    }

    pub fn reference(mut self, point: Option<Vec<f64>>, value: f64) -> Self {
        self.reference = Some(Reference { point, value });
        self
    }

    pub fn build(self) -> Result<ProblemDef> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("problem dimension must be positive".into()));
        }
        let objective = self
            .objective
            .ok_or_else(|| Error::InvalidParameter(format!("problem `{}` has no objective", self.name)))?;
        if let Some(b) = &self.box_hint {
            check_dim(self.dim, b.len())?;
            if b.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
                return Err(Error::InvalidParameter("box_hint bounds must be finite with lo <= hi".into()));
            }
        }
        if let Some(Reference { point: Some(p), .. }) = &self.reference {
            check_dim(self.dim, p.len())?;
        }
        Ok(ProblemDef {
            name: self.name,
            dim: self.dim,
            objective,
            ineq: self.ineq,
            eq: self.eq,
            pairs: self.pairs,
            box_hint: self.box_hint,
            reference: self.reference,
        })
    }
}

/// All scalar field values at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub f: f64,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub comp_g: Vec<f64>,
    pub comp_h: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Feasibility {
    pub max_violation: f64,
    pub is_feasible: bool,
}

impl ProblemDef {
    pub fn builder(name: impl Into<String>, dim: usize) -> ProblemBuilder {
        ProblemBuilder {
            name: name.into(),
            dim,
            objective: None,
            ineq: Vec::new(),
            eq: Vec::new(),
            pairs: Vec::new(),
            box_hint: None,
            reference: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_ineq(&self) -> usize {
        self.ineq.len()
    }

    pub fn n_eq(&self) -> usize {
        self.eq.len()
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn objective(&self) -> &ScalarField {
        &self.objective
    }

    pub fn ineq(&self) -> &[ScalarField] {
        &self.ineq
    }

    pub fn eq(&self) -> &[ScalarField] {
        &self.eq
    }

    pub fn pairs(&self) -> &[ComplementarityPair] {
        &self.pairs
    }

    pub fn reference(&self) -> Option<&Reference> {
        self.reference.as_ref()
    }

    /// Per-variable sampling bounds, `[-5, 5]` where none were given.
    pub fn sampling_box(&self) -> Vec<(f64, f64)> {
        self.box_hint.clone().unwrap_or_else(|| vec![DEFAULT_BOX; self.dim])
    }

    pub fn check_point(&self, w: &[f64]) -> Result<()> {
        check_dim(self.dim, w.len())
    }

    /// Objective value only.
    pub fn f(&self, w: &[f64]) -> Result<f64> {
        self.check_point(w)?;
        Ok(self.objective.value(w))
    }

    pub fn evaluate(&self, w: &[f64]) -> Result<Evaluation> {
        self.check_point(w)?;
        Ok(Evaluation {
            f: self.objective.value(w),
            g: self.ineq.iter().map(|c| c.value(w)).collect(),
            h: self.eq.iter().map(|c| c.value(w)).collect(),
            comp_g: self.pairs.iter().map(|p| p.g.value(w)).collect(),
            comp_h: self.pairs.iter().map(|p| p.h.value(w)).collect(),
        })
    }

    /// Largest violation of the original (unrelaxed) constraint set.
    pub fn mpcc_feasibility(&self, w: &[f64], tol: f64) -> Result<Feasibility> {
        if !(tol >= 0.0) {
            return Err(Error::InvalidParameter(format!("feasibility tolerance must be >= 0, got {tol}")));
        }
        let ev = self.evaluate(w)?;
        let mut v = 0.0f64;
        for &g in &ev.g {
            v = v.max(g.max(0.0));
        }
        for &h in &ev.h {
            v = v.max(h.abs());
        }
        for (&a, &b) in ev.comp_g.iter().zip(&ev.comp_h) {
            v = v.max((-a).max(0.0)).max((-b).max(0.0)).max((a * b).abs());
        }
        if v.is_nan() {
            v = f64::INFINITY;
        }
        Ok(Feasibility { max_violation: v, is_feasible: v <= tol })
    }

    /// Partitions the complementarity pairs by the signs of `G_k`, `H_k`.
    ///
    /// A pair counts as zero on a side when that side is within
    /// `tol * max(1, |G_k| + |H_k|)` of zero. Pairs with a negative side, or
    /// with both sides strictly positive, land in `infeasible_pairs`.
    pub fn classify_indices(&self, w: &[f64], tol: f64) -> Result<IndexSets> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("activity tolerance must be > 0, got {tol}")));
        }
        let ev = self.evaluate(w)?;
        let active_ineq = ev
            .g
            .iter()
            .enumerate()
            .filter(|(_, g)| g.abs() <= tol)
            .map(|(j, _)| j)
            .collect();
        let mut sets = IndexSets { active_ineq, tol, ..IndexSets::default() };
        for (k, (&a, &b)) in ev.comp_g.iter().zip(&ev.comp_h).enumerate() {
            let scaled = tol * (a.abs() + b.abs()).max(1.0);
            let sign = |x: f64| {
                if x < -scaled || x.is_nan() {
                    Side::Negative
                } else if x <= scaled {
                    Side::Zero
                } else {
                    Side::Positive
                }
            };
            match (sign(a), sign(b)) {
                (Side::Zero, Side::Zero) => sets.biactive.push(k),
                (Side::Zero, Side::Positive) => sets.g_zero_h_pos.push(k),
                (Side::Positive, Side::Zero) => sets.g_pos_h_zero.push(k),
                _ => sets.infeasible_pairs.push(k),
            }
        }
        Ok(sets)
    }
}

enum Side {
    Negative,
    Zero,
    Positive,
}

/// Active and biactive index sets at a point. Indices are 0-based.
#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IndexSets {
    pub active_ineq: Vec<usize>,
    /// `G_k = 0, H_k = 0`.
    pub biactive: Vec<usize>,
    /// `G_k = 0, H_k > 0`.
    pub g_zero_h_pos: Vec<usize>,
    /// `G_k > 0, H_k = 0`.
    pub g_pos_h_zero: Vec<usize>,
    /// Pairs that are not complementary within tolerance.
    pub infeasible_pairs: Vec<usize>,
    pub tol: f64,
}

impl IndexSets {
    pub fn is_complementary(&self) -> bool {
        self.infeasible_pairs.is_empty()
    }
}
