//! Quadratic-penalty energy of the relaxed program,
//!
//! ```text
//! E(w, β) = f(w) + λ/2 · (‖N⁺(w, β)‖² + ‖h(w)‖²)
//! ```
//!
//! and its gradient `∇f + λ·Jᵀ(N⁺, h)`.

use crate::error::{Error, Result};
use crate::model::ProblemDef;
use crate::regularize::{RegularizedStack, StackedValues};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnergyParams {
    pub beta: f64,
    pub lambda: f64,
}

impl EnergyParams {
    pub fn new(beta: f64, lambda: f64) -> Result<Self> {
        let p = Self { beta, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be finite and > 0, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// `½(‖N⁺‖² + ‖h‖²)`.
pub fn penalty(stack: &RegularizedStack<'_>, w: &[f64]) -> Result<f64> {
    let v = stack.stack_constraints(w)?;
    Ok(penalty_of(&v.n, &v.h))
}

fn penalty_of(n: &[f64], h: &[f64]) -> f64 {
    let pos: f64 = n.iter().map(|&x| if x > 0.0 { x * x } else { 0.0 }).sum();
    let eq: f64 = h.iter().map(|&x| x * x).sum();
    0.5 * (pos + eq)
}

pub fn energy(problem: &ProblemDef, params: EnergyParams, w: &[f64]) -> Result<f64> {
    EnergyFunction::new(problem, params)?.value(w)
}

pub fn grad_energy(problem: &ProblemDef, params: EnergyParams, w: &[f64]) -> Result<Vec<f64>> {
    let mut ef = EnergyFunction::new(problem, params)?;
    problem.check_point(w)?;
    let mut out = vec![0.0; w.len()];
    ef.value_and_gradient(w, &mut out);
    Ok(out)
}

/// Energy bound to a problem and a `(β, λ)` pair. Reuses its scratch
/// buffer across gradient evaluations.
#[derive(Clone, Debug)]
pub struct EnergyFunction<'a> {
    stack: RegularizedStack<'a>,
    params: EnergyParams,
    scratch: Vec<f64>,
    grad_f: Vec<f64>,
    vals: StackedValues,
    n_pos: Vec<f64>,
}

impl<'a> EnergyFunction<'a> {
    pub fn new(problem: &'a ProblemDef, params: EnergyParams) -> Result<Self> {
        params.validate()?;
        let stack = RegularizedStack::new(problem, params.beta)?;
        let n = problem.dim();
        Ok(Self { stack, params, scratch: vec![0.0; n], grad_f: vec![0.0; n], vals: StackedValues::default(), n_pos: Vec::new() })
    }

    pub fn params(&self) -> EnergyParams {
        self.params
    }

    pub fn problem(&self) -> &'a ProblemDef {
        self.stack.problem()
    }

    pub fn stack(&self) -> &RegularizedStack<'a> {
        &self.stack
    }

    pub fn value(&self, w: &[f64]) -> Result<f64> {
        self.stack.problem().check_point(w)?;
        let v = self.stack.stack_unchecked(w);
        let e = self.stack.problem().objective().value(w) + self.params.lambda * penalty_of(&v.n, &v.h);
        if e.is_infinite() {
            return Err(Error::Overflow);
        }
        Ok(e)
    }

    /// Writes `∇E(w)` into `grad` and returns `E(w)`. No dimension check;
    /// the result may be non-finite.
    pub fn value_and_gradient(&mut self, w: &[f64], grad: &mut [f64]) -> f64 {
        let problem = self.stack.problem();
        let lambda = self.params.lambda;
        self.stack.stack_into(w, &mut self.vals);
        self.n_pos.clear();
        self.n_pos.extend(self.vals.n.iter().map(|&x| x.max(0.0)));
        self.stack.jt_apply_into(w, &self.vals, &self.n_pos, &self.vals.h, grad, &mut self.scratch);
        problem.objective().gradient_into(w, &mut self.grad_f);
        for (g, df) in grad.iter_mut().zip(&self.grad_f) {
            *g = df + lambda * *g;
        }
        problem.objective().value(w) + lambda * penalty_of(&self.vals.n, &self.vals.h)
    }
}
