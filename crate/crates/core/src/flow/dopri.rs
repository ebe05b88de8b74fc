//! Dormand–Prince 5(4) embedded pair with PI step-size control.
//!
//! The system is autonomous (`w' = F(w)`), so the stage times are never
//! needed. The right-hand side closure also returns a scalar (the energy at
//! the evaluated point), which makes the FSAL stage double as the energy
//! evaluation of the accepted state.

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// 5th-order minus embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const PI_BETA: f64 = 0.04;

/// Outcome of one controlled step attempt.
#[derive(Clone, Debug, PartialEq)]
pub struct StepAttempt {
    pub accepted: bool,
    /// The new state if accepted, otherwise the unchanged input state.
    pub w: Vec<f64>,
    /// Scaled error norm; `<= 1` means within tolerance.
    pub error: f64,
    pub h_next: f64,
}

/// Stepper state: tolerances, PI memory and stage buffers.
#[derive(Clone, Debug)]
pub struct Dopri5 {
    rtol: f64,
    atol: f64,
    err_prev: f64,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    k5: Vec<f64>,
    k6: Vec<f64>,
    tmp: Vec<f64>,
}

impl Dopri5 {
    pub fn new(dim: usize, rtol: f64, atol: f64) -> Self {
        let z = vec![0.0; dim];
        Self {
            rtol,
            atol,
            err_prev: 1e-4,
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            k5: z.clone(),
            k6: z.clone(),
            tmp: z,
        }
    }

    /// One uncontrolled step of size `h` from `w` with `k1 = F(w)`.
    ///
    /// Writes the 5th-order solution to `w_out` and `F(w_out)` to `k7`.
    /// Returns the scaled error norm and the scalar returned by `rhs` at
    /// `w_out`.
    pub fn raw_step<F>(&mut self, rhs: &mut F, w: &[f64], k1: &[f64], h: f64, w_out: &mut [f64], k7: &mut [f64]) -> (f64, f64)
    where
        F: FnMut(&[f64], &mut [f64]) -> f64,
    {
        let n = w.len();
        for i in 0..n {
            self.tmp[i] = w[i] + h * A21 * k1[i];
        }
        rhs(&self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = w[i] + h * (A31 * k1[i] + A32 * self.k2[i]);
        }
        rhs(&self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = w[i] + h * (A41 * k1[i] + A42 * self.k2[i] + A43 * self.k3[i]);
        }
        rhs(&self.tmp, &mut self.k4);
        for i in 0..n {
            self.tmp[i] = w[i] + h * (A51 * k1[i] + A52 * self.k2[i] + A53 * self.k3[i] + A54 * self.k4[i]);
        }
        rhs(&self.tmp, &mut self.k5);
        for i in 0..n {
            self.tmp[i] = w[i]
                + h * (A61 * k1[i] + A62 * self.k2[i] + A63 * self.k3[i] + A64 * self.k4[i] + A65 * self.k5[i]);
        }
        rhs(&self.tmp, &mut self.k6);
        for i in 0..n {
            w_out[i] = w[i]
                + h * (A71 * k1[i] + A73 * self.k3[i] + A74 * self.k4[i] + A75 * self.k5[i] + A76 * self.k6[i]);
        }
        let value = rhs(w_out, k7);

        let mut sum = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * self.k3[i] + E4 * self.k4[i] + E5 * self.k5[i] + E6 * self.k6[i] + E7 * k7[i]);
            let sc = self.atol + self.rtol * w[i].abs().max(w_out[i].abs());
            sum += (e / sc) * (e / sc);
        }
        let err = if n == 0 { 0.0 } else { (sum / n as f64).sqrt() };
        (err, value)
    }

    /// PI controller: decides acceptance for error `err` at step `h` and
    /// proposes the next step size.
    pub fn control(&mut self, err: f64, h: f64) -> (bool, f64) {
        if !err.is_finite() {
            return (false, h * FAC_MIN);
        }
        let expo = 0.2 - PI_BETA * 0.75;
        let fac11 = err.powf(expo);
        if err <= 1.0 {
            let fac = (fac11 / self.err_prev.powf(PI_BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            self.err_prev = err.max(1e-4);
            (true, h / fac)
        } else {
            (false, h / (fac11 / SAFETY).min(1.0 / FAC_MIN))
        }
    }
}
