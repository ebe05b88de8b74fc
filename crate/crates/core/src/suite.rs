//! Built-in benchmark problems with analytic gradients and published
//! reference values.
//!
//! Problem ids follow the labels used in the literature (`mpcc1`, `mpcc3`
//! .. `mpcc6`; there is no `mpcc2`).

use crate::error::{Error, Result};
use crate::model::{ProblemDef, ScalarField};

pub const PROBLEM_IDS: [&str; 5] = ["mpcc1", "mpcc3", "mpcc4", "mpcc5", "mpcc6"];

/// Optimal value for MPCC6 reported by Outrata; kept for comparison output.
pub const MPCC6_OUTRATA_VALUE: f64 = 3.2077;

/// `w_i` as a scalar field.
fn coord(i: usize) -> ScalarField {
    ScalarField::new(
        move |w: &[f64]| w[i],
        move |_: &[f64], g: &mut [f64]| {
            g.iter_mut().for_each(|x| *x = 0.0);
            g[i] = 1.0;
        },
    )
}

/// `-w_i` as a scalar field, i.e. the row `-w_i <= 0`.
fn neg_coord(i: usize) -> ScalarField {
    ScalarField::new(
        move |w: &[f64]| -w[i],
        move |_: &[f64], g: &mut [f64]| {
            g.iter_mut().for_each(|x| *x = 0.0);
            g[i] = -1.0;
        },
    )
}

/// `min (w1 - w2)²  s.t.  0 <= w1 ⟂ w2 >= 0`.
pub fn mpcc1() -> ProblemDef {
    // wᵀQw with Q = [[1, -1], [-1, 1]]
    let f = ScalarField::new(
        |w: &[f64]| (w[0] - w[1]) * (w[0] - w[1]),
        |w: &[f64], g: &mut [f64]| {
            let d = 2.0 * (w[0] - w[1]);
            g[0] = d;
            g[1] = -d;
        },
    );
    ProblemDef::builder("mpcc1", 2)
        .objective(f)
        .pair(coord(0), coord(1))
        .box_hint(vec![(0.0, 2.0); 2])
        .reference(Some(vec![0.0, 0.0]), 0.0)
        .build()
        .expect("mpcc1 is well-formed")
}

/// ```text
/// min (w1 - 1)² + (w2 - 1/2)²
/// s.t. w1 <= 1, w2 >= 0,
///      0 <= 2w1 + w2 ⟂ 2 - (w1 - 1)² - (w2 - 1)² >= 0
/// ```
pub fn mpcc3() -> ProblemDef {
    let f = ScalarField::new(
        |w: &[f64]| (w[0] - 1.0).powi(2) + (w[1] - 0.5).powi(2),
        |w: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (w[0] - 1.0);
            g[1] = 2.0 * (w[1] - 0.5);
        },
    );
    let w1_le_1 = ScalarField::new(
        |w: &[f64]| w[0] - 1.0,
        |_: &[f64], g: &mut [f64]| {
            g[0] = 1.0;
            g[1] = 0.0;
        },
    );
    let lhs = ScalarField::new(
        |w: &[f64]| 2.0 * w[0] + w[1],
        |_: &[f64], g: &mut [f64]| {
            g[0] = 2.0;
            g[1] = 1.0;
        },
    );
    let rhs = ScalarField::new(
        |w: &[f64]| 2.0 - (w[0] - 1.0).powi(2) - (w[1] - 1.0).powi(2),
        |w: &[f64], g: &mut [f64]| {
            g[0] = -2.0 * (w[0] - 1.0);
            g[1] = -2.0 * (w[1] - 1.0);
        },
    );
    ProblemDef::builder("mpcc3", 2)
        .objective(f)
        .ineq(w1_le_1)
        .ineq(neg_coord(1))
        .pair(lhs, rhs)
        .box_hint(vec![(0.0, 2.0); 2])
        .reference(Some(vec![0.0, 0.0]), 1.25)
        .build()
        .expect("mpcc3 is well-formed")
}

/// `-e^{w1} + w2 - e^{w3}`, the slack shared by MPCC4 and MPCC5.
fn exp_slack() -> ScalarField {
    ScalarField::new(
        |w: &[f64]| -w[0].exp() + w[1] - w[2].exp(),
        |w: &[f64], g: &mut [f64]| {
            g[0] = -w[0].exp();
            g[1] = 1.0;
            g[2] = -w[2].exp();
        },
    )
}

fn exp_slack_problem(name: &str, f: ScalarField, reference: (Vec<f64>, f64)) -> ProblemDef {
    ProblemDef::builder(name, 3)
        .objective(f)
        .ineq(neg_coord(0))
        .ineq(neg_coord(2))
        .pair(coord(0), exp_slack())
        .box_hint(vec![(0.0, 3.0); 3])
        .reference(Some(reference.0), reference.1)
        .build()
        .expect("exp-slack problem is well-formed")
}

/// ```text
/// min (w1 + 1)² + (w2 - 2.5)² + (w3 + 1)²
/// s.t. w3 >= 0,  0 <= w1 ⟂ -e^{w1} + w2 - e^{w3} >= 0
/// ```
pub fn mpcc4() -> ProblemDef {
    let f = ScalarField::new(
        |w: &[f64]| (w[0] + 1.0).powi(2) + (w[1] - 2.5).powi(2) + (w[2] + 1.0).powi(2),
        |w: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (w[0] + 1.0);
            g[1] = 2.0 * (w[1] - 2.5);
            g[2] = 2.0 * (w[2] + 1.0);
        },
    );
    exp_slack_problem("mpcc4", f, (vec![0.0, 2.5, 0.0], 2.0))
}

/// ```text
/// min (w1 + 1)² + w2² + 10(w3 - 1)²
/// s.t. w3 >= 0,  0 <= w1 ⟂ -e^{w1} + w2 - e^{w3} >= 0
/// ```
pub fn mpcc5() -> ProblemDef {
    let f = ScalarField::new(
        |w: &[f64]| (w[0] + 1.0).powi(2) + w[1] * w[1] + 10.0 * (w[2] - 1.0).powi(2),
        |w: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (w[0] + 1.0);
            g[1] = 2.0 * w[1];
            g[2] = 20.0 * (w[2] - 1.0);
        },
    );
    exp_slack_problem("mpcc5", f, (vec![0.0, 2.7102, 0.5366], 10.4923))
}

/// ```text
/// min ½[(w1 - 3)² + (w2 - 4)²]
/// s.t. w1..w4 >= 0, 0 <= w5 <= 10,
///      0 <= w1 ⟂ (1 + 0.2w5)w1 - (1 + 1.333w5) - 0.333w3 + 2w1w4 >= 0
///      0 <= w2 ⟂ (1 + 0.1w5)w2 - w5 + w3 + 2w2w4 >= 0
///      0 <= w3 ⟂ 0.333w1 - w2 + 1 - 0.1w5 >= 0
///      0 <= w4 ⟂ 9 + 0.1w5 - w1² - w2² >= 0
/// ```
pub fn mpcc6() -> ProblemDef {
    let f = ScalarField::new(
        |w: &[f64]| 0.5 * ((w[0] - 3.0).powi(2) + (w[1] - 4.0).powi(2)),
        |w: &[f64], g: &mut [f64]| {
            g.iter_mut().for_each(|x| *x = 0.0);
            g[0] = w[0] - 3.0;
            g[1] = w[1] - 4.0;
        },
    );
    let c1 = ScalarField::new(
        |w: &[f64]| (1.0 + 0.2 * w[4]) * w[0] - (1.0 + 1.333 * w[4]) - 0.333 * w[2] + 2.0 * w[0] * w[3],
        |w: &[f64], g: &mut [f64]| {
            g[0] = 1.0 + 0.2 * w[4] + 2.0 * w[3];
            g[1] = 0.0;
            g[2] = -0.333;
            g[3] = 2.0 * w[0];
            g[4] = 0.2 * w[0] - 1.333;
        },
    );
    let c2 = ScalarField::new(
        |w: &[f64]| (1.0 + 0.1 * w[4]) * w[1] - w[4] + w[2] + 2.0 * w[1] * w[3],
        |w: &[f64], g: &mut [f64]| {
            g[0] = 0.0;
            g[1] = 1.0 + 0.1 * w[4] + 2.0 * w[3];
            g[2] = 1.0;
            g[3] = 2.0 * w[1];
            g[4] = 0.1 * w[1] - 1.0;
        },
    );
    let c3 = ScalarField::new(
        |w: &[f64]| 0.333 * w[0] - w[1] + 1.0 - 0.1 * w[4],
        |_: &[f64], g: &mut [f64]| {
            g.copy_from_slice(&[0.333, -1.0, 0.0, 0.0, -0.1]);
        },
    );
    let c4 = ScalarField::new(
        |w: &[f64]| 9.0 + 0.1 * w[4] - w[0] * w[0] - w[1] * w[1],
        |w: &[f64], g: &mut [f64]| {
            g[0] = -2.0 * w[0];
            g[1] = -2.0 * w[1];
            g[2] = 0.0;
            g[3] = 0.0;
            g[4] = 0.1;
        },
    );
    let w5_le_10 = ScalarField::new(
        |w: &[f64]| w[4] - 10.0,
        |_: &[f64], g: &mut [f64]| {
            g.iter_mut().for_each(|x| *x = 0.0);
            g[4] = 1.0;
        },
    );
    let mut b = ProblemDef::builder("mpcc6", 5).objective(f);
    for i in 0..5 {
        b = b.ineq(neg_coord(i));
    }
    b.ineq(w5_le_10)
        .pair(coord(0), c1)
        .pair(coord(1), c2)
        .pair(coord(2), c3)
        .pair(coord(3), c4)
        .box_hint(vec![(0.0, 5.0), (0.0, 5.0), (0.0, 5.0), (0.0, 5.0), (0.0, 10.0)])
        .reference(Some(vec![2.5528, 1.6409, 0.0, 0.0329, 2.0921]), 2.8827)
        .build()
        .expect("mpcc6 is well-formed")
}

pub fn by_id(id: &str) -> Result<ProblemDef> {
    match id.to_ascii_lowercase().as_str() {
        "mpcc1" => Ok(mpcc1()),
        "mpcc3" => Ok(mpcc3()),
        "mpcc4" => Ok(mpcc4()),
        "mpcc5" => Ok(mpcc5()),
        "mpcc6" => Ok(mpcc6()),
        _ => Err(Error::UnknownProblem(id.to_string())),
    }
}

/// A parameter setting used in the published experiments.
#[derive(Clone, Debug, PartialEq)]
pub struct PublishedRun {
    pub beta: f64,
    pub lambda: f64,
    /// `None` for runs that used random initial points.
    pub w0: Option<Vec<f64>>,
}

/// A published solution row.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceRow {
    pub source: &'static str,
    pub solution: Vec<f64>,
    pub value: f64,
    /// How far `f(solution)` may sit from `value` given the printed precision
    /// of the row.
    pub value_tol: f64,
}

#[derive(Clone, Debug)]
pub struct BenchmarkEntry {
    pub problem: ProblemDef,
    pub published_runs: Vec<PublishedRun>,
    pub reference_rows: Vec<ReferenceRow>,
}

const ROW_TOL: f64 = 1e-3;

fn row(source: &'static str, solution: &[f64], value: f64) -> ReferenceRow {
    ReferenceRow { source, solution: solution.to_vec(), value, value_tol: ROW_TOL }
}

fn run(beta: f64, lambda: f64, w0: Option<&[f64]>) -> PublishedRun {
    PublishedRun { beta, lambda, w0: w0.map(<[f64]>::to_vec) }
}

pub fn entry(id: &str) -> Result<BenchmarkEntry> {
    let problem = by_id(id)?;
    let (published_runs, reference_rows) = match problem.name() {
        "mpcc1" => {
            let mut params = vec![run(1e-4, 1e6, None)];
            params.extend([0.1, 0.01, 0.001, 0.0001].map(|b| run(b, 1e6, Some(&[1.0, 1.0]))));
            params.extend([10.0, 1e2, 1e3, 1e4, 1e5].map(|l| run(1e-3, l, Some(&[1.5, 1.5]))));
            let rows = vec![
                row("beta sweep, beta=0.1", &[0.100050000140542; 2], 0.0),
                row("beta sweep, beta=0.01", &[0.0100500000194718; 2], 0.0),
                row("beta sweep, beta=0.001", &[0.00105000001965199; 2], 0.0),
                row("beta sweep, beta=0.0001", &[0.000150000019335945; 2], 0.0),
                row("lambda sweep, lambda=10", &[0.0168105088432284; 2], 0.0),
                row("lambda sweep, lambda=100", &[0.00599997220798751; 2], 0.0),
                row("lambda sweep, lambda=1000", &[0.00258113797276159; 2], 0.0),
                row("lambda sweep, lambda=10000", &[0.00149999999698513; 2], 0.0),
                row("lambda sweep, lambda=100000", &[0.00115811390460986; 2], 0.0),
            ];
            (params, rows)
        }
        "mpcc3" => {
            let mut params = vec![run(1e-5, 1e6, None)];
            params.extend([0.1, 0.01, 0.001, 0.0001].map(|b| run(b, 1e6, Some(&[1.0, 1.0]))));
            params.extend([1e2, 1e3, 1e4, 1e5, 1e6].map(|l| run(1e-6, l, Some(&[1.0, 1.0]))));
            let rows = vec![
                row("beta sweep, beta=0.1", &[0.0547347728730422, -5.57362581295502e-07], 1.14352690697827),
                row("beta sweep, beta=0.01", &[0.00898313645704711, -4.95784188958737e-07], 1.23211491961095),
                row("beta sweep, beta=0.001", &[0.00447091291113772, -4.97282434599503e-07], 1.24107866052267),
                row("beta sweep, beta=0.0001", &[0.00402025441315761, -4.97464725953594e-07], 1.2419761510842),
                row("lambda sweep, lambda=100", &[0.0895849855530089, -0.00445364859562869], 1.08332898211196),
                row("lambda sweep, lambda=1000", &[0.0401832807892819, -0.000475660458775592], 1.17172402118807),
                row("lambda sweep, lambda=10000", &[0.0184902830395593, -4.88662867458115e-05], 1.21341019316242),
                row("lambda sweep, lambda=100000", &[0.00856469689824011, -4.94705982203277e-06], 1.23294890732077),
                row("lambda sweep, lambda=1000000", &[0.00397519417035708, -4.97510345691846e-07], 1.24206591133857),
            ];
            (params, rows)
        }
        "mpcc4" => (
            vec![run(0.01, 1e6, None)],
            vec![
                row("l1 penalty", &[0.0, 2.5, 0.0], 2.0),
                row("lower-order penalty", &[0.0, 2.5, 0.0], 2.0),
                row("quadratic penalty", &[-0.0001, 2.5, -0.0001], 1.9996),
                row("gradient flow, 10 starts", &[-0.000002, 2.5, -0.000002], 1.99999),
            ],
        ),
        "mpcc5" => (
            vec![run(0.01, 1e5, None)],
            vec![
                row("l1 penalty", &[0.0, 2.7102, 0.5366], 10.4923),
                row("lower-order penalty", &[0.0, 2.7091, 0.536], 10.4925),
                row("quadratic penalty", &[0.0, 2.7111, 0.5372], 10.4924),
                row("gradient flow, 10 starts", &[-0.000074, 2.709987, 0.536561], 10.491639),
            ],
        ),
        "mpcc6" => {
            let mut quad2 = row("quadratic penalty, w0=0", &[2.5528, 1.64, 0.0001, 0.0329, 2.092], 2.8825);
            // w2 is printed to two decimals only: |∂f/∂w2|·0.005 ≈ 0.012
            quad2.value_tol = 1.5e-2;
            (
                vec![run(1e-5, 1e4, None)],
                vec![
                    row("l1 penalty, w0=0", &[2.5528, 1.6409, 0.0, 0.0329, 2.0921], 2.8827),
                    row("l1 penalty, w0=(0,0,0,0,10)", &[2.5528, 1.6409, 0.0, 0.0329, 2.092], 2.8827),
                    row("lower-order penalty, w0=0", &[2.5528, 1.6409, 0.0, 0.0329, 2.092], 2.8827),
                    row("lower-order penalty, w0=(0,0,0,0,10)", &[2.5528, 1.6409, 0.0, 0.0328, 2.092], 2.8827),
                    row("quadratic penalty, w0=0", &[2.5528, 1.6409, 0.0, 0.0329, 2.092], 2.8827),
                    quad2,
                    row("gradient flow, 10 starts", &[2.552739, 1.640964, -0.000039, 0.032896, 2.092187], 2.88254),
                ],
            )
        }
        _ => unreachable!(),
    };
    Ok(BenchmarkEntry { problem, published_runs, reference_rows })
}

pub fn all_entries() -> Vec<BenchmarkEntry> {
    PROBLEM_IDS.iter().map(|id| entry(id).expect("built-in id")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_spot_values() {
        assert_eq!(mpcc1().f(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(mpcc3().f(&[0.0, 0.0]).unwrap(), 1.25);
        assert_eq!(mpcc4().f(&[0.0, 2.5, 0.0]).unwrap(), 2.0);
        assert_eq!(mpcc4().f(&[1.0, 1.0, 1.0]).unwrap(), 10.25);
        assert_eq!(mpcc5().f(&[0.0, 0.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn mpcc1_feasibility_of_landmarks() {
        let p = mpcc1();
        assert!(p.mpcc_feasibility(&[0.0, 0.0], 0.0).unwrap().is_feasible);
        assert!(!p.mpcc_feasibility(&[1.0, 1.0], 1e-8).unwrap().is_feasible);
    }

    #[test]
    fn mpcc6_structure() {
        let p = mpcc6();
        assert_eq!((p.dim(), p.n_ineq(), p.n_eq(), p.n_pairs()), (5, 6, 0, 4));
        let e = p.evaluate(&[0.0, 0.0, 0.0, 0.0, 10.0]).unwrap();
        assert_eq!(e.g[5], 0.0);
        assert!((e.comp_h[3] - 10.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(by_id("mpcc2"), Err(Error::UnknownProblem(_))));
        assert!(by_id("MPCC4").is_ok());
    }

    #[test]
    fn reference_rows_are_self_consistent() {
        for e in all_entries() {
            for r in &e.reference_rows {
                let f = e.problem.f(&r.solution).unwrap();
                assert!(
                    (f - r.value).abs() <= r.value_tol,
                    "{} / {}: f = {f}, published {}",
                    e.problem.name(),
                    r.source,
                    r.value
                );
            }
        }
    }
}
