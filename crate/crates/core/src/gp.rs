//! A small interior-point solver for geometric programs in standard form:
//! minimize a posynomial subject to posynomial constraints `<= 1`, all
//! variables strictly positive.
//!
//! Everything happens in log space, where each posynomial becomes a
//! log-sum-exp (convex, smooth). A log barrier is tightened by a factor of
//! ten per stage; each stage runs damped Newton steps with Armijo
//! backtracking. The barrier keeps iterates strictly feasible throughout,
//! which downstream successive-approximation loops rely on.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Monomial {
    /// Strictly positive multiplier.
    pub coefficient: f64,
    /// `(variable index, exponent)` pairs; indices must be unique per term.
    pub exponents: Vec<(usize, f64)>,
}

impl Monomial {
    pub fn constant(c: f64) -> Self {
        Self {
            coefficient: c,
            exponents: Vec::new(),
        }
    }

    pub fn var(c: f64, var: usize, power: f64) -> Self {
        Self {
            coefficient: c,
            exponents: vec![(var, power)],
        }
    }
}

#[derive(Debug, Clone)]
pub struct Posynomial {
    pub terms: Vec<Monomial>,
}

impl Posynomial {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Self { terms }
    }

    /// Value at a strictly positive point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coefficient
                    * t.exponents
                        .iter()
                        .map(|&(i, p)| x[i].powf(p))
                        .product::<f64>()
            })
            .sum()
    }
}

/// `minimize objective(x) subject to constraints[j](x) <= 1, x > 0`.
#[derive(Debug, Clone)]
pub struct GeometricProgram {
    pub num_vars: usize,
    pub objective: Posynomial,
    pub constraints: Vec<Posynomial>,
}

#[derive(Debug, Clone)]
pub struct GpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Max of the stationarity residual and the duality-gap surrogate.
    pub kkt_residual: f64,
    pub converged: bool,
}

const NEWTON_ITERS_PER_STAGE: usize = 50;
const MAX_BARRIER_STAGES: usize = 30;
const ARMIJO_SLOPE: f64 = 0.25;
const ARMIJO_SHRINK: f64 = 0.5;
// Log-domain trust region; keeps near-singular Newton systems from jumping
// past the range where exp() stays finite.
const MAX_NEWTON_STEP: f64 = 100.0;

/// Log-domain view of a posynomial: rows of `(ln c, sparse exponent row)`.
struct LogPosy {
    rows: Vec<(f64, Vec<(usize, f64)>)>,
}

impl LogPosy {
    fn build(p: &Posynomial, num_vars: usize) -> Result<Self> {
        if p.terms.is_empty() {
            return Err(Error::Domain("posynomial with no terms".to_string()));
        }
        let mut rows = Vec::with_capacity(p.terms.len());
        for t in &p.terms {
            if !(t.coefficient.is_finite() && t.coefficient > 0.0) {
                return Err(Error::Domain(format!(
                    "monomial coefficient {} must be positive",
                    t.coefficient
                )));
            }
            for &(i, p) in &t.exponents {
                if i >= num_vars {
                    return Err(Error::Domain(format!(
                        "monomial references variable {i}, program has {num_vars}"
                    )));
                }
                if !p.is_finite() {
                    return Err(Error::Domain("non-finite exponent".to_string()));
                }
            }
            rows.push((t.coefficient.ln(), t.exponents.clone()));
        }
        Ok(Self { rows })
    }

    /// Log-sum-exp value, gradient and Hessian at `y` (max-shifted).
    fn eval(&self, y: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let n = y.len();
        let z: Vec<f64> = self
            .rows
            .iter()
            .map(|(b, row)| b + row.iter().map(|&(i, p)| p * y[i]).sum::<f64>())
            .collect();
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let expz: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
        let total: f64 = expz.iter().sum();
        let value = m + total.ln();

        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        for ((_, row), w) in self.rows.iter().zip(expz.iter().map(|e| e / total)) {
            for &(i, p) in row {
                grad[i] += w * p;
                for &(i2, p2) in row {
                    hess[(i, i2)] += w * p * p2;
                }
            }
        }
        // hess currently holds E[a a^T]; subtract the rank-one mean part.
        for i in 0..n {
            for i2 in 0..n {
                hess[(i, i2)] -= grad[i] * grad[i2];
            }
        }
        (value, grad, hess)
    }

    fn value(&self, y: &DVector<f64>) -> f64 {
        let z = self
            .rows
            .iter()
            .map(|(b, row)| b + row.iter().map(|&(i, p)| p * y[i]).sum::<f64>());
        let z: Vec<f64> = z.collect();
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
    }
}

fn solve_spd(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let n = h.nrows();
    let scale = 1.0 + h.diagonal().amax();
    let mut ridge = 0.0;
    for _ in 0..12 {
        let m = if ridge == 0.0 {
            h.clone()
        } else {
            h + DMatrix::identity(n, n) * ridge
        };
        if let Some(ch) = m.cholesky() {
            return Some(ch.solve(&(-g)));
        }
        ridge = if ridge == 0.0 {
            1e-12 * scale
        } else {
            ridge * 100.0
        };
    }
    None
}

/// Damped Newton on a smooth convex barrier. `eval` returns `None` outside
/// the barrier's domain.
fn newton_minimize<F>(y: &mut DVector<f64>, max_iters: usize, eval: F)
where
    F: Fn(&DVector<f64>) -> Option<(f64, DVector<f64>, DMatrix<f64>)>,
{
    for _ in 0..max_iters {
        let Some((f, g, h)) = eval(y) else { return };
        let Some(mut d) = solve_spd(&h, &g) else {
            return;
        };
        let norm = d.norm();
        if norm > MAX_NEWTON_STEP {
            d *= MAX_NEWTON_STEP / norm;
        }
        let slope = g.dot(&d);
        if slope >= 0.0 || -slope * 0.5 < 1e-14 * (1.0 + f.abs()) {
            return;
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = &*y + &d * alpha;
            if let Some((fc, _, _)) = eval(&cand) {
                if fc <= f + ARMIJO_SLOPE * alpha * slope {
                    *y = cand;
                    accepted = true;
                    break;
                }
            }
            alpha *= ARMIJO_SHRINK;
        }
        if !accepted {
            return;
        }
    }
}

/// Finds a strictly feasible `y` by minimizing the worst constraint excess.
fn phase_one(constraints: &[LogPosy], n: usize, y0: &DVector<f64>) -> Result<DVector<f64>> {
    let worst = |y: &DVector<f64>| -> f64 {
        constraints
            .iter()
            .map(|c| c.value(y))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut y = y0.clone();
    let mut s = worst(&y) + 1.0;
    let mut t = 1.0;
    for _ in 0..MAX_BARRIER_STAGES {
        // Variables (y, s); stage objective s + (-sum ln(s - F_j(y))) / t,
        // normalized by t so values stay O(1) at tight barriers. Minimizing
        // s is only a means to an end, so take single Newton steps and stop
        // at the first strictly feasible iterate; the subproblem itself can
        // be unbounded below when every constraint can be pushed to -inf.
        let mut z = DVector::zeros(n + 1);
        z.rows_mut(0, n).copy_from(&y);
        z[n] = s;
        for _ in 0..NEWTON_ITERS_PER_STAGE {
            let before = z.clone();
            newton_minimize(&mut z, 1, |z| {
                let yv = z.rows(0, n).into_owned();
                let sv = z[n];
                let mut val = sv;
                let mut grad = DVector::zeros(n + 1);
                grad[n] = 1.0;
                let mut hess = DMatrix::zeros(n + 1, n + 1);
                for c in constraints {
                    let (fv, fg, fh) = c.eval(&yv);
                    let gap = sv - fv;
                    if gap <= 0.0 {
                        return None;
                    }
                    val -= gap.ln() / t;
                    let inv = 1.0 / (gap * t);
                    let inv2 = inv / gap;
                    for i in 0..n {
                        grad[i] += fg[i] * inv;
                        for i2 in 0..n {
                            hess[(i, i2)] += fh[(i, i2)] * inv + fg[i] * fg[i2] * inv2;
                        }
                        hess[(i, n)] -= fg[i] * inv2;
                        hess[(n, i)] -= fg[i] * inv2;
                    }
                    grad[n] -= inv;
                    hess[(n, n)] += inv2;
                }
                Some((val, grad, hess))
            });
            let candidate = z.rows(0, n).into_owned();
            if worst(&candidate) < -1e-7 {
                return Ok(candidate);
            }
            if z == before {
                break;
            }
        }
        y = z.rows(0, n).into_owned();
        s = z[n];
        t *= 10.0;
    }
    if worst(&y) < -1e-12 {
        return Ok(y);
    }
    Err(Error::InfeasibleProgram(
        "no strictly feasible point found".to_string(),
    ))
}

/// `min ||a x - b||` subject to `x >= 0` (Lawson-Hanson active set).
fn nonnegative_lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let m = a.ncols();
    let mut passive = vec![false; m];
    let mut x = DVector::zeros(m);
    let tol = 1e-12 * (1.0 + b.amax());
    for _ in 0..(3 * m + 10) {
        let resid = b - a * &x;
        let w = a.transpose() * &resid;
        let mut enter = None;
        for j in 0..m {
            if !passive[j] && w[j] > tol && enter.map_or(true, |(_, wb)| w[j] > wb) {
                enter = Some((j, w[j]));
            }
        }
        let Some((enter, _)) = enter else { break };
        passive[enter] = true;
        loop {
            let cols: Vec<usize> = (0..m).filter(|&j| passive[j]).collect();
            let sub = DMatrix::from_fn(a.nrows(), cols.len(), |r, c| a[(r, cols[c])]);
            let z = sub
                .svd(true, true)
                .solve(b, 1e-12)
                .unwrap_or_else(|_| DVector::zeros(cols.len()));
            if z.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (c, &j) in cols.iter().enumerate() {
                    x[j] = z[c];
                }
                break;
            }
            // Step toward z until the first passive coordinate hits zero,
            // then retire it and re-solve.
            let mut alpha = 1.0f64;
            for (c, &j) in cols.iter().enumerate() {
                if z[c] <= 0.0 && x[j] - z[c] > 0.0 {
                    alpha = alpha.min(x[j] / (x[j] - z[c]));
                }
            }
            for (c, &j) in cols.iter().enumerate() {
                x[j] += alpha * (z[c] - x[j]);
                if z[c] <= 0.0 && x[j] <= tol {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    x
}

/// KKT residual of `y` in the log domain: stationarity under best-fit
/// nonnegative duals, complementary slackness, and primal feasibility.
///
/// Duals are fitted by least squares rather than read off the barrier as
/// 1/(t gap); at tight gaps the latter amplifies the rounding error of the
/// gap itself and the residual stalls far above what the point deserves.
fn kkt_residual_at(objective: &LogPosy, constraints: &[LogPosy], y: &DVector<f64>) -> f64 {
    let (_, g0, _) = objective.eval(y);
    if constraints.is_empty() {
        return g0.amax();
    }
    let n = g0.len();
    let evals: Vec<(f64, DVector<f64>)> = constraints
        .iter()
        .map(|c| {
            let (fv, fg, _) = c.eval(y);
            (fv, fg)
        })
        .collect();
    let a = DMatrix::from_fn(n, evals.len(), |r, c| evals[c].1[r]);
    let lambda = nonnegative_lstsq(&a, &(-&g0));
    let stationarity = (&g0 + &a * &lambda).amax();
    let mut primal = 0.0f64;
    let mut complementarity = 0.0f64;
    for (j, (fv, _)) in evals.iter().enumerate() {
        primal = primal.max(*fv);
        complementarity = complementarity.max(lambda[j] * fv.abs());
    }
    stationarity.max(complementarity).max(primal)
}

/// Solves the program to `tol` on the KKT residual.
///
/// `start`, when given, must be strictly positive; if it is not strictly
/// feasible a feasibility phase runs first. Infeasible programs error.
pub fn solve_gp(program: &GeometricProgram, start: Option<&[f64]>, tol: f64) -> Result<GpSolution> {
    let n = program.num_vars;
    if n == 0 {
        return Err(Error::Domain("program has no variables".to_string()));
    }
    let objective = LogPosy::build(&program.objective, n)?;
    let constraints: Vec<LogPosy> = program
        .constraints
        .iter()
        .map(|c| LogPosy::build(c, n))
        .collect::<Result<_>>()?;

    let mut y = match start {
        Some(x0) => {
            if x0.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: x0.len(),
                });
            }
            if x0.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
                return Err(Error::Domain(
                    "starting point must be strictly positive".to_string(),
                ));
            }
            DVector::from_iterator(n, x0.iter().map(|v| v.ln()))
        }
        None => DVector::zeros(n),
    };
    if constraints.iter().any(|c| c.value(&y) >= -1e-12) {
        y = phase_one(&constraints, n, &y)?;
    }

    let m = constraints.len() as f64;
    let mut t = 1.0;
    let mut stages = 0;
    loop {
        // Stage objective F0 + (-sum ln(-F_j)) / t; dividing by t keeps the
        // values O(1) so the line search stays meaningful at tight barriers.
        newton_minimize(&mut y, NEWTON_ITERS_PER_STAGE, |y| {
            let (f0, g0, h0) = objective.eval(y);
            let mut val = f0;
            let mut grad = g0;
            let mut hess = h0;
            for c in &constraints {
                let (fv, fg, fh) = c.eval(y);
                if fv >= 0.0 {
                    return None;
                }
                let inv = -1.0 / (fv * t);
                let inv2 = -inv / fv;
                val -= (-fv).ln() / t;
                for i in 0..grad.len() {
                    grad[i] += fg[i] * inv;
                }
                hess += fh * inv + &fg * fg.transpose() * inv2;
            }
            Some((val, grad, hess))
        });
        stages += 1;
        if m / t <= 0.1 * tol || stages >= MAX_BARRIER_STAGES {
            break;
        }
        t *= 10.0;
    }

    let kkt_residual = kkt_residual_at(&objective, &constraints, &y);

    let objective_value = objective.value(&y).exp();
    Ok(GpSolution {
        x: y.iter().map(|v| v.exp()).collect(),
        objective: objective_value,
        kkt_residual,
        converged: kkt_residual <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_variable_lower_bound() {
        // min x s.t. 2/x <= 1  ->  x = 2.
        let program = GeometricProgram {
            num_vars: 1,
            objective: Posynomial::new(vec![Monomial::var(1.0, 0, 1.0)]),
            constraints: vec![Posynomial::new(vec![Monomial::var(2.0, 0, -1.0)])],
        };
        let sol = solve_gp(&program, None, 1e-9).unwrap();
        assert!(sol.converged, "kkt residual {}", sol.kkt_residual);
        assert_relative_eq!(sol.x[0], 2.0, epsilon = 1e-6);
        assert_relative_eq!(sol.objective, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn product_pushed_to_box_corner() {
        // min 1/(x y) s.t. x <= 1, y <= 1  ->  x = y = 1.
        let program = GeometricProgram {
            num_vars: 2,
            objective: Posynomial::new(vec![Monomial {
                coefficient: 1.0,
                exponents: vec![(0, -1.0), (1, -1.0)],
            }]),
            constraints: vec![
                Posynomial::new(vec![Monomial::var(1.0, 0, 1.0)]),
                Posynomial::new(vec![Monomial::var(1.0, 1, 1.0)]),
            ],
        };
        let sol = solve_gp(&program, Some(&[0.3, 0.4]), 1e-9).unwrap();
        assert!(sol.converged);
        assert_relative_eq!(sol.x[0], 1.0, epsilon = 1e-6);
        assert_relative_eq!(sol.x[1], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn arithmetic_geometric_tradeoff() {
        // min x + y s.t. 1/(x y) <= 1  ->  x = y = 1, objective 2.
        let program = GeometricProgram {
            num_vars: 2,
            objective: Posynomial::new(vec![
                Monomial::var(1.0, 0, 1.0),
                Monomial::var(1.0, 1, 1.0),
            ]),
            constraints: vec![Posynomial::new(vec![Monomial {
                coefficient: 1.0,
                exponents: vec![(0, -1.0), (1, -1.0)],
            }])],
        };
        let sol = solve_gp(&program, Some(&[3.0, 5.0]), 1e-9).unwrap();
        assert!(sol.converged);
        assert_relative_eq!(sol.objective, 2.0, epsilon = 1e-6);
        assert_relative_eq!(sol.x[0], 1.0, epsilon = 1e-5);
    }

    #[test]
    fn contradictory_bounds_detected() {
        // x <= 1 and x >= 2 cannot hold together.
        let program = GeometricProgram {
            num_vars: 1,
            objective: Posynomial::new(vec![Monomial::var(1.0, 0, 1.0)]),
            constraints: vec![
                Posynomial::new(vec![Monomial::var(1.0, 0, 1.0)]),
                Posynomial::new(vec![Monomial::var(2.0, 0, -1.0)]),
            ],
        };
        match solve_gp(&program, None, 1e-9) {
            Err(Error::InfeasibleProgram(_)) => {}
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn bad_programs_rejected() {
        let program = GeometricProgram {
            num_vars: 1,
            objective: Posynomial::new(vec![Monomial::var(-1.0, 0, 1.0)]),
            constraints: vec![],
        };
        assert!(solve_gp(&program, None, 1e-9).is_err());

        let program = GeometricProgram {
            num_vars: 1,
            objective: Posynomial::new(vec![Monomial::var(1.0, 3, 1.0)]),
            constraints: vec![],
        };
        assert!(solve_gp(&program, None, 1e-9).is_err());
    }

    #[test]
    fn equality_like_active_constraints() {
        // min x^-2 y^-1 s.t. x y <= 4, x/y <= 1: optimum at x = y = 2.
        let program = GeometricProgram {
            num_vars: 2,
            objective: Posynomial::new(vec![Monomial {
                coefficient: 1.0,
                exponents: vec![(0, -2.0), (1, -1.0)],
            }]),
            constraints: vec![
                Posynomial::new(vec![Monomial {
                    coefficient: 0.25,
                    exponents: vec![(0, 1.0), (1, 1.0)],
                }]),
                Posynomial::new(vec![Monomial {
                    coefficient: 1.0,
                    exponents: vec![(0, 1.0), (1, -1.0)],
                }]),
            ],
        };
        let sol = solve_gp(&program, Some(&[0.5, 1.0]), 1e-9).unwrap();
        assert!(sol.converged);
        assert_relative_eq!(sol.x[0], 2.0, epsilon = 1e-5);
        assert_relative_eq!(sol.x[1], 2.0, epsilon = 1e-5);
    }
}
