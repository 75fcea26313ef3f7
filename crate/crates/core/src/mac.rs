//! Maximum departure region of the two-user multiple-access channel where
//! the shared receiver also harvests its (decoding) energy.
//!
//! Two decoding procedures are covered. Under simultaneous decoding the
//! receiver pays the cost of the sum rate each slot and the weighted
//! boundary problem is convex: it splits into an inner water-filling over
//! the second user's power on top of the first user's, and an outer
//! water-flow over the first user's power. Under successive cancellation
//! the receiver decodes user 2 first (treating user 1 as noise), the
//! problem turns signomial, and it is driven to a local optimum by
//! successive convex approximation with one geometric program per round.

use crate::gp::{solve_gp, GeometricProgram, Monomial, Posynomial};
use crate::model::{check_scenario, EnergyProfile, PowerPolicy, RateFunction, Scenario};
use crate::waterfill::{
    cumulative_to_arrivals, directional_waterfill, outer_waterflow, suffix_min_envelope, Bin,
    OuterProblem, WATERFLOW_DEFAULT_MAX_SWEEPS,
};
use crate::{Error, Result};

/// Default round cap for the successive-approximation loop.
pub const DEFAULT_MAX_SCA_ITERS: usize = 200;

/// Smallest power value used when linearizing around a (near-)zero iterate;
/// the approximation point degenerates at exactly zero.
const X_FLOOR: f64 = 1e-9;

/// Relative pull toward the interior applied to warm starts, so the
/// feasibility phase of the program solver can be skipped.
const START_SHRINK: f64 = 1e-7;

/// Non-negative weights attached to the two users' departed bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightPair {
    pub mu1: f64,
    pub mu2: f64,
}

impl WeightPair {
    pub fn new(mu1: f64, mu2: f64) -> Result<Self> {
        let pair = Self { mu1, mu2 };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.mu1) || !ok(self.mu2) || self.mu1 + self.mu2 <= 0.0 {
            return Err(Error::Domain(
                "weights must be finite, non-negative and not both zero".to_string(),
            ));
        }
        Ok(())
    }

    /// Same direction scaled to `mu1 + mu2 = 1`.
    pub fn normalized(&self) -> WeightPair {
        let s = self.mu1 + self.mu2;
        WeightPair {
            mu1: self.mu1 / s,
            mu2: self.mu2 / s,
        }
    }
}

/// One boundary point of the departure region.
#[derive(Debug, Clone)]
pub struct RegionPoint {
    /// Total departed bits of user 1, `sum_i g(p1_i)`.
    pub b1: f64,
    /// Total departed bits of user 2 under the active decoding mode.
    pub b2: f64,
    pub weights: WeightPair,
    /// Per-slot transmit powers of the two users.
    pub policy: (PowerPolicy, PowerPolicy),
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodingMode {
    Simultaneous,
    Successive,
}

/// Boundary points in sweep order (b1-heavy corner first).
#[derive(Debug, Clone)]
pub struct DepartureRegion {
    pub points: Vec<RegionPoint>,
    pub mode: DecodingMode,
}

struct MacParts<'a> {
    tx1: &'a EnergyProfile,
    tx2: &'a EnergyProfile,
    rx: &'a EnergyProfile,
    rate: RateFunction,
}

impl<'a> MacParts<'a> {
    fn swapped(&self) -> MacParts<'a> {
        MacParts {
            tx1: self.tx2,
            tx2: self.tx1,
            rx: self.rx,
            rate: self.rate,
        }
    }

    fn sum_rate(&self, powers: &[f64]) -> f64 {
        powers.iter().map(|&p| self.rate.g(p)).sum()
    }
}

fn mac_parts(scenario: &Scenario) -> Result<MacParts<'_>> {
    let Scenario::Mac { tx1, tx2, rx, link } = scenario else {
        return Err(Error::Unsupported(
            "solver requires a multiple-access scenario".to_string(),
        ));
    };
    if !link.decoding_matches_rate_inverse() {
        return Err(Error::Unsupported(
            "multiple-access solvers require a decoding cost equal to the rate inverse".to_string(),
        ));
    }
    let violations = check_scenario(scenario);
    if !violations.is_empty() {
        return Err(Error::InvalidScenario { violations });
    }
    Ok(MacParts {
        tx1,
        tx2,
        rx,
        rate: link.rate(),
    })
}

/// Best sum throughput user 2 can add on top of a fixed user-1 power path.
///
/// User 2's spendable energy through slot k is capped by its own harvest and
/// by the receiver energy left after decoding user 1's share; the cap need
/// not be monotone, so only its suffix minimum binds. The resulting budget
/// is water-filled over the levels user 1 already occupies.
fn inner_sum_rate(p1: &[f64], parts: &MacParts) -> Result<(f64, PowerPolicy)> {
    let cum_e2 = parts.tx2.cumulative();
    let cum_rx = parts.rx.cumulative();
    let mut cum_p1 = 0.0;
    let bound: Vec<f64> = p1
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            cum_p1 += p;
            cum_e2[i].min((cum_rx[i] - cum_p1).max(0.0))
        })
        .collect();
    let budget = EnergyProfile::new(cumulative_to_arrivals(&suffix_min_envelope(&bound)))?;
    let bins: Vec<Bin> = p1.iter().map(|&p| Bin::new(p)).collect();
    let p2 = directional_waterfill(&bins, &budget)?;
    let sum = p1
        .iter()
        .zip(p2.as_slice())
        .map(|(&a, &b)| parts.rate.g(a + b))
        .sum();
    Ok((sum, p2))
}

/// Best achievable sum rate when the first user's powers are pinned to
/// `p1`: the overlay water-fill's value. Concave in `p1`; subtracting the
/// first user's own rates gives the second user's rate, which is
/// coordinate-wise decreasing in `p1`.
pub fn joint_best_sum_rate(scenario: &Scenario, p1: &PowerPolicy) -> Result<f64> {
    let parts = mac_parts(scenario)?;
    if p1.len() != parts.tx1.len() {
        return Err(Error::LengthMismatch {
            expected: parts.tx1.len(),
            got: p1.len(),
        });
    }
    let (sum, _) = inner_sum_rate(p1.as_slice(), &parts)?;
    Ok(sum)
}

/// Weighted solve for one user alone (the other weight is zero); the active
/// user's budget is the minimum of its own harvest and the receiver's.
fn solve_single_sided(
    parts: &MacParts,
    first_user: bool,
    weights: WeightPair,
) -> Result<RegionPoint> {
    let active = if first_user { parts.tx1 } else { parts.tx2 };
    let cum: Vec<f64> = active
        .cumulative()
        .iter()
        .zip(parts.rx.cumulative())
        .map(|(&a, b)| a.min(b))
        .collect();
    let budget = EnergyProfile::new(cumulative_to_arrivals(&cum))?;
    let bins = vec![Bin::new(0.0); budget.len()];
    let p = directional_waterfill(&bins, &budget)?;
    let b = parts.sum_rate(p.as_slice());
    let zeros = PowerPolicy::new(vec![0.0; budget.len()])?;
    let (b1, b2, policy) = if first_user {
        (b, 0.0, (p, zeros))
    } else {
        (0.0, b, (zeros, p))
    };
    Ok(RegionPoint {
        b1,
        b2,
        weights,
        policy,
        converged: true,
    })
}

/// Re-splits a total power path to favor user 1, when user 2's harvest can
/// cover the remainder; returns `None` when it cannot.
fn b1_max_split(total: &[f64], parts: &MacParts) -> Result<Option<(PowerPolicy, PowerPolicy)>> {
    let bins: Vec<Bin> = total.iter().map(|&c| Bin::capped(0.0, c)).collect();
    let p1 = directional_waterfill(&bins, parts.tx1)?;
    let p2: Vec<f64> = total
        .iter()
        .zip(p1.as_slice())
        .map(|(&t, &a)| (t - a).max(0.0))
        .collect();
    let cum_e2 = parts.tx2.cumulative();
    let mut acc = 0.0;
    for (i, &v) in p2.iter().enumerate() {
        acc += v;
        if acc > cum_e2[i] + 1e-9 {
            return Ok(None);
        }
    }
    Ok(Some((p1, PowerPolicy::new(p2)?)))
}

fn simultaneous_unswapped(parts: &MacParts, weights: WeightPair, tol: f64) -> Result<RegionPoint> {
    let equal = weights.mu1 == weights.mu2;
    // Outer budget: user 1 can never usefully exceed its own harvest or the
    // receiver's decoding energy.
    let cum_l: Vec<f64> = parts
        .tx1
        .cumulative()
        .iter()
        .zip(parts.rx.cumulative())
        .map(|(&a, b)| a.min(b))
        .collect();
    let budget = EnergyProfile::new(cumulative_to_arrivals(&cum_l))?;
    // mu scales the sum-rate term against user 1's own rate; at equal
    // weights only the sum rate matters.
    let mu = weights.mu2 / (weights.mu1 - weights.mu2);
    let evaluate = |p1: &[f64]| -> f64 {
        match inner_sum_rate(p1, parts) {
            Ok((sum, _)) => {
                if equal {
                    sum
                } else {
                    mu * sum + parts.sum_rate(p1)
                }
            }
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let problem = OuterProblem {
        evaluate: &evaluate,
        budget,
        allow_discard: true,
        monotone_allocation_required: false,
    };
    let outcome = outer_waterflow(&problem, tol, WATERFLOW_DEFAULT_MAX_SWEEPS)?;
    let p1 = outcome.allocation;
    let (sum, p2) = inner_sum_rate(p1.as_slice(), parts)?;

    if equal {
        // Only the sum rate was optimized; report the split that favors b1.
        let total: Vec<f64> = p1
            .as_slice()
            .iter()
            .zip(p2.as_slice())
            .map(|(&a, &b)| a + b)
            .collect();
        if let Some((q1, q2)) = b1_max_split(&total, parts)? {
            let b1 = parts.sum_rate(q1.as_slice());
            return Ok(RegionPoint {
                b1,
                b2: (sum - b1).max(0.0),
                weights,
                policy: (q1, q2),
                converged: outcome.converged,
            });
        }
    }
    let b1 = parts.sum_rate(p1.as_slice());
    Ok(RegionPoint {
        b1,
        b2: (sum - b1).max(0.0),
        weights,
        policy: (p1, p2),
        converged: outcome.converged,
    })
}

fn swap_point(point: RegionPoint) -> RegionPoint {
    RegionPoint {
        b1: point.b2,
        b2: point.b1,
        weights: point.weights,
        policy: (point.policy.1, point.policy.0),
        converged: point.converged,
    }
}

/// Boundary point under simultaneous decoding: the receiver spends the sum
/// rate's worth of power each slot, so feasibility is three families of
/// cumulative constraints and the weighted problem is convex.
pub fn solve_mac_simultaneous(
    scenario: &Scenario,
    weights: WeightPair,
    tol: f64,
) -> Result<RegionPoint> {
    weights.validate()?;
    let parts = mac_parts(scenario)?;
    if weights.mu2 == 0.0 {
        return solve_single_sided(&parts, true, weights);
    }
    if weights.mu1 == 0.0 {
        return solve_single_sided(&parts, false, weights);
    }
    if weights.mu1 >= weights.mu2 {
        simultaneous_unswapped(&parts, weights, tol)
    } else {
        let swapped = WeightPair {
            mu1: weights.mu2,
            mu2: weights.mu1,
        };
        let mut point = simultaneous_unswapped(&parts.swapped(), swapped, tol)?;
        point.weights = weights;
        Ok(swap_point(point))
    }
}

/// One recorded round of the successive-approximation loop, in the
/// substituted variables (`x1 = p1`, `x2 = p2 / (1 + p1)`).
#[derive(Debug, Clone)]
pub struct ScaIterate {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub weighted_value: f64,
}

fn weighted_value(rate: RateFunction, weights: WeightPair, x1: &[f64], x2: &[f64]) -> f64 {
    let w1: f64 = x1.iter().map(|&v| rate.g(v)).sum();
    let w2: f64 = x2.iter().map(|&v| rate.g(v)).sum();
    weights.mu1 * w1 + weights.mu2 * w2
}

/// Checks the three cumulative families of the successive-decoding problem.
fn successive_feasible(parts: &MacParts, x1: &[f64], x2: &[f64], tol: f64) -> bool {
    let cum_e1 = parts.tx1.cumulative();
    let cum_e2 = parts.tx2.cumulative();
    let cum_rx = parts.rx.cumulative();
    let (mut a1, mut a2, mut ar) = (0.0, 0.0, 0.0);
    for i in 0..x1.len() {
        a1 += x1[i];
        a2 += (1.0 + x1[i]) * x2[i];
        ar += x1[i] + x2[i];
        if a1 > cum_e1[i] + tol || a2 > cum_e2[i] + tol || ar > cum_rx[i] + tol {
            return false;
        }
    }
    true
}

/// The monomial lower bound of `1 + x` that is tight at the linearization
/// point: `u(x; alpha) = alpha^-alpha (1-alpha)^(alpha-1) x^(1-alpha)`.
fn am_gm_coefficient(alpha: f64) -> f64 {
    (-alpha * alpha.ln() - (1.0 - alpha) * (1.0 - alpha).ln()).exp()
}

fn am_gm_value(x: f64, alpha: f64) -> f64 {
    am_gm_coefficient(alpha) * x.powf(1.0 - alpha)
}

/// Builds the per-round geometric program: exact cumulative constraints,
/// the linearized rate couplers `t <= u(x; alpha)`, and the weighted-rate
/// objective as the single monomial `prod t1^-mu1 t2^-mu2`.
fn build_round_program(
    parts: &MacParts,
    weights: WeightPair,
    alpha1: &[f64],
    alpha2: &[f64],
) -> GeometricProgram {
    let n = alpha1.len();
    let x1 = |i: usize| i;
    let x2 = |i: usize| n + i;
    let t1 = |i: usize| 2 * n + i;
    let t2 = |i: usize| 3 * n + i;

    let mut objective_exponents = Vec::with_capacity(2 * n);
    for i in 0..n {
        objective_exponents.push((t1(i), -weights.mu1));
        objective_exponents.push((t2(i), -weights.mu2));
    }
    let objective = Posynomial::new(vec![Monomial {
        coefficient: 1.0,
        exponents: objective_exponents,
    }]);

    let mut constraints = Vec::with_capacity(3 * n + 2 * n);
    let cum_e1 = parts.tx1.cumulative();
    let cum_e2 = parts.tx2.cumulative();
    let cum_rx = parts.rx.cumulative();
    for k in 0..n {
        let mut terms = Vec::with_capacity(k + 1);
        for i in 0..=k {
            terms.push(Monomial::var(1.0 / cum_e1[k], x1(i), 1.0));
        }
        constraints.push(Posynomial::new(terms));

        let mut terms = Vec::with_capacity(2 * (k + 1));
        for i in 0..=k {
            terms.push(Monomial::var(1.0 / cum_e2[k], x2(i), 1.0));
            terms.push(Monomial {
                coefficient: 1.0 / cum_e2[k],
                exponents: vec![(x1(i), 1.0), (x2(i), 1.0)],
            });
        }
        constraints.push(Posynomial::new(terms));

        let mut terms = Vec::with_capacity(2 * (k + 1));
        for i in 0..=k {
            terms.push(Monomial::var(1.0 / cum_rx[k], x1(i), 1.0));
            terms.push(Monomial::var(1.0 / cum_rx[k], x2(i), 1.0));
        }
        constraints.push(Posynomial::new(terms));
    }
    for i in 0..n {
        constraints.push(Posynomial::new(vec![Monomial {
            coefficient: 1.0 / am_gm_coefficient(alpha1[i]),
            exponents: vec![(t1(i), 1.0), (x1(i), alpha1[i] - 1.0)],
        }]));
        constraints.push(Posynomial::new(vec![Monomial {
            coefficient: 1.0 / am_gm_coefficient(alpha2[i]),
            exponents: vec![(t2(i), 1.0), (x2(i), alpha2[i] - 1.0)],
        }]));
    }

    GeometricProgram {
        num_vars: 4 * n,
        objective,
        constraints,
    }
}

fn successive_unswapped(
    parts: &MacParts,
    weights: WeightPair,
    init: Option<(&PowerPolicy, &PowerPolicy)>,
    tol: f64,
    max_sca_iters: usize,
) -> Result<(RegionPoint, Vec<ScaIterate>)> {
    let n = parts.tx1.len();
    for (name, cum) in [
        ("first transmitter", parts.tx1.cumulative()),
        ("second transmitter", parts.tx2.cumulative()),
        ("receiver", parts.rx.cumulative()),
    ] {
        if cum.iter().any(|&c| c <= 0.0) {
            return Err(Error::Unsupported(format!(
                "successive decoding requires strictly positive cumulative energy at the {name}"
            )));
        }
    }

    let (mut x1, mut x2): (Vec<f64>, Vec<f64>) = match init {
        Some((p1, p2)) => {
            if p1.len() != n || p2.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: p1.len().max(p2.len()),
                });
            }
            let x1: Vec<f64> = p1.as_slice().to_vec();
            let x2: Vec<f64> = p2
                .as_slice()
                .iter()
                .zip(&x1)
                .map(|(&p, &a)| p / (1.0 + a))
                .collect();
            if !successive_feasible(parts, &x1, &x2, 1e-9) {
                return Err(Error::Domain(
                    "initial policy violates the successive-decoding constraints".to_string(),
                ));
            }
            (x1, x2)
        }
        None => (vec![0.0; n], vec![0.0; n]),
    };

    let mut value = weighted_value(parts.rate, weights, &x1, &x2);
    let mut trace = vec![ScaIterate {
        x1: x1.clone(),
        x2: x2.clone(),
        weighted_value: value,
    }];
    let mut converged = false;
    // Normalized weights only change the objective monomial by a positive
    // power, which moves no optima but keeps its exponents O(1).
    let scaled = weights.normalized();

    for _ in 0..max_sca_iters {
        let alpha1: Vec<f64> = x1.iter().map(|&v| 1.0 / (1.0 + v.max(X_FLOOR))).collect();
        let alpha2: Vec<f64> = x2.iter().map(|&v| 1.0 / (1.0 + v.max(X_FLOOR))).collect();
        let program = build_round_program(parts, scaled, &alpha1, &alpha2);

        let mut start = vec![0.0; 4 * n];
        for i in 0..n {
            let s1 = (x1[i] * (1.0 - START_SHRINK)).max(X_FLOOR * 1e-3);
            let s2 = (x2[i] * (1.0 - START_SHRINK)).max(X_FLOOR * 1e-3);
            start[i] = s1;
            start[n + i] = s2;
            start[2 * n + i] = am_gm_value(s1, alpha1[i]) * (1.0 - START_SHRINK);
            start[3 * n + i] = am_gm_value(s2, alpha2[i]) * (1.0 - START_SHRINK);
        }
        let sol = solve_gp(&program, Some(&start), 1e-10)?;
        x1 = sol.x[..n].to_vec();
        x2 = sol.x[n..2 * n].to_vec();
        let new_value = weighted_value(parts.rate, weights, &x1, &x2);
        trace.push(ScaIterate {
            x1: x1.clone(),
            x2: x2.clone(),
            weighted_value: new_value,
        });
        let done = (new_value - value).abs() <= tol * (1.0 + value.abs());
        value = new_value;
        if done {
            converged = true;
            break;
        }
    }

    let p1 = PowerPolicy::new(x1.clone())?;
    let p2 = PowerPolicy::new(x1.iter().zip(&x2).map(|(&a, &b)| (1.0 + a) * b).collect())?;
    let b1: f64 = x1.iter().map(|&v| parts.rate.g(v)).sum();
    let b2: f64 = x2.iter().map(|&v| parts.rate.g(v)).sum();
    Ok((
        RegionPoint {
            b1,
            b2,
            weights,
            policy: (p1, p2),
            converged,
        },
        trace,
    ))
}

/// Like [`solve_mac_successive`] but also returns the per-round iterates,
/// for diagnostics and the property suites.
pub fn solve_mac_successive_traced(
    scenario: &Scenario,
    weights: WeightPair,
    init: Option<(&PowerPolicy, &PowerPolicy)>,
    tol: f64,
    max_sca_iters: usize,
) -> Result<(RegionPoint, Vec<ScaIterate>)> {
    weights.validate()?;
    let parts = mac_parts(scenario)?;
    // The corner points coincide across decoding modes: with the other user
    // silent, successive decoding degenerates to the single-user problem.
    if weights.mu2 == 0.0 {
        return Ok((solve_single_sided(&parts, true, weights)?, Vec::new()));
    }
    if weights.mu1 == 0.0 {
        return Ok((solve_single_sided(&parts, false, weights)?, Vec::new()));
    }
    if weights.mu1 >= weights.mu2 {
        successive_unswapped(&parts, weights, init, tol, max_sca_iters)
    } else {
        let swapped_weights = WeightPair {
            mu1: weights.mu2,
            mu2: weights.mu1,
        };
        let swapped_init = init.map(|(p1, p2)| (p2, p1));
        let (mut point, trace) = successive_unswapped(
            &parts.swapped(),
            swapped_weights,
            swapped_init,
            tol,
            max_sca_iters,
        )?;
        point.weights = weights;
        Ok((swap_point(point), trace))
    }
}

/// Boundary point under successive cancellation: the receiver decodes user 2
/// first, treating user 1 as noise, which lowers its decoding bill but makes
/// the feasibility set non-convex. Converges to a local optimum; the point
/// is flagged unconverged if the round cap is hit first.
pub fn solve_mac_successive(
    scenario: &Scenario,
    weights: WeightPair,
    init: Option<(&PowerPolicy, &PowerPolicy)>,
    tol: f64,
    max_sca_iters: usize,
) -> Result<RegionPoint> {
    solve_mac_successive_traced(scenario, weights, init, tol, max_sca_iters).map(|(p, _)| p)
}

/// Weight pairs swept along the boundary: the b1 corner, log-spaced
/// `mu2/mu1` ratios over [0.1, 10] always including the equal-weight point,
/// then the b2 corner. All pairs are normalized to `mu1 + mu2 = 1`.
pub fn weight_grid(n_weights: usize) -> Result<Vec<WeightPair>> {
    if n_weights < 3 {
        return Err(Error::Domain(
            "a region sweep needs at least 3 weight points".to_string(),
        ));
    }
    let m = n_weights - 2;
    let mut ratios: Vec<f64> = (0..m)
        .map(|i| {
            let t = if m == 1 {
                0.0
            } else {
                -1.0 + 2.0 * i as f64 / (m - 1) as f64
            };
            10.0_f64.powf(t)
        })
        .collect();
    // Pin the middle ratio to exactly 1 so the sweep always contains the
    // equal-weight point.
    ratios[m / 2] = 1.0;
    let mut grid = Vec::with_capacity(n_weights);
    grid.push(WeightPair { mu1: 1.0, mu2: 0.0 });
    for rho in ratios {
        grid.push(WeightPair {
            mu1: 1.0 / (1.0 + rho),
            mu2: rho / (1.0 + rho),
        });
    }
    grid.push(WeightPair { mu1: 0.0, mu2: 1.0 });
    Ok(grid)
}

/// Sweeps the boundary of the departure region over [`weight_grid`].
///
/// In successive mode each point starts from the mapped simultaneous
/// solution at the same weights, which guarantees the local optimum found
/// dominates the simultaneous point.
pub fn sweep_region(
    scenario: &Scenario,
    mode: DecodingMode,
    n_weights: usize,
    tol: f64,
) -> Result<DepartureRegion> {
    let grid = weight_grid(n_weights)?;
    let mut points = Vec::with_capacity(grid.len());
    for weights in grid {
        let point = match mode {
            DecodingMode::Simultaneous => solve_mac_simultaneous(scenario, weights, tol)?,
            DecodingMode::Successive => {
                let sim = solve_mac_simultaneous(scenario, weights, tol)?;
                let init = (&sim.policy.0, &sim.policy.1);
                solve_mac_successive(scenario, weights, Some(init), tol, DEFAULT_MAX_SCA_ITERS)?
            }
        };
        points.push(point);
    }
    Ok(DepartureRegion { points, mode })
}
