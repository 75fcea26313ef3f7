//! Departure region of the two-user degraded broadcast channel with an
//! energy-harvesting transmitter and receivers.
//!
//! Superposition coding makes the strong receiver (unit noise) decode both
//! messages and the weak receiver (noise `sigma2 > 1`) decode only its own.
//! In the total/weak power variables the weighted problem is convex with a
//! per-slot coupling `p_t >= p_2`. When the strong user carries all the
//! weight the problem degenerates to a single-user water-fill; otherwise an
//! outer search over non-decreasing weak-user powers wraps an inner
//! minimum-power water-fill for the total power.

use crate::mac::{weight_grid, DecodingMode, DepartureRegion, RegionPoint, WeightPair};
use crate::model::{
    check_scenario, EnergyProfile, PowerPolicy, RateFunction, RatePolicy, Scenario,
};
use crate::waterfill::{
    cumulative_to_arrivals, directional_waterfill, min_power_backward_fill, outer_waterflow,
    suffix_min_envelope, Bin, OuterProblem, WATERFLOW_DEFAULT_MAX_SWEEPS,
};
use crate::{Error, Result};

/// Minimum transmit power achieving rates `(r1, r2)` (strong, weak) on a
/// degraded Gaussian pair with noise ratio `sigma2`, in base-2 rate units.
pub fn bc_min_power(r1: f64, r2: f64, sigma2: f64) -> Result<f64> {
    for (name, v) in [("r1", r1), ("r2", r2)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Domain(format!(
                "{name} must be a finite non-negative rate, got {v}"
            )));
        }
    }
    if !(sigma2.is_finite() && sigma2 > 1.0) {
        return Err(Error::Domain(format!(
            "sigma2 must exceed 1 (the weak receiver is noisier), got {sigma2}"
        )));
    }
    Ok((sigma2 - 1.0) * (2.0f64).powf(2.0 * r2) + (2.0f64).powf(2.0 * (r1 + r2)) - sigma2)
}

/// Per-slot power pair describing a broadcast policy: `p_t` buys the sum
/// rate, `p_2` the weak user's share of it.
#[derive(Debug, Clone)]
pub struct BcPowerSplit {
    pub p_t: PowerPolicy,
    pub p_2: PowerPolicy,
}

impl BcPowerSplit {
    pub fn new(p_t: PowerPolicy, p_2: PowerPolicy) -> Result<Self> {
        if p_t.len() != p_2.len() {
            return Err(Error::LengthMismatch {
                expected: p_t.len(),
                got: p_2.len(),
            });
        }
        for (slot, (&t, &w)) in p_t.as_slice().iter().zip(p_2.as_slice()).enumerate() {
            if t < w - 1e-12 {
                return Err(Error::InvalidValue { slot, value: t - w });
            }
        }
        Ok(Self { p_t, p_2 })
    }

    /// Recovers the per-user rates; the strong user's share is the leftover
    /// of the sum rate, clamped against rounding at the `p_t = p_2` edge.
    pub fn rates(&self, rate: RateFunction) -> Result<(RatePolicy, RatePolicy)> {
        let r2: Vec<f64> = self.p_2.as_slice().iter().map(|&p| rate.g(p)).collect();
        let r1: Vec<f64> = self
            .p_t
            .as_slice()
            .iter()
            .zip(&r2)
            .map(|(&t, &w)| (rate.g(t) - w).max(0.0))
            .collect();
        Ok((RatePolicy::new(r1)?, RatePolicy::new(r2)?))
    }
}

struct BcParts<'a> {
    tx: &'a EnergyProfile,
    rx1: &'a EnergyProfile,
    rx2: &'a EnergyProfile,
    sigma2: f64,
    rate: RateFunction,
}

fn bc_parts(scenario: &Scenario) -> Result<BcParts<'_>> {
    let Scenario::Bc {
        tx,
        rx1,
        rx2,
        sigma2,
        link,
    } = scenario
    else {
        return Err(Error::Unsupported(
            "solver requires a broadcast scenario".to_string(),
        ));
    };
    if !link.decoding_matches_rate_inverse() {
        return Err(Error::Unsupported(
            "broadcast solver requires a decoding cost equal to the rate inverse".to_string(),
        ));
    }
    if !(sigma2.is_finite() && *sigma2 > 1.0) {
        return Err(Error::Domain(format!("sigma2 must exceed 1, got {sigma2}")));
    }
    let violations = check_scenario(scenario);
    if !violations.is_empty() {
        return Err(Error::InvalidScenario { violations });
    }
    Ok(BcParts {
        tx,
        rx1,
        rx2,
        sigma2: *sigma2,
        rate: link.rate(),
    })
}

fn sum_rates(rate: RateFunction, powers: &[f64]) -> f64 {
    powers.iter().map(|&p| rate.g(p)).sum()
}

/// All power to the strong user: a single water-fill over the tighter of
/// the transmitter's and the strong receiver's cumulative energies.
fn solve_strong_only(parts: &BcParts, weights: WeightPair) -> Result<RegionPoint> {
    let cum: Vec<f64> = parts
        .tx
        .cumulative()
        .iter()
        .zip(parts.rx1.cumulative())
        .map(|(&a, b)| a.min(b))
        .collect();
    let budget = EnergyProfile::new(cumulative_to_arrivals(&cum))?;
    let bins = vec![Bin::new(0.0); budget.len()];
    let p_t = directional_waterfill(&bins, &budget)?;
    let b1 = sum_rates(parts.rate, p_t.as_slice());
    let zeros = PowerPolicy::new(vec![0.0; budget.len()])?;
    Ok(RegionPoint {
        b1,
        b2: 0.0,
        weights,
        policy: (p_t, zeros),
        converged: true,
    })
}

/// Best total power for a fixed weak-user share: water-fill the energy left
/// by the weak user's (noise-scaled) cost, with `p_2` as per-slot minimum.
///
/// The budget bound need not be monotone, so only its suffix minimum binds.
fn inner_strong_power(p2: &[f64], parts: &BcParts) -> Result<PowerPolicy> {
    let cum_tx = parts.tx.cumulative();
    let cum_rx1 = parts.rx1.cumulative();
    let mut cum_p2 = 0.0;
    let bound: Vec<f64> = p2
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            cum_p2 += p;
            cum_rx1[i].min(cum_tx[i] - (parts.sigma2 - 1.0) * cum_p2)
        })
        .collect();
    let budget = EnergyProfile::new(cumulative_to_arrivals(&suffix_min_envelope(&bound)))?;
    let bins: Vec<Bin> = p2.iter().map(|&m| Bin::with_min_power(0.0, m)).collect();
    min_power_backward_fill(&bins, &budget)
}

/// Best achievable total-stream rate when the weak user's powers are
/// pinned to the non-decreasing schedule `p_2`. Decreasing and concave in
/// `p_2`: the weak share only shrinks the budget left for total power.
pub fn total_stream_best_rate(scenario: &Scenario, p_2: &PowerPolicy) -> Result<f64> {
    let parts = bc_parts(scenario)?;
    if p_2.len() != parts.tx.len() {
        return Err(Error::LengthMismatch {
            expected: parts.tx.len(),
            got: p_2.len(),
        });
    }
    let p_t = inner_strong_power(p_2.as_slice(), &parts)?;
    Ok(sum_rates(parts.rate, p_t.as_slice()))
}

/// Weighted solve with the weak user favored (`mu1 < mu2`): outer search
/// over non-decreasing weak-user powers, inner minimum-power water-fill.
fn solve_weak_weighted(parts: &BcParts, weights: WeightPair, tol: f64) -> Result<RegionPoint> {
    let mu = weights.mu1 / (weights.mu2 - weights.mu1);
    let cum_tx = parts.tx.cumulative();
    let cum_rx1 = parts.rx1.cumulative();
    let cum_rx2 = parts.rx2.cumulative();
    // Outer budget keeping the inner problem feasible for every prefix.
    let a: Vec<f64> = (0..parts.tx.len())
        .map(|i| cum_rx2[i].min(cum_rx1[i]).min(cum_tx[i] / parts.sigma2))
        .collect();
    let budget = EnergyProfile::new(cumulative_to_arrivals(&a))?;
    let evaluate = |p2: &[f64]| -> f64 {
        match inner_strong_power(p2, parts) {
            Ok(p_t) => mu * sum_rates(parts.rate, p_t.as_slice()) + sum_rates(parts.rate, p2),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let problem = OuterProblem {
        evaluate: &evaluate,
        budget,
        allow_discard: true,
        monotone_allocation_required: true,
    };
    let outcome = outer_waterflow(&problem, tol, WATERFLOW_DEFAULT_MAX_SWEEPS)?;
    let p_2 = outcome.allocation;
    let p_t = inner_strong_power(p_2.as_slice(), parts)?;
    let split = BcPowerSplit::new(p_t, p_2)?;
    let (r1, r2) = split.rates(parts.rate)?;
    Ok(RegionPoint {
        b1: r1.total(),
        b2: r2.total(),
        weights,
        policy: (split.p_t, split.p_2),
        converged: outcome.converged,
    })
}

/// Boundary point of the broadcast departure region. The returned policy
/// pair holds the total-rate power and the weak user's power, in that
/// order; the strong user's rate is the difference of the two rate totals.
pub fn solve_bc(scenario: &Scenario, weights: WeightPair, tol: f64) -> Result<RegionPoint> {
    weights.validate()?;
    let parts = bc_parts(scenario)?;
    // Degradedness: with at least equal weight on the strong user, spending
    // any power on the weak user's message only buys a worse-scaled rate.
    if weights.mu1 >= weights.mu2 {
        solve_strong_only(&parts, weights)
    } else {
        solve_weak_weighted(&parts, weights, tol)
    }
}

/// Sweeps the boundary over the shared weight grid. Every pair with
/// `mu1 >= mu2` collapses to the same strong-user extreme point; the mode
/// label is fixed since superposition coding is the only procedure here.
pub fn sweep_bc_region(scenario: &Scenario, n_weights: usize, tol: f64) -> Result<DepartureRegion> {
    let grid = weight_grid(n_weights)?;
    let mut points = Vec::with_capacity(grid.len());
    for weights in grid {
        points.push(solve_bc(scenario, weights, tol)?);
    }
    Ok(DepartureRegion {
        points,
        mode: DecodingMode::Simultaneous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DecodingFunction, LinkModel, LogBase};

    fn bc_scenario(tx: &[f64], rx1: &[f64], rx2: &[f64], sigma2: f64) -> Scenario {
        let link = LinkModel::new(
            RateFunction::new(LogBase::Base2),
            DecodingFunction::Exponential {
                c: 1.0,
                d: 2.0,
                e: -1.0,
            },
        )
        .unwrap();
        Scenario::Bc {
            tx: EnergyProfile::new(tx.to_vec()).unwrap(),
            rx1: EnergyProfile::new(rx1.to_vec()).unwrap(),
            rx2: EnergyProfile::new(rx2.to_vec()).unwrap(),
            sigma2,
            link,
        }
    }

    #[test]
    fn min_power_closed_forms() {
        assert!(bc_min_power(0.0, 0.0, 2.0).unwrap().abs() < 1e-12);
        assert!((bc_min_power(0.0, 0.5, 2.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((bc_min_power(0.5, 0.5, 2.0).unwrap() - 4.0).abs() < 1e-12);
        assert!(bc_min_power(-0.1, 0.0, 2.0).is_err());
        assert!(bc_min_power(0.1, 0.0, 1.0).is_err());
        assert!(bc_min_power(0.1, 0.0, 0.5).is_err());
    }

    #[test]
    fn strong_weighted_branch_is_single_user() {
        let scenario = bc_scenario(&[2.0, 2.0], &[1.0, 1.0], &[5.0, 5.0], 2.0);
        let point = solve_bc(&scenario, WeightPair::new(1.0, 0.0).unwrap(), 1e-10).unwrap();
        assert_eq!(point.b2, 0.0);
        // Budget min(cum tx, cum rx1) = [1, 2]: constant unit power.
        let p = point.policy.0.as_slice();
        assert!((p[0] - 1.0).abs() < 1e-9 && (p[1] - 1.0).abs() < 1e-9);
        assert!((point.b1 - 1.0).abs() < 1e-9, "two slots of g(1) = 0.5");
        let equal = solve_bc(&scenario, WeightPair::new(0.5, 0.5).unwrap(), 1e-10).unwrap();
        assert!((equal.b1 - point.b1).abs() < 1e-12 && equal.b2 == 0.0);
    }

    #[test]
    fn weak_receiver_without_energy_sends_nothing() {
        let scenario = bc_scenario(&[2.0, 2.0], &[2.0, 2.0], &[0.0, 0.0], 2.0);
        let point = solve_bc(&scenario, WeightPair::new(0.2, 0.8).unwrap(), 1e-10).unwrap();
        assert!(point.b2 <= 1e-12);
        assert!(
            point.b1 > 0.5,
            "strong user still rides the leftover budget"
        );
    }

    #[test]
    fn single_slot_boundary_point_matches_hand_solve() {
        // p2 caps at min(rx2, rx1, tx/sigma2) = 1; the weighted objective
        // is increasing there, so p2 = 1, p_t = min(rx1, tx - p2) = 2.
        let scenario = bc_scenario(&[3.0], &[3.0], &[1.0], 2.0);
        let point = solve_bc(&scenario, WeightPair::new(0.3, 0.7).unwrap(), 1e-10).unwrap();
        assert!(point.converged);
        assert!((point.policy.1.as_slice()[0] - 1.0).abs() < 1e-6);
        assert!((point.policy.0.as_slice()[0] - 2.0).abs() < 1e-6);
        assert!((point.b2 - 0.5).abs() < 1e-6);
        assert!((point.b1 - 0.2924812503605781).abs() < 1e-6);
    }

    #[test]
    fn weak_weighted_solution_is_monotone_and_feasible() {
        let scenario = bc_scenario(&[5.0, 6.0, 7.0], &[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0], 2.0);
        let point = solve_bc(&scenario, WeightPair::new(0.3, 0.7).unwrap(), 1e-10).unwrap();
        assert!(point.converged);
        let (p_t, p_2) = (point.policy.0.as_slice(), point.policy.1.as_slice());
        for i in 0..3 {
            assert!(p_t[i] >= p_2[i] - 1e-12);
        }
        for w in p_2.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "weak power must be non-decreasing");
        }
        for w in p_t.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "total power must be non-decreasing");
        }
        // Raw constraint families of the rate-domain problem.
        let (mut ce, mut c1, mut c2) = (0.0, 0.0, 0.0);
        let cum_tx = [5.0, 11.0, 18.0];
        let cum_rx1 = [4.0, 9.0, 15.0];
        let cum_rx2 = [1.0, 3.0, 6.0];
        for i in 0..3 {
            ce += p_t[i] + (2.0 - 1.0) * p_2[i];
            c1 += p_t[i];
            c2 += p_2[i];
            assert!(ce <= cum_tx[i] + 1e-8);
            assert!(c1 <= cum_rx1[i] + 1e-8);
            assert!(c2 <= cum_rx2[i] + 1e-8);
        }
        assert!(point.b1 > 0.0 && point.b2 > 0.0);
    }

    #[test]
    fn sweep_orders_points_and_collapses_strong_corner() {
        let scenario = bc_scenario(&[5.0, 6.0, 7.0], &[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0], 2.0);
        let region = sweep_bc_region(&scenario, 5, 1e-9).unwrap();
        assert_eq!(region.points.len(), 5);
        // All mu1 >= mu2 pairs give the same extreme point with b2 = 0.
        assert_eq!(region.points[0].b2, 0.0);
        let b2s: Vec<f64> = region.points.iter().map(|p| p.b2).collect();
        for w in b2s.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "b2 grows along the sweep");
        }
        let b1s: Vec<f64> = region.points.iter().map(|p| p.b1).collect();
        for w in b1s.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "b1 shrinks along the sweep");
        }
    }
}
