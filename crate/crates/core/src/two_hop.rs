//! Decode-and-forward relay link: source -> relay -> destination, all three
//! nodes harvesting.
//!
//! The relay splits its harvested energy between decoding the source's
//! stream (the `delta` schedule) and forwarding to the destination. For a
//! fixed split the problem separates: the source solves a plain single-user
//! problem against `delta`, and the relay forwards under three cumulative
//! resources (its leftover transmit energy, the destination's decoding
//! energy, and the data actually received so far). The outer layer searches
//! over the split, whose value function is concave.

use crate::model::{EnergyProfile, PowerPolicy, RatePolicy, Scenario, RATE_CAP};
use crate::single_user::{solve_single_user, solve_staircase, Stream};
use crate::waterfill::{outer_waterflow, OuterProblem};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct TwoHopSolution {
    pub source_rates: RatePolicy,
    pub relay_rates: RatePolicy,
    /// Relay energy reserved for decoding, per slot.
    pub delta: PowerPolicy,
    /// Data delivered end-to-end: the relay's total forwarded rate.
    pub throughput: f64,
    pub converged: bool,
}

fn unpack(scenario: &Scenario) -> Result<(&EnergyProfile, &EnergyProfile, &EnergyProfile)> {
    match scenario {
        Scenario::TwoHop {
            source,
            relay,
            destination,
            ..
        } => {
            if relay.len() != source.len() || destination.len() != source.len() {
                return Err(Error::InvalidScenario {
                    violations: crate::model::check_scenario(scenario),
                });
            }
            Ok((source, relay, destination))
        }
        _ => Err(Error::Unsupported(
            "solver requires a two-hop scenario".to_string(),
        )),
    }
}

/// Solves both hops for a fixed relay decoding schedule `delta`.
///
/// Errors when `delta` is not cumulatively covered by the relay's harvest.
pub fn solve_inner(scenario: &Scenario, delta: &[f64]) -> Result<TwoHopSolution> {
    let (source, relay, destination) = unpack(scenario)?;
    let link = scenario.link();
    let n = source.len();
    if delta.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: delta.len(),
        });
    }
    let delta_profile = EnergyProfile::new(delta.to_vec())?;
    let relay_cum = relay.cumulative();
    let delta_cum = delta_profile.cumulative();
    for k in 0..n {
        if delta_cum[k] > relay_cum[k] + 1e-9 {
            return Err(Error::InfeasiblePrefix {
                prefix: k + 1,
                required: delta_cum[k],
                available: relay_cum[k],
            });
        }
    }

    // First hop: the relay's decoding budget acts as the receiver profile.
    let source_sol = solve_single_user(source, &delta_profile, link)?;

    // Second hop: forwarded rate is limited by the relay's leftover energy,
    // the destination's decoding energy, and the data received so far.
    let forward_cum: Vec<f64> = relay_cum
        .iter()
        .zip(&delta_cum)
        .map(|(r, d)| (r - d).max(0.0))
        .collect();
    let tx_cost = |r: f64| link.f(r);
    let tx_level = |a: f64| link.g(a).min(RATE_CAP);
    let rx_cost = |r: f64| link.phi(r);
    let rx_level = |a: f64| link.psi(a);
    let identity = |r: f64| r;
    let streams = [
        Stream {
            cumulative: forward_cum,
            cost: &tx_cost,
            level: &tx_level,
        },
        Stream {
            cumulative: destination.cumulative(),
            cost: &rx_cost,
            level: &rx_level,
        },
        Stream {
            cumulative: source_sol.rates.cumulative(),
            cost: &identity,
            level: &identity,
        },
    ];
    let relay_rates = RatePolicy::new(solve_staircase(&streams, n).rates)?;
    let throughput = relay_rates.total();

    Ok(TwoHopSolution {
        source_rates: source_sol.rates,
        relay_rates,
        delta: PowerPolicy::new(delta.to_vec())?,
        throughput,
        converged: true,
    })
}

/// End-to-end throughput maximization over the relay's energy split.
pub fn solve_two_hop(scenario: &Scenario, tol: f64, max_sweeps: usize) -> Result<TwoHopSolution> {
    let (_, relay, _) = unpack(scenario)?;
    let evaluate = |delta: &[f64]| match solve_inner(scenario, delta) {
        Ok(sol) => sol.throughput,
        Err(_) => f64::NEG_INFINITY,
    };
    let problem = OuterProblem {
        evaluate: &evaluate,
        budget: relay.clone(),
        allow_discard: true,
        monotone_allocation_required: false,
    };
    let outcome = outer_waterflow(&problem, tol, max_sweeps)?;
    let mut sol = solve_inner(scenario, outcome.allocation.as_slice())?;
    sol.converged = outcome.converged;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{cumulative_feasible, DecodingFunction, LinkModel, LogBase, RateFunction};
    use approx::assert_relative_eq;

    fn scenario(source: &[f64], relay: &[f64], destination: &[f64]) -> Scenario {
        let link = LinkModel::new(
            RateFunction::new(LogBase::Natural),
            DecodingFunction::InverseG {
                base: LogBase::Natural,
            },
        )
        .unwrap();
        Scenario::TwoHop {
            source: EnergyProfile::new(source.to_vec()).unwrap(),
            relay: EnergyProfile::new(relay.to_vec()).unwrap(),
            destination: EnergyProfile::new(destination.to_vec()).unwrap(),
            link,
        }
    }

    #[test]
    fn split_endpoints_have_zero_throughput() {
        let s = scenario(&[2.0, 1.0], &[2.0, 1.0], &[1.0, 2.0]);
        let zero = solve_inner(&s, &[0.0, 0.0]).unwrap();
        assert_eq!(zero.throughput, 0.0);
        let all = solve_inner(&s, &[2.0, 1.0]).unwrap();
        assert_eq!(all.throughput, 0.0);
    }

    #[test]
    fn inner_respects_all_budgets() {
        let s = scenario(&[2.0, 1.0, 0.5], &[1.5, 1.0, 1.0], &[1.0, 0.5, 2.0]);
        let delta = [0.5, 0.5, 0.5];
        let sol = solve_inner(&s, &delta).unwrap();
        let link = s.link();
        let (source, relay, destination) = match &s {
            Scenario::TwoHop {
                source,
                relay,
                destination,
                ..
            } => (source, relay, destination),
            _ => unreachable!(),
        };
        let src_spend: Vec<f64> = sol
            .source_rates
            .as_slice()
            .iter()
            .map(|&r| link.f(r))
            .collect();
        assert!(cumulative_feasible(&src_spend, source, 1e-9).unwrap());
        let relay_spend: Vec<f64> = sol
            .relay_rates
            .as_slice()
            .iter()
            .zip(sol.source_rates.as_slice())
            .map(|(&fwd, &src)| link.f(fwd) + link.phi(src))
            .collect();
        assert!(cumulative_feasible(&relay_spend, relay, 1e-9).unwrap());
        let dst_spend: Vec<f64> = sol
            .relay_rates
            .as_slice()
            .iter()
            .map(|&r| link.phi(r))
            .collect();
        assert!(cumulative_feasible(&dst_spend, destination, 1e-9).unwrap());
        let mut data_in = 0.0;
        let mut data_out = 0.0;
        for (r_in, r_out) in sol
            .source_rates
            .as_slice()
            .iter()
            .zip(sol.relay_rates.as_slice())
        {
            data_in += r_in;
            data_out += r_out;
            assert!(data_out <= data_in + 1e-9);
        }
    }

    #[test]
    fn infeasible_delta_rejected() {
        let s = scenario(&[1.0, 1.0], &[0.5, 2.0], &[1.0, 1.0]);
        let err = solve_inner(&s, &[1.0, 0.0]).unwrap_err();
        match err {
            Error::InfeasiblePrefix { prefix, .. } => assert_eq!(prefix, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn outer_search_beats_naive_splits() {
        let s = scenario(&[2.0, 1.0], &[2.0, 1.0], &[1.0, 2.0]);
        let best = solve_two_hop(&s, 1e-9, 5000).unwrap();
        assert!(best.converged);
        for frac in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let delta: Vec<f64> = match &s {
                Scenario::TwoHop { relay, .. } => {
                    relay.as_slice().iter().map(|e| e * frac).collect()
                }
                _ => unreachable!(),
            };
            let candidate = solve_inner(&s, &delta).unwrap();
            assert!(best.throughput >= candidate.throughput - 1e-7);
        }
    }

    #[test]
    fn relay_with_no_destination_energy_sends_nothing() {
        let s = scenario(&[1.0, 1.0], &[1.0, 1.0], &[0.0, 0.0]);
        let sol = solve_two_hop(&s, 1e-9, 2000).unwrap();
        assert_relative_eq!(sol.throughput, 0.0, epsilon = 1e-9);
    }
}
