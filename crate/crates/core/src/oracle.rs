//! Independent brute-force verification of the solvers.
//!
//! The oracles exhaustively search a fixed grid of policies subject to the
//! raw constraint families, with no shared code with the solvers under
//! test: a grid optimum is found by enumeration plus the closed-form
//! inverses of the cost functions, never by water-filling. Instances are
//! size-guarded: an oracle that subsamples instead of refusing would stop
//! being an oracle.
//!
//! [`audit`] replays the constraint families of a scenario literally
//! against a returned policy and reports per-prefix slacks.

use crate::mac::{DecodingMode, WeightPair};
use crate::model::{EnergyProfile, LinkModel, PowerPolicy, RatePolicy, Scenario};
use crate::{Error, Result};

/// Accumulated floating-point noise allowed on a grid feasibility check.
const GRID_SLACK: f64 = 1e-12;

/// Slack below which an audited constraint counts as violated.
pub const AUDIT_TOL: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Lattice spacing of the searched rates (or powers, for the
    /// multiple-access oracle).
    pub step: f64,
    /// Per-slot search ceiling on the same quantity.
    pub bound: f64,
}

impl GridSpec {
    pub fn new(step: f64, bound: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Domain(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if !(bound.is_finite() && bound >= step) {
            return Err(Error::Domain(format!(
                "grid bound must be at least one step, got {bound}"
            )));
        }
        Ok(Self { step, bound })
    }
}

fn guard(what: &'static str, got: usize, max: usize) -> Result<()> {
    if got > max {
        return Err(Error::OracleLimit { what, got, max });
    }
    Ok(())
}

/// Exhaustive throughput maximization for one transmitter-receiver pair.
///
/// Searches non-decreasing rate sequences only: re-sorting any feasible
/// rate multiset into ascending order can only lower every cumulative
/// transmit and decode cost while keeping the total, so the restriction
/// loses nothing.
pub fn oracle_single_user(
    tx: &EnergyProfile,
    rx: &EnergyProfile,
    link: &LinkModel,
    grid: &GridSpec,
) -> Result<(RatePolicy, f64)> {
    let n = tx.len();
    if rx.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: rx.len(),
        });
    }
    guard("single-user oracle slots", n, 4)?;
    let cum_tx = tx.cumulative();
    let cum_rx = rx.cumulative();

    // A single slot can never spend more than the whole horizon's budget.
    let rate_cap = grid
        .bound
        .min(link.g(cum_tx[n - 1]))
        .min(link.psi(cum_rx[n - 1]));
    let max_idx = (rate_cap / grid.step).floor() as usize;
    let f_table: Vec<f64> = (0..=max_idx)
        .map(|i| link.f(i as f64 * grid.step))
        .collect();
    let phi_table: Vec<f64> = (0..=max_idx)
        .map(|i| link.phi(i as f64 * grid.step))
        .collect();

    struct Dfs<'a> {
        n: usize,
        step: f64,
        max_idx: usize,
        cum_tx: &'a [f64],
        cum_rx: &'a [f64],
        f_table: &'a [f64],
        phi_table: &'a [f64],
        current: Vec<usize>,
        best: Vec<usize>,
        best_value: f64,
    }

    impl Dfs<'_> {
        fn run(&mut self, slot: usize, min_idx: usize, spent_tx: f64, spent_rx: f64, total: f64) {
            if slot == self.n {
                if total > self.best_value {
                    self.best_value = total;
                    self.best = self.current.clone();
                }
                return;
            }
            for idx in min_idx..=self.max_idx {
                let tx_now = spent_tx + self.f_table[idx];
                let rx_now = spent_rx + self.phi_table[idx];
                // Costs grow with the index, so the first violation ends
                // the scan for this slot.
                if tx_now > self.cum_tx[slot] + GRID_SLACK
                    || rx_now > self.cum_rx[slot] + GRID_SLACK
                {
                    break;
                }
                self.current[slot] = idx;
                self.run(
                    slot + 1,
                    idx,
                    tx_now,
                    rx_now,
                    total + idx as f64 * self.step,
                );
            }
        }
    }

    let mut dfs = Dfs {
        n,
        step: grid.step,
        max_idx,
        cum_tx: &cum_tx,
        cum_rx: &cum_rx,
        f_table: &f_table,
        phi_table: &phi_table,
        current: vec![0; n],
        best: vec![0; n],
        best_value: 0.0,
    };
    dfs.run(0, 0, 0.0, 0.0, 0.0);
    let rates = RatePolicy::new(dfs.best.iter().map(|&i| i as f64 * grid.step).collect())?;
    Ok((rates, dfs.best_value))
}

/// Spreads `water` over the given floors so all wetted slots end at one
/// level; returns the per-slot additions.
fn pour_over_floors(floors: &[f64], water: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..floors.len()).collect();
    order.sort_by(|&a, &b| floors[a].total_cmp(&floors[b]));
    let mut remaining = water;
    let mut level = floors[order[0]];
    let mut wet = 1;
    while wet < order.len() && remaining > 0.0 {
        let next = floors[order[wet]];
        let fill = (next - level) * wet as f64;
        if fill >= remaining {
            break;
        }
        remaining -= fill;
        level = next;
        wet += 1;
    }
    level += remaining.max(0.0) / wet as f64;
    let mut add = vec![0.0; floors.len()];
    for &i in order.iter().take(wet) {
        add[i] = (level - floors[i]).max(0.0);
    }
    add
}

/// Exact maximizer of `sum g(p1_i + w_i)` over `prefix(w)_k <= m_k`,
/// `w >= 0`, by enumerating which prefix bounds bind (2^n patterns, n <= 3):
/// slots between binding points share one water level over their floors,
/// slots after the last binding point stay dry.
fn best_overlay(
    p1: &[f64],
    m: &[f64],
    rate: crate::model::RateFunction,
) -> Option<(f64, Vec<f64>)> {
    let n = p1.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    'mask: for mask in 0..(1u32 << n) {
        let mut w = vec![0.0; n];
        let mut start = 0;
        let mut consumed = 0.0;
        for k in 0..n {
            if mask & (1 << k) == 0 {
                continue;
            }
            let water = m[k] - consumed;
            if water < 0.0 {
                continue 'mask;
            }
            let add = pour_over_floors(&p1[start..=k], water);
            w[start..=k].copy_from_slice(&add);
            consumed = m[k];
            start = k + 1;
        }
        let mut acc = 0.0;
        for k in 0..n {
            acc += w[k];
            if acc > m[k] + GRID_SLACK {
                continue 'mask;
            }
        }
        let value: f64 = p1.iter().zip(&w).map(|(&a, &b)| rate.g(a + b)).sum();
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, w));
        }
    }
    best
}

/// Searched policy returned by [`oracle_weighted`], shaped per topology.
/// The same type is what [`audit`] accepts, so solver outputs are converted
/// into it for auditing.
#[derive(Debug, Clone)]
pub enum PolicyOutput {
    SingleUser {
        rates: RatePolicy,
    },
    TwoHop {
        source_rates: RatePolicy,
        relay_rates: RatePolicy,
        delta: PowerPolicy,
    },
    Mac {
        mode: DecodingMode,
        p1: PowerPolicy,
        p2: PowerPolicy,
    },
    Bc {
        p_t: PowerPolicy,
        p_2: PowerPolicy,
    },
}

fn mac_oracle(
    tx1: &EnergyProfile,
    tx2: &EnergyProfile,
    rx: &EnergyProfile,
    link: &LinkModel,
    weights: WeightPair,
    grid: &GridSpec,
) -> Result<(PolicyOutput, f64)> {
    let n = tx1.len();
    guard("multiple-access oracle slots", n, 3)?;
    if weights.mu1 < weights.mu2 {
        let swapped = WeightPair {
            mu1: weights.mu2,
            mu2: weights.mu1,
        };
        let (policy, value) = mac_oracle(tx2, tx1, rx, link, swapped, grid)?;
        let PolicyOutput::Mac { mode, p1, p2 } = policy else {
            unreachable!("multiple-access oracle returns its own topology");
        };
        return Ok((
            PolicyOutput::Mac {
                mode,
                p1: p2,
                p2: p1,
            },
            value,
        ));
    }
    let rate = link.rate();
    let cum_e1 = tx1.cumulative();
    let cum_e2 = tx2.cumulative();
    let cum_rx = rx.cumulative();
    let power_cap = grid.bound.min(cum_e1[n - 1]).min(cum_rx[n - 1]);
    let max_idx = (power_cap / grid.step).floor() as usize;

    struct Dfs<'a> {
        n: usize,
        step: f64,
        max_idx: usize,
        cum_e1: &'a [f64],
        cum_e2: &'a [f64],
        cum_rx: &'a [f64],
        weights: WeightPair,
        rate: crate::model::RateFunction,
        p1: Vec<f64>,
        best: Option<(f64, Vec<f64>, Vec<f64>)>,
    }

    impl Dfs<'_> {
        fn run(&mut self, slot: usize, spent: f64, own_rates: f64) {
            if slot == self.n {
                let m: Vec<f64> = {
                    let mut cum_p1 = 0.0;
                    (0..self.n)
                        .map(|k| {
                            cum_p1 += self.p1[k];
                            self.cum_e2[k].min(self.cum_rx[k] - cum_p1)
                        })
                        .collect()
                };
                if let Some((sum_rate, p2)) = best_overlay(&self.p1, &m, self.rate) {
                    let value = (self.weights.mu1 - self.weights.mu2) * own_rates
                        + self.weights.mu2 * sum_rate;
                    if self.best.as_ref().is_none_or(|(v, _, _)| value > *v) {
                        self.best = Some((value, self.p1.clone(), p2));
                    }
                }
                return;
            }
            for idx in 0..=self.max_idx {
                let p = idx as f64 * self.step;
                let spent_now = spent + p;
                if spent_now > self.cum_e1[slot] + GRID_SLACK
                    || spent_now > self.cum_rx[slot] + GRID_SLACK
                {
                    break;
                }
                self.p1[slot] = p;
                self.run(slot + 1, spent_now, own_rates + self.rate.g(p));
            }
        }
    }

    let mut dfs = Dfs {
        n,
        step: grid.step,
        max_idx,
        cum_e1: &cum_e1,
        cum_e2: &cum_e2,
        cum_rx: &cum_rx,
        weights,
        rate,
        p1: vec![0.0; n],
        best: None,
    };
    dfs.run(0, 0.0, 0.0);
    let (value, p1, p2) = dfs.best.ok_or_else(|| {
        Error::Domain("multiple-access oracle found no feasible policy".to_string())
    })?;
    Ok((
        PolicyOutput::Mac {
            mode: DecodingMode::Simultaneous,
            p1: PowerPolicy::new(p1)?,
            p2: PowerPolicy::new(p2)?,
        },
        value,
    ))
}

fn two_hop_oracle(
    source: &EnergyProfile,
    relay: &EnergyProfile,
    destination: &EnergyProfile,
    link: &LinkModel,
    grid: &GridSpec,
) -> Result<(PolicyOutput, f64)> {
    let n = source.len();
    guard("relay oracle slots", n, 2)?;
    let cum_src = source.cumulative();
    let cum_rel = relay.cumulative();
    let cum_dst = destination.cumulative();
    let rate_cap = grid
        .bound
        .min(link.g(cum_src[n - 1]))
        .min(link.psi(cum_rel[n - 1]));
    let max_idx = (rate_cap / grid.step).floor() as usize;
    let f_table: Vec<f64> = (0..=max_idx)
        .map(|i| link.f(i as f64 * grid.step))
        .collect();
    let phi_table: Vec<f64> = (0..=max_idx)
        .map(|i| link.phi(i as f64 * grid.step))
        .collect();
    let step = grid.step;

    // The relay's decode schedule is eliminated: covering the source stream
    // as late as possible leaves the most forwarding energy, so feasibility
    // only needs prefix(phi(r_s)) + prefix(f(r_f)) within the relay budget.
    // Forwarded rates can be re-sorted ascending without loss, and the last
    // slot's rate then has a closed-form optimum.
    let mut best_value = -1.0;
    let mut best: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut consider = |rs: &[f64], rf: &[f64], value: f64| {
        if value > best_value {
            best_value = value;
            best = Some((rs.to_vec(), rf.to_vec()));
        }
    };

    let forward_best = |avail_f: f64, avail_phi: f64, avail_data: f64| -> f64 {
        let cap = link
            .g(avail_f.max(0.0))
            .min(link.psi(avail_phi.max(0.0)))
            .min(avail_data.max(0.0))
            .min(rate_cap);
        (cap / step + GRID_SLACK).floor().max(0.0) * step
    };

    if n == 1 {
        for i1 in 0..=max_idx {
            if f_table[i1] > cum_src[0] + GRID_SLACK || phi_table[i1] > cum_rel[0] + GRID_SLACK {
                break;
            }
            let rs = i1 as f64 * step;
            let rf = forward_best(cum_rel[0] - phi_table[i1], cum_dst[0], rs);
            consider(&[rs], &[rf], rf);
        }
    } else {
        for i1 in 0..=max_idx {
            if f_table[i1] > cum_src[0] + GRID_SLACK || phi_table[i1] > cum_rel[0] + GRID_SLACK {
                break;
            }
            for i2 in 0..=max_idx {
                let f_src = f_table[i1] + f_table[i2];
                let phi_src = phi_table[i1] + phi_table[i2];
                if f_src > cum_src[1] + GRID_SLACK || phi_src > cum_rel[1] + GRID_SLACK {
                    break;
                }
                let rs = [i1 as f64 * step, i2 as f64 * step];
                for j1 in 0..=max_idx {
                    let r1 = j1 as f64 * step;
                    if f_table[j1] + phi_table[i1] > cum_rel[0] + GRID_SLACK
                        || phi_table[j1] > cum_dst[0] + GRID_SLACK
                        || r1 > rs[0] + GRID_SLACK
                    {
                        break;
                    }
                    let r2 = forward_best(
                        cum_rel[1] - phi_src - f_table[j1],
                        cum_dst[1] - phi_table[j1],
                        rs[0] + rs[1] - r1,
                    );
                    consider(&rs, &[r1, r2], r1 + r2);
                }
            }
        }
    }

    let (rs, rf) =
        best.ok_or_else(|| Error::Domain("relay oracle found no feasible policy".to_string()))?;
    let delta: Vec<f64> = rs.iter().map(|&r| link.phi(r)).collect();
    Ok((
        PolicyOutput::TwoHop {
            source_rates: RatePolicy::new(rs)?,
            relay_rates: RatePolicy::new(rf)?,
            delta: PowerPolicy::new(delta)?,
        },
        best_value,
    ))
}

fn bc_oracle(
    tx: &EnergyProfile,
    rx1: &EnergyProfile,
    rx2: &EnergyProfile,
    sigma2: f64,
    link: &LinkModel,
    weights: WeightPair,
    grid: &GridSpec,
) -> Result<(PolicyOutput, f64)> {
    let n = tx.len();
    guard("broadcast oracle slots", n, 3)?;
    let cum_tx = tx.cumulative();
    let cum_rx1 = rx1.cumulative();
    let cum_rx2 = rx2.cumulative();
    let rate_cap = grid
        .bound
        .min(link.g(cum_tx[n - 1]))
        .min(link.psi(cum_rx1[n - 1]));
    let max_idx = (rate_cap / grid.step).floor() as usize;
    let f_table: Vec<f64> = (0..=max_idx)
        .map(|i| link.f(i as f64 * grid.step))
        .collect();
    let phi_table: Vec<f64> = (0..=max_idx)
        .map(|i| link.phi(i as f64 * grid.step))
        .collect();

    // Rate pairs per slot, searched with the optimum's structure imposed:
    // both the weak rate and the sum rate are non-decreasing over slots.
    struct Dfs<'a> {
        n: usize,
        step: f64,
        max_idx: usize,
        sigma2: f64,
        cum_tx: &'a [f64],
        cum_rx1: &'a [f64],
        cum_rx2: &'a [f64],
        f_table: &'a [f64],
        phi_table: &'a [f64],
        weights: WeightPair,
        pairs: Vec<(usize, usize)>,
        best: Option<(f64, Vec<(usize, usize)>)>,
    }

    impl Dfs<'_> {
        // Indices: i2 = weak rate, is = sum rate (is >= i2).
        fn run(
            &mut self,
            slot: usize,
            min_i2: usize,
            min_is: usize,
            spent_tx: f64,
            spent_rx1: f64,
            spent_rx2: f64,
            value: f64,
        ) {
            if slot == self.n {
                if self.best.as_ref().is_none_or(|(v, _)| value > *v) {
                    self.best = Some((value, self.pairs.clone()));
                }
                return;
            }
            for i2 in min_i2..=self.max_idx {
                let rx2_now = spent_rx2 + self.phi_table[i2];
                if rx2_now > self.cum_rx2[slot] + GRID_SLACK {
                    break;
                }
                for is in min_is.max(i2)..=self.max_idx {
                    let rx1_now = spent_rx1 + self.phi_table[is];
                    let tx_now =
                        spent_tx + (self.sigma2 - 1.0) * self.f_table[i2] + self.f_table[is];
                    if rx1_now > self.cum_rx1[slot] + GRID_SLACK
                        || tx_now > self.cum_tx[slot] + GRID_SLACK
                    {
                        break;
                    }
                    self.pairs[slot] = (i2, is);
                    let gained = self.step
                        * (self.weights.mu1 * (is - i2) as f64 + self.weights.mu2 * i2 as f64);
                    self.run(slot + 1, i2, is, tx_now, rx1_now, rx2_now, value + gained);
                }
            }
        }
    }

    let mut dfs = Dfs {
        n,
        step: grid.step,
        max_idx,
        sigma2,
        cum_tx: &cum_tx,
        cum_rx1: &cum_rx1,
        cum_rx2: &cum_rx2,
        f_table: &f_table,
        phi_table: &phi_table,
        weights,
        pairs: vec![(0, 0); n],
        best: None,
    };
    dfs.run(0, 0, 0, 0.0, 0.0, 0.0, 0.0);
    let (value, pairs) = dfs
        .best
        .ok_or_else(|| Error::Domain("broadcast oracle found no feasible policy".to_string()))?;
    let p_t: Vec<f64> = pairs.iter().map(|&(_, is)| f_table[is]).collect();
    let p_2: Vec<f64> = pairs.iter().map(|&(i2, _)| f_table[i2]).collect();
    Ok((
        PolicyOutput::Bc {
            p_t: PowerPolicy::new(p_t)?,
            p_2: PowerPolicy::new(p_2)?,
        },
        value,
    ))
}

/// Exhaustive grid maximization of the scenario's weighted objective.
///
/// Weights are ignored for the single-user and relay topologies, whose
/// objective is the plain throughput.
pub fn oracle_weighted(
    scenario: &Scenario,
    weights: WeightPair,
    grid: &GridSpec,
) -> Result<(PolicyOutput, f64)> {
    weights.validate()?;
    match scenario {
        Scenario::SingleUser { tx, rx, link, .. } => {
            let (rates, value) = oracle_single_user(tx, rx, link, grid)?;
            Ok((PolicyOutput::SingleUser { rates }, value))
        }
        Scenario::TwoHop {
            source,
            relay,
            destination,
            link,
        } => two_hop_oracle(source, relay, destination, link, grid),
        Scenario::Mac { tx1, tx2, rx, link } => mac_oracle(tx1, tx2, rx, link, weights, grid),
        Scenario::Bc {
            tx,
            rx1,
            rx2,
            sigma2,
            link,
        } => bc_oracle(tx, rx1, rx2, *sigma2, link, weights, grid),
    }
}

/// Slack trace of one cumulative constraint family.
#[derive(Debug, Clone)]
pub struct ConstraintSlack {
    pub family: String,
    /// Budget minus spend at each prefix (or slot, for per-slot families).
    pub slacks: Vec<f64>,
    pub min_slack: f64,
    /// 1-based index of the tightest prefix.
    pub worst_prefix: usize,
}

#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub constraints: Vec<ConstraintSlack>,
    /// True when every slack clears [`AUDIT_TOL`].
    pub feasible: bool,
}

fn slack_family(family: &str, spend: &[f64], budget: &[f64]) -> ConstraintSlack {
    let mut spent = 0.0;
    let mut banked = 0.0;
    let slacks: Vec<f64> = spend
        .iter()
        .zip(budget)
        .map(|(&s, &b)| {
            spent += s;
            banked += b;
            banked - spent
        })
        .collect();
    finish_family(family, slacks)
}

fn slack_per_slot(family: &str, spend: &[f64], budget: &[f64]) -> ConstraintSlack {
    let slacks: Vec<f64> = spend.iter().zip(budget).map(|(&s, &b)| b - s).collect();
    finish_family(family, slacks)
}

fn finish_family(family: &str, slacks: Vec<f64>) -> ConstraintSlack {
    let (worst, min_slack) = slacks.iter().enumerate().fold(
        (0, f64::INFINITY),
        |(wi, wv), (i, &v)| {
            if v < wv {
                (i, v)
            } else {
                (wi, wv)
            }
        },
    );
    ConstraintSlack {
        family: family.to_string(),
        slacks,
        min_slack,
        worst_prefix: worst + 1,
    }
}

fn expect_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}

/// Replays the scenario's constraint families against a policy and reports
/// the slack of every prefix; any slack below [`AUDIT_TOL`] marks the
/// report infeasible.
pub fn audit(policy: &PolicyOutput, scenario: &Scenario) -> Result<FeasibilityReport> {
    let link = scenario.link();
    let mut constraints = Vec::new();
    match (policy, scenario) {
        (
            PolicyOutput::SingleUser { rates },
            Scenario::SingleUser {
                tx,
                rx,
                rx_has_battery,
                ..
            },
        ) => {
            expect_len(tx.len(), rates.len())?;
            let f: Vec<f64> = rates.as_slice().iter().map(|&r| link.f(r)).collect();
            let phi: Vec<f64> = rates.as_slice().iter().map(|&r| link.phi(r)).collect();
            constraints.push(slack_family("transmit energy", &f, tx.as_slice()));
            if *rx_has_battery {
                constraints.push(slack_family("decode energy", &phi, rx.as_slice()));
            } else {
                constraints.push(slack_per_slot(
                    "per-slot decode energy",
                    &phi,
                    rx.as_slice(),
                ));
            }
        }
        (
            PolicyOutput::TwoHop {
                source_rates,
                relay_rates,
                delta,
            },
            Scenario::TwoHop {
                source,
                relay,
                destination,
                ..
            },
        ) => {
            expect_len(source.len(), source_rates.len())?;
            expect_len(source.len(), relay_rates.len())?;
            expect_len(source.len(), delta.len())?;
            let f_src: Vec<f64> = source_rates.as_slice().iter().map(|&r| link.f(r)).collect();
            let phi_src: Vec<f64> = source_rates
                .as_slice()
                .iter()
                .map(|&r| link.phi(r))
                .collect();
            let f_fwd: Vec<f64> = relay_rates.as_slice().iter().map(|&r| link.f(r)).collect();
            let phi_fwd: Vec<f64> = relay_rates
                .as_slice()
                .iter()
                .map(|&r| link.phi(r))
                .collect();
            constraints.push(slack_family("source energy", &f_src, source.as_slice()));
            constraints.push(slack_family(
                "relay decode cover",
                &phi_src,
                delta.as_slice(),
            ));
            let relay_spend: Vec<f64> = delta
                .as_slice()
                .iter()
                .zip(&f_fwd)
                .map(|(&d, &f)| d + f)
                .collect();
            constraints.push(slack_family(
                "relay energy split",
                &relay_spend,
                relay.as_slice(),
            ));
            constraints.push(slack_family(
                "destination decode energy",
                &phi_fwd,
                destination.as_slice(),
            ));
            constraints.push(slack_family(
                "data causality",
                relay_rates.as_slice(),
                source_rates.as_slice(),
            ));
        }
        (PolicyOutput::Mac { mode, p1, p2 }, Scenario::Mac { tx1, tx2, rx, .. }) => {
            expect_len(tx1.len(), p1.len())?;
            expect_len(tx1.len(), p2.len())?;
            constraints.push(slack_family(
                "first transmit energy",
                p1.as_slice(),
                tx1.as_slice(),
            ));
            constraints.push(slack_family(
                "second transmit energy",
                p2.as_slice(),
                tx2.as_slice(),
            ));
            let decode: Vec<f64> = match mode {
                DecodingMode::Simultaneous => p1
                    .as_slice()
                    .iter()
                    .zip(p2.as_slice())
                    .map(|(&a, &b)| link.phi(link.g(a + b)))
                    .collect(),
                DecodingMode::Successive => p1
                    .as_slice()
                    .iter()
                    .zip(p2.as_slice())
                    .map(|(&a, &b)| link.phi(link.g(b / (1.0 + a))) + link.phi(link.g(a)))
                    .collect(),
            };
            constraints.push(slack_family(
                "receiver decode energy",
                &decode,
                rx.as_slice(),
            ));
        }
        (
            PolicyOutput::Bc { p_t, p_2 },
            Scenario::Bc {
                tx,
                rx1,
                rx2,
                sigma2,
                link,
            },
        ) => {
            expect_len(tx.len(), p_t.len())?;
            expect_len(tx.len(), p_2.len())?;
            let tx_spend: Vec<f64> = p_t
                .as_slice()
                .iter()
                .zip(p_2.as_slice())
                .map(|(&t, &w)| (sigma2 - 1.0) * w + t)
                .collect();
            constraints.push(slack_family("transmit energy", &tx_spend, tx.as_slice()));
            // The strong receiver decodes both streams, so its cost is the
            // decode cost of the full sum rate g(p_t).
            let strong_decode: Vec<f64> = p_t
                .as_slice()
                .iter()
                .map(|&t| link.phi(link.g(t)))
                .collect();
            let weak_decode: Vec<f64> = p_2
                .as_slice()
                .iter()
                .map(|&w| link.phi(link.g(w)))
                .collect();
            constraints.push(slack_family(
                "strong decode energy",
                &strong_decode,
                rx1.as_slice(),
            ));
            constraints.push(slack_family(
                "weak decode energy",
                &weak_decode,
                rx2.as_slice(),
            ));
            constraints.push(slack_per_slot(
                "power split order",
                p_2.as_slice(),
                p_t.as_slice(),
            ));
        }
        _ => {
            return Err(Error::Unsupported(
                "policy shape does not match the scenario topology".to_string(),
            ))
        }
    }
    let feasible = constraints.iter().all(|c| c.min_slack >= AUDIT_TOL);
    Ok(FeasibilityReport {
        constraints,
        feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DecodingFunction, LogBase, RateFunction};

    fn natural_link() -> LinkModel {
        LinkModel::new(
            RateFunction::new(LogBase::Natural),
            DecodingFunction::InverseG {
                base: LogBase::Natural,
            },
        )
        .unwrap()
    }

    fn base2_link() -> LinkModel {
        LinkModel::new(
            RateFunction::new(LogBase::Base2),
            DecodingFunction::Exponential {
                c: 1.0,
                d: 2.0,
                e: -1.0,
            },
        )
        .unwrap()
    }

    fn profile(v: &[f64]) -> EnergyProfile {
        EnergyProfile::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_user_hits_transmitter_bound() {
        let grid = GridSpec::new(1e-3, 5.0).unwrap();
        let (rates, value) =
            oracle_single_user(&profile(&[1.0]), &profile(&[100.0]), &natural_link(), &grid)
                .unwrap();
        assert!((value - 2.0f64.ln()).abs() <= 1e-3);
        assert_eq!(rates.len(), 1);
    }

    #[test]
    fn single_user_hits_receiver_bound() {
        let grid = GridSpec::new(1e-3, 5.0).unwrap();
        let link = natural_link();
        let phi_one = link.phi(1.0);
        let (_, value) =
            oracle_single_user(&profile(&[100.0]), &profile(&[phi_one]), &link, &grid).unwrap();
        assert!((value - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn oracle_size_guard_refuses() {
        let grid = GridSpec::new(1e-2, 1.0).unwrap();
        let big = profile(&[1.0; 5]);
        let err = oracle_single_user(&big, &big, &natural_link(), &grid).unwrap_err();
        assert!(matches!(err, Error::OracleLimit { .. }));
    }

    #[test]
    fn mac_single_slot_matches_closed_form() {
        let scenario = Scenario::Mac {
            tx1: profile(&[1.0]),
            tx2: profile(&[1.0]),
            rx: profile(&[1.5]),
            link: base2_link(),
        };
        let grid = GridSpec::new(5e-3, 3.0).unwrap();
        let weights = WeightPair::new(0.5, 0.5).unwrap();
        let (_, value) = oracle_weighted(&scenario, weights, &grid).unwrap();
        let expected = 0.5 * RateFunction::new(LogBase::Base2).g(1.5);
        assert!((value - expected).abs() <= 0.5 * 5e-3 + 1e-9);
    }

    #[test]
    fn bc_single_slot_matches_hand_solve() {
        let scenario = Scenario::Bc {
            tx: profile(&[3.0]),
            rx1: profile(&[3.0]),
            rx2: profile(&[1.0]),
            sigma2: 2.0,
            link: base2_link(),
        };
        let grid = GridSpec::new(5e-3, 3.0).unwrap();
        let weights = WeightPair::new(0.3, 0.7).unwrap();
        let (policy, value) = oracle_weighted(&scenario, weights, &grid).unwrap();
        // Hand solve: p2 = 1, p_t = 2, value = 0.3 g(2) + 0.4 g(1) + 0.3 g(1).
        let expected = 0.3 * 0.2924812503605781 + 0.7 * 0.5;
        assert!((value - expected).abs() <= 3.0 * 5e-3);
        let report = audit(&policy, &scenario).unwrap();
        assert!(report.feasible);
    }

    #[test]
    fn two_hop_single_slot_matches_hand_solve() {
        let scenario = Scenario::TwoHop {
            source: profile(&[1.0]),
            relay: profile(&[2.0]),
            destination: profile(&[100.0]),
            link: natural_link(),
        };
        let grid = GridSpec::new(1e-3, 5.0).unwrap();
        let (policy, value) =
            oracle_weighted(&scenario, WeightPair::new(1.0, 1.0).unwrap(), &grid).unwrap();
        assert!((value - 2.0f64.ln()).abs() <= 2e-3);
        let report = audit(&policy, &scenario).unwrap();
        assert!(report.feasible, "oracle outputs must audit clean");
    }

    #[test]
    fn audit_flags_violations_with_prefix() {
        let scenario = Scenario::SingleUser {
            tx: profile(&[1.0, 1.0]),
            rx: profile(&[10.0, 10.0]),
            rx_has_battery: true,
            link: natural_link(),
        };
        let policy = PolicyOutput::SingleUser {
            rates: RatePolicy::new(vec![1.5, 0.1]).unwrap(),
        };
        let report = audit(&policy, &scenario).unwrap();
        assert!(!report.feasible);
        let tx_family = &report.constraints[0];
        assert_eq!(tx_family.worst_prefix, 1, "first prefix already overdrawn");
        assert!(tx_family.min_slack < -1.0);
    }
}
