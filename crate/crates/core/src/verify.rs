//! Seeded property suites behind the command-line `verify` subcommand and
//! the acceptance tests.
//!
//! Every check is a pure function of its seed and returns one structured
//! pass/fail line, so a failing run can be replayed exactly. Counts are
//! parameters so unit tests can run cheap versions; [`run_suite`] uses the
//! full published counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bc::{solve_bc, sweep_bc_region, total_stream_best_rate};
use crate::gp::{solve_gp, GeometricProgram, Monomial, Posynomial};
use crate::mac::{
    joint_best_sum_rate, solve_mac_simultaneous, solve_mac_successive_traced, sweep_region,
    weight_grid, DecodingMode, WeightPair,
};
use crate::model::{
    DecodingFunction, EnergyProfile, LinkModel, LogBase, PowerPolicy, RateFunction, Scenario,
};
use crate::oracle::{audit, oracle_single_user, oracle_weighted, GridSpec, PolicyOutput};
use crate::single_user::solve_single_user;
use crate::two_hop::{solve_inner, solve_two_hop};
use crate::waterfill::{WATERFLOW_DEFAULT_MAX_SWEEPS, WATERFLOW_DEFAULT_TOL};
use crate::Result;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn finish(name: &str, failures: usize, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed: failures == 0,
            detail,
        }
    }

    /// Folds an error into a failed check rather than aborting the suite.
    fn from_result(name: &str, result: Result<CheckResult>) -> Self {
        result.unwrap_or_else(|err| Self {
            name: name.to_string(),
            passed: false,
            detail: format!("errored: {err}"),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    Lemmas,
    Oracle,
    All,
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt)
}

fn random_profile(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> EnergyProfile {
    EnergyProfile::new((0..n).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
}

/// Rotates through decoding shapes with `phi(0) = 0`, so a silent slot
/// costs nothing and random instances stay feasible.
fn link_variant(k: usize) -> LinkModel {
    match k % 4 {
        0 => LinkModel::new(
            RateFunction::new(LogBase::Natural),
            DecodingFunction::InverseG {
                base: LogBase::Natural,
            },
        ),
        1 => LinkModel::new(
            RateFunction::new(LogBase::Base2),
            DecodingFunction::InverseG {
                base: LogBase::Base2,
            },
        ),
        2 => LinkModel::new(
            RateFunction::new(LogBase::Natural),
            DecodingFunction::Linear { a: 0.8, b: 0.0 },
        ),
        _ => LinkModel::new(
            RateFunction::new(LogBase::Base2),
            DecodingFunction::Exponential {
                c: 0.5,
                d: 1.5,
                e: -0.5,
            },
        ),
    }
    .unwrap()
}

/// Links whose decoding cost equals the transmit cost at the same rate,
/// as the two-user solvers require.
fn identity_link(k: usize) -> LinkModel {
    match k % 2 {
        0 => LinkModel::new(
            RateFunction::new(LogBase::Natural),
            DecodingFunction::InverseG {
                base: LogBase::Natural,
            },
        ),
        _ => LinkModel::new(
            RateFunction::new(LogBase::Base2),
            DecodingFunction::Exponential {
                c: 1.0,
                d: 2.0,
                e: -1.0,
            },
        ),
    }
    .unwrap()
}

fn cum(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Five-slot reference schedule with frozen expected rates.
pub fn check_single_user_fixture() -> CheckResult {
    let name = "single-user fixture";
    let run = || -> Result<CheckResult> {
        let tx = EnergyProfile::new(vec![2.0, 2.0, 1.0, 2.5, 0.5])?;
        let rx = EnergyProfile::new(vec![1.0, 1.0, 0.5, 2.5, 3.0])?;
        let link = link_variant(0);
        let solution = solve_single_user(&tx, &rx, &link)?;
        let expected = [0.6061, 0.6061, 0.6061, 1.2528, 1.3863];
        let worst = solution
            .rates
            .as_slice()
            .iter()
            .zip(&expected)
            .map(|(&r, &e)| (r - e).abs())
            .fold(0.0, f64::max);
        let failures = usize::from(worst > 1e-3);
        Ok(CheckResult::finish(
            name,
            failures,
            format!("max per-slot rate deviation {worst:.2e} (allowed 1.0e-3)"),
        ))
    };
    CheckResult::from_result(name, run())
}

/// Random single-user instances: rates non-decreasing, every strict rate
/// increase sits on an exhausted cumulative constraint, and at the horizon
/// at least one side's total energy is exhausted.
pub fn check_single_user_structure(seed: u64, instances: usize) -> CheckResult {
    let name = "single-user staircase structure";
    let run = || -> Result<CheckResult> {
        let mut rng = rng_for(seed, 0x51a1);
        let mut failures = 0;
        let mut worst = 0.0f64;
        for k in 0..instances {
            let n = rng.gen_range(1..=8);
            let tx = random_profile(&mut rng, n, 0.0, 3.0);
            let rx = random_profile(&mut rng, n, 0.0, 3.0);
            let link = link_variant(k);
            let solution = solve_single_user(&tx, &rx, &link)?;
            let rates = solution.rates.as_slice();
            let spend_tx = cum(&rates.iter().map(|&r| link.f(r)).collect::<Vec<_>>());
            let spend_rx = cum(&rates.iter().map(|&r| link.phi(r)).collect::<Vec<_>>());
            let cum_tx = tx.cumulative();
            let cum_rx = rx.cumulative();

            let mut ok = true;
            for i in 0..n.saturating_sub(1) {
                if rates[i + 1] < rates[i] - 1e-6 {
                    ok = false;
                    worst = worst.max(rates[i] - rates[i + 1]);
                }
                if rates[i + 1] > rates[i] + 1e-6 {
                    let slack = (cum_tx[i] - spend_tx[i]).min(cum_rx[i] - spend_rx[i]);
                    if slack > 1e-6 {
                        ok = false;
                        worst = worst.max(slack);
                    }
                }
            }
            let terminal = (cum_tx[n - 1] - spend_tx[n - 1]).min(cum_rx[n - 1] - spend_rx[n - 1]);
            if terminal > 1e-6 {
                ok = false;
                worst = worst.max(terminal);
            }
            if !ok {
                failures += 1;
            }
        }
        Ok(CheckResult::finish(
            name,
            failures,
            format!("{failures}/{instances} instances violated (worst excess {worst:.2e})"),
        ))
    };
    CheckResult::from_result(name, run())
}

/// Grid search over the two-variable form (transmitted rate r, decoded
/// rate rb <= r, each side billed for its own variable) must equal the
/// one-variable search on the same lattice.
fn two_variable_grid_value(
    tx: &EnergyProfile,
    rx: &EnergyProfile,
    link: &LinkModel,
    grid: &GridSpec,
) -> f64 {
    let n = tx.len();
    let cum_tx = tx.cumulative();
    let cum_rx = rx.cumulative();
    let cap = grid
        .bound
        .min(link.g(cum_tx[n - 1]))
        .min(link.psi(cum_rx[n - 1]));
    let max_idx = (cap / grid.step).floor() as usize;
    let f_table: Vec<f64> = (0..=max_idx)
        .map(|i| link.f(i as f64 * grid.step))
        .collect();
    let phi_table: Vec<f64> = (0..=max_idx)
        .map(|i| link.phi(i as f64 * grid.step))
        .collect();

    fn dfs(
        slot: usize,
        n: usize,
        spent_tx: f64,
        spent_rx: f64,
        total: f64,
        best: &mut f64,
        ctx: (&[f64], &[f64], &[f64], &[f64], f64),
    ) {
        let (cum_tx, cum_rx, f_table, phi_table, step) = ctx;
        if slot == n {
            if total > *best {
                *best = total;
            }
            return;
        }
        for ir in 0..f_table.len() {
            let tx_now = spent_tx + f_table[ir];
            if tx_now > cum_tx[slot] + 1e-12 {
                break;
            }
            for irb in 0..=ir {
                let rx_now = spent_rx + phi_table[irb];
                if rx_now > cum_rx[slot] + 1e-12 {
                    break;
                }
                dfs(
                    slot + 1,
                    n,
                    tx_now,
                    rx_now,
                    total + irb as f64 * step,
                    best,
                    ctx,
                );
            }
        }
    }

    let mut best = 0.0;
    dfs(
        0,
        n,
        0.0,
        0.0,
        0.0,
        &mut best,
        (&cum_tx, &cum_rx, &f_table, &phi_table, grid.step),
    );
    best
}

pub fn check_virtual_relay_equivalence(seed: u64, instances: usize) -> CheckResult {
    let name = "single-user two-variable equivalence";
    let run = || -> Result<CheckResult> {
        let mut rng = rng_for(seed, 0x7e1a);
        let grid = GridSpec::new(5e-3, 2.0)?;
        let mut failures = 0;
        let mut worst = 0.0f64;
        for k in 0..instances {
            let n = rng.gen_range(1..=2);
            let tx = random_profile(&mut rng, n, 0.05, 0.3);
            let rx = random_profile(&mut rng, n, 0.05, 0.3);
            let link = link_variant(k);
            let (_, one_var) = oracle_single_user(&tx, &rx, &link, &grid)?;
            let two_var = two_variable_grid_value(&tx, &rx, &link, &grid);
            let gap = (one_var - two_var).abs();
            worst = worst.max(gap);
            if gap > 1e-9 {
                failures += 1;
            }
        }
        Ok(CheckResult::finish(
            name,
            failures,
            format!("{failures}/{instances} grid values differed (worst gap {worst:.2e})"),
        ))
    };
    CheckResult::from_result(name, run())
}

/// The relay-stage solve must return source rates bit-identical to the
/// plain single-user solve against the decode schedule, and those rates
/// must be non-decreasing.
pub fn check_two_hop_separability(seed: u64, instances: usize) -> CheckResult {
    let name = "relay separability";
    let run = || -> Result<CheckResult> {
        let mut rng = rng_for(seed, 0x2b0b);
        let mut failures = 0;
        for k in 0..instances {
            let n = rng.gen_range(1..=8);
            let source = random_profile(&mut rng, n, 0.0, 3.0);
            let relay = random_profile(&mut rng, n, 0.0, 3.0);
            let destination = random_profile(&mut rng, n, 0.0, 3.0);
            let link = link_variant(k);
            let delta: Vec<f64> = relay
                .as_slice()
                .iter()
                .map(|&e| rng.gen_range(0.0..=1.0) * e)
                .collect();
            let scenario = Scenario::TwoHop {
                source: source.clone(),
                relay,
                destination,
                link: link.clone(),
            };
            let inner = solve_inner(&scenario, &delta)?;
            let standalone =
                solve_single_user(&source, &EnergyProfile::new(delta.clone())?, &link)?;
            let bit_match = inner
                .source_rates
                .as_slice()
                .iter()
                .zip(standalone.rates.as_slice())
                .all(|(&a, &b)| a.to_bits() == b.to_bits());
            let monotone = inner
                .source_rates
                .as_slice()
                .windows(2)
                .all(|w| w[1] >= w[0] - 1e-6);
            if !bit_match || !monotone {
                failures += 1;
            }
        }
        Ok(CheckResult::finish(
            name,
            failures,
            format!("{failures}/{instances} instances broke bit-match or monotonicity"),
        ))
    };
    CheckResult::from_result(name, run())
}

/// Midpoint concavity of the relay-stage value in the decode schedule, and
/// exactly zero throughput at the two degenerate schedules.
pub fn check_two_hop_concavity(seed: u64, pairs: usize) -> CheckResult {
    let name = "relay budget concavity";
    let run = || -> Result<CheckResult> {
        let mut rng = rng_for(seed, 0xc0c4);
        let mut failures = 0;
        let mut worst = 0.0f64;
        for k in 0..pairs {
            let n = rng.gen_range(1..=6);
            let source = random_profile(&mut rng, n, 0.2, 3.0);
            let relay = random_profile(&mut rng, n, 0.2, 3.0);
            let destination = random_profile(&mut rng, n, 0.2, 3.0);
            let link = link_variant(k);
            let scenario = Scenario::TwoHop {
                source,
                relay: relay.clone(),
                destination,
                link,
            };
            let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                relay
                    .as_slice()
                    .iter()
                    .map(|&e| rng.gen_range(0.0..=1.0) * e)
                    .collect()
            };
            let da = draw(&mut rng);
            let db = draw(&mut rng);
            let mid: Vec<f64> = da.iter().zip(&db).map(|(&a, &b)| 0.5 * (a + b)).collect();
            let ra = solve_inner(&scenario, &da)?.throughput;
            let rb = solve_inner(&scenario, &db)?.throughput;
            let rm = solve_inner(&scenario, &mid)?.throughput;
            let deficit = 0.5 * (ra + rb) - rm;
            worst = worst.max(deficit);
            let zeros = vec![0.0; n];
            let all = relay.as_slice().to_vec();
            let r_zero = solve_inner(&scenario, &zeros)?.throughput;
            let r_all = solve_inner(&scenario, &all)?.throughput;
            if deficit > 1e-6 || r_zero != 0.0 || r_all != 0.0 {
                failures += 1;
            }
        }
        Ok(CheckResult::finish(
            name,
            failures,
            format!("{failures}/{pairs} pairs violated (worst midpoint deficit {worst:.2e})"),
        ))
    };
    CheckResult::from_result(name, run())
}

/// Desk-scale three-slot two-user scenario used by the region checks.
fn reference_mac_scenario() -> Scenario {
    Scenario::Mac {
        tx1: EnergyProfile::new(vec![0.5, 1.0, 2.0]).unwrap(),
        tx2: EnergyProfile::new(vec![1.0, 2.0, 0.5]).unwrap(),
        rx: EnergyProfile::new(vec![1.5, 2.0, 0.5]).unwrap(),
        link: identity_link(1),
    }
}

/// Upper-right boundary of the joint-decoding region is concave: sorted by
/// b1, consecutive slopes never increase.
pub fn check_mac_boundary_concavity(n_weights: usize) -> CheckResult {
    let name = "two-user boundary concavity";
    let run = || -> Result<CheckResult> {
        let scenario = reference_mac_scenario();
        let region = sweep_region(&scenario, DecodingMode::Simultaneous, n_weights, 1e-9)?;
        let mut pts: Vec<(f64, f64)> = region.points.iter().map(|p| (p.b1, p.b2)).collect();
        let unconverged = region.points.iter().filter(|p| !p.converged).count();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut slopes = Vec::new();
        for w in pts.windows(2) {
            if w[1].0 - w[0].0 > 1e-9 {
                slopes.push((w[1].1 - w[0].1) / (w[1].0 - w[0].0));
            }
        }
        let mut worst = 0.0f64;
        for w in slopes.windows(2) {
            worst = worst.max(w[1] - w[0]);
        }
        let failures = usize::from(worst > 1e-6) + unconverged;
        Ok(CheckResult::finish(
            name,
            failures,
            format!(
                "{} points, worst slope increase {worst:.2e}, {unconverged} unconverged",
                pts.len()
            ),
        ))
    };
    CheckResult::from_result(name, run())
}

/// At every swept weight, the cancellation point started from the mapped
/// joint-decoding solution dominates it in the weighted support value.
/// Support dominance at all weights is containment for convex regions, and
/// it is what the start guarantees: the mapped policy delivers the same
/// rate pair at a lower decoding bill, and each round only improves the
/// weighted objective. Coordinatewise dominance is not implied; the solver
/// may trade one user's bits for more weighted total.
pub fn check_mac_successive_dominance(n_weights: usize) -> CheckResult {
    let name = "cancellation dominance";
    let run = || -> Result<CheckResult> {
        let scenario = reference_mac_scenario();
        let mut failures = 0;
        let mut worst = 0.0f64;
        for weights in weight_grid(n_weights)? {
            let sim = solve_mac_simultaneous(&scenario, weights, 1e-9)?;
            let (succ, _) = solve_mac_successive_traced(
                &scenario,
                weights,
                Some((&sim.policy.0, &sim.policy.1)),
                1e-8,
                200,
            )?;
            let sim_value = weights.mu1 * sim.b1 + weights.mu2 * sim.b2;
            let succ_value = weights.mu1 * succ.b1 + weights.mu2 * succ.b2;
            let shortfall = sim_value - succ_value;
            worst = worst.max(shortfall);
            if shortfall > 1e-9 {
                failures += 1;
            }
        }
        Ok(CheckResult::finish(
            name,
            failures,
            format!("{failures}/{n_weights} weights undominated (worst shortfall {worst:.2e})"),
        ))
    };
    CheckResult::from_result(name, run())
}

/// Every recorded round of the cancellation solver stays feasible for the
/// original constraint families and never lowers the weighted objective.
pub fn check_mac_sca_contract(n_weights: usize) -> CheckResult {
    let name = "approximation iterate contract";
    let run = || -> Result<CheckResult> {
        let scenario = reference_mac_scenario();
        let Scenario::Mac { tx1, tx2, rx, .. } = &scenario else {
            unreachable!("reference scenario is two-user");
        };
        let mut failures = 0;
        let mut rounds = 0usize;
        let mut worst_violation = 0.0f64;
        let mut worst_drop = 0.0f64;
        for weights in weight_grid(n_weights)? {
            let sim = solve_mac_simultaneous(&scenario, weights, 1e-9)?;
            let (_, trace) = solve_mac_successive_traced(
                &scenario,
                weights,
                Some((&sim.policy.0, &sim.policy.1)),
                1e-8,
                200,
            )?;
            // The solver works on the swapped problem when the second
            // user carries more weight, so replay budgets accordingly.
            let (e1, e2) = if weights.mu1 < weights.mu2 {
                (tx2, tx1)
            } else {
                (tx1, tx2)
            };
            let (cum_e1, cum_e2, cum_rx) = (e1.cumulative(), e2.cumulative(), rx.cumulative());
            rounds += trace.len();
            let mut ok = true;
            for iter in &trace {
                let (mut a1, mut a2, mut ar) = (0.0, 0.0, 0.0);
                for i in 0..iter.x1.len() {
                    a1 += iter.x1[i];
                    a2 += (1.0 + iter.x1[i]) * iter.x2[i];
                    ar += iter.x1[i] + iter.x2[i];
                    let violation = (a1 - cum_e1[i]).max(a2 - cum_e2[i]).max(ar - cum_rx[i]);
                    worst_violation = worst_violation.max(violation);
                    if violation > 1e-9 {
                        ok = false;
                    }
                }
            }
            for w in trace.windows(2) {
                let drop = w[0].weighted_value - w[1].weighted_value;
                worst_drop = worst_drop.max(drop);
                if drop > 1e-10 {
                    ok = false;
                }
            }
            if !ok {
                failures += 1;
            }
        }
        Ok(CheckResult::finish(
            name,
            failures,
            format!(
                "{rounds} rounds: worst violation {worst_violation:.2e}, worst objective drop {worst_drop:.2e}"
            ),
        ))
    };
    CheckResult::from_result(name, run())
}

/// At a weighted optimum, either the receiver's total energy is spent or
/// both transmitters' totals are.
pub fn check_mac_exhaustion(seed: u64, instances: usize) -> CheckResult {
    let name = "two-user budget exhaustion";
    let run = || -> Result<CheckResult> {
        let mut rng = rng_for(seed, 0xe8a7);
        let mut failures = 0;
        let mut worst = 0.0f64;
        for k in 0..instances {
            let n = rng.gen_range(1..=5);
            let scenario = Scenario::Mac {
                tx1: random_profile(&mut rng, n, 0.2, 2.0),
                tx2: random_profile(&mut rng, n, 0.2, 2.0),
                rx: random_profile(&mut rng, n, 0.2, 2.0),
                link: identity_link(k),
            };
            let mu1 = rng.gen_range(0.15..0.85);
            let weights = WeightPair::new(mu1, 1.0 - mu1)?;
            let point = solve_mac_simultaneous(&scenario, weights, 1e-9)?;
            let Scenario::Mac { tx1, tx2, rx, .. } = &scenario else {
                unreachable!("constructed above");
            };
            let s1 = tx1.total() - point.policy.0.total();
            let s2 = tx2.total() - point.policy.1.total();
            let sr = rx.total() - point.policy.0.total() - point.policy.1.total();
            let excess = sr.min(s1.max(s2));
            worst = worst.max(excess);
            if excess > 1e-6 {
                failures += 1;
            }
        }
        Ok(CheckResult::finish(
            name,
            failures,
            format!("{failures}/{instances} optima left both sides slack (worst {worst:.2e})"),
        ))
    };
    CheckResult::from_result(name, run())
}

/// The overlaid sum rate is concave in the first user's pinned powers, and
/// the second user's share of it (sum rate minus the first user's own
/// rates) is coordinate-wise decreasing.
pub fn check_mac_inner_concavity(seed: u64, instances: usize) -> CheckResult {
    let name = "overlay rate concavity";
    let run = || -> Result<CheckResult> {
        let mut rng = rng_for(seed, 0x0f10);
        let mut failures = 0;
        let mut worst = 0.0f64;
        for k in 0..instances {
            let n = rng.gen_range(1..=4);
            let tx1 = random_profile(&mut rng, n, 0.3, 2.0);
            let tx2 = random_profile(&mut rng, n, 0.3, 2.0);
            let rx = random_profile(&mut rng, n, 0.3, 2.0);
            let link = identity_link(k);
            let rate = link.rate();
            let scenario = Scenario::Mac {
                tx1: tx1.clone(),
                tx2,
                rx: rx.clone(),
                link,
            };
            let draw = |rng: &mut ChaCha8Rng| -> PowerPolicy {
                PowerPolicy::new(
                    tx1.as_slice()
                        .iter()
                        .zip(rx.as_slice())
                        .map(|(&a, &b)| rng.gen_range(0.0..=0.5) * a.min(b))
                        .collect(),
                )
                .unwrap()
            };
            let second_rate = |p: &PowerPolicy| -> Result<f64> {
                let own: f64 = p.as_slice().iter().map(|&v| rate.g(v)).sum();
                Ok(joint_best_sum_rate(&scenario, p)? - own)
            };
            let pa = draw(&mut rng);
            let pb = draw(&mut rng);
            let mid = PowerPolicy::new(
                pa.as_slice()
                    .iter()
                    .zip(pb.as_slice())
                    .map(|(&a, &b)| 0.5 * (a + b))
                    .collect(),
            )?;
            let va = joint_best_sum_rate(&scenario, &pa)?;
            let vb = joint_best_sum_rate(&scenario, &pb)?;
            let vm = joint_best_sum_rate(&scenario, &mid)?;
            let deficit = 0.5 * (va + vb) - vm;
            worst = worst.max(deficit);

            let bump_at = rng.gen_range(0..n);
            let mut bumped = pa.as_slice().to_vec();
            bumped[bump_at] += 1e-3;
            let rise = second_rate(&PowerPolicy::new(bumped)?)? - second_rate(&pa)?;
            worst = worst.max(rise);
            if deficit > 1e-6 || rise > 1e-6 {
                failures += 1;
            }
        }
        Ok(CheckResult::finish(
            name,
            failures,
            format!("{failures}/{instances} instances violated (worst excess {worst:.2e})"),
        ))
    };
    CheckResult::from_result(name, run())
}

/// Broadcast fixture: three-slot transmitter with progressively poorer
/// receiver batteries; regions must nest, and the free-decoding region
/// must contain them all.
pub fn check_bc_region_nesting(n_weights: usize) -> CheckResult {
    let name = "broadcast region nesting";
    let run = || -> Result<CheckResult> {
        let tx = EnergyProfile::new(vec![5.0, 6.0, 7.0])?;
        let receivers = [
            (vec![1e6, 1e6, 1e6], vec![1e6, 1e6, 1e6]),
            (vec![4.0, 5.0, 6.0], vec![1.0, 2.0, 3.0]),
            (vec![3.0, 4.0, 5.0], vec![1.0, 1.5, 2.0]),
            (vec![2.0, 3.0, 4.0], vec![0.5, 1.0, 1.5]),
        ];
        let mut supports: Vec<Vec<f64>> = Vec::new();
        let mut unconverged = 0;
        for (rx1, rx2) in &receivers {
            let scenario = Scenario::Bc {
                tx: tx.clone(),
                rx1: EnergyProfile::new(rx1.clone())?,
                rx2: EnergyProfile::new(rx2.clone())?,
                sigma2: 2.0,
                link: identity_link(1),
            };
            let region = sweep_bc_region(&scenario, n_weights, 1e-9)?;
            unconverged += region.points.iter().filter(|p| !p.converged).count();
            supports.push(
                region
                    .points
                    .iter()
                    .map(|p| p.weights.mu1 * p.b1 + p.weights.mu2 * p.b2)
                    .collect(),
            );
        }
        // Support dominance at every shared weight is containment for
        // convex regions.
        let mut worst = 0.0f64;
        for outer in 0..receivers.len() - 1 {
            for w in 0..n_weights {
                worst = worst.max(supports[outer + 1][w] - supports[outer][w]);
            }
        }
        let failures = usize::from(worst > 1e-6) + unconverged;
        Ok(CheckResult::finish(
            name,
            failures,
            format!("worst nesting violation {worst:.2e}, {unconverged} unconverged"),
        ))
    };
    CheckResult::from_result(name, run())
}

fn bc_structure_violation(point_policy: &(PowerPolicy, PowerPolicy), scenario: &Scenario) -> f64 {
    let Scenario::Bc {
        tx, rx1, sigma2, ..
    } = scenario
    else {
        return f64::INFINITY;
    };
    let (p_t, p_2) = point_policy;
    let pt = p_t.as_slice();
    let p2 = p_2.as_slice();
    let cum_tx = tx.cumulative();
    let cum_rx1 = rx1.cumulative();
    let mut worst = 0.0f64;
    // Total and weak powers never decrease over slots.
    for w in pt.windows(2) {
        worst = worst.max(w[0] - w[1]);
    }
    for w in p2.windows(2) {
        worst = worst.max(w[0] - w[1]);
    }
    // A strict increase is only allowed off an exhausted budget or onto a
    // slot pinned to the weak user's share.
    let (mut spent_tx, mut spent_rx1) = (0.0, 0.0);
    for i in 0..pt.len() {
        spent_tx += (sigma2 - 1.0) * p2[i] + pt[i];
        spent_rx1 += pt[i];
        if i + 1 < pt.len() && pt[i + 1] > pt[i] + 1e-6 {
            let slack = (cum_tx[i] - spent_tx).min(cum_rx1[i] - spent_rx1);
            let pinned = pt[i + 1] - p2[i + 1];
            worst = worst.max(slack.min(pinned));
        }
    }
    worst
}

/// Monotone structure of broadcast solutions: non-decreasing total and
/// weak powers, and power steps only at exhausted budgets or pinned slots.
pub fn check_bc_structure(seed: u64, instances: usize, n_weights: usize) -> CheckResult {
    let name = "broadcast policy structure";
    let run = || -> Result<CheckResult> {
        let mut rng = rng_for(seed, 0xbc57);
        let mut failures = 0;
        let mut worst = 0.0f64;
        let mut check = |scenario: &Scenario, weights: WeightPair| -> Result<()> {
            let point = solve_bc(scenario, weights, 1e-9)?;
            let violation = bc_structure_violation(&point.policy, scenario);
            worst = worst.max(violation);
            if violation > 1e-6 {
                failures += 1;
            }
            Ok(())
        };

        let tx = EnergyProfile::new(vec![5.0, 6.0, 7.0])?;
        let receivers = [
            (vec![4.0, 5.0, 6.0], vec![1.0, 2.0, 3.0]),
            (vec![3.0, 4.0, 5.0], vec![1.0, 1.5, 2.0]),
            (vec![2.0, 3.0, 4.0], vec![0.5, 1.0, 1.5]),
        ];
        for (rx1, rx2) in &receivers {
            let scenario = Scenario::Bc {
                tx: tx.clone(),
                rx1: EnergyProfile::new(rx1.clone())?,
                rx2: EnergyProfile::new(rx2.clone())?,
                sigma2: 2.0,
                link: identity_link(1),
            };
            for weights in weight_grid(n_weights)? {
                check(&scenario, weights)?;
            }
        }

        for k in 0..instances {
            let n = rng.gen_range(1..=5);
            let scenario = Scenario::Bc {
                tx: random_profile(&mut rng, n, 0.5, 3.0),
                rx1: random_profile(&mut rng, n, 0.2, 2.0),
                rx2: random_profile(&mut rng, n, 0.05, 1.0),
                sigma2: rng.gen_range(1.3..3.0),
                link: identity_link(k),
            };
            let mu1 = rng.gen_range(0.05..0.95);
            check(&scenario, WeightPair::new(mu1, 1.0 - mu1)?)?;
        }
        Ok(CheckResult::finish(
            name,
            failures,
            format!("{failures} solutions violated (worst excess {worst:.2e})"),
        ))
    };
    CheckResult::from_result(name, run())
}

/// The total-stream rate, as a function of the weak user's pinned
/// non-decreasing powers, is concave and coordinate-wise decreasing.
pub fn check_bc_inner_concavity(seed: u64, instances: usize) -> CheckResult {
    let name = "broadcast strong-rate concavity";
    let run = || -> Result<CheckResult> {
        let mut rng = rng_for(seed, 0x13cc);
        let mut failures = 0;
        let mut worst = 0.0f64;
        for k in 0..instances {
            let n = rng.gen_range(1..=5);
            let tx = random_profile(&mut rng, n, 1.0, 3.0);
            let rx1 = random_profile(&mut rng, n, 1.0, 3.0);
            let sigma2 = rng.gen_range(1.3..3.0);
            let scenario = Scenario::Bc {
                tx: tx.clone(),
                rx1,
                rx2: random_profile(&mut rng, n, 1.0, 3.0),
                sigma2,
                link: identity_link(k),
            };
            // Non-decreasing weak powers with gaps wide enough that a
            // 1e-3 bump keeps them monotone and feasible.
            let draw = |rng: &mut ChaCha8Rng| -> PowerPolicy {
                let mut level = 0.0;
                PowerPolicy::new(
                    (0..n)
                        .map(|_| {
                            level += rng.gen_range(2e-3..0.04);
                            level
                        })
                        .collect(),
                )
                .unwrap()
            };
            let pa = draw(&mut rng);
            let pb = draw(&mut rng);
            let mid = PowerPolicy::new(
                pa.as_slice()
                    .iter()
                    .zip(pb.as_slice())
                    .map(|(&a, &b)| 0.5 * (a + b))
                    .collect(),
            )?;
            let va = total_stream_best_rate(&scenario, &pa)?;
            let vb = total_stream_best_rate(&scenario, &pb)?;
            let vm = total_stream_best_rate(&scenario, &mid)?;
            let deficit = 0.5 * (va + vb) - vm;
            worst = worst.max(deficit);

            let bump_at = rng.gen_range(0..n);
            let mut bumped = pa.as_slice().to_vec();
            bumped[bump_at] += 1e-3;
            let vbump = total_stream_best_rate(&scenario, &PowerPolicy::new(bumped)?)?;
            let rise = vbump - va;
            worst = worst.max(rise);
            if deficit > 1e-6 || rise > 1e-6 {
                failures += 1;
            }
        }
        Ok(CheckResult::finish(
            name,
            failures,
            format!("{failures}/{instances} instances violated (worst excess {worst:.2e})"),
        ))
    };
    CheckResult::from_result(name, run())
}

/// Solver must reach the exhaustive grid value, minus the grid's own
/// resolution allowance, on every random instance; its policy must also
/// audit clean.
pub fn check_oracle_single_user(seed: u64, instances: usize) -> CheckResult {
    let name = "grid cross-check: single-user";
    let run = || -> Result<CheckResult> {
        let mut rng = rng_for(seed, 0x0a51);
        let grid = GridSpec::new(1e-3, 3.0)?;
        let mut failures = 0;
        let mut worst = f64::NEG_INFINITY;
        for k in 0..instances {
            let n = rng.gen_range(1..=3);
            let tx = random_profile(&mut rng, n, 0.05, 0.6);
            let rx = random_profile(&mut rng, n, 0.05, 0.6);
            let link = link_variant(k);
            let solution = solve_single_user(&tx, &rx, &link)?;
            let (_, oracle_value) = oracle_single_user(&tx, &rx, &link, &grid)?;
            let shortfall = oracle_value - solution.throughput();
            worst = worst.max(shortfall);
            let scenario = Scenario::SingleUser {
                tx,
                rx,
                rx_has_battery: true,
                link,
            };
            let report = audit(
                &PolicyOutput::SingleUser {
                    rates: solution.rates.clone(),
                },
                &scenario,
            )?;
            if shortfall > 3.0 * grid.step * n as f64 || !report.feasible {
                failures += 1;
            }
        }
        Ok(CheckResult::finish(
            name,
            failures,
            format!("{failures}/{instances} below oracle (worst shortfall {worst:.2e})"),
        ))
    };
    CheckResult::from_result(name, run())
}

pub fn check_oracle_two_hop(seed: u64, instances: usize) -> CheckResult {
    let name = "grid cross-check: relay";
    let run = || -> Result<CheckResult> {
        let mut rng = rng_for(seed, 0x0a52);
        let grid = GridSpec::new(1e-3, 3.0)?;
        let weights = WeightPair::new(0.5, 0.5)?;
        let mut failures = 0;
        let mut worst = f64::NEG_INFINITY;
        for k in 0..instances {
            let n = rng.gen_range(1..=2);
            let scenario = Scenario::TwoHop {
                source: random_profile(&mut rng, n, 0.05, 0.6),
                relay: random_profile(&mut rng, n, 0.05, 0.6),
                destination: random_profile(&mut rng, n, 0.05, 0.6),
                link: link_variant(k),
            };
            let solution = solve_two_hop(
                &scenario,
                WATERFLOW_DEFAULT_TOL,
                WATERFLOW_DEFAULT_MAX_SWEEPS,
            )?;
            let (_, oracle_value) = oracle_weighted(&scenario, weights, &grid)?;
            let shortfall = oracle_value - solution.throughput;
            worst = worst.max(shortfall);
            if shortfall > 3.0 * grid.step * (2 * n) as f64 {
                failures += 1;
            }
        }
        Ok(CheckResult::finish(
            name,
            failures,
            format!("{failures}/{instances} below oracle (worst shortfall {worst:.2e})"),
        ))
    };
    CheckResult::from_result(name, run())
}

pub fn check_oracle_mac(seed: u64, instances: usize) -> CheckResult {
    let name = "grid cross-check: two-user";
    let run = || -> Result<CheckResult> {
        let mut rng = rng_for(seed, 0x0a53);
        let grid = GridSpec::new(5e-3, 2.0)?;
        let mut failures = 0;
        let mut worst = f64::NEG_INFINITY;
        for k in 0..instances {
            let n = rng.gen_range(1..=3);
            let scenario = Scenario::Mac {
                tx1: random_profile(&mut rng, n, 0.05, 0.4),
                tx2: random_profile(&mut rng, n, 0.05, 0.4),
                rx: random_profile(&mut rng, n, 0.05, 0.4),
                link: identity_link(k),
            };
            let mu1 = rng.gen_range(0.1..0.9);
            let weights = WeightPair::new(mu1, 1.0 - mu1)?;
            let point = solve_mac_simultaneous(&scenario, weights, 1e-9)?;
            let solver_value = weights.mu1 * point.b1 + weights.mu2 * point.b2;
            let (_, oracle_value) = oracle_weighted(&scenario, weights, &grid)?;
            let shortfall = oracle_value - solver_value;
            worst = worst.max(shortfall);
            if shortfall > 3.0 * grid.step * (2 * n) as f64 {
                failures += 1;
            }
        }
        Ok(CheckResult::finish(
            name,
            failures,
            format!("{failures}/{instances} below oracle (worst shortfall {worst:.2e})"),
        ))
    };
    CheckResult::from_result(name, run())
}

pub fn check_oracle_bc(seed: u64, instances: usize) -> CheckResult {
    let name = "grid cross-check: broadcast";
    let run = || -> Result<CheckResult> {
        let mut rng = rng_for(seed, 0x0a54);
        let grid = GridSpec::new(5e-3, 2.0)?;
        let mut failures = 0;
        let mut worst = f64::NEG_INFINITY;
        for k in 0..instances {
            let n = rng.gen_range(1..=2);
            let scenario = Scenario::Bc {
                tx: random_profile(&mut rng, n, 0.3, 1.0),
                rx1: random_profile(&mut rng, n, 0.2, 0.8),
                rx2: random_profile(&mut rng, n, 0.05, 0.3),
                sigma2: rng.gen_range(1.2..3.0),
                link: identity_link(k),
            };
            let mu1 = rng.gen_range(0.1..0.9);
            let weights = WeightPair::new(mu1, 1.0 - mu1)?;
            let point = solve_bc(&scenario, weights, 1e-9)?;
            let solver_value = weights.mu1 * point.b1 + weights.mu2 * point.b2;
            let (_, oracle_value) = oracle_weighted(&scenario, weights, &grid)?;
            let shortfall = oracle_value - solver_value;
            worst = worst.max(shortfall);
            if shortfall > 3.0 * grid.step * (2 * n) as f64 {
                failures += 1;
            }
        }
        Ok(CheckResult::finish(
            name,
            failures,
            format!("{failures}/{instances} below oracle (worst shortfall {worst:.2e})"),
        ))
    };
    CheckResult::from_result(name, run())
}

/// Closed-form programs the interior-point solver must hit to 1e-6.
pub fn check_gp_analytic() -> CheckResult {
    let name = "program solver analytic cases";
    let run = || -> Result<CheckResult> {
        let mut worst = 0.0f64;
        // min x s.t. 1/x <= 1: optimum 1.
        let p1 = GeometricProgram {
            num_vars: 1,
            objective: Posynomial::new(vec![Monomial::var(1.0, 0, 1.0)]),
            constraints: vec![Posynomial::new(vec![Monomial::var(1.0, 0, -1.0)])],
        };
        worst = worst.max((solve_gp(&p1, None, 1e-10)?.objective - 1.0).abs());

        // min 1/(xy) s.t. x <= 2, y <= 3: optimum 1/6.
        let p2 = GeometricProgram {
            num_vars: 2,
            objective: Posynomial::new(vec![Monomial {
                coefficient: 1.0,
                exponents: vec![(0, -1.0), (1, -1.0)],
            }]),
            constraints: vec![
                Posynomial::new(vec![Monomial::var(0.5, 0, 1.0)]),
                Posynomial::new(vec![Monomial::var(1.0 / 3.0, 1, 1.0)]),
            ],
        };
        worst = worst.max((solve_gp(&p2, None, 1e-10)?.objective - 1.0 / 6.0).abs());

        // min x + y s.t. 1/(xy) <= 1: optimum 2 at x = y = 1.
        let p3 = GeometricProgram {
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
        worst = worst.max((solve_gp(&p3, None, 1e-10)?.objective - 2.0).abs());

        // max xyz s.t. mean <= 1, as min (xyz)^-1: optimum 1 at all ones.
        let p4 = GeometricProgram {
            num_vars: 3,
            objective: Posynomial::new(vec![Monomial {
                coefficient: 1.0,
                exponents: vec![(0, -1.0), (1, -1.0), (2, -1.0)],
            }]),
            constraints: vec![Posynomial::new(vec![
                Monomial::var(1.0 / 3.0, 0, 1.0),
                Monomial::var(1.0 / 3.0, 1, 1.0),
                Monomial::var(1.0 / 3.0, 2, 1.0),
            ])],
        };
        worst = worst.max((solve_gp(&p4, None, 1e-10)?.objective - 1.0).abs());

        let failures = usize::from(worst > 1e-6);
        Ok(CheckResult::finish(
            name,
            failures,
            format!("worst objective error {worst:.2e} over 4 programs"),
        ))
    };
    CheckResult::from_result(name, run())
}

/// Log-domain lattice minimum of a program whose box constraints confine
/// the variables to `[-half_width, half_width]^n` in log space.
fn log_grid_min(program: &GeometricProgram, half_width: f64, step: f64) -> f64 {
    let n = program.num_vars;
    let log_eval = |p: &Posynomial, y: &[f64]| -> f64 {
        p.terms
            .iter()
            .map(|t| {
                (t.coefficient.ln() + t.exponents.iter().map(|&(i, a)| a * y[i]).sum::<f64>()).exp()
            })
            .sum()
    };
    let m = (2.0 * half_width / step).round() as usize;
    let mut best = f64::INFINITY;
    let mut y = vec![0.0; n];
    let mut idx = vec![0usize; n];
    loop {
        for i in 0..n {
            y[i] = -half_width + idx[i] as f64 * step;
        }
        if program
            .constraints
            .iter()
            .all(|c| log_eval(c, &y) <= 1.0 + 1e-12)
        {
            best = best.min(log_eval(&program.objective, &y));
        }
        let mut carry = 0;
        loop {
            idx[carry] += 1;
            if idx[carry] <= m {
                break;
            }
            idx[carry] = 0;
            carry += 1;
            if carry == n {
                return best;
            }
        }
    }
}

/// Random feasible, box-bounded programs: the solver must match the
/// exhaustive log-lattice value within the lattice resolution.
pub fn check_gp_random(seed: u64, instances: usize) -> CheckResult {
    let name = "program solver grid cross-check";
    let run = || -> Result<CheckResult> {
        let mut rng = rng_for(seed, 0x69b0);
        let mut failures = 0;
        let mut worst = 0.0f64;
        for k in 0..instances {
            let n = 1 + k % 3;
            // Box small enough that the full lattice stays enumerable.
            let half_width: f64 = if n == 3 { 1.5 } else { 3.0 };
            let n_terms = rng.gen_range(2..=5);
            let random_posy = |rng: &mut ChaCha8Rng, terms: usize| -> Posynomial {
                Posynomial::new(
                    (0..terms)
                        .map(|_| Monomial {
                            coefficient: rng.gen_range(-1.0..1.0f64).exp(),
                            exponents: (0..n).map(|i| (i, rng.gen_range(-2.0..2.0))).collect(),
                        })
                        .collect(),
                )
            };
            let objective = random_posy(&mut rng, n_terms);
            let mut constraints = Vec::new();
            for i in 0..n {
                constraints.push(Posynomial::new(vec![Monomial::var(
                    (-half_width).exp(),
                    i,
                    -1.0,
                )]));
                constraints.push(Posynomial::new(vec![Monomial::var(
                    (-half_width).exp(),
                    i,
                    1.0,
                )]));
            }
            // One extra posynomial constraint, scaled to leave an interior
            // anchor point feasible.
            let anchor: Vec<f64> = (0..n)
                .map(|_| rng.gen_range(-0.5 * half_width..0.5 * half_width).exp())
                .collect();
            let mut extra = random_posy(&mut rng, 3);
            let at_anchor = extra.eval(&anchor);
            for term in &mut extra.terms {
                term.coefficient *= 0.7 / at_anchor;
            }
            constraints.push(extra);

            let program = GeometricProgram {
                num_vars: n,
                objective,
                constraints,
            };
            let solution = solve_gp(&program, Some(&anchor), 1e-9)?;
            let oracle_value = log_grid_min(&program, half_width, 1e-2);
            let scale = 1.0 + oracle_value.abs();
            let gap = (solution.objective - oracle_value).abs() / scale;
            worst = worst.max(gap);
            if gap > 1e-2 {
                failures += 1;
            }
        }
        Ok(CheckResult::finish(
            name,
            failures,
            format!(
                "{failures}/{instances} off the lattice value (worst relative gap {worst:.2e})"
            ),
        ))
    };
    CheckResult::from_result(name, run())
}

/// Full suite at the published instance counts.
pub fn run_suite(kind: SuiteKind, seed: u64) -> SuiteReport {
    let mut checks = Vec::new();
    if kind != SuiteKind::Oracle {
        checks.push(check_single_user_fixture());
        checks.push(check_single_user_structure(seed, 1000));
        checks.push(check_virtual_relay_equivalence(seed, 6));
        checks.push(check_two_hop_separability(seed, 200));
        checks.push(check_two_hop_concavity(seed, 50));
        checks.push(check_mac_boundary_concavity(9));
        checks.push(check_mac_successive_dominance(9));
        checks.push(check_mac_sca_contract(9));
        checks.push(check_mac_exhaustion(seed, 50));
        checks.push(check_mac_inner_concavity(seed, 50));
        checks.push(check_bc_region_nesting(9));
        checks.push(check_bc_structure(seed, 100, 9));
        checks.push(check_bc_inner_concavity(seed, 50));
    }
    if kind != SuiteKind::Lemmas {
        checks.push(check_oracle_single_user(seed, 20));
        checks.push(check_oracle_two_hop(seed, 20));
        checks.push(check_oracle_mac(seed, 20));
        checks.push(check_oracle_bc(seed, 20));
        checks.push(check_gp_analytic());
        checks.push(check_gp_random(seed, 9));
    }
    SuiteReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_check_passes() {
        let result = check_single_user_fixture();
        assert!(result.passed, "{}", result.detail);
    }

    #[test]
    fn staircase_structure_holds_on_a_sample() {
        let result = check_single_user_structure(7, 60);
        assert!(result.passed, "{}", result.detail);
    }

    #[test]
    fn two_variable_equivalence_holds_on_a_sample() {
        let result = check_virtual_relay_equivalence(7, 2);
        assert!(result.passed, "{}", result.detail);
    }

    #[test]
    fn separability_holds_on_a_sample() {
        let result = check_two_hop_separability(7, 25);
        assert!(result.passed, "{}", result.detail);
    }

    #[test]
    fn relay_concavity_holds_on_a_sample() {
        let result = check_two_hop_concavity(7, 8);
        assert!(result.passed, "{}", result.detail);
    }

    #[test]
    fn exhaustion_holds_on_a_sample() {
        let result = check_mac_exhaustion(7, 10);
        assert!(result.passed, "{}", result.detail);
    }

    #[test]
    fn overlay_concavity_holds_on_a_sample() {
        let result = check_mac_inner_concavity(7, 10);
        assert!(result.passed, "{}", result.detail);
    }

    #[test]
    fn bc_concavity_holds_on_a_sample() {
        let result = check_bc_inner_concavity(7, 10);
        assert!(result.passed, "{}", result.detail);
    }

    #[test]
    fn bc_structure_holds_on_a_sample() {
        let result = check_bc_structure(7, 10, 3);
        assert!(result.passed, "{}", result.detail);
    }

    #[test]
    fn analytic_programs_solve() {
        let result = check_gp_analytic();
        assert!(result.passed, "{}", result.detail);
    }

    #[test]
    fn random_programs_match_lattice_on_a_sample() {
        let result = check_gp_random(7, 3);
        assert!(result.passed, "{}", result.detail);
    }

    #[test]
    fn oracle_cross_checks_hold_on_a_sample() {
        for result in [
            check_oracle_single_user(7, 3),
            check_oracle_two_hop(7, 3),
            check_oracle_mac(7, 3),
            check_oracle_bc(7, 3),
        ] {
            assert!(result.passed, "{}: {}", result.name, result.detail);
        }
    }
}
