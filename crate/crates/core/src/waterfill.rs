//! Water-filling primitives shared by the solvers.
//!
//! Three operations live here:
//!
//! * [`directional_waterfill`]: classic forward-only water-filling over
//!   per-slot noise floors, with optional per-slot caps. Water harvested in a
//!   slot may be spent in that slot or any later one, never earlier.
//! * [`min_power_backward_fill`]: water-filling when every slot additionally
//!   carries a minimum power requirement that is non-decreasing over time.
//! * [`outer_waterflow`]: a generic coordinate-exchange ascent for concave
//!   objectives over the same "cumulative arrivals" polytope, used as the
//!   outer loop of the relay and multiuser solvers.

use std::collections::HashMap;

use crate::model::{EnergyProfile, PowerPolicy};
use crate::{Error, Result};

/// Static description of one time slot seen by the water-filling routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    /// Effective noise level; the objective term for the slot is
    /// `log(floor + x) - log(floor)`.
    pub floor: f64,
    /// Optional upper bound on the water this slot can hold.
    pub cap: Option<f64>,
    /// Optional lower bound on the water this slot must hold.
    pub min_power: Option<f64>,
}

impl Bin {
    pub fn new(floor: f64) -> Self {
        Self {
            floor,
            cap: None,
            min_power: None,
        }
    }

    pub fn capped(floor: f64, cap: f64) -> Self {
        Self {
            floor,
            cap: Some(cap),
            min_power: None,
        }
    }

    pub fn with_min_power(floor: f64, min_power: f64) -> Self {
        Self {
            floor,
            cap: None,
            min_power: Some(min_power),
        }
    }
}

/// Tightest remaining cumulative bound at each slot: since any admissible
/// prefix sum is non-decreasing, a bound only binds through the minimum over
/// the bounds from that slot onward.
pub(crate) fn suffix_min_envelope(bounds: &[f64]) -> Vec<f64> {
    let mut env = bounds.to_vec();
    for i in (0..env.len().saturating_sub(1)).rev() {
        env[i] = env[i].min(env[i + 1]);
    }
    env
}

/// Per-slot arrivals reproducing a non-decreasing cumulative bound, with
/// negative rounding noise clamped away.
pub(crate) fn cumulative_to_arrivals(cumulative: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    cumulative
        .iter()
        .map(|&c| {
            let d = (c - prev).max(0.0);
            prev = c;
            d
        })
        .collect()
}

fn validate_bins(bins: &[Bin], budget: &EnergyProfile) -> Result<()> {
    if bins.len() != budget.len() {
        return Err(Error::LengthMismatch {
            expected: budget.len(),
            got: bins.len(),
        });
    }
    for (slot, bin) in bins.iter().enumerate() {
        if !bin.floor.is_finite() || bin.floor < 0.0 {
            return Err(Error::InvalidValue {
                slot,
                value: bin.floor,
            });
        }
        if let Some(c) = bin.cap {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidValue { slot, value: c });
            }
        }
        if let Some(m) = bin.min_power {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::InvalidValue { slot, value: m });
            }
        }
    }
    Ok(())
}

/// One maximal run of slots sharing a free water surface.
#[derive(Debug, Clone)]
struct Pool {
    start: usize,
    end: usize, // exclusive
    water: f64,
    /// Free-surface level; `INFINITY` when every slot is filled to its cap,
    /// so the pool cannot absorb anything more.
    level: f64,
}

/// Finds the surface level `L` with `sum_i clamp(L - floor_i, 0, cap_i) = water`
/// over `bins[start..end]`, or `INFINITY` if the caps cannot hold the water.
fn surface_level(bins: &[Bin], start: usize, end: usize, water: f64) -> f64 {
    if water <= 0.0 {
        // An empty pool's surface sits at the lowest floor.
        return bins[start..end]
            .iter()
            .map(|b| b.floor)
            .fold(f64::INFINITY, f64::min);
    }
    // Breakpoints where the absorbing-slot count changes.
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(2 * (end - start));
    for bin in &bins[start..end] {
        events.push((bin.floor, 1.0));
        if let Some(c) = bin.cap {
            events.push((bin.floor + c, -1.0));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut level = events[0].0;
    let mut slope = 0.0;
    let mut held = 0.0;
    for &(ev_level, delta) in &events {
        if ev_level > level {
            let gained = slope * (ev_level - level);
            if slope > 0.0 && held + gained >= water {
                return level + (water - held) / slope;
            }
            held += gained;
            level = ev_level;
        }
        slope += delta;
    }
    if slope > 0.0 {
        // At least one uncapped slot remains above all breakpoints.
        return level + (water - held) / slope;
    }
    f64::INFINITY
}

fn fill_at_level(bins: &[Bin], start: usize, end: usize, level: f64, out: &mut [f64]) {
    for (i, bin) in bins[start..end].iter().enumerate() {
        let mut x = (level - bin.floor).max(0.0);
        if let Some(c) = bin.cap {
            x = x.min(c);
        }
        out[start + i] = x;
    }
}

/// Forward-only water-filling.
///
/// Maximizes `sum_i [log(floor_i + x_i) - log(floor_i)]` subject to
/// `sum_{i<=k} x_i <= sum_{i<=k} budget_i` for every `k`, `0 <= x_i <= cap_i`.
/// Water blocked by caps is pushed forward to later slots when possible and
/// is lost at the end of the horizon otherwise. Bins must not carry
/// `min_power` requirements; see [`min_power_backward_fill`] for those.
pub fn directional_waterfill(bins: &[Bin], budget: &EnergyProfile) -> Result<PowerPolicy> {
    validate_bins(bins, budget)?;
    if bins.iter().any(|b| b.min_power.is_some()) {
        return Err(Error::Unsupported(
            "directional_waterfill does not handle min_power bins".to_string(),
        ));
    }
    let n = bins.len();
    let arrivals = budget.as_slice();

    let mut pools: Vec<Pool> = Vec::with_capacity(n);
    for i in 0..n {
        let mut pool = Pool {
            start: i,
            end: i + 1,
            water: arrivals[i],
            level: surface_level(bins, i, i + 1, arrivals[i]),
        };
        // A higher surface behind us would push water forward: merge until
        // the stack of surface levels is non-decreasing again.
        while let Some(prev) = pools.last() {
            if prev.level > pool.level {
                pool.start = prev.start;
                pool.water += prev.water;
                pool.level = surface_level(bins, pool.start, pool.end, pool.water);
                pools.pop();
            } else {
                break;
            }
        }
        pools.push(pool);
    }

    let mut x = vec![0.0; n];
    for pool in &pools {
        fill_at_level(bins, pool.start, pool.end, pool.level, &mut x);
    }
    PowerPolicy::new(x)
}

/// Water-filling with non-decreasing per-slot minimum power requirements.
///
/// Maximizes `sum_i log(floor + s_i)` subject to `s_i >= min_power_i`,
/// cumulative feasibility against `budget`, with the output non-decreasing
/// over time. All floors must be equal and caps are not supported. Fails
/// with [`Error::InfeasiblePrefix`] naming the first prefix whose minimum
/// requirements exceed the harvested budget.
pub fn min_power_backward_fill(bins: &[Bin], budget: &EnergyProfile) -> Result<PowerPolicy> {
    validate_bins(bins, budget)?;
    if bins.iter().any(|b| b.cap.is_some()) {
        return Err(Error::Unsupported(
            "min_power_backward_fill does not handle capped bins".to_string(),
        ));
    }
    let n = bins.len();
    let floor = bins[0].floor;
    if bins.iter().any(|b| b.floor != floor) {
        return Err(Error::Unsupported(
            "min_power_backward_fill requires a uniform floor".to_string(),
        ));
    }
    let m: Vec<f64> = bins.iter().map(|b| b.min_power.unwrap_or(0.0)).collect();
    for w in m.windows(2) {
        if w[1] < w[0] - 1e-12 {
            return Err(Error::Unsupported(
                "min_power_backward_fill requires non-decreasing minimum powers".to_string(),
            ));
        }
    }
    let arrivals = budget.as_slice();
    let mut need = 0.0;
    let mut have = 0.0;
    for k in 0..n {
        need += m[k];
        have += arrivals[k];
        if need > have + 1e-9 {
            return Err(Error::InfeasiblePrefix {
                prefix: k + 1,
                required: need,
                available: have,
            });
        }
    }

    let mut s = arrivals.to_vec();
    for k in (0..n).rev() {
        if s[k] < m[k] {
            // Pull the missing energy from the nearest earlier slots; a slot
            // drained below its own requirement is repaired when its turn
            // comes, which the prefix feasibility check guarantees possible.
            let mut deficit = m[k] - s[k];
            for j in (0..k).rev() {
                let take = deficit.min(s[j]);
                s[j] -= take;
                deficit -= take;
                if deficit <= 0.0 {
                    break;
                }
            }
            debug_assert!(deficit <= 1e-9, "prefix check should have caught this");
            s[k] = m[k];
        } else {
            // Pour the excess forward until the suffix is level again. Only
            // slot k loses water, and it cannot sink below m[k] because the
            // requirements are non-decreasing.
            let mut total = s[k];
            let mut t = k;
            while t + 1 < n {
                let avg = total / (t - k + 1) as f64;
                if avg <= s[t + 1] {
                    break;
                }
                t += 1;
                total += s[t];
            }
            let level = total / (t - k + 1) as f64;
            if t > k {
                for item in s.iter_mut().take(t + 1).skip(k) {
                    *item = level;
                }
            }
        }
    }
    PowerPolicy::new(s)
}

/// A concave maximization over the "stored arrivals" polytope:
/// `x_i >= 0`, `sum_{i<=k} x_i <= sum_{i<=k} budget_i` for all `k`.
pub struct OuterProblem<'a> {
    /// Concave objective; may return `NEG_INFINITY` to veto an allocation.
    pub evaluate: &'a dyn Fn(&[f64]) -> f64,
    pub budget: EnergyProfile,
    /// When true, arrivals need not be fully consumed (an implicit discard
    /// slot past the horizon absorbs and can return the remainder).
    pub allow_discard: bool,
    /// When true, only non-decreasing allocations are visited.
    pub monotone_allocation_required: bool,
}

#[derive(Debug, Clone)]
pub struct WaterflowOutcome {
    pub allocation: PowerPolicy,
    pub value: f64,
    pub converged: bool,
    pub sweeps: usize,
}

pub const WATERFLOW_DEFAULT_TOL: f64 = 1e-8;
pub const WATERFLOW_DEFAULT_MAX_SWEEPS: usize = 10_000;

struct Cache<'a> {
    evaluate: &'a dyn Fn(&[f64]) -> f64,
    memo: HashMap<Vec<i64>, f64>,
}

impl<'a> Cache<'a> {
    fn get(&mut self, x: &[f64]) -> f64 {
        let key: Vec<i64> = x.iter().map(|v| (v * 1e12).round() as i64).collect();
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let v = (self.evaluate)(x);
        let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
        self.memo.insert(key, v);
        v
    }
}

/// Moves water along the timeline (or off the end of it) one transfer at a
/// time, line-searching each transfer amount on the concave restriction.
///
/// Stops when a full sweep of transfers improves the objective by less than
/// `tol` (relative) and flags non-convergence when `max_sweeps` is exhausted.
pub fn outer_waterflow(
    problem: &OuterProblem,
    tol: f64,
    max_sweeps: usize,
) -> Result<WaterflowOutcome> {
    let n = problem.budget.len();
    let cum: Vec<f64> = problem.budget.cumulative();
    let total = cum[n - 1];

    let mut x = if problem.monotone_allocation_required {
        if !problem.allow_discard {
            return Err(Error::Unsupported(
                "monotone allocation requires a discard slot".to_string(),
            ));
        }
        // The largest feasible constant allocation is monotone and gives the
        // ascent a non-trivial starting point.
        let c = cum
            .iter()
            .enumerate()
            .map(|(k, b)| b / (k + 1) as f64)
            .fold(f64::INFINITY, f64::min);
        vec![c; n]
    } else {
        problem.budget.as_slice().to_vec()
    };

    let mut cache = Cache {
        evaluate: problem.evaluate,
        memo: HashMap::new(),
    };
    let mut value = cache.get(&x);
    let mut sweeps = 0;
    let mut converged = false;

    while sweeps < max_sweeps {
        sweeps += 1;
        let sweep_start = value;

        // Pairwise transfers, nearest neighbours first.
        for gap in 1..n {
            for i in 0..n - gap {
                let j = i + gap;
                let (lo, hi) = transfer_bounds(&x, &cum, i, j, problem);
                try_move(&mut x, &mut value, &mut cache, lo, hi, tol, |x, t| {
                    x[i] -= t;
                    x[j] += t;
                });
            }
        }

        if problem.allow_discard {
            // Transfers between each slot and the discard space.
            for i in 0..n {
                let (lo, hi) = discard_bounds(&x, &cum, i, discarded_now(total, &x), problem);
                try_move(&mut x, &mut value, &mut cache, lo, hi, tol, |x, t| {
                    x[i] -= t;
                });
            }
            // Uniform suffix shifts escape corners that single-slot moves
            // cannot leave (notably under the monotone requirement).
            for j in 0..n {
                let len = (n - j) as f64;
                let mut hi = discarded_now(total, &x) / len;
                let mut prefix: f64 = x[..j].iter().sum();
                for (k, xk) in x.iter().enumerate().skip(j) {
                    prefix += xk;
                    let room = (cum[k] - prefix) / (k - j + 1) as f64;
                    hi = hi.min(room);
                }
                let mut lo = -x[j];
                if problem.monotone_allocation_required && j > 0 {
                    lo = lo.max(x[j - 1] - x[j]);
                }
                try_move(&mut x, &mut value, &mut cache, lo, hi, tol, |x, t| {
                    for xk in x.iter_mut().skip(j) {
                        *xk += t;
                    }
                });
            }
        }

        for v in x.iter_mut() {
            if *v < 0.0 {
                debug_assert!(*v > -1e-9);
                *v = 0.0;
            }
        }

        let gain = value - sweep_start;
        if gain <= tol * (1.0 + value.abs()) {
            converged = true;
            break;
        }
    }

    Ok(WaterflowOutcome {
        allocation: PowerPolicy::new(x)?,
        value,
        converged,
        sweeps,
    })
}

fn discarded_now(total: f64, x: &[f64]) -> f64 {
    (total - x.iter().sum::<f64>()).max(0.0)
}

/// Feasible range of `t` for moving `t` units from slot `i` to slot `j > i`
/// (negative `t` moves backwards in time).
fn transfer_bounds(
    x: &[f64],
    cum: &[f64],
    i: usize,
    j: usize,
    problem: &OuterProblem,
) -> (f64, f64) {
    let mut hi = x[i];
    // Moving backwards re-tightens every prefix in [i, j).
    let mut prefix: f64 = x[..=i].iter().sum();
    let mut back = x[j];
    for k in i..j {
        if k > i {
            prefix += x[k];
        }
        back = back.min(cum[k] - prefix);
    }
    let mut lo = -back.max(0.0);
    if problem.monotone_allocation_required {
        if i > 0 {
            hi = hi.min(x[i] - x[i - 1]);
        }
        if i + 1 < x.len() && i + 1 != j {
            lo = lo.max(x[i] - x[i + 1]);
        }
        if j > 0 && j - 1 != i {
            lo = lo.max(x[j - 1] - x[j]);
        }
        if j + 1 < x.len() {
            hi = hi.min(x[j + 1] - x[j]);
        }
        if j == i + 1 {
            lo = lo.max(0.5 * (x[i] - x[j]));
        }
    }
    (lo, hi)
}

/// Feasible range of `t` for discarding `t` units from slot `i` (negative
/// `t` reclaims previously discarded water into slot `i`).
fn discard_bounds(
    x: &[f64],
    cum: &[f64],
    i: usize,
    discarded: f64,
    problem: &OuterProblem,
) -> (f64, f64) {
    let mut hi = x[i];
    let mut prefix: f64 = x[..=i].iter().sum();
    let mut room = cum[i] - prefix;
    for k in i + 1..x.len() {
        prefix += x[k];
        room = room.min(cum[k] - prefix);
    }
    let mut lo = -discarded.min(room).max(0.0);
    if problem.monotone_allocation_required {
        if i > 0 {
            hi = hi.min(x[i] - x[i - 1]);
        }
        if i + 1 < x.len() {
            lo = lo.max(x[i] - x[i + 1]);
        }
    }
    (lo, hi)
}

/// Golden-section maximization of the concave 1-D restriction along `shift`,
/// applied only when it improves the incumbent.
fn try_move(
    x: &mut Vec<f64>,
    value: &mut f64,
    cache: &mut Cache,
    lo: f64,
    hi: f64,
    tol: f64,
    shift: impl Fn(&mut [f64], f64),
) {
    if !(hi - lo > 1e-13) {
        return;
    }
    let mut probe = |t: f64| -> f64 {
        let mut cand = x.clone();
        shift(&mut cand, t);
        for v in cand.iter_mut() {
            if *v < 0.0 && *v > -1e-12 {
                *v = 0.0;
            }
        }
        cache.get(&cand)
    };
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let width_tol = (hi - lo) * (tol * 0.1).max(1e-12) + 1e-14;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = probe(c);
    let mut fd = probe(d);
    while b - a > width_tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = probe(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = probe(d);
        }
    }
    let t_best = if fc >= fd { c } else { d };
    let f_best = fc.max(fd);
    if f_best > *value {
        shift(x, t_best);
        for v in x.iter_mut() {
            if *v < 0.0 && *v > -1e-12 {
                *v = 0.0;
            }
        }
        *value = f_best;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn profile(v: &[f64]) -> EnergyProfile {
        EnergyProfile::new(v.to_vec()).unwrap()
    }

    #[test]
    fn waterfill_levels_forward_only() {
        // Early surplus flows right, later surplus cannot flow left.
        let bins = vec![Bin::new(1.0); 2];
        let x = directional_waterfill(&bins, &profile(&[3.0, 1.0])).unwrap();
        assert_relative_eq!(x.as_slice()[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(x.as_slice()[1], 2.0, epsilon = 1e-12);

        let x = directional_waterfill(&bins, &profile(&[0.5, 3.5])).unwrap();
        assert_eq!(x.as_slice(), &[0.5, 3.5]);
    }

    #[test]
    fn waterfill_respects_floors() {
        let bins = vec![Bin::new(1.0), Bin::new(3.0), Bin::new(1.0)];
        let x = directional_waterfill(&bins, &profile(&[2.0, 2.0, 2.0])).unwrap();
        // Slot 2's high floor leaves it dry once its own arrival moves on.
        assert_relative_eq!(x.as_slice()[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(x.as_slice()[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(x.as_slice()[2], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn waterfill_caps_spill_forward_then_waste() {
        let bins = vec![Bin::capped(1.0, 1.0), Bin::capped(1.0, 1.0)];
        let x = directional_waterfill(&bins, &profile(&[4.0, 0.0])).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 1.0]);

        let bins = vec![Bin::capped(1.0, 1.0), Bin::new(1.0)];
        let x = directional_waterfill(&bins, &profile(&[3.0, 0.0])).unwrap();
        assert_relative_eq!(x.as_slice()[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(x.as_slice()[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn waterfill_zero_budget() {
        let bins = vec![Bin::new(1.0); 3];
        let x = directional_waterfill(&bins, &profile(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(x.as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn backward_fill_meets_growing_minimums() {
        let bins = vec![
            Bin::with_min_power(1.0, 0.0),
            Bin::with_min_power(1.0, 0.0),
            Bin::with_min_power(1.0, 4.0),
        ];
        let s = min_power_backward_fill(&bins, &profile(&[5.0, 0.0, 3.0])).unwrap();
        assert_relative_eq!(s.as_slice()[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(s.as_slice()[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(s.as_slice()[2], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn backward_fill_reports_first_bad_prefix() {
        let bins = vec![Bin::with_min_power(1.0, 1.0), Bin::with_min_power(1.0, 2.0)];
        let err = min_power_backward_fill(&bins, &profile(&[1.0, 0.5])).unwrap_err();
        match err {
            Error::InfeasiblePrefix { prefix, .. } => assert_eq!(prefix, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn backward_fill_output_non_decreasing() {
        let bins = vec![
            Bin::with_min_power(1.0, 0.2),
            Bin::with_min_power(1.0, 0.2),
            Bin::with_min_power(1.0, 1.0),
            Bin::with_min_power(1.0, 1.5),
        ];
        let s = min_power_backward_fill(&bins, &profile(&[3.0, 0.1, 0.4, 2.0])).unwrap();
        for w in s.as_slice().windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        let mut spent = 0.0;
        for (k, v) in s.as_slice().iter().enumerate() {
            spent += v;
            assert!(spent <= [3.0, 3.1, 3.5, 5.5][k] + 1e-9);
        }
    }

    #[test]
    fn outer_waterflow_matches_waterfill_on_log_objective() {
        // With the log objective the ascent must land on the water-filling
        // solution.
        let budget = profile(&[3.0, 0.5, 1.5]);
        let bins = vec![Bin::new(1.0); 3];
        let reference = directional_waterfill(&bins, &budget).unwrap();
        let objective = |x: &[f64]| x.iter().map(|&v| (1.0 + v).ln()).sum::<f64>();
        let problem = OuterProblem {
            evaluate: &objective,
            budget: budget.clone(),
            allow_discard: true,
            monotone_allocation_required: false,
        };
        let out = outer_waterflow(&problem, 1e-10, 1000).unwrap();
        assert!(out.converged);
        for (a, b) in out.allocation.as_slice().iter().zip(reference.as_slice()) {
            assert_relative_eq!(a, b, epsilon = 1e-4);
        }
    }

    #[test]
    fn outer_waterflow_discards_when_water_hurts() {
        // Concave objective peaking at 1 unit per slot: the rest must go
        // overboard rather than into the bins.
        let objective = |x: &[f64]| x.iter().map(|&v| v - 0.5 * v * v).sum::<f64>();
        let problem = OuterProblem {
            evaluate: &objective,
            budget: profile(&[5.0, 5.0]),
            allow_discard: true,
            monotone_allocation_required: false,
        };
        let out = outer_waterflow(&problem, 1e-10, 1000).unwrap();
        assert!(out.converged);
        for v in out.allocation.as_slice() {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-4);
        }
    }

    #[test]
    fn zero_cap_bins_pass_water_forward() {
        let bins = [Bin::capped(0.0, 0.0), Bin::capped(0.0, 1.0)];
        let water = directional_waterfill(&bins, &profile(&[0.5, 0.0])).unwrap();
        assert!(water.as_slice()[0].abs() < 1e-12);
        assert!((water.as_slice()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn outer_waterflow_monotone_mode_stays_monotone() {
        let objective = |x: &[f64]| {
            x.iter()
                .enumerate()
                .map(|(i, &v)| (1.0 + i as f64) * (1.0 + v).ln())
                .sum::<f64>()
        };
        let problem = OuterProblem {
            evaluate: &objective,
            budget: profile(&[2.0, 1.0, 0.2]),
            allow_discard: true,
            monotone_allocation_required: true,
        };
        let out = outer_waterflow(&problem, 1e-10, 2000).unwrap();
        assert!(out.converged);
        let x = out.allocation.as_slice();
        for w in x.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "allocation must stay non-decreasing");
        }
        let cum = [2.0, 3.0, 3.2];
        let mut acc = 0.0;
        for (k, v) in x.iter().enumerate() {
            acc += v;
            assert!(acc <= cum[k] + 1e-9);
        }
    }
}
