//! Offline throughput maximization for a point-to-point link where both the
//! transmitter and the receiver harvest energy.
//!
//! The optimal rate schedule is a non-decreasing staircase: each segment runs
//! at the smallest "water level" any resource can sustain on some window
//! ahead, and the segment ends at the latest slot attaining that level. The
//! machinery is written for an arbitrary set of resource streams because the
//! relay and broadcast solvers reuse it with three streams and one stream
//! respectively.

use crate::model::{EnergyProfile, LinkModel, RatePolicy, RATE_CAP};
use crate::{Error, Result};

/// One cumulative resource constraining the rate schedule: spending
/// `cost(r)` per slot must keep every prefix within `cumulative`.
pub(crate) struct Stream<'a> {
    pub cumulative: Vec<f64>,
    /// Per-slot resource consumption at rate `r`; convex and increasing.
    pub cost: &'a dyn Fn(f64) -> f64,
    /// Largest rate sustainable on an average resource budget; inverse of
    /// `cost`, clamped to `[0, RATE_CAP]` by the caller.
    pub level: &'a dyn Fn(f64) -> f64,
}

pub(crate) struct StaircaseRaw {
    pub rates: Vec<f64>,
    /// Segment ends as 1-based slot counts; the last entry is the horizon.
    pub change_points: Vec<usize>,
    /// Indices of the streams whose budget pins each segment's rate.
    pub binding: Vec<Vec<usize>>,
}

/// Runs the staircase construction over `n` slots.
///
/// Each iteration finds, over all windows starting after the previous
/// change point, the smallest sustainable level; ties pick the longest
/// window so that equal-rate stretches collapse into one segment.
pub(crate) fn solve_staircase(streams: &[Stream], n: usize) -> StaircaseRaw {
    let mut rates = vec![0.0; n];
    let mut consumed = vec![0.0; streams.len()];
    let mut change_points = Vec::new();
    let mut binding = Vec::new();

    let mut start = 0;
    while start < n {
        let mut best_i = start;
        let mut best_level = f64::INFINITY;
        for i in start..n {
            let len = (i - start + 1) as f64;
            let mut lvl = f64::INFINITY;
            for (s, stream) in streams.iter().enumerate() {
                let avail = ((stream.cumulative[i] - consumed[s]) / len).max(0.0);
                lvl = lvl.min((stream.level)(avail).max(0.0));
            }
            if lvl <= best_level {
                best_level = lvl;
                best_i = i;
            }
        }

        let r = best_level;
        let len = (best_i - start + 1) as f64;
        for slot in rates.iter_mut().take(best_i + 1).skip(start) {
            *slot = r;
        }
        let mut pinned = Vec::new();
        for (s, stream) in streams.iter().enumerate() {
            let avail = ((stream.cumulative[best_i] - consumed[s]) / len).max(0.0);
            if ((stream.level)(avail).max(0.0) - r).abs() <= 1e-9 * (1.0 + r) {
                pinned.push(s);
            }
        }
        for (s, stream) in streams.iter().enumerate() {
            consumed[s] += len * (stream.cost)(r);
        }
        change_points.push(best_i + 1);
        binding.push(pinned);
        start = best_i + 1;
    }

    StaircaseRaw {
        rates,
        change_points,
        binding,
    }
}

/// Which side's energy pins a segment of the single-user staircase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentBinding {
    TxEnergy,
    RxEnergy,
    Both,
}

#[derive(Debug, Clone)]
pub struct StaircaseSolution {
    pub rates: RatePolicy,
    /// Segment boundaries as 1-based slot counts, ending at the horizon.
    pub change_points: Vec<usize>,
    /// Binding resource per segment, aligned with `change_points`.
    pub binding: Vec<SegmentBinding>,
}

impl StaircaseSolution {
    pub fn throughput(&self) -> f64 {
        self.rates.total()
    }
}

/// Optimal rate schedule when both sides have batteries.
///
/// The transmitter spends `f(r)` per slot against `tx`, the receiver spends
/// `phi(r)` per slot against `rx`; both are prefix-constrained.
pub fn solve_single_user(
    tx: &EnergyProfile,
    rx: &EnergyProfile,
    link: &LinkModel,
) -> Result<StaircaseSolution> {
    if tx.len() != rx.len() {
        return Err(Error::LengthMismatch {
            expected: tx.len(),
            got: rx.len(),
        });
    }
    let tx_cost = |r: f64| link.f(r);
    let tx_level = |a: f64| link.g(a).min(RATE_CAP);
    let rx_cost = |r: f64| link.phi(r);
    let rx_level = |a: f64| link.psi(a);
    let streams = [
        Stream {
            cumulative: tx.cumulative(),
            cost: &tx_cost,
            level: &tx_level,
        },
        Stream {
            cumulative: rx.cumulative(),
            cost: &rx_cost,
            level: &rx_level,
        },
    ];
    let raw = solve_staircase(&streams, tx.len());

    let binding = raw
        .binding
        .iter()
        .map(|pinned| match (pinned.contains(&0), pinned.contains(&1)) {
            (true, true) => SegmentBinding::Both,
            (true, false) => SegmentBinding::TxEnergy,
            _ => SegmentBinding::RxEnergy,
        })
        .collect();

    Ok(StaircaseSolution {
        rates: RatePolicy::new(raw.rates)?,
        change_points: raw.change_points,
        binding,
    })
}

/// Variant where the receiver has no battery: energy it harvests in a slot
/// must be spent on decoding in that slot or is lost, which caps the rate of
/// slot `i` at `psi(rx_i)` and hence the transmit power at `f(psi(rx_i))`.
pub fn solve_single_user_no_battery(
    tx: &EnergyProfile,
    rx: &EnergyProfile,
    link: &LinkModel,
) -> Result<RatePolicy> {
    if tx.len() != rx.len() {
        return Err(Error::LengthMismatch {
            expected: tx.len(),
            got: rx.len(),
        });
    }
    let bins: Vec<crate::waterfill::Bin> = rx
        .as_slice()
        .iter()
        .map(|&e| crate::waterfill::Bin::capped(1.0, link.f(link.psi(e))))
        .collect();
    let powers = crate::waterfill::directional_waterfill(&bins, tx)?;
    RatePolicy::new(powers.as_slice().iter().map(|&p| link.g(p)).collect())
}
