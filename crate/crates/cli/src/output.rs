//! Output documents: one JSON object per solved policy, one CSV table per
//! region sweep. Field names and number formatting are part of the CLI's
//! contract, so tests compare rendered bytes directly.

use ehopt_core::mac::{DecodingMode, DepartureRegion, RegionPoint};
use ehopt_core::model::{LinkModel, RatePolicy};
use ehopt_core::single_user::{SegmentBinding, StaircaseSolution};
use ehopt_core::two_hop::TwoHopSolution;
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeightsOut {
    pub mu1: f64,
    pub mu2: f64,
}

/// One constant-rate segment and the resource that pins it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SegmentOut {
    /// Last slot of the segment, 1-based.
    pub through_slot: usize,
    pub resource: &'static str,
}

#[derive(Debug, Serialize)]
#[serde(tag = "topology", rename_all = "snake_case")]
pub enum SolveOutput {
    SingleUser {
        rates: Vec<f64>,
        tx_powers: Vec<f64>,
        rx_decode_energy: Vec<f64>,
        throughput: f64,
        /// Empty when the receiver has no battery; that solver does not
        /// produce segment structure.
        binding: Vec<SegmentOut>,
        converged: bool,
    },
    TwoHop {
        source_rates: Vec<f64>,
        relay_rates: Vec<f64>,
        relay_decode_energy: Vec<f64>,
        throughput: f64,
        converged: bool,
    },
    Mac {
        mode: &'static str,
        weights: WeightsOut,
        tx1_powers: Vec<f64>,
        tx2_powers: Vec<f64>,
        b1: f64,
        b2: f64,
        converged: bool,
    },
    Bc {
        weights: WeightsOut,
        total_powers: Vec<f64>,
        weak_powers: Vec<f64>,
        b1: f64,
        b2: f64,
        converged: bool,
    },
}

impl SolveOutput {
    pub fn converged(&self) -> bool {
        match self {
            SolveOutput::SingleUser { converged, .. }
            | SolveOutput::TwoHop { converged, .. }
            | SolveOutput::Mac { converged, .. }
            | SolveOutput::Bc { converged, .. } => *converged,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("policy output serializes");
        text.push('\n');
        text
    }
}

pub fn mode_label(mode: DecodingMode) -> &'static str {
    match mode {
        DecodingMode::Simultaneous => "simultaneous",
        DecodingMode::Successive => "successive",
    }
}

fn binding_label(binding: SegmentBinding) -> &'static str {
    match binding {
        SegmentBinding::TxEnergy => "tx_energy",
        SegmentBinding::RxEnergy => "rx_energy",
        SegmentBinding::Both => "both",
    }
}

pub fn single_user_output(solution: &StaircaseSolution, link: &LinkModel) -> SolveOutput {
    let rates = solution.rates.as_slice().to_vec();
    let binding = solution
        .change_points
        .iter()
        .zip(&solution.binding)
        .map(|(&through_slot, &resource)| SegmentOut {
            through_slot,
            resource: binding_label(resource),
        })
        .collect();
    SolveOutput::SingleUser {
        tx_powers: rates.iter().map(|&r| link.f(r)).collect(),
        rx_decode_energy: rates.iter().map(|&r| link.phi(r)).collect(),
        throughput: solution.throughput(),
        binding,
        converged: true,
        rates,
    }
}

pub fn single_user_no_battery_output(rates: &RatePolicy, link: &LinkModel) -> SolveOutput {
    let rates = rates.as_slice().to_vec();
    SolveOutput::SingleUser {
        tx_powers: rates.iter().map(|&r| link.f(r)).collect(),
        rx_decode_energy: rates.iter().map(|&r| link.phi(r)).collect(),
        throughput: rates.iter().sum(),
        binding: Vec::new(),
        converged: true,
        rates,
    }
}

pub fn two_hop_output(solution: &TwoHopSolution) -> SolveOutput {
    SolveOutput::TwoHop {
        source_rates: solution.source_rates.as_slice().to_vec(),
        relay_rates: solution.relay_rates.as_slice().to_vec(),
        relay_decode_energy: solution.delta.as_slice().to_vec(),
        throughput: solution.throughput,
        converged: solution.converged,
    }
}

pub fn mac_output(point: &RegionPoint, mode: DecodingMode) -> SolveOutput {
    SolveOutput::Mac {
        mode: mode_label(mode),
        weights: WeightsOut {
            mu1: point.weights.mu1,
            mu2: point.weights.mu2,
        },
        tx1_powers: point.policy.0.as_slice().to_vec(),
        tx2_powers: point.policy.1.as_slice().to_vec(),
        b1: point.b1,
        b2: point.b2,
        converged: point.converged,
    }
}

pub fn bc_output(point: &RegionPoint) -> SolveOutput {
    SolveOutput::Bc {
        weights: WeightsOut {
            mu1: point.weights.mu1,
            mu2: point.weights.mu2,
        },
        total_powers: point.policy.0.as_slice().to_vec(),
        weak_powers: point.policy.1.as_slice().to_vec(),
        b1: point.b1,
        b2: point.b2,
        converged: point.converged,
    }
}

/// 12 significant digits, enough to re-audit a policy without quantization
/// artifacts.
pub fn significant(value: f64) -> String {
    format!("{value:.11e}")
}

pub fn region_csv(region: &DepartureRegion) -> String {
    let mut out = String::from("mu1,mu2,b1,b2,converged\n");
    for point in &region.points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            significant(point.weights.mu1),
            significant(point.weights.mu2),
            significant(point.b1),
            significant(point.b2),
            point.converged
        ));
    }
    out
}
