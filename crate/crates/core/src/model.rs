//! Core domain types: energy profiles, rate and decoding functions, link
//! models, policies, and scenario descriptions.
//!
//! Conventions used everywhere: slots have unit length, so per-slot power and
//! per-slot energy are interchangeable. Harvested energy can be stored and
//! spent later but never borrowed from the future, so feasibility is always a
//! family of prefix-sum inequalities.

use crate::{Error, Result};

/// Rates above this value (nats or bits per slot) are outside the supported
/// domain; exponentiating them would lose all numeric meaning.
pub const RATE_CAP: f64 = 60.0;

/// Default absolute tolerance for feasibility checks.
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-9;

/// Logarithm base of the rate function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    /// `g(p) = ln(1 + p)`, rates in nats.
    Natural,
    /// `g(p) = (1/2) log2(1 + p)`, rates in bits.
    Base2,
}

/// Concave rate-power curve `g` and its inverse `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateFunction {
    pub base: LogBase,
}

impl RateFunction {
    pub fn new(base: LogBase) -> Self {
        Self { base }
    }

    /// Rate supported by transmit power `p >= 0`.
    pub fn g(&self, p: f64) -> f64 {
        match self.base {
            LogBase::Natural => p.ln_1p(),
            LogBase::Base2 => 0.5 * p.ln_1p() / std::f64::consts::LN_2,
        }
    }

    /// Power required to sustain rate `r >= 0`; inverse of [`Self::g`].
    pub fn f(&self, r: f64) -> f64 {
        match self.base {
            LogBase::Natural => r.exp_m1(),
            LogBase::Base2 => (2.0 * r * std::f64::consts::LN_2).exp_m1(),
        }
    }
}

/// Receiver-side decoding cost `phi(r)`: energy per slot spent to decode an
/// incoming stream of rate `r`. Convex and strictly increasing on `r >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecodingFunction {
    /// `phi = f`, the inverse of the rate function with the stated base.
    /// Decoding then costs exactly as much as transmitting.
    InverseG { base: LogBase },
    /// `phi(r) = a r + b` with `a > 0`, `b >= 0`.
    Linear { a: f64, b: f64 },
    /// `phi(r) = c 2^(d r) + e` with `c, d > 0` and `c + e >= 0`.
    Exponential { c: f64, d: f64, e: f64 },
}

impl DecodingFunction {
    /// Validates the parameter ranges that keep `phi` increasing, convex and
    /// non-negative at zero.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Domain(msg.to_string()));
        match *self {
            DecodingFunction::InverseG { .. } => Ok(()),
            DecodingFunction::Linear { a, b } => {
                if !(a.is_finite() && a > 0.0) {
                    return bad("linear decoding cost requires slope a > 0");
                }
                if !(b.is_finite() && b >= 0.0) {
                    return bad("linear decoding cost requires offset b >= 0");
                }
                Ok(())
            }
            DecodingFunction::Exponential { c, d, e } => {
                if !(c.is_finite() && c > 0.0) || !(d.is_finite() && d > 0.0) {
                    return bad("exponential decoding cost requires c > 0 and d > 0");
                }
                if !(e.is_finite() && c + e >= 0.0) {
                    return bad("exponential decoding cost requires c + e >= 0");
                }
                Ok(())
            }
        }
    }
}

/// A validated (rate function, decoding function) pair for one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkModel {
    rate: RateFunction,
    decoding: DecodingFunction,
}

impl LinkModel {
    /// Builds a link model, rejecting invalid decoding parameters and
    /// mismatched bases (an `InverseG` decoder must invert this link's own
    /// rate function, not the one of the other base).
    pub fn new(rate: RateFunction, decoding: DecodingFunction) -> Result<Self> {
        decoding.validate()?;
        if let DecodingFunction::InverseG { base } = decoding {
            if base != rate.base {
                return Err(Error::Domain(
                    "decoding function inverts a rate function of a different base".to_string(),
                ));
            }
        }
        Ok(Self { rate, decoding })
    }

    pub fn rate(&self) -> RateFunction {
        self.rate
    }

    pub fn decoding(&self) -> DecodingFunction {
        self.decoding
    }

    pub fn g(&self, p: f64) -> f64 {
        self.rate.g(p)
    }

    pub fn f(&self, r: f64) -> f64 {
        self.rate.f(r)
    }

    /// Decoding cost `phi(r)`.
    pub fn phi(&self, r: f64) -> f64 {
        match self.decoding {
            DecodingFunction::InverseG { .. } => self.rate.f(r),
            DecodingFunction::Linear { a, b } => a * r + b,
            DecodingFunction::Exponential { c, d, e } => {
                c * (d * r * std::f64::consts::LN_2).exp() + e
            }
        }
    }

    /// Largest rate in `[0, RATE_CAP]` decodable with per-slot energy `x`:
    /// the inverse of `phi`, clamped to the supported rate range.
    pub fn psi(&self, x: f64) -> f64 {
        let r = match self.decoding {
            DecodingFunction::InverseG { .. } => self.rate.g(x.max(0.0)),
            DecodingFunction::Linear { a, b } => (x - b) / a,
            DecodingFunction::Exponential { c, d, e } => {
                if x <= c + e {
                    0.0
                } else {
                    ((x - e) / c).ln() / (d * std::f64::consts::LN_2)
                }
            }
        };
        r.clamp(0.0, RATE_CAP)
    }

    /// True when decoding a rate costs exactly the power needed to transmit
    /// it, i.e. `phi = f`. The multiuser solvers rely on this identity.
    pub fn decoding_matches_rate_inverse(&self) -> bool {
        match self.decoding {
            DecodingFunction::InverseG { .. } => true,
            DecodingFunction::Exponential { c, d, e } => {
                self.rate.base == LogBase::Base2 && c == 1.0 && d == 2.0 && e == -1.0
            }
            DecodingFunction::Linear { .. } => false,
        }
    }
}

/// Decoding cost of `rate` on `link`, with domain validation.
pub fn decoding_power(rate: f64, link: &LinkModel) -> Result<f64> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::Domain(format!(
            "rate {rate} is not a finite non-negative value"
        )));
    }
    if rate > RATE_CAP {
        return Err(Error::Domain(format!(
            "rate {rate} exceeds the supported cap {RATE_CAP}"
        )));
    }
    Ok(link.phi(rate))
}

fn validate_slot_values(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyHorizon);
    }
    for (slot, &v) in values.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidValue { slot, value: v });
        }
    }
    Ok(())
}

fn prefix_sums(values: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    values
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

/// Per-slot harvested energy of one node. Entries are finite and
/// non-negative; the horizon has at least one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyProfile(Vec<f64>);

impl EnergyProfile {
    pub fn new(amounts: Vec<f64>) -> Result<Self> {
        validate_slot_values(&amounts)?;
        Ok(Self(amounts))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn cumulative(&self) -> Vec<f64> {
        prefix_sums(&self.0)
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Per-slot transmission (or decoding) rates.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePolicy(Vec<f64>);

impl RatePolicy {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        validate_slot_values(&rates)?;
        Ok(Self(rates))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn cumulative(&self) -> Vec<f64> {
        prefix_sums(&self.0)
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Per-slot spent power.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerPolicy(Vec<f64>);

impl PowerPolicy {
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        validate_slot_values(&powers)?;
        Ok(Self(powers))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn cumulative(&self) -> Vec<f64> {
        prefix_sums(&self.0)
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// True when every spending prefix stays within the harvested prefix, up to
/// an absolute tolerance. Errors if the horizons differ.
pub fn cumulative_feasible(spend: &[f64], harvested: &EnergyProfile, tol: f64) -> Result<bool> {
    if spend.len() != harvested.len() {
        return Err(Error::LengthMismatch {
            expected: harvested.len(),
            got: spend.len(),
        });
    }
    let budget = harvested.cumulative();
    let mut acc = 0.0;
    for (k, &s) in spend.iter().enumerate() {
        acc += s;
        if acc > budget[k] + tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    SingleUser,
    TwoHop,
    Mac,
    Bc,
}

/// A fully described problem instance: who harvests what, over which link.
#[derive(Debug, Clone)]
pub enum Scenario {
    SingleUser {
        tx: EnergyProfile,
        rx: EnergyProfile,
        /// Without a receiver battery, energy harvested in a slot must be
        /// spent in that slot or lost, which caps the per-slot rate.
        rx_has_battery: bool,
        link: LinkModel,
    },
    TwoHop {
        source: EnergyProfile,
        relay: EnergyProfile,
        destination: EnergyProfile,
        link: LinkModel,
    },
    Mac {
        tx1: EnergyProfile,
        tx2: EnergyProfile,
        rx: EnergyProfile,
        link: LinkModel,
    },
    Bc {
        tx: EnergyProfile,
        rx1: EnergyProfile,
        rx2: EnergyProfile,
        /// Noise power of the weaker receiver relative to the stronger one.
        sigma2: f64,
        link: LinkModel,
    },
}

impl Scenario {
    pub fn topology(&self) -> Topology {
        match self {
            Scenario::SingleUser { .. } => Topology::SingleUser,
            Scenario::TwoHop { .. } => Topology::TwoHop,
            Scenario::Mac { .. } => Topology::Mac,
            Scenario::Bc { .. } => Topology::Bc,
        }
    }

    /// Number of slots, taken from the first profile of the scenario.
    pub fn horizon(&self) -> usize {
        match self {
            Scenario::SingleUser { tx, .. } => tx.len(),
            Scenario::TwoHop { source, .. } => source.len(),
            Scenario::Mac { tx1, .. } => tx1.len(),
            Scenario::Bc { tx, .. } => tx.len(),
        }
    }

    pub fn link(&self) -> &LinkModel {
        match self {
            Scenario::SingleUser { link, .. } => link,
            Scenario::TwoHop { link, .. } => link,
            Scenario::Mac { link, .. } => link,
            Scenario::Bc { link, .. } => link,
        }
    }
}

/// Structural validation; returns the full list of violations (empty when
/// the scenario is well formed).
pub fn check_scenario(scenario: &Scenario) -> Vec<String> {
    let mut violations = Vec::new();
    let mut check_len = |name: &str, got: usize, expected: usize| {
        if got != expected {
            violations.push(format!(
                "profile '{name}' has {got} slots, expected {expected}"
            ));
        }
    };
    match scenario {
        Scenario::SingleUser { tx, rx, .. } => {
            check_len("rx", rx.len(), tx.len());
        }
        Scenario::TwoHop {
            source,
            relay,
            destination,
            ..
        } => {
            check_len("relay", relay.len(), source.len());
            check_len("destination", destination.len(), source.len());
        }
        Scenario::Mac { tx1, tx2, rx, link } => {
            check_len("tx2", tx2.len(), tx1.len());
            check_len("rx", rx.len(), tx1.len());
            if !link.decoding_matches_rate_inverse() {
                violations.push(
                    "mac topology requires a decoding cost equal to the rate function inverse"
                        .to_string(),
                );
            }
        }
        Scenario::Bc {
            tx,
            rx1,
            rx2,
            sigma2,
            link,
        } => {
            check_len("rx1", rx1.len(), tx.len());
            check_len("rx2", rx2.len(), tx.len());
            if !(sigma2.is_finite() && *sigma2 > 1.0) {
                violations.push(format!(
                    "bc topology requires sigma2 > 1 (the weaker receiver), got {sigma2}"
                ));
            }
            if !link.decoding_matches_rate_inverse() {
                violations.push(
                    "bc topology requires a decoding cost equal to the rate function inverse"
                        .to_string(),
                );
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn natural_link() -> LinkModel {
        LinkModel::new(
            RateFunction::new(LogBase::Natural),
            DecodingFunction::InverseG {
                base: LogBase::Natural,
            },
        )
        .unwrap()
    }

    #[test]
    fn rate_function_round_trips() {
        for base in [LogBase::Natural, LogBase::Base2] {
            let rf = RateFunction::new(base);
            for p in [0.0, 0.3, 1.0, 7.5, 400.0] {
                assert_relative_eq!(rf.f(rf.g(p)), p, max_relative = 1e-12, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn base2_reference_values() {
        let rf = RateFunction::new(LogBase::Base2);
        assert_relative_eq!(rf.g(3.0), 1.0, epsilon = 1e-12);
        assert_relative_eq!(rf.f(1.0), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn decoding_kinds_evaluate_and_invert() {
        let link = |decoding| LinkModel::new(RateFunction::new(LogBase::Base2), decoding).unwrap();

        let lin = link(DecodingFunction::Linear { a: 2.0, b: 0.5 });
        assert_relative_eq!(lin.phi(1.0), 2.5, epsilon = 1e-12);
        let expo = link(DecodingFunction::Exponential {
            c: 1.0,
            d: 2.0,
            e: -1.0,
        });
        assert_relative_eq!(expo.phi(1.0), 3.0, epsilon = 1e-12);
        assert_relative_eq!(expo.psi(3.0), 1.0, epsilon = 1e-12);

        for l in [lin, expo, natural_link()] {
            for r in [0.0, 0.2, 1.0, 4.0] {
                assert_relative_eq!(l.psi(l.phi(r)), r, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn psi_matches_bisection_inverse() {
        // Closed forms against a dumb bisection on [0, RATE_CAP].
        let bisect = |link: &LinkModel, x: f64| -> f64 {
            let (mut lo, mut hi) = (0.0f64, RATE_CAP);
            if link.phi(lo) >= x {
                return 0.0;
            }
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if link.phi(mid) <= x {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let links = [
            natural_link(),
            LinkModel::new(
                RateFunction::new(LogBase::Base2),
                DecodingFunction::Exponential {
                    c: 0.7,
                    d: 1.3,
                    e: 0.1,
                },
            )
            .unwrap(),
            LinkModel::new(
                RateFunction::new(LogBase::Natural),
                DecodingFunction::Linear { a: 0.8, b: 0.2 },
            )
            .unwrap(),
        ];
        for link in &links {
            for x in [0.0, 0.15, 0.9, 2.4, 11.0] {
                assert_relative_eq!(link.psi(x), bisect(link, x), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn invalid_decoding_parameters_rejected() {
        let rf = RateFunction::new(LogBase::Base2);
        assert!(LinkModel::new(rf, DecodingFunction::Linear { a: 0.0, b: 0.1 }).is_err());
        assert!(LinkModel::new(rf, DecodingFunction::Linear { a: 1.0, b: -0.1 }).is_err());
        assert!(LinkModel::new(
            rf,
            DecodingFunction::Exponential {
                c: 1.0,
                d: 2.0,
                e: -1.5
            }
        )
        .is_err());
        assert!(LinkModel::new(
            rf,
            DecodingFunction::InverseG {
                base: LogBase::Natural
            }
        )
        .is_err());
    }

    #[test]
    fn decoding_power_validates_domain() {
        let link = natural_link();
        assert!(decoding_power(-0.1, &link).is_err());
        assert!(decoding_power(RATE_CAP + 1.0, &link).is_err());
        assert_relative_eq!(
            decoding_power(1.0, &link).unwrap(),
            std::f64::consts::E - 1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn profile_validation() {
        assert!(EnergyProfile::new(vec![]).is_err());
        assert!(EnergyProfile::new(vec![1.0, -0.5]).is_err());
        assert!(EnergyProfile::new(vec![f64::NAN]).is_err());
        let p = EnergyProfile::new(vec![1.0, 2.0, 0.0]).unwrap();
        assert_eq!(p.cumulative(), vec![1.0, 3.0, 3.0]);
    }

    #[test]
    fn cumulative_feasibility() {
        let p = EnergyProfile::new(vec![1.0, 1.0]).unwrap();
        assert!(cumulative_feasible(&[1.0, 1.0], &p, 1e-9).unwrap());
        assert!(!cumulative_feasible(&[1.5, 0.0], &p, 1e-9).unwrap());
        // Savings may move energy later but not earlier.
        assert!(cumulative_feasible(&[0.0, 2.0], &p, 1e-9).unwrap());
        assert!(cumulative_feasible(&[1.0], &p, 1e-9).is_err());
    }

    #[test]
    fn scenario_check_reports_violations() {
        let link = natural_link();
        let s = Scenario::SingleUser {
            tx: EnergyProfile::new(vec![1.0, 2.0]).unwrap(),
            rx: EnergyProfile::new(vec![1.0]).unwrap(),
            rx_has_battery: true,
            link,
        };
        assert_eq!(check_scenario(&s).len(), 1);

        let bc = Scenario::Bc {
            tx: EnergyProfile::new(vec![1.0]).unwrap(),
            rx1: EnergyProfile::new(vec![1.0]).unwrap(),
            rx2: EnergyProfile::new(vec![1.0]).unwrap(),
            sigma2: 0.5,
            link: LinkModel::new(
                RateFunction::new(LogBase::Base2),
                DecodingFunction::Exponential {
                    c: 1.0,
                    d: 2.0,
                    e: -1.0,
                },
            )
            .unwrap(),
        };
        let violations = check_scenario(&bc);
        assert_eq!(violations.len(), 1);
        assert!(violations[0].contains("sigma2"));
    }
}
