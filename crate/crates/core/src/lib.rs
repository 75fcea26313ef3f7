//! Offline throughput optimization for energy-harvesting transmitters whose
//! receivers spend harvested energy on decoding.
//!
//! Every solver works on a finite horizon of unit-length slots. Energy
//! arrives at the start of each slot and may be stored, so each cumulative
//! prefix of spending is bounded by the matching prefix of arrivals. The
//! decoding side is the unusual part: receiving at rate `r` costs the
//! receiver `phi(r)` units of energy per slot, with `phi` convex and
//! increasing, which couples the transmitter's schedule to the receiver's
//! harvesting process.
//!
//! Topologies covered: point-to-point links ([`single_user`]), decode-and-
//! forward relays ([`two_hop`]), two-transmitter multiple access ([`mac`]),
//! and two-receiver broadcast ([`bc`]). [`oracle`] holds small brute-force
//! references used to validate the solvers, and [`verify`] bundles the
//! randomized property suites behind the CLI's `verify` command.

pub mod bc;
pub mod error;
pub mod gp;
pub mod mac;
pub mod model;
pub mod oracle;
pub mod single_user;
pub mod two_hop;
pub mod verify;
pub mod waterfill;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
