//! Classical certification thresholds for quantum teleportation.
//!
//! The crate computes the best average score a measure-and-prepare (classical)
//! protocol can reach under eight qubit distinguishability measures, evaluates
//! the standard teleportation protocol over noisy two-qubit resources, and
//! reports where each measure certifies the protocol as quantum.
//!
//! ```
//! use telecert_core::{classical_threshold, Measure};
//!
//! let t = classical_threshold(Measure::Fidelity).unwrap();
//! assert!((t.threshold - 2.0 / 3.0).abs() < 1e-9);
//! ```

pub mod bloch;
pub mod certification;
pub mod channels;
pub mod eigen;
pub mod entanglement;
pub mod error;
pub mod measures;
pub mod mpp;
pub mod optimize;
pub mod par;
pub mod protocol;
pub mod quadrature;
pub mod sampling;

pub use bloch::{
    BellIndex, BlochVector, CorrelationMatrix, DensityMatrix4, Rotation, TwoQubitFano,
};
pub use certification::{
    certify, discrepancy_interval, sweep, transition_points, CertificationVerdict, StrategyRule,
    SweepRow, TransitionReport, Verdict,
};
pub use channels::{AffineChannel, ResourceFamily};
pub use entanglement::{negativity, negativity_closed_form, normalized_negativity};
pub use error::{Error, Result};
pub use measures::{Measure, Orientation};
pub use mpp::{
    classical_threshold, mpp_average, Povm, PovmElement, PreparationStrategy, ThresholdResult,
};
pub use par::Exec;
pub use protocol::{
    average_distance, avg_fidelity_closed, optimal_rotations_fidelity, simulate_protocol,
    werner_optimal_rotations, BobStrategy, ProtocolOutcome,
};
pub use sampling::Estimate;
