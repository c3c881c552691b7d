//! Contextuality of Pauli-labelled finite geometries: the Mermin–Peres grid,
//! the doily GQ(2,2) and the eloily GQ(2,4).

pub mod contextuality;
pub mod dense;
pub mod games;
pub mod geometry;
pub mod invariant;
pub mod pauli;
pub mod qsim;
pub mod search;

pub use contextuality::{Assignment, ContextualityError, ViolationReport};
pub use games::{ClassicalStrategy, GameError, GameSpec, Probability, RefereeChoice, Responder};
pub use geometry::{Geometry, GeometryError, Line, PointId, SubgeometryKind};
pub use invariant::{HVMatrices, InvariantError};
pub use pauli::{Pauli, PauliError, PauliOperator, Phase, ProjectivePoint, Sign};
pub use qsim::{QsimError, QuantumResponder, StateVector};
pub use search::{GrayScan, SearchError};
