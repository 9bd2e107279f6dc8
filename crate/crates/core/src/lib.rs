//! Exact diagonalization of dimerized XX/XXZ spin chains and the local-rotation
//! protocol for generating entanglement between the chain ends.

pub mod baseline;
pub mod engine;
pub mod error;
pub mod freefermion;
pub mod hamiltonian;
pub mod numerics;
pub mod protocol;
pub mod roots;
pub mod scan;

pub use baseline::{run_attaching, AttachedSystemSpec, AttachingResult};
pub use engine::{BlockedSpectrum, DegeneracyPolicy, GroundState, SpectrumCache};
pub use error::{Error, Result};
pub use freefermion::{EvenFormulaReport, FermionSpectrum, HoppingChain};
pub use hamiltonian::{ChainSpec, Model};
pub use numerics::{DensityMatrix, HermitianOperator, PureState, C64};
pub use protocol::{MeasurementOutcome, Protocol, Readout, RotationAngles, TStar};
pub use scan::ScanWindow;
