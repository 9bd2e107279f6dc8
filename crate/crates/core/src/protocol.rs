//! Entanglement generation between the chain ends by local rotation.
//!
//! The chain starts in its ground state. The same rotation `R(θ, φ)` is applied
//! to sites 1 and N, the chain evolves freely, and at readout sites 2 and N-1
//! are measured in the computational basis. The figure of merit is the
//! concurrence of sites (1, N) conditioned on the chosen measurement outcome.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::engine::{global_cache, BlockedSpectrum, DegeneracyPolicy, GroundState, SpectrumCache, Trajectory};
use crate::error::{Error, Result};
use crate::hamiltonian::ChainSpec;
use crate::numerics::{
    c, hermitian_eig, kron, partial_trace, pauli, site_mask, ComplexMatrix, DensityMatrix, HermitianOperator,
    PureState, C64,
};
use crate::scan::{maximize, ScanWindow};

/// Branches below this weight cannot be post-selected.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-12;

const UNITARY_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-9;
const WEIGHT_CUTOFF: f64 = 1e-13;
const ANGLE_SLACK: f64 = 1e-9;

/// Encoding angles of the rotation gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationAngles {
    pub theta: f64,
    pub phi: f64,
}

impl RotationAngles {
    /// `θ ∈ [0, π]`, `φ ∈ [0, 2π)`. Values within 1e-9 outside the range are clamped.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        use std::f64::consts::{PI, TAU};
        if !(theta.is_finite() && phi.is_finite()) {
            return Err(Error::Argument("rotation angles must be finite".into()));
        }
        if !(-ANGLE_SLACK..=PI + ANGLE_SLACK).contains(&theta) {
            return Err(Error::Argument(format!("theta = {theta} outside [0, π]")));
        }
        if !(-ANGLE_SLACK..TAU).contains(&phi) {
            return Err(Error::Argument(format!("phi = {phi} outside [0, 2π)")));
        }
        Ok(RotationAngles {
            theta: theta.clamp(0.0, PI),
            phi: phi.max(0.0),
        })
    }
}

/// Computational-basis outcome on sites (2, N-1); `P01` means site 2 in `|0⟩`, site N-1 in `|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeasurementOutcome {
    P00,
    P01,
    P10,
    P11,
}

impl MeasurementOutcome {
    pub const ALL: [MeasurementOutcome; 4] = [Self::P00, Self::P01, Self::P10, Self::P11];

    /// Bit values required on (site 2, site N-1).
    pub fn bits(self) -> (bool, bool) {
        match self {
            Self::P00 => (false, false),
            Self::P01 => (false, true),
            Self::P10 => (true, false),
            Self::P11 => (true, true),
        }
    }

    /// Whether basis index `index` of an `n_sites` register lies in this branch.
    pub fn accepts(self, index: usize, n_sites: usize) -> bool {
        let (b2, bn) = self.bits();
        (index & site_mask(2, n_sites) != 0) == b2 && (index & site_mask(n_sites - 1, n_sites) != 0) == bn
    }
}

impl fmt::Display for MeasurementOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::P00 => "P00",
            Self::P01 => "P01",
            Self::P10 => "P10",
            Self::P11 => "P11",
        };
        f.write_str(s)
    }
}

impl FromStr for MeasurementOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P00" => Ok(Self::P00),
            "P01" => Ok(Self::P01),
            "P10" => Ok(Self::P10),
            "P11" => Ok(Self::P11),
            other => Err(Error::Argument(format!("unknown measurement outcome {other:?}"))),
        }
    }
}

/// How the end pair is read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    /// Post-select on a measurement of sites 2 and N-1.
    Projected(MeasurementOutcome),
    /// Take the end-pair state without measuring.
    Unmeasured,
}

impl Readout {
    fn accepts(self, index: usize, n_sites: usize) -> bool {
        match self {
            Readout::Projected(o) => o.accepts(index, n_sites),
            Readout::Unmeasured => true,
        }
    }
}

impl From<MeasurementOutcome> for Readout {
    fn from(o: MeasurementOutcome) -> Self {
        Readout::Projected(o)
    }
}

/// Fitted Werner parameter and the trace distance to the fitted state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerFit {
    pub p: f64,
    pub residual: f64,
}

/// Summary of one protocol run at its optimal readout time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub spec: ChainSpec,
    pub angles: RotationAngles,
    pub outcome: MeasurementOutcome,
    pub t_star: f64,
    pub outcome_probability: f64,
    pub concurrence: f64,
    /// Werner fit of the ground state's first two sites.
    pub werner_p: f64,
    pub werner_residual: f64,
}

/// Readout quantities at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub probability: f64,
    pub concurrence: f64,
}

/// Optimal readout time and the values there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TStar {
    pub t_star: f64,
    pub concurrence: f64,
    pub probability: f64,
}

/// `R(θ, φ) = [[cos(θ/2), -e^{-iφ} sin(θ/2)], [e^{iφ} sin(θ/2), cos(θ/2)]]`.
pub fn rotation_gate(a: RotationAngles) -> ComplexMatrix {
    let (s, co) = (0.5 * a.theta).sin_cos();
    let entries = [
        c(co, 0.0),
        -C64::from_polar(s, -a.phi),
        C64::from_polar(s, a.phi),
        c(co, 0.0),
    ];
    ComplexMatrix::from_row_slice(2, 2, &entries).expect("finite 2x2")
}

fn check_unitary(gate: &ComplexMatrix) -> Result<()> {
    if gate.rows() != 2 || gate.cols() != 2 {
        return Err(Error::Contract("single-site gate must be 2x2".into()));
    }
    let defect = gate.adjoint().matmul(gate)?.max_abs_diff(&ComplexMatrix::identity(2));
    if defect > UNITARY_TOL {
        return Err(Error::Contract(format!("gate is not unitary (defect {defect:e})")));
    }
    Ok(())
}

/// Applies a single-site gate to `site` (1-based).
pub fn apply_local(gate: &ComplexMatrix, site: usize, psi: &PureState) -> Result<PureState> {
    check_unitary(gate)?;
    let n = psi.n_sites();
    if site == 0 || site > n {
        return Err(Error::Argument(format!("site {site} out of range 1..={n}")));
    }
    let mask = site_mask(site, n);
    let g = gate.as_matrix();
    let a = psi.amplitudes();
    let mut out = a.clone();
    for i0 in (0..a.len()).filter(|i| i & mask == 0) {
        let i1 = i0 | mask;
        out[i0] = g[(0, 0)] * a[i0] + g[(0, 1)] * a[i1];
        out[i1] = g[(1, 0)] * a[i0] + g[(1, 1)] * a[i1];
    }
    PureState::normalized(n, out)
}

/// `R_1 R_N |gs⟩` with the same angles on both ends.
pub fn encode(gs: &PureState, a: RotationAngles, n_sites: usize) -> Result<PureState> {
    encode_ends(gs, a, a, n_sites)
}

/// Encoding with independent angles on site 1 and site N.
pub fn encode_ends(gs: &PureState, first: RotationAngles, last: RotationAngles, n_sites: usize) -> Result<PureState> {
    if gs.n_sites() != n_sites {
        return Err(Error::Contract(format!(
            "state has {} sites, expected {n_sites}",
            gs.n_sites()
        )));
    }
    let once = apply_local(&rotation_gate(first), 1, gs)?;
    apply_local(&rotation_gate(last), n_sites, &once)
}

/// Probability of `outcome` on sites (2, N-1) and the normalized post-measurement state.
pub fn project_sites(psi: &PureState, outcome: MeasurementOutcome, n_sites: usize) -> Result<(f64, PureState)> {
    if n_sites < 4 || psi.n_sites() != n_sites {
        return Err(Error::Argument(format!(
            "projection needs a register of at least 4 sites matching n_sites = {n_sites}"
        )));
    }
    let mut amps = psi.amplitudes().clone();
    for (i, z) in amps.iter_mut().enumerate() {
        if !outcome.accepts(i, n_sites) {
            *z = C64::default();
        }
    }
    let prob = amps.norm_squared();
    if prob < MIN_BRANCH_PROBABILITY {
        return Err(Error::ZeroProbability(prob));
    }
    Ok((prob, PureState::normalized(n_sites, amps)?))
}

/// Reduced state of sites (1, N), site 1 as the most significant bit.
pub fn end_pair_density(psi: &PureState) -> Result<DensityMatrix> {
    let n = psi.n_sites();
    if n < 2 {
        return Err(Error::Argument("end pair needs at least 2 sites".into()));
    }
    partial_trace(psi, &[1, n])
}

fn sigma_yy() -> ComplexMatrix {
    kron(&pauli::y(), &pauli::y()).expect("4x4")
}

fn hermitian_part(m: DMatrix<C64>) -> Result<HermitianOperator> {
    let sym = (&m + m.adjoint()) * c(0.5, 0.0);
    HermitianOperator::new(ComplexMatrix::new(sym)?)
}

/// Two-qubit concurrence.
///
/// With `ρ = W W†` from the eigendecomposition (weights below `1e-13` dropped),
/// the `λ_i` are the singular values of `Wᵀ (σ^y⊗σ^y) W`, equivalently the square
/// roots of the eigenvalues of `√ρ ρ̃ √ρ`; `C = max(0, λ1 − λ2 − λ3 − λ4)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::Contract(format!(
            "concurrence needs a 4x4 density matrix, got {}",
            rho.dim()
        )));
    }
    let m = rho.matrix().as_matrix();
    let spec = hermitian_eig(&hermitian_part(m.clone())?)?;
    if spec.eigenvalues()[0] < -PSD_TOL {
        return Err(Error::Contract(format!(
            "density matrix is not positive semidefinite (min eigenvalue {:e})",
            spec.eigenvalues()[0]
        )));
    }
    let v = spec.eigenvectors().as_matrix();
    let kept: Vec<usize> = (0..4).filter(|&k| spec.eigenvalues()[k] > WEIGHT_CUTOFF).collect();
    let mut w = v.select_columns(kept.iter());
    for (col, &k) in kept.iter().enumerate() {
        w.column_mut(col).scale_mut(spec.eigenvalues()[k].sqrt());
    }
    let tau = w.transpose() * sigma_yy().as_matrix() * &w;
    let mut lambdas: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambdas.resize(4, 0.0);
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
}

/// Werner state `p|ψ−⟩⟨ψ−| + (1−p) I/4`.
pub fn werner_state(p: f64) -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = PureState::new(
        2,
        nalgebra::DVector::from_vec(vec![c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)]),
    )
    .expect("singlet is normalized");
    let singlet = DensityMatrix::from_pure(&psi);
    let m = singlet.matrix().as_matrix() * c(p, 0.0) + DMatrix::identity(4, 4) * c((1.0 - p) / 4.0, 0.0);
    DensityMatrix::from_parts_unchecked(2, ComplexMatrix::new(m).expect("finite"))
}

/// Werner parameter from singlet fidelity, `p = (4F − 1)/3`, and the trace
/// distance between `rho` and the fitted Werner state.
pub fn werner_fit(rho: &DensityMatrix) -> Result<WernerFit> {
    if rho.dim() != 4 {
        return Err(Error::Contract("Werner fit needs a 4x4 density matrix".into()));
    }
    let fidelity = 0.5 * (rho.get(1, 1) + rho.get(2, 2) - rho.get(1, 2) - rho.get(2, 1)).re;
    let p = (4.0 * fidelity - 1.0) / 3.0;
    let diff = rho.matrix().as_matrix() - werner_state(p).matrix().as_matrix();
    let residual = 0.5
        * hermitian_eig(&hermitian_part(diff)?)?
            .eigenvalues()
            .iter()
            .map(|x| x.abs())
            .sum::<f64>();
    Ok(WernerFit { p, residual })
}

/// A chain with its ground state prepared, ready to run the protocol.
#[derive(Debug, Clone)]
pub struct Protocol {
    spec: ChainSpec,
    spectrum: Arc<BlockedSpectrum>,
    ground: GroundState,
}

impl Protocol {
    /// Uses the process-wide spectrum cache and rejects degenerate ground states.
    pub fn new(spec: &ChainSpec) -> Result<Self> {
        Self::with_cache(spec, DegeneracyPolicy::Strict, global_cache())
    }

    pub fn with_cache(spec: &ChainSpec, policy: DegeneracyPolicy, cache: &SpectrumCache) -> Result<Self> {
        spec.validate()?;
        let spectrum = cache.get(spec)?;
        let ground = spectrum.ground_state(policy)?;
        Ok(Protocol {
            spec: *spec,
            spectrum,
            ground,
        })
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn ground_state(&self) -> &GroundState {
        &self.ground
    }

    pub fn spectrum(&self) -> &BlockedSpectrum {
        &self.spectrum
    }

    /// Werner fit of the ground state's sites (1, 2).
    pub fn ground_werner_fit(&self) -> Result<WernerFit> {
        werner_fit(&partial_trace(&self.ground.state, &[1, 2])?)
    }

    /// Encodes the ground state and expands it in the eigenbasis, keeping only
    /// the amplitudes the readout needs.
    pub fn prepare(&self, angles: RotationAngles, readout: Readout) -> Result<PreparedRun> {
        self.prepare_ends(angles, angles, readout)
    }

    pub fn prepare_ends(&self, first: RotationAngles, last: RotationAngles, readout: Readout) -> Result<PreparedRun> {
        let n = self.spec.n_sites;
        if matches!(readout, Readout::Projected(_)) {
            self.spec.validate_for_protocol()?;
        }
        let psi0 = encode_ends(&self.ground.state, first, last, n)?;
        let trajectory = Trajectory::restricted(&self.spectrum, &psi0, |i| readout.accepts(i, n))?;
        Ok(PreparedRun { readout, trajectory })
    }

    /// Optimal readout and full result record for one outcome.
    pub fn run(
        &self,
        angles: RotationAngles,
        outcome: MeasurementOutcome,
        window: ScanWindow,
    ) -> Result<ProtocolResult> {
        let best = self.prepare(angles, outcome.into())?.find_tstar(window)?;
        let fit = self.ground_werner_fit()?;
        Ok(ProtocolResult {
            spec: self.spec,
            angles,
            outcome,
            t_star: best.t_star,
            outcome_probability: best.probability,
            concurrence: best.concurrence,
            werner_p: fit.p,
            werner_residual: fit.residual,
        })
    }
}

/// An encoded state with its readout branch, evaluable at any time.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    readout: Readout,
    trajectory: Trajectory,
}

impl PreparedRun {
    pub fn readout(&self) -> Readout {
        self.readout
    }

    /// Branch probability and conditioned end-pair concurrence at time `t`.
    pub fn evaluate(&self, t: f64) -> Result<Evaluation> {
        let n = self.trajectory.n_sites();
        let amps = self.trajectory.amplitudes_at(t);
        let probability = amps.norm_squared();
        if probability < MIN_BRANCH_PROBABILITY {
            return Err(Error::ZeroProbability(probability));
        }
        let post = PureState::normalized(n, amps)?;
        let concurrence = concurrence(&end_pair_density(&post)?)?;
        let probability = match self.readout {
            Readout::Projected(_) => probability,
            Readout::Unmeasured => 1.0,
        };
        Ok(Evaluation {
            probability,
            concurrence,
        })
    }

    /// Scan-and-refine search for the time maximizing the conditioned concurrence.
    pub fn find_tstar(&self, window: ScanWindow) -> Result<TStar> {
        let peak = maximize(window, |t| {
            self.evaluate(t).ok().map(|e| (e.concurrence, e.probability))
        });
        match peak {
            Some(p) => Ok(TStar {
                t_star: p.t,
                concurrence: p.value,
                probability: p.payload,
            }),
            None => Err(Error::ProtocolFailure(
                "every time point in the scan has a zero-probability readout branch".into(),
            )),
        }
    }
}

/// Default scan window: `t_max = 4N/J`, `dt = 0.02/J`.
pub fn default_window(spec: &ChainSpec) -> ScanWindow {
    ScanWindow::new(4.0 * spec.n_sites as f64 / spec.j_coupling, 0.02 / spec.j_coupling).expect("positive")
}

/// Ground state → encode → evolve to `t` → readout → concurrence.
pub fn run_at_time(spec: &ChainSpec, angles: RotationAngles, readout: Readout, t: f64) -> Result<Evaluation> {
    Protocol::new(spec)?.prepare(angles, readout)?.evaluate(t)
}

/// Optimal readout time for the given angles and readout.
pub fn find_tstar(spec: &ChainSpec, angles: RotationAngles, readout: Readout, t_max: f64, dt: f64) -> Result<TStar> {
    Protocol::new(spec)?
        .prepare(angles, readout)?
        .find_tstar(ScanWindow::new(t_max, dt)?)
}
