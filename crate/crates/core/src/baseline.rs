//! Comparison scheme: a maximally entangled pair attached to one end of the chain.
//!
//! Layout of the extended register (1-based positions):
//! position 1 is the free ancilla `0'`, position 2 the coupled ancilla `0`,
//! positions `3..=N+2` the chain sites `1..=N`. The ancilla pair starts in the
//! singlet, the chain in its ground state, and at `t = 0` ancilla `0` is coupled
//! to chain site 1 with the chain's own interaction form. The figure of merit
//! is the concurrence between `0'` and chain site `N`.

use crate::engine::{global_cache, BlockedSpectrum, DegeneracyPolicy, SpectrumCache, Trajectory};
use crate::error::{Error, Result};
use crate::hamiltonian::{Bond, BondHamiltonian, ChainSpec, MAX_DENSE_SITES};
use crate::numerics::{c, partial_trace, PureState};
use crate::protocol::concurrence;
use crate::scan::{maximize, ScanWindow};

use nalgebra::DVector;
use std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttachedSystemSpec {
    pub chain: ChainSpec,
    pub attach_coupling: f64,
    /// Replace the chain by its undimerized counterpart (`δ = 0`).
    pub uniform_chain: bool,
}

impl AttachedSystemSpec {
    /// Dimerized chain, attached with the strong-bond strength `J(1+δ)`.
    pub fn new(chain: ChainSpec) -> Self {
        AttachedSystemSpec {
            chain,
            attach_coupling: chain.j_coupling * (1.0 + chain.delta),
            uniform_chain: false,
        }
    }

    /// Uniform chain with the same `J` and anisotropy, attached with strength `J`.
    pub fn uniform(chain: ChainSpec) -> Self {
        AttachedSystemSpec {
            chain,
            attach_coupling: chain.j_coupling,
            uniform_chain: true,
        }
    }

    pub fn with_attach_coupling(mut self, g: f64) -> Self {
        self.attach_coupling = g;
        self
    }

    /// The chain actually simulated.
    pub fn effective_chain(&self) -> ChainSpec {
        let mut chain = self.chain;
        if self.uniform_chain {
            chain.delta = 0.0;
        }
        chain
    }

    pub fn n_total(&self) -> usize {
        self.chain.n_sites + 2
    }

    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        if !(self.attach_coupling.is_finite() && self.attach_coupling >= 0.0) {
            return Err(Error::Argument(format!(
                "attach coupling must be non-negative, got {}",
                self.attach_coupling
            )));
        }
        if self.n_total() > MAX_DENSE_SITES {
            return Err(Error::Capacity {
                what: "sites (chain plus ancilla pair)",
                requested: self.n_total(),
                limit: MAX_DENSE_SITES,
            });
        }
        Ok(())
    }
}

/// Extended Hamiltonian and initial state `|ψ−⟩ ⊗ |GS⟩`.
#[derive(Debug, Clone)]
pub struct AttachedSystem {
    pub hamiltonian: BondHamiltonian,
    pub initial: PureState,
}

pub fn build_attached(spec: &AttachedSystemSpec, policy: DegeneracyPolicy) -> Result<AttachedSystem> {
    build_attached_with(spec, policy, global_cache())
}

pub fn build_attached_with(
    spec: &AttachedSystemSpec,
    policy: DegeneracyPolicy,
    cache: &SpectrumCache,
) -> Result<AttachedSystem> {
    spec.validate()?;
    let chain = spec.effective_chain();
    let ground = cache.get(&chain)?.ground_state(policy)?;

    let chain_h = BondHamiltonian::from_spec(&chain)?;
    let mut bonds: Vec<Bond> = chain_h
        .bonds()
        .iter()
        .map(|b| Bond {
            left: b.left + 2,
            right: b.right + 2,
            strength: b.strength,
        })
        .collect();
    bonds.insert(
        0,
        Bond {
            left: 2,
            right: 3,
            strength: spec.attach_coupling,
        },
    );
    let hamiltonian = BondHamiltonian::new(spec.n_total(), bonds, chain_h.anisotropy())?;
    let initial = singlet().tensor(&ground.state)?;
    Ok(AttachedSystem { hamiltonian, initial })
}

fn singlet() -> PureState {
    let s = FRAC_1_SQRT_2;
    let amps = DVector::from_vec(vec![c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)]);
    PureState::new(2, amps).expect("normalized")
}

/// Time-evolvable attached system.
#[derive(Debug, Clone)]
pub struct AttachedRun {
    n_total: usize,
    trajectory: Trajectory,
}

impl AttachedRun {
    pub fn new(spec: &AttachedSystemSpec, policy: DegeneracyPolicy) -> Result<Self> {
        let sys = build_attached(spec, policy)?;
        let spectrum = BlockedSpectrum::from_bonds(&sys.hamiltonian)?;
        Ok(AttachedRun {
            n_total: spec.n_total(),
            trajectory: spectrum.trajectory(&sys.initial)?,
        })
    }

    pub fn state_at(&self, t: f64) -> PureState {
        self.trajectory.state_at(t)
    }

    /// Concurrence between two positions of the extended register at time `t`.
    pub fn pair_concurrence(&self, t: f64, a: usize, b: usize) -> Result<f64> {
        concurrence(&partial_trace(&self.state_at(t), &[a, b])?)
    }

    /// Concurrence between the free ancilla and the far chain end.
    pub fn end_concurrence(&self, t: f64) -> Result<f64> {
        self.pair_concurrence(t, 1, self.n_total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttachingResult {
    pub t_star: f64,
    pub concurrence: f64,
}

/// Best end-to-end concurrence of the attaching scheme over the window.
pub fn run_attaching(
    spec: &AttachedSystemSpec,
    policy: DegeneracyPolicy,
    window: ScanWindow,
) -> Result<AttachingResult> {
    let run = AttachedRun::new(spec, policy)?;
    let peak = maximize(window, |t| run.end_concurrence(t).ok().map(|v| (v, ())))
        .ok_or_else(|| Error::ProtocolFailure("concurrence undefined over the whole window".into()))?;
    Ok(AttachingResult {
        t_star: peak.t,
        concurrence: peak.value,
    })
}
