//! Ground states and time evolution using the block structure of conserved `Σσ^z`.
//!
//! Both chain models are real in the computational basis, so every magnetization
//! sector is a real symmetric block.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{sector_indices, sector_values, sz_of, BondHamiltonian, ChainSpec, Model};
use crate::numerics::{c, fix_sign, real_symmetric_eig, HermitianOperator, PureState, C64};

const COMMUTATOR_TOL: f64 = 1e-10;
const DEGENERACY_RTOL: f64 = 1e-10;

/// One diagonalized magnetization sector.
#[derive(Debug, Clone)]
pub struct Sector {
    pub sz: i64,
    /// Ascending global basis indices spanning the sector.
    pub basis: Vec<usize>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors in the sector basis.
    pub eigenvectors: DMatrix<f64>,
}

/// Per-sector spectra of an `S_z`-conserving Hamiltonian.
#[derive(Debug, Clone)]
pub struct BlockedSpectrum {
    n_sites: usize,
    sectors: Vec<Sector>,
}

impl BlockedSpectrum {
    /// Diagonalizes each sector of `h` independently.
    pub fn from_bonds(h: &BondHamiltonian) -> Result<Self> {
        let n = h.n_sites();
        let sectors = sector_values(n)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|sz| {
                let basis = sector_indices(n, sz)?;
                let (eigenvalues, eigenvectors) = real_symmetric_eig(h.block(&basis))?;
                Ok(Sector {
                    sz,
                    basis,
                    eigenvalues,
                    eigenvectors,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockedSpectrum { n_sites: n, sectors })
    }

    pub fn from_spec(spec: &ChainSpec) -> Result<Self> {
        Self::from_bonds(&BondHamiltonian::from_spec(spec)?)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn sector(&self, sz: i64) -> Option<&Sector> {
        self.sectors.iter().find(|s| s.sz == sz)
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .sectors
            .iter()
            .flat_map(|s| s.eigenvalues.iter().copied())
            .collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// Lowest-energy eigenstate, embedded in the full basis.
    pub fn ground_state(&self, policy: DegeneracyPolicy) -> Result<GroundState> {
        let mut levels: Vec<(f64, usize, usize)> = self
            .sectors
            .iter()
            .enumerate()
            .flat_map(|(si, s)| s.eigenvalues.iter().take(2).enumerate().map(move |(k, &e)| (e, si, k)))
            .collect();
        levels.sort_by(|a, b| a.0.total_cmp(&b.0));
        let e0 = levels[0].0;
        let tol = DEGENERACY_RTOL * e0.abs().max(1.0);
        let (_, si, k) = match levels.get(1) {
            Some(&(e1, ..)) if e1 - e0 < tol => match policy {
                DegeneracyPolicy::Strict => return Err(Error::DegenerateGroundState { e0, e1 }),
                DegeneracyPolicy::HighestMagnetization => *levels
                    .iter()
                    .filter(|l| l.0 - e0 < tol)
                    .min_by_key(|l| (-self.sectors[l.1].sz, l.2))
                    .expect("non-empty"),
                DegeneracyPolicy::LowestMagnetization => *levels
                    .iter()
                    .filter(|l| l.0 - e0 < tol)
                    .min_by_key(|l| (self.sectors[l.1].sz, l.2))
                    .expect("non-empty"),
            },
            _ => levels[0],
        };
        let sector = &self.sectors[si];
        let mut col: Vec<f64> = sector.eigenvectors.column(k).iter().copied().collect();
        fix_sign(&mut col);
        let mut amps = DVector::zeros(1 << self.n_sites);
        for (&idx, &x) in sector.basis.iter().zip(&col) {
            amps[idx] = c(x, 0.0);
        }
        Ok(GroundState {
            energy: sector.eigenvalues[k],
            state: PureState::normalized(self.n_sites, amps)?,
            sector_sz: sector.sz,
        })
    }

    /// Spectral decomposition of `psi0`, ready for repeated evaluation at many times.
    pub fn trajectory(&self, psi0: &PureState) -> Result<Trajectory> {
        Trajectory::restricted(self, psi0, |_| true)
    }
}

/// What to do when the two lowest levels coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegeneracyPolicy {
    /// Report [`Error::DegenerateGroundState`].
    #[default]
    Strict,
    /// Pick the degenerate state in the largest `Σσ^z` sector (lowest level index within it).
    HighestMagnetization,
    /// Pick the degenerate state in the smallest `Σσ^z` sector (lowest level index within it).
    LowestMagnetization,
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: PureState,
    pub sector_sz: i64,
}

/// Block-diagonalizes a dense operator that commutes with `Σσ^z`.
///
/// The operator must be real in the computational basis.
pub fn blocked_eig(h: &HermitianOperator, n_sites: usize) -> Result<BlockedSpectrum> {
    let dim = 1usize << n_sites;
    if h.dim() != dim {
        return Err(Error::Contract(format!(
            "operator dimension {} does not match 2^{n_sites}",
            h.dim()
        )));
    }
    let m = h.matrix().as_matrix();
    let mut leak = 0.0f64;
    for j in 0..dim {
        for i in 0..dim {
            if sz_of(i, n_sites) != sz_of(j, n_sites) {
                // [H, S_z]_{ij} = H_ij (sz_j - sz_i)
                let gap = (sz_of(j, n_sites) - sz_of(i, n_sites)).abs() as f64;
                leak = leak.max(m[(i, j)].norm() * gap);
            }
        }
    }
    if leak > COMMUTATOR_TOL {
        return Err(Error::SymmetryViolation(leak));
    }
    if !h.matrix().is_real() {
        return Err(Error::Contract("blocked_eig expects a real operator".into()));
    }
    let sectors = sector_values(n_sites)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|sz| {
            let basis = sector_indices(n_sites, sz)?;
            let d = basis.len();
            let block = DMatrix::from_fn(d, d, |a, b| m[(basis[a], basis[b])].re);
            let (eigenvalues, eigenvectors) = real_symmetric_eig(block)?;
            Ok(Sector {
                sz,
                basis,
                eigenvalues,
                eigenvectors,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockedSpectrum { n_sites, sectors })
}

/// Thread-safe memo of blocked spectra keyed by chain parameters.
#[derive(Debug, Default)]
pub struct SpectrumCache {
    entries: Mutex<HashMap<SpecKey, Arc<BlockedSpectrum>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct SpecKey(Model, usize, u64, u64, u64);

impl From<&ChainSpec> for SpecKey {
    fn from(s: &ChainSpec) -> Self {
        SpecKey(
            s.model,
            s.n_sites,
            s.j_coupling.to_bits(),
            s.delta.to_bits(),
            s.effective_anisotropy().to_bits(),
        )
    }
}

impl SpectrumCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the cached spectrum, diagonalizing on first use. Concurrent misses
    /// may both compute; the first insert wins and both see the same value.
    pub fn get(&self, spec: &ChainSpec) -> Result<Arc<BlockedSpectrum>> {
        let key = SpecKey::from(spec);
        if let Some(hit) = self.entries.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let fresh = Arc::new(BlockedSpectrum::from_spec(spec)?);
        let mut map = self.entries.lock().expect("cache lock");
        Ok(Arc::clone(map.entry(key).or_insert(fresh)))
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Process-wide cache used by the free functions in this module.
pub fn global_cache() -> &'static SpectrumCache {
    static CACHE: OnceLock<SpectrumCache> = OnceLock::new();
    CACHE.get_or_init(SpectrumCache::new)
}

/// Unique ground state of the chain (errors on degeneracy).
pub fn ground_state(spec: &ChainSpec) -> Result<GroundState> {
    ground_state_with(spec, DegeneracyPolicy::Strict)
}

pub fn ground_state_with(spec: &ChainSpec, policy: DegeneracyPolicy) -> Result<GroundState> {
    global_cache().get(spec)?.ground_state(policy)
}

/// `e^{-iHt} ψ0`, computed sector by sector.
pub fn evolve(spec: &ChainSpec, psi0: &PureState, t: f64) -> Result<PureState> {
    if psi0.n_sites() != spec.n_sites {
        return Err(Error::Contract(format!(
            "state has {} sites, chain has {}",
            psi0.n_sites(),
            spec.n_sites
        )));
    }
    Ok(global_cache().get(spec)?.trajectory(psi0)?.state_at(t))
}

#[derive(Debug, Clone)]
struct TrajectoryBlock {
    /// Global indices of the retained rows.
    rows: Vec<usize>,
    /// Eigenvector rows restricted to `rows`.
    vectors: DMatrix<f64>,
    energies: Vec<f64>,
    /// Expansion coefficients of the initial state, real and imaginary parts.
    coeff_re: DVector<f64>,
    coeff_im: DVector<f64>,
}

/// An initial state expanded in the eigenbasis, for evaluation at arbitrary times.
///
/// A restricted trajectory only reconstructs amplitudes on selected basis rows;
/// the remaining amplitudes read as zero.
#[derive(Debug, Clone)]
pub struct Trajectory {
    n_sites: usize,
    blocks: Vec<TrajectoryBlock>,
}

impl Trajectory {
    pub fn restricted(spectrum: &BlockedSpectrum, psi0: &PureState, keep_row: impl Fn(usize) -> bool) -> Result<Self> {
        if psi0.n_sites() != spectrum.n_sites {
            return Err(Error::Contract(format!(
                "state has {} sites, spectrum has {}",
                psi0.n_sites(),
                spectrum.n_sites
            )));
        }
        let amps = psi0.amplitudes();
        let mut blocks = Vec::new();
        for sector in &spectrum.sectors {
            let local_re = DVector::from_iterator(sector.basis.len(), sector.basis.iter().map(|&i| amps[i].re));
            let local_im = DVector::from_iterator(sector.basis.len(), sector.basis.iter().map(|&i| amps[i].im));
            if local_re.iter().chain(local_im.iter()).all(|&x| x == 0.0) {
                continue;
            }
            let coeff_re = sector.eigenvectors.tr_mul(&local_re);
            let coeff_im = sector.eigenvectors.tr_mul(&local_im);
            let kept: Vec<usize> = (0..sector.basis.len()).filter(|&a| keep_row(sector.basis[a])).collect();
            if kept.is_empty() {
                continue;
            }
            let vectors = sector.eigenvectors.select_rows(kept.iter());
            blocks.push(TrajectoryBlock {
                rows: kept.iter().map(|&a| sector.basis[a]).collect(),
                vectors,
                energies: sector.eigenvalues.clone(),
                coeff_re,
                coeff_im,
            });
        }
        Ok(Trajectory {
            n_sites: spectrum.n_sites,
            blocks,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Writes the amplitudes at time `t` into `out` (length `2^n`).
    pub fn amplitudes_into(&self, t: f64, out: &mut DVector<C64>) {
        out.fill(C64::default());
        for b in &self.blocks {
            let d = b.energies.len();
            let mut pr = DVector::zeros(d);
            let mut pi = DVector::zeros(d);
            for k in 0..d {
                let (s, co) = (b.energies[k] * t).sin_cos();
                // (cr + i ci)(cos - i sin)
                pr[k] = b.coeff_re[k] * co + b.coeff_im[k] * s;
                pi[k] = b.coeff_im[k] * co - b.coeff_re[k] * s;
            }
            let re = &b.vectors * pr;
            let im = &b.vectors * pi;
            for (a, &row) in b.rows.iter().enumerate() {
                out[row] = c(re[a], im[a]);
            }
        }
    }

    pub fn amplitudes_at(&self, t: f64) -> DVector<C64> {
        let mut out = DVector::zeros(1 << self.n_sites);
        self.amplitudes_into(t, &mut out);
        out
    }

    /// Full state at time `t`. For a restricted trajectory this is the
    /// unnormalized projection onto the retained rows.
    pub fn state_at(&self, t: f64) -> PureState {
        PureState::from_parts_unchecked(self.n_sites, self.amplitudes_at(t))
    }
}
