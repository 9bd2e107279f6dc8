//! Dimerized XX and XXZ chain Hamiltonians.
//!
//! Every bond `(a, b)` of strength `g` contributes
//! `(g/2) [σ^x_a σ^x_b + σ^y_a σ^y_b + Δ σ^z_a σ^z_b]`. For the chain, bond `j`
//! has strength `J (1 + (-1)^{j+1} δ)`, so odd bonds are strong and even bonds weak.
//! Boundaries are open.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{c, site_mask, ComplexMatrix, HermitianOperator};

/// Largest register the dense builders accept.
pub const MAX_DENSE_SITES: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    XX,
    XXZ,
}

/// Model family, size and couplings of one simulated chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    pub model: Model,
    pub n_sites: usize,
    /// Energy scale `J`.
    pub j_coupling: f64,
    /// Dimerization `δ`, in `[0, 1)`.
    pub delta: f64,
    /// Anisotropy `Δ`; ignored for [`Model::XX`].
    pub anisotropy: f64,
}

impl ChainSpec {
    pub fn new(model: Model, n_sites: usize, j_coupling: f64, delta: f64, anisotropy: f64) -> Result<Self> {
        let spec = ChainSpec {
            model,
            n_sites,
            j_coupling,
            delta,
            anisotropy,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn xx(n_sites: usize, j_coupling: f64, delta: f64) -> Result<Self> {
        Self::new(Model::XX, n_sites, j_coupling, delta, 0.0)
    }

    pub fn xxz(n_sites: usize, j_coupling: f64, delta: f64, anisotropy: f64) -> Result<Self> {
        Self::new(Model::XXZ, n_sites, j_coupling, delta, anisotropy)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 || !self.n_sites.is_multiple_of(2) {
            return Err(Error::Argument(format!(
                "chain length must be even and at least 2, got {}",
                self.n_sites
            )));
        }
        if !(self.j_coupling.is_finite() && self.j_coupling > 0.0) {
            return Err(Error::Argument(format!("J must be positive, got {}", self.j_coupling)));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::Argument(format!(
                "dimerization must lie in [0, 1), got {}",
                self.delta
            )));
        }
        if !self.anisotropy.is_finite() {
            return Err(Error::Argument("anisotropy must be finite".into()));
        }
        Ok(())
    }

    /// Additionally requires sites 1, 2, N-1, N to be distinct.
    pub fn validate_for_protocol(&self) -> Result<()> {
        self.validate()?;
        if self.n_sites < 4 {
            return Err(Error::Argument(format!(
                "protocol needs at least 4 sites, got {}",
                self.n_sites
            )));
        }
        Ok(())
    }

    /// `Δ` as it enters the Hamiltonian: zero for XX.
    pub fn effective_anisotropy(&self) -> f64 {
        match self.model {
            Model::XX => 0.0,
            Model::XXZ => self.anisotropy,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }
}

/// Dimerization factor `1 + (-1)^{j+1} δ` of bond `j` (1-based).
pub fn coupling_at(bond: usize, spec: &ChainSpec) -> Result<f64> {
    if bond == 0 || bond >= spec.n_sites {
        return Err(Error::Argument(format!(
            "bond index {bond} out of range 1..={}",
            spec.n_sites - 1
        )));
    }
    Ok(dimer_factor(bond, spec.delta))
}

fn dimer_factor(bond: usize, delta: f64) -> f64 {
    if bond % 2 == 1 {
        1.0 + delta
    } else {
        1.0 - delta
    }
}

/// One exchange bond between two sites (1-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub left: usize,
    pub right: usize,
    /// Energy of the bond, `J (1 ± δ)` for chain bonds.
    pub strength: f64,
}

/// An XXZ-type Hamiltonian on an arbitrary set of bonds sharing one anisotropy.
#[derive(Debug, Clone, PartialEq)]
pub struct BondHamiltonian {
    n_sites: usize,
    bonds: Vec<Bond>,
    anisotropy: f64,
}

impl BondHamiltonian {
    pub fn new(n_sites: usize, bonds: Vec<Bond>, anisotropy: f64) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_DENSE_SITES {
            return Err(Error::Capacity {
                what: "sites",
                requested: n_sites,
                limit: MAX_DENSE_SITES,
            });
        }
        for b in &bonds {
            if b.left == 0 || b.right == 0 || b.left > n_sites || b.right > n_sites || b.left == b.right {
                return Err(Error::Argument(format!(
                    "bond ({}, {}) invalid for {n_sites} sites",
                    b.left, b.right
                )));
            }
            if !b.strength.is_finite() {
                return Err(Error::Argument("bond strength must be finite".into()));
            }
        }
        Ok(BondHamiltonian {
            n_sites,
            bonds,
            anisotropy,
        })
    }

    /// Open dimerized chain described by `spec`.
    pub fn from_spec(spec: &ChainSpec) -> Result<Self> {
        spec.validate()?;
        let bonds = (1..spec.n_sites)
            .map(|j| Bond {
                left: j,
                right: j + 1,
                strength: spec.j_coupling * dimer_factor(j, spec.delta),
            })
            .collect();
        Self::new(spec.n_sites, bonds, spec.effective_anisotropy())
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn anisotropy(&self) -> f64 {
        self.anisotropy
    }

    /// Visits every nonzero `(row, col, value)` in column `col`, diagonal first.
    fn for_each_in_column(&self, col: usize, mut f: impl FnMut(usize, f64)) {
        let mut diag = 0.0;
        for b in &self.bonds {
            let ma = site_mask(b.left, self.n_sites);
            let mb = site_mask(b.right, self.n_sites);
            let aligned = (col & ma != 0) == (col & mb != 0);
            diag += 0.5 * b.strength * self.anisotropy * if aligned { 1.0 } else { -1.0 };
            if !aligned {
                f(col ^ ma ^ mb, b.strength);
            }
        }
        if diag != 0.0 {
            f(col, diag);
        }
    }

    /// Real matrix in the full `2^n` basis.
    pub fn dense_real(&self) -> DMatrix<f64> {
        let dim = 1usize << self.n_sites;
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            self.for_each_in_column(col, |row, v| m[(row, col)] += v);
        }
        m
    }

    pub fn dense(&self) -> HermitianOperator {
        let m = self.dense_real().map(|x| c(x, 0.0));
        HermitianOperator::new(ComplexMatrix::new(m).expect("finite entries")).expect("bond Hamiltonian is symmetric")
    }

    /// Restriction to the span of `basis` (ascending indices closed under the dynamics).
    pub fn block(&self, basis: &[usize]) -> DMatrix<f64> {
        let d = basis.len();
        let mut m = DMatrix::zeros(d, d);
        for (k, &col) in basis.iter().enumerate() {
            self.for_each_in_column(col, |row, v| {
                let r = basis.binary_search(&row).expect("bond terms conserve total S_z");
                m[(r, k)] += v;
            });
        }
        m
    }
}

/// Dimerized XX Hamiltonian `(J/2) Σ_j (1 + (-1)^{j+1} δ)(σ^x σ^x + σ^y σ^y)`.
pub fn build_xx(spec: &ChainSpec) -> Result<HermitianOperator> {
    if spec.model != Model::XX {
        return Err(Error::Argument("build_xx needs an XX chain spec".into()));
    }
    Ok(BondHamiltonian::from_spec(spec)?.dense())
}

/// Dimerized XXZ Hamiltonian; the dimerization factor multiplies the `σ^z σ^z` term too.
pub fn build_xxz(spec: &ChainSpec) -> Result<HermitianOperator> {
    if spec.model != Model::XXZ {
        return Err(Error::Argument("build_xxz needs an XXZ chain spec".into()));
    }
    Ok(BondHamiltonian::from_spec(spec)?.dense())
}

/// Dispatches on `spec.model`.
pub fn build(spec: &ChainSpec) -> Result<HermitianOperator> {
    match spec.model {
        Model::XX => build_xx(spec),
        Model::XXZ => build_xxz(spec),
    }
}

/// Eigenvalue of `Σ_j σ^z_j` on basis state `index`.
#[inline]
pub fn sz_of(index: usize, n_sites: usize) -> i64 {
    n_sites as i64 - 2 * i64::from(index.count_ones())
}

/// Diagonal operator `Σ_j σ^z_j`.
pub fn total_sz_operator(n_sites: usize) -> Result<HermitianOperator> {
    if n_sites == 0 || n_sites > MAX_DENSE_SITES {
        return Err(Error::Capacity {
            what: "sites",
            requested: n_sites,
            limit: MAX_DENSE_SITES,
        });
    }
    let diag: Vec<f64> = (0..1usize << n_sites).map(|i| sz_of(i, n_sites) as f64).collect();
    HermitianOperator::new(ComplexMatrix::from_diagonal(&diag))
}

/// Allowed `Σσ^z` values, ascending: `-N, -N+2, …, N`.
pub fn sector_values(n_sites: usize) -> impl Iterator<Item = i64> {
    let n = n_sites as i64;
    (0..=n).map(move |k| -n + 2 * k)
}

/// Ascending basis indices with total `Σσ^z = sz`.
pub fn sector_indices(n_sites: usize, sz: i64) -> Result<Vec<usize>> {
    let n = n_sites as i64;
    if n_sites == 0 || n_sites >= usize::BITS as usize || sz.abs() > n || (n - sz) % 2 != 0 {
        return Err(Error::Argument(format!(
            "sz = {sz} is not a valid sector for {n_sites} sites"
        )));
    }
    let downs = ((n - sz) / 2) as u32;
    Ok((0..1usize << n_sites).filter(|i| i.count_ones() == downs).collect())
}

/// Optical-lattice parameters of the two-species Hubbard model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    pub j_up: f64,
    pub j_down: f64,
    pub u_up: f64,
    pub u_down: f64,
    pub u_updown: f64,
}

impl LatticeParams {
    pub fn validate(&self) -> Result<()> {
        for (name, u) in [
            ("u_up", self.u_up),
            ("u_down", self.u_down),
            ("u_updown", self.u_updown),
        ] {
            if !(u.is_finite() && u > 0.0) {
                return Err(Error::Argument(format!("{name} must be positive, got {u}")));
            }
        }
        for (name, j) in [("j_up", self.j_up), ("j_down", self.j_down)] {
            if !(j.is_finite() && j >= 0.0) {
                return Err(Error::Argument(format!("{name} must be non-negative, got {j}")));
            }
        }
        Ok(())
    }

    /// Whether tunneling is small against interaction (ratio below 0.1).
    pub fn in_strong_coupling_regime(&self) -> bool {
        let max_j = self.j_up.max(self.j_down);
        let min_u = self.u_up.min(self.u_down).min(self.u_updown);
        max_j / min_u < 0.1
    }
}

/// Spin couplings of the effective low-energy Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveCouplings {
    pub j_z: f64,
    pub j_perp: f64,
    /// False when the superexchange expansion is outside its regime of validity.
    pub strong_coupling: bool,
}

/// `J_z = (J↑² + J↓²)/(2U↑↓) − J↑²/U↑ − J↓²/U↓`, `J_⊥ = (J↑ + J↓)/U↑↓`.
pub fn effective_couplings(p: &LatticeParams) -> Result<EffectiveCouplings> {
    p.validate()?;
    let j_z = (p.j_up.powi(2) + p.j_down.powi(2)) / (2.0 * p.u_updown)
        - p.j_up.powi(2) / p.u_up
        - p.j_down.powi(2) / p.u_down;
    let j_perp = (p.j_up + p.j_down) / p.u_updown;
    Ok(EffectiveCouplings {
        j_z,
        j_perp,
        strong_coupling: p.in_strong_coupling_regime(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{hermitian_eig, PureState};

    fn eigenvalues(h: &HermitianOperator) -> Vec<f64> {
        hermitian_eig(h).unwrap().eigenvalues().to_vec()
    }

    #[test]
    fn coupling_pattern() {
        let spec = ChainSpec::xx(8, 1.0, 0.8).unwrap();
        assert!((coupling_at(1, &spec).unwrap() - 1.8).abs() < 1e-15);
        assert!((coupling_at(2, &spec).unwrap() - 0.2).abs() < 1e-15);
        let uniform = ChainSpec::xx(8, 1.0, 0.0).unwrap();
        for j in 1..8 {
            assert_eq!(coupling_at(j, &uniform).unwrap(), 1.0);
        }
        assert!(coupling_at(0, &spec).is_err());
        assert!(coupling_at(8, &spec).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(ChainSpec::xx(7, 1.0, 0.5).is_err());
        assert!(ChainSpec::xx(4, 1.0, 1.0).is_err());
        assert!(ChainSpec::xx(4, 1.0, -0.1).is_err());
        assert!(ChainSpec::xx(4, 0.0, 0.1).is_err());
        assert!(ChainSpec::xx(2, 1.0, 0.1).is_ok());
        assert!(ChainSpec::xx(2, 1.0, 0.1).unwrap().validate_for_protocol().is_err());
    }

    #[test]
    fn two_site_xx() {
        let h = build_xx(&ChainSpec::xx(2, 1.0, 0.5).unwrap()).unwrap();
        let m = h.matrix();
        for i in 0..4 {
            for j in 0..4 {
                let want = if (i, j) == (1, 2) || (i, j) == (2, 1) { 1.5 } else { 0.0 };
                assert_eq!(m.get(i, j).re, want, "entry ({i},{j})");
            }
        }
        let ev = eigenvalues(&h);
        for (a, b) in ev.iter().zip([-1.5, 0.0, 0.0, 1.5]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn polarized_state_has_zero_energy() {
        let h = build_xx(&ChainSpec::xx(6, 1.3, 0.4).unwrap()).unwrap();
        let up = PureState::basis(6, 0).unwrap();
        assert_eq!(h.expectation(&up).unwrap(), 0.0);
    }

    #[test]
    fn xxz_at_zero_anisotropy_is_xx() {
        let xx = build_xx(&ChainSpec::xx(6, 1.0, 0.3).unwrap()).unwrap();
        let xxz = build_xxz(&ChainSpec::xxz(6, 1.0, 0.3, 0.0).unwrap()).unwrap();
        assert_eq!(xx, xxz);
    }

    #[test]
    fn two_site_heisenberg() {
        let h = build_xxz(&ChainSpec::xxz(2, 1.0, 0.0, 1.0).unwrap()).unwrap();
        let ev = eigenvalues(&h);
        for (a, b) in ev.iter().zip([-1.5, 0.5, 0.5, 0.5]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn ising_limit_is_neel() {
        let h = build_xxz(&ChainSpec::xxz(4, 1.0, 0.0, 10.0).unwrap()).unwrap();
        let gs = hermitian_eig(&h).unwrap().eigenstate(0, 4).unwrap();
        let weight = gs.amplitude(0b0101).norm_sqr() + gs.amplitude(0b1010).norm_sqr();
        assert!(weight > 0.9, "Néel weight {weight}");
    }

    #[test]
    fn wrong_model_rejected() {
        let xx = ChainSpec::xx(4, 1.0, 0.2).unwrap();
        assert!(build_xxz(&xx).is_err());
        let xxz = ChainSpec::xxz(4, 1.0, 0.2, 0.5).unwrap();
        assert!(build_xx(&xxz).is_err());
    }

    #[test]
    fn total_sz_values() {
        let sz = total_sz_operator(4).unwrap();
        assert_eq!(sz.matrix().get(0, 0).re, 4.0);
        assert_eq!(sz.matrix().get(0b0101, 0b0101).re, 0.0);
    }

    #[test]
    fn sectors() {
        assert_eq!(sector_indices(2, 0).unwrap(), vec![0b01, 0b10]);
        assert_eq!(sector_indices(4, 0).unwrap().len(), 6);
        assert!(sector_indices(4, 1).is_err());
        assert!(sector_indices(4, 6).is_err());
        let mut all: Vec<usize> = sector_values(6).flat_map(|s| sector_indices(6, s).unwrap()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..64).collect::<Vec<_>>());
    }

    #[test]
    fn effective_couplings_xx_point() {
        let p = LatticeParams {
            j_up: 1.0,
            j_down: 1.0,
            u_up: 2.0,
            u_down: 2.0,
            u_updown: 1.0,
        };
        let e = effective_couplings(&p).unwrap();
        assert_eq!(e.j_z, 0.0);
        assert_eq!(e.j_perp, 2.0);
        assert!(!e.strong_coupling);
    }

    #[test]
    fn effective_couplings_cases() {
        let zero = LatticeParams {
            j_up: 0.0,
            j_down: 0.0,
            u_up: 1.0,
            u_down: 1.0,
            u_updown: 1.0,
        };
        let e = effective_couplings(&zero).unwrap();
        assert_eq!((e.j_z, e.j_perp), (0.0, 0.0));
        assert!(e.strong_coupling);

        let one_species = LatticeParams { j_up: 1.0, ..zero };
        let e = effective_couplings(&one_species).unwrap();
        assert_eq!((e.j_z, e.j_perp), (-0.5, 1.0));

        let bad = LatticeParams { u_updown: 0.0, ..zero };
        assert!(matches!(effective_couplings(&bad), Err(Error::Argument(_))));
    }

    #[test]
    fn block_matches_dense_restriction() {
        let spec = ChainSpec::xxz(6, 1.0, 0.35, -0.7).unwrap();
        let bh = BondHamiltonian::from_spec(&spec).unwrap();
        let dense = bh.dense_real();
        for sz in sector_values(6) {
            let idx = sector_indices(6, sz).unwrap();
            let blk = bh.block(&idx);
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    assert_eq!(blk[(a, b)], dense[(i, j)]);
                }
            }
        }
    }
}
