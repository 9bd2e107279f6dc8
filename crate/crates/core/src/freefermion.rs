//! Free-fermion description of the dimerized XX chain.
//!
//! Under the Jordan–Wigner map the XX chain becomes `H = c† M c` with `M` the
//! tridiagonal hopping matrix, `M[j][j+1] = J (1 + (-1)^{j+1} δ)`. Many-body
//! energies are occupation sums of the eigenvalues of `M`.
//!
//! Closed forms, with `r = (1-δ)/(1+δ)`:
//! - odd `N`: `±J(1+δ)√(1 + 2r cos(2πk/(N+1)) + r²)` for `k = 1..(N-1)/2`, plus one zero mode;
//! - even `N`: `±J(1+δ)√(1 + a r cos x_ν + r²)`, where `x_ν ∈ (0, π)` solve
//!   `r sin(N x/2) + sin((N/2 + 1) x) = 0`. Both `a = 1` and `a = 2` are evaluated
//!   and compared against the numeric spectrum.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hamiltonian::{ChainSpec, Model};
use crate::numerics::real_symmetric_eig;
use crate::roots::{bracket_roots, BracketSettings};

/// Largest mode count for which all `2^n` occupation sums are enumerated.
pub const DEFAULT_MAX_MODES: usize = 12;

/// Dimerized open hopping chain of any length (odd lengths included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoppingChain {
    pub n_sites: usize,
    pub j_coupling: f64,
    pub delta: f64,
}

impl HoppingChain {
    pub fn new(n_sites: usize, j_coupling: f64, delta: f64) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::Argument("hopping chain needs at least one site".into()));
        }
        if !(j_coupling.is_finite() && j_coupling > 0.0) {
            return Err(Error::Argument(format!("J must be positive, got {j_coupling}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Argument(format!("dimerization must lie in [0, 1), got {delta}")));
        }
        Ok(HoppingChain {
            n_sites,
            j_coupling,
            delta,
        })
    }

    /// Ratio of weak to strong bond, `(1-δ)/(1+δ)`.
    pub fn ratio(&self) -> f64 {
        (1.0 - self.delta) / (1.0 + self.delta)
    }

    fn strong(&self) -> f64 {
        self.j_coupling * (1.0 + self.delta)
    }
}

impl TryFrom<&ChainSpec> for HoppingChain {
    type Error = Error;

    fn try_from(spec: &ChainSpec) -> Result<Self> {
        if spec.model != Model::XX {
            return Err(Error::Argument(
                "free-fermion reduction applies to the XX chain only".into(),
            ));
        }
        HoppingChain::new(spec.n_sites, spec.j_coupling, spec.delta)
    }
}

/// Real symmetric tridiagonal hopping matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    n: usize,
    hoppings: Vec<f64>,
}

impl AdjacencyMatrix {
    pub fn dimerized(chain: &HoppingChain) -> Self {
        let hoppings = (1..chain.n_sites)
            .map(|j| {
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                chain.j_coupling * (1.0 + sign * chain.delta)
            })
            .collect();
        AdjacencyMatrix {
            n: chain.n_sites,
            hoppings,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Off-diagonal elements `M[j][j+1]`, `j = 1..n-1`.
    pub fn hoppings(&self) -> &[f64] {
        &self.hoppings
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (j, &h) in self.hoppings.iter().enumerate() {
            m[(j, j + 1)] = h;
            m[(j + 1, j)] = h;
        }
        m
    }
}

/// Hopping matrix of an XX chain spec.
pub fn adjacency_matrix(spec: &ChainSpec) -> Result<AdjacencyMatrix> {
    Ok(AdjacencyMatrix::dimerized(&HoppingChain::try_from(spec)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    Numeric,
    FormulaOdd,
    /// Even-`N` closed form with cosine coefficient 1 (as printed).
    FormulaEvenPrinted,
    /// Even-`N` closed form with cosine coefficient 2.
    FormulaEvenCoefficientTwo,
}

/// Single-particle energies, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionSpectrum {
    pub lambdas: Vec<f64>,
    pub source: SpectrumSource,
}

impl FermionSpectrum {
    fn sorted(mut lambdas: Vec<f64>, source: SpectrumSource) -> Self {
        lambdas.sort_by(f64::total_cmp);
        FermionSpectrum { lambdas, source }
    }

    /// Largest `|λ_i + λ_{n-1-i}|`: zero for a spectrum symmetric about 0.
    pub fn asymmetry(&self) -> f64 {
        let n = self.lambdas.len();
        (0..n)
            .map(|i| (self.lambdas[i] + self.lambdas[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }

    /// Largest pointwise deviation from `other`; infinite if the lengths differ.
    pub fn max_deviation(&self, other: &FermionSpectrum) -> f64 {
        if self.lambdas.len() != other.lambdas.len() {
            return f64::INFINITY;
        }
        self.lambdas
            .iter()
            .zip(&other.lambdas)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Eigenvalues of `M` by dense diagonalization.
pub fn spectrum_numeric(m: &AdjacencyMatrix) -> Result<FermionSpectrum> {
    let (values, _) = real_symmetric_eig(m.to_dense())?;
    Ok(FermionSpectrum::sorted(values, SpectrumSource::Numeric))
}

/// Closed-form spectrum for odd `N`.
pub fn spectrum_formula_odd(chain: &HoppingChain) -> Result<FermionSpectrum> {
    let n = chain.n_sites;
    if n.is_multiple_of(2) {
        return Err(Error::Argument(format!("odd-N formula called with N = {n}")));
    }
    let r = chain.ratio();
    let mut lambdas = Vec::with_capacity(n);
    for k in 1..=(n - 1) / 2 {
        let d = 1.0 + 2.0 * r * (2.0 * PI * k as f64 / (n + 1) as f64).cos() + r * r;
        let e = chain.strong() * d.max(0.0).sqrt();
        lambdas.push(e);
        lambdas.push(-e);
    }
    lambdas.push(0.0);
    Ok(FermionSpectrum::sorted(lambdas, SpectrumSource::FormulaOdd))
}

/// Whether all `N/2` quantization roots are real (`r < (N+2)/N`) or one
/// becomes an edge mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootRegime {
    Bulk,
    EdgeMode,
}

/// Roots `x_ν ∈ (0, π)` of `r sin(N x/2) + sin((N/2+1) x) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct XnuRoots {
    pub roots: Vec<f64>,
    /// `N/2`.
    pub expected: usize,
    pub ratio: f64,
    pub regime: RootRegime,
}

impl XnuRoots {
    pub fn deficit(&self) -> usize {
        self.expected.saturating_sub(self.roots.len())
    }

    pub fn max_residual(&self, n_sites: usize) -> f64 {
        self.roots
            .iter()
            .map(|&x| quantization(n_sites, self.ratio, x).abs())
            .fold(0.0, f64::max)
    }
}

/// `r sin(N x/2) + sin((N/2 + 1) x)`.
pub fn quantization(n_sites: usize, ratio: f64, x: f64) -> f64 {
    let half = n_sites as f64 / 2.0;
    ratio * (half * x).sin() + ((half + 1.0) * x).sin()
}

pub fn solve_xnu(chain: &HoppingChain) -> Result<XnuRoots> {
    solve_xnu_with(chain, BracketSettings::default())
}

/// Brackets and bisects every sign change of the quantization condition on `(0, π)`.
pub fn solve_xnu_with(chain: &HoppingChain, settings: BracketSettings) -> Result<XnuRoots> {
    let n = chain.n_sites;
    if !n.is_multiple_of(2) {
        return Err(Error::Argument(format!("x_nu equation needs even N, got {n}")));
    }
    let r = chain.ratio();
    let roots = bracket_roots(|x| quantization(n, r, x), 0.0, PI, settings)?;
    let regime = if r < (n as f64 + 2.0) / n as f64 {
        RootRegime::Bulk
    } else {
        RootRegime::EdgeMode
    };
    Ok(XnuRoots {
        roots,
        expected: n / 2,
        ratio: r,
        regime,
    })
}

/// Comparison of both even-`N` closed forms with the numeric spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenFormulaReport {
    pub roots: XnuRoots,
    pub numeric: FermionSpectrum,
    pub printed: FermionSpectrum,
    pub coefficient_two: FermionSpectrum,
    pub printed_deviation: f64,
    pub coefficient_two_deviation: f64,
}

impl EvenFormulaReport {
    /// Whether either closed form reproduces the numeric spectrum to `tol`.
    pub fn any_variant_within(&self, tol: f64) -> bool {
        self.printed_deviation < tol || self.coefficient_two_deviation < tol
    }
}

fn even_branch(chain: &HoppingChain, roots: &[f64], coefficient: f64, source: SpectrumSource) -> FermionSpectrum {
    let r = chain.ratio();
    let lambdas = roots
        .iter()
        .flat_map(|&x| {
            let e = chain.strong() * (1.0 + coefficient * r * x.cos() + r * r).max(0.0).sqrt();
            [e, -e]
        })
        .collect();
    FermionSpectrum::sorted(lambdas, source)
}

/// Even-`N` closed forms, both variants, with their deviation from numerics.
pub fn spectrum_formula_even(chain: &HoppingChain) -> Result<EvenFormulaReport> {
    let roots = solve_xnu(chain)?;
    let numeric = spectrum_numeric(&AdjacencyMatrix::dimerized(chain))?;
    let printed = even_branch(chain, &roots.roots, 1.0, SpectrumSource::FormulaEvenPrinted);
    let coefficient_two = even_branch(chain, &roots.roots, 2.0, SpectrumSource::FormulaEvenCoefficientTwo);
    Ok(EvenFormulaReport {
        printed_deviation: printed.max_deviation(&numeric),
        coefficient_two_deviation: coefficient_two.max_deviation(&numeric),
        roots,
        numeric,
        printed,
        coefficient_two,
    })
}

/// All `2^n` sums `Σ_k n_k λ_k`, `n_k ∈ {0, 1}`, ascending.
pub fn many_body_energies(fs: &FermionSpectrum, max_modes: usize) -> Result<Vec<f64>> {
    let n = fs.lambdas.len();
    if n > max_modes {
        return Err(Error::Capacity {
            what: "fermion modes",
            requested: n,
            limit: max_modes,
        });
    }
    let mut sums = vec![0.0f64; 1 << n];
    for (k, &lam) in fs.lambdas.iter().enumerate() {
        let half = 1usize << k;
        for occ in 0..half {
            sums[occ | half] = sums[occ] + lam;
        }
    }
    sums.sort_by(f64::total_cmp);
    Ok(sums)
}
