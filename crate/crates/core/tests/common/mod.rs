#![allow(dead_code)]

use dimerchain::numerics::{kron, ComplexMatrix, DensityMatrix, PureState};
use dimerchain::C64;
use nalgebra::DVector;
use rand::Rng;

pub fn random_state(n_sites: usize, rng: &mut impl Rng) -> PureState {
    let amps = DVector::from_fn(1 << n_sites, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    PureState::normalized(n_sites, amps).unwrap()
}

pub fn random_qubit_unitary(rng: &mut impl Rng) -> ComplexMatrix {
    let tau = std::f64::consts::TAU;
    let (a, b, d) = (
        rng.gen_range(0.0..tau),
        rng.gen_range(0.0..tau),
        rng.gen_range(0.0..tau),
    );
    let g: f64 = rng.gen_range(0.0..tau);
    let ph = C64::from_polar(1.0, a);
    let e = |x: f64| C64::from_polar(1.0, x);
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            ph * e(b) * g.cos(),
            ph * e(d) * g.sin(),
            -ph * e(-d) * g.sin(),
            ph * e(-b) * g.cos(),
        ],
    )
    .unwrap()
}

pub fn random_local_unitary(rng: &mut impl Rng) -> ComplexMatrix {
    kron(&random_qubit_unitary(rng), &random_qubit_unitary(rng)).unwrap()
}

/// Mixture of `k` random two-qubit pure states with random weights.
pub fn random_two_qubit_density(k: usize, rng: &mut impl Rng) -> DensityMatrix {
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut m = nalgebra::DMatrix::<C64>::zeros(4, 4);
    for w in weights {
        let psi = random_state(2, rng);
        let v = psi.amplitudes();
        m += (v * v.adjoint()) * C64::new(w / total, 0.0);
    }
    DensityMatrix::new(2, ComplexMatrix::new(m).unwrap()).unwrap()
}
