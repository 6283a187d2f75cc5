//! Seeded random states, unitaries, and Hermitian matrices for property checks.

use num_complex::Complex64;
use rand::Rng;

use crate::state::DensityMatrix;
use crate::tensor::ComplexMatrix;

fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, |_, _| random_complex(rng));
    g.hermitian_part()
}

/// Full-rank random state `G G† / Tr(G G†)`.
pub fn random_density_matrix(num_qubits: usize, rng: &mut impl Rng) -> DensityMatrix {
    let dim = 1 << num_qubits;
    let g = ComplexMatrix::from_fn(dim, |_, _| random_complex(rng));
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityMatrix::from_matrix_unchecked(m.scale_real(1.0 / tr))
}

pub fn random_ket(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim).map(|_| random_complex(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn random_pure_state(num_qubits: usize, rng: &mut impl Rng) -> DensityMatrix {
    let ket = random_ket(1 << num_qubits, rng);
    DensityMatrix::from_matrix_unchecked(ComplexMatrix::outer(&ket))
}

/// Random unitary by Gram-Schmidt on the columns of a random complex matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex64> = (0..dim).map(|_| random_complex(rng)).collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_fn(dim, |r, c| cols[c][r])
}
