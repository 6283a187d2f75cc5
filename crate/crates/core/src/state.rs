//! Density matrices, canonical states, fidelity, and von Neumann entropy.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::Pauli;
use crate::tensor::{
    self, hermitian_eig, hermitian_eigenvalues, kron, qubit_shift, ComplexMatrix,
    EIGEN_CLAMP_TOL, HERMITICITY_TOL, ONE, ZERO,
};

/// Trace deviation accepted for a valid state.
pub const TRACE_TOL: f64 = 1e-9;
/// Purity deviation accepted for a pure reference state.
pub const PURITY_TOL: f64 = 1e-9;

/// Positive semidefinite, unit-trace operator on `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    num_qubits: usize,
}

impl DensityMatrix {
    /// Validates `matrix` as a qubit density matrix.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self::wrap(matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    fn wrap(matrix: ComplexMatrix) -> Result<Self> {
        let dim = matrix.dim();
        if !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {dim} is not a power of two"
            )));
        }
        Ok(Self {
            num_qubits: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    /// Wraps a matrix known to be a valid state (output of a CPTP map).
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self::wrap(matrix).expect("state dimension must be a power of two")
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let defect = self.matrix.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let min = hermitian_eigenvalues(&self.matrix)?
            .last()
            .copied()
            .unwrap_or(0.0);
        if min < -EIGEN_CLAMP_TOL {
            return Err(Error::InvalidState(format!("eigenvalue {min:.3e} is negative")));
        }
        Ok(())
    }

    /// `|ψ⟩⟨ψ|` for a normalized ket.
    pub fn from_ket(ket: &[Complex64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("ket has squared norm {norm}")));
        }
        Self::wrap(ComplexMatrix::outer(ket))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let dim = 1 << num_qubits;
        assert!(index < dim, "basis index out of range");
        let mut m = ComplexMatrix::zeros(dim);
        m[(index, index)] = ONE;
        Self { matrix: m, num_qubits }
    }

    /// `|0…0⟩`.
    pub fn ground(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1 << num_qubits;
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
            num_qubits,
        }
    }

    /// `w |Φ⁺⟩⟨Φ⁺| + (1 - w) I/4`.
    pub fn werner(w: f64) -> Result<Self> {
        if !(-1.0 / 3.0..=1.0).contains(&w) {
            return Err(Error::InvalidArgument(format!(
                "Werner weight {w} outside [-1/3, 1]"
            )));
        }
        let bell = bell_state(BellKind::PhiPlus);
        let mixed = Self::maximally_mixed(2);
        let m = &bell.matrix.scale_real(w) + &mixed.matrix.scale_real(1.0 - w);
        Ok(Self::from_matrix_unchecked(m))
    }

    /// Werner state whose fidelity with `|Φ⁺⟩` is `f`.
    pub fn werner_with_fidelity(f: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::ProbabilityOutOfRange {
                name: "fidelity",
                value: f,
            });
        }
        Self::werner((4.0 * f - 1.0) / 3.0)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        let m = &self.matrix;
        let n = m.dim();
        let mut acc = 0.0;
        for r in 0..n {
            for c in 0..n {
                acc += (m[(r, c)] * m[(c, r)]).re;
            }
        }
        acc
    }

    /// Diagonal of the matrix: computational-basis outcome probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        self.matrix.diagonal_real()
    }

    /// `self ⊗ other`, with `self` as the leading qubits.
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
            num_qubits: self.num_qubits + other.num_qubits,
        }
    }

    /// Reduced state on the listed qubits (kept in ascending order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let dims = vec![2; self.num_qubits];
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        Ok(Self::from_matrix_unchecked(tensor::partial_trace(
            &self.matrix,
            &dims,
            &keep,
        )?))
    }

    /// Traces out the listed qubits.
    pub fn trace_out(&self, qubits: &[usize]) -> Result<Self> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let keep: Vec<usize> = (0..self.num_qubits)
            .filter(|q| !qubits.contains(q))
            .collect();
        if keep.is_empty() {
            return Err(Error::InvalidArgument("cannot trace out every qubit".into()));
        }
        self.partial_trace(&keep)
    }

    /// `U ρ U†` with `U` acting on `targets`.
    pub fn apply_unitary(&self, op: &ComplexMatrix, targets: &[usize]) -> Result<Self> {
        let mut m = self.matrix.clone();
        tensor::conjugate_local(&mut m, op, targets)?;
        Ok(Self::from_matrix_unchecked(m))
    }

    pub fn apply_pauli(&self, pauli: Pauli, target: usize) -> Result<Self> {
        self.apply_unitary(&pauli.matrix(), &[target])
    }

    /// Reorders qubits so that new qubit `i` is old qubit `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        Ok(Self::from_matrix_unchecked(tensor::permute_qubits(
            &self.matrix,
            order,
        )?))
    }

    /// Inserts `count` fresh `|0⟩` qubits so that they occupy positions
    /// `at..at + count`; existing qubits at or after `at` shift up.
    pub fn insert_ground_qubits(&self, at: usize, count: usize) -> Result<Self> {
        if at > self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: at,
                num_qubits: self.num_qubits,
            });
        }
        let n_old = self.num_qubits;
        let n_new = n_old + count;
        let tail_bits = n_old - at;
        let tail_mask = (1usize << tail_bits) - 1;
        let lift = |i: usize| ((i & !tail_mask) << count) | (i & tail_mask);
        let old_dim = self.dim();
        let mut m = ComplexMatrix::zeros_for_qubits(n_new);
        for r in 0..old_dim {
            let lr = lift(r);
            for c in 0..old_dim {
                m[(lr, lift(c))] = self.matrix[(r, c)];
            }
        }
        Ok(Self {
            matrix: m,
            num_qubits: n_new,
        })
    }

    /// Probability that all listed qubits read `0`.
    pub fn ground_overlap(&self, qubits: &[usize]) -> Result<f64> {
        let mut mask = 0usize;
        for &q in qubits {
            self.check_qubit(q)?;
            mask |= 1 << qubit_shift(self.num_qubits, q);
        }
        Ok((0..self.dim())
            .filter(|i| i & mask == 0)
            .map(|i| self.matrix[(i, i)].re)
            .sum())
    }

    pub(crate) fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }
}

/// The four Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];

    pub fn ket(self) -> Vec<Complex64> {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            BellKind::PhiPlus => vec![s, ZERO, ZERO, s],
            BellKind::PhiMinus => vec![s, ZERO, ZERO, -s],
            BellKind::PsiPlus => vec![ZERO, s, s, ZERO],
            BellKind::PsiMinus => vec![ZERO, s, -s, ZERO],
        }
    }

    /// Pauli `P` with `(P ⊗ I)|Φ⁺⟩` equal to this state up to phase.
    pub fn alice_pauli(self) -> Pauli {
        match self {
            BellKind::PhiPlus => Pauli::I,
            BellKind::PhiMinus => Pauli::Z,
            BellKind::PsiPlus => Pauli::X,
            BellKind::PsiMinus => Pauli::Y,
        }
    }
}

pub fn bell_state(kind: BellKind) -> DensityMatrix {
    DensityMatrix::from_matrix_unchecked(ComplexMatrix::outer(&kind.ket()))
}

fn check_same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(())
}

/// Eigenvalues below this are treated as outside the support in [`fidelity`].
const SUPPORT_TOL: f64 = 1e-14;

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
///
/// The square root is taken of whichever state has the smaller support, and
/// `√ρ σ √ρ` is formed on that support only, so rank-deficient (in particular
/// pure) arguments do not pick up `√ε` round-off.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let eig_rho = hermitian_eig(rho.matrix())?;
    let eig_sigma = hermitian_eig(sigma.matrix())?;
    let rank = |values: &[f64]| values.iter().filter(|&&l| l > SUPPORT_TOL).count();
    let (eig, other) = if rank(&eig_sigma.values) < rank(&eig_rho.values) {
        (eig_sigma, rho.matrix())
    } else {
        (eig_rho, sigma.matrix())
    };
    for &l in &eig.values {
        tensor::clamp_eigenvalue(l)?;
    }
    let n = other.dim();
    let support: Vec<usize> = (0..n).filter(|&k| eig.values[k] > SUPPORT_TOL).collect();
    if support.is_empty() {
        return Ok(0.0);
    }
    let cols: Vec<Vec<Complex64>> = support
        .iter()
        .map(|&k| (0..n).map(|r| eig.vectors[(r, k)] * eig.values[k].sqrt()).collect())
        .collect();
    let images: Vec<Vec<Complex64>> = cols.iter().map(|c| other.mul_vec(c)).collect();
    let inner = ComplexMatrix::from_fn(support.len(), |i, j| {
        cols[i].iter().zip(&images[j]).map(|(a, b)| a.conj() * b).sum()
    })
    .hermitian_part();
    let root_trace: f64 = hermitian_eigenvalues(&inner)?
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// Fidelity against a pure reference: `⟨ψ|σ|ψ⟩ = Tr(ψ σ)`.
pub fn fidelity_with_pure(psi: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(psi, sigma)?;
    let purity = psi.purity();
    if (purity - 1.0).abs() > PURITY_TOL {
        return Err(Error::NotPure { purity });
    }
    let (a, b) = (psi.matrix(), sigma.matrix());
    let n = a.dim();
    let mut acc = 0.0;
    for r in 0..n {
        for c in 0..n {
            acc += (a[(r, c)] * b[(c, r)]).re;
        }
    }
    Ok(acc.clamp(0.0, 1.0))
}

/// `-Σ λ log₂ λ` over a spectrum, with `0 log 0 = 0` and tiny negatives dropped.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    let s: f64 = values
        .iter()
        .filter(|&&l| l > 1e-15)
        .map(|&l| -l * l.log2())
        .sum();
    s.max(0.0)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let values = hermitian_eigenvalues(rho.matrix())
        .or_else(|_| hermitian_eig(&rho.matrix().hermitian_part()).map(|e| e.values))
        .expect("density matrix is Hermitian");
    entropy_of_spectrum(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density_matrix, random_pure_state, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn phi_plus_entries() {
        let rho = bell_state(BellKind::PhiPlus);
        for r in 0..4 {
            for c in 0..4 {
                let expected = if [0, 3].contains(&r) && [0, 3].contains(&c) { 0.5 } else { 0.0 };
                assert!((rho.matrix()[(r, c)].re - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bell_states_are_pure_and_maximally_entangled() {
        let half = DensityMatrix::maximally_mixed(1);
        for kind in BellKind::ALL {
            let rho = bell_state(kind);
            rho.validate().unwrap();
            assert!((rho.purity() - 1.0).abs() < 1e-12);
            for q in [0, 1] {
                let marginal = rho.partial_trace(&[q]).unwrap();
                assert!(marginal.matrix().max_abs_diff(half.matrix()) < 1e-15);
            }
        }
    }

    #[test]
    fn bell_states_are_orthogonal() {
        for a in BellKind::ALL {
            for b in BellKind::ALL {
                let f = fidelity(&bell_state(a), &bell_state(b)).unwrap();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((f - expected).abs() < 1e-9, "{a:?} {b:?} {f}");
            }
        }
    }

    #[test]
    fn alice_pauli_generates_bell_basis() {
        let phi = bell_state(BellKind::PhiPlus);
        for kind in BellKind::ALL {
            let moved = phi.apply_pauli(kind.alice_pauli(), 0).unwrap();
            assert!((fidelity_with_pure(&bell_state(kind), &moved).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_basic_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density_matrix(2, &mut rng);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
        let f = fidelity(&DensityMatrix::basis(1, 0), &DensityMatrix::basis(1, 1)).unwrap();
        assert!(f.abs() < 1e-12);
    }

    #[test]
    fn fidelity_symmetric_and_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let rho = random_density_matrix(2, &mut rng);
            let sigma = random_density_matrix(2, &mut rng);
            let u = random_unitary(4, &mut rng);
            let f = fidelity(&rho, &sigma).unwrap();
            let g = fidelity(&sigma, &rho).unwrap();
            let h = fidelity(
                &rho.apply_unitary(&u, &[0, 1]).unwrap(),
                &sigma.apply_unitary(&u, &[0, 1]).unwrap(),
            )
            .unwrap();
            assert!((0.0..=1.0).contains(&f));
            assert!((f - g).abs() < 1e-9);
            assert!((f - h).abs() < 1e-9);
        }
    }

    #[test]
    fn fidelity_rejects_dimension_mismatch() {
        let a = DensityMatrix::ground(1);
        let b = DensityMatrix::ground(2);
        assert!(matches!(fidelity(&a, &b), Err(Error::DimensionMismatch(_))));
        assert!(fidelity_with_pure(&a, &b).is_err());
    }

    #[test]
    fn pure_fidelity_against_maximally_mixed() {
        let phi = bell_state(BellKind::PhiPlus);
        let f = fidelity_with_pure(&phi, &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((f - 0.25).abs() < 1e-15);
        assert!((fidelity_with_pure(&phi, &phi).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pure_fidelity_matches_uhlmann() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let psi = random_pure_state(2, &mut rng);
            let sigma = random_density_matrix(2, &mut rng);
            let a = fidelity_with_pure(&psi, &sigma).unwrap();
            let b = fidelity(&psi, &sigma).unwrap();
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn pure_fidelity_rejects_mixed_reference() {
        let mixed = DensityMatrix::maximally_mixed(1);
        assert!(matches!(
            fidelity_with_pure(&mixed, &mixed),
            Err(Error::NotPure { .. })
        ));
    }

    #[test]
    fn entropy_values() {
        assert!(von_neumann_entropy(&DensityMatrix::ground(1)).abs() < 1e-15);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(1)) - 1.0).abs() < 1e-15);
        let rho = DensityMatrix::new(ComplexMatrix::real_diagonal(&[0.25, 0.75])).unwrap();
        // -0.25 log2 0.25 - 0.75 log2 0.75
        let expected = 0.5 + 0.75 * (4.0f64 / 3.0).log2();
        assert!((von_neumann_entropy(&rho) - expected).abs() < 1e-12);
        assert!((expected - 0.811_278_124_459_132_8).abs() < 1e-12);
    }

    #[test]
    fn entropy_is_additive_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let a = random_density_matrix(1, &mut rng);
            let b = random_density_matrix(2, &mut rng);
            let s_ab = von_neumann_entropy(&a.tensor(&b));
            let sum = von_neumann_entropy(&a) + von_neumann_entropy(&b);
            assert!((s_ab - sum).abs() < 1e-9);
            assert!(s_ab <= 3.0 + 1e-12);
        }
    }

    #[test]
    fn validation_catches_bad_matrices() {
        let not_unit = ComplexMatrix::real_diagonal(&[0.5, 0.4]);
        assert!(DensityMatrix::new(not_unit).is_err());
        let negative = ComplexMatrix::real_diagonal(&[1.5, -0.5]);
        assert!(DensityMatrix::new(negative).is_err());
        let odd = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
        assert!(matches!(DensityMatrix::new(odd), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn insert_ground_qubits_places_zeros() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_density_matrix(2, &mut rng);
        let grown = rho.insert_ground_qubits(1, 2).unwrap();
        assert_eq!(grown.num_qubits(), 4);
        assert!((grown.ground_overlap(&[1, 2]).unwrap() - 1.0).abs() < 1e-12);
        let back = grown.trace_out(&[1, 2]).unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-15);
        let direct = rho
            .partial_trace(&[0])
            .unwrap()
            .tensor(&DensityMatrix::ground(2));
        let grown_marg = grown.partial_trace(&[0, 1, 2]).unwrap();
        assert!(grown_marg.matrix().max_abs_diff(direct.matrix()) < 1e-12);
    }
}
