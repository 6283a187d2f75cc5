//! Two-qubit entanglement and correlation measures.
//!
//! Classical correlations are measured on subsystem A (qubit 0) with rank-1
//! projectors `Π₀ = |v⟩⟨v|`, `Π₁ = I - Π₀`, where
//! `|v⟩ = cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`. The best measurement is found by
//! a fixed 64 x 128 grid over `(θ, φ)` followed by simplex refinement.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::pauli_y;
use crate::optimize::{first_argmin, linspace, NelderMead};
use crate::state::{
    bell_state, entropy_of_spectrum, fidelity_with_pure, von_neumann_entropy, BellKind,
    DensityMatrix,
};
use crate::tensor::{eigenvalues_2x2, hermitian_eigenvalues, kron, matrix_sqrt, ComplexMatrix};

pub const THETA_GRID: usize = 64;
pub const PHI_GRID: usize = 128;
/// Objective-change tolerance for the measurement refinement.
pub const MEASUREMENT_FTOL: f64 = 1e-8;
/// Outcomes with probability at or below this contribute nothing.
pub const OUTCOME_PROB_FLOOR: f64 = 1e-12;
/// Negative discord within this tolerance is reported as zero.
pub const DISCORD_CLAMP_TOL: f64 = 1e-9;

/// Projective-measurement direction on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementAngles {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidArgument(format!("theta {theta} outside [0, π]")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::InvalidArgument(format!("phi {phi} outside [0, 2π)")));
        }
        Ok(Self { theta, phi })
    }

    /// Maps any real angles to the equivalent pair with `θ ∈ [0, π]`,
    /// `φ ∈ [0, 2π)`. `(θ, φ)` and `(-θ, φ + π)` give the same projectors.
    pub fn canonical(theta: f64, phi: f64) -> Self {
        let two_pi = 2.0 * PI;
        let mut t = theta.rem_euclid(two_pi);
        let mut p = phi;
        if t > PI {
            t = two_pi - t;
            p += PI;
        }
        let mut p = p.rem_euclid(two_pi);
        if p >= two_pi {
            p = 0.0;
        }
        Self { theta: t, phi: p }
    }

    /// `|v⟩` spanning `Π₀`.
    pub fn ket(&self) -> [Complex64; 2] {
        let (s, c) = (0.5 * self.theta).sin_cos();
        [Complex64::new(c, 0.0), Complex64::from_polar(s, self.phi)]
    }

    /// `(Π₀, Π₁)`.
    pub fn projectors(&self) -> (ComplexMatrix, ComplexMatrix) {
        let p0 = ComplexMatrix::outer(&self.ket());
        let p1 = &ComplexMatrix::identity(2) - &p0;
        (p0, p1)
    }
}

/// All correlation figures for one two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    /// Fidelity with `|Φ⁺⟩`.
    pub fidelity: f64,
    pub qd: f64,
    pub eof: f64,
    pub mutual_info: f64,
    pub classical_info: f64,
    pub concurrence: f64,
}

impl CorrelationReport {
    pub fn compute(rho: &DensityMatrix) -> Result<Self> {
        check_two_qubit(rho)?;
        let mutual_info = mutual_information(rho)?;
        let (classical_info, _) = classical_correlations(rho)?;
        let concurrence = concurrence(rho)?;
        Ok(Self {
            fidelity: fidelity_with_pure(&bell_state(BellKind::PhiPlus), rho)?,
            qd: discord_from_parts(mutual_info, classical_info),
            eof: eof_from_concurrence(concurrence),
            mutual_info,
            classical_info,
            concurrence,
        })
    }
}

fn check_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.num_qubits() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected a two-qubit state, got {} qubit(s)",
            rho.num_qubits()
        )));
    }
    Ok(())
}

/// Wootters concurrence `max(0, λ₁ - λ₂ - λ₃ - λ₄)`, where `λᵢ²` are the
/// eigenvalues of `R = ρ (Y⊗Y) ρ* (Y⊗Y)` in descending order.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    check_two_qubit(rho)?;
    let yy = kron(&pauli_y(), &pauli_y());
    let flipped = yy.matmul(&rho.matrix().conj()).matmul(&yy);
    // √ρ ρ̃ √ρ is Hermitian and similar to R = ρ ρ̃.
    let root = matrix_sqrt(rho.matrix())?;
    let similar = root.matmul(&flipped).matmul(&root).hermitian_part();
    let lambdas: Vec<f64> = hermitian_eigenvalues(&similar)?
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    let c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
    Ok(c.clamp(0.0, 1.0))
}

/// `-x log₂ x - (1-x) log₂ (1-x)`.
pub fn binary_entropy(x: f64) -> f64 {
    entropy_of_spectrum(&[x, 1.0 - x])
}

fn eof_from_concurrence(c: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    let x = 0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt());
    binary_entropy(x)
}

/// Entanglement of formation from the concurrence closed form.
pub fn entanglement_of_formation(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence(rho)?))
}

/// `S(ρ_A) + S(ρ_B) - S(ρ)` in bits.
pub fn mutual_information(rho: &DensityMatrix) -> Result<f64> {
    check_two_qubit(rho)?;
    let s_a = von_neumann_entropy(&rho.partial_trace(&[0])?);
    let s_b = von_neumann_entropy(&rho.partial_trace(&[1])?);
    Ok((s_a + s_b - von_neumann_entropy(rho)).max(0.0))
}

/// `p S(ρ_{B|v})` for the outcome `|v⟩` on A.
fn weighted_conditional_entropy(m: &ComplexMatrix, v: [Complex64; 2]) -> f64 {
    // ⟨v|_A ρ |v⟩_A, indices (a, b) -> 2a + b.
    let mut block = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (b, row) in block.iter_mut().enumerate() {
        for (bp, entry) in row.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..2 {
                for ap in 0..2 {
                    acc += v[a].conj() * m[(2 * a + b, 2 * ap + bp)] * v[ap];
                }
            }
            *entry = acc;
        }
    }
    let p = block[0][0].re + block[1][1].re;
    if p <= OUTCOME_PROB_FLOOR {
        return 0.0;
    }
    let (hi, lo) = eigenvalues_2x2(block[0][0].re / p, block[1][1].re / p, block[0][1] / p);
    p * entropy_of_spectrum(&[hi, lo])
}

/// `Σₖ pₖ S(ρ_{B|k})` for the measurement at `(θ, φ)` on A.
pub fn measured_conditional_entropy(rho: &DensityMatrix, theta: f64, phi: f64) -> f64 {
    conditional_entropy_raw(rho.matrix(), theta, phi)
}

fn conditional_entropy_raw(m: &ComplexMatrix, theta: f64, phi: f64) -> f64 {
    let (s, c) = (0.5 * theta).sin_cos();
    let e = Complex64::from_polar(1.0, phi);
    let v0 = [Complex64::new(c, 0.0), e * s];
    let v1 = [Complex64::new(s, 0.0), -e * c];
    weighted_conditional_entropy(m, v0) + weighted_conditional_entropy(m, v1)
}

/// Classical correlation `J(A:B) = S(ρ_B) - min_{θ,φ} Σₖ pₖ S(ρ_{B|k})` and
/// the minimizing measurement.
pub fn classical_correlations(rho: &DensityMatrix) -> Result<(f64, MeasurementAngles)> {
    check_two_qubit(rho)?;
    let m = rho.matrix();
    let thetas = linspace(0.0, PI, THETA_GRID);
    let phis: Vec<f64> = (0..PHI_GRID)
        .map(|k| 2.0 * PI * k as f64 / PHI_GRID as f64)
        .collect();

    let mut values = Vec::with_capacity(THETA_GRID * PHI_GRID);
    for &t in &thetas {
        for &p in &phis {
            values.push(conditional_entropy_raw(m, t, p));
        }
    }
    let best = first_argmin(&values).expect("grid is non-empty");
    let (mut best_theta, mut best_phi) = (thetas[best / PHI_GRID], phis[best % PHI_GRID]);
    let mut best_value = values[best];

    let nm = NelderMead::new(
        vec![PI / (THETA_GRID - 1) as f64, 2.0 * PI / PHI_GRID as f64],
        MEASUREMENT_FTOL,
    );
    let refined = nm.minimize(
        |x| conditional_entropy_raw(m, x[0], x[1]),
        &[best_theta, best_phi],
    );
    if refined.value < best_value {
        best_value = refined.value;
        best_theta = refined.x[0];
        best_phi = refined.x[1];
    }

    let s_b = von_neumann_entropy(&rho.partial_trace(&[1])?);
    let j = (s_b - best_value).max(0.0);
    Ok((j, MeasurementAngles::canonical(best_theta, best_phi)))
}

fn discord_from_parts(mutual_info: f64, classical: f64) -> f64 {
    let d = mutual_info - classical;
    if (-DISCORD_CLAMP_TOL..0.0).contains(&d) {
        0.0
    } else {
        d
    }
}

/// `δ(A:B) = I(A:B) - J(A:B)` with the measurement on A.
pub fn quantum_discord(rho: &DensityMatrix) -> Result<f64> {
    let mi = mutual_information(rho)?;
    let (j, _) = classical_correlations(rho)?;
    Ok(discord_from_parts(mi, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{composite_channel_apply, NoiseParams};
    use crate::random::{random_density_matrix, random_pure_state, random_unitary};
    use nalgebra::{DMatrix, Schur};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn classical_mixture() -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::real_diagonal(&[0.5, 0.0, 0.0, 0.5])).unwrap()
    }

    fn product_state(seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_density_matrix(1, &mut rng).tensor(&random_density_matrix(1, &mut rng))
    }

    /// Concurrence straight from the eigenvalues of the non-Hermitian R.
    fn concurrence_oracle(rho: &DensityMatrix) -> f64 {
        let yy = kron(&pauli_y(), &pauli_y());
        let r = rho
            .matrix()
            .matmul(&yy)
            .matmul(&rho.matrix().conj())
            .matmul(&yy);
        let na = DMatrix::from_row_slice(4, 4, r.as_slice());
        let eig = Schur::new(na).eigenvalues().expect("complex Schur form");
        let mut l: Vec<f64> = eig.iter().map(|z| z.re.max(0.0).sqrt()).collect();
        l.sort_by(|a, b| b.total_cmp(a));
        (l[0] - l[1] - l[2] - l[3]).max(0.0)
    }

    #[test]
    fn concurrence_reference_values() {
        assert!((concurrence(&bell_state(BellKind::PhiPlus)).unwrap() - 1.0).abs() < 1e-9);
        assert!(concurrence(&DensityMatrix::ground(2)).unwrap().abs() < 1e-9);
        let werner = DensityMatrix::werner(0.5).unwrap();
        assert!((concurrence(&werner).unwrap() - 0.25).abs() < 1e-9);
        assert!((concurrence_oracle(&werner) - 0.25).abs() < 1e-9);
        for w in [0.0, 0.2, 1.0 / 3.0, 0.6, 0.9] {
            let c = concurrence(&DensityMatrix::werner(w).unwrap()).unwrap();
            assert!((c - (0.5 * (3.0 * w - 1.0)).max(0.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn concurrence_matches_direct_eigenvalues_of_r() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let rho = random_density_matrix(2, &mut rng);
            let pure = random_pure_state(2, &mut rng);
            for s in [&rho, &pure] {
                let got = concurrence(s).unwrap();
                assert!((got - concurrence_oracle(s)).abs() < 1e-7, "{got}");
            }
        }
    }

    #[test]
    fn eof_reference_values() {
        assert!((entanglement_of_formation(&bell_state(BellKind::PhiPlus)).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(entanglement_of_formation(&classical_mixture()).unwrap(), 0.0);
        // C = 0.6 -> x = 0.9
        assert!((eof_from_concurrence(0.6) - binary_entropy(0.9)).abs() < 1e-15);
        assert!((binary_entropy(0.9) - 0.468_995_593_589_281_2).abs() < 1e-12);
    }

    #[test]
    fn eof_monotone_in_concurrence() {
        let cs = linspace(0.0, 1.0, 101);
        let eofs: Vec<f64> = cs.iter().map(|&c| eof_from_concurrence(c)).collect();
        assert!(eofs.windows(2).all(|w| w[0] <= w[1] + 1e-15));
    }

    #[test]
    fn eof_of_pure_state_is_marginal_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let psi = random_pure_state(2, &mut rng);
            let marginal = von_neumann_entropy(&psi.partial_trace(&[0]).unwrap());
            assert!((entanglement_of_formation(&psi).unwrap() - marginal).abs() < 1e-6);
        }
    }

    #[test]
    fn mutual_information_reference_values() {
        assert!(mutual_information(&product_state(1)).unwrap().abs() < 1e-9);
        assert!((mutual_information(&bell_state(BellKind::PhiPlus)).unwrap() - 2.0).abs() < 1e-9);
        assert!((mutual_information(&classical_mixture()).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn classical_correlation_reference_values() {
        let (j, _) = classical_correlations(&product_state(2)).unwrap();
        assert!(j.abs() < 1e-6);
        let (j, _) = classical_correlations(&bell_state(BellKind::PhiPlus)).unwrap();
        assert!((j - 1.0).abs() < 1e-6);
        let (j, angles) = classical_correlations(&classical_mixture()).unwrap();
        assert!((j - 1.0).abs() < 1e-6);
        // Z-basis measurement is optimal; θ = 0 or π are the same projector pair.
        assert!(angles.theta.min(PI - angles.theta) < 1e-3, "{angles:?}");
    }

    #[test]
    fn classical_correlation_grid_is_an_upper_bound_oracle() {
        // Any single measurement gives J_meas ≤ J; brute-force the grid.
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let rho = random_density_matrix(2, &mut rng);
        let (j, best) = classical_correlations(&rho).unwrap();
        let s_b = von_neumann_entropy(&rho.partial_trace(&[1]).unwrap());
        for t in linspace(0.0, PI, 31) {
            for p in linspace(0.0, 2.0 * PI, 31) {
                assert!(s_b - measured_conditional_entropy(&rho, t, p) <= j + 1e-9);
            }
        }
        let at_best = s_b - measured_conditional_entropy(&rho, best.theta, best.phi);
        assert!((at_best - j).abs() < 1e-9);
    }

    #[test]
    fn discord_reference_values() {
        assert!(quantum_discord(&product_state(3)).unwrap().abs() < 1e-6);
        assert!((quantum_discord(&bell_state(BellKind::PhiPlus)).unwrap() - 1.0).abs() < 1e-6);
        assert!(quantum_discord(&classical_mixture()).unwrap().abs() < 1e-6);
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let three = DensityMatrix::ground(3);
        assert!(concurrence(&three).is_err());
        assert!(entanglement_of_formation(&three).is_err());
        assert!(mutual_information(&three).is_err());
        assert!(classical_correlations(&three).is_err());
        assert!(quantum_discord(&three).is_err());
    }

    #[test]
    fn report_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let rho = random_density_matrix(2, &mut rng);
            let r = CorrelationReport::compute(&rho).unwrap();
            assert!((r.qd - (r.mutual_info - r.classical_info)).abs() < 1e-9);
            assert_eq!(r.eof == 0.0, r.concurrence == 0.0);
            assert!((0.0..=1.0).contains(&r.concurrence));
        }
    }

    #[test]
    fn metrics_are_local_unitary_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rho = composite_channel_apply(
            NoiseParams::new(0.3, 0.2).unwrap(),
            &bell_state(BellKind::PhiPlus),
            0,
        )
        .unwrap();
        let base = CorrelationReport::compute(&rho).unwrap();
        for _ in 0..5 {
            let ua = random_unitary(2, &mut rng);
            let ub = random_unitary(2, &mut rng);
            let moved = rho.apply_unitary(&kron(&ua, &ub), &[0, 1]).unwrap();
            let r = CorrelationReport::compute(&moved).unwrap();
            assert!((r.qd - base.qd).abs() < 1e-6);
            assert!((r.eof - base.eof).abs() < 1e-6);
            assert!((r.concurrence - base.concurrence).abs() < 1e-6);
            assert!((r.mutual_info - base.mutual_info).abs() < 1e-6);
            assert!((r.classical_info - base.classical_info).abs() < 1e-6);
        }
    }

    #[test]
    fn canonical_angles_give_identical_projectors() {
        for (t, p) in [(-0.4, 1.0), (4.0, 0.3), (7.5, -2.0), (PI, 6.0)] {
            let c = MeasurementAngles::canonical(t, p);
            assert!((0.0..=PI).contains(&c.theta));
            assert!((0.0..2.0 * PI).contains(&c.phi));
            let raw = MeasurementAngles { theta: t, phi: p }.projectors().0;
            assert!(raw.max_abs_diff(&c.projectors().0) < 1e-12);
        }
        assert!(MeasurementAngles::new(4.0, 0.0).is_err());
        assert!(MeasurementAngles::new(1.0, 2.0 * PI).is_err());
    }

    #[test]
    fn projectors_match_closed_form() {
        let a = MeasurementAngles::new(1.1, 0.7).unwrap();
        let (p0, p1) = a.projectors();
        let e = Complex64::from_polar(1.0, -0.7);
        let expected0 = ComplexMatrix::from_vec(
            2,
            vec![
                Complex64::new((0.55f64).cos().powi(2), 0.0),
                e * (1.1f64.sin() / 2.0),
                e.conj() * (1.1f64.sin() / 2.0),
                Complex64::new((0.55f64).sin().powi(2), 0.0),
            ],
        )
        .unwrap();
        assert!(p0.max_abs_diff(&expected0) < 1e-15);
        assert!((&p0 + &p1).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }
}
