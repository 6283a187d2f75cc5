//! Entanglement purification: two-copy DEJMPS distillation and the
//! ancilla-assisted adaptive map `ρ ↦ Tr_R U(θ₁, θ₂)(ρ ⊗ |0⟩⟨0|^⊗4)U†`.
//!
//! Adaptive layout: data qubits `d0..d3` at positions 0..3 form the pairs
//! `(d0, d1)` and `(d2, d3)`; ancillas `a0..a3` sit at 4..7. Alice holds
//! `d0`, `d2` and gets `θ₁`; Bob holds `d1`, `d3` and gets `θ₂`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{damped_bell_pair, NoiseParams};
use crate::error::{Error, Result};
use crate::gates::{cnot, ry};
use crate::metrics::CorrelationReport;
use crate::optimize::{linspace, NelderMead};
use crate::state::{bell_state, fidelity_with_pure, BellKind, DensityMatrix};
use crate::tensor::{apply_local_to_ket, qubit_shift, ComplexMatrix};

pub const NUM_DATA: usize = 4;
pub const NUM_ANCILLAS: usize = 4;
pub const ANGLE_GRID: usize = 33;
pub const ANGLE_FTOL: f64 = 1e-6;
/// Grid objective values closer than this count as ties.
pub const ANGLE_TIE_TOL: f64 = 1e-12;
/// Grid points per axis of the shared noise table (step 0.02).
pub const NOISE_TABLE_STEPS: usize = 51;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurificationAngles {
    pub theta1: f64,
    pub theta2: f64,
}

fn wrap_angle(a: f64) -> f64 {
    if (-PI..=PI).contains(&a) {
        return a;
    }
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w < -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

impl PurificationAngles {
    /// Wraps both angles into `[-π, π]`.
    pub fn new(theta1: f64, theta2: f64) -> Result<Self> {
        if !theta1.is_finite() || !theta2.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite angles ({theta1}, {theta2})"
            )));
        }
        Ok(Self {
            theta1: wrap_angle(theta1),
            theta2: wrap_angle(theta2),
        })
    }

    pub fn zero() -> Self {
        Self {
            theta1: 0.0,
            theta2: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DistillationOutcome {
    pub state: DensityMatrix,
    pub success_prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseEstimate {
    pub p_hat: f64,
    pub q_hat: f64,
    /// Distance in `(QD, EoF)` between the query and the fitted point.
    pub residual: f64,
}

impl NoiseEstimate {
    pub fn params(&self) -> NoiseParams {
        NoiseParams {
            p: self.p_hat,
            q: self.q_hat,
        }
    }
}

/// `(F', p_s)` for one DEJMPS round on Werner inputs of fidelity `f`.
pub fn dejmps_fidelity_recursion(f: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::ProbabilityOutOfRange {
            name: "f",
            value: f,
        });
    }
    let g = 1.0 - f;
    let p_s = f * f + 2.0 / 3.0 * f * g + 5.0 / 9.0 * g * g;
    Ok(((f * f + g * g / 9.0) / p_s, p_s))
}

/// Runs the bilateral circuit on `A0 B0 A1 B1` and keeps the first pair when
/// `A1`, `B1` agree. Returns the unnormalized survivor and its weight.
fn dejmps_raw(joint: &DensityMatrix, theta: f64) -> Result<(DensityMatrix, f64)> {
    let state = joint
        .apply_unitary(&ry(theta), &[0])?
        .apply_unitary(&ry(theta), &[2])?
        .apply_unitary(&ry(-theta), &[1])?
        .apply_unitary(&ry(-theta), &[3])?
        .apply_unitary(&cnot(), &[0, 2])?
        .apply_unitary(&cnot(), &[1, 3])?;
    let m = state.matrix();
    // Index bits: A0 B0 A1 B1; keep A1 == B1.
    let agree = |i: usize| (i >> 1) & 1 == i & 1;
    let mut kept = ComplexMatrix::zeros(4);
    for r in 0..16 {
        for c in 0..16 {
            if agree(r) && agree(c) && (r & 3) == (c & 3) {
                kept[(r >> 2, c >> 2)] += m[(r, c)];
            }
        }
    }
    let p = kept.trace().re;
    Ok((DensityMatrix::from_matrix_unchecked(kept), p))
}

/// Bell state the ideal circuit maps `Φ⁺ ⊗ Φ⁺` to at this angle.
fn dejmps_frame(theta: f64) -> Result<Option<BellKind>> {
    let phi = bell_state(BellKind::PhiPlus);
    let (out, p) = dejmps_raw(&phi.tensor(&phi), theta)?;
    if p <= 1e-12 {
        return Ok(None);
    }
    let mut best = (BellKind::PhiPlus, f64::NEG_INFINITY);
    for kind in BellKind::ALL {
        let f = fidelity_with_pure(&bell_state(kind), &out)? / p;
        if f > best.1 + 1e-12 {
            best = (kind, f);
        }
    }
    Ok(Some(best.0))
}

/// One DEJMPS round on `pair1 ⊗ pair2`.
///
/// The surviving pair is expressed in the frame where two perfect `Φ⁺`
/// inputs come out as `Φ⁺`: at `θ = π/2` the raw circuit returns `Ψ⁺`, so an
/// `X` on Alice's qubit is folded in.
pub fn dejmps_round(
    pair1: &DensityMatrix,
    pair2: &DensityMatrix,
    theta: f64,
) -> Result<DistillationOutcome> {
    for pair in [pair1, pair2] {
        if pair.num_qubits() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "DEJMPS takes two-qubit pairs, got {} qubit(s)",
                pair.num_qubits()
            )));
        }
        pair.validate()?;
    }
    let (kept, p) = dejmps_raw(&pair1.tensor(pair2), theta)?;
    if p <= 1e-15 {
        return Ok(DistillationOutcome {
            state: DensityMatrix::maximally_mixed(2),
            success_prob: 0.0,
        });
    }
    let mut state = DensityMatrix::from_matrix_unchecked(kept.matrix().scale_real(1.0 / p));
    if let Some(kind) = dejmps_frame(theta)? {
        state = state.apply_pauli(kind.alice_pauli(), 0)?;
    }
    Ok(DistillationOutcome {
        state,
        success_prob: p.clamp(0.0, 1.0),
    })
}

/// Gate list of the adaptive circuit as `(matrix, qubits)`, in application
/// order. State-preparation gates are not part of the map.
pub fn adaptive_gates(angles: PurificationAngles) -> Vec<(ComplexMatrix, Vec<usize>)> {
    let (t1, t2) = (angles.theta1, angles.theta2);
    let (d0, d1, d2, d3) = (0, 1, 2, 3);
    let (a0, a1, a2, a3) = (4, 5, 6, 7);
    let cx = |c: usize, t: usize| (cnot(), vec![c, t]);
    let rot = |theta: f64, q: usize| (ry(theta), vec![q]);
    vec![
        cx(d0, a0),
        rot(t1, d0),
        cx(d2, a2),
        cx(d1, a0),
        rot(t2, d1),
        rot(t1, d2),
        cx(d3, a2),
        cx(d0, a1),
        rot(-t1, d0),
        rot(t2, d3),
        cx(d2, a3),
        cx(d1, a1),
        rot(-t2, d1),
        rot(-t1, d2),
        cx(d3, a3),
        rot(-t2, d3),
    ]
}

const TOTAL_QUBITS: usize = NUM_DATA + NUM_ANCILLAS;

/// Full 256 x 256 unitary on data then ancillas.
pub fn adaptive_unitary(angles: PurificationAngles) -> ComplexMatrix {
    let dim = 1 << TOTAL_QUBITS;
    let gates = adaptive_gates(angles);
    let mut u = ComplexMatrix::zeros(dim);
    for c in 0..dim {
        let mut ket = vec![Complex64::new(0.0, 0.0); dim];
        ket[c] = Complex64::new(1.0, 0.0);
        for (g, q) in &gates {
            apply_local_to_ket(&mut ket, g, q).expect("static layout");
        }
        for (r, v) in ket.into_iter().enumerate() {
            u[(r, c)] = v;
        }
    }
    u
}

/// Kraus operators `K_a = (I ⊗ ⟨a|) U (I ⊗ |0000⟩)` of the adaptive map,
/// one per ancilla basis state.
pub fn adaptive_kraus(angles: PurificationAngles) -> Vec<ComplexMatrix> {
    let data_dim = 1 << NUM_DATA;
    let anc_dim = 1 << NUM_ANCILLAS;
    let gates = adaptive_gates(angles);
    let columns: Vec<Vec<Complex64>> = (0..data_dim)
        .map(|d| {
            let mut ket = vec![Complex64::new(0.0, 0.0); data_dim * anc_dim];
            ket[d * anc_dim] = Complex64::new(1.0, 0.0);
            for (g, q) in &gates {
                apply_local_to_ket(&mut ket, g, q).expect("static layout");
            }
            ket
        })
        .collect();
    (0..anc_dim)
        .map(|a| ComplexMatrix::from_fn(data_dim, |r, c| columns[c][r * anc_dim + a]))
        .collect()
}

/// What happens to the ancillas after the unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AncillaHandling {
    /// Partial trace.
    #[default]
    TraceOut,
    /// Computational-basis measurement with the record discarded.
    MeasureDiscard,
}

fn check_two_pairs(rho: &DensityMatrix) -> Result<()> {
    if rho.num_qubits() != NUM_DATA {
        return Err(Error::DimensionMismatch(format!(
            "adaptive purification takes two pairs (4 qubits), got {}",
            rho.num_qubits()
        )));
    }
    Ok(())
}

/// Applies the adaptive map to the joint state of two pairs.
pub fn adaptive_purify(two_pairs: &DensityMatrix, angles: PurificationAngles) -> Result<DensityMatrix> {
    check_two_pairs(two_pairs)?;
    let m = two_pairs.matrix();
    let mut out = ComplexMatrix::zeros(m.dim());
    for k in adaptive_kraus(angles) {
        out = &out + &k.matmul(m).matmul(&k.adjoint());
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Gate-by-gate simulation of the 8-qubit density matrix.
pub fn adaptive_purify_simulated(
    two_pairs: &DensityMatrix,
    angles: PurificationAngles,
    handling: AncillaHandling,
) -> Result<DensityMatrix> {
    check_two_pairs(two_pairs)?;
    let mut state = two_pairs.insert_ground_qubits(NUM_DATA, NUM_ANCILLAS)?;
    for (g, q) in adaptive_gates(angles) {
        state = state.apply_unitary(&g, &q)?;
    }
    let ancillas: Vec<usize> = (NUM_DATA..TOTAL_QUBITS).collect();
    if handling == AncillaHandling::MeasureDiscard {
        let n = state.num_qubits();
        let record = |i: usize| {
            ancillas
                .iter()
                .fold(0usize, |acc, &a| (acc << 1) | ((i >> qubit_shift(n, a)) & 1))
        };
        let m = state.matrix();
        let dephased = ComplexMatrix::from_fn(state.dim(), |r, c| {
            if record(r) == record(c) {
                m[(r, c)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        state = DensityMatrix::from_matrix_unchecked(dephased);
    }
    state.trace_out(&ancillas)
}

/// `(F₁ + F₂)/2`, each pair's fidelity with `Φ⁺`.
pub fn mean_pair_fidelity(two_pairs: &DensityMatrix) -> Result<f64> {
    check_two_pairs(two_pairs)?;
    let phi = bell_state(BellKind::PhiPlus);
    let f1 = fidelity_with_pure(&phi, &two_pairs.partial_trace(&[0, 1])?)?;
    let f2 = fidelity_with_pure(&phi, &two_pairs.partial_trace(&[2, 3])?)?;
    Ok(0.5 * (f1 + f2))
}

/// Two independent damped pairs, noise on Alice's qubits `d0`, `d2`.
pub fn noisy_two_pairs(params: NoiseParams) -> Result<DensityMatrix> {
    let pair = damped_bell_pair(params)?;
    Ok(pair.tensor(&pair))
}

fn angle_objective(input: &DensityMatrix, t1: f64, t2: f64) -> f64 {
    let angles = PurificationAngles {
        theta1: t1,
        theta2: t2,
    };
    adaptive_purify(input, angles)
        .and_then(|out| mean_pair_fidelity(&out))
        .expect("fixed 4-qubit layout")
}

/// Angles maximizing the mean pair fidelity under the estimated channel:
/// a 33 x 33 grid over `[-π, π]²`, then simplex refinement.
///
/// Grid ties (within [`ANGLE_TIE_TOL`]) go to the smaller `θ₁² + θ₂²`, then
/// smaller `θ₁`, then smaller `θ₂`.
pub fn optimize_angles(noise: &NoiseEstimate) -> Result<(PurificationAngles, f64)> {
    let params = NoiseParams::new(noise.p_hat, noise.q_hat)?;
    let input = noisy_two_pairs(params)?;
    let axis = linspace(-PI, PI, ANGLE_GRID);
    let points: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&a| axis.iter().map(move |&b| (a, b)))
        .collect();
    let values: Vec<f64> = points
        .par_iter()
        .map(|&(a, b)| angle_objective(&input, a, b))
        .collect();

    let prefer = |cand: (f64, f64), cur: (f64, f64)| {
        let (nc, nb) = (cand.0.powi(2) + cand.1.powi(2), cur.0.powi(2) + cur.1.powi(2));
        nc.total_cmp(&nb)
            .then(cand.0.total_cmp(&cur.0))
            .then(cand.1.total_cmp(&cur.1))
            .is_lt()
    };
    let mut best = 0;
    for i in 1..values.len() {
        let (v, bv) = (values[i], values[best]);
        if v > bv + ANGLE_TIE_TOL || ((v - bv).abs() <= ANGLE_TIE_TOL && prefer(points[i], points[best])) {
            best = i;
        }
    }
    let (mut t1, mut t2) = points[best];
    let mut value = values[best];

    let nm = NelderMead::new(vec![PI / 16.0, PI / 16.0], ANGLE_FTOL);
    let refined = nm.minimize(|x| -angle_objective(&input, x[0], x[1]), &[t1, t2]);
    if -refined.value > value {
        value = -refined.value;
        t1 = refined.x[0];
        t2 = refined.x[1];
    }
    Ok((PurificationAngles::new(t1, t2)?, value))
}

/// Forward map `(p, q) ↦ (QD, EoF)` of the damped pair on a regular grid.
#[derive(Debug, Clone)]
pub struct NoiseTable {
    p_values: Vec<f64>,
    q_values: Vec<f64>,
    /// Row-major over `p`, then `q`.
    points: Vec<[f64; 2]>,
}

impl NoiseTable {
    /// Evaluates the damped pair on `p_values x q_values`.
    pub fn build(p_values: Vec<f64>, q_values: Vec<f64>) -> Result<Self> {
        let grid: Vec<(f64, f64)> = p_values
            .iter()
            .flat_map(|&p| q_values.iter().map(move |&q| (p, q)))
            .collect();
        let points = grid
            .par_iter()
            .map(|&(p, q)| {
                let report = CorrelationReport::compute(&damped_bell_pair(NoiseParams::new(p, q)?)?)?;
                Ok([report.qd, report.eof])
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_points(p_values, q_values, points)
    }

    /// `steps x steps` over the unit square.
    pub fn uniform(steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 steps, got {steps}")));
        }
        let axis = linspace(0.0, 1.0, steps);
        Self::build(axis.clone(), axis)
    }

    pub fn from_points(p_values: Vec<f64>, q_values: Vec<f64>, points: Vec<[f64; 2]>) -> Result<Self> {
        if p_values.is_empty() || q_values.is_empty() || points.is_empty() {
            return Err(Error::EmptyTable);
        }
        if points.len() != p_values.len() * q_values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} table points for a {}x{} grid",
                points.len(),
                p_values.len(),
                q_values.len()
            )));
        }
        Ok(Self {
            p_values,
            q_values,
            points,
        })
    }

    /// The 51 x 51 table, built once per process.
    pub fn shared() -> &'static NoiseTable {
        static TABLE: OnceLock<NoiseTable> = OnceLock::new();
        TABLE.get_or_init(|| NoiseTable::uniform(NOISE_TABLE_STEPS).expect("static grid"))
    }

    pub fn p_values(&self) -> &[f64] {
        &self.p_values
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    /// `(QD, EoF)` at grid node `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> [f64; 2] {
        self.points[i * self.q_values.len() + j]
    }

    fn bilinear(&self, i: usize, j: usize, u: f64, v: f64) -> [f64; 2] {
        let (f00, f10, f01, f11) = (
            self.at(i, j),
            self.at(i + 1, j),
            self.at(i, j + 1),
            self.at(i + 1, j + 1),
        );
        let mut out = [0.0; 2];
        for (k, o) in out.iter_mut().enumerate() {
            *o = (1.0 - u) * (1.0 - v) * f00[k] + u * (1.0 - v) * f10[k] + (1.0 - u) * v * f01[k] + u * v * f11[k];
        }
        out
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Inverts the table at `(qd, eof)`: nearest node (ties toward smaller `p`,
/// then smaller `q`), then the best bilinear fit over the cells touching it.
pub fn estimate_noise(qd: f64, eof: f64, table: &NoiseTable) -> Result<NoiseEstimate> {
    if table.points.is_empty() {
        return Err(Error::EmptyTable);
    }
    let target = [qd, eof];
    let (np, nq) = (table.p_values.len(), table.q_values.len());
    let mut best = (0, 0, f64::INFINITY);
    for i in 0..np {
        for j in 0..nq {
            let d = distance(table.at(i, j), target);
            if d < best.2 {
                best = (i, j, d);
            }
        }
    }
    let (bi, bj, node_residual) = best;
    let mut estimate = NoiseEstimate {
        p_hat: table.p_values[bi],
        q_hat: table.q_values[bj],
        residual: node_residual,
    };

    let nm = NelderMead::new(vec![0.25, 0.25], 1e-16);
    let ci_range = bi.saturating_sub(1)..=bi.min(np.saturating_sub(2));
    for ci in ci_range {
        if ci + 1 >= np {
            continue;
        }
        for cj in bj.saturating_sub(1)..=bj.min(nq.saturating_sub(2)) {
            if cj + 1 >= nq {
                continue;
            }
            let clamp = |x: &[f64]| (x[0].clamp(0.0, 1.0), x[1].clamp(0.0, 1.0));
            let fit = nm.minimize(
                |x| {
                    let (u, v) = clamp(x);
                    distance(table.bilinear(ci, cj, u, v), target)
                },
                &[0.5, 0.5],
            );
            let (u, v) = clamp(&fit.x);
            let residual = distance(table.bilinear(ci, cj, u, v), target);
            if residual < estimate.residual {
                let lerp = |vals: &[f64], k: usize, t: f64| vals[k] + t * (vals[k + 1] - vals[k]);
                estimate = NoiseEstimate {
                    p_hat: lerp(&table.p_values, ci, u).clamp(0.0, 1.0),
                    q_hat: lerp(&table.q_values, cj, v).clamp(0.0, 1.0),
                    residual,
                };
            }
        }
    }
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_density_matrix;
    use crate::tensor::hermitian_eigenvalues;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn recursion_reference_values() {
        assert_eq!(dejmps_fidelity_recursion(1.0).unwrap(), (1.0, 1.0));
        let (f, _) = dejmps_fidelity_recursion(0.5).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
        let (f, p) = dejmps_fidelity_recursion(0.7).unwrap();
        assert!((f - 0.5 / 0.68).abs() < 1e-12);
        assert!((p - 0.68).abs() < 1e-12);
        assert!(dejmps_fidelity_recursion(1.2).is_err());
    }

    #[test]
    fn dejmps_on_perfect_pairs() {
        let phi = bell_state(BellKind::PhiPlus);
        let out = dejmps_round(&phi, &phi, PI / 2.0).unwrap();
        assert!((out.success_prob - 1.0).abs() < 1e-12);
        assert!((fidelity_with_pure(&phi, &out.state).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dejmps_circuit_matches_recursion_on_werner_inputs() {
        let phi = bell_state(BellKind::PhiPlus);
        for k in 1..20 {
            let f = 0.5 + 0.025 * k as f64;
            let w = DensityMatrix::werner_with_fidelity(f).unwrap();
            let out = dejmps_round(&w, &w, PI / 2.0).unwrap();
            let (f_next, p_s) = dejmps_fidelity_recursion(f).unwrap();
            let got = fidelity_with_pure(&phi, &out.state).unwrap();
            assert!((got - f_next).abs() < 1e-6, "F={f}: {got} vs {f_next}");
            assert!((out.success_prob - p_s).abs() < 1e-6);
            assert!(got > f);
        }
    }

    #[test]
    fn dejmps_rejects_wrong_size() {
        let phi = bell_state(BellKind::PhiPlus);
        assert!(dejmps_round(&DensityMatrix::ground(3), &phi, PI / 2.0).is_err());
    }

    #[test]
    fn angles_wrap_into_range() {
        let a = PurificationAngles::new(3.0 * PI / 2.0, -5.0 * PI / 2.0).unwrap();
        assert!((a.theta1 + PI / 2.0).abs() < 1e-12);
        assert!((a.theta2 + PI / 2.0).abs() < 1e-12);
        assert_eq!(PurificationAngles::new(PI, -PI).unwrap(), PurificationAngles { theta1: PI, theta2: -PI });
        assert!(PurificationAngles::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn unitary_is_unitary_and_angle_sensitive() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..20 {
            let a = PurificationAngles::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI)).unwrap();
            assert!(adaptive_unitary(a).is_unitary(1e-10));
        }
        assert!(adaptive_unitary(PurificationAngles::zero()).is_unitary(1e-10));
        let u1 = adaptive_unitary(PurificationAngles::new(0.3, 0.5).unwrap());
        let u2 = adaptive_unitary(PurificationAngles::new(0.4, 0.5).unwrap());
        assert!(u1.max_abs_diff(&u2) > 1e-6);
    }

    #[test]
    fn kraus_form_agrees_with_dense_unitary() {
        let angles = PurificationAngles::new(0.7, -1.3).unwrap();
        let u = adaptive_unitary(angles);
        for (a, k) in adaptive_kraus(angles).iter().enumerate() {
            for r in 0..16 {
                for c in 0..16 {
                    assert!((k[(r, c)] - u[(r * 16 + a, c * 16)]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn fast_path_matches_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..3 {
            let rho = random_density_matrix(4, &mut rng);
            let a = PurificationAngles::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI)).unwrap();
            let fast = adaptive_purify(&rho, a).unwrap();
            for handling in [AncillaHandling::TraceOut, AncillaHandling::MeasureDiscard] {
                let slow = adaptive_purify_simulated(&rho, a, handling).unwrap();
                assert!(fast.matrix().max_abs_diff(slow.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn adaptive_map_is_cptp_and_keeps_both_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..10 {
            let rho = random_density_matrix(4, &mut rng);
            let a = PurificationAngles::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI)).unwrap();
            let out = adaptive_purify(&rho, a).unwrap();
            assert_eq!(out.num_qubits(), 4);
            assert!((out.trace() - 1.0).abs() < 1e-10);
            let min = *hermitian_eigenvalues(out.matrix()).unwrap().last().unwrap();
            assert!(min >= -1e-9);
        }
        assert!(adaptive_purify(&DensityMatrix::ground(2), PurificationAngles::zero()).is_err());
    }

    #[test]
    fn zero_angles_leave_perfect_pairs_alone() {
        let phi = bell_state(BellKind::PhiPlus);
        let both = phi.tensor(&phi);
        let out = adaptive_purify(&both, PurificationAngles::zero()).unwrap();
        assert!(out.matrix().max_abs_diff(both.matrix()) < 1e-9);
    }

    #[test]
    fn zero_angles_preserve_damped_pair_fidelity() {
        let params = NoiseParams::new(0.3, 0.2).unwrap();
        let input = noisy_two_pairs(params).unwrap();
        let before = mean_pair_fidelity(&input).unwrap();
        let after = mean_pair_fidelity(&adaptive_purify(&input, PurificationAngles::zero()).unwrap()).unwrap();
        assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn optimizer_noiseless_and_deterministic() {
        let clean = NoiseEstimate {
            p_hat: 0.0,
            q_hat: 0.0,
            residual: 0.0,
        };
        let (angles, f) = optimize_angles(&clean).unwrap();
        assert_eq!(angles, PurificationAngles::zero());
        assert!((f - 1.0).abs() < 1e-12);

        let noisy = NoiseEstimate {
            p_hat: 0.1,
            q_hat: 0.1,
            residual: 0.0,
        };
        let first = optimize_angles(&noisy).unwrap();
        let second = optimize_angles(&noisy).unwrap();
        assert_eq!(first.0, second.0);
        assert_eq!(first.1, second.1);
        let baseline = fidelity_with_pure(
            &bell_state(BellKind::PhiPlus),
            &damped_bell_pair(noisy.params()).unwrap(),
        )
        .unwrap();
        assert!(first.1 >= baseline - 1e-9);
    }

    fn small_table() -> NoiseTable {
        let axis = linspace(0.0, 0.4, 21);
        NoiseTable::build(axis.clone(), axis).unwrap()
    }

    #[test]
    fn estimate_noiseless_signature() {
        let table = small_table();
        let e = estimate_noise(1.0, 1.0, &table).unwrap();
        assert_eq!((e.p_hat, e.q_hat), (0.0, 0.0));
        assert!(e.residual < 1e-9);
    }

    #[test]
    fn estimate_round_trip() {
        let table = small_table();
        let r = CorrelationReport::compute(&damped_bell_pair(NoiseParams::new(0.2, 0.1).unwrap()).unwrap()).unwrap();
        let e = estimate_noise(r.qd, r.eof, &table).unwrap();
        assert!((e.p_hat - 0.2).abs() <= 0.02 && (e.q_hat - 0.1).abs() <= 0.02, "{e:?}");
    }

    #[test]
    fn empty_table_is_rejected() {
        assert!(matches!(
            NoiseTable::from_points(vec![], vec![], vec![]),
            Err(Error::EmptyTable)
        ));
    }
}
