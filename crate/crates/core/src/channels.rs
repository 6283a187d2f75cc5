//! Kraus-operator noise channels.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{bell_state, BellKind, DensityMatrix};
use crate::tensor::{self, kron, ComplexMatrix};

/// Completeness tolerance for `Σ K†K = I`.
pub const COMPLETENESS_TOL: f64 = 1e-12;

/// Amplitude- and phase-damping strengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub p: f64,
    pub q: f64,
}

impl NoiseParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        check_probability("p", p)?;
        check_probability("q", q)?;
        Ok(Self { p, q })
    }

    pub fn noiseless() -> Self {
        Self { p: 0.0, q: 0.0 }
    }
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::ProbabilityOutOfRange { name, value });
    }
    Ok(())
}

/// Ordered Kraus family satisfying the completeness relation.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<ComplexMatrix>,
    label: String,
}

impl KrausChannel {
    pub fn new(operators: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidArgument("channel needs at least one operator".into()))?;
        let dim = first.dim();
        if operators.iter().any(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch(
                "Kraus operators differ in dimension".into(),
            ));
        }
        let channel = Self {
            operators,
            label: label.into(),
        };
        let defect = channel.completeness_defect();
        if defect > COMPLETENESS_TOL {
            return Err(Error::NotTracePreserving { defect });
        }
        Ok(channel)
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self {
            operators: vec![ComplexMatrix::identity(1 << num_qubits)],
            label: "identity".into(),
        }
    }

    /// Energy loss with probability `p`.
    pub fn amplitude_damping(p: f64) -> Result<Self> {
        check_probability("p", p)?;
        let a0 = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - p).sqrt()]]);
        let a1 = ComplexMatrix::from_real_rows(&[&[0.0, p.sqrt()], &[0.0, 0.0]]);
        Self::new(vec![a0, a1], format!("amplitude_damping(p={p})"))
    }

    /// Loss of coherence with probability `q`.
    pub fn phase_damping(q: f64) -> Result<Self> {
        check_probability("q", q)?;
        let p0 = ComplexMatrix::identity(2).scale_real((1.0 - q).sqrt());
        let p1 = ComplexMatrix::real_diagonal(&[q.sqrt(), 0.0]);
        let p2 = ComplexMatrix::real_diagonal(&[0.0, q.sqrt()]);
        Self::new(vec![p0, p1, p2], format!("phase_damping(q={q})"))
    }

    /// `½(AD∘PD + PD∘AD)` as one family: every product `A_i P_j` and
    /// `P_j A_i`, each scaled by `1/√2`.
    pub fn composite(params: NoiseParams) -> Result<Self> {
        let ad = Self::amplitude_damping(params.p)?;
        let pd = Self::phase_damping(params.q)?;
        let mut ops = Vec::with_capacity(2 * ad.len() * pd.len());
        for a in &ad.operators {
            for d in &pd.operators {
                ops.push(a.matmul(d).scale_real(FRAC_1_SQRT_2));
            }
        }
        for d in &pd.operators {
            for a in &ad.operators {
                ops.push(d.matmul(a).scale_real(FRAC_1_SQRT_2));
            }
        }
        Self::new(
            ops,
            format!("composite(p={}, q={})", params.p, params.q),
        )
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// Operator dimension.
    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    /// `max |Σ K†K - I|`.
    pub fn completeness_defect(&self) -> f64 {
        let dim = self.dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for k in &self.operators {
            sum = &sum + &k.adjoint().matmul(k);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(dim))
    }

    /// `Σ K ρ K†` with the operators embedded on `targets`.
    pub fn apply(&self, rho: &DensityMatrix, targets: &[usize]) -> Result<DensityMatrix> {
        if self.dim() != 1 << targets.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}-dimensional channel on {} target qubit(s)",
                self.dim(),
                targets.len()
            )));
        }
        let mut out = ComplexMatrix::zeros(rho.dim());
        for k in &self.operators {
            let mut term = rho.matrix().clone();
            tensor::conjugate_local(&mut term, k, targets)?;
            out = &out + &term;
        }
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }

    /// `(E ⊗ id)(Σ_ij |i⟩⟨j| ⊗ |i⟩⟨j|)`, channel output as the leading factor.
    pub fn choi_matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut unit = ComplexMatrix::zeros(d);
                unit[(i, j)] = tensor::ONE;
                let mut image = ComplexMatrix::zeros(d);
                for k in &self.operators {
                    image = &image + &k.matmul(&unit).matmul(&k.adjoint());
                }
                out = &out + &kron(&image, &unit);
            }
        }
        out
    }
}

/// Applies `channel` to the listed qubits of `rho`.
pub fn apply_channel(
    channel: &KrausChannel,
    rho: &DensityMatrix,
    targets: &[usize],
) -> Result<DensityMatrix> {
    channel.apply(rho, targets)
}

/// Composite damping on one qubit, identity elsewhere.
pub fn composite_channel_apply(
    params: NoiseParams,
    rho: &DensityMatrix,
    target: usize,
) -> Result<DensityMatrix> {
    rho.check_qubit(target)?;
    KrausChannel::composite(params)?.apply(rho, &[target])
}

/// `(E ⊗ I)|Φ⁺⟩⟨Φ⁺|` with composite damping on the first qubit.
pub fn damped_bell_pair(params: NoiseParams) -> Result<DensityMatrix> {
    composite_channel_apply(params, &bell_state(BellKind::PhiPlus), 0)
}
