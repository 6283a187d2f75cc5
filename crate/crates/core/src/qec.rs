//! The [[5,1,3]] perfect code: encoding, syndrome extraction, correction and
//! decoding on density matrices.
//!
//! Encoded blocks are five consecutive or arbitrary qubit positions; the
//! encoder takes the logical qubit first and four `|0⟩` ancillas after it.

use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::gates::{controlled, hadamard, Pauli};
use crate::state::DensityMatrix;
use crate::tensor::{kron_all, qubit_shift, ComplexMatrix};

pub const CODE_LENGTH: usize = 5;
pub const NUM_GENERATORS: usize = 4;
pub const NUM_SYNDROMES: usize = 1 << NUM_GENERATORS;
/// Ancilla `|0⟩` population accepted before encoding or syndrome extraction.
pub const ANCILLA_TOL: f64 = 1e-9;

/// Global phase `i^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    fn from_power(k: u8) -> Self {
        match k % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    fn power(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn value(self) -> Complex64 {
        match self {
            Phase::PlusOne => Complex64::new(1.0, 0.0),
            Phase::PlusI => Complex64::new(0.0, 1.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

/// `P Q = i^k R` for single-qubit Paulis.
fn multiply_single(a: Pauli, b: Pauli) -> (u8, Pauli) {
    use Pauli::*;
    match (a, b) {
        (I, p) | (p, I) => (0, p),
        (X, X) | (Y, Y) | (Z, Z) => (0, I),
        (X, Y) => (1, Z),
        (Y, X) => (3, Z),
        (Y, Z) => (1, X),
        (Z, Y) => (3, X),
        (Z, X) => (1, Y),
        (X, Z) => (3, Y),
    }
}

/// Tensor product of single-qubit Paulis with a global phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    pub ops: Vec<Pauli>,
    pub phase: Phase,
}

impl PauliString {
    pub fn identity(len: usize) -> Self {
        Self {
            ops: vec![Pauli::I; len],
            phase: Phase::PlusOne,
        }
    }

    pub fn single(len: usize, qubit: usize, pauli: Pauli) -> Self {
        let mut s = Self::identity(len);
        s.ops[qubit] = pauli;
        s
    }

    /// Parses a string such as `"XZZXI"`.
    pub fn parse(text: &str) -> Result<Self> {
        let ops = text
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidArgument(format!("not a Pauli symbol: {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ops,
            phase: Phase::PlusOne,
        })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.ops.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// Symplectic commutation test.
    pub fn commutes_with(&self, other: &Self) -> bool {
        let anti = self
            .ops
            .iter()
            .zip(&other.ops)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "Pauli strings of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        let mut power = self.phase.power() + other.phase.power();
        let ops = self
            .ops
            .iter()
            .zip(&other.ops)
            .map(|(&a, &b)| {
                let (k, p) = multiply_single(a, b);
                power += k;
                p
            })
            .collect();
        Ok(Self {
            ops,
            phase: Phase::from_power(power),
        })
    }

    /// Dense `2^n x 2^n` matrix including the phase.
    pub fn matrix(&self) -> ComplexMatrix {
        let mats: Vec<ComplexMatrix> = self.ops.iter().map(|p| p.matrix()).collect();
        kron_all(&mats).scale(self.phase.value())
    }

    /// `P ρ P†` on the listed qubits; the global phase drops out.
    pub fn conjugate(&self, rho: &DensityMatrix, qubits: &[usize]) -> Result<DensityMatrix> {
        if qubits.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit Pauli string on {} qubit(s)",
                self.len(),
                qubits.len()
            )));
        }
        let mut out = rho.clone();
        for (&p, &q) in self.ops.iter().zip(qubits) {
            if p != Pauli::I {
                out = out.apply_pauli(p, q)?;
            }
        }
        Ok(out)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.phase {
            Phase::PlusOne => "",
            Phase::PlusI => "i",
            Phase::MinusOne => "-",
            Phase::MinusI => "-i",
        };
        write!(f, "{sign}")?;
        for p in &self.ops {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

/// Four syndrome bits; bit `i` is set when the error anticommutes with
/// generator `i` (eigenvalue `-1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Syndrome {
    pub bits: [bool; NUM_GENERATORS],
}

impl Syndrome {
    pub const TRIVIAL: Syndrome = Syndrome {
        bits: [false; NUM_GENERATORS],
    };

    /// Inverse of [`Syndrome::index`]; bit 0 is the most significant.
    pub fn from_index(index: usize) -> Self {
        assert!(index < NUM_SYNDROMES, "syndrome index {index} out of range");
        let mut bits = [false; NUM_GENERATORS];
        for (i, b) in bits.iter_mut().enumerate() {
            *b = (index >> (NUM_GENERATORS - 1 - i)) & 1 == 1;
        }
        Self { bits }
    }

    pub fn index(&self) -> usize {
        self.bits
            .iter()
            .fold(0, |acc, &b| (acc << 1) | usize::from(b))
    }

    pub fn is_trivial(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", u8::from(b))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct StabilizerCode {
    pub generators: [PauliString; NUM_GENERATORS],
    pub logical_x: PauliString,
    pub logical_z: PauliString,
    /// Correction indexed by [`Syndrome::index`].
    pub syndrome_table: Vec<PauliString>,
    encoder: ComplexMatrix,
}

/// Builds the five-qubit code and its lookup table.
pub fn build_code() -> StabilizerCode {
    let parse = |s: &str| PauliString::parse(s).expect("static Pauli string");
    let generators = [
        parse("XZZXI"),
        parse("IXZZX"),
        parse("XIXZZ"),
        parse("ZXIXZ"),
    ];
    let mut table: Vec<Option<PauliString>> = vec![None; NUM_SYNDROMES];
    table[0] = Some(PauliString::identity(CODE_LENGTH));
    for q in 0..CODE_LENGTH {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let e = PauliString::single(CODE_LENGTH, q, p);
            let s = syndrome_against(&generators, &e);
            assert!(table[s.index()].is_none(), "syndrome collision for {e}");
            table[s.index()] = Some(e);
        }
    }
    let syndrome_table: Vec<PauliString> = table
        .into_iter()
        .map(|e| e.expect("15 single-qubit errors fill the 15 nonzero syndromes"))
        .collect();
    let logical_x = parse("XXXXX");
    let logical_z = parse("ZZZZZ");
    let encoder = build_encoder(&generators, &logical_x, &syndrome_table);
    StabilizerCode {
        generators,
        logical_x,
        logical_z,
        syndrome_table,
        encoder,
    }
}

/// Shared instance built on first use.
pub fn five_qubit_code() -> &'static StabilizerCode {
    static CODE: OnceLock<StabilizerCode> = OnceLock::new();
    CODE.get_or_init(build_code)
}

fn syndrome_against(generators: &[PauliString; NUM_GENERATORS], error: &PauliString) -> Syndrome {
    let mut bits = [false; NUM_GENERATORS];
    for (b, g) in bits.iter_mut().zip(generators) {
        *b = !g.commutes_with(error);
    }
    Syndrome { bits }
}

/// `Π (I + gᵢ)/2`.
fn codespace_projector_of(generators: &[PauliString; NUM_GENERATORS]) -> ComplexMatrix {
    let dim = 1 << CODE_LENGTH;
    let mut p = ComplexMatrix::identity(dim);
    for g in generators {
        let factor = (&ComplexMatrix::identity(dim) + &g.matrix()).scale_real(0.5);
        p = p.matmul(&factor);
    }
    p
}

/// `U = Σ_{b,s} E_s X_L^b |0_L⟩⟨b, s|`: logical bit in the input's leading
/// qubit, syndrome `s` on the four ancillas (most significant first).
fn build_encoder(
    generators: &[PauliString; NUM_GENERATORS],
    logical_x: &PauliString,
    table: &[PauliString],
) -> ComplexMatrix {
    let dim = 1 << CODE_LENGTH;
    let projector = codespace_projector_of(generators);
    let mut zero_l: Vec<Complex64> = (0..dim).map(|r| projector[(r, 0)]).collect();
    let norm = zero_l.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut zero_l {
        *z /= norm;
    }
    let one_l = logical_x.matrix().mul_vec(&zero_l);
    let mut u = ComplexMatrix::zeros(dim);
    for (b, logical) in [&zero_l, &one_l].into_iter().enumerate() {
        for (s, correction) in table.iter().enumerate() {
            let column = correction.matrix().mul_vec(logical);
            let c = b * NUM_SYNDROMES + s;
            for (r, v) in column.into_iter().enumerate() {
                u[(r, c)] = v;
            }
        }
    }
    u
}

fn check_block(rho: &DensityMatrix, qubits: &[usize], expected: usize) -> Result<()> {
    if qubits.len() != expected {
        return Err(Error::DimensionMismatch(format!(
            "expected {expected} qubit positions, got {}",
            qubits.len()
        )));
    }
    for (i, &q) in qubits.iter().enumerate() {
        rho.check_qubit(q)?;
        if qubits[..i].contains(&q) {
            return Err(Error::DuplicateTarget(q));
        }
    }
    Ok(())
}

fn check_ground(rho: &DensityMatrix, ancillas: &[usize]) -> Result<()> {
    let overlap = rho.ground_overlap(ancillas)?;
    if (1.0 - overlap).abs() > ANCILLA_TOL {
        return Err(Error::AncillaNotGround { overlap });
    }
    Ok(())
}

impl StabilizerCode {
    pub fn syndrome_of(&self, error: &PauliString) -> Syndrome {
        syndrome_against(&self.generators, error)
    }

    pub fn correction(&self, syndrome: Syndrome) -> &PauliString {
        &self.syndrome_table[syndrome.index()]
    }

    pub fn codespace_projector(&self) -> ComplexMatrix {
        codespace_projector_of(&self.generators)
    }

    /// `Π (I + (-1)^{sᵢ} gᵢ)/2`.
    pub fn syndrome_projector(&self, syndrome: Syndrome) -> ComplexMatrix {
        let dim = 1 << CODE_LENGTH;
        let mut p = ComplexMatrix::identity(dim);
        for (g, &bit) in self.generators.iter().zip(&syndrome.bits) {
            let sign = if bit { -0.5 } else { 0.5 };
            let factor = &ComplexMatrix::identity(dim).scale_real(0.5) + &g.matrix().scale_real(sign);
            p = p.matmul(&factor);
        }
        p
    }

    /// 32 x 32 encoding unitary; input order is logical qubit then ancillas.
    pub fn encoder(&self) -> &ComplexMatrix {
        &self.encoder
    }

    /// Encodes the block's leading qubit using the following four, which
    /// must be in `|0⟩`.
    pub fn encode_block(&self, rho: &DensityMatrix, block: &[usize]) -> Result<DensityMatrix> {
        check_block(rho, block, CODE_LENGTH)?;
        check_ground(rho, &block[1..])?;
        rho.apply_unitary(&self.encoder, block)
    }

    /// Inserts four `|0⟩` ancillas right after `qubit` and encodes it; the
    /// code block occupies `qubit..qubit + 5` in the result.
    pub fn encode(&self, rho: &DensityMatrix, qubit: usize) -> Result<DensityMatrix> {
        rho.check_qubit(qubit)?;
        let widened = rho.insert_ground_qubits(qubit + 1, CODE_LENGTH - 1)?;
        let block: Vec<usize> = (qubit..qubit + CODE_LENGTH).collect();
        self.encode_block(&widened, &block)
    }

    /// Inverse encoder on the block, then traces out its last four qubits.
    pub fn decode_block(&self, rho: &DensityMatrix, block: &[usize]) -> Result<DensityMatrix> {
        check_block(rho, block, CODE_LENGTH)?;
        let unwound = rho.apply_unitary(&self.encoder.adjoint(), block)?;
        unwound.trace_out(&block[1..])
    }

    /// [`StabilizerCode::decode_block`] for the block starting at `qubit`.
    pub fn decode(&self, rho: &DensityMatrix, qubit: usize) -> Result<DensityMatrix> {
        let block: Vec<usize> = (qubit..qubit + CODE_LENGTH).collect();
        self.decode_block(rho, &block)
    }

    /// `⟨gᵢ⟩` on the block.
    pub fn generator_expectations(
        &self,
        rho: &DensityMatrix,
        block: &[usize],
    ) -> Result<[f64; NUM_GENERATORS]> {
        check_block(rho, block, CODE_LENGTH)?;
        let mut out = [0.0; NUM_GENERATORS];
        for (e, g) in out.iter_mut().zip(&self.generators) {
            *e = pauli_expectation(rho, g, block);
        }
        Ok(out)
    }

    /// Syndrome read off the generator expectations; `None` unless every
    /// expectation is `±1` within `tol`.
    pub fn deterministic_syndrome(
        &self,
        rho: &DensityMatrix,
        block: &[usize],
        tol: f64,
    ) -> Result<Option<Syndrome>> {
        let exps = self.generator_expectations(rho, block)?;
        let mut bits = [false; NUM_GENERATORS];
        for (b, &e) in bits.iter_mut().zip(&exps) {
            if (e - 1.0).abs() <= tol {
                *b = false;
            } else if (e + 1.0).abs() <= tol {
                *b = true;
            } else {
                return Ok(None);
            }
        }
        Ok(Some(Syndrome { bits }))
    }

    /// Ancilla-coupled syndrome extraction: for generator `i`, H on
    /// `ancillas[i]`, controlled Paulis onto the block, H again; then a
    /// projective Z measurement of all ancillas sampled from `seed`. The
    /// ancillas are traced out of the returned state.
    pub fn measure_syndrome(
        &self,
        rho: &DensityMatrix,
        block: &[usize],
        ancillas: &[usize],
        seed: u64,
    ) -> Result<(Syndrome, DensityMatrix)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.measure_syndrome_with(rho, block, ancillas, &mut rng)
    }

    pub fn measure_syndrome_with(
        &self,
        rho: &DensityMatrix,
        block: &[usize],
        ancillas: &[usize],
        rng: &mut impl Rng,
    ) -> Result<(Syndrome, DensityMatrix)> {
        if ancillas.len() != NUM_GENERATORS {
            return Err(Error::AncillaCountMismatch {
                expected: NUM_GENERATORS,
                found: ancillas.len(),
            });
        }
        let all: Vec<usize> = block.iter().chain(ancillas).copied().collect();
        check_block(rho, &all, CODE_LENGTH + NUM_GENERATORS)?;
        check_ground(rho, ancillas)?;

        let h = hadamard();
        let mut state = rho.clone();
        for (g, &a) in self.generators.iter().zip(ancillas) {
            state = state.apply_unitary(&h, &[a])?;
            for (&p, &q) in g.ops.iter().zip(block) {
                if p != Pauli::I {
                    state = state.apply_unitary(&controlled(&p.matrix()), &[a, q])?;
                }
            }
            state = state.apply_unitary(&h, &[a])?;
        }

        let n = state.num_qubits();
        let outcome_of = |i: usize| {
            ancillas
                .iter()
                .fold(0usize, |acc, &a| (acc << 1) | ((i >> qubit_shift(n, a)) & 1))
        };
        let mut probs = [0.0; NUM_SYNDROMES];
        for i in 0..state.dim() {
            probs[outcome_of(i)] += state.matrix()[(i, i)].re;
        }
        let draw: f64 = rng.random();
        let total: f64 = probs.iter().sum();
        let mut acc = 0.0;
        let mut outcome = NUM_SYNDROMES - 1;
        for (s, &p) in probs.iter().enumerate() {
            acc += p / total;
            if draw < acc {
                outcome = s;
                break;
            }
        }
        while probs[outcome] <= 0.0 && outcome > 0 {
            outcome -= 1;
        }

        let p = probs[outcome];
        let m = state.matrix();
        let projected = ComplexMatrix::from_fn(state.dim(), |r, c| {
            if outcome_of(r) == outcome && outcome_of(c) == outcome {
                m[(r, c)] / p
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let post = DensityMatrix::from_matrix_unchecked(projected).trace_out(ancillas)?;
        Ok((Syndrome::from_index(outcome), post))
    }

    /// Applies the table correction for `syndrome` to the block.
    pub fn correct(
        &self,
        rho: &DensityMatrix,
        syndrome: Syndrome,
        block: &[usize],
    ) -> Result<DensityMatrix> {
        check_block(rho, block, CODE_LENGTH)?;
        self.correction(syndrome).conjugate(rho, block)
    }

    /// Syndrome extraction and correction averaged over outcomes:
    /// `Σ_s C_s P_s ρ P_s C_s†`.
    pub fn recover_averaged(&self, rho: &DensityMatrix, block: &[usize]) -> Result<DensityMatrix> {
        check_block(rho, block, CODE_LENGTH)?;
        self.recovery_channel().apply(rho, block)
    }

    /// Kraus form of [`StabilizerCode::recover_averaged`].
    pub fn recovery_channel(&self) -> KrausChannel {
        let ops = (0..NUM_SYNDROMES)
            .map(|s| {
                let syndrome = Syndrome::from_index(s);
                self.correction(syndrome)
                    .matrix()
                    .matmul(&self.syndrome_projector(syndrome))
            })
            .collect();
        KrausChannel::new(ops, "five-qubit recovery").expect("syndrome projectors resolve identity")
    }
}

/// `Tr(ρ P)` for a Pauli string on `qubits`.
pub fn pauli_expectation(rho: &DensityMatrix, pauli: &PauliString, qubits: &[usize]) -> f64 {
    let n = rho.num_qubits();
    let mut flip = 0usize;
    let mut zmask = 0usize;
    let mut y_count = 0u32;
    for (&p, &q) in pauli.ops.iter().zip(qubits) {
        let bit = 1 << qubit_shift(n, q);
        let (x, z) = p.xz();
        if x {
            flip |= bit;
        }
        if z {
            zmask |= bit;
        }
        if p == Pauli::Y {
            y_count += 1;
        }
    }
    // P|c⟩ = phase · i^{#Y} (-1)^{popcount(c & zmask)} |c ^ flip⟩, Y = iXZ.
    let base = pauli.phase.value() * Complex64::new(0.0, 1.0).powu(y_count);
    let m = rho.matrix();
    let mut acc = Complex64::new(0.0, 0.0);
    for c in 0..rho.dim() {
        let sign = if (c & zmask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        acc += m[(c, c ^ flip)] * sign;
    }
    (acc * base).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{bell_state, fidelity, fidelity_with_pure, BellKind};
    use crate::tensor::embed;

    fn code() -> &'static StabilizerCode {
        five_qubit_code()
    }

    fn encoded(ket_index: usize) -> DensityMatrix {
        code()
            .encode(&DensityMatrix::basis(1, ket_index), 0)
            .unwrap()
    }

    #[test]
    fn generators_commute_and_square_to_identity() {
        let c = code();
        for a in &c.generators {
            let sq = a.multiply(a).unwrap();
            assert!(sq.is_identity() && sq.phase == Phase::PlusOne);
            for b in &c.generators {
                assert!(a.commutes_with(b));
                let ab = a.matrix().matmul(&b.matrix());
                let ba = b.matrix().matmul(&a.matrix());
                assert!(ab.max_abs_diff(&ba) < 1e-12);
            }
        }
        assert!(!c.logical_x.commutes_with(&c.logical_z));
        for g in &c.generators {
            assert!(g.commutes_with(&c.logical_x) && g.commutes_with(&c.logical_z));
        }
    }

    #[test]
    fn syndrome_table_reference_entries() {
        let c = code();
        assert!(c.syndrome_table[0].is_identity());
        let x0 = PauliString::single(5, 0, Pauli::X);
        assert_eq!(c.syndrome_of(&x0).to_string(), "0001");
        let z0 = PauliString::single(5, 0, Pauli::Z);
        assert_eq!(c.syndrome_of(&z0).to_string(), "1010");
        assert_eq!(c.syndrome_of(&PauliString::identity(5)), Syndrome::TRIVIAL);
        let mut seen = std::collections::HashSet::new();
        for e in &c.syndrome_table[1..] {
            assert_eq!(e.weight(), 1);
            assert!(seen.insert(c.syndrome_of(e)));
        }
        assert_eq!(seen.len(), 15);
    }

    #[test]
    fn pauli_products_track_phase() {
        let x = PauliString::parse("X").unwrap();
        let y = PauliString::parse("Y").unwrap();
        let xy = x.multiply(&y).unwrap();
        assert_eq!(xy.to_string(), "iZ");
        assert!(xy.matrix().max_abs_diff(&x.matrix().matmul(&y.matrix())) < 1e-15);
        assert!(PauliString::parse("XQ").is_err());
    }

    #[test]
    fn syndrome_index_roundtrip() {
        for i in 0..NUM_SYNDROMES {
            assert_eq!(Syndrome::from_index(i).index(), i);
        }
        assert_eq!(Syndrome::from_index(1).bits, [false, false, false, true]);
    }

    #[test]
    fn encoder_is_unitary_and_hits_codespace() {
        let c = code();
        assert!(c.encoder().is_unitary(1e-12));
        let rho = encoded(0);
        for g in &c.generators {
            assert!((pauli_expectation(&rho, g, &[0, 1, 2, 3, 4]) - 1.0).abs() < 1e-12);
        }
        assert!((pauli_expectation(&rho, &c.logical_z, &[0, 1, 2, 3, 4]) - 1.0).abs() < 1e-12);
        let one = encoded(1);
        assert!((pauli_expectation(&one, &c.logical_z, &[0, 1, 2, 3, 4]) + 1.0).abs() < 1e-12);
        // Projector oracle: Tr(Π ρ) = 1.
        let proj = c.codespace_projector();
        let lifted = rho.matrix().matmul(&proj);
        assert!((lifted.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn logical_operators_act_on_encoded_states() {
        let c = code();
        let block = [0, 1, 2, 3, 4];
        let flipped = c.logical_x.conjugate(&encoded(0), &block).unwrap();
        assert!(flipped.matrix().max_abs_diff(encoded(1).matrix()) < 1e-12);
    }

    #[test]
    fn pauli_expectation_matches_dense_trace() {
        let c = code();
        let plus = DensityMatrix::from_ket(&[
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2),
        ])
        .unwrap();
        let rho = c.encode(&plus, 0).unwrap();
        for s in ["YZIXY", "XXXXX", "ZYZYI"] {
            let p = PauliString::parse(s).unwrap();
            let dense = rho.matrix().matmul(&p.matrix()).trace().re;
            assert!((pauli_expectation(&rho, &p, &[0, 1, 2, 3, 4]) - dense).abs() < 1e-12);
        }
    }

    #[test]
    fn encode_rejects_excited_ancilla() {
        let rho = DensityMatrix::basis(5, 0b00010);
        assert!(matches!(
            code().encode_block(&rho, &[0, 1, 2, 3, 4]),
            Err(Error::AncillaNotGround { .. })
        ));
    }

    #[test]
    fn encode_decode_roundtrip_on_bell_half() {
        let c = code();
        let phi = bell_state(BellKind::PhiPlus);
        let enc = c.encode(&phi, 0).unwrap();
        assert_eq!(enc.num_qubits(), 6);
        let dec = c.decode(&enc, 0).unwrap();
        assert!(fidelity_with_pure(&phi, &dec).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn measured_syndromes_match_commutation() {
        let c = code();
        let block = [0, 1, 2, 3, 4];
        let ancillas = [5, 6, 7, 8];
        let base = encoded(0);
        for (err, expected) in [
            (PauliString::identity(5), "0000"),
            (PauliString::single(5, 0, Pauli::X), "0001"),
            (PauliString::single(5, 0, Pauli::Z), "1010"),
        ] {
            let hit = err.conjugate(&base, &block).unwrap();
            let wide = hit.insert_ground_qubits(5, 4).unwrap();
            for seed in 0..3 {
                let (s, post) = c.measure_syndrome(&wide, &block, &ancillas, seed).unwrap();
                assert_eq!(s.to_string(), expected);
                assert!(post.matrix().max_abs_diff(hit.matrix()) < 1e-10);
            }
            let shortcut = c.deterministic_syndrome(&hit, &block, 1e-9).unwrap();
            assert_eq!(shortcut.map(|s| s.to_string()).as_deref(), Some(expected));
        }
    }

    #[test]
    fn measure_syndrome_checks_ancillas() {
        let c = code();
        let wide = encoded(0).insert_ground_qubits(5, 4).unwrap();
        assert!(matches!(
            c.measure_syndrome(&wide, &[0, 1, 2, 3, 4], &[5, 6, 7], 0),
            Err(Error::AncillaCountMismatch { expected: 4, found: 3 })
        ));
    }

    #[test]
    fn every_single_pauli_is_corrected_on_bell_half() {
        let c = code();
        let phi = bell_state(BellKind::PhiPlus);
        let enc = c.encode(&phi, 0).unwrap();
        let block = [0, 1, 2, 3, 4];
        for e in &c.syndrome_table[1..] {
            let hit = e.conjugate(&enc, &block).unwrap();
            let s = c.deterministic_syndrome(&hit, &block, 1e-9).unwrap().unwrap();
            let fixed = c.correct(&hit, s, &block).unwrap();
            assert!(fixed.matrix().max_abs_diff(enc.matrix()) < 1e-10);
            let dec = c.decode(&fixed, 0).unwrap();
            assert!(fidelity(&phi, &dec).unwrap() > 1.0 - 1e-9, "{e}");
        }
    }

    #[test]
    fn averaged_recovery_fixes_single_errors_and_is_trace_preserving() {
        let c = code();
        assert!(c.recovery_channel().completeness_defect() < 1e-12);
        let block = [0, 1, 2, 3, 4];
        let enc = encoded(1);
        for e in &c.syndrome_table {
            let hit = e.conjugate(&enc, &block).unwrap();
            let fixed = c.recover_averaged(&hit, &block).unwrap();
            assert!(fixed.matrix().max_abs_diff(enc.matrix()) < 1e-10);
        }
    }

    #[test]
    fn syndrome_projectors_resolve_identity() {
        let c = code();
        let mut sum = ComplexMatrix::zeros(32);
        for s in 0..NUM_SYNDROMES {
            sum = &sum + &c.syndrome_projector(Syndrome::from_index(s));
        }
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(32)) < 1e-12);
        let full = embed(&c.codespace_projector(), &[0, 1, 2, 3, 4], 5).unwrap();
        assert!(full.max_abs_diff(&c.syndrome_projector(Syndrome::TRIVIAL)) < 1e-12);
    }
}
