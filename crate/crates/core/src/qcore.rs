//! Finite-dimensional pure-state quantum mechanics for one to three qubits.
//!
//! Qubit 0 is the leftmost label: in `|x0 x1 x2>` qubit 0 owns the most
//! significant bit of the amplitude index. All values are immutable; every
//! operation returns a fresh state.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_8};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Amplitude type used throughout the crate.
pub type ComplexAmplitude = Complex64;

pub const MAX_QUBITS: usize = 3;
const MAX_DIM: usize = 1 << MAX_QUBITS;

/// Normalization slack accepted by the constructors before renormalizing.
pub const NORMALIZE_SLACK: f64 = 1e-6;
/// Tolerance for state invariants (normalization, orthogonality, overlap).
pub const STATE_TOL: f64 = 1e-9;
/// Tolerance for algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("amplitude vector has zero norm or is too far from normalized (norm^2 = {0})")]
    NonNormalizable(f64),
    #[error("bad dimension: {0}")]
    BadDimension(String),
    #[error("target qubit {target} out of range for a {num_qubits}-qubit state")]
    BadTarget { target: usize, num_qubits: usize },
    #[error("non-finite amplitude")]
    NonFinite,
    #[error("randomness {0} outside [0, 1)")]
    BadRandomness(f64),
    #[error("matrix for gate {0} is not unitary")]
    NotUnitary(String),
    #[error("basis {0} is not orthonormal")]
    NotOrthonormal(String),
}

pub type QResult<T> = Result<T, QError>;

/// A normalized pure state of 1 to 3 qubits.
#[derive(Clone, Copy, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amps: [Complex64; MAX_DIM],
}

impl PureState {
    /// Builds a state from a dense amplitude vector whose length is a power of two
    /// between 2 and 8. Inputs within [`NORMALIZE_SLACK`] of unit norm are
    /// renormalized; anything further off is rejected.
    pub fn from_amplitudes(amplitudes: &[Complex64]) -> QResult<Self> {
        let len = amplitudes.len();
        if !(2..=MAX_DIM).contains(&len) || !len.is_power_of_two() {
            return Err(QError::BadDimension(format!(
                "amplitude vector length {len} is not 2, 4 or 8"
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QError::NonFinite);
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq == 0.0 || (norm_sq - 1.0).abs() > NORMALIZE_SLACK {
            return Err(QError::NonNormalizable(norm_sq));
        }
        let scale = norm_sq.sqrt().recip();
        let mut amps = [ZERO; MAX_DIM];
        for (dst, src) in amps.iter_mut().zip(amplitudes) {
            *dst = src * scale;
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// Builds a state from `(label, amplitude)` pairs such as `("000", a)`.
    ///
    /// All labels must have the same length (the qubit count); repeated labels
    /// accumulate.
    pub fn from_labels(terms: &[(&str, Complex64)]) -> QResult<Self> {
        let Some((first, _)) = terms.first() else {
            return Err(QError::BadDimension("no basis-state terms".into()));
        };
        let n = first.len();
        if n == 0 || n > MAX_QUBITS {
            return Err(QError::BadDimension(format!("label width {n} not in 1..=3")));
        }
        let mut dense = vec![ZERO; 1 << n];
        for (label, amp) in terms {
            if label.len() != n {
                return Err(QError::BadDimension(format!(
                    "label {label:?} has width {} but expected {n}",
                    label.len()
                )));
            }
            let mut idx = 0usize;
            for ch in label.chars() {
                idx <<= 1;
                match ch {
                    '0' => {}
                    '1' => idx |= 1,
                    other => {
                        return Err(QError::BadDimension(format!(
                            "label character {other:?} is not a bit"
                        )))
                    }
                }
            }
            dense[idx] += amp;
        }
        Self::from_amplitudes(&dense)
    }

    /// Computational basis state `|index>` on `num_qubits` qubits.
    pub fn basis(num_qubits: usize, index: usize) -> QResult<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(QError::BadDimension(format!("{num_qubits} qubits")));
        }
        if index >= 1 << num_qubits {
            return Err(QError::BadDimension(format!("basis index {index}")));
        }
        let mut amps = [ZERO; MAX_DIM];
        amps[index] = ONE;
        Ok(Self { num_qubits, amps })
    }

    fn single(a0: Complex64, a1: Complex64) -> Self {
        let mut amps = [ZERO; MAX_DIM];
        amps[0] = a0;
        amps[1] = a1;
        Self { num_qubits: 1, amps }
    }

    pub fn zero() -> Self {
        Self::single(ONE, ZERO)
    }

    pub fn one() -> Self {
        Self::single(ZERO, ONE)
    }

    /// `|+> = (|0> + |1>)/sqrt 2`
    pub fn plus() -> Self {
        Self::single(ONE * FRAC_1_SQRT_2, ONE * FRAC_1_SQRT_2)
    }

    /// `|-> = (|0> - |1>)/sqrt 2`
    pub fn minus() -> Self {
        Self::single(ONE * FRAC_1_SQRT_2, -ONE * FRAC_1_SQRT_2)
    }

    /// `(|0> + i|1>)/sqrt 2`
    pub fn plus_i() -> Self {
        Self::single(ONE * FRAC_1_SQRT_2, Complex64::new(0.0, FRAC_1_SQRT_2))
    }

    /// `(|0> - i|1>)/sqrt 2`
    pub fn minus_i() -> Self {
        Self::single(ONE * FRAC_1_SQRT_2, Complex64::new(0.0, -FRAC_1_SQRT_2))
    }

    /// Single-qubit state `cos(theta)|0> + sin(theta)|1>`.
    pub fn real_rotation(theta: f64) -> Self {
        Self::single(ONE * theta.cos(), ONE * theta.sin())
    }

    /// `(|00> + |11>)/sqrt 2`
    pub fn bell() -> Self {
        let mut amps = [ZERO; MAX_DIM];
        amps[0] = ONE * FRAC_1_SQRT_2;
        amps[3] = ONE * FRAC_1_SQRT_2;
        Self { num_qubits: 2, amps }
    }

    /// `(|000> + |111>)/sqrt 2`
    pub fn ghz3() -> Self {
        let mut amps = [ZERO; MAX_DIM];
        amps[0] = ONE * FRAC_1_SQRT_2;
        amps[7] = ONE * FRAC_1_SQRT_2;
        Self { num_qubits: 3, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps[..self.dim()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes().iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`; zero when the dimensions differ.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        if self.num_qubits != other.num_qubits {
            return ZERO;
        }
        self.amplitudes()
            .iter()
            .zip(other.amplitudes())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|`, the global-phase-insensitive comparison.
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.inner(other).norm()
    }

    /// True when the two states agree up to a global phase.
    pub fn same_ray(&self, other: &PureState, tol: f64) -> bool {
        self.num_qubits == other.num_qubits && (1.0 - self.overlap(other)).abs() <= tol
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PureState) -> QResult<PureState> {
        let n = self.num_qubits + other.num_qubits;
        if n > MAX_QUBITS {
            return Err(QError::BadDimension(format!("{n} qubits")));
        }
        let mut amps = [ZERO; MAX_DIM];
        let od = other.dim();
        for (i, a) in self.amplitudes().iter().enumerate() {
            for (j, b) in other.amplitudes().iter().enumerate() {
                amps[i * od + j] = a * b;
            }
        }
        Ok(PureState { num_qubits: n, amps })
    }

    fn check_target(&self, target: usize) -> QResult<()> {
        if target >= self.num_qubits {
            return Err(QError::BadTarget {
                target,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Bit position inside the amplitude index that belongs to `target`.
    fn shift(&self, target: usize) -> usize {
        self.num_qubits - 1 - target
    }
}

impl fmt::Debug for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.num_qubits;
        let mut list = f.debug_map();
        for (i, a) in self.amplitudes().iter().enumerate() {
            list.entry(&format_args!("|{:0n$b}>", i), &format_args!("{:.6}{:+.6}i", a.re, a.im));
        }
        list.finish()
    }
}

/// A 2x2 unitary with a short label.
#[derive(Clone, Copy, PartialEq)]
pub struct Gate1Q {
    name: &'static str,
    matrix: [[Complex64; 2]; 2],
}

impl Gate1Q {
    pub fn new(name: &'static str, matrix: [[Complex64; 2]; 2]) -> QResult<Self> {
        if matrix.iter().flatten().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QError::NonFinite);
        }
        let gate = Self { name, matrix };
        if gate.unitarity_defect() > STATE_TOL {
            return Err(QError::NotUnitary(name.to_string()));
        }
        Ok(gate)
    }

    pub fn identity() -> Self {
        Self { name: "I", matrix: [[ONE, ZERO], [ZERO, ONE]] }
    }

    pub fn hadamard() -> Self {
        let h = ONE * FRAC_1_SQRT_2;
        Self { name: "H", matrix: [[h, h], [h, -h]] }
    }

    /// `S|0> = |0>`, `S|1> = i|1>`.
    pub fn phase_s() -> Self {
        Self { name: "S", matrix: [[ONE, ZERO], [ZERO, Complex64::i()]] }
    }

    pub fn pauli_x() -> Self {
        Self { name: "X", matrix: [[ZERO, ONE], [ONE, ZERO]] }
    }

    pub fn pauli_z() -> Self {
        Self { name: "Z", matrix: [[ONE, ZERO], [ZERO, -ONE]] }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn matrix(&self) -> &[[Complex64; 2]; 2] {
        &self.matrix
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let v: Complex64 = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
                let want = if i == j { ONE } else { ZERO };
                worst = worst.max((v - want).norm());
            }
        }
        worst
    }
}

impl fmt::Debug for Gate1Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gate1Q({})", self.name)
    }
}

/// Orthonormal single-qubit measurement basis. Outcome 0 is `v0`, outcome 1 is `v1`.
#[derive(Clone, Copy, PartialEq)]
pub struct QubitBasis {
    name: &'static str,
    v0: PureState,
    v1: PureState,
}

impl QubitBasis {
    pub fn new(name: &'static str, v0: PureState, v1: PureState) -> QResult<Self> {
        if v0.num_qubits() != 1 || v1.num_qubits() != 1 {
            return Err(QError::BadDimension("basis vectors must be single-qubit".into()));
        }
        if v0.inner(&v1).norm() > STATE_TOL
            || (v0.norm_sqr() - 1.0).abs() > STATE_TOL
            || (v1.norm_sqr() - 1.0).abs() > STATE_TOL
        {
            return Err(QError::NotOrthonormal(name.to_string()));
        }
        Ok(Self { name, v0, v1 })
    }

    /// `{|0>, |1>}`
    pub fn computational() -> Self {
        Self { name: "computational", v0: PureState::zero(), v1: PureState::one() }
    }

    /// `{|+>, |->}`, the eigenbasis of sigma_x.
    pub fn hadamard() -> Self {
        Self { name: "hadamard", v0: PureState::plus(), v1: PureState::minus() }
    }

    /// `{|psi>, |psi_perp>}` with `|psi> = cos(pi/8)|0> + sin(pi/8)|1>`,
    /// the eigenbasis of `(sigma_x + sigma_z)/sqrt 2`.
    pub fn psi() -> Self {
        let (s, c) = FRAC_PI_8.sin_cos();
        Self {
            name: "psi",
            v0: PureState::single(ONE * c, ONE * s),
            v1: PureState::single(-ONE * s, ONE * c),
        }
    }

    /// `{|phi>, |phi_perp>}` with `|phi> = sin(pi/8)|0> + cos(pi/8)|1>`,
    /// the eigenbasis of `(sigma_x - sigma_z)/sqrt 2`.
    pub fn phi() -> Self {
        let (s, c) = FRAC_PI_8.sin_cos();
        Self {
            name: "phi",
            v0: PureState::single(ONE * s, ONE * c),
            v1: PureState::single(-ONE * c, ONE * s),
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn vector(&self, outcome: u8) -> &PureState {
        if outcome == 0 {
            &self.v0
        } else {
            &self.v1
        }
    }
}

impl fmt::Debug for QubitBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QubitBasis({})", self.name)
    }
}

/// Result of a projective measurement of one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementResult {
    pub outcome: u8,
    pub probability: f64,
    /// Post-measurement state. For multi-qubit inputs the measured qubit is
    /// removed; for a single qubit this is the basis vector that was observed.
    pub collapsed: PureState,
}

/// Returns `U_target |state>`.
pub fn apply_gate(state: &PureState, gate: &Gate1Q, target: usize) -> QResult<PureState> {
    state.check_target(target)?;
    let bit = 1usize << state.shift(target);
    let m = &gate.matrix;
    let mut out = *state;
    for i in 0..state.dim() {
        if i & bit != 0 {
            continue;
        }
        let j = i | bit;
        let (a0, a1) = (state.amps[i], state.amps[j]);
        out.amps[i] = m[0][0] * a0 + m[0][1] * a1;
        out.amps[j] = m[1][0] * a0 + m[1][1] * a1;
    }
    Ok(out)
}

/// Applies `gates` to `target` in order (first element acts first).
pub fn apply_gates(state: &PureState, gates: &[Gate1Q], target: usize) -> QResult<PureState> {
    state.check_target(target)?;
    gates.iter().try_fold(*state, |s, g| apply_gate(&s, g, target))
}

/// Unnormalized remainder after projecting `target` onto `vector`, plus its
/// squared norm. With `n` qubits the remainder lives on `n - 1` qubits.
fn project_raw(state: &PureState, vector: &PureState, target: usize) -> ([Complex64; MAX_DIM], f64) {
    let shift = state.shift(target);
    let low_mask = (1usize << shift) - 1;
    let v = [vector.amps[0].conj(), vector.amps[1].conj()];
    let mut rest = [ZERO; MAX_DIM];
    let mut weight = 0.0;
    for (r, slot) in rest.iter_mut().enumerate().take(state.dim() / 2) {
        let high = (r & !low_mask) << 1;
        let low = r & low_mask;
        let i0 = high | low;
        let i1 = i0 | (1 << shift);
        *slot = v[0] * state.amps[i0] + v[1] * state.amps[i1];
        weight += slot.norm_sqr();
    }
    (rest, weight)
}

/// Outcome probabilities `(p0, p1)` for measuring `target` in `basis`.
pub fn outcome_distribution(state: &PureState, basis: &QubitBasis, target: usize) -> QResult<(f64, f64)> {
    state.check_target(target)?;
    let (_, w0) = project_raw(state, &basis.v0, target);
    let (_, w1) = project_raw(state, &basis.v1, target);
    let total = w0 + w1;
    Ok((w0 / total, w1 / total))
}

/// Probability of `outcome` and the conditional post-measurement state, or
/// `None` for the state when the outcome has probability zero.
pub fn project(
    state: &PureState,
    basis: &QubitBasis,
    target: usize,
    outcome: u8,
) -> QResult<(f64, Option<PureState>)> {
    let (p0, p1) = outcome_distribution(state, basis, target)?;
    let p = if outcome == 0 { p0 } else { p1 };
    if p <= ALGEBRA_TOL {
        return Ok((p, None));
    }
    Ok((p, Some(collapse(state, basis, target, outcome))))
}

fn collapse(state: &PureState, basis: &QubitBasis, target: usize, outcome: u8) -> PureState {
    let vector = basis.vector(outcome);
    if state.num_qubits == 1 {
        return *vector;
    }
    let (rest, weight) = project_raw(state, vector, target);
    let scale = weight.sqrt().recip();
    let mut amps = [ZERO; MAX_DIM];
    for (dst, src) in amps.iter_mut().zip(rest.iter()) {
        *dst = src * scale;
    }
    PureState {
        num_qubits: state.num_qubits - 1,
        amps,
    }
}

/// Projective measurement driven by an externally supplied uniform draw:
/// outcome 0 iff `randomness < p0`.
pub fn measure(
    state: &PureState,
    basis: &QubitBasis,
    target: usize,
    randomness: f64,
) -> QResult<MeasurementResult> {
    if !(0.0..1.0).contains(&randomness) {
        return Err(QError::BadRandomness(randomness));
    }
    let (mut p0, _) = outcome_distribution(state, basis, target)?;
    // snap rounding residue so eigenstates measure deterministically
    if p0 > 1.0 - ALGEBRA_TOL {
        p0 = 1.0;
    } else if p0 < ALGEBRA_TOL {
        p0 = 0.0;
    }
    let outcome = u8::from(randomness >= p0);
    let probability = if outcome == 0 { p0 } else { 1.0 - p0 };
    Ok(MeasurementResult {
        outcome,
        probability,
        collapsed: collapse(state, basis, target, outcome),
    })
}
