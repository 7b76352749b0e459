//! Pure multi-qubit states, projective qubit measurements and Born-rule
//! behaviors.
//!
//! Qubit 0 (party 0) is the most significant bit of a basis index, so
//! `|q0 q1 … q_{p-1}⟩` sits at index `Σ q_i 2^{p-1-i}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matkernel::{hermitian_eig, kron, Complex, ComplexMatrix};
use crate::scenario::{Behavior, Scenario, ScenarioError};

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("state is not normalized: ‖ψ‖ = {norm}")]
    NotNormalized { norm: f64 },
    #[error("amplitude vector length {len} is not a power of two")]
    BadLength { len: usize },
    #[error("measurement amplitudes not normalized: |α|²+|β|² = {norm2}")]
    BadMeasurement { norm2: f64 },
    #[error("Schmidt coefficient A = {0} outside [0, 1]")]
    SchmidtOutOfRange(f64),
    #[error("GHZ state needs at least two parties, got {0}")]
    TooFewParties(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<Complex>,
}

impl PureState {
    /// Wraps an already-normalized amplitude vector.
    pub fn new(amplitudes: Vec<Complex>) -> Result<Self, QuantumError> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QuantumError::BadLength { len });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QuantumError::NotNormalized { norm });
        }
        Ok(PureState {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    /// Normalizes `amplitudes` first. Fails on a zero vector.
    pub fn normalized(mut amplitudes: Vec<Complex>) -> Result<Self, QuantumError> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QuantumError::NotNormalized { norm });
        }
        for a in &mut amplitudes {
            *a = *a / norm;
        }
        Self::new(amplitudes)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn with_global_phase(&self, phi: f64) -> Self {
        let ph = Complex::from_polar(1.0, phi);
        PureState {
            num_qubits: self.num_qubits,
            amplitudes: self.amplitudes.iter().map(|&a| a * ph).collect(),
        }
    }
}

/// `A|00⟩ + √(1−A²)|11⟩`
pub fn make_bipartite_state(a: f64) -> Result<PureState, QuantumError> {
    if !(0.0..=1.0).contains(&a) {
        return Err(QuantumError::SchmidtOutOfRange(a));
    }
    let b = (1.0 - a * a).max(0.0).sqrt();
    PureState::new(vec![
        Complex::real(a),
        Complex::ZERO,
        Complex::ZERO,
        Complex::real(b),
    ])
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `p ≥ 2` qubits.
pub fn make_ghz(p: usize) -> Result<PureState, QuantumError> {
    if p < 2 {
        return Err(QuantumError::TooFewParties(p));
    }
    if p > 24 {
        return Err(QuantumError::Dimension(format!("{p} qubits is too many")));
    }
    let dim = 1usize << p;
    let mut amps = vec![Complex::ZERO; dim];
    amps[0] = Complex::real(std::f64::consts::FRAC_1_SQRT_2);
    amps[dim - 1] = Complex::real(std::f64::consts::FRAC_1_SQRT_2);
    PureState::new(amps)
}

/// Two-outcome projective qubit measurement. Outcome index 0 is the projector
/// onto `α|0⟩ + β|1⟩`; outcome index 1 is its orthogonal complement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryQubitMeasurement {
    pub alpha: Complex,
    pub beta: Complex,
}

impl BinaryQubitMeasurement {
    pub fn new(alpha: Complex, beta: Complex) -> Result<Self, QuantumError> {
        let norm2 = alpha.norm_sqr() + beta.norm_sqr();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(QuantumError::BadMeasurement { norm2 });
        }
        Ok(BinaryQubitMeasurement { alpha, beta })
    }

    pub fn real(alpha: f64, beta: f64) -> Result<Self, QuantumError> {
        Self::new(Complex::real(alpha), Complex::real(beta))
    }

    /// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        BinaryQubitMeasurement {
            alpha: Complex::real((theta / 2.0).cos()),
            beta: Complex::from_polar((theta / 2.0).sin(), phi),
        }
    }

    /// Projector `(I + n·σ)/2` for a unit Bloch vector `n`.
    pub fn from_bloch(n: [f64; 3]) -> Result<Self, QuantumError> {
        let r = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if (r - 1.0).abs() > 1e-9 {
            return Err(QuantumError::BadMeasurement { norm2: r * r });
        }
        let theta = (n[2] / r).clamp(-1.0, 1.0).acos();
        let phi = n[1].atan2(n[0]);
        Ok(Self::from_angles(theta, phi))
    }

    /// σ_x eigenprojector `|+⟩`.
    pub fn sigma_x() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        BinaryQubitMeasurement {
            alpha: Complex::real(h),
            beta: Complex::real(h),
        }
    }

    /// σ_z eigenprojector `|0⟩`.
    pub fn sigma_z() -> Self {
        BinaryQubitMeasurement {
            alpha: Complex::ONE,
            beta: Complex::ZERO,
        }
    }

    /// Ket of the rank-one projector for `outcome`.
    pub fn ket(&self, outcome: usize) -> [Complex; 2] {
        match outcome {
            0 => [self.alpha, self.beta],
            _ => [-self.beta.conj(), self.alpha.conj()],
        }
    }

    pub fn effect(&self, outcome: usize) -> ComplexMatrix {
        let proj = ComplexMatrix::outer(&[self.alpha, self.beta], &[self.alpha, self.beta]);
        match outcome {
            0 => proj,
            _ => ComplexMatrix::identity(2).sub(&proj),
        }
    }

    /// Bloch vector of the outcome-0 projector.
    pub fn bloch(&self) -> [f64; 3] {
        bloch_of_projector(self)
    }
}

/// `n = (2Re(ᾱβ), 2Im(ᾱβ), |α|²−|β|²)`
pub fn bloch_of_projector(meas: &BinaryQubitMeasurement) -> [f64; 3] {
    let c = meas.alpha.conj() * meas.beta;
    [
        2.0 * c.re,
        2.0 * c.im,
        meas.alpha.norm_sqr() - meas.beta.norm_sqr(),
    ]
}

/// `m` measurements for each of `p` parties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementAssembly {
    parties: Vec<Vec<BinaryQubitMeasurement>>,
}

impl MeasurementAssembly {
    pub fn new(parties: Vec<Vec<BinaryQubitMeasurement>>) -> Result<Self, QuantumError> {
        let m = parties.first().map(|p| p.len()).unwrap_or(0);
        if parties.is_empty() || m == 0 || parties.iter().any(|p| p.len() != m) {
            return Err(QuantumError::Dimension(
                "every party needs the same, nonzero number of measurements".into(),
            ));
        }
        Ok(MeasurementAssembly { parties })
    }

    pub fn scenario(&self) -> Scenario {
        Scenario::new(self.parties.len(), self.parties[0].len(), 2).expect("non-empty assembly")
    }

    pub fn party(&self, i: usize) -> &[BinaryQubitMeasurement] {
        &self.parties[i]
    }

    pub fn parties(&self) -> &[Vec<BinaryQubitMeasurement>] {
        &self.parties
    }
}

/// `P(a⃗|x⃗) = ⟨Φ| ⊗_i E^{(i)}_{a_i|x_i} |Φ⟩`.
///
/// Each effect is a rank-one projector, so the probability is the squared
/// overlap of `Φ` with a product ket.
pub fn born_behavior(
    state: &PureState,
    assembly: &MeasurementAssembly,
) -> Result<Behavior, QuantumError> {
    let sc = assembly.scenario();
    let p = sc.parties();
    if state.num_qubits() != p {
        return Err(QuantumError::Dimension(format!(
            "state has {} qubits but the assembly has {} parties",
            state.num_qubits(),
            p
        )));
    }
    let amps = state.amplitudes();
    let dim = amps.len();
    let mut product = vec![Complex::ZERO; dim];
    Ok(Behavior::from_fn(sc, |x, a| {
        let kets: Vec<[Complex; 2]> = (0..p)
            .map(|i| assembly.parties[i][x[i]].ket(a[i]))
            .collect();
        for (k, slot) in product.iter_mut().enumerate() {
            let mut v = Complex::ONE;
            for (i, ket) in kets.iter().enumerate() {
                v = v * ket[(k >> (p - 1 - i)) & 1];
            }
            *slot = v;
        }
        let overlap = product
            .iter()
            .zip(amps)
            .fold(Complex::ZERO, |acc, (u, s)| acc + u.conj() * *s);
        overlap.norm_sqr()
    }))
}

/// Same probabilities as [`born_behavior`], via explicit Kronecker products of
/// effect operators. Slow; kept as an independent reference.
pub fn born_behavior_dense(
    state: &PureState,
    assembly: &MeasurementAssembly,
) -> Result<Behavior, QuantumError> {
    let sc = assembly.scenario();
    if state.num_qubits() != sc.parties() {
        return Err(QuantumError::Dimension("qubit/party count mismatch".into()));
    }
    Ok(Behavior::from_fn(sc, |x, a| {
        let mut op = assembly.parties[0][x[0]].effect(a[0]);
        for i in 1..sc.parties() {
            op = kron(&op, &assembly.parties[i][x[i]].effect(a[i]));
        }
        op.expectation(state.amplitudes()).re
    }))
}

/// Schmidt coefficient `A ∈ [0, 1/√2]` of a two-qubit state, i.e. the smaller
/// singular value of the 2×2 amplitude matrix. States already written as
/// `A|00⟩ + B|11⟩` return `|A|` directly.
pub fn schmidt_a(state: &PureState) -> Result<f64, QuantumError> {
    if state.num_qubits() != 2 {
        return Err(QuantumError::Dimension(format!(
            "Schmidt coefficient needs a two-qubit state, got {} qubits",
            state.num_qubits()
        )));
    }
    let a = state.amplitudes();
    if a[1].abs() <= NORM_TOL && a[2].abs() <= NORM_TOL {
        return Ok(a[0].abs());
    }
    let m = ComplexMatrix::from_vec(2, 2, a.to_vec());
    let gram = m.adjoint().matmul(&m).expect("2x2");
    let eig = hermitian_eig(&gram).map_err(|e| QuantumError::Dimension(e.to_string()))?;
    Ok(eig.eigenvalues[1].max(0.0).sqrt())
}

/// On-disk form of a realization: state amplitudes as `[re, im]` pairs and,
/// per party, the list of measurement amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationFile {
    pub state: Vec<Complex>,
    pub measurements: Vec<Vec<BinaryQubitMeasurement>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl RealizationFile {
    pub fn new(state: &PureState, assembly: &MeasurementAssembly) -> Self {
        RealizationFile {
            state: state.amplitudes().to_vec(),
            measurements: assembly.parties.clone(),
            metadata: None,
        }
    }

    pub fn decode(&self) -> Result<(PureState, MeasurementAssembly), QuantumError> {
        let state = PureState::new(self.state.clone())?;
        for meas in self.measurements.iter().flatten() {
            BinaryQubitMeasurement::new(meas.alpha, meas.beta)?;
        }
        let assembly = MeasurementAssembly::new(self.measurements.clone())?;
        Ok((state, assembly))
    }
}
