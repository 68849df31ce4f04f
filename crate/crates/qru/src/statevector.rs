//! Exact complex statevector simulation of the gate set used by the QRU.
//!
//! Basis index convention: qubit 0 is the most significant bit of the basis
//! index, so for three qubits the amplitude at index `0b100` is the
//! coefficient of |100⟩ (qubit 0 in |1⟩, qubits 1 and 2 in |0⟩).

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 14;

/// Rotation axis of a single-qubit rotation gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Gates understood by the simulator.
///
/// `U2(φ, λ)` is shorthand for `Rz(φ)·Ry(π/2)·Rz(λ)` and `Rot(φ, ϑ, ω)` for
/// `Rz(ω)·Ry(ϑ)·Rz(φ)`; both are applied via their decompositions.
/// Rotations follow the convention `Rα(θ) = exp(−iθσα/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOp {
    Rx { qubit: usize, angle: f64 },
    Ry { qubit: usize, angle: f64 },
    Rz { qubit: usize, angle: f64 },
    U2 { qubit: usize, phi: f64, lambda: f64 },
    Rot { qubit: usize, phi: f64, theta: f64, omega: f64 },
    Cnot { control: usize, target: usize },
    Cswap { control: usize, target1: usize, target2: usize },
}

impl GateOp {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateOp::Rx { qubit, .. }
            | GateOp::Ry { qubit, .. }
            | GateOp::Rz { qubit, .. }
            | GateOp::U2 { qubit, .. }
            | GateOp::Rot { qubit, .. } => vec![qubit],
            GateOp::Cnot { control, target } => vec![control, target],
            GateOp::Cswap {
                control,
                target1,
                target2,
            } => vec![control, target1, target2],
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= num_qubits {
                return Err(Error::Config(format!(
                    "gate {self:?} references qubit {q}, but the state has {num_qubits} qubits"
                )));
            }
        }
        for i in 0..qs.len() {
            for j in i + 1..qs.len() {
                if qs[i] == qs[j] {
                    return Err(Error::Config(format!(
                        "gate {self:?} uses qubit {} more than once",
                        qs[i]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Measurement basis for a single-qubit Pauli expectation value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliBasis {
    Z,
    X,
}

/// Single-qubit Pauli observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observable {
    pub basis: PauliBasis,
    pub qubit: usize,
}

impl Observable {
    pub fn z(qubit: usize) -> Self {
        Observable {
            basis: PauliBasis::Z,
            qubit,
        }
    }
    pub fn x(qubit: usize) -> Self {
        Observable {
            basis: PauliBasis::X,
            qubit,
        }
    }
}

/// Full statevector of an n-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `num_qubits` qubits.
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits < 1 || num_qubits > MAX_QUBITS {
            return Err(Error::Config(format!(
                "qubit count must be in 1..={MAX_QUBITS}, got {num_qubits}"
            )));
        }
        let mut amps = vec![Complex64::ZERO; 1 << num_qubits];
        amps[0] = Complex64::ONE;
        Ok(StateVector { num_qubits, amps })
    }

    /// Build a state from raw amplitudes. The vector length must be a power
    /// of two and the norm must be 1 within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() || dim > (1 << MAX_QUBITS) {
            return Err(Error::Config(format!(
                "amplitude vector length {dim} is not a supported power of two"
            )));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-10 {
            return Err(Error::Input(format!(
                "amplitudes have squared norm {norm_sq}, expected 1"
            )));
        }
        Ok(StateVector { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Reset to |0…0⟩ without reallocating.
    pub fn reset(&mut self) {
        self.amps.fill(Complex64::ZERO);
        self.amps[0] = Complex64::ONE;
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    /// Apply a gate after validating its qubit indices.
    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.num_qubits)?;
        match *gate {
            GateOp::Rx { qubit, angle } => self.apply_rot(Axis::X, qubit, angle),
            GateOp::Ry { qubit, angle } => self.apply_rot(Axis::Y, qubit, angle),
            GateOp::Rz { qubit, angle } => self.apply_rot(Axis::Z, qubit, angle),
            GateOp::U2 { qubit, phi, lambda } => {
                self.apply_rot(Axis::Z, qubit, lambda);
                self.apply_rot(Axis::Y, qubit, std::f64::consts::FRAC_PI_2);
                self.apply_rot(Axis::Z, qubit, phi);
            }
            GateOp::Rot {
                qubit,
                phi,
                theta,
                omega,
            } => {
                self.apply_rot(Axis::Z, qubit, phi);
                self.apply_rot(Axis::Y, qubit, theta);
                self.apply_rot(Axis::Z, qubit, omega);
            }
            GateOp::Cnot { control, target } => self.apply_cnot(control, target),
            GateOp::Cswap {
                control,
                target1,
                target2,
            } => self.apply_cswap(control, target1, target2),
        }
        Ok(())
    }

    /// Single-qubit rotation kernel: strided update of amplitude pairs
    /// differing only in the target bit.
    pub fn apply_rot(&mut self, axis: Axis, qubit: usize, angle: f64) {
        debug_assert!(qubit < self.num_qubits);
        let m = self.mask(qubit);
        let dim = self.amps.len();
        let half = angle * 0.5;
        let (s, c) = half.sin_cos();
        match axis {
            Axis::X => {
                // [[c, -i s], [-i s, c]]
                let is = Complex64::new(0.0, -s);
                let mut base = 0;
                while base < dim {
                    for i in base..base + m {
                        let a0 = self.amps[i];
                        let a1 = self.amps[i + m];
                        self.amps[i] = c * a0 + is * a1;
                        self.amps[i + m] = is * a0 + c * a1;
                    }
                    base += 2 * m;
                }
            }
            Axis::Y => {
                // [[c, -s], [s, c]]
                let mut base = 0;
                while base < dim {
                    for i in base..base + m {
                        let a0 = self.amps[i];
                        let a1 = self.amps[i + m];
                        self.amps[i] = c * a0 - s * a1;
                        self.amps[i + m] = s * a0 + c * a1;
                    }
                    base += 2 * m;
                }
            }
            Axis::Z => {
                // diag(e^{-iθ/2}, e^{+iθ/2})
                let p0 = Complex64::new(c, -s);
                let p1 = Complex64::new(c, s);
                let mut base = 0;
                while base < dim {
                    for i in base..base + m {
                        self.amps[i] *= p0;
                        self.amps[i + m] *= p1;
                    }
                    base += 2 * m;
                }
            }
        }
    }

    /// CNOT kernel: permutes amplitudes where the control bit is 1.
    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        debug_assert!(control != target);
        let cm = self.mask(control);
        let tm = self.mask(target);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    /// C-SWAP (Fredkin) kernel: swaps the two target bits where the control
    /// bit is 1 and the target bits differ.
    pub fn apply_cswap(&mut self, control: usize, target1: usize, target2: usize) {
        debug_assert!(control != target1 && control != target2 && target1 != target2);
        let cm = self.mask(control);
        let t1 = self.mask(target1);
        let t2 = self.mask(target2);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & t1 != 0 && i & t2 == 0 {
                self.amps.swap(i, i ^ t1 ^ t2);
            }
        }
    }

    /// ⟨ψ|P|ψ⟩ for a single-qubit Pauli observable. Always real and in [-1, 1].
    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        if obs.qubit >= self.num_qubits {
            return Err(Error::Config(format!(
                "observable qubit {} out of range for {} qubits",
                obs.qubit, self.num_qubits
            )));
        }
        let m = self.mask(obs.qubit);
        let dim = self.amps.len();
        let mut acc = 0.0;
        match obs.basis {
            PauliBasis::Z => {
                for (i, a) in self.amps.iter().enumerate() {
                    let sign = if i & m == 0 { 1.0 } else { -1.0 };
                    acc += sign * a.norm_sqr();
                }
            }
            PauliBasis::X => {
                let mut base = 0;
                while base < dim {
                    for i in base..base + m {
                        acc += 2.0 * (self.amps[i].conj() * self.amps[i + m]).re;
                    }
                    base += 2 * m;
                }
            }
        }
        Ok(acc)
    }

    /// Accumulate `weight · P|ψ⟩` into `out`. Used to form the effective
    /// observable state in adjoint differentiation.
    pub(crate) fn accumulate_pauli(&self, obs: &Observable, weight: f64, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), self.amps.len());
        let m = self.mask(obs.qubit);
        match obs.basis {
            PauliBasis::Z => {
                for (i, a) in self.amps.iter().enumerate() {
                    let sign = if i & m == 0 { weight } else { -weight };
                    out[i] += sign * a;
                }
            }
            PauliBasis::X => {
                let dim = self.amps.len();
                let mut base = 0;
                while base < dim {
                    for i in base..base + m {
                        out[i] += weight * self.amps[i + m];
                        out[i + m] += weight * self.amps[i];
                    }
                    base += 2 * m;
                }
            }
        }
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }
}
