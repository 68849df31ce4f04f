//! Declarative QRU circuit blueprint: qubit roles, encoding plan, C-SWAP
//! wiring, variational layer spec and measurement plan.
//!
//! Qubit roles partition `[0, D+H+A)`: data qubits first, then hidden
//! qubits, then ancilla qubits.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rotation axes used to encode values on one data qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataEncoding {
    /// One value per step via Rx.
    Rx,
    /// Two values per step via Rx then Ry.
    RxRy,
    /// One value per step encoded twice — through Rx and Ry with
    /// independent (scale, bias) pairs — doubling the encoding
    /// parameters without widening the input.
    RxRyShared,
}

impl DataEncoding {
    pub fn values_per_step(self) -> usize {
        match self {
            DataEncoding::Rx | DataEncoding::RxRyShared => 1,
            DataEncoding::RxRy => 2,
        }
    }

    pub fn gates_per_step(self) -> usize {
        match self {
            DataEncoding::Rx => 1,
            DataEncoding::RxRy | DataEncoding::RxRyShared => 2,
        }
    }
}

/// Gate family of one variational layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariationalGate {
    Rx,
    Ry,
    Rz,
    /// Two-parameter rotation Rz(φ)·Ry(π/2)·Rz(λ).
    U2,
    /// Three-parameter rotation Rz(ω)·Ry(ϑ)·Rz(φ).
    Rot,
}

impl VariationalGate {
    pub fn angles_per_gate(self) -> usize {
        match self {
            VariationalGate::Rx | VariationalGate::Ry | VariationalGate::Rz => 1,
            VariationalGate::U2 => 2,
            VariationalGate::Rot => 3,
        }
    }
}

/// One C-SWAP in the update/reset block: (control, target, ancilla).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CswapTriple {
    pub control: usize,
    pub target: usize,
    pub ancilla: usize,
}

/// Full architecture of one QRU time-step circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QruArchitecture {
    pub data_qubits: usize,
    pub hidden_qubits: usize,
    pub ancilla_qubits: usize,
    /// Per-data-qubit encoding axes; length must equal `data_qubits`.
    pub data_encoding: Vec<DataEncoding>,
    /// Update/reset C-SWAP wiring. Every ancilla slot must be an
    /// ancilla-role qubit and the three qubits of a triple must be distinct.
    pub cswap_wiring: Vec<CswapTriple>,
    /// One entry per variational layer.
    pub variational_gates: Vec<VariationalGate>,
    /// Qubits read out as the cell's output (Pauli-Z); must be data- or
    /// hidden-role qubits.
    pub output_qubits: Vec<usize>,
    /// Whether a trainable output scale `s` is part of the parameter set.
    pub use_output_scale: bool,
}

impl QruArchitecture {
    pub fn total_qubits(&self) -> usize {
        self.data_qubits + self.hidden_qubits + self.ancilla_qubits
    }

    /// Data + hidden qubits; these receive encoding gates, variational
    /// layers and the CNOT rings. Ancillas stay out.
    pub fn encoded_qubits(&self) -> usize {
        self.data_qubits + self.hidden_qubits
    }

    /// Number of classical input values consumed per time step.
    pub fn input_dim(&self) -> usize {
        self.data_encoding.iter().map(|e| e.values_per_step()).sum()
    }

    /// Dimension of the propagated hidden state (Z and X per hidden qubit).
    pub fn hidden_dim(&self) -> usize {
        2 * self.hidden_qubits
    }

    /// Encoding gates: one or two per data qubit plus Rx and Ry per hidden
    /// qubit. Each carries a (scale, bias) parameter pair.
    pub fn num_encoding_gates(&self) -> usize {
        self.data_encoding.iter().map(|e| e.gates_per_step()).sum::<usize>()
            + 2 * self.hidden_qubits
    }

    pub fn num_variational_angles(&self) -> usize {
        let covered = self.encoded_qubits();
        self.variational_gates
            .iter()
            .map(|g| covered * g.angles_per_gate())
            .sum()
    }

    /// Closed-form trainable parameter count.
    pub fn param_count(&self) -> usize {
        2 * self.num_encoding_gates()
            + self.num_variational_angles()
            + usize::from(self.use_output_scale)
    }

    /// Index of the output scale parameter in the flat layout.
    pub fn scale_param_index(&self) -> Option<usize> {
        self.use_output_scale.then(|| self.param_count() - 1)
    }

    /// First hidden-role qubit index.
    pub fn hidden_base(&self) -> usize {
        self.data_qubits
    }

    /// First ancilla-role qubit index.
    pub fn ancilla_base(&self) -> usize {
        self.data_qubits + self.hidden_qubits
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.total_qubits();
        if self.data_qubits == 0 {
            return Err(Error::Config("architecture needs at least one data qubit".into()));
        }
        if n > crate::statevector::MAX_QUBITS {
            return Err(Error::Config(format!(
                "architecture uses {n} qubits, max is {}",
                crate::statevector::MAX_QUBITS
            )));
        }
        if self.data_encoding.len() != self.data_qubits {
            return Err(Error::Config(format!(
                "data_encoding has {} entries for {} data qubits",
                self.data_encoding.len(),
                self.data_qubits
            )));
        }
        for t in &self.cswap_wiring {
            let qs = [t.control, t.target, t.ancilla];
            if qs.iter().any(|&q| q >= n) {
                return Err(Error::Config(format!("cswap triple {t:?} out of range")));
            }
            if t.control == t.target || t.control == t.ancilla || t.target == t.ancilla {
                return Err(Error::Config(format!("cswap triple {t:?} repeats a qubit")));
            }
            if t.ancilla < self.ancilla_base() {
                return Err(Error::Config(format!(
                    "cswap triple {t:?}: ancilla slot {} is not an ancilla-role qubit",
                    t.ancilla
                )));
            }
        }
        for &q in &self.output_qubits {
            if q >= self.ancilla_base() {
                return Err(Error::Config(format!(
                    "output qubit {q} is not a data- or hidden-role qubit"
                )));
            }
        }
        if self.output_qubits.is_empty() {
            return Err(Error::Config("output plan is empty".into()));
        }
        Ok(())
    }

    /// Default update/reset wiring: triple i pairs data qubit `i mod D` as
    /// control with hidden qubit i as target and ancilla `i mod A`, with at
    /// most `min(H, 2A)` triples so each ancilla is reused at most twice and
    /// some hidden qubits stay untouched.
    pub fn default_cswap_wiring(
        data_qubits: usize,
        hidden_qubits: usize,
        ancilla_qubits: usize,
    ) -> Vec<CswapTriple> {
        if ancilla_qubits == 0 {
            return Vec::new();
        }
        let count = hidden_qubits.min(2 * ancilla_qubits);
        (0..count)
            .map(|i| CswapTriple {
                control: i % data_qubits,
                target: data_qubits + i,
                ancilla: data_qubits + hidden_qubits + (i % ancilla_qubits),
            })
            .collect()
    }
}

/// Flat, ordered collection of all trainable reals. Layout:
/// encoding (scale, bias) pairs in gate order, then variational angles by
/// layer then qubit, then the output scale `s` when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub values: Vec<f64>,
}

impl ParameterSet {
    /// Random initialization: angles and encoding weights uniform on
    /// [−π/10, π/10], `s` set to 1.
    pub fn init<R: Rng>(arch: &QruArchitecture, rng: &mut R) -> Self {
        let count = arch.param_count();
        let bound = std::f64::consts::PI / 10.0;
        let mut values: Vec<f64> = (0..count).map(|_| rng.random_range(-bound..bound)).collect();
        if let Some(idx) = arch.scale_param_index() {
            values[idx] = 1.0;
        }
        ParameterSet { values }
    }

    pub fn zeros(arch: &QruArchitecture) -> Self {
        let mut values = vec![0.0; arch.param_count()];
        if let Some(idx) = arch.scale_param_index() {
            values[idx] = 1.0;
        }
        ParameterSet { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scale(&self, arch: &QruArchitecture) -> f64 {
        arch.scale_param_index().map_or(1.0, |i| self.values[i])
    }
}

/// Built-in architectures for the three experiments, with the published
/// parameter counts they aim at.
pub mod presets {
    use super::*;

    pub const OSCILLATION_REFERENCE_PARAMS: usize = 72;
    pub const WDBC_REFERENCE_PARAMS: usize = 35;
    pub const MNIST35_REFERENCE_PARAMS: usize = 132;

    /// 1 data qubit (Rx encoding), 5 hidden, 2 ancilla, 4 U2 layers,
    /// scalar ⟨Z⟩ output on qubit 0.
    pub fn oscillation() -> QruArchitecture {
        QruArchitecture {
            data_qubits: 1,
            hidden_qubits: 5,
            ancilla_qubits: 2,
            data_encoding: vec![DataEncoding::Rx],
            cswap_wiring: QruArchitecture::default_cswap_wiring(1, 5, 2),
            variational_gates: vec![VariationalGate::U2; 4],
            output_qubits: vec![0],
            use_output_scale: false,
        }
    }

    /// 1 data qubit (Rx encoding), 4 hidden, 2 ancilla, alternating
    /// Rx-Ry-Rx layers, scalar output scaled by trainable `s`.
    pub fn wdbc() -> QruArchitecture {
        QruArchitecture {
            data_qubits: 1,
            hidden_qubits: 4,
            ancilla_qubits: 2,
            data_encoding: vec![DataEncoding::Rx],
            cswap_wiring: QruArchitecture::default_cswap_wiring(1, 4, 2),
            variational_gates: vec![
                VariationalGate::Rx,
                VariationalGate::Ry,
                VariationalGate::Rx,
            ],
            output_qubits: vec![0],
            use_output_scale: true,
        }
    }

    /// 4 data qubits (Rx+Ry encoding, 8 values per step), 4 hidden,
    /// 2 ancilla, 4 Rot layers, two-qubit output scaled by `s`.
    pub fn mnist35() -> QruArchitecture {
        QruArchitecture {
            data_qubits: 4,
            hidden_qubits: 4,
            ancilla_qubits: 2,
            data_encoding: vec![DataEncoding::RxRy; 4],
            cswap_wiring: QruArchitecture::default_cswap_wiring(4, 4, 2),
            variational_gates: vec![VariationalGate::Rot; 4],
            output_qubits: vec![0, 1],
            use_output_scale: true,
        }
    }

    pub fn by_name(name: &str) -> Option<(QruArchitecture, usize)> {
        match name {
            "oscillation" => Some((oscillation(), OSCILLATION_REFERENCE_PARAMS)),
            "wdbc" => Some((wdbc(), WDBC_REFERENCE_PARAMS)),
            "mnist35" => Some((mnist35(), MNIST35_REFERENCE_PARAMS)),
            _ => None,
        }
    }
}
