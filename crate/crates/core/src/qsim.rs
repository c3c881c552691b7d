//! Dense statevector simulation of the shared-state quantum strategies.
//!
//! Qubit 0 is the most significant bit of a basis index, matching the
//! left-to-right order of Pauli labels. Multi-player registers are laid out
//! player by player: player `k` owns qubits `w·k .. w·k + w`.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::games::{GameError, GameSpec, RefereeChoice, Responder};
use crate::geometry::{build_eloily, canonical_q, Geometry, GeometryError};
use crate::pauli::{Pauli, PauliError, PauliOperator, Sign};

pub const MAX_QUBITS: usize = 14;
/// Branches below this squared norm are treated as impossible.
pub const NULL_NORM: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum QsimError {
    #[error("{0} qubits requested, the simulator holds at most {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("state has {state} qubits, operator acts on {op}")]
    DimensionMismatch { state: usize, op: usize },
    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("operators {0} and {1} do not commute")]
    NonCommuting(String, String),
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("controlled-NOT needs distinct qubits, got {0} twice")]
    SameQubit(usize),
    #[error("no basis seed survives the projectors")]
    NoSharedState,
    #[error("invalid line: {0}")]
    InvalidLine(String),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<QsimError> for GameError {
    fn from(e: QsimError) -> Self {
        GameError::Responder(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl StateVector {
    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self, QsimError> {
        if n > MAX_QUBITS {
            return Err(QsimError::TooManyQubits(n));
        }
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[index % (1 << n)] = c(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, QsimError> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(QsimError::BadLength(len));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(QsimError::TooManyQubits(n));
        }
        let s = StateVector { n, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(QsimError::NotNormalized(norm));
        }
        Ok(s)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn normalized(mut self) -> Option<(f64, Self)> {
        let norm = self.norm_sqr();
        if norm < NULL_NORM {
            return None;
        }
        let s = 1.0 / norm.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= s);
        Some((norm, self))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|`, insensitive to global phase.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        if self.n != other.n {
            return 0.0;
        }
        self.inner(other).norm()
    }

    pub fn tensor(&self, other: &StateVector) -> Result<StateVector, QsimError> {
        let n = self.n + other.n;
        if n > MAX_QUBITS {
            return Err(QsimError::TooManyQubits(n));
        }
        let mut amps = Vec::with_capacity(1 << n);
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(StateVector { n, amps })
    }

    /// Reorders qubits: qubit `q` of `self` becomes qubit `perm[q]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<StateVector, QsimError> {
        let n = self.n;
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(QsimError::InvalidLine(format!(
                "{perm:?} is not a permutation of {n} qubits"
            )));
        }
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        for (b, a) in self.amps.iter().enumerate() {
            let mut t = 0;
            for (q, &p) in perm.iter().enumerate() {
                t |= (b >> (n - 1 - q) & 1) << (n - 1 - p);
            }
            amps[t] = *a;
        }
        Ok(StateVector { n, amps })
    }

    fn check_op(&self, op: &PauliOperator) -> Result<(), QsimError> {
        if op.width() != self.n {
            return Err(QsimError::DimensionMismatch {
                state: self.n,
                op: op.width(),
            });
        }
        Ok(())
    }

    /// `O|ψ⟩` for a Pauli observable on the full register.
    pub fn apply_pauli(&self, op: &PauliOperator) -> Result<StateVector, QsimError> {
        self.check_op(op)?;
        let (x, z) = (op.xbits() as usize, op.zbits() as usize);
        let base = match ((x & z).count_ones() + 2 * op.sign().bit() as u32) % 4 {
            0 => c(1.0, 0.0),
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        };
        let mut amps = vec![c(0.0, 0.0); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            let v = base * a;
            amps[b ^ x] = if (b & z).count_ones() % 2 == 1 { -v } else { v };
        }
        Ok(StateVector { n: self.n, amps })
    }

    /// `⟨ψ|O|ψ⟩` as a complex number; real for Hermitian `O`.
    pub fn expectation_complex(&self, op: &PauliOperator) -> Result<Complex64, QsimError> {
        Ok(self.inner(&self.apply_pauli(op)?))
    }

    /// Real part of `⟨ψ|O|ψ⟩`; exact for Hermitian `O` up to rounding.
    pub fn expectation(&self, op: &PauliOperator) -> Result<f64, QsimError> {
        Ok(self.expectation_complex(op)?.re)
    }

    /// Unnormalized `(1 + s·O)/2 |ψ⟩`.
    fn projected(&self, op: &PauliOperator, outcome: Sign) -> Result<StateVector, QsimError> {
        let o = self.apply_pauli(op)?;
        let s = outcome.value() as f64;
        let amps = self
            .amps
            .iter()
            .zip(&o.amps)
            .map(|(a, b)| (a + b * s) * 0.5)
            .collect();
        Ok(StateVector { n: self.n, amps })
    }

    /// Born probability of `outcome` and the collapsed state, or `None` when
    /// the branch is null.
    pub fn project(
        &self,
        op: &PauliOperator,
        outcome: Sign,
    ) -> Result<Option<(f64, StateVector)>, QsimError> {
        Ok(self.projected(op, outcome)?.normalized())
    }

    pub fn measure<R: RngCore + ?Sized>(
        &self,
        op: &PauliOperator,
        rng: &mut R,
    ) -> Result<(Sign, StateVector), QsimError> {
        let o = self.apply_pauli(op)?;
        let p_plus = ((1.0 + self.inner(&o).re) / 2.0).clamp(0.0, 1.0);
        let sign = if p_plus < NULL_NORM {
            Sign::Minus
        } else if 1.0 - p_plus < NULL_NORM || rng.random::<f64>() < p_plus {
            // certain outcomes draw nothing from the stream
            Sign::Plus
        } else {
            Sign::Minus
        };
        let s = sign.value() as f64;
        let amps = self
            .amps
            .iter()
            .zip(&o.amps)
            .map(|(a, b)| (a + b * s) * 0.5)
            .collect();
        StateVector { n: self.n, amps }
            .normalized()
            .map(|(_, st)| (sign, st))
            .ok_or_else(|| QsimError::NotNormalized(self.norm_sqr()))
    }

    fn check_qubit(&self, q: usize) -> Result<usize, QsimError> {
        if q >= self.n {
            return Err(QsimError::QubitOutOfRange {
                qubit: q,
                n: self.n,
            });
        }
        Ok(self.n - 1 - q)
    }

    fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) -> Result<(), QsimError> {
        let bit = 1 << self.check_qubit(q)?;
        for b in 0..self.amps.len() {
            if b & bit == 0 {
                let (a0, a1) = (self.amps[b], self.amps[b | bit]);
                self.amps[b] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[b | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    /// Applies a unitary gate; measurement and reset go through
    /// [`StateVector::measure_qubit`] and [`StateVector::reset_qubit`].
    pub fn apply_gate(&mut self, gate: &GateOp) -> Result<(), QsimError> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (zero, one) = (c(0.0, 0.0), c(1.0, 0.0));
        match *gate {
            GateOp::Hadamard(q) => {
                self.apply_single(q, [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]])
            }
            GateOp::Phase(q) => self.apply_single(q, [[one, zero], [zero, c(0.0, 1.0)]]),
            GateOp::PhaseDagger(q) => self.apply_single(q, [[one, zero], [zero, c(0.0, -1.0)]]),
            GateOp::PauliX(q) => self.apply_single(q, [[zero, one], [one, zero]]),
            GateOp::Cnot { control, target } => {
                if control == target {
                    return Err(QsimError::SameQubit(control));
                }
                let cb = 1 << self.check_qubit(control)?;
                let tb = 1 << self.check_qubit(target)?;
                for b in 0..self.amps.len() {
                    if b & cb != 0 && b & tb == 0 {
                        self.amps.swap(b, b | tb);
                    }
                }
                Ok(())
            }
            GateOp::Measure { .. } | GateOp::Reset(_) => Ok(()),
        }
    }

    /// Z-basis measurement of one qubit; returns the bit.
    pub fn measure_qubit<R: RngCore + ?Sized>(
        &mut self,
        q: usize,
        rng: &mut R,
    ) -> Result<u8, QsimError> {
        let bit = 1 << self.check_qubit(q)?;
        let p1: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(b, _)| b & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let outcome = if p1 < NULL_NORM {
            0
        } else if 1.0 - p1 < NULL_NORM {
            1
        } else {
            (rng.random::<f64>() < p1) as u8
        };
        let keep = if outcome == 1 { p1 } else { 1.0 - p1 };
        let s = 1.0 / keep.sqrt();
        for (b, a) in self.amps.iter_mut().enumerate() {
            if (b & bit != 0) == (outcome == 1) {
                *a *= s;
            } else {
                *a = c(0.0, 0.0);
            }
        }
        Ok(outcome)
    }

    /// Measures a qubit and flips it back to `|0⟩`.
    pub fn reset_qubit<R: RngCore + ?Sized>(
        &mut self,
        q: usize,
        rng: &mut R,
    ) -> Result<u8, QsimError> {
        let m = self.measure_qubit(q, rng)?;
        if m == 1 {
            self.apply_gate(&GateOp::PauliX(q))?;
        }
        Ok(m)
    }
}

/// Triple singlet of the two-player eloily game, player-major: qubits
/// `(i, 3 + i)` hold `(|01⟩ − |10⟩)/√2` for `i = 0, 1`, and qubits `(2, 5)`
/// hold `(−|01⟩ + |10⟩)/√2`.
pub fn reference_state_two_players() -> Result<StateVector, QsimError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let singlet =
        StateVector::from_amplitudes(vec![c(0.0, 0.0), c(h, 0.0), c(-h, 0.0), c(0.0, 0.0)])?;
    let flipped =
        StateVector::from_amplitudes(vec![c(0.0, 0.0), c(-h, 0.0), c(h, 0.0), c(0.0, 0.0)])?;
    // pair-major order (A1 B1 A2 B2 A3 B3) to player-major
    singlet
        .tensor(&singlet)?
        .tensor(&flipped)?
        .permute_qubits(&[0, 3, 1, 4, 2, 5])
}

/// `|GHZ₄⟩^{⊗3}` with qubit `i` of each player in the `i`-th GHZ copy.
pub fn reference_state_four_players() -> Result<StateVector, QsimError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut ghz = vec![c(0.0, 0.0); 16];
    ghz[0] = c(h, 0.0);
    ghz[15] = c(h, 0.0);
    let ghz = StateVector::from_amplitudes(ghz)?;
    let copies = ghz.tensor(&ghz)?.tensor(&ghz)?;
    // copy k, player j sits at 4k + j; it moves to 3j + k
    let perm: Vec<usize> = (0..12).map(|q| 3 * (q % 4) + q / 4).collect();
    copies.permute_qubits(&perm)
}

/// `(|00⟩ + |11⟩)/√2 ⊗ (|00⟩ + |11⟩)/√2` with Alice on qubits 0, 1.
pub fn bell_pairs_two_qubit() -> Result<StateVector, QsimError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let phi = StateVector::from_amplitudes(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)])?;
    phi.tensor(&phi)?.permute_qubits(&[0, 2, 1, 3])
}

/// A shared state stabilized by `O^{⊗r}` for every operator of a family.
#[derive(Debug, Clone)]
pub struct SharedStateSpec {
    pub players: usize,
    pub qubits_per_player: usize,
    pub family: Vec<PauliOperator>,
}

impl SharedStateSpec {
    /// The 27 eloily observables replicated over `players`.
    pub fn eloily(players: usize) -> Result<Self, QsimError> {
        let g = build_eloily(&canonical_q())?;
        Ok(SharedStateSpec {
            players,
            qubits_per_player: 3,
            family: g.points().iter().map(|p| p.label).collect(),
        })
    }

    pub fn total_qubits(&self) -> usize {
        self.players * self.qubits_per_player
    }
}

/// `(1 + O^{⊗r})/2 |ψ⟩`, renormalized; `None` when annihilated.
pub fn stabilizer_project(
    state: &StateVector,
    op: &PauliOperator,
    players: usize,
) -> Result<Option<StateVector>, QsimError> {
    let full = op.replicate(players)?;
    Ok(state.project(&full, Sign::Plus)?.map(|(_, s)| s))
}

/// Projects basis seeds `|0⟩, |1⟩, …` in order through every stabilizer
/// and returns the first survivor.
pub fn find_shared_state(spec: &SharedStateSpec) -> Result<StateVector, QsimError> {
    let n = spec.total_qubits();
    if n > MAX_QUBITS {
        return Err(QsimError::TooManyQubits(n));
    }
    'seeds: for seed in 0..1usize << n {
        let mut state = StateVector::basis(n, seed)?;
        for op in &spec.family {
            match stabilizer_project(&state, op, spec.players)? {
                Some(s) => state = s,
                None => continue 'seeds,
            }
        }
        return Ok(state);
    }
    Err(QsimError::NoSharedState)
}

/// Largest `‖O^{⊗r}|ψ⟩ − |ψ⟩‖` over the family.
pub fn stabilizer_residual(state: &StateVector, spec: &SharedStateSpec) -> Result<f64, QsimError> {
    let mut worst: f64 = 0.0;
    for op in &spec.family {
        let o = state.apply_pauli(&op.replicate(spec.players)?)?;
        let r: f64 = o
            .amps
            .iter()
            .zip(&state.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        worst = worst.max(r.sqrt());
    }
    Ok(worst)
}

fn check_commuting(ops: &[PauliOperator]) -> Result<(), QsimError> {
    for (i, a) in ops.iter().enumerate() {
        for b in &ops[i + 1..] {
            if !a.commutes_with(b) {
                return Err(QsimError::NonCommuting(a.to_string(), b.to_string()));
            }
        }
    }
    Ok(())
}

/// Sequential projective measurement of commuting observables.
pub fn measure_joint<R: RngCore + ?Sized>(
    state: &StateVector,
    ops: &[PauliOperator],
    rng: &mut R,
) -> Result<(Vec<Sign>, StateVector), QsimError> {
    check_commuting(ops)?;
    let mut s = state.clone();
    let mut out = Vec::with_capacity(ops.len());
    for op in ops {
        let (o, next) = s.measure(op, rng)?;
        out.push(o);
        s = next;
    }
    Ok((out, s))
}

/// Every non-null outcome tuple of a sequential measurement with its Born
/// probability.
pub fn joint_distribution(
    state: &StateVector,
    ops: &[PauliOperator],
) -> Result<Vec<(Vec<Sign>, f64)>, QsimError> {
    check_commuting(ops)?;
    let mut out = Vec::new();
    let mut stack = vec![(Vec::new(), 1.0, state.clone())];
    while let Some((outcomes, p, s)) = stack.pop() {
        if outcomes.len() == ops.len() {
            out.push((outcomes, p));
            continue;
        }
        for sign in [Sign::Minus, Sign::Plus] {
            if let Some((q, next)) = s.project(&ops[outcomes.len()], sign)? {
                let mut o = outcomes.clone();
                o.push(sign);
                stack.push((o, p * q, next));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum GateOp {
    Hadamard(usize),
    /// `S = diag(1, i)`.
    Phase(usize),
    /// `S† = diag(1, −i)`.
    PhaseDagger(usize),
    PauliX(usize),
    Cnot {
        control: usize,
        target: usize,
    },
    Measure {
        qubit: usize,
        outcome: u8,
    },
    Reset(usize),
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateOp::Hadamard(q) => write!(f, "h q{q}"),
            GateOp::Phase(q) => write!(f, "s q{q}"),
            GateOp::PhaseDagger(q) => write!(f, "sdg q{q}"),
            GateOp::PauliX(q) => write!(f, "x q{q}"),
            GateOp::Cnot { control, target } => write!(f, "cx q{control} q{target}"),
            GateOp::Measure { qubit, outcome } => write!(f, "measure q{qubit} -> {outcome}"),
            GateOp::Reset(q) => write!(f, "reset q{q}"),
        }
    }
}

/// Gates rotating qubit `q`'s `p` eigenbasis onto the Z basis.
pub fn basis_change(p: Pauli, q: usize) -> Vec<GateOp> {
    match p {
        Pauli::X => vec![GateOp::Hadamard(q)],
        Pauli::Y => vec![GateOp::PhaseDagger(q), GateOp::Hadamard(q)],
        Pauli::Z | Pauli::I => Vec::new(),
    }
}

/// Inverse of [`basis_change`].
pub fn undo_basis_change(p: Pauli, q: usize) -> Vec<GateOp> {
    match p {
        Pauli::X => vec![GateOp::Hadamard(q)],
        Pauli::Y => vec![GateOp::Hadamard(q), GateOp::Phase(q)],
        Pauli::Z | Pauli::I => Vec::new(),
    }
}

/// Circuit transcript, one gate per line.
pub fn transcript_text(gates: &[GateOp]) -> String {
    gates.iter().map(|g| format!("{g}\n")).collect()
}

struct Circuit<'a> {
    state: &'a mut StateVector,
    log: &'a mut Vec<GateOp>,
}

impl Circuit<'_> {
    fn run(&mut self, gates: Vec<GateOp>) -> Result<(), QsimError> {
        for g in gates {
            self.state.apply_gate(&g)?;
            self.log.push(g);
        }
        Ok(())
    }

    fn measure(&mut self, q: usize, rng: &mut dyn RngCore) -> Result<u8, QsimError> {
        let outcome = self.state.measure_qubit(q, rng)?;
        self.log.push(GateOp::Measure { qubit: q, outcome });
        Ok(outcome)
    }
}

/// Measures a line the delegation way.
///
/// The first operator is rotated to Z on its support, fanned into the
/// delegation qubit by controlled-NOTs, read off the delegation qubit and
/// rotated back; the delegation qubit is then reset for reuse. The second
/// operator is rotated and read directly from the register. The third entry
/// is fixed by the line sign.
pub fn delegation_protocol(
    state: &mut StateVector,
    line: [PauliOperator; 3],
    sign: Sign,
    register: &[usize],
    ancilla: usize,
    rng: &mut dyn RngCore,
) -> Result<([i8; 3], Vec<GateOp>), QsimError> {
    validate_line(&line, sign)?;
    let w = line[0].width();
    if register.len() != w {
        return Err(QsimError::InvalidLine(format!(
            "{} register qubits for a {w}-qubit line",
            register.len()
        )));
    }
    if register.contains(&ancilla) {
        return Err(QsimError::SameQubit(ancilla));
    }
    let mut log = Vec::new();
    let mut circuit = Circuit {
        state,
        log: &mut log,
    };

    let first = line[0];
    let support: Vec<(usize, Pauli)> = (0..w)
        .filter(|&k| first.symbol(k) != Pauli::I)
        .map(|k| (register[k], first.symbol(k)))
        .collect();
    for &(q, p) in &support {
        circuit.run(basis_change(p, q))?;
    }
    for &(q, _) in &support {
        circuit.run(vec![GateOp::Cnot {
            control: q,
            target: ancilla,
        }])?;
    }
    let m1 = circuit.measure(ancilla, rng)?;
    for &(q, p) in support.iter().rev() {
        circuit.run(undo_basis_change(p, q))?;
    }
    if m1 == 1 {
        circuit.run(vec![GateOp::PauliX(ancilla)])?;
    }
    circuit.log.push(GateOp::Reset(ancilla));
    let o1 = first.sign().value() * if m1 == 1 { -1 } else { 1 };

    let second = line[1];
    let mut parity = 0;
    let support: Vec<(usize, Pauli)> = (0..w)
        .filter(|&k| second.symbol(k) != Pauli::I)
        .map(|k| (register[k], second.symbol(k)))
        .collect();
    for &(q, p) in &support {
        circuit.run(basis_change(p, q))?;
    }
    for &(q, _) in &support {
        parity ^= circuit.measure(q, rng)?;
    }
    for &(q, p) in support.iter().rev() {
        circuit.run(undo_basis_change(p, q))?;
    }
    let o2 = second.sign().value() * if parity == 1 { -1 } else { 1 };
    Ok(([o1, o2, sign.value() * o1 * o2], log))
}

fn validate_line(line: &[PauliOperator; 3], sign: Sign) -> Result<(), QsimError> {
    match crate::pauli::line_sign(&line[0], &line[1], &line[2]) {
        Ok(s) if s == sign => Ok(()),
        Ok(s) => Err(QsimError::InvalidLine(format!(
            "operators multiply to {s}, line sign is {sign}"
        ))),
        Err(e) => Err(QsimError::InvalidLine(e.to_string())),
    }
}

/// How a player turns a line into answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Project onto the first two operators; third from the sign.
    Direct,
    /// Delegation circuit with one shared, reset delegation qubit.
    Delegation,
    /// Project onto all three operators.
    ThreeMeasurements,
}

/// Quantum players sharing `state`; answers are negated for skew operators
/// when `skew_flip` is set (Alice only).
#[derive(Debug, Clone)]
pub struct QuantumResponder {
    state: StateVector,
    protocol: Protocol,
    skew_flip: bool,
    pub last_circuit: Vec<GateOp>,
}

impl QuantumResponder {
    pub fn new(state: StateVector, protocol: Protocol) -> Self {
        QuantumResponder {
            state,
            protocol,
            skew_flip: false,
            last_circuit: Vec::new(),
        }
    }

    /// Two-qubit strategy on Bell pairs where Alice flips skew outcomes.
    pub fn skew_flip(state: StateVector, protocol: Protocol) -> Self {
        QuantumResponder {
            skew_flip: true,
            ..QuantumResponder::new(state, protocol)
        }
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }
}

/// Skew-flip strategy for a two-qubit game (grid or doily) on Bell pairs.
pub fn skew_flip_responder(
    g: &Geometry,
    protocol: Protocol,
) -> Result<QuantumResponder, QsimError> {
    if g.width() != 2 {
        return Err(QsimError::InvalidLine(format!(
            "skew flipping needs two-qubit labels, {} has width {}",
            g.name(),
            g.width()
        )));
    }
    Ok(QuantumResponder::skew_flip(
        bell_pairs_two_qubit()?,
        protocol,
    ))
}

fn line_ops(g: &Geometry, line: usize) -> [PauliOperator; 3] {
    g.members(line).map(|p| *g.label_of(p))
}

fn flip_skew(line: &[PauliOperator; 3], answers: &mut [i8; 3]) {
    for (a, op) in answers.iter_mut().zip(line) {
        if op.is_skew() {
            *a = -*a;
        }
    }
}

impl Responder for QuantumResponder {
    fn respond(
        &mut self,
        spec: &GameSpec,
        choice: &RefereeChoice,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<[i8; 3]>, GameError> {
        let g = spec.geometry();
        let w = g.width();
        let players = choice.lines.len();
        let register = players * w;
        if self.state.qubits() != register {
            return Err(QsimError::DimensionMismatch {
                state: self.state.qubits(),
                op: register,
            }
            .into());
        }
        self.last_circuit.clear();
        let mut answers = Vec::with_capacity(players);
        match self.protocol {
            Protocol::Delegation => {
                let mut s = self.state.tensor(&StateVector::basis(1, 0)?)?;
                for (k, &l) in choice.lines.iter().enumerate() {
                    let ops = line_ops(g, l);
                    let qubits: Vec<usize> = (k * w..(k + 1) * w).collect();
                    let (mut a, log) =
                        delegation_protocol(&mut s, ops, g.line(l).sign(), &qubits, register, rng)?;
                    if self.skew_flip && k == 0 {
                        flip_skew(&ops, &mut a);
                    }
                    self.last_circuit.extend(log);
                    answers.push(a);
                }
            }
            Protocol::Direct | Protocol::ThreeMeasurements => {
                let mut s = self.state.clone();
                for (k, &l) in choice.lines.iter().enumerate() {
                    let ops = line_ops(g, l);
                    let embedded = ops
                        .iter()
                        .map(|o| o.embed(k * w, register))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(QsimError::from)?;
                    let count = if self.protocol == Protocol::Direct {
                        2
                    } else {
                        3
                    };
                    let (out, next) = measure_joint(&s, &embedded[..count], rng)?;
                    s = next;
                    let (o1, o2) = (out[0].value(), out[1].value());
                    let third = g.line(l).sign().value() * o1 * o2;
                    if count == 3 && out[2].value() != third {
                        return Err(GameError::Responder(format!(
                            "measured {} for the third operator, parity requires {third}",
                            out[2]
                        )));
                    }
                    let mut a = [o1, o2, third];
                    if self.skew_flip && k == 0 {
                        flip_skew(&ops, &mut a);
                    }
                    answers.push(a);
                }
            }
        }
        Ok(answers)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumValue {
    pub probability: f64,
    pub choices: usize,
    pub branches: usize,
}

/// Exact win probability of the measurement strategy on `state`: every
/// referee choice, every measurement branch, weighted by Born probability.
/// Each player projects onto their line's first two operators and completes
/// the third from the line sign.
pub fn quantum_win_probability(
    spec: &GameSpec,
    state: &StateVector,
    skew_flip: bool,
) -> Result<QuantumValue, QsimError> {
    let g = spec.geometry();
    let w = g.width();
    let register = spec.players() * w;
    if state.qubits() != register {
        return Err(QsimError::DimensionMismatch {
            state: state.qubits(),
            op: register,
        });
    }
    let choices: Vec<_> = spec.choices().collect();
    let per_choice = choices
        .par_iter()
        .map(|(choice, weight)| -> Result<(f64, usize), QsimError> {
            let mut ops = Vec::with_capacity(2 * choice.lines.len());
            for (k, &l) in choice.lines.iter().enumerate() {
                let [a, b, _] = line_ops(g, l);
                ops.push(a.embed(k * w, register)?);
                ops.push(b.embed(k * w, register)?);
            }
            let dist = joint_distribution(state, &ops)?;
            let mut win = 0.0;
            for (outcomes, p) in &dist {
                let answers: Vec<[i8; 3]> = choice
                    .lines
                    .iter()
                    .enumerate()
                    .map(|(k, &l)| {
                        let (o1, o2) = (outcomes[2 * k].value(), outcomes[2 * k + 1].value());
                        let mut a = [o1, o2, g.line(l).sign().value() * o1 * o2];
                        if skew_flip && k == 0 {
                            flip_skew(&line_ops(g, l), &mut a);
                        }
                        a
                    })
                    .collect();
                if spec.wins(choice, &answers) {
                    win += p;
                }
            }
            let w = *weight.numer() as f64 / *weight.denom() as f64;
            Ok((w * win, dist.len()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QuantumValue {
        probability: per_choice.iter().map(|x| x.0).sum(),
        choices: choices.len(),
        branches: per_choice.iter().map(|x| x.1).sum(),
    })
}

/// Independent route to the same value: the answer at the chosen point has
/// the statistics of measuring that point's operator, so a choice at `p` is
/// won with probability `(1 ± ⟨O_p^{⊗r}⟩)/2`, the sign accounting for a
/// skew flip.
pub fn expectation_win_probability(
    spec: &GameSpec,
    state: &StateVector,
    skew_flip: bool,
) -> Result<f64, QsimError> {
    let g = spec.geometry();
    let mut total = 0.0;
    for p in 0..g.num_points() {
        let op = g.label_of(p);
        let e = state
            .expectation_complex(&op.replicate(spec.players())?)?
            .re;
        let e = if skew_flip && op.is_skew() { -e } else { e };
        total += (1.0 + e) / 2.0;
    }
    Ok(total / g.num_points() as f64)
}

/// Plays `rounds` rounds in parallel. Round `i` uses its own generator
/// seeded from `(seed, i)`, so the outcome does not depend on scheduling.
pub fn simulate_quantum(
    spec: &GameSpec,
    responder: &QuantumResponder,
    rounds: u64,
    seed: u64,
) -> Result<u64, GameError> {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    let wins = (0..rounds)
        .into_par_iter()
        .map(|i| -> Result<u64, GameError> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let mut r = responder.clone();
            let t = crate::games::play_round(spec, &mut r, i, &mut rng)?;
            Ok(t.win as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(wins)
}
