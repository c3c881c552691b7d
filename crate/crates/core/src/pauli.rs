//! N-qubit Pauli observables encoded over F2, with exact phase tracking.
//!
//! An operator is stored as a sign and two bit masks: `x` holds the
//! μ-components and `z` the ν-components of `X^μ Z^ν` on each qubit. Qubit 0
//! is the leftmost tensor factor and lives in the most significant bit of
//! each mask, so the label `XYI` has `x = 0b110`, `z = 0b010`.
//!
//! Projective points of PG(2N-1, 2) share the same packing: the point id is
//! `(x << N) | z`, i.e. the binary word `[μ1..μN ν1..νN]` read most
//! significant first.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest register an operator may act on.
pub const MAX_WIDTH: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("invalid width {0}, expected 1..={MAX_WIDTH}")]
    InvalidWidth(usize),
    #[error("empty Pauli label")]
    EmptyLabel,
    #[error("unexpected character {found:?} at position {position} of Pauli label")]
    Parse { position: usize, found: char },
    #[error("operator with phase {0} is not Hermitian")]
    NonHermitian(Phase),
    #[error("the zero vector is not a projective point")]
    ZeroPoint,
    #[error("point id {id} out of range for width {width}")]
    PointOutOfRange { id: u64, width: usize },
    #[error("invalid context: {0}")]
    InvalidContext(String),
}

/// A fourth root of unity `i^k`, stored as `k mod 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    /// The real sign, if this phase is ±1.
    pub fn to_sign(self) -> Option<Sign> {
        match self.0 {
            0 => Some(Sign::Plus),
            2 => Some(Sign::Minus),
            _ => None,
        }
    }

    /// `(re, im)` of `i^k`.
    pub fn to_complex(self) -> (f64, f64) {
        match self.0 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) & 3)
    }
}

impl From<Sign> for Phase {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Plus => Phase::ONE,
            Sign::Minus => Phase::MINUS_ONE,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "1",
            1 => "i",
            2 => "-1",
            _ => "-i",
        })
    }
}

/// A real sign ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    /// F2 encoding: `+1 -> 0`, `-1 -> 1`.
    pub fn bit(self) -> u8 {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit & 1 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn is_negative(self) -> bool {
        self == Sign::Minus
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_bit(self.bit() ^ rhs.bit())
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        Sign::from_bit(self.bit() ^ 1)
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// Single-qubit Pauli symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NONTRIVIAL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// `(μ, ν)` bits.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Z => (false, true),
            Pauli::Y => (true, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

fn check_width(width: usize) -> Result<(), PauliError> {
    if width == 0 || width > MAX_WIDTH {
        Err(PauliError::InvalidWidth(width))
    } else {
        Ok(())
    }
}

fn width_mask(width: usize) -> u32 {
    if width >= 32 {
        u32::MAX
    } else {
        (1u32 << width) - 1
    }
}

/// A Hermitian N-qubit Pauli observable `sign · σ1 ⊗ … ⊗ σN`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    width: u8,
    sign: Sign,
    x: u32,
    z: u32,
}

impl PauliOperator {
    pub fn new(sign: Sign, symbols: &[Pauli]) -> Result<Self, PauliError> {
        check_width(symbols.len())?;
        let n = symbols.len();
        let (mut x, mut z) = (0u32, 0u32);
        for (k, p) in symbols.iter().enumerate() {
            let (mu, nu) = p.bits();
            let bit = 1u32 << (n - 1 - k);
            if mu {
                x |= bit;
            }
            if nu {
                z |= bit;
            }
        }
        Ok(PauliOperator {
            width: n as u8,
            sign,
            x,
            z,
        })
    }

    pub fn from_bits(width: usize, sign: Sign, x: u32, z: u32) -> Result<Self, PauliError> {
        check_width(width)?;
        let m = width_mask(width);
        Ok(PauliOperator {
            width: width as u8,
            sign,
            x: x & m,
            z: z & m,
        })
    }

    /// Builds `phase · σ1 ⊗ … ⊗ σN`; phases ±i are rejected.
    pub fn with_phase(phase: Phase, symbols: &[Pauli]) -> Result<Self, PauliError> {
        let sign = phase.to_sign().ok_or(PauliError::NonHermitian(phase))?;
        Self::new(sign, symbols)
    }

    pub fn identity(width: usize) -> Result<Self, PauliError> {
        Self::from_bits(width, Sign::Plus, 0, 0)
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn xbits(&self) -> u32 {
        self.x
    }

    pub fn zbits(&self) -> u32 {
        self.z
    }

    pub fn symbol(&self, qubit: usize) -> Pauli {
        let bit = 1u32 << (self.width() - 1 - qubit);
        Pauli::from_bits(self.x & bit != 0, self.z & bit != 0)
    }

    pub fn symbols(&self) -> Vec<Pauli> {
        (0..self.width()).map(|k| self.symbol(k)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Odd number of `Y` factors.
    pub fn is_skew(&self) -> bool {
        self.y_count() & 1 == 1
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    /// Same symbols, sign forced to `+1`.
    pub fn unsigned(self) -> Self {
        self.with_sign(Sign::Plus)
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() & 1 == 0
    }

    /// The projective point of this operator (its sign is forgotten).
    pub fn point(&self) -> Result<ProjectivePoint, PauliError> {
        let id = ((self.x as u64) << self.width) | self.z as u64;
        ProjectivePoint::from_id(self.width(), id)
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &PauliOperator) -> Result<PauliOperator, PauliError> {
        let w = self.width() + other.width();
        check_width(w)?;
        Ok(PauliOperator {
            width: w as u8,
            sign: self.sign * other.sign,
            x: (self.x << other.width) | other.x,
            z: (self.z << other.width) | other.z,
        })
    }

    /// `self ⊗ self ⊗ … ⊗ self` with `copies` factors.
    pub fn replicate(&self, copies: usize) -> Result<PauliOperator, PauliError> {
        if copies == 0 {
            return Err(PauliError::InvalidWidth(0));
        }
        let mut out = *self;
        for _ in 1..copies {
            out = out.tensor(self)?;
        }
        Ok(out)
    }

    /// Embeds this operator on qubits `offset..offset+width` of a register of
    /// `total` qubits, identity elsewhere.
    pub fn embed(&self, offset: usize, total: usize) -> Result<PauliOperator, PauliError> {
        if offset + self.width() > total {
            return Err(PauliError::WidthMismatch(offset + self.width(), total));
        }
        check_width(total)?;
        let shift = total - offset - self.width();
        Ok(PauliOperator {
            width: total as u8,
            sign: self.sign,
            x: self.x << shift,
            z: self.z << shift,
        })
    }

    /// `i^k` such that the operator equals `i^k · X^x Z^z` qubit by qubit
    /// (uses `Y = i X Z`).
    pub(crate) fn xz_phase(&self) -> Phase {
        Phase::from(self.sign) * Phase::from_exponent(self.y_count() as i64)
    }
}

/// Product of two operators: `a · b = phase · product`, where `product`
/// carries sign `+1` and all scalar information sits in `phase`.
pub fn multiply(
    a: &PauliOperator,
    b: &PauliOperator,
) -> Result<(Phase, PauliOperator), PauliError> {
    if a.width != b.width {
        return Err(PauliError::WidthMismatch(a.width(), b.width()));
    }
    let x = a.x ^ b.x;
    let z = a.z ^ b.z;
    // X^x1 Z^z1 X^x2 Z^z2 = (-1)^{|z1 & x2|} X^{x1^x2} Z^{z1^z2}
    let k = a.xz_phase().exponent() as i64
        + b.xz_phase().exponent() as i64
        + 2 * (a.z & b.x).count_ones() as i64
        - (x & z).count_ones() as i64;
    let product = PauliOperator {
        width: a.width,
        sign: Sign::Plus,
        x,
        z,
    };
    Ok((Phase::from_exponent(k), product))
}

/// `ε` with `o1 · o2 · o3 = ε I` for a context of three commuting operators.
pub fn line_sign(
    o1: &PauliOperator,
    o2: &PauliOperator,
    o3: &PauliOperator,
) -> Result<Sign, PauliError> {
    if o1.width != o2.width || o1.width != o3.width {
        return Err(PauliError::WidthMismatch(
            o1.width(),
            o2.width().max(o3.width()),
        ));
    }
    if !(o1.commutes_with(o2) && o1.commutes_with(o3) && o2.commutes_with(o3)) {
        return Err(PauliError::InvalidContext(format!(
            "{o1}, {o2}, {o3} do not pairwise commute"
        )));
    }
    let (ph12, p12) = multiply(o1, o2)?;
    let (ph, p) = multiply(&p12, o3)?;
    if !p.is_identity() {
        return Err(PauliError::InvalidContext(format!(
            "{o1} · {o2} · {o3} is not proportional to the identity"
        )));
    }
    (ph12 * ph)
        .to_sign()
        .ok_or(PauliError::NonHermitian(ph12 * ph))
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign.is_negative() {
            f.write_str("-")?;
        }
        for p in self.symbols() {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliOperator {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars().enumerate().peekable();
        let sign = match chars.peek() {
            Some((_, '-')) => {
                chars.next();
                Sign::Minus
            }
            Some((_, '+')) => {
                chars.next();
                Sign::Plus
            }
            _ => Sign::Plus,
        };
        let mut symbols = Vec::new();
        for (position, c) in chars {
            let p = Pauli::from_char(c).ok_or(PauliError::Parse { position, found: c })?;
            symbols.push(p);
        }
        if symbols.is_empty() {
            return Err(PauliError::EmptyLabel);
        }
        PauliOperator::new(sign, &symbols)
    }
}

/// A nonzero vector of F2^{2N}, i.e. a point of PG(2N-1, 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectivePoint {
    width: u8,
    id: u64,
}

impl ProjectivePoint {
    pub fn from_id(width: usize, id: u64) -> Result<Self, PauliError> {
        check_width(width)?;
        if id == 0 {
            return Err(PauliError::ZeroPoint);
        }
        if width < 32 && id >> (2 * width) != 0 {
            return Err(PauliError::PointOutOfRange { id, width });
        }
        Ok(ProjectivePoint {
            width: width as u8,
            id,
        })
    }

    /// All `4^N - 1` points in increasing id order.
    pub fn all(width: usize) -> impl Iterator<Item = ProjectivePoint> {
        let w = width as u8;
        (1u64..(1u64 << (2 * width))).map(move |id| ProjectivePoint { width: w, id })
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn mu(&self) -> u32 {
        (self.id >> self.width) as u32
    }

    pub fn nu(&self) -> u32 {
        (self.id & ((1u64 << self.width) - 1)) as u32
    }

    /// Coordinates `[μ1 … μN ν1 … νN]`.
    pub fn coords(&self) -> Vec<u8> {
        let n = 2 * self.width();
        (0..n)
            .map(|k| ((self.id >> (n - 1 - k)) & 1) as u8)
            .collect()
    }

    /// The `+1`-signed operator at this point.
    pub fn operator(&self) -> PauliOperator {
        PauliOperator {
            width: self.width,
            sign: Sign::Plus,
            x: self.mu(),
            z: self.nu(),
        }
    }

    /// F2 sum, `None` when the two points coincide.
    pub fn add(&self, other: &ProjectivePoint) -> Option<ProjectivePoint> {
        let id = self.id ^ other.id;
        (id != 0 && self.width == other.width).then_some(ProjectivePoint {
            width: self.width,
            id,
        })
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.operator())
    }
}

/// `⟨p, q⟩ = Σ μi ν'i + νi μ'i (mod 2)`.
pub fn symplectic_form(p: &ProjectivePoint, q: &ProjectivePoint) -> Result<u8, PauliError> {
    if p.width != q.width {
        return Err(PauliError::WidthMismatch(p.width(), q.width()));
    }
    Ok(symplectic_bits(p.mu(), p.nu(), q.mu(), q.nu()))
}

pub(crate) fn symplectic_bits(x1: u32, z1: u32, x2: u32, z2: u32) -> u8 {
    (((x1 & z2) ^ (z1 & x2)).count_ones() & 1) as u8
}

/// `Q0(p) = Σ μi νi`: 1 iff the operator at `p` is skew.
pub fn q0(p: &ProjectivePoint) -> u8 {
    ((p.mu() & p.nu()).count_ones() & 1) as u8
}

/// `Q_q(p) = Q0(p) + ⟨p, q⟩`.
pub fn qq(q: &ProjectivePoint, p: &ProjectivePoint) -> Result<u8, PauliError> {
    Ok(q0(p) ^ symplectic_form(p, q)?)
}
