//! Signed n-qubit Pauli strings in symplectic (x-mask, z-mask) form.
//!
//! A [`PauliString`] is a tensor product of single-qubit Pauli letters with a
//! global sign of plus or minus one. Letters are stored as two bit masks: bit
//! `q` of `x` is set when qubit `q` carries an X component and bit `q` of `z`
//! when it carries a Z component (Y sets both). Products of two strings can
//! pick up factors of plus or minus i; those are returned as a
//! [`PhasedPauli`] carrying a quarter-phase code, and callers that only deal
//! with commuting operators can collapse the result back to a signed string.
//!
//! Text form is a sign character followed by one letter per qubit with qubit
//! zero leftmost, e.g. `+IXYZ` or `-ZZIII`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Hard cap on register width so masks fit in a `u64`.
pub const MAX_QUBITS: usize = 64;

/// A single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Reassembles a letter from its X/Z component bits.
    pub fn from_xz(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    pub fn x_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn z_bit(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
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
}

/// A signed Pauli operator on `n` qubits.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    negative: bool,
}

impl PauliString {
    /// The identity operator with a plus sign.
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_QUBITS, "width {n} out of range");
        PauliString {
            n,
            x: 0,
            z: 0,
            negative: false,
        }
    }

    /// A single letter on `qubit`, identity elsewhere, plus sign.
    pub fn single(n: usize, qubit: usize, letter: Pauli) -> Self {
        assert!(qubit < n, "qubit {qubit} out of range for width {n}");
        let mut p = PauliString::identity(n);
        if letter.x_bit() {
            p.x |= 1 << qubit;
        }
        if letter.z_bit() {
            p.z |= 1 << qubit;
        }
        p
    }

    /// Builds a string from a slice of letters (qubit 0 first).
    pub fn from_letters(letters: &[Pauli], negative: bool) -> Self {
        assert!(
            !letters.is_empty() && letters.len() <= MAX_QUBITS,
            "width {} out of range",
            letters.len()
        );
        let mut x = 0u64;
        let mut z = 0u64;
        for (q, l) in letters.iter().enumerate() {
            if l.x_bit() {
                x |= 1 << q;
            }
            if l.z_bit() {
                z |= 1 << q;
            }
        }
        PauliString {
            n: letters.len(),
            x,
            z,
            negative,
        }
    }

    /// Constructs directly from bit masks (plus sign). Masks must fit `n`.
    pub fn from_masks(n: usize, x: u64, z: u64, negative: bool) -> Self {
        assert!(n >= 1 && n <= MAX_QUBITS, "width {n} out of range");
        let full = Self::width_mask(n);
        assert!(x & !full == 0 && z & !full == 0, "mask exceeds width {n}");
        PauliString { n, x, z, negative }
    }

    fn width_mask(n: usize) -> u64 {
        if n == 64 {
            u64::MAX
        } else {
            (1u64 << n) - 1
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// The letter on `qubit`.
    pub fn letter(&self, qubit: usize) -> Pauli {
        assert!(qubit < self.n, "qubit {qubit} out of range");
        Pauli::from_xz(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    /// The number of non-identity letters.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    /// +1 or -1.
    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    /// The same letters with a plus sign.
    pub fn abs(&self) -> Self {
        PauliString {
            negative: false,
            ..*self
        }
    }

    /// The same letters with the sign flipped.
    pub fn negated(&self) -> Self {
        PauliString {
            negative: !self.negative,
            ..*self
        }
    }

    /// Bit mask over qubits carrying a non-identity letter.
    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    /// Ascending indices of qubits carrying a non-identity letter.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        let mask = self.support_mask();
        (0..self.n).filter(move |q| mask >> q & 1 == 1)
    }

    /// True when the two operators commute; ignores signs.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let parity =
            (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        Ok(parity % 2 == 0)
    }

    /// Embeds into a wider register (new qubits carry identity letters).
    pub fn embedded(&self, new_n: usize) -> Self {
        assert!(new_n >= self.n && new_n <= MAX_QUBITS);
        PauliString { n: new_n, ..*self }
    }

    /// The operator product `self * other` with full phase bookkeeping.
    ///
    /// Commuting operands yield a quarter-phase of 0 or 2 (a plain sign);
    /// anticommuting operands yield 1 or 3 (a factor of plus or minus i).
    pub fn multiply(&self, other: &PauliString) -> Result<PhasedPauli> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let a = XzForm::from_signed(self);
        let b = XzForm::from_signed(other);
        Ok(a.mul(&b).into_phased(self.n))
    }

    /// Uniformly random letters on each qubit; when `nonidentity` is set, the
    /// whole string is redrawn until at least one letter is non-identity.
    /// Always carries a plus sign.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, nonidentity: bool) -> Self {
        assert!(n >= 1 && n <= MAX_QUBITS, "width {n} out of range");
        loop {
            let mut x = 0u64;
            let mut z = 0u64;
            for q in 0..n {
                let k: u8 = rng.gen_range(0..4);
                if k & 1 == 1 {
                    x |= 1 << q;
                }
                if k & 2 == 2 {
                    z |= 1 << q;
                }
            }
            let p = PauliString {
                n,
                x,
                z,
                negative: false,
            };
            if !nonidentity || !p.is_identity() {
                return p;
            }
        }
    }
}

/// Uniformly random Pauli string; see [`PauliString::random`].
pub fn random_pauli<R: Rng + ?Sized>(rng: &mut R, n: usize, nonidentity: bool) -> PauliString {
    PauliString::random(rng, n, nonidentity)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.negative { '-' } else { '+' })?;
        for q in 0..self.n {
            write!(f, "{}", self.letter(q).to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        if body.is_empty() {
            return Err(Error::Parse {
                line: 1,
                msg: "empty Pauli string".into(),
            });
        }
        if body.len() > MAX_QUBITS {
            return Err(Error::Parse {
                line: 1,
                msg: format!("Pauli string longer than {MAX_QUBITS} qubits"),
            });
        }
        let mut letters = Vec::with_capacity(body.len());
        for c in body.chars() {
            match Pauli::from_char(c) {
                Some(l) => letters.push(l),
                None => {
                    return Err(Error::Parse {
                        line: 1,
                        msg: format!("invalid Pauli letter '{c}'"),
                    })
                }
            }
        }
        Ok(PauliString::from_letters(&letters, negative))
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A Pauli letter string together with a quarter-phase code `k`, denoting the
/// operator `i^k * letters`. Codes 0 and 2 are the signed (Hermitian) cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhasedPauli {
    n: usize,
    x: u64,
    z: u64,
    /// Exponent of i in front of the letter string, in `0..4`.
    phase: u8,
}

impl PhasedPauli {
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn quarter_phase(&self) -> u8 {
        self.phase
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        Pauli::from_xz(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    /// Collapses to a signed string when the phase is real (0 or 2).
    pub fn to_signed(&self) -> Option<PauliString> {
        match self.phase {
            0 => Some(PauliString {
                n: self.n,
                x: self.x,
                z: self.z,
                negative: false,
            }),
            2 => Some(PauliString {
                n: self.n,
                x: self.x,
                z: self.z,
                negative: true,
            }),
            _ => None,
        }
    }
}

impl fmt::Display for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        for q in 0..self.n {
            write!(f, "{}", self.letter(q).to_char())?;
        }
        Ok(())
    }
}

/// Internal representation `i^phase * X^x Z^z` used for products and
/// conjugation. The letter form is recovered by subtracting one factor of i
/// per Y letter (Y = i X Z).
#[derive(Debug, Clone, Copy)]
pub(crate) struct XzForm {
    pub phase: u8,
    pub x: u64,
    pub z: u64,
}

impl XzForm {
    pub fn from_signed(p: &PauliString) -> Self {
        let y = (p.x & p.z).count_ones() as u8;
        let sign = if p.negative { 2u8 } else { 0 };
        XzForm {
            phase: (y + sign) % 4,
            x: p.x,
            z: p.z,
        }
    }

    /// Letter string with quarter-phase `letter_phase` (i^letter_phase * letters).
    pub fn from_letter_form(letter_phase: u8, x: u64, z: u64) -> Self {
        let y = (x & z).count_ones() as u8;
        XzForm {
            phase: (letter_phase + y) % 4,
            x,
            z,
        }
    }

    /// Product rule: moving `Z^z_a` past `X^x_b` contributes (-1) per overlap.
    pub fn mul(&self, other: &XzForm) -> XzForm {
        let swaps = (self.z & other.x).count_ones() as u8;
        XzForm {
            phase: (self.phase + other.phase + 2 * (swaps % 2)) % 4,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        }
    }

    pub fn into_phased(self, n: usize) -> PhasedPauli {
        let y = (self.x & self.z).count_ones() as u8;
        PhasedPauli {
            n,
            x: self.x,
            z: self.z,
            phase: (self.phase + 4 - y % 4) % 4,
        }
    }

    /// Collapses to a signed string; panics if the phase is imaginary, which
    /// cannot happen for conjugation of a Hermitian operator by a unitary.
    pub fn into_signed(self, n: usize) -> PauliString {
        self.into_phased(n)
            .to_signed()
            .expect("conjugation preserves Hermiticity; phase must be real")
    }
}
