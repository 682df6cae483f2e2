//! Pauli strings and Pauli-decomposed Hamiltonians.
//!
//! Qubit ordering: the leftmost letter of a string acts on qubit 0, which is
//! the highest-order tensor factor. For a basis index `b`, qubit `j` of an
//! `n`-qubit register is bit `n - 1 - j` of `b`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};

/// Largest register handled by dense expansion.
pub const MAX_QUBITS: usize = 10;

/// Coefficients at or below this magnitude are dropped by [`decompose`].
pub const PRUNE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// 2x2 matrix of the single-qubit operator.
    pub fn matrix(self) -> ComplexMatrix {
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let data = match self {
            Pauli::I => [one, ZERO, ZERO, one],
            Pauli::X => [ZERO, one, one, ZERO],
            Pauli::Y => [ZERO, -i, i, ZERO],
            Pauli::Z => [one, ZERO, ZERO, -one],
        };
        ComplexMatrix::new(2, 2, data.to_vec()).expect("2x2")
    }
}

/// Tensor product of single-qubit Pauli operators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidArgument("empty Pauli string".into()));
        }
        Ok(Self { letters })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            letters: vec![Pauli::I; n.max(1)],
        }
    }

    /// String with index `idx` in base-4 enumeration order (leftmost letter
    /// most significant, `I < X < Y < Z`).
    pub fn from_index(n: usize, mut idx: usize) -> Self {
        let mut letters = vec![Pauli::I; n];
        for slot in letters.iter_mut().rev() {
            *slot = Pauli::ALL[idx % 4];
            idx /= 4;
        }
        Self { letters }
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Bit masks `(flip, phase)` and the number of `Y` letters: the string maps
    /// `|b>` to `i^ny (-1)^popcount(b & phase) |b ^ flip>`.
    fn masks(&self) -> (usize, usize, u32) {
        let n = self.letters.len();
        let mut flip = 0usize;
        let mut phase = 0usize;
        let mut ny = 0u32;
        for (j, &p) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - j);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    phase |= bit;
                    ny += 1;
                }
                Pauli::Z => phase |= bit,
            }
        }
        (flip, phase, ny)
    }

    fn phase_factor(ny: u32, phase_mask: usize, b: usize) -> C64 {
        let base = match ny % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        if (b & phase_mask).count_ones() % 2 == 1 {
            -base
        } else {
            base
        }
    }

    /// Applies the string to a state of dimension `2^n`. Panics on mismatch.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), 1usize << self.num_qubits(), "state dimension");
        let (flip, phase, ny) = self.masks();
        let mut out = vec![ZERO; v.len()];
        for (b, &amp) in v.iter().enumerate() {
            out[b ^ flip] = Self::phase_factor(ny, phase, b) * amp;
        }
        out
    }

    /// `<v|P|v>` for a state of dimension `2^n`.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        assert_eq!(v.len(), 1usize << self.num_qubits(), "state dimension");
        let (flip, phase, ny) = self.masks();
        v.iter()
            .enumerate()
            .map(|(b, &amp)| (v[b ^ flip].conj() * Self::phase_factor(ny, phase, b) * amp).re)
            .sum()
    }

    /// Dense `2^n x 2^n` expansion.
    pub fn dense(&self) -> Result<ComplexMatrix> {
        let n = self.num_qubits();
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits { n, max: MAX_QUBITS });
        }
        let dim = 1usize << n;
        let (flip, phase, ny) = self.masks();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for c in 0..dim {
            m[(c ^ flip, c)] = Self::phase_factor(ny, phase, c);
        }
        Ok(m)
    }

    /// `trace(P A)` for a square matrix of dimension `2^n`.
    fn trace_product(&self, a: &ComplexMatrix) -> C64 {
        let (flip, phase, ny) = self.masks();
        (0..a.rows())
            .map(|r| Self::phase_factor(ny, phase, r) * a[(r, r ^ flip)])
            .sum()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| Pauli::from_symbol(c).ok_or_else(|| Error::InvalidArgument(format!("invalid Pauli letter {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters)
    }
}

/// Draws a string with each letter independently uniform over `{I, X, Y, Z}`.
pub fn sample_random_pauli<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliString {
    assert!(n >= 1, "need at least one qubit");
    let letters = (0..n).map(|_| Pauli::ALL[rng.random_range(0..4)]).collect();
    PauliString { letters }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub string: PauliString,
}

/// `H = sum_k alpha_k P_k` with real coefficients and distinct strings.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliHamiltonian {
    n: usize,
    terms: Vec<PauliTerm>,
}

impl PauliHamiltonian {
    pub fn new(n: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("zero qubits".into()));
        }
        let mut seen = HashSet::new();
        for t in &terms {
            if !t.coeff.is_finite() {
                return Err(Error::NonFinite);
            }
            if t.string.num_qubits() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: t.string.num_qubits(),
                });
            }
            if !seen.insert(t.string.clone()) {
                return Err(Error::InvalidArgument(format!("duplicate Pauli string {}", t.string)));
            }
        }
        Ok(Self { n, terms })
    }

    /// Convenience constructor from `(coefficient, "XZ...")` pairs.
    pub fn from_pairs(n: usize, pairs: &[(f64, &str)]) -> Result<Self> {
        let terms = pairs
            .iter()
            .map(|&(coeff, s)| {
                Ok(PauliTerm {
                    coeff,
                    string: s.parse()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, terms)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.coeff).collect()
    }

    /// Coefficient of a given string, zero if absent.
    pub fn coefficient_of(&self, s: &PauliString) -> f64 {
        self.terms.iter().find(|t| &t.string == s).map_or(0.0, |t| t.coeff)
    }

    /// `H|v>` without forming the dense matrix.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; v.len()];
        for t in &self.terms {
            for (o, p) in out.iter_mut().zip(t.string.apply(v)) {
                *o += p * t.coeff;
            }
        }
        out
    }

    /// Parses the text format: one `<coefficient> <string>` pair per line,
    /// `#` starts a comment, blank lines are ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut n = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: line_no, message };
            let mut fields = line.split_whitespace();
            let (Some(c), Some(s), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(parse_err("expected `<coefficient> <string>`".into()));
            };
            let coeff: f64 = c.parse().map_err(|_| parse_err(format!("invalid coefficient {c:?}")))?;
            let string: PauliString = s.parse().map_err(|e: Error| parse_err(e.to_string()))?;
            match n {
                None => n = Some(string.num_qubits()),
                Some(m) if m != string.num_qubits() => {
                    return Err(parse_err(format!(
                        "string {s} has {} qubits, expected {m}",
                        string.num_qubits()
                    )))
                }
                _ => {}
            }
            terms.push(PauliTerm { coeff, string });
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            message: "no terms".into(),
        })?;
        Self::new(n, terms).map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })
    }

    /// Renders the text format; coefficients use the shortest round-trip
    /// representation.
    pub fn to_text(&self) -> String {
        self.terms
            .iter()
            .map(|t| format!("{:?} {}\n", t.coeff, t.string))
            .collect()
    }
}

/// Dense expansion of a single string.
pub fn dense(p: &PauliString) -> Result<ComplexMatrix> {
    p.dense()
}

/// `sum_k alpha_k dense(P_k)`; the zero matrix of dimension `2^n` when empty.
pub fn reconstruct(ph: &PauliHamiltonian) -> Result<ComplexMatrix> {
    if ph.n > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            n: ph.n,
            max: MAX_QUBITS,
        });
    }
    let dim = ph.dim();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for t in &ph.terms {
        let (flip, phase, ny) = t.string.masks();
        for c in 0..dim {
            m[(c ^ flip, c)] += PauliString::phase_factor(ny, phase, c) * t.coeff;
        }
    }
    Ok(m)
}

/// Pauli decomposition `alpha_k = trace(P_k H) / 2^n`, enumerating all `4^n`
/// strings and dropping coefficients with `|alpha_k| <= 1e-12`.
pub fn decompose(h: &ComplexMatrix) -> Result<PauliHamiltonian> {
    let dim = h.require_square()?;
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NonPowerOfTwoDim { dim });
    }
    let n = dim.trailing_zeros() as usize;
    if n == 0 {
        return Err(Error::NonPowerOfTwoDim { dim });
    }
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits { n, max: MAX_QUBITS });
    }
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    let deviation = h.hermiticity_defect();
    if deviation > crate::linalg::HERMITIAN_TOL * h.frobenius_norm().max(1.0) {
        return Err(Error::NonHermitian { deviation });
    }
    let mut terms = Vec::new();
    for idx in 0..(1usize << (2 * n)) {
        let string = PauliString::from_index(n, idx);
        let coeff = string.trace_product(h).re / dim as f64;
        if coeff.abs() > PRUNE_TOL {
            terms.push(PauliTerm { coeff, string });
        }
    }
    PauliHamiltonian::new(n, terms)
}
