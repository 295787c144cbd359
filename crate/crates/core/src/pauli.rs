use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::CMat;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Single-qubit product `self · rhs = phase · out`.
    pub fn product(self, rhs: Pauli) -> (C64, Pauli) {
        use Pauli::*;
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match (self, rhs) {
            (I, p) | (p, I) => (one, p),
            (X, X) | (Y, Y) | (Z, Z) => (one, I),
            (X, Y) => (i, Z),
            (Y, X) => (-i, Z),
            (Y, Z) => (i, X),
            (Z, Y) => (-i, X),
            (Z, X) => (i, Y),
            (X, Z) => (-i, Y),
        }
    }

    pub fn matrix(self) -> [[C64; 2]; 2] {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of single-qubit Paulis; `word[0]` acts on qubit 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliString {
    word: Vec<Pauli>,
}

/// Bit-level action: `P|x⟩ = i^{y_count} (−1)^{|x & z_mask|} |x ⊕ x_mask⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliMasks {
    pub x_mask: usize,
    pub z_mask: usize,
    pub y_count: u32,
}

impl PauliMasks {
    /// Phase picked up by basis state `x`, as a power of `i` (mod 4).
    #[inline]
    pub fn phase_power(&self, x: usize) -> u32 {
        self.y_count + 2 * ((x & self.z_mask).count_ones() & 1)
    }
}

#[inline]
pub(crate) fn i_pow(k: u32) -> C64 {
    match k & 3 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

impl PauliString {
    pub fn new(word: Vec<Pauli>) -> Self {
        Self { word }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            word: vec![Pauli::I; n],
        }
    }

    /// `p` on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut word = vec![Pauli::I; n];
        word[qubit] = p;
        Self { word }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.word
    }

    pub fn is_identity(&self) -> bool {
        self.word.iter().all(|&p| p == Pauli::I)
    }

    pub fn weight(&self) -> usize {
        self.word.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &PauliString) -> PauliString {
        let mut word = self.word.clone();
        word.extend_from_slice(&other.word);
        PauliString { word }
    }

    pub fn masks(&self) -> PauliMasks {
        let n = self.word.len();
        let mut x_mask = 0usize;
        let mut z_mask = 0usize;
        let mut y_count = 0u32;
        for (q, &p) in self.word.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => x_mask |= bit,
                Pauli::Z => z_mask |= bit,
                Pauli::Y => {
                    x_mask |= bit;
                    z_mask |= bit;
                    y_count += 1;
                }
            }
        }
        PauliMasks {
            x_mask,
            z_mask,
            y_count,
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let a = self.masks();
        let b = other.masks();
        ((a.x_mask & b.z_mask).count_ones() + (a.z_mask & b.x_mask).count_ones()) % 2 == 0
    }

    pub fn to_dense(&self) -> CMat {
        let n = self.word.len();
        let dim = 1usize << n;
        let m = self.masks();
        let mut out = CMat::zeros(dim, dim);
        for x in 0..dim {
            out[(x ^ m.x_mask, x)] = i_pow(m.phase_power(x));
        }
        out
    }
}

/// `M = Σ_P c_P P` with `c_P = tr(P M)/2^n`; coefficients below `tol` in
/// modulus are dropped. Words are in lexicographic I < X < Y < Z order.
pub fn pauli_decompose(m: &CMat, tol: f64) -> Result<Vec<(PauliString, C64)>> {
    let dim = m.nrows();
    if m.ncols() != dim || !dim.is_power_of_two() {
        return Err(Error::Dimension {
            expected: dim.next_power_of_two(),
            got: m.ncols(),
        });
    }
    let n = dim.trailing_zeros() as usize;
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let mut out = vec![];
    for code in 0..1usize << (2 * n) {
        let word = PauliString::new((0..n).map(|q| letters[(code >> (2 * (n - 1 - q))) & 3]).collect());
        let k = word.masks();
        // tr(P M) = Σ_x ⟨x|P|x ⊕ x_mask⟩ M[x ⊕ x_mask, x] with P|y⟩ = phase(y)|y ⊕ x_mask⟩.
        let mut tr = C64::new(0.0, 0.0);
        for x in 0..dim {
            let y = x ^ k.x_mask;
            tr += i_pow(k.phase_power(y)) * m[(y, x)];
        }
        let coeff = tr / dim as f64;
        if coeff.norm() > tol {
            out.push((word, coeff));
        }
    }
    Ok(out)
}

/// Product `p · q = phase · r`.
pub fn pauli_product(p: &PauliString, q: &PauliString) -> Result<(C64, PauliString)> {
    if p.len() != q.len() {
        return Err(Error::Dimension {
            expected: p.len(),
            got: q.len(),
        });
    }
    let mut phase = C64::new(1.0, 0.0);
    let word = p
        .word
        .iter()
        .zip(&q.word)
        .map(|(&a, &b)| {
            let (ph, r) = a.product(b);
            phase *= ph;
            r
        })
        .collect();
    Ok((phase, PauliString { word }))
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let word = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(invalid("pauli", format!("letter `{other}` not in {{I,X,Y,Z}}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString { word })
    }
}

impl TryFrom<String> for PauliString {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PauliString> for String {
    fn from(p: PauliString) -> String {
        p.to_string()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.word {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}
