use std::fmt;
use std::str::FromStr;

use super::{Group, GroupError};

/// A generator of the free group or its inverse.
///
/// The derived order `A < B < AInv < BInv` is the tie-breaking order used for
/// ball enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Letter {
    A = 0,
    B = 1,
    AInv = 2,
    BInv = 3,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::B, Letter::AInv, Letter::BInv];

    pub fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::B => Letter::BInv,
            Letter::AInv => Letter::A,
            Letter::BInv => Letter::B,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::B => 'b',
            Letter::AInv => 'A',
            Letter::BInv => 'B',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a' => Some(Letter::A),
            'b' => Some(Letter::B),
            'A' => Some(Letter::AInv),
            'B' => Some(Letter::BInv),
            _ => None,
        }
    }
}

/// A reduced word in the free group on `a, b`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeWord(Vec<Letter>);

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        FreeWord(vec![l])
    }

    /// Freely reduces an arbitrary letter sequence (stack reduction).
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        FreeWord(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Word length with respect to `{a, b, a⁻¹, b⁻¹}`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    /// `Some(k)` with `k ≥ 1` if the word is `l^k`.
    pub fn power_of(&self, l: Letter) -> Option<usize> {
        if !self.0.is_empty() && self.0.iter().all(|&x| x == l) {
            Some(self.0.len())
        } else {
            None
        }
    }

    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        let mut cancel = 0;
        let (u, v) = (&self.0, &other.0);
        while cancel < u.len() && cancel < v.len() && u[u.len() - 1 - cancel] == v[cancel].inverse() {
            cancel += 1;
        }
        let mut out = Vec::with_capacity(u.len() + v.len() - 2 * cancel);
        out.extend_from_slice(&u[..u.len() - cancel]);
        out.extend_from_slice(&v[cancel..]);
        FreeWord(out)
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Left multiplication by a single letter.
    pub fn left_mul(&self, l: Letter) -> FreeWord {
        if self.0.first() == Some(&l.inverse()) {
            FreeWord(self.0[1..].to_vec())
        } else {
            let mut out = Vec::with_capacity(self.0.len() + 1);
            out.push(l);
            out.extend_from_slice(&self.0);
            FreeWord(out)
        }
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for FreeWord {
    type Err = GroupError;

    /// Parses a string over `{a, A, b, B}`; `e` (or the empty string) is the
    /// identity. Non-reduced input is reduced.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(FreeWord::identity());
        }
        let letters = s
            .chars()
            .map(|c| Letter::from_char(c).ok_or_else(|| GroupError::NotAnElement(format!("bad letter {c:?} in {s:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FreeWord::from_letters(letters))
    }
}

/// The free group on two generators.
#[derive(Clone, Copy, Debug, Default)]
pub struct FreeGroup;

impl FreeGroup {
    /// Generators in tie-breaking order `a, b, a⁻¹, b⁻¹`.
    pub fn generators(&self) -> Vec<FreeWord> {
        Letter::ALL.iter().map(|&l| FreeWord::letter(l)).collect()
    }
}

impl Group for FreeGroup {
    type Elem = FreeWord;

    fn identity(&self) -> FreeWord {
        FreeWord::identity()
    }

    fn mul(&self, a: &FreeWord, b: &FreeWord) -> FreeWord {
        a.mul(b)
    }

    fn inv(&self, a: &FreeWord) -> FreeWord {
        a.inverse()
    }
}
