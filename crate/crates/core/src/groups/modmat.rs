use num_integer::Integer;

use super::padic::mod_inverse;
use super::{AbelsElement, Group, GroupError, HeisenbergElement};

/// An `N×N` matrix with entries in ℤ/m. The modulus lives in the owning
/// [`ModMatGroup`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModMat<const N: usize>(pub [[u32; N]; N]);

impl<const N: usize> ModMat<N> {
    pub fn entry(&self, i: usize, j: usize) -> u32 {
        self.0[i][j]
    }

    /// Row-major entries.
    pub fn to_vec(&self) -> Vec<u32> {
        self.0.iter().flatten().copied().collect()
    }
}

/// The invertible `N×N` matrices over ℤ/m, with multiplication computed on the
/// fly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModMatGroup<const N: usize> {
    modulus: u32,
}

impl<const N: usize> ModMatGroup<N> {
    pub fn new(modulus: u64) -> Result<Self, GroupError> {
        if !(2..=u32::MAX as u64 / 2).contains(&modulus) {
            return Err(GroupError::BadModulus(modulus));
        }
        Ok(ModMatGroup { modulus: modulus as u32 })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus as u64
    }

    pub fn from_ints(&self, rows: [[i64; N]; N]) -> ModMat<N> {
        let m = self.modulus as i64;
        ModMat(rows.map(|r| r.map(|x| x.mod_floor(&m) as u32)))
    }

    pub fn determinant(&self, a: &ModMat<N>) -> u64 {
        let rows: Vec<Vec<i64>> = a.0.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
        det_mod(&rows, self.modulus as i64) as u64
    }

    pub fn is_invertible(&self, a: &ModMat<N>) -> bool {
        mod_inverse(self.determinant(a), self.modulus()).is_some()
    }

    pub fn reduce_heisenberg(&self, h: &HeisenbergElement) -> ModMat<N> {
        assert_eq!(N, 3, "Heisenberg reduction needs 3×3 matrices");
        let mut rows = [[0i64; N]; N];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1;
        }
        rows[0][1] = h.a;
        rows[1][2] = h.b;
        rows[0][2] = h.c;
        self.from_ints(rows)
    }
}

fn det_mod(rows: &[Vec<i64>], m: i64) -> i64 {
    let n = rows.len();
    if n == 1 {
        return rows[0][0].mod_floor(&m);
    }
    let mut acc = 0i64;
    for (j, &x) in rows[0].iter().enumerate() {
        if x == 0 {
            continue;
        }
        let minor: Vec<Vec<i64>> = rows[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
            .collect();
        let term = x * det_mod(&minor, m) % m;
        acc = if j % 2 == 0 { acc + term } else { acc - term }.mod_floor(&m);
    }
    acc
}

impl<const N: usize> Group for ModMatGroup<N> {
    type Elem = ModMat<N>;

    fn identity(&self) -> ModMat<N> {
        let mut out = [[0u32; N]; N];
        for (i, row) in out.iter_mut().enumerate() {
            row[i] = 1 % self.modulus;
        }
        ModMat(out)
    }

    fn mul(&self, a: &ModMat<N>, b: &ModMat<N>) -> ModMat<N> {
        let m = self.modulus as u64;
        let mut out = [[0u32; N]; N];
        for i in 0..N {
            for j in 0..N {
                let mut s = 0u64;
                for l in 0..N {
                    s += a.0[i][l] as u64 * b.0[l][j] as u64;
                }
                out[i][j] = (s % m) as u32;
            }
        }
        ModMat(out)
    }

    /// Adjugate times the inverse determinant.
    fn inv(&self, a: &ModMat<N>) -> ModMat<N> {
        let m = self.modulus as i64;
        let det_inv = mod_inverse(self.determinant(a), self.modulus()).expect("matrix is not invertible mod m") as i64;
        let rows: Vec<Vec<i64>> = a.0.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
        let mut out = [[0u32; N]; N];
        for i in 0..N {
            for j in 0..N {
                let cof = if N == 1 {
                    1
                } else {
                    let minor: Vec<Vec<i64>> = rows
                        .iter()
                        .enumerate()
                        .filter(|&(r, _)| r != j)
                        .map(|(_, row)| row.iter().enumerate().filter(|&(c, _)| c != i).map(|(_, &v)| v).collect())
                        .collect();
                    let d = det_mod(&minor, m);
                    if (i + j) % 2 == 0 {
                        d
                    } else {
                        (-d).mod_floor(&m)
                    }
                };
                out[i][j] = (cof * det_inv).mod_floor(&m) as u32;
            }
        }
        ModMat(out)
    }
}

/// Congruence reduction of Abels' group modulo `m`, with `gcd(m, p) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CongruenceQuotient {
    modulus: u64,
    prime: u64,
    group: ModMatGroup<4>,
}

impl CongruenceQuotient {
    pub fn new(modulus: u64, prime: u64) -> Result<Self, GroupError> {
        let group = ModMatGroup::new(modulus)?;
        if modulus.gcd(&prime) != 1 {
            return Err(GroupError::ModulusNotCoprime { modulus, prime });
        }
        Ok(CongruenceQuotient { modulus, prime, group })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn group(&self) -> &ModMatGroup<4> {
        &self.group
    }

    /// Image of `g` in `GL₄(ℤ/m)`; `p^(−k)` reduces via the modular inverse.
    pub fn reduce(&self, g: &AbelsElement) -> Result<ModMat<4>, GroupError> {
        if g.prime() != self.prime {
            return Err(GroupError::PrimeMismatch(g.prime(), self.prime));
        }
        let mat = g.to_matrix();
        let mut out = [[0u32; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = mat[i][j].reduce_mod(self.modulus)? as u32;
            }
        }
        Ok(ModMat(out))
    }
}
