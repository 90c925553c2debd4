use super::{Group, Membership, PAdicLaurent};

/// An element of Abels' group: the upper-triangular matrix
///
/// ```text
/// | 1  x12  x13  x14 |
/// | 0  p^k  x23  x24 |
/// | 0  0    p^n  x34 |
/// | 0  0    0    1   |
/// ```
///
/// with entries in ℤ[1/p] and `k, n ∈ ℤ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbelsElement {
    pub k_exp: i64,
    pub n_exp: i64,
    pub x12: PAdicLaurent,
    pub x13: PAdicLaurent,
    pub x14: PAdicLaurent,
    pub x23: PAdicLaurent,
    pub x24: PAdicLaurent,
    pub x34: PAdicLaurent,
}

impl AbelsElement {
    pub fn identity(p: u64) -> Self {
        let z = PAdicLaurent::zero(p);
        AbelsElement {
            k_exp: 0,
            n_exp: 0,
            x12: z.clone(),
            x13: z.clone(),
            x14: z.clone(),
            x23: z.clone(),
            x24: z.clone(),
            x34: z,
        }
    }

    pub fn prime(&self) -> u64 {
        self.x12.prime()
    }

    pub fn diagonal(p: u64, k: i64, n: i64) -> Self {
        AbelsElement { k_exp: k, n_exp: n, ..AbelsElement::identity(p) }
    }

    /// The central element with `x14 = x` and all other off-diagonal entries 0.
    pub fn corner(x: PAdicLaurent) -> Self {
        AbelsElement { x14: x.clone(), ..AbelsElement::identity(x.prime()) }
    }

    /// Elementary unipotent with entry `x` at `(i, j)`, 1-based, `i < j`.
    pub fn elementary(i: usize, j: usize, x: PAdicLaurent) -> Self {
        let mut g = AbelsElement::identity(x.prime());
        *g.entry_mut(i, j).expect("position above the diagonal") = x;
        g
    }

    fn entry_mut(&mut self, i: usize, j: usize) -> Option<&mut PAdicLaurent> {
        Some(match (i, j) {
            (1, 2) => &mut self.x12,
            (1, 3) => &mut self.x13,
            (1, 4) => &mut self.x14,
            (2, 3) => &mut self.x23,
            (2, 4) => &mut self.x24,
            (3, 4) => &mut self.x34,
            _ => return None,
        })
    }

    /// Full 4×4 matrix over ℤ[1/p], zero-indexed rows.
    pub fn to_matrix(&self) -> [[PAdicLaurent; 4]; 4] {
        let p = self.prime();
        let z = || PAdicLaurent::zero(p);
        let one = PAdicLaurent::one(p);
        [
            [one.clone(), self.x12.clone(), self.x13.clone(), self.x14.clone()],
            [z(), PAdicLaurent::prime_power(p, self.k_exp), self.x23.clone(), self.x24.clone()],
            [z(), z(), PAdicLaurent::prime_power(p, self.n_exp), self.x34.clone()],
            [z(), z(), z(), one],
        ]
    }

    /// Inverse of [`to_matrix`](Self::to_matrix); `None` if the matrix does not
    /// have the required shape.
    pub fn from_matrix(m: &[[PAdicLaurent; 4]; 4]) -> Option<Self> {
        let p = m[0][0].prime();
        let one = PAdicLaurent::one(p);
        let below_zero = (0..4).all(|i| (0..i).all(|j| m[i][j].is_zero()));
        if !below_zero || m[0][0] != one || m[3][3] != one {
            return None;
        }
        let k = diag_exponent(&m[1][1])?;
        let n = diag_exponent(&m[2][2])?;
        Some(AbelsElement {
            k_exp: k,
            n_exp: n,
            x12: m[0][1].clone(),
            x13: m[0][2].clone(),
            x14: m[0][3].clone(),
            x23: m[1][2].clone(),
            x24: m[1][3].clone(),
            x34: m[2][3].clone(),
        })
    }

    /// Whether the element has the shape of the center: only `x14` may be
    /// non-zero and the diagonal is trivial.
    pub fn in_center(&self) -> bool {
        self.k_exp == 0
            && self.n_exp == 0
            && [&self.x12, &self.x13, &self.x23, &self.x24, &self.x34].iter().all(|x| x.is_zero())
    }

    pub fn center_membership(&self) -> Membership {
        let in_center = self.in_center();
        Membership { in_center, in_n: in_center && self.x14.is_integer() }
    }
}

/// `Some(e)` when `x = p^e`.
fn diag_exponent(x: &PAdicLaurent) -> Option<i64> {
    use num_traits::One;
    let p = num_bigint::BigInt::from(x.prime());
    let mut u = x.mantissa().clone();
    let mut up = 0i64;
    if u <= num_bigint::BigInt::from(0) {
        return None;
    }
    while !u.is_one() {
        if &u % &p != num_bigint::BigInt::from(0) {
            return None;
        }
        u /= &p;
        up += 1;
    }
    Some(up - x.expo() as i64)
}

/// Abels' group over ℤ[1/p].
#[derive(Clone, Copy, Debug)]
pub struct AbelsGroup {
    pub p: u64,
}

impl AbelsGroup {
    pub fn new(p: u64) -> Self {
        AbelsGroup { p }
    }

    /// `diag(1,p,1,1)`, `diag(1,1,p,1)`, `E12(1)`, `E23(1)`, `E34(1)`; the
    /// remaining elementary matrices arise as commutators and conjugates.
    pub fn generators(&self) -> Vec<AbelsElement> {
        let one = PAdicLaurent::one(self.p);
        vec![
            AbelsElement::diagonal(self.p, 1, 0),
            AbelsElement::diagonal(self.p, 0, 1),
            AbelsElement::elementary(1, 2, one.clone()),
            AbelsElement::elementary(2, 3, one.clone()),
            AbelsElement::elementary(3, 4, one),
        ]
    }
}

impl Group for AbelsGroup {
    type Elem = AbelsElement;

    fn identity(&self) -> AbelsElement {
        AbelsElement::identity(self.p)
    }

    fn mul(&self, g: &AbelsElement, h: &AbelsElement) -> AbelsElement {
        let p = self.p;
        let pk = PAdicLaurent::prime_power(p, g.k_exp);
        let pn = PAdicLaurent::prime_power(p, g.n_exp);
        AbelsElement {
            k_exp: g.k_exp + h.k_exp,
            n_exp: g.n_exp + h.n_exp,
            x12: &h.x12 + &g.x12.scale_by_prime_power(h.k_exp),
            x13: &(&h.x13 + &(&g.x12 * &h.x23)) + &g.x13.scale_by_prime_power(h.n_exp),
            x14: &(&(&h.x14 + &(&g.x12 * &h.x24)) + &(&g.x13 * &h.x34)) + &g.x14,
            x23: &(&pk * &h.x23) + &g.x23.scale_by_prime_power(h.n_exp),
            x24: &(&(&pk * &h.x24) + &(&g.x23 * &h.x34)) + &g.x24,
            x34: &(&pn * &h.x34) + &g.x34,
        }
    }

    fn inv(&self, g: &AbelsElement) -> AbelsElement {
        // back substitution for the upper-triangular inverse
        let m = g.to_matrix();
        let p = self.p;
        let mut inv: [[PAdicLaurent; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| PAdicLaurent::zero(p)));
        let diag_inv = [0i64, -g.k_exp, -g.n_exp, 0];
        for i in 0..4 {
            inv[i][i] = PAdicLaurent::prime_power(p, diag_inv[i]);
        }
        for d in 1..4 {
            for i in 0..4 - d {
                let j = i + d;
                let mut acc = PAdicLaurent::zero(p);
                for l in i..j {
                    acc = &acc + &(&inv[i][l] * &m[l][j]);
                }
                inv[i][j] = -&(&acc * &inv[j][j]);
            }
        }
        AbelsElement::from_matrix(&inv).expect("inverse keeps the Abels shape")
    }
}
