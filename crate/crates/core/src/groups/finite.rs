use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Group, GroupError};

/// Exhaustive associativity is checked up to this order; above it, random
/// triples are sampled.
const EXHAUSTIVE_ASSOC_MAX: usize = 256;
const RANDOM_ASSOC_TRIPLES: usize = 10_000;

/// A finite group stored as a dense multiplication table over `0..order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<u32>,
    identity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomViolation {
    /// `value` appears more than once in row `row`.
    LatinRow {
        row: usize,
        value: usize,
    },
    LatinColumn {
        col: usize,
        value: usize,
    },
    Associativity {
        a: usize,
        b: usize,
        c: usize,
    },
    Identity {
        element: usize,
    },
    Inverse {
        element: usize,
    },
}

impl FiniteGroup {
    pub fn from_table(rows: Vec<Vec<usize>>, identity: usize) -> Result<Self, GroupError> {
        let order = rows.len();
        let mut table = Vec::with_capacity(order * order);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != order {
                return Err(GroupError::DimensionMismatch { row: r, len: row.len(), expected: order });
            }
            for (c, &v) in row.iter().enumerate() {
                if v >= order {
                    return Err(GroupError::EntryOutOfRange { row: r, col: c, value: v, order });
                }
                table.push(v as u32);
            }
        }
        if identity >= order.max(1) {
            return Err(GroupError::EntryOutOfRange { row: identity, col: identity, value: identity, order });
        }
        Ok(FiniteGroup { order, table, identity })
    }

    pub fn cyclic(n: usize) -> Self {
        let rows = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        FiniteGroup::from_table(rows, 0).expect("cyclic table is well formed")
    }

    /// Builds the table of a group given by an explicit element list.
    pub fn from_elements<G: Group>(group: &G, elements: &[G::Elem]) -> Result<Self, GroupError> {
        let index: HashMap<&G::Elem, usize> = elements.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let mut rows = Vec::with_capacity(elements.len());
        for a in elements {
            let row = elements
                .iter()
                .map(|b| {
                    let p = group.mul(a, b);
                    index.get(&p).copied().ok_or_else(|| GroupError::NotAnElement(format!("{p:?} not in element list")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        let id = group.identity();
        let identity = *index.get(&id).ok_or_else(|| GroupError::NotAnElement("identity missing".into()))?;
        FiniteGroup::from_table(rows, identity)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity_index(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn product(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b] as usize
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    /// Checks the Latin-square property, identity, inverses and associativity.
    /// An empty report means the table is a group.
    pub fn verify_axioms(&self) -> Vec<AxiomViolation> {
        let n = self.order;
        let mut report = Vec::new();
        let mut seen = vec![false; n];
        for r in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            for c in 0..n {
                let v = self.product(r, c);
                if std::mem::replace(&mut seen[v], true) {
                    report.push(AxiomViolation::LatinRow { row: r, value: v });
                }
            }
        }
        for c in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            for r in 0..n {
                let v = self.product(r, c);
                if std::mem::replace(&mut seen[v], true) {
                    report.push(AxiomViolation::LatinColumn { col: c, value: v });
                }
            }
        }
        let e = self.identity;
        for g in 0..n {
            if self.product(e, g) != g || self.product(g, e) != g {
                report.push(AxiomViolation::Identity { element: g });
            }
            if !(0..n).any(|h| self.product(g, h) == e && self.product(h, g) == e) {
                report.push(AxiomViolation::Inverse { element: g });
            }
        }
        let mut check = |a: usize, b: usize, c: usize| {
            if self.product(self.product(a, b), c) != self.product(a, self.product(b, c)) {
                report.push(AxiomViolation::Associativity { a, b, c });
            }
        };
        if n <= EXHAUSTIVE_ASSOC_MAX {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        check(a, b, c);
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..RANDOM_ASSOC_TRIPLES {
                check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            }
        }
        report
    }
}

impl Group for FiniteGroup {
    type Elem = usize;

    fn identity(&self) -> usize {
        self.identity
    }

    fn mul(&self, a: &usize, b: &usize) -> usize {
        self.product(*a, *b)
    }

    fn inv(&self, a: &usize) -> usize {
        (0..self.order)
            .find(|&h| self.product(*a, h) == self.identity)
            .expect("element has no inverse; run verify_axioms first")
    }
}

/// Enumerates the subgroup generated by `gens` breadth-first, identity first.
/// Inverses are not added automatically; in a finite group positive words
/// already generate.
pub fn enumerate_closure<G: Group>(group: &G, gens: &[G::Elem], cap: usize) -> Result<Vec<G::Elem>, GroupError> {
    let id = group.identity();
    let mut seen: HashMap<G::Elem, ()> = HashMap::new();
    let mut out = vec![id.clone()];
    seen.insert(id.clone(), ());
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for s in gens {
            let y = group.mul(&x, s);
            if !seen.contains_key(&y) {
                if out.len() >= cap {
                    return Err(GroupError::ClosureCap(cap));
                }
                seen.insert(y.clone(), ());
                out.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(out)
}
