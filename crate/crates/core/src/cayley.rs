//! Spheres and balls in Cayley graphs.
//!
//! Balls are enumerated breadth-first. Sphere `n+1` is produced by walking
//! sphere `n` in order and right-multiplying by the generators in the order
//! given; the first discovery of an element fixes its position. For the free
//! group with generators `a, b, a⁻¹, b⁻¹` this is lexicographic order on
//! reduced words inside each sphere.

use std::collections::HashMap;

use thiserror::Error;

use crate::groups::{FreeWord, Group, Letter};

/// Default cap on the number of ball elements.
pub const DEFAULT_BALL_CAP: usize = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CayleyError {
    #[error("ball exceeds the cap of {cap} elements (radius {radius})")]
    CapExceeded { cap: usize, radius: usize },
    #[error("first-letter partition needs n >= 1")]
    ZeroSphere,
}

/// The ball of radius `R` with its basis ordering.
#[derive(Clone, Debug)]
pub struct BallIndex<E> {
    radius: usize,
    elements: Vec<E>,
    index: HashMap<E, usize>,
    sphere_starts: Vec<usize>,
}

impl<E: Clone + Eq + std::hash::Hash> BallIndex<E> {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[E] {
        &self.elements
    }

    pub fn position(&self, e: &E) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn contains(&self, e: &E) -> bool {
        self.index.contains_key(e)
    }

    /// Elements at distance exactly `n`.
    pub fn sphere(&self, n: usize) -> &[E] {
        assert!(n <= self.radius, "sphere {n} outside ball of radius {}", self.radius);
        &self.elements[self.sphere_starts[n]..self.sphere_starts[n + 1]]
    }

    /// Basis positions occupied by sphere `n`.
    pub fn sphere_range(&self, n: usize) -> std::ops::Range<usize> {
        self.sphere_starts[n]..self.sphere_starts[n + 1]
    }

    pub fn sphere_sizes(&self) -> Vec<usize> {
        self.sphere_starts.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Word length of the element at basis position `i`.
    pub fn distance_of(&self, i: usize) -> usize {
        self.sphere_starts.partition_point(|&s| s <= i) - 1
    }
}

/// Breadth-first ball of radius `radius` around the identity.
pub fn ball<G: Group>(
    group: &G,
    gens: &[G::Elem],
    radius: usize,
    cap: usize,
) -> Result<BallIndex<G::Elem>, CayleyError> {
    let id = group.identity();
    let mut elements = vec![id.clone()];
    let mut index = HashMap::from([(id, 0usize)]);
    let mut sphere_starts = vec![0, 1];
    for r in 1..=radius {
        let prev = sphere_starts[r - 1]..sphere_starts[r];
        for i in prev {
            for s in gens {
                let y = group.mul(&elements[i], s);
                if !index.contains_key(&y) {
                    if elements.len() >= cap {
                        return Err(CayleyError::CapExceeded { cap, radius });
                    }
                    index.insert(y.clone(), elements.len());
                    elements.push(y);
                }
            }
        }
        sphere_starts.push(elements.len());
    }
    Ok(BallIndex { radius, elements, index, sphere_starts })
}

/// Elements at word length exactly `n`.
pub fn sphere<G: Group>(group: &G, gens: &[G::Elem], n: usize, cap: usize) -> Result<Vec<G::Elem>, CayleyError> {
    Ok(ball(group, gens, n, cap)?.sphere(n).to_vec())
}

/// `S_n` split by first letter, in the order `a, b, a⁻¹, b⁻¹`.
#[derive(Clone, Debug)]
pub struct SphereSlice {
    pub n: usize,
    pub by_first_letter: [Vec<FreeWord>; 4],
}

impl SphereSlice {
    pub fn class(&self, l: Letter) -> &[FreeWord] {
        &self.by_first_letter[l as usize]
    }
}

/// Partition of the free-group sphere `S_n` (`n ≥ 1`) by first letter.
pub fn first_letter_partition(n: usize) -> Result<SphereSlice, CayleyError> {
    if n == 0 {
        return Err(CayleyError::ZeroSphere);
    }
    let group = crate::groups::FreeGroup;
    let s = sphere(&group, &group.generators(), n, DEFAULT_BALL_CAP)?;
    let mut by_first_letter: [Vec<FreeWord>; 4] = Default::default();
    for w in s {
        let l = w.first().expect("non-identity word");
        by_first_letter[l as usize].push(w);
    }
    Ok(SphereSlice { n, by_first_letter })
}

/// The standard free-group ball with generators `a, b, a⁻¹, b⁻¹`.
pub fn free_ball(radius: usize) -> Result<BallIndex<FreeWord>, CayleyError> {
    let group = crate::groups::FreeGroup;
    ball(&group, &group.generators(), radius, DEFAULT_BALL_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{FreeGroup, HeisenbergElement, HeisenbergGroup};
    use std::collections::{HashSet, VecDeque};

    #[test]
    fn free_sphere_counts() {
        let b = free_ball(9).unwrap();
        assert_eq!(b.sphere(0), &[FreeWord::identity()]);
        for n in 1..=9 {
            assert_eq!(b.sphere(n).len(), 4 * 3usize.pow(n as u32 - 1));
        }
        assert_eq!(free_ball(2).unwrap().len(), 17);
        assert_eq!(free_ball(0).unwrap().len(), 1);
        assert_eq!(sphere(&FreeGroup, &FreeGroup.generators(), 3, 100).unwrap().len(), 36);
    }

    #[test]
    fn spheres_are_lexicographic() {
        let b = free_ball(4).unwrap();
        for n in 0..=4 {
            let s = b.sphere(n);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|w| w.len() == n));
        }
        assert_eq!(b.distance_of(0), 0);
        assert_eq!(b.distance_of(5), 2);
        assert_eq!(b.distance_of(16), 2);
    }

    #[test]
    fn cap_is_enforced() {
        let err = ball(&FreeGroup, &FreeGroup.generators(), 5, 100).unwrap_err();
        assert_eq!(err, CayleyError::CapExceeded { cap: 100, radius: 5 });
    }

    #[test]
    fn first_letter_classes() {
        assert!(first_letter_partition(0).is_err());
        let one = first_letter_partition(1).unwrap();
        assert!(one.by_first_letter.iter().all(|c| c.len() == 1));
        assert_eq!(first_letter_partition(2).unwrap().class(Letter::B).len(), 3);
        let four = first_letter_partition(4).unwrap();
        let a = four.class(Letter::A);
        assert_eq!(a.len(), 27);
        assert!(a.iter().all(|w| w.first() == Some(Letter::A)));
        for n in 2..=6 {
            let prev = first_letter_partition(n - 1).unwrap();
            let not_a: usize = Letter::ALL.iter().filter(|&&l| l != Letter::A).map(|&l| prev.class(l).len()).sum();
            assert_eq!(not_a, 3 * 3usize.pow(n as u32 - 2));
        }
    }

    #[test]
    fn left_multiplication_moves_one_sphere() {
        let b = free_ball(6).unwrap();
        for n in 1..=5 {
            for w in b.sphere(n) {
                for &l in &Letter::ALL {
                    let d = w.left_mul(l).len();
                    assert!(d == n - 1 || d == n + 1);
                }
            }
        }
    }

    /// Independent BFS on the Heisenberg Cayley graph using left multiplication
    /// and a hash set of visited triples.
    fn heisenberg_sphere_oracle(n: usize) -> HashSet<(i64, i64, i64)> {
        let gens = [(1i64, 0i64), (0, 1), (-1, 0), (0, -1)];
        let mut dist = std::collections::HashMap::from([((0i64, 0i64, 0i64), 0usize)]);
        let mut q = VecDeque::from([(0i64, 0i64, 0i64)]);
        while let Some((a, b, c)) = q.pop_front() {
            let d = dist[&(a, b, c)];
            if d == n {
                continue;
            }
            for &(x, y) in &gens {
                let next = (a + x, b + y, c + x * b);
                dist.entry(next).or_insert_with(|| {
                    q.push_back(next);
                    d + 1
                });
            }
        }
        dist.into_iter().filter(|&(_, d)| d == n).map(|(k, _)| k).collect()
    }

    #[test]
    fn heisenberg_sphere_matches_oracle() {
        let gens = HeisenbergGroup::generators();
        let b = ball(&HeisenbergGroup, &gens, 4, 10_000).unwrap();
        for n in 0..=4 {
            let ours: HashSet<(i64, i64, i64)> =
                b.sphere(n).iter().map(|h: &HeisenbergElement| (h.a, h.b, h.c)).collect();
            assert_eq!(ours.len(), b.sphere(n).len());
            assert_eq!(ours, heisenberg_sphere_oracle(n), "sphere {n}");
        }
        assert_eq!(b.sphere(2).len(), heisenberg_sphere_oracle(2).len());
    }

    #[test]
    fn ball_restricted_to_length_is_sphere() {
        let b = free_ball(5).unwrap();
        for n in 0..=5 {
            let from_ball: HashSet<&FreeWord> = b.elements().iter().filter(|w| w.len() == n).collect();
            let s: HashSet<&FreeWord> = b.sphere(n).iter().collect();
            assert_eq!(from_ball, s);
        }
    }
}
