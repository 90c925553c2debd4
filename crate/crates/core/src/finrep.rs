//! Monomial unitary representations of finite groups.
//!
//! Every representation here (regular, induced from a character of a central
//! subgroup, and direct sums of those) sends a group element to a
//! [`MonomialMatrix`]: a permutation matrix whose non-zero entries are roots
//! of unity stored as exact rotation numbers. Norms of `M − 1` and of
//! differences are computed from the cycle structure, so separation results
//! such as `‖Ind γ(g) − 1‖ ≥ √2` are checked without floating-point spectra.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::groups::{FiniteGroup, Group};

/// Homomorphism checks are exhaustive up to this group order.
pub const EXHAUSTIVE_HOM_MAX: usize = 512;
const RANDOM_HOM_PAIRS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FinRepError {
    #[error("subgroup element {0} is not central")]
    NotCentral(String),
    #[error("not a transversal: {0}")]
    NonTransversal(String),
    #[error("character is not multiplicative at ({0}, {1})")]
    NotMultiplicative(String, String),
    #[error("subgroup is not closed under multiplication at ({0}, {1})")]
    NotClosed(String, String),
    #[error("element {0} is outside the represented group")]
    UnknownElement(String),
    #[error("dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("direct sum needs at least one block")]
    EmptySum,
}

/// A root of unity `e^{2πi q}` stored as `q ∈ ℚ/ℤ`, normalized to `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phase(Ratio<i64>);

impl Phase {
    pub fn one() -> Self {
        Phase(Ratio::zero())
    }

    pub fn from_turns(num: i64, den: i64) -> Self {
        Phase(Self::normalize(Ratio::new(num, den)))
    }

    fn normalize(q: Ratio<i64>) -> Ratio<i64> {
        let fl = q.floor();
        q - fl
    }

    pub fn turns(&self) -> Ratio<i64> {
        self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_zero()
    }

    /// Product of roots of unity.
    pub fn mul(&self, other: &Phase) -> Phase {
        Phase(Self::normalize(self.0 + other.0))
    }

    pub fn conj(&self) -> Phase {
        Phase(Self::normalize(-self.0))
    }

    pub fn to_complex(&self) -> Complex64 {
        let t = 2.0 * std::f64::consts::PI * (*self.0.numer() as f64 / *self.0.denom() as f64);
        Complex64::new(t.cos(), t.sin())
    }

    /// Distance from `q` to the nearest integer, in `[0, 1/2]`.
    fn distance_to_integer(q: Ratio<i64>) -> Ratio<i64> {
        let f = Self::normalize(q);
        let g = Ratio::one() - f;
        if f < g {
            f
        } else {
            g
        }
    }

    /// `|e^{2πi q} − 1| = 2 sin(π d)` with `d` the distance to the integers.
    pub fn chord_to_one(&self) -> f64 {
        chord(Self::distance_to_integer(self.0))
    }
}

fn chord(d: Ratio<i64>) -> f64 {
    2.0 * (std::f64::consts::PI * (*d.numer() as f64 / *d.denom() as f64)).sin()
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A monomial unitary: column `j` has the single entry `phases[j]` in row
/// `perm[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonomialMatrix {
    perm: Vec<u32>,
    phases: Vec<Phase>,
}

impl MonomialMatrix {
    pub fn identity(dim: usize) -> Self {
        MonomialMatrix { perm: (0..dim as u32).collect(), phases: vec![Phase::one(); dim] }
    }

    pub fn scalar(dim: usize, phase: Phase) -> Self {
        MonomialMatrix { perm: (0..dim as u32).collect(), phases: vec![phase; dim] }
    }

    /// `perm` must be a permutation of `0..perm.len()`.
    pub fn new(perm: Vec<usize>, phases: Vec<Phase>) -> Option<Self> {
        let d = perm.len();
        if phases.len() != d {
            return None;
        }
        let mut seen = vec![false; d];
        for &p in &perm {
            if p >= d || std::mem::replace(&mut seen[p], true) {
                return None;
            }
        }
        Some(MonomialMatrix { perm: perm.into_iter().map(|p| p as u32).collect(), phases })
    }

    pub fn permutation(perm: Vec<usize>) -> Option<Self> {
        let d = perm.len();
        Self::new(perm, vec![Phase::one(); d])
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn target(&self, j: usize) -> usize {
        self.perm[j] as usize
    }

    pub fn phase(&self, j: usize) -> Phase {
        self.phases[j]
    }

    pub fn mul(&self, other: &MonomialMatrix) -> MonomialMatrix {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in monomial product");
        let (perm, phases) = (0..other.dim())
            .map(|j| {
                let k = other.perm[j] as usize;
                (self.perm[k], other.phases[j].mul(&self.phases[k]))
            })
            .unzip();
        MonomialMatrix { perm, phases }
    }

    pub fn adjoint(&self) -> MonomialMatrix {
        let d = self.dim();
        let mut perm = vec![0u32; d];
        let mut phases = vec![Phase::one(); d];
        for j in 0..d {
            let i = self.perm[j] as usize;
            perm[i] = j as u32;
            phases[i] = self.phases[j].conj();
        }
        MonomialMatrix { perm, phases }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(j, &p)| p as usize == j) && self.phases.iter().all(Phase::is_one)
    }

    /// `Some(φ)` if the matrix is `φ · 1`.
    pub fn as_scalar(&self) -> Option<Phase> {
        let first = *self.phases.first()?;
        let diag = self.perm.iter().enumerate().all(|(j, &p)| p as usize == j);
        (diag && self.phases.iter().all(|p| *p == first)).then_some(first)
    }

    /// Cycles of the permutation with their phase products.
    pub fn cycles(&self) -> Vec<(usize, Phase)> {
        let d = self.dim();
        let mut seen = vec![false; d];
        let mut out = Vec::new();
        for start in 0..d {
            if seen[start] {
                continue;
            }
            let (mut j, mut len, mut total) = (start, 0usize, Phase::one());
            while !seen[j] {
                seen[j] = true;
                total = total.mul(&self.phases[j]);
                j = self.perm[j] as usize;
                len += 1;
            }
            out.push((len, total));
        }
        out
    }

    /// Eigen-angle (in turns) of largest distance from 0 together with that
    /// distance. On a cycle of length `L` and phase product `e^{2πit}` the
    /// eigenvalues are `e^{2πi(t+k)/L}`, `k = 0..L`.
    fn extreme_eigen_distance(&self) -> Ratio<i64> {
        let mut best = Ratio::zero();
        for (len, total) in self.cycles() {
            let l = len as i64;
            let t = total.turns();
            for k in 0..l {
                let d = Phase::distance_to_integer((t + Ratio::from_integer(k)) / Ratio::from_integer(l));
                if d > best {
                    best = d;
                }
            }
        }
        best
    }

    /// `‖M − 1‖ = max |μ − 1|` over eigenvalues `μ`, from the cycle
    /// decomposition. Zero for the empty matrix.
    pub fn norm_minus_identity(&self) -> f64 {
        chord(self.extreme_eigen_distance())
    }

    /// `‖A − B‖ = ‖B* A − 1‖`.
    pub fn distance(&self, other: &MonomialMatrix) -> f64 {
        other.adjoint().mul(self).norm_minus_identity()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            m[(self.perm[j] as usize, j)] = self.phases[j].to_complex();
        }
        m
    }

    /// Block-diagonal sum.
    pub fn direct_sum(blocks: &[MonomialMatrix]) -> MonomialMatrix {
        let mut perm = Vec::new();
        let mut phases = Vec::new();
        let mut offset = 0u32;
        for b in blocks {
            perm.extend(b.perm.iter().map(|p| p + offset));
            phases.extend_from_slice(&b.phases);
            offset += b.dim() as u32;
        }
        MonomialMatrix { perm, phases }
    }
}

/// A finite-dimensional unitary representation with monomial images.
pub trait UnitaryRep {
    type Elem;
    fn dim(&self) -> usize;
    fn eval(&self, g: &Self::Elem) -> Result<MonomialMatrix, FinRepError>;
}

/// Left regular representation `λ(g) δ_t = δ_{gt}` of a group given by an
/// explicit element list.
#[derive(Clone, Debug)]
pub struct RegularRep<G: Group> {
    group: G,
    elements: Vec<G::Elem>,
    index: HashMap<G::Elem, usize>,
}

impl<G: Group> RegularRep<G> {
    pub fn new(group: G, elements: Vec<G::Elem>) -> Self {
        let index = elements.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        RegularRep { group, elements, index }
    }

    pub fn elements(&self) -> &[G::Elem] {
        &self.elements
    }
}

impl<G: Group> UnitaryRep for RegularRep<G> {
    type Elem = G::Elem;

    fn dim(&self) -> usize {
        self.elements.len()
    }

    fn eval(&self, g: &G::Elem) -> Result<MonomialMatrix, FinRepError> {
        if !self.index.contains_key(g) {
            return Err(FinRepError::UnknownElement(format!("{g:?}")));
        }
        let perm = self
            .elements
            .iter()
            .map(|t| {
                let gt = self.group.mul(g, t);
                self.index.get(&gt).map(|&i| i as u32).ok_or_else(|| FinRepError::UnknownElement(format!("{gt:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MonomialMatrix { phases: vec![Phase::one(); perm.len()], perm })
    }
}

pub fn regular_rep(group: &FiniteGroup) -> RegularRep<FiniteGroup> {
    RegularRep::new(group.clone(), group.elements().collect())
}

/// A character `γ: H → U(1)` of a finite subgroup, stored as exact phases.
#[derive(Clone, Debug)]
pub struct CentralCharacter<E> {
    elements: Vec<E>,
    values: HashMap<E, Phase>,
}

impl<E: Clone + Eq + Hash + fmt::Debug> CentralCharacter<E> {
    /// Validates closure and multiplicativity on `H × H`. Centrality is
    /// checked when inducing, against the ambient element list.
    pub fn new<G: Group<Elem = E>>(group: &G, values: Vec<(E, Phase)>) -> Result<Self, FinRepError> {
        let elements: Vec<E> = values.iter().map(|(e, _)| e.clone()).collect();
        let values: HashMap<E, Phase> = values.into_iter().collect();
        for a in &elements {
            for b in &elements {
                let ab = group.mul(a, b);
                let v = values.get(&ab).ok_or_else(|| FinRepError::NotClosed(format!("{a:?}"), format!("{b:?}")))?;
                if *v != values[a].mul(&values[b]) {
                    return Err(FinRepError::NotMultiplicative(format!("{a:?}"), format!("{b:?}")));
                }
            }
        }
        Ok(CentralCharacter { elements, values })
    }

    /// `H = ⟨h⟩` of order `n` with `γ(h^i) = e^{2πi k i / n}`.
    pub fn cyclic<G: Group<Elem = E>>(group: &G, h: &E, k: i64) -> Result<Self, FinRepError> {
        let mut powers = vec![group.identity()];
        let mut x = h.clone();
        while x != powers[0] {
            powers.push(x.clone());
            x = group.mul(&x, h);
        }
        let n = powers.len() as i64;
        let values = powers.into_iter().enumerate().map(|(i, e)| (e, Phase::from_turns(k * i as i64, n))).collect();
        Self::new(group, values)
    }

    pub fn trivial<G: Group<Elem = E>>(group: &G, subgroup: &[E]) -> Result<Self, FinRepError> {
        Self::new(group, subgroup.iter().map(|e| (e.clone(), Phase::one())).collect())
    }

    pub fn elements(&self) -> &[E] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn value(&self, h: &E) -> Option<Phase> {
        self.values.get(h).copied()
    }

    pub fn is_trivial(&self) -> bool {
        self.values.values().all(Phase::is_one)
    }
}

/// `Ind_H^F γ` for a central `H`, on the basis of cosets `x_i H`:
/// `g` sends the basis vector at `x_i H` to the one at `x_j H` with phase
/// `γ(h)` where `g x_i = x_j h`.
#[derive(Clone, Debug)]
pub struct InducedRep<G: Group> {
    group: G,
    transversal: Vec<G::Elem>,
    coset_of: HashMap<G::Elem, (u32, G::Elem)>,
    character: CentralCharacter<G::Elem>,
}

/// Builds the induced representation. `elements` must list the whole group;
/// the transversal is chosen greedily in list order unless one is supplied.
pub fn induce_central<G: Group>(
    group: G,
    elements: &[G::Elem],
    character: CentralCharacter<G::Elem>,
    transversal: Option<Vec<G::Elem>>,
) -> Result<InducedRep<G>, FinRepError> {
    for h in character.elements() {
        if let Some(g) = elements.iter().find(|g| group.mul(g, h) != group.mul(h, g)) {
            return Err(FinRepError::NotCentral(format!("{h:?} (fails against {g:?})")));
        }
    }
    let mut coset_of: HashMap<G::Elem, (u32, G::Elem)> = HashMap::with_capacity(elements.len());
    let add_coset = |x: &G::Elem, i: u32, map: &mut HashMap<G::Elem, (u32, G::Elem)>| -> Result<(), FinRepError> {
        for h in character.elements() {
            if map.insert(group.mul(x, h), (i, h.clone())).is_some() {
                return Err(FinRepError::NonTransversal(format!("{x:?} repeats a coset")));
            }
        }
        Ok(())
    };
    let transversal = match transversal {
        Some(reps) => {
            for (i, x) in reps.iter().enumerate() {
                add_coset(x, i as u32, &mut coset_of)?;
            }
            if coset_of.len() != elements.len() || elements.iter().any(|g| !coset_of.contains_key(g)) {
                return Err(FinRepError::NonTransversal(format!(
                    "{} representatives cover {} of {} elements",
                    reps.len(),
                    coset_of.len(),
                    elements.len()
                )));
            }
            reps
        }
        None => {
            let mut reps = Vec::new();
            for g in elements {
                if !coset_of.contains_key(g) {
                    add_coset(g, reps.len() as u32, &mut coset_of)?;
                    reps.push(g.clone());
                }
            }
            reps
        }
    };
    Ok(InducedRep { group, transversal, coset_of, character })
}

impl<G: Group> InducedRep<G> {
    pub fn transversal(&self) -> &[G::Elem] {
        &self.transversal
    }

    pub fn character(&self) -> &CentralCharacter<G::Elem> {
        &self.character
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    /// Whether `g` lies in the inducing subgroup.
    pub fn in_subgroup(&self, g: &G::Elem) -> bool {
        self.character.value(g).is_some()
    }
}

impl<G: Group> UnitaryRep for InducedRep<G> {
    type Elem = G::Elem;

    fn dim(&self) -> usize {
        self.transversal.len()
    }

    fn eval(&self, g: &G::Elem) -> Result<MonomialMatrix, FinRepError> {
        let mut perm = Vec::with_capacity(self.dim());
        let mut phases = Vec::with_capacity(self.dim());
        for x in &self.transversal {
            let gx = self.group.mul(g, x);
            let (j, h) = self.coset_of.get(&gx).ok_or_else(|| FinRepError::UnknownElement(format!("{g:?}")))?;
            perm.push(*j);
            phases.push(self.character.value(h).expect("coset labels lie in the subgroup"));
        }
        Ok(MonomialMatrix { perm, phases })
    }
}

/// `⊕ ρ_i`; all blocks share the element type by construction.
pub struct DirectSum<R> {
    blocks: Vec<R>,
}

pub fn direct_sum<R: UnitaryRep>(blocks: Vec<R>) -> Result<DirectSum<R>, FinRepError> {
    if blocks.is_empty() {
        return Err(FinRepError::EmptySum);
    }
    Ok(DirectSum { blocks })
}

impl<R: UnitaryRep> DirectSum<R> {
    pub fn blocks(&self) -> &[R] {
        &self.blocks
    }
}

impl<R: UnitaryRep> UnitaryRep for DirectSum<R> {
    type Elem = R::Elem;

    fn dim(&self) -> usize {
        self.blocks.iter().map(UnitaryRep::dim).sum()
    }

    fn eval(&self, g: &R::Elem) -> Result<MonomialMatrix, FinRepError> {
        let parts = self.blocks.iter().map(|b| b.eval(g)).collect::<Result<Vec<_>, _>>()?;
        Ok(MonomialMatrix::direct_sum(&parts))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomomorphismReport {
    pub pairs_checked: usize,
    pub exhaustive: bool,
    /// Index pairs `(g, h)` into the element list with `ρ(gh) ≠ ρ(g)ρ(h)`.
    pub failures: Vec<(usize, usize)>,
    pub identity_ok: bool,
}

impl HomomorphismReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.identity_ok
    }
}

/// Exact check of `ρ(gh) = ρ(g)ρ(h)`: all pairs up to order
/// [`EXHAUSTIVE_HOM_MAX`], otherwise 10⁴ pairs drawn from a seeded generator.
pub fn check_homomorphism<G, R>(group: &G, rep: &R, elements: &[G::Elem]) -> Result<HomomorphismReport, FinRepError>
where
    G: Group,
    R: UnitaryRep<Elem = G::Elem>,
{
    use rand::{Rng, SeedableRng};
    let identity_ok = rep.eval(&group.identity())?.is_identity();
    let n = elements.len();
    let exhaustive = n <= EXHAUSTIVE_HOM_MAX;
    let pairs: Vec<(usize, usize)> = if exhaustive {
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x1bd);
        (0..RANDOM_HOM_PAIRS).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect()
    };
    let mut cache: HashMap<usize, MonomialMatrix> = HashMap::new();
    let mut failures = Vec::new();
    for &(i, j) in &pairs {
        for k in [i, j] {
            if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(k) {
                e.insert(rep.eval(&elements[k])?);
            }
        }
        let lhs = rep.eval(&group.mul(&elements[i], &elements[j]))?;
        if lhs != cache[&i].mul(&cache[&j]) {
            failures.push((i, j));
        }
    }
    Ok(HomomorphismReport { pairs_checked: pairs.len(), exhaustive, failures, identity_ok })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationReport<E> {
    /// `min_{g ∉ H} ‖Ind(g) − 1‖`, or `+∞` when every element lies in `H`.
    pub min_norm: f64,
    pub argmin: Option<E>,
    pub ok: bool,
}

/// Minimum of `‖Ind(g) − 1‖` over the listed elements outside `H`.
pub fn check_induced_separation<G: Group>(
    rep: &InducedRep<G>,
    elements: &[G::Elem],
) -> Result<SeparationReport<G::Elem>, FinRepError> {
    let mut best: Option<(Ratio<i64>, G::Elem)> = None;
    for g in elements.iter().filter(|g| !rep.in_subgroup(g)) {
        let d = rep.eval(g)?.extreme_eigen_distance();
        if best.as_ref().is_none_or(|(b, _)| d < *b) {
            best = Some((d, g.clone()));
        }
    }
    Ok(match best {
        None => SeparationReport { min_norm: f64::INFINITY, argmin: None, ok: true },
        Some((d, g)) => {
            let min_norm = chord(d);
            SeparationReport { min_norm, argmin: Some(g), ok: min_norm >= 2f64.sqrt() - 1e-12 }
        }
    })
}

/// `Ind(h) = γ(h) · 1` for every `h ∈ H`, compared exactly.
pub fn check_induced_restriction<G: Group>(rep: &InducedRep<G>) -> Result<bool, FinRepError> {
    for h in rep.character().elements() {
        let m = rep.eval(h)?;
        if m.as_scalar() != rep.character().value(h) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Elements commuting with every listed element.
pub fn center_of<G: Group>(group: &G, elements: &[G::Elem]) -> Vec<G::Elem> {
    elements.iter().filter(|z| elements.iter().all(|g| group.mul(g, z) == group.mul(z, g))).cloned().collect()
}

/// Order of `g` (the least `k ≥ 1` with `g^k = e`); assumes finite order.
pub fn element_order<G: Group>(group: &G, g: &G::Elem) -> usize {
    let id = group.identity();
    let (mut x, mut k) = (g.clone(), 1);
    while x != id {
        x = group.mul(&x, g);
        k += 1;
    }
    k
}

/// A generator of a cyclic subgroup given by its elements, the first in list
/// order; `None` if the subgroup is not cyclic.
pub fn cyclic_generator<G: Group>(group: &G, subgroup: &[G::Elem]) -> Option<G::Elem> {
    subgroup.iter().find(|h| element_order(group, h) == subgroup.len()).cloned()
}
