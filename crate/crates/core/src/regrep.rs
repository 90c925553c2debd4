//! The left regular representation compressed to a Cayley ball, operator
//! norms, and commutators with projections supported inside the ball.
//!
//! For a projection `P` supported on `B_{R-1}`, the commutator `[λ_s, P]`
//! vanishes on the orthogonal complement of `span(B_R)` and maps into it, so
//! computing it with the compression `T_s = P_{B_R} λ_s P_{B_R}` gives the
//! norm on all of `ℓ²Γ`. Projections that reach the boundary sphere are
//! refused.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::cayley::{ball, BallIndex, CayleyError};
use crate::groups::Group;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;
const ORTHONORMAL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegRepError {
    #[error(transparent)]
    Cayley(#[from] CayleyError),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error(
        "power iteration did not converge after {iterations} iterations (estimate {estimate}, residual {residual})"
    )]
    NonConvergence { iterations: usize, estimate: f64, residual: f64 },
    #[error("projection support reaches radius {support}, but exact commutators need support inside radius {allowed}")]
    SupportViolation { support: usize, allowed: usize },
    #[error("frame is not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("vector length {got} does not match the ball dimension {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("projection has rank zero")]
    ZeroRank,
    #[error("generator {0} is not part of the representation")]
    UnknownGenerator(String),
}

/// A linear map given by its action and the action of its adjoint.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;
    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64>;
}

/// Square sparse matrix as a triplet list.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    triplets: Vec<(usize, usize, Complex64)>,
    partial_permutation: bool,
}

impl SparseOperator {
    pub fn new(dim: usize, triplets: Vec<(usize, usize, Complex64)>) -> Self {
        let mut per_col = vec![0u32; dim];
        let mut unimodular = true;
        for &(r, c, v) in &triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside dimension {dim}");
            per_col[c] += 1;
            unimodular &= (v.norm() - 1.0).abs() < 1e-14;
        }
        let partial_permutation = unimodular && per_col.iter().all(|&n| n <= 1);
        SparseOperator { dim, triplets, partial_permutation }
    }

    pub fn identity(dim: usize) -> Self {
        SparseOperator::new(dim, (0..dim).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn triplets(&self) -> &[(usize, usize, Complex64)] {
        &self.triplets
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_partial_permutation(&self) -> bool {
        self.partial_permutation
    }

    pub fn adjoint(&self) -> SparseOperator {
        SparseOperator::new(self.dim, self.triplets.iter().map(|&(r, c, v)| (c, r, v.conj())).collect())
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.triplets {
            m[(r, c)] += v;
        }
        m
    }

    /// Entry lookup; linear in the number of non-zeros.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.triplets.iter().filter(|&&(r, c, _)| r == row && c == col).map(|&(_, _, v)| v).sum()
    }
}

impl LinearOperator for SparseOperator {
    fn nrows(&self) -> usize {
        self.dim
    }

    fn ncols(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for &(r, c, v) in &self.triplets {
            y[r] += v * x[c];
        }
        y
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut x = vec![Complex64::new(0.0, 0.0); self.dim];
        for &(r, c, v) in &self.triplets {
            x[c] += v.conj() * y[r];
        }
        x
    }
}

impl LinearOperator for DMatrix<Complex64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (self * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec()
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        (self.adjoint() * nalgebra::DVector::from_column_slice(y)).as_slice().to_vec()
    }
}

/// `⟨x, y⟩ = Σ xᵢ · conj(yᵢ)`, linear in the first slot.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Result of a power-iteration norm estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    /// `‖A*A v − μ v‖` at the returned vector; some eigenvalue of `A*A` lies
    /// within this distance of `μ = value²`.
    pub residual: f64,
}

/// Deterministic, non-symmetric seed vector.
fn seed_vector(n: usize) -> Vec<Complex64> {
    const PHI: f64 = 0.618_033_988_749_894_9;
    let v: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + 0.5 * (((i + 1) as f64 * PHI).fract()), 0.0)).collect();
    let s = norm(&v);
    v.into_iter().map(|x| x / s).collect()
}

/// Operators with at most this many columns are materialized so the power
/// method can run on repeated squares of `A*A`.
const DENSE_SQUARING_LIMIT: usize = 256;
const SQUARINGS: usize = 48;

/// Largest singular value by power iteration on `A*A`.
///
/// Small operators are first materialized and `A*A` is squared repeatedly,
/// which separates even close top singular values; the resulting direction
/// then seeds ordinary power iteration. Stops when the Rayleigh quotient
/// changes by at most `tol` (relative) and the eigen-residual is below `√tol`;
/// errors after `max_iter` iterations.
pub fn op_norm_with<A: LinearOperator + ?Sized>(a: &A, tol: f64, max_iter: usize) -> Result<NormEstimate, RegRepError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(RegRepError::BadTolerance(tol));
    }
    let n = a.ncols();
    if n == 0 {
        return Ok(NormEstimate { value: 0.0, iterations: 0, residual: 0.0 });
    }
    let mut v = if n <= DENSE_SQUARING_LIMIT { squared_power_seed(a) } else { seed_vector(n) };
    let mut mu_prev = f64::INFINITY;
    let mut residual = f64::INFINITY;
    let mut mu = 0.0;
    for it in 1..=max_iter {
        let w = a.apply_adjoint(&a.apply(&v));
        mu = inner(&w, &v).re.max(0.0);
        let wn = norm(&w);
        if wn == 0.0 {
            return Ok(NormEstimate { value: 0.0, iterations: it, residual: 0.0 });
        }
        residual = w.iter().zip(&v).map(|(wi, vi)| (wi - vi * mu).norm_sqr()).sum::<f64>().sqrt();
        let scale = mu.max(1.0);
        if (mu - mu_prev).abs() <= tol * scale && residual <= tol.sqrt() * scale {
            return Ok(NormEstimate { value: mu.sqrt(), iterations: it, residual });
        }
        mu_prev = mu;
        v = w.into_iter().map(|x| x / wn).collect();
    }
    Err(RegRepError::NonConvergence { iterations: max_iter, estimate: mu.sqrt(), residual })
}

/// Dominant direction of `(A*A)^(2^SQUARINGS)` applied to the seed vector.
fn squared_power_seed<A: LinearOperator + ?Sized>(a: &A) -> Vec<Complex64> {
    let n = a.ncols();
    let mut b = DMatrix::<Complex64>::zeros(n, n);
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = Complex64::new(1.0, 0.0);
        let col = a.apply_adjoint(&a.apply(&e));
        b.set_column(j, &nalgebra::DVector::from_column_slice(&col));
        e[j] = Complex64::new(0.0, 0.0);
    }
    for _ in 0..SQUARINGS {
        let scale = b.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if scale == 0.0 || !scale.is_finite() {
            break;
        }
        b /= Complex64::new(scale, 0.0);
        b = &b * &b;
    }
    let seed = nalgebra::DVector::from_vec(seed_vector(n));
    let v = &b * seed;
    let vn = v.norm();
    if vn == 0.0 || !vn.is_finite() {
        return seed_vector(n);
    }
    v.iter().map(|x| x / vn).collect()
}

pub fn op_norm<A: LinearOperator + ?Sized>(a: &A, tol: f64) -> Result<f64, RegRepError> {
    op_norm_with(a, tol, DEFAULT_MAX_ITER).map(|e| e.value)
}

/// Compressions `P_{B_R} λ_s P_{B_R}` for each generator, in the basis of a
/// Cayley ball.
#[derive(Clone, Debug)]
pub struct TruncatedRep<E> {
    ball: BallIndex<E>,
    generators: Vec<E>,
    ops: Vec<SparseOperator>,
}

impl<E: Clone + Eq + std::hash::Hash + std::fmt::Debug> TruncatedRep<E> {
    pub fn build<G: Group<Elem = E>>(group: &G, gens: &[E], radius: usize, cap: usize) -> Result<Self, RegRepError> {
        let ball = ball(group, gens, radius, cap)?;
        let ops = gens
            .iter()
            .map(|s| {
                let triplets = ball
                    .elements()
                    .iter()
                    .enumerate()
                    .filter_map(|(col, t)| {
                        ball.position(&group.mul(s, t)).map(|row| (row, col, Complex64::new(1.0, 0.0)))
                    })
                    .collect();
                SparseOperator::new(ball.len(), triplets)
            })
            .collect();
        Ok(TruncatedRep { ball, generators: gens.to_vec(), ops })
    }

    pub fn ball(&self) -> &BallIndex<E> {
        &self.ball
    }

    pub fn radius(&self) -> usize {
        self.ball.radius()
    }

    pub fn dim(&self) -> usize {
        self.ball.len()
    }

    pub fn generators(&self) -> &[E] {
        &self.generators
    }

    pub fn op(&self, s: &E) -> Result<&SparseOperator, RegRepError> {
        self.generators
            .iter()
            .position(|g| g == s)
            .map(|i| &self.ops[i])
            .ok_or_else(|| RegRepError::UnknownGenerator(format!("{s:?}")))
    }
}

/// The compressed free-group representation with generators `a, b, a⁻¹, b⁻¹`.
pub fn free_truncated_rep(radius: usize) -> Result<TruncatedRep<crate::groups::FreeWord>, RegRepError> {
    let g = crate::groups::FreeGroup;
    TruncatedRep::build(&g, &g.generators(), radius, crate::cayley::DEFAULT_BALL_CAP)
}

/// A finite-rank projection given by an orthonormal frame in a ball basis.
#[derive(Clone, Debug)]
pub struct FiniteProjection {
    frame: Vec<Vec<Complex64>>,
    support_radius: usize,
}

impl FiniteProjection {
    /// Validates an orthonormal frame (to 1e−12).
    pub fn from_frame<E: Clone + Eq + std::hash::Hash>(
        ball: &BallIndex<E>,
        frame: Vec<Vec<Complex64>>,
    ) -> Result<Self, RegRepError> {
        if frame.is_empty() {
            return Err(RegRepError::ZeroRank);
        }
        for v in &frame {
            if v.len() != ball.len() {
                return Err(RegRepError::DimensionMismatch { got: v.len(), expected: ball.len() });
            }
        }
        let mut dev: f64 = 0.0;
        for (i, u) in frame.iter().enumerate() {
            for (j, v) in frame.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((inner(u, v) - target).norm());
            }
        }
        if dev > ORTHONORMAL_TOL {
            return Err(RegRepError::NotOrthonormal(dev));
        }
        let support_radius = frame
            .iter()
            .flat_map(|v| v.iter().enumerate().filter(|(_, x)| x.norm() > 0.0).map(|(i, _)| ball.distance_of(i)))
            .max()
            .unwrap_or(0);
        Ok(FiniteProjection { frame, support_radius })
    }

    /// Projection onto the span of arbitrary vectors (Gram–Schmidt, applied
    /// twice); numerically dependent vectors are dropped.
    pub fn from_spanning<E: Clone + Eq + std::hash::Hash>(
        ball: &BallIndex<E>,
        vectors: Vec<Vec<Complex64>>,
    ) -> Result<Self, RegRepError> {
        FiniteProjection::from_frame(ball, orthonormalize(vectors, 1e-10))
    }

    /// Rank-one projection onto `δ_t` for the basis element at `position`.
    pub fn delta<E: Clone + Eq + std::hash::Hash>(ball: &BallIndex<E>, position: usize) -> Result<Self, RegRepError> {
        let mut v = vec![Complex64::new(0.0, 0.0); ball.len()];
        v[position] = Complex64::new(1.0, 0.0);
        FiniteProjection::from_frame(ball, vec![v])
    }

    pub fn rank(&self) -> usize {
        self.frame.len()
    }

    pub fn frame(&self) -> &[Vec<Complex64>] {
        &self.frame
    }

    pub fn support_radius(&self) -> usize {
        self.support_radius
    }

    pub fn dim(&self) -> usize {
        self.frame[0].len()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        for v in &self.frame {
            let c = inner(x, v);
            for (yi, vi) in y.iter_mut().zip(v) {
                *yi += c * vi;
            }
        }
        y
    }

    /// `⟨P δ_i, δ_i⟩`.
    pub fn diagonal(&self, i: usize) -> f64 {
        self.frame.iter().map(|v| v[i].norm_sqr()).sum()
    }
}

/// Modified Gram–Schmidt, two passes; vectors whose residual norm falls below
/// `drop_tol` are discarded.
pub fn orthonormalize(vectors: Vec<Vec<Complex64>>, drop_tol: f64) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for mut v in vectors {
        for _ in 0..2 {
            for q in &basis {
                let c = inner(&v, q);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let n = norm(&v);
        if n > drop_tol {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// The commutator `[T, P] = TP − PT` as a lazy operator.
pub struct Commutator<'a> {
    pub t: &'a SparseOperator,
    pub p: &'a FiniteProjection,
}

impl LinearOperator for Commutator<'_> {
    fn nrows(&self) -> usize {
        self.t.dim()
    }

    fn ncols(&self) -> usize {
        self.t.dim()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let a = self.t.apply(&self.p.apply(x));
        let b = self.p.apply(&self.t.apply(x));
        a.iter().zip(&b).map(|(u, v)| u - v).collect()
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        // [T, P]* = P T* − T* P
        let a = self.p.apply(&self.t.apply_adjoint(y));
        let b = self.t.apply_adjoint(&self.p.apply(y));
        a.iter().zip(&b).map(|(u, v)| u - v).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutatorNorm {
    pub value: f64,
    /// Always true for accepted projections: the compressed commutator has the
    /// same norm as the commutator on all of `ℓ²Γ`.
    pub exact_on_full_space: bool,
}

/// Checks the exactness contract: support inside `B_{R−1}`.
pub fn check_support<E>(rep: &TruncatedRep<E>, p: &FiniteProjection) -> Result<(), RegRepError>
where
    E: Clone + Eq + std::hash::Hash + std::fmt::Debug,
{
    if p.dim() != rep.dim() {
        return Err(RegRepError::DimensionMismatch { got: p.dim(), expected: rep.dim() });
    }
    let allowed = rep.radius().checked_sub(1);
    match allowed {
        Some(allowed) if p.support_radius() <= allowed => Ok(()),
        _ => Err(RegRepError::SupportViolation { support: p.support_radius(), allowed: allowed.unwrap_or(0) }),
    }
}

/// The small matrix `Q* C W` with `W` an orthonormal basis of
/// `span(V, T*V)` and `Q` of `span(V, TV)`. `C` vanishes off `W` and maps into
/// `span(Q)`, so `‖C‖` equals the norm of this matrix.
pub fn reduced_commutator(t: &SparseOperator, p: &FiniteProjection) -> DMatrix<Complex64> {
    let frame = p.frame();
    let mut dom: Vec<Vec<Complex64>> = frame.to_vec();
    dom.extend(frame.iter().map(|v| t.apply_adjoint(v)));
    let mut ran: Vec<Vec<Complex64>> = frame.to_vec();
    ran.extend(frame.iter().map(|v| t.apply(v)));
    let w = orthonormalize(dom, 1e-12);
    let q = orthonormalize(ran, 1e-12);
    let c = Commutator { t, p };
    let mut m = DMatrix::zeros(q.len(), w.len());
    for (j, wj) in w.iter().enumerate() {
        let cw = c.apply(wj);
        for (i, qi) in q.iter().enumerate() {
            m[(i, j)] = inner(&cw, qi);
        }
    }
    m
}

/// `‖[λ_s, P]‖` computed inside the ball; exact on `ℓ²Γ` by the support
/// contract.
pub fn commutator_norm<E>(
    rep: &TruncatedRep<E>,
    s: &E,
    p: &FiniteProjection,
    tol: f64,
) -> Result<CommutatorNorm, RegRepError>
where
    E: Clone + Eq + std::hash::Hash + std::fmt::Debug,
{
    check_support(rep, p)?;
    let t = rep.op(s)?;
    let m = reduced_commutator(t, p);
    let value = op_norm(&m, tol)?;
    Ok(CommutatorNorm { value, exact_on_full_space: true })
}

/// Largest singular value from a full dense SVD. Test and audit oracle.
pub fn dense_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}
