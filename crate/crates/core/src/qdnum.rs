//! Commutator estimates for the free group: sphere vectors, the rank-one
//! commutator identity, paradoxical certificates and the lower bound
//! `C_F ≥ 1/(n+m−2)` they imply, the trace inequality behind it, and an
//! auditable replay of the bound on concrete projections.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cayley::BallIndex;
use crate::groups::{FreeWord, Letter};
use crate::regrep::{self, commutator_norm, inner, norm, FiniteProjection, RegRepError, SparseOperator, TruncatedRep};

/// Radius on which certificates are verified before a bound is issued.
pub const MIN_CERTIFICATE_RADIUS: usize = 6;
/// Slack used for the audit inequalities.
pub const AUDIT_SLACK: f64 = 1e-8;
const UNIT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QdError {
    #[error(transparent)]
    RegRep(#[from] RegRepError),
    #[error("ball of radius {have} is too small; need radius {need}")]
    RadiusTooSmall { have: usize, need: usize },
    #[error("sphere depth must be at least 1")]
    ZeroDepth,
    #[error("vector is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("certificate failed verification at radius {radius}: {first}")]
    Unverified { radius: usize, first: String },
    #[error("certificate needs radius >= {min} for a bound, got {got}")]
    VerificationRadius { got: usize, min: usize },
    #[error("certificate must have at least one X and one Y piece with identity first translators")]
    MalformedCertificate,
    #[error("n + m must exceed 2 for the bound, got {0}")]
    TooFewPieces(usize),
    #[error("trace-lemma precondition failed: {0}")]
    Precondition(String),
    #[error("translator {0} is neither the identity nor a generator")]
    UnsupportedTranslator(String),
    #[error("profile dimension {dim} needs a representation of radius >= {need}, got {have}")]
    ProfileTooLarge { dim: usize, need: usize, have: usize },
}

/// `|S_i|` in the free group.
pub fn free_sphere_size(i: usize) -> f64 {
    if i == 0 {
        1.0
    } else {
        4.0 * 3f64.powi(i as i32 - 1)
    }
}

/// The unit vector `ξ = Σ_{i=1}^n α_i Σ_{x∈S_i} δ_x` with `α_i = (|S_i|·n)^(−1/2)`.
#[derive(Clone, Debug)]
pub struct SphereVector {
    pub n: usize,
    /// `α_1, …, α_n`.
    pub coefficients: Vec<f64>,
    pub vector: Vec<Complex64>,
}

pub fn xi_vector(n: usize, ball: &BallIndex<FreeWord>) -> Result<SphereVector, QdError> {
    if n == 0 {
        return Err(QdError::ZeroDepth);
    }
    if ball.radius() < n {
        return Err(QdError::RadiusTooSmall { have: ball.radius(), need: n });
    }
    let coefficients: Vec<f64> = (1..=n).map(|i| 1.0 / (free_sphere_size(i) * n as f64).sqrt()).collect();
    Ok(SphereVector { n, vector: radial_vector(ball, &coefficients), coefficients })
}

/// Vector with constant value `coefficients[i−1]` on each sphere `S_i`.
pub fn radial_vector(ball: &BallIndex<FreeWord>, coefficients: &[f64]) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); ball.len()];
    for (i, &a) in coefficients.iter().enumerate() {
        for pos in ball.sphere_range(i + 1) {
            v[pos] = Complex64::new(a, 0.0);
        }
    }
    v
}

/// `⟨λ_a ξ_n, ξ_n⟩` by evaluating
/// `Σ_{i=1}^n (α_i α_{i−1} |S_{i−1}∖S^a_{i−1}| + α_i α_{i+1} |S^a_{i+1}|)`
/// with `α_0 = α_{n+1} = 0`.
pub fn pairing_closed_form(n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    // terms are evaluated as exp(log …) so that 3^i never overflows
    let ln3 = 3f64.ln();
    let ln_sphere = |i: usize| if i == 0 { 0.0 } else { 4f64.ln() + (i as f64 - 1.0) * ln3 };
    let ln_alpha = |i: usize| if i == 0 || i > n { None } else { Some(-0.5 * (ln_sphere(i) + (n as f64).ln())) };
    // |S_j ∖ S_j^a| = 3^j for j ≥ 1 (and 1 for j = 0); |S_j^a| = 3^(j−1)
    let ln_not_a = |j: usize| j as f64 * ln3;
    let ln_with_a = |j: usize| (j as f64 - 1.0) * ln3;
    let term = |x: Option<f64>, y: Option<f64>, c: f64| match (x, y) {
        (Some(x), Some(y)) => (x + y + c).exp(),
        _ => 0.0,
    };
    (1..=n)
        .map(|i| {
            term(ln_alpha(i), ln_alpha(i - 1), ln_not_a(i - 1)) + term(ln_alpha(i), ln_alpha(i + 1), ln_with_a(i + 1))
        })
        .sum()
}

/// `‖[λ_a, P_{ξ_n}]‖ = √(1 − (3/4)(1 − 1/n)²)`.
pub fn sharp_commutator_closed_form(n: usize) -> f64 {
    let p = 3f64.sqrt() / 2.0 * (1.0 - 1.0 / n as f64);
    (1.0 - p * p).sqrt()
}

/// `⟨λ_x ξ_n, ξ_n⟩` computed with the sparse compression.
pub fn pairing_numeric(x: Letter, n: usize, rep: &TruncatedRep<FreeWord>) -> Result<f64, QdError> {
    if rep.radius() < n + 1 {
        return Err(QdError::RadiusTooSmall { have: rep.radius(), need: n + 1 });
    }
    let xi = xi_vector(n, rep.ball())?;
    let t = rep.op(&FreeWord::letter(x))?;
    Ok(inner(&t.apply_vec(&xi.vector), &xi.vector).re)
}

trait ApplyVec {
    fn apply_vec(&self, x: &[Complex64]) -> Vec<Complex64>;
}

impl ApplyVec for SparseOperator {
    fn apply_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        regrep::LinearOperator::apply(self, x)
    }
}

/// `√(1 − |⟨Uξ, ξ⟩|²)`, the commutator norm of `U` with the rank-one
/// projection onto a unit vector `ξ` when `U` is unitary on the relevant
/// subspace.
pub fn rank_one_value(u: &SparseOperator, xi: &[Complex64]) -> Result<f64, QdError> {
    let nx = norm(xi);
    if (nx - 1.0).abs() > UNIT_TOL {
        return Err(QdError::NotUnit(nx));
    }
    let p = inner(&u.apply_vec(xi), xi).norm();
    Ok((1.0 - p * p).max(0.0).sqrt())
}

/// Rank-one commutator norm for a generator of a truncated representation,
/// enforcing the support contract that makes the value exact.
pub fn rank_one_commutator_norm(rep: &TruncatedRep<FreeWord>, s: &FreeWord, xi: &[Complex64]) -> Result<f64, QdError> {
    let p = FiniteProjection::from_frame(rep.ball(), vec![xi.to_vec()]).map_err(|e| match e {
        RegRepError::NotOrthonormal(_) => QdError::NotUnit(norm(xi)),
        other => other.into(),
    })?;
    regrep::check_support(rep, &p)?;
    rank_one_value(rep.op(s)?, xi)
}

/// Membership predicate for a piece of a paradoxical decomposition.
pub type Membership = Arc<dyn Fn(&FreeWord) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct Piece {
    pub name: String,
    pub translator: FreeWord,
    pub contains: Membership,
}

impl fmt::Debug for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Piece").field("name", &self.name).field("translator", &self.translator).finish()
    }
}

impl Piece {
    pub fn new(name: &str, translator: FreeWord, contains: impl Fn(&FreeWord) -> bool + Send + Sync + 'static) -> Self {
        Piece { name: name.to_string(), translator, contains: Arc::new(contains) }
    }
}

/// Pieces `X_1..X_n`, `Y_1..Y_m` with translators, `g_1 = h_1 = e`, witnessing
/// `Γ = ⊔ g_i X_i = ⊔ h_j Y_j = (⊔ X_i) ⊔ (⊔ Y_j)`.
#[derive(Clone, Debug)]
pub struct ParadoxicalCertificate {
    x: Vec<Piece>,
    y: Vec<Piece>,
}

impl ParadoxicalCertificate {
    pub fn new(x: Vec<Piece>, y: Vec<Piece>) -> Result<Self, QdError> {
        let ok = |ps: &[Piece]| ps.first().is_some_and(|p| p.translator.is_identity());
        if !ok(&x) || !ok(&y) {
            return Err(QdError::MalformedCertificate);
        }
        Ok(ParadoxicalCertificate { x, y })
    }

    pub fn x_pieces(&self) -> &[Piece] {
        &self.x
    }

    pub fn y_pieces(&self) -> &[Piece] {
        &self.y
    }

    pub fn piece_count(&self) -> usize {
        self.x.len() + self.y.len()
    }

    /// `F = {g_1, …, g_n, h_1, …, h_m}` as a set (deduplicated, sorted).
    pub fn finite_set(&self) -> Vec<FreeWord> {
        let mut f: Vec<FreeWord> = self.x.iter().chain(&self.y).map(|p| p.translator.clone()).collect();
        f.sort();
        f.dedup();
        f
    }

    pub fn in_x(&self, w: &FreeWord) -> bool {
        self.x.iter().any(|p| (p.contains)(w))
    }

    pub fn in_y(&self, w: &FreeWord) -> bool {
        self.y.iter().any(|p| (p.contains)(w))
    }

    /// Checks all three decompositions on every element of `B_radius`.
    pub fn verify(&self, radius: usize) -> Result<CertificateReport, QdError> {
        let ball = crate::cayley::free_ball(radius).map_err(RegRepError::from)?;
        let mut violations = Vec::new();
        let all: Vec<&Piece> = self.x.iter().chain(&self.y).collect();
        for w in ball.elements() {
            let hits = all.iter().filter(|p| (p.contains)(w)).count();
            if hits != 1 {
                violations.push(CertificateViolation { kind: ViolationKind::Pieces, witness: w.clone(), hits });
            }
            for (pieces, kind) in [(&self.x, ViolationKind::XTranslates), (&self.y, ViolationKind::YTranslates)] {
                let hits = pieces.iter().filter(|p| (p.contains)(&p.translator.inverse().mul(w))).count();
                if hits != 1 {
                    violations.push(CertificateViolation { kind, witness: w.clone(), hits });
                }
            }
        }
        Ok(CertificateReport { radius, checked: ball.len(), violations })
    }

    /// Verifies on `B_radius` (at least [`MIN_CERTIFICATE_RADIUS`]).
    pub fn verified(&self, radius: usize) -> Result<VerifiedCertificate<'_>, QdError> {
        if radius < MIN_CERTIFICATE_RADIUS {
            return Err(QdError::VerificationRadius { got: radius, min: MIN_CERTIFICATE_RADIUS });
        }
        let report = self.verify(radius)?;
        match report.violations.first() {
            None => Ok(VerifiedCertificate { cert: self, radius }),
            Some(v) => Err(QdError::Unverified { radius, first: v.to_string() }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// Element lies in zero or several of the pieces.
    Pieces,
    /// Element lies in zero or several of the translates `g_i X_i`.
    XTranslates,
    YTranslates,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateViolation {
    pub kind: ViolationKind,
    pub witness: FreeWord,
    pub hits: usize,
}

impl fmt::Display for CertificateViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {} covered {} times", self.kind, self.witness, self.hits)
    }
}

#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub radius: usize,
    pub checked: usize,
    pub violations: Vec<CertificateViolation>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A certificate that passed [`ParadoxicalCertificate::verified`].
#[derive(Clone, Copy, Debug)]
pub struct VerifiedCertificate<'a> {
    cert: &'a ParadoxicalCertificate,
    radius: usize,
}

impl VerifiedCertificate<'_> {
    pub fn certificate(&self) -> &ParadoxicalCertificate {
        self.cert
    }

    pub fn radius(&self) -> usize {
        self.radius
    }
}

/// The standard decomposition `F₂ = X₁ ⊔ aX₂ = Y₁ ⊔ bY₂`:
/// `X₁` = words starting with `a`, plus `e` and the powers `a^(−k)`;
/// `X₂` = the remaining words starting with `a⁻¹`; `Y₁`, `Y₂` = words starting
/// with `b`, `b⁻¹`.
pub fn f2_standard_certificate() -> ParadoxicalCertificate {
    let e = FreeWord::identity();
    let x1 = Piece::new("X1", e.clone(), |w| {
        w.is_identity() || w.first() == Some(Letter::A) || w.power_of(Letter::AInv).is_some()
    });
    let x2 = Piece::new("X2", FreeWord::letter(Letter::A), |w| {
        w.first() == Some(Letter::AInv) && w.power_of(Letter::AInv).is_none()
    });
    let y1 = Piece::new("Y1", e, |w| w.first() == Some(Letter::B));
    let y2 = Piece::new("Y2", FreeWord::letter(Letter::B), |w| w.first() == Some(Letter::BInv));
    ParadoxicalCertificate::new(vec![x1, x2], vec![y1, y2]).expect("identity translators first")
}

/// A five-piece variant: `X₁` of the standard certificate split into
/// `{e} ∪ {a^(−k)}` and the words starting with `a`, both with translator `e`.
pub fn f2_split_certificate() -> ParadoxicalCertificate {
    let e = FreeWord::identity();
    let std = f2_standard_certificate();
    let x1a = Piece::new("X1a", e.clone(), |w| w.is_identity() || w.power_of(Letter::AInv).is_some());
    let x1b = Piece::new("X1b", e, |w| w.first() == Some(Letter::A));
    ParadoxicalCertificate::new(vec![x1a, std.x[1].clone(), x1b], std.y.clone()).expect("identity translators first")
}

/// The lower bound `C_F ≥ 1/(n+m−2)` issued by a verified certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBound {
    pub bound: Ratio<u64>,
    pub finite_set: Vec<FreeWord>,
    pub pieces: usize,
}

pub fn cf_lower_bound(cert: &VerifiedCertificate<'_>) -> Result<LowerBound, QdError> {
    let c = cert.certificate();
    let pieces = c.piece_count();
    if pieces <= 2 {
        return Err(QdError::TooFewPieces(pieces));
    }
    Ok(LowerBound { bound: Ratio::new(1, pieces as u64 - 2), finite_set: c.finite_set(), pieces })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceLemmaOutcome {
    pub lhs: f64,
    pub bound: f64,
    pub rank: usize,
    pub norm: f64,
    pub ok: bool,
}

const PRE_TOL: f64 = 1e-10;
const RANK_TOL: f64 = 1e-9;
const TRACE_SLACK: f64 = 1e-9;

/// `|Tr(QX)| ≤ ½ · rank(X) · ‖X‖` for Hermitian traceless `X` and `0 ≤ Q ≤ 1`.
pub fn trace_lemma_check(x: &DMatrix<Complex64>, q: &DMatrix<Complex64>) -> Result<TraceLemmaOutcome, QdError> {
    if !x.is_square() || x.shape() != q.shape() {
        return Err(QdError::Precondition(format!("shapes {:?} and {:?}", x.shape(), q.shape())));
    }
    let herm_dev = |m: &DMatrix<Complex64>| (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm_dev(x) > PRE_TOL {
        return Err(QdError::Precondition("X is not Hermitian".into()));
    }
    if x.trace().norm() > PRE_TOL {
        return Err(QdError::Precondition(format!("Tr(X) = {} is not zero", x.trace())));
    }
    if herm_dev(q) > PRE_TOL {
        return Err(QdError::Precondition("Q is not Hermitian".into()));
    }
    if x.nrows() > 0 {
        let qe = q.clone().symmetric_eigenvalues();
        if qe.iter().any(|&l| !(-PRE_TOL..=1.0 + PRE_TOL).contains(&l)) {
            return Err(QdError::Precondition("spectrum of Q leaves [0, 1]".into()));
        }
    }
    let (rank, xnorm) = if x.nrows() == 0 {
        (0, 0.0)
    } else {
        let sv = x.clone().singular_values();
        (sv.iter().filter(|&&s| s > RANK_TOL).count(), sv.iter().cloned().fold(0.0, f64::max))
    };
    let lhs = (q * x).trace().norm();
    let bound = 0.5 * rank as f64 * xnorm;
    Ok(TraceLemmaOutcome { lhs, bound, rank, norm: xnorm, ok: lhs <= bound + TRACE_SLACK })
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect();
    let mut basis = regrep::orthonormalize(cols, 1e-8);
    // fall back to standard basis vectors if a random draw was degenerate
    let mut k = 0;
    while basis.len() < n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[k] = Complex64::new(1.0, 0.0);
        basis.push(e);
        basis = regrep::orthonormalize(basis, 1e-8);
        k += 1;
    }
    DMatrix::from_fn(n, n, |i, j| basis[j][i])
}

/// One random instance: `X = V diag(c) V*` with `Σ c = 0` on a random number of
/// eigen-directions (so the rank varies), `Q = W diag(u) W*` with `u ∈ [0,1]`.
pub fn random_trace_instance(rng: &mut ChaCha8Rng, max_dim: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let n = rng.gen_range(2..=max_dim.max(2));
    let r = rng.gen_range(2..=n);
    let mut c: Vec<f64> = (0..r).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mean = c.iter().sum::<f64>() / r as f64;
    c.iter_mut().for_each(|x| *x -= mean);
    let mut diag = vec![0.0; n];
    diag[..r].copy_from_slice(&c);
    let v = random_unitary(rng, n);
    let dx =
        DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { Complex64::new(0.0, 0.0) });
    let x = &v * dx * v.adjoint();
    let x = (&x + x.adjoint()) * Complex64::new(0.5, 0.0);
    let w = random_unitary(rng, n);
    let dq = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(rng.gen_range(0.0..1.0), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let q = &w * dq * w.adjoint();
    let q = (&q + q.adjoint()) * Complex64::new(0.5, 0.0);
    // remove the rounding trace so the precondition holds to 1e−10
    let t = x.trace() / Complex64::new(n as f64, 0.0);
    let mut x = x;
    if t.norm() > 1e-13 {
        for i in 0..n {
            x[(i, i)] -= t;
        }
    }
    (x, q)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceLemmaSummary {
    pub trials: usize,
    pub violations: usize,
    /// Largest observed `lhs / bound`.
    pub max_ratio: f64,
}

pub fn trace_lemma_trials(trials: usize, seed: u64, max_dim: usize) -> Result<TraceLemmaSummary, QdError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut max_ratio: f64 = 0.0;
    for _ in 0..trials {
        let (x, q) = random_trace_instance(&mut rng, max_dim);
        let out = trace_lemma_check(&x, &q)?;
        if !out.ok {
            violations += 1;
        }
        if out.bound > 0.0 {
            max_ratio = max_ratio.max(out.lhs / out.bound);
        }
    }
    Ok(TraceLemmaSummary { trials, violations, max_ratio })
}

/// Replay of the lower-bound argument on a concrete projection.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditRecord {
    pub rank: usize,
    /// `max_{x∈F} ‖[λ_x, P]‖`.
    pub epsilon: f64,
    /// Commutator norm per translator (the identity contributes 0).
    pub translator_norms: Vec<(FreeWord, f64)>,
    pub trace_x: f64,
    pub trace_y: f64,
    /// `Tr(P_X P) + (n−1)kε − k`; non-negative up to rounding.
    pub slack_x: f64,
    /// `Tr(P_Y P) + (m−1)kε − k`.
    pub slack_y: f64,
    /// `ε − 1/(n+m−2)`.
    pub bound_slack: f64,
}

impl AuditRecord {
    pub fn holds(&self) -> bool {
        self.slack_x >= -AUDIT_SLACK && self.slack_y >= -AUDIT_SLACK && self.bound_slack >= -AUDIT_SLACK
    }
}

pub fn qrosenberg_audit(
    p: &FiniteProjection,
    cert: &VerifiedCertificate<'_>,
    rep: &TruncatedRep<FreeWord>,
) -> Result<AuditRecord, QdError> {
    regrep::check_support(rep, p)?;
    let c = cert.certificate();
    let mut translator_norms = Vec::new();
    for g in c.finite_set() {
        let v = if g.is_identity() {
            0.0
        } else if g.len() == 1 {
            commutator_norm(rep, &g, p, regrep::DEFAULT_TOL)?.value
        } else {
            return Err(QdError::UnsupportedTranslator(g.to_string()));
        };
        translator_norms.push((g, v));
    }
    let epsilon = translator_norms.iter().map(|&(_, v)| v).fold(0.0, f64::max);
    let k = p.rank() as f64;
    let ball = rep.ball();
    let (mut trace_x, mut trace_y) = (0.0, 0.0);
    for (i, w) in ball.elements().iter().enumerate() {
        let d = p.diagonal(i);
        if d == 0.0 {
            continue;
        }
        if c.in_x(w) {
            trace_x += d;
        }
        if c.in_y(w) {
            trace_y += d;
        }
    }
    let (n, m) = (c.x_pieces().len() as f64, c.y_pieces().len() as f64);
    let bound = 1.0 / (n + m - 2.0);
    Ok(AuditRecord {
        rank: p.rank(),
        epsilon,
        translator_norms,
        trace_x,
        trace_y,
        slack_x: trace_x + (n - 1.0) * k * epsilon - k,
        slack_y: trace_y + (m - 1.0) * k * epsilon - k,
        bound_slack: epsilon - bound,
    })
}

/// Random projection of rank `rank` supported on `B_support`. Odd draws are
/// uniform noise; even draws perturb sphere vectors, which keeps the
/// commutator norms near the sharp value.
pub fn random_projection(
    rng: &mut ChaCha8Rng,
    ball: &BallIndex<FreeWord>,
    rank: usize,
    support: usize,
) -> Result<FiniteProjection, QdError> {
    let len = ball.sphere_range(support).end;
    let structured = rng.gen_bool(0.5);
    let vecs = (0..rank)
        .map(|_| {
            let mut v = vec![Complex64::new(0.0, 0.0); ball.len()];
            if structured && support >= 1 {
                let n = rng.gen_range(1..=support);
                let xi = xi_vector(n, ball).expect("support fits in ball");
                let noise = 10f64.powf(rng.gen_range(-4.0..-0.5));
                for i in 0..len {
                    v[i] = xi.vector[i] + Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * noise;
                }
            } else {
                for x in v.iter_mut().take(len) {
                    *x = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            v
        })
        .collect();
    Ok(FiniteProjection::from_spanning(ball, vecs)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditSummary {
    pub trials: usize,
    pub inequality_violations: usize,
    pub min_epsilon: f64,
    pub min_slack: f64,
    pub bound: f64,
}

/// Audits `trials` random projections of rank `1..=max_rank` supported on
/// `B_support` against the standard certificate.
pub fn random_audit(trials: usize, seed: u64, max_rank: usize, support: usize) -> Result<AuditSummary, QdError> {
    let rep = regrep::free_truncated_rep(support + 1)?;
    let cert = f2_standard_certificate();
    let verified = cert.verified(MIN_CERTIFICATE_RADIUS.max(support + 1))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = AuditSummary {
        trials,
        inequality_violations: 0,
        min_epsilon: f64::INFINITY,
        min_slack: f64::INFINITY,
        bound: 0.5,
    };
    for _ in 0..trials {
        let rank = rng.gen_range(1..=max_rank);
        let p = random_projection(&mut rng, rep.ball(), rank, support)?;
        let rec = qrosenberg_audit(&p, &verified, &rep)?;
        if !rec.holds() {
            summary.inequality_violations += 1;
        }
        summary.min_epsilon = summary.min_epsilon.min(rec.epsilon);
        summary.min_slack = summary.min_slack.min(rec.slack_x.min(rec.slack_y));
    }
    Ok(summary)
}

/// Pairing `⟨λ_a ξ, ξ⟩` of the radial vector with sphere weights `β_i`
/// (`ξ = Σ β_i |S_i|^(−1/2) 1_{S_i}`, normalized): `(√3/2) Σ β_iβ_{i+1} / Σ β_i²`.
pub fn radial_pairing(profile: &[f64]) -> f64 {
    let num: f64 = profile.windows(2).map(|w| w[0] * w[1]).sum();
    let den: f64 = profile.iter().map(|b| b * b).sum();
    if den == 0.0 {
        return 0.0;
    }
    3f64.sqrt() / 2.0 * num / den
}

pub fn radial_value(profile: &[f64]) -> f64 {
    let p = radial_pairing(profile);
    (1.0 - p * p).max(0.0).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpperSearch {
    pub best_value: f64,
    /// Normalized sphere weights `β_1..β_d`.
    pub profile: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    /// `max_{x∈F} ‖[λ_x, P_ξ]‖` recomputed with the sparse representation,
    /// when a representation of radius `> dim` was supplied.
    pub numeric_value: Option<f64>,
}

const STEP_TOL: f64 = 1e-6;
const MAX_SWEEPS: usize = 1_000_000;

/// Coordinate descent over radial profiles on spheres `1..=dim`, starting from
/// the uniform profile (which is `ξ_dim`).
pub fn cf_upper_search(
    dim: usize,
    rep: Option<&TruncatedRep<FreeWord>>,
    f: &[FreeWord],
) -> Result<UpperSearch, QdError> {
    if dim == 0 {
        return Err(QdError::ZeroDepth);
    }
    if let Some(rep) = rep {
        if dim + 1 > rep.radius() {
            return Err(QdError::ProfileTooLarge { dim, need: dim + 1, have: rep.radius() });
        }
    }
    let mut beta = vec![1.0 / (dim as f64).sqrt(); dim];
    let mut best = radial_value(&beta);
    let mut step = 0.1;
    let mut sweeps = 0;
    while step >= STEP_TOL && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut improved = false;
        for i in 0..dim {
            for dir in [1.0, -1.0] {
                let old = beta[i];
                beta[i] = old + dir * step;
                let v = radial_value(&beta);
                if v < best {
                    best = v;
                    improved = true;
                    break;
                }
                beta[i] = old;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    let s: f64 = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
    beta.iter_mut().for_each(|b| *b /= s);
    let numeric_value = match rep {
        None => None,
        Some(rep) => {
            let coeffs: Vec<f64> = beta.iter().enumerate().map(|(i, b)| b / free_sphere_size(i + 1).sqrt()).collect();
            let xi = radial_vector(rep.ball(), &coeffs);
            let mut worst: f64 = 0.0;
            for x in f.iter().filter(|x| !x.is_identity()) {
                worst = worst.max(rank_one_commutator_norm(rep, x, &xi)?);
            }
            Some(worst)
        }
    };
    Ok(UpperSearch { best_value: best, profile: beta, sweeps, converged: step < STEP_TOL, numeric_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regrep::free_truncated_rep;

    fn w(s: &str) -> FreeWord {
        s.parse().unwrap()
    }

    #[test]
    fn xi_coefficients_and_norm() {
        let ball = crate::cayley::free_ball(4).unwrap();
        let one = xi_vector(1, &ball).unwrap();
        assert!((one.coefficients[0] - 0.5).abs() < 1e-15);
        assert_eq!(one.vector.iter().filter(|x| x.re != 0.0).count(), 4);
        let two = xi_vector(2, &ball).unwrap();
        assert!((two.coefficients[0] - 8f64.sqrt().recip()).abs() < 1e-15);
        assert!((two.coefficients[1] - 24f64.sqrt().recip()).abs() < 1e-15);
        for n in 1..=4 {
            let xi = xi_vector(n, &ball).unwrap();
            assert!((norm(&xi.vector) - 1.0).abs() < 1e-12);
            assert_eq!(xi.vector[0], Complex64::new(0.0, 0.0));
        }
        assert!(matches!(xi_vector(5, &ball), Err(QdError::RadiusTooSmall { .. })));
        assert!(matches!(xi_vector(0, &ball), Err(QdError::ZeroDepth)));
    }

    #[test]
    fn pairing_closed_form_values() {
        assert_eq!(pairing_closed_form(1), 0.0);
        assert!((pairing_closed_form(3) - 3f64.sqrt() / 3.0).abs() < 1e-15);
        for n in 1..=200 {
            let target = 3f64.sqrt() / 2.0 * (1.0 - 1.0 / n as f64);
            assert!((pairing_closed_form(n) - target).abs() < 1e-13, "n = {n}");
        }
        assert!((pairing_closed_form(100_000) - 3f64.sqrt() / 2.0).abs() < 1e-4);
    }

    #[test]
    fn pairing_numeric_examples() {
        let rep = free_truncated_rep(5).unwrap();
        let target = 3f64.sqrt() / 2.0 * 0.75;
        assert!((pairing_numeric(Letter::A, 4, &rep).unwrap() - target).abs() < 1e-10);
        assert!((pairing_numeric(Letter::AInv, 4, &rep).unwrap() - target).abs() < 1e-10);
        assert!(pairing_numeric(Letter::B, 1, &rep).unwrap().abs() < 1e-15);
        assert!(matches!(pairing_numeric(Letter::A, 5, &rep), Err(QdError::RadiusTooSmall { .. })));
    }

    #[test]
    fn rank_one_examples() {
        let rep = free_truncated_rep(9).unwrap();
        let mut delta = vec![Complex64::new(0.0, 0.0); rep.dim()];
        delta[0] = Complex64::new(1.0, 0.0);
        assert!((rank_one_commutator_norm(&rep, &w("a"), &delta).unwrap() - 1.0).abs() < 1e-15);
        let id = SparseOperator::identity(3);
        let fixed = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8), Complex64::new(0.0, 0.0)];
        assert!(rank_one_value(&id, &fixed).unwrap().abs() < 1e-7);
        let xi8 = xi_vector(8, rep.ball()).unwrap();
        let v = rank_one_commutator_norm(&rep, &w("a"), &xi8.vector).unwrap();
        assert!((v - sharp_commutator_closed_form(8)).abs() < 1e-10);
        assert!((v - 0.65252).abs() < 5e-5);
        let half: Vec<Complex64> = delta.iter().map(|x| x * 0.5).collect();
        assert!(matches!(rank_one_commutator_norm(&rep, &w("a"), &half), Err(QdError::NotUnit(_))));
    }

    #[test]
    fn sharp_values_decrease_to_one_half() {
        let vals: Vec<f64> = (1..=300).map(sharp_commutator_closed_form).collect();
        assert!(vals.windows(2).all(|p| p[1] < p[0]));
        assert!(vals.iter().all(|&v| v > 0.5));
        assert!((sharp_commutator_closed_form(3) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(sharp_commutator_closed_form(150) <= 0.51);
        assert!((sharp_commutator_closed_form(10_000_000) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn xi_commutator_matches_general_route() {
        let rep = free_truncated_rep(4).unwrap();
        let xi3 = xi_vector(3, rep.ball()).unwrap();
        let p = FiniteProjection::from_frame(rep.ball(), vec![xi3.vector.clone()]).unwrap();
        let v = commutator_norm(&rep, &w("a"), &p, regrep::DEFAULT_TOL).unwrap().value;
        assert!((v - (2.0f64 / 3.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn standard_certificate_memberships() {
        let c = f2_standard_certificate();
        let (x1, x2) = (&c.x_pieces()[0], &c.x_pieces()[1]);
        assert!((x1.contains)(&FreeWord::identity()));
        assert!((x1.contains)(&w("AAA")));
        assert!((x2.contains)(&w("Ab")));
        assert!(!(x2.contains)(&w("A")));
        let ball = crate::cayley::free_ball(4).unwrap();
        assert_eq!(ball.len(), 161);
        let total: usize = c
            .x_pieces()
            .iter()
            .chain(c.y_pieces())
            .map(|p| ball.elements().iter().filter(|w| (p.contains)(w)).count())
            .sum();
        assert_eq!(total, 161);
    }

    #[test]
    fn standard_certificate_verifies() {
        let c = f2_standard_certificate();
        for r in 0..=8 {
            let rep = c.verify(r).unwrap();
            assert!(rep.passed(), "radius {r}: {:?}", rep.violations.first());
        }
        assert_eq!(c.verify(0).unwrap().checked, 1);
        let lb = cf_lower_bound(&c.verified(6).unwrap()).unwrap();
        assert_eq!(lb.bound, Ratio::new(1, 2));
        assert_eq!(lb.pieces, 4);
        assert_eq!(lb.finite_set, vec![FreeWord::identity(), w("a"), w("b")]);
    }

    #[test]
    fn broken_certificate_reports_identity() {
        let std = f2_standard_certificate();
        let x1 = Piece::new("X1", FreeWord::identity(), |w| {
            w.first() == Some(Letter::A) || w.power_of(Letter::AInv).is_some()
        });
        let broken = ParadoxicalCertificate::new(vec![x1, std.x_pieces()[1].clone()], std.y_pieces().to_vec()).unwrap();
        let report = broken.verify(3).unwrap();
        assert!(!report.passed());
        assert_eq!(report.violations[0].witness, FreeWord::identity());
        assert!(matches!(broken.verified(6), Err(QdError::Unverified { .. })));
        assert!(matches!(std.verified(2), Err(QdError::VerificationRadius { .. })));
    }

    #[test]
    fn five_piece_certificate_gives_one_third() {
        let c = f2_split_certificate();
        assert!(c.verify(7).unwrap().passed());
        let lb = cf_lower_bound(&c.verified(6).unwrap()).unwrap();
        assert_eq!(lb.bound, Ratio::new(1, 3));
    }

    #[test]
    fn trace_lemma_examples() {
        let d = |v: &[f64]| {
            DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                v.len(),
                v.iter().map(|&x| Complex64::new(x, 0.0)),
            ))
        };
        let out = trace_lemma_check(&d(&[1.0, -1.0]), &d(&[1.0, 0.0])).unwrap();
        assert_eq!(out.lhs, 1.0);
        assert_eq!(out.bound, 1.0);
        assert!(out.ok);
        let zero = trace_lemma_check(&d(&[0.0, 0.0, 0.0]), &d(&[0.3, 0.2, 1.0])).unwrap();
        assert_eq!(zero.lhs, 0.0);
        assert!(zero.ok);
        assert!(matches!(trace_lemma_check(&d(&[1.0, 0.0]), &d(&[1.0, 0.0])), Err(QdError::Precondition(_))));
        assert!(matches!(trace_lemma_check(&d(&[1.0, -1.0]), &d(&[2.0, 0.0])), Err(QdError::Precondition(_))));
    }

    #[test]
    fn trace_lemma_random_trials() {
        let s = trace_lemma_trials(300, 3, 40).unwrap();
        assert_eq!(s.violations, 0);
        assert!(s.max_ratio <= 1.0 + 1e-9);
        assert_eq!(s, trace_lemma_trials(300, 3, 40).unwrap());
    }

    #[test]
    fn audit_examples() {
        let rep = free_truncated_rep(9).unwrap();
        let cert = f2_standard_certificate();
        let v = cert.verified(6).unwrap();
        let p = FiniteProjection::delta(rep.ball(), 0).unwrap();
        let rec = qrosenberg_audit(&p, &v, &rep).unwrap();
        assert!((rec.epsilon - 1.0).abs() < 1e-10);
        assert!(rec.holds());
        let xi = xi_vector(8, rep.ball()).unwrap();
        let p = FiniteProjection::from_frame(rep.ball(), vec![xi.vector]).unwrap();
        let rec = qrosenberg_audit(&p, &v, &rep).unwrap();
        assert!((rec.epsilon - sharp_commutator_closed_form(8)).abs() < 1e-9);
        assert!(rec.holds(), "{rec:?}");
        assert_eq!(rec.translator_norms[0], (FreeWord::identity(), 0.0));
    }

    #[test]
    fn random_audit_small() {
        let s = random_audit(30, 5, 5, 4).unwrap();
        assert_eq!(s.inequality_violations, 0);
        assert!(s.min_epsilon >= 0.5 - 1e-9);
        assert!(s.min_slack >= -AUDIT_SLACK);
    }

    /// Largest value of `Σ β_iβ_{i+1}` over unit `β ∈ ℝ^d` is half the top
    /// eigenvalue of the path graph, `cos(π/(d+1))`.
    fn radial_optimum(d: usize) -> f64 {
        let c = (std::f64::consts::PI / (d as f64 + 1.0)).cos();
        (1.0 - 0.75 * c * c).sqrt()
    }

    #[test]
    fn upper_search_against_path_graph_optimum() {
        let rep = free_truncated_rep(9).unwrap();
        let f = [w("a"), w("b")];
        assert!(matches!(cf_upper_search(9, Some(&rep), &f), Err(QdError::ProfileTooLarge { .. })));
        let one = cf_upper_search(1, Some(&rep), &f).unwrap();
        assert!((one.best_value - 1.0).abs() < 1e-15);
        for d in [2usize, 5, 8] {
            let s = cf_upper_search(d, Some(&rep), &f).unwrap();
            assert!(s.converged);
            assert!(s.best_value <= sharp_commutator_closed_form(d) + 1e-15);
            assert!(s.best_value >= radial_optimum(d) - 1e-12);
            assert!(s.best_value - radial_optimum(d) < 1e-6, "d = {d}: {} vs {}", s.best_value, radial_optimum(d));
            assert!((s.numeric_value.unwrap() - s.best_value).abs() < 1e-9);
        }
        let twenty = cf_upper_search(20, None, &f).unwrap();
        assert!(twenty.converged);
        assert!(twenty.best_value <= 0.52);
        assert!(twenty.best_value - radial_optimum(20) < 1e-6);
        assert_eq!(twenty.numeric_value, None);
    }
}
