//! Finite-quotient witnesses for residually finite groups.
//!
//! The MF pipeline walks a modulus schedule. At stage `n` the group is
//! reduced modulo `m_n`, a character (or a few) of the image `Z_n` of the
//! central subgroup is chosen to approximate `η_n = ω_1 ⊕ ⋯ ⊕ ω_n` on the
//! finite set `F_n`, and `σ_n` is the representation induced from it and
//! pulled back to the group. Probe elements are then classified by their
//! norm trajectories `‖σ_n(x) − 1‖`.
//!
//! The LEF part finds a congruence quotient of `SL₂(ℤ)` injective on a finite
//! subset of the free group and turns it into √2-separated unitaries.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::finrep::{
    check_homomorphism, direct_sum, induce_central, CentralCharacter, FinRepError, InducedRep, MonomialMatrix, Phase,
    RegularRep, UnitaryRep,
};
use crate::groups::{
    enumerate_closure, AbelsElement, AbelsGroup, CongruenceQuotient, FreeWord, Group, GroupError, HeisenbergElement,
    Letter, Membership, ModMat, ModMatGroup, PAdicLaurent,
};

/// Cap on the dimension of `σ_n`.
pub const DEFAULT_DIM_CAP: usize = 100_000;
/// Slack on the `1/n` bound for probes in `N`.
pub const N_SLACK: f64 = 1e-9;
const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MfError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Rep(#[from] FinRepError),
    #[error("at least {need} stages are required, got {got}")]
    TooFewStages { need: usize, got: usize },
    #[error("{stages} stages requested but only {moduli} moduli given")]
    ScheduleTooShort { stages: usize, moduli: usize },
    #[error("probe {0} is not covered by F_n at any computed stage")]
    ProbeNotCovered(String),
    #[error("quotient mod {modulus} has {got} elements, expected {expected}")]
    QuotientOrder { modulus: u64, got: usize, expected: u64 },
    #[error("image of the centre mod {0} is not in Z_n")]
    CenterImage(u64),
    #[error("no modulus in the schedule is injective on F")]
    ScheduleExhausted,
    #[error("witness is undefined on the product {0}")]
    MissingProduct(String),
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("witness file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Characters `ω_a(z) = e^{2πi a z}` of the centre, read through its rational
/// coordinate `z`; all of them are trivial on `N = ℤ`. The trivial schedule is
/// used when `N` is the whole centre.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CharacterSchedule {
    Trivial,
    Dual,
}

impl CharacterSchedule {
    /// `ω_i(z)` for the `i`-th character (1-based).
    pub fn eval(&self, i: i64, z: Ratio<i64>) -> Phase {
        match self {
            CharacterSchedule::Trivial => Phase::one(),
            CharacterSchedule::Dual => {
                let q = z * Ratio::from_integer(i);
                Phase::from_turns(*q.numer(), *q.denom())
            }
        }
    }
}

/// A probe with its label.
#[derive(Clone, Debug)]
pub struct Probe<E> {
    pub label: String,
    pub element: E,
}

/// A residually finite group with a central subgroup `Z ⊇ N`, reduced through
/// a family of matrix congruence quotients in which the image of `Z` is the
/// cyclic group of one corner coordinate.
pub trait RfInstance<const N: usize> {
    type Elem: Clone + fmt::Debug;

    fn name(&self) -> String;
    /// `|Γ_m|`, known in closed form.
    fn quotient_order(&self, m: u64) -> Result<u64, MfError>;
    /// The quotient group and the images of the generators.
    fn quotient(&self, m: u64) -> Result<(ModMatGroup<N>, Vec<ModMat<N>>), MfError>;
    fn reduce(&self, m: u64, x: &Self::Elem) -> Result<ModMat<N>, MfError>;
    /// The corner matrix with coordinate `c`.
    fn center_element(&self, m: u64, c: u64) -> ModMat<N>;
    /// `Some(c)` if the reduced matrix is the corner matrix with coordinate `c`.
    fn quotient_center_coordinate(&self, qx: &ModMat<N>) -> Option<u64>;
    fn membership(&self, x: &Self::Elem) -> Membership;
    /// Rational coordinate of a central element.
    fn center_value(&self, x: &Self::Elem) -> Option<Ratio<i64>>;
    /// `F_n`, a finite subset of the centre, increasing in `n`.
    fn exhaustion(&self, n: usize) -> Vec<Self::Elem>;
    fn in_exhaustion(&self, x: &Self::Elem, n: usize) -> bool;
    fn schedule(&self) -> CharacterSchedule;
    fn default_moduli(&self) -> Vec<u64>;
    fn default_probes(&self) -> Vec<Probe<Self::Elem>>;
    fn format(&self, x: &Self::Elem) -> String;
}

/// Abels' group over `ℤ[1/p]` with `Z` = the corner `x₁₄ ∈ ℤ[1/p]` and
/// `N` = integer corners.
#[derive(Clone, Copy, Debug)]
pub struct AbelsInstance {
    pub p: u64,
}

fn multiplicative_order(p: u64, m: u64) -> u64 {
    let mut x = p % m;
    let mut k = 1;
    while x != 1 {
        x = x * p % m;
        k += 1;
    }
    k
}

impl RfInstance<4> for AbelsInstance {
    type Elem = AbelsElement;

    fn name(&self) -> String {
        format!("abels(p={})", self.p)
    }

    fn quotient_order(&self, m: u64) -> Result<u64, MfError> {
        CongruenceQuotient::new(m, self.p)?;
        let r = multiplicative_order(self.p, m);
        Ok(r * r * m.pow(6))
    }

    fn quotient(&self, m: u64) -> Result<(ModMatGroup<4>, Vec<ModMat<4>>), MfError> {
        let q = CongruenceQuotient::new(m, self.p)?;
        let gens = AbelsGroup::new(self.p).generators().iter().map(|g| q.reduce(g)).collect::<Result<_, _>>()?;
        Ok((*q.group(), gens))
    }

    fn reduce(&self, m: u64, x: &AbelsElement) -> Result<ModMat<4>, MfError> {
        Ok(CongruenceQuotient::new(m, self.p)?.reduce(x)?)
    }

    fn center_element(&self, m: u64, c: u64) -> ModMat<4> {
        let mut out = [[0u32; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            row[i] = 1;
        }
        out[0][3] = (c % m) as u32;
        ModMat(out)
    }

    fn quotient_center_coordinate(&self, qx: &ModMat<4>) -> Option<u64> {
        let ok = (0..4).all(|i| {
            (0..4).all(|j| match (i, j) {
                (0, 3) => true,
                _ if i == j => qx.entry(i, j) == 1,
                _ => qx.entry(i, j) == 0,
            })
        });
        ok.then(|| qx.entry(0, 3) as u64)
    }

    fn membership(&self, x: &AbelsElement) -> Membership {
        x.center_membership()
    }

    fn center_value(&self, x: &AbelsElement) -> Option<Ratio<i64>> {
        if !x.in_center() {
            return None;
        }
        let (num, den) = x.x14.frac();
        Some(Ratio::new(num.to_i64()?, den.to_i64()?))
    }

    /// `u · p^(−k)` with `|u| ≤ n`, `0 ≤ k ≤ n`, deduplicated.
    fn exhaustion(&self, n: usize) -> Vec<AbelsElement> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for k in 0..=n as u32 {
            for u in -(n as i64)..=n as i64 {
                let x = PAdicLaurent::new(u, k, self.p);
                if seen.insert((x.mantissa().clone(), x.expo())) {
                    out.push(AbelsElement::corner(x));
                }
            }
        }
        out
    }

    fn in_exhaustion(&self, x: &AbelsElement, n: usize) -> bool {
        if !x.in_center() {
            return false;
        }
        // in normalized form the mantissa is minimal among representations
        let (u, k) = (x.x14.mantissa(), x.x14.expo());
        (k as usize) <= n && u.magnitude() <= &num_bigint::BigUint::from(n)
    }

    fn schedule(&self) -> CharacterSchedule {
        CharacterSchedule::Dual
    }

    fn default_moduli(&self) -> Vec<u64> {
        (0..4).map(|i| 3 + 2 * i).filter(|m| m % self.p != 0).collect()
    }

    fn default_probes(&self) -> Vec<Probe<AbelsElement>> {
        let p = self.p;
        vec![
            Probe { label: "x14=1".into(), element: AbelsElement::corner(PAdicLaurent::one(p)) },
            Probe { label: format!("x14=1/{p}"), element: AbelsElement::corner(PAdicLaurent::new(1, 1, p)) },
            Probe { label: "x23=1".into(), element: AbelsElement::elementary(2, 3, PAdicLaurent::one(p)) },
            Probe { label: "x12=1".into(), element: AbelsElement::elementary(1, 2, PAdicLaurent::one(p)) },
            Probe { label: format!("diag(1,{p},1,1)"), element: AbelsElement::diagonal(p, 1, 0) },
        ]
    }

    fn format(&self, x: &AbelsElement) -> String {
        crate::groups::serial::format_abels(x)
    }
}

/// The integer Heisenberg group with `Z = N` = the centre `{(0,0,c)}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct HeisenbergInstance;

impl RfInstance<3> for HeisenbergInstance {
    type Elem = HeisenbergElement;

    fn name(&self) -> String {
        "heisenberg".into()
    }

    fn quotient_order(&self, m: u64) -> Result<u64, MfError> {
        ModMatGroup::<3>::new(m)?;
        Ok(m.pow(3))
    }

    fn quotient(&self, m: u64) -> Result<(ModMatGroup<3>, Vec<ModMat<3>>), MfError> {
        let g = ModMatGroup::<3>::new(m)?;
        let gens = vec![g.from_ints([[1, 1, 0], [0, 1, 0], [0, 0, 1]]), g.from_ints([[1, 0, 0], [0, 1, 1], [0, 0, 1]])];
        Ok((g, gens))
    }

    fn reduce(&self, m: u64, x: &HeisenbergElement) -> Result<ModMat<3>, MfError> {
        Ok(ModMatGroup::<3>::new(m)?.reduce_heisenberg(x))
    }

    fn center_element(&self, m: u64, c: u64) -> ModMat<3> {
        ModMatGroup::<3>::new(m).expect("valid modulus").from_ints([[1, 0, c as i64], [0, 1, 0], [0, 0, 1]])
    }

    fn quotient_center_coordinate(&self, qx: &ModMat<3>) -> Option<u64> {
        (qx.entry(0, 1) == 0 && qx.entry(1, 2) == 0).then(|| qx.entry(0, 2) as u64)
    }

    fn membership(&self, x: &HeisenbergElement) -> Membership {
        x.center_membership()
    }

    fn center_value(&self, x: &HeisenbergElement) -> Option<Ratio<i64>> {
        (x.a == 0 && x.b == 0).then(|| Ratio::from_integer(x.c))
    }

    fn exhaustion(&self, n: usize) -> Vec<HeisenbergElement> {
        (-(n as i64)..=n as i64).map(|c| HeisenbergElement::new(0, 0, c)).collect()
    }

    fn in_exhaustion(&self, x: &HeisenbergElement, n: usize) -> bool {
        x.a == 0 && x.b == 0 && x.c.unsigned_abs() as usize <= n
    }

    fn schedule(&self) -> CharacterSchedule {
        CharacterSchedule::Trivial
    }

    fn default_moduli(&self) -> Vec<u64> {
        vec![3, 9, 27]
    }

    fn default_probes(&self) -> Vec<Probe<HeisenbergElement>> {
        [
            ("z=(0,0,1)", (0, 0, 1)),
            ("x=(1,0,0)", (1, 0, 0)),
            ("y=(0,1,0)", (0, 1, 0)),
            ("x^3", (3, 0, 0)),
            ("xy", (1, 1, 0)),
        ]
        .into_iter()
        .map(|(l, (a, b, c))| Probe { label: l.into(), element: HeisenbergElement::new(a, b, c) })
        .collect()
    }

    fn format(&self, x: &HeisenbergElement) -> String {
        crate::groups::serial::format_heisenberg(x)
    }
}

/// Character `χ_j(c) = e^{2πi j c / m}` of `Z_n ≅ ℤ/m` chosen for `ω_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChosenCharacter {
    pub omega: i64,
    pub j: u64,
    /// `max_{x∈F_n} |χ_j(π_n x) − ω_i(x)|`.
    pub discrepancy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaChoice {
    pub modulus: u64,
    pub tolerance: f64,
    /// Characters for the longest prefix `ω_1..ω_k` that the quotient supports.
    pub characters: Vec<ChosenCharacter>,
    /// The first unsupported `ω_i` with its best achievable discrepancy.
    pub failure: Option<ChosenCharacter>,
}

impl GammaChoice {
    /// Distinct `j` values; these index the blocks of `σ_n` (trivial block if
    /// no character is supported).
    pub fn blocks(&self) -> Vec<u64> {
        let mut js: Vec<u64> = self.characters.iter().map(|c| c.j).collect();
        js.sort_unstable();
        js.dedup();
        if js.is_empty() {
            js.push(0);
        }
        js
    }
}

/// Exhaustive search over the dual of `Z_n ≅ ℤ/m` for characters within
/// `1/n` of `ω_1, …, ω_n` on `F_n` (strict inequality).
pub fn choose_gamma<const N: usize, I: RfInstance<N>>(inst: &I, n: usize, m: u64) -> Result<GammaChoice, MfError> {
    let tolerance = 1.0 / n as f64;
    let mut points = Vec::new();
    for x in inst.exhaustion(n) {
        let z = inst.center_value(&x).ok_or(MfError::CenterImage(m))?;
        let c = inst.quotient_center_coordinate(&inst.reduce(m, &x)?).ok_or(MfError::CenterImage(m))?;
        points.push((z, c));
    }
    let schedule = inst.schedule();
    let mut characters = Vec::new();
    let mut failure = None;
    for i in 1..=n as i64 {
        let mut best: Option<(Ratio<i64>, u64)> = None;
        for j in 0..m {
            let worst = points
                .iter()
                .map(|&(z, c)| {
                    let chi = Phase::from_turns((j * c) as i64, m as i64);
                    chi.mul(&schedule.eval(i, z).conj()).turns()
                })
                .map(distance_to_integer)
                .max()
                .unwrap_or_else(Ratio::zero);
            if best.is_none_or(|(b, _)| worst < b) {
                best = Some((worst, j));
            }
        }
        let (d, j) = best.expect("m >= 2");
        let chosen = ChosenCharacter { omega: i, j, discrepancy: chord(d) };
        if chosen.discrepancy < tolerance {
            characters.push(chosen);
        } else {
            failure = Some(chosen);
            break;
        }
    }
    Ok(GammaChoice { modulus: m, tolerance, characters, failure })
}

fn distance_to_integer(q: Ratio<i64>) -> Ratio<i64> {
    let f = q - q.floor();
    f.min(Ratio::from_integer(1) - f)
}

fn chord(d: Ratio<i64>) -> f64 {
    2.0 * (std::f64::consts::PI * d.to_f64().unwrap_or(0.0)).sin()
}

/// `σ_n` at one stage, as a direct sum of induced representations of the
/// finite quotient.
pub struct Sigma<const N: usize> {
    pub modulus: u64,
    pub rep: crate::finrep::DirectSum<InducedRep<ModMatGroup<N>>>,
    pub characters: Vec<u64>,
}

impl<const N: usize> Sigma<N> {
    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    /// `σ_n(x) = ⊕_j Ind χ_j (π_n x)`.
    pub fn eval<I: RfInstance<N>>(&self, inst: &I, x: &I::Elem) -> Result<MonomialMatrix, MfError> {
        Ok(self.rep.eval(&inst.reduce(self.modulus, x)?)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StageStatus {
    Complete,
    Skipped { reason: String },
}

/// Builds `σ_n` for the given characters, or reports the stage as skipped
/// if its dimension would exceed `dim_cap`.
pub fn build_sigma<const N: usize, I: RfInstance<N>>(
    inst: &I,
    m: u64,
    characters: &[u64],
    dim_cap: usize,
) -> Result<Result<Sigma<N>, String>, MfError> {
    let order = inst.quotient_order(m)?;
    let index = order / m;
    let dim = index.saturating_mul(characters.len() as u64);
    if dim > dim_cap as u64 {
        return Ok(Err(format!("dimension {dim} exceeds the cap {dim_cap}")));
    }
    let (group, gens) = inst.quotient(m)?;
    let elements = enumerate_closure(&group, &gens, order as usize + 1)?;
    if elements.len() as u64 != order {
        return Err(MfError::QuotientOrder { modulus: m, got: elements.len(), expected: order });
    }
    let center: Vec<ModMat<N>> = (0..m).map(|c| inst.center_element(m, c)).collect();
    let mut blocks = Vec::new();
    let mut transversal: Option<Vec<ModMat<N>>> = None;
    for &j in characters {
        let values = center.iter().enumerate().map(|(c, z)| (*z, Phase::from_turns((j * c as u64) as i64, m as i64)));
        let chi = CentralCharacter::new(&group, values.collect())?;
        let rep = induce_central(group, &elements, chi, transversal.clone())?;
        transversal.get_or_insert_with(|| rep.transversal().to_vec());
        blocks.push(rep);
    }
    Ok(Ok(Sigma { modulus: m, rep: direct_sum(blocks)?, characters: characters.to_vec() }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageRecord {
    pub n: usize,
    pub modulus: u64,
    pub index: u64,
    pub dim: Option<usize>,
    pub status: StageStatus,
    pub gamma: GammaChoice,
    /// `σ_n(st) = σ_n(s)σ_n(t)` on generator pairs and `σ_n(e) = 1`.
    pub homomorphism_ok: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeClass {
    InN,
    CenterNotN,
    OffCenter,
}

/// What a stage asserts about a probe.
#[derive(Clone, Debug, PartialEq)]
pub enum Claim {
    /// `‖σ_n(x) − 1‖ ≤ 1/n + slack`.
    NBound(f64),
    /// `‖σ_n(x) − 1‖ ≥ √2 − slack`.
    Separated,
    /// `‖σ_n(x) − 1‖ ≥ max_i |ω_i(x) − 1| − 1/n` for the supported `ω_i`.
    LowerBound(f64),
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeStage {
    pub n: usize,
    pub norm: Option<f64>,
    pub image_in_zn: bool,
    pub in_exhaustion: bool,
    pub claim: Claim,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeTrajectory {
    pub label: String,
    pub element: String,
    pub class: ProbeClass,
    pub stages: Vec<ProbeStage>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MfReport {
    pub instance: String,
    pub moduli: Vec<u64>,
    /// Whether each modulus divides the next, so the kernels decrease.
    pub nested: bool,
    pub dim_cap: usize,
    pub stages: Vec<StageRecord>,
    pub probes: Vec<ProbeTrajectory>,
}

impl MfReport {
    pub fn completed_stages(&self) -> usize {
        self.stages.iter().filter(|s| s.status == StageStatus::Complete).count()
    }

    pub fn ok(&self) -> bool {
        self.probes.iter().all(|p| p.stages.iter().all(|s| s.ok))
            && self.stages.iter().all(|s| s.homomorphism_ok != Some(false))
    }
}

#[derive(Clone, Debug)]
pub struct MfConfig {
    pub moduli: Vec<u64>,
    pub stages: usize,
    pub dim_cap: usize,
}

/// Runs all stages and classifies the probes. Needs at least three stages.
pub fn separation_report<const N: usize, I: RfInstance<N>>(
    inst: &I,
    config: &MfConfig,
    probes: &[Probe<I::Elem>],
) -> Result<MfReport, MfError> {
    if config.stages < 3 {
        return Err(MfError::TooFewStages { need: 3, got: config.stages });
    }
    if config.moduli.len() < config.stages {
        return Err(MfError::ScheduleTooShort { stages: config.stages, moduli: config.moduli.len() });
    }
    let moduli = config.moduli[..config.stages].to_vec();
    let nested = moduli.windows(2).all(|w| w[1] % w[0] == 0);
    let schedule = inst.schedule();
    let classes: Vec<ProbeClass> = probes
        .iter()
        .map(|p| {
            let mem = inst.membership(&p.element);
            match (mem.in_center, mem.in_n) {
                (_, true) => ProbeClass::InN,
                (true, false) => ProbeClass::CenterNotN,
                _ => ProbeClass::OffCenter,
            }
        })
        .collect();
    let mut trajectories: Vec<ProbeTrajectory> = probes
        .iter()
        .zip(&classes)
        .map(|(p, &class)| ProbeTrajectory {
            label: p.label.clone(),
            element: inst.format(&p.element),
            class,
            stages: Vec::new(),
        })
        .collect();
    let mut stages = Vec::new();
    for (idx, &m) in moduli.iter().enumerate() {
        let n = idx + 1;
        let gamma = choose_gamma(inst, n, m)?;
        let blocks = gamma.blocks();
        let index = inst.quotient_order(m)? / m;
        let built = build_sigma(inst, m, &blocks, config.dim_cap)?;
        let (status, sigma) = match built {
            Ok(s) => (StageStatus::Complete, Some(s)),
            Err(reason) => (StageStatus::Skipped { reason }, None),
        };
        let homomorphism_ok = match &sigma {
            None => None,
            Some(s) => {
                let (group, gens) = inst.quotient(m)?;
                Some(check_homomorphism(&group, &s.rep, &gens)?.ok())
            }
        };
        for ((p, traj), &class) in probes.iter().zip(trajectories.iter_mut()).zip(&classes) {
            let qx = inst.reduce(m, &p.element)?;
            let coord = inst.quotient_center_coordinate(&qx);
            let in_ex = class != ProbeClass::OffCenter && inst.in_exhaustion(&p.element, n);
            let Some(sigma) = &sigma else {
                traj.stages.push(ProbeStage {
                    n,
                    norm: None,
                    image_in_zn: coord.is_some(),
                    in_exhaustion: in_ex,
                    claim: Claim::None,
                    ok: true,
                });
                continue;
            };
            let norm = sigma.eval(inst, &p.element)?.norm_minus_identity();
            let mut ok = true;
            if let Some(c) = coord {
                // central image: σ_n acts by the scalars χ_j(c), blockwise
                let scalar = blocks
                    .iter()
                    .map(|&j| Phase::from_turns((j * c) as i64, m as i64).chord_to_one())
                    .fold(0.0, f64::max);
                ok &= (scalar - norm).abs() <= 1e-12;
            }
            let claim = match class {
                ProbeClass::InN if in_ex => Claim::NBound(1.0 / n as f64),
                ProbeClass::CenterNotN if in_ex && !gamma.characters.is_empty() => {
                    let z = inst.center_value(&p.element).expect("central probe");
                    let eta =
                        gamma.characters.iter().map(|ch| schedule.eval(ch.omega, z).chord_to_one()).fold(0.0, f64::max);
                    Claim::LowerBound(eta - 1.0 / n as f64)
                }
                _ if coord.is_none() => Claim::Separated,
                _ => Claim::None,
            };
            ok &= match claim {
                Claim::NBound(b) => norm <= b + N_SLACK,
                Claim::Separated => norm >= SQRT2 - N_SLACK,
                Claim::LowerBound(b) => norm >= b - N_SLACK,
                Claim::None => true,
            };
            traj.stages.push(ProbeStage {
                n,
                norm: Some(norm),
                image_in_zn: coord.is_some(),
                in_exhaustion: in_ex,
                claim,
                ok,
            });
        }
        stages.push(StageRecord {
            n,
            modulus: m,
            index,
            dim: sigma.as_ref().map(|s| s.dim()),
            status,
            gamma,
            homomorphism_ok,
        });
    }
    for t in &trajectories {
        if t.class != ProbeClass::OffCenter && !t.stages.iter().any(|s| s.in_exhaustion) {
            return Err(MfError::ProbeNotCovered(t.label.clone()));
        }
    }
    Ok(MfReport { instance: inst.name(), moduli, nested, dim_cap: config.dim_cap, stages, probes: trajectories })
}

/// A map from a finite subset `F` of `F₂` into `SL₂(ℤ/m)`, given on
/// `F ∪ F·F`.
#[derive(Clone, Debug, PartialEq)]
pub struct LefWitness {
    pub modulus: u64,
    pub f: Vec<FreeWord>,
    pub phi: BTreeMap<FreeWord, ModMat<2>>,
}

/// Image under `a ↦ [[1,2],[0,1]]`, `b ↦ [[1,0],[2,1]]` reduced mod `m`.
pub fn sl2_image(group: &ModMatGroup<2>, w: &FreeWord) -> ModMat<2> {
    let a = group.from_ints([[1, 2], [0, 1]]);
    let b = group.from_ints([[1, 0], [2, 1]]);
    let (ai, bi) = (group.inv(&a), group.inv(&b));
    w.letters().iter().fold(group.identity(), |acc, l| {
        let g = match l {
            Letter::A => &a,
            Letter::B => &b,
            Letter::AInv => &ai,
            Letter::BInv => &bi,
        };
        group.mul(&acc, g)
    })
}

/// Default LEF modulus schedule `2, 3, …, 64`.
pub fn default_lef_moduli() -> Vec<u64> {
    (2..=64).collect()
}

/// The first modulus whose quotient map is injective on `F`.
pub fn lef_witness_search(f: &[FreeWord], moduli: &[u64]) -> Result<LefWitness, MfError> {
    for &m in moduli {
        let group = ModMatGroup::<2>::new(m)?;
        let mut images = HashMap::new();
        if f.iter().all(|w| images.insert(sl2_image(&group, w), ()).is_none()) {
            let mut phi = BTreeMap::new();
            for s in f {
                for t in f {
                    for w in [s.clone(), t.clone(), s.mul(t)] {
                        phi.entry(w).or_insert_with_key(|w| sl2_image(&group, w));
                    }
                }
            }
            return Ok(LefWitness { modulus: m, f: f.to_vec(), phi });
        }
    }
    Err(MfError::ScheduleExhausted)
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct LefReport {
    /// Pairs `s ≠ t` in `F` with `φ(s) = φ(t)`.
    pub injectivity: Vec<(FreeWord, FreeWord)>,
    /// Pairs `(s, t)` with `φ(st) ≠ φ(s)φ(t)`.
    pub multiplicativity: Vec<(FreeWord, FreeWord)>,
}

impl LefReport {
    pub fn ok(&self) -> bool {
        self.injectivity.is_empty() && self.multiplicativity.is_empty()
    }
}

pub fn verify_lef_witness(w: &LefWitness) -> Result<LefReport, MfError> {
    let group = ModMatGroup::<2>::new(w.modulus)?;
    let get = |x: &FreeWord| w.phi.get(x).ok_or_else(|| MfError::MissingProduct(x.to_string()));
    let mut report = LefReport::default();
    for (i, s) in w.f.iter().enumerate() {
        for t in &w.f[i + 1..] {
            if s != t && get(s)? == get(t)? {
                report.injectivity.push((s.clone(), t.clone()));
            }
        }
    }
    for s in &w.f {
        for t in &w.f {
            if *get(&s.mul(t))? != group.mul(get(s)?, get(t)?) {
                report.multiplicativity.push((s.clone(), t.clone()));
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LefUnitaries {
    /// `|H|` for the image group `H`.
    pub dim: usize,
    /// `min_{s≠t∈F} ‖λ(φ(s)) − λ(φ(t))‖`, `+∞` if `|F| ≤ 1`.
    pub min_distance: f64,
    pub argmin: Option<(FreeWord, FreeWord)>,
}

/// `π = λ_H ∘ φ` with `H` the subgroup generated by the images of `a, b`.
pub fn lef_to_unitaries(w: &LefWitness) -> Result<LefUnitaries, MfError> {
    let report = verify_lef_witness(w)?;
    if !report.ok() {
        return Err(MfError::InvalidWitness(format!(
            "{} injectivity and {} multiplicativity violations",
            report.injectivity.len(),
            report.multiplicativity.len()
        )));
    }
    let group = ModMatGroup::<2>::new(w.modulus)?;
    let gens = [sl2_image(&group, &"a".parse().expect("letter")), sl2_image(&group, &"b".parse().expect("letter"))];
    let h = enumerate_closure(&group, &gens, 1 << 22)?;
    let rep = RegularRep::new(group, h);
    let mut best: Option<(f64, FreeWord, FreeWord)> = None;
    for (i, s) in w.f.iter().enumerate() {
        for t in &w.f[i + 1..] {
            let d = rep.eval(&group.mul(&group.inv(&w.phi[t]), &w.phi[s]))?.norm_minus_identity();
            if best.as_ref().is_none_or(|(b, _, _)| d < *b) {
                best = Some((d, s.clone(), t.clone()));
            }
        }
    }
    Ok(match best {
        None => LefUnitaries { dim: rep.dim(), min_distance: f64::INFINITY, argmin: None },
        Some((d, s, t)) => LefUnitaries { dim: rep.dim(), min_distance: d, argmin: Some((s, t)) },
    })
}

/// Witness file: a `modulus m` line, then one line per word
/// `F|P word m00 m01 m10 m11` (`F` for elements of `F`, `P` for products).
pub fn format_lef_witness(w: &LefWitness) -> String {
    let mut out = format!("# SL2 congruence witness\nmodulus {}\n", w.modulus);
    for (word, m) in &w.phi {
        let tag = if w.f.contains(word) { "F" } else { "P" };
        out.push_str(&format!("{tag} {word} {}\n", crate::groups::serial::format_modmat(m)));
    }
    out
}

pub fn parse_lef_witness(text: &str) -> Result<LefWitness, MfError> {
    let err = |line: usize, message: &str| MfError::Parse { line, message: message.to_string() };
    let mut modulus = None;
    let mut f = Vec::new();
    let mut phi = BTreeMap::new();
    for (line, body) in crate::groups::serial::content_lines(text) {
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks.as_slice() {
            ["modulus", m] => modulus = Some(m.parse::<u64>().map_err(|_| err(line, "bad modulus"))?),
            [tag @ ("F" | "P"), word, rest @ ..] if rest.len() == 4 => {
                let m = modulus.ok_or_else(|| err(line, "entry before modulus line"))?;
                let word: FreeWord = word.parse().map_err(|_| err(line, "bad word"))?;
                let v = rest
                    .iter()
                    .map(|t| t.parse::<u32>().ok().filter(|&x| (x as u64) < m))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| err(line, "bad matrix entry"))?;
                if *tag == "F" {
                    f.push(word.clone());
                }
                phi.insert(word, ModMat([[v[0], v[1]], [v[2], v[3]]]));
            }
            _ => return Err(err(line, "unrecognized line")),
        }
    }
    let modulus = modulus.ok_or_else(|| err(0, "missing modulus line"))?;
    ModMatGroup::<2>::new(modulus)?;
    f.sort();
    Ok(LefWitness { modulus, f, phi })
}

/// `gcd`-based check that `p` is invertible mod every modulus.
pub fn coprime_schedule(p: u64, moduli: &[u64]) -> bool {
    moduli.iter().all(|m| m.gcd(&p) == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::free_ball;

    #[test]
    fn abels_quotient_orders() {
        let a = AbelsInstance { p: 2 };
        assert_eq!(a.quotient_order(3).unwrap(), 4 * 729);
        assert_eq!(a.quotient_order(5).unwrap() / 5, 50_000);
        assert_eq!(a.quotient_order(7).unwrap() / 7, 151_263);
        assert!(a.quotient_order(4).is_err());
        let (g, gens) = a.quotient(3).unwrap();
        assert_eq!(enumerate_closure(&g, &gens, 10_000).unwrap().len(), 2916);
        assert!(coprime_schedule(2, &a.default_moduli()));
        assert_eq!(a.default_moduli(), vec![3, 5, 7, 9]);
    }

    #[test]
    fn abels_exhaustion() {
        let a = AbelsInstance { p: 2 };
        let f1 = a.exhaustion(1);
        // 0, ±1, ±1/2
        assert_eq!(f1.len(), 5);
        assert!(f1.iter().all(|x| a.in_exhaustion(x, 1)));
        assert!(!a.in_exhaustion(&AbelsElement::corner(PAdicLaurent::new(3, 0, 2)), 2));
        assert!(a.exhaustion(2).len() > f1.len());
        for x in a.exhaustion(3) {
            assert!(a.quotient_center_coordinate(&a.reduce(5, &x).unwrap()).is_some());
        }
    }

    #[test]
    fn character_schedule_values() {
        let s = CharacterSchedule::Dual;
        assert_eq!(s.eval(1, Ratio::new(1, 2)), Phase::from_turns(1, 2));
        assert_eq!(s.eval(3, Ratio::from_integer(7)), Phase::one());
        assert_eq!(CharacterSchedule::Trivial.eval(5, Ratio::new(1, 4)), Phase::one());
    }

    #[test]
    fn choose_gamma_examples() {
        let a = AbelsInstance { p: 2 };
        let g3 = choose_gamma(&a, 1, 3).unwrap();
        assert!(g3.characters.is_empty());
        let fail = g3.failure.unwrap();
        assert_eq!(fail.omega, 1);
        assert!((fail.discrepancy - 3f64.sqrt()).abs() < 1e-12, "{}", fail.discrepancy);
        // ℤ/7: 2·4 ≡ 1, χ_1(1/2) = e^{2πi·4/7} is within 1 of −1 on F_1
        let g7 = choose_gamma(&a, 1, 7).unwrap();
        assert_eq!(g7.characters.len(), 1);
        assert!(g7.characters[0].discrepancy < 1.0);
        let h = choose_gamma(&HeisenbergInstance, 3, 9).unwrap();
        assert_eq!(h.blocks(), vec![0]);
        assert!(h.characters.iter().all(|c| c.discrepancy == 0.0));
        assert_eq!(h.characters.len(), 3);
    }

    #[test]
    fn sigma_heisenberg_mod3() {
        let sigma = build_sigma(&HeisenbergInstance, 3, &[1], DEFAULT_DIM_CAP).unwrap().unwrap();
        assert_eq!(sigma.dim(), 9);
        let e = HeisenbergElement::new(0, 0, 0);
        assert!(sigma.eval(&HeisenbergInstance, &e).unwrap().is_identity());
        let z = sigma.eval(&HeisenbergInstance, &HeisenbergElement::new(0, 0, 1)).unwrap();
        assert_eq!(z.as_scalar(), Some(Phase::from_turns(1, 3)));
        let triv = build_sigma(&HeisenbergInstance, 3, &[0], DEFAULT_DIM_CAP).unwrap().unwrap();
        for (a, b, c) in [(0, 0, 1), (1, 0, 0), (0, 1, 2), (1, 1, 1)] {
            let v = triv.eval(&HeisenbergInstance, &HeisenbergElement::new(a, b, c)).unwrap().norm_minus_identity();
            assert!(v == 0.0 || v >= SQRT2 - 1e-12);
        }
        let skipped = build_sigma(&AbelsInstance { p: 2 }, 7, &[0], DEFAULT_DIM_CAP).unwrap();
        assert!(skipped.is_err());
    }

    #[test]
    fn heisenberg_pipeline() {
        let inst = HeisenbergInstance;
        let config = MfConfig { moduli: inst.default_moduli(), stages: 3, dim_cap: DEFAULT_DIM_CAP };
        let report = separation_report(&inst, &config, &inst.default_probes()).unwrap();
        assert!(report.nested);
        assert_eq!(report.completed_stages(), 3);
        assert!(report.ok(), "{report:#?}");
        let x3 = report.probes.iter().find(|p| p.label == "x^3").unwrap();
        assert_eq!(x3.stages[0].norm, Some(0.0));
        assert!(x3.stages[1].norm.unwrap() >= SQRT2 - 1e-9);
        assert!(matches!(
            separation_report(&inst, &MfConfig { stages: 2, ..config.clone() }, &[]),
            Err(MfError::TooFewStages { .. })
        ));
        let far = Probe { label: "far".into(), element: HeisenbergElement::new(0, 0, 50) };
        assert!(matches!(separation_report(&inst, &config, &[far]), Err(MfError::ProbeNotCovered(_))));
    }

    #[test]
    fn lef_examples() {
        let b1 = free_ball(1).unwrap().elements().to_vec();
        let w = lef_witness_search(&b1, &[5]).unwrap();
        assert_eq!(w.modulus, 5);
        assert!(verify_lef_witness(&w).unwrap().ok());
        let u = lef_to_unitaries(&w).unwrap();
        assert_eq!(u.dim, 120);
        assert!(u.min_distance >= SQRT2 - 1e-12);
        let e = lef_witness_search(&[FreeWord::identity()], &[7, 3]).unwrap();
        assert_eq!(e.modulus, 7);
        assert_eq!(lef_to_unitaries(&e).unwrap().min_distance, f64::INFINITY);
        assert!(matches!(lef_witness_search(&b1, &[2]), Err(MfError::ScheduleExhausted)));
    }

    #[test]
    fn lef_b2_first_modulus() {
        let b2 = free_ball(2).unwrap().elements().to_vec();
        let w = lef_witness_search(&b2, &default_lef_moduli()).unwrap();
        let group = ModMatGroup::<2>::new(w.modulus).unwrap();
        for m in 2..w.modulus {
            let g = ModMatGroup::<2>::new(m).unwrap();
            let imgs: std::collections::HashSet<_> = b2.iter().map(|x| sl2_image(&g, x)).collect();
            assert!(imgs.len() < 17, "modulus {m} already separates");
        }
        let imgs: std::collections::HashSet<_> = b2.iter().map(|x| sl2_image(&group, x)).collect();
        assert_eq!(imgs.len(), 17);
        assert_eq!(w.modulus, 5);
        assert!(lef_to_unitaries(&w).unwrap().min_distance >= SQRT2 - 1e-12);
    }

    #[test]
    fn tampered_witnesses() {
        let b1 = free_ball(1).unwrap().elements().to_vec();
        let w = lef_witness_search(&b1, &[5]).unwrap();
        let mut merged = w.clone();
        let img_a = merged.phi[&"a".parse::<FreeWord>().unwrap()];
        merged.phi.insert("b".parse().unwrap(), img_a);
        let r = verify_lef_witness(&merged).unwrap();
        assert!(!r.injectivity.is_empty());
        assert!(lef_to_unitaries(&merged).is_err());
        let mut perturbed = w.clone();
        perturbed.phi.insert("aa".parse().unwrap(), ModMat([[1, 0], [0, 1]]));
        let r = verify_lef_witness(&perturbed).unwrap();
        assert!(r.injectivity.is_empty());
        assert_eq!(r.multiplicativity, vec![("a".parse().unwrap(), "a".parse().unwrap())]);
        let mut missing = w;
        missing.phi.remove(&"ab".parse::<FreeWord>().unwrap());
        assert!(matches!(verify_lef_witness(&missing), Err(MfError::MissingProduct(_))));
    }

    #[test]
    fn witness_file_round_trip() {
        let b1 = free_ball(1).unwrap().elements().to_vec();
        let w = lef_witness_search(&b1, &[5]).unwrap();
        let text = format_lef_witness(&w);
        let mut back = parse_lef_witness(&text).unwrap();
        let mut f = w.f.clone();
        f.sort();
        back.f.sort();
        assert_eq!(back.f, f);
        assert_eq!(back.phi, w.phi);
        assert!(parse_lef_witness("modulus 5\nF a 1 2 0\n").is_err());
    }
}
