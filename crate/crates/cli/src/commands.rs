use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

use qdcert::cayley::{first_letter_partition, free_ball};
use qdcert::finrep::{
    center_of, check_homomorphism, check_induced_restriction, check_induced_separation, cyclic_generator,
    induce_central, CentralCharacter, UnitaryRep,
};
use qdcert::groups::{enumerate_closure, serial, FiniteGroup, FreeWord, Letter, ModMatGroup};
use qdcert::mflef::{
    self, AbelsInstance, Claim, HeisenbergInstance, MfConfig, MfReport, Probe, RfInstance, StageStatus,
};
use qdcert::qdnum;
use qdcert::regrep::{self, FiniteProjection};

use crate::output::{num, num_text, opt_num, render_csv, render_json};
use crate::{CertificateKind, Cli, CliError, Command, Format, MfAction, MfInstance, Outcome, ParadoxAction};

type Res = Result<Outcome, CliError>;

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("reports are objects"),
    }
}

fn json_outcome(format: Format, body: Value, ok: bool) -> Res {
    if format == Format::Csv {
        return Err(usage("this subcommand only supports --format json"));
    }
    Ok(Outcome { body: render_json(obj(body)), status: if ok { 0 } else { 1 } })
}

/// Runs a parsed command line. The report is returned, not printed.
pub fn execute(cli: &Cli) -> Res {
    let f = cli.format;
    match &cli.command {
        Command::Spheres { radius } => spheres(f, *radius),
        Command::Xi { n, radius } => xi(f, *n, *radius),
        Command::Commutator { n, generator, radius, tol } => commutator(f, *n, generator, *radius, *tol),
        Command::Paradox { action: ParadoxAction::Verify { radius, certificate } } => paradox(f, *radius, *certificate),
        Command::CfLower { certificate, radius } => cf_lower(f, *certificate, *radius),
        Command::CfUpper { dim, radius } => cf_upper(f, *dim, *radius),
        Command::TraceLemma { trials, seed, max_dim } => trace_lemma(f, *trials, *seed, *max_dim),
        Command::QrAudit { trials, seed, max_rank, support } => qr_audit(f, *trials, *seed, *max_rank, *support),
        Command::Induce { group, subgroup, character } => induce(f, group, subgroup, *character),
        Command::Mf { action: MfAction::Run { instance, p, moduli, stages, probes, dim_cap } } => {
            mf(f, *instance, *p, moduli.clone(), *stages, probes.as_deref(), *dim_cap)
        }
        Command::Lef { instance, radius, moduli_schedule, witness_out } => {
            lef(f, instance, *radius, moduli_schedule.as_deref(), witness_out.as_deref())
        }
    }
}

fn spheres(f: Format, radius: usize) -> Res {
    let ball = free_ball(radius).map_err(usage)?;
    let mut rows = Vec::new();
    for n in 0..=radius {
        let class = if n == 0 { 0 } else { first_letter_partition(n).map_err(usage)?.class(Letter::A).len() };
        rows.push((n, ball.sphere(n).len(), class));
    }
    let ok = rows.iter().all(|&(n, s, c)| {
        if n == 0 {
            s == 1
        } else {
            s == 4 * 3usize.pow(n as u32 - 1) && c == 3usize.pow(n as u32 - 1)
        }
    });
    match f {
        Format::Csv => {
            let cells: Vec<Vec<String>> =
                rows.iter().map(|&(n, s, c)| vec![n.to_string(), s.to_string(), c.to_string()]).collect();
            Ok(Outcome {
                body: render_csv(&["n", "sphere_size", "first_letter_a"], &cells),
                status: if ok { 0 } else { 1 },
            })
        }
        Format::Json => {
            let list: Vec<Value> =
                rows.iter().map(|&(n, s, c)| json!({"n": n, "sphere_size": s, "first_letter_a": c})).collect();
            json_outcome(f, json!({"command": "spheres", "radius": radius, "spheres": list, "ok": ok}), ok)
        }
    }
}

fn xi(f: Format, n: usize, radius: Option<usize>) -> Res {
    let radius = radius.unwrap_or(n + 1);
    let rep = regrep::free_truncated_rep(radius).map_err(usage)?;
    let closed = qdnum::pairing_closed_form(n);
    let mut per_gen = Map::new();
    let mut worst: f64 = 0.0;
    for l in Letter::ALL {
        let v = qdnum::pairing_numeric(l, n, &rep).map_err(usage)?;
        worst = worst.max((v - closed).abs());
        per_gen.insert(l.to_char().to_string(), num(v));
    }
    let xi = qdnum::xi_vector(n, rep.ball()).map_err(usage)?;
    let comm = qdnum::rank_one_commutator_norm(&rep, &FreeWord::letter(Letter::A), &xi.vector).map_err(usage)?;
    let sharp = qdnum::sharp_commutator_closed_form(n);
    let ok = worst <= 1e-10 && (comm - sharp).abs() <= 1e-8;
    json_outcome(
        f,
        json!({
            "command": "xi", "n": n, "radius": radius,
            "pairing_closed_form": num(closed),
            "pairing_numeric": per_gen,
            "max_pairing_error": num(worst),
            "commutator_a": num(comm),
            "commutator_closed_form": num(sharp),
            "ok": ok,
        }),
        ok,
    )
}

fn commutator(f: Format, n: usize, generator: &str, radius: Option<usize>, tol: f64) -> Res {
    let radius = radius.unwrap_or(n + 1);
    let rep = regrep::free_truncated_rep(radius).map_err(usage)?;
    let s: FreeWord = generator.parse().map_err(usage)?;
    let xi = qdnum::xi_vector(n, rep.ball()).map_err(usage)?;
    let p = FiniteProjection::from_frame(rep.ball(), vec![xi.vector]).map_err(usage)?;
    let c = regrep::commutator_norm(&rep, &s, &p, tol).map_err(usage)?;
    let sharp = qdnum::sharp_commutator_closed_form(n);
    let ok = (c.value - sharp).abs() <= 1e-8;
    json_outcome(
        f,
        json!({
            "command": "commutator", "n": n, "radius": radius, "generator": s.to_string(),
            "value": num(c.value), "exact_on_full_space": c.exact_on_full_space,
            "closed_form": num(sharp), "ok": ok,
        }),
        ok,
    )
}

fn certificate(kind: CertificateKind) -> qdnum::ParadoxicalCertificate {
    match kind {
        CertificateKind::Standard => qdnum::f2_standard_certificate(),
        CertificateKind::Split => qdnum::f2_split_certificate(),
    }
}

fn kind_name(kind: CertificateKind) -> &'static str {
    match kind {
        CertificateKind::Standard => "standard",
        CertificateKind::Split => "split",
    }
}

fn paradox(f: Format, radius: usize, kind: CertificateKind) -> Res {
    let cert = certificate(kind);
    let report = cert.verify(radius).map_err(usage)?;
    let violations: Vec<Value> = report
        .violations
        .iter()
        .take(20)
        .map(|v| json!({"kind": format!("{:?}", v.kind), "witness": v.witness.to_string(), "hits": v.hits}))
        .collect();
    let pieces: Vec<Value> = cert
        .x_pieces()
        .iter()
        .chain(cert.y_pieces())
        .map(|p| json!({"name": p.name, "translator": p.translator.to_string()}))
        .collect();
    json_outcome(
        f,
        json!({
            "command": "paradox verify", "certificate": kind_name(kind), "radius": radius,
            "checked": report.checked, "passed": report.passed(),
            "violation_count": report.violations.len(), "violations": violations, "pieces": pieces,
        }),
        report.passed(),
    )
}

fn cf_lower(f: Format, kind: CertificateKind, radius: usize) -> Res {
    let cert = certificate(kind);
    let verified = match cert.verified(radius) {
        Ok(v) => v,
        Err(e @ qdnum::QdError::Unverified { .. }) => {
            return json_outcome(f, json!({"command": "cf-lower", "verified": false, "error": e.to_string()}), false)
        }
        Err(e) => return Err(usage(e)),
    };
    let lb = qdnum::cf_lower_bound(&verified).map_err(usage)?;
    let bound = *lb.bound.numer() as f64 / *lb.bound.denom() as f64;
    json_outcome(
        f,
        json!({
            "command": "cf-lower", "certificate": kind_name(kind), "verified": true, "verified_radius": radius,
            "bound": num(bound), "bound_exact": lb.bound.to_string(), "pieces": lb.pieces,
            "finite_set": lb.finite_set.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "qd_modulus_lower_bound": {"statement": "qd(Omega) >= C_F", "value": num(bound)},
        }),
        true,
    )
}

fn cf_upper(f: Format, dim: usize, radius: Option<usize>) -> Res {
    let rep = match radius {
        Some(r) => Some(regrep::free_truncated_rep(r).map_err(usage)?),
        None => None,
    };
    let fset = [FreeWord::letter(Letter::A), FreeWord::letter(Letter::B)];
    let s = qdnum::cf_upper_search(dim, rep.as_ref(), &fset).map_err(usage)?;
    let c = (std::f64::consts::PI / (dim as f64 + 1.0)).cos();
    let optimum = (1.0 - 0.75 * c * c).sqrt();
    let ok = s.numeric_value.is_none_or(|v| (v - s.best_value).abs() <= 1e-9);
    json_outcome(
        f,
        json!({
            "command": "cf-upper", "dim": dim, "finite_set": ["a", "b"],
            "best_value": num(s.best_value), "converged": s.converged, "sweeps": s.sweeps,
            "profile": s.profile.iter().map(|&b| num(b)).collect::<Vec<_>>(),
            "uniform_profile_value": num(qdnum::sharp_commutator_closed_form(dim)),
            "radial_optimum": num(optimum),
            "numeric_value": opt_num(s.numeric_value),
            "ok": ok,
        }),
        ok,
    )
}

fn trace_lemma(f: Format, trials: usize, seed: u64, max_dim: usize) -> Res {
    let s = qdnum::trace_lemma_trials(trials, seed, max_dim).map_err(usage)?;
    json_outcome(
        f,
        json!({
            "command": "trace-lemma", "trials": s.trials, "seed": seed, "max_dim": max_dim,
            "violations": s.violations, "max_ratio": num(s.max_ratio),
        }),
        s.violations == 0,
    )
}

fn qr_audit(f: Format, trials: usize, seed: u64, max_rank: usize, support: usize) -> Res {
    if max_rank == 0 {
        return Err(usage("--max-rank must be at least 1"));
    }
    let s = qdnum::random_audit(trials, seed, max_rank, support).map_err(usage)?;
    let floor_ok = s.min_epsilon >= s.bound - 1e-9;
    let ok = s.inequality_violations == 0 && floor_ok;
    json_outcome(
        f,
        json!({
            "command": "qr-audit", "trials": s.trials, "seed": seed, "max_rank": max_rank, "support": support,
            "bound": num(s.bound), "min_epsilon": num(s.min_epsilon), "min_slack": num(s.min_slack),
            "inequality_violations": s.inequality_violations, "floor_ok": floor_ok,
        }),
        ok,
    )
}

/// Largest group order accepted by `induce` (tables are `order²`).
const INDUCE_MAX_ORDER: usize = 4096;

fn parse_group(spec: &str) -> Result<FiniteGroup, CliError> {
    let (kind, arg) = spec.split_once(':').ok_or_else(|| usage(format!("bad --group {spec:?}")))?;
    match kind {
        "cyclic" => {
            let n: usize = arg.parse().map_err(|_| usage(format!("bad order in --group {spec:?}")))?;
            if n == 0 || n > INDUCE_MAX_ORDER {
                return Err(usage(format!("cyclic order must be in 1..={INDUCE_MAX_ORDER}")));
            }
            Ok(FiniteGroup::cyclic(n))
        }
        "heisenberg-mod" => {
            let p: u64 = arg.parse().map_err(|_| usage(format!("bad modulus in --group {spec:?}")))?;
            if p.pow(3) as usize > INDUCE_MAX_ORDER {
                return Err(usage(format!("heisenberg-mod:{p} exceeds the order cap {INDUCE_MAX_ORDER}")));
            }
            let g = ModMatGroup::<3>::new(p).map_err(usage)?;
            let gens = [g.from_ints([[1, 1, 0], [0, 1, 0], [0, 0, 1]]), g.from_ints([[1, 0, 0], [0, 1, 1], [0, 0, 1]])];
            let elems = enumerate_closure(&g, &gens, INDUCE_MAX_ORDER).map_err(usage)?;
            FiniteGroup::from_elements(&g, &elems).map_err(usage)
        }
        "table" => {
            let text = fs::read_to_string(arg).map_err(|e| usage(format!("{arg}: {e}")))?;
            let rows = serial::content_lines(&text)
                .map(|(line, l)| {
                    l.split_whitespace()
                        .map(|t| t.parse::<usize>().map_err(|_| usage(format!("{arg} line {line}: bad entry {t:?}"))))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            let n = rows.len();
            let identity = rows
                .iter()
                .position(|r| r.iter().copied().eq(0..n))
                .ok_or_else(|| usage(format!("{arg}: no identity row")))?;
            let g = FiniteGroup::from_table(rows, identity).map_err(usage)?;
            if let Some(v) = g.verify_axioms().first() {
                return Err(usage(format!("{arg}: not a group ({v:?})")));
            }
            Ok(g)
        }
        _ => Err(usage(format!("unknown group kind {kind:?}"))),
    }
}

fn induce(f: Format, group_spec: &str, subgroup: &str, k: i64) -> Res {
    let g = parse_group(group_spec)?;
    let elems: Vec<usize> = g.elements().collect();
    let generator = match subgroup.split_once(':') {
        None if subgroup == "center" => {
            let z = center_of(&g, &elems);
            cyclic_generator(&g, &z).ok_or_else(|| usage("the center is not cyclic"))?
        }
        Some(("gen", i)) => {
            let i: usize = i.parse().map_err(|_| usage(format!("bad --subgroup {subgroup:?}")))?;
            if i >= g.order() {
                return Err(usage(format!("element {i} out of range")));
            }
            i
        }
        _ => return Err(usage(format!("bad --subgroup {subgroup:?}"))),
    };
    let chi = CentralCharacter::cyclic(&g, &generator, k).map_err(usage)?;
    let h_order = chi.order();
    let rep = induce_central(g.clone(), &elems, chi, None).map_err(usage)?;
    let sep = check_induced_separation(&rep, &elems).map_err(usage)?;
    let restriction_ok = check_induced_restriction(&rep).map_err(usage)?;
    let hom = check_homomorphism(&g, &rep, &elems).map_err(usage)?;
    let ok = sep.ok && restriction_ok && hom.ok();
    json_outcome(
        f,
        json!({
            "command": "induce", "group": group_spec, "order": g.order(), "subgroup": subgroup,
            "subgroup_generator": generator, "subgroup_order": h_order, "char": k,
            "dim": rep.dim(), "minSeparation": num(sep.min_norm), "argmin": sep.argmin,
            "separationOk": sep.ok, "restrictionOk": restriction_ok,
            "homomorphismOk": hom.ok(), "homomorphismExhaustive": hom.exhaustive,
        }),
        ok,
    )
}

fn claim_json(c: &Claim) -> Value {
    match c {
        Claim::NBound(b) => json!({"kind": "n_bound", "bound": num(*b)}),
        Claim::Separated => json!({"kind": "sqrt2_separation"}),
        Claim::LowerBound(b) => json!({"kind": "lower_bound", "bound": num(*b)}),
        Claim::None => json!({"kind": "none"}),
    }
}

fn claim_text(c: &Claim) -> String {
    match c {
        Claim::NBound(b) => format!("le {}", num_text(*b)),
        Claim::Separated => "ge sqrt2".into(),
        Claim::LowerBound(b) => format!("ge {}", num_text(*b)),
        Claim::None => String::new(),
    }
}

fn mf_report_out(f: Format, r: &MfReport) -> Res {
    let ok = r.ok();
    match f {
        Format::Csv => {
            let mut rows = Vec::new();
            for p in &r.probes {
                for s in &p.stages {
                    rows.push(vec![
                        p.label.clone(),
                        format!("{:?}", p.class),
                        s.n.to_string(),
                        r.moduli[s.n - 1].to_string(),
                        s.norm.map(num_text).unwrap_or_else(|| "skipped".into()),
                        s.image_in_zn.to_string(),
                        claim_text(&s.claim),
                        s.ok.to_string(),
                    ]);
                }
            }
            let header = ["probe", "class", "stage", "modulus", "norm", "image_in_zn", "claim", "ok"];
            Ok(Outcome { body: render_csv(&header, &rows), status: if ok { 0 } else { 1 } })
        }
        Format::Json => {
            let stages: Vec<Value> = r
                .stages
                .iter()
                .map(|s| {
                    let ch = |c: &mflef::ChosenCharacter| {
                        json!({"omega": c.omega, "j": c.j, "discrepancy": num(c.discrepancy)})
                    };
                    json!({
                        "n": s.n, "modulus": s.modulus, "index": s.index, "dim": s.dim,
                        "status": match &s.status { StageStatus::Complete => "complete".to_string(), StageStatus::Skipped { reason } => format!("skipped: {reason}") },
                        "tolerance": num(s.gamma.tolerance),
                        "characters": s.gamma.characters.iter().map(ch).collect::<Vec<_>>(),
                        "unsupported": s.gamma.failure.as_ref().map(ch),
                        "blocks": s.gamma.blocks(),
                        "homomorphism_ok": s.homomorphism_ok,
                    })
                })
                .collect();
            let probes: Vec<Value> = r
                .probes
                .iter()
                .map(|p| {
                    json!({
                        "label": p.label, "element": p.element, "class": format!("{:?}", p.class),
                        "trajectory": p.stages.iter().map(|s| json!({
                            "n": s.n, "norm": opt_num(s.norm), "image_in_zn": s.image_in_zn,
                            "in_exhaustion": s.in_exhaustion, "claim": claim_json(&s.claim), "ok": s.ok,
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json_outcome(
                f,
                json!({
                    "command": "mf run", "instance": r.instance, "moduli": r.moduli, "nested": r.nested,
                    "dim_cap": r.dim_cap, "completed_stages": r.completed_stages(),
                    "stages": stages, "probes": probes, "ok": ok,
                }),
                ok,
            )
        }
    }
}

fn run_instance<const N: usize, I: RfInstance<N>>(
    f: Format,
    inst: &I,
    moduli: Option<Vec<u64>>,
    stages: Option<usize>,
    probes: Option<Vec<Probe<I::Elem>>>,
    dim_cap: usize,
) -> Res {
    let moduli = moduli.unwrap_or_else(|| inst.default_moduli());
    let stages = stages.unwrap_or(moduli.len());
    let probes = probes.unwrap_or_else(|| inst.default_probes());
    let report = mflef::separation_report(inst, &MfConfig { moduli, stages, dim_cap }, &probes).map_err(usage)?;
    mf_report_out(f, &report)
}

fn label_probes<E>(elems: Vec<E>) -> Vec<Probe<E>> {
    elems.into_iter().enumerate().map(|(i, e)| Probe { label: format!("probe-{}", i + 1), element: e }).collect()
}

fn mf(
    f: Format,
    instance: MfInstance,
    p: u64,
    moduli: Option<Vec<u64>>,
    stages: Option<usize>,
    probes: Option<&Path>,
    dim_cap: usize,
) -> Res {
    let text = match probes {
        Some(path) => Some(fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?),
        None => None,
    };
    match instance {
        MfInstance::Abels => {
            if p < 2 {
                return Err(usage("--p must be a prime >= 2"));
            }
            let probes = text.map(|t| serial::read_abels(&t, p).map(label_probes)).transpose().map_err(usage)?;
            run_instance(f, &AbelsInstance { p }, moduli, stages, probes, dim_cap)
        }
        MfInstance::Heisenberg => {
            let probes = text.map(|t| serial::read_heisenberg(&t).map(label_probes)).transpose().map_err(usage)?;
            run_instance(f, &HeisenbergInstance, moduli, stages, probes, dim_cap)
        }
    }
}

fn parse_schedule(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || usage(format!("bad --moduli-schedule {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn lef(f: Format, instance: &str, radius: usize, schedule: Option<&str>, witness_out: Option<&Path>) -> Res {
    if instance != "free2" {
        return Err(usage(format!("unknown LEF instance {instance:?} (only free2)")));
    }
    let moduli = match schedule {
        Some(s) => parse_schedule(s)?,
        None => mflef::default_lef_moduli(),
    };
    let fset = free_ball(radius).map_err(usage)?.elements().to_vec();
    let witness = match mflef::lef_witness_search(&fset, &moduli) {
        Ok(w) => w,
        Err(mflef::MfError::ScheduleExhausted) => {
            return json_outcome(
                f,
                json!({"command": "lef", "radius": radius, "found": false, "moduli_tried": moduli.len()}),
                false,
            )
        }
        Err(e) => return Err(usage(e)),
    };
    let report = mflef::verify_lef_witness(&witness).map_err(usage)?;
    let unitaries = mflef::lef_to_unitaries(&witness).map_err(usage)?;
    if let Some(path) = witness_out {
        fs::write(path, mflef::format_lef_witness(&witness)).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    let ok = report.ok() && unitaries.min_distance >= std::f64::consts::SQRT_2 - 1e-12;
    json_outcome(
        f,
        json!({
            "command": "lef", "instance": "free2", "radius": radius, "found": true,
            "modulus": witness.modulus, "subset_size": witness.f.len(), "domain_size": witness.phi.len(),
            "verified": report.ok(), "image_group_order": unitaries.dim,
            "min_pairwise_distance": num(unitaries.min_distance),
            "argmin": unitaries.argmin.map(|(s, t)| vec![s.to_string(), t.to_string()]),
        }),
        ok,
    )
}
