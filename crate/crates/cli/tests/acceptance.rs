//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::time::{Duration, Instant};

use qdcert::cayley::{first_letter_partition, free_ball};
use qdcert::finrep::{
    check_induced_restriction, check_induced_separation, induce_central, CentralCharacter, UnitaryRep,
};
use qdcert::groups::{enumerate_closure, FiniteGroup, FreeWord, Letter, ModMatGroup};
use qdcert::mflef::{
    self, separation_report, AbelsInstance, Claim, HeisenbergInstance, MfConfig, ProbeClass, RfInstance, StageStatus,
    DEFAULT_DIM_CAP,
};
use qdcert::qdnum;
use qdcert::regrep::free_truncated_rep;

const SQRT2: f64 = std::f64::consts::SQRT_2;

type Criterion = (u32, &'static str, Option<u64>, fn() -> Verdict);

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = f();
    let took = start.elapsed();
    v.detail = format!("{} [{:.2}s]", v.detail, took.as_secs_f64());
    if let Some(limit) = limit {
        if took > limit {
            v.ok = false;
            v.detail = format!("{} exceeds the {}s limit", v.detail, limit.as_secs());
        }
    }
    v
}

fn sphere_counts() -> Verdict {
    let ball = free_ball(9).expect("ball of radius 9");
    for n in 1..=9usize {
        let expect = 4 * 3usize.pow(n as u32 - 1);
        if ball.sphere(n).len() != expect {
            return verdict(false, format!("|S_{n}| = {} != {expect}", ball.sphere(n).len()));
        }
        let part = first_letter_partition(n).expect("n >= 1");
        for l in Letter::ALL {
            if part.class(l).len() != 3usize.pow(n as u32 - 1) {
                return verdict(false, format!("|S_{n}^{}| = {}", l.to_char(), part.class(l).len()));
            }
        }
    }
    verdict(true, "|S_n| = 4*3^(n-1) and |S_n^x| = 3^(n-1) for n = 1..9")
}

fn pairing_identity() -> Verdict {
    let rep = free_truncated_rep(9).expect("rep of radius 9");
    let mut worst: f64 = 0.0;
    for n in 1..=8 {
        let target = 3f64.sqrt() / 2.0 * (1.0 - 1.0 / n as f64);
        for l in Letter::ALL {
            match qdnum::pairing_numeric(l, n, &rep) {
                Ok(v) => worst = worst.max((v - target).abs()),
                Err(e) => return verdict(false, format!("n = {n}: {e}")),
            }
        }
    }
    verdict(worst <= 1e-10, format!("max |numeric - closed form| = {worst:.3e} over n = 1..8, four generators, R = 9"))
}

fn sharp_values() -> Verdict {
    let rep = free_truncated_rep(9).expect("rep of radius 9");
    let a = FreeWord::letter(Letter::A);
    let mut values = Vec::new();
    let mut worst: f64 = 0.0;
    for n in 1..=8 {
        let xi = qdnum::xi_vector(n, rep.ball()).expect("xi");
        let v = match qdnum::rank_one_commutator_norm(&rep, &a, &xi.vector) {
            Ok(v) => v,
            Err(e) => return verdict(false, format!("n = {n}: {e}")),
        };
        worst = worst.max((v - qdnum::sharp_commutator_closed_form(n)).abs());
        values.push(v);
    }
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let v8 = values[7];
    let v8_ok = (v8 * 1e4).round() / 1e4 == 0.6525 && (v8 - 0.65252).abs() < 5e-5;
    let c150 = qdnum::sharp_commutator_closed_form(150);
    let ok = worst <= 1e-8 && decreasing && v8_ok && c150 <= 0.51;
    verdict(
        ok,
        format!(
            "max error {worst:.2e}, strictly decreasing = {decreasing}, n = 8 value {v8:.5}, closed form at n = 150 = {c150:.5} (formula only)"
        ),
    )
}

fn lower_bound_floor() -> Verdict {
    match qdnum::random_audit(200, 0, 5, 6) {
        Ok(s) => {
            let ok = s.inequality_violations == 0 && s.min_epsilon >= 0.5 - 1e-9 && s.min_slack >= -1e-8;
            verdict(
                ok,
                format!(
                    "{} projections (rank <= 5, support B_6): min epsilon = {:.6}, min audit slack = {:.3e}, violations = {}",
                    s.trials, s.min_epsilon, s.min_slack, s.inequality_violations
                ),
            )
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn trace_lemma() -> Verdict {
    let s = match qdnum::trace_lemma_trials(1000, 0, 40) {
        Ok(s) => s,
        Err(e) => return verdict(false, e.to_string()),
    };
    let d = |v: [f64; 2]| {
        nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            2,
            v.iter().map(|&x| num_complex::Complex64::new(x, 0.0)),
        ))
    };
    let eq = qdnum::trace_lemma_check(&d([1.0, -1.0]), &d([1.0, 0.0])).expect("preconditions hold");
    let ok = s.violations == 0 && eq.lhs == eq.bound;
    verdict(
        ok,
        format!(
            "{} trials, {} violations, max ratio {:.4}; equality case lhs = {} bound = {}",
            s.trials, s.violations, s.max_ratio, eq.lhs, eq.bound
        ),
    )
}

fn certificates() -> Verdict {
    let cert = qdnum::f2_standard_certificate();
    for r in 0..=8 {
        match cert.verify(r) {
            Ok(rep) if rep.passed() => {}
            Ok(rep) => return verdict(false, format!("radius {r}: {}", rep.violations[0])),
            Err(e) => return verdict(false, e.to_string()),
        }
    }
    let lb = cert.verified(6).and_then(|v| qdnum::cf_lower_bound(&v));
    match lb {
        Ok(lb) => {
            let ok = *lb.bound.numer() == 1 && *lb.bound.denom() == 2;
            verdict(ok, format!("verified on B_0..B_8; bound = {} with {} pieces", lb.bound, lb.pieces))
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn induced_library() -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut record = |ok: &mut bool, name: String, sep: f64, sep_ok: bool, restr: bool| {
        *ok &= sep_ok && restr && sep >= SQRT2 - 1e-12;
        lines.push(format!("{name}: min {sep:.12}, restriction {restr}"));
    };
    let z4 = FiniteGroup::cyclic(4);
    let e4: Vec<usize> = z4.elements().collect();
    let rep = induce_central(z4.clone(), &e4, CentralCharacter::cyclic(&z4, &2, 1).unwrap(), Some(vec![0, 1])).unwrap();
    let sep = check_induced_separation(&rep, &e4).unwrap();
    let gamma_ok = rep.character().value(&2).map(|p| p.to_complex().re) == Some(-1.0);
    ok &= (sep.min_norm - SQRT2).abs() <= 1e-12 && gamma_ok;
    record(&mut ok, "Z/4 > Z/2".into(), sep.min_norm, sep.ok, check_induced_restriction(&rep).unwrap());

    let h = ModMatGroup::<3>::new(3).unwrap();
    let gens = [h.from_ints([[1, 1, 0], [0, 1, 0], [0, 0, 1]]), h.from_ints([[1, 0, 0], [0, 1, 1], [0, 0, 1]])];
    let elems = enumerate_closure(&h, &gens, 1000).unwrap();
    let z = h.from_ints([[1, 0, 1], [0, 1, 0], [0, 0, 1]]);
    for k in [1, 2] {
        let rep = induce_central(h, &elems, CentralCharacter::cyclic(&h, &z, k).unwrap(), None).unwrap();
        let sep = check_induced_separation(&rep, &elems).unwrap();
        ok &= rep.dim() == 9;
        record(
            &mut ok,
            format!("Heisenberg mod 3, k = {k}"),
            sep.min_norm,
            sep.ok,
            check_induced_restriction(&rep).unwrap(),
        );
    }

    let z6 = FiniteGroup::cyclic(6);
    let e6: Vec<usize> = z6.elements().collect();
    for k in 0..3 {
        let rep = induce_central(z6.clone(), &e6, CentralCharacter::cyclic(&z6, &2, k).unwrap(), None).unwrap();
        let sep = check_induced_separation(&rep, &e6).unwrap();
        record(&mut ok, format!("Z/6 > Z/3, k = {k}"), sep.min_norm, sep.ok, check_induced_restriction(&rep).unwrap());
    }
    verdict(ok, lines.join("; "))
}

fn mf_heisenberg() -> Verdict {
    let inst = HeisenbergInstance;
    let config = MfConfig { moduli: vec![3, 9, 27], stages: 3, dim_cap: DEFAULT_DIM_CAP };
    let report = match separation_report(&inst, &config, &inst.default_probes()) {
        Ok(r) => r,
        Err(e) => return verdict(false, e.to_string()),
    };
    let mut ok = report.completed_stages() == 3;
    let mut n_probes = 0;
    let mut off = 0;
    for p in &report.probes {
        match p.class {
            ProbeClass::InN => {
                n_probes += 1;
                for s in &p.stages {
                    ok &= matches!(s.claim, Claim::NBound(_)) && s.norm.is_some_and(|v| v <= 1.0 / s.n as f64 + 1e-9);
                }
            }
            ProbeClass::OffCenter => {
                off += 1;
                ok &= p.stages.iter().take(2).any(|s| s.norm.is_some_and(|v| v >= SQRT2 - 1e-9));
                ok &= p.stages.iter().all(|s| s.ok);
            }
            ProbeClass::CenterNotN => ok = false,
        }
    }
    verdict(
        ok,
        format!("moduli 3, 9, 27 (nested = {}); {n_probes} N-probe(s) within 1/n, {off} off-centre probes separated by stage 2", report.nested),
    )
}

fn mf_abels() -> Verdict {
    let inst = AbelsInstance { p: 2 };
    let moduli = inst.default_moduli();
    let config = MfConfig { stages: moduli.len(), moduli, dim_cap: DEFAULT_DIM_CAP };
    let probes = inst.default_probes();
    let report = match separation_report(&inst, &config, &probes) {
        Ok(r) => r,
        Err(e) => return verdict(false, e.to_string()),
    };
    let complete = report.completed_stages();
    let skipped: Vec<u64> =
        report.stages.iter().filter(|s| matches!(s.status, StageStatus::Skipped { .. })).map(|s| s.modulus).collect();
    let mut ok = report.stages.len() >= 3 && complete >= 2 && report.ok();
    let find = |label: &str| report.probes.iter().find(|p| p.label == label).expect("default probe");

    let one = find("x14=1");
    for s in one.stages.iter().filter(|s| s.norm.is_some()) {
        ok &= s.norm.unwrap() <= 1.0 / s.n as f64 + 1e-9;
    }

    let half = find("x14=1/2");
    let omega1_stages: Vec<usize> = report
        .stages
        .iter()
        .filter(|s| s.status == StageStatus::Complete && s.gamma.characters.iter().any(|c| c.omega == 1))
        .map(|s| s.n)
        .collect();
    for s in half.stages.iter().filter(|s| omega1_stages.contains(&s.n)) {
        ok &= matches!(s.claim, Claim::LowerBound(b) if b >= 1.0) && s.ok;
    }
    let half_note = if omega1_stages.is_empty() {
        let best: Vec<String> = report
            .stages
            .iter()
            .filter_map(|s| s.gamma.failure.as_ref().map(|f| format!("m={}: {:.4}", s.modulus, f.discrepancy)))
            .collect();
        format!(
            "x14=1/2 clause has no applicable stage: omega_1 is not within 1/n on F_n for any modulus run ({})",
            best.join(", ")
        )
    } else {
        format!("x14=1/2 lower bound >= 1 at stages {omega1_stages:?}")
    };

    let e23 = find("x23=1");
    let sep: Vec<&mflef::ProbeStage> = e23.stages.iter().filter(|s| s.norm.is_some() && !s.image_in_zn).collect();
    ok &= !sep.is_empty() && sep.iter().all(|s| s.norm.unwrap() >= SQRT2 - 1e-9);

    verdict(
        ok,
        format!(
            "{} stages, {complete} complete, skipped moduli {skipped:?} over the 10^5 cap; x14=1 within 1/n at all computed stages; x23=1 >= sqrt2 at {} stage(s); {half_note}",
            report.stages.len(),
            sep.len()
        ),
    )
}

fn lef_b2() -> Verdict {
    let b2 = free_ball(2).expect("ball").elements().to_vec();
    let w = match mflef::lef_witness_search(&b2, &mflef::default_lef_moduli()) {
        Ok(w) => w,
        Err(e) => return verdict(false, e.to_string()),
    };
    let report = mflef::verify_lef_witness(&w).expect("witness defined on F.F");
    let u = match mflef::lef_to_unitaries(&w) {
        Ok(u) => u,
        Err(e) => return verdict(false, e.to_string()),
    };
    let ok = report.ok() && u.min_distance >= SQRT2 - 1e-12;
    verdict(
        ok,
        format!("modulus {} separates B_2; |H| = {}; min pairwise distance {:.12}", w.modulus, u.dim, u.min_distance),
    )
}

fn determinism() -> Verdict {
    let run = |args: &[&str]| {
        let mut full = vec!["qdcert"];
        full.extend_from_slice(args);
        qdcert_cli::run_args(full).map(|o| o.body)
    };
    let cases: [&[&str]; 2] =
        [&["qr-audit", "--trials", "200", "--seed", "0"], &["trace-lemma", "--trials", "1000", "--seed", "0"]];
    let mut ok = true;
    for args in cases {
        match (run(args), run(args)) {
            (Ok(a), Ok(b)) => ok &= a == b,
            _ => ok = false,
        }
    }
    verdict(ok, "qr-audit and trace-lemma reports byte-identical across reruns with seed 0")
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "sphere counts", Some(30), sphere_counts),
        (2, "pairing identity", Some(120), pairing_identity),
        (3, "sharp commutator values", None, sharp_values),
        (4, "lower-bound floor and audit", Some(300), lower_bound_floor),
        (5, "trace lemma", None, trace_lemma),
        (6, "certificate verification", None, certificates),
        (7, "induced representations", None, induced_library),
        (8, "MF pipeline (Heisenberg)", Some(60), mf_heisenberg),
        (9, "MF pipeline (Abels, p = 2)", None, mf_abels),
        (10, "LEF witness for B_2", Some(60), lef_b2),
        (11, "determinism", None, determinism),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let v = timed(limit.map(Duration::from_secs), check);
        println!("criterion {id:>2} [PRIMARY] {}: {name}: {}", if v.ok { "PASS" } else { "FAIL" }, v.detail);
        if !v.ok {
            failed += 1;
        }
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
