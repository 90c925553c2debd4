use qdcert::mflef::{
    separation_report, AbelsInstance, Claim, MfConfig, ProbeClass, RfInstance, StageStatus, DEFAULT_DIM_CAP,
};

#[test]
fn abels_default_schedule() {
    let inst = AbelsInstance { p: 2 };
    let config = MfConfig { moduli: inst.default_moduli(), stages: 4, dim_cap: DEFAULT_DIM_CAP };
    let report = separation_report(&inst, &config, &inst.default_probes()).unwrap();
    assert!(!report.nested);
    assert_eq!(report.completed_stages(), 2);
    assert!(matches!(report.stages[2].status, StageStatus::Skipped { .. }));
    assert!(matches!(report.stages[3].status, StageStatus::Skipped { .. }));
    assert_eq!(report.stages[1].dim, Some(50_000));
    assert!(report.ok());
    for st in &report.stages {
        assert!(st.gamma.characters.is_empty());
        assert_eq!(st.gamma.failure.as_ref().map(|f| f.omega), Some(1));
    }
    let corner = report.probes.iter().find(|p| p.class == ProbeClass::InN).unwrap();
    for s in corner.stages.iter().filter(|s| s.norm.is_some()) {
        assert!(matches!(s.claim, Claim::NBound(_)));
        assert_eq!(s.norm, Some(0.0));
    }
    let e23 = report.probes.iter().find(|p| p.label == "x23=1").unwrap();
    let separated: Vec<_> = e23.stages.iter().filter(|s| s.norm.is_some() && !s.image_in_zn).collect();
    assert_eq!(separated.len(), 2);
    assert!(separated.iter().all(|s| s.norm.unwrap() >= std::f64::consts::SQRT_2 - 1e-9));
}
