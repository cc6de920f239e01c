use super::*;
use crate::algebra::{BasePoint, SkewEvolutionSemiflow};
use crate::certificates::{
    estimate_instability, estimate_integral_instability, CertificateBody, DecayCertificate,
    ExpInstabilityCertificate, InstabilityCertificate, IntegralInstabilityCertificate,
};
use crate::models::{build_model, ModelDescriptor};

fn pure(c: f64) -> SkewEvolutionSemiflow {
    build_model(&ModelDescriptor::pure_exponential(c)).unwrap()
}

fn sin() -> SkewEvolutionSemiflow {
    build_model(&ModelDescriptor::sin_scalar()).unwrap()
}

fn grid(max: f64) -> SampleGrid {
    let count = (max * 4.0) as usize + 1;
    SampleGrid::new(
        SampleGrid::linspace(0.0, max, count).unwrap(),
        vec![BasePoint::trivial(0.0)],
        SampleGrid::canonical_vectors(1),
    )
    .unwrap()
}

fn exp_cert(n: Witness, nu: f64) -> Certificate {
    Certificate::new(CertificateBody::ExpInstability(ExpInstabilityCertificate::new(n, nu).unwrap()))
}

fn decay(n_tilde: f64, omega: f64) -> Certificate {
    Certificate::new(CertificateBody::Decay(DecayCertificate::Parametric { n_tilde, omega }))
}

fn integral(m: Witness) -> Certificate {
    Certificate::new(CertificateBody::IntegralInstability(IntegralInstabilityCertificate::new(m).unwrap()))
}

fn formula_of(run: &TheoremRun, name: &str) -> String {
    run.derived(name).unwrap_or_else(|| panic!("no derived {name}")).formula.clone()
}

#[test]
fn formula_table_is_frozen() {
    let expected = [
        "N_is(t) = N(t)",
        "f(u) = min ||Phi(u+t0,t0,x)v|| / ||v||",
        "K = int_0^1 f(tau) dtau",
        "N(t) = 1/f(1) + M(t)/K",
        "alpha = nu/2",
        "M(t) = N(t)/alpha",
        "K = int_0^1 exp(-alpha*u) f(u) du",
        "N(t) = max(M(t)/K, 1 + headroom), nu = alpha",
        "M(t) = max(1, N(t)/nu)",
        "M_tilde(t) = M(t)/f(t)",
        "lambda = min{k integer >= 2 : f(k) < 1}",
        "K1 = int_0^1 f(tau) dtau",
        "N(t) = 1/f(lambda) + M_tilde(t)",
    ];
    let table: Vec<&str> = formulas::TABLE.iter().map(|(_, f)| *f).collect();
    assert_eq!(table, expected);
}

#[test]
fn remark_on_analytic_models() {
    let s = RunSettings::default();
    let g = grid(16.0);
    let run = remark_obs2(&sin(), &g, &exp_cert(Witness::exponential(1.0, 4.0), 3.0), &s).unwrap();
    assert!(run.passed(), "{:?}", run.notes);
    assert_eq!(formula_of(&run, "N_is"), formulas::REMARK_N);
    let run = remark_obs2(&pure(3.0), &grid(4.0), &exp_cert(Witness::constant(1.01), 3.0), &s).unwrap();
    assert!(run.passed());
    let run = remark_obs2(&pure(-1.0), &grid(4.0), &exp_cert(Witness::constant(1.01), 3.0), &s).unwrap();
    assert_eq!(run.verdict, RunVerdict::InputInvalid);
}

#[test]
fn integral_decay_constants() {
    let s = RunSettings::default();
    let g = grid(4.0);
    let run = prop_integral_decay_to_instability(
        &pure(3.0),
        &g,
        &decay(1.0, 1.0),
        &integral(Witness::constant(1.0)),
        &s,
    )
    .unwrap();
    assert!(run.passed());
    let k = 1.0 - (-1f64).exp();
    assert!((run.quantities["K"] - k).abs() < 1e-12);
    let n = run.derived("N").unwrap().certificate.as_ref().unwrap();
    let n = &n.as_instability().unwrap().n;
    assert!((n.value_at(3.0).unwrap() - 4.30026).abs() < 1e-5);
    assert_eq!(formula_of(&run, "N"), formulas::INTEGRAL_DECAY_N);

    let run = prop_integral_decay_to_instability(
        &pure(3.0),
        &g,
        &decay(1.0, 1.0),
        &integral(Witness::constant(2.0)),
        &s,
    )
    .unwrap();
    let n = run.derived("N").unwrap().certificate.as_ref().unwrap();
    assert!((n.as_instability().unwrap().n.value_at(0.0).unwrap() - 5.88224).abs() < 1e-5);
}

#[test]
fn shift_necessity_records_alpha() {
    let s = RunSettings::default();
    let run =
        prop_shift_necessity(&pure(3.0), &grid(4.0), &exp_cert(Witness::constant(1.01), 3.0), &s).unwrap();
    assert!(run.passed());
    assert_eq!(run.quantities["alpha"], 1.5);
    let d = run.derived("M_alpha").unwrap();
    assert!(d.clamped);
    let c = d.certificate.as_ref().unwrap();
    assert_eq!(c.shift, 1.5);
    assert_eq!(c.as_integral_instability().unwrap().m, Witness::constant(1.0));

    let run = prop_shift_necessity(&sin(), &grid(16.0), &exp_cert(Witness::exponential(1.0, 4.0), 3.0), &s)
        .unwrap();
    assert!(run.passed(), "{:?}", run.reports);
}

#[test]
fn shift_sufficiency_kernel() {
    let s = RunSettings::default();
    let g = grid(4.0);
    let run = prop_shift_sufficiency(
        &pure(3.0),
        &g,
        Some(1.5),
        &integral(Witness::constant(1.0)),
        &decay(1.0, 1.0),
        &s,
    )
    .unwrap();
    assert!(run.passed(), "{:?}", run.notes);
    let k = (1.0 - (-2.5f64).exp()) / 2.5;
    assert!((run.quantities["K"] - k).abs() < 1e-10);
    let n = run.derived("N").unwrap().certificate.as_ref().unwrap();
    let n = n.as_exp_instability().unwrap();
    assert_eq!(n.nu, 1.5);
    assert!((n.n.value_at(0.0).unwrap() - 1.0 / k).abs() < 1e-9);
    assert!((1.0 / k - 2.7235).abs() < 1e-4);

    let zero = prop_shift_sufficiency(
        &pure(3.0),
        &g,
        Some(0.0),
        &integral(Witness::constant(1.0)),
        &decay(1.0, 1.0),
        &s,
    )
    .unwrap();
    assert_eq!(zero.verdict, RunVerdict::InputInvalid);

    let one = Certificate::new(CertificateBody::Decay(DecayCertificate::Constant { value: 1.0 }));
    let run = prop_shift_sufficiency(&pure(3.0), &g, Some(1.5), &integral(Witness::constant(1.0)), &one, &s)
        .unwrap();
    assert!((run.quantities["K"] - (1.0 - (-1.5f64).exp()) / 1.5).abs() < 1e-10);
    assert!(run.notes.iter().any(|n| n.contains("class")));
}

#[test]
fn thm1_directions() {
    let s = RunSettings::default();
    let g = grid(4.0);
    let run = thm1_necessity(&pure(3.0), &g, &exp_cert(Witness::constant(1.01), 3.0), &s).unwrap();
    assert!(run.passed());
    assert!(run.derived("obs2.N_is").is_some());
    assert_eq!(formula_of(&run, "M"), formulas::THM1_M);

    let e4t = Witness::exponential(1.0, 4.0);
    let run = thm1_necessity(&sin(), &grid(16.0), &exp_cert(e4t.clone(), 3.0), &s).unwrap();
    assert!(run.passed());
    let m = &run.derived("M").unwrap().certificate.as_ref().unwrap().as_integral_instability().unwrap().m;
    for &t in &[0.0, 0.25, 4.0, 16.0] {
        let raw = e4t.value_at(t).unwrap() / 3.0;
        assert!((m.value_at(t).unwrap() - raw.max(1.0)).abs() <= 1e-12 * raw.max(1.0));
    }

    let n = Certificate::new(CertificateBody::Instability(
        InstabilityCertificate::new(Witness::constant(1.01)).unwrap(),
    ));
    let run = thm1_sufficiency(&pure(3.0), &g, &n, &integral(Witness::constant(1.0)), &s).unwrap();
    assert!(run.passed(), "{:?}", run.notes);
    assert!(run.report("linear_growth").unwrap().worst_margin >= 0.0);

    let iso = pure(0.0);
    let n = estimate_instability(&iso, &g, 0.01).unwrap();
    let m = estimate_integral_instability(&iso, &g, &s.quad, 0.01).unwrap();
    let run = thm1_sufficiency(
        &iso,
        &g,
        &Certificate::new(CertificateBody::Instability(n)),
        &Certificate::new(CertificateBody::IntegralInstability(m)),
        &s,
    )
    .unwrap();
    assert!(run.passed());
    assert!(run.report("linear_growth").unwrap().worst_margin < 0.02);
}

#[test]
fn thm2_pipeline() {
    let s = RunSettings::default();
    let g = grid(4.0);
    let run = thm2_validate(&pure(3.0), &g, &decay(1.0, 1.0), &integral(Witness::constant(1.0)), &s).unwrap();
    assert!(run.passed(), "{:?}", run.notes);
    assert_eq!(run.quantities["lambda"], 2.0);
    let n = run.derived("N").unwrap().certificate.as_ref().unwrap().as_instability().unwrap();
    for &t in g.times() {
        let want = 2f64.exp() + t.exp();
        assert!((n.n.value_at(t).unwrap() - want).abs() <= 1e-10 * want);
    }

    let c = Certificate::new(CertificateBody::Decay(DecayCertificate::Constant { value: 0.9 }));
    let run = thm2_validate(&pure(3.0), &g, &c, &integral(Witness::constant(1.0)), &s).unwrap();
    assert_eq!(run.verdict, RunVerdict::InputInvalid);

    let flat = Certificate::new(CertificateBody::Decay(
        DecayCertificate::tabulated(vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 1.0]).unwrap(),
    ));
    let run = thm2_validate(&pure(3.0), &grid(2.0), &flat, &integral(Witness::constant(1.0)), &s).unwrap();
    assert_eq!(run.verdict, RunVerdict::NoCertificate);
}

#[test]
fn corollary_agreement() {
    let s = RunSettings::default();
    let run = corollary_equivalence(&pure(3.0), &grid(4.0), &s).unwrap();
    assert!(run.passed(), "{:?}", run.properties);
    let run = corollary_equivalence(&pure(-1.0), &grid(8.0), &s).unwrap();
    assert_eq!(run.verdict, RunVerdict::Fail);
    assert_eq!(run.properties["exp_instability"], "no-certificate");
    assert!((run.quantities["ln_M_slope"] - 1.0).abs() < 0.2);
    assert!(run.notes.iter().any(|n| n.contains("disagree")));
}

#[test]
fn theorem_ids_parse() {
    for id in TheoremId::ALL {
        assert_eq!(id.as_str().parse::<TheoremId>().unwrap(), id);
        let json = serde_json::to_string(&id).unwrap();
        assert_eq!(json, format!("\"{}\"", id.as_str()));
    }
    assert_eq!(serde_json::to_string(&RunVerdict::NoCertificate).unwrap(), "\"no-certificate\"");
}
