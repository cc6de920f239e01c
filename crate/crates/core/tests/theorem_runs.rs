//! Theorem validators chained on fitted and hand-written certificates.

mod common;

use cocycle_lab::certificates::{
    estimate_exp_instability, estimate_integral_instability, Certificate, CertificateBody, DecayCertificate,
    ExpInstabilityCertificate, IntegralInstabilityCertificate, Witness,
};
use cocycle_lab::theorems::{
    corollary_equivalence, formulas, prop_integral_decay_to_instability, prop_shift_necessity,
    prop_shift_sufficiency, remark_obs2, thm1_necessity, thm1_sufficiency, thm2_validate, RunSettings,
    RunVerdict, TheoremRun,
};
use common::*;

fn fitted_exp(
    xi: &cocycle_lab::algebra::SkewEvolutionSemiflow,
    grid: &cocycle_lab::algebra::SampleGrid,
) -> Certificate {
    let s = RunSettings::default();
    let est = estimate_exp_instability(xi, grid, &s.nu_candidates, s.growth_cap, s.headroom).unwrap();
    Certificate::fitted(
        CertificateBody::ExpInstability(est.certificate().unwrap().clone()),
        grid.hash(),
        xi.shift(),
    )
}

fn e_minus_t() -> Certificate {
    Certificate::new(CertificateBody::Decay(DecayCertificate::Parametric { n_tilde: 1.0, omega: 1.0 }))
}

fn m_one() -> Certificate {
    Certificate::new(CertificateBody::IntegralInstability(
        IntegralInstabilityCertificate::new(Witness::constant(1.0)).unwrap(),
    ))
}

fn formulas_known(run: &TheoremRun) {
    for d in &run.derived {
        assert!(
            formulas::TABLE.iter().any(|(_, f)| *f == d.formula),
            "{}: unknown formula {:?}",
            d.name,
            d.formula
        );
    }
}

#[test]
fn thm1_necessity_clamps_the_quotient() {
    let s = RunSettings::default();
    let xi = sin();
    let grid = grid_for(&xi, 8.0, 0.25);
    let cert = fitted_exp(&xi, &grid);
    let exp = cert.as_exp_instability().unwrap().clone();
    let run = thm1_necessity(&xi, &grid, &cert, &s).unwrap();
    assert!(run.passed(), "{:?}", run.notes);
    formulas_known(&run);
    let m = &run.derived("M").unwrap().certificate.as_ref().unwrap().as_integral_instability().unwrap().m;
    for &t in grid.times() {
        let raw = exp.n.value_at(t).unwrap() / exp.nu;
        let got = m.value_at(t).unwrap();
        assert!(got >= 1.0);
        if raw >= 1.0 {
            assert!(rel_err(got, raw) <= 1e-12, "M({t})");
        } else {
            assert_eq!(got, 1.0);
        }
    }
}

#[test]
fn shift_necessity_halves_nu() {
    let s = RunSettings::default();
    for nu in [1.0, 2.5, 3.0] {
        let cert = Certificate::new(CertificateBody::ExpInstability(
            ExpInstabilityCertificate::new(Witness::constant(1.5), nu).unwrap(),
        ));
        let run = prop_shift_necessity(&pure(3.0), &grid_for(&pure(3.0), 4.0, 0.25), &cert, &s).unwrap();
        assert_eq!(run.quantities["alpha"], nu / 2.0);
        if nu <= 3.0 {
            assert!(run.passed(), "nu = {nu}: {:?}", run.notes);
        }
    }
}

#[test]
fn pure_exponential_runs_have_nonnegative_margins() {
    let s = RunSettings::default();
    let xi = pure(3.0);
    let grid = grid_for(&xi, 6.0, 0.25);
    let exp = fitted_exp(&xi, &grid);
    let runs = vec![
        remark_obs2(&xi, &grid, &exp, &s).unwrap(),
        thm1_necessity(&xi, &grid, &exp, &s).unwrap(),
        prop_integral_decay_to_instability(&xi, &grid, &e_minus_t(), &m_one(), &s).unwrap(),
        prop_shift_necessity(&xi, &grid, &exp, &s).unwrap(),
        prop_shift_sufficiency(&xi, &grid, Some(1.5), &m_one(), &e_minus_t(), &s).unwrap(),
        thm2_validate(&xi, &grid, &e_minus_t(), &m_one(), &s).unwrap(),
    ];
    for run in &runs {
        assert!(run.passed(), "{}: {:?}", run.theorem.as_str(), run.notes);
        assert!(run.worst_margin() >= 0.0, "{}", run.theorem.as_str());
        formulas_known(run);
    }
}

#[test]
fn necessity_output_feeds_sufficiency() {
    let s = RunSettings::default();
    let xi = pure(3.0);
    let grid = grid_for(&xi, 6.0, 0.25);
    let nec = prop_shift_necessity(&xi, &grid, &fitted_exp(&xi, &grid), &s).unwrap();
    let m_alpha = nec.derived("M_alpha").unwrap().certificate.clone().unwrap();
    let run = prop_shift_sufficiency(&xi, &grid, None, &m_alpha, &e_minus_t(), &s).unwrap();
    assert!(run.passed(), "{:?}", run.notes);
    assert_eq!(run.quantities["alpha"], 1.5);
    let k = (1.0 - (-2.5f64).exp()) / 2.5;
    assert!((run.quantities["K"] - k).abs() < 1e-10);
}

#[test]
fn thm1_sufficiency_on_fitted_inputs() {
    let s = RunSettings::default();
    let xi = pure(3.0);
    let grid = grid_for(&xi, 4.0, 0.25);
    let nec = thm1_necessity(&xi, &grid, &fitted_exp(&xi, &grid), &s).unwrap();
    let n = Certificate::new(CertificateBody::Instability(
        cocycle_lab::certificates::estimate_instability(&xi, &grid, s.headroom).unwrap(),
    ));
    let m = nec.derived("M").unwrap().certificate.clone().unwrap();
    let run = thm1_sufficiency(&xi, &grid, &n, &m, &s).unwrap();
    assert!(run.passed(), "{:?}", run.notes);
    formulas_known(&run);
}

#[test]
fn thm2_rejects_a_failing_integral_certificate() {
    let s = RunSettings::default();
    let xi = pure(-1.0);
    let grid = grid_for(&xi, 4.0, 0.25);
    let run = thm2_validate(&xi, &grid, &e_minus_t(), &m_one(), &s).unwrap();
    assert_eq!(run.verdict, RunVerdict::InputInvalid);
}

#[test]
fn corollary_agrees_when_both_directions_pass() {
    let s = RunSettings::default();
    let mut audited = 0;
    for xi in [pure(3.0), sin()] {
        let grid = grid_for(&xi, 8.0, 0.25);
        let exp = fitted_exp(&xi, &grid);
        let m = Certificate::new(CertificateBody::IntegralInstability(
            estimate_integral_instability(&xi, &grid, &s.quad, s.headroom).unwrap(),
        ));
        let nec = thm1_necessity(&xi, &grid, &exp, &s).unwrap();
        let suf = thm2_validate(&xi, &grid, &e_minus_t(), &m, &s).unwrap();
        let cor = corollary_equivalence(&xi, &grid, &s).unwrap();
        if nec.passed() && suf.passed() {
            assert!(cor.passed(), "{}: {:?}", xi.name(), cor.notes);
            audited += 1;
        }
    }
    assert!(audited >= 1);
}
