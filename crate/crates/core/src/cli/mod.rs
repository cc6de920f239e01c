//! Scenario-driven command line: `cocycle-lab <laws|estimate|check|theorem|report>`.
//!
//! Exit codes: 0 when every check passes, 1 on a counterexample or a missing certificate,
//! 2 on usage, schema, or evaluation errors.

mod output;
mod scenario;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use output::{format_float, to_json};
pub use scenario::{GridSpec, Prepared, Scenario, TimesSpec, Tolerances};

use crate::algebra::{check_cocycle_laws, check_semiflow_laws, CheckReport, SampleMargin};
use crate::certificates::{
    check_decay, check_exp_instability, check_instability, check_integral_instability, decay_margins,
    estimate_decay, estimate_exp_instability, estimate_instability, estimate_integral_instability,
    exp_instability_margins, instability_margins, integral_instability_margins, Certificate, CertificateBody,
    ExpEstimate, NuFit, Property, SampleScope,
};
use crate::theorems::{self, TheoremId, TheoremRun};

pub const THREADS_ENV: &str = "COCYCLE_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "cocycle-lab",
    version,
    about = "Certificate fitting and checking for skew-evolution semiflows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (overrides the scenario's `output_dir`).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the semiflow and cocycle laws.
    Laws(Common),
    /// Fit a certificate for one property.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        property: String,
    },
    /// Check a certificate file against the scenario grid.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        property: String,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Run a theorem validator.
    Theorem {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        theorem: String,
        #[arg(long = "cert")]
        certs: Vec<PathBuf>,
    },
    /// Write witness tables and per-sample margins as CSV.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long = "cert")]
        certs: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn from_bool(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = panic::catch_unwind(AssertUnwindSafe(|| run_in_pool(cli)));
    match result {
        Ok(Ok(Outcome::Pass)) => 0,
        Ok(Ok(Outcome::Fail)) => 1,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            2
        }
        Err(_) => {
            eprintln!("error: internal failure");
            2
        }
    }
}

fn thread_count() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(anyhow!("{THREADS_ENV}: {e}")),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(anyhow!("{THREADS_ENV} must be a positive integer, got `{raw}`")),
        },
    }
}

fn run_in_pool(cli: Cli) -> Result<Outcome> {
    match thread_count()? {
        None => dispatch(cli),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building worker pool")?
            .install(|| dispatch(cli)),
    }
}

struct Session {
    scenario: Scenario,
    prepared: Prepared,
    out_dir: PathBuf,
}

impl Session {
    fn open(common: &Common) -> Result<Self> {
        let text = fs::read_to_string(&common.scenario)
            .with_context(|| format!("reading {}", common.scenario.display()))?;
        let scenario = Scenario::parse(&text).with_context(|| format!("in {}", common.scenario.display()))?;
        let prepared = scenario.prepare()?;
        let out_dir = match (&common.out_dir, &scenario.output_dir) {
            (Some(dir), _) => dir.clone(),
            (None, Some(dir)) => PathBuf::from(dir),
            (None, None) => PathBuf::from("."),
        };
        Ok(Self { scenario, prepared, out_dir })
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        fs::create_dir_all(&self.out_dir).with_context(|| format!("creating {}", self.out_dir.display()))?;
        output::write_json(&self.out_dir.join(name), value)
    }

    fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        fs::create_dir_all(&self.out_dir).with_context(|| format!("creating {}", self.out_dir.display()))?;
        output::write_csv(&self.out_dir.join(name), header, rows)
    }
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Laws(common) => run_laws(&Session::open(&common)?),
        Command::Estimate { common, property } => {
            let property = parse_property(&property)?;
            run_estimate(&Session::open(&common)?, property)
        }
        Command::Check { common, property, cert } => {
            let property = parse_property(&property)?;
            let cert = load_certificate(&cert)?;
            run_check(&Session::open(&common)?, property, &cert)
        }
        Command::Theorem { common, theorem, certs } => {
            let id: TheoremId = theorem.parse()?;
            let certs = certs.iter().map(|p| load_certificate(p)).collect::<Result<Vec<_>>>()?;
            run_theorem(&Session::open(&common)?, id, certs)
        }
        Command::Report { common, certs } => {
            if certs.is_empty() {
                bail!("report needs at least one --cert input");
            }
            let certs = certs.iter().map(|p| load_certificate(p)).collect::<Result<Vec<_>>>()?;
            run_report(&Session::open(&common)?, &certs)
        }
    }
}

fn parse_property(name: &str) -> Result<Property> {
    name.parse::<Property>().map_err(|_| {
        anyhow!(
            "unsupported property `{name}` (expected one of: {})",
            Property::ALL.map(Property::cli_name).join(", ")
        )
    })
}

pub fn load_certificate(path: &Path) -> Result<Certificate> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing certificate {}", path.display()))
}

#[derive(Serialize)]
struct LawsDocument<'a> {
    grid_hash: String,
    reports: [&'a CheckReport; 2],
    verdict: &'static str,
}

fn verdict_str(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

fn run_laws(session: &Session) -> Result<Outcome> {
    let Prepared { xi, grid, settings } = &session.prepared;
    let semiflow = check_semiflow_laws(xi, grid, settings.margin_tol)?;
    let cocycle = check_cocycle_laws(xi, grid, settings.margin_tol)?;
    let pass = semiflow.passed() && cocycle.passed();
    session.write_json(
        "laws_report.json",
        &LawsDocument { grid_hash: grid.hash(), reports: [&semiflow, &cocycle], verdict: verdict_str(pass) },
    )?;
    for r in [&semiflow, &cocycle] {
        println!("{}: {} (worst margin {})", r.check, verdict_str(r.passed()), format_float(r.worst_margin));
    }
    Ok(Outcome::from_bool(pass))
}

#[derive(Serialize)]
struct FitsDocument<'a> {
    grid_hash: String,
    growth_cap: f64,
    result: &'static str,
    fits: &'a [NuFit],
}

fn run_estimate(session: &Session, property: Property) -> Result<Outcome> {
    let Prepared { xi, grid, settings } = &session.prepared;
    let body =
        match property {
            Property::Decay => CertificateBody::Decay(estimate_decay(xi, grid)?),
            Property::Instability => {
                CertificateBody::Instability(estimate_instability(xi, grid, settings.headroom)?)
            }
            Property::IntegralInstability => CertificateBody::IntegralInstability(
                estimate_integral_instability(xi, grid, &settings.quad, settings.headroom)?,
            ),
            Property::ExpInstability => {
                let est = estimate_exp_instability(
                    xi,
                    grid,
                    &settings.nu_candidates,
                    settings.growth_cap,
                    settings.headroom,
                )?;
                session.write_json(
                    &format!("fits_{property}.json"),
                    &FitsDocument {
                        grid_hash: grid.hash(),
                        growth_cap: settings.growth_cap,
                        result: if est.certificate().is_some() { "certified" } else { "no-certificate" },
                        fits: est.fits(),
                    },
                )?;
                match est {
                    ExpEstimate::Certified { cert, .. } => CertificateBody::ExpInstability(cert),
                    ExpEstimate::NoCertificate { .. } => {
                        println!("{property}: no-certificate on this grid");
                        return Ok(Outcome::Fail);
                    }
                }
            }
        };
    let cert = Certificate::fitted(body, grid.hash(), xi.shift());
    session.write_json(&format!("cert_{property}.json"), &cert)?;
    println!("{property}: certificate written ({})", cert.body.form());
    Ok(Outcome::Pass)
}

#[derive(Serialize)]
struct CheckDocument<'a> {
    property: &'static str,
    certificate_grid_hash: Option<&'a str>,
    certificate_shift: f64,
    model_shift: f64,
    report: &'a CheckReport,
}

fn check_certificate(prepared: &Prepared, cert: &Certificate) -> Result<CheckReport> {
    let Prepared { xi, grid, settings } = prepared;
    let tol = settings.margin_tol;
    Ok(match &cert.body {
        CertificateBody::Decay(c) => check_decay(xi, c, grid, tol)?,
        CertificateBody::Instability(c) => check_instability(xi, c, grid, tol)?,
        CertificateBody::ExpInstability(c) => check_exp_instability(xi, c, grid, tol)?,
        CertificateBody::IntegralInstability(c) => {
            check_integral_instability(xi, c, grid, &settings.quad, tol)?
        }
    })
}

fn run_check(session: &Session, property: Property, cert: &Certificate) -> Result<Outcome> {
    cert.expect(property)?;
    let report = check_certificate(&session.prepared, cert)?;
    session.write_json(
        &format!("check_{property}.json"),
        &CheckDocument {
            property: property.kind(),
            certificate_grid_hash: cert.grid_hash.as_deref(),
            certificate_shift: cert.shift,
            model_shift: session.prepared.xi.shift(),
            report: &report,
        },
    )?;
    println!(
        "{property}: {} ({} samples, {} counterexamples, worst margin {})",
        verdict_str(report.passed()),
        report.samples_checked,
        report.counterexamples.len(),
        format_float(report.worst_margin)
    );
    Ok(Outcome::from_bool(report.passed()))
}

fn pick(certs: &BTreeMap<Property, Certificate>, property: Property, id: TheoremId) -> Result<&Certificate> {
    certs
        .get(&property)
        .ok_or_else(|| anyhow!("theorem {id} needs a {} certificate (--cert)", property.kind()))
}

fn run_theorem(session: &Session, id: TheoremId, certs: Vec<Certificate>) -> Result<Outcome> {
    let mut by_kind = BTreeMap::new();
    for cert in certs {
        let property = cert.property();
        if by_kind.insert(property, cert).is_some() {
            bail!("more than one {} certificate given", property.kind());
        }
    }
    let Prepared { xi, grid, settings } = &session.prepared;
    let c = |p| pick(&by_kind, p, id);
    let run: TheoremRun = match id {
        TheoremId::RemarkObs2 => theorems::remark_obs2(xi, grid, c(Property::ExpInstability)?, settings)?,
        TheoremId::PropIntegralDecay => theorems::prop_integral_decay_to_instability(
            xi,
            grid,
            c(Property::Decay)?,
            c(Property::IntegralInstability)?,
            settings,
        )?,
        TheoremId::PropShiftNecessity => {
            theorems::prop_shift_necessity(xi, grid, c(Property::ExpInstability)?, settings)?
        }
        TheoremId::PropShiftSufficiency => theorems::prop_shift_sufficiency(
            xi,
            grid,
            session.scenario.alpha,
            c(Property::IntegralInstability)?,
            c(Property::Decay)?,
            settings,
        )?,
        TheoremId::Thm1Necessity => {
            theorems::thm1_necessity(xi, grid, c(Property::ExpInstability)?, settings)?
        }
        TheoremId::Thm1Sufficiency => theorems::thm1_sufficiency(
            xi,
            grid,
            c(Property::Instability)?,
            c(Property::IntegralInstability)?,
            settings,
        )?,
        TheoremId::Thm2 => theorems::thm2_validate(
            xi,
            grid,
            c(Property::Decay)?,
            c(Property::IntegralInstability)?,
            settings,
        )?,
        TheoremId::Corollary => theorems::corollary_equivalence(xi, grid, settings)?,
    };
    session.write_json(&format!("theorem_{id}.json"), &run)?;
    let verdict = serde_json::to_value(run.verdict)?;
    println!("{id}: {}", verdict.as_str().unwrap_or("?"));
    for note in &run.notes {
        println!("  note: {note}");
    }
    Ok(Outcome::from_bool(run.passed()))
}

fn cell(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn margins_of(prepared: &Prepared, cert: &Certificate) -> Result<Vec<SampleMargin>> {
    let Prepared { xi, grid, settings } = prepared;
    Ok(match &cert.body {
        CertificateBody::Decay(c) => decay_margins(xi, c, grid)?,
        CertificateBody::Instability(c) => instability_margins(xi, c, grid)?,
        CertificateBody::ExpInstability(c) => exp_instability_margins(xi, c, grid, SampleScope::All)?,
        CertificateBody::IntegralInstability(c) => integral_instability_margins(xi, c, grid, &settings.quad)?,
    })
}

fn run_report(session: &Session, certs: &[Certificate]) -> Result<Outcome> {
    let prepared = &session.prepared;
    let grid = &prepared.grid;
    let mut decay = None;
    let mut n = None;
    let mut m = None;
    let mut exp = None;
    for cert in certs {
        match &cert.body {
            CertificateBody::Decay(c) => decay = Some(c),
            CertificateBody::Instability(c) => n = Some(c),
            CertificateBody::ExpInstability(c) => exp = Some(c),
            CertificateBody::IntegralInstability(c) => m = Some(c),
        }
    }
    let rows: Vec<Vec<String>> = grid
        .times()
        .iter()
        .map(|&t| {
            vec![
                format_float(t),
                cell(decay.and_then(|c| c.value_at(t))),
                cell(n.and_then(|c| c.n.value_at(t))),
                cell(m.and_then(|c| c.m.value_at(t))),
                cell(exp.and_then(|c| c.n.value_at(t))),
                cell(exp.map(|c| c.nu)),
            ]
        })
        .collect();
    session.write_csv("witness_tables.csv", &["t", "f_hat", "N_hat", "M_hat", "N_exp_hat", "nu"], &rows)?;

    let mut margin_rows = Vec::new();
    let mut all_pass = true;
    for cert in certs {
        let margins = margins_of(prepared, cert)?;
        let report =
            CheckReport::from_margins(cert.property().kind(), grid, prepared.settings.margin_tol, &margins);
        all_pass &= report.passed();
        for sm in margins {
            let s = sm.sample;
            let v = grid.vectors()[s.v].components().iter().map(|c| format_float(*c)).collect::<Vec<_>>();
            margin_rows.push(vec![
                cert.property().kind().to_string(),
                format_float(s.t),
                cell(s.s),
                format_float(s.t0),
                grid.base_points()[s.x].to_string(),
                v.join(" "),
                sm.margin.map(format_float).unwrap_or_else(|| "skipped".into()),
            ]);
        }
    }
    session.write_csv("margins.csv", &["property", "t", "s", "t0", "x", "v", "margin"], &margin_rows)?;
    println!("report: witness_tables.csv, margins.csv ({} margin rows)", margin_rows.len());
    Ok(Outcome::from_bool(all_pass))
}
