//! Witness objects for the four asymptotic properties, grid estimators that fit them, and
//! sample-by-sample checkers. All margins are log-scale.

mod decay;
mod exp_instability;
mod instability;
mod integral;
pub(crate) mod trajectory;
mod witness;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub(crate) use decay::log_decay_profile;
pub use decay::{check_decay, decay_margins, decay_to_exponential, estimate_decay, DecayCertificate};
pub use exp_instability::{
    check_exp_instability, check_exp_instability_scoped, estimate_exp_instability, exp_instability_margins,
    ExpEstimate, ExpInstabilityCertificate, NuFit, SampleScope, Selection, SELECTION_RULE,
};
pub use instability::{check_instability, estimate_instability, instability_margins, InstabilityCertificate};
pub use integral::{
    check_integral_instability, estimate_integral_instability, integral_instability_margins,
    IntegralInstabilityCertificate,
};
pub use witness::{Table, Witness};

use crate::error::{LabError, Result};
use crate::numeric::exp_ceil;
use crate::quadrature::QuadratureConfig;
use crate::TOOL_VERSION;

/// How a fitted upper witness is pushed into its codomain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Clamp {
    /// `(1 + h) max(1, W)`, then strictly above 1.
    AboveOne,
    /// `max(1, (1 + h) W)`.
    AtLeastOne,
}

/// Tabulates `exp` of the per-time log requirements with headroom, rounding up so that
/// `ln(value)` never falls below the requirement it covers.
pub(crate) fn upper_witness(times: &[f64], req: &[f64], headroom: f64, clamp: Clamp) -> Result<Witness> {
    let lift = headroom.ln_1p();
    let values = req
        .iter()
        .map(|&r| {
            let value = match clamp {
                Clamp::AboveOne => exp_ceil(lift + r.max(0.0)).max(1f64.next_up()),
                Clamp::AtLeastOne => exp_ceil((lift + r).max(0.0)),
            };
            if value.is_finite() {
                Ok(value)
            } else {
                Err(LabError::ModelDegeneracy(format!("witness overflows (ln = {r})")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Witness::Tabulated(Table::new(times.to_vec(), values)?))
}

/// The four properties, named as on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    Decay,
    Instability,
    ExpInstability,
    IntegralInstability,
}

impl Property {
    pub const ALL: [Property; 4] =
        [Property::Decay, Property::Instability, Property::ExpInstability, Property::IntegralInstability];

    pub fn cli_name(self) -> &'static str {
        match self {
            Property::Decay => "decay",
            Property::Instability => "instability",
            Property::ExpInstability => "exp-instability",
            Property::IntegralInstability => "integral-instability",
        }
    }

    /// The `kind` tag in certificate documents.
    pub fn kind(self) -> &'static str {
        match self {
            Property::Decay => "decay",
            Property::Instability => "instability",
            Property::ExpInstability => "exp_instability",
            Property::IntegralInstability => "integral_instability",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for Property {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Property::ALL
            .into_iter()
            .find(|p| p.cli_name() == s || p.kind() == s)
            .ok_or_else(|| LabError::Precondition(format!("unsupported property `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertificateBody {
    Decay(DecayCertificate),
    Instability(InstabilityCertificate),
    ExpInstability(ExpInstabilityCertificate),
    IntegralInstability(IntegralInstabilityCertificate),
}

impl CertificateBody {
    pub fn property(&self) -> Property {
        match self {
            CertificateBody::Decay(_) => Property::Decay,
            CertificateBody::Instability(_) => Property::Instability,
            CertificateBody::ExpInstability(_) => Property::ExpInstability,
            CertificateBody::IntegralInstability(_) => Property::IntegralInstability,
        }
    }

    pub fn form(&self) -> &'static str {
        match self {
            CertificateBody::Decay(c) => c.form(),
            CertificateBody::Instability(c) => c.n.form(),
            CertificateBody::ExpInstability(c) => c.n.form(),
            CertificateBody::IntegralInstability(c) => c.m.form(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CertificateBody::Decay(c) => c.validate(),
            CertificateBody::Instability(c) => c.validate(),
            CertificateBody::ExpInstability(c) => c.validate(),
            CertificateBody::IntegralInstability(c) => c.validate(),
        }
    }
}

/// A certificate document: the witness plus provenance. `shift` is the `gamma` of the
/// shifted cocycle the witness refers to (0 for the unshifted model).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CertificateDoc", into = "CertificateDoc")]
pub struct Certificate {
    pub body: CertificateBody,
    pub grid_hash: Option<String>,
    pub tool_version: String,
    pub shift: f64,
}

impl Certificate {
    pub fn new(body: CertificateBody) -> Self {
        Self { body, grid_hash: None, tool_version: TOOL_VERSION.to_string(), shift: 0.0 }
    }

    pub fn fitted(body: CertificateBody, grid_hash: String, shift: f64) -> Self {
        Self { grid_hash: Some(grid_hash), shift, ..Self::new(body) }
    }

    pub fn property(&self) -> Property {
        self.body.property()
    }

    pub fn expect(&self, property: Property) -> Result<&CertificateBody> {
        if self.property() == property {
            Ok(&self.body)
        } else {
            Err(LabError::InvalidCertificate(format!(
                "expected a {} certificate, found {}",
                property.kind(),
                self.property().kind()
            )))
        }
    }

    pub fn as_decay(&self) -> Result<&DecayCertificate> {
        match self.expect(Property::Decay)? {
            CertificateBody::Decay(c) => Ok(c),
            _ => unreachable!(),
        }
    }

    pub fn as_instability(&self) -> Result<&InstabilityCertificate> {
        match self.expect(Property::Instability)? {
            CertificateBody::Instability(c) => Ok(c),
            _ => unreachable!(),
        }
    }

    pub fn as_exp_instability(&self) -> Result<&ExpInstabilityCertificate> {
        match self.expect(Property::ExpInstability)? {
            CertificateBody::ExpInstability(c) => Ok(c),
            _ => unreachable!(),
        }
    }

    pub fn as_integral_instability(&self) -> Result<&IntegralInstabilityCertificate> {
        match self.expect(Property::IntegralInstability)? {
            CertificateBody::IntegralInstability(c) => Ok(c),
            _ => unreachable!(),
        }
    }
}

/// Flat wire form. Fields that do not belong to the given kind and form are rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateDoc {
    kind: String,
    form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_tilde: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    n: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    selection: Option<Selection>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    m: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quad: Option<QuadratureConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tool_version: Option<String>,
    #[serde(default)]
    shift: f64,
}

impl From<Certificate> for CertificateDoc {
    fn from(c: Certificate) -> Self {
        let mut doc = CertificateDoc {
            kind: c.property().kind().to_string(),
            form: c.body.form().to_string(),
            grid_hash: c.grid_hash,
            tool_version: Some(c.tool_version),
            shift: c.shift,
            ..Default::default()
        };
        match c.body {
            CertificateBody::Decay(DecayCertificate::Parametric { n_tilde, omega }) => {
                doc.n_tilde = Some(n_tilde);
                doc.omega = Some(omega);
            }
            CertificateBody::Decay(DecayCertificate::Tabulated { table }) => {
                doc.times = Some(table.times);
                doc.values = Some(table.values);
            }
            CertificateBody::Decay(DecayCertificate::Constant { value }) => doc.value = Some(value),
            CertificateBody::Instability(c) => doc.n = Some(c.n),
            CertificateBody::ExpInstability(c) => {
                doc.n = Some(c.n);
                doc.nu = Some(c.nu);
                doc.selection = c.selection;
            }
            CertificateBody::IntegralInstability(c) => {
                doc.m = Some(c.m);
                doc.quad = c.quad;
            }
        }
        doc
    }
}

fn required<T>(field: Option<T>, name: &str, kind: &str) -> Result<T> {
    field.ok_or_else(|| LabError::InvalidCertificate(format!("{kind} certificate needs `{name}`")))
}

impl TryFrom<CertificateDoc> for Certificate {
    type Error = LabError;

    fn try_from(doc: CertificateDoc) -> Result<Self> {
        let property = Property::from_str(&doc.kind)
            .map_err(|_| LabError::InvalidCertificate(format!("unknown kind `{}`", doc.kind)))?;
        let kind = property.kind();
        let present: [(&str, bool); 10] = [
            ("n_tilde", doc.n_tilde.is_some()),
            ("omega", doc.omega.is_some()),
            ("value", doc.value.is_some()),
            ("times", doc.times.is_some()),
            ("values", doc.values.is_some()),
            ("N", doc.n.is_some()),
            ("nu", doc.nu.is_some()),
            ("selection", doc.selection.is_some()),
            ("M", doc.m.is_some()),
            ("quad", doc.quad.is_some()),
        ];
        let allowed: &[&str] = match (property, doc.form.as_str()) {
            (Property::Decay, "parametric") => &["n_tilde", "omega"],
            (Property::Decay, "tabulated") => &["times", "values"],
            (Property::Decay, "constant") => &["value"],
            (Property::Instability, _) => &["N"],
            (Property::ExpInstability, _) => &["N", "nu", "selection"],
            (Property::IntegralInstability, _) => &["M", "quad"],
            (_, form) => return Err(LabError::InvalidCertificate(format!("unknown {kind} form `{form}`"))),
        };
        if let Some((name, _)) = present.iter().find(|(name, on)| *on && !allowed.contains(name)) {
            return Err(LabError::InvalidCertificate(format!(
                "field `{name}` does not belong to a {} {kind} certificate",
                doc.form
            )));
        }
        let body = match property {
            Property::Decay => CertificateBody::Decay(match doc.form.as_str() {
                "parametric" => DecayCertificate::Parametric {
                    n_tilde: required(doc.n_tilde, "n_tilde", kind)?,
                    omega: required(doc.omega, "omega", kind)?,
                },
                "tabulated" => DecayCertificate::Tabulated {
                    table: Table::new(
                        required(doc.times, "times", kind)?,
                        required(doc.values, "values", kind)?,
                    )?,
                },
                _ => DecayCertificate::Constant { value: required(doc.value, "value", kind)? },
            }),
            Property::Instability => {
                CertificateBody::Instability(InstabilityCertificate { n: required(doc.n, "N", kind)? })
            }
            Property::ExpInstability => CertificateBody::ExpInstability(ExpInstabilityCertificate {
                n: required(doc.n, "N", kind)?,
                nu: required(doc.nu, "nu", kind)?,
                selection: doc.selection,
            }),
            Property::IntegralInstability => {
                if let Some(q) = &doc.quad {
                    q.validate()?;
                }
                CertificateBody::IntegralInstability(IntegralInstabilityCertificate {
                    m: required(doc.m, "M", kind)?,
                    quad: doc.quad,
                })
            }
        };
        if body.form() != doc.form {
            return Err(LabError::InvalidCertificate(format!(
                "form `{}` does not match the {} witness",
                doc.form,
                body.form()
            )));
        }
        body.validate()?;
        if !doc.shift.is_finite() {
            return Err(LabError::InvalidCertificate("shift must be finite".into()));
        }
        Ok(Certificate {
            body,
            grid_hash: doc.grid_hash,
            tool_version: doc.tool_version.unwrap_or_else(|| TOOL_VERSION.to_string()),
            shift: doc.shift,
        })
    }
}
