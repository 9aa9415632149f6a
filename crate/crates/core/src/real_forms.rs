//! Real semisimple and reductive group data: symmetric-space dimension,
//! complex ranks, deficiency and fundamental rank.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::root_data::CartanType;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RealFormError {
    #[error("unknown real-form family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameters for {family}: {reason}")]
    InvalidParams { family: String, reason: String },
    #[error("malformed real-form spec `{0}`")]
    Malformed(String),
}

/// A real form named by family and parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FormSpec {
    /// SL(n, ℝ)
    SL(u32),
    /// SO(p, q)
    SO(u32, u32),
    /// SU(p, q)
    SU(u32, u32),
    /// Sp(n, ℝ), rank n
    Sp(u32),
    /// SO*(2n)
    SOStar(u32),
    /// A complex simple group regarded as a real group.
    Complex(CartanType, usize),
    Compact(CartanType, usize),
    Euclidean(u32),
    Product(Vec<FormSpec>),
}

impl fmt::Display for FormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormSpec::SL(n) => write!(f, "SL,{n}"),
            FormSpec::SO(p, q) => write!(f, "SO,{p},{q}"),
            FormSpec::SU(p, q) => write!(f, "SU,{p},{q}"),
            FormSpec::Sp(n) => write!(f, "Sp,{n}"),
            FormSpec::SOStar(n) => write!(f, "SOstar,{n}"),
            FormSpec::Complex(t, r) => write!(f, "complex,{t},{r}"),
            FormSpec::Compact(t, r) => write!(f, "compact,{t},{r}"),
            FormSpec::Euclidean(d) => write!(f, "euclidean,{d}"),
            FormSpec::Product(fs) => {
                let parts: Vec<String> = fs.iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join("*"))
            }
        }
    }
}

impl FromStr for FormSpec {
    type Err = RealFormError;

    /// Parses `FAMILY,p1,p2` with factors of a product joined by `*`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.contains('*') {
            let factors = s.split('*').map(FormSpec::from_str).collect::<Result<Vec<_>, _>>()?;
            return Ok(FormSpec::Product(factors));
        }
        let mut parts = s.split([',', ' ']).filter(|p| !p.is_empty());
        let family = parts.next().ok_or_else(|| RealFormError::Malformed(s.to_string()))?;
        let rest: Vec<&str> = parts.collect();
        FormSpec::parse_parts(family, &rest)
    }
}

impl FormSpec {
    /// Builds a spec from a family name and its textual parameters.
    pub fn parse_parts(family: &str, params: &[&str]) -> Result<Self, RealFormError> {
        let ints = |expect: usize| -> Result<Vec<u32>, RealFormError> {
            if params.len() != expect {
                return Err(RealFormError::InvalidParams {
                    family: family.to_string(),
                    reason: format!("expected {expect} parameter(s), got {}", params.len()),
                });
            }
            params
                .iter()
                .map(|p| {
                    p.trim().parse::<u32>().map_err(|_| RealFormError::InvalidParams {
                        family: family.to_string(),
                        reason: format!("`{p}` is not a nonnegative integer"),
                    })
                })
                .collect()
        };
        let typed = || -> Result<(CartanType, usize), RealFormError> {
            if params.len() != 2 {
                return Err(RealFormError::InvalidParams {
                    family: family.to_string(),
                    reason: "expected a Cartan type and a rank".into(),
                });
            }
            let t = params[0].parse::<CartanType>().map_err(|e| RealFormError::InvalidParams {
                family: family.to_string(),
                reason: e.to_string(),
            })?;
            let r = params[1].trim().parse::<usize>().map_err(|_| RealFormError::InvalidParams {
                family: family.to_string(),
                reason: format!("bad rank `{}`", params[1]),
            })?;
            Ok((t, r))
        };
        match family.to_ascii_lowercase().as_str() {
            "sl" => Ok(FormSpec::SL(ints(1)?[0])),
            "so" => {
                let v = ints(2)?;
                Ok(FormSpec::SO(v[0], v[1]))
            }
            "su" => {
                let v = ints(2)?;
                Ok(FormSpec::SU(v[0], v[1]))
            }
            "sp" => Ok(FormSpec::Sp(ints(1)?[0])),
            "sostar" | "so*" => Ok(FormSpec::SOStar(ints(1)?[0])),
            "complex" => typed().map(|(t, r)| FormSpec::Complex(t, r)),
            "compact" => typed().map(|(t, r)| FormSpec::Compact(t, r)),
            "euclidean" | "e" => Ok(FormSpec::Euclidean(ints(1)?[0])),
            _ => Err(RealFormError::UnknownFamily(family.to_string())),
        }
    }

    /// Conventional name, e.g. `SO(3,3)`.
    pub fn name(&self) -> String {
        match self {
            FormSpec::SL(n) => format!("SL({n},R)"),
            FormSpec::SO(p, q) => format!("SO({p},{q})"),
            FormSpec::SU(p, q) => format!("SU({p},{q})"),
            FormSpec::Sp(n) => format!("Sp({n},R)"),
            FormSpec::SOStar(n) => format!("SO*({})", 2 * n),
            FormSpec::Complex(t, r) => format!("{t}{r}(C)"),
            FormSpec::Compact(t, r) => format!("compact {t}{r}"),
            FormSpec::Euclidean(d) => format!("R^{d}"),
            FormSpec::Product(fs) => fs.iter().map(|f| f.name()).collect::<Vec<_>>().join(" x "),
        }
    }
}

impl Serialize for FormSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FormSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealFormData {
    pub name: String,
    pub spec: FormSpec,
    pub dim_x: u32,
    pub rank_c: u32,
    pub rank_k: u32,
    /// δ = rank_C(G) − rank_C(K).
    pub deficiency: u32,
    pub f_rank: u32,
    pub compact: bool,
    pub abelian: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<RealFormData>,
}

impl RealFormData {
    pub fn is_noncompact_nonabelian(&self) -> bool {
        !self.compact && !self.abelian
    }

    /// Factors of a product, or the form itself.
    pub fn simple_factors(&self) -> Vec<&RealFormData> {
        if self.factors.is_empty() {
            vec![self]
        } else {
            self.factors.iter().flat_map(|f| f.simple_factors()).collect()
        }
    }
}

fn invalid(family: &str, reason: impl Into<String>) -> RealFormError {
    RealFormError::InvalidParams { family: family.to_string(), reason: reason.into() }
}

fn leaf(spec: &FormSpec, dim_x: u32, rank_c: u32, rank_k: u32) -> RealFormData {
    let deficiency = rank_c - rank_k;
    RealFormData {
        name: spec.name(),
        spec: spec.clone(),
        dim_x,
        rank_c,
        rank_k,
        deficiency,
        f_rank: deficiency,
        compact: dim_x == 0,
        abelian: false,
        factors: Vec::new(),
    }
}

/// Populates dimension and rank data from closed-form tables.
pub fn derive(spec: &FormSpec) -> Result<RealFormData, RealFormError> {
    Ok(match *spec {
        FormSpec::SL(n) => {
            if n < 2 {
                return Err(invalid("SL", "n must be at least 2"));
            }
            leaf(spec, n * (n + 1) / 2 - 1, n - 1, n / 2)
        }
        FormSpec::SO(p, q) => {
            if p + q < 2 || (p == 1 && q == 1) {
                return Err(invalid("SO", "SO(p,q) needs p+q >= 2 and is abelian for (1,1)"));
            }
            leaf(spec, p * q, (p + q) / 2, p / 2 + q / 2)
        }
        FormSpec::SU(p, q) => {
            if p + q < 2 {
                return Err(invalid("SU", "p+q must be at least 2"));
            }
            leaf(spec, 2 * p * q, p + q - 1, p + q - 1)
        }
        FormSpec::Sp(n) => {
            if n < 1 {
                return Err(invalid("Sp", "n must be at least 1"));
            }
            leaf(spec, n * (n + 1), n, n)
        }
        FormSpec::SOStar(n) => {
            if n < 2 {
                return Err(invalid("SOstar", "SO*(2n) needs n >= 2"));
            }
            leaf(spec, n * (n - 1), n, n)
        }
        FormSpec::Complex(t, r) => {
            if !t.valid_rank(r) {
                return Err(invalid("complex", format!("rank {r} invalid for type {t}")));
            }
            let r32 = r as u32;
            let dim = 2 * t.positive_root_count(r) as u32 + r32;
            leaf(spec, dim, 2 * r32, r32)
        }
        FormSpec::Compact(t, r) => {
            if !t.valid_rank(r) {
                return Err(invalid("compact", format!("rank {r} invalid for type {t}")));
            }
            leaf(spec, 0, r as u32, r as u32)
        }
        FormSpec::Euclidean(d) => RealFormData {
            name: spec.name(),
            spec: spec.clone(),
            dim_x: d,
            rank_c: 0,
            rank_k: 0,
            deficiency: 0,
            f_rank: d,
            compact: d == 0,
            abelian: true,
            factors: Vec::new(),
        },
        FormSpec::Product(ref fs) => {
            if fs.is_empty() {
                return Err(invalid("product", "no factors"));
            }
            let factors = fs.iter().map(derive).collect::<Result<Vec<_>, _>>()?;
            RealFormData {
                name: spec.name(),
                spec: spec.clone(),
                dim_x: factors.iter().map(|f| f.dim_x).sum(),
                rank_c: factors.iter().map(|f| f.rank_c).sum(),
                rank_k: factors.iter().map(|f| f.rank_k).sum(),
                deficiency: factors.iter().map(|f| f.deficiency).sum(),
                f_rank: factors.iter().map(|f| f.f_rank).sum(),
                compact: factors.iter().all(|f| f.compact),
                abelian: factors.iter().all(|f| f.abelian || f.compact),
                factors,
            }
        }
    })
}

/// Derives from a family name and textual parameters, as typed on a command line.
pub fn derive_named(family: &str, params: &[&str]) -> Result<RealFormData, RealFormError> {
    derive(&FormSpec::parse_parts(family, params)?)
}

/// Middle dimension q with dim X ∈ {2q, 2q+1}.
pub fn middle_dimension(g: &RealFormData) -> u32 {
    g.dim_x / 2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub family: String,
    pub params: Vec<String>,
    pub dim_x: String,
    pub rank_c: String,
    pub rank_k: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Catalog {
    pub version: u32,
    pub families: Vec<FamilyRecord>,
    pub forms: Vec<FormSpec>,
}

const CATALOG_JSON: &str = include_str!("../data/real_forms.json");

/// The shipped catalog of families and sample forms.
pub fn catalog() -> Catalog {
    serde_json::from_str(CATALOG_JSON).expect("bundled catalog is valid JSON")
}
