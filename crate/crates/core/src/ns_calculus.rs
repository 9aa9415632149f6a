//! Novikov-Shubin value arithmetic, uniform-lattice profiles, the product
//! formula, and the ℚ-rank-one upper bound with its certificate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Add;

use num_rational::Rational64;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::Certificate;
use crate::parabolic::{levi_deficiency, ParabolicError, StandardParabolic};
use crate::real_forms::{middle_dimension, RealFormData};
use crate::tits_index::RestrictedRootSystem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NsError {
    #[error("exact profiles required: degree {degree} carries only an upper bound")]
    ExactProfilesRequired { degree: u32 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not L²-acyclic, bound not applicable ({0})")]
    NotAcyclic(String),
    #[error(transparent)]
    Parabolic(#[from] ParabolicError),
    #[error("certificate failure at step `{step}`: {reason}")]
    CertificateFailure { step: String, reason: String },
    #[error("invalid value `{0}`")]
    InvalidValue(String),
}

/// An element of [0, ∞] ∪ {∞⁺}, ordered r < ∞ < ∞⁺.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NSValue {
    Finite(Rational64),
    Infinity,
    /// Formal symbol for a spectral gap at zero.
    InfinityPlus,
}

impl NSValue {
    pub fn int(v: i64) -> Self {
        NSValue::Finite(Rational64::from_integer(v))
    }

    pub fn finite(num: i64, den: i64) -> Self {
        NSValue::Finite(Rational64::new(num, den))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, NSValue::Finite(_))
    }

    /// ½·x; fixes ∞ and ∞⁺.
    pub fn half(self) -> Self {
        match self {
            NSValue::Finite(r) => NSValue::Finite(r / 2),
            other => other,
        }
    }
}

impl Add for NSValue {
    type Output = NSValue;

    fn add(self, rhs: NSValue) -> NSValue {
        use NSValue::*;
        match (self, rhs) {
            (InfinityPlus, _) | (_, InfinityPlus) => InfinityPlus,
            (Infinity, _) | (_, Infinity) => Infinity,
            (Finite(a), Finite(b)) => Finite(a + b),
        }
    }
}

impl fmt::Display for NSValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NSValue::Finite(r) if r.is_integer() => write!(f, "{}", r.numer()),
            NSValue::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            NSValue::Infinity => f.write_str("inf"),
            NSValue::InfinityPlus => f.write_str("inf+"),
        }
    }
}

impl std::str::FromStr for NSValue {
    type Err = NsError;

    fn from_str(s: &str) -> Result<Self, NsError> {
        let bad = || NsError::InvalidValue(s.to_string());
        match s.trim() {
            "inf" | "∞" => Ok(NSValue::Infinity),
            "inf+" | "∞⁺" | "∞+" => Ok(NSValue::InfinityPlus),
            t => {
                let r: Rational64 = t.parse().map_err(|_| bad())?;
                if r.is_negative() {
                    return Err(bad());
                }
                Ok(NSValue::Finite(r))
            }
        }
    }
}

impl Serialize for NSValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            NSValue::Finite(r) if r.is_integer() => s.serialize_i64(*r.numer()),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for NSValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) if v >= 0 => Ok(NSValue::int(v)),
            Raw::Int(v) => Err(serde::de::Error::custom(format!("negative value {v}"))),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Minimum of an iterator of values; ∞⁺ when empty.
pub fn ns_min(values: impl IntoIterator<Item = NSValue>) -> NSValue {
    values.into_iter().min().unwrap_or(NSValue::InfinityPlus)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaEntry {
    Exact { value: NSValue },
    /// Only α ≤ value is known; `strict_positive` records 0 < α.
    UpperBound { value: NSValue, strict_positive: bool },
}

impl AlphaEntry {
    pub fn exact(&self) -> Option<NSValue> {
        match self {
            AlphaEntry::Exact { value } => Some(*value),
            AlphaEntry::UpperBound { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NSProfile {
    pub dim: u32,
    pub betti_nonzero: BTreeSet<u32>,
    /// Degrees p ≥ 1 that are not ∞⁺; every other degree is ∞⁺.
    pub alpha: BTreeMap<u32, AlphaEntry>,
}

impl NSProfile {
    /// A profile with trivial Betti numbers and a spectral gap in every degree.
    pub fn gapped(dim: u32) -> Self {
        NSProfile { dim, betti_nonzero: BTreeSet::new(), alpha: BTreeMap::new() }
    }

    pub fn entry(&self, p: u32) -> AlphaEntry {
        match self.alpha.get(&p) {
            Some(e) if p >= 1 && p <= self.dim => e.clone(),
            _ => AlphaEntry::Exact { value: NSValue::InfinityPlus },
        }
    }

    /// Exact α_p; α_0 and out-of-range degrees are ∞⁺.
    pub fn alpha(&self, p: u32) -> Result<NSValue, NsError> {
        self.entry(p).exact().ok_or(NsError::ExactProfilesRequired { degree: p })
    }

    pub fn betti(&self, p: u32) -> bool {
        self.betti_nonzero.contains(&p)
    }

    pub fn is_exact(&self) -> bool {
        self.alpha.values().all(|e| e.exact().is_some())
    }

    fn first_bound_degree(&self) -> Option<u32> {
        self.alpha.iter().find(|(_, e)| e.exact().is_none()).map(|(p, _)| *p)
    }
}

/// Profile of a uniform lattice in a group with symmetric space of
/// dimension `n` and deficiency `m`.
pub fn olbrich_profile(n: u32, m: u32) -> NSProfile {
    let mut profile = NSProfile::gapped(n);
    if m == 0 {
        if n.is_multiple_of(2) {
            profile.betti_nonzero.insert(n / 2);
        }
        return profile;
    }
    // window [(n−m)/2 + 1, (n+m)/2], computed in half-units
    let lo = Rational64::new(n as i64 - m as i64, 2) + 1;
    let hi = Rational64::new(n as i64 + m as i64, 2);
    for p in 1..=n {
        let pr = Rational64::from_integer(p as i64);
        if pr >= lo && pr <= hi {
            profile.alpha.insert(p, AlphaEntry::Exact { value: NSValue::int(m as i64) });
        }
    }
    profile
}

/// Degrees where the uniform-lattice profile is finite.
pub fn olbrich_window(n: u32, m: u32) -> Vec<u32> {
    olbrich_profile(n, m).alpha.keys().copied().collect()
}

/// Upper-bound profile of a nilpotent group with growth degree `d`: 0 < α_p ≤ d for 1 ≤ p ≤ dim.
pub fn nilpotent_bound_profile(dim: u32, d: u64) -> NSProfile {
    let mut profile = NSProfile::gapped(dim);
    for p in 1..=dim {
        profile
            .alpha
            .insert(p, AlphaEntry::UpperBound { value: NSValue::int(d as i64), strict_positive: true });
    }
    profile
}

/// α̃_p = ½ min{α_p, α_{p+1}}.
pub fn tilde_alpha(profile: &NSProfile, p: u32) -> Result<NSValue, NsError> {
    Ok(profile.alpha(p)?.min(profile.alpha(p + 1)?).half())
}

/// α_q of a product, as the minimum over the four sets of the product formula.
pub fn product_alpha(a: &NSProfile, b: &NSProfile, q: u32) -> Result<NSValue, NsError> {
    if let Some(degree) = a.first_bound_degree().or_else(|| b.first_bound_degree()) {
        return Err(NsError::ExactProfilesRequired { degree });
    }
    let al = |p: u32| a.alpha(p).expect("checked exact");
    let bl = |p: u32| b.alpha(p).expect("checked exact");
    let mut candidates = Vec::new();
    for i in 0..q {
        candidates.push(al(i + 1) + bl(q - i));
    }
    for i in 1..q {
        candidates.push(al(i) + bl(q - i));
    }
    for i in 0..q {
        if a.betti(i) {
            candidates.push(bl(q - i));
        }
    }
    for i in 1..=q {
        if b.betti(q - i) {
            candidates.push(al(i));
        }
    }
    Ok(ns_min(candidates))
}

/// Checks whether q − ⌈dim N/2⌉ (dim X even) resp. q − ⌊dim N/2⌋ (dim X odd)
/// lies in [½(dim X_P − f) + 1, ½(dim X_P + f)], where dim N = n − 1 − dim X_P.
/// Returns `None` when f = 0 (the Betti branch applies instead) or when the
/// dimensions leave no room for N.
pub fn interval_lemma_check(dim_xp: u32, f: u32, n: u32) -> Option<bool> {
    interval_lemma_detail(dim_xp, f, n).map(|d| d.holds)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalCheck {
    pub nilpotent_degree: u32,
    pub boundary_degree: i64,
    pub lower: Rational64,
    pub upper: Rational64,
    pub holds: bool,
}

pub fn interval_lemma_detail(dim_xp: u32, f: u32, n: u32) -> Option<IntervalCheck> {
    if f == 0 || n < dim_xp + 1 {
        return None;
    }
    let dim_n = n - 1 - dim_xp;
    let q = n / 2;
    let i_star = if n.is_multiple_of(2) { dim_n.div_ceil(2) } else { dim_n / 2 };
    let value = q as i64 - i_star as i64;
    let lower = Rational64::new(dim_xp as i64 - f as i64, 2) + 1;
    let upper = Rational64::new(dim_xp as i64 + f as i64, 2);
    let v = Rational64::from_integer(value);
    Some(IntervalCheck {
        nilpotent_degree: i_star,
        boundary_degree: value,
        lower,
        upper,
        holds: lower <= v && v <= upper,
    })
}

/// The integers a boundary-component bound is derived from. Every field is
/// re-checked when the bound is replayed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryInputs {
    /// dim X of the ambient symmetric space.
    pub dim_x: u32,
    pub dim_n: u32,
    /// dim 𝔫_k for k = 1, 2, ...
    pub graded_dims: Vec<u32>,
    pub growth_degree: u64,
    pub dim_xp: u32,
    pub levi_f_rank: u32,
    pub levi_deficiency: u32,
    /// dim of the euclidean factor of X_P.
    pub euclidean_dim: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum Branch {
    /// f-rank(X_P) = 0: the fourth set contains α_i(N) with b_{q−i}(X_P) ≠ 0.
    FRankZero { nilpotent_degree: u32, betti_degree: u32 },
    /// f-rank(X_P) > 0: the second set contains α_i(N) + α_{q−i}(X_P).
    FRankPositive { nilpotent_degree: u32, boundary_degree: u32, interval: [String; 2] },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryBound {
    pub q: u32,
    /// Upper bound for α_q(e(P)).
    pub bound: NSValue,
    pub branch: Branch,
    pub inputs: BoundaryInputs,
    pub certificate: Certificate,
}

fn fail(step: &str, reason: impl Into<String>) -> NsError {
    NsError::CertificateFailure { step: step.to_string(), reason: reason.into() }
}

/// Replays the boundary-component case split on explicit integers.
pub fn replay_boundary(inputs: &BoundaryInputs) -> Result<BoundaryBound, NsError> {
    let BoundaryInputs { dim_x, dim_n, ref graded_dims, growth_degree, dim_xp, levi_f_rank: f, levi_deficiency, euclidean_dim } =
        *inputs;
    let q = dim_x / 2;
    let mut cert = Certificate::new();
    if q == 0 {
        return Err(fail("middle-degree", "dim X < 2 leaves no middle degree q ≥ 1"));
    }
    if dim_n == 0 {
        return Err(fail("nilpotent-radical", "a proper parabolic has dim N ≥ 1"));
    }

    let graded_sum: u32 = graded_dims.iter().sum();
    let weighted: u64 = graded_dims.iter().enumerate().map(|(k, d)| (k as u64 + 1) * *d as u64).sum();
    if graded_sum != dim_n {
        return Err(fail("grading", format!("Σ dim 𝔫_k = {graded_sum} but dim N = {dim_n}")));
    }
    if weighted != growth_degree {
        return Err(fail("grading", format!("Σ k·dim 𝔫_k = {weighted} but d(N) = {growth_degree}")));
    }
    cert.push(
        "growth",
        format!("d(N_P) = Σ k·dim 𝔫_k = {growth_degree} over grading {graded_dims:?}"),
        "lower-central-series grading equals the parabolic-root grading",
        "guivarch-growth",
        &["input:graded_dims", "input:growth_degree"],
    );
    cert.push(
        "rumin",
        format!("0 < α_i(N_P) ≤ {growth_degree} for 1 ≤ i ≤ {dim_n}"),
        "nilpotent Novikov-Shubin bound by the growth degree",
        "rumin-nilpotent-bound",
        &["growth"],
    );

    if dim_xp + 1 + dim_n != dim_x {
        return Err(fail(
            "dimension-bookkeeping",
            format!("dim X_P + 1 + dim N = {} but dim X = {dim_x}", dim_xp + 1 + dim_n),
        ));
    }
    cert.push(
        "dimensions",
        format!("dim e(P) = dim X − 1 = {}: dim N = {dim_n}, dim X_P = {dim_xp}", dim_x - 1),
        "split rank one: dim X = dim N + 1 + dim X_P",
        "horospherical-decomposition",
        &["input:dim_x", "input:dim_n", "input:dim_xp"],
    );

    if f < euclidean_dim || f > dim_xp || (dim_xp - f) % 2 != 0 {
        return Err(fail(
            "levi-parity",
            format!("dim X_P − f-rank(X_P) = {dim_xp} − {f} must be a nonnegative even number"),
        ));
    }
    if f - euclidean_dim != levi_deficiency {
        return Err(fail(
            "levi-parity",
            format!("f-rank {f} ≠ δ(M_P) {levi_deficiency} + euclidean dimension {euclidean_dim}"),
        ));
    }
    cert.push(
        "levi",
        format!("f-rank(X_P) = δ(M_P) + dim X_P^Eucl = {levi_deficiency} + {euclidean_dim} = {f}"),
        "fundamental rank of a euclidean factor is its dimension",
        "fundamental-rank-product",
        &["input:levi_f_rank", "input:levi_deficiency"],
    );
    cert.push(
        "third-set-empty",
        "b_i(N_P) = 0 for all i, so the third set of the product formula is empty",
        "aspherical complex with infinite elementary amenable normal subgroup",
        "amenable-vanishing",
        &["rumin"],
    );

    let (branch, bound) = if f == 0 {
        let i_star = dim_n.div_ceil(2);
        if i_star < 1 || i_star > q {
            return Err(fail("fourth-set", format!("degree ⌈dim N/2⌉ = {i_star} outside 1..={q}")));
        }
        let betti_degree = q - i_star;
        let xp = olbrich_profile(dim_xp, 0);
        if !xp.betti(betti_degree) {
            return Err(fail(
                "fourth-set",
                format!("b_{betti_degree}(X_P) vanishes for dim X_P = {dim_xp}, f-rank 0"),
            ));
        }
        cert.push(
            "betti-boundary",
            format!("b_{betti_degree}(X_P) ≠ 0 since f-rank(X_P) = 0 and dim X_P = 2·{betti_degree}"),
            "uniform lattices have nonzero L²-Betti number exactly in the middle when the deficiency is 0",
            "olbrich-uniform-lattices",
            &["levi", "dimensions"],
        );
        cert.push(
            "product",
            format!("α_{q}(e(P)) ≤ α_{i_star}(N_P) ≤ {growth_degree} via the fourth set"),
            "product formula for Novikov-Shubin invariants",
            "product-formula",
            &["betti-boundary", "rumin", "third-set-empty"],
        );
        (Branch::FRankZero { nilpotent_degree: i_star, betti_degree }, NSValue::int(growth_degree as i64))
    } else {
        let check = interval_lemma_detail(dim_xp, f, dim_x).expect("f > 0 and dims consistent");
        let i_star = check.nilpotent_degree;
        if !check.holds {
            return Err(fail(
                "interval",
                format!(
                    "q − i = {} not in [{}, {}]",
                    check.boundary_degree, check.lower, check.upper
                ),
            ));
        }
        if i_star < 1 || i_star >= q {
            return Err(fail("second-set", format!("degree i = {i_star} outside 1..={}", q - 1)));
        }
        let j = check.boundary_degree as u32;
        cert.push(
            "interval",
            format!("q − i = {j} ∈ [{}, {}] with i = {i_star}", check.lower, check.upper),
            "interval membership on the actual dimensions",
            "olbrich-uniform-lattices",
            &["levi", "dimensions"],
        );
        cert.push(
            "boundary-alpha",
            format!("α_{j}(X_P) ≤ f-rank(X_P) = {f}"),
            "Novikov-Shubin invariants of a symmetric space with euclidean factor",
            "symmetric-space-alpha-bound",
            &["interval"],
        );
        cert.push(
            "product",
            format!("α_{q}(e(P)) ≤ α_{i_star}(N_P) + α_{j}(X_P) ≤ {growth_degree} + {f} via the second set"),
            "product formula for Novikov-Shubin invariants",
            "product-formula",
            &["boundary-alpha", "rumin", "third-set-empty"],
        );
        let interval = [check.lower.to_string(), check.upper.to_string()];
        (
            Branch::FRankPositive { nilpotent_degree: i_star, boundary_degree: j, interval },
            NSValue::int(growth_degree as i64 + f as i64),
        )
    };
    cert.note("the product formula needs the limit property for N_P and X_P; it holds by the explicit nilpotent and symmetric-space computations and is not checked here");
    Ok(BoundaryBound { q, bound, branch, inputs: inputs.clone(), certificate: cert })
}

/// Collects the replay inputs for the boundary component of `p` inside `g`.
pub fn boundary_inputs(g: &RealFormData, p: &StandardParabolic) -> Result<BoundaryInputs, NsError> {
    let delta = levi_deficiency(p)?;
    let levi = p.levi_annotation.as_ref().expect("checked by levi_deficiency");
    let euclidean_dim = levi.simple_factors().iter().filter(|f| f.abelian).map(|f| f.dim_x).sum();
    Ok(BoundaryInputs {
        dim_x: g.dim_x,
        dim_n: p.dim_n,
        graded_dims: p.graded_dimensions(),
        growth_degree: p.growth_degree,
        dim_xp: levi.dim_x,
        levi_f_rank: levi.f_rank,
        levi_deficiency: delta,
        euclidean_dim,
    })
}

/// α_q(e(P)) ≤ f-rank(X_P) + d(N_P) for a split-rank-one parabolic.
pub fn boundary_component_bound(g: &RealFormData, p: &StandardParabolic) -> Result<BoundaryBound, NsError> {
    if p.split_rank != 1 {
        return Err(NsError::Unsupported(format!("{} has split rank {}, expected 1", p.name, p.split_rank)));
    }
    replay_boundary(&boundary_inputs(g, p)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub q: u32,
    /// Upper bound for α̃_q(Γ).
    pub bound: NSValue,
    pub levi_deficiency: u32,
    pub levi_f_rank: u32,
    pub growth_degree: u64,
    pub dim_n: u32,
    pub branch: Branch,
    pub inputs: BoundaryInputs,
    pub certificate: Certificate,
}

/// α̃_q(Γ) ≤ f-rank(X_P) + d(N_P) for lattices of ℚ-rank one with positive deficiency.
pub fn rank_one_bound(
    g: &RealFormData,
    rrs: &RestrictedRootSystem,
    p_min: &StandardParabolic,
) -> Result<BoundReport, NsError> {
    if rrs.q_rank != 1 {
        return Err(NsError::Unsupported(format!("ℚ-rank {} (only ℚ-rank 1 is covered)", rrs.q_rank)));
    }
    if g.deficiency == 0 {
        return Err(NsError::NotAcyclic(format!("δ({}) = 0", g.name)));
    }
    if !p_min.is_minimal() || p_min.split_rank != 1 {
        return Err(NsError::Unsupported(format!("{} is not the minimal parabolic", p_min.name)));
    }
    let q = middle_dimension(g);
    let mut cert = Certificate::new();
    cert.push(
        "acyclic",
        format!("b_p(X̄) = 0 for all p since δ({}) = {} > 0", g.name, g.deficiency),
        "L²-Betti numbers of lattices vanish iff the deficiency is positive",
        "l2-betti-lattices",
        &["module:real_forms"],
    );
    cert.push(
        "boundary-inequality",
        format!("α̃_{q}(X̄) ≤ α_{q}(∂X̄) (dim X = {})", g.dim_x),
        "½ min{α_p(X), α_{n−p}(X)} ≤ α_p(∂X) for L²-acyclic manifolds with boundary",
        "boundary-inequality",
        &["acyclic"],
    );
    if g.dim_x.is_multiple_of(2) {
        cert.note(format!("dim X even: the same inequality gives α_{q}(X̄) ≤ 2·α_{q}(∂X̄)"));
    }
    cert.push(
        "rank-one",
        format!("α_{q}(∂X̄) = α_{q}(e({})) since every proper rational parabolic is minimal", p_min.name),
        "closed boundary components, conjugacy of minimal parabolics and induction",
        "rank-one-reduction",
        &["boundary-inequality", "module:parabolic"],
    );
    let boundary = boundary_component_bound(g, p_min)?;
    cert.append(boundary.certificate.clone());
    cert.push(
        "bound",
        format!("α̃_{q}(Γ) ≤ {}", boundary.bound),
        "chain of the inequalities above",
        "rank-one-ns-bound",
        &["rank-one", "product"],
    );
    Ok(BoundReport {
        q,
        bound: boundary.bound,
        levi_deficiency: boundary.inputs.levi_deficiency,
        levi_f_rank: boundary.inputs.levi_f_rank,
        growth_degree: boundary.inputs.growth_degree,
        dim_n: boundary.inputs.dim_n,
        branch: boundary.branch,
        inputs: boundary.inputs,
        certificate: cert,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parabolic::minimal_parabolic;
    use crate::real_forms::derive;
    use crate::root_data::{CartanType, RootSystem};
    use crate::tits_index::{restrict, TitsIndex};

    fn form(s: &str) -> RealFormData {
        derive(&s.parse().unwrap()).unwrap()
    }

    fn inf_plus() -> NSValue {
        NSValue::InfinityPlus
    }

    #[test]
    fn order_and_addition() {
        assert!(NSValue::int(1000) < NSValue::Infinity);
        assert!(NSValue::Infinity < inf_plus());
        assert_eq!(NSValue::Infinity + inf_plus(), inf_plus());
        assert_eq!(NSValue::Infinity + NSValue::int(3), NSValue::Infinity);
        assert_eq!(NSValue::finite(1, 2) + NSValue::finite(1, 3), NSValue::finite(5, 6));
        assert_eq!(inf_plus().half(), inf_plus());
        assert_eq!(NSValue::Infinity.half(), NSValue::Infinity);
    }

    #[test]
    fn json_forms() {
        let v = [NSValue::int(4), NSValue::finite(1, 2), NSValue::Infinity, inf_plus()];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[4,"1/2","inf","inf+"]"#);
        let back: Vec<NSValue> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<NSValue>("-1").is_err());
    }

    #[test]
    fn olbrich_examples() {
        let p = olbrich_profile(9, 1);
        assert_eq!(p.alpha(5).unwrap(), NSValue::int(1));
        for k in (0..=10).filter(|k| *k != 5) {
            assert_eq!(p.alpha(k).unwrap(), inf_plus());
        }
        assert!(p.betti_nonzero.is_empty());
        let p = olbrich_profile(4, 0);
        assert_eq!(p.betti_nonzero, [2].into_iter().collect());
        assert!((0..=5).all(|k| p.alpha(k).unwrap() == inf_plus()));
        assert_eq!(olbrich_window(5, 3), vec![2, 3, 4]);
        assert_eq!(olbrich_profile(0, 0).betti_nonzero, [0].into_iter().collect());
    }

    #[test]
    fn tilde_alpha_examples() {
        let p = olbrich_profile(9, 1);
        assert_eq!(tilde_alpha(&p, 5).unwrap(), NSValue::finite(1, 2));
        assert_eq!(tilde_alpha(&p, 4).unwrap(), NSValue::finite(1, 2));
        assert_eq!(tilde_alpha(&NSProfile::gapped(3), 1).unwrap(), inf_plus());
        let mut p = NSProfile::gapped(6);
        p.alpha.insert(4, AlphaEntry::Exact { value: NSValue::int(4) });
        p.alpha.insert(5, AlphaEntry::Exact { value: NSValue::int(6) });
        assert_eq!(tilde_alpha(&p, 4).unwrap(), NSValue::int(2));
    }

    #[test]
    fn product_examples() {
        let mut a = NSProfile::gapped(2);
        a.betti_nonzero.insert(0);
        let b = olbrich_profile(9, 1);
        assert_eq!(product_alpha(&a, &b, 5).unwrap(), NSValue::int(1));
        assert_eq!(product_alpha(&NSProfile::gapped(3), &NSProfile::gapped(3), 2).unwrap(), inf_plus());
        let mut a = NSProfile::gapped(3);
        a.alpha.insert(1, AlphaEntry::Exact { value: NSValue::int(2) });
        let mut b = NSProfile::gapped(2);
        b.betti_nonzero.insert(0);
        assert_eq!(product_alpha(&a, &b, 1).unwrap(), NSValue::int(2));
    }

    #[test]
    fn product_rejects_bounds() {
        let n = nilpotent_bound_profile(4, 4);
        let err = product_alpha(&n, &olbrich_profile(4, 0), 4).unwrap_err();
        assert!(err.to_string().contains("exact profiles required"));
    }

    #[test]
    fn interval_examples() {
        assert_eq!(interval_lemma_check(3, 1, 7), Some(true));
        for dim_xp in (2..20).step_by(2) {
            for n in [dim_xp + 3, dim_xp + 4] {
                assert_eq!(interval_lemma_check(dim_xp, 2, n), Some(true), "dim_xp {dim_xp}, n {n}");
            }
        }
        assert_eq!(interval_lemma_check(4, 0, 9), None);
    }

    fn gp_setup() -> (RealFormData, RestrictedRootSystem, StandardParabolic) {
        let a3 = RootSystem::build(CartanType::A, 3).unwrap();
        let idx = TitsIndex::new(a3, vec![vec![0], vec![1], vec![2]], vec![vec![1]], "G^p").unwrap();
        let rrs = restrict(&idx);
        let p = minimal_parabolic(&rrs).with_annotation(form("SO,2,2"));
        (form("SO,3,3"), rrs, p)
    }

    #[test]
    fn gp_bound_is_four() {
        let (g, rrs, p) = gp_setup();
        let r = rank_one_bound(&g, &rrs, &p).unwrap();
        assert_eq!((r.q, r.bound), (4, NSValue::int(4)));
        assert_eq!(r.levi_deficiency, 0);
        assert_eq!(r.branch, Branch::FRankZero { nilpotent_degree: 2, betti_degree: 2 });
        assert!(r.certificate.is_well_founded());
        assert!(r.certificate.step("betti-boundary").is_some());
        assert!(!r.certificate.notes.is_empty());
    }

    #[test]
    fn so31_bound_is_two() {
        let rrs = RestrictedRootSystem::from_roots(vec![vec![1, 2]], [(vec![1], 2)].into_iter().collect());
        let p = minimal_parabolic(&rrs).with_annotation(form("compact,A,1"));
        let r = rank_one_bound(&form("SO,3,1"), &rrs, &p).unwrap();
        assert_eq!((r.q, r.bound), (1, NSValue::int(2)));
    }

    #[test]
    fn su31_boundary_six_but_not_acyclic() {
        let a3 = RootSystem::build(CartanType::A, 3).unwrap();
        let idx = TitsIndex::new(a3, vec![vec![0, 2], vec![1]], vec![vec![0, 2]], "SU(3,1)").unwrap();
        let rrs = restrict(&idx);
        let p = minimal_parabolic(&rrs).with_annotation(form("compact,A,1"));
        let g = form("SU,3,1");
        let b = boundary_component_bound(&g, &p).unwrap();
        assert_eq!((b.q, b.bound), (3, NSValue::int(6)));
        assert!(matches!(rank_one_bound(&g, &rrs, &p), Err(NsError::NotAcyclic(_))));
    }

    #[test]
    fn rank_one_bound_preconditions() {
        let (g, rrs, p) = gp_setup();
        let bare = minimal_parabolic(&rrs);
        assert!(matches!(rank_one_bound(&g, &rrs, &bare), Err(NsError::Parabolic(_))));
        let whole = crate::parabolic::parabolic(&rrs, &[0]).unwrap();
        assert!(rank_one_bound(&g, &rrs, &whole).is_err());
        let a2 = restrict(&TitsIndex::split(RootSystem::build(CartanType::A, 2).unwrap()));
        assert!(matches!(rank_one_bound(&form("SL,3"), &a2, &p), Err(NsError::Unsupported(_))));
    }

    #[test]
    fn corrupted_inputs_fail() {
        let (g, _, p) = gp_setup();
        let good = boundary_inputs(&g, &p).unwrap();
        assert!(replay_boundary(&good).is_ok());
        type Mutation = Box<dyn Fn(&mut BoundaryInputs, i64)>;
        let mutations: Vec<Mutation> = vec![
            Box::new(|x, s| x.dim_x = (x.dim_x as i64 + s) as u32),
            Box::new(|x, s| x.dim_n = (x.dim_n as i64 + s) as u32),
            Box::new(|x, s| x.dim_xp = (x.dim_xp as i64 + s) as u32),
            Box::new(|x, s| x.levi_f_rank = (x.levi_f_rank as i64 + s).max(0) as u32),
            Box::new(|x, s| x.growth_degree = (x.growth_degree as i64 + s) as u64),
        ];
        for m in &mutations {
            for s in [-1, 1] {
                let mut bad = good.clone();
                m(&mut bad, s);
                if bad == good {
                    continue;
                }
                assert!(matches!(replay_boundary(&bad), Err(NsError::CertificateFailure { .. })), "{bad:?}");
            }
        }
    }

    #[test]
    fn positive_f_rank_branch() {
        // dim X = 7, N of dim 3 with levels [3], X_P = SL(2)×R¹ of dim 3 with f-rank 1
        let inputs = BoundaryInputs {
            dim_x: 7,
            dim_n: 3,
            graded_dims: vec![3],
            growth_degree: 3,
            dim_xp: 3,
            levi_f_rank: 1,
            levi_deficiency: 0,
            euclidean_dim: 1,
        };
        let b = replay_boundary(&inputs).unwrap();
        assert_eq!(b.bound, NSValue::int(4));
        assert!(matches!(b.branch, Branch::FRankPositive { nilpotent_degree: 1, boundary_degree: 2, .. }));
    }
}
