//! L²-torsion verdicts, symbolic additivity ledgers over bordification
//! strata, and corner combinatorics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real_forms::{FormSpec, RealFormData};
use crate::root_data::CartanType;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("cycle through stratum `{stratum}`")]
    Cycle { stratum: String },
    #[error("stratum `{stratum}` is underdetermined: no assignment and no rule produces it")]
    Underdetermined { stratum: String },
    #[error("stratum `{stratum}` is determined more than once")]
    MultiplyDetermined { stratum: String },
    #[error("rule producing `{stratum}` is inapplicable: {reason}")]
    RuleInapplicable { stratum: String, reason: String },
}

/// Exact rational constant times π^{pi_power}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PiMultiple {
    pub rational: Rational64,
    pub pi_power: i32,
}

impl fmt::Display for PiMultiple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = (*self.rational.numer(), *self.rational.denom());
        let pi = match -self.pi_power {
            0 => String::new(),
            1 => "π".to_string(),
            k => format!("π^{k}"),
        };
        if self.pi_power < 0 {
            write!(f, "{n}/({d}{pi})")
        } else {
            write!(f, "{n}/{d}·π^{}", self.pi_power)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PiMultipleRepr {
    rational: String,
    pi_power: i32,
}

impl Serialize for PiMultiple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PiMultipleRepr { rational: self.rational.to_string(), pi_power: self.pi_power }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiMultiple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = PiMultipleRepr::deserialize(d)?;
        let rational = r.rational.parse().map_err(serde::de::Error::custom)?;
        Ok(PiMultiple { rational, pi_power: r.pi_power })
    }
}

/// Known proportionality constants ρ⁽²⁾ = c·vol for lattices in SO⁰(2n+1,1).
pub fn hyperbolic_constant(n: u32) -> Option<PiMultiple> {
    let (num, den) = match n {
        1 => (-1, 6),
        2 => (31, 45),
        3 => (-221, 70),
        _ => return None,
    };
    Some(PiMultiple { rational: Rational64::new(num, den), pi_power: -(n as i32) })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum TorsionVerdict {
    /// Deficiency 0: b_p⁽²⁾ ≠ 0 in the witness degree.
    NotAcyclic { witness_degree: u32 },
    Zero { reason: String },
    /// Lattices in SO⁰(2n+1,1); `constant` is null beyond the tabulated range.
    HyperbolicOddProportional { n: u32, constant: Option<PiMultiple> },
    OddOpen,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionReport {
    pub group: String,
    #[serde(flatten)]
    pub verdict: TorsionVerdict,
    pub deficiency: u32,
    pub euler_char_zero: bool,
    pub citations: Vec<String>,
}

/// n with G ≅ SO⁰(2n+1,1) up to local isomorphism, for simple G.
fn odd_hyperbolic_n(g: &RealFormData) -> Option<u32> {
    match g.spec {
        FormSpec::SO(p, 1) | FormSpec::SO(1, p) if p >= 3 && p % 2 == 1 => Some((p - 1) / 2),
        FormSpec::Complex(CartanType::A, 1) => Some(1),
        _ => None,
    }
}

pub fn torsion_verdict(g: &RealFormData) -> TorsionReport {
    let m = g.deficiency;
    let factors: Vec<&RealFormData> = g.simple_factors().into_iter().filter(|f| !f.compact).collect();
    let euclidean = factors.iter().any(|f| f.abelian);
    let positive: Vec<&&RealFormData> = factors.iter().filter(|f| f.deficiency > 0).collect();
    let mut citations = vec!["l2-betti-lattices".to_string()];
    let verdict = if euclidean {
        citations.push("amenable-vanishing".into());
        citations.push("torsion-product-formula".into());
        TorsionVerdict::Zero { reason: "free abelian factor: acyclic with vanishing torsion, times a finite-type factor".into() }
    } else if m == 0 {
        TorsionVerdict::NotAcyclic { witness_degree: g.dim_x / 2 }
    } else if m.is_multiple_of(2) {
        citations.push("even-deficiency-vanishing".into());
        TorsionVerdict::Zero { reason: format!("deficiency {m} is even and positive") }
    } else if positive.len() >= 2 {
        citations.push("euler-characteristic".into());
        citations.push("torsion-product-formula".into());
        TorsionVerdict::Zero {
            reason: "two factors of positive deficiency: χ = 0 for one, acyclic torsion for the other".into(),
        }
    } else if let (1, Some(n)) = (factors.len(), odd_hyperbolic_n(positive[0])) {
        citations.push("hyperbolic-torsion".into());
        TorsionVerdict::HyperbolicOddProportional { n, constant: hyperbolic_constant(n) }
    } else {
        TorsionVerdict::OddOpen
    };
    if m > 0 && !citations.iter().any(|c| c == "euler-characteristic") {
        citations.push("euler-characteristic".into());
    }
    TorsionReport { group: g.name.clone(), verdict, deficiency: m, euler_char_zero: m > 0 || euclidean, citations }
}

/// A ℚ-linear combination of named symbols; the empty map is 0.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymExpr(pub BTreeMap<String, Rational64>);

impl SymExpr {
    pub fn zero() -> Self {
        SymExpr::default()
    }

    pub fn symbol(name: &str) -> Self {
        SymExpr([(name.to_string(), Rational64::one())].into_iter().collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, c: Rational64) -> Self {
        let mut out = SymExpr::zero();
        out.add_assign_scaled(self, c);
        out
    }

    pub fn add_assign_scaled(&mut self, other: &SymExpr, c: Rational64) {
        for (k, v) in &other.0 {
            let e = self.0.entry(k.clone()).or_insert_with(Rational64::zero);
            *e += *v * c;
            if e.is_zero() {
                self.0.remove(k);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RhoValue {
    Known { value: SymExpr },
    /// Indeterminate; `blame` lists the leaf strata responsible.
    Unknown { blame: Vec<String> },
}

impl RhoValue {
    pub fn zero() -> Self {
        RhoValue::Known { value: SymExpr::zero() }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, RhoValue::Known { value } if value.is_zero())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    /// ρ(X) = ρ(X₁) + ρ(X₂) − ρ(X₀).
    Pushout { x0: String, x1: String, x2: String, result: String },
    Coproduct { parts: Vec<String>, result: String },
    /// ρ(∂Y) from ρ(Y): 2ρ(Y) in even dimension, 0 in odd dimension.
    BoundaryOf { manifold: String, boundary: String, dim: u32 },
    /// ρ(X) = ½ρ(∂X) for an even-dimensional manifold X.
    HalfBoundary { boundary: String, manifold: String, dim: u32 },
}

impl Rule {
    pub fn result(&self) -> &str {
        match self {
            Rule::Pushout { result, .. } | Rule::Coproduct { result, .. } => result,
            Rule::BoundaryOf { boundary, .. } => boundary,
            Rule::HalfBoundary { manifold, .. } => manifold,
        }
    }

    pub fn inputs(&self) -> Vec<&str> {
        match self {
            Rule::Pushout { x0, x1, x2, .. } => vec![x0, x1, x2],
            Rule::Coproduct { parts, .. } => parts.iter().map(String::as_str).collect(),
            Rule::BoundaryOf { manifold, .. } => vec![manifold],
            Rule::HalfBoundary { boundary, .. } => vec![boundary],
        }
    }

    pub fn citation(&self) -> &'static str {
        match self {
            Rule::Pushout { .. } => "torsion-pushout-additivity",
            Rule::Coproduct { .. } => "torsion-induction",
            Rule::BoundaryOf { .. } => "poincare-duality",
            Rule::HalfBoundary { .. } => "torsion-half-boundary",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumLedger {
    /// Stratum name ↦ assigned value (leaves) or `None` (to be derived).
    pub strata: BTreeMap<String, Option<RhoValue>>,
    pub rules: Vec<Rule>,
}

impl StratumLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn leaf(&mut self, name: &str, value: RhoValue) -> &mut Self {
        self.strata.insert(name.to_string(), Some(value));
        self
    }

    pub fn rule(&mut self, rule: Rule) -> &mut Self {
        for s in rule.inputs().into_iter().chain([rule.result()]) {
            self.strata.entry(s.to_string()).or_insert(None);
        }
        self.rules.push(rule);
        self
    }

    pub fn value(&self, name: &str) -> Option<&RhoValue> {
        self.strata.get(name).and_then(|v| v.as_ref())
    }

    /// Applies every rule once in a topological order.
    pub fn propagate(&self) -> Result<StratumLedger, LedgerError> {
        let identity: Vec<usize> = (0..self.rules.len()).collect();
        self.propagate_with_priority(&identity)
    }

    /// Like [`propagate`](Self::propagate), breaking ties between ready rules
    /// by `priority` (lower first). The result does not depend on it.
    pub fn propagate_with_priority(&self, priority: &[usize]) -> Result<StratumLedger, LedgerError> {
        let mut producer: BTreeMap<&str, usize> = BTreeMap::new();
        for (k, r) in self.rules.iter().enumerate() {
            let out = r.result();
            if producer.insert(out, k).is_some() || matches!(self.strata.get(out), Some(Some(_))) {
                return Err(LedgerError::MultiplyDetermined { stratum: out.to_string() });
            }
        }
        for r in &self.rules {
            for inp in r.inputs() {
                if !producer.contains_key(inp) && !matches!(self.strata.get(inp), Some(Some(_))) {
                    return Err(LedgerError::Underdetermined { stratum: inp.to_string() });
                }
            }
        }
        // Kahn's algorithm over rules
        let n = self.rules.len();
        let mut pending: Vec<usize> = vec![0; n];
        let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (k, r) in self.rules.iter().enumerate() {
            for inp in r.inputs() {
                if let Some(&src) = producer.get(inp) {
                    pending[k] += 1;
                    dependents[src].push(k);
                }
            }
        }
        let rank = |k: usize| priority.get(k).copied().unwrap_or(k);
        let mut ready: BTreeSet<(usize, usize)> = (0..n).filter(|&k| pending[k] == 0).map(|k| (rank(k), k)).collect();
        let mut out = self.clone();
        let mut done = 0;
        while let Some(&first) = ready.iter().next() {
            ready.remove(&first);
            let k = first.1;
            let value = apply(&self.rules[k], &out)?;
            out.strata.insert(self.rules[k].result().to_string(), Some(value));
            done += 1;
            for &d in &dependents[k] {
                pending[d] -= 1;
                if pending[d] == 0 {
                    ready.insert((rank(d), d));
                }
            }
        }
        if done < n {
            let stuck = (0..n).find(|&k| pending[k] > 0).expect("some rule is stuck");
            return Err(LedgerError::Cycle { stratum: self.rules[stuck].result().to_string() });
        }
        Ok(out)
    }
}

fn apply(rule: &Rule, ledger: &StratumLedger) -> Result<RhoValue, LedgerError> {
    let inputs: Vec<&RhoValue> =
        rule.inputs().iter().map(|s| ledger.value(s).expect("inputs resolved before use")).collect();
    let blame: Vec<String> = inputs
        .iter()
        .flat_map(|v| match v {
            RhoValue::Unknown { blame } => blame.clone(),
            RhoValue::Known { .. } => Vec::new(),
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if let Rule::HalfBoundary { dim, manifold, .. } = rule {
        if dim % 2 != 0 {
            return Err(LedgerError::RuleInapplicable {
                stratum: manifold.clone(),
                reason: format!("half-boundary rule needs even dimension, got {dim}"),
            });
        }
    }
    if !blame.is_empty() {
        return Ok(RhoValue::Unknown { blame });
    }
    let known = |i: usize| match inputs[i] {
        RhoValue::Known { value } => value,
        RhoValue::Unknown { .. } => unreachable!(),
    };
    let one = Rational64::one();
    let mut acc = SymExpr::zero();
    match rule {
        Rule::Pushout { .. } => {
            acc.add_assign_scaled(known(1), one);
            acc.add_assign_scaled(known(2), one);
            acc.add_assign_scaled(known(0), -one);
        }
        Rule::Coproduct { .. } => {
            for i in 0..inputs.len() {
                acc.add_assign_scaled(known(i), one);
            }
        }
        Rule::BoundaryOf { dim, .. } => {
            if dim % 2 == 0 {
                acc.add_assign_scaled(known(0), Rational64::from_integer(2));
            }
        }
        Rule::HalfBoundary { .. } => acc.add_assign_scaled(known(0), Rational64::new(1, 2)),
    }
    Ok(RhoValue::Known { value: acc })
}

/// Name of the closure-of-boundary-components leaf for split rank k.
pub fn closure_leaf(k: usize) -> String {
    format!("closures[s-rank {k}]")
}

/// The induction ∂X̄ = X̄₁ ← … ← X̄_r = Ȳ_r over split-rank layers, with every
/// boundary-component closure assigned ρ = 0.
pub fn boundary_induction_ledger(q_rank: usize, dim_x: u32) -> StratumLedger {
    let mut l = StratumLedger::new();
    if q_rank == 0 {
        return l;
    }
    let y = |k: usize| format!("Y[{k}]");
    let dy = |k: usize| format!("dY[{k}]");
    let x = |k: usize| format!("X[{k}]");
    for k in 1..=q_rank {
        l.leaf(&closure_leaf(k), RhoValue::zero());
        l.rule(Rule::Coproduct { parts: vec![closure_leaf(k)], result: y(k) });
    }
    l.rule(Rule::Coproduct { parts: vec![y(q_rank)], result: x(q_rank) });
    for k in (1..q_rank).rev() {
        l.rule(Rule::BoundaryOf { manifold: y(k), boundary: dy(k), dim: dim_x - k as u32 });
        l.rule(Rule::Pushout { x0: dy(k), x1: y(k), x2: x(k + 1), result: x(k) });
    }
    l.rule(Rule::Coproduct { parts: vec![x(1)], result: "boundary".into() });
    if dim_x.is_multiple_of(2) {
        l.rule(Rule::HalfBoundary { boundary: "boundary".into(), manifold: "bordification".into(), dim: dim_x });
    }
    l
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CornerStratum {
    /// Coordinates that are strictly positive on the stratum.
    pub subset: Vec<usize>,
    pub dim: u32,
    /// Compact-support Euler characteristic (−1)^dim of the open cell.
    pub contribution: i64,
}

/// Strata of the half-open cube [0,1)^l, one per subset of coordinates.
pub fn corner_strata(l: u32) -> Vec<CornerStratum> {
    (0u64..1 << l)
        .map(|code| {
            let subset: Vec<usize> = (0..l as usize).filter(|i| code >> i & 1 == 1).collect();
            let dim = subset.len() as u32;
            CornerStratum { subset, dim, contribution: if dim.is_multiple_of(2) { 1 } else { -1 } }
        })
        .collect()
}

pub fn corner_euler_sum(strata: &[CornerStratum]) -> i64 {
    strata.iter().map(|s| s.contribution).sum()
}
