//! Standard rational parabolic subgroups, indexed by subsets I of the simple
//! restricted roots.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real_forms::RealFormData;
use crate::root_data::RootVector;
use crate::tits_index::RestrictedRootSystem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParabolicError {
    #[error("annotation required: parabolic {parabolic} has no Levi real form attached")]
    AnnotationRequired { parabolic: String },
    #[error("simple root index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("{inner} is not contained in {outer}")]
    NotASubset { inner: String, outer: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaRoot {
    pub coeffs: RootVector,
    pub multiplicity: u32,
    /// Σ of coefficients over simple roots outside I.
    pub level: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardParabolic {
    pub name: String,
    /// Sorted 0-based indices into the simple restricted roots.
    pub subset: Vec<usize>,
    pub code: u64,
    pub sigma: Vec<SigmaRoot>,
    pub split_rank: usize,
    pub dim_n: u32,
    pub growth_degree: u64,
    pub levi_system: RestrictedRootSystem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levi_annotation: Option<RealFormData>,
}

fn subset_name(subset: &[usize]) -> String {
    let inner: Vec<String> = subset.iter().map(|i| (i + 1).to_string()).collect();
    format!("P{{{}}}", inner.join(","))
}

impl StandardParabolic {
    pub fn is_minimal(&self) -> bool {
        self.subset.is_empty()
    }

    pub fn is_whole_group(&self) -> bool {
        self.split_rank == 0
    }

    pub fn with_annotation(mut self, levi: RealFormData) -> Self {
        self.levi_annotation = Some(levi);
        self
    }

    /// dim 𝔫_k for each level k ≥ 1, as a dense vector starting at k = 1.
    pub fn graded_dimensions(&self) -> Vec<u32> {
        let top = self.sigma.iter().map(|s| s.level).max().unwrap_or(0) as usize;
        let mut dims = vec![0; top];
        for s in &self.sigma {
            dims[s.level as usize - 1] += s.multiplicity;
        }
        dims
    }
}

fn levi_of(rrs: &RestrictedRootSystem, subset: &[usize]) -> RestrictedRootSystem {
    let inside: BTreeSet<usize> = subset.iter().copied().collect();
    let mut roots: BTreeMap<RootVector, u32> = BTreeMap::new();
    for r in &rrs.positive_restricted {
        let supported = r.coeffs.iter().enumerate().all(|(i, c)| *c == 0 || inside.contains(&i));
        if supported {
            let local: RootVector = subset.iter().map(|&i| r.coeffs[i]).collect();
            roots.insert(local, r.multiplicity);
        }
    }
    let simple = subset.iter().map(|&i| rrs.simple_restricted[i].clone()).collect();
    RestrictedRootSystem::from_roots(simple, roots)
}

/// Builds P_I for the given subset of simple restricted roots.
pub fn parabolic(rrs: &RestrictedRootSystem, subset: &[usize]) -> Result<StandardParabolic, ParabolicError> {
    let l = rrs.q_rank;
    let set: BTreeSet<usize> = subset.iter().copied().collect();
    if let Some(&bad) = set.iter().find(|&&i| i >= l) {
        return Err(ParabolicError::IndexOutOfRange { index: bad, rank: l });
    }
    let subset: Vec<usize> = set.iter().copied().collect();
    let sigma: Vec<SigmaRoot> = rrs
        .positive_restricted
        .iter()
        .filter_map(|r| {
            let level: i64 = r.coeffs.iter().enumerate().filter(|(i, _)| !set.contains(i)).map(|(_, c)| c).sum();
            (level > 0).then(|| SigmaRoot { coeffs: r.coeffs.clone(), multiplicity: r.multiplicity, level: level as u32 })
        })
        .collect();
    let dim_n = sigma.iter().map(|s| s.multiplicity).sum();
    let growth_degree = sigma.iter().map(|s| s.multiplicity as u64 * s.level as u64).sum();
    Ok(StandardParabolic {
        name: subset_name(&subset),
        code: subset.iter().map(|i| 1u64 << i).sum(),
        levi_system: levi_of(rrs, &subset),
        subset,
        sigma,
        split_rank: l - set.len(),
        dim_n,
        growth_degree,
        levi_annotation: None,
    })
}

/// All 2^l standard parabolics, ordered by binary code (bit i ↔ simple root i).
pub fn enumerate_parabolics(rrs: &RestrictedRootSystem) -> Vec<StandardParabolic> {
    let l = rrs.q_rank;
    (0u64..1 << l)
        .map(|code| {
            let subset: Vec<usize> = (0..l).filter(|i| code >> i & 1 == 1).collect();
            parabolic(rrs, &subset).expect("indices below rank")
        })
        .collect()
}

pub fn minimal_parabolic(rrs: &RestrictedRootSystem) -> StandardParabolic {
    parabolic(rrs, &[]).expect("empty subset is valid")
}

/// d(N_I) = Σ m_α · level(α).
pub fn growth_degree(p: &StandardParabolic) -> u64 {
    p.growth_degree
}

/// δ(M_P) of the annotated Levi real form.
pub fn levi_deficiency(p: &StandardParabolic) -> Result<u32, ParabolicError> {
    p.levi_annotation
        .as_ref()
        .map(|g| g.deficiency)
        .ok_or_else(|| ParabolicError::AnnotationRequired { parabolic: p.name.clone() })
}

/// The parabolic of the Levi of P_J corresponding to I ⊆ J, in J's local coordinates.
pub fn relative_parabolic(
    rrs: &RestrictedRootSystem,
    inner: &[usize],
    outer: &[usize],
) -> Result<StandardParabolic, ParabolicError> {
    let outer_p = parabolic(rrs, outer)?;
    let local: Option<Vec<usize>> =
        inner.iter().map(|i| outer_p.subset.iter().position(|j| j == i)).collect();
    let local = local.ok_or_else(|| ParabolicError::NotASubset {
        inner: subset_name(inner),
        outer: outer_p.name.clone(),
    })?;
    parabolic(&outer_p.levi_system, &local)
}

/// Σ_{α∉Φ_J} m_α Σ_{β∈J∖I} c_β, the amount by which d(N_I) exceeds
/// d(N_J) + d(N_{I rel J}): roots outside Φ_J also pick up their J∖I
/// coefficients in level when passing from P_J to P_I.
pub fn chain_cross_term(
    rrs: &RestrictedRootSystem,
    inner: &[usize],
    outer: &[usize],
) -> Result<u64, ParabolicError> {
    let p_outer = parabolic(rrs, outer)?;
    let diff: Vec<usize> = p_outer.subset.iter().copied().filter(|j| !inner.contains(j)).collect();
    Ok(p_outer
        .sigma
        .iter()
        .map(|s| s.multiplicity as u64 * diff.iter().map(|&j| s.coeffs[j] as u64).sum::<u64>())
        .sum())
}
