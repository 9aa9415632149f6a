//! Tits indices (∗-action orbits plus distinguished orbits) and the
//! coefficient-restriction algorithm producing restricted roots with
//! multiplicities.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real_forms::FormSpec;
use crate::root_data::{
    classify_connected, root_height, sort_roots, CartanType, RootDataError, RootSystem, RootVector,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TitsIndexError {
    #[error(transparent)]
    RootData(#[from] RootDataError),
    #[error("orbits do not partition the simple roots 1..{rank}: {detail}")]
    NotAPartition { rank: usize, detail: String },
    #[error("orbit partition {0} is not induced by a Dynkin diagram automorphism")]
    NotDiagramInduced(String),
    #[error("distinguished entry {0:?} is not one of the orbits")]
    UnknownDistinguished(Vec<usize>),
    #[error("no candidate index has anisotropic kernel {0}")]
    NoMatchingCandidate(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TitsIndex {
    base: RootSystem,
    /// Orbits of simple roots (0-based), each sorted; sorted by smallest member.
    orbits: Vec<Vec<usize>>,
    /// Indices into `orbits`, ascending.
    distinguished: Vec<usize>,
    label: String,
}

/// Enumerates all automorphisms of the Dynkin diagram (bonds and root lengths
/// preserved) as permutations of the simple roots.
pub fn diagram_automorphisms(rs: &RootSystem) -> Vec<Vec<usize>> {
    fn extend(rs: &RootSystem, perm: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = rs.rank();
        let i = perm.len();
        if i == n {
            out.push(perm.clone());
            return;
        }
        for img in 0..n {
            if used[img] || rs.simple_lengths()[i] != rs.simple_lengths()[img] {
                continue;
            }
            let consistent = (0..i).all(|j| rs.bond(i, j) == rs.bond(img, perm[j]));
            if consistent {
                used[img] = true;
                perm.push(img);
                extend(rs, perm, used, out);
                perm.pop();
                used[img] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(rs, &mut Vec::new(), &mut vec![false; rs.rank()], &mut out);
    out
}

impl TitsIndex {
    /// Validates and builds an index; `orbits` and `distinguished` use 0-based
    /// simple-root indices.
    pub fn new(
        base: RootSystem,
        orbits: Vec<Vec<usize>>,
        distinguished: Vec<Vec<usize>>,
        label: impl Into<String>,
    ) -> Result<Self, TitsIndexError> {
        let rank = base.rank();
        let mut orbits: Vec<Vec<usize>> = orbits
            .into_iter()
            .map(|mut o| {
                o.sort_unstable();
                o
            })
            .collect();
        orbits.sort();
        let mut seen = BTreeSet::new();
        for o in &orbits {
            if o.is_empty() {
                return Err(TitsIndexError::NotAPartition { rank, detail: "empty orbit".into() });
            }
            for &i in o {
                if i >= rank {
                    return Err(TitsIndexError::NotAPartition {
                        rank,
                        detail: format!("index {} out of range", i + 1),
                    });
                }
                if !seen.insert(i) {
                    return Err(TitsIndexError::NotAPartition {
                        rank,
                        detail: format!("index {} repeated", i + 1),
                    });
                }
            }
        }
        if seen.len() != rank {
            return Err(TitsIndexError::NotAPartition { rank, detail: "indices missing".into() });
        }
        check_diagram_induced(&base, &orbits)?;
        let mut dist = Vec::new();
        for mut d in distinguished {
            d.sort_unstable();
            match orbits.iter().position(|o| *o == d) {
                Some(k) => dist.push(k),
                None => return Err(TitsIndexError::UnknownDistinguished(d.iter().map(|i| i + 1).collect())),
            }
        }
        dist.sort_unstable();
        dist.dedup();
        Ok(TitsIndex { base, orbits, distinguished: dist, label: label.into() })
    }

    /// Split form: trivial orbits, all distinguished.
    pub fn split(base: RootSystem) -> Self {
        let n = base.rank();
        let orbits: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        TitsIndex {
            label: format!("split {}", base.label()),
            base,
            distinguished: (0..n).collect(),
            orbits,
        }
    }

    pub fn base(&self) -> &RootSystem {
        &self.base
    }

    pub fn orbits(&self) -> &[Vec<usize>] {
        &self.orbits
    }

    pub fn distinguished_orbits(&self) -> Vec<&Vec<usize>> {
        self.distinguished.iter().map(|&k| &self.orbits[k]).collect()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn q_rank(&self) -> usize {
        self.distinguished.len()
    }

    /// Simple roots lying in no distinguished orbit.
    pub fn kernel_nodes(&self) -> BTreeSet<usize> {
        let circled: BTreeSet<usize> = self.distinguished_orbits().into_iter().flatten().copied().collect();
        (0..self.base.rank()).filter(|i| !circled.contains(i)).collect()
    }

    pub fn to_file(&self) -> TitsIndexFile {
        TitsIndexFile {
            base: BaseSpec { cartan_type: self.base.cartan_type(), rank: self.base.rank() },
            orbits: self.orbits.iter().map(|o| o.iter().map(|i| i + 1).collect()).collect(),
            distinguished: self
                .distinguished_orbits()
                .into_iter()
                .map(|o| o.iter().map(|i| i + 1).collect())
                .collect(),
            label: self.label.clone(),
            real_form: None,
        }
    }
}

fn check_diagram_induced(base: &RootSystem, orbits: &[Vec<usize>]) -> Result<(), TitsIndexError> {
    let n = base.rank();
    let mut block = vec![0usize; n];
    for (k, o) in orbits.iter().enumerate() {
        for &i in o {
            block[i] = k;
        }
    }
    // Automorphisms stabilising every block form a group whose orbits are the
    // finest partition any ∗-action with these blocks could produce.
    let stabiliser: Vec<Vec<usize>> = diagram_automorphisms(base)
        .into_iter()
        .filter(|perm| (0..n).all(|i| block[perm[i]] == block[i]))
        .collect();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for perm in &stabiliser {
        for (i, &j) in perm.iter().enumerate() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            parent[a] = b;
        }
    }
    for o in orbits {
        let root = find(&mut parent, o[0]);
        if o.iter().any(|&i| find(&mut parent, i) != root) {
            let shown: Vec<Vec<usize>> = orbits.iter().map(|o| o.iter().map(|i| i + 1).collect()).collect();
            return Err(TitsIndexError::NotDiagramInduced(format!("{shown:?}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseSpec {
    #[serde(rename = "type")]
    pub cartan_type: CartanType,
    pub rank: usize,
}

/// On-disk index format; simple roots are numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TitsIndexFile {
    pub base: BaseSpec,
    pub orbits: Vec<Vec<usize>>,
    pub distinguished: Vec<Vec<usize>>,
    #[serde(default)]
    pub label: String,
    /// Optional real form of the ambient group, e.g. `"SO,3,3"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_form: Option<FormSpec>,
}

impl TitsIndexFile {
    pub fn into_index(&self) -> Result<TitsIndex, TitsIndexError> {
        let base = RootSystem::build(self.base.cartan_type, self.base.rank)?;
        let shift = |v: &Vec<usize>| -> Result<Vec<usize>, TitsIndexError> {
            v.iter()
                .map(|&i| {
                    i.checked_sub(1).ok_or_else(|| TitsIndexError::NotAPartition {
                        rank: self.base.rank,
                        detail: "simple roots are numbered from 1".into(),
                    })
                })
                .collect()
        };
        let orbits = self.orbits.iter().map(shift).collect::<Result<_, _>>()?;
        let dist = self.distinguished.iter().map(shift).collect::<Result<_, _>>()?;
        TitsIndex::new(base, orbits, dist, self.label.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictedRoot {
    pub coeffs: RootVector,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictedRootSystem {
    /// For each simple restricted root, the absolute simple roots (1-based) it comes from.
    pub simple_restricted: Vec<Vec<usize>>,
    pub positive_restricted: Vec<RestrictedRoot>,
    pub q_rank: usize,
    /// Descriptive label such as `A1`, `BC1` or `A1+A1`; never used in computations.
    pub type_label: String,
}

impl RestrictedRootSystem {
    /// Assembles a system from raw restricted roots; sorts and labels it.
    pub fn from_roots(simple_restricted: Vec<Vec<usize>>, roots: BTreeMap<RootVector, u32>) -> Self {
        let q_rank = simple_restricted.len();
        let mut keys: Vec<RootVector> = roots.keys().cloned().collect();
        sort_roots(&mut keys);
        let positive_restricted: Vec<RestrictedRoot> = keys
            .into_iter()
            .map(|c| RestrictedRoot { multiplicity: roots[&c], coeffs: c })
            .collect();
        let type_label = restricted_type_label(q_rank, &positive_restricted);
        RestrictedRootSystem { simple_restricted, positive_restricted, q_rank, type_label }
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.positive_restricted.iter().map(|r| r.multiplicity as u64).sum()
    }

    pub fn multiplicity_of(&self, coeffs: &[i64]) -> Option<u32> {
        self.positive_restricted.iter().find(|r| r.coeffs == coeffs).map(|r| r.multiplicity)
    }

    pub fn is_reduced(&self) -> bool {
        let set: BTreeSet<&RootVector> = self.positive_restricted.iter().map(|r| &r.coeffs).collect();
        !self
            .positive_restricted
            .iter()
            .any(|r| set.contains(&r.coeffs.iter().map(|c| 2 * c).collect::<Vec<_>>()))
    }
}

/// Maps every positive absolute root to its coefficient sums over the
/// distinguished orbits, drops zeros and counts equal images.
pub fn restrict(index: &TitsIndex) -> RestrictedRootSystem {
    let dist = index.distinguished_orbits();
    let mut counts: BTreeMap<RootVector, u32> = BTreeMap::new();
    for root in index.base.positive_roots() {
        let image: RootVector = dist.iter().map(|o| o.iter().map(|&i| root[i]).sum()).collect();
        if image.iter().any(|c| *c != 0) {
            *counts.entry(image).or_insert(0) += 1;
        }
    }
    let simple = dist.iter().map(|o| o.iter().map(|i| i + 1).collect()).collect();
    RestrictedRootSystem::from_roots(simple, counts)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelComponent {
    #[serde(rename = "type")]
    pub cartan_type: CartanType,
    pub rank: usize,
    /// Absolute simple roots (1-based).
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelFragment {
    pub components: Vec<KernelComponent>,
    pub positive_root_count: usize,
}

impl KernelFragment {
    /// Component labels such as `["A1", "A1"]`, sorted.
    pub fn labels(&self) -> Vec<String> {
        let mut v: Vec<String> = self.components.iter().map(|c| format!("{}{}", c.cartan_type, c.rank)).collect();
        v.sort();
        v
    }
}

/// Sub-diagram on the non-distinguished simple roots.
pub fn anisotropic_kernel(index: &TitsIndex) -> KernelFragment {
    let nodes = index.kernel_nodes();
    let components = index
        .base
        .classify_subdiagram(&nodes)
        .expect("sub-diagrams of finite-type diagrams are of finite type")
        .into_iter()
        .map(|(t, comp)| KernelComponent {
            cartan_type: t,
            rank: comp.len(),
            nodes: comp.iter().map(|i| i + 1).collect(),
        })
        .collect();
    KernelFragment { components, positive_root_count: index.base.roots_supported_on(&nodes).len() }
}

/// Picks the unique candidate whose anisotropic kernel has the given component labels.
pub fn select_by_kernel<'a>(
    candidates: &'a [TitsIndex],
    required: &[&str],
) -> Result<&'a TitsIndex, TitsIndexError> {
    let mut want: Vec<String> = required.iter().map(|s| s.to_string()).collect();
    want.sort();
    candidates
        .iter()
        .find(|c| anisotropic_kernel(c).labels() == want)
        .ok_or_else(|| TitsIndexError::NoMatchingCandidate(want.join("+")))
}

fn restricted_type_label(q_rank: usize, roots: &[RestrictedRoot]) -> String {
    if q_rank == 0 {
        return "anisotropic".into();
    }
    let all: BTreeSet<&RootVector> = roots.iter().map(|r| &r.coeffs).collect();
    let indivisible: BTreeSet<RootVector> = roots
        .iter()
        .map(|r| r.coeffs.clone())
        .filter(|c| {
            if c.iter().any(|x| x % 2 != 0) {
                return true;
            }
            let half: RootVector = c.iter().map(|x| x / 2).collect();
            !all.contains(&half)
        })
        .collect();
    let unit = |i: usize| -> RootVector { (0..q_rank).map(|j| i64::from(j == i)).collect() };
    // A_ji = −(longest β_i-string through β_j); strings start at β_j since
    // differences of simple roots are never roots.
    let cartan: Vec<Vec<i64>> = (0..q_rank)
        .map(|j| {
            (0..q_rank)
                .map(|i| {
                    if i == j {
                        return 2;
                    }
                    let mut k = 0;
                    let mut v = unit(j);
                    loop {
                        v[i] += 1;
                        if indivisible.contains(&v) {
                            k += 1;
                        } else {
                            break;
                        }
                    }
                    -k
                })
                .collect()
        })
        .collect();
    // components of the restricted diagram
    let mut seen = vec![false; q_rank];
    let mut parts = Vec::new();
    for s in 0..q_rank {
        if seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut k = 0;
        while k < comp.len() {
            let v = comp[k];
            for w in 0..q_rank {
                if !seen[w] && cartan[v][w] != 0 {
                    seen[w] = true;
                    comp.push(w);
                }
            }
            k += 1;
        }
        comp.sort_unstable();
        let sub: Vec<Vec<i64>> = comp.iter().map(|&i| comp.iter().map(|&j| cartan[i][j]).collect()).collect();
        let non_reduced = roots.iter().any(|r| {
            let supported = r.coeffs.iter().enumerate().all(|(i, c)| *c == 0 || comp.contains(&i));
            supported && !indivisible.contains(&r.coeffs)
        });
        let label = match classify_connected(&sub) {
            Ok(_) if non_reduced => format!("BC{}", comp.len()),
            Ok((t, n)) => format!("{t}{n}"),
            Err(_) => format!("?{}", comp.len()),
        };
        parts.push(label);
    }
    parts.sort();
    parts.join("+")
}

/// Total number of absolute positive roots that restrict to `target`, computed
/// root by root (used to cross-check [`restrict`]).
pub fn count_restricting_to(index: &TitsIndex, target: &[i64]) -> u32 {
    let dist = index.distinguished_orbits();
    index
        .base
        .positive_roots()
        .iter()
        .filter(|root| {
            dist.iter()
                .zip(target)
                .all(|(o, t)| o.iter().map(|&i| root[i]).sum::<i64>() == *t)
        })
        .count() as u32
}

/// The two candidate ℚ-rank-one indices for a split-off hyperbolic plane in a
/// six-variable form of real rank three: inner with the middle node circled,
/// outer with the end nodes paired and circled.
pub fn sixfold_orthogonal_candidates() -> Vec<TitsIndex> {
    let a3 = RootSystem::build(CartanType::A, 3).expect("A3 is valid");
    vec![
        TitsIndex::new(a3.clone(), vec![vec![0], vec![1], vec![2]], vec![vec![1]], "inner A3, middle node circled")
            .expect("valid index"),
        TitsIndex::new(a3, vec![vec![0, 2], vec![1]], vec![vec![0, 2]], "outer A3, end nodes circled")
            .expect("valid index"),
    ]
}

/// Every index over `base` whose orbits are the cycles of a single diagram
/// automorphism, with every choice of distinguished orbits.
pub fn enumerate_indices(base: &RootSystem) -> Vec<TitsIndex> {
    let mut partitions: BTreeSet<Vec<Vec<usize>>> = BTreeSet::new();
    for perm in diagram_automorphisms(base) {
        let mut seen = vec![false; base.rank()];
        let mut orbits = Vec::new();
        for start in 0..base.rank() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = perm[i];
            }
            cycle.sort_unstable();
            orbits.push(cycle);
        }
        orbits.sort();
        partitions.insert(orbits);
    }
    let mut out = Vec::new();
    for orbits in partitions {
        for mask in 0u32..1 << orbits.len() {
            let dist: Vec<Vec<usize>> =
                (0..orbits.len()).filter(|k| mask >> k & 1 == 1).map(|k| orbits[k].clone()).collect();
            let one_based = |os: &[Vec<usize>]| -> Vec<Vec<usize>> {
                os.iter().map(|o| o.iter().map(|i| i + 1).collect()).collect()
            };
            let label = format!("{} orbits {:?} circled {:?}", base.label(), one_based(&orbits), one_based(&dist));
            out.push(TitsIndex::new(base.clone(), orbits.clone(), dist, label).expect("automorphism orbits are valid"));
        }
    }
    out
}

/// Height of a restricted root (sum over Δ_ℚ coefficients).
pub fn restricted_height(r: &RestrictedRoot) -> u64 {
    root_height(&r.coeffs)
}
