//! Absolute reduced root systems of types A–G in simple-root coordinates.
//!
//! Positive roots are generated by the root-string algorithm from the
//! symmetrised Cartan data, so every root is stored as an integer coefficient
//! vector over the simple roots (Bourbaki numbering, 0-based internally).

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coefficient vector over a basis of simple roots.
pub type RootVector = Vec<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootDataError {
    #[error("rank {rank} is not valid for type {cartan_type}")]
    InvalidRank { cartan_type: CartanType, rank: usize },
    #[error("unknown Cartan type `{0}`")]
    UnknownType(String),
    #[error("Cartan matrix is not of finite type: {0}")]
    NotFiniteType(String),
    #[error("positive roots supplied for {cartan_type}{rank} do not match the generated system")]
    RootListMismatch { cartan_type: CartanType, rank: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CartanType {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CartanType::A => "A",
            CartanType::B => "B",
            CartanType::C => "C",
            CartanType::D => "D",
            CartanType::E => "E",
            CartanType::F => "F",
            CartanType::G => "G",
        };
        f.write_str(s)
    }
}

impl FromStr for CartanType {
    type Err = RootDataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(CartanType::A),
            "B" => Ok(CartanType::B),
            "C" => Ok(CartanType::C),
            "D" => Ok(CartanType::D),
            "E" => Ok(CartanType::E),
            "F" => Ok(CartanType::F),
            "G" => Ok(CartanType::G),
            other => Err(RootDataError::UnknownType(other.to_string())),
        }
    }
}

impl CartanType {
    pub fn valid_rank(self, rank: usize) -> bool {
        match self {
            CartanType::A => rank >= 1,
            CartanType::B | CartanType::C => rank >= 2,
            CartanType::D => rank >= 3,
            CartanType::E => (6..=8).contains(&rank),
            CartanType::F => rank == 4,
            CartanType::G => rank == 2,
        }
    }

    /// Classical count of positive roots.
    pub fn positive_root_count(self, rank: usize) -> usize {
        let n = rank;
        match self {
            CartanType::A => n * (n + 1) / 2,
            CartanType::B | CartanType::C => n * n,
            CartanType::D => n * (n - 1),
            CartanType::E => match n {
                6 => 36,
                7 => 63,
                _ => 120,
            },
            CartanType::F => 24,
            CartanType::G => 6,
        }
    }
}

/// A Dynkin edge between two simple roots (0-based) with bond multiplicity 1, 2 or 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub multiplicity: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSystem {
    cartan_type: CartanType,
    rank: usize,
    /// Squared lengths of the simple roots, scaled so short roots have length 2.
    lengths: Vec<i64>,
    adjacency: Vec<Bond>,
    positive_roots: Vec<RootVector>,
}

/// Sum of the simple-root coefficients.
pub fn root_height(root: &[i64]) -> u64 {
    root.iter().map(|c| *c as u64).sum()
}

fn unit(rank: usize, i: usize) -> RootVector {
    let mut v = vec![0; rank];
    v[i] = 1;
    v
}

fn dynkin_data(t: CartanType, n: usize) -> (Vec<i64>, Vec<Bond>) {
    let simple = |a: usize, b: usize| Bond { a, b, multiplicity: 1 };
    let mut bonds = Vec::new();
    let mut lengths = vec![2; n];
    match t {
        CartanType::A => {
            for i in 0..n - 1 {
                bonds.push(simple(i, i + 1));
            }
        }
        CartanType::B | CartanType::C => {
            for i in 0..n - 2 {
                bonds.push(simple(i, i + 1));
            }
            bonds.push(Bond { a: n - 2, b: n - 1, multiplicity: 2 });
            if t == CartanType::B {
                // α_n short
                for l in lengths.iter_mut().take(n - 1) {
                    *l = 4;
                }
            } else {
                lengths[n - 1] = 4;
            }
        }
        CartanType::D => {
            for i in 0..n - 2 {
                bonds.push(simple(i, i + 1));
            }
            bonds.push(simple(n - 3, n - 1));
        }
        CartanType::E => {
            bonds.push(simple(0, 2));
            bonds.push(simple(1, 3));
            for i in 2..n - 1 {
                bonds.push(simple(i, i + 1));
            }
        }
        CartanType::F => {
            bonds.push(simple(0, 1));
            bonds.push(Bond { a: 1, b: 2, multiplicity: 2 });
            bonds.push(simple(2, 3));
            lengths = vec![4, 4, 2, 2];
        }
        CartanType::G => {
            bonds.push(Bond { a: 0, b: 1, multiplicity: 3 });
            lengths = vec![2, 6];
        }
    }
    (lengths, bonds)
}

impl RootSystem {
    /// Builds the positive roots of the given type by closing the simple roots
    /// under the root-string rule.
    pub fn build(cartan_type: CartanType, rank: usize) -> Result<Self, RootDataError> {
        if !cartan_type.valid_rank(rank) {
            return Err(RootDataError::InvalidRank { cartan_type, rank });
        }
        let (lengths, adjacency) = dynkin_data(cartan_type, rank);
        let mut rs = RootSystem {
            cartan_type,
            rank,
            lengths,
            adjacency,
            positive_roots: Vec::new(),
        };
        rs.positive_roots = rs.close_under_strings();
        Ok(rs)
    }

    fn close_under_strings(&self) -> Vec<RootVector> {
        let n = self.rank;
        let mut seen: HashSet<RootVector> = HashSet::new();
        let mut layer: Vec<RootVector> = (0..n).map(|i| unit(n, i)).collect();
        seen.extend(layer.iter().cloned());
        let mut all = layer.clone();
        while !layer.is_empty() {
            let mut next = Vec::new();
            for beta in &layer {
                for i in 0..n {
                    let mut down = beta.clone();
                    let mut p = 0;
                    loop {
                        down[i] -= 1;
                        if seen.contains(&down) {
                            p += 1;
                        } else {
                            break;
                        }
                    }
                    let q = p - self.pairing(beta, i);
                    if q > 0 {
                        let mut up = beta.clone();
                        up[i] += 1;
                        if seen.insert(up.clone()) {
                            next.push(up);
                        }
                    }
                }
            }
            all.extend(next.iter().cloned());
            layer = next;
        }
        sort_roots(&mut all);
        all
    }

    pub fn cartan_type(&self) -> CartanType {
        self.cartan_type
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn positive_roots(&self) -> &[RootVector] {
        &self.positive_roots
    }

    pub fn adjacency(&self) -> &[Bond] {
        &self.adjacency
    }

    pub fn simple_lengths(&self) -> &[i64] {
        &self.lengths
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.cartan_type, self.rank)
    }

    /// Bond multiplicity between two simple roots (0 if not adjacent).
    pub fn bond(&self, i: usize, j: usize) -> u8 {
        self.adjacency
            .iter()
            .find(|b| (b.a == i && b.b == j) || (b.a == j && b.b == i))
            .map_or(0, |b| b.multiplicity)
    }

    /// Symmetric form (α_i, α_j) on simple roots in the scaled normalisation.
    pub fn inner(&self, i: usize, j: usize) -> i64 {
        if i == j {
            return self.lengths[i];
        }
        let b = self.bond(i, j) as i64;
        if b == 0 {
            return 0;
        }
        -b * self.lengths[i].min(self.lengths[j]) / 2
    }

    /// Cartan integer ⟨β, α_i^∨⟩ = 2(β, α_i)/(α_i, α_i).
    pub fn pairing(&self, beta: &[i64], i: usize) -> i64 {
        let num: i64 = beta
            .iter()
            .enumerate()
            .map(|(j, c)| c * self.inner(j, i))
            .sum();
        2 * num / self.lengths[i]
    }

    /// Cartan matrix with entries A_ij = ⟨α_i, α_j^∨⟩.
    pub fn cartan_matrix(&self) -> Vec<Vec<i64>> {
        (0..self.rank)
            .map(|i| (0..self.rank).map(|j| self.pairing(&unit(self.rank, i), j)).collect())
            .collect()
    }

    pub fn is_positive_root(&self, v: &[i64]) -> bool {
        self.positive_roots.iter().any(|r| r.as_slice() == v)
    }

    pub fn highest_root(&self) -> &RootVector {
        self.positive_roots
            .iter()
            .max_by_key(|r| root_height(r))
            .expect("root systems are nonempty")
    }

    /// Positive roots supported on the given set of simple roots.
    pub fn roots_supported_on(&self, nodes: &BTreeSet<usize>) -> Vec<&RootVector> {
        self.positive_roots
            .iter()
            .filter(|r| r.iter().enumerate().all(|(i, c)| *c == 0 || nodes.contains(&i)))
            .collect()
    }

    /// Connected components of the sub-diagram induced on `nodes`, each sorted.
    pub fn components(&self, nodes: &BTreeSet<usize>) -> Vec<Vec<usize>> {
        let mut remaining = nodes.clone();
        let mut out = Vec::new();
        while let Some(&start) = remaining.iter().next() {
            let mut comp = vec![start];
            remaining.remove(&start);
            let mut k = 0;
            while k < comp.len() {
                let v = comp[k];
                let nbrs: Vec<usize> = remaining
                    .iter()
                    .copied()
                    .filter(|&w| self.bond(v, w) > 0)
                    .collect();
                for w in nbrs {
                    remaining.remove(&w);
                    comp.push(w);
                }
                k += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Cartan type of each connected component of the sub-diagram on `nodes`.
    pub fn classify_subdiagram(
        &self,
        nodes: &BTreeSet<usize>,
    ) -> Result<Vec<(CartanType, Vec<usize>)>, RootDataError> {
        let full = self.cartan_matrix();
        self.components(nodes)
            .into_iter()
            .map(|comp| {
                let sub: Vec<Vec<i64>> = comp
                    .iter()
                    .map(|&i| comp.iter().map(|&j| full[i][j]).collect())
                    .collect();
                classify_connected(&sub).map(|(t, _)| (t, comp))
            })
            .collect()
    }
}

/// Sorts roots by height, then by descending coefficient vector so that
/// α1 precedes α2 within a height.
pub fn sort_roots(roots: &mut [RootVector]) {
    roots.sort_by(|a, b| root_height(a).cmp(&root_height(b)).then_with(|| b.cmp(a)));
}

/// Identifies the finite type of a connected Cartan matrix.
pub fn classify_connected(m: &[Vec<i64>]) -> Result<(CartanType, usize), RootDataError> {
    let n = m.len();
    if n == 0 {
        return Err(RootDataError::NotFiniteType("empty diagram".into()));
    }
    if n == 1 {
        return Ok((CartanType::A, 1));
    }
    let bond = |i: usize, j: usize| m[i][j] * m[j][i];
    let degree = |i: usize| (0..n).filter(|&j| j != i && m[i][j] != 0).count();
    let edges: Vec<(usize, usize, i64)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| m[i][j] != 0)
        .map(|(i, j)| (i, j, bond(i, j)))
        .collect();
    if edges.len() != n - 1 {
        return Err(RootDataError::NotFiniteType("diagram has a cycle".into()));
    }
    let multi: Vec<_> = edges.iter().filter(|e| e.2 > 1).collect();
    if multi.len() > 1 {
        return Err(RootDataError::NotFiniteType("more than one multiple bond".into()));
    }
    if let Some(&&(i, j, b)) = multi.first() {
        if (0..n).any(|v| degree(v) > 2) {
            return Err(RootDataError::NotFiniteType("branched non-simply-laced diagram".into()));
        }
        return match (b, n) {
            (3, 2) => Ok((CartanType::G, 2)),
            (2, 2) => Ok((CartanType::B, 2)),
            (2, 4) if degree(i) == 2 && degree(j) == 2 => Ok((CartanType::F, 4)),
            (2, _) => {
                let (end, other) = if degree(i) == 1 { (i, j) } else { (j, i) };
                if degree(end) != 1 {
                    return Err(RootDataError::NotFiniteType("double bond inside a long chain".into()));
                }
                // |A_{other,end}| = 2 means the end node is short.
                if m[other][end] == -2 {
                    Ok((CartanType::B, n))
                } else {
                    Ok((CartanType::C, n))
                }
            }
            _ => Err(RootDataError::NotFiniteType(format!("bond {b} on {n} nodes"))),
        };
    }
    let branches: Vec<usize> = (0..n).filter(|&v| degree(v) >= 3).collect();
    match branches.as_slice() {
        [] => Ok((CartanType::A, n)),
        [c] if degree(*c) == 3 => {
            let mut arms: Vec<usize> = (0..n)
                .filter(|&w| w != *c && m[*c][w] != 0)
                .map(|w| arm_length(m, *c, w))
                .collect();
            arms.sort_unstable();
            match arms.as_slice() {
                [1, 1, _] => Ok((CartanType::D, n)),
                [1, 2, 2] | [1, 2, 3] | [1, 2, 4] => Ok((CartanType::E, n)),
                _ => Err(RootDataError::NotFiniteType(format!("arms {arms:?}"))),
            }
        }
        _ => Err(RootDataError::NotFiniteType("more than one branch node".into())),
    }
}

fn arm_length(m: &[Vec<i64>], centre: usize, first: usize) -> usize {
    let n = m.len();
    let (mut prev, mut cur, mut len) = (centre, first, 1);
    loop {
        let next = (0..n).find(|&w| w != prev && w != cur && m[cur][w] != 0);
        match next {
            Some(w) => {
                prev = cur;
                cur = w;
                len += 1;
            }
            None => return len,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RootSystemRepr {
    #[serde(rename = "type")]
    cartan_type: CartanType,
    rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positive_roots: Option<Vec<RootVector>>,
}

impl Serialize for RootSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RootSystemRepr {
            cartan_type: self.cartan_type,
            rank: self.rank,
            positive_roots: Some(self.positive_roots.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RootSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = RootSystemRepr::deserialize(d)?;
        let rs = RootSystem::build(repr.cartan_type, repr.rank).map_err(serde::de::Error::custom)?;
        if let Some(mut given) = repr.positive_roots {
            sort_roots(&mut given);
            if given != rs.positive_roots {
                return Err(serde::de::Error::custom(RootDataError::RootListMismatch {
                    cartan_type: rs.cartan_type,
                    rank: rs.rank,
                }));
            }
        }
        Ok(rs)
    }
}

/// Every (type, rank) pair up to `max_rank`.
pub fn supported_types(max_rank: usize) -> Vec<(CartanType, usize)> {
    use CartanType::*;
    let mut out = Vec::new();
    for t in [A, B, C, D, E, F, G] {
        for r in 1..=max_rank {
            if t.valid_rank(r) {
                out.push((t, r));
            }
        }
    }
    out
}
