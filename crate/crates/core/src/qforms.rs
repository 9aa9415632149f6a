//! Diagonal quadratic forms over ℚ: signature, bounded isotropy search, the
//! descent certificate for ⟨1, 1, −p, −p⟩, and the SO(Q^p) pipeline.

use std::collections::HashMap;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::Certificate;
use crate::ns_calculus::{rank_one_bound, BoundReport};
use crate::parabolic::minimal_parabolic;
use crate::real_forms::{derive, middle_dimension, FormSpec, RealFormData};
use crate::tits_index::{
    restrict, select_by_kernel, sixfold_orthogonal_candidates, RestrictedRootSystem, TitsIndexFile,
};
use crate::torsion_ledger::{torsion_verdict, TorsionReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QformError {
    #[error("a diagonal form needs at least one coefficient")]
    Empty,
    #[error("coefficient {index} is zero")]
    ZeroCoefficient { index: usize },
    #[error("search height must be at least 1")]
    InvalidHeight,
    #[error("descent rule inapplicable: {0}")]
    RuleInapplicable(String),
    #[error("family hypothesis fails for p = {p}: {reason}")]
    FamilyHypothesis { p: u64, reason: String, witness: Option<Vec<i64>> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalForm {
    pub coeffs: Vec<Rational64>,
}

impl DiagonalForm {
    pub fn new(coeffs: Vec<Rational64>) -> Result<Self, QformError> {
        if coeffs.is_empty() {
            return Err(QformError::Empty);
        }
        if let Some(index) = coeffs.iter().position(|c| c.is_zero()) {
            return Err(QformError::ZeroCoefficient { index });
        }
        Ok(DiagonalForm { coeffs })
    }

    pub fn from_ints(coeffs: &[i64]) -> Result<Self, QformError> {
        Self::new(coeffs.iter().map(|&c| Rational64::from_integer(c)).collect())
    }

    /// ⟨1, 1, 1, −1, −p, −p⟩.
    pub fn senary(p: i64) -> Self {
        Self::from_ints(&[1, 1, 1, -1, -p, -p]).expect("nonzero coefficients")
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficients multiplied by the lcm of the denominators.
    pub fn integer_coeffs(&self) -> Vec<i128> {
        let l = self.coeffs.iter().fold(1i64, |acc, c| acc.lcm(c.denom()));
        self.coeffs.iter().map(|c| (*c.numer() as i128) * (l / c.denom()) as i128).collect()
    }

    pub fn evaluate(&self, x: &[i64]) -> Rational64 {
        self.coeffs.iter().zip(x).map(|(a, &v)| *a * Rational64::from_integer(v * v)).sum()
    }

    pub fn labels(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }
}

pub fn signature(f: &DiagonalForm) -> (usize, usize) {
    let pos = f.coeffs.iter().filter(|c| c.is_positive()).count();
    (pos, f.len() - pos)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum IsotropyVerdict {
    Isotropic { witness: Vec<i64>, height: u32 },
    NoZeroUpTo { height: u32 },
    CertifiedAnisotropic { certificate: Certificate },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotropyReport {
    pub form: Vec<String>,
    #[serde(flatten)]
    pub verdict: IsotropyVerdict,
}

/// Coordinate values in search order 0, 1, −1, 2, −2, …
fn value_order(h: u32) -> Vec<i64> {
    let mut v = vec![0];
    for k in 1..=h as i64 {
        v.push(k);
        v.push(-k);
    }
    v
}

/// Visits every vector of the given length in lexicographic value order until `visit` returns true.
fn for_each_vector(len: usize, values: &[i64], mut visit: impl FnMut(&[i64]) -> bool) {
    let mut idx = vec![0usize; len];
    let mut cur = vec![0i64; len];
    loop {
        if visit(&cur) {
            return;
        }
        let mut k = len;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < values.len() {
                cur[k] = values[idx[k]];
                break;
            }
            idx[k] = 0;
            cur[k] = 0;
        }
    }
}

fn first_nonzero_positive(v: &[i64]) -> bool {
    v.iter().find(|x| **x != 0).is_some_and(|x| *x > 0)
}

fn partial_value(a: &[i128], x: &[i64]) -> i128 {
    a.iter().zip(x).map(|(c, &v)| c * (v as i128) * (v as i128)).sum()
}

/// Lexicographically least normalised zero with sup-norm ≤ h, by meet in the middle.
fn least_zero(a: &[i128], h: u32) -> Option<Vec<i64>> {
    let k1 = a.len() / 2;
    let (pre, suf) = a.split_at(k1);
    let values = value_order(h);
    // suffix value ↦ least suffix, plus the least normalised nonzero suffix of value 0
    let mut table: HashMap<i128, Vec<i64>> = HashMap::new();
    let mut zero_suffix: Option<Vec<i64>> = None;
    for_each_vector(suf.len(), &values, |s| {
        let v = partial_value(suf, s);
        table.entry(v).or_insert_with(|| s.to_vec());
        if v == 0 && zero_suffix.is_none() && first_nonzero_positive(s) {
            zero_suffix = Some(s.to_vec());
        }
        false
    });
    let mut found = None;
    for_each_vector(pre.len(), &values, |p| {
        if p.iter().all(|x| *x == 0) {
            if let Some(s) = &zero_suffix {
                found = Some(p.iter().chain(s).copied().collect());
                return true;
            }
            return false;
        }
        if !first_nonzero_positive(p) {
            return false;
        }
        if let Some(s) = table.get(&-partial_value(pre, p)) {
            found = Some(p.iter().chain(s).copied().collect());
            return true;
        }
        false
    });
    found
}

/// Exhaustive search for a nontrivial zero with entries in [−h, h]. The witness
/// has minimal sup-norm, first nonzero entry positive, and is least in the
/// order 0 < 1 < −1 < 2 < −2 < … coordinatewise-lexicographically.
pub fn isotropy_search(f: &DiagonalForm, height: u32) -> Result<IsotropyReport, QformError> {
    if height == 0 {
        return Err(QformError::InvalidHeight);
    }
    let a = f.integer_coeffs();
    // double the height until a zero appears, then bisect for the least height
    let mut hi = 1;
    while least_zero(&a, hi).is_none() {
        if hi >= height {
            return Ok(IsotropyReport { form: f.labels(), verdict: IsotropyVerdict::NoZeroUpTo { height } });
        }
        hi = (hi * 2).min(height);
    }
    let mut lo = hi / 2; // no zero at height lo (or lo = 0)
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if least_zero(&a, mid).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let witness = least_zero(&a, hi).expect("zero exists at this height");
    debug_assert!(f.evaluate(&witness).is_zero());
    Ok(IsotropyReport { form: f.labels(), verdict: IsotropyVerdict::Isotropic { witness, height: hi } })
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut r = 1u128;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Certifies that ⟨1, 1, −p, −p⟩ is anisotropic over ℚ for primes p ≡ 3 (mod 4).
pub fn certify_anisotropic_family(p: u64) -> Result<IsotropyReport, QformError> {
    if !is_prime(p) {
        return Err(QformError::RuleInapplicable(format!("{p} is not prime")));
    }
    if p % 4 != 3 {
        return Err(QformError::RuleInapplicable(format!("{p} ≡ {} (mod 4), need 3", p % 4)));
    }
    let mut cert = Certificate::new();
    cert.push(
        "hypothesis",
        format!("{p} is prime and {p} ≡ 3 (mod 4)"),
        "trial division and residue check",
        "elementary-arithmetic",
        &["input:p"],
    );
    // −1 is a non-residue iff (−1)^((p−1)/2) ≡ −1
    let euler = pow_mod((p - 1) as u128, ((p - 1) / 2) as u128, p as u128);
    if euler != (p - 1) as u128 {
        return Err(QformError::RuleInapplicable(format!("−1 is a square mod {p}")));
    }
    cert.push(
        "non-residue",
        format!("(−1)^(({p}−1)/2) ≡ −1 (mod {p}), so −1 is not a square mod {p}"),
        "Euler's criterion",
        "euler-criterion",
        &["hypothesis"],
    );
    cert.push(
        "divides-both",
        format!("{p} | a² + b² implies {p} | a and {p} | b"),
        "otherwise (a/b)² ≡ −1 (mod p)",
        "sum-of-two-squares-divisibility",
        &["non-residue"],
    );
    cert.push(
        "descent",
        format!("x₁² + x₂² = {p}(x₃² + x₄²) has only the zero integer solution"),
        "p divides x₁, x₂; dividing by p gives x₃² + x₄² = p(y₁² + y₂²) with smaller height",
        "infinite-descent",
        &["divides-both"],
    );
    cert.push(
        "anisotropic",
        format!("⟨1, 1, −{p}, −{p}⟩ has no nontrivial rational zero"),
        "clear denominators of a rational zero",
        "infinite-descent",
        &["descent"],
    );
    let f = DiagonalForm::from_ints(&[1, 1, -(p as i64), -(p as i64)]).expect("nonzero");
    Ok(IsotropyReport { form: f.labels(), verdict: IsotropyVerdict::CertifiedAnisotropic { certificate: cert } })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub p: u64,
    pub form: Vec<String>,
    pub signature: (usize, usize),
    pub real_form: RealFormData,
    pub deficiency: u32,
    pub dim_x: u32,
    pub q: u32,
    pub q_rank: usize,
    pub hyperbolic_plane: IsotropyReport,
    pub complement_certificate: IsotropyReport,
    pub complement_search: IsotropyReport,
    pub tits_index: TitsIndexFile,
    pub restricted: RestrictedRootSystem,
    pub growth_degree: u64,
    pub levi: RealFormData,
    pub levi_deficiency: u32,
    pub bound: BoundReport,
    pub torsion: TorsionReport,
    pub notes: Vec<String>,
}

impl PipelineReport {
    /// Everything except the quantities that mention p itself.
    pub fn invariants(&self) -> serde_json::Value {
        serde_json::json!({
            "signature": self.signature,
            "deficiency": self.deficiency,
            "dim_x": self.dim_x,
            "q": self.q,
            "q_rank": self.q_rank,
            "tits_index": self.tits_index,
            "restricted": self.restricted,
            "growth_degree": self.growth_degree,
            "levi_deficiency": self.levi_deficiency,
            "bound": self.bound,
            "torsion": self.torsion,
        })
    }
}

/// SO(Q^p) for Q^p = ⟨1,1,1,−1,−p,−p⟩: ℚ-rank, Tits index, restricted roots and the
/// Novikov-Shubin bound.
pub fn senary_pipeline(p: u64, search_height: u32) -> Result<PipelineReport, crate::Error> {
    let complement = DiagonalForm::from_ints(&[1, 1, -(p as i64), -(p as i64)])?;
    let complement_certificate = match certify_anisotropic_family(p) {
        Ok(c) => c,
        Err(e) => {
            let witness = match isotropy_search(&complement, search_height.max(1))?.verdict {
                IsotropyVerdict::Isotropic { witness, .. } => Some(witness),
                _ => None,
            };
            let reason = match &witness {
                Some(w) => format!("{e}; complement ⟨1,1,−{p},−{p}⟩ is isotropic, witness {w:?}"),
                None => e.to_string(),
            };
            return Err(QformError::FamilyHypothesis { p, reason, witness }.into());
        }
    };
    let complement_search = isotropy_search(&complement, search_height.max(1))?;
    if let IsotropyVerdict::Isotropic { witness, .. } = &complement_search.verdict {
        // would contradict the descent certificate
        return Err(QformError::FamilyHypothesis {
            p,
            reason: format!("search found a zero {witness:?} despite the certificate"),
            witness: Some(witness.clone()),
        }
        .into());
    }

    let form = DiagonalForm::senary(p as i64);
    let sig = signature(&form);
    let real_form = derive(&FormSpec::SO(sig.0 as u32, sig.1 as u32))?;
    let hyperbolic_plane = isotropy_search(&DiagonalForm::from_ints(&[1, -1])?, 1)?;

    let candidates = sixfold_orthogonal_candidates();
    let chosen = select_by_kernel(&candidates, &["A1", "A1"])?;
    let rrs = restrict(chosen);
    let levi = derive(&FormSpec::SO(2, 2))?;
    let p_min = minimal_parabolic(&rrs).with_annotation(levi.clone());
    let bound = rank_one_bound(&real_form, &rrs, &p_min)?;
    let torsion = torsion_verdict(&real_form);

    let mut tits_index = chosen.to_file();
    tits_index.real_form = Some(real_form.spec.clone());
    let notes = vec![
        "ℚ-rank 1: Q^p splits off exactly one hyperbolic plane and the complement is anisotropic".to_string(),
        "Levi annotation SO(2,2) is the known real form of M_P for this family, not derived from the index".to_string(),
        "kernel {A1, A1} forces the inner index with the middle node circled (D2 = A1 × A1)".to_string(),
        format!(
            "torsion: deficiency {} is odd and SO(3,3) is not of real rank one, so the verdict stays open",
            real_form.deficiency
        ),
    ];
    Ok(PipelineReport {
        p,
        form: form.labels(),
        signature: sig,
        deficiency: real_form.deficiency,
        dim_x: real_form.dim_x,
        q: middle_dimension(&real_form),
        q_rank: rrs.q_rank,
        hyperbolic_plane,
        complement_certificate,
        complement_search,
        tits_index,
        growth_degree: p_min.growth_degree,
        levi_deficiency: levi.deficiency,
        restricted: rrs,
        real_form,
        levi,
        bound,
        torsion,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ns_calculus::NSValue;

    fn witness(coeffs: &[i64], h: u32) -> Option<Vec<i64>> {
        match isotropy_search(&DiagonalForm::from_ints(coeffs).unwrap(), h).unwrap().verdict {
            IsotropyVerdict::Isotropic { witness, .. } => Some(witness),
            _ => None,
        }
    }

    /// Plain enumeration of all vectors with the same ordering conventions.
    fn brute_force(coeffs: &[i64], h: u32) -> Option<Vec<i64>> {
        for height in 1..=h {
            let mut best = None;
            for_each_vector(coeffs.len(), &value_order(height), |x| {
                let v: i64 = coeffs.iter().zip(x).map(|(a, b)| a * b * b).sum();
                if v == 0 && first_nonzero_positive(x) {
                    best = Some(x.to_vec());
                    return true;
                }
                false
            });
            if best.is_some() {
                return best;
            }
        }
        None
    }

    #[test]
    fn signatures() {
        assert_eq!(signature(&DiagonalForm::senary(3)), (3, 3));
        assert_eq!(signature(&DiagonalForm::from_ints(&[1]).unwrap()), (1, 0));
        assert_eq!(signature(&DiagonalForm::from_ints(&[1, -1]).unwrap()), (1, 1));
    }

    #[test]
    fn rejects_degenerate_forms() {
        assert_eq!(DiagonalForm::from_ints(&[]), Err(QformError::Empty));
        assert_eq!(DiagonalForm::from_ints(&[1, 0]), Err(QformError::ZeroCoefficient { index: 1 }));
    }

    #[test]
    fn witnesses() {
        assert_eq!(witness(&[1, -1], 1), Some(vec![1, 1]));
        assert_eq!(witness(&[1, 1, -2], 2), Some(vec![1, 1, 1]));
        assert_eq!(witness(&[1, 1, -5, -5], 10), Some(vec![1, 2, 0, 1]));
        assert_eq!(witness(&[1, 1, -3, -3], 50), None);
        assert_eq!(witness(&[1, 1], 20), None);
    }

    #[test]
    fn rational_coefficients_scale() {
        let f = DiagonalForm::new(vec![Rational64::new(1, 2), Rational64::new(-1, 3)]).unwrap();
        assert_eq!(f.integer_coeffs(), vec![3, -2]);
        assert_eq!(isotropy_search(&f, 5).unwrap().verdict, IsotropyVerdict::NoZeroUpTo { height: 5 });
        let f = DiagonalForm::new(vec![Rational64::new(1, 2), Rational64::new(-2, 1)]).unwrap();
        match isotropy_search(&f, 5).unwrap().verdict {
            IsotropyVerdict::Isotropic { witness, .. } => assert!(f.evaluate(&witness).is_zero()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn meet_in_middle_matches_brute_force() {
        let forms: [&[i64]; 8] = [
            &[1, -1],
            &[1, 1, -2],
            &[2, 3, -5],
            &[1, 1, -5, -5],
            &[1, 2, -3, -7],
            &[3, -1, -1],
            &[1, 1, 1, -7],
            &[5, -3, 2, -11, 1],
        ];
        for c in forms {
            assert_eq!(witness(c, 6), brute_force(c, 6), "{c:?}");
        }
    }

    #[test]
    fn descent_family() {
        for p in [3, 7, 11, 19, 23] {
            let r = certify_anisotropic_family(p).unwrap();
            assert!(matches!(r.verdict, IsotropyVerdict::CertifiedAnisotropic { .. }));
        }
        assert!(matches!(certify_anisotropic_family(5), Err(QformError::RuleInapplicable(_))));
        assert!(matches!(certify_anisotropic_family(15), Err(QformError::RuleInapplicable(_))));
        assert_eq!(witness(&[1, 1, -7, -7], 100), None);
    }

    #[test]
    fn pipeline_p3() {
        let r = senary_pipeline(3, 30).unwrap();
        assert_eq!(r.signature, (3, 3));
        assert_eq!((r.deficiency, r.dim_x, r.q, r.q_rank), (1, 9, 4, 1));
        assert_eq!(r.restricted.positive_restricted.len(), 1);
        assert_eq!(r.restricted.positive_restricted[0].multiplicity, 4);
        assert_eq!((r.growth_degree, r.levi_deficiency), (4, 0));
        assert_eq!(r.bound.bound, NSValue::int(4));
        assert_eq!(r.tits_index.distinguished, vec![vec![2]]);
    }

    #[test]
    fn pipeline_is_uniform_in_p() {
        let a = senary_pipeline(3, 20).unwrap();
        let b = senary_pipeline(19, 20).unwrap();
        assert_eq!(a.invariants(), b.invariants());
    }

    #[test]
    fn pipeline_refuses_p5() {
        match senary_pipeline(5, 10) {
            Err(crate::Error::Qform(QformError::FamilyHypothesis { witness, .. })) => {
                assert_eq!(witness, Some(vec![1, 2, 0, 1]));
            }
            other => panic!("{other:?}"),
        }
    }
}
