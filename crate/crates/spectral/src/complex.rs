//! Finite free chain complexes over the group ring of ℤ^n and their Fourier
//! symbols on the torus.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::SpectralError;

/// One monomial `z^exp · mat` of a differential.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub exp: Vec<i64>,
    pub mat: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawComplex {
    #[serde(default)]
    name: Option<String>,
    deck_rank: usize,
    cells: Vec<usize>,
    #[serde(default)]
    differentials: BTreeMap<usize, Vec<Term>>,
}

/// Chain complex `C_p = ℤ[ℤ^n]^{n_p}` with differentials `c_p: C_p → C_{p-1}`
/// given as Laurent polynomials with integer `n_{p-1} × n_p` matrix
/// coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawComplex", into = "RawComplex")]
pub struct AbelianCWComplex {
    pub name: Option<String>,
    pub deck_rank: usize,
    pub cells: Vec<usize>,
    /// `differentials[p]` is `c_p`; missing degrees are zero.
    pub differentials: BTreeMap<usize, Vec<Term>>,
}

impl TryFrom<RawComplex> for AbelianCWComplex {
    type Error = SpectralError;

    fn try_from(raw: RawComplex) -> Result<Self, SpectralError> {
        AbelianCWComplex::new(raw.name, raw.deck_rank, raw.cells, raw.differentials)
    }
}

impl From<AbelianCWComplex> for RawComplex {
    fn from(c: AbelianCWComplex) -> Self {
        RawComplex { name: c.name, deck_rank: c.deck_rank, cells: c.cells, differentials: c.differentials }
    }
}

type Poly = BTreeMap<Vec<i64>, Vec<Vec<i64>>>;

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>], inner: usize, cols: usize) -> Vec<Vec<i64>> {
    a.iter().map(|row| (0..cols).map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum()).collect()).collect()
}

impl AbelianCWComplex {
    pub fn new(
        name: Option<String>,
        deck_rank: usize,
        cells: Vec<usize>,
        differentials: BTreeMap<usize, Vec<Term>>,
    ) -> Result<Self, SpectralError> {
        for (&p, terms) in &differentials {
            if p == 0 || p >= cells.len() {
                return Err(SpectralError::Shape { degree: p, detail: "no such differential".into() });
            }
            let (rows, cols) = (cells[p - 1], cells[p]);
            for t in terms {
                if t.exp.len() != deck_rank {
                    return Err(SpectralError::Shape {
                        degree: p,
                        detail: format!("exponent {:?} has length {}, deck rank is {deck_rank}", t.exp, t.exp.len()),
                    });
                }
                if t.mat.len() != rows || t.mat.iter().any(|r| r.len() != cols) {
                    return Err(SpectralError::Shape {
                        degree: p,
                        detail: format!("coefficient matrix must be {rows}x{cols}"),
                    });
                }
            }
        }
        let c = AbelianCWComplex { name, deck_rank, cells, differentials };
        c.check_boundary_squared()?;
        Ok(c)
    }

    pub fn from_json(text: &str) -> Result<Self, SpectralError> {
        serde_json::from_str(text).map_err(|e| SpectralError::Json(e.to_string()))
    }

    pub fn top_degree(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    pub fn rank(&self, p: usize) -> usize {
        self.cells.get(p).copied().unwrap_or(0)
    }

    fn poly(&self, p: usize) -> Poly {
        let mut out: Poly = BTreeMap::new();
        let (rows, cols) = (self.rank(p.wrapping_sub(1)), self.rank(p));
        for t in self.differentials.get(&p).into_iter().flatten() {
            let e = out.entry(t.exp.clone()).or_insert_with(|| vec![vec![0; cols]; rows]);
            for (r, row) in t.mat.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    e[r][c] += v;
                }
            }
        }
        out
    }

    /// `c_{p-1} ∘ c_p = 0` for every p, by exact convolution.
    pub fn check_boundary_squared(&self) -> Result<(), SpectralError> {
        for p in 2..self.cells.len() {
            let (a, b) = (self.poly(p - 1), self.poly(p));
            let mut prod: Poly = BTreeMap::new();
            let (rows, inner, cols) = (self.cells[p - 2], self.cells[p - 1], self.cells[p]);
            for (ea, ma) in &a {
                for (eb, mb) in &b {
                    let exp: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                    let m = mat_mul(ma, mb, inner, cols);
                    let e = prod.entry(exp).or_insert_with(|| vec![vec![0; cols]; rows]);
                    for r in 0..rows {
                        for c in 0..cols {
                            e[r][c] += m[r][c];
                        }
                    }
                }
            }
            if let Some((exp, _)) = prod.iter().find(|(_, m)| m.iter().flatten().any(|v| *v != 0)) {
                return Err(SpectralError::NotAComplex { degree: p, monomial: exp.clone() });
            }
        }
        Ok(())
    }

    /// Fourier symbol of `c_p` at θ, an `n_{p-1} × n_p` complex matrix.
    pub fn differential_symbol(&self, p: usize, theta: &[f64]) -> DMatrix<Complex64> {
        let (rows, cols) = (self.rank(p.wrapping_sub(1)), self.rank(p));
        let mut m = DMatrix::<Complex64>::zeros(if p == 0 { 0 } else { rows }, cols);
        if p == 0 {
            return m;
        }
        for t in self.differentials.get(&p).into_iter().flatten() {
            let phase: f64 = t.exp.iter().zip(theta).map(|(e, th)| *e as f64 * th).sum();
            let z = Complex64::from_polar(1.0, phase);
            for (r, row) in t.mat.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    m[(r, c)] += z * *v as f64;
                }
            }
        }
        m
    }

    /// `Δ_p(θ) = c_{p+1} c_{p+1}^* + c_p^* c_p`.
    pub fn symbol_at(&self, p: usize, theta: &[f64]) -> Result<DMatrix<Complex64>, SpectralError> {
        if p >= self.cells.len() {
            return Err(SpectralError::DegreeOutOfRange { degree: p, top: self.top_degree() });
        }
        if theta.len() != self.deck_rank {
            return Err(SpectralError::Shape {
                degree: p,
                detail: format!("θ has {} coordinates, deck rank is {}", theta.len(), self.deck_rank),
            });
        }
        let up = self.differential_symbol(p + 1, theta);
        let down = self.differential_symbol(p, theta);
        let mut lap = DMatrix::<Complex64>::zeros(self.rank(p), self.rank(p));
        if up.nrows() > 0 && up.ncols() > 0 {
            lap += &up * up.adjoint();
        }
        if down.nrows() > 0 && down.ncols() > 0 {
            lap += down.adjoint() * &down;
        }
        Ok(lap)
    }

    /// Upper bound on `‖Δ_p(θ)‖` over the torus: squared sums of Frobenius
    /// norms of the coefficients of `c_{p+1}` and `c_p`.
    pub fn norm_bound(&self, p: usize) -> f64 {
        let side = |q: usize| -> f64 {
            self.poly(q)
                .values()
                .map(|m| (m.iter().flatten().map(|v| (*v as f64).powi(2)).sum::<f64>()).sqrt())
                .sum()
        };
        let up = if p < self.top_degree() { side(p + 1) } else { 0.0 };
        let down = if p > 0 { side(p) } else { 0.0 };
        up * up + down * down
    }
}

pub fn circle() -> AbelianCWComplex {
    AbelianCWComplex::from_json(include_str!("../data/circle.json")).expect("shipped complex")
}

pub fn z2() -> AbelianCWComplex {
    AbelianCWComplex::from_json(include_str!("../data/z2.json")).expect("shipped complex")
}

/// Circle complex with `c_1 = 2 - z`; its Laplacian is bounded below by 1.
pub fn gapped_circle() -> AbelianCWComplex {
    AbelianCWComplex::from_json(include_str!("../data/gapped.json")).expect("shipped complex")
}

pub fn shipped() -> Vec<AbelianCWComplex> {
    vec![circle(), z2(), gapped_circle()]
}
