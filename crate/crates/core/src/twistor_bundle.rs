//! Vector bundles on P¹ given by Laurent transition matrices, their global
//! sections and Birkhoff–Grothendieck splitting types.
//!
//! Charts are λ and μ = −1/λ. A section is a pair of row vectors
//! `f₀ ∈ ℂ[λ]ⁿ`, `f₁ ∈ ℂ[μ]ⁿ` with `f₀(λ) = f₁(−1/λ) · T(λ)`. So `[[λᵏ]]`
//! is O(k), and `T ↦ A·T·B` with `A ∈ GL(ℂ[λ⁻¹])`, `B ∈ GL(ℂ[λ])` does not
//! change the bundle.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{rank, CMatrix};
use crate::scalar::{complex_is_negligible, serde_scalar, Scalar};

/// A Laurent polynomial in λ with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly<T: Scalar> {
    coeffs: BTreeMap<i32, Complex<T>>,
}

impl<T: Scalar> Default for LaurentPoly<T> {
    fn default() -> Self {
        Self { coeffs: BTreeMap::new() }
    }
}

impl<T: Scalar> LaurentPoly<T> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(c: Complex<T>, exp: i32) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, c);
        p
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::monomial(c, 0)
    }

    pub fn add_term(&mut self, exp: i32, c: Complex<T>) {
        let entry = self.coeffs.entry(exp).or_insert_with(Complex::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.coeffs.remove(&exp);
        }
    }

    pub fn coeff(&self, exp: i32) -> Complex<T> {
        self.coeffs.get(&exp).cloned().unwrap_or_else(Complex::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Complex<T>)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    /// Drops coefficients below the scalar tolerance (no-op in exact mode).
    pub fn cleaned(mut self) -> Self {
        self.coeffs.retain(|_, c| !complex_is_negligible(c));
        self
    }

    /// `(c, d)` when the polynomial is `c·λ^d` with `c ≠ 0`.
    pub fn as_monomial(&self) -> Option<(Complex<T>, i32)> {
        let cleaned = self.clone().cleaned();
        let mut it = cleaned.coeffs.into_iter();
        match (it.next(), it.next()) {
            (Some((e, c)), None) => Some((c, e)),
            _ => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in other.terms() {
                out.add_term(e1 + e2, c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn shift(&self, by: i32) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(e, c)| (e + by, c.clone())).collect() }
    }

    pub fn scale(&self, c: &Complex<T>) -> Self {
        let mut out = Self::zero();
        for (e, x) in self.terms() {
            out.add_term(e, x.clone() * c.clone());
        }
        out
    }

    pub fn eval(&self, lambda: &Complex<T>) -> Complex<T> {
        let inv = Complex::new(T::one(), T::zero()) / lambda.clone();
        self.terms().fold(Complex::zero(), |acc, (e, c)| {
            let base = if e >= 0 { lambda.clone() } else { inv.clone() };
            acc + c.clone() * num_traits::pow(base, e.unsigned_abs() as usize)
        })
    }
}

/// An n×n matrix of Laurent polynomials stored by exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentMatrix<T: Scalar> {
    n: usize,
    entries: Vec<Vec<LaurentPoly<T>>>,
}

impl<T: Scalar> LaurentMatrix<T> {
    pub fn from_entries(entries: Vec<Vec<LaurentPoly<T>>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|row| row.len() != n) {
            return Err(Error::Invalid("transition matrix must be square and nonempty".into()));
        }
        Ok(Self { n, entries })
    }

    /// Builds from `exponent → coefficient matrix`.
    pub fn from_terms(n: usize, terms: &BTreeMap<i32, CMatrix<T>>) -> Result<Self> {
        let mut entries = vec![vec![LaurentPoly::zero(); n]; n];
        for (exp, m) in terms {
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                return Err(Error::Invalid(format!("coefficient of lambda^{exp} is not {n}x{n}")));
            }
            for (i, row) in m.iter().enumerate() {
                for (j, c) in row.iter().enumerate() {
                    entries[i][j].add_term(*exp, c.clone());
                }
            }
        }
        Self::from_entries(entries)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal_monomials(&vec![0; n])
    }

    /// `diag(λ^{k₁}, …, λ^{kₙ})`.
    pub fn diagonal_monomials(exps: &[i32]) -> Self {
        let n = exps.len();
        let one = Complex::new(T::one(), T::zero());
        let mut entries = vec![vec![LaurentPoly::zero(); n]; n];
        for (i, &k) in exps.iter().enumerate() {
            entries[i][i] = LaurentPoly::monomial(one.clone(), k);
        }
        Self { n, entries }
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &LaurentPoly<T> {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<LaurentPoly<T>>] {
        &self.entries
    }

    pub fn terms(&self) -> BTreeMap<i32, CMatrix<T>> {
        let mut out: BTreeMap<i32, CMatrix<T>> = BTreeMap::new();
        for (i, row) in self.entries.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                for (e, c) in p.terms() {
                    let m = out.entry(e).or_insert_with(|| vec![vec![Complex::zero(); self.n]; self.n]);
                    m[i][j] = c.clone();
                }
            }
        }
        out
    }

    pub fn min_exp(&self) -> i32 {
        self.entries.iter().flatten().filter_map(|p| p.min_exp()).min().unwrap_or(0)
    }

    pub fn max_exp(&self) -> i32 {
        self.entries.iter().flatten().filter_map(|p| p.max_exp()).max().unwrap_or(0)
    }

    pub fn spread(&self) -> i32 {
        self.max_exp() - self.min_exp()
    }

    pub fn transpose(&self) -> Self {
        let entries = (0..self.n).map(|i| (0..self.n).map(|j| self.entries[j][i].clone()).collect()).collect();
        Self { n: self.n, entries }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Invalid("rank mismatch in product".into()));
        }
        let n = self.n;
        let mut entries = vec![vec![LaurentPoly::zero(); n]; n];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, out) in row.iter_mut().enumerate() {
                for k in 0..n {
                    *out = out.add(&self.entries[i][k].mul(&other.entries[k][j]));
                }
            }
        }
        Ok(Self { n, entries })
    }

    /// `λ^m · T`.
    pub fn twist(&self, m: i32) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(|row| row.iter().map(|p| p.shift(m)).collect()).collect() }
    }

    pub fn determinant(&self) -> LaurentPoly<T> {
        let all: Vec<usize> = (0..self.n).collect();
        minor_det(&self.entries, 0, &all, &mut BTreeMap::new())
    }

    /// Classical adjugate, `adj(T)·T = det(T)·I`.
    pub fn adjugate(&self) -> Self {
        let n = self.n;
        if n == 1 {
            return Self::identity(1);
        }
        let cofactor = |i: usize, j: usize| {
            // delete row i, column j
            let sub: Vec<Vec<LaurentPoly<T>>> = (0..n)
                .filter(|&r| r != i)
                .map(|r| (0..n).filter(|&c| c != j).map(|c| self.entries[r][c].clone()).collect())
                .collect();
            let cols: Vec<usize> = (0..n - 1).collect();
            let d = minor_det(&sub, 0, &cols, &mut BTreeMap::new());
            if (i + j).is_multiple_of(2) {
                d
            } else {
                d.neg()
            }
        };
        let entries = (0..n).map(|j| (0..n).map(|i| cofactor(i, j)).collect()).collect();
        Self { n, entries }
    }

    /// Inverse over the Laurent ring; errors when `det` is not a unit.
    pub fn inverse(&self) -> Result<Self> {
        let (c, d) = self.unit_determinant()?;
        let inv_c = Complex::new(T::one(), T::zero()) / c;
        let adj = self.adjugate();
        Ok(Self {
            n: self.n,
            entries: adj
                .entries
                .iter()
                .map(|row| row.iter().map(|p| p.scale(&inv_c).shift(-d).cleaned()).collect())
                .collect(),
        })
    }

    pub fn unit_determinant(&self) -> Result<(Complex<T>, i32)> {
        let det = self.determinant();
        det.as_monomial().ok_or_else(|| Error::NotATransition(describe(&det)))
    }

    pub fn to_json(&self) -> LaurentMatrixJson {
        let terms = self
            .terms()
            .into_iter()
            .map(|(exp, m)| TermJson {
                exp,
                re: m.iter().map(|row| row.iter().map(|c| c.re.to_json()).collect()).collect(),
                im: Some(m.iter().map(|row| row.iter().map(|c| c.im.to_json()).collect()).collect()),
            })
            .collect();
        LaurentMatrixJson { n: self.n, terms }
    }

    pub fn from_json(json: &LaurentMatrixJson) -> Result<Self> {
        let n = json.n;
        let mut terms = BTreeMap::new();
        for t in &json.terms {
            let re = parse_grid::<T>(&t.re, n)?;
            let im = match &t.im {
                Some(im) => parse_grid::<T>(im, n)?,
                None => vec![vec![T::zero(); n]; n],
            };
            let m: CMatrix<T> = re
                .into_iter()
                .zip(im)
                .map(|(r, i)| r.into_iter().zip(i).map(|(x, y)| Complex::new(x, y)).collect())
                .collect();
            let slot = terms.entry(t.exp).or_insert_with(|| vec![vec![Complex::zero(); n]; n]);
            for (row_s, row_m) in slot.iter_mut().zip(m) {
                for (s, x) in row_s.iter_mut().zip(row_m) {
                    *s = s.clone() + x;
                }
            }
        }
        Self::from_terms(n, &terms)
    }

    pub fn to_f64(&self) -> LaurentMatrix<f64> {
        LaurentMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|p| {
                            let mut q = LaurentPoly::zero();
                            for (e, c) in p.terms() {
                                q.add_term(e, Complex::new(c.re.to_f64(), c.im.to_f64()));
                            }
                            q
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

fn describe<T: Scalar>(p: &LaurentPoly<T>) -> String {
    let parts: Vec<String> =
        p.terms().map(|(e, c)| format!("({:?}+{:?}i)λ^{}", c.re.to_f64(), c.im.to_f64(), e)).collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn parse_grid<T: Scalar>(grid: &[Vec<serde_json::Value>], n: usize) -> Result<Vec<Vec<T>>> {
    if grid.len() != n || grid.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("coefficient grid must be {n}x{n}")));
    }
    grid.iter().map(|row| row.iter().map(serde_scalar::from_json::<T>).collect()).collect()
}

/// Laplace expansion along row `row`, memoized on the remaining column set.
fn minor_det<T: Scalar>(
    m: &[Vec<LaurentPoly<T>>],
    row: usize,
    cols: &[usize],
    memo: &mut BTreeMap<Vec<usize>, LaurentPoly<T>>,
) -> LaurentPoly<T> {
    if cols.is_empty() {
        return LaurentPoly::constant(Complex::new(T::one(), T::zero()));
    }
    if let Some(hit) = memo.get(cols) {
        return hit.clone();
    }
    let mut acc = LaurentPoly::zero();
    for (idx, &c) in cols.iter().enumerate() {
        let entry = &m[row][c];
        if entry.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let sub = minor_det(m, row + 1, &rest, memo);
        let term = entry.mul(&sub);
        acc = if idx % 2 == 0 { acc.add(&term) } else { acc.add(&term.neg()) };
    }
    memo.insert(cols.to_vec(), acc.clone());
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: i32,
    pub re: Vec<Vec<serde_json::Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<serde_json::Value>>>,
}

/// `{"n": 2, "terms": [{"exp": -1, "re": [[..]], "im": [[..]]}, ..]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentMatrixJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
}

pub fn det_winding<T: Scalar>(t: &LaurentMatrix<T>) -> Result<i32> {
    t.unit_determinant().map(|(_, d)| d)
}

/// Everything the section solver needs about one transition matrix.
struct SectionProblem<T: Scalar> {
    /// Column convention: `f₀ᵀ = M f₁ᵀ` with `M = Tᵀ`.
    m_terms: BTreeMap<i32, CMatrix<T>>,
    n: usize,
    min_exp: i32,
    det_exp: i32,
    adj_min: i32,
    adj_max: i32,
}

impl<T: Scalar> SectionProblem<T> {
    fn new(t: &LaurentMatrix<T>) -> Result<Self> {
        let (_, det_exp) = t.unit_determinant()?;
        let adj = t.adjugate();
        Ok(Self {
            m_terms: t.transpose().terms(),
            n: t.rank(),
            min_exp: t.min_exp(),
            det_exp,
            adj_min: adj.min_exp(),
            adj_max: adj.max_exp(),
        })
    }

    /// Sections have `f₁ = λ^{−twist} f₀ T⁻¹`, so μ-degrees are at most
    /// `twist − minexp(adj T) + det winding`.
    fn degree_bound(&self, twist: i32, spread: i32) -> usize {
        let certified = twist - self.adj_min + self.det_exp;
        let initial = self.n as i32 * spread;
        certified.max(initial).max(0) as usize
    }

    fn h0(&self, twist: i32, degree: usize) -> usize {
        let n = self.n;
        let d_max = degree as i32;
        // equations: coefficient of λ^e, e < 0, in every row of M·f₁
        let lowest = self.min_exp + twist - d_max;
        if lowest >= 0 {
            return n * (degree + 1);
        }
        let eq_exps: Vec<i32> = (lowest..0).collect();
        let cols = n * (degree + 1);
        // unknown (j, r) ↦ column; ordering by j descending keeps the system banded
        let col_of = |j: usize, r: usize| (degree - j) * n + r;
        let mut rows: CMatrix<T> = Vec::with_capacity(eq_exps.len() * n);
        for &e in &eq_exps {
            for out_row in 0..n {
                let mut row = vec![Complex::zero(); cols];
                let mut any = false;
                for (&d, coeff) in &self.m_terms {
                    // λ^{d + twist − j} = λ^e
                    let j = d + twist - e;
                    if j < 0 || j > d_max {
                        continue;
                    }
                    let sign = if j % 2 == 0 { T::one() } else { -T::one() };
                    for r in 0..n {
                        let c = &coeff[out_row][r];
                        if !c.is_zero() {
                            row[col_of(j as usize, r)] = c.clone().scale(sign.clone());
                            any = true;
                        }
                    }
                }
                if any {
                    rows.push(row);
                }
            }
        }
        cols - rank(&rows)
    }
}

/// `h⁰(P¹, E ⊗ O(twist))`.
pub fn h0<T: Scalar>(t: &LaurentMatrix<T>, twist: i32) -> Result<usize> {
    let problem = SectionProblem::new(t)?;
    Ok(problem.h0(twist, problem.degree_bound(twist, t.spread())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingType {
    /// Weakly decreasing.
    pub degrees: Vec<i32>,
}

impl SplittingType {
    pub fn new(mut degrees: Vec<i32>) -> Self {
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        Self { degrees }
    }

    pub fn is_pure(&self, k: i32) -> bool {
        self.degrees.iter().all(|&d| d == k)
    }

    pub fn h0(&self, twist: i32) -> usize {
        self.degrees.iter().map(|&k| (k + twist + 1).max(0) as usize).sum()
    }
}

/// Counts `#{i : kᵢ ≥ s} = h⁰(E(−s)) − h⁰(E(−s−1))` for `s` in
/// `[det − maxexp(adj T), maxexp(T)]`, which contains every splitting degree.
pub fn splitting_type<T: Scalar>(t: &LaurentMatrix<T>) -> Result<SplittingType> {
    let problem = SectionProblem::new(t)?;
    let spread = t.spread();
    let lo = problem.det_exp - problem.adj_max;
    let hi = t.max_exp();
    let h0_at = |s: i32| problem.h0(-s, problem.degree_bound(-s, spread));
    let dims: Vec<usize> = (lo..=hi + 2).map(h0_at).collect();
    let at_least = |s: i32| -> usize {
        let idx = (s - lo) as usize;
        dims[idx] - dims[idx + 1]
    };
    if at_least(lo) != problem.n || at_least(hi + 1) != 0 {
        return Err(Error::Invalid("splitting degrees escaped the exponent window".into()));
    }
    let mut degrees = Vec::with_capacity(problem.n);
    for s in (lo..=hi).rev() {
        let new = at_least(s) - at_least(s + 1);
        degrees.extend(std::iter::repeat_n(s, new));
    }
    let st = SplittingType::new(degrees);
    debug_assert_eq!(st.degrees.iter().sum::<i32>(), problem.det_exp);
    Ok(st)
}

pub fn is_pure_weight<T: Scalar>(t: &LaurentMatrix<T>, k: i32) -> Result<bool> {
    Ok(splitting_type(t)?.is_pure(k))
}

/// A block upper-triangular transition matrix with declared block sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredBundle<T: Scalar> {
    pub transition: LaurentMatrix<T>,
    pub blocks: Vec<usize>,
}

impl<T: Scalar> FilteredBundle<T> {
    pub fn new(transition: LaurentMatrix<T>, blocks: Vec<usize>) -> Result<Self> {
        if blocks.contains(&0) || blocks.iter().sum::<usize>() != transition.rank() {
            return Err(Error::Invalid(format!("block sizes {blocks:?} do not partition rank {}", transition.rank())));
        }
        let mut start = 0;
        for &b in &blocks {
            let end = start + b;
            for i in end..transition.rank() {
                for j in start..end {
                    if !transition.entry(i, j).clone().cleaned().is_zero() {
                        return Err(Error::Invalid(format!("entry ({i}, {j}) below the diagonal blocks is nonzero")));
                    }
                }
            }
            start = end;
        }
        Ok(Self { transition, blocks })
    }

    /// Stacks blocks along the diagonal.
    pub fn block_diagonal(blocks: &[LaurentMatrix<T>]) -> Result<Self> {
        let n: usize = blocks.iter().map(|b| b.rank()).sum();
        let mut entries = vec![vec![LaurentPoly::zero(); n]; n];
        let mut off = 0;
        for b in blocks {
            for i in 0..b.rank() {
                for j in 0..b.rank() {
                    entries[off + i][off + j] = b.entry(i, j).clone();
                }
            }
            off += b.rank();
        }
        Self::new(LaurentMatrix::from_entries(entries)?, blocks.iter().map(|b| b.rank()).collect())
    }
}

pub fn graded_pieces<T: Scalar>(f: &FilteredBundle<T>) -> Result<Vec<LaurentMatrix<T>>> {
    let mut out = Vec::with_capacity(f.blocks.len());
    let mut start = 0;
    for &b in &f.blocks {
        let entries = (start..start + b)
            .map(|i| (start..start + b).map(|j| f.transition.entry(i, j).clone()).collect())
            .collect();
        let piece = LaurentMatrix::from_entries(entries)?;
        piece.unit_determinant()?;
        out.push(piece);
        start += b;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockReport {
    pub splitting: Vec<i32>,
    pub weight: i32,
    pub pure: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedTwistorReport {
    pub blocks: Vec<BlockReport>,
    pub pass: bool,
}

pub fn check_mixed_twistor<T: Scalar>(f: &FilteredBundle<T>, weights: &[i32]) -> Result<MixedTwistorReport> {
    if weights.len() != f.blocks.len() {
        return Err(Error::Invalid(format!("{} weights declared for {} blocks", weights.len(), f.blocks.len())));
    }
    let mut blocks = Vec::with_capacity(weights.len());
    for (piece, &w) in graded_pieces(f)?.iter().zip(weights) {
        let st = splitting_type(piece)?;
        blocks.push(BlockReport { pure: st.is_pure(w), splitting: st.degrees, weight: w });
    }
    let pass = blocks.iter().all(|b| b.pure);
    Ok(MixedTwistorReport { blocks, pass })
}

/// σ-fixedness of a section `c₀ + c₁λ + c₂λ²` of O(2): `s(λ) = −λ²·conj(s(−1/λ̄))`,
/// i.e. `c₁ ∈ ℝ` and `c₂ = −conj(c₀)`.
pub fn sigma_fixed_check<T: Scalar>(t: &LaurentMatrix<T>, k: i32, coeffs: &[Complex<T>]) -> Result<bool> {
    let line_degree = match (t.rank(), t.entry(0, 0).as_monomial()) {
        (1, Some((c, d))) if (c.clone() - Complex::new(T::one(), T::zero())).is_zero() => d,
        _ => return Err(Error::Unsupported("sigma check needs a transition of the form [[lambda^k]]".into())),
    };
    if line_degree != k {
        return Err(Error::Invalid(format!("transition is O({line_degree}), not O({k})")));
    }
    if k != 2 {
        return Err(Error::Unsupported(format!("sigma check is implemented for O(2) only, got O({k})")));
    }
    let [c0, c1, c2] = coeffs else {
        return Err(Error::Invalid(format!("O(2) sections have 3 coefficients, got {}", coeffs.len())));
    };
    Ok(c1.im.is_negligible() && complex_is_negligible(&(c2.clone() + c0.conj())))
}
