//! The rank-1 Deligne–Hitchin model: σ-invariant sections of O(2).
//!
//! A section is stored as a KMS element `(a, α)` and has coefficients
//! `(α, −a, −ᾱ)`, so `s(λ) = α − aλ − ᾱλ²` is exactly the residue flow.
//! The other chart is glued by `a = λ² b` with `μ = −1/λ`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kms::{conjugate_kms, parabolic_weight, recover_kms, residue_eigenvalue, Chart, KmsElement, LambdaPoint};
use crate::scalar::{complex_is_negligible, serde_complex, serde_scalar, Scalar};
use crate::twistor_bundle::{LaurentMatrix, LaurentPoly};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct InvariantSection<T: Scalar> {
    #[serde(with = "serde_scalar")]
    pub a: T,
    #[serde(with = "serde_complex")]
    pub alpha: Complex<T>,
}

impl<T: Scalar> InvariantSection<T> {
    pub fn zero() -> Self {
        Self { a: T::zero(), alpha: Complex::new(T::zero(), T::zero()) }
    }

    /// Coefficients `(c₀, c₁, c₂)` of `c₀ + c₁λ + c₂λ²`.
    pub fn coefficients(&self) -> [Complex<T>; 3] {
        [self.alpha.clone(), Complex::new(-self.a.clone(), T::zero()), -self.alpha.conj()]
    }

    /// Rejects coefficient triples that are not σ-fixed.
    pub fn from_coefficients(c: &[Complex<T>; 3]) -> Result<Self> {
        if !c[1].im.is_negligible() {
            return Err(Error::Invalid("c1 must be real".into()));
        }
        if !complex_is_negligible(&(c[2].clone() + c[0].conj())) {
            return Err(Error::Invalid("c2 must equal -conj(c0)".into()));
        }
        Ok(Self { a: -c[1].re.clone(), alpha: c[0].clone() })
    }

    pub fn kms(&self) -> KmsElement<T> {
        KmsElement { a: self.a.clone(), alpha: self.alpha.clone() }
    }

    /// Value in the zero chart.
    pub fn eval(&self, lambda: &Complex<T>) -> Complex<T> {
        residue_eigenvalue(&self.kms(), lambda)
    }

    /// The section's O(2) transition `[[λ²]]`.
    pub fn transition() -> LaurentMatrix<T> {
        LaurentMatrix::diagonal_monomials(&[2])
    }

    pub fn to_f64(&self) -> InvariantSection<f64> {
        InvariantSection { a: self.a.to_f64(), alpha: Complex::new(self.alpha.re.to_f64(), self.alpha.im.to_f64()) }
    }
}

/// The antiholomorphic involution on O(2) in coefficients:
/// `(c₀, c₁, c₂) ↦ (−c̄₂, c̄₁, −c̄₀)`.
pub fn sigma_action<T: Scalar>(c: &[Complex<T>; 3]) -> [Complex<T>; 3] {
    [-c[2].conj(), c[1].conj(), -c[0].conj()]
}

/// Real dimension of the σ-fixed locus in ℂ³, from the rank of `σ − id`
/// acting on ℝ⁶.
pub fn fixed_locus_real_dimension<T: Scalar>() -> usize {
    let zero = || Complex::new(T::zero(), T::zero());
    let mut columns: Vec<Vec<T>> = Vec::with_capacity(6);
    for basis in 0..6 {
        let mut c = [zero(), zero(), zero()];
        let unit = if basis % 2 == 0 { Complex::new(T::one(), T::zero()) } else { Complex::new(T::zero(), T::one()) };
        c[basis / 2] = unit;
        let s = sigma_action(&c);
        let mut col = Vec::with_capacity(6);
        for (x, y) in s.iter().zip(&c) {
            let d = x.clone() - y.clone();
            col.push(d.re);
            col.push(d.im);
        }
        columns.push(col);
    }
    let rows: Vec<Vec<T>> = (0..6).map(|r| columns.iter().map(|col| col[r].clone()).collect()).collect();
    6 - crate::linalg::real_rank(&rows)
}

pub fn section_from_kms<T: Scalar>(u: &KmsElement<T>) -> InvariantSection<T> {
    InvariantSection { a: u.a.clone(), alpha: u.alpha.clone() }
}

/// `s(κ)` in κ's own chart.
pub fn restrict<T: Scalar>(s: &InvariantSection<T>, kappa: &LambdaPoint<T>) -> Complex<T> {
    match kappa.chart {
        Chart::Zero => s.eval(&kappa.coord),
        Chart::Infinity => residue_eigenvalue(&conjugate_kms(&s.kms()), &kappa.coord),
    }
}

/// The real 2×3 matrix of `(a, Re α, Im α) ↦ (Re s(κ), Im s(κ))`.
pub fn restriction_matrix<T: Scalar>(kappa: &LambdaPoint<T>) -> Vec<Vec<T>> {
    let zero = || Complex::new(T::zero(), T::zero());
    let basis = [
        InvariantSection { a: T::one(), alpha: zero() },
        InvariantSection { a: T::zero(), alpha: Complex::new(T::one(), T::zero()) },
        InvariantSection { a: T::zero(), alpha: Complex::new(T::zero(), T::one()) },
    ];
    let images: Vec<Complex<T>> = basis.iter().map(|s| restrict(s, kappa)).collect();
    vec![images.iter().map(|z| z.re.clone()).collect(), images.iter().map(|z| z.im.clone()).collect()]
}

/// The splitting `ℝ³ ≅ ℝ × ℂ_κ` at one fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FiberSplit<T: Scalar> {
    #[serde(with = "serde_scalar")]
    pub p: T,
    #[serde(rename = "e", with = "serde_complex")]
    pub value: Complex<T>,
    #[serde(rename = "lambda")]
    pub at: LambdaPoint<T>,
}

impl<T: Scalar> FiberSplit<T> {
    /// The section this split describes.
    pub fn section(&self) -> InvariantSection<T> {
        let u = recover_kms(&self.p, &self.value, &self.at.coord);
        match self.at.chart {
            Chart::Zero => section_from_kms(&u),
            Chart::Infinity => section_from_kms(&conjugate_kms(&u)),
        }
    }
}

pub fn split_at<T: Scalar>(s: &InvariantSection<T>, kappa: &LambdaPoint<T>) -> FiberSplit<T> {
    let u = match kappa.chart {
        Chart::Zero => s.kms(),
        Chart::Infinity => conjugate_kms(&s.kms()),
    };
    FiberSplit { p: parabolic_weight(&u, &kappa.coord), value: residue_eigenvalue(&u, &kappa.coord), at: kappa.clone() }
}

/// The section vanishing at κ (and its antipode) whose weight at κ is 1.
pub fn kernel_of_restriction<T: Scalar>(kappa: &LambdaPoint<T>) -> InvariantSection<T> {
    let zero = Complex::new(T::zero(), T::zero());
    FiberSplit { p: T::one(), value: zero, at: kappa.clone() }.section()
}

/// `(λ, a) ↦ (−1/λ, a/λ²)`.
pub fn glue_chart_point<T: Scalar>(lambda: &Complex<T>, a_val: &Complex<T>) -> Result<(Complex<T>, Complex<T>)> {
    if complex_is_negligible(lambda) {
        return Err(Error::ZeroLambda);
    }
    let one = Complex::new(T::one(), T::zero());
    let mu = -(one / lambda.clone());
    let b = a_val.clone() / (lambda.clone() * lambda.clone());
    Ok((mu, b))
}

/// The section as a polynomial in λ, for the bundle solver.
pub fn section_poly<T: Scalar>(s: &InvariantSection<T>) -> LaurentPoly<T> {
    let mut p = LaurentPoly::zero();
    for (i, c) in s.coefficients().into_iter().enumerate() {
        p.add_term(i as i32, c);
    }
    p
}
