//! KMS spectrum elements and their flow in λ.
//!
//! A KMS element `(a, α)` is a parabolic weight and a residue eigenvalue at
//! λ = 0. For other λ the weight and eigenvalue are
//!
//! ```text
//! p(λ) = a + 2 Re(λ ᾱ)
//! e(λ) = α − a λ − ᾱ λ²
//! ```
//!
//! and `(p, e)` determines `(a, α)` again, since `e + λ p = (1 + |λ|²) α`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{complex_is_finite, complex_is_negligible, re_mul_conj, serde_complex, serde_scalar, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct KmsElement<T: Scalar> {
    #[serde(with = "serde_scalar")]
    pub a: T,
    #[serde(with = "serde_complex")]
    pub alpha: Complex<T>,
}

impl<T: Scalar> KmsElement<T> {
    pub fn new(a: T, alpha: Complex<T>) -> Result<Self> {
        if !a.is_finite() || !complex_is_finite(&alpha) {
            return Err(Error::Invalid("KMS element must be finite".into()));
        }
        Ok(Self { a, alpha })
    }

    /// Parses the command-line form `"a,re,im"`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').collect();
        match parts.as_slice() {
            [a, re, im] => Self::new(T::parse(a)?, Complex::new(T::parse(re)?, T::parse(im)?)),
            _ => Err(Error::Parse(format!("expected \"a,re,im\", got {text:?}"))),
        }
    }

    pub fn to_f64(&self) -> KmsElement<f64> {
        KmsElement { a: self.a.to_f64(), alpha: Complex::new(self.alpha.re.to_f64(), self.alpha.im.to_f64()) }
    }

    pub fn parabolic_weight(&self, lambda: &Complex<T>) -> T {
        parabolic_weight(self, lambda)
    }

    pub fn residue_eigenvalue(&self, lambda: &Complex<T>) -> Complex<T> {
        residue_eigenvalue(self, lambda)
    }
}

impl<T: Scalar> std::ops::Sub for &KmsElement<T> {
    type Output = KmsElement<T>;

    fn sub(self, rhs: Self) -> KmsElement<T> {
        KmsElement { a: self.a.clone() - rhs.a.clone(), alpha: self.alpha.clone() - rhs.alpha.clone() }
    }
}

/// The two KMS elements at a puncture. Construction enforces that they are
/// distinct modulo ℤ × {0}.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct KmsPair<T: Scalar> {
    pub u: KmsElement<T>,
    pub u_prime: KmsElement<T>,
}

impl<T: Scalar> KmsPair<T> {
    pub fn new(u: KmsElement<T>, u_prime: KmsElement<T>) -> Result<Self> {
        if !check_hypothesis3(&u, &u_prime) {
            return Err(Error::Invalid("KMS elements differ by an element of Z x {0}".into()));
        }
        Ok(Self { u, u_prime })
    }

    /// Difference `u − u′`.
    pub fn delta(&self) -> KmsElement<T> {
        &self.u - &self.u_prime
    }

    /// The pair seen from the other chart of P¹.
    pub fn conjugate(&self) -> Self {
        Self { u: conjugate_kms(&self.u), u_prime: conjugate_kms(&self.u_prime) }
    }

    pub fn to_f64(&self) -> KmsPair<f64> {
        KmsPair { u: self.u.to_f64(), u_prime: self.u_prime.to_f64() }
    }
}

impl<'de, T: Scalar> Deserialize<'de> for KmsPair<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "T: Scalar")]
        struct Raw<T: Scalar> {
            u: KmsElement<T>,
            u_prime: KmsElement<T>,
        }
        let raw = Raw::<T>::deserialize(d)?;
        KmsPair::new(raw.u, raw.u_prime).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    /// Coordinate λ.
    Zero,
    /// Coordinate μ = −1/λ.
    Infinity,
}

impl Chart {
    pub fn other(self) -> Self {
        match self {
            Chart::Zero => Chart::Infinity,
            Chart::Infinity => Chart::Zero,
        }
    }
}

/// A point of P¹ named in one of the two standard charts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LambdaPoint<T: Scalar> {
    pub chart: Chart,
    #[serde(with = "serde_complex")]
    pub coord: Complex<T>,
}

impl<T: Scalar> LambdaPoint<T> {
    pub fn zero_chart(lambda: Complex<T>) -> Self {
        Self { chart: Chart::Zero, coord: lambda }
    }

    pub fn infinity_chart(mu: Complex<T>) -> Self {
        Self { chart: Chart::Infinity, coord: mu }
    }

    /// The same point in the other chart; `None` at the chart's missing point.
    pub fn in_other_chart(&self) -> Option<Self> {
        if complex_is_negligible(&self.coord) {
            return None;
        }
        let flipped = -(Complex::new(T::one(), T::zero()) / self.coord.clone());
        Some(Self { chart: self.chart.other(), coord: flipped })
    }

    pub fn in_chart(&self, chart: Chart) -> Option<Self> {
        if chart == self.chart {
            Some(self.clone())
        } else {
            self.in_other_chart()
        }
    }

    /// The antipodal point σ(λ) = −1/λ̄. In chart coordinates this is the
    /// conjugate coordinate in the opposite chart.
    pub fn antipode(&self) -> Self {
        Self { chart: self.chart.other(), coord: self.coord.conj() }
    }

    /// Same point of P¹, up to the scalar tolerance.
    pub fn same_point(&self, other: &Self) -> bool {
        match other.in_chart(self.chart) {
            Some(o) => complex_is_negligible(&(o.coord - self.coord.clone())),
            None => false,
        }
    }
}

pub fn parabolic_weight<T: Scalar>(u: &KmsElement<T>, lambda: &Complex<T>) -> T {
    let two = T::from_i64(2);
    u.a.clone() + two * re_mul_conj(lambda, &u.alpha)
}

pub fn residue_eigenvalue<T: Scalar>(u: &KmsElement<T>, lambda: &Complex<T>) -> Complex<T> {
    let l2 = lambda.clone() * lambda.clone();
    u.alpha.clone() - lambda.clone().scale(u.a.clone()) - u.alpha.conj() * l2
}

/// Inverse of the flow at a fixed λ.
pub fn recover_kms<T: Scalar>(p: &T, e: &Complex<T>, lambda: &Complex<T>) -> KmsElement<T> {
    let denom = T::one() + lambda.norm_sqr();
    let alpha = (e.clone() + lambda.clone().scale(p.clone())).unscale(denom);
    let two = T::from_i64(2);
    let a = p.clone() - two * re_mul_conj(lambda, &alpha);
    KmsElement { a, alpha }
}

/// The integer gauge action `(a, α) ↦ (a + k, α)`.
pub fn hecke_shift<T: Scalar>(u: &KmsElement<T>, k: i64) -> KmsElement<T> {
    KmsElement { a: u.a.clone() + T::from_i64(k), alpha: u.alpha.clone() }
}

/// True iff `u − u′ ∉ ℤ × {0}`, with the scalar's tolerance for both tests.
pub fn check_hypothesis3<T: Scalar>(u: &KmsElement<T>, u_prime: &KmsElement<T>) -> bool {
    let d = u - u_prime;
    !(complex_is_negligible(&d.alpha) && d.a.as_integer().is_some())
}

/// True iff the flowed pairs at λ are not related by `(p, e) ↦ (p + k, e − kλ)`
/// for any integer k. Reduces to [`check_hypothesis3`] on the recovered
/// difference, using that the flow is real-linear and bijective.
pub fn distinct_mod_gauge<T: Scalar>(pair: &KmsPair<T>, lambda: &Complex<T>) -> bool {
    let dp = parabolic_weight(&pair.u, lambda) - parabolic_weight(&pair.u_prime, lambda);
    let de = residue_eigenvalue(&pair.u, lambda) - residue_eigenvalue(&pair.u_prime, lambda);
    let diff = recover_kms(&dp, &de, lambda);
    let zero = KmsElement { a: T::zero(), alpha: Complex::new(T::zero(), T::zero()) };
    check_hypothesis3(&diff, &zero)
}

/// `(a, α) ↦ (−a, −ᾱ)`: the element whose residue flow in μ = −1/λ is
/// `λ⁻² e(λ)`.
pub fn conjugate_kms<T: Scalar>(u: &KmsElement<T>) -> KmsElement<T> {
    KmsElement { a: -u.a.clone(), alpha: -u.alpha.conj() }
}
