//! Betti residual data and the exponential comparison with the residual
//! groupoid over λ ≠ 0.
//!
//! The exponent is divided by λ: `(λ, a, b) ↦ (λ, e^{2πi a/λ}, e^{2πi b/λ})`.
//! With that convention `h²` (both eigenvalues shift by −λ) becomes the
//! identity and `h`, `p` both become the swap.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::residual_groupoid::{apply, MultiElement, NormalForm, ResidualPoint};
use crate::scalar::{complex_to_f64, serde_complex, Scalar};

/// Monodromy eigenvalues at one puncture over a fixed λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BettiResidualPoint {
    #[serde(with = "serde_complex")]
    pub lambda: Complex64,
    #[serde(with = "serde_complex")]
    pub m1: Complex64,
    #[serde(with = "serde_complex")]
    pub m2: Complex64,
}

/// Default closeness for comparing monodromy eigenvalues.
pub const BETTI_TOLERANCE: f64 = 1e-10;

impl BettiResidualPoint {
    pub fn swapped(&self) -> Self {
        Self { lambda: self.lambda, m1: self.m2, m2: self.m1 }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        close(self.lambda, other.lambda, tol) && close(self.m1, other.m1, tol) && close(self.m2, other.m2, tol)
    }
}

fn close(x: Complex64, y: Complex64, tol: f64) -> bool {
    (x - y).norm() <= tol * (1.0 + x.norm().max(y.norm()))
}

/// Image of a normal form: whether it swaps the two eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiElement {
    pub swap: bool,
}

impl BettiElement {
    /// `None` when the swap is applied to equal eigenvalues.
    pub fn apply(&self, pt: &BettiResidualPoint, tol: f64) -> Option<BettiResidualPoint> {
        if !self.swap {
            return Some(*pt);
        }
        if close(pt.m1, pt.m2, tol) {
            return None;
        }
        Some(pt.swapped())
    }
}

pub fn rank1_rh(lambda: Complex64, a: Complex64) -> Result<Complex64> {
    if lambda.norm_sqr() == 0.0 {
        return Err(Error::ZeroLambda);
    }
    Ok((Complex64::new(0.0, 2.0 * PI) * a / lambda).exp())
}

pub fn betti_map<T: Scalar>(pt: &ResidualPoint<T>) -> Result<BettiResidualPoint> {
    let lambda = complex_to_f64(&pt.lambda);
    Ok(BettiResidualPoint {
        lambda,
        m1: rank1_rh(lambda, complex_to_f64(&pt.a))?,
        m2: rank1_rh(lambda, complex_to_f64(&pt.b))?,
    })
}

pub fn functor_on_element(nf: &NormalForm) -> BettiElement {
    BettiElement { swap: (nf.eps as i64 + nf.m).rem_euclid(2) == 1 }
}

pub fn connected_in_betti(p1: &BettiResidualPoint, p2: &BettiResidualPoint, tol: f64) -> Result<bool> {
    if !close(p1.lambda, p2.lambda, tol) {
        return Err(Error::Invalid("points must lie over the same lambda".into()));
    }
    Ok(p1.approx_eq(p2, tol) || (!close(p1.m1, p1.m2, tol) && p1.swapped().approx_eq(p2, tol)))
}

pub fn connected_in_betti_multi(
    p1: &BTreeMap<String, BettiResidualPoint>,
    p2: &BTreeMap<String, BettiResidualPoint>,
    tol: f64,
) -> Result<bool> {
    if p1.len() != p2.len() || p1.keys().any(|k| !p2.contains_key(k)) {
        return Err(Error::Invalid("point maps must name the same punctures".into()));
    }
    for (y, a) in p1 {
        if !connected_in_betti(a, &p2[y], tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Hecke offsets are multiples of λ, so only normal forms with
/// `k, |m| ≤ 2 + ⌈max|Δ| / |λ|⌉` can relate the two points.
pub fn search_window(p1: &ResidualPoint<f64>, p2: &ResidualPoint<f64>) -> i64 {
    let l = p1.lambda.norm();
    let spread = [p1.a - p2.a, p1.a - p2.b, p1.b - p2.a, p1.b - p2.b].iter().map(|d| d.norm()).fold(0.0, f64::max);
    2 + (spread / l).ceil() as i64
}

/// A normal form inside the search window sending `p1` to `p2`, if any.
pub fn find_connecting_element(p1: &ResidualPoint<f64>, p2: &ResidualPoint<f64>) -> Option<NormalForm> {
    if p1.lambda.norm_sqr() == 0.0 {
        return None;
    }
    let k = search_window(p1, p2);
    NormalForm::window(2 * k + 1, 2 * k + 1).into_iter().find(|nf| apply(nf, p1).is_some_and(|img| img.approx_eq(p2)))
}

/// Per-puncture search; returns the connecting multi-element.
pub fn find_connecting_multi(
    p1: &BTreeMap<String, ResidualPoint<f64>>,
    p2: &BTreeMap<String, ResidualPoint<f64>>,
) -> Option<MultiElement> {
    let mut out = MultiElement::identity();
    for (y, a) in p1 {
        let b = p2.get(y)?;
        let nf = find_connecting_element(a, b)?;
        out.punctures.insert(y.clone(), crate::residual_groupoid::GroupoidElement::canonical(nf));
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residual_groupoid::{GroupoidElement, NormalForm};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pt(l: Complex64, a: Complex64, b: Complex64) -> ResidualPoint<f64> {
        ResidualPoint::new(l, a, b)
    }

    #[test]
    fn betti_map_examples() {
        let img = betti_map(&pt(c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.0))).unwrap();
        assert!(img.approx_eq(&BettiResidualPoint { lambda: c(1.0, 0.0), m1: c(1.0, 0.0), m2: c(-1.0, 0.0) }, 1e-12));
        let img = betti_map(&pt(c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))).unwrap();
        assert!(img.approx_eq(&BettiResidualPoint { lambda: c(2.0, 0.0), m1: c(-1.0, 0.0), m2: c(1.0, 0.0) }, 1e-12));
        let l = c(0.3, -1.1);
        let a = c(0.7, 0.2);
        let b = c(-0.4, 1.5);
        let x = betti_map(&pt(l, a, b)).unwrap();
        let y = betti_map(&pt(l, a + l, b)).unwrap();
        assert!(x.approx_eq(&y, 1e-10));
        assert_eq!(betti_map(&pt(c(0.0, 0.0), a, b)), Err(Error::ZeroLambda));
    }

    #[test]
    fn rank1_rh_examples() {
        let l = c(0.4, 0.9);
        assert!((rank1_rh(l, c(0.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        assert!((rank1_rh(l, l * 3.0).unwrap() - c(1.0, 0.0)).norm() < 1e-10);
        assert!((rank1_rh(c(1.0, 0.0), c(0.25, 0.0)).unwrap() - c(0.0, 1.0)).norm() < 1e-12);
        assert!(rank1_rh(c(0.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn functor_examples() {
        let h = NormalForm::new(0, 0, 1).unwrap();
        let h2 = NormalForm::new(0, 0, 2).unwrap();
        let p = NormalForm::new(1, 0, 0).unwrap();
        assert!(functor_on_element(&h).swap);
        assert!(!functor_on_element(&h2).swap);
        assert!(functor_on_element(&p).swap);
        assert!(!functor_on_element(&NormalForm::new(0, 3, 0).unwrap()).swap);
        let q = pt(c(0.7, 0.3), c(0.1, 0.2), c(-0.5, 0.9));
        let lhs = betti_map(&GroupoidElement::canonical(h).apply(&q).unwrap()).unwrap();
        let rhs = functor_on_element(&h).apply(&betti_map(&q).unwrap(), 1e-12).unwrap();
        assert!(lhs.approx_eq(&rhs, 1e-10));
    }

    #[test]
    fn connectivity_examples() {
        let l = c(1.0, 0.0);
        let p = BettiResidualPoint { lambda: l, m1: c(2.0, 0.0), m2: c(3.0, 0.0) };
        assert!(connected_in_betti(&p, &p, 1e-12).unwrap());
        assert!(connected_in_betti(&p, &p.swapped(), 1e-12).unwrap());
        let q = BettiResidualPoint { lambda: l, m1: c(2.0, 0.0), m2: c(4.0, 0.0) };
        assert!(!connected_in_betti(&p, &q, 1e-12).unwrap());
        let other = BettiResidualPoint { lambda: c(2.0, 0.0), ..p };
        assert!(connected_in_betti(&p, &other, 1e-12).is_err());
    }

    #[test]
    fn finds_connecting_elements() {
        let q = pt(c(0.5, 0.25), c(0.3, -0.2), c(1.1, 0.4));
        for nf in NormalForm::window(3, 3) {
            if let Some(img) = apply(&nf, &q) {
                let found = find_connecting_element(&q, &img).unwrap();
                assert_eq!(found, nf);
            }
        }
        let far = pt(q.lambda, c(0.31, -0.2), q.b);
        assert!(find_connecting_element(&q, &far).is_none());
    }
}
