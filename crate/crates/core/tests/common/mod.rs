//! Random generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use twistorlab::kms::check_hypothesis3;
use twistorlab::preferred_section::SurfaceData;
use twistorlab::twistor_bundle::{LaurentMatrix, LaurentPoly};
use twistorlab::{Complex, KmsElement, KmsPair, Rational, ResidualPoint, Scalar};

pub type Q = Rational;

pub fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

pub fn qc(re: Q, im: Q) -> Complex<Q> {
    Complex::new(re, im)
}

pub fn rand_q<R: Rng>(rng: &mut R, bound: i64) -> Q {
    let d = rng.random_range(1..=24);
    q(rng.random_range(-bound * d..=bound * d), d)
}

pub fn rand_qc<R: Rng>(rng: &mut R, bound: i64) -> Complex<Q> {
    qc(rand_q(rng, bound), rand_q(rng, bound))
}

pub fn rand_nonzero_qc<R: Rng>(rng: &mut R, bound: i64) -> Complex<Q> {
    loop {
        let z = rand_qc(rng, bound);
        if z != qc(q(0, 1), q(0, 1)) {
            return z;
        }
    }
}

pub fn rand_kms<R: Rng>(rng: &mut R, bound: i64) -> KmsElement<Q> {
    KmsElement { a: rand_q(rng, bound), alpha: rand_qc(rng, bound) }
}

pub fn rand_f64c<R: Rng>(rng: &mut R, bound: f64) -> Complex<f64> {
    Complex::new(rng.random_range(-bound..bound), rng.random_range(-bound..bound))
}

/// A residual point with `b − a ∉ ℤλ`, so every word is defined at it.
pub fn generic_point<R: Rng>(rng: &mut R, lambda: &Complex<Q>) -> ResidualPoint<Q> {
    loop {
        let a = rand_qc(rng, 5);
        let b = rand_qc(rng, 5);
        let ratio = (b.clone() - a.clone()) / lambda.clone();
        if !(ratio.im == q(0, 1) && ratio.re.as_integer().is_some()) {
            return ResidualPoint::new(lambda.clone(), a, b);
        }
    }
}

/// A valid pair at one puncture.
pub fn rand_pair<R: Rng>(rng: &mut R, bound: i64) -> KmsPair<Q> {
    loop {
        let u = rand_kms(rng, bound);
        let v = if rng.random_bool(0.2) {
            // weights-only difference, or a collision-prone equal weight
            KmsElement { a: rand_q(rng, bound), alpha: u.alpha.clone() }
        } else {
            rand_kms(rng, bound)
        };
        if check_hypothesis3(&u, &v) {
            return KmsPair::new(u, v).unwrap();
        }
    }
}

pub fn rand_surface<R: Rng>(rng: &mut R) -> SurfaceData<Q> {
    let n = rng.random_range(1..=3);
    let punctures: Vec<String> = (1..=n).map(|i| format!("y{i}")).collect();
    let kms: BTreeMap<String, KmsPair<Q>> = punctures.iter().map(|y| (y.clone(), rand_pair(rng, 1))).collect();
    SurfaceData::new(rng.random_range(0..=3), punctures, kms).unwrap()
}

fn mono(c: Complex<Q>, e: i32) -> LaurentPoly<Q> {
    LaurentPoly::monomial(c, e)
}

/// A product of elementary matrices with entries in `ℂ[λ^sign]`, a
/// permutation and a constant diagonal: unimodular over that ring.
pub fn rand_unimodular<R: Rng>(rng: &mut R, n: usize, sign: i32) -> LaurentMatrix<Q> {
    let one = qc(q(1, 1), q(0, 1));
    let mut m = LaurentMatrix::identity(n);
    for _ in 0..3 {
        if n < 2 {
            break;
        }
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n);
        while j == i {
            j = rng.random_range(0..n);
        }
        let mut entries: Vec<Vec<LaurentPoly<Q>>> = (0..n)
            .map(|r| (0..n).map(|c| if r == c { mono(one.clone(), 0) } else { LaurentPoly::zero() }).collect())
            .collect();
        let mut p = LaurentPoly::zero();
        for d in 0..=rng.random_range(0..=2) {
            p.add_term(
                sign * d,
                qc(q(rng.random_range(-3..=3), rng.random_range(1..=3)), q(rng.random_range(-2..=2), 1)),
            );
        }
        entries[i][j] = p;
        m = m.mul(&LaurentMatrix::from_entries(entries).unwrap()).unwrap();
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let entries: Vec<Vec<LaurentPoly<Q>>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    if perm[r] == c {
                        mono(qc(q(rng.random_range(1..=4), rng.random_range(1..=3)), q(0, 1)), 0)
                    } else {
                        LaurentPoly::zero()
                    }
                })
                .collect()
        })
        .collect();
    m.mul(&LaurentMatrix::from_entries(entries).unwrap()).unwrap()
}

/// A transition with known splitting: `A(λ⁻¹) · diag(λ^d) · B(λ)`.
pub fn rand_bundle<R: Rng>(rng: &mut R, n: usize) -> (LaurentMatrix<Q>, Vec<i32>) {
    let degrees: Vec<i32> = (0..n).map(|_| rng.random_range(-2..=2)).collect();
    let a = rand_unimodular(rng, n, -1);
    let b = rand_unimodular(rng, n, 1);
    let t = a.mul(&LaurentMatrix::diagonal_monomials(&degrees)).unwrap().mul(&b).unwrap();
    let mut sorted = degrees;
    sorted.sort_unstable_by(|x, y| y.cmp(x));
    (t, sorted)
}
