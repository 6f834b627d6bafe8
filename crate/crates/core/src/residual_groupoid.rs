//! The Hecke-gauge groupoid on residual data.
//!
//! At one puncture the residual space is `(λ, a, b)` and the groupoid is
//! generated by
//!
//! ```text
//! h(λ, a, b)  = (λ, b − λ, a)
//! h⁻¹(λ, a, b) = (λ, b, a + λ)
//! p(λ, a, b)  = (λ, b, a)        defined when a ≠ b
//! ```
//!
//! Every word acts by an affine map `(a, b) ↦ (x − iλ, y − jλ)` with
//! `(x, y)` either `(a, b)` or `(b, a)`. That triple is in bijection with the
//! normal forms `p^ε (h p)^k h^m`, which is how words are normalized.
//! Domains are finite sets `S` of integers: a point is admissible iff
//! `b − a ≠ cλ` for all `c ∈ S`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{complex_is_negligible, complex_to_f64, serde_complex, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ResidualPoint<T: Scalar> {
    #[serde(with = "serde_complex")]
    pub lambda: Complex<T>,
    #[serde(with = "serde_complex")]
    pub a: Complex<T>,
    #[serde(with = "serde_complex")]
    pub b: Complex<T>,
}

impl<T: Scalar> ResidualPoint<T> {
    pub fn new(lambda: Complex<T>, a: Complex<T>, b: Complex<T>) -> Self {
        Self { lambda, a, b }
    }

    /// Equality up to the scalar tolerance.
    pub fn approx_eq(&self, other: &Self) -> bool {
        complex_is_negligible(&(self.lambda.clone() - other.lambda.clone()))
            && complex_is_negligible(&(self.a.clone() - other.a.clone()))
            && complex_is_negligible(&(self.b.clone() - other.b.clone()))
    }

    pub fn to_f64(&self) -> ResidualPoint<f64> {
        ResidualPoint::new(complex_to_f64(&self.lambda), complex_to_f64(&self.a), complex_to_f64(&self.b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Letter {
    H,
    HInv,
    P,
}

impl Letter {
    pub fn triple(self) -> Triple {
        match self {
            Letter::H => Triple { swap: true, i: 1, j: 0 },
            Letter::HInv => Triple { swap: true, i: 0, j: -1 },
            Letter::P => Triple { swap: true, i: 0, j: 0 },
        }
    }

    pub fn inverse(self) -> Letter {
        match self {
            Letter::H => Letter::HInv,
            Letter::HInv => Letter::H,
            Letter::P => Letter::P,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Letter::H => "h",
            Letter::HInv => "h_inv",
            Letter::P => "p",
        })
    }
}

/// A word in the generators; the rightmost letter acts first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GeneratorWord(pub Vec<Letter>);

impl GeneratorWord {
    /// Parses a comma separated list such as `"h,h_inv,p"`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            letters.push(match tok {
                "h" => Letter::H,
                "h_inv" | "h^-1" | "H" => Letter::HInv,
                "p" => Letter::P,
                other => return Err(Error::Parse(format!("unknown generator {other:?}"))),
            });
        }
        Ok(Self(letters))
    }

    /// Stagewise evaluation, `None` as soon as a `p` is applied on the diagonal.
    pub fn evaluate<T: Scalar>(&self, pt: &ResidualPoint<T>) -> Option<ResidualPoint<T>> {
        let mut cur = pt.clone();
        for letter in self.0.iter().rev() {
            if *letter == Letter::P && complex_is_negligible(&(cur.a.clone() - cur.b.clone())) {
                return None;
            }
            cur = letter.triple().act(&cur);
        }
        Some(cur)
    }
}

impl fmt::Display for GeneratorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// `p^ε (h p)^k h^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NormalForm {
    pub eps: u8,
    pub k: i64,
    pub m: i64,
}

impl NormalForm {
    pub const IDENTITY: NormalForm = NormalForm { eps: 0, k: 0, m: 0 };

    pub fn new(eps: u8, k: i64, m: i64) -> Result<Self> {
        if eps > 1 {
            return Err(Error::Invalid(format!("eps must be 0 or 1, got {eps}")));
        }
        if k < 0 {
            return Err(Error::Invalid(format!("k must be non-negative, got {k}")));
        }
        Ok(Self { eps, k, m })
    }

    pub fn triple(&self) -> Triple {
        let (n, odd) = (self.m.div_euclid(2), self.m.rem_euclid(2) == 1);
        let h_power = if odd { Triple { swap: true, i: n + 1, j: n } } else { Triple { swap: false, i: n, j: n } };
        let mut t = Triple { swap: false, i: self.k, j: 0 }.after(&h_power);
        if self.eps == 1 {
            t = Letter::P.triple().after(&t);
        }
        t
    }

    /// The word `p^ε (h p)^k h^m`, leftmost letter acting last.
    pub fn word(&self) -> GeneratorWord {
        let mut letters = Vec::new();
        if self.eps == 1 {
            letters.push(Letter::P);
        }
        for _ in 0..self.k {
            letters.push(Letter::H);
            letters.push(Letter::P);
        }
        let h = if self.m >= 0 { Letter::H } else { Letter::HInv };
        letters.extend(std::iter::repeat_n(h, self.m.unsigned_abs() as usize));
        GeneratorWord(letters)
    }

    /// Every normal form with `k ≤ max_k` and `|m| ≤ max_m`.
    pub fn window(max_k: i64, max_m: i64) -> Vec<NormalForm> {
        let mut out = Vec::new();
        for eps in 0..=1 {
            for k in 0..=max_k {
                for m in -max_m..=max_m {
                    out.push(NormalForm { eps, k, m });
                }
            }
        }
        out
    }
}

impl<'de> Deserialize<'de> for NormalForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            eps: u8,
            k: i64,
            m: i64,
        }
        let raw = Raw::deserialize(d)?;
        NormalForm::new(raw.eps, raw.k, raw.m).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g({}, {}, {})", self.eps, self.k, self.m)
    }
}

/// Closed-form action `(a, b) ↦ (x − iλ, y − jλ)`, `(x, y) = swap ? (b, a) : (a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub swap: bool,
    pub i: i64,
    pub j: i64,
}

impl Triple {
    pub const IDENTITY: Triple = Triple { swap: false, i: 0, j: 0 };

    /// `self ∘ first`.
    pub fn after(&self, first: &Triple) -> Triple {
        if self.swap {
            Triple { swap: !first.swap, i: first.j + self.i, j: first.i + self.j }
        } else {
            Triple { swap: first.swap, i: first.i + self.i, j: first.j + self.j }
        }
    }

    pub fn inverse(&self) -> Triple {
        if self.swap {
            Triple { swap: true, i: -self.j, j: -self.i }
        } else {
            Triple { swap: false, i: -self.i, j: -self.j }
        }
    }

    pub fn act<T: Scalar>(&self, pt: &ResidualPoint<T>) -> ResidualPoint<T> {
        let (x, y) = if self.swap { (&pt.b, &pt.a) } else { (&pt.a, &pt.b) };
        let l = &pt.lambda;
        ResidualPoint {
            lambda: l.clone(),
            a: x.clone() - l.clone().scale(T::from_i64(self.i)),
            b: y.clone() - l.clone().scale(T::from_i64(self.j)),
        }
    }

    /// The unique normal form with this action.
    pub fn normal_form(&self) -> NormalForm {
        let Triple { swap, i, j } = *self;
        match (swap, i >= j) {
            (false, true) => NormalForm { eps: 0, k: i - j, m: 2 * j },
            (false, false) => NormalForm { eps: 1, k: j - i - 1, m: 2 * i + 1 },
            (true, _) if i > j => NormalForm { eps: 0, k: i - j - 1, m: 2 * j + 1 },
            (true, _) => NormalForm { eps: 1, k: j - i, m: 2 * i },
        }
    }

    /// The excluded integer `c` (condition `b − a ≠ cλ` on the source) that
    /// pulls back the condition `b′ − a′ ≠ c′λ` on the target.
    pub fn pullback(&self, c: i64) -> i64 {
        if self.swap {
            self.i - self.j - c
        } else {
            c + self.j - self.i
        }
    }

    /// The condition "current a ≠ current b" after this triple, pulled back.
    fn diagonal_condition(&self) -> i64 {
        self.pullback(0)
    }
}

pub fn normalize(word: &GeneratorWord) -> NormalForm {
    word.0.iter().rev().fold(Triple::IDENTITY, |acc, letter| letter.triple().after(&acc)).normal_form()
}

/// Excluded set `S`: `(λ, a, b)` is admissible iff `b − a ≠ cλ` for `c ∈ S`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Domain {
    pub excluded: BTreeSet<i64>,
}

impl Domain {
    pub fn everywhere() -> Self {
        Self::default()
    }

    pub fn from_excluded<I: IntoIterator<Item = i64>>(it: I) -> Self {
        Self { excluded: it.into_iter().collect() }
    }

    pub fn contains<T: Scalar>(&self, pt: &ResidualPoint<T>) -> bool {
        self.violated_by(pt).is_none()
    }

    /// The first excluded `c` with `b − a = cλ`, if any.
    pub fn violated_by<T: Scalar>(&self, pt: &ResidualPoint<T>) -> Option<i64> {
        let diff = pt.b.clone() - pt.a.clone();
        self.excluded
            .iter()
            .copied()
            .find(|&c| complex_is_negligible(&(diff.clone() - pt.lambda.clone().scale(T::from_i64(c)))))
    }

    pub fn pullback(&self, along: &Triple) -> Domain {
        Domain::from_excluded(self.excluded.iter().map(|&c| along.pullback(c)))
    }

    pub fn union(&self, other: &Domain) -> Domain {
        Domain { excluded: self.excluded.union(&other.excluded).copied().collect() }
    }
}

/// The stagewise `p`-conditions of `p^ε (h p)^k h^m`.
pub fn canonical_domain(nf: &NormalForm) -> Domain {
    let word = nf.word();
    let mut acc = Triple::IDENTITY;
    let mut excluded = BTreeSet::new();
    for letter in word.0.iter().rev() {
        if *letter == Letter::P {
            excluded.insert(acc.diagonal_condition());
        }
        acc = letter.triple().after(&acc);
    }
    Domain { excluded }
}

/// An arrow of the groupoid: a normal form and the open set it is defined on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupoidElement {
    #[serde(flatten)]
    pub nf: NormalForm,
    pub domain: Domain,
}

impl<'de> Deserialize<'de> for GroupoidElement {
    /// A missing `domain` means the canonical one.
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            eps: u8,
            k: i64,
            m: i64,
            domain: Option<Domain>,
        }
        let raw = Raw::deserialize(d)?;
        let nf = NormalForm::new(raw.eps, raw.k, raw.m).map_err(serde::de::Error::custom)?;
        Ok(match raw.domain {
            Some(domain) => GroupoidElement { nf, domain },
            None => GroupoidElement::canonical(nf),
        })
    }
}

impl GroupoidElement {
    pub fn identity() -> Self {
        Self { nf: NormalForm::IDENTITY, domain: Domain::everywhere() }
    }

    pub fn canonical(nf: NormalForm) -> Self {
        let domain = canonical_domain(&nf);
        Self { nf, domain }
    }

    pub fn from_word(word: &GeneratorWord) -> Self {
        word.0
            .iter()
            .rev()
            .fold(Self::identity(), |acc, l| compose(&Self::canonical(Triple::normal_form(&l.triple())), &acc))
    }

    pub fn apply<T: Scalar>(&self, pt: &ResidualPoint<T>) -> Option<ResidualPoint<T>> {
        if !self.domain.contains(pt) {
            return None;
        }
        Some(self.nf.triple().act(pt))
    }

    pub fn inverse(&self) -> Self {
        let t = self.nf.triple();
        let inv = t.inverse();
        Self { nf: inv.normal_form(), domain: self.domain.pullback(&inv) }
    }
}

/// Applies a normal form on its canonical domain.
pub fn apply<T: Scalar>(nf: &NormalForm, pt: &ResidualPoint<T>) -> Option<ResidualPoint<T>> {
    GroupoidElement::canonical(*nf).apply(pt)
}

/// `g2 ∘ g1`, defined where `g1` is and `g1(x)` lies in the domain of `g2`.
pub fn compose(g2: &GroupoidElement, g1: &GroupoidElement) -> GroupoidElement {
    let t1 = g1.nf.triple();
    let t = g2.nf.triple().after(&t1);
    GroupoidElement { nf: t.normal_form(), domain: g1.domain.union(&g2.domain.pullback(&t1)) }
}

/// Checks at random admissible points over a fixed λ ≠ 0 that distinct normal
/// forms have distinct images, i.e. disjoint graphs.
pub fn graphs_disjoint<T: Scalar, R: Rng + ?Sized>(
    nfs: &[NormalForm],
    lambda: &Complex<T>,
    samples: usize,
    rng: &mut R,
) -> Result<bool> {
    if complex_is_negligible(lambda) {
        return Err(Error::ZeroLambda);
    }
    let elements: Vec<GroupoidElement> = nfs.iter().map(|nf| GroupoidElement::canonical(*nf)).collect();
    let mut drawn = 0;
    let mut attempts = 0;
    while drawn < samples {
        attempts += 1;
        if attempts > 100 * samples.max(1) {
            return Err(Error::Invalid("could not find generic sample points".into()));
        }
        let a = random_complex::<T, R>(rng);
        let b = random_complex::<T, R>(rng);
        let pt = ResidualPoint::new(lambda.clone(), a, b);
        if elements.iter().any(|g| !g.domain.contains(&pt)) {
            continue;
        }
        drawn += 1;
        if !images_distinct(nfs, &pt) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True iff the defined images of `pt` under distinct normal forms are
/// pairwise distinct.
pub fn images_distinct<T: Scalar>(nfs: &[NormalForm], pt: &ResidualPoint<T>) -> bool {
    let mut seen: Vec<(NormalForm, ResidualPoint<T>)> = Vec::new();
    let unique: BTreeSet<NormalForm> = nfs.iter().copied().collect();
    for nf in unique {
        if let Some(img) = apply(&nf, pt) {
            if seen.iter().any(|(_, other)| other.approx_eq(&img)) {
                return false;
            }
            seen.push((nf, img));
        }
    }
    true
}

pub(crate) fn random_complex<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let den = rng.random_range(1..=97);
    Complex::new(
        T::from_ratio(rng.random_range(-400..=400), den),
        T::from_ratio(rng.random_range(-400..=400), rng.random_range(1..=89)),
    )
}

/// One groupoid element per puncture; punctures not listed act trivially.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MultiElement {
    pub punctures: BTreeMap<String, GroupoidElement>,
}

impl MultiElement {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(puncture: &str, g: GroupoidElement) -> Self {
        let mut punctures = BTreeMap::new();
        punctures.insert(puncture.to_string(), g);
        Self { punctures }
    }

    pub fn get(&self, puncture: &str) -> GroupoidElement {
        self.punctures.get(puncture).cloned().unwrap_or_else(GroupoidElement::identity)
    }

    /// Normal forms with identity components dropped.
    pub fn normal_forms(&self) -> BTreeMap<String, NormalForm> {
        self.punctures.iter().filter(|(_, g)| g.nf != NormalForm::IDENTITY).map(|(y, g)| (y.clone(), g.nf)).collect()
    }

    pub fn compose(&self, first: &MultiElement) -> MultiElement {
        let names: BTreeSet<&String> = self.punctures.keys().chain(first.punctures.keys()).collect();
        let punctures = names.into_iter().map(|y| (y.clone(), compose(&self.get(y), &first.get(y)))).collect();
        MultiElement { punctures }
    }

    pub fn inverse(&self) -> MultiElement {
        MultiElement { punctures: self.punctures.iter().map(|(y, g)| (y.clone(), g.inverse())).collect() }
    }
}

/// Componentwise application. `Ok(None)` when some component is undefined.
pub fn multi_apply<T: Scalar>(
    e: &MultiElement,
    pts: &BTreeMap<String, ResidualPoint<T>>,
) -> Result<Option<BTreeMap<String, ResidualPoint<T>>>> {
    let mut lambdas = pts.values().map(|p| &p.lambda);
    if let Some(first) = lambdas.next() {
        if lambdas.any(|l| !complex_is_negligible(&(l.clone() - first.clone()))) {
            return Err(Error::Invalid("points at different punctures must share lambda".into()));
        }
    }
    if let Some(y) = e.punctures.keys().find(|y| !pts.contains_key(*y)) {
        return Err(Error::Invalid(format!("no residual point given for puncture {y:?}")));
    }
    let mut out = BTreeMap::new();
    for (y, pt) in pts {
        match e.get(y).apply(pt) {
            Some(img) => {
                out.insert(y.clone(), img);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type Q = BigRational;

    fn c(re: i64, im: i64) -> Complex<Q> {
        Complex::new(Q::from_i64(re), Q::from_i64(im))
    }

    fn cr(re: Q) -> Complex<Q> {
        Complex::new(re, Q::from_i64(0))
    }

    fn nf(eps: u8, k: i64, m: i64) -> NormalForm {
        NormalForm::new(eps, k, m).unwrap()
    }

    #[test]
    fn apply_examples() {
        let pt = ResidualPoint::new(cr(Q::from_i64(1)), cr(Q::from_ratio(1, 5)), cr(Q::from_ratio(1, 2)));
        let img = apply(&nf(0, 0, 1), &pt).unwrap();
        assert_eq!(img, ResidualPoint::new(c(1, 0), cr(Q::from_ratio(-1, 2)), cr(Q::from_ratio(1, 5))));
        let diag = ResidualPoint::new(c(3, 1), c(2, 0), c(2, 0));
        assert_eq!(apply(&nf(1, 0, 0), &diag), None);
        let bad = ResidualPoint::new(c(1, 0), c(0, 0), c(-1, 0));
        assert_eq!(apply(&nf(0, 2, 0), &bad), None);
        assert!(NormalForm::new(0, -1, 0).is_err());
        assert!(NormalForm::new(2, 0, 0).is_err());
    }

    #[test]
    fn normalize_examples() {
        let w = |s: &str| GeneratorWord::parse(s).unwrap();
        assert_eq!(normalize(&w("h,h_inv")), nf(0, 0, 0));
        assert_eq!(normalize(&w("p,p")), nf(0, 0, 0));
        assert_eq!(normalize(&w("h,h,p")), nf(1, 0, 2));
        assert_eq!(normalize(&w("")), nf(0, 0, 0));
        assert!(GeneratorWord::parse("h,q").is_err());
    }

    #[test]
    fn normal_form_word_roundtrip() {
        for g in NormalForm::window(4, 5) {
            assert_eq!(normalize(&g.word()), g, "{g}");
            assert_eq!(g.triple().normal_form(), g);
        }
    }

    #[test]
    fn hp_acts_as_documented() {
        // (h p)^k (a, b) = (a − kλ, b)
        for k in 0..5 {
            assert_eq!(nf(0, k, 0).triple(), Triple { swap: false, i: k, j: 0 });
        }
    }

    #[test]
    fn canonical_domain_examples() {
        assert_eq!(canonical_domain(&nf(0, 2, 0)), Domain::from_excluded([0, -1]));
        for m in -4..=4 {
            assert_eq!(canonical_domain(&nf(0, 0, m)), Domain::everywhere());
        }
        // p·h·p: a ≠ b first, then h p sends (a, b) to (a − λ, b), so a − λ ≠ b.
        assert_eq!(canonical_domain(&nf(1, 1, 0)), Domain::from_excluded([0, -1]));
        let k = 5;
        assert_eq!(canonical_domain(&nf(0, k, 0)), Domain::from_excluded((0..k).map(|c| -c)));
    }

    #[test]
    fn compose_examples() {
        let g = GroupoidElement::canonical(nf(1, 2, -3));
        assert_eq!(compose(&GroupoidElement::identity(), &g), g);
        let h = GroupoidElement::canonical(nf(0, 0, 1));
        let h_inv = GroupoidElement::canonical(nf(0, 0, -1));
        assert_eq!(compose(&h_inv, &h), GroupoidElement::identity());
        let p = GroupoidElement::canonical(nf(1, 0, 0));
        let hp = GroupoidElement::canonical(nf(0, 1, 0));
        let php = compose(&p, &hp);
        assert_eq!(php.nf, normalize(&GeneratorWord::parse("p,h,p").unwrap()));
        assert_eq!(php, GroupoidElement::canonical(nf(1, 1, 0)));
        // p ∘ p is the identity arrow restricted off the diagonal
        assert_eq!(compose(&p, &p), GroupoidElement { nf: NormalForm::IDENTITY, domain: Domain::from_excluded([0]) });
    }

    #[test]
    fn inverse_domains() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for g in NormalForm::window(3, 3) {
            let g = GroupoidElement::canonical(g);
            let left = compose(&g.inverse(), &g);
            assert_eq!(left.nf, NormalForm::IDENTITY);
            assert_eq!(left.domain, g.domain);
            for _ in 0..10 {
                let pt = ResidualPoint::new(c(1, 0), random_complex(&mut rng), random_complex(&mut rng));
                if let Some(img) = g.apply(&pt) {
                    assert_eq!(g.inverse().apply(&img), Some(pt));
                }
            }
        }
    }

    #[test]
    fn graphs_disjoint_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let window = NormalForm::window(3, 3);
        let pt = ResidualPoint::new(c(1, 0), c(0, 0), cr(Q::from_ratio(1, 3)));
        assert!(images_distinct(&window, &pt));
        assert!(graphs_disjoint(&[nf(0, 0, 0)], &c(1, 0), 5, &mut rng).unwrap());
        assert!(graphs_disjoint(&[nf(0, 0, 2), nf(0, 1, 0)], &c(1, 0), 20, &mut rng).unwrap());
        assert_eq!(graphs_disjoint(&window, &c(0, 0), 5, &mut rng), Err(Error::ZeroLambda));
    }

    #[test]
    fn lambda_zero_collapses_to_diagonal_test() {
        let pt = ResidualPoint::new(c(0, 0), c(1, 0), c(1, 0));
        assert_eq!(apply(&nf(0, 3, 0), &pt), None);
        let off = ResidualPoint::new(c(0, 0), c(1, 0), c(2, 0));
        assert_eq!(apply(&nf(0, 3, 0), &off), Some(off.clone()));
        // at λ = 0 distinct normal forms collide: the graphs are not disjoint there
        assert!(!images_distinct(&[nf(0, 0, 0), nf(0, 0, 2)], &off));
    }

    #[test]
    fn multi_apply_examples() {
        let mut pts = BTreeMap::new();
        pts.insert("y1".to_string(), ResidualPoint::new(c(1, 0), c(2, 0), c(5, 0)));
        pts.insert("y2".to_string(), ResidualPoint::new(c(1, 0), c(3, 0), c(4, 1)));
        let id = MultiElement::identity();
        assert_eq!(multi_apply(&id, &pts).unwrap(), Some(pts.clone()));

        let mut e = MultiElement::single("y1", GroupoidElement::canonical(nf(0, 0, 1)));
        e.punctures.insert("y2".into(), GroupoidElement::canonical(nf(1, 0, 0)));
        let out = multi_apply(&e, &pts).unwrap().unwrap();
        assert_eq!(out["y1"], ResidualPoint::new(c(1, 0), c(4, 0), c(2, 0)));
        assert_eq!(out["y2"], ResidualPoint::new(c(1, 0), c(4, 1), c(3, 0)));

        let mut diag = pts.clone();
        diag.insert("y2".into(), ResidualPoint::new(c(1, 0), c(3, 0), c(3, 0)));
        let p_only = MultiElement::single("y2", GroupoidElement::canonical(nf(1, 0, 0)));
        assert_eq!(multi_apply(&p_only, &diag).unwrap(), None);

        let mut skew = pts.clone();
        skew.insert("y2".into(), ResidualPoint::new(c(2, 0), c(3, 0), c(4, 0)));
        assert!(multi_apply(&id, &skew).is_err());
    }

    #[test]
    fn json_shapes() {
        let g = nf(1, 2, -3);
        let v = serde_json::to_value(g).unwrap();
        assert_eq!(v, serde_json::json!({"eps": 1, "k": 2, "m": -3}));
        assert!(serde_json::from_value::<NormalForm>(serde_json::json!({"eps": 0, "k": -1, "m": 0})).is_err());
        let e = MultiElement::single("y1", GroupoidElement::canonical(nf(0, 2, 0)));
        let text = serde_json::to_string(&e).unwrap();
        assert_eq!(serde_json::from_str::<MultiElement>(&text).unwrap(), e);
        let bare: MultiElement =
            serde_json::from_value(serde_json::json!({"punctures": {"y1": {"eps": 0, "k": 1, "m": 0}}})).unwrap();
        assert_eq!(bare.get("y1").nf, nf(0, 1, 0));
    }
}
