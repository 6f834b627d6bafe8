//! Residual-level preferred sections for rank 2.
//!
//! At each puncture the two KMS elements `u, u′` flow to weights `p, p′` and
//! eigenvalues `e, e′`. On a small disk either the weights never agree
//! modulo ℤ (case a), or they agree up to a single integer `k` and then the
//! eigenvalue branches `e` and `e′ − kλ` stay apart (case b). Each disk gets
//! an ordered pair of Hecke-shifted branches; overlapping disks are related
//! by elements of the residual groupoid, which form a cocycle.
//!
//! Loci are exact over any [`Scalar`]. Disk geometry, quadratic roots and
//! sampling run in `f64`.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::{Complex, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kms::{parabolic_weight, residue_eigenvalue, Chart, KmsElement, KmsPair, LambdaPoint};
use crate::residual_groupoid::{
    canonical_domain, Domain, GroupoidElement, MultiElement, NormalForm, ResidualPoint, Triple,
};
use crate::scalar::{complex_is_negligible, complex_to_f64, re_mul_conj, serde_complex, serde_scalar, Scalar};

/// Default sampling seed for cocycle verification.
pub const DEFAULT_SEED: u64 = 0x7457_6973;

/// Smallest radius the refinement will produce before giving up.
pub const MIN_RADIUS: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SurfaceData<T: Scalar> {
    pub genus: u32,
    pub punctures: Vec<String>,
    pub kms: BTreeMap<String, KmsPair<T>>,
}

impl<T: Scalar> SurfaceData<T> {
    pub fn new(genus: u32, punctures: Vec<String>, kms: BTreeMap<String, KmsPair<T>>) -> Result<Self> {
        if punctures.is_empty() {
            return Err(Error::Invalid("at least one puncture is required".into()));
        }
        let names: BTreeSet<&String> = punctures.iter().collect();
        if names.len() != punctures.len() {
            return Err(Error::Invalid("puncture names must be distinct".into()));
        }
        if let Some(y) = punctures.iter().find(|y| !kms.contains_key(*y)) {
            return Err(Error::Invalid(format!("no KMS data for puncture {y:?}")));
        }
        if let Some(y) = kms.keys().find(|y| !names.contains(y)) {
            return Err(Error::Invalid(format!("KMS data for unknown puncture {y:?}")));
        }
        Ok(Self { genus, punctures, kms })
    }

    pub fn to_f64(&self) -> SurfaceData<f64> {
        SurfaceData {
            genus: self.genus,
            punctures: self.punctures.clone(),
            kms: self.kms.iter().map(|(y, p)| (y.clone(), p.to_f64())).collect(),
        }
    }
}

impl<'de, T: Scalar> Deserialize<'de> for SurfaceData<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "T: Scalar")]
        struct Raw<T: Scalar> {
            genus: u32,
            punctures: Vec<String>,
            kms: BTreeMap<String, KmsPair<T>>,
        }
        let raw = Raw::<T>::deserialize(d)?;
        SurfaceData::new(raw.genus, raw.punctures, raw.kms).map_err(serde::de::Error::custom)
    }
}

/// `{λ : 2 Re(λ · conj(normal)) = offset}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", bound = "T: Scalar")]
pub enum CollisionLocus<T: Scalar> {
    Line {
        #[serde(with = "serde_complex")]
        normal: Complex<T>,
        #[serde(with = "serde_scalar")]
        offset: T,
    },
    Empty,
    Everywhere,
}

/// Where `p(λ) = p′(λ) + k`.
pub fn collision_locus<T: Scalar>(pair: &KmsPair<T>, k: i64) -> CollisionLocus<T> {
    let d = pair.delta();
    let offset = T::from_i64(k) - d.a;
    if complex_is_negligible(&d.alpha) {
        if offset.is_negligible() {
            CollisionLocus::Everywhere
        } else {
            CollisionLocus::Empty
        }
    } else {
        CollisionLocus::Line { normal: d.alpha, offset }
    }
}

/// Coefficients `(c₀, c₁, c₂)` of `e(λ) − e′(λ) + kλ`.
pub fn resonance_polynomial<T: Scalar>(pair: &KmsPair<T>, k: i64) -> [Complex<T>; 3] {
    let d = pair.delta();
    let c1 = Complex::new(T::from_i64(k) - d.a.clone(), T::zero());
    [d.alpha.clone(), c1, -d.alpha.conj()]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Resonance {
    Points {
        #[serde(with = "serde_complex_vec")]
        points: Vec<Complex64>,
    },
    Identically,
}

impl Resonance {
    pub fn points(&self) -> &[Complex64] {
        match self {
            Resonance::Points { points } => points,
            Resonance::Identically => &[],
        }
    }
}

/// Roots of the resonance polynomial, sorted by real then imaginary part.
pub fn resonance_points<T: Scalar>(pair: &KmsPair<T>, k: i64) -> Resonance {
    let [c0, c1, c2] = resonance_polynomial(pair, k);
    if complex_is_negligible(&c2) {
        // c₂ = −conj(c₀), so the polynomial is c₁λ
        return if complex_is_negligible(&c1) {
            Resonance::Identically
        } else {
            Resonance::Points { points: vec![Complex64::new(0.0, 0.0)] }
        };
    }
    let (a, b, c) = (complex_to_f64(&c2), complex_to_f64(&c1), complex_to_f64(&c0));
    let disc = (b * b - a * c * 4.0).sqrt();
    let q = if (b.conj() * disc).re >= 0.0 { -(b + disc) / 2.0 } else { -(b - disc) / 2.0 };
    let mut points = if q.norm_sqr() == 0.0 { vec![Complex64::new(0.0, 0.0); 2] } else { vec![q / a, c / q] };
    points.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Resonance::Points { points }
}

/// The integer `k` with `p(λ) = p′(λ) + k` at λ, when there is one.
pub fn collision_at<T: Scalar>(pair: &KmsPair<T>, lambda: &Complex<T>) -> Option<i64> {
    let dp = parabolic_weight(&pair.u, lambda) - parabolic_weight(&pair.u_prime, lambda);
    dp.as_integer()
}

pub fn resonates_at<T: Scalar>(pair: &KmsPair<T>, k: i64, lambda: &Complex<T>) -> bool {
    let de = residue_eigenvalue(&pair.u, lambda) - residue_eigenvalue(&pair.u_prime, lambda);
    complex_is_negligible(&(de + lambda.clone().scale(T::from_i64(k))))
}

/// A `k` for which λ is both on the collision line and a resonance point.
pub fn simultaneous_degeneration<T: Scalar>(pair: &KmsPair<T>, lambda: &Complex<T>) -> Option<i64> {
    collision_at(pair, lambda).filter(|&k| resonates_at(pair, k, lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub extent: i64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points: 61, extent: 3 }
    }
}

impl GridSpec {
    pub fn coords<T: Scalar>(&self) -> Vec<T> {
        let n = self.points.max(2) as i64 - 1;
        (0..=n).map(|i| T::from_ratio(self.extent * (2 * i - n), n)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyReport {
    pub grid: GridSpec,
    pub tolerance: f64,
    pub checked: usize,
    pub violations: Vec<DichotomyViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyViolation {
    pub puncture: String,
    #[serde(with = "serde_complex")]
    pub lambda: Complex64,
    pub k: i64,
}

/// Looks for λ on the grid where collision and resonance happen for the
/// same `k`.
pub fn dichotomy_scan<T: Scalar>(data: &SurfaceData<T>, grid: GridSpec) -> DichotomyReport {
    let coords: Vec<T> = grid.coords();
    let mut violations = Vec::new();
    let mut checked = 0;
    for (y, pair) in &data.kms {
        for x in &coords {
            for v in &coords {
                let lambda = Complex::new(x.clone(), v.clone());
                checked += 1;
                if let Some(k) = simultaneous_degeneration(pair, &lambda) {
                    violations.push(DichotomyViolation { puncture: y.clone(), lambda: complex_to_f64(&lambda), k });
                }
            }
        }
    }
    DichotomyReport { grid, tolerance: T::tolerance().to_f64(), checked, violations }
}

/// A closed disk in one chart's coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChartDisk {
    pub chart: Chart,
    #[serde(with = "serde_complex")]
    pub center: Complex64,
    pub radius: f64,
}

impl<'de> Deserialize<'de> for ChartDisk {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            chart: Chart,
            #[serde(with = "serde_complex")]
            center: Complex64,
            radius: f64,
        }
        let raw = Raw::deserialize(d)?;
        ChartDisk::new(raw.chart, raw.center, raw.radius).map_err(serde::de::Error::custom)
    }
}

impl ChartDisk {
    pub fn new(chart: Chart, center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite() && center.re.is_finite() && center.im.is_finite()) {
            return Err(Error::Invalid(format!("disk needs a finite center and positive radius, got {radius}")));
        }
        Ok(Self { chart, center, radius })
    }

    /// Open-disk membership of a point of P¹.
    pub fn contains(&self, pt: &LambdaPoint<f64>) -> bool {
        match pt.in_chart(self.chart) {
            Some(p) => (p.coord - self.center).norm() < self.radius,
            None => false,
        }
    }

    /// The disk as a region of the λ-plane (with ∞ adjoined).
    pub fn zero_chart_region(&self) -> Region {
        match self.chart {
            Chart::Zero => Region::Disk { center: self.center, radius: self.radius },
            Chart::Infinity => {
                let (c, r) = (self.center, self.radius);
                let d = c.norm_sqr() - r * r;
                if d.abs() <= 1e-12 * (1.0 + r * r) {
                    Region::Unbounded
                } else if d > 0.0 {
                    Region::Disk { center: -c.conj() / d, radius: r / d }
                } else {
                    Region::Exterior { center: -c.conj() / d, radius: -r / d }
                }
            }
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LambdaPoint<f64> {
        let rho = self.radius * rng.random::<f64>().sqrt();
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        LambdaPoint { chart: self.chart, coord: self.center + Complex64::from_polar(rho, theta) }
    }

    /// Seven disks covering this one: the center and a hexagon.
    pub fn subdivide(&self) -> Vec<ChartDisk> {
        let r = 0.55 * self.radius;
        let d = self.radius * 3f64.sqrt() / 2.0;
        let mut out = vec![ChartDisk { chart: self.chart, center: self.center, radius: r }];
        for i in 0..6 {
            let theta = std::f64::consts::PI / 3.0 * i as f64;
            out.push(ChartDisk { chart: self.chart, center: self.center + Complex64::from_polar(d, theta), radius: r });
        }
        out
    }

    /// Disks of radius `r` on a triangular lattice, covering this disk.
    pub fn tile(&self, r: f64) -> Vec<ChartDisk> {
        let step = 0.9 * r * 3f64.sqrt();
        let reach = self.radius + r;
        let rows = (reach / (step * 3f64.sqrt() / 2.0)).ceil() as i64;
        let cols = (reach / step).ceil() as i64 + 1;
        let mut out = Vec::new();
        for row in -rows..=rows {
            let y = row as f64 * step * 3f64.sqrt() / 2.0;
            let shift = if row.rem_euclid(2) == 1 { step / 2.0 } else { 0.0 };
            for col in -cols..=cols {
                let offset = Complex64::new(col as f64 * step + shift, y);
                if offset.norm() < reach {
                    out.push(ChartDisk { chart: self.chart, center: self.center + offset, radius: r });
                }
            }
        }
        out
    }
}

/// A disk in the λ-plane, the complement of a closed disk (containing ∞),
/// or a half-plane bounded through λ = 0, treated as meeting everything.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Disk { center: Complex64, radius: f64 },
    Exterior { center: Complex64, radius: f64 },
    Unbounded,
}

impl Region {
    pub fn meets(&self, other: &Region) -> bool {
        use Region::*;
        match (*self, *other) {
            (Disk { center: c1, radius: r1 }, Disk { center: c2, radius: r2 }) => (c1 - c2).norm() < r1 + r2,
            (Disk { center: c1, radius: r1 }, Exterior { center: c2, radius: r2 })
            | (Exterior { center: c2, radius: r2 }, Disk { center: c1, radius: r1 }) => (c1 - c2).norm() + r1 > r2,
            _ => true,
        }
    }
}

pub fn disks_overlap(d1: &ChartDisk, d2: &ChartDisk) -> bool {
    if d1.chart == d2.chart {
        return (d1.center - d2.center).norm() < d1.radius + d2.radius;
    }
    d1.zero_chart_region().meets(&d2.zero_chart_region())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CaseTag {
    CaseA,
    CaseB { k: i64 },
}

/// The pair as seen in a chart.
fn pair_in_chart(pair: &KmsPair<f64>, chart: Chart) -> KmsPair<f64> {
    match chart {
        Chart::Zero => pair.clone(),
        Chart::Infinity => pair.conjugate(),
    }
}

pub fn classify_disk<T: Scalar>(pair: &KmsPair<T>, disk: &ChartDisk) -> Result<CaseTag> {
    let pair = pair_in_chart(&pair.to_f64(), disk.chart);
    let d = pair.delta();
    let c = disk.center;
    let width = 2.0 * disk.radius * d.alpha.norm();
    let center_value = d.a + 2.0 * re_mul_conj(&c, &d.alpha);
    let lo = (center_value - width).ceil() as i64;
    let hi = (center_value + width).floor() as i64;
    match hi - lo {
        n if n < 0 => Ok(CaseTag::CaseA),
        0 => match resonance_points(&pair, lo) {
            Resonance::Identically => Err(Error::DiskTooLarge(format!("identically resonant for k = {lo}"))),
            Resonance::Points { points } => match points.iter().find(|z| (**z - c).norm() <= disk.radius) {
                Some(z) => Err(Error::DiskTooLarge(format!("resonance point {z} for k = {lo} lies inside"))),
                None => Ok(CaseTag::CaseB { k: lo }),
            },
        },
        _ => Err(Error::DiskTooLarge(format!("collision lines k = {lo}..={hi} all meet the disk"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    U,
    UPrime,
}

/// One slot of an ordered eigenvalue pair: the branch `e(λ) + shift · λ`
/// of `u` or `u′` in the disk's chart (the KMS element shifted by `−shift`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub branch: Branch,
    pub shift: i64,
}

pub type LocalChoice = [Slot; 2];

fn branch_element(pair: &KmsPair<f64>, b: Branch) -> &KmsElement<f64> {
    match b {
        Branch::U => &pair.u,
        Branch::UPrime => &pair.u_prime,
    }
}

/// The ordered branches on a classified disk.
pub fn local_choice<T: Scalar>(pair: &KmsPair<T>, disk: &ChartDisk, tag: CaseTag, flip: bool) -> LocalChoice {
    let pair = pair_in_chart(&pair.to_f64(), disk.chart);
    let c = disk.center;
    let p = parabolic_weight(&pair.u, &c);
    let pp = parabolic_weight(&pair.u_prime, &c);
    let n = p.floor() as i64;
    let mut choice = match tag {
        CaseTag::CaseA => {
            let np = pp.floor() as i64;
            let s = Slot { branch: Branch::U, shift: n };
            let sp = Slot { branch: Branch::UPrime, shift: np };
            if p - n as f64 <= pp - np as f64 {
                [s, sp]
            } else {
                [sp, s]
            }
        }
        CaseTag::CaseB { k } => [Slot { branch: Branch::U, shift: n }, Slot { branch: Branch::UPrime, shift: n - k }],
    };
    if flip {
        choice.swap(0, 1);
    }
    choice
}

/// The same choice in the other chart: `e + nλ` becomes `ẽ − nμ`.
fn choice_in_chart(choice: &LocalChoice, from: Chart, to: Chart) -> LocalChoice {
    if from == to {
        return *choice;
    }
    choice.map(|s| Slot { branch: s.branch, shift: -s.shift })
}

/// The residual point of a choice at `pt`, in `chart`.
pub fn choice_point(
    pair: &KmsPair<f64>,
    choice: &LocalChoice,
    from: Chart,
    pt: &LambdaPoint<f64>,
    chart: Chart,
) -> Option<ResidualPoint<f64>> {
    let z = pt.in_chart(chart)?.coord;
    let pair = pair_in_chart(pair, chart);
    let choice = choice_in_chart(choice, from, chart);
    let value = |s: &Slot| residue_eigenvalue(branch_element(&pair, s.branch), &z) + z * s.shift as f64;
    Some(ResidualPoint::new(z, value(&choice[0]), value(&choice[1])))
}

/// The triple taking the ordered pair `from` to the ordered pair `to`.
fn connecting_triple(from: &LocalChoice, to: &LocalChoice) -> Option<Triple> {
    if from[0].branch == to[0].branch && from[1].branch == to[1].branch {
        Some(Triple { swap: false, i: from[0].shift - to[0].shift, j: from[1].shift - to[1].shift })
    } else if from[1].branch == to[0].branch && from[0].branch == to[1].branch {
        Some(Triple { swap: true, i: from[1].shift - to[0].shift, j: from[0].shift - to[1].shift })
    } else {
        None
    }
}

/// Rewrites a groupoid element for the other chart: `(s, i, j) ↦ (s, −i, −j)`
/// and `S ↦ −S`.
pub fn transport_element(g: &GroupoidElement, from: Chart, to: Chart) -> GroupoidElement {
    if from == to {
        return g.clone();
    }
    let t = g.nf.triple();
    let t = Triple { swap: t.swap, i: -t.i, j: -t.j };
    GroupoidElement { nf: t.normal_form(), domain: Domain::from_excluded(g.domain.excluded.iter().map(|c| -c)) }
}

fn transport_multi(g: &MultiElement, from: Chart, to: Chart) -> MultiElement {
    MultiElement { punctures: g.punctures.iter().map(|(y, e)| (y.clone(), transport_element(e, from, to))).collect() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskEntry {
    pub disk: ChartDisk,
    pub tags: BTreeMap<String, CaseTag>,
    pub choices: BTreeMap<String, LocalChoice>,
}

/// `g_ij`, in the chart of disk `i`, mapping the choice on `i` to the
/// choice on `j`. Identity components are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapEntry {
    pub i: usize,
    pub j: usize,
    pub chart: Chart,
    pub element: MultiElement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionAtlas {
    pub kms: BTreeMap<String, KmsPair<f64>>,
    pub disks: Vec<DiskEntry>,
    pub cocycle: Vec<OverlapEntry>,
}

impl SectionAtlas {
    pub fn entry(&self, i: usize, j: usize) -> Option<&OverlapEntry> {
        self.cocycle.iter().find(|e| e.i == i && e.j == j)
    }

    pub fn normal_forms(&self) -> BTreeMap<(usize, usize), BTreeMap<String, NormalForm>> {
        self.cocycle.iter().map(|e| ((e.i, e.j), e.element.normal_forms())).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssembleOptions {
    /// `(disk index, puncture)` pairs whose ordering is reversed.
    pub flips: BTreeSet<(usize, String)>,
}

pub fn assemble<T: Scalar>(data: &SurfaceData<T>, disks: &[ChartDisk]) -> Result<SectionAtlas> {
    assemble_with(data, disks, &AssembleOptions::default())
}

pub fn assemble_with<T: Scalar>(
    data: &SurfaceData<T>,
    disks: &[ChartDisk],
    options: &AssembleOptions,
) -> Result<SectionAtlas> {
    let data = data.to_f64();
    let mut entries = Vec::with_capacity(disks.len());
    for (idx, disk) in disks.iter().enumerate() {
        let mut tags = BTreeMap::new();
        let mut choices = BTreeMap::new();
        for (y, pair) in &data.kms {
            let tag = classify_disk(pair, disk).map_err(|e| match e {
                Error::DiskTooLarge(msg) => Error::DiskTooLarge(format!("disk {idx}, puncture {y}: {msg}")),
                other => other,
            })?;
            let flip = options.flips.contains(&(idx, y.clone()));
            choices.insert(y.clone(), local_choice(pair, disk, tag, flip));
            tags.insert(y.clone(), tag);
        }
        entries.push(DiskEntry { disk: *disk, tags, choices });
    }
    let mut cocycle = Vec::new();
    for (i, j) in overlapping_pairs(disks) {
        let (ci, cj) = (disks[i].chart, disks[j].chart);
        let mut element = MultiElement::identity();
        for y in data.kms.keys() {
            let from = entries[i].choices[y];
            let to = choice_in_chart(&entries[j].choices[y], cj, ci);
            let t = connecting_triple(&from, &to)
                .ok_or_else(|| Error::InconsistentOverlap(i, j, format!("branches at {y} do not match")))?;
            let nf = t.normal_form();
            if nf != NormalForm::IDENTITY {
                element.punctures.insert(y.clone(), GroupoidElement { nf, domain: canonical_domain(&nf) });
            }
        }
        cocycle.push(OverlapEntry { i, j, chart: ci, element });
    }
    Ok(SectionAtlas { kms: data.kms, disks: entries, cocycle })
}

/// Index pairs `i < j` of overlapping disks, in lexicographic order.
pub fn overlapping_pairs(disks: &[ChartDisk]) -> Vec<(usize, usize)> {
    let regions: Vec<Region> = disks.iter().map(ChartDisk::zero_chart_region).collect();
    let mut bounded: Vec<(f64, f64, usize)> = Vec::new();
    let mut unbounded = Vec::new();
    for (idx, r) in regions.iter().enumerate() {
        match r {
            Region::Disk { center, radius } => bounded.push((center.re - radius, center.re + radius, idx)),
            _ => unbounded.push(idx),
        }
    }
    bounded.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = BTreeSet::new();
    for (pos, &(_, hi, i)) in bounded.iter().enumerate() {
        for &(lo2, _, j) in &bounded[pos + 1..] {
            if lo2 > hi {
                break;
            }
            if disks_overlap(&disks[i], &disks[j]) {
                out.insert((i.min(j), i.max(j)));
            }
        }
    }
    for &u in &unbounded {
        for j in 0..disks.len() {
            if j != u && disks_overlap(&disks[u], &disks[j]) {
                out.insert((u.min(j), u.max(j)));
            }
        }
    }
    out.into_iter().collect()
}

/// Two polar caps and eight disks around the unit circle.
pub fn default_cover() -> Vec<ChartDisk> {
    let mut out = vec![
        ChartDisk { chart: Chart::Zero, center: Complex64::new(0.0, 0.0), radius: 0.75 },
        ChartDisk { chart: Chart::Infinity, center: Complex64::new(0.0, 0.0), radius: 0.75 },
    ];
    for i in 0..8 {
        let theta = std::f64::consts::PI / 4.0 * i as f64;
        out.push(ChartDisk { chart: Chart::Zero, center: Complex64::from_polar(1.0, theta), radius: 0.65 });
    }
    out
}

/// Radius below which at most one collision line of each puncture can meet
/// a disk in `chart`.
fn line_separation_radius(data: &SurfaceData<f64>, chart: Chart) -> f64 {
    data.kms
        .values()
        .map(|pair| pair_in_chart(pair, chart).delta().alpha.norm())
        .filter(|n| *n > 0.0)
        .map(|n| 0.9 / (4.0 * n))
        .fold(f64::INFINITY, f64::min)
}

/// Replaces every disk on which some puncture fails to classify by smaller
/// disks covering it, until all classify.
pub fn refine_cover<T: Scalar>(data: &SurfaceData<T>, disks: &[ChartDisk]) -> Result<Vec<ChartDisk>> {
    let data = data.to_f64();
    let mut out = Vec::new();
    let mut stack: Vec<ChartDisk> = disks.iter().rev().copied().collect();
    while let Some(disk) = stack.pop() {
        let failure = data.kms.values().find_map(|pair| classify_disk(pair, &disk).err());
        match failure {
            None => out.push(disk),
            Some(e) if disk.radius < MIN_RADIUS => return Err(e),
            Some(_) => {
                let target = line_separation_radius(&data, disk.chart);
                let children = if target < 0.5 * disk.radius { disk.tile(target) } else { disk.subdivide() };
                stack.extend(children.into_iter().rev());
            }
        }
    }
    Ok(out)
}

/// The default cover, refined for `data`.
pub fn standard_cover<T: Scalar>(data: &SurfaceData<T>) -> Result<Vec<ChartDisk>> {
    refine_cover(data, &default_cover())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// The disks involved: two for a pair check, three for a triple check.
    pub disks: Vec<usize>,
    pub puncture: String,
    pub at: Option<LambdaPoint<f64>>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocycleReport {
    pub ok: bool,
    pub samples: usize,
    pub seed: u64,
    pub pairs_checked: usize,
    pub triples_checked: usize,
    /// Overlaps where rejection sampling found no point.
    pub unsampled: usize,
    pub witness: Option<Witness>,
}

/// Rejection sampling in the intersection, drawing from the smallest disk.
fn sample_in<R: Rng + ?Sized>(disks: &[&ChartDisk], rng: &mut R, tries: usize) -> Option<LambdaPoint<f64>> {
    let base = disks.iter().min_by(|a, b| a.radius.total_cmp(&b.radius))?;
    (0..tries).map(|_| base.sample(rng)).find(|p| disks.iter().all(|d| d.contains(p)))
}

/// False when three same-chart disks certainly have no common point. The
/// leftmost point of a nonempty intersection is the leftmost point of one
/// disk or a crossing of two boundaries.
fn may_meet(disks: [&ChartDisk; 3]) -> bool {
    if disks.iter().any(|d| d.chart != disks[0].chart) {
        return true;
    }
    let inside = |z: Complex64| disks.iter().all(|d| (z - d.center).norm() <= d.radius * (1.0 + 1e-9));
    let mut candidates: Vec<Complex64> = disks.iter().map(|d| d.center - d.radius).collect();
    for a in 0..3 {
        for b in a + 1..3 {
            let (c1, r1, c2, r2) = (disks[a].center, disks[a].radius, disks[b].center, disks[b].radius);
            let d = (c2 - c1).norm();
            if d == 0.0 || d > r1 + r2 || d < (r1 - r2).abs() {
                continue;
            }
            let x = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
            let h = (r1 * r1 - x * x).max(0.0).sqrt();
            let u = (c2 - c1) / d;
            let base = c1 + u * x;
            let perp = Complex64::new(-u.im, u.re) * h;
            candidates.push(base + perp);
            candidates.push(base - perp);
        }
    }
    candidates.into_iter().any(inside)
}

const TRIES_PER_SAMPLE: usize = 400;

/// Checks that every `g_ij` maps the choice on `i` to the choice on `j`, and
/// that `g_jk ∘ g_ij = g_ik` on triple overlaps, at `samples` random points
/// of each overlap.
pub fn verify_cocycle(atlas: &SectionAtlas, samples: usize, seed: u64) -> CocycleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report =
        CocycleReport { ok: true, samples, seed, pairs_checked: 0, triples_checked: 0, unsampled: 0, witness: None };
    let disks: Vec<ChartDisk> = atlas.disks.iter().map(|d| d.disk).collect();
    let fail = |report: &mut CocycleReport, w: Witness| {
        report.ok = false;
        report.witness = Some(w);
    };
    let mut entries: BTreeMap<(usize, usize), &OverlapEntry> = BTreeMap::new();
    for e in &atlas.cocycle {
        if e.i >= e.j || e.j >= disks.len() {
            fail(
                &mut report,
                Witness {
                    disks: vec![e.i, e.j],
                    puncture: String::new(),
                    at: None,
                    detail: "cocycle entry does not name two disks i < j".into(),
                },
            );
            return report;
        }
        entries.insert((e.i, e.j), e);
    }
    for (i, j) in overlapping_pairs(&disks) {
        if !entries.contains_key(&(i, j)) {
            fail(
                &mut report,
                Witness {
                    disks: vec![i, j],
                    puncture: String::new(),
                    at: None,
                    detail: "overlapping disks have no cocycle entry".into(),
                },
            );
            return report;
        }
    }

    for (&(i, j), entry) in &entries {
        report.pairs_checked += 1;
        for _ in 0..samples {
            let Some(pt) = sample_in(&[&disks[i], &disks[j]], &mut rng, TRIES_PER_SAMPLE) else {
                report.unsampled += 1;
                break;
            };
            for (y, pair) in &atlas.kms {
                let di = &atlas.disks[i];
                let dj = &atlas.disks[j];
                let (Some(ci), Some(cj)) = (di.choices.get(y), dj.choices.get(y)) else {
                    fail(
                        &mut report,
                        Witness {
                            disks: vec![i, j],
                            puncture: y.clone(),
                            at: None,
                            detail: "disk has no choice for this puncture".into(),
                        },
                    );
                    return report;
                };
                let from = choice_point(pair, ci, di.disk.chart, &pt, entry.chart);
                let to = choice_point(pair, cj, dj.disk.chart, &pt, entry.chart);
                let (Some(from), Some(to)) = (from, to) else { continue };
                match entry.element.get(y).apply(&from) {
                    Some(img) if img.approx_eq(&to) => {}
                    Some(_) => {
                        fail(
                            &mut report,
                            Witness {
                                disks: vec![i, j],
                                puncture: y.clone(),
                                at: Some(pt),
                                detail: "g_ij does not map the choice on i to the choice on j".into(),
                            },
                        );
                        return report;
                    }
                    None => {
                        fail(
                            &mut report,
                            Witness {
                                disks: vec![i, j],
                                puncture: y.clone(),
                                at: Some(pt),
                                detail: "g_ij is undefined at the choice on i".into(),
                            },
                        );
                        return report;
                    }
                }
            }
        }
    }

    let mut neighbours: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(i, j) in entries.keys() {
        neighbours.entry(i).or_default().push(j);
    }
    for (&i, js) in &neighbours {
        for (a, &j) in js.iter().enumerate() {
            for &k in &js[a + 1..] {
                let (Some(gij), Some(gjk), Some(gik)) =
                    (entries.get(&(i, j)), entries.get(&(j, k)), entries.get(&(i, k)))
                else {
                    continue;
                };
                let ci = gij.chart;
                let composed = transport_multi(&gjk.element, gjk.chart, ci).compose(&gij.element);
                let direct = transport_multi(&gik.element, gik.chart, ci);
                if !may_meet([&disks[i], &disks[j], &disks[k]]) {
                    continue;
                }
                let mut sampled = false;
                for _ in 0..samples {
                    let Some(pt) = sample_in(&[&disks[i], &disks[j], &disks[k]], &mut rng, TRIES_PER_SAMPLE) else {
                        break;
                    };
                    sampled = true;
                    for (y, pair) in &atlas.kms {
                        let di = &atlas.disks[i];
                        let Some(from) = choice_point(pair, &di.choices[y], di.disk.chart, &pt, ci) else { continue };
                        let lhs = composed.get(y).apply(&from);
                        let rhs = direct.get(y).apply(&from);
                        let agree = matches!((&lhs, &rhs), (Some(l), Some(r)) if l.approx_eq(r));
                        if !agree {
                            fail(
                                &mut report,
                                Witness {
                                    disks: vec![i, j, k],
                                    puncture: y.clone(),
                                    at: Some(pt),
                                    detail: "g_jk ∘ g_ij differs from g_ik".into(),
                                },
                            );
                            return report;
                        }
                    }
                }
                if sampled {
                    report.triples_checked += 1;
                } else {
                    report.unsampled += 1;
                }
            }
        }
    }
    report
}

/// Dimensions of the weight-graded pieces of the relative tangent space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedDims {
    pub w0: i64,
    pub w1: i64,
    pub w2: i64,
    pub total: i64,
}

/// `w0 = dim End(E_x) − 1`, `w2 = 2·punctures − 1`, and `w1` the rest of
/// `8g + 4·punctures − 4`.
pub fn weight_graded_dims(genus: i64, punctures: i64) -> Result<GradedDims> {
    if punctures < 1 {
        return Err(Error::Invalid("the puncture divisor must be nonempty".into()));
    }
    if genus < 0 {
        return Err(Error::Invalid(format!("genus must be non-negative, got {genus}")));
    }
    let rank = 2;
    let w0 = rank * rank - 1;
    let w2 = 2 * punctures - 1;
    let total = 8 * genus + 4 * punctures - 4;
    Ok(GradedDims { w0, w1: total - w0 - w2, w2, total })
}

mod serde_complex_vec {
    use num_complex::Complex64;
    use serde::ser::SerializeSeq;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        #[derive(serde::Serialize)]
        struct C {
            re: f64,
            im: f64,
        }
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for z in v {
            seq.serialize_element(&C { re: z.re, im: z.im })?;
        }
        seq.end()
    }
}
