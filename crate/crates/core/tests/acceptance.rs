//! Acceptance suite: one line per criterion, nonzero exit on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twistorlab::betti::{betti_map, connected_in_betti, find_connecting_element, functor_on_element, BETTI_TOLERANCE};
use twistorlab::kms::{hecke_shift, parabolic_weight, residue_eigenvalue};
use twistorlab::preferred_section::{
    assemble, default_cover, dichotomy_scan, standard_cover, verify_cocycle, weight_graded_dims, GridSpec, DEFAULT_SEED,
};
use twistorlab::rank1_dh::{
    fixed_locus_real_dimension, restrict, restriction_matrix, section_from_kms, split_at, FiberSplit, InvariantSection,
};
use twistorlab::residual_groupoid::{apply, graphs_disjoint, normalize, GroupoidElement, Letter};
use twistorlab::twistor_bundle::{check_mixed_twistor, h0, splitting_type, FilteredBundle, LaurentMatrix, LaurentPoly};
use twistorlab::{Complex, GeneratorWord, KmsElement, LambdaPoint, NormalForm, ResidualPoint, Scalar};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn kms_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let u = rand_kms(&mut rng, 10);
        let l = rand_qc(&mut rng, 10);
        let lhs = residue_eigenvalue(&u, &l) + l.clone().scale(parabolic_weight(&u, &l));
        let rhs = u.alpha.clone().scale(Q::from_i64(1) + l.norm_sqr());
        ensure(lhs == rhs, format!("exact identity fails for u = {u:?}, lambda = {l}"))?;
    }
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let u = KmsElement { a: rng.random_range(-10.0..10.0), alpha: rand_f64c(&mut rng, 10.0) };
        let l = rand_f64c(&mut rng, 10.0);
        let e = residue_eigenvalue(&u, &l);
        let lp = l * parabolic_weight(&u, &l);
        let rhs = u.alpha * (1.0 + l.norm_sqr());
        let scale = e.norm() + lp.norm() + rhs.norm();
        let err = (e + lp - rhs).norm() / scale.max(f64::MIN_POSITIVE);
        worst = worst.max(err);
    }
    ensure(worst <= 1e-12, format!("float relative error {worst:.2e} exceeds 1e-12"))?;
    Ok(format!("10^4 exact + 10^4 float cases, worst float relative error {worst:.1e}"))
}

fn gauge_equivariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let u = rand_kms(&mut rng, 10);
        let l = rand_qc(&mut rng, 10);
        let k = rng.random_range(-50..=50);
        let v = hecke_shift(&u, k);
        let kq = Q::from_i64(k);
        ensure(parabolic_weight(&v, &l) == parabolic_weight(&u, &l) + kq.clone(), "weight does not shift by k")?;
        ensure(
            residue_eigenvalue(&v, &l) == residue_eigenvalue(&u, &l) - l.clone().scale(kq),
            "eigenvalue does not shift by -k lambda",
        )?;
    }
    Ok("10^4 exact cases".into())
}

fn all_words(max_len: usize) -> Vec<GeneratorWord> {
    let letters = [Letter::H, Letter::HInv, Letter::P];
    let mut out = vec![GeneratorWord(vec![])];
    let mut frontier = out.clone();
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for l in letters {
                let mut v = w.0.clone();
                v.push(l);
                next.push(GeneratorWord(v));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn groupoid_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let words = all_words(6);
    let forms: Vec<(GeneratorWord, GroupoidElement)> = words
        .into_iter()
        .map(|w| {
            let nf = normalize(&w);
            (w, GroupoidElement::canonical(nf))
        })
        .collect();
    let mut checks = 0usize;
    for _ in 0..5 {
        let l = rand_nonzero_qc(&mut rng, 3);
        let points: Vec<ResidualPoint<Q>> = (0..100).map(|_| generic_point(&mut rng, &l)).collect();
        for (w, g) in &forms {
            for pt in &points {
                let by_word = w.evaluate(pt);
                let by_nf = g.apply(pt);
                ensure(by_word.is_some() && by_word == by_nf, format!("word {w} disagrees with {} at {pt:?}", g.nf))?;
                checks += 1;
            }
        }
    }
    Ok(format!("{} words x 500 points, {checks} exact comparisons", forms.len()))
}

fn monomorphism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let nfs = NormalForm::window(4, 4);
    for _ in 0..20 {
        let l = rand_nonzero_qc(&mut rng, 3);
        let ok = graphs_disjoint(&nfs, &l, 5, &mut rng).map_err(|e| e.to_string())?;
        ensure(ok, format!("two normal forms share an image over lambda = {l}"))?;
    }
    Ok(format!("{} normal forms, 20 values of lambda, 5 points each", nfs.len()))
}

fn betti_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let window = NormalForm::window(4, 4);
    let rand_lambda = |rng: &mut ChaCha8Rng| {
        Complex::from_polar(rng.random_range(0.5..2.0), rng.random_range(0.0..std::f64::consts::TAU))
    };
    let mut done = 0;
    while done < 1000 {
        let l = rand_lambda(&mut rng);
        let pt = ResidualPoint::new(l, rand_f64c(&mut rng, 2.0), rand_f64c(&mut rng, 2.0));
        let nf = window[rng.random_range(0..window.len())];
        let Some(img) = apply(&nf, &pt) else { continue };
        let lhs = betti_map(&img).map_err(|e| e.to_string())?;
        let rhs = functor_on_element(&nf)
            .apply(&betti_map(&pt).map_err(|e| e.to_string())?, BETTI_TOLERANCE)
            .ok_or("functor image undefined")?;
        ensure(lhs.approx_eq(&rhs, BETTI_TOLERANCE), format!("functoriality fails for {nf} at {pt:?}"))?;
        done += 1;
    }
    for _ in 0..200 {
        let l = rand_lambda(&mut rng);
        let pt = ResidualPoint::new(l, rand_f64c(&mut rng, 2.0), rand_f64c(&mut rng, 2.0));
        let nf = window[rng.random_range(0..window.len())];
        let img = apply(&nf, &pt).ok_or("generic point outside domain")?;
        let betti = connected_in_betti(&betti_map(&pt).unwrap(), &betti_map(&img).unwrap(), BETTI_TOLERANCE)
            .map_err(|e| e.to_string())?;
        let groupoid = find_connecting_element(&pt, &img).is_some();
        ensure(betti && groupoid, format!("constructed positive not connected ({betti}, {groupoid})"))?;
    }
    for _ in 0..200 {
        let l = rand_lambda(&mut rng);
        let p1 = ResidualPoint::new(l, rand_f64c(&mut rng, 2.0), rand_f64c(&mut rng, 2.0));
        let p2 = ResidualPoint::new(l, rand_f64c(&mut rng, 2.0), rand_f64c(&mut rng, 2.0));
        let betti = connected_in_betti(&betti_map(&p1).unwrap(), &betti_map(&p2).unwrap(), BETTI_TOLERANCE)
            .map_err(|e| e.to_string())?;
        let groupoid = find_connecting_element(&p1, &p2).is_some();
        ensure(betti == groupoid, format!("connectivity disagrees at {p1:?}, {p2:?}"))?;
        ensure(!betti, "random negative unexpectedly connected")?;
    }
    Ok("10^3 functoriality instances, 200 positives, 200 negatives".into())
}

fn rank1_model() -> Outcome {
    let dim = fixed_locus_real_dimension::<Q>();
    ensure(dim == 3, format!("sigma-fixed locus has real dimension {dim}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let zero = qc(q(0, 1), q(0, 1));
    let targets = [qc(q(1, 1), q(0, 1)), qc(q(0, 1), q(1, 1)), qc(q(1, 1), q(1, 1))];
    let mut fibers = 0;
    for x in -2..=2 {
        for y in -2..=2 {
            let l = qc(q(x, 2), q(y, 2));
            let kappa = LambdaPoint::zero_chart(l.clone());
            let r = twistorlab::linalg::real_rank(&restriction_matrix(&kappa));
            ensure(r == 2, format!("restriction at {l} has real rank {r}"))?;
            for v in &targets {
                let s = FiberSplit { p: q(0, 1), value: v.clone(), at: kappa.clone() }.section();
                ensure(restrict(&s, &kappa) == *v, format!("no preimage of {v} at {l}"))?;
            }
            let s = section_from_kms(&rand_kms(&mut rng, 5));
            let before = split_at(&s, &kappa);
            let after = split_at(&section_from_kms(&hecke_shift(&s.kms(), 1)), &kappa);
            ensure(after.p - before.p == q(1, 1), "gauge generator weight is not 1")?;
            ensure(after.value - before.value == zero.clone() - l.clone(), "gauge generator value is not -lambda")?;
            fibers += 1;
        }
    }
    let sample = InvariantSection::<Q> { a: q(1, 3), alpha: qc(q(1, 2), q(-1, 4)) };
    ensure(twistorlab::rank1_dh::sigma_action(&sample.coefficients()) == sample.coefficients(), "sample not fixed")?;
    Ok(format!("fixed locus dim 3, {fibers} fibers surjective, gauge form (1, -lambda) exact"))
}

fn splitting_solver() -> Outcome {
    let one = qc(q(1, 1), q(0, 1));
    let o2 = LaurentMatrix::<Q>::diagonal_monomials(&[2]);
    let st = |t: &LaurentMatrix<Q>| splitting_type(t).map(|s| s.degrees).map_err(|e| e.to_string());
    ensure(st(&o2)? == vec![2], "O(2) model does not split as (2)")?;
    let upper = LaurentMatrix::from_entries(vec![
        vec![LaurentPoly::monomial(one.clone(), 1), LaurentPoly::monomial(one.clone(), 0)],
        vec![LaurentPoly::zero(), LaurentPoly::monomial(one.clone(), -1)],
    ])
    .unwrap();
    ensure(st(&upper)? == vec![0, 0], "hand factorization example does not split as (0,0)")?;
    ensure(h0(&o2, 0).map_err(|e| e.to_string())? == 3, "h0(O(2)) != 3")?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..20 {
        let n = 1 + case % 4;
        let (t, expected) = if case == 1 {
            let a = rand_unimodular(&mut rng, 2, -1);
            let b = rand_unimodular(&mut rng, 2, 1);
            (a.mul(&upper).unwrap().mul(&b).unwrap(), vec![0, 0])
        } else {
            rand_bundle(&mut rng, n)
        };
        let got = st(&t)?;
        ensure(got == expected, format!("case {case}: splitting {got:?}, expected {expected:?}"))?;
    }
    Ok("(2), (0,0), h0 = 3, 20 unimodular conjugates at ranks 1-4".into())
}

fn mixed_twistor() -> Outcome {
    let one = qc(q(1, 1), q(0, 1));
    let mono = |e| LaurentPoly::monomial(one.clone(), e);
    let mut entries = vec![vec![LaurentPoly::zero(); 4]; 4];
    entries[0][0] = mono(0);
    entries[1][1] = mono(1);
    entries[2][2] = mono(1);
    entries[3][3] = mono(2);
    entries[0][2] = mono(1);
    entries[1][3] = mono(0);
    let model =
        FilteredBundle::new(LaurentMatrix::from_entries(entries).unwrap(), vec![1, 2, 1]).map_err(|e| e.to_string())?;
    let ok = check_mixed_twistor(&model, &[0, 1, 2]).map_err(|e| e.to_string())?;
    ensure(ok.pass, format!("weight-(0,1,2) model rejected: {ok:?}"))?;
    let rank1 = FilteredBundle::new(InvariantSection::<Q>::transition(), vec![1]).map_err(|e| e.to_string())?;
    let r = check_mixed_twistor(&rank1, &[2]).map_err(|e| e.to_string())?;
    ensure(r.pass, "rank-1 residual block is not pure of weight 2")?;
    let shuffled = check_mixed_twistor(&model, &[1, 0, 2]).map_err(|e| e.to_string())?;
    ensure(!shuffled.pass, "shuffled weights accepted")?;
    Ok("model passes, rank-1 block passes, shuffled declaration fails".into())
}

fn preferred_sections() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut disks = 0;
    let mut pairs = 0;
    for case in 0..50 {
        let data = rand_surface(&mut rng);
        let exact = dichotomy_scan(&data, GridSpec::default());
        ensure(exact.violations.is_empty(), format!("case {case}: exact grid violation {:?}", exact.violations))?;
        let float = dichotomy_scan(&data.to_f64(), GridSpec::default());
        ensure(float.violations.is_empty(), format!("case {case}: float grid violation {:?}", float.violations))?;
        let cover = standard_cover(&data).map_err(|e| format!("case {case}: {e}"))?;
        ensure(cover.len() >= default_cover().len(), "refined cover lost disks")?;
        let atlas = assemble(&data, &cover).map_err(|e| format!("case {case}: {e}"))?;
        let report = verify_cocycle(&atlas, 3, DEFAULT_SEED + case);
        ensure(report.ok, format!("case {case}: cocycle fails: {:?}", report.witness))?;
        disks += cover.len();
        pairs += report.pairs_checked;
    }
    Ok(format!("50 surfaces, 61x61 grids clean, {disks} disks, {pairs} overlaps verified"))
}

/// Dimension of the GL₂ character variety with fixed regular semisimple
/// local monodromies: `2·dim G·(g − 1) + Σ dim C_y + 2·dim Z(G)`.
fn character_variety_dim(genus: i64, punctures: i64) -> i64 {
    let dim_g = 4;
    let dim_class = dim_g - 2;
    let dim_center = 1;
    2 * dim_g * (genus - 1) + punctures * dim_class + 2 * dim_center
}

fn graded_dims() -> Outcome {
    ensure(character_variety_dim(0, 4) == 2, "oracle disagrees with the four-point count")?;
    let d = weight_graded_dims(0, 4).map_err(|e| e.to_string())?;
    ensure((d.w0, d.w1, d.w2) == (3, 2, 7), format!("(0,4) gives {d:?}"))?;
    ensure(d.w1 == character_variety_dim(0, 4), "w1 disagrees with oracle")?;
    for g in 0..8 {
        for k in 1..10 {
            let d = weight_graded_dims(g, k).map_err(|e| e.to_string())?;
            ensure(d.w0 == 3 && d.w2 == 2 * k - 1, format!("({g},{k}) gives {d:?}"))?;
            ensure(d.w0 + d.w1 + d.w2 == d.total, "graded pieces do not sum to the total")?;
            ensure(d.w1 == character_variety_dim(g, k), format!("({g},{k}): w1 = {} vs oracle", d.w1))?;
        }
    }
    Ok("(0,4) -> (3,2,7); w0 = 3, w2 = 2k-1 and w1 matches the oracle for g < 8, k < 10".into())
}

/// Number, name, time limit in seconds and check.
type Criterion = (u32, &'static str, u64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "KMS identity", 5, kms_identity),
        (2, "gauge equivariance", 5, gauge_equivariance),
        (3, "normal-form soundness", 60, groupoid_soundness),
        (4, "monomorphism over lambda != 0", 30, monomorphism),
        (5, "Betti equivalence", 30, betti_equivalence),
        (6, "sigma-invariant sections of O(2)", 5, rank1_model),
        (7, "splitting-type solver", 60, splitting_solver),
        (8, "mixed twistor checker", 5, mixed_twistor),
        (9, "preferred-section dichotomy and cocycle", 120, preferred_sections),
        (10, "weight-graded dimensions", 1, graded_dims),
    ];
    let mut failures = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(limit) => Err(format!("too slow ({detail})")),
            other => other,
        };
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        if outcome.is_err() {
            failures += 1;
        }
        println!("criterion {id:>2} {status} {name} [{:.2}s / {limit}s]: {detail}", elapsed.as_secs_f64());
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
