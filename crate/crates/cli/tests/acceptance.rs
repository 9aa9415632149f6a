//! Acceptance gate. One line per criterion; exits nonzero if any criterion
//! outside `KNOWN_RED` fails, or if a known-red criterion starts passing.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use l2inv::dispatch;
use l2inv_core::ns_calculus::{
    olbrich_profile, product_alpha, replay_boundary, tilde_alpha, AlphaEntry, BoundaryInputs, Branch, NSProfile,
    NSValue, NsError,
};
use l2inv_core::parabolic::{enumerate_parabolics, parabolic, relative_parabolic};
use l2inv_core::real_forms::{catalog, derive, FormSpec};
use l2inv_core::root_data::{supported_types, CartanType, RootSystem};
use l2inv_core::tits_index::{enumerate_indices, restrict, RestrictedRootSystem, TitsIndex};
use l2inv_core::torsion_ledger::{corner_strata, torsion_verdict, TorsionVerdict};
use l2inv_spectral::complex::{circle, z2};
use l2inv_spectral::density::{default_grid, estimate_density, DEFAULT_SEED};
use l2inv_spectral::NsEstimate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

/// Criteria expected to fail, with the reason recorded in the README.
const KNOWN_RED: &[(u32, &str)] = &[(
    5,
    "d(N_I) = d(N_J) + d(N_{I rel J}) is false for the growth degree once Σ_J has roots \
     whose support meets J∖I (split A2: 4 ≠ 2 + 1); the identity holds with the cross term",
)];

type Outcome = Result<String, String>;
type Field = fn(&mut BoundaryInputs) -> &mut u32;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn argv(s: &str) -> Vec<String> {
    std::iter::once("l2inv".to_string()).chain(s.split_whitespace().map(String::from)).collect()
}

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn c1_example_pipeline() -> Outcome {
    let mut slowest = Duration::ZERO;
    for p in [3u64, 7, 11, 19, 23] {
        let t = Instant::now();
        let report = dispatch(&argv(&format!("qform pipeline --p {p} --search-height 100"))).map_err(|e| e.to_string())?;
        slowest = slowest.max(t.elapsed());
        let r = &report.results;
        let rrs: RestrictedRootSystem = serde_json::from_value(r["restricted"].clone()).map_err(|e| e.to_string())?;
        let got = (
            r["signature"].clone(),
            r["deficiency"].clone(),
            r["dim_x"].clone(),
            r["q"].clone(),
            r["bound"]["dim_n"].clone(),
            r["growth_degree"].clone(),
            r["levi_deficiency"].clone(),
            r["bound"]["bound"].clone(),
            r["bound"]["q"].clone(),
        );
        let want: (Value, Value, Value, Value, Value, Value, Value, Value, Value) = (
            serde_json::json!([3, 3]),
            1.into(),
            9.into(),
            4.into(),
            4.into(),
            4.into(),
            0.into(),
            4.into(),
            4.into(),
        );
        check(got == want, || format!("p = {p}: got {got:?}"))?;
        let a1_mult4 = rrs.q_rank == 1
            && rrs.positive_restricted.len() == 1
            && rrs.positive_restricted[0].coeffs == vec![1]
            && rrs.positive_restricted[0].multiplicity == 4;
        check(a1_mult4, || format!("p = {p}: restricted system {:?}", rrs.positive_restricted))?;
        check(t.elapsed() < Duration::from_secs(1), || format!("p = {p} took {:?}", t.elapsed()))?;
    }
    Ok(format!("p in {{3,7,11,19,23}}: (3,3), δ=1, dim X=9, q=4, A1 mult 4, d(N)=4, δ(M)=0, bound 4; slowest {slowest:.2?}"))
}

/// (dim X, deficiency) computed by hand for every catalog entry.
fn hand_table() -> BTreeMap<&'static str, (u32, u32)> {
    BTreeMap::from([
        ("SL,2", (2, 0)),
        ("SL,3", (5, 1)),
        ("SL,4", (9, 1)),
        ("SL,5", (14, 2)),
        ("SL,6", (20, 2)),
        ("SL,7", (27, 3)),
        ("SL,8", (35, 3)),
        ("SL,9", (44, 4)),
        ("SL,10", (54, 4)),
        ("SO,2,1", (2, 0)),
        ("SO,3,1", (3, 1)),
        ("SO,4,1", (4, 0)),
        ("SO,5,1", (5, 1)),
        ("SO,7,1", (7, 1)),
        ("SO,9,1", (9, 1)),
        ("SO,2,2", (4, 0)),
        ("SO,3,2", (6, 0)),
        ("SO,3,3", (9, 1)),
        ("SO,4,3", (12, 0)),
        ("SO,5,3", (15, 1)),
        ("SU,2,1", (4, 0)),
        ("SU,3,1", (6, 0)),
        ("SU,2,2", (8, 0)),
        ("Sp,1", (2, 0)),
        ("Sp,2", (6, 0)),
        ("Sp,3", (12, 0)),
        ("SOstar,3", (6, 0)),
        ("SOstar,4", (12, 0)),
        ("complex,A,1", (3, 1)),
        ("complex,A,2", (8, 2)),
        ("complex,B,2", (10, 2)),
        ("complex,G,2", (14, 2)),
        ("compact,A,1", (0, 0)),
        ("compact,B,3", (0, 0)),
    ])
}

fn c2_olbrich_profiles() -> Outcome {
    let hand = hand_table();
    let mut checked = 0;
    for spec in catalog().forms {
        let g = derive(&spec).map_err(|e| e.to_string())?;
        let key = spec.to_string();
        let &(n, m) = hand.get(key.as_str()).ok_or_else(|| format!("{key} missing from the hand table"))?;
        check((g.dim_x, g.deficiency) == (n, m), || format!("{key}: derived ({}, {}), hand ({n}, {m})", g.dim_x, g.deficiency))?;
        if !g.is_noncompact_nonabelian() {
            continue;
        }
        check((n - m) % 2 == 0, || format!("{key}: dim X − m = {} is odd", n - m))?;
        let prof = olbrich_profile(n, m);
        for p in 0..=n {
            let inside = m > 0 && p > (n - m) / 2 && p <= (n + m) / 2;
            let want = if p == 0 || !inside { NSValue::InfinityPlus } else { NSValue::int(m as i64) };
            let got = prof.alpha(p).map_err(|e| e.to_string())?;
            check(got == want, || format!("{key}: α_{p} = {got}, hand {want}"))?;
            let betti = m == 0 && n % 2 == 0 && p == n / 2;
            check(prof.betti(p) == betti, || format!("{key}: Betti flag in degree {p}"))?;
        }
        checked += 1;
    }
    check(checked >= 20, || format!("only {checked} noncompact entries"))?;
    Ok(format!("{checked} noncompact forms match the hand table; parity holds"))
}

fn c3_torsion() -> Outcome {
    let verdict = |s: &str| torsion_verdict(&derive(&s.parse::<FormSpec>().unwrap()).unwrap()).verdict;
    for n in [5, 6, 9, 10] {
        let v = verdict(&format!("SL,{n}"));
        check(matches!(v, TorsionVerdict::Zero { .. }), || format!("SL({n}): {v:?}"))?;
    }
    for n in [3, 4, 7, 8] {
        let v = verdict(&format!("SL,{n}"));
        check(v == TorsionVerdict::OddOpen, || format!("SL({n}): {v:?}"))?;
    }
    for (p, n, want) in [(3, 1, "-1/(6π)"), (5, 2, "31/(45π^2)"), (7, 3, "-221/(70π^3)")] {
        match verdict(&format!("SO,{p},1")) {
            TorsionVerdict::HyperbolicOddProportional { n: got_n, constant: Some(c) } => {
                check(got_n == n && c.to_string() == want, || format!("SO({p},1): n={got_n}, {c}"))?
            }
            other => return Err(format!("SO({p},1): {other:?}")),
        }
    }
    let v = verdict("SO,4,1");
    check(v == TorsionVerdict::NotAcyclic { witness_degree: 2 }, || format!("SO(4,1): {v:?}"))?;
    Ok("SL mod-4 pattern, three hyperbolic constants, SO(4,1) witness 2".into())
}

fn reflection_closure(rs: &RootSystem) -> BTreeSet<Vec<i64>> {
    let n = rs.rank();
    let a = rs.cartan_matrix();
    let mut seen = BTreeSet::new();
    let mut stack: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    while let Some(v) = stack.pop() {
        if !seen.insert(v.clone()) {
            continue;
        }
        for i in 0..n {
            let pairing: i64 = (0..n).map(|j| v[j] * a[j][i]).sum();
            let mut w = v.clone();
            w[i] -= pairing;
            if w.iter().all(|c| *c >= 0) && w.iter().any(|c| *c > 0) {
                stack.push(w);
            }
        }
    }
    seen
}

fn restriction_agrees(index: &TitsIndex) -> Result<(), String> {
    let roots = reflection_closure(index.base());
    let circled = index.distinguished_orbits();
    let mut oracle: BTreeMap<Vec<i64>, u32> = BTreeMap::new();
    let mut kernel = 0u64;
    for r in &roots {
        let image: Vec<i64> = circled.iter().map(|o| o.iter().map(|&i| r[i]).sum()).collect();
        if image.iter().all(|c| *c == 0) {
            kernel += 1;
        } else {
            *oracle.entry(image).or_insert(0) += 1;
        }
    }
    let rrs = restrict(index);
    let ours: BTreeMap<Vec<i64>, u32> =
        rrs.positive_restricted.iter().map(|r| (r.coeffs.clone(), r.multiplicity)).collect();
    check(ours == oracle, || format!("{}: restriction differs from brute force", index.label()))?;
    check(rrs.total_multiplicity() + kernel == roots.len() as u64, || format!("{}: Σm + |Φ_0⁺| ≠ |Φ⁺|", index.label()))
}

fn c4_restriction() -> Outcome {
    let mut shipped = 0;
    for (t, r) in supported_types(6) {
        for index in enumerate_indices(&RootSystem::build(t, r).unwrap()) {
            restriction_agrees(&index)?;
            shipped += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let types = supported_types(8);
    for _ in 0..200 {
        let &(t, r) = types.choose(&mut rng).unwrap();
        let all = enumerate_indices(&RootSystem::build(t, r).unwrap());
        restriction_agrees(all.choose(&mut rng).unwrap())?;
    }
    for (t, r) in supported_types(8) {
        let base = RootSystem::build(t, r).unwrap();
        let rrs = restrict(&TitsIndex::split(base.clone()));
        let coeffs: BTreeSet<Vec<i64>> = rrs.positive_restricted.iter().map(|x| x.coeffs.clone()).collect();
        check(rrs.positive_restricted.iter().all(|x| x.multiplicity == 1), || format!("split {t}{r} multiplicity"))?;
        check(coeffs == reflection_closure(&base), || format!("split {t}{r} roots"))?;
    }
    let a3 = RootSystem::build(CartanType::A, 3).unwrap();
    let su31 = restrict(&TitsIndex::new(a3, vec![vec![0, 2], vec![1]], vec![vec![0, 2]], "SU(3,1)").unwrap());
    let bc1: Vec<(Vec<i64>, u32)> = su31.positive_restricted.iter().map(|r| (r.coeffs.clone(), r.multiplicity)).collect();
    check(bc1 == vec![(vec![1], 4), (vec![2], 1)], || format!("SU(3,1): {bc1:?}"))?;
    Ok(format!("{shipped} shipped indices + 200 random agree; split ok; SU(3,1) → BC1 (4,1)"))
}

fn c5_parabolics() -> Outcome {
    let mut seen = BTreeSet::new();
    let mut systems = 0;
    let mut pairs = 0;
    let mut violations = Vec::new();
    for (t, r) in supported_types(6) {
        for index in enumerate_indices(&RootSystem::build(t, r).unwrap()) {
            let rrs = restrict(&index);
            if rrs.q_rank > 4 || !seen.insert(serde_json::to_string(&rrs.positive_restricted).unwrap()) {
                continue;
            }
            systems += 1;
            let l = rrs.q_rank;
            check(enumerate_parabolics(&rrs).len() == 1 << l, || format!("{}: count", index.label()))?;
            for j in 0u32..1 << l {
                for i in (0u32..1 << l).filter(|i| i & !j == 0) {
                    let inner: Vec<usize> = (0..l).filter(|k| i >> k & 1 == 1).collect();
                    let outer: Vec<usize> = (0..l).filter(|k| j >> k & 1 == 1).collect();
                    let di = parabolic(&rrs, &inner).unwrap().growth_degree;
                    let dj = parabolic(&rrs, &outer).unwrap().growth_degree;
                    let drel = relative_parabolic(&rrs, &inner, &outer).unwrap().growth_degree;
                    pairs += 1;
                    if di != dj + drel && violations.len() < 3 {
                        violations.push(format!("{} I={inner:?} J={outer:?}: {di} ≠ {dj} + {drel}", index.label()));
                    }
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(format!("{systems} systems, {pairs} pairs"))
    } else {
        Err(format!("{systems} systems, {pairs} pairs; e.g. {}", violations.join("; ")))
    }
}

fn c6_spectral() -> Outcome {
    let samples = 100_000;
    let c = circle();
    let grid = default_grid(&c, 0);
    let t = Instant::now();
    let e = estimate_density(&c, 0, &grid, samples, DEFAULT_SEED, 1).map_err(|e| e.to_string())?;
    let circle_time = t.elapsed();
    let err = e
        .grid
        .iter()
        .zip(&e.values)
        .map(|(l, f)| (f - (1.0 - l / 2.0).clamp(-1.0, 1.0).acos() / std::f64::consts::PI).abs())
        .fold(0.0, f64::max);
    check(err <= 0.01, || format!("circle max error {err}"))?;
    let exponent = |e: &l2inv_spectral::DensityEstimate| match &e.exponent {
        Some(NsEstimate::Exponent { value, .. }) => Ok(*value),
        other => Err(format!("no finite exponent: {other:?}")),
    };
    let a_circle = exponent(&e)?;
    check((0.45..=0.55).contains(&a_circle), || format!("circle exponent {a_circle}"))?;
    for w in [2, 8] {
        let other = estimate_density(&c, 0, &grid, samples, DEFAULT_SEED, w).map_err(|e| e.to_string())?;
        check(other == e, || format!("circle differs with {w} workers"))?;
    }
    let z = z2();
    let zgrid = default_grid(&z, 0);
    let t = Instant::now();
    let ez = estimate_density(&z, 0, &zgrid, samples, DEFAULT_SEED, 1).map_err(|e| e.to_string())?;
    let z_time = t.elapsed();
    let a_z = exponent(&ez)?;
    check((0.9..=1.1).contains(&a_z), || format!("ℤ² exponent {a_z}"))?;
    for w in [2, 8] {
        let other = estimate_density(&z, 0, &zgrid, samples, DEFAULT_SEED, w).map_err(|e| e.to_string())?;
        check(other == ez, || format!("ℤ² differs with {w} workers"))?;
    }
    let slowest = circle_time.max(z_time);
    check(slowest < Duration::from_secs(30), || format!("slowest estimate {slowest:?}"))?;
    Ok(format!(
        "circle err {err:.4}, exponent {a_circle:.3}; ℤ² exponent {a_z:.3}; identical for 1/2/8 workers; slowest {slowest:.2?}"
    ))
}

fn c7_corners() -> Outcome {
    for l in 0..=10u32 {
        let s = corner_strata(l);
        let sum: i64 = s.iter().map(|c| c.contribution).sum();
        check(s.len() == 1 << l, || format!("l = {l}: {} strata", s.len()))?;
        check(sum == i64::from(l == 0), || format!("l = {l}: sum {sum}"))?;
        let r = dispatch(&argv(&format!("corner strata --l {l}"))).map_err(|e| e.to_string())?;
        check(r.results["sum"] == sum && r.results["count"] == (1u64 << l), || format!("cli l = {l}"))?;
    }
    Ok("l = 0..10".into())
}

fn random_value(rng: &mut ChaCha8Rng) -> NSValue {
    match rng.gen_range(0..10) {
        0 => NSValue::Infinity,
        1 => NSValue::InfinityPlus,
        _ => NSValue::finite(rng.gen_range(0..40), rng.gen_range(1..7)),
    }
}

fn random_profile(rng: &mut ChaCha8Rng) -> NSProfile {
    let dim = rng.gen_range(0..7u32);
    NSProfile {
        dim,
        betti_nonzero: (0..=dim).filter(|_| rng.gen_bool(0.25)).collect(),
        alpha: (1..=dim)
            .filter(|_| rng.gen_bool(0.7))
            .collect::<Vec<_>>()
            .into_iter()
            .map(|p| (p, AlphaEntry::Exact { value: random_value(rng) }))
            .collect(),
    }
}

/// The four sets written out separately.
fn four_sets(a: &NSProfile, b: &NSProfile, q: u32) -> NSValue {
    let al = |p: &NSProfile, i: u32| p.alpha(i).unwrap();
    let mut all = Vec::new();
    for i in 1..=q {
        all.push(al(a, i) + al(b, q + 1 - i));
    }
    for i in 1..q {
        all.push(al(a, i) + al(b, q - i));
    }
    for i in 0..q {
        if a.betti(i) {
            all.push(al(b, q - i));
        }
    }
    for j in 0..q {
        if b.betti(j) {
            all.push(al(a, q - j));
        }
    }
    all.into_iter().min().unwrap_or(NSValue::InfinityPlus)
}

fn c8_ns_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 10_000;
    for k in 0..n {
        let (a, b, c) = (random_value(&mut rng), random_value(&mut rng), random_value(&mut rng));
        let ok = (a <= b || b <= a)
            && (!(a <= b && b <= c) || a <= c)
            && a + b == b + a
            && (a + b) + c == a + (b + c)
            && a.min(b).min(c) == a.min(b.min(c))
            && (!(a <= b) || a + c <= b + c)
            && a + NSValue::InfinityPlus == NSValue::InfinityPlus
            && a.min(NSValue::InfinityPlus) == a
            && (a == NSValue::InfinityPlus || a + NSValue::Infinity == NSValue::Infinity)
            && a.half() + a.half() == a;
        check(ok, || format!("check {k}: order/addition law fails for {a}, {b}, {c}"))?;
        let (pa, pb) = (random_profile(&mut rng), random_profile(&mut rng));
        let p = rng.gen_range(0..8);
        let tilde = tilde_alpha(&pa, p).unwrap();
        let want = pa.alpha(p).unwrap().min(pa.alpha(p + 1).unwrap()).half();
        check(tilde == want, || format!("check {k}: α̃_{p} = {tilde}, ½min = {want}"))?;
        let q = rng.gen_range(1..9);
        let ab = product_alpha(&pa, &pb, q).unwrap();
        let ba = product_alpha(&pb, &pa, q).unwrap();
        let brute = four_sets(&pa, &pb, q);
        check(ab == ba && ab == brute, || format!("check {k}: product {ab} / swapped {ba} / four sets {brute}"))?;
    }
    Ok(format!("{n} randomized checks, zero failures"))
}

fn corruptions(inputs: &BoundaryInputs) -> Vec<(String, BoundaryInputs)> {
    let mut out = Vec::new();
    let fields: [(&str, Field); 6] = [
        ("dim_x", |i| &mut i.dim_x),
        ("dim_n", |i| &mut i.dim_n),
        ("dim_xp", |i| &mut i.dim_xp),
        ("levi_f_rank", |i| &mut i.levi_f_rank),
        ("levi_deficiency", |i| &mut i.levi_deficiency),
        ("euclidean_dim", |i| &mut i.euclidean_dim),
    ];
    for (name, field) in fields {
        for delta in [1i64, -1] {
            let mut c = inputs.clone();
            let v = field(&mut c);
            if *v == 0 && delta < 0 {
                continue;
            }
            *v = (*v as i64 + delta) as u32;
            out.push((format!("{name}{delta:+}"), c));
        }
    }
    for delta in [1i64, -1] {
        let mut c = inputs.clone();
        c.graded_dims[0] = (c.graded_dims[0] as i64 + delta) as u32;
        out.push((format!("graded_dims[0]{delta:+}"), c));
    }
    out
}

fn c9_certificates() -> Outcome {
    let report = dispatch(&argv(&format!("ns bound --index {} --levi SO,2,2", data("gp_index.json"))))
        .map_err(|e| e.to_string())?;
    let cert = report.certificate.clone().ok_or("no certificate")?;
    check(cert.is_well_founded(), || "certificate inputs are not well founded".into())?;
    check(cert.steps.iter().all(|s| !s.citation.is_empty()), || "step without citation".into())?;
    check(cert.step("betti-boundary").is_some(), || "f-rank 0 branch lacks the Betti step".into())?;
    let inputs: BoundaryInputs = serde_json::from_value(report.results["inputs"].clone()).map_err(|e| e.to_string())?;
    let replay = replay_boundary(&inputs).map_err(|e| e.to_string())?;
    check(replay.bound == NSValue::int(4), || format!("replayed bound {}", replay.bound))?;
    check(matches!(replay.branch, Branch::FRankZero { betti_degree: 2, .. }), || format!("{:?}", replay.branch))?;
    // f-rank > 0 branch: the interval check runs on the actual dimensions
    let positive = BoundaryInputs {
        dim_x: 7,
        dim_n: 3,
        graded_dims: vec![3],
        growth_degree: 3,
        dim_xp: 3,
        levi_f_rank: 1,
        levi_deficiency: 0,
        euclidean_dim: 1,
    };
    let b = replay_boundary(&positive).map_err(|e| e.to_string())?;
    check(matches!(b.branch, Branch::FRankPositive { .. }), || format!("{:?}", b.branch))?;
    check(b.certificate.step("interval").is_some(), || "no interval step".into())?;
    let mut flipped = 0;
    for base in [&inputs, &positive] {
        for (name, bad) in corruptions(base) {
            match replay_boundary(&bad) {
                Err(NsError::CertificateFailure { .. }) => flipped += 1,
                other => return Err(format!("corrupting {name} gave {other:?}")),
            }
        }
    }
    Ok(format!("both branches replay; {flipped} ±1 corruptions rejected with a certificate failure"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "example pipeline", c1_example_pipeline),
        (2, "olbrich profiles", c2_olbrich_profiles),
        (3, "torsion verdicts", c3_torsion),
        (4, "restriction oracle", c4_restriction),
        (5, "parabolic combinatorics", c5_parabolics),
        (6, "spectral density", c6_spectral),
        (7, "corner strata", c7_corners),
        (8, "ns value algebra", c8_ns_algebra),
        (9, "certificate integrity", c9_certificates),
    ];
    let mut unexpected = Vec::new();
    for (n, name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let red = KNOWN_RED.iter().find(|(k, _)| *k == n);
        match (&outcome, red) {
            (Ok(detail), None) => println!("PASS  #{n} {name}: {detail}"),
            (Err(detail), None) => {
                println!("FAIL  #{n} {name}: {detail}");
                unexpected.push(n);
            }
            (Err(detail), Some((_, why))) => println!("FAIL  #{n} {name} (known): {detail}\n      analysis: {why}"),
            (Ok(detail), Some(_)) => {
                println!("PASS  #{n} {name}: {detail} (listed as known red; update KNOWN_RED)");
                unexpected.push(n);
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcomes for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
