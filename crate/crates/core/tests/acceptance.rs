//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Reference values come from the dense oracles in `common` or
//! from closed forms written out here.

mod common;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use errgen::channels::pauli_rotation;
use errgen::generators::pairing_matrix;
use errgen::models::sector_counts;
use errgen::{
    all_labels, check_process, decompose, dual_generator, elementary_generator, extract_error_generator, j_amplitude,
    j_probability, labels_of, make_channel, parameter_count, random_small, reconstruct, ChannelKind, ChannelSpec,
    Convention, Error, ErrorGeneratorRates, GeneratorLabel, ModelSpec, PauliString, ProcessMatrix, Sector,
};

use common::{generator_ptm, j_metrics_dense, min_choi_eigenvalue_dense, unitary_ptm};

type Outcome = Result<String, String>;

type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e(err: Error) -> String {
    err.to_string()
}

fn label(s: &str) -> GeneratorLabel {
    s.parse().unwrap()
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn oracle_ptm(l: &GeneratorLabel) -> DMatrix<f64> {
    let kind = l.sector().to_string().chars().next().unwrap();
    let q = l.q().map(|q| q.to_string());
    generator_ptm(kind, &l.p().to_string(), q.as_deref())
}

/// Weight of the union support of two base-4 Pauli indices.
fn union_weight(n: usize, a: usize, b: usize) -> usize {
    (0..n).filter(|k| (a >> (2 * k)) & 3 != 0 || (b >> (2 * k)) & 3 != 0).count()
}

/// Brute-force sector counts by weight class, straight from index pairs.
fn brute_counts(n: usize, keep: impl Fn(usize) -> bool) -> [u64; 4] {
    let m = 1usize << (2 * n);
    let mut out = [0u64; 4];
    for p in 1..m {
        if keep(union_weight(n, p, 0)) {
            out[0] += 1;
            out[1] += 1;
        }
        for q in p + 1..m {
            if keep(union_weight(n, p, q)) {
                out[2] += 1;
                out[3] += 1;
            }
        }
    }
    out
}

fn counts_of(spec: &ModelSpec) -> [BigUint; 4] {
    let c = sector_counts(spec);
    Sector::ALL.map(|s| c.get(&s).cloned().unwrap_or_default())
}

fn c1() -> Outcome {
    let expected: [(usize, [u64; 4]); 3] = [(1, [3, 3, 3, 3]), (2, [15, 15, 105, 105]), (3, [63, 63, 1953, 1953])];
    let totals = [12u64, 240, 4032];
    for ((n, want), total) in expected.iter().zip(totals) {
        let spec = ModelSpec::full(*n).map_err(e)?;
        let got = counts_of(&spec);
        ensure(got == want.map(big), || format!("N={n}: sector sizes {got:?}, want {want:?}"))?;
        ensure(parameter_count(&spec) == big(total), || format!("N={n}: total {}", parameter_count(&spec)))?;
        ensure(brute_counts(*n, |_| true) == *want, || format!("N={n}: brute force disagrees"))?;
        let labels = all_labels(*n).map_err(e)?;
        ensure(labels.len() as u64 == total, || format!("N={n}: {} labels enumerated", labels.len()))?;
    }
    let w3 = ModelSpec::parse("H(3),S(3),C(3),A(3)", 3).map_err(e)?;
    let brute: u64 = brute_counts(3, |w| w == 3).iter().sum();
    ensure(brute == 3348, || format!("brute-force weight-3 count {brute}"))?;
    ensure(parameter_count(&w3) == big(3348), || format!("weight-3 count {}", parameter_count(&w3)))?;
    for n in 1..=6usize {
        let d2 = big(1) << (2 * n);
        let want = &d2 * (&d2 - big(1u64));
        let got = parameter_count(&ModelSpec::full(n).map_err(e)?);
        ensure(got == want, || format!("N={n}: full count {got} != d^2(d^2-1)"))?;
    }
    Ok("N=1,2,3 sector sizes, weight-3 = 3348, d^2(d^2-1) for N<=6".into())
}

fn c2() -> Outcome {
    let count = |text: &str, n: usize| -> Result<BigUint, String> {
        Ok(parameter_count(&ModelSpec::parse(text, n).map_err(e)?))
    };
    ensure(count("H+S+A1", 2)? == big(36), || "H+S+A1 at N=2".into())?;
    ensure(count("W2", 10)? == big(9840), || "W2 at N=10".into())?;
    for n in 1..=4usize {
        let spec = ModelSpec::parse("H2+S2+A1", n).map_err(e)?;
        let b = brute_counts(n, |w| w <= 2);
        let b_a1 = brute_counts(n, |w| w == 1)[3];
        let brute = b[0] + b[1] + b_a1;
        let enumerated = labels_of(&spec).map_err(e)?.len() as u64;
        let formula = 9 * (n * n) as u64;
        ensure(brute == formula && enumerated == formula && parameter_count(&spec) == big(formula), || {
            format!("N={n}: brute {brute}, enumerated {enumerated}, formula {formula}")
        })?;
    }
    let at20 = count("H2S2A1", 20)?;
    ensure(at20 == big(3600) && at20 != big(3249), || format!("H2S2A1 at N=20 gives {at20}"))?;
    let excluded = count("W2", 3)? - count("H2S2A1", 3)?;
    ensure(excluded == big(603) && excluded != big(594), || format!("excluded at N=3: {excluded}"))?;
    Ok("36, 9840, 9N^2 by enumeration N<=4; N=20 gives 3600 (not 3249), N=3 excluded 603 (not 594)".into())
}

fn c3() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [1usize, 2] {
        let labels = all_labels(n).map_err(e)?;
        let p = pairing_matrix(&labels);
        let dev = (&p - DMatrix::<f64>::identity(labels.len(), labels.len())).amax();
        ensure(dev < 1e-10, || format!("N={n}: pairing deviation {dev:e}"))?;
        let duals: Vec<DMatrix<f64>> =
            labels.iter().map(|l| dual_generator(l).map(|m| m.into_matrix())).collect::<Result<_, _>>().map_err(e)?;
        let prims: Vec<DMatrix<f64>> = labels.iter().map(oracle_ptm).collect();
        for (i, d) in duals.iter().enumerate() {
            for (j, g) in prims.iter().enumerate() {
                let v = d.dot(g);
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - want).abs());
            }
        }
        ensure(worst < 1e-10, || format!("N={n}: dense pairing deviation {worst:e}"))?;
    }
    Ok(format!("12x12 and 240x240 pairings, max deviation {worst:.1e}"))
}

fn c4() -> Outcome {
    let scales = [1e-3, 1e-2, 5e-2];
    let mut worst: f64 = 0.0;
    for (n, count) in [(1usize, 100u64), (2, 50)] {
        for seed in 0..count {
            let scale = scales[seed as usize % scales.len()];
            let rc = random_small(seed, scale, n).map_err(e)?;
            let l = rc.process.log().map_err(e)?;
            let rates = decompose(&l, Convention::Logarithm).map_err(e)?;
            let back = reconstruct(&rates).map_err(e)?.exp().map_err(e)?;
            let dist = back.frobenius_distance(&rc.process).map_err(e)?;
            worst = worst.max(dist);
            ensure(dist <= 1e-8, || format!("N={n} seed {seed}: distance {dist:e}"))?;
            let drift = rates.sub(&rc.rates).map_err(e)?.norm();
            ensure(drift <= 1e-8, || format!("N={n} seed {seed}: rates drift {drift:e} from the sampled Lindbladian"))?;
        }
    }
    Ok(format!("150 channels, max ||exp(reconstruct(decompose(log E))) - E||_F = {worst:.1e}"))
}

fn c5() -> Outcome {
    let m4 = |rows: [[f64; 4]; 4]| DMatrix::from_fn(4, 4, |i, j| rows[i][j]);
    let cases = [
        // A_{X,Y}: pure translation, I -> -4Z.
        ("A:X,Y", m4([[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [-4.0, 0.0, 0.0, 0.0]])),
        ("S:X", m4([[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, -2.0, 0.0], [0.0, 0.0, 0.0, -2.0]])),
        // -i[Y, X] = -2Z and -i[Y, Z] = 2X.
        ("H:Y", m4([[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 2.0], [0.0, 0.0, 0.0, 0.0], [0.0, -2.0, 0.0, 0.0]])),
        // XXZ + ZXX = 2Z, XZZ + ZZX = 2X, XYZ + ZYX = 0.
        ("C:X,Z", m4([[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 2.0], [0.0, 0.0, 0.0, 0.0], [0.0, 2.0, 0.0, 0.0]])),
    ];
    for (name, want) in &cases {
        let got = elementary_generator(&label(name)).map_err(e)?.into_matrix();
        let dev = (&got - want).amax();
        ensure(dev <= 1e-12, || format!("{name}: deviation {dev:e} from hand-built matrix\n{got}"))?;
        let dense = oracle_ptm(&label(name));
        ensure((&dense - want).amax() <= 1e-12, || format!("{name}: dense oracle disagrees"))?;
    }
    let mut worst: f64 = 0.0;
    for n in [1usize, 2] {
        for l in all_labels(n).map_err(e)? {
            let got = elementary_generator(&l).map_err(e)?.into_matrix();
            worst = worst.max((&got - oracle_ptm(&l)).amax());
        }
    }
    ensure(worst <= 1e-12, || format!("elementary generators vs literal formulas: {worst:e}"))?;
    Ok(format!("A_XY, S_X, H_Y, C_XZ exact; all 252 labels at N=1,2 within {worst:.1e} of the literal formulas"))
}

fn c6() -> Outcome {
    let mut checked = 0;
    for n in [1usize, 2] {
        for l in all_labels(n).map_err(e)? {
            let want = match (l.sector(), l.pair_commutes()) {
                (Sector::H, _) => (0.0, 1.0),
                (Sector::S, _) => (1.0, 0.0),
                (Sector::C, Some(true)) | (Sector::A, Some(false)) => (0.0, 1.0),
                _ => (0.0, 0.0),
            };
            let g = elementary_generator(&l).map_err(e)?;
            let got = (j_probability(&g).map_err(e)?, j_amplitude(&g).map_err(e)?);
            let dense = j_metrics_dense(n, &oracle_ptm(&l));
            for (what, v) in [("library", got), ("dense", dense)] {
                ensure((v.0 - want.0).abs() <= 1e-10 && (v.1 - want.1).abs() <= 1e-10, || {
                    format!("{l}: {what} (eps, theta) = {v:?}, want {want:?}")
                })?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} generators match the (eps_J, theta_J) table"))
}

fn c7() -> Outcome {
    let p = 0.01f64;
    let e_proc = make_channel(&ChannelSpec::new(1, ChannelKind::IndivisibleXy { p, qubit: 0 })).map_err(e)?;
    let id = ProcessMatrix::identity(1).map_err(e)?;
    let closed = ((1.0 - 4.0 * p).ln() - 2.0 * (1.0 - 2.0 * p).ln()) / 4.0;
    let log_rates =
        decompose(&extract_error_generator(&e_proc, &id, Convention::Logarithm).map_err(e)?, Convention::Logarithm)
            .map_err(e)?;
    let sz = log_rates.get(&label("S:Z"));
    ensure((sz - closed).abs() <= 1e-12, || format!("log s_Z = {sz:e}, closed form {closed:e}"))?;
    ensure(((sz + p * p) / (p * p)).abs() <= 0.05, || format!("log s_Z = {sz:e} not within 5% of -p^2"))?;
    let diff =
        decompose(&extract_error_generator(&e_proc, &id, Convention::Difference).map_err(e)?, Convention::Difference)
            .map_err(e)?;
    let (dx, dy, dz) = (diff.get(&label("S:X")), diff.get(&label("S:Y")), diff.get(&label("S:Z")));
    ensure(dz.abs() <= 1e-12 && (dx - p).abs() <= 1e-12 && (dy - p).abs() <= 1e-12, || {
        format!("diff rates s_X={dx:e} s_Y={dy:e} s_Z={dz:e}")
    })?;
    let half = e_proc.log().map_err(e)?.scaled(0.5).exp().map_err(e)?;
    let diag = check_process(&half).map_err(e)?;
    let dense_min = min_choi_eigenvalue_dense(1, half.matrix());
    ensure(!diag.is_cp && dense_min < 0.0, || {
        format!("exp(0.5 log E) reported CP (min eigenvalue {:e}, dense {dense_min:e})", diag.min_choi_eigenvalue)
    })?;
    Ok(format!(
        "log s_Z = {sz:.6e} (closed form {closed:.6e}); diff s_Z = {dz:e}; sqrt(E) min Choi eigenvalue {dense_min:.3e}"
    ))
}

fn c8() -> Outcome {
    let id = ProcessMatrix::identity(1).map_err(e)?;
    let support = [label("S:X"), label("S:Y"), label("A:X,Y")];
    let mut lines = Vec::new();
    for gamma in [1e-3f64, 1e-2] {
        let g = make_channel(&ChannelSpec::new(1, ChannelKind::AmplitudeDamping { gamma, qubit: 0 })).map_err(e)?;
        let rates =
            decompose(&extract_error_generator(&g, &id, Convention::Logarithm).map_err(e)?, Convention::Logarithm)
                .map_err(e)?;
        let want = -(1.0 - gamma).ln() / 4.0;
        for l in all_labels(1).map_err(e)? {
            let v = rates.get(&l);
            if support.contains(&l) {
                ensure((v.abs() - want).abs() <= 1e-9, || {
                    format!("gamma={gamma}: |{l}| = {:e}, want {want:e}", v.abs())
                })?;
            } else {
                ensure(v.abs() < 1e-10, || format!("gamma={gamma}: stray rate {l} = {v:e}"))?;
            }
        }
        let (sx, sy, a) = (rates.get(&support[0]), rates.get(&support[1]), rates.get(&support[2]));
        ensure(sx > 0.0 && sy > 0.0 && a < 0.0, || format!("gamma={gamma}: signs s_X={sx:e} s_Y={sy:e} a_XY={a:e}"))?;
        let rebuilt = reconstruct(&rates).map_err(e)?.exp().map_err(e)?;
        let dist = rebuilt.frobenius_distance(&g).map_err(e)?;
        ensure(dist <= 1e-9, || format!("gamma={gamma}: exp(L) misses the channel by {dist:e}"))?;
        lines.push(format!("gamma={gamma}: {want:.6e}"));
    }
    Ok(format!("support {{S:X, S:Y, A:X,Y}}, a_XY < 0; {}", lines.join(", ")))
}

fn leakage(conj: &DMatrix<f64>, n: usize, allowed: &[Sector]) -> Result<f64, String> {
    let rates = decompose(&ProcessMatrix::new(n, conj.clone()).map_err(e)?, Convention::Logarithm).map_err(e)?;
    let total = rates.norm();
    let mut out = ErrorGeneratorRates::new(n, Convention::Logarithm);
    for (l, v) in rates.iter() {
        if !allowed.contains(&l.sector()) {
            out.set(*l, v).map_err(e)?;
        }
    }
    Ok(out.norm() / total)
}

const CLASSES: [&[Sector]; 3] = [&[Sector::H], &[Sector::S, Sector::C], &[Sector::A]];

fn class_of(s: Sector) -> &'static [Sector] {
    CLASSES.iter().find(|c| c.contains(&s)).unwrap()
}

/// PTMs of the single-qubit Clifford group, by closure from H and S.
fn cliffords() -> Vec<DMatrix<f64>> {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let h = (common::letter('X') + common::letter('Z')) * common::c(s2, 0.0);
    let mut s = common::letter('I');
    s[(1, 1)] = common::c(0.0, 1.0);
    let gens = [unitary_ptm(&h), unitary_ptm(&s)];
    let key = |m: &DMatrix<f64>| m.iter().map(|v| v.round() as i64).collect::<Vec<_>>();
    let mut seen = HashSet::new();
    let mut group = vec![DMatrix::<f64>::identity(4, 4)];
    seen.insert(key(&group[0]));
    let mut k = 0;
    while k < group.len() {
        for g in &gens {
            let m = g * &group[k];
            if seen.insert(key(&m)) {
                group.push(m);
            }
        }
        k += 1;
    }
    group
}

fn c9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    let mut unitaries = 0;
    for n in [1usize, 2] {
        let labels = all_labels(n).map_err(e)?;
        let gens: Vec<DMatrix<f64>> = labels.iter().map(oracle_ptm).collect();
        let count = if n == 1 { 30 } else { 20 };
        for _ in 0..count {
            let r = unitary_ptm(&common::random_unitary(1 << n, &mut rng));
            for (l, g) in labels.iter().zip(&gens) {
                let leak = leakage(&(&r * g * r.transpose()), n, class_of(l.sector()))?;
                worst = worst.max(leak);
                ensure(leak < 1e-9, || format!("N={n}: {l} leaks {leak:e} out of its sector class"))?;
            }
            unitaries += 1;
        }
    }
    let group = cliffords();
    ensure(group.len() == 24, || format!("closure produced {} Cliffords", group.len()))?;
    let mut worst_cliff: f64 = 0.0;
    for r in &group {
        for l in all_labels(1).map_err(e)?.iter().filter(|l| matches!(l.sector(), Sector::S | Sector::C)) {
            let leak = leakage(&(r * oracle_ptm(l) * r.transpose()), 1, &[l.sector()])?;
            worst_cliff = worst_cliff.max(leak);
            ensure(leak < 1e-9, || format!("Clifford conjugation of {l} leaks {leak:e} across the S/C split"))?;
        }
    }
    Ok(format!(
        "{unitaries} random unitaries (max leakage {worst:.1e}); 24 Cliffords keep S and C apart (max {worst_cliff:.1e})"
    ))
}

/// Constant in `|F - (1 - eps - theta^2)| <= K ||L||_F^3`. The sweep in
/// `examples/fidelity_sweep.rs` peaks at 1.17 over this corpus.
const FIDELITY_K: f64 = 5.0;

fn c10() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in [1usize, 2] {
        let d2 = (1usize << (2 * n)) as f64;
        let seeds = if n == 1 { 100 } else { 25 };
        for scale in [1e-3, 3e-3, 1e-2, 3e-2, 1e-1] {
            for seed in 0..seeds {
                let g = random_small(seed, scale, n).map_err(e)?.process;
                let l = g.log().map_err(e)?;
                let eps = j_probability(&l).map_err(e)?;
                let theta = j_amplitude(&l).map_err(e)?;
                // Target is the identity, so F = Tr(G) / d^2.
                let f = g.matrix().trace() / d2;
                let gap = (f - (1.0 - eps - theta * theta)).abs();
                let bound = FIDELITY_K * l.matrix().norm().powi(3);
                worst = worst.max(gap / l.matrix().norm().powi(3));
                ensure(gap <= bound, || format!("N={n} scale {scale} seed {seed}: gap {gap:e} > bound {bound:e}"))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} channels, max |gap|/||L||_F^3 = {worst:.3} <= {FIDELITY_K}"))
}

fn c11() -> Outcome {
    let p = 0.05;
    let z = PauliString::single(1, 0, 'Z').map_err(e)?;
    let x = PauliString::single(1, 0, 'X').map_err(e)?;
    let target = pauli_rotation(z, std::f64::consts::PI).map_err(e)?;
    let err = make_channel(&ChannelSpec::new(1, ChannelKind::Dephasing { pauli: x, q: p })).map_err(e)?;
    let gate = err.compose(&target).map_err(e)?;
    match gate.log() {
        Err(Error::NoRealLogarithm(_)) => {}
        other => return Err(format!("log of the gate itself: {other:?}")),
    }
    let id = ProcessMatrix::identity(1).map_err(e)?;
    match extract_error_generator(&gate, &id, Convention::Logarithm) {
        Err(Error::NoRealLogarithm(_)) => {}
        other => return Err(format!("extraction against the identity: {other:?}")),
    }
    let l = extract_error_generator(&gate, &target, Convention::Logarithm).map_err(e)?;
    let rates = decompose(&l, Convention::Logarithm).map_err(e)?;
    let want = -(1.0 - 2.0 * p).ln() / 2.0;
    let sx = rates.get(&label("S:X"));
    ensure((sx - want).abs() <= 1e-12 && rates.len() == 1, || format!("post-gate rates {rates:?}"))?;
    Ok(format!("log(G) raises NoRealLogarithm; post-gate extraction gives s_X = {sx:.6e}"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("dimension identities", c1, Some(Duration::from_secs(1))),
        ("named-model counts", c2, None),
        ("dual-basis calibration", c3, Some(Duration::from_secs(10))),
        ("round-trip fidelity", c4, Some(Duration::from_secs(60))),
        ("elementary-generator ground truth", c5, None),
        ("metrics table", c6, None),
        ("indivisibility example", c7, None),
        ("T1 decomposition", c8, None),
        ("invariance suite", c9, None),
        ("fidelity relation", c10, None),
        ("no-real-logarithm path", c11, None),
    ];
    let mut failed = 0;
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = run();
        let took = start.elapsed();
        if let (Ok(_), Some(b)) = (&outcome, budget) {
            if took > *b {
                outcome = Err(format!("took {took:.2?}, budget {b:.0?}"));
            }
        }
        match outcome {
            Ok(detail) => println!("criterion {:>2}: PASS  {name} ({took:.2?}): {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name} ({took:.2?}): {why}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
