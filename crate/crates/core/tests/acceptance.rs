//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the PASS/FAIL lines are always printed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use clusterbound::bounds::{legacy_bound, precondition_check, psi_bound, BoundInputs, FLOAT_TOLERANCE};
use clusterbound::clustering::{exact_structure, greedy_decomposition, greedy_structure, validate_structure};
use clusterbound::clustering::{ClusterStructure, ExactLimits};
use clusterbound::generators::{
    epsilon_partition, planted_instance, tight_instance, uniform_random_instance, uniformize, PlantedSpec,
    TightInstanceSpec, WeightedFiniteSpace,
};
use clusterbound::rational::{self, parse, ratio, Rational};
use clusterbound::report::canonical_json;
use clusterbound::stats::{anticlique_count, medium_edge_count};
use clusterbound::verify::{run_suite, PropId, SuiteConfig};
use clusterbound::{build_certificate, CertificateOptions, FiniteSemimetricSpace, ScaleParams};

const PSI_TOL: f64 = 1e-4;
const LEGACY_TOL: f64 = 1e-3;
const P1_BUDGET: Duration = Duration::from_secs(1);
const SUITE_BUDGET: Duration = Duration::from_secs(300);

type Outcome = Result<String, String>;

fn one() -> Rational {
    ratio(1, 1)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Pairs at distance in `(r, 3r]`, by direct scan.
fn medium_brute(s: &FiniteSemimetricSpace, r: &Rational) -> u64 {
    let three_r = r * rational::from_int(3);
    let mut count = 0;
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            let d = s.dist(i, j);
            if d > r && *d <= three_r {
                count += 1;
            }
        }
    }
    count
}

/// `size`-subsets with every pair farther than `r`, by subset masks.
fn anticliques_brute(s: &FiniteSemimetricSpace, r: &Rational, size: usize) -> u64 {
    let n = s.len();
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == size)
        .filter(|m| {
            let pts: Vec<usize> = (0..n).filter(|i| m >> i & 1 == 1).collect();
            pts.iter().enumerate().all(|(a, &i)| pts[a + 1..].iter().all(|&j| s.dist(i, j) > r))
        })
        .count() as u64
}

/// Best valid measure over all `(k+1)^n` point-to-cluster assignments.
fn exhaustive_measure(s: &FiniteSemimetricSpace, r: &Rational, k: usize) -> usize {
    let n = s.len();
    let mut best = 0;
    for code in 0..(k + 1).pow(n as u32) {
        let mut c = code;
        let mut clusters = vec![Vec::new(); k];
        for p in 0..n {
            if c % (k + 1) < k {
                clusters[c % (k + 1)].push(p);
            }
            c /= k + 1;
        }
        let structure = ClusterStructure::new(clusters, k);
        if structure.measure > best && validate_structure(s, &structure, r).valid {
            best = structure.measure;
        }
    }
    best
}

/// Seeded instance for the oracle and dominance criteria: planted blocks,
/// raw uniform matrices (not closed, so not metric) or closed ones.
fn seeded_instance(case: u64, max_n: usize) -> (FiniteSemimetricSpace, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0000 + case);
    let n = rng.random_range(1..=max_n);
    let k = rng.random_range(1..=3);
    let space = match case % 3 {
        0 => {
            let blocks = rng.random_range(1..=3.min(n));
            let mut sizes = vec![n / blocks; blocks];
            sizes[0] += n % blocks;
            planted_instance(&PlantedSpec { block_sizes: sizes, noise: ratio(1, 10), r: one(), seed: rng.random() })
                .unwrap()
        }
        1 => {
            let mut m = vec![vec![Rational::from_integer(0.into()); n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = ratio(rng.random_range(1..=40), 10);
                    m[i][j] = v.clone();
                    m[j][i] = v;
                }
            }
            FiniteSemimetricSpace::unlabeled(m).unwrap()
        }
        _ => uniform_random_instance(n, &one(), rng.random()).unwrap(),
    };
    (space, k)
}

fn prop1_witness() -> Outcome {
    let start = Instant::now();
    let t = tight_instance(&TightInstanceSpec { k: 2, m: 3, m0: 3, r: one() }).map_err(|e| e.to_string())?;
    let p = ScaleParams::new(one(), 2).unwrap();
    let m = medium_edge_count(&t, &one());
    let t3 = anticlique_count(&t, &one(), 3);
    let lam = ratio(1, 3);
    let n = rational::from_int(9);
    let closed = rational::pow(&n, 3) * (one() - ratio(2, 1) * &lam) * rational::pow(&lam, 2);
    let ex = exact_structure(&t, &p, &ExactLimits::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(m == 0, || format!("M = {m}"))?;
    ensure(t3 == BigUint::from(27u32), || format!("T_3 = {t3}"))?;
    ensure(rational::from_biguint(&t3) == closed, || format!("closed form {closed}"))?;
    ensure(ex.optimal && ex.structure.measure == 6, || format!("exact measure {}", ex.structure.measure))?;
    ensure(9 - ex.structure.measure == 3, || "gap".into())?;
    ensure(elapsed < P1_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("M=0 T_3=27 measure=6 gap=3 in {elapsed:?}"))
}

fn prop1_grid() -> Outcome {
    let limits = ExactLimits { max_points: 20, ..ExactLimits::default() };
    let mut cases = 0;
    for k in 1..=3usize {
        for m in 1..=4usize {
            for m0 in m..=5usize {
                let t = tight_instance(&TightInstanceSpec { k, m, m0, r: one() }).unwrap();
                let n = t.len();
                let ctx = || format!("k={k} m={m} m0={m0}");
                ensure(medium_brute(&t, &one()) == 0, || format!("{}: M != 0", ctx()))?;
                let tk1 = anticliques_brute(&t, &one(), k + 1);
                ensure(tk1 == (m0 * m.pow(k as u32)) as u64, || format!("{}: T_k+1 = {tk1}", ctx()))?;
                // n^{k+1} (1 - k lam) lam^k with lam = m/n
                let lam = ratio(m as i64, n as i64);
                let n_q = rational::from_int(n as u64);
                let closed = rational::pow(&n_q, k + 1)
                    * (one() - rational::from_int(k as u64) * &lam)
                    * rational::pow(&lam, k);
                ensure(rational::from_int(tk1) == closed, || format!("{}: closed form", ctx()))?;
                let p = ScaleParams::new(one(), k).unwrap();
                let ex = exact_structure(&t, &p, &limits).map_err(|e| format!("{}: {e}", ctx()))?;
                ensure(ex.optimal, || format!("{}: search incomplete", ctx()))?;
                ensure(n - ex.structure.measure == m, || {
                    format!("{}: gap {} != {m}", ctx(), n - ex.structure.measure)
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (k, m, m0) cases"))
}

fn suite() -> Outcome {
    let start = Instant::now();
    let report = run_suite(&SuiteConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let checked: usize = report
        .tallies
        .iter()
        .filter(|(p, _)| **p != PropId::P1)
        .map(|(_, t)| t.applicable)
        .sum();
    ensure(report.failures.is_empty(), || {
        let first = &report.failures[0];
        format!("{} failures, first {} on trial {}", report.failures.len(), first.result.prop, first.trial)
    })?;
    ensure(report.exact_incomplete == 0, || format!("{} incomplete exact searches", report.exact_incomplete))?;
    ensure(elapsed < SUITE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("200 trials, {checked} applicable P2..T1 checks, 0 failures in {elapsed:?}"))
}

fn oracle_equivalence() -> Outcome {
    for case in 0..100 {
        let (s, k) = seeded_instance(case, 8);
        let p = ScaleParams::new(one(), k).unwrap();
        let ex = exact_structure(&s, &p, &ExactLimits::default()).map_err(|e| e.to_string())?;
        let brute = exhaustive_measure(&s, &one(), k);
        ensure(ex.optimal && ex.structure.measure == brute, || {
            format!("case {case}: search {} vs exhaustive {brute}", ex.structure.measure)
        })?;
    }
    Ok("100 seeded cases with n <= 8".into())
}

fn greedy_dominance() -> Outcome {
    let mut complete = 0;
    for case in 0..200 {
        let (s, k) = seeded_instance(1000 + case, 12);
        let p = ScaleParams::new(one(), k).unwrap();
        let greedy = greedy_structure(&greedy_decomposition(&s, &p), k);
        ensure(validate_structure(&s, &greedy, &one()).valid, || format!("case {case}: greedy invalid"))?;
        let ex = exact_structure(&s, &p, &ExactLimits::default()).map_err(|e| e.to_string())?;
        if !ex.optimal {
            continue;
        }
        complete += 1;
        ensure(validate_structure(&s, &ex.structure, &one()).valid, || format!("case {case}: exact invalid"))?;
        ensure(greedy.measure <= ex.structure.measure, || {
            format!("case {case}: greedy {} > exact {}", greedy.measure, ex.structure.measure)
        })?;
    }
    Ok(format!("{complete}/200 complete searches, greedy <= exact and both valid"))
}

fn bound_reproduction() -> Outcome {
    let x = parse("1e-4").unwrap();
    let inputs = BoundInputs::new(ratio(1, 2), x.clone(), x.clone(), 2).unwrap();
    let psi = psi_bound(&inputs).psi().ok_or("Psi undefined")?;
    let legacy = legacy_bound(&x, &x, 2);
    ensure((psi - 0.94840).abs() <= PSI_TOL, || format!("Psi = {psi}"))?;
    ensure((legacy - 0.55841).abs() <= LEGACY_TOL, || format!("legacy = {legacy}"))?;
    ensure(psi > legacy, || "Psi <= legacy".into())?;
    Ok(format!("Psi = {psi:.5} (tol {PSI_TOL}), legacy = {legacy:.5} (tol {LEGACY_TOL})"))
}

fn bound_grid() -> Outcome {
    let small = ["0", "1e-6", "1e-5", "1e-4", "1e-3"];
    let alphas = ["0.3", "0.5", "0.7", "0.9", "1"];
    let (mut compared, mut skipped) = (0, 0);
    for k in 1..=4 {
        for b in small {
            for d in small {
                for a in alphas {
                    let (beta, delta) = (parse(b).unwrap(), parse(d).unwrap());
                    let inputs = BoundInputs::new(parse(a).unwrap(), beta.clone(), delta.clone(), k).unwrap();
                    if !precondition_check(&inputs).holds {
                        skipped += 1;
                        continue;
                    }
                    let psi = psi_bound(&inputs).psi().ok_or_else(|| format!("k={k} a={a} b={b} d={d}: Psi undefined"))?;
                    let legacy = legacy_bound(&beta, &delta, k);
                    ensure(psi + FLOAT_TOLERANCE >= legacy, || {
                        format!("k={k} a={a} b={b} d={d}: Psi {psi} < legacy {legacy}")
                    })?;
                    compared += 1;
                }
            }
        }
    }
    Ok(format!("{compared} grid points with Psi >= legacy, {skipped} outside the precondition"))
}

fn sandwich() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut blocks = 0;
    for case in 0..50 {
        let n = rng.random_range(1..=12);
        let base = uniform_random_instance(n, &one(), rng.random()).unwrap();
        let weights = (0..n).map(|_| ratio(rng.random_range(1..=1000), 1000)).collect();
        let w = WeightedFiniteSpace::new(base, weights).unwrap();
        let eps = ratio(rng.random_range(1..=50), 100);
        let parts = epsilon_partition(&w, &eps).map_err(|e| e.to_string())?;
        for part in &parts {
            ensure(w.base().subset_diameter(part) <= eps, || format!("case {case}: part diameter above eps"))?;
        }
        let u = uniformize(&w, &parts, &eps).map_err(|e| format!("case {case}: {e}"))?;
        for (lo, b, hi) in u.sandwich(&eps) {
            ensure(lo <= b && b <= hi, || format!("case {case}: {lo} <= {b} <= {hi} fails"))?;
            blocks += 1;
        }
    }
    Ok(format!("50 weighted spaces, {blocks} blocks inside the exact sandwich"))
}

fn determinism() -> Outcome {
    let s = planted_instance(&PlantedSpec { block_sizes: vec![4, 3, 3], noise: ratio(1, 10), r: one(), seed: 17 })
        .unwrap();
    let again = planted_instance(&PlantedSpec { block_sizes: vec![4, 3, 3], noise: ratio(1, 10), r: one(), seed: 17 })
        .unwrap();
    ensure(s.to_text() == again.to_text(), || "generator output differs".into())?;
    let p = ScaleParams::new(one(), 2).unwrap();
    let cert = |s: &FiniteSemimetricSpace| canonical_json(&build_certificate(s, &p, &CertificateOptions::default()));
    ensure(cert(&s).unwrap() == cert(&again).unwrap(), || "certificates differ".into())?;
    let cfg = SuiteConfig { trials: 60, seed: 7, ..SuiteConfig::default() };
    let a = canonical_json(&run_suite(&cfg).unwrap()).unwrap();
    let b = canonical_json(&run_suite(&cfg).unwrap()).unwrap();
    ensure(a == b, || "reports differ".into())?;
    Ok(format!("certificate and {}-byte report identical across runs", a.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("tight instance witness (k=2, m=3, m0=3)", prop1_witness),
        ("tight instance identities on the grid", prop1_grid),
        ("verification suite seed 42", suite),
        ("exact search equals exhaustive enumeration", oracle_equivalence),
        ("greedy dominance and validity", greedy_dominance),
        ("Psi and legacy bound values", bound_reproduction),
        ("Psi >= legacy on the parameter grid", bound_grid),
        ("uniformization sandwich and part diameters", sandwich),
        ("byte-identical certificates and reports", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
