//! Canonical JSON and plain-text tables for the crate's result types.
//!
//! Canonical JSON has object keys sorted at every level, two-space
//! indentation and a trailing newline, so equal values give equal bytes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::bounds::BoundCertificate;
use crate::clustering::{ExactSearch, GreedyDecomposition};
use crate::error::{Error, Result};
use crate::rational;
use crate::verify::VerificationReport;

pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    // serde_json::Value keeps object keys in a BTreeMap, which sorts them.
    let value = serde_json::to_value(value).map_err(|e| Error::Json(e.to_string()))?;
    let mut out = serde_json::to_string_pretty(&value).map_err(|e| Error::Json(e.to_string()))?;
    out.push('\n');
    Ok(out)
}

fn row(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key:<24} {value}");
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

pub fn certificate_table(cert: &BoundCertificate) -> String {
    let mut out = String::new();
    row(&mut out, "n", cert.n);
    row(&mut out, "k", cert.k);
    row(&mut out, "r", rational::to_decimal_or_pq(&cert.r));
    row(&mut out, "M", cert.counts.medium);
    row(&mut out, "T_k", &cert.counts.t_k);
    row(&mut out, "T_k+1", &cert.counts.t_k1);
    row(&mut out, "delta", rational::to_decimal_or_pq(&cert.observed.delta));
    row(&mut out, "beta", rational::to_decimal_or_pq(&cert.observed.beta));
    row(&mut out, "alpha", rational::to_decimal_or_pq(&cert.observed.alpha));
    row(&mut out, "precondition", cert.precondition);
    row(&mut out, "lambda", opt(&cert.lambda.as_ref().map(rational::to_decimal_or_pq)));
    row(&mut out, "alpha'", opt(&cert.alpha_prime.as_ref().map(rational::to_decimal_or_pq)));
    match (&cert.psi, &cert.psi_reason) {
        (Some(psi), _) => row(&mut out, "psi", psi),
        (None, reason) => row(&mut out, "psi", format!("n/a ({})", opt(reason))),
    }
    row(&mut out, "legacy", cert.legacy);
    row(&mut out, "greedy measure", cert.greedy.measure);
    row(&mut out, "greedy clusters", format!("{:?}", cert.greedy.clusters));
    if let Some(ex) = &cert.exact {
        match &ex.error {
            Some(e) => row(&mut out, "exact", e),
            None => {
                row(&mut out, "exact measure", opt(&ex.measure));
                row(&mut out, "exact optimal", ex.optimal);
                row(&mut out, "exact clusters", format!("{:?}", ex.clusters));
            }
        }
    }
    for v in &cert.verdicts {
        let mark = if v.holds { "ok" } else { "FAIL" };
        let _ = writeln!(out, "[{mark:>4}] {}: {} vs {}", v.name, v.lhs, v.rhs);
    }
    out
}

pub fn decomposition_table(d: &GreedyDecomposition) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n = {}, k = {}, r = {}", d.n, d.k, rational::to_decimal_or_pq(&d.r));
    let _ = writeln!(out, "{:>4} {:>5} {:>5} {:>5} {:>5} {:>6} {:>6}  kernel", "part", "|Z|", "|X|", "|Y|", "|U|", "medium", "long");
    for (i, p) in d.parts.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i:>4} {:>5} {:>5} {:>5} {:>5} {:>6} {:>6}  {:?}",
            p.z.len(),
            p.x.len(),
            p.y.len(),
            p.u.len(),
            p.medium,
            p.long,
            p.x
        );
    }
    let _ = writeln!(out, "W  = {:?}", d.w);
    let _ = writeln!(out, "I0 = {:?}", d.i0);
    let _ = writeln!(out, "I1 = {:?}", d.i1);
    let _ = writeln!(out, "I2 = {:?}", d.i2);
    out
}

pub fn exact_table(search: &ExactSearch) -> String {
    let mut out = String::new();
    row(&mut out, "measure", search.structure.measure);
    row(&mut out, "optimal", search.optimal);
    row(&mut out, "nodes", search.nodes);
    for (i, c) in search.structure.clusters.iter().enumerate() {
        row(&mut out, &format!("cluster {i}"), format!("{c:?}"));
    }
    out
}

pub fn report_table(report: &VerificationReport) -> String {
    let mut out = String::new();
    let c = &report.config;
    let _ = writeln!(
        out,
        "seed {}  trials {}  max_n {}  k {}..={}",
        c.seed, c.trials, c.max_n, c.k_min, c.k_max
    );
    let gens: Vec<String> = report.generators.iter().map(|(g, n)| format!("{g} {n}")).collect();
    let _ = writeln!(out, "generators: {}", gens.join(", "));
    let _ = writeln!(out, "{:<5} {:>10} {:>8} {:>8} {:>8}", "check", "applicable", "passed", "failed", "n/a");
    for (prop, t) in &report.tallies {
        let _ = writeln!(
            out,
            "{:<5} {:>10} {:>8} {:>8} {:>8}",
            prop.to_string(),
            t.applicable,
            t.passed,
            t.failed,
            t.not_applicable
        );
    }
    let _ = writeln!(out, "exact search incomplete: {}", report.exact_incomplete);
    for f in &report.failures {
        let _ = writeln!(out, "\nFAIL {} on trial {} ({}, k = {})", f.result.prop, f.trial, f.generator, f.k);
        for cl in f.result.clauses.iter().filter(|c| !c.holds) {
            let _ = writeln!(out, "  {}: {} {} {}", cl.name, cl.lhs, cl.relation, cl.rhs);
        }
        out.push_str(&f.space);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{build_certificate, CertificateOptions};
    use crate::fixtures::{one, tight_k2};
    use crate::space::ScaleParams;

    #[test]
    fn certificate_json_is_canonical_and_stable() {
        let cert = build_certificate(&tight_k2(), &ScaleParams::new(one(), 2).unwrap(), &CertificateOptions::default());
        let a = canonical_json(&cert).unwrap();
        assert_eq!(a, canonical_json(&cert.clone()).unwrap());
        assert!(a.ends_with("}\n"));
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["counts"]["M"], 0);
        assert_eq!(v["counts"]["Tk1"], "27");
        assert_eq!(v["observed"]["delta"], "0/1");
        assert_eq!(v["greedy"]["measure"], 6);
        assert_eq!(v["exact"]["measure"], 6);
        assert_eq!(v["exact"]["optimal"], true);
        // keys come out sorted
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        let text = certificate_table(&cert);
        assert!(text.contains("T_k+1"));
    }
}
