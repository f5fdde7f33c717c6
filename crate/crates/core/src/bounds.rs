//! The improved measure bound `Psi(alpha, beta, delta)`, the legacy bound it
//! replaces, and certificates tying both to a concrete space.
//!
//! Everything that can be decided exactly is: `lambda`, `alpha'` and the
//! precondition are rationals, and "measure >= Psi * n" is decided by
//! squaring. Only the reported `psi` and `legacy` values are floats (f64,
//! evaluated to well within 1e-12 for the magnitudes involved).

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::clustering::{
    exact_structure, greedy_decomposition, greedy_structure, validate_structure, ExactLimits,
};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::space::{FiniteSemimetricSpace, ScaleParams};
use crate::stats::{observed_parameters, ObservedParams};

/// Slack allowed when a float bound is compared with an integer measure.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundInputs {
    #[serde(with = "rational::serde_pq")]
    pub alpha: Rational,
    #[serde(with = "rational::serde_pq")]
    pub beta: Rational,
    #[serde(with = "rational::serde_pq")]
    pub delta: Rational,
    pub k: usize,
}

impl BoundInputs {
    pub fn new(alpha: Rational, beta: Rational, delta: Rational, k: usize) -> Result<Self> {
        if alpha.is_negative() || beta.is_negative() || delta.is_negative() {
            return Err(Error::InvalidParam("alpha, beta and delta must be non-negative".into()));
        }
        if k == 0 {
            return Err(Error::InvalidParam("k must be at least 1".into()));
        }
        Ok(Self { alpha, beta, delta, k })
    }

    fn k_q(&self) -> Rational {
        rational::from_int(self.k as u64)
    }
}

/// `lambda = (k+1) delta / 2 + (k+1)^2 beta^2 / (2 alpha^2)`.
pub fn lambda_param(inputs: &BoundInputs) -> Result<Rational> {
    if !inputs.alpha.is_positive() {
        return Err(Error::Undefined("lambda needs alpha > 0".into()));
    }
    let k1 = inputs.k_q() + rational::from_int(1);
    let two = rational::from_int(2);
    let ratio = &inputs.beta / &inputs.alpha;
    Ok(&k1 * &inputs.delta / &two + &k1 * &k1 * &ratio * &ratio / two)
}

/// `alpha' = alpha - lambda k^3 / 2`.
pub fn alpha_prime(inputs: &BoundInputs) -> Result<Rational> {
    let lambda = lambda_param(inputs)?;
    Ok(&inputs.alpha - lambda * rational::pow(&inputs.k_q(), 3) / rational::from_int(2))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreconditionVerdict {
    pub holds: bool,
    /// `delta + (k+1) beta^2 / alpha^2`, absent when alpha is zero.
    #[serde(with = "rational::serde_pq_opt")]
    pub lhs: Option<Rational>,
    /// `2 / (k+1)^3`
    #[serde(with = "rational::serde_pq")]
    pub rhs: Rational,
    pub reason: Option<String>,
}

pub fn precondition_check(inputs: &BoundInputs) -> PreconditionVerdict {
    let k1 = inputs.k_q() + rational::from_int(1);
    let rhs = rational::from_int(2) / rational::pow(&k1, 3);
    if !inputs.alpha.is_positive() {
        return PreconditionVerdict {
            holds: false,
            lhs: None,
            rhs,
            reason: Some("alpha not separated from zero".into()),
        };
    }
    let ratio = &inputs.beta / &inputs.alpha;
    let lhs = &inputs.delta + k1 * &ratio * &ratio;
    let holds = lhs <= rhs;
    PreconditionVerdict {
        holds,
        reason: (!holds).then(|| "delta + (k+1) beta^2 / alpha^2 exceeds 2/(k+1)^3".into()),
        lhs: Some(lhs),
        rhs,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PsiOutcome {
    Value {
        psi: f64,
        #[serde(with = "rational::serde_pq")]
        lambda: Rational,
        #[serde(with = "rational::serde_pq")]
        alpha_prime: Rational,
        /// `k! (k+2) beta / alpha'`
        #[serde(with = "rational::serde_pq")]
        penalty: Rational,
        /// `psi <= 0`: the bound says nothing.
        vacuous: bool,
    },
    NotApplicable {
        reason: String,
    },
}

impl PsiOutcome {
    pub fn psi(&self) -> Option<f64> {
        match self {
            PsiOutcome::Value { psi, .. } => Some(*psi),
            PsiOutcome::NotApplicable { .. } => None,
        }
    }
}

/// `Psi = 1 - sqrt(delta)(2k+1) - k!(k+2) beta / alpha'`, defined when the
/// precondition holds and `alpha' > 0`.
pub fn psi_bound(inputs: &BoundInputs) -> PsiOutcome {
    let pre = precondition_check(inputs);
    if !pre.holds {
        return PsiOutcome::NotApplicable { reason: pre.reason.unwrap_or_default() };
    }
    let lambda = lambda_param(inputs).expect("precondition implies alpha > 0");
    let alpha_prime = alpha_prime(inputs).expect("precondition implies alpha > 0");
    if !alpha_prime.is_positive() {
        return PsiOutcome::NotApplicable { reason: "alpha - k^3 lambda / 2 is not positive".into() };
    }
    let k = inputs.k;
    let penalty = rational::from_biguint(&rational::factorial(k)) * rational::from_int((k + 2) as u64)
        * &inputs.beta
        / &alpha_prime;
    let psi = 1.0
        - rational::to_f64(&inputs.delta).sqrt() * (2 * k + 1) as f64
        - rational::to_f64(&penalty);
    PsiOutcome::Value { psi, lambda, alpha_prime, penalty, vacuous: psi <= 0.0 }
}

/// `1 - sqrt(delta)(2k+1) - (k(e+1)+1) beta^(1/(k+1))`.
pub fn legacy_bound(beta: &Rational, delta: &Rational, k: usize) -> f64 {
    let k_f = k as f64;
    1.0 - rational::to_f64(delta).sqrt() * (2.0 * k_f + 1.0)
        - (k_f * (std::f64::consts::E + 1.0) + 1.0) * rational::to_f64(beta).powf(1.0 / (k_f + 1.0))
}

/// Exact decision of `measure >= Psi * n`; `None` when Psi is undefined.
pub fn meets_psi(inputs: &BoundInputs, measure: usize, n: usize) -> Option<bool> {
    let PsiOutcome::Value { penalty, .. } = psi_bound(inputs) else {
        return None;
    };
    if n == 0 {
        return Some(true);
    }
    // m >= (1 - s(2k+1) - c) n  <=>  1 - c - m/n <= (2k+1) sqrt(delta)
    let slack = rational::from_int(1) - penalty
        - rational::from_int(measure as u64) / rational::from_int(n as u64);
    let scale = rational::from_int((2 * inputs.k + 1) as u64);
    Some(rational::le_sqrt(&slack, &(&scale * &scale * &inputs.delta)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateOptions {
    pub exact: bool,
    pub limits: ExactLimits,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self { exact: true, limits: ExactLimits::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    #[serde(rename = "M")]
    pub medium: u64,
    #[serde(rename = "Tk", with = "rational::serde_big")]
    pub t_k: num_bigint::BigUint,
    #[serde(rename = "Tk1", with = "rational::serde_big")]
    pub t_k1: num_bigint::BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observed {
    #[serde(with = "rational::serde_pq")]
    pub delta: Rational,
    #[serde(with = "rational::serde_pq")]
    pub beta: Rational,
    #[serde(with = "rational::serde_pq")]
    pub alpha: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureSummary {
    pub clusters: Vec<Vec<usize>>,
    pub measure: usize,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactSummary {
    pub measure: Option<usize>,
    pub optimal: bool,
    pub clusters: Vec<Vec<usize>>,
    pub valid: bool,
    pub nodes: u64,
    /// Why no exact result was produced (size limit).
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub holds: bool,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub n: usize,
    pub k: usize,
    #[serde(with = "rational::serde_pq")]
    pub r: Rational,
    pub counts: Counts,
    pub observed: Observed,
    pub precondition: bool,
    pub precondition_detail: PreconditionVerdict,
    #[serde(with = "rational::serde_pq_opt")]
    pub lambda: Option<Rational>,
    #[serde(with = "rational::serde_pq_opt")]
    pub alpha_prime: Option<Rational>,
    pub psi: Option<f64>,
    pub psi_vacuous: Option<bool>,
    pub psi_reason: Option<String>,
    pub legacy: f64,
    pub greedy: StructureSummary,
    pub exact: Option<ExactSummary>,
    pub verdicts: Vec<Verdict>,
}

/// Observed parameters, greedy and (optionally) exact structures, and the
/// bound values, with a verdict for every inequality that can be checked.
pub fn build_certificate(
    space: &FiniteSemimetricSpace,
    params: &ScaleParams,
    options: &CertificateOptions,
) -> BoundCertificate {
    let n = space.len();
    let k = params.k;
    let obs: ObservedParams = observed_parameters(space, params);
    let inputs = obs.bound_inputs();
    let pre = precondition_check(&inputs);
    let psi = psi_bound(&inputs);
    let legacy = legacy_bound(&obs.beta, &obs.delta, k);

    let decomp = greedy_decomposition(space, params);
    let greedy = greedy_structure(&decomp, k);
    let greedy_summary = StructureSummary {
        valid: validate_structure(space, &greedy, &params.r).valid,
        clusters: greedy.clusters.clone(),
        measure: greedy.measure,
    };

    let exact = options.exact.then(|| match exact_structure(space, params, &options.limits) {
        Ok(res) => ExactSummary {
            measure: Some(res.structure.measure),
            optimal: res.optimal,
            valid: validate_structure(space, &res.structure, &params.r).valid,
            clusters: res.structure.clusters,
            nodes: res.nodes,
            error: None,
        },
        Err(e) => ExactSummary {
            measure: None,
            optimal: false,
            clusters: Vec::new(),
            valid: false,
            nodes: 0,
            error: Some(e.to_string()),
        },
    });

    let mut verdicts = Vec::new();
    let psi_text = |m: usize| Verdict {
        name: String::new(),
        holds: false,
        lhs: m.to_string(),
        rhs: psi.psi().map(|p| format!("{}", p * n as f64)).unwrap_or_default(),
    };
    if let Some(holds) = meets_psi(&inputs, greedy.measure, n) {
        verdicts.push(Verdict { name: "greedy_measure >= psi * n".into(), holds, ..psi_text(greedy.measure) });
    }
    if let Some(ex) = exact.as_ref().filter(|e| e.optimal) {
        let m = ex.measure.expect("optimal search has a measure");
        if let Some(holds) = meets_psi(&inputs, m, n) {
            verdicts.push(Verdict { name: "exact_measure >= psi * n".into(), holds, ..psi_text(m) });
        }
        verdicts.push(Verdict {
            name: "exact_measure >= greedy_measure".into(),
            holds: m >= greedy.measure,
            lhs: m.to_string(),
            rhs: greedy.measure.to_string(),
        });
        let legacy_rhs = legacy * n as f64;
        verdicts.push(Verdict {
            name: "exact_measure >= legacy * n".into(),
            holds: m as f64 + FLOAT_TOLERANCE * (n.max(1) as f64) >= legacy_rhs,
            lhs: m.to_string(),
            rhs: format!("{legacy_rhs}"),
        });
    }

    let (lambda, alpha_prime, psi_value, psi_vacuous, psi_reason) = match &psi {
        PsiOutcome::Value { psi, lambda, alpha_prime, vacuous, .. } => {
            (Some(lambda.clone()), Some(alpha_prime.clone()), Some(*psi), Some(*vacuous), None)
        }
        PsiOutcome::NotApplicable { reason } => (
            lambda_param(&inputs).ok(),
            self::alpha_prime(&inputs).ok(),
            None,
            None,
            Some(reason.clone()),
        ),
    };

    BoundCertificate {
        n,
        k,
        r: params.r.clone(),
        counts: Counts { medium: obs.medium, t_k: obs.t_k.clone(), t_k1: obs.t_k1.clone() },
        observed: Observed { delta: obs.delta.clone(), beta: obs.beta.clone(), alpha: obs.alpha.clone() },
        precondition: pre.holds,
        precondition_detail: pre,
        lambda,
        alpha_prime,
        psi: psi_value,
        psi_vacuous,
        psi_reason,
        legacy,
        greedy: greedy_summary,
        exact,
        verdicts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{one, s3, tight_k2};
    use crate::rational::{parse, ratio};
    use proptest::prelude::*;

    fn inputs(alpha: &str, beta: &str, delta: &str, k: usize) -> BoundInputs {
        BoundInputs::new(parse(alpha).unwrap(), parse(beta).unwrap(), parse(delta).unwrap(), k).unwrap()
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_param(&inputs("0.5", "1e-4", "1e-4", 2)).unwrap(), parse("0.00015018").unwrap());
        assert_eq!(lambda_param(&inputs("0.3", "0", "0", 3)).unwrap(), ratio(0, 1));
        assert!(matches!(lambda_param(&inputs("0", "0.1", "0", 2)), Err(Error::Undefined(_))));
    }

    #[test]
    fn precondition_examples() {
        assert!(precondition_check(&inputs("0.5", "1e-4", "1e-4", 2)).holds);
        let edge = precondition_check(&BoundInputs::new(ratio(1, 1), ratio(0, 1), ratio(2, 27), 2).unwrap());
        assert!(edge.holds);
        assert_eq!(edge.lhs, Some(edge.rhs.clone()));
        let tight = precondition_check(&BoundInputs::new(ratio(2, 3), ratio(2, 9), ratio(0, 1), 2).unwrap());
        assert!(!tight.holds);
        assert_eq!(tight.lhs, Some(ratio(1, 3)));
        let zero = precondition_check(&inputs("0", "0", "0", 2));
        assert!(!zero.holds);
        assert_eq!(zero.reason.as_deref(), Some("alpha not separated from zero"));
    }

    #[test]
    fn psi_examples() {
        let psi = psi_bound(&inputs("0.5", "1e-4", "1e-4", 2)).psi().unwrap();
        assert!((psi - 0.94840).abs() < 1e-4, "{psi}");
        assert_eq!(psi_bound(&inputs("0.7", "0", "0", 3)).psi(), Some(1.0));
        match psi_bound(&inputs("0.5", "0.01", "0", 1)) {
            PsiOutcome::Value { psi, lambda, alpha_prime, vacuous, .. } => {
                assert_eq!(lambda, parse("0.0008").unwrap());
                assert_eq!(alpha_prime, parse("0.4996").unwrap());
                assert!((psi - 0.93995).abs() < 1e-4, "{psi}");
                assert!(!vacuous);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            psi_bound(&BoundInputs::new(ratio(2, 3), ratio(2, 9), ratio(0, 1), 2).unwrap()),
            PsiOutcome::NotApplicable { .. }
        ));
        // precondition holds but k^3 lambda / 2 swamps alpha
        let swamped = inputs("0.01", "0", "0.016", 4);
        assert!(precondition_check(&swamped).holds);
        assert!(matches!(psi_bound(&swamped), PsiOutcome::NotApplicable { .. }));
    }

    #[test]
    fn legacy_examples() {
        let l = legacy_bound(&parse("1e-4").unwrap(), &parse("1e-4").unwrap(), 2);
        assert!((l - 0.55841).abs() < 1e-3, "{l}");
        assert_eq!(legacy_bound(&ratio(0, 1), &ratio(0, 1), 3), 1.0);
        let l = legacy_bound(&parse("0.01").unwrap(), &ratio(0, 1), 1);
        assert!((l - 0.52817).abs() < 1e-3, "{l}");
    }

    #[test]
    fn meets_psi_is_exact_at_the_boundary() {
        // beta = 0: Psi = 1 - 5 sqrt(delta); delta = 1/100 gives Psi = 1/2.
        let inp = BoundInputs::new(ratio(1, 2), ratio(0, 1), ratio(1, 100), 2).unwrap();
        assert_eq!(meets_psi(&inp, 5, 10), Some(true));
        assert_eq!(meets_psi(&inp, 4, 10), Some(false));
        assert_eq!(meets_psi(&BoundInputs::new(ratio(2, 3), ratio(2, 9), ratio(0, 1), 2).unwrap(), 0, 9), None);
    }

    #[test]
    fn certificates() {
        let p2 = ScaleParams::new(one(), 2).unwrap();
        let c = build_certificate(&s3(), &p2, &CertificateOptions::default());
        assert_eq!(c.observed.delta, ratio(2, 9));
        assert_eq!(c.observed.beta, ratio(0, 1));
        assert!(!c.precondition);
        assert!(c.psi.is_none());
        assert_eq!(c.greedy.measure, 3);
        assert_eq!(c.exact.as_ref().unwrap().measure, Some(3));

        let c = build_certificate(&tight_k2(), &p2, &CertificateOptions::default());
        assert!(!c.precondition);
        assert_eq!(c.counts.medium, 0);
        assert_eq!(c.counts.t_k1, 27u32.into());
        assert_eq!(c.greedy.measure, 6);
        assert_eq!(c.exact.as_ref().unwrap().measure, Some(6));
        assert!(c.verdicts.iter().any(|v| v.name == "exact_measure >= legacy * n"));
        assert!(c.verdicts.iter().all(|v| v.holds));

        let c = build_certificate(&FiniteSemimetricSpace::empty(), &p2, &CertificateOptions::default());
        assert_eq!(c.n, 0);
        assert_eq!(c.counts.medium, 0);
        assert_eq!(c.greedy.measure, 0);

        let small = CertificateOptions { exact: true, limits: ExactLimits { max_points: 3, ..Default::default() } };
        let c = build_certificate(&tight_k2(), &p2, &small);
        assert!(c.exact.unwrap().error.is_some());
    }

    fn grid_value(i: u32) -> Rational {
        [ratio(0, 1), ratio(1, 1_000_000), ratio(1, 100_000), ratio(1, 10_000), ratio(1, 1_000)][i as usize].clone()
    }

    proptest! {
        #[test]
        fn psi_monotone(k in 1usize..5, a in 3i64..11, b in 0u32..4, d in 0u32..4) {
            let base = BoundInputs::new(ratio(a, 10), grid_value(b), grid_value(d), k).unwrap();
            let Some(psi) = psi_bound(&base).psi() else { return Ok(()); };
            let more_beta = BoundInputs { beta: grid_value(b + 1), ..base.clone() };
            if let Some(p) = psi_bound(&more_beta).psi() { prop_assert!(p <= psi); }
            let more_delta = BoundInputs { delta: grid_value(d + 1), ..base.clone() };
            if let Some(p) = psi_bound(&more_delta).psi() { prop_assert!(p <= psi); }
            let more_alpha = BoundInputs { alpha: ratio(a + 1, 10), ..base.clone() };
            if let Some(p) = psi_bound(&more_alpha).psi() { prop_assert!(p >= psi); }
        }
    }
}
