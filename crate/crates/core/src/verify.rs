//! Checks each proposition and the main theorem on concrete spaces, using
//! the tight observed parameters so every hypothesis holds with equality.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{alpha_prime, lambda_param, precondition_check, psi_bound, PsiOutcome};
use crate::clustering::{
    exact_structure, greedy_decomposition, greedy_structure, max_cluster, ExactLimits, ExactSearch,
    GreedyDecomposition,
};
use crate::error::{Error, Result};
use crate::generators::{planted_instance, tight_instance, uniform_random_instance, PlantedSpec, TightInstanceSpec};
use crate::rational::{self, Rational};
use crate::space::{FiniteSemimetricSpace, ScaleParams};
use crate::stats::{elementary_symmetric, observed_parameters, ObservedParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PropId {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    T1,
}

impl PropId {
    pub const ALL: [PropId; 7] = [PropId::P1, PropId::P2, PropId::P3, PropId::P4, PropId::P5, PropId::P6, PropId::T1];
}

impl fmt::Display for PropId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// One inequality with both sides rendered exactly (`p/q`, or `sqrt(p/q)`
/// for the single irrational side that appears).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub lhs: String,
    pub relation: String,
    pub rhs: String,
    pub holds: bool,
}

impl Clause {
    fn cmp(name: &str, lhs: Rational, relation: &str, rhs: Rational) -> Self {
        let holds = match relation {
            "<=" => lhs <= rhs,
            ">=" => lhs >= rhs,
            "=" => lhs == rhs,
            _ => unreachable!("unknown relation {relation}"),
        };
        Self { name: name.into(), lhs: rational::to_pq(&lhs), relation: relation.into(), rhs: rational::to_pq(&rhs), holds }
    }

    fn le_sqrt(name: &str, lhs: Rational, radicand: Rational) -> Self {
        Self {
            name: name.into(),
            holds: rational::le_sqrt(&lhs, &radicand),
            lhs: rational::to_pq(&lhs),
            relation: "<=".into(),
            rhs: format!("sqrt({})", rational::to_pq(&radicand)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub prop: PropId,
    pub applicable: bool,
    /// Why the check does not apply.
    pub reason: Option<String>,
    pub clauses: Vec<Clause>,
    /// `None` exactly when not applicable.
    pub pass: Option<bool>,
    /// Context for a failing check.
    pub witness: Option<String>,
}

impl CheckResult {
    fn not_applicable(prop: PropId, reason: impl Into<String>) -> Self {
        Self { prop, applicable: false, reason: Some(reason.into()), clauses: Vec::new(), pass: None, witness: None }
    }

    fn evaluated(prop: PropId, clauses: Vec<Clause>, context: impl FnOnce() -> String) -> Self {
        let pass = clauses.iter().all(|c| c.holds);
        Self {
            prop,
            applicable: true,
            reason: None,
            witness: (!pass).then(context),
            clauses,
            pass: Some(pass),
        }
    }
}

/// Everything the checks share for one space and one `(r, k)`.
pub struct Checker<'a> {
    space: &'a FiniteSemimetricSpace,
    params: ScaleParams,
    obs: ObservedParams,
    decomp: GreedyDecomposition,
    exact: std::result::Result<ExactSearch, Error>,
}

impl<'a> Checker<'a> {
    pub fn new(space: &'a FiniteSemimetricSpace, params: &ScaleParams, limits: &ExactLimits) -> Self {
        Self {
            space,
            params: params.clone(),
            obs: observed_parameters(space, params),
            decomp: greedy_decomposition(space, params),
            exact: exact_structure(space, params, limits),
        }
    }

    /// Whether the exact optimum is known.
    pub fn exact_complete(&self) -> bool {
        matches!(&self.exact, Ok(e) if e.optimal)
    }

    fn exact_measure(&self) -> Option<usize> {
        match &self.exact {
            Ok(e) if e.optimal => Some(e.structure.measure),
            _ => None,
        }
    }

    fn n(&self) -> usize {
        self.space.len()
    }

    fn n_q(&self) -> Rational {
        rational::from_int(self.n() as u64)
    }

    fn k(&self) -> usize {
        self.params.k
    }

    fn w_biguint(&self) -> Vec<BigUint> {
        self.decomp.w.iter().map(|&w| BigUint::from(w)).collect()
    }

    pub fn check(&self, prop: PropId) -> CheckResult {
        match prop {
            PropId::P1 => self.tight_witness(),
            PropId::P2 => self.medium_edges_around_max_cluster(),
            PropId::P3 => self.unbalanced_parts(),
            PropId::P4 => self.anticliques_from_parts(),
            PropId::P5 => self.k_anticlique_upper(),
            PropId::P6 => self.top_k_weight(),
            PropId::T1 => self.theorem(),
        }
    }

    /// Blocks of the tight construction: zero medium edges, the closed-form
    /// `(k+1)`-anticlique count and a measure gap of exactly one block.
    fn tight_witness(&self) -> CheckResult {
        let Some((m0, m)) = tight_blocks(self.space, &self.params.r, self.k()) else {
            return CheckResult::not_applicable(PropId::P1, "not a tight block instance for this (r, k)");
        };
        let k = self.k();
        let n = self.n_q();
        let lam = rational::from_int(m as u64) / &n;
        let t_k1 = rational::from_biguint(&self.obs.t_k1);
        let closed_form = rational::pow(&n, k + 1) * (Rational::one() - rational::from_int(k as u64) * &lam)
            * rational::pow(&lam, k);
        let beta = rational::pow(&(rational::from_int((k + 1) as u64) * &lam), k);
        let cap = &beta * rational::pow(&n, k + 1) / rational::from_biguint(&rational::factorial(k + 1));
        let mut clauses = vec![
            Clause::cmp("M(X) = 0", rational::from_int(self.obs.medium), "=", Rational::zero()),
            Clause::cmp("T_{k+1} = n^{k+1} (1 - k lam) lam^k", t_k1.clone(), "=", closed_form),
            Clause::cmp("T_{k+1} <= beta n^{k+1} / (k+1)!, beta = ((k+1) lam)^k", t_k1, "<=", cap),
        ];
        if let Some(opt) = self.exact_measure() {
            clauses.push(Clause::cmp(
                "n - mu(X*) = lam n",
                rational::from_int((self.n() - opt) as u64),
                "=",
                &lam * &n,
            ));
        }
        CheckResult::evaluated(PropId::P1, clauses, || format!("blocks m0 = {m0}, m = {m}"))
    }

    fn medium_edges_around_max_cluster(&self) -> CheckResult {
        let n = self.n();
        let r = &self.params.r;
        if n == 0 {
            return CheckResult::not_applicable(PropId::P2, "empty space");
        }
        if self.space.diameter() > r * rational::from_int(3) {
            return CheckResult::not_applicable(PropId::P2, "diameter exceeds 3r");
        }
        let all: Vec<usize> = (0..n).collect();
        let b = max_cluster(self.space, &all, &(r * rational::from_int(2)));
        let rhs = rational::from_int(n.max(2 * b.len()) as u64) * rational::from_int((n - b.len()) as u64)
            / rational::from_int(2);
        let clauses = vec![Clause::cmp(
            "M(A) >= max{|A|, 2|B|} |A \\ B| / 2",
            rational::from_int(self.obs.medium),
            ">=",
            rhs,
        )];
        CheckResult::evaluated(PropId::P2, clauses, || format!("B = {b:?}"))
    }

    fn unbalanced_parts(&self) -> CheckResult {
        if !self.obs.alpha.is_positive() {
            return CheckResult::not_applicable(PropId::P3, "alpha = 0");
        }
        let lhs: usize = self.decomp.i1.iter().map(|&i| self.decomp.parts[i].z.len()).sum();
        let k1 = rational::from_int((self.k() + 1) as u64);
        let rhs = k1 * &self.obs.beta / &self.obs.alpha * self.n_q();
        let clauses = vec![Clause::cmp(
            "sum_{i in I1} |Z_i| <= (k+1) beta n / alpha",
            rational::from_int(lhs as u64),
            "<=",
            rhs,
        )];
        CheckResult::evaluated(PropId::P3, clauses, || format!("I1 = {:?}", self.decomp.i1))
    }

    fn anticliques_from_parts(&self) -> CheckResult {
        let k = self.k();
        let e = elementary_symmetric(&self.w_biguint(), k + 1);
        let clauses = vec![Clause::cmp(
            "T_{k+1} >= e_{k+1}(W) / (k+1)!",
            rational::from_biguint(&self.obs.t_k1),
            ">=",
            rational::from_biguint(&e) / rational::from_biguint(&rational::factorial(k + 1)),
        )];
        CheckResult::evaluated(PropId::P4, clauses, || format!("W = {:?}", self.decomp.w))
    }

    /// Shared gate for the checks that need the precondition.
    fn gated(&self, prop: PropId, need_alpha_prime: bool) -> std::result::Result<(Rational, Rational), CheckResult> {
        let inputs = self.obs.bound_inputs();
        if !inputs.alpha.is_positive() {
            return Err(CheckResult::not_applicable(prop, "alpha = 0"));
        }
        let pre = precondition_check(&inputs);
        if !pre.holds {
            return Err(CheckResult::not_applicable(prop, pre.reason.unwrap_or_default()));
        }
        let lambda = lambda_param(&inputs).expect("alpha > 0");
        let ap = alpha_prime(&inputs).expect("alpha > 0");
        if need_alpha_prime && !ap.is_positive() {
            return Err(CheckResult::not_applicable(prop, "alpha' <= 0"));
        }
        Ok((lambda, ap))
    }

    fn k_anticlique_upper(&self) -> CheckResult {
        let (lambda, ap) = match self.gated(PropId::P5, false) {
            Ok(v) => v,
            Err(na) => return na,
        };
        let k = self.k();
        let n_k = rational::pow(&self.n_q(), k);
        let e_k = rational::from_biguint(&elementary_symmetric(&self.w_biguint(), k));
        // No pair fits into a 1-tuple, so for k = 1 the edge term is empty.
        let correction = if k >= 2 {
            rational::from_int(k as u64) * &lambda * &n_k
                / (rational::from_int(2) * rational::from_biguint(&rational::factorial(k - 2)))
        } else {
            Rational::zero()
        };
        let clauses = vec![
            Clause::cmp(
                "T_k <= e_k(W) + k lam n^k / (2 (k-2)!)",
                rational::from_biguint(&self.obs.t_k),
                "<=",
                &e_k + correction,
            ),
            Clause::cmp(
                "e_k(W) >= alpha' n^k / k!",
                e_k,
                ">=",
                ap * n_k / rational::from_biguint(&rational::factorial(k)),
            ),
        ];
        CheckResult::evaluated(PropId::P5, clauses, || format!("W = {:?}, lambda = {}", self.decomp.w, lambda))
    }

    fn top_k_weight(&self) -> CheckResult {
        let ap = match self.gated(PropId::P6, true) {
            Ok((_, ap)) => ap,
            Err(na) => return na,
        };
        let k = self.k();
        let rhs = (Rational::one()
            - rational::from_biguint(&rational::factorial(k + 1)) * &self.obs.beta / &ap)
            * self.n_q();
        let clauses = vec![Clause::cmp(
            "sum_{i<=k} W_i >= (1 - (k+1)! beta / alpha') n",
            rational::from_int(self.decomp.top_k_weight() as u64),
            ">=",
            rhs,
        )];
        CheckResult::evaluated(PropId::P6, clauses, || format!("W = {:?}, alpha' = {}", self.decomp.w, ap))
    }

    /// `mu >= Psi n` is rearranged to `1 - c - mu/n <= (2k+1) sqrt(delta)`
    /// with `c = k!(k+2) beta / alpha'`, and decided by squaring.
    fn theorem(&self) -> CheckResult {
        if let Err(na) = self.gated(PropId::T1, true) {
            return na;
        }
        let inputs = self.obs.bound_inputs();
        let PsiOutcome::Value { penalty, psi, .. } = psi_bound(&inputs) else {
            return CheckResult::not_applicable(PropId::T1, "Psi undefined");
        };
        let k = self.k();
        let scale = rational::from_int((2 * k + 1) as u64);
        let radicand = &scale * &scale * &self.obs.delta;
        let slack = |m: usize| Rational::one() - &penalty - rational::from_int(m as u64) / self.n_q();
        let greedy = greedy_structure(&self.decomp, k).measure;
        let mut clauses = vec![Clause::le_sqrt(
            "greedy I0 measure >= Psi n  [1 - c - m/n <= (2k+1) sqrt(delta)]",
            slack(greedy),
            radicand.clone(),
        )];
        if let Some(opt) = self.exact_measure() {
            clauses.push(Clause::le_sqrt(
                "mu(X*) >= Psi n  [1 - c - m/n <= (2k+1) sqrt(delta)]",
                slack(opt),
                radicand,
            ));
        }
        CheckResult::evaluated(PropId::T1, clauses, || {
            format!("Psi = {psi}, greedy = {greedy}, exact = {:?}", self.exact_measure())
        })
    }
}

pub fn check_proposition(space: &FiniteSemimetricSpace, params: &ScaleParams, prop: PropId) -> CheckResult {
    Checker::new(space, params, &ExactLimits::default()).check(prop)
}

/// Recognises the tight block construction: off-diagonal distances are `r`
/// inside blocks and `4r` across, with `k+1` blocks of which `k` have the
/// common size `m` and one has `m0 >= m` points. Returns `(m0, m)`.
pub fn tight_blocks(space: &FiniteSemimetricSpace, r: &Rational, k: usize) -> Option<(usize, usize)> {
    let n = space.len();
    let far = r * rational::from_int(4);
    let mut block = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for i in 0..n {
        if block[i] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        for j in i..n {
            if j == i || space.dist(i, j) == r {
                if block[j] != usize::MAX {
                    return None;
                }
                block[j] = id;
                size += 1;
            }
        }
        sizes.push(size);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let expected = if block[i] == block[j] { r } else { &far };
            if space.dist(i, j) != expected {
                return None;
            }
        }
    }
    if sizes.len() != k + 1 {
        return None;
    }
    sizes.sort_unstable();
    let m = sizes[0];
    if sizes[..k].iter().all(|&s| s == m) {
        Some((sizes[k], m))
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorMix {
    pub planted: u32,
    pub tight: u32,
    pub uniform: u32,
}

impl Default for GeneratorMix {
    fn default() -> Self {
        Self { planted: 2, tight: 1, uniform: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub max_n: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub mix: GeneratorMix,
    pub limits: ExactLimits,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 42, trials: 200, max_n: 10, k_min: 1, k_max: 3, mix: GeneratorMix::default(), limits: ExactLimits::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub applicable: usize,
    pub not_applicable: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub trial: usize,
    pub generator: String,
    #[serde(with = "rational::serde_pq")]
    pub r: Rational,
    pub k: usize,
    pub result: CheckResult,
    /// The instance in the space text format.
    pub space: String,
}

impl FailureRecord {
    /// Re-parses the stored instance and re-runs the check.
    pub fn replay(&self, limits: &ExactLimits) -> Result<CheckResult> {
        let space = FiniteSemimetricSpace::parse_text(&self.space)?;
        let params = ScaleParams::new(self.r.clone(), self.k)?;
        Ok(Checker::new(&space, &params, limits).check(self.result.prop))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub config: SuiteConfig,
    pub tallies: BTreeMap<PropId, Tally>,
    pub generators: BTreeMap<String, usize>,
    /// Trials whose exact search did not finish; their exact-measure clauses
    /// are skipped.
    pub exact_incomplete: usize,
    pub failures: Vec<FailureRecord>,
}

impl VerificationReport {
    pub fn failed(&self) -> usize {
        self.failures.len()
    }
}

/// One generated trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    pub generator: &'static str,
    pub params: ScaleParams,
    pub space: FiniteSemimetricSpace,
}

/// The instance for trial `index`; depends only on the config seed and the index.
pub fn generate_trial(config: &SuiteConfig, index: usize) -> Result<Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let r = Rational::one();
    let k = rng.random_range(config.k_min..=config.k_max);
    let mix = config.mix;
    let total = mix.planted + mix.tight + mix.uniform;
    if total == 0 {
        return Err(Error::InvalidParam("generator mix is all zero".into()));
    }
    let mut pick = rng.random_range(0..total);
    let tight_fits = config.max_n > k;
    let kind = if pick < mix.planted {
        "planted"
    } else {
        pick -= mix.planted;
        if pick < mix.tight && tight_fits {
            "tight"
        } else if pick < mix.tight {
            "planted"
        } else {
            "uniform"
        }
    };
    let space = match kind {
        "tight" => {
            let m = rng.random_range(1..=config.max_n / (k + 1));
            let m0 = rng.random_range(m..=config.max_n - k * m);
            tight_instance(&TightInstanceSpec { k, m, m0, r: r.clone() })?
        }
        "planted" => {
            let blocks = rng.random_range(1..=(k + 1).min(config.max_n.max(1)));
            let per_block = (config.max_n / blocks).max(1);
            let block_sizes = (0..blocks).map(|_| rng.random_range(1..=per_block)).collect();
            let noise = [rational::ratio(0, 1), rational::ratio(1, 20), rational::ratio(1, 10), rational::ratio(1, 5)]
                [rng.random_range(0..4)]
            .clone();
            // The checked inequalities rely on the triangle inequality.
            planted_instance(&PlantedSpec { block_sizes, noise, r: r.clone(), seed: rng.random() })?.metric_closure()
        }
        _ => {
            let n = rng.random_range(2.min(config.max_n)..=config.max_n);
            uniform_random_instance(n, &r, rng.random())?
        }
    };
    Ok(Trial { generator: kind, params: ScaleParams::new(r, k)?, space })
}

/// Generates `trials` instances and runs every check on each.
pub fn run_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    if config.max_n > config.limits.max_points {
        return Err(Error::InvalidParam(format!(
            "max_n = {} exceeds the exact-search limit {}",
            config.max_n, config.limits.max_points
        )));
    }
    if config.k_min == 0 || config.k_min > config.k_max {
        return Err(Error::InvalidParam("need 1 <= k_min <= k_max".into()));
    }
    let mut report = VerificationReport {
        config: config.clone(),
        tallies: PropId::ALL.iter().map(|&p| (p, Tally::default())).collect(),
        generators: BTreeMap::new(),
        exact_incomplete: 0,
        failures: Vec::new(),
    };
    for index in 0..config.trials {
        let trial = generate_trial(config, index)?;
        *report.generators.entry(trial.generator.to_string()).or_default() += 1;
        let checker = Checker::new(&trial.space, &trial.params, &config.limits);
        if !checker.exact_complete() {
            report.exact_incomplete += 1;
        }
        for prop in PropId::ALL {
            let result = checker.check(prop);
            let tally = report.tallies.get_mut(&prop).expect("all props tallied");
            match result.pass {
                None => tally.not_applicable += 1,
                Some(pass) => {
                    tally.applicable += 1;
                    if pass {
                        tally.passed += 1;
                    } else {
                        tally.failed += 1;
                        report.failures.push(FailureRecord {
                            trial: index,
                            generator: trial.generator.to_string(),
                            r: trial.params.r.clone(),
                            k: trial.params.k,
                            result,
                            space: trial.space.to_text(),
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}
