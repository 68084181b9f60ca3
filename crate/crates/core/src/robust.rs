//! Edge failures: static codes that survive a whole set of failure patterns, and the average
//! min-cut under a distribution over patterns.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coding::{self, CodeSolution, ConnectionKind, DecodeCheck};
use crate::error::{Error, Result};
use crate::ff::{Fe, Field, Matrix};
use crate::mincut;
use crate::network::{AdtNetwork, Edge};
use crate::seed;
use crate::transfer::{self, CodingAssignment};

/// Tolerance on the probability sum when some probability is not an exact fraction.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// A set of failed physical edges.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FailurePattern {
    pub edges: BTreeSet<Edge>,
}

impl FailurePattern {
    pub fn new(edges: impl IntoIterator<Item = Edge>) -> Self {
        FailurePattern {
            edges: edges.into_iter().collect(),
        }
    }

    pub fn parse(net: &AdtNetwork, refs: &[String]) -> Result<Self> {
        refs.iter()
            .map(|r| net.parse_edge(r))
            .collect::<Result<BTreeSet<_>>>()
            .map(|edges| FailurePattern { edges })
    }
}

/// Probability value: a fraction `"1/4"`, a decimal string `"0.25"`, or a JSON number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbabilityDoc {
    Text(String),
    Number(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternDoc {
    pub edges: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<ProbabilityDoc>,
}

/// `{"patterns": [{"edges": ["V:out:0->W:in:1"], "p": "1/4"}, ...]}`. Probabilities may be
/// omitted when only the set of patterns matters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureDoc {
    pub patterns: Vec<PatternDoc>,
}

impl FailureDoc {
    pub fn from_json(text: &str) -> Result<FailureDoc> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            col: e.column(),
            msg: e.to_string(),
        })
    }

    pub fn patterns(&self, net: &AdtNetwork) -> Result<Vec<FailurePattern>> {
        self.patterns.iter().map(|p| FailurePattern::parse(net, &p.edges)).collect()
    }
}

/// Parses `"a/b"`, `"a"` or a decimal such as `"0.125"` exactly.
pub fn parse_probability(s: &str) -> Result<BigRational> {
    let bad = || Error::usage(format!("malformed probability {s:?}"));
    let s = s.trim();
    if s.contains('/') {
        let r = BigRational::from_str(s).map_err(|_| bad())?;
        return Ok(r);
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num = BigInt::from_str(if digits == "-" || digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Ok(BigRational::new(num, den))
}

fn probability(p: &ProbabilityDoc) -> Result<(BigRational, bool)> {
    match p {
        ProbabilityDoc::Text(s) => Ok((parse_probability(s)?, true)),
        ProbabilityDoc::Number(x) => BigRational::from_float(*x)
            .map(|r| (r, false))
            .ok_or_else(|| Error::usage(format!("probability {x} is not finite"))),
    }
}

/// Failure patterns with probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ErasureDistribution {
    pub patterns: Vec<(FailurePattern, BigRational)>,
}

impl ErasureDistribution {
    /// Probabilities must be nonnegative and sum to one: exactly when every value is a fraction
    /// or decimal string, within [`PROBABILITY_TOLERANCE`] otherwise.
    pub fn new(patterns: Vec<(FailurePattern, BigRational)>, exact: bool) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::usage("distribution has no patterns"));
        }
        if patterns.iter().any(|(_, p)| p.is_negative()) {
            return Err(Error::usage("negative probability"));
        }
        let sum: BigRational = patterns.iter().map(|(_, p)| p.clone()).sum();
        let ok = if exact {
            sum.is_one()
        } else {
            (sum - BigRational::one()).abs().to_f64().unwrap_or(f64::INFINITY) <= PROBABILITY_TOLERANCE
        };
        if !ok {
            return Err(Error::usage("probabilities do not sum to 1"));
        }
        Ok(ErasureDistribution { patterns })
    }

    pub fn from_doc(net: &AdtNetwork, doc: &FailureDoc) -> Result<Self> {
        let mut exact = true;
        let mut out = Vec::new();
        for pd in &doc.patterns {
            let p = pd
                .p
                .as_ref()
                .ok_or_else(|| Error::usage("every pattern of a distribution needs a probability \"p\""))?;
            let (r, is_exact) = probability(p)?;
            exact &= is_exact;
            out.push((FailurePattern::parse(net, &pd.edges)?, r));
        }
        Self::new(out, exact)
    }
}

/// `net` without the failed edges. Coefficients on those edges become structurally zero.
pub fn apply_failure(net: &AdtNetwork, f: &FailurePattern) -> Result<AdtNetwork> {
    let mut out = net.clone();
    for e in &f.edges {
        if !out.remove_edge(e) {
            return Err(Error::usage(format!("failed edge {} is not in the network", net.edge_ref(e))));
        }
    }
    Ok(out)
}

/// One assignment valid under every pattern of a failure set, with the decoders each
/// destination uses when it knows the current pattern.
#[derive(Clone, Debug)]
pub struct StaticSolution {
    pub field: Field,
    pub assign: CodingAssignment,
    pub decoders: Vec<BTreeMap<usize, Matrix<Fe>>>,
    pub checks: Vec<Vec<DecodeCheck>>,
    /// `q > |F| N`.
    pub bound_satisfied: bool,
    pub attempts: usize,
}

impl StaticSolution {
    /// The code as seen under pattern `i`.
    pub fn under(&self, i: usize) -> CodeSolution {
        CodeSolution {
            field: self.field.clone(),
            assign: self.assign.clone(),
            decoders: self.decoders[i].clone(),
            seed: None,
            attempts: self.attempts,
        }
    }
}

/// Draws one assignment for the unfailed network and accepts it only if every destination decodes
/// under every pattern; each acceptance is re-verified by simulation on the failed network.
pub fn find_static_solution(
    net: &AdtNetwork,
    failures: &[FailurePattern],
    field: &Field,
    seed: u64,
) -> Result<StaticSolution> {
    match coding::classify(net) {
        ConnectionKind::Unicast | ConnectionKind::Multicast => {}
        k => {
            return Err(Error::NotSupported(format!(
                "static erasure codes are only attempted for multicast connections, not {k:?}"
            )))
        }
    }
    net.longest_path_depth()?;
    let nets: Vec<AdtNetwork> = failures.iter().map(|f| apply_failure(net, f)).collect::<Result<_>>()?;
    for (i, g) in nets.iter().enumerate() {
        match coding::check_cut_conditions(g) {
            Ok(()) => {}
            Err(Error::Infeasible(detail)) => return Err(Error::InfeasibleUnderFailure { pattern: i, detail }),
            Err(e) => return Err(e),
        }
    }
    let receivers = coding::demands(net).len() as u64;
    let bound_satisfied = field.order() as u64 > failures.len() as u64 * receivers;
    let mut failing = 0;
    for attempt in 0..coding::RETRY_BUDGET {
        let mut rng = seed::rng(seed, &[attempt as u64]);
        let assign = CodingAssignment::random(net, field, &mut rng);
        let mut decs = Vec::with_capacity(nets.len());
        for (i, g) in nets.iter().enumerate() {
            let sys = transfer::system_matrix(g, &assign, field)?;
            match coding::decoders(g, &sys, field) {
                Ok(d) => decs.push(d),
                Err(_) => {
                    failing = i;
                    break;
                }
            }
        }
        if decs.len() < nets.len() {
            continue;
        }
        let mut sol = StaticSolution {
            field: field.clone(),
            assign,
            decoders: decs,
            checks: Vec::new(),
            bound_satisfied,
            attempts: attempt + 1,
        };
        let checks: Vec<Vec<DecodeCheck>> = nets
            .iter()
            .enumerate()
            .map(|(i, g)| coding::verify_solution(g, &sol.under(i), coding::VERIFY_VECTORS, seed))
            .collect::<Result<_>>()?;
        if checks.iter().flatten().all(|c| c.ok) {
            sol.checks = checks;
            return Ok(sol);
        }
    }
    Err(Error::RandomizationExhausted {
        attempts: coding::RETRY_BUDGET,
        detail: format!("failure pattern {failing} kept a destination from decoding"),
    })
}

/// Average min-cut with the per-pattern values.
#[derive(Clone, Debug, PartialEq)]
pub struct AverageMincut {
    pub value: BigRational,
    pub per_pattern: Vec<usize>,
}

/// `sum_f p_f mincut(G_f, s, t)` with exact min-cuts and exact arithmetic. Patterns are
/// evaluated in parallel and summed in pattern order.
pub fn time_average_mincut(net: &AdtNetwork, s: usize, t: usize, dist: &ErasureDistribution) -> Result<AverageMincut> {
    let cuts: Vec<usize> = dist
        .patterns
        .par_iter()
        .map(|(f, _)| mincut::mincut(&apply_failure(net, f)?, s, t))
        .collect::<Result<_>>()?;
    let mut value = BigRational::zero();
    for ((_, p), &c) in dist.patterns.iter().zip(&cuts) {
        value += p * BigRational::from_integer(BigInt::from(c));
    }
    Ok(AverageMincut {
        value,
        per_pattern: cuts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn pattern(net: &AdtNetwork, refs: &[&str]) -> FailurePattern {
        FailurePattern::parse(net, &refs.iter().map(|s| s.to_string()).collect::<Vec<_>>()).unwrap()
    }

    fn half() -> BigRational {
        BigRational::new(1.into(), 2.into())
    }

    #[test]
    fn apply_failure_cases() {
        let net = fixtures::fig3();
        assert_eq!(apply_failure(&net, &FailurePattern::default()).unwrap(), net);
        let all = FailurePattern::new(net.edges().cloned());
        let g = apply_failure(&net, &all).unwrap();
        assert_eq!(g.num_edges(), 0);
        assert_eq!(mincut::mincut(&g, 0, 3).unwrap(), 0);
        // e1 -> e6 is S:out:0 -> V2:in:1.
        let g = apply_failure(&net, &pattern(&net, &["S:out:0->V2:in:1"])).unwrap();
        assert_eq!(mincut::mincut(&g, 0, 3).unwrap(), 1);
        let missing = FailurePattern::new([Edge { from: (3, 0), to: (0, 0) }]);
        assert!(matches!(apply_failure(&net, &missing), Err(Error::Usage(_))));
    }

    #[test]
    fn probabilities() {
        assert_eq!(parse_probability("1/4").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(parse_probability("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(parse_probability("1").unwrap(), BigRational::one());
        assert!(parse_probability("x").is_err());
        let e = FailurePattern::default();
        assert!(ErasureDistribution::new(vec![(e.clone(), half())], true).is_err());
        assert!(ErasureDistribution::new(vec![(e.clone(), half()), (e, half())], true).is_ok());
    }

    #[test]
    fn diamond_average_and_static() {
        let net = fixtures::diamond();
        let [top, bottom] = fixtures::diamond_failures();
        let f = vec![pattern(&net, &[top]), pattern(&net, &[bottom])];
        let dist = ErasureDistribution::new(vec![(f[0].clone(), half()), (f[1].clone(), half())], true).unwrap();
        let avg = time_average_mincut(&net, 0, 3, &dist).unwrap();
        assert_eq!(avg.value, BigRational::one());
        assert_eq!(avg.per_pattern, vec![1, 1]);
        let field = Field::new(2).unwrap();
        let sol = find_static_solution(&net, &f, &field, 1).unwrap();
        assert!(sol.bound_satisfied);
        assert!(sol.checks.iter().flatten().all(|c| c.ok));
    }

    #[test]
    fn empty_set_and_total_failure() {
        let net = fixtures::fig3();
        let dist = ErasureDistribution::new(vec![(FailurePattern::default(), BigRational::one())], true).unwrap();
        assert_eq!(time_average_mincut(&net, 0, 3, &dist).unwrap().value, BigRational::from_integer(2.into()));
        let all = FailurePattern::new(net.edges().cloned());
        let dist = ErasureDistribution::new(vec![(all.clone(), BigRational::one())], true).unwrap();
        assert!(time_average_mincut(&net, 0, 3, &dist).unwrap().value.is_zero());
        let err = find_static_solution(&net, &[all], &Field::new(4).unwrap(), 0).unwrap_err();
        assert!(matches!(err, Error::InfeasibleUnderFailure { pattern: 0, .. }));
    }

    #[test]
    fn failure_doc_parsing() {
        let net = fixtures::diamond();
        let doc = FailureDoc::from_json(
            r#"{"patterns": [{"edges": ["S:out:0->V1:in:0"], "p": "1/4"}, {"edges": [], "p": 0.75}]}"#,
        )
        .unwrap();
        let d = ErasureDistribution::from_doc(&net, &doc).unwrap();
        assert_eq!(d.patterns.len(), 2);
        assert!(FailureDoc::from_json("{\"patterns\": [{\"edge\": []}]}").is_err());
    }
}
