//! Scenario bundles, the synthetic corpus generator, method-comparison
//! reports and indifference-curve plots.

pub mod format;
pub mod generator;
pub mod plot;
pub mod report;

use std::collections::BTreeMap;

use crate::baselines::ScalarisedModel;
use crate::error::{Error, Result};
use crate::model::{canonical_instance, ChoiceProblem, Jury, Relation, Tolerances};
use crate::oracle::brute_force_relation;

/// Everything one harness run needs: the problem, the jury judging it,
/// tolerances, the context tag fed to the likelihood gate, and optional
/// ground truth and reference model.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub problem: ChoiceProblem,
    pub jury: Jury,
    pub tolerances: Tolerances,
    pub context_tag: String,
    /// Keyed by ordered option-name pair.
    pub ground_truth: Option<BTreeMap<(String, String), Relation>>,
    pub reference_model: Option<ScalarisedModel>,
}

impl Scenario {
    pub fn new(
        problem: ChoiceProblem,
        jury: Jury,
        tolerances: Tolerances,
        context_tag: String,
        ground_truth: Option<BTreeMap<(String, String), Relation>>,
        reference_model: Option<ScalarisedModel>,
    ) -> Result<Self> {
        let problem = crate::model::validate_problem(problem)?;
        jury.check_against(&problem)?;
        if context_tag.is_empty() || context_tag.chars().any(char::is_whitespace) {
            return Err(Error::Semantic(format!("invalid context tag `{context_tag}`")));
        }
        if let Some(gt) = &ground_truth {
            for (a, b) in gt.keys() {
                if a == b || problem.option_index(a).is_none() || problem.option_index(b).is_none() {
                    return Err(Error::Semantic(format!("invalid ground-truth pair ({a}, {b})")));
                }
            }
        }
        if let Some(m) = &reference_model {
            if m.dim() != problem.dim() {
                return Err(Error::DimensionMismatch {
                    item: "reference model".into(),
                    expected: problem.dim(),
                    found: m.dim(),
                });
            }
        }
        Ok(Self {
            problem,
            jury,
            tolerances,
            context_tag,
            ground_truth,
            reference_model,
        })
    }
}

/// Ground truth for every unordered pair (problem order), labelled by the
/// brute-force oracle.
pub fn oracle_ground_truth(problem: &ChoiceProblem, jury: &Jury) -> BTreeMap<(String, String), Relation> {
    let mut map = BTreeMap::new();
    let opts = &problem.options;
    for i in 0..opts.len() {
        for j in i + 1..opts.len() {
            map.insert(
                (opts[i].name.clone(), opts[j].name.clone()),
                brute_force_relation(jury, &opts[i], &opts[j]),
            );
        }
    }
    map
}

/// The canonical instance as a full scenario: career context, equal-weight
/// reference model, tau 0.5, delta 0.01, oracle ground truth.
pub fn canonical_scenario() -> Scenario {
    let (problem, jury) = canonical_instance();
    let ground_truth = oracle_ground_truth(&problem, &jury);
    Scenario::new(
        problem,
        jury,
        Tolerances::new(crate::model::DEFAULT_EPSILON, Some(0.5), 0.01).expect("valid"),
        "career".into(),
        Some(ground_truth),
        Some(ScalarisedModel::linear(vec![0.5, 0.5]).expect("valid")),
    )
    .expect("canonical scenario is valid")
}
