//! The two conventional multi-objective baselines, scalarisation and Pareto
//! optimisation, together with small demonstrations of where each loses
//! information the ensemble keeps.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::ensemble::{classification_matrix, jury_classify, ClassificationTrace};
use crate::error::{Error, Result};
use crate::model::{
    canonical_instance, ChoiceProblem, Objective, OptionPoint, Relation, SimplexWeights, UtilityForm,
};

/// A single predetermined scalar reward over the objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarisedModel {
    pub weights: SimplexWeights,
    pub form: UtilityForm,
}

impl ScalarisedModel {
    pub fn new(weights: Vec<f64>, form: UtilityForm) -> Result<Self> {
        Ok(Self {
            weights: SimplexWeights::new(weights)?,
            form,
        })
    }

    pub fn linear(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights, UtilityForm::Linear)
    }

    pub fn dim(&self) -> usize {
        self.weights.dim()
    }

    pub fn value(&self, option: &OptionPoint) -> Result<f64> {
        if option.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                item: format!("option `{}` for scalarised model", option.name),
                expected: self.dim(),
                found: option.dim(),
            });
        }
        if self.form == UtilityForm::CobbDouglas && option.scores.iter().any(|s| *s <= 0.0) {
            return Err(Error::NonPositiveScoreForLogForm {
                juror: "scalarised".into(),
                option: option.name.clone(),
            });
        }
        Ok(self.form.eval(self.weights.as_slice(), &option.scores))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TieGroup {
    pub value: f64,
    pub members: Vec<String>,
}

/// Options sorted by descending scalar value, exact ties grouped.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub groups: Vec<TieGroup>,
}

impl Ranking {
    fn position(&self, name: &str) -> Option<usize> {
        self.groups
            .iter()
            .position(|g| g.members.iter().any(|m| m == name))
    }

    /// The complete relation a ranking induces. Never incommensurable.
    pub fn relation(&self, a: &str, b: &str) -> Option<Relation> {
        let (pa, pb) = (self.position(a)?, self.position(b)?);
        Some(match pa.cmp(&pb) {
            Ordering::Less => Relation::PreferredFirst,
            Ordering::Greater => Relation::PreferredSecond,
            Ordering::Equal => Relation::Equal,
        })
    }

    pub fn top(&self) -> &TieGroup {
        &self.groups[0]
    }
}

pub fn scalarised_rank(model: &ScalarisedModel, problem: &ChoiceProblem) -> Result<Ranking> {
    let mut scored = problem
        .options
        .iter()
        .map(|o| Ok((model.value(o)?, o.name.clone())))
        .collect::<Result<Vec<_>>>()?;
    // stable: tied options keep problem order
    scored.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut groups: Vec<TieGroup> = Vec::new();
    for (value, name) in scored {
        match groups.last_mut() {
            Some(g) if g.value == value => g.members.push(name),
            _ => groups.push(TieGroup {
                value,
                members: vec![name],
            }),
        }
    }
    Ok(Ranking { groups })
}

/// Strict Pareto dominance: `a` at least as good everywhere, strictly
/// better somewhere.
pub fn dominates(a: &OptionPoint, b: &OptionPoint) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            item: format!("option `{}` against `{}`", b.name, a.name),
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let mut strictly = false;
    for (x, y) in a.scores.iter().zip(&b.scores) {
        if x < y {
            return Ok(false);
        }
        if x > y {
            strictly = true;
        }
    }
    Ok(strictly)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoResult {
    /// Non-dominated options, in problem order.
    pub front: Vec<String>,
    /// Dominated option name to the first dominator found in problem order.
    pub dominated: BTreeMap<String, String>,
}

impl ParetoResult {
    pub fn on_front(&self, name: &str) -> bool {
        self.front.iter().any(|n| n == name)
    }
}

/// Reference O(n^2 d) sweep.
pub fn pareto_front(problem: &ChoiceProblem) -> ParetoResult {
    let mut front = Vec::new();
    let mut dominated = BTreeMap::new();
    for b in &problem.options {
        let witness = problem
            .options
            .iter()
            .find(|a| dominates(a, b).expect("validated problem has uniform dimension"));
        match witness {
            Some(a) => {
                dominated.insert(b.name.clone(), a.name.clone());
            }
            None => front.push(b.name.clone()),
        }
    }
    ParetoResult { front, dominated }
}

/// What Pareto optimisation can say about one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParetoVerdict {
    FirstDominates,
    SecondDominates,
    /// Neither dominates. Covers both trade-offs and identical options.
    MutuallyNonDominated,
}

pub fn pareto_verdict(a: &OptionPoint, b: &OptionPoint) -> Result<ParetoVerdict> {
    Ok(if dominates(a, b)? {
        ParetoVerdict::FirstDominates
    } else if dominates(b, a)? {
        ParetoVerdict::SecondDominates
    } else {
        ParetoVerdict::MutuallyNonDominated
    })
}

pub fn holocaust_cake_instance() -> ChoiceProblem {
    ChoiceProblem::new(
        vec![Objective::new("harm_averted"), Objective::new("pleasure")],
        vec![
            OptionPoint::new("H", vec![1e6, 0.0]),
            OptionPoint::new("C", vec![0.0, 1.0]),
        ],
    )
    .expect("valid instance")
}

/// Pareto treats a lopsided pair as a genuine trade-off.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeDemo {
    pub problem: ChoiceProblem,
    pub pareto: ParetoResult,
    pub ensemble: ClassificationTrace,
    /// Both options sit on the front while the ensemble has a clear winner.
    pub disagreement: bool,
}

pub fn failure_demo_magnitude() -> MagnitudeDemo {
    let problem = holocaust_cake_instance();
    let (_, jury) = canonical_instance();
    let pareto = pareto_front(&problem);
    let ensemble = jury_classify(&jury, &problem.options[0], &problem.options[1])
        .expect("canonical jury fits the instance");
    let disagreement =
        pareto.on_front("H") && pareto.on_front("C") && ensemble.relation == Relation::PreferredFirst;
    MagnitudeDemo {
        problem,
        pareto,
        ensemble,
        disagreement,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairObservation {
    pub problem: ChoiceProblem,
    pub pareto: ParetoResult,
    pub verdict: ParetoVerdict,
    pub ensemble: ClassificationTrace,
}

impl PairObservation {
    fn new(problem: ChoiceProblem) -> Self {
        let (_, jury) = canonical_instance();
        let (a, b) = (&problem.options[0], &problem.options[1]);
        let verdict = pareto_verdict(a, b).expect("uniform dimension");
        let ensemble = jury_classify(&jury, a, b).expect("canonical jury fits");
        let pareto = pareto_front(&problem);
        Self {
            problem,
            pareto,
            verdict,
            ensemble,
        }
    }

    /// Everything Pareto optimisation reports about the pair.
    fn pareto_signature(&self) -> (ParetoVerdict, bool, bool) {
        (
            self.verdict,
            self.pareto.on_front(&self.problem.options[0].name),
            self.pareto.on_front(&self.problem.options[1].name),
        )
    }
}

/// Pareto output for an equal pair and an incommensurable pair coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityDemo {
    pub identical: PairObservation,
    pub hard: PairObservation,
    pub indistinguishable: bool,
}

pub fn failure_demo_equality() -> EqualityDemo {
    let identical = PairObservation::new(
        ChoiceProblem::new(
            vec![Objective::new("income"), Objective::new("excitement")],
            vec![
                OptionPoint::new("X", vec![7.0, 5.0]),
                OptionPoint::new("X'", vec![7.0, 5.0]),
            ],
        )
        .expect("valid instance"),
    );
    let (canon, _) = canonical_instance();
    let hard = PairObservation::new(canon.restrict(&["A", "B"]).expect("A and B exist"));
    let indistinguishable = identical.pareto_signature() == hard.pareto_signature();
    EqualityDemo {
        identical,
        hard,
        indistinguishable,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarisationSearch {
    /// Lexicographically smallest weight whose complete ranking reproduces
    /// the jury's matrix.
    Witnessed(Vec<f64>),
    /// No grid weight matched; carries the number of weights tried.
    Impossible(usize),
}

/// Grid search over the 1-simplex for a single linear scalarisation that
/// reproduces the jury's four-way matrix.
///
/// Incommensurable entries can never be matched: a complete relation must
/// call the pair preferred or tied. Ties use the jury's largest epsilon.
pub fn scalarisation_impossibility(
    problem: &ChoiceProblem,
    jury: &crate::model::Jury,
    grid_resolution: usize,
) -> Result<ScalarisationSearch> {
    if problem.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            expected: 2,
            found: problem.dim(),
        });
    }
    if grid_resolution == 0 {
        return Err(Error::InvalidTolerance {
            name: "grid_resolution",
            reason: "must be positive".into(),
        });
    }
    let matrix = classification_matrix(jury, problem)?;
    let pairs: Vec<_> = matrix.upper_pairs().collect();
    let tol = jury.max_epsilon();
    for step in 0..grid_resolution {
        let w1 = if grid_resolution == 1 {
            0.5
        } else {
            step as f64 / (grid_resolution - 1) as f64
        };
        let weights = [w1, 1.0 - w1];
        let reproduces = pairs.iter().all(|&(i, j, relation)| {
            let a = &problem.options[i].scores;
            let b = &problem.options[j].scores;
            let diff = UtilityForm::Linear.eval(&weights, a) - UtilityForm::Linear.eval(&weights, b);
            match relation {
                Relation::Incommensurable => false,
                Relation::PreferredFirst => diff > tol,
                Relation::PreferredSecond => diff < -tol,
                Relation::Equal => diff.abs() <= tol,
            }
        });
        if reproduces {
            return Ok(ScalarisationSearch::Witnessed(weights.to_vec()));
        }
    }
    Ok(ScalarisationSearch::Impossible(grid_resolution))
}
