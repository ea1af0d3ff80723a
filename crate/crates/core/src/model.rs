//! Domain types: objectives, options, utility models ("jurors"), juries and
//! the four-way relation between two options.
//!
//! Every objective is maximised. Cost-like criteria are expected to be
//! negated by whoever authors the problem.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Maximum allowed deviation of a weight vector's sum from 1.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Indifference tolerance used when nothing else is specified. Small enough
/// to behave as exact-tie semantics on desk-scale numbers.
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub name: String,
}

impl Objective {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionPoint {
    pub name: String,
    pub scores: Vec<f64>,
}

impl OptionPoint {
    pub fn new(name: impl Into<String>, scores: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            scores,
        }
    }

    pub fn dim(&self) -> usize {
        self.scores.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceProblem {
    pub objectives: Vec<Objective>,
    pub options: Vec<OptionPoint>,
}

impl ChoiceProblem {
    /// Builds and validates a problem in one step.
    pub fn new(objectives: Vec<Objective>, options: Vec<OptionPoint>) -> Result<Self> {
        validate_problem(Self { objectives, options })
    }

    pub fn dim(&self) -> usize {
        self.objectives.len()
    }

    pub fn option(&self, name: &str) -> Result<&OptionPoint> {
        self.options
            .iter()
            .find(|o| o.name == name)
            .ok_or_else(|| Error::UnknownOption(name.to_string()))
    }

    pub fn option_index(&self, name: &str) -> Option<usize> {
        self.options.iter().position(|o| o.name == name)
    }

    /// Per-objective score range (max - min) across all options.
    pub fn score_ranges(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|k| {
                let (lo, hi) = self
                    .options
                    .iter()
                    .map(|o| o.scores[k])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                        (lo.min(s), hi.max(s))
                    });
                hi - lo
            })
            .collect()
    }

    /// A sub-problem holding only the named options, in the given order.
    pub fn restrict(&self, names: &[&str]) -> Result<ChoiceProblem> {
        let options = names
            .iter()
            .map(|n| self.option(n).cloned())
            .collect::<Result<Vec<_>>>()?;
        ChoiceProblem::new(self.objectives.clone(), options)
    }
}

/// Checks every problem invariant and hands the problem back untouched.
pub fn validate_problem(problem: ChoiceProblem) -> Result<ChoiceProblem> {
    if problem.objectives.is_empty() {
        return Err(Error::NoObjectives);
    }
    check_unique_names("objective", problem.objectives.iter().map(|o| o.name.as_str()))?;
    if problem.options.len() < 2 {
        return Err(Error::TooFewOptions(problem.options.len()));
    }
    check_unique_names("option", problem.options.iter().map(|o| o.name.as_str()))?;
    let d = problem.objectives.len();
    for option in &problem.options {
        if option.scores.len() != d {
            return Err(Error::DimensionMismatch {
                item: format!("option `{}`", option.name),
                expected: d,
                found: option.scores.len(),
            });
        }
        if let Some(k) = option.scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFiniteScore {
                option: option.name.clone(),
                objective: problem.objectives[k].name.clone(),
            });
        }
    }
    Ok(problem)
}

fn check_unique_names<'a>(kind: &'static str, names: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for name in names {
        if name.is_empty() {
            return Err(Error::EmptyName { kind });
        }
        if !seen.insert(name) {
            return Err(Error::DuplicateName {
                kind,
                name: name.to_string(),
            });
        }
    }
    Ok(())
}

/// A point on the probability simplex: nonnegative entries summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    /// Accepts weights that already lie on the simplex (sum within 1e-9).
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::check(&weights, "weights")?;
        Ok(Self(weights))
    }

    /// Rescales arbitrary nonnegative weights onto the simplex.
    pub fn normalized(raw: Vec<f64>) -> Result<Self> {
        if raw.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights {
                owner: "weights".into(),
                reason: "negative or non-finite weight".into(),
            });
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidWeights {
                owner: "weights".into(),
                reason: "weights sum to zero".into(),
            });
        }
        Self::new(raw.into_iter().map(|w| w / total).collect())
    }

    fn check(weights: &[f64], owner: &str) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidWeights {
            owner: owner.to_string(),
            reason: reason.to_string(),
        };
        if weights.is_empty() {
            return Err(invalid("empty weight vector"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("non-finite weight"));
        }
        if weights.iter().any(|w| *w < 0.0) {
            return Err(invalid("negative weight"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(invalid(&format!("weights sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Smallest strictly positive entry.
    pub fn min_positive(&self) -> Option<f64> {
        self.0
            .iter()
            .copied()
            .filter(|w| *w > 0.0)
            .fold(None, |acc, w| Some(acc.map_or(w, |a: f64| a.min(w))))
    }
}

/// Shape of a utility function's indifference curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UtilityForm {
    /// Weighted sum; straight indifference curves.
    Linear,
    /// Weighted product of powers; convex indifference curves. Needs
    /// strictly positive scores.
    CobbDouglas,
}

impl UtilityForm {
    pub fn as_str(self) -> &'static str {
        match self {
            UtilityForm::Linear => "linear",
            UtilityForm::CobbDouglas => "cobb_douglas",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "linear" => Some(UtilityForm::Linear),
            "cobb_douglas" => Some(UtilityForm::CobbDouglas),
            _ => None,
        }
    }

    /// Raw evaluation. Callers check dimensions and positivity.
    pub(crate) fn eval(self, weights: &[f64], scores: &[f64]) -> f64 {
        match self {
            UtilityForm::Linear => weights.iter().zip(scores).map(|(w, s)| w * s).sum(),
            UtilityForm::CobbDouglas => weights.iter().zip(scores).map(|(w, s)| s.powf(*w)).product(),
        }
    }
}

impl fmt::Display for UtilityForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One permissible ordering of the options, expressed as a scalarised
/// utility model with its own indifference tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Juror {
    pub id: String,
    pub weights: SimplexWeights,
    pub form: UtilityForm,
    pub epsilon: f64,
}

impl Juror {
    pub fn new(id: impl Into<String>, weights: Vec<f64>, form: UtilityForm, epsilon: f64) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::EmptyName { kind: "juror" });
        }
        let weights = SimplexWeights::new(weights).map_err(|e| match e {
            Error::InvalidWeights { reason, .. } => Error::InvalidWeights {
                owner: id.clone(),
                reason,
            },
            other => other,
        })?;
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::InvalidTolerance {
                name: "epsilon",
                reason: format!("juror `{id}` has epsilon {epsilon}"),
            });
        }
        Ok(Self {
            id,
            weights,
            form,
            epsilon,
        })
    }

    pub fn linear(id: impl Into<String>, weights: Vec<f64>, epsilon: f64) -> Result<Self> {
        Self::new(id, weights, UtilityForm::Linear, epsilon)
    }

    pub fn dim(&self) -> usize {
        self.weights.dim()
    }

    /// Copy of this juror with replaced weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.id.clone(), weights, self.form, self.epsilon)
    }
}

/// The agent's ensemble of permissible orderings.
#[derive(Debug, Clone, PartialEq)]
pub struct Jury {
    jurors: Vec<Juror>,
}

impl Jury {
    pub fn new(jurors: Vec<Juror>) -> Result<Self> {
        if jurors.is_empty() {
            return Err(Error::EmptyJury);
        }
        check_unique_names("juror", jurors.iter().map(|j| j.id.as_str()))?;
        let d = jurors[0].dim();
        if let Some(j) = jurors.iter().find(|j| j.dim() != d) {
            return Err(Error::DimensionMismatch {
                item: format!("juror `{}`", j.id),
                expected: d,
                found: j.dim(),
            });
        }
        Ok(Self { jurors })
    }

    pub fn jurors(&self) -> &[Juror] {
        &self.jurors
    }

    pub fn len(&self) -> usize {
        self.jurors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jurors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.jurors[0].dim()
    }

    pub fn juror(&self, id: &str) -> Option<&Juror> {
        self.jurors.iter().find(|j| j.id == id)
    }

    pub fn max_epsilon(&self) -> f64 {
        self.jurors.iter().map(|j| j.epsilon).fold(0.0, f64::max)
    }

    /// Checks that the jury can score options of `problem`.
    pub fn check_against(&self, problem: &ChoiceProblem) -> Result<()> {
        if self.dim() != problem.dim() {
            return Err(Error::DimensionMismatch {
                item: "jury".into(),
                expected: problem.dim(),
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// Classification of an ordered option pair (first, second).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    PreferredFirst,
    PreferredSecond,
    Equal,
    Incommensurable,
}

impl Relation {
    /// The same relation seen from the swapped pair (second, first).
    pub fn flip(self) -> Self {
        match self {
            Relation::PreferredFirst => Relation::PreferredSecond,
            Relation::PreferredSecond => Relation::PreferredFirst,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::PreferredFirst => "preferred_first",
            Relation::PreferredSecond => "preferred_second",
            Relation::Equal => "equal",
            Relation::Incommensurable => "incommensurable",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Relation::PreferredFirst,
            Relation::PreferredSecond,
            Relation::Equal,
            Relation::Incommensurable,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Numeric knobs shared by the classifier, the neighbourhood gate and the
/// small-improvement test.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Indifference tolerance for jurors that do not carry their own.
    pub epsilon_default: f64,
    /// Neighbourhood half-width. Unit-bearing, so there is no default.
    pub tau: Option<f64>,
    /// Improvement step as a fraction of each objective's score range.
    pub delta: f64,
}

impl Tolerances {
    pub fn new(epsilon_default: f64, tau: Option<f64>, delta: f64) -> Result<Self> {
        let bad = |name, v: f64| Error::InvalidTolerance {
            name,
            reason: format!("{v} is negative or non-finite"),
        };
        if !epsilon_default.is_finite() || epsilon_default < 0.0 {
            return Err(bad("epsilon_default", epsilon_default));
        }
        if let Some(t) = tau {
            if !t.is_finite() || t < 0.0 {
                return Err(bad("tau", t));
            }
        }
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::InvalidTolerance {
                name: "delta",
                reason: format!("{delta} must be strictly positive"),
            });
        }
        Ok(Self {
            epsilon_default,
            tau,
            delta,
        })
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            epsilon_default: DEFAULT_EPSILON,
            tau: None,
            delta: 0.01,
        }
    }
}

/// The fixed two-objective desk instance: options A, B and their slightly
/// improved versions A+ and B+, judged by two jurors that rank A and B in
/// opposite orders.
pub fn canonical_instance() -> (ChoiceProblem, Jury) {
    let problem = ChoiceProblem::new(
        vec![Objective::new("income"), Objective::new("excitement")],
        vec![
            OptionPoint::new("A", vec![10.0, 2.0]),
            OptionPoint::new("B", vec![4.0, 8.0]),
            OptionPoint::new("A+", vec![10.5, 2.2]),
            OptionPoint::new("B+", vec![4.2, 8.4]),
        ],
    )
    .expect("canonical problem is valid");
    let jury = Jury::new(vec![
        Juror::linear("alpha", vec![0.8, 0.2], DEFAULT_EPSILON).expect("valid juror"),
        Juror::linear("beta", vec![0.3, 0.7], DEFAULT_EPSILON).expect("valid juror"),
    ])
    .expect("canonical jury is valid");
    (problem, jury)
}
