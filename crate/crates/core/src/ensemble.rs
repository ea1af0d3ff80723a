//! Unanimity-ensemble classification.
//!
//! Each juror compares a pair on its own utility scale. The jury reports a
//! preference only when no juror strictly favours the other side; a strict
//! split between jurors marks the pair incommensurable.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{ChoiceProblem, Juror, Jury, OptionPoint, Relation, UtilityForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    FirstBetter,
    SecondBetter,
    Indifferent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JurorVerdict {
    pub juror_id: String,
    pub verdict: Verdict,
    /// Utility of the first option minus utility of the second.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationTrace {
    pub relation: Relation,
    /// One entry per juror, in jury order.
    pub verdicts: Vec<JurorVerdict>,
}

impl ClassificationTrace {
    pub fn verdict_of(&self, juror_id: &str) -> Option<&JurorVerdict> {
        self.verdicts.iter().find(|v| v.juror_id == juror_id)
    }
}

pub fn juror_value(juror: &Juror, option: &OptionPoint) -> Result<f64> {
    if option.dim() != juror.dim() {
        return Err(Error::DimensionMismatch {
            item: format!("option `{}` for juror `{}`", option.name, juror.id),
            expected: juror.dim(),
            found: option.dim(),
        });
    }
    if juror.form == UtilityForm::CobbDouglas && option.scores.iter().any(|s| *s <= 0.0) {
        return Err(Error::NonPositiveScoreForLogForm {
            juror: juror.id.clone(),
            option: option.name.clone(),
        });
    }
    Ok(juror.form.eval(juror.weights.as_slice(), &option.scores))
}

pub fn juror_compare(juror: &Juror, a: &OptionPoint, b: &OptionPoint) -> Result<JurorVerdict> {
    let margin = juror_value(juror, a)? - juror_value(juror, b)?;
    let verdict = if margin > juror.epsilon {
        Verdict::FirstBetter
    } else if margin < -juror.epsilon {
        Verdict::SecondBetter
    } else {
        Verdict::Indifferent
    };
    Ok(JurorVerdict {
        juror_id: juror.id.clone(),
        verdict,
        margin,
    })
}

/// Applies the unanimity rule to a verdict profile.
///
/// A juror that is indifferent does not block a preference voiced by the
/// others; only a juror voting the opposite way does.
pub fn unanimity<'a>(verdicts: impl IntoIterator<Item = &'a Verdict>) -> Relation {
    let (mut first, mut second) = (false, false);
    for v in verdicts {
        match v {
            Verdict::FirstBetter => first = true,
            Verdict::SecondBetter => second = true,
            Verdict::Indifferent => {}
        }
    }
    match (first, second) {
        (true, true) => Relation::Incommensurable,
        (true, false) => Relation::PreferredFirst,
        (false, true) => Relation::PreferredSecond,
        (false, false) => Relation::Equal,
    }
}

pub fn jury_classify(jury: &Jury, a: &OptionPoint, b: &OptionPoint) -> Result<ClassificationTrace> {
    let verdicts = jury
        .jurors()
        .iter()
        .map(|j| juror_compare(j, a, b))
        .collect::<Result<Vec<_>>>()?;
    let relation = unanimity(verdicts.iter().map(|v| &v.verdict));
    Ok(ClassificationTrace { relation, verdicts })
}

/// Pairwise relations over all options of a problem, indexed in problem
/// order. Entry `(i, j)` classifies the ordered pair (option i, option j).
#[derive(Debug, Clone, PartialEq)]
pub struct RelationMatrix {
    pub names: Vec<String>,
    cells: Vec<Relation>,
}

impl RelationMatrix {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Relation {
        self.cells[i * self.names.len() + j]
    }

    pub fn by_name(&self, a: &str, b: &str) -> Option<Relation> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.get(i, j))
    }

    /// Unordered pairs `i < j` with their relation.
    pub fn upper_pairs(&self) -> impl Iterator<Item = (usize, usize, Relation)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j, self.get(i, j))))
    }

    pub fn count(&self, relation: Relation) -> usize {
        self.upper_pairs().filter(|(_, _, r)| *r == relation).count()
    }
}

pub fn classification_matrix(jury: &Jury, problem: &ChoiceProblem) -> Result<RelationMatrix> {
    jury.check_against(problem)?;
    let n = problem.options.len();
    let mut cells = vec![Relation::Equal; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let r = jury_classify(jury, &problem.options[i], &problem.options[j])?.relation;
            cells[i * n + j] = r;
            cells[j * n + i] = r.flip();
        }
    }
    Ok(RelationMatrix {
        names: problem.options.iter().map(|o| o.name.clone()).collect(),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::First => "first",
            Side::Second => "second",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NotConfirmedReason {
    PairEqual,
    PairAlreadyPreferred(Relation),
    /// The improved copy of `side` was not unanimously preferred to the
    /// original; the jury holds a non-monotone juror.
    ImprovementNotPreferred {
        side: Side,
        relation: Relation,
    },
    /// The improved copy of `side` beats the other option outright, so the
    /// original pair sat inside the improvement step.
    ImprovementBeatsOther {
        side: Side,
    },
}

impl fmt::Display for NotConfirmedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotConfirmedReason::PairEqual => write!(f, "pair is Equal"),
            NotConfirmedReason::PairAlreadyPreferred(r) => {
                let name = if *r == Relation::PreferredFirst {
                    "PreferredFirst"
                } else {
                    "PreferredSecond"
                };
                write!(f, "pair already {name}")
            }
            NotConfirmedReason::ImprovementNotPreferred { side, relation } => {
                write!(
                    f,
                    "improved {side} option is not preferred to the original ({relation})"
                )
            }
            NotConfirmedReason::ImprovementBeatsOther { side } => {
                write!(f, "improved {side} option is preferred to the other option")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SmallImprovementOutcome {
    ConfirmedIncommensurable,
    NotConfirmed(NotConfirmedReason),
}

impl SmallImprovementOutcome {
    pub fn is_confirmed(&self) -> bool {
        matches!(self, SmallImprovementOutcome::ConfirmedIncommensurable)
    }
}

/// Improvement vector: `delta` times each objective's score range, with a
/// floor of 1.0 for objectives whose range is zero.
pub fn improvement_step(problem: &ChoiceProblem, delta: f64) -> Vec<f64> {
    problem
        .score_ranges()
        .into_iter()
        .map(|r| delta * if r > 0.0 { r } else { 1.0 })
        .collect()
}

pub fn improve(option: &OptionPoint, step: &[f64]) -> OptionPoint {
    OptionPoint::new(
        format!("{}^+", option.name),
        option.scores.iter().zip(step).map(|(s, d)| s + d).collect(),
    )
}

/// Small-improvement diagnostic, run from both sides of the pair.
///
/// For each side, a copy improved on every objective must beat the original
/// unanimously while still failing to beat the other option.
pub fn small_improvement_test(
    jury: &Jury,
    problem: &ChoiceProblem,
    a: &OptionPoint,
    b: &OptionPoint,
    delta: f64,
) -> Result<SmallImprovementOutcome> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidTolerance {
            name: "delta",
            reason: format!("{delta} must be strictly positive"),
        });
    }
    use NotConfirmedReason::*;
    use SmallImprovementOutcome::*;
    match jury_classify(jury, a, b)?.relation {
        Relation::Equal => return Ok(NotConfirmed(PairEqual)),
        r @ (Relation::PreferredFirst | Relation::PreferredSecond) => {
            return Ok(NotConfirmed(PairAlreadyPreferred(r)))
        }
        Relation::Incommensurable => {}
    }
    let step = improvement_step(problem, delta);
    for (side, this, other) in [(Side::First, a, b), (Side::Second, b, a)] {
        let improved = improve(this, &step);
        let over_self = jury_classify(jury, &improved, this)?.relation;
        if over_self != Relation::PreferredFirst {
            return Ok(NotConfirmed(ImprovementNotPreferred {
                side,
                relation: over_self,
            }));
        }
        if jury_classify(jury, &improved, other)?.relation == Relation::PreferredFirst {
            return Ok(NotConfirmed(ImprovementBeatsOther { side }));
        }
    }
    Ok(ConfirmedIncommensurable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{canonical_instance, Juror, Objective};

    fn canon() -> (ChoiceProblem, Jury) {
        canonical_instance()
    }

    fn opt<'a>(p: &'a ChoiceProblem, n: &str) -> &'a OptionPoint {
        p.option(n).unwrap()
    }

    #[test]
    fn linear_values_match_hand_arithmetic() {
        let (p, jury) = canon();
        let alpha = &jury.jurors()[0];
        let beta = &jury.jurors()[1];
        assert!((juror_value(alpha, opt(&p, "A")).unwrap() - 8.4).abs() < 1e-12);
        assert!((juror_value(alpha, opt(&p, "B")).unwrap() - 4.8).abs() < 1e-12);
        assert!((juror_value(beta, opt(&p, "A")).unwrap() - 4.4).abs() < 1e-12);
        assert!((juror_value(beta, opt(&p, "B")).unwrap() - 6.8).abs() < 1e-12);
        assert!((juror_value(alpha, opt(&p, "A+")).unwrap() - 8.84).abs() < 1e-12);
        assert!((juror_value(beta, opt(&p, "A+")).unwrap() - 4.69).abs() < 1e-12);
    }

    #[test]
    fn zero_vector_and_degenerate_weights() {
        let j = Juror::linear("j", vec![0.25, 0.75], 0.0).unwrap();
        assert_eq!(
            juror_value(&j, &OptionPoint::new("z", vec![0.0, 0.0])).unwrap(),
            0.0
        );
        let e1 = Juror::linear("e1", vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(
            juror_value(&e1, &OptionPoint::new("p", vec![7.0, 123.0])).unwrap(),
            7.0
        );
    }

    #[test]
    fn cobb_douglas_needs_positive_scores() {
        let j = Juror::new("cd", vec![0.5, 0.5], UtilityForm::CobbDouglas, 0.0).unwrap();
        let v = juror_value(&j, &OptionPoint::new("p", vec![4.0, 9.0])).unwrap();
        assert!((v - 6.0).abs() < 1e-12);
        let err = juror_value(&j, &OptionPoint::new("q", vec![4.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::NonPositiveScoreForLogForm { .. }));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let j = Juror::linear("j", vec![0.5, 0.5], 0.0).unwrap();
        let err = juror_value(&j, &OptionPoint::new("p", vec![1.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn juror_compare_on_canonical_pair() {
        let (p, jury) = canon();
        let va = juror_compare(&jury.jurors()[0], opt(&p, "A"), opt(&p, "B")).unwrap();
        assert_eq!(va.verdict, Verdict::FirstBetter);
        assert!((va.margin - 3.6).abs() < 1e-12);
        let vb = juror_compare(&jury.jurors()[1], opt(&p, "A"), opt(&p, "B")).unwrap();
        assert_eq!(vb.verdict, Verdict::SecondBetter);
        assert!((vb.margin + 2.4).abs() < 1e-12);
        let same = juror_compare(&jury.jurors()[1], opt(&p, "A"), opt(&p, "A")).unwrap();
        assert_eq!(same.verdict, Verdict::Indifferent);
        assert_eq!(same.margin, 0.0);
    }

    #[test]
    fn jury_classify_canonical_pairs() {
        let (p, jury) = canon();
        let t = jury_classify(&jury, opt(&p, "A"), opt(&p, "B")).unwrap();
        assert_eq!(t.relation, Relation::Incommensurable);
        assert_eq!(
            t.verdicts.iter().map(|v| v.verdict).collect::<Vec<_>>(),
            vec![Verdict::FirstBetter, Verdict::SecondBetter]
        );
        let t = jury_classify(&jury, opt(&p, "A+"), opt(&p, "A")).unwrap();
        assert_eq!(t.relation, Relation::PreferredFirst);
        let t = jury_classify(&jury, opt(&p, "B"), opt(&p, "B")).unwrap();
        assert_eq!(t.relation, Relation::Equal);
    }

    #[test]
    fn mixed_indifferent_and_strict_is_a_preference() {
        use Verdict::*;
        assert_eq!(unanimity(&[FirstBetter, Indifferent]), Relation::PreferredFirst);
        assert_eq!(unanimity(&[Indifferent, SecondBetter]), Relation::PreferredSecond);
        assert_eq!(unanimity(&[Indifferent, Indifferent]), Relation::Equal);
        assert_eq!(
            unanimity(&[FirstBetter, Indifferent, SecondBetter]),
            Relation::Incommensurable
        );
    }

    #[test]
    fn matrix_is_antisymmetric_with_equal_diagonal() {
        let (p, jury) = canon();
        let m = classification_matrix(&jury, &p).unwrap();
        for i in 0..m.len() {
            assert_eq!(m.get(i, i), Relation::Equal);
            for j in 0..m.len() {
                assert_eq!(m.get(i, j), m.get(j, i).flip());
            }
        }
        assert_eq!(m.by_name("A", "B"), Some(Relation::Incommensurable));
        assert_eq!(m.by_name("A+", "A"), Some(Relation::PreferredFirst));
        assert_eq!(m.by_name("A+", "B"), Some(Relation::Incommensurable));
    }

    #[test]
    fn identical_options_give_all_equal_matrix() {
        let p = ChoiceProblem::new(
            vec![Objective::new("x"), Objective::new("y")],
            vec![
                OptionPoint::new("X1", vec![3.0, 3.0]),
                OptionPoint::new("X2", vec![3.0, 3.0]),
                OptionPoint::new("X3", vec![3.0, 3.0]),
            ],
        )
        .unwrap();
        let (_, jury) = canon();
        let m = classification_matrix(&jury, &p).unwrap();
        assert_eq!(m.count(Relation::Equal), 3);
    }

    #[test]
    fn small_improvement_confirms_canonical_pair() {
        let (p, jury) = canon();
        let out = small_improvement_test(&jury, &p, opt(&p, "A"), opt(&p, "B"), 0.01).unwrap();
        assert_eq!(out, SmallImprovementOutcome::ConfirmedIncommensurable);
    }

    #[test]
    fn small_improvement_rejects_equal_and_preferred_pairs() {
        let (p, jury) = canon();
        let out = small_improvement_test(&jury, &p, opt(&p, "A"), opt(&p, "A"), 0.01).unwrap();
        match out {
            SmallImprovementOutcome::NotConfirmed(r) => assert_eq!(r.to_string(), "pair is Equal"),
            other => panic!("unexpected {other:?}"),
        }
        let out = small_improvement_test(&jury, &p, opt(&p, "A+"), opt(&p, "A"), 0.01).unwrap();
        match out {
            SmallImprovementOutcome::NotConfirmed(r) => {
                assert_eq!(r.to_string(), "pair already PreferredFirst")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn large_improvement_breaks_the_dispute() {
        // Beyond the flip threshold beta prefers the improved A to B.
        let (p, jury) = canon();
        let out = small_improvement_test(&jury, &p, opt(&p, "A"), opt(&p, "B"), 0.5).unwrap();
        assert_eq!(
            out,
            SmallImprovementOutcome::NotConfirmed(NotConfirmedReason::ImprovementBeatsOther {
                side: Side::First
            })
        );
    }

    #[test]
    fn zero_range_objective_uses_unit_floor() {
        let p = ChoiceProblem::new(
            vec![Objective::new("x"), Objective::new("y")],
            vec![
                OptionPoint::new("A", vec![1.0, 5.0]),
                OptionPoint::new("B", vec![3.0, 5.0]),
            ],
        )
        .unwrap();
        assert_eq!(improvement_step(&p, 0.1), vec![0.2, 0.1]);
    }

    #[test]
    fn rejects_non_positive_delta() {
        let (p, jury) = canon();
        assert!(small_improvement_test(&jury, &p, opt(&p, "A"), opt(&p, "B"), 0.0).is_err());
    }
}
