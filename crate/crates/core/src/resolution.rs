//! Turning an incommensurable pair into a preference by changing the jury:
//! dropping the jurors that oppose a chosen target, or moving their weights
//! the shortest distance that makes them stop opposing it. Arbitrary
//! picking is offered as the preference-free alternative.
//!
//! The target is always supplied by the caller.

use crate::ensemble::{juror_compare, jury_classify, ClassificationTrace, Side, Verdict};
use crate::error::{Error, Result};
use crate::model::{Juror, Jury, OptionPoint, Relation, UtilityForm};
use crate::projection::project_simplex_halfspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolutionMethod {
    Abandonment,
    Transformation,
    ArbitraryPick,
}

impl ResolutionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ResolutionMethod::Abandonment => "abandonment",
            ResolutionMethod::Transformation => "transformation",
            ResolutionMethod::ArbitraryPick => "arbitrary_pick",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionReport {
    pub method: ResolutionMethod,
    pub before: ClassificationTrace,
    pub after: ClassificationTrace,
    pub jury_after: Jury,
    /// Euclidean weight change per surviving juror, in jury order.
    pub perturbation: Vec<(String, f64)>,
    pub removed: Vec<String>,
}

fn target_relation(target: Side) -> Relation {
    match target {
        Side::First => Relation::PreferredFirst,
        Side::Second => Relation::PreferredSecond,
    }
}

fn supports(verdict: Verdict, target: Side) -> bool {
    matches!(
        (verdict, target),
        (Verdict::FirstBetter, Side::First) | (Verdict::SecondBetter, Side::Second)
    )
}

fn opposes(verdict: Verdict, target: Side) -> bool {
    matches!(
        (verdict, target),
        (Verdict::FirstBetter, Side::Second) | (Verdict::SecondBetter, Side::First)
    )
}

fn hard_trace(jury: &Jury, a: &OptionPoint, b: &OptionPoint, target: Side) -> Result<ClassificationTrace> {
    let before = jury_classify(jury, a, b)?;
    if before.relation != Relation::Incommensurable {
        return Err(Error::NotHard(before.relation));
    }
    if !before.verdicts.iter().any(|v| supports(v.verdict, target)) {
        return Err(Error::NoSupportingJuror);
    }
    Ok(before)
}

/// Removes every juror whose verdict opposes `target`.
pub fn resolve_by_abandonment(
    jury: &Jury,
    a: &OptionPoint,
    b: &OptionPoint,
    target: Side,
) -> Result<ResolutionReport> {
    let before = hard_trace(jury, a, b, target)?;
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for (juror, v) in jury.jurors().iter().zip(&before.verdicts) {
        if opposes(v.verdict, target) {
            removed.push(juror.id.clone());
        } else {
            kept.push(juror.clone());
        }
    }
    let jury_after = Jury::new(kept)?;
    let after = jury_classify(&jury_after, a, b)?;
    debug_assert_eq!(after.relation, target_relation(target));
    let perturbation = jury_after.jurors().iter().map(|j| (j.id.clone(), 0.0)).collect();
    Ok(ResolutionReport {
        method: ResolutionMethod::Abandonment,
        before,
        after,
        jury_after,
        perturbation,
        removed,
    })
}

/// Moves each opposing juror to the nearest simplex point at which the
/// target option leads by at least `margin + epsilon`. Supporting and
/// indifferent jurors are left as they are.
pub fn resolve_by_transformation(
    jury: &Jury,
    a: &OptionPoint,
    b: &OptionPoint,
    target: Side,
    margin: f64,
) -> Result<ResolutionReport> {
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::InvalidTolerance {
            name: "margin",
            reason: format!("{margin} must be finite and nonnegative"),
        });
    }
    if let Some(j) = jury.jurors().iter().find(|j| j.form != UtilityForm::Linear) {
        return Err(Error::UnsupportedForm { juror: j.id.clone() });
    }
    let before = hard_trace(jury, a, b, target)?;
    let (winner, loser) = match target {
        Side::First => (a, b),
        Side::Second => (b, a),
    };
    let gap: Vec<f64> = winner
        .scores
        .iter()
        .zip(&loser.scores)
        .map(|(x, y)| x - y)
        .collect();

    let mut jurors = Vec::with_capacity(jury.len());
    let mut perturbation = Vec::with_capacity(jury.len());
    for (juror, v) in jury.jurors().iter().zip(&before.verdicts) {
        if !opposes(v.verdict, target) {
            jurors.push(juror.clone());
            perturbation.push((juror.id.clone(), 0.0));
            continue;
        }
        let required = margin + juror.epsilon;
        let original = juror.weights.as_slice();
        let moved = project_simplex_halfspace(original, &gap, required).ok_or_else(|| {
            Error::InfeasibleTransformation {
                juror: juror.id.clone(),
                required,
                achievable: gap.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })?;
        let moved = settle_on_boundary(juror, &moved, &gap, winner, loser, required)?;
        let distance = original
            .iter()
            .zip(&moved)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        perturbation.push((juror.id.clone(), distance));
        jurors.push(juror.with_weights(moved)?);
    }
    let jury_after = Jury::new(jurors)?;
    let after = jury_classify(&jury_after, a, b)?;
    debug_assert_eq!(after.relation, target_relation(target));
    Ok(ResolutionReport {
        method: ResolutionMethod::Transformation,
        before,
        after,
        jury_after,
        perturbation,
        removed: Vec::new(),
    })
}

/// The projection lands on the constraint boundary, where rounding can leave
/// the evaluated margin an ulp short. Slides the weights toward the vertex
/// with the largest gap until the juror's own arithmetic agrees.
fn settle_on_boundary(
    juror: &Juror,
    w: &[f64],
    gap: &[f64],
    winner: &OptionPoint,
    loser: &OptionPoint,
    required: f64,
) -> Result<Vec<f64>> {
    let best = (0..gap.len()).fold(0, |k, i| if gap[i] > gap[k] { i } else { k });
    let mut t = 0.0;
    for _ in 0..64 {
        let candidate: Vec<f64> = w
            .iter()
            .enumerate()
            .map(|(i, x)| (1.0 - t) * x + if i == best { t } else { 0.0 })
            .collect();
        let moved = juror.with_weights(candidate.clone())?;
        if juror_compare(&moved, winner, loser)?.margin >= required {
            return Ok(candidate);
        }
        t = if t == 0.0 { 1e-16 } else { t * 2.0 };
    }
    Ok(w.to_vec())
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded coin flip between two option names. Independent of argument
/// order: the pair is hashed as a sorted set.
pub fn arbitrary_choice<'a>(a: &'a str, b: &'a str, seed: u64) -> &'a str {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut key = Vec::with_capacity(lo.len() + hi.len() + 2);
    key.extend_from_slice(lo.as_bytes());
    key.push(0);
    key.extend_from_slice(hi.as_bytes());
    key.push(0);
    let h = splitmix64(fnv1a(&key) ^ splitmix64(seed));
    if h >> 63 == 0 {
        lo
    } else {
        hi
    }
}

/// Picks one option without forming a preference. The jury is untouched.
pub fn pick_arbitrarily(
    jury: &Jury,
    a: &OptionPoint,
    b: &OptionPoint,
    seed: u64,
) -> Result<(String, ResolutionReport)> {
    let before = jury_classify(jury, a, b)?;
    let chosen = arbitrary_choice(&a.name, &b.name, seed).to_string();
    let perturbation = jury.jurors().iter().map(|j| (j.id.clone(), 0.0)).collect();
    Ok((
        chosen,
        ResolutionReport {
            method: ResolutionMethod::ArbitraryPick,
            after: before.clone(),
            before,
            jury_after: jury.clone(),
            perturbation,
            removed: Vec::new(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::holocaust_cake_instance;
    use crate::ensemble::{small_improvement_test, SmallImprovementOutcome};
    use crate::model::{canonical_instance, Juror};

    #[test]
    fn abandonment_toward_first_drops_beta() {
        let (p, jury) = canonical_instance();
        let r = resolve_by_abandonment(&jury, p.option("A").unwrap(), p.option("B").unwrap(), Side::First)
            .unwrap();
        assert_eq!(r.removed, vec!["beta"]);
        assert_eq!(r.after.relation, Relation::PreferredFirst);
        assert_eq!(r.jury_after.len(), 1);
        assert_eq!(r.perturbation, vec![("alpha".to_string(), 0.0)]);
    }

    #[test]
    fn abandonment_toward_second_drops_alpha() {
        let (p, jury) = canonical_instance();
        let r = resolve_by_abandonment(
            &jury,
            p.option("A").unwrap(),
            p.option("B").unwrap(),
            Side::Second,
        )
        .unwrap();
        assert_eq!(r.removed, vec!["alpha"]);
        assert_eq!(r.after.relation, Relation::PreferredSecond);
    }

    #[test]
    fn preferred_pair_is_not_hard() {
        let (p, jury) = canonical_instance();
        let err = resolve_by_abandonment(
            &jury,
            p.option("A+").unwrap(),
            p.option("A").unwrap(),
            Side::First,
        )
        .unwrap_err();
        assert_eq!(err, Error::NotHard(Relation::PreferredFirst));
        let err = resolve_by_transformation(
            &jury,
            p.option("A").unwrap(),
            p.option("A+").unwrap(),
            Side::First,
            0.0,
        )
        .unwrap_err();
        assert_eq!(err, Error::NotHard(Relation::PreferredSecond));
    }

    #[test]
    fn transformation_moves_beta_to_diagonal() {
        let (p, _) = canonical_instance();
        let jury = Jury::new(vec![
            Juror::linear("alpha", vec![0.8, 0.2], 0.0).unwrap(),
            Juror::linear("beta", vec![0.3, 0.7], 0.0).unwrap(),
        ])
        .unwrap();
        let r = resolve_by_transformation(
            &jury,
            p.option("A").unwrap(),
            p.option("B").unwrap(),
            Side::First,
            0.0,
        )
        .unwrap();
        let beta = r.jury_after.juror("beta").unwrap();
        let w = beta.weights.as_slice();
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
        assert_eq!(r.perturbation[0].1, 0.0);
        assert!((r.perturbation[1].1 - 0.08f64.sqrt()).abs() < 1e-9);
        assert_eq!(r.after.relation, Relation::PreferredFirst);
        // alpha untouched, verdict bit-identical
        assert_eq!(r.before.verdicts[0], r.after.verdicts[0]);
    }

    #[test]
    fn transformation_with_default_epsilon_stays_near_diagonal() {
        let (p, jury) = canonical_instance();
        let r = resolve_by_transformation(
            &jury,
            p.option("A").unwrap(),
            p.option("B").unwrap(),
            Side::First,
            0.0,
        )
        .unwrap();
        let w = r.jury_after.juror("beta").unwrap().weights.as_slice().to_vec();
        assert!((w[0] - 0.5).abs() < 1e-9 && (w[1] - 0.5).abs() < 1e-9);
        let sift = small_improvement_test(
            &r.jury_after,
            &p,
            p.option("A").unwrap(),
            p.option("B").unwrap(),
            0.01,
        )
        .unwrap();
        assert!(!sift.is_confirmed());
        assert!(matches!(sift, SmallImprovementOutcome::NotConfirmed(_)));
    }

    #[test]
    fn infeasible_margin_toward_cake() {
        let hc = holocaust_cake_instance();
        let jury = Jury::new(vec![
            Juror::linear("alpha", vec![0.8, 0.2], 1e-9).unwrap(),
            Juror::linear("gamma", vec![0.0, 1.0], 1e-9).unwrap(),
        ])
        .unwrap();
        let (h, c) = (&hc.options[0], &hc.options[1]);
        let err = resolve_by_transformation(&jury, h, c, Side::Second, 1.5).unwrap_err();
        match err {
            Error::InfeasibleTransformation {
                juror, achievable, ..
            } => {
                assert_eq!(juror, "alpha");
                assert_eq!(achievable, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        // a margin inside the achievable gap works
        let r = resolve_by_transformation(&jury, h, c, Side::Second, 0.5).unwrap();
        assert_eq!(r.after.relation, Relation::PreferredSecond);
    }

    #[test]
    fn cobb_douglas_jurors_cannot_be_transformed() {
        let (p, _) = canonical_instance();
        let jury = Jury::new(vec![
            Juror::linear("alpha", vec![0.8, 0.2], 0.0).unwrap(),
            Juror::new("beta", vec![0.3, 0.7], UtilityForm::CobbDouglas, 0.0).unwrap(),
        ])
        .unwrap();
        let err = resolve_by_transformation(
            &jury,
            p.option("A").unwrap(),
            p.option("B").unwrap(),
            Side::First,
            0.0,
        )
        .unwrap_err();
        assert_eq!(err, Error::UnsupportedForm { juror: "beta".into() });
    }

    #[test]
    fn arbitrary_pick_is_pure_and_order_free() {
        let (p, jury) = canonical_instance();
        let (a, b) = (p.option("A").unwrap(), p.option("B").unwrap());
        let (c1, r1) = pick_arbitrarily(&jury, a, b, 42).unwrap();
        let (c2, r2) = pick_arbitrarily(&jury, a, b, 42).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(r1, r2);
        assert_eq!(r1.before, r1.after);
        assert_eq!(r1.jury_after, jury);
        assert_eq!(arbitrary_choice("A", "B", 7), arbitrary_choice("B", "A", 7));
    }

    #[test]
    fn arbitrary_pick_splits_evenly_over_seeds() {
        let firsts = (0..10_000u64)
            .filter(|s| arbitrary_choice("A", "B", *s) == "A")
            .count();
        // measured: 5024 of 10000 seeds pick A
        assert_eq!(firsts, 5024);
        assert!((4850..=5150).contains(&firsts));
    }
}
