//! Brute-force juror enumeration, kept apart from [`crate::ensemble`].
//!
//! Ground-truth labels for generated corpora come from here so that the
//! production classifier is never graded against its own output. Nothing in
//! this module calls into the ensemble code path.

use crate::model::{Jury, OptionPoint, Relation, UtilityForm};

fn utility(weights: &[f64], form: UtilityForm, scores: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..weights.len() {
        match form {
            UtilityForm::Linear => acc += weights[k] * scores[k],
            // log-space; monotone in the product form
            UtilityForm::CobbDouglas => acc += weights[k] * scores[k].ln(),
        }
    }
    acc
}

/// Counts jurors strictly favouring each side and applies the unanimity
/// rule to the tallies. Panics on dimension mismatch.
pub fn brute_force_relation(jury: &Jury, a: &OptionPoint, b: &OptionPoint) -> Relation {
    let mut votes_first = 0usize;
    let mut votes_second = 0usize;
    for juror in jury.jurors() {
        let w = juror.weights.as_slice();
        assert_eq!(w.len(), a.scores.len());
        assert_eq!(w.len(), b.scores.len());
        let (ua, ub) = match juror.form {
            UtilityForm::Linear => (
                utility(w, juror.form, &a.scores),
                utility(w, juror.form, &b.scores),
            ),
            UtilityForm::CobbDouglas => (
                utility(w, juror.form, &a.scores).exp(),
                utility(w, juror.form, &b.scores).exp(),
            ),
        };
        if ua - ub > juror.epsilon {
            votes_first += 1;
        } else if ub - ua > juror.epsilon {
            votes_second += 1;
        }
    }
    if votes_first > 0 && votes_second > 0 {
        Relation::Incommensurable
    } else if votes_first > 0 {
        Relation::PreferredFirst
    } else if votes_second > 0 {
        Relation::PreferredSecond
    } else {
        Relation::Equal
    }
}
