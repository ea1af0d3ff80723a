//! Three-step meta-policy: a learned likelihood gate, a neighbourhood gate
//! under a fixed reference model, then dispatch to scalarised or Pareto
//! machinery.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{pareto_front, scalarised_rank, Ranking, ScalarisedModel};
use crate::ensemble::jury_classify;
use crate::error::{Error, Result};
use crate::model::{ChoiceProblem, Jury, OptionPoint, Relation};

/// Closed context vocabulary and how strongly each context is associated
/// with hard choices.
pub const CONTEXT_AFFINITY: &[(&str, f64)] = &[
    ("investment", 0.1),
    ("logistics", 0.2),
    ("leisure", 0.5),
    ("medical", 0.7),
    ("career", 0.9),
];

pub fn context_affinity(tag: &str) -> Result<f64> {
    CONTEXT_AFFINITY
        .iter()
        .find(|(t, _)| *t == tag)
        .map(|(_, a)| *a)
        .ok_or_else(|| Error::UnknownContextTag(tag.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateFeatures {
    pub context_affinity: f64,
    /// Mean, over options, of the spread of range-normalised scores across
    /// objectives. In [0, 1].
    pub dispersion: f64,
    /// Fraction of option pairs on which objectives disagree about the
    /// ordering. In [0, 1].
    pub rank_disagreement: f64,
}

impl GateFeatures {
    pub fn from_problem(problem: &ChoiceProblem, context_tag: &str) -> Result<Self> {
        let context_affinity = context_affinity(context_tag)?;
        let ranges = problem.score_ranges();
        let mins: Vec<f64> = (0..problem.dim())
            .map(|k| {
                problem
                    .options
                    .iter()
                    .map(|o| o.scores[k])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let spreads = problem.options.iter().map(|o| {
            let normed = o.scores.iter().enumerate().map(|(k, s)| {
                if ranges[k] > 0.0 {
                    (s - mins[k]) / ranges[k]
                } else {
                    0.0
                }
            });
            let (lo, hi) = normed.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
            hi - lo
        });
        let dispersion = spreads.sum::<f64>() / problem.options.len() as f64;

        let n = problem.options.len();
        let mut conflicted = 0usize;
        for i in 0..n {
            for j in i + 1..n {
                if objectives_conflict(&problem.options[i], &problem.options[j]) {
                    conflicted += 1;
                }
            }
        }
        let rank_disagreement = conflicted as f64 / (n * (n - 1) / 2) as f64;
        Ok(Self {
            context_affinity,
            dispersion,
            rank_disagreement,
        })
    }

    fn as_array(&self) -> [f64; 3] {
        [self.context_affinity, self.dispersion, self.rank_disagreement]
    }
}

fn objectives_conflict(a: &OptionPoint, b: &OptionPoint) -> bool {
    let favours_a = a.scores.iter().zip(&b.scores).any(|(x, y)| x > y);
    let favours_b = a.scores.iter().zip(&b.scores).any(|(x, y)| x < y);
    favours_a && favours_b
}

/// Logistic gate estimating how likely a choice is to be hard.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOneModel {
    pub context_weight: f64,
    pub dispersion_weight: f64,
    /// Kept nonnegative so the likelihood never drops as disagreement grows.
    pub disagreement_weight: f64,
    pub bias: f64,
    pub threshold: f64,
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

impl GateOneModel {
    pub fn new(
        context_weight: f64,
        dispersion_weight: f64,
        disagreement_weight: f64,
        bias: f64,
        threshold: f64,
    ) -> Result<Self> {
        let all = [
            context_weight,
            dispersion_weight,
            disagreement_weight,
            bias,
            threshold,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Semantic("gate model parameters must be finite".into()));
        }
        if disagreement_weight < 0.0 {
            return Err(Error::Semantic("disagreement weight must be nonnegative".into()));
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::Semantic(format!("threshold {threshold} outside (0, 1)")));
        }
        Ok(Self {
            context_weight,
            dispersion_weight,
            disagreement_weight,
            bias,
            threshold,
        })
    }

    fn weights(&self) -> [f64; 3] {
        [
            self.context_weight,
            self.dispersion_weight,
            self.disagreement_weight,
        ]
    }

    pub fn predicts_hard(&self, features: &GateFeatures) -> bool {
        gate1_likelihood(self, features) >= self.threshold
    }
}

fn squash(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn gate1_likelihood(model: &GateOneModel, features: &GateFeatures) -> f64 {
    let z = model
        .weights()
        .iter()
        .zip(features.as_array())
        .map(|(w, f)| w * f)
        .sum::<f64>()
        + model.bias;
    squash(z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledFeatures {
    pub features: GateFeatures,
    pub hard: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 3000,
            learning_rate: 2.0,
            l2: 1e-4,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// Full-batch projected gradient descent on the L2-regularised logistic
/// loss, starting from zero. Deterministic for a given example order.
pub fn train_gate1(examples: &[LabeledFeatures], config: &TrainConfig) -> Result<GateOneModel> {
    let positives = examples.iter().filter(|e| e.hard).count();
    if examples.is_empty() || positives == 0 || positives == examples.len() {
        return Err(Error::DegenerateCorpus(format!(
            "{positives} hard out of {} examples; both classes are needed",
            examples.len()
        )));
    }
    let n = examples.len() as f64;
    let mut w = [0.0f64; 3];
    let mut b = 0.0f64;
    for _ in 0..config.iterations {
        let mut gw = [0.0f64; 3];
        let mut gb = 0.0f64;
        for e in examples {
            let x = e.features.as_array();
            let z = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
            let err = squash(z) - if e.hard { 1.0 } else { 0.0 };
            for k in 0..3 {
                gw[k] += err * x[k];
            }
            gb += err;
        }
        for k in 0..3 {
            w[k] -= config.learning_rate * (gw[k] / n + config.l2 * w[k]);
        }
        b -= config.learning_rate * gb / n;
        w[2] = w[2].max(0.0);
    }
    GateOneModel::new(w[0], w[1], w[2], b, config.threshold)
}

pub fn accuracy(model: &GateOneModel, examples: &[LabeledFeatures]) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let correct = examples
        .iter()
        .filter(|e| model.predicts_hard(&e.features) == e.hard)
        .count();
    correct as f64 / examples.len() as f64
}

/// Seeded shuffle then split; returns (train, held_out).
pub fn holdout_split<T: Clone>(items: &[T], held_out_fraction: f64, seed: u64) -> (Vec<T>, Vec<T>) {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = ((items.len() as f64) * held_out_fraction).round() as usize;
    let held: Vec<T> = idx[..cut].iter().map(|&i| items[i].clone()).collect();
    let train: Vec<T> = idx[cut..].iter().map(|&i| items[i].clone()).collect();
    (train, held)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Neighbourhood {
    Same(f64),
    Apart(f64),
}

impl Neighbourhood {
    pub fn margin(self) -> f64 {
        match self {
            Neighbourhood::Same(m) | Neighbourhood::Apart(m) => m,
        }
    }

    pub fn is_same(self) -> bool {
        matches!(self, Neighbourhood::Same(_))
    }
}

pub fn gate2_neighbourhood(
    reference: &ScalarisedModel,
    a: &OptionPoint,
    b: &OptionPoint,
    tau: f64,
) -> Result<Neighbourhood> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::InvalidTolerance {
            name: "tau",
            reason: format!("{tau} must be nonnegative"),
        });
    }
    let margin = (reference.value(a)? - reference.value(b)?).abs();
    Ok(if margin <= tau {
        Neighbourhood::Same(margin)
    } else {
        Neighbourhood::Apart(margin)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    ScalarisedRoute,
    ParetoRoute,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PipelineResult {
    Ranking(Ranking),
    Front(Vec<String>),
}

/// A front pair the pipeline calls incommensurable, alongside what the
/// ensemble says about the same pair.
#[derive(Debug, Clone, PartialEq)]
pub struct IncommensurableLabel {
    pub first: String,
    pub second: String,
    pub gate2_margin: f64,
    pub ensemble: Relation,
}

impl IncommensurableLabel {
    /// The pipeline labels a pair the ensemble considers equal.
    pub fn mislabels_equality(&self) -> bool {
        self.ensemble == Relation::Equal
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineTrace {
    pub gate1_probability: f64,
    /// (first, second, margin) for every front pair checked by gate 2.
    pub gate2_margins: Vec<(String, String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub route: Route,
    pub result: PipelineResult,
    pub labels: Vec<IncommensurableLabel>,
    pub trace: PipelineTrace,
}

/// Routes a problem through both gates.
///
/// Gate 2 runs on every pair of Pareto-front members. The problem takes the
/// scalarised route when gate 1 deems it unlikely to be hard or when no
/// front pair shares a neighbourhood (including a singleton front).
pub fn pipeline_dispatch(
    g1: &GateOneModel,
    reference: &ScalarisedModel,
    jury_for_pareto_labels: &Jury,
    problem: &ChoiceProblem,
    context_tag: &str,
    tau: f64,
) -> Result<PipelineOutcome> {
    jury_for_pareto_labels.check_against(problem)?;
    let features = GateFeatures::from_problem(problem, context_tag)?;
    let gate1_probability = gate1_likelihood(g1, &features);
    let scalarised = |gate2_margins| -> Result<PipelineOutcome> {
        Ok(PipelineOutcome {
            route: Route::ScalarisedRoute,
            result: PipelineResult::Ranking(scalarised_rank(reference, problem)?),
            labels: Vec::new(),
            trace: PipelineTrace {
                gate1_probability,
                gate2_margins,
            },
        })
    };
    if gate1_probability < g1.threshold {
        return scalarised(Vec::new());
    }

    let front = pareto_front(problem).front;
    let members: Vec<&OptionPoint> = front.iter().map(|n| problem.option(n)).collect::<Result<_>>()?;
    let mut margins = Vec::new();
    let mut labels = Vec::new();
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let (a, b) = (members[i], members[j]);
            let hood = gate2_neighbourhood(reference, a, b, tau)?;
            margins.push((a.name.clone(), b.name.clone(), hood.margin()));
            if hood.is_same() {
                labels.push(IncommensurableLabel {
                    first: a.name.clone(),
                    second: b.name.clone(),
                    gate2_margin: hood.margin(),
                    ensemble: jury_classify(jury_for_pareto_labels, a, b)?.relation,
                });
            }
        }
    }
    if labels.is_empty() {
        return scalarised(margins);
    }
    Ok(PipelineOutcome {
        route: Route::ParetoRoute,
        result: PipelineResult::Front(front),
        labels,
        trace: PipelineTrace {
            gate1_probability,
            gate2_margins: margins,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::holocaust_cake_instance;
    use crate::model::{canonical_instance, Objective};

    fn zero_model() -> GateOneModel {
        GateOneModel::new(0.0, 0.0, 0.0, 0.0, 0.5).unwrap()
    }

    fn career_leaning() -> GateOneModel {
        GateOneModel::new(4.0, 0.0, 6.0, -4.0, 0.5).unwrap()
    }

    fn half() -> ScalarisedModel {
        ScalarisedModel::linear(vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn zero_model_squashes_to_half() {
        let f = GateFeatures {
            context_affinity: 0.3,
            dispersion: 0.4,
            rank_disagreement: 0.0,
        };
        assert_eq!(gate1_likelihood(&zero_model(), &f), 0.5);
    }

    #[test]
    fn unknown_context_is_rejected() {
        let (p, _) = canonical_instance();
        assert_eq!(
            GateFeatures::from_problem(&p, "astrology").unwrap_err(),
            Error::UnknownContextTag("astrology".into())
        );
    }

    #[test]
    fn canonical_features() {
        let (p, _) = canonical_instance();
        let f = GateFeatures::from_problem(&p, "career").unwrap();
        assert_eq!(f.context_affinity, 0.9);
        // conflicting pairs: A-B, A-B+, A+-B, A+-B+ out of six
        assert!((f.rank_disagreement - 4.0 / 6.0).abs() < 1e-12);
        assert!(f.dispersion > 0.0 && f.dispersion <= 1.0);
    }

    #[test]
    fn gate2_examples() {
        let (p, _) = canonical_instance();
        let h = gate2_neighbourhood(&half(), p.option("A").unwrap(), p.option("B").unwrap(), 0.0).unwrap();
        assert_eq!(h, Neighbourhood::Same(0.0));
        let hc = holocaust_cake_instance();
        let h = gate2_neighbourhood(&half(), &hc.options[0], &hc.options[1], 100.0).unwrap();
        assert_eq!(h, Neighbourhood::Apart(499_999.5));
        let x = OptionPoint::new("x", vec![1.0, 2.0]);
        assert!(gate2_neighbourhood(&half(), &x, &x, 0.0).unwrap().is_same());
        assert!(gate2_neighbourhood(&half(), &x, &x, -1.0).is_err());
    }

    #[test]
    fn holocaust_cake_takes_scalarised_route() {
        let hc = holocaust_cake_instance();
        let (_, jury) = canonical_instance();
        let out = pipeline_dispatch(&career_leaning(), &half(), &jury, &hc, "career", 1.0).unwrap();
        assert_eq!(out.route, Route::ScalarisedRoute);
        assert!(out.labels.is_empty());
        assert_eq!(out.trace.gate2_margins.len(), 1);
    }

    #[test]
    fn canonical_pair_is_labelled() {
        let (p, jury) = canonical_instance();
        let ab = p.restrict(&["A", "B"]).unwrap();
        let out = pipeline_dispatch(&career_leaning(), &half(), &jury, &ab, "career", 0.1).unwrap();
        assert_eq!(out.route, Route::ParetoRoute);
        assert_eq!(out.labels.len(), 1);
        assert_eq!(out.labels[0].ensemble, Relation::Incommensurable);
        assert_eq!(out.result, PipelineResult::Front(vec!["A".into(), "B".into()]));
    }

    #[test]
    fn dominant_option_yields_singleton_without_labels() {
        let p = ChoiceProblem::new(
            vec![Objective::new("x"), Objective::new("y")],
            vec![
                OptionPoint::new("top", vec![9.0, 9.0]),
                OptionPoint::new("p", vec![1.0, 5.0]),
                OptionPoint::new("q", vec![5.0, 1.0]),
            ],
        )
        .unwrap();
        let (_, jury) = canonical_instance();
        let out = pipeline_dispatch(&career_leaning(), &half(), &jury, &p, "career", 100.0).unwrap();
        assert!(out.labels.is_empty());
        match out.result {
            PipelineResult::Ranking(r) => assert_eq!(r.top().members, vec!["top"]),
            PipelineResult::Front(f) => assert_eq!(f, vec!["top"]),
        }
    }

    #[test]
    fn low_likelihood_routes_to_scalarised() {
        let (p, jury) = canonical_instance();
        let never = GateOneModel::new(0.0, 0.0, 0.0, -10.0, 0.5).unwrap();
        let out = pipeline_dispatch(&never, &half(), &jury, &p, "career", 10.0).unwrap();
        assert_eq!(out.route, Route::ScalarisedRoute);
        assert!(out.trace.gate2_margins.is_empty());
    }

    #[test]
    fn training_rejects_single_class() {
        let f = GateFeatures {
            context_affinity: 0.1,
            dispersion: 0.0,
            rank_disagreement: 0.0,
        };
        let ex = vec![
            LabeledFeatures {
                features: f,
                hard: false
            };
            5
        ];
        assert!(matches!(
            train_gate1(&ex, &TrainConfig::default()),
            Err(Error::DegenerateCorpus(_))
        ));
    }

    #[test]
    fn training_separates_separable_examples() {
        let mut ex = Vec::new();
        for i in 0..40 {
            let t = i as f64 / 40.0;
            ex.push(LabeledFeatures {
                features: GateFeatures {
                    context_affinity: 0.9,
                    dispersion: 0.5 + 0.3 * t,
                    rank_disagreement: 0.4 + 0.5 * t,
                },
                hard: true,
            });
            ex.push(LabeledFeatures {
                features: GateFeatures {
                    context_affinity: 0.1,
                    dispersion: 0.2 * t,
                    rank_disagreement: 0.0,
                },
                hard: false,
            });
        }
        let m = train_gate1(&ex, &TrainConfig::default()).unwrap();
        assert_eq!(accuracy(&m, &ex), 1.0);
        assert!(m.disagreement_weight >= 0.0);
    }

    #[test]
    fn holdout_split_is_deterministic_partition() {
        let items: Vec<u32> = (0..100).collect();
        let (t1, h1) = holdout_split(&items, 0.25, 9);
        let (t2, h2) = holdout_split(&items, 0.25, 9);
        assert_eq!((t1.clone(), h1.clone()), (t2, h2));
        assert_eq!(h1.len(), 25);
        let mut all: Vec<u32> = t1.into_iter().chain(h1).collect();
        all.sort();
        assert_eq!(all, items);
    }
}
