//! Seeded synthetic corpora with oracle-labelled ground truth.
//!
//! Each scenario has a designated pair, its first two options, whose class
//! (hard, easy or equal) is drawn from a fixed mix. Class counts are
//! allocated exactly and then shuffled, so the empirical mix matches the
//! configured one to within rounding.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::ScalarisedModel;
use crate::error::{Error, Result};
use crate::harness::format::parse_generator_block;
use crate::harness::{oracle_ground_truth, Scenario};
use crate::metapolicy::{GateFeatures, LabeledFeatures, CONTEXT_AFFINITY};
use crate::model::{ChoiceProblem, Juror, Jury, Objective, OptionPoint, Relation, Tolerances};
use crate::oracle::brute_force_relation;

const MAX_ATTEMPTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairClass {
    Hard,
    Easy,
    Equal,
}

impl PairClass {
    pub fn of(relation: Relation) -> Self {
        match relation {
            Relation::Incommensurable => PairClass::Hard,
            Relation::Equal => PairClass::Equal,
            Relation::PreferredFirst | Relation::PreferredSecond => PairClass::Easy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMix {
    pub hard: f64,
    pub easy: f64,
    pub equal: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub dimensions: usize,
    pub options: usize,
    pub jurors: usize,
    /// 0 = identical jurors, 1 = independent uniform draws on the simplex.
    pub spread: f64,
    pub score_min: f64,
    pub score_max: f64,
    pub mix: ClassMix,
    /// Ties context and dominance structure to the class so that gate-1
    /// features separate hard from non-hard scenarios.
    pub separable: bool,
    pub epsilon: f64,
    pub tau: f64,
    pub delta: f64,
    pub count: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            dimensions: 2,
            options: 4,
            jurors: 3,
            spread: 0.6,
            score_min: 0.0,
            score_max: 10.0,
            mix: ClassMix {
                hard: 0.3,
                easy: 0.6,
                equal: 0.1,
            },
            separable: false,
            epsilon: crate::model::DEFAULT_EPSILON,
            tau: 0.5,
            delta: 0.01,
            count: 100,
        }
    }
}

const CONFIG_KEYS: &[&str] = &[
    "dimensions",
    "options",
    "jurors",
    "spread",
    "score_min",
    "score_max",
    "hard",
    "easy",
    "equal",
    "separable",
    "epsilon",
    "tau",
    "delta",
    "count",
];

impl GeneratorConfig {
    /// Reads a `[generator]` block; omitted keys keep their defaults.
    /// `separable` is written as 0 or 1.
    pub fn parse(text: &str) -> Result<Self> {
        let map = parse_generator_block(text, CONFIG_KEYS)?;
        let mut c = Self::default();
        let count = |k: &str, v: f64| -> Result<usize> {
            if v < 0.0 || v.fract() != 0.0 {
                return Err(Error::Semantic(format!("`{k}` must be a nonnegative integer")));
            }
            Ok(v as usize)
        };
        for (k, v) in &map {
            let v = *v;
            match k.as_str() {
                "dimensions" => c.dimensions = count(k, v)?,
                "options" => c.options = count(k, v)?,
                "jurors" => c.jurors = count(k, v)?,
                "count" => c.count = count(k, v)?,
                "spread" => c.spread = v,
                "score_min" => c.score_min = v,
                "score_max" => c.score_max = v,
                "hard" => c.mix.hard = v,
                "easy" => c.mix.easy = v,
                "equal" => c.mix.equal = v,
                "separable" => c.separable = count(k, v)? != 0,
                "epsilon" => c.epsilon = v,
                "tau" => c.tau = v,
                "delta" => c.delta = v,
                _ => unreachable!("keys are checked by the parser"),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn to_text(&self) -> String {
        format!(
            "[generator]\ndimensions: {}\noptions: {}\njurors: {}\nspread: {}\nscore_min: {}\nscore_max: {}\nhard: {}\neasy: {}\nequal: {}\nseparable: {}\nepsilon: {}\ntau: {}\ndelta: {}\ncount: {}\n",
            self.dimensions,
            self.options,
            self.jurors,
            self.spread,
            self.score_min,
            self.score_max,
            self.mix.hard,
            self.mix.easy,
            self.mix.equal,
            u8::from(self.separable),
            self.epsilon,
            self.tau,
            self.delta,
            self.count
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Semantic(m));
        if self.dimensions == 0 {
            return bad("dimensions must be at least 1".into());
        }
        if self.options < 2 {
            return bad("options must be at least 2".into());
        }
        if self.jurors == 0 {
            return bad("jurors must be at least 1".into());
        }
        if self.count == 0 {
            return bad("count must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.spread) {
            return bad(format!("spread {} outside [0, 1]", self.spread));
        }
        if self.score_min.is_nan() || self.score_max.is_nan() || self.score_min >= self.score_max {
            return bad("score_min must be below score_max".into());
        }
        Tolerances::new(self.epsilon, Some(self.tau), self.delta)?;
        let ClassMix { hard, easy, equal } = self.mix;
        if [hard, easy, equal].iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::InfeasibleMix("class fractions must lie in [0, 1]".into()));
        }
        if (hard + easy + equal - 1.0).abs() > 1e-9 {
            return Err(Error::InfeasibleMix(format!(
                "class fractions sum to {}, not 1",
                hard + easy + equal
            )));
        }
        if hard > 0.0 && self.jurors == 1 {
            return Err(Error::InfeasibleMix(
                "a single juror never produces incommensurable pairs".into(),
            ));
        }
        if hard > 0.0 && (self.dimensions == 1 || self.spread == 0.0) {
            return Err(Error::InfeasibleMix(
                "identical jurors never produce incommensurable pairs".into(),
            ));
        }
        Ok(())
    }

    fn class_counts(&self) -> [(PairClass, usize); 3] {
        let hard = (self.count as f64 * self.mix.hard).round() as usize;
        let equal = ((self.count as f64 * self.mix.equal).round() as usize).min(self.count - hard);
        let easy = self.count - hard - equal;
        [
            (PairClass::Hard, hard),
            (PairClass::Easy, easy),
            (PairClass::Equal, equal),
        ]
    }
}

fn simplex_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

fn normalize(w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn random_jury(rng: &mut ChaCha8Rng, c: &GeneratorConfig) -> Jury {
    let center = simplex_point(rng, c.dimensions);
    let jurors = (0..c.jurors)
        .map(|k| {
            let u = simplex_point(rng, c.dimensions);
            let w = center
                .iter()
                .zip(&u)
                .map(|(m, x)| (1.0 - c.spread) * m + c.spread * x)
                .collect();
            Juror::linear(format!("j{}", k + 1), normalize(w), c.epsilon).expect("simplex point")
        })
        .collect();
    Jury::new(jurors).expect("distinct ids")
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn random_scores(rng: &mut ChaCha8Rng, c: &GeneratorConfig) -> Vec<f64> {
    (0..c.dimensions)
        .map(|_| round2(rng.gen_range(c.score_min..=c.score_max)))
        .collect()
}

/// Scores strictly below `above` on every objective.
fn dominated_by(rng: &mut ChaCha8Rng, c: &GeneratorConfig, above: &[f64]) -> Vec<f64> {
    let span = c.score_max - c.score_min;
    above
        .iter()
        .map(|s| round2(s - span * rng.gen_range(0.02..0.15)).min(s - 0.01))
        .collect()
}

fn point(scores: Vec<f64>) -> OptionPoint {
    OptionPoint::new(String::new(), scores)
}

fn relation_of(jury: &Jury, a: &[f64], b: &[f64]) -> Relation {
    brute_force_relation(jury, &point(a.to_vec()), &point(b.to_vec()))
}

fn build_scores(
    rng: &mut ChaCha8Rng,
    c: &GeneratorConfig,
    class: PairClass,
) -> Result<(Jury, Vec<Vec<f64>>)> {
    let mut jury = random_jury(rng, c);
    let chain = c.separable && class != PairClass::Hard;
    if chain {
        // totally ordered by dominance; the designated pair is two chain
        // members (a duplicate for the equal class)
        for _ in 0..MAX_ATTEMPTS {
            let mut scores = vec![random_scores(rng, c)];
            for k in 1..c.options {
                let next = if k == 1 && class == PairClass::Equal {
                    scores[0].clone()
                } else {
                    dominated_by(rng, c, &scores[k - 1])
                };
                scores.push(next);
            }
            let (head, tail) = scores.split_at_mut(2);
            head.shuffle(rng);
            tail.shuffle(rng);
            if PairClass::of(relation_of(&jury, &scores[0], &scores[1])) == class {
                return Ok((jury, scores));
            }
        }
        return Err(Error::InfeasibleMix(format!(
            "epsilon too large for a {class:?} dominance pair"
        )));
    }
    let (a, b) = match class {
        PairClass::Equal => {
            let a = random_scores(rng, c);
            (a.clone(), a)
        }
        PairClass::Hard | PairClass::Easy => {
            let mut found = None;
            for attempt in 0..MAX_ATTEMPTS {
                if attempt > 0 && attempt % 200 == 0 {
                    jury = random_jury(rng, c);
                }
                let a = random_scores(rng, c);
                let b = random_scores(rng, c);
                if PairClass::of(relation_of(&jury, &a, &b)) == class {
                    found = Some((a, b));
                    break;
                }
            }
            found.ok_or_else(|| {
                Error::InfeasibleMix(format!(
                    "no {class:?} pair found in {MAX_ATTEMPTS} attempts; widen spread or score range"
                ))
            })?
        }
    };
    let mut scores = vec![a, b];
    for _ in 2..c.options {
        scores.push(random_scores(rng, c));
    }
    Ok((jury, scores))
}

fn context_for(rng: &mut ChaCha8Rng, c: &GeneratorConfig, class: PairClass) -> String {
    let tag = if c.separable {
        if class == PairClass::Hard {
            "career"
        } else {
            "investment"
        }
    } else {
        CONTEXT_AFFINITY[rng.gen_range(0..CONTEXT_AFFINITY.len())].0
    };
    tag.to_string()
}

/// Every scenario carries oracle ground truth and an equal-weight reference
/// model, so it can be fed straight to the meta-policy.
pub fn generate_corpus(config: &GeneratorConfig, seed: u64) -> Result<Vec<Scenario>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes: Vec<PairClass> = config
        .class_counts()
        .into_iter()
        .flat_map(|(class, n)| std::iter::repeat_n(class, n))
        .collect();
    classes.shuffle(&mut rng);

    let objectives: Vec<Objective> = (1..=config.dimensions)
        .map(|k| Objective::new(format!("f{k}")))
        .collect();
    let tolerances = Tolerances::new(config.epsilon, Some(config.tau), config.delta)?;
    classes
        .into_iter()
        .map(|class| {
            let (jury, scores) = build_scores(&mut rng, config, class)?;
            let options = scores
                .into_iter()
                .enumerate()
                .map(|(i, s)| OptionPoint::new(format!("O{}", i + 1), s))
                .collect();
            let problem = ChoiceProblem::new(objectives.clone(), options)?;
            let ground_truth = oracle_ground_truth(&problem, &jury);
            let context_tag = context_for(&mut rng, config, class);
            let reference = ScalarisedModel::linear(vec![1.0 / config.dimensions as f64; config.dimensions])?;
            Scenario::new(
                problem,
                jury,
                tolerances.clone(),
                context_tag,
                Some(ground_truth),
                Some(reference),
            )
        })
        .collect()
}

/// Class of a generated scenario: the ground truth of its designated pair.
pub fn designated_class(scenario: &Scenario) -> Option<PairClass> {
    let opts = &scenario.problem.options;
    let key = (opts[0].name.clone(), opts[1].name.clone());
    scenario
        .ground_truth
        .as_ref()?
        .get(&key)
        .map(|r| PairClass::of(*r))
}

/// Gate-1 training examples: features of the whole problem, labelled hard
/// when the designated pair is incommensurable.
pub fn labeled_features(corpus: &[Scenario]) -> Result<Vec<LabeledFeatures>> {
    corpus
        .iter()
        .map(|s| {
            let class = designated_class(s).ok_or_else(|| {
                Error::DegenerateCorpus("scenario without designated-pair ground truth".into())
            })?;
            Ok(LabeledFeatures {
                features: GateFeatures::from_problem(&s.problem, &s.context_tag)?,
                hard: class == PairClass::Hard,
            })
        })
        .collect()
}
