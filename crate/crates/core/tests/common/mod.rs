#![allow(dead_code)]

use hardchoice::{ChoiceProblem, Juror, Jury, Objective, OptionPoint, UtilityForm};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point on the simplex; with `sparse`, each coordinate is zeroed
/// with probability 1/4 (at least one stays positive).
pub fn weights(rng: &mut ChaCha8Rng, d: usize, sparse: bool) -> Vec<f64> {
    loop {
        let mut raw: Vec<f64> = (0..d)
            .map(|_| -rng.gen_range(f64::EPSILON..1.0f64).ln())
            .collect();
        if sparse {
            for x in raw.iter_mut() {
                if rng.gen_bool(0.25) {
                    *x = 0.0;
                }
            }
        }
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            return raw.iter().map(|x| x / total).collect();
        }
    }
}

pub fn juror(rng: &mut ChaCha8Rng, id: String, d: usize, form: UtilityForm, epsilon: f64) -> Juror {
    let sparse = form == UtilityForm::Linear && rng.gen_bool(0.2);
    Juror::new(id, weights(rng, d, sparse), form, epsilon).unwrap()
}

pub fn linear_jury(rng: &mut ChaCha8Rng, size: usize, d: usize, epsilon: f64) -> Jury {
    Jury::new(
        (0..size)
            .map(|k| juror(rng, format!("j{k}"), d, UtilityForm::Linear, epsilon))
            .collect(),
    )
    .unwrap()
}

pub fn mixed_jury(rng: &mut ChaCha8Rng, size: usize, d: usize) -> Jury {
    Jury::new(
        (0..size)
            .map(|k| {
                let form = if rng.gen_bool(0.3) {
                    UtilityForm::CobbDouglas
                } else {
                    UtilityForm::Linear
                };
                let eps = [0.0, 1e-9, 0.05][rng.gen_range(0..3)];
                juror(rng, format!("j{k}"), d, form, eps)
            })
            .collect(),
    )
    .unwrap()
}

/// Scores drawn from a small integer grid so that ties and dominance are
/// common, shifted by `floor`.
pub fn grid_option(rng: &mut ChaCha8Rng, name: String, d: usize, floor: f64) -> OptionPoint {
    OptionPoint::new(name, (0..d).map(|_| floor + rng.gen_range(0..6) as f64).collect())
}

pub fn continuous_option(rng: &mut ChaCha8Rng, name: String, d: usize, floor: f64) -> OptionPoint {
    OptionPoint::new(name, (0..d).map(|_| floor + rng.gen_range(0.0..10.0)).collect())
}

/// Random problem with positive scores, mixing grid and continuous options
/// and occasionally duplicating a score vector.
pub fn problem(rng: &mut ChaCha8Rng, n: usize, d: usize) -> ChoiceProblem {
    let grid = rng.gen_bool(0.5);
    let mut options: Vec<OptionPoint> = Vec::with_capacity(n);
    for i in 0..n {
        let name = format!("o{i}");
        let o = if i > 0 && rng.gen_bool(0.1) {
            OptionPoint::new(name, options[rng.gen_range(0..i)].scores.clone())
        } else if grid {
            grid_option(rng, name, d, 1.0)
        } else {
            continuous_option(rng, name, d, 0.5)
        };
        options.push(o);
    }
    ChoiceProblem::new((0..d).map(|k| Objective::new(format!("f{k}"))).collect(), options).unwrap()
}

/// Coordinatewise dominance written out longhand.
pub fn oracle_dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for k in 0..a.len() {
        if a[k] < b[k] {
            return false;
        }
        if a[k] > b[k] {
            strictly = true;
        }
    }
    strictly
}

/// Names of options no other option dominates, in problem order.
pub fn oracle_front(problem: &ChoiceProblem) -> Vec<String> {
    let opts = &problem.options;
    opts.iter()
        .filter(|o| !opts.iter().any(|p| oracle_dominates(&p.scores, &o.scores)))
        .map(|o| o.name.clone())
        .collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
