//! Side-by-side pair classifications from the ensemble, a single
//! scalarisation, Pareto dominance and the meta-policy pipeline.

use std::fmt::Write as _;

use crate::baselines::{pareto_front, pareto_verdict, scalarised_rank, ParetoVerdict, ScalarisedModel};
use crate::ensemble::{jury_classify, ClassificationTrace, RelationMatrix};
use crate::error::Result;
use crate::harness::Scenario;
use crate::metapolicy::{pipeline_dispatch, GateOneModel, PipelineOutcome, PipelineResult, Route};
use crate::model::{ChoiceProblem, Juror, Jury, Objective, OptionPoint, Relation, Tolerances};

/// What one method says about an ordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodVerdict {
    PreferredFirst,
    PreferredSecond,
    Tie,
    Incommensurable,
    /// Pareto output: neither dominates. Cannot tell ties from hard pairs.
    NonDominated,
}

impl MethodVerdict {
    pub fn from_relation(r: Relation) -> Self {
        match r {
            Relation::PreferredFirst => MethodVerdict::PreferredFirst,
            Relation::PreferredSecond => MethodVerdict::PreferredSecond,
            Relation::Equal => MethodVerdict::Tie,
            Relation::Incommensurable => MethodVerdict::Incommensurable,
        }
    }

    pub fn from_pareto(v: ParetoVerdict) -> Self {
        match v {
            ParetoVerdict::FirstDominates => MethodVerdict::PreferredFirst,
            ParetoVerdict::SecondDominates => MethodVerdict::PreferredSecond,
            ParetoVerdict::MutuallyNonDominated => MethodVerdict::NonDominated,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MethodVerdict::PreferredFirst => "first",
            MethodVerdict::PreferredSecond => "second",
            MethodVerdict::Tie => "tie",
            MethodVerdict::Incommensurable => "incommensurable",
            MethodVerdict::NonDominated => "non_dominated",
        }
    }

    /// Two verdicts agree when they are equal, or when one is the Pareto
    /// non-answer and the other is a tie or incommensurable.
    pub fn agrees_with(self, other: Self) -> bool {
        use MethodVerdict::*;
        self == other
            || matches!(
                (self, other),
                (NonDominated, Tie | Incommensurable) | (Tie | Incommensurable, NonDominated)
            )
    }
}

pub const METHODS: [&str; 4] = ["ensemble", "scalarised", "pareto", "metapolicy"];

#[derive(Debug, Clone, PartialEq)]
pub struct PairRow {
    pub first: String,
    pub second: String,
    pub ensemble: ClassificationTrace,
    pub scalarised: MethodVerdict,
    pub pareto: MethodVerdict,
    pub first_on_front: bool,
    pub second_on_front: bool,
    pub metapolicy: Option<MethodVerdict>,
}

impl PairRow {
    pub fn verdicts(&self) -> [Option<MethodVerdict>; 4] {
        [
            Some(MethodVerdict::from_relation(self.ensemble.relation)),
            Some(self.scalarised),
            Some(self.pareto),
            self.metapolicy,
        ]
    }

    /// Methods (by index into [`METHODS`]) disagreeing with the ensemble.
    pub fn dissenters(&self) -> Vec<&'static str> {
        let v = self.verdicts();
        let reference = v[0].expect("ensemble always present");
        (1..4)
            .filter(|&m| v[m].is_some_and(|x| !x.agrees_with(reference)))
            .map(|m| METHODS[m])
            .collect()
    }
}

/// Failure-mode observations collected while filling the tables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Findings {
    /// Always zero: a scalarisation is complete.
    pub scalarised_incommensurable: usize,
    /// Ensemble-hard pairs Pareto reports exactly as it reports a tie.
    pub pareto_blind_to_hardness: Vec<(String, String)>,
    /// Pairs with a clear ensemble preference that Pareto leaves open.
    pub pareto_ignores_magnitude: Vec<(String, String)>,
    /// Pairs the meta-policy labels incommensurable but the ensemble
    /// finds equal.
    pub metapolicy_equal_mislabels: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub scalarised_model: ScalarisedModel,
    pub front: Vec<String>,
    pub rows: Vec<PairRow>,
    pub pipeline: Option<PipelineOutcome>,
    /// `agreement[i][j]`: pairs on which methods i and j agree; `None`
    /// where a method did not run.
    pub agreement: [[Option<usize>; 4]; 4],
    pub findings: Findings,
}

impl ComparisonReport {
    pub fn disagreement_rows(&self) -> impl Iterator<Item = &PairRow> {
        self.rows.iter().filter(|r| !r.dissenters().is_empty())
    }

    pub fn row(&self, a: &str, b: &str) -> Option<&PairRow> {
        self.rows.iter().find(|r| r.first == a && r.second == b)
    }
}

fn pipeline_verdict(outcome: &PipelineOutcome, a: &OptionPoint, b: &OptionPoint) -> Result<MethodVerdict> {
    Ok(match &outcome.result {
        PipelineResult::Ranking(r) => {
            MethodVerdict::from_relation(r.relation(&a.name, &b.name).expect("ranking covers every option"))
        }
        PipelineResult::Front(_) => {
            let labelled = outcome.labels.iter().any(|l| {
                (l.first == a.name && l.second == b.name) || (l.first == b.name && l.second == a.name)
            });
            if labelled {
                MethodVerdict::Incommensurable
            } else {
                MethodVerdict::from_pareto(pareto_verdict(a, b)?)
            }
        }
    })
}

/// Fills every method table for `scenario`. The meta-policy runs only when
/// a gate model is given and the scenario carries a reference model and a
/// tau. Without a reference model the scalarised column uses equal weights.
pub fn run_comparison(scenario: &Scenario, gate1: Option<&GateOneModel>) -> Result<ComparisonReport> {
    let problem = &scenario.problem;
    let scalarised_model = match &scenario.reference_model {
        Some(m) => m.clone(),
        None => ScalarisedModel::linear(vec![1.0 / problem.dim() as f64; problem.dim()])?,
    };
    let ranking = scalarised_rank(&scalarised_model, problem)?;
    let front = pareto_front(problem);
    let pipeline = match (gate1, &scenario.reference_model, scenario.tolerances.tau) {
        (Some(g1), Some(reference), Some(tau)) => Some(pipeline_dispatch(
            g1,
            reference,
            &scenario.jury,
            problem,
            &scenario.context_tag,
            tau,
        )?),
        _ => None,
    };

    let mut rows = Vec::new();
    let mut findings = Findings::default();
    let opts = &problem.options;
    for i in 0..opts.len() {
        for j in i + 1..opts.len() {
            let (a, b) = (&opts[i], &opts[j]);
            let ensemble = jury_classify(&scenario.jury, a, b)?;
            let scalarised = MethodVerdict::from_relation(
                ranking
                    .relation(&a.name, &b.name)
                    .expect("ranking covers every option"),
            );
            let pareto = MethodVerdict::from_pareto(pareto_verdict(a, b)?);
            let metapolicy = pipeline.as_ref().map(|p| pipeline_verdict(p, a, b)).transpose()?;
            let key = (a.name.clone(), b.name.clone());
            if scalarised == MethodVerdict::Incommensurable {
                findings.scalarised_incommensurable += 1;
            }
            if pareto == MethodVerdict::NonDominated {
                match ensemble.relation {
                    Relation::Incommensurable => findings.pareto_blind_to_hardness.push(key.clone()),
                    Relation::PreferredFirst | Relation::PreferredSecond => {
                        findings.pareto_ignores_magnitude.push(key.clone())
                    }
                    Relation::Equal => {}
                }
            }
            if metapolicy == Some(MethodVerdict::Incommensurable) && ensemble.relation == Relation::Equal {
                findings.metapolicy_equal_mislabels.push(key);
            }
            rows.push(PairRow {
                first: a.name.clone(),
                second: b.name.clone(),
                first_on_front: front.on_front(&a.name),
                second_on_front: front.on_front(&b.name),
                ensemble,
                scalarised,
                pareto,
                metapolicy,
            });
        }
    }

    let mut agreement = [[None; 4]; 4];
    for x in 0..4 {
        for y in 0..4 {
            if x == 3 && pipeline.is_none() || y == 3 && pipeline.is_none() {
                continue;
            }
            agreement[x][y] = Some(
                rows.iter()
                    .filter(|r| {
                        let v = r.verdicts();
                        v[x].zip(v[y]).is_some_and(|(p, q)| p.agrees_with(q))
                    })
                    .count(),
            );
        }
    }

    Ok(ComparisonReport {
        scalarised_model,
        front: front.front,
        rows,
        pipeline,
        agreement,
        findings,
    })
}

/// Output layout for reports and matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Csv,
}

fn cell(v: Option<MethodVerdict>) -> &'static str {
    v.map_or("-", MethodVerdict::as_str)
}

pub fn render_report(report: &ComparisonReport, format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            out.push_str(
                "first,second,ensemble,scalarised,pareto,metapolicy,first_on_front,second_on_front,dissent\n",
            );
            for r in &report.rows {
                let v = r.verdicts();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.first,
                    r.second,
                    cell(v[0]),
                    cell(v[1]),
                    cell(v[2]),
                    cell(v[3]),
                    r.first_on_front,
                    r.second_on_front,
                    r.dissenters().join(";")
                );
            }
        }
        OutputFormat::Table => {
            let _ = writeln!(out, "pareto front: {}", report.front.join(", "));
            let _ = writeln!(
                out,
                "scalarised weights: {:?}",
                report.scalarised_model.weights.as_slice()
            );
            if let Some(p) = &report.pipeline {
                let route = match p.route {
                    Route::ScalarisedRoute => "scalarised",
                    Route::ParetoRoute => "pareto",
                };
                let _ = writeln!(
                    out,
                    "metapolicy route: {route} (gate-1 probability {:.4})",
                    p.trace.gate1_probability
                );
            }
            out.push('\n');
            let _ = writeln!(
                out,
                "{:<10} {:<10} {:<16} {:<16} {:<14} {:<16} dissent",
                "first", "second", "ensemble", "scalarised", "pareto", "metapolicy"
            );
            for r in &report.rows {
                let v = r.verdicts();
                let _ = writeln!(
                    out,
                    "{:<10} {:<10} {:<16} {:<16} {:<14} {:<16} {}",
                    r.first,
                    r.second,
                    cell(v[0]),
                    cell(v[1]),
                    cell(v[2]),
                    cell(v[3]),
                    r.dissenters().join(",")
                );
            }
            out.push_str("\nagreement (pairs):\n");
            let _ = writeln!(out, "{:<12}{}", "", METHODS.map(|m| format!("{m:>12}")).concat());
            for (x, name) in METHODS.iter().enumerate() {
                let cells: String = report.agreement[x]
                    .iter()
                    .map(|c| format!("{:>12}", c.map_or("-".to_string(), |n| n.to_string())))
                    .collect();
                let _ = writeln!(out, "{name:<12}{cells}");
            }
            let f = &report.findings;
            let pairs = |v: &[(String, String)]| {
                v.iter()
                    .map(|(a, b)| format!("({a},{b})"))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            out.push_str("\nfindings:\n");
            let _ = writeln!(
                out,
                "  scalarised incommensurable verdicts: {}",
                f.scalarised_incommensurable
            );
            let _ = writeln!(
                out,
                "  pareto blind to hardness: {}",
                pairs(&f.pareto_blind_to_hardness)
            );
            let _ = writeln!(
                out,
                "  pareto ignores magnitude: {}",
                pairs(&f.pareto_ignores_magnitude)
            );
            let _ = writeln!(
                out,
                "  metapolicy equal mislabels: {}",
                pairs(&f.metapolicy_equal_mislabels)
            );
        }
    }
    out
}

/// Pairwise relation matrix, rows labelled by the first option.
pub fn render_matrix(matrix: &RelationMatrix, format: OutputFormat) -> String {
    let mut out = String::new();
    let n = matrix.len();
    match format {
        OutputFormat::Csv => {
            let _ = writeln!(out, ",{}", matrix.names.join(","));
            for i in 0..n {
                let cells: Vec<&str> = (0..n).map(|j| matrix.get(i, j).as_str()).collect();
                let _ = writeln!(out, "{},{}", matrix.names[i], cells.join(","));
            }
        }
        OutputFormat::Table => {
            let width = matrix
                .names
                .iter()
                .map(|s| s.chars().count())
                .chain(std::iter::once("preferred_second".len()))
                .max()
                .unwrap_or(0)
                + 2;
            let _ = write!(out, "{:<width$}", "");
            for name in &matrix.names {
                let _ = write!(out, "{name:<width$}");
            }
            out.push('\n');
            for i in 0..n {
                let _ = write!(out, "{:<width$}", matrix.names[i]);
                for j in 0..n {
                    let _ = write!(out, "{:<width$}", matrix.get(i, j).as_str());
                }
                out.push('\n');
            }
        }
    }
    out
}

/// A scenario on which the meta-policy labels an exactly-equal front pair
/// incommensurable: two identical options plus a trade-off option, in a
/// context the gate considers hard.
pub fn equality_weakness_scenario() -> Scenario {
    let problem = ChoiceProblem::new(
        vec![Objective::new("income"), Objective::new("excitement")],
        vec![
            OptionPoint::new("X", vec![5.0, 5.0]),
            OptionPoint::new("X'", vec![5.0, 5.0]),
            OptionPoint::new("Y", vec![8.0, 1.0]),
        ],
    )
    .expect("valid");
    let jury = Jury::new(vec![
        Juror::linear("alpha", vec![0.8, 0.2], crate::model::DEFAULT_EPSILON).expect("valid"),
        Juror::linear("beta", vec![0.3, 0.7], crate::model::DEFAULT_EPSILON).expect("valid"),
    ])
    .expect("valid");
    let ground_truth = crate::harness::oracle_ground_truth(&problem, &jury);
    Scenario::new(
        problem,
        jury,
        Tolerances::new(crate::model::DEFAULT_EPSILON, Some(0.25), 0.01).expect("valid"),
        "career".into(),
        Some(ground_truth),
        Some(ScalarisedModel::linear(vec![0.5, 0.5]).expect("valid")),
    )
    .expect("valid")
}
