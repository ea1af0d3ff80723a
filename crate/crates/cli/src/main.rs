use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use hardchoice::baselines::{
    failure_demo_equality, failure_demo_magnitude, pareto_front, scalarisation_impossibility, ParetoVerdict,
    ScalarisationSearch,
};
use hardchoice::ensemble::{classification_matrix, small_improvement_test, Side, SmallImprovementOutcome};
use hardchoice::harness::format::{parse_gate1, parse_scenario, serialize_gate1, serialize_scenario};
use hardchoice::harness::generator::{generate_corpus, labeled_features, GeneratorConfig};
use hardchoice::harness::plot::emit_plot;
use hardchoice::harness::report::{
    equality_weakness_scenario, render_matrix, render_report, run_comparison, OutputFormat,
};
use hardchoice::harness::Scenario;
use hardchoice::metapolicy::{
    accuracy, holdout_split, pipeline_dispatch, train_gate1, GateOneModel, PipelineResult, Route, TrainConfig,
};
use hardchoice::model::canonical_instance;
use hardchoice::resolution::{
    pick_arbitrarily, resolve_by_abandonment, resolve_by_transformation, ResolutionReport,
};
use hardchoice::{Jury, Relation};

#[derive(Parser)]
#[command(
    name = "hardchoice",
    version,
    about = "Detect and resolve hard choices between multi-objective options"
)]
struct Cli {
    /// Output layout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Table => OutputFormat::Table,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    First,
    Second,
}

impl From<Target> for Side {
    fn from(t: Target) -> Self {
        match t {
            Target::First => Side::First,
            Target::Second => Side::Second,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Abandon,
    Transform,
    /// Seeded coin flip; the jury is left unchanged.
    Arbitrary,
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    HolocaustCake,
    Equality,
    Impossibility,
    /// Meta-policy labelling an equal pair as incommensurable.
    Weakness,
}

#[derive(Subcommand)]
enum Command {
    /// Pairwise relation matrix under the scenario's jury.
    Classify { file: PathBuf },
    /// Pareto front with a dominating witness for every other option.
    Front { file: PathBuf },
    /// Small-improvement test on one pair.
    Sift {
        file: PathBuf,
        #[arg(long, num_args = 2, value_names = ["A", "B"], required = true)]
        pair: Vec<String>,
        /// Improvement step as a fraction of each objective's range;
        /// defaults to the scenario's delta.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Resolve an incommensurable pair toward a chosen option.
    Resolve {
        file: PathBuf,
        #[arg(long, num_args = 2, value_names = ["A", "B"], required = true)]
        pair: Vec<String>,
        #[arg(long, value_enum)]
        target: Option<Target>,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the two-gate meta-policy.
    Pipeline {
        file: PathBuf,
        #[arg(long)]
        gate1: PathBuf,
        /// Defaults to the scenario's tau.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Generate a synthetic corpus with ground-truth labels.
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the gate-1 model on a generated corpus.
    TrainGate1 {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Seed for the held-out split.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.2)]
        holdout: f64,
    },
    /// Compare ensemble, scalarised, Pareto and meta-policy verdicts.
    Report {
        file: PathBuf,
        #[arg(long)]
        gate1: Option<PathBuf>,
        /// Write an SVG of indifference curves here.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Pair to plot; defaults to the first incommensurable pair.
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        pair: Option<Vec<String>>,
        /// Add a panel showing the jury after transforming toward this side.
        #[arg(long, value_enum)]
        resolve: Option<Target>,
    },
    /// Built-in demonstrations.
    Demo {
        #[arg(value_enum)]
        which: Demo,
        /// Grid size for the impossibility search.
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
    },
}

fn load(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_scenario(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_gate(path: &Path) -> Result<GateOneModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_gate1(&text).with_context(|| format!("parsing {}", path.display()))
}

fn weights_text(jury: &Jury) -> String {
    jury.jurors()
        .iter()
        .map(|j| {
            let w: Vec<String> = j.weights.as_slice().iter().map(|x| format!("{x}")).collect();
            format!("{} ({})", j.id, w.join(", "))
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn classify(file: &Path, format: OutputFormat) -> Result<String> {
    let s = load(file)?;
    let m = classification_matrix(&s.jury, &s.problem)?;
    Ok(render_matrix(&m, format))
}

fn front(file: &Path, format: OutputFormat) -> Result<String> {
    let s = load(file)?;
    let r = pareto_front(&s.problem);
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            out.push_str("option,on_front,dominated_by\n");
            for o in &s.problem.options {
                let by = r.dominated.get(&o.name).map_or("", String::as_str);
                let _ = writeln!(out, "{},{},{}", o.name, r.on_front(&o.name), by);
            }
        }
        OutputFormat::Table => {
            let _ = writeln!(out, "front: {}", r.front.join(", "));
            for (loser, by) in &r.dominated {
                let _ = writeln!(out, "{loser} dominated by {by}");
            }
        }
    }
    Ok(out)
}

fn sift(file: &Path, pair: &[String], delta: Option<f64>, format: OutputFormat) -> Result<String> {
    let s = load(file)?;
    let delta = delta.unwrap_or(s.tolerances.delta);
    let a = s.problem.option(&pair[0])?;
    let b = s.problem.option(&pair[1])?;
    let outcome = small_improvement_test(&s.jury, &s.problem, a, b, delta)?;
    let (status, reason) = match &outcome {
        SmallImprovementOutcome::ConfirmedIncommensurable => ("confirmed", String::new()),
        SmallImprovementOutcome::NotConfirmed(r) => ("not_confirmed", r.to_string()),
    };
    Ok(match format {
        OutputFormat::Csv => format!(
            "first,second,delta,outcome,reason\n{},{},{delta},{status},{reason}\n",
            a.name, b.name
        ),
        OutputFormat::Table if reason.is_empty() => {
            format!(
                "{} vs {} at delta {delta}: confirmed incommensurable\n",
                a.name, b.name
            )
        }
        OutputFormat::Table => format!(
            "{} vs {} at delta {delta}: not confirmed ({reason})\n",
            a.name, b.name
        ),
    })
}

fn render_resolution(r: &ResolutionReport, chosen: Option<&str>, format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            out.push_str("juror,verdict_before,verdict_after,perturbation,weights_after\n");
            for (id, dist) in &r.perturbation {
                let before = r
                    .before
                    .verdict_of(id)
                    .map_or("-".into(), |v| format!("{:?}", v.verdict));
                let after = r
                    .after
                    .verdict_of(id)
                    .map_or("-".into(), |v| format!("{:?}", v.verdict));
                let w = r.jury_after.juror(id).map_or(String::new(), |j| {
                    j.weights
                        .as_slice()
                        .iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(";")
                });
                let _ = writeln!(out, "{id},{before},{after},{dist},{w}");
            }
            for id in &r.removed {
                let before = r
                    .before
                    .verdict_of(id)
                    .map_or("-".into(), |v| format!("{:?}", v.verdict));
                let _ = writeln!(out, "{id},{before},removed,,");
            }
        }
        OutputFormat::Table => {
            let _ = writeln!(out, "method: {}", r.method.as_str());
            if let Some(c) = chosen {
                let _ = writeln!(out, "chosen: {c}");
            }
            let _ = writeln!(out, "before: {}", r.before.relation.as_str());
            let _ = writeln!(out, "after: {}", r.after.relation.as_str());
            let _ = writeln!(out, "jury after: {}", weights_text(&r.jury_after));
            if !r.removed.is_empty() {
                let _ = writeln!(out, "removed: {}", r.removed.join(", "));
            }
            for (id, dist) in &r.perturbation {
                let _ = writeln!(out, "perturbation {id}: {dist}");
            }
        }
    }
    out
}

fn resolve(
    file: &Path,
    pair: &[String],
    target: Option<Target>,
    method: Method,
    margin: f64,
    seed: u64,
    format: OutputFormat,
) -> Result<String> {
    let s = load(file)?;
    let a = s.problem.option(&pair[0])?;
    let b = s.problem.option(&pair[1])?;
    let side = |t: Option<Target>| -> Result<Side> {
        match t {
            Some(t) => Ok(t.into()),
            None => bail!("--target is required for this method"),
        }
    };
    let (report, chosen) = match method {
        Method::Abandon => (resolve_by_abandonment(&s.jury, a, b, side(target)?)?, None),
        Method::Transform => (
            resolve_by_transformation(&s.jury, a, b, side(target)?, margin)?,
            None,
        ),
        Method::Arbitrary => {
            let (c, r) = pick_arbitrarily(&s.jury, a, b, seed)?;
            (r, Some(c))
        }
    };
    Ok(render_resolution(&report, chosen.as_deref(), format))
}

fn pipeline(file: &Path, gate1: &Path, tau: Option<f64>, format: OutputFormat) -> Result<String> {
    let s = load(file)?;
    let g = load_gate(gate1)?;
    let tau = match tau.or(s.tolerances.tau) {
        Some(t) => t,
        None => return Err(hardchoice::Error::MissingTau.into()),
    };
    let Some(reference) = &s.reference_model else {
        bail!("scenario has no [reference_model] section");
    };
    let o = pipeline_dispatch(&g, reference, &s.jury, &s.problem, &s.context_tag, tau)?;
    let route = match o.route {
        Route::ScalarisedRoute => "scalarised",
        Route::ParetoRoute => "pareto",
    };
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            out.push_str("kind,first,second,value\n");
            let _ = writeln!(out, "route,,,{route}");
            let _ = writeln!(out, "gate1_probability,,,{}", o.trace.gate1_probability);
            for (a, b, m) in &o.trace.gate2_margins {
                let _ = writeln!(out, "gate2_margin,{a},{b},{m}");
            }
            match &o.result {
                PipelineResult::Ranking(r) => {
                    for (rank, g) in r.groups.iter().enumerate() {
                        for m in &g.members {
                            let _ = writeln!(out, "rank,{m},,{}", rank + 1);
                        }
                    }
                }
                PipelineResult::Front(f) => {
                    for m in f {
                        let _ = writeln!(out, "front,{m},,");
                    }
                }
            }
            for l in &o.labels {
                let _ = writeln!(
                    out,
                    "incommensurable,{},{},{}",
                    l.first,
                    l.second,
                    l.ensemble.as_str()
                );
            }
        }
        OutputFormat::Table => {
            let _ = writeln!(out, "route: {route}");
            let _ = writeln!(out, "gate-1 probability: {:.6}", o.trace.gate1_probability);
            for (a, b, m) in &o.trace.gate2_margins {
                let _ = writeln!(out, "gate-2 margin {a}/{b}: {m}");
            }
            match &o.result {
                PipelineResult::Ranking(r) => {
                    let groups: Vec<String> = r.groups.iter().map(|g| g.members.join(" = ")).collect();
                    let _ = writeln!(out, "ranking: {}", groups.join(" > "));
                }
                PipelineResult::Front(f) => {
                    let _ = writeln!(out, "front: {}", f.join(", "));
                }
            }
            for l in &o.labels {
                let note = if l.mislabels_equality() {
                    " (ensemble says equal)"
                } else {
                    ""
                };
                let _ = writeln!(
                    out,
                    "labelled incommensurable: {}/{}, ensemble {}{note}",
                    l.first,
                    l.second,
                    l.ensemble.as_str()
                );
            }
        }
    }
    Ok(out)
}

fn gen(config: &Path, seed: u64, out: &Path) -> Result<String> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg = GeneratorConfig::parse(&text)?;
    let corpus = generate_corpus(&cfg, seed)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for (i, s) in corpus.iter().enumerate() {
        let path = out.join(format!("scenario_{i:05}.txt"));
        fs::write(&path, serialize_scenario(s)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(format!("wrote {} scenarios to {}\n", corpus.len(), out.display()))
}

fn read_corpus(dir: &Path) -> Result<Vec<Scenario>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "txt"));
    paths.sort();
    paths.iter().map(|p| load(p)).collect()
}

fn train(corpus: &Path, out: &Path, seed: u64, holdout: f64, format: OutputFormat) -> Result<String> {
    if !(0.0..1.0).contains(&holdout) {
        bail!("--holdout must lie in [0, 1)");
    }
    let scenarios = read_corpus(corpus)?;
    let examples = labeled_features(&scenarios)?;
    let (train_set, held) = holdout_split(&examples, holdout, seed);
    let model = train_gate1(&train_set, &TrainConfig::default())?;
    fs::write(out, serialize_gate1(&model)).with_context(|| format!("writing {}", out.display()))?;
    let train_acc = accuracy(&model, &train_set);
    let held_acc = if held.is_empty() {
        f64::NAN
    } else {
        accuracy(&model, &held)
    };
    Ok(match format {
        OutputFormat::Csv => format!(
            "train_size,held_out_size,train_accuracy,held_out_accuracy\n{},{},{train_acc},{held_acc}\n",
            train_set.len(),
            held.len()
        ),
        OutputFormat::Table => format!(
            "trained on {} scenarios, accuracy {train_acc:.4}\nheld-out {} scenarios, accuracy {held_acc:.4}\nmodel written to {}\n",
            train_set.len(),
            held.len(),
            out.display()
        ),
    })
}

fn report(
    file: &Path,
    gate1: Option<&Path>,
    plot: Option<&Path>,
    pair: Option<&[String]>,
    resolve: Option<Target>,
    format: OutputFormat,
) -> Result<String> {
    let s = load(file)?;
    let gate = gate1.map(load_gate).transpose()?;
    let r = run_comparison(&s, gate.as_ref())?;
    let mut out = render_report(&r, format);
    if let Some(path) = plot {
        let (a, b) = match pair {
            Some(p) => (p[0].clone(), p[1].clone()),
            None => r
                .rows
                .iter()
                .find(|row| row.ensemble.relation == Relation::Incommensurable)
                .map(|row| (row.first.clone(), row.second.clone()))
                .unwrap_or_else(|| {
                    (
                        s.problem.options[0].name.clone(),
                        s.problem.options[1].name.clone(),
                    )
                }),
        };
        let transformed = match resolve {
            Some(t) => {
                let res = resolve_by_transformation(
                    &s.jury,
                    s.problem.option(&a)?,
                    s.problem.option(&b)?,
                    t.into(),
                    0.0,
                )?;
                Some(res.jury_after)
            }
            None => None,
        };
        let svg = emit_plot(&s, &a, &b, transformed.as_ref())?;
        fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
        if format == OutputFormat::Table {
            let _ = writeln!(out, "\nplot of {a}/{b} written to {}", path.display());
        }
    }
    Ok(out)
}

fn demo(which: Demo, grid: usize, format: OutputFormat) -> Result<String> {
    let mut out = String::new();
    let csv = format == OutputFormat::Csv;
    match which {
        Demo::HolocaustCake => {
            let d = failure_demo_magnitude();
            if csv {
                out.push_str("front,ensemble,disagreement\n");
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    d.pareto.front.join(";"),
                    d.ensemble.relation.as_str(),
                    d.disagreement
                );
            } else {
                for o in &d.problem.options {
                    let _ = writeln!(out, "{} = {:?}", o.name, o.scores);
                }
                let _ = writeln!(out, "pareto front: {}", d.pareto.front.join(", "));
                let _ = writeln!(out, "ensemble: {}", d.ensemble.relation.as_str());
                let _ = writeln!(out, "disagreement: {}", d.disagreement);
            }
        }
        Demo::Equality => {
            let d = failure_demo_equality();
            let verdict = |v: ParetoVerdict| format!("{v:?}");
            if csv {
                out.push_str("pair,pareto_verdict,both_on_front,ensemble\n");
                for (label, o) in [("identical", &d.identical), ("hard", &d.hard)] {
                    let both = o.problem.options.iter().all(|x| o.pareto.on_front(&x.name));
                    let _ = writeln!(
                        out,
                        "{label},{},{both},{}",
                        verdict(o.verdict),
                        o.ensemble.relation.as_str()
                    );
                }
            } else {
                for (label, o) in [("identical", &d.identical), ("hard", &d.hard)] {
                    let names: Vec<&str> = o.problem.options.iter().map(|x| x.name.as_str()).collect();
                    let _ = writeln!(
                        out,
                        "{label} pair {}: pareto {} (front {}), ensemble {}",
                        names.join("/"),
                        verdict(o.verdict),
                        o.pareto.front.join(", "),
                        o.ensemble.relation.as_str()
                    );
                }
                let _ = writeln!(out, "pareto output indistinguishable: {}", d.indistinguishable);
            }
        }
        Demo::Impossibility => {
            let (problem, jury) = canonical_instance();
            let result = scalarisation_impossibility(&problem, &jury, grid)?;
            let text = match &result {
                ScalarisationSearch::Impossible(n) => format!("impossible,{n},"),
                ScalarisationSearch::Witnessed(w) => format!("witnessed,{grid},{}", w[0]),
            };
            if csv {
                out.push_str("result,grid,w1\n");
                let _ = writeln!(out, "{text}");
            } else {
                match result {
                    ScalarisationSearch::Impossible(n) => {
                        let _ = writeln!(
                            out,
                            "no single weighting out of {n} reproduces the jury's relations"
                        );
                    }
                    ScalarisationSearch::Witnessed(w) => {
                        let _ = writeln!(out, "weighting {w:?} reproduces the jury's relations");
                    }
                }
            }
        }
        Demo::Weakness => {
            let s = equality_weakness_scenario();
            let gate = GateOneModel::new(4.0, 0.0, 6.0, -4.0, 0.5)?;
            let r = run_comparison(&s, Some(&gate))?;
            out = render_report(&r, format);
        }
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<String> {
    let format: OutputFormat = cli.format.into();
    match cli.command {
        Command::Classify { file } => classify(&file, format),
        Command::Front { file } => front(&file, format),
        Command::Sift { file, pair, delta } => sift(&file, &pair, delta, format),
        Command::Resolve {
            file,
            pair,
            target,
            method,
            margin,
            seed,
        } => resolve(&file, &pair, target, method, margin, seed, format),
        Command::Pipeline { file, gate1, tau } => pipeline(&file, &gate1, tau, format),
        Command::Gen { config, seed, out } => gen(&config, seed, &out),
        Command::TrainGate1 {
            corpus,
            out,
            seed,
            holdout,
        } => train(&corpus, &out, seed, holdout, format),
        Command::Report {
            file,
            gate1,
            plot,
            pair,
            resolve,
        } => report(
            &file,
            gate1.as_deref(),
            plot.as_deref(),
            pair.as_deref(),
            resolve,
            format,
        ),
        Command::Demo { which, grid } => demo(which, grid, format),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
