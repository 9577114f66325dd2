//! The batch commands behind the CLI: register, reshape, evaluate and
//! generate. Each has an in-memory form and a file form.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::agents::{orchestrate, AgentError, AgentKind, AgentReport, CheckOutcome, Orchestration, RefinementState};
use crate::config::{Config, InterpreterKind};
use crate::constraint::{
    interpret_command_external, interpret_command_template, parse_interpreter_document, serialize_constraint_set,
    ChatClient, ConstraintError, HttpChatClient, InterpreterResult,
};
use crate::dataset::{generate_samples, read_dataset, write_dataset, DatasetError, Manifest, Sample, SampleKind};
use crate::geometry::SceneObject;
use crate::io::{self, InputError, SceneDocument};
use crate::optimizer::OptimizeError;
use crate::registration::{register_cloud, RegistrationParams};
use crate::trajectory::{denormalize, normalize_scene, resample, NormalizationTransform, Trajectory, TrajectoryError};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_BEST_EFFORT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("interpretation failed: {0}")]
    Interpretation(#[from] ConstraintError),
    #[error("invalid trajectory: {0}")]
    Trajectory(#[from] TrajectoryError),
    #[error("invalid constraint ordering {0:?}")]
    Ordering(Vec<usize>),
    #[error("optimizer failed: {0}")]
    Numeric(OptimizeError),
    #[error("no point clouds in {0}")]
    NoClouds(String),
    #[error("no cloud could be registered: {}", .0.join("; "))]
    NothingRegistered(Vec<String>),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

impl From<AgentError> for PipelineError {
    fn from(e: AgentError) -> Self {
        match e {
            AgentError::InvalidOrdering(o) => PipelineError::Ordering(o),
            AgentError::Optimize(e) => PipelineError::Numeric(e),
        }
    }
}

impl PipelineError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Numeric(_) => EXIT_NUMERIC,
            _ => EXIT_INPUT,
        }
    }
}

/// Where the constraints of a reshape come from.
#[derive(Debug, Clone, PartialEq)]
pub enum CommandSource {
    /// Natural-language text for the configured interpreter.
    Text(String),
    /// A constraint document, bypassing any interpreter.
    Document(String),
}

/// Turn a command into constraints against `scene`. `client` replaces the
/// configured HTTP endpoint when the external interpreter is selected.
pub fn interpret(
    source: &CommandSource,
    scene: &[SceneObject],
    config: &Config,
    client: Option<&dyn ChatClient>,
) -> Result<InterpreterResult, ConstraintError> {
    match source {
        CommandSource::Document(text) => parse_interpreter_document(text, scene),
        CommandSource::Text(text) => match config.interpreter.kind {
            InterpreterKind::Template => interpret_command_template(text, scene),
            InterpreterKind::External => match client {
                Some(c) => interpret_command_external(text, scene, c),
                None => interpret_command_external(text, scene, &HttpChatClient::new(config.interpreter.endpoint())),
            },
        },
    }
}

/// Objects of `doc` in the normalized frame of `transform`. Entries without
/// an influence radius get the configured default rule.
pub fn normalized_objects(doc: &SceneDocument, transform: &NormalizationTransform, config: &Config) -> Vec<SceneObject> {
    doc.objects(|_| 1.0)
        .iter()
        .zip(&doc.objects)
        .map(|(o, entry)| {
            let mut n = transform.normalize_object(o);
            if entry.influence_radius.is_none() {
                n.influence_radius = config.influence.radius(&n.primitive);
            }
            n
        })
        .collect()
}

/// Normalize trajectory and scene together, filling default radii in the
/// normalized frame.
pub fn prepare_scene(
    doc: &SceneDocument,
    trajectory: &Trajectory,
    config: &Config,
) -> Result<(Trajectory, Vec<SceneObject>, NormalizationTransform), PipelineError> {
    let (traj, _, transform) = normalize_scene(trajectory, &doc.objects(|_| 1.0))?;
    Ok((traj, normalized_objects(doc, &transform, config), transform))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub agent: AgentKind,
    pub round: usize,
    pub passed: usize,
    pub total: usize,
    pub fully_passed: bool,
    pub mean_deviation: f64,
    pub outcomes: Vec<CheckOutcome>,
}

impl From<&AgentReport> for CandidateSummary {
    fn from(r: &AgentReport) -> Self {
        CandidateSummary {
            agent: r.agent,
            round: r.round,
            passed: r.passed_count(),
            total: r.outcomes.len(),
            fully_passed: r.fully_passed(),
            mean_deviation: r.candidate.mean_deviation(),
            outcomes: r.outcomes.clone(),
        }
    }
}

/// Everything written next to a reshaped trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReshapeReport {
    pub command: String,
    pub constraints: Value,
    pub success: bool,
    pub exit_code: i32,
    pub normalization: NormalizationTransform,
    pub best: CandidateSummary,
    pub rounds: Vec<Vec<CandidateSummary>>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReshapeOutput {
    /// In the input's units and resolution; its own reference.
    pub trajectory: Trajectory,
    pub report: ReshapeReport,
    pub orchestration: Orchestration,
}

impl ReshapeOutput {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code
    }
}

/// Normalize, resample to the working resolution, interpret, orchestrate,
/// then map the best candidate back to the input's units and resolution.
pub fn cmd_reshape(
    scene: &SceneDocument,
    trajectory: &Trajectory,
    source: &CommandSource,
    config: &Config,
    client: Option<&dyn ChatClient>,
) -> Result<ReshapeOutput, PipelineError> {
    let (normalized, objects, transform) = prepare_scene(scene, trajectory, config)?;
    let working = if normalized.len() == config.resolution {
        normalized.rebased()
    } else {
        resample(&normalized, config.resolution)?
    };
    let interpretation = interpret(source, &objects, config, client)?;
    let state = RefinementState::from_interpretation(&interpretation, &objects)?;
    let set = &interpretation.constraint_set;
    let orchestration = orchestrate(
        &working,
        set,
        &objects,
        &config.optimizer,
        state,
        &config.orchestrator_options(),
    )?;
    let out = to_input_frame(&orchestration.best.candidate, &transform, trajectory.len())?;
    let success = orchestration.success;
    let report = ReshapeReport {
        command: set.source_command.clone(),
        constraints: serialize_constraint_set(set),
        success,
        exit_code: if success { EXIT_PASS } else { EXIT_BEST_EFFORT },
        normalization: transform,
        best: (&orchestration.best).into(),
        rounds: orchestration
            .rounds
            .iter()
            .map(|r| r.iter().map(CandidateSummary::from).collect())
            .collect(),
        warnings: interpretation.warnings.clone(),
    };
    Ok(ReshapeOutput {
        trajectory: out,
        report,
        orchestration,
    })
}

/// Map a candidate from the working frame back to workspace units with
/// `n` waypoints. The result is its own reference.
pub fn to_input_frame(
    candidate: &Trajectory,
    transform: &NormalizationTransform,
    n: usize,
) -> Result<Trajectory, TrajectoryError> {
    let t = denormalize(&candidate.rebased(), transform)?;
    if t.len() == n {
        Ok(t)
    } else {
        resample(&t, n)
    }
}

/// Report path for a trajectory output: `<out>` with `.report.json`.
pub fn report_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectory");
    out.with_file_name(format!("{stem}.report.json"))
}

/// File form of [`cmd_reshape`]. Writes the trajectory to `out` and the
/// report beside it; returns the exit code.
pub fn run_reshape(
    scene_path: &Path,
    trajectory_path: &Path,
    source: &CommandSource,
    config: &Config,
    out: &Path,
) -> Result<i32, PipelineError> {
    let scene = io::read_scene(scene_path)?;
    let trajectory = io::read_trajectory(trajectory_path)?;
    let output = cmd_reshape(&scene, &trajectory, source, config, None)?;
    io::write_trajectory(out, &output.trajectory)?;
    let report = serde_json::to_string_pretty(&output.report).expect("report serializes") + "\n";
    io::write_text(&report_path(out), &report)?;
    Ok(output.exit_code())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegisterOutput {
    pub scene: SceneDocument,
    /// One message per cloud that could not be registered.
    pub warnings: Vec<String>,
}

/// Register every cloud; failures become warnings. Duplicate ids get a
/// numeric suffix. Radii are left to the default rule.
pub fn cmd_register(clouds: &[PathBuf], params: &RegistrationParams) -> Result<RegisterOutput, PipelineError> {
    if clouds.is_empty() {
        return Err(PipelineError::NoClouds("input".into()));
    }
    let results: Vec<Result<SceneObject, String>> = clouds
        .par_iter()
        .map(|path| {
            let cloud = io::read_cloud(path).map_err(|e| e.to_string())?;
            register_cloud(&cloud, params).map_err(|e| format!("{}: {e}", path.display()))
        })
        .collect();
    let mut objects: Vec<SceneObject> = Vec::new();
    let mut warnings = Vec::new();
    for r in results {
        match r {
            Ok(mut o) => {
                let base = o.id.clone();
                let mut n = 2;
                while objects.iter().any(|x| x.id == o.id) {
                    o.id = format!("{base}_{n}");
                    n += 1;
                }
                objects.push(o);
            }
            Err(w) => {
                log::warn!("{w}");
                warnings.push(w);
            }
        }
    }
    if objects.is_empty() {
        return Err(PipelineError::NothingRegistered(warnings));
    }
    Ok(RegisterOutput {
        scene: SceneDocument::from_objects(&objects, false),
        warnings,
    })
}

/// Register all clouds in `dir` and write the scene to `out`.
pub fn run_register(dir: &Path, params: &RegistrationParams, out: &Path) -> Result<RegisterOutput, PipelineError> {
    let clouds = io::list_clouds(dir)?;
    if clouds.is_empty() {
        return Err(PipelineError::NoClouds(dir.display().to_string()));
    }
    let output = cmd_register(&clouds, params)?;
    io::write_text(out, &output.scene.to_json())?;
    Ok(output)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRates {
    pub agent: AgentKind,
    pub first_round: f64,
    pub final_round: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub seed: u64,
    pub kind: SampleKind,
    pub success_by_round: Vec<bool>,
    pub agent_first_round: Vec<bool>,
    pub agent_final_round: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Success rates over a dataset. Agent columns follow [`AgentKind::ALL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub samples: usize,
    pub max_rounds: usize,
    pub agents: Vec<AgentRates>,
    /// Orchestrator success rate by round, cumulative.
    pub orchestrator_by_round: Vec<f64>,
    pub per_sample: Vec<SampleResult>,
}

fn evaluate_sample(sample: &Sample, config: &Config, client: Option<&dyn ChatClient>) -> SampleResult {
    let rounds = config.orchestrator.max_rounds;
    let run = || -> Result<Orchestration, PipelineError> {
        let source = CommandSource::Text(sample.command_text.clone());
        let interpretation = interpret(&source, &sample.scene, config, client)?;
        let state = RefinementState::from_interpretation(&interpretation, &sample.scene)?;
        Ok(orchestrate(
            &sample.trajectory,
            &interpretation.constraint_set,
            &sample.scene,
            &config.optimizer,
            state,
            &config.orchestrator_options(),
        )?)
    };
    match run() {
        Ok(o) => {
            let agents = o.agent_success_by_round(rounds);
            let column = |r: usize| AgentKind::ALL.iter().map(|k| agents[k][r]).collect();
            SampleResult {
                seed: sample.seed,
                kind: sample.kind,
                success_by_round: o.success_by_round(rounds),
                agent_first_round: column(0),
                agent_final_round: column(rounds - 1),
                error: None,
            }
        }
        Err(e) => SampleResult {
            seed: sample.seed,
            kind: sample.kind,
            success_by_round: vec![false; rounds],
            agent_first_round: vec![false; AgentKind::ALL.len()],
            agent_final_round: vec![false; AgentKind::ALL.len()],
            error: Some(e.to_string()),
        },
    }
}

fn rate(hits: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        hits as f64 / n as f64
    }
}

/// Run the orchestrator over every sample in its own (already normalized)
/// frame. Failures count as unsuccessful.
pub fn cmd_evaluate(samples: &[Sample], config: &Config, client: Option<&dyn ChatClient>) -> Evaluation {
    let per_sample: Vec<SampleResult> = samples.par_iter().map(|s| evaluate_sample(s, config, client)).collect();
    let n = per_sample.len();
    let count = |f: &dyn Fn(&SampleResult) -> bool| per_sample.iter().filter(|s| f(s)).count();
    let agents = AgentKind::ALL
        .iter()
        .enumerate()
        .map(|(i, &agent)| AgentRates {
            agent,
            first_round: rate(count(&|s| s.agent_first_round[i]), n),
            final_round: rate(count(&|s| s.agent_final_round[i]), n),
        })
        .collect();
    let orchestrator_by_round = (0..config.orchestrator.max_rounds)
        .map(|r| rate(count(&|s| s.success_by_round[r]), n))
        .collect();
    Evaluation {
        samples: n,
        max_rounds: config.orchestrator.max_rounds,
        agents,
        orchestrator_by_round,
        per_sample,
    }
}

impl Evaluation {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "samples: {}", self.samples);
        let _ = writeln!(s, "{:<20} {:>11} {:>11}", "agent", "first round", "final round");
        for a in &self.agents {
            let _ = writeln!(
                s,
                "{:<20} {:>10.1}% {:>10.1}%",
                a.agent.name(),
                100.0 * a.first_round,
                100.0 * a.final_round
            );
        }
        let _ = writeln!(s, "{:<20} {:>11}", "orchestrator round", "success");
        for (r, v) in self.orchestrator_by_round.iter().enumerate() {
            let _ = writeln!(s, "{:<20} {:>10.1}%", r + 1, 100.0 * v);
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("evaluation serializes") + "\n"
    }
}

/// Evaluate the dataset in `dir`, writing `<out>.json` and `<out>.txt`
/// when `out` is given.
pub fn run_evaluate(dir: &Path, config: &Config, out: Option<&Path>) -> Result<Evaluation, PipelineError> {
    let empty_dir = !dir.join(crate::dataset::MANIFEST_FILE).exists()
        && std::fs::read_dir(dir).is_ok_and(|mut entries| entries.next().is_none());
    let samples = if empty_dir { Vec::new() } else { read_dataset(dir)? };
    let evaluation = cmd_evaluate(&samples, config, None);
    if let Some(out) = out {
        io::write_text(&out.with_extension("json"), &evaluation.to_json())?;
        io::write_text(&out.with_extension("txt"), &evaluation.to_table())?;
    }
    Ok(evaluation)
}

/// Generate `count` samples from `first_seed` and write them to `dir`.
pub fn cmd_generate(dir: &Path, first_seed: u64, count: usize, kind: SampleKind) -> Result<Manifest, PipelineError> {
    let samples = generate_samples(first_seed, count, kind)?;
    Ok(write_dataset(dir, &samples)?)
}
