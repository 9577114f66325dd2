//! Four reshaping strategies, the observer that checks their candidates and
//! the refinement loop that retunes them.
//!
//! Every agent starts from the same trajectory and produces one candidate:
//!
//! * [`AgentKind::Parallel`]: all fields at once, importances ignored;
//! * [`AgentKind::Sequential`]: one optimization per constraint in priority
//!   order, each pass measured against its own input;
//! * [`AgentKind::ParallelPriority`]: all fields at once, intensities
//!   weighted by rank in a priority ordering;
//! * [`AgentKind::ParallelImportance`]: all fields at once, weighted by each
//!   constraint's importance.

mod observer;
mod orchestrate;

pub use observer::{check_cartesian, check_distance, check_speed, observe, CheckKind, CheckOutcome, Thresholds};
pub use orchestrate::{orchestrate, refine, solo_probe, Orchestration, OrchestratorOptions};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraint::{is_permutation, Constraint, ConstraintSet, InterpreterResult, WEIGHT_MAX};
use crate::geometry::SceneObject;
use crate::optimizer::{apply_speed_profile, optimize, OptimizeError, OptimizerParams, PotentialField};
use crate::trajectory::Trajectory;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("ordering {0:?} is not a permutation of the constraints")]
    InvalidOrdering(Vec<usize>),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Parallel,
    Sequential,
    ParallelPriority,
    ParallelImportance,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] = [
        AgentKind::Parallel,
        AgentKind::Sequential,
        AgentKind::ParallelPriority,
        AgentKind::ParallelImportance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Parallel => "parallel",
            AgentKind::Sequential => "sequential",
            AgentKind::ParallelPriority => "parallel_priority",
            AgentKind::ParallelImportance => "parallel_importance",
        }
    }
}

/// One agent's candidate for one round, with the observer's verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentReport {
    pub agent: AgentKind,
    pub round: usize,
    pub candidate: Trajectory,
    pub outcomes: Vec<CheckOutcome>,
}

impl AgentReport {
    pub fn passed_count(&self) -> usize {
        self.outcomes.iter().filter(|o| o.passed).count()
    }

    pub fn fully_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

/// Per-round tuning applied on top of the constraint set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementState {
    pub intensity_multipliers: Vec<f64>,
    pub importance_multipliers: Vec<f64>,
    /// Execution order of the sequential agent.
    pub sequential_order: Vec<usize>,
    /// Rank order of the priority agent, most important first.
    pub priority_ranking: Vec<usize>,
    /// Influence-radius multiplier per object id; absent means 1.
    pub radius_multipliers: BTreeMap<String, f64>,
    /// Rounds completed so far.
    pub round: usize,
}

impl RefinementState {
    /// Neutral state. The priority ranking is `ordering` when given, else
    /// targets sorted by fragility, most fragile first (stable; untargeted
    /// constraints count as fragility 0).
    pub fn initial(
        set: &ConstraintSet,
        scene: &[SceneObject],
        ordering: Option<&[usize]>,
    ) -> Result<Self, AgentError> {
        let n = set.len();
        let priority_ranking = match ordering {
            Some(order) => {
                if !is_permutation(order, n) {
                    return Err(AgentError::InvalidOrdering(order.to_vec()));
                }
                order.to_vec()
            }
            None => fragility_order(set, scene),
        };
        Ok(RefinementState {
            intensity_multipliers: vec![1.0; n],
            importance_multipliers: vec![1.0; n],
            sequential_order: set.priority_order(),
            priority_ranking,
            radius_multipliers: BTreeMap::new(),
            round: 0,
        })
    }

    /// Like [`RefinementState::initial`], taking the first ordering the
    /// interpreter proposed.
    pub fn from_interpretation(result: &InterpreterResult, scene: &[SceneObject]) -> Result<Self, AgentError> {
        let ordering = result.sequences.first().map(Vec::as_slice);
        RefinementState::initial(&result.constraint_set, scene, ordering)
    }

    pub fn radius_multiplier(&self, object_id: &str) -> f64 {
        self.radius_multipliers.get(object_id).copied().unwrap_or(1.0)
    }
}

fn fragility_order(set: &ConstraintSet, scene: &[SceneObject]) -> Vec<usize> {
    let fragility = |c: &Constraint| {
        c.target
            .as_ref()
            .and_then(|id| scene.iter().find(|o| &o.id == id))
            .map_or(0.0, |o| o.fragility)
    };
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.sort_by(|&a, &b| fragility(&set.constraints[b]).total_cmp(&fragility(&set.constraints[a])));
    order
}

/// Intensity multiplier of the constraint at `rank` among `count`.
pub fn rank_weight(rank: usize, count: usize) -> f64 {
    1.0 + 0.25 * (count.saturating_sub(1) - rank) as f64
}

/// Constraints as one agent sees them. Refinement multipliers are applied
/// and the products capped at the document bound, so a step never exceeds
/// `eta * WEIGHT_MAX^2` per field.
fn effective_constraints(kind: AgentKind, set: &ConstraintSet, state: &RefinementState) -> Vec<Constraint> {
    let n = set.len();
    set.constraints
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut c = c.clone();
            let importance = if kind == AgentKind::ParallelImportance { c.importance } else { 1.0 };
            c.intensity = (c.intensity * state.intensity_multipliers[i]).min(WEIGHT_MAX);
            c.importance = (importance * state.importance_multipliers[i]).min(WEIGHT_MAX);
            if kind == AgentKind::ParallelPriority {
                let rank = state
                    .priority_ranking
                    .iter()
                    .position(|&j| j == i)
                    .expect("ranking is a permutation");
                c.intensity *= rank_weight(rank, n);
            }
            c
        })
        .collect()
}

fn fields(
    constraints: &[Constraint],
    scene: &[SceneObject],
    state: &RefinementState,
) -> Result<Vec<PotentialField>, OptimizeError> {
    let mut fields = PotentialField::fields_for(constraints, scene)?;
    for f in &mut fields {
        if let Some(object) = &f.object {
            f.influence_radius *= state.radius_multiplier(&object.id);
        }
    }
    Ok(fields)
}

/// Run one agent with the given refinement state. The candidate keeps the
/// reference waypoints of `trajectory`.
pub fn run_agent(
    kind: AgentKind,
    trajectory: &Trajectory,
    set: &ConstraintSet,
    scene: &[SceneObject],
    params: &OptimizerParams,
    state: &RefinementState,
) -> Result<Trajectory, AgentError> {
    let constraints = effective_constraints(kind, set, state);
    let all_fields = fields(&constraints, scene, state)?;
    let shaped = match kind {
        AgentKind::Sequential => {
            let mut current = trajectory.clone();
            for &i in &state.sequential_order {
                let pass = &all_fields[i..=i];
                let out = optimize(&current.rebased(), pass, scene, params)?;
                current = trajectory
                    .with_positions(&out.trajectory.positions())
                    .map_err(OptimizeError::from)?;
            }
            current
        }
        _ => optimize(trajectory, &all_fields, scene, params)?.trajectory,
    };
    Ok(apply_speed_profile(&shaped, &all_fields, params.proximity)?)
}

/// All fields at once, every importance treated as 1.
pub fn run_parallel(
    trajectory: &Trajectory,
    set: &ConstraintSet,
    scene: &[SceneObject],
    params: &OptimizerParams,
) -> Result<Trajectory, AgentError> {
    let state = RefinementState::initial(set, scene, None)?;
    run_agent(AgentKind::Parallel, trajectory, set, scene, params, &state)
}

/// One optimization pass per constraint in ascending priority.
pub fn run_sequential(
    trajectory: &Trajectory,
    set: &ConstraintSet,
    scene: &[SceneObject],
    params: &OptimizerParams,
) -> Result<Trajectory, AgentError> {
    let state = RefinementState::initial(set, scene, None)?;
    run_agent(AgentKind::Sequential, trajectory, set, scene, params, &state)
}

/// Parallel with intensities weighted by rank in `ordering` (fragility order
/// when `None`).
pub fn run_parallel_priority(
    trajectory: &Trajectory,
    set: &ConstraintSet,
    scene: &[SceneObject],
    params: &OptimizerParams,
    ordering: Option<&[usize]>,
) -> Result<Trajectory, AgentError> {
    let state = RefinementState::initial(set, scene, ordering)?;
    run_agent(AgentKind::ParallelPriority, trajectory, set, scene, params, &state)
}

/// Parallel with each field scaled by its constraint's importance.
pub fn run_parallel_importance(
    trajectory: &Trajectory,
    set: &ConstraintSet,
    scene: &[SceneObject],
    params: &OptimizerParams,
) -> Result<Trajectory, AgentError> {
    let state = RefinementState::initial(set, scene, None)?;
    run_agent(AgentKind::ParallelImportance, trajectory, set, scene, params, &state)
}
