use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{observe, run_agent, AgentError, AgentKind, AgentReport, CheckOutcome, RefinementState, Thresholds};
use crate::constraint::ConstraintSet;
use crate::geometry::SceneObject;
use crate::optimizer::OptimizerParams;
use crate::trajectory::Trajectory;

/// Growth factor applied by each refinement step.
pub const REFINE_FACTOR: f64 = 1.5;

fn default_max_rounds() -> usize {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrchestratorOptions {
    /// Initial round plus refinement rounds.
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
    #[serde(default)]
    pub thresholds: Thresholds,
}

impl Default for OrchestratorOptions {
    fn default() -> Self {
        OrchestratorOptions {
            max_rounds: default_max_rounds(),
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orchestration {
    pub best: AgentReport,
    /// Reports per executed round, agents in [`AgentKind::ALL`] order.
    pub rounds: Vec<Vec<AgentReport>>,
    pub success: bool,
    /// State used by the last executed round.
    pub final_state: RefinementState,
}

impl Orchestration {
    /// Whether the run had succeeded by each of rounds `1..=max_rounds`.
    /// After an early return the verdict stays fixed.
    pub fn success_by_round(&self, max_rounds: usize) -> Vec<bool> {
        let mut out = Vec::with_capacity(max_rounds);
        let mut solved = false;
        for r in 0..max_rounds {
            if let Some(reports) = self.rounds.get(r) {
                solved |= reports.iter().any(AgentReport::fully_passed);
            }
            out.push(solved);
        }
        out
    }

    /// Per agent, whether it had produced a fully passing candidate by each
    /// round. Rounds after the run stopped repeat the last verdict.
    pub fn agent_success_by_round(&self, max_rounds: usize) -> BTreeMap<AgentKind, Vec<bool>> {
        AgentKind::ALL
            .iter()
            .map(|&kind| {
                let mut solved = false;
                let flags = (0..max_rounds)
                    .map(|r| {
                        if let Some(reports) = self.rounds.get(r) {
                            solved |= reports.iter().any(|rep| rep.agent == kind && rep.fully_passed());
                        }
                        solved
                    })
                    .collect();
                (kind, flags)
            })
            .collect()
    }
}

fn run_round(
    round: usize,
    trajectory: &Trajectory,
    set: &ConstraintSet,
    scene: &[SceneObject],
    params: &OptimizerParams,
    state: &RefinementState,
    thresholds: &Thresholds,
) -> Result<Vec<AgentReport>, AgentError> {
    AgentKind::ALL
        .par_iter()
        .map(|&agent| {
            let candidate = run_agent(agent, trajectory, set, scene, params, state)?;
            let outcomes = observe(trajectory, &candidate, set, scene, thresholds);
            Ok(AgentReport {
                agent,
                round,
                candidate,
                outcomes,
            })
        })
        .collect()
}

/// Run constraint `index` alone through the parallel agent with the current
/// multipliers and check it.
pub fn solo_probe(
    index: usize,
    trajectory: &Trajectory,
    set: &ConstraintSet,
    scene: &[SceneObject],
    params: &OptimizerParams,
    state: &RefinementState,
    thresholds: &Thresholds,
) -> Result<CheckOutcome, AgentError> {
    let solo_set = ConstraintSet::new(vec![set.constraints[index].clone()], set.source_command.clone());
    let solo_state = RefinementState {
        intensity_multipliers: vec![state.intensity_multipliers[index]],
        importance_multipliers: vec![state.importance_multipliers[index]],
        sequential_order: vec![0],
        priority_ranking: vec![0],
        radius_multipliers: state.radius_multipliers.clone(),
        round: state.round,
    };
    let candidate = run_agent(AgentKind::Parallel, trajectory, &solo_set, scene, params, &solo_state)?;
    let mut outcome = observe(trajectory, &candidate, &solo_set, scene, thresholds).remove(0);
    outcome.constraint_id = index;
    Ok(outcome)
}

fn promote(order: &mut [usize], index: usize) {
    if let Some(pos) = order.iter().position(|&i| i == index) {
        if pos > 0 {
            order.swap(pos - 1, pos);
        }
    }
}

/// Next round's state from this round's reports.
///
/// A constraint that fails for every agent and also fails when run alone is
/// treated as out of reach: its target's influence radius grows (a global
/// shift has no target, so its intensity grows instead). A constraint that
/// fails only for some agents, or only together with the others, gets more
/// intensity and importance and moves one rank earlier in both orderings.
pub fn refine(
    reports: &[AgentReport],
    state: &RefinementState,
    trajectory: &Trajectory,
    set: &ConstraintSet,
    scene: &[SceneObject],
    params: &OptimizerParams,
    thresholds: &Thresholds,
) -> Result<RefinementState, AgentError> {
    let mut next = state.clone();
    next.round += 1;
    for (i, constraint) in set.constraints.iter().enumerate() {
        let failures = reports
            .iter()
            .filter(|r| r.outcomes.get(i).is_some_and(|o| !o.passed))
            .count();
        if failures == 0 {
            continue;
        }
        let unreachable = failures == reports.len()
            && !solo_probe(i, trajectory, set, scene, params, state, thresholds)?.passed;
        match (&constraint.target, unreachable) {
            (Some(id), true) => {
                let m = next.radius_multipliers.entry(id.clone()).or_insert(1.0);
                *m *= REFINE_FACTOR;
            }
            (None, true) => next.intensity_multipliers[i] *= REFINE_FACTOR,
            (_, false) => {
                next.intensity_multipliers[i] *= REFINE_FACTOR;
                next.importance_multipliers[i] *= REFINE_FACTOR;
                promote(&mut next.sequential_order, i);
                promote(&mut next.priority_ranking, i);
            }
        }
    }
    Ok(next)
}

fn better(a: &AgentReport, b: &AgentReport) -> bool {
    let (pa, pb) = (a.passed_count(), b.passed_count());
    pa > pb || (pa == pb && a.candidate.mean_deviation() < b.candidate.mean_deviation())
}

fn pick_best<'a>(reports: impl Iterator<Item = &'a AgentReport>) -> Option<&'a AgentReport> {
    reports.fold(None, |best, r| match best {
        Some(b) if !better(r, b) => Some(b),
        _ => Some(r),
    })
}

/// Run rounds of all four agents from `trajectory` until one candidate
/// passes every check or `max_rounds` is spent.
///
/// A successful round returns its passing candidate with the smallest mean
/// deviation. Otherwise the best report over all rounds wins: most passed
/// checks, then smallest mean deviation, then earliest.
pub fn orchestrate(
    trajectory: &Trajectory,
    set: &ConstraintSet,
    scene: &[SceneObject],
    params: &OptimizerParams,
    initial: RefinementState,
    options: &OrchestratorOptions,
) -> Result<Orchestration, AgentError> {
    let mut state = initial;
    let mut rounds: Vec<Vec<AgentReport>> = Vec::new();
    let max_rounds = options.max_rounds.max(1);

    for round in 1..=max_rounds {
        let reports = run_round(round, trajectory, set, scene, params, &state, &options.thresholds)?;
        log::debug!(
            "round {round}: {}",
            reports
                .iter()
                .map(|r| format!("{}={}/{}", r.agent.name(), r.passed_count(), r.outcomes.len()))
                .collect::<Vec<_>>()
                .join(" ")
        );
        if let Some(best) = pick_best(reports.iter().filter(|r| r.fully_passed())) {
            let best = best.clone();
            rounds.push(reports);
            return Ok(Orchestration {
                best,
                rounds,
                success: true,
                final_state: state,
            });
        }
        let next = if round < max_rounds {
            Some(refine(&reports, &state, trajectory, set, scene, params, &options.thresholds)?)
        } else {
            None
        };
        rounds.push(reports);
        match next {
            Some(s) => state = s,
            None => break,
        }
    }

    let best = pick_best(rounds.iter().flatten())
        .expect("at least one round ran")
        .clone();
    Ok(Orchestration {
        best,
        rounds,
        success: false,
        final_state: state,
    })
}
