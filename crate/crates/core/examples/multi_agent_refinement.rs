//! Watch the four agents and the refinement loop on a complex sample.

use trajshape::agents::{orchestrate, AgentKind, OrchestratorOptions, RefinementState};
use trajshape::constraint::interpret_command_template;
use trajshape::dataset::{generate_sample, SampleKind};
use trajshape::optimizer::OptimizerParams;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let sample = generate_sample(seed, SampleKind::Complex).unwrap();
    println!("command: {}", sample.command_text);
    let interpretation = interpret_command_template(&sample.command_text, &sample.scene).unwrap();
    let state = RefinementState::from_interpretation(&interpretation, &sample.scene).unwrap();
    let options = OrchestratorOptions::default();
    let run = orchestrate(
        &sample.trajectory,
        &interpretation.constraint_set,
        &sample.scene,
        &OptimizerParams::default(),
        state,
        &options,
    )
    .unwrap();
    for (r, reports) in run.rounds.iter().enumerate() {
        println!("round {}", r + 1);
        for report in reports {
            let marks: String = report.outcomes.iter().map(|o| if o.passed { '+' } else { '-' }).collect();
            println!("  {:<20} {marks}  deviation {:.4}", report.agent.name(), report.candidate.mean_deviation());
        }
    }
    println!("success: {} (best from {})", run.success, run.best.agent.name());
    let by_agent = run.agent_success_by_round(options.max_rounds);
    for kind in AgentKind::ALL {
        println!("  {:<20} {:?}", kind.name(), by_agent[&kind]);
    }
    println!("final intensity multipliers {:?}", run.final_state.intensity_multipliers);
}
