//! Per-agent and per-round success rates on generated samples.
//! Pass a sample count as the first argument (default 40).

use trajshape::config::Config;
use trajshape::dataset::{generate_samples, SampleKind};
use trajshape::pipeline::cmd_evaluate;

fn main() {
    let count = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40);
    let config = Config::default();
    for kind in SampleKind::ALL {
        let samples = generate_samples(0, count, kind).unwrap();
        let evaluation = cmd_evaluate(&samples, &config, None);
        println!("== {kind:?}");
        print!("{}", evaluation.to_table());
    }
}
