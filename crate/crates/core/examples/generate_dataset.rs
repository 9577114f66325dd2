//! Write a small synthetic dataset of each kind and print a few commands.

use trajshape::dataset::{generate_samples, write_dataset, SampleKind};

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "target/example-dataset".into());
    let mut all = Vec::new();
    for (i, kind) in SampleKind::ALL.into_iter().enumerate() {
        let samples = generate_samples(100 * i as u64, 5, kind).unwrap();
        for s in samples.iter().take(2) {
            println!("{kind:?} seed {}: {:?} ({} objects)", s.seed, s.command_text, s.scene.len());
        }
        all.extend(samples);
    }
    let manifest = write_dataset(std::path::Path::new(&dir), &all).unwrap();
    println!("wrote {} samples to {dir}", manifest.samples.len());
}
