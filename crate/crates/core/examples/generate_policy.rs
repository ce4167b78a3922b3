//! Regenerates `data/nn_policy.txt`, the policy of the neural feedback loop.
//!
//! Run with `cargo run --example generate_policy [-- <out path>]`.

use std::path::PathBuf;

use chreach::systems::MlpPolicy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data/nn_policy.txt")));
    let policy = MlpPolicy::benchmark_fit()?;
    policy.save(&out)?;
    println!("wrote {} ({:?})", out.display(), policy.layer_sizes());
    Ok(())
}
