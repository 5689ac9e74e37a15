//! Rewrites the shipped fixture files from the seeded generator.

use canet_core::fixture::{fixture_dir, generate_fixture, FIXTURE_STEM};
use canet_core::model::{write_dataset, InputFormat};

fn main() -> std::io::Result<()> {
    let ds = generate_fixture();
    for p in write_dataset(&ds, &fixture_dir(), FIXTURE_STEM, InputFormat::Jsonl)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
