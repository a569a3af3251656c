//! Regenerates the bundled classifier fixtures.
//!
//! cargo run -p zomirror-core --example gen_fixtures

use std::path::PathBuf;

use zomirror_core::explain::{TinyClassifier, BUNDLED};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for (name, n, hidden, classes, seed) in BUNDLED {
        let model = TinyClassifier::generate(n, hidden, classes, seed)?;
        let path = dir.join(format!("{name}.bin"));
        std::fs::write(&path, model.to_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
