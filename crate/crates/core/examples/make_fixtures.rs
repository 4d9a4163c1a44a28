//! Regenerates the committed feature-table fixtures.
//!
//! `cargo run -p stagesvm-core --example make_fixtures [-- OUT_DIR]`

use std::path::PathBuf;

use stagesvm_core::dataset::write_dataset;
use stagesvm_core::synthetic::committed_fixtures;

fn main() -> stagesvm_core::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"));
    for (name, ds) in committed_fixtures() {
        let dir = root.join(name);
        std::fs::create_dir_all(&dir).map_err(|e| stagesvm_core::Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        let manifest = dir.join("manifest.json");
        write_dataset(&ds, &manifest)?;
        println!("{}: n={} d={}", manifest.display(), ds.len(), ds.dim());
    }
    Ok(())
}
