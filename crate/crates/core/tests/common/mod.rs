#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use stagesvm_core::dataset::load_dataset;
use stagesvm_core::Dataset;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> Dataset {
    load_dataset(fixtures_dir().join(name).join("manifest.json")).unwrap()
}
