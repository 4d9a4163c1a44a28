mod common;

use stagesvm_core::dataset::write_dataset;
use stagesvm_core::synthetic::committed_fixtures;

#[test]
fn committed_fixtures_match_generators() {
    for (name, generated) in committed_fixtures() {
        let committed = common::fixture(name);
        assert_eq!(committed.records(), generated.records(), "{name}");
        assert_eq!(committed.schema(), generated.schema(), "{name}");
    }
}

#[test]
fn regenerated_bytes_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (name, generated) in committed_fixtures() {
        let manifest = dir.path().join(name).join("manifest.json");
        write_dataset(&generated, &manifest).unwrap();
        for file in ["manifest.json", "manifest.f32"] {
            let fresh = std::fs::read(dir.path().join(name).join(file)).unwrap();
            let frozen = std::fs::read(common::fixtures_dir().join(name).join(file)).unwrap();
            assert!(fresh == frozen, "{name}/{file} drifted from its generator");
        }
    }
}
