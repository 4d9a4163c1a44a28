mod common;

use stagesvm_core::multiclass::{train_multiclass, HyperParams};
use stagesvm_core::svm::BinarySvmModel;

const FIXTURES: [&str; 4] = ["gauss3", "imbalanced", "staged4", "blobs4"];

fn check_kkt(model: &BinarySvmModel, context: &str) {
    let mut balance = 0.0;
    for (coef, cap) in model.coefficients().iter().zip(model.caps()) {
        let alpha = coef.abs();
        assert!(
            alpha > 0.0 && alpha <= *cap,
            "{context}: α {alpha} outside (0, {cap}]"
        );
        balance += coef;
    }
    assert!(balance.abs() <= 1e-3, "{context}: Σ α y = {balance}");

    // free support vectors sit on the margin
    let sv = model.support_vectors();
    for (s, (coef, cap)) in model.coefficients().iter().zip(model.caps()).enumerate() {
        if coef.abs() < cap - 1e-9 {
            let f = model.decision_value(sv.row(s).as_slice().unwrap()).unwrap();
            let margin = coef.signum() * f;
            assert!(
                (margin - 1.0).abs() <= 1e-2,
                "{context}: free SV {s} has y·f = {margin}"
            );
        }
    }
}

#[test]
fn every_fixture_model_satisfies_kkt() {
    for name in FIXTURES {
        let ds = common::fixture(name);
        for hp in [
            HyperParams { c: 1.0, gamma: 0.5 },
            HyperParams {
                c: 50.0,
                gamma: 0.05,
            },
        ] {
            let model = train_multiclass(&ds, hp, 0).unwrap();
            assert!(model.all_converged(), "{name}");
            for (k, m) in model.binary_models().iter().enumerate() {
                check_kkt(m, &format!("{name} class {k} {hp:?}"));
            }
        }
    }
}
