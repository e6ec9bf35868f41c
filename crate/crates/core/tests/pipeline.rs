use medianwall::cylinders::{quasi_isometry, transfer_cylinders};
use medianwall::generators::{generate, path};
use medianwall::instance::{self, build, certify, verify, Instance, RunOptions};
use medianwall::Error;

fn generated(spec: &str) -> Instance {
    Instance::generated(generate(spec).unwrap(), 1)
}

#[test]
fn small_instances_verify() {
    for spec in ["path(20)", "star(3)", "staircase(4)"] {
        let rep = verify(&generated(spec), &RunOptions::default()).unwrap();
        let failing: Vec<&str> = rep.failing().iter().map(|c| c.name.as_str()).collect();
        assert!(rep.passed(), "{spec}: {failing:?}");
        assert!(rep.cylinders.is_some(), "{spec} skipped cylinders");
    }
}

#[test]
fn corruption_survives_json() {
    let mut inst = generated("path(40)");
    if let Instance::Graph { corrupt, .. } = &mut inst {
        corrupt.forbid = vec![[0, 33], [13, 23]];
    }
    let text = serde_json::to_string(&inst.to_json()).unwrap();
    let back = Instance::parse(&text).unwrap();
    assert_eq!(back.corruption().forbid, vec![[0, 33], [13, 23]]);
    let rep = verify(&back, &RunOptions::default()).unwrap();
    let failing: Vec<&str> = rep.failing().iter().map(|c| c.name.as_str()).collect();
    assert_eq!(failing, ["gluable"]);
}

#[test]
fn forbidding_a_missing_wall_is_rejected() {
    let mut inst = generated("path(10)");
    if let Instance::Graph { corrupt, .. } = &mut inst {
        corrupt.forbid = vec![[0, 999]];
    }
    assert!(matches!(
        build(&inst, &RunOptions::default()),
        Err(Error::Invalid(_))
    ));
}

#[test]
fn certificates_are_deterministic() {
    let inst = generated("star(4)");
    let a = serde_json::to_string(&certify(&inst, &RunOptions::default()).unwrap().1).unwrap();
    let b = serde_json::to_string(&certify(&inst, &RunOptions::default()).unwrap().1).unwrap();
    assert_eq!(a, b);
}

#[test]
fn small_epsilon_is_flagged_and_covered() {
    let opts = RunOptions {
        epsilon: Some(0),
        ..RunOptions::default()
    };
    let (_, cert) = certify(
        &Instance::generated(generate("staircase(30)").unwrap(), 1),
        &opts,
    )
    .unwrap();
    assert!(cert.cylinders.epsilon_warning);
    assert!(!cert.cylinders.contains_geodesics);
    assert!(cert.certificate.recheck.holds);
    assert!(cert.certificate.k <= cert.certificate.max_k);
    assert!(cert.certificate.records.iter().all(|r| !r.balls.is_empty()));
}

#[test]
fn constant_map_is_not_a_quasi_isometry() {
    let opts = RunOptions::default();
    let inst = generated("path(40)");
    let built = build(&inst, &opts).unwrap();
    let model = instance::dual_model(&built, &opts).unwrap();
    let y = path(40).unwrap();
    let phi = vec![0; 41];
    let err = quasi_isometry(y.dist_table(), &model.dist, &phi, 3).unwrap_err();
    assert!(matches!(err, Error::NotQuasiIsometry { .. }));
    let (space, _) = instance::cylinders(&built, &model, inst.corruption(), &opts).unwrap();
    let cert = space.certify();
    assert!(transfer_cylinders(y.dist_table(), &phi, &space, &cert, 1, 3).is_err());
}
