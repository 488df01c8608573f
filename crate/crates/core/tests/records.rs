use serde_json::json;

use freemetric::action::GroupAction;
use freemetric::free::MoleculeRecord;
use freemetric::katetov::{KatetovFunction, KatetovRecord};
use freemetric::{FiniteGroup, FiniteMetricSpace, InvariantPseudometric, PointedSpace, Rational};

#[test]
fn spaces_round_trip_and_reject_violations() {
    let s: FiniteMetricSpace =
        serde_json::from_value(json!({ "points": ["a", "b"], "dist": [[0, "1/2"], ["1/2", 0]] }))
            .unwrap();
    assert_eq!(
        serde_json::from_value::<FiniteMetricSpace>(serde_json::to_value(&s).unwrap()).unwrap(),
        s
    );

    let err = serde_json::from_value::<FiniteMetricSpace>(json!({
        "points": ["a", "b", "c"],
        "dist": [[0, 1, 3], [1, 0, 1], [3, 1, 0]]
    }))
    .unwrap_err();
    assert!(
        err.to_string().contains("d(a,c) > d(a,b) + d(b,c)"),
        "{err}"
    );

    let pseudo: FiniteMetricSpace = serde_json::from_value(
        json!({ "points": ["a", "b"], "dist": [[0, 0], [0, 0]], "pseudo": true }),
    )
    .unwrap();
    assert!(pseudo.is_pseudo());
    assert!(serde_json::from_value::<FiniteMetricSpace>(
        json!({ "points": ["a"], "dist": [[0]], "extra": 1 })
    )
    .is_err());
}

#[test]
fn pointed_spaces_name_their_basepoint() {
    let p: PointedSpace = serde_json::from_value(json!({
        "points": ["o", "x"], "dist": [[0, 2], [2, 0]], "basepoint": "x"
    }))
    .unwrap();
    assert_eq!(p.basepoint(), 1);
    let back = serde_json::to_value(&p).unwrap();
    assert_eq!(back["basepoint"], json!("x"));
}

#[test]
fn actions_must_be_homomorphisms() {
    let space = FiniteMetricSpace::cycle(4).unwrap();
    let group = FiniteGroup::cyclic(4);
    let good = GroupAction::left_regular(group.clone(), space.clone()).unwrap();
    let v = serde_json::to_value(&good).unwrap();
    assert_eq!(
        serde_json::from_value::<GroupAction>(v.clone()).unwrap(),
        good
    );

    // rotation by 1 paired with a reflection is not a homomorphism of Z4
    let mut bad = v;
    bad["images"]["1"] = json!([0, 3, 2, 1]);
    assert!(serde_json::from_value::<GroupAction>(bad).is_err());
}

#[test]
fn pseudometrics_embed_in_the_group_record() {
    let z4 = FiniteGroup::cyclic(4);
    let length = [0, 1, 0, 1].map(Rational::from_integer);
    let pm = InvariantPseudometric::from_length(z4, &length).unwrap();
    let v = serde_json::to_value(&pm).unwrap();
    assert!(
        v.get("elements").is_some() && v.get("table").is_some() && v.get("pseudometric").is_some()
    );
    assert_eq!(
        serde_json::from_value::<InvariantPseudometric>(v).unwrap(),
        pm
    );

    let not_invariant = json!({
        "elements": ["0", "1"], "table": [[0, 1], [1, 0]],
        "pseudometric": [[0, 1], [2, 0]]
    });
    assert!(serde_json::from_value::<InvariantPseudometric>(not_invariant).is_err());
}

#[test]
fn molecules_and_katetov_records_use_labels() {
    let rec: MoleculeRecord = serde_json::from_value(json!({
        "space": { "points": ["o", "x"], "dist": [[0, 3], [3, 0]] },
        "basepoint": "o",
        "coeffs": { "x": "-2/4" }
    }))
    .unwrap();
    let m = rec.into_molecule().unwrap();
    assert_eq!(
        serde_json::to_value(m.to_labels()).unwrap(),
        json!({ "x": "-1/2" })
    );

    let space = FiniteMetricSpace::line(&[0, 4]).unwrap();
    let rec: KatetovRecord =
        serde_json::from_value(json!({ "support": ["0", "4"], "values": { "0": 1, "4": 3 } }))
            .unwrap();
    let f = KatetovFunction::from_record(&space, &rec).unwrap();
    assert_eq!(f.to_record(&space), rec);
    let too_close: KatetovRecord =
        serde_json::from_value(json!({ "support": ["0", "4"], "values": { "0": 1, "4": 1 } }))
            .unwrap();
    assert_eq!(
        KatetovFunction::from_record(&space, &too_close)
            .unwrap_err()
            .kind(),
        "not_katetov"
    );
}
