use dppmle::{Dataset, Error};
use proptest::prelude::*;

#[test]
fn parses_one_indexed() {
    let d = Dataset::from_json_str(r#"{"ground_set_size":3,"samples":[[1,3],[2]]}"#).unwrap();
    assert_eq!(d.samples(), &[vec![0, 2], vec![1]]);
    let st = d.stats();
    assert_eq!(st.frequencies, vec![1, 1, 1]);
    assert_eq!(st.a_max, 1);
    assert!(!st.has_full_frequency());
}

#[test]
fn rejects_bad_indices() {
    assert!(matches!(
        Dataset::from_json_str(r#"{"ground_set_size":2,"samples":[[0,1]]}"#),
        Err(Error::Validation(m)) if m.contains("index 0")
    ));
    assert!(matches!(
        Dataset::from_json_str(r#"{"ground_set_size":2,"samples":[[1],[3]]}"#),
        Err(Error::Validation(m)) if m.contains("sample 1")
    ));
    assert!(Dataset::from_json_str(r#"{"ground_set_size":2,"samples":[[2,1]]}"#).is_err());
    assert!(Dataset::from_json_str(r#"{"ground_set_size":2,"samples":[]}"#).is_err());
    match Dataset::from_json_str("{\"ground_set_size\":2,\n\"samples\":[[1],") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn full_frequency_and_empty() {
    let d = Dataset::new(2, vec![vec![0], vec![0, 1], vec![]]).unwrap();
    assert!(d.has_empty_sample());
    let d = Dataset::new(2, vec![vec![0], vec![0, 1]]).unwrap();
    let st = d.stats();
    assert_eq!(st.full_frequency, vec![0]);
    assert_eq!(st.distribution(&[0]), 0.5);
    assert_eq!(st.distribution(&[1]), 0.0);
}

#[test]
fn canonical_round_trip_is_byte_identical() {
    let text = r#"{"ground_set_size":2,"samples":[[1],[2]]}"#;
    assert_eq!(Dataset::from_json_str(text).unwrap().to_json_string(), text);
}

proptest! {
    #[test]
    fn round_trip(n in 1usize..10, raw in proptest::collection::vec(proptest::collection::btree_set(0usize..10, 0..5), 1..8)) {
        let samples: Vec<Vec<usize>> = raw.into_iter().map(|s| s.into_iter().filter(|&i| i < n).collect()).collect();
        let d = Dataset::new(n, samples).unwrap();
        let text = d.to_json_string();
        let back = Dataset::from_json_str(&text).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(back.to_json_string(), text);
        let st = d.stats();
        let total: usize = st.distinct.iter().map(|(_, c)| c).sum();
        prop_assert_eq!(total, d.m());
    }
}
