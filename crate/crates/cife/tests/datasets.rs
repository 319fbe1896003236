use std::path::{Path, PathBuf};

use cife::io::{load_csv, parse_csv, CsvOptions, HeaderMode, LabelColumn, LoadError};

fn data(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(file)
}

fn parse(text: &str, opts: &CsvOptions) -> Result<cife::core::dataset::Dataset, LoadError> {
    parse_csv("t", Path::new("t.csv"), text.as_bytes(), opts)
}

#[test]
fn bundled_datasets_have_expected_shapes() {
    for (file, rows, attrs, classes) in [
        ("wine.csv", 178, 13, 3),
        ("pima.csv", 768, 8, 2),
        ("ionosphere.csv", 351, 34, 2),
        ("balance-scale.csv", 625, 4, 3),
    ] {
        let ds = load_csv(&data(file), &CsvOptions::default()).unwrap();
        assert_eq!((ds.len(), ds.n_attributes(), ds.class_count()), (rows, attrs, classes), "{file}");
    }
    let wine = load_csv(&data("wine.csv"), &CsvOptions::default()).unwrap();
    assert_eq!(wine.name(), "wine");
    assert_eq!(wine.class_counts(), [59, 71, 48]);
}

#[test]
fn header_detection_and_label_column() {
    let opts = CsvOptions::default();
    let ds = parse("a,b,y\n1,2,x\n3,4,z\n", &opts).unwrap();
    assert_eq!((ds.len(), ds.n_attributes(), ds.class_count()), (2, 2, 2));

    let opts = CsvOptions { header: HeaderMode::Absent, label: LabelColumn::Index(0) };
    let ds = parse("1,2,3\n0,4,5\n", &opts).unwrap();
    assert_eq!(ds.n_attributes(), 2);
    assert_eq!(ds.features().row(0), [2.0, 3.0]);

    let opts = CsvOptions { header: HeaderMode::Present, label: LabelColumn::Name("y".into()) };
    let ds = parse("y,a\nk,1\nl,2\n", &opts).unwrap();
    assert_eq!(ds.class_names(), ["k", "l"]);
}

#[test]
fn degenerate_files_are_rejected_with_locations() {
    let opts = CsvOptions::default();
    assert!(matches!(parse("", &opts), Err(LoadError::Empty { .. })));
    assert!(matches!(parse("a,b,y\n", &opts), Err(LoadError::Empty { .. })));
    assert!(matches!(parse("1,2,a\n3,b\n", &opts), Err(LoadError::Ragged { line: 2, .. })));
    match parse("1,2,a\n3,x,b\n", &opts) {
        Err(LoadError::Parse { line, column, value, .. }) => assert_eq!((line, column, value.as_str()), (2, 1, "x")),
        other => panic!("unexpected {other:?}"),
    }
    let opts = CsvOptions { header: HeaderMode::Present, label: LabelColumn::Name("missing".into()) };
    assert!(matches!(parse("a,b\n1,2\n", &opts), Err(LoadError::LabelColumn { .. })));
    assert!(matches!(load_csv(Path::new("/nonexistent/file.csv"), &CsvOptions::default()), Err(LoadError::Io { .. })));
}
