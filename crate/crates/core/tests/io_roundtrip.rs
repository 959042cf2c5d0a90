use smoothaccel::dense::Matrix;
use smoothaccel::instances::{generate, Instance, InstanceKind, Metadata};
use smoothaccel::io::{read_matrix, read_svmlight, read_vector, write_csv_matrix};
use smoothaccel::Error;

#[test]
fn generated_instances_reload_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for kind in [InstanceKind::LinfRandom, InstanceKind::SvmNoisy] {
        let out = dir.path().join(kind.to_string());
        let inst = generate(kind, 15, 4, 3).unwrap();
        inst.write(&out).unwrap();
        let meta: Metadata =
            serde_json::from_str(&std::fs::read_to_string(out.join("meta.json")).unwrap()).unwrap();
        assert_eq!(&meta, inst.meta());
        match inst {
            Instance::Linf { a, b, .. } => {
                assert_eq!(read_matrix(&out.join("A.mtx")).unwrap(), a);
                assert_eq!(read_vector(&out.join("b.txt")).unwrap(), b);
            }
            Instance::Svm { data, plant, .. } => {
                assert_eq!(
                    read_svmlight(&out.join("data.svmlight"), Some(4)).unwrap(),
                    data
                );
                assert_eq!(read_vector(&out.join("plant.txt")).unwrap(), plant);
            }
        }
    }
}

#[test]
fn csv_and_matrix_market_agree() {
    let dir = tempfile::tempdir().unwrap();
    let m = Matrix::from_rows(&[vec![1.5, -2.0, 0.0], vec![0.1, 1e-17, 3.0]]).unwrap();
    let csv = dir.path().join("m.csv");
    write_csv_matrix(&csv, &m).unwrap();
    assert_eq!(read_matrix(&csv).unwrap(), m);
}

#[test]
fn parse_errors_name_the_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("broken.mtx");
    std::fs::write(
        &bad,
        "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 3.0\n",
    )
    .unwrap();
    let err = read_matrix(&bad).unwrap_err();
    let text = err.to_string();
    assert!(text.contains("broken.mtx"), "{text}");
    assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");

    let missing = dir.path().join("nope.txt");
    assert!(read_vector(&missing)
        .unwrap_err()
        .to_string()
        .contains("nope.txt"));
}
