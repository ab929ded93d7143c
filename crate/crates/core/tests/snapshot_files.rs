use graphnls::snapshot::{read_graph_field, read_line_field, write_graph_field, write_line_field};
use graphnls::{build_profile_delta, build_profile_delta_prime, Branch, DeltaPrimeParams, StarGraphGrid, WaveParams};

#[test]
fn profiles_survive_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let w = WaveParams::new(4, 0.5, 1.5, 5.0, 1).unwrap();
    let g = StarGraphGrid::with_spacing(4, w.default_length(), 0.02).unwrap();
    let phi = build_profile_delta(&w, &g).unwrap();
    let path = dir.path().join("phi.txt");
    write_graph_field(&path, &phi).unwrap();
    assert_eq!(read_graph_field(&path).unwrap(), phi);

    let d = DeltaPrimeParams::new(2.0, 6.0, 7.0, Branch::AsymmetricSwapped).unwrap();
    let g = StarGraphGrid::with_spacing(2, d.default_length(), 0.02).unwrap();
    let line = build_profile_delta_prime(&d, &g).unwrap();
    let path = dir.path().join("line.txt");
    write_line_field(&path, &line).unwrap();
    assert_eq!(read_line_field(&path).unwrap(), line);
}

#[test]
fn missing_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(read_graph_field(&dir.path().join("nope.txt")).is_err());
}
