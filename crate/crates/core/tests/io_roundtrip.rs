use proptest::prelude::*;
use pvlab::field::{Domain, Grid3, ScalarField, Spectral, VectorField};
use pvlab::io::{
    decode_snapshot, encode_snapshot, load_trajectory, parse_config, read_snapshot, ConfigError, IoError, Manifest,
    SnapshotData, TrajectoryWriter, HEADER_LEN,
};
use pvlab::solver::FlowState;

fn grid8(domain: Domain) -> Grid3 {
    Grid3::new(8, if domain == Domain::Torus { std::f64::consts::TAU } else { 10.0 }, domain).unwrap()
}

fn bits(f: &ScalarField<f64>) -> Vec<u64> {
    f.values().iter().map(|v| v.to_bits()).collect()
}

fn finite() -> impl Strategy<Value = f64> {
    use proptest::num::f64::{NEGATIVE, NORMAL, POSITIVE, SUBNORMAL, ZERO};
    POSITIVE | NEGATIVE | NORMAL | SUBNORMAL | ZERO
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snapshot_round_trip_is_bitwise(
        raw in proptest::collection::vec(finite(), 3 * 512),
        windowed in any::<bool>(),
    ) {
        let g = grid8(if windowed { Domain::WindowedR3 } else { Domain::Torus });
        let comp = |k: usize| ScalarField::new(g, raw[k * 512..(k + 1) * 512].to_vec()).unwrap();
        let v = VectorField::new([comp(0), comp(1), comp(2)]).unwrap();
        let bytes = encode_snapshot(&SnapshotData::Vector(v.clone()));
        prop_assert_eq!(bytes.len(), HEADER_LEN + 3 * 512 * 8);
        match decode_snapshot(&bytes).unwrap() {
            SnapshotData::Vector(w) => {
                prop_assert_eq!(*w.grid(), g);
                for (a, b) in v.components().iter().zip(w.components()) {
                    prop_assert_eq!(bits(a), bits(b));
                }
            }
            SnapshotData::Scalar(_) => prop_assert!(false, "decoded a scalar"),
        }
        let s = comp(1);
        match decode_snapshot(&encode_snapshot(&SnapshotData::Scalar(s.clone()))).unwrap() {
            SnapshotData::Scalar(t) => prop_assert_eq!(bits(&s), bits(&t)),
            SnapshotData::Vector(_) => prop_assert!(false, "decoded a vector"),
        }
    }
}

#[test]
fn header_layout_is_fixed() {
    let g = grid8(Domain::Torus);
    let f = ScalarField::from_fn(g, |x, y, z| x + 10.0 * y + 100.0 * z);
    let bytes = encode_snapshot(&SnapshotData::Scalar(f.clone()));
    assert_eq!(&bytes[..4], b"PVRL");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
    assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 8);
    assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), std::f64::consts::TAU);
    assert_eq!(bytes[24], 0);
    // x varies fastest.
    let h = std::f64::consts::TAU / 8.0;
    let second = f64::from_le_bytes(bytes[HEADER_LEN + 8..HEADER_LEN + 16].try_into().unwrap());
    assert_eq!(second, h);
    let row = f64::from_le_bytes(bytes[HEADER_LEN + 64..HEADER_LEN + 72].try_into().unwrap());
    assert_eq!(row, 10.0 * h);
}

#[test]
fn wrong_version_and_corruption_are_rejected() {
    let g = grid8(Domain::Torus);
    let bytes = encode_snapshot(&SnapshotData::Scalar(ScalarField::zeros(g)));
    let mut v2 = bytes.clone();
    v2[4..8].copy_from_slice(&2u32.to_le_bytes());
    assert!(matches!(decode_snapshot(&v2), Err(IoError::VersionMismatch { found: 2, expected: 1 })));
    let mut magic = bytes.clone();
    magic[0] = b'X';
    assert!(matches!(decode_snapshot(&magic), Err(IoError::Format(_))));
    assert!(matches!(decode_snapshot(&bytes[..bytes.len() - 1]), Err(IoError::Format(_))));
    assert!(matches!(decode_snapshot(&bytes[..10]), Err(IoError::Format(_))));
    let mut tag = bytes.clone();
    tag[24] = 9;
    assert!(matches!(decode_snapshot(&tag), Err(IoError::Format(_))));
    let mut nan = bytes;
    nan[HEADER_LEN..HEADER_LEN + 8].copy_from_slice(&f64::NAN.to_le_bytes());
    assert!(matches!(decode_snapshot(&nan), Err(IoError::Format(_))));
}

#[test]
fn trajectory_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = grid8(Domain::Torus);
    let sp = Spectral::<f64>::new(g);
    let mut w = TrajectoryWriter::create(dir.path(), Manifest::new("abc", g, 0.5)).unwrap();
    let mut originals = Vec::new();
    for step in 0..3 {
        let a = 1.0 + step as f64;
        let v =
            VectorField::from_fn(g, |x, y, z| [a * x.sin() * y.cos() * z.cos(), -a * x.cos() * y.sin() * z.cos(), 0.0]);
        let s = FlowState::new(&sp, 0.1 * step as f64, v).unwrap();
        w.push(step * 10, &s).unwrap();
        originals.push(s);
    }
    let path = w.finish(0.01).unwrap();
    let (m, states) = load_trajectory(&path).unwrap();
    assert_eq!(m.config_hash, "abc");
    assert_eq!(m.dt, 0.01);
    assert_eq!(m.viscosity, 0.5);
    assert_eq!(m.snapshots.iter().map(|e| e.step).collect::<Vec<_>>(), vec![0, 10, 20]);
    assert_eq!(states, originals);
    let first = read_snapshot(&dir.path().join(&m.snapshots[0].pressure)).unwrap();
    assert_eq!(first, SnapshotData::Scalar(originals[0].pi.clone()));
}

#[test]
fn manifest_with_mismatched_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let g = grid8(Domain::Torus);
    let sp = Spectral::<f64>::new(g);
    let mut w = TrajectoryWriter::create(dir.path(), Manifest::new("h", Grid3::torus_2pi(16).unwrap(), 1.0)).unwrap();
    w.push(0, &FlowState::new(&sp, 0.0, VectorField::zeros(g)).unwrap()).unwrap();
    let path = w.finish(0.1).unwrap();
    assert!(matches!(load_trajectory(&path), Err(IoError::Format(_))));
    assert!(matches!(load_trajectory(&dir.path().join("missing.json")), Err(IoError::Io { .. })));
}

const BASE: &str = "grid.n = 16\nsolver.t_end = 0.1\nsolver.initial = taylor_green\nmonitor.theta = 1/2\nmonitor.q = 4\noutput.dir = out\n";

#[test]
fn config_hash_ignores_order_comments_and_output() {
    let a = parse_config(BASE).unwrap();
    let mut lines: Vec<&str> = BASE.lines().collect();
    lines.reverse();
    let shuffled = format!("# comment\n\n{}\n", lines.join("\n")).replace("output.dir = out", "output.dir = elsewhere");
    let b = parse_config(&shuffled).unwrap();
    assert_eq!(a.hash, b.hash);
    let c = parse_config(&BASE.replace("monitor.q = 4", "monitor.q = 6")).unwrap();
    assert_ne!(a.hash, c.hash);
    // An explicit default hashes like an omitted one.
    let d = parse_config(&format!("{BASE}monitor.epsilon = 0.1\n")).unwrap();
    assert_eq!(a.hash, d.hash);
}

#[test]
fn config_errors_carry_lines_or_values() {
    let bad_line = parse_config(&format!("{BASE}this is not a pair\n")).unwrap_err();
    assert!(matches!(bad_line, ConfigError::Parse { line: Some(7), .. }), "{bad_line:?}");
    let unknown = parse_config(&format!("{BASE}grid.bogus = 1\n")).unwrap_err();
    assert!(matches!(unknown, ConfigError::Parse { line: Some(7), .. }));
    let dup = parse_config(&format!("{BASE}grid.n = 32\n")).unwrap_err();
    assert!(matches!(dup, ConfigError::Parse { line: Some(7), .. }));
    let missing = parse_config(&BASE.replace("grid.n = 16\n", "")).unwrap_err();
    assert!(matches!(missing, ConfigError::Parse { line: None, .. }));
    for bad in ["monitor.theta = 101/100", "monitor.q = 1", "grid.n = 12", "solver.viscosity = -1"] {
        let key = bad.split(" = ").next().unwrap();
        let text: String = BASE.lines().filter(|l| !l.starts_with(key)).map(|l| format!("{l}\n")).collect();
        let err = parse_config(&format!("{text}{bad}\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Validation(_)), "{bad}: {err:?}");
    }
}
