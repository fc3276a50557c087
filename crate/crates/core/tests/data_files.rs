use std::io::{BufReader, Write};

use lshxdp::data::{
    build_vectors, load_events, read_snapshot, synthesize, write_snapshot, EventFormat, SynthSpec, VectorMode,
};

#[test]
fn events_file_to_snapshot_and_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ratings.tsv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "user\titem\tvalue").unwrap();
    writeln!(f, "alice\t0\t5").unwrap();
    writeln!(f, "alice\t2\t3").unwrap();
    writeln!(f, "bob\t1\t4").unwrap();
    writeln!(f, "bob\t2\t2").unwrap();
    drop(f);
    assert_eq!(EventFormat::from_path(&path), EventFormat::Tsv);
    let events = load_events(&path, EventFormat::Tsv, 3, true).unwrap();
    assert_eq!(events.len(), 4);
    let s = build_vectors(&events, 3, VectorMode::RatingCentered).unwrap();
    assert_eq!(s.ids(), ["alice", "bob"]);

    let snap = dir.path().join("users.snapshot");
    write_snapshot(&s, std::fs::File::create(&snap).unwrap()).unwrap();
    let back = read_snapshot(BufReader::new(std::fs::File::open(&snap).unwrap())).unwrap();
    assert_eq!(back.ids(), s.ids());
    for (a, b) in back.vectors().iter().zip(s.vectors()) {
        assert_eq!(a.to_dense(), b.to_dense());
    }
}

#[test]
fn synthetic_snapshot_is_bit_exact() {
    let s = synthesize(&SynthSpec {
        n: 30,
        clusters: 3,
        users_per_cluster: 4,
        sigma_theta: 0.07,
        seed: 5,
    })
    .unwrap();
    let mut buf = Vec::new();
    write_snapshot(&s, &mut buf).unwrap();
    let back = read_snapshot(buf.as_slice()).unwrap();
    let mut again = Vec::new();
    write_snapshot(&back, &mut again).unwrap();
    assert_eq!(buf, again);
}
