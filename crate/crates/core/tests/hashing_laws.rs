use lshxdp::audit::{estimate_collision_rate, hamming_law_check};
use lshxdp::lsh::{hash, sample_family};
use lshxdp::vectors::{angular_distance, hamming_distance, DenseVector, SparseVector};

fn at_angle(d_theta: f64) -> (DenseVector, DenseVector) {
    let t = std::f64::consts::PI * d_theta;
    (
        DenseVector::new(vec![1.0, 0.0, 0.0]).unwrap(),
        DenseVector::new(vec![t.cos(), t.sin(), 0.0]).unwrap(),
    )
}

#[test]
fn one_bit_mismatch_rate_tracks_angle() {
    for (i, d) in [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0].into_iter().enumerate() {
        let (x, y) = at_angle(d);
        assert!((angular_distance(&x, &y).unwrap() - d).abs() < 1e-9);
        let r = estimate_collision_rate(&x, &y, 10_000, 100 + i as u64).unwrap();
        assert!(r.pass, "d={d}: {r:?}");
    }
}

#[test]
fn binomial_hamming_law() {
    let (x, y) = at_angle(0.25);
    for (kappa, seed) in [(20, 1), (10, 2), (50, 3)] {
        let r = hamming_law_check(&x, &y, kappa, 1000, seed).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn sparse_and_dense_inputs_hash_alike() {
    let fam = sample_family(50, 64, 9).unwrap();
    let sparse = SparseVector::new(50, vec![(3, 1.5), (17, -2.0), (49, 0.25)]).unwrap();
    let dense = sparse.to_dense();
    assert_eq!(hash(&fam, &sparse).unwrap(), hash(&fam, &dense).unwrap());
}

#[test]
fn hamming_fraction_concentrates_for_long_codes() {
    let (x, y) = at_angle(0.3);
    let fam = sample_family(3, 4096, 12).unwrap();
    let dv = hamming_distance(&hash(&fam, &x).unwrap(), &hash(&fam, &y).unwrap()).unwrap();
    let frac = dv as f64 / 4096.0;
    // sd = sqrt(0.21/4096) ≈ 0.0072
    assert!((frac - 0.3).abs() < 0.022, "{frac}");
}
