//! Mutual information, EMI and AMI against direct counting and the
//! exhaustive permutation model.

use moistkit::clustering::{ami, contingency, entropy, expected_mi, mutual_info, ContingencyTable};
use moistkit_oracle::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_table(rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    loop {
        let rows = rng.random_range(1..=3);
        let cols = rng.random_range(1..=3);
        let t: Vec<Vec<usize>> = (0..rows).map(|_| (0..cols).map(|_| rng.random_range(0..=2)).collect()).collect();
        let n: usize = t.iter().flatten().sum();
        let full = t.iter().all(|r| r.iter().sum::<usize>() > 0) && (0..cols).all(|j| t.iter().map(|r| r[j]).sum::<usize>() > 0);
        if (1..=7).contains(&n) && full {
            return t;
        }
    }
}

#[test]
fn emi_matches_permutation_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..60 {
        let t = random_table(&mut rng);
        let (u, v) = info::labels_from_table(&t);
        let table = ContingencyTable::from_counts(t.iter().map(|r| r.iter().map(|&c| c as u64).collect()).collect()).unwrap();
        let got = expected_mi(&table);
        let want = info::expected_mi_by_permutation(&u, &v);
        assert!((got - want).abs() < 1e-9, "{t:?}: {got} vs {want}");
    }
}

#[test]
fn mi_and_entropy_match_direct_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..100 {
        let n = rng.random_range(1..40);
        let u: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let v: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let mi = mutual_info(&contingency(&u, &v).unwrap());
        assert!((mi - info::mutual_info(&u, &v)).abs() < 1e-12);
        assert!((entropy(&u) - info::entropy(&u)).abs() < 1e-12);
    }
}

#[test]
fn worked_examples() {
    let diag = contingency(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap();
    assert!((mutual_info(&diag) - 2f64.ln()).abs() < 1e-15);
    let indep = contingency(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
    assert_eq!(mutual_info(&indep), 0.0);
    assert!((entropy(&[0, 0, 0, 1]) - 0.562_335).abs() < 1e-6);
    assert_eq!(ami(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap(), 1.0);
    assert_eq!(ami(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
    assert!(ami(&[0, 1], &[0]).is_err());
    // both labelings constant: same partition
    assert_eq!(ami(&[3, 3, 3], &[1, 1, 1]).unwrap(), 1.0);
    // one constant, one not: different partitions
    assert_eq!(ami(&[0, 0, 0, 0], &[0, 1, 0, 1]).unwrap(), 0.0);
}

#[test]
fn chance_level_ami_is_near_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let trials = 200;
    let mean: f64 = (0..trials)
        .map(|_| {
            let u: Vec<usize> = (0..60).map(|_| rng.random_range(0..3)).collect();
            let v: Vec<usize> = (0..60).map(|_| rng.random_range(0..3)).collect();
            ami(&u, &v).unwrap()
        })
        .sum::<f64>()
        / trials as f64;
    assert!(mean.abs() <= 0.05, "mean AMI {mean}");
}

#[test]
fn emi_handles_hundreds_of_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let u: Vec<usize> = (0..600).map(|_| rng.random_range(0..3)).collect();
    let v: Vec<usize> = (0..600).map(|_| rng.random_range(0..5)).collect();
    let t = contingency(&u, &v).unwrap();
    let emi = expected_mi(&t);
    assert!(emi.is_finite() && emi > 0.0 && emi < 0.05);
}
