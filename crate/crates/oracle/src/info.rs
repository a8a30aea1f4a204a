//! Mutual information by direct counting and expected MI by enumerating
//! every permutation.

fn count_of<T: PartialEq>(xs: &[T], x: &T) -> usize {
    xs.iter().filter(|y| *y == x).count()
}

fn distinct(xs: &[usize]) -> Vec<usize> {
    let mut d: Vec<usize> = Vec::new();
    for &x in xs {
        if !d.contains(&x) {
            d.push(x);
        }
    }
    d
}

pub fn entropy(labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    distinct(labels)
        .iter()
        .map(|l| {
            let p = count_of(labels, l) as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `Σ P(u,v) ln(P(u,v) / (P(u) P(v)))` over observed label pairs.
pub fn mutual_info(u: &[usize], v: &[usize]) -> f64 {
    assert_eq!(u.len(), v.len());
    let n = u.len() as f64;
    let pairs: Vec<(usize, usize)> = u.iter().copied().zip(v.iter().copied()).collect();
    let mut mi = 0.0;
    for a in distinct(u) {
        for b in distinct(v) {
            let joint = count_of(&pairs, &(a, b)) as f64 / n;
            if joint > 0.0 {
                let pa = count_of(u, &a) as f64 / n;
                let pb = count_of(v, &b) as f64 / n;
                mi += joint * (joint / (pa * pb)).ln();
            }
        }
    }
    mi
}

fn for_each_permutation(items: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        for_each_permutation(items, k + 1, f);
        items.swap(k, i);
    }
}

/// Mean MI between `u` and every one of the `n!` rearrangements of `v`.
pub fn expected_mi_by_permutation(u: &[usize], v: &[usize]) -> f64 {
    assert!(v.len() <= 9, "n! enumeration only for tiny inputs");
    let mut total = 0.0;
    let mut count = 0usize;
    let mut items = v.to_vec();
    for_each_permutation(&mut items, 0, &mut |perm| {
        total += mutual_info(u, perm);
        count += 1;
    });
    total / count as f64
}

/// Label sequences realizing a contingency table (row index, column index).
pub fn labels_from_table(table: &[Vec<usize>]) -> (Vec<usize>, Vec<usize>) {
    let mut u = Vec::new();
    let mut v = Vec::new();
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            for _ in 0..c {
                u.push(i);
                v.push(j);
            }
        }
    }
    (u, v)
}
