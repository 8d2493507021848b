//! Implementation-independent oracles for UPGMA and the adjusted Rand index.

use cvieval::{adjusted_rand, upgma, AriError, DistanceMatrix, Partition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Average linkage recomputed from the original matrix at every step.
/// Returns `(left id, right id, height)` per merge with the same id and
/// tie conventions as the library.
fn naive_average_linkage(n: usize, d: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i + 1, vec![i])).collect();
    let mut out = Vec::new();
    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let (ida, ma) = &clusters[a];
                let (idb, mb) = &clusters[b];
                let total: f64 = ma.iter().flat_map(|&i| mb.iter().map(move |&j| d[i][j])).sum();
                let mean = total / (ma.len() * mb.len()) as f64;
                let key = ((*ida).min(*idb), (*ida).max(*idb));
                let better = match best {
                    None => true,
                    Some((bv, bk, _, _)) => mean < bv || (mean == bv && key < bk),
                };
                if better {
                    best = Some((mean, key, a, b));
                }
            }
        }
        let (h, (l, r), a, b) = best.unwrap();
        let mut merged = clusters[a].1.clone();
        merged.extend(&clusters[b].1);
        clusters.remove(b);
        clusters.remove(a);
        clusters.push((n + 1 + step, merged));
        out.push((l, r, h));
    }
    out
}

#[test]
#[allow(clippy::needless_range_loop)]
fn upgma_matches_naive_average_linkage() {
    let mut checked = 0;
    for n in 2..=8 {
        for seed in 0..120u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 31 + n as u64);
            let mut dense = vec![vec![0.0; n]; n];
            for j in 1..n {
                for i in 0..j {
                    let v: f64 = rng.random_range(0.1..10.0);
                    dense[i][j] = v;
                    dense[j][i] = v;
                }
            }
            let dm = DistanceMatrix::from_fn(n, |i, j| dense[i][j]).unwrap();
            let tree = upgma(&dm);
            let oracle = naive_average_linkage(n, &dense);
            assert_eq!(tree.merges().len(), n - 1);
            for (m, (l, r, h)) in tree.merges().iter().zip(&oracle) {
                assert!((m.height - h).abs() <= 1e-9, "n={n} seed={seed}: {} vs {h}", m.height);
                assert_eq!((m.left, m.right), (*l, *r), "n={n} seed={seed}");
            }
            checked += 1;
        }
    }
    assert!(checked >= 100);
}

/// ARI from a direct count over all object pairs.
fn brute_force_ari(p: &[usize], q: &[usize]) -> Option<f64> {
    let n = p.len();
    let (mut both, mut in_p, mut in_q, mut total) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let sp = p[i] == p[j];
            let sq = q[i] == q[j];
            total += 1;
            in_p += sp as u64;
            in_q += sq as u64;
            both += (sp && sq) as u64;
        }
    }
    let (both, in_p, in_q, total) = (both as f64, in_p as f64, in_q as f64, total as f64);
    let expected = in_p * in_q / total;
    let max = (in_p + in_q) / 2.0;
    if max - expected == 0.0 {
        return None;
    }
    Some((both - expected) / (max - expected))
}

#[test]
fn ari_matches_pair_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut compared = 0;
    for trial in 0..800 {
        let n = 2 + trial % 6;
        let kp = rng.random_range(1..=n);
        let kq = rng.random_range(1..=n);
        let p: Vec<usize> = (0..n).map(|_| rng.random_range(0..kp)).collect();
        let q: Vec<usize> = (0..n).map(|_| rng.random_range(0..kq)).collect();
        let pp = Partition::from_labels(&p).unwrap();
        let qq = Partition::from_labels(&q).unwrap();
        match (adjusted_rand(&pp, &qq), brute_force_ari(&p, &q)) {
            (Ok(a), Some(b)) => {
                assert!((a - b).abs() <= 1e-12, "{p:?} {q:?}: {a} vs {b}");
                compared += 1;
            }
            (Err(AriError::ZeroDenominator), None) => {}
            (a, b) => panic!("{p:?} {q:?}: library {a:?}, oracle {b:?}"),
        }
    }
    assert!(compared >= 500, "only {compared} non-degenerate pairs");
}
