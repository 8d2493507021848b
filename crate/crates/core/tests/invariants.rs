use cvieval::evaluate::{pearson, spearman};
use cvieval::hierclust::cut_range;
use cvieval::internal_cvi::{compute, CviInput};
use cvieval::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Points plus a partition with 2 <= k <= n - 1.
fn instance() -> impl Strategy<Value = (DataMatrix, Partition)> {
    (3usize..14, 1usize..4).prop_flat_map(|(n, p)| {
        (
            prop::collection::vec(-50.0f64..50.0, n * p),
            prop::collection::vec(0usize..n - 1, n),
            2usize..n,
        )
            .prop_filter_map("need k in 2..n", move |(v, raw, kmax)| {
                let labels: Vec<usize> = raw.iter().map(|l| l % kmax).collect();
                let part = Partition::from_labels(&labels).ok()?;
                if part.k() < 2 || part.k() > n - 1 {
                    return None;
                }
                Some((DataMatrix::new(n, p, v).ok()?, part))
            })
    })
}

fn relabel(p: &Partition, seed: u64) -> Partition {
    let mut names: Vec<usize> = (1..=p.k()).collect();
    names.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Partition::new(p.labels().iter().map(|&l| names[l - 1]).collect()).unwrap()
}

fn all_values(m: &DataMatrix, p: &Partition) -> Vec<Result<f64, CviError>> {
    let d = euclidean_distances(m);
    CviKind::ALL
        .iter()
        .map(|&c| compute(c, CviInput { matrix: m, distances: &d }, p, Conventions::default()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn silhouette_and_point_biserial_are_bounded((m, p) in instance()) {
        let d = euclidean_distances(&m);
        for singleton in [SingletonScore::Zero, SingletonScore::One] {
            let s = mean_silhouette_with(&d, &p, singleton).unwrap();
            prop_assert!((-1.0..=1.0).contains(&s), "silhouette {s}");
        }
        if let Ok(r) = point_biserial(&d, &p) {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r), "pb {r}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn indices_ignore_cluster_names((m, p) in instance(), seed in any::<u64>()) {
        let renamed = relabel(&p, seed);
        // error payloads name clusters, so errors are compared by kind
        let kind = |r: Result<f64, CviError>| r.map_err(|e| std::mem::discriminant(&e));
        let a: Vec<_> = all_values(&m, &p).into_iter().map(kind).collect();
        let b: Vec<_> = all_values(&m, &renamed).into_iter().map(kind).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn indices_ignore_object_order((m, p) in instance(), seed in any::<u64>()) {
        let n = m.nrows();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let rows: Vec<Vec<f64>> = perm.iter().map(|&i| m.row(i).to_vec()).collect();
        let pm = DataMatrix::from_rows(&rows).unwrap();
        let pp = Partition::new(perm.iter().map(|&i| p.label(i)).collect()).unwrap();
        // summation order changes, so equality is up to rounding
        for (a, b) in all_values(&m, &p).into_iter().zip(all_values(&pm, &pp)) {
            match (a, b) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{a} vs {b}"),
                (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
            }
        }
    }

    #[test]
    fn ch_and_db_are_rotation_invariant((m, p) in instance(), theta in 0.0f64..std::f64::consts::TAU) {
        prop_assume!(m.ncols() >= 2);
        let (s, c) = theta.sin_cos();
        let rotated = m.map_rows(|r| {
            let mut out = r.to_vec();
            out[0] = c * r[0] - s * r[1];
            out[1] = s * r[0] + c * r[1];
            out
        }).unwrap();
        for f in [calinski_harabasz, davies_bouldin] {
            if let (Ok(a), Ok(b)) = (f(&m, &p), f(&rotated, &p)) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn point_biserial_matches_classical_formula((m, p) in instance()) {
        let d = euclidean_distances(&m);
        let Ok(r) = point_biserial(&d, &p) else { return Ok(()) };
        let (mut within, mut between) = (Vec::new(), Vec::new());
        for (i, j, v) in d.pairs() {
            if p.label(i) == p.label(j) { within.push(v) } else { between.push(v) }
        }
        let total = (within.len() + between.len()) as f64;
        let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
        let all: Vec<f64> = d.condensed().to_vec();
        let md = mean(&all);
        let sd = (all.iter().map(|v| (v - md).powi(2)).sum::<f64>() / total).sqrt();
        let fw = within.len() as f64 / total;
        let fb = between.len() as f64 / total;
        let classical = (mean(&between) - mean(&within)) * (fw * fb).sqrt() / sd;
        prop_assert!((r - classical).abs() <= 1e-12, "{r} vs {classical}");
    }

    #[test]
    fn scaling_preserves_distance_indices((m, p) in instance(), c in 0.01f64..100.0) {
        let scaled = m.map_rows(|r| r.iter().map(|v| v * c).collect()).unwrap();
        let (d, ds) = (euclidean_distances(&m), euclidean_distances(&scaled));
        let s = mean_silhouette(&d, &p).unwrap();
        prop_assert!((s - mean_silhouette(&ds, &p).unwrap()).abs() <= 1e-9);
        if let (Ok(a), Ok(b)) = (point_biserial(&d, &p), point_biserial(&ds, &p)) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        // CH is scale-free, DB is too; both up to rounding
        if let (Ok(a), Ok(b)) = (calinski_harabasz(&m, &p), calinski_harabasz(&scaled, &p)) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
        }
        if let (Ok(a), Ok(b)) = (davies_bouldin(&m, &p), davies_bouldin(&scaled, &p)) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
        }
    }

    #[test]
    fn ari_symmetry_and_relabeling(
        raw in prop::collection::vec((0usize..4, 0usize..4), 2..30),
        seed in any::<u64>(),
    ) {
        let p = Partition::from_labels(&raw.iter().map(|x| x.0).collect::<Vec<_>>()).unwrap();
        let q = Partition::from_labels(&raw.iter().map(|x| x.1).collect::<Vec<_>>()).unwrap();
        let pq = adjusted_rand(&p, &q);
        prop_assert_eq!(&pq, &adjusted_rand(&q, &p));
        prop_assert_eq!(&pq, &adjusted_rand(&relabel(&p, seed), &relabel(&q, seed ^ 1)));
        if let Ok(v) = pq {
            prop_assert!(v <= 1.0);
            prop_assert_eq!(v == 1.0, p.same_grouping(&q));
        }
    }

    #[test]
    fn upgma_heights_monotone_and_cuts_nested(
        n in 2usize..60,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dense: Vec<f64> = (0..n * 2).map(|_| rand::Rng::random_range(&mut rng, -5.0..5.0)).collect();
        let m = DataMatrix::new(n, 2, dense).unwrap();
        let tree = upgma(&euclidean_distances(&m));
        let heights: Vec<f64> = tree.heights().collect();
        for w in heights.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12, "{} after {}", w[1], w[0]);
        }
        let sizes: Vec<usize> = tree.merges().iter().map(|m| m.size).collect();
        prop_assert_eq!(*sizes.last().unwrap(), n);
        let set = cut_range(&tree, 2, n).unwrap();
        let parts: Vec<&Partition> = set.iter().map(|e| &e.partition).collect();
        for (k, part) in (2..=n).zip(&parts) {
            prop_assert_eq!(part.k(), k);
        }
        for w in parts.windows(2) {
            prop_assert!(w[1].refines(w[0]));
        }
    }
}

fn ari_vector() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.2f64..1.0, 3..25).prop_filter("max S > 0", |s| {
        s.iter().cloned().fold(f64::NEG_INFINITY, f64::max) > 0.0
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn goodness_ignores_monotone_transforms(
        s in ari_vector(),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = s.iter().map(|_| rand::Rng::random_range(&mut rng, -3.0..3.0)).collect();
        let as_values = |v: &[f64]| -> Vec<CviValue> {
            v.iter().enumerate()
                .map(|(i, &value)| CviValue { cvi: CviKind::CalinskiHarabasz, k: i + 2, value })
                .collect()
        };
        for direction in [Direction::Maximize, Direction::Minimize] {
            let b = select_best(&as_values(&v), direction).unwrap();
            let g = new_goodness(b, &s).unwrap().value;
            for t in [|x: f64| x.exp(), |x: f64| 2.0 * x + 3.0] {
                let tv: Vec<f64> = v.iter().map(|&x| t(x)).collect();
                let tb = select_best(&as_values(&tv), direction).unwrap();
                prop_assert_eq!(new_goodness(tb, &s).unwrap().value, g);
            }
        }
    }

    #[test]
    fn goodness_is_one_exactly_on_gurrutxaga_success(s in ari_vector(), pick in any::<prop::sample::Index>()) {
        let b = pick.index(s.len());
        let g = new_goodness(b, &s).unwrap().value;
        let success = gurrutxaga_score(b, &s).unwrap().value == 1.0;
        prop_assert!(g <= 1.0);
        prop_assert_eq!(g == 1.0, success);
    }

    #[test]
    fn spearman_is_rank_based_pearson_is_not(
        v in prop::collection::vec(-2.0f64..2.0, 4..20),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<f64> = v.iter().map(|_| rand::Rng::random_range(&mut rng, 0.0..1.0)).collect();
        let ev: Vec<f64> = v.iter().map(|x| x.exp()).collect();
        if let (Ok(a), Ok(b)) = (spearman(&v, &s), spearman(&ev, &s)) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn removing_irrelevant_partitions_keeps_goodness(
        s in ari_vector(),
        seed in any::<u64>(),
        drop in any::<prop::sample::Index>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = s.iter().map(|_| rand::Rng::random_range(&mut rng, -3.0..3.0)).collect();
        let values: Vec<CviValue> = v.iter().enumerate()
            .map(|(i, &value)| CviValue { cvi: CviKind::PointBiserial, k: i + 2, value })
            .collect();
        let b = select_best(&values, Direction::Maximize).unwrap();
        let top = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let r = drop.index(s.len());
        prop_assume!(r != b && s[r] != top);
        let g = new_goodness(b, &s).unwrap().value;
        let mut s2 = s.clone();
        let mut values2 = values.clone();
        s2.remove(r);
        values2.remove(r);
        let b2 = select_best(&values2, Direction::Maximize).unwrap();
        prop_assert_eq!(new_goodness(b2, &s2).unwrap().value, g);
    }
}

#[test]
fn pearson_is_not_monotone_invariant() {
    let v = [0.0, 1.0, 2.0, 3.0, 4.0];
    let s = [0.0, 1.0, 2.0, 3.0, 4.0];
    let ev: Vec<f64> = v.iter().map(|x: &f64| x.exp()).collect();
    let a = pearson(&v, &s).unwrap();
    let b = pearson(&ev, &s).unwrap();
    assert!((a - 1.0).abs() < 1e-15);
    assert!(b < 0.95, "{b}");
    assert!((spearman(&ev, &s).unwrap() - 1.0).abs() < 1e-15);
}
