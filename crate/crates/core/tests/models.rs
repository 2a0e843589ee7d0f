use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use multifault::metrics::{build_report, confusion, per_label_accuracy, prf1, subset_accuracy};
use multifault::mlc::{
    iso_severity_lookup, train_binary_relevance, train_chain, train_gnb, train_mlknn,
    train_severity_tree, train_tree, MachineClass, Severity, TreeParams,
};

fn matrix(rows: usize, cols: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect()
}

fn labels(rows: usize, cols: usize, seed: u64) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rows)
        .map(|_| (0..cols).map(|_| u8::from(rng.random_bool(0.5))).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gnb_posteriors_form_a_distribution(seed in any::<u64>(), m in 4usize..40, d in 1usize..6) {
        let x = matrix(m, d, seed);
        let y: Vec<usize> = (0..m).map(|i| i % 3).collect();
        let model = train_gnb(&x, &y).unwrap();
        for q in matrix(5, d, seed ^ 1) {
            let p = model.posterior(&q).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn unlimited_tree_memorizes_distinct_rows(seed in any::<u64>(), m in 2usize..50, d in 1usize..5) {
        let x = matrix(m, d, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let y: Vec<usize> = (0..m).map(|_| rng.random_range(0..3)).collect();
        let tree = train_tree(&x, &y, TreeParams::default()).unwrap();
        for (r, c) in x.iter().zip(&y) {
            prop_assert_eq!(tree.predict(r).unwrap().class, *c);
        }
    }

    #[test]
    fn binary_relevance_is_column_independent(seed in any::<u64>(), m in 4usize..30) {
        let x = matrix(m, 3, seed);
        let y = labels(m, 3, seed ^ 3);
        let perm = [2usize, 0, 1];
        let y_perm: Vec<Vec<u8>> = y.iter().map(|r| perm.iter().map(|&j| r[j]).collect()).collect();
        let a = train_binary_relevance(&x, &y, TreeParams::default()).unwrap();
        let b = train_binary_relevance(&x, &y_perm, TreeParams::default()).unwrap();
        for q in matrix(8, 3, seed ^ 5) {
            let pa = a.predict(&q).unwrap();
            let pb = b.predict(&q).unwrap();
            for (pos, &j) in perm.iter().enumerate() {
                prop_assert_eq!(pb[pos], pa[j]);
            }
        }
    }

    #[test]
    fn single_label_chain_is_plain_gnb(seed in any::<u64>(), m in 4usize..30, d in 1usize..5) {
        let x = matrix(m, d, seed);
        let y = labels(m, 1, seed ^ 11);
        let classes: Vec<usize> = y.iter().map(|r| usize::from(r[0])).collect();
        let chain = train_chain(&x, &y, &[0]).unwrap();
        let gnb = train_gnb(&x, &classes).unwrap();
        for q in matrix(10, d, seed ^ 13) {
            let p1 = gnb.probability_of(&q, 1).unwrap();
            prop_assert_eq!(chain.predict(&q).unwrap()[0], u8::from(p1 >= 0.5));
        }
    }

    #[test]
    fn mlknn_k1_copies_an_exact_duplicate(seed in any::<u64>(), m in 3usize..25, d in 1usize..5) {
        let x = matrix(m, d, seed);
        let y = labels(m, 2, seed ^ 17);
        let model = train_mlknn(&x, &y, 1, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let i = rng.random_range(0..m);
        // with k=1 the only neighbour is the duplicate; the learned tables
        // decide whether that vote is trusted, so compare against the tables
        let p = model.predict(&x[i]).unwrap();
        for j in 0..2 {
            let c = usize::from(y[i][j]);
            let yes = model.priors[j] * (1.0 + model.with_label[j][c] as f64)
                / (2.0 + model.with_label[j].iter().sum::<usize>() as f64);
            let no = (1.0 - model.priors[j]) * (1.0 + model.without_label[j][c] as f64)
                / (2.0 + model.without_label[j].iter().sum::<usize>() as f64);
            prop_assert_eq!(p[j], u8::from(yes >= no));
        }
    }

    #[test]
    fn subset_accuracy_bounded_by_each_label(seed in any::<u64>(), n in 1usize..30, l in 1usize..5) {
        let t = labels(n, l, seed);
        let p = labels(n, l, seed ^ 19);
        let subset = subset_accuracy(&t, &p).unwrap();
        for a in per_label_accuracy(&t, &p).unwrap() {
            prop_assert!(subset <= a);
        }
    }

    #[test]
    fn swapping_positive_class_swaps_counts(seed in any::<u64>(), n in 1usize..30, l in 1usize..4) {
        let t = labels(n, l, seed);
        let p = labels(n, l, seed ^ 23);
        let one = confusion(&t, &p, 1).unwrap();
        let zero = confusion(&t, &p, 0).unwrap();
        prop_assert_eq!((one.tp, one.fp, one.fn_, one.tn), (zero.tn, zero.fn_, zero.fp, zero.tp));
        let (pr, re, f1) = prf1(&one);
        prop_assert!((0.0..=1.0).contains(&pr) && (0.0..=1.0).contains(&re) && (0.0..=1.0).contains(&f1));
        if pr == re {
            prop_assert_eq!(f1, pr);
        }
        let r1 = build_report("m", &["a", "b", "c", "d"][..l], &t, &p).unwrap();
        let r2 = build_report("m", &["a", "b", "c", "d"][..l], &t, &p).unwrap();
        prop_assert_eq!(r1, r2);
    }
}

#[test]
fn chain_uses_an_exact_label_dependency() {
    // label 2 copies label 1; feature 0 carries label 1 with Gaussian noise and
    // the remaining features are pure noise
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let noise = Normal::new(0.0, 0.45).unwrap();
    let mut make = |n: usize| -> (Vec<Vec<f64>>, Vec<Vec<u8>>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let l = u8::from(rng.random_bool(0.5));
            let mut row = vec![f64::from(l) + noise.sample(&mut rng)];
            row.extend((0..4).map(|_| noise.sample(&mut rng) * 3.0));
            x.push(row);
            y.push(vec![l, l]);
        }
        (x, y)
    };
    let (xtr, ytr) = make(80);
    let (xte, yte) = make(400);
    let chain = train_chain(&xtr, &ytr, &[0, 1]).unwrap();
    // binary relevance with the same base learner: one independent GNB per label
    let per_label: Vec<_> = (0..2)
        .map(|j| {
            let col: Vec<usize> = ytr.iter().map(|r| usize::from(r[j])).collect();
            train_gnb(&xtr, &col).unwrap()
        })
        .collect();
    let acc = |pred: Vec<Vec<u8>>| per_label_accuracy(&yte, &pred).unwrap()[1];
    let chain_acc = acc(xte.iter().map(|q| chain.predict(q).unwrap()).collect());
    let br_acc = acc(xte
        .iter()
        .map(|q| {
            per_label
                .iter()
                .map(|m| u8::from(m.probability_of(q, 1).unwrap() >= 0.5))
                .collect()
        })
        .collect());
    assert!(
        chain_acc >= br_acc,
        "chain {chain_acc} vs binary relevance {br_acc}"
    );
}

#[test]
fn severity_tree_recovers_chart_thresholds() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let class = MachineClass::II;
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(0.0..25.0)).collect() };
    let train_v = draw(300);
    let test_v = draw(200);
    let label = |v: &[f64]| -> Vec<Severity> {
        v.iter()
            .map(|&x| iso_severity_lookup(x, class).unwrap())
            .collect()
    };
    let rows = |v: &[f64]| -> Vec<Vec<f64>> { v.iter().map(|&x| vec![x]).collect() };
    let model =
        train_severity_tree(&rows(&train_v), &label(&train_v), TreeParams::default()).unwrap();
    let truth = label(&test_v);
    let hits = test_v
        .iter()
        .zip(&truth)
        .filter(|(v, s)| model.predict(&[**v]).unwrap() == **s)
        .count();
    assert!(hits as f64 / test_v.len() as f64 >= 0.95, "{hits}/200");

    let mut sorted = train_v.clone();
    sorted.sort_by(f64::total_cmp);
    let thresholds: Vec<f64> = model
        .tree
        .thresholds()
        .into_iter()
        .map(|(_, t)| t)
        .collect();
    assert_eq!(thresholds.len(), 3);
    for b in [2.80, 7.71, 18.0] {
        let i = sorted.partition_point(|v| *v < b);
        let gap = sorted[i] - sorted[i - 1];
        let nearest = thresholds
            .iter()
            .map(|t| (t - b).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(
            nearest <= gap,
            "boundary {b}: nearest threshold {nearest}, gap {gap}"
        );
    }
}

#[test]
fn all_present_label_is_always_predicted_by_mlknn() {
    let x = matrix(20, 3, 4);
    let y: Vec<Vec<u8>> = (0..20).map(|i| vec![1, (i % 2) as u8]).collect();
    let model = train_mlknn(&x, &y, 4, 1.0).unwrap();
    for q in matrix(30, 3, 9) {
        assert_eq!(model.predict(&q).unwrap()[0], 1);
    }
}
