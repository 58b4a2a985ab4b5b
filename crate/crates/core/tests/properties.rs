use pmvlc::assignment::{hungarian, murty_enumerate};
use pmvlc::channel::transmit;
use pmvlc::codebook::{
    bits_to_label, combine_codebooks, cyclic_latin_codebook, enumerate_weight_w, hamming_distance, Codeword,
    CodewordMatrix,
};
use pmvlc::txcodec::{encode_label, PamConfig};
use pmvlc::Mat;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn codeword(len: usize) -> impl Strategy<Value = Codeword> {
    Just((1..=len as u8).collect::<Vec<u8>>())
        .prop_shuffle()
        .prop_map(|s| Codeword::new(s).unwrap())
}

fn cost_matrix(n: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec(-5.0f64..5.0, n * n).prop_map(move |v| Mat::from_vec(n, n, v).unwrap())
}

proptest! {
    #[test]
    fn latin_components_give_regular_matrices(c0 in codeword(5), w in 1usize..5) {
        let rows = cyclic_latin_codebook(&c0);
        for a in 0..w {
            for b in a + 1..w {
                prop_assert_eq!(hamming_distance(&rows[a], &rows[b]).unwrap(), 5);
            }
        }
        let m = CodewordMatrix::from_components(rows[..w].to_vec()).unwrap();
        let dense = m.to_mat();
        for i in 0..5 {
            prop_assert_eq!(dense.row(i).iter().sum::<f64>(), w as f64);
            prop_assert_eq!((0..5).map(|r| dense[(r, i)]).sum::<f64>(), w as f64);
        }
        prop_assert_eq!(m.weight(), w);
    }

    #[test]
    fn hamming_is_a_metric(a in codeword(6), b in codeword(6), c in codeword(6)) {
        let d = |x: &Codeword, y: &Codeword| hamming_distance(x, y).unwrap();
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        prop_assert!(d(&a, &b) != 1);
    }

    #[test]
    fn labels_bits_and_entries_are_bijective(levels in 1usize..5, take2 in 1usize..40) {
        let cb = combine_codebooks(&[
            enumerate_weight_w(4, 1).unwrap(),
            enumerate_weight_w(4, 2).unwrap().take_first(take2),
        ])
        .unwrap();
        let pam = PamConfig::new(levels, 1.0).unwrap();
        let n = cb.signaling_points(levels);
        prop_assert!(n.is_power_of_two());
        prop_assert!(n <= (cb.size() * levels) as u64);
        prop_assert!(2 * n > (cb.size() * levels) as u64);
        let mut seen = std::collections::HashSet::new();
        for label in 0..n {
            let (q, m) = cb.label_to_entry(label, levels).unwrap();
            prop_assert!(seen.insert((q, m)));
            let bits = cb.entry_to_bits(q, m, levels).unwrap();
            prop_assert_eq!(bits.len() as u32, cb.bits_per_block(levels));
            prop_assert_eq!(bits_to_label(&bits), label);
            let block = encode_label(label, &cb, &pam).unwrap();
            prop_assert!((block.signal.sum() - 2.0 * m as f64 * 4.0 / (levels as f64 + 1.0)).abs() < 1e-12);
        }
        prop_assert!(cb.label_to_entry(n, levels).is_err());
    }

    #[test]
    fn hungarian_beats_every_sampled_assignment(costs in cost_matrix(5), p in Just((0..5usize).collect::<Vec<_>>()).prop_shuffle()) {
        let best = hungarian(&costs).unwrap();
        let other: f64 = p.iter().enumerate().map(|(i, &j)| costs[(i, j)]).sum();
        prop_assert!(best.cost <= other + 1e-12);
    }

    #[test]
    fn murty_prefix_is_sorted_and_distinct(costs in cost_matrix(4), k in 1usize..24) {
        let list = murty_enumerate(&costs, k).unwrap();
        prop_assert_eq!(list.len(), k);
        for w in list.windows(2) {
            prop_assert!(w[0].cost <= w[1].cost);
        }
        let set: std::collections::HashSet<_> = list.iter().map(|a| a.perm.clone()).collect();
        prop_assert_eq!(set.len(), k);
        prop_assert_eq!(&list[0].perm, &hungarian(&costs).unwrap().perm);
    }
}

#[test]
fn noise_has_zero_mean_and_half_n0_variance() {
    let n0 = 3.0e-9;
    let h = Mat::identity(4);
    let s = Mat::zeros(4, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut sum = 0.0;
    let mut sq = 0.0;
    let mut count = 0.0;
    for _ in 0..20_000 {
        let y = transmit(&s, &h, n0, &mut rng).unwrap();
        for &v in y.as_slice() {
            sum += v;
            sq += v * v;
            count += 1.0;
        }
    }
    let var = n0 / 2.0;
    let mean = sum / count;
    let est = sq / count;
    // five standard errors of each estimator
    assert!(mean.abs() < 5.0 * (var / count).sqrt(), "mean {mean}");
    assert!((est - var).abs() < 5.0 * var * (2.0 / count).sqrt(), "variance {est} vs {var}");
}

#[test]
fn signal_passes_unchanged_without_noise() {
    let cb = enumerate_weight_w(4, 2).unwrap();
    let block = encode_label(5, &cb, &PamConfig::unit()).unwrap();
    let h = Mat::from_vec(4, 4, (1..=16).map(f64::from).collect()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let y = transmit(&block.signal, &h, 0.0, &mut rng).unwrap();
    assert_eq!(y, h.matmul(&block.signal).unwrap());
}
