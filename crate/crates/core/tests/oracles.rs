//! Library results checked against independent brute-force or closed-form
//! routes computed here.

use pmvlc::analysis::{ber_union_bound, pairwise_error_prob};
use pmvlc::assignment::hungarian;
use pmvlc::channel::{build_channel, ebn0_to_n0, fixture_h02, GridLayout, LambertianParams, RoomGeometry, SignalEnergy};
use pmvlc::codebook::{count_distance_l, enumerate_weight_w, Codebook};
use pmvlc::detectors::{bb_exact, ml_detect, SdConfig, SdDecoder, SideInfo};
use pmvlc::txcodec::{transmit_matrix, PamConfig};
use pmvlc::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Heap's algorithm.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        go(k - 1, a, out);
        for i in 0..k - 1 {
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            go(k - 1, a, out);
        }
    }
    let mut out = Vec::new();
    go(n, &mut (0..n).collect(), &mut out);
    out
}

#[test]
fn distance_l_count_matches_brute_force() {
    let frozen = [1u128, 2, 9, 44, 265, 1854];
    for len in 2..=7 {
        let perms = permutations(len);
        let reference = &perms[perms.len() / 3];
        let brute = perms.iter().filter(|p| p.iter().zip(reference).all(|(a, b)| a != b)).count() as u128;
        assert_eq!(brute, frozen[len - 2], "L = {len}");
        assert_eq!(count_distance_l(len).unwrap(), brute, "L = {len}");
    }
}

#[test]
fn weight_classes_match_exhaustive_binary_matrices() {
    for (len, weights) in [(3usize, vec![1usize, 2]), (4, vec![1, 2, 3])] {
        for w in weights {
            let mut brute: Vec<Vec<u8>> = Vec::new();
            for mask in 0u32..(1 << (len * len)) {
                let cell = |i: usize, j: usize| (mask >> (i * len + j)) & 1;
                let rows_ok = (0..len).all(|i| (0..len).map(|j| cell(i, j)).sum::<u32>() as usize == w);
                let cols_ok = (0..len).all(|j| (0..len).map(|i| cell(i, j)).sum::<u32>() as usize == w);
                if rows_ok && cols_ok {
                    brute.push((0..len * len).map(|k| ((mask >> k) & 1) as u8).collect());
                }
            }
            let cb = enumerate_weight_w(len, w).unwrap();
            let mut ours: Vec<Vec<u8>> = cb.entries().iter().map(|e| e.entries().to_vec()).collect();
            brute.sort();
            ours.sort();
            assert_eq!(ours, brute, "L = {len}, w = {w}");
        }
    }
    assert_eq!(enumerate_weight_w(4, 2).unwrap().size(), 90);
}

#[test]
fn channel_gain_matches_angle_form() {
    let params = LambertianParams::default();
    for (spacing, offset) in [(0.2, 0.0), (0.6, 0.0), (0.6, 0.2), (0.6, 0.4)] {
        let layout = GridLayout { tx_spacing: spacing, rx_offset: offset, ..GridLayout::default() };
        let h = build_channel(&RoomGeometry::grid(layout).unwrap(), &params).unwrap();
        let order = (0.5f64).ln() / (15f64.to_radians().cos()).ln();
        let coords = |s: f64, dx: f64| -> Vec<(f64, f64)> {
            let mut v = Vec::new();
            for ix in [-0.5, 0.5] {
                for iy in [-0.5, 0.5] {
                    v.push((ix * s + dx, iy * s));
                }
            }
            v
        };
        let leds = coords(spacing, 0.0);
        let pds = coords(0.1, offset);
        for (i, pd) in pds.iter().enumerate() {
            for (j, led) in leds.iter().enumerate() {
                let r = ((pd.0 - led.0).powi(2) + (pd.1 - led.1).powi(2)).sqrt();
                let angle = r.atan2(1.75);
                let d2 = r * r + 1.75 * 1.75;
                let expected = if angle > 15f64.to_radians() {
                    0.0
                } else {
                    (order + 1.0) * 1e-4 / (2.0 * std::f64::consts::PI * d2) * angle.cos().powf(order + 1.0)
                };
                let got = h.gains()[(i, j)];
                assert!((got - expected).abs() <= 1e-12 * expected.max(1e-12), "{spacing} {offset} ({i},{j})");
            }
        }
    }
}

fn noisy(h: &Mat, s: &Mat, sigma: f64, rng: &mut ChaCha8Rng) -> Mat {
    let mut y = h.matmul(s).unwrap();
    for v in y.as_mut_slice() {
        *v += sigma * (rng.random::<f64>() - 0.5) * 3.4;
    }
    y
}

#[test]
fn ml_matches_direct_distance_search() {
    let h = fixture_h02().gains().clone();
    let cb = enumerate_weight_w(4, 1).unwrap();
    let pam = PamConfig::new(2, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let q = rng.random_range(0..16);
        let m = rng.random_range(1..=2);
        let y = noisy(&h, &transmit_matrix(&cb, &pam, q, m).unwrap(), 3e-5, &mut rng);
        let mut best = (f64::INFINITY, 0, 0);
        for q2 in 0..16 {
            for m2 in 1..=2 {
                let d = y.sub(&h.matmul(&transmit_matrix(&cb, &pam, q2, m2).unwrap()).unwrap()).unwrap();
                let dist: f64 = d.as_slice().iter().map(|v| v * v).sum();
                if dist < best.0 {
                    best = (dist, q2, m2);
                }
            }
        }
        let r = ml_detect(&y, &h, &cb, &pam).unwrap();
        assert_eq!((r.entry, r.level), (best.1, best.2));
    }
}

#[test]
fn bf_sd_matches_trace_search() {
    let h = fixture_h02().gains().clone();
    let cb = enumerate_weight_w(4, 2).unwrap();
    let pam = PamConfig::unit();
    let dec = SdDecoder::new(&cb, &pam, SdConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..300 {
        let q = rng.random_range(0..cb.size());
        let y = noisy(&h, &transmit_matrix(&cb, &pam, q, 1).unwrap(), 2e-5, &mut rng);
        // minimise -tr(Y^T S) over the class
        let mut best = (f64::INFINITY, 0);
        for (q2, e) in cb.entries().iter().enumerate() {
            let s = e.to_mat();
            let t: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| -y[(i, j)] * s[(i, j)]).sum();
            if t < best.0 {
                best = (t, q2);
            }
        }
        let r = dec.detect_bf(&y, SideInfo { true_weight: Some(2) }).unwrap();
        assert_eq!(r.entry, best.1);
    }
}

#[test]
fn exact_tree_reference_is_exhaustive_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let perms = permutations(4);
    for _ in 0..200 {
        let y = Mat::from_vec(4, 4, (0..16).map(|_| rng.random::<f64>()).collect()).unwrap();
        let best = perms
            .iter()
            .map(|p| (p.iter().enumerate().map(|(i, &j)| -y[(i, j)]).sum::<f64>(), p))
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .unwrap();
        let a = bb_exact(&y).unwrap();
        assert_eq!(&a.perm, best.1);
        assert_eq!(hungarian(&y.neg()).unwrap().perm, a.perm);
    }
}

/// Craig's form of the Gaussian tail.
fn q_craig(x: f64) -> f64 {
    let n = 20_000;
    let h = std::f64::consts::FRAC_PI_2 / n as f64;
    let f = |t: f64| if t == 0.0 { 0.0 } else { (-x * x / (2.0 * t.sin().powi(2))).exp() };
    let mut s = f(0.0) + f(std::f64::consts::FRAC_PI_2);
    for k in 1..n {
        s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 / std::f64::consts::PI
}

#[test]
fn union_bound_matches_direct_pair_sum() {
    let h = fixture_h02().gains().clone();
    let cb = Codebook::from_strs(&["4321", "4132", "3124", "3412", "2431", "2143", "2314", "1342"]).unwrap();
    let pam = PamConfig::new(2, 1.0).unwrap();
    let grid = [96.0, 100.0, 104.0];
    let curve = ber_union_bound("cb", &cb, &pam, &h, &grid, SignalEnergy::default()).unwrap();
    let labels = 16u64;
    let bits = 4u32;
    for (k, &db) in grid.iter().enumerate() {
        let n0 = ebn0_to_n0(db, 1.0, bits);
        let mut sum = 0.0;
        for a in 0..labels {
            for b in 0..labels {
                if a == b {
                    continue;
                }
                let sa = transmit_matrix(&cb, &pam, (a / 2) as usize, (a % 2 + 1) as usize).unwrap();
                let sb = transmit_matrix(&cb, &pam, (b / 2) as usize, (b % 2 + 1) as usize).unwrap();
                let d = h.matmul(&sa.sub(&sb).unwrap()).unwrap();
                let d2: f64 = d.as_slice().iter().map(|v| v * v).sum();
                let pep = q_craig((d2 / (2.0 * n0)).sqrt());
                assert!((pep - pairwise_error_prob(&sa, &sb, &h, 1.0, n0).unwrap()).abs() < 1e-9);
                sum += (a ^ b).count_ones() as f64 * pep;
            }
        }
        let direct = sum / (labels as f64 * bits as f64);
        assert!((curve.values[k] - direct).abs() <= 1e-7 * direct, "{db}: {} vs {direct}", curve.values[k]);
    }
}
