mod oracle;

use kan_imbalance::stats::{cohens_d_paired, paired_test, wilcoxon_signed_rank, PairedSample};
use kan_imbalance::Error;
use proptest::prelude::*;

fn sample_of(d: &[f64]) -> PairedSample {
    PairedSample::new(d.to_vec(), vec![0.0; d.len()]).unwrap()
}

#[test]
fn all_sign_patterns_of_a_fixed_vector() {
    let magnitudes = [0.3, 1.1, 0.7, 2.4, 0.05, 1.6, 0.9, 3.2];
    for mask in 0u32..256 {
        let d: Vec<f64> = magnitudes
            .iter()
            .enumerate()
            .map(|(i, m)| if mask >> i & 1 == 1 { -m } else { *m })
            .collect();
        let got = wilcoxon_signed_rank(&sample_of(&d)).unwrap().p_value;
        assert_eq!(got, oracle::wilcoxon_p(&d), "pattern {mask:08b}");
    }
}

#[test]
fn tied_magnitudes_match_enumeration() {
    let magnitudes = [0.5, 0.5, 1.0, 2.0, 2.0, 2.0, 3.0];
    for mask in 0u32..128 {
        let d: Vec<f64> = magnitudes
            .iter()
            .enumerate()
            .map(|(i, m)| if mask >> i & 1 == 1 { -m } else { *m })
            .collect();
        let got = wilcoxon_signed_rank(&sample_of(&d)).unwrap().p_value;
        assert!((got - oracle::wilcoxon_p(&d)).abs() < 1e-15, "pattern {mask:07b}");
    }
}

#[test]
fn reference_values() {
    let ten: Vec<f64> = (1..=10).map(|i| i as f64 * 0.1).collect();
    assert_eq!(wilcoxon_signed_rank(&sample_of(&ten)).unwrap().p_value, 2.0 / 1024.0);
    assert_eq!(wilcoxon_signed_rank(&sample_of(&[0.0, 0.4, 0.0])).unwrap().p_value, 1.0);
    let same = PairedSample::new(vec![0.3, 0.4, 0.5], vec![0.3, 0.4, 0.5]).unwrap();
    assert!(matches!(wilcoxon_signed_rank(&same), Err(Error::DegenerateTest(_))));
    assert!(matches!(paired_test(&same), Err(Error::DegenerateTest(_))));
}

#[test]
fn cohens_d_by_hand() {
    // differences 1, 2, 3: mean 2, sd 1
    let s = PairedSample::new(vec![2.0, 4.0, 6.0], vec![1.0, 2.0, 3.0]).unwrap();
    assert!((cohens_d_paired(&s).unwrap() - 2.0).abs() < 1e-12);
    assert!((cohens_d_paired(&s.swapped()).unwrap() + 2.0).abs() < 1e-12);
}

#[test]
fn large_samples_use_the_normal_approximation() {
    let d: Vec<f64> = (1..=30).map(|i| if i % 3 == 0 { -(i as f64) } else { i as f64 }).collect();
    let r = wilcoxon_signed_rank(&sample_of(&d)).unwrap();
    assert!(!r.exact);
    assert!(r.p_value > 0.0 && r.p_value < 1.0);
}

proptest! {
    #[test]
    fn enumeration_agrees_on_random_vectors(d in proptest::collection::vec(-5i32..=5, 2..=12)) {
        let d: Vec<f64> = d.into_iter().map(|v| v as f64 * 0.25).collect();
        prop_assume!(d.iter().any(|v| *v != 0.0));
        let got = wilcoxon_signed_rank(&sample_of(&d)).unwrap().p_value;
        prop_assert!((got - oracle::wilcoxon_p(&d)).abs() < 1e-15);
    }

    #[test]
    fn swapping_conditions_keeps_p_and_negates_d(a in proptest::collection::vec(0.0f64..1.0, 3..10), shift in 0.01f64..0.5) {
        let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| v + shift * (i as f64 - 1.3)).collect();
        let s = PairedSample::new(a, b).unwrap();
        let fwd = paired_test(&s).unwrap();
        let back = paired_test(&s.swapped()).unwrap();
        prop_assert_eq!(fwd.p_value, back.p_value);
        prop_assert!((fwd.effect_size_d + back.effect_size_d).abs() < 1e-12);
        prop_assert!(fwd.p_value > 0.0 && fwd.p_value <= 1.0);
    }
}
