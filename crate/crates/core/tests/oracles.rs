//! Independent oracles for the Floquet solver and the flux kernel.

mod common;

use common::{born_worst_deviation, local_maxima, pvh_worst_deviation, volume_worst_deviation};

#[test]
fn unmodulated_kernel_equals_two_slab_transmission() {
    let worst = pvh_worst_deviation();
    assert!(worst < 1e-6, "worst relative deviation {worst:e}");
}

#[test]
fn volume_integrals_match_brute_force() {
    let worst = volume_worst_deviation(11);
    assert!(worst < 1e-3, "worst relative deviation {worst:e}");
}

#[test]
fn floquet_conversion_matches_first_born_approximation() {
    let worst = born_worst_deviation(23);
    assert!(worst < 0.01, "worst relative deviation {worst:e}");
}

#[test]
fn prominence_of_sampled_peaks() {
    let y = [0.0, 3.0, 1.0, 2.0, 2.0, 0.5, 4.0, 0.0];
    assert_eq!(local_maxima(&y), vec![(1, 2.5), (3, 1.0), (6, 4.0)]);
    assert!(local_maxima(&[1.0, 2.0, 3.0]).is_empty());
    assert!(local_maxima(&[1.0, 1.0, 1.0]).is_empty());
}
