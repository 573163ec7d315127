use collective_dressing::dressed::{
    asymptotic_step, closed_form_pair, closed_form_pair_real, per_atom_frequency, stair_step, Branch,
};
use proptest::prelude::*;

fn ulp(x: f64) -> f64 {
    let a = x.abs();
    f64::from_bits(a.to_bits() + 1) - a
}

proptest! {
    #[test]
    fn ordered_branches(atoms in 1usize..500, photons in 0usize..20, g in -5.0f64..5.0, c in -5.0f64..5.0) {
        let p = closed_form_pair(atoms, photons, g, c);
        prop_assert!(p.e_plus >= p.e_minus);
        prop_assert!(p.e_plus >= 0.0 && p.e_minus <= 0.0);
    }

    #[test]
    fn inversion_symmetry(atoms in 1usize..500, photons in 0usize..20, g in -5.0f64..5.0, c in -5.0f64..5.0) {
        let p = closed_form_pair(atoms, photons, g, c);
        let q = closed_form_pair(atoms, photons, g, -c);
        prop_assert_eq!(q.e_plus, -p.e_minus);
        prop_assert_eq!(q.e_minus, -p.e_plus);
    }

    #[test]
    fn branch_sum_is_trace(atoms in 1usize..500, photons in 0usize..20, g in 0.01f64..5.0, c in -5.0f64..5.0) {
        let p = closed_form_pair(atoms, photons, g, c);
        let n = atoms as f64;
        let trace = n * c * (n - 1.0) * photons as f64;
        let scale = p.e_plus.abs().max(p.e_minus.abs());
        prop_assert!((p.e_plus + p.e_minus - trace).abs() <= 4.0 * ulp(scale),
            "sum {} trace {}", p.e_plus + p.e_minus, trace);
    }

    #[test]
    fn branch_product(atoms in 1usize..500, photons in 0usize..20, g in -5.0f64..5.0, c in -5.0f64..5.0) {
        let p = closed_form_pair(atoms, photons, g, c);
        let expected = -((atoms * atoms * photons) as f64 * (g * g));
        prop_assert!((p.e_plus * p.e_minus - expected).abs() <= 8.0 * ulp(expected));
    }

    #[test]
    fn uncorrelated_collapse(atoms in 1usize..500, photons in 0usize..20, g in 0.0f64..5.0) {
        let p = closed_form_pair(atoms, photons, g, 0.0);
        prop_assert_eq!(p.e_plus, -p.e_minus);
        let expected = atoms as f64 * g * (photons as f64).sqrt();
        prop_assert!((p.e_plus - expected).abs() <= 2.0 * ulp(expected));
    }

    #[test]
    fn per_atom_is_even_in_corr(atoms in 1usize..500, photons in 0usize..20, g in 0.0f64..5.0, c in 0.0f64..5.0) {
        prop_assert_eq!(per_atom_frequency(atoms, photons, g, c), per_atom_frequency(atoms, photons, g, -c));
    }

    #[test]
    fn integer_and_real_entry_points_agree(atoms in 1usize..500, photons in 0usize..20, g in -5.0f64..5.0, c in -5.0f64..5.0) {
        prop_assert_eq!(
            closed_form_pair(atoms, photons, g, c),
            closed_form_pair_real(atoms as f64, photons as f64, g, c)
        );
    }
}

#[test]
fn upper_branch_strictly_increasing_for_positive_corr() {
    for &(photons, g, c) in &[(1, 1.0, 0.1), (3, 0.5, 0.02), (2, 2.0, 1.0)] {
        let e: Vec<f64> = (1..=400).map(|n| closed_form_pair(n, photons, g, c).e_plus).collect();
        assert!(e.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn lower_branch_turns_around_before_saturating() {
    // With c = g^2 / (C^2 n), the lower branch keeps falling until N ~ 2c and
    // only then rises toward -g^2/C with shrinking increments.
    let (photons, g, corr) = (1, 1.0, 0.1);
    let c = g * g / (corr * corr * photons as f64);
    let turn = (2.0 * c) as usize;
    let e: Vec<f64> = (1..=5000).map(|n| closed_form_pair(n, photons, g, corr).e_minus).collect();
    let steps: Vec<f64> = e.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(steps[..turn - 10].iter().all(|&s| s < 0.0));
    let late = &steps[(3.0 * c) as usize..];
    assert!(late.iter().all(|&s| s > 0.0));
    assert!(late.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn asymptotic_convergence_orders() {
    // local log-log slopes deep in the asymptotic regime
    let (g, c, photons) = (1.0, 0.1, 1);
    let slope = |f: &dyn Fn(usize) -> f64, a: usize, b: usize| (f(b).abs().ln() - f(a).abs().ln()) / ((b as f64).ln() - (a as f64).ln());
    let upper = |n: usize| closed_form_pair(n, photons, g, c).e_plus / (c * photons as f64 * (n * n) as f64) - 1.0;
    let lower = |n: usize| closed_form_pair(n, photons, g, c).e_minus + g * g / c;
    assert!((slope(&upper, 20_000, 200_000) + 1.0).abs() < 0.05);
    assert!((slope(&lower, 20_000, 200_000) + 1.0).abs() < 0.05);

    let step_err_up = |n: usize| {
        let s = stair_step(Branch::Upper, n, photons, g, c);
        s.exact - s.asymptotic.unwrap()
    };
    // the upper-step remainder is O(1/N^2)
    let s = slope(&step_err_up, 2_000, 10_000);
    assert!((s + 2.0).abs() < 0.1, "{s}");
    let step_err_low = |n: usize| {
        let s = stair_step(Branch::Lower, n, photons, g, c);
        s.exact - s.asymptotic.unwrap()
    };
    // the lower-step remainder is O(1/N^3)
    let s = slope(&step_err_low, 2_000, 20_000);
    assert!((s + 3.0).abs() < 0.1, "{s}");
}

#[test]
fn asymptotic_step_rejects_uncorrelated() {
    assert!(asymptotic_step(Branch::Upper, 10, 1, 1.0, 0.0).is_err());
    assert!(asymptotic_step(Branch::Lower, 10, 0, 1.0, 0.3).is_err());
}
