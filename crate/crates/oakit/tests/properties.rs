//! Randomized invariants over the pipeline: seeds, primes, and dimensions
//! vary; structure must not.

use oakit::oa::{construct_bose_oa, verify_strength, OrthogonalArray, Stage};
use oakit::randomize::{expand_to_latin, randomize_symbols, tang_randomize};
use oakit::sampler::{
    check_bivariate_stratification, check_univariate_latin, coupled_digit_samples, sample_lhs,
    sample_oalh_tang, sample_srs,
};
use oakit::seed::SeedSpec;
use proptest::prelude::*;

const SMALL_PRIMES: [u32; 4] = [2, 3, 5, 7];

fn pipeline(q: u32, d: usize, master: u64, rep: u64) -> OrthogonalArray {
    let base = construct_bose_oa(q, d).unwrap();
    let seed = SeedSpec::for_replicate(master, rep);
    let a_star = randomize_symbols(&base, &seed).unwrap();
    let a_dd = expand_to_latin(&a_star, &seed).unwrap();
    tang_randomize(&a_dd, &seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn full_pipeline_is_a_pure_function_of_its_key(
        qi in 0usize..4, master in any::<u64>(), rep in any::<u64>()
    ) {
        let q = SMALL_PRIMES[qi];
        let d = (q as usize + 1).min(4);
        let a = pipeline(q, d, master, rep);
        let b = pipeline(q, d, master, rep);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn tang_arrays_stay_latin_and_project_to_strength_two(
        qi in 0usize..4, master in any::<u64>()
    ) {
        let q = SMALL_PRIMES[qi];
        let d = (q as usize + 1).min(4);
        let a_ddd = pipeline(q, d, master, 0);
        prop_assert_eq!(a_ddd.stage(), Stage::Tang);
        prop_assert!(verify_strength(&a_ddd, 1).unwrap());
        prop_assert!(verify_strength(&a_ddd.project_to_base().unwrap(), 2).unwrap());
    }

    #[test]
    fn tang_samples_stratify_both_ways(
        qi in 1usize..4, master in any::<u64>()
    ) {
        let q = SMALL_PRIMES[qi];
        let d = 3;
        let seed = SeedSpec::new(master);
        let a_ddd = pipeline(q, d, master, 0);
        let s = sample_oalh_tang(&a_ddd, &seed).unwrap();
        prop_assert!(check_bivariate_stratification(&s, q).unwrap());
        prop_assert!(check_univariate_latin(&s, (q * q) as usize).unwrap());
        prop_assert!(s.rows().all(|r| r.iter().all(|&x| (0.0..1.0).contains(&x))));
    }

    #[test]
    fn coupling_bound_is_deterministic_in_the_seed(
        qi in 0usize..4, master in any::<u64>(), rep in any::<u64>()
    ) {
        let q = SMALL_PRIMES[qi];
        let base = construct_bose_oa(q, 3).unwrap();
        let seed = SeedSpec::for_replicate(master, rep);
        let a_star = randomize_symbols(&base, &seed).unwrap();
        let (x, y) = coupled_digit_samples(&a_star, &seed).unwrap();
        let bound = (q - 1) as f64 / (q * q) as f64 + 1e-12;
        for i in 0..x.n() {
            for j in 0..x.d() {
                prop_assert!((x.get(i, j) - y.get(i, j)).abs() <= bound);
            }
        }
    }

    #[test]
    fn baseline_samples_stay_in_the_unit_cube(
        n in 1usize..40, d in 1usize..5, master in any::<u64>()
    ) {
        let seed = SeedSpec::new(master);
        let srs = sample_srs(n, d, &seed).unwrap();
        let lhs = sample_lhs(n, d, &seed).unwrap();
        prop_assert!(srs.rows().all(|r| r.iter().all(|&x| (0.0..1.0).contains(&x))));
        prop_assert!(lhs.rows().all(|r| r.iter().all(|&x| (0.0..1.0).contains(&x))));
        prop_assert!(check_univariate_latin(&lhs, n).unwrap());
    }

    #[test]
    fn oa_text_format_round_trips(
        qi in 0usize..4, master in any::<u64>()
    ) {
        let q = SMALL_PRIMES[qi];
        let d = (q as usize + 1).min(4);
        let a = pipeline(q, d, master, 1);
        let text = a.to_text();
        let back = OrthogonalArray::from_text(&text).unwrap();
        prop_assert_eq!(&back, &a);
        prop_assert_eq!(back.to_text(), text);
    }
}
