use chebyrace::arith::{classify_residue, euler_phi, is_prime, squares_mod, Modulus};
use chebyrace::dist::{density_fourier, density_montecarlo, ModelPart, RaceModel};
use chebyrace::empirical::{for_each_prime, geometric_grid, race_scan};
use chebyrace::lfunc::CharacterKey;
use proptest::prelude::*;

/// A model whose terms come from made-up ordinates, plus a small tail.
fn synthetic(mean: f64, gammas: Vec<f64>) -> RaceModel {
    let closed_form = 0.02 + gammas.iter().map(|g| 2.0 / (0.25 + g * g)).sum::<f64>();
    let part = ModelPart {
        keys: vec![CharacterKey::Real(-4)],
        coefficient: 1.0,
        conductor: 4,
        height: 1e3,
        gammas,
        closed_form,
    };
    RaceModel::from_parts(4, mean, vec![part])
}

fn ordinates() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(2.0f64..60.0, 3..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residues_match_enumeration(q in 3u64..3000, a in 1i64..1_000_000) {
        let m = Modulus::new(q).unwrap();
        match classify_residue(a, &m) {
            Ok(flag) => {
                let r = a.rem_euclid(q as i64) as u64;
                prop_assert_eq!(flag == 1, squares_mod(q).binary_search(&r).is_ok());
            }
            Err(_) => prop_assert!(!m.is_coprime(a)),
        }
    }

    #[test]
    fn squares_have_index_rho(q in 3u64..5000) {
        let m = Modulus::new(q).unwrap();
        prop_assert_eq!(squares_mod(q).len() as u64 * m.rho, euler_phi(q));
    }

    #[test]
    fn density_is_monotone_in_the_mean(gammas in ordinates(), mean in -1.0f64..1.0, shift in 0.05f64..1.0) {
        let lo = density_fourier(&synthetic(mean, gammas.clone()), 1e-6).unwrap();
        let hi = density_fourier(&synthetic(mean + shift, gammas), 1e-6).unwrap();
        prop_assert!((0.0..=1.0).contains(&lo.delta), "{lo:?}");
        prop_assert!(hi.delta >= lo.delta - lo.total_error() - hi.total_error());
    }

    #[test]
    fn centred_model_is_fair(gammas in ordinates()) {
        let r = density_fourier(&synthetic(0.0, gammas), 1e-6).unwrap();
        prop_assert!((r.delta - 0.5).abs() <= r.total_error() + 1e-12);
    }

    #[test]
    fn sampling_agrees_with_inversion(gammas in ordinates(), mean in -0.5f64..0.5, seed in any::<u64>()) {
        let model = synthetic(mean, gammas);
        let f = density_fourier(&model, 1e-6).unwrap();
        let mc = density_montecarlo(&model, 20_000, seed);
        prop_assert!((f.delta - mc.delta).abs() <= 6.0 * mc.err_sampling + f.total_error());
    }

    #[test]
    fn grid_is_increasing_and_closed(x_max in 2u64..10_000_000, ratio in 1.0001f64..1.01) {
        let g = geometric_grid(x_max, ratio).unwrap();
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(g[0], 2);
        prop_assert_eq!(*g.last().unwrap(), x_max);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sieve_agrees_with_primality(x_max in 2u64..200_000) {
        let mut primes = Vec::new();
        for_each_prime(x_max, |p| primes.push(p)).unwrap();
        let expected: Vec<u64> = (2..=x_max).filter(|&n| is_prime(n)).collect();
        prop_assert_eq!(primes, expected);
    }

    #[test]
    fn scan_counts_every_odd_prime(q in prop::sample::select(vec![3u64, 4, 5, 8, 12, 15]), x_max in 100u64..100_000) {
        let (trace, _) = race_scan(q, x_max, 1.01).unwrap();
        let last = trace.checkpoints.len() - 1;
        let coprime = (2..=x_max).filter(|&n| is_prime(n) && q % n != 0).count() as u64;
        prop_assert_eq!(trace.non_residues[last] + trace.residues[last], coprime);
    }
}
