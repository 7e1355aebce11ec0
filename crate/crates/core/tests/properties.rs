use std::sync::{Arc, OnceLock};

use jlheat::blowdown::{sphere_identity, SphereProfile};
use jlheat::constants::{critical_exponents, IdentityCheck, SpectralConstants};
use jlheat::diagnostics::sweeping_ratio;
use jlheat::evolve::EvolutionState;
use jlheat::grid::{GridSpec, RadialGrid, RadialProfile};
use jlheat::linearize::{kernel_from_steady, singular_kernel, supersolution_residual, KernelElement, SingularWhich};
use jlheat::steady::{scale_family, solve_ground_profile, SteadyStateSolution};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ground() -> &'static (SteadyStateSolution, KernelElement) {
    static CELL: OnceLock<(SteadyStateSolution, KernelElement)> = OnceLock::new();
    CELL.get_or_init(|| {
        let c = SpectralConstants::for_pair(13, 3.0).unwrap();
        let sol = solve_ground_profile(&c, &GridSpec::with_r_max(2e3)).unwrap();
        let z = kernel_from_steady(&sol).unwrap();
        (sol, z)
    })
}

proptest! {
    #[test]
    fn constants_satisfy_identities(dim in 11u32..=100, stretch in 0.0f64..3.0) {
        let pc = critical_exponents(dim).joseph_lundgren.finite().unwrap();
        let c = SpectralConstants::for_pair(dim, pc * (1.0 + stretch)).unwrap();
        let id = IdentityCheck::evaluate(&c);
        prop_assert!(id.passes(1e-10, 1e-9), "{id:?}");
        prop_assert!(c.lambda1 <= c.lambda2);
        // Both roots of λ² − bλ + k = 0.
        let b = dim as f64 - 2.0 - 2.0 * c.m;
        let k = 2.0 * (dim as f64 - 2.0 - c.m);
        for l in [c.lambda1, c.lambda2] {
            prop_assert!((l * l - b * l + k).abs() < 1e-9 * (1.0 + k));
        }
    }

    #[test]
    fn sphere_identity_is_nonnegative(seed in any::<u64>(), modes in 1usize..6) {
        let c = SpectralConstants::for_pair(13, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = SphereProfile::random(&mut rng, modes, c.amplitude);
        prop_assert!(sphere_identity(&f, &c).unwrap() > 0.0);
    }

    #[test]
    fn sphere_identity_vanishes_on_admissible_constants(frac in -1.0f64..=1.0) {
        let c = SpectralConstants::for_pair(13, 3.0).unwrap();
        // Only 0 and ±L are steady on the sphere; other constants are positive.
        let v = sphere_identity(&SphereProfile::constant(frac * c.amplitude), &c).unwrap();
        prop_assert!(v >= -1e-10);
    }

    #[test]
    fn sweeping_ratio_is_homogeneous(values in prop::collection::vec(-1.0f64..1.0, 101), k in 0.01f64..100.0) {
        let c = SpectralConstants::for_pair(13, 3.0).unwrap();
        let grid = Arc::new(RadialGrid::uniform(50.0, 100).unwrap());
        let z = singular_kernel(&c, grid.clone(), SingularWhich::First).unwrap();
        let state = |scale: f64| EvolutionState {
            t: 0.0,
            u: RadialProfile::new(grid.clone(), vec![0.0; 101], "u").unwrap(),
            u_t: RadialProfile::new(grid.clone(), values.iter().map(|v| scale * v).collect(), "u_t").unwrap(),
        };
        let a = sweeping_ratio(&state(1.0), &z);
        let b = sweeping_ratio(&state(k), &z);
        prop_assert!((b.lambda_plus - k * a.lambda_plus).abs() <= 1e-12 * b.lambda_plus.max(1.0));
        prop_assert!((b.lambda_minus - k * a.lambda_minus).abs() <= 1e-12 * b.lambda_minus.max(1.0));
        let flipped = sweeping_ratio(&state(-1.0), &z);
        prop_assert_eq!(flipped.lambda_plus, a.lambda_minus);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn supersolution_gap_is_antitone_in_the_flow(lo in 0.05f64..0.95, step in 0.0f64..0.5) {
        let (sol, z) = ground();
        let c = sol.constants();
        let hi = (lo + step).min(1.0);
        let grid = sol.grid().clone();
        let below = scale_family(sol, lo, grid.clone()).unwrap();
        let above = scale_family(sol, hi, grid).unwrap();
        let g_lo = supersolution_residual(c, z, &below, sol.phi()).unwrap();
        let g_hi = supersolution_residual(c, z, &above, sol.phi()).unwrap();
        for (a, b) in g_lo.values().iter().zip(g_hi.values()) {
            prop_assert!(*a >= *b - 1e-14 * a.abs().max(1e-300));
            prop_assert!(*b >= 0.0);
        }
    }
}
