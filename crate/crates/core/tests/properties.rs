use proptest::prelude::*;

use wsir::graph::generate_er;
use wsir::limit::{h_v, solve_psi, LimitParams};
use wsir::sim::{init_states, simulate, ModelParams};
use wsir::weights::{sample_assignment, WeightDistribution};

fn distribution() -> impl Strategy<Value = WeightDistribution> {
    prop::collection::vec((0.1f64..3.0, 0.05f64..1.0), 1..4).prop_map(|pairs| {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let pairs: Vec<(f64, f64)> = pairs.iter().map(|&(q, m)| (q, m / total)).collect();
        WeightDistribution::new(&pairs).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trajectories_respect_sir_monotonicity(
        n in 20usize..120,
        p in 0.05f64..0.9,
        lambda in 0.1f64..8.0,
        theta in 0.05f64..0.6,
        seed in any::<u64>(),
        dist in distribution(),
    ) {
        let params = ModelParams::new(n, p, lambda, theta).unwrap();
        let g = generate_er(n, p, seed).unwrap();
        let w = sample_assignment(&dist, n, seed ^ 1);
        let init = init_states(n, theta, seed ^ 2);
        let obs: Vec<f64> = (0..=12).map(|i| i as f64 * 0.25).collect();
        let traj = simulate(&g, &w, &params, &init, &obs, seed ^ 3).unwrap();
        for s in &traj.snapshots {
            prop_assert_eq!(s.susceptible + s.infective + s.removed, n as u64);
            prop_assert_eq!(s.s_by_class.iter().sum::<u64>(), s.susceptible);
            prop_assert_eq!(s.i_by_class.iter().sum::<u64>(), s.infective);
            prop_assert!(s.v >= -1e-9);
        }
        for pair in traj.snapshots.windows(2) {
            prop_assert!(pair[1].susceptible <= pair[0].susceptible);
            prop_assert!(pair[1].removed >= pair[0].removed);
            for j in 0..pair[0].s_by_class.len() {
                prop_assert!(pair[1].s_by_class[j] <= pair[0].s_by_class[j]);
            }
        }
    }

    #[test]
    fn psi_is_monotone_and_bounded(
        dist in distribution(),
        theta in 0.01f64..0.9,
        p in 0.05f64..1.0,
        lambda in 0.05f64..10.0,
    ) {
        let lp = LimitParams::new(dist, theta, p, lambda).unwrap();
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
        let sol = solve_psi(&lp, &grid, 1e-9).unwrap();
        prop_assert_eq!(sol.psi[0], 1.0);
        for w in sol.psi.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        for (&x, &hv) in sol.psi.iter().zip(&sol.hv) {
            prop_assert!(x > 0.0);
            prop_assert!(hv >= 0.0);
            prop_assert!(h_v(&lp, x).unwrap() >= -1e-9);
        }
    }
}
