use proptest::prelude::*;
use robarch::evo::{crowding_distance, sort_fronts};
use robarch::gates::{GatesParams, EMBEDDING_DIM};
use robarch::genome::Genome;
use robarch::micronet::{project_coord, subsample_indices};
use robarch::search::hypervolume;

fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

fn points(m: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    // a coarse grid makes ties and duplicates common
    prop::collection::vec(prop::collection::vec((0u8..8).prop_map(|v| f64::from(v) / 8.0), m), 1..max)
}

fn arb_genome() -> impl Strategy<Value = Genome> {
    prop::collection::vec(0u8..4, 56).prop_map(|v| Genome::from_genes(v.try_into().unwrap()).unwrap())
}

proptest! {
    #[test]
    fn fronts_partition_and_layer(objs in (2usize..4).prop_flat_map(|m| points(m, 40))) {
        let fronts = sort_fronts(&objs);
        let mut seen: Vec<usize> = fronts.iter().flatten().copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..objs.len()).collect::<Vec<_>>());
        for (k, front) in fronts.iter().enumerate() {
            for &a in front {
                prop_assert!(front.iter().all(|&b| !dominates(&objs[b], &objs[a])));
                if k > 0 {
                    prop_assert!(fronts[k - 1].iter().any(|&b| dominates(&objs[b], &objs[a])));
                }
            }
        }
    }

    #[test]
    fn crowding_is_nonnegative_with_infinite_extremes(front in points(2, 20)) {
        let d = crowding_distance(&front);
        prop_assert_eq!(d.len(), front.len());
        prop_assert!(d.iter().all(|&v| v >= 0.0));
        for k in 0..2 {
            let lo = front.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
            let hi = front.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(front.iter().zip(&d).any(|(p, v)| p[k] == lo && v.is_infinite()));
            prop_assert!(front.iter().zip(&d).any(|(p, v)| p[k] == hi && v.is_infinite()));
        }
    }

    #[test]
    fn hypervolume_is_monotone_and_bounded(mut front in (2usize..4).prop_flat_map(|m| points(m, 10)), extra in 0usize..10) {
        let m = front[0].len();
        let reference = vec![1.0; m];
        let hv = hypervolume(&front, &reference).unwrap();
        prop_assert!((0.0..=1.0).contains(&hv));
        let best = front.iter().map(|p| p.iter().map(|v| 1.0 - v).product::<f64>()).fold(0.0, f64::max);
        prop_assert!(hv >= best - 1e-12);
        let added = front[extra % front.len()].iter().map(|v| v * 0.5).collect();
        front.push(added);
        prop_assert!(hypervolume(&front, &reference).unwrap() >= hv - 1e-12);
    }

    #[test]
    fn projection_lands_in_ball_and_box(v in -2.0f64..3.0, x in 0.0f64..=1.0, eps in 0.0f64..0.5) {
        let p = project_coord(v, x, eps);
        prop_assert!((p - x).abs() <= eps);
        prop_assert!((0.0..=1.0).contains(&p));
        if (v - x).abs() <= eps && (0.0..=1.0).contains(&v) {
            prop_assert_eq!(p, v);
        }
    }

    #[test]
    fn subsample_is_sorted_distinct_and_sized(n in 1usize..500, fraction in 0.01f64..=1.0, seed in any::<u64>()) {
        let idx = subsample_indices(n, fraction, seed).unwrap();
        prop_assert_eq!(idx.len(), ((fraction * n as f64).ceil() as usize).clamp(1, n));
        prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(idx.iter().all(|&i| i < n));
        prop_assert_eq!(idx, subsample_indices(n, fraction, seed).unwrap());
    }

    #[test]
    fn embedding_is_finite_and_deterministic(g in arb_genome(), seed in 0u64..4) {
        let gates = GatesParams::init(seed);
        let e = gates.embed(&g);
        prop_assert_eq!(e.as_slice().len(), EMBEDDING_DIM);
        prop_assert!(e.as_slice().iter().all(|v| v.is_finite()));
        prop_assert_eq!(e.distance(&gates.embed(&g)), 0.0);
    }
}
