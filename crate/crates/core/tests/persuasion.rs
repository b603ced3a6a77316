use alignmarket::instance::{alice_optimal_actions, message_marginals, outcome_distribution, NamedUtility};
use alignmarket::persuasion::{monopoly_deterministic_scheme, oblivious_joint_evaluation, optimal_persuasion_lp};
use alignmarket::schemes::decode;
use alignmarket::{
    best_response, expected_utility, first_best, posterior, PersuasionInstance, ReceiverMode, SignalingScheme,
};
use proptest::prelude::*;

fn instance_with(ns: usize, na: usize, k: usize) -> impl Strategy<Value = PersuasionInstance> {
    let m = move || prop::collection::vec(prop::collection::vec(0.0f64..1.0, na), ns);
    (
        prop::collection::vec(0.05f64..1.0, ns),
        m(),
        prop::collection::vec(m(), k),
    )
        .prop_map(move |(raw, alice, bobs)| {
            let total: f64 = raw.iter().sum();
            let mut prior: Vec<f64> = raw.iter().map(|p| p / total).collect();
            let drift = 1.0 - prior.iter().sum::<f64>();
            prior[0] += drift;
            PersuasionInstance::new(
                (0..ns).map(|i| format!("y{i}")).collect(),
                (0..na).map(|i| format!("a{i}")).collect(),
                prior,
                alice,
                bobs.into_iter()
                    .enumerate()
                    .map(|(i, u)| NamedUtility {
                        name: format!("b{i}"),
                        u,
                    })
                    .collect(),
            )
            .unwrap()
        })
}

fn small_instance() -> impl Strategy<Value = PersuasionInstance> {
    (1usize..=3, 1usize..=3, 1usize..=2).prop_flat_map(|(ns, na, k)| instance_with(ns, na, k))
}

/// Random row-stochastic matrix with `messages` columns.
fn scheme_for(ns: usize, messages: usize) -> impl Strategy<Value = SignalingScheme> {
    prop::collection::vec(prop::collection::vec(0.0f64..1.0, messages), ns).prop_map(|raw| {
        let rows = raw
            .into_iter()
            .map(|r| {
                let s: f64 = r.iter().sum();
                if s <= 0.0 {
                    let mut e = vec![0.0; r.len()];
                    e[0] = 1.0;
                    e
                } else {
                    r.iter().map(|v| v / s).collect()
                }
            })
            .collect();
        SignalingScheme::new(rows).unwrap()
    })
}

fn with_scheme() -> impl Strategy<Value = (PersuasionInstance, SignalingScheme)> {
    small_instance().prop_flat_map(|inst| {
        let (ns, na) = (inst.num_states(), inst.num_actions());
        (Just(inst), scheme_for(ns, na))
    })
}

/// Sender value of the best obedient scheme on a grid, for two states and
/// two actions. Each scheme is `(π(a0|y0), π(a0|y1))`.
fn grid_lp_oracle(inst: &PersuasionInstance, sender: &[Vec<f64>], steps: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let p = inst.prior();
    let u = inst.alice();
    for i in 0..=steps {
        for j in 0..=steps {
            let q = [i as f64 / steps as f64, j as f64 / steps as f64];
            // joint mass of (state, recommended action)
            let mass = |y: usize, a: usize| p[y] * if a == 0 { q[y] } else { 1.0 - q[y] };
            let obedient = (0..2).all(|a| {
                let gain: f64 = (0..2).map(|y| mass(y, a) * (u[y][a] - u[y][1 - a])).sum();
                gain >= -1e-12
            });
            if obedient {
                let v: f64 = (0..2)
                    .flat_map(|y| (0..2).map(move |a| (y, a)))
                    .map(|(y, a)| mass(y, a) * sender[y][a])
                    .sum();
                best = best.max(v);
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn posteriors_average_back_to_the_prior((inst, scheme) in with_scheme()) {
        let marg = message_marginals(&inst, &scheme);
        let mut avg = vec![0.0; inst.num_states()];
        for (m, &q) in marg.iter().enumerate() {
            if q > 0.0 {
                for (a, p) in avg.iter_mut().zip(posterior(&inst, &scheme, m).unwrap()) {
                    *a += q * p;
                }
            }
        }
        for (a, p) in avg.iter().zip(inst.prior()) {
            prop_assert!((a - p).abs() <= 1e-12);
        }
        let total: f64 = outcome_distribution(&inst, &scheme, ReceiverMode::PosteriorBestResponse)
            .unwrap()
            .iter()
            .flatten()
            .sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn best_responding_beats_obeying_and_full_information_beats_both((inst, scheme) in with_scheme()) {
        let pbr = expected_utility(&inst, &scheme, ReceiverMode::PosteriorBestResponse, inst.alice()).unwrap();
        let obey = expected_utility(&inst, &scheme, ReceiverMode::Obedient, inst.alice()).unwrap();
        prop_assert!(pbr >= obey - 1e-12);
        prop_assert!(first_best(&inst) >= pbr - 1e-12);
    }

    #[test]
    fn lp_dominates_every_deterministic_scheme(inst in small_instance()) {
        let (ns, na) = (inst.num_states(), inst.num_actions());
        for j in 0..inst.num_bobs() {
            let (scheme, value) = optimal_persuasion_lp(&inst, inst.bob(j)).unwrap();
            let realized = expected_utility(&inst, &scheme, ReceiverMode::Obedient, inst.bob(j)).unwrap();
            prop_assert!((realized - value).abs() <= 1e-9);
            let (_, mono) = monopoly_deterministic_scheme(&inst, j, ReceiverMode::PosteriorBestResponse).unwrap();
            prop_assert!(value >= mono - 1e-9);
            for s in 0..na.pow(ns as u32) {
                let d = SignalingScheme::deterministic(&decode(s, ns, na), na).unwrap();
                let v = expected_utility(&inst, &d, ReceiverMode::PosteriorBestResponse, inst.bob(j)).unwrap();
                prop_assert!(value >= v - 1e-9);
            }
        }
    }

    #[test]
    fn lp_matches_grid_search_on_two_by_two(inst in instance_with(2, 2, 1)) {
        let (_, value) = optimal_persuasion_lp(&inst, inst.bob(0)).unwrap();
        let grid = grid_lp_oracle(&inst, inst.bob(0), 400);
        prop_assert!(value >= grid - 1e-9);
        // the sender value is 1-Lipschitz in each coordinate of the grid
        prop_assert!(value <= grid + 2.0 / 400.0 + 1e-9, "{} vs {}", value, grid);
    }

    #[test]
    fn combining_signals_never_hurts_alice(inst in instance_with(2, 2, 2), a in scheme_for(2, 2), b in scheme_for(2, 3)) {
        let joint = oblivious_joint_evaluation(&inst, &[a.clone(), b.clone()]).unwrap();
        for s in [&a, &b] {
            let single = expected_utility(&inst, s, ReceiverMode::PosteriorBestResponse, inst.alice()).unwrap();
            prop_assert!(joint.alice_utility >= single - 1e-12);
        }
        prop_assert!(joint.alice_utility <= first_best(&inst) + 1e-12);
    }

    #[test]
    fn best_response_ignores_state_offsets_and_positive_scale(
        inst in small_instance(),
        offsets in prop::collection::vec(-1.0f64..1.0, 3),
        scale in 0.5f64..2.0,
    ) {
        let alice: Vec<Vec<f64>> = inst
            .alice()
            .iter()
            .zip(&offsets)
            .map(|(row, c)| row.iter().map(|u| scale * u + c).collect())
            .collect();
        let moved = PersuasionInstance::new(
            inst.states().to_vec(),
            inst.actions().to_vec(),
            inst.prior().to_vec(),
            alice,
            inst.bobs().to_vec(),
        )
        .unwrap();
        prop_assert_eq!(best_response(&inst, inst.prior()), best_response(&moved, moved.prior()));
        prop_assert_eq!(alice_optimal_actions(&inst), alice_optimal_actions(&moved));
    }

    #[test]
    fn instance_json_round_trips(inst in small_instance()) {
        let back = PersuasionInstance::from_json_str(&inst.to_json_string()).unwrap();
        prop_assert_eq!(back, inst);
    }
}
