mod common;

use common::{enumerated_minimum, random_conv, random_fc, random_small_hw, walk};
use mpna::model::{builtin, HardwareConfig, LayerDescriptor};
use mpna::planner::{classify, plan, plan_network, plan_with_case, DataflowCase, LayerIo};
use mpna::sim::{execute_layer, random_input, random_weights, TransferKind, TransferLog};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tiny_layer(rng: &mut ChaCha8Rng, idx: usize) -> LayerDescriptor {
    if idx % 5 == 4 {
        random_fc(rng, "fc", 24)
    } else {
        random_conv(rng, "conv", 6, 6, 3)
    }
}

#[test]
fn plan_traffic_is_the_enumerated_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    let mut cases_seen = [0usize; 4];
    let mut attempts = 0;
    while checked < 40 && attempts < 2000 {
        attempts += 1;
        let layer = tiny_layer(&mut rng, attempts);
        let cfg = random_small_hw(&mut rng);
        let case = classify(&layer, &cfg);
        let io = LayerIo::default();
        let Some(min) = enumerated_minimum(&layer, &cfg, case, io) else {
            assert!(
                plan(&layer, &cfg).is_err(),
                "planner found a tiling the enumerator could not"
            );
            continue;
        };
        let p = plan(&layer, &cfg).expect("enumerator found a feasible tiling");
        assert_eq!(p.traffic.dram_total(), min, "{layer:?} {cfg:?}");
        cases_seen[case.id() as usize - 1] += 1;
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} layers checked");
    assert!(
        cases_seen.iter().filter(|&&n| n > 0).count() >= 3,
        "cases {cases_seen:?}"
    );
}

#[test]
fn forced_case_four_on_alexnet_conv2_is_minimal() {
    // buffers shrunk so nothing stays resident; blocks kept small to bound the enumeration
    let layer = builtin::alexnet().layers[1].clone();
    let cfg = HardwareConfig {
        spm_entries: 16,
        weight_buffer_bytes: 4800,
        data_buffer_bytes: 4096,
        ..HardwareConfig::default()
    };
    assert_eq!(classify(&layer, &cfg), DataflowCase::Four);
    let p = plan(&layer, &cfg).unwrap();
    let min = enumerated_minimum(&layer, &cfg, DataflowCase::Four, LayerIo::default()).unwrap();
    assert_eq!(p.traffic.dram_total(), min);
}

#[test]
fn walked_traffic_matches_closed_form_for_chosen_tiling() {
    let cfg = HardwareConfig::default();
    for net in [builtin::alexnet(), builtin::vgg16()] {
        for (layer, p) in net.layers.iter().zip(plan_network(&net, &cfg).unwrap()) {
            let Some(p) = p else { continue };
            let w = walk(layer, &cfg, p.case, &p.tiling, p.io).expect("plan is feasible");
            assert_eq!(
                (w.dram_in, w.dram_w, w.dram_out),
                (
                    p.traffic.dram_in_act,
                    p.traffic.dram_weights,
                    p.traffic.dram_out_act
                ),
                "{p}"
            );
            p.validate(layer, &cfg).unwrap();
        }
    }
}

#[test]
fn vgg_plans_are_feasible() {
    let cfg = HardwareConfig::default();
    let net = builtin::vgg16();
    let plans = plan_network(&net, &cfg).unwrap();
    let cases: Vec<u8> = plans.iter().flatten().map(|p| p.case.id()).collect();
    assert_eq!(cases[0], 3);
    assert_eq!(cases.len(), 16);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_plan_passes_the_validator(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layer = tiny_layer(&mut rng, (seed % 5) as usize);
        let cfg = random_small_hw(&mut rng);
        for case in DataflowCase::ALL {
            if let Ok(p) = plan_with_case(&layer, &cfg, case, LayerIo::default()) {
                prop_assert!(p.validate(&layer, &cfg).is_ok(), "{}", p);
                prop_assert!(walk(&layer, &cfg, case, &p.tiling, p.io).is_some());
            }
        }
    }

    #[test]
    fn case_one_dominates_when_eligible(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layer = tiny_layer(&mut rng, (seed % 5) as usize);
        let cfg = random_small_hw(&mut rng);
        prop_assume!(classify(&layer, &cfg) == DataflowCase::One);
        let best = plan(&layer, &cfg).unwrap().traffic.dram_total();
        for case in [DataflowCase::Two, DataflowCase::Three, DataflowCase::Four] {
            if let Ok(p) = plan_with_case(&layer, &cfg, case, LayerIo::default()) {
                prop_assert!(best <= p.traffic.dram_total(), "case {} beat case 1", case.id());
            }
        }
    }

    #[test]
    fn simulated_transfers_equal_planned_traffic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layer = tiny_layer(&mut rng, (seed % 5) as usize);
        let cfg = random_small_hw(&mut rng);
        let net = mpna::model::NetworkDescriptor::new("one", vec![layer.clone()]);
        let w = random_weights(&net, seed);
        let x = random_input(&net, seed);
        for case in DataflowCase::ALL {
            let Ok(p) = plan_with_case(&layer, &cfg, case, LayerIo::default()) else { continue };
            let mut log = TransferLog::default();
            execute_layer(&layer, &x, w[0].as_ref().unwrap(), &cfg, &p, &mut log, 0, None).unwrap();
            prop_assert_eq!(log.total(None, Some(TransferKind::InputActivations)), p.traffic.dram_in_act);
            prop_assert_eq!(log.total(None, Some(TransferKind::Weights)), p.traffic.dram_weights);
            prop_assert_eq!(log.total(None, Some(TransferKind::OutputActivations)), p.traffic.dram_out_act);
        }
    }
}
