mod common;

use common::{random_conv, random_fc, random_small_hw};
use mpna::model::{builtin, HardwareConfig, LayerDescriptor, NetworkDescriptor};
use mpna::planner::{plan_with_case, DataflowCase, LayerIo};
use mpna::sim::{
    execute_layer, oracle_conv, oracle_network, random_input, random_weights, run_sa_conv,
    run_sa_fc, simulate_and_check, AccumulatorBank, TransferLog, WeightTile,
};
use mpna::tensor::QuantTensor;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn operands(layer: &LayerDescriptor, seed: u64) -> (QuantTensor, QuantTensor) {
    let net = NetworkDescriptor::new("one", vec![layer.clone()]);
    let w = random_weights(&net, seed).remove(0).unwrap();
    (random_input(&net, seed), w)
}

fn random_vectors(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Vec<Vec<i8>> {
    (0..n)
        .map(|_| (0..len).map(|_| rng.gen()).collect())
        .collect()
}

fn random_tile(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> WeightTile {
    WeightTile::new(rows, cols, (0..rows * cols).map(|_| rng.gen()).collect()).unwrap()
}

fn dot(v: &[i8], w: &WeightTile, c: usize) -> i32 {
    v.iter()
        .enumerate()
        .map(|(r, &x)| x as i32 * w.get(r, c) as i32)
        .sum()
}

#[test]
fn every_case_matches_the_oracle_on_random_layers() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 100 && attempts < 1000 {
        attempts += 1;
        let layer = if attempts % 4 == 0 {
            random_fc(&mut rng, "fc", 30)
        } else {
            random_conv(&mut rng, "conv", 8, 7, 3)
        };
        let cfg = random_small_hw(&mut rng);
        let (x, w) = operands(&layer, attempts as u64);
        let want = oracle_conv(&x, &w, &layer).unwrap();
        for case in DataflowCase::ALL {
            let Ok(p) = plan_with_case(&layer, &cfg, case, LayerIo::default()) else {
                continue;
            };
            let mut log = TransferLog::default();
            let (got, stats) = execute_layer(&layer, &x, &w, &cfg, &p, &mut log, 0, None).unwrap();
            assert_eq!(got, want, "{p}");
            assert!(stats.array_runs > 0);
            checked += 1;
        }
    }
    assert!(checked >= 100, "only {checked} layer/case pairs checked");
}

#[test]
fn sa_conv_columns_are_dot_products_with_skewed_timing() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let cfg = random_small_hw(&mut rng);
        let rows = rng.gen_range(1..=cfg.sa_rows);
        let cols = rng.gen_range(1..=cfg.sa_cols);
        let n = rng.gen_range(1..12);
        let tile = random_tile(&mut rng, rows, cols);
        let xs = random_vectors(&mut rng, n, rows);
        let run = run_sa_conv(&xs, &tile, &cfg, false).unwrap();
        assert_eq!(run.cycles, n + cfg.sa_rows + cfg.sa_cols - 1);
        for (t, x) in xs.iter().enumerate() {
            for c in 0..cols {
                assert_eq!(run.outputs[t][c], dot(x, &tile, c));
                assert_eq!(run.output_cycles[t][c], t + cfg.sa_rows + c);
            }
        }
    }
}

#[test]
fn sa_fc_uses_one_weight_set_per_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let cfg = random_small_hw(&mut rng);
        let rows = rng.gen_range(1..=cfg.sa_rows);
        let cols = rng.gen_range(1..=cfg.sa_cols);
        let n = rng.gen_range(1..12);
        let tiles: Vec<WeightTile> = (0..n).map(|_| random_tile(&mut rng, rows, cols)).collect();
        let xs = random_vectors(&mut rng, n, rows);
        let run = run_sa_fc(&xs, &tiles, &cfg, false).unwrap();
        assert_eq!(run.preload_cycles, 0);
        for (t, x) in xs.iter().enumerate() {
            for c in 0..cols {
                assert_eq!(run.outputs[t][c], dot(x, &tiles[t], c));
            }
        }
    }
}

#[test]
fn sa_fc_rejects_a_short_weight_stream() {
    let cfg = HardwareConfig::with_array(2);
    let xs = vec![vec![1i8, 2]; 3];
    let tiles = vec![WeightTile::identity(2); 2];
    assert!(run_sa_fc(&xs, &tiles, &cfg, false).is_err());
}

#[test]
fn empty_streams_produce_no_outputs() {
    let cfg = HardwareConfig::with_array(4);
    let tile = WeightTile::filled(4, 4, 1);
    let run = run_sa_conv(&[], &tile, &cfg, false).unwrap();
    assert!(run.outputs.is_empty());
    let run = run_sa_fc(&[], &[], &cfg, false).unwrap();
    assert!(run.outputs.is_empty());
}

#[test]
fn oversized_tile_is_rejected() {
    let cfg = HardwareConfig::with_array(2);
    let tile = WeightTile::filled(3, 2, 1);
    assert!(run_sa_conv(&[vec![0; 3]], &tile, &cfg, false).is_err());
}

#[test]
fn alexnet_mini_simulation_matches_reference() {
    let net = builtin::alexnet_mini();
    let cfg = HardwareConfig::default();
    let w = random_weights(&net, 7);
    let x = random_input(&net, 7);
    let out = simulate_and_check(&net, &x, &w, &cfg, false).unwrap();
    assert_eq!(out.output, oracle_network(&net, &x, &w).unwrap());
    assert!(out.transfers.total(None, None) > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn accumulation_order_does_not_matter(parts in prop::collection::vec(any::<i16>(), 1..40), seed in any::<u64>()) {
        let mut forward = AccumulatorBank::new(1, 4);
        for &p in &parts {
            forward.accumulate(0, 2, p as i32).unwrap();
        }
        let mut shuffled = parts.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.gen_range(0..=i));
        }
        let mut backward = AccumulatorBank::new(1, 4);
        for &p in &shuffled {
            backward.accumulate(0, 2, p as i32).unwrap();
        }
        prop_assert_eq!(forward.read(0, 2).unwrap(), backward.read(0, 2).unwrap());
        prop_assert_eq!(forward.drain(0, 2).unwrap(), parts.iter().map(|&p| p as i32).sum::<i32>());
        prop_assert_eq!(forward.read(0, 2).unwrap(), 0);
    }

    #[test]
    fn accumulator_rejects_out_of_range_addresses(bank in 0usize..4, addr in 0usize..32) {
        let mut acc = AccumulatorBank::new(2, 16);
        let ok = acc.accumulate(bank, addr, 1).is_ok();
        prop_assert_eq!(ok, bank < 2 && addr < 16);
    }
}
