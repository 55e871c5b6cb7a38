mod common;

use common::{random_conv, random_fc};
use mpna::model::{
    builtin, mac_count, network_totals, reuse_profile, weight_count, LayerDescriptor,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Every MAC of the loop nest as `(j, m, n, i, p, q)`, with the input
/// coordinate it reads (`None` when it falls in the zero padding).
fn for_each_mac(layer: &LayerDescriptor, mut f: impl FnMut([usize; 6], Option<(usize, usize)>)) {
    let (rows, cols) = (layer.input_rows() as isize, layer.input_cols() as isize);
    for j in 0..layer.out_maps {
        for m in 0..layer.out_rows {
            for n in 0..layer.out_cols {
                for i in 0..layer.in_maps {
                    for p in 0..layer.kernel_rows {
                        for q in 0..layer.kernel_cols {
                            let y = (m * layer.stride + p) as isize - layer.pad as isize;
                            let x = (n * layer.stride + q) as isize - layer.pad as isize;
                            let inside = (0..rows).contains(&y) && (0..cols).contains(&x);
                            f(
                                [j, m, n, i, p, q],
                                inside.then_some((y as usize, x as usize)),
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn mac_count_matches_loop_nest_on_random_layers() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 0..200 {
        let layer = if k % 5 == 0 {
            random_fc(&mut rng, "fc", 20)
        } else {
            random_conv(&mut rng, "conv", 6, 6, 4)
        };
        let mut macs = 0u64;
        let mut weight_uses: HashMap<[usize; 4], u64> = HashMap::new();
        let mut output_uses: HashMap<[usize; 3], u64> = HashMap::new();
        let mut input_uses: HashMap<(usize, usize, usize), u64> = HashMap::new();
        for_each_mac(&layer, |[j, m, n, i, p, q], at| {
            macs += 1;
            *weight_uses.entry([j, i, p, q]).or_default() += 1;
            *output_uses.entry([j, m, n]).or_default() += 1;
            if let Some((y, x)) = at {
                *input_uses.entry((i, y, x)).or_default() += 1;
            }
        });
        assert_eq!(macs, mac_count(&layer).unwrap(), "{layer:?}");
        assert_eq!(weight_uses.len() as u64, weight_count(&layer).unwrap());
        let reuse = reuse_profile(&layer).unwrap();
        assert!(weight_uses.values().all(|&u| u == reuse.weight_reuse));
        assert!(output_uses.values().all(|&u| u == reuse.output_act_reuse));
        let most = input_uses.values().copied().max().unwrap_or(0);
        assert!(
            most <= reuse.input_act_reuse,
            "{layer:?}: {most} > {}",
            reuse.input_act_reuse
        );
    }
}

#[test]
fn alexnet_conv3_reuse_by_counting() {
    let conv3 = builtin::alexnet()
        .layers
        .iter()
        .find(|l| l.name == "conv3")
        .unwrap()
        .clone();
    let reuse = reuse_profile(&conv3).unwrap();
    assert_eq!(
        (
            reuse.weight_reuse,
            reuse.output_act_reuse,
            reuse.input_act_reuse
        ),
        (169, 2304, 3456)
    );

    // count the uses of one interior input element, one weight and one output
    let (center, s, pad) = (6usize, conv3.stride, conv3.pad);
    let mut input_uses = 0u64;
    let mut weight_uses = 0u64;
    let mut output_uses = 0u64;
    for j in 0..conv3.out_maps {
        for m in 0..conv3.out_rows {
            for n in 0..conv3.out_cols {
                for p in 0..conv3.kernel_rows {
                    for q in 0..conv3.kernel_cols {
                        if m * s + p == center + pad && n * s + q == center + pad {
                            input_uses += 1;
                        }
                        if j == 0 && p == 1 && q == 1 {
                            weight_uses += 1;
                        }
                    }
                }
            }
        }
    }
    for _i in 0..conv3.in_maps {
        for _p in 0..conv3.kernel_rows {
            for _q in 0..conv3.kernel_cols {
                output_uses += 1;
            }
        }
    }
    assert_eq!((weight_uses, output_uses, input_uses), (169, 2304, 3456));
}

#[test]
fn builtin_network_totals_are_frozen() {
    let a = network_totals(&builtin::alexnet());
    assert_eq!(a.conv_macs, 1_076_634_144);
    assert_eq!(a.fc_macs, 58_621_952);
    assert_eq!(a.conv_weights, 3_745_824);
    assert_eq!(a.fc_weights, 58_621_952);
    let v = network_totals(&builtin::vgg16());
    assert_eq!(v.conv_macs, 15_346_630_656);
    assert_eq!(v.conv_weights, 14_710_464);
    assert_eq!(v.fc_macs, 123_633_664);
    assert_eq!(v.fc_weights, 123_633_664);
}

#[test]
fn pooling_layers_have_no_macs() {
    let net = builtin::alexnet();
    for layer in &net.layers {
        assert_eq!(
            mac_count(layer).is_ok(),
            layer.is_compute(),
            "{}",
            layer.name
        );
    }
}
