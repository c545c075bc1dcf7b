use std::time::Instant;

use memenc::data::gen_benchmark;
use memenc::decoder::{
    membership_scores, reconstruct_discriminator, InferenceConfig, WhiteboxOracle,
};
use memenc::encoder::{
    membership_encoding, select_members, train_baseline, EncodingConfig, Selection, SplitDataset,
};
use memenc::key::{EncodingKey, MappingConfig};
use memenc::metrics::{auc, test_accuracy, ScoreSet};
use memenc::nn::{Activation, MlpModel};
use memenc::robustness::{
    adversarial_prune, magnitude_prune, transfer_finetune, PruneSpec, TransferConfig,
};
use memenc::rng::Rng;

fn decode_auc(model: &MlpModel, key: &EncodingKey, split: &SplitDataset, seed: u64) -> f64 {
    let icfg = InferenceConfig::default();
    let oracle = WhiteboxOracle::new(model.clone(), key).unwrap();
    let d = reconstruct_discriminator(&oracle, key, seed, &icfg).unwrap();
    let pos = membership_scores(&d, &oracle, split.members.features()).unwrap();
    let neg = membership_scores(&d, &oracle, split.test.features()).unwrap();
    auc(&ScoreSet::from_pools(&pos, &neg).unwrap())
}

fn main() {
    let t0 = Instant::now();
    let (train, test) = gen_benchmark(1001, 10, 600, 64, 6.0).unwrap();
    let split =
        select_members(&train, test, Selection::Random { fraction: 0.2, seed: 11 }).unwrap();
    let key = EncodingKey {
        seed: 12648430,
        n: 500,
        q: 64,
        alpha: 0.0,
        beta: 1.0,
        mapping: MappingConfig::Whitebox { layer: 2, unit_fraction: 0.5 },
    };
    let model0 = MlpModel::feedforward(64, &[128, 64], 10, Activation::Relu, 71).unwrap();
    let cfg = EncodingConfig {
        epochs: 80,
        batch_size: 32,
        disc_steps: 1,
        lr_model: 0.02,
        lr_disc: 0.01,
        momentum: 0.9,
        decay_epochs: vec![],
        decay_factor: 0.1,
        synthetic_ratio: 1.0,
        shuffle_seed: 5,
    };

    let (encoded, _, rep) = membership_encoding(&split, &key, model0.clone(), &cfg).unwrap();
    let base_auc = decode_auc(&encoded, &key, &split, 31337);
    println!(
        "encoded: acc {:.4}, auc {:.4}  [{:?}]",
        rep.test_accuracy, base_auc, t0.elapsed()
    );

    // 20 wrong keys.
    let mut rng = Rng::new(777);
    let mut worst_lo = 1.0f64;
    let mut worst_hi = 0.0f64;
    for i in 0..20 {
        let mut wrong = key.clone();
        wrong.seed = rng.next_u64();
        let a = decode_auc(&encoded, &wrong, &split, 31337);
        worst_lo = worst_lo.min(a);
        worst_hi = worst_hi.max(a);
        println!("wrong key {i:>2}: auc {a:.4}");
    }
    println!("wrong-key range: [{worst_lo:.4}, {worst_hi:.4}]  [{:?}]", t0.elapsed());

    // Vanilla pruning endpoints.
    for p in [0.1, 0.5, 0.9] {
        let (pruned, _) = magnitude_prune(&encoded, &PruneSpec::global(p)).unwrap();
        let a = decode_auc(&pruned, &key, &split, 31337);
        let acc = test_accuracy(&pruned, &split.test).unwrap();
        println!("vanilla prune p={p}: acc {acc:.4} auc {a:.4}");
    }

    // Adversarial prune at 0.5 (20 epochs, lr 0.001).
    let mut ft = cfg.clone();
    ft.epochs = 20;
    ft.lr_model = 0.001;
    ft.lr_disc = 0.001;
    let (tuned, ftrep, idx) =
        adversarial_prune(&encoded, &PruneSpec::global(0.5), &split, &key, &ft).unwrap();
    let all_zero = idx
        .iter()
        .all(|i| tuned.layers()[i.layer].weights[i.index] == 0.0);
    let a = decode_auc(&tuned, &key, &split, 31337);
    println!(
        "adv prune p=0.5: zeros {} acc {:.4} auc {a:.4} (pre {base_auc:.4})  [{:?}]",
        all_zero, ftrep.test_accuracy, t0.elapsed()
    );

    // Transfer fine-tuning on an independent blob dataset, measured every
    // 10 epochs.
    let (new_train, new_test) = gen_benchmark(2002, 8, 600, 64, 6.0).unwrap();
    let tcfg = TransferConfig {
        epochs: 10,
        learning_rate: 0.001,
        momentum: 0.9,
        batch_size: 32,
        head_seed: 900,
        shuffle_seed: 901,
    };
    let mut current = transfer_finetune(&encoded, &new_train, &tcfg).unwrap();
    for block in 1..=6 {
        if block > 1 {
            current = memenc::robustness::finetune(current, &new_train, &tcfg).unwrap();
        }
        let a = decode_auc(&current, &key, &split, 31337);
        let acc = test_accuracy(&current, &new_test).unwrap();
        println!("transfer {:>2} epochs: new acc {acc:.4} original auc {a:.4}", block * 10);
    }
    println!("total [{:?}]", t0.elapsed());
}
