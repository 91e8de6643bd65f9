use dti::eval::holdout_split;
use dti::mlp::{mae, train, MlpModel, TrainConfig};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn dataset(d: usize, noise: f64, seed: u64) -> Vec<(Vec<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..d).map(|_| rng.random_range(2.0..10.0)).collect();
    let scale: f64 = w.iter().sum();
    (0..79)
        .map(|_| {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
            let mut y = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / scale * 100.0;
            if noise > 0.0 {
                let u1: f64 = rng.random_range(1e-12..1.0);
                let u2: f64 = rng.random_range(0.0..1.0);
                y += noise * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            }
            (x, y)
        })
        .collect()
}

fn run(d: usize, arch: &[usize], noise: f64, data_seed: u64) -> f64 {
    let data = dataset(d, noise, data_seed);
    let (train_idx, test_idx) = holdout_split(79, 0.25, 7).unwrap();
    let train_data: Vec<_> = train_idx.iter().map(|&i| data[i].clone()).collect();
    let cfg = TrainConfig::default();
    let mut sizes = vec![d];
    sizes.extend_from_slice(arch);
    sizes.push(1);
    let mut model = MlpModel::init(&sizes, cfg.seed).unwrap();
    let t0 = std::time::Instant::now();
    train(&mut model, &train_data, &cfg).unwrap();
    let preds: Vec<f64> = test_idx.iter().map(|&i| model.forward(&data[i].0).unwrap().output()).collect();
    let targets: Vec<f64> = test_idx.iter().map(|&i| data[i].1).collect();
    let m = mae(&preds, &targets).unwrap();
    println!("d={d} arch={arch:?} noise={noise} seed={data_seed} mae={m:.4} ({:?})", t0.elapsed());
    m
}

fn main() {
    for d in [4usize, 8, 16] {
        for arch in [vec![128, 64, 32], vec![32, 16]] {
            run(d, &arch, 0.0, 42);
        }
    }
    for seed in [1u64, 2, 3] {
        run(4, &[128, 64, 32], 0.0, seed);
        run(4, &[128, 64, 32], 5.0, seed);
    }
}
