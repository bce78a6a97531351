// The Liu-West move with b² = 1 - a² keeps the weighted mean and covariance
// of the parameter cloud while jittering every particle.
//
//     cargo run --release --example liu_west_kernel

use rand::Rng;
use regsmc::model::SvParamsTransformed;
use regsmc::particles::{normalize, weighted_mean_cov, KernelConfig, LiuWestKernel};
use regsmc::rng::stream;

pub fn run_example() -> regsmc::Result<()> {
    let mut rng = stream(3, 0);
    let n = 20_000;
    let params: Vec<SvParamsTransformed> = (0..n)
        .map(|_| SvParamsTransformed {
            alpha: rng.random_range(-0.3..0.3),
            psi: 2.0 * 0.9f64.atanh() + rng.random_range(-0.5..0.5),
            lambda: 0.1f64.ln() + rng.random_range(-1.0..1.0),
        })
        .collect();
    let log_w: Vec<f64> = params.iter().map(|p| -2.0 * p.alpha * p.alpha).collect();
    let w = normalize(&log_w)?;
    let (m0, v0) = weighted_mean_cov(&params, &w);

    for a in [1.0, 0.98, 0.9] {
        let cfg = KernelConfig::new(a)?;
        let kernel = LiuWestKernel::from_cloud(&params, &w, &cfg)?;
        let moved: Vec<_> = params.iter().map(|p| kernel.sample(p, &mut rng)).collect();
        let (m1, v1) = weighted_mean_cov(&moved, &w);
        println!(
            "a = {a:<4} b^2 = {:.4}: |mean shift| {:.1e}, |cov change| {:.1e} (cov norm {:.2})",
            cfg.b2(),
            (m1 - m0).norm(),
            (v1 - v0).norm(),
            v0.norm()
        );
    }
    Ok(())
}

fn main() -> regsmc::Result<()> {
    run_example()
}
