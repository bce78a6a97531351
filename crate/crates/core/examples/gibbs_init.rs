// Builds the uniformly weighted startup sample from the first observations
// with the Metropolis-within-Gibbs sampler.
//
//     cargo run --release --example gibbs_init

use regsmc::gibbs::{run_gibbs, GibbsConfig, GibbsSampler};
use regsmc::model::{simulate_seeded, DatasetLabel, SvParams};
use regsmc::rng::{stream, streams};

pub fn run_example() -> regsmc::Result<()> {
    let (n, particles, seed) = (100, 1000, 4);
    let data = simulate_seeded(&SvParams::weekly(), n, seed, DatasetLabel::Weekly)?;
    let y = data.window(n);

    let mut rng = stream(seed, streams::GIBBS);
    let mut sampler = GibbsSampler::new(y)?;
    for _ in 0..500 {
        sampler.sweep(&mut rng)?;
    }
    println!(
        "acceptance after 500 sweeps: phi {:.2}, x {:.2}",
        sampler.acceptance.phi_rate(),
        sampler.acceptance.x_rate()
    );

    let cfg = GibbsConfig::for_particles(n, particles);
    let init = run_gibbs(y, &cfg, particles, &mut stream(seed, streams::GIBBS))?;
    let k = init.len() as f64;
    let mean = |f: &dyn Fn(usize) -> f64| (0..init.len()).map(f).sum::<f64>() / k;
    let p = |i: usize| init.params[i].to_natural();
    println!("{} particles anchored at t = {}", init.len(), init.start_index);
    println!(
        "  x_n     mean {:+.3} (true {:+.3})",
        mean(&|i| init.states[i]),
        data.x_true[n]
    );
    println!("  alpha   mean {:+.3}", mean(&|i| p(i).alpha));
    println!("  phi     mean {:.3}", mean(&|i| p(i).phi));
    println!("  sigma2  mean {:.3}", mean(&|i| p(i).sigma2));
    Ok(())
}

fn main() -> regsmc::Result<()> {
    run_example()
}
