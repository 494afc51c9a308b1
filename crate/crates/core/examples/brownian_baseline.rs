//! Zero-drift Euler–Maruyama ensemble: variance and KS checks of the marginals.

use sdlab::drift::DriftField;
use sdlab::sde::density::ks_normal_marginals;
use sdlab::sde::{simulate, Estimate, EnsembleConfig};

fn main() -> sdlab::Result<()> {
    let cfg = EnsembleConfig::new(vec![0.0, 0.0], 1.0, 1e-3, 20_000, 1);
    let start = std::time::Instant::now();
    let ens = simulate(&cfg, &DriftField::zero(2))?;
    println!("{} paths x {} steps in {:.2}s", ens.paths(), ens.steps(), start.elapsed().as_secs_f64());

    let last = ens.times().len() - 1;
    for axis in 0..2 {
        let sq: Vec<f64> = ens.marginal(last).iter().map(|x| x[axis] * x[axis]).collect();
        let v = Estimate::from_samples(&sq);
        println!("axis {axis}: E X^2 = {:.4} +- {:.4} (exact 2)", v.mean, v.se);
    }
    for ks in ks_normal_marginals(&ens, 1.0, &[0.0, 0.0], &[2.0, 2.0], 0.01)? {
        println!("KS axis {}: {:.4} vs critical {:.4} -> {}", ks.axis, ks.distance, ks.critical, ks.pass);
    }
    Ok(())
}
