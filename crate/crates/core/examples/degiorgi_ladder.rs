//! Run the level-set iteration on a PDE solution and certify a threshold level.

use sdlab::degiorgi::{cutoff_ladder, run_iteration, source_norm, threshold_kappa, DeGiorgiConfig};
use sdlab::drift::DriftField;
use sdlab::norms::NormSpec;
use sdlab::pde::{solve, Direction, PdeProblem, SolverConfig};
use sdlab::{GridSpec, SpaceTimeField};

fn main() -> sdlab::Result<()> {
    let g = GridSpec::new(3, 4.0, 32, 0.0, 1.0, 10)?;
    let f = SpaceTimeField::from_fn(g, |_, x| (-x.iter().map(|v| v * v).sum::<f64>()).exp());
    let b = DriftField::radial(0.5, 3).mollify(&g.with_points(128)?, 0.1)?;
    let u = solve(&PdeProblem::new(b, f.clone(), Direction::Forward)?, &SolverConfig { dt: 0.01, ..Default::default() })?;

    let cfg = DeGiorgiConfig::new([NormSpec::lebesgue(4.0, 4.0); 3], 1.0, vec![0.0; 3]).with_radius(0.5);
    for rung in cutoff_ladder(&g, &cfg)?.iter().take(4) {
        println!("{rung:?}");
    }

    let half = run_iteration(&u, &cfg, 0.5 * u.sup_norm)?;
    println!("kappa = sup/2: a_n = {:?}", half.a().iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>());

    let cert = threshold_kappa(&u, &cfg, source_norm(&f, &cfg)?)?;
    println!(
        "certified kappa {:.4} (sup|u| {:.4}), fit {:?}, sufficient bound {:?}",
        cert.kappa, u.sup_norm, cert.report.fit, cert.sufficient_bound
    );
    Ok(())
}
