//! Forward solve with a mollified radial drift, the energy monitor and a
//! stability sweep along a mollification ladder.

use sdlab::drift::DriftField;
use sdlab::norms::NormSpec;
use sdlab::pde::{energy_monitor, solve, stability_sweep, Direction, EtaCutoff, PdeProblem, SolverConfig, SweepConfig};
use sdlab::{GridSpec, SpaceTimeField};

fn main() -> sdlab::Result<()> {
    let g = GridSpec::new(3, 4.0, 32, 0.0, 1.0, 10)?;
    let f = SpaceTimeField::from_fn(g, |_, x| (-x.iter().map(|v| v * v).sum::<f64>()).exp());
    let drift_grid = g.with_points(64)?;
    let b = DriftField::radial(0.5, 3).mollify(&drift_grid, 0.2)?;
    let solver = SolverConfig { dt: 0.01, ..Default::default() };

    let sol = solve(&PdeProblem::new(b.clone(), f.clone(), Direction::Forward)?, &solver)?;
    println!(
        "sup|u| {:.5}, V-norm {:.5}, min u {:.2e}, residual {:.1e}, theta {}",
        sol.sup_norm,
        sol.v_norm,
        sol.u.min_value(),
        sol.residual,
        sol.meta.theta
    );

    let problem = PdeProblem::new(b, f.clone(), Direction::Forward)?;
    let eta = EtaCutoff::new(0.5, 1.0, vec![0.0; 3]);
    let energy = energy_monitor(&sol, &problem, &eta, 0.0, &[NormSpec::lebesgue(4.0, 4.0).with_radius(0.5); 3])?;
    println!("energy inequality: largest empirical constant {:.4}", energy.max_c_emp());

    let sweep = SweepConfig {
        levels: vec![0.4, 0.2, 0.1],
        drift_grid,
        region_radius: 1.0,
        source_norm: NormSpec::lebesgue(4.0, 4.0).with_radius(0.5),
        direction: Direction::Forward,
        solver,
    };
    let r = stability_sweep(&DriftField::radial(0.5, 3), &f, &sweep)?;
    println!(
        "ladder {:?}: consecutive distances {:?}, strictly decreasing {}, rate {:?}",
        r.levels, r.consecutive, r.strictly_decreasing, r.cauchy_rate
    );
    Ok(())
}
