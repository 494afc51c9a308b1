//! Backward PDE solution against path integrals on a 3 x 3 panel.

use sdlab::drift::DriftField;
use sdlab::pde::{solve, Direction, PdeProblem, SolverConfig};
use sdlab::sde::feynman_kac::{feynman_kac_check, fit_disc_constant, standard_panel, FkConfig};
use sdlab::{GridSpec, SpaceTimeField};

fn main() -> sdlab::Result<()> {
    let g = GridSpec::new(2, 8.0, 32, 0.0, 1.0, 10)?;
    let fine_grid = g.with_points(64)?;
    let source = |x: &[f64]| (-(x[0] * x[0] + x[1] * x[1])).exp();
    let b = DriftField::radial(0.5, 2).mollify(&g.with_points(128)?, 0.2)?;
    let solver = SolverConfig { dt: 0.01, ..Default::default() };

    let f = SpaceTimeField::from_fn(g, |_, x| source(x));
    let f_fine = SpaceTimeField::from_fn(fine_grid, |_, x| source(x));
    let coarse = solve(&PdeProblem::new(b.clone(), f, Direction::Backward)?, &solver)?;
    let fine = solve(&PdeProblem::new(b.clone(), f_fine.clone(), Direction::Backward)?, &solver)?;

    let panel = standard_panel(2, 0.0, 1.0, 0.5);
    let dt = 1e-3;
    let c_disc = fit_disc_constant(&coarse, &fine, &panel, dt);
    let cfg = FkConfig { panel, dt, paths: 2000, seed: 3 };
    let r = feynman_kac_check(&fine, &b, &f_fine, c_disc, &cfg)?;
    println!("fitted discretization constant {c_disc:.4}");
    for c in &r.cells {
        println!(
            "s={:.2} x={:?}: pde {:.5}  mc {:.5} +- {:.5}  tol {:.5}  {}",
            c.s, c.x, c.pde, c.mc.mean, c.mc.se, c.tolerance, if c.pass { "ok" } else { "FAIL" }
        );
    }
    println!("worst |gap|/tolerance {:.3}", r.worst_ratio());
    Ok(())
}
