//! The drift catalog: closed-form singular fields, mollification, the
//! admissibility check and an ingested field read back from SDLF.

use sdlab::drift::{check_admissibility, load_external, DriftField};
use sdlab::{GridSpec, SpaceTimeField};

fn main() -> sdlab::Result<()> {
    let radial = DriftField::radial(0.5, 3);
    let mut b = [0.0; 3];
    radial.eval(0.0, &[0.5, 0.0, 0.0], &mut b);
    println!("radial c=0.5 at (0.5,0,0): {b:?}, div {:?}", radial.divergence(0.0, &[0.5, 0.0, 0.0]));

    let g = GridSpec::new(3, 4.0, 32, 0.0, 1.0, 1)?;
    let report = check_admissibility(&radial, 2.5, f64::INFINITY, 1.4, f64::INFINITY, &g)?;
    println!(
        "admissibility (p1=2.5, p2=1.4): drift norms {:?} stable={}, divergence norms {:?} stable={}",
        report.drift_norms, report.drift_stable, report.divergence_norms, report.divergence_stable
    );

    let fine = g.with_points(64)?;
    for eps in [0.4, 0.2, 0.1] {
        let m = radial.mollify(&fine, eps)?;
        m.eval(0.0, &[0.5, 0.0, 0.0], &mut b);
        println!("mollified eps={eps}: b(0.5,0,0)_x = {:.4}", b[0]);
    }

    let lattice = DriftField::lattice(1.0, 1.2, 3, 4, 7)?;
    println!("lattice drift: {} singular points per period cell", lattice.singular_points().len());

    // sample Taylor–Green on a 2π box, write it and load it back as an external field
    let tg = DriftField::taylor_green();
    let g2 = GridSpec::new(2, 2.0 * std::f64::consts::PI, 64, 0.0, 1.0, 1)?;
    let field = SpaceTimeField::from_vector_fn(g2, 2, |t, x, out| tg.eval(t, x, out));
    let dir = std::env::temp_dir().join("sdlab-drift-catalog");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("taylor_green.sdlf");
    field.write_sdlf(&path)?;
    let (ingested, energy) = load_external(&path, &g2, None)?;
    println!(
        "ingested field: dim {}, sup_t L2 {:.4}, L2 of gradient {:.4}, div at (1,1) {:?}",
        ingested.dim(),
        energy.sup_l2,
        energy.grad_l2_l2,
        ingested.divergence(0.0, &[1.0, 1.0])
    );
    Ok(())
}
