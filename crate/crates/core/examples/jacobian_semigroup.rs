//! Flow determinant and L1 mass of the transported density for OU and
//! Taylor–Green drifts.

use std::f64::consts::PI;

use sdlab::drift::DriftField;
use sdlab::sde::jacobian::{jacobian_semigroup, JacobianConfig};

fn main() -> sdlab::Result<()> {
    let ou = JacobianConfig {
        start_time: 0.0,
        end_time: 0.5,
        dt: 0.01,
        paths: 2000,
        seed: 1,
        center: vec![0.3, 0.3],
        width: 0.5,
        box_extent: None,
    };
    let r = jacobian_semigroup(&DriftField::ornstein_uhlenbeck(2, 1.0), &ou)?;
    println!("OU: E det = {:.6}, exact e^(d t) = {:.6}", r.determinant.mean, (2.0f64 * 0.5).exp());

    let tg = JacobianConfig { end_time: 1.0, paths: 20_000, box_extent: Some(2.0 * PI), ..ou };
    let r = jacobian_semigroup(&DriftField::taylor_green(), &tg)?;
    let mass = r.forward_ratio.expect("box given");
    println!(
        "Taylor-Green: det in [{:.6}, {:.6}], L1 ratio {:.4} +- {:.4}, pass {}",
        r.det_min, r.det_max, mass.mean, mass.se, r.pass
    );
    Ok(())
}
