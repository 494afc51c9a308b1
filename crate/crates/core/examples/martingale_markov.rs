//! Martingale-problem defect, weak order in dt, and the restart check.

use sdlab::drift::DriftField;
use sdlab::sde::markov::markov_check;
use sdlab::sde::martingale::{martingale_defect, weak_order, Probe, TestFunction};
use sdlab::sde::weak_conv::Observable;
use sdlab::sde::EnsembleConfig;

fn main() -> sdlab::Result<()> {
    let b = DriftField::ornstein_uhlenbeck(1, 1.0);
    let cfg = EnsembleConfig::new(vec![1.0], 1.0, 0.01, 20_000, 2);
    let f = TestFunction::Gaussian { center: vec![0.0], width: 1.0, amp: 1.0 };
    for probe in [Probe::One, Probe::Cos { time: 0.5, axis: 0, freq: 1.0 }, Probe::Tanh { time: 0.5, axis: 0 }] {
        let r = martingale_defect(&b, &cfg, &f, 0.5, 1.0, &probe)?;
        println!(
            "{probe:?}: defect {:.2e} +- {:.1e}, allowance {:.1e}, pass {}",
            r.defect.mean, r.defect.se, r.allowance, r.pass
        );
    }
    let w = weak_order(&b, &cfg, &f, 0.5, 1.0, &[0.1, 0.05, 0.025, 0.0125])?;
    println!("weak order slope {:.3} (CI {:?})", w.slope, w.slope_ci);

    let r = markov_check(&b, &cfg, 0.5, &Observable::Gauss { time: 1.0, width: 1.0 })?;
    println!(
        "restart at t=0.5: continuous {:.4}, restarted {:.4}, z {:.2}",
        r.continuous.mean, r.restarted.mean, r.z
    );
    Ok(())
}
