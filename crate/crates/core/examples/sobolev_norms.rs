//! Bessel-potential, mixed and localized norms of a few fields, plus the
//! inequality battery.

use sdlab::norms::battery::{inequality_battery, spike_lattice, BatteryConfig};
use sdlab::norms::localized::localized_norm_default;
use sdlab::norms::{bessel_apply, spacetime_norm, NormSpec};
use sdlab::{GridSpec, SpaceTimeField};

fn main() -> sdlab::Result<()> {
    let g = GridSpec::new(2, 8.0, 64, 0.0, 1.0, 8)?;
    let gauss = SpaceTimeField::from_fn(g, |t, x| (1.0 + t) * (-(x[0] * x[0] + x[1] * x[1])).exp());

    for alpha in [0.0, 0.5, 1.0] {
        let spec = NormSpec::new(alpha, 4.0, 4.0);
        println!(
            "alpha={alpha}: global {:.5}  localized(r=1) {:.5}",
            spacetime_norm(&gauss, &spec)?,
            localized_norm_default(&gauss, &spec)?
        );
    }

    // (I−Δ)^{1/2} followed by (I−Δ)^{−1/2} is the identity up to round-off
    let back = bessel_apply(&bessel_apply(&gauss, 1.0)?, -1.0)?;
    let err = back.zip_with(&gauss, |a, b| (a - b).abs())?.max_abs();
    println!("bessel round trip error {err:.2e}");

    let spikes = spike_lattice(g, 0.45);
    println!("spike lattice localized L4 norm {:.4}", localized_norm_default(&spikes, &NormSpec::lebesgue(4.0, 4.0))?);

    // the larger radius must still fit the box (L ≥ 8r)
    let cfg = BatteryConfig {
        spec: NormSpec::lebesgue(2.0, 2.0).with_radius(0.5),
        large_radius: 1.0,
        ..BatteryConfig::default()
    };
    let report = inequality_battery(&[gauss, spikes], &cfg)?;
    for check in ["gagliardo_nirenberg", "radius_small_over_large", "radius_large_over_small", "indicator"] {
        println!("{check:<26} max ratio {:.4}", report.max_ratio(check));
    }
    Ok(())
}
