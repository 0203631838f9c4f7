//! Discretize the preset measures and estimate their Ahlfors constants
//! A = sup μ(B(x,r))/r^s and B = inf over the same radii.

use singular_spectra::measure::{ahlfors_estimate, default_radii, discretize, transform, CenterRule, MeasureSpec, Transform};

fn main() -> singular_spectra::Result<()> {
    let presets = [
        ("cantor", MeasureSpec::middle_thirds_cantor(), 10),
        ("dust", MeasureSpec::cantor_dust(), 5),
        ("circle", MeasureSpec::unit_circle(), 2000),
        ("sphere", MeasureSpec::unit_sphere(), 2000),
    ];
    for (name, spec, level) in presets {
        let m = discretize(&spec, level)?;
        let rep = ahlfors_estimate(&m, m.nominal_dim(), &default_radii(&m, 16), CenterRule::default())?;
        println!(
            "{name:7} atoms {:5}  s {:.4}  mass {:.4}  A {:.4}  B {:.4}",
            m.len(),
            m.nominal_dim(),
            m.total_mass(),
            rep.a_hat,
            rep.b_hat
        );
    }
    // Scaling by 3 with weights scaled by 3^s maps the Cantor set onto two copies of itself.
    let c = discretize(&MeasureSpec::middle_thirds_cantor(), 6)?;
    let big = transform(&c, &Transform::Scale { t: 3.0, weight_exponent: c.nominal_dim() })?;
    println!("scaled Cantor mass {:.4}, diameter {:.4}", big.total_mass(), big.diam());
    Ok(())
}
