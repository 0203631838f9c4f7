//! Cwikel-Lieb-Rozenblum type scan: N-(g) against g^θ·K for growing coupling.

use singular_spectra::asymptotics::exponent_theta;
use singular_spectra::clr::clr_scan;
use singular_spectra::measure::{discretize, MeasureSpec};
use singular_spectra::operators::PeriodicBox;

fn main() -> singular_spectra::Result<()> {
    let l = 0.75;
    let dust = discretize(&MeasureSpec::cantor_dust(), 3)?;
    let theta = exponent_theta(2, l, dust.nominal_dim())?;
    let v = vec![1.0; dust.len()];
    let bx = PeriodicBox::centered_on(&dust, 4.0 * dust.diam());
    let g: Vec<f64> = (0..8).map(|k| 2f64.powi(k)).collect();
    let scan = clr_scan(l, &bx, 12, &dust, &v, &g, theta, 1.0)?;
    print!("{}", scan.to_csv());
    println!("modes {}, max ratio {:.4}, monotone {}", scan.modes, scan.max_ratio, scan.monotone());
    Ok(())
}
