//! Negative eigenvalues of a Galerkin-truncated Schrödinger-type form equal the
//! eigenvalues above 1/g of the compressed Birman-Schwinger pencil.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use singular_spectra::clr::birman_schwinger_check;
use singular_spectra::measure::{discretize, MeasureSpec};
use singular_spectra::operators::{galerkin_pair_for, trig_modes, PeriodicBox};

fn main() -> singular_spectra::Result<()> {
    let dust = discretize(&MeasureSpec::cantor_dust(), 3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let v: Vec<f64> = (0..dust.len()).map(|_| rng.gen_range(0.5..1.5)).collect();
    let bx = PeriodicBox::centered_on(&dust, 4.0 * dust.diam());
    let pair = galerkin_pair_for(0.75, &bx, trig_modes(2, 6), &dust, &v)?;
    let a = pair.a_matrix();
    println!("{} modes", pair.modes.len());
    println!("      g   N-(g)   n+(1/g)");
    for g in [1.0, 10.0, 100.0, 1000.0, 10000.0] {
        let c = birman_schwinger_check(&a, &pair.b, g)?;
        println!("{g:7}   {:5}   {:7}", c.n_minus, c.n_plus);
    }
    Ok(())
}
