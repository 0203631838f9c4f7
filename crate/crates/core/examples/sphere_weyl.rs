//! Single-layer potential on the unit sphere: the eigenvalue clusters sit at 1/(2n+1)
//! with multiplicity 2n+1, and n(λ)λ² tends to 1/4.
//!
//! cargo run --release --example sphere_weyl

use singular_spectra::asymptotics::{fit_power_law, weyl_coefficient, WindowRule};
use singular_spectra::kernels::KernelSpec;
use singular_spectra::measure::{discretize, MeasureSpec};
use singular_spectra::operators::{assemble_selfadjoint, symmetric_eigenvalues, DiagonalRule, Sign};

fn main() -> singular_spectra::Result<()> {
    let sphere = discretize(&MeasureSpec::unit_sphere(), 2000)?;
    let k = KernelSpec::riesz(3, 1.0)?;
    let v = vec![1.0; sphere.len()];
    let op = assemble_selfadjoint(&k, &sphere, &v, DiagonalRule::CellAverage)?;
    let spec = symmetric_eigenvalues(&op, 1e-9)?;
    let plus = spec.branch(Sign::Plus);

    println!(" n   cluster mean   1/(2n+1)");
    for n in 0..8usize {
        let c = &plus[n * n..(n + 1) * (n + 1)];
        let mean = c.iter().sum::<f64>() / c.len() as f64;
        println!("{n:2}   {mean:.6}       {:.6}", 1.0 / (2 * n + 1) as f64);
    }

    let fit = fit_power_law(&spec, WindowRule::Auto)?;
    let a = weyl_coefficient(2, 1, 1.0, 4.0 * std::f64::consts::PI)?;
    println!("theta_hat = {:.4} on k in {:?}", fit.theta_hat, fit.window);
    println!("Weyl coefficient = {a} (fitted C^theta = {:.4})", fit.counting_coefficient());
    Ok(())
}
