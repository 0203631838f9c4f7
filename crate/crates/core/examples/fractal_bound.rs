//! Subcritical bound on the planar Cantor dust: sup_λ n±(λ)λ^θ / K stays bounded
//! as the level grows.

use singular_spectra::asymptotics::{bound_ratio, predict};
use singular_spectra::kernels::KernelSpec;
use singular_spectra::measure::{ahlfors_estimate, default_radii, discretize, CenterRule, MeasureSpec};
use singular_spectra::operators::{assemble_selfadjoint, symmetric_eigenvalues, DiagonalRule};

fn main() -> singular_spectra::Result<()> {
    let k = KernelSpec::riesz(2, 0.75)?;
    println!("level  atoms  theta    A_hat    ratio");
    for level in 2..=5 {
        let dust = discretize(&MeasureSpec::cantor_dust(), level)?;
        let v = vec![1.0; dust.len()];
        let ahl = ahlfors_estimate(&dust, dust.nominal_dim(), &default_radii(&dust, 16), CenterRule::default())?;
        let p = predict(&k, &dust, &v, false, Some(&ahl))?;
        let spec = symmetric_eigenvalues(&assemble_selfadjoint(&k, &dust, &v, DiagonalRule::Punctured)?, 1e-9)?;
        let b = p.bound_plus.expect("positive density");
        let ratio = bound_ratio(&spec, p.theta, b.bound_k)?;
        println!("{level:5}  {:5}  {:.4}  {:.4}  {ratio:.4}", dust.len(), p.theta, ahl.a_hat);
    }
    Ok(())
}
