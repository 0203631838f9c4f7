//! Stopping cubes for a random atomic measure, sorted into disjoint families,
//! with the audit that checks coverage and the family count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use singular_spectra::covering::{besicovitch_families, covering_audit, kappa_impl, stopping_cubes, JRegime};
use singular_spectra::experiments::runs::random_cube_measure;

fn main() -> singular_spectra::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for dim in 1..=3 {
        let m = random_cube_measure(dim, 200, 2024, dim as u64)?;
        let v: Vec<f64> = (0..m.len()).map(|_| rng.gen_range(0.5..1.5)).collect();
        let stop = stopping_cubes(&m, &v, JRegime::Subcritical { theta: 2.0 }, 8, 0.25)?;
        let cov = besicovitch_families(&stop, 8);
        let audit = covering_audit(&cov, &m);
        println!(
            "N={dim}: {} cubes in {} families (ceiling {}), multiplicity {}, covered {}, disjoint {}",
            cov.cubes.len(),
            cov.kappa,
            kappa_impl(dim).unwrap_or(0),
            audit.max_multiplicity,
            audit.all_covered,
            audit.family_disjoint
        );
    }
    Ok(())
}
