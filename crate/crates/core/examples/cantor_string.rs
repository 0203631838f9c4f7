//! Bessel kernel on the middle-thirds Cantor set: the supercritical exponent
//! s/(1+s) and the stability of sup λ_k k^{1/θ} under refinement.

use singular_spectra::experiments::{run_experiment, ExperimentConfig};

const CONFIG: &str = r#"
experiment = "spectrum"
seed = 1

[measure]
variant = "cantor"
level = 10

[kernel]
spec = "bessel:1:2"
diagonal = "cell-average"

[checks]
refine = true
"#;

fn main() -> singular_spectra::Result<()> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let r = run_experiment(&cfg)?;
    let fit = r.fit.as_ref().expect("window has enough points");
    println!("theta  theory {:.5}  fitted {:.4}", r.theory.theta.unwrap_or(f64::NAN), fit.theta_hat);
    println!("sup lambda_k k^(1/theta): level 10 {:.4}, level 9 {:.4}", r.ratios["sup_decay"], r.ratios["sup_decay_coarse"]);
    for (name, f) in &r.flags {
        println!("{name:22} {} ({:.4})", if f.pass { "pass" } else { "FAIL" }, f.value);
    }
    Ok(())
}
