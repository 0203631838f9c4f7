//! Singular numbers of V2·K·V1 on the sphere: the sup-constant, its behaviour
//! under dilation, and the Ky Fan product chain.

use singular_spectra::experiments::{run_experiment, ExperimentConfig};

const CONFIG: &str = r#"
experiment = "nonsa"
seed = 11

[measure]
variant = "sphere"
level = 300

[kernel]
spec = "riesz:3:1"
diagonal = "cell-average"

[nonsa]
shape = "weights-outside"
r1 = 4.0
r2 = 4.0
dilation = 2.0

[nonsa.v1]
kind = "random"
low = 0.5
high = 2.0

[nonsa.v2]
kind = "random"
low = 0.25
high = 1.5
"#;

fn main() -> singular_spectra::Result<()> {
    let r = run_experiment(&ExperimentConfig::from_toml(CONFIG)?)?;
    for (k, v) in &r.ratios {
        println!("{k:18} {v:.6}");
    }
    Ok(())
}
