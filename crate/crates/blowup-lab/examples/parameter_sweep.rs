//! Sweeps the boundary flux exponent and prints the fitted slope against
//! each run's proven rate window, exercising the same machinery as
//! `blowup-lab sweep --axis q`.

use blowup_lab::commands::{cmd_sweep, SweepAxis};
use blowup_lab::config::ExperimentConfig;

const BASE: &str = r#"
[spec]
n = 1
R = 1.0
p = 1.0
q = 1.0
lambda = 1.0

[spec.u0]
family = "quadratic"
a = -1.0

[grid]
N = 96

[control]
u_stop = 8.0
t_max = 10.0

[analysis]
fit_window = [5.0, 7.5]
"#;

fn main() -> blowup_lab::Result<()> {
    let config = ExperimentConfig::parse(BASE)?;
    let dir = std::env::temp_dir().join("blowup-lab-sweep-example");
    let rows = cmd_sweep(&config, SweepAxis::FluxExponent, &[1.5, 2.0, 3.0], &dir)?;

    println!("{:>6} {:>12} {:>8} {:>18}  verdict", "q", "T_hat", "slope", "proven window");
    for row in &rows {
        println!(
            "{:>6} {:>12.6} {:>8.4} [{:>7.4}, {:>7.4}]  {}",
            row.value, row.t_hat, row.slope, row.window.0, row.window.1, row.verdict
        );
    }
    println!("per-run artifacts and summary.csv under {}", dir.display());
    Ok(())
}
