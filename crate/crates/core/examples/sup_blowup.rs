//! Supremum over [0, 1] as the V-truncation is raised. It keeps growing when pi has infinite mass.

use levy_mma::conditions::MMASpec;
use levy_mma::diagnostics::{sup_divergence_experiment, DiagOptions};
use levy_mma::kernel::KernelSpec;
use levy_mma::measure::{DependenceMeasure as D, LevyMeasure as L};
use levy_mma::simulation::TruncationParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = MMASpec::new(
        KernelSpec::SupOU,
        L::ParetoTail { alpha: 1.5, cutoff: 0.0 },
        D::PowerDensity { exponent: -1.0, lo: 1.0, hi: None },
        0.0,
    );
    let trunc = TruncationParams { small_jump_eps: 0.1, ..Default::default() };
    let r = sup_divergence_experiment(&spec, 1.0, &[1e2, 1e3, 1e4], 40, 1, &trunc, &DiagOptions::default())?;
    println!("regime {:?}", r.regime);
    for (v, m) in r.ladder.iter().zip(&r.medians) {
        println!("V ≤ {v:>8}: median sup {m:.3}");
    }
    println!("monotone growth: {}", r.monotone_growth);
    Ok(())
}
