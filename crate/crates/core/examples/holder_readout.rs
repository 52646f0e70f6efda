//! Hölder exponent read off a simulated path by dyadic increment regression.

use levy_mma::conditions::MMASpec;
use levy_mma::diagnostics::holder_estimate;
use levy_mma::kernel::KernelSpec;
use levy_mma::measure::{DependenceMeasure as D, LevyMeasure as L};
use levy_mma::simulation::{simulate_path, uniform_grid, SimOptions, TruncationParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pi = D::GammaDensity { shape: 2.0, rate: 1.0 };
    let lam = L::ParetoTail { alpha: 1.5, cutoff: 0.0 };
    let trunc = TruncationParams { small_jump_eps: 0.05, past_window: Some(10.0), gaussian_refine: true, ..Default::default() };
    let grid = uniform_grid(0.0, 1.0, 1025);
    for (name, k) in [("supOU", KernelSpec::SupOU), ("well-balanced", KernelSpec::WellBalancedSupOU)] {
        let spec = MMASpec::new(k, lam.clone(), pi.clone(), 0.0);
        let path = simulate_path(&spec, &grid, &trunc, 3, &SimOptions::default())?;
        println!("{name}: holder estimate {:.3}", holder_estimate(&path)?);
    }
    Ok(())
}
