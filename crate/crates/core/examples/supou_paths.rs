//! Simulate one supOU path and write it as CSV to stdout.

use levy_mma::conditions::MMASpec;
use levy_mma::kernel::KernelSpec;
use levy_mma::measure::{DependenceMeasure as D, LevyMeasure as L};
use levy_mma::simulation::{simulate_path, uniform_grid, SimOptions, TruncationParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = MMASpec::new(
        KernelSpec::SupOU,
        L::TemperedStable { alpha: 0.8, tempering: 1.0 },
        D::GammaDensity { shape: 2.0, rate: 1.0 },
        0.0,
    );
    let trunc = TruncationParams { small_jump_eps: 0.05, past_window: Some(20.0), gaussian_refine: true, ..Default::default() };
    let grid = uniform_grid(0.0, 10.0, 101);
    let path = simulate_path(&spec, &grid, &trunc, 7, &SimOptions::default())?;
    eprintln!("truncation error bound {:.3e}", path.trunc_error_bound);
    print!("{}", path.to_csv());
    Ok(())
}
