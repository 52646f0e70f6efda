//! Monte Carlo second increment moment against the kernel integral.

use levy_mma::conditions::MMASpec;
use levy_mma::diagnostics::{moment_scaling, DiagOptions};
use levy_mma::kernel::KernelSpec;
use levy_mma::measure::{DependenceMeasure as D, LevyMeasure as L};
use levy_mma::simulation::TruncationParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = MMASpec::new(KernelSpec::SupOU, L::ParetoTail { alpha: 1.5, cutoff: 0.0 }, D::Atomic { atoms: vec![(1.0, 1.0)] }, 0.0);
    let trunc = TruncationParams { small_jump_eps: 0.01, past_window: Some(10.0), gaussian_refine: true, ..Default::default() };
    let opts = DiagOptions { bootstrap: 100, ..Default::default() };
    let fit = moment_scaling(&spec, 2.0, &[0.1, 0.5, 1.0], 2000, 5, &trunc, &opts)?;
    for (((t, e), th), r) in fit.t.iter().zip(&fit.estimate).zip(&fit.theory).zip(&fit.ratio) {
        println!("t = {t:<4} E|dX|^2 = {e:.4}  kernel integral {th:.4}  ratio {r:.3}");
    }
    Ok(())
}
