//! Trawl process with unit jumps: the time-averaged mean over replicas should sit near 1.

use levy_mma::conditions::MMASpec;
use levy_mma::kernel::{KernelSpec, TrawlFunction};
use levy_mma::measure::{DependenceMeasure as D, JumpDist, LevyMeasure as L};
use levy_mma::simulation::{uniform_grid, SimOptions, Simulator, TruncationParams};
use levy_mma::stats::{mean, variance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // unit jumps are compensated, so drift 1 restores the raw count
    let spec = MMASpec::new(
        KernelSpec::Trawl { trawl_fn: TrawlFunction::ExpDecay { rate: 1.0 } },
        L::CompoundPoisson { rate: 1.0, jump_dist: JumpDist::Degenerate { value: 1.0 } },
        D::Lebesgue { upper: None },
        1.0,
    );
    let sim = Simulator::new(&spec, &uniform_grid(0.0, 20.0, 41), &TruncationParams::default(), &SimOptions::default())?;
    let avgs: Vec<f64> = sim.replicas(5, 200)?.iter().map(|p| mean(&p.values)).collect();
    let se = (variance(&avgs) / avgs.len() as f64).sqrt();
    println!("mean {:.4} ± {:.4}", mean(&avgs), se);
    Ok(())
}
