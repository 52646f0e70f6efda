//! Classify a handful of specs and print the conclusion of each checker.

use levy_mma::conditions::{classify, CheckConfig, MMASpec};
use levy_mma::kernel::{KernelSpec, TrawlFunction};
use levy_mma::measure::{DependenceMeasure as D, LevyMeasure as L};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pareto = L::ParetoTail { alpha: 1.5, cutoff: 0.0 };
    let specs = [
        ("supOU, gamma pi", MMASpec::new(KernelSpec::SupOU, pareto.clone(), D::GammaDensity { shape: 2.0, rate: 1.0 }, 0.0)),
        ("supOU, exponential pi", MMASpec::new(KernelSpec::SupOU, pareto.clone(), D::ExpDensity { rate: 1.0 }, 0.0)),
        ("supOU, infinite-mass pi", MMASpec::new(KernelSpec::SupOU, pareto.clone(), D::PowerDensity { exponent: -1.0, lo: 1.0, hi: None }, 0.0)),
        ("well-balanced", MMASpec::new(KernelSpec::WellBalancedSupOU, pareto.clone(), D::GammaDensity { shape: 2.0, rate: 1.0 }, 0.0)),
        (
            "trawl",
            MMASpec::new(KernelSpec::Trawl { trawl_fn: TrawlFunction::ExpDecay { rate: 1.0 } }, pareto, D::Lebesgue { upper: None }, 0.0),
        ),
    ];
    let cfg = CheckConfig::default();
    for (name, spec) in &specs {
        let c = classify(spec, &cfg)?;
        println!("{name}: {:?}", c.conclusion);
        for r in &c.reports {
            println!("    {:<32} {:?}", r.condition_id, r.conclusion);
        }
    }
    Ok(())
}
