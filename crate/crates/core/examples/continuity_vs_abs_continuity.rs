//! A well-balanced spec with continuous paths that are not absolutely continuous.

use levy_mma::conditions::{classify, CheckConfig, MMASpec};
use levy_mma::kernel::KernelSpec;
use levy_mma::measure::{DependenceMeasure as D, LevyMeasure as L};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = MMASpec::new(
        KernelSpec::WellBalancedSupOU,
        L::ParetoTail { alpha: 1.5, cutoff: 0.0 },
        D::PowerDensity { exponent: -1.3, lo: 1.0, hi: None },
        0.0,
    );
    let c = classify(&spec, &CheckConfig::default())?;
    println!("overall: {:?}", c.conclusion);
    for r in c.reports.iter().filter(|r| r.condition_id.starts_with("continuous") || r.condition_id.starts_with("abs_continuity")) {
        println!("{}: {:?}", r.condition_id, r.conclusion);
        for s in &r.evidence {
            let v = serde_json::to_value(&s.verdict)?;
            println!("    {} -> {}", s.id, v.get("status").unwrap_or(&v));
        }
    }
    Ok(())
}
