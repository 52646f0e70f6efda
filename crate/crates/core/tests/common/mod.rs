#![allow(dead_code)]

use levy_mma::conditions::{Conclusion, MMASpec};
use levy_mma::kernel::{Holder, KernelSpec, TrawlFunction};
use levy_mma::measure::{DependenceMeasure as D, JumpDist, LevyMeasure as L};

pub fn pareto(a: f64) -> L {
    L::ParetoTail { alpha: a, cutoff: 0.0 }
}
pub fn gamma_pi(k: f64, r: f64) -> D {
    D::GammaDensity { shape: k, rate: r }
}
pub fn power(e: f64, lo: f64) -> D {
    D::PowerDensity { exponent: e, lo, hi: None }
}
pub fn lebesgue() -> D {
    D::Lebesgue { upper: None }
}
pub fn trawl(tf: TrawlFunction) -> KernelSpec {
    KernelSpec::Trawl { trawl_fn: tf }
}

/// Specs whose classification is known in closed form, with the expected conclusion.
pub fn curated_suite() -> Vec<(&'static str, MMASpec, Conclusion)> {
    use Conclusion::*;
    use KernelSpec::*;
    let cp_exp = L::CompoundPoisson { rate: 2.0, jump_dist: JumpDist::Exponential { rate: 1.0 } };
    let cp_unit = L::CompoundPoisson { rate: 1.0, jump_dist: JumpDist::Degenerate { value: 1.0 } };
    let cp_unif = L::CompoundPoisson { rate: 1.0, jump_dist: JumpDist::Uniform { lo: 0.5, hi: 2.0 } };
    let gam = L::Gamma { shape: 1.0, rate: 1.0 };
    let ts = |a: f64| L::TemperedStable { alpha: a, tempering: 1.0 };
    let table = TrawlFunction::Tabulated {
        grid: vec![(0.0, 1.0), (0.5, 0.6), (1.0, 0.3), (2.0, 0.0)],
        holder: Some(Holder { delta: 1.0, c: 0.8, t0: 2.0 }),
    };
    let s = |k: KernelSpec, l: L, p: D| MMASpec::new(k, l, p, 0.0);
    vec![
        ("supou_pareto15_gamma", s(SupOU, pareto(1.5), gamma_pi(2.0, 1.0)), CadlagModificationExists),
        ("supou_pareto08_gamma", s(SupOU, pareto(0.8), gamma_pi(3.0, 2.0)), CadlagModificationExists),
        ("supou_gamma_levy", s(SupOU, gam.clone(), gamma_pi(2.0, 1.0)), CadlagModificationExists),
        ("supou_compound_poisson", s(SupOU, cp_exp.clone(), gamma_pi(2.0, 1.0)), CadlagModificationExists),
        ("supou_tempered_uniform_pi", s(SupOU, ts(1.2), D::PowerDensity { exponent: 0.0, lo: 0.5, hi: Some(2.0) }), CadlagModificationExists),
        ("supou_atomic_pi", s(SupOU, pareto(1.5), D::Atomic { atoms: vec![(1.0, 1.0), (3.0, 0.5)] }), CadlagModificationExists),
        ("supou_power_tail_pi", s(SupOU, pareto(1.9), power(-1.5, 1.0)), CadlagModificationExists),
        ("supou_finite_pareto", s(SupOU, L::ParetoTail { alpha: 1.5, cutoff: 1.0 }, gamma_pi(2.0, 1.0)), CadlagModificationExists),
        ("wb_pareto15_gamma", s(WellBalancedSupOU, pareto(1.5), gamma_pi(2.0, 1.0)), ContinuousModificationExists),
        ("wb_gamma_levy", s(WellBalancedSupOU, L::Gamma { shape: 2.0, rate: 1.0 }, gamma_pi(2.0, 3.0)), ContinuousModificationExists),
        ("wb_stable_power_pi", s(WellBalancedSupOU, pareto(1.5), power(-1.3, 1.0)), ContinuousModificationExists),
        ("wb_compound_poisson_atom", s(WellBalancedSupOU, cp_unif, D::Atomic { atoms: vec![(2.0, 1.0)] }), ContinuousModificationExists),
        ("wb_tempered", s(WellBalancedSupOU, ts(0.5), gamma_pi(2.0, 1.0)), ContinuousModificationExists),
        ("trawl_exp_pareto", s(trawl(TrawlFunction::ExpDecay { rate: 1.0 }), pareto(1.5), lebesgue()), CadlagModificationExists),
        ("trawl_power_unit_jumps", s(trawl(TrawlFunction::PowerDecay { exponent: 2.0, scale: 1.0 }), cp_unit.clone(), lebesgue()), CadlagModificationExists),
        ("trawl_table_gamma", s(trawl(table), gam.clone(), lebesgue()), CadlagModificationExists),
        ("trawl_capped_lebesgue", s(trawl(TrawlFunction::ExpDecay { rate: 2.0 }), pareto(0.5), D::Lebesgue { upper: Some(0.5) }), CadlagModificationExists),
        ("pw_gamma_exp", s(PowerWeighted { kappa: 1.0 }, gam.clone(), D::ExpDensity { rate: 1.0 }), CadlagModificationExists),
        ("pw_half_pareto", s(PowerWeighted { kappa: 0.5 }, pareto(1.5), gamma_pi(2.0, 1.0)), CadlagModificationExists),
        ("pw_two_compound_poisson", s(PowerWeighted { kappa: 2.0 }, cp_exp, D::ExpDensity { rate: 2.0 }), CadlagModificationExists),
        ("pw_pareto08_gamma", s(PowerWeighted { kappa: 1.0 }, pareto(0.8), gamma_pi(3.0, 1.0)), CadlagModificationExists),
        ("pw_tempered_infinite_variation", s(PowerWeighted { kappa: 1.0 }, ts(1.5), gamma_pi(2.0, 1.0)), CadlagModificationExists),
        ("supou_infinite_pi", s(SupOU, pareto(1.5), power(-1.0, 1.0)), NoCadlagModification),
        ("supou_infinite_pi_gamma_levy", s(SupOU, gam.clone(), power(-1.0, 1.0)), NoCadlagModification),
        ("supou_infinite_pi_tempered", s(SupOU, ts(0.5), power(-0.5, 2.0)), NoCadlagModification),
        ("wb_infinite_pi", s(WellBalancedSupOU, pareto(1.5), power(-1.0, 1.0)), NoCadlagModification),
        ("trawl_singular_pareto", s(trawl(TrawlFunction::SingularPower { exponent: 0.5 }), pareto(1.5), lebesgue()), NoCadlagModification),
        ("trawl_singular_gamma", s(trawl(TrawlFunction::SingularPower { exponent: 0.3 }), gam, lebesgue()), NoCadlagModification),
        ("pw_point_intensity_14", s(PowerWeighted { kappa: 1.0 }, pareto(0.5), power(-1.4, 1.0)), NoCadlagModification),
        ("pw_point_intensity_13", s(PowerWeighted { kappa: 1.0 }, pareto(0.5), power(-1.3, 1.0)), NoCadlagModification),
    ]
}
