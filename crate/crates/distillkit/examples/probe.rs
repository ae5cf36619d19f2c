use distillkit::distill::{
    degradability_residual, gds_single_letter_check, DegradabilityDirection,
};
use std::time::Instant;

fn main() {
    for (d0, d1, n) in [(1, 1, 1), (2, 1, 1), (2, 2, 1), (1, 1, 2), (2, 1, 2)] {
        let t0 = Instant::now();
        let report = gds_single_letter_check(d0, d1, n, 8, 7, 4096).unwrap();
        println!(
            "gds({d0},{d1},{n}): a {:.6} b {:.6} c {:.6} match {} bounded {} ({:?})",
            report.sigma0_coherent_info,
            report.canonical_value,
            report.optimizer_value,
            report.canonical_matches,
            report.optimizer_bounded,
            t0.elapsed()
        );
    }
    for (d0, d1) in [(1, 1), (2, 1), (2, 2)] {
        let t0 = Instant::now();
        let sigma0 = distillkit::families::gds_sigma0(d0, d1).unwrap();
        let r = degradability_residual(&sigma0, DegradabilityDirection::Degradable, 1, 3).unwrap();
        println!("sigma0({d0},{d1}) residual {:.3e} ({:?})", r.residual, t0.elapsed());
    }
    // flagged family: both directions large
    let flagged = distillkit::families::flagged_ad_choi(0.5, 0.1, 0.9).unwrap();
    for dir in [
        DegradabilityDirection::Degradable,
        DegradabilityDirection::Antidegradable,
    ] {
        let t0 = Instant::now();
        let r = degradability_residual(&flagged, dir, 1, 3).unwrap();
        println!("flagged {:?} residual {:.3e} ({:?})", dir, r.residual, t0.elapsed());
    }
}
