//! Monte Carlo characterization of the sequential MAC unit: NRMSE of the
//! weight path, input path and kernel against an ideal dot product.

use ekgnet::analog::{characterize_mac, MacConfig, MIN_TRIALS};

fn main() -> ekgnet::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(MIN_TRIALS * 10);
    let cfg = MacConfig::default();
    let r = characterize_mac(&cfg, trials, 0)?;
    println!("{trials} trials per noise source");
    for (name, value, target, ci) in [
        (
            "weight path",
            r.nrmse_weight_path,
            cfg.sigma_w_rel,
            r.ci.weight_path,
        ),
        (
            "input path",
            r.nrmse_input_path,
            cfg.sigma_in_rel,
            r.ci.input_path,
        ),
        ("kernel", r.nrmse_kernel, cfg.sigma_kernel_rel, r.ci.kernel),
    ] {
        println!(
            "{name:<12} NRMSE {value:.6}  (configured {target:.4}, 95% CI {:.6} .. {:.6})",
            ci.lo, ci.hi
        );
    }
    Ok(())
}
