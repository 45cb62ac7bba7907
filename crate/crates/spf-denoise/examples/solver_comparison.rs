//! Runs all four solvers on the same synthetic noisy image and compares
//! objective values, PSNR, and iteration counts.

use spf_denoise::imaging::{add_gaussian_noise, psnr, GaussianNoise, ImageGray};
use spf_denoise::linop::GradOperator2d;
use spf_denoise::solvers::{
    default_alpha, default_params, estimate_b_norm_sq, objective, solve, Algorithm, ProblemSpec,
};

fn main() {
    // Piecewise-constant 64x64 phantom: four flat quadrants.
    let n = 64;
    let mut clean = ImageGray::constant(n, n, 0.0);
    for r in 0..n {
        for c in 0..n {
            let v = match (r < n / 2, c < n / 2) {
                (true, true) => 40.0,
                (true, false) => 120.0,
                (false, true) => 180.0,
                (false, false) => 230.0,
            };
            clean.set(r, c, v);
        }
    }
    let eta = 20.0;
    let noisy = add_gaussian_noise(&clean, &GaussianNoise::new(eta, 7));
    println!("noisy PSNR: {:.2} dB", psnr(&clean, &noisy).unwrap());

    let lambda = 16.0;
    let op = GradOperator2d::new(n);
    let partition = op.tv_partition();
    let b_norm_sq = estimate_b_norm_sq(&op).unwrap();
    let alpha = default_alpha(lambda, b_norm_sq);
    let spec = ProblemSpec::new(
        noisy.as_slice(),
        lambda,
        alpha,
        &op,
        &partition,
        Some((0.0, 255.0)),
    )
    .unwrap();

    println!(
        "lambda = {lambda}, alpha = {alpha:.2}, ||B||^2 = {b_norm_sq:.4}\n{:>6} {:>10} {:>12} {:>6} {:>10}",
        "algo", "psnr_db", "objective", "iters", "wall_s"
    );
    for algo in [Algorithm::Rof, Algorithm::Pd, Algorithm::Dca, Algorithm::Pdhg] {
        let params = default_params(&spec, algo, b_norm_sq);
        let report = solve(&spec, algo, &params).unwrap();
        let den = ImageGray::from_pixels(n, n, report.x_final.clone()).unwrap();
        println!(
            "{:>6} {:>10.3} {:>12.1} {:>6} {:>10.3}",
            algo.name(),
            psnr(&clean, &den).unwrap(),
            objective(&spec, &report.x_final).unwrap(),
            report.iterations,
            report.wall_seconds
        );
    }
}
