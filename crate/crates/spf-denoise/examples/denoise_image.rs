//! End-to-end image denoising: reads a PGM (a benchmark image from assets/
//! if present, otherwise a synthetic phantom), adds seeded Gaussian noise,
//! denoises with the semiconvex PDHG solver, and writes the noisy and
//! denoised PGMs next to the input.
//!
//! Run `scripts/fetch_test_images.sh` first to use the standard 256x256
//! test images.

use spf_denoise::imaging::{add_gaussian_noise, psnr, read_pgm, write_pgm, GaussianNoise, ImageGray};
use spf_denoise::linop::GradOperator2d;
use spf_denoise::solvers::{
    default_alpha, default_params, estimate_b_norm_sq, solve, Algorithm, ProblemSpec,
};
use std::path::Path;

fn main() {
    let asset = Path::new("assets/cameraman.pgm");
    let clean = if asset.exists() {
        println!("using {}", asset.display());
        read_pgm(asset).unwrap()
    } else {
        println!(
            "{} not found (see scripts/fetch_test_images.sh); using a synthetic phantom",
            asset.display()
        );
        let n = 128;
        let mut img = ImageGray::constant(n, n, 30.0);
        for r in 0..n {
            for c in 0..n {
                let (dr, dc) = (r as f64 - 64.0, c as f64 - 64.0);
                if dr * dr + dc * dc < 40.0 * 40.0 {
                    img.set(r, c, 200.0);
                }
            }
        }
        img
    };

    let eta = 20.0;
    let lambda = 16.0;
    let noisy = add_gaussian_noise(&clean, &GaussianNoise::new(eta, 1));
    let n = clean.n_side().expect("square image");

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
    let params = default_params(&spec, Algorithm::Pdhg, b_norm_sq);
    let report = solve(&spec, Algorithm::Pdhg, &params).unwrap();
    let denoised = ImageGray::from_pixels(n, n, report.x_final).unwrap();

    write_pgm(&noisy, "noisy.pgm").unwrap();
    write_pgm(&denoised, "denoised.pgm").unwrap();
    println!("noisy    PSNR: {:.2} dB", psnr(&clean, &noisy).unwrap());
    println!("denoised PSNR: {:.2} dB", psnr(&clean, &denoised).unwrap());
    println!(
        "iterations: {} (converged: {}), wall: {:.2}s",
        report.iterations, report.converged, report.wall_seconds
    );
    println!("wrote noisy.pgm and denoised.pgm");
}
