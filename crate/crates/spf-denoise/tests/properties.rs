//! Randomized invariant checks (proptest) for the penalty layer and image
//! utilities.

use proptest::prelude::*;
use spf_denoise::imaging::{parse_pgm, psnr, write_pgm, ImageGray};
use spf_denoise::penalty::{
    env_abs, eval_mcp, project_dual_ball, prox_compositional_conjugate, prox_mcp, Partition,
};

proptest! {
    /// The MCP is even, bounded by both |x| and the plateau alpha/2, and 0
    /// only at 0.
    #[test]
    fn mcp_bounds(x in -50.0f64..50.0, alpha in 0.01f64..20.0) {
        let v = eval_mcp(x, alpha);
        prop_assert!(v >= 0.0);
        prop_assert!(v <= x.abs() + 1e-12);
        prop_assert!(v <= alpha / 2.0 + 1e-12);
        prop_assert!((v - eval_mcp(-x, alpha)).abs() <= 1e-12);
        if x.abs() >= alpha {
            prop_assert!((v - alpha / 2.0).abs() <= 1e-12);
        }
    }

    /// The envelope is squeezed between 0 and |x|, and touches |x| - alpha/2
    /// beyond the kink.
    #[test]
    fn envelope_bounds(x in -50.0f64..50.0, alpha in 0.01f64..20.0) {
        let e = env_abs(x, alpha);
        prop_assert!(e >= 0.0);
        prop_assert!(e <= x.abs() + 1e-12);
        prop_assert!((eval_mcp(x, alpha) - (x.abs() - e)).abs() <= 1e-10);
    }

    /// Every prox point shrinks toward zero, keeps the input's sign, and the
    /// map is odd.
    #[test]
    fn prox_points_shrink(x in -20.0f64..20.0, alpha in 0.05f64..5.0, ratio in 0.05f64..4.0) {
        let beta = alpha * ratio;
        for p in prox_mcp(x, alpha, beta).points() {
            prop_assert!(p.abs() <= x.abs() + 1e-12);
            prop_assert!(p * x >= 0.0);
        }
        let pos: Vec<f64> = prox_mcp(x, alpha, beta).points();
        let neg: Vec<f64> = prox_mcp(-x, alpha, beta).points().iter().map(|v| -v).collect();
        for (a, b) in pos.iter().zip(&neg) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    /// Dual projection lands inside the ball and is idempotent.
    #[test]
    fn dual_projection(v in prop::collection::vec(-10.0f64..10.0, 6), radius in 0.1f64..5.0) {
        let p = Partition::tv_pairs(3);
        let proj = project_dual_ball(&v, &p, radius).unwrap();
        for block in p.blocks() {
            let n: f64 = block.iter().map(|&i| proj[i] * proj[i]).sum::<f64>().sqrt();
            prop_assert!(n <= radius + 1e-12);
        }
        let twice = project_dual_ball(&proj, &p, radius).unwrap();
        for (a, b) in proj.iter().zip(&twice) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        let unit = prox_compositional_conjugate(&v, &p).unwrap();
        for block in p.blocks() {
            let n: f64 = block.iter().map(|&i| unit[i] * unit[i]).sum::<f64>().sqrt();
            prop_assert!(n <= 1.0 + 1e-12);
        }
    }

    /// PGM write/read round-trips any 8-bit image, including non-square ones.
    #[test]
    fn pgm_roundtrip(rows in 1usize..12, cols in 1usize..12, seed in 0u64..1000) {
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15) | 1;
        let pixels: Vec<f64> = (0..rows * cols)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state % 256) as f64
            })
            .collect();
        let img = ImageGray::from_pixels(rows, cols, pixels).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        write_pgm(&img, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let back = parse_pgm(&bytes).unwrap();
        prop_assert_eq!(back, img);
    }

    /// PSNR is symmetric and decreases as uniform error grows.
    #[test]
    fn psnr_monotone(base in 0.0f64..200.0, err1 in 0.5f64..20.0, extra in 0.5f64..20.0) {
        let a = ImageGray::constant(4, 4, base);
        let b = ImageGray::constant(4, 4, base + err1);
        let c = ImageGray::constant(4, 4, base + err1 + extra);
        let ab = psnr(&a, &b).unwrap();
        let ba = psnr(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!(psnr(&a, &c).unwrap() < ab);
    }
}
