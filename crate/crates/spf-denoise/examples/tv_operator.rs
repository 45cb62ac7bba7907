//! The matrix-free 2-D gradient operator: forward differences, the adjoint
//! identity <Bx, y> = <x, B^T y>, and the power-iteration estimate of
//! ||B||^2 against its closed form.

use spf_denoise::linop::{GradOperator2d, LinearOperator};

fn main() {
    // A 4x4 image with one bright square, column-major.
    let n = 4;
    let mut img = vec![0.0; n * n];
    for c in 1..3 {
        for r in 1..3 {
            img[c * n + r] = 10.0;
        }
    }
    let b = GradOperator2d::new(n);
    let grad = b.apply(&img).unwrap();
    let (vert, horiz) = grad.split_at(n * n);
    println!("vertical differences (per column):");
    for c in 0..n {
        println!("  {:?}", &vert[c * n..(c + 1) * n]);
    }
    println!("horizontal differences (per column):");
    for c in 0..n {
        println!("  {:?}", &horiz[c * n..(c + 1) * n]);
    }

    // Adjoint identity on arbitrary vectors.
    let x: Vec<f64> = (0..n * n).map(|i| (i as f64 * 0.7).sin()).collect();
    let y: Vec<f64> = (0..2 * n * n).map(|i| (i as f64 * 1.3).cos()).collect();
    let bx = b.apply(&x).unwrap();
    let bty = b.apply_adjoint(&y).unwrap();
    let lhs: f64 = bx.iter().zip(&y).map(|(a, b)| a * b).sum();
    let rhs: f64 = x.iter().zip(&bty).map(|(a, b)| a * b).sum();
    println!("\n<Bx, y>   = {lhs:.12}");
    println!("<x, B^T y> = {rhs:.12}");

    for side in [4usize, 16, 64, 256] {
        let op = GradOperator2d::new(side);
        let est = op.op_norm_sq(1e-8).unwrap();
        println!(
            "N = {side:>3}: ||B||^2 power-iteration {est:.6}, closed form {:.6}",
            op.norm_sq_closed_form()
        );
    }
}
