//! Tour of the scalar penalty: MCP values, the Moreau envelope it is built
//! from, and the three proximity-operator regimes (single-valued firm
//! shrinkage, the interval-valued boundary case, and the two-point case).

use spf_denoise::penalty::{env_abs, eval_mcp, prox_mcp, ProxResult};

fn main() {
    let alpha = 2.0;

    println!("phi_alpha = |x| - env_alpha |x|  with alpha = {alpha}");
    println!("{:>6} {:>10} {:>10} {:>10}", "x", "|x|", "env", "mcp");
    for x in [-3.0f64, -1.0, 0.0, 0.5, 1.0, 2.0, 4.0] {
        println!(
            "{x:>6} {:>10.4} {:>10.4} {:>10.4}",
            x.abs(),
            env_abs(x, alpha),
            eval_mcp(x, alpha)
        );
    }
    println!("plateau value alpha/2 = {}", alpha / 2.0);

    println!("\nprox_{{beta * mcp}}(x), three regimes:");
    for (beta, label) in [(1.0, "beta < alpha"), (2.0, "beta = alpha"), (8.0, "beta > alpha")] {
        println!("  {label} (beta = {beta}):");
        for x in [0.5, 1.5, 2.0, 4.0] {
            let r = prox_mcp(x, alpha, beta);
            let desc = match &r {
                ProxResult::Single(v) => format!("{{{v:.4}}}"),
                ProxResult::Pair(a, b) => format!("{{{a:.4}, {b:.4}}}"),
                ProxResult::Interval { lo, hi } => format!("[{lo:.4}, {hi:.4}]"),
            };
            println!(
                "    x = {x:>4}: {desc}  (sparsest selection: {:.4})",
                r.select_sparsest()
            );
        }
    }
}
