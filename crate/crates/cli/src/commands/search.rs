//! `search`: projected-gradient descent toward a diagonal target.

use std::fs;

use latcomm_core::search::{projected_gradient_search, SearchConfig};
use latcomm_core::Scalar;

use crate::output::{io_err, CliError, Verdict};
use crate::{Ctx, SearchArgs};

pub fn run(ctx: &Ctx, args: &SearchArgs) -> Result<Verdict, CliError> {
    let cfg = SearchConfig {
        seq_dim: args.n,
        dyadic_depth: args.depth,
        copies: args.copies,
        max_iters: args.iters,
        step_size: args.step,
        backtrack: args.backtrack,
        seed: ctx.seed,
        restarts: args.restarts,
        stop_tol: args.stop_tol,
        target: args.target.to_core(),
    };
    let report = projected_gradient_search(&cfg)?;

    if let Some(path) = &args.history {
        let mut text = String::from("step,residual\n");
        for (i, r) in report.residual_history.iter().enumerate() {
            text.push_str(&format!("{i},{}\n", r.to_token()));
        }
        fs::write(path, text).map_err(|e| io_err(path, e))?;
    }

    ctx.emit(&report.to_doc(&cfg, &ctx.cfg))?;

    ctx.say(&format!(
        "search: {} restarts x {} iters on dim {}, best residual {:.6e} \
         (recorded as evidence, not interpreted)",
        cfg.restarts,
        cfg.max_iters,
        report.best_operator.domain().dim(),
        report.best_residual,
    ));
    if !ctx.quiet {
        for r in &report.restarts {
            println!(
                "  restart {} (seed {}): residual {:.6e} after {} accepted steps, stop: {:?}",
                r.restart, r.seed, r.best_residual, r.iterations, r.stop,
            );
        }
    }
    Ok(Verdict::Pass)
}
