//! `falsify idempotent|powercompact|powerineq|trace`.

use latcomm_core::verify::{
    run_idempotent_campaign, run_power_compact_campaign, run_power_inequality_campaign,
    run_trace_campaign, FalsificationReport,
};

use crate::output::{CliError, Verdict};
use crate::Ctx;

#[derive(Clone, Copy)]
pub enum Kind {
    Idempotent,
    PowerCompact,
    PowerInequality,
    Trace,
}

pub fn run(
    ctx: &Ctx,
    kind: Kind,
    n: usize,
    trials: usize,
    n_max: usize,
) -> Result<Verdict, CliError> {
    let report: FalsificationReport = match kind {
        Kind::Idempotent => run_idempotent_campaign(n, trials, ctx.seed, &ctx.cfg)?,
        Kind::PowerCompact => run_power_compact_campaign(n, trials, ctx.seed, &ctx.cfg)?,
        Kind::PowerInequality => {
            run_power_inequality_campaign(n, trials, n_max, ctx.seed, &ctx.cfg)?
        }
        Kind::Trace => run_trace_campaign(n, trials, ctx.seed, &ctx.cfg)?,
    };

    ctx.emit(&report)?;

    ctx.say(&format!(
        "falsify {}: {} trials up to dim {} (seed {}), {} applicable, {} counterexamples: {}",
        report.campaign,
        report.trials,
        report.max_dim,
        ctx.seed,
        report.applicable,
        report.counterexamples.len(),
        if report.survived { "statement survived" } else { "FALSIFIED" },
    ));
    if !ctx.quiet {
        for c in report.counterexamples.iter().take(3) {
            println!(
                "  trial {} (seed {}): {} (deviation {:.3e})",
                c.trial, c.seed, c.violated, c.deviation,
            );
        }
    }
    Ok(Verdict::all([report.survived]))
}
