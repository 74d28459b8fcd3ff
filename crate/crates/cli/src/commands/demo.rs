//! `demo`: one small instance of every headline construction and
//! campaign, summarized in a table keyed by statement tag.

use serde::Serialize;

use latcomm_core::constructions::{build_x, build_y};
use latcomm_core::report::Meta;
use latcomm_core::selfcomm::{
    build_block_shift, conjugate_by_switch, lemma_block_shift, partition_diagonal,
    sum_of_two_selfcommutators, CentralOperatorDescriptor,
};
use latcomm_core::verify::{
    run_idempotent_campaign, run_power_compact_campaign, run_power_inequality_campaign,
    run_trace_campaign, verify_certificate,
};
use latcomm_core::{derive_seed, DiagonalSpec, Mat};

use crate::output::{CliError, Verdict};
use crate::Ctx;

#[derive(Serialize)]
struct DemoStep {
    statement: String,
    step: String,
    measure: String,
    ok: bool,
}

#[derive(Serialize)]
struct DemoDoc {
    meta: Meta,
    steps: Vec<DemoStep>,
    all_passed: bool,
}

fn step(statement: &str, text: &str, measure: String, ok: bool) -> DemoStep {
    DemoStep {
        statement: statement.to_string(),
        step: text.to_string(),
        measure,
        ok,
    }
}

pub fn run(ctx: &Ctx) -> Result<Verdict, CliError> {
    let cfg = &ctx.cfg;
    let mut steps = Vec::new();

    let d = vec![1.0, 0.5, 0.25];
    let spec = DiagonalSpec::on_sequence(d.clone())?;
    let x = build_x(&spec, 3)?;
    let y = build_y(&spec, 3)?;
    let fact = x
        .adjoint()
        .compose(&x)?
        .entries()
        .sub(&Mat::diagonal(&d))
        .max_abs();
    let square = y.compose(&y)?.max_deviation(&x.compose(&x.adjoint())?);
    let worst = fact.max(square);
    steps.push(step(
        "Prop 3.1",
        "factor diag(1, 1/2, 1/4) through a depth-3 step space",
        format!("max residual {worst:.1e}"),
        worst <= cfg.eq_tol,
    ));

    let geo: Vec<f64> = (0..10).map(|k| 0.5f64.powi(k)).collect();
    let cert = build_block_shift(&partition_diagonal(&geo, 4)?, cfg)?;
    let ok = verify_certificate(&cert, cfg).all_passed;
    steps.push(step(
        "Thm 4.1",
        "block-shift certificate for d = 2^-n, K = 4",
        format!(
            "residual {:.1e}, ||A|| <= {:.3}",
            cert.residual_verified(),
            cert.norm_witness().operator_bound,
        ),
        ok,
    ));

    let lemma = lemma_block_shift(&DiagonalSpec::on_sequence(vec![1.0, 0.5])?, 4, cfg)?;
    let switched = conjugate_by_switch(&lemma, cfg)?;
    let ok = verify_certificate(&lemma, cfg).all_passed
        && verify_certificate(&switched, cfg).all_passed;
    steps.push(step(
        "Lemma 4.3",
        "diag(T) on 4 copies, then switched onto the far half",
        format!(
            "residuals {:.1e} / {:.1e}",
            lemma.residual_verified(),
            switched.residual_verified(),
        ),
        ok,
    ));

    let desc = CentralOperatorDescriptor::two_blocks(
        DiagonalSpec::on_sequence(vec![1.0])?,
        DiagonalSpec::on_dyadic(vec![0.5])?,
    )?;
    let sum = sum_of_two_selfcommutators(&desc, 3, cfg)?;
    let ok = verify_certificate(sum.first(), cfg).all_passed
        && verify_certificate(sum.second(), cfg).all_passed
        && sum.sum_residual() <= cfg.eq_tol;
    steps.push(step(
        "Thm 5.2",
        "sequence + dyadic block as a sum of two commutators",
        format!("sum residual {:.1e}", sum.sum_residual()),
        ok,
    ));

    let campaigns = [
        (
            run_idempotent_campaign(4, 400, derive_seed(ctx.seed, 1), cfg)?,
            "positive idempotents with tame commutators are projections",
        ),
        (
            run_power_compact_campaign(4, 400, derive_seed(ctx.seed, 2), cfg)?,
            "nonneg self-commutator of a nonneg operator vanishes",
        ),
        (
            run_power_inequality_campaign(4, 300, 4, derive_seed(ctx.seed, 3), cfg)?,
            "entrywise commutator bound survives taking powers",
        ),
        (
            run_trace_campaign(4, 400, derive_seed(ctx.seed, 4), cfg)?,
            "positive trace rules out plain self-commutators",
        ),
    ];
    for (report, text) in campaigns {
        steps.push(step(
            &report.meta.statement,
            text,
            format!(
                "{}/{} applicable, {} counterexamples",
                report.applicable,
                report.trials,
                report.counterexamples.len(),
            ),
            report.survived,
        ));
    }

    let all_passed = steps.iter().all(|s| s.ok);
    if !ctx.quiet {
        println!(
            "{:<11} {:<58} {:<36} status",
            "statement", "step", "measure"
        );
        for s in &steps {
            println!(
                "{:<11} {:<58} {:<36} {}",
                s.statement,
                s.step,
                s.measure,
                if s.ok { "ok" } else { "FAILED" },
            );
        }
        println!(
            "demo: {}/{} steps passed",
            steps.iter().filter(|s| s.ok).count(),
            steps.len(),
        );
    }

    let doc = DemoDoc {
        meta: Meta::new("demo", ctx.seed, cfg),
        steps,
        all_passed,
    };
    ctx.emit(&doc)?;

    Ok(Verdict::all([all_passed]))
}
