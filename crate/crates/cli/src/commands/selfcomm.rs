//! `selfcomm partition|construct|mixed|sum`.

use std::fs;
use std::path::Path;

use serde::Serialize;

use latcomm_core::report::Meta;
use latcomm_core::selfcomm::{
    build_block_shift, mixed_identity_block, partition_diagonal, sum_of_two_selfcommutators,
    CentralOperatorDescriptor, SelfCommutatorCertificate,
};
use latcomm_core::verify::verify_certificate;
use latcomm_core::{DiagonalSpec, Rat, Scalar};

use crate::input::load_values;
use crate::output::{CliError, Verdict};
use crate::{BlockKind, Ctx};

#[derive(Serialize)]
pub struct PartitionDoc {
    pub meta: Meta,
    pub k: usize,
    pub row_len: usize,
    pub rows: Vec<Vec<String>>,
    /// Original index -> (row, position).
    pub assignment: Vec<(usize, usize)>,
    pub max_value: String,
}

pub fn partition(ctx: &Ctx, d: &str, k: usize) -> Result<Verdict, CliError> {
    if ctx.exact {
        partition_in::<Rat>(ctx, d, k)
    } else {
        partition_in::<f64>(ctx, d, k)
    }
}

fn partition_in<S: Scalar>(ctx: &Ctx, d: &str, k: usize) -> Result<Verdict, CliError> {
    let values: Vec<S> = load_values(d)?;
    let p = partition_diagonal(&values, k)?;

    let doc = PartitionDoc {
        meta: Meta::new("Thm 4.1", ctx.seed, &ctx.cfg),
        k: p.row_count(),
        row_len: p.row_len(),
        rows: p
            .rows()
            .iter()
            .map(|row| row.iter().map(Scalar::to_token).collect())
            .collect(),
        assignment: p.assignment().to_vec(),
        max_value: p.max_value().to_token(),
    };
    ctx.emit(&doc)?;

    ctx.say(&format!(
        "partition: {} values into {} rows of length {}, max value {}",
        values.len(),
        p.row_count(),
        p.row_len(),
        p.max_value(),
    ));
    if !ctx.quiet {
        for (n, row) in p.rows().iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            println!("  row {n}: {}", cells.join(", "));
        }
    }
    Ok(Verdict::Pass)
}

pub fn construct(
    ctx: &Ctx,
    d: &str,
    k: usize,
    dump: Option<&Path>,
) -> Result<Verdict, CliError> {
    if ctx.exact {
        construct_in::<Rat>(ctx, d, k, dump)
    } else {
        construct_in::<f64>(ctx, d, k, dump)
    }
}

fn construct_in<S: Scalar>(
    ctx: &Ctx,
    d: &str,
    k: usize,
    dump: Option<&Path>,
) -> Result<Verdict, CliError> {
    let values: Vec<S> = load_values(d)?;
    let p = partition_diagonal(&values, k)?;
    let cert = build_block_shift(&p, &ctx.cfg)?;
    finish_certificate(ctx, &cert, "selfcomm construct", dump)
}

pub fn mixed(
    ctx: &Ctx,
    d: &str,
    depth: Option<usize>,
    copies: usize,
    dump: Option<&Path>,
) -> Result<Verdict, CliError> {
    if ctx.exact {
        mixed_in::<Rat>(ctx, d, depth, copies, dump)
    } else {
        mixed_in::<f64>(ctx, d, depth, copies, dump)
    }
}

fn mixed_in<S: Scalar>(
    ctx: &Ctx,
    d: &str,
    depth: Option<usize>,
    copies: usize,
    dump: Option<&Path>,
) -> Result<Verdict, CliError> {
    let values: Vec<S> = load_values(d)?;
    let depth = depth.unwrap_or(values.len());
    let spec = DiagonalSpec::on_sequence(values)?;
    let cert = mixed_identity_block(&spec, depth, copies, &ctx.cfg)?;
    finish_certificate(ctx, &cert, "selfcomm mixed", dump)
}

pub fn sum(
    ctx: &Ctx,
    d: &str,
    d2: &str,
    first: BlockKind,
    second: BlockKind,
    copies: usize,
    dump: Option<&Path>,
) -> Result<Verdict, CliError> {
    if ctx.exact {
        sum_in::<Rat>(ctx, d, d2, first, second, copies, dump)
    } else {
        sum_in::<f64>(ctx, d, d2, first, second, copies, dump)
    }
}

fn block_spec<S: Scalar>(values: Vec<S>, kind: BlockKind) -> latcomm_core::Result<DiagonalSpec<S>> {
    match kind {
        BlockKind::Sequence => DiagonalSpec::on_sequence(values),
        BlockKind::Dyadic => DiagonalSpec::on_dyadic(values),
    }
}

fn sum_in<S: Scalar>(
    ctx: &Ctx,
    d: &str,
    d2: &str,
    first: BlockKind,
    second: BlockKind,
    copies: usize,
    dump: Option<&Path>,
) -> Result<Verdict, CliError> {
    let desc = CentralOperatorDescriptor::two_blocks(
        block_spec(load_values::<S>(d)?, first)?,
        block_spec(load_values::<S>(d2)?, second)?,
    )?;
    let sum = sum_of_two_selfcommutators(&desc, copies, &ctx.cfg)?;

    let doc = match dump {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| crate::output::io_err(dir, e))?;
            sum.to_doc_with_csv(ctx.seed, &ctx.cfg, dir)?
        }
        None => sum.to_doc(ctx.seed, &ctx.cfg),
    };
    ctx.emit(&doc)?;

    let first_report = verify_certificate(sum.first(), &ctx.cfg);
    let second_report = verify_certificate(sum.second(), &ctx.cfg);
    let residual_ok = sum.sum_residual() <= ctx.cfg.eq_tol;
    let ok = first_report.all_passed && second_report.all_passed && residual_ok;

    ctx.say(&format!(
        "selfcomm sum: dim {} on a space of dim {}, sum residual {:.3e} (tol {:.1e}), \
         certificates verified: {} and {}: {}",
        desc.dim(),
        sum.combined_target().domain().dim(),
        sum.sum_residual(),
        ctx.cfg.eq_tol,
        first_report.all_passed,
        second_report.all_passed,
        if ok { "ok" } else { "FAILED" },
    ));
    Ok(Verdict::all([ok]))
}

fn finish_certificate<S: Scalar>(
    ctx: &Ctx,
    cert: &SelfCommutatorCertificate<S>,
    label: &str,
    dump: Option<&Path>,
) -> Result<Verdict, CliError> {
    let report = verify_certificate(cert, &ctx.cfg);
    let doc = match dump {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| crate::output::io_err(dir, e))?;
            cert.to_doc_with_csv(ctx.seed, &ctx.cfg, dir)?
        }
        None => cert.to_doc(ctx.seed, &ctx.cfg),
    };
    ctx.emit(&doc)?;

    ctx.say(&format!(
        "{label}: dim {}, verified region {} coords, residual {:.3e}, edge norm {:.4} \
         (bound {:.4}), checks: {}",
        cert.operator().domain().dim(),
        cert.verified_region().len(),
        cert.residual_verified(),
        cert.edge_norm(),
        cert.edge_bound(),
        if report.all_passed { "all passed" } else { "FAILED" },
    ));
    if !report.all_passed && !ctx.quiet {
        for c in report.checks.iter().filter(|c| !c.passed) {
            println!("  failed: {} (measured {:.6e}, allowed {:.6e})", c.name, c.measured, c.allowed);
        }
    }
    Ok(Verdict::all([report.all_passed]))
}
