//! `construct x|y|isometry|averaging`.

use std::fs;
use std::path::Path;

use serde::Serialize;

use latcomm_core::constructions::{
    averaging_report, build_x, build_y, dyadic_averaging, positive_isometry, AveragingReport,
};
use latcomm_core::report::{operator_to_csv_doc, operator_to_doc, Meta, OperatorDoc};
use latcomm_core::{DiagonalSpec, LatticeOperator, Mat, Rat, Scalar};

use crate::input::load_values;
use crate::output::{CliError, Verdict};
use crate::Ctx;

#[derive(Serialize)]
pub struct ConstructDoc {
    pub meta: Meta,
    pub operation: String,
    pub operator: OperatorDoc,
    pub entrywise_nonnegative: bool,
    /// `||X*X - diag(d)||` (max entry deviation).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factorization_residual: Option<f64>,
    /// `||Y^2 - XX*||`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub square_residual: Option<f64>,
    /// `||U*U - I||`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isometry_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub averaging: Option<AveragingReport>,
}

fn operator_doc<S: Scalar>(
    op: &LatticeOperator<S>,
    dump: Option<&Path>,
    name: &str,
) -> Result<OperatorDoc, CliError> {
    match dump {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| crate::output::io_err(dir, e))?;
            Ok(operator_to_csv_doc(op, dir, name)?)
        }
        None => Ok(operator_to_doc(op)),
    }
}

pub fn x(
    ctx: &Ctx,
    d: &str,
    depth: Option<usize>,
    dump: Option<&Path>,
) -> Result<Verdict, CliError> {
    if ctx.exact {
        x_in::<Rat>(ctx, d, depth, dump)
    } else {
        x_in::<f64>(ctx, d, depth, dump)
    }
}

fn x_in<S: Scalar>(
    ctx: &Ctx,
    d: &str,
    depth: Option<usize>,
    dump: Option<&Path>,
) -> Result<Verdict, CliError> {
    let values: Vec<S> = load_values(d)?;
    let depth = depth.unwrap_or(values.len());
    let spec = DiagonalSpec::on_sequence(values.clone())?;
    let x = build_x(&spec, depth)?;

    let residual = x
        .adjoint()
        .compose(&x)?
        .entries()
        .sub(&Mat::diagonal(&values))
        .max_abs()
        .to_f64();
    let positive = x.is_positive(&ctx.cfg).positive;

    let doc = ConstructDoc {
        meta: Meta::new("Prop 3.1", ctx.seed, &ctx.cfg),
        operation: "x".into(),
        operator: operator_doc(&x, dump, "X.csv")?,
        entrywise_nonnegative: positive,
        factorization_residual: Some(residual),
        square_residual: None,
        isometry_residual: None,
        averaging: None,
    };
    ctx.emit(&doc)?;

    let ok = residual <= ctx.cfg.eq_tol && positive;
    ctx.say(&format!(
        "construct x: {} entries -> dyadic depth {depth}, factorization residual {residual:.3e} \
         (tol {:.1e}), nonnegative entries: {positive}: {}",
        values.len(),
        ctx.cfg.eq_tol,
        if ok { "ok" } else { "FAILED" },
    ));
    Ok(Verdict::all([ok]))
}

pub fn y(
    ctx: &Ctx,
    d: &str,
    depth: Option<usize>,
    dump: Option<&Path>,
) -> Result<Verdict, CliError> {
    if ctx.exact {
        y_in::<Rat>(ctx, d, depth, dump)
    } else {
        y_in::<f64>(ctx, d, depth, dump)
    }
}

fn y_in<S: Scalar>(
    ctx: &Ctx,
    d: &str,
    depth: Option<usize>,
    dump: Option<&Path>,
) -> Result<Verdict, CliError> {
    let values: Vec<S> = load_values(d)?;
    let depth = depth.unwrap_or(values.len());
    let spec = DiagonalSpec::on_sequence(values.clone())?;
    let y = build_y(&spec, depth)?;
    let x = build_x(&spec, depth)?;

    let square_residual = y.compose(&y)?.max_deviation(&x.compose(&x.adjoint())?);
    let positive = y.is_positive(&ctx.cfg).positive;

    let doc = ConstructDoc {
        meta: Meta::new("Prop 3.1", ctx.seed, &ctx.cfg),
        operation: "y".into(),
        operator: operator_doc(&y, dump, "Y.csv")?,
        entrywise_nonnegative: positive,
        factorization_residual: None,
        square_residual: Some(square_residual),
        isometry_residual: None,
        averaging: None,
    };
    ctx.emit(&doc)?;

    let ok = square_residual <= ctx.cfg.eq_tol && positive;
    ctx.say(&format!(
        "construct y: depth {depth}, ||Y^2 - XX*|| = {square_residual:.3e} (tol {:.1e}): {}",
        ctx.cfg.eq_tol,
        if ok { "ok" } else { "FAILED" },
    ));
    Ok(Verdict::all([ok]))
}

pub fn isometry(
    ctx: &Ctx,
    n: usize,
    depth: Option<usize>,
    dump: Option<&Path>,
) -> Result<Verdict, CliError> {
    let depth = depth.unwrap_or(n);
    if ctx.exact {
        // Upholds the contract instead of silently downgrading: the
        // roots sqrt(2^(k+1)) are irrational for even k.
        return Err(CliError::Usage(
            "the isometry has no exact rational form; rerun without --exact".into(),
        ));
    }
    let u = positive_isometry(n, depth)?;
    let residual = u
        .adjoint()
        .compose(&u)?
        .entries()
        .sub(&Mat::identity(n))
        .max_abs();
    let positive = u.is_positive(&ctx.cfg).positive;

    let doc = ConstructDoc {
        meta: Meta::new("Cor 3.3", ctx.seed, &ctx.cfg),
        operation: "isometry".into(),
        operator: operator_doc(&u, dump, "U.csv")?,
        entrywise_nonnegative: positive,
        factorization_residual: None,
        square_residual: None,
        isometry_residual: Some(residual),
        averaging: None,
    };
    ctx.emit(&doc)?;

    let ok = residual <= ctx.cfg.eq_tol && positive;
    ctx.say(&format!(
        "construct isometry: dim {n} -> depth {depth}, ||U*U - I|| = {residual:.3e}: {}",
        if ok { "ok" } else { "FAILED" },
    ));
    Ok(Verdict::all([ok]))
}

pub fn averaging(ctx: &Ctx, d: &str, dump: Option<&Path>) -> Result<Verdict, CliError> {
    let f: Vec<Rat> = load_values(d)?;
    let report = averaging_report(&f)?;
    let v = dyadic_averaging(f.len())?;

    let nonneg_input = f.iter().all(|c| c >= &Rat::from_f64(0.0));
    let ok = report.contraction && (!nonneg_input || report.equality);

    let doc = ConstructDoc {
        meta: Meta::new("Example 3.5", ctx.seed, &ctx.cfg),
        operation: "averaging".into(),
        operator: operator_doc(&v, dump, "V.csv")?,
        entrywise_nonnegative: true,
        factorization_residual: None,
        square_residual: None,
        isometry_residual: None,
        averaging: Some(report.clone()),
    };
    ctx.emit(&doc)?;

    ctx.say(&format!(
        "construct averaging: {} coordinates, ||Vf||_1 = {} vs ||f||_1 = {}, contraction: {}, \
         equality: {}: {}",
        f.len(),
        report.output_l1,
        report.input_l1,
        report.contraction,
        report.equality,
        if ok { "ok" } else { "FAILED" },
    ));
    Ok(Verdict::all([ok]))
}
