//! `verify --cert`: rebuild a certificate from disk and re-derive every
//! claim it makes.

use std::fs;
use std::path::Path;

use latcomm_core::selfcomm::{CertificateDoc, SelfCommutatorCertificate};
use latcomm_core::verify::verify_certificate;
use latcomm_core::Rat;

use crate::output::{io_err, CliError, Verdict};
use crate::Ctx;

pub fn run(ctx: &Ctx, cert_path: &Path) -> Result<Verdict, CliError> {
    let text = fs::read_to_string(cert_path).map_err(|e| io_err(cert_path, e))?;
    let doc: CertificateDoc = serde_json::from_str(&text).map_err(|e| CliError::Json {
        path: cert_path.display().to_string(),
        err: e.to_string(),
    })?;
    let base = cert_path.parent();

    // The document records which arithmetic produced it; re-checking
    // happens in the same mode.
    let report = if doc.operator.exact {
        let cert = SelfCommutatorCertificate::<Rat>::from_doc(&doc, base)?;
        verify_certificate(&cert, &ctx.cfg)
    } else {
        let cert = SelfCommutatorCertificate::<f64>::from_doc(&doc, base)?;
        verify_certificate(&cert, &ctx.cfg)
    };

    ctx.emit(&report)?;

    if !ctx.quiet {
        for c in &report.checks {
            println!(
                "[{}] {} (measured {:.6e}, allowed {:.6e})",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.measured,
                c.allowed,
            );
        }
    }
    ctx.say(&format!(
        "verify {}: statement {}, {} checks, {}",
        cert_path.display(),
        doc.meta.statement,
        report.checks.len(),
        if report.all_passed { "all passed" } else { "FAILED" },
    ));
    Ok(Verdict::all([report.all_passed]))
}
