//! Value-list inputs: inline token lists or files of tokens.

use std::fs;
use std::path::Path;

use latcomm_core::Scalar;

use crate::output::CliError;

/// Parses `--d`-style input: either a comma/whitespace separated token
/// list ("1,0.5,1/4") or the path of a file containing one. Tokens are
/// scalar literals; fraction strings stay exact in rational mode.
pub fn load_values<S: Scalar>(input: &str) -> Result<Vec<S>, CliError> {
    let owned;
    let text = if Path::new(input).is_file() {
        owned = fs::read_to_string(input)
            .map_err(|e| crate::output::io_err(Path::new(input), e))?;
        owned.as_str()
    } else {
        input
    };
    let tokens: Vec<&str> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect();
    if tokens.is_empty() {
        return Err(CliError::Usage(format!("no values in {input:?}")));
    }
    tokens
        .into_iter()
        .map(|t| S::parse_token(t).map_err(CliError::Domain))
        .collect()
}
