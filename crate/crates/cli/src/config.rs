//! `--config` files: one `key=value` per line, `#` starts a comment. Keys are
//! long flag names without the dashes; `true`/`false` toggle switches.

use std::ffi::OsString;
use std::fs;

use crate::error::CliError;

/// Splices the settings of any `--config` file into `argv` directly after the
/// subcommand, so that flags given on the command line take precedence.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("cannot read config {path}: {e}")))?;
    let injected = parse(&text).map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
    let Some(sub) = argv.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')) else {
        return Ok(argv);
    };
    let at = sub + 2;
    let mut out = argv[..at].to_vec();
    out.extend(injected.into_iter().map(OsString::from));
    out.extend_from_slice(&argv[at..]);
    Ok(out)
}

fn config_path(argv: &[OsString]) -> Option<String> {
    let mut found = None;
    let mut it = argv.iter().map(|a| a.to_string_lossy());
    while let Some(arg) = it.next() {
        if arg == "--config" {
            found = it.next().map(|v| v.into_owned());
        } else if let Some(v) = arg.strip_prefix("--config=") {
            found = Some(v.to_owned());
        }
    }
    found
}

pub fn parse(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(format!("line {}: invalid key `{key}`", i + 1));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => out.push(format!("--{key}={value}")),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_lines() {
        let got = parse("# sweep\nalpha = 1\n\np=2 # index\nreproducible=true\nfoo=false\n").unwrap();
        assert_eq!(got, vec!["--alpha=1", "--p=2", "--reproducible"]);
        assert!(parse("alpha\n").is_err());
        assert!(parse("config=x\n").is_err());
    }

    #[test]
    fn injects_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        fs::write(&path, "alpha=3\np=1\n").unwrap();
        let p = path.to_string_lossy().into_owned();
        let got = expand(os(&["schatlab", "powers", "--config", &p, "--alpha", "1"])).unwrap();
        assert_eq!(got, os(&["schatlab", "powers", "--alpha=3", "--p=1", "--config", &p, "--alpha", "1"]));
    }

    #[test]
    fn missing_file_is_usage_error() {
        let err = expand(os(&["schatlab", "weyl", "--config=/nonexistent/x"])).unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
    }
}
