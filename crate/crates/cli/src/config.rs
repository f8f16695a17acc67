//! `key = value` experiment files.
//!
//! Every command-line flag can be given in a file passed with
//! `--config PATH`: the key is the flag name without the leading dashes,
//! `#` starts a comment, and switches take `true` or `false`. Flags on the
//! command line win over the file.

use std::path::Path;

use crate::error::{CliError, Result};

/// Parsed `(key, value)` pairs in file order.
pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected key = value, got {raw:?}",
                n + 1
            )));
        };
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!("config line {}: bad key {key:?}", n + 1)));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Result<Option<String>> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it
                .next()
                .cloned()
                .map(Some)
                .ok_or_else(|| CliError::Usage("--config needs a path".into()));
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Ok(Some(p.to_string()));
        }
    }
    Ok(None)
}

fn given(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    let with_value = format!("--{key}=");
    args.iter().any(|a| *a == flag || a.starts_with(&with_value))
}

/// Appends the settings of the `--config` file (if any) that are not
/// already on the command line.
pub fn expand_args(args: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&args)? else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(Path::new(&path), e))?;
    let mut out = args.clone();
    for (key, value) in parse(&text)? {
        if given(&args, &key) {
            continue;
        }
        match value.as_str() {
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

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_comments_and_blank_lines() {
        let kv = parse("# run\n a = 1.5 \n\nmasses=1,2,3 # inline\nwith-dynamics = true\n").unwrap();
        assert_eq!(
            kv,
            vec![
                ("a".into(), "1.5".into()),
                ("masses".into(), "1,2,3".into()),
                ("with-dynamics".into(), "true".into())
            ]
        );
    }

    #[test]
    fn rejects_lines_without_equals() {
        assert!(matches!(parse("a 1"), Err(CliError::Usage(_))));
    }

    #[test]
    fn detects_given_flags() {
        let args = strings(&["releq", "sweep", "--a=1", "--resolution", "50"]);
        assert!(given(&args, "a"));
        assert!(given(&args, "resolution"));
        assert!(!given(&args, "b"));
    }

    #[test]
    fn without_config_args_pass_through() {
        let args = strings(&["releq", "classify", "--a", "1"]);
        assert_eq!(expand_args(args.clone()).unwrap(), args);
    }
}
