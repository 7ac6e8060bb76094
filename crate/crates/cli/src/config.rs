//! JSON config overlay. The file's keys become command-line flags inserted
//! right after the subcommand, for every flag the user did not pass.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgAction, CommandFactory};
use serde_json::{Map, Value};

use crate::cli::Cli;
use crate::error::{CliError, Result};

/// Removes `--config FILE` from `argv` and returns the path, if present.
fn take_config(argv: &mut Vec<OsString>) -> Result<Option<PathBuf>> {
    let mut found = None;
    let mut i = 1;
    while i < argv.len() {
        let token = argv[i].to_string_lossy().into_owned();
        if token == "--" {
            break;
        }
        if token == "--config" {
            if i + 1 >= argv.len() {
                return Err(CliError::Usage("--config needs a file".into()));
            }
            found = Some(PathBuf::from(argv.remove(i + 1)));
            argv.remove(i);
        } else if let Some(path) = token.strip_prefix("--config=") {
            found = Some(PathBuf::from(path));
            argv.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(found)
}

fn normalize(key: &str) -> String {
    key.replace('_', "-")
}

fn scalar(key: &str, v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(CliError::Usage(format!(
            "config key {key:?}: expected a scalar, found {v}"
        ))),
    }
}

fn render(arg: &clap::Arg, long: &str, value: &Value) -> Result<Vec<String>> {
    let flag = format!("--{long}");
    if matches!(arg.get_action(), ArgAction::SetTrue) {
        return match value {
            Value::Bool(true) => Ok(vec![flag]),
            Value::Bool(false) | Value::Null => Ok(Vec::new()),
            other => Err(CliError::Usage(format!(
                "config key {long:?}: expected a boolean, found {other}"
            ))),
        };
    }
    match value {
        Value::Null => Ok(Vec::new()),
        Value::Array(items) => {
            let items = items.iter().map(|v| scalar(long, v)).collect::<Result<Vec<_>>>()?;
            if items.is_empty() {
                Ok(Vec::new())
            } else if let Some(d) = arg.get_value_delimiter() {
                Ok(vec![format!("{flag}={}", items.join(&d.to_string()))])
            } else {
                Ok(items.into_iter().map(|v| format!("{flag}={v}")).collect())
            }
        }
        v => Ok(vec![format!("{flag}={}", scalar(long, v)?)]),
    }
}

/// Applies the config overlay named by `--config`, if any.
pub fn expand(mut argv: Vec<OsString>) -> Result<(Vec<OsString>, Option<PathBuf>)> {
    let Some(path) = take_config(&mut argv)? else {
        return Ok((argv, None));
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let root: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
    let Value::Object(root) = root else {
        return Err(CliError::Usage(format!(
            "config {} must be a JSON object",
            path.display()
        )));
    };

    let mut command = Cli::command();
    command.build();
    let mut leaf = &command;
    let mut names = Vec::new();
    let mut insert_at = 1;
    for (i, token) in argv.iter().enumerate().skip(1) {
        let token = token.to_string_lossy();
        if token.starts_with('-') {
            continue;
        }
        match leaf.find_subcommand(token.as_ref()) {
            Some(sub) => {
                leaf = sub;
                names.push(sub.get_name().to_string());
                insert_at = i + 1;
                if !leaf.has_subcommands() {
                    break;
                }
            }
            None => break,
        }
    }
    if names.is_empty() || leaf.has_subcommands() {
        return Ok((argv, Some(path)));
    }

    // Shared keys first, then keys scoped to the subcommand path, which win.
    let mut entries: Vec<(String, Value, bool)> = root
        .iter()
        .filter(|(_, v)| !v.is_object())
        .map(|(k, v)| (normalize(k), v.clone(), false))
        .collect();
    let mut scope: Option<&Map<String, Value>> = Some(&root);
    for name in &names {
        scope = scope.and_then(|m| m.get(name)).and_then(Value::as_object);
    }
    if let Some(scoped) = scope.filter(|_| !names.is_empty()) {
        for (k, v) in scoped {
            let k = normalize(k);
            entries.retain(|(e, _, _)| *e != k);
            entries.push((k, v.clone(), true));
        }
    }

    let given = |long: &str| {
        argv[insert_at..].iter().any(|t| {
            let t = t.to_string_lossy();
            t == format!("--{long}") || t.starts_with(&format!("--{long}="))
        })
    };
    let mut injected = Vec::new();
    for (key, value, scoped) in entries {
        if key == "config" {
            continue;
        }
        let Some(arg) = leaf.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            if scoped {
                return Err(CliError::Usage(format!(
                    "config key {key:?} is not a flag of `ndv {}`",
                    names.join(" ")
                )));
            }
            continue;
        };
        if !given(&key) {
            injected.extend(render(arg, &key, &value)?.into_iter().map(OsString::from));
        }
    }
    argv.splice(insert_at..insert_at, injected);
    Ok((argv, Some(path)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn run(config: &str, args: &[&str]) -> Result<Vec<String>> {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(config.as_bytes()).unwrap();
        let mut argv: Vec<OsString> = vec!["ndv".into()];
        argv.extend(args.iter().map(OsString::from));
        argv.push("--config".into());
        argv.push(file.path().into());
        let (out, path) = expand(argv)?;
        assert_eq!(path.as_deref(), Some(file.path()));
        Ok(out.into_iter().map(|s| s.into_string().unwrap()).collect())
    }

    #[test]
    fn flags_win_over_file() {
        let out = run(
            r#"{"seed": 4, "train": {"epochs": 9, "layer_norm": true}}"#,
            &["train", "--epochs", "3"],
        )
        .unwrap();
        assert_eq!(out, ["ndv", "train", "--seed=4", "--layer-norm", "--epochs", "3"]);
    }

    #[test]
    fn scoped_keys_override_shared_ones() {
        let out = run(r#"{"seed": 4, "layout": {"seed": 5}}"#, &["layout"]).unwrap();
        assert_eq!(out, ["ndv", "layout", "--seed=5"]);
    }

    #[test]
    fn arrays_respect_delimiters() {
        let out = run(
            r#"{"estimate": {"methods": ["goodman", "chao"], "checkpoint": ["a=x.json", "b=y.json"]}}"#,
            &["estimate"],
        )
        .unwrap();
        assert_eq!(
            out,
            [
                "ndv",
                "estimate",
                "--checkpoint=a=x.json",
                "--checkpoint=b=y.json",
                "--methods=goodman,chao"
            ]
        );
    }

    #[test]
    fn nested_subcommands() {
        let out = run(r#"{"embed": {"generate": {"dim": 8}}}"#, &["embed", "generate"]).unwrap();
        assert_eq!(out, ["ndv", "embed", "generate", "--dim=8"]);
    }

    #[test]
    fn unknown_scoped_key_is_a_usage_error() {
        let err = run(r#"{"layout": {"epochs": 3}}"#, &["layout"]).unwrap_err();
        assert!(matches!(err, CliError::Usage(_)), "{err}");
        // Shared keys that do not apply are skipped.
        assert_eq!(run(r#"{"epochs": 3}"#, &["layout"]).unwrap(), ["ndv", "layout"]);
    }

    #[test]
    fn non_object_config_is_rejected() {
        assert!(matches!(run("[1]", &["layout"]), Err(CliError::Usage(_))));
    }
}
