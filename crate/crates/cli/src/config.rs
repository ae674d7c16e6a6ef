//! Config files: TOML keys named after long flags, merged into argv before
//! parsing. Top-level keys apply wherever the chosen subcommand accepts
//! them; tables named after a subcommand path (`[fit]`, `[clt.poisson]`)
//! apply to that subcommand only. Flags given on the command line win.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::{Arg, ArgAction, Command};

/// The value of `--config` in raw argv, if any.
fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter().skip(1);
    while let Some(tok) = it.next() {
        let s = tok.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

fn takes_value(arg: &Arg) -> bool {
    arg.get_action().takes_values()
}

fn find_long<'a>(cmd: &'a Command, long: &str) -> Option<&'a Arg> {
    cmd.get_arguments().find(|a| a.get_long() == Some(long))
}

/// Subcommand chain named in argv, e.g. `["clt", "poisson"]`.
fn subcommand_path(root: &Command, argv: &[OsString]) -> Vec<String> {
    let mut path = Vec::new();
    let mut cmd = root;
    let mut it = argv.iter().skip(1);
    while let Some(tok) = it.next() {
        let s = tok.to_string_lossy();
        if s == "--" {
            break;
        }
        if let Some(long) = s.strip_prefix("--") {
            if !long.contains('=') && find_long(cmd, long).is_some_and(takes_value) {
                it.next();
            }
            continue;
        }
        if s.starts_with('-') {
            continue;
        }
        match cmd.find_subcommand(s.as_ref()) {
            Some(sub) => {
                path.push(sub.get_name().to_string());
                cmd = sub;
            }
            None => break,
        }
    }
    path
}

fn given_on_command_line(argv: &[OsString], long: &str) -> bool {
    let flag = format!("--{long}");
    let with_value = format!("--{long}=");
    argv.iter().any(|t| {
        let s = t.to_string_lossy();
        s == flag || s.starts_with(&with_value)
    })
}

fn scalar(value: &toml::Value, key: &str) -> Result<String> {
    Ok(match value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        other => bail!("config key {key:?}: unsupported value {other}"),
    })
}

/// Flag tokens for one config entry.
fn tokens_for(arg: &Arg, long: &str, value: &toml::Value) -> Result<Vec<OsString>> {
    if !takes_value(arg) {
        return match value {
            toml::Value::Boolean(true) => Ok(vec![format!("--{long}").into()]),
            toml::Value::Boolean(false) => Ok(Vec::new()),
            other => bail!("config key {long:?} is a switch; expected true or false, got {other}"),
        };
    }
    let values: Vec<String> = match value {
        toml::Value::Array(items) => items.iter().map(|v| scalar(v, long)).collect::<Result<_>>()?,
        v => vec![scalar(v, long)?],
    };
    if matches!(arg.get_action(), ArgAction::Append) {
        Ok(values.into_iter().map(|v| format!("--{long}={v}").into()).collect())
    } else {
        Ok(vec![format!("--{long}={}", values.join(",")).into()])
    }
}

/// `argv` with defaults from the `--config` file appended.
pub fn merge_config(mut root: Command, argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let table: toml::Table = text
        .parse()
        .with_context(|| format!("parsing config {}", path.display()))?;

    root.build();
    let sub_path = subcommand_path(&root, &argv);
    let mut target = &root;
    for name in &sub_path {
        target = target.find_subcommand(name).expect("resolved above");
    }

    // (key, value, strict)
    let mut entries: Vec<(String, toml::Value, bool)> = Vec::new();
    for (k, v) in &table {
        if !v.is_table() {
            entries.push((k.clone(), v.clone(), false));
        }
    }
    let mut scope = &table;
    for name in &sub_path {
        match scope.get(name).and_then(|v| v.as_table()) {
            Some(t) => {
                for (k, v) in t {
                    if !v.is_table() {
                        entries.retain(|(key, _, _)| key != k);
                        entries.push((k.clone(), v.clone(), true));
                    }
                }
                scope = t;
            }
            None => break,
        }
    }

    let mut extra = Vec::new();
    for (key, value, strict) in entries {
        let long = key.replace('_', "-");
        if long == "config" {
            continue;
        }
        let Some(arg) = find_long(target, &long) else {
            if strict {
                bail!("config key {key:?} is not a flag of `{}`", sub_path.join(" "));
            }
            continue;
        };
        if given_on_command_line(&argv, &long) {
            continue;
        }
        extra.extend(tokens_for(arg, &long, &value)?);
    }
    let mut out = argv;
    out.extend(extra);
    Ok(out)
}
