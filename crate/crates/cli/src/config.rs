//! `--config FILE`: `key = value` lines turned into `--key value` flags and
//! placed right after the verb, so flags given on the command line (which
//! come later) override them.

use std::ffi::OsString;
use std::fs;

use anyhow::{bail, Context, Result};

pub fn expand_args(mut args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut k = 1;
    while k < args.len() {
        let a = args[k].to_string_lossy().into_owned();
        if a == "--config" {
            if k + 1 >= args.len() {
                bail!("--config needs a file");
            }
            path = Some(args.remove(k + 1));
            args.remove(k);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(OsString::from(p));
            args.remove(k);
        } else {
            k += 1;
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {}", path.to_string_lossy()))?;
    let flags = parse(&text)?;
    let verb = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|p| p + 1);
    let Some(verb) = verb else { bail!("--config given without a verb") };
    let tail = args.split_off(verb + 1);
    args.extend(flags);
    args.extend(tail);
    Ok(args)
}

fn parse(text: &str) -> Result<Vec<OsString>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected `key = value`", n + 1);
        };
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        if key.is_empty() {
            bail!("config line {}: empty key", n + 1);
        }
        match value {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            v => {
                out.push(format!("--{key}").into());
                out.push(v.into());
            }
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
    fn flags_follow_the_verb() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.conf");
        fs::write(&p, "seed = 7\n# comment\nno_timing = true\njobs=2\nverbose = false\n").unwrap();
        let args = os(&["obddlab", "--config", p.to_str().unwrap(), "bench-growth", "--seed", "9"]);
        let out = expand_args(args).unwrap();
        assert_eq!(out, os(&["obddlab", "bench-growth", "--seed", "7", "--no-timing", "--jobs", "2", "--seed", "9"]));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("seed 7").is_err());
        assert!(parse("= 7").is_err());
        assert!(expand_args(os(&["obddlab", "--config"])).is_err());
    }
}
