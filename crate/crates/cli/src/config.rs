//! Flat `key=value` config files, merged under command-line flags, and the
//! provenance header written at the top of every CSV.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Settings that change where output goes or how fast it is produced, but
/// never what it contains. They stay out of the header and the hash.
const NOT_ECHOED: &[&str] = &["config", "out", "svg", "curve", "parallel"];

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected key=value, got {line:?}",
                lineno + 1
            )));
        };
        let key = key.trim();
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!(
                "config line {}: bad key {key:?}",
                lineno + 1
            )));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// Splice the config file's entries in as flags right after the subcommand
/// name, skipping any key that is also given explicitly.
pub fn inject_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let pairs = read_config(Path::new(&path))?;
    let Some(sub) = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|i| i + 1)
    else {
        return Ok(args);
    };
    let explicit = |key: &str| {
        let flag = format!("--{key}");
        let prefixed = format!("--{key}=");
        args[sub + 1..].iter().any(|a| {
            let a = a.to_string_lossy();
            a == flag.as_str() || a.starts_with(&prefixed)
        })
    };
    let mut out: Vec<OsString> = args[..=sub].to_vec();
    for (key, value) in pairs {
        if explicit(&key) {
            continue;
        }
        out.push(format!("--{key}").into());
        out.push(value.into());
    }
    out.extend_from_slice(&args[sub + 1..]);
    Ok(out)
}

/// The resolved configuration of one run.
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    command: String,
    settings: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(command: &str) -> Self {
        Provenance {
            command: command.to_string(),
            settings: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        if NOT_ECHOED.contains(&key) {
            return;
        }
        let value = value.to_string();
        match self.settings.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.settings.push((key.to_string(), value)),
        }
    }

    fn canonical(&self) -> String {
        let mut sorted = self.settings.clone();
        sorted.sort();
        let mut text = format!("command={}\n", self.command);
        for (k, v) in sorted {
            text.push_str(&format!("{k}={v}\n"));
        }
        text
    }

    pub fn hash(&self) -> String {
        format!("{:x}", Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn header(&self) -> String {
        let mut text = String::new();
        for line in self.canonical().lines() {
            text.push_str("# ");
            text.push_str(line);
            text.push('\n');
        }
        text.push_str(&format!("# config-hash={}\n", self.hash()));
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let pairs = parse_config("# scan\nd = 8\n\neps=0.4\n").unwrap();
        assert_eq!(
            pairs,
            vec![("d".into(), "8".into()), ("eps".into(), "0.4".into())]
        );
        assert!(parse_config("d 8").is_err());
        assert!(parse_config("config=x").is_err());
    }

    #[test]
    fn hash_ignores_order_and_output_paths() {
        let mut a = Provenance::new("scan");
        a.set("d", 8);
        a.set("eps", 0.4);
        a.set("out", "a.csv");
        let mut b = Provenance::new("scan");
        b.set("eps", 0.4);
        b.set("parallel", 3);
        b.set("d", 8);
        assert_eq!(a.hash(), b.hash());
        b.set("d", 9);
        assert_ne!(a.hash(), b.hash());
        assert!(!a.header().contains("out="));
    }

    #[test]
    fn explicit_flags_beat_config() {
        let dir = std::env::temp_dir().join(format!("vacant-config-{}", std::process::id()));
        fs::write(&dir, "d=8\neps=0.2\n").unwrap();
        let args: Vec<OsString> = [
            "vacant",
            "scan",
            "--config",
            dir.to_str().unwrap(),
            "--d",
            "9",
        ]
        .iter()
        .map(OsString::from)
        .collect();
        let merged = inject_config(args).unwrap();
        let merged: Vec<String> = merged
            .iter()
            .map(|a| a.to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            merged,
            [
                "vacant",
                "scan",
                "--eps",
                "0.2",
                "--config",
                dir.to_str().unwrap(),
                "--d",
                "9"
            ]
        );
        fs::remove_file(dir).unwrap();
    }
}
