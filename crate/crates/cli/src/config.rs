//! Effective run configuration: config-file section overridden by flags.

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::CliError;

fn to_table<T: Serialize>(v: &T) -> Result<Table, CliError> {
    match Value::try_from(v).map_err(|e| CliError::Usage(e.to_string()))? {
        Value::Table(t) => Ok(t),
        _ => Err(CliError::Usage("configuration must be a table".into())),
    }
}

/// Reads the `[section]` table of a TOML file; a missing section is empty.
pub fn load_section(text: &str, section: &str) -> Result<Table, CliError> {
    let mut doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Usage(format!("config file: {e}")))?;
    match doc.remove(section) {
        None => Ok(Table::new()),
        Some(Value::Table(t)) => Ok(t),
        Some(_) => Err(CliError::Usage(format!("config file: `{section}` is not a table"))),
    }
}

/// Keys set on the command line win over keys from the file.
pub fn merge<F: Serialize, R: DeserializeOwned>(flags: &F, file: Table) -> Result<R, CliError> {
    let mut merged = file;
    merged.extend(to_table(flags)?);
    Value::Table(merged)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Usage(format!("config: {e}")))
}

/// Provenance header: the command, the SHA-256 of the effective config and the
/// config itself, each line prefixed by `# `.
pub fn header<T: Serialize>(command: &str, effective: &T) -> Result<String, CliError> {
    let body = toml::to_string(&to_table(effective)?).map_err(|e| CliError::Usage(e.to_string()))?;
    let hash = Sha256::digest(body.as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    let mut out = format!("# sparsecorr {command}\n# config-sha256 = {hex}\n");
    for line in body.lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    struct Cfg {
        a: Option<u32>,
        b: Option<String>,
    }

    #[test]
    fn flags_override_file() {
        let file = load_section("[x]\na = 1\nb = \"f\"\n", "x").unwrap();
        let m: Cfg = merge(&Cfg { a: Some(2), b: None }, file).unwrap();
        assert_eq!(m, Cfg { a: Some(2), b: Some("f".into()) });
        assert!(load_section("[y]\n", "x").unwrap().is_empty());
    }

    #[test]
    fn header_is_stable() {
        let c = Cfg { a: Some(3), b: None };
        let h1 = header("t", &c).unwrap();
        assert_eq!(h1, header("t", &c).unwrap());
        assert!(h1.contains("# a = 3"));
        assert_ne!(h1, header("t", &Cfg { a: Some(4), b: None }).unwrap());
    }
}
