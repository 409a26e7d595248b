//! CSV emission. Files open with a schema line and the effective settings as
//! `# key=value` comments, followed by a header and data rows.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use distexp::simulator::SeedRow;
use distexp::ExperimentConfig;

use crate::CliError;

pub const SCHEMA: &str = "distexp-csv v1";

pub const RUN_HEADER: &[&str] = &["algo", "adversary", "params", "T", "k", "n", "seed", "regret", "messages", "reals_sent"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub comments: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), ..Self::default() }
    }

    pub fn comment(&mut self, key: &str, value: impl ToString) {
        self.comments.push((key.to_string(), value.to_string()));
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), CliError> {
        writeln!(w, "# {SCHEMA}")?;
        for (k, v) in &self.comments {
            writeln!(w, "# {k}={v}")?;
        }
        let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        csv.write_record(&self.header)?;
        for r in &self.rows {
            csv.write_record(r)?;
        }
        csv.flush()?;
        Ok(())
    }

    /// Writes to `path`, or to standard output for `-`.
    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        if path.as_os_str() == "-" {
            return self.write_to(io::stdout().lock());
        }
        let file = File::create(path).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// Parameters of the algorithm and adversary as `name=value` pairs joined
/// by `;`.
pub fn params_field(cfg: &ExperimentConfig) -> String {
    let mut parts: Vec<String> = cfg.algorithm.params().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
    parts.extend(cfg.adversary.params().into_iter().map(|(k, v)| format!("{k}={v}")));
    if let Some(a) = &cfg.adversary.allocation {
        parts.push(format!("allocation={}", a.name()));
    }
    parts.join(";")
}

pub fn run_row(cfg: &ExperimentConfig, row: &SeedRow) -> Vec<String> {
    vec![
        cfg.algorithm.name().to_string(),
        cfg.adversary.kind.name().to_string(),
        params_field(cfg),
        cfg.horizon.to_string(),
        cfg.sites.to_string(),
        cfg.experts.to_string(),
        row.seed.to_string(),
        row.regret.to_string(),
        row.messages.to_string(),
        row.reals_sent.to_string(),
    ]
}

/// Splits a CSV produced by [`Table::write_to`] back into its parts.
pub fn parse(text: &str) -> Result<Table, CliError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(l) if l.strip_prefix("# ") == Some(SCHEMA) => {}
        other => {
            return Err(CliError::Runtime(format!("expected schema `{SCHEMA}`, found `{}`", other.unwrap_or(""))))
        }
    }
    let mut table = Table::default();
    let mut body = String::new();
    for line in lines {
        match line.strip_prefix("# ") {
            Some(c) if body.is_empty() => {
                let (k, v) = c.split_once('=').unwrap_or((c, ""));
                table.comment(k, v);
            }
            _ => {
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    table.header = reader.headers()?.iter().map(str::to_string).collect();
    for rec in reader.records() {
        table.rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let mut t = Table::new(&["a", "b"]);
        t.comment("T", 10);
        t.rows.push(vec!["x;y=1".into(), "2.5".into()]);
        t.rows.push(vec!["has,comma".into(), "-1".into()]);
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# distexp-csv v1\n# T=10\na,b\n"));
        assert_eq!(parse(&text).unwrap(), t);
        assert!(parse("a,b\n1,2\n").is_err());
    }
}
