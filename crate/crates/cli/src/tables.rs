use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use qnd_core::table::CONFIG_PREFIX;

use crate::failure::{Failure, Outcome};

/// A CSV file read as named string columns, with its `# config:` line if any.
pub struct Columns {
    pub config: Option<serde_json::Value>,
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

pub fn read_columns(path: &Path) -> Outcome<Columns> {
    let open = || File::open(path).map_err(|e| Failure::data(format!("cannot read {}: {e}", path.display())));
    let mut first = String::new();
    BufReader::new(open()?)
        .read_line(&mut first)
        .map_err(|e| Failure::data(e.to_string()))?;
    let config = first
        .strip_prefix(CONFIG_PREFIX)
        .and_then(|s| serde_json::from_str(s.trim_end()).ok());
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(open()?);
    let bad = |e: csv::Error| Failure::data(format!("{}: {e}", path.display()));
    let headers = reader.headers().map_err(bad)?.iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()).map_err(bad))
        .collect::<Outcome<_>>()?;
    Ok(Columns { config, headers, rows })
}

impl Columns {
    fn index(&self, name: &str) -> Outcome<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Failure::data(format!("missing column {name:?}")))
    }

    pub fn numeric(&self, name: &str) -> Outcome<Vec<f64>> {
        let k = self.index(name)?;
        self.rows
            .iter()
            .map(|r| r[k].parse::<f64>().map_err(|e| Failure::data(format!("column {name}: {e}"))))
            .collect()
    }

    /// `N -> eps` of a tidy error curve for one mode and prepared state.
    pub fn curve(&self, mode: &str, state: &str, run: Option<&str>) -> Outcome<BTreeMap<usize, f64>> {
        let (m, s, n, e) = (self.index("mode")?, self.index("prepared_state")?, self.index("N")?, self.index("eps")?);
        let run_col = match run {
            Some(_) => Some(self.index("run")?),
            None => None,
        };
        let mut out = BTreeMap::new();
        for r in &self.rows {
            if r[m] != mode || r[s] != state || run_col.is_some_and(|k| Some(r[k].as_str()) != run) {
                continue;
            }
            let cycles = r[n].parse().map_err(|e| Failure::data(format!("column N: {e}")))?;
            let eps = r[e].parse().map_err(|e| Failure::data(format!("column eps: {e}")))?;
            if out.insert(cycles, eps).is_some() {
                return Err(Failure::data(format!("duplicate N = {cycles}; select a run with --*-run")));
            }
        }
        Ok(out)
    }
}
