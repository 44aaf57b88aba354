use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RNG_ALGORITHM;

/// Version stamped into every output schema name.
pub const SCHEMA_VERSION: u32 = 1;

pub fn schema_name(experiment: &str) -> String {
    format!("subrip/{experiment}/v{SCHEMA_VERSION}")
}

/// Rows of one experiment plus what is needed to replay them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table<R> {
    pub schema: String,
    pub config_hash: String,
    pub rng: String,
    pub rows: Vec<R>,
}

impl<R: Serialize> Table<R> {
    pub fn new(experiment: &str, config_hash: String, rows: Vec<R>) -> Self {
        Self {
            schema: schema_name(experiment),
            config_hash,
            rng: RNG_ALGORITHM.to_string(),
            rows,
        }
    }

    /// CSV with `#`-prefixed header lines naming the schema.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = format!(
            "# schema: {}\n# config_hash: {}\n# rng: {}\n",
            self.schema, self.config_hash, self.rng
        );
        out.push_str(&rows_to_csv(&self.rows)?);
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_text(self)
    }
}

pub(crate) fn rows_to_csv<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub(crate) fn to_json_text<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Space-separated indices, for list-valued CSV cells.
pub(crate) fn join_indices(v: &[usize]) -> String {
    v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}
