//! Self-describing columnar output.

use std::fmt;
use std::str::FromStr;

/// Tool version stamped into every header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

impl FromStr for Format {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(()),
        }
    }
}

/// 17 significant digits in scientific notation; round-trips every finite
/// double and does not depend on locale.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    /// `None` marks a gap.
    Number(Vec<Option<f64>>),
    Text(Vec<String>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Number(v) => v.len(),
            Column::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn csv_cell(&self, i: usize) -> String {
        match self {
            Column::Number(v) => v[i].map(fmt_f64).unwrap_or_default(),
            Column::Text(v) => v[i].clone(),
        }
    }

    fn json(&self) -> String {
        let items: Vec<String> = match self {
            Column::Number(v) => v
                .iter()
                .map(|x| x.map(fmt_f64).unwrap_or_else(|| "null".into()))
                .collect(),
            Column::Text(v) => v.iter().map(|s| json_string(s)).collect(),
        };
        format!("[{}]", items.join(","))
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<(String, Column)>,
}

impl Dataset {
    pub fn new(command: &str, params: Vec<(String, String)>) -> Self {
        let mut meta = vec![
            ("info.tool".to_string(), "pulsed-squeeze".to_string()),
            ("info.version".to_string(), VERSION.to_string()),
            ("info.command".to_string(), command.to_string()),
        ];
        meta.extend(params);
        Self {
            meta,
            columns: Vec::new(),
        }
    }

    pub fn info(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.meta.push((format!("info.{key}"), value.into()));
        self
    }

    pub fn info_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.info(key, fmt_f64(value))
    }

    pub fn numbers(&mut self, name: &str, values: impl IntoIterator<Item = f64>) -> &mut Self {
        self.gappy(name, values.into_iter().map(Some))
    }

    pub fn gappy(
        &mut self,
        name: &str,
        values: impl IntoIterator<Item = Option<f64>>,
    ) -> &mut Self {
        self.push(name, Column::Number(values.into_iter().collect()))
    }

    pub fn text(&mut self, name: &str, values: impl IntoIterator<Item = String>) -> &mut Self {
        self.push(name, Column::Text(values.into_iter().collect()))
    }

    fn push(&mut self, name: &str, column: Column) -> &mut Self {
        if let Some((_, first)) = self.columns.first() {
            assert_eq!(
                first.len(),
                column.len(),
                "column {name} has the wrong length"
            );
        }
        self.columns.push((name.to_string(), column));
        self
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, c)| c.len())
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        let names: Vec<&str> = self.columns.iter().map(|(n, _)| n.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for i in 0..self.rows() {
            let cells: Vec<String> = self.columns.iter().map(|(_, c)| c.csv_cell(i)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let meta: Vec<String> = self
            .meta
            .iter()
            .map(|(k, v)| format!("{}:{}", json_string(k), json_string(v)))
            .collect();
        let columns: Vec<String> = self
            .columns
            .iter()
            .map(|(n, c)| format!("{}:{}", json_string(n), c.json()))
            .collect();
        format!(
            "{{\"meta\":{{{}}},\"columns\":{{{}}}}}\n",
            meta.join(","),
            columns.join(",")
        )
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}
