//! Result tables with per-cell reference checks, rendered as markdown, CSV or JSON.

use serde::Serialize;

use crate::config::Format;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Value {
    Number(f64),
    Count(usize),
    Diverged,
    Text(String),
    Missing,
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            Value::Count(n) => Some(*n as f64),
            _ => None,
        }
    }

    pub fn short(&self) -> String {
        match self {
            Value::Number(x) => sig3(*x),
            Value::Count(n) => n.to_string(),
            Value::Diverged => "div".into(),
            Value::Text(s) => s.clone(),
            Value::Missing => "-".into(),
        }
    }

    fn full(&self) -> String {
        match self {
            Value::Number(x) => format!("{x:e}"),
            other => other.short(),
        }
    }
}

/// Three significant digits without an exponent for moderate magnitudes.
pub fn sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.2e}");
    }
    let decimals = (2 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

/// A comparison of a cell against an expected value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub against: String,
    pub reference: Value,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn near(against: impl Into<String>, value: &Value, reference: f64, tolerance: f64) -> Self {
        let pass = value.as_f64().is_some_and(|v| (v - reference).abs() <= tolerance + 1e-12);
        Self {
            against: against.into(),
            reference: Value::Number(reference),
            tolerance,
            pass,
        }
    }

    pub fn count(against: impl Into<String>, value: &Value, reference: usize, tolerance: usize) -> Self {
        let pass = matches!(value, Value::Count(n) if n.abs_diff(reference) <= tolerance);
        Self {
            against: against.into(),
            reference: Value::Count(reference),
            tolerance: tolerance as f64,
            pass,
        }
    }

    pub fn diverges(against: impl Into<String>, value: &Value) -> Self {
        Self {
            against: against.into(),
            reference: Value::Diverged,
            tolerance: 0.0,
            pass: *value == Value::Diverged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub value: Value,
    pub checks: Vec<Check>,
}

impl Cell {
    pub fn new(value: Value) -> Self {
        Self { value, checks: vec![] }
    }

    pub fn number(x: f64) -> Self {
        Self::new(Value::Number(x))
    }

    pub fn with(mut self, check: Check) -> Self {
        self.checks.push(check);
        self
    }

    pub fn near(self, against: &str, reference: f64, tolerance: f64) -> Self {
        let c = Check::near(against, &self.value, reference, tolerance);
        self.with(c)
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub label: String,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub id: String,
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(id: &str, title: &str, columns: &[&str]) -> Self {
        Self {
            id: id.into(),
            title: title.into(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: vec![],
            notes: vec![],
        }
    }

    pub fn push(&mut self, label: impl Into<String>, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns.len(), "row width");
        self.rows.push(Row {
            label: label.into(),
            cells,
        });
    }

    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.cells.iter().all(Cell::pass))
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = vec![];
        for r in &self.rows {
            for (c, cell) in self.columns.iter().zip(&r.cells) {
                for ch in cell.checks.iter().filter(|ch| !ch.pass) {
                    out.push(format!(
                        "{} / {}: {} vs {} {} ±{}",
                        r.label,
                        c,
                        cell.value.short(),
                        ch.against,
                        ch.reference.short(),
                        ch.tolerance
                    ));
                }
            }
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Md => self.to_markdown(),
            Format::Csv => self.to_csv(),
            Format::Json => serde_json::to_string_pretty(&TableJson::from(self)).expect("table serializes") + "\n",
        }
    }

    fn to_markdown(&self) -> String {
        let mut s = format!("## {}: {}\n\n", self.id, self.title);
        s.push_str(&format!("| case | {} |\n", self.columns.join(" | ")));
        s.push_str(&format!("|---|{}\n", "---|".repeat(self.columns.len())));
        for r in &self.rows {
            let cells: Vec<String> = r
                .cells
                .iter()
                .map(|c| {
                    let mut v = c.value.short();
                    if !c.pass() {
                        v.push_str(" ✗");
                    }
                    v
                })
                .collect();
            s.push_str(&format!("| {} | {} |\n", r.label, cells.join(" | ")));
        }
        s.push('\n');
        for n in &self.notes {
            s.push_str(&format!("{n}\n"));
        }
        let checked = self.rows.iter().any(|r| r.cells.iter().any(|c| !c.checks.is_empty()));
        let fails = self.failures();
        if checked && fails.is_empty() {
            s.push_str("all checks pass\n");
        } else if checked {
            s.push_str(&format!("{} failed checks:\n", fails.len()));
            for f in fails {
                s.push_str(&format!("- {f}\n"));
            }
        }
        s
    }

    /// One line per cell and check.
    fn to_csv(&self) -> String {
        let mut s = String::from("table,case,column,value,against,reference,tolerance,pass\n");
        for r in &self.rows {
            for (col, cell) in self.columns.iter().zip(&r.cells) {
                let base = format!("{},{},{},{}", self.id, quote(&r.label), quote(col), cell.value.full());
                if cell.checks.is_empty() {
                    s.push_str(&format!("{base},,,,\n"));
                }
                for ch in &cell.checks {
                    s.push_str(&format!(
                        "{base},{},{},{},{}\n",
                        quote(&ch.against),
                        ch.reference.full(),
                        ch.tolerance,
                        ch.pass
                    ));
                }
            }
        }
        s
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
struct TableJson<'a> {
    #[serde(flatten)]
    table: &'a Table,
    pass: bool,
}

impl<'a> From<&'a Table> for TableJson<'a> {
    fn from(table: &'a Table) -> Self {
        Self {
            table,
            pass: table.pass(),
        }
    }
}
