use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("unknown table format `{0}` (text|csv)")]
    UnknownFormat(String),
    #[error("table has no rows")]
    Empty,
    #[error("csv line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Text,
    Csv,
}

impl FromStr for TableFormat {
    type Err = TableError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(TableFormat::Text),
            "csv" => Ok(TableFormat::Csv),
            other => Err(TableError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub epsilon: f64,
    pub n: usize,
    /// One entry per column; `None` when the cell failed.
    pub values: Vec<Option<f64>>,
    /// Observed order towards the next finer `N` of the same `ε`.
    pub orders: Vec<Option<f64>>,
    pub note: Option<String>,
}

/// Error values keyed by `(ε, N)` with observed orders.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
}

/// `ln(e_coarse / e_fine) / ln(n_fine / n_coarse)`; `log₂` of the ratio
/// under doubling.
pub fn observed_order(e_coarse: f64, n_coarse: usize, e_fine: f64, n_fine: usize) -> f64 {
    (e_coarse / e_fine).ln() / (n_fine as f64 / n_coarse as f64).ln()
}

/// Least-squares slope of `−log e` against `log N`.
pub fn fitted_order(points: &[(usize, f64)]) -> f64 {
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| -e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

impl ConvergenceTable {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            ..Self::default()
        }
    }

    pub fn with_metadata(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn push(&mut self, epsilon: f64, n: usize, values: Vec<Option<f64>>, note: Option<String>) {
        assert_eq!(values.len(), self.columns.len());
        let orders = vec![None; values.len()];
        self.rows.push(TableRow {
            epsilon,
            n,
            values,
            orders,
            note,
        });
    }

    /// Distinct `ε` values in first-appearance order.
    pub fn epsilons(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.epsilon) {
                out.push(r.epsilon);
            }
        }
        out
    }

    pub fn group(&self, epsilon: f64) -> Vec<&TableRow> {
        let mut g: Vec<&TableRow> = self.rows.iter().filter(|r| r.epsilon == epsilon).collect();
        g.sort_by_key(|r| r.n);
        g
    }

    pub fn get(&self, epsilon: f64, n: usize) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.epsilon == epsilon && r.n == n)
    }

    /// Sorts rows by `ε` group then `N` and fills every order column.
    pub fn fill_orders(&mut self) {
        let eps = self.epsilons();
        self.rows.sort_by(|a, b| {
            let ia = eps.iter().position(|&e| e == a.epsilon);
            let ib = eps.iter().position(|&e| e == b.epsilon);
            ia.cmp(&ib).then(a.n.cmp(&b.n))
        });
        for idx in 0..self.rows.len() {
            let next = idx + 1;
            for c in 0..self.columns.len() {
                let order = if next < self.rows.len() && self.rows[next].epsilon == self.rows[idx].epsilon {
                    match (self.rows[idx].values[c], self.rows[next].values[c]) {
                        (Some(a), Some(b)) if a > 0.0 && b > 0.0 => {
                            Some(observed_order(a, self.rows[idx].n, b, self.rows[next].n))
                        }
                        _ => None,
                    }
                } else {
                    None
                };
                self.rows[idx].orders[c] = order;
            }
        }
    }

    /// `(N, value)` pairs of one column for one `ε`, failed cells skipped.
    pub fn series(&self, column: usize, epsilon: f64) -> Vec<(usize, f64)> {
        self.group(epsilon)
            .into_iter()
            .filter_map(|r| r.values[column].map(|v| (r.n, v)))
            .collect()
    }
}

/// `0.339E+00` style: mantissa in `[0.1, 1)` with three digits.
pub fn format_sci3(v: f64) -> String {
    if v == 0.0 {
        return "0.000E+00".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{:.2e}", v.abs());
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let exp: i32 = exp.parse::<i32>().expect("integer exponent") + 1;
    let sign = if v < 0.0 { "-" } else { "" };
    let esign = if exp < 0 { '-' } else { '+' };
    format!("{sign}0.{digits}E{esign}{:02}", exp.abs())
}

fn format_eps(e: f64) -> String {
    format!("{e:e}")
}

fn escape_note(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

pub fn emit_table(t: &ConvergenceTable, format: TableFormat) -> Result<String, TableError> {
    if t.rows.is_empty() {
        return Err(TableError::Empty);
    }
    Ok(match format {
        TableFormat::Text => emit_text(t),
        TableFormat::Csv => emit_csv(t),
    })
}

fn emit_text(t: &ConvergenceTable) -> String {
    let mut out = String::new();
    for (k, v) in &t.metadata {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let mut ns: Vec<usize> = t.rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let w = 11;
    for (c, name) in t.columns.iter().enumerate() {
        let _ = writeln!(out, "\n{name}");
        let _ = write!(out, "{:<8}", "eps");
        for n in &ns {
            let _ = write!(out, "{n:>w$}");
        }
        out.push('\n');
        for eps in t.epsilons() {
            let group = t.group(eps);
            let _ = write!(out, "{:<8}", format_eps(eps));
            for n in &ns {
                let cell = match group.iter().find(|r| r.n == *n) {
                    Some(r) => r.values[c].map_or("failed".to_string(), format_sci3),
                    None => String::new(),
                };
                let _ = write!(out, "{cell:>w$}");
            }
            out.push('\n');
            let _ = write!(out, "{:<8}", "");
            for n in &ns {
                let cell = match group.iter().find(|r| r.n == *n) {
                    Some(r) => r.orders[c].map_or("---".to_string(), |o| format!("{o:.2}")),
                    None => String::new(),
                };
                let _ = write!(out, "{cell:>w$}");
            }
            out.push('\n');
        }
    }
    let notes: Vec<_> = t.rows.iter().filter_map(|r| r.note.as_ref().map(|n| (r, n))).collect();
    if !notes.is_empty() {
        out.push('\n');
        for (r, n) in notes {
            let _ = writeln!(out, "note eps={} N={}: {n}", format_eps(r.epsilon), r.n);
        }
    }
    out
}

/// Rate table with one row per `N` and a value/order column pair per norm,
/// grouped by `ε`.
pub fn emit_rates(t: &ConvergenceTable) -> Result<String, TableError> {
    if t.rows.is_empty() {
        return Err(TableError::Empty);
    }
    let mut out = String::new();
    for (k, v) in &t.metadata {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let w = t.columns.iter().map(|c| c.len()).max().unwrap_or(0).max(9) + 2;
    for eps in t.epsilons() {
        let _ = write!(out, "\neps = {}\n{:>6}", format_eps(eps), "N");
        for c in &t.columns {
            let _ = write!(out, "{c:>w$}{:>7}", "order");
        }
        out.push('\n');
        for r in t.group(eps) {
            let _ = write!(out, "{:>6}", r.n);
            for (v, o) in r.values.iter().zip(&r.orders) {
                let v = v.map_or("failed".to_string(), format_sci3);
                let o = o.map_or("---".to_string(), |o| format!("{o:.2}"));
                let _ = write!(out, "{v:>w$}{o:>7}");
            }
            out.push('\n');
        }
    }
    Ok(out)
}

fn emit_csv(t: &ConvergenceTable) -> String {
    let mut out = String::from("epsilon,n");
    for c in &t.columns {
        let _ = write!(out, ",{c},{c}_order");
    }
    out.push_str(",note\n");
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:?}"));
    for r in &t.rows {
        let _ = write!(out, "{:?},{}", r.epsilon, r.n);
        for (v, o) in r.values.iter().zip(&r.orders) {
            let _ = write!(out, ",{},{}", opt(*v), opt(*o));
        }
        let _ = writeln!(out, ",{}", r.note.as_deref().map(escape_note).unwrap_or_default());
    }
    out
}

/// Inverse of the CSV emitter; metadata is not carried by CSV.
pub fn parse_csv(s: &str) -> Result<ConvergenceTable, TableError> {
    let mut lines = s.lines().enumerate();
    let (_, header) = lines.next().ok_or(TableError::Empty)?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() < 3 || fields[0] != "epsilon" || fields[1] != "n" || fields.last() != Some(&"note") {
        return Err(TableError::Parse {
            line: 1,
            msg: "unexpected header".into(),
        });
    }
    let columns: Vec<String> = fields[2..fields.len() - 1]
        .chunks(2)
        .map(|c| c[0].to_string())
        .collect();
    let mut t = ConvergenceTable::new(columns);
    let parse_f = |x: &str, line: usize| -> Result<Option<f64>, TableError> {
        if x.is_empty() {
            return Ok(None);
        }
        x.parse::<f64>().map(Some).map_err(|e| TableError::Parse {
            line,
            msg: e.to_string(),
        })
    };
    for (i, line) in lines {
        let ln = i + 1;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != fields.len() {
            return Err(TableError::Parse {
                line: ln,
                msg: format!("expected {} fields, found {}", fields.len(), f.len()),
            });
        }
        let epsilon = parse_f(f[0], ln)?.ok_or(TableError::Parse {
            line: ln,
            msg: "missing epsilon".into(),
        })?;
        let n = f[1].parse::<usize>().map_err(|e| TableError::Parse {
            line: ln,
            msg: e.to_string(),
        })?;
        let mut values = Vec::new();
        let mut orders = Vec::new();
        for pair in f[2..f.len() - 1].chunks(2) {
            values.push(parse_f(pair[0], ln)?);
            orders.push(parse_f(pair[1], ln)?);
        }
        let note = (!f[f.len() - 1].is_empty()).then(|| f[f.len() - 1].to_string());
        t.rows.push(TableRow {
            epsilon,
            n,
            values,
            orders,
            note,
        });
    }
    Ok(t)
}
