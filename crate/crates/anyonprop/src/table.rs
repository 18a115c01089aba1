use std::fmt::Write;

/// 17 significant digits, enough to round-trip any double.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV document: `# key=value` metadata, then a header row and data rows.
#[derive(Debug, Default)]
pub struct Table {
    meta: Vec<(String, String)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            ..Table::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    /// Puts the metadata of `other` ahead of this table's own.
    pub fn prepend_meta(&mut self, other: Table) {
        let mine = std::mem::replace(&mut self.meta, other.meta);
        self.meta.extend(mine);
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            // values are single-line by construction; keep it that way
            let v = v.replace(['\n', '\r'], " ");
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn renders_metadata_then_rows() {
        let mut t = Table::new(&["a", "b"]);
        t.meta("command", "eval");
        t.row(vec!["1".into(), "2".into()]);
        assert_eq!(t.render(), "# command=eval\na,b\n1,2\n");
    }
}
