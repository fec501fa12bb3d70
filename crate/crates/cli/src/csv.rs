//! Reader for the CSV files this tool writes (no quoting, one header line).

use std::path::Path;

use complex_eikonal::Complex64;

use crate::CliError;

#[derive(Clone, Debug)]
pub struct CsvData {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvData {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines();
        let headers: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::Io("empty csv".into()))?
            .split(',')
            .map(str::to_owned)
            .collect();
        let rows: Vec<Vec<String>> = lines
            .filter(|l| !l.is_empty())
            .map(|l| l.split(',').map(str::to_owned).collect())
            .collect();
        if let Some(bad) = rows.iter().position(|r| r.len() != headers.len()) {
            return Err(CliError::Io(format!("csv row {} has the wrong number of cells", bad + 1)));
        }
        Ok(Self { headers, rows })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn column(&self, name: &str) -> Result<usize, CliError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Io(format!("csv column {name:?} missing")))
    }

    pub fn cell(&self, row: usize, name: &str) -> Result<&str, CliError> {
        Ok(&self.rows[row][self.column(name)?])
    }

    /// Numeric cell; empty cells are `None`.
    pub fn f64(&self, row: usize, name: &str) -> Result<Option<f64>, CliError> {
        let s = self.cell(row, name)?;
        if s.is_empty() {
            return Ok(None);
        }
        s.parse::<f64>()
            .map(Some)
            .map_err(|_| CliError::Io(format!("bad number {s:?} in column {name:?}")))
    }

    pub fn req(&self, row: usize, name: &str) -> Result<f64, CliError> {
        self.f64(row, name)?
            .ok_or_else(|| CliError::Io(format!("empty cell in column {name:?}, row {}", row + 1)))
    }

    /// Complex value from the `<prefix>_re`, `<prefix>_im` column pair.
    pub fn complex(&self, row: usize, prefix: &str) -> Result<Complex64, CliError> {
        Ok(Complex64::new(
            self.req(row, &format!("{prefix}_re"))?,
            self.req(row, &format!("{prefix}_im"))?,
        ))
    }
}
