//! CSV output. Floats are written with 17 significant digits so every value
//! round-trips exactly.

use crate::error::CliError;

/// Scientific notation with 16 digits after the point.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file_name: impl Into<String>, header: Vec<&'static str>) -> Self {
        Self {
            file_name: file_name.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        writer
            .write_record(&self.header)
            .map_err(CliError::numeric)?;
        for row in &self.rows {
            writer.write_record(row).map_err(CliError::numeric)?;
        }
        let bytes = writer.into_inner().map_err(CliError::numeric)?;
        String::from_utf8(bytes).map_err(CliError::numeric)
    }
}
