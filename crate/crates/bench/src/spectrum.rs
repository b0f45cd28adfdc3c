//! Two-column spectrum files: wavelength (nm) and irradiance (W m^-2 nm^-1),
//! separated by whitespace or commas. Lines starting with `#` are comments.

use std::path::Path;

use tartarus_core::objectives::{ScharberError, Spectrum};

/// ASTM G-173 global tilt reference spectrum, 280 to 4000 nm.
pub const AM15G: &str = include_str!("../data/am15g.txt");

#[derive(Debug, thiserror::Error)]
pub enum SpectrumError {
    #[error("spectrum line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] ScharberError),
    #[error("cannot read spectrum: {0}")]
    Io(#[from] std::io::Error),
}

pub fn parse_spectrum(text: &str) -> Result<Spectrum, SpectrumError> {
    let mut wl = Vec::new();
    let mut irr = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|f| !f.is_empty())
            .collect();
        let bad = |message: String| SpectrumError::Parse { line: i + 1, message };
        if fields.len() != 2 {
            return Err(bad(format!("expected 2 columns, found {}", fields.len())));
        }
        let parse = |f: &str| f.parse::<f64>().map_err(|e| bad(format!("'{f}': {e}")));
        wl.push(parse(fields[0])?);
        irr.push(parse(fields[1])?);
    }
    Ok(Spectrum::new(wl, irr)?)
}

pub fn load_spectrum(path: &Path) -> Result<Spectrum, SpectrumError> {
    parse_spectrum(&std::fs::read_to_string(path)?)
}

pub fn am15g() -> Spectrum {
    parse_spectrum(AM15G).expect("shipped spectrum is valid")
}
