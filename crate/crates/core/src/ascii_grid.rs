//! ESRI ASCII grid (`.asc`) reading and writing.
//!
//! Values are held south row first so that `values[row * ncols + col]`
//! matches [`GridIndex`](crate::geo::GridIndex) ordering; the file itself
//! stores the north row first.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AsciiHeader {
    pub ncols: usize,
    pub nrows: usize,
    /// Longitude of the west edge.
    pub xllcorner: f64,
    /// Latitude of the south edge.
    pub yllcorner: f64,
    /// Cell edge in meters.
    pub cellsize: f64,
    pub nodata: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsciiGrid {
    pub header: AsciiHeader,
    pub values: Vec<f64>,
}

pub const DEFAULT_NODATA: f64 = -9999.0;

impl AsciiGrid {
    pub fn is_nodata(&self, v: f64) -> bool {
        v == self.header.nodata
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|msg| Error::parse(path, msg))
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut ncols = None;
        let mut nrows = None;
        let mut xll = None;
        let mut yll = None;
        let mut cellsize = None;
        let mut nodata = DEFAULT_NODATA;

        let mut lines = text.lines().enumerate().peekable();
        while let Some((_, line)) = lines.peek() {
            let mut parts = line.split_whitespace();
            let Some(key) = parts.next() else {
                lines.next();
                continue;
            };
            if key.chars().next().is_some_and(|c| !c.is_ascii_alphabetic()) {
                break;
            }
            let lineno = lines.next().unwrap().0 + 1;
            let value = parts
                .next()
                .ok_or_else(|| format!("line {lineno}: header `{key}` has no value"))?;
            let num = |v: &str| -> std::result::Result<f64, String> {
                v.parse::<f64>()
                    .map_err(|_| format!("line {lineno}: bad value `{v}` for `{key}`"))
            };
            match key.to_ascii_lowercase().as_str() {
                "ncols" => ncols = Some(parse_count(value, lineno)?),
                "nrows" => nrows = Some(parse_count(value, lineno)?),
                "xllcorner" => xll = Some(num(value)?),
                "yllcorner" => yll = Some(num(value)?),
                "cellsize" => cellsize = Some(num(value)?),
                "nodata_value" => nodata = num(value)?,
                other => return Err(format!("line {lineno}: unsupported header `{other}`")),
            }
        }

        let header = AsciiHeader {
            ncols: ncols.ok_or("missing ncols")?,
            nrows: nrows.ok_or("missing nrows")?,
            xllcorner: xll.ok_or("missing xllcorner")?,
            yllcorner: yll.ok_or("missing yllcorner")?,
            cellsize: cellsize.ok_or("missing cellsize")?,
            nodata,
        };

        let mut file_rows: Vec<Vec<f64>> = Vec::with_capacity(header.nrows);
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| format!("line {}: bad cell value `{t}`", i + 1))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if row.len() != header.ncols {
                return Err(format!(
                    "line {}: expected {} values, found {}",
                    i + 1,
                    header.ncols,
                    row.len()
                ));
            }
            file_rows.push(row);
        }
        if file_rows.len() != header.nrows {
            return Err(format!(
                "expected {} data rows, found {}",
                header.nrows,
                file_rows.len()
            ));
        }
        let values = file_rows.into_iter().rev().flatten().collect();
        Ok(AsciiGrid { header, values })
    }

    pub fn render(&self) -> String {
        let h = &self.header;
        let mut out = String::with_capacity(h.ncols * h.nrows * 6 + 128);
        let _ = writeln!(out, "ncols {}", h.ncols);
        let _ = writeln!(out, "nrows {}", h.nrows);
        let _ = writeln!(out, "xllcorner {}", h.xllcorner);
        let _ = writeln!(out, "yllcorner {}", h.yllcorner);
        let _ = writeln!(out, "cellsize {}", h.cellsize);
        let _ = writeln!(out, "NODATA_value {}", h.nodata);
        for row in (0..h.nrows).rev() {
            let cells = &self.values[row * h.ncols..(row + 1) * h.ncols];
            for (c, v) in cells.iter().enumerate() {
                if c > 0 {
                    out.push(' ');
                }
                // `Display` for f64 is the shortest string that parses back exactly.
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }
}

fn parse_count(v: &str, lineno: usize) -> std::result::Result<usize, String> {
    v.parse::<usize>()
        .map_err(|_| format!("line {lineno}: `{v}` is not a count"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "ncols 3\nnrows 2\nxllcorner -120.0\nyllcorner 37.8\ncellsize 30\nNODATA_value -9999\n1 2 3\n4 5 -9999\n";

    #[test]
    fn parses_north_row_first() {
        let g = AsciiGrid::parse(SAMPLE).unwrap();
        assert_eq!(g.header.ncols, 3);
        assert_eq!(g.header.nrows, 2);
        // row 0 is the south (last) file row
        assert_eq!(g.values, vec![4.0, 5.0, -9999.0, 1.0, 2.0, 3.0]);
        assert!(g.is_nodata(g.values[2]));
    }

    #[test]
    fn render_roundtrips() {
        let g = AsciiGrid::parse(SAMPLE).unwrap();
        assert_eq!(AsciiGrid::parse(&g.render()).unwrap(), g);
    }

    #[test]
    fn short_row_is_rejected() {
        let bad = SAMPLE.replace("4 5 -9999", "4 5");
        assert!(AsciiGrid::parse(&bad).unwrap_err().contains("expected 3 values"));
    }

    #[test]
    fn missing_header_is_rejected() {
        let bad = SAMPLE.replace("cellsize 30\n", "");
        assert!(AsciiGrid::parse(&bad).is_err());
    }
}
