//! Field file formats.
//!
//! Binary format `LPF1`: magic `LPF1`, `u32` grid size `n`, `f64` period
//! `l`, `u8` component count, then per component `n*n` little-endian `f64`
//! physical samples in row-major order (`x` fastest). The CSV alternative
//! has columns `x,y,value[,value2]` on the same lattice.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::field::{FrequencyGrid, SpectralField, VectorField};

const MAGIC: &[u8; 4] = b"LPF1";

/// Raw contents of a field file before grid projection.
#[derive(Debug, Clone)]
pub struct FieldFile {
    pub n: usize,
    pub l: f64,
    /// One sample vector per component, row-major physical samples.
    pub components: Vec<Vec<f64>>,
}

impl FieldFile {
    pub fn scalar(n: usize, l: f64, samples: Vec<f64>) -> Self {
        FieldFile {
            n,
            l,
            components: vec![samples],
        }
    }

    /// Build a spectral field on `grid`, which must match the file header.
    pub fn to_scalar(&self, grid: &Arc<FrequencyGrid>) -> Result<SpectralField> {
        if self.components.len() != 1 {
            return Err(Error::Config(format!(
                "expected a scalar field file, found {} components",
                self.components.len()
            )));
        }
        self.check_grid(grid)?;
        SpectralField::from_physical(grid, &self.components[0])
    }

    pub fn to_vector(&self, grid: &Arc<FrequencyGrid>) -> Result<VectorField> {
        if self.components.len() != 2 {
            return Err(Error::Config(format!(
                "expected a vector field file, found {} components",
                self.components.len()
            )));
        }
        self.check_grid(grid)?;
        Ok(VectorField::new(
            SpectralField::from_physical(grid, &self.components[0])?,
            SpectralField::from_physical(grid, &self.components[1])?,
        ))
    }

    fn check_grid(&self, grid: &Arc<FrequencyGrid>) -> Result<()> {
        if grid.n() != self.n || (grid.l() - self.l).abs() > 1e-12 * self.l.abs().max(1.0) {
            return Err(Error::Config(format!(
                "file grid ({}, {}) does not match target grid ({}, {})",
                self.n,
                self.l,
                grid.n(),
                grid.l()
            )));
        }
        Ok(())
    }
}

/// Read either format, deciding by the magic bytes.
pub fn read_field_file(path: &Path) -> Result<FieldFile> {
    let mut file = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    let got = file.read(&mut magic)?;
    if got == 4 && &magic == MAGIC {
        read_binary_body(file)
    } else {
        drop(file);
        let text = std::fs::read_to_string(path)?;
        parse_csv_field(&text)
    }
}

/// Convenience: read a scalar field and project it onto `grid`.
pub fn read_scalar_field(path: &Path, grid: &Arc<FrequencyGrid>) -> Result<SpectralField> {
    read_field_file(path)?.to_scalar(grid)
}

fn read_binary_body<R: Read>(mut r: R) -> Result<FieldFile> {
    let n = r.read_u32::<LittleEndian>()? as usize;
    let l = r.read_f64::<LittleEndian>()?;
    let components = r.read_u8()? as usize;
    if !(1..=2).contains(&components) {
        return Err(Error::Parse(format!("bad component count {components}")));
    }
    if n < 16 || !n.is_power_of_two() {
        return Err(Error::Parse(format!("bad grid size {n} in field file")));
    }
    let mut out = Vec::with_capacity(components);
    for _ in 0..components {
        let mut samples = vec![0.0f64; n * n];
        r.read_f64_into::<LittleEndian>(&mut samples)?;
        out.push(samples);
    }
    Ok(FieldFile {
        n,
        l,
        components: out,
    })
}

/// Write the binary format.
pub fn write_field_binary(path: &Path, field: &FieldFile) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(field.n as u32)?;
    w.write_f64::<LittleEndian>(field.l)?;
    w.write_u8(field.components.len() as u8)?;
    for comp in &field.components {
        if comp.len() != field.n * field.n {
            return Err(Error::Config("component length does not match grid".into()));
        }
        for &v in comp {
            w.write_f64::<LittleEndian>(v)?;
        }
    }
    Ok(())
}

/// Write the CSV format (`x,y,value[,value2]`).
pub fn write_field_csv(path: &Path, field: &FieldFile) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let header = if field.components.len() == 1 {
        "x,y,value"
    } else {
        "x,y,value,value2"
    };
    writeln!(w, "{header}")?;
    let h = field.l / field.n as f64;
    for iy in 0..field.n {
        for ix in 0..field.n {
            let idx = iy * field.n + ix;
            write!(w, "{},{}", ix as f64 * h, iy as f64 * h)?;
            for comp in &field.components {
                write!(w, ",{:.17e}", comp[idx])?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

fn parse_csv_field(text: &str) -> Result<FieldFile> {
    let mut rows: Vec<(f64, f64, Vec<f64>)> = Vec::new();
    let mut n_values = 0usize;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('x') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() < 3 || cols.len() > 4 {
            return Err(Error::Parse(format!("bad field row: {line}")));
        }
        let x: f64 = cols[0].parse().map_err(|e| Error::Parse(format!("{e}")))?;
        let y: f64 = cols[1].parse().map_err(|e| Error::Parse(format!("{e}")))?;
        let values: Vec<f64> = cols[2..]
            .iter()
            .map(|v| v.parse::<f64>().map_err(|e| Error::Parse(format!("{e}"))))
            .collect::<Result<_>>()?;
        if n_values == 0 {
            n_values = values.len();
        } else if values.len() != n_values {
            return Err(Error::Parse("inconsistent component count".into()));
        }
        rows.push((x, y, values));
    }
    let total = rows.len();
    let n = (total as f64).sqrt().round() as usize;
    if n * n != total || n < 16 {
        return Err(Error::Parse(format!(
            "CSV field must be a square lattice with n >= 16, got {total} rows"
        )));
    }
    // infer period from the lattice spacing
    let mut xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if xs.len() != n {
        return Err(Error::Parse("x coordinates do not form a lattice".into()));
    }
    let h = xs[1] - xs[0];
    let l = h * n as f64;
    let mut components = vec![vec![0.0f64; n * n]; n_values];
    for (x, y, values) in rows {
        let ix = (x / h).round() as usize;
        let iy = (y / h).round() as usize;
        if ix >= n || iy >= n {
            return Err(Error::Parse(format!("point ({x}, {y}) off the lattice")));
        }
        for (c, v) in components.iter_mut().zip(values.iter()) {
            c[iy * n + ix] = *v;
        }
    }
    Ok(FieldFile { n, l, components })
}
