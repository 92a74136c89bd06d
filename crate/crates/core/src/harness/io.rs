//! Deterministic artifact writers: CSV with shortest-roundtrip float
//! formatting, pretty JSON with the effective config embedded, and the
//! binary path format (little-endian header `dt, T, seed`, then f64 values).

use crate::chain::PosteriorChain;
use crate::diffusion::DiffusionPath;
use crate::prior::PriorDraw;
use crate::whitenoise::WhiteNoiseData;
use crate::{Error, Result};
use serde::Serialize;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

pub fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

pub fn write_text(path: &Path, body: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(body.as_bytes())?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    write_text(path, &body)
}

/// `Display` for f64 is the shortest representation that round-trips, so CSV
/// bodies are byte-stable across runs.
fn push_f64(buf: &mut String, v: f64) {
    use std::fmt::Write as _;
    let _ = write!(buf, "{v}");
}

/// Prior draws: `draw, J, s2, c1..c{max_j}` padded with empty fields.
pub fn prior_draws_csv(draws: &[PriorDraw]) -> String {
    let max_j = draws.iter().map(|d| d.j).max().unwrap_or(0);
    let mut out = String::from("draw,J,s2");
    for j in 1..=max_j {
        out.push_str(&format!(",c{j}"));
    }
    out.push('\n');
    for (i, d) in draws.iter().enumerate() {
        out.push_str(&format!("{i},{},", d.j));
        push_f64(&mut out, d.s2);
        for j in 0..max_j {
            out.push(',');
            if j < d.f.coeffs().len() {
                push_f64(&mut out, d.f.coeffs()[j]);
            }
        }
        out.push('\n');
    }
    out
}

/// Chain states: `iter, J, s2, c1..c{max_j}` padded with empty fields.
pub fn chain_csv(chain: &PosteriorChain) -> String {
    let max_j = chain.states.iter().map(|s| s.j).max().unwrap_or(0);
    let mut out = String::from("iter,J,s2");
    for j in 1..=max_j {
        out.push_str(&format!(",c{j}"));
    }
    out.push('\n');
    for (i, s) in chain.states.iter().enumerate() {
        out.push_str(&format!("{i},{},", s.j));
        push_f64(&mut out, s.s2);
        for j in 0..max_j {
            out.push(',');
            if j < s.coeffs.len() {
                push_f64(&mut out, s.coeffs[j]);
            }
        }
        out.push('\n');
    }
    out
}

pub fn wn_data_csv(data: &WhiteNoiseData) -> String {
    let mut out = String::from("j,x\n");
    for (j, &x) in data.x.iter().enumerate() {
        out.push_str(&format!("{},", j + 1));
        push_f64(&mut out, x);
        out.push('\n');
    }
    out
}

pub fn path_csv(path: &DiffusionPath) -> String {
    let mut out = String::from("t,x\n");
    for (k, &v) in path.values.iter().enumerate() {
        push_f64(&mut out, k as f64 * path.dt);
        out.push(',');
        push_f64(&mut out, v);
        out.push('\n');
    }
    out
}

/// Binary path format: `dt: f64 le`, `T: f64 le`, `seed: u64 le`, then the
/// values as f64 le. The value count is implied by the file length.
pub fn write_path_binary(file: &Path, path: &DiffusionPath) -> Result<()> {
    let mut f = std::fs::File::create(file)?;
    f.write_all(&path.dt.to_le_bytes())?;
    f.write_all(&path.t_horizon().to_le_bytes())?;
    f.write_all(&path.seed.to_le_bytes())?;
    let mut buf = Vec::with_capacity(path.values.len() * 8);
    for v in &path.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    f.write_all(&buf)?;
    Ok(())
}

pub fn read_path_binary(file: &Path) -> Result<DiffusionPath> {
    let mut f = std::fs::File::open(file)?;
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes)?;
    if bytes.len() < 24 || (bytes.len() - 24) % 8 != 0 {
        return Err(Error::invalid("path file", "truncated or misaligned"));
    }
    let dt = f64::from_le_bytes(bytes[0..8].try_into().unwrap());
    let t_horizon = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let seed = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let n_values = (bytes.len() - 24) / 8;
    let values: Vec<f64> = (0..n_values)
        .map(|i| {
            let lo = 24 + 8 * i;
            f64::from_le_bytes(bytes[lo..lo + 8].try_into().unwrap())
        })
        .collect();
    if !dt.is_finite() || dt <= 0.0 || values.is_empty() {
        return Err(Error::invalid("path file", "invalid header"));
    }
    let expected = ((t_horizon / dt).floor() as usize) + 1;
    if values.len() != expected {
        return Err(Error::invalid(
            "path file",
            format!("length {} does not match T/dt ({expected})", values.len()),
        ));
    }
    Ok(DiffusionPath { dt, values, seed })
}

pub fn out_file(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::DiffusionPath;

    #[test]
    fn path_binary_roundtrip() {
        let path = DiffusionPath {
            dt: 1e-3,
            values: (0..=1000).map(|k| (k as f64) * 0.001 - 0.3).collect(),
            seed: 99,
        };
        let dir = std::env::temp_dir().join("series_prior_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("p.bin");
        write_path_binary(&file, &path).unwrap();
        let back = read_path_binary(&file).unwrap();
        assert_eq!(back.dt, path.dt);
        assert_eq!(back.seed, path.seed);
        assert_eq!(back.values, path.values);
    }

    #[test]
    fn csv_is_stable() {
        let data = WhiteNoiseData {
            n: 100,
            x: vec![0.1, -0.25, 1.0 / 3.0],
        };
        let a = wn_data_csv(&data);
        let b = wn_data_csv(&data);
        assert_eq!(a, b);
        assert!(a.starts_with("j,x\n1,0.1\n"));
    }
}
