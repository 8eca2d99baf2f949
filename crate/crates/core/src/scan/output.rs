//! Byte-stable text formats: CSV grids, ASCII PGM heatmaps, atomic writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{Grid2D, GAPLESS_SENTINEL};

/// `printf("%.9g")`: nine significant digits, trailing zeros stripped,
/// exponent form outside `[1e-4, 1e9)`. Negative zero prints as `0`.
pub fn fmt_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp) as usize;
    strip_zeros(&format!("{v:.decimals$}")).to_string()
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `kx,ky,value` rows, kx fastest.
pub fn grid_csv(grid: &Grid2D) -> String {
    let mut out = String::with_capacity(grid.values.len() * 32);
    out.push_str("kx,ky,value\n");
    for iy in 0..grid.ny {
        let ky = fmt_sig9(grid.coord(1, iy));
        for ix in 0..grid.nx {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_sig9(grid.coord(0, ix)),
                ky,
                fmt_sig9(grid.get(ix, iy))
            );
        }
    }
    out
}

/// ASCII greymap, top row at the largest ky; `v -> floor(255 v + 1/2)`,
/// sentinel -> 0.
pub fn grid_pgm(grid: &Grid2D) -> Result<String> {
    let mut out = format!("P2\n{} {}\n255\n", grid.nx, grid.ny);
    for iy in (0..grid.ny).rev() {
        let mut line = String::with_capacity(grid.nx * 4);
        for ix in 0..grid.nx {
            let v = grid.get(ix, iy);
            let level = if v == GAPLESS_SENTINEL {
                0
            } else if (0.0..=1.0).contains(&v) {
                (255.0 * v + 0.5).floor() as u32
            } else {
                return Err(Error::OutOfRange(v));
            };
            if ix > 0 {
                line.push(' ');
            }
            let _ = write!(line, "{level}");
        }
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_grid_csv(grid: &Grid2D, path: &Path) -> Result<()> {
    write_atomic(path, grid_csv(grid).as_bytes())
}

pub fn write_pgm(grid: &Grid2D, path: &Path) -> Result<()> {
    write_atomic(path, grid_pgm(grid)?.as_bytes())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn sig9_matches_printf() {
        let cases = [
            (1.0, "1"),
            (-1.0, "-1"),
            (0.5, "0.5"),
            (-0.0, "0"),
            (std::f64::consts::PI, "3.14159265"),
            (-std::f64::consts::PI, "-3.14159265"),
            (1e-5, "1e-05"),
            (1.5e-4, "0.00015"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.999999999999, "1"),
            (9.87654321e-17, "9.87654321e-17"),
            (2.5e100, "2.5e+100"),
        ];
        for (v, s) in cases {
            assert_eq!(fmt_sig9(v), s, "{v}");
        }
    }

    #[test]
    fn csv_of_ones() {
        let g = GridSpec::new(2, 2, [[0.0, 1.0], [0.0, 1.0]]).unwrap();
        let grid = Grid2D::from_fn(&g, |_, _| 1.0);
        assert_eq!(grid_csv(&grid), "kx,ky,value\n0,0,1\n1,0,1\n0,1,1\n1,1,1\n");
    }

    #[test]
    fn pgm_levels_and_orientation() {
        let g = GridSpec::new(2, 2, [[0.0, 1.0], [0.0, 1.0]]).unwrap();
        let grid = Grid2D::from_fn(&g, |x, y| {
            if y > 0.5 {
                0.5
            } else if x > 0.5 {
                GAPLESS_SENTINEL
            } else {
                1.0
            }
        });
        assert_eq!(grid_pgm(&grid).unwrap(), "P2\n2 2\n255\n128 128\n255 0\n");
        let bad = Grid2D::from_fn(&g, |_, _| 1.5);
        assert!(matches!(grid_pgm(&bad), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn sha_of_empty() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
