//! CSV export with 17 significant digits and atomic file writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::domain::RadialField;
use crate::Result;

/// Float formatting used in every CSV: 17 significant digits, '.' decimal.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text with a header row and '\n' line endings.
pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// (r, value) rows of a radial field.
pub fn radial_field_csv(field: &RadialField) -> Result<String> {
    let rows: Vec<Vec<String>> = field
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| vec![fmt_f64(field.grid.r(i)), fmt_f64(*v)])
        .collect();
    csv_string(&["r", "value"], &rows)
}

/// Write `contents` to a sibling temporary file, then rename over `path`, so a
/// failure never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::RadialGrid;

    #[test]
    fn seventeen_digits_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let f = RadialField::from_fn(RadialGrid::new(3), |r| 1.0 - r);
        let s = radial_field_csv(&f).unwrap();
        assert!(s.starts_with("r,value\n"));
        assert_eq!(s.lines().count(), 6);
        assert!(!s.contains('\r'));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = std::env::temp_dir().join(format!("henon-io-{}", std::process::id()));
        let path = dir.join("x.csv");
        write_atomic(&path, b"a\n").unwrap();
        write_atomic(&path, b"b\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "b\n");
        let leftovers = fs::read_dir(&dir).unwrap().count();
        assert_eq!(leftovers, 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
