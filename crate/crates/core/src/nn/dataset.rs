use std::fs;
use std::io::Write;
use std::path::Path;

use super::features::{FeatureVector, FEATURE_LEN};
use crate::error::{Error, Result};
use crate::traffic::ActionIndex;

/// One observation and the action the planner chose for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetRow {
    pub features: FeatureVector,
    pub label: ActionIndex,
}

/// 62 features then the integer label, comma separated.
pub fn format_row(row: &DatasetRow) -> String {
    let mut line: Vec<String> = row.features.iter().map(|v| v.to_string()).collect();
    line.push(row.label.get().to_string());
    line.join(",")
}

pub fn write_dataset<W: Write>(rows: &[DatasetRow], mut out: W) -> std::io::Result<()> {
    for row in rows {
        writeln!(out, "{}", format_row(row))?;
    }
    Ok(())
}

pub fn save_dataset(rows: &[DatasetRow], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    write_dataset(rows, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: &Path) -> Result<Vec<DatasetRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, path)
}

/// Parses dataset text. Blank lines are skipped, as is a first line that
/// starts with a letter (a header).
pub fn parse_dataset(text: &str, origin: &Path) -> Result<Vec<DatasetRow>> {
    let fail = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.trim();
        if line.is_empty() || (n == 1 && line.starts_with(|c: char| c.is_ascii_alphabetic())) {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != FEATURE_LEN + 1 {
            return Err(fail(
                n,
                format!("expected {} values, found {}", FEATURE_LEN + 1, cells.len()),
            ));
        }
        let mut features = [0.0; FEATURE_LEN];
        for (f, cell) in features.iter_mut().zip(&cells) {
            *f = cell
                .parse::<f64>()
                .map_err(|e| fail(n, format!("bad feature `{cell}`: {e}")))?;
            if !f.is_finite() {
                return Err(fail(n, format!("non-finite feature `{cell}`")));
            }
        }
        let label_cell = cells[FEATURE_LEN];
        let label = label_cell
            .parse::<usize>()
            .map_err(|e| fail(n, format!("bad label `{label_cell}`: {e}")))
            .and_then(|l| ActionIndex::new(l).map_err(|e| fail(n, e.to_string())))?;
        rows.push(DatasetRow { features, label });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(seed: f64, label: usize) -> DatasetRow {
        let mut features = [0.0; FEATURE_LEN];
        for (i, f) in features.iter_mut().enumerate() {
            *f = seed * (i as f64 + 0.1) / 3.0;
        }
        DatasetRow {
            features,
            label: ActionIndex::new(label).unwrap(),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let rows = vec![row(1.7, 0), row(-0.3, 14), row(1e-9, 7)];
        let mut buf = Vec::new();
        write_dataset(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().all(|l| l.split(',').count() == 63));
        assert_eq!(parse_dataset(&text, Path::new("d.csv")).unwrap(), rows);
    }

    #[test]
    fn header_is_optional() {
        let body = format_row(&row(2.0, 3));
        let header: Vec<String> = (0..63).map(|i| format!("c{i}")).collect();
        let text = format!("{}\n{body}\n", header.join(","));
        assert_eq!(parse_dataset(&text, Path::new("d.csv")).unwrap().len(), 1);
    }

    #[test]
    fn errors_name_the_line() {
        let good = format_row(&row(1.0, 2));
        let mut lines = vec![good.clone(); 9];
        lines[6] = good.rsplit_once(',').unwrap().0.to_string();
        match parse_dataset(&lines.join("\n"), Path::new("d.csv")) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 7);
                assert!(message.contains("62"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        lines[6] = format!("{},15", good.rsplit_once(',').unwrap().0);
        assert!(matches!(
            parse_dataset(&lines.join("\n"), Path::new("d.csv")),
            Err(Error::Parse { line: 7, .. })
        ));
    }
}
