//! Survival CSV: a header with `time`, `status` and one column per feature.
//! Floats are written with 17 significant digits so a write/read round trip
//! is exact.

use std::fmt::Write as _;
use std::path::Path;

use coxnet::SurvivalDataset;
use ndarray::Array2;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
pub struct LoadedData {
    pub dataset: SurvivalDataset,
    /// Feature column names in file order.
    pub feature_names: Vec<String>,
    /// SHA-256 of the file contents.
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn parse_float(path: &Path, row: usize, column: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| CliError::schema(path, format!("row {row}, column {column}: {raw:?} is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::schema(path, format!("row {row}, column {column}: value {raw:?} is not finite")));
    }
    Ok(v)
}

pub fn parse_dataset(path: &Path, bytes: &[u8]) -> Result<LoadedData> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let headers = reader.headers().map_err(|e| CliError::schema(path, format!("unreadable header: {e}")))?.clone();
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    let find = |name: &str| -> Result<usize> {
        let hits: Vec<usize> = names.iter().enumerate().filter(|(_, h)| *h == name).map(|(i, _)| i).collect();
        match hits.as_slice() {
            [i] => Ok(*i),
            [] => Err(CliError::schema(path, format!("missing required column `{name}`"))),
            _ => Err(CliError::schema(path, format!("column `{name}` appears more than once"))),
        }
    };
    let time_col = find("time")?;
    let status_col = find("status")?;
    let feature_cols: Vec<usize> = (0..names.len()).filter(|&i| i != time_col && i != status_col).collect();
    if feature_cols.is_empty() {
        return Err(CliError::schema(path, "no feature columns besides `time` and `status`"));
    }
    if let Some(i) = feature_cols.iter().find(|&&i| names[i].is_empty()) {
        return Err(CliError::schema(path, format!("column {} has an empty name", i + 1)));
    }

    let mut times = Vec::new();
    let mut events = Vec::new();
    let mut values = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| CliError::schema(path, format!("row {row}: {e}")))?;
        times.push(parse_float(path, row, "time", &record[time_col])?);
        let status = match record[status_col].trim() {
            "0" => false,
            "1" => true,
            other => return Err(CliError::schema(path, format!("row {row}, column status: {other:?} is not 0 or 1"))),
        };
        events.push(status);
        for &j in &feature_cols {
            values.push(parse_float(path, row, &names[j], &record[j])?);
        }
    }
    let n = times.len();
    let x = Array2::from_shape_vec((n, feature_cols.len()), values).expect("row lengths checked by the reader");
    let dataset = SurvivalDataset::new(times, events, x)?;
    Ok(LoadedData {
        dataset,
        feature_names: feature_cols.iter().map(|&j| names[j].clone()).collect(),
        sha256: sha256_hex(bytes),
    })
}

pub fn read_dataset(path: &Path) -> Result<LoadedData> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    parse_dataset(path, &bytes)
}

/// Default feature names `x1..xp`.
pub fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

pub fn format_dataset(data: &SurvivalDataset, names: &[String]) -> String {
    assert_eq!(names.len(), data.p(), "one name per feature column");
    let mut out = String::from("time,status");
    for name in names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let x = data.covariates();
    for i in 0..data.n() {
        write!(out, "{:.16e},{}", data.times()[i], u8::from(data.events()[i])).unwrap();
        for v in x.row(i) {
            write!(out, ",{v:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use coxnet::{generate, Model, SimScenario};

    fn parse(text: &str) -> Result<LoadedData> {
        parse_dataset(Path::new("test.csv"), text.as_bytes())
    }

    #[test]
    fn round_trip_is_exact() {
        let g = generate(&SimScenario { model: Model::Model2, n: 40, p: 12, rho: 0.3, c: 2.0, seed: 3 }).unwrap();
        let text = format_dataset(&g.dataset, &default_names(12));
        let back = parse(&text).unwrap();
        assert_eq!(back.dataset, g.dataset);
        assert_eq!(back.feature_names, default_names(12));
        assert_eq!(format_dataset(&back.dataset, &back.feature_names), text);
    }

    #[test]
    fn columns_may_appear_in_any_order() {
        let d = parse("gene_a,status,time\n1.0,1,3.0\n2.0,0,1.5\n0.5,1,2.0\n").unwrap();
        assert_eq!(d.feature_names, vec!["gene_a"]);
        assert_eq!(d.dataset.times(), &[3.0, 1.5, 2.0]);
        assert_eq!(d.dataset.events(), &[true, false, true]);
    }

    #[test]
    fn schema_violations() {
        let cases = [
            ("time,x1\n1,2\n3,4\n", "status"),
            ("status,x1\n1,2\n0,4\n", "time"),
            ("time,status\n1,1\n2,0\n", "feature"),
            ("time,status,x1\n1,2,0.5\n2,0,1\n", "0 or 1"),
            ("time,status,x1\n1,1,abc\n2,0,1\n", "not a number"),
            ("time,status,x1\n1,1,0.5\n2,0\n", "row 2"),
            ("time,status,x1\n1,1,NaN\n2,0,1\n", "not finite"),
            ("time,status,time,x1\n1,1,1,1\n", "more than once"),
        ];
        for (text, needle) in cases {
            let err = parse(text).unwrap_err();
            assert!(matches!(err, CliError::Schema { .. }), "{text:?}: {err}");
            assert!(err.to_string().contains(needle), "{text:?}: {err}");
            assert_eq!(err.exit_code(), 3);
        }
    }

    #[test]
    fn dataset_errors_are_data_errors() {
        let err = parse("time,status,x1\n1,0,0.5\n2,0,1\n").unwrap_err();
        assert!(matches!(err, CliError::Core(coxnet::Error::NoEvents)));
        assert_eq!(err.exit_code(), 3);
    }
}
