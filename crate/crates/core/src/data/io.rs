use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ColumnKind, ColumnSchema, Dataset, Profile, NSL_KDD_COLUMNS};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub profile: Profile,
    /// Target column name for the generic profile; defaults to the last
    /// column.
    pub target: Option<String>,
}

impl From<Profile> for LoadOptions {
    fn from(profile: Profile) -> Self {
        Self { profile, target: None }
    }
}

pub fn load_csv(path: impl AsRef<Path>, profile: Profile) -> Result<Dataset> {
    load_csv_with(&[path.as_ref().to_path_buf()], &profile.into())
}

/// Load every `*.csv` in `dir` (profile file order, then name) as one table.
pub fn load_csv_dir(dir: impl AsRef<Path>, opts: &LoadOptions) -> Result<Dataset> {
    let dir = dir.as_ref();
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort_by_key(|p| {
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        (opts.profile.file_rank(&name), name)
    });
    if files.is_empty() {
        return Err(Error::io(dir, std::io::Error::new(std::io::ErrorKind::NotFound, "no csv files")));
    }
    load_csv_with(&files, opts)
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file))
}

fn cell_text(field: &[u8]) -> String {
    String::from_utf8_lossy(field).trim().to_string()
}

fn is_null(s: &str) -> bool {
    s.is_empty() || s.eq_ignore_ascii_case("nan") || s.eq_ignore_ascii_case("null") || s.eq_ignore_ascii_case("na")
}

fn parse_number(s: &str) -> Option<f64> {
    if is_null(s) {
        return Some(f64::NAN);
    }
    s.parse::<f64>().ok()
}

/// Whether the first record of an NSL-KDD file is data rather than a header.
fn headerless(first: &csv::ByteRecord) -> bool {
    first.get(0).is_some_and(|f| cell_text(f).parse::<f64>().is_ok())
}

struct FileLayout {
    path: PathBuf,
    skip_header: bool,
}

/// Load one or more CSV files sharing a header into a single raw dataset.
pub fn load_csv_with(paths: &[PathBuf], opts: &LoadOptions) -> Result<Dataset> {
    let profile = opts.profile;
    let mut names: Option<Vec<String>> = None;
    let mut layouts = Vec::with_capacity(paths.len());

    for path in paths {
        let mut rdr = reader(path)?;
        let mut first = csv::ByteRecord::new();
        let has_any = rdr.read_byte_record(&mut first)?;
        let (file_names, skip_header) = if !has_any {
            return Err(Error::Empty("csv file has no header row"));
        } else if profile == Profile::NslKdd && headerless(&first) {
            if first.len() != NSL_KDD_COLUMNS.len() {
                return Err(Error::ColumnCount {
                    profile: profile.name(),
                    expected: NSL_KDD_COLUMNS.len(),
                    found: first.len(),
                });
            }
            (NSL_KDD_COLUMNS.iter().map(|s| s.to_string()).collect(), false)
        } else {
            (first.iter().map(cell_text).collect::<Vec<_>>(), true)
        };
        if let Some(expected) = profile.expected_columns() {
            if file_names.len() != expected {
                return Err(Error::ColumnCount {
                    profile: profile.name(),
                    expected,
                    found: file_names.len(),
                });
            }
        }
        match &names {
            None => names = Some(file_names),
            Some(n) if *n != file_names => {
                return Err(Error::Schema(format!("{} has a different header", path.display())));
            }
            Some(_) => {}
        }
        layouts.push(FileLayout {
            path: path.clone(),
            skip_header,
        });
    }
    let names = names.ok_or(Error::Empty("no input files"))?;
    let ncols = names.len();

    let target_name = match (profile.label_column(), &opts.target) {
        (_, Some(t)) => t.clone(),
        (Some(l), None) => l.to_string(),
        (None, None) => names.last().cloned().ok_or(Error::Empty("csv header has no columns"))?,
    };
    let target = names
        .iter()
        .position(|n| *n == target_name)
        .ok_or_else(|| Error::MissingColumn(target_name.clone()))?;

    // Which columns hold text. Profiles fix this up front; the generic
    // profile needs a scan.
    let mut text: Vec<bool> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (i == target && profile != Profile::Generic) || profile.forced_categorical(n))
        .collect();
    if profile == Profile::Generic {
        for_each_record(&layouts, ncols, |_, rec| {
            for (c, field) in rec.iter().enumerate() {
                if !text[c] && parse_number(&cell_text(field)).is_none() {
                    text[c] = true;
                }
            }
            Ok(())
        })?;
    }

    let mut values: Vec<Vec<f64>> = vec![Vec::new(); ncols];
    let mut lookup: Vec<HashMap<String, usize>> = vec![HashMap::new(); ncols];
    let mut categories: Vec<Vec<String>> = vec![Vec::new(); ncols];
    for_each_record(&layouts, ncols, |line, rec| {
        for (c, field) in rec.iter().enumerate() {
            let s = cell_text(field);
            let v = if text[c] {
                if is_null(&s) {
                    f64::NAN
                } else {
                    let next = categories[c].len();
                    let idx = *lookup[c].entry(s.clone()).or_insert_with(|| {
                        categories[c].push(s.clone());
                        next
                    });
                    idx as f64
                }
            } else {
                parse_number(&s).ok_or_else(|| Error::ParseCell {
                    row: line,
                    column: names[c].clone(),
                    value: s.clone(),
                })?
            };
            values[c].push(v);
        }
        Ok(())
    })?;

    let columns = names
        .into_iter()
        .zip(categories)
        .zip(&values)
        .enumerate()
        .map(|(c, ((name, cats), col))| {
            if text[c] {
                ColumnSchema::categorical(name, cats)
            } else if !col.is_empty() && col.iter().filter(|v| v.is_finite()).all(|&v| v == 0.0 || v == 1.0) {
                ColumnSchema::binary(name)
            } else {
                ColumnSchema::numeric(name)
            }
        })
        .collect();
    Dataset::new(columns, values, target)
}

/// Visit every data record with its 1-based line number.
fn for_each_record(
    layouts: &[FileLayout],
    ncols: usize,
    mut f: impl FnMut(usize, &csv::ByteRecord) -> Result<()>,
) -> Result<()> {
    for layout in layouts {
        let mut rdr = reader(&layout.path)?;
        let mut rec = csv::ByteRecord::new();
        let mut line = 0usize;
        while rdr.read_byte_record(&mut rec)? {
            line += 1;
            if line == 1 && layout.skip_header {
                continue;
            }
            if rec.len() == 1 && rec.get(0).is_some_and(|f| f.is_empty()) {
                continue;
            }
            if rec.len() != ncols {
                return Err(Error::Schema(format!(
                    "{} line {line}: {} fields, expected {ncols}",
                    layout.path.display(),
                    rec.len()
                )));
            }
            f(line, &rec)?;
        }
    }
    Ok(())
}

/// JSON sidecar written next to every dataset CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemaSidecar {
    pub columns: Vec<ColumnSchema>,
    pub target: String,
    pub row_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".schema.json");
    PathBuf::from(s)
}

/// Write `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp_name = path.file_name().unwrap_or_default().to_owned();
    tmp_name.push(".tmp");
    let tmp = dir.join(tmp_name);
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub(crate) fn format_value(schema: &ColumnSchema, v: f64) -> String {
    if schema.kind == ColumnKind::Categorical && v.is_finite() {
        if let Some(c) = schema.categories.get(v as usize) {
            return c.clone();
        }
    }
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

/// Write the dataset as CSV with a header, plus its schema sidecar.
pub fn write_dataset(d: &Dataset, csv_path: impl AsRef<Path>, meta: Option<serde_json::Value>) -> Result<()> {
    let csv_path = csv_path.as_ref();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(d.columns().iter().map(|c| c.name.as_str()))?;
    let mut row = Vec::with_capacity(d.n_cols());
    for r in 0..d.row_count() {
        row.clear();
        row.extend(d.columns().iter().zip(d.all_values()).map(|(s, col)| format_value(s, col[r])));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(csv_path, e.into_error()))?;
    let sidecar = SchemaSidecar {
        columns: d.columns().to_vec(),
        target: d.column(d.target_index()).name.clone(),
        row_count: d.row_count(),
        meta,
    };
    write_atomic(csv_path, &bytes)?;
    write_atomic(&sidecar_path(csv_path), &serde_json::to_vec_pretty(&sidecar)?)
}

/// Read a dataset written by [`write_dataset`]. Schema (kinds, bounds,
/// categories) comes from the sidecar, values from the CSV.
pub fn read_dataset(csv_path: impl AsRef<Path>) -> Result<Dataset> {
    let csv_path = csv_path.as_ref();
    let side_path = sidecar_path(csv_path);
    let side_bytes = fs::read(&side_path).map_err(|e| Error::io(&side_path, e))?;
    let side: SchemaSidecar = serde_json::from_slice(&side_bytes)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(csv_path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(csv_path, std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string())),
            _ => Error::Csv(e),
        })?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let names: Vec<&str> = side.columns.iter().map(|c| c.name.as_str()).collect();
    if header != names {
        return Err(Error::Schema(format!("{} header does not match its sidecar", csv_path.display())));
    }
    let lookups: Vec<HashMap<&str, usize>> = side
        .columns
        .iter()
        .map(|c| c.categories.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect())
        .collect();
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(side.row_count); side.columns.len()];
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (c, field) in rec.iter().enumerate() {
            let schema = &side.columns[c];
            let v = if schema.kind == ColumnKind::Categorical {
                if field.is_empty() {
                    f64::NAN
                } else {
                    *lookups[c].get(field).ok_or_else(|| Error::ParseCell {
                        row: r + 2,
                        column: schema.name.clone(),
                        value: field.to_string(),
                    })? as f64
                }
            } else {
                parse_number(field).ok_or_else(|| Error::ParseCell {
                    row: r + 2,
                    column: schema.name.clone(),
                    value: field.to_string(),
                })?
            };
            values[c].push(v);
        }
    }
    let target = side
        .columns
        .iter()
        .position(|c| c.name == side.target)
        .ok_or_else(|| Error::MissingColumn(side.target.clone()))?;
    Dataset::with_schema(side.columns, values, target)
}
