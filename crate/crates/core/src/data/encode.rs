use super::{ColumnKind, ColumnSchema, Dataset, Profile};
use crate::error::{Error, Result};

/// One-hot encode every categorical feature column. Indicator columns are
/// named `<column>_<category>` and take the original column's position.
/// The target column is left alone.
pub fn encode_categoricals(d: &Dataset) -> Dataset {
    let mut columns = Vec::with_capacity(d.n_cols());
    let mut values = Vec::with_capacity(d.n_cols());
    let mut target = 0;
    for (c, schema) in d.columns().iter().enumerate() {
        if c == d.target_index() {
            target = columns.len();
        }
        if schema.kind != ColumnKind::Categorical || c == d.target_index() {
            columns.push(schema.clone());
            values.push(d.values(c).to_vec());
            continue;
        }
        if schema.categories.len() == 1 {
            log::warn!("column {:?} has a single category; its indicator is constant", schema.name);
        }
        let col = d.values(c);
        for (k, cat) in schema.categories.iter().enumerate() {
            columns.push(ColumnSchema::binary(format!("{}_{}", schema.name, cat)));
            values.push(col.iter().map(|&v| if v as usize == k { 1.0 } else { 0.0 }).collect());
        }
    }
    let mut out = Dataset::new(columns, values, target).expect("encoding preserves shape");
    out.set_cleaning(d.cleaning().clone());
    out
}

/// Map the label column to 0 = normal/benign, 1 = attack and rename it
/// `target`.
pub fn binarize_target(d: &Dataset, profile: Profile) -> Result<Dataset> {
    let t = d.target_index();
    let schema = d.column(t);
    let mapped: Vec<f64> = match schema.kind {
        ColumnKind::Categorical => {
            let lut = schema
                .categories
                .iter()
                .map(|c| profile.label_value(c).ok_or_else(|| Error::UnknownLabel(c.clone())))
                .collect::<Result<Vec<f64>>>()?;
            d.target().iter().map(|&v| lut[v as usize]).collect()
        }
        ColumnKind::Binary | ColumnKind::Numeric => {
            if let Some(bad) = d.target().iter().find(|&&v| v != 0.0 && v != 1.0) {
                return Err(Error::UnknownLabel(bad.to_string()));
            }
            d.target().to_vec()
        }
    };
    let mut columns = d.columns().to_vec();
    columns[t] = ColumnSchema::binary("target");
    let mut values = d.all_values().to_vec();
    values[t] = mapped;
    let mut out = Dataset::new(columns, values, t)?;
    out.set_cleaning(d.cleaning().clone());
    Ok(out)
}
