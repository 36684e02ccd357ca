//! CSV ingestion and result serialization.
//!
//! Every writer is byte-deterministic: rows follow a fixed order and reals
//! use [`fmt_real`], a fixed 12-significant-digit decimal rendering.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use tdck_core::engine::RunRecord;
use tdck_core::graph::{export_dot, DotOptions};
use tdck_core::preprocess::{RawRow, RawTable};
use tdck_core::{Dataset, EntityId, EvolutionGraph, Partition};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed CSV in {path}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error(transparent)]
    Model(#[from] tdck_core::Error),
}

pub type Result<T> = std::result::Result<T, DataError>;

/// Column selection for [`load_csv`]. With everything `None`, the first
/// column is the entity, the second the timestamp and the rest features.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schema {
    pub entity_column: Option<String>,
    pub time_column: Option<String>,
    pub features: Option<Vec<String>>,
}

/// Renders a real with 12 significant digits: plain decimal notation, or
/// scientific for magnitudes below 1e-6.
pub fn fmt_real(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return format!("{:.11}", 0.0);
    }
    // The exponent is taken after rounding to 12 digits, so 999.9999999999
    // renders as 1000.00000000 rather than gaining a digit.
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if exp < -6 {
        return sci;
    }
    let decimals = (11 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> DataError + '_ {
    move |source| DataError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> DataError {
    DataError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c == "NA"
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| parse_err(path, 1, format!("no column named `{name}`")))
}

pub fn load_csv(path: &Path, schema: &Schema) -> Result<RawTable> {
    let file = File::open(path).map_err(io_err(path))?;
    read_csv(file, schema, path)
}

/// Parses a table from any reader; `origin` is used in error messages.
pub fn read_csv<R: Read>(reader: R, schema: &Schema, origin: &Path) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_err(origin))?.clone();
    if headers.len() < 3 {
        return Err(parse_err(
            origin,
            1,
            "need an entity column, a time column and at least one attribute",
        ));
    }
    let entity_idx = match &schema.entity_column {
        Some(name) => column(&headers, name, origin)?,
        None => 0,
    };
    let time_idx = match &schema.time_column {
        Some(name) => column(&headers, name, origin)?,
        None => 1,
    };
    if entity_idx == time_idx {
        return Err(parse_err(origin, 1, "entity and time columns coincide"));
    }
    let feature_idx: Vec<usize> = match &schema.features {
        Some(names) => names
            .iter()
            .map(|n| column(&headers, n, origin))
            .collect::<Result<_>>()?,
        None => (0..headers.len())
            .filter(|&k| k != entity_idx && k != time_idx)
            .collect(),
    };

    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err(origin))?;
        let line = record.position().map_or(0, |p| p.line());
        let entity = record[entity_idx].trim().to_string();
        if entity.is_empty() {
            return Err(parse_err(origin, line, "empty entity label"));
        }
        let raw_t = record[time_idx].trim();
        let timestamp: f64 = raw_t
            .parse()
            .map_err(|_| parse_err(origin, line, format!("unparseable timestamp `{raw_t}`")))?;
        let values = feature_idx
            .iter()
            .map(|&k| {
                let cell = &record[k];
                if is_missing(cell) {
                    Ok(None)
                } else {
                    cell.trim().parse::<f64>().map(Some).map_err(|_| {
                        parse_err(origin, line, format!("unparseable value `{}`", cell.trim()))
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(RawRow {
            entity,
            timestamp,
            values,
        });
    }
    Ok(RawTable {
        entity_column: headers[entity_idx].trim().to_string(),
        time_column: headers[time_idx].trim().to_string(),
        attributes: feature_idx.iter().map(|&k| headers[k].trim().to_string()).collect(),
        rows,
    })
}

fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(io_err(path))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file)))
}

fn finish(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    w.flush().map_err(io_err(path))
}

/// Observation indices ordered by entity label, then timestamp.
fn sorted_indices(dataset: &Dataset) -> Vec<usize> {
    (0..dataset.entity_count())
        .flat_map(|e| dataset.entity_series(e).iter().copied())
        .collect()
}

/// Writes a dataset as `entity,time,<attributes>`.
pub fn write_dataset(dataset: &Dataset, attributes: &[String], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let mut header = vec!["entity".to_string(), "time".to_string()];
    if attributes.len() == dataset.dimension() {
        header.extend(attributes.iter().cloned());
    } else {
        header.extend((0..dataset.dimension()).map(|k| format!("f_{k}")));
    }
    w.write_record(&header).map_err(csv_err(path))?;
    for i in sorted_indices(dataset) {
        let o = dataset.observation(i);
        let mut row = vec![o.entity.as_str().to_string(), format!("{}", o.timestamp)];
        row.extend(o.description.iter().map(|&v| fmt_real(v)));
        w.write_record(&row).map_err(csv_err(path))?;
    }
    finish(w, path)
}

/// `entity,timestamp,cluster` rows sorted by entity then timestamp.
pub fn write_assignments(dataset: &Dataset, partition: &Partition, path: &Path) -> Result<()> {
    partition.validate(dataset)?;
    let mut w = create(path)?;
    w.write_record(["entity", "timestamp", "cluster"])
        .map_err(csv_err(path))?;
    for i in sorted_indices(dataset) {
        let o = dataset.observation(i);
        w.write_record([
            o.entity.as_str().to_string(),
            format!("{}", o.timestamp),
            partition.cluster_of(i).to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    finish(w, path)
}

/// Reads an assignments file back into labels indexed like `dataset`.
/// Returns the labels and the cluster count (largest label plus one).
pub fn read_assignments(dataset: &Dataset, path: &Path) -> Result<(Vec<usize>, usize)> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut rdr = csv::Reader::from_reader(file);
    let headers = rdr.headers().map_err(csv_err(path))?.clone();
    let expect = ["entity", "timestamp", "cluster"];
    if headers.len() != 3 || headers.iter().zip(expect).any(|(h, e)| h.trim() != e) {
        return Err(parse_err(path, 1, "expected header `entity,timestamp,cluster`"));
    }
    let mut labels: Vec<Option<usize>> = vec![None; dataset.len()];
    for record in rdr.records() {
        let record = record.map_err(csv_err(path))?;
        let line = record.position().map_or(0, |p| p.line());
        let entity = EntityId::new(record[0].trim())
            .map_err(|_| parse_err(path, line, "empty entity label"))?;
        let t: f64 = record[1]
            .trim()
            .parse()
            .map_err(|_| parse_err(path, line, "unparseable timestamp"))?;
        let cluster: usize = record[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(path, line, "cluster must be a non-negative integer"))?;
        let i = dataset.find(&entity, t).ok_or_else(|| {
            parse_err(path, line, format!("no observation for `{entity}` at {t}"))
        })?;
        if labels[i].replace(cluster).is_some() {
            return Err(parse_err(path, line, "observation assigned twice"));
        }
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            l.ok_or_else(|| {
                let o = dataset.observation(i);
                parse_err(
                    path,
                    0,
                    format!("observation `{}` at {} is not assigned", o.entity, o.timestamp),
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let clusters = labels.iter().max().map_or(0, |&m| m + 1);
    Ok((labels, clusters))
}

/// `cluster,mu_t,f_0..f_{D-1}`, one row per cluster.
pub fn write_centroids(partition: &Partition, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let d = partition.centroid(0).description.len();
    let mut header = vec!["cluster".to_string(), "mu_t".to_string()];
    header.extend((0..d).map(|k| format!("f_{k}")));
    w.write_record(&header).map_err(csv_err(path))?;
    for (j, c) in partition.centroids().iter().enumerate() {
        let mut row = vec![j.to_string(), fmt_real(c.timestamp)];
        row.extend(c.description.iter().map(|&v| fmt_real(v)));
        w.write_record(&row).map_err(csv_err(path))?;
    }
    finish(w, path)
}

/// Reads a centroids file written by [`write_centroids`].
pub fn read_centroids(path: &Path) -> Result<Vec<tdck_core::Centroid>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err(path))?;
        let line = record.position().map_or(0, |p| p.line());
        let nums = record
            .iter()
            .skip(1)
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| parse_err(path, line, "unparseable centroid value"))?;
        if nums.len() < 2 {
            return Err(parse_err(path, line, "centroid row needs mu_t and a description"));
        }
        let j: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(path, line, "bad cluster index"))?;
        if j != out.len() {
            return Err(parse_err(path, line, "cluster rows must be 0, 1, 2, ..."));
        }
        out.push(tdck_core::Centroid::new(nums[0], nums[1..].to_vec()));
    }
    Ok(out)
}

pub const METRICS_HEADER: [&str; 7] = ["run", "seed", "J", "MDvar", "Tvar", "ShaP", "iterations"];

/// One row per run: `run,seed,J,MDvar,Tvar,ShaP,iterations`.
pub fn write_metrics(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(METRICS_HEADER).map_err(csv_err(path))?;
    for r in records {
        w.write_record([
            r.run.to_string(),
            r.seed.to_string(),
            fmt_real(r.objective),
            fmt_real(r.mdvar),
            fmt_real(r.tvar),
            fmt_real(r.shap),
            r.iterations.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    finish(w, path)
}

/// Weighted adjacency as an `m × m` table under a header of cluster ids.
pub fn write_adjacency(graph: &EvolutionGraph, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let m = graph.clusters;
    w.write_record((0..m).map(|j| format!("c{j}")))
        .map_err(csv_err(path))?;
    for p in 0..m {
        w.write_record((0..m).map(|q| fmt_real(graph.weight(p, q))))
            .map_err(csv_err(path))?;
    }
    finish(w, path)
}

pub fn write_dot(graph: &EvolutionGraph, options: DotOptions, path: &Path) -> Result<()> {
    write_text(&export_dot(graph, options), path)
}

pub fn write_text(text: &str, path: &Path) -> Result<()> {
    let mut f = File::create(path).map_err(io_err(path))?;
    f.write_all(text.as_bytes()).map_err(io_err(path))
}
