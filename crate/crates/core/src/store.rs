//! On-disk template store and nearest-template recognition.
//!
//! Each enrolled utterance lives in `<label>.<k>.tpl`:
//!
//! ```text
//! MFCCTPL 1
//! label <label>
//! fingerprint <canonical front-end config>
//! shape <T> <D>
//! <T lines of D space-separated reals, 17 significant digits>
//! ```
//!
//! A store never mixes fingerprints. Concurrent writers to one directory are
//! not supported.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::csv::fmt_real;
use crate::dtw::{dtw_align, DtwConfig};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::frontend::FrontEndConfig;
use crate::matrix::Matrix;

const MAGIC: &str = "MFCCTPL 1";
const EXTENSION: &str = "tpl";

/// A labeled reference utterance.
#[derive(Clone, Debug, PartialEq)]
pub struct Template {
    pub label: String,
    pub features: FeatureMatrix,
}

impl Template {
    pub fn new(label: impl Into<String>, features: FeatureMatrix) -> Result<Self> {
        let label = label.into();
        validate_label(&label)?;
        Ok(Self { label, features })
    }

    pub fn fingerprint(&self) -> String {
        self.features.fingerprint()
    }

    pub fn to_text(&self) -> String {
        let m = self.features.matrix();
        let mut out = format!(
            "{MAGIC}\nlabel {}\nfingerprint {}\nshape {} {}\n",
            self.label,
            self.fingerprint(),
            m.rows(),
            m.cols()
        );
        for row in m.iter_rows() {
            let fields: Vec<String> = row.iter().map(|v| fmt_real(*v)).collect();
            out.push_str(&fields.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the `.tpl` text format; `path` is only used in error messages.
    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let corrupt = |reason: String| Error::CorruptTemplate {
            path: path.to_path_buf(),
            reason,
        };
        let mut lines = text.lines();
        let mut header = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| corrupt(format!("missing `{key}` line")))?;
            line.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix(' '))
                .map(str::to_owned)
                .ok_or_else(|| corrupt(format!("expected `{key} ...`, found `{line}`")))
        };

        if header("MFCCTPL")? != "1" {
            return Err(corrupt("bad magic or unsupported version".into()));
        }
        let label = header("label")?;
        validate_label(&label).map_err(|e| corrupt(e.to_string()))?;
        let fingerprint = header("fingerprint")?;
        let config = FrontEndConfig::from_fingerprint(&fingerprint).map_err(|e| corrupt(e.to_string()))?;
        let shape = header("shape")?;
        let (rows, cols) = shape
            .split_once(' ')
            .and_then(|(t, d)| Some((t.parse::<usize>().ok()?, d.parse::<usize>().ok()?)))
            .ok_or_else(|| corrupt(format!("bad shape `{shape}`")))?;
        if cols != config.feature_dims() {
            return Err(corrupt(format!(
                "shape has {cols} columns but the fingerprint implies {}",
                config.feature_dims()
            )));
        }

        let mut data = Vec::with_capacity(rows * cols);
        for t in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| corrupt(format!("expected {rows} rows, found {t}")))?;
            let before = data.len();
            for field in line.split(' ') {
                let v = field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| corrupt(format!("row {}: `{field}` is not a finite number", t + 1)))?;
                data.push(v);
            }
            if data.len() - before != cols {
                return Err(corrupt(format!(
                    "row {} has {} fields, expected {cols}",
                    t + 1,
                    data.len() - before
                )));
            }
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(corrupt("trailing data after the declared rows".into()));
        }

        let features = FeatureMatrix::new(Matrix::from_vec(rows, cols, data), config)
            .map_err(|e| corrupt(e.to_string()))?;
        Ok(Self { label, features })
    }
}

/// Labels are non-empty and free of whitespace and path separators.
pub fn validate_label(label: &str) -> Result<()> {
    let bad = label.is_empty()
        || label.chars().any(|c| c.is_whitespace() || c == '/' || c == '\\')
        || label == "."
        || label == "..";
    if bad {
        return Err(Error::InvalidLabel(label.to_owned()));
    }
    Ok(())
}

/// One enrolled utterance and where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct StoredTemplate {
    pub index: usize,
    pub path: PathBuf,
    pub template: Template,
}

/// Templates of one directory, grouped by label in lexicographic order.
#[derive(Clone, Debug)]
pub struct Store {
    dir: PathBuf,
    fingerprint: Option<String>,
    entries: BTreeMap<String, Vec<StoredTemplate>>,
}

impl Store {
    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Shared fingerprint of every template, `None` while empty.
    pub fn fingerprint(&self) -> Option<&str> {
        self.fingerprint.as_deref()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of templates.
    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get(&self, label: &str) -> &[StoredTemplate] {
        self.entries.get(label).map_or(&[], Vec::as_slice)
    }

    pub fn templates(&self) -> impl Iterator<Item = &StoredTemplate> {
        self.entries.values().flatten()
    }

    fn insert(&mut self, stored: StoredTemplate) -> Result<()> {
        let fp = stored.template.fingerprint();
        match &self.fingerprint {
            Some(existing) if *existing != fp => {
                return Err(Error::MixedFingerprints {
                    first: existing.clone(),
                    second: fp,
                })
            }
            Some(_) => {}
            None => self.fingerprint = Some(fp),
        }
        let list = self.entries.entry(stored.template.label.clone()).or_default();
        let pos = list.partition_point(|t| t.index < stored.index);
        list.insert(pos, stored);
        Ok(())
    }
}

fn template_file_name(label: &str, index: usize) -> String {
    format!("{label}.{index}.{EXTENSION}")
}

/// Splits `<label>.<k>.tpl`; `None` when the name does not follow the layout.
fn parse_file_name(name: &str) -> Option<(&str, usize)> {
    let stem = name.strip_suffix(".tpl")?;
    let (label, index) = stem.rsplit_once('.')?;
    let index: usize = index.parse().ok().filter(|&k| k >= 1)?;
    (!label.is_empty()).then_some((label, index))
}

/// Loads every `*.tpl` file in `dir`.
pub fn load_store(dir: impl AsRef<Path>) -> Result<Store> {
    let dir = dir.as_ref();
    let listing = fs::read_dir(dir).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Error::MissingFile(dir.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let mut paths = Vec::new();
    for entry in listing {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == EXTENSION) && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();

    let mut store = Store {
        dir: dir.to_path_buf(),
        fingerprint: None,
        entries: BTreeMap::new(),
    };
    for path in paths {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_owned();
        let corrupt = |reason: String| Error::CorruptTemplate {
            path: path.clone(),
            reason,
        };
        let (file_label, index) =
            parse_file_name(&name).ok_or_else(|| corrupt("file name is not `<label>.<k>.tpl`".into()))?;
        let text = fs::read_to_string(&path).map_err(|e| corrupt(e.to_string()))?;
        let template = Template::from_text(&text, &path)?;
        if template.label != file_label {
            return Err(corrupt(format!(
                "label `{}` does not match file name label `{file_label}`",
                template.label
            )));
        }
        store.insert(StoredTemplate {
            index,
            path: path.clone(),
            template,
        })?;
    }
    Ok(store)
}

/// Writes `template` as the next free `<label>.<k>.tpl` and adds it to the
/// store. Returns the written path.
pub fn save_template(store: &mut Store, template: Template) -> Result<PathBuf> {
    validate_label(&template.label)?;
    if let Some(expected) = store.fingerprint() {
        let actual = template.fingerprint();
        if expected != actual {
            return Err(Error::FingerprintMismatch {
                expected: expected.to_owned(),
                actual,
            });
        }
    }
    let text = template.to_text();
    let mut index = store.get(&template.label).last().map_or(1, |t| t.index + 1);
    let path = loop {
        let path = store.dir.join(template_file_name(&template.label, index));
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut file) => {
                file.write_all(text.as_bytes())?;
                break path;
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => index += 1,
            Err(e) => return Err(e.into()),
        }
    };
    store.insert(StoredTemplate {
        index,
        path: path.clone(),
        template,
    })?;
    Ok(path)
}

/// Labels ranked by their best template score, best first.
#[derive(Clone, Debug, PartialEq)]
pub struct Ranking {
    /// `(label, score)` ascending by score, ties by label.
    pub entries: Vec<(String, f64)>,
    /// DP cells evaluated across every comparison.
    pub cells_visited: u64,
}

impl Ranking {
    pub fn best(&self) -> Option<&(String, f64)> {
        self.entries.first()
    }
}

/// Aligns `query` against every template; each label scores the minimum over
/// its templates. Templates the run-length limit cannot reach score `+inf`.
pub fn recognize(store: &Store, query: &FeatureMatrix, cfg: &DtwConfig) -> Result<Ranking> {
    let expected = store.fingerprint().ok_or(Error::NoTemplates)?;
    let actual = query.fingerprint();
    if expected != actual {
        return Err(Error::FingerprintMismatch {
            expected: expected.to_owned(),
            actual,
        });
    }

    let mut cells_visited = 0;
    let mut entries = Vec::new();
    for (label, list) in &store.entries {
        let mut best = f64::INFINITY;
        for stored in list {
            let score = match dtw_align(query.matrix(), stored.template.features.matrix(), cfg) {
                Ok(w) => {
                    cells_visited += w.cells_visited;
                    w.score(cfg.normalize)
                }
                Err(Error::InfeasibleConstraints { .. }) => {
                    // every in-band cell was still filled
                    cells_visited += band_cells(query.num_frames(), stored.template.features.num_frames(), cfg);
                    f64::INFINITY
                }
                Err(e) => return Err(e),
            };
            best = best.min(score);
        }
        entries.push((label.clone(), best));
    }
    entries.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(Ranking {
        entries,
        cells_visited,
    })
}

fn band_cells(n: usize, m: usize, cfg: &DtwConfig) -> u64 {
    let width = cfg.band_radius.map_or(usize::MAX, |r| r.max(n.abs_diff(m)));
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(width);
            let hi = i.saturating_add(width).min(m - 1);
            (hi + 1).saturating_sub(lo) as u64
        })
        .sum()
}
