//! Directory persistence for a project.
//!
//! ```text
//! project.json              manifest
//! datasets/<slot>.csv       records in dataset column order
//! datasets/<slot>.merge.jsonl
//! selection.jsonl           append-only selection log
//! warnings.jsonl            ingest warnings
//! .lock                     held while a writer has the project open
//! ```

mod record_csv;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::IngestWarning;
use crate::model::{Dataset, MergeEvent};
use crate::project::{Manifest, Project};
use crate::selection::SelectionEvent;

pub use record_csv::{header, records_from_csv, records_to_csv};

pub const MANIFEST_FILE: &str = "project.json";
pub const SELECTION_LOG: &str = "selection.jsonl";
pub const WARNINGS_FILE: &str = "warnings.jsonl";
pub const LOCK_FILE: &str = ".lock";

/// Writes via a sibling temp file and rename so readers never see partial files.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".into(),
    });
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(contents).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn to_jsonl<T: Serialize>(items: &[T]) -> Result<String> {
    let mut s = String::new();
    for i in items {
        s.push_str(&serde_json::to_string(i)?);
        s.push('\n');
    }
    Ok(s)
}

pub fn from_jsonl<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Advisory single-writer lock, released on drop.
#[derive(Debug)]
pub struct Lock {
    path: PathBuf,
}

impl Lock {
    pub fn acquire(root: &Path) -> Result<Lock> {
        let path = root.join(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Lock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::precondition_with(
                "the project is locked by another writer",
                vec![format!("remove {} if no other process is running", path.display())],
            )),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// A project directory opened for writing.
#[derive(Debug)]
pub struct ProjectStore {
    root: PathBuf,
    _lock: Lock,
}

fn dataset_paths(root: &Path, slot: &str) -> (PathBuf, PathBuf) {
    let base = root.join("datasets").join(slot);
    let name = base.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    (base.with_file_name(format!("{name}.csv")), base.with_file_name(format!("{name}.merge.jsonl")))
}

fn manifest_path(root: &Path) -> PathBuf {
    root.join(MANIFEST_FILE)
}

impl ProjectStore {
    /// Creates the directory layout for a new project.
    pub fn create(root: &Path, project: &Project) -> Result<ProjectStore> {
        if manifest_path(root).exists() {
            return Err(Error::precondition(format!("{} already contains a project", root.display())));
        }
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        let store = ProjectStore {
            root: root.to_path_buf(),
            _lock: Lock::acquire(root)?,
        };
        store.save(project)?;
        Ok(store)
    }

    pub fn open(root: &Path) -> Result<ProjectStore> {
        if !manifest_path(root).exists() {
            return Err(Error::precondition(format!("no project found at {}", root.display())));
        }
        Ok(ProjectStore {
            root: root.to_path_buf(),
            _lock: Lock::acquire(root)?,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn load(&self) -> Result<Project> {
        load(&self.root)
    }

    pub fn save(&self, project: &Project) -> Result<()> {
        let m = &project.manifest;
        for (slot, d) in project.datasets() {
            let (csv_path, log_path) = dataset_paths(&self.root, slot);
            if slot.starts_with("raw/") && csv_path.exists() {
                continue;
            }
            write_atomic(&csv_path, records_to_csv(d.records(), &m.metadata_classes)?.as_bytes())?;
            write_atomic(&log_path, to_jsonl(d.merge_log())?.as_bytes())?;
        }
        write_atomic(&self.root.join(SELECTION_LOG), to_jsonl(project.selection_events())?.as_bytes())?;
        write_atomic(&self.root.join(WARNINGS_FILE), to_jsonl(project.warnings())?.as_bytes())?;
        write_atomic(&manifest_path(&self.root), (serde_json::to_string_pretty(m)? + "\n").as_bytes())
    }

    /// Writes only the selection log, for votes and decisions.
    pub fn save_selection(&self, project: &Project) -> Result<()> {
        write_atomic(&self.root.join(SELECTION_LOG), to_jsonl(project.selection_events())?.as_bytes())
    }
}

/// Reads a project without taking the lock.
pub fn load(root: &Path) -> Result<Project> {
    let mpath = manifest_path(root);
    if !mpath.exists() {
        return Err(Error::precondition(format!("no project found at {}", root.display())));
    }
    let manifest: Manifest = serde_json::from_str(&read_text(&mpath)?)?;
    let mut datasets = BTreeMap::new();
    for (slot, info) in &manifest.datasets {
        let (csv_path, log_path) = dataset_paths(root, slot);
        let records = records_from_csv(&read_text(&csv_path)?)?;
        let log: Vec<MergeEvent> = if log_path.exists() { from_jsonl(&read_text(&log_path)?)? } else { Vec::new() };
        if records.len() != info.records {
            return Err(Error::integrity(
                format!("{slot} holds {} records but the manifest lists {}", records.len(), info.records),
                vec![csv_path.display().to_string()],
            ));
        }
        datasets.insert(slot.clone(), Dataset::restore(records, log, info.revision)?);
    }
    let sel = root.join(SELECTION_LOG);
    let events: Vec<SelectionEvent> = if sel.exists() { from_jsonl(&read_text(&sel)?)? } else { Vec::new() };
    let wpath = root.join(WARNINGS_FILE);
    let warnings: Vec<IngestWarning> = if wpath.exists() { from_jsonl(&read_text(&wpath)?)? } else { Vec::new() };
    Project::from_parts(manifest, datasets, events, warnings)
}
