//! Output formats.
//!
//! All files are UTF-8 with LF line endings. CSV floats are written with 17
//! significant digits (`{:.16e}`), which round-trips every `f64`. Hull files
//! are named `hulls_t<k>.csv` with header `vertex_index,x1,…,xn`; planar
//! hulls list their vertices counter-clockwise. JSON is pretty-printed with a
//! trailing newline; non-finite numbers become `null`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{HullVertices, Vector};

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn hull_file_name(k: usize) -> String {
    format!("hulls_t{k}.csv")
}

pub fn hull_csv(hull: &HullVertices) -> String {
    let n = hull.dim();
    let mut out = String::from("vertex_index");
    for j in 1..=n {
        let _ = write!(out, ",x{j}");
    }
    out.push('\n');
    for (i, p) in hull.points().iter().enumerate() {
        let _ = write!(out, "{i}");
        for v in p.iter() {
            out.push(',');
            out.push_str(&format_float(*v));
        }
        out.push('\n');
    }
    out
}

/// Vertices of a hull CSV in file order.
pub fn parse_hull_csv(text: &str) -> Result<Vec<Vector>> {
    let bad = |m: String| Error::Parse {
        path: PathBuf::from("<hull csv>"),
        message: m,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"vertex_index") || cols.len() < 2 {
        return Err(bad(format!("unexpected header `{header}`")));
    }
    let n = cols.len() - 1;
    let mut out = Vec::new();
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n + 1 || fields[0].parse::<usize>().ok() != Some(row) {
            return Err(bad(format!("malformed row {row}: `{line}`")));
        }
        let vals = fields[1..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| bad(format!("row {row}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        out.push(Vector::from_vec(vals));
    }
    Ok(out)
}

pub fn json_text(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Output directory that remembers the files written into it.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Paths relative to the root, in write order.
    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn write(&mut self, rel: impl AsRef<Path>, contents: &str) -> Result<()> {
        let rel = rel.as_ref();
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.written.push(rel.to_path_buf());
        Ok(())
    }

    pub fn write_hull(&mut self, dir: impl AsRef<Path>, k: usize, hull: &HullVertices) -> Result<()> {
        self.write(dir.as_ref().join(hull_file_name(k)), &hull_csv(hull))
    }

    pub fn write_json(&mut self, rel: impl AsRef<Path>, value: &serde_json::Value) -> Result<()> {
        self.write(rel, &json_text(value))
    }

    /// Writes via a temporary file and rename so readers never see a partial
    /// file.
    pub fn write_atomic(&mut self, rel: impl AsRef<Path>, contents: &str) -> Result<()> {
        let rel = rel.as_ref();
        let path = self.root.join(rel);
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }
}
