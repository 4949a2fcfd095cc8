//! Weighted averaging of f32 checkpoints stored as `manifest.json` plus one
//! little-endian `.bin` payload per tensor.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MANIFEST: &str = "manifest.json";
pub const DEFAULT_ALPHA: f64 = 0.5;
const CHUNK: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub shape: Vec<usize>,
    pub dtype: String,
    pub file: String,
}

impl TensorSpec {
    pub fn numel(&self) -> usize {
        self.shape.iter().product()
    }
}

pub type Manifest = BTreeMap<String, TensorSpec>;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: invalid manifest: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("tensor {name}: unsupported dtype {dtype} (only f32)")]
    DType { name: String, dtype: String },
    #[error("tensor {name}: payload is {actual} bytes, shape needs {expected}")]
    Size { name: String, expected: u64, actual: u64 },
    #[error("tensor names differ: only in base {only_base:?}, only in tuned {only_tuned:?}")]
    NameMismatch { only_base: Vec<String>, only_tuned: Vec<String> },
    #[error("tensor {name}: shape {base:?} in base but {tuned:?} in tuned")]
    ShapeMismatch { name: String, base: Vec<usize>, tuned: Vec<usize> },
    #[error("alpha must lie in [0, 1], got {0}")]
    Alpha(f64),
    #[error("output directory must differ from the inputs")]
    OutputIsInput,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CheckpointError + '_ {
    move |source| CheckpointError::Io { path: path.to_path_buf(), source }
}

/// A checkpoint directory with a validated manifest.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl Checkpoint {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, CheckpointError> {
        let dir = dir.as_ref().to_path_buf();
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| CheckpointError::Manifest { path: path.clone(), message: e.to_string() })?;
        let mut files = std::collections::HashSet::new();
        for (name, spec) in &manifest {
            if spec.dtype != "f32" {
                return Err(CheckpointError::DType { name: name.clone(), dtype: spec.dtype.clone() });
            }
            let plain = Path::new(&spec.file).file_name().is_some_and(|f| f == spec.file.as_str());
            if !plain || !files.insert(spec.file.as_str()) {
                return Err(CheckpointError::Manifest {
                    path: path.clone(),
                    message: format!("tensor {name}: bad or duplicate file name {:?}", spec.file),
                });
            }
            let bin = dir.join(&spec.file);
            let actual = fs::metadata(&bin).map_err(io_err(&bin))?.len();
            let expected = spec.numel() as u64 * 4;
            if actual != expected {
                return Err(CheckpointError::Size { name: name.clone(), expected, actual });
            }
        }
        Ok(Checkpoint { dir, manifest })
    }

    pub fn read_tensor(&self, name: &str) -> Result<Vec<f32>, CheckpointError> {
        let spec = &self.manifest[name];
        let path = self.dir.join(&spec.file);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        Ok(bytes.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect())
    }

    /// Bytes of the largest payload.
    pub fn largest_tensor_bytes(&self) -> u64 {
        self.manifest.values().map(|s| s.numel() as u64 * 4).max().unwrap_or(0)
    }
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' }).collect()
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<(), CheckpointError> {
    let tmp = dir.join(format!("{MANIFEST}.tmp"));
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes") + "\n";
    let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(text.as_bytes()).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    let path = dir.join(MANIFEST);
    fs::rename(&tmp, &path).map_err(io_err(&path))
}

/// Writes in-memory tensors as a checkpoint directory.
pub fn save_checkpoint(
    dir: impl AsRef<Path>,
    tensors: &[(&str, Vec<usize>, &[f32])],
) -> Result<Checkpoint, CheckpointError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut manifest = Manifest::new();
    for (i, (name, shape, data)) in tensors.iter().enumerate() {
        let spec =
            TensorSpec { shape: shape.clone(), dtype: "f32".into(), file: format!("{i:05}_{}.bin", sanitize(name)) };
        if spec.numel() != data.len() {
            return Err(CheckpointError::Size {
                name: name.to_string(),
                expected: spec.numel() as u64 * 4,
                actual: data.len() as u64 * 4,
            });
        }
        let path = dir.join(&spec.file);
        let mut w = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
        for x in data.iter() {
            w.write_all(&x.to_le_bytes()).map_err(io_err(&path))?;
        }
        let f = w.into_inner().map_err(|e| io_err(&path)(e.into_error()))?;
        f.sync_all().map_err(io_err(&path))?;
        manifest.insert(name.to_string(), spec);
    }
    write_manifest(dir, &manifest)?;
    Ok(Checkpoint { dir: dir.to_path_buf(), manifest })
}

/// Weights `(w_base, w_tuned)` for `alpha`. The weight at least one half is
/// taken first and the other is its exact complement, so swapping the
/// inputs and using `1 - alpha` reproduces the same products.
pub fn interpolation_weights(alpha: f64) -> (f64, f64) {
    if alpha >= 0.5 {
        (alpha, 1.0 - alpha)
    } else {
        let w_tuned = 1.0 - alpha;
        (1.0 - w_tuned, w_tuned)
    }
}

fn blend(b: f32, t: f32, w_base: f64, w_tuned: f64) -> f32 {
    if b.to_bits() == t.to_bits() {
        return b;
    }
    (w_base * b as f64 + w_tuned * t as f64) as f32
}

fn check_compatible(base: &Checkpoint, tuned: &Checkpoint) -> Result<(), CheckpointError> {
    let only_base: Vec<String> = base.manifest.keys().filter(|k| !tuned.manifest.contains_key(*k)).cloned().collect();
    let only_tuned: Vec<String> = tuned.manifest.keys().filter(|k| !base.manifest.contains_key(*k)).cloned().collect();
    if !only_base.is_empty() || !only_tuned.is_empty() {
        return Err(CheckpointError::NameMismatch { only_base, only_tuned });
    }
    for (name, spec) in &base.manifest {
        let other = &tuned.manifest[name];
        if spec.shape != other.shape {
            return Err(CheckpointError::ShapeMismatch {
                name: name.clone(),
                base: spec.shape.clone(),
                tuned: other.shape.clone(),
            });
        }
    }
    Ok(())
}

fn same_dir(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

/// Writes `alpha * base + (1 - alpha) * tuned` to `out`, one tensor at a
/// time in fixed-size chunks. The manifest is written last.
pub fn average_checkpoints(
    base: &Checkpoint,
    tuned: &Checkpoint,
    alpha: f64,
    out: impl AsRef<Path>,
) -> Result<Checkpoint, CheckpointError> {
    let out = out.as_ref();
    if !(0.0..=1.0).contains(&alpha) {
        return Err(CheckpointError::Alpha(alpha));
    }
    check_compatible(base, tuned)?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    if same_dir(out, &base.dir) || same_dir(out, &tuned.dir) {
        return Err(CheckpointError::OutputIsInput);
    }
    let (w_base, w_tuned) = interpolation_weights(alpha);
    let mut manifest = Manifest::new();
    for (name, spec) in &base.manifest {
        let dst = out.join(&spec.file);
        let src_base = base.dir.join(&spec.file);
        let src_tuned = tuned.dir.join(&tuned.manifest[name].file);
        if alpha == 1.0 || alpha == 0.0 {
            let src = if alpha == 1.0 { &src_base } else { &src_tuned };
            fs::copy(src, &dst).map_err(io_err(&dst))?;
        } else {
            blend_file(&src_base, &src_tuned, &dst, spec.numel(), w_base, w_tuned)?;
        }
        File::open(&dst).and_then(|f| f.sync_all()).map_err(io_err(&dst))?;
        manifest.insert(name.clone(), spec.clone());
    }
    write_manifest(out, &manifest)?;
    Ok(Checkpoint { dir: out.to_path_buf(), manifest })
}

fn blend_file(a: &Path, b: &Path, dst: &Path, numel: usize, w_base: f64, w_tuned: f64) -> Result<(), CheckpointError> {
    let mut ra = BufReader::new(File::open(a).map_err(io_err(a))?);
    let mut rb = BufReader::new(File::open(b).map_err(io_err(b))?);
    let mut w = BufWriter::new(File::create(dst).map_err(io_err(dst))?);
    let mut buf_a = vec![0u8; CHUNK.min(numel.max(1)) * 4];
    let mut buf_b = vec![0u8; buf_a.len()];
    let mut left = numel;
    while left > 0 {
        let n = left.min(CHUNK) * 4;
        ra.read_exact(&mut buf_a[..n]).map_err(io_err(a))?;
        rb.read_exact(&mut buf_b[..n]).map_err(io_err(b))?;
        for (x, y) in buf_a[..n].chunks_exact_mut(4).zip(buf_b[..n].chunks_exact(4)) {
            let base = f32::from_le_bytes([x[0], x[1], x[2], x[3]]);
            let tuned = f32::from_le_bytes([y[0], y[1], y[2], y[3]]);
            x.copy_from_slice(&blend(base, tuned, w_base, w_tuned).to_le_bytes());
        }
        w.write_all(&buf_a[..n]).map_err(io_err(dst))?;
        left -= n / 4;
    }
    w.flush().map_err(io_err(dst))
}
