//! On-disk cache of cell lists, boundary matrices and result records.
//!
//! Layout under the cache root: `v1-h{h}-m{m}-{permutable|numbered}/` holding
//! `config.json`, `cells.txt`, one directory of triplet files per matrix kind and
//! `results.jsonl`. A `lock` file marks the directory as in use.

use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use slit_core::complex::{BoundaryMatrices, CellBasis, ComplexCell};
use slit_core::exactlin::SparseIntMatrix;
use slit_core::homology::HomologyRecord;

const FORMAT_VERSION: u32 = 1;
const COMPLETE: &str = "complete";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheKey {
    pub h: usize,
    pub m: usize,
    pub permutable: bool,
}

impl CacheKey {
    fn dir_name(&self) -> String {
        let kind = if self.permutable { "permutable" } else { "numbered" };
        format!("v{FORMAT_VERSION}-h{}-m{}-{kind}", self.h, self.m)
    }

    fn config(&self) -> Value {
        json!({ "format": FORMAT_VERSION, "h": self.h, "m": self.m, "permutable": self.permutable })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Plain,
    Twisted,
}

impl MatrixKind {
    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::Plain => "plain",
            MatrixKind::Twisted => "twisted",
        }
    }
}

/// Exclusive handle on one cache directory; the lock is released on drop.
pub struct JobCache {
    dir: PathBuf,
    key: CacheKey,
}

impl JobCache {
    pub fn open(root: &Path, key: CacheKey) -> Result<JobCache> {
        let dir = root.join(key.dir_name());
        fs::create_dir_all(&dir).with_context(|| format!("creating cache directory {}", dir.display()))?;
        let lock = dir.join("lock");
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => writeln!(f, "{}", std::process::id())?,
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                bail!("cache {} is locked by another job (remove {} if it is stale)", dir.display(), lock.display())
            }
            Err(e) => return Err(e).context("creating lock file"),
        }
        let cache = JobCache { dir, key };
        cache.check_config()?;
        Ok(cache)
    }

    fn check_config(&self) -> Result<()> {
        let path = self.path("config.json");
        let want = self.key.config();
        if path.exists() {
            let text = fs::read_to_string(&path)?;
            let found: Value = serde_json::from_str(&text).with_context(|| format!("reading {}", path.display()))?;
            if found != want {
                bail!("cache {} was written for {found}, not {want}; refusing to overwrite", self.dir.display());
            }
        } else {
            fs::write(&path, format!("{want}\n"))?;
        }
        Ok(())
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn load_cells<C: ComplexCell>(&self) -> Result<Option<CellBasis<C>>> {
        let path = self.path("cells.txt");
        if !path.exists() {
            return Ok(None);
        }
        let basis = CellBasis::<C>::read_cells(BufReader::new(File::open(&path)?))
            .with_context(|| format!("corrupt cell list {}", path.display()))?;
        if basis.h != self.key.h || basis.m != self.key.m || basis.permutable() != self.key.permutable {
            bail!("cell list {} does not belong to this cache", path.display());
        }
        Ok(Some(basis))
    }

    pub fn store_cells<C: ComplexCell>(&self, basis: &CellBasis<C>) -> Result<()> {
        let tmp = self.path("cells.txt.partial");
        let mut w = BufWriter::new(File::create(&tmp)?);
        basis.write_cells(&mut w)?;
        w.flush()?;
        drop(w);
        fs::rename(&tmp, self.path("cells.txt"))?;
        Ok(())
    }

    fn matrix_dir(&self, kind: MatrixKind) -> PathBuf {
        self.path(&format!("matrices-{}", kind.name()))
    }

    pub fn load_matrices(&self, kind: MatrixKind, h: usize) -> Result<Option<BoundaryMatrices>> {
        let dir = self.matrix_dir(kind);
        if !dir.join(COMPLETE).exists() {
            return Ok(None);
        }
        let read = |name: String| -> Result<SparseIntMatrix> {
            let path = dir.join(&name);
            let f = File::open(&path).with_context(|| format!("missing matrix {}", path.display()))?;
            SparseIntMatrix::read_triplets(BufReader::new(f))
                .with_context(|| format!("corrupt matrix {}", path.display()))
        };
        let mut mats = BoundaryMatrices { h, dprime: Default::default(), dsecond: Default::default() };
        for p in 0..=2 * h {
            for q in 0..=h {
                if q >= 1 {
                    mats.dprime.insert((p, q), read(format!("dprime_{p}_{q}.txt"))?);
                }
                if p >= 1 {
                    mats.dsecond.insert((p, q), read(format!("dsecond_{p}_{q}.txt"))?);
                }
            }
        }
        Ok(Some(mats))
    }

    /// Writes every block, then the completion marker, so an interrupted run
    /// is recomputed rather than half-loaded.
    pub fn store_matrices(&self, kind: MatrixKind, mats: &BoundaryMatrices) -> Result<()> {
        let dir = self.matrix_dir(kind);
        fs::create_dir_all(&dir)?;
        let _ = fs::remove_file(dir.join(COMPLETE));
        let write = |name: String, m: &SparseIntMatrix| -> Result<()> {
            let mut w = BufWriter::new(File::create(dir.join(name))?);
            m.write_triplets(&mut w)?;
            w.flush()?;
            Ok(())
        };
        for (&(p, q), m) in &mats.dprime {
            write(format!("dprime_{p}_{q}.txt"), m)?;
        }
        for (&(p, q), m) in &mats.dsecond {
            write(format!("dsecond_{p}_{q}.txt"), m)?;
        }
        fs::write(dir.join(COMPLETE), "")?;
        Ok(())
    }

    /// Replaces any earlier record with the same coefficients.
    pub fn store_record(&self, record: &HomologyRecord) -> Result<()> {
        let path = self.path("results.jsonl");
        let mut lines: Vec<String> = Vec::new();
        if path.exists() {
            for line in fs::read_to_string(&path)?.lines() {
                let old: HomologyRecord =
                    serde_json::from_str(line).with_context(|| format!("corrupt record in {}", path.display()))?;
                if old.coeff != record.coeff {
                    lines.push(line.to_string());
                }
            }
        }
        lines.push(serde_json::to_string(record)?);
        fs::write(&path, lines.join("\n") + "\n")?;
        Ok(())
    }
}

impl Drop for JobCache {
    fn drop(&mut self) {
        let _ = fs::remove_file(self.dir.join("lock"));
    }
}
