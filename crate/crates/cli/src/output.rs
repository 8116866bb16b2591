use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};

/// Output directory that deletes everything it wrote unless committed.
pub struct OutputDir {
    root: PathBuf,
    created_dirs: Vec<PathBuf>,
    files: Vec<PathBuf>,
    committed: bool,
}

impl OutputDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        let mut out = Self {
            root: root.to_path_buf(),
            created_dirs: Vec::new(),
            files: Vec::new(),
            committed: false,
        };
        out.ensure_dir(root)?;
        Ok(out)
    }

    fn ensure_dir(&mut self, dir: &Path) -> io::Result<()> {
        let mut missing = Vec::new();
        let mut cur = Some(dir);
        while let Some(d) = cur {
            if d.as_os_str().is_empty() || d.exists() {
                break;
            }
            missing.push(d.to_path_buf());
            cur = d.parent();
        }
        for d in missing.into_iter().rev() {
            fs::create_dir(&d)?;
            self.created_dirs.push(d);
        }
        Ok(())
    }

    /// Reserves `rel` under the root for a file written later, creating its directory.
    pub fn register(&mut self, rel: &str) -> io::Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            let parent = parent.to_path_buf();
            self.ensure_dir(&parent)?;
        }
        self.files.push(path.clone());
        Ok(path)
    }

    /// Creates `rel` under the root and records it.
    pub fn file(&mut self, rel: &str) -> io::Result<BufWriter<File>> {
        let path = self.register(rel)?;
        Ok(BufWriter::new(File::create(path)?))
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        for d in self.created_dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
}
