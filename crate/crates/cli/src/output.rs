use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Resolves output paths against the output directory and writes files.
pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    /// An explicit path is taken as given; otherwise `name` inside the output directory.
    pub fn path(&self, explicit: Option<&Path>, name: &str) -> PathBuf {
        match explicit {
            Some(p) => p.to_path_buf(),
            None => self.dir.join(name),
        }
    }

    pub fn write<F>(&self, path: &Path, body: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
        let mut out = BufWriter::new(file);
        body(&mut out)?;
        out.flush()?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }

    pub fn write_str(&self, path: &Path, text: &str) -> Result<()> {
        self.write(path, |out| Ok(out.write_all(text.as_bytes())?))
    }
}

/// Console form of a computed value: 12 significant digits, shortest
/// representation. Files keep full precision.
pub fn display(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded:?}")
}

#[cfg(test)]
mod tests {
    use super::display;

    #[test]
    fn rounds_away_solver_noise() {
        assert_eq!(display(0.49999999999999994), "0.5");
        assert_eq!(display(8.0 * std::f64::consts::PI), "25.1327412287");
        assert_eq!(display(0.0), "0");
        assert_eq!(display(1e-300), "1e-300");
        assert_eq!(display(2.0), "2.0");
    }
}
