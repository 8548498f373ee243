use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Report files of one run, assembled in memory and written at once.
#[derive(Debug)]
pub struct Bundle {
    pub summary: serde_json::Value,
    pub curves: Vec<(String, String)>,
    pub pass: bool,
}

impl Bundle {
    pub fn new(summary: impl Serialize, pass: bool) -> Result<Self> {
        Ok(Bundle {
            summary: serde_json::to_value(summary)?,
            curves: Vec::new(),
            pass,
        })
    }

    pub fn with_curve(mut self, name: &str, csv: String) -> Self {
        self.curves.push((name.to_string(), csv));
        self
    }
}

pub fn short_hash(bytes: &[u8]) -> String {
    hex::encode(&Sha256::digest(bytes)[..6])
}

/// Directory name for a run: `<subcommand>-<graph hash>-<seed>`.
pub fn run_name(subcommand: &str, hash: &str, seed: u64) -> String {
    format!("{subcommand}-{hash}-{seed}")
}

/// Write the bundle into `out/<name>/`: files go to a hidden staging
/// directory first, which is renamed into place once complete.
pub fn write_bundle(out: &Path, name: &str, bundle: &Bundle) -> Result<PathBuf> {
    fs::create_dir_all(out).with_context(|| format!("output directory {} is not writable", out.display()))?;
    let target = out.join(name);
    let staging = out.join(format!(".{name}.partial-{}", std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    let result = (|| -> Result<()> {
        fs::create_dir(&staging)?;
        let mut summary = serde_json::to_string_pretty(&bundle.summary)?;
        summary.push('\n');
        write_file(&staging.join("summary.json"), summary.as_bytes())?;
        for (curve, csv) in &bundle.curves {
            write_file(&staging.join(format!("{curve}.csv")), csv.as_bytes())?;
        }
        if target.exists() {
            fs::remove_dir_all(&target)?;
        }
        fs::rename(&staging, &target)?;
        Ok(())
    })();
    if let Err(e) = result {
        let _ = fs::remove_dir_all(&staging);
        return Err(e).with_context(|| format!("writing reports to {}", out.display()));
    }
    Ok(target)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    Ok(())
}
