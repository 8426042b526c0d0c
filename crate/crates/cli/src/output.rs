//! Output directory: every file written through [`OutputDir`] is listed with
//! its digest in `manifest.json`, and a matplotlib script for the CSV files is
//! dropped next to them.

use std::fs;
use std::path::{Path, PathBuf};

use photonflow_core::io::format_csv;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliResult;
use crate::run_config::sha256_hex;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
struct OutputFile {
    name: String,
    sha256: String,
}

pub struct OutputDir {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

pub fn to_pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

impl OutputDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.push(OutputFile {
            name: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, v: &impl Serialize) -> CliResult<()> {
        self.write_bytes(name, to_pretty(v).as_bytes())
    }

    pub fn write_csv(&mut self, name: &str, header: &[String], rows: &[Vec<f64>]) -> CliResult<()> {
        self.write_bytes(name, format_csv(header, rows).as_bytes())
    }

    /// Register a file some other routine wrote into the directory.
    pub fn adopt(&mut self, name: &str) -> CliResult<()> {
        let bytes = fs::read(self.dir.join(name))?;
        self.files.push(OutputFile {
            name: name.to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    /// Write `plot.py` and `manifest.json`; the manifest is the last file written.
    pub fn finish(mut self, mut manifest: Value) -> CliResult<()> {
        self.write_bytes("plot.py", PLOT_SCRIPT.as_bytes())?;
        manifest["schema_version"] = json!(MANIFEST_VERSION);
        manifest["tool"] = json!("photonflow");
        manifest["version"] = json!(env!("CARGO_PKG_VERSION"));
        manifest["outputs"] = serde_json::to_value(&self.files).expect("file list serializes");
        fs::write(self.dir.join("manifest.json"), to_pretty(&manifest))?;
        Ok(())
    }
}

const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plot every CSV written by photonflow in this directory.

Files with a `t` column become line plots of the remaining columns; files with
`t1, t2, re, im` columns become heat maps of the modulus.  Figures are saved as
PNG next to the data.  Requires numpy and matplotlib.
"""
import csv
import pathlib
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def load(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]])


def line_plot(path, header, data):
    fig, ax = plt.subplots(figsize=(7, 4))
    for k, name in enumerate(header[1:], start=1):
        ax.plot(data[:, 0], data[:, k], label=name)
    ax.set_xlabel(header[0])
    if len(header) <= 9:
        ax.legend(fontsize="small")
    ax.set_title(path.stem)
    return fig


def surface_plot(path, header, data):
    t1 = np.unique(data[:, 0])
    t2 = np.unique(data[:, 1])
    mod = np.hypot(data[:, 2], data[:, 3]).reshape(len(t1), len(t2))
    fig, ax = plt.subplots(figsize=(5, 4))
    mesh = ax.pcolormesh(t2, t1, mod, shading="auto")
    fig.colorbar(mesh, ax=ax)
    ax.set_xlabel("t2")
    ax.set_ylabel("t1")
    ax.set_title(path.stem)
    return fig


def main(root):
    for path in sorted(pathlib.Path(root).glob("*.csv")):
        header, data = load(path)
        if data.size == 0:
            continue
        data = data.reshape(-1, len(header))
        if header[:2] == ["t1", "t2"]:
            fig = surface_plot(path, header, data)
        elif header[0] in ("t", "omega", "n"):
            fig = line_plot(path, header, data)
        else:
            continue
        fig.tight_layout()
        fig.savefig(path.with_suffix(".png"), dpi=120)
        plt.close(fig)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).parent)
"#;
