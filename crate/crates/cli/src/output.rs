use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::config::Command;
use crate::error::CliError;

/// Files written by one run, all under the output directory.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
    started: Instant,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)
            .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", root.display())))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Opens `name` for writing and records it for the manifest.
    pub fn file(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        self.written.push(name.to_string());
        Ok(BufWriter::new(File::create(path)?))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut out = self.file(name)?;
        serde_json::to_writer_pretty(&mut out, value)?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let mut out = self.file(name)?;
        out.write_all(body.as_bytes())?;
        out.flush()?;
        Ok(())
    }

    /// `manifest.json`: the full configuration, versions, seed and wall time.
    pub fn manifest(&mut self, command: &Command) -> Result<(), CliError> {
        let argv: Vec<String> = std::env::args().collect();
        let value = json!({
            "command": command.name(),
            "argv": argv,
            "config": command,
            "seed": command.common().seed,
            "versions": {
                "gibbsdiv": gibbsdiv::VERSION,
                "cli": env!("CARGO_PKG_VERSION"),
            },
            "wall_time_s": self.started.elapsed().as_secs_f64(),
            "outputs": self.written,
        });
        self.json("manifest.json", &value)
    }
}

/// gnuplot script drawing column 2 of `csv` against column 1.
pub fn plot_script(csv: &str, title: &str, xlabel: &str, ylabel: &str, log_x: bool) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str(&format!("set title '{title}'\n"));
    s.push_str(&format!("set xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"));
    s.push_str("set key off\n");
    if log_x {
        s.push_str("set logscale x\n");
    }
    s.push_str(&format!("plot '{csv}' skip 1 using 1:2 with lines lw 2\n"));
    s
}

/// Histogram of `sample` (column 2) over the density in `theory`.
pub fn histogram_script(sample: &str, theory: &str, reps: usize, bin: f64) -> String {
    format!(
        "set datafile separator ','\n\
         set xlabel 'value'\nset ylabel 'density'\n\
         bin(x, w) = w * floor(x / w) + w / 2\n\
         w = {bin:e}\n\
         plot '{sample}' skip 1 using (bin($2, w)):(1.0 / ({reps} * w)) smooth freq with boxes title 'simulated', \\\n     \
         '{theory}' skip 1 using 1:2 with lines lw 2 title 'limit'\n"
    )
}
