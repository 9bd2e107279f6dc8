//! Result tables and the files written for them: CSV, gnuplot script, metadata sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};

/// `%.12g`: 12 significant digits, trailing zeros trimmed, exponent form outside `[1e-5, 1e12)`.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub cells: Vec<String>,
    pub status: String,
    /// Error message for failed rows; not written to the CSV.
    pub detail: Option<String>,
}

impl Row {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: ExperimentKind,
    /// Column names, `status` last.
    pub header: Vec<&'static str>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| !r.ok()).count()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.cells.iter().map(String::as_str).chain([r.status.as_str()]))?;
        }
        w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
    }

    /// One `name=value` line per row, in table order.
    pub fn summary_lines(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                let mut parts: Vec<String> = self
                    .header
                    .iter()
                    .zip(&r.cells)
                    .filter(|(_, v)| !v.is_empty())
                    .map(|(h, v)| format!("{h}={v}"))
                    .collect();
                parts.push(format!("status={}", r.status));
                format!("{} {}", self.kind, parts.join(" "))
            })
            .collect()
    }
}

fn column(header: &[&str], name: &str) -> usize {
    header.iter().position(|h| *h == name).expect("known column") + 1
}

/// Gnuplot script plotting the CSV named `csv_name`.
pub fn gnuplot_script(table: &Table, csv_name: &str) -> String {
    let h = &table.header;
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str(&format!("set title '{}'\n", table.kind));
    let conc = || column(h, "concurrence");
    match table.kind {
        ExperimentKind::ThetaDeltaMap => {
            let c = conc();
            s.push_str("set xlabel 'theta'\nset ylabel 'delta'\nset cblabel 'concurrence'\n");
            s.push_str("set view map\nset dgrid3d 40,40\nset pm3d at b\n");
            s.push_str(&format!("splot '{csv_name}' using 1:2:{c} with pm3d notitle\n"));
        }
        ExperimentKind::ProjectionCompare => {
            let c = conc();
            s.push_str("set style data histograms\nset style fill solid 0.6\nset ylabel 'concurrence'\n");
            s.push_str(&format!(
                "plot '{csv_name}' using {c}:xticlabels(stringcolumn(1).' '.stringcolumn(2)) notitle\n"
            ));
        }
        ExperimentKind::BaselineCompareXx | ExperimentKind::BaselineCompareXxz => {
            let c = conc();
            s.push_str("set xlabel 'N'\nset ylabel 'concurrence'\nset key left bottom\n");
            let plots: Vec<String> = ["rotation", "attaching", "attaching_uniform"]
                .iter()
                .map(|scheme| {
                    format!("'{csv_name}' using 1:(stringcolumn(2) eq '{scheme}' ? ${c} : NaN) with linespoints title '{scheme}'")
                })
                .collect();
            s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
        }
        ExperimentKind::XxzDeltaScan => {
            let c = conc();
            s.push_str("set xlabel 'anisotropy'\nset ylabel 'concurrence'\n");
            s.push_str(&format!("plot '{csv_name}' using 1:{c} with linespoints notitle\n"));
        }
        ExperimentKind::FreefermionCheck => {
            let dev = column(h, "max_abs_deviation");
            s.push_str("set xlabel 'N'\nset ylabel 'max |deviation|'\nset logscale y\n");
            let plots: Vec<String> = ["formula_odd", "printed", "coefficient_two"]
                .iter()
                .map(|v| format!("'{csv_name}' using 1:(stringcolumn(3) eq '{v}' ? (${dev} > 0 ? ${dev} : 1e-17) : NaN) title '{v}'"))
                .collect();
            s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
        }
        ExperimentKind::SingleRun => {
            let c = conc();
            s.push_str("set style data histograms\nset style fill solid 0.6\nset yrange [0:1]\n");
            s.push_str(&format!(
                "plot '{csv_name}' using {c}:xticlabels(1) title 'concurrence'\n"
            ));
        }
    }
    s
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    kind: ExperimentKind,
    csv: String,
    plot_script: String,
    rows: usize,
    failed: usize,
    threads: usize,
    elapsed_seconds: f64,
    config: &'a ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WrittenFiles {
    pub csv: PathBuf,
    pub plot: PathBuf,
    pub metadata: PathBuf,
}

fn with_suffix(prefix: &str, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}{suffix}"))
}

pub fn write_all(table: &Table, cfg: &ExperimentConfig, threads: usize, elapsed_seconds: f64) -> Result<WrittenFiles> {
    let files = WrittenFiles {
        csv: with_suffix(&cfg.out, ".csv"),
        plot: with_suffix(&cfg.out, ".gp"),
        metadata: with_suffix(&cfg.out, ".meta.json"),
    };
    if let Some(dir) = files.csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let csv_name = file_name(&files.csv);
    write(&files.csv, &table.to_csv()?)?;
    write(&files.plot, gnuplot_script(table, &csv_name).as_bytes())?;
    let meta = Metadata {
        tool: "simulate",
        version: env!("CARGO_PKG_VERSION"),
        kind: table.kind,
        csv: csv_name,
        plot_script: file_name(&files.plot),
        rows: table.rows.len(),
        failed: table.failed(),
        threads,
        elapsed_seconds,
        config: cfg,
    };
    let mut json = serde_json::to_string_pretty(&meta)?;
    json.push('\n');
    write(&files.metadata, json.as_bytes())?;
    Ok(files)
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}
