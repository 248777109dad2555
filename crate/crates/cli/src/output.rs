//! Artifact writers. Every text artifact opens with a comment carrying
//! the config hash; binary snapshots carry the hash in their file name
//! instead (their layout is frozen and has no header room).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub struct OutDir {
    dir: PathBuf,
    hash: String,
    svg: bool,
}

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

impl OutDir {
    pub fn create(dir: &str, hash: &str, svg: bool) -> Result<Self, CliError> {
        let dir = PathBuf::from(dir);
        std::fs::create_dir_all(&dir).map_err(run_err)?;
        Ok(OutDir {
            dir,
            hash: hash.to_string(),
            svg,
        })
    }

    pub fn path(&self, stem: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{stem}_{}.{ext}", self.hash))
    }

    /// Open a CSV file with the hash comment and the given header row.
    pub fn csv(&self, stem: &str, header: &str) -> Result<CsvFile, CliError> {
        let path = self.path(stem, "csv");
        let mut w = BufWriter::new(File::create(&path).map_err(run_err)?);
        writeln!(w, "# config {}", self.hash).map_err(run_err)?;
        writeln!(w, "{header}").map_err(run_err)?;
        Ok(CsvFile { w, path })
    }

    /// Serialize `data` as `{"config": hash, "data": ...}`.
    pub fn json<T: Serialize>(&self, stem: &str, data: &T) -> Result<PathBuf, CliError> {
        #[derive(Serialize)]
        struct Wrapped<'a, T> {
            config: &'a str,
            data: &'a T,
        }
        let path = self.path(stem, "json");
        let text = serde_json::to_string_pretty(&Wrapped {
            config: &self.hash,
            data,
        })
        .map_err(run_err)?;
        std::fs::write(&path, text + "\n").map_err(run_err)?;
        Ok(path)
    }

    /// Line plot with circle markers; no-op when SVG output is off.
    pub fn svg_plot(
        &self,
        stem: &str,
        title: &str,
        xlabel: &str,
        ylabel: &str,
        series: &[(&str, Vec<(f64, f64)>)],
    ) -> Result<Option<PathBuf>, CliError> {
        if !self.svg {
            return Ok(None);
        }
        let path = self.path(stem, "svg");
        write_svg(&path, &self.hash, title, xlabel, ylabel, series).map_err(run_err)?;
        Ok(Some(path))
    }
}

pub struct CsvFile {
    w: BufWriter<File>,
    path: PathBuf,
}

impl CsvFile {
    pub fn row(&mut self, fields: std::fmt::Arguments) -> Result<(), CliError> {
        writeln!(self.w, "{fields}").map_err(run_err)
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.w.flush().map_err(run_err)?;
        Ok(self.path)
    }
}

/// Shorthand: `csv_row!(file, "{},{}", a, b)`.
macro_rules! csv_row {
    ($file:expr, $($arg:tt)*) => {
        $file.row(format_args!($($arg)*))
    };
}
pub(crate) use csv_row;

const W: f64 = 640.0;
const H: f64 = 440.0;
const ML: f64 = 70.0;
const MR: f64 = 20.0;
const MT: f64 = 40.0;
const MB: f64 = 50.0;

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn write_svg(
    path: &Path,
    hash: &str,
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[(&str, Vec<(f64, f64)>)],
) -> std::io::Result<()> {
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.1.iter().copied()).collect();
    let (x0, x1) = pad_range(pts.iter().map(|p| p.0));
    let (y0, y1) = pad_range(pts.iter().map(|p| p.1));
    let sx = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">"
    )?;
    writeln!(w, "<!-- config {hash} -->")?;
    writeln!(w, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>")?;
    writeln!(
        w,
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        W / 2.0,
        escape(title)
    )?;
    // axes
    writeln!(
        w,
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        H - MB,
        W - MR,
        H - MB
    )?;
    writeln!(
        w,
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>",
        H - MB
    )?;
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        writeln!(
            w,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\
             <text x=\"{0}\" y=\"{3}\" text-anchor=\"middle\">{4}</text>",
            sx(fx),
            H - MB,
            H - MB + 5.0,
            H - MB + 20.0,
            tick(fx)
        )?;
        writeln!(
            w,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\
             <text x=\"{3}\" y=\"{4}\" text-anchor=\"end\">{5}</text>",
            ML - 5.0,
            sy(fy),
            ML,
            ML - 8.0,
            sy(fy) + 4.0,
            tick(fy)
        )?;
    }
    writeln!(
        w,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        (ML + W - MR) / 2.0,
        H - 10.0,
        escape(xlabel)
    )?;
    writeln!(
        w,
        "<text x=\"15\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 15 {})\">{}</text>",
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0,
        escape(ylabel)
    )?;
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let poly: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        writeln!(
            w,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            poly.join(" ")
        )?;
        for &(x, y) in pts {
            writeln!(
                w,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                sx(x),
                sy(y)
            )?;
        }
        writeln!(
            w,
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>",
            W - MR - 150.0,
            MT + 15.0 * (i as f64 + 1.0),
            escape(name)
        )?;
    }
    writeln!(w, "</svg>")?;
    w.flush()
}

fn pad_range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let span = (hi - lo).max(1e-12 * (1.0 + hi.abs()));
    (lo - 0.05 * span, hi + 0.05 * span)
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
