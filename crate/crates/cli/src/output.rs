//! Output files, the run manifest and the SVG renderer.

use anyhow::{Context, Result};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::Resolved;

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub bytes: u64,
}

/// Written last by every command.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub base_seed: u64,
    pub config: Resolved,
    pub outputs: Vec<OutputFile>,
    pub duration_secs: f64,
    /// Command-specific facts, e.g. which grids ran past `t = 1`.
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

/// Collects the files a command writes, then the manifest.
pub struct Outputs {
    command: &'static str,
    dir: PathBuf,
    files: Vec<PathBuf>,
    started: Instant,
}

impl Outputs {
    pub fn new(command: &'static str, dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            command,
            dir: dir.to_path_buf(),
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    /// Creates `name` in the output directory and hands a buffered writer to `fill`.
    pub fn write(&mut self, name: &str, fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        fill(&mut w).with_context(|| format!("writing {}", path.display()))?;
        w.flush().with_context(|| format!("writing {}", path.display()))?;
        self.files.push(path);
        Ok(())
    }

    pub fn finish(self, config: Resolved, details: serde_json::Value) -> Result<PathBuf> {
        let mut outputs = Vec::with_capacity(self.files.len());
        for path in self.files {
            let bytes = std::fs::metadata(&path)?.len();
            anyhow::ensure!(bytes > 0, "{} is empty", path.display());
            outputs.push(OutputFile { path, bytes });
        }
        let manifest = RunManifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            base_seed: config.seed,
            config,
            outputs,
            duration_secs: self.started.elapsed().as_secs_f64(),
            details,
        };
        let path = self.dir.join(format!("{}.manifest.json", self.command));
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn svg_open(w: &mut dyn Write, title: &str) -> std::io::Result<()> {
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    )?;
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(w, r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#, WIDTH / 2.0)
}

fn svg_axes(w: &mut dyn Write, f: &Frame, xlabel: &str) -> std::io::Result<()> {
    let (l, r, b, t) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    writeln!(w, r#"<path d="M{l},{t} L{l},{b} L{r},{b}" stroke="black" fill="none"/>"#)?;
    writeln!(w, r#"<text x="{l}" y="{}" text-anchor="middle">{:.4}</text>"#, b + 16.0, f.x0)?;
    writeln!(w, r#"<text x="{r}" y="{}" text-anchor="middle">{:.4}</text>"#, b + 16.0, f.x1)?;
    writeln!(w, r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#, WIDTH / 2.0, b + 32.0)?;
    writeln!(w, r#"<text x="{}" y="{b}" text-anchor="end">{:.4}</text>"#, l - 4.0, f.y0)?;
    writeln!(w, r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text>"#, l - 4.0, t + 4.0, f.y1)
}

/// Bar chart of histogram counts.
pub fn histogram_svg(w: &mut dyn Write, title: &str, edges: &[f64], counts: &[u64]) -> std::io::Result<()> {
    svg_open(w, title)?;
    let top = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let f = Frame {
        x0: edges[0],
        x1: *edges.last().unwrap(),
        y0: 0.0,
        y1: top,
    };
    if f.x1 > f.x0 {
        for (i, &c) in counts.iter().enumerate() {
            let (xa, xb) = (f.px(edges[i]), f.px(edges[i + 1]));
            let y = f.py(c as f64);
            writeln!(
                w,
                r#"<rect x="{xa:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="steelblue"/>"#,
                (xb - xa).max(0.5),
                (HEIGHT - MARGIN - y).max(0.0)
            )?;
        }
        svg_axes(w, &f, title)?;
    }
    writeln!(w, "</svg>")
}

/// Line through `(x, y)` with a dashed horizontal reference at `reference`.
pub fn trace_svg(w: &mut dyn Write, title: &str, points: &[(f64, f64)], reference: f64) -> std::io::Result<()> {
    svg_open(w, title)?;
    let ys = points.iter().map(|p| p.1).chain([reference]);
    let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let pad = 0.05 * (hi - lo).max(1e-9);
    // Log scale in N.
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let (x0, x1) = (xs[0], *xs.last().unwrap());
    let f = Frame {
        x0,
        x1: if x1 > x0 { x1 } else { x0 + 1.0 },
        y0: lo - pad,
        y1: hi + pad,
    };
    let path: Vec<String> = xs
        .iter()
        .zip(points)
        .map(|(&x, p)| format!("{:.2},{:.2}", f.px(x), f.py(p.1)))
        .collect();
    writeln!(w, r#"<polyline points="{}" stroke="black" fill="none"/>"#, path.join(" "))?;
    let yr = f.py(reference);
    writeln!(
        w,
        r#"<line x1="{MARGIN}" y1="{yr:.2}" x2="{}" y2="{yr:.2}" stroke="red" stroke-dasharray="6,4"/>"#,
        WIDTH - MARGIN
    )?;
    svg_axes(w, &f, "log10 N")?;
    writeln!(w, "</svg>")
}
