//! File emission: column CSVs with comment headers, small JSON documents,
//! and the generated plotting script. Floats are printed in shortest
//! round-trip form, so identical inputs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};

pub const CURVE_CSV: &str = "curve.csv";
pub const COEFFS_CSV: &str = "coeffs.csv";
pub const ENDPOINT_JSON: &str = "endpoint.json";
pub const PROFILES_CSV: &str = "profiles.csv";
pub const IDENTITIES_CSV: &str = "identities.csv";
pub const VERIFY_JSON: &str = "verify.json";
pub const CURVE_FIGURE_CSV: &str = "curve_figure.csv";
pub const FIELD_GRID_CSV: &str = "field_grid.csv";
pub const ZERO_POLYLINE_CSV: &str = "zero_polyline.csv";
pub const PLOT_SCRIPT: &str = "plot.py";

/// Create the output directory if needed and return `dir/name`.
pub fn out_path(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir.join(name))
}

fn push_float(buf: &mut String, x: f64) {
    if x == 0.0 {
        buf.push('0'); // normalize -0
    } else {
        write!(buf, "{x}").expect("formatting f64");
    }
}

/// Write a CSV of equal-length float columns, preceded by `# ` comments.
pub fn write_columns(path: &Path, comments: &[String], cols: &[(&str, &[f64])]) -> Result<()> {
    let rows = cols.first().map(|(_, v)| v.len()).unwrap_or(0);
    for (name, v) in cols {
        ensure!(v.len() == rows, "column {name} has mismatched length");
    }
    let mut buf = String::new();
    for c in comments {
        buf.push_str("# ");
        buf.push_str(c);
        buf.push('\n');
    }
    let names: Vec<&str> = cols.iter().map(|(n, _)| *n).collect();
    buf.push_str(&names.join(","));
    buf.push('\n');
    for r in 0..rows {
        for (i, (_, v)) in cols.iter().enumerate() {
            if i > 0 {
                buf.push(',');
            }
            push_float(&mut buf, v[r]);
        }
        buf.push('\n');
    }
    write_text(path, &buf)
}

/// Write a CSV whose first column is a label string.
pub fn write_labeled(
    path: &Path,
    comments: &[String],
    names: &[&str],
    rows: &[(String, Vec<f64>)],
) -> Result<()> {
    let mut buf = String::new();
    for c in comments {
        buf.push_str("# ");
        buf.push_str(c);
        buf.push('\n');
    }
    buf.push_str(&names.join(","));
    buf.push('\n');
    for (label, vals) in rows {
        ensure!(vals.len() + 1 == names.len(), "row {label} has mismatched length");
        buf.push_str(label);
        for v in vals {
            buf.push(',');
            push_float(&mut buf, *v);
        }
        buf.push('\n');
    }
    write_text(path, &buf)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// The plotting script emitted next to the figure data. It is plain
/// Python (numpy + matplotlib) and is run by the user, not by this tool.
pub fn plot_script() -> String {
    format!(
        r##"#!/usr/bin/env python3
"""Render the emitted figure data: the periodic curve over one horizontal
period, the assembled field as a heat map, and the zero-level polyline.

Run from the output directory:  python3 {PLOT_SCRIPT}
Requires numpy and matplotlib; writes figure.png.
"""
import csv

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path) as f:
        rows = [r for r in csv.reader(line for line in f if not line.startswith("#"))]
    names, data = rows[0], np.array(rows[1:], dtype=float)
    return {{n: data[:, i] for i, n in enumerate(names)}}


curve = load("{CURVE_FIGURE_CSV}")
field = load("{FIELD_GRID_CSV}")
zeros = load("{ZERO_POLYLINE_CSV}")

fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(9, 8), sharex=True)

ax1.plot(curve["x1"], curve["x2"], lw=1.5, color="tab:blue")
ax1.set_title("periodic curve, one horizontal period")
ax1.set_aspect("equal")

x1 = np.unique(field["x1"])
x2 = np.unique(field["x2"])
v = field["v"].reshape(len(x1), len(x2)).T
im = ax2.pcolormesh(x1, x2, v, cmap="RdBu_r", vmin=-1.1, vmax=1.1, shading="nearest")
ax2.plot(zeros["x1"], zeros["x2"], color="k", lw=1.0, label="zero set")
ax2.set_title("assembled field and its zero set")
ax2.legend(loc="upper right")
fig.colorbar(im, ax=ax2, label="v")

fig.tight_layout()
fig.savefig("figure.png", dpi=160)
print("wrote figure.png")
"##
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_emission_is_deterministic_and_round_trips() {
        let dir = std::env::temp_dir().join("wch-emit-test");
        let path = out_path(&dir, "t.csv").unwrap();
        let a = [0.0, -0.0, 1.5, 0.1 + 0.2];
        let b = [1.0, 2.0, 3.0, 4.0];
        write_columns(&path, &["note".into()], &[("a", &a), ("b", &b)]).unwrap();
        let text1 = fs::read_to_string(&path).unwrap();
        write_columns(&path, &["note".into()], &[("a", &a), ("b", &b)]).unwrap();
        let text2 = fs::read_to_string(&path).unwrap();
        assert_eq!(text1, text2);
        assert!(text1.starts_with("# note\na,b\n0,1\n0,2\n1.5,3\n"));
        // Shortest form round-trips exactly.
        let last = text1.lines().last().unwrap().split(',').next().unwrap();
        assert_eq!(last.parse::<f64>().unwrap(), 0.1 + 0.2);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn mismatched_columns_are_rejected() {
        let dir = std::env::temp_dir().join("wch-emit-test2");
        let path = out_path(&dir, "t.csv").unwrap();
        let err = write_columns(&path, &[], &[("a", &[1.0][..]), ("b", &[][..])]);
        assert!(err.is_err());
        fs::remove_dir_all(&dir).ok();
    }
}
