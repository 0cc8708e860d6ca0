//! SVG rendering of per-cell fields with a class legend.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::sinker::SinkerField;
use crate::assembly::{DofMap, Solution};
use crate::decomp::Decomposition;
use crate::error::{Error, Result};
use crate::mesh::{cell_geometry, PolyMesh};

/// Number of colour classes of continuous fields.
pub const N_CLASSES: usize = 8;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;
const LEGEND_WIDTH: f64 = 200.0;

/// Sequential ramp from dark blue to yellow.
const RAMP: [&str; N_CLASSES] = [
    "#30123b", "#4145ab", "#4675ed", "#1bcfd4", "#61fc6c", "#d1e834", "#fe9b2d", "#f9f21e",
];

const CATEGORICAL: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#aec7e8", "#ffbb78",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SvgField {
    Viscosity,
    Partition,
    Speed,
}

impl fmt::Display for SvgField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SvgField::Viscosity => "viscosity",
            SvgField::Partition => "partition",
            SvgField::Speed => "speed",
        })
    }
}

impl FromStr for SvgField {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "viscosity" => Ok(SvgField::Viscosity),
            "partition" => Ok(SvgField::Partition),
            "speed" => Ok(SvgField::Speed),
            other => Err(Error::Config(format!("unknown field '{other}'"))),
        }
    }
}

/// Class of `value` among `n` equal bins of `[lo, hi]`, clamped.
pub fn class_of(value: f64, lo: f64, hi: f64, n: usize) -> usize {
    if !(hi > lo) {
        return 0;
    }
    let t = ((value - lo) / (hi - lo) * n as f64).floor();
    (t.max(0.0) as usize).min(n - 1)
}

/// Viscosity at cell centroids.
pub fn cell_viscosity(mesh: &PolyMesh, field: &SinkerField) -> Result<Vec<f64>> {
    (0..mesh.n_cells())
        .map(|c| Ok(field.viscosity(cell_geometry(mesh, c)?.centroid)))
        .collect()
}

/// Logarithmic class of each cell's centroid viscosity in
/// `[ν_min, ν_max]`; the top class holds the sinker cores.
pub fn viscosity_classes(mesh: &PolyMesh, field: &SinkerField) -> Result<Vec<usize>> {
    let (lo, hi) = (field.params.nu_min.log10(), field.params.nu_max.log10());
    Ok(cell_viscosity(mesh, field)?
        .into_iter()
        .map(|nu| class_of(nu.log10(), lo, hi, N_CLASSES))
        .collect())
}

/// Mean velocity magnitude over each cell's vertices.
pub fn cell_speed(mesh: &PolyMesh, sol: &Solution) -> Vec<f64> {
    let dm = DofMap::new(mesh);
    (0..mesh.n_cells())
        .map(|c| {
            let vs = mesh.cell(c);
            vs.iter()
                .map(|&v| sol.velocity[dm.vertex_dof(v, 0)].hypot(sol.velocity[dm.vertex_dof(v, 1)]))
                .sum::<f64>()
                / vs.len() as f64
        })
        .collect()
}

/// Draws each cell filled with `palette[class[c]]` and a legend with one
/// entry per label. Polygons carry `data-cell` and `data-class` attributes.
pub fn render_svg(mesh: &PolyMesh, class: &[usize], palette: &[&str], labels: &[String], title: &str) -> String {
    let width = SIZE + 2.0 * MARGIN + LEGEND_WIDTH;
    let height = SIZE + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(s, "<title>{title}</title>");
    for (c, &k) in class.iter().enumerate() {
        let pts: Vec<String> = mesh
            .cell(c)
            .iter()
            .map(|&v| {
                let p = mesh.vertex(v);
                format!("{:.3},{:.3}", MARGIN + SIZE * p[0], MARGIN + SIZE * (1.0 - p[1]))
            })
            .collect();
        let _ = writeln!(
            s,
            "<polygon data-cell=\"{c}\" data-class=\"{k}\" points=\"{}\" fill=\"{}\" stroke=\"#222\" stroke-width=\"0.3\"/>",
            pts.join(" "),
            palette[k % palette.len()]
        );
    }
    let x0 = 2.0 * MARGIN + SIZE;
    for (k, label) in labels.iter().enumerate() {
        let y = MARGIN + 22.0 * k as f64;
        let _ = writeln!(
            s,
            "<rect data-legend=\"{k}\" x=\"{x0}\" y=\"{y}\" width=\"16\" height=\"16\" fill=\"{}\" stroke=\"#222\"/>",
            palette[k % palette.len()]
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" font-family=\"sans-serif\">{label}</text>",
            x0 + 22.0,
            y + 12.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bin_labels(lo: f64, hi: f64, log: bool) -> Vec<String> {
    (0..N_CLASSES)
        .map(|k| {
            let a = lo + (hi - lo) * k as f64 / N_CLASSES as f64;
            let b = lo + (hi - lo) * (k + 1) as f64 / N_CLASSES as f64;
            if log {
                format!("{:.2e} .. {:.2e}", 10f64.powf(a), 10f64.powf(b))
            } else {
                format!("{a:.3e} .. {b:.3e}")
            }
        })
        .collect()
}

pub fn viscosity_svg(mesh: &PolyMesh, field: &SinkerField) -> Result<String> {
    let class = viscosity_classes(mesh, field)?;
    let labels = bin_labels(field.params.nu_min.log10(), field.params.nu_max.log10(), true);
    Ok(render_svg(mesh, &class, &RAMP, &labels, "viscosity"))
}

pub fn partition_svg(mesh: &PolyMesh, decomp: &Decomposition) -> String {
    let class: Vec<usize> = (0..mesh.n_cells()).map(|c| decomp.sub_of(c)).collect();
    let labels: Vec<String> = (0..decomp.n_sub().min(CATEGORICAL.len()))
        .map(|k| {
            if decomp.n_sub() > CATEGORICAL.len() {
                format!("subdomain {k} (+{})", CATEGORICAL.len())
            } else {
                format!("subdomain {k}")
            }
        })
        .collect();
    render_svg(mesh, &class, &CATEGORICAL, &labels, "partition")
}

pub fn speed_svg(mesh: &PolyMesh, sol: &Solution) -> String {
    let speed = cell_speed(mesh, sol);
    let hi = speed.iter().cloned().fold(0.0, f64::max);
    let class: Vec<usize> = speed.iter().map(|&v| class_of(v, 0.0, hi, N_CLASSES)).collect();
    render_svg(mesh, &class, &RAMP, &bin_labels(0.0, hi, false), "speed")
}
