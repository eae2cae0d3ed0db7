//! Carpet images: 16-bit PGM (P5) or 8-bit PPM (P6) with a fixed colormap,
//! plus a text sidecar describing the value mapping.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::OnceLock;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::io::csv::write_atomic;
use crate::propagation::{Carpet, CarpetAxis};

pub const DEFAULT_POLAR_SIZE: usize = 1024;

const VIRIDIS_TABLE: &str = include_str!("../../data/viridis.txt");

/// The 256-entry viridis table shipped with the crate.
pub fn viridis() -> &'static [[u8; 3]; 256] {
    static TABLE: OnceLock<[[u8; 3]; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [[0u8; 3]; 256];
        let mut rows = VIRIDIS_TABLE
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        for entry in table.iter_mut() {
            let line = rows.next().expect("colormap table has 256 rows");
            let mut it = line.split_whitespace().map(|v| v.parse::<u8>().expect("colormap entry"));
            *entry = [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()];
        }
        assert!(rows.next().is_none(), "colormap table has 256 rows");
        table
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Colormap {
    #[default]
    Gray,
    Viridis,
}

impl Colormap {
    pub fn extension(self) -> &'static str {
        match self {
            Colormap::Gray => "pgm",
            Colormap::Viridis => "ppm",
        }
    }
}

impl std::fmt::Display for Colormap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Colormap::Gray => "gray",
            Colormap::Viridis => "viridis",
        })
    }
}

impl FromStr for Colormap {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gray" | "grey" => Ok(Colormap::Gray),
            "viridis" => Ok(Colormap::Viridis),
            other => Err(format!("unknown colormap `{other}` (gray, viridis)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pixels {
    Gray16(Vec<u16>),
    Rgb8(Vec<[u8; 3]>),
}

/// Row-major image, top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Pixels,
    /// Data values mapped to the ends of the scale.
    pub value_min: f64,
    pub value_max: f64,
}

impl RasterImage {
    pub fn depth(&self) -> u32 {
        match self.pixels {
            Pixels::Gray16(_) => 16,
            Pixels::Rgb8(_) => 8,
        }
    }

    /// Netpbm encoding: P5 with big-endian 16-bit samples, or P6.
    pub fn encode(&self) -> Vec<u8> {
        match &self.pixels {
            Pixels::Gray16(p) => {
                let mut out = format!("P5\n{} {}\n65535\n", self.width, self.height).into_bytes();
                out.reserve(2 * p.len());
                for v in p {
                    out.extend_from_slice(&v.to_be_bytes());
                }
                out
            }
            Pixels::Rgb8(p) => {
                let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
                out.reserve(3 * p.len());
                for v in p {
                    out.extend_from_slice(v);
                }
                out
            }
        }
    }
}

/// Linear map of [min, max] onto [0, 1]. A zero range has no contrast to
/// show, so every value sits at the middle of the scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueMap {
    pub min: f64,
    pub max: f64,
}

impl ValueMap {
    pub fn spanning<'a>(values: impl IntoIterator<Item = &'a f64>) -> Self {
        let (min, max) = values
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if min > max {
            ValueMap { min: 0.0, max: 0.0 }
        } else {
            ValueMap { min, max }
        }
    }

    pub fn unit(&self, v: f64) -> f64 {
        let range = self.max - self.min;
        if range > 0.0 {
            ((v - self.min) / range).clamp(0.0, 1.0)
        } else {
            0.5
        }
    }
}

fn gray_sample(u: f64) -> u16 {
    (u * 65535.0).round() as u16
}

fn color_sample(u: f64) -> [u8; 3] {
    viridis()[(u * 255.0).round() as usize]
}

/// Pixel image of `grid`; `None` cells are background (all-zero samples).
fn render(grid: &Array2<Option<f64>>, map: ValueMap, colormap: Colormap) -> RasterImage {
    let (height, width) = grid.dim();
    let pixels = match colormap {
        Colormap::Gray => Pixels::Gray16(grid.iter().map(|v| v.map_or(0, |v| gray_sample(map.unit(v)))).collect()),
        Colormap::Viridis => {
            Pixels::Rgb8(grid.iter().map(|v| v.map_or([0; 3], |v| color_sample(map.unit(v)))).collect())
        }
    };
    RasterImage {
        width,
        height,
        pixels,
        value_min: map.min,
        value_max: map.max,
    }
}

fn check_finite(carpet: &Carpet) -> Result<()> {
    if carpet.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("carpet contains non-finite values".into()));
    }
    Ok(())
}

/// One pixel per sample: rows are times, columns the spatial or phase axis.
pub fn rasterize(carpet: &Carpet, colormap: Colormap) -> Result<RasterImage> {
    check_finite(carpet)?;
    let grid = carpet.values.mapv(Some);
    Ok(render(&grid, ValueMap::spanning(carpet.values.iter()), colormap))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarOptions {
    pub size: usize,
}

impl Default for PolarOptions {
    fn default() -> Self {
        PolarOptions {
            size: DEFAULT_POLAR_SIZE,
        }
    }
}

/// Maps a phase carpet to a disk: radius r ∈ [0, 1] is time t = r·t_max
/// (t_max = last row time), polar angle is θ counter-clockwise from +x.
///
/// Lookup is nearest row and nearest column. A pixel whose time is further
/// than half a row step (or half a pixel's worth of time, if larger) from
/// every row is background, as is everything outside the disk.
pub fn rasterize_polar(carpet: &Carpet, options: PolarOptions, colormap: Colormap) -> Result<RasterImage> {
    let CarpetAxis::Phase(grid) = carpet.axis else {
        return Err(Error::Config("polar rasters need a phase carpet".into()));
    };
    check_finite(carpet)?;
    if options.size < 2 {
        return Err(Error::Config("polar raster size must be at least 2".into()));
    }
    let times = &carpet.t_grid;
    let t_max = *times.last().ok_or_else(|| Error::Config("empty carpet".into()))?;
    if !(t_max > 0.0) {
        return Err(Error::Config("polar raster needs a positive final time".into()));
    }
    let s = options.size;
    let half = s as f64 / 2.0;
    let row_step = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let tolerance = (row_step / 2.0).max(t_max / half / 2.0);
    let m = grid.len();

    let mut cells = Array2::from_elem((s, s), None);
    for ((i, j), cell) in cells.indexed_iter_mut() {
        let x = (j as f64 + 0.5 - half) / half;
        let y = (half - (i as f64 + 0.5)) / half;
        let r = x.hypot(y);
        if r > 1.0 {
            continue;
        }
        let t = r * t_max;
        let row = nearest(times, t);
        if (times[row] - t).abs() > tolerance {
            continue;
        }
        let theta = y.atan2(x).rem_euclid(2.0 * PI);
        let col = (theta / grid.spacing()).round() as usize % m;
        *cell = Some(carpet.values[[row, col]]);
    }
    Ok(render(&cells, ValueMap::spanning(carpet.values.iter()), colormap))
}

/// Index of the value in ascending `xs` closest to `x`.
fn nearest(xs: &[f64], x: f64) -> usize {
    let k = xs.partition_point(|&v| v < x);
    if k == 0 {
        0
    } else if k == xs.len() {
        xs.len() - 1
    } else if x - xs[k - 1] <= xs[k] - x {
        k - 1
    } else {
        k
    }
}

/// Sidecar text: mapping, normalization and grid extents.
pub fn sidecar_text(carpet: &Carpet, image: &RasterImage, colormap: Colormap, layout: &str) -> String {
    let axis = carpet.axis.points();
    let first = |v: &[f64]| v.first().copied().unwrap_or(0.0);
    let last = |v: &[f64]| v.last().copied().unwrap_or(0.0);
    let mut s = String::new();
    let _ = writeln!(s, "layout = {layout}");
    let _ = writeln!(s, "width = {}", image.width);
    let _ = writeln!(s, "height = {}", image.height);
    let _ = writeln!(s, "depth = {}", image.depth());
    let _ = writeln!(s, "colormap = {colormap}");
    let _ = writeln!(s, "value_min = {:?}", image.value_min);
    let _ = writeln!(s, "value_max = {:?}", image.value_max);
    let _ = writeln!(s, "normalization = {}", carpet.normalization);
    let _ = writeln!(s, "axis = {}", carpet.axis.name());
    let _ = writeln!(s, "axis_points = {}", axis.len());
    let _ = writeln!(s, "axis_min = {:?}", first(&axis));
    let _ = writeln!(s, "axis_max = {:?}", last(&axis));
    let _ = writeln!(s, "t_points = {}", carpet.t_grid.len());
    let _ = writeln!(s, "t_min = {:?}", first(&carpet.t_grid));
    let _ = writeln!(s, "t_max = {:?}", last(&carpet.t_grid));
    s
}

/// `image.pgm` → `image.pgm.txt`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".txt");
    PathBuf::from(p)
}

fn write_image(carpet: &Carpet, image: &RasterImage, path: &Path, colormap: Colormap, layout: &str) -> Result<()> {
    write_atomic(path, &image.encode())?;
    write_atomic(&sidecar_path(path), sidecar_text(carpet, image, colormap, layout).as_bytes())
}

/// Writes the rectangular raster and its sidecar.
pub fn write_raster(carpet: &Carpet, path: &Path, colormap: Colormap) -> Result<RasterImage> {
    let image = rasterize(carpet, colormap)?;
    write_image(carpet, &image, path, colormap, "rows=t,cols=axis")?;
    Ok(image)
}

/// Writes the polar raster and its sidecar.
pub fn write_polar_raster(carpet: &Carpet, path: &Path, options: PolarOptions, colormap: Colormap) -> Result<RasterImage> {
    let image = rasterize_polar(carpet, options, colormap)?;
    write_image(carpet, &image, path, colormap, "polar,r=t/t_max,angle=theta")?;
    Ok(image)
}
