//! Configuration parsing and file output.

pub mod config;
pub mod csv;
pub mod raster;

pub use config::{parse_config, RunConfig};
pub use csv::{read_csv, write_csv, Cell, Table};
pub use raster::{rasterize_polar, write_raster, Colormap, PolarOptions, RasterImage};
