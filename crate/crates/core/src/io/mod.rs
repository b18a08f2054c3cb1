//! On-disk formats and rendering.
//!
//! * `UEV1` volumes ([`volume_file`]): little-endian binary, x-fastest.
//! * landmark CSV ([`landmark_csv`]): `id,unit,x,y,z,dx,dy,dz`.
//! * JSON association reports ([`report`]).
//! * PPM colour-mapped uncertainty slices ([`render`]).
//! * flat `key = value` configuration ([`config`]).

pub mod config;
pub mod landmark_csv;
pub mod render;
pub mod report;
pub mod volume_file;

pub use config::Config;
pub use landmark_csv::{parse_landmarks, read_landmarks, write_landmarks, LengthUnit};
pub use render::{colormap, render_uncertainty_slice, Axis};
pub use report::{ReportDocument, SCHEMA_VERSION};
pub use volume_file::{decode_volume, encode_volume, read_volume, write_volume};
