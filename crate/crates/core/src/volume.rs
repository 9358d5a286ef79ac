//! Dense 3D grids with physical voxel size and the raw + JSON sidecar file format.
//!
//! Every stage of the pipeline reads and writes volumes through this module. A volume
//! on disk is a pair of files sharing a stem: `<stem>.json` holds the metadata and
//! `<stem>.raw` holds exactly `nx * ny * nz` little-endian values in x-fastest order.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Voxel counts plus isotropic voxel edge length in micrometers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dims: [usize; 3],
    voxel_size: f64,
}

impl GridSpec {
    pub fn new(dims: [usize; 3], voxel_size: f64) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParam(format!(
                "grid dims must be positive, got {dims:?}"
            )));
        }
        if !(voxel_size.is_finite() && voxel_size > 0.0) {
            return Err(Error::InvalidParam(format!(
                "voxel size must be positive, got {voxel_size}"
            )));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidParam(format!("grid {dims:?} overflows usize")))?;
        Ok(Self { dims, voxel_size })
    }

    /// Cubic grid of `n` voxels per edge.
    pub fn cube(n: usize, voxel_size: f64) -> Result<Self> {
        Self::new([n, n, n], voxel_size)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Physical extent in micrometers along each axis.
    pub fn extent(&self) -> [f64; 3] {
        self.dims.map(|d| d as f64 * self.voxel_size)
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let [nx, ny, _] = self.dims;
        [index % nx, (index / nx) % ny, index / (nx * ny)]
    }

    pub fn contains(&self, p: [i64; 3]) -> bool {
        p.iter()
            .zip(self.dims)
            .all(|(&c, d)| c >= 0 && (c as u64) < d as u64)
    }

    /// Center of voxel `(x, y, z)` in micrometers, with the grid origin at the corner
    /// of voxel `(0, 0, 0)`.
    #[inline]
    pub fn voxel_center(&self, x: usize, y: usize, z: usize) -> [f64; 3] {
        [
            (x as f64 + 0.5) * self.voxel_size,
            (y as f64 + 0.5) * self.voxel_size,
            (z as f64 + 0.5) * self.voxel_size,
        ]
    }

    /// In-bounds 26-neighbors of the voxel at `index`, in linear-index order.
    pub fn neighbors26(&self, index: usize) -> Neighbors26 {
        let [x, y, z] = self.coords(index);
        Neighbors26 {
            grid: *self,
            center: [x as i64, y as i64, z as i64],
            k: 0,
        }
    }
}

/// Iterator produced by [`GridSpec::neighbors26`].
pub struct Neighbors26 {
    grid: GridSpec,
    center: [i64; 3],
    k: u8,
}

impl Iterator for Neighbors26 {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while self.k < 27 {
            let k = self.k as i64;
            self.k += 1;
            if k == 13 {
                continue;
            }
            let p = [
                self.center[0] + k % 3 - 1,
                self.center[1] + (k / 3) % 3 - 1,
                self.center[2] + k / 9 - 1,
            ];
            if self.grid.contains(p) {
                return Some(self.grid.index(p[0] as usize, p[1] as usize, p[2] as usize));
            }
        }
        None
    }
}

/// Element types that can be stored in the raw volume format.
pub trait Voxel: Copy + Default + Send + Sync + PartialEq + std::fmt::Debug + 'static {
    const DTYPE: &'static str;
    const BYTES: usize;
    fn write_le(self, out: &mut Vec<u8>);
    fn read_le(bytes: &[u8]) -> Self;
}

impl Voxel for f32 {
    const DTYPE: &'static str = "f32";
    const BYTES: usize = 4;
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("4 bytes"))
    }
}

impl Voxel for u32 {
    const DTYPE: &'static str = "u32";
    const BYTES: usize = 4;
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        u32::from_le_bytes(bytes.try_into().expect("4 bytes"))
    }
}

impl Voxel for u8 {
    const DTYPE: &'static str = "u8";
    const BYTES: usize = 1;
    fn write_le(self, out: &mut Vec<u8>) {
        out.push(self);
    }
    fn read_le(bytes: &[u8]) -> Self {
        bytes[0]
    }
}

/// A dense grid of voxel values with linear index `x + nx * (y + ny * z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    spec: GridSpec,
    data: Vec<T>,
}

/// Gray values, filter responses, attenuation.
pub type Volume = Grid<f32>;
/// 0 is background, any other value is a fiber or segment id.
pub type LabelVolume = Grid<u32>;
pub type MaskVolume = Grid<u8>;

impl<T: Voxel> Grid<T> {
    pub fn filled(spec: GridSpec, value: T) -> Self {
        Self {
            spec,
            data: vec![value; spec.len()],
        }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self::filled(spec, T::default())
    }

    pub fn from_vec(spec: GridSpec, data: Vec<T>) -> Result<Self> {
        if data.len() != spec.len() {
            return Err(Error::InvalidParam(format!(
                "data length {} does not match grid {:?}",
                data.len(),
                spec.dims()
            )));
        }
        Ok(Self { spec, data })
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(usize, usize, usize) -> T + Sync) -> Self {
        use rayon::prelude::*;
        let data = (0..spec.len())
            .into_par_iter()
            .map(|i| {
                let [x, y, z] = spec.coords(i);
                f(x, y, z)
            })
            .collect();
        Self { spec, data }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dims(&self) -> [usize; 3] {
        self.spec.dims
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> T {
        self.data[self.spec.index(x, y, z)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, value: T) {
        let i = self.spec.index(x, y, z);
        self.data[i] = value;
    }

    pub fn map<U: Voxel>(&self, f: impl Fn(T) -> U + Sync) -> Grid<U> {
        use rayon::prelude::*;
        Grid {
            spec: self.spec,
            data: self.data.par_iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn ensure_same_shape<U: Voxel>(&self, other: &Grid<U>) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::ShapeMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }

    /// Writes `<stem>.json` and `<stem>.raw`.
    pub fn write(&self, stem: impl AsRef<Path>) -> Result<()> {
        let stem = stem.as_ref();
        let (json_path, raw_path) = stem_paths(stem);
        let header = Header {
            dims: self.spec.dims,
            voxel_size_um: self.spec.voxel_size,
            dtype: T::DTYPE.to_string(),
            order: ORDER.to_string(),
            endianness: ENDIANNESS.to_string(),
        };
        let json = serde_json::to_string_pretty(&header).expect("header serializes");
        fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;

        let mut bytes = Vec::with_capacity(self.data.len() * T::BYTES);
        for &v in &self.data {
            v.write_le(&mut bytes);
        }
        let file = fs::File::create(&raw_path).map_err(|e| Error::io(&raw_path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(&bytes)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(&raw_path, e))
    }

    /// Reads a volume whose header dtype must equal `T::DTYPE`.
    pub fn read(stem: impl AsRef<Path>) -> Result<Self> {
        let stem = stem.as_ref();
        let header = read_header(stem)?;
        if header.dtype != T::DTYPE {
            return Err(Error::WrongDtype {
                path: stem_paths(stem).0,
                expected: T::DTYPE,
                found: header.dtype,
            });
        }
        read_body(stem, &header)
    }
}

impl Volume {
    pub fn min_max(&self) -> (f32, f32) {
        self.data
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl LabelVolume {
    pub fn foreground_count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    /// 0/1 mask of nonzero labels.
    pub fn foreground(&self) -> LabelVolume {
        self.map(|v| u32::from(v != 0))
    }
}

/// A volume of either on-disk dtype, as returned by [`read_volume`].
#[derive(Debug, Clone, PartialEq)]
pub enum AnyVolume {
    F32(Volume),
    U32(LabelVolume),
    U8(MaskVolume),
}

impl AnyVolume {
    pub fn spec(&self) -> &GridSpec {
        match self {
            AnyVolume::F32(v) => v.spec(),
            AnyVolume::U32(v) => v.spec(),
            AnyVolume::U8(v) => v.spec(),
        }
    }

    pub fn write(&self, stem: impl AsRef<Path>) -> Result<()> {
        match self {
            AnyVolume::F32(v) => v.write(stem),
            AnyVolume::U32(v) => v.write(stem),
            AnyVolume::U8(v) => v.write(stem),
        }
    }
}

/// Reads a volume of whatever dtype its header declares.
pub fn read_volume(stem: impl AsRef<Path>) -> Result<AnyVolume> {
    let stem = stem.as_ref();
    let header = read_header(stem)?;
    match header.dtype.as_str() {
        "f32" => read_body(stem, &header).map(AnyVolume::F32),
        "u32" => read_body(stem, &header).map(AnyVolume::U32),
        "u8" => read_body(stem, &header).map(AnyVolume::U8),
        _ => Err(Error::UnknownDtype {
            path: stem_paths(stem).0,
            dtype: header.dtype,
        }),
    }
}

const ORDER: &str = "x-fastest";
const ENDIANNESS: &str = "little";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    dims: [usize; 3],
    voxel_size_um: f64,
    dtype: String,
    order: String,
    endianness: String,
}

/// `<stem>.json` and `<stem>.raw`. The suffix is appended, never substituted, so
/// stems like `out/gt.ox` keep their dotted part.
pub fn stem_paths(stem: &Path) -> (PathBuf, PathBuf) {
    let mut json = stem.as_os_str().to_owned();
    json.push(".json");
    let mut raw = stem.as_os_str().to_owned();
    raw.push(".raw");
    (PathBuf::from(json), PathBuf::from(raw))
}

fn read_header(stem: &Path) -> Result<Header> {
    let (json_path, _) = stem_paths(stem);
    let text = fs::read_to_string(&json_path).map_err(|e| Error::io(&json_path, e))?;
    let header: Header =
        serde_json::from_str(&text).map_err(|e| Error::format(&json_path, e.to_string()))?;
    if header.order != ORDER {
        return Err(Error::format(
            &json_path,
            format!("unsupported order {:?}", header.order),
        ));
    }
    if header.endianness != ENDIANNESS {
        return Err(Error::format(
            &json_path,
            format!("unsupported endianness {:?}", header.endianness),
        ));
    }
    Ok(header)
}

fn read_body<T: Voxel>(stem: &Path, header: &Header) -> Result<Grid<T>> {
    let (json_path, raw_path) = stem_paths(stem);
    let spec = GridSpec::new(header.dims, header.voxel_size_um)
        .map_err(|e| Error::format(&json_path, e.to_string()))?;
    let bytes = fs::read(&raw_path).map_err(|e| Error::io(&raw_path, e))?;
    let expected = (spec.len() * T::BYTES) as u64;
    if bytes.len() as u64 != expected {
        return Err(Error::SizeMismatch {
            path: raw_path,
            expected,
            actual: bytes.len() as u64,
        });
    }
    let data = bytes.chunks_exact(T::BYTES).map(T::read_le).collect();
    Ok(Grid { spec, data })
}
