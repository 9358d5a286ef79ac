use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filter::{gaussian_smooth, separable, Kernel};
use crate::geometry::{self, canonical_axis};
use crate::linalg::{sym3_eigenvalues, sym3_eigenvector, Sym3};
use crate::volume::{GridSpec, MaskVolume, Volume};

/// Per-voxel unoriented fiber axis. Axes are canonicalized (z ≥ 0, then y ≥ 0, then
/// x ≥ 0); where `valid` is false the image has no gradient energy and the axis is
/// meaningless.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationField {
    pub spec: GridSpec,
    pub axes: Vec<[f32; 3]>,
    pub valid: Vec<bool>,
}

impl OrientationField {
    pub fn axis_at(&self, x: usize, y: usize, z: usize) -> [f32; 3] {
        self.axes[self.spec.index(x, y, z)]
    }

    /// Writes `<stem>.ox`, `<stem>.oy`, `<stem>.oz` (f32) and `<stem>.valid` (u8).
    pub fn write(&self, stem: impl AsRef<Path>) -> Result<()> {
        let stem = stem.as_ref();
        for (c, suffix) in ["ox", "oy", "oz"].iter().enumerate() {
            let data = self.axes.iter().map(|a| a[c]).collect();
            Volume::from_vec(self.spec, data)?.write(with_suffix(stem, suffix))?;
        }
        let mask = self.valid.iter().map(|&v| u8::from(v)).collect();
        MaskVolume::from_vec(self.spec, mask)?.write(with_suffix(stem, "valid"))
    }

    pub fn read(stem: impl AsRef<Path>) -> Result<Self> {
        let stem = stem.as_ref();
        let parts = ["ox", "oy", "oz"]
            .map(|s| Volume::read(with_suffix(stem, s)));
        let [ox, oy, oz] = parts;
        let (ox, oy, oz) = (ox?, oy?, oz?);
        let valid = MaskVolume::read(with_suffix(stem, "valid"))?;
        ox.ensure_same_shape(&oy)?;
        ox.ensure_same_shape(&oz)?;
        ox.ensure_same_shape(&valid)?;
        let axes = (0..ox.spec().len())
            .map(|i| [ox.data()[i], oy.data()[i], oz.data()[i]])
            .collect();
        Ok(OrientationField {
            spec: *ox.spec(),
            axes,
            valid: valid.data().iter().map(|&v| v != 0).collect(),
        })
    }
}

fn with_suffix(stem: &Path, suffix: &str) -> std::path::PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    s.into()
}

/// Structure-tensor orientation: gradients from Gaussian first derivatives at
/// `sigma_g`, the gradient outer product smoothed component-wise at `rho` (no
/// smoothing when `rho` is 0), and the eigenvector of the smallest eigenvalue as the
/// local axis.
pub fn structure_tensor_orientation(v: &Volume, sigma_g: f64, rho: f64) -> Result<OrientationField> {
    if !(sigma_g.is_finite() && sigma_g > 0.0) {
        return Err(Error::InvalidParam(format!("sigma_g must be positive, got {sigma_g}")));
    }
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::InvalidParam(format!("rho must be non-negative, got {rho}")));
    }
    let dims = v.dims();
    let input: Vec<f64> = v.data().iter().map(|&x| x as f64).collect();
    let k0 = Kernel::gaussian(sigma_g);
    let k1 = Kernel::gaussian_d1(sigma_g);
    let gx = separable(&input, dims, &k1, &k0, &k0);
    let gy = separable(&input, dims, &k0, &k1, &k0);
    let gz = separable(&input, dims, &k0, &k0, &k1);
    drop(input);

    let product = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let p: Vec<f64> = a.par_iter().zip(b.par_iter()).map(|(x, y)| x * y).collect();
        gaussian_smooth(&p, dims, rho)
    };
    let t = [
        product(&gx, &gx),
        product(&gy, &gy),
        product(&gz, &gz),
        product(&gx, &gy),
        product(&gx, &gz),
        product(&gy, &gz),
    ];
    drop((gx, gy, gz));

    let n = v.spec().len();
    let trace: Vec<f64> = (0..n).into_par_iter().map(|i| t[0][i] + t[1][i] + t[2][i]).collect();
    let max_trace = trace.par_iter().cloned().reduce(|| 0.0, f64::max);
    let floor = 1e-12 * max_trace;

    let (axes, valid): (Vec<[f32; 3]>, Vec<bool>) = (0..n)
        .into_par_iter()
        .map(|i| {
            if !(max_trace > 0.0) || trace[i] < floor {
                return ([0.0, 0.0, 1.0], false);
            }
            let m: Sym3 = [t[0][i], t[1][i], t[2][i], t[3][i], t[4][i], t[5][i]];
            let a = canonical_axis(smallest_eigenvector(&m));
            ([a[0] as f32, a[1] as f32, a[2] as f32], true)
        })
        .unzip();
    Ok(OrientationField { spec: *v.spec(), axes, valid })
}

/// Eigenvector of the smallest eigenvalue. When that eigenvalue is repeated any vector
/// of its eigenspace will do: take one perpendicular to the dominant eigenvector.
fn smallest_eigenvector(m: &Sym3) -> geometry::Vec3 {
    let e = sym3_eigenvalues(m);
    if let Some(v) = sym3_eigenvector(m, e[2]) {
        return v;
    }
    match sym3_eigenvector(m, e[0]) {
        Some(top) => geometry::orthonormal_basis(top).0,
        None => [0.0, 0.0, 1.0],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_params() {
        let v = Volume::zeros(GridSpec::cube(4, 1.0).unwrap());
        assert!(structure_tensor_orientation(&v, 0.0, 1.0).is_err());
        assert!(structure_tensor_orientation(&v, 1.0, -1.0).is_err());
        assert!(structure_tensor_orientation(&v, 1.0, 0.0).is_ok());
    }

    #[test]
    fn flat_region_far_from_structure_is_invalid() {
        let spec = GridSpec::cube(24, 1.0).unwrap();
        let v = Volume::from_fn(spec, |x, y, z| if x < 3 && y < 3 && z < 3 { 1.0 } else { 0.0 });
        let o = structure_tensor_orientation(&v, 1.0, 1.0).unwrap();
        assert!(o.valid[spec.index(2, 2, 2)]);
        assert!(!o.valid[spec.index(20, 20, 20)]);
        let zero = Volume::zeros(spec);
        assert!(structure_tensor_orientation(&zero, 1.0, 1.0).unwrap().valid.iter().all(|&b| !b));
    }

    #[test]
    fn planar_ramp_gives_in_plane_axis() {
        // Intensity varies along x only: the smallest-eigenvalue eigenspace is the
        // y-z plane, so the axis must be perpendicular to x.
        let v = Volume::from_fn(GridSpec::cube(12, 1.0).unwrap(), |x, _, _| x as f32);
        let o = structure_tensor_orientation(&v, 1.0, 1.0).unwrap();
        let a = o.axis_at(6, 6, 6);
        assert!(o.valid[v.spec().index(6, 6, 6)]);
        assert!(a[0].abs() < 1e-6, "{a:?}");
        assert!(((a[1] * a[1] + a[2] * a[2]).sqrt() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn field_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let v = Volume::from_fn(GridSpec::cube(8, 2.0).unwrap(), |x, y, z| (x * y + z) as f32);
        let o = structure_tensor_orientation(&v, 1.0, 1.0).unwrap();
        let stem = dir.path().join("orient");
        o.write(&stem).unwrap();
        assert!(dir.path().join("orient.ox.json").exists());
        assert!(dir.path().join("orient.valid.raw").exists());
        assert_eq!(OrientationField::read(&stem).unwrap(), o);
    }
}
