//! CLF1 raster files and their JSON sidecars.
//!
//! Layout: 8-byte magic `CLF1RAST`, `u32` little-endian rows, `u32`
//! little-endian cols, then `rows * cols` `f64` little-endian values in
//! row-major order. A sidecar with the same basename and a `.json` extension
//! describes what the raster holds. Parsing is defensive: malformed files
//! produce [`Error::Format`], never a panic.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Image;
use crate::phantoms::GenParams;
use crate::radon::{AngleSet, Sinogram};
use crate::scalar::Scalar;

const MAGIC: &[u8; 8] = b"CLF1RAST";
const MAX_CELLS: u64 = 1 << 28;

/// Sidecar descriptor, tagged by raster kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Sidecar {
    Image {
        n: usize,
        fov: [f64; 2],
        #[serde(skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Sinogram {
        np: usize,
        ntheta: usize,
        delta_deg: f64,
        fov: [f64; 2],
        #[serde(skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Write a raw raster (row-major `f64`) with the CLF1 header.
pub fn write_raster(path: &Path, rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    if values.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "raster says {rows}x{cols} but holds {} values",
            values.len()
        )));
    }
    let mut buf = Vec::with_capacity(16 + values.len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(rows as u32).to_le_bytes());
    buf.extend_from_slice(&(cols as u32).to_le_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

/// Read a CLF1 raster; validates magic, dimensions, and finiteness.
pub fn read_raster(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let mut file = fs::File::open(path)?;
    let mut header = [0u8; 16];
    file.read_exact(&mut header)
        .map_err(|_| Error::Format(format!("{}: truncated header", path.display())))?;
    if &header[..8] != MAGIC {
        return Err(Error::Format(format!("{}: bad magic", path.display())));
    }
    let rows = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes")) as u64;
    let cols = u32::from_le_bytes(header[12..16].try_into().expect("4 bytes")) as u64;
    if rows == 0 || cols == 0 || rows * cols > MAX_CELLS {
        return Err(Error::Format(format!(
            "{}: implausible dimensions {rows}x{cols}",
            path.display()
        )));
    }
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;
    if bytes.len() != (rows * cols * 8) as usize {
        return Err(Error::Format(format!(
            "{}: expected {} payload bytes, found {}",
            path.display(),
            rows * cols * 8,
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Format(format!("{}: non-finite values", path.display())));
    }
    Ok((rows as usize, cols as usize, values))
}

fn write_sidecar(path: &Path, sidecar: &Sidecar) -> Result<()> {
    let json = serde_json::to_string_pretty(sidecar)
        .map_err(|e| Error::Format(format!("sidecar serialization: {e}")))?;
    fs::write(sidecar_path(path), json + "\n")?;
    Ok(())
}

/// Read and parse the sidecar belonging to a raster path.
pub fn read_sidecar(path: &Path) -> Result<Sidecar> {
    let sc = sidecar_path(path);
    let text = fs::read_to_string(&sc)
        .map_err(|_| Error::Format(format!("missing sidecar {}", sc.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", sc.display())))
}

/// Write an image raster plus sidecar.
pub fn write_image<T: Scalar>(path: &Path, img: &Image<T>, seed: Option<u64>) -> Result<()> {
    let values: Vec<f64> = img.values().iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
    write_raster(path, img.n(), img.n(), &values)?;
    write_sidecar(
        path,
        &Sidecar::Image {
            n: img.n(),
            fov: [-1.0, 1.0],
            seed,
        },
    )
}

/// Read an image raster; the sidecar must agree with the header.
pub fn read_image<T: Scalar>(path: &Path) -> Result<(Image<T>, Sidecar)> {
    let (rows, cols, values) = read_raster(path)?;
    if rows != cols {
        return Err(Error::Format(format!(
            "{}: image raster must be square, got {rows}x{cols}",
            path.display()
        )));
    }
    let sidecar = read_sidecar(path)?;
    match &sidecar {
        Sidecar::Image { n, .. } if *n == rows => {}
        Sidecar::Image { n, .. } => {
            return Err(Error::Format(format!(
                "{}: sidecar n = {n} disagrees with raster {rows}",
                path.display()
            )))
        }
        Sidecar::Sinogram { .. } => {
            return Err(Error::Format(format!("{}: sidecar kind is sinogram", path.display())))
        }
    }
    let img = Image::new(rows, values.into_iter().map(T::of).collect())?;
    Ok((img, sidecar))
}

/// Write a sinogram raster (rows = offsets, cols = angles) plus sidecar.
pub fn write_sinogram<T: Scalar>(path: &Path, sino: &Sinogram<T>, seed: Option<u64>) -> Result<()> {
    let values: Vec<f64> = sino.values().iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
    write_raster(path, sino.n_p(), sino.n_theta(), &values)?;
    write_sidecar(
        path,
        &Sidecar::Sinogram {
            np: sino.n_p(),
            ntheta: sino.n_theta(),
            delta_deg: sino.angles().delta().to_f64().unwrap_or(f64::NAN) * 180.0
                / std::f64::consts::PI,
            fov: [-1.0, 1.0],
            seed,
        },
    )
}

/// Read a sinogram raster and rebuild its angle grid from the sidecar.
pub fn read_sinogram<T: Scalar>(path: &Path) -> Result<(Sinogram<T>, Sidecar)> {
    let (rows, cols, values) = read_raster(path)?;
    let sidecar = read_sidecar(path)?;
    let (np, ntheta, delta_deg) = match &sidecar {
        Sidecar::Sinogram {
            np,
            ntheta,
            delta_deg,
            ..
        } => (*np, *ntheta, *delta_deg),
        Sidecar::Image { .. } => {
            return Err(Error::Format(format!("{}: sidecar kind is image", path.display())))
        }
    };
    if np != rows || ntheta != cols {
        return Err(Error::Format(format!(
            "{}: sidecar {np}x{ntheta} disagrees with raster {rows}x{cols}",
            path.display()
        )));
    }
    if !(delta_deg > 0.0 && delta_deg <= 90.0) {
        return Err(Error::Format(format!(
            "{}: delta_deg {delta_deg} outside (0, 90]",
            path.display()
        )));
    }
    let angles = AngleSet::new(T::of(delta_deg.to_radians()), ntheta)?;
    let sino = Sinogram::new(np, angles, values.into_iter().map(T::of).collect())?;
    Ok((sino, sidecar))
}

/// Manifest stored with a generated dataset directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub count: usize,
    pub n: usize,
    pub params: GenParams,
}

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn write_manifest(dir: &Path, manifest: &DatasetManifest) -> Result<()> {
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::Format(format!("manifest serialization: {e}")))?;
    fs::write(dir.join(MANIFEST_NAME), json + "\n")?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest> {
    let path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path)
        .map_err(|_| Error::Format(format!("missing manifest {}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Conventional per-image file name inside a dataset directory.
pub fn dataset_image_name(index: usize) -> String {
    format!("img_{index:04}.clf1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantoms::{disk_scene, render};
    use crate::radon::radon_forward;

    #[test]
    fn image_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.clf1");
        let img = render(&disk_scene(0.5).unwrap(), 64, 2).unwrap();
        write_image(&path, &img, Some(9)).unwrap();
        let (back, sidecar) = read_image::<f64>(&path).unwrap();
        assert_eq!(img.values(), back.values());
        assert_eq!(
            sidecar,
            Sidecar::Image {
                n: 64,
                fov: [-1.0, 1.0],
                seed: Some(9)
            }
        );
    }

    #[test]
    fn sinogram_round_trip_preserves_geometry() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sino.clf1");
        let img = render(&disk_scene(0.5).unwrap(), 64, 2).unwrap();
        let angles = AngleSet::new(50f64.to_radians(), 21).unwrap();
        let sino = radon_forward(&img, &angles, 91).unwrap();
        write_sinogram(&path, &sino, None).unwrap();
        let (back, _) = read_sinogram::<f64>(&path).unwrap();
        assert_eq!(back.values(), sino.values());
        assert_eq!(back.n_p(), 91);
        assert_eq!(back.n_theta(), 21);
        assert!((back.angles().delta() - 50f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn malformed_files_are_format_errors_not_panics() {
        let dir = tempfile::tempdir().unwrap();

        let bad_magic = dir.path().join("a.clf1");
        fs::write(&bad_magic, b"NOTMAGIC\x01\x00\x00\x00\x01\x00\x00\x00").unwrap();
        assert!(matches!(read_raster(&bad_magic), Err(Error::Format(_))));

        let truncated = dir.path().join("b.clf1");
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&4u32.to_le_bytes());
        buf.extend_from_slice(&4u32.to_le_bytes());
        buf.extend_from_slice(&[0u8; 24]); // 3 of 16 values
        fs::write(&truncated, buf).unwrap();
        assert!(matches!(read_raster(&truncated), Err(Error::Format(_))));

        let huge = dir.path().join("c.clf1");
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&u32::MAX.to_le_bytes());
        buf.extend_from_slice(&u32::MAX.to_le_bytes());
        fs::write(&huge, buf).unwrap();
        assert!(matches!(read_raster(&huge), Err(Error::Format(_))));

        let nan = dir.path().join("d.clf1");
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&1u32.to_le_bytes());
        buf.extend_from_slice(&1u32.to_le_bytes());
        buf.extend_from_slice(&f64::NAN.to_le_bytes());
        fs::write(&nan, buf).unwrap();
        assert!(matches!(read_raster(&nan), Err(Error::Format(_))));

        assert!(read_raster(&dir.path().join("missing.clf1")).is_err());
    }

    #[test]
    fn sidecar_mismatches_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.clf1");
        let img = Image::<f64>::zeros(8).unwrap();
        write_image(&path, &img, None).unwrap();
        // overwrite sidecar with a wrong n
        fs::write(
            path.with_extension("json"),
            "{\"kind\":\"image\",\"n\":16,\"fov\":[-1.0,1.0]}",
        )
        .unwrap();
        assert!(matches!(read_image::<f64>(&path), Err(Error::Format(_))));
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = DatasetManifest {
            seed: 7,
            count: 3,
            n: 64,
            params: GenParams {
                max_ellipses: 5,
                supersample: 4,
            },
        };
        write_manifest(dir.path(), &m).unwrap();
        assert_eq!(read_manifest(dir.path()).unwrap(), m);
    }
}
