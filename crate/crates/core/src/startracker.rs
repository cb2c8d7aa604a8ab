//! Emulated star catalog and pinhole star-tracker heads.
//!
//! Stars are pure directions in the inertial frame. A camera head is mounted
//! on the body through `mount`, whose attitude matrix takes body coordinates
//! to camera coordinates; the boresight is the camera `+z` axis.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::attitude::{Quaternion, RotationMatrix};
use crate::numerics::{Mat3, RngStream, Vec3};
use crate::{Error, Result};

const BORESIGHT: Vec3 = Vec3::new(0.0, 0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StarCatalog {
    pub stars: Vec<Vec3>,
    /// Seed the catalog was generated from; `None` for imported catalogs.
    pub seed: Option<u64>,
}

impl StarCatalog {
    /// `n` directions uniformly distributed on the unit sphere.
    pub fn generate(n: usize, rng: &mut RngStream) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!(
                "catalog needs at least 2 stars, got {n}"
            )));
        }
        let mut stars = Vec::with_capacity(n);
        while stars.len() < n {
            let v = Vec3::new(
                rng.standard_normal(),
                rng.standard_normal(),
                rng.standard_normal(),
            );
            if let Some(u) = v.normalized() {
                stars.push(u);
            }
        }
        Ok(StarCatalog {
            stars,
            seed: Some(rng.seed()),
        })
    }

    pub fn len(&self) -> usize {
        self.stars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stars.is_empty()
    }

    /// CSV with an `x,y,z` header and one unit vector per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,z")?;
        for s in &self.stars {
            writeln!(w, "{},{},{}", s[0], s[1], s[2])?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Reads `x,y,z` lines; the header line is optional. Vectors must be unit
    /// within `1e-6`; anything off by more than rounding is renormalised.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut stars = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('x')) {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("catalog line {}: {e}", lineno + 1)))?;
            let [x, y, z]: [f64; 3] = vals.try_into().map_err(|_| {
                Error::Config(format!("catalog line {}: expected 3 values", lineno + 1))
            })?;
            let v = Vec3::new(x, y, z);
            if !v.is_finite() || (v.norm() - 1.0).abs() > 1e-6 {
                return Err(Error::Config(format!(
                    "catalog line {}: not a unit vector",
                    lineno + 1
                )));
            }
            if (v.norm() - 1.0).abs() > 4.0 * f64::EPSILON {
                stars.push(v.normalized().unwrap_or(v));
            } else {
                stars.push(v);
            }
        }
        if stars.len() < 2 {
            return Err(Error::Config("catalog needs at least 2 stars".into()));
        }
        Ok(StarCatalog { stars, seed: None })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub focal_length: f64,
    /// Half-angle of the conical field of view, radians.
    pub fov_half_angle: f64,
    /// Body → camera mounting attitude.
    pub mount: Quaternion,
}

impl CameraModel {
    pub fn new(focal_length: f64, fov_half_angle: f64, mount: Quaternion) -> Result<Self> {
        if !(focal_length.is_finite() && focal_length > 0.0) {
            return Err(Error::invalid("focal length must be positive"));
        }
        if !(fov_half_angle > 0.0 && fov_half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::invalid(
                "field-of-view half angle must be in (0, π/2)",
            ));
        }
        if !mount.is_unit(1e-9) {
            return Err(Error::invalid("camera mount must be a unit quaternion"));
        }
        Ok(CameraModel {
            focal_length,
            fov_half_angle,
            mount,
        })
    }

    /// Camera whose boresight points along `boresight` in body coordinates.
    pub fn pointing(focal_length: f64, fov_half_angle: f64, boresight: Vec3) -> Result<Self> {
        let z = boresight
            .normalized()
            .ok_or_else(|| Error::invalid("boresight has zero length"))?;
        // any axis not parallel to the boresight fixes the roll about it
        let hint = if z.x().abs() < 0.9 {
            Vec3::new(1.0, 0.0, 0.0)
        } else {
            Vec3::new(0.0, 1.0, 0.0)
        };
        let y = z
            .cross(&hint)
            .normalized()
            .ok_or(Error::DegenerateGeometry)?;
        let x = y.cross(&z);
        let a = RotationMatrix(Mat3::from_rows(&[x, y, z]));
        Self::new(focal_length, fov_half_angle, Quaternion::from_matrix(&a))
    }

    /// Up to six heads along `+z, +x, +y, −z, −x, −y` of the body.
    pub fn orthogonal_set(n: usize, focal_length: f64, fov_half_angle: f64) -> Result<Vec<Self>> {
        if !(1..=6).contains(&n) {
            return Err(Error::invalid(format!(
                "camera count must be 1..=6, got {n}"
            )));
        }
        let axes = [
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, -1.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
        ];
        axes[..n]
            .iter()
            .map(|&a| Self::pointing(focal_length, fov_half_angle, a))
            .collect()
    }

    /// Largest image coordinate magnitude inside the field of view.
    pub fn image_half_width(&self) -> f64 {
        self.focal_length * self.fov_half_angle.tan()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarObservation {
    /// Measured direction, body frame.
    pub b: Vec3,
    /// Catalog direction, inertial frame.
    pub r: Vec3,
    pub weight: f64,
}

impl StarObservation {
    pub fn new(b: Vec3, r: Vec3) -> Self {
        StarObservation { b, r, weight: 1.0 }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }
}

/// Image-plane coordinates, same units as the focal length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagePoint {
    pub x: f64,
    pub y: f64,
}

/// Strict cone test plus a front-of-camera guard.
pub fn is_visible(star_cam: Vec3, cam: &CameraModel) -> bool {
    let c = star_cam.dot(&BORESIGHT);
    c > 0.0 && c > cam.fov_half_angle.cos()
}

/// Pinhole projection `x' = f·x/z`, `y' = f·y/z`.
pub fn project(star_cam: Vec3, cam: &CameraModel) -> Result<ImagePoint> {
    let z = star_cam.z();
    if z <= 1e-12 {
        return Err(Error::BehindImagePlane);
    }
    Ok(ImagePoint {
        x: cam.focal_length * star_cam.x() / z,
        y: cam.focal_length * star_cam.y() / z,
    })
}

/// Unit star vector in the camera frame from an image point.
pub fn pixel_to_star_vector(p: ImagePoint, cam: &CameraModel) -> Vec3 {
    let f = cam.focal_length;
    let n = (f * f + p.x * p.x + p.y * p.y).sqrt();
    Vec3::new(p.x / n, p.y / n, f / n)
}

/// Emulate every camera head at the true attitude.
///
/// Each visible star goes through projection and back-projection, is rotated
/// into the body frame, then perturbed per axis with `N(0, sigma_star²)` and
/// renormalised. Identification is perfect: every `b` carries its catalog `r`.
/// Weights are left at 1.
pub fn observe(
    q_true: &Quaternion,
    catalog: &StarCatalog,
    cams: &[CameraModel],
    sigma_star: f64,
    rng: &mut RngStream,
) -> Result<Vec<StarObservation>> {
    if cams.is_empty() {
        return Err(Error::invalid("at least one camera is required"));
    }
    if !sigma_star.is_finite() || sigma_star < 0.0 {
        return Err(Error::invalid("sigma_star must be >= 0"));
    }
    let body_from_inertial = q_true.to_matrix()?;
    let mut out = Vec::new();
    for cam in cams {
        let cam_from_body = cam.mount.to_matrix()?;
        let cam_from_inertial =
            RotationMatrix(*cam_from_body.matrix() * *body_from_inertial.matrix());
        for &r in &catalog.stars {
            let s = cam_from_inertial.apply(r);
            if !is_visible(s, cam) {
                continue;
            }
            let measured_cam = pixel_to_star_vector(project(s, cam)?, cam);
            let b = cam_from_body.transpose().apply(measured_cam);
            let noise = Vec3::new(
                rng.gaussian(sigma_star)?,
                rng.gaussian(sigma_star)?,
                rng.gaussian(sigma_star)?,
            );
            let b = (b + noise).normalized().unwrap_or(b);
            out.push(StarObservation::new(b, r));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn cam(fov_deg: f64) -> CameraModel {
        CameraModel::new(1.0, fov_deg.to_radians(), Quaternion::IDENTITY).unwrap()
    }

    fn random_unit_quat(rng: &mut RngStream) -> Quaternion {
        Quaternion::new(
            rng.standard_normal(),
            rng.standard_normal(),
            rng.standard_normal(),
            rng.standard_normal(),
        )
        .normalize()
        .unwrap()
    }

    #[test]
    fn catalog_generation() {
        let a = StarCatalog::generate(100, &mut RngStream::new(1)).unwrap();
        let b = StarCatalog::generate(100, &mut RngStream::new(1)).unwrap();
        assert_eq!(a.len(), 100);
        assert_eq!(a, b);
        assert!(a.stars.iter().all(|s| (s.norm() - 1.0).abs() < 1e-12));
        assert!(matches!(
            StarCatalog::generate(1, &mut RngStream::new(1)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn catalog_is_uniform() {
        let c = StarCatalog::generate(10_000, &mut RngStream::new(7)).unwrap();
        let mean = c.stars.iter().fold(Vec3::zeros(), |m, s| m + *s) * (1.0 / 10_000.0);
        assert!(mean.norm() <= 0.05, "mean norm {}", mean.norm());
    }

    #[test]
    fn catalog_csv_round_trip() {
        let c = StarCatalog::generate(25, &mut RngStream::new(3)).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let back = StarCatalog::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.stars, c.stars);
        let headerless = b"1,0,0\n0,1,0\n";
        assert_eq!(StarCatalog::read_csv(&headerless[..]).unwrap().len(), 2);
        assert!(StarCatalog::read_csv(&b"x,y,z\n2,0,0\n0,1,0\n"[..]).is_err());
        assert!(StarCatalog::read_csv(&b"1,0\n0,1,0\n"[..]).is_err());
    }

    #[test]
    fn visibility() {
        let c = cam(20.0);
        assert!(is_visible(BORESIGHT, &c));
        let off = 25.0_f64.to_radians();
        assert!(!is_visible(Vec3::new(off.sin(), 0.0, off.cos()), &c));
        assert!(!is_visible(Vec3::new(0.0, 0.0, -1.0), &c));
        let ce = c.fov_half_angle.cos();
        assert!(!is_visible(Vec3::new((1.0 - ce * ce).sqrt(), 0.0, ce), &c));
    }

    #[test]
    fn projection() {
        let c = cam(50.0);
        assert_eq!(
            project(BORESIGHT, &c).unwrap(),
            ImagePoint { x: 0.0, y: 0.0 }
        );
        let p = project(Vec3::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2), &c).unwrap();
        assert!((p.x - 1.0).abs() < 1e-15 && p.y == 0.0);
        assert!(matches!(
            project(Vec3::new(1.0, 0.0, 0.0), &c),
            Err(Error::BehindImagePlane)
        ));
        assert!(matches!(
            project(Vec3::new(0.0, 0.0, -1.0), &c),
            Err(Error::BehindImagePlane)
        ));
    }

    #[test]
    fn back_projection() {
        let c = cam(50.0);
        assert_eq!(
            pixel_to_star_vector(ImagePoint { x: 0.0, y: 0.0 }, &c),
            BORESIGHT
        );
        let s = pixel_to_star_vector(ImagePoint { x: 1.0, y: 0.0 }, &c);
        assert!((s - Vec3::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2)).max_abs() < 1e-15);
    }

    #[test]
    fn projection_round_trip_in_fov() {
        let mut rng = RngStream::new(4);
        let c = CameraModel::new(2.5, 20f64.to_radians(), Quaternion::IDENTITY).unwrap();
        let w = c.image_half_width();
        for _ in 0..1000 {
            let p = ImagePoint {
                x: (2.0 * rng.uniform() - 1.0) * w * 0.7,
                y: (2.0 * rng.uniform() - 1.0) * w * 0.7,
            };
            let s = pixel_to_star_vector(p, &c);
            assert!((s.norm() - 1.0).abs() < 1e-15);
            let back = project(s, &c).unwrap();
            assert!((back.x - p.x).abs() < 1e-10 && (back.y - p.y).abs() < 1e-10);
        }
    }

    #[test]
    fn projected_points_stay_in_image() {
        let c = cam(20.0);
        let catalog = StarCatalog::generate(5000, &mut RngStream::new(5)).unwrap();
        for s in catalog.stars.iter().filter(|s| is_visible(**s, &c)) {
            let p = project(*s, &c).unwrap();
            assert!(p.x.abs() <= c.image_half_width() && p.y.abs() <= c.image_half_width());
        }
    }

    #[test]
    fn orthogonal_mounts_point_where_asked() {
        let cams = CameraModel::orthogonal_set(6, 1.0, 0.3).unwrap();
        let expected = [
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, -1.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
        ];
        for (c, axis) in cams.iter().zip(expected) {
            let in_cam = c.mount.to_matrix().unwrap().apply(axis);
            assert!((in_cam - BORESIGHT).max_abs() < 1e-12);
        }
        assert!(CameraModel::orthogonal_set(0, 1.0, 0.3).is_err());
        assert!(CameraModel::orthogonal_set(7, 1.0, 0.3).is_err());
    }

    #[test]
    fn camera_validation() {
        assert!(CameraModel::new(0.0, 0.3, Quaternion::IDENTITY).is_err());
        assert!(CameraModel::new(1.0, 0.0, Quaternion::IDENTITY).is_err());
        assert!(CameraModel::new(1.0, 1.6, Quaternion::IDENTITY).is_err());
        assert!(CameraModel::new(1.0, 0.3, Quaternion::new(0.0, 0.0, 0.0, 2.0)).is_err());
    }

    #[test]
    fn noiseless_observations_satisfy_attitude_equation() {
        let mut rng = RngStream::new(9);
        let catalog = StarCatalog::generate(400, &mut rng).unwrap();
        let cams = CameraModel::orthogonal_set(6, 1.0, 25f64.to_radians()).unwrap();
        for _ in 0..20 {
            let q = random_unit_quat(&mut rng);
            let a = q.to_matrix().unwrap();
            let obs = observe(&q, &catalog, &cams, 0.0, &mut rng).unwrap();
            assert!(!obs.is_empty());
            for o in obs {
                assert!((a.apply(o.r) - o.b).norm() <= 1e-10);
                assert!((o.b.norm() - 1.0).abs() < 1e-9 && (o.r.norm() - 1.0).abs() < 1e-9);
                assert_eq!(o.weight, 1.0);
            }
        }
    }

    #[test]
    fn visible_count_follows_solid_angle() {
        // expected fraction (1 − cos 20°)/2 ≈ 3.0% of 100 stars
        let cams = CameraModel::orthogonal_set(1, 1.0, 20f64.to_radians()).unwrap();
        let mut total = 0;
        for seed in 0..200 {
            let mut rng = RngStream::new(seed);
            let catalog = StarCatalog::generate(100, &mut rng).unwrap();
            let n = observe(&Quaternion::IDENTITY, &catalog, &cams, 0.0, &mut rng)
                .unwrap()
                .len();
            assert!(n <= 12, "seed {seed}: {n} visible");
            total += n;
        }
        let mean = total as f64 / 200.0;
        let expected = 100.0 * (1.0 - 20f64.to_radians().cos()) / 2.0;
        assert!((mean - expected).abs() < 0.5, "mean {mean} vs {expected}");
    }

    #[test]
    fn more_cameras_see_no_fewer_stars() {
        let mut rng = RngStream::new(10);
        let catalog = StarCatalog::generate(100, &mut rng).unwrap();
        for _ in 0..20 {
            let q = random_unit_quat(&mut rng);
            let one = CameraModel::orthogonal_set(1, 1.0, 0.35).unwrap();
            let six = CameraModel::orthogonal_set(6, 1.0, 0.35).unwrap();
            let n1 = observe(&q, &catalog, &one, 0.0, &mut rng).unwrap().len();
            let n6 = observe(&q, &catalog, &six, 0.0, &mut rng).unwrap().len();
            assert!(n6 >= n1);
        }
        assert!(matches!(
            observe(&Quaternion::IDENTITY, &catalog, &[], 0.0, &mut rng),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn visibility_is_rotation_consistent() {
        let mut rng = RngStream::new(11);
        let catalog = StarCatalog::generate(300, &mut rng).unwrap();
        let cams = CameraModel::orthogonal_set(3, 1.0, 0.35).unwrap();
        for _ in 0..20 {
            let q = random_unit_quat(&mut rng);
            let extra = random_unit_quat(&mut rng);
            // Rotating the inertial frame by `extra` moves every catalog star
            // to A(extra)ᵀ·r and the attitude to extra ⊗ q.
            let back = extra.to_matrix().unwrap().transpose();
            let moved = StarCatalog {
                stars: catalog.stars.iter().map(|s| back.apply(*s)).collect(),
                seed: None,
            };
            let n0 = observe(&q, &catalog, &cams, 0.0, &mut rng).unwrap().len();
            let n1 = observe(&(extra * q), &moved, &cams, 0.0, &mut rng)
                .unwrap()
                .len();
            assert_eq!(n0, n1);
        }
    }

    #[test]
    fn noise_scales_with_sigma() {
        // Per tangent-axis angular deviation has standard deviation sigma.
        let sigma = 0.005;
        let mut rng = RngStream::new(12);
        let catalog = StarCatalog::generate(2000, &mut rng).unwrap();
        let cams = CameraModel::orthogonal_set(6, 1.0, 0.5).unwrap();
        let mut dev = Vec::new();
        while dev.len() < 20_000 {
            let q = random_unit_quat(&mut rng);
            let a = q.to_matrix().unwrap();
            for o in observe(&q, &catalog, &cams, sigma, &mut rng).unwrap() {
                let truth = a.apply(o.r);
                let t1 = truth.cross(&Vec3::new(0.0, 0.0, 1.0)).normalized().unwrap();
                let t2 = truth.cross(&t1);
                dev.push(o.b.dot(&t1));
                dev.push(o.b.dot(&t2));
            }
        }
        let n = dev.len() as f64;
        let mean = dev.iter().sum::<f64>() / n;
        let sd = (dev.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((sd / sigma - 1.0).abs() < 0.1, "sd {sd}");
    }
}
