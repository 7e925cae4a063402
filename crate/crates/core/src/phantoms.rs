//! Parametric scenes (random ellipses, disks, squares), rasterization,
//! closed-form sinogram and Fourier oracles, noise, and downsampling.
//!
//! The random-scene distribution is fixed by the documented constants below:
//! every scene carries one large "body" ellipse plus smaller interior
//! ellipses, and amplitudes are drawn so the stacked intensities stay inside
//! `[0, 1]` by construction (no post-render clipping, which keeps the
//! closed-form line-integral oracle exactly linear).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bessel::j1;
use crate::error::{Error, Result};
use crate::grid::Image;
use crate::radon::{AngleSet, Sinogram};
use crate::scalar::Scalar;
use crate::util::child_seed;

/// Shapes never reach closer than `1 - CONTAINMENT_MARGIN` to the unit circle.
const CONTAINMENT_MARGIN: f64 = 0.97;
/// Body ellipse semi-axis range.
const BODY_AXIS: (f64, f64) = (0.6, 0.8);
/// Maximum body center radius.
const BODY_CENTER_MAX: f64 = 0.08;
/// Body amplitude range.
const BODY_AMP: (f64, f64) = (0.55, 0.85);
/// Secondary ellipse semi-axis range.
const SECONDARY_AXIS: (f64, f64) = (0.15, 0.32);
/// Secondary amplitude range before budget rescaling.
const SECONDARY_AMP: (f64, f64) = (0.1, 0.4);
/// Supersampling used for dataset rasterization.
pub const DATASET_SUPERSAMPLE: usize = 4;

/// Solid ellipse with constant amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipse<T> {
    pub center: (T, T),
    pub semi_axes: (T, T),
    pub rotation: T,
    pub amplitude: T,
}

impl<T: Scalar> Ellipse<T> {
    pub fn new(center: (T, T), semi_axes: (T, T), rotation: T, amplitude: T) -> Result<Self> {
        if !(semi_axes.0 > T::zero() && semi_axes.1 > T::zero()) {
            return Err(Error::InvalidArgument("ellipse semi-axes must be positive".into()));
        }
        if amplitude.abs() > T::one() {
            return Err(Error::InvalidArgument("ellipse amplitude must lie in [-1, 1]".into()));
        }
        let reach = (center.0 * center.0 + center.1 * center.1).sqrt()
            + semi_axes.0.max(semi_axes.1);
        if reach >= T::one() {
            return Err(Error::InvalidArgument(format!(
                "ellipse not contained in the unit disk (reach {reach})"
            )));
        }
        Ok(Self {
            center,
            semi_axes,
            rotation,
            amplitude,
        })
    }

    fn contains(&self, x1: T, x2: T) -> bool {
        let (c, s) = (self.rotation.cos(), self.rotation.sin());
        let dx = x1 - self.center.0;
        let dy = x2 - self.center.1;
        let u = (dx * c + dy * s) / self.semi_axes.0;
        let v = (-dx * s + dy * c) / self.semi_axes.1;
        u * u + v * v < T::one()
    }

    // Exact chord length of the line x = p v + t v_perp through the ellipse.
    fn chord(&self, p: T, cos_t: T, sin_t: T) -> T {
        let (c, s) = (self.rotation.cos(), self.rotation.sin());
        let map = |x: T, y: T| ((x * c + y * s) / self.semi_axes.0, (-x * s + y * c) / self.semi_axes.1);
        let (y0x, y0y) = map(p * cos_t - self.center.0, p * sin_t - self.center.1);
        let (wx, wy) = map(-sin_t, cos_t); // direction v_perp in ellipse frame
        let a = wx * wx + wy * wy;
        let b = y0x * wx + y0y * wy;
        let cq = y0x * y0x + y0y * y0y - T::one();
        let disc = b * b - a * cq;
        if disc <= T::zero() {
            T::zero()
        } else {
            T::of(2.0) * disc.sqrt() / a
        }
    }
}

/// Axis-aligned square with constant amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSquare<T> {
    pub center: (T, T),
    pub half_width: T,
    pub amplitude: T,
}

impl<T: Scalar> AxisSquare<T> {
    pub fn new(center: (T, T), half_width: T, amplitude: T) -> Result<Self> {
        if half_width <= T::zero() {
            return Err(Error::InvalidArgument("square half-width must be positive".into()));
        }
        if amplitude.abs() > T::one() {
            return Err(Error::InvalidArgument("square amplitude must lie in [-1, 1]".into()));
        }
        let reach = (center.0 * center.0 + center.1 * center.1).sqrt()
            + half_width * T::SQRT_2();
        if reach >= T::one() {
            return Err(Error::InvalidArgument(format!(
                "square not contained in the unit disk (corner reach {reach})"
            )));
        }
        Ok(Self {
            center,
            half_width,
            amplitude,
        })
    }

    fn contains(&self, x1: T, x2: T) -> bool {
        (x1 - self.center.0).abs() < self.half_width && (x2 - self.center.1).abs() < self.half_width
    }

    // Chord through the square: intersect the two slab constraints in t.
    fn chord(&self, p: T, cos_t: T, sin_t: T) -> T {
        let mut lo = T::neg_infinity();
        let mut hi = T::infinity();
        // x1(t) = p cos - t sin, x2(t) = p sin + t cos
        for (base, dir) in [
            (p * cos_t - self.center.0, -sin_t),
            (p * sin_t - self.center.1, cos_t),
        ] {
            if dir.abs() < T::of(1e-300) {
                if base.abs() >= self.half_width {
                    return T::zero();
                }
                continue;
            }
            let t1 = (-self.half_width - base) / dir;
            let t2 = (self.half_width - base) / dir;
            lo = lo.max(t1.min(t2));
            hi = hi.min(t1.max(t2));
        }
        (hi - lo).max(T::zero())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape<T> {
    Ellipse(Ellipse<T>),
    Square(AxisSquare<T>),
}

impl<T: Scalar> Shape<T> {
    fn amplitude(&self) -> T {
        match self {
            Shape::Ellipse(e) => e.amplitude,
            Shape::Square(s) => s.amplitude,
        }
    }

    fn indicator(&self, x1: T, x2: T) -> bool {
        match self {
            Shape::Ellipse(e) => e.contains(x1, x2),
            Shape::Square(s) => s.contains(x1, x2),
        }
    }

    fn chord(&self, p: T, cos_t: T, sin_t: T) -> T {
        match self {
            Shape::Ellipse(e) => e.chord(p, cos_t, sin_t),
            Shape::Square(s) => s.chord(p, cos_t, sin_t),
        }
    }
}

/// Ordered list of shapes; the rendered image is the amplitude-weighted sum
/// of their indicator functions.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene<T> {
    shapes: Vec<Shape<T>>,
}

impl<T: Scalar> Scene<T> {
    pub fn new(shapes: Vec<Shape<T>>) -> Result<Self> {
        if shapes.is_empty() {
            return Err(Error::InvalidArgument("scene must contain at least one shape".into()));
        }
        Ok(Self { shapes })
    }

    pub fn shapes(&self) -> &[Shape<T>] {
        &self.shapes
    }

    /// Point evaluation of the scene intensity.
    pub fn eval(&self, x1: T, x2: T) -> T {
        self.shapes
            .iter()
            .filter(|s| s.indicator(x1, x2))
            .map(|s| s.amplitude())
            .sum()
    }

    /// Exact line integral at offset `p`, direction angle `theta`.
    pub fn line_integral(&self, p: T, theta: T) -> T {
        let (c, s) = (theta.cos(), theta.sin());
        self.shapes
            .iter()
            .map(|sh| sh.amplitude() * sh.chord(p, c, s))
            .sum()
    }
}

/// Single centered disk of radius `a in (0, 1)`, amplitude 1.
pub fn disk_scene<T: Scalar>(a: T) -> Result<Scene<T>> {
    if !(a > T::zero() && a < T::one()) {
        return Err(Error::InvalidArgument(format!("disk radius must lie in (0,1), got {a}")));
    }
    Scene::new(vec![Shape::Ellipse(Ellipse::new(
        (T::zero(), T::zero()),
        (a, a),
        T::zero(),
        T::one(),
    )?)])
}

/// Random ellipse scene: one large body ellipse plus up to
/// `max_ellipses - 1` smaller interior ellipses, amplitudes budgeted so the
/// stacked intensity never exceeds `CONTAINMENT_MARGIN`.
pub fn random_ellipse_scene<T: Scalar>(seed: u64, max_ellipses: usize) -> Result<Scene<T>> {
    if max_ellipses < 1 {
        return Err(Error::InvalidArgument("max_ellipses must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(1..=max_ellipses);
    let mut shapes = Vec::with_capacity(count);

    let a1 = rng.gen_range(BODY_AXIS.0..BODY_AXIS.1);
    let a2 = rng.gen_range(BODY_AXIS.0..BODY_AXIS.1);
    let rmax = (CONTAINMENT_MARGIN - a1.max(a2)).min(BODY_CENTER_MAX);
    let rr = rng.gen_range(0.0..rmax);
    let ang = rng.gen_range(0.0..std::f64::consts::TAU);
    let rot = rng.gen_range(0.0..std::f64::consts::PI);
    let body_amp = rng.gen_range(BODY_AMP.0..BODY_AMP.1);
    shapes.push(Shape::Ellipse(Ellipse::new(
        (T::of(rr * ang.cos()), T::of(rr * ang.sin())),
        (T::of(a1), T::of(a2)),
        T::of(rot),
        T::of(body_amp),
    )?));

    let mut raw: Vec<(f64, f64, f64, f64, f64, f64)> = Vec::new();
    let mut amp_sum = 0.0;
    for _ in 1..count {
        let a1 = rng.gen_range(SECONDARY_AXIS.0..SECONDARY_AXIS.1);
        let a2 = rng.gen_range(SECONDARY_AXIS.0..SECONDARY_AXIS.1);
        let rmax = CONTAINMENT_MARGIN - a1.max(a2);
        let rr = rng.gen_range(0.0..rmax);
        let ang = rng.gen_range(0.0..std::f64::consts::TAU);
        let rot = rng.gen_range(0.0..std::f64::consts::PI);
        let amp = rng.gen_range(SECONDARY_AMP.0..SECONDARY_AMP.1);
        amp_sum += amp;
        raw.push((rr * ang.cos(), rr * ang.sin(), a1, a2, rot, amp));
    }
    // scale secondary amplitudes into the remaining intensity budget
    let budget = CONTAINMENT_MARGIN - body_amp;
    let scale = if amp_sum > budget { budget / amp_sum } else { 1.0 };
    for (cx, cy, a1, a2, rot, amp) in raw {
        shapes.push(Shape::Ellipse(Ellipse::new(
            (T::of(cx), T::of(cy)),
            (T::of(a1), T::of(a2)),
            T::of(rot),
            T::of(amp * scale),
        )?));
    }
    Scene::new(shapes)
}

/// Random two-square scene (out-of-distribution probe).
pub fn squares_scene<T: Scalar>(seed: u64, count: usize) -> Result<Scene<T>> {
    if count < 1 {
        return Err(Error::InvalidArgument("square count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shapes = Vec::with_capacity(count);
    let budget = CONTAINMENT_MARGIN / count as f64;
    for _ in 0..count {
        let w = rng.gen_range(0.1..0.25);
        let rmax = CONTAINMENT_MARGIN - w * std::f64::consts::SQRT_2;
        let rr = rng.gen_range(0.0..rmax);
        let ang = rng.gen_range(0.0..std::f64::consts::TAU);
        let amp = rng.gen_range(0.4..1.0) * budget;
        shapes.push(Shape::Square(AxisSquare::new(
            (T::of(rr * ang.cos()), T::of(rr * ang.sin())),
            T::of(w),
            T::of(amp),
        )?));
    }
    Scene::new(shapes)
}

/// Rasterize a scene: each pixel is the mean of `supersample^2` point
/// evaluations. Linear in the shape amplitudes.
pub fn render<T: Scalar>(scene: &Scene<T>, n: usize, supersample: usize) -> Result<Image<T>> {
    if supersample < 1 {
        return Err(Error::InvalidArgument("supersample must be >= 1".into()));
    }
    let h = T::of(2.0) / T::of_usize(n);
    let ss = T::of_usize(supersample);
    let inv = T::one() / (ss * ss);
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let mut row = Vec::with_capacity(n);
            for c in 0..n {
                let mut acc = T::zero();
                for si in 0..supersample {
                    let x2 = -T::one() + (T::of_usize(r) + (T::of_usize(si) + T::of(0.5)) / ss) * h;
                    for sj in 0..supersample {
                        let x1 =
                            -T::one() + (T::of_usize(c) + (T::of_usize(sj) + T::of(0.5)) / ss) * h;
                        acc += scene.eval(x1, x2);
                    }
                }
                row.push(acc * inv);
            }
            row
        })
        .collect();
    Image::new(n, rows.concat())
}

/// Exact sinogram of a scene from the closed-form chord lengths.
pub fn analytic_sinogram<T: Scalar>(
    scene: &Scene<T>,
    angles: &AngleSet<T>,
    n_p: usize,
) -> Result<Sinogram<T>> {
    if n_p < 2 {
        return Err(Error::InvalidArgument(format!("need n_p >= 2 offsets, got {n_p}")));
    }
    let dp = T::of(2.0) / T::of_usize(n_p - 1);
    let offsets: Vec<T> = (0..n_p).map(|i| -T::one() + T::of_usize(i) * dp).collect();
    sinogram_at_offsets(scene, angles, &offsets)
}

fn sinogram_at_offsets<T: Scalar>(
    scene: &Scene<T>,
    angles: &AngleSet<T>,
    offsets: &[T],
) -> Result<Sinogram<T>> {
    let nt = angles.len();
    let columns: Vec<Vec<T>> = angles
        .thetas()
        .par_iter()
        .map(|&theta| offsets.iter().map(|&p| scene.line_integral(p, theta)).collect())
        .collect();
    let mut values = vec![T::zero(); offsets.len() * nt];
    for (k, col) in columns.iter().enumerate() {
        for i in 0..offsets.len() {
            values[i * nt + k] = col[i];
        }
    }
    Sinogram::new(offsets.len(), angles.clone(), values)
}

/// Measurement protocol for diagnostics: closed-form line integrals at
/// `oversample`-times finer offsets, block-averaged onto the target grid, so
/// measurements never share a discretization with [`crate::radon::radon_forward`]
/// on the test grid. The fine offsets are centered on each target offset so
/// the block mean lands exactly on the uniform `[-1, 1]` grid.
pub fn measurement_sinogram<T: Scalar>(
    scene: &Scene<T>,
    angles: &AngleSet<T>,
    n_p: usize,
    oversample: usize,
) -> Result<Sinogram<T>> {
    if n_p < 2 || oversample < 1 {
        return Err(Error::InvalidArgument("need n_p >= 2 and oversample >= 1".into()));
    }
    let dp = T::of(2.0) / T::of_usize(n_p - 1);
    let ov = T::of_usize(oversample);
    let mut fine = Vec::with_capacity(n_p * oversample);
    for i in 0..n_p {
        let center = -T::one() + T::of_usize(i) * dp;
        for s in 0..oversample {
            let off = (T::of_usize(s) - (ov - T::one()) * T::of(0.5)) * dp / ov;
            fine.push(center + off);
        }
    }
    let fine_sino = sinogram_at_offsets(scene, angles, &fine)?;
    let nt = angles.len();
    let mut values = vec![T::zero(); n_p * nt];
    let inv = T::one() / ov;
    for i in 0..n_p {
        for k in 0..nt {
            let mut acc = T::zero();
            for s in 0..oversample {
                acc += fine_sino.values()[(i * oversample + s) * nt + k];
            }
            values[i * nt + k] = acc * inv;
        }
    }
    Sinogram::new(n_p, angles.clone(), values)
}

/// Continuum Fourier transform of the disk indicator `f_a`, evaluated at the
/// frequency vector `xi` (radians per unit length):
/// `a^2 fhat_1(|a xi|)` with `fhat_1(rho) = 2 pi J_1(rho) / rho` and
/// `fhat_1(0) = pi`. Written so the dilation identity
/// `value(a, xi) = a^2 value(1, a xi)` holds bit-exactly.
pub fn disk_fourier_analytic<T: Scalar>(a: T, xi: (T, T)) -> Result<T> {
    if !(a > T::zero() && a <= T::one()) {
        return Err(Error::InvalidArgument(format!("disk radius must lie in (0,1], got {a}")));
    }
    Ok(a * a * fhat_unit_disk((a * xi.0).hypot(a * xi.1)))
}

/// `fhat_1(rho)` for the unit disk; radial.
pub fn fhat_unit_disk<T: Scalar>(rho: T) -> T {
    if rho == T::zero() {
        T::PI()
    } else {
        T::of(2.0) * T::PI() * j1(rho) / rho
    }
}

/// Additive Gaussian noise with standard deviation `sigma_rel * max |sino|`,
/// deterministic in the seed.
pub fn add_noise<T: Scalar>(sino: &Sinogram<T>, sigma_rel: T, seed: u64) -> Result<Sinogram<T>>
where
    StandardNormal: Distribution<T>,
{
    if sigma_rel < T::zero() {
        return Err(Error::InvalidArgument("noise level must be nonnegative".into()));
    }
    if sigma_rel == T::zero() {
        return Ok(sino.clone());
    }
    let peak = sino.values().iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let sigma = sigma_rel * peak;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = sino
        .values()
        .iter()
        .map(|&v| v + sigma * StandardNormal.sample(&mut rng))
        .collect();
    Sinogram::new(sino.n_p(), sino.angles().clone(), values)
}

/// Block-mean image downsampling by an integer factor.
pub fn downsample_image<T: Scalar>(img: &Image<T>, factor: usize) -> Result<Image<T>> {
    if factor == 0 || img.n() % factor != 0 {
        return Err(Error::InvalidArgument(format!(
            "factor {factor} must divide image side {}",
            img.n()
        )));
    }
    let n = img.n() / factor;
    let inv = T::one() / T::of_usize(factor * factor);
    let mut values = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let mut acc = T::zero();
            for dr in 0..factor {
                for dc in 0..factor {
                    acc += img.at(r * factor + dr, c * factor + dc);
                }
            }
            values.push(acc * inv);
        }
    }
    Image::new(n, values)
}

/// Block-mean sinogram downsampling along the offset variable.
pub fn downsample_sinogram<T: Scalar>(sino: &Sinogram<T>, factor: usize) -> Result<Sinogram<T>> {
    if factor == 0 || sino.n_p() % factor != 0 {
        return Err(Error::InvalidArgument(format!(
            "factor {factor} must divide offset count {}",
            sino.n_p()
        )));
    }
    let n_p = sino.n_p() / factor;
    let nt = sino.n_theta();
    let inv = T::one() / T::of_usize(factor);
    let mut values = vec![T::zero(); n_p * nt];
    for i in 0..n_p {
        for k in 0..nt {
            let mut acc = T::zero();
            for s in 0..factor {
                acc += sino.values()[(i * factor + s) * nt + k];
            }
            values[i * nt + k] = acc * inv;
        }
    }
    Sinogram::new(n_p, sino.angles().clone(), values)
}

/// Generation parameters kept with a dataset so scenes can be rebuilt
/// deterministically.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GenParams {
    pub max_ellipses: usize,
    pub supersample: usize,
}

/// Reproducible collection of rendered ellipse scenes.
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    pub images: Vec<Image<T>>,
    pub scenes: Vec<Scene<T>>,
    pub seed: u64,
    pub n: usize,
    pub params: GenParams,
}

impl<T> Dataset<T> {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

/// Generate `count` random ellipse images at resolution `n`. Scenes derive
/// per-image seeds through [`child_seed`], so parallel rendering is
/// scheduling-independent.
pub fn generate_dataset<T: Scalar>(
    seed: u64,
    count: usize,
    n: usize,
    max_ellipses: usize,
) -> Result<Dataset<T>> {
    if count < 1 {
        return Err(Error::InvalidArgument("dataset count must be >= 1".into()));
    }
    let scenes: Vec<Scene<T>> = (0..count)
        .map(|i| random_ellipse_scene(child_seed(seed, i as u64), max_ellipses))
        .collect::<Result<_>>()?;
    let images: Vec<Image<T>> = scenes
        .par_iter()
        .map(|s| render(s, n, DATASET_SUPERSAMPLE))
        .collect::<Result<_>>()?;
    Ok(Dataset {
        images,
        scenes,
        seed,
        n,
        params: GenParams {
            max_ellipses,
            supersample: DATASET_SUPERSAMPLE,
        },
    })
}

/// Smooth compactly supported radial phantom
/// `(1 - (r/radius)^2)^4` for `r < radius`; effectively band-limited, used to
/// exercise full-angle reconstruction.
pub fn smooth_radial_phantom<T: Scalar>(n: usize, radius: T) -> Result<Image<T>> {
    Image::from_fn(n, |x1, x2| {
        let r2 = (x1 * x1 + x2 * x2) / (radius * radius);
        if r2 < T::one() {
            (T::one() - r2).powi(4)
        } else {
            T::zero()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::l2_norm;

    fn deg(d: f64) -> f64 {
        d * std::f64::consts::PI / 180.0
    }

    #[test]
    fn ellipse_and_square_validation() {
        assert!(Ellipse::new((0.0, 0.0), (0.5, -0.1), 0.0, 1.0f64).is_err());
        assert!(Ellipse::new((0.8, 0.0), (0.3, 0.3), 0.0, 1.0f64).is_err());
        assert!(Ellipse::new((0.0, 0.0), (0.3, 0.3), 0.0, 1.5f64).is_err());
        assert!(AxisSquare::new((0.0, 0.0), 0.8, 1.0f64).is_err());
        assert!(Scene::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn disk_scene_bounds() {
        assert!(disk_scene(0.5f64).is_ok());
        assert!(disk_scene(0.999f64).is_ok());
        assert!(disk_scene(0.0f64).is_err());
        assert!(disk_scene(1.0f64).is_err());
    }

    #[test]
    fn random_scene_is_deterministic_and_contained() {
        let a = random_ellipse_scene::<f64>(7, 5).unwrap();
        let b = random_ellipse_scene::<f64>(7, 5).unwrap();
        assert_eq!(a, b);
        for seed in 0..10_000u64 {
            let scene = random_ellipse_scene::<f64>(seed, 5).unwrap();
            assert!(!scene.shapes().is_empty() && scene.shapes().len() <= 5);
            for shape in scene.shapes() {
                if let Shape::Ellipse(e) = shape {
                    let reach = (e.center.0.powi(2) + e.center.1.powi(2)).sqrt()
                        + e.semi_axes.0.max(e.semi_axes.1);
                    assert!(reach < 1.0);
                }
            }
        }
    }

    #[test]
    fn random_scene_intensity_budget() {
        for seed in 0..500u64 {
            let scene = random_ellipse_scene::<f64>(seed, 5).unwrap();
            let total: f64 = scene.shapes().iter().map(|s| s.amplitude()).sum();
            assert!(total <= CONTAINMENT_MARGIN + 1e-12, "seed {seed}: {total}");
        }
    }

    #[test]
    fn render_disk_area_and_linearity() {
        let img = render(&disk_scene(0.5).unwrap(), 256, 4).unwrap();
        let h2 = img.pixel_width() * img.pixel_width();
        let mass: f64 = img.values().iter().sum::<f64>() * h2;
        let want = std::f64::consts::PI * 0.25;
        assert!((mass - want).abs() < 0.005 * want, "mass {mass}");
    }

    #[test]
    fn render_zero_amplitude_is_zero() {
        let scene = Scene::new(vec![Shape::Ellipse(
            Ellipse::new((0.0, 0.0), (0.4, 0.3), 0.3, 0.0f64).unwrap(),
        )])
        .unwrap();
        let img = render(&scene, 64, 2).unwrap();
        assert!(img.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn render_supersampling_consistency() {
        let scene = random_ellipse_scene::<f64>(4, 4).unwrap();
        let fine = render(&scene, 256, 4).unwrap();
        let coarse = render(&scene, 128, 4).unwrap();
        let down = downsample_image(&fine, 2).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in down.values().iter().zip(coarse.values()) {
            num += (a - b) * (a - b);
            den += b * b;
        }
        let rel = (num / den).sqrt();
        assert!(rel < 0.02, "relative difference {rel}");
    }

    #[test]
    fn analytic_sinogram_disk_and_square_chords() {
        let sino = analytic_sinogram(
            &disk_scene(0.5).unwrap(),
            &AngleSet::new(deg(30.0), 3).unwrap(),
            101,
        )
        .unwrap();
        for (i, p) in sino.offsets().iter().enumerate() {
            let want = if p.abs() < 0.5 { 2.0 * (0.25 - p * p).sqrt() } else { 0.0 };
            assert!((sino.at(i, 1) - want).abs() < 1e-12);
        }

        let sq = Scene::new(vec![Shape::Square(
            AxisSquare::new((0.0, 0.0), 0.3, 0.8f64).unwrap(),
        )])
        .unwrap();
        // theta = 0: lines are vertical, |p| < w crosses the full height
        let s2 = analytic_sinogram(&sq, &AngleSet::new(deg(10.0), 3).unwrap(), 41).unwrap();
        let mid_theta = s2.angles().thetas()[1];
        assert_eq!(mid_theta, 0.0);
        for (i, p) in s2.offsets().iter().enumerate() {
            let want = if p.abs() < 0.3 { 2.0 * 0.3 * 0.8 } else { 0.0 };
            assert!((s2.at(i, 1) - want).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn disk_fourier_analytic_examples() {
        assert!(disk_fourier_analytic(0.0f64, (0.0, 0.0)).is_err());
        assert!(disk_fourier_analytic(1.2f64, (0.0, 0.0)).is_err());
        for a in [0.25f64, 0.5, 1.0] {
            let v = disk_fourier_analytic(a, (0.0, 0.0)).unwrap();
            assert!((v - std::f64::consts::PI * a * a).abs() < 1e-15);
        }
        // dilation identity, exact by construction
        for a in [0.25f64, 0.5, 0.8] {
            for xi in [(3.0, 1.0), (0.0, 7.5), (20.0, -14.0)] {
                let lhs = disk_fourier_analytic(a, xi).unwrap();
                let rhs = a * a * disk_fourier_analytic(1.0, (a * xi.0, a * xi.1)).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn add_noise_examples() {
        let sino = analytic_sinogram(
            &disk_scene(0.5).unwrap(),
            &AngleSet::new(deg(30.0), 4).unwrap(),
            64,
        )
        .unwrap();
        let same = add_noise(&sino, 0.0, 9).unwrap();
        assert_eq!(same.values(), sino.values());
        let n1 = add_noise(&sino, 0.05, 1).unwrap();
        let n2 = add_noise(&sino, 0.05, 2).unwrap();
        assert_ne!(n1.values(), n2.values());
        assert_eq!(n1.values(), add_noise(&sino, 0.05, 1).unwrap().values());
    }

    #[test]
    fn noise_std_matches_target() {
        let angles = AngleSet::new(deg(45.0), 100).unwrap();
        let base = Sinogram::new(10_000, angles, vec![1.0; 10_000 * 100]).unwrap();
        let noisy = add_noise(&base, 0.1, 4).unwrap();
        let n = noisy.values().len() as f64;
        let mean: f64 = noisy.values().iter().sum::<f64>() / n;
        let var: f64 = noisy.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        // std of the sample std is sigma / sqrt(2 N)
        let se = 0.1 / (2.0 * n).sqrt();
        assert!((std - 0.1).abs() < 3.0 * se, "std {std}");
    }

    #[test]
    fn downsample_examples() {
        let img = render(&disk_scene(0.6).unwrap(), 512, 2).unwrap();
        let same = downsample_image(&img, 1).unwrap();
        assert_eq!(same.values(), img.values());
        let small = downsample_image(&img, 4).unwrap();
        let mass_big: f64 = img.values().iter().sum::<f64>() / (512.0 * 512.0);
        let mass_small: f64 = small.values().iter().sum::<f64>() / (128.0 * 128.0);
        assert!((mass_big - mass_small).abs() < 1e-12);
        assert!(downsample_image(&img, 3).is_err());

        let flat = Image::new(8, vec![0.7f64; 64]).unwrap();
        let d = downsample_image(&flat, 2).unwrap();
        assert!(d.values().iter().all(|&v| (v - 0.7).abs() < 1e-15));
    }

    #[test]
    fn measurement_protocol_close_to_exact_grid_sinogram() {
        let scene = random_ellipse_scene::<f64>(11, 4).unwrap();
        let angles = AngleSet::new(deg(50.0), 21).unwrap();
        let exact = analytic_sinogram(&scene, &angles, 181).unwrap();
        let meas = measurement_sinogram(&scene, &angles, 181, 4).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in meas.values().iter().zip(exact.values()) {
            num += (a - b) * (a - b);
            den += b * b;
        }
        assert!((num / den).sqrt() < 0.02);
        assert!(measurement_sinogram(&scene, &angles, 1, 4).is_err());
    }

    #[test]
    fn dataset_generation_reproducible_and_in_range() {
        let a = generate_dataset::<f64>(7, 8, 64, 5).unwrap();
        let b = generate_dataset::<f64>(7, 8, 64, 5).unwrap();
        assert_eq!(a.len(), 8);
        for (x, y) in a.images.iter().zip(b.images.iter()) {
            assert_eq!(x.values(), y.values());
        }
        let c = generate_dataset::<f64>(8, 8, 64, 5).unwrap();
        assert!(a
            .images
            .iter()
            .zip(c.images.iter())
            .any(|(x, y)| x.values() != y.values()));
        for img in &a.images {
            assert!(img.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
        assert!(generate_dataset::<f64>(7, 0, 64, 5).is_err());
    }

    #[test]
    fn disk_l2_scaling() {
        // || f_a ||_L2 = sqrt(pi) a
        for a in [0.3f64, 0.6, 0.9] {
            let img = render(&disk_scene(a).unwrap(), 256, 4).unwrap();
            let want = std::f64::consts::PI.sqrt() * a;
            assert!((l2_norm(&img) - want).abs() < 0.01 * want);
        }
    }
}
