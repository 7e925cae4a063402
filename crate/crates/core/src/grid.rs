//! Discrete image/frequency grid on the square field of view `[-1,1]^2`.
//!
//! Conventions used by every module in this crate:
//!
//! * images are `n x n`, row-major, row `r` along `x2`, column `c` along `x1`,
//!   pixel centers `x_i = -1 + (i + 1/2) h` with pixel width `h = 2/n`;
//! * spectra are indexed by lattice frequencies `k = (k1, k2)`,
//!   `k_i in {-n/2, ..., n/2 - 1}`, with continuum frequency `xi = pi k`
//!   (radians per unit length, from the field of view of side 2);
//! * [`fft2`] is scaled by the pixel area so values approximate the continuum
//!   transform `int f(x) e^{-i xi . x} dx`, and the discrete Parseval identity
//!   `sum_k |F_k|^2 (dxi/2pi)^2 = sum_x |f_x|^2 h^2` holds to rounding.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Oversampling factor used when evaluating Sobolev norms: the image is
/// zero-extended so the frequency lattice is refined to `dxi = pi/4`.
/// Negative-order weights vary steeply near the origin and the native
/// `dxi = pi` lattice cannot resolve them.
pub const SOBOLEV_PAD: usize = 4;

/// Square raster of real values on the `[-1,1]^2` field of view.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> Image<T> {
    /// Build an image from row-major values. `n` must be even and at least 4;
    /// all values must be finite.
    pub fn new(n: usize, values: Vec<T>) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "image side must be even and >= 4, got {n}"
            )));
        }
        if values.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values for n = {n}, got {}",
                n * n,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("image contains non-finite values".into()));
        }
        Ok(Self { n, values })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![T::zero(); n * n])
    }

    /// Evaluate `f` at every pixel center.
    pub fn from_fn(n: usize, mut f: impl FnMut(T, T) -> T) -> Result<Self> {
        let h = T::of(2.0) / T::of_usize(n);
        let mut values = Vec::with_capacity(n * n);
        for r in 0..n {
            let x2 = -T::one() + (T::of_usize(r) + T::of(0.5)) * h;
            for c in 0..n {
                let x1 = -T::one() + (T::of_usize(c) + T::of(0.5)) * h;
                values.push(f(x1, x2));
            }
        }
        Self::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Pixel width `2/n`.
    pub fn pixel_width(&self) -> T {
        T::of(2.0) / T::of_usize(self.n)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn at(&self, row: usize, col: usize) -> T {
        self.values[row * self.n + col]
    }

    /// `self + scale * other`.
    pub fn scaled_add(&self, scale: T, other: &Image<T>) -> Result<Image<T>> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "image sizes {} vs {}",
                self.n, other.n
            )));
        }
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(&a, &b)| a + scale * b)
            .collect();
        Image::new(self.n, values)
    }

    pub fn scale(&self, s: T) -> Image<T> {
        Image {
            n: self.n,
            values: self.values.iter().map(|&v| v * s).collect(),
        }
    }
}

/// Lattice spectrum of an image; see the module docs for indexing.
#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    n: usize,
    /// Wrapped FFT order: entry `(r, c)` holds frequency `(k1, k2)` with
    /// `k1 = signed(c)`, `k2 = signed(r)`.
    values: Vec<Complex<T>>,
}

/// Wrapped index -> signed lattice frequency, `[-n/2, n/2)` for even `n` and
/// `[-(n-1)/2, (n-1)/2]` for odd `n`.
pub fn signed_freq(idx: usize, n: usize) -> i64 {
    if idx <= (n - 1) / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

fn wrap(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

impl<T: Scalar> Spectrum<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Value at lattice frequency `(k1, k2)`, `k_i in [-n/2, n/2)`.
    pub fn value(&self, k1: i64, k2: i64) -> Complex<T> {
        let half = (self.n / 2) as i64;
        assert!(k1 >= -half && k1 < half && k2 >= -half && k2 < half);
        self.values[wrap(k2, self.n) * self.n + wrap(k1, self.n)]
    }

    /// Continuum frequency of lattice index `k`.
    pub fn xi(k: i64) -> T {
        T::PI() * T::of(k as f64)
    }

    /// Iterate `(k1, k2, value)` over the whole lattice.
    pub fn modes(&self) -> impl Iterator<Item = (i64, i64, Complex<T>)> + '_ {
        let n = self.n;
        (0..n * n).map(move |i| {
            let (r, c) = (i / n, i % n);
            (signed_freq(c, n), signed_freq(r, n), self.values[i])
        })
    }

    /// Build a spectrum from explicit modes, mirroring each entry so the
    /// result is conjugate-symmetric (hence invertible to a real image).
    /// Frequencies must satisfy `|k_i| < n/2`.
    pub fn from_modes(n: usize, modes: &[(i64, i64, Complex<T>)]) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!("spectrum side must be even >= 4, got {n}")));
        }
        let half = (n / 2) as i64;
        let mut values = vec![Complex::new(T::zero(), T::zero()); n * n];
        for &(k1, k2, v) in modes {
            if k1.abs() >= half || k2.abs() >= half {
                return Err(Error::InvalidArgument(format!(
                    "mode ({k1},{k2}) outside mirrorable range |k| < {half}"
                )));
            }
            values[wrap(k2, n) * n + wrap(k1, n)] = v;
            if (k1, k2) != (0, 0) {
                values[wrap(-k2, n) * n + wrap(-k1, n)] = v.conj();
            }
        }
        Ok(Self { n, values })
    }

    /// Parseval-weighted squared norm `sum_k |F_k|^2 (dxi / 2 pi)^2`; equals
    /// the squared image L2 norm for spectra produced by [`fft2`].
    pub fn plancherel_energy(&self) -> T {
        let quarter = T::of(0.25); // (dxi/2pi)^2 with dxi = pi
        self.values.iter().map(|v| v.norm_sqr()).sum::<T>() * quarter
    }
}

/// Boolean cone multiplier on the frequency lattice: weight 1 iff the lattice
/// direction, folded into `[0, pi/2]`, lies within `beta` of the `xi_1` axis.
/// Symmetric under `xi -> -xi`; the DC mode is always included.
#[derive(Debug, Clone)]
pub struct ConeMask<T> {
    n: usize,
    beta: T,
    weights: Vec<bool>,
}

/// Angle of `(k1, k2)` from the `x1`-axis folded into `[0, pi/2]`.
/// The origin folds to 0.
pub fn folded_angle<T: Scalar>(k1: T, k2: T) -> T {
    k2.abs().atan2(k1.abs())
}

impl<T: Scalar> ConeMask<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// Weight at lattice frequency `(k1, k2)`.
    pub fn weight(&self, k1: i64, k2: i64) -> bool {
        self.weights[wrap(k2, self.n) * self.n + wrap(k1, self.n)]
    }

    /// Fraction of lattice points inside the inscribed disk `|k| <= n/2` that
    /// carry weight 1. Approaches `2 beta / pi` as `n` grows; the restriction
    /// to the disk matters because the square corners oversample diagonal
    /// directions.
    pub fn disk_fraction(&self) -> T {
        let half = (self.n / 2) as i64;
        let mut inside = 0usize;
        let mut on = 0usize;
        for k2 in -half..half {
            for k1 in -half..half {
                if k1 * k1 + k2 * k2 <= half * half {
                    inside += 1;
                    if self.weight(k1, k2) {
                        on += 1;
                    }
                }
            }
        }
        T::of_usize(on) / T::of_usize(inside)
    }
}

/// Build the hard `{0,1}` cone mask for half-opening `beta in (0, pi/2]`.
pub fn cone_mask<T: Scalar>(n: usize, beta: T) -> Result<ConeMask<T>> {
    if !(beta > T::zero() && beta <= T::FRAC_PI_2()) {
        return Err(Error::InvalidArgument(format!(
            "cone half-angle must lie in (0, pi/2], got {beta}"
        )));
    }
    if n < 4 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("mask side must be even >= 4, got {n}")));
    }
    let mut weights = vec![false; n * n];
    for r in 0..n {
        let k2 = T::of(signed_freq(r, n) as f64);
        for c in 0..n {
            let k1 = T::of(signed_freq(c, n) as f64);
            weights[r * n + c] = folded_angle(k1, k2) <= beta;
        }
    }
    Ok(ConeMask { n, beta, weights })
}

// In-place 2D FFT in wrapped order. `invert` selects the inverse transform
// (unnormalized, caller divides by n^2).
fn fft2_raw<T: Scalar>(buf: &mut [Complex<T>], n: usize, invert: bool) {
    let mut planner = FftPlanner::<T>::new();
    let fft = if invert {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    for row in buf.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    // columns via transpose, row pass, transpose back
    transpose(buf, n);
    for row in buf.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    transpose(buf, n);
}

fn transpose<T: Copy>(buf: &mut [Complex<T>], n: usize) {
    for r in 0..n {
        for c in (r + 1)..n {
            buf.swap(r * n + c, c * n + r);
        }
    }
}

// Half-pixel phase for the continuum calibration: with pixel centers at
// -1 + (j + 1/2) h the transform picks up exp(i xi (1 - h/2)) per dimension.
fn phase_1d<T: Scalar>(n: usize, pad: usize) -> Vec<Complex<T>> {
    let total = n * pad;
    let h = T::of(2.0) / T::of_usize(n);
    (0..total)
        .map(|idx| {
            let k = T::of(signed_freq(idx, total) as f64);
            let xi = T::PI() * k / T::of_usize(pad);
            let arg = xi * (T::one() - h * T::of(0.5));
            Complex::new(arg.cos(), arg.sin())
        })
        .collect()
}

/// Forward transform: DFT scaled by the pixel area and phase-aligned to the
/// pixel centers, so `fft2(f).value(k) ~ int f(x) e^{-i pi k . x} dx`.
pub fn fft2<T: Scalar>(img: &Image<T>) -> Spectrum<T> {
    let n = img.n;
    let mut buf: Vec<Complex<T>> = img
        .values
        .iter()
        .map(|&v| Complex::new(v, T::zero()))
        .collect();
    fft2_raw(&mut buf, n, false);
    let ph = phase_1d::<T>(n, 1);
    let h2 = img.pixel_width() * img.pixel_width();
    for r in 0..n {
        for c in 0..n {
            buf[r * n + c] = buf[r * n + c] * ph[r] * ph[c] * h2;
        }
    }
    Spectrum { n, values: buf }
}

/// Inverse of [`fft2`]. Rejects spectra that are not conjugate-symmetric
/// (those cannot come from a real image; getting one here is a caller bug).
pub fn ifft2<T: Scalar>(spec: &Spectrum<T>) -> Result<Image<T>> {
    let n = spec.n;
    let ph = phase_1d::<T>(n, 1);
    let h2 = T::of(4.0) / T::of_usize(n * n);
    let mut buf: Vec<Complex<T>> = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            buf.push(spec.values[r * n + c] / (ph[r] * ph[c] * h2));
        }
    }
    // In raw DFT order a real image satisfies G(-k mod n) = conj G(k) for
    // every index including the unpaired -n/2 rows.
    let mut max_asym = T::zero();
    let mut max_abs = T::zero();
    for r in 0..n {
        for c in 0..n {
            let a = buf[r * n + c];
            let b = buf[((n - r) % n) * n + ((n - c) % n)];
            max_asym = max_asym.max((a - b.conj()).norm());
            max_abs = max_abs.max(a.norm());
        }
    }
    let tol = T::epsilon().sqrt() * max_abs.max(T::min_positive_value());
    if max_asym > tol {
        return Err(Error::NonHermitian {
            max_asym: max_asym.to_f64().unwrap_or(f64::NAN),
            tol: tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    fft2_raw(&mut buf, n, true);
    let inv = T::one() / T::of_usize(n * n);
    let values = buf.iter().map(|v| v.re * inv).collect();
    Image::new(n, values)
}

/// `(chi_beta(D) f)`: zero the spectrum outside the cone and return the real
/// inverse. Idempotent; linear; keeps real images real because the mask is
/// symmetric under `xi -> -xi`.
pub fn apply_multiplier<T: Scalar>(img: &Image<T>, mask: &ConeMask<T>) -> Result<Image<T>> {
    if img.n != mask.n {
        return Err(Error::DimensionMismatch(format!(
            "image n = {} vs mask n = {}",
            img.n, mask.n
        )));
    }
    let mut spec = fft2(img);
    for (i, v) in spec.values.iter_mut().enumerate() {
        if !mask.weights[i] {
            *v = Complex::new(T::zero(), T::zero());
        }
    }
    ifft2(&spec)
}

/// Quadrature L2 norm `(sum f^2 h^2)^{1/2}`.
pub fn l2_norm<T: Scalar>(img: &Image<T>) -> T {
    let h2 = img.pixel_width() * img.pixel_width();
    (img.values.iter().map(|&v| v * v).sum::<T>() * h2).sqrt()
}

// Continuum-calibrated transform on the `pad`-refined lattice (spacing
// pi/pad), wrapped order, phases included.
pub(crate) fn padded_transform<T: Scalar>(img: &Image<T>, pad: usize) -> Vec<Complex<T>> {
    let n = img.n;
    let total = n * pad;
    let mut buf = vec![Complex::new(T::zero(), T::zero()); total * total];
    for r in 0..n {
        for c in 0..n {
            buf[r * total + c] = Complex::new(img.values[r * n + c], T::zero());
        }
    }
    fft2_raw(&mut buf, total, false);
    let ph = phase_1d::<T>(n, pad);
    let h2 = img.pixel_width() * img.pixel_width();
    for r in 0..total {
        for c in 0..total {
            buf[r * total + c] = buf[r * total + c] * ph[r] * ph[c] * h2;
        }
    }
    buf
}

fn padded_energy<T: Scalar>(img: &Image<T>, pad: usize) -> Vec<T> {
    padded_transform(img, pad).iter().map(|v| v.norm_sqr()).collect()
}

fn spectral_sum<T: Scalar>(
    img: &Image<T>,
    s: T,
    homogeneous: bool,
    cone: Option<T>,
) -> T {
    let total = img.n * SOBOLEV_PAD;
    let energy = padded_energy(img, SOBOLEV_PAD);
    let dxi = T::PI() / T::of_usize(SOBOLEV_PAD);
    let q = dxi * dxi / (T::of(4.0) * T::PI() * T::PI());
    let mut acc = T::zero();
    for r in 0..total {
        let k2 = T::of(signed_freq(r, total) as f64);
        for c in 0..total {
            let k1 = T::of(signed_freq(c, total) as f64);
            if let Some(beta) = cone {
                if folded_angle(k1, k2) > beta {
                    continue;
                }
            }
            let xi2 = (k1 * k1 + k2 * k2) * dxi * dxi;
            let e = energy[r * total + c];
            if homogeneous {
                if xi2 > T::zero() {
                    acc += xi2.powf(s) * e;
                }
            } else {
                acc += (T::one() + xi2).powf(s) * e;
            }
        }
    }
    (acc * q).sqrt()
}

/// Sobolev norm of order `s` on the field of view.
///
/// Homogeneous: `(sum_{k != 0} |xi_k|^{2s} |F_k|^2 q)^{1/2}` with the DC term
/// excluded (the weight is singular there); inhomogeneous:
/// `(sum_k (1 + |xi_k|^2)^s |F_k|^2 q)^{1/2}`, where `q = (dxi/2pi)^2` is the
/// Parseval quadrature weight. Evaluated on the [`SOBOLEV_PAD`]-refined
/// lattice; at `s = 0` the inhomogeneous norm reproduces [`l2_norm`] exactly.
pub fn sobolev_norm<T: Scalar>(img: &Image<T>, s: T, homogeneous: bool) -> T {
    spectral_sum(img, s, homogeneous, None)
}

/// Sobolev norm of the cone restriction `chi_beta(D) f`, with the cone test
/// applied per mode of the refined lattice.
///
/// This is not the same as [`sobolev_norm`] of [`apply_multiplier`]: the hard
/// mask on the native lattice keeps the full image mass, which then spreads
/// over every direction at sub-lattice frequencies, while the measurement it
/// is compared against carries only the cone's share of that mass. The
/// per-fine-mode test restricts those directions too.
pub fn cone_sobolev_norm<T: Scalar>(
    img: &Image<T>,
    beta: T,
    s: T,
    homogeneous: bool,
) -> Result<T> {
    if !(beta > T::zero() && beta <= T::FRAC_PI_2()) {
        return Err(Error::InvalidArgument(format!(
            "cone half-angle must lie in (0, pi/2], got {beta}"
        )));
    }
    Ok(spectral_sum(img, s, homogeneous, Some(beta)))
}
