//! Bessel function `J_1`, implemented in-crate so the analytic disk-transform
//! oracle has no dependency on the FFT path it is used to check.
//!
//! Power series below the crossover, Hankel asymptotic expansion above it;
//! relative accuracy is ~1e-10 away from the zeros of `J_1`.

use crate::scalar::Scalar;

const CROSSOVER: f64 = 12.0;

/// `J_1(x)` for any finite real `x`.
pub fn j1<T: Scalar>(x: T) -> T {
    let neg = x < T::zero();
    let ax = x.abs();
    let v = if ax < T::of(CROSSOVER) {
        j1_series(ax)
    } else {
        j1_asymptotic(ax)
    };
    if neg {
        -v
    } else {
        v
    }
}

// J_1(x) = (x/2) sum_m (-1)^m (x^2/4)^m / (m! (m+1)!)
fn j1_series<T: Scalar>(x: T) -> T {
    let q = x * x * T::of(0.25);
    let mut term = x * T::of(0.5);
    let mut acc = term;
    let mut m = 1usize;
    loop {
        term = -term * q / (T::of_usize(m) * T::of_usize(m + 1));
        acc += term;
        m += 1;
        if term.abs() <= acc.abs() * T::epsilon() || m > 60 {
            break;
        }
    }
    acc
}

// J_1(x) = sqrt(2/(pi x)) (P(x) cos chi - Q(x) sin chi), chi = x - 3 pi / 4,
// with the Hankel coefficient products c_j = prod_{l<=j} (4 - (2l-1)^2).
fn j1_asymptotic<T: Scalar>(x: T) -> T {
    let mu = 4.0f64;
    let z = T::of(8.0) * x;
    let mut c = 1.0f64; // running product c_j
    let mut fact = 1.0f64;
    let mut zpow = T::one();
    let mut p = T::one();
    let mut q = T::zero();
    for j in 1..=8usize {
        c *= mu - (2.0 * j as f64 - 1.0).powi(2);
        fact *= j as f64;
        zpow = zpow * z;
        let term = T::of(c / fact) / zpow;
        match j % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
    }
    let chi = x - T::of(3.0) * T::FRAC_PI_4();
    (T::of(2.0) / (T::PI() * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
