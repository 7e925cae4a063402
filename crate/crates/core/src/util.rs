//! Small shared utilities: seed mixing and a dense symmetric eigensolver.

/// SplitMix64 step. Used to derive independent per-item seeds from a master
/// seed so that parallel generation is independent of scheduling:
/// `child_seed(master, i) = splitmix64(master ^ GOLDEN * (i + 1))`.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Per-item seed derived from a master seed; documented mixing function for
/// reproducible parallel generation.
pub fn child_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ GOLDEN.wrapping_mul(index.wrapping_add(1)))
}

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations.
///
/// `a` is row-major `n x n` and is consumed as workspace. Intended for the
/// small matrices that appear here (dataset Gram blocks, n <= 64); accuracy is
/// machine-level for symmetric input.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let idx = |r: usize, c: usize| r * n + c;
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for r in 0..n {
            for c in (r + 1)..n {
                off += a[idx(r, c)] * a[idx(r, c)];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius(&a)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[idx(i, i)]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    eig
}

fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
