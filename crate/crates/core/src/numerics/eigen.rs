//! Nonsymmetric eigenvalues: balancing, reduction to upper Hessenberg form by
//! stabilized elementary similarity transforms, then the Francis double-shift
//! QR iteration.

use nalgebra::Complex;

use super::{ensure_finite, ensure_square, Matrix};
use crate::error::{Error, Result};

const MAX_QR_ITERATIONS: usize = 100;

/// Dense 1-based square work array; keeps the QR sweep readable.
struct Work {
    n: usize,
    data: Vec<f64>,
}

impl Work {
    fn from_matrix(m: &Matrix) -> Self {
        let n = m.nrows();
        let mut data = vec![0.0; (n + 1) * (n + 1)];
        for i in 0..n {
            for j in 0..n {
                data[(i + 1) * (n + 1) + j + 1] = m[(i, j)];
            }
        }
        Work { n, data }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.n + 1) + j]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * (self.n + 1) + j]
    }
}

#[inline]
fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Diagonal similarity by powers of two so row and column norms are comparable.
/// Exact in floating point.
fn balance(a: &mut Work) {
    const RADIX: f64 = 2.0;
    const SQRDX: f64 = RADIX * RADIX;
    let n = a.n;
    loop {
        let mut done = true;
        for i in 1..=n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 1..=n {
                if j != i {
                    c += a.at(j, i).abs();
                    r += a.at(i, j).abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= SQRDX;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= SQRDX;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        *a.at_mut(i, j) *= g;
                    }
                    for j in 1..=n {
                        *a.at_mut(j, i) *= f;
                    }
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Gaussian elimination with pivoting to upper Hessenberg form.
fn hessenberg(a: &mut Work) {
    let n = a.n;
    if n < 3 {
        return;
    }
    for m in 2..n {
        let mut x = 0.0_f64;
        let mut i = m;
        for j in m..=n {
            if a.at(j, m - 1).abs() > x.abs() {
                x = a.at(j, m - 1);
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                let t = a.at(i, j);
                *a.at_mut(i, j) = a.at(m, j);
                *a.at_mut(m, j) = t;
            }
            for j in 1..=n {
                let t = a.at(j, i);
                *a.at_mut(j, i) = a.at(j, m);
                *a.at_mut(j, m) = t;
            }
        }
        if x != 0.0 {
            for i in (m + 1)..=n {
                let mut y = a.at(i, m - 1);
                if y != 0.0 {
                    y /= x;
                    *a.at_mut(i, m - 1) = y;
                    for j in m..=n {
                        let v = a.at(m, j);
                        *a.at_mut(i, j) -= y * v;
                    }
                    for j in 1..=n {
                        let v = a.at(j, i);
                        *a.at_mut(j, m) += y * v;
                    }
                }
            }
        }
    }
    for i in 3..=n {
        for j in 1..(i - 1) {
            *a.at_mut(i, j) = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix. Destroys `a`.
fn hqr(a: &mut Work) -> Result<Vec<Complex<f64>>> {
    let n = a.n;
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];

    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a.at(i, j).abs();
        }
    }

    let mut nn = n;
    let mut t = 0.0;
    let (mut p, mut q, mut r): (f64, f64, f64);
    let (mut x, mut y, mut z, mut w): (f64, f64, f64, f64);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a.at(l - 1, l - 1).abs() + a.at(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a.at(l, l - 1).abs() + s == s {
                    *a.at_mut(l, l - 1) = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a.at(nn, nn);
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                break;
            }
            y = a.at(nn - 1, nn - 1);
            w = a.at(nn, nn - 1) * a.at(nn - 1, nn);
            if l == nn - 1 {
                p = 0.5 * (y - x);
                q = p * p + w;
                z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[nn - 1] = x + z;
                    wr[nn] = x + z;
                    if z != 0.0 {
                        wr[nn] = x - w / z;
                    }
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = -z;
                    wi[nn] = z;
                }
                nn -= 2;
                break;
            }

            if its == MAX_QR_ITERATIONS {
                return Err(Error::EigenFailure);
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 1..=nn {
                    *a.at_mut(i, i) -= x;
                }
                let s = a.at(nn, nn - 1).abs() + a.at(nn - 1, nn - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            let mut m = nn - 2;
            loop {
                z = a.at(m, m);
                r = x - z;
                let s = y - z;
                p = (r * s - w) / a.at(m + 1, m) + a.at(m, m + 1);
                q = a.at(m + 1, m + 1) - z - r - s;
                r = a.at(m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a.at(m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (a.at(m - 1, m - 1).abs() + z.abs() + a.at(m + 1, m + 1).abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nn {
                *a.at_mut(i, i - 2) = 0.0;
                if i != m + 2 {
                    *a.at_mut(i, i - 3) = 0.0;
                }
            }
            let mut k = m;
            while k < nn {
                if k != m {
                    p = a.at(k, k - 1);
                    q = a.at(k + 1, k - 1);
                    r = 0.0;
                    if k != nn - 1 {
                        r = a.at(k + 2, k - 1);
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            *a.at_mut(k, k - 1) = -a.at(k, k - 1);
                        }
                    } else {
                        *a.at_mut(k, k - 1) = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        p = a.at(k, j) + q * a.at(k + 1, j);
                        if k != nn - 1 {
                            p += r * a.at(k + 2, j);
                            *a.at_mut(k + 2, j) -= p * z;
                        }
                        *a.at_mut(k + 1, j) -= p * y;
                        *a.at_mut(k, j) -= p * x;
                    }
                    let mmin = nn.min(k + 3);
                    for i in l..=mmin {
                        p = x * a.at(i, k) + y * a.at(i, k + 1);
                        if k != nn - 1 {
                            p += z * a.at(i, k + 2);
                            *a.at_mut(i, k + 2) -= p * r;
                        }
                        *a.at_mut(i, k + 1) -= p * q;
                        *a.at_mut(i, k) -= p;
                    }
                }
                k += 1;
            }
        }
    }

    Ok((1..=n).map(|i| Complex::new(wr[i], wi[i])).collect())
}

/// All eigenvalues of a real square matrix, in no particular order.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex<f64>>> {
    ensure_square(m, "matrix")?;
    ensure_finite(m, "matrix")?;
    match m.nrows() {
        0 => Ok(Vec::new()),
        1 => Ok(vec![Complex::new(m[(0, 0)], 0.0)]),
        _ => {
            let mut work = Work::from_matrix(m);
            balance(&mut work);
            hessenberg(&mut work);
            hqr(&mut work)
        }
    }
}

/// Largest eigenvalue modulus.
///
/// The QR estimate is capped by `min_k ||M^k||_F^(1/k)` for `k <= n`. That
/// bound holds for any matrix and recovers exact zeros for nilpotent inputs
/// (deadbeat loops), where the eigenvalues of a defective cluster are only
/// determined to about `eps^(1/n)` by any backward-stable eigensolver.
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    let eig = eigenvalues(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    let rho = eig.iter().map(|l| l.norm()).fold(0.0_f64, f64::max);
    if rho == 0.0 {
        return Ok(0.0);
    }

    let mut power = m.clone();
    let mut bound = power.norm();
    for k in 2..=n {
        power = &power * m;
        let norm = power.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        bound = bound.min(norm.powf(1.0 / k as f64));
    }
    Ok(rho.min(bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_moduli(m: &Matrix) -> Vec<f64> {
        let mut v: Vec<f64> = eigenvalues(m).unwrap().iter().map(|l| l.norm()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(spectral_radius(&Matrix::zeros(1, 1)).unwrap(), 0.0);
        assert_eq!(spectral_radius(&Matrix::zeros(4, 4)).unwrap(), 0.0);
    }

    #[test]
    fn triangular() {
        let m = Matrix::from_row_slice(2, 2, &[1.7, 0.0, 1.0, 0.0]);
        assert!((spectral_radius(&m).unwrap() - 1.7).abs() < 1e-12);
    }

    #[test]
    fn unit_modulus_complex_pair() {
        // lambda^2 - lambda + 1 = 0: roots exp(+-i pi/3)
        let m = Matrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, 0.0]);
        let eig = eigenvalues(&m).unwrap();
        for l in &eig {
            assert!((l.re - 0.5).abs() < 1e-12);
            assert!((l.im.abs() - 3f64.sqrt() / 2.0).abs() < 1e-12);
        }
        assert!((spectral_radius(&m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_square_is_dimension_error() {
        let m = Matrix::zeros(2, 3);
        assert!(matches!(spectral_radius(&m), Err(Error::Dimension(_))));
    }

    #[test]
    fn nan_rejected() {
        let m = Matrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(matches!(spectral_radius(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn companion_with_known_roots() {
        // (x-0.5)(x+0.9)(x-2)(x^2+1): coefficients by expansion
        let roots_real = [0.5, -0.9, 2.0];
        let mut poly = vec![1.0];
        for &r in &roots_real {
            let mut next = vec![0.0; poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= r * c;
            }
            poly = next;
        }
        // multiply by x^2 + 1
        let mut next = vec![0.0; poly.len() + 2];
        for (i, c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 2] += c;
        }
        poly = next;
        let n = poly.len() - 1;
        let mut comp = Matrix::zeros(n, n);
        for j in 0..n {
            comp[(0, j)] = -poly[j + 1];
        }
        for i in 1..n {
            comp[(i, i - 1)] = 1.0;
        }
        let moduli = sorted_moduli(&comp);
        let expected = [0.5, 0.9, 1.0, 1.0, 2.0];
        for (a, b) in moduli.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9, "{moduli:?}");
        }
        assert!((spectral_radius(&comp).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn nilpotent_deadbeat_is_exactly_zero() {
        let m = Matrix::from_row_slice(2, 2, &[2.5, -6.25, 1.0, -2.5]);
        assert_eq!(spectral_radius(&m).unwrap(), 0.0);
    }

    #[test]
    fn agrees_with_symmetric_solver() {
        let n = 12;
        let m = Matrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 11) as f64 / 5.0 - 1.0);
        let s = (&m + m.transpose()) * 0.5;
        let reference = nalgebra::SymmetricEigen::new(s.clone())
            .eigenvalues
            .iter()
            .map(|l| l.abs())
            .fold(0.0, f64::max);
        assert!((spectral_radius(&s).unwrap() - reference).abs() < 1e-9);
    }
}
