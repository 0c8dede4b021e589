//! Eigenvalues of general real matrices: balancing, reduction to upper
//! Hessenberg form by stabilized elementary similarity transforms, then the
//! Francis double-shift QR iteration. 1×1 and 2×2 inputs use closed forms.

use num_complex::Complex;

use super::{LinalgError, Matrix};
use crate::scalar::Scalar;

/// Iterations allowed per eigenvalue before giving up.
const MAX_QR_ITERATIONS: usize = 30;

/// All eigenvalues of a square matrix, in no particular order.
pub fn eigenvalues<T: Scalar>(a: &Matrix<T>) -> Result<Vec<Complex<T>>, LinalgError> {
    let n = a.require_square()?;
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    match n {
        1 => Ok(vec![Complex::new(a[(0, 0)], T::zero())]),
        2 => Ok(eig2(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]).to_vec()),
        _ => {
            let mut h = a.clone();
            balance(&mut h);
            hessenberg(&mut h);
            hqr(&mut h)
        }
    }
}

/// Largest eigenvalue modulus.
pub fn spectral_radius<T: Scalar>(a: &Matrix<T>) -> Result<T, LinalgError> {
    Ok(eigenvalues(a)?.iter().fold(T::zero(), |m, z| m.max(z.norm())))
}

/// `true` iff `spectral_radius(a) < 1 - tol`.
pub fn is_schur<T: Scalar>(a: &Matrix<T>, tol: T) -> Result<bool, LinalgError> {
    Ok(spectral_radius(a)? < T::one() - tol)
}

fn eig2<T: Scalar>(a: T, b: T, c: T, d: T) -> [Complex<T>; 2] {
    let half = T::of(0.5);
    let mean = (a + d) * half;
    let hd = (a - d) * half;
    let disc = hd * hd + b * c;
    if disc >= T::zero() {
        let r = disc.sqrt();
        // Larger-magnitude root first, the other from the determinant to
        // avoid cancellation.
        let big = if mean >= T::zero() { mean + r } else { mean - r };
        let det = a * d - b * c;
        let small = if big != T::zero() { det / big } else { mean - r };
        [Complex::new(big, T::zero()), Complex::new(small, T::zero())]
    } else {
        let im = (-disc).sqrt();
        [Complex::new(mean, im), Complex::new(mean, -im)]
    }
}

fn balance<T: Scalar>(a: &mut Matrix<T>) {
    let n = a.rows();
    let radix = T::of(2.0);
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let s = c + r;
            let mut f = T::one();
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < T::of(0.95) * s {
                done = false;
                let inv = T::one() / f;
                for j in 0..n {
                    a[(i, j)] *= inv;
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

fn hessenberg<T: Scalar>(a: &mut Matrix<T>) {
    let n = a.rows();
    for m in 1..n.saturating_sub(1) {
        let mut x = T::zero();
        let mut piv = m;
        for j in m..n {
            if a[(j, m - 1)].abs() > x.abs() {
                x = a[(j, m - 1)];
                piv = j;
            }
        }
        if piv != m {
            for j in (m - 1)..n {
                let tmp = a[(piv, j)];
                a[(piv, j)] = a[(m, j)];
                a[(m, j)] = tmp;
            }
            for j in 0..n {
                let tmp = a[(j, piv)];
                a[(j, piv)] = a[(j, m)];
                a[(j, m)] = tmp;
            }
        }
        if x != T::zero() {
            for i in (m + 1)..n {
                let mut y = a[(i, m - 1)];
                if y != T::zero() {
                    y /= x;
                    a[(i, m - 1)] = y;
                    for j in m..n {
                        let v = a[(m, j)];
                        a[(i, j)] -= y * v;
                    }
                    for j in 0..n {
                        let v = a[(j, i)];
                        a[(j, m)] += y * v;
                    }
                }
            }
        }
    }
    for i in 2..n {
        for j in 0..(i - 1) {
            a[(i, j)] = T::zero();
        }
    }
}

fn sign<T: Scalar>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

fn hqr<T: Scalar>(a: &mut Matrix<T>) -> Result<Vec<Complex<T>>, LinalgError> {
    let n = a.rows();
    let eps = T::epsilon();
    let zero = T::zero();
    let mut out = vec![Complex::new(zero, zero); n];
    let mut anorm = zero;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = zero;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            // Look for a single small subdiagonal element.
            let mut l = nu;
            while l >= 1 {
                let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == zero {
                    s = anorm;
                }
                if a[(l, l - 1)].abs() <= eps * s {
                    a[(l, l - 1)] = zero;
                    break;
                }
                l -= 1;
            }
            let mut x = a[(nu, nu)];
            if l == nu {
                out[nu] = Complex::new(x + t, zero);
                nn -= 1;
                break;
            }
            let mut y = a[(nu - 1, nu - 1)];
            let mut w = a[(nu, nu - 1)] * a[(nu - 1, nu)];
            if l + 1 == nu {
                let p = T::of(0.5) * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= zero {
                    z = p + sign(z, p);
                    let r1 = x + z;
                    let r2 = if z != zero { x - w / z } else { r1 };
                    out[nu - 1] = Complex::new(r1, zero);
                    out[nu] = Complex::new(r2, zero);
                } else {
                    out[nu] = Complex::new(x + p, -z);
                    out[nu - 1] = Complex::new(x + p, z);
                }
                nn -= 2;
                break;
            }
            if its == MAX_QR_ITERATIONS {
                return Err(LinalgError::NoConvergence);
            }
            if its == 10 || its == 20 {
                // Exceptional shift.
                t += x;
                for i in 0..=nu {
                    a[(i, i)] -= x;
                }
                let s = a[(nu, nu - 1)].abs() + a[(nu - 1, nu - 2)].abs();
                x = T::of(0.75) * s;
                y = x;
                w = T::of(-0.4375) * s * s;
            }
            its += 1;
            // Form the shift and look for two consecutive small subdiagonals.
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - rr - ss;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nu {
                a[(i, i - 2)] = zero;
                if i != m + 2 {
                    a[(i, i - 3)] = zero;
                }
            }
            // Double QR step on rows l..nn and columns m..nn.
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = zero;
                    if k + 1 != nu {
                        r = a[(k + 2, k - 1)];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != zero {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != zero {
                    if k == m {
                        if l != m {
                            a[(k, k - 1)] = -a[(k, k - 1)];
                        }
                    } else {
                        a[(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                        if k + 1 != nu {
                            pp += r * a[(k + 2, j)];
                            a[(k + 2, j)] -= pp * z;
                        }
                        a[(k + 1, j)] -= pp * y;
                        a[(k, j)] -= pp * x;
                    }
                    let mmin = nu.min(k + 3);
                    for i in l..=mmin {
                        let mut pp = x * a[(i, k)] + y * a[(i, k + 1)];
                        if k + 1 != nu {
                            pp += z * a[(i, k + 2)];
                            a[(i, k + 2)] -= pp * r;
                        }
                        a[(i, k + 1)] -= pp * q;
                        a[(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(out)
}
