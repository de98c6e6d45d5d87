//! Dense eigenvalues of real nonsymmetric matrices.
//!
//! Balancing, reduction to upper Hessenberg form by stabilized elementary
//! similarity transforms, then the Francis double-shift QR iteration. The
//! implementation follows the classical EISPACK `balanc`/`elmhes`/`hqr`
//! sequence and works on a 1-based scratch array to keep the index algebra
//! identical to the reference formulation.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

const MAX_QR_ITERATIONS: usize = 60;

struct Work<T> {
    n: usize,
    a: Vec<T>,
}

impl<T: Scalar> Work<T> {
    fn new(m: &Matrix<T>) -> Self {
        let n = m.nrows();
        let mut a = vec![T::zero(); (n + 1) * (n + 1)];
        for i in 0..n {
            for j in 0..n {
                a[(i + 1) * (n + 1) + j + 1] = m[(i, j)];
            }
        }
        Self { n, a }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> T {
        self.a[i * (self.n + 1) + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: T) {
        self.a[i * (self.n + 1) + j] = v;
    }

    #[inline]
    fn swap(&mut self, (i1, j1): (usize, usize), (i2, j2): (usize, usize)) {
        let w = self.n + 1;
        self.a.swap(i1 * w + j1, i2 * w + j2);
    }

    fn balance(&mut self) {
        let radix = T::lit(2.0);
        let sqrdx = radix * radix;
        let n = self.n;
        let mut done = false;
        while !done {
            done = true;
            for i in 1..=n {
                let mut r = T::zero();
                let mut c = T::zero();
                for j in 1..=n {
                    if j != i {
                        c = c + self.get(j, i).abs();
                        r = r + self.get(i, j).abs();
                    }
                }
                if c != T::zero() && r != T::zero() {
                    let mut g = r / radix;
                    let mut f = T::one();
                    let s = c + r;
                    while c < g {
                        f = f * radix;
                        c = c * sqrdx;
                    }
                    g = r * radix;
                    while c > g {
                        f = f / radix;
                        c = c / sqrdx;
                    }
                    if (c + r) / f < T::lit(0.95) * s {
                        done = false;
                        let g = T::one() / f;
                        for j in 1..=n {
                            self.set(i, j, self.get(i, j) * g);
                        }
                        for j in 1..=n {
                            self.set(j, i, self.get(j, i) * f);
                        }
                    }
                }
            }
        }
    }

    fn hessenberg(&mut self) {
        let n = self.n;
        for m in 2..n {
            let mut x = T::zero();
            let mut i = m;
            for j in m..=n {
                if self.get(j, m - 1).abs() > x.abs() {
                    x = self.get(j, m - 1);
                    i = j;
                }
            }
            if i != m {
                for j in (m - 1)..=n {
                    self.swap((i, j), (m, j));
                }
                for j in 1..=n {
                    self.swap((j, i), (j, m));
                }
            }
            if x != T::zero() {
                for i in (m + 1)..=n {
                    let mut y = self.get(i, m - 1);
                    if y != T::zero() {
                        y = y / x;
                        self.set(i, m - 1, y);
                        for j in m..=n {
                            self.set(i, j, self.get(i, j) - y * self.get(m, j));
                        }
                        for j in 1..=n {
                            self.set(j, m, self.get(j, m) + y * self.get(j, i));
                        }
                    }
                }
            }
        }
        // Discard the stored multipliers below the subdiagonal.
        for i in 3..=n {
            for j in 1..(i - 1) {
                self.set(i, j, T::zero());
            }
        }
    }

    fn hqr(&mut self) -> Result<Vec<Complex<T>>> {
        let n = self.n;
        let mut wr = vec![T::zero(); n + 1];
        let mut wi = vec![T::zero(); n + 1];
        let half = T::lit(0.5);

        let mut anorm = T::zero();
        for i in 1..=n {
            for j in i.saturating_sub(1).max(1)..=n {
                anorm = anorm + self.get(i, j).abs();
            }
        }
        let mut nn = n;
        let mut t = T::zero();
        // Carried across iterations as in the reference algorithm.
        #[allow(unused_assignments)]
        let (mut p, mut q, mut r) = (T::zero(), T::zero(), T::zero());
        #[allow(unused_assignments)]
        let (mut x, mut y, mut z, mut w) = (T::zero(), T::zero(), T::zero(), T::zero());
        while nn >= 1 {
            let mut its = 0usize;
            loop {
                let mut l = nn;
                while l >= 2 {
                    let mut s = self.get(l - 1, l - 1).abs() + self.get(l, l).abs();
                    if s == T::zero() {
                        s = anorm;
                    }
                    if self.get(l, l - 1).abs() + s == s {
                        self.set(l, l - 1, T::zero());
                        break;
                    }
                    l -= 1;
                }
                x = self.get(nn, nn);
                if l == nn {
                    wr[nn] = x + t;
                    wi[nn] = T::zero();
                    nn -= 1;
                } else {
                    y = self.get(nn - 1, nn - 1);
                    w = self.get(nn, nn - 1) * self.get(nn - 1, nn);
                    if l == nn - 1 {
                        p = half * (y - x);
                        q = p * p + w;
                        z = q.abs().sqrt();
                        x = x + t;
                        if q >= T::zero() {
                            z = p + z.copysign(p);
                            wr[nn - 1] = x + z;
                            wr[nn] = x + z;
                            if z != T::zero() {
                                wr[nn] = x - w / z;
                            }
                            wi[nn - 1] = T::zero();
                            wi[nn] = T::zero();
                        } else {
                            wr[nn - 1] = x + p;
                            wr[nn] = x + p;
                            wi[nn - 1] = -z;
                            wi[nn] = z;
                        }
                        nn -= 2;
                    } else {
                        if its == MAX_QR_ITERATIONS {
                            return Err(Error::NoConvergence {
                                what: "Hessenberg QR",
                                iterations: its,
                                residual: self.get(nn, nn - 1).abs().as_f64(),
                            });
                        }
                        if its == 10 || its == 20 || its == 40 {
                            // Exceptional shift.
                            t = t + x;
                            for i in 1..=nn {
                                self.set(i, i, self.get(i, i) - x);
                            }
                            let s = self.get(nn, nn - 1).abs() + self.get(nn - 1, nn - 2).abs();
                            x = T::lit(0.75) * s;
                            y = x;
                            w = T::lit(-0.4375) * s * s;
                        }
                        its += 1;
                        let mut m = nn - 2;
                        loop {
                            z = self.get(m, m);
                            let rr = x - z;
                            let ss = y - z;
                            p = (rr * ss - w) / self.get(m + 1, m) + self.get(m, m + 1);
                            q = self.get(m + 1, m + 1) - z - rr - ss;
                            r = self.get(m + 2, m + 1);
                            let s = p.abs() + q.abs() + r.abs();
                            p = p / s;
                            q = q / s;
                            r = r / s;
                            if m == l {
                                break;
                            }
                            let u = self.get(m, m - 1).abs() * (q.abs() + r.abs());
                            let v = p.abs()
                                * (self.get(m - 1, m - 1).abs() + z.abs() + self.get(m + 1, m + 1).abs());
                            if u + v == v {
                                break;
                            }
                            m -= 1;
                        }
                        for i in (m + 2)..=nn {
                            self.set(i, i - 2, T::zero());
                            if i != m + 2 {
                                self.set(i, i - 3, T::zero());
                            }
                        }
                        let mut k = m;
                        while k + 1 <= nn {
                            if k != m {
                                p = self.get(k, k - 1);
                                q = self.get(k + 1, k - 1);
                                r = T::zero();
                                if k != nn - 1 {
                                    r = self.get(k + 2, k - 1);
                                }
                                x = p.abs() + q.abs() + r.abs();
                                if x != T::zero() {
                                    p = p / x;
                                    q = q / x;
                                    r = r / x;
                                }
                            }
                            let s = (p * p + q * q + r * r).sqrt().copysign(p);
                            if s != T::zero() {
                                if k == m {
                                    if l != m {
                                        self.set(k, k - 1, -self.get(k, k - 1));
                                    }
                                } else {
                                    self.set(k, k - 1, -s * x);
                                }
                                p = p + s;
                                x = p / s;
                                y = q / s;
                                z = r / s;
                                q = q / p;
                                r = r / p;
                                for j in k..=nn {
                                    p = self.get(k, j) + q * self.get(k + 1, j);
                                    if k != nn - 1 {
                                        p = p + r * self.get(k + 2, j);
                                        self.set(k + 2, j, self.get(k + 2, j) - p * z);
                                    }
                                    self.set(k + 1, j, self.get(k + 1, j) - p * y);
                                    self.set(k, j, self.get(k, j) - p * x);
                                }
                                let mmin = nn.min(k + 3);
                                for i in l..=mmin {
                                    p = x * self.get(i, k) + y * self.get(i, k + 1);
                                    if k != nn - 1 {
                                        p = p + z * self.get(i, k + 2);
                                        self.set(i, k + 2, self.get(i, k + 2) - p * r);
                                    }
                                    self.set(i, k + 1, self.get(i, k + 1) - p * q);
                                    self.set(i, k, self.get(i, k) - p);
                                }
                            }
                            k += 1;
                        }
                    }
                }
                if nn < 2 || l + 1 >= nn {
                    break;
                }
            }
        }
        Ok((1..=n).map(|i| Complex::new(wr[i], wi[i])).collect())
    }
}

/// All eigenvalues of a square real matrix, sorted by descending real part
/// (ties by descending imaginary part).
pub fn eigenvalues<T: Scalar>(m: &Matrix<T>) -> Result<Vec<Complex<T>>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut work = Work::new(m);
    work.balance();
    work.hessenberg();
    let mut ev = work.hqr()?;
    ev.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(ev)
}
