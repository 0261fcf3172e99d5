//! Complex dense 2x2/3x3 kernels: characteristic roots, biorthogonal
//! left/right eigensystems built from adjugate cofactors, matrix
//! exponentials, and the divided-difference spectral weight functions.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Relative eigenvalue-separation threshold below which the spectrum is
/// treated as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

/// Small dense complex matrix, dimension 2 or 3, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    dim: usize,
    a: Vec<C64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "CMat supports dimensions 2 and 3");
        CMat {
            dim,
            a: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMat::zeros(dim);
        for i in 0..dim {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let dim = rows.len();
        let mut m = CMat::zeros(dim);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), dim);
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.a[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.a[i * self.dim + j] = v;
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..n {
                    s += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (x, y) in out.a.iter_mut().zip(other.a.iter()) {
            *x += y;
        }
        out
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (x, y) in out.a.iter_mut().zip(other.a.iter()) {
            *x -= y;
        }
        out
    }

    pub fn scale(&self, c: C64) -> CMat {
        let mut out = self.clone();
        for x in out.a.iter_mut() {
            *x *= c;
        }
        out
    }

    pub fn adjoint(&self) -> CMat {
        let n = self.dim;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.get(j, i).conj());
            }
        }
        out
    }

    pub fn transpose(&self) -> CMat {
        let n = self.dim;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.get(j, i));
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn det(&self) -> C64 {
        match self.dim {
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            3 => {
                self.get(0, 0)
                    * (self.get(1, 1) * self.get(2, 2) - self.get(1, 2) * self.get(2, 1))
                    - self.get(0, 1)
                        * (self.get(1, 0) * self.get(2, 2) - self.get(1, 2) * self.get(2, 0))
                    + self.get(0, 2)
                        * (self.get(1, 0) * self.get(2, 1) - self.get(1, 1) * self.get(2, 0))
            }
            _ => unreachable!(),
        }
    }

    /// Adjugate (transposed cofactor matrix): `self * adj = det * I`.
    pub fn adjugate(&self) -> CMat {
        let n = self.dim;
        let mut out = CMat::zeros(n);
        match n {
            2 => {
                out.set(0, 0, self.get(1, 1));
                out.set(0, 1, -self.get(0, 1));
                out.set(1, 0, -self.get(1, 0));
                out.set(1, 1, self.get(0, 0));
            }
            3 => {
                for i in 0..3 {
                    for j in 0..3 {
                        // cofactor C_ji placed at (i, j)
                        let (r0, r1) = match j {
                            0 => (1, 2),
                            1 => (0, 2),
                            _ => (0, 1),
                        };
                        let (c0, c1) = match i {
                            0 => (1, 2),
                            1 => (0, 2),
                            _ => (0, 1),
                        };
                        let minor = self.get(r0, c0) * self.get(r1, c1)
                            - self.get(r0, c1) * self.get(r1, c0);
                        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                        out.set(i, j, minor * sign);
                    }
                }
            }
            _ => unreachable!(),
        }
        out
    }

    /// Coefficients (c2, c1, c0) of the monic characteristic polynomial
    /// `lambda^3 + c2 lambda^2 + c1 lambda + c0` (3x3) or
    /// `lambda^2 + c2 lambda + c1` (2x2, with c0 unused = 0).
    pub fn char_poly(&self) -> (C64, C64, C64) {
        match self.dim {
            2 => (-self.trace(), self.det(), C64::new(0.0, 0.0)),
            3 => {
                let tr = self.trace();
                // sum of principal 2x2 minors
                let m01 = self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0);
                let m02 = self.get(0, 0) * self.get(2, 2) - self.get(0, 2) * self.get(2, 0);
                let m12 = self.get(1, 1) * self.get(2, 2) - self.get(1, 2) * self.get(2, 1);
                (-tr, m01 + m02 + m12, -self.det())
            }
            _ => unreachable!(),
        }
    }
}

fn csqrt(z: C64) -> C64 {
    z.sqrt()
}

fn sort_roots(mut roots: Vec<C64>) -> Vec<C64> {
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    roots
}

/// Roots of the monic quadratic `s^2 + b s + c`, in canonical order.
pub fn quadratic_roots(b: C64, c: C64) -> [C64; 2] {
    let disc = csqrt(b * b - 4.0 * c);
    // pick the sign that avoids cancellation
    let q = if (b + disc).norm() >= (b - disc).norm() {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    let r1 = q;
    let r2 = if q.norm() > 0.0 { c / q } else { -b - q };
    let v = sort_roots(vec![r1, r2]);
    [v[0], v[1]]
}

/// Roots of the monic cubic `s^3 + c2 s^2 + c1 s + c0` over the complex
/// numbers. Cardano on the depressed cubic, one Newton polish step per
/// root, canonical (Re, Im) ordering.
pub fn cubic_roots(c2: C64, c1: C64, c0: C64) -> [C64; 3] {
    let third = 1.0 / 3.0;
    let shift = -c2 * third;
    // depressed cubic t^3 + p t + q
    let p = c1 - c2 * c2 * third;
    let q = c0 + c2 * (2.0 * c2 * c2 - 9.0 * c1) / 27.0;

    let mut roots: Vec<C64> = if p.norm() == 0.0 && q.norm() == 0.0 {
        vec![C64::new(0.0, 0.0); 3]
    } else {
        let disc = csqrt(q * q * 0.25 + p * p * p / 27.0);
        // choose the branch with the larger |u^3| for stability
        let a1 = -q * 0.5 + disc;
        let a2 = -q * 0.5 - disc;
        let u3 = if a1.norm() >= a2.norm() { a1 } else { a2 };
        let u = u3.powf(third);
        let omega = C64::new(-0.5, 0.75f64.sqrt());
        (0..3)
            .map(|k| {
                let uk = u * omega.powu(k);
                if uk.norm() == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    uk - p / (3.0 * uk)
                }
            })
            .collect()
    };

    // one Newton polish step on the original monic cubic
    for r in roots.iter_mut() {
        let t = *r + shift;
        let f = ((t + c2) * t + c1) * t + c0;
        let df = (3.0 * t + 2.0 * c2) * t + c1;
        if df.norm() > 0.0 {
            *r = t - f / df - shift;
        } else {
            *r = t - shift;
        }
    }
    let polished: Vec<C64> = roots.iter().map(|r| *r + shift).collect();
    let v = sort_roots(polished);
    [v[0], v[1], v[2]]
}

/// Eigenvalues of a small matrix in canonical order.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    let (c2, c1, c0) = m.char_poly();
    match m.dim() {
        2 => quadratic_roots(c2, c1).to_vec(),
        3 => cubic_roots(c2, c1, c0).to_vec(),
        _ => unreachable!(),
    }
}

/// Biorthogonal eigensystem of a small non-Hermitian matrix.
///
/// Right vectors come from adjugate columns (cofactors of a row of
/// `M - lambda I`), left vectors from adjugate rows (cofactors of a
/// column); the left vectors are rescaled so `left_i . right_j = delta_ij`.
/// `norm_products[i]` keeps the raw cofactor dot product (the square of the
/// usual normalizing factor) before rescaling.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub dim: usize,
    pub eigenvalues: Vec<C64>,
    pub right: Vec<Vec<C64>>,
    pub left: Vec<Vec<C64>>,
    pub norm_products: Vec<C64>,
}

impl Eigensystem {
    /// `sum_i lambda_i right_i (x) left_i`, which must reproduce the input.
    pub fn reconstruct(&self) -> CMat {
        let mut m = CMat::zeros(self.dim);
        for k in 0..self.dim {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let v = m.get(i, j) + self.eigenvalues[k] * self.right[k][i] * self.left[k][j];
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    /// `f(M) = sum_i f(lambda_i) right_i (x) left_i`.
    pub fn apply<Fn_: Fn(C64) -> C64>(&self, f: Fn_) -> CMat {
        let mut m = CMat::zeros(self.dim);
        for k in 0..self.dim {
            let fv = f(self.eigenvalues[k]);
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let v = m.get(i, j) + fv * self.right[k][i] * self.left[k][j];
                    m.set(i, j, v);
                }
            }
        }
        m
    }
}

pub fn eig(m: &CMat) -> Result<Eigensystem> {
    eig_with_threshold(m, DEGENERACY_THRESHOLD)
}

pub fn eig_with_threshold(m: &CMat, threshold: f64) -> Result<Eigensystem> {
    let n = m.dim();
    let vals = eigenvalues(m);
    let scale = m.frobenius().max(1e-300);
    let thr = threshold * scale;
    for i in 0..n {
        for j in (i + 1)..n {
            let sep = (vals[i] - vals[j]).norm();
            if sep <= thr {
                return Err(Error::Degenerate {
                    sep,
                    threshold: thr,
                });
            }
        }
    }

    let mut right = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    let mut norm_products = Vec::with_capacity(n);
    for &lam in &vals {
        let mut s = m.clone();
        for i in 0..n {
            s.set(i, i, s.get(i, i) - lam);
        }
        let adj = s.adjugate();
        // Right eigenvector: a column of the adjugate. Prefer the first
        // (cofactors of the first row), fall back to the largest.
        let col_norm = |c: usize| (0..n).map(|r| adj.get(r, c).norm_sqr()).sum::<f64>();
        let best_col = (0..n).max_by(|&a, &b| col_norm(a).partial_cmp(&col_norm(b)).unwrap());
        let col = match best_col {
            Some(bc) if col_norm(0) >= 1e-6 * col_norm(bc) => 0,
            Some(bc) => bc,
            None => 0,
        };
        let r: Vec<C64> = (0..n).map(|i| adj.get(i, col)).collect();
        // Left eigenvector: a row of the adjugate (cofactors of a column).
        let row_norm = |r_: usize| (0..n).map(|c| adj.get(r_, c).norm_sqr()).sum::<f64>();
        let best_row = (0..n).max_by(|&a, &b| row_norm(a).partial_cmp(&row_norm(b)).unwrap());
        let row = match best_row {
            Some(br) if row_norm(0) >= 1e-6 * row_norm(br) => 0,
            Some(br) => br,
            None => 0,
        };
        let l: Vec<C64> = (0..n).map(|j| adj.get(row, j)).collect();

        let dot: C64 = l.iter().zip(r.iter()).map(|(a, b)| a * b).sum();
        let rn = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let ln = l.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if dot.norm() <= 1e-12 * rn * ln || rn == 0.0 || ln == 0.0 {
            return Err(Error::Degenerate {
                sep: dot.norm(),
                threshold: 1e-12 * rn * ln,
            });
        }
        let inv = C64::new(1.0, 0.0) / dot;
        left.push(l.iter().map(|v| v * inv).collect());
        right.push(r);
        norm_products.push(dot);
    }
    Ok(Eigensystem {
        dim: n,
        eigenvalues: vals,
        right,
        left,
        norm_products,
    })
}

/// Matrix exponential by scaling-and-squaring with a fixed-order Taylor
/// kernel. Total over all inputs; used as the fallback (and as an
/// independent route for cross-checks).
pub fn expm_series(m: &CMat) -> CMat {
    let norm = m.frobenius();
    let s = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let b = m.scale(C64::new((0.5f64).powi(s), 0.0));
    let mut sum = CMat::identity(m.dim());
    let mut term = CMat::identity(m.dim());
    for k in 1..=20 {
        term = term.mul(&b).scale(C64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
    }
    let mut out = sum;
    for _ in 0..s {
        out = out.mul(&out);
    }
    out
}

/// `exp(scale * m)`, via the eigenvector route when the spectrum is
/// well-separated, else via scaling-and-squaring.
pub fn expm(m: &CMat, scale: C64) -> CMat {
    let a = m.scale(scale);
    match eig(&a) {
        Ok(es) => es.apply(|lam| lam.exp()),
        Err(_) => expm_series(&a),
    }
}

/// The three divided-difference weights for distinct roots s1, s2, s3,
/// pinned by `e^{-s_i} = H - G s_i + F s_i^2` at each root.
#[derive(Debug, Clone)]
pub struct SpectralWeights {
    pub f: C64,
    pub g: C64,
    pub h: C64,
    pub roots: [C64; 3],
}

impl SpectralWeights {
    /// Max residual of the defining interpolation conditions.
    pub fn residual(&self) -> f64 {
        self.roots
            .iter()
            .map(|&s| {
                let lhs = (-s).exp();
                let rhs = self.h - self.g * s + self.f * s * s;
                (lhs - rhs).norm()
            })
            .fold(0.0, f64::max)
    }
}

pub fn spectral_weights(roots: [C64; 3]) -> Result<SpectralWeights> {
    let [s1, s2, s3] = roots;
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    for (a, b) in [(s1, s2), (s2, s3), (s1, s3)] {
        let sep = (a - b).norm();
        if sep <= DEGENERACY_THRESHOLD * scale {
            return Err(Error::Degenerate {
                sep,
                threshold: DEGENERACY_THRESHOLD * scale,
            });
        }
    }
    // Lagrange coefficients of the quadratic through (s_i, e^{-s_i}).
    let mut f = C64::new(0.0, 0.0);
    let mut g = C64::new(0.0, 0.0);
    let mut h = C64::new(0.0, 0.0);
    let idx = [(s1, s2, s3), (s2, s1, s3), (s3, s1, s2)];
    for (si, sj, sk) in idx {
        let w = (-si).exp() / ((si - sj) * (si - sk));
        f += w;
        g += w * (sj + sk);
        h += w * sj * sk;
    }
    Ok(SpectralWeights {
        f,
        g,
        h,
        roots,
    })
}

/// 3x3 matrix exponential through the characteristic-root weights:
/// `e^M = H I + G M + F M^2` where the weights interpolate `e^{-s}` at the
/// negated eigenvalues. Errors on a degenerate spectrum.
pub fn expm_spectral(m: &CMat) -> Result<CMat> {
    if m.dim() != 3 {
        return Err(Error::DimensionMismatch(
            "spectral route is defined for 3x3 matrices".into(),
        ));
    }
    let (c2, c1, c0) = m.char_poly();
    let mu = cubic_roots(c2, c1, c0);
    let s = [-mu[0], -mu[1], -mu[2]];
    let w = spectral_weights(s)?;
    let m2 = m.mul(m);
    let mut out = CMat::zeros(3);
    for i in 0..3 {
        for j in 0..3 {
            let idm = if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            out.set(i, j, w.h * idm + w.g * m.get(i, j) + w.f * m2.get(i, j));
        }
    }
    Ok(out)
}
