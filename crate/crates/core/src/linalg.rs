//! Small dense square matrices and the matrix functions needed by SO(n):
//! Padé scaling-and-squaring exponential, inverse scaling-and-squaring
//! logarithm for orthogonal matrices, and the polar (nearest orthogonal) factor.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
#[allow(unused_imports)] // shadowed by std when it is in the build graph
use num_traits::Float;

/// Square matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    n: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Wraps row-major data; `None` unless `data.len() == n * n`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == n * n).then_some(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        debug_assert_eq!(n, other.n);
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ · other` without materializing the transpose.
    pub fn tr_matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for k in 0..n {
            for i in 0..n {
                let a = self[(k, i)];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// `self + s * other`
    pub fn add_scaled(&self, other: &Self, s: f64) -> Self {
        self.zip_with(other, |a, b| a + s * b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// ‖selfᵀ·self − I‖_F
    pub fn orthogonality_defect(&self) -> f64 {
        self.tr_matmul(self).sub(&Self::identity(self.n)).norm_fro()
    }

    /// ‖self + selfᵀ‖_F / 2
    pub fn skew_defect(&self) -> f64 {
        self.add(&self.transpose()).norm_fro() / 2.0
    }

    /// `(self − selfᵀ) / 2`
    pub fn skew_part(&self) -> Self {
        self.sub(&self.transpose()).scale(0.5)
    }

    pub fn lu(&self) -> Option<Lu> {
        Lu::factor(self)
    }

    pub fn inverse(&self) -> Option<Self> {
        Some(self.lu()?.solve(&Self::identity(self.n)))
    }

    pub fn det(&self) -> f64 {
        self.lu().map_or(0.0, |lu| lu.det())
    }

    /// Eigenvalues of the symmetric part, ascending (cyclic Jacobi).
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = self.add(&self.transpose()).scale(0.5);
        for _sweep in 0..64 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)] * a[(i, j)])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        ev.sort_by(|x, y| x.total_cmp(y));
        ev
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Mat,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    fn factor(a: &Mat) -> Option<Self> {
        let n = a.n;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pivot == 0.0 || !pivot.is_finite() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let d = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in (k + 1)..n {
                        let v = lu[(k, j)];
                        lu[(i, j)] -= f * v;
                    }
                }
            }
        }
        Some(Self { lu, perm, sign })
    }

    pub fn det(&self) -> f64 {
        (0..self.lu.n).map(|i| self.lu[(i, i)]).product::<f64>() * self.sign
    }

    /// Solves `A · X = B`.
    pub fn solve(&self, b: &Mat) -> Mat {
        let n = self.lu.n;
        let mut x = Mat::zeros(n);
        for col in 0..n {
            let mut y: Vec<f64> = self.perm.iter().map(|&p| b[(p, col)]).collect();
            for i in 0..n {
                for k in 0..i {
                    y[i] -= self.lu[(i, k)] * y[k];
                }
            }
            for i in (0..n).rev() {
                for k in (i + 1)..n {
                    y[i] -= self.lu[(i, k)] * y[k];
                }
                y[i] /= self.lu[(i, i)];
            }
            for i in 0..n {
                x[(i, col)] = y[i];
            }
        }
        x
    }
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by the degree-13 Padé approximant with scaling and squaring.
pub fn expm(a: &Mat) -> Mat {
    let n = a.n;
    let norm = a.norm_one();
    if norm == 0.0 {
        return Mat::identity(n);
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale(2f64.powi(-s));
    let b = &PADE13;
    let id = Mat::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let u_inner = a6
        .scale(b[13])
        .add_scaled(&a4, b[11])
        .add_scaled(&a2, b[9]);
    let u = a6
        .matmul(&u_inner)
        .add_scaled(&a6, b[7])
        .add_scaled(&a4, b[5])
        .add_scaled(&a2, b[3])
        .add_scaled(&id, b[1]);
    let u = a.matmul(&u);
    let v_inner = a6
        .scale(b[12])
        .add_scaled(&a4, b[10])
        .add_scaled(&a2, b[8]);
    let v = a6
        .matmul(&v_inner)
        .add_scaled(&a6, b[6])
        .add_scaled(&a4, b[4])
        .add_scaled(&a2, b[2])
        .add_scaled(&id, b[0]);
    let p = v.add(&u);
    let q = v.sub(&u);
    // q is well conditioned for ‖a‖₁ ≤ θ₁₃.
    let mut r = q.lu().expect("Padé denominator is nonsingular").solve(&p);
    for _ in 0..s {
        r = r.matmul(&r);
    }
    r
}

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum LogError {
    /// An eigenvalue lies within `gap` of −1 (cut locus of the identity).
    #[error("eigenvalue within {gap:e} of -1; principal logarithm is not unique")]
    NearNegativeEigenvalue { gap: f64 },
    #[error("square-root iteration failed to converge")]
    NoConvergence,
}

/// Distance tolerance to −1 below which the orthogonal log is refused.
pub const CUT_LOCUS_GAP: f64 = 1e-6;

/// Smallest |λ + 1| over the eigenvalues of an orthogonal matrix.
///
/// For orthogonal `q` the eigenvalues of `(q + qᵀ)/2` are `cos φ` and
/// `|e^{iφ} + 1|² = 2 + 2 cos φ`.
pub fn gap_to_minus_one(q: &Mat) -> f64 {
    let ev = q.symmetric_eigenvalues();
    let c = ev.first().copied().unwrap_or(1.0);
    (2.0 + 2.0 * c).max(0.0).sqrt()
}

/// Principal square root by the Denman–Beavers iteration.
fn sqrtm(a: &Mat) -> Result<Mat, LogError> {
    let mut y = a.clone();
    let mut z = Mat::identity(a.n);
    for _ in 0..100 {
        let yi = y.inverse().ok_or(LogError::NoConvergence)?;
        let zi = z.inverse().ok_or(LogError::NoConvergence)?;
        let yn = y.add(&zi).scale(0.5);
        let zn = z.add(&yi).scale(0.5);
        let delta = yn.sub(&y).norm_fro();
        y = yn;
        z = zn;
        if delta <= 1e-15 * y.norm_fro() {
            return Ok(y);
        }
    }
    Err(LogError::NoConvergence)
}

/// Principal logarithm of an orthogonal matrix, returned exactly skew-symmetric.
pub fn logm_orthogonal(q: &Mat) -> Result<Mat, LogError> {
    let n = q.n;
    let gap = gap_to_minus_one(q);
    if gap <= CUT_LOCUS_GAP {
        return Err(LogError::NearNegativeEigenvalue { gap });
    }
    let id = Mat::identity(n);
    let mut a = q.clone();
    let mut k = 0;
    while a.sub(&id).norm_fro() > 0.25 {
        a = sqrtm(&a)?;
        k += 1;
        if k > 60 {
            return Err(LogError::NoConvergence);
        }
    }
    // log A = 2 atanh(Y), Y = (A − I)(A + I)⁻¹, ‖Y‖ small.
    let apl = a.add(&id);
    let ami = a.sub(&id);
    // Y = (A − I)(A + I)⁻¹ = ((A + I)⁻ᵀ (A − I)ᵀ)ᵀ
    let y = apl
        .transpose()
        .lu()
        .ok_or(LogError::NoConvergence)?
        .solve(&ami.transpose())
        .transpose();
    let y2 = y.matmul(&y);
    let mut term = y.clone();
    let mut sum = y;
    let mut j = 1;
    loop {
        term = term.matmul(&y2);
        j += 2;
        let t = term.scale(1.0 / j as f64);
        let tn = t.norm_fro();
        sum = sum.add(&t);
        if tn < 1e-20 || j > 201 {
            break;
        }
    }
    let log = sum.scale(2.0 * 2f64.powi(k));
    Ok(log.skew_part())
}

/// Orthogonal polar factor of a nonsingular matrix, i.e. the nearest
/// orthogonal matrix in Frobenius norm.
pub fn nearest_orthogonal(a: &Mat) -> Mat {
    let n = a.n;
    let id = Mat::identity(n);
    let mut x = a.clone();
    for _ in 0..60 {
        let defect = x.tr_matmul(&x).sub(&id);
        let d = defect.norm_fro();
        if d < 1e-15 {
            break;
        }
        x = if d < 0.5 {
            // Newton–Schulz: X (3I − XᵀX) / 2
            x.matmul(&id.scale(3.0).sub(&x.tr_matmul(&x))).scale(0.5)
        } else {
            match x.inverse() {
                Some(inv) => x.add(&inv.transpose()).scale(0.5),
                None => break,
            }
        };
        if d < 1e-12 {
            // One Newton–Schulz step from here is already at round-off.
            break;
        }
    }
    x
}
