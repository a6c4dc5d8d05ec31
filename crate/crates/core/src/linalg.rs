//! Small dense complex matrices (genus-sized) and polynomial roots.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    n: usize,
    m: usize,
    /// Row-major entries as `[re, im]` pairs for serialization.
    #[serde(with = "complex_vec")]
    data: Vec<C64>,
}

mod complex_vec {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl CMatrix {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self { n, m, data: vec![C64::new(0.0, 0.0); n * m] }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = C64::new(1.0, 0.0);
        }
        a
    }

    pub fn from_fn(n: usize, m: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut a = Self::zeros(n, m);
        for i in 0..n {
            for j in 0..m {
                a[(i, j)] = f(i, j);
            }
        }
        a
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.m
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.m, self.n, |i, j| self[(j, i)])
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.n);
        Self::from_fn(self.n, other.m, |i, j| (0..self.m).map(|k| self[(i, k)] * other[(k, j)]).sum())
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.m, v.len());
        (0..self.n).map(|i| (0..self.m).map(|k| self[(i, k)] * v[k]).sum()).collect()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.n, self.m, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_fn(self.n, self.m, |i, j| self[(i, j)] * c)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self::from_fn(self.n, self.m, |i, j| f(self[(i, j)]))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// Gauss–Jordan inverse with partial pivoting; `None` if singular.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.n, self.m);
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let piv = (col..n).max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))?;
            if a[(piv, col)].norm() <= 1e-14 * scale {
                return None;
            }
            for j in 0..n {
                a.data.swap(col * n + j, piv * n + j);
                inv.data.swap(col * n + j, piv * n + j);
            }
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= p;
                inv[(col, j)] /= p;
            }
            for i in 0..n {
                if i != col {
                    let f = a[(i, col)];
                    for j in 0..n {
                        let (aj, ij) = (a[(col, j)], inv[(col, j)]);
                        a[(i, j)] -= f * aj;
                        inv[(i, j)] -= f * ij;
                    }
                }
            }
        }
        Some(inv)
    }

    pub fn re(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.m).map(|j| self[(i, j)].re).collect()).collect()
    }

    pub fn im(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.m).map(|j| self[(i, j)].im).collect()).collect()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.m + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.m + j]
    }
}

/// Solves the real system `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_real(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            for j in col..n {
                a[i][j] -= f * a[col][j];
            }
            b[i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Cholesky factor of a real symmetric matrix; `None` unless positive definite.
pub fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 0.0 {
                    return None;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// Smallest eigenvalue of a real symmetric positive definite matrix; `None`
/// if the matrix is not positive definite.
pub fn min_eigenvalue_spd(a: &[Vec<f64>]) -> Option<f64> {
    cholesky(a)?;
    symmetric_eigenvalues(a).into_iter().reduce(f64::min)
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m = a.to_vec();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        let diag: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum();
        if off <= 1e-32 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

/// All roots of `Σ coeffs[k] x^k` (leading coefficient nonzero) by the Aberth
/// iteration followed by Newton polishing.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let monic: Vec<C64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |x: C64| -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for c in monic.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    };
    let radius = 1.0 + monic[..deg].iter().fold(0.0f64, |a, c| a.max(c.norm()));
    let mut z: Vec<C64> = (0..deg)
        .map(|k| C64::from_polar(radius * 0.5, 0.4 + std::f64::consts::TAU * k as f64 / deg as f64))
        .collect();
    for _ in 0..500 {
        let mut change = 0.0f64;
        for i in 0..deg {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: C64 = (0..deg).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            z[i] -= w;
            change = change.max(w.norm() / (1.0 + z[i].norm()));
        }
        if change < 1e-16 {
            break;
        }
    }
    for r in &mut z {
        for _ in 0..3 {
            let (p, dp) = eval(*r);
            if dp.norm() > 0.0 {
                *r -= p / dp;
            }
        }
    }
    z
}
