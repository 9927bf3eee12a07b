//! Small direct solvers: tridiagonal elimination, banded LU with partial
//! pivoting, and a bordered banded system (one extra unknown coupled to many rows).

use crate::{Error, Result};

/// Tridiagonal matrix: row i reads `lower[i]·x[i-1] + diag[i]·x[i] + upper[i]·x[i+1]`.
/// `lower[0]` and `upper[n-1]` are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Thomas algorithm without pivoting. Intended for diagonally dominant
    /// M-matrices; a vanishing pivot is reported instead of propagating NaNs.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularPivot(0));
        }
        c[0] = if n > 1 { self.upper[0] / pivot } else { 0.0 };
        d[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.lower[i] * c[i - 1];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularPivot(i));
            }
            c[i] = if i + 1 < n { self.upper[i] / pivot } else { 0.0 };
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }

    /// Pivots of the unpivoted elimination. All positive iff the matrix
    /// (symmetrizable with negative off-diagonals) is positive definite.
    pub fn pivots(&self) -> Vec<f64> {
        let n = self.len();
        let mut piv = vec![0.0; n];
        piv[0] = self.diag[0];
        for i in 1..n {
            piv[i] = self.diag[i] - self.lower[i] * self.upper[i - 1] / piv[i - 1];
        }
        piv
    }

    pub fn to_band(&self) -> BandMatrix {
        let n = self.len();
        let mut b = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            b.set(i, i, self.diag[i]);
            if i > 0 {
                b.set(i, i - 1, self.lower[i]);
            }
            if i + 1 < n {
                b.set(i, i + 1, self.upper[i]);
            }
        }
        b
    }
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored row-wise
/// with room for the fill-in created by partial pivoting.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// LU factorization with partial pivoting (row interchanges restricted to the band).
    pub fn lu(mut self) -> Result<BandLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut perm = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut piv = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularPivot(k));
            }
            perm[k] = piv;
            let jmax = (k + kl + ku).min(n - 1);
            if piv != k {
                for j in k..=jmax {
                    let a = self.idx(k, j);
                    let b = self.idx(piv, j);
                    self.data.swap(a, b);
                }
            }
            let akk = self.data[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let l = self.data[ik] / akk;
                self.data[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        let kj = self.data[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.data[ij] -= l * kj;
                    }
                }
            }
        }
        Ok(BandLu { a: self, perm })
    }
}

#[derive(Clone, Debug)]
pub struct BandLu {
    a: BandMatrix,
    perm: Vec<usize>,
}

impl BandLu {
    pub fn dim(&self) -> usize {
        self.a.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let a = &self.a;
        let n = a.n;
        let mut b = rhs.to_vec();
        for k in 0..n {
            let p = self.perm[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                let last = (k + a.kl).min(n - 1);
                for (i, bi) in b.iter_mut().enumerate().take(last + 1).skip(k + 1) {
                    *bi -= a.data[a.idx(i, k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + a.kl + a.ku).min(n - 1);
            let mut s = b[k];
            for (j, bj) in b.iter().enumerate().take(jmax + 1).skip(k + 1) {
                s -= a.data[a.idx(k, j)] * bj;
            }
            b[k] = s / a.data[a.idx(k, k)];
        }
        b
    }
}

/// System `[B c; rᵀ d] [x; y] = [f; g]` with banded `B` and a single border
/// unknown `y`, solved by block elimination.
#[derive(Clone, Debug)]
pub struct BorderedLu {
    band: BandLu,
    row: Vec<f64>,
    b_inv_col: Vec<f64>,
    schur: f64,
}

impl BorderedLu {
    pub fn new(band: BandMatrix, col: Vec<f64>, row: Vec<f64>, corner: f64) -> Result<Self> {
        let n = band.dim();
        let band = band.lu()?;
        let b_inv_col = band.solve(&col);
        let schur = corner - dot(&row, &b_inv_col);
        if schur == 0.0 || !schur.is_finite() {
            return Err(Error::SingularPivot(n));
        }
        Ok(Self {
            band,
            row,
            b_inv_col,
            schur,
        })
    }

    /// Solve with the border unknown stored first: `rhs = [g, f...]`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let g = rhs[0];
        let mut x = self.band.solve(&rhs[1..]);
        let y = (g - dot(&self.row, &x)) / self.schur;
        for (xi, ci) in x.iter_mut().zip(&self.b_inv_col) {
            *xi -= y * ci;
        }
        let mut out = Vec::with_capacity(x.len() + 1);
        out.push(y);
        out.extend(x);
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sup_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_apply(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter().map(|row| dot(row, x)).collect()
    }

    #[test]
    fn thomas_matches_apply() {
        let n = 50;
        let t = Tridiagonal {
            lower: vec![-1.0; n],
            diag: vec![2.5; n],
            upper: vec![-1.0; n],
        };
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = t.apply(&x);
        let y = t.solve(&b).unwrap();
        assert!(sup_dist(&x, &y) < 1e-13);
    }

    #[test]
    fn band_lu_with_pivoting_on_indefinite_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 40;
        let (kl, ku) = (3, 2);
        let mut band = BandMatrix::zeros(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // small diagonal forces row interchanges
                let v = if i == j { 1e-3 * rng.gen::<f64>() } else { rng.gen::<f64>() - 0.5 };
                band.set(i, j, v);
                dense[i][j] = v;
            }
        }
        let x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.01).collect();
        let b = dense_apply(&dense, &x);
        assert!(sup_dist(&band.apply(&x), &b) < 1e-14);
        let y = band.lu().unwrap().solve(&b);
        assert!(sup_dist(&x, &y) < 1e-9, "{}", sup_dist(&x, &y));
    }

    #[test]
    fn bordered_solve() {
        let n = 30;
        let mut band = BandMatrix::zeros(n, 2, 2);
        for i in 0..n {
            band.set(i, i, 4.0);
            if i > 0 {
                band.set(i, i - 1, -1.0);
            }
            if i + 1 < n {
                band.set(i, i + 1, -1.0);
            }
        }
        let col: Vec<f64> = (0..n).map(|i| if i % 5 == 0 { -0.5 } else { 0.0 }).collect();
        let row = col.clone();
        let corner = 3.0;
        let x: Vec<f64> = (0..=n).map(|i| (i as f64).cos()).collect();
        let mut rhs = vec![corner * x[0] + dot(&row, &x[1..])];
        let bx = band.apply(&x[1..]);
        rhs.extend(bx.iter().zip(&col).map(|(b, c)| b + c * x[0]));
        let sol = BorderedLu::new(band, col, row, corner).unwrap().solve(&rhs);
        assert!(sup_dist(&sol, &x) < 1e-12);
    }

    #[test]
    fn singular_pivot_reported() {
        let t = Tridiagonal {
            lower: vec![0.0, 1.0],
            diag: vec![0.0, 1.0],
            upper: vec![1.0, 0.0],
        };
        assert!(matches!(t.solve(&[1.0, 1.0]), Err(Error::SingularPivot(0))));
    }
}
