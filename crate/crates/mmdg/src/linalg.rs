//! Banded linear algebra: compact storage and LU with partial pivoting.
//!
//! The dG Jacobians couple at most neighboring elements and the moving-mesh
//! system is tridiagonal, so everything the solver factors is banded with a
//! handful of diagonals. Elimination order is fixed, which keeps repeated
//! runs bit-identical.

use crate::error::{Error, Result};

/// Band matrix in compact row storage: `data[i * (kl + ku + 1) + j]` holds
/// `A[i, i - kl + j]`. Entries outside the band are structurally zero.
#[derive(Clone, Debug)]
pub struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        assert!(n >= 1);
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kl(&self) -> usize {
        self.kl
    }

    pub fn ku(&self) -> usize {
        self.ku
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    /// True when `(i, j)` lies inside the stored band (and the matrix).
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[i * self.width() + (j + self.kl - i)]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let w = self.width();
        self.data[i * w + (j + self.kl - i)] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let w = self.width();
        self.data[i * w + (j + self.kl - i)] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let w = self.width();
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let j_lo = i.saturating_sub(self.kl);
            let j_hi = (i + self.ku).min(self.n - 1);
            let mut acc = 0.0;
            for j in j_lo..=j_hi {
                acc += self.data[i * w + (j + self.kl - i)] * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// `self += s * other`. The other band must fit inside this one.
    pub fn add_scaled(&mut self, other: &Banded, s: f64) {
        assert_eq!(self.n, other.n);
        assert!(self.kl >= other.kl && self.ku >= other.ku);
        for i in 0..self.n {
            let j_lo = i.saturating_sub(other.kl);
            let j_hi = (i + other.ku).min(self.n - 1);
            for j in j_lo..=j_hi {
                self.add(i, j, s * other.get(i, j));
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Largest absolute entry, a cheap stand-in for the matrix norm.
    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            let j_lo = i.saturating_sub(self.kl);
            let j_hi = (i + self.ku).min(self.n - 1);
            for j in j_lo..=j_hi {
                m = m.max(self.get(i, j).abs());
            }
        }
        m
    }

    /// Largest absolute asymmetry `|A_ij - A_ji|` over the band.
    pub fn symmetry_mismatch(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            let j_lo = i.saturating_sub(self.kl.max(self.ku));
            let j_hi = (i + self.kl.max(self.ku)).min(self.n - 1);
            for j in j_lo..=j_hi {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }

    /// Dense copy, row major; for small oracle checks only.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// LU factorization with partial pivoting, band-aware. Fails on an
    /// exactly zero pivot.
    pub fn factor(&self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let mm = self.width();
        let mut au = self.data.clone();
        let mut al = vec![0.0; n * kl.max(1)];
        let mut perm = vec![0usize; n];

        // Roll the top kl rows left so row i's leading stored entry is its
        // first structural column; the elimination below keeps the active
        // band aligned the same way.
        let mut l = kl;
        for i in 0..kl.min(n) {
            for j in (kl - i)..mm {
                au[i * mm + (j - l)] = au[i * mm + j];
            }
            l -= 1;
            for j in (mm - l - 1)..mm {
                au[i * mm + j] = 0.0;
            }
        }

        for k in 0..n {
            let lmax = (k + kl).min(n - 1);
            let mut ipiv = k;
            let mut pmax = au[k * mm].abs();
            for r in (k + 1)..=lmax {
                let v = au[r * mm].abs();
                if v > pmax {
                    pmax = v;
                    ipiv = r;
                }
            }
            perm[k] = ipiv;
            if au[ipiv * mm] == 0.0 {
                return Err(Error::SingularMatrix(k));
            }
            if ipiv != k {
                for j in 0..mm {
                    au.swap(k * mm + j, ipiv * mm + j);
                }
            }
            for r in (k + 1)..=lmax {
                let mult = au[r * mm] / au[k * mm];
                al[k * kl.max(1) + (r - k - 1)] = mult;
                for j in 1..mm {
                    au[r * mm + j - 1] = au[r * mm + j] - mult * au[k * mm + j];
                }
                au[r * mm + mm - 1] = 0.0;
            }
        }

        Ok(BandedLu {
            n,
            kl,
            mm,
            au,
            al,
            perm,
        })
    }
}

/// Factored form produced by [`Banded::factor`].
pub struct BandedLu {
    n: usize,
    kl: usize,
    mm: usize,
    au: Vec<f64>,
    al: Vec<f64>,
    perm: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let kl = self.kl;
        let mm = self.mm;
        let mut x = b.to_vec();
        for k in 0..n {
            let ip = self.perm[k];
            if ip != k {
                x.swap(k, ip);
            }
            let lmax = (k + kl).min(n - 1);
            for r in (k + 1)..=lmax {
                x[r] -= self.al[k * kl.max(1) + (r - k - 1)] * x[k];
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            let jmax = (mm - 1).min(n - 1 - i);
            for j in 1..=jmax {
                acc -= self.au[i * mm + j] * x[i + j];
            }
            x[i] = acc / self.au[i * mm];
        }
        x
    }
}

/// Factor-and-solve convenience for a single right-hand side.
pub fn solve_banded(a: &Banded, b: &[f64]) -> Result<Vec<f64>> {
    Ok(a.factor()?.solve(b))
}

/// Solves a tridiagonal system given the three diagonals. `lower[0]` and
/// `upper[n-1]` are ignored.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut a = Banded::new(n, 1, 1);
    for i in 0..n {
        a.set(i, i, diag[i]);
        if i > 0 {
            a.set(i, i - 1, lower[i]);
        }
        if i + 1 < n {
            a.set(i, i + 1, upper[i]);
        }
    }
    solve_banded(&a, rhs)
}
