//! Lowest eigenpairs of a symmetric tridiagonal matrix by Sturm bisection and
//! inverse iteration.

/// `diag` has length `m`, `off` has length `m − 1`.
pub(crate) struct Tridiagonal<'a> {
    pub diag: &'a [f64],
    pub off: &'a [f64],
}

impl Tridiagonal<'_> {
    fn len(&self) -> usize {
        self.diag.len()
    }

    fn norm(&self) -> f64 {
        let m = self.len();
        (0..m)
            .map(|i| {
                let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let r = if i + 1 < m { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + l + r
            })
            .fold(0.0, f64::max)
    }

    fn gershgorin(&self) -> (f64, f64) {
        let m = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..m {
            let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < m { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - l - r);
            hi = hi.max(self.diag[i] + l + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64, pivmin: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k` smallest eigenvalues, ascending.
    pub fn lowest_values(&self, k: usize) -> Vec<f64> {
        let k = k.min(self.len());
        let (mut glo, mut ghi) = self.gershgorin();
        let span = (ghi - glo).max(f64::MIN_POSITIVE);
        glo -= 2.0 * f64::EPSILON * span + f64::MIN_POSITIVE;
        ghi += 2.0 * f64::EPSILON * span + f64::MIN_POSITIVE;
        let maxoff2 = self.off.iter().fold(1.0f64, |m, b| m.max(b * b));
        let pivmin = f64::MIN_POSITIVE * maxoff2;

        let mut out = Vec::with_capacity(k);
        let mut floor = glo;
        for i in 0..k {
            let (mut lo, mut hi) = (floor, ghi);
            for _ in 0..200 {
                let tol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + 4.0 * pivmin;
                if hi - lo <= tol {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid, pivmin) > i {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let value = 0.5 * (lo + hi);
            out.push(value);
            floor = lo;
        }
        out
    }

    /// Eigenvector for an (accurate) eigenvalue `theta` by inverse iteration
    /// with a partially pivoted LU of `T − θI`. Vectors in `previous` whose
    /// eigenvalues lie within the cluster tolerance are projected out.
    pub fn vector_for(&self, theta: f64, previous: &[(f64, Vec<f64>)]) -> Vec<f64> {
        let m = self.len();
        if m == 1 {
            return vec![1.0];
        }
        let norm = self.norm().max(f64::MIN_POSITIVE);
        let pert = f64::EPSILON * norm;
        let cluster = 1e-3 * norm;
        let lu = ShiftedLu::factor(self, theta, pert);

        let mut y: Vec<f64> = (0..m)
            .map(|i| 1.0 + 0.5 * crate::spectral::golden_fraction(i as u64 + 7))
            .collect();
        for _ in 0..4 {
            for (value, prev) in previous {
                if (value - theta).abs() < cluster {
                    let d: f64 = prev.iter().zip(&y).map(|(a, b)| a * b).sum();
                    y.iter_mut().zip(prev).for_each(|(a, b)| *a -= d * b);
                }
            }
            lu.solve(&mut y);
            let s = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(s.is_finite() && s > 0.0) {
                y = vec![0.0; m];
                y[0] = 1.0;
                continue;
            }
            y.iter_mut().for_each(|v| *v /= s);
        }
        for (value, prev) in previous {
            if (value - theta).abs() < cluster {
                let d: f64 = prev.iter().zip(&y).map(|(a, b)| a * b).sum();
                y.iter_mut().zip(prev).for_each(|(a, b)| *a -= d * b);
            }
        }
        let s = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v /= s);
        y
    }

    /// The `k` lowest eigenpairs.
    pub fn lowest_pairs(&self, k: usize) -> Vec<(f64, Vec<f64>)> {
        let values = self.lowest_values(k);
        let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(values.len());
        for theta in values {
            let y = self.vector_for(theta, &out);
            out.push((theta, y));
        }
        out
    }
}

/// LU factors of `T − θI` in the layout of LAPACK's `dgttrf`.
struct ShiftedLu {
    d: Vec<f64>,
    dl: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &Tridiagonal<'_>, theta: f64, pert: f64) -> Self {
        let m = t.len();
        let mut d: Vec<f64> = t.diag.iter().map(|a| a - theta).collect();
        let mut dl = t.off.to_vec();
        let mut du = t.off.to_vec();
        let mut du2 = vec![0.0; m.saturating_sub(2)];
        let mut swap = vec![false; m.saturating_sub(1)];
        for i in 0..m - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i].abs() < pert {
                    d[i] = if d[i] < 0.0 { -pert } else { pert };
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < m {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swap[i] = true;
            }
        }
        if d[m - 1].abs() < pert {
            d[m - 1] = if d[m - 1] < 0.0 { -pert } else { pert };
        }
        Self { d, dl, du, du2, swap }
    }

    fn solve(&self, b: &mut [f64]) {
        let m = self.d.len();
        for i in 0..m - 1 {
            if self.swap[i] {
                let temp = b[i] - self.dl[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = temp;
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[m - 1] /= self.d[m - 1];
        if m > 1 {
            b[m - 2] = (b[m - 2] - self.du[m - 2] * b[m - 1]) / self.d[m - 2];
        }
        for i in (0..m.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn dense(diag: &[f64], off: &[f64]) -> DMatrix<f64> {
        let m = diag.len();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = diag[i];
            if i + 1 < m {
                t[(i, i + 1)] = off[i];
                t[(i + 1, i)] = off[i];
            }
        }
        t
    }

    #[test]
    fn matches_dense_solver() {
        let diag: Vec<f64> = (0..40).map(|i| ((i * 7) % 11) as f64 - 3.0).collect();
        let off: Vec<f64> = (0..39).map(|i| 0.3 + ((i * 5) % 7) as f64 * 0.2).collect();
        let t = Tridiagonal { diag: &diag, off: &off };
        let pairs = t.lowest_pairs(4);
        let m = dense(&diag, &off);
        let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (i, (theta, y)) in pairs.iter().enumerate() {
            assert!((theta - ev[i]).abs() < 1e-12, "{theta} vs {}", ev[i]);
            let yv = nalgebra::DVector::from_vec(y.clone());
            let r = &m * &yv - yv.scale(*theta);
            assert!(r.norm() < 1e-11);
        }
    }

    #[test]
    fn handles_decoupled_blocks() {
        let diag = [3.0, 1.0, 2.0, 1.0];
        let off = [0.0, 0.5, 0.0];
        let t = Tridiagonal { diag: &diag, off: &off };
        let pairs = t.lowest_pairs(3);
        assert!((pairs[0].0 - (1.5 - 0.5f64.sqrt())).abs() < 1e-14);
        assert!((pairs[1].0 - 1.0).abs() < 1e-14);
        let dot: f64 = pairs[0].1.iter().zip(&pairs[1].1).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-12);
    }
}
