//! Truncated Fock ⊗ Dicke index space and the elementary operators on it.
//!
//! Every operator is a real matrix in compressed-row storage. Bosonic
//! operators are projections of the infinite-dimensional ones onto
//! `span{|n⟩ : n ≤ n_max}`, so `[a, a†]` differs from the identity in the
//! `(n_max, n_max)` corner.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Photon-number cutoff. The quadratic field term couples `n ↔ n ± 2`, so at
/// least three levels are required.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockTruncation {
    n_max: usize,
}

impl FockTruncation {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_max must be at least 2, got {n_max}"
            )));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }
}

/// The fully symmetric `j = N/2` multiplet of `N` two-level atoms.
///
/// States are labelled by `k = m + N/2 ∈ 0..=N`, the number of excited atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DickeSpace {
    n_atoms: usize,
}

impl DickeSpace {
    pub fn new(n_atoms: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::InvalidParameter("n_atoms must be at least 1".into()));
        }
        Ok(Self { n_atoms })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.n_atoms + 1
    }

    pub fn j(&self) -> f64 {
        self.n_atoms as f64 / 2.0
    }

    /// Magnetic quantum number of excitation label `k`.
    pub fn m(&self, k: usize) -> f64 {
        k as f64 - self.j()
    }
}

/// Product space with photon-major ordering: `index = n·(N+1) + k` where
/// `k = m + N/2`. Vector dumps rely on this layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductBasis {
    fock: FockTruncation,
    dicke: DickeSpace,
}

impl ProductBasis {
    pub fn new(fock: FockTruncation, dicke: DickeSpace) -> Self {
        Self { fock, dicke }
    }

    pub fn with_sizes(n_max: usize, n_atoms: usize) -> Result<Self> {
        Ok(Self::new(FockTruncation::new(n_max)?, DickeSpace::new(n_atoms)?))
    }

    pub fn fock(&self) -> FockTruncation {
        self.fock
    }

    pub fn dicke(&self) -> DickeSpace {
        self.dicke
    }

    pub fn n_max(&self) -> usize {
        self.fock.n_max()
    }

    pub fn n_atoms(&self) -> usize {
        self.dicke.n_atoms()
    }

    pub fn dim(&self) -> usize {
        self.fock.dim() * self.dicke.dim()
    }

    /// Flat index of `|n⟩ ⊗ |j, k − N/2⟩`.
    pub fn index(&self, n: usize, k: usize) -> usize {
        debug_assert!(n <= self.n_max() && k <= self.n_atoms());
        n * self.dicke.dim() + k
    }

    /// Inverse of [`ProductBasis::index`].
    pub fn unflatten(&self, i: usize) -> (usize, usize) {
        (i / self.dicke.dim(), i % self.dicke.dim())
    }

    /// Zero-pads a state from this basis into a basis with more photons and
    /// the same atom number.
    pub fn embed(&self, state: &DVector<f64>, target: &ProductBasis) -> Result<DVector<f64>> {
        check_dim(self.dim(), state.len())?;
        if target.n_atoms() != self.n_atoms() || target.n_max() < self.n_max() {
            return Err(Error::InvalidParameter(format!(
                "cannot embed n_max={} N={} into n_max={} N={}",
                self.n_max(),
                self.n_atoms(),
                target.n_max(),
                target.n_atoms()
            )));
        }
        let mut out = DVector::zeros(target.dim());
        out.rows_mut(0, self.dim()).copy_from(state);
        Ok(out)
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Square real matrix in compressed-row storage with sorted, duplicate-free
/// column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct RealOperator {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl RealOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            indptr: vec![0; dim + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self {
            dim: diag.len(),
            indptr: (0..=diag.len()).collect(),
            indices: (0..diag.len()).collect(),
            values: diag.to_vec(),
        }
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed in
    /// input order and explicit zeros are dropped.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for (i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(Error::InvalidParameter(format!(
                    "entry ({i}, {j}) outside a {dim}x{dim} operator"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite entry {v} at ({i}, {j})"
                )));
            }
            rows[i].push((j, v));
        }
        let mut op = Self::zeros(dim);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (j, v) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => merged.push((j, v)),
                }
            }
            for (j, v) in merged {
                if v != 0.0 {
                    op.indices.push(j);
                    op.values.push(v);
                }
            }
            op.indptr[i + 1] = op.indices.len();
        }
        Ok(op)
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        check_dim(m.nrows(), m.ncols())?;
        let n = m.nrows();
        Self::from_triplets(
            n,
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j, m[(i, j)]))),
        )
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of row `i` as `(col, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.dim + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for i in 0..self.dim {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for (i, j, v) in self.iter() {
            let p = next[j];
            indices[p] = i;
            values[p] = v;
            next[j] += 1;
        }
        Self {
            dim: self.dim,
            indptr: counts,
            indices,
            values,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zeros(self.dim);
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        Self::from_triplets(
            self.dim,
            self.iter()
                .chain(other.iter().map(|(i, j, v)| (i, j, c * v))),
        )
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut triplets = Vec::new();
        for i in 0..self.dim {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    triplets.push((i, j, a * b));
                }
            }
        }
        Self::from_triplets(self.dim, triplets)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Kronecker product `self ⊗ other` with the row index of `self` major.
    pub fn kron(&self, other: &Self) -> Self {
        let d = other.dim;
        let dim = self.dim * d;
        let mut out = Self::zeros(dim);
        for i in 0..self.dim {
            for p in 0..d {
                for (j, a) in self.row(i) {
                    for (q, b) in other.row(p) {
                        let v = a * b;
                        if v != 0.0 {
                            out.indices.push(j * d + q);
                            out.values.push(v);
                        }
                    }
                }
                out.indptr[i * d + p + 1] = out.indices.len();
            }
        }
        out
    }

    /// Submatrix on the given (sorted) index set.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.dim];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut out = Self::zeros(keep.len());
        for (new, &old) in keep.iter().enumerate() {
            for (j, v) in self.row(old) {
                if map[j] != usize::MAX {
                    out.indices.push(map[j]);
                    out.values.push(v);
                }
            }
            out.indptr[new + 1] = out.indices.len();
        }
        out
    }

    /// `y = A x` on raw slices.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for p in self.indptr[i]..self.indptr[i + 1] {
                s += self.values[p] * x[self.indices[p]];
            }
            *yi = s;
        }
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim, x.len())?;
        let mut y = DVector::zeros(self.dim);
        self.apply_into(x.as_slice(), y.as_mut_slice());
        Ok(y)
    }

    /// Largest absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A_ij − A_ji|`; zero for an exactly symmetric matrix.
    pub fn max_asymmetry(&self) -> f64 {
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .chain(self.transpose().iter().map(|(i, j, v)| (v - self.get(i, j)).abs()))
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }
}

/// A [`RealOperator`] certified to be exactly symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSymOperator(RealOperator);

impl RealSymOperator {
    /// Rejects any operator with `A_ij ≠ A_ji` in floating point.
    pub fn new(op: RealOperator) -> Result<Self> {
        let asym = op.max_asymmetry();
        if asym != 0.0 {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self(op))
    }

    pub fn into_inner(self) -> RealOperator {
        self.0
    }

    pub fn as_operator(&self) -> &RealOperator {
        &self.0
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.add(&other.0)?))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.scale(c))
    }

    pub fn restrict(&self, keep: &[usize]) -> Self {
        Self(self.0.restrict(keep))
    }
}

impl Deref for RealSymOperator {
    type Target = RealOperator;

    fn deref(&self) -> &RealOperator {
        &self.0
    }
}

/// Hermitian operator of the form `i·B` with `B` real antisymmetric, such as
/// `Y = i(a† − a)` or `Jy = i(J− − J+)/2`.
///
/// For a real state `ψ`, `⟨iB⟩ = 0` and `⟨(iB)²⟩ = ‖Bψ‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImaginaryOperator {
    generator: RealOperator,
}

impl ImaginaryOperator {
    pub fn new(generator: RealOperator) -> Result<Self> {
        let sym = generator.add(&generator.transpose())?.max_abs();
        if sym != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "generator is not antisymmetric (max |B + B^T| = {sym:e})"
            )));
        }
        Ok(Self { generator })
    }

    /// The real antisymmetric `B` in `i·B`.
    pub fn generator(&self) -> &RealOperator {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    /// Real part of the squared operator, `(iB)² = −B²`.
    pub fn square(&self) -> Result<RealSymOperator> {
        RealSymOperator::new(self.generator.matmul(&self.generator)?.scale(-1.0))
    }
}

/// The truncated annihilation operator together with its transpose.
#[derive(Clone, Debug)]
pub struct LadderPair {
    pub lower: RealOperator,
    pub raise: RealOperator,
}

impl LadderPair {
    /// `a†a`.
    pub fn number(&self) -> RealSymOperator {
        let n = self.lower.dim();
        RealSymOperator(RealOperator::diagonal(
            &(0..n).map(|k| k as f64).collect::<Vec<_>>(),
        ))
    }

    /// `X = a + a†`.
    pub fn position(&self) -> RealSymOperator {
        RealSymOperator(self.lower.add(&self.raise).expect("same dimension"))
    }

    /// `Y = i(a† − a)`.
    pub fn momentum(&self) -> ImaginaryOperator {
        ImaginaryOperator {
            generator: self.raise.sub(&self.lower).expect("same dimension"),
        }
    }

    /// Projection of `(a + a†)²` onto the truncated space,
    /// `a² + a†² + 2a†a + 1`.
    pub fn position_squared(&self) -> RealSymOperator {
        let a2 = self.lower.matmul(&self.lower).expect("same dimension");
        let ad2 = a2.transpose();
        let n = self.lower.dim();
        let diag = RealOperator::diagonal(&(0..n).map(|k| 2.0 * k as f64 + 1.0).collect::<Vec<_>>());
        RealSymOperator(
            a2.add(&ad2)
                .and_then(|m| m.add(&diag))
                .expect("same dimension"),
        )
    }
}

/// `a|n⟩ = √n|n−1⟩` on the truncated space.
pub fn annihilator(fock: &FockTruncation) -> LadderPair {
    let lower = RealOperator::from_triplets(
        fock.dim(),
        (1..fock.dim()).map(|n| (n - 1, n, (n as f64).sqrt())),
    )
    .expect("indices in range");
    let raise = lower.transpose();
    LadderPair { lower, raise }
}

/// Collective spin operators on the symmetric multiplet.
#[derive(Clone, Debug)]
pub struct CollectiveSpin {
    pub jz: RealSymOperator,
    pub jplus: RealOperator,
    pub jminus: RealOperator,
    /// `(J+ + J−)/2`.
    pub jx: RealSymOperator,
}

impl CollectiveSpin {
    /// `Jy = (J+ − J−)/(2i)`, held as `i·(J− − J+)/2`.
    pub fn jy(&self) -> ImaginaryOperator {
        ImaginaryOperator {
            generator: self.jminus.sub(&self.jplus).expect("same dimension").scale(0.5),
        }
    }

    /// `J+ + J− = Σ σx`, the operator the atoms couple to the field with.
    pub fn pauli_x_sum(&self) -> RealSymOperator {
        RealSymOperator(self.jplus.add(&self.jminus).expect("same dimension"))
    }
}

/// Matrix element `⟨k+1|J+|k⟩ = √(j(j+1) − m(m+1))` with `m = k − j`.
pub fn raising_element(dicke: &DickeSpace, k: usize) -> f64 {
    let j = dicke.j();
    let m = dicke.m(k);
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

pub fn collective_spin(dicke: &DickeSpace) -> CollectiveSpin {
    let d = dicke.dim();
    let jz = RealSymOperator(RealOperator::diagonal(
        &(0..d).map(|k| dicke.m(k)).collect::<Vec<_>>(),
    ));
    let jplus = RealOperator::from_triplets(
        d,
        (0..d - 1).map(|k| (k + 1, k, raising_element(dicke, k))),
    )
    .expect("indices in range");
    let jminus = jplus.transpose();
    let jx = RealSymOperator(jplus.add(&jminus).expect("same dimension").scale(0.5));
    CollectiveSpin {
        jz,
        jplus,
        jminus,
        jx,
    }
}

/// `A ⊗ B` on the product basis, `A` acting on the field and `B` on the atoms.
pub fn tensor(a: &RealOperator, b: &RealOperator, basis: &ProductBasis) -> Result<RealOperator> {
    check_dim(basis.fock().dim(), a.dim())?;
    check_dim(basis.dicke().dim(), b.dim())?;
    Ok(a.kron(b))
}

/// Symmetric-preserving variant of [`tensor`].
pub fn tensor_sym(
    a: &RealSymOperator,
    b: &RealSymOperator,
    basis: &ProductBasis,
) -> Result<RealSymOperator> {
    Ok(RealSymOperator(tensor(a, b, basis)?))
}

/// Dense-storage counterpart of [`tensor`], used to cross-check the sparse path.
pub fn tensor_dense(a: &DMatrix<f64>, b: &DMatrix<f64>, basis: &ProductBasis) -> Result<DMatrix<f64>> {
    check_dim(basis.fock().dim(), a.nrows())?;
    check_dim(basis.dicke().dim(), b.nrows())?;
    Ok(a.kronecker(b))
}

/// Lifts a field operator to `A ⊗ I`.
pub fn field_operator(a: &RealOperator, basis: &ProductBasis) -> Result<RealOperator> {
    tensor(a, &RealOperator::identity(basis.dicke().dim()), basis)
}

/// Lifts an atomic operator to `I ⊗ B`.
pub fn atomic_operator(b: &RealOperator, basis: &ProductBasis) -> Result<RealOperator> {
    tensor(&RealOperator::identity(basis.fock().dim()), b, basis)
}
