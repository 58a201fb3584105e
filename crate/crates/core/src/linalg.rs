//! Dense complex-matrix substrate with multipartite tensor bookkeeping.
//!
//! Index convention: row-major with factor 0 as the slowest-varying index.
//! All higher modules share this convention.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix, the carrier for every operator in the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Hermiticity tolerance on max entry deviation of `M - M†`.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Unit-trace tolerance.
pub const TRACE_TOL: f64 = 1e-10;
/// Positivity tolerance on the minimum eigenvalue.
pub const PSD_TOL: f64 = -1e-9;
/// Dense-storage bound on the total Hilbert-space dimension.
pub const MAX_TOTAL_DIM: usize = 1 << 13;

/// Which half of a qudit pair a factor belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Side {
    A,
    B,
}

/// Role of a factor during the two-copy protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum CopyRole {
    Source,
    Target,
}

/// Identifies one qudit inside the n-pair layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FactorLabel {
    pub pair: usize,
    pub side: Side,
    pub copy: CopyRole,
}

/// One tensor factor: local dimension plus its label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Factor {
    pub dim: usize,
    pub label: FactorLabel,
}

/// Ordered list of tensor factors annotating a square matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemShape {
    factors: Vec<Factor>,
}

impl SystemShape {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        assert!(!factors.is_empty(), "shape must have at least one factor");
        for f in &factors {
            assert!(f.dim >= 2, "factor dimensions must be >= 2");
        }
        let shape = Self { factors };
        let dim = shape.total_dim();
        if dim > MAX_TOTAL_DIM {
            return Err(Error::DimensionBound {
                dim,
                max: MAX_TOTAL_DIM,
            });
        }
        Ok(shape)
    }

    /// Standard layout for `n` source pairs of qudits:
    /// `[pair0.A, pair0.B, pair1.A, pair1.B, ...]`.
    pub fn pairs(d: usize, n: usize) -> Self {
        let mut factors = Vec::with_capacity(2 * n);
        for pair in 0..n {
            for side in [Side::A, Side::B] {
                factors.push(Factor {
                    dim: d,
                    label: FactorLabel {
                        pair,
                        side,
                        copy: CopyRole::Source,
                    },
                });
            }
        }
        Self::new(factors).expect("pair layout within dimension bound")
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    /// Row-major strides: factor 0 is the slowest-varying index.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factors.len()];
        for i in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factors[i + 1].dim;
        }
        strides
    }

    /// Decompose a flat index into per-factor indices.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let strides = self.strides();
        let mut out = Vec::with_capacity(self.factors.len());
        for s in strides {
            out.push(flat / s);
            flat %= s;
        }
        out
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.factors.len());
        self.strides()
            .iter()
            .zip(idx)
            .map(|(s, i)| s * i)
            .sum()
    }
}

/// A validated quantum state: Hermitian, unit trace, positive semidefinite
/// within tolerance, annotated with its tensor-factor layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    shape: SystemShape,
}

impl DensityMatrix {
    /// Validating constructor; checks all three state invariants.
    pub fn new(matrix: CMatrix, shape: SystemShape) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() != shape.total_dim() {
            return Err(Error::ShapeMismatch {
                dim: matrix.nrows(),
                shape_dim: shape.total_dim(),
            });
        }
        let dev = hermiticity_deviation(&matrix);
        if dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let trace_dev = (matrix.trace().re - 1.0).abs().max(matrix.trace().im.abs());
        if trace_dev > TRACE_TOL {
            return Err(Error::NotNormalized {
                deviation: trace_dev,
            });
        }
        let spectrum = hermitian_spectrum(&matrix)?;
        let min = spectrum[0];
        if min < PSD_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(Self { matrix, shape })
    }

    /// Constructor for matrices whose invariants hold by construction
    /// (convex combinations of validated states, reduced states, ...).
    /// Hermiticity and trace are still cheap enough to assert.
    pub(crate) fn trusted(matrix: CMatrix, shape: SystemShape) -> Self {
        debug_assert_eq!(matrix.nrows(), shape.total_dim());
        debug_assert!(hermiticity_deviation(&matrix) <= HERMITICITY_TOL);
        debug_assert!((matrix.trace().re - 1.0).abs() <= 1e-9);
        Self { matrix, shape }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Tr(rho^2), the purity.
    pub fn purity(&self) -> f64 {
        self.matrix
            .iter()
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// Reduced state on the kept factors; `keep` is a set of factor indices.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.shape.len();
        let keep = normalize_subset(keep, n)?;
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        if keep.len() == n {
            return Ok(self.clone());
        }
        let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
        let strides = self.shape.strides();
        let kept_factors: Vec<Factor> = keep.iter().map(|&i| self.shape.factors[i]).collect();
        let out_shape = SystemShape::new(kept_factors)?;
        let kd = out_shape.total_dim();
        let traced_dims: Vec<usize> = traced.iter().map(|&i| self.shape.factors[i].dim).collect();
        let td: usize = traced_dims.iter().product();

        // Precompute flat offsets contributed by kept / traced multi-indices.
        let kept_offsets: Vec<usize> = (0..kd)
            .map(|flat| {
                let idx = out_shape.unravel(flat);
                keep.iter().zip(&idx).map(|(&f, &i)| strides[f] * i).sum()
            })
            .collect();
        let traced_offsets: Vec<usize> = (0..td)
            .map(|mut flat| {
                let mut off = 0;
                for (pos, &f) in traced.iter().enumerate().rev() {
                    let d = traced_dims[pos];
                    off += strides[f] * (flat % d);
                    flat /= d;
                }
                off
            })
            .collect();

        let mut out = CMatrix::zeros(kd, kd);
        for r in 0..kd {
            for c in 0..kd {
                let mut acc = Complex64::new(0.0, 0.0);
                for &t in &traced_offsets {
                    acc += self.matrix[(kept_offsets[r] + t, kept_offsets[c] + t)];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(DensityMatrix::trusted(out, out_shape))
    }

    /// Partial transpose over the given factor subset. Returns a raw matrix:
    /// the result is Hermitian with unit trace but in general not positive.
    pub fn partial_transpose(&self, transposed: &[usize]) -> Result<CMatrix> {
        let n = self.shape.len();
        let transposed = normalize_subset(transposed, n)?;
        if transposed.is_empty() {
            return Err(Error::DegenerateTranspose("the empty set"));
        }
        if transposed.len() == n {
            return Err(Error::DegenerateTranspose("all factors"));
        }
        let strides = self.shape.strides();
        let dim = self.dim();
        let mut out = CMatrix::zeros(dim, dim);
        for r in 0..dim {
            let ridx = self.shape.unravel(r);
            for c in 0..dim {
                let cidx = self.shape.unravel(c);
                let mut rr = 0;
                let mut cc = 0;
                for f in 0..n {
                    if transposed.contains(&f) {
                        rr += strides[f] * cidx[f];
                        cc += strides[f] * ridx[f];
                    } else {
                        rr += strides[f] * ridx[f];
                        cc += strides[f] * cidx[f];
                    }
                }
                out[(rr, cc)] = self.matrix[(r, c)];
            }
        }
        Ok(out)
    }

    /// Reorder the tensor factors; `perm[i]` is the old position of the
    /// factor placed at new position `i`. The spectrum is invariant.
    pub fn permute_subsystems(&self, perm: &[usize]) -> Result<DensityMatrix> {
        let n = self.shape.len();
        if perm.len() != n {
            return Err(Error::InvalidPermutation);
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidPermutation);
            }
            seen[p] = true;
        }
        let new_factors: Vec<Factor> = perm.iter().map(|&p| self.shape.factors[p]).collect();
        let new_shape = SystemShape::new(new_factors)?;
        let new_strides = new_shape.strides();
        let dim = self.dim();
        let mut row_map = vec![0usize; dim];
        for flat in 0..dim {
            let idx = self.shape.unravel(flat);
            let mut new_flat = 0;
            for i in 0..n {
                new_flat += new_strides[i] * idx[perm[i]];
            }
            row_map[flat] = new_flat;
        }
        let mut out = CMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                out[(row_map[r], row_map[c])] = self.matrix[(r, c)];
            }
        }
        Ok(DensityMatrix::trusted(out, new_shape))
    }
}

/// Kronecker product; factor order of `a` precedes `b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Max entry deviation of `m` from its conjugate transpose.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            dev = dev.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    dev
}

/// Eigenvalues of a Hermitian matrix, sorted ascending.
pub fn hermitian_spectrum(m: &CMatrix) -> Result<Vec<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let dev = hermiticity_deviation(m);
    if dev > HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let mut eigs: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(eigs)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(hermitian_spectrum(m)?[0])
}

/// Identity matrix of the given dimension.
pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

fn normalize_subset(subset: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut s: Vec<usize> = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    if let Some(&bad) = s.iter().find(|&&i| i >= n) {
        return Err(Error::FactorOutOfRange {
            index: bad,
            count: n,
        });
    }
    Ok(s)
}
