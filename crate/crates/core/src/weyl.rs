//! Weyl shift-and-phase operators, the maximally entangled reference state
//! and the generalized Bell projectors built from it.

use nalgebra::DVector;
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::linalg::{CMatrix, DensityMatrix, SystemShape};

/// Label (k, l) of a Weyl operator / Bell projector / vertex state.
/// Index arithmetic is mod d, including negative intermediates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeylIndex {
    k: usize,
    l: usize,
    d: usize,
}

impl WeylIndex {
    pub fn new(k: i64, l: i64, d: usize) -> Self {
        assert!(d >= 2, "dimension must be >= 2");
        let d_i = d as i64;
        Self {
            k: k.rem_euclid(d_i) as usize,
            l: l.rem_euclid(d_i) as usize,
            d,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Group composition: indices add componentwise mod d.
    pub fn compose(&self, other: &WeylIndex) -> WeylIndex {
        assert_eq!(self.d, other.d);
        WeylIndex::new((self.k + other.k) as i64, (self.l + other.l) as i64, self.d)
    }

    /// All d^2 indices in row-major (k, l) order.
    pub fn all(d: usize) -> impl Iterator<Item = WeylIndex> {
        (0..d).flat_map(move |k| (0..d).map(move |l| WeylIndex::new(k as i64, l as i64, d)))
    }

    /// Flat position k*d + l.
    pub fn flat(&self) -> usize {
        self.k * self.d + self.l
    }
}

/// The Weyl operator acting as W|s> = w^{k(s-l)} |s-l mod d>, w = e^{2 pi i / d}.
pub fn weyl_operator(idx: WeylIndex) -> CMatrix {
    let d = idx.d;
    let mut m = CMatrix::zeros(d, d);
    for s in 0..d {
        let row = (s + d - idx.l % d) % d;
        let phase = TAU * (idx.k * row) as f64 / d as f64;
        m[(row, s)] = Complex64::from_polar(1.0, phase);
    }
    m
}

/// The normalized maximally entangled state (1/sqrt d) sum_i |ii> on C^d x C^d.
pub fn bell_state(d: usize) -> DVector<Complex64> {
    assert!(d >= 2);
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    DVector::from_fn(d * d, |i, _| {
        if i % d == i / d {
            amp
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Rank-1 projector P_{k,l} = (1 x W_{k,l}) P_{0,0} (1 x W_{k,l})^dagger.
pub fn bell_projector(idx: WeylIndex) -> DensityMatrix {
    let d = idx.d;
    let w = weyl_operator(idx);
    let phi = bell_state(d);
    // (1 x W)|phi>: component (s, t) of phi maps through W on the second slot.
    let mut v = DVector::from_element(d * d, Complex64::new(0.0, 0.0));
    for s in 0..d {
        for t in 0..d {
            let src = s * d + t;
            if phi[src].norm_sqr() == 0.0 {
                continue;
            }
            for r in 0..d {
                if w[(r, t)].norm_sqr() > 0.0 {
                    v[s * d + r] += w[(r, t)] * phi[src];
                }
            }
        }
    }
    let m = CMatrix::from_fn(d * d, d * d, |r, c| v[r] * v[c].conj());
    DensityMatrix::trusted(m, SystemShape::pairs(d, 1))
}

/// Bell projector as a raw matrix.
pub fn bell_projector_matrix(idx: WeylIndex) -> CMatrix {
    bell_projector(idx).matrix().clone()
}

/// Conjugate a d^2-dimensional pair operator by (1 x W_{k,l}).
pub fn conjugate_side_b(m: &CMatrix, idx: WeylIndex) -> CMatrix {
    let d = idx.d;
    let u = crate::linalg::kron(&crate::linalg::identity(d), &weyl_operator(idx));
    &u * m * u.adjoint()
}

/// Trace inner product Tr(a^dagger b).
pub fn trace_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.conj() * y)
        .sum()
}

/// Hilbert-Schmidt trace Tr(a b) of two Hermitian matrices (real up to noise).
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    (a.adjoint() * b).trace().re
}

#[allow(unused)]
pub(crate) fn assert_close(a: &CMatrix, b: &CMatrix, tol: f64) {
    assert_eq!(a.shape(), b.shape());
    let dev = (a - b).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    assert!(dev <= tol, "matrices differ by {dev:.3e}");
}
