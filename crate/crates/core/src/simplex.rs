//! Vertex states, general simplex states from coefficient vectors, the
//! two- and three-vertex parametrized families, and the mixedness functional.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{kron, CMatrix, DensityMatrix, SystemShape};
use crate::weyl::{bell_projector_matrix, conjugate_side_b, trace_product, WeylIndex};

/// Coefficient tolerance for numerically constructed points.
pub const COEFF_TOL: f64 = -1e-12;
/// Tolerance on the coefficient sum.
pub const SUM_TOL: f64 = 1e-10;

/// A point of the simplex: probability weights over the d^2 vertex states,
/// stored row-major as c[k*d + l].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimplexPoint {
    d: usize,
    n: usize,
    c: Vec<f64>,
}

impl SimplexPoint {
    /// Validating constructor: coefficients >= -1e-12, summing to one.
    pub fn new(d: usize, n: usize, c: Vec<f64>) -> Result<Self> {
        assert!(d >= 2 && n >= 1);
        assert_eq!(c.len(), d * d, "need d^2 coefficients");
        for k in 0..d {
            for l in 0..d {
                let v = c[k * d + l];
                if v < COEFF_TOL {
                    return Err(Error::OutsideStateSpace { k, l, value: v });
                }
            }
        }
        let sum: f64 = c.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::NotNormalized {
                deviation: (sum - 1.0).abs(),
            });
        }
        Ok(Self { d, n, c })
    }

    /// Raw constructor used by the least-squares projection; coefficients may
    /// lie outside the simplex.
    pub fn from_raw(d: usize, n: usize, c: Vec<f64>) -> Self {
        assert_eq!(c.len(), d * d);
        Self { d, n, c }
    }

    /// Indicator of a single vertex.
    pub fn indicator(d: usize, n: usize, idx: WeylIndex) -> Self {
        let mut c = vec![0.0; d * d];
        c[idx.flat()] = 1.0;
        Self { d, n, c }
    }

    /// The uniform point, i.e. the maximally mixed state.
    pub fn uniform(d: usize, n: usize) -> Self {
        Self {
            d,
            n,
            c: vec![1.0 / (d * d) as f64; d * d],
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, k: usize, l: usize) -> f64 {
        self.c[k * self.d + l]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Smallest coefficient together with its (k, l) label.
    pub fn min_coeff(&self) -> (usize, usize, f64) {
        let mut best = (0, 0, f64::INFINITY);
        for k in 0..self.d {
            for l in 0..self.d {
                let v = self.coeff(k, l);
                if v < best.2 {
                    best = (k, l, v);
                }
            }
        }
        best
    }

    /// Whether the point satisfies the simplex invariants.
    pub fn is_valid(&self) -> bool {
        self.c.iter().all(|&v| v >= COEFF_TOL)
            && (self.c.iter().sum::<f64>() - 1.0).abs() <= SUM_TOL
    }
}

/// The two parametrized families of the simplex slices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Two vertex states mixed with the maximally mixed state.
    TwoVertex,
    /// Three vertex states connected by one Weyl operator (d = 3 only).
    Line,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::TwoVertex => write!(f, "two_vertex"),
            Family::Line => write!(f, "line"),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "two_vertex" => Ok(Family::TwoVertex),
            "line" => Ok(Family::Line),
            other => Err(format!("unknown family '{other}' (expected two_vertex or line)")),
        }
    }
}

/// Parameters of a family slice. `gamma` is used only by the line family.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FamilyParams {
    pub d: usize,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Effective coefficients of a family point; errors when any coefficient
/// dips below tolerance, i.e. the point lies outside the state space.
pub fn to_simplex_point(fp: &FamilyParams, family: Family) -> Result<SimplexPoint> {
    let d = fp.d;
    let dd = (d * d) as f64;
    let c = match family {
        Family::TwoVertex => {
            let background = (1.0 - fp.alpha - fp.beta) / dd;
            let mut c = vec![background; d * d];
            c[WeylIndex::new(0, 0, d).flat()] += fp.alpha;
            c[WeylIndex::new(0, 1, d).flat()] += fp.beta;
            c
        }
        Family::Line => {
            if d != 3 {
                return Err(Error::LineFamilyDimension(d));
            }
            let background = (1.0 - fp.alpha - fp.beta - fp.gamma) / 9.0;
            let mut c = vec![background; 9];
            c[WeylIndex::new(0, 0, 3).flat()] += fp.alpha;
            c[WeylIndex::new(0, 1, 3).flat()] += fp.beta;
            c[WeylIndex::new(0, 2, 3).flat()] += fp.gamma;
            c
        }
    };
    SimplexPoint::new(d, fp.n, c)
}

/// Trace overlap Tr(v_a v_b) of equal-index vertex states: 1 for n = 1,
/// 1/d^2 for n >= 2.
pub fn vertex_overlap(d: usize, n: usize) -> f64 {
    if n == 1 {
        1.0
    } else {
        1.0 / (d * d) as f64
    }
}

/// The vertex state on n pairs. For n = 1 this is the Bell projector
/// P_{k,l}; for n >= 2 the Weyl operator acts on side B of the last pair.
pub fn vertex_state(d: usize, n: usize, idx: WeylIndex) -> DensityMatrix {
    assert!(n >= 1);
    assert_eq!(idx.d(), d);
    let shape = SystemShape::pairs(d, n);
    if n == 1 {
        let p = bell_projector_matrix(idx);
        return DensityMatrix::trusted(p, shape);
    }
    let dim = shape.total_dim();
    let mut acc = CMatrix::zeros(dim, dim);
    for ij in WeylIndex::all(d) {
        let p = bell_projector_matrix(ij);
        let last = conjugate_side_b(&p, idx);
        let mut term = p.clone();
        for _ in 2..n {
            term = kron(&term, &p);
        }
        acc += kron(&term, &last);
    }
    acc /= Complex64::new((d * d) as f64, 0.0);
    DensityMatrix::trusted(acc, shape)
}

/// Convex combination of the d^2 vertex states given by the point.
pub fn simplex_state(p: &SimplexPoint) -> DensityMatrix {
    let shape = SystemShape::pairs(p.d, p.n);
    let dim = shape.total_dim();
    let mut acc = CMatrix::zeros(dim, dim);
    for idx in WeylIndex::all(p.d) {
        let w = p.coeff(idx.k(), idx.l());
        if w == 0.0 {
            continue;
        }
        acc += vertex_state(p.d, p.n, idx).matrix() * Complex64::new(w, 0.0);
    }
    DensityMatrix::trusted(acc, shape)
}

/// Normalized linear entropy D/(D-1) (1 - Tr rho^2) with D the total
/// Hilbert-space dimension: 0 for pure states, 1 for maximally mixed.
pub fn mixedness(rho: &DensityMatrix) -> f64 {
    let dim = rho.dim() as f64;
    dim / (dim - 1.0) * (1.0 - rho.purity())
}

/// Result of the least-squares projection onto the simplex span.
#[derive(Debug, Clone)]
pub struct SimplexProjection {
    /// Recovered coefficients (not necessarily a valid probability vector).
    pub point: SimplexPoint,
    /// Frobenius norm of rho minus its simplex reconstruction.
    pub residual: f64,
}

/// Infer the (d, n) layout of a state over identical-dimension pairs.
pub fn pair_layout(rho: &DensityMatrix) -> Result<(usize, usize)> {
    let factors = rho.shape().factors();
    if factors.len() % 2 != 0 {
        return Err(Error::DimensionMismatch(format!(
            "state has {} factors, expected an even number",
            factors.len()
        )));
    }
    let d = factors[0].dim;
    if factors.iter().any(|f| f.dim != d) {
        return Err(Error::DimensionMismatch(
            "factors have unequal dimensions".into(),
        ));
    }
    Ok((d, factors.len() / 2))
}

/// Least-squares coefficients over the mutually orthogonal vertex states,
/// plus the distance of rho from its simplex reconstruction.
pub fn project_to_simplex(rho: &DensityMatrix) -> Result<SimplexProjection> {
    let (d, n) = pair_layout(rho)?;
    let t = vertex_overlap(d, n);
    let vertices: Vec<CMatrix> = WeylIndex::all(d)
        .map(|idx| vertex_state(d, n, idx).matrix().clone())
        .collect();
    let coeffs: Vec<f64> = vertices
        .iter()
        .map(|v| trace_product(rho.matrix(), v) / t)
        .collect();
    let mut recon = CMatrix::zeros(rho.dim(), rho.dim());
    for (c, v) in coeffs.iter().zip(&vertices) {
        recon += v * Complex64::new(*c, 0.0);
    }
    let residual = (rho.matrix() - recon).norm();
    Ok(SimplexProjection {
        point: SimplexPoint::from_raw(d, n, coeffs),
        residual,
    })
}
