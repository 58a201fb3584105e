//! Entanglement witnesses inside the simplex.
//!
//! A candidate witness is K_n = sum_{k,l} kappa_{k,l} vertex_{k,l}. It is a
//! valid witness iff the d x d matrix M_phi = sum kappa_{k,l} W |phi><phi| W^dag
//! is positive semidefinite for every unit phi, and optimal (tangential to the
//! separable set) iff det M_phi vanishes at the minimizing phi. Validity,
//! values and detection verdicts depend only on (d, kappa, c) and are shared
//! by every pair count n.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::simplex::{simplex_state, vertex_overlap, vertex_state, SimplexPoint};
use crate::weyl::{trace_product, weyl_operator, WeylIndex};

/// Validity threshold: kappa is a witness iff min_phi lambda_min(M_phi)
/// stays above this.
pub const VALIDITY_TOL: f64 = -1e-8;
/// Detection threshold on the witness value.
pub const DETECTION_TOL: f64 = -1e-8;
/// Tangency threshold on |det M_phi| at the argmin.
pub const OPTIMALITY_TOL: f64 = 1e-8;

/// Real coefficient grid kappa_{k,l}, canonically scaled to max |kappa| = 1.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WitnessCoefficients {
    d: usize,
    kappa: Vec<f64>,
}

impl WitnessCoefficients {
    /// Normalizing constructor; rejects the all-zero grid.
    pub fn new(d: usize, kappa: Vec<f64>) -> Result<Self> {
        assert_eq!(kappa.len(), d * d, "need d^2 coefficients");
        let max = kappa.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max == 0.0 {
            return Err(Error::DimensionMismatch(
                "witness coefficients must not all be zero".into(),
            ));
        }
        Ok(Self {
            d,
            kappa: kappa.iter().map(|v| v / max).collect(),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coeff(&self, k: usize, l: usize) -> f64 {
        self.kappa[k * self.d + l]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.kappa
    }

    /// Uniform shift of every coefficient (used to restore validity; shifts
    /// every M_phi by mu * d * identity), followed by renormalization.
    pub fn shifted(&self, mu: f64) -> Self {
        let kappa: Vec<f64> = self.kappa.iter().map(|v| v + mu).collect();
        WitnessCoefficients::new(self.d, kappa).expect("shift keeps a nonzero grid")
    }
}

/// Tolerances and budgets for the phi- and kappa-optimizations.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct OptimizerConfig {
    /// Multi-starts of the phi-minimization used for final verdicts.
    pub n_starts: usize,
    /// Cheaper start count used by the separation oracle of the kappa-search.
    pub quick_starts: usize,
    /// Stop the local phi-descent when the improvement drops below this.
    pub improvement_tol: f64,
    /// Iteration cap for one local phi-descent.
    pub max_phi_iters: usize,
    /// Cap on cutting planes generated by one kappa-search.
    pub max_cuts: usize,
    /// Seed for every stochastic choice; runs are reproducible from it.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            n_starts: 64,
            quick_starts: 12,
            improvement_tol: 1e-12,
            max_phi_iters: 80,
            max_cuts: 1000,
            seed: 0,
        }
    }
}

/// Outcome of the global phi-minimization of lambda_min(M_phi).
#[derive(Debug, Clone)]
pub struct ValidityReport {
    pub min_over_phi: f64,
    pub argmin_phi: DVector<Complex64>,
    pub n_starts: usize,
    pub converged: bool,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.min_over_phi >= VALIDITY_TOL
    }
}

/// M_phi = sum kappa_{k,l} W_{k,l} |phi><phi| W_{k,l}^dag for unit phi.
pub fn m_phi(kappa: &WitnessCoefficients, phi: &DVector<Complex64>) -> Result<CMatrix> {
    let norm = phi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnitVector { norm });
    }
    let ops = weyl_ops(kappa.d);
    Ok(m_phi_with(kappa, phi, &ops))
}

fn weyl_ops(d: usize) -> Vec<CMatrix> {
    WeylIndex::all(d).map(weyl_operator).collect()
}

fn m_phi_with(kappa: &WitnessCoefficients, phi: &DVector<Complex64>, ops: &[CMatrix]) -> CMatrix {
    let d = kappa.d;
    let mut m = CMatrix::zeros(d, d);
    for (a, w) in ops.iter().enumerate() {
        let v = w * phi;
        let weight = Complex64::new(kappa.kappa[a], 0.0);
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] += weight * v[r] * v[c].conj();
            }
        }
    }
    m
}

/// N_psi = sum kappa_{k,l} W^dag |psi><psi| W, the partner matrix of the
/// alternating descent: psi^dag M_phi psi = phi^dag N_psi phi.
fn n_psi_with(kappa: &WitnessCoefficients, psi: &DVector<Complex64>, ops: &[CMatrix]) -> CMatrix {
    let d = kappa.d;
    let mut m = CMatrix::zeros(d, d);
    for (a, w) in ops.iter().enumerate() {
        let v = w.adjoint() * psi;
        let weight = Complex64::new(kappa.kappa[a], 0.0);
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] += weight * v[r] * v[c].conj();
            }
        }
    }
    m
}

fn min_eig_pair(m: &CMatrix) -> (f64, DVector<Complex64>) {
    let eig = m.clone().symmetric_eigen();
    let mut best = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).into_owned())
}

/// Deterministic structured + random start vectors for the phi search.
fn phi_starts(d: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<Complex64>> {
    let mut starts = Vec::with_capacity(count);
    for j in 0..d {
        starts.push(DVector::from_fn(d, |i, _| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        }));
    }
    let amp = 1.0 / (d as f64).sqrt();
    for j in 0..d {
        starts.push(DVector::from_fn(d, |s, _| {
            Complex64::from_polar(amp, std::f64::consts::TAU * (j * s) as f64 / d as f64)
        }));
    }
    while starts.len() < count {
        let mut v = DVector::from_fn(d, |_, _| {
            Complex64::new(rng.sample(rand_distr_standard()), rng.sample(rand_distr_standard()))
        });
        let norm = v.norm();
        if norm > 1e-12 {
            v /= Complex64::new(norm, 0.0);
            starts.push(v);
        }
    }
    starts.truncate(count.max(2 * d));
    starts
}

fn rand_distr_standard() -> rand::distributions::Uniform<f64> {
    rand::distributions::Uniform::new(-1.0, 1.0)
}

/// Minimize lambda_min(M_phi) over unit phi by multi-start alternating
/// eigenvector descent. Each sweep is monotonically non-increasing.
pub fn validity(kappa: &WitnessCoefficients, opt: &OptimizerConfig) -> ValidityReport {
    validity_with_starts(kappa, opt, opt.n_starts)
}

fn validity_with_starts(
    kappa: &WitnessCoefficients,
    opt: &OptimizerConfig,
    n_starts: usize,
) -> ValidityReport {
    let d = kappa.d;
    let ops = weyl_ops(d);
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed ^ 0x9e37_79b9_7f4a_7c15);
    let starts = phi_starts(d, n_starts, &mut rng);
    let mut best_val = f64::INFINITY;
    let mut best_phi = starts[0].clone();
    let mut converged = true;
    for phi0 in &starts {
        let mut phi = phi0.clone();
        let mut val = f64::INFINITY;
        let mut ok = false;
        for _ in 0..opt.max_phi_iters {
            let m = m_phi_with(kappa, &phi, &ops);
            let (lam, psi) = min_eig_pair(&m);
            let n = n_psi_with(kappa, &psi, &ops);
            let (_, phi_next) = min_eig_pair(&n);
            let improvement = val - lam;
            phi = phi_next;
            val = lam;
            if improvement.abs() < opt.improvement_tol {
                ok = true;
                break;
            }
        }
        // evaluate at the final iterate as well
        let m = m_phi_with(kappa, &phi, &ops);
        let (lam, _) = min_eig_pair(&m);
        let (v, p) = if lam < val { (lam, phi.clone()) } else { (val, phi) };
        if v < best_val {
            best_val = v;
            best_phi = p;
        }
        converged &= ok;
    }
    ValidityReport {
        min_over_phi: best_val,
        argmin_phi: best_phi,
        n_starts: starts.len(),
        converged,
    }
}

/// Coefficient-space witness value t_n * sum kappa_{k,l} c_{k,l}, equal to
/// Tr(K_n rho) by vertex orthogonality.
pub fn witness_value(kappa: &WitnessCoefficients, p: &SimplexPoint) -> Result<f64> {
    if kappa.d != p.d() {
        return Err(Error::DimensionMismatch(format!(
            "witness has d={}, point has d={}",
            kappa.d,
            p.d()
        )));
    }
    let t = vertex_overlap(p.d(), p.n());
    Ok(t * kappa
        .kappa
        .iter()
        .zip(p.coeffs())
        .map(|(k, c)| k * c)
        .sum::<f64>())
}

/// Dense K_n operator, the cross-check path for `witness_value`.
pub fn witness_operator(kappa: &WitnessCoefficients, n: usize) -> CMatrix {
    let d = kappa.d;
    let dim = crate::linalg::SystemShape::pairs(d, n).total_dim();
    let mut m = CMatrix::zeros(dim, dim);
    for idx in WeylIndex::all(d) {
        m += vertex_state(d, n, idx).matrix() * Complex64::new(kappa.coeff(idx.k(), idx.l()), 0.0);
    }
    m
}

/// Dense Tr(K_n rho) for a simplex point; agrees with `witness_value`.
pub fn witness_value_dense(kappa: &WitnessCoefficients, p: &SimplexPoint) -> Result<f64> {
    if kappa.d != p.d() {
        return Err(Error::DimensionMismatch("dimension mismatch".into()));
    }
    let k = witness_operator(kappa, p.n());
    let rho = simplex_state(p);
    Ok(trace_product(&k, rho.matrix()))
}

/// Tangency test: |det M_phi| at the argmin phi of an established validity
/// report.
pub fn optimality(kappa: &WitnessCoefficients, report: &ValidityReport) -> bool {
    let m = m_phi_with(kappa, &report.argmin_phi, &weyl_ops(kappa.d));
    m.determinant().norm() <= OPTIMALITY_TOL
}

/// Detection outcome for one simplex point.
#[derive(Debug, Clone)]
pub enum Detection {
    Detected {
        kappa: WitnessCoefficients,
        /// Witness value on the point (negative).
        margin: f64,
        validity: ValidityReport,
    },
    NotDetected,
}

impl Detection {
    pub fn is_detected(&self) -> bool {
        matches!(self, Detection::Detected { .. })
    }
}

/// Verify a candidate kappa against a point: restore validity by the uniform
/// shift if the global phi-minimum dips below zero, then re-evaluate the
/// value. Sound by construction given an accurate phi-minimum.
pub fn verify_candidate(
    kappa: &WitnessCoefficients,
    p: &SimplexPoint,
    opt: &OptimizerConfig,
) -> Option<(WitnessCoefficients, f64, ValidityReport)> {
    let report = validity(kappa, opt);
    let kappa = if report.min_over_phi < 0.0 {
        kappa.shifted((-report.min_over_phi + 1e-12) / kappa.d as f64)
    } else {
        kappa.clone()
    };
    let report = validity(&kappa, opt);
    if !report.is_valid() {
        return None;
    }
    let value = witness_value(&kappa, p).ok()?;
    if value < DETECTION_TOL {
        Some((kappa, value, report))
    } else {
        None
    }
}

/// Product-pair overlap profile g_a = |<psi| W_a |phi>|^2 at the argmin of
/// a validity search. Every valid kappa satisfies sum_a g_a kappa_a >= 0.
fn gradient_at(
    phi: &DVector<Complex64>,
    kappa: &WitnessCoefficients,
    ops: &[CMatrix],
) -> Vec<f64> {
    let m = m_phi_with(kappa, phi, ops);
    let (_, psi) = min_eig_pair(&m);
    ops.iter()
        .map(|w| {
            let v = w * phi;
            psi.dotc(&v).norm_sqr()
        })
        .collect()
}

/// Accumulated product-pair constraints sum_a g_a kappa_a >= 0.
///
/// Each cut is a necessary condition for validity that holds for every kappa
/// and every state, so a pool can be grown at one grid point and reused at
/// all others.
#[derive(Debug, Clone, Default)]
pub struct CutPool {
    cuts: Vec<Vec<f64>>,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    fn push(&mut self, g: Vec<f64>) {
        let duplicate = self
            .cuts
            .iter()
            .any(|c| c.iter().zip(&g).all(|(x, y)| (x - y).abs() < 1e-12));
        if !duplicate {
            self.cuts.push(g);
        }
    }
}

/// Master problem of the cutting-plane search: minimize sum_a c_a kappa_a
/// over the box [-1, 1]^{d^2} subject to every pooled cut.
fn solve_master(c_scaled: &[f64], pool: &CutPool) -> Option<(Vec<f64>, f64)> {
    let mut problem = microlp::Problem::new(microlp::OptimizationDirection::Minimize);
    let vars: Vec<_> = c_scaled
        .iter()
        .map(|&c| problem.add_var(c, (-1.0, 1.0)))
        .collect();
    for cut in &pool.cuts {
        let terms: Vec<_> = vars.iter().copied().zip(cut.iter().copied()).collect();
        problem.add_constraint(&terms, microlp::ComparisonOp::Ge, 0.0);
    }
    let solution = problem.solve().ok()?.into_solution().ok()?;
    let kappa: Vec<f64> = vars.iter().map(|&v| solution.var_value(v)).collect();
    Some((kappa, solution.objective()))
}

/// Search for a valid witness with negative value on the point.
///
/// The feasible set {kappa : min_phi lambda_min(M_phi) >= 0} is convex — the
/// validity map is a minimum over product pairs of linear functions
/// sum_a |<psi| W_a |phi>|^2 kappa_a — and the witness value is linear in
/// kappa, so the search is a semi-infinite linear program. It is solved by
/// cutting planes: the master LP minimizes the value over the box and the
/// pooled constraints, and the validity optimizer acts as separation oracle,
/// either certifying the LP optimum or contributing the violated cut. The LP
/// optimum is a lower bound on the value of every valid witness, so a
/// non-negative master optimum proves non-detection; a candidate is only
/// reported after the full-start validity verifier accepts it.
pub fn detect(p: &SimplexPoint, opt: &OptimizerConfig) -> Detection {
    let mut pool = CutPool::new();
    detect_with_pool(p, opt, &mut pool)
}

/// `detect` with an externally shared cut pool; cuts found here are appended
/// for reuse at later points.
pub fn detect_with_pool(p: &SimplexPoint, opt: &OptimizerConfig, pool: &mut CutPool) -> Detection {
    let d = p.d();
    let t = vertex_overlap(d, p.n());
    let ops = weyl_ops(d);
    let c_scaled: Vec<f64> = p.coeffs().iter().map(|c| t * c).collect();
    let oracle_starts = opt.quick_starts.max(2 * d);

    for _ in 0..opt.max_cuts {
        let Some((raw, lower)) = solve_master(&c_scaled, pool) else {
            return Detection::NotDetected;
        };
        if lower >= -1e-12 {
            // even the relaxed problem cannot go negative
            return Detection::NotDetected;
        }
        let Ok(kappa) = WitnessCoefficients::new(d, raw) else {
            return Detection::NotDetected;
        };
        let quick = validity_with_starts(&kappa, opt, oracle_starts);
        if quick.min_over_phi < -1e-10 {
            pool.push(gradient_at(&quick.argmin_phi, &kappa, &ops));
            continue;
        }
        // the oracle believes the LP optimum is valid; escalate to the
        // full-start verifier before accepting
        let full = validity(&kappa, opt);
        if full.min_over_phi < -1e-10 {
            pool.push(gradient_at(&full.argmin_phi, &kappa, &ops));
            continue;
        }
        // restore strict validity from any residual dip, then read the value
        let (kappa, report) = if full.min_over_phi < 0.0 {
            let repaired = kappa.shifted((-full.min_over_phi + 1e-12) / d as f64);
            let report = validity(&repaired, opt);
            (repaired, report)
        } else {
            (kappa, full)
        };
        if !report.is_valid() {
            return Detection::NotDetected;
        }
        let value = witness_value(&kappa, p).expect("dimensions match by construction");
        if value < DETECTION_TOL {
            return Detection::Detected {
                kappa,
                margin: value,
                validity: report,
            };
        }
        return Detection::NotDetected;
    }
    Detection::NotDetected
}
