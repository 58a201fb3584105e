//! Two-copy recurrence protocol: local permutation gates between source and
//! target copy, projection of every target qudit onto |m>, post-selection,
//! and the induced map on simplex coefficients.
//!
//! On coefficients the step acts column-wise: c'_{K,l} is the cyclic
//! convolution sum_{k + k' = K mod d} c_{k,l} c_{k',l} renormalized, and the
//! success probability is sum_l (sum_k c_{k,l})^2 / d^(2n-1). The map does
//! not depend on the choice of m. The dense circuit is retained as the
//! ground truth the coefficient path is tested against.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{kron, CMatrix, CopyRole, DensityMatrix, Factor, SystemShape};
use crate::simplex::{pair_layout, project_to_simplex, simplex_state, SimplexPoint};

/// Dense-circuit bound on the two-copy Hilbert-space dimension.
pub const MAX_TWO_COPY_DIM: usize = 1024;
/// Success probabilities below this abort the protocol.
pub const ABORT_TRACE: f64 = 1e-14;

/// Iteration control for the repeated protocol.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ProtocolConfig {
    pub max_iterations: usize,
    /// Stop early once the best vertex fidelity reaches this.
    pub fidelity_target: f64,
    /// Stop early once the coefficient vector moves less than this.
    pub convergence_tol: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            fidelity_target: 0.99,
            convergence_tol: 1e-10,
        }
    }
}

/// The local two-qudit gate: on source i and target j it swaps |i,i> and
/// |i,m> for every i != m and fixes all other basis states. An involution.
pub fn u_m_gate(d: usize, m: usize) -> CMatrix {
    assert!(m < d, "measurement outcome index must be < d");
    let mut g = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let col = i * d + j;
            let out = if i != m && j == i {
                i * d + m
            } else if i != m && j == m {
                i * d + i
            } else {
                col
            };
            g[(out, col)] = Complex64::new(1.0, 0.0);
        }
    }
    g
}

/// Result of one protocol step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: DensityMatrix,
    pub success_probability: f64,
    /// Distance of the post-state from its simplex reconstruction; zero
    /// within noise because the simplex is closed under the step.
    pub simplex_residual: f64,
}

/// One dense step of the protocol on an n-pair state: take two copies,
/// run `u_m_gate` on each party's (source, target) qudits, project every
/// target onto |m>, renormalize and discard the targets.
///
/// The whole circuit lives in this function so that gate placement variants
/// stay local to it.
pub fn protocol_step(rho: &DensityMatrix, m: usize) -> Result<StepOutcome> {
    let (d, n) = pair_layout(rho)?;
    assert!(m < d, "measurement outcome index must be < d");
    let dim = rho.dim();
    let two_dim = dim * dim;
    if two_dim > MAX_TWO_COPY_DIM {
        return Err(Error::ProtocolDimensionBound {
            dim: two_dim,
            max: MAX_TWO_COPY_DIM,
        });
    }
    let parties = 2 * n;

    // two copies, source factors first, then target factors
    let mut factors: Vec<Factor> = rho.shape().factors().to_vec();
    factors.extend(rho.shape().factors().iter().map(|f| {
        let mut t = *f;
        t.label.copy = CopyRole::Target;
        t
    }));
    let two_shape = SystemShape::new(factors)?;
    let sigma = DensityMatrix::trusted(kron(rho.matrix(), rho.matrix()), two_shape);

    // interleave: party p's source and target become adjacent
    let mut perm = Vec::with_capacity(2 * parties);
    for p in 0..parties {
        perm.push(p);
        perm.push(parties + p);
    }
    let sigma = sigma.permute_subsystems(&perm)?;

    // one gate per party, then the projection of every target onto |m>
    let gate = u_m_gate(d, m);
    let mut circuit = gate.clone();
    for _ in 1..parties {
        circuit = kron(&circuit, &gate);
    }
    let mut proj_block = CMatrix::zeros(d, d);
    proj_block[(m, m)] = Complex64::new(1.0, 0.0);
    let block = kron(&crate::linalg::identity(d), &proj_block);
    let mut projector = block.clone();
    for _ in 1..parties {
        projector = kron(&projector, &block);
    }

    let evolved = &circuit * sigma.matrix() * circuit.adjoint();
    let selected = &projector * evolved * projector.adjoint();
    let trace = selected.trace().re;
    if trace <= ABORT_TRACE {
        return Err(Error::ProtocolAborted { trace });
    }
    let post = DensityMatrix::trusted(
        selected / Complex64::new(trace, 0.0),
        sigma.shape().clone(),
    );
    let keep: Vec<usize> = (0..parties).map(|p| 2 * p).collect();
    let reduced = post.partial_trace(&keep)?;
    let residual = project_to_simplex(&reduced)?.residual;
    Ok(StepOutcome {
        state: reduced,
        success_probability: trace,
        simplex_residual: residual,
    })
}

/// The exact coefficient-space action of one protocol step, plus its
/// success probability. Independent of m.
pub fn coefficient_step(p: &SimplexPoint) -> Result<(SimplexPoint, f64)> {
    let d = p.d();
    let mut raw = vec![0.0; d * d];
    for l in 0..d {
        for k in 0..d {
            for kp in 0..d {
                raw[((k + kp) % d) * d + l] += p.coeff(k, l) * p.coeff(kp, l);
            }
        }
    }
    let norm: f64 = raw.iter().sum();
    if norm <= ABORT_TRACE {
        return Err(Error::ProtocolAborted { trace: norm });
    }
    let c: Vec<f64> = raw.iter().map(|v| v / norm).collect();
    let prob = norm / (d as f64).powi(2 * p.n() as i32 - 1);
    Ok((SimplexPoint::new(d, p.n(), c)?, prob))
}

/// Per-iteration record of the repeated protocol.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Best vertex fidelity of the state after this iteration.
    pub fidelity: f64,
    pub success_probability: f64,
    /// Max-norm movement of the coefficient vector in this iteration.
    pub coefficient_change: f64,
}

/// Trajectory of the repeated protocol.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DistillationTrace {
    pub start: SimplexPoint,
    pub records: Vec<IterationRecord>,
    pub final_point: SimplexPoint,
    /// Whether the fidelity target was reached.
    pub reached_target: bool,
}

impl DistillationTrace {
    pub fn final_fidelity(&self) -> f64 {
        best_coeff(&self.final_point).2
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }
}

fn best_coeff(p: &SimplexPoint) -> (usize, usize, f64) {
    let mut best = (0, 0, f64::NEG_INFINITY);
    for k in 0..p.d() {
        for l in 0..p.d() {
            let v = p.coeff(k, l);
            if v > best.2 {
                best = (k, l, v);
            }
        }
    }
    best
}

/// Iterate the protocol from a simplex point, recording fidelity and
/// success probability, until the fidelity target is reached, the
/// coefficients stop moving, or the iteration budget runs out.
pub fn iterate(start: &SimplexPoint, config: &ProtocolConfig) -> Result<DistillationTrace> {
    let mut current = start.clone();
    let mut records = Vec::new();
    let mut reached = best_coeff(&current).2 >= config.fidelity_target;
    for it in 1..=config.max_iterations {
        if reached {
            break;
        }
        let (next, prob) = coefficient_step(&current)?;
        let change = next
            .coeffs()
            .iter()
            .zip(current.coeffs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let fidelity = best_coeff(&next).2;
        records.push(IterationRecord {
            iteration: it,
            fidelity,
            success_probability: prob,
            coefficient_change: change,
        });
        current = next;
        if fidelity >= config.fidelity_target {
            reached = true;
            break;
        }
        if change < config.convergence_tol {
            break;
        }
    }
    Ok(DistillationTrace {
        start: start.clone(),
        records,
        final_point: current,
        reached_target: reached,
    })
}

/// Distillability verdict of the repeated protocol.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub enum DistillVerdict {
    /// The trajectory reached the fidelity target on some vertex.
    ConvergesToVertex {
        k: usize,
        l: usize,
        fidelity: f64,
        iterations: usize,
    },
    /// The trajectory stopped moving or exhausted the budget below target.
    Stalls {
        best_fidelity: f64,
        final_fidelity: f64,
    },
}

impl DistillVerdict {
    pub fn converges(&self) -> bool {
        matches!(self, DistillVerdict::ConvergesToVertex { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            DistillVerdict::ConvergesToVertex { .. } => "converges_to_vertex",
            DistillVerdict::Stalls { .. } => "stalls",
        }
    }
}

/// Run the repeated protocol and summarize the trajectory.
pub fn classify_distillability(
    start: &SimplexPoint,
    config: &ProtocolConfig,
) -> Result<(DistillVerdict, DistillationTrace)> {
    let trace = iterate(start, config)?;
    let verdict = if trace.reached_target {
        let (k, l, fidelity) = best_coeff(&trace.final_point);
        DistillVerdict::ConvergesToVertex {
            k,
            l,
            fidelity,
            iterations: trace.iterations(),
        }
    } else {
        let best = trace
            .records
            .iter()
            .map(|r| r.fidelity)
            .fold(best_coeff(start).2, f64::max);
        DistillVerdict::Stalls {
            best_fidelity: best,
            final_fidelity: trace.final_fidelity(),
        }
    };
    Ok((verdict, trace))
}

/// Convenience: one dense step starting from a simplex point.
pub fn protocol_step_from_point(p: &SimplexPoint, m: usize) -> Result<StepOutcome> {
    protocol_step(&simplex_state(p), m)
}
