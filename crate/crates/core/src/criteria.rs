//! Positivity and PPT verdicts across bipartitions, plus fidelity utilities.

use crate::error::{Error, Result};
use crate::linalg::{
    hermiticity_deviation, hermitian_spectrum, min_eigenvalue, CMatrix, DensityMatrix,
    HERMITICITY_TOL, PSD_TOL, TRACE_TOL,
};
use crate::simplex::{pair_layout, vertex_overlap, vertex_state};
use crate::weyl::{trace_product, WeylIndex};

/// NPT threshold on the minimum partial-transpose eigenvalue. Boundary
/// points within the band are labeled PPT.
pub const NPT_THRESHOLD: f64 = -1e-9;
/// Enumeration bound on party count for `all_cut_verdicts`.
pub const MAX_PARTIES: usize = 8;

/// A bipartition of the parties (individual qudits) into two non-empty sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    side_one: Vec<usize>,
    side_two: Vec<usize>,
}

impl Bipartition {
    /// Canonical form: sides sorted, party 0 on side one.
    pub fn new(side_one: &[usize], parties: usize) -> Result<Self> {
        let mut one: Vec<usize> = side_one.to_vec();
        one.sort_unstable();
        one.dedup();
        if one.len() != side_one.len() || one.is_empty() || one.len() >= parties {
            return Err(Error::InvalidBipartition);
        }
        if one.iter().any(|&p| p >= parties) {
            return Err(Error::InvalidBipartition);
        }
        let two: Vec<usize> = (0..parties).filter(|p| !one.contains(p)).collect();
        if one[0] != 0 {
            return Ok(Self {
                side_one: two,
                side_two: one,
            });
        }
        Ok(Self {
            side_one: one,
            side_two: two,
        })
    }

    pub fn side_one(&self) -> &[usize] {
        &self.side_one
    }

    pub fn side_two(&self) -> &[usize] {
        &self.side_two
    }

    /// Whether each pair's two qudits sit on the same side (layout of
    /// `SystemShape::pairs`: parties 2p and 2p+1 form pair p).
    pub fn is_pair_respecting(&self) -> bool {
        let respects = |side: &[usize]| {
            side.iter()
                .all(|&p| side.contains(&(p ^ 1)))
        };
        respects(&self.side_one) && respects(&self.side_two)
    }

    /// The canonical single-party cut used for the family geometry: side B
    /// of the last pair against everything else. For n = 1 this is the
    /// only cut, A|B.
    pub fn last_b_cut(parties: usize) -> Self {
        let one: Vec<usize> = (0..parties - 1).collect();
        Self {
            side_one: one,
            side_two: vec![parties - 1],
        }
    }

    /// All distinct bipartitions in lexicographic order of side one.
    pub fn enumerate(parties: usize) -> Result<Vec<Bipartition>> {
        if parties > MAX_PARTIES {
            return Err(Error::PartyBound(parties, MAX_PARTIES));
        }
        if parties < 2 {
            return Err(Error::InvalidBipartition);
        }
        let mut sides: Vec<Vec<usize>> = Vec::new();
        // subsets containing party 0, proper
        for mask in 0u32..(1 << (parties - 1)) {
            let mut side = vec![0usize];
            for p in 1..parties {
                if mask & (1 << (p - 1)) != 0 {
                    side.push(p);
                }
            }
            if side.len() < parties {
                sides.push(side);
            }
        }
        sides.sort();
        Ok(sides
            .into_iter()
            .map(|one| Bipartition::new(&one, parties).expect("enumerated cuts are valid"))
            .collect())
    }
}

impl std::fmt::Display for Bipartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fmt_side = |side: &[usize]| {
            side.iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{}|{}", fmt_side(&self.side_one), fmt_side(&self.side_two))
    }
}

/// PPT / NPT dichotomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum PptVerdict {
    Ppt,
    Npt,
}

impl std::fmt::Display for PptVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PptVerdict::Ppt => write!(f, "PPT"),
            PptVerdict::Npt => write!(f, "NPT"),
        }
    }
}

/// Verdict for one bipartition.
#[derive(Debug, Clone)]
pub struct CutVerdict {
    pub bipartition: Bipartition,
    pub min_pt_eigenvalue: f64,
    pub verdict: PptVerdict,
    pub pair_respecting: bool,
}

/// Outcome of the state-validity check.
#[derive(Debug, Clone)]
pub enum StateCheck {
    Valid,
    Violation { check: &'static str, magnitude: f64 },
}

impl StateCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, StateCheck::Valid)
    }
}

/// Check Hermiticity, unit trace and positivity of a raw matrix.
pub fn is_state(m: &CMatrix) -> StateCheck {
    if m.nrows() != m.ncols() {
        return StateCheck::Violation {
            check: "square",
            magnitude: (m.nrows() as f64 - m.ncols() as f64).abs(),
        };
    }
    let herm = hermiticity_deviation(m);
    if herm > HERMITICITY_TOL {
        return StateCheck::Violation {
            check: "hermiticity",
            magnitude: herm,
        };
    }
    let trace_dev = (m.trace().re - 1.0).abs().max(m.trace().im.abs());
    if trace_dev > TRACE_TOL {
        return StateCheck::Violation {
            check: "unit trace",
            magnitude: trace_dev,
        };
    }
    let min = hermitian_spectrum(m).expect("hermiticity already checked")[0];
    if min < PSD_TOL {
        return StateCheck::Violation {
            check: "positivity",
            magnitude: min,
        };
    }
    StateCheck::Valid
}

/// Partial-transpose side two of the cut and report the minimum eigenvalue.
pub fn ppt_verdict(rho: &DensityMatrix, cut: &Bipartition) -> Result<CutVerdict> {
    let parties = rho.shape().len();
    if cut.side_one.len() + cut.side_two.len() != parties {
        return Err(Error::InvalidBipartition);
    }
    let pt = rho.partial_transpose(&cut.side_two)?;
    let min = min_eigenvalue(&pt)?;
    Ok(CutVerdict {
        bipartition: cut.clone(),
        min_pt_eigenvalue: min,
        verdict: if min < NPT_THRESHOLD {
            PptVerdict::Npt
        } else {
            PptVerdict::Ppt
        },
        pair_respecting: cut.is_pair_respecting(),
    })
}

/// One verdict per distinct bipartition, lexicographic by side one.
pub fn all_cut_verdicts(rho: &DensityMatrix) -> Result<Vec<CutVerdict>> {
    Bipartition::enumerate(rho.shape().len())?
        .iter()
        .map(|cut| ppt_verdict(rho, cut))
        .collect()
}

/// Tr(rho . vertex_{idx}) normalized so the vertex state itself scores 1.
pub fn fidelity_to_vertex(rho: &DensityMatrix, idx: WeylIndex) -> Result<f64> {
    let (d, n) = pair_layout(rho)?;
    if d != idx.d() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension d={d} vs index dimension d={}",
            idx.d()
        )));
    }
    let v = vertex_state(d, n, idx);
    Ok(trace_product(rho.matrix(), v.matrix()) / vertex_overlap(d, n))
}

/// Best vertex fidelity over all d^2 vertices.
pub fn best_vertex_fidelity(rho: &DensityMatrix) -> Result<(WeylIndex, f64)> {
    let (d, _) = pair_layout(rho)?;
    let mut best = (WeylIndex::new(0, 0, d), f64::NEG_INFINITY);
    for idx in WeylIndex::all(d) {
        let f = fidelity_to_vertex(rho, idx)?;
        if f > best.1 {
            best = (idx, f);
        }
    }
    Ok(best)
}
