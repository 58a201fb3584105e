//! Parameter-grid scans over the family slices: positivity, PPT verdicts,
//! witness detection and distillation, exported as CSV or JSON.
//!
//! Records come back in row-major grid order regardless of how many worker
//! threads run, and every stochastic sub-search is seeded from the grid
//! coordinates, so scans are reproducible point by point.

use rayon::prelude::*;

use crate::criteria::{all_cut_verdicts, ppt_verdict, Bipartition};
use crate::distill::{classify_distillability, ProtocolConfig};
use crate::error::{Error, Result};
use crate::simplex::{simplex_state, to_simplex_point, Family, FamilyParams};
use crate::witness::{detect_with_pool, CutPool, Detection, OptimizerConfig};

/// Work-unit budget for one scan; exceeding it is an error up front.
pub const DEFAULT_BUDGET: u64 = 2_000_000;
/// Cold witness searches that grow the shared cut pool before the full scan.
pub const WARM_START_PROBES: usize = 12;

/// One inclusive axis of the grid. `steps == 1` pins the axis at `start`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AxisSpec {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl AxisSpec {
    pub fn fixed(value: f64) -> Self {
        Self {
            start: value,
            stop: value,
            steps: 1,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        debug_assert!(i < self.steps);
        if self.steps == 1 {
            self.start
        } else {
            self.start + (self.stop - self.start) * i as f64 / (self.steps - 1) as f64
        }
    }
}

/// Which checks to run per grid point. Positivity always runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Checks {
    /// Partial transpose across the canonical pair cut.
    pub ppt: bool,
    /// Partial transpose across every bipartition, recording the worst.
    pub ppt_all_cuts: bool,
    pub witness: bool,
    pub distill: bool,
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            ppt: true,
            ppt_all_cuts: false,
            witness: false,
            distill: false,
        }
    }
}

/// Full description of one scan.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub family: Family,
    pub d: usize,
    pub n: usize,
    pub alpha: AxisSpec,
    pub beta: AxisSpec,
    /// Only meaningful for the line family; `None` pins gamma at zero.
    pub gamma: Option<AxisSpec>,
    pub checks: Checks,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        assert!(self.d >= 2 && self.n >= 1);
        for axis in [Some(self.alpha), Some(self.beta), self.gamma].into_iter().flatten() {
            assert!(axis.steps >= 1, "axis needs at least one step");
            assert!(
                axis.steps >= 2 || axis.start == axis.stop,
                "a single-step axis must have start == stop"
            );
        }
        if self.family == Family::Line && self.d != 3 {
            return Err(Error::LineFamilyDimension(self.d));
        }
        let estimated = self.estimated_work();
        if estimated > self.budget {
            return Err(Error::BudgetExceeded {
                estimated,
                budget: self.budget,
            });
        }
        Ok(())
    }

    pub fn gamma_axis(&self) -> AxisSpec {
        self.gamma.unwrap_or(AxisSpec::fixed(0.0))
    }

    pub fn num_points(&self) -> u64 {
        self.alpha.steps as u64 * self.beta.steps as u64 * self.gamma_axis().steps as u64
    }

    /// Coarse cost model in arbitrary units per point.
    pub fn estimated_work(&self) -> u64 {
        let mut per_point = 1u64;
        if self.checks.ppt {
            per_point += 4;
        }
        if self.checks.ppt_all_cuts {
            per_point += 4 * ((1u64 << (2 * self.n - 1)) - 1);
        }
        if self.checks.witness {
            per_point += 500;
        }
        if self.checks.distill {
            per_point += 10;
        }
        self.num_points() * per_point
    }

    /// Grid parameters in row-major order (alpha slowest, gamma fastest).
    pub fn params(&self, flat: usize) -> FamilyParams {
        let g = self.gamma_axis();
        let k = flat % g.steps;
        let rest = flat / g.steps;
        let j = rest % self.beta.steps;
        let i = rest / self.beta.steps;
        FamilyParams {
            d: self.d,
            n: self.n,
            alpha: self.alpha.value(i),
            beta: self.beta.value(j),
            gamma: g.value(k),
        }
    }
}

/// Flat result row for one grid point. Checks that did not run, or could
/// not run because the point lies outside the state space, stay `None`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ScanRecord {
    pub family: String,
    pub d: usize,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: Option<f64>,
    pub in_state_space: bool,
    /// Smallest eigenvalue of the (possibly invalid) coefficient state;
    /// populated even outside the state space.
    pub min_eig_state: f64,
    pub ppt_pair_min_eig: Option<f64>,
    pub ppt_pair_verdict: Option<String>,
    pub ppt_worst_cut: Option<String>,
    pub ppt_worst_min_eig: Option<f64>,
    pub witness_detected: Option<bool>,
    pub witness_margin: Option<f64>,
    pub distill_verdict: Option<String>,
    pub distill_final_fidelity: Option<f64>,
    pub distill_iterations: Option<usize>,
}

/// Smallest eigenvalue of the diagonal-in-Bell-basis state with the given
/// raw coefficients: the coefficients themselves for n = 1, c / d^2 for
/// n = 2 (the d^2 rank-d^2 vertices exactly fill the d^4 dimensions), and
/// c / d^2 padded with exact zeros for n >= 3.
fn analytic_min_eigenvalue(d: usize, n: usize, raw: &[f64]) -> f64 {
    let min_c = raw.iter().copied().fold(f64::INFINITY, f64::min);
    match n {
        1 => min_c,
        2 => min_c / (d * d) as f64,
        _ => (min_c / (d * d) as f64).min(0.0),
    }
}

fn raw_family_coeffs(fp: &FamilyParams, family: Family) -> Vec<f64> {
    let d = fp.d;
    let dd = (d * d) as f64;
    match family {
        Family::TwoVertex => {
            let background = (1.0 - fp.alpha - fp.beta) / dd;
            let mut c = vec![background; d * d];
            c[0] += fp.alpha;
            c[1] += fp.beta;
            c
        }
        Family::Line => {
            let background = (1.0 - fp.alpha - fp.beta - fp.gamma) / 9.0;
            let mut c = vec![background; 9];
            c[0] += fp.alpha;
            c[1] += fp.beta;
            c[2] += fp.gamma;
            c
        }
    }
}

fn point_seed(base: u64, flat: usize) -> u64 {
    // splitmix64 of the flat index, xored into the base seed
    let mut z = flat as u64 ^ 0x9e37_79b9_7f4a_7c15;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    base ^ (z ^ (z >> 31))
}

fn scan_point(
    spec: &GridSpec,
    flat: usize,
    opt: &OptimizerConfig,
    protocol: &ProtocolConfig,
    warm_cuts: &CutPool,
) -> ScanRecord {
    let fp = spec.params(flat);
    let raw = raw_family_coeffs(&fp, spec.family);
    let min_eig = analytic_min_eigenvalue(spec.d, spec.n, &raw);
    let mut rec = ScanRecord {
        family: spec.family.to_string(),
        d: spec.d,
        n: spec.n,
        alpha: fp.alpha,
        beta: fp.beta,
        gamma: if spec.family == Family::Line {
            Some(fp.gamma)
        } else {
            None
        },
        in_state_space: false,
        min_eig_state: min_eig,
        ppt_pair_min_eig: None,
        ppt_pair_verdict: None,
        ppt_worst_cut: None,
        ppt_worst_min_eig: None,
        witness_detected: None,
        witness_margin: None,
        distill_verdict: None,
        distill_final_fidelity: None,
        distill_iterations: None,
    };
    let Ok(point) = to_simplex_point(&fp, spec.family) else {
        return rec;
    };
    rec.in_state_space = true;

    if spec.checks.ppt || spec.checks.ppt_all_cuts {
        let rho = simplex_state(&point);
        if spec.checks.ppt {
            let cut = Bipartition::last_b_cut(2 * spec.n);
            let v = ppt_verdict(&rho, &cut).expect("canonical cut is valid");
            rec.ppt_pair_min_eig = Some(v.min_pt_eigenvalue);
            rec.ppt_pair_verdict = Some(v.verdict.to_string());
        }
        if spec.checks.ppt_all_cuts {
            let verdicts = all_cut_verdicts(&rho).expect("party count within bound");
            let worst = verdicts
                .iter()
                .min_by(|a, b| a.min_pt_eigenvalue.partial_cmp(&b.min_pt_eigenvalue).unwrap())
                .expect("at least one cut");
            rec.ppt_worst_cut = Some(worst.bipartition.to_string());
            rec.ppt_worst_min_eig = Some(worst.min_pt_eigenvalue);
        }
    }

    if spec.checks.witness {
        let point_opt = OptimizerConfig {
            seed: point_seed(opt.seed, flat),
            ..opt.clone()
        };
        let mut pool = warm_cuts.clone();
        let detection = match detect_with_pool(&point, &point_opt, &mut pool) {
            Detection::Detected { margin, .. } => Some(margin),
            Detection::NotDetected => None,
        };
        rec.witness_detected = Some(detection.is_some());
        rec.witness_margin = detection;
    }

    if spec.checks.distill {
        if let Ok((verdict, trace)) = classify_distillability(&point, protocol) {
            rec.distill_verdict = Some(verdict.label().to_string());
            rec.distill_final_fidelity = Some(trace.final_fidelity());
            rec.distill_iterations = Some(trace.iterations());
        }
    }
    rec
}

/// Cold witness searches on a coarse, deterministic subsample of in-space
/// points, run sequentially so the cut pool they grow is reproducible; the
/// pooled cuts seed every point of the full scan.
fn warm_start_cuts(spec: &GridSpec, opt: &OptimizerConfig) -> CutPool {
    let total = spec.num_points() as usize;
    let in_space: Vec<usize> = (0..total)
        .filter(|&flat| to_simplex_point(&spec.params(flat), spec.family).is_ok())
        .collect();
    let mut pool = CutPool::new();
    if in_space.is_empty() {
        return pool;
    }
    let stride = (in_space.len() / WARM_START_PROBES).max(1);
    for &flat in in_space.iter().step_by(stride).take(WARM_START_PROBES) {
        if let Ok(point) = to_simplex_point(&spec.params(flat), spec.family) {
            let point_opt = OptimizerConfig {
                seed: point_seed(opt.seed, flat),
                ..opt.clone()
            };
            detect_with_pool(&point, &point_opt, &mut pool);
        }
    }
    pool
}

/// Run the scan. Records come back in row-major grid order.
pub fn run_scan(
    spec: &GridSpec,
    opt: &OptimizerConfig,
    protocol: &ProtocolConfig,
) -> Result<Vec<ScanRecord>> {
    spec.validate()?;
    let warm = if spec.checks.witness {
        warm_start_cuts(spec, opt)
    } else {
        CutPool::new()
    };
    let total = spec.num_points() as usize;
    Ok((0..total)
        .into_par_iter()
        .map(|flat| scan_point(spec, flat, opt, protocol, &warm))
        .collect())
}

/// One disagreement between two scans of the same slice.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GeometryMismatch {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: Option<f64>,
    pub field: &'static str,
    pub left: String,
    pub right: String,
}

/// Compare the slice geometry (state-space membership and canonical-cut PPT
/// verdict) of two specs that differ only in the pair count n.
pub fn compare_geometry(a: &GridSpec, b: &GridSpec) -> Result<Vec<GeometryMismatch>> {
    let mut a_geo = a.clone();
    let mut b_geo = b.clone();
    let geo_checks = Checks {
        ppt: true,
        ppt_all_cuts: false,
        witness: false,
        distill: false,
    };
    a_geo.checks = geo_checks;
    b_geo.checks = geo_checks;
    let mut a_cmp = a_geo.clone();
    a_cmp.n = b_geo.n;
    if a_cmp != b_geo {
        return Err(Error::IncomparableSpecs(
            "specs must be identical except for the pair count n".into(),
        ));
    }
    let opt = OptimizerConfig::default();
    let protocol = ProtocolConfig::default();
    let ra = run_scan(&a_geo, &opt, &protocol)?;
    let rb = run_scan(&b_geo, &opt, &protocol)?;
    let mut mismatches = Vec::new();
    for (x, y) in ra.iter().zip(&rb) {
        if x.in_state_space != y.in_state_space {
            mismatches.push(GeometryMismatch {
                alpha: x.alpha,
                beta: x.beta,
                gamma: x.gamma,
                field: "in_state_space",
                left: x.in_state_space.to_string(),
                right: y.in_state_space.to_string(),
            });
            continue;
        }
        if x.ppt_pair_verdict != y.ppt_pair_verdict {
            mismatches.push(GeometryMismatch {
                alpha: x.alpha,
                beta: x.beta,
                gamma: x.gamma,
                field: "ppt_pair_verdict",
                left: format!("{:?}", x.ppt_pair_verdict),
                right: format!("{:?}", y.ppt_pair_verdict),
            });
        }
    }
    Ok(mismatches)
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt_float(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

/// CSV column order; shared by header and rows.
pub const CSV_COLUMNS: [&str; 17] = [
    "family",
    "d",
    "n",
    "alpha",
    "beta",
    "gamma",
    "in_state_space",
    "min_eig_state",
    "ppt_pair_min_eig",
    "ppt_pair_verdict",
    "ppt_worst_cut",
    "ppt_worst_min_eig",
    "witness_detected",
    "witness_margin",
    "distill_verdict",
    "distill_final_fidelity",
    "distill_iterations",
];

/// Write the records as CSV with 17-significant-digit floats; missing
/// values are empty fields.
pub fn export_csv<W: std::io::Write>(records: &[ScanRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_COLUMNS)
        .map_err(|e| Error::Serialize(e.to_string()))?;
    for r in records {
        w.write_record([
            r.family.clone(),
            r.d.to_string(),
            r.n.to_string(),
            fmt_float(r.alpha),
            fmt_float(r.beta),
            fmt_opt_float(r.gamma),
            r.in_state_space.to_string(),
            fmt_float(r.min_eig_state),
            fmt_opt_float(r.ppt_pair_min_eig),
            r.ppt_pair_verdict.clone().unwrap_or_default(),
            r.ppt_worst_cut.clone().unwrap_or_default(),
            fmt_opt_float(r.ppt_worst_min_eig),
            r.witness_detected.map(|b| b.to_string()).unwrap_or_default(),
            fmt_opt_float(r.witness_margin),
            r.distill_verdict.clone().unwrap_or_default(),
            fmt_opt_float(r.distill_final_fidelity),
            r.distill_iterations.map(|i| i.to_string()).unwrap_or_default(),
        ])
        .map_err(|e| Error::Serialize(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Write the records as a JSON array mirroring the CSV schema.
pub fn export_json<W: std::io::Write>(records: &[ScanRecord], writer: W) -> Result<()> {
    serde_json::to_writer_pretty(writer, records).map_err(|e| Error::Serialize(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_spec() -> GridSpec {
        GridSpec {
            family: Family::TwoVertex,
            d: 2,
            n: 1,
            alpha: AxisSpec { start: -0.6, stop: 1.0, steps: 9 },
            beta: AxisSpec { start: -0.6, stop: 1.0, steps: 9 },
            gamma: None,
            checks: Checks::default(),
            budget: DEFAULT_BUDGET,
        }
    }

    #[test]
    fn axis_values_hit_endpoints() {
        let a = AxisSpec { start: -1.0, stop: 1.0, steps: 5 };
        assert_abs_diff_eq!(a.value(0), -1.0);
        assert_abs_diff_eq!(a.value(2), 0.0);
        assert_abs_diff_eq!(a.value(4), 1.0);
        assert_abs_diff_eq!(AxisSpec::fixed(0.3).value(0), 0.3);
    }

    #[test]
    fn params_are_row_major() {
        let spec = small_spec();
        let first = spec.params(0);
        assert_abs_diff_eq!(first.alpha, -0.6);
        assert_abs_diff_eq!(first.beta, -0.6);
        let second = spec.params(1);
        assert_abs_diff_eq!(second.alpha, -0.6);
        assert_abs_diff_eq!(second.beta, -0.4);
        let last = spec.params(80);
        assert_abs_diff_eq!(last.alpha, 1.0);
        assert_abs_diff_eq!(last.beta, 1.0);
    }

    #[test]
    fn budget_rejects_oversized_witness_scan() {
        let mut spec = small_spec();
        spec.alpha.steps = 201;
        spec.beta.steps = 201;
        spec.checks.witness = true;
        assert!(matches!(
            spec.validate(),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn scan_marks_state_space_membership() {
        let spec = small_spec();
        let records = run_scan(&spec, &OptimizerConfig::default(), &ProtocolConfig::default()).unwrap();
        assert_eq!(records.len(), 81);
        // alpha = beta = 1.0 has coefficient sum weights alpha+beta = 2 > 1
        let corner = records.last().unwrap();
        assert!(!corner.in_state_space);
        // the uniform-adjacent point alpha = beta = 0 is valid and PPT
        let center = records
            .iter()
            .find(|r| r.alpha.abs() < 1e-12 && r.beta.abs() < 1e-12)
            .unwrap();
        assert!(center.in_state_space);
        assert_eq!(center.ppt_pair_verdict.as_deref(), Some("PPT"));
        // alpha = 1 is the pure Bell vertex: NPT across A|B
        let vertex = records
            .iter()
            .find(|r| (r.alpha - 1.0).abs() < 1e-12 && r.beta.abs() < 1e-12)
            .unwrap();
        assert_eq!(vertex.ppt_pair_verdict.as_deref(), Some("NPT"));
        assert_abs_diff_eq!(vertex.ppt_pair_min_eig.unwrap(), -0.5, epsilon = 1e-10);
    }

    #[test]
    fn min_eig_state_matches_dense_for_valid_and_invalid_points() {
        use crate::linalg::min_eigenvalue;
        for (d, n, alpha, beta) in [
            (2usize, 1usize, 0.5, 0.1),
            (2, 1, 1.2, 0.0),
            (3, 1, -0.1, 0.05),
            (2, 2, 0.5, 0.1),
        ] {
            let fp = FamilyParams { d, n, alpha, beta, gamma: 0.0 };
            let raw = raw_family_coeffs(&fp, Family::TwoVertex);
            let analytic = analytic_min_eigenvalue(d, n, &raw);
            // dense reconstruction from raw coefficients
            let dim = crate::linalg::SystemShape::pairs(d, n).total_dim();
            let mut m = crate::linalg::CMatrix::zeros(dim, dim);
            for idx in crate::weyl::WeylIndex::all(d) {
                m += crate::simplex::vertex_state(d, n, idx).matrix()
                    * num_complex::Complex64::new(raw[idx.flat()], 0.0);
            }
            assert_abs_diff_eq!(min_eigenvalue(&m).unwrap(), analytic, epsilon = 1e-10);
        }
    }

    #[test]
    fn scan_is_deterministic() {
        let mut spec = small_spec();
        spec.alpha.steps = 5;
        spec.beta.steps = 5;
        spec.checks.witness = true;
        spec.checks.distill = true;
        let opt = OptimizerConfig {
            n_starts: 16,
            quick_starts: 6,
            ..OptimizerConfig::default()
        };
        let a = run_scan(&spec, &opt, &ProtocolConfig::default()).unwrap();
        let b = run_scan(&spec, &opt, &ProtocolConfig::default()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.witness_detected, y.witness_detected);
            assert_eq!(x.witness_margin, y.witness_margin);
            assert_eq!(x.distill_verdict, y.distill_verdict);
        }
    }

    #[test]
    fn witness_scan_detects_vertex_region_qubit() {
        let mut spec = small_spec();
        spec.alpha = AxisSpec { start: 0.0, stop: 1.0, steps: 3 };
        spec.beta = AxisSpec::fixed(0.0);
        spec.checks.witness = true;
        let opt = OptimizerConfig {
            n_starts: 24,
            quick_starts: 8,
            ..OptimizerConfig::default()
        };
        let records = run_scan(&spec, &opt, &ProtocolConfig::default()).unwrap();
        // alpha = 0: maximally mixed, never detected; alpha = 1: Bell vertex,
        // must be detected (it is NPT with negative-eigenvalue -1/2)
        assert_eq!(records[0].witness_detected, Some(false));
        assert_eq!(records[2].witness_detected, Some(true));
        assert!(records[2].witness_margin.unwrap() < -1e-3);
    }

    #[test]
    fn compare_geometry_rejects_different_slices() {
        let a = small_spec();
        let mut b = small_spec();
        b.n = 2;
        b.alpha.steps = 7;
        assert!(matches!(
            compare_geometry(&a, &b),
            Err(Error::IncomparableSpecs(_))
        ));
    }

    #[test]
    fn compare_geometry_qubit_slice_n1_vs_n2() {
        let a = small_spec();
        let mut b = small_spec();
        b.n = 2;
        let mismatches = compare_geometry(&a, &b).unwrap();
        assert!(mismatches.is_empty(), "mismatches: {mismatches:?}");
    }

    #[test]
    fn pair_cut_eigenvalue_monotone_along_alpha() {
        // along beta = 0 with alpha increasing from 0, the state moves from
        // maximally mixed toward a Bell vertex; the pair-cut minimum partial
        // transpose eigenvalue must never increase
        for d in [2usize, 3] {
            let spec = GridSpec {
                family: Family::TwoVertex,
                d,
                n: 1,
                alpha: AxisSpec { start: 0.0, stop: 1.0, steps: 21 },
                beta: AxisSpec::fixed(0.0),
                gamma: None,
                checks: Checks::default(),
                budget: DEFAULT_BUDGET,
            };
            let records =
                run_scan(&spec, &OptimizerConfig::default(), &ProtocolConfig::default()).unwrap();
            let eigs: Vec<f64> = records
                .iter()
                .map(|r| r.ppt_pair_min_eig.expect("whole segment is in the state space"))
                .collect();
            for pair in eigs.windows(2) {
                assert!(
                    pair[1] <= pair[0] + 1e-12,
                    "d={d}: min PT eigenvalue increased from {} to {}",
                    pair[0],
                    pair[1]
                );
            }
        }
    }

    #[test]
    fn parallel_scan_matches_serial_evaluation() {
        let mut spec = small_spec();
        spec.alpha.steps = 5;
        spec.beta.steps = 5;
        spec.checks.witness = true;
        spec.checks.distill = true;
        let opt = OptimizerConfig {
            n_starts: 16,
            quick_starts: 6,
            ..OptimizerConfig::default()
        };
        let protocol = ProtocolConfig::default();
        let parallel = run_scan(&spec, &opt, &protocol).unwrap();
        let warm = warm_start_cuts(&spec, &opt);
        let serial: Vec<ScanRecord> = (0..spec.num_points() as usize)
            .map(|flat| scan_point(&spec, flat, &opt, &protocol, &warm))
            .collect();
        assert_eq!(parallel.len(), serial.len());
        for (p, s) in parallel.iter().zip(&serial) {
            let mut a = Vec::new();
            let mut b = Vec::new();
            export_csv(std::slice::from_ref(p), &mut a).unwrap();
            export_csv(std::slice::from_ref(s), &mut b).unwrap();
            assert_eq!(a, b, "record diverged at alpha={}, beta={}", p.alpha, p.beta);
        }
    }

    #[test]
    fn csv_round_trip_shape() {
        let spec = small_spec();
        let records = run_scan(&spec, &OptimizerConfig::default(), &ProtocolConfig::default()).unwrap();
        let mut buf = Vec::new();
        export_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(text.lines().count(), 82);
        // floats carry 17 significant digits
        assert!(text.contains("e0") || text.contains("e-"));
        let mut json = Vec::new();
        export_json(&records, &mut json).unwrap();
        let parsed: Vec<ScanRecord> = serde_json::from_slice(&json).unwrap();
        assert_eq!(parsed.len(), 81);
    }
}
