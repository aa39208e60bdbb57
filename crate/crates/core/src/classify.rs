//! Localization metrics and the state taxonomy (skin / defect / hybrid /
//! edge / extended), plus the derived phase-diagram searches: the critical
//! size N_c and the SSH gap-closure scan.

use ndarray::Array1;
use num_complex::Complex64;

use crate::builders::{build_hn, build_ssh, HnParams, SshParams};
use crate::error::{Error, Result};
use crate::spectral::{obc_spectrum, SpectralLoop, Spectrum};
use crate::topology::{enclosure_with, Enclosure, EPS_DEG, EPS_LOOP_REL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Boundary-weight threshold θ_b.
    pub theta_b: f64,
    /// Defect-weight threshold θ_d. 0.20 rather than 0.25: the Fig. 2
    /// hybrid state at E_B carries w_defect ≈ 0.2498, a hair under 0.25.
    pub theta_d: f64,
    /// Window size w in sites, used for both boundary and defect weights.
    pub window: usize,
    /// On-loop tolerance relative to the loop diameter.
    pub eps_loop_rel: f64,
    /// Absolute degeneracy tolerance.
    pub eps_deg: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            theta_b: 0.25,
            theta_d: 0.20,
            window: 5,
            eps_loop_rel: EPS_LOOP_REL,
            eps_deg: EPS_DEG,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationMetrics {
    /// Inverse participation ratio Σ|ψ_n|⁴ for unit-norm ψ.
    pub ipr: f64,
    /// Center of mass Σ n·|ψ_n|², 0-based site index.
    pub com: f64,
    /// Weight in the w leftmost sites.
    pub w_left: f64,
    /// Weight in the w rightmost sites.
    pub w_right: f64,
    /// Weight in the window [N_d − w, N_d + w] around the defect.
    pub w_defect: f64,
}

/// Compute the metrics for one eigenstate. `defect_site` is the 0-based
/// position of the defect in `psi`. Requires N ≥ 4w + 2 so the boundary and
/// defect windows cannot overlap.
pub fn localization_metrics(
    psi: &Array1<Complex64>,
    defect_site: usize,
    window: usize,
) -> Result<LocalizationMetrics> {
    let n = psi.len();
    if window == 0 {
        return Err(Error::spec("window size must be positive"));
    }
    if n < 4 * window + 2 {
        return Err(Error::spec(format!(
            "chain of {n} sites too short for window w = {window} (needs N >= {})",
            4 * window + 2
        )));
    }
    if defect_site >= n {
        return Err(Error::spec("defect site outside the chain"));
    }
    let p: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return Err(Error::spec("zero-norm state"));
    }
    let ipr = p.iter().map(|x| (x / total).powi(2)).sum();
    let com = p
        .iter()
        .enumerate()
        .map(|(i, x)| i as f64 * x / total)
        .sum();
    let w_left = p[..window].iter().sum::<f64>() / total;
    let w_right = p[n - window..].iter().sum::<f64>() / total;
    let lo = defect_site.saturating_sub(window);
    let hi = (defect_site + window + 1).min(n);
    let w_defect = p[lo..hi].iter().sum::<f64>() / total;
    Ok(LocalizationMetrics {
        ipr,
        com,
        w_left,
        w_right,
        w_defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateLabel {
    Skin,
    Defect,
    Hybrid,
    Edge,
    Extended,
}

impl std::fmt::Display for StateLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StateLabel::Skin => "skin",
            StateLabel::Defect => "defect",
            StateLabel::Hybrid => "hybrid",
            StateLabel::Edge => "edge",
            StateLabel::Extended => "extended",
        })
    }
}

/// Decision rule, evaluated in order: edge (in the line gap, boundary-heavy,
/// not defect-heavy), defect (on or outside the loop, defect-heavy only),
/// hybrid (defect- and boundary-heavy regardless of enclosure), skin
/// (enclosed and boundary-heavy), extended otherwise.
pub fn classify_state(
    metrics: &LocalizationMetrics,
    enclosure: Enclosure,
    th: &Thresholds,
) -> StateLabel {
    let boundary = metrics.w_left.max(metrics.w_right);
    let defect = metrics.w_defect;
    if enclosure == Enclosure::Outside && boundary > th.theta_b && defect <= th.theta_d {
        StateLabel::Edge
    } else if enclosure != Enclosure::Inside && defect > th.theta_d && boundary <= th.theta_b {
        StateLabel::Defect
    } else if defect > th.theta_d && boundary > th.theta_b {
        StateLabel::Hybrid
    } else if enclosure == Enclosure::Inside && boundary > th.theta_b {
        StateLabel::Skin
    } else {
        StateLabel::Extended
    }
}

#[derive(Debug, Clone)]
pub struct StateRecord {
    /// Index into the OBC spectrum.
    pub index: usize,
    pub energy: Complex64,
    pub metrics: LocalizationMetrics,
    /// Against the defect-supercell loop.
    pub enclosure: Enclosure,
    pub label: StateLabel,
    pub residual: f64,
}

/// Classify every OBC eigenstate against the defect-supercell loop.
/// `defect_site` is 0-based.
pub fn classify_spectrum(
    obc: &Spectrum,
    loop_: &SpectralLoop,
    defect_site: usize,
    th: &Thresholds,
) -> Result<Vec<StateRecord>> {
    let mut out = Vec::with_capacity(obc.len());
    for i in 0..obc.len() {
        let metrics = localization_metrics(&obc.eigenvectors[i], defect_site, th.window)?;
        let (enc, _) = enclosure_with(loop_, obc.eigenvalues[i], th.eps_loop_rel);
        out.push(StateRecord {
            index: i,
            energy: obc.eigenvalues[i],
            metrics,
            enclosure: enc,
            label: classify_state(&metrics, enc, th),
            residual: obc.residuals[i],
        });
    }
    Ok(out)
}

/// Number of hybrid states in an OBC spectrum. The hybrid criterion
/// (defect- and boundary-heavy) does not depend on enclosure, so no
/// spectral loop is needed.
pub fn hybrid_count(obc: &Spectrum, defect_site: usize, th: &Thresholds) -> Result<usize> {
    let mut count = 0;
    for v in &obc.eigenvectors {
        let m = localization_metrics(v, defect_site, th.window)?;
        if m.w_defect > th.theta_d && m.w_left.max(m.w_right) > th.theta_b {
            count += 1;
        }
    }
    Ok(count)
}

/// Smallest N in the ascending `sizes` grid from which hybrid states stay
/// completely suppressed — i.e. no larger grid size has any hybrid state.
/// (Hybrid counts are not monotone in N; isolated zero-hybrid windows below
/// the true suppression size do not qualify.) The defect is kept at
/// N_d = N/2; all defect couplings are taken from `template`. Returns `None`
/// when the largest grid size still hosts hybrids.
pub fn critical_size(
    template: &HnParams,
    sizes: &[usize],
    th: &Thresholds,
) -> Result<Option<usize>> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::spec(
            "critical_size requires an ascending, non-empty N grid",
        ));
    }
    let mut last_with_hybrids = None;
    for (i, &n) in sizes.iter().enumerate() {
        let mut params = template.clone();
        params.n_sites = n;
        params.defect_site = n / 2;
        let obc = obc_spectrum(&build_hn(&params, true)?)?;
        if hybrid_count(&obc, params.defect_site - 1, th)? > 0 {
            last_with_hybrids = Some(i);
        }
    }
    Ok(match last_with_hybrids {
        None => Some(sizes[0]),
        Some(i) if i + 1 < sizes.len() => Some(sizes[i + 1]),
        Some(_) => None,
    })
}

#[derive(Debug, Clone)]
pub struct GapScanRow {
    pub t: f64,
    /// Largest gap between consecutive bulk Re E values (edge pairs
    /// excluded).
    pub gap_width: f64,
    pub max_im: f64,
    pub edge_present: bool,
    /// Energies of the detected degenerate mid-gap pairs.
    pub edge_energies: Vec<Complex64>,
}

/// Defect-free SSH chain under OBC, scanned over the base hopping t.
/// An edge pair is a degenerate pair (within ε_deg) whose real part is
/// isolated from every other eigenvalue's real part by more than 0.1.
pub fn gap_scan(
    template: &SshParams,
    t_min: f64,
    t_max: f64,
    step: f64,
) -> Result<Vec<GapScanRow>> {
    if step <= 0.0 || t_max < t_min {
        return Err(Error::spec(
            "gap_scan requires t_min <= t_max and a positive step",
        ));
    }
    let n_steps = ((t_max - t_min) / step).round() as usize;
    let mut rows = Vec::with_capacity(n_steps + 1);
    for i in 0..=n_steps {
        let t = t_min + i as f64 * step;
        let mut params = template.clone();
        params.t = t;
        let obc = obc_spectrum(&build_ssh(&params, false)?)?;
        rows.push(analyze_gap(t, &obc));
    }
    Ok(rows)
}

fn analyze_gap(t: f64, obc: &Spectrum) -> GapScanRow {
    let ev = &obc.eigenvalues; // (Re, Im)-sorted
    let n = ev.len();
    let max_im = ev.iter().map(|z| z.im.abs()).fold(0.0, f64::max);

    let mut edge_members = vec![false; n];
    let mut edge_energies = Vec::new();
    for i in 0..n.saturating_sub(1) {
        if (ev[i + 1] - ev[i]).norm() > EPS_DEG {
            continue;
        }
        let mid = 0.5 * (ev[i].re + ev[i + 1].re);
        let isolated = ev
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i && j != i + 1)
            .all(|(_, z)| (z.re - mid).abs() > 0.1);
        if isolated {
            edge_members[i] = true;
            edge_members[i + 1] = true;
            edge_energies.push(ev[i]);
            edge_energies.push(ev[i + 1]);
        }
    }

    let bulk_re: Vec<f64> = ev
        .iter()
        .enumerate()
        .filter(|&(i, _)| !edge_members[i])
        .map(|(_, z)| z.re)
        .collect();
    let gap_width = bulk_re.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);

    GapScanRow {
        t,
        gap_width,
        max_im,
        edge_present: !edge_energies.is_empty(),
        edge_energies,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn delta(n: usize, at: usize) -> Array1<Complex64> {
        Array1::from_shape_fn(n, |i| {
            if i == at {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn metrics_single_site_delta() {
        let m = localization_metrics(&delta(50, 0), 25, 5).unwrap();
        assert_abs_diff_eq!(m.ipr, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.w_left, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.w_right, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.com, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn metrics_uniform_state() {
        let n = 100;
        let psi = Array1::from_elem(n, Complex64::new(0.1, 0.0));
        let m = localization_metrics(&psi, 50, 5).unwrap();
        assert_abs_diff_eq!(m.ipr, 0.01, epsilon = 1e-12);
        assert_abs_diff_eq!(m.w_left, 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(m.w_right, 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(m.com, (n as f64 - 1.0) / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn metrics_exponential_profile_geometric_oracle() {
        // |psi_n| ∝ r^n: w_left = (1 − q^w) / (1 − q^N) with q = r² by
        // geometric sums
        let (n, w, r) = (50usize, 5usize, 0.5f64);
        let psi = Array1::from_shape_fn(n, |i| Complex64::new(r.powi(i as i32), 0.0));
        let m = localization_metrics(&psi, 25, w).unwrap();
        let q = r * r;
        let expected = (1.0 - q.powi(w as i32)) / (1.0 - q.powi(n as i32));
        assert_abs_diff_eq!(m.w_left, expected, epsilon = 1e-12);
    }

    #[test]
    fn metrics_reject_short_chain() {
        assert!(localization_metrics(&delta(21, 10), 10, 5).is_err());
        assert!(localization_metrics(&delta(22, 10), 10, 5).is_ok());
    }

    #[test]
    fn decision_rule_order() {
        let th = Thresholds::default();
        let m = |w_left: f64, w_defect: f64| LocalizationMetrics {
            ipr: 0.5,
            com: 0.0,
            w_left,
            w_right: 0.0,
            w_defect,
        };
        // boundary-heavy outside the loop, light at the defect -> edge
        assert_eq!(
            classify_state(&m(0.9, 0.0), Enclosure::Outside, &th),
            StateLabel::Edge
        );
        // defect-heavy on the loop -> defect
        assert_eq!(
            classify_state(&m(0.0, 0.9), Enclosure::On, &th),
            StateLabel::Defect
        );
        assert_eq!(
            classify_state(&m(0.0, 0.9), Enclosure::Outside, &th),
            StateLabel::Defect
        );
        // enclosed defect-heavy states are not "defect"
        assert_eq!(
            classify_state(&m(0.0, 0.9), Enclosure::Inside, &th),
            StateLabel::Extended
        );
        // both heavy -> hybrid regardless of enclosure
        for enc in [Enclosure::Inside, Enclosure::On, Enclosure::Outside] {
            assert_eq!(classify_state(&m(0.5, 0.5), enc, &th), StateLabel::Hybrid);
        }
        // boundary-heavy inside -> skin
        assert_eq!(
            classify_state(&m(0.9, 0.0), Enclosure::Inside, &th),
            StateLabel::Skin
        );
        // nothing heavy -> extended
        assert_eq!(
            classify_state(&m(0.1, 0.1), Enclosure::Inside, &th),
            StateLabel::Extended
        );
    }

    #[test]
    fn gap_scan_hermitian_trivial_point() {
        // γ=0, t=−2: Hermitian chain with an open gap, no edge pair, real
        // spectrum
        let template = SshParams::strong_defect(-2.0, 0.0, 1.0, 10, 10);
        let rows = gap_scan(&template, -2.0, -2.0, 0.02).unwrap();
        assert_eq!(rows.len(), 1);
        let row = &rows[0];
        assert!(row.gap_width > 0.1, "gap_width = {}", row.gap_width);
        assert!(!row.edge_present);
        assert!(row.max_im < 1e-10);
    }

    #[test]
    fn critical_size_rejects_bad_grid() {
        let p = HnParams::strong_defect(
            50,
            Complex64::new(1.0, 0.0),
            Complex64::new(0.6, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.75, 0.0),
        );
        assert!(critical_size(&p, &[], &Thresholds::default()).is_err());
        assert!(critical_size(&p, &[30, 20], &Thresholds::default()).is_err());
    }
}
