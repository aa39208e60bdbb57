//! Point-gap diagnostics: determinant-phase winding numbers, inside/on/
//! outside enclosure against spectral loops, line-gap detection, and the
//! AII† time-reversal symmetry check.

use std::f64::consts::PI;

use ndarray::Array2;
use ndarray_linalg::{Determinant, Norm};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{BoundaryCondition, HamiltonianMatrix, LatticeSpec};
use crate::spectral::{SpectralLoop, Spectrum};

/// Default on-loop tolerance, relative to the loop diameter.
pub const EPS_LOOP_REL: f64 = 1e-3;
/// Default absolute degeneracy tolerance.
pub const EPS_DEG: f64 = 1e-8;
/// An on-loop OBC eigenvalue counts as in-gap only when it is spectrally
/// isolated: no PBC sample falls in the annulus (ε_loop, KAPPA_ISOLATION ×
/// diameter] around it. This separates isolated defect bands pinned at the
/// OBC energy from the dense, area-collapsed bulk segments of Hermitian
/// chains.
pub const KAPPA_ISOLATION: f64 = 0.02;

// ---------------------------------------------------------------------------
// plane geometry on sampled curves

fn cross(u: Complex64, v: Complex64) -> f64 {
    u.re * v.im - u.im * v.re
}

/// Max pairwise distance of a point cloud: monotone-chain convex hull, then
/// rotating calipers over the antipodal pairs. A smooth spectral curve keeps
/// nearly all of its samples on the hull, so a quadratic pass over hull
/// vertices would dominate everything else.
pub fn hull_diameter(points: &[Complex64]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup_by(|a, b| a == b);
    if pts.len() < 2 {
        return 0.0;
    }
    // strictly convex CCW hull (collinear points dropped)
    fn half(points: impl Iterator<Item = Complex64>) -> Vec<Complex64> {
        let mut h: Vec<Complex64> = Vec::new();
        for p in points {
            while h.len() >= 2 && cross(h[h.len() - 1] - h[h.len() - 2], p - h[h.len() - 2]) <= 0.0
            {
                h.pop();
            }
            h.push(p);
        }
        h
    }
    let mut hull = half(pts.iter().copied());
    hull.pop();
    let mut upper = half(pts.iter().rev().copied());
    upper.pop();
    hull.extend(upper);

    let m = hull.len();
    if m == 2 {
        return (hull[0] - hull[1]).norm();
    }
    let mut d = 0.0f64;
    let mut j = 1;
    for i in 0..m {
        let edge = hull[(i + 1) % m] - hull[i];
        // advance the antipodal point while it moves away from this edge;
        // the step bound guards against cycling on degenerate geometry
        let mut steps = 0;
        while steps < m && cross(edge, hull[(j + 1) % m] - hull[j]) > 0.0 {
            j = (j + 1) % m;
            steps += 1;
        }
        d = d.max((hull[i] - hull[j]).norm());
        d = d.max((hull[(i + 1) % m] - hull[j]).norm());
    }
    d
}

fn point_segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = ((z - a).re * ab.re + (z - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

/// Distance from `z` to a closed polyline.
pub fn path_distance(path: &[Complex64], z: Complex64) -> f64 {
    if path.is_empty() {
        return f64::INFINITY;
    }
    let mut d = f64::INFINITY;
    for i in 0..path.len() {
        let a = path[i];
        let b = path[(i + 1) % path.len()];
        d = d.min(point_segment_distance(z, a, b));
    }
    d
}

/// Signed winding number of a closed polyline around `z` (crossing rule).
pub fn path_winding(path: &[Complex64], z: Complex64) -> i64 {
    let mut w = 0i64;
    for i in 0..path.len() {
        let a = path[i];
        let b = path[(i + 1) % path.len()];
        if a.im <= z.im {
            if b.im > z.im && cross(b - a, z - a) > 0.0 {
                w += 1;
            }
        } else if b.im <= z.im && cross(b - a, z - a) < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Unsigned enclosed area of a closed polyline (shoelace).
pub fn path_area(path: &[Complex64]) -> f64 {
    let mut s = 0.0;
    for i in 0..path.len() {
        let a = path[i];
        let b = path[(i + 1) % path.len()];
        s += cross(a, b);
    }
    s.abs() / 2.0
}

// ---------------------------------------------------------------------------
// enclosure

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enclosure {
    Inside,
    On,
    Outside,
}

impl std::fmt::Display for Enclosure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Enclosure::Inside => "inside",
            Enclosure::On => "on",
            Enclosure::Outside => "outside",
        })
    }
}

/// Classify `e_ref` against the loop with an explicit relative on-loop
/// tolerance; also returns the total signed crossing count (sum of band-path
/// windings). `inside` means at least one band path winds around `e_ref`;
/// area-collapsed paths are legitimate curves for the on-test and wind zero.
pub fn enclosure_with(
    loop_: &SpectralLoop,
    e_ref: Complex64,
    eps_loop_rel: f64,
) -> (Enclosure, i64) {
    let eps = loop_.eps_loop(eps_loop_rel);
    let mut dist = f64::INFINITY;
    let mut total = 0i64;
    let mut any = false;
    for path in &loop_.band_paths {
        dist = dist.min(path_distance(path, e_ref));
        let w = path_winding(path, e_ref);
        total += w;
        any |= w != 0;
    }
    let status = if dist < eps {
        Enclosure::On
    } else if any {
        Enclosure::Inside
    } else {
        Enclosure::Outside
    };
    (status, total)
}

/// [`enclosure_with`] at the default ε_loop = 1e−3 × diameter.
pub fn enclosure(loop_: &SpectralLoop, e_ref: Complex64) -> (Enclosure, i64) {
    enclosure_with(loop_, e_ref, EPS_LOOP_REL)
}

// ---------------------------------------------------------------------------
// winding numbers

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winding {
    Integer(i64),
    /// E_ref within ε_loop of the sampled spectra: the phase is undefined.
    OnLoop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingResult {
    pub value: Winding,
    /// Accumulated argument of det(H(φ) − E_ref) over the full twist period,
    /// in radians.
    pub phase_trace: f64,
}

fn det_phase(spec: &LatticeSpec, e_ref: Complex64, phi: f64) -> Result<Option<f64>> {
    let mut h = spec.assemble(BoundaryCondition::Twisted(phi))?;
    for i in 0..h.nrows() {
        h[[i, i]] -= e_ref;
    }
    let dim = h.nrows();
    let (sign, _ln) = h.sln_det().map_err(|e| Error::Solver {
        dim,
        detail: e.to_string(),
    })?;
    if sign.norm() < 0.5 {
        return Ok(None); // singular: E_ref sits exactly on the spectrum
    }
    Ok(Some(sign.arg()))
}

fn wrap_to_pi(d: f64) -> f64 {
    let mut d = d % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d < -PI {
        d += 2.0 * PI;
    }
    d
}

/// Recursively bisect [φa, φb] until every per-step phase increment is
/// below π/2, accumulating the unwrapped change.
fn accumulate(
    spec: &LatticeSpec,
    e_ref: Complex64,
    phi_a: f64,
    p_a: f64,
    phi_b: f64,
    p_b: f64,
    depth: u32,
) -> Result<Option<f64>> {
    let d = wrap_to_pi(p_b - p_a);
    if d.abs() < PI / 2.0 {
        return Ok(Some(d));
    }
    if depth == 0 {
        return Err(Error::Resolution {
            phi: phi_a,
            detail: format!(
                "determinant phase step {:.3} >= pi/2 after maximum refinement",
                d.abs()
            ),
        });
    }
    let phi_m = 0.5 * (phi_a + phi_b);
    let Some(p_m) = det_phase(spec, e_ref, phi_m)? else {
        return Ok(None);
    };
    let left = accumulate(spec, e_ref, phi_a, p_a, phi_m, p_m, depth - 1)?;
    let right = accumulate(spec, e_ref, phi_m, p_m, phi_b, p_b, depth - 1)?;
    Ok(match (left, right) {
        (Some(l), Some(r)) => Some(l + r),
        _ => None,
    })
}

/// Spectral winding of det(H(φ) − E_ref·I) over a full twist period.
/// Returns `OnLoop` when E_ref is within ε_loop of the sampled twisted
/// spectra. The φ grid is refined locally until each phase step is < π/2.
pub fn winding_number(spec: &LatticeSpec, e_ref: Complex64, n_k: usize) -> Result<WindingResult> {
    if !spec.has_wrap() {
        return Err(Error::spec(
            "winding_number requires a spec with wrap bonds",
        ));
    }
    if !e_ref.re.is_finite() || !e_ref.im.is_finite() {
        return Err(Error::spec("non-finite reference energy"));
    }
    let n_k = n_k.max(16);
    let grid: Vec<f64> = (0..n_k).map(|j| 2.0 * PI * j as f64 / n_k as f64).collect();

    // sampled spectra for the on-loop test
    use ndarray_linalg::EigVals;
    let samples: Vec<Vec<Complex64>> = grid
        .par_iter()
        .map(|&phi| -> Result<Vec<Complex64>> {
            let h = spec.assemble(BoundaryCondition::Twisted(phi))?;
            let dim = h.nrows();
            Ok(h.eigvals()
                .map_err(|e| Error::Solver {
                    dim,
                    detail: e.to_string(),
                })?
                .to_vec())
        })
        .collect::<Result<_>>()?;
    let flat: Vec<Complex64> = samples.into_iter().flatten().collect();
    let eps = EPS_LOOP_REL * hull_diameter(&flat);
    let min_dist = flat
        .iter()
        .map(|&z| (z - e_ref).norm())
        .fold(f64::INFINITY, f64::min);
    if min_dist < eps {
        return Ok(WindingResult {
            value: Winding::OnLoop,
            phase_trace: 0.0,
        });
    }

    let phases: Vec<Option<f64>> = grid
        .par_iter()
        .map(|&phi| det_phase(spec, e_ref, phi))
        .collect::<Result<_>>()?;
    if phases.iter().any(|p| p.is_none()) {
        return Ok(WindingResult {
            value: Winding::OnLoop,
            phase_trace: 0.0,
        });
    }

    let mut total = 0.0;
    for j in 0..n_k {
        let phi_a = grid[j];
        let phi_b = if j + 1 == n_k { 2.0 * PI } else { grid[j + 1] };
        let p_a = phases[j].unwrap();
        let p_b = phases[(j + 1) % n_k].unwrap();
        match accumulate(spec, e_ref, phi_a, p_a, phi_b, p_b, 24)? {
            Some(d) => total += d,
            None => {
                return Ok(WindingResult {
                    value: Winding::OnLoop,
                    phase_trace: 0.0,
                })
            }
        }
    }
    let value = (total / (2.0 * PI)).round() as i64;
    if (total - 2.0 * PI * value as f64).abs() >= 0.01 {
        return Err(Error::Resolution {
            phi: 0.0,
            detail: format!(
                "accumulated phase {total:.6} is not close to an integer multiple of 2pi"
            ),
        });
    }
    Ok(WindingResult {
        value: Winding::Integer(value),
        phase_trace: total,
    })
}

// ---------------------------------------------------------------------------
// line gaps

#[derive(Debug, Clone)]
pub struct InGapState {
    /// Index into the OBC spectrum.
    pub index: usize,
    pub energy: Complex64,
    pub enclosure: Enclosure,
}

#[derive(Debug, Clone)]
pub struct LineGapReport {
    /// OBC eigenvalues in the line gap: every `outside` state, plus `on`
    /// states that are spectrally isolated (see [`KAPPA_ISOLATION`]).
    pub in_gap: Vec<InGapState>,
    /// Maximal groups of in-gap energies equal within ε_deg, as indices
    /// into `in_gap`.
    pub degenerate_groups: Vec<Vec<usize>>,
}

/// [`line_gap_states_with`] at the default tolerances.
pub fn line_gap_states(obc: &Spectrum, loop_: &SpectralLoop) -> LineGapReport {
    line_gap_states_with(obc, loop_, EPS_LOOP_REL, EPS_DEG)
}

pub fn line_gap_states_with(
    obc: &Spectrum,
    loop_: &SpectralLoop,
    eps_loop_rel: f64,
    eps_deg: f64,
) -> LineGapReport {
    let flat: Vec<Complex64> = loop_.samples().collect();
    let diameter = loop_.diameter();
    let eps = eps_loop_rel * diameter;
    let annulus = KAPPA_ISOLATION * diameter;

    let mut in_gap = Vec::new();
    for (index, &energy) in obc.eigenvalues.iter().enumerate() {
        let (status, _) = enclosure_with(loop_, energy, eps_loop_rel);
        let keep = match status {
            Enclosure::Inside => false,
            Enclosure::Outside => true,
            Enclosure::On => !flat.iter().any(|&z| {
                let d = (z - energy).norm();
                d > eps && d <= annulus
            }),
        };
        if keep {
            in_gap.push(InGapState {
                index,
                energy,
                enclosure: status,
            });
        }
    }

    // chain-group sorted energies at eps_deg (obc eigenvalues are already
    // (Re, Im)-sorted, hence so is in_gap)
    let mut degenerate_groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..in_gap.len() {
        let joined = degenerate_groups.last_mut().is_some_and(|g| {
            (in_gap[*g.last().unwrap()].energy - in_gap[i].energy).norm() <= eps_deg
        });
        if joined {
            degenerate_groups.last_mut().unwrap().push(i);
        } else {
            degenerate_groups.push(vec![i]);
        }
    }
    LineGapReport {
        in_gap,
        degenerate_groups,
    }
}

// ---------------------------------------------------------------------------
// symmetry

/// Block-diagonal I_{n_cells} ⊗ σ_y.
pub fn time_reversal_sigma_y(n_cells: usize) -> Array2<Complex64> {
    let n = 2 * n_cells;
    let mut t = Array2::zeros((n, n));
    for c in 0..n_cells {
        t[[2 * c, 2 * c + 1]] = Complex64::new(0.0, -1.0);
        t[[2 * c + 1, 2 * c]] = Complex64::new(0.0, 1.0);
    }
    t
}

/// Frobenius deviation ‖T·Hᵀ·T^{−1} − H‖_F of the AII† relation
/// T·Hᵀ·T^{−1} = H. Reports the measured value; asserts nothing about it.
pub fn symmetry_defect(h: &HamiltonianMatrix, t: &Array2<Complex64>) -> Result<f64> {
    let n = h.nrows();
    if h.ncols() != n || t.nrows() != n || t.ncols() != n {
        return Err(Error::spec(format!(
            "dimension mismatch: H is {}x{}, T is {}x{}",
            h.nrows(),
            h.ncols(),
            t.nrows(),
            t.ncols()
        )));
    }
    let t_dag = t.t().mapv(|z| z.conj());
    let unitary_defect = (t.dot(&t_dag) - Array2::<Complex64>::eye(n)).norm_l2();
    if unitary_defect > 1e-12 * (n as f64).sqrt().max(1.0) {
        return Err(Error::spec(format!(
            "T is not unitary (deviation {unitary_defect:.3e})"
        )));
    }
    // T unitary, so T^{-1} = T†
    let lhs = t.dot(&h.t().to_owned()).dot(&t_dag);
    Ok((lhs - h).norm_l2())
}
