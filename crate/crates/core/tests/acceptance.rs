//! End-to-end acceptance checks against the published reference results:
//! quoted defect/hybrid eigenvalues, point-gap winding numbers, spectral-loop
//! enclosure, hybrid suppression with system size, the SSH gap scan and
//! γ/p transition sequences, and a numerical-hygiene property suite.
//!
//! Every test prints a single `pass`/`FAIL` summary line (visible with
//! `--nocapture`); failures also list the offending checks.

use std::sync::LazyLock;

use nhse_core::builders::{apply_defect_strength, build_hn, build_ssh, HnParams, SshParams};
use nhse_core::classify::{
    classify_spectrum, critical_size, gap_scan, localization_metrics, StateLabel, StateRecord,
    Thresholds,
};
use nhse_core::spectral::{
    eigensolve, obc_spectrum, spectral_loop, spectral_radius_estimate, SpectralLoop, Spectrum,
};
use nhse_core::topology::{line_gap_states, path_area, winding_number, Enclosure, Winding};
use nhse_core::{BoundaryCondition, Complex64, LatticeSpec};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Collects check outcomes so one summary line is printed per criterion.
struct Criterion {
    name: &'static str,
    failures: Vec<String>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Criterion {
            name,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("{}: pass", self.name);
        } else {
            println!("{}: FAIL ({} checks)", self.name, self.failures.len());
            for f in &self.failures {
                println!("    {f}");
            }
            panic!("{} failed", self.name);
        }
    }
}

/// A fully diagonalized and classified defect chain.
struct Case {
    spec: LatticeSpec,
    obc: Spectrum,
    loop_: SpectralLoop,
    records: Vec<StateRecord>,
}

fn hn_case(n_sites: usize, n_k: usize) -> Case {
    let params =
        HnParams::strong_defect(n_sites, c(1.0, 0.0), c(0.6, 0.0), c(1.0, 0.0), c(0.75, 0.0));
    let spec = build_hn(&params, true).unwrap();
    let obc = obc_spectrum(&spec).unwrap();
    let loop_ = spectral_loop(&spec, n_k).unwrap();
    let records =
        classify_spectrum(&obc, &loop_, params.defect_site - 1, &Thresholds::default()).unwrap();
    Case {
        spec,
        obc,
        loop_,
        records,
    }
}

fn ssh_gamma_case(gamma: f64, n_k: usize) -> (LatticeSpec, Spectrum, SpectralLoop) {
    let params = SshParams::strong_defect(-1.0, gamma, 1.0, 25, 25);
    let spec = build_ssh(&params, true).unwrap();
    let obc = obc_spectrum(&spec).unwrap();
    let loop_ = spectral_loop(&spec, n_k).unwrap();
    (spec, obc, loop_)
}

fn ssh_p_spec(p: f64) -> LatticeSpec {
    let mut params = SshParams::strong_defect(-1.0, 0.4, 1.0, 25, 25);
    params.p = p;
    build_ssh(&apply_defect_strength(&params).unwrap(), true).unwrap()
}

// N = 50 defect chain of the reference figure: t1 = 1, t2 = 0.6, t3 = 1,
// t4 = 0.75, strong defect at N_d = 25.
static FIG2: LazyLock<Case> = LazyLock::new(|| hn_case(50, 256));
// Same couplings at N = 120 and N = 300.
static FIG4A: LazyLock<Case> = LazyLock::new(|| hn_case(120, 128));
static FIG4C: LazyLock<Case> = LazyLock::new(|| hn_case(300, 128));

#[test]
fn criterion_01_quoted_eigenvalues() {
    let mut cr = Criterion::new("acceptance 01 quoted eigenvalues");
    for (target, tol, what) in [
        (c(-1.4978, 0.25), 1e-3, "skin-branch eigenvalue E_A"),
        (c(-0.6174, 0.0396), 1e-3, "hybrid eigenvalue E_B"),
        (c(0.0, 0.0), 1e-8, "zero-energy defect state"),
    ] {
        let obc = &FIG2.obc;
        let found = obc.eigenvalues[obc.nearest(target)];
        let dist = (found - target).norm();
        cr.check(
            dist <= tol,
            format!("{what}: nearest eigenvalue {found} is {dist:.2e} from {target}"),
        );
    }
    cr.finish();
}

#[test]
fn criterion_02_winding_minus_two() {
    let mut cr = Criterion::new("acceptance 02 winding number");
    let params = HnParams::uniform(50, c(1.0, 0.0), c(0.6, 0.0), c(1.0, 0.0), c(0.75, 0.0));
    let ring = build_hn(&params, false).unwrap();
    let inner = winding_number(&ring, c(0.0, 0.0), 128).unwrap();
    cr.check(
        inner.value == Winding::Integer(-2),
        format!("E_ref = 0 inside the small loop: got {:?}", inner.value),
    );
    let outer = winding_number(&ring, c(5.0, 0.0), 128).unwrap();
    cr.check(
        outer.value == Winding::Integer(0),
        format!("E_ref = 5 far outside: got {:?}", outer.value),
    );
    cr.finish();
}

#[test]
fn criterion_03_point_gap_inclusion() {
    let mut cr = Criterion::new("acceptance 03 point-gap inclusion");
    for (name, case) in [("N=50", &FIG2), ("N=120", &FIG4A), ("N=300", &FIG4C)] {
        let outside: Vec<_> = case
            .records
            .iter()
            .filter(|r| r.enclosure == Enclosure::Outside)
            .collect();
        cr.check(
            outside.is_empty(),
            format!(
                "{name}: {} of {} eigenvalues fall outside the loop",
                outside.len(),
                case.obc.len()
            ),
        );
        cr.check(
            case.records.len() == case.obc.len(),
            format!(
                "{name}: classified {} of {} states",
                case.records.len(),
                case.obc.len()
            ),
        );
    }
    cr.finish();
}

#[test]
fn criterion_04_loop_collapse() {
    let mut cr = Criterion::new("acceptance 04 loop collapse");
    let collapsed = FIG2
        .loop_
        .band_paths
        .iter()
        .any(|path| path_area(path) < 1e-6 && path.iter().all(|e| e.im.abs() < 1e-6));
    cr.check(
        collapsed,
        "no band path collapsed onto the real axis (area and max |Im| < 1e-6)",
    );
    cr.finish();
}

#[test]
fn criterion_05_hybrid_suppression() {
    let mut cr = Criterion::new("acceptance 05 hybrid suppression");
    let hybrids = |case: &Case| {
        case.records
            .iter()
            .filter(|r| r.label == StateLabel::Hybrid)
            .count()
    };
    let n50 = hybrids(&FIG2);
    cr.check(
        n50 > 0,
        format!("N=50 should host hybrid states, found {n50}"),
    );
    let n300 = hybrids(&FIG4C);
    cr.check(
        n300 == 0,
        format!("N=300 should have no hybrid states, found {n300}"),
    );
    let defects: Vec<_> = FIG4C
        .records
        .iter()
        .filter(|r| r.label == StateLabel::Defect)
        .collect();
    cr.check(
        defects.len() == 1,
        format!(
            "N=300 should keep exactly one defect state, found {}",
            defects.len()
        ),
    );
    if let [only] = defects.as_slice() {
        cr.check(
            only.energy.norm() <= 1e-8,
            format!(
                "surviving N=300 defect state sits at {} instead of 0",
                only.energy
            ),
        );
    }
    cr.finish();
}

#[test]
fn criterion_06_critical_size_monotone() {
    let mut cr = Criterion::new("acceptance 06 critical size monotone");
    // The 40..240 window brackets the hybrid-suppression crossover for every
    // t4 here; below N = 40 single marginal states flicker across the weight
    // thresholds, and for t4 <= 0.4 a different finite-size degeneracy
    // (defect-side and boundary skin states mixing through the bridging NNN
    // bond) reappears beyond N ~ 250.
    let sizes: Vec<usize> = (40..=240).step_by(10).collect();
    let th = Thresholds::default();
    let mut previous: Option<usize> = None;
    for t4 in [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
        let template =
            HnParams::strong_defect(50, c(1.0, 0.0), c(0.6, 0.0), c(1.0, 0.0), c(t4, 0.0));
        match critical_size(&template, &sizes, &th).unwrap() {
            None => cr.check(
                false,
                format!("t4 = {t4}: hybrids persist to the top of the grid"),
            ),
            Some(n_c) => {
                if let Some(prev) = previous {
                    cr.check(
                        n_c >= prev,
                        format!("t4 = {t4}: N_c dropped from {prev} to {n_c}"),
                    );
                }
                previous = Some(n_c);
            }
        }
    }
    cr.finish();
}

#[test]
fn criterion_07_ssh_gap_scan() {
    let mut cr = Criterion::new("acceptance 07 SSH gap scan");
    // 40-cell defect-free chain; the edge-pair degeneracy sharpens
    // exponentially with length, so the detected phase boundaries sit within
    // one or two scan steps of the bulk transition points.
    let template = SshParams::strong_defect(-2.0, 0.2, 1.0, 20, 20);
    let rows = gap_scan(&template, -2.0, 0.0, 0.02).unwrap();
    let edge_ts: Vec<f64> = rows
        .iter()
        .filter(|r| r.edge_present)
        .map(|r| r.t)
        .collect();
    cr.check(
        !edge_ts.is_empty(),
        "no edge states detected anywhere in the scan",
    );
    if let (Some(&first), Some(&last)) = (edge_ts.first(), edge_ts.last()) {
        cr.check(
            (first + 1.4).abs() <= 0.05,
            format!("lower gap closure detected at t = {first:.2}, expected -1.4 +/- 0.05"),
        );
        cr.check(
            (last + 0.6).abs() <= 0.05,
            format!("upper gap closure detected at t = {last:.2}, expected -0.6 +/- 0.05"),
        );
    }
    let complex_bulk = rows
        .iter()
        .filter(|r| (-1.2..=-0.8).contains(&r.t))
        .any(|r| r.max_im > 1e-6);
    cr.check(complex_bulk, "spectrum stays real across t in [-1.2, -0.8]");
    for row in rows.iter().filter(|r| r.edge_present) {
        for e in &row.edge_energies {
            cr.check(
                e.im.abs() <= 1e-8,
                format!("edge energy {e} at t = {:.2} is not real", row.t),
            );
        }
    }
    cr.finish();
}

#[test]
fn criterion_08_gamma_transition() {
    let mut cr = Criterion::new("acceptance 08 gamma transition");

    // gamma = 0.4: five eigenvalues in the line gap -- one zero mode, one
    // conjugate pair, one degenerate edge pair.
    let (_, obc, loop_) = ssh_gamma_case(0.4, 256);
    let report = line_gap_states(&obc, &loop_);
    cr.check(
        report.in_gap.len() == 5,
        format!(
            "gamma=0.4: expected 5 in-gap eigenvalues, found {}",
            report.in_gap.len()
        ),
    );
    cr.check(
        report.in_gap.iter().any(|s| s.energy.norm() <= 1e-8),
        "gamma=0.4: zero mode missing from the line gap",
    );
    let conjugate_pair = report.in_gap.iter().any(|s| {
        s.energy.im > 0.1
            && report
                .in_gap
                .iter()
                .any(|o| (o.energy - s.energy.conj()).norm() <= 1e-6)
    });
    cr.check(conjugate_pair, "gamma=0.4: conjugate in-gap pair missing");
    cr.check(
        report.degenerate_groups.iter().any(|g| g.len() == 2),
        "gamma=0.4: degenerate edge pair missing",
    );

    // gamma = 0.49: the edge pair has been swallowed by the loop, leaving
    // only the zero mode in the gap; the (now weakly split) pair survives as
    // boundary-localized states strictly inside.
    let (_, obc, loop_) = ssh_gamma_case(0.49, 256);
    let report = line_gap_states(&obc, &loop_);
    cr.check(
        report.in_gap.len() == 1 && report.in_gap[0].energy.norm() <= 1e-8,
        format!(
            "gamma=0.49: expected only the zero mode in the gap, found {} states",
            report.in_gap.len()
        ),
    );
    let i = obc.nearest(c(0.49, 0.0));
    let e_i = obc.eigenvalues[i];
    let (j, e_j) = obc
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .min_by(|a, b| (a.1 - e_i).norm().total_cmp(&(b.1 - e_i).norm()))
        .unwrap();
    cr.check(
        (e_j - e_i.conj()).norm() <= 1e-4,
        format!("gamma=0.49: states {e_i} and {e_j} are not a near-degenerate conjugate pair"),
    );
    for (k, e) in [(i, e_i), (j, e_j)] {
        let m = localization_metrics(&obc.eigenvectors[k], 50, 5).unwrap();
        cr.check(
            m.w_right > 0.9,
            format!(
                "gamma=0.49: pair member {e} is not boundary localized (w_right = {:.3})",
                m.w_right
            ),
        );
        let (enc, _) = nhse_core::topology::enclosure(&loop_, e);
        cr.check(
            enc == Enclosure::Inside,
            format!("gamma=0.49: pair member {e} is {enc:?}, expected Inside"),
        );
    }

    // gamma = 0.6: only E = 0 remains outside or on the loop.
    let (_, obc, loop_) = ssh_gamma_case(0.6, 256);
    let report = line_gap_states(&obc, &loop_);
    cr.check(
        report.in_gap.len() == 1 && report.in_gap[0].energy.norm() <= 1e-8,
        format!(
            "gamma=0.6: expected only the zero mode, found {} in-gap states",
            report.in_gap.len()
        ),
    );
    cr.check(
        report
            .in_gap
            .iter()
            .all(|s| s.enclosure != Enclosure::Inside),
        "gamma=0.6: zero mode reported as enclosed",
    );
    cr.finish();
}

/// Defect-localized eigenvalues (w_defect above the default threshold) of a
/// 101-site SSH defect chain; the defect sits at 0-based site 50.
fn defect_energies(obc: &Spectrum) -> Vec<(Complex64, f64)> {
    (0..obc.len())
        .filter_map(|i| {
            let m = localization_metrics(&obc.eigenvectors[i], 50, 5).unwrap();
            (m.w_defect > 0.2).then_some((obc.eigenvalues[i], m.w_defect))
        })
        .collect()
}

#[test]
fn criterion_09_defect_strength_transition() {
    let mut cr = Criterion::new("acceptance 09 defect strength transition");
    // The two defect-bound families never cross zero energy: the trivial
    // state stays at Re E < 0 until it delocalizes, the symmetry-protected
    // pair (and its real descendant beyond the exceptional point) at Re E > 0.
    let trivial = |ds: &[(Complex64, f64)]| ds.iter().any(|(e, _)| e.re < -0.05);
    let nontrivial = |ds: &[(Complex64, f64)]| ds.iter().any(|(e, _)| e.re > 0.05);

    let ds03 = defect_energies(&obc_spectrum(&ssh_p_spec(0.3)).unwrap());
    cr.check(trivial(&ds03), "p=0.3: trivial defect state missing");
    let pair = ds03
        .iter()
        .any(|(e, _)| e.im > 0.1 && ds03.iter().any(|(o, _)| (o - e.conj()).norm() <= 1e-6));
    cr.check(pair, "p=0.3: nontrivial conjugate defect pair missing");

    let ds06 = defect_energies(&obc_spectrum(&ssh_p_spec(0.6)).unwrap());
    cr.check(trivial(&ds06), "p=0.6: trivial defect state missing");
    cr.check(nontrivial(&ds06), "p=0.6: nontrivial defect state missing");
    for (e, _) in &ds06 {
        cr.check(
            e.im.abs() <= 1e-8,
            format!("p=0.6: defect energy {e} is not real"),
        );
    }

    let ds09 = defect_energies(&obc_spectrum(&ssh_p_spec(0.9)).unwrap());
    cr.check(
        !trivial(&ds09),
        "p=0.9: trivial defect state should have delocalized",
    );
    cr.check(nontrivial(&ds09), "p=0.9: nontrivial defect state missing");
    cr.check(
        ds09.iter().all(|(e, _)| e.im.abs() <= 1e-8),
        "p=0.9: nontrivial defect energy is not real",
    );

    // The conjugate pair coalesces at an exceptional point on the way to
    // p = 0.6: its imaginary part shrinks continuously and vanishes between
    // two neighboring grid points.
    let mut previous_im: Option<f64> = None;
    let mut coalesced = false;
    for step in 0..=30 {
        let p = 0.30 + 0.01 * step as f64;
        let obc = obc_spectrum(&ssh_p_spec(p)).unwrap();
        let pair_im = defect_energies(&obc)
            .iter()
            .filter(|(e, wd)| (0.2..0.8).contains(&e.re) && *wd > 0.25)
            .map(|(e, _)| e.im.abs())
            .fold(0.0f64, f64::max);
        if let Some(prev) = previous_im {
            if prev > 1e-8 && pair_im <= 1e-8 && prev < 0.05 {
                coalesced = true;
            }
        }
        previous_im = Some(pair_im);
    }
    cr.check(
        coalesced,
        "no continuous coalescence of the conjugate pair found for p <= 0.6",
    );
    cr.finish();
}

#[test]
fn criterion_10_numerical_hygiene() {
    let mut cr = Criterion::new("acceptance 10 numerical hygiene");

    // residual and trace-identity bounds on every reference configuration
    let mut configs: Vec<(String, LatticeSpec)> = vec![
        ("HN N=50".into(), FIG2.spec.clone()),
        ("HN N=120".into(), FIG4A.spec.clone()),
        ("HN N=300".into(), FIG4C.spec.clone()),
    ];
    for gamma in [0.4, 0.49, 0.6] {
        let params = SshParams::strong_defect(-1.0, gamma, 1.0, 25, 25);
        configs.push((
            format!("SSH gamma={gamma}"),
            build_ssh(&params, true).unwrap(),
        ));
    }
    for p in [0.3, 0.6, 0.9] {
        configs.push((format!("SSH p={p}"), ssh_p_spec(p)));
    }
    for (name, spec) in &configs {
        let h = spec.assemble(BoundaryCondition::Open).unwrap();
        let sp = eigensolve(&h).unwrap();
        let bound = 1e-10 * spectral_radius_estimate(&h).max(1.0);
        let worst = sp.residuals.iter().cloned().fold(0.0f64, f64::max);
        cr.check(
            worst <= bound,
            format!("{name}: residual {worst:.2e} exceeds {bound:.2e}"),
        );
        let trace: Complex64 = (0..h.nrows()).map(|i| h[[i, i]]).sum();
        let sum: Complex64 = sp.eigenvalues.iter().sum();
        let drift = (sum - trace).norm();
        let tol = 1e-9 * h.nrows() as f64;
        cr.check(
            drift <= tol,
            format!("{name}: trace identity off by {drift:.2e}"),
        );
    }

    // reciprocal limit: real spectrum, zero-area loops
    let params = HnParams::uniform(40, c(0.8, 0.0), c(0.8, 0.0), c(0.3, 0.0), c(0.3, 0.0));
    let ring = build_hn(&params, false).unwrap();
    let obc = obc_spectrum(&ring).unwrap();
    let max_im = obc
        .eigenvalues
        .iter()
        .map(|e| e.im.abs())
        .fold(0.0f64, f64::max);
    cr.check(
        max_im <= 1e-10,
        format!("reciprocal chain has complex eigenvalues (|Im| up to {max_im:.2e})"),
    );
    let loop_ = spectral_loop(&ring, 64).unwrap();
    for path in &loop_.band_paths {
        let area = path_area(path);
        cr.check(
            area <= 1e-6,
            format!("reciprocal band path encloses area {area:.2e}"),
        );
    }

    // twist-union identity: the supercell swept over an n_k twist grid must
    // reproduce the spectrum of the n_k-fold tiled ring
    let small = build_hn(
        &HnParams::uniform(4, c(1.0, 0.0), c(0.6, 0.0), c(1.0, 0.0), c(0.75, 0.0)),
        false,
    )
    .unwrap();
    let union: Vec<Complex64> = spectral_loop(&small, 64).unwrap().samples().collect();
    let big = small.tile_ring(64).unwrap();
    let ring_ev = eigensolve(&big.assemble(BoundaryCondition::PERIODIC).unwrap())
        .unwrap()
        .eigenvalues;
    cr.check(
        union.len() == ring_ev.len(),
        "twist union and tiled ring differ in size",
    );
    let mismatch = multiset_mismatch(&union, &ring_ev);
    cr.check(
        mismatch <= 1e-8,
        format!("twist union deviates from the tiled-ring spectrum by {mismatch:.2e}"),
    );
    cr.finish();
}

/// Largest nearest-match distance under greedy pairing of two equally long
/// eigenvalue multisets.
fn multiset_mismatch(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for &x in a {
        let mut best = f64::INFINITY;
        let mut best_j = 0;
        for (j, &y) in b.iter().enumerate() {
            if !used[j] {
                let d = (y - x).norm();
                if d < best {
                    best = d;
                    best_j = j;
                }
            }
        }
        used[best_j] = true;
        worst = worst.max(best);
    }
    worst
}
