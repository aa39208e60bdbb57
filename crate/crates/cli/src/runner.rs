//! Subcommand implementations: build the configured model, run the spectral
//! pipeline, and persist CSV/SVG artifacts. CSV floats use the shortest
//! round-trip decimal representation, so identical configs give
//! byte-identical files regardless of worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nhse_core::classify::{classify_spectrum, critical_size, gap_scan, StateRecord};
use nhse_core::spectral::{eigensolve, obc_spectrum, spectral_loop, SpectralLoop, Spectrum};
use nhse_core::topology::{
    line_gap_states_with, symmetry_defect, time_reversal_sigma_y, winding_number, Winding,
};
use nhse_core::{BoundaryCondition, Complex64};

use crate::config::{BcKind, ModelKind, OutputKind, RunConfig};
use crate::svg;
use crate::{CliError, Result};

/// Collects written files so that a failed run leaves no partial outputs.
struct Tracker<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl<'a> Tracker<'a> {
    fn new(dir: &'a Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Tracker {
            dir,
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }

    fn cleanup(&self) {
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
    }
}

fn tracked<F>(out: &Path, f: F) -> Result<Vec<PathBuf>>
where
    F: FnOnce(&mut Tracker) -> Result<()>,
{
    let mut tracker = Tracker::new(out)?;
    match f(&mut tracker) {
        Ok(()) => Ok(tracker.files),
        Err(e) => {
            tracker.cleanup();
            Err(e)
        }
    }
}

/// Shortest round-trip decimal formatting.
fn num(v: f64) -> String {
    format!("{v}")
}

fn spectrum_csv(s: &Spectrum) -> String {
    let mut out = String::from("index,re_energy,im_energy,residual\n");
    for i in 0..s.len() {
        let e = s.eigenvalues[i];
        let _ = writeln!(
            out,
            "{i},{},{},{}",
            num(e.re),
            num(e.im),
            num(s.residuals[i])
        );
    }
    out
}

fn states_csv(records: &[StateRecord]) -> String {
    let mut out = String::from(
        "index,re_energy,im_energy,label,enclosure,ipr,com,w_left,w_right,w_defect,residual\n",
    );
    for r in records {
        let m = &r.metrics;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.index,
            num(r.energy.re),
            num(r.energy.im),
            r.label,
            r.enclosure,
            num(m.ipr),
            num(m.com),
            num(m.w_left),
            num(m.w_right),
            num(m.w_defect),
            num(r.residual)
        );
    }
    out
}

fn loop_csv(loop_: &SpectralLoop) -> String {
    let mut out = String::from("band,point,re_energy,im_energy\n");
    for (b, path) in loop_.band_paths.iter().enumerate() {
        for (i, z) in path.iter().enumerate() {
            let _ = writeln!(out, "{b},{i},{},{}", num(z.re), num(z.im));
        }
    }
    out
}

pub fn cmd_spectrum(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let (spec, _) = cfg.build_spec()?;
    let bc = match cfg.bc {
        BcKind::Obc => BoundaryCondition::Open,
        BcKind::Pbc => BoundaryCondition::PERIODIC,
    };
    let h = spec.assemble(bc)?;
    let s = eigensolve(&h)?;
    tracked(out, |t| {
        t.write("spectrum.csv", &spectrum_csv(&s))?;
        if cfg.outputs.contains(&OutputKind::SvgSpectrum) {
            let points: Vec<(Complex64, String)> =
                s.eigenvalues.iter().map(|&e| (e, String::new())).collect();
            t.write("spectrum.svg", &svg::spectrum_plot(&[], &points))?;
        }
        println!("spectrum: {} eigenvalues", s.len());
        Ok(())
    })
}

pub fn cmd_loop(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let (spec, _) = cfg.build_spec()?;
    let loop_ = spectral_loop(&spec, cfg.n_k)?;
    tracked(out, |t| {
        t.write("loop.csv", &loop_csv(&loop_))?;
        println!(
            "loop: {} band paths over {} twist samples",
            loop_.band_paths.len(),
            loop_.twist_samples.len()
        );
        Ok(())
    })
}

pub fn cmd_winding(cfg: &RunConfig, out: &Path, re: f64, im: f64) -> Result<Vec<PathBuf>> {
    let (spec, _) = cfg.build_spec()?;
    let e_ref = Complex64::new(re, im);
    let r = winding_number(&spec, e_ref, cfg.n_k)?;
    let value = match r.value {
        Winding::Integer(v) => v.to_string(),
        Winding::OnLoop => "on_loop".to_string(),
    };
    tracked(out, |t| {
        let mut csv = String::from("re_ref,im_ref,value,phase_trace\n");
        let _ = writeln!(
            csv,
            "{},{},{value},{}",
            num(re),
            num(im),
            num(r.phase_trace)
        );
        t.write("winding.csv", &csv)?;
        println!(
            "winding({}, {}) = {value} (phase trace {})",
            num(re),
            num(im),
            num(r.phase_trace)
        );
        Ok(())
    })
}

struct PointResult {
    obc: Spectrum,
    loop_: SpectralLoop,
    records: Vec<StateRecord>,
    in_gap_count: usize,
}

fn run_point(cfg: &RunConfig) -> Result<PointResult> {
    let (spec, defect_site) = cfg.build_spec()?;
    let th = cfg.core_thresholds();
    let obc = obc_spectrum(&spec)?;
    let loop_ = spectral_loop(&spec, cfg.n_k)?;
    let records = classify_spectrum(&obc, &loop_, defect_site, &th)?;
    let report = line_gap_states_with(&obc, &loop_, th.eps_loop_rel, th.eps_deg);
    Ok(PointResult {
        obc,
        loop_,
        records,
        in_gap_count: report.in_gap.len(),
    })
}

pub fn cmd_classify(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let point = run_point(cfg)?;
    tracked(out, |t| {
        for kind in &cfg.outputs {
            match kind {
                OutputKind::SpectrumCsv => t.write("spectrum.csv", &spectrum_csv(&point.obc))?,
                OutputKind::StatesCsv => t.write("states.csv", &states_csv(&point.records))?,
                OutputKind::LoopCsv => t.write("loop.csv", &loop_csv(&point.loop_))?,
                OutputKind::SvgSpectrum => {
                    let points: Vec<(Complex64, String)> = point
                        .records
                        .iter()
                        .map(|r| (r.energy, r.label.to_string()))
                        .collect();
                    t.write(
                        "spectrum.svg",
                        &svg::spectrum_plot(&point.loop_.band_paths, &points),
                    )?;
                }
                OutputKind::SvgProfiles => {
                    let profiles: Vec<(String, Vec<f64>)> = point
                        .records
                        .iter()
                        .filter(|r| {
                            matches!(
                                r.label,
                                nhse_core::classify::StateLabel::Defect
                                    | nhse_core::classify::StateLabel::Hybrid
                                    | nhse_core::classify::StateLabel::Edge
                            )
                        })
                        .take(8)
                        .map(|r| {
                            let profile = point.obc.eigenvectors[r.index]
                                .iter()
                                .map(|z| z.norm())
                                .collect();
                            (r.label.to_string(), profile)
                        })
                        .collect();
                    t.write("profiles.svg", &svg::profiles_plot(&profiles))?;
                }
            }
        }
        println!(
            "classify: {} states, {} in gap",
            point.records.len(),
            point.in_gap_count
        );
        Ok(())
    })
}

fn label_counts(records: &[StateRecord]) -> [usize; 5] {
    use nhse_core::classify::StateLabel::*;
    let mut c = [0usize; 5];
    for r in records {
        let i = match r.label {
            Skin => 0,
            Defect => 1,
            Hybrid => 2,
            Edge => 3,
            Extended => 4,
        };
        c[i] += 1;
    }
    c
}

pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let points: Vec<(String, RunConfig)> = match &cfg.sweep {
        None => vec![(String::new(), cfg.clone())],
        Some(sweep) => sweep
            .values
            .iter()
            .map(|&v| -> Result<(String, RunConfig)> {
                let mut c = cfg.clone();
                c.apply_sweep_value(&sweep.parameter, v)?;
                Ok((num(v), c))
            })
            .collect::<Result<_>>()?,
    };
    tracked(out, |t| {
        let mut csv = String::from(
            "value,n_skin,n_defect,n_hybrid,n_edge,n_extended,n_in_gap,n_c,min_residual,max_residual\n",
        );
        for (value, point_cfg) in &points {
            let point = run_point(point_cfg)?;
            let counts = label_counts(&point.records);
            let min_r = point
                .obc
                .residuals
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            let max_r = point.obc.residuals.iter().copied().fold(0.0, f64::max);
            let _ = writeln!(
                csv,
                "{value},{},{},{},{},{},{},,{},{}",
                counts[0],
                counts[1],
                counts[2],
                counts[3],
                counts[4],
                point.in_gap_count,
                num(min_r),
                num(max_r)
            );
        }
        t.write("sweep.csv", &csv)?;
        println!("sweep: {} rows", points.len());
        Ok(())
    })
}

pub fn cmd_critical_size(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    if cfg.model != ModelKind::Hn {
        return Err(CliError::Config(
            "critical-size requires model = \"hn\"".into(),
        ));
    }
    let cs = cfg.critical_size.unwrap_or_default();
    if cs.n_step == 0 || cs.n_max < cs.n_min {
        return Err(CliError::Config(
            "critical_size needs n_min <= n_max and a positive n_step".into(),
        ));
    }
    let sizes: Vec<usize> = (cs.n_min..=cs.n_max).step_by(cs.n_step).collect();
    let th = cfg.core_thresholds();
    let points: Vec<(String, RunConfig)> = match &cfg.sweep {
        None => vec![(String::new(), cfg.clone())],
        Some(sweep) => sweep
            .values
            .iter()
            .map(|&v| -> Result<(String, RunConfig)> {
                let mut c = cfg.clone();
                c.apply_sweep_value(&sweep.parameter, v)?;
                Ok((num(v), c))
            })
            .collect::<Result<_>>()?,
    };
    tracked(out, |t| {
        let mut csv = String::from("value,n_c\n");
        for (value, point_cfg) in &points {
            let template = point_cfg.hn_params()?;
            let n_c = critical_size(&template, &sizes, &th)?;
            let n_c_str = n_c.map(|n| n.to_string()).unwrap_or_default();
            let _ = writeln!(csv, "{value},{n_c_str}");
            println!(
                "critical-size{}{}: N_c = {}",
                if value.is_empty() { "" } else { " at " },
                value,
                if n_c_str.is_empty() {
                    "not found"
                } else {
                    &n_c_str
                }
            );
        }
        t.write("critical_size.csv", &csv)?;
        Ok(())
    })
}

pub fn cmd_gap_scan(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    if cfg.model != ModelKind::Ssh {
        return Err(CliError::Config("gap-scan requires model = \"ssh\"".into()));
    }
    let template = cfg.ssh_params()?;
    let g = cfg.gap_scan.unwrap_or_default();
    let rows = gap_scan(&template, g.t_min, g.t_max, g.step)?;
    tracked(out, |t| {
        let mut csv = String::from("t,gap_width,max_im,edge_present,edge_re,edge_im\n");
        for row in &rows {
            let (er, ei) = row
                .edge_energies
                .first()
                .map(|e| (num(e.re), num(e.im)))
                .unwrap_or_default();
            let _ = writeln!(
                csv,
                "{},{},{},{},{er},{ei}",
                num(row.t),
                num(row.gap_width),
                num(row.max_im),
                row.edge_present
            );
        }
        t.write("gap_scan.csv", &csv)?;
        println!("gap-scan: {} grid points", rows.len());
        Ok(())
    })
}

pub fn cmd_check_symmetry(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    if cfg.model != ModelKind::Ssh {
        return Err(CliError::Config(
            "check-symmetry requires model = \"ssh\"".into(),
        ));
    }
    let params = cfg.ssh_params()?;
    // the defect chain has odd dimension, incompatible with I ⊗ σ_y; the
    // check always runs on the defect-free even-dimensional chain
    let spec = nhse_core::builders::build_ssh(&params, false)?;
    let h = spec.assemble(BoundaryCondition::Open)?;
    let t_op = time_reversal_sigma_y(params.n_cells_left + params.n_cells_right);
    let deviation = symmetry_defect(&h, &t_op)?;
    tracked(out, |t| {
        let mut csv = String::from("dimension,deviation\n");
        let _ = writeln!(csv, "{},{}", h.nrows(), num(deviation));
        t.write("symmetry.csv", &csv)?;
        println!("check-symmetry: ||T H^T T^-1 - H||_F = {}", num(deviation));
        Ok(())
    })
}
