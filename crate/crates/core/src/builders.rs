//! The paper's two concrete models as `LatticeSpec` builders: the
//! Hatano-Nelson chain with NNN hoppings and a single defect region, and
//! the non-reciprocal SSH chain with a bare defect site between its two
//! branches.
//!
//! Conventions: `defect_site` (N_d) is 1-based as in the paper; primed
//! defect couplings sit on the bonds touching the defect from the left,
//! double-primed on the bonds to its right. Under PBC the whole
//! defect-containing chain is the unit cell and the wrap bonds carry bulk
//! amplitudes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct HnParams {
    pub n_sites: usize,
    /// Defect position N_d, 1-based.
    pub defect_site: usize,
    pub t1: Complex64,
    pub t2: Complex64,
    pub t3: Complex64,
    pub t4: Complex64,
    // defect-region NN couplings: primed pair on (N_d−1 ↔ N_d), double-primed
    // on (N_d ↔ N_d+1)
    pub t1_p: Complex64,
    pub t2_p: Complex64,
    pub t1_pp: Complex64,
    pub t2_pp: Complex64,
    // defect-region NNN couplings: primed on (N_d−2 ↔ N_d), double-primed on
    // (N_d ↔ N_d+2)
    pub t3_p: Complex64,
    pub t4_p: Complex64,
    pub t3_pp: Complex64,
    pub t4_pp: Complex64,
}

impl HnParams {
    /// Uniform chain: every defect coupling equals its bulk partner and the
    /// defect sits at N_d = N/2.
    pub fn uniform(
        n_sites: usize,
        t1: Complex64,
        t2: Complex64,
        t3: Complex64,
        t4: Complex64,
    ) -> Self {
        HnParams {
            n_sites,
            defect_site: n_sites / 2,
            t1,
            t2,
            t3,
            t4,
            t1_p: t1,
            t2_p: t2,
            t1_pp: t1,
            t2_pp: t2,
            t3_p: t3,
            t4_p: t4,
            t3_pp: t3,
            t4_pp: t4,
        }
    }

    /// The paper's strong defect (Figs. 2–5): incoming bonds from the left
    /// keep their rightward amplitudes (t1' = t1, t3' = t3) while the
    /// reverse ones are cut, and symmetrically on the right (t2'' = t2,
    /// t4'' = t4, forward ones cut), with N_d = N/2.
    pub fn strong_defect(
        n_sites: usize,
        t1: Complex64,
        t2: Complex64,
        t3: Complex64,
        t4: Complex64,
    ) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        HnParams {
            n_sites,
            defect_site: n_sites / 2,
            t1,
            t2,
            t3,
            t4,
            t1_p: t1,
            t2_p: zero,
            t1_pp: zero,
            t2_pp: t2,
            t3_p: t3,
            t4_p: zero,
            t3_pp: zero,
            t4_pp: t4,
        }
    }

    fn validate(&self, with_defect: bool) -> Result<()> {
        if with_defect {
            if self.n_sites < 7 {
                return Err(Error::spec(format!(
                    "HN defect chain needs N >= 7, got N = {}",
                    self.n_sites
                )));
            }
            if self.defect_site <= 2 || self.defect_site >= self.n_sites - 2 {
                return Err(Error::spec(format!(
                    "defect site N_d = {} too close to the ends of an N = {} chain",
                    self.defect_site, self.n_sites
                )));
            }
        } else if self.n_sites < 2 {
            return Err(Error::spec("HN chain needs at least 2 sites"));
        }
        Ok(())
    }
}

/// Eqs. (1)–(3): bulk NN (t1, t2) and NNN (t3, t4) hoppings everywhere, with
/// the nine defect-region bonds substituted when `with_defect` is set, plus
/// `wraps=true` closure bonds with bulk amplitudes.
pub fn build_hn(params: &HnParams, with_defect: bool) -> Result<LatticeSpec> {
    params.validate(with_defect)?;
    let n = params.n_sites;
    let p = params;
    let mut spec = LatticeSpec::new(n);

    if with_defect {
        let d = p.defect_site - 1; // 0-based defect index
        for i in 0..d.saturating_sub(1) {
            spec.bond(i, i + 1, p.t1, p.t2);
        }
        for i in d + 1..n - 1 {
            spec.bond(i, i + 1, p.t1, p.t2);
        }
        for i in 0..d.saturating_sub(2) {
            spec.bond(i, i + 2, p.t3, p.t4);
        }
        for i in d + 1..n - 2 {
            spec.bond(i, i + 2, p.t3, p.t4);
        }
        // defect region, Eq. (3)
        spec.bond(d - 1, d, p.t1_p, p.t2_p);
        spec.bond(d, d + 1, p.t1_pp, p.t2_pp);
        spec.bond(d - 2, d, p.t3_p, p.t4_p);
        spec.bond(d, d + 2, p.t3_pp, p.t4_pp);
        spec.bond(d - 1, d + 1, p.t3, p.t4); // bridging NNN pair keeps bulk values
    } else {
        for i in 0..n - 1 {
            spec.bond(i, i + 1, p.t1, p.t2);
        }
        for i in 0..n.saturating_sub(2) {
            spec.bond(i, i + 2, p.t3, p.t4);
        }
    }

    // ring-closure bonds (bulk amplitudes); only generated when they are
    // genuine boundary crossings
    if n >= 3 {
        spec.wrap_bond(n - 1, 0, p.t1, p.t2);
    }
    if n >= 5 {
        spec.wrap_bond(n - 2, 0, p.t3, p.t4);
        spec.wrap_bond(n - 1, 1, p.t3, p.t4);
    }
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SshParams {
    /// Base hopping t; the intracell amplitudes are t1 = t + e^γ,
    /// t2 = t + e^{−γ}, and the NNN amplitudes are tied: t3 = t1, t4 = t2.
    pub t: f64,
    pub gamma: f64,
    /// Reciprocal intercell NN hopping.
    pub t0: f64,
    // defect couplings: reciprocal t0' on the two NN bonds at the defect
    // site, non-reciprocal NNN (t1'', t2'') to the left and (t3'', t4'') to
    // the right
    pub t0_p: f64,
    pub t1_pp: f64,
    pub t2_pp: f64,
    pub t3_pp: f64,
    pub t4_pp: f64,
    /// Defect-strength parameter in [0, 1]; applied by
    /// [`apply_defect_strength`].
    pub p: f64,
    pub n_cells_left: usize,
    pub n_cells_right: usize,
}

impl SshParams {
    /// Strong (fully cut) defect: all five defect couplings zero.
    pub fn strong_defect(
        t: f64,
        gamma: f64,
        t0: f64,
        n_cells_left: usize,
        n_cells_right: usize,
    ) -> Self {
        SshParams {
            t,
            gamma,
            t0,
            t0_p: 0.0,
            t1_pp: 0.0,
            t2_pp: 0.0,
            t3_pp: 0.0,
            t4_pp: 0.0,
            p: 0.0,
            n_cells_left,
            n_cells_right,
        }
    }

    pub fn t1(&self) -> f64 {
        self.t + self.gamma.exp()
    }

    pub fn t2(&self) -> f64 {
        self.t + (-self.gamma).exp()
    }

    pub fn t3(&self) -> f64 {
        self.t1()
    }

    pub fn t4(&self) -> f64 {
        self.t2()
    }

    pub fn n_sites(&self, with_defect: bool) -> usize {
        let cells = 2 * (self.n_cells_left + self.n_cells_right);
        if with_defect {
            cells + 1
        } else {
            cells
        }
    }

    /// Defect position N_d = 2·N_L + 1, 1-based.
    pub fn defect_site(&self) -> usize {
        2 * self.n_cells_left + 1
    }

    fn validate(&self) -> Result<()> {
        if self.n_cells_left == 0 || self.n_cells_right == 0 {
            return Err(Error::spec("SSH chain needs at least one cell per branch"));
        }
        for v in [
            self.t, self.gamma, self.t0, self.t0_p, self.t1_pp, self.t2_pp, self.t3_pp, self.t4_pp,
        ] {
            if !v.is_finite() {
                return Err(Error::spec("non-finite SSH parameter"));
            }
        }
        Ok(())
    }
}

/// §III text convention t0' = p·t0 (the Fig. 9 caption writes the inverse
/// relation; the text version is implemented): scales the five defect
/// couplings so p = 0 is the strong defect and p = 1 restores bulk-like
/// couplings through the defect site.
pub fn apply_defect_strength(params: &SshParams) -> Result<SshParams> {
    let p = params.p;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::spec(format!(
            "defect strength p = {p} outside [0, 1]"
        )));
    }
    let mut out = params.clone();
    out.t0_p = p * params.t0;
    out.t1_pp = p * params.t3();
    out.t3_pp = p * params.t3();
    out.t2_pp = p * params.t4();
    out.t4_pp = p * params.t4();
    Ok(out)
}

/// Eqs. (4)–(6): left branch of N_L cells, bare defect site, right branch of
/// N_R cells. Cell layout is (A, B) with intracell (t1, t2), reciprocal
/// intercell t0, and same-sublattice NNN (t3, t4); the defect region carries
/// reciprocal t0' NN bonds, non-reciprocal NNN (t1'', t2'') / (t3'', t4''),
/// and the bulk (t3, t4) pair bridging its neighbors.
pub fn build_ssh(params: &SshParams, with_defect: bool) -> Result<LatticeSpec> {
    params.validate()?;
    let n = params.n_sites(with_defect);
    let (t1, t2) = (Complex64::from(params.t1()), Complex64::from(params.t2()));
    let (t3, t4) = (Complex64::from(params.t3()), Complex64::from(params.t4()));
    let t0 = Complex64::from(params.t0);
    let mut spec = LatticeSpec::new(n);

    let branch = |spec: &mut LatticeSpec, offset: usize, cells: usize| {
        for c in 0..cells {
            spec.bond(offset + 2 * c, offset + 2 * c + 1, t1, t2);
        }
        for c in 0..cells.saturating_sub(1) {
            spec.bond(offset + 2 * c + 1, offset + 2 * c + 2, t0, t0);
            for sub in 0..2 {
                spec.bond(offset + 2 * c + sub, offset + 2 * (c + 1) + sub, t3, t4);
            }
        }
    };

    if with_defect {
        let d = 2 * params.n_cells_left; // 0-based defect index
        branch(&mut spec, 0, params.n_cells_left);
        branch(&mut spec, d + 1, params.n_cells_right);
        let t0p = Complex64::from(params.t0_p);
        spec.bond(d - 1, d, t0p, t0p);
        spec.bond(d, d + 1, t0p, t0p);
        spec.bond(
            d - 2,
            d,
            Complex64::from(params.t1_pp),
            Complex64::from(params.t2_pp),
        );
        spec.bond(
            d,
            d + 2,
            Complex64::from(params.t3_pp),
            Complex64::from(params.t4_pp),
        );
        spec.bond(d - 1, d + 1, t3, t4);
    } else {
        branch(&mut spec, 0, params.n_cells_left + params.n_cells_right);
    }

    // ring closure with bulk amplitudes: intercell t0 across the boundary
    // plus the two same-sublattice NNN pairs
    if n >= 3 {
        spec.wrap_bond(n - 1, 0, t0, t0);
    }
    if n >= 5 {
        spec.wrap_bond(n - 2, 0, t3, t4);
        spec.wrap_bond(n - 1, 1, t3, t4);
    }
    Ok(spec)
}
