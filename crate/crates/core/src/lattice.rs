//! Lattice specifications and Hamiltonian assembly.
//!
//! A [`LatticeSpec`] is the single source of truth for a model: a list of
//! directed hoppings on `n_sites` labeled sites, with boundary-crossing
//! bonds flagged by `wraps`. Assembly produces the single-particle matrix
//! in the `(to, from)` convention — the column index is the source site, so
//! right eigenvectors are the physical amplitudes ψ_n.

use std::collections::HashSet;
use std::fmt;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense single-particle Hamiltonian; element `(to, from)` holds the
/// amplitude of the hopping from → to.
pub type HamiltonianMatrix = Array2<Complex64>;

/// One directed bond. `wraps` marks terms that cross the chain's end when
/// the ring is closed; they are dropped under open boundary conditions and
/// acquire the twist phase under twisted ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hopping {
    pub from: usize,
    pub to: usize,
    pub amplitude: Complex64,
    pub wraps: bool,
}

impl Hopping {
    pub fn new(from: usize, to: usize, amplitude: Complex64) -> Self {
        Hopping {
            from,
            to,
            amplitude,
            wraps: false,
        }
    }

    pub fn wrap(from: usize, to: usize, amplitude: Complex64) -> Self {
        Hopping {
            from,
            to,
            amplitude,
            wraps: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BoundaryCondition {
    #[default]
    Open,
    /// Twist angle φ in radians; `Twisted(0)` is the periodic ring.
    Twisted(f64),
}

impl BoundaryCondition {
    pub const PERIODIC: BoundaryCondition = BoundaryCondition::Twisted(0.0);
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    SiteOutOfRange {
        from: usize,
        to: usize,
        n_sites: usize,
    },
    DuplicateHopping {
        from: usize,
        to: usize,
    },
    /// `wraps` is only permitted on genuine boundary-crossing bonds,
    /// i.e. |from − to| > n_sites / 2.
    InvalidWrap {
        from: usize,
        to: usize,
        n_sites: usize,
    },
    NonFiniteAmplitude {
        from: usize,
        to: usize,
    },
    OnsiteOutOfRange {
        site: usize,
        n_sites: usize,
    },
    NonFiniteOnsite {
        site: usize,
    },
    EmptyLattice,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Diagnostic::SiteOutOfRange { from, to, n_sites } => {
                write!(
                    f,
                    "hopping {from}->{to} references a site outside [0, {n_sites})"
                )
            }
            Diagnostic::DuplicateHopping { from, to } => {
                write!(f, "duplicate hopping entry {from}->{to}")
            }
            Diagnostic::InvalidWrap { from, to, n_sites } => {
                write!(f, "hopping {from}->{to} marked wraps=true but does not cross the boundary of a {n_sites}-site ring")
            }
            Diagnostic::NonFiniteAmplitude { from, to } => {
                write!(f, "hopping {from}->{to} has a non-finite amplitude")
            }
            Diagnostic::OnsiteOutOfRange { site, n_sites } => {
                write!(f, "onsite energy at site {site} outside [0, {n_sites})")
            }
            Diagnostic::NonFiniteOnsite { site } => {
                write!(f, "non-finite onsite energy at site {site}")
            }
            Diagnostic::EmptyLattice => write!(f, "lattice has zero sites"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LatticeSpec {
    pub n_sites: usize,
    pub hoppings: Vec<Hopping>,
    pub onsite: Vec<(usize, Complex64)>,
}

impl LatticeSpec {
    pub fn new(n_sites: usize) -> Self {
        LatticeSpec {
            n_sites,
            hoppings: Vec::new(),
            onsite: Vec::new(),
        }
    }

    pub fn push(&mut self, hopping: Hopping) {
        self.hoppings.push(hopping);
    }

    /// Add a forward/backward amplitude pair on the bond `lo` → `hi`.
    pub fn bond(&mut self, lo: usize, hi: usize, forward: Complex64, backward: Complex64) {
        self.push(Hopping::new(lo, hi, forward));
        self.push(Hopping::new(hi, lo, backward));
    }

    /// Like [`bond`](Self::bond) but for boundary-crossing pairs: `hi` → `lo`
    /// is the forward (rightward through the boundary) direction.
    pub fn wrap_bond(&mut self, hi: usize, lo: usize, forward: Complex64, backward: Complex64) {
        self.push(Hopping::wrap(hi, lo, forward));
        self.push(Hopping::wrap(lo, hi, backward));
    }

    pub fn has_wrap(&self) -> bool {
        self.hoppings.iter().any(|h| h.wraps)
    }

    /// Copy with every `wraps=true` hopping deleted (the open chain).
    pub fn without_wraps(&self) -> LatticeSpec {
        LatticeSpec {
            n_sites: self.n_sites,
            hoppings: self.hoppings.iter().copied().filter(|h| !h.wraps).collect(),
            onsite: self.onsite.clone(),
        }
    }

    /// One diagnostic per invariant violation; empty iff the spec is valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = self.n_sites;
        if n == 0 {
            out.push(Diagnostic::EmptyLattice);
        }
        let mut seen = HashSet::new();
        for h in &self.hoppings {
            if h.from >= n || h.to >= n {
                out.push(Diagnostic::SiteOutOfRange {
                    from: h.from,
                    to: h.to,
                    n_sites: n,
                });
                continue;
            }
            if !seen.insert((h.from, h.to)) {
                out.push(Diagnostic::DuplicateHopping {
                    from: h.from,
                    to: h.to,
                });
            }
            if h.wraps {
                let span = h.from.abs_diff(h.to);
                if 2 * span <= n {
                    out.push(Diagnostic::InvalidWrap {
                        from: h.from,
                        to: h.to,
                        n_sites: n,
                    });
                }
            }
            if !h.amplitude.re.is_finite() || !h.amplitude.im.is_finite() {
                out.push(Diagnostic::NonFiniteAmplitude {
                    from: h.from,
                    to: h.to,
                });
            }
        }
        for &(site, eps) in &self.onsite {
            if site >= n {
                out.push(Diagnostic::OnsiteOutOfRange { site, n_sites: n });
            } else if !eps.re.is_finite() || !eps.im.is_finite() {
                out.push(Diagnostic::NonFiniteOnsite { site });
            }
        }
        out
    }

    /// Assemble the dense Hamiltonian. Under open boundary conditions every
    /// `wraps=true` hopping is dropped; under `Twisted(φ)` a wrapped bond
    /// directed from a higher to a lower site index (rightward through the
    /// boundary) picks up e^{−iφ}, the opposite direction e^{+iφ}. This sign
    /// convention makes the single-site-cell Bloch curve come out as
    /// E(k) = t2·e^{ik} + t1·e^{−ik} + … at k = φ.
    pub fn assemble(&self, bc: BoundaryCondition) -> Result<HamiltonianMatrix> {
        let diags = self.validate();
        if !diags.is_empty() {
            let msg = diags
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::Spec(msg));
        }
        if let BoundaryCondition::Twisted(phi) = bc {
            if !phi.is_finite() {
                return Err(Error::spec("non-finite twist angle"));
            }
        }
        let n = self.n_sites;
        let mut h = Array2::zeros((n, n));
        for hop in &self.hoppings {
            let factor = match (hop.wraps, bc) {
                (true, BoundaryCondition::Open) => continue,
                (true, BoundaryCondition::Twisted(phi)) => {
                    let sign = if hop.from > hop.to { -1.0 } else { 1.0 };
                    Complex64::from_polar(1.0, sign * phi)
                }
                (false, _) => Complex64::new(1.0, 0.0),
            };
            h[[hop.to, hop.from]] += hop.amplitude * factor;
        }
        for &(site, eps) in &self.onsite {
            h[[site, site]] += eps;
        }
        Ok(h)
    }

    /// Tile `copies` rings of this spec into one large ring: wrap bonds
    /// become the inter-copy bonds, and only the bond closing the large ring
    /// keeps `wraps=true`. The eigenvalue union of the supercell over the
    /// twist grid φ_m = 2πm/copies equals the spectrum of the tiled ring at
    /// twist 0 (block-diagonalization identity).
    pub fn tile_ring(&self, copies: usize) -> Result<LatticeSpec> {
        if copies == 0 {
            return Err(Error::spec("tile_ring requires at least one copy"));
        }
        if copies == 1 {
            return Ok(self.clone());
        }
        let n = self.n_sites;
        let mut out = LatticeSpec::new(n * copies);
        for c in 0..copies {
            let base = c * n;
            for &(site, eps) in &self.onsite {
                out.onsite.push((base + site, eps));
            }
            for hop in &self.hoppings {
                if !hop.wraps {
                    out.push(Hopping::new(base + hop.from, base + hop.to, hop.amplitude));
                    continue;
                }
                // A forward wrap (from > to) continues into the next copy; a
                // backward wrap reaches into the previous one.
                let (target_copy, closes_ring) = if hop.from > hop.to {
                    ((c + 1) % copies, c + 1 == copies)
                } else {
                    ((c + copies - 1) % copies, c == 0)
                };
                let h = Hopping {
                    from: base + hop.from,
                    to: target_copy * n + hop.to,
                    amplitude: hop.amplitude,
                    wraps: closes_ring,
                };
                out.push(h);
            }
        }
        Ok(out)
    }
}
