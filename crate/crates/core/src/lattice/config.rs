use super::lattice_box::{EdgeId, LatticeBox};
use super::law::{Atom, BoundedLaw, EdgeSampler, UniformPart};
use crate::error::{invalid, Result};
use crate::{par, rng};

/// Seeds a configuration was drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub master_seed: u64,
    pub stream: u64,
}

/// Edge weights on a [`LatticeBox`], every weight inside the support
/// `[a, b]` of the recorded law. Configurations are immutable; modifications
/// produce new values.
#[derive(Clone, Debug)]
pub struct WeightConfiguration {
    lattice: LatticeBox,
    law: BoundedLaw,
    /// Indexed by edge slot; slots that are not edges hold NaN.
    weights: Vec<f64>,
    provenance: Option<Provenance>,
}

impl PartialEq for WeightConfiguration {
    fn eq(&self, other: &Self) -> bool {
        self.lattice == other.lattice
            && self.law == other.law
            && self.provenance == other.provenance
            && self.lattice.edges().all(|e| self.weights[e.0].to_bits() == other.weights[e.0].to_bits())
    }
}

impl WeightConfiguration {
    /// Build from a function of the edge id.
    pub fn from_fn(lattice: LatticeBox, law: BoundedLaw, f: impl Fn(EdgeId) -> f64) -> Result<Self> {
        let mut weights = vec![f64::NAN; lattice.edge_slots()];
        for e in lattice.edges() {
            weights[e.0] = f(e);
        }
        Self::from_slots(lattice, law, weights, None)
    }

    /// Build from weights listed in canonical edge order.
    pub fn from_edge_weights(lattice: LatticeBox, law: BoundedLaw, values: &[f64]) -> Result<Self> {
        if values.len() != lattice.edge_count() {
            return invalid(format!("expected {} weights, got {}", lattice.edge_count(), values.len()));
        }
        let mut weights = vec![f64::NAN; lattice.edge_slots()];
        for (e, w) in lattice.edges().zip(values) {
            weights[e.0] = *w;
        }
        Self::from_slots(lattice, law, weights, None)
    }

    pub(crate) fn from_slots(
        lattice: LatticeBox,
        law: BoundedLaw,
        weights: Vec<f64>,
        provenance: Option<Provenance>,
    ) -> Result<Self> {
        let (a, b) = (law.a(), law.b());
        for e in lattice.edges() {
            let w = weights[e.0];
            if !(a <= w && w <= b) {
                return invalid(format!("weight {w} of edge {} outside the support [{a}, {b}]", e.0));
            }
        }
        Ok(Self { lattice, law, weights, provenance })
    }

    pub fn lattice(&self) -> &LatticeBox {
        &self.lattice
    }

    pub fn law(&self) -> &BoundedLaw {
        &self.law
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    #[inline]
    pub fn weight(&self, e: EdgeId) -> f64 {
        self.weights[e.0]
    }

    /// Weight of the edge leaving vertex `v` in direction `+e_axis`
    /// (NaN when that edge does not exist).
    #[inline]
    pub fn weight_up(&self, v: usize, axis: usize) -> f64 {
        self.weights[v * self.lattice.dim() + axis]
    }

    /// Weights in canonical edge order.
    pub fn edge_weights(&self) -> Vec<f64> {
        self.lattice.edges().map(|e| self.weights[e.0]).collect()
    }

    /// New configuration with `w_e <- f(e, w_e)`; the result must stay in
    /// the law's support.
    pub fn map_weights(&self, f: impl Fn(EdgeId, f64) -> f64) -> Result<Self> {
        let mut weights = self.weights.clone();
        for e in self.lattice.edges() {
            weights[e.0] = f(e, self.weights[e.0]);
        }
        Self::from_slots(self.lattice.clone(), self.law.clone(), weights, None)
    }

    /// New configuration with a few edges replaced.
    pub fn with_edges(&self, changes: &[(EdgeId, f64)]) -> Result<Self> {
        let mut weights = self.weights.clone();
        for &(e, w) in changes {
            if !self.lattice.edge_exists(e) {
                return invalid(format!("edge slot {} is not an edge of the box", e.0));
            }
            weights[e.0] = w;
        }
        Self::from_slots(self.lattice.clone(), self.law.clone(), weights, None)
    }

    /// Same weights, recorded against another law (whose support must
    /// contain them).
    pub fn with_law(&self, law: BoundedLaw) -> Result<Self> {
        Self::from_slots(self.lattice.clone(), law, self.weights.clone(), self.provenance)
    }
}

/// Draw i.i.d. weights from `law`.
pub fn sample_configuration(lattice: &LatticeBox, law: &BoundedLaw, seed: u64, stream: u64) -> Result<WeightConfiguration> {
    sample_configuration_with(lattice, law, law, seed, stream)
}

/// Draw i.i.d. weights through `sampler` (for instance a tilted law) while
/// recording `law` as the configuration's law. Weight of edge slot `s` is
/// `sampler(u(seed, stream, s))`, so the result is independent of the
/// execution mode.
pub fn sample_configuration_with(
    lattice: &LatticeBox,
    law: &BoundedLaw,
    sampler: &dyn EdgeSampler,
    seed: u64,
    stream: u64,
) -> Result<WeightConfiguration> {
    let d = lattice.dim();
    let mut weights = vec![f64::NAN; lattice.edge_slots()];
    let fill = |slot: usize| {
        let (v, axis) = (slot / d, slot % d);
        if lattice.coord(v, axis) < lattice.upper()[axis] {
            sampler.sample(rng::uniform(seed, stream, slot as u64))
        } else {
            f64::NAN
        }
    };
    if weights.len() >= 4096 {
        par::fill_indexed(&mut weights, fill);
    } else {
        for (s, w) in weights.iter_mut().enumerate() {
            *w = fill(s);
        }
    }
    WeightConfiguration::from_slots(
        lattice.clone(),
        law.clone(),
        weights,
        Some(Provenance { master_seed: seed, stream }),
    )
}

/// Law of `max(t, alpha)` when `t ~ law`. Requires `alpha < b`; for
/// `alpha <= a` the law is returned unchanged.
pub fn truncate_law(law: &BoundedLaw, alpha: f64) -> Result<BoundedLaw> {
    if !alpha.is_finite() || alpha >= law.b() {
        return invalid(format!("truncation level {alpha} must be below b = {}", law.b()));
    }
    if alpha <= law.a() {
        return Ok(law.clone());
    }
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    let mut low_mass = 0.0;
    for &Atom { value, mass } in law.atoms() {
        if value < alpha {
            low_mass += mass;
        } else {
            atoms.push((value, mass));
        }
    }
    let uniform = law.uniform_part().and_then(|u| {
        if alpha >= u.hi {
            low_mass += u.mass;
            None
        } else if alpha > u.lo {
            let below = u.mass * (alpha - u.lo) / (u.hi - u.lo);
            low_mass += below;
            Some(UniformPart { lo: alpha, hi: u.hi, mass: u.mass - below })
        } else {
            Some(u)
        }
    });
    atoms.push((alpha, low_mass));
    match uniform {
        Some(u) => BoundedLaw::mixed(&atoms, u),
        None => BoundedLaw::from_atoms(&atoms),
    }
}
