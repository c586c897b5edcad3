use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, FppError, Result};

const MASS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub mass: f64,
}

/// Uniform mass spread over `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformPart {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LawKind {
    Dirac,
    TwoPoint,
    Uniform,
    Atoms,
    Mixed,
}

/// Probability law on `[a, b]` with `0 <= a <= b < inf`: finitely many atoms
/// plus at most one uniform piece.
///
/// Atoms are kept sorted by value with zero-mass atoms dropped, which makes
/// structural equality meaningful.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedLaw {
    atoms: Vec<Atom>,
    uniform: Option<UniformPart>,
}

/// Anything that turns a uniform variate into an edge weight.
pub trait EdgeSampler: Sync {
    fn sample(&self, u: f64) -> f64;
}

impl BoundedLaw {
    pub fn dirac(c: f64) -> Result<Self> {
        Self::build(vec![Atom { value: c, mass: 1.0 }], None)
    }

    /// Mass `p` at `b`, mass `1 - p` at `a`.
    pub fn two_point(a: f64, b: f64, p: f64) -> Result<Self> {
        if !(a < b) {
            return invalid(format!("two-point law needs a < b, got a={a} b={b}"));
        }
        if !(0.0..=1.0).contains(&p) {
            return invalid(format!("two-point probability must lie in [0,1], got {p}"));
        }
        Self::build(vec![Atom { value: a, mass: 1.0 - p }, Atom { value: b, mass: p }], None)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::build(Vec::new(), Some(UniformPart { lo, hi, mass: 1.0 }))
    }

    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::build(atoms.iter().map(|&(value, mass)| Atom { value, mass }).collect(), None)
    }

    pub fn mixed(atoms: &[(f64, f64)], uniform: UniformPart) -> Result<Self> {
        Self::build(atoms.iter().map(|&(value, mass)| Atom { value, mass }).collect(), Some(uniform))
    }

    fn build(mut atoms: Vec<Atom>, uniform: Option<UniformPart>) -> Result<Self> {
        for a in &atoms {
            if !a.value.is_finite() || a.value < 0.0 {
                return invalid(format!("atom value must be finite and >= 0, got {}", a.value));
            }
            if !a.mass.is_finite() || a.mass < 0.0 {
                return invalid(format!("atom mass must be finite and >= 0, got {}", a.mass));
            }
        }
        let uniform = match uniform {
            Some(u) => {
                if !(u.lo.is_finite() && u.hi.is_finite() && 0.0 <= u.lo && u.lo < u.hi) {
                    return invalid(format!("uniform part needs 0 <= lo < hi < inf, got [{}, {}]", u.lo, u.hi));
                }
                if !u.mass.is_finite() || u.mass < 0.0 {
                    return invalid(format!("uniform mass must be >= 0, got {}", u.mass));
                }
                (u.mass > 0.0).then_some(u)
            }
            None => None,
        };
        atoms.retain(|a| a.mass > 0.0);
        atoms.sort_by(|x, y| x.value.total_cmp(&y.value));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.value == a.value => last.mass += a.mass,
                _ => merged.push(a),
            }
        }
        let total: f64 = merged.iter().map(|a| a.mass).sum::<f64>() + uniform.map_or(0.0, |u| u.mass);
        if (total - 1.0).abs() > MASS_TOL {
            return invalid(format!("masses must sum to 1, got {total}"));
        }
        Ok(Self { atoms: merged, uniform })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn uniform_part(&self) -> Option<UniformPart> {
        self.uniform
    }

    pub fn kind(&self) -> LawKind {
        match (self.uniform.is_some(), self.atoms.len()) {
            (true, 0) => LawKind::Uniform,
            (true, _) => LawKind::Mixed,
            (false, 1) => LawKind::Dirac,
            (false, 2) => LawKind::TwoPoint,
            (false, _) => LawKind::Atoms,
        }
    }

    pub fn is_discrete(&self) -> bool {
        self.uniform.is_none()
    }

    /// Lower end of the support.
    pub fn a(&self) -> f64 {
        let atom = self.atoms.first().map_or(f64::INFINITY, |a| a.value);
        atom.min(self.uniform.map_or(f64::INFINITY, |u| u.lo))
    }

    /// Upper end of the support.
    pub fn b(&self) -> f64 {
        let atom = self.atoms.last().map_or(f64::NEG_INFINITY, |a| a.value);
        atom.max(self.uniform.map_or(f64::NEG_INFINITY, |u| u.hi))
    }

    pub fn mass_at(&self, t: f64) -> f64 {
        self.atoms.iter().filter(|a| a.value == t).map(|a| a.mass).sum()
    }

    /// `nu([t, +inf))`.
    pub fn mass_at_least(&self, t: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.value >= t).map(|a| a.mass).sum();
        atoms + self.uniform.map_or(0.0, |u| u.mass * ((u.hi - t.max(u.lo)) / (u.hi - u.lo)).clamp(0.0, 1.0))
    }

    /// `nu((-inf, t])`.
    pub fn cdf(&self, t: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.value <= t).map(|a| a.mass).sum();
        let cont = self.uniform.map_or(0.0, |u| u.mass * ((t.min(u.hi) - u.lo) / (u.hi - u.lo)).clamp(0.0, 1.0));
        (atoms + cont).min(1.0)
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.value * a.mass).sum::<f64>()
            + self.uniform.map_or(0.0, |u| u.mass * 0.5 * (u.lo + u.hi))
    }

    /// Generalised inverse of the CDF on `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        quantile_impl(self, 0.0, 0.0, u)
    }

    /// Law of `X` conditioned on `X >= t`.
    pub fn conditioned_at_least(&self, t: f64) -> Result<Self> {
        let mass = self.mass_at_least(t);
        if !(mass > 0.0) {
            return invalid(format!("conditioning on [{t}, b] has zero probability"));
        }
        let atoms: Vec<Atom> = self
            .atoms
            .iter()
            .filter(|a| a.value >= t)
            .map(|a| Atom { value: a.value, mass: a.mass / mass })
            .collect();
        let uniform = self.uniform.and_then(|u| {
            let lo = u.lo.max(t);
            (lo < u.hi).then(|| UniformPart { lo, hi: u.hi, mass: u.mass * (u.hi - lo) / (u.hi - u.lo) / mass })
        });
        Self::build(atoms, uniform)
    }

    /// `log E[exp(theta X)]`.
    pub fn log_mgf(&self, theta: f64) -> f64 {
        let shift = if theta >= 0.0 { theta * self.b() } else { theta * self.a() };
        let mut acc: f64 = self.atoms.iter().map(|a| a.mass * (theta * a.value - shift).exp()).sum();
        if let Some(u) = self.uniform {
            acc += u.mass * uniform_exp_integral(theta, u.lo, u.hi, shift) / (u.hi - u.lo);
        }
        acc.ln() + shift
    }

    /// Exponentially tilted law `d nu_theta = exp(theta t - log Z) d nu`.
    pub fn tilted(&self, theta: f64) -> Result<TiltedLaw> {
        if !theta.is_finite() {
            return invalid("tilt must be finite");
        }
        Ok(TiltedLaw { base: self.clone(), theta, log_z: self.log_mgf(theta) })
    }
}

/// `int_lo^hi exp(theta t - shift) dt`.
fn uniform_exp_integral(theta: f64, lo: f64, hi: f64, shift: f64) -> f64 {
    let w = hi - lo;
    let x = theta * w;
    let base = (theta * lo - shift).exp();
    if x.abs() < 1e-12 {
        base * w
    } else {
        base * x.exp_m1() / theta
    }
}

/// Quantile of the law tilted by `theta` (normaliser `log_z`).
fn quantile_impl(law: &BoundedLaw, theta: f64, log_z: f64, u: f64) -> f64 {
    let tilt = |v: f64| (theta * v - log_z).exp();
    let mut points: Vec<f64> = law.atoms.iter().map(|a| a.value).collect();
    if let Some(c) = law.uniform {
        points.push(c.lo);
        points.push(c.hi);
        points.sort_by(f64::total_cmp);
        points.dedup();
    }
    let mut acc = 0.0;
    let mut prev = f64::NEG_INFINITY;
    let mut atom_iter = law.atoms.iter().peekable();
    for &q in &points {
        if let Some(c) = law.uniform {
            let l = prev.max(c.lo);
            let r = q.min(c.hi);
            if l < r {
                let rho = c.mass / (c.hi - c.lo);
                let piece = if theta == 0.0 { rho * (r - l) } else { rho * uniform_exp_integral(theta, l, r, log_z) };
                if acc + piece >= u {
                    let need = u - acc;
                    let t = if theta == 0.0 {
                        l + need / rho
                    } else {
                        l + (need * theta / (rho * tilt(l))).ln_1p() / theta
                    };
                    return t.clamp(l, r);
                }
                acc += piece;
            }
        }
        if let Some(a) = atom_iter.next_if(|a| a.value == q) {
            let m = if theta == 0.0 { a.mass } else { a.mass * tilt(a.value) };
            if acc + m >= u {
                return q;
            }
            acc += m;
        }
        prev = q;
    }
    law.b()
}

impl EdgeSampler for BoundedLaw {
    fn sample(&self, u: f64) -> f64 {
        self.quantile(u)
    }
}

/// Exponential tilt of a [`BoundedLaw`], used for importance sampling.
#[derive(Clone, Debug)]
pub struct TiltedLaw {
    base: BoundedLaw,
    theta: f64,
    log_z: f64,
}

impl TiltedLaw {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn base(&self) -> &BoundedLaw {
        &self.base
    }

    pub fn log_normalizer(&self) -> f64 {
        self.log_z
    }

    pub fn quantile(&self, u: f64) -> f64 {
        quantile_impl(&self.base, self.theta, self.log_z, u)
    }

    /// `log (d nu / d nu_theta)(t)`.
    #[inline]
    pub fn log_likelihood_ratio(&self, t: f64) -> f64 {
        self.log_z - self.theta * t
    }

    /// `E_theta[X] = d/dtheta log Z`, by a central difference of the exact
    /// normaliser.
    pub fn mean(&self) -> f64 {
        if self.theta == 0.0 {
            return self.base.mean();
        }
        let h = 1e-5 * (1.0 + self.theta.abs());
        (self.base.log_mgf(self.theta + h) - self.base.log_mgf(self.theta - h)) / (2.0 * h)
    }

    /// Tilted probability of `[t, +inf)`.
    pub fn mass_at_least(&self, t: f64) -> f64 {
        let atoms: f64 = self
            .base
            .atoms
            .iter()
            .filter(|a| a.value >= t)
            .map(|a| a.mass * (self.theta * a.value - self.log_z).exp())
            .sum();
        let cont = self.base.uniform.map_or(0.0, |c| {
            let l = t.max(c.lo);
            if l >= c.hi {
                0.0
            } else {
                c.mass / (c.hi - c.lo) * uniform_exp_integral(self.theta, l, c.hi, self.log_z)
            }
        });
        atoms + cont
    }
}

impl EdgeSampler for TiltedLaw {
    fn sample(&self, u: f64) -> f64 {
        self.quantile(u)
    }
}

impl fmt::Display for BoundedLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            for a in &self.atoms {
                write!(f, " {}:{}", a.value, a.mass)?;
            }
            Ok(())
        };
        match self.kind() {
            LawKind::Dirac => write!(f, "dirac {}", self.atoms[0].value),
            LawKind::TwoPoint => {
                write!(f, "two-point {} {} {}", self.atoms[0].value, self.atoms[1].value, self.atoms[1].mass)
            }
            LawKind::Uniform => {
                let u = self.uniform.expect("uniform part");
                write!(f, "uniform {} {}", u.lo, u.hi)
            }
            LawKind::Atoms => {
                write!(f, "atoms")?;
                atoms(f)
            }
            LawKind::Mixed => {
                let u = self.uniform.expect("uniform part");
                write!(f, "mixed")?;
                atoms(f)?;
                write!(f, " | {} {} {}", u.lo, u.hi, u.mass)
            }
        }
    }
}

impl FromStr for BoundedLaw {
    type Err = FppError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| FppError::InvalidInput(format!("law descriptor '{s}': {m}"));
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad(&format!("'{t}' is not a number")));
        let atom = |t: &str| -> Result<(f64, f64)> {
            let (v, m) = t.split_once(':').ok_or_else(|| bad("atoms are written value:mass"))?;
            Ok((num(v)?, num(m)?))
        };
        let mut parts = s.split_whitespace();
        let kind = parts.next().ok_or_else(|| bad("empty"))?;
        let rest: Vec<&str> = parts.collect();
        let expect = |n: usize| if rest.len() == n { Ok(()) } else { Err(bad(&format!("expected {n} parameters"))) };
        match kind {
            "dirac" => {
                expect(1)?;
                Self::dirac(num(rest[0])?)
            }
            "two-point" => {
                expect(3)?;
                Self::two_point(num(rest[0])?, num(rest[1])?, num(rest[2])?)
            }
            "uniform" => {
                expect(2)?;
                Self::uniform(num(rest[0])?, num(rest[1])?)
            }
            "atoms" => {
                let atoms = rest.iter().map(|t| atom(t)).collect::<Result<Vec<_>>>()?;
                if atoms.is_empty() {
                    return Err(bad("no atoms"));
                }
                Self::from_atoms(&atoms)
            }
            "mixed" => {
                let bar = rest.iter().position(|t| *t == "|").ok_or_else(|| bad("missing '|'"))?;
                let atoms = rest[..bar].iter().map(|t| atom(t)).collect::<Result<Vec<_>>>()?;
                let tail = &rest[bar + 1..];
                if tail.len() != 3 {
                    return Err(bad("uniform part is 'lo hi mass'"));
                }
                Self::mixed(&atoms, UniformPart { lo: num(tail[0])?, hi: num(tail[1])?, mass: num(tail[2])? })
            }
            other => Err(bad(&format!("unknown law kind '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_and_support() {
        let l = BoundedLaw::two_point(1.0, 2.0, 0.25).unwrap();
        assert_eq!(l.kind(), LawKind::TwoPoint);
        assert_eq!((l.a(), l.b()), (1.0, 2.0));
        assert_eq!(l.mass_at(2.0), 0.25);
        assert_eq!(l.mass_at_least(1.5), 0.25);
        assert_eq!(BoundedLaw::dirac(3.0).unwrap().kind(), LawKind::Dirac);
        assert!(BoundedLaw::two_point(2.0, 1.0, 0.5).is_err());
        assert!(BoundedLaw::from_atoms(&[(1.0, 0.5), (2.0, 0.4)]).is_err());
        assert!(BoundedLaw::uniform(-1.0, 1.0).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        let l = BoundedLaw::mixed(&[(0.5, 0.25), (2.0, 0.25)], UniformPart { lo: 1.0, hi: 3.0, mass: 0.5 }).unwrap();
        for k in 1..100 {
            let u = k as f64 / 100.0;
            let q = l.quantile(u);
            assert!(l.cdf(q) >= u - 1e-12, "u={u} q={q}");
            assert!(l.cdf(q - 1e-9) <= u + 1e-12);
        }
    }

    #[test]
    fn display_roundtrip() {
        let laws = [
            BoundedLaw::dirac(1.5).unwrap(),
            BoundedLaw::two_point(1.0, 2.0, 0.3).unwrap(),
            BoundedLaw::uniform(0.25, 1.75).unwrap(),
            BoundedLaw::from_atoms(&[(1.0, 0.2), (2.0, 0.3), (3.0, 0.5)]).unwrap(),
            BoundedLaw::mixed(&[(0.1, 0.1)], UniformPart { lo: 1.0, hi: 2.0, mass: 0.9 }).unwrap(),
        ];
        for l in laws {
            let back: BoundedLaw = l.to_string().parse().unwrap();
            assert_eq!(back, l);
        }
    }

    #[test]
    fn tilted_mgf_matches_closed_form() {
        let l = BoundedLaw::two_point(1.0, 2.0, 0.5).unwrap();
        let theta: f64 = 0.7;
        let expected = (0.5 * theta.exp() + 0.5 * (2.0 * theta).exp()).ln();
        assert!((l.log_mgf(theta) - expected).abs() < 1e-14);
        let t = l.tilted(theta).unwrap();
        let p_hi = 0.5 * (2.0 * theta).exp() / expected.exp();
        assert!((t.mass_at_least(2.0) - p_hi).abs() < 1e-14);
        assert_eq!(t.quantile(1.0 - p_hi + 1e-9), 2.0);
        assert_eq!(t.quantile(1.0 - p_hi - 1e-9), 1.0);

        let u = BoundedLaw::uniform(0.0, 1.0).unwrap();
        let expected = (theta.exp_m1() / theta).ln();
        assert!((u.log_mgf(theta) - expected).abs() < 1e-14);
        let tu = u.tilted(theta).unwrap();
        // CDF of the tilted uniform is (e^{theta t} - 1) / (e^theta - 1).
        for k in 1..10 {
            let p = k as f64 / 10.0;
            let q = tu.quantile(p);
            let cdf = (theta * q).exp_m1() / theta.exp_m1();
            assert!((cdf - p).abs() < 1e-12);
        }
    }

    #[test]
    fn conditioning() {
        let l = BoundedLaw::mixed(&[(2.0, 0.5)], UniformPart { lo: 0.0, hi: 2.0, mass: 0.5 }).unwrap();
        let c = l.conditioned_at_least(1.0).unwrap();
        assert!((c.mass_at(2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.a(), 1.0);
    }
}
