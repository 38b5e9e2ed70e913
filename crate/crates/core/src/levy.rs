//! Lévy measures on (0, ∞): tails, generalized inverses, truncation and scaling.
//!
//! A measure is described by its tail `u ↦ Λ[u, ∞)`. The generalized inverse
//! `Λ⁻¹(g) = inf{x > 0 : Λ[x, ∞) < g}` maps Poisson arrivals to jump sizes
//! (the inverse Lévy measure method); it is non-increasing in `g` and
//! vanishes once `g` reaches the total mass.

use std::fmt;

use serde::Serialize;

use crate::error::{domain, invalid, Error, Result};
use crate::quad::{integrate, integrate_to_infinity_scaled, Tolerance};
use crate::special::e1_unchecked;

/// Absolute tolerance of [`LevyMeasure::tail_inverse`].
pub const INVERSE_ABS_TOL: f64 = 1e-12;
/// Relative tolerance of [`LevyMeasure::tail_inverse`].
pub const INVERSE_REL_TOL: f64 = 1e-10;
/// Retained share of `∫ x Λ(dx)` used for default truncation levels.
pub const DEFAULT_RETAINED_FRACTION: f64 = 1.0 - 1e-3;

/// Coarse classification of a measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureKind {
    Gamma { nu: f64 },
    Truncated { level: f64 },
    Scaled { factor: f64 },
    Custom,
}

/// Piecewise-linear density on `[x_0, x_n]`, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
struct DensityTable {
    xs: Vec<f64>,
    ds: Vec<f64>,
    /// `suffix[k] = ∫_{x_k}^{x_n} density`.
    suffix: Vec<f64>,
}

impl DensityTable {
    fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("density table needs at least two points"));
        }
        let mut xs = Vec::with_capacity(points.len());
        let mut ds = Vec::with_capacity(points.len());
        for (i, &(x, d)) in points.iter().enumerate() {
            if !(x >= 0.0) || !x.is_finite() || !(d >= 0.0) || !d.is_finite() {
                return Err(invalid(format!("density table point {i}: ({x}, {d}) must be finite and non-negative")));
            }
            if let Some(&prev) = xs.last() {
                if x <= prev {
                    return Err(invalid(format!("density table abscissae must increase strictly (point {i})")));
                }
            }
            xs.push(x);
            ds.push(d);
        }
        let n = xs.len();
        let mut suffix = vec![0.0; n];
        for k in (0..n - 1).rev() {
            suffix[k] = suffix[k + 1] + 0.5 * (xs[k + 1] - xs[k]) * (ds[k] + ds[k + 1]);
        }
        if !(suffix[0] > 0.0) {
            return Err(invalid("density table has zero total mass"));
        }
        Ok(Self { xs, ds, suffix })
    }

    fn segment(&self, x: f64) -> Option<usize> {
        if x < self.xs[0] || x > self.xs[self.xs.len() - 1] {
            return None;
        }
        let k = self.xs.partition_point(|&p| p <= x);
        Some(k.saturating_sub(1).min(self.xs.len() - 2))
    }

    fn density(&self, x: f64) -> f64 {
        match self.segment(x) {
            None => 0.0,
            Some(k) => {
                let w = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
                self.ds[k] + w * (self.ds[k + 1] - self.ds[k])
            }
        }
    }

    fn tail(&self, u: f64) -> f64 {
        if u <= self.xs[0] {
            return self.suffix[0];
        }
        match self.segment(u) {
            None => 0.0,
            Some(k) => 0.5 * (self.xs[k + 1] - u) * (self.density(u) + self.ds[k + 1]) + self.suffix[k + 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// Density `e^{-x/s}/(ν x)` with `s = ν`, or `s = 1` in the literal form.
    Gamma { nu: f64, literal: bool },
    /// Point masses sorted by decreasing location.
    Atoms { atoms: Vec<(f64, f64)> },
    Density(DensityTable),
    /// Restriction of `base` to `[cutoff, ∞)`.
    Truncated { base: Box<LevyMeasure>, level: f64, cutoff: f64 },
    /// `factor · base`.
    Scaled { base: Box<LevyMeasure>, factor: f64 },
}

/// A Lévy measure on (0, ∞) with finite second moment.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasure {
    kind: Kind,
}

/// Moment integrals of a measure and the two normalization checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizationReport {
    /// `∫ x² Λ(dx)`.
    pub second_moment: f64,
    /// `∫_{[1,∞)} x Λ(dx)`.
    pub unit_tail_mean: f64,
    /// `∫ x Λ(dx)`.
    pub mean: f64,
    /// `unit_tail_mean == 1` within 1e-6.
    pub unit_tail_mean_is_one: bool,
    /// `mean == 1` within 1e-6; this is what makes `E G(1) = 1`.
    pub mean_is_one: bool,
}

impl LevyMeasure {
    /// Gamma Lévy measure with density `e^{-x/ν}/(ν x)`, tail `E1(u/ν)/ν`.
    pub fn gamma(nu: f64) -> Result<Self> {
        check_positive("nu", nu)?;
        Ok(Self {
            kind: Kind::Gamma { nu, literal: false },
        })
    }

    /// Gamma-type measure with tail `E1(u)/ν` (density `e^{-x}/(ν x)`).
    pub fn gamma_literal(nu: f64) -> Result<Self> {
        check_positive("nu", nu)?;
        Ok(Self {
            kind: Kind::Gamma { nu, literal: true },
        })
    }

    /// Finite measure made of point masses `(location, mass)`.
    pub fn atoms(points: &[(f64, f64)]) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("atom list is empty"));
        }
        let mut atoms = Vec::with_capacity(points.len());
        for (i, &(x, m)) in points.iter().enumerate() {
            if !(x > 0.0) || !x.is_finite() {
                return Err(invalid(format!("atom {i}: location {x} must be positive and finite")));
            }
            if !(m > 0.0) || !m.is_finite() {
                return Err(invalid(format!("atom {i}: mass {m} must be positive and finite")));
            }
            atoms.push((x, m));
        }
        atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
        // Merge coincident locations.
        atoms.dedup_by(|cur, prev| {
            if cur.0 == prev.0 {
                prev.1 += cur.1;
                true
            } else {
                false
            }
        });
        Ok(Self {
            kind: Kind::Atoms { atoms },
        })
    }

    /// Measure with a piecewise-linear density given as `(x, density)` pairs.
    pub fn density_table(points: &[(f64, f64)]) -> Result<Self> {
        Ok(Self {
            kind: Kind::Density(DensityTable::new(points)?),
        })
    }

    pub fn kind(&self) -> MeasureKind {
        match &self.kind {
            Kind::Gamma { nu, .. } => MeasureKind::Gamma { nu: *nu },
            Kind::Atoms { .. } | Kind::Density(_) => MeasureKind::Custom,
            Kind::Truncated { level, .. } => MeasureKind::Truncated { level: *level },
            Kind::Scaled { factor, .. } => MeasureKind::Scaled { factor: *factor },
        }
    }

    /// `Some(ν)` for the (non-literal) gamma measure.
    pub fn gamma_nu(&self) -> Option<f64> {
        match self.kind {
            Kind::Gamma { nu, literal: false } => Some(nu),
            _ => None,
        }
    }

    /// Human-readable description stored with generated expansions.
    pub fn descriptor(&self) -> String {
        self.to_string()
    }

    /// `Λ[u, ∞)` for `u > 0`.
    pub fn tail(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(domain(format!("tail is defined for u > 0, got {u}")));
        }
        Ok(self.tail_unchecked(u))
    }

    fn tail_unchecked(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Gamma { nu, literal } => {
                let s = if *literal { 1.0 } else { *nu };
                e1_unchecked(u / s) / nu
            }
            Kind::Atoms { atoms } => atoms.iter().take_while(|a| a.0 >= u).map(|a| a.1).sum(),
            Kind::Density(t) => t.tail(u),
            Kind::Truncated { base, cutoff, .. } => base.tail_unchecked(u.max(*cutoff)),
            Kind::Scaled { base, factor } => factor * base.tail_unchecked(u),
        }
    }

    /// Density with respect to Lebesgue measure, when the measure has one.
    pub fn density(&self, x: f64) -> Option<f64> {
        match &self.kind {
            Kind::Gamma { nu, literal } => {
                let s = if *literal { 1.0 } else { *nu };
                Some(if x > 0.0 { (-x / s).exp() / (nu * x) } else { 0.0 })
            }
            Kind::Atoms { .. } => None,
            Kind::Density(t) => Some(t.density(x)),
            Kind::Truncated { base, cutoff, .. } => {
                if x < *cutoff {
                    Some(0.0)
                } else {
                    base.density(x)
                }
            }
            Kind::Scaled { base, factor } => base.density(x).map(|d| d * factor),
        }
    }

    /// `Λ(0, ∞)`, possibly infinite.
    pub fn total_mass(&self) -> f64 {
        match &self.kind {
            Kind::Gamma { .. } => f64::INFINITY,
            Kind::Atoms { atoms } => atoms.iter().map(|a| a.1).sum(),
            Kind::Density(t) => t.suffix[0],
            Kind::Truncated { base, cutoff, .. } => {
                if *cutoff > 0.0 {
                    base.tail_unchecked(*cutoff)
                } else {
                    base.total_mass()
                }
            }
            Kind::Scaled { base, factor } => factor * base.total_mass(),
        }
    }

    /// Left end of the support.
    pub fn support_start(&self) -> f64 {
        match &self.kind {
            Kind::Gamma { .. } => 0.0,
            Kind::Atoms { atoms } => atoms[atoms.len() - 1].0,
            Kind::Density(t) => {
                let k = t.ds.iter().position(|&d| d > 0.0).unwrap_or(0);
                t.xs[k.saturating_sub(1)].max(t.xs[0])
            }
            Kind::Truncated { base, cutoff, .. } => base.support_start().max(*cutoff),
            Kind::Scaled { base, .. } => base.support_start(),
        }
    }

    /// Generalized inverse `inf{x > 0 : Λ[x, ∞) < g}`.
    ///
    /// Returns 0 when `g` is at least the total mass. Continuous parts are
    /// solved by safeguarded Newton iteration on `ln x` inside a bisection
    /// bracket; atoms are inverted exactly.
    pub fn tail_inverse(&self, g: f64) -> Result<f64> {
        if !(g > 0.0) {
            return Err(domain(format!("tail_inverse needs a positive argument, got {g}")));
        }
        Ok(self.tail_inverse_unchecked(g))
    }

    pub(crate) fn tail_inverse_unchecked(&self, g: f64) -> f64 {
        if g >= self.total_mass() {
            return 0.0;
        }
        match &self.kind {
            Kind::Atoms { atoms } => {
                let mut cum = 0.0;
                for &(x, m) in atoms {
                    cum += m;
                    if cum >= g {
                        return x;
                    }
                }
                0.0
            }
            Kind::Scaled { base, factor } => base.tail_inverse_unchecked(g / factor),
            Kind::Truncated { base, .. } => base.tail_inverse_unchecked(g),
            Kind::Gamma { nu, literal } => {
                let s = if *literal { 1.0 } else { *nu };
                let z = nu * g;
                // E1(y) ≈ -γ - ln y for small y, ≈ e^{-y}/y for large y.
                let guess = if z > 1.0 {
                    s * (-0.577_215_664_901_532_9 - z).exp()
                } else {
                    let l = -z.ln();
                    s * (l - l.max(1.0).ln()).max(1e-3)
                };
                self.solve_continuous(g, guess)
            }
            Kind::Density(t) => self.solve_continuous(g, 0.5 * (t.xs[0] + t.xs[t.xs.len() - 1]).max(1e-3)),
        }
    }

    /// Finds `inf{x : tail(x) < g}` for a continuous tail.
    fn solve_continuous(&self, g: f64, guess: f64) -> f64 {
        let tail = |x: f64| self.tail_unchecked(x);
        let guess = if guess.is_finite() && guess > 0.0 { guess } else { 1.0 };
        // Bracket: tail(lo) >= g > tail(hi).
        let (mut lo, mut hi);
        if tail(guess) < g {
            hi = guess;
            lo = guess;
            loop {
                lo *= 0.5;
                if lo < 1e-300 {
                    return 0.0;
                }
                if tail(lo) >= g {
                    break;
                }
                hi = lo;
            }
        } else {
            lo = guess;
            hi = guess;
            loop {
                hi *= 2.0;
                if !hi.is_finite() {
                    return lo;
                }
                if tail(hi) < g {
                    break;
                }
                lo = hi;
            }
        }
        let mut x = if tail(guess) >= g && guess >= lo && guess < hi { guess } else { 0.5 * (lo + hi) };
        for _ in 0..200 {
            if hi - lo <= INVERSE_ABS_TOL.max(INVERSE_REL_TOL * hi) {
                break;
            }
            let t = tail(x);
            if t >= g {
                lo = x;
            } else {
                hi = x;
            }
            let next = match self.density(x) {
                Some(d) if d > 0.0 => {
                    // Newton in ln x: d tail / d ln x = -x·density.
                    let y = x.ln() + (t - g) / (x * d);
                    y.exp()
                }
                _ => f64::NAN,
            };
            let step_ok = next.is_finite() && next > lo && next < hi;
            if step_ok {
                let step = (next - x).abs();
                x = next;
                if step <= 0.25 * INVERSE_ABS_TOL.max(INVERSE_REL_TOL * x) {
                    // Confirm the bracket side of the converged point.
                    let tx = tail(x);
                    let eps = INVERSE_ABS_TOL.max(INVERSE_REL_TOL * x);
                    if tx >= g {
                        lo = x;
                        hi = hi.min(x + eps);
                    } else {
                        hi = x;
                        lo = lo.max(x - eps);
                    }
                    break;
                }
            } else {
                x = if lo > 0.0 && hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            }
        }
        0.5 * (lo + hi)
    }

    /// Restriction of the measure to `[Λ⁻¹(L), ∞)`; total mass at most `L`
    /// for measures without an atom at the cut.
    pub fn truncate(&self, level: f64) -> Result<Self> {
        check_positive("truncation level", level)?;
        let cutoff = self.tail_inverse_unchecked(level);
        if cutoff <= 0.0 || cutoff <= self.support_start() {
            return Ok(self.clone());
        }
        Ok(Self {
            kind: Kind::Truncated {
                base: Box::new(self.clone()),
                level,
                cutoff,
            },
        })
    }

    /// The measure multiplied by `factor > 0`.
    pub fn scale(&self, factor: f64) -> Result<Self> {
        check_positive("scale factor", factor)?;
        Ok(Self {
            kind: Kind::Scaled {
                base: Box::new(self.clone()),
                factor,
            },
        })
    }

    /// Truncation cut-off, when this is a truncated measure.
    pub fn cutoff(&self) -> Option<f64> {
        match &self.kind {
            Kind::Truncated { cutoff, .. } => Some(*cutoff),
            _ => None,
        }
    }

    /// `∫_{[lo, ∞)} h(x) Λ(dx)`; `lo = 0` integrates over (0, ∞).
    pub fn integrate_from<H: Fn(f64) -> f64>(&self, lo: f64, h: H, tol: Tolerance) -> Result<f64> {
        match &self.kind {
            Kind::Atoms { atoms } => Ok(atoms.iter().filter(|a| a.0 >= lo).map(|a| a.1 * h(a.0)).sum()),
            Kind::Gamma { nu, literal } => {
                let s = if *literal { 1.0 } else { *nu };
                let f = |x: f64| {
                    if x <= 0.0 {
                        0.0
                    } else {
                        h(x) * (-x / s).exp() / (nu * x)
                    }
                };
                let mut acc = 0.0;
                let mut start = lo.max(0.0);
                if start < s {
                    acc += integrate(f, start, s, tol)?.value;
                    start = s;
                }
                acc += integrate_to_infinity_scaled(f, start, s, tol)?.value;
                Ok(acc)
            }
            Kind::Density(t) => {
                let mut acc = 0.0;
                for k in 0..t.xs.len() - 1 {
                    let (a, b) = (t.xs[k].max(lo), t.xs[k + 1]);
                    if a >= b {
                        continue;
                    }
                    acc += integrate(|x: f64| h(x) * t.density(x), a, b, tol)?.value;
                }
                Ok(acc)
            }
            Kind::Truncated { base, cutoff, .. } => base.integrate_from(lo.max(*cutoff), h, tol),
            Kind::Scaled { base, factor } => Ok(factor * base.integrate_from(lo, h, tol)?),
        }
    }

    /// `∫ h(x) Λ(dx)` over (0, ∞).
    pub fn integrate<H: Fn(f64) -> f64>(&self, h: H, tol: Tolerance) -> Result<f64> {
        self.integrate_from(0.0, h, tol)
    }

    pub fn second_moment(&self) -> Result<f64> {
        self.integrate(|x| x * x, Tolerance::default())
    }

    /// `∫ x Λ(dx)`, the mean of the unit-time increment.
    pub fn mean(&self) -> Result<f64> {
        self.integrate(|x| x, Tolerance::default())
    }

    pub fn unit_tail_mean(&self) -> Result<f64> {
        self.integrate_from(1.0, |x| x, Tolerance::default())
    }

    /// Computes the moment integrals and reports both normalizations.
    /// Neither is enforced.
    pub fn check_normalization(&self) -> Result<NormalizationReport> {
        let second_moment = self.second_moment()?;
        if !second_moment.is_finite() {
            return Err(Error::Numerical("second moment is not finite".into()));
        }
        let unit_tail_mean = self.unit_tail_mean()?;
        let mean = self.mean()?;
        Ok(NormalizationReport {
            second_moment,
            unit_tail_mean,
            mean,
            unit_tail_mean_is_one: (unit_tail_mean - 1.0).abs() <= 1e-6,
            mean_is_one: (mean - 1.0).abs() <= 1e-6,
        })
    }

    /// Laplace exponent `∫ (1 - e^{-s x}) Λ(dx)`, in closed form where one exists.
    pub fn laplace_exponent(&self, s: f64) -> Result<f64> {
        match &self.kind {
            Kind::Gamma { nu, literal } => {
                let scale = if *literal { 1.0 } else { *nu };
                Ok((scale * s).ln_1p() / nu)
            }
            Kind::Atoms { atoms } => Ok(atoms.iter().map(|&(x, m)| -m * (-s * x).exp_m1()).sum()),
            Kind::Scaled { base, factor } => Ok(factor * base.laplace_exponent(s)?),
            _ => self.laplace_exponent_quad(s),
        }
    }

    /// Laplace exponent by quadrature only.
    pub fn laplace_exponent_quad(&self, s: f64) -> Result<f64> {
        self.integrate(|x| -(-s * x).exp_m1(), Tolerance::rel(1e-11).with_abs(1e-15))
    }

    /// Truncation level `L` keeping at least `fraction` of `∫ x Λ(dx)` in the
    /// terms with `Γ_i ≤ L`. Finite measures keep everything at their mass.
    pub fn truncation_for_retained(&self, fraction: f64) -> Result<f64> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(invalid(format!("retained fraction must lie in (0, 1), got {fraction}")));
        }
        let mass = self.total_mass();
        if mass.is_finite() {
            return Ok(mass);
        }
        match &self.kind {
            Kind::Gamma { nu, literal } => {
                let s = if *literal { 1.0 } else { *nu };
                // ∫_0^c x Λ(dx) ∝ 1 - e^{-c/s}.
                let cutoff = -s * (-(1.0 - fraction)).ln_1p();
                Ok(self.tail_unchecked(cutoff))
            }
            Kind::Scaled { base, factor } => Ok(factor * base.truncation_for_retained(fraction)?),
            _ => Ok(mass),
        }
    }

    /// Default truncation level (99.9% retained).
    pub fn default_truncation(&self) -> Result<f64> {
        self.truncation_for_retained(DEFAULT_RETAINED_FRACTION)
    }

    /// Share of `∫ x Λ(dx)` carried by jumps `Λ⁻¹(Γ)` with `Γ ≤ level`.
    pub fn retained_fraction(&self, level: f64) -> Result<f64> {
        let cutoff = self.tail_inverse_unchecked(level);
        let total = self.mean()?;
        if cutoff <= 0.0 {
            return Ok(1.0);
        }
        let kept = self.integrate_from(cutoff, |x| x, Tolerance::default())?;
        // An atom at the cut is only partly reached by arrivals up to `level`.
        let at_cut = self.tail_unchecked(cutoff);
        let excess = (at_cut - level).max(0.0);
        Ok((kept - excess * cutoff) / total)
    }
}

impl fmt::Display for LevyMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Gamma { nu, literal: false } => write!(f, "gamma(nu={nu})"),
            Kind::Gamma { nu, literal: true } => write!(f, "gamma_literal(nu={nu})"),
            Kind::Atoms { atoms } => write!(f, "atoms(n={})", atoms.len()),
            Kind::Density(t) => write!(f, "density_table(n={})", t.xs.len()),
            Kind::Truncated { base, level, cutoff } => write!(f, "truncated(L={level}, cutoff={cutoff}; {base})"),
            Kind::Scaled { base, factor } => write!(f, "scaled(L={factor}; {base})"),
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const E1_AT_1: f64 = 0.219_383_934_395_520_27;

    #[test]
    fn gamma_tail_matches_e1() {
        let g = LevyMeasure::gamma(1.0).unwrap();
        assert!((g.tail(1.0).unwrap() - E1_AT_1).abs() < 1e-12);
        assert!(g.tail(0.0).is_err());
        // u/ν argument versus the literal E1(u)/ν.
        let g2 = LevyMeasure::gamma(2.0).unwrap();
        assert!((g2.tail(2.0).unwrap() - E1_AT_1 / 2.0).abs() < 1e-12);
        let lit = LevyMeasure::gamma_literal(2.0).unwrap();
        assert!((lit.tail(1.0).unwrap() - E1_AT_1 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn truncated_tail_is_flat_below_cut() {
        let base = LevyMeasure::atoms(&[(0.5, 3.0)]).unwrap();
        let t = base.truncate(3.0).unwrap();
        assert_eq!(t.tail(0.1).unwrap(), 3.0);
        assert_eq!(t.tail(0.5).unwrap(), 3.0);
        assert_eq!(t.tail(0.6).unwrap(), 0.0);

        let g = LevyMeasure::gamma(1.0).unwrap();
        let level = 2.0;
        let tg = g.truncate(level).unwrap();
        let cut = tg.cutoff().unwrap();
        for u in [1e-6, 0.01, cut * 0.9] {
            let want = g.tail(cut).unwrap().min(level);
            assert!((tg.tail(u).unwrap() - want).abs() < 1e-9);
        }
        assert!(tg.total_mass() <= level + 1e-9);
        assert_eq!(tg.tail(3.0).unwrap(), g.tail(3.0).unwrap());
    }

    #[test]
    fn scaled_tail() {
        let g = LevyMeasure::gamma(1.0).unwrap().scale(10.0).unwrap();
        assert!((g.tail(1.0).unwrap() - 2.193_839_343_955_203).abs() < 1e-10);
        assert_eq!(g.kind(), MeasureKind::Scaled { factor: 10.0 });
    }

    #[test]
    fn inverse_of_gamma_tail() {
        let g = LevyMeasure::gamma(1.0).unwrap();
        let x = g.tail_inverse(E1_AT_1).unwrap();
        assert!((x - 1.0).abs() < 1e-10, "{x}");
        assert!(g.tail_inverse(0.0).is_err());
    }

    #[test]
    fn inverse_vanishes_beyond_mass() {
        let m = LevyMeasure::atoms(&[(1.0, 1.0), (2.0, 0.5)]).unwrap();
        assert_eq!(m.tail_inverse(1.5).unwrap(), 0.0);
        assert_eq!(m.tail_inverse(7.0).unwrap(), 0.0);
        assert_eq!(m.tail_inverse(0.3).unwrap(), 2.0);
        assert_eq!(m.tail_inverse(0.5).unwrap(), 2.0);
        assert_eq!(m.tail_inverse(0.6).unwrap(), 1.0);
        let t = LevyMeasure::gamma(1.0).unwrap().truncate(3.0).unwrap();
        assert_eq!(t.tail_inverse(3.5).unwrap(), 0.0);
        assert!(t.tail_inverse(2.5).unwrap() > 0.0);
    }

    #[test]
    fn truncation_at_known_level() {
        let g = LevyMeasure::gamma(1.0).unwrap();
        let t = g.truncate(E1_AT_1).unwrap();
        assert!((t.cutoff().unwrap() - 1.0).abs() < 1e-10);
        assert!((t.support_start() - 1.0).abs() < 1e-10);
        // Truncating beyond the mass is the identity.
        let a = LevyMeasure::atoms(&[(1.0, 1.0)]).unwrap();
        assert_eq!(a.truncate(5.0).unwrap(), a);
    }

    #[test]
    fn gamma_normalization() {
        let r = LevyMeasure::gamma(1.0).unwrap().check_normalization().unwrap();
        assert!((r.mean - 1.0).abs() < 1e-8);
        assert!((r.second_moment - 1.0).abs() < 1e-8);
        assert!((r.unit_tail_mean - (-1.0f64).exp()).abs() < 1e-8);
        assert!(r.mean_is_one);
        assert!(!r.unit_tail_mean_is_one);
        let r = LevyMeasure::gamma(1.5).unwrap().check_normalization().unwrap();
        assert!((r.mean - 1.0).abs() < 1e-8);
        assert!((r.second_moment - 1.5).abs() < 1e-8);
        assert!((r.unit_tail_mean - (-1.0f64 / 1.5).exp()).abs() < 1e-8);
    }

    #[test]
    fn atom_normalization() {
        let r = LevyMeasure::atoms(&[(1.0, 1.0)]).unwrap().check_normalization().unwrap();
        assert_eq!(r.second_moment, 1.0);
        assert_eq!(r.unit_tail_mean, 1.0);
        assert!(r.unit_tail_mean_is_one);
        assert!(r.mean_is_one);
    }

    #[test]
    fn density_table_measure() {
        // Uniform density 2 on [0.5, 1.0]: mass 1, mean 0.75.
        let m = LevyMeasure::density_table(&[(0.5, 2.0), (1.0, 2.0)]).unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-15);
        assert!((m.tail(0.75).unwrap() - 0.5).abs() < 1e-15);
        assert!((m.tail_inverse(0.5).unwrap() - 0.75).abs() < 1e-10);
        assert!((m.mean().unwrap() - 0.75).abs() < 1e-12);
        assert!(LevyMeasure::density_table(&[(1.0, 1.0)]).is_err());
        assert!(LevyMeasure::density_table(&[(1.0, 1.0), (0.5, 1.0)]).is_err());
        assert!(LevyMeasure::atoms(&[(0.0, 1.0)]).is_err());
    }

    #[test]
    fn laplace_exponent_routes_agree() {
        for m in [
            LevyMeasure::gamma(1.5).unwrap(),
            LevyMeasure::gamma_literal(0.7).unwrap(),
            LevyMeasure::gamma(2.0).unwrap().scale(3.0).unwrap(),
        ] {
            for s in [0.01, 0.5, 3.0, 40.0] {
                let a = m.laplace_exponent(s).unwrap();
                let b = m.laplace_exponent_quad(s).unwrap();
                assert!((a - b).abs() < 1e-9 * a.max(1.0), "{m}: s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn default_truncation_keeps_retained_share() {
        let g = LevyMeasure::gamma(1.5).unwrap();
        let level = g.default_truncation().unwrap();
        let frac = g.retained_fraction(level).unwrap();
        assert!((frac - DEFAULT_RETAINED_FRACTION).abs() < 1e-8, "{frac}");
    }

    proptest! {
        #[test]
        fn tail_inverse_sandwich(nu in 0.2f64..5.0, lg in -6.0f64..3.0) {
            let m = LevyMeasure::gamma(nu).unwrap();
            let g = 10f64.powf(lg);
            let x = m.tail_inverse(g).unwrap();
            prop_assume!(x > 1e-200);
            let eps = 4.0 * INVERSE_ABS_TOL.max(INVERSE_REL_TOL * x);
            prop_assert!(m.tail(x + eps).unwrap() < g);
            if x > eps {
                prop_assert!(g <= m.tail(x - eps).unwrap());
            }
        }

        #[test]
        fn tail_inverse_non_increasing(nu in 0.2f64..5.0, a in 1e-4f64..20.0, b in 1e-4f64..20.0) {
            let m = LevyMeasure::gamma(nu).unwrap();
            let (g1, g2) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(m.tail_inverse(g1).unwrap() >= m.tail_inverse(g2).unwrap() - 1e-12);
        }

        #[test]
        fn scaling_rescales_inverse(nu in 0.3f64..3.0, factor in 0.1f64..50.0, g in 0.01f64..10.0) {
            let base = LevyMeasure::gamma(nu).unwrap();
            let scaled = base.scale(factor).unwrap();
            let a = scaled.tail_inverse(g).unwrap();
            let b = base.tail_inverse(g / factor).unwrap();
            prop_assert!((a - b).abs() <= 2.0 * INVERSE_ABS_TOL.max(INVERSE_REL_TOL * a));
        }

        #[test]
        fn tail_is_non_increasing(nu in 0.2f64..5.0, u in 1e-6f64..50.0, du in 0.0f64..5.0) {
            let m = LevyMeasure::gamma(nu).unwrap();
            prop_assert!(m.tail(u + du).unwrap() <= m.tail(u).unwrap());
        }

        #[test]
        fn atom_inverse_sandwich(
            pts in proptest::collection::vec((0.01f64..10.0, 0.01f64..3.0), 1..8),
            frac in 0.001f64..0.999,
        ) {
            let m = LevyMeasure::atoms(&pts).unwrap();
            let g = frac * m.total_mass();
            let x = m.tail_inverse(g).unwrap();
            prop_assert!(x > 0.0);
            prop_assert!(m.tail(x).unwrap() >= g);
            prop_assert!(m.tail(x * (1.0 + 1e-12) + 1e-15).unwrap() < g);
        }
    }
}
