//! Vertex-weight laws with finite support, per-vertex weight assignments and
//! the floor/ceiling discretization used to sandwich a general bounded weight.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Deviation of the total mass from 1 that is silently renormalized.
pub const MASS_SUM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub q: f64,
    pub mu: f64,
}

/// Finite-support law of the vertex weight. Atoms are sorted by `q`, pairwise
/// distinct, carry strictly positive mass summing to one, and at least one
/// atom is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightDistribution {
    atoms: Vec<Atom>,
    max_q: f64,
}

impl WeightDistribution {
    /// Build a distribution from `(q, mass)` pairs. Equal `q` values are merged,
    /// zero-mass pairs dropped, and a total mass within [`MASS_SUM_SLACK`] of one
    /// is renormalized.
    pub fn new(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidDistribution("no atoms given".into()));
        }
        for &(q, mu) in pairs {
            if !q.is_finite() || q < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "weight value {q} must be finite and nonnegative"
                )));
            }
            if !mu.is_finite() || mu < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "mass {mu} must be finite and nonnegative"
                )));
            }
        }
        let mut sorted: Vec<(f64, f64)> = pairs.iter().copied().filter(|p| p.1 > 0.0).collect();
        if sorted.is_empty() {
            return Err(Error::InvalidDistribution("all masses are zero".into()));
        }
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut atoms: Vec<Atom> = Vec::with_capacity(sorted.len());
        for (q, mu) in sorted {
            match atoms.last_mut() {
                Some(last) if last.q == q => last.mu += mu,
                _ => atoms.push(Atom { q, mu }),
            }
        }

        let total: f64 = atoms.iter().map(|a| a.mu).sum();
        if (total - 1.0).abs() > MASS_SUM_SLACK {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        for a in &mut atoms {
            a.mu /= total;
        }
        if atoms.iter().all(|a| a.q == 0.0) {
            return Err(Error::ViolatesPositivity);
        }
        let max_q = atoms.last().map(|a| a.q).unwrap_or(0.0);
        Ok(Self { atoms, max_q })
    }

    /// Point mass at `q`.
    pub fn constant(q: f64) -> Result<Self> {
        Self::new(&[(q, 1.0)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Almost-sure upper bound `M1` on the weight.
    pub fn max_weight(&self) -> f64 {
        self.max_q
    }

    /// `E[rho^k]`.
    pub fn moment(&self, k: u32) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.mu * a.q.powi(k as i32))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// `E[x^rho]`, or `E[rho x^rho]` when `weighted` is set.
    pub fn generalized_moment(&self, x: f64, weighted: bool) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("x = {x} must be positive")));
        }
        Ok(self.generalized_moment_unchecked(x, weighted))
    }

    #[inline]
    pub(crate) fn generalized_moment_unchecked(&self, x: f64, weighted: bool) -> f64 {
        self.atoms
            .iter()
            .map(|a| {
                let base = a.mu * x.powf(a.q);
                if weighted {
                    a.q * base
                } else {
                    base
                }
            })
            .sum()
    }

    /// Serialize as the `q:mass, q:mass` config syntax.
    pub fn to_spec_string(&self) -> String {
        self.atoms
            .iter()
            .map(|a| format!("{}:{}", a.q, a.mu))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Parse `q:mass, q:mass, ...`.
    pub fn parse_spec(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (q, m) = item.split_once(':').ok_or_else(|| {
                Error::InvalidDistribution(format!("expected q:mass, got `{item}`"))
            })?;
            let q: f64 = q.trim().parse().map_err(|_| {
                Error::InvalidDistribution(format!("bad weight value `{}`", q.trim()))
            })?;
            let m: f64 = m
                .trim()
                .parse()
                .map_err(|_| Error::InvalidDistribution(format!("bad mass `{}`", m.trim())))?;
            pairs.push((q, m));
        }
        Self::new(&pairs)
    }
}

/// Realized vertex weights. `class_of[i]` indexes `class_values`, and
/// `values[i] == class_values[class_of[i]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightAssignment {
    values: Vec<f64>,
    class_of: Vec<u32>,
    class_values: Vec<f64>,
}

impl WeightAssignment {
    /// Classes are the distinct values, sorted ascending.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Domain(format!("vertex weight {bad} must be finite and nonnegative")));
        }
        let mut class_values = values.clone();
        class_values.sort_by(f64::total_cmp);
        class_values.dedup();
        let class_of = values
            .iter()
            .map(|v| {
                class_values
                    .binary_search_by(|c| c.total_cmp(v))
                    .expect("value present") as u32
            })
            .collect();
        Ok(Self {
            values,
            class_of,
            class_values,
        })
    }

    /// Classes are the atoms of `dist`, even those not realized.
    pub fn from_classes(dist: &WeightDistribution, class_of: Vec<u32>) -> Result<Self> {
        let k = dist.len() as u32;
        if let Some(bad) = class_of.iter().find(|&&c| c >= k) {
            return Err(Error::Dimension(format!("class index {bad} out of range 0..{k}")));
        }
        let class_values: Vec<f64> = dist.atoms().iter().map(|a| a.q).collect();
        let values = class_of.iter().map(|&c| class_values[c as usize]).collect();
        Ok(Self {
            values,
            class_of,
            class_values,
        })
    }

    /// Same weight on every vertex.
    pub fn uniform(n: usize, q: f64) -> Self {
        Self {
            values: vec![q; n],
            class_of: vec![0; n],
            class_values: vec![q],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn class_of(&self) -> &[u32] {
        &self.class_of
    }

    pub fn class_values(&self) -> &[f64] {
        &self.class_values
    }

    pub fn num_classes(&self) -> usize {
        self.class_values.len()
    }

    pub fn max_weight(&self) -> f64 {
        self.class_values.last().copied().unwrap_or(0.0)
    }
}

/// `n` i.i.d. draws from `dist`; deterministic in `seed`.
pub fn sample_assignment(dist: &WeightDistribution, n: usize, seed: u64) -> WeightAssignment {
    let class_values: Vec<f64> = dist.atoms().iter().map(|a| a.q).collect();
    let class_of: Vec<u32> = if dist.len() == 1 {
        vec![0; n]
    } else {
        let index = WeightedIndex::new(dist.atoms().iter().map(|a| a.mu))
            .expect("validated masses");
        let mut rng = rng_from_seed(seed);
        (0..n).map(|_| index.sample(&mut rng) as u32).collect()
    };
    let values = class_of.iter().map(|&c| class_values[c as usize]).collect();
    WeightAssignment {
        values,
        class_of,
        class_values,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rounding {
    /// `floor(m x) / m`
    Lower,
    /// `(floor(m x) + 1) / m`
    Upper,
}

pub fn discretize_value(x: f64, m: u32, direction: Rounding) -> f64 {
    let m = f64::from(m);
    let k = (m * x).floor();
    match direction {
        Rounding::Lower => k / m,
        Rounding::Upper => (k + 1.0) / m,
    }
}

/// Elementwise lower/upper discretization on the grid of spacing `1/m`.
pub fn discretize(samples: &[f64], m: u32, direction: Rounding) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::Domain("discretization level m must be at least 1".into()));
    }
    Ok(samples
        .iter()
        .map(|&x| discretize_value(x, m, direction))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn two_point() -> WeightDistribution {
        WeightDistribution::new(&[(1.0, 0.5), (2.0, 0.5)]).unwrap()
    }

    #[test]
    fn construction_examples() {
        let d = WeightDistribution::new(&[(1.0, 1.0)]).unwrap();
        assert_eq!(d.atoms(), &[Atom { q: 1.0, mu: 1.0 }]);
        assert_eq!(d.max_weight(), 1.0);

        let d = two_point();
        assert_eq!(d.len(), 2);
        assert_eq!(d.max_weight(), 2.0);

        let d = WeightDistribution::new(&[(2.0, 0.5), (1.0, 0.3), (1.0, 0.2)]).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.atoms()[0].q, 1.0);
        assert_abs_diff_eq!(d.atoms()[0].mu, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.atoms()[1].mu, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            WeightDistribution::new(&[(1.0, 0.0), (2.0, 0.0)]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(matches!(
            WeightDistribution::new(&[(1.0, -0.5), (2.0, 1.5)]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(matches!(
            WeightDistribution::new(&[(0.0, 1.0)]),
            Err(Error::ViolatesPositivity)
        ));
        assert!(matches!(
            WeightDistribution::new(&[(1.0, 0.5), (2.0, 0.6)]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(WeightDistribution::new(&[]).is_err());
    }

    #[test]
    fn rounding_slack_is_renormalized() {
        let d = WeightDistribution::new(&[(1.0, 0.5 + 4e-10), (3.0, 0.5)]).unwrap();
        let total: f64 = d.atoms().iter().map(|a| a.mu).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_atom_is_admitted() {
        let d = WeightDistribution::new(&[(0.0, 0.25), (1.0, 0.75)]).unwrap();
        assert_eq!(d.atoms()[0].q, 0.0);
    }

    #[test]
    fn moments() {
        assert_eq!(WeightDistribution::constant(1.0).unwrap().moment(2), 1.0);
        assert_abs_diff_eq!(two_point().moment(1), 1.5);
        assert_abs_diff_eq!(two_point().moment(2), 2.5);
    }

    #[test]
    fn generalized_moments() {
        let d = WeightDistribution::constant(1.0).unwrap();
        assert_abs_diff_eq!(d.generalized_moment(0.5, false).unwrap(), 0.5);
        assert_abs_diff_eq!(two_point().generalized_moment(1.0, false).unwrap(), 1.0);
        assert_abs_diff_eq!(two_point().generalized_moment(0.5, true).unwrap(), 0.5);
        assert!(matches!(
            two_point().generalized_moment(0.0, false),
            Err(Error::Domain(_))
        ));
        assert!(two_point().generalized_moment(-1.0, true).is_err());
    }

    #[test]
    fn spec_string_round_trip() {
        let d = WeightDistribution::parse_spec("1:0.5, 2:0.5").unwrap();
        assert_eq!(d, two_point());
        assert_eq!(WeightDistribution::parse_spec(&d.to_spec_string()).unwrap(), d);
        assert!(WeightDistribution::parse_spec("1-0.5").is_err());
    }

    #[test]
    fn sampling() {
        let d = WeightDistribution::constant(1.0).unwrap();
        assert_eq!(sample_assignment(&d, 5, 3).values(), &[1.0; 5]);

        let d = two_point();
        let a = sample_assignment(&d, 10_000, 42);
        let b = sample_assignment(&d, 10_000, 42);
        assert_eq!(a, b);
        // Binomial(10^4, 1/2): sd 50, so 0.02 is four standard deviations.
        let ones = a.class_of().iter().filter(|&&c| c == 0).count() as f64;
        assert!((ones / 10_000.0 - 0.5).abs() < 0.02);
        for (v, &c) in a.values().iter().zip(a.class_of()) {
            assert_eq!(*v, a.class_values()[c as usize]);
        }
    }

    #[test]
    fn from_values_classes() {
        let w = WeightAssignment::from_values(vec![2.0, 0.5, 2.0, 1.0]).unwrap();
        assert_eq!(w.class_values(), &[0.5, 1.0, 2.0]);
        assert_eq!(w.class_of(), &[2, 0, 2, 1]);
        assert!(WeightAssignment::from_values(vec![-1.0]).is_err());
    }

    #[test]
    fn discretization_examples() {
        let lo = discretize(&[0.37], 10, Rounding::Lower).unwrap()[0];
        let hi = discretize(&[0.37], 10, Rounding::Upper).unwrap()[0];
        assert_abs_diff_eq!(lo, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 0.4, epsilon = 1e-15);
        assert_eq!(discretize_value(1.0, 4, Rounding::Lower), 1.0);
        assert_eq!(discretize_value(1.0, 4, Rounding::Upper), 1.25);
        assert!(discretize(&[1.0], 0, Rounding::Lower).is_err());
    }

    proptest! {
        #[test]
        fn discretization_sandwich(x in 0.0f64..100.0, m in 1u32..10_000) {
            let lo = discretize_value(x, m, Rounding::Lower);
            let hi = discretize_value(x, m, Rounding::Upper);
            prop_assert!(lo <= x && x <= hi);
            prop_assert!((hi - lo - 1.0 / f64::from(m)).abs() < 1e-12 * (1.0 + x));
        }

        #[test]
        fn moment_identities(pairs in prop::collection::vec((0.0f64..5.0, 0.01f64..1.0), 1..6)) {
            let total: f64 = pairs.iter().map(|p| p.1).sum();
            let pairs: Vec<(f64, f64)> = pairs.iter().map(|&(q, m)| (q, m / total)).collect();
            if let Ok(d) = WeightDistribution::new(&pairs) {
                prop_assert!((d.moment(0) - 1.0).abs() < 1e-12);
                prop_assert!((d.generalized_moment(1.0, false).unwrap() - 1.0).abs() < 1e-12);
                prop_assert!((d.generalized_moment(1.0, true).unwrap() - d.moment(1)).abs() < 1e-12);
                prop_assert!(d.atoms().windows(2).all(|w| w[0].q < w[1].q));
            }
        }
    }
}
