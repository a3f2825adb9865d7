//! Discrete distributions on a uniform grid over [0,1], with the divergences
//! and comparison inequalities used throughout the crate.
//!
//! A [`GridDist`] stores probability mass at the points k/M, k = 0..M. The
//! base measure is the counting measure on the grid, so every "density" is a
//! mass vector and all expectations are finite sums. Distributions are
//! immutable after construction and every operation here is a pure function,
//! so values can be shared freely across threads.

use crate::error::{Error, Result};
use rand::Rng;

/// Tolerance for "masses sum to one".
pub const MASS_TOL: f64 = 1e-9;

/// Probability mass vector on the grid {0, 1/M, ..., 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDist {
    mass: Vec<f64>,
}

impl GridDist {
    /// Build from a mass vector of length M+1. Entries must be nonnegative
    /// and sum to 1 within [`MASS_TOL`].
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.len() < 2 {
            return Err(Error::InvalidDistribution(
                "grid needs at least two points (M >= 1)".into(),
            ));
        }
        if mass.iter().any(|&m| m < 0.0 || !m.is_finite()) {
            return Err(Error::InvalidDistribution(
                "mass entries must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "mass sums to {total}, expected 1"
            )));
        }
        Ok(Self { mass })
    }

    /// Point mass at grid index `k`.
    pub fn point_mass(m: usize, k: usize) -> Self {
        assert!(k <= m, "index {k} outside grid of size {m}");
        let mut mass = vec![0.0; m + 1];
        mass[k] = 1.0;
        Self { mass }
    }

    /// Uniform over all M+1 grid points.
    pub fn uniform(m: usize) -> Self {
        Self {
            mass: vec![1.0 / (m + 1) as f64; m + 1],
        }
    }

    /// Two-atom distribution: mass `1-p` at 0 and `p` at 1.
    pub fn bernoulli(m: usize, p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "bernoulli parameter {p}");
        let mut mass = vec![0.0; m + 1];
        mass[0] = 1.0 - p;
        mass[m] += p;
        Self { mass }
    }

    /// Place the given `(value, weight)` atoms on the grid. Off-grid values
    /// are split linearly between the two nearest grid points, which keeps
    /// the mean exact for in-range values; values outside [0,1] are clamped.
    pub fn from_atoms(m: usize, atoms: &[(f64, f64)]) -> Result<Self> {
        let mut mass = vec![0.0; m + 1];
        for &(v, w) in atoms {
            if w < 0.0 || !w.is_finite() || !v.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "bad atom ({v}, {w})"
                )));
            }
            project_atom(&mut mass, m, v, w);
        }
        Self::new(mass)
    }

    /// Largest distance between a requested atom value and its grid snap,
    /// for reporting rounding in instance constructions.
    pub fn atom_rounding_error(m: usize, atoms: &[(f64, f64)]) -> f64 {
        atoms
            .iter()
            .map(|&(v, _)| {
                let vc = v.clamp(0.0, 1.0);
                let k = (vc * m as f64).round();
                (vc - k / m as f64).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Grid size M (the vector has M+1 entries).
    pub fn grid_size(&self) -> usize {
        self.mass.len() - 1
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Value of grid point `k`.
    pub fn value(&self, k: usize) -> f64 {
        k as f64 / self.grid_size() as f64
    }

    /// Grid index nearest to `v` (clamped into [0,1]).
    pub fn index_of(&self, v: f64) -> usize {
        let m = self.grid_size();
        ((v.clamp(0.0, 1.0) * m as f64).round() as usize).min(m)
    }

    /// Mass at the grid point nearest to `v`.
    pub fn mass_at(&self, v: f64) -> f64 {
        self.mass[self.index_of(v)]
    }

    /// Mean: sum_k (k/M) * mass[k].
    pub fn mean(&self) -> f64 {
        let m = self.grid_size() as f64;
        self.mass
            .iter()
            .enumerate()
            .map(|(k, &w)| w * k as f64 / m)
            .sum()
    }

    pub fn second_moment(&self) -> f64 {
        let m = self.grid_size() as f64;
        self.mass
            .iter()
            .enumerate()
            .map(|(k, &w)| {
                let v = k as f64 / m;
                w * v * v
            })
            .sum()
    }

    /// Variance, clamped at zero against negative round-off.
    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        (self.second_moment() - mu * mu).max(0.0)
    }

    /// Nonzero atoms as (index, mass) pairs.
    pub fn support(&self) -> Vec<(usize, f64)> {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(k, &w)| (k, w))
            .collect()
    }

    /// Inverse-CDF lookup: smallest index whose cumulative mass exceeds `u`.
    pub fn quantile_index(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (k, &w) in self.mass.iter().enumerate() {
            acc += w;
            if u < acc {
                return k;
            }
        }
        self.grid_size()
    }

    /// Sample a grid index.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.quantile_index(rng.gen::<f64>())
    }

    /// Sample a grid value.
    pub fn sample_value<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.value(self.sample_index(rng))
    }

    /// Mixture sum_i w[i] * dists[i]; weights must sum to 1.
    pub fn mixture(dists: &[&GridDist], weights: &[f64]) -> GridDist {
        assert_eq!(dists.len(), weights.len());
        assert!(!dists.is_empty());
        let m = dists[0].grid_size();
        let mut mass = vec![0.0; m + 1];
        for (d, &w) in dists.iter().zip(weights) {
            assert_eq!(d.grid_size(), m, "mixture over mismatched grids");
            if w == 0.0 {
                continue;
            }
            for (k, &p) in d.mass.iter().enumerate() {
                mass[k] += w * p;
            }
        }
        GridDist { mass }
    }
}

fn project_atom(mass: &mut [f64], m: usize, v: f64, w: f64) {
    let vc = v.clamp(0.0, 1.0);
    let t = vc * m as f64;
    let lo = t.floor() as usize;
    if lo >= m {
        mass[m] += w;
        return;
    }
    let frac = t - lo as f64;
    mass[lo] += w * (1.0 - frac);
    mass[lo + 1] += w * frac;
}

fn assert_same_grid(p: &GridDist, q: &GridDist) {
    assert_eq!(
        p.grid_size(),
        q.grid_size(),
        "GridDist operations require equal grid sizes"
    );
}

/// Squared Hellinger distance: (1/2) sum_k (sqrt(p_k) - sqrt(q_k))^2, in [0,1].
pub fn hellinger_sq(p: &GridDist, q: &GridDist) -> f64 {
    assert_same_grid(p, q);
    0.5 * p
        .mass
        .iter()
        .zip(&q.mass)
        .map(|(&a, &b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum::<f64>()
}

/// Squared Hellinger distance between Bernoulli(f) and Bernoulli(g).
pub fn bernoulli_hellinger_sq(f: f64, g: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&f) && (0.0..=1.0).contains(&g));
    let a = f.sqrt() - g.sqrt();
    let b = (1.0 - f).sqrt() - (1.0 - g).sqrt();
    0.5 * (a * a + b * b)
}

/// Triangular discrimination: sum_k (p_k - q_k)^2 / (p_k + q_k), in [0,2].
/// Terms with zero denominator contribute zero.
pub fn tri_disc(p: &GridDist, q: &GridDist) -> f64 {
    assert_same_grid(p, q);
    p.mass
        .iter()
        .zip(&q.mass)
        .map(|(&a, &b)| {
            let s = a + b;
            if s == 0.0 {
                0.0
            } else {
                let d = a - b;
                d * d / s
            }
        })
        .sum()
}

/// Distribution of C + Z for independent C ~ `c_dist` and Z ~ `p`, projected
/// back onto the grid. Both inputs share a grid, so every outcome (j+k)/M is
/// itself a grid point; outcomes above 1 have their mass clamped to the grid
/// point 1 (returns are assumed normalized to [0,1] almost surely, so the
/// clamp only absorbs round-off and misspecified instances).
pub fn shift_convolve_project(p: &GridDist, c_dist: &GridDist) -> GridDist {
    assert_same_grid(p, c_dist);
    let m = p.grid_size();
    let mut mass = vec![0.0; m + 1];
    for (j, &wz) in p.mass.iter().enumerate() {
        if wz == 0.0 {
            continue;
        }
        for (k, &wc) in c_dist.mass.iter().enumerate() {
            if wc == 0.0 {
                continue;
            }
            mass[(j + k).min(m)] += wz * wc;
        }
    }
    GridDist { mass }
}

/// Left and right sides of the second-order mean comparison
/// |mean(p) - mean(q)| <= 6 sigma(p) h(p,q) + 8 h^2(p,q). The caller asserts
/// `lhs <= rhs`; note the sigma on the right is taken from the *first*
/// argument.
pub fn second_order_gap_witness(p: &GridDist, q: &GridDist) -> (f64, f64) {
    let h2 = hellinger_sq(p, q);
    let lhs = (p.mean() - q.mean()).abs();
    let rhs = 6.0 * p.variance().sqrt() * h2.sqrt() + 8.0 * h2;
    (lhs, rhs)
}

/// Witnesses for the two triangular-discrimination inequalities, with the
/// arguments swapped internally so that `q` is the smaller-variance side:
///   sigma^2(p) - sigma^2(q) <= 2 sqrt(sigma^2(q) D(p,q)) + D(p,q)
///   |mean(p) - mean(q)|     <= 3 sqrt(sigma^2(q) D(p,q)) + 2 D(p,q)
#[derive(Debug, Clone, Copy)]
pub struct DtriWitnesses {
    pub var_gap: f64,
    pub var_bound: f64,
    pub mean_gap: f64,
    pub mean_bound: f64,
}

pub fn dtri_inequality_witnesses(p: &GridDist, q: &GridDist) -> DtriWitnesses {
    assert_same_grid(p, q);
    let (hi, lo) = if p.variance() >= q.variance() {
        (p, q)
    } else {
        (q, p)
    };
    let d = tri_disc(hi, lo);
    let s2 = lo.variance();
    DtriWitnesses {
        var_gap: hi.variance() - s2,
        var_bound: 2.0 * (s2 * d).sqrt() + d,
        mean_gap: (hi.mean() - lo.mean()).abs(),
        mean_bound: 3.0 * (s2 * d).sqrt() + 2.0 * d,
    }
}

/// Random distribution with independent exponential weights, normalized.
/// Occasionally sparsified so that disjoint-support corner cases show up.
pub fn random_dist<R: Rng + ?Sized>(m: usize, rng: &mut R) -> GridDist {
    let sparse = rng.gen_bool(0.3);
    let mut mass: Vec<f64> = (0..=m)
        .map(|_| {
            if sparse && rng.gen_bool(0.8) {
                0.0
            } else {
                -(rng.gen::<f64>().max(1e-300)).ln()
            }
        })
        .collect();
    let total: f64 = mass.iter().sum();
    if total == 0.0 {
        return GridDist::point_mass(m, rng.gen_range(0..=m));
    }
    mass.iter_mut().for_each(|w| *w /= total);
    GridDist { mass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;
    use proptest::prelude::*;

    fn bern(p: f64) -> GridDist {
        GridDist::bernoulli(100, p)
    }

    #[test]
    fn mean_point_masses_and_coin() {
        assert_eq!(GridDist::point_mass(100, 100).mean(), 1.0);
        assert_eq!(GridDist::point_mass(100, 0).mean(), 0.0);
        assert!((bern(0.5).mean() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn variance_examples() {
        assert_eq!(GridDist::point_mass(100, 37).variance(), 0.0);
        assert!((bern(0.5).variance() - 0.25).abs() < 1e-15);
        // Bernoulli(0.1): p(1-p) = 0.09
        assert!((bern(0.1).variance() - 0.09).abs() < 1e-12);
    }

    #[test]
    fn hellinger_examples() {
        let p = bern(0.3);
        assert_eq!(hellinger_sq(&p, &p), 0.0);
        let h = hellinger_sq(
            &GridDist::point_mass(100, 0),
            &GridDist::point_mass(100, 100),
        );
        assert!((h - 1.0).abs() < 1e-15);
        // Bernoulli(0) vs Bernoulli(0.5): 1 - sqrt(1/2)
        let h = hellinger_sq(&bern(0.0), &bern(0.5));
        assert!((h - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn bernoulli_hellinger_examples() {
        assert_eq!(bernoulli_hellinger_sq(0.5, 0.5), 0.0);
        assert!((bernoulli_hellinger_sq(0.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((bernoulli_hellinger_sq(0.0, 0.5) - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
        // matches the grid version
        let g = hellinger_sq(&bern(0.3), &bern(0.7));
        assert!((bernoulli_hellinger_sq(0.3, 0.7) - g).abs() < 1e-12);
    }

    #[test]
    fn tri_disc_examples() {
        let p = bern(0.2);
        assert_eq!(tri_disc(&p, &p), 0.0);
        let d = tri_disc(
            &GridDist::point_mass(100, 0),
            &GridDist::point_mass(100, 100),
        );
        assert!((d - 2.0).abs() < 1e-15);
    }

    #[test]
    fn convolution_examples() {
        let z = GridDist::point_mass(100, 0);
        let out = shift_convolve_project(&z, &z);
        assert_eq!(out, GridDist::point_mass(100, 0));

        // 0.5 + 0.25 = 0.75 exactly on a grid divisible by 4
        let p = GridDist::point_mass(100, 50);
        let c = GridDist::point_mass(100, 25);
        assert_eq!(shift_convolve_project(&p, &c), GridDist::point_mass(100, 75));
    }

    #[test]
    fn convolution_matches_bruteforce_enumeration() {
        let mut rng = derive_rng(11, &[0]);
        for _ in 0..50 {
            let m = 16;
            let p = random_dist(m, &mut rng);
            let c = random_dist(m, &mut rng);
            let got = shift_convolve_project(&p, &c);
            let mut want = vec![0.0; m + 1];
            for (j, &wz) in p.mass().iter().enumerate() {
                for (k, &wc) in c.mass().iter().enumerate() {
                    want[(j + k).min(m)] += wz * wc;
                }
            }
            for (a, b) in got.mass().iter().zip(&want) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!((got.mass().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn second_order_witness_examples() {
        let p = bern(0.4);
        let (l, r) = second_order_gap_witness(&p, &p);
        assert_eq!((l, r), (0.0, 0.0));
        let (l, r) = second_order_gap_witness(
            &GridDist::point_mass(100, 0),
            &GridDist::point_mass(100, 100),
        );
        assert!((l - 1.0).abs() < 1e-15);
        assert!((r - 8.0).abs() < 1e-12);
    }

    #[test]
    fn dtri_witness_examples() {
        let p = bern(0.6);
        let w = dtri_inequality_witnesses(&p, &p);
        assert_eq!(
            (w.var_gap, w.var_bound, w.mean_gap, w.mean_bound),
            (0.0, 0.0, 0.0, 0.0)
        );
        let w = dtri_inequality_witnesses(&bern(1.0), &GridDist::point_mass(100, 0));
        assert!((w.mean_gap - 1.0).abs() < 1e-15);
        assert!((w.mean_bound - 4.0).abs() < 1e-12);
    }

    #[test]
    fn from_atoms_snaps_and_splits() {
        // exact atom
        let d = GridDist::from_atoms(8, &[(0.5, 1.0)]).unwrap();
        assert_eq!(d, GridDist::point_mass(8, 4));
        // off-grid atom splits between neighbors, preserving the mean
        let d = GridDist::from_atoms(8, &[(0.3, 1.0)]).unwrap();
        assert!((d.mean() - 0.3).abs() < 1e-12);
        assert_eq!(d.support().len(), 2);
        // rounding report
        assert!(GridDist::atom_rounding_error(8, &[(0.5, 1.0)]) < 1e-15);
        assert!(GridDist::atom_rounding_error(8, &[(0.3, 1.0)]) > 0.0);
    }

    #[test]
    fn quantile_is_inverse_cdf() {
        let d = GridDist::from_atoms(10, &[(0.0, 0.25), (0.5, 0.5), (1.0, 0.25)]).unwrap();
        assert_eq!(d.quantile_index(0.0), 0);
        assert_eq!(d.quantile_index(0.24), 0);
        assert_eq!(d.quantile_index(0.26), 5);
        assert_eq!(d.quantile_index(0.74), 5);
        assert_eq!(d.quantile_index(0.76), 10);
        assert_eq!(d.quantile_index(0.999999), 10);
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(GridDist::new(vec![0.5, 0.4]).is_err());
        assert!(GridDist::new(vec![-0.1, 1.1]).is_err());
        assert!(GridDist::new(vec![1.0]).is_err());
    }

    proptest! {
        #[test]
        fn divergences_symmetric_and_sandwiched(seed in 0u64..500) {
            let mut rng = derive_rng(seed, &[1]);
            let p = random_dist(100, &mut rng);
            let q = random_dist(100, &mut rng);
            let h2 = hellinger_sq(&p, &q);
            let d = tri_disc(&p, &q);
            prop_assert_eq!(h2, hellinger_sq(&q, &p));
            prop_assert_eq!(d, tri_disc(&q, &p));
            prop_assert!((0.0..=1.0 + 1e-12).contains(&h2));
            prop_assert!(2.0 * h2 <= d + 1e-12);
            prop_assert!(d <= 4.0 * h2 + 1e-12);
        }

        #[test]
        fn mean_and_variance_in_range(seed in 0u64..500) {
            let mut rng = derive_rng(seed, &[2]);
            let p = random_dist(64, &mut rng);
            prop_assert!((0.0..=1.0).contains(&p.mean()));
            prop_assert!((0.0..=0.25 + 1e-12).contains(&p.variance()));
        }

        #[test]
        fn second_order_lemma_both_orderings(seed in 0u64..500) {
            let mut rng = derive_rng(seed, &[3]);
            let p = random_dist(100, &mut rng);
            let q = random_dist(100, &mut rng);
            let (l, r) = second_order_gap_witness(&p, &q);
            prop_assert!(l <= r + 1e-12);
            let (l, r) = second_order_gap_witness(&q, &p);
            prop_assert!(l <= r + 1e-12);
        }

        #[test]
        fn convolution_preserves_mass(seed in 0u64..200) {
            let mut rng = derive_rng(seed, &[4]);
            let p = random_dist(32, &mut rng);
            let c = random_dist(32, &mut rng);
            let out = shift_convolve_project(&p, &c);
            prop_assert!((out.mass().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
