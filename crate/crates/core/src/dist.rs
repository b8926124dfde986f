//! Value distributions for a single buyer.

use crate::error::{invalid, Error, Result};
use crate::rng::UniformSource;

/// Absolute tolerance on the total mass of a finite-support distribution.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Absolute tolerance and iteration cap of [`quantile_by_bisection`].
pub const BISECTION_TOLERANCE: f64 = 1e-10;
pub const BISECTION_MAX_ITER: usize = 200;

/// Parametric family of a [`ValueDistribution`].
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Exponential with the given rate (mean `1 / rate`).
    Exponential { rate: f64 },
    /// `F(v) = 1 - 1/(v+1)` below `a`, with the remaining mass `1/(a+1)` as an atom at `a`.
    EqualRevenueTruncated { a: f64 },
    /// Deterministic value.
    PointMass { value: f64 },
    /// Atoms `(value, probability)`, kept sorted by value.
    FiniteSupport { atoms: Vec<(f64, f64)> },
}

/// A buyer's value prior. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueDistribution {
    family: Family,
}

/// Reserve price, its revenue and the median of a single distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularSummary {
    pub reserve: f64,
    pub reserve_revenue: f64,
    pub median: f64,
    /// Set when the median follows the left-median convention of a discrete law
    /// rather than solving `Pr[v >= s] = 1/2` exactly.
    pub median_is_discrete: bool,
}

fn finite_nonneg(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{what} must be a finite nonnegative number, got {x}")))
    }
}

impl ValueDistribution {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        finite_nonneg(lo, "uniform lo")?;
        finite_nonneg(hi, "uniform hi")?;
        if hi <= lo {
            return Err(invalid(format!("uniform needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { family: Family::Uniform { lo, hi } })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(invalid(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(Self { family: Family::Exponential { rate } })
    }

    pub fn equal_revenue(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid(format!("equal-revenue truncation must be positive, got {a}")));
        }
        Ok(Self { family: Family::EqualRevenueTruncated { a } })
    }

    pub fn point(value: f64) -> Result<Self> {
        finite_nonneg(value, "point value")?;
        Ok(Self { family: Family::PointMass { value } })
    }

    pub fn finite(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid("finite support needs at least one atom"));
        }
        let mut total = 0.0;
        for &(v, p) in &atoms {
            finite_nonneg(v, "atom value")?;
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                return Err(invalid(format!("atom probability must lie in [0,1], got {p}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(invalid(format!("atom probabilities sum to {total}, expected 1")));
        }
        let mut atoms = atoms;
        atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(Self { family: Family::FiniteSupport { atoms } })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Least upper bound of the support.
    pub fn support_upper(&self) -> f64 {
        match &self.family {
            Family::Uniform { hi, .. } => *hi,
            Family::Exponential { .. } => f64::INFINITY,
            Family::EqualRevenueTruncated { a } => *a,
            Family::PointMass { value } => *value,
            Family::FiniteSupport { atoms } => atoms.last().map(|a| a.0).unwrap_or(0.0),
        }
    }

    pub fn support_lower(&self) -> f64 {
        match &self.family {
            Family::Uniform { lo, .. } => *lo,
            Family::Exponential { .. } | Family::EqualRevenueTruncated { .. } => 0.0,
            Family::PointMass { value } => *value,
            Family::FiniteSupport { atoms } => atoms[0].0,
        }
    }

    /// True when the law has no atoms.
    pub fn is_continuous(&self) -> bool {
        matches!(self.family, Family::Uniform { .. } | Family::Exponential { .. })
    }

    /// `Pr[value <= v]`.
    pub fn cdf(&self, v: f64) -> f64 {
        if v < 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Uniform { lo, hi } => ((v - lo) / (hi - lo)).clamp(0.0, 1.0),
            Family::Exponential { rate } => -(-rate * v).exp_m1(),
            Family::EqualRevenueTruncated { a } => {
                if v >= *a {
                    1.0
                } else {
                    v / (v + 1.0)
                }
            }
            Family::PointMass { value } => {
                if v >= *value {
                    1.0
                } else {
                    0.0
                }
            }
            Family::FiniteSupport { atoms } => {
                let mass: f64 = atoms.iter().take_while(|a| a.0 <= v).map(|a| a.1).sum();
                mass.min(1.0)
            }
        }
    }

    /// `Pr[value >= x]`, counting an atom at `x`.
    pub fn prob_at_least(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match &self.family {
            Family::Uniform { .. } | Family::Exponential { .. } => 1.0 - self.cdf(x),
            Family::EqualRevenueTruncated { a } => {
                if x > *a {
                    0.0
                } else {
                    1.0 / (x + 1.0)
                }
            }
            Family::PointMass { value } => {
                if x <= *value {
                    1.0
                } else {
                    0.0
                }
            }
            Family::FiniteSupport { atoms } => {
                let mass: f64 = atoms.iter().filter(|a| a.0 >= x).map(|a| a.1).sum();
                mass.min(1.0)
            }
        }
    }

    /// Generalized inverse `inf { v : F(v) >= u }`; `u = 0` maps to the bottom of the support.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(invalid(format!("quantile level must lie in [0,1], got {u}")));
        }
        Ok(self.quantile_unchecked(u))
    }

    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        match &self.family {
            Family::Uniform { lo, hi } => lo + u * (hi - lo),
            Family::Exponential { rate } => -(-u).ln_1p() / rate,
            Family::EqualRevenueTruncated { a } => {
                if u >= a / (a + 1.0) {
                    *a
                } else {
                    u / (1.0 - u)
                }
            }
            Family::PointMass { value } => *value,
            Family::FiniteSupport { atoms } => {
                let mut cum = 0.0;
                for &(v, p) in atoms {
                    cum += p;
                    if cum >= u && p > 0.0 {
                        return v;
                    }
                }
                atoms.iter().rev().find(|a| a.1 > 0.0).map(|a| a.0).unwrap_or(atoms[0].0)
            }
        }
    }

    /// Inverse-transform draw: exactly one uniform per value.
    pub fn sample<S: UniformSource + ?Sized>(&self, stream: &mut S) -> f64 {
        let u = stream.next_uniform();
        self.quantile_unchecked(u)
    }

    /// Value at selling probability `q`, i.e. the price `p` with `Pr[v >= p] = q`.
    pub fn price_at_quantile(&self, q: f64) -> f64 {
        self.quantile_unchecked((1.0 - q).clamp(0.0, 1.0))
    }

    /// `φ(v) = v - (1 - F(v)) / f(v)` on the continuous part of the support.
    pub fn virtual_value(&self, v: f64) -> Result<f64> {
        match &self.family {
            Family::Uniform { lo, hi } => {
                if v < *lo || v > *hi {
                    Err(Error::Unsupported(format!("zero density at {v} outside [{lo}, {hi}]")))
                } else {
                    Ok(2.0 * v - hi)
                }
            }
            Family::Exponential { rate } => {
                if v < 0.0 {
                    Err(Error::Unsupported(format!("zero density at {v}")))
                } else {
                    Ok(v - 1.0 / rate)
                }
            }
            Family::EqualRevenueTruncated { a } => {
                if v >= *a {
                    Err(Error::Unsupported(format!("value {v} lies on the atom at {a}")))
                } else if v < 0.0 {
                    Err(Error::Unsupported(format!("zero density at {v}")))
                } else {
                    // v - (1/(v+1)) / (1/(v+1)^2)
                    Ok(-1.0)
                }
            }
            Family::PointMass { .. } | Family::FiniteSupport { .. } => {
                Err(Error::Unsupported("virtual values are undefined for atomic distributions".into()))
            }
        }
    }

    /// Marginal revenue in quantile space at bid `b`: the virtual value on a density,
    /// the revenue-curve slope across an atom. `-inf` below the support.
    ///
    /// Defined for the regular families used by the optimal auction; finite supports
    /// are rejected because they may need ironing.
    pub(crate) fn marginal_revenue(&self, b: f64) -> Result<f64> {
        Ok(match &self.family {
            Family::Uniform { lo, hi } => {
                if b < *lo {
                    f64::NEG_INFINITY
                } else {
                    2.0 * b - hi
                }
            }
            Family::Exponential { rate } => {
                if b < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    b - 1.0 / rate
                }
            }
            Family::EqualRevenueTruncated { a } => {
                if b >= *a {
                    *a
                } else {
                    -1.0
                }
            }
            Family::PointMass { value } => {
                if b >= *value {
                    *value
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::FiniteSupport { .. } => {
                return Err(Error::Unsupported(
                    "optimal auction is not implemented for finite supports; use the discrete optimum".into(),
                ))
            }
        })
    }

    /// Smallest bid whose marginal revenue reaches `level`, or `+inf` if none does.
    pub(crate) fn min_bid_reaching(&self, level: f64) -> f64 {
        match &self.family {
            Family::Uniform { lo, hi } => ((level + hi) / 2.0).max(*lo),
            Family::Exponential { rate } => (level + 1.0 / rate).max(0.0),
            Family::EqualRevenueTruncated { a } => {
                if -1.0 >= level {
                    0.0
                } else if *a >= level {
                    *a
                } else {
                    f64::INFINITY
                }
            }
            Family::PointMass { value } => {
                if *value >= level {
                    *value
                } else {
                    f64::INFINITY
                }
            }
            Family::FiniteSupport { .. } => f64::INFINITY,
        }
    }

    /// Reserve, reserve revenue and median.
    pub fn regular_summary(&self) -> Result<RegularSummary> {
        Ok(match &self.family {
            Family::Uniform { lo, hi } => {
                let reserve = (hi / 2.0).max(*lo);
                RegularSummary {
                    reserve,
                    reserve_revenue: reserve * (hi - reserve) / (hi - lo),
                    median: 0.5 * (lo + hi),
                    median_is_discrete: false,
                }
            }
            Family::Exponential { rate } => RegularSummary {
                reserve: 1.0 / rate,
                reserve_revenue: (-1.0f64).exp() / rate,
                median: std::f64::consts::LN_2 / rate,
                median_is_discrete: false,
            },
            Family::EqualRevenueTruncated { a } => RegularSummary {
                reserve: *a,
                reserve_revenue: a / (a + 1.0),
                median: a.min(1.0),
                median_is_discrete: *a < 1.0,
            },
            Family::PointMass { value } => {
                RegularSummary { reserve: *value, reserve_revenue: *value, median: *value, median_is_discrete: false }
            }
            Family::FiniteSupport { atoms } => {
                if !finite_support_is_regular(atoms) {
                    return Err(Error::Unsupported(
                        "finite support has a non-concave revenue curve; use the discrete optimum".into(),
                    ));
                }
                let mut reserve = atoms[0].0;
                let mut best = f64::NEG_INFINITY;
                for &(v, _) in atoms {
                    let rev = v * self.prob_at_least(v);
                    if rev > best {
                        best = rev;
                        reserve = v;
                    }
                }
                RegularSummary { reserve, reserve_revenue: best, median: self.left_median(), median_is_discrete: true }
            }
        })
    }

    /// Infimum of `{ s : Pr[v >= s] <= 1/2 }`.
    pub fn left_median(&self) -> f64 {
        match &self.family {
            Family::FiniteSupport { atoms } => {
                atoms.iter().rev().find(|a| self.prob_at_least(a.0) > 0.5).map(|a| a.0).unwrap_or(atoms[0].0)
            }
            _ => self.price_at_quantile(0.5),
        }
    }
}

/// Revenue-curve concavity of a discrete law: the points `(Pr[v >= x], x Pr[v >= x])`
/// over atoms, prefixed by the origin, must have nonincreasing slopes.
fn finite_support_is_regular(atoms: &[(f64, f64)]) -> bool {
    let mut points = vec![(0.0, 0.0)];
    let mut tail = 0.0;
    for &(v, p) in atoms.iter().rev() {
        if p <= 0.0 {
            continue;
        }
        tail += p;
        points.push((tail, v * tail));
    }
    let mut last_slope = f64::INFINITY;
    for w in points.windows(2) {
        let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        if slope > last_slope + 1e-12 {
            return false;
        }
        last_slope = slope;
    }
    true
}

/// Numeric generalized inverse of an arbitrary CDF by bisection on `[lo, hi]`.
pub fn quantile_by_bisection(cdf: impl Fn(f64) -> f64, u: f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if cdf(mid) >= u {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
