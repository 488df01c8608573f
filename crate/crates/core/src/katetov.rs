//! Katětov functions over finite spaces and the one-step extension `X*`.
//!
//! A Katětov function `f` on `Y` satisfies `|f(x) - f(y)| <= d(x, y) <= f(x) + f(y)`
//! and describes the distances from one new point to the points of `Y`. The
//! hat extension `f̂(x) = min_y f(y) + d(y, x)` is the largest Katětov function
//! on the whole space agreeing with `f` on `Y`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::action::Isometry;
use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::rational::Rational;

/// Which half of the Katětov condition fails for a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KatetovSide {
    /// `|f(x) - f(y)| > d(x, y)`
    Lipschitz,
    /// `d(x, y) > f(x) + f(y)`
    Sum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KatetovViolation {
    pub x: String,
    pub y: String,
    pub side: KatetovSide,
}

/// Checks the Katětov condition on every pair of `support`. Negative values
/// are a domain error rather than a violation.
pub fn is_katetov(
    space: &FiniteMetricSpace,
    support: &[usize],
    values: &[Rational],
) -> Result<Option<KatetovViolation>> {
    if support.len() != values.len() {
        return Err(Error::Structure(
            "support and values differ in length".into(),
        ));
    }
    if let Some(&bad) = support.iter().find(|&&i| i >= space.len()) {
        return Err(Error::Structure(format!("point index {bad} out of range")));
    }
    if let Some(i) = values.iter().position(Rational::is_negative) {
        return Err(Error::Domain(format!(
            "negative value {} at {}",
            values[i],
            space.label(support[i])
        )));
    }
    for i in 0..support.len() {
        for j in i + 1..support.len() {
            let d = space.d(support[i], support[j]);
            let side = if (&values[i] - &values[j]).abs() > *d {
                Some(KatetovSide::Lipschitz)
            } else if *d > &values[i] + &values[j] {
                Some(KatetovSide::Sum)
            } else {
                None
            };
            if let Some(side) = side {
                return Ok(Some(KatetovViolation {
                    x: space.label(support[i]).to_string(),
                    y: space.label(support[j]).to_string(),
                    side,
                }));
            }
        }
    }
    Ok(None)
}

/// A Katětov function with an explicit support inside an ambient space.
/// The support is kept sorted by point index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KatetovFunction {
    support: Vec<usize>,
    values: Vec<Rational>,
}

impl KatetovFunction {
    pub fn new(
        space: &FiniteMetricSpace,
        support: Vec<usize>,
        values: Vec<Rational>,
    ) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptySet("Katetov support"));
        }
        let mut pairs: Vec<(usize, Rational)> = support.into_iter().zip(values).collect();
        pairs.sort_by_key(|(i, _)| *i);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Structure("repeated support point".into()));
        }
        let (support, values): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        if let Some(v) = is_katetov(space, &support, &values)? {
            return Err(Error::NotKatetov(format!(
                "{:?} side fails at ({}, {})",
                v.side, v.x, v.y
            )));
        }
        Ok(KatetovFunction { support, values })
    }

    /// The distance-to-`x` function on the one-point support `{x}` with value 0.
    pub fn point(x: usize) -> Self {
        KatetovFunction {
            support: vec![x],
            values: vec![Rational::zero()],
        }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, x: usize) -> Option<&Rational> {
        self.support.binary_search(&x).ok().map(|i| &self.values[i])
    }

    pub fn is_total(&self, space: &FiniteMetricSpace) -> bool {
        self.support.len() == space.len()
    }

    pub fn to_record(&self, space: &FiniteMetricSpace) -> KatetovRecord {
        KatetovRecord {
            support: self
                .support
                .iter()
                .map(|&i| space.label(i).to_string())
                .collect(),
            values: self
                .support
                .iter()
                .zip(&self.values)
                .map(|(&i, v)| (space.label(i).to_string(), v.clone()))
                .collect(),
        }
    }

    pub fn from_record(space: &FiniteMetricSpace, rec: &KatetovRecord) -> Result<Self> {
        let support = space.indices_of(&rec.support)?;
        let values =
            rec.support
                .iter()
                .map(|l| {
                    rec.values.get(l).cloned().ok_or_else(|| {
                        Error::Structure(format!("no value for support point {l:?}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
        if rec.values.len() != rec.support.len() {
            return Err(Error::Structure("values given outside the support".into()));
        }
        KatetovFunction::new(space, support, values)
    }
}

/// JSON form: `{"support":["a"],"values":{"a":"1"}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KatetovRecord {
    pub support: Vec<String>,
    pub values: BTreeMap<String, Rational>,
}

/// `f̂(x) = min_{y in Y} f(y) + d(y, x)` over every point of the space.
pub fn hat_values(space: &FiniteMetricSpace, f: &KatetovFunction) -> Vec<Rational> {
    (0..space.len())
        .map(|x| {
            f.support
                .iter()
                .zip(&f.values)
                .map(|(&y, fy)| fy + space.d(y, x))
                .min()
                .expect("support is non-empty")
        })
        .collect()
}

pub fn hat_extension(space: &FiniteMetricSpace, f: &KatetovFunction) -> KatetovFunction {
    KatetovFunction {
        support: (0..space.len()).collect(),
        values: hat_values(space, f),
    }
}

/// `max_x |f(x) - g(x)|` for two functions on the same support.
pub fn sup_distance(f: &KatetovFunction, g: &KatetovFunction) -> Result<Rational> {
    if f.support != g.support {
        return Err(Error::Domain(
            "sup distance needs functions on the same support".into(),
        ));
    }
    Ok(sup_of_diff(&f.values, &g.values))
}

fn sup_of_diff(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// `g·f = f ∘ g⁻¹`, supported on `g(Y)`.
pub fn act_on_katetov(
    space: &FiniteMetricSpace,
    g: &Isometry,
    f: &KatetovFunction,
) -> Result<KatetovFunction> {
    g.check(space)?;
    let mut pairs: Vec<(usize, Rational)> = f
        .support
        .iter()
        .zip(&f.values)
        .map(|(&y, v)| (g.apply(y), v.clone()))
        .collect();
    pairs.sort_by_key(|(i, _)| *i);
    let (support, values) = pairs.into_iter().unzip();
    Ok(KatetovFunction { support, values })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropKReport {
    pub gap: Rational,
    pub epsilon: Rational,
    pub certified: bool,
}

/// Compares `‖φ̂ - ψ̂‖` with `d(A, B)` for Katětov functions on `A` and `B`.
pub fn prop_k_gap(
    space: &FiniteMetricSpace,
    phi: &KatetovFunction,
    psi: &KatetovFunction,
) -> Result<PropKReport> {
    let epsilon = space.set_distance(&phi.support, &psi.support)?;
    let gap = sup_of_diff(&hat_values(space, phi), &hat_values(space, psi));
    Ok(PropKReport {
        certified: gap >= epsilon,
        gap,
        epsilon,
    })
}

/// Where an added point of a star fragment came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub label: String,
    #[serde(flatten)]
    pub function: KatetovRecord,
}

/// The space `X ∪ {p_1, ..., p_k}` where `p_i` realizes the hat extension of
/// the i-th attached function and new points are compared by sup distance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StarFragment {
    pub space: FiniteMetricSpace,
    pub provenance: Vec<Provenance>,
    /// Attachments skipped because their hat extension was already present,
    /// paired with the label of the point that realizes them.
    pub merged: Vec<(KatetovRecord, String)>,
}

/// Builds the star fragment for the given attachments. Attachments whose hat
/// extension coincides with an existing point or an earlier attachment are
/// merged, so the result stays a metric when `X` is one.
pub fn star_fragment(
    space: &FiniteMetricSpace,
    attachments: &[KatetovFunction],
    prefix: &str,
) -> Result<StarFragment> {
    let n = space.len();
    let mut hats: Vec<Vec<Rational>> = (0..n)
        .map(|x| (0..n).map(|z| space.d(x, z).clone()).collect())
        .collect();
    let mut labels: Vec<String> = space.labels().to_vec();
    let mut index: BTreeMap<Vec<Rational>, usize> = BTreeMap::new();
    if !space.is_pseudo() {
        for (x, h) in hats.iter().enumerate() {
            index.insert(h.clone(), x);
        }
    }
    let mut provenance = Vec::new();
    let mut merged = Vec::new();
    let mut counter = 0usize;
    for f in attachments {
        let h = hat_values(space, f);
        if let Some(&existing) = index.get(&h) {
            merged.push((f.to_record(space), labels[existing].clone()));
            continue;
        }
        let label = loop {
            let candidate = format!("{prefix}{counter}");
            counter += 1;
            if !labels.contains(&candidate) {
                break candidate;
            }
        };
        index.insert(h.clone(), hats.len());
        hats.push(h);
        provenance.push(Provenance {
            label: label.clone(),
            function: f.to_record(space),
        });
        labels.push(label);
    }

    let total = hats.len();
    let mut dist = vec![vec![Rational::zero(); total]; total];
    for i in 0..total {
        for j in 0..total {
            dist[i][j] = if i < n && j < n {
                space.d(i, j).clone()
            } else if i < n {
                hats[j][i].clone()
            } else if j < n {
                hats[i][j].clone()
            } else {
                sup_of_diff(&hats[i], &hats[j])
            };
        }
    }
    let result = FiniteMetricSpace::new(labels, dist, space.is_pseudo())?;
    Ok(StarFragment {
        space: result,
        provenance,
        merged,
    })
}

/// Finite enumeration policy for one tower level: supports of size at most
/// `support_size`, values `0, step, 2·step, ...` up to `cap`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerPolicy {
    pub support_size: usize,
    pub step: Rational,
    pub cap: Rational,
    pub budget: usize,
}

impl TowerPolicy {
    fn grid(&self) -> Result<Vec<Rational>> {
        if !self.step.is_positive() {
            return Err(Error::Precondition("grid step must be positive".into()));
        }
        let mut out = Vec::new();
        let mut v = Rational::zero();
        while v <= self.cap {
            out.push(v.clone());
            v += &self.step;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tower {
    pub space: FiniteMetricSpace,
    /// Provenance of the points added at each level, relative to the previous level.
    pub levels: Vec<Vec<Provenance>>,
}

/// Iterates the star fragment `depth` times, attaching every policy-admissible
/// Katětov function at each level. This is a finite under-approximation of
/// the Katětov tower.
pub fn tower(space: &FiniteMetricSpace, depth: usize, policy: &TowerPolicy) -> Result<Tower> {
    let grid = policy.grid()?;
    let mut current = space.clone();
    let mut levels = Vec::new();
    if current.len() > policy.budget {
        return Err(Error::BudgetExceeded {
            needed: current.len(),
            budget: policy.budget,
        });
    }
    for level in 0..depth {
        let attachments = admissible_functions(&current, policy, &grid)?;
        let frag = star_fragment(&current, &attachments, &format!("t{}.", level + 1))?;
        current = frag.space;
        levels.push(frag.provenance);
    }
    Ok(Tower {
        space: current,
        levels,
    })
}

/// All Katětov functions with support size in `1..=support_size` and values on
/// the grid, supports in size-then-lexicographic order, values lexicographic.
/// Fails once the number of distinct hat extensions would overflow the budget.
fn admissible_functions(
    space: &FiniteMetricSpace,
    policy: &TowerPolicy,
    grid: &[Rational],
) -> Result<Vec<KatetovFunction>> {
    let n = space.len();
    let mut out = Vec::new();
    let mut distinct: std::collections::BTreeSet<Vec<Rational>> = (0..n)
        .map(|x| (0..n).map(|z| space.d(x, z).clone()).collect())
        .collect();
    for size in 1..=policy.support_size.min(n) {
        for support in combinations(n, size) {
            let mut digits = vec![0usize; size];
            loop {
                let values: Vec<Rational> = digits.iter().map(|&d| grid[d].clone()).collect();
                if is_katetov(space, &support, &values)?.is_none() {
                    let f = KatetovFunction {
                        support: support.clone(),
                        values,
                    };
                    if distinct.insert(hat_values(space, &f)) && distinct.len() > policy.budget {
                        return Err(Error::BudgetExceeded {
                            needed: distinct.len(),
                            budget: policy.budget,
                        });
                    }
                    out.push(f);
                }
                if !advance(&mut digits, grid.len()) {
                    break;
                }
            }
        }
    }
    Ok(out)
}

fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// k-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}
