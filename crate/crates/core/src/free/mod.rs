//! The Lipschitz-free normed space `L(X, ∗)` over a finite pointed space.
//!
//! Elements are molecules: finitely supported rational combinations of the
//! points other than the basepoint, which plays the role of zero. The norm is
//! computed twice, by independent routes:
//!
//! * dual: `max Σ m(x) f(x)` over 1-Lipschitz `f` with `f(∗) = 0`, a linear
//!   program solved by exact simplex;
//! * primal: the cheapest way of writing `m = Σ a_uv (u - v)` with cost
//!   `Σ |a_uv| d(u, v)`, a min-cost transshipment.
//!
//! Isometries of `X` extend uniquely to affine isometries of `L(X, ∗)`; for a
//! finite space `L(X, ∗)` is finite-dimensional, so it is already complete.

pub mod simplex;
pub mod transport;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Sub};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::action::{GroupAction, Isometry};
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, PointedSpace};
use crate::rational::Rational;
use simplex::LinearProgram;
pub use transport::Flow;

/// An element of `L(X, ∗)`. The basepoint never carries a coefficient and
/// zero coefficients are never stored.
#[derive(Clone)]
pub struct Molecule {
    space: Arc<PointedSpace>,
    coeffs: BTreeMap<usize, Rational>,
}

impl PartialEq for Molecule {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.space, &other.space) || self.space == other.space)
            && self.coeffs == other.coeffs
    }
}

impl Eq for Molecule {}

impl fmt::Debug for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .map(|(&x, c)| format!("{c}·{}", self.space.label(x)))
            .collect();
        if terms.is_empty() {
            write!(f, "Molecule(0)")
        } else {
            write!(f, "Molecule({})", terms.join(" + "))
        }
    }
}

impl Molecule {
    pub fn zero(space: Arc<PointedSpace>) -> Self {
        Molecule {
            space,
            coeffs: BTreeMap::new(),
        }
    }

    /// The point `x` as a vector; the basepoint gives the zero molecule.
    pub fn point(space: Arc<PointedSpace>, x: usize) -> Self {
        Molecule::from_terms(space, [(x, Rational::one())])
    }

    /// Sums the terms, dropping anything placed on the basepoint.
    pub fn from_terms<I>(space: Arc<PointedSpace>, terms: I) -> Self
    where
        I: IntoIterator<Item = (usize, Rational)>,
    {
        let base = space.basepoint();
        let mut coeffs: BTreeMap<usize, Rational> = BTreeMap::new();
        for (x, c) in terms {
            assert!(x < space.len(), "point index out of range");
            if x != base {
                *coeffs.entry(x).or_insert_with(Rational::zero) += c;
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        Molecule { space, coeffs }
    }

    /// Builds a molecule from explicit coefficients, rejecting a nonzero
    /// coefficient on the basepoint.
    pub fn new(space: Arc<PointedSpace>, coeffs: BTreeMap<usize, Rational>) -> Result<Self> {
        if let Some(&bad) = coeffs.keys().find(|&&x| x >= space.len()) {
            return Err(Error::Structure(format!("point index {bad} out of range")));
        }
        if coeffs.get(&space.basepoint()).is_some_and(|c| !c.is_zero()) {
            return Err(Error::Structure(
                "the basepoint is zero and takes no coefficient".into(),
            ));
        }
        Ok(Molecule::from_terms(space, coeffs))
    }

    pub fn space(&self) -> &Arc<PointedSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &BTreeMap<usize, Rational> {
        &self.coeffs
    }

    pub fn coeff(&self, x: usize) -> Rational {
        self.coeffs.get(&x).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> Vec<usize> {
        self.coeffs.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `Σ λ_i`, the total coefficient mass.
    pub fn mass(&self) -> Rational {
        self.coeffs.values().sum()
    }

    pub fn scale(&self, s: &Rational) -> Molecule {
        Molecule::from_terms(
            self.space.clone(),
            self.coeffs.iter().map(|(&x, c)| (x, c * s)),
        )
    }

    /// Evaluates the molecule on a function given by its values at every point.
    pub fn pair(&self, f: &[Rational]) -> Rational {
        self.coeffs.iter().map(|(&x, c)| c * &f[x]).sum()
    }

    fn same_space(&self, other: &Molecule) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn try_add(&self, other: &Molecule) -> Result<Molecule> {
        self.same_space(other)?;
        let terms = self
            .coeffs
            .iter()
            .chain(&other.coeffs)
            .map(|(&x, c)| (x, c.clone()));
        Ok(Molecule::from_terms(self.space.clone(), terms))
    }

    pub fn try_sub(&self, other: &Molecule) -> Result<Molecule> {
        self.same_space(other)?;
        let terms = self
            .coeffs
            .iter()
            .map(|(&x, c)| (x, c.clone()))
            .chain(other.coeffs.iter().map(|(&x, c)| (x, -c)));
        Ok(Molecule::from_terms(self.space.clone(), terms))
    }

    pub fn to_labels(&self) -> BTreeMap<String, Rational> {
        self.coeffs
            .iter()
            .map(|(&x, c)| (self.space.label(x).to_string(), c.clone()))
            .collect()
    }

    pub fn from_labels(
        space: Arc<PointedSpace>,
        coeffs: &BTreeMap<String, Rational>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (label, c) in coeffs {
            map.insert(space.index_of(label)?, c.clone());
        }
        Molecule::new(space, map)
    }

    /// Dense coordinates over the non-basepoint points, in index order.
    pub fn coordinates(&self) -> Vec<Rational> {
        non_base_points(&self.space)
            .into_iter()
            .map(|x| self.coeff(x))
            .collect()
    }
}

impl Add for &Molecule {
    type Output = Molecule;
    /// Panics on molecules over different spaces; see [`Molecule::try_add`].
    fn add(self, rhs: &Molecule) -> Molecule {
        self.try_add(rhs).expect("molecules over the same space")
    }
}

impl Sub for &Molecule {
    type Output = Molecule;
    /// Panics on molecules over different spaces; see [`Molecule::try_sub`].
    fn sub(self, rhs: &Molecule) -> Molecule {
        self.try_sub(rhs).expect("molecules over the same space")
    }
}

/// JSON form: `{"space":…,"basepoint":"*","coeffs":{"a":"2","b":"-1"}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeRecord {
    pub space: FiniteMetricSpace,
    pub basepoint: String,
    pub coeffs: BTreeMap<String, Rational>,
}

impl MoleculeRecord {
    pub fn into_molecule(self) -> Result<Molecule> {
        let pointed = Arc::new(PointedSpace::with_label(self.space, &self.basepoint)?);
        Molecule::from_labels(pointed, &self.coeffs)
    }
}

pub(crate) fn non_base_points(space: &PointedSpace) -> Vec<usize> {
    (0..space.len())
        .filter(|&x| x != space.basepoint())
        .collect()
}

/// A 1-Lipschitz function vanishing at the basepoint, by value at every point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct LipschitzWitness(pub Vec<Rational>);

impl LipschitzWitness {
    /// Checks `f(∗) = 0` and `|f(x) - f(y)| <= d(x, y)` on every pair.
    pub fn is_valid(&self, space: &PointedSpace) -> bool {
        let f = &self.0;
        f.len() == space.len()
            && f[space.basepoint()].is_zero()
            && (0..f.len()).all(|x| (0..f.len()).all(|y| (&f[x] - &f[y]).abs() <= *space.d(x, y)))
    }

    pub fn labelled(&self, space: &FiniteMetricSpace) -> BTreeMap<String, Rational> {
        self.0
            .iter()
            .enumerate()
            .map(|(i, v)| (space.label(i).to_string(), v.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualSolution {
    pub norm: Rational,
    pub witness: LipschitzWitness,
}

/// Norm by the Lipschitz-dual linear program.
///
/// Only the support and the basepoint enter the program: any 1-Lipschitz
/// function on that subset extends to the whole space with the same constant
/// (`f(x) = min_y f(y) + d(x, y)`), which is how the returned witness is
/// completed. The substitution `u = f + d(·, ∗)` makes every variable
/// non-negative and every right-hand side non-negative by the triangle
/// inequality, so the slack basis is a feasible start.
pub fn aell_norm_dual(m: &Molecule) -> Result<DualSolution> {
    let space = m.space();
    let base = space.basepoint();
    let vars = m.support();
    let k = vars.len();
    let mut lp = LinearProgram::new(k);
    let to_base: Vec<&Rational> = vars.iter().map(|&x| space.d(x, base)).collect();
    for (i, &x) in vars.iter().enumerate() {
        lp.objective[i] = m.coeff(x);
        lp.add_le(&[(i, Rational::one())], to_base[i] + to_base[i]);
        for (j, &y) in vars.iter().enumerate() {
            if i != j {
                let rhs = space.d(x, y) + to_base[i] - to_base[j];
                lp.add_le(&[(i, Rational::one()), (j, -Rational::one())], rhs);
            }
        }
    }
    let opt = lp.maximize()?;
    let offset: Rational = vars
        .iter()
        .enumerate()
        .map(|(i, &x)| m.coeff(x) * to_base[i])
        .sum();
    let norm = opt.value - offset;

    let mut anchors: Vec<(usize, Rational)> = vec![(base, Rational::zero())];
    anchors.extend(
        vars.iter()
            .enumerate()
            .map(|(i, &x)| (x, &opt.x[i] - to_base[i])),
    );
    let witness = (0..space.len())
        .map(|z| {
            anchors
                .iter()
                .map(|(y, fy)| fy + space.d(*y, z))
                .min()
                .expect("anchors include the basepoint")
        })
        .collect();
    Ok(DualSolution {
        norm,
        witness: LipschitzWitness(witness),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimalSolution {
    pub cost: Rational,
    pub plan: Vec<Flow>,
}

/// Norm as the cheapest representation `m = Σ a_uv (u - v)`: a transshipment
/// with imbalance `m(x)` at each point and `-Σ m` at the basepoint, through
/// every point of the space.
pub fn aell_norm_primal(m: &Molecule) -> Result<PrimalSolution> {
    let space = m.space();
    let mut supply: Vec<Rational> = (0..space.len()).map(|x| m.coeff(x)).collect();
    supply[space.basepoint()] = -m.mass();
    let t = transport::min_cost_transshipment(space.matrix(), &supply)?;
    Ok(PrimalSolution {
        cost: t.cost,
        plan: t.flows,
    })
}

pub fn aell_norm(m: &Molecule) -> Result<Rational> {
    Ok(aell_norm_dual(m)?.norm)
}

pub fn norm_distance(a: &Molecule, b: &Molecule) -> Result<Rational> {
    aell_norm(&a.try_sub(b)?)
}

/// The unique affine extension of an isometry `g` of `X` to `L(X, ∗)`:
/// `Σ λ_i x_i ↦ Σ λ_i g(x_i) + (1 - Σ λ_i) g(∗)`.
pub fn affine_extend(g: &Isometry, m: &Molecule) -> Result<Molecule> {
    g.check(m.space())?;
    let space = m.space().clone();
    let tail = Rational::one() - m.mass();
    let terms = m
        .coeffs
        .iter()
        .map(|(&x, c)| (g.apply(x), c.clone()))
        .chain(std::iter::once((g.apply(space.basepoint()), tail)));
    Ok(Molecule::from_terms(space, terms))
}

/// `m ↦ linear · m + translation` in coordinates over the non-basepoint points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMap {
    space: Arc<PointedSpace>,
    /// `columns[j]` is the image of the j-th basis vector under the linear part.
    columns: Vec<Vec<Rational>>,
    translation: Molecule,
}

impl AffineMap {
    pub fn from_isometry(space: Arc<PointedSpace>, g: &Isometry) -> Result<Self> {
        g.check(&space)?;
        let g = g.clone();
        decompose_affine(space, move |m| {
            affine_extend(&g, m).expect("checked isometry")
        })
    }

    pub fn apply(&self, m: &Molecule) -> Result<Molecule> {
        if !(Arc::ptr_eq(&self.space, m.space()) || *self.space == **m.space()) {
            return Err(Error::SpaceMismatch);
        }
        let coords = m.coordinates();
        let basis = non_base_points(&self.space);
        let mut out = self.translation.coordinates();
        for (j, c) in coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (i, v) in self.columns[j].iter().enumerate() {
                out[i] += c * v;
            }
        }
        Ok(Molecule::from_terms(
            self.space.clone(),
            basis.into_iter().zip(out),
        ))
    }

    /// Rows indexed by output coordinate, columns by input coordinate.
    pub fn linear_matrix(&self) -> Vec<Vec<Rational>> {
        let n = self.columns.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.columns[j][i].clone()).collect())
            .collect()
    }

    pub fn translation(&self) -> &Molecule {
        &self.translation
    }

    pub fn is_linear(&self) -> bool {
        self.translation.is_zero()
    }

    /// The same map with the translation removed.
    pub fn linear_part(&self) -> AffineMap {
        AffineMap {
            space: self.space.clone(),
            columns: self.columns.clone(),
            translation: Molecule::zero(self.space.clone()),
        }
    }
}

/// Splits a map of `L(X, ∗)` into translation `ψ(0)` and linear part
/// `m ↦ ψ(m) - ψ(0)`, after probing affinity on pseudo-random triples.
pub fn decompose_affine<F>(space: Arc<PointedSpace>, psi: F) -> Result<AffineMap>
where
    F: Fn(&Molecule) -> Molecule,
{
    let zero = Molecule::zero(space.clone());
    let translation = psi(&zero);
    let columns: Vec<Vec<Rational>> = non_base_points(&space)
        .into_iter()
        .map(|x| (&psi(&Molecule::point(space.clone(), x)) - &translation).coordinates())
        .collect();
    let map = AffineMap {
        space: space.clone(),
        columns,
        translation,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_af1e);
    let random_molecule = |rng: &mut ChaCha8Rng| {
        let terms: Vec<(usize, Rational)> = (0..space.len())
            .map(|x| {
                (
                    x,
                    Rational::new(rng.gen_range(-6..=6), rng.gen_range(1..=4)),
                )
            })
            .collect();
        Molecule::from_terms(space.clone(), terms)
    };
    for _ in 0..8 {
        let a = random_molecule(&mut rng);
        let b = random_molecule(&mut rng);
        let t = Rational::new(rng.gen_range(-3..=5), rng.gen_range(1..=3));
        let one_minus_t = Rational::one() - &t;
        let mix = &a.scale(&t) + &b.scale(&one_minus_t);
        let expected = &psi(&a).scale(&t) + &psi(&b).scale(&one_minus_t);
        if psi(&mix) != expected {
            return Err(Error::NotAffine(format!(
                "fails on {a:?}, {b:?} at t = {t}"
            )));
        }
        if map.apply(&a)? != psi(&a) {
            return Err(Error::NotAffine(format!("recomposition differs at {a:?}")));
        }
    }
    Ok(map)
}

/// The linear isometric isomorphism `L(X, ∗) → L(X, ⋆)` induced by
/// `x ↦ x - ∗ + ⋆`: in the new coordinates `Σ λ_i x_i ↦ Σ λ_i x_i - (Σ λ_i) ∗`.
pub fn rebase(m: &Molecule, new_basepoint: usize) -> Result<Molecule> {
    let old = m.space();
    if new_basepoint >= old.len() {
        return Err(Error::Structure(format!(
            "point index {new_basepoint} out of range"
        )));
    }
    let target = Arc::new(PointedSpace::new(old.space().clone(), new_basepoint)?);
    let terms = m
        .coeffs
        .iter()
        .map(|(&x, c)| (x, c.clone()))
        .chain(std::iter::once((old.basepoint(), -m.mass())));
    Ok(Molecule::from_terms(target, terms))
}

/// Re-expresses the affine point `∗ + m` relative to a new origin `⋆`:
/// `Σ λ_i x_i ↦ Σ λ_i x_i + (1 - Σ λ_i) ∗`. Preserves distances but not norms;
/// the zero molecule goes to the point `∗`.
pub fn rebase_affine(m: &Molecule, new_basepoint: usize) -> Result<Molecule> {
    let linear = rebase(m, new_basepoint)?;
    let star = Molecule::point(linear.space().clone(), m.space().basepoint());
    Ok(&linear + &star)
}

/// Certified lower bound for `‖g̃v - w‖` when `g` moves `Φ ∪ {∗}` by `ε₀`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MovingBound {
    pub epsilon0: Rational,
    /// `⟨g̃v - w, h⟩` for the witness `h`.
    pub bound: Rational,
    pub witness: LipschitzWitness,
}

/// Pairs `g̃v - w` with `h(x) = min { ε₀, d(x, Φ ∪ {∗}) }`, a 1-Lipschitz
/// function that is 0 on `Φ ∪ {∗}` and `ε₀` on its image under `g`.
pub fn moving_lower_bound(
    phi: &[usize],
    g: &Isometry,
    eps0: &Rational,
    v: &Molecule,
    w: &Molecule,
) -> Result<MovingBound> {
    v.same_space(w)?;
    let space = v.space();
    g.check(space)?;
    if eps0.is_negative() {
        return Err(Error::Precondition("epsilon_0 must be non-negative".into()));
    }
    let mut set: Vec<usize> = phi.to_vec();
    set.push(space.basepoint());
    set.sort_unstable();
    set.dedup();
    for m in [v, w] {
        if let Some(x) = m
            .support()
            .into_iter()
            .find(|x| set.binary_search(x).is_err())
        {
            return Err(Error::Precondition(format!(
                "molecule has support at {} outside Φ ∪ {{∗}}",
                space.label(x)
            )));
        }
    }
    let moved = g.image_of(&set);
    let gap = space.set_distance(&set, &moved)?;
    if gap < *eps0 {
        return Err(Error::Precondition(format!(
            "d(Φ ∪ {{∗}}, g(Φ ∪ {{∗}})) = {gap} < ε₀ = {eps0}"
        )));
    }
    let h: Vec<Rational> = (0..space.len())
        .map(|x| {
            let dx = space.point_set_distance(x, &set).expect("non-empty set");
            if dx < *eps0 {
                dx
            } else {
                eps0.clone()
            }
        })
        .collect();
    let witness = LipschitzWitness(h);
    if !witness.is_valid(space) {
        return Err(Error::Domain("distance witness is not 1-Lipschitz".into()));
    }
    let diff = affine_extend(g, v)?.try_sub(w)?;
    Ok(MovingBound {
        epsilon0: eps0.clone(),
        bound: diff.pair(&witness.0),
        witness,
    })
}

/// The barycenter `(1/|G|) Σ_g g̃(seed)` of an orbit of a finite group acting
/// by affine isometries, checked to be fixed by every element.
pub fn fixed_point(action: &GroupAction, seed: &Molecule) -> Result<Molecule> {
    if action.space() != seed.space().space() {
        return Err(Error::SpaceMismatch);
    }
    let mut sum = Molecule::zero(seed.space().clone());
    for g in action.images() {
        sum = &sum + &affine_extend(g, seed)?;
    }
    let order = Rational::from_integer(action.group().order() as i64);
    let bary = sum.scale(&order.recip());
    if !is_fixed(action, &bary)? {
        return Err(Error::Domain(
            "barycenter is not fixed by the action".into(),
        ));
    }
    Ok(bary)
}

pub fn is_fixed(action: &GroupAction, m: &Molecule) -> Result<bool> {
    for g in action.images() {
        if affine_extend(g, m)? != *m {
            return Ok(false);
        }
    }
    Ok(true)
}
