//! Left-invariant pseudometrics on finite groups, the quotient metric space
//! `G/d = G/H` with its translation action, pullbacks of actions, and the
//! covering search `F·V·F = G`.
//!
//! For finite groups every covering question has a positive answer, so the
//! point here is to exercise the mechanics: which `F` cover, and how far a
//! `g` outside `Φ·V·Φ` pushes `Φ` in the quotient.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::action::{GroupAction, Isometry};
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupRecord};
use crate::katetov::combinations;
use crate::metric::{self, FiniteMetricSpace};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PseudometricRecord", into = "PseudometricRecord")]
pub struct InvariantPseudometric {
    group: FiniteGroup,
    dist: Vec<Vec<Rational>>,
}

/// A group record with the pseudometric matrix alongside the table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PseudometricRecord {
    #[serde(flatten)]
    pub group: GroupRecord,
    pub pseudometric: Vec<Vec<Rational>>,
}

impl TryFrom<PseudometricRecord> for InvariantPseudometric {
    type Error = Error;
    fn try_from(r: PseudometricRecord) -> Result<Self> {
        InvariantPseudometric::new(FiniteGroup::try_from(r.group)?, r.pseudometric)
    }
}

impl From<InvariantPseudometric> for PseudometricRecord {
    fn from(p: InvariantPseudometric) -> Self {
        PseudometricRecord {
            group: p.group.into(),
            pseudometric: p.dist,
        }
    }
}

impl InvariantPseudometric {
    /// Checks the pseudometric axioms and `d(kg, kh) = d(g, h)`.
    pub fn new(group: FiniteGroup, dist: Vec<Vec<Rational>>) -> Result<Self> {
        if let Some(v) = metric::validate(group.labels(), &dist, true)? {
            return Err(Error::Axiom(v));
        }
        let n = group.order();
        for k in 0..n {
            for g in 0..n {
                for h in 0..n {
                    if dist[group.mul(k, g)][group.mul(k, h)] != dist[g][h] {
                        return Err(Error::NotInvariant(format!(
                            "d({k}{g}, {k}{h}) != d({g}, {h})",
                            k = group.label(k),
                            g = group.label(g),
                            h = group.label(h)
                        )));
                    }
                }
            }
        }
        Ok(InvariantPseudometric { group, dist })
    }

    /// `d(g, h) = ℓ(g⁻¹h)` for a length function `ℓ` indexed by element.
    pub fn from_length(group: FiniteGroup, length: &[Rational]) -> Result<Self> {
        let n = group.order();
        if length.len() != n {
            return Err(Error::Structure("one length per group element".into()));
        }
        let dist = (0..n)
            .map(|g| {
                (0..n)
                    .map(|h| length[group.mul(group.inv(g), h)].clone())
                    .collect()
            })
            .collect();
        InvariantPseudometric::new(group, dist)
    }

    /// 0 on the diagonal, 1 elsewhere.
    pub fn discrete(group: FiniteGroup) -> Self {
        let length = (0..group.order())
            .map(|g| {
                if g == group.identity() {
                    Rational::zero()
                } else {
                    Rational::one()
                }
            })
            .collect::<Vec<_>>();
        InvariantPseudometric::from_length(group, &length).expect("discrete metric")
    }

    pub fn zero(group: FiniteGroup) -> Self {
        let length = vec![Rational::zero(); group.order()];
        InvariantPseudometric::from_length(group, &length).expect("zero pseudometric")
    }

    /// `d(g, h) = 0` if `g⁻¹h ∈ H`, else 1.
    pub fn subgroup_indicator(group: FiniteGroup, subgroup: &BTreeSet<usize>) -> Result<Self> {
        if !group.is_subgroup(subgroup) {
            return Err(Error::Group("indicator set is not a subgroup".into()));
        }
        let length = (0..group.order())
            .map(|g| {
                if subgroup.contains(&g) {
                    Rational::zero()
                } else {
                    Rational::one()
                }
            })
            .collect::<Vec<_>>();
        InvariantPseudometric::from_length(group, &length)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    pub fn d(&self, g: usize, h: usize) -> &Rational {
        &self.dist[g][h]
    }

    /// `{ g : d(g, e) < radius }`.
    pub fn open_ball(&self, radius: &Rational) -> Vec<usize> {
        let e = self.group.identity();
        (0..self.group.order())
            .filter(|&g| self.dist[g][e] < *radius)
            .collect()
    }

    /// The group as a pseudometric space, points labelled by element.
    pub fn as_space(&self) -> FiniteMetricSpace {
        FiniteMetricSpace::new(self.group.labels().to_vec(), self.dist.clone(), true)
            .expect("validated at construction")
    }
}

/// `H = { g : d(g, e) = 0 }`, verified to be a subgroup.
pub fn kernel_subgroup(pm: &InvariantPseudometric) -> Result<BTreeSet<usize>> {
    let e = pm.group.identity();
    let h: BTreeSet<usize> = (0..pm.group.order())
        .filter(|&g| pm.dist[g][e].is_zero())
        .collect();
    if !pm.group.is_subgroup(&h) {
        return Err(Error::NotInvariant(
            "zero set of the pseudometric is not a subgroup".into(),
        ));
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    pub kernel: BTreeSet<usize>,
    /// Left cosets `gH`, sorted, ordered by smallest member.
    pub cosets: Vec<Vec<usize>>,
    /// `coset_of[g]` is the index of `gH` in `cosets`.
    pub coset_of: Vec<usize>,
    /// Points labelled by the smallest representative of each coset.
    pub space: FiniteMetricSpace,
    /// `k · gH = (kg)H`.
    pub action: GroupAction,
}

/// The metric space of cosets with `d(gH, kH) = d(g, k)`, checked to be
/// independent of the representatives, together with the left translation
/// action, checked to be isometric and transitive.
pub fn quotient_space(pm: &InvariantPseudometric) -> Result<Quotient> {
    let group = &pm.group;
    let kernel = kernel_subgroup(pm)?;
    let cosets = group.left_cosets(&kernel);
    let mut coset_of = vec![0; group.order()];
    for (i, c) in cosets.iter().enumerate() {
        for &g in c {
            coset_of[g] = i;
        }
    }
    let m = cosets.len();
    let mut dist = vec![vec![Rational::zero(); m]; m];
    for i in 0..m {
        for j in 0..m {
            let value = pm.d(cosets[i][0], cosets[j][0]);
            for &g in &cosets[i] {
                for &k in &cosets[j] {
                    if pm.d(g, k) != value {
                        return Err(Error::NotInvariant(format!(
                            "d differs across representatives of cosets {} and {}",
                            group.label(cosets[i][0]),
                            group.label(cosets[j][0])
                        )));
                    }
                }
            }
            dist[i][j] = value.clone();
        }
    }
    let labels = cosets
        .iter()
        .map(|c| group.label(c[0]).to_string())
        .collect();
    let space = FiniteMetricSpace::new(labels, dist, false)?;
    let images = (0..group.order())
        .map(|k| {
            let perm = cosets
                .iter()
                .map(|c| coset_of[group.mul(k, c[0])])
                .collect();
            Isometry::new(&space, perm)
        })
        .collect::<Result<Vec<_>>>()?;
    let action = GroupAction::new(group.clone(), space.clone(), images)?;
    if !action.is_transitive() {
        return Err(Error::Action(
            "translation action on cosets is not transitive".into(),
        ));
    }
    Ok(Quotient {
        kernel,
        cosets,
        coset_of,
        space,
        action,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pullback {
    pub pseudometric: InvariantPseudometric,
    pub quotient: Quotient,
    /// `orbit_map[i]` is the point `gξ` for any `g` in the i-th coset: an
    /// isometric bijection from the quotient onto the orbit of `ξ`.
    pub orbit_map: Vec<usize>,
}

/// `d_ξ(g, h) = d(gξ, hξ)`, with the quotient identified isometrically with
/// the orbit of `ξ`.
pub fn pullback_pseudometric(action: &GroupAction, xi: usize) -> Result<Pullback> {
    let group = action.group();
    let space = action.space();
    if xi >= space.len() {
        return Err(Error::Structure(format!("point index {xi} out of range")));
    }
    let n = group.order();
    let orbit_point: Vec<usize> = (0..n).map(|g| action.image(g).apply(xi)).collect();
    let dist = (0..n)
        .map(|g| {
            (0..n)
                .map(|h| space.d(orbit_point[g], orbit_point[h]).clone())
                .collect()
        })
        .collect();
    let pseudometric = InvariantPseudometric::new(group.clone(), dist)?;
    let quotient = quotient_space(&pseudometric)?;

    let orbit_map: Vec<usize> = quotient.cosets.iter().map(|c| orbit_point[c[0]]).collect();
    for c in &quotient.cosets {
        if c.iter().any(|&g| orbit_point[g] != orbit_point[c[0]]) {
            return Err(Error::Domain(
                "coset does not map to a single orbit point".into(),
            ));
        }
    }
    let orbit = action.orbit(xi);
    let mut image = orbit_map.clone();
    image.sort_unstable();
    if image != orbit {
        return Err(Error::Domain(
            "coset map is not a bijection onto the orbit".into(),
        ));
    }
    for i in 0..orbit_map.len() {
        for j in 0..orbit_map.len() {
            if quotient.space.d(i, j) != space.d(orbit_map[i], orbit_map[j]) {
                return Err(Error::Domain("coset map is not isometric".into()));
            }
        }
    }
    Ok(Pullback {
        pseudometric,
        quotient,
        orbit_map,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FvfCover {
    pub k: usize,
    pub f: Vec<usize>,
}

pub fn covers(group: &FiniteGroup, f: &[usize], v: &[usize]) -> bool {
    let fv: Vec<usize> = group.product_set(f, v).into_iter().collect();
    group.product_set(&fv, f).len() == group.order()
}

/// Smallest `F` with `F·V·F = G`, searching subsets by size and then
/// lexicographically, returning the first cover found.
pub fn min_fvf_cover(group: &FiniteGroup, v: &[usize]) -> Result<FvfCover> {
    if v.is_empty() {
        return Err(Error::Precondition("V must be non-empty".into()));
    }
    let n = group.order();
    if v.iter().any(|&x| x >= n) {
        return Err(Error::Structure("V contains an unknown element".into()));
    }
    let distinct_v = v.iter().collect::<BTreeSet<_>>().len();
    for k in 1..=n {
        // |F V F| <= k² |V|
        if k * k * distinct_v < n {
            continue;
        }
        if let Some(f) = combinations(n, k).into_iter().find(|f| covers(group, f, v)) {
            return Ok(FvfCover { k, f });
        }
    }
    unreachable!("F = G always covers when V is non-empty")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateEntry {
    pub phi: Vec<usize>,
    /// An element outside `Φ·V·Φ`, or `None` when `Φ·V·Φ = G`.
    pub witness: Option<usize>,
    /// `d(ΦH, gΦH)` in the quotient for the witness.
    pub gap: Option<Rational>,
}

/// For each `Φ`, picks `g ∉ Φ·V·Φ` with `V` the open ball of the given radius
/// and checks that `g` moves `ΦH` at least `radius` away from itself in the
/// quotient. Among admissible `g` the one with the largest gap is reported
/// (lowest index on ties).
pub fn moving_certificate(
    pm: &InvariantPseudometric,
    radius: &Rational,
    family: &[Vec<usize>],
) -> Result<Vec<CertificateEntry>> {
    if !radius.is_positive() {
        return Err(Error::Precondition("ball radius must be positive".into()));
    }
    let group = &pm.group;
    let ball = pm.open_ball(radius);
    let q = quotient_space(pm)?;
    let mut out = Vec::with_capacity(family.len());
    for phi in family {
        if phi.is_empty() {
            return Err(Error::EmptySet("Φ"));
        }
        let phi_v: Vec<usize> = group.product_set(phi, &ball).into_iter().collect();
        let covered = group.product_set(&phi_v, phi);
        let phi_h: Vec<usize> = phi.iter().map(|&x| q.coset_of[x]).collect();
        let mut best: Option<(Rational, usize)> = None;
        for g in (0..group.order()).filter(|g| !covered.contains(g)) {
            let moved: Vec<usize> = phi.iter().map(|&x| q.coset_of[group.mul(g, x)]).collect();
            let gap = q.space.set_distance(&phi_h, &moved)?;
            if gap < *radius {
                return Err(Error::Domain(format!(
                    "{} lies outside ΦVΦ but moves ΦH only {gap}",
                    group.label(g)
                )));
            }
            if best.as_ref().is_none_or(|(b, _)| gap > *b) {
                best = Some((gap, g));
            }
        }
        out.push(CertificateEntry {
            phi: phi.clone(),
            witness: best.as_ref().map(|(_, g)| *g),
            gap: best.map(|(gap, _)| gap),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn cycle_pm(n: usize) -> InvariantPseudometric {
        let length: Vec<Rational> = (0..n)
            .map(|g| Rational::from_integer(g.min(n - g) as i64))
            .collect();
        InvariantPseudometric::from_length(FiniteGroup::cyclic(n), &length).unwrap()
    }

    fn s3_with_transposition() -> (InvariantPseudometric, BTreeSet<usize>) {
        let s3 = FiniteGroup::symmetric(3);
        let t = s3.index_of("102").unwrap();
        let h0 = s3.generated(&[t]);
        (
            InvariantPseudometric::subgroup_indicator(s3, &h0).unwrap(),
            h0,
        )
    }

    #[test]
    fn kernels() {
        let z4 = FiniteGroup::cyclic(4);
        assert_eq!(
            kernel_subgroup(&InvariantPseudometric::discrete(z4.clone())).unwrap(),
            [0].into()
        );
        assert_eq!(
            kernel_subgroup(&InvariantPseudometric::zero(z4))
                .unwrap()
                .len(),
            4
        );
        let (pm, h0) = s3_with_transposition();
        assert_eq!(kernel_subgroup(&pm).unwrap(), h0);
    }

    #[test]
    fn quotients() {
        let q4 = quotient_space(&InvariantPseudometric::discrete(FiniteGroup::cyclic(4))).unwrap();
        assert_eq!(q4.space.len(), 4);
        assert_eq!(q4.space.diameter(), 1);
        assert!(q4
            .action
            .images()
            .iter()
            .skip(1)
            .all(|g| (0..4).all(|x| g.apply(x) != x)));

        let (pm, _) = s3_with_transposition();
        let q3 = quotient_space(&pm).unwrap();
        assert_eq!(q3.space.len(), 3);
        assert!((0..3).all(|i| (0..3).all(|j| i == j || *q3.space.d(i, j) == 1)));
        assert!(q3.action.is_transitive());

        let q1 = quotient_space(&InvariantPseudometric::zero(FiniteGroup::cyclic(5))).unwrap();
        assert_eq!(q1.space.len(), 1);
    }

    #[test]
    fn rejects_non_invariant() {
        let z3 = FiniteGroup::cyclic(3);
        let d = vec![
            vec![q(0, 1), q(1, 1), q(1, 1)],
            vec![q(1, 1), q(0, 1), q(2, 1)],
            vec![q(1, 1), q(2, 1), q(0, 1)],
        ];
        assert!(matches!(
            InvariantPseudometric::new(z3, d),
            Err(Error::NotInvariant(_))
        ));
    }

    #[test]
    fn pullbacks() {
        let c6 = FiniteMetricSpace::cycle(6).unwrap();
        let triv = GroupAction::trivial(FiniteGroup::cyclic(6), c6.clone()).unwrap();
        let p = pullback_pseudometric(&triv, 2).unwrap();
        assert!(p
            .pseudometric
            .matrix()
            .iter()
            .flatten()
            .all(Rational::is_zero));

        let rot = GroupAction::left_regular(FiniteGroup::cyclic(6), c6).unwrap();
        let p = pullback_pseudometric(&rot, 0).unwrap();
        assert_eq!(p.pseudometric, cycle_pm(6));

        let z5 = FiniteGroup::cyclic(5);
        let disc = InvariantPseudometric::discrete(z5.clone());
        let sp =
            FiniteMetricSpace::new(z5.labels().to_vec(), disc.matrix().to_vec(), false).unwrap();
        let reg = GroupAction::left_regular(z5, sp).unwrap();
        assert_eq!(pullback_pseudometric(&reg, 0).unwrap().pseudometric, disc);
    }

    #[test]
    fn fvf_examples() {
        let z5 = FiniteGroup::cyclic(5);
        let cover = min_fvf_cover(&z5, &[4, 0, 1]).unwrap();
        assert_eq!(cover.k, 2);
        assert!(covers(&z5, &cover.f, &[4, 0, 1]));

        let all: Vec<usize> = (0..5).collect();
        assert_eq!(
            min_fvf_cover(&z5, &all).unwrap(),
            FvfCover { k: 1, f: vec![0] }
        );
        assert!(min_fvf_cover(&z5, &[]).is_err());
    }

    /// Exhaustive oracle: try every subset of the group.
    fn brute_min_cover(group: &FiniteGroup, v: &[usize]) -> usize {
        let n = group.order();
        (1u32..1 << n)
            .filter_map(|mask| {
                let f: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                covers(group, &f, v).then_some(f.len())
            })
            .min()
            .unwrap()
    }

    #[test]
    fn fvf_matches_exhaustive_oracle() {
        let z4 = FiniteGroup::cyclic(4);
        assert_eq!(brute_min_cover(&z4, &[0]), 3);
        assert_eq!(min_fvf_cover(&z4, &[0]).unwrap().k, 3);
        let s3 = FiniteGroup::symmetric(3);
        for v in [vec![0], vec![0, 1], vec![2, 5]] {
            assert_eq!(min_fvf_cover(&s3, &v).unwrap().k, brute_min_cover(&s3, &v));
        }
    }

    #[test]
    fn moving_certificates() {
        let pm = cycle_pm(12);
        let r = moving_certificate(&pm, &q(1, 1), &[vec![0], (0..12).collect()]).unwrap();
        assert_eq!(r[0].witness, Some(6));
        assert_eq!(r[0].gap, Some(q(6, 1)));
        assert_eq!(r[1].witness, None);

        let zero = InvariantPseudometric::zero(FiniteGroup::cyclic(4));
        let r = moving_certificate(&zero, &q(1, 1), &[vec![0]]).unwrap();
        assert_eq!(r[0].witness, None);
    }
}
