//! Isometries of finite spaces and finite group actions by isometries.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::metric::FiniteMetricSpace;
use crate::rational::Rational;

/// A distance-preserving permutation of point indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Isometry(Vec<usize>);

impl Isometry {
    pub fn new(space: &FiniteMetricSpace, perm: Vec<usize>) -> Result<Self> {
        let g = Isometry(perm);
        g.check(space)?;
        Ok(g)
    }

    pub fn identity(n: usize) -> Self {
        Isometry((0..n).collect())
    }

    /// Verifies bijectivity on the space and preservation of every distance.
    pub fn check(&self, space: &FiniteMetricSpace) -> Result<()> {
        let n = space.len();
        if self.0.len() != n {
            return Err(Error::NotIsometry(format!(
                "permutation has {} entries, space has {n} points",
                self.0.len()
            )));
        }
        let mut hit = vec![false; n];
        for &y in &self.0 {
            if y >= n || std::mem::replace(&mut hit[y], true) {
                return Err(Error::NotIsometry("not a bijection".into()));
            }
        }
        for x in 0..n {
            for y in x + 1..n {
                if space.d(self.0[x], self.0[y]) != space.d(x, y) {
                    return Err(Error::NotIsometry(format!(
                        "d({0},{1}) changes under the map",
                        space.label(x),
                        space.label(y)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Isometry {
        let mut inv = vec![0; self.0.len()];
        for (x, &y) in self.0.iter().enumerate() {
            inv[y] = x;
        }
        Isometry(inv)
    }

    pub fn image_of(&self, set: &[usize]) -> Vec<usize> {
        set.iter().map(|&x| self.0[x]).collect()
    }
}

/// All isometries of a metric space, sorted lexicographically by image list.
///
/// Candidates for the image of a point are restricted to points with the same
/// sorted distance profile, and every partial assignment must preserve the
/// distances to the already assigned points.
pub fn enumerate_isometries(space: &FiniteMetricSpace) -> Result<Vec<Isometry>> {
    if space.is_pseudo() {
        return Err(Error::Domain(
            "isometry enumeration needs a metric (pseudo = false)".into(),
        ));
    }
    let n = space.len();
    let profiles: Vec<Vec<&Rational>> = (0..n)
        .map(|x| {
            let mut p: Vec<&Rational> = (0..n).map(|y| space.d(x, y)).collect();
            p.sort();
            p
        })
        .collect();
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|x| (0..n).filter(|&y| profiles[x] == profiles[y]).collect())
        .collect();

    fn extend(
        space: &FiniteMetricSpace,
        candidates: &[Vec<usize>],
        image: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Isometry>,
    ) {
        let x = image.len();
        if x == candidates.len() {
            out.push(Isometry(image.clone()));
            return;
        }
        for &y in &candidates[x] {
            if used[y] {
                continue;
            }
            if (0..x).all(|k| space.d(y, image[k]) == space.d(x, k)) {
                used[y] = true;
                image.push(y);
                extend(space, candidates, image, used, out);
                image.pop();
                used[y] = false;
            }
        }
    }

    let mut out = Vec::new();
    extend(
        space,
        &candidates,
        &mut Vec::with_capacity(n),
        &mut vec![false; n],
        &mut out,
    );
    out.sort();
    Ok(out)
}

/// A homomorphism from a finite group into the isometries of a space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ActionRecord", into = "ActionRecord")]
pub struct GroupAction {
    group: FiniteGroup,
    space: FiniteMetricSpace,
    images: Vec<Isometry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionRecord {
    pub group: FiniteGroup,
    pub space: FiniteMetricSpace,
    /// Element label to image list; the identity may be omitted.
    pub images: BTreeMap<String, Vec<usize>>,
}

impl TryFrom<ActionRecord> for GroupAction {
    type Error = Error;
    fn try_from(r: ActionRecord) -> Result<Self> {
        for label in r.images.keys() {
            r.group
                .index_of(label)
                .map_err(|_| Error::Action(format!("image given for unknown element {label:?}")))?;
        }
        let images = (0..r.group.order())
            .map(|g| match r.images.get(r.group.label(g)) {
                Some(p) => Ok(Isometry(p.clone())),
                None if g == r.group.identity() => Ok(Isometry::identity(r.space.len())),
                None => Err(Error::Action(format!(
                    "no image for element {:?}",
                    r.group.label(g)
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        GroupAction::new(r.group, r.space, images)
    }
}

impl From<GroupAction> for ActionRecord {
    fn from(a: GroupAction) -> Self {
        let images = (0..a.group.order())
            .map(|g| (a.group.label(g).to_string(), a.images[g].0.clone()))
            .collect();
        ActionRecord {
            group: a.group,
            space: a.space,
            images,
        }
    }
}

impl GroupAction {
    /// Checks that every image is an isometry and that `g ↦ image` is a homomorphism.
    pub fn new(
        group: FiniteGroup,
        space: FiniteMetricSpace,
        images: Vec<Isometry>,
    ) -> Result<Self> {
        if images.len() != group.order() {
            return Err(Error::Action(format!(
                "{} images for a group of order {}",
                images.len(),
                group.order()
            )));
        }
        for img in &images {
            img.check(&space)?;
        }
        if !images[group.identity()].is_identity() {
            return Err(Error::Action("identity does not act trivially".into()));
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                if images[group.mul(g, h)] != images[g].compose(&images[h]) {
                    return Err(Error::Action(format!(
                        "not a homomorphism at ({}, {})",
                        group.label(g),
                        group.label(h)
                    )));
                }
            }
        }
        Ok(GroupAction {
            group,
            space,
            images,
        })
    }

    /// The full isometry group acting on the space. Elements are labelled
    /// `g0, g1, ...` in the lexicographic order of their image lists, so `g0`
    /// is the identity.
    pub fn isometry_group(space: &FiniteMetricSpace) -> Result<Self> {
        let isos = enumerate_isometries(space)?;
        let perms: Vec<Vec<usize>> = isos.iter().map(|g| g.0.clone()).collect();
        let labels = (0..perms.len()).map(|i| format!("g{i}")).collect();
        let group = FiniteGroup::from_permutations(labels, &perms)?;
        GroupAction::new(group, space.clone(), isos)
    }

    /// Left translation of a group on a space whose points are the group
    /// elements in table order.
    pub fn left_regular(group: FiniteGroup, space: FiniteMetricSpace) -> Result<Self> {
        if space.len() != group.order() {
            return Err(Error::Action(
                "space must have one point per group element".into(),
            ));
        }
        let images = (0..group.order())
            .map(|g| Isometry((0..group.order()).map(|h| group.mul(g, h)).collect()))
            .collect();
        GroupAction::new(group, space, images)
    }

    /// The trivial action of a group on a space.
    pub fn trivial(group: FiniteGroup, space: FiniteMetricSpace) -> Result<Self> {
        let images = vec![Isometry::identity(space.len()); group.order()];
        GroupAction::new(group, space, images)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn image(&self, g: usize) -> &Isometry {
        &self.images[g]
    }

    pub fn images(&self) -> &[Isometry] {
        &self.images
    }

    /// `max_g d(F, gF)` with the smallest element index attaining it.
    pub fn moving_gap(&self, set: &[usize]) -> Result<(Rational, usize)> {
        if set.is_empty() {
            return Err(Error::EmptySet("moving_gap set"));
        }
        let mut best: Option<(Rational, usize)> = None;
        for g in 0..self.group.order() {
            let moved = self.images[g].image_of(set);
            let gap = self.space.set_distance(set, &moved)?;
            if best.as_ref().is_none_or(|(b, _)| gap > *b) {
                best = Some((gap, g));
            }
        }
        Ok(best.expect("group is non-empty"))
    }

    /// Whether every set in `family` can be moved to distance at least `eps0`
    /// from itself. This certifies the listed sets only: a finite group never
    /// moves the whole space off itself.
    pub fn is_strongly_moving_on(
        &self,
        family: &[Vec<usize>],
        eps0: &Rational,
    ) -> Result<StronglyMovingReport> {
        if !eps0.is_positive() {
            return Err(Error::Precondition("epsilon_0 must be positive".into()));
        }
        for (i, set) in family.iter().enumerate() {
            let (gap, _) = self.moving_gap(set)?;
            if gap < *eps0 {
                return Ok(StronglyMovingReport {
                    holds: false,
                    first_failure: Some(i),
                    gap: Some(gap),
                });
            }
        }
        Ok(StronglyMovingReport {
            holds: true,
            first_failure: None,
            gap: None,
        })
    }

    pub fn orbit(&self, x: usize) -> Vec<usize> {
        let orbit: BTreeSet<usize> = self.images.iter().map(|g| g.apply(x)).collect();
        orbit.into_iter().collect()
    }

    pub fn orbit_diameter(&self, x: usize) -> Rational {
        let orbit = self.orbit(x);
        orbit
            .iter()
            .flat_map(|&a| orbit.iter().map(move |&b| (a, b)))
            .map(|(a, b)| self.space.d(a, b))
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn stabilizer(&self, x: usize) -> Vec<usize> {
        (0..self.group.order())
            .filter(|&g| self.images[g].apply(x) == x)
            .collect()
    }

    pub fn is_transitive(&self) -> bool {
        self.orbit(0).len() == self.space.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StronglyMovingReport {
    pub holds: bool,
    /// Index into the family of the first set that could not be moved far enough.
    pub first_failure: Option<usize>,
    pub gap: Option<Rational>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::all_permutations;
    use crate::rational::q;

    fn brute_force_isometries(space: &FiniteMetricSpace) -> Vec<Vec<usize>> {
        all_permutations(space.len())
            .into_iter()
            .filter(|p| Isometry::new(space, p.clone()).is_ok())
            .collect()
    }

    fn rotations(n: usize) -> GroupAction {
        GroupAction::left_regular(FiniteGroup::cyclic(n), FiniteMetricSpace::cycle(n).unwrap())
            .unwrap()
    }

    #[test]
    fn scalene_triangle_is_rigid() {
        let s = FiniteMetricSpace::from_integers(&[&[0, 3, 4], &[3, 0, 5], &[4, 5, 0]]).unwrap();
        assert_eq!(
            enumerate_isometries(&s).unwrap(),
            vec![Isometry::identity(3)]
        );
    }

    #[test]
    fn equilateral_and_hexagon_match_brute_force() {
        let tri = FiniteMetricSpace::uniform(&["a", "b", "c"], q(1, 1)).unwrap();
        let isos = enumerate_isometries(&tri).unwrap();
        assert_eq!(isos.len(), 6);
        let brute = brute_force_isometries(&tri);
        assert_eq!(
            isos.iter()
                .map(|g| g.as_slice().to_vec())
                .collect::<Vec<_>>(),
            brute
        );

        let c6 = FiniteMetricSpace::cycle(6).unwrap();
        let isos = enumerate_isometries(&c6).unwrap();
        assert_eq!(isos.len(), 12);
        assert_eq!(isos.len(), brute_force_isometries(&c6).len());
    }

    #[test]
    fn pseudometric_rejected() {
        let pm = FiniteMetricSpace::new(
            vec!["a".into(), "b".into()],
            vec![vec![q(0, 1), q(0, 1)], vec![q(0, 1), q(0, 1)]],
            true,
        )
        .unwrap();
        assert!(matches!(enumerate_isometries(&pm), Err(Error::Domain(_))));
    }

    #[test]
    fn moving_gap_on_hexagon() {
        let a = rotations(6);
        assert_eq!(a.moving_gap(&[0]).unwrap(), (q(3, 1), 3));
        assert_eq!(a.moving_gap(&[0, 1]).unwrap(), (q(2, 1), 3));
        let all: Vec<usize> = (0..6).collect();
        assert_eq!(a.moving_gap(&all).unwrap().0, 0);
    }

    #[test]
    fn strongly_moving_certificates() {
        let a = rotations(6);
        assert!(a.is_strongly_moving_on(&[vec![0]], &q(3, 1)).unwrap().holds);
        assert!(
            a.is_strongly_moving_on(&[vec![0], vec![0, 1]], &q(2, 1))
                .unwrap()
                .holds
        );
        let r = a
            .is_strongly_moving_on(&[vec![0], (0..6).collect()], &q(1, 100))
            .unwrap();
        assert!(!r.holds);
        assert_eq!(r.first_failure, Some(1));
        assert!(a.is_strongly_moving_on(&[vec![0]], &q(0, 1)).is_err());
    }

    #[test]
    fn orbits() {
        let a = rotations(6);
        assert_eq!(a.orbit(0), (0..6).collect::<Vec<_>>());
        assert_eq!(a.orbit_diameter(0), 3);

        let triv =
            GroupAction::trivial(FiniteGroup::cyclic(3), FiniteMetricSpace::cycle(4).unwrap())
                .unwrap();
        assert_eq!(triv.orbit(2), vec![2]);
        assert_eq!(triv.orbit_diameter(2), 0);

        let d = GroupAction::isometry_group(&FiniteMetricSpace::cycle(6).unwrap()).unwrap();
        for x in 0..6 {
            assert_eq!(d.orbit(x).len() * d.stabilizer(x).len(), d.group().order());
        }
    }

    #[test]
    fn rejects_non_homomorphism() {
        let g = FiniteGroup::cyclic(2);
        let s = FiniteMetricSpace::cycle(4).unwrap();
        // a rotation by one has order 4, not 2
        let images = vec![
            Isometry::identity(4),
            Isometry::new(&s, vec![1, 2, 3, 0]).unwrap(),
        ];
        assert!(matches!(
            GroupAction::new(g, s, images),
            Err(Error::Action(_))
        ));
    }

    #[test]
    fn action_json_with_identity_omitted() {
        let json = r#"{"group":{"elements":["e","r","r2"],"table":[[0,1,2],[1,2,0],[2,0,1]]},
            "space":{"points":["0","1","2"],"dist":[["0","1","1"],["1","0","1"],["1","1","0"]]},
            "images":{"r":[1,2,0],"r2":[2,0,1]}}"#;
        let a: GroupAction = serde_json::from_str(json).unwrap();
        assert!(a.image(0).is_identity());
        assert!(a.is_transitive());
    }
}
