//! Finite metric and pseudometric spaces over exact rationals.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// The first metric axiom found to fail, with the labels that witness it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum Violation {
    Diagonal {
        point: String,
        value: Rational,
    },
    Symmetry {
        x: String,
        y: String,
    },
    Separation {
        x: String,
        y: String,
    },
    /// `d(x, z) > d(x, y) + d(y, z)`.
    Triangle {
        x: String,
        y: String,
        z: String,
    },
}

impl Violation {
    pub fn class(&self) -> &'static str {
        match self {
            Violation::Diagonal { .. } => "diagonal",
            Violation::Symmetry { .. } => "symmetry",
            Violation::Separation { .. } => "separation",
            Violation::Triangle { .. } => "triangle",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Diagonal { point, value } => write!(f, "d({point},{point}) = {value} != 0"),
            Violation::Symmetry { x, y } => write!(f, "d({x},{y}) != d({y},{x})"),
            Violation::Separation { x, y } => write!(f, "d({x},{y}) = 0 for distinct points"),
            Violation::Triangle { x, y, z } => {
                write!(f, "d({x},{z}) > d({x},{y}) + d({y},{z})")
            }
        }
    }
}

/// Checks the shape of the data, then the axioms in the order diagonal,
/// symmetry, separation (skipped for pseudometrics), triangle.
///
/// Shape problems are reported as `Err`; an axiom failure is `Ok(Some(_))`.
pub fn validate(
    points: &[String],
    dist: &[Vec<Rational>],
    pseudo: bool,
) -> Result<Option<Violation>> {
    let n = points.len();
    if n == 0 {
        return Err(Error::Structure("space has no points".into()));
    }
    if dist.len() != n {
        return Err(Error::Structure(format!(
            "{} labels but {} matrix rows",
            n,
            dist.len()
        )));
    }
    if let Some((i, row)) = dist.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Structure(format!(
            "row {i} has {} entries, expected {n}",
            row.len()
        )));
    }
    let mut seen = HashSet::new();
    for p in points {
        if !seen.insert(p.as_str()) {
            return Err(Error::Structure(format!("duplicate label {p:?}")));
        }
    }

    let label = |i: usize| points[i].clone();
    for i in 0..n {
        if !dist[i][i].is_zero() {
            return Ok(Some(Violation::Diagonal {
                point: label(i),
                value: dist[i][i].clone(),
            }));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if dist[i][j] != dist[j][i] {
                return Ok(Some(Violation::Symmetry {
                    x: label(i),
                    y: label(j),
                }));
            }
        }
    }
    if !pseudo {
        for i in 0..n {
            for j in i + 1..n {
                if dist[i][j].is_zero() {
                    return Ok(Some(Violation::Separation {
                        x: label(i),
                        y: label(j),
                    }));
                }
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if dist[x][z] > &dist[x][y] + &dist[y][z] {
                    return Ok(Some(Violation::Triangle {
                        x: label(x),
                        y: label(y),
                        z: label(z),
                    }));
                }
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRecord", into = "SpaceRecord")]
pub struct FiniteMetricSpace {
    points: Vec<String>,
    dist: Vec<Vec<Rational>>,
    pseudo: bool,
}

/// JSON shape shared by plain and pointed spaces.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceRecord {
    pub points: Vec<String>,
    pub dist: Vec<Vec<Rational>>,
    #[serde(default)]
    pub pseudo: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<String>,
}

impl TryFrom<SpaceRecord> for FiniteMetricSpace {
    type Error = Error;
    fn try_from(r: SpaceRecord) -> Result<Self> {
        FiniteMetricSpace::new(r.points, r.dist, r.pseudo)
    }
}

impl From<FiniteMetricSpace> for SpaceRecord {
    fn from(s: FiniteMetricSpace) -> Self {
        SpaceRecord {
            points: s.points,
            dist: s.dist,
            pseudo: s.pseudo,
            basepoint: None,
        }
    }
}

impl FiniteMetricSpace {
    /// Builds a space, rejecting malformed data and any axiom violation.
    pub fn new(points: Vec<String>, dist: Vec<Vec<Rational>>, pseudo: bool) -> Result<Self> {
        if let Some(v) = validate(&points, &dist, pseudo)? {
            return Err(Error::Axiom(v));
        }
        Ok(FiniteMetricSpace {
            points,
            dist,
            pseudo,
        })
    }

    /// Builds a metric space from integer distances, labelling points `0..n`.
    pub fn from_integers(dist: &[&[i64]]) -> Result<Self> {
        let points = (0..dist.len()).map(|i| i.to_string()).collect();
        let dist = dist
            .iter()
            .map(|row| row.iter().map(|&v| Rational::from_integer(v)).collect())
            .collect();
        FiniteMetricSpace::new(points, dist, false)
    }

    /// Points of the real line at the given integer positions, labelled by position.
    pub fn line(positions: &[i64]) -> Result<Self> {
        let points = positions.iter().map(|p| p.to_string()).collect();
        let dist = positions
            .iter()
            .map(|a| {
                positions
                    .iter()
                    .map(|b| Rational::from_integer((a - b).abs()))
                    .collect()
            })
            .collect();
        FiniteMetricSpace::new(points, dist, false)
    }

    /// The n-cycle with its graph metric, points labelled `0..n`.
    pub fn cycle(n: usize) -> Result<Self> {
        let points = (0..n).map(|i| i.to_string()).collect();
        let dist = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let k = i.abs_diff(j);
                        Rational::from_integer(k.min(n - k) as i64)
                    })
                    .collect()
            })
            .collect();
        FiniteMetricSpace::new(points, dist, false)
    }

    /// Every pair of distinct points at the same distance.
    pub fn uniform(labels: &[&str], d: Rational) -> Result<Self> {
        let n = labels.len();
        let dist = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Rational::zero() } else { d.clone() })
                    .collect()
            })
            .collect();
        FiniteMetricSpace::new(labels.iter().map(|s| s.to_string()).collect(), dist, false)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_pseudo(&self) -> bool {
        self.pseudo
    }

    pub fn labels(&self) -> &[String] {
        &self.points
    }

    pub fn label(&self, i: usize) -> &str {
        &self.points[i]
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    pub fn d(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i][j]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.points
            .iter()
            .position(|p| p == label)
            .ok_or_else(|| Error::UnknownPoint(label.to_string()))
    }

    pub fn indices_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.index_of(l.as_ref())).collect()
    }

    /// Re-runs the axiom check on an already constructed space.
    pub fn validate(&self) -> Result<Option<Violation>> {
        validate(&self.points, &self.dist, self.pseudo)
    }

    /// `min { d(a, b) : a in A, b in B }`.
    pub fn set_distance(&self, a: &[usize], b: &[usize]) -> Result<Rational> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptySet("set_distance operand"));
        }
        let out = a
            .iter()
            .flat_map(|&i| b.iter().map(move |&j| (i, j)))
            .map(|(i, j)| &self.dist[i][j])
            .min()
            .expect("non-empty");
        Ok(out.clone())
    }

    /// `min { d(x, a) : a in A }`.
    pub fn point_set_distance(&self, x: usize, a: &[usize]) -> Result<Rational> {
        self.set_distance(&[x], a)
    }

    /// Induced subspace on `subset`, in the given order.
    pub fn restrict(&self, subset: &[usize]) -> Result<FiniteMetricSpace> {
        if subset.is_empty() {
            return Err(Error::EmptySet("restrict subset"));
        }
        if let Some(&bad) = subset.iter().find(|&&i| i >= self.len()) {
            return Err(Error::Structure(format!("point index {bad} out of range")));
        }
        let points = subset.iter().map(|&i| self.points[i].clone()).collect();
        let dist = subset
            .iter()
            .map(|&i| subset.iter().map(|&j| self.dist[i][j].clone()).collect())
            .collect();
        FiniteMetricSpace::new(points, dist, self.pseudo)
    }

    pub fn diameter(&self) -> Rational {
        self.dist
            .iter()
            .flatten()
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }
}

/// A space with a distinguished point playing the role of zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRecord", into = "SpaceRecord")]
pub struct PointedSpace {
    space: FiniteMetricSpace,
    basepoint: usize,
}

impl TryFrom<SpaceRecord> for PointedSpace {
    type Error = Error;
    fn try_from(r: SpaceRecord) -> Result<Self> {
        let base = r.basepoint.clone();
        let space = FiniteMetricSpace::new(r.points, r.dist, r.pseudo)?;
        let basepoint = match base {
            Some(label) => space.index_of(&label)?,
            None => 0,
        };
        PointedSpace::new(space, basepoint)
    }
}

impl From<PointedSpace> for SpaceRecord {
    fn from(p: PointedSpace) -> Self {
        let base = p.space.points[p.basepoint].clone();
        let mut rec = SpaceRecord::from(p.space);
        rec.basepoint = Some(base);
        rec
    }
}

impl PointedSpace {
    pub fn new(space: FiniteMetricSpace, basepoint: usize) -> Result<Self> {
        if basepoint >= space.len() {
            return Err(Error::Structure(format!(
                "basepoint index {basepoint} out of range"
            )));
        }
        Ok(PointedSpace { space, basepoint })
    }

    pub fn with_label(space: FiniteMetricSpace, basepoint: &str) -> Result<Self> {
        let b = space.index_of(basepoint)?;
        PointedSpace::new(space, b)
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }
}

impl std::ops::Deref for PointedSpace {
    type Target = FiniteMetricSpace;
    fn deref(&self) -> &FiniteMetricSpace {
        &self.space
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn labels(n: usize) -> Vec<String> {
        ["a", "b", "c", "d"][..n]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| Rational::from_integer(v)).collect())
            .collect()
    }

    #[test]
    fn two_points_ok() {
        assert_eq!(
            validate(&labels(2), &mat(&[&[0, 1], &[1, 0]]), false).unwrap(),
            None
        );
    }

    #[test]
    fn triangle_violation_names_the_triple() {
        let v = validate(
            &labels(3),
            &mat(&[&[0, 1, 3], &[1, 0, 1], &[3, 1, 0]]),
            false,
        )
        .unwrap()
        .unwrap();
        assert_eq!(
            v,
            Violation::Triangle {
                x: "a".into(),
                y: "b".into(),
                z: "c".into()
            }
        );
    }

    #[test]
    fn separation_only_for_metrics() {
        let m = mat(&[&[0, 0], &[0, 0]]);
        assert_eq!(
            validate(&labels(2), &m, false).unwrap(),
            Some(Violation::Separation {
                x: "a".into(),
                y: "b".into()
            })
        );
        assert_eq!(validate(&labels(2), &m, true).unwrap(), None);
    }

    #[test]
    fn shape_errors_are_structural() {
        let err = validate(&labels(3), &mat(&[&[0, 1], &[1, 0]]), false).unwrap_err();
        assert!(matches!(err, Error::Structure(_)));
        let err = validate(&labels(2), &mat(&[&[0, 1], &[1]]), false).unwrap_err();
        assert!(matches!(err, Error::Structure(_)));
        let dup = vec!["a".to_string(), "a".to_string()];
        assert!(matches!(
            validate(&dup, &mat(&[&[0, 1], &[1, 0]]), false),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn asymmetry_and_diagonal() {
        let v = validate(&labels(2), &mat(&[&[0, 1], &[2, 0]]), false)
            .unwrap()
            .unwrap();
        assert_eq!(v.class(), "symmetry");
        let v = validate(&labels(2), &mat(&[&[1, 1], &[1, 0]]), false)
            .unwrap()
            .unwrap();
        assert_eq!(v.class(), "diagonal");
    }

    #[test]
    fn set_distance_examples() {
        let line = FiniteMetricSpace::line(&[0, 1, 3]).unwrap();
        assert_eq!(line.set_distance(&[0], &[2]).unwrap(), 3);
        assert_eq!(line.set_distance(&[0, 1], &[1, 2]).unwrap(), 0);
        assert_eq!(line.set_distance(&[0, 1], &[2]).unwrap(), 2);
        assert!(matches!(
            line.set_distance(&[], &[2]),
            Err(Error::EmptySet(_))
        ));
    }

    #[test]
    fn restrict_examples() {
        let line = FiniteMetricSpace::line(&[0, 1, 3]).unwrap();
        assert_eq!(line.restrict(&[0, 1, 2]).unwrap(), line);
        let sub = line.restrict(&[0, 2]).unwrap();
        assert_eq!(sub.labels(), &["0", "3"]);
        assert_eq!(*sub.d(0, 1), 3);
        assert!(line.restrict(&[]).is_err());

        let pm = FiniteMetricSpace::new(
            labels(3),
            vec![
                vec![q(0, 1), q(0, 1), q(1, 2)],
                vec![q(0, 1), q(0, 1), q(1, 2)],
                vec![q(1, 2), q(1, 2), q(0, 1)],
            ],
            true,
        )
        .unwrap();
        let sub = pm.restrict(&[0, 1]).unwrap();
        assert!(sub.is_pseudo());
        assert_eq!(sub.validate().unwrap(), None);
    }

    #[test]
    fn pointed_json_round_trip() {
        let json = r#"{"points":["a","b"],"dist":[["0","3/2"],["3/2","0"]],"pseudo":false,"basepoint":"b"}"#;
        let p: PointedSpace = serde_json::from_str(json).unwrap();
        assert_eq!(p.basepoint(), 1);
        assert_eq!(serde_json::to_string(&p).unwrap(), json);
    }

    #[test]
    fn cycle_metric() {
        let c6 = FiniteMetricSpace::cycle(6).unwrap();
        assert_eq!(*c6.d(0, 3), 3);
        assert_eq!(*c6.d(1, 5), 2);
        assert_eq!(c6.diameter(), 3);
    }
}
