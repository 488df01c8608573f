//! Finite groups given by a multiplication table.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `table[g][h]` is the index of the product `g * h`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupRecord", into = "GroupRecord")]
pub struct FiniteGroup {
    elements: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupRecord {
    pub elements: Vec<String>,
    pub table: Vec<Vec<usize>>,
}

impl TryFrom<GroupRecord> for FiniteGroup {
    type Error = Error;
    fn try_from(r: GroupRecord) -> Result<Self> {
        FiniteGroup::new(r.elements, r.table)
    }
}

impl From<FiniteGroup> for GroupRecord {
    fn from(g: FiniteGroup) -> Self {
        GroupRecord {
            elements: g.elements,
            table: g.table,
        }
    }
}

impl FiniteGroup {
    /// Verifies shape, closure, associativity, identity and inverses.
    pub fn new(elements: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = elements.len();
        if n == 0 {
            return Err(Error::Group("no elements".into()));
        }
        let distinct: BTreeSet<&String> = elements.iter().collect();
        if distinct.len() != n {
            return Err(Error::Group("duplicate element labels".into()));
        }
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(Error::Group(format!("table must be {n}x{n}")));
        }
        if table.iter().flatten().any(|&x| x >= n) {
            return Err(Error::Group("table entry out of range".into()));
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::Group(format!(
                            "not associative at ({}, {}, {})",
                            elements[a], elements[b], elements[c]
                        )));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| Error::Group("no identity element".into()))?;
        let mut inverse = Vec::with_capacity(n);
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or_else(|| Error::Group(format!("{} has no inverse", elements[g])))?;
            inverse.push(inv);
        }
        Ok(FiniteGroup {
            elements,
            table,
            identity,
            inverse,
        })
    }

    /// Integers mod n under addition, labelled `0..n`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0);
        let elements = (0..n).map(|i| i.to_string()).collect();
        let table = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        FiniteGroup::new(elements, table).expect("cyclic group")
    }

    /// Symmetries of the regular n-gon, order 2n. Element `k` is the rotation
    /// `r^k` and element `n + k` is the reflection `s r^k`.
    pub fn dihedral(n: usize) -> Self {
        assert!(n > 0);
        let perms: Vec<Vec<usize>> = (0..2 * n)
            .map(|e| {
                let (flip, k) = (e >= n, e % n);
                (0..n)
                    .map(|x| {
                        if flip {
                            (2 * n - x - k) % n
                        } else {
                            (x + k) % n
                        }
                    })
                    .collect()
            })
            .collect();
        let labels = (0..2 * n)
            .map(|e| {
                if e < n {
                    format!("r{e}")
                } else {
                    format!("sr{}", e - n)
                }
            })
            .collect();
        FiniteGroup::from_permutations(labels, &perms).expect("dihedral group")
    }

    /// All permutations of `0..n` in lexicographic order, labelled in one-line
    /// notation. Intended for n up to 5.
    pub fn symmetric(n: usize) -> Self {
        let perms = all_permutations(n);
        let labels = perms
            .iter()
            .map(|p| p.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(""))
            .collect();
        FiniteGroup::from_permutations(labels, &perms).expect("symmetric group")
    }

    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> Self {
        let (na, nb) = (a.order(), b.order());
        let elements = (0..na * nb)
            .map(|i| format!("({},{})", a.elements[i / nb], b.elements[i % nb]))
            .collect();
        let table = (0..na * nb)
            .map(|x| {
                (0..na * nb)
                    .map(|y| a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb))
                    .collect()
            })
            .collect();
        FiniteGroup::new(elements, table).expect("direct product")
    }

    /// The group formed by a set of permutations closed under composition,
    /// with product `(g h)(x) = g(h(x))`.
    pub fn from_permutations(labels: Vec<String>, perms: &[Vec<usize>]) -> Result<Self> {
        let index: HashMap<&[usize], usize> = perms
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_slice(), i))
            .collect();
        if index.len() != perms.len() {
            return Err(Error::Group("repeated permutation".into()));
        }
        let mut table = Vec::with_capacity(perms.len());
        for g in perms {
            let mut row = Vec::with_capacity(perms.len());
            for h in perms {
                let gh: Vec<usize> = h.iter().map(|&x| g[x]).collect();
                let k = index.get(gh.as_slice()).ok_or_else(|| {
                    Error::Group("permutations not closed under composition".into())
                })?;
                row.push(*k);
            }
            table.push(row);
        }
        FiniteGroup::new(labels, table)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.elements
    }

    pub fn label(&self, g: usize) -> &str {
        &self.elements[g]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.elements
            .iter()
            .position(|e| e == label)
            .ok_or_else(|| Error::Group(format!("unknown element {label:?}")))
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    /// The product set `A * B`, sorted.
    pub fn product_set(&self, a: &[usize], b: &[usize]) -> BTreeSet<usize> {
        a.iter()
            .flat_map(|&x| b.iter().map(move |&y| self.mul(x, y)))
            .collect()
    }

    /// Checks that `h` contains the identity and is closed under products and inverses.
    pub fn is_subgroup(&self, h: &BTreeSet<usize>) -> bool {
        h.contains(&self.identity)
            && h.iter().all(|&a| h.contains(&self.inv(a)))
            && h.iter()
                .all(|&a| h.iter().all(|&b| h.contains(&self.mul(a, b))))
    }

    /// Subgroup generated by `gens`.
    pub fn generated(&self, gens: &[usize]) -> BTreeSet<usize> {
        let mut h: BTreeSet<usize> = [self.identity].into();
        let mut frontier = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &s in gens {
                let y = self.mul(x, s);
                if h.insert(y) {
                    frontier.push(y);
                }
            }
        }
        h
    }

    /// Left cosets `gH`, each sorted, listed by smallest member.
    pub fn left_cosets(&self, h: &BTreeSet<usize>) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.order()];
        let mut out = Vec::new();
        for g in 0..self.order() {
            if seen[g] {
                continue;
            }
            let coset: BTreeSet<usize> = h.iter().map(|&x| self.mul(g, x)).collect();
            for &c in &coset {
                seen[c] = true;
            }
            out.push(coset.into_iter().collect());
        }
        out
    }
}

pub(crate) fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_groups_have_expected_orders() {
        assert_eq!(FiniteGroup::cyclic(7).order(), 7);
        assert_eq!(FiniteGroup::dihedral(6).order(), 12);
        assert_eq!(FiniteGroup::symmetric(4).order(), 24);
        let p = FiniteGroup::direct_product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(3));
        assert_eq!(p.order(), 6);
    }

    #[test]
    fn rejects_non_groups() {
        // x*y = x is associative but has no two-sided identity.
        let t = vec![vec![0, 0], vec![1, 1]];
        assert!(FiniteGroup::new(vec!["a".into(), "b".into()], t).is_err());
        // subtraction mod 3 is not associative
        let t = (0..3)
            .map(|a| (0..3).map(|b| (a + 3 - b) % 3).collect())
            .collect();
        let err = FiniteGroup::new(vec!["0".into(), "1".into(), "2".into()], t).unwrap_err();
        assert!(err.to_string().contains("associative"));
    }

    #[test]
    fn json_shape() {
        let json = r#"{"elements":["e","r","r2"],"table":[[0,1,2],[1,2,0],[2,0,1]]}"#;
        let g: FiniteGroup = serde_json::from_str(json).unwrap();
        assert_eq!(g.identity(), 0);
        assert_eq!(g.inv(1), 2);
        assert_eq!(serde_json::to_string(&g).unwrap(), json);
    }

    #[test]
    fn cosets_partition() {
        let s3 = FiniteGroup::symmetric(3);
        let t = s3.index_of("102").unwrap();
        let h = s3.generated(&[t]);
        assert!(s3.is_subgroup(&h));
        let cosets = s3.left_cosets(&h);
        assert_eq!(cosets.len(), 3);
        assert!(cosets.iter().all(|c| c.len() == 2));
    }

    #[test]
    fn dihedral_is_non_abelian() {
        let d = FiniteGroup::dihedral(4);
        let (r, s) = (1, 4);
        assert_ne!(d.mul(r, s), d.mul(s, r));
    }
}
