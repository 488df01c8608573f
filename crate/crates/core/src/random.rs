//! Seeded generators for random instances: spaces, molecules, Katětov
//! functions, groups, invariant pseudometrics and actions.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::action::GroupAction;
use crate::group::FiniteGroup;
use crate::katetov::KatetovFunction;
use crate::metric::FiniteMetricSpace;
use crate::quotient::{quotient_space, InvariantPseudometric};
use crate::rational::Rational;

const DENOMS: [i64; 4] = [1, 2, 3, 4];

/// A rational `a/b` with `b` from a small set and `lo <= a/b <= hi`.
pub fn rational_in<R: Rng>(rng: &mut R, lo: i64, hi: i64) -> Rational {
    let b = *DENOMS.choose(rng).expect("non-empty");
    Rational::new(rng.gen_range(lo * b..=hi * b), b)
}

fn positive_weight<R: Rng>(rng: &mut R) -> Rational {
    let b = *DENOMS.choose(rng).expect("non-empty");
    Rational::new(rng.gen_range(1..=8 * b), b)
}

/// Shortest-path closure of random symmetric edge weights on `n` points.
/// With `pseudo`, some weights are zero and the result may identify points.
pub fn metric_space<R: Rng>(rng: &mut R, n: usize, pseudo: bool) -> FiniteMetricSpace {
    let mut d = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = if pseudo && rng.gen_bool(0.2) {
                Rational::zero()
            } else {
                positive_weight(rng)
            };
            d[i][j] = w.clone();
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = &d[i][k] + &d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    let labels = (0..n).map(|i| format!("x{i}")).collect();
    FiniteMetricSpace::new(labels, d, pseudo).expect("shortest-path closure is a (pseudo)metric")
}

/// A random Katětov function on `support`: a convex combination of two
/// maxima of shifted distance functions `c + d(x, ·)`, each of which is Katětov.
pub fn katetov_function<R: Rng>(
    rng: &mut R,
    space: &FiniteMetricSpace,
    support: &[usize],
) -> KatetovFunction {
    let n = space.len();
    let piece = |rng: &mut R| -> Vec<Rational> {
        let centres: Vec<(usize, Rational)> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let shift = if rng.gen_bool(0.4) {
                    Rational::zero()
                } else {
                    rational_in(rng, 0, 4)
                };
                (rng.gen_range(0..n), shift)
            })
            .collect();
        support
            .iter()
            .map(|&y| {
                centres
                    .iter()
                    .map(|(x, c)| c + space.d(*x, y))
                    .max()
                    .expect("at least one centre")
            })
            .collect()
    };
    let a = piece(rng);
    let b = piece(rng);
    let t = Rational::new(rng.gen_range(0..=4), 4);
    let values = a
        .iter()
        .zip(&b)
        .map(|(x, y)| &t * x + (Rational::one() - &t) * y)
        .collect();
    KatetovFunction::new(space, support.to_vec(), values)
        .expect("generator yields Katetov functions")
}

/// A random non-empty subset of `0..n` of size at most `max`, sorted.
pub fn subset<R: Rng>(rng: &mut R, n: usize, max: usize) -> Vec<usize> {
    let k = rng.gen_range(1..=max.min(n).max(1));
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    let mut s = all[..k].to_vec();
    s.sort_unstable();
    s
}

/// A small group of order at most `max_order` (at least 1).
pub fn group<R: Rng>(rng: &mut R, max_order: usize) -> FiniteGroup {
    let mut catalog: Vec<FiniteGroup> = Vec::new();
    for n in 1..=max_order.min(12) {
        catalog.push(FiniteGroup::cyclic(n));
    }
    for n in 3..=6 {
        if 2 * n <= max_order {
            catalog.push(FiniteGroup::dihedral(n));
        }
    }
    let z2 = FiniteGroup::cyclic(2);
    if max_order >= 4 {
        catalog.push(FiniteGroup::direct_product(&z2, &z2));
    }
    if max_order >= 8 {
        catalog.push(FiniteGroup::direct_product(&z2, &FiniteGroup::cyclic(4)));
        catalog.push(FiniteGroup::direct_product(
            &FiniteGroup::direct_product(&z2, &z2),
            &z2,
        ));
    }
    if max_order >= 9 {
        catalog.push(FiniteGroup::direct_product(
            &FiniteGroup::cyclic(3),
            &FiniteGroup::cyclic(3),
        ));
    }
    if max_order >= 12 {
        catalog.push(FiniteGroup::direct_product(&FiniteGroup::symmetric(3), &z2));
    }
    if max_order >= 24 {
        catalog.push(FiniteGroup::symmetric(4));
        catalog.push(FiniteGroup::direct_product(
            &FiniteGroup::dihedral(4),
            &FiniteGroup::cyclic(3),
        ));
    }
    catalog.choose(rng).expect("catalog is non-empty").clone()
}

/// A left-invariant pseudometric `d(g, h) = ℓ(g⁻¹h)` where `ℓ` is the
/// shortest-word length for random inverse-symmetric weights on every element.
/// Zero weights (only with `pseudo`) produce a non-trivial kernel.
pub fn invariant_pseudometric<R: Rng>(
    rng: &mut R,
    group: &FiniteGroup,
    pseudo: bool,
) -> InvariantPseudometric {
    let n = group.order();
    let e = group.identity();
    let mut w: Vec<Option<Rational>> = vec![None; n];
    w[e] = Some(Rational::zero());
    for g in 0..n {
        if w[g].is_some() {
            continue;
        }
        let v = if pseudo && rng.gen_bool(0.25) {
            Rational::zero()
        } else {
            positive_weight(rng)
        };
        w[g] = Some(v.clone());
        w[group.inv(g)] = Some(v);
    }
    let w: Vec<Rational> = w.into_iter().map(|x| x.expect("filled")).collect();
    let mut len = w.clone();
    loop {
        let mut changed = false;
        for g in 0..n {
            for s in 0..n {
                let cand = &len[g] + &w[s];
                let gs = group.mul(g, s);
                if cand < len[gs] {
                    len[gs] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    InvariantPseudometric::from_length(group.clone(), &len).expect("word length is invariant")
}

/// A random isometric action: the translation action of a random group on the
/// quotient by a random invariant pseudometric, so both free and non-free
/// transitive actions occur.
pub fn transitive_action<R: Rng>(rng: &mut R, max_order: usize) -> GroupAction {
    let g = group(rng, max_order);
    let pseudo = rng.gen_bool(0.5);
    let pm = invariant_pseudometric(rng, &g, pseudo);
    quotient_space(&pm)
        .expect("quotient of an invariant pseudometric")
        .action
}

/// A random space on at most `max_n` points that tends to have symmetries:
/// a group orbit, a cycle, a uniform space, or a generic random metric.
pub fn symmetric_space<R: Rng>(rng: &mut R, max_n: usize) -> FiniteMetricSpace {
    match rng.gen_range(0..4) {
        0 => {
            let a = transitive_action(rng, max_n);
            a.space().clone()
        }
        1 => FiniteMetricSpace::cycle(rng.gen_range(1..=max_n)).expect("cycle"),
        2 => {
            let n = rng.gen_range(1..=max_n);
            let labels: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            FiniteMetricSpace::uniform(&refs, positive_weight(rng)).expect("uniform space")
        }
        _ => {
            let n = rng.gen_range(1..=max_n);
            metric_space(rng, n, false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_produce_valid_objects() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let pseudo = rng.gen_bool(0.5);
            let s = metric_space(&mut rng, 6, pseudo);
            assert_eq!(s.validate().unwrap(), None);
            let sup = subset(&mut rng, s.len(), 4);
            let _ = katetov_function(&mut rng, &s, &sup);
            let a = transitive_action(&mut rng, 24);
            assert!(a.is_transitive());
            let _ = symmetric_space(&mut rng, 7);
        }
    }

    #[test]
    fn pseudometrics_sometimes_have_kernels() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let nontrivial = (0..40)
            .filter(|_| {
                let g = group(&mut rng, 12);
                let pm = invariant_pseudometric(&mut rng, &g, true);
                crate::quotient::kernel_subgroup(&pm).unwrap().len() > 1
            })
            .count();
        assert!(nontrivial > 0);
    }
}
