//! Uncapacitated min-cost transshipment on a complete graph by successive
//! shortest paths, in exact arithmetic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// `amount` units shipped from node `from` to node `to`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Flow {
    pub from: usize,
    pub to: usize,
    pub amount: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transshipment {
    pub cost: Rational,
    pub flows: Vec<Flow>,
}

/// Minimises `Σ flow(u,v)·cost[u][v]` subject to `outflow - inflow = supply`
/// at every node. Costs must be non-negative and the supplies must sum to zero.
///
/// Each round sends flow along a shortest residual path (Bellman-Ford, since
/// reverse arcs carry negative cost) from a node with positive excess to the
/// nearest node with negative excess.
pub fn min_cost_transshipment(
    cost: &[Vec<Rational>],
    supply: &[Rational],
) -> Result<Transshipment> {
    let n = supply.len();
    if cost.len() != n || cost.iter().any(|r| r.len() != n) {
        return Err(Error::Structure(
            "cost matrix does not match supply vector".into(),
        ));
    }
    if cost.iter().flatten().any(Rational::is_negative) {
        return Err(Error::Domain("negative arc cost".into()));
    }
    if !supply.iter().sum::<Rational>().is_zero() {
        return Err(Error::Domain("supplies do not balance".into()));
    }

    let mut excess = supply.to_vec();
    let mut flow = vec![vec![Rational::zero(); n]; n];

    loop {
        let sources: Vec<usize> = (0..n).filter(|&v| excess[v].is_positive()).collect();
        if sources.is_empty() {
            break;
        }
        let (pred, dist) = shortest_paths(cost, &flow, &sources);
        let sink = (0..n)
            .filter(|&v| excess[v].is_negative() && dist[v].is_some())
            .min_by(|&a, &b| dist[a].cmp(&dist[b]).then(a.cmp(&b)))
            .ok_or_else(|| Error::Domain("no reachable deficit node".into()))?;

        // Walk back to the source, collecting arcs and the bottleneck.
        let mut path = Vec::new();
        let mut v = sink;
        while let Some((u, reverse)) = pred[v] {
            path.push((u, v, reverse));
            v = u;
        }
        let source = v;
        let mut amount = if excess[source] < -&excess[sink] {
            excess[source].clone()
        } else {
            -&excess[sink]
        };
        for &(u, v, reverse) in &path {
            if reverse && flow[v][u] < amount {
                amount = flow[v][u].clone();
            }
        }
        for &(u, v, reverse) in &path {
            if reverse {
                flow[v][u] -= &amount;
            } else {
                flow[u][v] += &amount;
            }
        }
        excess[source] -= &amount;
        excess[sink] += &amount;
    }

    let mut flows = Vec::new();
    let mut total = Rational::zero();
    for u in 0..n {
        for v in u + 1..n {
            // Opposite flows on one pair cancel without increasing cost.
            let net = &flow[u][v] - &flow[v][u];
            if net.is_zero() {
                continue;
            }
            let (from, to, amount) = if net.is_positive() {
                (u, v, net)
            } else {
                (v, u, -net)
            };
            total += &amount * &cost[from][to];
            flows.push(Flow { from, to, amount });
        }
    }
    Ok(Transshipment { cost: total, flows })
}

type Pred = Vec<Option<(usize, bool)>>;

/// Multi-source Bellman-Ford over the residual graph. `pred[v] = (u, reverse)`
/// records the arc used to reach `v`.
fn shortest_paths(
    cost: &[Vec<Rational>],
    flow: &[Vec<Rational>],
    sources: &[usize],
) -> (Pred, Vec<Option<Rational>>) {
    let n = cost.len();
    let mut dist: Vec<Option<Rational>> = vec![None; n];
    let mut pred: Pred = vec![None; n];
    for &s in sources {
        dist[s] = Some(Rational::zero());
    }
    for _ in 0..n {
        let mut changed = false;
        for u in 0..n {
            let Some(du) = dist[u].clone() else { continue };
            for v in 0..n {
                if u == v {
                    continue;
                }
                // forward arc is always open; reverse arc only if v ships to u
                let mut candidates = vec![(&du + &cost[u][v], false)];
                if flow[v][u].is_positive() {
                    candidates.push((&du - &cost[v][u], true));
                }
                for (cand, reverse) in candidates {
                    if dist[v].as_ref().is_none_or(|dv| cand < *dv) {
                        dist[v] = Some(cand);
                        pred[v] = Some((u, reverse));
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    (pred, dist)
}
