use std::cmp::Ordering;

use super::{DistanceMatrix, Route, RoutePlan};
use crate::error::{Error, Result};

/// Parallel Clarke-Wright savings construction.
///
/// Starts from one round trip per delivery and merges route ends in
/// descending order of `d(0,i) + d(0,j) - d(i,j)` (ties by ascending `(i, j)`)
/// while the merged load fits in `capacity`. Only positive savings are used.
pub fn savings_routes(
    deliveries: &[(usize, u64)],
    capacity: u64,
    m: &DistanceMatrix,
) -> Result<RoutePlan> {
    if let Some(&(customer, quantity)) = deliveries.iter().find(|(_, q)| *q > capacity) {
        return Err(Error::OverCapacity {
            customer,
            quantity,
            capacity,
        });
    }
    let deliveries: Vec<(usize, u64)> =
        deliveries.iter().copied().filter(|(_, q)| *q > 0).collect();
    if deliveries.is_empty() {
        return Ok(RoutePlan::empty());
    }

    let mut savings = Vec::with_capacity(deliveries.len() * deliveries.len().saturating_sub(1) / 2);
    for (a, &(i, _)) in deliveries.iter().enumerate() {
        for &(j, _) in &deliveries[a + 1..] {
            let s = m.get(0, i) + m.get(0, j) - m.get(i, j);
            if s > 0.0 {
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                savings.push((s, lo, hi));
            }
        }
    }
    savings.sort_unstable_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .unwrap_or(Ordering::Equal)
            .then((x.1, x.2).cmp(&(y.1, y.2)))
    });

    // routes indexed by slot; merged-away slots become None
    let size = m.size();
    let mut slot_of = vec![usize::MAX; size];
    let mut qty = vec![0u64; size];
    let mut routes: Vec<Option<(Vec<usize>, u64)>> = Vec::with_capacity(deliveries.len());
    for (slot, &(c, q)) in deliveries.iter().enumerate() {
        slot_of[c] = slot;
        qty[c] = q;
        routes.push(Some((vec![c], q)));
    }

    for (_, i, j) in savings {
        let (si, sj) = (slot_of[i], slot_of[j]);
        if si == sj {
            continue;
        }
        let (ri, li) = routes[si].as_ref().expect("live slot");
        let (rj, lj) = routes[sj].as_ref().expect("live slot");
        if li + lj > capacity {
            continue;
        }
        let i_first = ri[0] == i;
        let i_last = *ri.last().unwrap() == i;
        let j_first = rj[0] == j;
        let j_last = *rj.last().unwrap() == j;
        if !(i_first || i_last) || !(j_first || j_last) {
            continue;
        }

        let (mut a, la) = routes[si].take().unwrap();
        let (mut b, lb) = routes[sj].take().unwrap();
        // orient so that i ends `a` and j starts `b`
        if !i_last {
            a.reverse();
        }
        if !j_first {
            b.reverse();
        }
        a.extend_from_slice(&b);
        for &c in &b {
            slot_of[c] = si;
        }
        routes[si] = Some((a, la + lb));
    }

    let routes = routes
        .into_iter()
        .flatten()
        .map(|(stops, _)| {
            let quantities = stops.iter().map(|&c| qty[c]).collect();
            Route::new(stops, quantities)
        })
        .collect();
    Ok(RoutePlan::from_routes(routes, m))
}
