//! Record-to-record travel over a granular neighborhood.
//!
//! Each sweep visits the customers in shuffled order and applies, per
//! customer, the best move whose resulting length stays within
//! `record * (1 + deviation_factor)`. The sweep is followed by a descent that
//! applies improving moves, re-examining only customers next to changed
//! edges, until none remain; the record and the best plan are updated after
//! the descent. Moves pair a customer `u` with one of its
//! nearest neighbors `v` and always make `u` and `v` adjacent or exchange
//! them: relocate, exchange, intra-route 2-opt and inter-route 2-opt*.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{route_length, DistanceMatrix, Route, RoutePlan, RtrParams};

/// Neighbor list length per customer.
const NEIGHBORS: usize = 10;
const IMPROVEMENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
enum Move {
    Relocate {
        u: usize,
        v: usize,
        after: bool,
    },
    Swap {
        u: usize,
        v: usize,
    },
    /// Reverse `routes[route][from..=to]`.
    TwoOpt {
        route: usize,
        from: usize,
        to: usize,
    },
    /// Cut route `r1` after `c1` stops and route `r2` after `c2` stops, then
    /// either exchange the tails or join head to head and tail to tail.
    Cross {
        r1: usize,
        c1: usize,
        r2: usize,
        c2: usize,
        heads_joined: bool,
    },
}

struct Search<'a> {
    m: &'a DistanceMatrix,
    capacity: u64,
    qty: Vec<u64>,
    routes: Vec<Vec<usize>>,
    /// `prefix[r][k]`: load of the first `k` stops of route `r`.
    prefix: Vec<Vec<u64>>,
    route_of: Vec<usize>,
    pos_of: Vec<usize>,
    prev_of: Vec<usize>,
    next_of: Vec<usize>,
    length: f64,
}

impl<'a> Search<'a> {
    fn new(plan: &RoutePlan, m: &'a DistanceMatrix, capacity: u64) -> Option<Self> {
        let size = m.size();
        let mut qty = vec![0; size];
        let mut seen = vec![false; size];
        for r in &plan.routes {
            for (&c, &q) in r.stops.iter().zip(&r.quantities) {
                if c == 0 || c >= size || seen[c] {
                    return None;
                }
                seen[c] = true;
                qty[c] = q;
            }
        }
        let routes: Vec<Vec<usize>> = plan
            .routes
            .iter()
            .filter(|r| !r.stops.is_empty())
            .map(|r| r.stops.clone())
            .collect();
        let mut s = Self {
            m,
            capacity,
            qty,
            prefix: vec![Vec::new(); routes.len()],
            routes,
            route_of: vec![usize::MAX; size],
            pos_of: vec![usize::MAX; size],
            prev_of: vec![0; size],
            next_of: vec![0; size],
            length: 0.0,
        };
        for r in 0..s.routes.len() {
            s.refresh(r);
        }
        s.length = s.exact_length();
        Some(s)
    }

    fn exact_length(&self) -> f64 {
        self.routes.iter().map(|r| route_length(r, self.m)).sum()
    }

    fn refresh(&mut self, r: usize) {
        let route = &self.routes[r];
        let prefix = &mut self.prefix[r];
        prefix.clear();
        prefix.push(0);
        let mut acc = 0;
        let mut prev = 0;
        for (k, &c) in route.iter().enumerate() {
            self.route_of[c] = r;
            self.pos_of[c] = k;
            self.prev_of[c] = prev;
            self.next_of[c] = route.get(k + 1).copied().unwrap_or(0);
            prev = c;
            acc += self.qty[c];
            prefix.push(acc);
        }
    }

    fn drop_empty(&mut self) {
        let mut r = 0;
        while r < self.routes.len() {
            if self.routes[r].is_empty() {
                self.routes.swap_remove(r);
                self.prefix.swap_remove(r);
                if r < self.routes.len() {
                    self.refresh(r);
                }
            } else {
                r += 1;
            }
        }
    }

    #[inline]
    fn d(&self, a: usize, b: usize) -> f64 {
        self.m.get(a, b)
    }

    #[inline]
    fn load(&self, r: usize) -> u64 {
        *self.prefix[r].last().unwrap()
    }

    /// Node at `k` in route `r`, the depot outside `0..len`.
    #[inline]
    fn at(&self, r: usize, k: isize) -> usize {
        let route = &self.routes[r];
        if k < 0 || k as usize >= route.len() {
            0
        } else {
            route[k as usize]
        }
    }

    #[inline]
    fn prev(&self, u: usize) -> usize {
        self.prev_of[u]
    }

    #[inline]
    fn next(&self, u: usize) -> usize {
        self.next_of[u]
    }

    /// Best move for `u` among neighbors whose delta satisfies `accept`.
    fn best_move(
        &self,
        u: usize,
        neighbors: &[usize],
        accept: impl Fn(f64) -> bool,
    ) -> Option<(f64, Move)> {
        let mut best: Option<(f64, Move)> = None;
        let mut consider = |delta: f64, mv: Move| {
            if delta.abs() > 1e-12 && accept(delta) && best.is_none_or(|(b, _)| delta < b) {
                best = Some((delta, mv));
            }
        };

        let ru = self.route_of[u];
        let (pu, nu) = (self.prev(u), self.next(u));
        let qu = self.qty[u];
        let removal = self.d(pu, nu) - self.d(pu, u) - self.d(u, nu);

        for &v in neighbors {
            let rv = self.route_of[v];
            let (pv, nv) = (self.prev(v), self.next(v));
            let same = ru == rv;

            // relocate u next to v
            if same || self.load(rv) + qu <= self.capacity {
                if v != pu {
                    consider(
                        removal + self.d(v, u) + self.d(u, nv) - self.d(v, nv),
                        Move::Relocate { u, v, after: true },
                    );
                }
                if v != nu {
                    consider(
                        removal + self.d(pv, u) + self.d(u, v) - self.d(pv, v),
                        Move::Relocate { u, v, after: false },
                    );
                }
            }

            // exchange u and v
            let qv = self.qty[v];
            let swap_fits = same
                || (self.load(ru) - qu + qv <= self.capacity
                    && self.load(rv) - qv + qu <= self.capacity);
            if swap_fits {
                let delta = if same && nu == v {
                    self.d(pu, v) + self.d(u, nv) - self.d(pu, u) - self.d(v, nv)
                } else if same && nv == u {
                    self.d(pv, u) + self.d(v, nu) - self.d(pv, v) - self.d(u, nu)
                } else {
                    self.d(pu, v) + self.d(v, nu) - self.d(pu, u) - self.d(u, nu)
                        + self.d(pv, u)
                        + self.d(u, nv)
                        - self.d(pv, v)
                        - self.d(v, nv)
                };
                consider(delta, Move::Swap { u, v });
            }

            if same {
                let (a, b) = (self.pos_of[u], self.pos_of[v]);
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                let r = ru;
                let (x, y) = (self.at(r, lo as isize), self.at(r, hi as isize));
                if hi > lo + 1 {
                    // x and y become adjacent: reverse lo+1..=hi
                    let (x_next, y_next) =
                        (self.at(r, lo as isize + 1), self.at(r, hi as isize + 1));
                    consider(
                        self.d(x, y) + self.d(x_next, y_next)
                            - self.d(x, x_next)
                            - self.d(y, y_next),
                        Move::TwoOpt {
                            route: r,
                            from: lo + 1,
                            to: hi,
                        },
                    );
                    // reverse lo..=hi-1
                    let (x_prev, y_prev) =
                        (self.at(r, lo as isize - 1), self.at(r, hi as isize - 1));
                    consider(
                        self.d(x_prev, y_prev) + self.d(x, y)
                            - self.d(x_prev, x)
                            - self.d(y_prev, y),
                        Move::TwoOpt {
                            route: r,
                            from: lo,
                            to: hi - 1,
                        },
                    );
                }
            } else {
                let (l1, l2) = (self.load(ru), self.load(rv));
                let upto_u = self.prefix[ru][self.pos_of[u] + 1];
                let upto_v = self.prefix[rv][self.pos_of[v] + 1];
                let (a, b) = (self.pos_of[u], self.pos_of[v]);
                // (cut after u?, cut after v?, heads joined)
                for (after_u, after_v, heads_joined) in [
                    (true, false, false),
                    (false, true, false),
                    (true, true, true),
                    (false, false, true),
                ] {
                    let (x1, y1, pre1) = if after_u {
                        (u, nu, upto_u)
                    } else {
                        (pu, u, upto_u - qu)
                    };
                    let (x2, y2, pre2) = if after_v {
                        (v, nv, upto_v)
                    } else {
                        (pv, v, upto_v - qv)
                    };
                    let (first, second) = if heads_joined {
                        (pre1 + pre2, (l1 - pre1) + (l2 - pre2))
                    } else {
                        (pre1 + (l2 - pre2), pre2 + (l1 - pre1))
                    };
                    if first > self.capacity || second > self.capacity {
                        continue;
                    }
                    let added = if heads_joined {
                        self.d(x1, x2) + self.d(y1, y2)
                    } else {
                        self.d(x1, y2) + self.d(x2, y1)
                    };
                    consider(
                        added - self.d(x1, y1) - self.d(x2, y2),
                        Move::Cross {
                            r1: ru,
                            c1: a + after_u as usize,
                            r2: rv,
                            c2: b + after_v as usize,
                            heads_joined,
                        },
                    );
                }
            }
        }
        best
    }

    /// Endpoints of the edges `mv` changes; 0 entries are the depot.
    fn touched(&self, mv: Move) -> [usize; 6] {
        match mv {
            Move::Relocate { u, v, .. } | Move::Swap { u, v } => {
                [u, self.prev(u), self.next(u), v, self.prev(v), self.next(v)]
            }
            Move::TwoOpt { route, from, to } => [
                self.at(route, from as isize - 1),
                self.at(route, from as isize),
                self.at(route, to as isize),
                self.at(route, to as isize + 1),
                0,
                0,
            ],
            Move::Cross { r1, c1, r2, c2, .. } => [
                self.at(r1, c1 as isize - 1),
                self.at(r1, c1 as isize),
                self.at(r2, c2 as isize - 1),
                self.at(r2, c2 as isize),
                0,
                0,
            ],
        }
    }

    /// Applies improving moves until no customer whose surroundings changed
    /// has one left.
    fn descend(&mut self, order: &[usize], neighbors: &[Vec<usize>], queued: &mut [bool]) {
        let mut queue: VecDeque<usize> = order.iter().copied().collect();
        for &u in order {
            queued[u] = true;
        }
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            if let Some((delta, mv)) = self.best_move(u, &neighbors[u], |d| d < -IMPROVEMENT_EPS) {
                let touched = self.touched(mv);
                self.apply(delta, mv);
                for x in touched {
                    if x != 0 && !queued[x] {
                        queued[x] = true;
                        queue.push_back(x);
                    }
                }
            }
        }
    }

    fn apply(&mut self, delta: f64, mv: Move) {
        match mv {
            Move::Relocate { u, v, after } => {
                let (ru, rv) = (self.route_of[u], self.route_of[v]);
                self.routes[ru].remove(self.pos_of[u]);
                let at = self.routes[rv].iter().position(|&c| c == v).unwrap();
                self.routes[rv].insert(if after { at + 1 } else { at }, u);
                self.refresh(ru);
                if rv != ru {
                    self.refresh(rv);
                }
            }
            Move::Swap { u, v } => {
                let (ru, rv) = (self.route_of[u], self.route_of[v]);
                let (pu, pv) = (self.pos_of[u], self.pos_of[v]);
                self.routes[ru][pu] = v;
                self.routes[rv][pv] = u;
                self.refresh(ru);
                if rv != ru {
                    self.refresh(rv);
                }
            }
            Move::TwoOpt { route, from, to } => {
                self.routes[route][from..=to].reverse();
                self.refresh(route);
            }
            Move::Cross {
                r1,
                c1,
                r2,
                c2,
                heads_joined,
            } => {
                let tail1 = self.routes[r1].split_off(c1);
                let tail2 = self.routes[r2].split_off(c2);
                if heads_joined {
                    let mut head2 = std::mem::take(&mut self.routes[r2]);
                    head2.reverse();
                    self.routes[r1].extend(head2);
                    let mut joined = tail1;
                    joined.reverse();
                    joined.extend(tail2);
                    self.routes[r2] = joined;
                } else {
                    self.routes[r1].extend(tail2);
                    self.routes[r2].extend(tail1);
                }
                self.refresh(r1);
                self.refresh(r2);
            }
        }
        self.length += delta;
        self.drop_empty();
    }

    fn into_plan(routes: Vec<Vec<usize>>, qty: &[u64], m: &DistanceMatrix) -> RoutePlan {
        let routes = routes
            .into_iter()
            .map(|stops| {
                let quantities = stops.iter().map(|&c| qty[c]).collect();
                Route::new(stops, quantities)
            })
            .collect();
        RoutePlan::from_routes(routes, m)
    }
}

fn neighbor_lists(customers: &[usize], m: &DistanceMatrix) -> Vec<Vec<usize>> {
    let mut lists = vec![Vec::new(); m.size()];
    for &u in customers {
        let mut others: Vec<usize> = customers.iter().copied().filter(|&v| v != u).collect();
        let k = NEIGHBORS.min(others.len());
        if k == 0 {
            continue;
        }
        let by_distance =
            |a: &usize, b: &usize| m.get(u, *a).total_cmp(&m.get(u, *b)).then(a.cmp(b));
        if k < others.len() {
            others.select_nth_unstable_by(k - 1, by_distance);
            others.truncate(k);
        }
        others.sort_unstable_by(by_distance);
        lists[u] = others;
    }
    lists
}

/// Improves a feasible plan with record-to-record travel.
///
/// The result is feasible for `capacity`, serves the same customers with the
/// same quantities, and is never longer than the input. With `loops == 0` the
/// input is returned unchanged.
pub fn rtr_improve(
    plan: &RoutePlan,
    m: &DistanceMatrix,
    capacity: u64,
    params: &RtrParams,
) -> RoutePlan {
    if params.loops == 0 || plan.routes.is_empty() {
        return plan.clone();
    }
    let Some(mut search) = Search::new(plan, m, capacity) else {
        return plan.clone();
    };
    if search.prefix.iter().any(|p| p.last() > Some(&capacity)) {
        return plan.clone();
    }

    let mut customers: Vec<usize> = search.routes.iter().flatten().copied().collect();
    customers.sort_unstable();
    let neighbors = neighbor_lists(&customers, m);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut record = search.length;
    let mut best: Option<Vec<Vec<usize>>> = None;
    let mut order = customers;
    let mut queued = vec![false; m.size()];

    for _ in 0..params.loops {
        order.shuffle(&mut rng);

        let threshold = record * params.deviation_factor;
        for &u in &order {
            let limit = record + threshold - search.length;
            if let Some((delta, mv)) = search.best_move(u, &neighbors[u], |d| d <= limit) {
                search.apply(delta, mv);
            }
        }

        search.descend(&order, &neighbors, &mut queued);

        search.length = search.exact_length();
        if search.length < record - IMPROVEMENT_EPS {
            record = search.length;
            best = Some(search.routes.clone());
        }
    }

    match best {
        Some(routes) => Search::into_plan(routes, &search.qty, m),
        None => plan.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Point;
    use crate::routing::savings_routes;

    fn matrix(points: &[(f64, f64)]) -> DistanceMatrix {
        let pts: Vec<Point> = points.iter().map(|&(x, y)| Point::new(x, y)).collect();
        DistanceMatrix::from_points(&pts)
    }

    fn plan(routes: Vec<Vec<usize>>, m: &DistanceMatrix) -> RoutePlan {
        let routes = routes
            .into_iter()
            .map(|stops| {
                let q = vec![1; stops.len()];
                Route::new(stops, q)
            })
            .collect();
        RoutePlan::from_routes(routes, m)
    }

    #[test]
    fn untangles_square() {
        // depot (0,0), A(0,1), B(1,1), C(1,0); A-C-B crosses itself
        let m = matrix(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]);
        let start = plan(vec![vec![1, 3, 2]], &m);
        assert!((start.total_length - (2.0 + 2.0 * 2f64.sqrt())).abs() < 1e-9);
        let out = rtr_improve(&start, &m, 10, &RtrParams::default());
        assert!(
            (out.total_length - 4.0).abs() < 1e-9,
            "got {}",
            out.total_length
        );
        let stops = &out.routes[0].stops;
        assert!(stops == &vec![1, 2, 3] || stops == &vec![3, 2, 1]);
    }

    #[test]
    fn single_customer_unchanged() {
        let m = matrix(&[(0.0, 0.0), (3.0, 4.0)]);
        let start = plan(vec![vec![1]], &m);
        let out = rtr_improve(&start, &m, 10, &RtrParams::default());
        assert_eq!(out, start);
    }

    #[test]
    fn zero_loops_is_identity() {
        let m = matrix(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]);
        let start = plan(vec![vec![1, 3, 2]], &m);
        let params = RtrParams {
            loops: 0,
            ..RtrParams::default()
        };
        assert_eq!(rtr_improve(&start, &m, 10, &params), start);
    }

    #[test]
    fn merges_routes_when_capacity_allows() {
        // two round trips to nearby customers should end up in one route
        let m = matrix(&[(0.0, 0.0), (10.0, 0.0), (10.0, 1.0)]);
        let start = plan(vec![vec![1], vec![2]], &m);
        let out = rtr_improve(&start, &m, 10, &RtrParams::default());
        assert_eq!(out.routes.len(), 1);
        out.check(10, &m).unwrap();
    }

    #[test]
    fn respects_capacity_and_keeps_customers() {
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let a = i as f64 * 0.7;
                (
                    a.cos() * (5.0 + i as f64 % 7.0),
                    a.sin() * (3.0 + i as f64 % 5.0),
                )
            })
            .collect();
        let m = matrix(&pts);
        let deliveries: Vec<(usize, u64)> = (1..40).map(|c| (c, 1 + (c as u64 * 7) % 9)).collect();
        let start = savings_routes(&deliveries, 25, &m).unwrap();
        for seed in 0..5 {
            let out = rtr_improve(
                &start,
                &m,
                25,
                &RtrParams {
                    seed,
                    ..RtrParams::default()
                },
            );
            out.check(25, &m).unwrap();
            assert!(out.total_length <= start.total_length);
            assert_eq!(out.delivered(), start.delivered());
        }
    }
}
