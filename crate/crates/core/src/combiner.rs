//! Chooses which candidate exchanges to carry out together.
//!
//! The problem is a maximum-weight independent set over a conflict graph
//! (two candidates conflict when they cannot both be applied) with one
//! linear side constraint per LSP: the summed profit change of the selected
//! candidates plus the LSP's slack must stay non-negative. The empty
//! selection is always allowed.
//!
//! Optimal selections are ranked by total gain, then by fewer candidates,
//! then by the lexicographically smallest index set. [`select`] and
//! [`select_bruteforce`] share this ranking so their outputs can be
//! compared exactly.

use crate::gat::Action;
use crate::model::{LspId, Money, VehicleId};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

/// Largest input accepted by the exhaustive oracle.
pub const BRUTEFORCE_MAX: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CombinerError {
    #[error("exhaustive selection supports at most {BRUTEFORCE_MAX} candidates, got {0}")]
    TooManyCandidates(usize),
}

/// One selectable item for the engine.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Candidate {
    pub gain: Money,
    pub lsp_deltas: Vec<(LspId, Money)>,
    /// Resources of which a selection may use each at most once. At most two.
    pub exclusive: Vec<u32>,
}

/// Candidates, pairwise conflicts and per-LSP slack.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConflictProblem {
    pub candidates: Vec<Candidate>,
    pub slack: BTreeMap<LspId, Money>,
    /// Conflicts beyond shared exclusive resources, as index pairs.
    pub extra_conflicts: Vec<(usize, usize)>,
}

/// Outcome of the engine: selected indices (ascending) and the totals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    pub indices: Vec<usize>,
    pub total: Money,
    pub per_lsp: BTreeMap<LspId, Money>,
    /// False when the search stopped at its limits.
    pub proven_optimal: bool,
}

/// Dense view shared by both solvers.
struct Prepared {
    gain: Vec<i64>,
    deltas: Vec<Vec<(usize, i64)>>,
    exclusive: Vec<Vec<usize>>,
    adj: Vec<Vec<usize>>,
    slack: Vec<i64>,
    lsps: Vec<LspId>,
    resources: usize,
}

impl Prepared {
    fn new(p: &ConflictProblem) -> Prepared {
        let mut lsp_index: BTreeMap<LspId, usize> = BTreeMap::new();
        for l in p.slack.keys() {
            let next = lsp_index.len();
            lsp_index.entry(*l).or_insert(next);
        }
        for c in &p.candidates {
            for (l, _) in &c.lsp_deltas {
                let next = lsp_index.len();
                lsp_index.entry(*l).or_insert(next);
            }
        }
        let mut lsps = vec![LspId(0); lsp_index.len()];
        let mut slack = vec![0i64; lsp_index.len()];
        for (l, &i) in &lsp_index {
            lsps[i] = *l;
            slack[i] = p.slack.get(l).map_or(0, |m| m.0);
        }
        let mut res_index: HashMap<u32, usize> = HashMap::new();
        let mut exclusive = Vec::with_capacity(p.candidates.len());
        for c in &p.candidates {
            assert!(c.exclusive.len() <= 2, "a candidate may hold at most two exclusive resources");
            exclusive.push(
                c.exclusive
                    .iter()
                    .map(|r| {
                        let next = res_index.len();
                        *res_index.entry(*r).or_insert(next)
                    })
                    .collect::<Vec<_>>(),
            );
        }
        let n = p.candidates.len();
        let mut adj = vec![Vec::new(); n];
        let mut holders: Vec<Vec<usize>> = vec![Vec::new(); res_index.len()];
        for (i, ex) in exclusive.iter().enumerate() {
            for &r in ex {
                holders[r].push(i);
            }
        }
        for h in &holders {
            for (k, &a) in h.iter().enumerate() {
                for &b in &h[k + 1..] {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        for &(a, b) in &p.extra_conflicts {
            if a != b && a < n && b < n {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let deltas = p
            .candidates
            .iter()
            .map(|c| {
                let mut merged: BTreeMap<usize, i64> = BTreeMap::new();
                for (l, m) in &c.lsp_deltas {
                    *merged.entry(lsp_index[l]).or_default() += m.0;
                }
                merged.into_iter().collect()
            })
            .collect();
        Prepared {
            gain: p.candidates.iter().map(|c| c.gain.0).collect(),
            deltas,
            exclusive,
            adj,
            slack,
            lsps,
            resources: res_index.len(),
        }
    }

    fn selection(&self, mut indices: Vec<usize>) -> Selection {
        indices.sort_unstable();
        let mut per = vec![0i64; self.lsps.len()];
        let mut total = 0;
        for &i in &indices {
            total += self.gain[i];
            for &(l, d) in &self.deltas[i] {
                per[l] += d;
            }
        }
        let per_lsp = indices
            .iter()
            .flat_map(|&i| self.deltas[i].iter().map(|&(l, _)| l))
            .map(|l| (self.lsps[l], Money(per[l])))
            .collect();
        Selection { indices, total: Money(total), per_lsp, proven_optimal: true }
    }
}

/// Ranking of two feasible selections given as (total, sorted indices).
fn compare(a_total: i64, a: &[usize], b_total: i64, b: &[usize]) -> Ordering {
    a_total.cmp(&b_total).then_with(|| b.len().cmp(&a.len())).then_with(|| b.cmp(a))
}

/// Effort cap for [`solve_with`]. When reached, the best selection found
/// so far is returned with `proven_optimal == false`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_nodes: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_nodes: 2_000_000 }
    }
}

/// Fixed-point denominator of the multipliers used in bounds.
const LAMBDA_DEN: i64 = 8;

/// Exact branch-and-bound selection with the default limits.
pub fn solve(problem: &ConflictProblem) -> Selection {
    solve_with(problem, SearchLimits::default())
}

pub fn solve_with(problem: &ConflictProblem, limits: SearchLimits) -> Selection {
    let prep = Prepared::new(problem);
    let n = prep.gain.len();
    let n_lsps = prep.slack.len();
    // Candidates that cannot raise the total or anybody's slack never
    // appear in a best selection.
    let mut order: Vec<usize> =
        (0..n).filter(|&i| prep.gain[i] > 0 || prep.deltas[i].iter().any(|&(_, d)| d > 0)).collect();
    order.sort_by(|&a, &b| prep.gain[b].cmp(&prep.gain[a]).then(a.cmp(&b)));

    // Reweightings for the greedy start (in 1/LAMBDA_DEN): plain gain, then
    // favouring one LSP at a time, then all alike.
    let mut lambdas = vec![vec![0; n_lsps]];
    if n_lsps > 0 {
        for l in 0..n_lsps {
            for m in [2, 4, 8, 16] {
                let mut v = vec![0; n_lsps];
                v[l] = m;
                lambdas.push(v);
            }
        }
        if n_lsps > 1 {
            for m in [2, 4, 8] {
                lambdas.push(vec![m; n_lsps]);
            }
        }
    }

    let mut by_resource = vec![Vec::new(); prep.resources];
    for &i in &order {
        for &r in &prep.exclusive[i] {
            by_resource[r].push(i);
        }
    }

    let mut bnb = Bnb {
        prep: &prep,
        order,
        lambdas,
        blocked: vec![0; n],
        picked: vec![false; n],
        lsp_sum: vec![0; n_lsps],
        total: 0,
        chosen: Vec::new(),
        best_total: 0,
        best: Vec::new(),
        share: vec![0; prep.resources],
        clique: vec![0; prep.resources],
        repair: Vec::new(),
        touched: Vec::new(),
        lsp_room: vec![0; n_lsps],
        by_resource,
        potential: vec![0; prep.resources],
        live_weight: vec![0; n],
        live: Vec::new(),
        nodes: 0,
        max_nodes: limits.max_nodes,
        exhausted: false,
    };
    bnb.greedy_incumbent();
    bnb.search(0);
    let proven = !bnb.exhausted;
    let best = std::mem::take(&mut bnb.best);
    let mut sel = prep.selection(best);
    sel.proven_optimal = proven;
    sel
}

struct Bnb<'p> {
    prep: &'p Prepared,
    order: Vec<usize>,
    lambdas: Vec<Vec<i64>>,
    blocked: Vec<u32>,
    picked: Vec<bool>,
    lsp_sum: Vec<i64>,
    total: i64,
    chosen: Vec<usize>,
    best_total: i64,
    best: Vec<usize>,
    // scratch space for bounds
    share: Vec<i64>,
    clique: Vec<i64>,
    repair: Vec<(i64, i64)>,
    touched: Vec<usize>,
    lsp_room: Vec<i64>,
    by_resource: Vec<Vec<usize>>,
    potential: Vec<i64>,
    live_weight: Vec<i64>,
    live: Vec<usize>,
    nodes: u64,
    max_nodes: u64,
    exhausted: bool,
}

impl Bnb<'_> {
    fn ir_ok(&self) -> bool {
        self.lsp_sum.iter().zip(&self.prep.slack).all(|(s, k)| s + k >= 0)
    }

    fn include(&mut self, i: usize) {
        self.total += self.prep.gain[i];
        for &(l, d) in &self.prep.deltas[i] {
            self.lsp_sum[l] += d;
        }
        for &j in &self.prep.adj[i] {
            self.blocked[j] += 1;
        }
        self.picked[i] = true;
        self.chosen.push(i);
    }

    fn remove(&mut self, i: usize) {
        self.total -= self.prep.gain[i];
        for &(l, d) in &self.prep.deltas[i] {
            self.lsp_sum[l] -= d;
        }
        for &j in &self.prep.adj[i] {
            self.blocked[j] -= 1;
        }
        self.picked[i] = false;
        if self.chosen.last() == Some(&i) {
            self.chosen.pop();
        } else {
            self.chosen.retain(|&c| c != i);
        }
    }

    fn offer_current(&mut self) {
        if !self.ir_ok() {
            return;
        }
        let mut sorted = self.chosen.clone();
        sorted.sort_unstable();
        if compare(self.total, &sorted, self.best_total, &self.best) == Ordering::Greater {
            self.best_total = self.total;
            self.best = sorted;
        }
    }

    fn weight(&self, lambda: &[i64], i: usize) -> i64 {
        LAMBDA_DEN * self.prep.gain[i] + self.prep.deltas[i].iter().map(|&(l, d)| lambda[l] * d).sum::<i64>()
    }

    /// Greedy by each reweighting in turn: pack by weight, drop the worst
    /// offenders until every LSP is within its slack, then top up with
    /// whatever still fits.
    fn greedy_incumbent(&mut self) {
        for v in 0..self.lambdas.len() {
            let lambda = self.lambdas[v].clone();
            let mut seq: Vec<(i64, usize)> = self.order.iter().map(|&i| (self.weight(&lambda, i), i)).collect();
            seq.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            for &(w, i) in &seq {
                if w > 0 && self.blocked[i] == 0 {
                    self.include(i);
                }
            }
            while !self.ir_ok() {
                let (l, _) = self
                    .lsp_sum
                    .iter()
                    .zip(&self.prep.slack)
                    .map(|(s, k)| s + k)
                    .enumerate()
                    .min_by_key(|&(_, room)| room)
                    .expect("a violated LSP exists");
                let hurt = |i: usize| self.prep.deltas[i].iter().find(|&&(k, _)| k == l).map_or(0, |&(_, d)| d);
                let victim = self.chosen.iter().copied().filter(|&i| hurt(i) < 0).min_by_key(|&i| (hurt(i), i));
                match victim {
                    Some(i) => self.remove(i),
                    None => break,
                }
            }
            if self.ir_ok() {
                for &(_, i) in &seq {
                    if !self.picked[i] && self.blocked[i] == 0 && self.prep.gain[i] > 0 {
                        self.include(i);
                        if !self.ir_ok() {
                            self.remove(i);
                        }
                    }
                }
                self.offer_current();
            }
            while let Some(&i) = self.chosen.last() {
                self.remove(i);
            }
        }
    }

    /// Returns false when no completion from `pos` can beat the incumbent
    /// or satisfy every LSP's constraint.
    ///
    /// Candidates sharing a resource form a clique of which at most one is
    /// picked, which gives two upper bounds on the gain still obtainable:
    /// split each gain evenly over its resources and sum the largest share
    /// per resource, or assign each candidate whole to one resource
    /// (greedily, to the one whose clique already absorbs the most) and sum
    /// clique maxima. The smaller is reduced by the least gain that must be
    /// sacrificed to repair LSPs below their slack. When that is not enough
    /// to prune, [`Bnb::relaxed_bound`] tightens the first part.
    fn promising(&mut self, pos: usize) -> bool {
        let prep = self.prep;
        for l in 0..self.lsp_room.len() {
            self.lsp_room[l] = self.lsp_sum[l] + prep.slack[l];
        }
        let mut free = 0i64;
        let mut clique_extra = 0i64;
        for &i in &self.order[pos..] {
            if self.blocked[i] > 0 {
                continue;
            }
            for &(l, d) in &prep.deltas[i] {
                if d > 0 {
                    self.lsp_room[l] += d;
                }
            }
            let g = prep.gain[i];
            if g <= 0 {
                continue;
            }
            let ex = &prep.exclusive[i];
            if ex.is_empty() {
                free += 2 * g;
                continue;
            }
            let s = 2 * g / ex.len() as i64;
            let mut host = ex[0];
            for &r in ex {
                if self.share[r] == 0 && self.clique[r] == 0 {
                    self.touched.push(r);
                }
                self.share[r] = self.share[r].max(s);
                if self.clique[r] > self.clique[host] {
                    host = r;
                }
            }
            if self.clique[host] < 2 * g {
                clique_extra += 2 * g - self.clique[host];
                self.clique[host] = 2 * g;
            }
        }
        let mut split = 0;
        for r in self.touched.drain(..) {
            split += self.share[r];
            self.share[r] = 0;
            self.clique[r] = 0;
        }
        if self.lsp_room.iter().any(|&room| room < 0) {
            return false;
        }
        let target = LAMBDA_DEN * self.best_total;
        let repair = LAMBDA_DEN * self.repair_cost(pos);
        let mut bound = LAMBDA_DEN / 2 * (2 * self.total + free + split.min(clique_extra)) - repair;
        if bound >= target {
            bound = bound.min(self.relaxed_bound(pos) - repair);
        }
        match bound.cmp(&target) {
            Ordering::Less => false,
            Ordering::Equal => self.chosen.len() < self.best.len(),
            Ordering::Greater => true,
        }
    }

    /// Upper bound on the total of completions from `pos`, ignoring the LSP
    /// constraints, at scale `LAMBDA_DEN`. The remaining candidates are
    /// edges (or loops) on the resources, so any resource potential covering
    /// every positive gain bounds what a conflict-free subset can collect.
    /// Start from even splits and lower each potential as far as its
    /// neighbours allow; one sweep reaches a fixed point in practice.
    fn relaxed_bound(&mut self, pos: usize) -> i64 {
        let prep = self.prep;
        let mut bound = LAMBDA_DEN * self.total;
        for &i in &self.order[pos..] {
            if self.blocked[i] > 0 {
                continue;
            }
            let w = LAMBDA_DEN * prep.gain[i];
            if w <= 0 {
                continue;
            }
            let ex = &prep.exclusive[i];
            if ex.is_empty() {
                bound += w;
                continue;
            }
            self.live_weight[i] = w;
            self.live.push(i);
            let part = (w + ex.len() as i64 - 1) / ex.len() as i64;
            for &r in ex {
                if self.potential[r] == 0 {
                    self.touched.push(r);
                }
                self.potential[r] = self.potential[r].max(part);
            }
        }
        for _ in 0..2 {
            for t in 0..self.touched.len() {
                let r = self.touched[t];
                let mut need = 0;
                for &i in &self.by_resource[r] {
                    let w = self.live_weight[i];
                    if w <= 0 {
                        continue;
                    }
                    let others: i64 = prep.exclusive[i].iter().filter(|&&s| s != r).map(|&s| self.potential[s]).sum();
                    need = need.max(w - others);
                }
                self.potential[r] = need;
            }
        }
        for r in self.touched.drain(..) {
            bound += self.potential[r];
            self.potential[r] = 0;
        }
        for i in self.live.drain(..) {
            self.live_weight[i] = 0;
        }
        bound
    }

    /// Lower bound on the gain that must be given up to lift every LSP
    /// back to its slack: for each LSP still short, the fractional
    /// knapsack over the remaining losing candidates that raise it, after
    /// crediting what gaining candidates could raise it for free. The
    /// largest such bound over all LSPs.
    fn repair_cost(&mut self, pos: usize) -> i64 {
        let prep = self.prep;
        let mut worst = 0i64;
        for l in 0..prep.slack.len() {
            let mut short = -(self.lsp_sum[l] + prep.slack[l]);
            if short <= 0 {
                continue;
            }
            self.repair.clear();
            for &i in &self.order[pos..] {
                if self.blocked[i] > 0 {
                    continue;
                }
                let Some(&(_, d)) = prep.deltas[i].iter().find(|&&(k, d)| k == l && d > 0) else {
                    continue;
                };
                if prep.gain[i] > 0 {
                    short -= d;
                } else {
                    self.repair.push((-prep.gain[i], d));
                }
            }
            if short <= 0 {
                continue;
            }
            // cheapest loss per unit raised first
            self.repair.sort_unstable_by(|a, b| (a.0 as i128 * b.1 as i128).cmp(&(b.0 as i128 * a.1 as i128)));
            let mut cost = 0i64;
            for &(loss, d) in &self.repair {
                if short <= 0 {
                    break;
                }
                if d <= short {
                    cost += loss;
                    short -= d;
                } else {
                    // fractional part, rounded down to stay a lower bound
                    cost += (loss as i128 * short as i128 / d as i128) as i64;
                    short = 0;
                }
            }
            worst = worst.max(cost);
        }
        worst
    }

    fn search(&mut self, mut pos: usize) {
        self.offer_current();
        loop {
            while pos < self.order.len() && self.blocked[self.order[pos]] > 0 {
                pos += 1;
            }
            if pos == self.order.len() || self.exhausted {
                return;
            }
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                self.exhausted = true;
                return;
            }
            if !self.promising(pos) {
                return;
            }
            let i = self.order[pos];
            self.include(i);
            self.search(pos + 1);
            self.remove(i);
            pos += 1;
        }
    }
}

/// Exhaustive selection over every conflict-free subset; the
/// verification oracle.
pub fn solve_bruteforce(problem: &ConflictProblem) -> Result<Selection, CombinerError> {
    let n = problem.candidates.len();
    if n > BRUTEFORCE_MAX {
        return Err(CombinerError::TooManyCandidates(n));
    }
    let prep = Prepared::new(problem);
    let conflict_mask: Vec<u32> = prep.adj.iter().map(|l| l.iter().fold(0u32, |m, &j| m | (1 << j))).collect();

    struct Walk<'a> {
        prep: &'a Prepared,
        conflict_mask: &'a [u32],
        sums: Vec<i64>,
        members: Vec<usize>,
        best_total: i64,
        best: Vec<usize>,
    }
    impl Walk<'_> {
        fn visit(&mut self, next: usize, mask: u32, total: i64) {
            if next == self.prep.gain.len() {
                let ir = self.sums.iter().zip(&self.prep.slack).all(|(s, k)| s + k >= 0);
                if ir && compare(total, &self.members, self.best_total, &self.best) == Ordering::Greater {
                    self.best_total = total;
                    self.best = self.members.clone();
                }
                return;
            }
            self.visit(next + 1, mask, total);
            if self.conflict_mask[next] & mask == 0 {
                for &(l, d) in &self.prep.deltas[next] {
                    self.sums[l] += d;
                }
                self.members.push(next);
                self.visit(next + 1, mask | (1 << next), total + self.prep.gain[next]);
                self.members.pop();
                for &(l, d) in &self.prep.deltas[next] {
                    self.sums[l] -= d;
                }
            }
        }
    }
    let mut walk = Walk {
        prep: &prep,
        conflict_mask: &conflict_mask,
        sums: vec![0; prep.slack.len()],
        members: Vec::new(),
        best_total: 0,
        best: Vec::new(),
    };
    walk.visit(0, 0, 0);
    let best = walk.best;
    Ok(prep.selection(best))
}

/// GAT action selection input.
#[derive(Clone, Debug)]
pub struct SelectionProblem {
    pub actions: Vec<Action>,
    /// `current profit - Init` per LSP. Missing LSPs have zero slack.
    pub lsp_slack: BTreeMap<LspId, Money>,
    pub vehicles: Vec<VehicleId>,
}

impl SelectionProblem {
    pub fn conflict_problem(&self) -> ConflictProblem {
        ConflictProblem {
            candidates: self
                .actions
                .iter()
                .map(|a| Candidate {
                    gain: a.delta_total,
                    lsp_deltas: a.delta_profit.iter().map(|(l, m)| (*l, *m)).collect(),
                    exclusive: vec![a.vehicles.0 .0, a.vehicles.1 .0],
                })
                .collect(),
            slack: self.lsp_slack.clone(),
            extra_conflicts: Vec::new(),
        }
    }

    fn plan(&self, sel: Selection) -> ExchangePlan {
        ExchangePlan {
            actions: sel.indices.iter().map(|&i| self.actions[i].clone()).collect(),
            selected: sel.indices,
            total_delta: sel.total,
            per_lsp_delta: sel.per_lsp,
            proven_optimal: sel.proven_optimal,
        }
    }
}

/// A vehicle-disjoint, IR-respecting subset of actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExchangePlan {
    /// Indices into the action list, ascending.
    pub selected: Vec<usize>,
    pub actions: Vec<Action>,
    pub total_delta: Money,
    pub per_lsp_delta: BTreeMap<LspId, Money>,
    /// False when the selection search stopped at its limits; the plan is
    /// still feasible, just possibly not the best.
    pub proven_optimal: bool,
}

impl ExchangePlan {
    pub fn empty() -> ExchangePlan {
        ExchangePlan {
            selected: Vec::new(),
            actions: Vec::new(),
            total_delta: Money::ZERO,
            per_lsp_delta: BTreeMap::new(),
            proven_optimal: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

/// Profit-maximizing plan: every vehicle in at most one action, every LSP
/// within its slack.
pub fn select(problem: &SelectionProblem) -> ExchangePlan {
    problem.plan(solve(&problem.conflict_problem()))
}

/// Same contract as [`select`], by enumerating all subsets.
pub fn select_bruteforce(problem: &SelectionProblem) -> Result<ExchangePlan, CombinerError> {
    Ok(problem.plan(solve_bruteforce(&problem.conflict_problem())?))
}
