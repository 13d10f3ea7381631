//! Best-bound branch and cut over the exact simplex.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::model::{MilpModel, Sense, VarKind};
use super::simplex::{solve_lp_with_bounds, LpOutcome};
use super::Rational;

pub const DEFAULT_NODE_BUDGET: u64 = 100_000;

/// Environment variable overriding the default node budget.
pub const NODE_BUDGET_ENV: &str = "CAK_NODE_BUDGET";

#[derive(Clone, Debug)]
pub struct MilpOptions {
    /// Maximum number of LP relaxations solved before giving up.
    pub node_budget: u64,
}

impl Default for MilpOptions {
    fn default() -> Self {
        let node_budget = std::env::var(NODE_BUDGET_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_NODE_BUDGET);
        MilpOptions { node_budget }
    }
}

#[derive(Clone, Debug)]
pub enum MilpOutcome {
    Optimal { value: Rational, x: Vec<Rational>, nodes: u64 },
    Infeasible,
    Unbounded,
    CapExceeded { nodes: u64 },
}

struct Node {
    /// Bound in minimisation form (smaller is better).
    bound: Rational,
    depth: usize,
    seq: u64,
    changes: Vec<(usize, Option<Rational>, Option<Rational>)>,
    branch_var: usize,
    branch_value: Rational,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    /// Max-heap order: best bound first, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(Reverse(self.seq).cmp(&Reverse(other.seq)))
    }
}

/// The fractional integer variable with the smallest integer part, most
/// fractional among those, lowest index on ties. Small values first means
/// support decisions (is a transition used at all) are settled before
/// multiplicities.
fn branching_var(model: &MilpModel, x: &[Rational]) -> Option<(usize, Rational)> {
    let mut best: Option<(usize, (Reverse<Rational>, Rational))> = None;
    for (j, v) in model.vars.iter().enumerate() {
        if v.kind == VarKind::Continuous || x[j].is_integer() {
            continue;
        }
        let key = (Reverse(x[j].floor()), x[j].fractionality());
        if best.as_ref().map_or(true, |(_, b)| key > *b) {
            best = Some((j, key));
        }
    }
    best.map(|(j, _)| (j, x[j].clone()))
}

/// Solves a MILP exactly: a rounding dive for a first incumbent, then
/// best-bound branch and bound.
pub fn solve_milp(model: &MilpModel, options: &MilpOptions) -> MilpOutcome {
    solve_milp_with_cuts(model, options, &mut |_: &[Rational], _: &mut MilpModel| false)
}

/// Branch and cut. After every relaxation `separate` may append constraints
/// to the model that the relaxation optimum violates; the node is then
/// solved again. An integral point is accepted only once `separate` adds
/// nothing, so the cuts may be lazy constraints that the initial model
/// leaves out, as long as every solution of interest satisfies them.
pub fn solve_milp_with_cuts(
    model: &MilpModel,
    options: &MilpOptions,
    separate: &mut dyn FnMut(&[Rational], &mut MilpModel) -> bool,
) -> MilpOutcome {
    let mut model = model.clone();
    let maximize = model.sense == Sense::Maximize;
    let to_min = |v: &Rational| if maximize { -v } else { v.clone() };
    // With an integral objective, a node bound can be rounded towards the
    // worse side before comparing with the incumbent.
    let integral = model.integral_objective;
    let effective = |b: &Rational| if integral { b.ceil() } else { b.clone() };
    let base: Vec<(Option<Rational>, Option<Rational>)> = model
        .vars
        .iter()
        .map(|v| match v.kind {
            VarKind::Continuous => (v.lower.clone(), v.upper.clone()),
            _ => (v.lower.as_ref().map(Rational::ceil), v.upper.as_ref().map(Rational::floor)),
        })
        .collect();

    let mut nodes = 0u64;
    let mut seq = 0u64;
    let mut incumbent: Option<(Rational, Vec<Rational>)> = None;
    let mut heap = BinaryHeap::new();

    // Solves the relaxation under `bounds`, separating until nothing is added.
    let mut relax = |model: &mut MilpModel, bounds: &[(Option<Rational>, Option<Rational>)], nodes: &mut u64| loop {
        *nodes += 1;
        match solve_lp_with_bounds(model, bounds) {
            LpOutcome::Optimal(s) => {
                if !separate(&s.x, model) {
                    return LpOutcome::Optimal(s);
                }
            }
            other => return other,
        }
        if *nodes >= options.node_budget {
            return LpOutcome::Infeasible;
        }
    };

    let mut bounds = base.clone();
    let root = relax(&mut model, &bounds, &mut nodes);
    if nodes >= options.node_budget {
        return MilpOutcome::CapExceeded { nodes };
    }
    let root = match root {
        LpOutcome::Infeasible => return MilpOutcome::Infeasible,
        LpOutcome::Unbounded => return MilpOutcome::Unbounded,
        LpOutcome::Optimal(s) => s,
    };
    let Some((j, v)) = branching_var(&model, &root.x) else {
        return MilpOutcome::Optimal { value: root.value, x: root.x, nodes };
    };

    // Rounding dive for an early incumbent: fix the fractional variable
    // nearest its ceiling to that ceiling (or, failing that, its floor) and
    // re-solve, until the relaxation is integral or infeasible.
    let mut fixed = base.clone();
    let mut x = root.x.clone();
    for _ in 0..model.vars.len() {
        let pick = (0..x.len())
            .filter(|&j| model.vars[j].kind != VarKind::Continuous && !x[j].is_integer())
            .max_by(|&a, &b| (&x[a] - x[a].floor()).cmp(&(&x[b] - x[b].floor())).then(b.cmp(&a)));
        let Some(k) = pick else { break };
        let mut next = None;
        for target in [x[k].ceil(), x[k].floor()] {
            fixed[k] = (Some(target.clone()), Some(target));
            if let LpOutcome::Optimal(s) = relax(&mut model, &fixed, &mut nodes) {
                next = Some(s);
                break;
            }
        }
        if nodes >= options.node_budget {
            return MilpOutcome::CapExceeded { nodes };
        }
        let Some(s) = next else { break };
        if branching_var(&model, &s.x).is_none() {
            incumbent = Some((to_min(&s.value), s.x));
            break;
        }
        x = s.x;
    }

    if incumbent.as_ref().map_or(true, |(inc, _)| effective(&to_min(&root.value)) < *inc) {
        heap.push(Node {
            bound: to_min(&root.value),
            depth: 0,
            seq,
            changes: Vec::new(),
            branch_var: j,
            branch_value: v,
        });
    }

    while let Some(node) = heap.pop() {
        if let Some((inc, _)) = &incumbent {
            if effective(&node.bound) >= *inc {
                break;
            }
        }
        let j = node.branch_var;
        let down = (j, base[j].0.clone(), Some(node.branch_value.floor()));
        let up = (j, Some(node.branch_value.ceil()), base[j].1.clone());
        for (var, lo, hi) in [down, up] {
            if nodes >= options.node_budget {
                return MilpOutcome::CapExceeded { nodes };
            }
            bounds.clone_from(&base);
            let mut changes = node.changes.clone();
            changes.push((var, lo, hi));
            for (v, l, h) in &changes {
                // Later changes only tighten earlier ones.
                let cur = &mut bounds[*v];
                if let Some(l) = l {
                    if cur.0.as_ref().map_or(true, |c| l > c) {
                        cur.0 = Some(l.clone());
                    }
                }
                if let Some(h) = h {
                    if cur.1.as_ref().map_or(true, |c| h < c) {
                        cur.1 = Some(h.clone());
                    }
                }
            }
            let outcome = relax(&mut model, &bounds, &mut nodes);
            if nodes >= options.node_budget {
                return MilpOutcome::CapExceeded { nodes };
            }
            let LpOutcome::Optimal(s) = outcome else { continue };
            let bound = to_min(&s.value);
            if incumbent.as_ref().is_some_and(|(inc, _)| effective(&bound) >= *inc) {
                continue;
            }
            match branching_var(&model, &s.x) {
                None => incumbent = Some((bound, s.x)),
                Some((bv, val)) => {
                    seq += 1;
                    heap.push(Node {
                        bound,
                        depth: node.depth + 1,
                        seq,
                        changes,
                        branch_var: bv,
                        branch_value: val,
                    });
                }
            }
        }
    }
    match incumbent {
        Some((v, x)) => {
            let value = if maximize { -v } else { v };
            MilpOutcome::Optimal { value, x, nodes }
        }
        None => MilpOutcome::Infeasible,
    }
}
