//! Integer flow systems over automata and their decoding into traces.

use std::collections::VecDeque;

use crate::automaton::{ActionKind, ActionVector, ContractAutomaton, Trace};
use crate::milp::{solve_milp, solve_milp_with_cuts, MilpModel, MilpOptions, MilpOutcome, Rational, Relation, VarId, VarKind};

use super::WeakError;

/// The contribution of a label to the balance of `name`: +1 for a lone
/// offer, -1 for a lone request, 0 otherwise.
pub fn coefficient(label: &ActionVector, name: &str) -> i64 {
    match label.kind() {
        ActionKind::Offer { name: n, .. } if n == name => 1,
        ActionKind::Request { name: n, .. } if n == name => -1,
        _ => 0,
    }
}

/// How runs with flow on a cycle detached from the source are excluded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Connectivity {
    /// One auxiliary continuous flow per visited state, routed inside the
    /// support of `x`, carries a unit from the source to that state. Exact
    /// in a single program but large: about one variable per state and
    /// transition pair.
    AuxiliaryFlows,
    /// Cut inequalities `x_t <= cap * x(in(S))` for every state set `S`
    /// avoiding the source and every transition `t` leaving `S`, added
    /// only when an optimal solution violates them. By max-flow/min-cut
    /// these describe the same integer flows as the auxiliary flows.
    #[default]
    LazyCuts,
}

/// The integer program whose solutions are the flows of the runs from
/// `source` to `dest` taking every transition at most `cap` times.
///
/// Only the transitions lying on some path from `source` to `dest` get a
/// variable; the others are fixed to zero. Programs built on top of
/// [`FlowSystem::model`] must be solved with [`FlowSystem::solve`], which
/// supplies the connectivity cuts when they are lazy.
#[derive(Clone, Debug)]
pub struct FlowSystem {
    pub model: MilpModel,
    x: Vec<Option<VarId>>,
    source: usize,
    dest: usize,
    cap: u64,
    connectivity: Connectivity,
    /// Cuts found so far, as (transition, entering transitions). They hold
    /// for every run, so they carry over between objectives.
    cuts: Vec<(usize, Vec<usize>)>,
    states: usize,
    from: Vec<usize>,
    to: Vec<usize>,
}

impl FlowSystem {
    pub fn new(a: &ContractAutomaton, source: usize, dest: usize, cap: u64) -> Self {
        Self::with_connectivity(a, source, dest, cap, Connectivity::LazyCuts)
    }

    pub fn with_connectivity(
        a: &ContractAutomaton,
        source: usize,
        dest: usize,
        cap: u64,
        connectivity: Connectivity,
    ) -> Self {
        let n = a.states().len();
        let from_s = reachable_from(a, source, |_| true);
        let to_d = a.coreachable_to([dest]);
        let relevant: Vec<bool> =
            a.transitions().iter().map(|t| from_s[t.from] && to_d[t.to]).collect();
        let mut in_r = vec![false; n];
        in_r[source] = true;
        in_r[dest] = true;
        for (t, tr) in a.transitions().iter().enumerate() {
            if relevant[t] {
                in_r[tr.from] = true;
                in_r[tr.to] = true;
            }
        }

        let mut model = MilpModel::new();
        let capq = Rational::from(cap);
        let one = Rational::one();
        let neg = Rational::from_integer(-1);
        let x: Vec<Option<VarId>> = (0..a.transitions().len())
            .map(|t| {
                relevant[t].then(|| {
                    model.add_var(format!("x{t}"), VarKind::Integer, Some(Rational::zero()), Some(capq.clone()))
                })
            })
            .collect();

        let terms_in_out = |q: usize, vars: &dyn Fn(usize) -> Option<VarId>| {
            let mut terms = Vec::new();
            for &t in a.incoming(q) {
                if let Some(v) = vars(t) {
                    terms.push((v, one.clone()));
                }
            }
            for &t in a.outgoing(q) {
                if let Some(v) = vars(t) {
                    terms.push((v, neg.clone()));
                }
            }
            terms
        };

        for q in (0..n).filter(|&q| in_r[q]) {
            let rhs = i64::from(q == dest) - i64::from(q == source);
            let terms = terms_in_out(q, &|t| x[t]);
            model.add_constraint(format!("bal{q}"), terms, Relation::Eq, Rational::from_integer(rhs));
        }

        let auxiliary = connectivity == Connectivity::AuxiliaryFlows;
        for q in (0..n).filter(|&q| auxiliary && in_r[q] && q != source) {
            let fs: Vec<VarId> = a.outgoing(q).iter().filter_map(|&t| x[t]).collect();
            if fs.is_empty() {
                continue;
            }
            let p = model.add_var(format!("p{q}"), VarKind::Binary, None, None);
            let mut lower = vec![(p, one.clone())];
            lower.extend(fs.iter().map(|v| (*v, neg.clone())));
            model.add_constraint(format!("pl{q}"), lower, Relation::Le, Rational::zero());
            let big_m = Rational::from(cap * fs.len() as u64);
            let mut upper: Vec<(VarId, Rational)> = fs.iter().map(|v| (*v, one.clone())).collect();
            upper.push((p, -big_m));
            model.add_constraint(format!("pu{q}"), upper, Relation::Le, Rational::zero());

            // Auxiliary flow from the source to q inside the support of x.
            let to_q = co_within(a, q, &relevant);
            let z: Vec<Option<VarId>> = (0..a.transitions().len())
                .map(|t| {
                    (relevant[t] && to_q[a.transitions()[t].to]).then(|| {
                        model.add_var(format!("z{q}_{t}"), VarKind::Continuous, Some(Rational::zero()), None)
                    })
                })
                .collect();
            for (t, zv) in z.iter().enumerate() {
                if let (Some(zv), Some(xv)) = (zv, x[t]) {
                    model.add_constraint(
                        format!("zx{q}_{t}"),
                        vec![(*zv, one.clone()), (xv, neg.clone())],
                        Relation::Le,
                        Rational::zero(),
                    );
                }
            }
            for r in (0..n).filter(|&r| in_r[r]) {
                let mut terms = terms_in_out(r, &|t| z[t]);
                if r == source {
                    terms.push((p, one.clone()));
                }
                if r == q {
                    terms.push((p, neg.clone()));
                }
                if !terms.is_empty() {
                    model.add_constraint(format!("zb{q}_{r}"), terms, Relation::Eq, Rational::zero());
                }
            }
        }
        FlowSystem {
            model,
            x,
            source,
            dest,
            cap,
            connectivity,
            cuts: Vec::new(),
            states: n,
            from: a.transitions().iter().map(|t| t.from).collect(),
            to: a.transitions().iter().map(|t| t.to).collect(),
        }
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn dest(&self) -> usize {
        self.dest
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn connectivity(&self) -> Connectivity {
        self.connectivity
    }

    /// The variable of transition `t`, if it can carry flow.
    pub fn x_var(&self, t: usize) -> Option<VarId> {
        self.x[t]
    }

    /// Solves `model`, an extension of [`FlowSystem::model`], over the
    /// connected flows only. The node count adds up over all rounds.
    pub fn solve(&mut self, model: &MilpModel, options: &MilpOptions) -> MilpOutcome {
        let mut m = model.clone();
        if self.connectivity == Connectivity::AuxiliaryFlows {
            return solve_milp(&m, options);
        }
        for i in 0..self.cuts.len() {
            self.add_cut(&mut m, i);
        }
        // Cuts are separated at every node, fractional ones included: any
        // stranded support is cut off by its piece.
        let mut separate = |sol: &[Rational], m: &mut MilpModel| {
            let support: Vec<bool> =
                self.x.iter().map(|v| v.is_some_and(|v| sol[v.0].is_positive())).collect();
            let found = self.violated_cuts(&support);
            if found.is_empty() {
                return false;
            }
            for cut in found {
                self.cuts.push(cut);
                self.add_cut(m, self.cuts.len() - 1);
            }
            true
        };
        solve_milp_with_cuts(&m, options, &mut separate)
    }

    fn add_cut(&self, m: &mut MilpModel, i: usize) {
        let (t, entering) = &self.cuts[i];
        let mut terms = vec![(self.x[*t].expect("cut on a live transition"), Rational::one())];
        let c = -Rational::from(self.cap);
        terms.extend(entering.iter().map(|&e| (self.x[e].expect("live"), c.clone())));
        m.add_constraint(format!("cut{i}"), terms, Relation::Le, Rational::zero());
    }

    /// For a flow whose support leaves part of its states unreachable from
    /// the source, one cut per stranded transition: flow leaving a piece of
    /// that part needs flow entering the piece.
    fn violated_cuts(&self, flow: &[bool]) -> Vec<(usize, Vec<usize>)> {
        let mut seen = vec![false; self.states];
        seen[self.source] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for (t, &f) in flow.iter().enumerate() {
                if f && seen[self.from[t]] && !seen[self.to[t]] {
                    seen[self.to[t]] = true;
                    changed = true;
                }
            }
        }
        // Union-find over the unreached support.
        let mut parent: Vec<usize> = (0..self.states).collect();
        fn root(parent: &mut [usize], mut q: usize) -> usize {
            while parent[q] != q {
                parent[q] = parent[parent[q]];
                q = parent[q];
            }
            q
        }
        let stranded: Vec<usize> = (0..flow.len()).filter(|&t| flow[t] && !seen[self.from[t]]).collect();
        for &t in stranded.iter().filter(|&&t| !seen[self.to[t]]) {
            let (u, v) = (root(&mut parent, self.from[t]), root(&mut parent, self.to[t]));
            parent[u] = v;
        }
        let mut cuts = Vec::new();
        for &t in &stranded {
            let piece = root(&mut parent, self.from[t]);
            let mut inside = vec![false; self.states];
            for u in (0..self.states).filter(|&u| !seen[u]) {
                inside[u] = root(&mut parent, u) == piece;
            }
            let entering = (0..flow.len())
                .filter(|&e| self.x[e].is_some() && !inside[self.from[e]] && inside[self.to[e]])
                .collect();
            cuts.push((t, entering));
        }
        cuts
    }

    /// `Σ_t coefficient(t, name) · x_t` as model terms.
    pub fn balance_terms(&self, a: &ContractAutomaton, name: &str) -> Vec<(VarId, Rational)> {
        a.transitions()
            .iter()
            .enumerate()
            .filter_map(|(t, tr)| {
                let c = coefficient(&tr.label, name);
                match (c, self.x[t]) {
                    (0, _) | (_, None) => None,
                    (c, Some(v)) => Some((v, Rational::from_integer(c))),
                }
            })
            .collect()
    }

    /// Reads the transition flow out of a model solution.
    pub fn flow_of(&self, solution: &[Rational]) -> Vec<u64> {
        self.x
            .iter()
            .map(|v| match v {
                Some(v) => solution[v.index()].to_i64().and_then(|n| u64::try_from(n).ok()).unwrap_or(0),
                None => 0,
            })
            .collect()
    }
}

fn reachable_from(a: &ContractAutomaton, s: usize, usable: impl Fn(usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; a.states().len()];
    seen[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(q) = queue.pop_front() {
        for &t in a.outgoing(q) {
            let r = a.transitions()[t].to;
            if usable(t) && !seen[r] {
                seen[r] = true;
                queue.push_back(r);
            }
        }
    }
    seen
}

/// States that reach `q` using only the transitions flagged in `usable`.
fn co_within(a: &ContractAutomaton, q: usize, usable: &[bool]) -> Vec<bool> {
    let mut seen = vec![false; a.states().len()];
    seen[q] = true;
    let mut queue = VecDeque::from([q]);
    while let Some(r) = queue.pop_front() {
        for &t in a.incoming(r) {
            let p = a.transitions()[t].from;
            if usable[t] && !seen[p] {
                seen[p] = true;
                queue.push_back(p);
            }
        }
    }
    seen
}

/// Decodes a flow from `source` to `dest` into a trace using every
/// transition exactly as many times as its flow.
///
/// The walk goes backwards from `dest`, always taking the lowest-indexed
/// incoming transition with residual flow; cycles stranded by the greedy
/// walk are spliced in (Hierholzer's algorithm on the reversed graph).
pub fn flow_to_trace(
    a: &ContractAutomaton,
    flow: &[u64],
    source: usize,
    dest: usize,
) -> Result<Trace, WeakError> {
    if flow.len() != a.transitions().len() {
        return Err(WeakError::InfeasibleFlow(format!(
            "expected {} flow values, got {}",
            a.transitions().len(),
            flow.len()
        )));
    }
    for q in 0..a.states().len() {
        let inflow: u64 = a.incoming(q).iter().map(|&t| flow[t]).sum();
        let outflow: u64 = a.outgoing(q).iter().map(|&t| flow[t]).sum();
        let expected = i128::from(q == dest) - i128::from(q == source);
        if inflow as i128 - outflow as i128 != expected {
            return Err(WeakError::InfeasibleFlow(format!("unbalanced at state {}", a.state(q))));
        }
    }
    let mut residual = flow.to_vec();
    let mut stack: Vec<(usize, Option<usize>)> = vec![(dest, None)];
    let mut path = Vec::with_capacity(flow.iter().sum::<u64>() as usize);
    while let Some(&(v, e)) = stack.last() {
        match a.incoming(v).iter().copied().find(|&t| residual[t] > 0) {
            Some(t) => {
                residual[t] -= 1;
                stack.push((a.transitions()[t].from, Some(t)));
            }
            None => {
                stack.pop();
                if let Some(e) = e {
                    path.push(e);
                }
            }
        }
    }
    if residual.iter().any(|&r| r > 0) {
        return Err(WeakError::InfeasibleFlow("flow is not connected".into()));
    }
    if path.first().is_some_and(|&t| a.transitions()[t].from != source) {
        return Err(WeakError::InfeasibleFlow("flow does not start at the source".into()));
    }
    Ok(a.labels_of(&path))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The four-transition example: a = (q0,q1), b = (q1,q2), c = (q1,q0),
    /// d = (q2,q0), with final state q2.
    fn abcd() -> ContractAutomaton {
        ContractAutomaton::principal(
            "q0",
            &["q2"],
            &[("q0", "!a", "q1"), ("q1", "!b", "q2"), ("q1", "!c", "q0"), ("q2", "!d", "q0")],
        )
        .unwrap()
    }

    fn word(t: &Trace) -> String {
        t.actions().iter().map(|a| a.get(0).name().unwrap().to_string()).collect()
    }

    #[test]
    fn backward_walk_decodes_the_example_flow() {
        let a = abcd();
        let t = flow_to_trace(&a, &[3, 2, 1, 1], 0, 2).unwrap();
        assert_eq!(word(&t), "abdacab");
        assert!(a.accepts(&t).unwrap());
    }

    #[test]
    fn stranded_cycles_are_spliced() {
        // Walking back from f the lowest-indexed entry into u comes from s,
        // which strands the loop on u unless it is spliced in.
        let a = ContractAutomaton::principal(
            "s",
            &["f"],
            &[("u", "!x", "f"), ("s", "!y", "u"), ("u", "!z", "u")],
        )
        .unwrap();
        let t = flow_to_trace(&a, &[1, 1, 2], 0, 2).unwrap();
        assert_eq!(word(&t), "yzzx");
        assert_eq!(word(&flow_to_trace(&abcd(), &[2, 1, 1, 0], 0, 2).unwrap()), "acab");
    }

    #[test]
    fn rejects_unbalanced_and_disconnected_flows() {
        let a = abcd();
        assert!(matches!(flow_to_trace(&a, &[1, 0, 0, 0], 0, 2), Err(WeakError::InfeasibleFlow(_))));
        let b = ContractAutomaton::principal(
            "s",
            &["f"],
            &[("s", "!a", "f"), ("u", "!b", "v"), ("v", "!c", "u")],
        )
        .unwrap();
        assert!(matches!(flow_to_trace(&b, &[1, 1, 1], 0, 1), Err(WeakError::InfeasibleFlow(_))));
    }

    #[test]
    fn disconnected_cycles_are_not_flows() {
        // Forcing flow onto a cycle unreachable from the run is infeasible.
        let b = ContractAutomaton::principal(
            "s",
            &["f"],
            &[("s", "!a", "f"), ("s", "!x", "u"), ("u", "!b", "v"), ("v", "!c", "u"), ("u", "!y", "f")],
        )
        .unwrap();
        let f = b.state_index(&crate::StateVector::single("f")).unwrap();
        for mode in [Connectivity::AuxiliaryFlows, Connectivity::LazyCuts] {
            let mut sys = FlowSystem::with_connectivity(&b, 0, f, 3, mode);
            let mut m = sys.model.clone();
            let xa = sys.x_var(0).unwrap();
            let xb = sys.x_var(2).unwrap();
            m.add_constraint("use a", vec![(xa, Rational::one())], Relation::Eq, Rational::one());
            m.add_constraint("use b", vec![(xb, Rational::one())], Relation::Ge, Rational::one());
            assert!(matches!(sys.solve(&m, &MilpOptions::default()), MilpOutcome::Infeasible));

            let mut m = sys.model.clone();
            m.add_constraint("use b", vec![(xb, Rational::one())], Relation::Ge, Rational::from_integer(2));
            match sys.solve(&m, &MilpOptions::default()) {
                MilpOutcome::Optimal { x, .. } => {
                    let flow = sys.flow_of(&x);
                    let t = flow_to_trace(&b, &flow, 0, 1).unwrap();
                    assert!(b.accepts(&t).unwrap());
                }
                o => panic!("{o:?}"),
            }
        }
    }
}
