//! Weak liability: the transitions after which weak agreement is lost.
//!
//! A transition `t = (q, a, q')` is flagged when some run reaching `q` can
//! still be completed into a trace in weak agreement, while no completion
//! starting with `t` can. Both conditions only depend on the balance vector
//! of the run so far, so runs are explored as classes `(state, balances)`.
//! For a class `(q, β)` the value
//!
//! ```text
//! G(q, β) = max over runs u from q to the final state of min_i (β_i + bal_i(u))
//! ```
//!
//! is computed by an integer program; a class is completable iff
//! `G(q, β) ≥ 0`. The transition is flagged iff `G(q', β + a) < 0` for some
//! completable class at `q`, and its `γ` is the least such value.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::automaton::{ActionVector, ContractAutomaton, StateVector, Trace};
use crate::milp::{MilpOutcome, Rational, Relation, Sense, VarKind};

use super::flow::{coefficient, FlowSystem};
use super::{balance_names, normalize, WeakError, WeakOptions};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlaggedTransition {
    pub from: StateVector,
    pub label: ActionVector,
    pub to: StateVector,
    /// The least best-achievable balance after taking the transition.
    pub gamma: Rational,
    /// 1-based indices of the principals moving in the transition.
    pub principals: BTreeSet<usize>,
    /// A run reaching the source of the transition along which it is fatal.
    pub prefix: Trace,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakLiability {
    pub flagged: Vec<FlaggedTransition>,
    /// Union of the principals of the flagged transitions.
    pub principals: BTreeSet<usize>,
    pub cap: u64,
    /// Number of completable balance classes explored.
    pub classes: usize,
}

struct Oracle<'a> {
    a: &'a ContractAutomaton,
    dest: usize,
    cap: u64,
    names: &'a [String],
    options: &'a WeakOptions,
    systems: HashMap<usize, FlowSystem>,
    negative: HashMap<(usize, Vec<i64>), Option<Rational>>,
    /// Balance vectors known to be completable, per state.
    completable: HashMap<usize, Vec<Vec<i64>>>,
}

impl Oracle<'_> {
    /// `Some(G(q, β))` when it is negative, `None` otherwise.
    fn negative_g(&mut self, q: usize, beta: &[i64]) -> Result<Option<Rational>, WeakError> {
        if let Some(v) = self.negative.get(&(q, beta.to_vec())) {
            return Ok(v.clone());
        }
        // G is monotone in β.
        if self
            .completable
            .get(&q)
            .is_some_and(|known| known.iter().any(|k| k.iter().zip(beta).all(|(x, y)| x <= y)))
        {
            return Ok(None);
        }
        let (a, dest, cap, conn) = (self.a, self.dest, self.cap, self.options.connectivity);
        let sys = self.systems.entry(q).or_insert_with(|| FlowSystem::with_connectivity(a, q, dest, cap, conn));
        let mut model = sys.model.clone();
        let gamma = model.add_var("gamma", VarKind::Continuous, None, None);
        for (name, b) in self.names.iter().zip(beta) {
            let mut terms = sys.balance_terms(a, name);
            terms.push((gamma, Rational::from_integer(-1)));
            model.add_constraint(format!("min_{name}"), terms, Relation::Ge, Rational::from_integer(-b));
        }
        model.set_objective(Sense::Maximize, vec![(gamma, Rational::one())]);
        model.set_integral_objective(true);
        let value = match sys.solve(&model, &self.options.milp) {
            MilpOutcome::Optimal { value, .. } => value,
            MilpOutcome::CapExceeded { nodes } => return Err(WeakError::CapExceeded { nodes }),
            MilpOutcome::Infeasible | MilpOutcome::Unbounded => {
                return Err(WeakError::InfeasibleFlow(format!(
                    "no run from {} to the final state",
                    a.state(q)
                )))
            }
        };
        let result = value.is_negative().then_some(value);
        if result.is_none() {
            self.completable.entry(q).or_default().push(beta.to_vec());
        }
        self.negative.insert((q, beta.to_vec()), result.clone());
        Ok(result)
    }
}

/// Flags the transitions after which weak agreement becomes unreachable,
/// and blames the principals moving in them. Runs take every transition at
/// most `cap` times; the running balances of explored prefixes are kept
/// within the bounds that cap implies.
pub fn weakly_liable(a: &ContractAutomaton, options: &WeakOptions) -> Result<WeakLiability, WeakError> {
    let n = normalize(a)?;
    let aut = &n.automaton;
    let cap = options.cap_for(&n);
    let names = balance_names(aut);
    let empty = WeakLiability { flagged: Vec::new(), principals: BTreeSet::new(), cap, classes: 0 };
    if names.is_empty() {
        return Ok(empty);
    }
    let coeff: Vec<Vec<i64>> = aut
        .transitions()
        .iter()
        .map(|t| names.iter().map(|name| coefficient(&t.label, name)).collect())
        .collect();
    let cap_i = i64::try_from(cap).unwrap_or(i64::MAX / 4);
    let (mut lo, mut hi) = (vec![0i64; names.len()], vec![0i64; names.len()]);
    for c in &coeff {
        for (i, v) in c.iter().enumerate() {
            match v {
                -1 => lo[i] -= cap_i,
                1 => hi[i] += cap_i,
                _ => {}
            }
        }
    }

    let mut oracle = Oracle {
        a: aut,
        dest: n.final_state(),
        cap,
        names: &names,
        options,
        systems: HashMap::new(),
        negative: HashMap::new(),
        completable: HashMap::new(),
    };
    let start = (aut.initial(), vec![0i64; names.len()]);
    if oracle.negative_g(start.0, &start.1)?.is_some() {
        return Ok(empty);
    }
    // Completable classes with the (class, transition) they were reached by.
    let mut classes: Vec<((usize, Vec<i64>), Option<(usize, usize)>)> = vec![(start.clone(), None)];
    let mut index: HashMap<(usize, Vec<i64>), usize> = HashMap::from([(start, 0)]);
    let mut queue = VecDeque::from([0usize]);
    let mut worst: BTreeMap<usize, (Rational, usize)> = BTreeMap::new();
    while let Some(c) = queue.pop_front() {
        let (q, beta) = classes[c].0.clone();
        for &t in aut.outgoing(q) {
            if n.is_dummy(t) {
                continue;
            }
            let to = aut.transitions()[t].to;
            let next: Vec<i64> = beta.iter().zip(&coeff[t]).map(|(b, d)| b + d).collect();
            if let Some(g) = oracle.negative_g(to, &next)? {
                let entry = worst.entry(t).or_insert_with(|| (g.clone(), c));
                if g < entry.0 {
                    *entry = (g, c);
                }
                continue;
            }
            let inside = next.iter().enumerate().all(|(i, v)| lo[i] <= *v && *v <= hi[i]);
            let key = (to, next);
            if inside && !index.contains_key(&key) {
                index.insert(key.clone(), classes.len());
                queue.push_back(classes.len());
                classes.push((key, Some((c, t))));
            }
        }
    }

    let prefix_of = |mut c: usize| {
        let mut path = Vec::new();
        while let Some((parent, t)) = classes[c].1 {
            path.push(t);
            c = parent;
        }
        path.reverse();
        aut.labels_of(&path)
    };
    let mut flagged = Vec::new();
    let mut principals = BTreeSet::new();
    for (t, (gamma, c)) in worst {
        let tr = &aut.transitions()[t];
        let movers: BTreeSet<usize> = tr.label.movers().map(|i| i + 1).collect();
        principals.extend(movers.iter().copied());
        flagged.push(FlaggedTransition {
            from: aut.state(tr.from).clone(),
            label: tr.label.clone(),
            to: aut.state(tr.to).clone(),
            gamma,
            principals: movers,
            prefix: prefix_of(c),
        });
    }
    Ok(WeakLiability { flagged, principals, cap, classes: classes.len() })
}
