use std::collections::{BTreeMap, VecDeque};

use super::{ActionVector, ContractAutomaton};

/// Structural isomorphism of the reachable parts of two automata: a
/// bijection of reachable states preserving the initial state, finality and
/// labelled transitions. State names and declared alphabets are ignored.
///
/// States are matched in breadth-first order from the initial state; ties
/// between equally-labelled successors are resolved by backtracking.
pub fn isomorphic(a: &ContractAutomaton, b: &ContractAutomaton) -> bool {
    if a.rank() != b.rank() {
        return false;
    }
    let a = a.trim();
    let b = b.trim();
    if a.states().len() != b.states().len()
        || a.transitions().len() != b.transitions().len()
        || a.finals().len() != b.finals().len()
    {
        return false;
    }
    let sig_a: Vec<Signature> = (0..a.states().len()).map(|q| signature(&a, q)).collect();
    let sig_b: Vec<Signature> = (0..b.states().len()).map(|q| signature(&b, q)).collect();

    // Breadth-first spanning tree of `a`: each non-initial state together
    // with the (parent, label) through which it was discovered.
    let mut order = vec![a.initial()];
    let mut tree: Vec<Option<(usize, &ActionVector)>> = vec![None; a.states().len()];
    let mut seen = vec![false; a.states().len()];
    seen[a.initial()] = true;
    let mut queue = VecDeque::from([a.initial()]);
    while let Some(q) = queue.pop_front() {
        for &t in a.outgoing(q) {
            let t = &a.transitions()[t];
            if !seen[t.to] {
                seen[t.to] = true;
                tree[t.to] = Some((q, &t.label));
                order.push(t.to);
                queue.push_back(t.to);
            }
        }
    }

    let mut map = vec![usize::MAX; a.states().len()];
    let mut used = vec![false; b.states().len()];
    if sig_a[a.initial()] != sig_b[b.initial()] {
        return false;
    }
    map[a.initial()] = b.initial();
    used[b.initial()] = true;
    let ctx = Ctx { a: &a, b: &b, sig_a: &sig_a, sig_b: &sig_b, order: &order, tree: &tree };
    ctx.extend(1, &mut map, &mut used)
}

/// Finality plus the sorted outgoing and incoming label multisets.
#[derive(PartialEq, Eq)]
struct Signature {
    is_final: bool,
    out: BTreeMap<ActionVector, usize>,
    inc: BTreeMap<ActionVector, usize>,
}

fn signature(a: &ContractAutomaton, q: usize) -> Signature {
    let mut out = BTreeMap::new();
    for &t in a.outgoing(q) {
        *out.entry(a.transitions()[t].label.clone()).or_insert(0) += 1;
    }
    let mut inc = BTreeMap::new();
    for &t in a.incoming(q) {
        *inc.entry(a.transitions()[t].label.clone()).or_insert(0) += 1;
    }
    Signature { is_final: a.is_final(q), out, inc }
}

struct Ctx<'a> {
    a: &'a ContractAutomaton,
    b: &'a ContractAutomaton,
    sig_a: &'a [Signature],
    sig_b: &'a [Signature],
    order: &'a [usize],
    tree: &'a [Option<(usize, &'a ActionVector)>],
}

impl Ctx<'_> {
    fn extend(&self, k: usize, map: &mut [usize], used: &mut [bool]) -> bool {
        if k == self.order.len() {
            return self.edges_preserved(map);
        }
        let q = self.order[k];
        let (parent, label) = self.tree[q].expect("non-initial state has a parent");
        let image = map[parent];
        for &t in self.b.outgoing(image) {
            let t = &self.b.transitions()[t];
            let r = t.to;
            if &t.label != label || used[r] || self.sig_a[q] != self.sig_b[r] {
                continue;
            }
            map[q] = r;
            used[r] = true;
            if self.extend(k + 1, map, used) {
                return true;
            }
            used[r] = false;
            map[q] = usize::MAX;
        }
        false
    }

    fn edges_preserved(&self, map: &[usize]) -> bool {
        let mut in_b = std::collections::HashSet::new();
        for t in self.b.transitions() {
            in_b.insert((t.from, &t.label, t.to));
        }
        self.a.transitions().iter().all(|t| in_b.contains(&(map[t.from], &t.label, map[t.to])))
    }
}
