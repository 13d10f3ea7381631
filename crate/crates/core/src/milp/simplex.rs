//! Exact bounded-variable primal simplex. Pricing is Dantzig's rule; after
//! a run of degenerate pivots it falls back to Bland's rule, which cannot
//! cycle, until the objective moves again.

use super::model::{MilpModel, Relation, Sense};
use super::Rational;

type Row = Vec<(usize, Rational)>;
type Bounds = [(Option<Rational>, Option<Rational>)];

/// Result of solving a linear relaxation.
#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    /// Objective value in the model's own sense.
    pub value: Rational,
    /// One value per model variable.
    pub x: Vec<Rational>,
    /// One dual value per model constraint, for the minimisation form of
    /// the model (a maximisation is solved as the minimisation of `-c`).
    pub duals: Vec<Rational>,
    /// Whether the duals certify optimality: they are dual feasible and the
    /// dual objective equals the primal one exactly.
    pub certified: bool,
}

/// Solves the linear relaxation of `model`.
pub fn solve_lp(model: &MilpModel) -> LpOutcome {
    let bounds: Vec<_> = model.vars.iter().map(|v| (v.lower.clone(), v.upper.clone())).collect();
    solve_lp_with_bounds(model, &bounds)
}

/// How a model variable is expressed over the non-negative columns.
#[derive(Clone, Debug)]
enum VarMap {
    /// x = offset + y
    Shift(usize, Rational),
    /// x = offset - y
    Mirror(usize, Rational),
    /// x = y+ - y-
    Split(usize, usize),
}

fn get(row: &Row, col: usize) -> Option<&Rational> {
    row.binary_search_by_key(&col, |e| e.0).ok().map(|i| &row[i].1)
}

/// `row - f * pivot` for sorted sparse rows.
fn axpy(row: &Row, f: &Rational, pivot: &Row) -> Row {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let take_row = j == pivot.len() || (i < row.len() && row[i].0 < pivot[j].0);
        let take_piv = i == row.len() || (j < pivot.len() && pivot[j].0 < row[i].0);
        if take_row {
            out.push(row[i].clone());
            i += 1;
        } else if take_piv {
            out.push((pivot[j].0, -(f * &pivot[j].1)));
            j += 1;
        } else {
            let v = &row[i].1 - &(f * &pivot[j].1);
            if !v.is_zero() {
                out.push((row[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

struct Tableau {
    rows: Vec<Row>,
    beta: Vec<Rational>,
    basis: Vec<usize>,
    /// Row of each basic column.
    basic_row: Vec<Option<usize>>,
    at_upper: Vec<bool>,
    upper: Vec<Option<Rational>>,
    d: Vec<Rational>,
    objective: Rational,
    /// Consecutive pivots that left the objective unchanged.
    degenerate: usize,
}

const DEGENERATE_RUN: usize = 20;

enum Step {
    Optimal,
    Unbounded,
    Continue,
}

impl Tableau {
    fn value(&self, col: usize) -> Rational {
        match self.basic_row[col] {
            Some(r) => self.beta[r].clone(),
            None if self.at_upper[col] => self.upper[col].clone().expect("at upper bound"),
            None => Rational::zero(),
        }
    }

    fn step(&mut self, banned: &[bool]) -> Step {
        let eligible = |j: usize| {
            if banned[j] || self.basic_row[j].is_some() {
                return false;
            }
            if self.at_upper[j] {
                self.d[j].is_positive()
            } else {
                self.d[j].is_negative() && self.upper[j].as_ref().map_or(true, |u| !u.is_zero())
            }
        };
        let entering = if self.degenerate >= DEGENERATE_RUN {
            (0..self.d.len()).find(|&j| eligible(j))
        } else {
            let mut best: Option<usize> = None;
            for j in (0..self.d.len()).filter(|&j| eligible(j)) {
                if best.map_or(true, |b| self.d[j].abs() > self.d[b].abs()) {
                    best = Some(j);
                }
            }
            best
        };
        let Some(j) = entering else { return Step::Optimal };
        let dir_up = !self.at_upper[j];

        // Ratio test; ties go to the smallest basic column (Bland).
        let mut best: Option<(Rational, usize, bool)> = None;
        let mut alphas = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            let Some(alpha) = get(row, j) else { continue };
            alphas.push((i, alpha.clone()));
            // Rate of change of the basic variable per unit of θ.
            let rate = if dir_up { -alpha } else { alpha.clone() };
            let b = self.basis[i];
            let limit = if rate.is_negative() {
                Some((&self.beta[i] / &(-&rate), false))
            } else {
                self.upper[b].as_ref().map(|u| ((u - &self.beta[i]) / &rate, true))
            };
            if let Some((theta, to_upper)) = limit {
                let better = match &best {
                    None => true,
                    Some((t, r, _)) => theta < *t || (theta == *t && b < self.basis[*r]),
                };
                if better {
                    best = Some((theta, i, to_upper));
                }
            }
        }
        let flip = match (&self.upper[j], &best) {
            (Some(u), Some((t, _, _))) => u <= t,
            (Some(_), None) => true,
            (None, None) => return Step::Unbounded,
            (None, Some(_)) => false,
        };
        let theta = if flip { self.upper[j].clone().unwrap() } else { best.as_ref().unwrap().0.clone() };
        let signed = if dir_up { theta.clone() } else { -&theta };
        if theta.is_zero() {
            self.degenerate += 1;
        } else {
            self.degenerate = 0;
        }

        for (i, alpha) in &alphas {
            self.beta[*i] = &self.beta[*i] - &(alpha * &signed);
        }
        self.objective = &self.objective + &(&self.d[j] * &signed);
        if flip {
            self.at_upper[j] = !self.at_upper[j];
            return Step::Continue;
        }
        let (_, p, to_upper) = best.unwrap();
        let entering_value = &self.value(j) + &signed;
        self.pivot(p, j, entering_value, to_upper);
        Step::Continue
    }

    /// Makes column `j` basic in row `p`. The leaving variable becomes
    /// nonbasic at its upper bound when `to_upper`.
    fn pivot(&mut self, p: usize, j: usize, entering_value: Rational, to_upper: bool) {
        let leaving = self.basis[p];
        let alpha = get(&self.rows[p], j).expect("nonzero pivot").clone();
        let inv = alpha.recip();
        let prow: Row = self.rows[p].iter().map(|(c, v)| (*c, v * &inv)).collect();
        for i in 0..self.rows.len() {
            if i == p {
                continue;
            }
            if let Some(f) = get(&self.rows[i], j).cloned() {
                self.rows[i] = axpy(&self.rows[i], &f, &prow);
            }
        }
        let dj = self.d[j].clone();
        if !dj.is_zero() {
            for (c, v) in &prow {
                self.d[*c] = &self.d[*c] - &(&dj * v);
            }
        }
        self.rows[p] = prow;
        self.basic_row[leaving] = None;
        self.at_upper[leaving] = to_upper;
        self.basis[p] = j;
        self.basic_row[j] = Some(p);
        self.at_upper[j] = false;
        self.beta[p] = entering_value;
    }

    fn run(&mut self, banned: &[bool]) -> bool {
        loop {
            match self.step(banned) {
                Step::Optimal => return true,
                Step::Unbounded => return false,
                Step::Continue => {}
            }
        }
    }

    fn reset_costs(&mut self, cost: &[Rational]) {
        self.degenerate = 0;
        self.d = cost.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (c, v) in row {
                self.d[*c] = &self.d[*c] - &(cb * v);
            }
        }
        self.objective = (0..cost.len())
            .filter(|&c| !cost[c].is_zero())
            .map(|c| &cost[c] * &self.value(c))
            .sum();
    }
}

pub(crate) fn solve_lp_with_bounds(model: &MilpModel, bounds: &Bounds) -> LpOutcome {
    // Columns: structural, then slacks, then one artificial per row.
    let mut maps = Vec::with_capacity(model.vars.len());
    let mut upper: Vec<Option<Rational>> = Vec::new();
    for (lo, hi) in bounds {
        match (lo, hi) {
            (Some(l), Some(h)) if h < l => return LpOutcome::Infeasible,
            (Some(l), h) => {
                maps.push(VarMap::Shift(upper.len(), l.clone()));
                upper.push(h.as_ref().map(|h| h - l));
            }
            (None, Some(h)) => {
                maps.push(VarMap::Mirror(upper.len(), h.clone()));
                upper.push(None);
            }
            (None, None) => {
                maps.push(VarMap::Split(upper.len(), upper.len() + 1));
                upper.push(None);
                upper.push(None);
            }
        }
    }
    let sign = if model.sense == Sense::Maximize { Rational::from_integer(-1) } else { Rational::one() };
    let mut cost = vec![Rational::zero(); upper.len()];
    let mut constant = Rational::zero();
    for (v, c) in &model.objective {
        let c = c * &sign;
        match &maps[v.0] {
            VarMap::Shift(col, off) => {
                cost[*col] = &cost[*col] + &c;
                constant = &constant + &(&c * off);
            }
            VarMap::Mirror(col, off) => {
                cost[*col] = &cost[*col] - &c;
                constant = &constant + &(&c * off);
            }
            VarMap::Split(p, n) => {
                cost[*p] = &cost[*p] + &c;
                cost[*n] = &cost[*n] - &c;
            }
        }
    }

    let m = model.constraints.len();
    let mut rows: Vec<Row> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut row_sign = Vec::with_capacity(m);
    for c in &model.constraints {
        let mut dense: std::collections::BTreeMap<usize, Rational> = Default::default();
        let mut b = c.rhs.clone();
        for (v, a) in &c.terms {
            let mut add = |col: usize, val: Rational| {
                let e = dense.entry(col).or_insert_with(Rational::zero);
                *e = &*e + &val;
            };
            match &maps[v.0] {
                VarMap::Shift(col, off) => {
                    add(*col, a.clone());
                    b = &b - &(a * off);
                }
                VarMap::Mirror(col, off) => {
                    add(*col, -a);
                    b = &b - &(a * off);
                }
                VarMap::Split(p, n) => {
                    add(*p, a.clone());
                    add(*n, -a);
                }
            }
        }
        let slack = match c.relation {
            Relation::Le => Some(Rational::one()),
            Relation::Ge => Some(Rational::from_integer(-1)),
            Relation::Eq => None,
        };
        if let Some(s) = slack {
            dense.insert(upper.len(), s);
            upper.push(None);
            cost.push(Rational::zero());
        }
        let flip = b.is_negative();
        let mut row: Row = dense.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        if flip {
            for e in &mut row {
                e.1 = -&e.1;
            }
            b = -b;
        }
        rows.push(row);
        rhs.push(b);
        row_sign.push(!flip);
    }
    let first_art = upper.len();
    let n = first_art + m;
    for (i, row) in rows.iter_mut().enumerate() {
        row.push((first_art + i, Rational::one()));
        upper.push(None);
    }
    let original: Vec<Row> = rows.clone();
    let mut basic_row = vec![None; n];
    for i in 0..m {
        basic_row[first_art + i] = Some(i);
    }
    let mut t = Tableau {
        rows,
        beta: rhs.clone(),
        basis: (first_art..n).collect(),
        basic_row,
        at_upper: vec![false; n],
        upper,
        d: Vec::new(),
        objective: Rational::zero(),
        degenerate: 0,
    };

    // Phase 1: minimise the sum of the artificials.
    let mut phase1 = vec![Rational::zero(); n];
    for c in phase1.iter_mut().skip(first_art) {
        *c = Rational::one();
    }
    t.reset_costs(&phase1);
    let no_ban = vec![false; n];
    t.run(&no_ban);
    if t.objective.is_positive() {
        return LpOutcome::Infeasible;
    }
    // Drive zero-level artificials out of the basis where possible; rows
    // where that fails are redundant and keep their artificial at zero.
    for p in 0..m {
        if t.basis[p] < first_art {
            continue;
        }
        let col = t.rows[p].iter().map(|e| e.0).find(|&c| c < first_art);
        if let Some(j) = col {
            let v = t.value(j);
            t.pivot(p, j, v, false);
        }
    }

    // Phase 2 with the artificials banned from entering.
    cost.resize(n, Rational::zero());
    t.reset_costs(&cost);
    let mut banned = vec![false; n];
    for b in banned.iter_mut().skip(first_art) {
        *b = true;
    }
    if !t.run(&banned) {
        return LpOutcome::Unbounded;
    }

    let y: Vec<Rational> = (0..first_art).map(|c| t.value(c)).collect();
    let x: Vec<Rational> = maps
        .iter()
        .map(|m| match m {
            VarMap::Shift(c, off) => off + &y[*c],
            VarMap::Mirror(c, off) => off - &y[*c],
            VarMap::Split(p, q) => &y[*p] - &y[*q],
        })
        .collect();

    // Duals of the sign-normalised rows are minus the reduced costs of the
    // artificial columns, whose phase-2 cost is zero.
    let pi: Vec<Rational> = (0..m).map(|i| -&t.d[first_art + i]).collect();
    let certified = certify(&t, &original, &rhs, &cost, &pi, first_art);
    let duals = pi
        .iter()
        .zip(&row_sign)
        .map(|(p, s)| if *s { p.clone() } else { -p })
        .collect();
    let internal = &t.objective + &constant;
    let value = if model.sense == Sense::Maximize { -internal } else { internal };
    LpOutcome::Optimal(LpSolution { value, x, duals, certified })
}

/// Recomputes the reduced costs from the original rows and checks dual
/// feasibility and strong duality.
fn certify(
    t: &Tableau,
    original: &[Row],
    rhs: &[Rational],
    cost: &[Rational],
    pi: &[Rational],
    first_art: usize,
) -> bool {
    let mut reduced: Vec<Rational> = cost[..first_art].to_vec();
    for (i, row) in original.iter().enumerate() {
        for (c, a) in row {
            if *c < first_art {
                reduced[*c] = &reduced[*c] - &(&pi[i] * a);
            }
        }
    }
    let mut dual_obj: Rational = pi.iter().zip(rhs).map(|(p, b)| p * b).sum();
    for (c, r) in reduced.iter().enumerate() {
        let ok = match t.basic_row[c] {
            Some(_) => r.is_zero(),
            None if t.at_upper[c] => {
                dual_obj = &dual_obj + &(r * t.upper[c].as_ref().unwrap());
                !r.is_positive()
            }
            None => !r.is_negative() || t.upper[c].as_ref().is_some_and(|u| u.is_zero()),
        };
        if !ok {
            return false;
        }
    }
    dual_obj == t.objective
}

#[cfg(test)]
mod tests {
    use super::super::model::{MilpModel, Relation, Sense, VarKind};
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn optimal(o: LpOutcome) -> LpSolution {
        match o {
            LpOutcome::Optimal(s) => s,
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_maximisation() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut m = MilpModel::new();
        let x = m.add_var("x", VarKind::Continuous, Some(r(0)), None);
        let y = m.add_var("y", VarKind::Continuous, Some(r(0)), None);
        m.add_constraint("c1", vec![(x, r(1))], Relation::Le, r(4));
        m.add_constraint("c2", vec![(y, r(2))], Relation::Le, r(12));
        m.add_constraint("c3", vec![(x, r(3)), (y, r(2))], Relation::Le, r(18));
        m.set_objective(Sense::Maximize, vec![(x, r(3)), (y, r(5))]);
        let s = optimal(solve_lp(&m));
        assert_eq!(s.value, r(36));
        assert_eq!(s.x, vec![r(2), r(6)]);
        assert!(s.certified);
    }

    #[test]
    fn fractional_vertex_and_free_variables() {
        // min x - y with x + 2y >= 1, 3x - y = 1/2, x free, y <= 3/2
        let mut m = MilpModel::new();
        let x = m.add_var("x", VarKind::Continuous, None, None);
        let y = m.add_var("y", VarKind::Continuous, None, Some(Rational::new(3, 2)));
        m.add_constraint("a", vec![(x, r(1)), (y, r(2))], Relation::Ge, r(1));
        m.add_constraint("b", vec![(x, r(3)), (y, r(-1))], Relation::Eq, Rational::new(1, 2));
        m.set_objective(Sense::Minimize, vec![(x, r(1)), (y, r(-1))]);
        let s = optimal(solve_lp(&m));
        // y = 3x - 1/2, objective -2x + 1/2 decreases with x; y <= 3/2 gives x = 2/3.
        assert_eq!(s.x, vec![Rational::new(2, 3), Rational::new(3, 2)]);
        assert_eq!(s.value, Rational::new(-5, 6));
        assert!(s.certified);
        assert!(m.is_feasible(&s.x));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut m = MilpModel::new();
        let x = m.add_var("x", VarKind::Continuous, Some(r(0)), Some(r(2)));
        m.add_constraint("a", vec![(x, r(1))], Relation::Ge, r(3));
        assert!(matches!(solve_lp(&m), LpOutcome::Infeasible));

        let mut m = MilpModel::new();
        let x = m.add_var("x", VarKind::Continuous, Some(r(0)), None);
        let y = m.add_var("y", VarKind::Continuous, Some(r(0)), None);
        m.add_constraint("a", vec![(x, r(1)), (y, r(-1))], Relation::Le, r(1));
        m.set_objective(Sense::Maximize, vec![(x, r(1))]);
        assert!(matches!(solve_lp(&m), LpOutcome::Unbounded));
    }

    #[test]
    fn redundant_equalities_and_degeneracy() {
        let mut m = MilpModel::new();
        let x = m.add_var("x", VarKind::Continuous, Some(r(0)), None);
        let y = m.add_var("y", VarKind::Continuous, Some(r(0)), None);
        m.add_constraint("a", vec![(x, r(1)), (y, r(1))], Relation::Eq, r(2));
        m.add_constraint("b", vec![(x, r(2)), (y, r(2))], Relation::Eq, r(4));
        m.add_constraint("c", vec![(x, r(1))], Relation::Le, r(0));
        m.set_objective(Sense::Maximize, vec![(y, r(1))]);
        let s = optimal(solve_lp(&m));
        assert_eq!(s.x, vec![r(0), r(2)]);
        assert!(s.certified);
    }

    #[test]
    fn bounded_columns_flip() {
        // max x + y + z, each in [0, 1], x + y + z <= 5/2
        let mut m = MilpModel::new();
        let vs: Vec<_> =
            (0..3).map(|i| m.add_var(format!("v{i}"), VarKind::Continuous, Some(r(0)), Some(r(1)))).collect();
        m.add_constraint("s", vs.iter().map(|v| (*v, r(1))).collect(), Relation::Le, Rational::new(5, 2));
        m.set_objective(Sense::Maximize, vs.iter().map(|v| (*v, r(1))).collect());
        let s = optimal(solve_lp(&m));
        assert_eq!(s.value, Rational::new(5, 2));
        assert!(s.certified);
    }

    #[test]
    fn axpy_merges_sorted_rows() {
        let a: Row = vec![(0, r(1)), (2, r(3))];
        let b: Row = vec![(1, r(1)), (2, r(1))];
        assert_eq!(axpy(&a, &r(3), &b), vec![(0, r(1)), (1, r(-3))]);
    }
}
