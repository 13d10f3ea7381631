use std::fmt::Write as _;

use super::Rational;

/// Handle of a variable inside its model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

#[derive(Clone, Debug)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    /// `None` means unbounded below.
    pub lower: Option<Rational>,
    /// `None` means unbounded above.
    pub upper: Option<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// A mixed-integer linear program over exact rationals.
#[derive(Clone, Debug)]
pub struct MilpModel {
    pub(crate) vars: Vec<Variable>,
    pub(crate) constraints: Vec<Constraint>,
    pub(crate) sense: Sense,
    pub(crate) objective: Vec<(VarId, Rational)>,
    pub(crate) integral_objective: bool,
}

impl Default for MilpModel {
    fn default() -> Self {
        Self::new()
    }
}

impl MilpModel {
    /// An empty feasibility problem (minimise 0).
    pub fn new() -> Self {
        MilpModel {
            vars: Vec::new(),
            constraints: Vec::new(),
            sense: Sense::Minimize,
            objective: Vec::new(),
            integral_objective: false,
        }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: Option<Rational>,
        upper: Option<Rational>,
    ) -> VarId {
        let (lower, upper) = match kind {
            VarKind::Binary => (Some(Rational::zero()), Some(Rational::one())),
            _ => (lower, upper),
        };
        self.vars.push(Variable { name: name.into(), kind, lower, upper });
        VarId(self.vars.len() - 1)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) {
        self.constraints.push(Constraint { name: name.into(), terms, relation, rhs });
    }

    pub fn set_objective(&mut self, sense: Sense, terms: Vec<(VarId, Rational)>) {
        self.sense = sense;
        self.objective = terms;
    }

    /// Declares that every integer-feasible point has an integral objective
    /// value, which lets branch and bound round node bounds.
    pub fn set_integral_objective(&mut self, integral: bool) {
        self.integral_objective = integral;
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, v: VarId) -> &Variable {
        &self.vars[v.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn objective(&self) -> &[(VarId, Rational)] {
        &self.objective
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective.iter().map(|(v, c)| c * &x[v.0]).sum()
    }

    /// Checks bounds, constraints and integrality of an assignment.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.vars.len() {
            return false;
        }
        for (v, val) in self.vars.iter().zip(x) {
            if v.lower.as_ref().is_some_and(|l| val < l) || v.upper.as_ref().is_some_and(|u| val > u) {
                return false;
            }
            if v.kind != VarKind::Continuous && !val.is_integer() {
                return false;
            }
        }
        self.constraints.iter().all(|c| {
            let lhs: Rational = c.terms.iter().map(|(v, a)| a * &x[v.0]).sum();
            match c.relation {
                Relation::Le => lhs <= c.rhs,
                Relation::Eq => lhs == c.rhs,
                Relation::Ge => lhs >= c.rhs,
            }
        })
    }

    /// Plain-text dump in an LP-like format:
    ///
    /// ```text
    /// minimize|maximize
    ///   obj: <terms>
    /// subject to
    ///   <name>: <terms> <= | = | >= <rhs>
    /// bounds
    ///   <lo> <= <var> <= <hi>      (-inf / +inf when unbounded)
    /// general
    ///   <integer vars>
    /// binary
    ///   <binary vars>
    /// end
    /// ```
    ///
    /// A term is `<coef> <var>`; coefficients are exact, printed as `n/d`.
    pub fn to_lp_string(&self) -> String {
        let terms = |ts: &[(VarId, Rational)]| {
            if ts.is_empty() {
                return "0".to_string();
            }
            let parts: Vec<String> =
                ts.iter().map(|(v, c)| format!("{} {}", c, self.vars[v.0].name)).collect();
            parts.join(" + ")
        };
        let mut s = String::new();
        s.push_str(match self.sense {
            Sense::Minimize => "minimize\n",
            Sense::Maximize => "maximize\n",
        });
        let _ = writeln!(s, "  obj: {}", terms(&self.objective));
        s.push_str("subject to\n");
        for c in &self.constraints {
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            let _ = writeln!(s, "  {}: {} {} {}", c.name, terms(&c.terms), rel, c.rhs);
        }
        s.push_str("bounds\n");
        for v in &self.vars {
            let lo = v.lower.as_ref().map_or("-inf".to_string(), |l| l.to_string());
            let hi = v.upper.as_ref().map_or("+inf".to_string(), |u| u.to_string());
            let _ = writeln!(s, "  {} <= {} <= {}", lo, v.name, hi);
        }
        for (header, kind) in [("general", VarKind::Integer), ("binary", VarKind::Binary)] {
            let names: Vec<&str> =
                self.vars.iter().filter(|v| v.kind == kind).map(|v| v.name.as_str()).collect();
            if !names.is_empty() {
                let _ = writeln!(s, "{header}\n  {}", names.join(" "));
            }
        }
        s.push_str("end\n");
        s
    }
}
