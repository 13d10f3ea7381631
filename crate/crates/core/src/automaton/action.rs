use std::fmt;
use std::str::FromStr;

use super::AutomatonError;

/// Name reserved for the dummy offers added when an automaton is normalized
/// to a single final state.
pub const RESERVED_DONE: &str = "__done";

/// Returns true when `name` is a valid action identifier.
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A basic action performed by a single principal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasicAction {
    /// Request on a name, written `?name`.
    Request(String),
    /// Offer on a name, written `!name`.
    Offer(String),
    /// Idle move, written `-`.
    Idle,
}

impl BasicAction {
    pub fn request(name: impl Into<String>) -> Self {
        BasicAction::Request(name.into())
    }

    pub fn offer(name: impl Into<String>) -> Self {
        BasicAction::Offer(name.into())
    }

    /// The involution swapping requests and offers.
    pub fn co(&self) -> BasicAction {
        match self {
            BasicAction::Request(n) => BasicAction::Offer(n.clone()),
            BasicAction::Offer(n) => BasicAction::Request(n.clone()),
            BasicAction::Idle => BasicAction::Idle,
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            BasicAction::Request(n) | BasicAction::Offer(n) => Some(n),
            BasicAction::Idle => None,
        }
    }

    pub fn is_idle(&self) -> bool {
        matches!(self, BasicAction::Idle)
    }
}

impl fmt::Display for BasicAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasicAction::Request(n) => write!(f, "?{n}"),
            BasicAction::Offer(n) => write!(f, "!{n}"),
            BasicAction::Idle => f.write_str("-"),
        }
    }
}

impl FromStr for BasicAction {
    type Err = AutomatonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "-" {
            return Ok(BasicAction::Idle);
        }
        let (kind, name) = s.split_at(s.chars().next().map_or(0, char::len_utf8));
        if !is_valid_name(name) {
            return Err(AutomatonError::InvalidLabel(s.to_string()));
        }
        match kind {
            "?" => Ok(BasicAction::Request(name.to_string())),
            "!" => Ok(BasicAction::Offer(name.to_string())),
            _ => Err(AutomatonError::InvalidLabel(s.to_string())),
        }
    }
}

/// Classification of a valid action vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ActionKind<'a> {
    Request { name: &'a str, principal: usize },
    Offer { name: &'a str, principal: usize },
    Match { name: &'a str, requester: usize, offerer: usize },
}

impl ActionKind<'_> {
    pub fn name(&self) -> &str {
        match self {
            ActionKind::Request { name, .. }
            | ActionKind::Offer { name, .. }
            | ActionKind::Match { name, .. } => name,
        }
    }
}

/// One transition label: a vector of basic actions, one per principal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionVector(Vec<BasicAction>);

impl ActionVector {
    /// Builds a label, checking that it is a request, an offer or a match.
    pub fn new(entries: Vec<BasicAction>) -> Result<Self, AutomatonError> {
        let v = ActionVector(entries);
        v.classify()?;
        Ok(v)
    }

    pub(crate) fn new_unchecked(entries: Vec<BasicAction>) -> Self {
        ActionVector(entries)
    }

    /// A lone request by `principal` in a vector of the given rank.
    pub fn lone(rank: usize, principal: usize, action: BasicAction) -> Self {
        let mut entries = vec![BasicAction::Idle; rank];
        entries[principal] = action;
        ActionVector(entries)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[BasicAction] {
        &self.0
    }

    pub fn get(&self, i: usize) -> &BasicAction {
        &self.0[i]
    }

    /// Indices of the principals that move in this action.
    pub fn movers(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, a)| !a.is_idle()).map(|(i, _)| i)
    }

    pub fn classify(&self) -> Result<ActionKind<'_>, AutomatonError> {
        let bad = || AutomatonError::InvalidLabel(self.to_string());
        if self.0.is_empty() {
            return Err(bad());
        }
        let active: Vec<(usize, &BasicAction)> =
            self.0.iter().enumerate().filter(|(_, a)| !a.is_idle()).collect();
        match active.as_slice() {
            [(i, BasicAction::Request(n))] => Ok(ActionKind::Request { name: n, principal: *i }),
            [(i, BasicAction::Offer(n))] => Ok(ActionKind::Offer { name: n, principal: *i }),
            [(i, a), (j, b)] if a.co() == **b => match a {
                BasicAction::Request(n) => Ok(ActionKind::Match { name: n, requester: *i, offerer: *j }),
                BasicAction::Offer(n) => Ok(ActionKind::Match { name: n, requester: *j, offerer: *i }),
                BasicAction::Idle => unreachable!(),
            },
            _ => Err(bad()),
        }
    }

    /// Shorthand for the classification of labels already known to be valid.
    pub fn kind(&self) -> ActionKind<'_> {
        self.classify().expect("action vector validated at construction")
    }

    pub fn is_request(&self) -> bool {
        matches!(self.classify(), Ok(ActionKind::Request { .. }))
    }

    pub fn is_offer(&self) -> bool {
        matches!(self.classify(), Ok(ActionKind::Offer { .. }))
    }

    pub fn is_match(&self) -> bool {
        matches!(self.classify(), Ok(ActionKind::Match { .. }))
    }

    /// The single non-idle basic action of a request or offer.
    fn single(&self) -> Option<&BasicAction> {
        match self.classify() {
            Ok(ActionKind::Request { principal, .. }) | Ok(ActionKind::Offer { principal, .. }) => {
                Some(&self.0[principal])
            }
            _ => None,
        }
    }

    /// Pads this label with idle moves: `before` principals in front and
    /// `after` at the end.
    pub fn pad(&self, before: usize, after: usize) -> ActionVector {
        let mut entries = Vec::with_capacity(before + self.rank() + after);
        entries.extend(std::iter::repeat(BasicAction::Idle).take(before));
        entries.extend(self.0.iter().cloned());
        entries.extend(std::iter::repeat(BasicAction::Idle).take(after));
        ActionVector(entries)
    }
}

/// True iff `a` is a request or offer on some name and `b` is the
/// complementary offer or request. Matches are never complementary.
pub fn complementary(a: &ActionVector, b: &ActionVector) -> bool {
    match (a.single(), b.single()) {
        (Some(x), Some(y)) => x.co() == *y,
        _ => false,
    }
}

impl fmt::Display for ActionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for ActionVector {
    type Err = AutomatonError;

    /// Parses `(!res,-)`, `!res,-` or `?sig`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let entries = inner
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<BasicAction>, _>>()?;
        ActionVector::new(entries)
    }
}

/// One item of an observable: the basic action of a lone move, or `τ` for a
/// match.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Observed {
    Request(String),
    Offer(String),
    Tau,
}

impl fmt::Display for Observed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observed::Request(n) => write!(f, "?{n}"),
            Observed::Offer(n) => write!(f, "!{n}"),
            Observed::Tau => f.write_str("tau"),
        }
    }
}

/// A finite sequence of labels of a common rank.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trace {
    rank: usize,
    actions: Vec<ActionVector>,
}

impl Trace {
    pub fn new(rank: usize, actions: Vec<ActionVector>) -> Result<Self, AutomatonError> {
        if rank == 0 {
            return Err(AutomatonError::ZeroRank);
        }
        for a in &actions {
            if a.rank() != rank {
                return Err(AutomatonError::RankMismatch { expected: rank, found: a.rank() });
            }
            a.classify()?;
        }
        Ok(Trace { rank, actions })
    }

    pub fn empty(rank: usize) -> Self {
        Trace { rank, actions: Vec::new() }
    }

    pub(crate) fn from_parts(rank: usize, actions: Vec<ActionVector>) -> Self {
        Trace { rank, actions }
    }

    /// Parses a concatenation of labels such as `(!res,-)(?sig,!sig)`.
    pub fn parse(rank: usize, s: &str) -> Result<Self, AutomatonError> {
        let mut actions = Vec::new();
        for chunk in s.split(')') {
            let chunk = chunk.trim();
            if chunk.is_empty() {
                continue;
            }
            actions.push(chunk.parse::<ActionVector>()?);
        }
        Trace::new(rank, actions)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn actions(&self) -> &[ActionVector] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn push(&mut self, action: ActionVector) {
        assert_eq!(action.rank(), self.rank);
        self.actions.push(action);
    }

    /// The observable: lone moves keep their basic action, matches become `τ`.
    pub fn observable(&self) -> Vec<Observed> {
        self.actions
            .iter()
            .map(|a| match a.kind() {
                ActionKind::Request { name, .. } => Observed::Request(name.to_string()),
                ActionKind::Offer { name, .. } => Observed::Offer(name.to_string()),
                ActionKind::Match { .. } => Observed::Tau,
            })
            .collect()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.actions.is_empty() {
            return f.write_str("ε");
        }
        for a in &self.actions {
            write!(f, "{a}")?;
        }
        Ok(())
    }
}
