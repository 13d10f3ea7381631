//! Text syntax of the two logics.
//!
//! PCL: clauses joined by `/\`, each `a & b`, `a & b -> c` or
//! `a & b -->> c`, optionally parenthesised.
//!
//! ILL: multiset elements joined by `,`; an element is a clause
//! `a * b~` or `a * b -o c * d~`, or parenthesised clauses joined by `*`.
//! `~` marks a negative atom.

use crate::logic::{IllClause, IllFormula, Literal, LogicError, PclClause, PclFormula};

#[derive(Debug, thiserror::Error)]
pub enum FormulaError {
    #[error("syntax error at offset {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error(transparent)]
    Logic(#[from] LogicError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Atom(String),
    Sym(&'static str),
}

const SYMBOLS: [&str; 10] = ["-->>", "/\\", "->", "-o", "&", "*", ",", "~", "(", ")"];

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, FormulaError> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < text.len() {
        let rest = &text[pos..];
        let c = rest.chars().next().unwrap();
        if c.is_whitespace() {
            pos += c.len_utf8();
        } else if let Some(s) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            out.push((pos, Tok::Sym(s)));
            pos += s.len();
        } else if c.is_ascii_alphabetic() || c == '_' {
            let len = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(rest.len());
            out.push((pos, Tok::Atom(rest[..len].to_string())));
            pos += len;
        } else {
            return Err(FormulaError::Syntax { pos, message: format!("unexpected `{c}`") });
        }
    }
    Ok(out)
}

struct Tokens {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Tokens {
    fn new(text: &str) -> Result<Self, FormulaError> {
        Ok(Tokens { toks: lex(text)?, at: 0, end: text.len() })
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError::Syntax { pos: self.pos(), message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn eat(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(t)) if *t == s) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), FormulaError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`"))
        }
    }

    fn atom(&mut self) -> Result<String, FormulaError> {
        match self.peek() {
            Some(Tok::Atom(a)) => {
                let a = a.clone();
                self.at += 1;
                Ok(a)
            }
            _ => self.error("expected an atom"),
        }
    }

    fn done(&self) -> Result<(), FormulaError> {
        if self.at < self.toks.len() {
            return self.error("unexpected trailing input");
        }
        Ok(())
    }

    fn separated<T>(
        &mut self,
        sep: &str,
        mut item: impl FnMut(&mut Self) -> Result<T, FormulaError>,
    ) -> Result<Vec<T>, FormulaError> {
        let mut items = vec![item(self)?];
        while self.eat(sep) {
            items.push(item(self)?);
        }
        Ok(items)
    }

    fn pcl_clause(&mut self) -> Result<PclClause, FormulaError> {
        if self.eat("(") {
            let c = self.pcl_clause()?;
            self.expect(")")?;
            return Ok(c);
        }
        let atoms = self.separated("&", Self::atom)?;
        if self.eat("->") {
            Ok(PclClause::Impl(atoms, self.atom()?))
        } else if self.eat("-->>") {
            Ok(PclClause::CImpl(atoms, self.atom()?))
        } else {
            Ok(PclClause::Conj(atoms))
        }
    }

    fn literal(&mut self) -> Result<Literal, FormulaError> {
        let a = self.atom()?;
        Ok(if self.eat("~") { Literal::Neg(a) } else { Literal::Pos(a) })
    }

    fn ill_clause(&mut self) -> Result<IllClause, FormulaError> {
        let start = self.pos();
        let lhs = self.separated("*", Self::literal)?;
        if !self.eat("-o") {
            return Ok(IllClause::Tensor(lhs));
        }
        let premises = lhs
            .into_iter()
            .map(|l| match l {
                Literal::Pos(a) => Ok(a),
                Literal::Neg(a) => Err(FormulaError::Syntax {
                    pos: start,
                    message: format!("negative premise {a}~"),
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IllClause::HornImpl(premises, self.separated("*", Self::literal)?))
    }

    fn ill_element(&mut self) -> Result<Vec<IllClause>, FormulaError> {
        if !matches!(self.peek(), Some(Tok::Sym("("))) {
            return Ok(vec![self.ill_clause()?]);
        }
        let clauses = self.separated("*", |t| {
            t.expect("(")?;
            let c = t.ill_clause()?;
            t.expect(")")?;
            Ok(c)
        })?;
        if clauses.len() == 1 {
            return Ok(clauses);
        }
        Ok(IllFormula::new(clauses)?.clauses().to_vec())
    }
}

pub fn parse_pcl(text: &str) -> Result<PclFormula, FormulaError> {
    let mut t = Tokens::new(text)?;
    let clauses = t.separated("/\\", Tokens::pcl_clause)?;
    t.done()?;
    Ok(PclFormula::new(clauses)?)
}

/// A multiset of clauses; formulas contribute their clauses.
pub fn parse_gamma(text: &str) -> Result<Vec<IllClause>, FormulaError> {
    let mut t = Tokens::new(text)?;
    let elements = t.separated(",", Tokens::ill_element)?;
    t.done()?;
    let gamma: Vec<IllClause> = elements.into_iter().flatten().collect();
    for c in &gamma {
        c.validate()?;
    }
    Ok(gamma)
}

/// The right-hand side: empty, or literals joined by `*`.
pub fn parse_z(text: &str) -> Result<Vec<Literal>, FormulaError> {
    let mut t = Tokens::new(text)?;
    if t.peek().is_none() {
        return Ok(Vec::new());
    }
    let z = t.separated("*", Tokens::literal)?;
    t.done()?;
    Ok(z)
}
