use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// A Horn clause: the conjunction of `body` implies the binary `head`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub body: Vec<Atom>,
    pub head: Atom,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.id)?;
        for (i, a) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, " => {}", self.head)
    }
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')
}

fn parse_atom(text: &str, line: usize) -> Result<Atom> {
    let err = |message: String| Error::RuleSyntax { line, message };
    let text = text.trim();
    let open = text
        .find('(')
        .ok_or_else(|| err(format!("expected `(` in atom `{text}`")))?;
    let inner = text[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| err(format!("expected `)` at end of atom `{text}`")))?;
    let predicate = text[..open].trim();
    if predicate.is_empty() || !predicate.chars().all(is_name_char) {
        return Err(err(format!("bad predicate name `{predicate}`")));
    }
    let mut args = Vec::new();
    for raw in inner.split(',') {
        let name = raw.trim();
        if name.is_empty() || !name.chars().all(is_name_char) {
            return Err(err(format!("bad argument `{name}` in `{text}`")));
        }
        let term = if name.starts_with(|c: char| c.is_ascii_uppercase()) {
            Term::Var(name.to_owned())
        } else {
            Term::Const(name.to_owned())
        };
        args.push(term);
    }
    if !(1..=2).contains(&args.len()) {
        return Err(err(format!("atom `{text}` must have one or two arguments")));
    }
    Ok(Atom {
        predicate: predicate.to_owned(),
        args,
    })
}

/// Parses one rule. `default_id` is used when the line has no `id:` prefix.
pub fn parse_rule(text: &str, line: usize, default_id: &str) -> Result<Rule> {
    let err = |message: String| Error::RuleSyntax { line, message };
    let (id, clause) = match text.split_once(':') {
        Some((id, rest)) if !id.contains('(') => (id.trim().to_owned(), rest),
        _ => (default_id.to_owned(), text),
    };
    let (body_text, head_text) = clause
        .split_once("=>")
        .ok_or_else(|| err("expected `=>`".into()))?;
    let body = body_text
        .split('&')
        .map(|a| parse_atom(a, line))
        .collect::<Result<Vec<_>>>()?;
    let head = parse_atom(head_text, line)?;
    if !(1..=2).contains(&body.len()) {
        return Err(err(format!("rule {id} must have one or two body atoms")));
    }
    if head.arity() != 2 {
        return Err(err(format!("rule {id} must have a binary head")));
    }
    for v in head.vars() {
        if !body.iter().any(|a| a.vars().any(|b| b == v)) {
            return Err(err(format!("head variable {v} of rule {id} is unbound")));
        }
    }
    Ok(Rule { id, body, head })
}

/// Parses a rule file: one rule per line, `#` starts a comment line.
/// Rules without an explicit id are named `R<n>` by their 1-based position.
pub fn parse_rules(text: &str) -> Result<Vec<Rule>> {
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let default_id = format!("R{}", rules.len() + 1);
        rules.push(parse_rule(line, i + 1, &default_id)?);
    }
    Ok(rules)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_resource_format() {
        let r = parse_rule("based_in2(X,Z) & in0(Z,Y) => based_in0(X,Y)", 1, "R1").unwrap();
        assert_eq!(r.id, "R1");
        assert_eq!(r.body.len(), 2);
        assert_eq!(r.head.predicate, "based_in0");
        assert_eq!(r.to_string(), "R1: based_in2(X,Z) & in0(Z,Y) => based_in0(X,Y)");
    }

    #[test]
    fn unary_atoms_and_constants() {
        let r = parse_rule("C.29: agency_of(X,Y) & gpe0(Y) => based_in0(X,Y)", 1, "x").unwrap();
        assert_eq!(r.id, "C.29");
        assert_eq!(r.body[1].arity(), 1);
        let r = parse_rule("in0-x(X,germany) => in0(X,berlin)", 1, "x").unwrap();
        assert_eq!(r.head.args[1], Term::Const("berlin".into()));
        assert_eq!(r.body[0].predicate, "in0-x");
    }

    #[test]
    fn rejects_malformed_rules() {
        for bad in [
            "in0(X,Y)",
            "in0(X,Y) => gpe0(Y)",
            "in0(X,Y) => in0(X,W)",
            "a(X) & b(X) & c(X,Y) => d(X,Y)",
            "in0(X,Y,Z) => in0(X,Y)",
            "in0 X,Y => in0(X,Y)",
        ] {
            assert!(parse_rule(bad, 3, "R").is_err(), "{bad}");
        }
        match parse_rules("# c\n\nin0(X,Y) =>") {
            Err(Error::RuleSyntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
