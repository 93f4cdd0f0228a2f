//! Abstract syntax, parser, printer, and defined-form expanders for the
//! preference language with dynamic modalities.
//!
//! Surface grammar (ASCII):
//!
//! ```text
//! form  := iff
//! iff   := imp ("<->" imp)*
//! imp   := or ("->" imp)?
//! or    := and ("|" and)*
//! and   := unary ("&" unary)*
//! unary := "~" unary | "A" unary | "E" unary
//!        | "[leq]" unary | "[lt]" unary | "<leq>" unary | "<lt>" unary
//!        | "[" IDENT form "]" unary
//!        | atom
//! atom  := IDENT | "T" | "F" | "(" form ")"
//! IDENT := [a-z_][a-z0-9_]*
//! ```
//!
//! The argument of a dynamic modality `[op phi]` must be propositional.

use crate::error::{DplError, Result};

/// Name of a dynamic operator; `rev`, `ctr` and `id` are built in, further
/// names are resolved through the operator registry at evaluation time.
pub type OperatorName = String;

/// Formulas of the dynamic preference language. Derived connectives are
/// first-class cases and only desugared inside the evaluator, so rendered
/// counterexamples stay readable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Top,
    Bot,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    /// Universal modality `A`.
    BoxAll(Box<Formula>),
    /// Existential modality `E`.
    DiamAll(Box<Formula>),
    /// `[leq]`: at every world at least as preferred as the current one.
    BoxLeq(Box<Formula>),
    DiamLeq(Box<Formula>),
    /// `[lt]`: at every world strictly more preferred than the current one.
    BoxLt(Box<Formula>),
    DiamLt(Box<Formula>),
    /// Dynamic modality `[op phi] psi`; `phi` is restricted to be propositional.
    Dyn(OperatorName, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn iff(l: Formula, r: Formula) -> Formula {
        Formula::Iff(Box::new(l), Box::new(r))
    }

    pub fn box_all(f: Formula) -> Formula {
        Formula::BoxAll(Box::new(f))
    }

    pub fn diam_all(f: Formula) -> Formula {
        Formula::DiamAll(Box::new(f))
    }

    pub fn box_leq(f: Formula) -> Formula {
        Formula::BoxLeq(Box::new(f))
    }

    pub fn diam_leq(f: Formula) -> Formula {
        Formula::DiamLeq(Box::new(f))
    }

    pub fn box_lt(f: Formula) -> Formula {
        Formula::BoxLt(Box::new(f))
    }

    pub fn diam_lt(f: Formula) -> Formula {
        Formula::DiamLt(Box::new(f))
    }

    /// Builds `[op arg] body`, rejecting non-propositional arguments.
    pub fn dynamic(op: impl Into<OperatorName>, arg: Formula, body: Formula) -> Result<Formula> {
        if !is_propositional(&arg) {
            return Err(DplError::NonPropositionalArgument);
        }
        Ok(Formula::Dyn(op.into(), Box::new(arg), Box::new(body)))
    }

    /// Conjunction of a list of formulas; `T` when empty.
    pub fn conj(mut fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::Top,
            1 => fs.pop().unwrap(),
            _ => {
                let mut it = fs.into_iter();
                let first = it.next().unwrap();
                it.fold(first, Formula::and)
            }
        }
    }

    /// Disjunction of a list of formulas; `F` when empty.
    pub fn disj(mut fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::Bot,
            1 => fs.pop().unwrap(),
            _ => {
                let mut it = fs.into_iter();
                let first = it.next().unwrap();
                it.fold(first, Formula::or)
            }
        }
    }
}

/// `mu phi`: true exactly at the minimal `phi`-worlds.
pub fn mu(f: Formula) -> Formula {
    Formula::and(f.clone(), Formula::not(Formula::diam_lt(f)))
}

/// Conditional belief `B(goal | condition)`, i.e. `A(mu condition -> goal)`.
/// Unconditional belief is `belief(goal, Top)`.
pub fn belief(goal: Formula, condition: Formula) -> Formula {
    Formula::box_all(Formula::implies(mu(condition), goal))
}

/// `dg_f(i)`: there is a strict chain of `f`-worlds of length `i` ending here.
pub fn degree(f: &Formula, i: usize) -> Result<Formula> {
    if i == 0 {
        return Err(DplError::DegreeZero);
    }
    let mut acc = f.clone();
    for _ in 1..i {
        acc = Formula::and(f.clone(), Formula::diam_lt(acc));
    }
    Ok(acc)
}

/// True iff `f` contains no modal and no dynamic subterm.
pub fn is_propositional(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) | Formula::Top | Formula::Bot => true,
        Formula::Not(x) => is_propositional(x),
        Formula::And(l, r)
        | Formula::Or(l, r)
        | Formula::Implies(l, r)
        | Formula::Iff(l, r) => is_propositional(l) && is_propositional(r),
        _ => false,
    }
}

/// Atom names occurring in `f`.
pub fn atoms_of(f: &Formula) -> Vec<String> {
    fn walk(f: &Formula, out: &mut Vec<String>) {
        match f {
            Formula::Atom(a) => {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
            Formula::Top | Formula::Bot => {}
            Formula::Not(x)
            | Formula::BoxAll(x)
            | Formula::DiamAll(x)
            | Formula::BoxLeq(x)
            | Formula::DiamLeq(x)
            | Formula::BoxLt(x)
            | Formula::DiamLt(x) => walk(x, out),
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Implies(l, r)
            | Formula::Iff(l, r) => {
                walk(l, out);
                walk(r, out);
            }
            Formula::Dyn(_, a, b) => {
                walk(a, out);
                walk(b, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(f, &mut out);
    out
}

/// Renders a formula in the surface syntax. `parse(render(f))` is `f`.
pub fn render(f: &Formula) -> String {
    fn wrap(f: &Formula) -> String {
        match f {
            Formula::Atom(_) | Formula::Top | Formula::Bot => render(f),
            _ => format!("({})", render(f)),
        }
    }
    match f {
        Formula::Atom(a) => a.clone(),
        Formula::Top => "T".to_string(),
        Formula::Bot => "F".to_string(),
        Formula::Not(x) => format!("~{}", wrap(x)),
        Formula::And(l, r) => format!("({} & {})", render(l), render(r)),
        Formula::Or(l, r) => format!("({} | {})", render(l), render(r)),
        Formula::Implies(l, r) => format!("({} -> {})", render(l), render(r)),
        Formula::Iff(l, r) => format!("({} <-> {})", render(l), render(r)),
        Formula::BoxAll(x) => format!("A {}", wrap(x)),
        Formula::DiamAll(x) => format!("E {}", wrap(x)),
        Formula::BoxLeq(x) => format!("[leq] {}", wrap(x)),
        Formula::DiamLeq(x) => format!("<leq> {}", wrap(x)),
        Formula::BoxLt(x) => format!("[lt] {}", wrap(x)),
        Formula::DiamLt(x) => format!("<lt> {}", wrap(x)),
        Formula::Dyn(op, arg, body) => format!("[{} {}]{}", op, render(arg), wrap(body)),
    }
}

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&render(self))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Top,
    Bot,
    UnivA,
    ExistE,
    Not,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
    BoxLeq,
    BoxLt,
    DiamLeq,
    DiamLt,
    /// `[` followed by an operator name: opens a dynamic modality.
    DynOpen(String),
    RBracket,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    let err = |pos: usize, msg: &str| DplError::Syntax {
        pos,
        msg: msg.to_string(),
    };
    let ident_at = |i: &mut usize| -> String {
        let start = *i;
        while *i < bytes.len()
            && (bytes[*i].is_ascii_lowercase() || bytes[*i].is_ascii_digit() || bytes[*i] == b'_')
        {
            *i += 1;
        }
        text[start..*i].to_string()
    };
    while i < bytes.len() {
        let c = bytes[i];
        let pos = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'(' => {
                toks.push((pos, Token::LParen));
                i += 1;
            }
            b')' => {
                toks.push((pos, Token::RParen));
                i += 1;
            }
            b']' => {
                toks.push((pos, Token::RBracket));
                i += 1;
            }
            b'~' => {
                toks.push((pos, Token::Not));
                i += 1;
            }
            b'&' => {
                toks.push((pos, Token::And));
                i += 1;
            }
            b'|' => {
                toks.push((pos, Token::Or));
                i += 1;
            }
            b'T' => {
                toks.push((pos, Token::Top));
                i += 1;
            }
            b'F' => {
                toks.push((pos, Token::Bot));
                i += 1;
            }
            b'A' => {
                toks.push((pos, Token::UnivA));
                i += 1;
            }
            b'E' => {
                toks.push((pos, Token::ExistE));
                i += 1;
            }
            b'-' => {
                if text[i..].starts_with("->") {
                    toks.push((pos, Token::Imp));
                    i += 2;
                } else {
                    return Err(err(pos, "expected `->`"));
                }
            }
            b'<' => {
                if text[i..].starts_with("<->") {
                    toks.push((pos, Token::Iff));
                    i += 3;
                } else if text[i..].starts_with("<leq>") {
                    toks.push((pos, Token::DiamLeq));
                    i += 5;
                } else if text[i..].starts_with("<lt>") {
                    toks.push((pos, Token::DiamLt));
                    i += 4;
                } else {
                    return Err(err(pos, "expected `<->`, `<leq>` or `<lt>`"));
                }
            }
            b'[' => {
                i += 1;
                if i >= bytes.len() || !bytes[i].is_ascii_lowercase() {
                    return Err(err(i, "expected modality or operator name after `[`"));
                }
                let name = ident_at(&mut i);
                match name.as_str() {
                    "leq" | "lt" if i < bytes.len() && bytes[i] == b']' => {
                        i += 1;
                        toks.push((
                            pos,
                            if name == "leq" {
                                Token::BoxLeq
                            } else {
                                Token::BoxLt
                            },
                        ));
                    }
                    _ => toks.push((pos, Token::DynOpen(name))),
                }
            }
            _ if c.is_ascii_lowercase() || c == b'_' => {
                let name = ident_at(&mut i);
                toks.push((pos, Token::Ident(name)));
            }
            _ => return Err(err(pos, &format!("unexpected character `{}`", c as char))),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Token, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(DplError::Syntax {
                pos: self.here(),
                msg: format!("expected {what}"),
            })
        }
    }

    fn form(&mut self) -> Result<Formula> {
        let mut f = self.imp()?;
        while self.peek() == Some(&Token::Iff) {
            self.pos += 1;
            let r = self.imp()?;
            f = Formula::iff(f, r);
        }
        Ok(f)
    }

    fn imp(&mut self) -> Result<Formula> {
        let f = self.or()?;
        if self.peek() == Some(&Token::Imp) {
            self.pos += 1;
            let r = self.imp()?;
            Ok(Formula::implies(f, r))
        } else {
            Ok(f)
        }
    }

    fn or(&mut self) -> Result<Formula> {
        let mut f = self.and()?;
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            let r = self.and()?;
            f = Formula::or(f, r);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            let r = self.unary()?;
            f = Formula::and(f, r);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        let pos = self.here();
        match self.bump() {
            Some(Token::Not) => Ok(Formula::not(self.unary()?)),
            Some(Token::UnivA) => Ok(Formula::box_all(self.unary()?)),
            Some(Token::ExistE) => Ok(Formula::diam_all(self.unary()?)),
            Some(Token::BoxLeq) => Ok(Formula::box_leq(self.unary()?)),
            Some(Token::BoxLt) => Ok(Formula::box_lt(self.unary()?)),
            Some(Token::DiamLeq) => Ok(Formula::diam_leq(self.unary()?)),
            Some(Token::DiamLt) => Ok(Formula::diam_lt(self.unary()?)),
            Some(Token::DynOpen(op)) => {
                let arg = self.form()?;
                self.expect(Token::RBracket, "`]`")?;
                let body = self.unary()?;
                Formula::dynamic(op, arg, body)
            }
            Some(Token::Ident(a)) => Ok(Formula::Atom(a)),
            Some(Token::Top) => Ok(Formula::Top),
            Some(Token::Bot) => Ok(Formula::Bot),
            Some(Token::LParen) => {
                let f = self.form()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(f)
            }
            _ => Err(DplError::Syntax {
                pos,
                msg: "expected a formula".to_string(),
            }),
        }
    }
}

/// Parses the surface syntax into a formula.
pub fn parse(text: &str) -> Result<Formula> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let f = p.form()?;
    if p.pos != p.toks.len() {
        return Err(DplError::Syntax {
            pos: p.here(),
            msg: "trailing input".to_string(),
        });
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_basic_connectives() {
        assert_eq!(
            parse("p & ~q").unwrap(),
            Formula::and(Formula::atom("p"), Formula::not(Formula::atom("q")))
        );
    }

    #[test]
    fn parse_dynamic_modality() {
        assert_eq!(
            parse("[rev q][leq] p").unwrap(),
            Formula::dynamic(
                "rev",
                Formula::atom("q"),
                Formula::box_leq(Formula::atom("p"))
            )
            .unwrap()
        );
    }

    #[test]
    fn parse_rejects_modal_operator_argument() {
        let e = parse("[rev ([leq] p)] q").unwrap_err();
        assert!(matches!(e, DplError::NonPropositionalArgument));
    }

    #[test]
    fn render_conjunction() {
        let f = Formula::and(Formula::atom("p"), Formula::atom("q"));
        assert_eq!(render(&f), "(p & q)");
    }

    #[test]
    fn render_mu() {
        assert_eq!(render(&mu(Formula::atom("p"))), "(p & ~(<lt> p))");
    }

    #[test]
    fn render_dynamic() {
        let f = Formula::dynamic(
            "ctr",
            Formula::atom("p"),
            Formula::diam_all(Formula::atom("q")),
        )
        .unwrap();
        assert_eq!(render(&f), "[ctr p](E q)");
    }

    #[test]
    fn mu_and_belief_shapes() {
        assert_eq!(
            mu(Formula::Top),
            Formula::and(
                Formula::Top,
                Formula::not(Formula::diam_lt(Formula::Top))
            )
        );
        assert_eq!(
            belief(Formula::atom("p"), Formula::Top),
            Formula::box_all(Formula::implies(mu(Formula::Top), Formula::atom("p")))
        );
        // mu nests.
        let nested = mu(mu(Formula::atom("p")));
        assert_eq!(parse(&render(&nested)).unwrap(), nested);
    }

    #[test]
    fn degree_unrolls() {
        let p = Formula::atom("p");
        assert_eq!(degree(&p, 1).unwrap(), p);
        assert_eq!(
            degree(&p, 2).unwrap(),
            Formula::and(p.clone(), Formula::diam_lt(p.clone()))
        );
        assert_eq!(
            degree(&p, 3).unwrap(),
            Formula::and(
                p.clone(),
                Formula::diam_lt(Formula::and(p.clone(), Formula::diam_lt(p.clone())))
            )
        );
        assert!(matches!(degree(&p, 0), Err(DplError::DegreeZero)));
        // degree(f, i) contains exactly i occurrences of f.
        for i in 1..6 {
            let d = render(&degree(&p, i).unwrap());
            assert_eq!(d.matches('p').count(), i);
        }
    }

    #[test]
    fn propositional_classifier() {
        assert!(is_propositional(&parse("p & ~q").unwrap()));
        assert!(!is_propositional(&parse("[leq] p").unwrap()));
        assert!(!is_propositional(&parse("[rev p]q").unwrap()));
    }

    #[test]
    fn round_trip_examples() {
        for s in [
            "p",
            "T",
            "F",
            "~p",
            "(p & q)",
            "(p | (q -> r))",
            "((p <-> q) <-> r)",
            "A (E p)",
            "[leq] (<lt> p)",
            "[rev (p | ~q)](<leq> p)",
            "[ctr T][id F]~(p & T)",
        ] {
            let f = parse(s).unwrap();
            assert_eq!(parse(&render(&f)).unwrap(), f, "round trip of {s}");
        }
    }

    #[test]
    fn implication_right_associative() {
        assert_eq!(
            parse("p -> q -> r").unwrap(),
            Formula::implies(
                Formula::atom("p"),
                Formula::implies(Formula::atom("q"), Formula::atom("r"))
            )
        );
    }

    #[test]
    fn syntax_error_has_position() {
        match parse("p &") {
            Err(DplError::Syntax { pos, .. }) => assert_eq!(pos, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }
}
