//! Text front end for formulas and QBFs.
//!
//! ```text
//! exists x y;
//! forall z;
//! : (x | !z) <-> y
//! ```
//!
//! Precedence from tightest: `!`, `&`, `|`, `->` (right associative),
//! `<->`. `#` starts a comment running to the end of the line.

use std::collections::BTreeSet;

use super::formula::Formula;
use super::qbf::{Qbf, Quantifier};
use super::var::{is_ident_continue, is_ident_start, Var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Bang,
    Amp,
    Pipe,
    Arrow,
    DoubleArrow,
    LParen,
    RParen,
    Semi,
    Colon,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DoubleArrow => "`<->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Tokenizes `text`, numbering positions from (`line`, `column`).
fn lex(text: &str, line: usize, column: usize) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (line, column);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let push = |out: &mut Vec<Spanned>, tok| {
            out.push(Spanned {
                tok,
                line: l0,
                column: c0,
            })
        };
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            _ => {}
        }
        let rest = &chars[i..];
        let (tok, width) = if rest.starts_with(&['<', '-', '>']) {
            (Tok::DoubleArrow, 3)
        } else if rest.starts_with(&['-', '>']) {
            (Tok::Arrow, 2)
        } else {
            match c {
                '!' => (Tok::Bang, 1),
                '&' => (Tok::Amp, 1),
                '|' => (Tok::Pipe, 1),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                ';' => (Tok::Semi, 1),
                ':' => (Tok::Colon, 1),
                c if is_ident_start(c) => {
                    let mut j = i + 1;
                    // `-` belongs to the name unless it opens `->`
                    while j < chars.len()
                        && is_ident_continue(chars[j])
                        && !(chars[j] == '-' && chars.get(j + 1) == Some(&'>'))
                    {
                        j += 1;
                    }
                    (Tok::Ident(chars[i..j].iter().collect()), j - i)
                }
                other => return Err(syntax(l0, c0, format!("unexpected character `{other}`"))),
            }
        };
        push(&mut out, tok);
        i += width;
        col += width;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    allow_reserved: bool,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, wanted: &str) -> Error {
        let t = self.peek();
        syntax(
            t.line,
            t.column,
            format!("expected {wanted}, found {}", t.tok.describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn var(&self, name: &str, line: usize, column: usize) -> Result<Var> {
        let v =
            Var::new(name).map_err(|_| syntax(line, column, format!("invalid name `{name}`")))?;
        if v.is_reserved() && !self.allow_reserved {
            return Err(syntax(
                line,
                column,
                format!("variable `{name}` uses the reserved `_` prefix"),
            ));
        }
        Ok(v)
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut lhs = self.implication()?;
        while self.eat(&Tok::DoubleArrow) {
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat(&Tok::Bang) {
            return Ok(Formula::not(self.unary()?));
        }
        let t = self.peek().clone();
        match &t.tok {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(match name.as_str() {
                    "true" => Formula::Const(true),
                    "false" => Formula::Const(false),
                    _ => Formula::Var(self.var(name, t.line, t.column)?),
                })
            }
            _ => Err(self.unexpected("a formula")),
        }
    }

    fn finish(&self) -> Result<()> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }
}

/// Parses a user formula; reserved `_` names are rejected.
pub fn parse_formula(text: &str) -> Result<Formula> {
    parse_formula_at(text, 1, 1, false)
}

/// Parses a formula embedded in a larger file, reporting positions relative
/// to (`line`, `column`).
pub(crate) fn parse_formula_at(
    text: &str,
    line: usize,
    column: usize,
    allow_reserved: bool,
) -> Result<Formula> {
    let mut p = Parser {
        toks: lex(text, line, column)?,
        pos: 0,
        allow_reserved,
    };
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

/// Parses a whitespace-separated list of variable names.
pub(crate) fn parse_names_at(
    text: &str,
    line: usize,
    column: usize,
    allow_reserved: bool,
) -> Result<Vec<Var>> {
    let mut p = Parser {
        toks: lex(text, line, column)?,
        pos: 0,
        allow_reserved,
    };
    let mut out = Vec::new();
    loop {
        let t = p.bump();
        match &t.tok {
            Tok::Eof => return Ok(out),
            Tok::Ident(n) if n != "true" && n != "false" => out.push(p.var(n, t.line, t.column)?),
            other => {
                return Err(syntax(
                    t.line,
                    t.column,
                    format!("expected a variable name, found {}", other.describe()),
                ))
            }
        }
    }
}

pub fn parse_qbf(text: &str) -> Result<Qbf> {
    let mut p = Parser {
        toks: lex(text, 1, 1)?,
        pos: 0,
        allow_reserved: false,
    };
    let mut prefix = Vec::new();
    let mut seen = BTreeSet::new();
    loop {
        let t = p.peek().clone();
        let quantifier = match &t.tok {
            Tok::Colon => {
                p.bump();
                break;
            }
            Tok::Ident(kw) if kw == "exists" => Quantifier::Exists,
            Tok::Ident(kw) if kw == "forall" => Quantifier::Forall,
            _ => return Err(p.unexpected("`exists`, `forall` or `:`")),
        };
        p.bump();
        loop {
            let t = p.bump();
            match &t.tok {
                Tok::Semi => break,
                Tok::Ident(n) if n != "true" && n != "false" => {
                    let v = p.var(n, t.line, t.column)?;
                    if !seen.insert(v.clone()) {
                        return Err(Error::DuplicatePrefixVariable(v.to_string()));
                    }
                    prefix.push((quantifier, v));
                }
                other => {
                    return Err(syntax(
                        t.line,
                        t.column,
                        format!("expected a variable or `;`, found {}", other.describe()),
                    ))
                }
            }
        }
    }
    let matrix = p.formula()?;
    p.finish()?;
    Qbf::new(prefix, matrix)
}

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        Formula::Not(_) => 5,
        Formula::Const(_) | Formula::Var(_) => 6,
    }
}

/// Prints with the fewest parentheses that still parse back to the same tree.
pub fn serialize_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

fn write_formula(f: &Formula, out: &mut String) {
    let child = |c: &Formula, parens: bool, out: &mut String| {
        if parens {
            out.push('(');
            write_formula(c, out);
            out.push(')');
        } else {
            write_formula(c, out);
        }
    };
    let p = precedence(f);
    match f {
        Formula::Const(true) => out.push_str("true"),
        Formula::Const(false) => out.push_str("false"),
        Formula::Var(v) => out.push_str(v.name()),
        Formula::Not(a) => {
            out.push('!');
            child(a, precedence(a) < p, out);
        }
        Formula::Implies(a, b) => {
            child(a, precedence(a) <= p, out);
            out.push_str(" -> ");
            child(b, precedence(b) < p, out);
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Iff(a, b) => {
            let op = match f {
                Formula::And(..) => " & ",
                Formula::Or(..) => " | ",
                _ => " <-> ",
            };
            child(a, precedence(a) < p, out);
            out.push_str(op);
            child(b, precedence(b) <= p, out);
        }
    }
}

/// One line per quantifier block, then the matrix line.
pub fn serialize_qbf(q: &Qbf) -> String {
    let mut out = String::new();
    let mut blocks: Vec<(Quantifier, Vec<&Var>)> = Vec::new();
    for (quant, v) in q.prefix() {
        match blocks.last_mut() {
            Some((last, vars)) if last == quant => vars.push(v),
            _ => blocks.push((*quant, vec![v])),
        }
    }
    for (quant, vars) in blocks {
        out.push_str(quant.keyword());
        for v in vars {
            out.push(' ');
            out.push_str(v.name());
        }
        out.push_str(";\n");
    }
    out.push_str(": ");
    out.push_str(&serialize_formula(q.matrix()));
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Var {
        Var::new(n).unwrap()
    }

    #[test]
    fn qbf_one_liner() {
        let q = parse_qbf("exists x; forall y; : (x | !y)").unwrap();
        assert_eq!(
            q.prefix(),
            &[(Quantifier::Exists, v("x")), (Quantifier::Forall, v("y"))]
        );
        assert_eq!(
            q.matrix(),
            &Formula::or(Formula::var(&v("x")), Formula::not(Formula::var(&v("y"))))
        );
    }

    #[test]
    fn qbf_empty_prefix() {
        let q = parse_qbf(": true").unwrap();
        assert!(q.prefix().is_empty());
        assert_eq!(q.matrix(), &Formula::t());
    }

    #[test]
    fn qbf_free_variable() {
        let err = parse_qbf("forall y; : x").unwrap_err();
        assert_eq!(err, Error::FreeVariable("x".into()));
        assert_eq!(err.to_string(), "free variable x");
    }

    #[test]
    fn qbf_duplicate() {
        assert_eq!(
            parse_qbf("exists x; forall x; : x").unwrap_err(),
            Error::DuplicatePrefixVariable("x".into())
        );
    }

    #[test]
    fn multi_line_with_comments() {
        let q = parse_qbf("# header\nexists x y;\nforall z; # inner\n: x & y\n  | z\n").unwrap();
        assert_eq!(q.prefix().len(), 3);
        assert_eq!(serialize_qbf(&q), "exists x y;\nforall z;\n: x & y | z\n");
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_qbf("exists x;\n: x & ") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 7)),
            other => panic!("{other:?}"),
        }
        match parse_formula("a $ b") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 3)),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("(a").is_err());
        assert!(parse_formula("a b").is_err());
        assert!(parse_formula("").is_err());
    }

    #[test]
    fn reserved_names_rejected_unless_allowed() {
        assert!(matches!(
            parse_formula("_p1 & x"),
            Err(Error::Syntax { .. })
        ));
        assert!(parse_formula_at("_p1 & x", 1, 1, true).is_ok());
        assert!(parse_qbf("exists _q1; : _q1").is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let x = || Formula::var(&v("x"));
        let y = || Formula::var(&v("y"));
        let z = || Formula::var(&v("z"));
        assert_eq!(
            parse_formula("x -> y -> z").unwrap(),
            Formula::implies(x(), Formula::implies(y(), z()))
        );
        assert_eq!(
            parse_formula("x | y & z").unwrap(),
            Formula::or(x(), Formula::and(y(), z()))
        );
        assert_eq!(
            parse_formula("!x <-> y -> z").unwrap(),
            Formula::iff(Formula::not(x()), Formula::implies(y(), z()))
        );
        assert_eq!(
            parse_formula("x & y & z").unwrap(),
            Formula::and(Formula::and(x(), y()), z())
        );
    }

    #[test]
    fn dashed_names_next_to_arrows() {
        let f = parse_formula("x- -> q").unwrap();
        assert_eq!(
            f,
            Formula::implies(Formula::var(&v("x-")), Formula::var(&v("q")))
        );
        let g = parse_formula("x->q").unwrap();
        assert_eq!(
            g,
            Formula::implies(Formula::var(&v("x")), Formula::var(&v("q")))
        );
        let h = parse_formula("x+<->x-").unwrap();
        assert_eq!(
            h,
            Formula::iff(Formula::var(&v("x+")), Formula::var(&v("x-")))
        );
    }

    #[test]
    fn serializer_keeps_needed_parens() {
        for text in [
            "(x -> y) -> z",
            "x & (y | z)",
            "!(x & y)",
            "x | (y | z)",
            "(x <-> y) <-> z",
            "x <-> (y <-> z)",
            "!!x",
        ] {
            let f = parse_formula(text).unwrap();
            assert_eq!(parse_formula(&serialize_formula(&f)).unwrap(), f, "{text}");
        }
        assert_eq!(
            serialize_formula(&parse_formula("(x -> y) -> z").unwrap()),
            "(x -> y) -> z"
        );
    }
}
