//! Recursive-descent parser.
//!
//! Precedence, tightest first: `!` `X` `F`, then `U` (right associative),
//! `&`, `|`, `->` (right associative). `->` and `!` over Boolean
//! connectives are eliminated while building the negation normal form.

use super::{Alphabet, Formula, Prop};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    UnknownAtom(String),
    /// `!` applied to a temporal subformula.
    NotCoSafe,
    /// `G` is not expressible in the co-safe fragment.
    Always,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} at offset {pos}", describe(.kind))]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub pos: usize,
}

fn describe(k: &ParseErrorKind) -> String {
    match k {
        ParseErrorKind::UnexpectedChar(c) => format!("unexpected character {c:?}"),
        ParseErrorKind::UnexpectedToken(t) => format!("unexpected token {t:?}"),
        ParseErrorKind::UnexpectedEnd => "unexpected end of input".into(),
        ParseErrorKind::UnknownAtom(a) => format!("unknown atom {a:?}"),
        ParseErrorKind::NotCoSafe => "negation over a temporal operator is not syntactically co-safe".into(),
        ParseErrorKind::Always => "G (always) is not syntactically co-safe".into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '!' => {
                out.push((Tok::Not, i));
                i += 1
            }
            '&' => {
                out.push((Tok::And, i));
                i += 1
            }
            '|' => {
                out.push((Tok::Or, i));
                i += 1
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1
            }
            '-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((Tok::Implies, i));
                i += 2
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    kind: ParseErrorKind::UnexpectedChar(ch),
                    pos: i,
                });
            }
        }
    }
    Ok(out)
}

/// Surface syntax before normalization.
enum Raw {
    True,
    False,
    Atom(Prop),
    Not(Box<Raw>, usize),
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
    Implies(Box<Raw>, Box<Raw>, usize),
    Next(Box<Raw>),
    Until(Box<Raw>, Box<Raw>),
    Eventually(Box<Raw>),
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.1)
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn unexpected(&self) -> ParseError {
        let kind = match self.peek() {
            None => ParseErrorKind::UnexpectedEnd,
            Some(t) => ParseErrorKind::UnexpectedToken(match t {
                Tok::Ident(s) => s.clone(),
                Tok::Not => "!".into(),
                Tok::And => "&".into(),
                Tok::Or => "|".into(),
                Tok::Implies => "->".into(),
                Tok::LParen => "(".into(),
                Tok::RParen => ")".into(),
            }),
        };
        ParseError {
            kind,
            pos: self.pos(),
        }
    }

    fn implication(&mut self) -> Result<Raw, ParseError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Implies) {
            let pos = self.pos();
            self.at += 1;
            let rhs = self.implication()?;
            return Ok(Raw::Implies(Box::new(lhs), Box::new(rhs), pos));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.at += 1;
            let rhs = self.conjunction()?;
            lhs = Raw::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.until()?;
        while self.peek() == Some(&Tok::And) {
            self.at += 1;
            let rhs = self.until()?;
            lhs = Raw::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Raw, ParseError> {
        let lhs = self.unary()?;
        if self.peek_keyword("U") {
            self.at += 1;
            let rhs = self.until()?;
            return Ok(Raw::Until(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Raw, ParseError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Not) => {
                self.at += 1;
                Ok(Raw::Not(Box::new(self.unary()?), pos))
            }
            Some(Tok::Ident(s)) if s == "X" => {
                self.at += 1;
                Ok(Raw::Next(Box::new(self.unary()?)))
            }
            Some(Tok::Ident(s)) if s == "F" => {
                self.at += 1;
                Ok(Raw::Eventually(Box::new(self.unary()?)))
            }
            Some(Tok::Ident(s)) if s == "G" => Err(ParseError {
                kind: ParseErrorKind::Always,
                pos,
            }),
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Raw, ParseError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.at += 1;
                let inner = self.implication()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.unexpected());
                }
                self.at += 1;
                Ok(inner)
            }
            Some(Tok::Ident(s)) => {
                let raw = match s.as_str() {
                    "true" => Raw::True,
                    "false" => Raw::False,
                    "D" => Raw::Atom(Prop::D),
                    "U" => return Err(self.unexpected()),
                    _ => match self.alphabet.labels().iter().position(|l| *l == s) {
                        Some(i) => Raw::Atom(Prop::Region(i)),
                        None => {
                            return Err(ParseError {
                                kind: ParseErrorKind::UnknownAtom(s),
                                pos,
                            })
                        }
                    },
                };
                self.at += 1;
                Ok(raw)
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Negation normal form; `neg` marks an odd number of enclosing negations,
/// `neg_pos` the offending operator for error reporting.
fn nnf(r: &Raw, neg: Option<usize>) -> Result<Formula, ParseError> {
    let temporal = |pos| {
        Err(ParseError {
            kind: ParseErrorKind::NotCoSafe,
            pos,
        })
    };
    Ok(match (r, neg) {
        (Raw::True, None) | (Raw::False, Some(_)) => Formula::True,
        (Raw::False, None) | (Raw::True, Some(_)) => Formula::False,
        (Raw::Atom(p), None) => Formula::Atom(*p),
        (Raw::Atom(p), Some(_)) => Formula::NotAtom(*p),
        (Raw::Not(inner, pos), None) => nnf(inner, Some(*pos))?,
        (Raw::Not(inner, _), Some(_)) => nnf(inner, None)?,
        (Raw::And(a, b), None) => Formula::and(nnf(a, None)?, nnf(b, None)?),
        (Raw::And(a, b), Some(_)) => Formula::or(nnf(a, neg)?, nnf(b, neg)?),
        (Raw::Or(a, b), None) => Formula::or(nnf(a, None)?, nnf(b, None)?),
        (Raw::Or(a, b), Some(_)) => Formula::and(nnf(a, neg)?, nnf(b, neg)?),
        (Raw::Implies(a, b, pos), None) => Formula::or(nnf(a, Some(*pos))?, nnf(b, None)?),
        (Raw::Implies(a, b, _), Some(_)) => Formula::and(nnf(a, None)?, nnf(b, neg)?),
        (Raw::Next(a), None) => Formula::next(nnf(a, None)?),
        (Raw::Until(a, b), None) => Formula::until(nnf(a, None)?, nnf(b, None)?),
        (Raw::Eventually(a), None) => Formula::eventually(nnf(a, None)?),
        (Raw::Next(_) | Raw::Until(..) | Raw::Eventually(_), Some(pos)) => return temporal(pos),
    })
}

/// Parse a formula whose atoms are the alphabet's labels and `D`.
pub fn parse_formula(text: &str, alphabet: &Alphabet) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
        alphabet,
    };
    let raw = p.implication()?;
    if p.at != p.toks.len() {
        return Err(p.unexpected());
    }
    nnf(&raw, None)
}
