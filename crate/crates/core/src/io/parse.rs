//! Recursive-descent parser for the expression language.
//!
//! ```text
//! expr    := term ( "#" term )*
//! term    := primary ( "#^{" site "," site "}" primary )*
//! primary := "(" expr ")" | atom
//! atom    := NAME | "cap(" NAME ")" | "double(" NAME ")"
//!          | "glue(" NAME "," NAME ")" | "Xg(" INT ")"
//! site    := IDENT [ "@" INT ]
//! ```
//!
//! Both sum operators are left-associative and `#^` binds tighter than
//! `#`. A bare site id means the first open site of that name in the
//! operand, depth-first; `@n` selects the n-th. Catalog constructors are
//! resolved during parsing, so the produced tree contains only atoms and
//! sums.

use std::fmt;

use crate::catalog::{Capped, Catalog, CatalogError, Glued};
use crate::expr::{ExprError, SpaceExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownAtom(String),
    /// The name resolves, but to a space with boundary.
    NotClosed(String),
    SiteNotFound(String),
    Catalog(CatalogError),
}

#[derive(Debug, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: Span,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match &self.kind {
            ParseErrorKind::Syntax(m) => m.clone(),
            ParseErrorKind::UnknownAtom(n) => format!("unknown atom `{n}`"),
            ParseErrorKind::NotClosed(n) => {
                format!("`{n}` is a space with boundary, not a closed space")
            }
            ParseErrorKind::SiteNotFound(s) => format!("cannot resolve site `{s}`"),
            ParseErrorKind::Catalog(e) => e.to_string(),
        };
        write!(f, "{msg} at {}..{}", self.span.start, self.span.end)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Hash,
    HatOpen,
    LParen,
    RParen,
    Comma,
    RBrace,
    At,
    Ident(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '~' | '/' | '-')
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
            }
            '#' => {
                if bytes.get(i + 1) == Some(&'^') {
                    if bytes.get(i + 2) != Some(&'{') {
                        return Err(ParseError {
                            kind: ParseErrorKind::Syntax("expected `{` after `#^`".to_string()),
                            span: Span { start, end: i + 2 },
                        });
                    }
                    tokens.push(Token { tok: Tok::HatOpen, span: Span { start, end: i + 3 } });
                    i += 3;
                } else {
                    tokens.push(Token { tok: Tok::Hash, span: Span { start, end: i + 1 } });
                    i += 1;
                }
            }
            '(' | ')' | ',' | '}' | '@' => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '}' => Tok::RBrace,
                    _ => Tok::At,
                };
                tokens.push(Token { tok, span: Span { start, end: i + 1 } });
                i += 1;
            }
            c if is_ident_char(c) => {
                let mut j = i;
                while j < bytes.len() && is_ident_char(bytes[j]) {
                    j += 1;
                }
                let ident: String = bytes[i..j].iter().collect();
                tokens.push(Token { tok: Tok::Ident(ident), span: Span { start, end: j } });
                i = j;
            }
            other => {
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax(format!("unexpected character `{other}`")),
                    span: Span { start, end: i + 1 },
                })
            }
        }
    }
    Ok(tokens)
}

pub fn parse_expr(catalog: &Catalog, text: &str) -> Result<SpaceExpr, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser { catalog, tokens, pos: 0, len: text.len() };
    let expr = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.syntax("trailing input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    catalog: &'a Catalog,
    tokens: Vec<Token>,
    pos: usize,
    len: usize,
}

impl<'a> Parser<'a> {
    fn here(&self) -> Span {
        self.tokens
            .get(self.pos)
            .map(|t| t.span)
            .unwrap_or(Span { start: self.len, end: self.len })
    }

    fn syntax(&self, msg: &str) -> ParseError {
        ParseError { kind: ParseErrorKind::Syntax(msg.to_string()), span: self.here() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn eat(&mut self, tok: Tok, what: &str) -> Result<Span, ParseError> {
        match self.tokens.get(self.pos) {
            Some(t) if t.tok == tok => {
                self.pos += 1;
                Ok(t.span)
            }
            _ => Err(self.syntax(&format!("expected {what}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        match self.tokens.get(self.pos).cloned() {
            Some(Token { tok: Tok::Ident(s), span }) => {
                self.pos += 1;
                Ok((s, span))
            }
            _ => Err(self.syntax(&format!("expected {what}"))),
        }
    }

    fn expr(&mut self) -> Result<SpaceExpr, ParseError> {
        let mut acc = self.term()?;
        while self.peek() == Some(&Tok::Hash) {
            self.pos += 1;
            let rhs = self.term()?;
            acc = SpaceExpr::sum_s2(acc, rhs);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<SpaceExpr, ParseError> {
        let mut acc = self.primary()?;
        while self.peek() == Some(&Tok::HatOpen) {
            let op_span = self.eat(Tok::HatOpen, "`#^{`")?;
            let (lsite, lord, lspan) = self.site()?;
            self.eat(Tok::Comma, "`,`")?;
            let (rsite, rord, rspan) = self.site()?;
            self.eat(Tok::RBrace, "`}`")?;
            let rhs = self.primary()?;
            let lref = acc.find_open_site(&lsite, lord).map_err(|_| ParseError {
                kind: ParseErrorKind::SiteNotFound(lsite.clone()),
                span: lspan,
            })?;
            let rref = rhs.find_open_site(&rsite, rord).map_err(|_| ParseError {
                kind: ParseErrorKind::SiteNotFound(rsite.clone()),
                span: rspan,
            })?;
            acc = SpaceExpr::sum_p2(acc, lref, rhs, rref).map_err(|e| match e {
                ExprError::SiteNotFound(s) | ExprError::SiteAlreadyConsumed(s) => ParseError {
                    kind: ParseErrorKind::SiteNotFound(s),
                    span: op_span,
                },
                other => ParseError {
                    kind: ParseErrorKind::Syntax(other.to_string()),
                    span: op_span,
                },
            })?;
        }
        Ok(acc)
    }

    fn primary(&mut self) -> Result<SpaceExpr, ParseError> {
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let inner = self.expr()?;
            self.eat(Tok::RParen, "`)`")?;
            return Ok(inner);
        }
        self.atom()
    }

    fn site(&mut self) -> Result<(String, usize, Span), ParseError> {
        let (name, span) = self.ident("a site identifier")?;
        if self.peek() == Some(&Tok::At) {
            self.pos += 1;
            let (num, nspan) = self.ident("an occurrence number after `@`")?;
            let ordinal: usize = num.parse().map_err(|_| ParseError {
                kind: ParseErrorKind::Syntax(format!("invalid occurrence number `{num}`")),
                span: nspan,
            })?;
            Ok((name, ordinal, Span { start: span.start, end: nspan.end }))
        } else {
            Ok((name, 1, span))
        }
    }

    fn atom(&mut self) -> Result<SpaceExpr, ParseError> {
        let (ident, span) = self.ident("an atom name")?;
        if self.peek() != Some(&Tok::LParen) {
            return self.resolve_atom(&ident, span);
        }
        match ident.as_str() {
            "cap" => {
                self.pos += 1;
                let (name, nspan) = self.name()?;
                let end = self.eat(Tok::RParen, "`)`")?;
                let block = self.lookup_block(&name, nspan)?;
                let capped = self.catalog.cap_off(&block).map_err(|e| ParseError {
                    kind: ParseErrorKind::Catalog(e),
                    span: nspan,
                })?;
                match capped {
                    Capped::Atom(a) => Ok(SpaceExpr::atom(a)),
                    Capped::Block(b) => Err(ParseError {
                        kind: ParseErrorKind::NotClosed(format!("cap({})", b.name)),
                        span: Span { start: span.start, end: end.end },
                    }),
                }
            }
            "double" => {
                self.pos += 1;
                let (name, nspan) = self.name()?;
                self.eat(Tok::RParen, "`)`")?;
                let block = self.lookup_block(&name, nspan)?;
                self.catalog.double_along(&block).map_err(|e| ParseError {
                    kind: ParseErrorKind::Catalog(e),
                    span: nspan,
                })
            }
            "glue" => {
                self.pos += 1;
                let (a, aspan) = self.name()?;
                self.eat(Tok::Comma, "`,`")?;
                let (b, bspan) = self.name()?;
                let end = self.eat(Tok::RParen, "`)`")?;
                let ba = self.lookup_block(&a, aspan)?;
                let bb = self.lookup_block(&b, bspan)?;
                match self.catalog.glue(&ba, &bb).map_err(|e| ParseError {
                    kind: ParseErrorKind::Catalog(e),
                    span: Span { start: span.start, end: end.end },
                })? {
                    Glued::Closed(expr) => Ok(expr),
                    Glued::Block(block) => Err(ParseError {
                        kind: ParseErrorKind::NotClosed(format!("glue({a},{b}) = {}", block.name)),
                        span: Span { start: span.start, end: end.end },
                    }),
                }
            }
            "Xg" => {
                self.pos += 1;
                let (num, nspan) = self.ident("a genus")?;
                self.eat(Tok::RParen, "`)`")?;
                let g: u32 = num.parse().map_err(|_| ParseError {
                    kind: ParseErrorKind::Syntax(format!("invalid genus `{num}`")),
                    span: nspan,
                })?;
                let atom = self.catalog.xg_atom(g).map_err(|e| ParseError {
                    kind: ParseErrorKind::Catalog(e),
                    span: nspan,
                })?;
                Ok(SpaceExpr::atom(atom))
            }
            _ => {
                // Parenthesized part of a literal name such as `B(pt)`.
                self.pos += 1;
                let (inner, _) = self.name()?;
                let end = self.eat(Tok::RParen, "`)`")?;
                let full = format!("{ident}({inner})");
                self.resolve_atom(&full, Span { start: span.start, end: end.end })
            }
        }
    }

    /// A catalog name, possibly with one parenthesized suffix: `octopod`,
    /// `B(pt)`, `K(P2)`.
    fn name(&mut self) -> Result<(String, Span), ParseError> {
        let (ident, span) = self.ident("a catalog name")?;
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let (inner, _) = self.name()?;
            let end = self.eat(Tok::RParen, "`)`")?;
            Ok((format!("{ident}({inner})"), Span { start: span.start, end: end.end }))
        } else {
            Ok((ident, span))
        }
    }

    fn resolve_atom(&self, name: &str, span: Span) -> Result<SpaceExpr, ParseError> {
        match self.catalog.atom(name) {
            Ok(spec) => Ok(SpaceExpr::atom(spec)),
            Err(CatalogError::UnknownName(n)) => {
                Err(ParseError { kind: ParseErrorKind::UnknownAtom(n), span })
            }
            Err(_) => Err(ParseError {
                kind: ParseErrorKind::NotClosed(name.to_string()),
                span,
            }),
        }
    }

    fn lookup_block(
        &self,
        name: &str,
        span: Span,
    ) -> Result<std::sync::Arc<crate::catalog::BlockSpec>, ParseError> {
        self.catalog.block(name).map_err(|e| match e {
            CatalogError::UnknownName(n) => {
                ParseError { kind: ParseErrorKind::UnknownAtom(n), span }
            }
            other => ParseError { kind: ParseErrorKind::Catalog(other), span },
        })
    }
}
