//! Textual syntax for programs, terms, values, and functions.
//!
//! Program files are s-expressions:
//!
//! ```text
//! (program
//!   (inputs nat)
//!   (internals (nat 0))
//!   (outputs nat)
//!   (term (comp (get 0) (set 2))))
//! ```
//!
//! Types are `unit`, `bool`, `nat`, `(prod TY TY)`. Values are `tt`,
//! `true`, `false`, decimal naturals, and `(v,w)` pairs (no inner
//! whitespace, so values stay single tokens in row files). Functions use
//! lowercase combinator names with `comp(f,g)`, `pair(f,g)`, `prod(f,g)`,
//! `const(v)`, `prim(name)`. Resource ids in a term body are resolved
//! against the header layout.

use std::fmt;

use rsfkit_core::host::{HostFn, Prim, Ty, Val};
use rsfkit_core::molholes::{Program, ProgramError, Ref, RsfTerm};
use rsfkit_core::rewrite::{nf_to_term, NormalForm};
use rsfkit_core::yampa::SfTerm;

use num_bigint_shim::parse_nat;

/// Minimal decimal parsing into the unbounded natural representation,
/// via the value constructors re-exported from the core crate.
mod num_bigint_shim {
    use rsfkit_core::host::Val;

    pub fn parse_nat(digits: &str) -> Option<Val> {
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        // Fold digit by digit so arbitrarily long literals work.
        let mut acc = Val::nat(0);
        for b in digits.bytes() {
            let Val::N(n) = acc else { unreachable!() };
            acc = Val::N(n * 10u32 + (b - b'0'));
        }
        Some(acc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at {}:{}: {}", self.line, self.col, self.msg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    Syntax(SyntaxError),
    /// A resource id in the body does not fit the declared layout.
    Layout(ProgramError),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax(e) => write!(f, "{e}"),
            ParseError::Layout(e) => write!(f, "layout error: {e}"),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    Comma,
    Atom(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '(' => {
                chars.next();
                col += 1;
                toks.push(Spanned {
                    tok: Tok::LParen,
                    line: tline,
                    col: tcol,
                });
            }
            ')' => {
                chars.next();
                col += 1;
                toks.push(Spanned {
                    tok: Tok::RParen,
                    line: tline,
                    col: tcol,
                });
            }
            ',' => {
                chars.next();
                col += 1;
                toks.push(Spanned {
                    tok: Tok::Comma,
                    line: tline,
                    col: tcol,
                });
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut atom = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        atom.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                toks.push(Spanned {
                    tok: Tok::Atom(atom),
                    line: tline,
                    col: tcol,
                });
            }
            other => {
                return Err(SyntaxError {
                    line: tline,
                    col: tcol,
                    msg: format!("unexpected character {other:?}"),
                });
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Parser, SyntaxError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some(s) => (s.line, s.col),
            None => self
                .toks
                .last()
                .map(|s| (s.line, s.col + 1))
                .unwrap_or((1, 1)),
        }
    }

    fn error(&self, msg: impl Into<String>) -> SyntaxError {
        let (line, col) = self.here();
        SyntaxError {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn expect_atom(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Tok::Atom(_)) => match self.next() {
                Some(Tok::Atom(a)) => Ok(a),
                _ => unreachable!(),
            },
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn expect_keyword(&mut self, word: &str) -> Result<(), SyntaxError> {
        let a = self.expect_atom(&format!("keyword '{word}'"))?;
        if a == word {
            Ok(())
        } else {
            Err(self.error(format!("expected keyword '{word}', found '{a}'")))
        }
    }

    fn at_end(&self) -> bool {
        self.pos == self.toks.len()
    }

    fn ty(&mut self) -> Result<Ty, SyntaxError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.next();
                self.expect_keyword("prod")?;
                let a = self.ty()?;
                let b = self.ty()?;
                self.expect(Tok::RParen, "')' closing prod")?;
                Ok(Ty::prod(a, b))
            }
            Some(Tok::Atom(_)) => {
                let a = self.expect_atom("a type")?;
                match a.as_str() {
                    "unit" => Ok(Ty::Unit),
                    "bool" => Ok(Ty::Bool),
                    "nat" => Ok(Ty::Nat),
                    other => Err(self.error(format!("unknown type '{other}'"))),
                }
            }
            _ => Err(self.error("expected a type")),
        }
    }

    fn val(&mut self) -> Result<Val, SyntaxError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.next();
                let a = self.val()?;
                self.expect(Tok::Comma, "',' inside a pair value")?;
                let b = self.val()?;
                self.expect(Tok::RParen, "')' closing a pair value")?;
                Ok(Val::pair(a, b))
            }
            Some(Tok::Atom(_)) => {
                let a = self.expect_atom("a value")?;
                match a.as_str() {
                    "tt" => Ok(Val::Tt),
                    "true" => Ok(Val::B(true)),
                    "false" => Ok(Val::B(false)),
                    digits => parse_nat(digits)
                        .ok_or_else(|| self.error(format!("unknown value '{digits}'"))),
                }
            }
            _ => Err(self.error("expected a value")),
        }
    }

    fn host_fn(&mut self) -> Result<HostFn, SyntaxError> {
        let name = self.expect_atom("a function")?;
        let plain = |f: HostFn| Ok(f);
        match name.as_str() {
            "id" => plain(HostFn::Id),
            "fst" => plain(HostFn::Fst),
            "snd" => plain(HostFn::Snd),
            "dup" => plain(HostFn::Dup),
            "sdup" => plain(HostFn::SDup),
            "swap" => plain(HostFn::Swap),
            "assoc" => plain(HostFn::Assoc),
            "unassoc" => plain(HostFn::Unassoc),
            "perm" => plain(HostFn::Perm),
            "comp" | "pair" | "prod" => {
                self.expect(Tok::LParen, "'(' after combinator name")?;
                let f = self.host_fn()?;
                self.expect(Tok::Comma, "',' between arguments")?;
                let g = self.host_fn()?;
                self.expect(Tok::RParen, "')' closing arguments")?;
                Ok(match name.as_str() {
                    "comp" => HostFn::comp(f, g),
                    "pair" => HostFn::pairing(f, g),
                    _ => HostFn::prod(f, g),
                })
            }
            "const" => {
                self.expect(Tok::LParen, "'(' after const")?;
                let v = self.val()?;
                self.expect(Tok::RParen, "')' closing const")?;
                Ok(HostFn::Const(v))
            }
            "prim" => {
                self.expect(Tok::LParen, "'(' after prim")?;
                let p = self.expect_atom("a primitive name")?;
                let prim = Prim::from_name(&p)
                    .ok_or_else(|| self.error(format!("unknown primitive '{p}'")))?;
                self.expect(Tok::RParen, "')' closing prim")?;
                Ok(HostFn::Prim(prim))
            }
            other => Err(self.error(format!("unknown function '{other}'"))),
        }
    }

    fn resource_id(&mut self) -> Result<u32, SyntaxError> {
        let a = self.expect_atom("a resource id")?;
        a.parse::<u32>()
            .map_err(|_| self.error(format!("invalid resource id '{a}'")))
    }

    /// A term in the effectful language; resource types are resolved
    /// later against the program header.
    fn rsf_term(&mut self) -> Result<RawTerm, SyntaxError> {
        self.expect(Tok::LParen, "'(' opening a term")?;
        let head = self.expect_atom("a term constructor")?;
        let term = match head.as_str() {
            "arr" => RawTerm::Arr(self.host_fn()?),
            "comp" => {
                let t1 = self.rsf_term()?;
                let t2 = self.rsf_term()?;
                RawTerm::Comp(Box::new(t1), Box::new(t2))
            }
            "first" => RawTerm::First(Box::new(self.rsf_term()?)),
            "get" => RawTerm::Get(self.resource_id()?),
            "set" => RawTerm::Set(self.resource_id()?),
            other => return Err(self.error(format!("unknown term constructor '{other}'"))),
        };
        self.expect(Tok::RParen, "')' closing a term")?;
        Ok(term)
    }

    /// A term in the pure stream language.
    fn sf_term(&mut self) -> Result<SfTerm, SyntaxError> {
        self.expect(Tok::LParen, "'(' opening a term")?;
        let head = self.expect_atom("a term constructor")?;
        let term = match head.as_str() {
            "arr" => SfTerm::Arr(self.host_fn()?),
            "comp" => {
                let t1 = self.sf_term()?;
                let t2 = self.sf_term()?;
                SfTerm::comp(t1, t2)
            }
            "first" => SfTerm::first(self.sf_term()?),
            "loop" => {
                let v = self.val()?;
                let body = self.sf_term()?;
                SfTerm::feedback(v, body)
            }
            other => return Err(self.error(format!("unknown term constructor '{other}'"))),
        };
        self.expect(Tok::RParen, "')' closing a term")?;
        Ok(term)
    }
}

#[derive(Debug, Clone)]
enum RawTerm {
    Arr(HostFn),
    First(Box<RawTerm>),
    Comp(Box<RawTerm>, Box<RawTerm>),
    Get(u32),
    Set(u32),
}

fn resolve(raw: &RawTerm, p: &Program) -> Result<RsfTerm, ProgramError> {
    let lookup = |id: u32| -> Result<Ref, ProgramError> {
        match p.layout_ty(id) {
            Some(ty) => Ok(Ref::new(ty.clone(), id)),
            None => Err(ProgramError::RefOutOfRange {
                id,
                path: rsfkit_core::path::TermPath::root(),
            }),
        }
    };
    Ok(match raw {
        RawTerm::Arr(f) => RsfTerm::Arr(f.clone()),
        RawTerm::First(inner) => RsfTerm::first(resolve(inner, p)?),
        RawTerm::Comp(t1, t2) => RsfTerm::comp(resolve(t1, p)?, resolve(t2, p)?),
        RawTerm::Get(id) => RsfTerm::Get(lookup(*id)?),
        RawTerm::Set(id) => RsfTerm::Set(lookup(*id)?),
    })
}

/// Parse a complete program file.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text).map_err(ParseError::Syntax)?;
    let (mut program, raw) = parse_program_body(&mut p).map_err(ParseError::Syntax)?;
    if !p.at_end() {
        return Err(ParseError::Syntax(
            p.error("unexpected trailing input after the program"),
        ));
    }
    program.term = resolve(&raw, &program).map_err(ParseError::Layout)?;
    program.validate().map_err(ParseError::Layout)?;
    Ok(program)
}

fn parse_program_body(p: &mut Parser) -> Result<(Program, RawTerm), SyntaxError> {
    p.expect(Tok::LParen, "'(' opening the program")?;
    p.expect_keyword("program")?;

    p.expect(Tok::LParen, "'(' opening inputs")?;
    p.expect_keyword("inputs")?;
    let mut inputs = Vec::new();
    while p.peek() != Some(&Tok::RParen) {
        inputs.push(p.ty()?);
    }
    p.expect(Tok::RParen, "')' closing inputs")?;

    p.expect(Tok::LParen, "'(' opening internals")?;
    p.expect_keyword("internals")?;
    let mut internals = Vec::new();
    while p.peek() != Some(&Tok::RParen) {
        p.expect(Tok::LParen, "'(' opening an internal declaration")?;
        let ty = p.ty()?;
        let v = p.val()?;
        p.expect(Tok::RParen, "')' closing an internal declaration")?;
        internals.push((v, ty));
    }
    p.expect(Tok::RParen, "')' closing internals")?;

    p.expect(Tok::LParen, "'(' opening outputs")?;
    p.expect_keyword("outputs")?;
    let mut outputs = Vec::new();
    while p.peek() != Some(&Tok::RParen) {
        outputs.push(p.ty()?);
    }
    p.expect(Tok::RParen, "')' closing outputs")?;

    p.expect(Tok::LParen, "'(' opening the term")?;
    p.expect_keyword("term")?;
    let raw = p.rsf_term()?;
    p.expect(Tok::RParen, "')' closing the term")?;

    p.expect(Tok::RParen, "')' closing the program")?;

    let program = Program {
        inputs,
        internals,
        outputs,
        term: RsfTerm::Arr(HostFn::Id),
    };
    Ok((program, raw))
}

/// Parse a single value, e.g. one whitespace-separated row token.
pub fn parse_value(text: &str) -> Result<Val, ParseError> {
    let mut p = Parser::new(text).map_err(ParseError::Syntax)?;
    let v = p.val().map_err(ParseError::Syntax)?;
    if !p.at_end() {
        return Err(ParseError::Syntax(p.error("trailing input after value")));
    }
    Ok(v)
}

/// Parse one input row: whitespace-separated values.
pub fn parse_row(line: &str) -> Result<Vec<Val>, ParseError> {
    line.split_whitespace().map(parse_value).collect()
}

/// Parse a pure stream term (used in tests; the CLI only prints these).
pub fn parse_sf_term(text: &str) -> Result<SfTerm, ParseError> {
    let mut p = Parser::new(text).map_err(ParseError::Syntax)?;
    let t = p.sf_term().map_err(ParseError::Syntax)?;
    if !p.at_end() {
        return Err(ParseError::Syntax(p.error("trailing input after term")));
    }
    Ok(t)
}

/// Render a program in the file syntax; parsing the result yields a
/// structurally equal program.
pub fn render_program(p: &Program) -> String {
    let mut out = String::from("(program\n  (inputs");
    for ty in &p.inputs {
        out.push(' ');
        out.push_str(&ty.to_string());
    }
    out.push_str(")\n  (internals");
    for (v, ty) in &p.internals {
        out.push_str(&format!(" ({ty} {v})"));
    }
    out.push_str(")\n  (outputs");
    for ty in &p.outputs {
        out.push(' ');
        out.push_str(&ty.to_string());
    }
    out.push_str(&format!(")\n  (term {}))\n", p.term));
    out
}

/// Render a stream term.
pub fn render_sf_term(t: &SfTerm) -> String {
    t.to_string()
}

/// Render a normal form as the term it denotes.
pub fn render_normal_form(nf: &NormalForm) -> String {
    nf_to_term(nf).to_string()
}
