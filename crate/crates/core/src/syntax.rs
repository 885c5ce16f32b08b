//! Text formats: operators, input files, and form/order literals.
//!
//! Operator grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := power (['*'] power)*          juxtaposition multiplies left to right
//! power  := atom ['^' integer]
//! atom   := integer ['/' integer] | variable | '(' expr ')'
//! variable := x<i> | t<j> | dx<i> | dt<j> | z
//! ```

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::order::{LinearForm, OrderSpec, VForm};
use crate::weyl::{dehomogenize, DiffOp, Signature};
use crate::Rat;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

struct Lexed {
    toks: Vec<(Tok, usize)>,
    has_z: bool,
}

fn perr(col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line: 1, col, msg: msg.into() }
}

fn lex(sig: Signature, text: &str) -> Result<Lexed> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut has_z = false;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            toks.push((Tok::Num(s.parse().expect("digits")), col));
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphabetic() {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            let dstart = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[dstart..i].iter().collect();
            let index = || -> Result<usize> {
                let k: usize = digits.parse().map_err(|_| perr(col, format!("variable '{name}' needs an index")))?;
                if k == 0 {
                    return Err(perr(col, "variable indices start at 1"));
                }
                Ok(k - 1)
            };
            let idx = match name.as_str() {
                "z" if digits.is_empty() => {
                    has_z = true;
                    sig.z()
                }
                "x" | "dx" => {
                    let k = index()?;
                    if k >= sig.n {
                        return Err(perr(col, format!("unknown variable {name}{digits} (n={})", sig.n)));
                    }
                    if name == "x" { sig.x(k) } else { sig.dx(k) }
                }
                "t" | "dt" => {
                    let k = index()?;
                    if k >= sig.p {
                        return Err(perr(col, format!("unknown variable {name}{digits} (p={})", sig.p)));
                    }
                    if name == "t" { sig.t(k) } else { sig.dt(k) }
                }
                _ => return Err(perr(col, format!("unknown identifier '{name}{digits}'"))),
            };
            toks.push((Tok::Var(idx), col));
            continue;
        }
        let t = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '/' => Tok::Slash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => return Err(perr(col, format!("unexpected character '{c}'"))),
        };
        toks.push((t, col));
        i += 1;
    }
    Ok(Lexed { toks, has_z })
}

struct Parser<'a> {
    sig: Signature,
    toks: &'a [(Tok, usize)],
    pos: usize,
    end_col: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end_col)
    }

    fn expr(&mut self) -> Result<DiffOp> {
        let mut acc = DiffOp::zero(self.sig);
        let mut sign = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                -1
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let t = self.term()?;
            acc = if sign < 0 { &acc - &t } else { &acc + &t };
            match self.peek() {
                Some(Tok::Plus) => sign = 1,
                Some(Tok::Minus) => sign = -1,
                _ => return Ok(acc),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<DiffOp> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                }
                Some(Tok::Num(_)) | Some(Tok::Var(_)) | Some(Tok::LParen) => {}
                _ => return Ok(acc),
            }
            let rhs = self.power()?;
            acc = &acc * &rhs;
        }
    }

    fn power(&mut self) -> Result<DiffOp> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let col = self.col();
            let Some(Tok::Num(k)) = self.peek().cloned() else {
                return Err(perr(col, "expected a nonnegative integer exponent"));
            };
            self.pos += 1;
            let k: u32 = k.try_into().map_err(|_| perr(col, "exponent too large"))?;
            let mut out = DiffOp::one(self.sig);
            for _ in 0..k {
                out = &out * &base;
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<DiffOp> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Num(a)) => {
                self.pos += 1;
                let mut c = Rat::from_integer(a);
                if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    let col = self.col();
                    let Some(Tok::Num(b)) = self.peek().cloned() else {
                        return Err(perr(col, "expected an integer denominator"));
                    };
                    if b.is_zero() {
                        return Err(perr(col, "zero denominator"));
                    }
                    self.pos += 1;
                    c /= Rat::from_integer(b);
                }
                Ok(DiffOp::constant(self.sig, c))
            }
            Some(Tok::Var(idx)) => {
                self.pos += 1;
                Ok(DiffOp::var(self.sig, idx))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(perr(self.col(), "expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(t) => Err(perr(col, format!("unexpected token {t:?}"))),
            None => Err(perr(col, "unexpected end of input")),
        }
    }
}

fn parse_lexed(sig: Signature, text: &str) -> Result<(DiffOp, bool)> {
    let lexed = lex(sig, text)?;
    if lexed.toks.is_empty() {
        return Err(perr(1, "empty operator"));
    }
    let mut p = Parser { sig, toks: &lexed.toks, pos: 0, end_col: text.chars().count() + 1 };
    let op = p.expr()?;
    if p.pos != lexed.toks.len() {
        return Err(perr(p.col(), "trailing input"));
    }
    Ok((op, lexed.has_z))
}

/// Parse an element of `D<z>`; products are taken in the homogenized ring.
pub fn parse_operator(sig: Signature, text: &str) -> Result<DiffOp> {
    parse_lexed(sig, text).map(|(op, _)| op)
}

/// Parse an element of `D_{n+p}`: without an explicit `z`, products are
/// evaluated at `z = 1`; text mentioning `z` is kept in `D<z>`.
pub fn parse_d_operator(sig: Signature, text: &str) -> Result<DiffOp> {
    let (op, has_z) = parse_lexed(sig, text)?;
    Ok(if has_z { op } else { dehomogenize(&op) })
}

/// Body of an input file after the header.
#[derive(Clone, Debug, PartialEq)]
pub enum InputBody {
    /// `f<j> = <polynomial in x>` lines, in order `f1 … fp`.
    Malgrange(Vec<DiffOp>),
    /// `gen = <operator>` lines.
    Raw(Vec<DiffOp>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedInput {
    pub sig: Signature,
    pub body: InputBody,
}

fn with_line(e: Error, line: usize, offset: usize) -> Error {
    match e {
        Error::Parse { col, msg, .. } => Error::Parse { line, col: col + offset, msg },
        other => other,
    }
}

/// Parse the shared input format: header `n=<int> p=<int>`, then either
/// `f<j> = …` or `gen = …` lines. `#` starts a comment.
pub fn parse_input(text: &str) -> Result<ParsedInput> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("")))
        .filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, col: 1, msg: "missing header 'n=… p=…'".into() })?;
    let (mut n, mut p) = (None, None);
    for word in header.split_whitespace() {
        let col = header.find(word).unwrap_or(0) + 1;
        let herr = |msg: &str| Error::Parse { line: hline, col, msg: msg.into() };
        let (k, v) = word.split_once('=').ok_or_else(|| herr("expected key=value in header"))?;
        let v: usize = v.parse().map_err(|_| herr("expected a nonnegative integer"))?;
        match k {
            "n" => n = Some(v),
            "p" => p = Some(v),
            _ => return Err(herr("unknown header key")),
        }
    }
    let (Some(n), Some(p)) = (n, p) else {
        return Err(Error::Parse { line: hline, col: 1, msg: "header needs both n= and p=".into() });
    };
    let sig = Signature::new(n, p).map_err(|_| Error::Parse { line: hline, col: 1, msg: "n=0 p=0 is not a ring".into() })?;

    let mut fs: Vec<Option<DiffOp>> = vec![None; p];
    let mut gens = Vec::new();
    for (lno, line) in lines {
        let Some((lhs, rhs)) = line.split_once('=') else {
            return Err(Error::Parse { line: lno, col: 1, msg: "expected '<name> = <operator>'".into() });
        };
        let offset = lhs.chars().count() + 1;
        let name = lhs.trim();
        if name == "gen" {
            gens.push(parse_d_operator(sig, rhs).map_err(|e| with_line(e, lno, offset))?);
        } else if let Some(j) = name.strip_prefix('f').and_then(|s| s.parse::<usize>().ok()) {
            if j == 0 || j > p {
                return Err(Error::Parse { line: lno, col: 1, msg: format!("f{j} out of range for p={p}") });
            }
            let f = parse_d_operator(sig, rhs).map_err(|e| with_line(e, lno, offset))?;
            let only_x = f.terms().all(|(e, _)| e.0[n..].iter().all(|&a| a == 0));
            if !only_x {
                return Err(Error::Parse { line: lno, col: offset + 1, msg: format!("f{j} must be a polynomial in x") });
            }
            if fs[j - 1].replace(f).is_some() {
                return Err(Error::Parse { line: lno, col: 1, msg: format!("f{j} given twice") });
            }
        } else {
            return Err(Error::Parse { line: lno, col: 1, msg: format!("unknown line kind '{name}'") });
        }
    }
    let any_f = fs.iter().any(|f| f.is_some());
    match (any_f, gens.is_empty()) {
        (true, false) => Err(Error::Parse { line: hline, col: 1, msg: "mixing f<j> and gen lines".into() }),
        (true, true) => {
            let missing: Vec<String> = fs.iter().enumerate().filter(|(_, f)| f.is_none()).map(|(j, _)| format!("f{}", j + 1)).collect();
            if !missing.is_empty() {
                return Err(Error::Parse { line: hline, col: 1, msg: format!("missing {}", missing.join(", ")) });
            }
            Ok(ParsedInput { sig, body: InputBody::Malgrange(fs.into_iter().map(Option::unwrap).collect()) })
        }
        (false, _) => Ok(ParsedInput { sig, body: InputBody::Raw(gens) }),
    }
}

fn parse_rat(s: &str) -> Result<Rat> {
    let bad = || Error::InvalidForm(format!("bad rational '{s}'"));
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| bad())?;
            let b: BigInt = b.trim().parse().map_err(|_| bad())?;
            if b.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(a, b))
        }
        None => Ok(Rat::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// `V:l1,l2,…` form literal.
pub fn parse_vform(text: &str) -> Result<VForm> {
    let body = text
        .trim()
        .strip_prefix("V:")
        .ok_or_else(|| Error::InvalidForm(format!("expected 'V:l1,l2', got '{text}'")))?;
    VForm::new(body.split(',').map(parse_rat).collect::<Result<Vec<_>>>()?)
}

/// Order literals: `V:a,b` (the homogenized order of that form), `zero`,
/// `form:V:a,b`, `s3:V:a,b`, `lim:V:a,b:V:c,d` (limit order with direction).
pub fn parse_order(sig: Signature, text: &str) -> Result<OrderSpec> {
    let text = text.trim();
    let check_p = |v: &VForm| -> Result<()> {
        if v.p() != sig.p {
            return Err(Error::InvalidForm(format!("form {v} has {} coefficients, ring has p={}", v.p(), sig.p)));
        }
        Ok(())
    };
    if text == "zero" {
        return Ok(OrderSpec::HomForm(LinearForm::zero(sig.m())));
    }
    if let Some(rest) = text.strip_prefix("lim:") {
        let idx = rest[2..]
            .find("V:")
            .map(|i| i + 2)
            .ok_or_else(|| Error::InvalidForm("lim: needs two forms".into()))?;
        let l = parse_vform(rest[..idx].trim_end_matches(':'))?;
        let d = parse_vform(&rest[idx..])?;
        check_p(&l)?;
        check_p(&d)?;
        return Ok(OrderSpec::ConeLimit { l, direction: d });
    }
    if let Some(rest) = text.strip_prefix("s3:") {
        let l = parse_vform(rest)?;
        check_p(&l)?;
        return Ok(OrderSpec::Section3(l));
    }
    if let Some(rest) = text.strip_prefix("form:") {
        let l = parse_vform(rest)?;
        check_p(&l)?;
        return Ok(OrderSpec::Form(l.to_linear(sig)));
    }
    let l = parse_vform(text)?;
    check_p(&l)?;
    Ok(OrderSpec::hom_v(&l, sig))
}

/// Render a rational the way the parsers read it back.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
