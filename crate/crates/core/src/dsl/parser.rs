use std::fmt;

use crate::dsl::ast::{Circuit, ModeTerm, Pos, Statement, Stmt};
use crate::dsl::validate::validate;
use crate::opalg::{CoefExpr, CoefNode, Component, Func, ModeKind, ParamValue};
use crate::output::Side;

const MAX_DEPTH: usize = 200;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            pos,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    LParen,
    RParen,
    Comma,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Dot,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Num(s) => write!(f, "`{s}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Dot => write!(f, "`.`"),
        }
    }
}

fn lex_line(line: &str, lineno: usize) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos {
            line: lineno,
            col: i + 1,
        };
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len()
                && chars[i] == '.'
                && i + 1 < chars.len()
                && chars[i + 1].is_ascii_digit()
            {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            out.push((Tok::Num(chars[start..i].iter().collect()), pos));
            continue;
        }
        let t = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '.' => Tok::Dot,
            other => {
                return Err(ParseError::new(
                    pos,
                    format!("unexpected character `{other}`"),
                ));
            }
        };
        out.push((t, pos));
        i += 1;
    }
    Ok(out)
}

const RESERVED: [&str; 9] = [
    "param", "mode", "output", "target", "expect", "protocol", "pi", "i", "infinity",
];

pub fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name) || Func::from_name(name).is_some() || name == "dag" || name == "modes"
}

struct Line {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
    depth: usize,
}

enum Arg {
    Pos(CoefExpr, Pos),
    Key(String, CoefExpr, Pos),
}

impl Line {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.at + 1).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::new(self.pos(), msg))
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        match self.peek() {
            Some(t) => self.err(format!("expected {wanted}, found {t}")),
            None => self.err(format!("expected {wanted}, found end of line")),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            self.unexpected(wanted)
        }
    }

    fn ident(&mut self, wanted: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => self.unexpected(wanted),
        }
    }

    fn name(&mut self, wanted: &str) -> Result<String, ParseError> {
        let pos = self.pos();
        let s = self.ident(wanted)?;
        if is_reserved(&s) {
            return Err(ParseError::new(pos, format!("`{s}` is a reserved word")));
        }
        Ok(s)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.at += 1;
                Ok(())
            }
            _ => self.unexpected(&format!("`{kw}`")),
        }
    }

    fn uint(&mut self, wanted: &str) -> Result<u32, ParseError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Num(s)) => {
                let v = s
                    .parse::<u32>()
                    .map_err(|_| ParseError::new(pos, format!("expected {wanted}, found `{s}`")))?;
                self.at += 1;
                Ok(v)
            }
            _ => self.unexpected(wanted),
        }
    }

    fn done(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => self.err(format!("unexpected {t} after statement")),
        }
    }

    fn expr(&mut self) -> Result<CoefExpr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err("expression nested too deeply");
        }
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    lhs = lhs + self.term()?;
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    lhs = lhs - self.term()?;
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<CoefExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.at += 1;
                    lhs = lhs * self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.at += 1;
                    lhs = lhs / self.unary()?;
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<CoefExpr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err("expression nested too deeply");
        }
        let r = match self.peek() {
            Some(Tok::Minus) => {
                self.at += 1;
                self.unary().map(|e| -e)
            }
            _ => self.primary(),
        };
        self.depth -= 1;
        r
    }

    fn primary(&mut self) -> Result<CoefExpr, ParseError> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Num(s)) => {
                if s.parse::<f64>().map(|x| x.is_finite()) != Ok(true) {
                    return Err(ParseError::new(pos, format!("malformed number `{s}`")));
                }
                Ok(CoefExpr::num(&s))
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(s)) => match s.as_str() {
                "pi" => Ok(CoefExpr::pi()),
                "i" => Ok(CoefExpr::i()),
                _ => {
                    if let Some(f) = Func::from_name(&s) {
                        self.expect(Tok::LParen, &format!("`(` after `{s}`"))?;
                        let arg = self.expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        return Ok(CoefExpr::call(f, arg));
                    }
                    if is_reserved(&s) {
                        return Err(ParseError::new(
                            pos,
                            format!("`{s}` cannot appear in an expression"),
                        ));
                    }
                    Ok(CoefExpr::param(&s))
                }
            },
            Some(t) => Err(ParseError::new(
                pos,
                format!("expected an expression, found {t}"),
            )),
            None => Err(ParseError::new(
                pos,
                "expected an expression, found end of line",
            )),
        }
    }

    /// `( arg, ... )` where each arg is `EXPR` or `KEY=EXPR`.
    fn args(&mut self) -> Result<Vec<Arg>, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.at += 1;
            return Ok(out);
        }
        loop {
            let pos = self.pos();
            if let (Some(Tok::Ident(k)), Some(Tok::Eq)) = (self.peek(), self.peek2()) {
                let k = k.clone();
                self.at += 2;
                let bare = match (self.peek(), self.peek2()) {
                    (Some(Tok::Ident(w)), Some(Tok::Comma | Tok::RParen))
                        if Func::from_name(w).is_some() =>
                    {
                        Some(CoefExpr::param(w))
                    }
                    _ => None,
                };
                let v = match bare {
                    Some(v) => {
                        self.at += 1;
                        v
                    }
                    None => self.expr()?,
                };
                out.push(Arg::Key(k, v, pos));
            } else {
                out.push(Arg::Pos(self.expr()?, pos));
            }
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => break,
                _ => {
                    self.at -= 1;
                    return self.unexpected("`,` or `)`");
                }
            }
        }
        Ok(out)
    }

    fn mode_terms(&mut self) -> Result<Vec<ModeTerm>, ParseError> {
        self.keyword("modes")?;
        self.expect(Tok::LParen, "`(`")?;
        let mut out = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.at += 1;
            return Ok(out);
        }
        loop {
            let dagger = matches!(self.peek(), Some(Tok::Ident(s)) if s == "dag")
                && self.peek2() == Some(&Tok::LParen);
            if dagger {
                self.at += 2;
            }
            let wire = self.name("a wire name")?;
            let component = self.component()?;
            if dagger {
                self.expect(Tok::RParen, "`)`")?;
            }
            self.expect(Tok::Eq, "`=`")?;
            let coef = self.expr()?;
            out.push(ModeTerm {
                wire,
                component,
                dagger,
                coef,
            });
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => break,
                _ => {
                    self.at -= 1;
                    return self.unexpected("`,` or `)`");
                }
            }
        }
        Ok(out)
    }

    fn component(&mut self) -> Result<Component, ParseError> {
        if self.peek() == Some(&Tok::Dot) {
            self.at += 1;
            self.keyword("perp")?;
            Ok(Component::Perp)
        } else {
            Ok(Component::Zero)
        }
    }
}

fn wire_of(e: &CoefExpr, pos: Pos) -> Result<String, ParseError> {
    match e.node() {
        CoefNode::Param(p) => Ok(p.clone()),
        _ => Err(ParseError::new(
            pos,
            format!("expected a wire name, found `{e}`"),
        )),
    }
}

fn split_combine_term(e: &CoefExpr, pos: Pos) -> Result<(CoefExpr, String), ParseError> {
    match e.node() {
        CoefNode::Param(p) => Ok((CoefExpr::one(), p.clone())),
        CoefNode::Neg(a) => split_combine_term(a, pos).map(|(w, m)| (-w, m)),
        CoefNode::Mul(w, m) => match m.node() {
            CoefNode::Param(p) => Ok((w.clone(), p.clone())),
            _ => Err(ParseError::new(
                pos,
                "combine terms must have the form WEIGHT*SIGNAL",
            )),
        },
        _ => Err(ParseError::new(
            pos,
            "combine terms must have the form WEIGHT*SIGNAL",
        )),
    }
}

struct ElemArgs {
    wires: Vec<(String, Pos)>,
    keys: Vec<(String, CoefExpr, Pos)>,
    pos: Pos,
}

impl ElemArgs {
    fn take(&mut self, key: &str) -> Option<CoefExpr> {
        let i = self.keys.iter().position(|(k, _, _)| k == key)?;
        Some(self.keys.remove(i).1)
    }

    fn require(&mut self, key: &str, elem: &str) -> Result<CoefExpr, ParseError> {
        self.take(key)
            .ok_or_else(|| ParseError::new(self.pos, format!("`{elem}` requires `{key}=`")))
    }

    fn finish(&self, elem: &str) -> Result<(), ParseError> {
        match self.keys.first() {
            Some((k, _, p)) => Err(ParseError::new(
                *p,
                format!("`{elem}` has no argument `{k}`"),
            )),
            None => Ok(()),
        }
    }

    fn arity(&self, elem: &str, n: usize) -> Result<(), ParseError> {
        if self.wires.len() != n {
            return Err(ParseError::new(
                self.pos,
                format!(
                    "`{elem}` takes {n} wire argument(s), found {}",
                    self.wires.len()
                ),
            ));
        }
        Ok(())
    }

    fn bin(&mut self, elem: &str) -> Result<Option<u32>, ParseError> {
        let Some(e) = self.take("bin") else {
            return Ok(None);
        };
        match e.node() {
            CoefNode::Num(s) => s.parse::<u32>().map(Some).map_err(|_| {
                ParseError::new(
                    self.pos,
                    format!("`{elem}` bin must be a non-negative integer"),
                )
            }),
            _ => Err(ParseError::new(
                self.pos,
                format!("`{elem}` bin must be a non-negative integer"),
            )),
        }
    }
}

fn element(line: &mut Line, outs: Vec<(String, Pos)>) -> Result<Stmt, ParseError> {
    let epos = line.pos();
    let elem = line.ident("an element name")?;
    if elem == "combine" {
        let args = line.args()?;
        line.done()?;
        if outs.len() != 1 {
            return Err(ParseError::new(outs[0].1, "`combine` produces one output"));
        }
        let mut terms = Vec::new();
        for a in args {
            match a {
                Arg::Pos(e, p) => terms.push(split_combine_term(&e, p)?),
                Arg::Key(k, _, p) => {
                    return Err(ParseError::new(
                        p,
                        format!("`combine` has no argument `{k}`"),
                    ));
                }
            }
        }
        if terms.is_empty() {
            return Err(ParseError::new(epos, "`combine` needs at least one signal"));
        }
        return Ok(Stmt::Combine {
            out: outs[0].0.clone(),
            terms,
        });
    }
    let n_out = match elem.as_str() {
        "split" | "squeeze" | "unsqueeze" => 2,
        "phase" | "homodyne" | "displace" => 1,
        _ => return Err(ParseError::new(epos, format!("unknown element `{elem}`"))),
    };
    if outs.len() != n_out {
        return Err(ParseError::new(
            outs[0].1,
            format!("`{elem}` produces {n_out} output(s), found {}", outs.len()),
        ));
    }
    let raw = line.args()?;
    line.done()?;
    let mut a = ElemArgs {
        wires: Vec::new(),
        keys: Vec::new(),
        pos: epos,
    };
    for arg in raw {
        match arg {
            Arg::Pos(e, p) => {
                if !a.keys.is_empty() {
                    return Err(ParseError::new(
                        p,
                        "wire arguments must precede keyword arguments",
                    ));
                }
                a.wires.push((wire_of(&e, p)?, p));
            }
            Arg::Key(k, e, p) => {
                if a.keys.iter().any(|(k2, _, _)| *k2 == k) {
                    return Err(ParseError::new(p, format!("duplicate argument `{k}`")));
                }
                a.keys.push((k, e, p));
            }
        }
    }
    let o = |i: usize| outs[i].0.clone();
    let w = |a: &ElemArgs, i: usize| a.wires[i].0.clone();
    let stmt = match elem.as_str() {
        "split" => {
            a.arity(&elem, 2)?;
            Stmt::Split {
                out: [o(0), o(1)],
                t: w(&a, 0),
                r: w(&a, 1),
                alpha: a.require("alpha", &elem)?,
                phi: a.require("phi", &elem)?,
            }
        }
        "squeeze" => {
            a.arity(&elem, 2)?;
            Stmt::Squeeze {
                out: [o(0), o(1)],
                a: w(&a, 0),
                b: w(&a, 1),
                gain: a.require("gain", &elem)?,
                phase: a.take("phase").unwrap_or_else(CoefExpr::zero),
            }
        }
        "unsqueeze" => {
            a.arity(&elem, 2)?;
            Stmt::Unsqueeze {
                out: [o(0), o(1)],
                a: w(&a, 0),
                b: w(&a, 1),
                gain: a.require("gain", &elem)?,
            }
        }
        "phase" => {
            a.arity(&elem, 1)?;
            Stmt::Phase {
                out: o(0),
                input: w(&a, 0),
                phi: a.require("phi", &elem)?,
            }
        }
        "homodyne" => {
            a.arity(&elem, 2)?;
            Stmt::Homodyne {
                out: o(0),
                signal: w(&a, 0),
                resource: w(&a, 1),
                xphase: a.require("xphase", &elem)?,
                pphase: a.require("pphase", &elem)?,
            }
        }
        "displace" => {
            a.arity(&elem, 2)?;
            Stmt::Displace {
                out: o(0),
                input: w(&a, 0),
                signal: w(&a, 1),
                gain: a.require("gain", &elem)?,
                bin: a.bin(&elem)?,
            }
        }
        _ => unreachable!("element names are matched above"),
    };
    a.finish(&elem)?;
    Ok(stmt)
}

fn statement(line: &mut Line) -> Result<Stmt, ParseError> {
    match line.peek() {
        Some(Tok::LParen) => {
            line.at += 1;
            let p1 = line.pos();
            let a = line.name("a wire name")?;
            line.expect(Tok::Comma, "`,`")?;
            let p2 = line.pos();
            let b = line.name("a wire name")?;
            line.expect(Tok::RParen, "`)`")?;
            line.expect(Tok::Eq, "`=`")?;
            element(line, vec![(a, p1), (b, p2)])
        }
        Some(Tok::Ident(kw)) => match kw.as_str() {
            "param" => {
                line.at += 1;
                let name = line.name("a parameter name")?;
                line.expect(Tok::Eq, "`=`")?;
                let value = if matches!(line.peek(), Some(Tok::Ident(s)) if s == "infinity") {
                    line.at += 1;
                    ParamValue::Infinity
                } else {
                    ParamValue::Value(line.expr()?)
                };
                line.done()?;
                Ok(Stmt::Param { name, value })
            }
            "mode" => {
                line.at += 1;
                let kpos = line.pos();
                let k = line.ident("a mode kind")?;
                let kind = ModeKind::from_keyword(&k).ok_or_else(|| {
                    ParseError::new(
                        kpos,
                        format!("unknown mode kind `{k}` (expected vacuum, entanglement_seed, signal or local_oscillator)"),
                    )
                })?;
                let name = line.name("a mode name")?;
                line.keyword("rail")?;
                line.expect(Tok::Eq, "`=`")?;
                let rail = line.ident("a rail name")?;
                line.keyword("bin")?;
                line.expect(Tok::Eq, "`=`")?;
                let bin = line.uint("a non-negative integer bin")?;
                line.done()?;
                Ok(Stmt::Mode {
                    kind,
                    name,
                    rail,
                    bin,
                })
            }
            "output" => {
                line.at += 1;
                let name = line.name("an output name")?;
                line.expect(Tok::Eq, "`=`")?;
                let wire = line.name("a wire name")?;
                let mut side = Side::Transmitted;
                if line.peek().is_some() {
                    line.keyword("side")?;
                    line.expect(Tok::Eq, "`=`")?;
                    let spos = line.pos();
                    let s = line.ident("a side")?;
                    side = Side::from_keyword(&s).ok_or_else(|| {
                        ParseError::new(
                            spos,
                            format!("unknown side `{s}` (expected transmitted, reflected, perbin or aux)"),
                        )
                    })?;
                }
                line.done()?;
                Ok(Stmt::Output { name, wire, side })
            }
            "target" => {
                line.at += 1;
                let name = line.name("a target name")?;
                line.expect(Tok::Eq, "`=`")?;
                let terms = line.mode_terms()?;
                line.done()?;
                Ok(Stmt::Target { name, terms })
            }
            "expect" => {
                line.at += 1;
                let limit = matches!(line.peek(), Some(Tok::Ident(s)) if s == "limit")
                    && matches!(line.peek2(), Some(Tok::Ident(_)));
                if limit {
                    line.at += 1;
                }
                let port = line.name("an output name")?;
                let component = line.component()?;
                line.expect(Tok::Eq, "`=`")?;
                let terms = line.mode_terms()?;
                line.done()?;
                Ok(Stmt::Expect {
                    port,
                    component,
                    limit,
                    terms,
                })
            }
            "protocol" => {
                line.at += 1;
                let name = line.ident("a protocol name")?;
                let mut args = Vec::new();
                for a in line.args()? {
                    match a {
                        Arg::Key(k, e, p) => {
                            if args.iter().any(|(k2, _)| *k2 == k) {
                                return Err(ParseError::new(
                                    p,
                                    format!("duplicate argument `{k}`"),
                                ));
                            }
                            args.push((k, e));
                        }
                        Arg::Pos(_, p) => {
                            return Err(ParseError::new(
                                p,
                                "protocol arguments must be written KEY=VALUE",
                            ));
                        }
                    }
                }
                line.done()?;
                Ok(Stmt::Protocol { name, args })
            }
            _ => {
                let p = line.pos();
                let out = line.name("a wire name")?;
                line.expect(Tok::Eq, "`=`")?;
                element(line, vec![(out, p)])
            }
        },
        _ => line.unexpected("a statement"),
    }
}

/// Parses a standalone coefficient expression such as `tanh(s)/sqrt(2)`.
pub fn parse_expr(text: &str) -> Result<CoefExpr, ParseError> {
    if text.lines().count() > 1 {
        return Err(ParseError::new(
            Pos { line: 2, col: 1 },
            "expected a single line",
        ));
    }
    let toks = lex_line(text, 1)?;
    let mut line = Line {
        toks,
        at: 0,
        end: Pos {
            line: 1,
            col: text.chars().count() + 1,
        },
        depth: 0,
    };
    let e = line.expr()?;
    line.done()?;
    Ok(e)
}

/// Parses syntax only; identifiers are not resolved.
pub fn parse_syntax(text: &str) -> Result<Circuit, ParseError> {
    let mut c = Circuit::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() {
            c.statements.push(Statement {
                stmt: Stmt::Blank,
                pos: Pos {
                    line: lineno,
                    col: 1,
                },
            });
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            c.statements.push(Statement {
                stmt: Stmt::Comment(rest.trim_end().to_string()),
                pos: Pos {
                    line: lineno,
                    col: 1,
                },
            });
            continue;
        }
        let toks = lex_line(raw, lineno)?;
        let end = Pos {
            line: lineno,
            col: raw.chars().count() + 1,
        };
        let start = toks.first().map(|(_, p)| *p).unwrap_or(end);
        let mut line = Line {
            toks,
            at: 0,
            end,
            depth: 0,
        };
        let stmt = statement(&mut line)?;
        c.statements.push(Statement { stmt, pos: start });
    }
    Ok(c)
}

/// Parses and resolves a circuit description.
pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let c = parse_syntax(text)?;
    validate(&c)?;
    Ok(c)
}

/// Like [`parse_circuit`], reporting the position of the first invalid UTF-8 byte.
pub fn parse_circuit_bytes(bytes: &[u8]) -> Result<Circuit, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(s) => parse_circuit(s),
        Err(e) => {
            let good = &bytes[..e.valid_up_to()];
            let line = good.iter().filter(|&&b| b == b'\n').count() + 1;
            let last = good
                .iter()
                .rposition(|&b| b == b'\n')
                .map(|i| i + 1)
                .unwrap_or(0);
            let col = String::from_utf8_lossy(&good[last..]).chars().count() + 1;
            Err(ParseError::new(Pos { line, col }, "invalid UTF-8"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_round_trip() {
        for src in [
            "-a*b",
            "a - (b + c)",
            "(a + b)*c/d",
            "-(a + b)",
            "exp(-i*pi/4)*sqrt(1 - alpha)/2",
            "1e-3 + 2.5E+2",
            "a/(b*c)",
            "-2",
            "conj(sqrt(x))",
        ] {
            let toks = lex_line(src, 1).unwrap();
            let mut l = Line {
                toks,
                at: 0,
                end: Pos::default(),
                depth: 0,
            };
            let e = l.expr().unwrap();
            let printed = e.to_string();
            let toks = lex_line(&printed, 1).unwrap();
            let mut l2 = Line {
                toks,
                at: 0,
                end: Pos::default(),
                depth: 0,
            };
            assert_eq!(l2.expr().unwrap(), e, "{src} -> {printed}");
        }
    }

    #[test]
    fn errors_carry_location() {
        let e = parse_syntax("param s = 1\n(a, b) = squeeze(e1 e2, gain=s)\n").unwrap_err();
        assert_eq!(e.pos, Pos { line: 2, col: 21 });
        let e = parse_syntax("mode signal j rail=x bin=-1").unwrap_err();
        assert_eq!(e.pos.line, 1);
        let e = parse_syntax("x = frobnicate(a)").unwrap_err();
        assert!(e.message.contains("unknown element"));
        assert_eq!(e.pos.col, 5);
        let e = parse_syntax("param s = 2 $").unwrap_err();
        assert_eq!(e.pos.col, 13);
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = format!("param x = {}1{}", "(".repeat(5000), ")".repeat(5000));
        assert!(parse_syntax(&src).is_err());
        let src = format!("param x = {}1", "-".repeat(5000));
        assert!(parse_syntax(&src).is_err());
    }

    #[test]
    fn combine_terms_split_weights() {
        let c = parse_syntax("M = combine(z1*M1, -M2, (a + b)*M3)").unwrap();
        let Stmt::Combine { terms, .. } = &c.statements[0].stmt else {
            panic!("not a combine");
        };
        assert_eq!(terms[0].1, "M1");
        assert_eq!(terms[1].0, -CoefExpr::one());
        assert_eq!(terms[2].0.to_string(), "a + b");
    }

    #[test]
    fn invalid_utf8_position() {
        let e = parse_circuit_bytes(b"param s = 1\nparam \xff = 2").unwrap_err();
        assert_eq!(e.pos, Pos { line: 2, col: 7 });
    }
}
