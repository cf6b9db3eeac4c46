//! Line-oriented parser for the `.cvq` circuit language.
//!
//! ```text
//! modes 2                  # optional; otherwise inferred from the targets
//! Squeezed(2) | q[0]
//! Rgate(-pi/2) | q[0]
//! BSgate(pi/4, 0) | q[0], q[1]
//! MeasureX | q[0]
//! ```
//!
//! Arguments are `-`-prefixed products and quotients of decimal literals
//! and `pi`.

use std::f64::consts::PI;
use thiserror::Error;

use super::ir::{Circuit, GateKind};

#[derive(Clone, Debug, PartialEq, Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Pipe,
    Minus,
    Slash,
    Star,
}

struct Lexed {
    tok: Tok,
    col: usize,
}

fn lex(line: &str, lineno: usize) -> Result<Vec<Lexed>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |col: usize, msg: String| ParseError { line: lineno, col, msg };
    while i < chars.len() {
        let ch = chars[i];
        let col = i + 1;
        if ch == '#' {
            break;
        }
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match ch {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            '|' => Some(Tok::Pipe),
            '-' => Some(Tok::Minus),
            '/' => Some(Tok::Slash),
            '*' => Some(Tok::Star),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Lexed { tok, col });
            i += 1;
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Lexed { tok: Tok::Ident(chars[start..i].iter().collect()), col });
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| err(col, format!("malformed number '{text}'")))?;
            out.push(Lexed { tok: Tok::Num(v), col });
        } else {
            return Err(err(col, format!("unexpected character '{ch}'")));
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Lexed],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: self.line, col: self.col(), msg: msg.into() })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn atom(&mut self) -> Result<f64, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Ident(id)) if id == "pi" => {
                self.pos += 1;
                Ok(PI)
            }
            _ => self.err("expected a number or 'pi'"),
        }
    }

    fn expr(&mut self) -> Result<f64, ParseError> {
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut v = self.atom()?;
        loop {
            match self.peek() {
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let col = self.col();
                    let d = self.atom()?;
                    if d == 0.0 {
                        return Err(ParseError { line: self.line, col, msg: "division by zero".into() });
                    }
                    v /= d;
                }
                Some(Tok::Star) => {
                    self.pos += 1;
                    v *= self.atom()?;
                }
                _ => break,
            }
        }
        Ok(if neg { -v } else { v })
    }

    fn uint(&mut self, what: &str) -> Result<usize, ParseError> {
        match self.peek() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && *v >= 0.0 && *v < 1e9 => {
                let v = *v as usize;
                self.pos += 1;
                Ok(v)
            }
            _ => self.err(format!("expected {what}")),
        }
    }
}

/// `(min, max)` argument counts and default values for the optional tail.
fn signature(name: &str) -> Option<(usize, usize, &'static [f64])> {
    Some(match name {
        "Vacuum" | "Fourier" | "MeasureX" => (0, 0, &[]),
        "Xgate" | "Zgate" | "Rgate" => (1, 1, &[]),
        "Squeezed" | "Coherent" | "Dgate" | "Sgate" => (1, 2, &[0.0, 0.0]),
        "BSgate" => (0, 2, &[std::f64::consts::FRAC_PI_4, 0.0]),
        "Invert" => (2, 2, &[]),
        "DisplacedSqueezed" => (4, 4, &[]),
        _ => return None,
    })
}

fn build(name: &str, a: &[f64]) -> Vec<GateKind> {
    match name {
        "Vacuum" => vec![GateKind::Vacuum],
        "Fourier" => vec![GateKind::Fourier],
        "MeasureX" => vec![GateKind::MeasureX],
        "Xgate" => vec![GateKind::Xgate(a[0])],
        "Zgate" => vec![GateKind::Zgate(a[0])],
        "Rgate" => vec![GateKind::Rgate(a[0])],
        "Squeezed" => vec![GateKind::Squeezed { r: a[0], phi: a[1] }],
        "Coherent" => vec![GateKind::Coherent { r: a[0], phi: a[1] }],
        "Dgate" => vec![GateKind::Dgate { r: a[0], phi: a[1] }],
        "Sgate" => vec![GateKind::Sgate { r: a[0], phi: a[1] }],
        "BSgate" => vec![GateKind::BSgate { theta: a[0], phi: a[1] }],
        "Invert" => vec![GateKind::Invert { x0: a[0], width: a[1] }],
        "DisplacedSqueezed" => {
            vec![GateKind::Dgate { r: a[0], phi: a[1] }, GateKind::Sgate { r: a[2], phi: a[3] }]
        }
        _ => unreachable!("signature covers every name"),
    }
}

struct Stmt {
    line: usize,
    name_col: usize,
    target_cols: Vec<usize>,
    kinds: Vec<GateKind>,
    targets: Vec<usize>,
}

fn parse_stmt(cur: &mut Cursor, name: String, name_col: usize) -> Result<Stmt, ParseError> {
    let Some((min, max, defaults)) = signature(&name) else {
        return Err(ParseError { line: cur.line, col: name_col, msg: format!("unknown gate '{name}'") });
    };
    let mut args = Vec::new();
    if cur.peek() == Some(&Tok::LParen) {
        cur.pos += 1;
        if cur.peek() != Some(&Tok::RParen) {
            loop {
                args.push(cur.expr()?);
                match cur.peek() {
                    Some(Tok::Comma) => cur.pos += 1,
                    Some(Tok::RParen) => break,
                    _ => return cur.err("expected ',' or ')'"),
                }
            }
        }
        cur.expect(Tok::RParen, "')'")?;
    } else if min > 0 {
        return cur.err(format!("{name} needs arguments"));
    }
    if args.len() < min || args.len() > max {
        let want = if min == max { format!("{min}") } else { format!("{min} to {max}") };
        return Err(ParseError {
            line: cur.line,
            col: name_col,
            msg: format!("{name} takes {want} argument(s), got {}", args.len()),
        });
    }
    let skip = args.len().saturating_sub(max - defaults.len());
    args.extend_from_slice(&defaults[skip.min(defaults.len())..]);

    cur.expect(Tok::Pipe, "'|' before the targets")?;
    let mut targets = Vec::new();
    let mut target_cols = Vec::new();
    loop {
        target_cols.push(cur.col());
        match cur.next() {
            Some(Tok::Ident(q)) if q == "q" => {}
            _ => {
                cur.pos -= 1;
                return cur.err("expected a target like q[0]");
            }
        }
        cur.expect(Tok::LBracket, "'['")?;
        targets.push(cur.uint("a mode index")?);
        cur.expect(Tok::RBracket, "']'")?;
        if cur.peek() == Some(&Tok::Comma) {
            cur.pos += 1;
        } else {
            break;
        }
    }
    if cur.peek().is_some() {
        return cur.err("unexpected trailing input");
    }
    let arity = if name == "BSgate" { 2 } else { 1 };
    if targets.len() != arity {
        return Err(ParseError {
            line: cur.line,
            col: target_cols[0],
            msg: format!("{name} takes {arity} target(s), got {}", targets.len()),
        });
    }
    Ok(Stmt { line: cur.line, name_col, target_cols, kinds: build(&name, &args), targets })
}

/// Parse `.cvq` source. Without a `modes` header the mode count is one more
/// than the largest target index.
pub fn parse(source: &str) -> Result<Circuit, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut stmts = Vec::new();
    for (i, text) in source.lines().enumerate() {
        let lineno = i + 1;
        let toks = lex(text, lineno)?;
        if toks.is_empty() {
            continue;
        }
        let end_col = text.chars().count() + 1;
        let mut cur = Cursor { toks: &toks, pos: 0, line: lineno, end_col };
        let first_col = cur.col();
        let Some(Tok::Ident(name)) = cur.next() else {
            cur.pos = 0;
            return cur.err("expected a gate name or 'modes'");
        };
        if name == "modes" {
            if header.is_some() || !stmts.is_empty() {
                return Err(ParseError { line: lineno, col: first_col, msg: "'modes' must be the first statement".into() });
            }
            let n = cur.uint("a mode count")?;
            if n == 0 {
                cur.pos -= 1;
                return cur.err("mode count must be positive");
            }
            if cur.peek().is_some() {
                return cur.err("unexpected trailing input");
            }
            header = Some((n, lineno));
            continue;
        }
        stmts.push(parse_stmt(&mut cur, name, first_col)?);
    }

    let modes = match header {
        Some((n, _)) => n,
        None => stmts.iter().flat_map(|s| s.targets.iter()).max().map_or(1, |m| m + 1),
    };
    let mut circuit = Circuit::new(modes).expect("positive mode count");
    for s in stmts {
        for (t, col) in s.targets.iter().zip(&s.target_cols) {
            if *t >= modes {
                return Err(ParseError {
                    line: s.line,
                    col: *col,
                    msg: format!("target q[{t}] out of range for {modes} mode(s)"),
                });
            }
        }
        for kind in s.kinds {
            circuit
                .push(kind, &s.targets)
                .map_err(|e| ParseError { line: s.line, col: s.name_col, msg: e.to_string() })?;
        }
    }
    Ok(circuit)
}
