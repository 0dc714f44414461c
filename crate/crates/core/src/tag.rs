//! Symbolic matrix entries such as `q/αβ`, `-βt/2γδs` or `2q/-α`.
//!
//! A tag is `numerator` or `numerator/denominator`, each side a signed
//! monomial: an optional `-`, then factors drawn from integers, `√n`,
//! `√(n/m)` and the parameter symbols `q α β γ δ u v w p s y z t`, each symbol
//! optionally squared with `²`. Signs are kept exactly as written so that
//! `2q/-α` evaluates to `-2q/α`.

use std::fmt;

use thiserror::Error;

use crate::povm::PovmParams;

#[derive(Error, Debug, Clone, PartialEq)]
#[error("cannot parse entry tag {tag:?}: {reason}")]
pub struct TagError {
    pub tag: String,
    pub reason: &'static str,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symbol {
    Q,
    Alpha,
    Beta,
    Gamma,
    Delta,
    U,
    V,
    W,
    P,
    S,
    Y,
    Z,
    T,
}

impl Symbol {
    fn from_char(c: char) -> Option<Symbol> {
        Some(match c {
            'q' => Symbol::Q,
            'α' => Symbol::Alpha,
            'β' => Symbol::Beta,
            'γ' => Symbol::Gamma,
            'δ' => Symbol::Delta,
            'u' => Symbol::U,
            'v' => Symbol::V,
            'w' => Symbol::W,
            'p' => Symbol::P,
            's' => Symbol::S,
            'y' => Symbol::Y,
            'z' => Symbol::Z,
            't' => Symbol::T,
            _ => return None,
        })
    }

    fn value(self, params: &PovmParams) -> f64 {
        match self {
            Symbol::Q => params.q(),
            Symbol::Alpha => params.alpha(),
            Symbol::Beta => params.beta(),
            Symbol::Gamma => params.gamma(),
            Symbol::Delta => params.delta(),
            Symbol::U => params.u(),
            Symbol::V => params.v(),
            Symbol::W => params.w(),
            Symbol::P => params.p(),
            Symbol::S => params.s(),
            Symbol::Y => params.y(),
            Symbol::Z => params.z(),
            Symbol::T => params.t(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Factor {
    Const(f64),
    Sym { sym: Symbol, squared: bool },
}

#[derive(Clone, Debug, PartialEq)]
struct Monomial {
    negative: bool,
    factors: Vec<Factor>,
}

impl Monomial {
    fn eval(&self, params: &PovmParams) -> f64 {
        let magnitude: f64 = self
            .factors
            .iter()
            .map(|f| match f {
                Factor::Const(c) => *c,
                Factor::Sym { sym, squared } => {
                    let x = sym.value(params);
                    if *squared {
                        x * x
                    } else {
                        x
                    }
                }
            })
            .product();
        if self.negative {
            -magnitude
        } else {
            magnitude
        }
    }

    fn is_zero(&self) -> bool {
        self.factors.iter().any(|f| matches!(f, Factor::Const(c) if *c == 0.0))
    }
}

/// A parsed entry tag; `Display` gives back the source text.
#[derive(Clone, Debug, PartialEq)]
pub struct EntryTag {
    text: String,
    numerator: Monomial,
    denominator: Option<Monomial>,
}

impl EntryTag {
    pub fn parse(text: &str) -> Result<EntryTag, TagError> {
        let err = |reason| TagError {
            tag: text.to_string(),
            reason,
        };
        let mut parts = split_top_level_slash(text);
        let (num, den) = match parts.len() {
            1 => (parts.remove(0), None),
            2 => {
                let den = parts.remove(1);
                (parts.remove(0), Some(den))
            }
            _ => return Err(err("more than one top-level '/'")),
        };
        let numerator = parse_monomial(num).map_err(err)?;
        let denominator = den.map(parse_monomial).transpose().map_err(err)?;
        if denominator.as_ref().is_some_and(Monomial::is_zero) {
            return Err(err("zero denominator"));
        }
        Ok(EntryTag {
            text: text.to_string(),
            numerator,
            denominator,
        })
    }

    pub fn eval(&self, params: &PovmParams) -> f64 {
        let n = self.numerator.eval(params);
        match &self.denominator {
            Some(d) => n / d.eval(params),
            None => n,
        }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// True for the literal `0`.
    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }
}

impl fmt::Display for EntryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Splits on `/` outside parentheses, so `√(2/3)` stays whole.
fn split_top_level_slash(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            '/' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

fn parse_int(chars: &[char], pos: &mut usize) -> Option<f64> {
    let start = *pos;
    while *pos < chars.len() && chars[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if *pos == start {
        return None;
    }
    chars[start..*pos].iter().collect::<String>().parse().ok()
}

fn parse_monomial(text: &str) -> Result<Monomial, &'static str> {
    let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    if chars.is_empty() {
        return Err("empty monomial");
    }
    let mut pos = 0;
    let mut negative = false;
    if chars[0] == '-' || chars[0] == '−' {
        negative = true;
        pos = 1;
    }
    let mut factors = Vec::new();
    while pos < chars.len() {
        let c = chars[pos];
        if c.is_ascii_digit() {
            factors.push(Factor::Const(parse_int(&chars, &mut pos).ok_or("bad integer")?));
        } else if c == '√' {
            pos += 1;
            if chars.get(pos) == Some(&'(') {
                pos += 1;
                let n = parse_int(&chars, &mut pos).ok_or("bad radicand")?;
                if chars.get(pos) != Some(&'/') {
                    return Err("expected '/' inside √(n/m)");
                }
                pos += 1;
                let m = parse_int(&chars, &mut pos).ok_or("bad radicand")?;
                if chars.get(pos) != Some(&')') {
                    return Err("unclosed √(");
                }
                pos += 1;
                factors.push(Factor::Const((n / m).sqrt()));
            } else {
                let n = parse_int(&chars, &mut pos).ok_or("bad radicand")?;
                factors.push(Factor::Const(n.sqrt()));
            }
        } else if let Some(sym) = Symbol::from_char(c) {
            pos += 1;
            let squared = chars.get(pos) == Some(&'²');
            if squared {
                pos += 1;
            }
            factors.push(Factor::Sym { sym, squared });
        } else {
            return Err("unexpected character");
        }
    }
    if factors.is_empty() {
        return Err("sign without factors");
    }
    Ok(Monomial { negative, factors })
}
