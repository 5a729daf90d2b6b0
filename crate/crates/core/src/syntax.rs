//! Expression syntax for field elements and Laurent polynomials.
//!
//! ```text
//! expr     := ['+' | '-'] term (('+' | '-') term)*
//! term     := factor ('*' factor)*
//! factor   := primary ['^' exponent]
//! primary  := rational | ident | '(' expr ')'
//! rational := int ['/' int]
//! exponent := ['-'] rational | '(' ['-'] rational ')'
//! ```
//!
//! Identifiers are `t` (the uniformizer, rational exponents allowed), `z`
//! (a primitive N-th root of unity, integer exponents) and `X1..Xr`
//! (Laurent variables, integer exponents). Compound bases only take
//! non-negative integer exponents.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{CycElement, FieldElement};
use crate::tropical::LaurentPoly;

type Q = BigRational;

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Int(BigInt),
    Ident(String),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, ch) = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().map(|&(_, c)| c).collect();
            out.push((pos, Token::Int(digits.parse().unwrap())));
        } else if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            let name: String = chars[start..i].iter().map(|&(_, c)| c).collect();
            out.push((pos, Token::Ident(name)));
        } else if "+-*/^()".contains(ch) {
            out.push((pos, Token::Sym(ch)));
            i += 1;
        } else {
            return Err(Error::Parse {
                offset: pos,
                message: format!("unexpected character `{ch}`"),
            });
        }
    }
    Ok(out)
}

/// Parsed expression tree. Identifier nodes keep their source offset.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Q),
    Ident(String, usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Q, usize),
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|&(o, _)| o).unwrap_or(self.len)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Token::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = if self.eat('-') {
            Expr::Neg(Box::new(self.term()?))
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while self.eat('*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat('^') {
            let at = self.offset();
            let e = self.exponent()?;
            Ok(Expr::Pow(Box::new(base), e, at))
        } else {
            Ok(base)
        }
    }

    fn rational(&mut self) -> Result<Q> {
        let Some(Token::Int(n)) = self.peek().cloned() else {
            return self.err("expected a number");
        };
        self.pos += 1;
        if self.eat('/') {
            let Some(Token::Int(d)) = self.peek().cloned() else {
                return self.err("expected a denominator");
            };
            if d.is_zero() {
                return self.err("zero denominator");
            }
            self.pos += 1;
            Ok(Q::new(n, d))
        } else {
            Ok(Q::from_integer(n))
        }
    }

    fn signed_rational(&mut self) -> Result<Q> {
        if self.eat('-') {
            Ok(-self.rational()?)
        } else {
            self.rational()
        }
    }

    fn exponent(&mut self) -> Result<Q> {
        if self.eat('(') {
            let e = self.signed_rational()?;
            if !self.eat(')') {
                return self.err("expected `)`");
            }
            Ok(e)
        } else {
            self.signed_rational()
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Token::Int(_)) => self.rational().map(Expr::Num),
            Some(Token::Ident(name)) => {
                let at = self.offset();
                self.pos += 1;
                Ok(Expr::Ident(name, at))
            }
            Some(Token::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser {
        tokens: tokenize(text)?,
        pos: 0,
        len: text.len(),
    };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

fn integer_exponent(e: &Q, at: usize) -> Result<i64> {
    if !e.is_integer() {
        return Err(Error::Parse {
            offset: at,
            message: "exponent must be an integer".into(),
        });
    }
    e.to_integer().to_i64().ok_or(Error::Parse {
        offset: at,
        message: "exponent out of range".into(),
    })
}

fn variable_index(name: &str) -> Option<usize> {
    name.strip_prefix('X').and_then(|rest| rest.parse::<usize>().ok())
}

type Lp = LaurentPoly<Q>;

fn eval_laurent(e: &Expr, rank: usize, order: u64) -> Result<Lp> {
    let konst = |c: FieldElement<Q>| Lp::constant(rank, c);
    Ok(match e {
        Expr::Num(q) => konst(FieldElement::monomial(CycElement::from_scalar(order, q.clone()), Q::zero())),
        Expr::Ident(name, _) => atom(name, e, rank, order, &Q::one())?,
        Expr::Neg(a) => eval_laurent(a, rank, order)?.negated(),
        Expr::Add(a, b) => eval_laurent(a, rank, order)?.checked_add(&eval_laurent(b, rank, order)?)?,
        Expr::Sub(a, b) => eval_laurent(a, rank, order)?.checked_add(&eval_laurent(b, rank, order)?.negated())?,
        Expr::Mul(a, b) => eval_laurent(a, rank, order)?.checked_mul(&eval_laurent(b, rank, order)?)?,
        Expr::Pow(base, exp, at) => match base.as_ref() {
            Expr::Ident(name, _) => {
                atom(name, base, rank, order, exp).map_err(|err| match err {
                    Error::Parse { message, .. } => Error::Parse { offset: *at, message },
                    other => other,
                })?
            }
            _ => {
                let k = integer_exponent(exp, *at)?;
                if k < 0 {
                    return Err(Error::Parse {
                        offset: *at,
                        message: "negative powers only apply to t, z and variables".into(),
                    });
                }
                eval_laurent(base, rank, order)?.pow(k as u64)
            }
        },
    })
}

fn atom(name: &str, node: &Expr, rank: usize, order: u64, exp: &Q) -> Result<Lp> {
    let at = match node {
        Expr::Ident(_, at) => *at,
        _ => 0,
    };
    match name {
        "t" => Ok(Lp::constant(rank, FieldElement::monomial(CycElement::one(order), exp.clone()))),
        "z" => {
            let k = integer_exponent(exp, at)?;
            Ok(Lp::constant(rank, FieldElement::unit_monomial(order, k, Q::zero())))
        }
        _ => match variable_index(name) {
            Some(i) if i >= 1 && i <= rank => {
                let k = integer_exponent(exp, at)?;
                let mut v = vec![0; rank];
                v[i - 1] = k;
                Ok(Lp::monomial(v, FieldElement::one(order)))
            }
            Some(i) => Err(Error::VariableOutOfRange { index: i, rank }),
            None => Err(Error::UndefinedSymbol(name.to_string())),
        },
    }
}

/// Parses a Laurent polynomial in `X1..X{rank}` with coefficients in
/// Q(zeta_order)((t^Q)), e.g. `(1)*X1^2*X2^-1 + (-1 + t)*X2`.
pub fn parse_laurent(text: &str, rank: usize, order: u64) -> Result<Lp> {
    eval_laurent(&parse_expr(text)?, rank, order)
}

/// Parses an element of K, e.g. `(3/2 + 1*z^2) * t^(1/3)`.
pub fn parse_field_element(text: &str, order: u64) -> Result<FieldElement<Q>> {
    let p = parse_laurent(text, 0, order)?;
    let element = p.terms().next().map(|(_, c)| c.clone());
    Ok(element.unwrap_or_else(|| FieldElement::zero(order)))
}

/// Evaluates an expression in the identifiers `x`, `y` to a dense bivariate
/// polynomial over F_p: `result[(i, j)]` is the coefficient of `x^i y^j`.
pub fn eval_bivariate_mod_p(e: &Expr, p: u64) -> Result<std::collections::BTreeMap<(u32, u32), u64>> {
    use std::collections::BTreeMap;
    type Poly = BTreeMap<(u32, u32), u64>;
    let reduce = |q: &Q, at: usize| -> Result<u64> {
        let pb = BigInt::from(p);
        let num = ((q.numer() % &pb) + &pb) % &pb;
        let den = ((q.denom() % &pb) + &pb) % &pb;
        if den.is_zero() {
            return Err(Error::Parse {
                offset: at,
                message: format!("denominator divisible by p = {p}"),
            });
        }
        let den_inv = den.modpow(&BigInt::from(p - 2), &pb);
        Ok(((num * den_inv) % pb).to_u64().unwrap())
    };
    fn clean(mut a: Poly) -> Poly {
        a.retain(|_, c| *c != 0);
        a
    }
    fn add(a: &Poly, b: &Poly, p: u64) -> Poly {
        let mut out = a.clone();
        for (k, c) in b {
            let e = out.entry(*k).or_insert(0);
            *e = (*e + c) % p;
        }
        clean(out)
    }
    fn neg(a: &Poly, p: u64) -> Poly {
        a.iter().map(|(k, c)| (*k, (p - c) % p)).collect()
    }
    fn mul(a: &Poly, b: &Poly, p: u64) -> Poly {
        let mut out = Poly::new();
        for ((i1, j1), c1) in a {
            for ((i2, j2), c2) in b {
                let e = out.entry((i1 + i2, j1 + j2)).or_insert(0);
                *e = (*e + c1 * c2 % p) % p;
            }
        }
        clean(out)
    }
    fn go(e: &Expr, p: u64, reduce: &dyn Fn(&Q, usize) -> Result<u64>) -> Result<Poly> {
        Ok(match e {
            Expr::Num(q) => clean([((0, 0), reduce(q, 0)?)].into_iter().collect()),
            Expr::Ident(name, _) => match name.as_str() {
                "x" => [((1, 0), 1)].into_iter().collect(),
                "y" => [((0, 1), 1)].into_iter().collect(),
                other => return Err(Error::UndefinedSymbol(other.to_string())),
            },
            Expr::Neg(a) => neg(&go(a, p, reduce)?, p),
            Expr::Add(a, b) => add(&go(a, p, reduce)?, &go(b, p, reduce)?, p),
            Expr::Sub(a, b) => add(&go(a, p, reduce)?, &neg(&go(b, p, reduce)?, p), p),
            Expr::Mul(a, b) => mul(&go(a, p, reduce)?, &go(b, p, reduce)?, p),
            Expr::Pow(base, exp, at) => {
                let k = integer_exponent(exp, *at)?;
                if k < 0 {
                    return Err(Error::Parse {
                        offset: *at,
                        message: "negative exponent in a polynomial".into(),
                    });
                }
                let b = go(base, p, reduce)?;
                let mut acc: Poly = [((0, 0), 1)].into_iter().collect();
                for _ in 0..k {
                    acc = mul(&acc, &b, p);
                }
                acc
            }
        })
    }
    go(e, p, &reduce)
}
