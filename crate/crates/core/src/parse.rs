//! Recursive-descent parser for rational-function expressions.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | atom ('^' UINT)?
//! atom   := RATIONAL | VAR | '(' expr ')'
//! ```
//!
//! An integer followed by `/` followed by another integer in atom position
//! is one rational literal (`1/2`, and also `1 / 2`); anything else written
//! with `/` is a quotient. The canonical way to force a quotient of two
//! integers is to parenthesize, e.g. `(1)/(2)`. The literal fuses before
//! `^` applies, so `1/2^3` is `(1/2)^3`. Unary minus applies after `^`,
//! so `-x1^2` is `-(x1^2)`.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::expr::Expr;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Int(BigInt),
    Var(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(text: &'a str) -> Result<Vec<(usize, Token)>> {
        let mut lexer = Lexer { input: text.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        loop {
            lexer.skip_ws();
            if lexer.pos >= lexer.input.len() {
                return Ok(out);
            }
            let start = lexer.pos;
            let tok = lexer.next_token()?;
            out.push((start, tok));
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn read_digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.input[start..self.pos]).unwrap()
    }

    fn next_token(&mut self) -> Result<Token> {
        let b = self.input[self.pos];
        match b {
            b'+' => {
                self.pos += 1;
                Ok(Token::Plus)
            }
            b'-' => {
                self.pos += 1;
                Ok(Token::Minus)
            }
            b'*' => {
                self.pos += 1;
                Ok(Token::Star)
            }
            b'/' => {
                self.pos += 1;
                Ok(Token::Slash)
            }
            b'^' => {
                self.pos += 1;
                Ok(Token::Caret)
            }
            b'(' => {
                self.pos += 1;
                Ok(Token::LParen)
            }
            b')' => {
                self.pos += 1;
                Ok(Token::RParen)
            }
            b'0'..=b'9' => {
                let digits = self.read_digits();
                Ok(Token::Int(digits.parse().expect("digit run parses")))
            }
            b'x' => {
                self.pos += 1;
                let digits = self.read_digits();
                if digits.is_empty() {
                    return Err(Error::Parse {
                        pos: self.pos - 1,
                        msg: "expected variable index after 'x'".into(),
                    });
                }
                let idx: usize = digits.parse().map_err(|_| Error::Parse {
                    pos: self.pos,
                    msg: "variable index too large".into(),
                })?;
                if idx == 0 {
                    return Err(Error::Parse {
                        pos: self.pos,
                        msg: "variable indices are 1-based".into(),
                    });
                }
                Ok(Token::Var(idx))
            }
            b'.' => Err(Error::Parse {
                pos: self.pos,
                msg: "decimal literals are not accepted; write an exact rational a/b".into(),
            }),
            other => Err(Error::Parse {
                pos: self.pos,
                msg: format!("unexpected character '{}'", other as char),
            }),
        }
    }
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    cursor: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.cursor).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&Token> {
        self.tokens.get(self.cursor + 1).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.cursor).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.cursor).map(|(_, t)| t.clone());
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn expect(&mut self, want: &Token, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if t == want => {
                self.cursor += 1;
                Ok(())
            }
            _ => Err(Error::Parse { pos: self.pos(), msg: format!("expected {what}") }),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.cursor += 1;
                    acc = acc.add(self.term()?);
                }
                Some(Token::Minus) => {
                    self.cursor += 1;
                    acc = acc.sub(self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.cursor += 1;
                    acc = acc.mul(self.factor()?);
                }
                Some(Token::Slash) => {
                    self.cursor += 1;
                    acc = acc.div(self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if let Some(Token::Minus) = self.peek() {
            self.cursor += 1;
            return Ok(self.factor()?.neg());
        }
        let base = self.atom()?;
        if let Some(Token::Caret) = self.peek() {
            self.cursor += 1;
            let pos = self.pos();
            match self.bump() {
                Some(Token::Int(e)) => {
                    let e: u32 = e.try_into().map_err(|_| Error::Parse {
                        pos,
                        msg: "exponent too large".into(),
                    })?;
                    return Ok(base.pow(e));
                }
                _ => {
                    return Err(Error::Parse {
                        pos,
                        msg: "expected a non-negative integer exponent after '^'".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Some(Token::Int(num)) => {
                // integer '/' integer in atom position is one rational literal
                if let (Some(Token::Slash), Some(Token::Int(_))) = (self.peek(), self.peek2()) {
                    self.cursor += 1;
                    let den_pos = self.pos();
                    let Some(Token::Int(den)) = self.bump() else { unreachable!() };
                    if den == BigInt::from(0) {
                        return Err(Error::Parse {
                            pos: den_pos,
                            msg: "zero denominator in rational literal".into(),
                        });
                    }
                    return Ok(Expr::rat(BigRational::new(num, den)));
                }
                Ok(Expr::rat(BigRational::from_integer(num)))
            }
            Some(Token::Var(i)) => Ok(Expr::var(i)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(&Token::RParen, "closing ')'")?;
                Ok(inner)
            }
            Some(other) => {
                Err(Error::Parse { pos, msg: format!("unexpected token {other:?}") })
            }
            None => Err(Error::Parse { pos, msg: "unexpected end of input".into() }),
        }
    }
}

/// Parses a complete expression; trailing input is an error.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let tokens = Lexer::tokenize(text)?;
    let mut parser = Parser { tokens, cursor: 0, end: text.len() };
    let e = parser.expr()?;
    if parser.cursor != parser.tokens.len() {
        return Err(Error::Parse {
            pos: parser.pos(),
            msg: "trailing input after expression".into(),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetSpace;
    use crate::Rat;

    fn r(num: i64, den: i64) -> Rat {
        Rat::new(num.into(), den.into())
    }

    #[test]
    fn product_tree() {
        let e = parse_expr("x1*(x1-1)").unwrap();
        assert_eq!(e, Expr::var(1).mul(Expr::var(1).sub(Expr::int(1))));
    }

    #[test]
    fn rational_literal() {
        assert_eq!(parse_expr("1/2").unwrap(), Expr::rat(r(1, 2)));
        assert_eq!(parse_expr("1 / 2").unwrap(), Expr::rat(r(1, 2)));
        assert_eq!(parse_expr("-1/2").unwrap(), Expr::rat(r(1, 2)).neg());
        // parenthesizing forces a quotient node
        assert_eq!(
            parse_expr("(1)/(2)").unwrap(),
            Expr::int(1).div(Expr::int(2))
        );
        // literal fusion happens before '^'
        assert_eq!(parse_expr("1/2^3").unwrap(), Expr::rat(r(1, 2)).pow(3));
        // a variable denominator is ordinary division
        assert_eq!(parse_expr("1/x1").unwrap(), Expr::int(1).div(Expr::var(1)));
        assert_eq!(parse_expr("x1/2").unwrap(), Expr::var(1).div(Expr::int(2)));
    }

    #[test]
    fn negation_of_cube() {
        let e = parse_expr("-(x2+1)^3").unwrap();
        assert_eq!(e, Expr::var(2).add(Expr::int(1)).pow(3).neg());
    }

    #[test]
    fn caret_binds_tighter_than_unary_minus() {
        assert_eq!(parse_expr("-x1^2").unwrap(), Expr::var(1).pow(2).neg());
    }

    #[test]
    fn precedence_and_associativity() {
        // 1 - 2 - 3 = (1-2)-3; 2 + 3*4 = 2 + (3*4)
        let e = parse_expr("1 - 2 - 3").unwrap();
        assert_eq!(e, Expr::int(1).sub(Expr::int(2)).sub(Expr::int(3)));
        let e = parse_expr("2 + 3*x1").unwrap();
        assert_eq!(e, Expr::int(2).add(Expr::int(3).mul(Expr::var(1))));
    }

    #[test]
    fn parse_print_parse_roundtrip() {
        let cases = [
            "x1*(x1-1)",
            "-(x2+1)^3",
            "1/2",
            "(1)/(2)",
            "x1*(x1-1)/(x2*(x2-1))",
            "-1/2 + x1^4*x2 - (x1 - x2)/(x1 + 7/3)",
            "1/2^3",
            "-x1^2",
        ];
        let sp: JetSpace<Rat> = JetSpace::new(2, 4, vec![r(1, 3), r(1, 5)]);
        for case in cases {
            let e1 = parse_expr(case).unwrap();
            let printed = e1.to_string();
            let e2 = parse_expr(&printed).unwrap();
            assert_eq!(e2.to_string(), printed, "unstable print for `{case}`");
            // printed form evaluates identically
            let j1 = e1.compile(&sp).unwrap();
            let j2 = e2.compile(&sp).unwrap();
            assert!(j1.eq_to_common_order(&j2), "value changed for `{case}`");
        }
    }

    #[test]
    fn errors_carry_positions() {
        match parse_expr("x1 + ") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_expr("x1 $ 2") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_expr("0.5").is_err());
        assert!(parse_expr("x0").is_err());
        assert!(parse_expr("1/0").is_err());
        assert!(parse_expr("(x1").is_err());
        assert!(parse_expr("x1 x2").is_err());
        assert!(parse_expr("").is_err());
    }
}
