//! Recursive-descent parser for the region grammar.
//!
//! Deliberately tiny: primitive calls with numeric literals, `&&`, `||`,
//! `!`, and parentheses. Errors carry the byte offset of the offending
//! token.

use crate::error::{Error, Result};
use crate::region::Region2D;

pub fn parse(text: &str) -> Result<Region2D> {
    let mut parser = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let region = parser.expr()?;
    parser.skip_ws();
    if parser.pos != parser.bytes.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(region)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> Error {
        Error::RegionParse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.bytes.get(self.pos), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, token: &[u8]) -> bool {
        self.skip_ws();
        if self.bytes[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: u8) -> Result<()> {
        if self.eat(&[token]) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", token as char)))
        }
    }

    fn expr(&mut self) -> Result<Region2D> {
        let mut left = self.and_expr()?;
        while self.eat(b"||") {
            let right = self.and_expr()?;
            left = left.or(right);
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Region2D> {
        let mut left = self.unary()?;
        while self.eat(b"&&") {
            let right = self.unary()?;
            left = left.and(right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Region2D> {
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(self.unary()?.not())
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(b) if b.is_ascii_alphabetic() => self.call(),
            Some(b) => Err(self.error(format!("unexpected character '{}'", b as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn call(&mut self) -> Result<Region2D> {
        self.skip_ws();
        let name_start = self.pos;
        while matches!(
            self.bytes.get(self.pos),
            Some(b) if b.is_ascii_alphanumeric() || *b == b'_'
        ) {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.bytes[name_start..self.pos]).expect("ascii ident");
        let name_pos = name_start;
        self.expect(b'(')?;
        let mut args = vec![self.number()?];
        while self.eat(b",") {
            args.push(self.number()?);
        }
        self.expect(b')')?;

        let arity_err = |expected: usize| Error::RegionParse {
            pos: name_pos,
            msg: format!("{name} takes {expected} arguments, got {}", args.len()),
        };
        let made = match name {
            "disk" => {
                if args.len() != 3 {
                    return Err(arity_err(3));
                }
                Region2D::disk(args[0], args[1], args[2])
            }
            "closed_disk" => {
                if args.len() != 3 {
                    return Err(arity_err(3));
                }
                Region2D::closed_disk(args[0], args[1], args[2])
            }
            "halfplane" => {
                if args.len() != 3 {
                    return Err(arity_err(3));
                }
                Region2D::halfplane(args[0], args[1], args[2])
            }
            "cheby_band" => {
                if args.len() != 3 {
                    return Err(arity_err(3));
                }
                Region2D::cheby_band(args[0], args[1], args[2])
            }
            "rect" => {
                if args.len() != 4 {
                    return Err(arity_err(4));
                }
                Region2D::rect(args[0], args[1], args[2], args[3])
            }
            other => {
                return Err(Error::RegionParse {
                    pos: name_pos,
                    msg: format!("unknown primitive {other:?}"),
                })
            }
        };
        // Re-tag invariant violations with the call position.
        made.map_err(|e| match e {
            Error::Invalid { why, .. } => Error::RegionParse {
                pos: name_pos,
                msg: why,
            },
            other => other,
        })
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.bytes.get(self.pos), Some(b'+') | Some(b'-')) {
            self.pos += 1;
        }
        let mut saw_digit = false;
        while matches!(self.bytes.get(self.pos), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
            saw_digit = true;
        }
        if matches!(self.bytes.get(self.pos), Some(b'.')) {
            self.pos += 1;
            while matches!(self.bytes.get(self.pos), Some(b) if b.is_ascii_digit()) {
                self.pos += 1;
                saw_digit = true;
            }
        }
        if !saw_digit {
            self.pos = start;
            return Err(self.error("expected a number"));
        }
        if matches!(self.bytes.get(self.pos), Some(b'e') | Some(b'E')) {
            let exp_start = self.pos;
            self.pos += 1;
            if matches!(self.bytes.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            let mut exp_digit = false;
            while matches!(self.bytes.get(self.pos), Some(b) if b.is_ascii_digit()) {
                self.pos += 1;
                exp_digit = true;
            }
            if !exp_digit {
                self.pos = exp_start; // bare 'e' is not an exponent
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii number");
        text.parse::<f64>().map_err(|_| Error::RegionParse {
            pos: start,
            msg: format!("bad numeric literal {text:?}"),
        })
    }
}
