// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::iter::Peekable;
use std::str::Chars;

use num_bigint::BigInt;
use thiserror::Error;

use super::Value;

/// A 1-based source position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// A value together with the position where its text starts.
#[derive(Clone, Debug)]
pub struct Located<T> {
    pub pos: Pos,
    pub value: T,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{line}:{column}: {reason}")]
pub struct ReadError {
    pub line: usize,
    pub column: usize,
    pub reason: String,
}

/// Reads exactly one S-expression; only whitespace and comments may follow.
pub fn read_value(text: &str) -> Result<Value, ReadError> {
    let mut r = Reader::new(text);
    r.skip_blank();
    if r.peek().is_none() {
        return Err(r.error("unexpected end of input"));
    }
    let v = r.value()?;
    r.skip_blank();
    if r.peek().is_some() {
        return Err(r.error("unexpected text after value"));
    }
    Ok(v)
}

/// Reads a sequence of S-expressions, as found in a `.fty` file.
pub fn read_all(text: &str) -> Result<Vec<Located<Value>>, ReadError> {
    let mut r = Reader::new(text);
    let mut out = Vec::new();
    loop {
        r.skip_blank();
        if r.peek().is_none() {
            return Ok(out);
        }
        let pos = r.pos;
        let value = r.value()?;
        out.push(Located { pos, value });
    }
}

fn is_blank(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\r' | '\x0c')
}

pub(crate) fn is_delimiter(c: char) -> bool {
    is_blank(c) || matches!(c, '(' | ')' | '"' | ';')
}

pub(crate) fn is_integer_token(tok: &str) -> bool {
    let digits = tok.strip_prefix('-').unwrap_or(tok);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

enum Token {
    Value(Value),
    Dot,
}

struct Reader<'a> {
    chars: Peekable<Chars<'a>>,
    pos: Pos,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            chars: text.chars().peekable(),
            pos: Pos { line: 1, column: 1 },
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn error(&self, reason: impl Into<String>) -> ReadError {
        self.error_at(self.pos, reason)
    }

    fn error_at(&self, pos: Pos, reason: impl Into<String>) -> ReadError {
        ReadError {
            line: pos.line,
            column: pos.column,
            reason: reason.into(),
        }
    }

    fn skip_blank(&mut self) {
        while let Some(c) = self.peek() {
            if is_blank(c) {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn value(&mut self) -> Result<Value, ReadError> {
        let pos = self.pos;
        match self.token()? {
            Token::Value(v) => Ok(v),
            Token::Dot => Err(self.error_at(pos, "unexpected '.'")),
        }
    }

    fn token(&mut self) -> Result<Token, ReadError> {
        let start = self.pos;
        let c = match self.peek() {
            Some(c) => c,
            None => return Err(self.error("unexpected end of input")),
        };
        match c {
            '(' => {
                self.bump();
                stacker::maybe_grow(32 * 1024, 1024 * 1024, || self.list(start)).map(Token::Value)
            }
            ')' => Err(self.error("unexpected ')'")),
            '"' => self.string().map(Token::Value),
            '#' => self.character().map(Token::Value),
            '|' => self.quoted_symbol().map(Token::Value),
            _ => {
                let mut tok = String::new();
                while let Some(c) = self.peek() {
                    if is_delimiter(c) {
                        break;
                    }
                    tok.push(c);
                    self.bump();
                }
                if tok == "." {
                    Ok(Token::Dot)
                } else if is_integer_token(&tok) {
                    let i: BigInt = tok.parse().expect("integer token");
                    Ok(Token::Value(Value::Int(i)))
                } else {
                    Ok(Token::Value(Value::sym(&tok)))
                }
            }
        }
    }

    fn list(&mut self, open: Pos) -> Result<Value, ReadError> {
        let mut items = Vec::new();
        loop {
            self.skip_blank();
            match self.peek() {
                None => return Err(self.error_at(open, "unclosed '('")),
                Some(')') => {
                    self.bump();
                    return Ok(Value::list(items));
                }
                Some(_) => {
                    let pos = self.pos;
                    match self.token()? {
                        Token::Value(v) => items.push(v),
                        Token::Dot => {
                            if items.is_empty() {
                                return Err(self.error_at(pos, "'.' must follow a list element"));
                            }
                            self.skip_blank();
                            if self.peek().is_none() {
                                return Err(self.error_at(open, "unclosed '('"));
                            }
                            let tail = self.value()?;
                            self.skip_blank();
                            if self.peek() != Some(')') {
                                return Err(self.error("expected ')' after dotted tail"));
                            }
                            self.bump();
                            return Ok(Value::list_with_tail(items, tail));
                        }
                    }
                }
            }
        }
    }

    fn char_code(&self, c: char, pos: Pos) -> Result<u8, ReadError> {
        u8::try_from(u32::from(c)).map_err(|_| self.error_at(pos, format!("character {c:?} is outside codes 0..=255")))
    }

    fn string(&mut self) -> Result<Value, ReadError> {
        let open = self.pos;
        self.bump();
        let mut bytes = Vec::new();
        loop {
            let pos = self.pos;
            match self.bump() {
                None => return Err(self.error_at(open, "unterminated string")),
                Some('"') => return Ok(Value::bytes(&bytes)),
                Some('\\') => match self.bump() {
                    Some(c @ ('"' | '\\')) => bytes.push(c as u8),
                    Some(c) => return Err(self.error_at(pos, format!("unknown escape '\\{c}'"))),
                    None => return Err(self.error_at(open, "unterminated string")),
                },
                Some(c) => bytes.push(self.char_code(c, pos)?),
            }
        }
    }

    fn character(&mut self) -> Result<Value, ReadError> {
        let start = self.pos;
        self.bump();
        if self.peek() != Some('\\') {
            return Err(self.error_at(start, "expected '\\' after '#'"));
        }
        self.bump();
        let pos = self.pos;
        let first = match self.bump() {
            Some(c) => c,
            None => return Err(self.error_at(start, "unterminated character literal")),
        };
        let mut name = String::from(first);
        if first.is_ascii_alphabetic() {
            while let Some(c) = self.peek() {
                if !c.is_ascii_alphabetic() {
                    break;
                }
                name.push(c);
                self.bump();
            }
        }
        if let Some(c) = self.peek() {
            if !is_delimiter(c) {
                return Err(self.error("character literal must end at a delimiter"));
            }
        }
        if name.chars().count() == 1 {
            return Ok(Value::Char(self.char_code(first, pos)?));
        }
        let code = match name.to_ascii_lowercase().as_str() {
            "space" => b' ',
            "newline" => b'\n',
            "nul" => 0,
            _ => return Err(self.error_at(start, format!("unknown character name '{name}'"))),
        };
        Ok(Value::Char(code))
    }

    fn quoted_symbol(&mut self) -> Result<Value, ReadError> {
        let open = self.pos;
        self.bump();
        let mut name = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error_at(open, "unterminated '|' symbol")),
                Some('|') => break,
                Some('\\') => match self.bump() {
                    Some(c) => name.push(c),
                    None => return Err(self.error_at(open, "unterminated '|' symbol")),
                },
                Some(c) => name.push(c),
            }
        }
        if name.is_empty() {
            return Err(self.error_at(open, "empty symbol name"));
        }
        if let Some(c) = self.peek() {
            if !is_delimiter(c) {
                return Err(self.error("symbol must end at a delimiter"));
            }
        }
        Ok(Value::sym(&name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rd(s: &str) -> Value {
        read_value(s).unwrap()
    }

    #[test]
    fn dotted_notation() {
        let v = rd("(1 2 . 3)");
        let expect = Value::cons(Value::int(1), Value::cons(Value::int(2), Value::int(3)));
        assert_eq!(v, expect);
    }

    #[test]
    fn keywords_are_symbols() {
        let v = rd("(:num 5)");
        assert_eq!(v, Value::list([Value::sym(":num"), Value::int(5)]));
        assert!(v.head().is_keyword());
    }

    #[test]
    fn strings_and_escapes() {
        assert_eq!(rd("\"Calista\""), Value::str("Calista"));
        assert_eq!(rd(r#""a\"b\\c""#), Value::str("a\"b\\c"));
        assert!(read_value(r#""\n""#).is_err());
    }

    #[test]
    fn characters() {
        assert_eq!(rd("#\\a"), Value::Char(b'a'));
        assert_eq!(rd("#\\Space"), Value::Char(b' '));
        assert_eq!(rd("#\\Newline"), Value::Char(b'\n'));
        assert_eq!(rd("#\\Nul"), Value::Char(0));
        assert_eq!(rd("(#\\( #\\))"), Value::list([Value::Char(b'('), Value::Char(b')')]));
        assert!(read_value("#\\Bogus").is_err());
    }

    #[test]
    fn integers_are_arbitrary_precision() {
        let v = rd("-123456789012345678901234567890");
        assert_eq!(v.to_string(), "-123456789012345678901234567890");
        assert!(rd("-").is_symbol());
        assert!(rd("+5").is_symbol());
    }

    #[test]
    fn trailing_whitespace_and_comments_allowed() {
        assert_eq!(rd("  5  \n ; note\n"), Value::int(5));
    }

    #[test]
    fn errors_carry_positions() {
        let e = read_value("(1 2").unwrap_err();
        assert_eq!((e.line, e.column), (1, 1));
        let e = read_value("1 2").unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
        let e = read_value("(a\n  . )").unwrap_err();
        assert_eq!(e.line, 2);
        let e = read_value(")").unwrap_err();
        assert!(e.reason.contains("')'"));
        assert!(read_value("").is_err());
        assert!(read_value("( . 1)").is_err());
        assert!(read_value("(1 . 2 3)").is_err());
        assert!(read_value("\"\u{3bb}\"").is_err());
    }

    #[test]
    fn read_all_tracks_form_positions() {
        let forms = read_all("; header\n(a)\n  (b c)").unwrap();
        assert_eq!(forms.len(), 2);
        assert_eq!(forms[1].pos, Pos { line: 3, column: 3 });
    }
}
