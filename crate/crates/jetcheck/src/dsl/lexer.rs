//! Tokenizer for `.jet` files: identifiers, exact numeric literals,
//! punctuation, and `#` line comments, each token carrying its byte span.

use num::{BigInt, BigRational, One};

use super::{ParseError, Span};

#[derive(Clone, Debug, PartialEq)]
pub(super) enum Tok {
    Ident(String),
    /// Exact value plus whether it was written without a decimal point.
    Number(BigRational, bool),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Colon,
    Semi,
    Comma,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    NotEq,
    Gt,
    Arrow,
    Eof,
}

impl Tok {
    pub(super) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(_, _) => "number".to_string(),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Colon => "`:`".to_string(),
            Tok::Semi => "`;`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Eq => "`=`".to_string(),
            Tok::Plus => "`+`".to_string(),
            Tok::Minus => "`-`".to_string(),
            Tok::Star => "`*`".to_string(),
            Tok::Slash => "`/`".to_string(),
            Tok::Caret => "`^`".to_string(),
            Tok::NotEq => "`!=`".to_string(),
            Tok::Gt => "`>`".to_string(),
            Tok::Arrow => "`->`".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub(super) struct Spanned {
    pub tok: Tok,
    pub span: Span,
}

pub(super) fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'{' | b'}' | b'(' | b')' | b':' | b';' | b',' | b'=' | b'+' | b'*' | b'/' | b'^'
            | b'>' => {
                let tok = match c {
                    b'{' => Tok::LBrace,
                    b'}' => Tok::RBrace,
                    b'(' => Tok::LParen,
                    b')' => Tok::RParen,
                    b':' => Tok::Colon,
                    b';' => Tok::Semi,
                    b',' => Tok::Comma,
                    b'=' => Tok::Eq,
                    b'+' => Tok::Plus,
                    b'*' => Tok::Star,
                    b'/' => Tok::Slash,
                    b'^' => Tok::Caret,
                    _ => Tok::Gt,
                };
                out.push(Spanned {
                    tok,
                    span: Span { start: i, end: i + 1 },
                });
                i += 1;
            }
            b'-' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'>' {
                    out.push(Spanned {
                        tok: Tok::Arrow,
                        span: Span { start: i, end: i + 2 },
                    });
                    i += 2;
                } else {
                    out.push(Spanned {
                        tok: Tok::Minus,
                        span: Span { start: i, end: i + 1 },
                    });
                    i += 1;
                }
            }
            b'!' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'=' {
                    out.push(Spanned {
                        tok: Tok::NotEq,
                        span: Span { start: i, end: i + 2 },
                    });
                    i += 2;
                } else {
                    return Err(ParseError::at(
                        text,
                        Span { start: i, end: i + 1 },
                        "stray `!` (did you mean `!=`?)".to_string(),
                        vec!["`!=`"],
                    ));
                }
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let mut is_integer = true;
                if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                    is_integer = false;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let span = Span { start, end: i };
                let lit = &text[start..i];
                let value = match lit.split_once('.') {
                    None => BigRational::from_integer(lit.parse::<BigInt>().unwrap()),
                    Some((whole, frac)) => {
                        let mut numer: BigInt = whole.parse().unwrap();
                        let mut denom = BigInt::one();
                        for d in frac.bytes() {
                            numer = numer * 10 + (d - b'0');
                            denom *= 10;
                        }
                        BigRational::new(numer, denom)
                    }
                };
                out.push(Spanned {
                    tok: Tok::Number(value, is_integer),
                    span,
                });
            }
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(text[start..i].to_string()),
                    span: Span { start, end: i },
                });
            }
            _ => {
                let end = text[i..]
                    .char_indices()
                    .nth(1)
                    .map(|(o, _)| i + o)
                    .unwrap_or(text.len());
                return Err(ParseError::at(
                    text,
                    Span { start: i, end },
                    format!("unexpected character `{}`", &text[i..end]),
                    vec![],
                ));
            }
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        span: Span {
            start: text.len(),
            end: text.len(),
        },
    });
    Ok(out)
}
