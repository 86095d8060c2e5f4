use super::{ErrorKind, ParseError, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// Raw lexeme; converted by the parser so integers keep full precision.
    Number(String),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Newline,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number {s}"),
            Tok::Str(_) => "string".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

/// Splits `src` into tokens. Lexical errors are reported and the offending
/// characters skipped, so one pass can surface several problems.
pub(crate) fn lex(src: &str) -> (Vec<Token>, Vec<ParseError>) {
    let src = src.strip_prefix('\u{feff}').unwrap_or(src);
    let mut cur = Cursor {
        chars: src.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut toks = Vec::new();
    let mut errs = Vec::new();
    loop {
        let (line, column) = (cur.line, cur.col);
        let span = |len: usize| SourceSpan {
            line,
            column,
            length: len,
        };
        let Some(c) = cur.peek() else {
            toks.push(Token {
                tok: Tok::Eof,
                span: span(0),
            });
            break;
        };
        match c {
            ' ' | '\t' | '\r' => {
                cur.bump();
            }
            '\n' => {
                cur.bump();
                toks.push(Token {
                    tok: Tok::Newline,
                    span: span(1),
                });
            }
            '#' => {
                while matches!(cur.peek(), Some(c) if c != '\n') {
                    cur.bump();
                }
            }
            '{' | '}' | '(' | ')' | ',' | ';' => {
                cur.bump();
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    _ => Tok::Semi,
                };
                toks.push(Token { tok, span: span(1) });
            }
            '"' => {
                cur.bump();
                let mut s = String::new();
                let mut n = 1;
                let mut closed = false;
                let mut bad_escape = None;
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                    n += 1;
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => match cur.peek() {
                            Some(e @ ('"' | '\\')) => {
                                cur.bump();
                                n += 1;
                                s.push(e);
                            }
                            other => {
                                bad_escape.get_or_insert((cur.line, cur.col - 1, other));
                            }
                        },
                        c => s.push(c),
                    }
                }
                if let Some((l, col, ch)) = bad_escape {
                    let shown = ch
                        .map(|c| format!("`\\{}`", c.escape_default()))
                        .unwrap_or("`\\`".into());
                    errs.push(ParseError::new(
                        ErrorKind::Lexical,
                        SourceSpan {
                            line: l,
                            column: col,
                            length: 1 + ch.map_or(0, |_| 1),
                        },
                        format!("unsupported escape {shown} in string"),
                        vec!["\\\"".into(), "\\\\".into()],
                    ));
                } else if !closed {
                    errs.push(ParseError::new(
                        ErrorKind::Lexical,
                        span(n),
                        "unterminated string".into(),
                        vec!["\"".into()],
                    ));
                } else {
                    toks.push(Token {
                        tok: Tok::Str(s),
                        span: span(n),
                    });
                }
            }
            c if c.is_ascii_digit() || c == '-' => {
                let mut s = String::new();
                let digits = |cur: &mut Cursor, s: &mut String| {
                    let mut k = 0;
                    while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                        cur.bump();
                        s.push(d);
                        k += 1;
                    }
                    k
                };
                if c == '-' {
                    cur.bump();
                    s.push('-');
                }
                let mut ok = digits(&mut cur, &mut s) > 0;
                if ok && cur.peek() == Some('.') {
                    cur.bump();
                    s.push('.');
                    ok = digits(&mut cur, &mut s) > 0;
                }
                if ok && matches!(cur.peek(), Some('e' | 'E')) {
                    cur.bump();
                    s.push('e');
                    if let Some(sign @ ('+' | '-')) = cur.peek() {
                        cur.bump();
                        s.push(sign);
                    }
                    ok = digits(&mut cur, &mut s) > 0;
                }
                // A number running straight into a letter (`1t`) is malformed.
                while let Some(c) = cur.peek().filter(|c| is_ident_char(*c) || *c == '.') {
                    cur.bump();
                    s.push(c);
                    ok = false;
                }
                let len = s.chars().count();
                if ok {
                    toks.push(Token {
                        tok: Tok::Number(s),
                        span: span(len),
                    });
                } else {
                    errs.push(ParseError::new(
                        ErrorKind::Lexical,
                        span(len),
                        format!("malformed number `{s}`"),
                        vec!["number".into()],
                    ));
                }
            }
            c if is_ident_start(c) => {
                let mut s = String::new();
                while let Some(c) = cur.peek().filter(|c| is_ident_char(*c)) {
                    cur.bump();
                    s.push(c);
                }
                let len = s.chars().count();
                toks.push(Token {
                    tok: Tok::Ident(s),
                    span: span(len),
                });
            }
            other => {
                cur.bump();
                errs.push(ParseError::new(
                    ErrorKind::Lexical,
                    span(1),
                    format!("unexpected character `{}`", other.escape_default()),
                    Vec::new(),
                ));
            }
        }
    }
    (toks, errs)
}
