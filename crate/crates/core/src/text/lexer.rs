use crate::model::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Arrow,
    DotDot,
    Dot,
    Colon,
    Comma,
    Semi,
    Assign,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Newline,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Arrow => "->",
            Tok::DotDot => "..",
            Tok::Dot => ".",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Assign => "=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            _ => "",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

#[derive(Debug)]
pub(crate) struct LexError {
    pub span: SourceSpan,
    pub message: String,
}

/// Splits `text` into tokens. Line breaks are significant and produce
/// [`Tok::Newline`]; `#` starts a comment running to end of line.
pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = text.chars().peekable();

    while let Some(&c) = chars.peek() {
        let start = SourceSpan::new(line, col, 1);
        if c == '\n' {
            chars.next();
            out.push(Token { tok: Tok::Newline, span: start });
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                col += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            let len = s.len() as u32;
            out.push(Token { tok: Tok::Ident(s), span: SourceSpan::new(line, col, len) });
            col += len;
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            let len = s.len() as u32;
            let span = SourceSpan::new(line, col, len);
            let n = s.parse::<i64>().map_err(|_| LexError {
                span,
                message: format!("integer literal `{s}` is out of range"),
            })?;
            out.push(Token { tok: Tok::Int(n), span });
            col += len;
            continue;
        }
        chars.next();
        let next = chars.peek().copied();
        let (tok, len) = match (c, next) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('.', Some('.')) => (Tok::DotDot, 2),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('&', Some('&')) => (Tok::AndAnd, 2),
            ('|', Some('|')) => (Tok::OrOr, 2),
            ('.', _) => (Tok::Dot, 1),
            (':', _) => (Tok::Colon, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            ('=', _) => (Tok::Assign, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('!', _) => (Tok::Bang, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            _ => {
                return Err(LexError { span: start, message: format!("unexpected character `{c}`") })
            }
        };
        if len == 2 {
            chars.next();
        }
        out.push(Token { tok, span: SourceSpan::new(line, col, len) });
        col += len;
    }
    out.push(Token { tok: Tok::Eof, span: SourceSpan::new(line, col, 0) });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_and_comments() {
        assert_eq!(
            toks("a->b <= 3 # trailing\n!x"),
            vec![
                Tok::Ident("a".into()),
                Tok::Arrow,
                Tok::Ident("b".into()),
                Tok::Le,
                Tok::Int(3),
                Tok::Newline,
                Tok::Bang,
                Tok::Ident("x".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn duration_splits_into_number_and_unit() {
        assert_eq!(toks("5s"), vec![Tok::Int(5), Tok::Ident("s".into()), Tok::Eof]);
    }

    #[test]
    fn spans_track_columns() {
        let t = tokenize("  foo  12").unwrap();
        assert_eq!(t[0].span, SourceSpan::new(1, 3, 3));
        assert_eq!(t[1].span, SourceSpan::new(1, 8, 2));
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("a $").unwrap_err();
        assert_eq!(err.span.column, 3);
    }
}
