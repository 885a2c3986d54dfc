//! Tokenizer for the supported C subset.
//!
//! Comments and whitespace are dropped. Preprocessor directive lines
//! (`#` as the first non-blank character of a line) are skipped without
//! expansion, so sources that still carry `#include` lines can be fed in.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenCategory {
    Keyword,
    Identifier,
    Constant,
    StringLiteral,
    Operator,
    Punctuator,
}

/// Line and column, both 1-based. Columns count characters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Position {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceToken {
    pub category: TokenCategory,
    pub text: String,
    pub pos: Position,
}

impl SourceToken {
    pub fn is(&self, category: TokenCategory, text: &str) -> bool {
        self.category == category && self.text == text
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexError {
    #[error("{pos}: unterminated block comment")]
    UnterminatedComment { pos: Position },
    #[error("{pos}: unterminated string literal")]
    UnterminatedString { pos: Position },
    #[error("{pos}: unterminated character constant")]
    UnterminatedChar { pos: Position },
    #[error("{pos}: character {ch:?} is outside the supported character set")]
    InvalidCharacter { pos: Position, ch: char },
    #[error("{pos}: malformed numeric constant `{text}`")]
    MalformedNumber { pos: Position, text: String },
}

/// All C99 keywords. Keywords outside the parsed subset still lex as
/// keywords so the parser can name them in its error.
pub const KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else",
    "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
    "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef",
    "union", "unsigned", "void", "volatile", "while", "_Bool", "_Complex", "_Imaginary",
];

// Longest first so maximal munch is a linear scan.
const OPERATORS: &[&str] = &[
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=",
    "-=", "*=", "/=", "%=", "&=", "^=", "|=", "+", "-", "*", "/", "%", "<", ">", "=", "!", "~",
    "&", "|", "^", "?", ":", ".",
];

const PUNCTUATORS: &[char] = &['(', ')', '{', '}', '[', ']', ';', ','];

struct Cursor {
    chars: Vec<char>,
    index: usize,
    line: usize,
    col: usize,
}

impl Cursor {
    fn new(source: &str) -> Self {
        Self {
            chars: source.chars().collect(),
            index: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.index).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.index + offset).copied()
    }

    fn pos(&self) -> Position {
        Position {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.index += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars()
            .enumerate()
            .all(|(i, c)| self.peek_at(i) == Some(c))
    }

    /// True when only blanks precede the cursor on the current line.
    fn at_line_start(&self) -> bool {
        self.chars[..self.index]
            .iter()
            .rev()
            .take_while(|&&c| c != '\n')
            .all(|&c| c == ' ' || c == '\t' || c == '\r')
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn lex(source: &str) -> Result<Vec<SourceToken>, LexError> {
    let mut cur = Cursor::new(source);
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        let pos = cur.pos();
        if matches!(c, ' ' | '\t' | '\n' | '\r' | '\x0b' | '\x0c') {
            cur.bump();
            continue;
        }
        if cur.starts_with("//") {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if cur.starts_with("/*") {
            cur.bump();
            cur.bump();
            loop {
                if cur.starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    break;
                }
                if cur.bump().is_none() {
                    return Err(LexError::UnterminatedComment { pos });
                }
            }
            continue;
        }
        if c == '#' && cur.at_line_start() {
            // Directive, honoring backslash line splices.
            while let Some(c) = cur.peek() {
                if c == '\\' && cur.peek_at(1) == Some('\n') {
                    cur.bump();
                    cur.bump();
                    continue;
                }
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if is_ident_start(c) {
            let mut text = String::new();
            while let Some(c) = cur.peek().filter(|&c| is_ident_char(c)) {
                text.push(c);
                cur.bump();
            }
            let category = if KEYWORDS.contains(&text.as_str()) {
                TokenCategory::Keyword
            } else {
                TokenCategory::Identifier
            };
            tokens.push(SourceToken {
                category,
                text,
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
            tokens.push(lex_number(&mut cur, pos)?);
            continue;
        }
        if c == '"' {
            let text = lex_quoted(&mut cur, '"').ok_or(LexError::UnterminatedString { pos })?;
            tokens.push(SourceToken {
                category: TokenCategory::StringLiteral,
                text,
                pos,
            });
            continue;
        }
        if c == '\'' {
            let text = lex_quoted(&mut cur, '\'').ok_or(LexError::UnterminatedChar { pos })?;
            tokens.push(SourceToken {
                category: TokenCategory::Constant,
                text,
                pos,
            });
            continue;
        }
        if PUNCTUATORS.contains(&c) {
            cur.bump();
            tokens.push(SourceToken {
                category: TokenCategory::Punctuator,
                text: c.to_string(),
                pos,
            });
            continue;
        }
        if let Some(op) = OPERATORS.iter().find(|op| cur.starts_with(op)) {
            for _ in 0..op.len() {
                cur.bump();
            }
            tokens.push(SourceToken {
                category: TokenCategory::Operator,
                text: op.to_string(),
                pos,
            });
            continue;
        }
        return Err(LexError::InvalidCharacter { pos, ch: c });
    }
    Ok(tokens)
}

/// Consumes a quoted literal including its delimiters. Escapes are kept
/// verbatim. Returns `None` on end of line or input before the closing quote.
fn lex_quoted(cur: &mut Cursor, quote: char) -> Option<String> {
    let mut text = String::new();
    text.push(cur.bump()?);
    loop {
        let c = cur.peek()?;
        if c == '\n' {
            return None;
        }
        cur.bump();
        text.push(c);
        if c == '\\' {
            let escaped = cur.peek()?;
            if escaped == '\n' {
                return None;
            }
            cur.bump();
            text.push(escaped);
        } else if c == quote {
            return Some(text);
        }
    }
}

fn lex_number(cur: &mut Cursor, pos: Position) -> Result<SourceToken, LexError> {
    let mut text = String::new();
    // pp-number style: digits, letters, dots, and exponent signs.
    while let Some(c) = cur.peek() {
        let is_hex = text.starts_with("0x") || text.starts_with("0X");
        let exponent_sign = (c == '+' || c == '-')
            && text.chars().last().is_some_and(|p| {
                if is_hex {
                    matches!(p, 'p' | 'P')
                } else {
                    matches!(p, 'e' | 'E')
                }
            });
        if c.is_ascii_alphanumeric() || c == '.' || c == '_' || exponent_sign {
            text.push(c);
            cur.bump();
        } else {
            break;
        }
    }
    if classify_number(&text).is_none() {
        return Err(LexError::MalformedNumber { pos, text });
    }
    Ok(SourceToken {
        category: TokenCategory::Constant,
        text,
        pos,
    })
}

/// Type name of a numeric literal: `int`, `long int`, `unsigned int`,
/// `double`, `float`, ... Returns `None` for malformed literals.
pub fn classify_number(text: &str) -> Option<&'static str> {
    let lower = text.to_ascii_lowercase();
    let is_hex = lower.starts_with("0x");
    let is_float = if is_hex {
        lower.contains('.') || lower.contains('p')
    } else {
        lower.contains('.') || lower.contains('e')
    };
    if is_float {
        let (body, ty) = if let Some(b) = lower.strip_suffix('f') {
            (b, "float")
        } else if let Some(b) = lower.strip_suffix('l') {
            (b, "long double")
        } else {
            (lower.as_str(), "double")
        };
        let valid = if is_hex {
            let digits = &body[2..];
            let (mantissa, exp) = digits.split_once('p')?;
            !mantissa.is_empty()
                && mantissa.chars().filter(|&c| c == '.').count() <= 1
                && mantissa.chars().any(|c| c.is_ascii_hexdigit())
                && mantissa.chars().all(|c| c.is_ascii_hexdigit() || c == '.')
                && valid_exponent(exp)
        } else {
            let (mantissa, exp) = match body.split_once('e') {
                Some((m, e)) => (m, Some(e)),
                None => (body, None),
            };
            mantissa.chars().filter(|&c| c == '.').count() <= 1
                && mantissa.chars().any(|c| c.is_ascii_digit())
                && mantissa.chars().all(|c| c.is_ascii_digit() || c == '.')
                && exp.is_none_or(valid_exponent)
        };
        return valid.then_some(ty);
    }

    let digits_end = lower
        .char_indices()
        .skip(if is_hex { 2 } else { 0 })
        .find(|(_, c)| !(if is_hex { c.is_ascii_hexdigit() } else { c.is_ascii_digit() }))
        .map_or(lower.len(), |(i, _)| i);
    let (digits, suffix) = lower.split_at(digits_end);
    let digits = if is_hex { &digits[2..] } else { digits };
    if digits.is_empty() {
        return None;
    }
    if !is_hex && digits.len() > 1 && digits.starts_with('0') && digits.chars().any(|c| c > '7') {
        return None;
    }
    match suffix {
        "" => Some("int"),
        "u" => Some("unsigned int"),
        "l" => Some("long int"),
        "ul" | "lu" => Some("unsigned long int"),
        "ll" => Some("long long int"),
        "ull" | "llu" => Some("unsigned long long int"),
        _ => None,
    }
}

fn valid_exponent(exp: &str) -> bool {
    let digits = exp.strip_prefix(['+', '-']).unwrap_or(exp);
    !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())
}
