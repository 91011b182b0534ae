use super::ast::Pos;
use super::FrontendError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Class,
    Extends,
    IntKw,
    Null,
    New,
    If,
    Then,
    Else,
    While,
    Do,
    Return,
    Read,
    Assign,
    Semi,
    Comma,
    Dot,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Plus,
    Minus,
    Eq,
    Ne,
    Lt,
    Gt,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Class => "class",
            Tok::Extends => "extends",
            Tok::IntKw => "int",
            Tok::Null => "null",
            Tok::New => "new",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::Do => "do",
            Tok::Return => "return",
            Tok::Read => "read",
            Tok::Assign => ":=",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, FrontendError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(FrontendError::new(pos, "unterminated comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let text: String = chars[start..i].iter().collect();
            let n = text
                .parse::<i64>()
                .map_err(|_| FrontendError::new(pos, format!("integer literal `{text}` out of range")))?;
            out.push((Tok::Int(n), pos));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.as_str() {
                "class" => Tok::Class,
                "extends" => Tok::Extends,
                "int" => Tok::IntKw,
                "null" => Tok::Null,
                "new" => Tok::New,
                "if" => Tok::If,
                "then" => Tok::Then,
                "else" => Tok::Else,
                "while" => Tok::While,
                "do" => Tok::Do,
                "return" => Tok::Return,
                "read" => Tok::Read,
                _ => Tok::Ident(word),
            };
            out.push((tok, pos));
            continue;
        }
        let two = |n: char| chars.get(i + 1) == Some(&n);
        let (tok, len) = match c {
            ':' if two('=') => (Tok::Assign, 2),
            '!' if two('=') => (Tok::Ne, 2),
            ';' => (Tok::Semi, 1),
            ',' => (Tok::Comma, 1),
            '.' => (Tok::Dot, 1),
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '+' => (Tok::Plus, 1),
            '-' => (Tok::Minus, 1),
            '=' => (Tok::Eq, 1),
            '<' => (Tok::Lt, 1),
            '>' => (Tok::Gt, 1),
            _ => return Err(FrontendError::new(pos, format!("unexpected character `{c}`"))),
        };
        for _ in 0..len {
            bump!();
        }
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}
