//! Surface syntax and parser for `.rome` sources.
//!
//! The concrete grammar follows the paper's listing notation: kinds `*`,
//! `L`, `R[k]`, `k -> k`; types with `forall`, type lambdas, rows
//! `{ 'l := t, ... }`, complements `r1 - r2`, qualified types
//! `p1, p2 => t`, singletons `#'l` / `#l` / `#(t)`; terms with `\`, `/\`,
//! explicit type application `M [t]`, labeled intros `l := M`, eliminations
//! `M / l`, concatenation `++`, and branching `|`. Comments run from `--`
//! to end of line.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub const ZERO: Span = Span { line: 0, col: 0 };
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    LabelLit(String),
    KwForall,
    KwType,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Dot,
    Comma,
    ColonEq,
    Colon,
    Eq,
    FatArrow,
    ThinArrow,
    Lambda,
    TyLambda,
    Slash,
    PlusPlus,
    Plus,
    Pipe,
    Tilde,
    Lt,
    Minus,
    Star,
    Hash,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "{}", s),
            Tok::LabelLit(s) => return write!(f, "'{}", s),
            Tok::KwForall => "forall",
            Tok::KwType => "type",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Dot => ".",
            Tok::Comma => ",",
            Tok::ColonEq => ":=",
            Tok::Colon => ":",
            Tok::Eq => "=",
            Tok::FatArrow => "=>",
            Tok::ThinArrow => "->",
            Tok::Lambda => "\\",
            Tok::TyLambda => "/\\",
            Tok::Slash => "/",
            Tok::PlusPlus => "++",
            Tok::Plus => "+",
            Tok::Pipe => "|",
            Tok::Tilde => "~",
            Tok::Lt => "<",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Hash => "#",
        };
        write!(f, "{}", s)
    }
}

#[derive(Debug, Clone)]
pub struct ParseError {
    pub span: Span,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}: error: {}", self.span, self.msg)
    }
}

impl std::error::Error for ParseError {}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn lex(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut toks = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = src.chars().peekable();
    macro_rules! bump {
        () => {{
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        }};
    }
    while let Some(&c) = chars.peek() {
        let span = Span { line, col };
        match c {
            c if c.is_whitespace() => {
                bump!();
            }
            '-' => {
                bump!();
                match chars.peek() {
                    Some('-') => {
                        while let Some(&c) = chars.peek() {
                            if c == '\n' {
                                break;
                            }
                            bump!();
                        }
                    }
                    Some('>') => {
                        bump!();
                        toks.push((Tok::ThinArrow, span));
                    }
                    _ => toks.push((Tok::Minus, span)),
                }
            }
            '\'' => {
                bump!();
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if is_ident_char(c) {
                        s.push(bump!());
                    } else {
                        break;
                    }
                }
                if s.is_empty() {
                    return Err(ParseError { span, msg: "empty label literal".into() });
                }
                toks.push((Tok::LabelLit(s), span));
            }
            c if is_ident_start(c) => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if is_ident_char(c) {
                        s.push(bump!());
                    } else {
                        break;
                    }
                }
                let tok = match s.as_str() {
                    "forall" => Tok::KwForall,
                    "type" => Tok::KwType,
                    _ => Tok::Ident(s),
                };
                toks.push((tok, span));
            }
            c if c.is_ascii_digit() => {
                return Err(ParseError {
                    span,
                    msg: format!("unexpected character `{}` (labels are written '1, '2, ...)", c),
                });
            }
            '(' => {
                bump!();
                toks.push((Tok::LParen, span));
            }
            ')' => {
                bump!();
                toks.push((Tok::RParen, span));
            }
            '{' => {
                bump!();
                toks.push((Tok::LBrace, span));
            }
            '}' => {
                bump!();
                toks.push((Tok::RBrace, span));
            }
            '[' => {
                bump!();
                toks.push((Tok::LBracket, span));
            }
            ']' => {
                bump!();
                toks.push((Tok::RBracket, span));
            }
            '.' => {
                bump!();
                toks.push((Tok::Dot, span));
            }
            ',' => {
                bump!();
                toks.push((Tok::Comma, span));
            }
            ':' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    toks.push((Tok::ColonEq, span));
                } else {
                    toks.push((Tok::Colon, span));
                }
            }
            '=' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    toks.push((Tok::FatArrow, span));
                } else {
                    toks.push((Tok::Eq, span));
                }
            }
            '\\' => {
                bump!();
                toks.push((Tok::Lambda, span));
            }
            '/' => {
                bump!();
                if chars.peek() == Some(&'\\') {
                    bump!();
                    toks.push((Tok::TyLambda, span));
                } else {
                    toks.push((Tok::Slash, span));
                }
            }
            '+' => {
                bump!();
                if chars.peek() == Some(&'+') {
                    bump!();
                    toks.push((Tok::PlusPlus, span));
                } else {
                    toks.push((Tok::Plus, span));
                }
            }
            '|' => {
                bump!();
                toks.push((Tok::Pipe, span));
            }
            '~' => {
                bump!();
                toks.push((Tok::Tilde, span));
            }
            '<' => {
                bump!();
                toks.push((Tok::Lt, span));
            }
            '*' => {
                bump!();
                toks.push((Tok::Star, span));
            }
            '#' => {
                bump!();
                toks.push((Tok::Hash, span));
            }
            c => {
                return Err(ParseError { span, msg: format!("unexpected character `{}`", c) });
            }
        }
    }
    Ok(toks)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SKind {
    Star,
    Label,
    Row(Box<SKind>),
    Arrow(Box<SKind>, Box<SKind>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SType {
    Var(String, Span),
    Pi,
    Sigma,
    Mu,
    Forall(Vec<String>, Option<SKind>, Box<SType>),
    Lam(Vec<String>, Box<SType>),
    Qual(Vec<SPred>, Box<SType>),
    Arrow(Box<SType>, Box<SType>),
    App(Box<SType>, Box<SType>),
    /// Entries are (label expression, type); the label expression is a
    /// label literal or a label-kinded variable.
    Row(Vec<(SType, SType)>),
    Label(String),
    Sing(Box<SType>),
    Compl(Box<SType>, Box<SType>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SPred {
    Leq(SType, SType),
    Plus(SType, SType, SType),
}

#[derive(Clone, Debug, PartialEq)]
pub enum STerm {
    Var(String, Span),
    Lam(Vec<String>, Box<STerm>),
    TyLam(Vec<String>, Box<STerm>),
    App(Box<STerm>, Box<STerm>),
    TyApp(Box<STerm>, SType),
    Sing(SType),
    Intro(Box<STerm>, Box<STerm>),
    Elim(Box<STerm>, Box<STerm>),
    Concat(Box<STerm>, Box<STerm>),
    Branch(Box<STerm>, Box<STerm>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SDecl {
    TypeSig(String, SKind, Span),
    TypeDef(String, SType, Span),
    TermSig(String, SType, Span),
    TermDef(String, STerm, Span),
}

impl SDecl {
    pub fn name(&self) -> &str {
        match self {
            SDecl::TypeSig(n, _, _)
            | SDecl::TypeDef(n, _, _)
            | SDecl::TermSig(n, _, _)
            | SDecl::TermDef(n, _, _) => n,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            SDecl::TypeSig(_, _, s)
            | SDecl::TypeDef(_, _, s)
            | SDecl::TermSig(_, _, s)
            | SDecl::TermDef(_, _, s) => *s,
        }
    }
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, off: usize) -> Option<&Tok> {
        self.toks.get(self.pos + off).map(|(t, _)| t)
    }

    fn span(&self) -> Span {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(_, s)| *s)
            .unwrap_or(Span::ZERO)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { span: self.span(), msg: msg.into() })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let t = t.clone();
                self.err(format!("expected `{}`, found `{}`", tok, t))
            }
            None => self.err(format!("expected `{}`, found end of input", tok)),
        }
    }

    fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(t) => {
                let t = t.clone();
                self.err(format!("expected identifier, found `{}`", t))
            }
            None => self.err("expected identifier, found end of input"),
        }
    }

    /// True when the next tokens start a new declaration: `type`, or an
    /// identifier immediately followed by `:` or `=`. Expression parsing
    /// stops at these points.
    fn at_decl_boundary(&self) -> bool {
        match self.peek() {
            Some(Tok::KwType) => true,
            Some(Tok::Ident(_)) => {
                matches!(self.peek_at(1), Some(Tok::Colon) | Some(Tok::Eq))
            }
            _ => false,
        }
    }

    // Kinds.

    fn parse_kind(&mut self) -> Result<SKind, ParseError> {
        let lhs = self.parse_kind_atom()?;
        if self.peek() == Some(&Tok::ThinArrow) {
            self.pos += 1;
            let rhs = self.parse_kind()?;
            Ok(SKind::Arrow(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn parse_kind_atom(&mut self) -> Result<SKind, ParseError> {
        match self.peek() {
            Some(Tok::Star) => {
                self.pos += 1;
                Ok(SKind::Star)
            }
            Some(Tok::Ident(s)) if s == "L" => {
                self.pos += 1;
                Ok(SKind::Label)
            }
            Some(Tok::Ident(s)) if s == "R" => {
                self.pos += 1;
                self.expect(Tok::LBracket)?;
                let k = self.parse_kind()?;
                self.expect(Tok::RBracket)?;
                Ok(SKind::Row(Box::new(k)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let k = self.parse_kind()?;
                self.expect(Tok::RParen)?;
                Ok(k)
            }
            _ => self.err("expected a kind"),
        }
    }

    // Types.

    fn parse_type(&mut self) -> Result<SType, ParseError> {
        match self.peek() {
            Some(Tok::KwForall) => {
                self.pos += 1;
                let mut binders = vec![self.expect_ident()?];
                while let Some(Tok::Ident(_)) = self.peek() {
                    binders.push(self.expect_ident()?);
                }
                let kind = if self.peek() == Some(&Tok::Colon) {
                    self.pos += 1;
                    Some(self.parse_kind()?)
                } else {
                    None
                };
                self.expect(Tok::Dot)?;
                let body = self.parse_type()?;
                Ok(SType::Forall(binders, kind, Box::new(body)))
            }
            Some(Tok::Lambda) => {
                self.pos += 1;
                let mut binders = vec![self.expect_ident()?];
                while let Some(Tok::Ident(_)) = self.peek() {
                    binders.push(self.expect_ident()?);
                }
                self.expect(Tok::Dot)?;
                let body = self.parse_type()?;
                Ok(SType::Lam(binders, Box::new(body)))
            }
            _ => {
                let first = self.parse_arrow_type()?;
                match self.peek() {
                    Some(Tok::Lt) | Some(Tok::Plus) => {
                        let mut preds = vec![self.finish_pred(first)?];
                        while self.peek() == Some(&Tok::Comma) {
                            self.pos += 1;
                            let lhs = self.parse_arrow_type()?;
                            preds.push(self.finish_pred(lhs)?);
                        }
                        self.expect(Tok::FatArrow)?;
                        let body = self.parse_type()?;
                        Ok(SType::Qual(preds, Box::new(body)))
                    }
                    _ => Ok(first),
                }
            }
        }
    }

    fn finish_pred(&mut self, lhs: SType) -> Result<SPred, ParseError> {
        match self.peek() {
            Some(Tok::Lt) => {
                self.pos += 1;
                let rhs = self.parse_arrow_type()?;
                Ok(SPred::Leq(lhs, rhs))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                let mid = self.parse_arrow_type()?;
                self.expect(Tok::Tilde)?;
                let total = self.parse_arrow_type()?;
                Ok(SPred::Plus(lhs, mid, total))
            }
            _ => self.err("expected `<` or `+` in predicate"),
        }
    }

    fn parse_arrow_type(&mut self) -> Result<SType, ParseError> {
        let lhs = self.parse_compl_type()?;
        if self.peek() == Some(&Tok::ThinArrow) {
            self.pos += 1;
            let rhs = self.parse_arrow_type()?;
            Ok(SType::Arrow(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn parse_compl_type(&mut self) -> Result<SType, ParseError> {
        let mut lhs = self.parse_app_type()?;
        while self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let rhs = self.parse_app_type()?;
            lhs = SType::Compl(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn starts_type_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Ident(_))
                | Some(Tok::LabelLit(_))
                | Some(Tok::LParen)
                | Some(Tok::LBrace)
                | Some(Tok::Hash)
        )
    }

    fn parse_app_type(&mut self) -> Result<SType, ParseError> {
        let mut head = self.parse_type_atom()?;
        while self.starts_type_atom() && !self.at_decl_boundary() {
            let arg = self.parse_type_atom()?;
            head = SType::App(Box::new(head), Box::new(arg));
        }
        Ok(head)
    }

    fn parse_type_atom(&mut self) -> Result<SType, ParseError> {
        let span = self.span();
        match self.next() {
            Some(Tok::Ident(s)) => Ok(match s.as_str() {
                "Pi" => SType::Pi,
                "Sigma" => SType::Sigma,
                "Mu" => SType::Mu,
                _ => SType::Var(s, span),
            }),
            Some(Tok::LabelLit(s)) => Ok(SType::Label(s)),
            Some(Tok::Hash) => {
                let inner = self.parse_sing_atom()?;
                Ok(SType::Sing(Box::new(inner)))
            }
            Some(Tok::LBrace) => self.parse_row_tail(),
            Some(Tok::LParen) => {
                let t = self.parse_type()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(t) => {
                self.pos -= 1;
                self.err(format!("expected a type, found `{}`", t))
            }
            None => self.err("expected a type, found end of input"),
        }
    }

    fn parse_sing_atom(&mut self) -> Result<SType, ParseError> {
        let span = self.span();
        match self.next() {
            Some(Tok::LabelLit(s)) => Ok(SType::Label(s)),
            Some(Tok::Ident(s)) => Ok(SType::Var(s, span)),
            Some(Tok::LParen) => {
                let t = self.parse_type()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => {
                self.pos -= 1;
                self.err("expected a label, identifier, or parenthesized type after `#`")
            }
        }
    }

    /// Parse row entries after the opening brace.
    fn parse_row_tail(&mut self) -> Result<SType, ParseError> {
        let mut entries = Vec::new();
        if self.peek() == Some(&Tok::RBrace) {
            self.pos += 1;
            return Ok(SType::Row(entries));
        }
        loop {
            let span = self.span();
            let label = match self.next() {
                Some(Tok::LabelLit(s)) => SType::Label(s),
                Some(Tok::Ident(s)) => SType::Var(s, span),
                _ => {
                    self.pos -= 1;
                    return self.err("expected a label in row entry");
                }
            };
            self.expect(Tok::ColonEq)?;
            let ty = self.parse_arrow_type()?;
            entries.push((label, ty));
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RBrace) => break,
                _ => {
                    self.pos -= 1;
                    return self.err("expected `,` or `}` in row");
                }
            }
        }
        Ok(SType::Row(entries))
    }

    // Terms.

    fn parse_term(&mut self) -> Result<STerm, ParseError> {
        match self.peek() {
            Some(Tok::Lambda) => {
                self.pos += 1;
                let mut binders = vec![self.expect_ident()?];
                while let Some(Tok::Ident(_)) = self.peek() {
                    binders.push(self.expect_ident()?);
                }
                self.expect(Tok::Dot)?;
                let body = self.parse_term()?;
                Ok(STerm::Lam(binders, Box::new(body)))
            }
            Some(Tok::TyLambda) => {
                self.pos += 1;
                let mut binders = vec![self.expect_ident()?];
                while let Some(Tok::Ident(_)) = self.peek() {
                    binders.push(self.expect_ident()?);
                }
                self.expect(Tok::Dot)?;
                let body = self.parse_term()?;
                Ok(STerm::TyLam(binders, Box::new(body)))
            }
            _ => self.parse_intro(),
        }
    }

    fn parse_intro(&mut self) -> Result<STerm, ParseError> {
        let lhs = self.parse_branch()?;
        if self.peek() == Some(&Tok::ColonEq) {
            self.pos += 1;
            let rhs = self.parse_intro_rhs()?;
            Ok(STerm::Intro(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    /// The payload of `l := M` may itself be a lambda or another intro.
    fn parse_intro_rhs(&mut self) -> Result<STerm, ParseError> {
        self.parse_term()
    }

    fn parse_branch(&mut self) -> Result<STerm, ParseError> {
        let mut lhs = self.parse_concat()?;
        while self.peek() == Some(&Tok::Pipe) && !self.at_decl_boundary() {
            self.pos += 1;
            let rhs = self.parse_operand_term()?;
            lhs = STerm::Branch(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_concat(&mut self) -> Result<STerm, ParseError> {
        let mut lhs = self.parse_slash()?;
        while self.peek() == Some(&Tok::PlusPlus) {
            self.pos += 1;
            let rhs = self.parse_slash()?;
            lhs = STerm::Concat(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    /// Operands of `|` may be lambdas, as in `case l f | const tt`
    /// continuations written inline.
    fn parse_operand_term(&mut self) -> Result<STerm, ParseError> {
        match self.peek() {
            Some(Tok::Lambda) | Some(Tok::TyLambda) => self.parse_term(),
            _ => self.parse_concat(),
        }
    }

    fn parse_slash(&mut self) -> Result<STerm, ParseError> {
        let mut lhs = self.parse_app_term()?;
        while self.peek() == Some(&Tok::Slash) {
            self.pos += 1;
            let rhs = self.parse_app_term()?;
            lhs = STerm::Elim(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn starts_term_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Ident(_)) | Some(Tok::LParen) | Some(Tok::Hash)
        )
    }

    fn parse_app_term(&mut self) -> Result<STerm, ParseError> {
        let mut head = self.parse_term_atom()?;
        loop {
            if self.peek() == Some(&Tok::LBracket) {
                self.pos += 1;
                let ty = self.parse_type()?;
                self.expect(Tok::RBracket)?;
                head = STerm::TyApp(Box::new(head), ty);
            } else if self.starts_term_atom() && !self.at_decl_boundary() {
                let arg = self.parse_term_atom()?;
                head = STerm::App(Box::new(head), Box::new(arg));
            } else {
                break;
            }
        }
        Ok(head)
    }

    fn parse_term_atom(&mut self) -> Result<STerm, ParseError> {
        let span = self.span();
        match self.next() {
            Some(Tok::Ident(s)) => Ok(STerm::Var(s, span)),
            Some(Tok::Hash) => {
                let ty = self.parse_sing_atom()?;
                Ok(STerm::Sing(ty))
            }
            Some(Tok::LParen) => {
                let t = self.parse_term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(t) => {
                self.pos -= 1;
                self.err(format!("expected a term, found `{}`", t))
            }
            None => self.err("expected a term, found end of input"),
        }
    }

    // Declarations.

    fn parse_decl(&mut self) -> Result<SDecl, ParseError> {
        let span = self.span();
        if self.peek() == Some(&Tok::KwType) {
            self.pos += 1;
            let name = self.expect_ident()?;
            match self.next() {
                Some(Tok::Colon) => Ok(SDecl::TypeSig(name, self.parse_kind()?, span)),
                Some(Tok::Eq) => Ok(SDecl::TypeDef(name, self.parse_type()?, span)),
                _ => {
                    self.pos -= 1;
                    self.err("expected `:` or `=` after type name")
                }
            }
        } else {
            let name = self.expect_ident()?;
            match self.next() {
                Some(Tok::Colon) => Ok(SDecl::TermSig(name, self.parse_type()?, span)),
                Some(Tok::Eq) => Ok(SDecl::TermDef(name, self.parse_term()?, span)),
                _ => {
                    self.pos -= 1;
                    self.err("expected `:` or `=` after name")
                }
            }
        }
    }

    fn parse_program(&mut self) -> Result<Vec<SDecl>, ParseError> {
        let mut decls = Vec::new();
        while self.peek().is_some() {
            decls.push(self.parse_decl()?);
        }
        Ok(decls)
    }
}

/// Parse a full declaration sequence.
pub fn parse_program(src: &str) -> Result<Vec<SDecl>, ParseError> {
    let toks = lex(src)?;
    Parser { toks, pos: 0 }.parse_program()
}

/// Parse a single term (for the REPL).
pub fn parse_term(src: &str) -> Result<STerm, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let t = p.parse_term()?;
    if p.peek().is_some() {
        return p.err("trailing input after term");
    }
    Ok(t)
}

/// Parse a single type (for the REPL's `:k`).
pub fn parse_type(src: &str) -> Result<SType, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let t = p.parse_type()?;
    if p.peek().is_some() {
        return p.err("trailing input after type");
    }
    Ok(t)
}

// Printing. The printer emits fully parenthesized atoms only where the
// grammar requires them, so `parse (print (parse s)) = parse s`.

pub fn print_kind(k: &SKind) -> String {
    match k {
        SKind::Star => "*".into(),
        SKind::Label => "L".into(),
        SKind::Row(k) => format!("R[{}]", print_kind(k)),
        SKind::Arrow(a, b) => {
            let lhs = match **a {
                SKind::Arrow(_, _) => format!("({})", print_kind(a)),
                _ => print_kind(a),
            };
            format!("{} -> {}", lhs, print_kind(b))
        }
    }
}

fn type_prec(t: &SType) -> u8 {
    // 0: forall/lam/qual, 1: arrow, 2: compl, 3: app, 4: atom
    match t {
        SType::Forall(..) | SType::Lam(..) | SType::Qual(..) => 0,
        SType::Arrow(..) => 1,
        SType::Compl(..) => 2,
        SType::App(..) => 3,
        _ => 4,
    }
}

fn print_type_at(t: &SType, min: u8) -> String {
    let prec = type_prec(t);
    let s = match t {
        SType::Var(n, _) => n.clone(),
        SType::Pi => "Pi".into(),
        SType::Sigma => "Sigma".into(),
        SType::Mu => "Mu".into(),
        SType::Forall(bs, k, body) => {
            let ks = match k {
                Some(k) => format!(" : {}", print_kind(k)),
                None => String::new(),
            };
            format!("forall {}{}. {}", bs.join(" "), ks, print_type_at(body, 0))
        }
        SType::Lam(bs, body) => format!("\\ {}. {}", bs.join(" "), print_type_at(body, 0)),
        SType::Qual(preds, body) => {
            let ps: Vec<String> = preds.iter().map(print_pred).collect();
            format!("{} => {}", ps.join(", "), print_type_at(body, 1))
        }
        SType::Arrow(a, b) => format!("{} -> {}", print_type_at(a, 2), print_type_at(b, 1)),
        SType::Compl(a, b) => format!("{} - {}", print_type_at(a, 2), print_type_at(b, 3)),
        SType::App(f, a) => format!("{} {}", print_type_at(f, 3), print_type_at(a, 4)),
        SType::Row(entries) => {
            let es: Vec<String> = entries
                .iter()
                .map(|(l, t)| format!("{} := {}", print_type_at(l, 4), print_type_at(t, 1)))
                .collect();
            if es.is_empty() {
                "{}".into()
            } else {
                format!("{{ {} }}", es.join(", "))
            }
        }
        SType::Label(l) => format!("'{}", l),
        SType::Sing(inner) => match &**inner {
            SType::Label(l) => format!("#'{}", l),
            SType::Var(n, _) => format!("#{}", n),
            other => format!("#({})", print_type_at(other, 0)),
        },
    };
    if prec < min {
        format!("({})", s)
    } else {
        s
    }
}

pub fn print_pred(p: &SPred) -> String {
    match p {
        SPred::Leq(a, b) => format!("{} < {}", print_type_at(a, 2), print_type_at(b, 2)),
        SPred::Plus(a, b, c) => format!(
            "{} + {} ~ {}",
            print_type_at(a, 2),
            print_type_at(b, 2),
            print_type_at(c, 2)
        ),
    }
}

pub fn print_type(t: &SType) -> String {
    print_type_at(t, 0)
}

fn term_prec(t: &STerm) -> u8 {
    // 0: lam/tylam/intro, 1: branch, 2: concat, 3: slash, 4: app, 5: atom
    match t {
        STerm::Lam(..) | STerm::TyLam(..) | STerm::Intro(..) => 0,
        STerm::Branch(..) => 1,
        STerm::Concat(..) => 2,
        STerm::Elim(..) => 3,
        STerm::App(..) | STerm::TyApp(..) => 4,
        _ => 5,
    }
}

fn print_term_at(t: &STerm, min: u8) -> String {
    let prec = term_prec(t);
    let s = match t {
        STerm::Var(n, _) => n.clone(),
        STerm::Lam(bs, body) => format!("\\ {}. {}", bs.join(" "), print_term_at(body, 0)),
        STerm::TyLam(bs, body) => format!("/\\ {}. {}", bs.join(" "), print_term_at(body, 0)),
        STerm::Intro(l, m) => format!("{} := {}", print_term_at(l, 1), print_term_at(m, 0)),
        STerm::Branch(a, b) => format!("{} | {}", print_term_at(a, 1), print_term_at(b, 2)),
        STerm::Concat(a, b) => format!("{} ++ {}", print_term_at(a, 2), print_term_at(b, 3)),
        STerm::Elim(a, b) => format!("{} / {}", print_term_at(a, 3), print_term_at(b, 4)),
        STerm::App(f, a) => format!("{} {}", print_term_at(f, 4), print_term_at(a, 5)),
        STerm::TyApp(f, ty) => format!("{} [{}]", print_term_at(f, 4), print_type(ty)),
        STerm::Sing(ty) => match ty {
            SType::Label(l) => format!("#'{}", l),
            SType::Var(n, _) => format!("#{}", n),
            other => format!("#({})", print_type(other)),
        },
    };
    if prec < min {
        format!("({})", s)
    } else {
        s
    }
}

pub fn print_term(t: &STerm) -> String {
    print_term_at(t, 0)
}

pub fn print_decl(d: &SDecl) -> String {
    match d {
        SDecl::TypeSig(n, k, _) => format!("type {} : {}", n, print_kind(k)),
        SDecl::TypeDef(n, t, _) => format!("type {} = {}", n, print_type(t)),
        SDecl::TermSig(n, t, _) => format!("{} : {}", n, print_type(t)),
        SDecl::TermDef(n, m, _) => format!("{} = {}", n, print_term(m)),
    }
}

pub fn print_program(decls: &[SDecl]) -> String {
    let mut out = String::new();
    for d in decls {
        out.push_str(&print_decl(d));
        out.push('\n');
    }
    out
}

/// Structural equality ignoring spans, for parser round-trip checks.
pub fn decls_equal_modulo_spans(a: &[SDecl], b: &[SDecl]) -> bool {
    fn strip_ty(t: &SType) -> SType {
        match t {
            SType::Var(n, _) => SType::Var(n.clone(), Span::ZERO),
            SType::Pi | SType::Sigma | SType::Mu | SType::Label(_) => t.clone(),
            SType::Forall(bs, k, b) => {
                SType::Forall(bs.clone(), k.clone(), Box::new(strip_ty(b)))
            }
            SType::Lam(bs, b) => SType::Lam(bs.clone(), Box::new(strip_ty(b))),
            SType::Qual(ps, b) => SType::Qual(
                ps.iter().map(strip_pred).collect(),
                Box::new(strip_ty(b)),
            ),
            SType::Arrow(x, y) => SType::Arrow(Box::new(strip_ty(x)), Box::new(strip_ty(y))),
            SType::App(x, y) => SType::App(Box::new(strip_ty(x)), Box::new(strip_ty(y))),
            SType::Row(es) => {
                SType::Row(es.iter().map(|(l, t)| (strip_ty(l), strip_ty(t))).collect())
            }
            SType::Sing(x) => SType::Sing(Box::new(strip_ty(x))),
            SType::Compl(x, y) => SType::Compl(Box::new(strip_ty(x)), Box::new(strip_ty(y))),
        }
    }
    fn strip_pred(p: &SPred) -> SPred {
        match p {
            SPred::Leq(a, b) => SPred::Leq(strip_ty(a), strip_ty(b)),
            SPred::Plus(a, b, c) => SPred::Plus(strip_ty(a), strip_ty(b), strip_ty(c)),
        }
    }
    fn strip_tm(t: &STerm) -> STerm {
        match t {
            STerm::Var(n, _) => STerm::Var(n.clone(), Span::ZERO),
            STerm::Lam(bs, b) => STerm::Lam(bs.clone(), Box::new(strip_tm(b))),
            STerm::TyLam(bs, b) => STerm::TyLam(bs.clone(), Box::new(strip_tm(b))),
            STerm::App(f, a) => STerm::App(Box::new(strip_tm(f)), Box::new(strip_tm(a))),
            STerm::TyApp(f, ty) => STerm::TyApp(Box::new(strip_tm(f)), strip_ty(ty)),
            STerm::Sing(ty) => STerm::Sing(strip_ty(ty)),
            STerm::Intro(l, m) => STerm::Intro(Box::new(strip_tm(l)), Box::new(strip_tm(m))),
            STerm::Elim(m, l) => STerm::Elim(Box::new(strip_tm(m)), Box::new(strip_tm(l))),
            STerm::Concat(x, y) => STerm::Concat(Box::new(strip_tm(x)), Box::new(strip_tm(y))),
            STerm::Branch(x, y) => STerm::Branch(Box::new(strip_tm(x)), Box::new(strip_tm(y))),
        }
    }
    fn strip_decl(d: &SDecl) -> SDecl {
        match d {
            SDecl::TypeSig(n, k, _) => SDecl::TypeSig(n.clone(), k.clone(), Span::ZERO),
            SDecl::TypeDef(n, t, _) => SDecl::TypeDef(n.clone(), strip_ty(t), Span::ZERO),
            SDecl::TermSig(n, t, _) => SDecl::TermSig(n.clone(), strip_ty(t), Span::ZERO),
            SDecl::TermDef(n, m, _) => SDecl::TermDef(n.clone(), strip_tm(m), Span::ZERO),
        }
    }
    a.len() == b.len()
        && a.iter()
            .zip(b.iter())
            .all(|(x, y)| strip_decl(x) == strip_decl(y))
}
