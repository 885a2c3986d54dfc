//! Recursive-descent parser for the supported C subset.
//!
//! Binary operators use precedence climbing. Every construct maps onto one
//! token kind from [`kinds::ALL`]; anything outside the subset is reported
//! as [`ParseError::Unsupported`] instead of being dropped.

use thiserror::Error;

use super::lexer::{classify_number, Position, SourceToken, TokenCategory};
use crate::ast::{Ast, AstNode};

pub mod kinds {
    pub const FILE_AST: &str = "FileAST";
    pub const FUNC_DEF: &str = "FuncDef";
    pub const DECL: &str = "Decl";
    pub const TYPE_DECL: &str = "TypeDecl";
    pub const IDENTIFIER_TYPE: &str = "IdentifierType";
    pub const PARAM_LIST: &str = "ParamList";
    pub const COMPOUND: &str = "Compound";
    pub const IF: &str = "If";
    pub const WHILE: &str = "While";
    pub const FOR: &str = "For";
    pub const RETURN: &str = "Return";
    pub const ASSIGNMENT: &str = "Assignment";
    pub const BINARY_OP: &str = "BinaryOp";
    pub const UNARY_OP: &str = "UnaryOp";
    pub const FUNC_CALL: &str = "FuncCall";
    pub const EXPR_LIST: &str = "ExprList";
    pub const ID: &str = "ID";
    pub const CONSTANT: &str = "Constant";
    pub const ARRAY_DECL: &str = "ArrayDecl";
    pub const PTR_DECL: &str = "PtrDecl";

    /// The closed vocabulary produced by the parser.
    pub const ALL: [&str; 20] = [
        FILE_AST,
        FUNC_DEF,
        DECL,
        TYPE_DECL,
        IDENTIFIER_TYPE,
        PARAM_LIST,
        COMPOUND,
        IF,
        WHILE,
        FOR,
        RETURN,
        ASSIGNMENT,
        BINARY_OP,
        UNARY_OP,
        FUNC_CALL,
        EXPR_LIST,
        ID,
        CONSTANT,
        ARRAY_DECL,
        PTR_DECL,
    ];
}

use kinds::*;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{pos}: syntax error: found `{found}`, expected one of: {}", expected.join(", "))]
    Syntax {
        pos: Position,
        found: String,
        expected: Vec<String>,
    },
    #[error("unexpected end of input, expected one of: {}", expected.join(", "))]
    UnexpectedEnd { expected: Vec<String> },
    #[error("{pos}: unsupported construct: {construct}")]
    Unsupported { pos: Position, construct: String },
}

const TYPE_SPECIFIERS: &[&str] = &[
    "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned",
];
const STORAGE_AND_QUALIFIERS: &[&str] = &["static", "extern", "const", "volatile"];
const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="];

fn binary_precedence(op: &str) -> Option<u8> {
    Some(match op {
        "||" => 1,
        "&&" => 2,
        "|" => 3,
        "^" => 4,
        "&" => 5,
        "==" | "!=" => 6,
        "<" | ">" | "<=" | ">=" => 7,
        "<<" | ">>" => 8,
        "+" | "-" => 9,
        "*" | "/" | "%" => 10,
        _ => return None,
    })
}

/// Keywords with a dedicated unsupported-construct message.
fn unsupported_keyword(word: &str) -> Option<&'static str> {
    Some(match word {
        "struct" => "struct type",
        "union" => "union type",
        "enum" => "enum type",
        "typedef" => "typedef declaration",
        "switch" => "switch statement",
        "case" | "default" => "switch label",
        "do" => "do-while statement",
        "goto" => "goto statement",
        "break" => "break statement",
        "continue" => "continue statement",
        "sizeof" => "sizeof expression",
        "auto" | "register" => "storage class specifier",
        "inline" => "inline function specifier",
        "restrict" => "restrict qualifier",
        "_Bool" | "_Complex" | "_Imaginary" => "extended arithmetic type",
        _ => return None,
    })
}

type PResult<T> = Result<T, ParseError>;

fn node(kind: &str, params: Vec<String>, children: Vec<AstNode>, pos: Position) -> PResult<AstNode> {
    AstNode::new(kind, params, children).map_err(|e| ParseError::Unsupported {
        pos,
        construct: e.to_string(),
    })
}

struct DeclSpecifiers {
    type_words: Vec<String>,
    extra: Vec<String>,
    pos: Position,
}

enum Suffix {
    Array(Option<AstNode>),
    Function(AstNode),
}

struct Declarator {
    name: String,
    pointers: usize,
    suffixes: Vec<Suffix>,
    pos: Position,
}

impl Declarator {
    fn is_function(&self) -> bool {
        matches!(self.suffixes.first(), Some(Suffix::Function(_)))
    }
}

struct Parser<'t> {
    tokens: &'t [SourceToken],
    index: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t SourceToken> {
        self.tokens.get(self.index)
    }

    fn peek_at(&self, offset: usize) -> Option<&'t SourceToken> {
        self.tokens.get(self.index + offset)
    }

    fn pos(&self) -> Position {
        self.peek()
            .or_else(|| self.tokens.last())
            .map(|t| t.pos)
            .unwrap_or(Position { line: 1, col: 1 })
    }

    fn advance(&mut self) -> Option<&'t SourceToken> {
        let t = self.tokens.get(self.index)?;
        self.index += 1;
        Some(t)
    }

    fn at_text(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| {
            t.text == text
                && matches!(
                    t.category,
                    TokenCategory::Operator | TokenCategory::Punctuator | TokenCategory::Keyword
                )
        })
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.at_text(text) {
            self.index += 1;
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let expected = expected.iter().map(|s| s.to_string()).collect();
        Err(match self.peek() {
            Some(t) => ParseError::Syntax {
                pos: t.pos,
                found: t.text.clone(),
                expected,
            },
            None => ParseError::UnexpectedEnd { expected },
        })
    }

    fn unsupported<T>(&self, pos: Position, construct: &str) -> PResult<T> {
        Err(ParseError::Unsupported {
            pos,
            construct: construct.to_string(),
        })
    }

    fn expect(&mut self, text: &str) -> PResult<()> {
        if self.eat(text) {
            Ok(())
        } else {
            self.error(&[text])
        }
    }

    fn reject_unsupported_keyword(&self) -> PResult<()> {
        if let Some(t) = self.peek() {
            if t.category == TokenCategory::Keyword {
                if let Some(construct) = unsupported_keyword(&t.text) {
                    return self.unsupported(t.pos, construct);
                }
            }
        }
        Ok(())
    }

    fn at_decl_start(&self) -> bool {
        self.peek().is_some_and(|t| {
            t.category == TokenCategory::Keyword
                && (TYPE_SPECIFIERS.contains(&t.text.as_str())
                    || STORAGE_AND_QUALIFIERS.contains(&t.text.as_str()))
        })
    }

    // ---- declarations ----

    fn translation_unit(&mut self) -> PResult<AstNode> {
        let mut items = Vec::new();
        while self.peek().is_some() {
            self.reject_unsupported_keyword()?;
            if !self.at_decl_start() {
                if self.at_text(";") {
                    return self.unsupported(self.pos(), "empty declaration");
                }
                return self.error(&["type specifier"]);
            }
            let specs = self.decl_specifiers()?;
            let first = self.declarator()?;
            if self.at_text("{") {
                if !first.is_function() {
                    return self.error(&["=", ",", ";"]);
                }
                let decl = self.build_decl(&specs, first, None)?;
                let body = self.compound()?;
                items.push(node(FUNC_DEF, vec![], vec![decl, body], specs.pos)?);
            } else {
                items.extend(self.declaration_rest(&specs, first)?);
            }
        }
        node(FILE_AST, vec![], items, Position { line: 1, col: 1 })
    }

    fn decl_specifiers(&mut self) -> PResult<DeclSpecifiers> {
        let pos = self.pos();
        let mut type_words = Vec::new();
        let mut extra = Vec::new();
        while let Some(t) = self.peek() {
            if t.category != TokenCategory::Keyword {
                break;
            }
            if let Some(construct) = unsupported_keyword(&t.text) {
                return self.unsupported(t.pos, construct);
            }
            if TYPE_SPECIFIERS.contains(&t.text.as_str()) {
                type_words.push(t.text.clone());
            } else if STORAGE_AND_QUALIFIERS.contains(&t.text.as_str()) {
                extra.push(t.text.clone());
            } else {
                break;
            }
            self.index += 1;
        }
        if type_words.is_empty() {
            return self.error(&["type specifier"]);
        }
        if type_words.len() > 3 {
            return self.unsupported(pos, "type specifier list longer than three words");
        }
        if extra.len() > 2 {
            return self.unsupported(pos, "more than two storage-class or qualifier words");
        }
        Ok(DeclSpecifiers {
            type_words,
            extra,
            pos,
        })
    }

    fn declarator(&mut self) -> PResult<Declarator> {
        let mut pointers = 0;
        while self.eat("*") {
            if self.peek().is_some_and(|t| {
                t.category == TokenCategory::Keyword
                    && STORAGE_AND_QUALIFIERS.contains(&t.text.as_str())
            }) {
                return self.unsupported(self.pos(), "qualified pointer");
            }
            pointers += 1;
        }
        if self.at_text("(") {
            return self.unsupported(self.pos(), "parenthesized declarator");
        }
        let name_tok = match self.peek() {
            Some(t) if t.category == TokenCategory::Identifier => t,
            _ => return self.error(&["identifier"]),
        };
        self.index += 1;
        let mut suffixes = Vec::new();
        loop {
            if self.at_text("[") {
                let pos = self.pos();
                self.index += 1;
                let dim = if self.at_text("]") {
                    None
                } else {
                    Some(self.assignment()?)
                };
                self.expect("]")?;
                if matches!(suffixes.last(), Some(Suffix::Function(_))) {
                    return self.unsupported(pos, "function returning an array");
                }
                suffixes.push(Suffix::Array(dim));
            } else if self.at_text("(") {
                let pos = self.pos();
                self.index += 1;
                if !suffixes.is_empty() {
                    return self.unsupported(pos, "array of functions or function returning a function");
                }
                let params = self.param_list(pos)?;
                suffixes.push(Suffix::Function(params));
            } else {
                break;
            }
        }
        Ok(Declarator {
            name: name_tok.text.clone(),
            pointers,
            suffixes,
            pos: name_tok.pos,
        })
    }

    /// Parses after the opening parenthesis up to and including `)`.
    fn param_list(&mut self, pos: Position) -> PResult<AstNode> {
        let mut params = Vec::new();
        if self.at_text("void") && self.peek_at(1).is_some_and(|t| t.text == ")") {
            self.index += 2;
            return node(PARAM_LIST, vec![], params, pos);
        }
        if self.eat(")") {
            return node(PARAM_LIST, vec![], params, pos);
        }
        loop {
            if self.at_text("...") {
                return self.unsupported(self.pos(), "variadic parameter list");
            }
            self.reject_unsupported_keyword()?;
            let specs = self.decl_specifiers()?;
            if self.at_text(",") || self.at_text(")") || self.at_text("[") {
                return self.unsupported(self.pos(), "abstract declarator");
            }
            let declarator = self.declarator()?;
            params.push(self.build_decl(&specs, declarator, None)?);
            if self.eat(")") {
                break;
            }
            if !self.eat(",") {
                return self.error(&[",", ")"]);
            }
        }
        node(PARAM_LIST, vec![], params, pos)
    }

    /// `= init` and further declarators through the closing `;`.
    fn declaration_rest(&mut self, specs: &DeclSpecifiers, first: Declarator) -> PResult<Vec<AstNode>> {
        let mut decls = Vec::new();
        let mut declarator = first;
        loop {
            let init = if self.eat("=") {
                if self.at_text("{") {
                    return self.unsupported(self.pos(), "initializer list");
                }
                if declarator.is_function() {
                    return self.unsupported(declarator.pos, "initialized function declaration");
                }
                Some(self.assignment()?)
            } else {
                None
            };
            decls.push(self.build_decl(specs, declarator, init)?);
            if self.eat(";") {
                return Ok(decls);
            }
            if !self.eat(",") {
                return self.error(&["=", ",", ";"]);
            }
            declarator = self.declarator()?;
        }
    }

    fn build_decl(&self, specs: &DeclSpecifiers, d: Declarator, init: Option<AstNode>) -> PResult<AstNode> {
        let pos = d.pos;
        let ident_type = node(IDENTIFIER_TYPE, specs.type_words.clone(), vec![], specs.pos)?;
        let mut ty = node(TYPE_DECL, vec![d.name.clone()], vec![ident_type], pos)?;
        for _ in 0..d.pointers {
            ty = node(PTR_DECL, vec![], vec![ty], pos)?;
        }
        let mut param_list = None;
        for suffix in d.suffixes.into_iter().rev() {
            match suffix {
                Suffix::Array(dim) => {
                    let mut children = vec![ty];
                    children.extend(dim);
                    ty = node(ARRAY_DECL, vec![], children, pos)?;
                }
                Suffix::Function(params) => param_list = Some(params),
            }
        }
        let mut params = vec![d.name];
        params.extend(specs.extra.iter().cloned());
        let mut children = vec![ty];
        children.extend(param_list);
        children.extend(init);
        node(DECL, params, children, pos)
    }

    // ---- statements ----

    fn compound(&mut self) -> PResult<AstNode> {
        let pos = self.pos();
        self.expect("{")?;
        let mut items = Vec::new();
        loop {
            if self.eat("}") {
                break;
            }
            if self.peek().is_none() {
                return self.error(&["}"]);
            }
            self.reject_unsupported_keyword()?;
            if self.at_decl_start() {
                let specs = self.decl_specifiers()?;
                let first = self.declarator()?;
                items.extend(self.declaration_rest(&specs, first)?);
            } else {
                items.push(self.statement()?);
            }
        }
        node(COMPOUND, vec![], items, pos)
    }

    fn statement(&mut self) -> PResult<AstNode> {
        self.reject_unsupported_keyword()?;
        let pos = self.pos();
        if self.at_text("{") {
            return self.compound();
        }
        if self.at_decl_start() {
            return self.unsupported(pos, "declaration as a sub-statement");
        }
        if self.eat("if") {
            self.expect("(")?;
            let cond = self.expression()?;
            self.expect(")")?;
            let then = self.statement()?;
            let mut children = vec![cond, then];
            if self.eat("else") {
                children.push(self.statement()?);
            }
            return node(IF, vec![], children, pos);
        }
        if self.eat("while") {
            self.expect("(")?;
            let cond = self.expression()?;
            self.expect(")")?;
            let body = self.statement()?;
            return node(WHILE, vec![], vec![cond, body], pos);
        }
        if self.eat("for") {
            return self.for_statement(pos);
        }
        if self.eat("return") {
            let mut children = Vec::new();
            if !self.at_text(";") {
                children.push(self.expression()?);
            }
            self.expect(";")?;
            return node(RETURN, vec![], children, pos);
        }
        if self.at_text(";") {
            return self.unsupported(pos, "empty statement");
        }
        if self.at_text("else") {
            return self.error(&["statement"]);
        }
        let expr = self.expression()?;
        if self.at_text(":") {
            return self.unsupported(pos, "labeled statement");
        }
        self.expect(";")?;
        Ok(expr)
    }

    /// `For` carries the names of the clauses that are present as params,
    /// so omitted clauses stay distinguishable.
    fn for_statement(&mut self, pos: Position) -> PResult<AstNode> {
        self.expect("(")?;
        let mut present = Vec::new();
        let mut children = Vec::new();
        if self.at_decl_start() {
            let specs = self.decl_specifiers()?;
            let first = self.declarator()?;
            let mut decls = self.declaration_rest(&specs, first)?;
            if decls.len() != 1 {
                return self.unsupported(pos, "multi-declarator for-loop initializer");
            }
            present.push("init".to_string());
            children.append(&mut decls);
        } else {
            if !self.at_text(";") {
                present.push("init".to_string());
                children.push(self.expression()?);
            }
            self.expect(";")?;
        }
        if !self.at_text(";") {
            present.push("cond".to_string());
            children.push(self.expression()?);
        }
        self.expect(";")?;
        if !self.at_text(")") {
            present.push("next".to_string());
            children.push(self.expression()?);
        }
        self.expect(")")?;
        children.push(self.statement()?);
        node(FOR, present, children, pos)
    }

    // ---- expressions ----

    fn expression(&mut self) -> PResult<AstNode> {
        let pos = self.pos();
        let first = self.assignment()?;
        if !self.at_text(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat(",") {
            items.push(self.assignment()?);
        }
        node(EXPR_LIST, vec![], items, pos)
    }

    fn assignment(&mut self) -> PResult<AstNode> {
        let lhs = self.binary(1)?;
        if self.at_text("?") {
            return self.unsupported(self.pos(), "conditional expression");
        }
        if let Some(t) = self.peek() {
            if t.category == TokenCategory::Operator && ASSIGN_OPS.contains(&t.text.as_str()) {
                self.index += 1;
                let rhs = self.assignment()?;
                return node(ASSIGNMENT, vec![t.text.clone()], vec![lhs, rhs], t.pos);
            }
        }
        Ok(lhs)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<AstNode> {
        let mut lhs = self.unary()?;
        while let Some(t) = self.peek() {
            let prec = match (t.category, binary_precedence(&t.text)) {
                (TokenCategory::Operator, Some(p)) if p >= min_prec => p,
                _ => break,
            };
            self.index += 1;
            let rhs = self.binary(prec + 1)?;
            lhs = node(BINARY_OP, vec![t.text.clone()], vec![lhs, rhs], t.pos)?;
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<AstNode> {
        let Some(t) = self.peek() else {
            return self.error(&["expression"]);
        };
        if t.category == TokenCategory::Operator
            && matches!(t.text.as_str(), "++" | "--" | "-" | "+" | "!" | "~" | "*" | "&")
        {
            self.index += 1;
            let operand = self.unary()?;
            return node(UNARY_OP, vec![t.text.clone()], vec![operand], t.pos);
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<AstNode> {
        let mut expr = self.primary()?;
        while let Some(t) = self.peek() {
            match (t.category, t.text.as_str()) {
                (TokenCategory::Punctuator, "(") => {
                    self.index += 1;
                    let mut children = vec![expr];
                    if !self.eat(")") {
                        let args_pos = self.pos();
                        let mut args = vec![self.assignment()?];
                        while self.eat(",") {
                            args.push(self.assignment()?);
                        }
                        self.expect(")")?;
                        children.push(node(EXPR_LIST, vec![], args, args_pos)?);
                    }
                    expr = node(FUNC_CALL, vec![], children, t.pos)?;
                }
                (TokenCategory::Operator, "++" | "--") => {
                    self.index += 1;
                    expr = node(UNARY_OP, vec![format!("p{}", t.text)], vec![expr], t.pos)?;
                }
                (TokenCategory::Punctuator, "[") => {
                    return self.unsupported(t.pos, "array subscript");
                }
                (TokenCategory::Operator, "." | "->") => {
                    return self.unsupported(t.pos, "member access");
                }
                _ => break,
            }
        }
        Ok(expr)
    }

    fn primary(&mut self) -> PResult<AstNode> {
        self.reject_unsupported_keyword()?;
        let Some(t) = self.peek() else {
            return self.error(&["expression"]);
        };
        match t.category {
            TokenCategory::Identifier => {
                self.index += 1;
                node(ID, vec![t.text.clone()], vec![], t.pos)
            }
            TokenCategory::Constant => {
                self.index += 1;
                let ty = if t.text.starts_with('\'') {
                    "char"
                } else {
                    classify_number(&t.text).unwrap_or("int")
                };
                node(CONSTANT, vec![ty.to_string(), t.text.clone()], vec![], t.pos)
            }
            TokenCategory::StringLiteral => {
                // Adjacent literals concatenate into one constant.
                let mut body = String::new();
                while let Some(s) = self.peek().filter(|s| s.category == TokenCategory::StringLiteral) {
                    body.push_str(&s.text[1..s.text.len() - 1]);
                    self.index += 1;
                }
                node(CONSTANT, vec!["string".to_string(), format!("\"{body}\"")], vec![], t.pos)
            }
            TokenCategory::Punctuator if t.text == "(" => {
                if self.peek_at(1).is_some_and(|n| {
                    n.category == TokenCategory::Keyword
                        && (TYPE_SPECIFIERS.contains(&n.text.as_str())
                            || STORAGE_AND_QUALIFIERS.contains(&n.text.as_str()))
                }) {
                    return self.unsupported(t.pos, "cast expression");
                }
                self.index += 1;
                let inner = self.expression()?;
                self.expect(")")?;
                Ok(inner)
            }
            _ => self.error(&["expression"]),
        }
    }
}

/// Parses a token stream into a tree rooted at `FileAST`.
pub fn parse(tokens: &[SourceToken]) -> Result<Ast, ParseError> {
    let mut parser = Parser { tokens, index: 0 };
    let root = parser.translation_unit()?;
    debug_assert!(parser.advance().is_none());
    Ok(Ast::new(root))
}
