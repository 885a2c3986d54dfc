//! AST data model and the JSON interchange format.
//!
//! An [`AstNode`] is a token (`kind` plus up to three content parameters)
//! with an ordered list of children. Nodes are immutable once built; the
//! [`Ast`] wrapper caches node count and depth.
//!
//! Levels are counted from the root, which sits at level 0.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum number of content parameters a token may carry.
pub const MAX_PARAMS: usize = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AstError {
    #[error("token kind must be non-empty")]
    EmptyKind,
    #[error("token `{kind}` has {count} params (at most {MAX_PARAMS} allowed)")]
    TooManyParams { kind: String, count: usize },
    #[error("token `{kind}` has an empty parameter at position {index}")]
    EmptyParam { kind: String, index: usize },
}

#[derive(Debug, Error)]
pub enum InterchangeError {
    #[error("malformed interchange document at line {line}, column {column}: {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation at {path}: {source}")]
    Schema {
        path: String,
        #[source]
        source: AstError,
    },
}

/// One token of the syntax tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AstNode {
    kind: String,
    params: Vec<String>,
    children: Vec<AstNode>,
}

impl AstNode {
    pub fn new<K, P, S>(kind: K, params: P, children: Vec<AstNode>) -> Result<Self, AstError>
    where
        K: Into<String>,
        P: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let kind = kind.into();
        let params: Vec<String> = params.into_iter().map(Into::into).collect();
        validate_token(&kind, &params)?;
        Ok(Self {
            kind,
            params,
            children,
        })
    }

    /// A node without children.
    pub fn leaf<K, P, S>(kind: K, params: P) -> Result<Self, AstError>
    where
        K: Into<String>,
        P: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(kind, params, Vec::new())
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn children(&self) -> &[AstNode] {
        &self.children
    }

    /// Number of nodes in the subtree rooted here.
    pub fn subtree_size(&self) -> usize {
        let mut count = 0;
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            count += 1;
            stack.extend(node.children.iter());
        }
        count
    }
}

impl fmt::Display for AstNode {
    /// Renders the token as `(Kind: p1, p2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.kind)?;
        if !self.params.is_empty() {
            write!(f, ": {}", self.params.join(", "))?;
        }
        write!(f, ")")
    }
}

/// Parameters are non-empty so the codebook file can tell "no params" from
/// a single empty one.
pub(crate) fn validate_token(kind: &str, params: &[String]) -> Result<(), AstError> {
    if kind.is_empty() {
        return Err(AstError::EmptyKind);
    }
    if params.len() > MAX_PARAMS {
        return Err(AstError::TooManyParams {
            kind: kind.to_string(),
            count: params.len(),
        });
    }
    if let Some(index) = params.iter().position(String::is_empty) {
        return Err(AstError::EmptyParam {
            kind: kind.to_string(),
            index,
        });
    }
    Ok(())
}

/// A whole tree with cached measurements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ast {
    root: AstNode,
    node_count: usize,
    depth: usize,
}

impl Ast {
    pub fn new(root: AstNode) -> Self {
        let mut node_count = 0;
        let mut depth = 0;
        for (level, _) in bfs(&root) {
            node_count += 1;
            depth = depth.max(level);
        }
        Self {
            root,
            node_count,
            depth,
        }
    }

    pub fn root(&self) -> &AstNode {
        &self.root
    }

    pub fn into_root(self) -> AstNode {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Level of the deepest node.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of nodes at each level, root first.
    pub fn level_widths(&self) -> Vec<usize> {
        let mut widths = vec![0; self.depth + 1];
        for (level, _) in self.bfs() {
            widths[level] += 1;
        }
        widths
    }

    /// Largest level width.
    pub fn max_level_width(&self) -> usize {
        self.level_widths().into_iter().max().unwrap_or(0)
    }

    /// Breadth-first walk yielding `(level, node)`; children in stored order.
    pub fn bfs(&self) -> Bfs<'_> {
        bfs(&self.root)
    }
}

impl From<AstNode> for Ast {
    fn from(root: AstNode) -> Self {
        Ast::new(root)
    }
}

pub struct Bfs<'a> {
    queue: VecDeque<(usize, &'a AstNode)>,
}

impl<'a> Iterator for Bfs<'a> {
    type Item = (usize, &'a AstNode);

    fn next(&mut self) -> Option<Self::Item> {
        let (level, node) = self.queue.pop_front()?;
        self.queue
            .extend(node.children.iter().map(|child| (level + 1, child)));
        Some((level, node))
    }
}

fn bfs(root: &AstNode) -> Bfs<'_> {
    Bfs {
        queue: VecDeque::from([(0, root)]),
    }
}

pub fn depth(ast: &Ast) -> usize {
    ast.depth()
}

pub fn level_widths(ast: &Ast) -> Vec<usize> {
    ast.level_widths()
}

// Interchange: {"kind": "...", "params": [...], "children": [...]}

#[derive(Serialize, Deserialize)]
struct RawNode {
    kind: String,
    #[serde(default)]
    params: Vec<String>,
    #[serde(default)]
    children: Vec<RawNode>,
}

#[derive(Serialize)]
struct NodeRef<'a> {
    kind: &'a str,
    params: &'a [String],
    children: Vec<NodeRef<'a>>,
}

impl<'a> From<&'a AstNode> for NodeRef<'a> {
    fn from(node: &'a AstNode) -> Self {
        NodeRef {
            kind: &node.kind,
            params: &node.params,
            children: node.children.iter().map(NodeRef::from).collect(),
        }
    }
}

fn from_raw(raw: RawNode, path: &mut String) -> Result<AstNode, InterchangeError> {
    validate_token(&raw.kind, &raw.params).map_err(|source| InterchangeError::Schema {
        path: path.clone(),
        source,
    })?;
    let mut children = Vec::with_capacity(raw.children.len());
    for (i, child) in raw.children.into_iter().enumerate() {
        let mark = path.len();
        path.push_str(&format!(".children[{i}]"));
        children.push(from_raw(child, path)?);
        path.truncate(mark);
    }
    Ok(AstNode {
        kind: raw.kind,
        params: raw.params,
        children,
    })
}

/// Parses an interchange document. Missing `params`/`children` default to
/// empty. Nesting deeper than serde_json's limit (about 64 tree levels) is
/// rejected as malformed.
pub fn read_interchange(text: &str) -> Result<Ast, InterchangeError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw = RawNode::deserialize(&mut de)
        .and_then(|raw| de.end().map(|_| raw))
        .map_err(|e| InterchangeError::Malformed {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    let mut path = String::from("$");
    Ok(Ast::new(from_raw(raw, &mut path)?))
}

/// Canonical compact form: every node carries all three keys in the order
/// `kind`, `params`, `children`.
pub fn write_interchange(ast: &Ast) -> String {
    serde_json::to_string(&NodeRef::from(ast.root())).expect("AST serialization is infallible")
}

/// Indented variant of [`write_interchange`] for human consumption.
pub fn write_interchange_pretty(ast: &Ast) -> String {
    serde_json::to_string_pretty(&NodeRef::from(ast.root()))
        .expect("AST serialization is infallible")
}
