//! Expression trees for genetic programming.
//!
//! Trees are size-bounded (7 nodes by default, counting internal nodes and
//! leaves alike) and built from the primitives `+ - * sq plog aq`, feature
//! references, ephemeral constants in [-5, 5], and scaled binary features
//! `x_j * c` that pair a 0/1 column with a coefficient in a single node.
//!
//! Infix grammar (see `to_infix`/`parse_infix`):
//! `expr := term (('+'|'-') term)* ; term := factor ('*' factor)* ;`
//! `factor := <float> | x<j> | sq(expr) | plog(expr) | aq(expr, expr) | '(' expr ')' | '-' factor`

use std::collections::BTreeSet;
use std::fmt::Write as _;

use ndarray::{Array1, Array2};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_MAX_NODES: usize = 7;
pub const CONSTANT_RANGE: (f64, f64) = (-5.0, 5.0);
const PLOG_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ExprError {
    #[error("evaluation produced a non-finite value (NaN/Inf input?)")]
    NonFinite,
    #[error("parse error at index {position}: {message}")]
    Parse { position: usize, message: String },
}

/// Primitive operations. AQ(a,b) = a / sqrt(b^2 + 1); plog(a) = ln(|a| + 1e-9).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Primitive {
    Add,
    Sub,
    Mul,
    Square,
    ProtectedLog,
    Aq,
}

impl Primitive {
    pub const ALL: [Primitive; 6] = [
        Primitive::Add,
        Primitive::Sub,
        Primitive::Mul,
        Primitive::Square,
        Primitive::ProtectedLog,
        Primitive::Aq,
    ];
    pub const BINARY: [Primitive; 4] =
        [Primitive::Add, Primitive::Sub, Primitive::Mul, Primitive::Aq];
    pub const UNARY: [Primitive; 2] = [Primitive::Square, Primitive::ProtectedLog];

    pub fn arity(self) -> usize {
        match self {
            Primitive::Square | Primitive::ProtectedLog => 1,
            _ => 2,
        }
    }
}

/// A tree node; every variant counts as exactly one toward tree size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Op { prim: Primitive, args: Vec<Node> },
    Feature(usize),
    Constant(f64),
    /// `x_j * c` with `j` a 0/1 column; a single node.
    ScaledBinaryFeature { index: usize, coeff: f64 },
}

impl Node {
    pub fn size(&self) -> usize {
        match self {
            Node::Op { args, .. } => 1 + args.iter().map(Node::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Node::Op { prim, .. } => prim.arity(),
            _ => 0,
        }
    }

    fn collect_features(&self, out: &mut BTreeSet<usize>) {
        match self {
            Node::Op { args, .. } => args.iter().for_each(|a| a.collect_features(out)),
            Node::Feature(j) | Node::ScaledBinaryFeature { index: j, .. } => {
                out.insert(*j);
            }
            Node::Constant(_) => {}
        }
    }
}

/// A size-bounded expression tree with cached size and feature set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExprTree {
    root: Node,
    size: usize,
    feature_set: BTreeSet<usize>,
}

impl ExprTree {
    pub fn from_root(root: Node) -> Self {
        let size = root.size();
        let mut feature_set = BTreeSet::new();
        root.collect_features(&mut feature_set);
        Self {
            root,
            size,
            feature_set,
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn feature_set(&self) -> &BTreeSet<usize> {
        &self.feature_set
    }

    /// Evaluate over every row of `features`. Protected operators keep the
    /// output finite for finite inputs; NaN inputs surface as an error.
    pub fn evaluate(&self, features: &Array2<f64>) -> Result<Array1<f64>, ExprError> {
        let out = eval_node(&self.root, features);
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(ExprError::NonFinite)
        }
    }
}

fn eval_node(node: &Node, x: &Array2<f64>) -> Array1<f64> {
    let n = x.nrows();
    match node {
        Node::Feature(j) => x.column(*j).to_owned(),
        Node::Constant(c) => Array1::from_elem(n, *c),
        Node::ScaledBinaryFeature { index, coeff } => x.column(*index).mapv(|v| v * coeff),
        Node::Op { prim, args } => match prim {
            Primitive::Add => eval_node(&args[0], x) + eval_node(&args[1], x),
            Primitive::Sub => eval_node(&args[0], x) - eval_node(&args[1], x),
            Primitive::Mul => eval_node(&args[0], x) * eval_node(&args[1], x),
            Primitive::Square => eval_node(&args[0], x).mapv(|v| v * v),
            Primitive::ProtectedLog => eval_node(&args[0], x).mapv(|v| (v.abs() + PLOG_EPS).ln()),
            Primitive::Aq => {
                let a = eval_node(&args[0], x);
                let b = eval_node(&args[1], x);
                a / b.mapv(|v| (v * v + 1.0).sqrt())
            }
        },
    }
}

/// Tree-generation method for ramped half-and-half.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenMethod {
    Full,
    Grow,
}

fn random_constant<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(CONSTANT_RANGE.0..=CONSTANT_RANGE.1)
}

fn random_leaf<R: Rng>(rng: &mut R, d: usize, binary_columns: &[usize]) -> Node {
    if d == 0 || rng.random_bool(0.5) {
        Node::Constant(random_constant(rng))
    } else {
        let j = rng.random_range(0..d);
        if binary_columns.contains(&j) {
            // 0/1 columns always enter paired with a coefficient.
            Node::ScaledBinaryFeature {
                index: j,
                coeff: random_constant(rng),
            }
        } else {
            Node::Feature(j)
        }
    }
}

fn gen_node<R: Rng>(
    rng: &mut R,
    d: usize,
    binary_columns: &[usize],
    method: GenMethod,
    depth: usize,
) -> Node {
    let make_op = match method {
        _ if depth == 0 => false,
        GenMethod::Full => true,
        GenMethod::Grow => rng.random_bool(0.5),
    };
    if make_op {
        let prim = *Primitive::ALL.choose(rng).unwrap();
        let args = (0..prim.arity())
            .map(|_| gen_node(rng, d, binary_columns, method, depth - 1))
            .collect();
        Node::Op { prim, args }
    } else {
        random_leaf(rng, d, binary_columns)
    }
}

/// Generate a random tree with the given method and depth, retrying (then
/// falling back to a single leaf) to satisfy the node cap.
pub fn random_tree<R: Rng>(
    rng: &mut R,
    d: usize,
    max_nodes: usize,
    binary_columns: &[usize],
    method: GenMethod,
    depth: usize,
) -> ExprTree {
    assert!(max_nodes >= 1);
    for _ in 0..20 {
        let root = gen_node(rng, d, binary_columns, method, depth);
        if root.size() <= max_nodes {
            return ExprTree::from_root(root);
        }
    }
    ExprTree::from_root(random_leaf(rng, d, binary_columns))
}

/// Ramped half-and-half: depth uniform in {1, 2}, method uniform in
/// {full, grow}. Depth 2 full trees have at most 7 nodes, matching the
/// default cap.
pub fn ramped_half_and_half<R: Rng>(
    rng: &mut R,
    d: usize,
    max_nodes: usize,
    binary_columns: &[usize],
) -> ExprTree {
    let depth = rng.random_range(1..=2);
    let method = if rng.random_bool(0.5) {
        GenMethod::Full
    } else {
        GenMethod::Grow
    };
    random_tree(rng, d, max_nodes, binary_columns, method, depth)
}

// Preorder node access helpers.

fn get_node(root: &Node, index: usize) -> &Node {
    fn walk<'a>(node: &'a Node, index: usize, counter: &mut usize) -> Option<&'a Node> {
        if *counter == index {
            return Some(node);
        }
        *counter += 1;
        if let Node::Op { args, .. } = node {
            for a in args {
                if let Some(found) = walk(a, index, counter) {
                    return Some(found);
                }
            }
        }
        None
    }
    walk(root, index, &mut 0).expect("node index in range")
}

fn get_node_mut(root: &mut Node, index: usize) -> &mut Node {
    fn walk<'a>(node: &'a mut Node, index: usize, counter: &mut usize) -> Option<&'a mut Node> {
        if *counter == index {
            return Some(node);
        }
        *counter += 1;
        if let Node::Op { args, .. } = node {
            for a in args {
                if let Some(found) = walk(a, index, counter) {
                    return Some(found);
                }
            }
        }
        None
    }
    walk(root, index, &mut 0).expect("node index in range")
}

fn all_nodes(root: &Node) -> Vec<&Node> {
    fn walk<'a>(node: &'a Node, out: &mut Vec<&'a Node>) {
        out.push(node);
        if let Node::Op { args, .. } = node {
            args.iter().for_each(|a| walk(a, out));
        }
    }
    let mut out = Vec::new();
    walk(root, &mut out);
    out
}

const VARIATION_RETRIES: usize = 10;

/// Replace a uniformly chosen subtree of `a` with a clone of a uniformly
/// chosen subtree of `b`. On repeated size-cap violations, `a` is returned
/// unchanged.
pub fn subtree_crossover<R: Rng>(a: &ExprTree, b: &ExprTree, rng: &mut R, max_nodes: usize) -> ExprTree {
    for _ in 0..VARIATION_RETRIES {
        let target = rng.random_range(0..a.size());
        let donor_idx = rng.random_range(0..b.size());
        let donor = get_node(b.root(), donor_idx).clone();
        let mut root = a.root.clone();
        *get_node_mut(&mut root, target) = donor;
        if root.size() <= max_nodes {
            return ExprTree::from_root(root);
        }
    }
    a.clone()
}

/// Replace a uniformly chosen node of `a` with a same-arity node cloned from
/// `b` (children of the target are kept). If the donor has no compatible
/// node, `a` is returned unchanged.
pub fn node_level_crossover<R: Rng>(a: &ExprTree, b: &ExprTree, rng: &mut R) -> ExprTree {
    let target = rng.random_range(0..a.size());
    let arity = get_node(a.root(), target).arity();
    let donors: Vec<&Node> = all_nodes(b.root())
        .into_iter()
        .filter(|n| n.arity() == arity)
        .collect();
    let Some(&donor) = donors.as_slice().choose(rng) else {
        return a.clone();
    };
    let mut root = a.root.clone();
    let slot = get_node_mut(&mut root, target);
    match (&mut *slot, donor) {
        (Node::Op { prim, .. }, Node::Op { prim: dp, .. }) => *prim = *dp,
        (leaf, donor_leaf) => *leaf = donor_leaf.clone(),
    }
    ExprTree::from_root(root)
}

/// Replace a uniformly chosen node with a fresh random node of the same
/// arity.
pub fn node_level_mutation<R: Rng>(
    a: &ExprTree,
    rng: &mut R,
    d: usize,
    binary_columns: &[usize],
) -> ExprTree {
    let target = rng.random_range(0..a.size());
    let arity = get_node(a.root(), target).arity();
    let mut root = a.root.clone();
    let slot = get_node_mut(&mut root, target);
    match arity {
        0 => *slot = random_leaf(rng, d, binary_columns),
        1 => {
            if let Node::Op { prim, .. } = slot {
                *prim = *Primitive::UNARY.choose(rng).unwrap();
            }
        }
        _ => {
            if let Node::Op { prim, .. } = slot {
                *prim = *Primitive::BINARY.choose(rng).unwrap();
            }
        }
    }
    ExprTree::from_root(root)
}

/// Replace a uniformly chosen subtree with a fresh random subtree that fits
/// the remaining node budget.
pub fn subtree_mutation<R: Rng>(
    a: &ExprTree,
    rng: &mut R,
    d: usize,
    binary_columns: &[usize],
    max_nodes: usize,
) -> ExprTree {
    let target = rng.random_range(0..a.size());
    let removed = get_node(a.root(), target).size();
    let budget = max_nodes - (a.size() - removed);
    let replacement = random_tree(rng, d, budget.max(1), binary_columns, GenMethod::Grow, 2);
    let mut root = a.root.clone();
    *get_node_mut(&mut root, target) = replacement.root;
    let out = ExprTree::from_root(root);
    debug_assert!(out.size() <= max_nodes);
    out
}

/// Perturb constants: with probability `per_node_prob` each constant (and
/// each scaled-binary coefficient) c becomes c + t*|c|*eps, eps ~ N(0,1).
/// Zero constants use c + t*eps so they are not frozen.
pub fn mutate_constants<R: Rng>(
    a: &ExprTree,
    rng: &mut R,
    temperature: f64,
    per_node_prob: f64,
) -> ExprTree {
    assert!(temperature >= 0.0);
    fn walk<R: Rng>(node: &mut Node, rng: &mut R, t: f64, p: f64) {
        match node {
            Node::Constant(c) | Node::ScaledBinaryFeature { coeff: c, .. } => {
                if rng.random_bool(p) {
                    let eps: f64 = StandardNormal.sample(rng);
                    let scale = if *c == 0.0 { t } else { t * c.abs() };
                    *c += scale * eps;
                }
            }
            Node::Op { args, .. } => args.iter_mut().for_each(|a| walk(a, rng, t, p)),
            Node::Feature(_) => {}
        }
    }
    let mut root = a.root.clone();
    walk(&mut root, rng, temperature, per_node_prob);
    ExprTree::from_root(root)
}

// ---- infix serialization ----

fn format_exact(c: f64) -> String {
    // Rust's default f64 Display is shortest-round-trip, so parse(format(c))
    // recovers c bit for bit.
    let s = format!("{c}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

/// Format with 6 significant digits for human-facing reports.
pub fn format_sig6(c: f64) -> String {
    if c == 0.0 {
        return "0".to_string();
    }
    let exp = c.abs().log10().floor() as i32;
    let decimals = (5 - exp).max(0) as usize;
    let s = format!("{c:.decimals$}");
    // trim trailing zeros but keep at least one digit
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn write_infix(node: &Node, names: Option<&[String]>, pretty: bool, out: &mut String) {
    let var = |j: usize| -> String {
        match names {
            Some(names) => names[j].clone(),
            None => format!("x{j}"),
        }
    };
    let num = |c: f64| if pretty { format_sig6(c) } else { format_exact(c) };
    match node {
        Node::Feature(j) => out.push_str(&var(*j)),
        Node::Constant(c) => out.push_str(&num(*c)),
        Node::ScaledBinaryFeature { index, coeff } => {
            let _ = write!(out, "({} * {})", num(*coeff), var(*index));
        }
        Node::Op { prim, args } => match prim {
            Primitive::Add | Primitive::Sub | Primitive::Mul => {
                let op = match prim {
                    Primitive::Add => '+',
                    Primitive::Sub => '-',
                    _ => '*',
                };
                out.push('(');
                write_infix(&args[0], names, pretty, out);
                let _ = write!(out, " {op} ");
                write_infix(&args[1], names, pretty, out);
                out.push(')');
            }
            Primitive::Square | Primitive::ProtectedLog => {
                out.push_str(if *prim == Primitive::Square { "sq(" } else { "plog(" });
                write_infix(&args[0], names, pretty, out);
                out.push(')');
            }
            Primitive::Aq => {
                out.push_str("aq(");
                write_infix(&args[0], names, pretty, out);
                out.push_str(", ");
                write_infix(&args[1], names, pretty, out);
                out.push(')');
            }
        },
    }
}

/// Canonical infix form with exact (round-trip) constants.
pub fn to_infix(tree: &ExprTree) -> String {
    let mut s = String::new();
    write_infix(tree.root(), None, false, &mut s);
    s
}

/// Infix form with column names and 6-significant-digit constants, for
/// reports.
pub fn to_infix_pretty(tree: &ExprTree, column_names: &[String]) -> String {
    let mut s = String::new();
    write_infix(tree.root(), Some(column_names), true, &mut s);
    s
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    d: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Parse {
            position: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{}`", c as char))
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut node = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    node = Node::Op {
                        prim: Primitive::Add,
                        args: vec![node, rhs],
                    };
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    node = Node::Op {
                        prim: Primitive::Sub,
                        args: vec![node, rhs],
                    };
                }
                _ => return Ok(node),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut node = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let rhs = self.factor()?;
            node = Node::Op {
                prim: Primitive::Mul,
                args: vec![node, rhs],
            };
        }
        Ok(node)
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn factor(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            None => self.err("unexpected end of input"),
            Some(b'(') => {
                self.pos += 1;
                let node = self.expr()?;
                self.expect(b')')?;
                Ok(node)
            }
            Some(b'-') => {
                self.pos += 1;
                let inner = self.factor()?;
                Ok(match inner {
                    Node::Constant(c) => Node::Constant(-c),
                    other => Node::Op {
                        prim: Primitive::Sub,
                        args: vec![Node::Constant(0.0), other],
                    },
                })
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident();
                match name.as_str() {
                    "sq" | "plog" => {
                        self.expect(b'(')?;
                        let arg = self.expr()?;
                        self.expect(b')')?;
                        let prim = if name == "sq" {
                            Primitive::Square
                        } else {
                            Primitive::ProtectedLog
                        };
                        Ok(Node::Op {
                            prim,
                            args: vec![arg],
                        })
                    }
                    "aq" => {
                        self.expect(b'(')?;
                        let a = self.expr()?;
                        self.expect(b',')?;
                        let b = self.expr()?;
                        self.expect(b')')?;
                        Ok(Node::Op {
                            prim: Primitive::Aq,
                            args: vec![a, b],
                        })
                    }
                    _ if name.starts_with('x') => {
                        let j: usize = match name[1..].parse() {
                            Ok(j) => j,
                            Err(_) => {
                                self.pos = start;
                                return self.err(format!("unknown identifier `{name}`"));
                            }
                        };
                        if j >= self.d {
                            self.pos = start;
                            return self.err(format!("feature index {j} out of range (d={})", self.d));
                        }
                        Ok(Node::Feature(j))
                    }
                    _ => {
                        self.pos = start;
                        self.err(format!("unknown identifier `{name}`"))
                    }
                }
            }
            Some(c) => self.err(format!("unexpected character `{}`", c as char)),
        }
    }

    fn number(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E') && self.pos > start {
                self.pos += 1;
                if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) => Ok(Node::Constant(v)),
            Err(_) => {
                self.pos = start;
                self.err(format!("invalid number `{text}`"))
            }
        }
    }
}

/// Parse the canonical infix form back into a tree. Feature indices must be
/// below `d`.
pub fn parse_infix(s: &str, d: usize) -> Result<ExprTree, ExprError> {
    let mut p = Parser {
        src: s.as_bytes(),
        pos: 0,
        d,
    };
    let root = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("trailing input");
    }
    Ok(ExprTree::from_root(root))
}
