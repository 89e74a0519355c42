//! Odd codes for finite transitive membership structures.
//!
//! A structure is coded by choosing a surjection `f` from indices onto its
//! elements (one element may have arbitrarily many indices) and recording
//! `{pair(i, j) | f(i) is a member of f(j)}`. Decoding recovers the
//! structure up to membership isomorphism by collapsing bisimilar
//! indices. Equality inside and across codes, structural validation, and
//! first-order truth over the decoded quotient all live here.
//!
//! The codes in this module are finite (finitely many indices coding a
//! hereditarily finite set); that is the desk-scale restriction of a
//! construction whose original form codes infinite structures with index
//! set omega.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::isa::{pair, unpair};

/// A hereditarily finite set in canonical form: children sorted and
/// duplicate-free, so structural equality is extensional equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HfSet {
    children: Vec<HfSet>,
}

impl HfSet {
    pub fn empty() -> Self {
        HfSet { children: Vec::new() }
    }

    /// Build a set from members, collapsing duplicates.
    pub fn new(mut children: Vec<HfSet>) -> Self {
        children.sort();
        children.dedup();
        HfSet { children }
    }

    pub fn singleton(member: HfSet) -> Self {
        HfSet { children: vec![member] }
    }

    /// The von Neumann natural `n`.
    pub fn von_neumann(n: usize) -> Self {
        let mut sets: Vec<HfSet> = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            sets.push(HfSet::new(sets.clone()));
        }
        sets.pop().unwrap()
    }

    pub fn children(&self) -> &[HfSet] {
        &self.children
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    pub fn contains(&self, member: &HfSet) -> bool {
        self.children.binary_search(member).is_ok()
    }

    pub fn rank(&self) -> usize {
        self.children.iter().map(|c| c.rank() + 1).max().unwrap_or(0)
    }

    /// Every set occurring in the construction of `self`, including
    /// `self`: the least transitive set containing `self` as an element.
    pub fn hereditary_members(&self) -> Vec<HfSet> {
        let mut out = Vec::new();
        self.collect_members(&mut out);
        out.sort();
        out.dedup();
        out
    }

    pub fn hereditary_size(&self) -> usize {
        self.hereditary_members().len()
    }

    fn collect_members(&self, out: &mut Vec<HfSet>) {
        out.push(self.clone());
        for child in &self.children {
            child.collect_members(out);
        }
    }
}

impl fmt::Display for HfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, child) in self.children.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{child}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for HfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HfParseError {
    #[error("unexpected character {0:?} at byte {1}")]
    UnexpectedChar(char, usize),
    #[error("unbalanced braces")]
    Unbalanced,
    #[error("trailing input at byte {0}")]
    Trailing(usize),
}

impl FromStr for HfSet {
    type Err = HfParseError;

    /// Brace literals: `{}`, `{{}}`, `{{},{{}}}`. Whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes: Vec<u8> = s.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
        let (set, consumed) = parse_braces(&bytes, 0)?;
        if consumed != bytes.len() {
            return Err(HfParseError::Trailing(consumed));
        }
        Ok(set)
    }
}

fn parse_braces(bytes: &[u8], start: usize) -> Result<(HfSet, usize), HfParseError> {
    if bytes.get(start) != Some(&b'{') {
        return Err(match bytes.get(start) {
            Some(&b) => HfParseError::UnexpectedChar(b as char, start),
            None => HfParseError::Unbalanced,
        });
    }
    let mut pos = start + 1;
    let mut children = Vec::new();
    loop {
        match bytes.get(pos) {
            Some(&b'}') => return Ok((HfSet::new(children), pos + 1)),
            Some(&b'{') => {
                let (child, next) = parse_braces(bytes, pos)?;
                children.push(child);
                pos = next;
                match bytes.get(pos) {
                    Some(&b',') => pos += 1,
                    Some(&b'}') => {}
                    Some(&b) => return Err(HfParseError::UnexpectedChar(b as char, pos)),
                    None => return Err(HfParseError::Unbalanced),
                }
            }
            Some(&b) => return Err(HfParseError::UnexpectedChar(b as char, pos)),
            None => return Err(HfParseError::Unbalanced),
        }
    }
}

/// A finite odd code: `index_count` indices and the set of pair numbers
/// recording membership between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OddCode {
    index_count: usize,
    pairs: Vec<u64>,
}

/// Structural verdict on a code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeCheck {
    Ok,
    /// The membership digraph has a cycle.
    IllFounded,
    /// Some recorded membership involves an element with no index of its
    /// own (a pair component at or beyond `index_count`).
    NotTransitive,
}

impl fmt::Display for CodeCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeCheck::Ok => write!(f, "ok"),
            CodeCheck::IllFounded => write!(f, "ill-founded"),
            CodeCheck::NotTransitive => write!(f, "not-transitive"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodeError {
    #[error("index {index} out of range (code has {count} indices)")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("code is ill-founded")]
    IllFounded,
    #[error("code is not transitive: an element has a member lacking its own index")]
    NotTransitive,
    #[error("surjection entry {index} is not an element of the structure")]
    NotInStructure { index: usize },
    #[error("surjection misses the element {element}")]
    MissingElement { element: String },
    #[error("malformed code file: {0}")]
    BadFile(String),
}

/// Encode a structure: `f` lists the elements of the least transitive set
/// containing `x` (duplicates allowed, order free) and must cover it.
pub fn encode(x: &HfSet, f: &[HfSet]) -> Result<OddCode, CodeError> {
    let domain = x.hereditary_members();
    for (index, element) in f.iter().enumerate() {
        if domain.binary_search(element).is_err() {
            return Err(CodeError::NotInStructure { index });
        }
    }
    for element in &domain {
        if !f.contains(element) {
            return Err(CodeError::MissingElement { element: element.to_string() });
        }
    }
    let mut pairs = Vec::new();
    for (i, fi) in f.iter().enumerate() {
        for (j, fj) in f.iter().enumerate() {
            if fj.contains(fi) {
                pairs.push(pair(&(i as u64), &(j as u64)));
            }
        }
    }
    pairs.sort_unstable();
    Ok(OddCode { index_count: f.len(), pairs })
}

/// Encode with the canonical duplicate-free surjection: the hereditary
/// members in their natural order.
pub fn encode_canonical(x: &HfSet) -> OddCode {
    encode(x, &x.hereditary_members()).expect("canonical enumeration is a surjection")
}

/// The decoded quotient of a code: the set each index denotes, the
/// bisimulation classes, and the distinct sets of the structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    /// Per index, the hereditarily finite set it denotes.
    pub sets: Vec<HfSet>,
    /// Index classes: indices denoting the same set, grouped and sorted,
    /// groups ordered by their set.
    pub classes: Vec<Vec<usize>>,
    /// The distinct sets, aligned with `classes`.
    pub structure: Vec<HfSet>,
}

impl OddCode {
    pub fn new(index_count: usize, pairs: impl IntoIterator<Item = u64>) -> Self {
        let mut pairs: Vec<u64> = pairs.into_iter().collect();
        pairs.sort_unstable();
        pairs.dedup();
        OddCode { index_count, pairs }
    }

    pub fn index_count(&self) -> usize {
        self.index_count
    }

    pub fn pairs(&self) -> &[u64] {
        &self.pairs
    }

    /// Membership digraph: `members[j]` lists the `i` with `f(i) in f(j)`.
    pub fn membership(&self) -> Result<Vec<Vec<usize>>, CodeError> {
        let mut members = vec![Vec::new(); self.index_count];
        for p in &self.pairs {
            let (i, j) = unpair(p);
            let (i, j) = (i as usize, j as usize);
            if i >= self.index_count || j >= self.index_count {
                return Err(CodeError::NotTransitive);
            }
            members[j].push(i);
        }
        Ok(members)
    }

    /// Validate well-foundedness and transitivity.
    pub fn check(&self) -> CodeCheck {
        let members = match self.membership() {
            Ok(m) => m,
            Err(_) => return CodeCheck::NotTransitive,
        };
        // Cycle search, iterative three-colour depth-first walk.
        let mut colour = vec![0u8; self.index_count];
        for start in 0..self.index_count {
            if colour[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            colour[start] = 1;
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                if *next < members[node].len() {
                    let child = members[node][*next];
                    *next += 1;
                    match colour[child] {
                        0 => {
                            colour[child] = 1;
                            stack.push((child, 0));
                        }
                        1 => return CodeCheck::IllFounded,
                        _ => {}
                    }
                } else {
                    colour[node] = 2;
                    stack.pop();
                }
            }
        }
        CodeCheck::Ok
    }

    /// Decode to the quotient structure. Building canonical sets performs
    /// the bisimulation collapse: indices with the same decoded set are
    /// exactly the bisimilar ones, duplicates included.
    pub fn decode(&self) -> Result<Decoded, CodeError> {
        match self.check() {
            CodeCheck::Ok => {}
            CodeCheck::IllFounded => return Err(CodeError::IllFounded),
            CodeCheck::NotTransitive => return Err(CodeError::NotTransitive),
        }
        let members = self.membership()?;
        let mut sets: Vec<Option<HfSet>> = vec![None; self.index_count];
        for index in 0..self.index_count {
            decode_index(index, &members, &mut sets);
        }
        let sets: Vec<HfSet> = sets.into_iter().map(|s| s.unwrap()).collect();
        let mut grouped: BTreeMap<HfSet, Vec<usize>> = BTreeMap::new();
        for (index, set) in sets.iter().enumerate() {
            grouped.entry(set.clone()).or_default().push(index);
        }
        let (structure, classes): (Vec<_>, Vec<_>) = grouped.into_iter().unzip();
        Ok(Decoded { sets, classes, structure })
    }

    /// Do indices `i` and `j` denote extensionally equal sets?
    pub fn eq_within(&self, i: usize, j: usize) -> Result<bool, CodeError> {
        self.bounds(i)?;
        self.bounds(j)?;
        let decoded = self.decode()?;
        Ok(decoded.sets[i] == decoded.sets[j])
    }

    /// Cross-code extensional equality: does index `i` of `self` denote
    /// the same set as index `j` of `other`?
    pub fn eq_across(&self, other: &OddCode, i: usize, j: usize) -> Result<bool, CodeError> {
        self.bounds(i)?;
        other.bounds(j)?;
        Ok(self.decode()?.sets[i] == other.decode()?.sets[j])
    }

    fn bounds(&self, index: usize) -> Result<(), CodeError> {
        if index < self.index_count {
            Ok(())
        } else {
            Err(CodeError::IndexOutOfRange { index, count: self.index_count })
        }
    }

    /// Parse the two-line file format: `n=<count>` then space-separated
    /// pair numbers (the second line may be absent or empty).
    pub fn parse_text(text: &str) -> Result<Self, CodeError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| CodeError::BadFile("missing n=<count> header".into()))?;
        let count = header
            .trim()
            .strip_prefix("n=")
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| CodeError::BadFile(format!("bad header {header:?}")))?;
        let mut pairs = Vec::new();
        for line in lines {
            for token in line.split_whitespace() {
                let value: u64 = token
                    .parse()
                    .map_err(|_| CodeError::BadFile(format!("bad pair number {token:?}")))?;
                pairs.push(value);
            }
        }
        Ok(OddCode::new(count, pairs))
    }
}

impl fmt::Display for OddCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={}", self.index_count)?;
        let mut first = true;
        for p in &self.pairs {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        Ok(())
    }
}

fn decode_index(index: usize, members: &[Vec<usize>], sets: &mut Vec<Option<HfSet>>) -> HfSet {
    if let Some(set) = &sets[index] {
        return set.clone();
    }
    let children = members[index]
        .iter()
        .map(|&m| decode_index(m, members, sets))
        .collect();
    let set = HfSet::new(children);
    sets[index] = Some(set.clone());
    set
}

impl Decoded {
    /// The class id of an index.
    pub fn class_of(&self, index: usize) -> usize {
        self.structure
            .binary_search(&self.sets[index])
            .expect("every index has a class")
    }

    /// The element of maximal rank, when unique; for a code produced by
    /// [`encode`] this is the encoded set itself.
    pub fn top(&self) -> Option<&HfSet> {
        let max_rank = self.structure.iter().map(HfSet::rank).max()?;
        let mut tops = self.structure.iter().filter(|s| s.rank() == max_rank);
        match (tops.next(), tops.next()) {
            (Some(top), None) => Some(top),
            _ => None,
        }
    }
}

/// First-order formulas over membership structures: `in(x,y)`, `eq(x,y)`,
/// `!`, `&`, `|`, `->`, `E x.`, `A x.`, parentheses. `E`, `A`, `in` and
/// `eq` are reserved words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    In(String, String),
    Eq(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::In(x, y) => write!(f, "in({x},{y})"),
            Formula::Eq(x, y) => write!(f, "eq({x},{y})"),
            Formula::Not(inner) => write!(f, "!{inner}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Exists(v, inner) => write!(f, "E {v}. {inner}"),
            Formula::Forall(v, inner) => write!(f, "A {v}. {inner}"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("parse error at byte {at}: {message}")]
    Parse { at: usize, message: String },
    #[error("unbound variable {0:?}")]
    UnboundVariable(String),
    #[error("assignment index {index} out of range ({count} indices)")]
    AssignmentOutOfRange { index: usize, count: usize },
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// Parse one formula.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let tokens = tokenize(text)?;
    let mut parser = FormulaParser { tokens, pos: 0 };
    let formula = parser.implies()?;
    if parser.pos != parser.tokens.len() {
        let at = parser.tokens[parser.pos].1;
        return Err(FormulaError::Parse { at, message: "trailing input".into() });
    }
    Ok(formula)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Bang,
    Amp,
    Pipe,
    Arrow,
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let b = bytes[pos];
        match b {
            b' ' | b'\t' => pos += 1,
            b'(' => {
                tokens.push((Token::LParen, pos));
                pos += 1;
            }
            b')' => {
                tokens.push((Token::RParen, pos));
                pos += 1;
            }
            b',' => {
                tokens.push((Token::Comma, pos));
                pos += 1;
            }
            b'.' => {
                tokens.push((Token::Dot, pos));
                pos += 1;
            }
            b'!' => {
                tokens.push((Token::Bang, pos));
                pos += 1;
            }
            b'&' => {
                tokens.push((Token::Amp, pos));
                pos += 1;
            }
            b'|' => {
                tokens.push((Token::Pipe, pos));
                pos += 1;
            }
            b'-' => {
                if bytes.get(pos + 1) == Some(&b'>') {
                    tokens.push((Token::Arrow, pos));
                    pos += 2;
                } else {
                    return Err(FormulaError::Parse { at: pos, message: "expected ->".into() });
                }
            }
            b if b.is_ascii_alphabetic() || b == b'_' => {
                let start = pos;
                while pos < bytes.len()
                    && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_')
                {
                    pos += 1;
                }
                tokens.push((Token::Ident(text[start..pos].to_string()), start));
            }
            other => {
                return Err(FormulaError::Parse {
                    at: pos,
                    message: format!("unexpected character {:?}", other as char),
                })
            }
        }
    }
    Ok(tokens)
}

struct FormulaParser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl FormulaParser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn at(&self) -> usize {
        self.tokens.get(self.pos).map_or(usize::MAX, |(_, at)| *at)
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<(), FormulaError> {
        if self.peek() == Some(&token) {
            self.pos += 1;
            Ok(())
        } else {
            Err(FormulaError::Parse { at: self.at(), message: format!("expected {what}") })
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, FormulaError> {
        match self.peek() {
            Some(Token::Ident(name)) if !is_reserved(name) => {
                let name = name.clone();
                self.pos += 1;
                Ok(name)
            }
            _ => Err(FormulaError::Parse { at: self.at(), message: format!("expected {what}") }),
        }
    }

    fn implies(&mut self) -> Result<Formula, FormulaError> {
        let left = self.disjunction()?;
        if self.peek() == Some(&Token::Arrow) {
            self.pos += 1;
            let right = self.implies()?;
            Ok(Formula::Implies(Box::new(left), Box::new(right)))
        } else {
            Ok(left)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut left = self.conjunction()?;
        while self.peek() == Some(&Token::Pipe) {
            self.pos += 1;
            let right = self.conjunction()?;
            left = Formula::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut left = self.unary()?;
        while self.peek() == Some(&Token::Amp) {
            self.pos += 1;
            let right = self.unary()?;
            left = Formula::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        match self.peek() {
            Some(Token::Bang) => {
                self.pos += 1;
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.implies()?;
                self.expect(Token::RParen, ")")?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "E" | "A" => {
                    let exists = name == "E";
                    self.pos += 1;
                    let variable = self.ident("variable")?;
                    self.expect(Token::Dot, ". after quantified variable")?;
                    let body = Box::new(self.implies()?);
                    Ok(if exists {
                        Formula::Exists(variable, body)
                    } else {
                        Formula::Forall(variable, body)
                    })
                }
                "in" | "eq" => {
                    let membership = name == "in";
                    self.pos += 1;
                    self.expect(Token::LParen, "(")?;
                    let x = self.ident("variable")?;
                    self.expect(Token::Comma, ",")?;
                    let y = self.ident("variable")?;
                    self.expect(Token::RParen, ")")?;
                    Ok(if membership { Formula::In(x, y) } else { Formula::Eq(x, y) })
                }
                _ => Err(FormulaError::Parse {
                    at: self.at(),
                    message: format!("unexpected identifier {name:?}"),
                }),
            },
            _ => Err(FormulaError::Parse { at: self.at(), message: "expected formula".into() }),
        }
    }
}

fn is_reserved(name: &str) -> bool {
    matches!(name, "E" | "A" | "in" | "eq")
}

/// Tarskian truth over the decoded quotient of a code. Quantifiers range
/// over the finitely many bisimulation classes; the assignment maps free
/// variables to representative indices.
pub fn eval_formula(
    code: &OddCode,
    formula: &Formula,
    assignment: &BTreeMap<String, usize>,
) -> Result<bool, FormulaError> {
    let decoded = code.decode()?;
    let mut env: BTreeMap<String, usize> = BTreeMap::new();
    for (variable, &index) in assignment {
        if index >= code.index_count() {
            return Err(FormulaError::AssignmentOutOfRange {
                index,
                count: code.index_count(),
            });
        }
        env.insert(variable.clone(), decoded.class_of(index));
    }
    eval_classes(&decoded, formula, &mut env)
}

/// [`eval_formula`] for sentences.
pub fn eval_sentence(code: &OddCode, formula: &Formula) -> Result<bool, FormulaError> {
    eval_formula(code, formula, &BTreeMap::new())
}

fn eval_classes(
    decoded: &Decoded,
    formula: &Formula,
    env: &mut BTreeMap<String, usize>,
) -> Result<bool, FormulaError> {
    let lookup = |env: &BTreeMap<String, usize>, v: &String| {
        env.get(v).copied().ok_or_else(|| FormulaError::UnboundVariable(v.clone()))
    };
    match formula {
        Formula::In(x, y) => {
            let a = lookup(env, x)?;
            let b = lookup(env, y)?;
            Ok(decoded.structure[b].contains(&decoded.structure[a]))
        }
        Formula::Eq(x, y) => Ok(lookup(env, x)? == lookup(env, y)?),
        Formula::Not(inner) => Ok(!eval_classes(decoded, inner, env)?),
        Formula::And(a, b) => {
            Ok(eval_classes(decoded, a, env)? && eval_classes(decoded, b, env)?)
        }
        Formula::Or(a, b) => {
            Ok(eval_classes(decoded, a, env)? || eval_classes(decoded, b, env)?)
        }
        Formula::Implies(a, b) => {
            Ok(!eval_classes(decoded, a, env)? || eval_classes(decoded, b, env)?)
        }
        Formula::Exists(v, body) => {
            let saved = env.get(v).copied();
            let mut result = false;
            for class in 0..decoded.structure.len() {
                env.insert(v.clone(), class);
                if eval_classes(decoded, body, env)? {
                    result = true;
                    break;
                }
            }
            restore(env, v, saved);
            Ok(result)
        }
        Formula::Forall(v, body) => {
            let saved = env.get(v).copied();
            let mut result = true;
            for class in 0..decoded.structure.len() {
                env.insert(v.clone(), class);
                if !eval_classes(decoded, body, env)? {
                    result = false;
                    break;
                }
            }
            restore(env, v, saved);
            Ok(result)
        }
    }
}

fn restore(env: &mut BTreeMap<String, usize>, variable: &str, saved: Option<usize>) {
    match saved {
        Some(class) => {
            env.insert(variable.to_string(), class);
        }
        None => {
            env.remove(variable);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hf(s: &str) -> HfSet {
        s.parse().unwrap()
    }

    #[test]
    fn hf_canonical_form() {
        assert_eq!(hf("{{},{}}"), hf("{{}}"), "duplicates collapse");
        assert_eq!(hf("{{},{{}}}"), hf("{{{}},{}}"), "order is immaterial");
        assert_eq!(HfSet::von_neumann(2), hf("{{},{{}}}"));
        assert_eq!(hf("{}").rank(), 0);
        assert_eq!(HfSet::von_neumann(3).rank(), 3);
        assert_eq!(HfSet::von_neumann(2).hereditary_size(), 3);
        assert_eq!(hf("{{},{{}}}").to_string(), "{{},{{}}}");
        assert!(" { { } , } ".parse::<HfSet>().is_err());
        assert!("{{}".parse::<HfSet>().is_err());
    }

    #[test]
    fn encode_simple_structures() {
        // {0} with f(0) = 0, f(1) = {0}: the single membership 0 in 1.
        let x = hf("{{}}");
        let code = encode(&x, &[HfSet::empty(), x.clone()]).unwrap();
        assert_eq!(code.pairs(), &[pair(&0u64, &1)]);
        // The one-element structure of 0 alone has no memberships.
        let code = encode(&HfSet::empty(), &[HfSet::empty()]).unwrap();
        assert!(code.pairs().is_empty());
    }

    #[test]
    fn duplicated_representatives_collapse() {
        // f(0) = f(1) = 0, f(2) = {0}.
        let x = hf("{{}}");
        let f = vec![HfSet::empty(), HfSet::empty(), x.clone()];
        let code = encode(&x, &f).unwrap();
        assert_eq!(code.pairs(), &[pair(&0u64, &2), pair(&1u64, &2)]);
        let decoded = code.decode().unwrap();
        assert_eq!(decoded.classes, vec![vec![0, 1], vec![2]]);
        assert!(code.eq_within(0, 1).unwrap());
        assert!(!code.eq_within(0, 2).unwrap());
        assert!(code.eq_within(2, 2).unwrap());
        assert!(matches!(
            code.eq_within(0, 3),
            Err(CodeError::IndexOutOfRange { index: 3, count: 3 })
        ));
    }

    #[test]
    fn encode_validates_the_surjection() {
        let x = hf("{{}}");
        assert!(matches!(
            encode(&x, &[x.clone()]),
            Err(CodeError::MissingElement { .. })
        ));
        assert!(matches!(
            encode(&x, &[HfSet::empty(), x.clone(), hf("{{{}}}")]),
            Err(CodeError::NotInStructure { index: 2 })
        ));
    }

    #[test]
    fn decode_recovers_the_encoded_set() {
        for x in ["{}", "{{}}", "{{},{{}}}", "{{{}},{}}"] {
            let x = hf(x);
            let decoded = encode_canonical(&x).decode().unwrap();
            assert_eq!(decoded.top(), Some(&x), "round-trip for {x}");
        }
    }

    #[test]
    fn check_classifies() {
        assert_eq!(OddCode::new(1, [pair(&0u64, &0)]).check(), CodeCheck::IllFounded);
        assert_eq!(OddCode::new(2, [pair(&0u64, &1)]).check(), CodeCheck::Ok);
        // {{0}} coded with indices for {0} and {{0}} only: the membership
        // of 0 in {0} would need a third index.
        assert_eq!(
            OddCode::new(2, [pair(&0u64, &1), pair(&2u64, &0)]).check(),
            CodeCheck::NotTransitive
        );
        // Longer cycle.
        assert_eq!(
            OddCode::new(3, [pair(&0u64, &1), pair(&1u64, &2), pair(&2u64, &0)]).check(),
            CodeCheck::IllFounded
        );
        assert!(matches!(
            OddCode::new(1, [pair(&0u64, &0)]).decode(),
            Err(CodeError::IllFounded)
        ));
    }

    #[test]
    fn eq_across_codes() {
        let two = HfSet::von_neumann(2);
        let one = hf("{{}}");
        let c2 = encode_canonical(&two);
        let c1 = encode_canonical(&one);
        // Hereditary members sort 0 first in both structures.
        assert!(c1.eq_across(&c2, 0, 0).unwrap());
        // {0} appears in both structures.
        assert!(c1.eq_across(&c2, 1, 1).unwrap());
        assert!(!c1.eq_across(&c2, 1, 2).unwrap());
        // Self-join consistency.
        for i in 0..c2.index_count() {
            for j in 0..c2.index_count() {
                assert_eq!(
                    c2.eq_across(&c2, i, j).unwrap(),
                    c2.eq_within(i, j).unwrap()
                );
            }
        }
    }

    #[test]
    fn eq_within_is_a_congruence() {
        let one = hf("{{}}");
        let x = hf("{{},{{}}}");
        let f = vec![
            HfSet::empty(),
            one.clone(),
            HfSet::empty(),
            x.clone(),
            one.clone(),
        ];
        let code = encode(&x, &f).unwrap();
        let n = code.index_count();
        for i in 0..n {
            assert!(code.eq_within(i, i).unwrap());
            for j in 0..n {
                assert_eq!(code.eq_within(i, j).unwrap(), code.eq_within(j, i).unwrap());
            }
        }
        // Congruence: membership respects classes.
        let members = code.membership().unwrap();
        let decoded = code.decode().unwrap();
        for j1 in 0..n {
            for j2 in 0..n {
                if decoded.sets[j1] != decoded.sets[j2] {
                    continue;
                }
                for i in 0..n {
                    let in1 = members[j1].iter().any(|&m| decoded.sets[m] == decoded.sets[i]);
                    let in2 = members[j2].iter().any(|&m| decoded.sets[m] == decoded.sets[i]);
                    assert_eq!(in1, in2);
                }
            }
        }
    }

    #[test]
    fn code_file_round_trip() {
        let code = encode_canonical(&HfSet::von_neumann(2));
        let text = code.to_string();
        assert!(text.starts_with("n=3\n"));
        assert_eq!(OddCode::parse_text(&text).unwrap(), code);
        assert!(matches!(
            OddCode::parse_text("pairs only"),
            Err(CodeError::BadFile(_))
        ));
        assert_eq!(
            OddCode::parse_text("n=1\n").unwrap(),
            OddCode::new(1, [])
        );
    }

    #[test]
    fn formula_parsing() {
        let f = parse_formula("E x. A y. !(in(y,x))").unwrap();
        assert_eq!(f.to_string(), "E x. A y. !in(y,x)");
        // Implication is right-associative, & binds tighter than |.
        let f = parse_formula("in(x,y) -> in(y,z) -> in(x,z)").unwrap();
        assert_eq!(f.to_string(), "(in(x,y) -> (in(y,z) -> in(x,z)))");
        let f = parse_formula("in(x,y) & in(y,x) | eq(x,y)").unwrap();
        assert_eq!(f.to_string(), "((in(x,y) & in(y,x)) | eq(x,y))");
        assert!(parse_formula("E in. in(in,in)").is_err());
        assert!(parse_formula("in(x y)").is_err());
        assert!(parse_formula("").is_err());
        assert!(parse_formula("in(x,y) extra").is_err());
    }

    #[test]
    fn formula_evaluation() {
        let code = encode_canonical(&HfSet::von_neumann(3));
        // An empty set exists.
        let empty_exists = parse_formula("E x. A y. !in(y,x)").unwrap();
        assert!(eval_sentence(&code, &empty_exists).unwrap());
        // A maximal element exists: not everything is a member of something.
        let all_members = parse_formula("A x. E y. in(x,y)").unwrap();
        assert!(!eval_sentence(&code, &all_members).unwrap());
        // Extensionality holds in every decoded quotient.
        let ext = parse_formula(
            "A x. A y. ((A z. ((in(z,x) -> in(z,y)) & (in(z,y) -> in(z,x)))) -> eq(x,y))",
        )
        .unwrap();
        assert!(eval_sentence(&code, &ext).unwrap());
        // Free variables come from the assignment by index.
        let f = parse_formula("in(x,y)").unwrap();
        let mut assignment = BTreeMap::new();
        assignment.insert("x".to_string(), 0usize);
        assignment.insert("y".to_string(), 1usize);
        assert!(eval_formula(&code, &f, &assignment).unwrap());
        assert!(matches!(
            eval_sentence(&code, &f),
            Err(FormulaError::UnboundVariable(_))
        ));
    }

    #[test]
    fn evaluation_respects_duplicate_indices() {
        let x = hf("{{}}");
        let code = encode(&x, &[HfSet::empty(), HfSet::empty(), x.clone()]).unwrap();
        // Quantifiers range over classes, not indices: exactly two
        // distinct elements.
        let two_elements = parse_formula("E x. E y. !eq(x,y)").unwrap();
        assert!(eval_sentence(&code, &two_elements).unwrap());
        let three = parse_formula("E x. E y. E z. (!eq(x,y) & !eq(x,z) & !eq(y,z))").unwrap();
        assert!(!eval_sentence(&code, &three).unwrap());
    }
}
