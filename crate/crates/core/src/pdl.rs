//! Propositional dynamic logic over observation graphs: formulas with
//! programs built from the projection relations, model checking on finite
//! models, canonical sentences of bounded height, and the characterizing
//! sentence of a state, which holds exactly at the states bisimilar to it.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use once_cell::sync::Lazy;
use thiserror::Error;

use crate::graph::{Cobasis, ObsGraph};
use crate::intern::Interner;
use crate::term::Symbol;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PdlError {
    #[error("unknown program label {0}")]
    UnknownLabel(String),
    #[error("unknown atomic proposition {0}")]
    UnknownAtom(String),
    #[error("formula syntax error: {0}")]
    Syntax(String),
}

// ---------------------------------------------------------------------------
// Programs
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ProgramNode {
    Atom(String),
    Seq(Program, Program),
    Union(Program, Program),
    Star(Program),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Program(Arc<ProgramNode>);

impl Program {
    pub fn atom(label: &str) -> Program {
        Program(Arc::new(ProgramNode::Atom(label.to_string())))
    }

    pub fn seq(p: Program, q: Program) -> Program {
        Program(Arc::new(ProgramNode::Seq(p, q)))
    }

    pub fn union(p: Program, q: Program) -> Program {
        Program(Arc::new(ProgramNode::Union(p, q)))
    }

    pub fn star(p: Program) -> Program {
        Program(Arc::new(ProgramNode::Star(p)))
    }

    pub fn node(&self) -> &ProgramNode {
        &self.0
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            ProgramNode::Atom(l) => f.write_str(l),
            ProgramNode::Seq(p, q) => write!(f, "({p};{q})"),
            ProgramNode::Union(p, q) => write!(f, "({p}+{q})"),
            ProgramNode::Star(p) => write!(f, "{p}*"),
        }
    }
}

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

/// Core connectives; the others are derived. `And` keeps its operands in
/// canonical order without duplicates, so structurally equal canonical
/// formulas are the same interned value.
#[derive(PartialEq, Eq, Hash)]
pub enum FormulaNode {
    Atom(Symbol),
    Not(Formula),
    And(Vec<Formula>),
    Box(Program, Formula),
}

static FORMULAS: Lazy<Interner<FormulaNode>> = Lazy::new(Interner::new);

#[derive(Clone, Eq)]
pub struct Formula(Arc<FormulaNode>);

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (Arc::as_ptr(&self.0) as usize).hash(state);
    }
}

impl Formula {
    pub fn node(&self) -> &FormulaNode {
        &self.0
    }

    pub fn atom(a: Symbol) -> Formula {
        Formula(FORMULAS.intern(FormulaNode::Atom(a)))
    }

    pub fn truth() -> Formula {
        Formula(FORMULAS.intern(FormulaNode::And(Vec::new())))
    }

    pub fn falsity() -> Formula {
        Formula::not(Formula::truth())
    }

    pub fn not(f: Formula) -> Formula {
        if let FormulaNode::Not(inner) = f.node() {
            return inner.clone();
        }
        Formula(FORMULAS.intern(FormulaNode::Not(f)))
    }

    /// Conjunction in canonical form: flattened, sorted, deduplicated;
    /// the empty conjunction is truth and singletons collapse.
    pub fn and(parts: Vec<Formula>) -> Formula {
        let mut flat = Vec::new();
        for p in parts {
            match p.node() {
                FormulaNode::And(inner) => flat.extend(inner.iter().cloned()),
                _ => flat.push(p),
            }
        }
        flat.sort_by(structural_cmp);
        flat.dedup();
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        Formula(FORMULAS.intern(FormulaNode::And(flat)))
    }

    pub fn or(parts: Vec<Formula>) -> Formula {
        Formula::not(Formula::and(parts.into_iter().map(Formula::not).collect()))
    }

    pub fn boxed(p: Program, f: Formula) -> Formula {
        Formula(FORMULAS.intern(FormulaNode::Box(p, f)))
    }

    pub fn diamond(p: Program, f: Formula) -> Formula {
        Formula::not(Formula::boxed(p, Formula::not(f)))
    }

    pub fn implies(p: Formula, q: Formula) -> Formula {
        Formula::or(vec![Formula::not(p), q])
    }

    pub fn iff(p: Formula, q: Formula) -> Formula {
        Formula::and(vec![
            Formula::implies(p.clone(), q.clone()),
            Formula::implies(q, p),
        ])
    }

    pub fn parse(text: &str) -> Result<Formula, PdlError> {
        FormulaParser::new(text).parse()
    }
}

fn rank(f: &FormulaNode) -> u8 {
    match f {
        FormulaNode::Atom(_) => 0,
        FormulaNode::Not(_) => 1,
        FormulaNode::And(_) => 2,
        FormulaNode::Box(..) => 3,
    }
}

fn structural_cmp(a: &Formula, b: &Formula) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    match (a.node(), b.node()) {
        (FormulaNode::Atom(x), FormulaNode::Atom(y)) => x.cmp(y),
        (FormulaNode::Not(x), FormulaNode::Not(y)) => structural_cmp(x, y),
        (FormulaNode::And(xs), FormulaNode::And(ys)) => {
            for (x, y) in xs.iter().zip(ys.iter()) {
                match structural_cmp(x, y) {
                    Ordering::Equal => continue,
                    other => return other,
                }
            }
            xs.len().cmp(&ys.len())
        }
        (FormulaNode::Box(p, x), FormulaNode::Box(q, y)) => program_cmp(p, q)
            .then_with(|| structural_cmp(x, y)),
        (x, y) => rank(x).cmp(&rank(y)),
    }
}

fn program_cmp(a: &Program, b: &Program) -> Ordering {
    fn rank(p: &ProgramNode) -> u8 {
        match p {
            ProgramNode::Atom(_) => 0,
            ProgramNode::Seq(..) => 1,
            ProgramNode::Union(..) => 2,
            ProgramNode::Star(_) => 3,
        }
    }
    match (a.node(), b.node()) {
        (ProgramNode::Atom(x), ProgramNode::Atom(y)) => x.cmp(y),
        (ProgramNode::Seq(p1, q1), ProgramNode::Seq(p2, q2))
        | (ProgramNode::Union(p1, q1), ProgramNode::Union(p2, q2)) => {
            program_cmp(p1, p2).then_with(|| program_cmp(q1, q2))
        }
        (ProgramNode::Star(p), ProgramNode::Star(q)) => program_cmp(p, q),
        (x, y) => rank(x).cmp(&rank(y)),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // recover the derived connectives for readability
        if let FormulaNode::And(parts) = self.node() {
            if parts.is_empty() {
                return f.write_str("true");
            }
            let text: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
            return write!(f, "({})", text.join(" & "));
        }
        if let FormulaNode::Not(inner) = self.node() {
            match inner.node() {
                FormulaNode::And(parts) => {
                    if parts.is_empty() {
                        return f.write_str("false");
                    }
                    if parts.len() > 1
                        && parts
                            .iter()
                            .all(|p| matches!(p.node(), FormulaNode::Not(_)))
                    {
                        let text: Vec<String> = parts
                            .iter()
                            .map(|p| match p.node() {
                                FormulaNode::Not(q) => q.to_string(),
                                _ => unreachable!(),
                            })
                            .collect();
                        return write!(f, "({})", text.join(" | "));
                    }
                }
                FormulaNode::Box(p, q) => {
                    if let FormulaNode::Not(inner_q) = q.node() {
                        return write!(f, "<{p}>{inner_q}");
                    }
                }
                _ => {}
            }
            return write!(f, "~{inner}");
        }
        match self.node() {
            FormulaNode::Atom(a) => write!(f, "{a}"),
            FormulaNode::Box(p, q) => write!(f, "[{p}]{q}"),
            _ => unreachable!("handled above"),
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct FormulaParser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> FormulaParser<'a> {
    fn new(text: &'a str) -> Self {
        FormulaParser {
            text: text.as_bytes(),
            pos: 0,
        }
    }

    fn parse(mut self) -> Result<Formula, PdlError> {
        let f = self.iff()?;
        self.ws();
        if self.pos < self.text.len() {
            return Err(PdlError::Syntax(format!(
                "unexpected input at byte {}",
                self.pos
            )));
        }
        Ok(f)
    }

    fn ws(&mut self) {
        while self.pos < self.text.len() && (self.text[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.ws();
        self.text.get(self.pos).map(|&b| b as char)
    }

    fn eat(&mut self, token: &str) -> bool {
        self.ws();
        if self.text[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.ws();
        let start = self.pos;
        while self
            .text
            .get(self.pos)
            .map(|&b| (b as char).is_ascii_alphanumeric() || b == b'_')
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        (self.pos > start)
            .then(|| String::from_utf8(self.text[start..self.pos].to_vec()).unwrap())
    }

    fn iff(&mut self) -> Result<Formula, PdlError> {
        let mut f = self.implication()?;
        while self.eat("<->") {
            let g = self.implication()?;
            f = Formula::iff(f, g);
        }
        Ok(f)
    }

    fn implication(&mut self) -> Result<Formula, PdlError> {
        let f = self.disjunction()?;
        if self.eat("->") {
            let g = self.implication()?;
            return Ok(Formula::implies(f, g));
        }
        Ok(f)
    }

    fn disjunction(&mut self) -> Result<Formula, PdlError> {
        let mut parts = vec![self.conjunction()?];
        while self.peek() == Some('|') {
            self.eat("|");
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::or(parts)
        })
    }

    fn conjunction(&mut self) -> Result<Formula, PdlError> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some('&') {
            self.eat("&");
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::and(parts)
        })
    }

    fn unary(&mut self) -> Result<Formula, PdlError> {
        match self.peek() {
            Some('~') => {
                self.eat("~");
                Ok(Formula::not(self.unary()?))
            }
            Some('[') => {
                self.eat("[");
                let p = self.program()?;
                if !self.eat("]") {
                    return Err(PdlError::Syntax("expected ']'".into()));
                }
                Ok(Formula::boxed(p, self.unary()?))
            }
            Some('<') => {
                self.eat("<");
                let p = self.program()?;
                if !self.eat(">") {
                    return Err(PdlError::Syntax("expected '>'".into()));
                }
                Ok(Formula::diamond(p, self.unary()?))
            }
            Some('(') => {
                self.eat("(");
                let f = self.iff()?;
                if !self.eat(")") {
                    return Err(PdlError::Syntax("expected ')'".into()));
                }
                Ok(f)
            }
            _ => match self.ident() {
                Some(name) if name == "true" => Ok(Formula::truth()),
                Some(name) if name == "false" => Ok(Formula::falsity()),
                Some(name) => Ok(Formula::atom(Symbol::new(&name))),
                None => Err(PdlError::Syntax(format!(
                    "expected a formula at byte {}",
                    self.pos
                ))),
            },
        }
    }

    fn program(&mut self) -> Result<Program, PdlError> {
        let mut p = self.program_seq()?;
        while self.peek() == Some('+') {
            self.eat("+");
            p = Program::union(p, self.program_seq()?);
        }
        Ok(p)
    }

    fn program_seq(&mut self) -> Result<Program, PdlError> {
        let mut p = self.program_star()?;
        while self.peek() == Some(';') {
            self.eat(";");
            p = Program::seq(p, self.program_star()?);
        }
        Ok(p)
    }

    fn program_star(&mut self) -> Result<Program, PdlError> {
        let mut p = match self.peek() {
            Some('(') => {
                self.eat("(");
                let p = self.program()?;
                if !self.eat(")") {
                    return Err(PdlError::Syntax("expected ')' in program".into()));
                }
                p
            }
            _ => {
                let name = self
                    .ident()
                    .ok_or_else(|| PdlError::Syntax("expected a program label".into()))?;
                Program::atom(&name)
            }
        };
        while self.peek() == Some('*') {
            self.eat("*");
            p = Program::star(p);
        }
        Ok(p)
    }
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

/// A finite relational model. Atoms and relations may overlap and relations
/// need not be functions.
#[derive(Clone, Debug)]
pub struct PdlModel {
    pub state_names: Vec<String>,
    pub atoms: BTreeMap<Symbol, BTreeSet<usize>>,
    pub rels: BTreeMap<String, BTreeSet<(usize, usize)>>,
}

impl PdlModel {
    pub fn len(&self) -> usize {
        self.state_names.len()
    }

    /// Declares an atom with an empty extension if it is not present;
    /// needed when comparing models over different output symbol sets.
    pub fn ensure_atom(&mut self, a: Symbol) {
        self.atoms.entry(a).or_default();
    }

    pub fn is_empty(&self) -> bool {
        self.state_names.is_empty()
    }

    pub fn state_by_name(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn labels(&self) -> Vec<String> {
        self.rels.keys().cloned().collect()
    }
}

/// The intended model of an observation graph: one state per node, an atom
/// per output symbol, and a functional relation per projection index, named
/// `even`/`odd` when every node is binary and `p0, p1, ..` otherwise.
pub fn model_of_graph(g: &ObsGraph) -> PdlModel {
    let binary = g.nodes().iter().all(|n| n.succ.len() == 2)
        && !matches!(g.cobasis(), Cobasis::O(_));
    let max_arity = g.nodes().iter().map(|n| n.succ.len()).max().unwrap_or(0);
    let label = |i: usize| {
        if binary {
            ["even", "odd"][i].to_string()
        } else {
            format!("p{i}")
        }
    };
    let mut atoms: BTreeMap<Symbol, BTreeSet<usize>> = BTreeMap::new();
    for (i, node) in g.nodes().iter().enumerate() {
        atoms.entry(node.out.clone()).or_default().insert(i);
    }
    let mut rels: BTreeMap<String, BTreeSet<(usize, usize)>> = BTreeMap::new();
    for i in 0..max_arity {
        rels.insert(label(i), BTreeSet::new());
    }
    for (i, node) in g.nodes().iter().enumerate() {
        for (d, s) in node.succ.iter().enumerate() {
            rels.get_mut(&label(d)).unwrap().insert((i, s.0));
        }
    }
    PdlModel {
        state_names: g.nodes().iter().map(|n| n.name.clone()).collect(),
        atoms,
        rels,
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// The set of states satisfying the formula, by the standard semantics:
/// `;` is relational composition, `+` union, `*` reflexive-transitive
/// closure, and `[p]f` holds where every `p`-successor satisfies `f`.
pub fn eval(model: &PdlModel, formula: &Formula) -> Result<BTreeSet<usize>, PdlError> {
    let mut memo: HashMap<Formula, BTreeSet<usize>> = HashMap::new();
    eval_memo(model, formula, &mut memo)
}

fn eval_memo(
    model: &PdlModel,
    formula: &Formula,
    memo: &mut HashMap<Formula, BTreeSet<usize>>,
) -> Result<BTreeSet<usize>, PdlError> {
    if let Some(hit) = memo.get(formula) {
        return Ok(hit.clone());
    }
    let all: BTreeSet<usize> = (0..model.len()).collect();
    let result = match formula.node() {
        FormulaNode::Atom(a) => model
            .atoms
            .get(a)
            .cloned()
            .ok_or_else(|| PdlError::UnknownAtom(a.to_string()))?,
        FormulaNode::Not(f) => {
            let sat = eval_memo(model, f, memo)?;
            all.difference(&sat).copied().collect()
        }
        FormulaNode::And(parts) => {
            let mut acc = all;
            for p in parts {
                let sat = eval_memo(model, p, memo)?;
                acc = acc.intersection(&sat).copied().collect();
            }
            acc
        }
        FormulaNode::Box(p, f) => {
            let rel = eval_program(model, p)?;
            let sat = eval_memo(model, f, memo)?;
            (0..model.len())
                .filter(|&x| {
                    rel.iter()
                        .filter(|(a, _)| *a == x)
                        .all(|(_, b)| sat.contains(b))
                })
                .collect()
        }
    };
    memo.insert(formula.clone(), result.clone());
    Ok(result)
}

pub fn eval_program(
    model: &PdlModel,
    program: &Program,
) -> Result<BTreeSet<(usize, usize)>, PdlError> {
    match program.node() {
        ProgramNode::Atom(l) => model
            .rels
            .get(l)
            .cloned()
            .ok_or_else(|| PdlError::UnknownLabel(l.clone())),
        ProgramNode::Seq(p, q) => {
            let (rp, rq) = (eval_program(model, p)?, eval_program(model, q)?);
            let mut out = BTreeSet::new();
            for &(a, b) in &rp {
                for &(b2, c) in &rq {
                    if b == b2 {
                        out.insert((a, c));
                    }
                }
            }
            Ok(out)
        }
        ProgramNode::Union(p, q) => {
            let mut out = eval_program(model, p)?;
            out.extend(eval_program(model, q)?);
            Ok(out)
        }
        ProgramNode::Star(p) => {
            let step = eval_program(model, p)?;
            let mut out: BTreeSet<(usize, usize)> =
                (0..model.len()).map(|x| (x, x)).collect();
            loop {
                let mut grew = false;
                let snapshot: Vec<(usize, usize)> = out.iter().copied().collect();
                for &(a, b) in &snapshot {
                    for &(b2, c) in &step {
                        if b == b2 && out.insert((a, c)) {
                            grew = true;
                        }
                    }
                }
                if !grew {
                    return Ok(out);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Canonical sentences and characterization
// ---------------------------------------------------------------------------

/// The canonical sentence of height `h` for state `a`: at height 0 the
/// conjunction of the atoms satisfied at `a` and the negations of the rest;
/// at height `h+1`, for every relation, a diamond per successor sentence and
/// a box over their disjunction, conjoined with the height-0 description.
pub fn canonical_phi(model: &PdlModel, a: usize, h: usize) -> Formula {
    canonical_levels(model, h)[h][a].clone()
}

fn phi_zero(model: &PdlModel, a: usize) -> Formula {
    let mut parts = Vec::new();
    for (atom, set) in &model.atoms {
        let f = Formula::atom(atom.clone());
        parts.push(if set.contains(&a) { f } else { Formula::not(f) });
    }
    Formula::and(parts)
}

/// Sentence vectors for heights `0..=h`.
fn canonical_levels(model: &PdlModel, h: usize) -> Vec<Vec<Formula>> {
    let n = model.len();
    let mut levels = vec![(0..n).map(|a| phi_zero(model, a)).collect::<Vec<_>>()];
    for _ in 0..h {
        let prev = levels.last().unwrap();
        let next = (0..n)
            .map(|a| successor_description(model, a, prev, Some(phi_zero(model, a))))
            .collect();
        levels.push(next);
    }
    levels
}

/// For every relation: diamonds over the successor sentences and a box over
/// their disjunction; optionally conjoined with a base description.
fn successor_description(
    model: &PdlModel,
    a: usize,
    level: &[Formula],
    base: Option<Formula>,
) -> Formula {
    let mut parts = Vec::new();
    for (label, rel) in &model.rels {
        let prog = Program::atom(label);
        let successors: BTreeSet<usize> = rel
            .iter()
            .filter(|(x, _)| *x == a)
            .map(|(_, y)| y)
            .copied()
            .collect();
        let mut branch: Vec<Formula> = Vec::new();
        for &b in &successors {
            branch.push(Formula::diamond(prog.clone(), level[b].clone()));
        }
        branch.push(Formula::boxed(
            prog,
            Formula::or(successors.iter().map(|&b| level[b].clone()).collect()),
        ));
        parts.push(Formula::and(branch));
    }
    if let Some(b) = base {
        parts.push(b);
    }
    Formula::and(parts)
}

/// The least height at which the partition of states by canonical sentences
/// stops refining.
pub fn stability_height(model: &PdlModel) -> usize {
    let mut h = 0;
    let mut levels = canonical_levels(model, 1);
    loop {
        let p0 = partition_ids(&levels[h]);
        let p1 = partition_ids(&levels[h + 1]);
        if p0 == p1 {
            return h;
        }
        h += 1;
        let prev = levels.last().unwrap();
        let next = (0..model.len())
            .map(|a| successor_description(model, a, prev, Some(phi_zero(model, a))))
            .collect();
        levels.push(next);
    }
}

fn partition_ids(level: &[Formula]) -> Vec<usize> {
    let mut ids: HashMap<Formula, usize> = HashMap::new();
    level
        .iter()
        .map(|f| {
            let fresh = ids.len();
            *ids.entry(f.clone()).or_insert(fresh)
        })
        .collect()
}

/// The characterizing sentence of state `x`: a state of any model built from
/// an observation graph satisfies it exactly when it is bisimilar to `x`.
pub fn characterize(model: &PdlModel, x: usize) -> Formula {
    let h_star = stability_height(model);
    let levels = canonical_levels(model, h_star);
    let at_h = &levels[h_star];

    let mut psi = Vec::new();
    for a in 0..model.len() {
        psi.push(Formula::implies(
            at_h[a].clone(),
            successor_description(model, a, at_h, None),
        ));
    }
    let labels = model.labels();
    let everywhere = Program::star(
        labels[1..]
            .iter()
            .fold(Program::atom(&labels[0]), |p, l| {
                Program::union(p, Program::atom(l))
            }),
    );
    Formula::and(vec![
        at_h[x].clone(),
        Formula::boxed(everywhere, Formula::and(psi)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{minimize, ObsGraph};
    use crate::spec::ZipSpec;

    fn morse_model() -> (ObsGraph, PdlModel) {
        let spec = ZipSpec::parse("M = 0:X; X = 1:zip(X,Y); Y = 0:zip(Y,X)").unwrap();
        let g = ObsGraph::of_spec(&spec).unwrap();
        let m = model_of_graph(&g);
        (g, m)
    }

    fn names(m: &PdlModel, set: &BTreeSet<usize>) -> Vec<String> {
        let mut v: Vec<String> = set.iter().map(|&i| m.state_names[i].clone()).collect();
        v.sort();
        v
    }

    #[test]
    fn model_of_the_morse_graph() {
        let (_, m) = morse_model();
        assert_eq!(m.len(), 3);
        assert_eq!(
            names(&m, &m.atoms[&Symbol::new("0")]),
            vec!["0:X".to_string(), "M".to_string()]
        );
        assert_eq!(
            names(&m, &m.atoms[&Symbol::new("1")]),
            vec!["1:Y".to_string()]
        );
        assert_eq!(m.labels(), vec!["even".to_string(), "odd".to_string()]);
        // relations are functions here
        for rel in m.rels.values() {
            assert_eq!(rel.len(), 3);
        }
    }

    #[test]
    fn eval_basic_sentences() {
        let (_, m) = morse_model();
        // everywhere exactly one of 0, 1
        let chi = Formula::parse("[(even+odd)*](0 <-> ~1)").unwrap();
        assert_eq!(eval(&m, &chi).unwrap().len(), 3);
        let not_zero = Formula::parse("~0").unwrap();
        assert_eq!(names(&m, &eval(&m, &not_zero).unwrap()), vec!["1:Y"]);
    }

    #[test]
    fn the_displayed_morse_sentence_holds_at_the_root() {
        let (_, m) = morse_model();
        let phi = "(0 & ~1 & <even>0 & [even]0 & <odd>1 & [odd]1)";
        let psi = "(~0 & 1 & <even>1 & [even]1 & <odd>0 & [odd]0)";
        let phi_m = Formula::parse(&format!("{phi} & [(even+odd)*]({phi} | {psi})")).unwrap();
        let sat = eval(&m, &phi_m).unwrap();
        assert_eq!(names(&m, &sat), vec!["0:X", "M"]);
        assert!(sat.contains(&m.state_by_name("M").unwrap()));
    }

    #[test]
    fn canonical_sentences() {
        let (_, m) = morse_model();
        let root = m.state_by_name("M").unwrap();
        let h0 = canonical_phi(&m, root, 0);
        assert_eq!(h0.to_string(), "(0 & ~1)");

        // height 1 agrees with the displayed sentence on this model
        let h1 = canonical_phi(&m, root, 1);
        let displayed =
            Formula::parse("0 & ~1 & <even>0 & [even]0 & <odd>1 & [odd]1").unwrap();
        assert_eq!(
            eval(&m, &h1).unwrap(),
            eval(&m, &displayed).unwrap()
        );

        // at height 2 the sentence classes are the bisimulation classes
        let ids: Vec<Formula> = (0..m.len()).map(|a| canonical_phi(&m, a, 2)).collect();
        let m_idx = m.state_by_name("M").unwrap();
        let x_idx = m.state_by_name("0:X").unwrap();
        let y_idx = m.state_by_name("1:Y").unwrap();
        assert_eq!(ids[m_idx], ids[x_idx]);
        assert_ne!(ids[m_idx], ids[y_idx]);
    }

    #[test]
    fn stability_height_is_bounded_by_the_state_count() {
        let (_, m) = morse_model();
        assert!(stability_height(&m) <= m.len());
    }

    #[test]
    fn characterization_matches_bisimilarity() {
        let (g1, m1) = morse_model();
        let phi = characterize(&m1, m1.state_by_name("M").unwrap());
        // soundness: x satisfies its own characterizing sentence
        assert!(eval(&m1, &phi)
            .unwrap()
            .contains(&m1.state_by_name("M").unwrap()));

        // the 4-node variant's root satisfies it
        let spec2 = ZipSpec::parse(
            "N = 0:zip(1:W,1:U); U = 1:zip(V,U); V = 0:zip(V,1:U); W = zip(N,V)",
        )
        .unwrap();
        let g2 = ObsGraph::of_spec(&spec2).unwrap();
        let m2 = model_of_graph(&g2);
        let sat = eval(&m2, &phi).unwrap();
        assert!(sat.contains(&(g2.root().0)));

        // the alternating stream's root does not
        let alt = ZipSpec::parse("alt = zip(zeros,ones); zeros = 0:zeros; ones = 1:ones")
            .unwrap();
        let g3 = ObsGraph::of_spec(&alt).unwrap();
        let m3 = model_of_graph(&g3);
        let sat = eval(&m3, &phi).unwrap();
        assert!(!sat.contains(&(g3.root().0)));
        let _ = g1;
    }

    #[test]
    fn characterization_of_a_constant_stream() {
        let c0 = ZipSpec::parse("A = 0:A").unwrap();
        let g = ObsGraph::of_spec(&c0).unwrap();
        let m = model_of_graph(&g);
        let phi = characterize(&m, g.root().0);
        // every state of another constant-0 model satisfies it
        let other = ZipSpec::parse("B = 0:zip(B,B)").unwrap();
        let g2 = ObsGraph::of_spec(&other).unwrap();
        let m2 = model_of_graph(&g2);
        assert_eq!(eval(&m2, &phi).unwrap().len(), m2.len());
    }

    #[test]
    fn quotient_morphisms_preserve_satisfaction() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};

        let (g, m) = morse_model();
        let minimized = minimize(&g);
        let mq = model_of_graph(&minimized);
        // the quotient map sends a node to its block; recover it by matching
        // interpretations via output+successor structure of minimize()
        let class_of = |i: usize| -> usize {
            // nodes agree with their block representative on all sentences;
            // identify the block by checking bisimilarity through minimize's
            // deterministic naming (representative keeps its name)
            let name = &m.state_names[i];
            mq.state_by_name(name).unwrap_or_else(|| {
                // non-representative: M collapses into the 0:X block
                let g_i = g.node_by_name(name).unwrap();
                let out = g.out(g_i);
                mq.atoms[out]
                    .iter()
                    .copied()
                    .next()
                    .expect("block with same output exists")
            })
        };

        let mut rng = StdRng::seed_from_u64(7);
        let atoms = [Symbol::new("0"), Symbol::new("1")];
        let labels = ["even", "odd"];
        fn random_formula(
            rng: &mut StdRng,
            depth: usize,
            atoms: &[Symbol],
            labels: &[&str],
        ) -> Formula {
            if depth == 0 || rng.gen_range(0..4) == 0 {
                return Formula::atom(atoms[rng.gen_range(0..atoms.len())].clone());
            }
            match rng.gen_range(0..4) {
                0 => Formula::not(random_formula(rng, depth - 1, atoms, labels)),
                1 => Formula::and(vec![
                    random_formula(rng, depth - 1, atoms, labels),
                    random_formula(rng, depth - 1, atoms, labels),
                ]),
                2 => {
                    let p = Program::atom(labels[rng.gen_range(0..labels.len())]);
                    Formula::boxed(p, random_formula(rng, depth - 1, atoms, labels))
                }
                _ => {
                    let p = Program::star(Program::union(
                        Program::atom(labels[0]),
                        Program::atom(labels[1]),
                    ));
                    Formula::diamond(p, random_formula(rng, depth - 1, atoms, labels))
                }
            }
        }

        for _ in 0..50 {
            let f = random_formula(&mut rng, 4, &atoms, &labels);
            let sat = eval(&m, &f).unwrap();
            let sat_q = eval(&mq, &f).unwrap();
            for &x in &sat {
                assert!(
                    sat_q.contains(&class_of(x)),
                    "morphism does not preserve {f}"
                );
            }
        }
    }

    #[test]
    fn unknown_names_are_reported() {
        let (_, m) = morse_model();
        let f = Formula::parse("2").unwrap();
        assert_eq!(eval(&m, &f).unwrap_err(), PdlError::UnknownAtom("2".into()));
        let f = Formula::parse("[up]0").unwrap();
        assert_eq!(
            eval(&m, &f).unwrap_err(),
            PdlError::UnknownLabel("up".into())
        );
    }

    #[test]
    fn parser_round_trips_through_display() {
        for text in ["0 & ~1", "<even>0", "[(even+odd)*](0 | 1)", "0 -> 1", "0 <-> ~1"] {
            let f = Formula::parse(text).unwrap();
            let again = Formula::parse(&f.to_string()).unwrap();
            assert_eq!(f, again, "{text}");
        }
    }

    #[test]
    fn self_loop_model_keeps_its_loops() {
        let spec = ZipSpec::parse("A = 0:zip(A,A)").unwrap();
        let g = ObsGraph::of_spec(&spec).unwrap();
        let m = model_of_graph(&g);
        for rel in m.rels.values() {
            assert!(rel.iter().any(|(a, b)| a == b));
        }
    }
}
