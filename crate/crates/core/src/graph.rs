//! Observation graphs: rooted deterministic graphs whose nodes carry a head
//! symbol and one successor per projection of the cobasis in force.
//!
//! The same carrier serves three cobases. Under `N(k)` the successors of a
//! node are its `proj_{0,k} .. proj_{k-1,k}` derivatives, under `O(k)` its
//! `proj_{1,k} .. proj_{k,k}` derivatives, and under `Mix` each node has its
//! own arity. Graphs built from specifications have R-normal forms as nodes;
//! two graphs define the same stream exactly when they are bisimilar, which
//! a union-find product check decides in near-linear time.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{solve_all, AnalysisError};
use crate::semantics::{head_nf, rnf, EvalError, RewriteBudget, StreamEval};
use crate::spec::{Dialect, ZipSpec};
use crate::term::{Symbol, Term, TermNode, VarId};
use crate::transform::{flatten, FlatSpec, TransformError};

#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

/// The family of observers the graph edges stand for.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Cobasis {
    /// `<proj_{0,k}, .., proj_{k-1,k}>`
    N(usize),
    /// `<proj_{1,k}, .., proj_{k,k}>`
    O(usize),
    /// node-dependent arity, `<proj_{0,k(s)}, .., proj_{k(s)-1,k(s)}>`
    Mix,
}

impl std::fmt::Display for Cobasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cobasis::N(k) => write!(f, "N({k})"),
            Cobasis::O(k) => write!(f, "O({k})"),
            Cobasis::Mix => write!(f, "Mix"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub name: String,
    pub out: Symbol,
    pub succ: Vec<NodeId>,
}

#[derive(Clone, Debug)]
pub struct ObsGraph {
    cobasis: Cobasis,
    root: NodeId,
    nodes: Vec<Node>,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("specification is not productive")]
    NotProductive,
    #[error("observation graphs are not defined for zip-pi specifications")]
    PiDialectUnsupported,
    #[error("graphs use different cobases: {left} vs {right}")]
    CobasisMismatch { left: Cobasis, right: Cobasis },
    #[error("graph is not zero-invariant at node {0}: its 0-successor has a different output")]
    NotZeroInvariant(String),
    #[error("specifications have different zip arities: {left} vs {right}")]
    DifferentK { left: usize, right: usize },
    #[error("specifications use different alphabets")]
    AlphabetMismatch,
    #[error("equivalence decision needs zip-k specifications, got {0}; use prefix comparison instead")]
    NotZipK(Dialect),
    #[error("graph construction exceeded {0} nodes")]
    TooLarge(usize),
    #[error("malformed graph description: {0}")]
    BadDescription(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

const NODE_LIMIT: usize = 100_000;

impl ObsGraph {
    pub fn new(cobasis: Cobasis, root: NodeId, nodes: Vec<Node>) -> Result<ObsGraph, GraphError> {
        let g = ObsGraph {
            cobasis,
            root,
            nodes,
        };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<(), GraphError> {
        if self.nodes.is_empty() || self.root.0 >= self.nodes.len() {
            return Err(GraphError::BadDescription("missing root node".into()));
        }
        for node in &self.nodes {
            if node.succ.iter().any(|s| s.0 >= self.nodes.len()) {
                return Err(GraphError::BadDescription(format!(
                    "edge of {} points outside the graph",
                    node.name
                )));
            }
            let ok = match self.cobasis {
                Cobasis::N(k) | Cobasis::O(k) => node.succ.len() == k && k >= 2,
                Cobasis::Mix => node.succ.len() >= 2,
            };
            if !ok {
                return Err(GraphError::BadDescription(format!(
                    "node {} has {} successors, incompatible with cobasis {}",
                    node.name,
                    node.succ.len(),
                    self.cobasis
                )));
            }
        }
        Ok(())
    }

    pub fn cobasis(&self) -> Cobasis {
        self.cobasis
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn out(&self, id: NodeId) -> &Symbol {
        &self.nodes[id.0].out
    }

    pub fn succ(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.0].succ
    }

    pub fn arity(&self, id: NodeId) -> usize {
        self.nodes[id.0].succ.len()
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes
            .iter()
            .position(|n| n.name == name)
            .map(NodeId)
    }

    /// Follows a digit path from the root, least significant digit first.
    pub fn walk(&self, path: &[usize]) -> Option<NodeId> {
        let mut at = self.root;
        for &d in path {
            at = *self.succ(at).get(d)?;
        }
        Some(at)
    }

    /// Builds the observation graph of a productive zip-k or zip-mix
    /// specification. Nodes are the R-normal forms of iterated projections
    /// of the root; node labels are the terms themselves. Specifications
    /// with zip-free cycles or unary zips are flattened first, since their
    /// projections have no normal forms.
    pub fn of_spec(spec: &ZipSpec) -> Result<ObsGraph, GraphError> {
        if spec.dialect() == Dialect::ZipPi {
            return Err(GraphError::PiDialectUnsupported);
        }
        if !crate::analysis::is_productive(spec) {
            return Err(GraphError::NotProductive);
        }
        let mut arities = Vec::new();
        for (_, t) in spec.equations() {
            t.zip_arities(&mut arities);
        }
        let needs_flatten = arities.iter().any(|&a| a < 2) || has_zip_free_cycle(spec);
        if needs_flatten {
            let flat = flatten(spec)?;
            build_from_spec(flat.spec())
        } else {
            build_from_spec(spec)
        }
    }

    /// Builds the observation graph of a flat productive specification.
    pub fn of_flat_spec(flat: &FlatSpec) -> Result<ObsGraph, GraphError> {
        if !crate::analysis::is_productive(flat.spec()) {
            return Err(GraphError::NotProductive);
        }
        build_from_spec(flat.spec())
    }
}

fn has_zip_free_cycle(spec: &ZipSpec) -> bool {
    let chain: HashMap<VarId, VarId> = spec
        .equations()
        .iter()
        .filter_map(|(v, t)| {
            let mut t = t.clone();
            loop {
                match t.node() {
                    TermNode::Var(w) => return Some((v.clone(), w.clone())),
                    TermNode::Cons(_, rest) => t = rest.clone(),
                    _ => return None,
                }
            }
        })
        .collect();
    for start in chain.keys() {
        let mut seen = HashSet::new();
        let mut v = start.clone();
        while let Some(next) = chain.get(&v) {
            if !seen.insert(v.clone()) {
                return true;
            }
            v = next.clone();
        }
    }
    false
}

/// Arity of the first zip symbol in the tree unfolding of `t`.
fn first_zip_arity(spec: &ZipSpec, t: &Term) -> Result<usize, GraphError> {
    let mut seen: HashSet<VarId> = HashSet::new();
    let mut t = t.clone();
    loop {
        match t.node() {
            TermNode::Zip(args) => return Ok(args.len()),
            TermNode::Cons(_, rest) => t = rest.clone(),
            TermNode::Var(v) => {
                if !seen.insert(v.clone()) {
                    return Err(GraphError::NotProductive);
                }
                t = spec
                    .rhs(v)
                    .cloned()
                    .ok_or_else(|| GraphError::BadDescription(format!("no equation for {v}")))?;
            }
            _ => return Err(GraphError::PiDialectUnsupported),
        }
    }
}

fn build_from_spec(spec: &ZipSpec) -> Result<ObsGraph, GraphError> {
    let budget = RewriteBudget::default();
    let cobasis = match spec.dialect() {
        Dialect::ZipK(k) => Cobasis::N(k.max(2)),
        Dialect::ZipMix => Cobasis::Mix,
        Dialect::ZipPi => return Err(GraphError::PiDialectUnsupported),
    };
    let root_term = Term::var(spec.root().clone());
    let mut ids: HashMap<Term, usize> = HashMap::new();
    let mut terms: Vec<Term> = vec![root_term.clone()];
    ids.insert(root_term, 0);
    let mut nodes: Vec<Node> = Vec::new();
    let mut at = 0;
    while at < terms.len() {
        let t = terms[at].clone();
        let out = head_nf(spec, &t, budget)?;
        let k = match cobasis {
            Cobasis::N(k) => k,
            _ => first_zip_arity(spec, &t)?,
        };
        let mut succ = Vec::with_capacity(k);
        for i in 0..k {
            let derivative = rnf(spec, &Term::proj(i as u64, k as u64, t.clone()), budget)?;
            let next = ids.len();
            let id = *ids.entry(derivative.clone()).or_insert_with(|| {
                terms.push(derivative);
                next
            });
            succ.push(NodeId(id));
            if terms.len() > NODE_LIMIT {
                return Err(GraphError::TooLarge(NODE_LIMIT));
            }
        }
        nodes.push(Node {
            name: t.to_string(),
            out,
            succ,
        });
        at += 1;
    }
    ObsGraph::new(cobasis, NodeId(0), nodes)
}

// ---------------------------------------------------------------------------
// Interpretation
// ---------------------------------------------------------------------------

/// Position `n` of the stream defined by an `N(k)` or mix graph: follow the
/// edge `n mod k`, continue with `n div k`, output on reaching 0. Requires
/// zero-consistency, which holds for every graph this module builds.
pub fn interpret_ngraph(g: &ObsGraph, n: u64) -> Symbol {
    interpret_ngraph_from(g, g.root(), n)
}

pub fn interpret_ngraph_from(g: &ObsGraph, start: NodeId, mut n: u64) -> Symbol {
    debug_assert!(!matches!(g.cobasis(), Cobasis::O(_)));
    let mut at = start;
    while n > 0 {
        let k = g.arity(at) as u64;
        at = g.succ(at)[(n % k) as usize];
        n /= k;
    }
    g.out(at).clone()
}

/// Position `n` of the stream defined by an `O(k)` graph, via the bijective
/// base-k digits `i in 1..=k`.
pub fn interpret_ograph(g: &ObsGraph, mut n: u64) -> Symbol {
    let k = match g.cobasis() {
        Cobasis::O(k) => k as u64,
        _ => panic!("interpret_ograph needs an O(k) graph"),
    };
    let mut at = g.root();
    while n > 0 {
        let i = ((n - 1) % k) + 1;
        at = g.succ(at)[(i - 1) as usize];
        n = (n - i) / k;
    }
    g.out(at).clone()
}

// ---------------------------------------------------------------------------
// Minimization
// ---------------------------------------------------------------------------

/// Quotient by the coarsest bisimulation: partition refinement starting from
/// output and arity, refining by successor blocks. Interpretation is
/// unchanged.
pub fn minimize(g: &ObsGraph) -> ObsGraph {
    let n = g.len();
    let mut block: Vec<usize> = vec![0; n];
    {
        let mut first: Vec<((&Symbol, usize), usize)> = Vec::new();
        for (i, node) in g.nodes().iter().enumerate() {
            let key = (&node.out, node.succ.len());
            match first.iter().find(|(k, _)| *k == key) {
                Some((_, b)) => block[i] = *b,
                None => {
                    let b = first.len();
                    first.push((key, b));
                    block[i] = b;
                }
            }
        }
    }
    loop {
        let mut sig_ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let mut next_block = vec![0; n];
        for i in 0..n {
            let sig = (
                block[i],
                g.nodes()[i].succ.iter().map(|s| block[s.0]).collect::<Vec<_>>(),
            );
            let fresh = sig_ids.len();
            next_block[i] = *sig_ids.entry(sig).or_insert(fresh);
        }
        let stable = (0..n).all(|i| {
            (0..n).all(|j| (block[i] == block[j]) == (next_block[i] == next_block[j]))
        });
        block = next_block;
        if stable {
            break;
        }
    }

    // quotient, blocks ordered by their first member
    let mut repr_of_block: HashMap<usize, usize> = HashMap::new();
    let mut order: Vec<usize> = Vec::new();
    for i in 0..n {
        repr_of_block.entry(block[i]).or_insert_with(|| {
            order.push(block[i]);
            i
        });
    }
    let renumber: HashMap<usize, usize> =
        order.iter().enumerate().map(|(new, &b)| (b, new)).collect();
    let nodes = order
        .iter()
        .map(|&b| {
            let repr = repr_of_block[&b];
            let node = &g.nodes()[repr];
            Node {
                name: node.name.clone(),
                out: node.out.clone(),
                succ: node
                    .succ
                    .iter()
                    .map(|s| NodeId(renumber[&block[s.0]]))
                    .collect(),
            }
        })
        .collect();
    ObsGraph::new(g.cobasis(), NodeId(renumber[&block[g.root().0]]), nodes)
        .expect("quotient preserves well-formedness")
}

// ---------------------------------------------------------------------------
// Bisimilarity
// ---------------------------------------------------------------------------

/// Outcome of a bisimilarity check: a bisimulation containing the root pair,
/// or a concrete witness that the graphs define different streams.
#[derive(Clone, Debug)]
pub enum BisimWitness {
    Bisimilar {
        /// Pairs related by the constructed bisimulation, as node ids of the
        /// two graphs.
        relation: Vec<(NodeId, NodeId)>,
    },
    DifferentOutput {
        /// A position where the two streams differ.
        index: BigUint,
        left: Symbol,
        right: Symbol,
    },
    /// Mix graphs only: a reachable pair with different branching. The
    /// streams may still be equal; this check does not identify streams
    /// across different base structures.
    DifferentArity {
        path: Vec<usize>,
        left: NodeId,
        right: NodeId,
        left_arity: usize,
        right_arity: usize,
    },
}

#[derive(Clone, Debug)]
pub struct BisimResult {
    pub witness: BisimWitness,
    /// Node pairs processed; the work measure of the union-find product
    /// construction.
    pub pairs_processed: usize,
}

impl BisimResult {
    pub fn is_bisimilar(&self) -> bool {
        matches!(self.witness, BisimWitness::Bisimilar { .. })
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Decides whether two graphs over the same cobasis define the same stream,
/// by the union-find product construction. On failure the access path of the
/// offending pair is converted back to a stream position through the
/// cobasis numeration.
pub fn bisimilar(g1: &ObsGraph, g2: &ObsGraph) -> Result<BisimResult, GraphError> {
    if g1.cobasis() != g2.cobasis() {
        return Err(GraphError::CobasisMismatch {
            left: g1.cobasis(),
            right: g2.cobasis(),
        });
    }
    let n1 = g1.len();
    let mut uf = UnionFind::new(n1 + g2.len());
    // trace of scheduled pairs: (left, right, parent index in trace, digit)
    let mut trace: Vec<(NodeId, NodeId, Option<(usize, usize)>)> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    trace.push((g1.root(), g2.root(), None));
    queue.push_back(0);
    let mut pairs_processed = 0;

    while let Some(idx) = queue.pop_front() {
        pairs_processed += 1;
        let (l, r, _) = trace[idx];
        if g1.out(l) != g2.out(r) {
            let path = path_of(&trace, idx);
            let index = position_of_path(g1, &path);
            return Ok(BisimResult {
                witness: BisimWitness::DifferentOutput {
                    index,
                    left: g1.out(l).clone(),
                    right: g2.out(r).clone(),
                },
                pairs_processed,
            });
        }
        if g1.arity(l) != g2.arity(r) {
            return Ok(BisimResult {
                witness: BisimWitness::DifferentArity {
                    path: path_of(&trace, idx),
                    left: l,
                    right: r,
                    left_arity: g1.arity(l),
                    right_arity: g2.arity(r),
                },
                pairs_processed,
            });
        }
        if !uf.union(l.0, n1 + r.0) {
            continue;
        }
        for d in 0..g1.arity(l) {
            let pair = (g1.succ(l)[d], g2.succ(r)[d], Some((idx, d)));
            trace.push(pair);
            queue.push_back(trace.len() - 1);
        }
    }

    // the union-find classes restricted to cross pairs form a bisimulation
    let mut relation = Vec::new();
    for l in 0..n1 {
        for r in 0..g2.len() {
            if uf.find(l) == uf.find(n1 + r) {
                relation.push((NodeId(l), NodeId(r)));
            }
        }
    }
    Ok(BisimResult {
        witness: BisimWitness::Bisimilar { relation },
        pairs_processed,
    })
}

fn path_of(trace: &[(NodeId, NodeId, Option<(usize, usize)>)], mut idx: usize) -> Vec<usize> {
    let mut rev = Vec::new();
    while let (_, _, Some((parent, digit))) = trace[idx] {
        rev.push(digit);
        idx = parent;
    }
    rev.reverse();
    rev // least significant digit first
}

/// Converts an access path (digits least significant first) into the stream
/// position observed at its end, using the numeration of the cobasis.
fn position_of_path(g: &ObsGraph, path: &[usize]) -> BigUint {
    match g.cobasis() {
        Cobasis::O(k) => {
            let mut acc = BigUint::from(0u32);
            for &d in path.iter().rev() {
                acc = acc * k + (d + 1);
            }
            acc
        }
        _ => {
            // trailing zero digits do not change the observed output on
            // zero-consistent graphs
            let mut digits = path.to_vec();
            while digits.last() == Some(&0) {
                digits.pop();
            }
            let mut acc = BigUint::from(0u32);
            let mut bases = Vec::with_capacity(digits.len());
            let mut at = g.root();
            for &d in &digits {
                bases.push(g.arity(at));
                at = g.succ(at)[d];
            }
            for (&d, &b) in digits.iter().zip(bases.iter()).rev() {
                acc = acc * b + d;
            }
            acc
        }
    }
}

// ---------------------------------------------------------------------------
// Equivalence of specifications
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct EquivMatch {
    pub left: usize,
    pub right: usize,
    /// Related node pairs, by node name.
    pub relation: Vec<(String, String)>,
}

#[derive(Clone, Debug)]
pub struct EquivReport {
    pub equivalent: bool,
    pub left_solutions: usize,
    pub right_solutions: usize,
    pub matches: Vec<EquivMatch>,
    pub unmatched_left: Vec<usize>,
    pub unmatched_right: Vec<usize>,
    /// For unmatched single-solution comparisons: the distinguishing witness.
    pub witness: Option<BisimWitness>,
    /// Total node pairs processed over all bisimilarity checks.
    pub pairs_processed: usize,
}

/// Decides equivalence of two zip-k specifications over the same alphabet
/// and the same k: both solution sets are enumerated (unproductive specs
/// have one solution per head assignment), every solution is turned into an
/// observation graph, and the two sets are matched by bisimilarity.
pub fn equivalent(s1: &ZipSpec, s2: &ZipSpec) -> Result<EquivReport, GraphError> {
    let k1 = match s1.dialect() {
        Dialect::ZipK(k) => k,
        d => return Err(GraphError::NotZipK(d)),
    };
    let k2 = match s2.dialect() {
        Dialect::ZipK(k) => k,
        d => return Err(GraphError::NotZipK(d)),
    };
    if k1 != k2 {
        // specs without any zip default to k = 2 and are comparable with any k
        let zipless = |s: &ZipSpec| {
            let mut arities = Vec::new();
            for (_, t) in s.equations() {
                t.zip_arities(&mut arities);
            }
            arities.is_empty()
        };
        if !zipless(s1) && !zipless(s2) {
            return Err(GraphError::DifferentK { left: k1, right: k2 });
        }
    }
    let set = |s: &ZipSpec| {
        let mut v: Vec<Symbol> = s.alphabet().to_vec();
        v.sort();
        v
    };
    if set(s1) != set(s2) {
        return Err(GraphError::AlphabetMismatch);
    }

    let sols1 = solve_all(s1)?;
    let sols2 = solve_all(s2)?;
    let graphs1 = sols1
        .iter()
        .map(ObsGraph::of_spec)
        .collect::<Result<Vec<_>, _>>()?;
    let graphs2 = sols2
        .iter()
        .map(ObsGraph::of_spec)
        .collect::<Result<Vec<_>, _>>()?;

    let mut report = EquivReport {
        equivalent: true,
        left_solutions: graphs1.len(),
        right_solutions: graphs2.len(),
        matches: Vec::new(),
        unmatched_left: Vec::new(),
        unmatched_right: Vec::new(),
        witness: None,
        pairs_processed: 0,
    };

    let mut matched_right: HashSet<usize> = HashSet::new();
    for (i, g1) in graphs1.iter().enumerate() {
        let mut found = None;
        for (j, g2) in graphs2.iter().enumerate() {
            let result = bisimilar(g1, g2)?;
            report.pairs_processed += result.pairs_processed;
            match result.witness {
                BisimWitness::Bisimilar { relation } => {
                    found = Some((j, relation));
                    break;
                }
                w => {
                    if graphs1.len() == 1 && graphs2.len() == 1 {
                        report.witness = Some(w);
                    }
                }
            }
        }
        match found {
            Some((j, relation)) => {
                matched_right.insert(j);
                report.matches.push(EquivMatch {
                    left: i,
                    right: j,
                    relation: relation
                        .into_iter()
                        .map(|(a, b)| {
                            (g1.node(a).name.clone(), graphs2[j].node(b).name.clone())
                        })
                        .collect(),
                });
            }
            None => {
                report.equivalent = false;
                report.unmatched_left.push(i);
            }
        }
    }
    // every right solution must also be covered
    for (j, g2) in graphs2.iter().enumerate() {
        if matched_right.contains(&j) {
            continue;
        }
        let mut covered = false;
        for g1 in graphs1.iter() {
            let result = bisimilar(g1, g2)?;
            report.pairs_processed += result.pairs_processed;
            if result.is_bisimilar() {
                covered = true;
                break;
            }
        }
        if !covered {
            report.equivalent = false;
            report.unmatched_right.push(j);
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Conversions between cobases and back to specifications
// ---------------------------------------------------------------------------

/// Converts an `N(k)` graph into an `O(k)` graph defining the same stream by
/// doubling the state set with tail states.
pub fn ngraph_to_ograph(g: &ObsGraph) -> Result<ObsGraph, GraphError> {
    let k = match g.cobasis() {
        Cobasis::N(k) => k,
        c => {
            return Err(GraphError::CobasisMismatch {
                left: c,
                right: Cobasis::N(2),
            })
        }
    };
    let n = g.len();
    let tl = |s: NodeId| NodeId(n + s.0);
    let mut nodes = Vec::with_capacity(2 * n);
    for node in g.nodes() {
        // proj_i = old proj_i for i < k, proj_k = tl of the proj_0 successor
        let mut succ: Vec<NodeId> = (1..k).map(|i| node.succ[i]).collect();
        succ.push(tl(node.succ[0]));
        nodes.push(Node {
            name: node.name.clone(),
            out: node.out.clone(),
            succ,
        });
    }
    for node in g.nodes() {
        // tail state: proj_i(tl s) = proj_{i+1}(s) for i < k-1,
        // proj_{k-1}(tl s) = tl(proj_0 s), proj_k(tl s) = tl(proj_1 s)
        let mut succ: Vec<NodeId> = (2..k).map(|i| node.succ[i]).collect();
        succ.push(tl(node.succ[0]));
        succ.push(tl(node.succ[1]));
        nodes.push(Node {
            name: format!("tl({})", node.name),
            out: g.out(node.succ[1]).clone(),
            succ,
        });
    }
    ObsGraph::new(Cobasis::O(k), g.root(), nodes)
}

/// Reads an `O(k)` graph as a specification with one equation
/// `X_i = a_i : zip_k(X_{i,1},..,X_{i,k})` per node.
pub fn ograph_to_spec(g: &ObsGraph) -> Result<ZipSpec, GraphError> {
    if !matches!(g.cobasis(), Cobasis::O(_)) {
        return Err(GraphError::CobasisMismatch {
            left: g.cobasis(),
            right: Cobasis::O(2),
        });
    }
    let var = |i: NodeId| VarId::new(&format!("X{}", i.0));
    let equations = g
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, node)| {
            let args = node
                .succ
                .iter()
                .map(|s| Term::var(var(*s)))
                .collect::<Vec<_>>();
            (
                var(NodeId(i)),
                Term::cons(node.out.clone(), Term::zip(args)),
            )
        })
        .collect();
    ZipSpec::new(var(g.root()), equations, None)
        .map_err(|e| GraphError::BadDescription(e.to_string()))
}

/// Reads an `N(k)` or mix graph as a specification with a pair of equations
/// per node: `X_i = a_i : X_i_t` and
/// `X_i_t = zip(X_{succ 1},..,X_{succ k-1},X_{succ 0}_t)`. Requires the
/// graph to be zero-invariant: the 0-successor of every node keeps its
/// output.
pub fn ngraph_to_spec(g: &ObsGraph) -> Result<ZipSpec, GraphError> {
    if matches!(g.cobasis(), Cobasis::O(_)) {
        return Err(GraphError::CobasisMismatch {
            left: g.cobasis(),
            right: Cobasis::N(2),
        });
    }
    for node in g.nodes() {
        if g.out(node.succ[0]) != &node.out {
            return Err(GraphError::NotZeroInvariant(node.name.clone()));
        }
    }
    let head = |i: NodeId| VarId::new(&format!("X{}", i.0));
    let tail = |i: NodeId| VarId::new(&format!("X{}t", i.0));
    let mut equations = Vec::with_capacity(2 * g.len());
    for (i, node) in g.nodes().iter().enumerate() {
        let id = NodeId(i);
        equations.push((
            head(id),
            Term::cons(node.out.clone(), Term::var(tail(id))),
        ));
        let mut args: Vec<Term> = (1..node.succ.len())
            .map(|j| Term::var(head(node.succ[j])))
            .collect();
        args.push(Term::var(tail(node.succ[0])));
        equations.push((tail(id), Term::zip(args)));
    }
    ZipSpec::new(head(g.root()), equations, None)
        .map_err(|e| GraphError::BadDescription(e.to_string()))
}

// ---------------------------------------------------------------------------
// Kernel
// ---------------------------------------------------------------------------

/// The k-kernel of the stream defined by an `N(k)` graph: the derivative
/// closure of the root under all projections, with bisimilar derivatives
/// identified. Finiteness certifies k-automaticity.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub graph: ObsGraph,
}

impl Kernel {
    pub fn size(&self) -> usize {
        self.graph.len()
    }

    /// Per-element identifying prefixes, sorted; handy for comparing with a
    /// brute-force derivative closure.
    pub fn element_prefixes(&self, len: u64) -> Vec<Vec<Symbol>> {
        let mut out: Vec<Vec<Symbol>> = (0..self.graph.len())
            .map(|i| {
                (0..len)
                    .map(|n| interpret_ngraph_from(&self.graph, NodeId(i), n))
                    .collect()
            })
            .collect();
        out.sort();
        out
    }
}

pub fn kernel(g: &ObsGraph) -> Result<Kernel, GraphError> {
    match g.cobasis() {
        Cobasis::N(_) | Cobasis::Mix => Ok(Kernel { graph: minimize(g) }),
        c => Err(GraphError::CobasisMismatch {
            left: c,
            right: Cobasis::N(2),
        }),
    }
}

// ---------------------------------------------------------------------------
// Prefix comparison across formats
// ---------------------------------------------------------------------------

pub enum StreamHandle<'a> {
    Spec(&'a ZipSpec),
    Graph(&'a ObsGraph),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrefixOutcome {
    Equal,
    DiffersAt {
        index: u64,
        left: Symbol,
        right: Symbol,
    },
}

enum HandleEval<'a> {
    Spec(StreamEval<'a>),
    Graph(&'a ObsGraph),
}

impl HandleEval<'_> {
    fn at(&mut self, n: u64) -> Result<Symbol, EvalError> {
        match self {
            HandleEval::Spec(e) => e.root_at(n),
            HandleEval::Graph(g) => Ok(match g.cobasis() {
                Cobasis::O(_) => interpret_ograph(g, n),
                _ => interpret_ngraph(g, n),
            }),
        }
    }
}

/// Compares the first `n` symbols of two streams given as specifications or
/// graphs, in any combination. A semi-decision for pairs outside the
/// decidable fragment.
pub fn prefix_compare(
    left: StreamHandle,
    right: StreamHandle,
    n: u64,
    budget: RewriteBudget,
) -> Result<PrefixOutcome, EvalError> {
    let mut l = match left {
        StreamHandle::Spec(s) => HandleEval::Spec(StreamEval::new(s, budget)),
        StreamHandle::Graph(g) => HandleEval::Graph(g),
    };
    let mut r = match right {
        StreamHandle::Spec(s) => HandleEval::Spec(StreamEval::new(s, budget)),
        StreamHandle::Graph(g) => HandleEval::Graph(g),
    };
    for i in 0..n {
        let (a, b) = (l.at(i)?, r.at(i)?);
        if a != b {
            return Ok(PrefixOutcome::DiffersAt {
                index: i,
                left: a,
                right: b,
            });
        }
    }
    Ok(PrefixOutcome::Equal)
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GraphJson {
    cobasis: String,
    root: String,
    nodes: Vec<GraphNodeJson>,
}

#[derive(Serialize, Deserialize)]
struct GraphNodeJson {
    id: String,
    out: String,
    succ: Vec<String>,
    arity: usize,
}

impl ObsGraph {
    pub fn to_json(&self) -> String {
        let unique_names = {
            let mut seen = HashSet::new();
            self.nodes.iter().all(|n| seen.insert(&n.name))
        };
        let id_of = |i: usize| {
            if unique_names {
                self.nodes[i].name.clone()
            } else {
                format!("n{i}")
            }
        };
        let doc = GraphJson {
            cobasis: self.cobasis.to_string(),
            root: id_of(self.root.0),
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, node)| GraphNodeJson {
                    id: id_of(i),
                    out: node.out.to_string(),
                    succ: node.succ.iter().map(|s| id_of(s.0)).collect(),
                    arity: node.succ.len(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<ObsGraph, GraphError> {
        let doc: GraphJson =
            serde_json::from_str(text).map_err(|e| GraphError::BadDescription(e.to_string()))?;
        let cobasis = parse_cobasis(&doc.cobasis)?;
        let ids: HashMap<&str, usize> = doc
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        if ids.len() != doc.nodes.len() {
            return Err(GraphError::BadDescription("duplicate node ids".into()));
        }
        let resolve = |name: &str| {
            ids.get(name)
                .map(|&i| NodeId(i))
                .ok_or_else(|| GraphError::BadDescription(format!("unknown node id {name}")))
        };
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        for n in &doc.nodes {
            if n.arity != n.succ.len() {
                return Err(GraphError::BadDescription(format!(
                    "node {}: arity {} does not match {} successors",
                    n.id,
                    n.arity,
                    n.succ.len()
                )));
            }
            nodes.push(Node {
                name: n.id.clone(),
                out: Symbol::new(&n.out),
                succ: n
                    .succ
                    .iter()
                    .map(|s| resolve(s))
                    .collect::<Result<_, _>>()?,
            });
        }
        ObsGraph::new(cobasis, resolve(&doc.root)?, nodes)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph obsgraph {\n  rankdir=LR;\n");
        for (i, node) in self.nodes.iter().enumerate() {
            let shape = if NodeId(i) == self.root {
                " shape=doublecircle"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "  n{i} [label=\"{}\\nout={}\"{shape}];",
                node.name.replace('"', "\\\""),
                node.out
            );
        }
        for (i, node) in self.nodes.iter().enumerate() {
            for (d, s) in node.succ.iter().enumerate() {
                let label = match self.cobasis {
                    Cobasis::N(2) => ["even", "odd"][d].to_string(),
                    Cobasis::N(_) | Cobasis::Mix => format!("p{d}"),
                    Cobasis::O(_) => format!("p{}", d + 1),
                };
                let _ = writeln!(out, "  n{i} -> n{} [label=\"{label}\"];", s.0);
            }
        }
        out.push_str("}\n");
        out
    }
}

fn parse_cobasis(text: &str) -> Result<Cobasis, GraphError> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("mix") {
        return Ok(Cobasis::Mix);
    }
    let parse_k = |inner: &str| {
        inner
            .trim_end_matches(')')
            .parse::<usize>()
            .map_err(|_| GraphError::BadDescription(format!("bad cobasis: {text}")))
    };
    if let Some(rest) = t.strip_prefix("N(") {
        return Ok(Cobasis::N(parse_k(rest)?));
    }
    if let Some(rest) = t.strip_prefix("O(") {
        return Ok(Cobasis::O(parse_k(rest)?));
    }
    Err(GraphError::BadDescription(format!("bad cobasis: {text}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::eval_prefix;

    fn morse() -> ZipSpec {
        ZipSpec::parse("M = 0:X; X = 1:zip(X,Y); Y = 0:zip(Y,X)").unwrap()
    }

    fn morse2() -> ZipSpec {
        ZipSpec::parse("N = 0:zip(1:W,1:U); U = 1:zip(V,U); V = 0:zip(V,1:U); W = zip(N,V)")
            .unwrap()
    }

    fn alt() -> ZipSpec {
        ZipSpec::parse("alt = zip(zeros,ones); zeros = 0:zeros; ones = 1:ones").unwrap()
    }

    fn sym(s: &str) -> Symbol {
        Symbol::new(s)
    }

    fn edge<'g>(g: &'g ObsGraph, from: &str, d: usize) -> &'g str {
        let id = g.node_by_name(from).unwrap();
        &g.node(g.succ(id)[d]).name
    }

    #[test]
    fn morse_graph_matches_the_paper_figure() {
        let g = ObsGraph::of_spec(&morse()).unwrap();
        assert_eq!(g.cobasis(), Cobasis::N(2));
        let mut names: Vec<&str> = g.nodes().iter().map(|n| n.name.as_str()).collect();
        names.sort();
        assert_eq!(names, vec!["0:X", "1:Y", "M"]);
        assert_eq!(g.out(g.node_by_name("M").unwrap()), &sym("0"));
        assert_eq!(g.out(g.node_by_name("0:X").unwrap()), &sym("0"));
        assert_eq!(g.out(g.node_by_name("1:Y").unwrap()), &sym("1"));
        assert_eq!(edge(&g, "M", 0), "0:X");
        assert_eq!(edge(&g, "M", 1), "1:Y");
        assert_eq!(edge(&g, "0:X", 0), "0:X");
        assert_eq!(edge(&g, "0:X", 1), "1:Y");
        assert_eq!(edge(&g, "1:Y", 0), "1:Y");
        assert_eq!(edge(&g, "1:Y", 1), "0:X");
    }

    #[test]
    fn morse2_graph_has_the_four_paper_nodes() {
        let g = ObsGraph::of_spec(&morse2()).unwrap();
        let mut names: Vec<&str> = g.nodes().iter().map(|n| n.name.as_str()).collect();
        names.sort();
        assert_eq!(names, vec!["0:1:U", "1:V", "1:W", "N"]);
        assert_eq!(edge(&g, "N", 0), "0:1:U");
        assert_eq!(edge(&g, "N", 1), "1:W");
        assert_eq!(edge(&g, "0:1:U", 0), "0:1:U");
        assert_eq!(edge(&g, "0:1:U", 1), "1:V");
        assert_eq!(edge(&g, "1:W", 0), "1:V");
        assert_eq!(edge(&g, "1:W", 1), "N");
        assert_eq!(edge(&g, "1:V", 0), "1:V");
        assert_eq!(edge(&g, "1:V", 1), "0:1:U");
    }

    #[test]
    fn interpretation_recovers_the_stream() {
        let spec = morse();
        let g = ObsGraph::of_spec(&spec).unwrap();
        let prefix = eval_prefix(&spec, 128, RewriteBudget::default()).unwrap();
        for (n, expect) in prefix.iter().enumerate() {
            assert_eq!(interpret_ngraph(&g, n as u64), *expect, "position {n}");
        }
    }

    #[test]
    fn minimize_collapses_morse_to_two_nodes() {
        let g = ObsGraph::of_spec(&morse()).unwrap();
        let m = minimize(&g);
        assert_eq!(m.len(), 2);
        for n in 0..64 {
            assert_eq!(interpret_ngraph(&m, n), interpret_ngraph(&g, n));
        }
        // idempotent
        assert_eq!(minimize(&m).len(), 2);
        // the 4-node graph also collapses to the same minimal graph
        let m2 = minimize(&ObsGraph::of_spec(&morse2()).unwrap());
        assert_eq!(m2.len(), 2);
        assert!(bisimilar(&m, &m2).unwrap().is_bisimilar());
    }

    #[test]
    fn bisimulation_contains_the_dashed_pairs() {
        let g1 = ObsGraph::of_spec(&morse()).unwrap();
        let g2 = ObsGraph::of_spec(&morse2()).unwrap();
        let result = bisimilar(&g1, &g2).unwrap();
        let relation = match &result.witness {
            BisimWitness::Bisimilar { relation } => relation,
            w => panic!("expected bisimilarity, got {w:?}"),
        };
        let names: HashSet<(String, String)> = relation
            .iter()
            .map(|(a, b)| (g1.node(*a).name.clone(), g2.node(*b).name.clone()))
            .collect();
        for pair in [
            ("M", "N"),
            ("0:X", "N"),
            ("0:X", "0:1:U"),
            ("1:Y", "1:W"),
            ("1:Y", "1:V"),
        ] {
            assert!(
                names.contains(&(pair.0.to_string(), pair.1.to_string())),
                "missing dashed pair {pair:?}"
            );
        }
    }

    #[test]
    fn self_bisimilarity_and_distinguishing_index() {
        let g1 = ObsGraph::of_spec(&morse()).unwrap();
        assert!(bisimilar(&g1, &g1).unwrap().is_bisimilar());

        let g2 = ObsGraph::of_spec(&alt()).unwrap();
        let result = bisimilar(&g1, &g2).unwrap();
        match result.witness {
            BisimWitness::DifferentOutput { index, left, right } => {
                assert_eq!(index, BigUint::from(2u32));
                assert_eq!(left, sym("1"));
                assert_eq!(right, sym("0"));
            }
            w => panic!("expected a distinguishing index, got {w:?}"),
        }
    }

    #[test]
    fn equivalence_of_the_two_morse_specs() {
        let report = equivalent(&morse(), &morse2()).unwrap();
        assert!(report.equivalent);
        assert_eq!(report.matches.len(), 1);
        let rel: HashSet<&(String, String)> = report.matches[0].relation.iter().collect();
        assert!(rel.contains(&("M".to_string(), "N".to_string())));
        // reflexivity
        assert!(equivalent(&morse(), &morse()).unwrap().equivalent);
        // inequivalent pair
        assert!(!equivalent(&morse(), &alt()).unwrap().equivalent);
    }

    #[test]
    fn ograph_conversion_preserves_interpretation() {
        for spec in [morse(), alt()] {
            let g = ObsGraph::of_spec(&spec).unwrap();
            let o = ngraph_to_ograph(&g).unwrap();
            assert_eq!(o.len(), 2 * g.len());
            for n in 0..64 {
                assert_eq!(
                    interpret_ograph(&o, n),
                    interpret_ngraph(&g, n),
                    "position {n}"
                );
            }
        }
    }

    #[test]
    fn ograph_of_constant_stream() {
        let spec = ZipSpec::parse("A = 0:A").unwrap();
        let g = ObsGraph::of_spec(&spec).unwrap();
        let o = ngraph_to_ograph(&g).unwrap();
        for n in 0..16 {
            assert_eq!(interpret_ograph(&o, n), sym("0"));
        }
        let minimized = minimize(&ngraph_to_ograph(&minimize(&g)).unwrap());
        assert!(minimized.len() <= 2);
    }

    #[test]
    fn ograph_to_spec_defines_the_same_stream() {
        let g = ObsGraph::of_spec(&alt()).unwrap();
        let o = minimize(&ngraph_to_ograph(&g).unwrap());
        let spec = ograph_to_spec(&o).unwrap();
        let p = eval_prefix(&spec, 8, RewriteBudget::default()).unwrap();
        let expect: Vec<Symbol> = "01010101".chars().map(|c| sym(&c.to_string())).collect();
        assert_eq!(p, expect);
        // every equation is cons over zip of variables
        for (_, t) in spec.equations() {
            assert!(matches!(t.node(), TermNode::Cons(_, _)));
        }
    }

    #[test]
    fn ngraph_to_spec_round_trips() {
        let g = minimize(&ObsGraph::of_spec(&morse()).unwrap());
        let spec = ngraph_to_spec(&g).unwrap();
        assert_eq!(spec.len(), 2 * g.len());
        let p = eval_prefix(&spec, 16, RewriteBudget::default()).unwrap();
        let expect: Vec<Symbol> = "0110100110010110"
            .chars()
            .map(|c| sym(&c.to_string()))
            .collect();
        assert_eq!(p, expect);
        // building a graph from the emitted spec is bisimilar to the input
        let back = ObsGraph::of_spec(&spec).unwrap();
        assert!(bisimilar(&minimize(&back), &g).unwrap().is_bisimilar());
    }

    #[test]
    fn ngraph_to_spec_needs_zero_invariance() {
        // a graph whose 0-successor changes output
        let nodes = vec![
            Node {
                name: "a".into(),
                out: sym("0"),
                succ: vec![NodeId(1), NodeId(0)],
            },
            Node {
                name: "b".into(),
                out: sym("1"),
                succ: vec![NodeId(1), NodeId(0)],
            },
        ];
        let g = ObsGraph::new(Cobasis::N(2), NodeId(0), nodes).unwrap();
        assert!(matches!(
            ngraph_to_spec(&g),
            Err(GraphError::NotZeroInvariant(_))
        ));
    }

    #[test]
    fn kernel_sizes() {
        let tm = kernel(&ObsGraph::of_spec(&morse()).unwrap()).unwrap();
        assert_eq!(tm.size(), 2);
        let constant =
            kernel(&ObsGraph::of_spec(&ZipSpec::parse("A = 0:A").unwrap()).unwrap()).unwrap();
        assert_eq!(constant.size(), 1);
        let alt_kernel = kernel(&ObsGraph::of_spec(&alt()).unwrap()).unwrap();
        assert_eq!(alt_kernel.size(), 3);
    }

    #[test]
    fn prefix_compare_formats() {
        let spec = morse();
        let g = ObsGraph::of_spec(&spec).unwrap();
        let outcome = prefix_compare(
            StreamHandle::Spec(&spec),
            StreamHandle::Graph(&g),
            64,
            RewriteBudget::default(),
        )
        .unwrap();
        assert_eq!(outcome, PrefixOutcome::Equal);
        let outcome = prefix_compare(
            StreamHandle::Spec(&spec),
            StreamHandle::Spec(&alt()),
            8,
            RewriteBudget::default(),
        )
        .unwrap();
        assert!(
            matches!(outcome, PrefixOutcome::DiffersAt { index: 2, .. }),
            "{outcome:?}"
        );
    }

    #[test]
    fn json_round_trip() {
        let g = ObsGraph::of_spec(&morse()).unwrap();
        let text = g.to_json();
        let back = ObsGraph::from_json(&text).unwrap();
        assert_eq!(back.len(), g.len());
        assert!(bisimilar(&g, &back).unwrap().is_bisimilar());
    }

    #[test]
    fn dot_export_mentions_even_and_odd() {
        let g = ObsGraph::of_spec(&morse()).unwrap();
        let dot = g.to_dot();
        assert!(dot.contains("even") && dot.contains("odd"));
        assert!(dot.contains("out=0"));
    }

    #[test]
    fn node_shape_and_size_bound() {
        // nodes of a flat-spec graph are cons prefixes over a variable, with
        // prefix length bounded by the longest equation prefix, giving
        // |nodes| <= 2(|alphabet|+1).m.n + 4m for k = 2
        for spec in [morse(), morse2(), alt()] {
            let flat = flatten(&spec).unwrap();
            let g = ObsGraph::of_flat_spec(&flat).unwrap();
            let m = flat.max_prefix().max(1);
            let n = flat.spec().len();
            let bound = 2 * (spec.alphabet().len() + 1) * m * n + 4 * m;
            assert!(
                g.len() <= bound,
                "graph of size {} exceeds bound {bound}",
                g.len()
            );
        }
    }
}
