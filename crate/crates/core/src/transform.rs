//! Shape-preserving transformations: free roots, replacing zip-free cycles
//! by specifications of their periodic streams, and flattening into the form
//! `X = c_1 : .. : c_m : zip_k(X_1,..,X_k)` with `k >= 2`.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::analysis::is_productive;
use crate::spec::{Dialect, ZipSpec};
use crate::term::{Symbol, Term, TermNode, VarId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("specification is not productive")]
    NotProductive,
    #[error("equation for {0} is not flat")]
    NotFlat(String),
    #[error("flattening is not defined for zip-pi specifications")]
    PiDialectUnsupported,
    #[error("flattening exceeded its pass bound; this is a bug")]
    DidNotConverge,
}

/// A specification in which every equation is a cons prefix over a zip of
/// variables, with zip arity at least 2.
#[derive(Clone, Debug)]
pub struct FlatSpec {
    spec: ZipSpec,
    rows: Vec<FlatEquation>,
    max_prefix: usize,
}

#[derive(Clone, Debug)]
pub struct FlatEquation {
    pub var: VarId,
    pub prefix: Vec<Symbol>,
    pub args: Vec<VarId>,
}

impl FlatSpec {
    pub fn new(spec: ZipSpec) -> Result<FlatSpec, TransformError> {
        let mut rows = Vec::new();
        let mut max_prefix = 0;
        for (v, rhs) in spec.equations() {
            let mut prefix = Vec::new();
            let mut t = rhs.clone();
            loop {
                match t.node() {
                    TermNode::Cons(a, rest) => {
                        prefix.push(a.clone());
                        t = rest.clone();
                    }
                    TermNode::Zip(args) if args.len() >= 2 => {
                        let mut vars = Vec::with_capacity(args.len());
                        for arg in args {
                            match arg.node() {
                                TermNode::Var(w) => vars.push(w.clone()),
                                _ => {
                                    return Err(TransformError::NotFlat(v.name().to_string()))
                                }
                            }
                        }
                        max_prefix = max_prefix.max(prefix.len());
                        rows.push(FlatEquation {
                            var: v.clone(),
                            prefix,
                            args: vars,
                        });
                        break;
                    }
                    _ => return Err(TransformError::NotFlat(v.name().to_string())),
                }
            }
        }
        Ok(FlatSpec {
            spec,
            rows,
            max_prefix,
        })
    }

    pub fn spec(&self) -> &ZipSpec {
        &self.spec
    }

    pub fn rows(&self) -> &[FlatEquation] {
        &self.rows
    }

    pub fn row(&self, v: &VarId) -> Option<&FlatEquation> {
        self.rows.iter().find(|r| &r.var == v)
    }

    /// Longest cons prefix over all equations.
    pub fn max_prefix(&self) -> usize {
        self.max_prefix
    }
}

/// Makes sure the root occurs in no right-hand side, adding a fresh root
/// equation only when needed. Idempotent.
pub fn ensure_free_root(spec: &ZipSpec) -> ZipSpec {
    let root = spec.root().clone();
    let occurs = spec
        .equations()
        .iter()
        .any(|(_, t)| t.variables().contains(&root));
    if !occurs {
        return spec.clone();
    }
    let taken: HashSet<String> = spec.variables().map(|v| v.name().to_string()).collect();
    let fresh = fresh_name(&taken, &format!("{}_r", root.name()));
    let new_root = VarId::new(&fresh);
    let mut equations = vec![(new_root.clone(), Term::var(root))];
    equations.extend(spec.equations().iter().cloned());
    ZipSpec::new(new_root, equations, Some(spec.alphabet().to_vec()))
        .expect("adding a fresh root keeps the spec well-formed")
}

fn fresh_name(taken: &HashSet<String>, base: &str) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    let mut n = 2usize;
    loop {
        let candidate = format!("{base}_{n}");
        if !taken.contains(&candidate) {
            return candidate;
        }
        n += 1;
    }
}

/// Shortest word `w` with `word = w^j`.
fn primitive_period(word: &[Symbol]) -> Vec<Symbol> {
    let len = word.len();
    for d in 1..=len {
        if len % d == 0 && (0..len).all(|i| word[i] == word[i % d]) {
            return word[..d].to_vec();
        }
    }
    word.to_vec()
}

/// The projection `proj_{i,k}` of the periodic stream `word^omega`, as a
/// primitive period word.
fn periodic_derivative(word: &[Symbol], i: usize, k: usize) -> Vec<Symbol> {
    let len = word.len();
    let period = len / gcd(k % len, len);
    let out: Vec<Symbol> = (0..period)
        .map(|n| word[(k * n + i) % len].clone())
        .collect();
    primitive_period(&out)
}

fn gcd(a: usize, b: usize) -> usize {
    if a == 0 {
        b
    } else {
        gcd(b % a, a)
    }
}

/// Builds a zip-k specification for the periodic stream `word^omega` from
/// the canonical observation graph of the stream: every derivative is again
/// periodic with a period no longer than `word`, so the graph is finite, and
/// each node contributes a pair `X = a : X'`, `X' = zip_k(..)`.
pub fn periodic_to_zipk(word: &[Symbol], k: usize) -> ZipSpec {
    assert!(k >= 2 && !word.is_empty());
    build_periodic(word, k, "P", &HashSet::new())
        .expect("periodic specs are well-formed")
}

fn build_periodic(
    word: &[Symbol],
    k: usize,
    root_name: &str,
    taken: &HashSet<String>,
) -> Result<ZipSpec, crate::spec::SpecError> {
    let root_word = primitive_period(word);
    let mut nodes: Vec<Vec<Symbol>> = vec![root_word.clone()];
    let mut index: HashMap<Vec<Symbol>, usize> = HashMap::new();
    index.insert(root_word, 0);
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut at = 0;
    while at < nodes.len() {
        let current = nodes[at].clone();
        let mut row = Vec::with_capacity(k);
        for i in 0..k {
            let d = periodic_derivative(&current, i, k);
            let id = *index.entry(d.clone()).or_insert_with(|| {
                nodes.push(d);
                nodes.len() - 1
            });
            row.push(id);
        }
        succ.push(row);
        at += 1;
    }

    let mut taken = taken.clone();
    let mut head_names = Vec::with_capacity(nodes.len());
    let mut tail_names = Vec::with_capacity(nodes.len());
    for i in 0..nodes.len() {
        let base = if i == 0 {
            root_name.to_string()
        } else {
            format!("{root_name}_p{i}")
        };
        let head = fresh_name(&taken, &base);
        taken.insert(head.clone());
        let tail = fresh_name(&taken, &format!("{head}_t"));
        taken.insert(tail.clone());
        head_names.push(VarId::new(&head));
        tail_names.push(VarId::new(&tail));
    }

    let mut equations = Vec::new();
    for (i, word) in nodes.iter().enumerate() {
        equations.push((
            head_names[i].clone(),
            Term::cons(word[0].clone(), Term::var(tail_names[i].clone())),
        ));
        let mut args: Vec<Term> = (1..k)
            .map(|j| Term::var(head_names[succ[i][j]].clone()))
            .collect();
        args.push(Term::var(tail_names[succ[i][0]].clone()));
        equations.push((tail_names[i].clone(), Term::zip(args)));
    }
    ZipSpec::new(head_names[0].clone(), equations, None)
}

/// Removes `zip_1` nodes, which act as the identity.
fn strip_unary_zips(t: &Term) -> Term {
    match t.node() {
        TermNode::Var(_) => t.clone(),
        TermNode::Cons(a, rest) => Term::cons(a.clone(), strip_unary_zips(rest)),
        TermNode::Zip(args) if args.len() == 1 => strip_unary_zips(&args[0]),
        TermNode::Zip(args) => Term::zip(args.iter().map(strip_unary_zips).collect()),
        TermNode::Proj(i, k, inner) => Term::proj(*i, *k, strip_unary_zips(inner)),
        TermNode::Tl(inner) => Term::tl(strip_unary_zips(inner)),
    }
}

/// Splits a pure cons chain `c_1 : .. : c_m : Y` into its prefix and
/// variable; `None` if the term contains anything else.
fn as_cons_chain(t: &Term) -> Option<(Vec<Symbol>, VarId)> {
    let mut prefix = Vec::new();
    let mut t = t.clone();
    loop {
        match t.node() {
            TermNode::Var(v) => return Some((prefix, v.clone())),
            TermNode::Cons(a, rest) => {
                prefix.push(a.clone());
                t = rest.clone();
            }
            _ => return None,
        }
    }
}

fn is_flat_equation(t: &Term) -> bool {
    let mut t = t.clone();
    loop {
        match t.node() {
            TermNode::Cons(_, rest) => t = rest.clone(),
            TermNode::Zip(args) => {
                return args.len() >= 2
                    && args.iter().all(|a| matches!(a.node(), TermNode::Var(_)))
            }
            _ => return false,
        }
    }
}

/// Flattens a productive zip-k or zip-mix specification into an equivalent
/// [`FlatSpec`]: unary zips are removed, zip-free cycles are replaced by
/// specifications of their periodic streams, non-variable zip arguments are
/// extracted into fresh equations, and cons-chain equations are unfolded.
pub fn flatten(spec: &ZipSpec) -> Result<FlatSpec, TransformError> {
    if spec.dialect() == Dialect::ZipPi {
        return Err(TransformError::PiDialectUnsupported);
    }
    if !is_productive(spec) {
        return Err(TransformError::NotProductive);
    }
    let k_target = spec.uniform_arity().unwrap_or(2).max(2);

    let mut equations: Vec<(VarId, Term)> = spec
        .equations()
        .iter()
        .map(|(v, t)| (v.clone(), strip_unary_zips(t)))
        .collect();

    replace_zip_free_cycles(&mut equations, k_target);

    let var_count = equations.len();
    let max_prefix = equations
        .iter()
        .filter_map(|(_, t)| as_cons_chain(t).map(|(p, _)| p.len()))
        .max()
        .unwrap_or(0);
    let pass_bound = (var_count + 2) * (max_prefix + 2) + 8;

    let mut taken: HashSet<String> = equations
        .iter()
        .map(|(v, _)| v.name().to_string())
        .collect();

    let mut converged = false;
    for _ in 0..pass_bound {
        if equations.iter().all(|(_, t)| is_flat_equation(t)) {
            converged = true;
            break;
        }
        // (*) extract non-variable zip arguments into fresh equations
        let mut fresh: Vec<(VarId, Term)> = Vec::new();
        for i in 0..equations.len() {
            let (v, t) = equations[i].clone();
            let extracted = extract_args(&t, &v, &mut taken, &mut fresh);
            equations[i] = (v, extracted);
        }
        equations.extend(fresh);
        // (t) unfold cons-chain equations one level
        let rhs_of: HashMap<VarId, Term> = equations.iter().cloned().collect();
        for (v, t) in equations.iter_mut() {
            if let Some((prefix, w)) = as_cons_chain(t) {
                if &w != v {
                    *t = Term::cons_prefix(&prefix, rhs_of[&w].clone());
                }
            }
        }
    }
    if !converged && !equations.iter().all(|(_, t)| is_flat_equation(t)) {
        return Err(TransformError::DidNotConverge);
    }

    let flat = ZipSpec::new(
        spec.root().clone(),
        equations,
        Some(spec.alphabet().to_vec()),
    )
    .expect("flattening keeps the spec well-formed")
    .pruned();
    FlatSpec::new(flat)
}

/// Extracts the non-variable arguments of the top zip of `t`.
fn extract_args(
    t: &Term,
    parent: &VarId,
    taken: &mut HashSet<String>,
    fresh: &mut Vec<(VarId, Term)>,
) -> Term {
    match t.node() {
        TermNode::Cons(a, rest) => {
            Term::cons(a.clone(), extract_args(rest, parent, taken, fresh))
        }
        TermNode::Zip(args) => {
            let new_args = args
                .iter()
                .enumerate()
                .map(|(i, arg)| match arg.node() {
                    TermNode::Var(_) => arg.clone(),
                    _ => {
                        let name = fresh_name(taken, &format!("{}_{i}", parent.name()));
                        taken.insert(name.clone());
                        let v = VarId::new(&name);
                        fresh.push((v.clone(), arg.clone()));
                        Term::var(v)
                    }
                })
                .collect();
            Term::zip(new_args)
        }
        _ => t.clone(),
    }
}

/// Finds cycles that use only equations and cons steps and replaces every
/// variable on such a cycle by a specification of its periodic stream.
fn replace_zip_free_cycles(equations: &mut Vec<(VarId, Term)>, k: usize) {
    let chain: HashMap<VarId, (Vec<Symbol>, VarId)> = equations
        .iter()
        .filter_map(|(v, t)| as_cons_chain(t).map(|c| (v.clone(), c)))
        .collect();
    let declaration: Vec<VarId> = equations.iter().map(|(v, _)| v.clone()).collect();
    let order: HashMap<VarId, usize> = declaration
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();

    // cycles in the (partial) functional graph of cons chains
    let mut on_cycle: Vec<Vec<VarId>> = Vec::new();
    let mut assigned: HashSet<VarId> = HashSet::new();
    for start in declaration.iter().filter(|v| chain.contains_key(v)) {
        if assigned.contains(start) {
            continue;
        }
        let mut walk = Vec::new();
        let mut pos: HashMap<VarId, usize> = HashMap::new();
        let mut v = start.clone();
        loop {
            if let Some(&i) = pos.get(&v) {
                let mut cycle: Vec<VarId> = walk[i..].to_vec();
                if !cycle.iter().any(|w| assigned.contains(w)) {
                    let first = cycle
                        .iter()
                        .enumerate()
                        .min_by_key(|(_, w)| order[*w])
                        .map(|(i, _)| i)
                        .unwrap();
                    cycle.rotate_left(first);
                    for w in &cycle {
                        assigned.insert(w.clone());
                    }
                    on_cycle.push(cycle);
                }
                break;
            }
            if !chain.contains_key(&v) || assigned.contains(&v) {
                break;
            }
            pos.insert(v.clone(), walk.len());
            walk.push(v.clone());
            v = chain[&v].1.clone();
        }
    }

    if on_cycle.is_empty() {
        return;
    }
    let mut taken: HashSet<String> = equations
        .iter()
        .map(|(v, _)| v.name().to_string())
        .collect();
    for cycle in on_cycle {
        for v in &cycle {
            // the word produced from v around the cycle and back
            let mut word = Vec::new();
            let mut w = v.clone();
            loop {
                let (prefix, next) = &chain[&w];
                word.extend(prefix.iter().cloned());
                w = next.clone();
                if w == *v {
                    break;
                }
            }
            debug_assert!(!word.is_empty(), "productive specs guard zip-free cycles");
            // the variable being replaced keeps its name as the subsystem root
            let mut taken_without = taken.clone();
            taken_without.remove(v.name());
            let sub = build_periodic(&word, k, v.name(), &taken_without)
                .expect("periodic specs are well-formed");
            for name in sub.variables() {
                taken.insert(name.name().to_string());
            }
            let idx = equations.iter().position(|(w, _)| w == v).unwrap();
            let new_eqs = sub.equations().to_vec();
            debug_assert_eq!(&new_eqs[0].0, v);
            equations[idx] = new_eqs[0].clone();
            equations.extend(new_eqs.into_iter().skip(1));
        }
    }
}
