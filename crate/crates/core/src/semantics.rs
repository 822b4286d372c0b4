//! Operational semantics: head expansion by the zip/proj rewrite rules, lazy
//! prefix evaluation, R-normal forms over a specification, and the algebraic
//! projection-through-zip identity.
//!
//! Head expansion is memoized per evaluator. Terms are hash-consed, so the
//! expansion chains of shared subterms (in particular recursion variables)
//! are computed once; this keeps demand-driven evaluation of projection-heavy
//! specifications from re-deriving the same prefixes exponentially often.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::spec::ZipSpec;
use crate::term::{Symbol, Term, TermNode, VarId};

/// A finite stream prefix.
pub type Prefix = Vec<Symbol>;

/// Cap on head-demand rewrite steps; exceeding it is an error, never silent
/// truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RewriteBudget {
    pub max_steps: u64,
}

impl RewriteBudget {
    pub fn new(max_steps: u64) -> Self {
        assert!(max_steps > 0, "budget must be positive");
        RewriteBudget { max_steps }
    }
}

impl Default for RewriteBudget {
    fn default() -> Self {
        RewriteBudget {
            max_steps: 1_000_000,
        }
    }
}

const DEPTH_LIMIT: usize = 4096;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("rewrite budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("internal: {0}")]
    Internal(String),
}

fn reentry(t: &Term) -> EvalError {
    EvalError::BudgetExhausted(format!(
        "head demand re-entered {t}; the demand has no guard on its leftmost cycle"
    ))
}

/// Demand-driven head expansion over one specification.
pub struct Evaluator<'s> {
    spec: &'s ZipSpec,
    memo: HashMap<Term, (Symbol, Term)>,
    in_progress: HashSet<Term>,
    steps: u64,
    budget: u64,
    depth: usize,
}

impl<'s> Evaluator<'s> {
    pub fn new(spec: &'s ZipSpec, budget: RewriteBudget) -> Self {
        Evaluator {
            spec,
            memo: HashMap::new(),
            in_progress: HashSet::new(),
            steps: 0,
            budget: budget.max_steps,
            depth: 0,
        }
    }

    fn charge(&mut self) -> Result<(), EvalError> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(EvalError::BudgetExhausted(format!(
                "more than {} head-demand steps",
                self.budget
            )))
        } else {
            Ok(())
        }
    }

    fn rhs(&self, v: &VarId) -> Result<Term, EvalError> {
        self.spec
            .rhs(v)
            .cloned()
            .ok_or_else(|| EvalError::Internal(format!("no equation for {v}")))
    }

    /// Rewrites `t` to `a : t'` and returns `(a, t')`, following the
    /// deterministic leftmost-demand strategy:
    /// `zip_k(x:s0,s1,..)` steps to `x : zip_k(s1,..,s0)`, projections
    /// consume and produce by the proj rules, variables unfold.
    pub fn expand_head(&mut self, t: &Term) -> Result<(Symbol, Term), EvalError> {
        if let Some(hit) = self.memo.get(t) {
            return Ok(hit.clone());
        }
        if let TermNode::Cons(a, rest) = t.node() {
            return Ok((a.clone(), rest.clone()));
        }
        if !self.in_progress.insert(t.clone()) {
            return Err(reentry(t));
        }
        self.depth += 1;
        let result = if self.depth > DEPTH_LIMIT {
            Err(EvalError::BudgetExhausted(
                "expansion recursion too deep".into(),
            ))
        } else {
            self.expand_uncached(t)
        };
        self.depth -= 1;
        self.in_progress.remove(t);
        if let Ok(pair) = &result {
            self.memo.insert(t.clone(), pair.clone());
        }
        result
    }

    fn expand_uncached(&mut self, t: &Term) -> Result<(Symbol, Term), EvalError> {
        self.charge()?;
        match t.node() {
            TermNode::Cons(a, rest) => Ok((a.clone(), rest.clone())),
            TermNode::Var(v) => {
                let rhs = self.rhs(v)?;
                self.expand_head(&rhs)
            }
            TermNode::Zip(args) => {
                let (a, first_rest) = self.expand_head(&args[0])?;
                let mut rotated: Vec<Term> = args[1..].to_vec();
                rotated.push(first_rest);
                Ok((a, Term::zip(rotated)))
            }
            TermNode::Proj(i, k, inner) => {
                let (k, mut i) = (*k, *i);
                let mut current = inner.clone();
                loop {
                    self.charge()?;
                    let (a, rest) = self.expand_head(&current)?;
                    if i == 0 {
                        return Ok((a, Term::proj(k - 1, k, rest)));
                    }
                    i -= 1;
                    current = rest;
                }
            }
            TermNode::Tl(_) => Err(EvalError::Internal(
                "tl marker reached the evaluator".into(),
            )),
        }
    }

    /// First `n` symbols of the stream denoted by `t`.
    pub fn prefix_of(&mut self, t: &Term, n: u64) -> Result<Prefix, EvalError> {
        let mut out = Vec::with_capacity(n as usize);
        let mut current = t.clone();
        for _ in 0..n {
            let (a, rest) = self.expand_head(&current)?;
            out.push(a);
            current = rest;
        }
        Ok(out)
    }
}

/// First `n` symbols of the root stream, by iterated head expansion.
pub fn eval_prefix(spec: &ZipSpec, n: u64, budget: RewriteBudget) -> Result<Prefix, EvalError> {
    Evaluator::new(spec, budget).prefix_of(&Term::var(spec.root().clone()), n)
}

/// One head expansion of `t` in `spec`.
pub fn expand_head(
    spec: &ZipSpec,
    t: &Term,
    budget: RewriteBudget,
) -> Result<(Symbol, Term), EvalError> {
    Evaluator::new(spec, budget).expand_head(t)
}

/// The subsequence `root(i), root(k+i), .., root((n-1)k+i)`.
pub fn project_prefix(
    spec: &ZipSpec,
    i: u64,
    k: u64,
    n: u64,
    budget: RewriteBudget,
) -> Result<Prefix, EvalError> {
    assert!(k >= 1);
    if n == 0 {
        return Ok(Vec::new());
    }
    let want = (n - 1) * k + i + 1;
    let full = eval_prefix(spec, want, budget)?;
    Ok((0..n).map(|j| full[(j * k + i) as usize].clone()).collect())
}

/// Rewrites `proj_{i,n}(zip_k(args))` into a zip of projections:
/// `zip_k(proj_{f(0)/k, n}(args[f(0) mod k]), ..)` with `f(z) = i + z*n`.
pub fn project_through_zip(i: u64, n: u64, k: u64, args: &[Term]) -> Term {
    assert!(n >= 1 && k >= 1 && args.len() as u64 == k);
    let components = (0..k)
        .map(|z| {
            let f = i + z * n;
            Term::proj(f / k, n, args[(f % k) as usize].clone())
        })
        .collect();
    Term::zip(components)
}

// ---------------------------------------------------------------------------
// Index-directed evaluation
// ---------------------------------------------------------------------------

/// Evaluates single stream positions without materializing prefixes. Agrees
/// with [`eval_prefix`] on productive specifications and is the workhorse for
/// prefix comparison of projection-heavy specs, where head rewriting would
/// rotate very wide zips.
pub struct StreamEval<'s> {
    spec: &'s ZipSpec,
    memo: HashMap<(Term, u64), Symbol>,
    in_progress: HashSet<(Term, u64)>,
    steps: u64,
    budget: u64,
}

impl<'s> StreamEval<'s> {
    pub fn new(spec: &'s ZipSpec, budget: RewriteBudget) -> Self {
        StreamEval {
            spec,
            memo: HashMap::new(),
            in_progress: HashSet::new(),
            steps: 0,
            budget: budget.max_steps,
        }
    }

    pub fn root_at(&mut self, n: u64) -> Result<Symbol, EvalError> {
        self.at(&Term::var(self.spec.root().clone()), n, 0)
    }

    pub fn term_at(&mut self, t: &Term, n: u64) -> Result<Symbol, EvalError> {
        self.at(t, n, 0)
    }

    fn at(&mut self, t: &Term, n: u64, depth: usize) -> Result<Symbol, EvalError> {
        if depth > DEPTH_LIMIT {
            return Err(EvalError::BudgetExhausted(
                "evaluation recursion too deep".into(),
            ));
        }
        self.steps += 1;
        if self.steps > self.budget {
            return Err(EvalError::BudgetExhausted(format!(
                "more than {} evaluation steps",
                self.budget
            )));
        }
        match t.node() {
            TermNode::Cons(a, rest) => {
                if n == 0 {
                    Ok(a.clone())
                } else {
                    self.at(rest, n - 1, depth + 1)
                }
            }
            TermNode::Zip(args) => {
                let k = args.len() as u64;
                self.at(&args[(n % k) as usize], n / k, depth + 1)
            }
            TermNode::Proj(i, k, inner) => {
                let idx = n
                    .checked_mul(*k)
                    .and_then(|m| m.checked_add(*i))
                    .ok_or_else(|| {
                        EvalError::BudgetExhausted("projection index overflow".into())
                    })?;
                self.at(inner, idx, depth + 1)
            }
            TermNode::Var(v) => {
                let key = (t.clone(), n);
                if let Some(hit) = self.memo.get(&key) {
                    return Ok(hit.clone());
                }
                if !self.in_progress.insert(key.clone()) {
                    return Err(reentry(t));
                }
                let rhs = self
                    .spec
                    .rhs(v)
                    .cloned()
                    .ok_or_else(|| EvalError::Internal(format!("no equation for {v}")))?;
                let result = self.at(&rhs, n, depth + 1);
                self.in_progress.remove(&key);
                if let Ok(sym) = &result {
                    self.memo.insert(key, sym.clone());
                }
                result
            }
            TermNode::Tl(_) => Err(EvalError::Internal(
                "tl marker reached the evaluator".into(),
            )),
        }
    }
}

// ---------------------------------------------------------------------------
// R-normal forms
// ---------------------------------------------------------------------------

/// The unique normal form of `t` with respect to the rewrite system of the
/// specification: cons/zip/proj rules plus one unfolding rule per equation,
/// applied leftmost-innermost. Recursion variables are constants.
pub fn rnf(spec: &ZipSpec, t: &Term, budget: RewriteBudget) -> Result<Term, EvalError> {
    let mut steps = 0u64;
    rnf_inner(spec, t, budget.max_steps, &mut steps)
}

fn rnf_inner(
    spec: &ZipSpec,
    t: &Term,
    budget: u64,
    steps: &mut u64,
) -> Result<Term, EvalError> {
    match t.node() {
        TermNode::Var(_) => Ok(t.clone()),
        TermNode::Cons(a, rest) => Ok(Term::cons(
            a.clone(),
            rnf_inner(spec, rest, budget, steps)?,
        )),
        TermNode::Zip(args) => {
            let normalized = args
                .iter()
                .map(|u| rnf_inner(spec, u, budget, steps))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Term::zip(normalized))
        }
        TermNode::Proj(i, k, inner) => {
            let (k, mut i) = (*k, *i);
            let mut produced: Vec<Symbol> = Vec::new();
            let mut current = inner.clone();
            loop {
                *steps += 1;
                if *steps > budget {
                    return Err(EvalError::BudgetExhausted(format!(
                        "more than {budget} normalization steps"
                    )));
                }
                match current.node() {
                    TermNode::Cons(a, rest) => {
                        if i == 0 {
                            produced.push(a.clone());
                            i = k - 1;
                        } else {
                            i -= 1;
                        }
                        current = rest.clone();
                    }
                    TermNode::Var(v) => match spec.rhs(v) {
                        Some(rhs) => current = rhs.clone(),
                        None => {
                            return Err(EvalError::Internal(format!("no equation for {v}")))
                        }
                    },
                    TermNode::Zip(args) => {
                        if args.len() as u64 == k {
                            let chosen = rnf_inner(spec, &args[i as usize], budget, steps)?;
                            return Ok(Term::cons_prefix(&produced, chosen));
                        }
                        // No rule crosses a zip of a different arity; the
                        // projection stays in the normal form.
                        let stuck = rnf_inner(spec, &current, budget, steps)?;
                        return Ok(Term::cons_prefix(
                            &produced,
                            Term::proj(i, k, stuck),
                        ));
                    }
                    TermNode::Proj(..) => {
                        let inner_nf = rnf_inner(spec, &current, budget, steps)?;
                        if inner_nf == current {
                            return Ok(Term::cons_prefix(
                                &produced,
                                Term::proj(i, k, inner_nf),
                            ));
                        }
                        current = inner_nf;
                    }
                    TermNode::Tl(_) => {
                        return Err(EvalError::Internal(
                            "tl marker reached the normalizer".into(),
                        ))
                    }
                }
            }
        }
        TermNode::Tl(_) => Err(EvalError::Internal(
            "tl marker reached the normalizer".into(),
        )),
    }
}

/// Normal form of `hd(t)`: the first symbol `t` produces.
pub fn head_nf(spec: &ZipSpec, t: &Term, budget: RewriteBudget) -> Result<Symbol, EvalError> {
    let mut current = t.clone();
    let mut steps = 0u64;
    loop {
        steps += 1;
        if steps > budget.max_steps {
            return Err(EvalError::BudgetExhausted(format!(
                "more than {} normalization steps",
                budget.max_steps
            )));
        }
        match current.node() {
            TermNode::Cons(a, _) => return Ok(a.clone()),
            TermNode::Var(v) => match spec.rhs(v) {
                Some(rhs) => current = rhs.clone(),
                None => return Err(EvalError::Internal(format!("no equation for {v}"))),
            },
            TermNode::Zip(args) => current = args[0].clone(),
            TermNode::Proj(..) => {
                let nf = rnf(spec, &current, budget)?;
                if nf == current {
                    return Err(EvalError::BudgetExhausted(format!(
                        "hd({current}) has no normal form"
                    )));
                }
                current = nf;
            }
            TermNode::Tl(_) => {
                return Err(EvalError::Internal(
                    "tl marker reached the normalizer".into(),
                ))
            }
        }
    }
}

/// Checks that `candidate` is a solution of `spec` on the first `positions`
/// stream positions: for every equation `X = t` of `spec`, the streams of `X`
/// and of `t` under `candidate`'s solution agree pointwise.
pub fn is_solution_prefix(
    spec: &ZipSpec,
    candidate: &ZipSpec,
    positions: u64,
    budget: RewriteBudget,
) -> Result<bool, EvalError> {
    let mut eval = StreamEval::new(candidate, budget);
    for (v, t) in spec.equations() {
        let var_term = Term::var(v.clone());
        for n in 0..positions {
            if eval.term_at(&var_term, n)? != eval.term_at(t, n)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
