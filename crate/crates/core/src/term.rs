//! Terms of stream specifications: recursion variables, cons, `zip_k` and the
//! projections `proj_{i,k}`.
//!
//! Terms are hash-consed: two structurally equal terms are always the same
//! allocation, so `==` on [`Term`] is a pointer comparison. Derivative
//! closures and memo tables rely on this.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use once_cell::sync::Lazy;

use crate::intern::Interner;

/// A data symbol from the alphabet. Compared by name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A recursion variable. Compared by name; each spec has one defining
/// equation per variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(Arc<str>);

impl VarId {
    pub fn new(name: &str) -> Self {
        VarId(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Shape of one term node. Children are already interned, so the derived
/// `Eq`/`Hash` (pointer-based on children) agree with structural equality.
#[derive(PartialEq, Eq, Hash)]
pub enum TermNode {
    Var(VarId),
    Cons(Symbol, Term),
    /// `zip_k(t_0, .., t_{k-1})`; the arity is the argument count, at least 1.
    Zip(Vec<Term>),
    /// `proj_{i,k}(t)` selecting the subsequence `n -> t(k*n + i)`; `k >= 1`.
    Proj(u64, u64, Term),
    /// Tail marker used internally while solving unproductive specs.
    /// Never produced by parsing and never survives into returned specs.
    Tl(Term),
}

static TERMS: Lazy<Interner<TermNode>> = Lazy::new(Interner::new);

/// An interned term; cloning is cheap and `==` is pointer equality.
#[derive(Clone, Eq)]
pub struct Term(Arc<TermNode>);

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (Arc::as_ptr(&self.0) as usize).hash(state);
    }
}

impl Term {
    pub fn var(v: VarId) -> Term {
        Term(TERMS.intern(TermNode::Var(v)))
    }

    pub fn cons(a: Symbol, tail: Term) -> Term {
        Term(TERMS.intern(TermNode::Cons(a, tail)))
    }

    /// `zip_k` for `k = args.len()`; panics on an empty argument list
    /// (arity-zero zips are rejected when parsing).
    pub fn zip(args: Vec<Term>) -> Term {
        assert!(!args.is_empty(), "zip needs at least one argument");
        Term(TERMS.intern(TermNode::Zip(args)))
    }

    /// `proj_{i,k}`; panics on `k = 0` (rejected when parsing).
    pub fn proj(i: u64, k: u64, t: Term) -> Term {
        assert!(k >= 1, "proj modulus must be at least 1");
        Term(TERMS.intern(TermNode::Proj(i, k, t)))
    }

    pub(crate) fn tl(t: Term) -> Term {
        Term(TERMS.intern(TermNode::Tl(t)))
    }

    pub fn node(&self) -> &TermNode {
        &self.0
    }

    /// Prepends a word of symbols: `cons_prefix([a, b], t) = a : b : t`.
    pub fn cons_prefix(prefix: &[Symbol], t: Term) -> Term {
        let mut out = t;
        for a in prefix.iter().rev() {
            out = Term::cons(a.clone(), out);
        }
        out
    }

    /// The variables occurring in this term, in first-occurrence order.
    pub fn variables(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        let mut seen = std::collections::HashSet::new();
        self.collect_variables(&mut out, &mut seen);
        out
    }

    fn collect_variables(
        &self,
        out: &mut Vec<VarId>,
        seen: &mut std::collections::HashSet<VarId>,
    ) {
        match self.node() {
            TermNode::Var(v) => {
                if seen.insert(v.clone()) {
                    out.push(v.clone());
                }
            }
            TermNode::Cons(_, t) | TermNode::Proj(_, _, t) | TermNode::Tl(t) => {
                t.collect_variables(out, seen)
            }
            TermNode::Zip(args) => {
                for a in args {
                    a.collect_variables(out, seen);
                }
            }
        }
    }

    /// Replaces every occurrence of variable `v` by `replacement`.
    pub fn substitute(&self, v: &VarId, replacement: &Term) -> Term {
        match self.node() {
            TermNode::Var(w) => {
                if w == v {
                    replacement.clone()
                } else {
                    self.clone()
                }
            }
            TermNode::Cons(a, t) => Term::cons(a.clone(), t.substitute(v, replacement)),
            TermNode::Zip(args) => {
                Term::zip(args.iter().map(|t| t.substitute(v, replacement)).collect())
            }
            TermNode::Proj(i, k, t) => Term::proj(*i, *k, t.substitute(v, replacement)),
            TermNode::Tl(t) => Term::tl(t.substitute(v, replacement)),
        }
    }

    /// True if any subterm is a projection.
    pub fn contains_proj(&self) -> bool {
        match self.node() {
            TermNode::Var(_) => false,
            TermNode::Proj(..) => true,
            TermNode::Cons(_, t) | TermNode::Tl(t) => t.contains_proj(),
            TermNode::Zip(args) => args.iter().any(|t| t.contains_proj()),
        }
    }

    pub(crate) fn contains_tl(&self) -> bool {
        match self.node() {
            TermNode::Var(_) => false,
            TermNode::Tl(_) => true,
            TermNode::Cons(_, t) | TermNode::Proj(_, _, t) => t.contains_tl(),
            TermNode::Zip(args) => args.iter().any(|t| t.contains_tl()),
        }
    }

    /// Collects the zip arities occurring in the term.
    pub fn zip_arities(&self, out: &mut Vec<usize>) {
        match self.node() {
            TermNode::Var(_) => {}
            TermNode::Cons(_, t) | TermNode::Proj(_, _, t) | TermNode::Tl(t) => {
                t.zip_arities(out)
            }
            TermNode::Zip(args) => {
                if !out.contains(&args.len()) {
                    out.push(args.len());
                }
                for a in args {
                    a.zip_arities(out);
                }
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            TermNode::Var(v) => write!(f, "{v}"),
            TermNode::Cons(a, t) => write!(f, "{a}:{t}"),
            TermNode::Zip(args) => {
                write!(f, "zip(")?;
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            TermNode::Proj(i, k, t) => write!(f, "proj({i},{k},{t})"),
            TermNode::Tl(t) => write!(f, "tl({t})"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
