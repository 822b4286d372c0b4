//! Productivity analysis: leftmost cycles and their guards, the
//! evolve transformation, and enumeration of all solutions of an
//! unproductive specification.
//!
//! A left-step follows an equation, a cons tail, or the first argument of a
//! zip; a guard is a cons on the way. A specification is productive exactly
//! when every leftmost cycle carries a guard, and then it is uniquely
//! solvable. An unproductive spec has one free choice of head symbol per
//! unguarded leftmost cycle, giving `|alphabet|^m` solutions.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::semantics::{eval_prefix, RewriteBudget};
use crate::spec::{Dialect, ZipSpec};
use crate::term::{Symbol, Term, TermNode, VarId};
use crate::transform::ensure_free_root;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("cycle analysis is not defined for zip-pi specifications")]
    PiDialectUnsupported,
    #[error("hoisting the root is forbidden")]
    RootHoistForbidden,
    #[error("no redex for the requested evolve step")]
    NoRedex,
    #[error("an unguarded leftmost cycle without zip admits a solution for every stream; the solution set is not finite")]
    ZipFreeUnguardedCycle,
    #[error("solving needs an alphabet of at least two symbols")]
    AlphabetTooSmall,
    #[error("internal non-termination during tl elimination: {0}")]
    InternalNonTermination(String),
}

/// One leftmost cycle: the full term path `t_1 .. t_n` with `t_1 = t_n` a
/// recursion variable, plus the variables visited in order.
#[derive(Clone, Debug)]
pub struct LeftmostCycle {
    pub terms: Vec<Term>,
    pub vars: Vec<VarId>,
    pub guarded: bool,
    /// True when some term on the cycle is a zip.
    pub through_zip: bool,
}

/// All leftmost cycles of a specification, with one representative variable
/// per unguarded cycle.
#[derive(Clone, Debug, Default)]
pub struct CycleReport {
    pub cycles: Vec<LeftmostCycle>,
    pub representatives: Vec<VarId>,
}

impl CycleReport {
    pub fn unguarded(&self) -> impl Iterator<Item = &LeftmostCycle> {
        self.cycles.iter().filter(|c| !c.guarded)
    }

    pub fn all_guarded(&self) -> bool {
        self.cycles.iter().all(|c| c.guarded)
    }
}

/// The left spine from a variable: the next variable reached, whether a cons
/// guards the way, and the terms visited (starting at `Var(v)`, ending at
/// `Var(next)`).
fn left_spine(spec: &ZipSpec, v: &VarId) -> Result<(VarId, bool, Vec<Term>), AnalysisError> {
    let mut terms = vec![Term::var(v.clone())];
    let mut t = spec
        .rhs(v)
        .expect("specs have an equation per variable")
        .clone();
    let mut guarded = false;
    loop {
        terms.push(t.clone());
        match t.node() {
            TermNode::Var(w) => return Ok((w.clone(), guarded, terms)),
            TermNode::Cons(_, rest) => {
                guarded = true;
                t = rest.clone();
            }
            TermNode::Zip(args) => t = args[0].clone(),
            TermNode::Proj(..) | TermNode::Tl(_) => {
                return Err(AnalysisError::PiDialectUnsupported)
            }
        }
    }
}

/// Enumerates the leftmost cycles of `spec` and picks the first-declared
/// variable of every unguarded cycle as its representative.
pub fn leftmost_cycles(spec: &ZipSpec) -> Result<CycleReport, AnalysisError> {
    if spec.dialect() == Dialect::ZipPi {
        return Err(AnalysisError::PiDialectUnsupported);
    }
    let order: HashMap<VarId, usize> = spec
        .variables()
        .cloned()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();

    // The left-step relation restricted to variables is a function, so every
    // variable leads to exactly one cycle and distinct cycles are disjoint.
    let mut next: HashMap<VarId, (VarId, bool, Vec<Term>)> = HashMap::new();
    for v in spec.variables() {
        next.insert(v.clone(), left_spine(spec, v)?);
    }

    let mut on_known_cycle: HashSet<VarId> = HashSet::new();
    let mut visited: HashSet<VarId> = HashSet::new();
    let mut cycles = Vec::new();
    for start in spec.variables() {
        if visited.contains(start) {
            continue;
        }
        let mut walk: Vec<VarId> = Vec::new();
        let mut pos: HashMap<VarId, usize> = HashMap::new();
        let mut v = start.clone();
        loop {
            if let Some(&i) = pos.get(&v) {
                // new cycle: walk[i..]
                let cycle_vars: Vec<VarId> = walk[i..].to_vec();
                if !on_known_cycle.contains(&cycle_vars[0]) {
                    cycles.push(build_cycle(&next, &order, cycle_vars.clone()));
                    for w in &cycle_vars {
                        on_known_cycle.insert(w.clone());
                    }
                }
                break;
            }
            if visited.contains(&v) {
                break;
            }
            pos.insert(v.clone(), walk.len());
            walk.push(v.clone());
            v = next[&v].0.clone();
        }
        for w in walk {
            visited.insert(w);
        }
    }

    cycles.sort_by_key(|c: &LeftmostCycle| order[&c.vars[0]]);
    let representatives = cycles
        .iter()
        .filter(|c| !c.guarded)
        .map(|c| c.vars[0].clone())
        .collect();
    Ok(CycleReport {
        cycles,
        representatives,
    })
}

fn build_cycle(
    next: &HashMap<VarId, (VarId, bool, Vec<Term>)>,
    order: &HashMap<VarId, usize>,
    mut vars: Vec<VarId>,
) -> LeftmostCycle {
    // canonical start: first-declared variable on the cycle
    let first = vars
        .iter()
        .enumerate()
        .min_by_key(|(_, v)| order[*v])
        .map(|(i, _)| i)
        .unwrap();
    vars.rotate_left(first);

    let mut terms: Vec<Term> = Vec::new();
    let mut guarded = false;
    let mut through_zip = false;
    for v in &vars {
        let (_, seg_guarded, seg_terms) = &next[v];
        guarded = guarded || *seg_guarded;
        through_zip =
            through_zip || seg_terms.iter().any(|t| matches!(t.node(), TermNode::Zip(_)));
        let skip = usize::from(!terms.is_empty());
        terms.extend(seg_terms.iter().skip(skip).cloned());
    }
    LeftmostCycle {
        terms,
        vars,
        guarded,
        through_zip,
    }
}

/// Whether every leftmost cycle has a guard; equivalently, whether the
/// specification is uniquely solvable. For the zip-pi dialect this falls back
/// to a bounded evaluation witness (a semi-decision).
pub fn is_productive(spec: &ZipSpec) -> bool {
    match spec.dialect() {
        Dialect::ZipPi => eval_prefix(spec, 50, RewriteBudget::default()).is_ok(),
        _ => leftmost_cycles(spec)
            .map(|r| r.all_guarded())
            .unwrap_or(false),
    }
}

/// One evolve step.
#[derive(Clone, Debug)]
pub enum EvolveChoice {
    /// For `X = a:t` with `X` not the root: redefine `X = t` and replace
    /// every right-hand-side occurrence of `X` by `a:X`.
    Hoist(VarId),
    /// Contract the leftmost-outermost zip redex in the equation of the
    /// variable: `zip_k(x:s0,s1,..)` becomes `x : zip_k(s1,..,s0)`.
    ZipRewrite(VarId),
}

pub fn evolve_step(spec: &ZipSpec, choice: &EvolveChoice) -> Result<ZipSpec, AnalysisError> {
    match choice {
        EvolveChoice::Hoist(v) => {
            if v == spec.root() {
                return Err(AnalysisError::RootHoistForbidden);
            }
            hoist(spec, v)
        }
        EvolveChoice::ZipRewrite(v) => {
            let rhs = spec.rhs(v).ok_or(AnalysisError::NoRedex)?;
            let contracted = contract_leftmost_outermost(rhs).ok_or(AnalysisError::NoRedex)?;
            Ok(spec.with_rhs(v, contracted))
        }
    }
}

fn hoist(spec: &ZipSpec, v: &VarId) -> Result<ZipSpec, AnalysisError> {
    let rhs = spec.rhs(v).ok_or(AnalysisError::NoRedex)?;
    let (head, tail) = match rhs.node() {
        TermNode::Cons(a, t) => (a.clone(), t.clone()),
        _ => return Err(AnalysisError::NoRedex),
    };
    let guarded_var = Term::cons(head, Term::var(v.clone()));
    let mut out = spec.with_rhs(v, tail);
    let snapshot = out.clone();
    for (w, rhs) in snapshot.equations() {
        out = out.with_rhs(w, rhs.substitute(v, &guarded_var));
    }
    Ok(out)
}

fn contract_leftmost_outermost(t: &Term) -> Option<Term> {
    if let TermNode::Zip(args) = t.node() {
        if let TermNode::Cons(a, rest) = args[0].node() {
            let mut rotated: Vec<Term> = args[1..].to_vec();
            rotated.push(rest.clone());
            return Some(Term::cons(a.clone(), Term::zip(rotated)));
        }
    }
    match t.node() {
        TermNode::Var(_) => None,
        TermNode::Cons(a, rest) => {
            contract_leftmost_outermost(rest).map(|r| Term::cons(a.clone(), r))
        }
        TermNode::Zip(args) => {
            for (i, arg) in args.iter().enumerate() {
                if let Some(r) = contract_leftmost_outermost(arg) {
                    let mut new_args = args.clone();
                    new_args[i] = r;
                    return Some(Term::zip(new_args));
                }
            }
            None
        }
        TermNode::Proj(i, k, inner) => {
            contract_leftmost_outermost(inner).map(|r| Term::proj(*i, *k, r))
        }
        TermNode::Tl(inner) => contract_leftmost_outermost(inner).map(Term::tl),
    }
}

/// Enumerates all solutions of `spec`. A productive spec yields itself; an
/// unproductive one yields, for every assignment of head symbols to the
/// representatives of its unguarded leftmost cycles, the productive spec
/// obtained by fixing those heads and eliminating the temporary tail marker
/// by demand-driven leftmost expansion.
pub fn solve_all(spec: &ZipSpec) -> Result<Vec<ZipSpec>, AnalysisError> {
    let report = leftmost_cycles(spec)?;
    if report.all_guarded() {
        return Ok(vec![spec.clone()]);
    }
    if report.unguarded().any(|c| !c.through_zip) {
        return Err(AnalysisError::ZipFreeUnguardedCycle);
    }
    if spec.alphabet().len() < 2 {
        return Err(AnalysisError::AlphabetTooSmall);
    }

    // Hoisting is demanded for every variable on an unguarded cycle, so make
    // sure the root is not among them.
    let root_on_cycle = report
        .unguarded()
        .any(|c| c.vars.contains(spec.root()));
    let (base, report) = if root_on_cycle {
        let freed = ensure_free_root(spec);
        let report = leftmost_cycles(&freed)?;
        (freed, report)
    } else {
        (spec.clone(), report)
    };

    let reps = report.representatives.clone();
    let alphabet: Vec<Symbol> = base.alphabet().to_vec();
    let mut out = Vec::new();
    for assignment in assignments(&alphabet, reps.len()) {
        let mut candidate = base.clone();
        for (rep, a) in reps.iter().zip(assignment.iter()) {
            let old = candidate.rhs(rep).unwrap().clone();
            candidate = candidate.with_rhs(rep, Term::cons(a.clone(), Term::tl(old)));
        }
        candidate = eliminate_tl(candidate)?;
        if !is_productive(&candidate) {
            return Err(AnalysisError::InternalNonTermination(format!(
                "solution for assignment {:?} is not productive",
                assignment
            )));
        }
        out.push(candidate);
    }
    Ok(out)
}

/// All vectors over `alphabet` of length `m`, lexicographic in declaration
/// order.
fn assignments(alphabet: &[Symbol], m: usize) -> Vec<Vec<Symbol>> {
    let mut out: Vec<Vec<Symbol>> = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                alphabet.iter().map(move |a| {
                    let mut v = prefix.clone();
                    v.push(a.clone());
                    v
                })
            })
            .collect();
    }
    out
}

const ELIMINATION_STEP_LIMIT: usize = 100_000;

/// Pushes the tail markers through the specification until they are
/// consumed: `tl(a:u)` drops the head, `tl` over a zip rotates into the
/// first argument, and a `tl` stuck on a variable demands that variable to
/// become cons-headed by hoisting along its left spine.
fn eliminate_tl(mut spec: ZipSpec) -> Result<ZipSpec, AnalysisError> {
    for _ in 0..ELIMINATION_STEP_LIMIT {
        let holder = spec
            .equations()
            .iter()
            .find(|(_, t)| t.contains_tl())
            .map(|(v, t)| (v.clone(), t.clone()));
        let (var, rhs) = match holder {
            None => return Ok(spec),
            Some(pair) => pair,
        };
        let tl_arg = first_tl_argument(&rhs).expect("equation contains a tl");
        match tl_arg.node() {
            TermNode::Cons(_, _) | TermNode::Zip(_) => {
                let stepped = step_tl(&rhs).expect("tl step applies");
                spec = spec.with_rhs(&var, stepped);
            }
            TermNode::Var(z) => {
                let mut visiting = HashSet::new();
                spec = make_cons_headed(spec, z.clone(), &mut visiting)?;
            }
            TermNode::Proj(..) | TermNode::Tl(_) => {
                return Err(AnalysisError::InternalNonTermination(format!(
                    "tl stuck on {tl_arg}"
                )))
            }
        }
    }
    Err(AnalysisError::InternalNonTermination(
        "tl elimination did not terminate".into(),
    ))
}

fn first_tl_argument(t: &Term) -> Option<Term> {
    match t.node() {
        TermNode::Var(_) => None,
        TermNode::Tl(inner) => Some(inner.clone()),
        TermNode::Cons(_, rest) => first_tl_argument(rest),
        TermNode::Proj(_, _, inner) => first_tl_argument(inner),
        TermNode::Zip(args) => args.iter().find_map(first_tl_argument),
    }
}

/// Applies one tl rule at the first tl subterm: `tl(a:u) -> u` and
/// `tl(zip_k(u0,..)) -> zip_k(u1,..,tl(u0))`.
fn step_tl(t: &Term) -> Option<Term> {
    match t.node() {
        TermNode::Var(_) => None,
        TermNode::Tl(inner) => match inner.node() {
            TermNode::Cons(_, rest) => Some(rest.clone()),
            TermNode::Zip(args) => {
                let mut rotated: Vec<Term> = args[1..].to_vec();
                rotated.push(Term::tl(args[0].clone()));
                Some(Term::zip(rotated))
            }
            _ => step_tl(inner).map(Term::tl),
        },
        TermNode::Cons(a, rest) => step_tl(rest).map(|r| Term::cons(a.clone(), r)),
        TermNode::Proj(i, k, inner) => step_tl(inner).map(|r| Term::proj(*i, *k, r)),
        TermNode::Zip(args) => {
            for (i, arg) in args.iter().enumerate() {
                if let Some(r) = step_tl(arg) {
                    let mut new_args = args.clone();
                    new_args[i] = r;
                    return Some(Term::zip(new_args));
                }
            }
            None
        }
    }
}

/// Hoists until the occurrences of `z` are guarded: if the equation of `z`
/// is cons-headed, hoist it; otherwise first make the leftmost variable of
/// its spine cons-headed, bubble the guard to the top by zip contractions,
/// and then hoist.
fn make_cons_headed(
    spec: ZipSpec,
    z: VarId,
    visiting: &mut HashSet<VarId>,
) -> Result<ZipSpec, AnalysisError> {
    if !visiting.insert(z.clone()) {
        return Err(AnalysisError::InternalNonTermination(format!(
            "cons demand revisited {z}"
        )));
    }
    let mut spec = spec;
    loop {
        let rhs = spec.rhs(&z).unwrap().clone();
        match rhs.node() {
            TermNode::Cons(_, _) => {
                if z == *spec.root() {
                    return Err(AnalysisError::RootHoistForbidden);
                }
                let out = hoist(&spec, &z)?;
                visiting.remove(&z);
                return Ok(out);
            }
            _ => match leftmost_leaf(&rhs) {
                SpineEnd::Cons => {
                    let bubbled = bubble_guard(&rhs)?;
                    spec = spec.with_rhs(&z, bubbled);
                }
                SpineEnd::Var(w) => {
                    spec = make_cons_headed(spec, w, visiting)?;
                }
                SpineEnd::Other => {
                    return Err(AnalysisError::InternalNonTermination(format!(
                        "left spine of {z} is not a zip term"
                    )))
                }
            },
        }
    }
}

enum SpineEnd {
    Cons,
    Var(VarId),
    Other,
}

/// Classifies the first non-zip term on the left spine.
fn leftmost_leaf(t: &Term) -> SpineEnd {
    match t.node() {
        TermNode::Cons(_, _) => SpineEnd::Cons,
        TermNode::Var(w) => SpineEnd::Var(w.clone()),
        TermNode::Zip(args) => leftmost_leaf(&args[0]),
        _ => SpineEnd::Other,
    }
}

/// Contracts zip redexes along the left spine until the term is cons-headed.
fn bubble_guard(t: &Term) -> Result<Term, AnalysisError> {
    match t.node() {
        TermNode::Cons(_, _) => Ok(t.clone()),
        TermNode::Zip(args) => {
            let first = bubble_guard(&args[0])?;
            match first.node() {
                TermNode::Cons(a, rest) => {
                    let mut rotated: Vec<Term> = args[1..].to_vec();
                    rotated.push(rest.clone());
                    Ok(Term::cons(a.clone(), Term::zip(rotated)))
                }
                _ => Err(AnalysisError::InternalNonTermination(
                    "guard did not bubble to a cons".into(),
                )),
            }
        }
        _ => Err(AnalysisError::InternalNonTermination(
            "no guard on the left spine".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{eval_prefix, RewriteBudget};

    fn morse() -> ZipSpec {
        ZipSpec::parse("M = 0:X; X = 1:zip(X,Y); Y = 0:zip(Y,X)").unwrap()
    }

    fn unprod() -> ZipSpec {
        ZipSpec::parse("alphabet 0 1\nroot X\nX = zip(1:X,Y)\nY = zip(Z,X)\nZ = zip(Y,0:Z)")
            .unwrap()
    }

    #[test]
    fn finds_the_unguarded_cycle() {
        let report = leftmost_cycles(&unprod()).unwrap();
        let unguarded: Vec<_> = report.unguarded().collect();
        assert_eq!(unguarded.len(), 1);
        assert_eq!(
            unguarded[0].vars,
            vec![VarId::new("Y"), VarId::new("Z")]
        );
        assert_eq!(report.representatives, vec![VarId::new("Y")]);
        // X's own cycle is guarded by 1:X
        assert!(report
            .cycles
            .iter()
            .any(|c| c.guarded && c.vars == vec![VarId::new("X")]));
        // the unguarded cycle's term path is Y ~> zip(Z,X) ~> Z ~> zip(Y,0:Z) ~> Y
        assert_eq!(unguarded[0].terms.len(), 5);
        assert_eq!(unguarded[0].terms[0], Term::var(VarId::new("Y")));
        assert_eq!(unguarded[0].terms[4], Term::var(VarId::new("Y")));
    }

    #[test]
    fn morse_cycles_are_guarded() {
        let report = leftmost_cycles(&morse()).unwrap();
        assert!(report.all_guarded());
        assert!(is_productive(&morse()));
    }

    #[test]
    fn self_loop_is_one_unguarded_cycle() {
        let spec = ZipSpec::parse("A = A").unwrap();
        let report = leftmost_cycles(&spec).unwrap();
        assert_eq!(report.cycles.len(), 1);
        assert!(!report.cycles[0].guarded);
        assert!(!is_productive(&spec));
        assert!(is_productive(&ZipSpec::parse("A = 0:A").unwrap()));
    }

    #[test]
    fn productivity_matches_paper_verdicts() {
        assert!(is_productive(&morse()));
        assert!(!is_productive(&unprod()));
    }

    #[test]
    fn hoist_moves_the_guard_to_occurrences() {
        let spec = ZipSpec::parse("root X\nX = zip(1:X,0:Y)\nY = 0:zip(Y,X)").unwrap();
        let out = evolve_step(&spec, &EvolveChoice::Hoist(VarId::new("Y"))).unwrap();
        let expect =
            ZipSpec::parse("root X\nX = zip(1:X,0:0:Y)\nY = zip(0:Y,X)").unwrap();
        assert_eq!(out.equations(), expect.equations());
    }

    #[test]
    fn zip_rewrite_contracts_the_redex() {
        let spec = ZipSpec::parse("root X\nX = 1:Z\nZ = zip(0:Y,0:Z)\nY = 1:Y").unwrap();
        let out = evolve_step(&spec, &EvolveChoice::ZipRewrite(VarId::new("Z"))).unwrap();
        assert_eq!(
            out.rhs(&VarId::new("Z")).unwrap().to_string(),
            "0:zip(0:Z,Y)"
        );
    }

    #[test]
    fn hoisting_the_root_is_forbidden() {
        let spec = ZipSpec::parse("root A\nA = 0:1:A").unwrap();
        let err = evolve_step(&spec, &EvolveChoice::Hoist(VarId::new("A"))).unwrap_err();
        assert_eq!(err, AnalysisError::RootHoistForbidden);
    }

    #[test]
    fn evolve_preserves_prefixes_of_productive_specs() {
        let spec = ZipSpec::parse("root X\nX = zip(1:X,0:Y)\nY = 0:zip(Y,X)").unwrap();
        let before = eval_prefix(&spec, 64, RewriteBudget::default()).unwrap();
        let hoisted = evolve_step(&spec, &EvolveChoice::Hoist(VarId::new("Y"))).unwrap();
        assert_eq!(
            before,
            eval_prefix(&hoisted, 64, RewriteBudget::default()).unwrap()
        );
        let spec2 = ZipSpec::parse("root X\nX = 1:Z\nZ = zip(0:Y,0:Z)\nY = 1:Y").unwrap();
        let before2 = eval_prefix(&spec2, 64, RewriteBudget::default()).unwrap();
        let rewritten =
            evolve_step(&spec2, &EvolveChoice::ZipRewrite(VarId::new("Z"))).unwrap();
        assert_eq!(
            before2,
            eval_prefix(&rewritten, 64, RewriteBudget::default()).unwrap()
        );
    }

    #[test]
    fn solve_all_matches_the_two_displayed_solutions() {
        let sols = solve_all(&unprod()).unwrap();
        assert_eq!(sols.len(), 2);
        let expect0 =
            ZipSpec::parse("root X\nX = zip(1:X,0:Y)\nY = zip(X,Z)\nZ = zip(0:0:Z,Y)").unwrap();
        let expect1 =
            ZipSpec::parse("root X\nX = zip(1:X,1:Y)\nY = zip(X,Z)\nZ = zip(0:1:Z,Y)").unwrap();
        assert_eq!(sols[0].equations(), expect0.equations());
        assert_eq!(sols[1].equations(), expect1.equations());
        for s in &sols {
            assert!(is_productive(s));
        }
    }

    #[test]
    fn solve_all_of_productive_spec_is_singleton() {
        let sols = solve_all(&morse()).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].equations(), morse().equations());
    }

    #[test]
    fn solve_all_rejects_zip_free_unguarded_cycles() {
        let spec = ZipSpec::parse("alphabet 0 1\nroot A\nA = A").unwrap();
        assert_eq!(
            solve_all(&spec).unwrap_err(),
            AnalysisError::ZipFreeUnguardedCycle
        );
    }

    #[test]
    fn solve_all_handles_self_zip_loop() {
        let spec = ZipSpec::parse("alphabet 0 1\nroot R\nR = 0:Y\nY = zip(Y,R)").unwrap();
        let sols = solve_all(&spec).unwrap();
        assert_eq!(sols.len(), 2);
        for (i, s) in sols.iter().enumerate() {
            assert!(is_productive(s), "solution {i} must be productive");
            let p = eval_prefix(s, 40, RewriteBudget::default()).unwrap();
            assert_eq!(p[0], Symbol::new("0"));
        }
    }
}
