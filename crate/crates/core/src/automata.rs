//! Automata with output and their numerations: k-DFAOs reading base-k digits
//! least significant first, state-dependent-alphabet DFAOs whose per-state
//! branching fixes a variadic numeration, invariance under leading zeros,
//! and the relabelings between such automata and observation graphs.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

use crate::graph::{Cobasis, GraphError, Node, NodeId, ObsGraph};
use crate::term::Symbol;

#[derive(Debug, Error)]
pub enum AutomatonError {
    #[error("automaton is not invariant under leading zeros at state {0}")]
    NotZeroInvariant(String),
    #[error("malformed automaton description: {0}")]
    BadDescription(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A deterministic finite automaton with output over the input alphabet
/// `{0,..,k-1}`. Words are read least significant digit first.
#[derive(Clone, Debug)]
pub struct Dfao {
    pub k: usize,
    states: Vec<State>,
    initial: usize,
}

/// A state-dependent-alphabet DFAO: state `q` reads digits below
/// `beta(q) = edges(q).len() >= 2`.
#[derive(Clone, Debug)]
pub struct MixDfao {
    states: Vec<State>,
    initial: usize,
}

#[derive(Clone, Debug)]
pub struct State {
    pub name: String,
    pub out: Symbol,
    pub next: Vec<usize>,
}

/// A mix-DFAO whose output is its own branching degree; it fixes the
/// numeration `(n)_P`.
#[derive(Clone, Debug)]
pub struct BaseDeterminer {
    states: Vec<BdState>,
    initial: usize,
}

#[derive(Clone, Debug)]
struct BdState {
    next: Vec<usize>,
}

/// Digits of a numeral, most significant first, without leading zeros; the
/// empty word encodes 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitWord {
    pub digits: Vec<u64>,
}

impl std::fmt::Display for DigitWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.digits.is_empty() {
            return f.write_str("eps");
        }
        if self.digits.iter().all(|&d| d < 10) {
            for d in &self.digits {
                write!(f, "{d}")?;
            }
            Ok(())
        } else {
            let text: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
            f.write_str(&text.join(" "))
        }
    }
}

/// Standard base-k digits of `n`, most significant first; `(0)_k` is empty.
pub fn digits_base_k(mut n: u64, k: u64) -> DigitWord {
    assert!(k >= 2);
    let mut digits = Vec::new();
    while n > 0 {
        digits.push(n % k);
        n /= k;
    }
    digits.reverse();
    DigitWord { digits }
}

impl Dfao {
    pub fn new(k: usize, states: Vec<State>, initial: usize) -> Result<Dfao, AutomatonError> {
        if k < 2 {
            return Err(AutomatonError::BadDescription(
                "input base must be at least 2".into(),
            ));
        }
        if initial >= states.len() {
            return Err(AutomatonError::BadDescription("missing initial state".into()));
        }
        for s in &states {
            if s.next.len() != k || s.next.iter().any(|&t| t >= states.len()) {
                return Err(AutomatonError::BadDescription(format!(
                    "state {} must have exactly {k} edges into the automaton",
                    s.name
                )));
            }
        }
        Ok(Dfao { k, states, initial })
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn step(&self, q: usize, digit: u64) -> usize {
        self.states[q].next[digit as usize]
    }

    pub fn is_zero_invariant(&self) -> bool {
        self.reachable()
            .into_iter()
            .all(|q| self.states[q].out == self.states[self.step(q, 0)].out)
    }

    fn reachable(&self) -> Vec<usize> {
        reachable_from(self.initial, |q| self.states[q].next.clone())
    }
}

impl MixDfao {
    pub fn new(states: Vec<State>, initial: usize) -> Result<MixDfao, AutomatonError> {
        if initial >= states.len() {
            return Err(AutomatonError::BadDescription("missing initial state".into()));
        }
        for s in &states {
            if s.next.len() < 2 || s.next.iter().any(|&t| t >= states.len()) {
                return Err(AutomatonError::BadDescription(format!(
                    "state {} must have at least 2 edges into the automaton",
                    s.name
                )));
            }
        }
        Ok(MixDfao { states, initial })
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn beta(&self, q: usize) -> u64 {
        self.states[q].next.len() as u64
    }

    pub fn step(&self, q: usize, digit: u64) -> usize {
        self.states[q].next[digit as usize]
    }

    /// The base determiner induced by this automaton: same transition
    /// structure, output replaced by the branching degree.
    pub fn induced_determiner(&self) -> BaseDeterminer {
        BaseDeterminer {
            states: self
                .states
                .iter()
                .map(|s| BdState { next: s.next.clone() })
                .collect(),
            initial: self.initial,
        }
    }

    pub fn is_zero_invariant(&self) -> bool {
        reachable_from(self.initial, |q| self.states[q].next.clone())
            .into_iter()
            .all(|q| self.states[q].out == self.states[self.step(q, 0)].out)
    }
}

impl BaseDeterminer {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn beta(&self, q: usize) -> u64 {
        self.states[q].next.len() as u64
    }

    pub fn step(&self, q: usize, digit: u64) -> usize {
        self.states[q].next[digit as usize]
    }
}

fn reachable_from(start: usize, next: impl Fn(usize) -> Vec<usize>) -> Vec<usize> {
    let mut seen = vec![start];
    let mut queue = vec![start];
    while let Some(q) = queue.pop() {
        for t in next(q) {
            if !seen.contains(&t) {
                seen.push(t);
                queue.push(t);
            }
        }
    }
    seen
}

/// The base-P representation of `n` from the initial state of `P`:
/// `(n)_{P,q} = (n')_{P,step(q,d)} . d` with `d = n mod beta(q)` and
/// `n' = n div beta(q)`; `(0)_P` is empty.
pub fn repr_mix(n: u64, p: &BaseDeterminer) -> DigitWord {
    repr_mix_from(n, p, p.initial)
}

pub fn repr_mix_from(mut n: u64, p: &BaseDeterminer, mut q: usize) -> DigitWord {
    let mut digits = Vec::new();
    while n > 0 {
        let b = p.beta(q);
        let d = n % b;
        digits.push(d);
        q = p.step(q, d);
        n /= b;
    }
    digits.reverse();
    DigitWord { digits }
}

/// Folds a base-P digit word back into the number it denotes, starting at
/// state `q`; the inverse of [`repr_mix_from`].
pub fn value_of_repr(word: &DigitWord, p: &BaseDeterminer, q: usize) -> u64 {
    // walk the consumption order (least significant first) to learn the
    // base in force at every digit, then fold most significant first
    let mut bases = Vec::with_capacity(word.digits.len());
    let mut at = q;
    for &d in word.digits.iter().rev() {
        bases.push(p.beta(at));
        at = p.step(at, d);
    }
    bases.reverse();
    let mut acc: u64 = 0;
    for (&d, &b) in word.digits.iter().zip(bases.iter()) {
        acc = acc * b + d;
    }
    acc
}

/// The stream entry `A_q(n) = out(step(q, (n)_k))`.
pub fn generate(a: &Dfao, q: usize, n: u64) -> Symbol {
    let word = digits_base_k(n, a.k as u64);
    let mut at = q;
    for &d in word.digits.iter().rev() {
        at = a.step(at, d);
    }
    a.states[at].out.clone()
}

/// The stream entry `A_q(n) = out(step(q, (n)_P))` for the numeration
/// induced by the automaton itself, started at `q`.
pub fn generate_mix(a: &MixDfao, q: usize, n: u64) -> Symbol {
    let p = a.induced_determiner();
    let word = repr_mix_from(n, &p, q);
    let mut at = q;
    for &d in word.digits.iter().rev() {
        at = a.step(at, d);
    }
    a.states[at].out.clone()
}

// ---------------------------------------------------------------------------
// Invariance under leading zeros
// ---------------------------------------------------------------------------

/// Builds an automaton invariant under leading zeros that generates the same
/// stream: states are paired with an optional output override, the 0-edge
/// carries the current output forward, every other edge resets to the plain
/// state. Only the reachable part is kept.
pub fn make_zero_invariant_dfao(a: &Dfao) -> Dfao {
    let (states, initial) = zero_invariant_product(&a.states, a.initial);
    Dfao {
        k: a.k,
        states,
        initial,
    }
}

pub fn make_zero_invariant_mix(a: &MixDfao) -> MixDfao {
    let (states, initial) = zero_invariant_product(&a.states, a.initial);
    MixDfao { states, initial }
}

fn zero_invariant_product(states: &[State], initial: usize) -> (Vec<State>, usize) {
    type Key = (usize, Option<Symbol>);
    let start: Key = (initial, None);
    let mut ids: HashMap<Key, usize> = HashMap::new();
    let mut order: Vec<Key> = vec![start.clone()];
    ids.insert(start, 0);
    let mut out_states: Vec<State> = Vec::new();
    let mut at = 0;
    while at < order.len() {
        let (q, over) = order[at].clone();
        let out = over.clone().unwrap_or_else(|| states[q].out.clone());
        let mut next = Vec::with_capacity(states[q].next.len());
        for (d, &target) in states[q].next.iter().enumerate() {
            let key: Key = if d == 0 {
                (target, Some(out.clone()))
            } else {
                (target, None)
            };
            let fresh = order.len();
            let id = *ids.entry(key.clone()).or_insert_with(|| {
                order.push(key);
                fresh
            });
            next.push(id);
        }
        let name = match &over {
            None => states[q].name.clone(),
            Some(c) => format!("{}/{}", states[q].name, c),
        };
        out_states.push(State { name, out, next });
        at += 1;
    }
    (out_states, 0)
}

// ---------------------------------------------------------------------------
// Graphs and automata are the same structure up to notation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub enum Automaton {
    Dfao(Dfao),
    Mix(MixDfao),
}

impl Automaton {
    pub fn generate(&self, n: u64) -> Symbol {
        match self {
            Automaton::Dfao(a) => generate(a, a.initial, n),
            Automaton::Mix(a) => generate_mix(a, a.initial, n),
        }
    }
}

/// Relabels a zero-invariant automaton as an observation graph over `N(k)`
/// (or the mix cobasis); the graph defines the generated stream. Only the
/// reachable part is kept.
pub fn dfao_to_graph(a: &Automaton) -> Result<ObsGraph, AutomatonError> {
    let (states, initial, cobasis) = match a {
        Automaton::Dfao(d) => {
            if !d.is_zero_invariant() {
                let bad = d
                    .reachable()
                    .into_iter()
                    .find(|&q| d.states[q].out != d.states[d.step(q, 0)].out)
                    .unwrap();
                return Err(AutomatonError::NotZeroInvariant(
                    d.states[bad].name.clone(),
                ));
            }
            (&d.states, d.initial, Cobasis::N(d.k))
        }
        Automaton::Mix(m) => {
            if !m.is_zero_invariant() {
                let bad = reachable_from(m.initial, |q| m.states[q].next.clone())
                    .into_iter()
                    .find(|&q| m.states[q].out != m.states[m.step(q, 0)].out)
                    .unwrap();
                return Err(AutomatonError::NotZeroInvariant(
                    m.states[bad].name.clone(),
                ));
            }
            (&m.states, m.initial, Cobasis::Mix)
        }
    };
    let reach = reachable_from(initial, |q| states[q].next.clone());
    let mut order: Vec<usize> = reach;
    order.sort_unstable();
    let renumber: HashMap<usize, usize> =
        order.iter().enumerate().map(|(new, &q)| (q, new)).collect();
    let nodes = order
        .iter()
        .map(|&q| Node {
            name: states[q].name.clone(),
            out: states[q].out.clone(),
            succ: states[q]
                .next
                .iter()
                .map(|t| NodeId(renumber[t]))
                .collect(),
        })
        .collect();
    Ok(ObsGraph::new(cobasis, NodeId(renumber[&initial]), nodes)?)
}

/// The inverse relabeling: an `N(k)` graph becomes a k-DFAO, a mix graph a
/// mix-DFAO; the automaton is invariant under zeros and generates the stream
/// the graph defines.
pub fn graph_to_dfao(g: &ObsGraph) -> Result<Automaton, AutomatonError> {
    let states: Vec<State> = g
        .nodes()
        .iter()
        .map(|n| State {
            name: n.name.clone(),
            out: n.out.clone(),
            next: n.succ.iter().map(|s| s.0).collect(),
        })
        .collect();
    match g.cobasis() {
        Cobasis::N(k) => Ok(Automaton::Dfao(Dfao::new(k, states, g.root().0)?)),
        Cobasis::Mix => Ok(Automaton::Mix(MixDfao::new(states, g.root().0)?)),
        c => Err(AutomatonError::BadDescription(format!(
            "cannot read an automaton off a {c} graph"
        ))),
    }
}

/// The mix-DFAO generating `zip(A, B)`: a fresh binary root dispatching even
/// positions to `A` and odd positions to `B`.
pub fn zip_for_mix_demo(a: &Dfao, b: &Dfao) -> MixDfao {
    let offset_a = 1;
    let offset_b = 1 + a.states.len();
    let mut states = vec![State {
        name: "s0".into(),
        out: a.states[a.initial].out.clone(),
        next: vec![offset_a + a.initial, offset_b + b.initial],
    }];
    for s in &a.states {
        states.push(State {
            name: format!("a_{}", s.name),
            out: s.out.clone(),
            next: s.next.iter().map(|t| offset_a + t).collect(),
        });
    }
    for s in &b.states {
        states.push(State {
            name: format!("b_{}", s.name),
            out: s.out.clone(),
            next: s.next.iter().map(|t| offset_b + t).collect(),
        });
    }
    MixDfao { states, initial: 0 }
}

// ---------------------------------------------------------------------------
// JSON format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct AutomatonJson {
    kind: String,
    states: Vec<StateJson>,
    initial: String,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    id: String,
    out: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<usize>,
    edges: Vec<String>,
}

impl Automaton {
    pub fn to_json(&self) -> String {
        let (kind, states, initial, is_mix) = match self {
            Automaton::Dfao(a) => ("dfao", &a.states, a.initial, false),
            Automaton::Mix(a) => ("mixdfao", &a.states, a.initial, true),
        };
        let doc = AutomatonJson {
            kind: kind.to_string(),
            states: states
                .iter()
                .map(|s| StateJson {
                    id: s.name.clone(),
                    out: s.out.to_string(),
                    beta: is_mix.then_some(s.next.len()),
                    edges: s.next.iter().map(|&t| states[t].name.clone()).collect(),
                })
                .collect(),
            initial: states[initial].name.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("automaton serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Automaton, AutomatonError> {
        let doc: AutomatonJson = serde_json::from_str(text)
            .map_err(|e| AutomatonError::BadDescription(e.to_string()))?;
        let ids: HashMap<&str, usize> = doc
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect();
        if ids.len() != doc.states.len() {
            return Err(AutomatonError::BadDescription(
                "duplicate state ids".into(),
            ));
        }
        let resolve = |name: &str| {
            ids.get(name).copied().ok_or_else(|| {
                AutomatonError::BadDescription(format!("unknown state id {name}"))
            })
        };
        let mut states = Vec::with_capacity(doc.states.len());
        for s in &doc.states {
            if let Some(beta) = s.beta {
                if beta != s.edges.len() {
                    return Err(AutomatonError::BadDescription(format!(
                        "state {}: beta {} does not match {} edges",
                        s.id,
                        beta,
                        s.edges.len()
                    )));
                }
            }
            states.push(State {
                name: s.id.clone(),
                out: Symbol::new(&s.out),
                next: s
                    .edges
                    .iter()
                    .map(|e| resolve(e))
                    .collect::<Result<_, _>>()?,
            });
        }
        let initial = resolve(&doc.initial)?;
        match doc.kind.as_str() {
            "dfao" => {
                let k = states
                    .first()
                    .map(|s| s.next.len())
                    .ok_or_else(|| AutomatonError::BadDescription("no states".into()))?;
                if states.iter().any(|s| s.next.len() != k) {
                    return Err(AutomatonError::BadDescription(
                        "dfao states must all have the same number of edges".into(),
                    ));
                }
                Ok(Automaton::Dfao(Dfao::new(k, states, initial)?))
            }
            "mixdfao" => Ok(Automaton::Mix(MixDfao::new(states, initial)?)),
            other => Err(AutomatonError::BadDescription(format!(
                "unknown automaton kind {other}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{bisimilar, minimize, ObsGraph};
    use crate::spec::ZipSpec;

    fn sym(s: &str) -> Symbol {
        Symbol::new(s)
    }

    /// The familiar minimal DFAO for the Thue-Morse sequence.
    fn tm_dfao() -> Dfao {
        Dfao::new(
            2,
            vec![
                State {
                    name: "q0".into(),
                    out: sym("0"),
                    next: vec![0, 1],
                },
                State {
                    name: "q1".into(),
                    out: sym("1"),
                    next: vec![1, 0],
                },
            ],
            0,
        )
        .unwrap()
    }

    /// The worked three-state mix automaton with bases (2, 3, 2).
    fn mix_example() -> MixDfao {
        MixDfao::new(
            vec![
                State {
                    name: "q0".into(),
                    out: sym("a"),
                    next: vec![0, 1],
                },
                State {
                    name: "q1".into(),
                    out: sym("b"),
                    next: vec![2, 0, 1],
                },
                State {
                    name: "q2".into(),
                    out: sym("b"),
                    next: vec![1, 0],
                },
            ],
            0,
        )
        .unwrap()
    }

    const MIX_PREFIX: &str = "abbabbaabbbaaaabbbbbbaaaabab";

    #[test]
    fn base_k_digits() {
        assert_eq!(digits_base_k(6, 2).digits, vec![1, 1, 0]);
        assert_eq!(digits_base_k(0, 7).digits, Vec::<u64>::new());
        assert_eq!(digits_base_k(23, 3).digits, vec![2, 1, 2]);
    }

    #[test]
    fn mix_representation_examples() {
        let p = mix_example().induced_determiner();
        assert_eq!(repr_mix(5, &p).to_string(), "21");
        assert_eq!(repr_mix(23, &p).to_string(), "1021");
        assert_eq!(repr_mix(0, &p).to_string(), "eps");
    }

    #[test]
    fn mix_representation_round_trips() {
        let p = mix_example().induced_determiner();
        for n in 0..10_000 {
            let w = repr_mix(n, &p);
            assert_eq!(value_of_repr(&w, &p, p.initial()), n, "n = {n}");
        }
    }

    #[test]
    fn tm_dfao_generates_thue_morse() {
        let a = tm_dfao();
        let prefix: String = (0..16)
            .map(|n| generate(&a, 0, n).to_string())
            .collect();
        assert_eq!(prefix, "0110100110010110");
        assert_eq!(generate(&a, 0, 0), sym("0")); // empty word
        assert_eq!(generate(&a, 0, 5), sym("0"));
    }

    #[test]
    fn mix_example_generates_the_listing() {
        let a = mix_example();
        let prefix: String = (0..28)
            .map(|n| generate_mix(&a, 0, n).to_string())
            .collect();
        assert_eq!(prefix, MIX_PREFIX);
        assert_eq!(generate_mix(&a, 0, 23), sym("a"));
        assert_eq!(generate_mix(&a, 0, 5), sym("b"));
        assert_eq!(generate_mix(&a, 0, 14), sym("a"));
    }

    #[test]
    fn zero_invariance_construction() {
        // 0-edge changes the output: not invariant
        let a = Dfao::new(
            2,
            vec![
                State {
                    name: "q0".into(),
                    out: sym("0"),
                    next: vec![1, 0],
                },
                State {
                    name: "q1".into(),
                    out: sym("1"),
                    next: vec![0, 1],
                },
            ],
            0,
        )
        .unwrap();
        assert!(!a.is_zero_invariant());
        let fixed = make_zero_invariant_dfao(&a);
        assert!(fixed.is_zero_invariant());
        for n in 0..200 {
            assert_eq!(generate(&a, a.initial, n), generate(&fixed, fixed.initial, n));
        }

        // already invariant: the mix example stays the same size after collapse
        let m = mix_example();
        assert!(m.is_zero_invariant());
        let fixed = make_zero_invariant_mix(&m);
        assert!(fixed.is_zero_invariant());
        for n in 0..200 {
            assert_eq!(generate_mix(&m, 0, n), generate_mix(&fixed, 0, n));
        }
        let g1 = dfao_to_graph(&Automaton::Mix(m)).unwrap();
        let g2 = dfao_to_graph(&Automaton::Mix(fixed)).unwrap();
        let (m1, m2) = (minimize(&g1), minimize(&g2));
        assert_eq!(m1.len(), m2.len());
        assert!(bisimilar(&m1, &m2).unwrap().is_bisimilar());
    }

    #[test]
    fn tm_dfao_graph_is_the_minimal_morse_graph() {
        let g = dfao_to_graph(&Automaton::Dfao(tm_dfao())).unwrap();
        assert_eq!(g.len(), 2);
        let spec = ZipSpec::parse("M = 0:X; X = 1:zip(X,Y); Y = 0:zip(Y,X)").unwrap();
        let morse_min = minimize(&ObsGraph::of_spec(&spec).unwrap());
        assert!(bisimilar(&g, &morse_min).unwrap().is_bisimilar());
    }

    #[test]
    fn mix_example_graph_matches_the_spec_graph() {
        let g = dfao_to_graph(&Automaton::Mix(mix_example())).unwrap();
        let spec = ZipSpec::parse(
            "root X0
             X0 = a:X0t; X0t = zip(X1,X0t)
             X1 = b:X1t; X1t = zip(X0,X1,X2t)
             X2 = b:X2t; X2t = zip(X0,X1t)",
        )
        .unwrap();
        let from_spec = minimize(&ObsGraph::of_spec(&spec).unwrap());
        let minimized = minimize(&g);
        assert_eq!(from_spec.len(), minimized.len());
        assert!(bisimilar(&minimized, &from_spec).unwrap().is_bisimilar());
        // arities mirror the automaton bases
        let mut arities: Vec<usize> = (0..minimized.len())
            .map(|i| minimized.arity(NodeId(i)))
            .collect();
        arities.sort_unstable();
        assert_eq!(arities, vec![2, 2, 3]);
    }

    #[test]
    fn graph_automaton_round_trip() {
        let g = dfao_to_graph(&Automaton::Dfao(tm_dfao())).unwrap();
        let a = graph_to_dfao(&g).unwrap();
        let g2 = dfao_to_graph(&a).unwrap();
        assert_eq!(g.len(), g2.len());
        assert!(bisimilar(&g, &g2).unwrap().is_bisimilar());
    }

    #[test]
    fn zip_demo_interleaves_the_streams() {
        // parity automaton over base 3: n mod 2
        let alt3 = Dfao::new(
            3,
            vec![
                State {
                    name: "even".into(),
                    out: sym("0"),
                    next: vec![0, 1, 0],
                },
                State {
                    name: "odd".into(),
                    out: sym("1"),
                    next: vec![1, 0, 1],
                },
            ],
            0,
        )
        .unwrap();
        let tm = tm_dfao();
        let c = zip_for_mix_demo(&tm, &alt3);
        assert_eq!(generate_mix(&c, 0, 0), generate(&tm, 0, 0));
        for n in 0..64 {
            let expect = if n % 2 == 0 {
                generate(&tm, 0, n / 2)
            } else {
                generate(&alt3, 0, n / 2)
            };
            assert_eq!(generate_mix(&c, 0, n), expect, "position {n}");
        }

        // constant zip of constants stays constant
        let zero = Dfao::new(
            2,
            vec![State {
                name: "z".into(),
                out: sym("0"),
                next: vec![0, 0],
            }],
            0,
        )
        .unwrap();
        let cc = zip_for_mix_demo(&zero, &zero);
        for n in 0..32 {
            assert_eq!(generate_mix(&cc, 0, n), sym("0"));
        }
    }

    #[test]
    fn automaton_json_round_trip() {
        let a = Automaton::Mix(mix_example());
        let text = a.to_json();
        assert!(text.contains("\"kind\": \"mixdfao\"") && text.contains("\"beta\": 3"));
        let back = Automaton::from_json(&text).unwrap();
        for n in 0..64 {
            assert_eq!(a.generate(n), back.generate(n));
        }
        let d = Automaton::Dfao(tm_dfao());
        let back = Automaton::from_json(&d.to_json()).unwrap();
        for n in 0..64 {
            assert_eq!(d.generate(n), back.generate(n));
        }
    }

    #[test]
    fn non_invariant_automaton_is_rejected_by_the_graph_view() {
        let a = Dfao::new(
            2,
            vec![
                State {
                    name: "q0".into(),
                    out: sym("0"),
                    next: vec![1, 0],
                },
                State {
                    name: "q1".into(),
                    out: sym("1"),
                    next: vec![0, 1],
                },
            ],
            0,
        )
        .unwrap();
        assert!(matches!(
            dfao_to_graph(&Automaton::Dfao(a)),
            Err(AutomatonError::NotZeroInvariant(_))
        ));
    }
}
