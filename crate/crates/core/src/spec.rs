//! Stream specifications: a distinguished root variable plus one defining
//! equation per variable, together with the line-oriented text format.
//!
//! ```text
//! # comment
//! alphabet 0 1
//! root M
//! M = 0:X
//! X = 1:zip(X,Y)
//! Y = 0:zip(Y,X)
//! ```
//!
//! Symbols and identifiers are disambiguated by position: the token left of
//! `:` is a symbol, everything else is a variable. Lines may also be
//! separated by `;`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::term::{Symbol, Term, TermNode, VarId};

/// Which grammar fragment a specification lives in.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dialect {
    /// Every zip has the same arity `k`. Specifications without any zip
    /// default to `ZipK(2)`.
    ZipK(usize),
    /// Zips of several arities.
    ZipMix,
    /// Zips plus projections.
    ZipPi,
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dialect::ZipK(k) => write!(f, "zip-{k}"),
            Dialect::ZipMix => write!(f, "zip-mix"),
            Dialect::ZipPi => write!(f, "zip-pi"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("undefined variable {0}")]
    UndefinedVariable(String),
    #[error("duplicate equation for {0}")]
    DuplicateEquation(String),
    #[error("zip with zero arguments at {line}:{col}")]
    ArityZero { line: usize, col: usize },
    #[error("projection used outside the zip-pi dialect")]
    ProjInNonPiDialect,
    #[error("specification has no equations")]
    Empty,
    #[error("root variable {0} has no equation")]
    UnknownRoot(String),
}

/// A zip specification: alphabet, root, and ordered equations.
#[derive(Clone, PartialEq, Eq)]
pub struct ZipSpec {
    alphabet: Vec<Symbol>,
    root: VarId,
    equations: Vec<(VarId, Term)>,
    index: HashMap<VarId, usize>,
    dialect: Dialect,
}

impl ZipSpec {
    /// Builds a specification from equations, inferring the alphabet from
    /// cons heads when `alphabet` is `None` and the dialect from the zip
    /// arities and projections present.
    pub fn new(
        root: VarId,
        equations: Vec<(VarId, Term)>,
        alphabet: Option<Vec<Symbol>>,
    ) -> Result<ZipSpec, SpecError> {
        if equations.is_empty() {
            return Err(SpecError::Empty);
        }
        let mut index = HashMap::new();
        for (i, (v, _)) in equations.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(SpecError::DuplicateEquation(v.name().to_string()));
            }
        }
        if !index.contains_key(&root) {
            return Err(SpecError::UnknownRoot(root.name().to_string()));
        }
        for (_, t) in &equations {
            for v in t.variables() {
                if !index.contains_key(&v) {
                    return Err(SpecError::UndefinedVariable(v.name().to_string()));
                }
            }
        }
        let alphabet = match alphabet {
            Some(a) => a,
            None => {
                let mut heads = Vec::new();
                for (_, t) in &equations {
                    collect_heads(t, &mut heads);
                }
                heads
            }
        };
        let mut arities = Vec::new();
        let mut has_proj = false;
        for (_, t) in &equations {
            t.zip_arities(&mut arities);
            has_proj = has_proj || t.contains_proj();
        }
        arities.sort_unstable();
        arities.dedup();
        let dialect = if has_proj {
            Dialect::ZipPi
        } else if arities.len() > 1 {
            Dialect::ZipMix
        } else {
            Dialect::ZipK(arities.first().copied().unwrap_or(2))
        };
        Ok(ZipSpec {
            alphabet,
            root,
            equations,
            index,
            dialect,
        })
    }

    pub fn parse(text: &str) -> Result<ZipSpec, SpecError> {
        parse_spec(text)
    }

    /// Parses and then checks the result against an expected dialect.
    pub fn parse_as(text: &str, dialect: Dialect) -> Result<ZipSpec, SpecError> {
        let spec = parse_spec(text)?;
        match (dialect, spec.dialect) {
            (Dialect::ZipPi, _) => {}
            (_, Dialect::ZipPi) => return Err(SpecError::ProjInNonPiDialect),
            _ => {}
        }
        Ok(ZipSpec { dialect, ..spec })
    }

    pub fn root(&self) -> &VarId {
        &self.root
    }

    pub fn alphabet(&self) -> &[Symbol] {
        &self.alphabet
    }

    pub fn dialect(&self) -> Dialect {
        self.dialect
    }

    pub fn equations(&self) -> &[(VarId, Term)] {
        &self.equations
    }

    pub fn rhs(&self, v: &VarId) -> Option<&Term> {
        self.index.get(v).map(|&i| &self.equations[i].1)
    }

    pub fn variables(&self) -> impl Iterator<Item = &VarId> {
        self.equations.iter().map(|(v, _)| v)
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// Uniform zip arity for zip-k specs; `None` for mix/pi.
    pub fn uniform_arity(&self) -> Option<usize> {
        match self.dialect {
            Dialect::ZipK(k) => Some(k),
            _ => None,
        }
    }

    /// Replaces one equation, keeping order; the variable must exist.
    pub(crate) fn with_rhs(&self, v: &VarId, rhs: Term) -> ZipSpec {
        let mut out = self.clone();
        let i = out.index[v];
        out.equations[i].1 = rhs;
        out
    }

    /// Variables reachable from the root through right-hand sides.
    pub fn reachable(&self) -> HashSet<VarId> {
        let mut seen: HashSet<VarId> = HashSet::new();
        seen.insert(self.root.clone());
        let mut queue = vec![self.root.clone()];
        while let Some(v) = queue.pop() {
            if let Some(rhs) = self.rhs(&v) {
                for w in rhs.variables() {
                    if seen.insert(w.clone()) {
                        queue.push(w);
                    }
                }
            }
        }
        seen
    }

    /// Drops equations not reachable from the root.
    pub fn pruned(&self) -> ZipSpec {
        let reach = self.reachable();
        let equations: Vec<_> = self
            .equations
            .iter()
            .filter(|(v, _)| reach.contains(v))
            .cloned()
            .collect();
        ZipSpec::new(self.root.clone(), equations, Some(self.alphabet.clone()))
            .expect("pruning keeps the spec well-formed")
    }

    /// Renders the spec in the text format; `parse` of the result is
    /// structurally identical.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.alphabet.is_empty() {
            out.push_str("alphabet");
            for a in &self.alphabet {
                out.push(' ');
                out.push_str(a.name());
            }
            out.push('\n');
        }
        out.push_str(&format!("root {}\n", self.root));
        for (v, t) in &self.equations {
            out.push_str(&format!("{v} = {t}\n"));
        }
        out
    }

    /// Structural validation: unreachable variables, dialect violations and
    /// alphabet inconsistencies. An empty report means all invariants hold.
    pub fn validate(&self) -> Diagnostics {
        let mut report = Diagnostics::default();
        let reach = self.reachable();
        for (v, _) in &self.equations {
            if !reach.contains(v) {
                report.push(Diagnostic::UnreachableVariable(v.clone()));
            }
        }
        let mut arities = Vec::new();
        let mut has_proj = false;
        let mut heads = Vec::new();
        for (_, t) in &self.equations {
            t.zip_arities(&mut arities);
            has_proj = has_proj || t.contains_proj();
            collect_heads(t, &mut heads);
        }
        match self.dialect {
            Dialect::ZipK(k) => {
                for &a in &arities {
                    if a != k {
                        report.push(Diagnostic::DialectViolation {
                            expected: self.dialect,
                            found_arity: a,
                        });
                    }
                }
                if has_proj {
                    report.push(Diagnostic::ProjOutsidePi);
                }
            }
            Dialect::ZipMix => {
                if has_proj {
                    report.push(Diagnostic::ProjOutsidePi);
                }
            }
            Dialect::ZipPi => {}
        }
        for h in heads {
            if !self.alphabet.contains(&h) {
                report.push(Diagnostic::SymbolOutsideAlphabet(h));
            }
        }
        report
    }
}

impl fmt::Display for ZipSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for ZipSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Diagnostic {
    UnreachableVariable(VarId),
    DialectViolation { expected: Dialect, found_arity: usize },
    ProjOutsidePi,
    SymbolOutsideAlphabet(Symbol),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UnreachableVariable(v) => {
                write!(f, "variable {v} is not reachable from the root")
            }
            Diagnostic::DialectViolation {
                expected,
                found_arity,
            } => write!(f, "zip of arity {found_arity} in a {expected} specification"),
            Diagnostic::ProjOutsidePi => write!(f, "projection outside the zip-pi dialect"),
            Diagnostic::SymbolOutsideAlphabet(s) => {
                write!(f, "symbol {s} is not in the declared alphabet")
            }
        }
    }
}

#[derive(Clone, Default, Debug)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    fn push(&mut self, d: Diagnostic) {
        self.0.push(d);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when no diagnostic is worse than an unreachable-variable warning.
    pub fn only_warnings(&self) -> bool {
        self.0
            .iter()
            .all(|d| matches!(d, Diagnostic::UnreachableVariable(_)))
    }
}

fn collect_heads(t: &Term, out: &mut Vec<Symbol>) {
    match t.node() {
        TermNode::Var(_) => {}
        TermNode::Cons(a, rest) => {
            if !out.contains(a) {
                out.push(a.clone());
            }
            collect_heads(rest, out);
        }
        TermNode::Zip(args) => {
            for a in args {
                collect_heads(a, out);
            }
        }
        TermNode::Proj(_, _, t) | TermNode::Tl(t) => collect_heads(t, out),
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Cursor<'a> {
    text: &'a [u8],
    pos: usize,
    line: usize,
    line_start: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Cursor {
            text: text.as_bytes(),
            pos: 0,
            line,
            line_start: 0,
        }
    }

    fn col(&self) -> usize {
        self.pos - self.line_start + 1
    }

    fn error(&self, msg: impl Into<String>) -> SpecError {
        SpecError::Syntax {
            line: self.line,
            col: self.col(),
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && (self.text[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.text.get(self.pos).map(|&b| b as char)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while self
            .peek()
            .map(|c| c.is_ascii_alphanumeric() || c == '_')
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some(std::str::from_utf8(&self.text[start..self.pos]).unwrap())
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.text.len()
    }
}

const KEYWORDS: [&str; 4] = ["zip", "proj", "alphabet", "root"];

fn parse_term(cur: &mut Cursor) -> Result<Term, SpecError> {
    cur.skip_ws();
    let start_col = cur.col();
    let tok = cur
        .ident()
        .ok_or_else(|| cur.error("expected a symbol, variable, zip or proj"))?;
    match tok {
        "zip" => {
            cur.skip_ws();
            if !cur.eat('(') {
                return Err(cur.error("expected '(' after zip"));
            }
            cur.skip_ws();
            if cur.eat(')') {
                return Err(SpecError::ArityZero {
                    line: cur.line,
                    col: start_col,
                });
            }
            let mut args = vec![parse_term(cur)?];
            loop {
                cur.skip_ws();
                if cur.eat(',') {
                    args.push(parse_term(cur)?);
                } else if cur.eat(')') {
                    break;
                } else {
                    return Err(cur.error("expected ',' or ')' in zip arguments"));
                }
            }
            Ok(Term::zip(args))
        }
        "proj" => {
            cur.skip_ws();
            if !cur.eat('(') {
                return Err(cur.error("expected '(' after proj"));
            }
            let i = parse_nat(cur)?;
            cur.skip_ws();
            if !cur.eat(',') {
                return Err(cur.error("expected ',' after proj index"));
            }
            let k = parse_nat(cur)?;
            if k == 0 {
                return Err(cur.error("proj modulus must be at least 1"));
            }
            cur.skip_ws();
            if !cur.eat(',') {
                return Err(cur.error("expected ',' after proj modulus"));
            }
            let t = parse_term(cur)?;
            cur.skip_ws();
            if !cur.eat(')') {
                return Err(cur.error("expected ')' closing proj"));
            }
            Ok(Term::proj(i, k, t))
        }
        _ => {
            cur.skip_ws();
            if cur.eat(':') {
                // left of ':' is a symbol
                let tail = parse_term(cur)?;
                Ok(Term::cons(Symbol::new(tok), tail))
            } else {
                if KEYWORDS.contains(&tok) {
                    return Err(cur.error(format!("'{tok}' is a reserved word")));
                }
                Ok(Term::var(VarId::new(tok)))
            }
        }
    }
}

fn parse_nat(cur: &mut Cursor) -> Result<u64, SpecError> {
    cur.skip_ws();
    let tok = cur.ident().ok_or_else(|| cur.error("expected a number"))?;
    tok.parse::<u64>()
        .map_err(|_| cur.error(format!("expected a number, found '{tok}'")))
}

fn parse_spec(text: &str) -> Result<ZipSpec, SpecError> {
    let mut alphabet: Option<Vec<Symbol>> = None;
    let mut root: Option<VarId> = None;
    let mut equations: Vec<(VarId, Term)> = Vec::new();

    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        for chunk in line.split(';') {
            if chunk.trim().is_empty() {
                continue;
            }
            let mut cur = Cursor::new(chunk, lineno + 1);
            cur.skip_ws();
            let save = cur.pos;
            let head = cur.ident().ok_or_else(|| cur.error("expected a declaration"))?;
            match head {
                "alphabet" => {
                    let mut syms = alphabet.take().unwrap_or_default();
                    loop {
                        cur.skip_ws();
                        match cur.ident() {
                            Some(s) => {
                                let sym = Symbol::new(s);
                                if !syms.contains(&sym) {
                                    syms.push(sym);
                                }
                            }
                            None => break,
                        }
                    }
                    if syms.is_empty() {
                        return Err(cur.error("alphabet declaration needs at least one symbol"));
                    }
                    if !cur.at_end() {
                        return Err(cur.error("unexpected input after alphabet declaration"));
                    }
                    alphabet = Some(syms);
                }
                "root" => {
                    cur.skip_ws();
                    let name = cur.ident().ok_or_else(|| cur.error("expected root variable"))?;
                    root = Some(VarId::new(name));
                    if !cur.at_end() {
                        return Err(cur.error("unexpected input after root declaration"));
                    }
                }
                _ => {
                    cur.skip_ws();
                    if !cur.eat('=') {
                        return Err(cur.error("expected '=' in equation"));
                    }
                    if KEYWORDS.contains(&head) {
                        cur.pos = save;
                        return Err(cur.error(format!("'{head}' is a reserved word")));
                    }
                    let term = parse_term(&mut cur)?;
                    if !cur.at_end() {
                        return Err(cur.error("unexpected input after equation"));
                    }
                    let v = VarId::new(head);
                    if equations.iter().any(|(w, _)| *w == v) {
                        return Err(SpecError::DuplicateEquation(v.name().to_string()));
                    }
                    equations.push((v, term));
                }
            }
        }
    }

    let root = match root {
        Some(r) => r,
        None => equations
            .first()
            .map(|(v, _)| v.clone())
            .ok_or(SpecError::Empty)?,
    };
    ZipSpec::new(root, equations, alphabet)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> Symbol {
        Symbol::new(s)
    }

    #[test]
    fn parses_thue_morse_with_semicolons() {
        let s = ZipSpec::parse("M = 0:X; X = 1:zip(X,Y); Y = 0:zip(Y,X)").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.dialect(), Dialect::ZipK(2));
        assert_eq!(s.root().name(), "M");
        assert_eq!(s.alphabet(), &[sym("0"), sym("1")]);
    }

    #[test]
    fn parses_minimal_self_loop() {
        let s = ZipSpec::parse("root A\nA = A").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.rhs(&VarId::new("A")), Some(&Term::var(VarId::new("A"))));
    }

    #[test]
    fn rejects_undefined_variable() {
        let err = ZipSpec::parse("A = zip(B)").unwrap_err();
        assert_eq!(err, SpecError::UndefinedVariable("B".into()));
    }

    #[test]
    fn rejects_duplicates_and_zero_arity() {
        assert!(matches!(
            ZipSpec::parse("A = 0:A\nA = 1:A").unwrap_err(),
            SpecError::DuplicateEquation(_)
        ));
        assert!(matches!(
            ZipSpec::parse("A = zip()").unwrap_err(),
            SpecError::ArityZero { .. }
        ));
        assert!(matches!(
            ZipSpec::parse("A = proj(0,0,A)").unwrap_err(),
            SpecError::Syntax { .. }
        ));
    }

    #[test]
    fn print_parse_is_stable() {
        let s = ZipSpec::parse("M = 0:X; X = 1:zip(X,Y); Y = 0:zip(Y,X)").unwrap();
        let once = s.to_text();
        let again = ZipSpec::parse(&once).unwrap().to_text();
        assert_eq!(once, again);
    }

    #[test]
    fn prints_proj_and_wide_zip() {
        let s = ZipSpec::parse("A = proj(1,2,zip(A,A,A))").unwrap();
        assert_eq!(s.dialect(), Dialect::ZipPi);
        assert!(s.to_text().contains("proj(1,2,zip(A,A,A))"));
    }

    #[test]
    fn validate_flags_unreachable_and_dialect() {
        let s = ZipSpec::parse("root A\nA = 0:A\nB = 1:B").unwrap();
        let report = s.validate();
        assert!(!report.is_empty());
        assert!(report.only_warnings());
        assert!(matches!(report.0[0], Diagnostic::UnreachableVariable(_)));

        let s = ZipSpec::parse_as("A = zip(A,A,A)", Dialect::ZipK(2)).unwrap();
        let report = s.validate();
        assert!(report
            .0
            .iter()
            .any(|d| matches!(d, Diagnostic::DialectViolation { .. })));
    }

    #[test]
    fn validate_accepts_thue_morse() {
        let s = ZipSpec::parse("M = 0:X; X = 1:zip(X,Y); Y = 0:zip(Y,X)").unwrap();
        assert!(s.validate().is_empty());
    }
}
