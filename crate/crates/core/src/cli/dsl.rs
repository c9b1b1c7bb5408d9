//! The line-oriented system format.
//!
//! ```text
//! # rows {α,β}, columns αβ: every 2-set sums its two orderings to 1
//! ring Q
//! set B = orbit(k=2, group=[(1 2)])
//! set C = orbit(k=2, group=[])
//! rows B
//! cols C
//! entry row (a,b) col (a,b) = 1
//! target row (a,b) = 1
//! ```
//!
//! Variables are lowercase names and always denote pairwise distinct atoms
//! outside the object's literals; literals are positive integers. The
//! support of the matrix is the set of literals in its entry rules, and
//! likewise for the target. Rules that canonicalize to the same orbit are
//! merged when their coefficients agree and rejected otherwise.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::atoms::{Atom, PermGroup};
use crate::error::{Error, Result};
use crate::linvec::{SymMatrix, SymVector};
use crate::orbits::{Entry, OrbitDecl, OrbitSet, Pattern, ProductPattern};
use crate::ring::{parse_rational, Ring, RingElem};

/// A parsed system file.
#[derive(Clone, Debug)]
pub struct System {
    pub ring: Ring,
    /// Declared sets in order.
    pub sets: Vec<OrbitDecl>,
    pub matrix: SymMatrix,
    pub target: SymVector,
}

impl System {
    pub fn set(&self, id: &str) -> Option<&OrbitDecl> {
        self.sets.iter().find(|d| d.id == id)
    }

    /// The same system over another ring. Fractions must be integral there.
    pub fn with_ring(&self, ring: Ring) -> Result<System> {
        let target = SymVector::from_entries(
            self.target.domain().clone(),
            ring.clone(),
            self.target.support().clone(),
            self.target
                .entries()
                .iter()
                .map(|(p, c)| Ok((p.clone(), ring.from_rational(&c.to_rational())?)))
                .collect::<Result<_>>()?,
        )?;
        Ok(System {
            ring: ring.clone(),
            sets: self.sets.clone(),
            matrix: self.matrix.with_ring(ring)?,
            target,
        })
    }
}

impl PartialEq for System {
    fn eq(&self, other: &System) -> bool {
        self.ring == other.ring && self.sets == other.sets && self.matrix == other.matrix && self.target == other.target
    }
}

struct Cursor<'a> {
    line: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: self.line,
            column: self.text[..self.pos].chars().count() + 1,
            message: message.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let r = self.rest();
        self.pos += r.len() - r.trim_start().len();
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.rest().is_empty()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn word(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let r = self.rest();
        let n = r.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(r.len());
        if n == 0 {
            return self.err("expected a name");
        }
        self.pos += n;
        Ok(&r[..n])
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let save = self.pos;
        match self.word() {
            Ok(w) if w == kw => Ok(()),
            _ => {
                self.pos = save;
                self.err(format!("expected `{kw}`"))
            }
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_ws();
        let r = self.rest();
        let n = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
        if n == 0 {
            return self.err("expected a number");
        }
        match r[..n].parse() {
            Ok(v) => {
                self.pos += n;
                Ok(v)
            }
            Err(_) => self.err("number out of range"),
        }
    }

    fn finish(&mut self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }
}

/// A pattern as written: an optional set name and items.
struct RawPattern {
    set: Option<String>,
    items: Vec<RawItem>,
    column: usize,
}

enum RawItem {
    Atom(u32),
    Var(String),
}

fn raw_pattern(c: &mut Cursor) -> Result<RawPattern> {
    c.skip_ws();
    let column = c.pos;
    let set = if c.peek() == Some('(') { None } else { Some(c.word()?.to_string()) };
    c.expect("(")?;
    let mut items = Vec::new();
    if !c.eat(")") {
        loop {
            match c.peek() {
                Some(ch) if ch.is_ascii_digit() => {
                    let n = c.number()?;
                    if n == 0 || n > u32::MAX as usize {
                        return c.err("atoms are positive 32-bit integers");
                    }
                    items.push(RawItem::Atom(n as u32));
                }
                Some(ch) if ch.is_ascii_lowercase() => items.push(RawItem::Var(c.word()?.to_string())),
                _ => return c.err("expected an atom literal or a variable"),
            }
            if c.eat(")") {
                break;
            }
            c.expect(",")?;
        }
    }
    Ok(RawPattern { set, items, column })
}

fn coefficient(c: &mut Cursor, ring: &Ring) -> Result<RingElem> {
    c.skip_ws();
    let text = c.rest().trim();
    let Some(q) = parse_rational(text) else {
        return c.err("expected an integer or a fraction p/q");
    };
    match ring.from_rational(&q) {
        Ok(x) => {
            c.pos = c.text.len();
            Ok(x)
        }
        Err(e) => c.err(e.to_string()),
    }
}

fn cycles(c: &mut Cursor) -> Result<Vec<Vec<Vec<usize>>>> {
    c.expect("[")?;
    let mut gens = Vec::new();
    if c.eat("]") {
        return Ok(gens);
    }
    loop {
        let mut gen = Vec::new();
        while c.eat("(") {
            let mut cyc = Vec::new();
            while !c.eat(")") {
                cyc.push(c.number()?);
                c.eat(",");
            }
            gen.push(cyc);
        }
        if gen.is_empty() {
            return c.err("expected a cycle like (1 2)");
        }
        gens.push(gen);
        if c.eat("]") {
            return Ok(gens);
        }
        c.expect(",")?;
    }
}

struct Rule {
    line: usize,
    row: RawPattern,
    col: Option<RawPattern>,
    coef: RingElem,
}

/// Parses a system file. `ring` overrides the file's directive.
pub fn parse(text: &str, ring: Option<Ring>) -> Result<System> {
    let mut file_ring: Option<Ring> = None;
    let mut sets: Vec<OrbitDecl> = Vec::new();
    let mut rows: Option<(usize, Vec<String>)> = None;
    let mut cols: Option<(usize, Vec<String>)> = None;
    let mut rules: Vec<(usize, String)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut c = Cursor { line, text: body, pos: 0 };
        if c.at_end() {
            continue;
        }
        let kw = c.word()?;
        match kw {
            "ring" => {
                if file_ring.is_some() {
                    return c.err("ring declared twice");
                }
                let name = c.word()?;
                let r = match name {
                    "Q" => Ring::Rational,
                    "Z" => Ring::Integer,
                    "Zmod" => {
                        let m = c.number()?;
                        match Ring::modular(m) {
                            Ok(r) => r,
                            Err(e) => return c.err(e.to_string()),
                        }
                    }
                    _ => return c.err("expected Q, Z or Zmod <m>"),
                };
                c.finish()?;
                file_ring = Some(r);
            }
            "set" => {
                let id = c.word()?.to_string();
                if sets.iter().any(|d| d.id == id) {
                    return c.err(format!("set {id} declared twice"));
                }
                c.expect("=")?;
                c.keyword("orbit")?;
                c.expect("(")?;
                c.keyword("k")?;
                c.expect("=")?;
                let k = c.number()?;
                let gens = if c.eat(",") {
                    c.keyword("group")?;
                    c.expect("=")?;
                    cycles(&mut c)?
                } else {
                    Vec::new()
                };
                c.expect(")")?;
                c.finish()?;
                let group = match PermGroup::from_cycles(k, &gens) {
                    Ok(g) => g,
                    Err(e) => return c.err(e.to_string()),
                };
                sets.push(OrbitDecl::new(id, group));
            }
            "rows" | "cols" => {
                let mut ids = Vec::new();
                while !c.at_end() {
                    ids.push(c.word()?.to_string());
                }
                if ids.is_empty() {
                    return c.err("expected at least one set");
                }
                let slot = if kw == "rows" { &mut rows } else { &mut cols };
                if slot.is_some() {
                    return c.err(format!("{kw} declared twice"));
                }
                *slot = Some((line, ids));
            }
            "entry" | "target" => rules.push((line, body.to_string())),
            _ => return c.err(format!("unknown directive `{kw}`")),
        }
    }

    let ring = ring.or(file_ring).unwrap_or(Ring::Rational);
    let build_side = |side: Option<(usize, Vec<String>)>, what: &str| -> Result<Arc<OrbitSet>> {
        let Some((line, ids)) = side else {
            return Err(Error::Parse {
                line: text.lines().count().max(1),
                column: 1,
                message: format!("missing `{what}` declaration"),
            });
        };
        let mut decls = Vec::new();
        for id in ids {
            match sets.iter().find(|d| d.id == id) {
                Some(d) => decls.push(d.clone()),
                None => {
                    return Err(Error::Parse {
                        line,
                        column: 1,
                        message: format!("unknown set {id}"),
                    })
                }
            }
        }
        OrbitSet::new(decls).map(Arc::new).map_err(|e| Error::Parse {
            line,
            column: 1,
            message: e.to_string(),
        })
    };
    let rows = build_side(rows, "rows")?;
    let cols = build_side(cols, "cols")?;

    let mut entries: Vec<Rule> = Vec::new();
    let mut targets: Vec<Rule> = Vec::new();
    for (line, body) in &rules {
        let mut c = Cursor { line: *line, text: body, pos: 0 };
        let kw = c.word()?;
        c.keyword("row")?;
        let row = raw_pattern(&mut c)?;
        let col = if kw == "entry" {
            c.keyword("col")?;
            Some(raw_pattern(&mut c)?)
        } else {
            None
        };
        c.expect("=")?;
        let coef = coefficient(&mut c, &ring)?;
        let rule = Rule { line: *line, row, col, coef };
        if kw == "entry" {
            entries.push(rule);
        } else {
            targets.push(rule);
        }
    }

    let literals = |rs: &[Rule]| -> BTreeSet<Atom> {
        let mut s = BTreeSet::new();
        for r in rs {
            for p in std::iter::once(&r.row).chain(r.col.as_ref()) {
                for it in &p.items {
                    if let RawItem::Atom(n) = it {
                        s.insert(Atom::new(*n));
                    }
                }
            }
        }
        s
    };
    let s_matrix = literals(&entries);
    let s_target = literals(&targets);

    let mut matrix_rules: BTreeMap<ProductPattern, (RingElem, usize)> = BTreeMap::new();
    for r in &entries {
        let mut names = BTreeMap::new();
        let row = resolve(&rows, &r.row, r.line, &mut names)?;
        let col = resolve(&cols, r.col.as_ref().expect("entry rules have a column"), r.line, &mut names)?;
        let pp = ProductPattern::canonical(&rows, &cols, &row, &col);
        merge(&mut matrix_rules, pp, r)?;
    }
    let mut target_rules: BTreeMap<Pattern, (RingElem, usize)> = BTreeMap::new();
    for r in &targets {
        let p = resolve(&rows, &r.row, r.line, &mut BTreeMap::new())?;
        merge(&mut target_rules, rows.canonicalize(&p), r)?;
    }

    let matrix = SymMatrix::from_entries(
        rows.clone(),
        cols,
        ring.clone(),
        s_matrix,
        matrix_rules.into_iter().map(|(k, (v, _))| (k, v)).collect(),
    )?;
    let target = SymVector::from_entries(rows, ring.clone(), s_target, target_rules.into_iter().map(|(k, (v, _))| (k, v)).collect())?;
    Ok(System {
        ring,
        sets,
        matrix,
        target,
    })
}

fn merge<K: Ord>(map: &mut BTreeMap<K, (RingElem, usize)>, key: K, r: &Rule) -> Result<()> {
    match map.get(&key) {
        Some((c, first)) if *c != r.coef => Err(Error::Parse {
            line: r.line,
            column: 1,
            message: format!("rule denotes the same orbit as line {first} with a different coefficient"),
        }),
        Some(_) => Ok(()),
        None => {
            map.insert(key, (r.coef.clone(), r.line));
            Ok(())
        }
    }
}

fn resolve(set: &OrbitSet, raw: &RawPattern, line: usize, names: &mut BTreeMap<String, u32>) -> Result<Pattern> {
    let err = |message: String| Error::Parse {
        line,
        column: raw.column + 1,
        message,
    };
    let orbit = match &raw.set {
        Some(id) => set.index_of(id).ok_or_else(|| err(format!("set {id} is not on this side")))?,
        None if set.len() == 1 => 0,
        None => return Err(err("several sets on this side; prefix the pattern with one".into())),
    };
    let arity = set.orbit(orbit).arity;
    if raw.items.len() != arity {
        return Err(err(format!("expected {arity} items, got {}", raw.items.len())));
    }
    let mut entries = Vec::new();
    for it in &raw.items {
        entries.push(match it {
            RawItem::Atom(n) => Entry::Atom(Atom::new(*n)),
            RawItem::Var(name) => {
                let next = names.len() as u32;
                Entry::Var(*names.entry(name.clone()).or_insert(next))
            }
        });
    }
    let distinct: BTreeSet<&Entry> = entries.iter().collect();
    if distinct.len() != entries.len() {
        return Err(err("repeated atom in a pattern".into()));
    }
    Ok(Pattern { orbit, entries })
}

fn var_name(v: u32) -> String {
    if v < 26 {
        char::from(b'a' + v as u8).to_string()
    } else {
        format!("v{v}")
    }
}

fn print_pattern(set: &OrbitSet, p: &Pattern) -> String {
    let items: Vec<String> = p
        .entries
        .iter()
        .map(|e| match e {
            Entry::Atom(a) => a.to_string(),
            Entry::Var(v) => var_name(*v),
        })
        .collect();
    format!("{}({})", set.orbit(p.orbit).id, items.join(","))
}

fn print_cycles(g: &PermGroup) -> String {
    let gens: Vec<String> = g
        .generator_cycles()
        .iter()
        .filter(|cs| !cs.is_empty())
        .map(|cs| {
            cs.iter()
                .map(|c| format!("({})", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")))
                .collect::<String>()
        })
        .collect();
    format!("[{}]", gens.join(", "))
}

/// Writes a system back in the file format, one rule per orbit.
pub fn print(sys: &System) -> String {
    let mut out = String::new();
    let ring = match &sys.ring {
        Ring::Modular(m) => format!("Zmod {m}"),
        r => r.to_string(),
    };
    let _ = writeln!(out, "ring {ring}");
    for d in &sys.sets {
        let _ = writeln!(out, "set {} = orbit(k={}, group={})", d.id, d.arity, print_cycles(&d.group));
    }
    let ids = |s: &OrbitSet| s.orbits().iter().map(|d| d.id.clone()).collect::<Vec<_>>().join(" ");
    let rows = sys.matrix.rows();
    let cols = sys.matrix.cols();
    let _ = writeln!(out, "rows {}", ids(rows));
    let _ = writeln!(out, "cols {}", ids(cols));
    for (pp, c) in sys.matrix.entries() {
        let _ = writeln!(out, "entry row {} col {} = {c}", print_pattern(rows, &pp.row), print_pattern(cols, &pp.col));
    }
    for (p, c) in sys.target.entries() {
        let _ = writeln!(out, "target row {} = {c}", print_pattern(rows, p));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SYMMETRIC: &str = "\
# every 2-set sums its two orderings
ring Q
set B = orbit(k=2, group=[(1 2)])
set C = orbit(k=2, group=[])
rows B
cols C
entry row (a,b) col (a,b) = 1
entry row (a,b) col (b,a) = 1
target row (a,b) = 1
";

    const CYCLIC: &str = "\
ring Z
set R = orbit(k=3, group=[])
set C = orbit(k=2, group=[])
rows R
cols C
entry row (a,b,c) col (a,b) = 1
entry row (a,b,c) col (b,c) = -2
entry row (a,b,c) col (c,a) = 1
target row (a,b,c) = 1
";

    #[test]
    fn symmetric_rules_merge() {
        let sys = parse(SYMMETRIC, None).unwrap();
        assert_eq!(sys.ring, Ring::Rational);
        assert_eq!(sys.matrix.entries().len(), 1);
        assert_eq!(sys.target.entries().len(), 1);
        assert!(sys.matrix.support().is_empty());
    }

    #[test]
    fn three_rules() {
        let sys = parse(CYCLIC, None).unwrap();
        assert_eq!(sys.matrix.entries().len(), 3);
        assert_eq!(sys.ring, Ring::Integer);
    }

    #[test]
    fn empty_sections() {
        let sys = parse("set B = orbit(k=1)\nrows B\ncols B\n", None).unwrap();
        assert!(sys.matrix.entries().is_empty());
        assert!(sys.target.is_zero());
    }

    #[test]
    fn round_trip() {
        for text in [SYMMETRIC, CYCLIC] {
            let sys = parse(text, None).unwrap();
            let again = parse(&print(&sys), None).unwrap();
            assert_eq!(sys, again);
            assert_eq!(print(&sys), print(&again));
        }
        let text = "ring Zmod 6\nset A = orbit(k=1)\nset P = orbit(k=3, group=[(1 2 3), (1 2)])\nrows A P\ncols P\n\
                    entry row A(7) col P(7,x,y) = 5\nentry row P(x,y,z) col P(x,y,z) = -1\ntarget row A(7) = 2\n";
        let sys = parse(text, None).unwrap();
        assert_eq!(sys, parse(&print(&sys), None).unwrap());
    }

    fn parse_err(text: &str) -> (usize, String) {
        match parse(text, None) {
            Err(Error::Parse { line, message, .. }) => (line, message),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors() {
        let head = "set B = orbit(k=2, group=[])\nrows B\ncols B\n";
        assert_eq!(parse_err(&format!("{head}entry row (a,a) col (a,b) = 1\n")).0, 4);
        assert!(parse_err(&format!("{head}entry row (a,b) col (a,b) = 1\nentry row (x,y) col (x,y) = 2\n")).1.contains("line 4"));
        assert_eq!(parse_err(&format!("ring Z\n{head}target row (a,b) = 1/2\n")).0, 5);
        assert_eq!(parse_err("set B = orbit(k=2)\nrows X\ncols B\n").1, "unknown set X");
        assert_eq!(parse_err(&format!("{head}entry row (a) col (a,b) = 1\n")).0, 4);
        assert_eq!(parse_err("frobnicate\n").0, 1);
        let (line, _) = parse_err(&format!("{head}target row (a,b) = x\n"));
        assert_eq!(line, 4);
        assert!(parse_err("set B = orbit(k=2, group=[(1 3)])\n").1.contains("outside"));
    }

    #[test]
    fn ring_override() {
        let sys = parse(SYMMETRIC, Some(Ring::Integer)).unwrap();
        assert_eq!(sys.ring, Ring::Integer);
        assert_eq!(sys.with_ring(Ring::Rational).unwrap().ring, Ring::Rational);
    }
}
