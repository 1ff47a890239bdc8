//! Boolean algebra over the binary-photon occupancy events `A_s`.
//!
//! `A_s` is the event that level `s` (carrying `2^s` quanta) is occupied.
//! Levels are independent with `P(A_s) = x/(1 + x)`, `x = b^(2^s)`. A photon
//! number event `B_n` is the conjunction fixing every bit of `n` plus the
//! closure "all higher levels empty".
//!
//! Probabilities are generic over [`num_traits::Num`], so the same evaluator
//! runs on `f64` and on exact rationals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Num;

use crate::error::{invalid, Error, Result};

/// Default highest explicitly constrained level for photon-number events.
pub const DEFAULT_CAP: u32 = 16;

/// Largest number of distinct levels an expression may constrain.
pub const MAX_CONSTRAINED_LEVELS: usize = 24;

/// Boolean expression over occupancy atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    /// `A_s` when `occupied`, `Ā_s` otherwise.
    Atom { level: u32, occupied: bool },
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

impl Expr {
    pub fn occupied(level: u32) -> Self {
        Expr::Atom { level, occupied: true }
    }

    pub fn empty(level: u32) -> Self {
        Expr::Atom { level, occupied: false }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Expr::Not(Box::new(self))
    }

    fn collect_levels(&self, out: &mut BTreeSet<u32>) {
        match self {
            Expr::Atom { level, .. } => {
                out.insert(*level);
            }
            Expr::Not(e) => e.collect_levels(out),
            Expr::And(v) | Expr::Or(v) => v.iter().for_each(|e| e.collect_levels(out)),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Expr::Atom { .. } => Ok(()),
            Expr::Not(e) => e.validate(),
            Expr::And(v) | Expr::Or(v) if v.is_empty() => invalid("empty connective"),
            Expr::And(v) | Expr::Or(v) => v.iter().try_for_each(Expr::validate),
        }
    }

    /// Evaluates under a (possibly partial) assignment. `None` means the
    /// value still depends on unassigned levels.
    fn eval_partial(&self, assignment: &BTreeMap<u32, bool>) -> Option<bool> {
        match self {
            Expr::Atom { level, occupied } => assignment.get(level).map(|v| v == occupied),
            Expr::Not(e) => e.eval_partial(assignment).map(|v| !v),
            Expr::And(v) => {
                let mut unknown = false;
                for e in v {
                    match e.eval_partial(assignment) {
                        Some(false) => return Some(false),
                        None => unknown = true,
                        Some(true) => {}
                    }
                }
                (!unknown).then_some(true)
            }
            Expr::Or(v) => {
                let mut unknown = false;
                for e in v {
                    match e.eval_partial(assignment) {
                        Some(true) => return Some(true),
                        None => unknown = true,
                        Some(false) => {}
                    }
                }
                (!unknown).then_some(false)
            }
        }
    }

    fn holds(&self, photons: u64) -> bool {
        match self {
            Expr::Atom { level, occupied } => (*level < 64 && photons >> level & 1 == 1) == *occupied,
            Expr::Not(e) => !e.holds(photons),
            Expr::And(v) => v.iter().all(|e| e.holds(photons)),
            Expr::Or(v) => v.iter().any(|e| e.holds(photons)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(_) => 0,
            Expr::And(_) => 1,
            _ => 2,
        }
    }

    fn fmt_child(&self, child: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.precedence() < self.precedence() {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Atom { level, occupied: true } => write!(f, "A{level}"),
            Expr::Atom { level, occupied: false } => write!(f, "!A{level}"),
            Expr::Not(e) => {
                f.write_str("!")?;
                self.fmt_child(e, f)
            }
            Expr::And(v) | Expr::Or(v) => {
                let sep = if matches!(self, Expr::And(_)) { " & " } else { " | " };
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    self.fmt_child(e, f)?;
                }
                Ok(())
            }
        }
    }
}

/// An expression together with its highest constrained level `cap` and the
/// optional closure "every level above `cap` is empty".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventExpr {
    expr: Expr,
    cap: u32,
    closure: bool,
}

impl EventExpr {
    /// `cap` is taken as the highest level mentioned in `expr`.
    pub fn new(expr: Expr, closure: bool) -> Result<Self> {
        expr.validate()?;
        let mut levels = BTreeSet::new();
        expr.collect_levels(&mut levels);
        let cap = levels.last().copied().unwrap_or(0);
        Self::with_cap(expr, cap, closure)
    }

    /// Explicit `cap`; it must be at least the highest mentioned level.
    pub fn with_cap(expr: Expr, cap: u32, closure: bool) -> Result<Self> {
        expr.validate()?;
        let mut levels = BTreeSet::new();
        expr.collect_levels(&mut levels);
        if let Some(&top) = levels.last() {
            if top > cap {
                return invalid(format!("level {top} exceeds the declared cap {cap}"));
            }
        }
        if cap >= 64 {
            return Err(Error::Capacity(format!("cap {cap} leaves no room in a 64-bit photon number")));
        }
        Ok(Self { expr, cap, closure })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn has_closure(&self) -> bool {
        self.closure
    }

    /// Levels the expression actually mentions.
    pub fn levels(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.expr.collect_levels(&mut out);
        out
    }

    /// The complementary event. Only defined without closure, where the
    /// complement is again an expression over the same atoms.
    pub fn negate(&self) -> Result<Self> {
        if self.closure {
            return invalid("complement of a closed event is not an expression over finitely many atoms");
        }
        Ok(Self {
            expr: self.expr.clone().not(),
            cap: self.cap,
            closure: false,
        })
    }

    /// Whether a photon number `n` (bit pattern of its dyadic expansion)
    /// lies in the event.
    pub fn contains(&self, photons: u64) -> bool {
        if self.closure && self.cap < 63 && photons >> (self.cap + 1) != 0 {
            return false;
        }
        self.expr.holds(photons)
    }

    /// Disjoint cubes (partial assignments) whose union is the event,
    /// produced by Shannon expansion over the mentioned levels.
    fn cubes(&self) -> Result<Vec<BTreeMap<u32, bool>>> {
        let levels: Vec<u32> = self.levels().into_iter().collect();
        if levels.len() > MAX_CONSTRAINED_LEVELS {
            return Err(Error::Capacity(format!(
                "{} constrained levels exceed the limit of {MAX_CONSTRAINED_LEVELS}",
                levels.len()
            )));
        }
        let mut out = Vec::new();
        let mut assignment = BTreeMap::new();
        expand(&self.expr, &levels, &mut assignment, &mut out);
        Ok(out)
    }
}

fn expand(
    expr: &Expr,
    levels: &[u32],
    assignment: &mut BTreeMap<u32, bool>,
    out: &mut Vec<BTreeMap<u32, bool>>,
) {
    match expr.eval_partial(assignment) {
        Some(true) => out.push(assignment.clone()),
        Some(false) => {}
        None => {
            let (&level, rest) = levels.split_first().expect("undetermined expression has free levels");
            for value in [true, false] {
                assignment.insert(level, value);
                expand(expr, rest, assignment, out);
            }
            assignment.remove(&level);
        }
    }
}

impl fmt::Display for EventExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.closure {
            if matches!(self.expr, Expr::Or(_)) {
                write!(f, "({}) & ...rest-empty", self.expr)
            } else {
                write!(f, "{} & ...rest-empty", self.expr)
            }
        } else {
            write!(f, "{}", self.expr)
        }
    }
}

/// Scalar a probability can be computed in: `f64`, `BigRational`, ...
pub trait Probability: Num + Clone {}

impl<T: Num + Clone> Probability for T {}

fn square_n<P: Probability>(b: &P, s: u32) -> P {
    let mut x = b.clone();
    for _ in 0..s {
        x = x.clone() * x;
    }
    x
}

/// `P(A_s)` when `occupied`, `P(Ā_s)` otherwise, for ratio `b`.
pub fn atom_prob<P: Probability>(level: u32, b: &P, occupied: bool) -> P {
    let x = square_n(b, level);
    let denom = P::one() + x.clone();
    if occupied {
        x / denom
    } else {
        P::one() / denom
    }
}

/// `B_n` as a conjunction over levels `0..=cap`, closed above `cap`.
pub fn bn_to_expr(n: u64, cap: u32) -> Result<EventExpr> {
    if cap >= 64 || n >> (cap + 1) != 0 {
        return Err(Error::Capacity(format!("photon number {n} does not fit below level {cap}")));
    }
    let atoms = (0..=cap)
        .map(|s| Expr::Atom { level: s, occupied: n >> s & 1 == 1 })
        .collect();
    EventExpr::with_cap(Expr::And(atoms), cap, true)
}

/// Exact probability of the event for geometric ratio `b`.
///
/// Constrained levels are summed over disjoint cubes; levels of `0..=cap`
/// the expression leaves free integrate out. With closure, the tail factor
/// `Π_{s>cap} P(Ā_s)` is evaluated in closed form as `1 − b^(2^(cap+1))`.
pub fn eval_prob<P: Probability>(event: &EventExpr, b: &P) -> Result<P> {
    let mut total = P::zero();
    for cube in event.cubes()? {
        let term = cube
            .iter()
            .fold(P::one(), |acc, (&s, &occ)| acc * atom_prob(s, b, occ));
        total = total + term;
    }
    if event.closure {
        total = total * (P::one() - square_n(b, event.cap + 1));
    }
    Ok(total)
}

/// The set of photon numbers whose dyadic pattern satisfies a closed event.
pub fn expr_to_bn_set(event: &EventExpr) -> Result<BTreeSet<u64>> {
    if !event.closure {
        return invalid("photon-number set requires the rest-empty closure");
    }
    let free_budget = 1u64 << MAX_CONSTRAINED_LEVELS;
    let mut out = BTreeSet::new();
    for cube in event.cubes()? {
        let fixed: u64 = cube.iter().filter(|(_, &v)| v).map(|(&s, _)| 1u64 << s).sum();
        let free: Vec<u32> = (0..=event.cap).filter(|s| !cube.contains_key(s)).collect();
        if (1u64 << free.len().min(63)) > free_budget {
            return Err(Error::Capacity(format!("{} unconstrained levels below the cap", free.len())));
        }
        for mask in 0..(1u64 << free.len()) {
            let extra: u64 = free
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &s)| 1u64 << s)
                .sum();
            out.insert(fixed | extra);
        }
    }
    Ok(out)
}

/// Parses the textual event syntax.
///
/// ```text
/// event   := or [ '&' '...rest-empty' ]
/// or      := and ( '|' and )*
/// and     := unary ( '&' unary )*
/// unary   := '!' unary | 'A' digits | '(' or ')'
/// ```
///
/// `...rest-empty` may appear as any top-level conjunct and sets the closure.
pub fn parse_event(input: &str) -> Result<EventExpr> {
    let mut p = Parser { src: input.as_bytes(), pos: 0, closure: false };
    let expr = p.parse_or(true)?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.error("unexpected trailing input");
    }
    let expr = expr.ok_or_else(|| Error::Parse {
        position: 0,
        message: "event has no atoms".into(),
    })?;
    EventExpr::new(expr, p.closure)
}

const REST_EMPTY: &str = "...rest-empty";

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    closure: bool,
}

impl Parser<'_> {
    fn error<T>(&self, message: &str) -> Result<T> {
        Err(Error::Parse { position: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_or(&mut self, top: bool) -> Result<Option<Expr>> {
        let mut terms = Vec::new();
        let mut disjuncts = 0;
        loop {
            // `None` only when the conjunction was the closure marker alone
            if let Some(e) = self.parse_and(top)? {
                terms.push(e);
            }
            disjuncts += 1;
            if !self.eat(b'|') {
                break;
            }
        }
        if self.closure && disjuncts > 1 {
            return self.error("closure marker must be a top-level conjunct");
        }
        Ok(match terms.len() {
            0 => None,
            1 => terms.pop(),
            _ => Some(Expr::Or(terms)),
        })
    }

    fn parse_and(&mut self, top: bool) -> Result<Option<Expr>> {
        let mut terms = Vec::new();
        loop {
            self.skip_ws();
            if self.src[self.pos..].starts_with(REST_EMPTY.as_bytes()) {
                if !top {
                    return self.error("closure marker is only allowed at top level");
                }
                self.pos += REST_EMPTY.len();
                self.closure = true;
            } else {
                terms.push(self.parse_unary()?);
            }
            if !self.eat(b'&') {
                break;
            }
        }
        Ok(match terms.len() {
            0 => None,
            1 => terms.pop(),
            _ => Some(Expr::And(terms)),
        })
    }

    fn parse_unary(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.src.get(self.pos) {
            Some(b'!') => {
                self.pos += 1;
                Ok(match self.parse_unary()? {
                    Expr::Atom { level, occupied } => Expr::Atom { level, occupied: !occupied },
                    e => e.not(),
                })
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_or(false)?;
                if !self.eat(b')') {
                    return self.error("expected ')'");
                }
                inner.map_or_else(|| self.error("empty parentheses"), Ok)
            }
            Some(b'A') => {
                self.pos += 1;
                let start = self.pos;
                while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match digits.parse::<u32>() {
                    Ok(level) => Ok(Expr::occupied(level)),
                    Err(_) => self.error("expected a level number after 'A'"),
                }
            }
            Some(_) => self.error("expected 'A<level>', '!' or '('"),
            None => self.error("unexpected end of input"),
        }
    }
}
