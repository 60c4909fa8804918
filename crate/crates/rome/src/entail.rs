//! Predicate entailment: the decision procedure behind implicit evidence.
//!
//! Goals over literal rows are solved directly by locating entries (the
//! base containment and combination rules). Goals mentioning row variables
//! are solved by saturating the hypothesis set: combination hypotheses
//! contribute their containments, containment hypotheses contribute
//! complement combinations, containments close under transitivity to a
//! bounded depth, and everything lifts through maps whose operator is read
//! off the goal. Matching binds the checker's metavariables through the
//! [`SolveCtx`] callbacks.
//!
//! Evidence reduction (to `Incl`/`Comb` values), the `pick` and `dual`
//! index-map functions, and the declarative evidence checker used by the
//! re-checking mode also live here.

use std::fmt;

use crate::norm;
use crate::syntax::*;

#[derive(Debug, Clone)]
pub struct EntailConfig {
    pub max_depth: usize,
}

impl Default for EntailConfig {
    fn default() -> Self {
        EntailConfig { max_depth: 4 }
    }
}

/// Callbacks into the caller's unification state. The ground
/// implementation ([`GroundCtx`]) treats unification as syntactic
/// equality.
pub trait SolveCtx {
    fn delta(&self) -> &[Kind];
    /// Attempt to unify; may bind metavariables. Must be undone by
    /// `rollback` on failure of the enclosing attempt.
    fn unify(&mut self, a: &NormalType, b: &NormalType, kind: &Kind) -> bool;
    fn zonk(&self, t: &NormalType, kind: &Kind) -> NormalType;
    fn normalize_core(&self, ty: &Type, kind: &Kind) -> NormalType;
    fn snapshot(&self) -> usize;
    fn rollback(&mut self, snap: usize);
    fn kind_of_meta(&self, m: MetaId) -> Option<Kind>;
}

/// Solver context with no metavariables.
pub struct GroundCtx {
    pub delta: Vec<Kind>,
}

impl SolveCtx for GroundCtx {
    fn delta(&self) -> &[Kind] {
        &self.delta
    }
    fn unify(&mut self, a: &NormalType, b: &NormalType, _kind: &Kind) -> bool {
        a == b
    }
    fn zonk(&self, t: &NormalType, _kind: &Kind) -> NormalType {
        t.clone()
    }
    fn normalize_core(&self, ty: &Type, kind: &Kind) -> NormalType {
        norm::normalize(&norm::NoMetas, &self.delta, ty, kind)
    }
    fn snapshot(&self) -> usize {
        0
    }
    fn rollback(&mut self, _snap: usize) {}
    fn kind_of_meta(&self, _m: MetaId) -> Option<Kind> {
        None
    }
}

/// Failure modes: `Unsolvable` is definitive (a type error in user code);
/// `NotYet` means unsolved metavariables block progress and the goal
/// should be retried after other goals bind them.
#[derive(Debug, Clone)]
pub enum SolveFailure {
    Unsolvable { goal: NormalPred, facts: Vec<NormalPred> },
    NotYet,
}

impl fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            SolveFailure::Unsolvable { goal, facts } => {
                write!(f, "cannot solve predicate {}", crate::pretty::normal_pred(goal))?;
                if !facts.is_empty() {
                    write!(f, "\n  given:")?;
                    for p in facts {
                        write!(f, "\n    {}", crate::pretty::normal_pred(p))?;
                    }
                }
                Ok(())
            }
            SolveFailure::NotYet => write!(f, "predicate not yet solvable"),
        }
    }
}

#[derive(Debug, Clone)]
struct Fact {
    pred: NormalPred,
    ev: Evidence,
}

fn is_bare_meta_row(t: &NormalType) -> bool {
    match t {
        NormalType::Map(_, n) => matches!(n.head, Head::Meta(_)) && n.args.is_empty(),
        _ => false,
    }
}

fn row_lit(t: &NormalType) -> Option<&[(Label, NormalType)]> {
    t.as_row_lit()
}

/// Locate each entry of `sub` in `sup` by label, unifying payload types.
/// Returns the (necessarily strictly increasing) index map.
fn match_literal_into(
    ctx: &mut dyn SolveCtx,
    sub: &[(Label, NormalType)],
    sup: &[(Label, NormalType)],
    elem: &Kind,
) -> Option<IndexMap> {
    let mut map = Vec::with_capacity(sub.len());
    for (l, t) in sub {
        let pos = sup.binary_search_by(|(l2, _)| l2.cmp(l)).ok()?;
        if !ctx.unify(t, &sup[pos].1, elem) {
            return None;
        }
        map.push(pos);
    }
    Some(IndexMap(map))
}

fn solve_literal(ctx: &mut dyn SolveCtx, goal: &NormalPred) -> Option<Evidence> {
    match goal {
        NormalPred::Leq { lhs, rhs, kind } => {
            let sup = row_lit(rhs)?.to_vec();
            let sub = row_lit(lhs)?.to_vec();
            let p = match_literal_into(ctx, &sub, &sup, kind)?;
            Some(Evidence::Incl(p))
        }
        NormalPred::Plus { left, right, total, kind } => {
            let rk = Kind::row(kind.clone());
            if let Some(tot) = row_lit(total) {
                let tot = tot.to_vec();
                match (row_lit(left), row_lit(right)) {
                    (Some(l), Some(r)) => {
                        let (l, r) = (l.to_vec(), r.to_vec());
                        let p = match_literal_into(ctx, &l, &tot, kind)?;
                        let q = match_literal_into(ctx, &r, &tot, kind)?;
                        if disjoint(&p, &q) && p.len() + q.len() == tot.len() {
                            Some(Evidence::Comb(p, q))
                        } else {
                            None
                        }
                    }
                    (Some(l), None) if is_bare_meta_row(right) => {
                        let l = l.to_vec();
                        let p = match_literal_into(ctx, &l, &tot, kind)?;
                        let (q, rest) = remainder(&tot, &p);
                        if !ctx.unify(right, &NormalType::Row(rest), &rk) {
                            return None;
                        }
                        Some(Evidence::Comb(p, q))
                    }
                    (None, Some(r)) if is_bare_meta_row(left) => {
                        let r = r.to_vec();
                        let q = match_literal_into(ctx, &r, &tot, kind)?;
                        let (p, rest) = remainder(&tot, &q);
                        if !ctx.unify(left, &NormalType::Row(rest), &rk) {
                            return None;
                        }
                        Some(Evidence::Comb(p, q))
                    }
                    _ => None,
                }
            } else if is_bare_meta_row(total) {
                // Left and right literal: the total is their disjoint merge.
                let l = row_lit(left)?.to_vec();
                let r = row_lit(right)?.to_vec();
                let mut merged: Vec<(Label, NormalType)> = Vec::new();
                for (lab, t) in l.iter().chain(r.iter()) {
                    if row_insert_sorted(&mut merged, lab.clone(), t.clone()).is_err() {
                        return None;
                    }
                }
                let merged_t = NormalType::Row(merged.clone());
                if !ctx.unify(total, &merged_t, &rk) {
                    return None;
                }
                let p = match_literal_into(ctx, &l, &merged, kind)?;
                let q = match_literal_into(ctx, &r, &merged, kind)?;
                Some(Evidence::Comb(p, q))
            } else {
                None
            }
        }
    }
}

fn disjoint(p: &IndexMap, q: &IndexMap) -> bool {
    p.0.iter().all(|i| !q.range_contains(*i))
}

/// Positions of `total` not hit by `p`, with the corresponding entries.
fn remainder(
    total: &[(Label, NormalType)],
    p: &IndexMap,
) -> (IndexMap, Vec<(Label, NormalType)>) {
    let mut q = Vec::new();
    let mut rest = Vec::new();
    for (i, e) in total.iter().enumerate() {
        if !p.range_contains(i) {
            q.push(i);
            rest.push(e.clone());
        }
    }
    (IndexMap(q), rest)
}

fn normalize_compl(
    ctx: &dyn SolveCtx,
    minuend: &NormalType,
    subtrahend: &NormalType,
    elem: &Kind,
) -> NormalType {
    ctx.normalize_core(
        &Type::Compl(
            Box::new(norm::embed(minuend)),
            Box::new(norm::embed(subtrahend)),
        ),
        &Kind::row(elem.clone()),
    )
}

fn push_fact(facts: &mut Vec<Fact>, f: Fact) {
    if !facts.iter().any(|g| g.pred == f.pred) {
        facts.push(f);
    }
}

/// Saturate the hypothesis set: direct hypotheses, containments of
/// combinations, complement combinations of containments, and bounded
/// transitive closure of containments. Complement derivation and
/// transitivity interleave so complement containments compose with
/// hypothesis chains.
fn saturate(ctx: &dyn SolveCtx, phi: &[NormalPred], cfg: &EntailConfig) -> Vec<Fact> {
    let mut facts: Vec<Fact> = Vec::new();
    let n = phi.len();
    for (j, p) in phi.iter().enumerate() {
        push_fact(&mut facts, Fact { pred: p.clone(), ev: Evidence::Var(n - 1 - j) });
    }

    // Containments from combinations.
    let plus_facts: Vec<Fact> = facts
        .iter()
        .filter(|f| matches!(f.pred, NormalPred::Plus { .. }))
        .cloned()
        .collect();
    for f in &plus_facts {
        if let NormalPred::Plus { left, right, total, kind } = &f.pred {
            push_fact(
                &mut facts,
                Fact {
                    pred: NormalPred::Leq {
                        lhs: left.clone(),
                        rhs: total.clone(),
                        kind: kind.clone(),
                    },
                    ev: Evidence::PlusL(Box::new(f.ev.clone()), right.clone(), kind.clone()),
                },
            );
            push_fact(
                &mut facts,
                Fact {
                    pred: NormalPred::Leq {
                        lhs: right.clone(),
                        rhs: total.clone(),
                        kind: kind.clone(),
                    },
                    ev: Evidence::PlusR(Box::new(f.ev.clone()), left.clone(), kind.clone()),
                },
            );
        }
    }

    for _ in 0..2 {
        derive_complements(ctx, &mut facts);
        transitive_closure(&mut facts, cfg.max_depth);
    }

    facts
}

/// Complement combinations (and the complement's own containment) from
/// every containment fact.
fn derive_complements(ctx: &dyn SolveCtx, facts: &mut Vec<Fact>) {
    let leq_facts: Vec<Fact> = facts
        .iter()
        .filter(|f| matches!(f.pred, NormalPred::Leq { .. }))
        .cloned()
        .collect();
    for f in &leq_facts {
        if let NormalPred::Leq { lhs, rhs, kind } = &f.pred {
            let compl = normalize_compl(ctx, rhs, lhs, kind);
            push_fact(
                facts,
                Fact {
                    pred: NormalPred::Plus {
                        left: lhs.clone(),
                        right: compl.clone(),
                        total: rhs.clone(),
                        kind: kind.clone(),
                    },
                    ev: Evidence::ComplR(Box::new(f.ev.clone())),
                },
            );
            push_fact(
                facts,
                Fact {
                    pred: NormalPred::Plus {
                        left: compl.clone(),
                        right: lhs.clone(),
                        total: rhs.clone(),
                        kind: kind.clone(),
                    },
                    ev: Evidence::ComplL(Box::new(f.ev.clone())),
                },
            );
            push_fact(
                facts,
                Fact {
                    pred: NormalPred::Leq {
                        lhs: compl.clone(),
                        rhs: rhs.clone(),
                        kind: kind.clone(),
                    },
                    ev: Evidence::PlusR(
                        Box::new(Evidence::ComplR(Box::new(f.ev.clone()))),
                        lhs.clone(),
                        kind.clone(),
                    ),
                },
            );
        }
    }
}

fn transitive_closure(facts: &mut Vec<Fact>, max_depth: usize) {
    let mut frontier: Vec<Fact> = facts
        .iter()
        .filter(|f| matches!(f.pred, NormalPred::Leq { .. }))
        .cloned()
        .collect();
    for _ in 1..max_depth {
        let base: Vec<Fact> = facts
            .iter()
            .filter(|f| matches!(f.pred, NormalPred::Leq { .. }))
            .cloned()
            .collect();
        let mut new_frontier = Vec::new();
        for f1 in &frontier {
            let (a, b, k1) = match &f1.pred {
                NormalPred::Leq { lhs, rhs, kind } => (lhs, rhs, kind),
                _ => continue,
            };
            for f2 in &base {
                let (b2, c, k2) = match &f2.pred {
                    NormalPred::Leq { lhs, rhs, kind } => (lhs, rhs, kind),
                    _ => continue,
                };
                if k1 != k2 || b != b2 || a == b || b == c {
                    continue;
                }
                let composed = Fact {
                    pred: NormalPred::Leq { lhs: a.clone(), rhs: c.clone(), kind: k1.clone() },
                    ev: Evidence::Trans(
                        Box::new(f1.ev.clone()),
                        Box::new(f2.ev.clone()),
                        b.clone(),
                        k1.clone(),
                    ),
                };
                if !facts.iter().any(|g| g.pred == composed.pred) {
                    facts.push(composed.clone());
                    new_frontier.push(composed);
                }
            }
        }
        if new_frontier.is_empty() {
            break;
        }
        frontier = new_frontier;
    }
}

/// Kind of a neutral spine's head applied to its arguments.
fn neutral_kind(ctx: &dyn SolveCtx, n: &Neutral) -> Option<Kind> {
    let mut k = match &n.head {
        Head::Var(ix) => {
            let delta = ctx.delta();
            delta.get(delta.len().checked_sub(1 + ix)?)?.clone()
        }
        Head::Meta(m) => ctx.kind_of_meta(*m)?,
    };
    for _ in &n.args {
        k = match k {
            Kind::Arrow(_, cod) => *cod,
            _ => return None,
        };
    }
    Some(k)
}

/// Map-operator candidates read off the goal's inert-map components,
/// paired with their source element kinds.
fn map_candidates(ctx: &dyn SolveCtx, goal: &NormalPred) -> Vec<(NormalType, Kind)> {
    let mut out: Vec<(NormalType, Kind)> = Vec::new();
    let mut consider = |t: &NormalType| {
        if let NormalType::Map(f, n) = t {
            if let Some(Kind::Row(src)) = neutral_kind(ctx, n) {
                if !out.iter().any(|(g, _)| g == &**f) {
                    out.push(((**f).clone(), (*src).clone()));
                }
            }
        }
    };
    for comp in goal.components() {
        consider(comp);
        if let NormalType::Compl(a, b) = comp {
            consider(a);
            consider(b);
        }
    }
    out
}

fn lift_fact(
    ctx: &dyn SolveCtx,
    fact: &Fact,
    f: &NormalType,
    src: &Kind,
    cod: &Kind,
) -> Option<Fact> {
    if fact.pred.kind() != src {
        return None;
    }
    let lift = |comp: &NormalType| -> NormalType {
        ctx.normalize_core(
            &Type::MapApp(Box::new(norm::embed(f)), Box::new(norm::embed(comp))),
            &Kind::row(cod.clone()),
        )
    };
    let pred = match &fact.pred {
        NormalPred::Leq { lhs, rhs, .. } => NormalPred::Leq {
            lhs: lift(lhs),
            rhs: lift(rhs),
            kind: cod.clone(),
        },
        NormalPred::Plus { left, right, total, .. } => NormalPred::Plus {
            left: lift(left),
            right: lift(right),
            total: lift(total),
            kind: cod.clone(),
        },
    };
    let ev = match &fact.pred {
        NormalPred::Leq { .. } => Evidence::LeqMap {
            f: f.clone(),
            cod: cod.clone(),
            inner_pred: Box::new(fact.pred.clone()),
            inner: Box::new(fact.ev.clone()),
        },
        NormalPred::Plus { .. } => Evidence::PlusMap {
            f: f.clone(),
            cod: cod.clone(),
            inner_pred: Box::new(fact.pred.clone()),
            inner: Box::new(fact.ev.clone()),
        },
    };
    Some(Fact { pred, ev })
}

fn unify_pred(ctx: &mut dyn SolveCtx, goal: &NormalPred, cand: &NormalPred) -> bool {
    match (goal, cand) {
        (
            NormalPred::Leq { lhs: a1, rhs: b1, kind: k1 },
            NormalPred::Leq { lhs: a2, rhs: b2, kind: k2 },
        ) => {
            let rk = Kind::row(k1.clone());
            k1 == k2 && ctx.unify(b1, b2, &rk) && ctx.unify(a1, a2, &rk)
        }
        (
            NormalPred::Plus { left: a1, right: b1, total: c1, kind: k1 },
            NormalPred::Plus { left: a2, right: b2, total: c2, kind: k2 },
        ) => {
            let rk = Kind::row(k1.clone());
            k1 == k2
                && ctx.unify(c1, c2, &rk)
                && ctx.unify(a1, a2, &rk)
                && ctx.unify(b1, b2, &rk)
        }
        _ => false,
    }
}

fn pred_has_meta(p: &NormalPred) -> bool {
    p.components().iter().any(|t| t.contains_meta())
}

fn zonk_pred(ctx: &dyn SolveCtx, p: &NormalPred) -> NormalPred {
    let rk = Kind::row(p.kind().clone());
    match p {
        NormalPred::Leq { lhs, rhs, kind } => NormalPred::Leq {
            lhs: ctx.zonk(lhs, &rk),
            rhs: ctx.zonk(rhs, &rk),
            kind: kind.clone(),
        },
        NormalPred::Plus { left, right, total, kind } => NormalPred::Plus {
            left: ctx.zonk(left, &rk),
            right: ctx.zonk(right, &rk),
            total: ctx.zonk(total, &rk),
            kind: kind.clone(),
        },
    }
}

/// Produce evidence for `goal` under hypotheses `phi`, or fail.
pub fn solve(
    ctx: &mut dyn SolveCtx,
    phi: &[NormalPred],
    goal: &NormalPred,
    cfg: &EntailConfig,
) -> Result<Evidence, SolveFailure> {
    let goal = zonk_pred(ctx, goal);

    // Literal route: construct the index maps directly.
    let snap = ctx.snapshot();
    if let Some(ev) = solve_literal(ctx, &goal) {
        return Ok(ev);
    }
    ctx.rollback(snap);

    // The empty row is contained in everything.
    if let NormalPred::Leq { lhs, rhs, kind } = &goal {
        if matches!(lhs, NormalType::Row(es) if es.is_empty()) {
            return Ok(Evidence::PlusL(
                Box::new(Evidence::PlusEmptyL(rhs.clone(), kind.clone())),
                rhs.clone(),
                kind.clone(),
            ));
        }
        // Reflexivity, for rows that are not bare metavariables (binding a
        // metavariable through refl would commit to an arbitrary choice).
        if !is_bare_meta_row(lhs) && !is_bare_meta_row(rhs) {
            let snap = ctx.snapshot();
            if ctx.unify(lhs, rhs, &Kind::row(kind.clone())) {
                return Ok(Evidence::LeqRefl(ctx.zonk(lhs, &Kind::row(kind.clone())), kind.clone()));
            }
            ctx.rollback(snap);
        }
    }

    // Empty-row units of combination over non-literal rows.
    if let NormalPred::Plus { left, right, total, kind } = &goal {
        let rk = Kind::row(kind.clone());
        if matches!(left, NormalType::Row(es) if es.is_empty()) && !is_bare_meta_row(right) {
            let snap = ctx.snapshot();
            if ctx.unify(right, total, &rk) {
                return Ok(Evidence::PlusEmptyL(ctx.zonk(total, &rk), kind.clone()));
            }
            ctx.rollback(snap);
        }
        if matches!(right, NormalType::Row(es) if es.is_empty()) && !is_bare_meta_row(left) {
            let snap = ctx.snapshot();
            if ctx.unify(left, total, &rk) {
                return Ok(Evidence::PlusEmptyR(ctx.zonk(total, &rk), kind.clone()));
            }
            ctx.rollback(snap);
        }
    }

    // Hypothesis routes. Hypotheses may mention metavariables solved after
    // they were recorded; zonk before saturating.
    let phi_z: Vec<NormalPred> = phi.iter().map(|p| zonk_pred(ctx, p)).collect();
    let facts = saturate(ctx, &phi_z, cfg);
    let mut all_facts = facts.clone();
    for (f, src) in map_candidates(ctx, &goal) {
        for fact in &facts {
            if let Some(lifted) = lift_fact(ctx, fact, &f, &src, goal.kind()) {
                if !all_facts.iter().any(|g| g.pred == lifted.pred) {
                    all_facts.push(lifted);
                }
            }
        }
    }

    // Direct match against (lifted) facts.
    for fact in &all_facts {
        let snap = ctx.snapshot();
        if unify_pred(ctx, &goal, &fact.pred) {
            return Ok(fact.ev.clone());
        }
        ctx.rollback(snap);
    }

    // Containment through a literal prefix of a known containment:
    // entries of x locate in a literal a, and a <= z is a fact.
    if let NormalPred::Leq { lhs, rhs, kind } = &goal {
        for fact in &all_facts {
            let (a, b) = match &fact.pred {
                NormalPred::Leq { lhs, rhs, kind: k } if k == kind => (lhs, rhs),
                _ => continue,
            };
            let snap = ctx.snapshot();
            if ctx.unify(rhs, b, &Kind::row(kind.clone())) {
                if let (Some(sub), Some(sup)) = (row_lit(lhs), row_lit(a)) {
                    let sub = sub.to_vec();
                    let sup = sup.to_vec();
                    if let Some(p) = match_literal_into(ctx, &sub, &sup, kind) {
                        return Ok(Evidence::Trans(
                            Box::new(Evidence::Incl(p)),
                            Box::new(fact.ev.clone()),
                            a.clone(),
                            kind.clone(),
                        ));
                    }
                }
            }
            ctx.rollback(snap);
        }
    }

    if pred_has_meta(&goal) {
        Err(SolveFailure::NotYet)
    } else {
        Err(SolveFailure::Unsolvable {
            goal,
            facts: all_facts.into_iter().map(|f| f.pred).collect(),
        })
    }
}

// ---------------------------------------------------------------------
// Index-map functions.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picked {
    Left(usize),
    Right(usize),
}

/// Which of two disjoint inclusions covers target index `i`, and where.
pub fn pick(p: &IndexMap, q: &IndexMap, i: usize) -> Picked {
    if let Some(j) = p.preimage(i) {
        return Picked::Left(j);
    }
    if let Some(j) = q.preimage(i) {
        return Picked::Right(j);
    }
    panic!("pick: index {} in neither range (internal invariant breach)", i)
}

/// The unique strictly increasing enumeration of `[0, target_size)` less
/// the range of `p`.
pub fn dual(p: &IndexMap, target_size: usize) -> IndexMap {
    IndexMap((0..target_size).filter(|i| !p.range_contains(*i)).collect())
}

// ---------------------------------------------------------------------
// Evidence reduction.

#[derive(Debug, Clone)]
pub struct EvStuck(pub String);

impl fmt::Display for EvStuck {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "stuck evidence: {}", self.0)
    }
}

fn row_size(t: &NormalType) -> Result<usize, EvStuck> {
    match t.as_row_lit() {
        Some(es) => Ok(es.len()),
        None => Err(EvStuck(format!(
            "non-literal row {} during evidence reduction",
            crate::pretty::normal_type(t)
        ))),
    }
}

fn leq_parts(p: &NormalPred) -> Result<(&NormalType, &NormalType, &Kind), EvStuck> {
    match p {
        NormalPred::Leq { lhs, rhs, kind } => Ok((lhs, rhs, kind)),
        _ => Err(EvStuck("containment evidence at a combination predicate".into())),
    }
}

fn plus_parts(
    p: &NormalPred,
) -> Result<(&NormalType, &NormalType, &NormalType, &Kind), EvStuck> {
    match p {
        NormalPred::Plus { left, right, total, kind } => Ok((left, right, total, kind)),
        _ => Err(EvStuck("combination evidence at a containment predicate".into())),
    }
}

/// Reduce evidence to an `Incl`/`Comb` value. The predicate supplies row
/// sizes where the rules need them (reflexivity, empty rows, duals).
pub fn evidence_normalize(q: &Evidence, pred: &NormalPred) -> Result<Evidence, EvStuck> {
    match q {
        Evidence::Incl(_) | Evidence::Comb(_, _) => Ok(q.clone()),
        Evidence::Var(i) => Err(EvStuck(format!("free evidence variable v{}", i))),
        Evidence::Hole(h) => Err(EvStuck(format!("unsolved evidence hole ?q{}", h))),
        Evidence::LeqRefl(row, _) => {
            let n = row_size(row)?;
            Ok(Evidence::Incl(IndexMap::identity(n)))
        }
        Evidence::Trans(q1, q2, mid, _) => {
            let (lhs, rhs, kind) = leq_parts(pred)?;
            let p1 = NormalPred::Leq { lhs: lhs.clone(), rhs: mid.clone(), kind: kind.clone() };
            let p2 = NormalPred::Leq { lhs: mid.clone(), rhs: rhs.clone(), kind: kind.clone() };
            match (evidence_normalize(q1, &p1)?, evidence_normalize(q2, &p2)?) {
                (Evidence::Incl(a), Evidence::Incl(b)) => Ok(Evidence::Incl(a.compose(&b))),
                _ => Err(EvStuck("transitivity over non-inclusions".into())),
            }
        }
        Evidence::LeqMap { inner_pred, inner, .. } => {
            match evidence_normalize(inner, inner_pred)? {
                Evidence::Incl(p) => Ok(Evidence::Incl(p)),
                _ => Err(EvStuck("map over non-inclusion".into())),
            }
        }
        Evidence::PlusMap { inner_pred, inner, .. } => {
            match evidence_normalize(inner, inner_pred)? {
                Evidence::Comb(p, r) => Ok(Evidence::Comb(p, r)),
                _ => Err(EvStuck("map over non-combination".into())),
            }
        }
        Evidence::PlusL(inner, right, _) => {
            let (lhs, rhs, kind) = leq_parts(pred)?;
            let inner_pred = NormalPred::Plus {
                left: lhs.clone(),
                right: right.clone(),
                total: rhs.clone(),
                kind: kind.clone(),
            };
            match evidence_normalize(inner, &inner_pred)? {
                Evidence::Comb(p, _) => Ok(Evidence::Incl(p)),
                _ => Err(EvStuck("plusL over non-combination".into())),
            }
        }
        Evidence::PlusR(inner, left, _) => {
            let (lhs, rhs, kind) = leq_parts(pred)?;
            let inner_pred = NormalPred::Plus {
                left: left.clone(),
                right: lhs.clone(),
                total: rhs.clone(),
                kind: kind.clone(),
            };
            match evidence_normalize(inner, &inner_pred)? {
                Evidence::Comb(_, q) => Ok(Evidence::Incl(q)),
                _ => Err(EvStuck("plusR over non-combination".into())),
            }
        }
        Evidence::PlusEmptyL(row, _) => {
            let n = row_size(row)?;
            Ok(Evidence::Comb(IndexMap::empty(), IndexMap::identity(n)))
        }
        Evidence::PlusEmptyR(row, _) => {
            let n = row_size(row)?;
            Ok(Evidence::Comb(IndexMap::identity(n), IndexMap::empty()))
        }
        Evidence::ComplL(inner) => {
            let (_, right, total, kind) = plus_parts(pred)?;
            let n = row_size(total)?;
            let inner_pred = NormalPred::Leq {
                lhs: right.clone(),
                rhs: total.clone(),
                kind: kind.clone(),
            };
            match evidence_normalize(inner, &inner_pred)? {
                Evidence::Incl(q) => Ok(Evidence::Comb(dual(&q, n), q)),
                _ => Err(EvStuck("complL over non-inclusion".into())),
            }
        }
        Evidence::ComplR(inner) => {
            let (left, _, total, kind) = plus_parts(pred)?;
            let n = row_size(total)?;
            let inner_pred = NormalPred::Leq {
                lhs: left.clone(),
                rhs: total.clone(),
                kind: kind.clone(),
            };
            match evidence_normalize(inner, &inner_pred)? {
                Evidence::Incl(p) => Ok(Evidence::Comb(p.clone(), dual(&p, n))),
                _ => Err(EvStuck("complR over non-inclusion".into())),
            }
        }
    }
}

/// One step of evidence reduction, leftmost-innermost. Returns `None` for
/// values.
pub fn evidence_step(
    q: &Evidence,
    pred: &NormalPred,
) -> Result<Option<(Evidence, &'static str)>, EvStuck> {
    fn step_inner(
        inner: &Evidence,
        inner_pred: &NormalPred,
    ) -> Result<(Evidence, &'static str), EvStuck> {
        evidence_step(inner, inner_pred)?
            .ok_or_else(|| EvStuck("non-value evidence with no step".into()))
    }
    match q {
        Evidence::Incl(_) | Evidence::Comb(_, _) => Ok(None),
        Evidence::Var(i) => Err(EvStuck(format!("free evidence variable v{}", i))),
        Evidence::Hole(h) => Err(EvStuck(format!("unsolved evidence hole ?q{}", h))),
        Evidence::LeqRefl(row, _) => {
            let n = row_size(row)?;
            Ok(Some((Evidence::Incl(IndexMap::identity(n)), "delta-refl")))
        }
        Evidence::Trans(q1, q2, mid, mk) => {
            let (lhs, rhs, kind) = leq_parts(pred)?;
            let p1 = NormalPred::Leq { lhs: lhs.clone(), rhs: mid.clone(), kind: kind.clone() };
            let p2 = NormalPred::Leq { lhs: mid.clone(), rhs: rhs.clone(), kind: kind.clone() };
            if !q1.is_value() {
                let (q1s, rule) = step_inner(q1, &p1)?;
                return Ok(Some((
                    Evidence::Trans(Box::new(q1s), q2.clone(), mid.clone(), mk.clone()),
                    rule,
                )));
            }
            if !q2.is_value() {
                let (q2s, rule) = step_inner(q2, &p2)?;
                return Ok(Some((
                    Evidence::Trans(q1.clone(), Box::new(q2s), mid.clone(), mk.clone()),
                    rule,
                )));
            }
            match (&**q1, &**q2) {
                (Evidence::Incl(a), Evidence::Incl(b)) => {
                    Ok(Some((Evidence::Incl(a.compose(b)), "delta-trans")))
                }
                _ => Err(EvStuck("transitivity over non-inclusions".into())),
            }
        }
        Evidence::LeqMap { f, cod, inner_pred, inner } => {
            if !inner.is_value() {
                let (qs, rule) = step_inner(inner, inner_pred)?;
                return Ok(Some((
                    Evidence::LeqMap {
                        f: f.clone(),
                        cod: cod.clone(),
                        inner_pred: inner_pred.clone(),
                        inner: Box::new(qs),
                    },
                    rule,
                )));
            }
            match &**inner {
                Evidence::Incl(p) => Ok(Some((Evidence::Incl(p.clone()), "delta-leq-map"))),
                _ => Err(EvStuck("map over non-inclusion".into())),
            }
        }
        Evidence::PlusMap { f, cod, inner_pred, inner } => {
            if !inner.is_value() {
                let (qs, rule) = step_inner(inner, inner_pred)?;
                return Ok(Some((
                    Evidence::PlusMap {
                        f: f.clone(),
                        cod: cod.clone(),
                        inner_pred: inner_pred.clone(),
                        inner: Box::new(qs),
                    },
                    rule,
                )));
            }
            match &**inner {
                Evidence::Comb(p, q) => {
                    Ok(Some((Evidence::Comb(p.clone(), q.clone()), "delta-plus-map")))
                }
                _ => Err(EvStuck("map over non-combination".into())),
            }
        }
        Evidence::PlusL(inner, right, rk) => {
            let (lhs, rhs, kind) = leq_parts(pred)?;
            let inner_pred = NormalPred::Plus {
                left: lhs.clone(),
                right: right.clone(),
                total: rhs.clone(),
                kind: kind.clone(),
            };
            if !inner.is_value() {
                let (qs, rule) = step_inner(inner, &inner_pred)?;
                return Ok(Some((
                    Evidence::PlusL(Box::new(qs), right.clone(), rk.clone()),
                    rule,
                )));
            }
            match &**inner {
                Evidence::Comb(p, _) => Ok(Some((Evidence::Incl(p.clone()), "delta-plusL"))),
                _ => Err(EvStuck("plusL over non-combination".into())),
            }
        }
        Evidence::PlusR(inner, left, rk) => {
            let (lhs, rhs, kind) = leq_parts(pred)?;
            let inner_pred = NormalPred::Plus {
                left: left.clone(),
                right: lhs.clone(),
                total: rhs.clone(),
                kind: kind.clone(),
            };
            if !inner.is_value() {
                let (qs, rule) = step_inner(inner, &inner_pred)?;
                return Ok(Some((
                    Evidence::PlusR(Box::new(qs), left.clone(), rk.clone()),
                    rule,
                )));
            }
            match &**inner {
                Evidence::Comb(_, q) => Ok(Some((Evidence::Incl(q.clone()), "delta-plusR"))),
                _ => Err(EvStuck("plusR over non-combination".into())),
            }
        }
        Evidence::PlusEmptyL(row, _) => {
            let n = row_size(row)?;
            Ok(Some((
                Evidence::Comb(IndexMap::empty(), IndexMap::identity(n)),
                "delta-emptyL",
            )))
        }
        Evidence::PlusEmptyR(row, _) => {
            let n = row_size(row)?;
            Ok(Some((
                Evidence::Comb(IndexMap::identity(n), IndexMap::empty()),
                "delta-emptyR",
            )))
        }
        Evidence::ComplL(inner) => {
            let (_, right, total, kind) = plus_parts(pred)?;
            let inner_pred = NormalPred::Leq {
                lhs: right.clone(),
                rhs: total.clone(),
                kind: kind.clone(),
            };
            if !inner.is_value() {
                let (qs, rule) = step_inner(inner, &inner_pred)?;
                return Ok(Some((Evidence::ComplL(Box::new(qs)), rule)));
            }
            let n = row_size(total)?;
            match &**inner {
                Evidence::Incl(q) => {
                    Ok(Some((Evidence::Comb(dual(q, n), q.clone()), "delta-complL")))
                }
                _ => Err(EvStuck("complL over non-inclusion".into())),
            }
        }
        Evidence::ComplR(inner) => {
            let (left, _, total, kind) = plus_parts(pred)?;
            let inner_pred = NormalPred::Leq {
                lhs: left.clone(),
                rhs: total.clone(),
                kind: kind.clone(),
            };
            if !inner.is_value() {
                let (qs, rule) = step_inner(inner, &inner_pred)?;
                return Ok(Some((Evidence::ComplR(Box::new(qs)), rule)));
            }
            let n = row_size(total)?;
            match &**inner {
                Evidence::Incl(p) => {
                    Ok(Some((Evidence::Comb(p.clone(), dual(p, n)), "delta-complR")))
                }
                _ => Err(EvStuck("complR over non-inclusion".into())),
            }
        }
    }
}

// ---------------------------------------------------------------------
// Declarative evidence checking (for the no-inference re-checker).

fn expect_eq(a: &NormalType, b: &NormalType, what: &str) -> Result<(), String> {
    if a == b {
        Ok(())
    } else {
        Err(format!(
            "{}: {} does not match {}",
            what,
            crate::pretty::normal_type(a),
            crate::pretty::normal_type(b)
        ))
    }
}

fn check_inclusion_map(
    p: &IndexMap,
    sub: &[(Label, NormalType)],
    sup: &[(Label, NormalType)],
) -> Result<(), String> {
    if p.len() != sub.len() {
        return Err("inclusion map size mismatch".into());
    }
    if !p.is_strictly_increasing() {
        return Err("inclusion map not strictly increasing".into());
    }
    for (k, (l, t)) in sub.iter().enumerate() {
        let j = p.get(k);
        let (l2, t2) = sup
            .get(j)
            .ok_or_else(|| "inclusion map target out of range".to_string())?;
        if l != l2 || t != t2 {
            return Err(format!("inclusion map sends {} to a different entry", l));
        }
    }
    Ok(())
}

/// Check `q` against predicate `goal` following the entailment rules.
pub fn check_evidence(
    delta: &[Kind],
    phi: &[NormalPred],
    q: &Evidence,
    goal: &NormalPred,
) -> Result<(), String> {
    let norm_compl = |minuend: &NormalType, subtrahend: &NormalType, elem: &Kind| {
        norm::normalize(
            &norm::NoMetas,
            delta,
            &Type::Compl(
                Box::new(norm::embed(minuend)),
                Box::new(norm::embed(subtrahend)),
            ),
            &Kind::row(elem.clone()),
        )
    };
    match q {
        Evidence::Var(i) => {
            let p = phi
                .get(
                    phi.len()
                        .checked_sub(1 + i)
                        .ok_or("evidence variable out of range")?,
                )
                .ok_or("evidence variable out of range")?;
            if p == goal {
                Ok(())
            } else {
                Err(format!(
                    "hypothesis v{} proves {}, not {}",
                    i,
                    crate::pretty::normal_pred(p),
                    crate::pretty::normal_pred(goal)
                ))
            }
        }
        Evidence::Hole(_) => Err("unsolved evidence hole".into()),
        Evidence::Incl(p) => match goal {
            NormalPred::Leq { lhs, rhs, .. } => {
                let sub = lhs.as_row_lit().ok_or("inclusion over non-literal row")?;
                let sup = rhs.as_row_lit().ok_or("inclusion over non-literal row")?;
                check_inclusion_map(p, sub, sup)
            }
            _ => Err("inclusion evidence for a combination".into()),
        },
        Evidence::Comb(p, r) => match goal {
            NormalPred::Plus { left, right, total, .. } => {
                let l = left.as_row_lit().ok_or("combination over non-literal row")?;
                let rr = right.as_row_lit().ok_or("combination over non-literal row")?;
                let tot = total.as_row_lit().ok_or("combination over non-literal row")?;
                check_inclusion_map(p, l, tot)?;
                check_inclusion_map(r, rr, tot)?;
                if !disjoint(p, r) {
                    return Err("combination maps overlap".into());
                }
                if p.len() + r.len() != tot.len() {
                    return Err("combination does not cover the total row".into());
                }
                Ok(())
            }
            _ => Err("combination evidence for a containment".into()),
        },
        Evidence::LeqRefl(row, _) => match goal {
            NormalPred::Leq { lhs, rhs, .. } => {
                expect_eq(lhs, rhs, "reflexivity")?;
                expect_eq(lhs, row, "reflexivity annotation")
            }
            _ => Err("reflexivity evidence for a combination".into()),
        },
        Evidence::Trans(q1, q2, mid, _) => match goal {
            NormalPred::Leq { lhs, rhs, kind } => {
                check_evidence(
                    delta,
                    phi,
                    q1,
                    &NormalPred::Leq { lhs: lhs.clone(), rhs: mid.clone(), kind: kind.clone() },
                )?;
                check_evidence(
                    delta,
                    phi,
                    q2,
                    &NormalPred::Leq { lhs: mid.clone(), rhs: rhs.clone(), kind: kind.clone() },
                )
            }
            _ => Err("transitivity evidence for a combination".into()),
        },
        Evidence::LeqMap { f, inner_pred, inner, .. } => {
            check_evidence(delta, phi, inner, inner_pred)?;
            let (a, b) = match &**inner_pred {
                NormalPred::Leq { lhs, rhs, .. } => (lhs, rhs),
                _ => return Err("leqMap over a combination".into()),
            };
            match goal {
                NormalPred::Leq { lhs, rhs, kind } => {
                    let lift = |c: &NormalType| {
                        norm::normalize(
                            &norm::NoMetas,
                            delta,
                            &Type::MapApp(Box::new(norm::embed(f)), Box::new(norm::embed(c))),
                            &Kind::row(kind.clone()),
                        )
                    };
                    expect_eq(&lift(a), lhs, "mapped containment lhs")?;
                    expect_eq(&lift(b), rhs, "mapped containment rhs")
                }
                _ => Err("leqMap evidence for a combination".into()),
            }
        }
        Evidence::PlusMap { f, inner_pred, inner, .. } => {
            check_evidence(delta, phi, inner, inner_pred)?;
            let (a, b, c) = match &**inner_pred {
                NormalPred::Plus { left, right, total, .. } => (left, right, total),
                _ => return Err("plusMap over a containment".into()),
            };
            match goal {
                NormalPred::Plus { left, right, total, kind } => {
                    let lift = |x: &NormalType| {
                        norm::normalize(
                            &norm::NoMetas,
                            delta,
                            &Type::MapApp(Box::new(norm::embed(f)), Box::new(norm::embed(x))),
                            &Kind::row(kind.clone()),
                        )
                    };
                    expect_eq(&lift(a), left, "mapped combination left")?;
                    expect_eq(&lift(b), right, "mapped combination right")?;
                    expect_eq(&lift(c), total, "mapped combination total")
                }
                _ => Err("plusMap evidence for a containment".into()),
            }
        }
        Evidence::PlusL(inner, right, _) => match goal {
            NormalPred::Leq { lhs, rhs, kind } => check_evidence(
                delta,
                phi,
                inner,
                &NormalPred::Plus {
                    left: lhs.clone(),
                    right: right.clone(),
                    total: rhs.clone(),
                    kind: kind.clone(),
                },
            ),
            _ => Err("plusL evidence for a combination".into()),
        },
        Evidence::PlusR(inner, left, _) => match goal {
            NormalPred::Leq { lhs, rhs, kind } => check_evidence(
                delta,
                phi,
                inner,
                &NormalPred::Plus {
                    left: left.clone(),
                    right: lhs.clone(),
                    total: rhs.clone(),
                    kind: kind.clone(),
                },
            ),
            _ => Err("plusR evidence for a combination".into()),
        },
        Evidence::PlusEmptyL(row, _) => match goal {
            NormalPred::Plus { left, right, total, .. } => {
                if !matches!(left, NormalType::Row(es) if es.is_empty()) {
                    return Err("emptyL with non-empty left row".into());
                }
                expect_eq(right, total, "emptyL")?;
                expect_eq(total, row, "emptyL annotation")
            }
            _ => Err("emptyL evidence for a containment".into()),
        },
        Evidence::PlusEmptyR(row, _) => match goal {
            NormalPred::Plus { left, right, total, .. } => {
                if !matches!(right, NormalType::Row(es) if es.is_empty()) {
                    return Err("emptyR with non-empty right row".into());
                }
                expect_eq(left, total, "emptyR")?;
                expect_eq(total, row, "emptyR annotation")
            }
            _ => Err("emptyR evidence for a containment".into()),
        },
        Evidence::ComplL(inner) => match goal {
            NormalPred::Plus { left, right, total, kind } => {
                let compl = norm_compl(total, right, kind);
                expect_eq(left, &compl, "complL complement")?;
                check_evidence(
                    delta,
                    phi,
                    inner,
                    &NormalPred::Leq {
                        lhs: right.clone(),
                        rhs: total.clone(),
                        kind: kind.clone(),
                    },
                )
            }
            _ => Err("complL evidence for a containment".into()),
        },
        Evidence::ComplR(inner) => match goal {
            NormalPred::Plus { left, right, total, kind } => {
                let compl = norm_compl(total, left, kind);
                expect_eq(right, &compl, "complR complement")?;
                check_evidence(
                    delta,
                    phi,
                    inner,
                    &NormalPred::Leq {
                        lhs: left.clone(),
                        rhs: total.clone(),
                        kind: kind.clone(),
                    },
                )
            }
            _ => Err("complR evidence for a containment".into()),
        },
    }
}
