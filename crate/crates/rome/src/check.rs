//! Bidirectional type checking with implicit instantiation and evidence.
//!
//! Checking against a `forall` or qualified type introduces the binder;
//! inference instantiates `forall`/qualified prefixes at application
//! spines with metavariables and evidence holes. Predicate goals are
//! deferred to the end of the declaration and solved by a worklist over
//! the entailment solver, whose unification callbacks may bind
//! metavariables (this is how row and operator arguments that first-order
//! unification cannot see are found). Equations blocked on applied
//! metavariables are postponed and retried as goals resolve. A final
//! zonking pass replaces every metavariable and evidence hole; anything
//! left over is an ambiguity error asking for an explicit type
//! application.
//!
//! A separate no-inference re-checker ([`recheck`]) types fully elaborated
//! terms literally, for elaboration soundness and preservation testing.

use std::collections::HashMap;
use std::fmt;

use crate::entail::{self, EntailConfig, SolveCtx, SolveFailure};
use crate::kind::{self, KindState};
use crate::norm::{self, MetaSource, Sem, SemHead, SemNeutral};
use crate::resolve::{GlobalEnv, GlobalRef, RTerm};
use crate::surface::SType;
use crate::syntax::*;

#[derive(Debug, Clone)]
pub struct TypeError(pub String);

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for TypeError {}

fn terr<T>(msg: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError(msg.into()))
}

// ---------------------------------------------------------------------
// Metavariable store.

#[derive(Debug)]
struct MetaInfo {
    kind: Kind,
    /// Context depth at creation; solutions are stored at this depth.
    depth: usize,
    /// Context snapshot at creation, for evaluating solutions.
    delta: Vec<Kind>,
    solution: Option<NormalType>,
}

#[derive(Debug, Default)]
pub struct MetaStore {
    metas: Vec<MetaInfo>,
    trail: Vec<MetaId>,
}

impl MetaStore {
    fn fresh(&mut self, kind: Kind, delta: &[Kind]) -> MetaId {
        let id = self.metas.len() as MetaId;
        self.metas.push(MetaInfo {
            kind,
            depth: delta.len(),
            delta: delta.to_vec(),
            solution: None,
        });
        id
    }

    fn info(&self, m: MetaId) -> &MetaInfo {
        &self.metas[m as usize]
    }

    fn bind(&mut self, m: MetaId, solution: NormalType) {
        debug_assert!(self.metas[m as usize].solution.is_none());
        self.metas[m as usize].solution = Some(solution);
        self.trail.push(m);
    }

    fn snapshot(&self) -> usize {
        self.trail.len()
    }

    fn rollback(&mut self, snap: usize) {
        for m in self.trail.drain(snap..) {
            self.metas[m as usize].solution = None;
        }
    }

    fn is_solved(&self, m: MetaId) -> bool {
        self.metas[m as usize].solution.is_some()
    }
}

impl MetaSource for MetaStore {
    fn lookup(&self, m: MetaId) -> Option<Sem> {
        let info = self.info(m);
        let sol = info.solution.as_ref()?;
        Some(norm::eval_normal(self, &info.delta, sol))
    }

    fn kind_of(&self, m: MetaId) -> Kind {
        self.info(m).kind.clone()
    }
}

// ---------------------------------------------------------------------
// Unification on normal forms.

#[derive(Debug)]
enum Unify {
    Ok,
    /// Blocked on an applied metavariable; retry after goals bind it.
    Postpone,
    Fail(String),
}

struct Unifier<'a> {
    metas: &'a mut MetaStore,
}

/// A "bare" metavariable in normal form: at ground kind a meta-headed
/// neutral with no arguments, at row kind an identity map over one, and at
/// arrow kind the eta-long wrapping of one applied to the binder ladder.
fn as_bare_meta(t: &NormalType, kind: &Kind) -> Option<MetaId> {
    match kind {
        Kind::Star | Kind::Label => match t {
            NormalType::Neutral(Neutral { head: Head::Meta(m), args }) if args.is_empty() => {
                Some(*m)
            }
            _ => None,
        },
        Kind::Row(elem) => match t {
            NormalType::Map(f, Neutral { head: Head::Meta(m), args })
                if args.is_empty() && **f == norm::identity_normal(elem) =>
            {
                Some(*m)
            }
            _ => None,
        },
        Kind::Arrow(_, _) => {
            let mut binders: Vec<Kind> = Vec::new();
            let mut k = kind;
            let mut body = t;
            while let Kind::Arrow(dom, cod) = k {
                match body {
                    NormalType::Lam(bk, inner) if bk == &**dom => {
                        binders.push((**dom).clone());
                        body = inner;
                        k = cod;
                    }
                    _ => return None,
                }
            }
            let n = binders.len();
            match body {
                NormalType::Neutral(Neutral { head: Head::Meta(m), args })
                    if args.len() == n =>
                {
                    // Arguments must be exactly the (eta-long) binder ladder.
                    for (j, a) in args.iter().enumerate() {
                        let expected = norm::reify(
                            &norm::NoMetas,
                            n,
                            &binders[j],
                            &norm::reflect(
                                &binders[j],
                                SemNeutral { head: SemHead::Lvl(j), args: vec![] },
                            ),
                        );
                        if *a != expected {
                            return None;
                        }
                    }
                    Some(*m)
                }
                _ => None,
            }
        }
        Kind::Meta(_) => None,
    }
}

fn min_free_index(t: &NormalType) -> Option<usize> {
    fn neu(n: &Neutral, cutoff: usize, acc: &mut Option<usize>) {
        if let Head::Var(ix) = n.head {
            if ix >= cutoff {
                let free = ix - cutoff;
                *acc = Some(acc.map_or(free, |a| a.min(free)));
            }
        }
        for a in &n.args {
            go(a, cutoff, acc);
        }
    }
    fn go(t: &NormalType, cutoff: usize, acc: &mut Option<usize>) {
        match t {
            NormalType::Neutral(n) => neu(n, cutoff, acc),
            NormalType::Arrow(a, b) | NormalType::Compl(a, b) => {
                go(a, cutoff, acc);
                go(b, cutoff, acc);
            }
            NormalType::Forall(_, b) | NormalType::Lam(_, b) => go(b, cutoff + 1, acc),
            NormalType::Qual(p, b) => {
                for c in p.components() {
                    go(c, cutoff, acc);
                }
                go(b, cutoff, acc);
            }
            NormalType::Mu(b) | NormalType::Pi(b) | NormalType::Sigma(b) => go(b, cutoff, acc),
            NormalType::Row(es) => {
                for (_, t) in es {
                    go(t, cutoff, acc);
                }
            }
            NormalType::LabeledSingleton(n, t) => {
                neu(n, cutoff, acc);
                go(t, cutoff, acc);
            }
            NormalType::Map(f, n) => {
                go(f, cutoff, acc);
                neu(n, cutoff, acc);
            }
            NormalType::Label(_) => {}
            NormalType::Sing(t, _) => go(t, cutoff, acc),
        }
    }
    let mut acc = None;
    go(t, 0, &mut acc);
    acc
}

/// Swap free de Bruijn indices 0 and 1 (used to move a binder inside a
/// map operator's lambda during inversion).
fn swap01(t: &NormalType) -> NormalType {
    fn neu(n: &Neutral, c: usize) -> Neutral {
        let head = match n.head {
            Head::Var(ix) if ix == c => Head::Var(c + 1),
            Head::Var(ix) if ix == c + 1 => Head::Var(c),
            ref h => h.clone(),
        };
        Neutral { head, args: n.args.iter().map(|a| go(a, c)).collect() }
    }
    fn go(t: &NormalType, c: usize) -> NormalType {
        match t {
            NormalType::Neutral(n) => NormalType::Neutral(neu(n, c)),
            NormalType::Arrow(a, b) => {
                NormalType::Arrow(Box::new(go(a, c)), Box::new(go(b, c)))
            }
            NormalType::Forall(k, b) => NormalType::Forall(k.clone(), Box::new(go(b, c + 1))),
            NormalType::Qual(p, b) => {
                let p2 = match &**p {
                    NormalPred::Leq { lhs, rhs, kind } => NormalPred::Leq {
                        lhs: go(lhs, c),
                        rhs: go(rhs, c),
                        kind: kind.clone(),
                    },
                    NormalPred::Plus { left, right, total, kind } => NormalPred::Plus {
                        left: go(left, c),
                        right: go(right, c),
                        total: go(total, c),
                        kind: kind.clone(),
                    },
                };
                NormalType::Qual(Box::new(p2), Box::new(go(b, c)))
            }
            NormalType::Lam(k, b) => NormalType::Lam(k.clone(), Box::new(go(b, c + 1))),
            NormalType::Mu(b) => NormalType::Mu(Box::new(go(b, c))),
            NormalType::Pi(b) => NormalType::Pi(Box::new(go(b, c))),
            NormalType::Sigma(b) => NormalType::Sigma(Box::new(go(b, c))),
            NormalType::Row(es) => NormalType::Row(
                es.iter().map(|(l, t)| (l.clone(), go(t, c))).collect(),
            ),
            NormalType::LabeledSingleton(n, t) => {
                NormalType::LabeledSingleton(neu(n, c), Box::new(go(t, c)))
            }
            NormalType::Map(f, n) => NormalType::Map(Box::new(go(f, c)), neu(n, c)),
            NormalType::Compl(a, b) => {
                NormalType::Compl(Box::new(go(a, c)), Box::new(go(b, c)))
            }
            NormalType::Label(_) => t.clone(),
            NormalType::Sing(t2, k) => NormalType::Sing(Box::new(go(t2, c)), k.clone()),
        }
    }
    go(t, 0)
}

/// Abstract the innermost binder out of a row: the solution row `r'` with
/// `Map (\f. f a) r' == r` where `a` is de Bruijn index 0. Entries of
/// literals gain a lambda; a pending map's operator gains an inner binder
/// (by swapping it with the operator's own); complements recurse.
fn abstract_row(rhs: &NormalType, ka: &Kind) -> Option<NormalType> {
    match rhs {
        NormalType::Row(es) => Some(NormalType::Row(
            es.iter()
                .map(|(l, p)| (l.clone(), NormalType::Lam(ka.clone(), Box::new(p.clone()))))
                .collect(),
        )),
        NormalType::Map(psi, n2) => {
            let (ke2, b) = match &**psi {
                NormalType::Lam(ke2, b) => (ke2, b),
                _ => return None,
            };
            // The neutral must not mention the abstracted binder, and its
            // indices move down one level (there is no lambda above it in
            // the solution, unlike the operator body).
            let wrapped = NormalType::Neutral(n2.clone());
            if min_free_index(&wrapped) == Some(0) {
                return None;
            }
            let shifted = match shift_normal(&wrapped, 0, -1) {
                NormalType::Neutral(n) => n,
                _ => unreachable!(),
            };
            let chi = NormalType::Lam(
                ke2.clone(),
                Box::new(NormalType::Lam(ka.clone(), Box::new(swap01(b)))),
            );
            Some(NormalType::Map(Box::new(chi), shifted))
        }
        NormalType::Compl(a, b) => Some(NormalType::Compl(
            Box::new(abstract_row(a, ka)?),
            Box::new(abstract_row(b, ka)?),
        )),
        _ => None,
    }
}

/// Shift free term variables in a resolved term (for constant
/// eta-expansion).
fn shift_rterm(t: &RTerm, cutoff: usize, amount: isize) -> RTerm {
    match t {
        RTerm::Var(ix) => {
            if *ix < cutoff {
                RTerm::Var(*ix)
            } else {
                RTerm::Var((*ix as isize + amount) as usize)
            }
        }
        RTerm::Global(_) | RTerm::Const(_) | RTerm::Sing(_) => t.clone(),
        RTerm::Lam(n, b) => RTerm::Lam(n.clone(), Box::new(shift_rterm(b, cutoff + 1, amount))),
        RTerm::App(f, a) => RTerm::App(
            Box::new(shift_rterm(f, cutoff, amount)),
            Box::new(shift_rterm(a, cutoff, amount)),
        ),
        RTerm::TyLam(n, b) => RTerm::TyLam(n.clone(), Box::new(shift_rterm(b, cutoff, amount))),
        RTerm::TyApp(f, ty) => RTerm::TyApp(Box::new(shift_rterm(f, cutoff, amount)), ty.clone()),
        RTerm::Intro(l, m) => RTerm::Intro(
            Box::new(shift_rterm(l, cutoff, amount)),
            Box::new(shift_rterm(m, cutoff, amount)),
        ),
        RTerm::Elim(m, l) => RTerm::Elim(
            Box::new(shift_rterm(m, cutoff, amount)),
            Box::new(shift_rterm(l, cutoff, amount)),
        ),
    }
}

fn contains_specific_meta(t: &NormalType, m: MetaId) -> bool {
    fn neu(n: &Neutral, m: MetaId) -> bool {
        matches!(n.head, Head::Meta(x) if x == m) || n.args.iter().any(|a| go(a, m))
    }
    fn go(t: &NormalType, m: MetaId) -> bool {
        match t {
            NormalType::Neutral(n) => neu(n, m),
            NormalType::Arrow(a, b) | NormalType::Compl(a, b) => go(a, m) || go(b, m),
            NormalType::Forall(_, b) | NormalType::Lam(_, b) => go(b, m),
            NormalType::Qual(p, b) => p.components().iter().any(|c| go(c, m)) || go(b, m),
            NormalType::Mu(b) | NormalType::Pi(b) | NormalType::Sigma(b) => go(b, m),
            NormalType::Row(es) => es.iter().any(|(_, t)| go(t, m)),
            NormalType::LabeledSingleton(n, t) => neu(n, m) || go(t, m),
            NormalType::Map(f, n) => go(f, m) || neu(n, m),
            NormalType::Label(_) => false,
            NormalType::Sing(t, _) => go(t, m),
        }
    }
    go(t, m)
}

impl<'a> Unifier<'a> {
    fn zonk(&self, delta: &[Kind], t: &NormalType, kind: &Kind) -> NormalType {
        if t.contains_meta() {
            norm::renormalize(self.metas, delta, t, kind)
        } else {
            t.clone()
        }
    }

    fn try_bind(&mut self, delta: &[Kind], m: MetaId, sol: &NormalType) -> Unify {
        if contains_specific_meta(sol, m) {
            return Unify::Fail(format!("occurs check: ?{} appears in its own solution", m));
        }
        let dm = self.metas.info(m).depth;
        let d = delta.len();
        if d < dm {
            return Unify::Fail("metavariable used outside its scope".into());
        }
        let cut = d - dm;
        if let Some(min) = min_free_index(sol) {
            if min < cut {
                return Unify::Fail(
                    "solution mentions a variable that escapes the metavariable's scope".into(),
                );
            }
        }
        let shifted = shift_normal(sol, 0, -(cut as isize));
        self.metas.bind(m, shifted);
        Unify::Ok
    }

    fn unify(
        &mut self,
        delta: &mut Vec<Kind>,
        a: &NormalType,
        b: &NormalType,
        kind: &Kind,
    ) -> Unify {
        let a = self.zonk(delta, a, kind);
        let b = self.zonk(delta, b, kind);
        if a == b {
            return Unify::Ok;
        }
        match (as_bare_meta(&a, kind), as_bare_meta(&b, kind)) {
            (Some(m), other) if !self.metas.is_solved(m) && other != Some(m) => {
                return self.try_bind(delta, m, &b);
            }
            (_, Some(m)) if !self.metas.is_solved(m) => {
                return self.try_bind(delta, m, &a);
            }
            _ => {}
        }
        // Pattern inversion: Map (\g. g a) ?m against a literal row, where
        // `a` is the directly enclosing binder, determines ?m uniquely
        // (each entry abstracted over that binder).
        if let Kind::Row(elem) = kind {
            for (x, y) in [(&a, &b), (&b, &a)] {
                if let NormalType::Map(f, n) = x {
                    if let Head::Meta(m) = n.head {
                        if n.args.is_empty()
                            && !self.metas.is_solved(m)
                            && matches!(
                                y,
                                NormalType::Row(_)
                                    | NormalType::Map(_, _)
                                    | NormalType::Compl(_, _)
                            )
                            && !contains_specific_meta(y, m)
                        {
                            if let Some(res) = self.invert_map(delta, f, m, y, elem) {
                                return res;
                            }
                        }
                    }
                }
            }
        }
        match (&a, &b) {
            (NormalType::Arrow(a1, a2), NormalType::Arrow(b1, b2)) => {
                self.both(delta, a1, b1, &Kind::Star, a2, b2, &Kind::Star)
            }
            (NormalType::Forall(k1, t1), NormalType::Forall(k2, t2)) => {
                if k1 != k2 {
                    return Unify::Fail("forall binder kinds differ".into());
                }
                delta.push(k1.clone());
                let r = self.unify(delta, t1, t2, &Kind::Star);
                delta.pop();
                r
            }
            (NormalType::Qual(p1, t1), NormalType::Qual(p2, t2)) => {
                match self.unify_pred(delta, p1, p2) {
                    Unify::Ok => self.unify(delta, t1, t2, &Kind::Star),
                    other => other,
                }
            }
            (NormalType::Lam(k1, t1), NormalType::Lam(k2, t2)) => {
                let cod = match kind {
                    Kind::Arrow(_, cod) => (**cod).clone(),
                    _ => return Unify::Fail("lambda at non-arrow kind".into()),
                };
                if k1 != k2 {
                    return Unify::Fail("lambda binder kinds differ".into());
                }
                delta.push(k1.clone());
                let r = self.unify(delta, t1, t2, &cod);
                delta.pop();
                r
            }
            (NormalType::Mu(f1), NormalType::Mu(f2)) => {
                self.unify(delta, f1, f2, &Kind::arrow(Kind::Star, Kind::Star))
            }
            (NormalType::Pi(r1), NormalType::Pi(r2))
            | (NormalType::Sigma(r1), NormalType::Sigma(r2)) => {
                self.unify(delta, r1, r2, &Kind::row(Kind::Star))
            }
            (NormalType::Row(e1), NormalType::Row(e2)) => {
                if e1.len() != e2.len() {
                    return Unify::Fail(format!(
                        "row sizes differ: {} vs {}",
                        e1.len(),
                        e2.len()
                    ));
                }
                let elem = match kind {
                    Kind::Row(e) => (**e).clone(),
                    _ => return Unify::Fail("row literal at non-row kind".into()),
                };
                for ((l1, t1), (l2, t2)) in e1.iter().zip(e2.iter()) {
                    if l1 != l2 {
                        return Unify::Fail(format!("row labels differ: {} vs {}", l1, l2));
                    }
                    match self.unify(delta, t1, t2, &elem) {
                        Unify::Ok => {}
                        other => return other,
                    }
                }
                Unify::Ok
            }
            (NormalType::LabeledSingleton(n1, t1), NormalType::LabeledSingleton(n2, t2)) => {
                let elem = match kind {
                    Kind::Row(e) => (**e).clone(),
                    _ => return Unify::Fail("labeled singleton at non-row kind".into()),
                };
                match self.unify_neutral(delta, n1, n2) {
                    Unify::Ok => self.unify(delta, t1, t2, &elem),
                    other => other,
                }
            }
            (NormalType::LabeledSingleton(n, t), NormalType::Row(es))
            | (NormalType::Row(es), NormalType::LabeledSingleton(n, t)) => {
                // A metavariable label against a literal singleton row.
                if es.len() != 1 {
                    return Unify::Fail("singleton against multi-entry row".into());
                }
                let elem = match kind {
                    Kind::Row(e) => (**e).clone(),
                    _ => return Unify::Fail("row at non-row kind".into()),
                };
                if let Head::Meta(m) = n.head {
                    if n.args.is_empty() && !self.metas.is_solved(m) {
                        match self.try_bind(delta, m, &NormalType::Label(es[0].0.clone())) {
                            Unify::Ok => {}
                            other => return other,
                        }
                        return self.unify(delta, t, &es[0].1, &elem);
                    }
                }
                Unify::Fail("label mismatch between singleton rows".into())
            }
            (NormalType::Map(f1, n1), NormalType::Map(f2, n2)) => {
                let elem = match kind {
                    Kind::Row(e) => (**e).clone(),
                    _ => return Unify::Fail("map at non-row kind".into()),
                };
                let src1 = self.neutral_row_elem(delta, n1);
                let src2 = self.neutral_row_elem(delta, n2);
                match (src1, src2) {
                    (Some(s1), Some(s2)) => {
                        if s1 != s2 {
                            if matches!(n1.head, Head::Meta(_))
                                || matches!(n2.head, Head::Meta(_))
                            {
                                return Unify::Postpone;
                            }
                            return Unify::Fail("mapped rows have different kinds".into());
                        }
                        match self.unify_neutral(delta, n1, n2) {
                            Unify::Ok => self.unify(delta, f1, f2, &Kind::arrow(s1, elem)),
                            other => other,
                        }
                    }
                    _ => Unify::Postpone,
                }
            }
            (NormalType::Compl(a1, b1), NormalType::Compl(a2, b2)) => {
                self.both(delta, a1, a2, kind, b1, b2, kind)
            }
            (NormalType::Sing(t1, k1), NormalType::Sing(t2, k2)) => {
                if k1 != k2 {
                    return Unify::Fail("singleton kinds differ".into());
                }
                self.unify(delta, t1, t2, k1)
            }
            (NormalType::Neutral(n1), NormalType::Neutral(n2)) => {
                self.unify_neutral(delta, n1, n2)
            }
            (NormalType::Neutral(n), _) | (_, NormalType::Neutral(n))
                if matches!(n.head, Head::Meta(_)) =>
            {
                Unify::Postpone
            }
            (NormalType::Map(_, n), _) | (_, NormalType::Map(_, n))
                if matches!(n.head, Head::Meta(_)) =>
            {
                Unify::Postpone
            }
            _ => Unify::Fail(format!(
                "type mismatch: {} vs {}",
                crate::pretty::normal_type(&a),
                crate::pretty::normal_type(&b)
            )),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn both(
        &mut self,
        delta: &mut Vec<Kind>,
        a1: &NormalType,
        b1: &NormalType,
        k1: &Kind,
        a2: &NormalType,
        b2: &NormalType,
        k2: &Kind,
    ) -> Unify {
        match self.unify(delta, a1, b1, k1) {
            Unify::Ok => self.unify(delta, a2, b2, k2),
            other => other,
        }
    }

    /// `Map (\g. g a) ?m = {l_i := P_i}` with `a` the innermost enclosing
    /// binder binds `?m := {l_i := \a. P_i}`. The argument must be exactly
    /// the (eta-long) variable directly under the map's entry binder, so
    /// abstraction is pure re-binding and leaves all other indices intact.
    fn invert_map(
        &mut self,
        delta: &mut Vec<Kind>,
        f: &NormalType,
        m: MetaId,
        rhs: &NormalType,
        elem: &Kind,
    ) -> Option<Unify> {
        let (ke, body) = match f {
            NormalType::Lam(ke, body) => (ke, body),
            _ => return None,
        };
        let ka = match ke {
            Kind::Arrow(ka, _) => (**ka).clone(),
            _ => return None,
        };
        let arg = match &**body {
            NormalType::Neutral(Neutral { head: Head::Var(0), args }) if args.len() == 1 => {
                &args[0]
            }
            _ => return None,
        };
        let expected_arg = norm::reify(
            &norm::NoMetas,
            2,
            &ka,
            &norm::reflect(&ka, SemNeutral { head: SemHead::Lvl(0), args: vec![] }),
        );
        if *arg != expected_arg {
            return None;
        }
        let meta_elem = match self.metas.info(m).kind.clone() {
            Kind::Row(e) => *e,
            _ => return None,
        };
        if meta_elem != Kind::arrow(ka.clone(), elem.clone()) {
            return None;
        }
        if delta.is_empty() {
            return None;
        }
        let solution = abstract_row(rhs, &ka)?;
        // The abstracted binder is the innermost context entry; the
        // solution lives below it.
        let d2 = delta[..delta.len() - 1].to_vec();
        Some(self.try_bind(&d2, m, &solution))
    }

    /// Bind a bare metavariable head to another neutral, reflected at the
    /// metavariable's kind (identity map at row kinds, eta-long at arrows).
    fn bind_to_neutral(&mut self, delta: &mut Vec<Kind>, m: MetaId, n: &Neutral) -> Unify {
        let k = self.metas.info(m).kind.clone();
        let core = norm::embed(&NormalType::Neutral(n.clone()));
        let sol = norm::normalize(self.metas, delta, &core, &k);
        self.try_bind(delta, m, &sol)
    }

    fn neutral_row_elem(&self, delta: &[Kind], n: &Neutral) -> Option<Kind> {
        let mut k = match n.head {
            Head::Var(ix) => delta.get(delta.len().checked_sub(1 + ix)?)?.clone(),
            Head::Meta(m) => self.metas.info(m).kind.clone(),
        };
        for _ in &n.args {
            k = match k {
                Kind::Arrow(_, cod) => *cod,
                _ => return None,
            };
        }
        match k {
            Kind::Row(e) => Some(*e),
            _ => None,
        }
    }

    fn unify_neutral(&mut self, delta: &mut Vec<Kind>, n1: &Neutral, n2: &Neutral) -> Unify {
        match (&n1.head, &n2.head) {
            (Head::Var(i), Head::Var(j)) if i == j => {}
            (Head::Meta(i), Head::Meta(j)) if i == j => {}
            (Head::Meta(m), _) if n1.args.is_empty() && !self.metas.is_solved(*m) => {
                return self.bind_to_neutral(delta, *m, n2);
            }
            (_, Head::Meta(m)) if n2.args.is_empty() && !self.metas.is_solved(*m) => {
                return self.bind_to_neutral(delta, *m, n1);
            }
            (Head::Meta(_), _) | (_, Head::Meta(_)) => return Unify::Postpone,
            _ => return Unify::Fail("different neutral heads".into()),
        }
        if n1.args.len() != n2.args.len() {
            return Unify::Fail("neutral spine lengths differ".into());
        }
        let mut k = match n1.head {
            Head::Var(ix) => match delta.len().checked_sub(1 + ix).and_then(|p| delta.get(p)) {
                Some(k) => k.clone(),
                None => return Unify::Fail("unbound variable in neutral".into()),
            },
            Head::Meta(m) => self.metas.info(m).kind.clone(),
        };
        for (a1, a2) in n1.args.iter().zip(n2.args.iter()) {
            let (dom, cod) = match k {
                Kind::Arrow(dom, cod) => (*dom, *cod),
                _ => return Unify::Fail("over-applied neutral".into()),
            };
            match self.unify(delta, a1, a2, &dom) {
                Unify::Ok => {}
                other => return other,
            }
            k = cod;
        }
        Unify::Ok
    }

    fn unify_pred(&mut self, delta: &mut Vec<Kind>, p1: &NormalPred, p2: &NormalPred) -> Unify {
        match (p1, p2) {
            (
                NormalPred::Leq { lhs: a1, rhs: b1, kind: k1 },
                NormalPred::Leq { lhs: a2, rhs: b2, kind: k2 },
            ) if k1 == k2 => {
                let rk = Kind::row(k1.clone());
                self.both(delta, a1, a2, &rk, b1, b2, &rk)
            }
            (
                NormalPred::Plus { left: a1, right: b1, total: c1, kind: k1 },
                NormalPred::Plus { left: a2, right: b2, total: c2, kind: k2 },
            ) if k1 == k2 => {
                let rk = Kind::row(k1.clone());
                match self.unify(delta, a1, a2, &rk) {
                    Unify::Ok => self.both(delta, b1, b2, &rk, c1, c2, &rk),
                    other => other,
                }
            }
            _ => Unify::Fail("predicate shapes differ".into()),
        }
    }
}

// ---------------------------------------------------------------------
// Goal-solving context for the entailment solver.

struct GoalCtx<'a> {
    metas: &'a mut MetaStore,
    delta: Vec<Kind>,
}

impl<'a> SolveCtx for GoalCtx<'a> {
    fn delta(&self) -> &[Kind] {
        &self.delta
    }

    fn unify(&mut self, a: &NormalType, b: &NormalType, kind: &Kind) -> bool {
        let mut delta = self.delta.clone();
        matches!(
            Unifier { metas: self.metas }.unify(&mut delta, a, b, kind),
            Unify::Ok
        )
    }

    fn zonk(&self, t: &NormalType, kind: &Kind) -> NormalType {
        if t.contains_meta() {
            norm::renormalize(self.metas, &self.delta, t, kind)
        } else {
            t.clone()
        }
    }

    fn normalize_core(&self, ty: &Type, kind: &Kind) -> NormalType {
        norm::normalize(self.metas, &self.delta, ty, kind)
    }

    fn snapshot(&self) -> usize {
        self.metas.snapshot()
    }

    fn rollback(&mut self, snap: usize) {
        self.metas.rollback(snap)
    }

    fn kind_of_meta(&self, m: MetaId) -> Option<Kind> {
        Some(self.metas.info(m).kind.clone())
    }
}

// ---------------------------------------------------------------------
// The checker.

#[derive(Debug)]
struct Goal {
    hole: u32,
    pred: NormalPred,
    delta: Vec<Kind>,
    phi: Vec<NormalPred>,
    solved: bool,
}

#[derive(Debug)]
struct DeferredEq {
    a: NormalType,
    b: NormalType,
    kind: Kind,
    delta: Vec<Kind>,
}

pub struct Checker<'g> {
    pub globals: &'g GlobalEnv,
    pub entail_cfg: EntailConfig,
    metas: MetaStore,
    kinds: KindState,
    delta: Vec<Kind>,
    phi: Vec<NormalPred>,
    gamma: Vec<NormalType>,
    /// Explicit type binder names, as (name, level) pairs.
    tyvars: Vec<(String, usize)>,
    goals: Vec<Goal>,
    deferred: Vec<DeferredEq>,
    holes: HashMap<u32, Evidence>,
    next_hole: u32,
}

enum Item<'t> {
    Tm(&'t RTerm),
    Ty(&'t SType),
}

enum Step {
    Ty(NormalType, Kind),
    Ev(u32),
    Tm(NormalType, Option<Term>),
}

impl<'g> Checker<'g> {
    pub fn new(globals: &'g GlobalEnv, entail_cfg: EntailConfig) -> Checker<'g> {
        Checker {
            globals,
            entail_cfg,
            metas: MetaStore::default(),
            kinds: KindState::new(),
            delta: vec![],
            phi: vec![],
            gamma: vec![],
            tyvars: vec![],
            goals: vec![],
            deferred: vec![],
            holes: HashMap::new(),
            next_hole: 0,
        }
    }

    fn push_tyvar(&mut self, k: Kind, name: Option<String>) {
        self.delta.push(k);
        for p in &mut self.phi {
            *p = shift_normal_pred(p, 0, 1);
        }
        for t in &mut self.gamma {
            *t = shift_normal(t, 0, 1);
        }
        if let Some(n) = name {
            self.tyvars.push((n, self.delta.len() - 1));
        }
    }

    fn pop_tyvar(&mut self, named: bool) {
        self.delta.pop();
        for p in &mut self.phi {
            *p = shift_normal_pred(p, 0, -1);
        }
        for t in &mut self.gamma {
            *t = shift_normal(t, 0, -1);
        }
        if named {
            self.tyvars.pop();
        }
    }

    fn zonk(&self, t: &NormalType, kind: &Kind) -> NormalType {
        if t.contains_meta() {
            norm::renormalize(&self.metas, &self.delta, t, kind)
        } else {
            t.clone()
        }
    }

    fn fresh_meta(&mut self, kind: Kind) -> NormalType {
        let m = self.metas.fresh(kind.clone(), &self.delta);
        norm::reify(
            &self.metas,
            self.delta.len(),
            &kind,
            &norm::reflect(&kind, SemNeutral { head: SemHead::Meta(m), args: vec![] }),
        )
    }

    fn unify_or_defer(
        &mut self,
        a: &NormalType,
        b: &NormalType,
        kind: &Kind,
    ) -> Result<(), TypeError> {
        let mut delta = self.delta.clone();
        match (Unifier { metas: &mut self.metas }).unify(&mut delta, a, b, kind) {
            Unify::Ok => Ok(()),
            Unify::Postpone => {
                self.deferred.push(DeferredEq {
                    a: a.clone(),
                    b: b.clone(),
                    kind: kind.clone(),
                    delta: self.delta.clone(),
                });
                Ok(())
            }
            Unify::Fail(msg) => terr(msg),
        }
    }

    fn new_goal(&mut self, pred: NormalPred) -> u32 {
        let hole = self.next_hole;
        self.next_hole += 1;
        self.goals.push(Goal {
            hole,
            pred,
            delta: self.delta.clone(),
            phi: self.phi.clone(),
            solved: false,
        });
        hole
    }

    /// Resolve an embedded surface type against the checker's scope and
    /// kind-check it.
    fn elab_embedded_type(
        &mut self,
        sty: &SType,
        expected_kind: Option<&Kind>,
    ) -> Result<(NormalType, Kind), TypeError> {
        let core = self.resolve_embedded(sty, &mut Vec::new()).map_err(TypeError)?;
        let kt = kind::infer_kind(&mut self.kinds, &mut self.delta, &core)
            .map_err(|e| TypeError(e.to_string()))?;
        if let Some(k) = expected_kind {
            self.kinds.unify(&kt.kind, k).map_err(|e| TypeError(e.to_string()))?;
        }
        let ty = kind::finalize(&self.kinds, &kt.ty).map_err(|e| TypeError(e.to_string()))?;
        let k = self.kinds.zonk(&kt.kind);
        if k.has_meta() {
            return terr("cannot infer a unique kind for a type argument; annotate it");
        }
        let nf = norm::normalize(&self.metas, &self.delta, &ty, &k);
        Ok((nf, k))
    }

    fn resolve_embedded(&mut self, sty: &SType, local: &mut Vec<String>) -> Result<Type, String> {
        match sty {
            SType::Var(name, _) => {
                if let Some(pos) = local.iter().rposition(|n| n == name) {
                    return Ok(Type::Var(local.len() - 1 - pos));
                }
                if let Some((_, level)) = self.tyvars.iter().rev().find(|(n, _)| n == name) {
                    return Ok(Type::Var(local.len() + self.delta.len() - 1 - level));
                }
                match self.globals.lookup(name) {
                    Some(GlobalRef::Type(i)) => match &self.globals.types[i].def {
                        Some(def) => Ok(shift_type(
                            &def.ty,
                            0,
                            (local.len() + self.delta.len()) as isize,
                        )),
                        None => Err(format!("type {} is declared but not defined", name)),
                    },
                    Some(GlobalRef::Term(_)) => Err(format!("{} is a term, not a type", name)),
                    None => Err(format!("unbound type identifier {}", name)),
                }
            }
            SType::Pi => Ok(Type::Pi(self.kinds.fresh())),
            SType::Sigma => Ok(Type::Sigma(self.kinds.fresh())),
            SType::Mu => Ok(Type::Mu),
            SType::Forall(binders, k, body) => {
                let kind = k.as_ref().map(crate::resolve::resolve_kind);
                for b in binders {
                    local.push(b.clone());
                }
                let body = self.resolve_embedded(body, local);
                for _ in binders {
                    local.pop();
                }
                let mut out = body?;
                for _ in binders.iter().rev() {
                    let bk = kind.clone().unwrap_or_else(|| self.kinds.fresh());
                    out = Type::Forall(bk, Box::new(out));
                }
                Ok(out)
            }
            SType::Lam(binders, body) => {
                for b in binders {
                    local.push(b.clone());
                }
                let body = self.resolve_embedded(body, local);
                for _ in binders {
                    local.pop();
                }
                let mut out = body?;
                for _ in binders.iter().rev() {
                    out = Type::Lam(self.kinds.fresh(), Box::new(out));
                }
                Ok(out)
            }
            SType::Qual(preds, body) => {
                let mut out = self.resolve_embedded(body, local)?;
                for p in preds.iter().rev() {
                    let rp = match p {
                        crate::surface::SPred::Leq(a, b) => Pred::Leq {
                            lhs: self.resolve_embedded(a, local)?,
                            rhs: self.resolve_embedded(b, local)?,
                            kind: self.kinds.fresh(),
                        },
                        crate::surface::SPred::Plus(a, b, c) => Pred::Plus {
                            left: self.resolve_embedded(a, local)?,
                            right: self.resolve_embedded(b, local)?,
                            total: self.resolve_embedded(c, local)?,
                            kind: self.kinds.fresh(),
                        },
                    };
                    out = Type::Qual(Box::new(rp), Box::new(out));
                }
                Ok(out)
            }
            SType::Arrow(a, b) => Ok(Type::arrow(
                self.resolve_embedded(a, local)?,
                self.resolve_embedded(b, local)?,
            )),
            SType::App(f, a) => Ok(Type::app(
                self.resolve_embedded(f, local)?,
                self.resolve_embedded(a, local)?,
            )),
            SType::Row(entries) => {
                let all_literal = entries.iter().all(|(l, _)| matches!(l, SType::Label(_)));
                if all_literal {
                    let mut row: Vec<(Label, Type)> = Vec::new();
                    for (l, t) in entries {
                        let name = match l {
                            SType::Label(s) => Label::new(s),
                            _ => unreachable!(),
                        };
                        let rt = self.resolve_embedded(t, local)?;
                        if row_insert_sorted(&mut row, name.clone(), rt).is_err() {
                            return Err(format!("duplicate label {} in row", name));
                        }
                    }
                    Ok(Type::Row(row))
                } else if entries.len() == 1 {
                    let (l, t) = &entries[0];
                    let lt = self.resolve_embedded(l, local)?;
                    let tt = self.resolve_embedded(t, local)?;
                    Ok(Type::LabeledSingleton(Box::new(lt), Box::new(tt)))
                } else {
                    Err("a row with a variable label must have exactly one entry".into())
                }
            }
            SType::Label(l) => Ok(Type::Label(Label::new(l))),
            SType::Sing(inner) => {
                let t = self.resolve_embedded(inner, local)?;
                Ok(Type::Sing(Box::new(t), self.kinds.fresh()))
            }
            SType::Compl(a, b) => Ok(Type::Compl(
                Box::new(self.resolve_embedded(a, local)?),
                Box::new(self.resolve_embedded(b, local)?),
            )),
        }
    }

    // Constant type schemes.

    fn const_scheme_core(c: Const, kappa: &Kind) -> Type {
        use Type as T;
        let rstar = Kind::row(Kind::Star);
        let star = Kind::Star;
        let pi = |r: T| T::app(T::Pi(Kind::Star), r);
        let sigma = |r: T| T::app(T::Sigma(Kind::Star), r);
        match c {
            Const::Prj => T::Forall(
                rstar.clone(),
                Box::new(T::Forall(
                    rstar,
                    Box::new(T::Qual(
                        Box::new(Pred::Leq {
                            lhs: T::Var(1),
                            rhs: T::Var(0),
                            kind: star.clone(),
                        }),
                        Box::new(T::arrow(pi(T::Var(0)), pi(T::Var(1)))),
                    )),
                )),
            ),
            Const::Concat => T::Forall(
                rstar.clone(),
                Box::new(T::Forall(
                    rstar.clone(),
                    Box::new(T::Forall(
                        rstar,
                        Box::new(T::Qual(
                            Box::new(Pred::Plus {
                                left: T::Var(2),
                                right: T::Var(1),
                                total: T::Var(0),
                                kind: star.clone(),
                            }),
                            Box::new(T::arrow(
                                pi(T::Var(2)),
                                T::arrow(pi(T::Var(1)), pi(T::Var(0))),
                            )),
                        )),
                    )),
                )),
            ),
            Const::Inj => T::Forall(
                rstar.clone(),
                Box::new(T::Forall(
                    rstar,
                    Box::new(T::Qual(
                        Box::new(Pred::Leq {
                            lhs: T::Var(1),
                            rhs: T::Var(0),
                            kind: star.clone(),
                        }),
                        Box::new(T::arrow(sigma(T::Var(1)), sigma(T::Var(0)))),
                    )),
                )),
            ),
            Const::Branch => T::Forall(
                rstar.clone(),
                Box::new(T::Forall(
                    rstar.clone(),
                    Box::new(T::Forall(
                        rstar,
                        Box::new(T::Forall(
                            star.clone(),
                            Box::new(T::Qual(
                                Box::new(Pred::Plus {
                                    left: T::Var(3),
                                    right: T::Var(2),
                                    total: T::Var(1),
                                    kind: star.clone(),
                                }),
                                Box::new(T::arrow(
                                    T::arrow(sigma(T::Var(3)), T::Var(0)),
                                    T::arrow(
                                        T::arrow(sigma(T::Var(2)), T::Var(0)),
                                        T::arrow(sigma(T::Var(1)), T::Var(0)),
                                    ),
                                )),
                            )),
                        )),
                    )),
                )),
            ),
            Const::In => {
                let fk = Kind::arrow(Kind::Star, Kind::Star);
                T::Forall(
                    fk,
                    Box::new(T::arrow(
                        T::app(T::Var(0), T::app(T::Mu, T::Var(0))),
                        T::app(T::Mu, T::Var(0)),
                    )),
                )
            }
            Const::Out => {
                let fk = Kind::arrow(Kind::Star, Kind::Star);
                T::Forall(
                    fk,
                    Box::new(T::arrow(
                        T::app(T::Mu, T::Var(0)),
                        T::app(T::Var(0), T::app(T::Mu, T::Var(0))),
                    )),
                )
            }
            Const::Fix => T::Forall(
                star,
                Box::new(T::arrow(T::arrow(T::Var(0), T::Var(0)), T::Var(0))),
            ),
            Const::Syn => {
                // forall f : k -> *, z : R[k].
                //   #f -> (forall l : L, t : k. {l := t} < z => #l -> f t)
                //      -> Pi (f z)
                let fk = Kind::arrow(kappa.clone(), Kind::Star);
                let zk = Kind::row(kappa.clone());
                let body_inner = T::Forall(
                    Kind::Label,
                    Box::new(T::Forall(
                        kappa.clone(),
                        Box::new(T::Qual(
                            Box::new(Pred::Leq {
                                lhs: T::LabeledSingleton(
                                    Box::new(T::Var(1)),
                                    Box::new(T::Var(0)),
                                ),
                                rhs: T::Var(2),
                                kind: kappa.clone(),
                            }),
                            Box::new(T::arrow(
                                T::Sing(Box::new(T::Var(1)), Kind::Label),
                                T::app(T::Var(3), T::Var(0)),
                            )),
                        )),
                    )),
                );
                T::Forall(
                    fk.clone(),
                    Box::new(T::Forall(
                        zk,
                        Box::new(T::arrow(
                            T::Sing(Box::new(T::Var(1)), fk),
                            T::arrow(
                                body_inner,
                                pi(T::MapApp(Box::new(T::Var(1)), Box::new(T::Var(0)))),
                            ),
                        )),
                    )),
                )
            }
            Const::Ana => {
                // forall f : k -> *, z : R[k], t : *.
                //   #f -> (forall l : L, u : k. {l := u} < z => #l -> f u -> t)
                //      -> Sigma (f z) -> t
                let fk = Kind::arrow(kappa.clone(), Kind::Star);
                let zk = Kind::row(kappa.clone());
                let body_inner = T::Forall(
                    Kind::Label,
                    Box::new(T::Forall(
                        kappa.clone(),
                        Box::new(T::Qual(
                            Box::new(Pred::Leq {
                                lhs: T::LabeledSingleton(
                                    Box::new(T::Var(1)),
                                    Box::new(T::Var(0)),
                                ),
                                rhs: T::Var(3),
                                kind: kappa.clone(),
                            }),
                            Box::new(T::arrow(
                                T::Sing(Box::new(T::Var(1)), Kind::Label),
                                T::arrow(T::app(T::Var(4), T::Var(0)), T::Var(2)),
                            )),
                        )),
                    )),
                );
                T::Forall(
                    fk.clone(),
                    Box::new(T::Forall(
                        zk,
                        Box::new(T::Forall(
                            Kind::Star,
                            Box::new(T::arrow(
                                T::Sing(Box::new(T::Var(2)), fk),
                                T::arrow(
                                    body_inner,
                                    T::arrow(
                                        sigma(T::MapApp(
                                            Box::new(T::Var(2)),
                                            Box::new(T::Var(1)),
                                        )),
                                        T::Var(0),
                                    ),
                                ),
                            )),
                        )),
                    )),
                )
            }
        }
    }

    /// The scheme of a constant as a closed normal type. `kappa` picks the
    /// kind index for `syn`/`ana` and is ignored elsewhere.
    pub fn const_scheme(&self, c: Const, kappa: &Kind) -> NormalType {
        let core = Self::const_scheme_core(c, kappa);
        norm::normalize(&norm::NoMetas, &[], &core, &Kind::Star)
    }

    // -----------------------------------------------------------------
    // Inference and checking.

    pub fn infer(&mut self, t: &RTerm) -> Result<(Term, NormalType), TypeError> {
        self.infer_spine(t, None)
    }

    pub fn check(&mut self, t: &RTerm, expected: &NormalType) -> Result<Term, TypeError> {
        let expected = self.zonk(expected, &Kind::Star);
        match (&t, &expected) {
            (RTerm::TyLam(name, body), NormalType::Forall(k, ebody)) => {
                self.push_tyvar(k.clone(), Some(name.clone()));
                let inner = self.check(body, ebody);
                self.pop_tyvar(true);
                Ok(Term::TyLam(k.clone(), Box::new(inner?)))
            }
            (_, NormalType::Forall(k, ebody)) => {
                self.push_tyvar(k.clone(), None);
                let inner = self.check(t, ebody);
                self.pop_tyvar(false);
                Ok(Term::TyLam(k.clone(), Box::new(inner?)))
            }
            (_, NormalType::Qual(p, ebody)) => {
                self.phi.push((**p).clone());
                let inner = self.check(t, ebody);
                self.phi.pop();
                Ok(Term::EvLam(p.clone(), Box::new(inner?)))
            }
            (RTerm::Lam(_name, body), NormalType::Arrow(dom, cod)) => {
                self.gamma.push((**dom).clone());
                let inner = self.check(body, cod);
                self.gamma.pop();
                Ok(Term::Lam((**dom).clone(), Box::new(inner?)))
            }
            (RTerm::Lam(_, _), _) => {
                if as_bare_meta(&expected, &Kind::Star).is_some() {
                    let dom = self.fresh_meta(Kind::Star);
                    let cod = self.fresh_meta(Kind::Star);
                    let arrow = NormalType::Arrow(Box::new(dom), Box::new(cod));
                    self.unify_or_defer(&expected, &arrow, &Kind::Star)?;
                    return self.check(t, &arrow);
                }
                terr(format!(
                    "function given where a value of type {} is expected",
                    crate::pretty::normal_type(&expected)
                ))
            }
            (RTerm::Intro(lab, payload), NormalType::Pi(row)) => {
                self.check_intro(Flavor::Record, lab, payload, row)
            }
            (RTerm::Intro(lab, payload), NormalType::Sigma(row)) => {
                self.check_intro(Flavor::Variant, lab, payload, row)
            }
            (RTerm::Intro(_, _), _) if as_bare_meta(&expected, &Kind::Star).is_some() => {
                terr("cannot resolve `:=` without an expected record or variant type")
            }
            (RTerm::Sing(sty), NormalType::Sing(_, k)) => {
                // The expected singleton supplies the kind, which an
                // unannotated type lambda may need.
                let k = k.clone();
                let (nf, _) = self.elab_embedded_type(sty, Some(&k))?;
                let actual = NormalType::Sing(Box::new(nf.clone()), k.clone());
                self.unify_or_defer(&actual, &expected, &Kind::Star)?;
                Ok(Term::Sing(nf, k))
            }
            _ => {
                let (elab, _ty) = self.infer_spine(t, Some(&expected))?;
                Ok(elab)
            }
        }
    }

    fn check_intro(
        &mut self,
        flavor: Flavor,
        lab: &RTerm,
        payload: &RTerm,
        row: &NormalType,
    ) -> Result<Term, TypeError> {
        let row = self.zonk(row, &Kind::row(Kind::Star));
        match &row {
            NormalType::Row(es) if es.len() == 1 => {
                let (l, tau) = &es[0];
                let lelab = self.check(
                    lab,
                    &NormalType::Sing(Box::new(NormalType::Label(l.clone())), Kind::Label),
                )?;
                let pelab = self.check(payload, tau)?;
                Ok(Term::Intro(flavor, Box::new(lelab), Box::new(pelab), tau.clone()))
            }
            NormalType::LabeledSingleton(n, tau) => {
                let lelab = self.check(
                    lab,
                    &NormalType::Sing(Box::new(NormalType::Neutral(n.clone())), Kind::Label),
                )?;
                let pelab = self.check(payload, tau)?;
                Ok(Term::Intro(flavor, Box::new(lelab), Box::new(pelab), (**tau).clone()))
            }
            _ if as_bare_meta(&row, &Kind::row(Kind::Star)).is_some() => {
                let (lelab, lty) = self.infer(lab)?;
                let xi = match self.zonk(&lty, &Kind::Star) {
                    NormalType::Sing(inner, Kind::Label) => *inner,
                    other => {
                        return terr(format!(
                            "label of `:=` must be a label singleton, found {}",
                            crate::pretty::normal_type(&other)
                        ))
                    }
                };
                let ptau = self.fresh_meta(Kind::Star);
                let single = match &xi {
                    NormalType::Label(l) => NormalType::Row(vec![(l.clone(), ptau.clone())]),
                    NormalType::Neutral(n) => {
                        NormalType::LabeledSingleton(n.clone(), Box::new(ptau.clone()))
                    }
                    other => {
                        return terr(format!(
                            "invalid label type {}",
                            crate::pretty::normal_type(other)
                        ))
                    }
                };
                self.unify_or_defer(&row, &single, &Kind::row(Kind::Star))?;
                let pelab = self.check(payload, &ptau)?;
                let ptau = self.zonk(&ptau, &Kind::Star);
                Ok(Term::Intro(flavor, Box::new(lelab), Box::new(pelab), ptau))
            }
            NormalType::Row(es) => terr(format!(
                "`:=` builds singletons; expected row has {} entries",
                es.len()
            )),
            other => terr(format!(
                "`:=` against non-singleton row {}",
                crate::pretty::normal_type(other)
            )),
        }
    }

    fn flatten_spine(t: &RTerm) -> (&RTerm, Vec<Item<'_>>) {
        let mut items = Vec::new();
        let mut cur = t;
        loop {
            match cur {
                RTerm::App(f, a) => {
                    items.push(Item::Tm(a));
                    cur = f;
                }
                RTerm::TyApp(f, ty) => {
                    items.push(Item::Ty(ty));
                    cur = f;
                }
                _ => break,
            }
        }
        items.reverse();
        (cur, items)
    }

    fn infer_head(
        &mut self,
        head: &RTerm,
        first_item: Option<&Item>,
    ) -> Result<(Term, NormalType), TypeError> {
        match head {
            RTerm::Var(i) => {
                let ty = self
                    .gamma
                    .get(
                        self.gamma
                            .len()
                            .checked_sub(1 + i)
                            .ok_or_else(|| TypeError("unbound term variable".into()))?,
                    )
                    .cloned()
                    .ok_or_else(|| TypeError("unbound term variable".into()))?;
                Ok((Term::Var(*i), ty))
            }
            RTerm::Global(g) => {
                let scheme = self.globals.terms[*g].scheme.clone().ok_or_else(|| {
                    TypeError(format!(
                        "{} has no signature and is not yet checked",
                        self.globals.terms[*g].name
                    ))
                })?;
                Ok((Term::Global(*g), scheme))
            }
            RTerm::Const(c @ (Const::Syn | Const::Ana)) => {
                // The kind index comes from the singleton operator argument,
                // whose kind must have the shape k -> *.
                let sty = match first_item {
                    Some(Item::Tm(RTerm::Sing(sty))) => sty,
                    _ => {
                        return terr(format!(
                            "{} needs an explicit singleton operator argument",
                            c.name()
                        ))
                    }
                };
                let expected = Kind::arrow(self.kinds.fresh(), Kind::Star);
                let (_, fkind) = self.elab_embedded_type(sty, Some(&expected))?;
                let kappa = match fkind {
                    Kind::Arrow(dom, cod) if *cod == Kind::Star => *dom,
                    other => {
                        return terr(format!(
                            "{} operator must have kind k -> *, found {}",
                            c.name(),
                            crate::pretty::kind(&other)
                        ))
                    }
                };
                Ok((Term::Const(*c), self.const_scheme(*c, &kappa)))
            }
            RTerm::Const(c) => Ok((Term::Const(*c), self.const_scheme(*c, &Kind::Star))),
            RTerm::Sing(sty) => {
                let (nf, k) = self.elab_embedded_type(sty, None)?;
                Ok((Term::Sing(nf.clone(), k.clone()), NormalType::Sing(Box::new(nf), k)))
            }
            RTerm::Elim(target, lab) => self.infer_elim(target, lab),
            RTerm::Intro(_, _) => {
                terr("cannot resolve `:=` without an expected record or variant type")
            }
            RTerm::Lam(_, _) => {
                terr("cannot infer the type of an unannotated function; add a signature")
            }
            RTerm::TyLam(_, _) => {
                terr("cannot infer the type of a type abstraction; add a signature")
            }
            RTerm::App(_, _) | RTerm::TyApp(_, _) => unreachable!("spines are flattened"),
        }
    }

    fn infer_elim(&mut self, target: &RTerm, lab: &RTerm) -> Result<(Term, NormalType), TypeError> {
        let (telab, tty) = self.infer(target)?;
        let tty = self.zonk(&tty, &Kind::Star);
        let (flavor, row) = match &tty {
            NormalType::Pi(r) => (Flavor::Record, (**r).clone()),
            NormalType::Sigma(r) => (Flavor::Variant, (**r).clone()),
            other => {
                return terr(format!(
                    "`/` needs a record or variant, found {}",
                    crate::pretty::normal_type(other)
                ))
            }
        };
        let row = self.zonk(&row, &Kind::row(Kind::Star));
        match &row {
            NormalType::Row(es) if es.len() == 1 => {
                let (l, tau) = &es[0];
                let lelab = self.check(
                    lab,
                    &NormalType::Sing(Box::new(NormalType::Label(l.clone())), Kind::Label),
                )?;
                Ok((Term::Elim(flavor, Box::new(telab), Box::new(lelab)), tau.clone()))
            }
            NormalType::LabeledSingleton(n, tau) => {
                let lelab = self.check(
                    lab,
                    &NormalType::Sing(Box::new(NormalType::Neutral(n.clone())), Kind::Label),
                )?;
                Ok((Term::Elim(flavor, Box::new(telab), Box::new(lelab)), (**tau).clone()))
            }
            _ if as_bare_meta(&row, &Kind::row(Kind::Star)).is_some() => {
                let (lelab, lty) = self.infer(lab)?;
                let xi = match self.zonk(&lty, &Kind::Star) {
                    NormalType::Sing(inner, Kind::Label) => *inner,
                    other => {
                        return terr(format!(
                            "`/` label must be a label singleton, found {}",
                            crate::pretty::normal_type(&other)
                        ))
                    }
                };
                let tau = self.fresh_meta(Kind::Star);
                let single = match &xi {
                    NormalType::Label(l) => NormalType::Row(vec![(l.clone(), tau.clone())]),
                    NormalType::Neutral(n) => {
                        NormalType::LabeledSingleton(n.clone(), Box::new(tau.clone()))
                    }
                    other => {
                        return terr(format!(
                            "invalid label type {}",
                            crate::pretty::normal_type(other)
                        ))
                    }
                };
                self.unify_or_defer(&row, &single, &Kind::row(Kind::Star))?;
                Ok((Term::Elim(flavor, Box::new(telab), Box::new(lelab)), tau))
            }
            NormalType::Row(_) => terr("`/` eliminates singletons; project or branch first"),
            other => terr(format!(
                "`/` against non-singleton row {}",
                crate::pretty::normal_type(other)
            )),
        }
    }

    fn instantiate_forall(&mut self, body: &NormalType, arg: &NormalType) -> NormalType {
        let argsem = norm::eval_normal(&self.metas, &self.delta, arg);
        norm::instantiate_normal(&self.metas, &self.delta, body, &Kind::Star, argsem)
    }

    fn infer_spine(
        &mut self,
        t: &RTerm,
        expected: Option<&NormalType>,
    ) -> Result<(Term, NormalType), TypeError> {
        let (head, items) = Self::flatten_spine(t);
        // Constants must be fully applied at runtime; expand a shortfall
        // with lambdas before elaboration so every spine is saturated.
        if let RTerm::Const(c) = head {
            let n_tm = items
                .iter()
                .filter(|i| matches!(i, Item::Tm(_)))
                .count();
            // A completely bare constant in pure inference keeps its
            // scheme (the expansion would be an uninferable lambda).
            let bare_infer = expected.is_none() && items.is_empty();
            if n_tm < c.term_arity() && !bare_infer {
                let missing = c.term_arity() - n_tm;
                let mut expanded = shift_rterm(t, 0, missing as isize);
                for i in (0..missing).rev() {
                    expanded = RTerm::App(Box::new(expanded), Box::new(RTerm::Var(i)));
                }
                for _ in 0..missing {
                    expanded = RTerm::Lam("_eta".into(), Box::new(expanded));
                }
                return match expected {
                    Some(e) => {
                        let elab = self.check(&expanded, e)?;
                        Ok((elab, e.clone()))
                    }
                    None => self.infer_spine(&expanded, None),
                };
            }
        }
        let (head_elab, mut sigma) = self.infer_head(head, items.first())?;

        let mut steps: Vec<Step> = Vec::new();
        let mut pending: Vec<(usize, &RTerm)> = Vec::new();
        for item in &items {
            let mut consumed = false;
            while !consumed {
                let sz = self.zonk(&sigma, &Kind::Star);
                match sz {
                    NormalType::Forall(k, body) => {
                        if let Item::Ty(sty) = item {
                            let (arg, _) = self.elab_embedded_type(sty, Some(&k))?;
                            sigma = self.instantiate_forall(&body, &arg);
                            steps.push(Step::Ty(arg, k.clone()));
                            consumed = true;
                        } else {
                            let m = self.fresh_meta(k.clone());
                            sigma = self.instantiate_forall(&body, &m);
                            steps.push(Step::Ty(m, k.clone()));
                        }
                    }
                    NormalType::Qual(p, body) => {
                        let hole = self.new_goal((*p).clone());
                        steps.push(Step::Ev(hole));
                        sigma = *body;
                    }
                    NormalType::Arrow(dom, cod) => match item {
                        Item::Tm(arg) => {
                            steps.push(Step::Tm((*dom).clone(), None));
                            pending.push((steps.len() - 1, arg));
                            sigma = *cod;
                            consumed = true;
                        }
                        Item::Ty(_) => {
                            return terr("unexpected type application to a function")
                        }
                    },
                    other => {
                        if as_bare_meta(&other, &Kind::Star).is_some() {
                            // An application head whose type is still a
                            // metavariable: earlier arguments and predicate
                            // goals may determine it (the polymorphic
                            // result of a selection, for instance), so
                            // check what is pending and attempt the goals
                            // before forcing an arrow.
                            for (idx, arg) in &pending {
                                let done = matches!(&steps[*idx], Step::Tm(_, Some(_)));
                                if done {
                                    continue;
                                }
                                let dom = match &steps[*idx] {
                                    Step::Tm(d, _) => d.clone(),
                                    _ => unreachable!(),
                                };
                                let dom = self.zonk(&dom, &Kind::Star);
                                let elab = self.check(arg, &dom)?;
                                match &mut steps[*idx] {
                                    Step::Tm(_, slot) => *slot = Some(elab),
                                    _ => unreachable!(),
                                }
                            }
                            self.attempt_goals();
                            let z2 = self.zonk(&other, &Kind::Star);
                            if as_bare_meta(&z2, &Kind::Star).is_some() {
                                let dom = self.fresh_meta(Kind::Star);
                                let cod = self.fresh_meta(Kind::Star);
                                let arrow = NormalType::Arrow(Box::new(dom), Box::new(cod));
                                self.unify_or_defer(&z2, &arrow, &Kind::Star)?;
                                sigma = arrow;
                            } else {
                                sigma = z2;
                            }
                        } else {
                            return terr(format!(
                                "cannot apply a term of type {} (head {:?}, {} items)",
                                crate::pretty::normal_type(&other),
                                head,
                                items.len()
                            ));
                        }
                    }
                }
            }
        }

        // Unify the result with the expectation, instantiating any leading
        // prefix the expectation does not share.
        if let Some(exp) = expected {
            loop {
                let sz = self.zonk(&sigma, &Kind::Star);
                let ez = self.zonk(exp, &Kind::Star);
                match (&sz, &ez) {
                    (NormalType::Forall(k, body), e)
                        if !matches!(e, NormalType::Forall(_, _))
                            && as_bare_meta(e, &Kind::Star).is_none() =>
                    {
                        let m = self.fresh_meta(k.clone());
                        sigma = self.instantiate_forall(body, &m);
                        steps.push(Step::Ty(m, k.clone()));
                    }
                    (NormalType::Qual(p, body), e)
                        if !matches!(e, NormalType::Qual(_, _))
                            && as_bare_meta(e, &Kind::Star).is_none() =>
                    {
                        let hole = self.new_goal((**p).clone());
                        steps.push(Step::Ev(hole));
                        sigma = (**body).clone();
                    }
                    _ => break,
                }
            }
            self.unify_or_defer(&sigma, exp, &Kind::Star)?;
        }

        // Check the recorded term arguments left to right (skipping any
        // already checked while unblocking the spine).
        for (idx, arg) in pending {
            if matches!(&steps[idx], Step::Tm(_, Some(_))) {
                continue;
            }
            let dom = match &steps[idx] {
                Step::Tm(d, _) => d.clone(),
                _ => unreachable!(),
            };
            let dom = self.zonk(&dom, &Kind::Star);
            let elab = self.check(arg, &dom)?;
            match &mut steps[idx] {
                Step::Tm(_, slot) => *slot = Some(elab),
                _ => unreachable!(),
            }
        }

        // Rebuild the elaborated spine.
        let mut elab = head_elab;
        for step in steps {
            elab = match step {
                Step::Ty(ty, k) => Term::TyApp(Box::new(elab), ty, k),
                Step::Ev(h) => Term::EvApp(Box::new(elab), Evidence::Hole(h)),
                Step::Tm(_, slot) => Term::app(elab, slot.expect("argument checked")),
            };
        }

        Ok((elab, sigma))
    }

    // -----------------------------------------------------------------
    // Goal solving and zonking.

    /// One quiet pass over the unsolved goals; failures are left for the
    /// final worklist.
    fn attempt_goals(&mut self) {
        for i in 0..self.goals.len() {
            if self.goals[i].solved {
                continue;
            }
            let pred = self.goals[i].pred.clone();
            let delta = self.goals[i].delta.clone();
            let phi = self.goals[i].phi.clone();
            let mut ctx = GoalCtx { metas: &mut self.metas, delta };
            if let Ok(ev) = entail::solve(&mut ctx, &phi, &pred, &self.entail_cfg) {
                if std::env::var("ROME_DEBUG_GOALS").is_ok() {
                    let z = norm::renormalize_pred(&self.metas, &self.goals[i].delta, &pred);
                    eprintln!(
                        "attempt solved: {} by {}",
                        crate::pretty::normal_pred(&z),
                        crate::pretty::evidence(&ev)
                    );
                }
                self.holes.insert(self.goals[i].hole, ev);
                self.goals[i].solved = true;
            }
        }
    }

    fn solve_goals(&mut self) -> Result<(), TypeError> {
        loop {
            let mut progress = false;
            for i in 0..self.goals.len() {
                if self.goals[i].solved {
                    continue;
                }
                let pred = self.goals[i].pred.clone();
                let delta = self.goals[i].delta.clone();
                let phi = self.goals[i].phi.clone();
                let mut ctx = GoalCtx { metas: &mut self.metas, delta };
                match entail::solve(&mut ctx, &phi, &pred, &self.entail_cfg) {
                    Ok(ev) => {
                        self.holes.insert(self.goals[i].hole, ev);
                        self.goals[i].solved = true;
                        progress = true;
                    }
                    Err(SolveFailure::NotYet) => {}
                    Err(e @ SolveFailure::Unsolvable { .. }) => {
                        return terr(e.to_string());
                    }
                }
            }
            // Retry deferred equations.
            let deferred = std::mem::take(&mut self.deferred);
            for eq in deferred {
                let mut delta = eq.delta.clone();
                match (Unifier { metas: &mut self.metas }).unify(&mut delta, &eq.a, &eq.b, &eq.kind)
                {
                    Unify::Ok => progress = true,
                    Unify::Postpone => self.deferred.push(eq),
                    Unify::Fail(msg) => return terr(msg),
                }
            }
            if !progress {
                break;
            }
        }
        if let Some(goal) = self.goals.iter().find(|g| !g.solved) {
            let pred = norm::renormalize_pred(&self.metas, &goal.delta, &goal.pred);
            if std::env::var("ROME_DEBUG_GOALS").is_ok() {
                eprintln!("--- unsolved goal: {}", crate::pretty::normal_pred(&pred));
                eprintln!("    delta: {:?}", goal.delta.iter().map(crate::pretty::kind).collect::<Vec<_>>());
                for (i, p) in goal.phi.iter().enumerate() {
                    eprintln!("    phi[{}]: {}", i, crate::pretty::normal_pred(p));
                }
            }
            return terr(format!(
                "unsolved predicate {} (add an explicit type application)",
                crate::pretty::normal_pred(&pred)
            ));
        }
        if let Some(eq) = self.deferred.first() {
            let a = norm::renormalize(&self.metas, &eq.delta, &eq.a, &eq.kind);
            let b = norm::renormalize(&self.metas, &eq.delta, &eq.b, &eq.kind);
            return terr(format!(
                "ambiguous instantiation: cannot decide {} = {} (add an explicit type application)",
                crate::pretty::normal_type(&a),
                crate::pretty::normal_type(&b)
            ));
        }
        Ok(())
    }

    fn zonk_evidence(&self, q: &Evidence, delta: &[Kind]) -> Result<Evidence, TypeError> {
        let zt = |t: &NormalType, elem: &Kind| -> Result<NormalType, TypeError> {
            let z = norm::renormalize(&self.metas, delta, t, &Kind::row(elem.clone()));
            if z.contains_meta() {
                return terr("ambiguous type in evidence (add an explicit type application)");
            }
            Ok(z)
        };
        let zp = |p: &NormalPred| -> Result<NormalPred, TypeError> {
            let z = norm::renormalize_pred(&self.metas, delta, p);
            if z.components().iter().any(|t| t.contains_meta()) {
                return terr("ambiguous predicate in evidence");
            }
            Ok(z)
        };
        Ok(match q {
            Evidence::Var(_) | Evidence::Incl(_) | Evidence::Comb(_, _) => q.clone(),
            Evidence::Hole(h) => {
                let ev = self
                    .holes
                    .get(h)
                    .ok_or_else(|| TypeError("unsolved evidence hole".into()))?
                    .clone();
                self.zonk_evidence(&ev, delta)?
            }
            Evidence::Trans(a, b, mid, k) => Evidence::Trans(
                Box::new(self.zonk_evidence(a, delta)?),
                Box::new(self.zonk_evidence(b, delta)?),
                zt(mid, k)?,
                k.clone(),
            ),
            Evidence::LeqRefl(r, k) => Evidence::LeqRefl(zt(r, k)?, k.clone()),
            Evidence::LeqMap { f, cod, inner_pred, inner } => {
                let ip = zp(inner_pred)?;
                let fz = norm::renormalize(
                    &self.metas,
                    delta,
                    f,
                    &Kind::arrow(ip.kind().clone(), cod.clone()),
                );
                Evidence::LeqMap {
                    f: fz,
                    cod: cod.clone(),
                    inner_pred: Box::new(ip),
                    inner: Box::new(self.zonk_evidence(inner, delta)?),
                }
            }
            Evidence::PlusL(a, r, k) => Evidence::PlusL(
                Box::new(self.zonk_evidence(a, delta)?),
                zt(r, k)?,
                k.clone(),
            ),
            Evidence::PlusR(a, l, k) => Evidence::PlusR(
                Box::new(self.zonk_evidence(a, delta)?),
                zt(l, k)?,
                k.clone(),
            ),
            Evidence::PlusEmptyL(r, k) => Evidence::PlusEmptyL(zt(r, k)?, k.clone()),
            Evidence::PlusEmptyR(r, k) => Evidence::PlusEmptyR(zt(r, k)?, k.clone()),
            Evidence::PlusMap { f, cod, inner_pred, inner } => {
                let ip = zp(inner_pred)?;
                let fz = norm::renormalize(
                    &self.metas,
                    delta,
                    f,
                    &Kind::arrow(ip.kind().clone(), cod.clone()),
                );
                Evidence::PlusMap {
                    f: fz,
                    cod: cod.clone(),
                    inner_pred: Box::new(ip),
                    inner: Box::new(self.zonk_evidence(inner, delta)?),
                }
            }
            Evidence::ComplL(a) => Evidence::ComplL(Box::new(self.zonk_evidence(a, delta)?)),
            Evidence::ComplR(a) => Evidence::ComplR(Box::new(self.zonk_evidence(a, delta)?)),
        })
    }

    fn zonk_term(&self, t: &Term, delta: &mut Vec<Kind>) -> Result<Term, TypeError> {
        let zt = |t: &NormalType, kind: &Kind, delta: &[Kind]| -> Result<NormalType, TypeError> {
            let z = norm::renormalize(&self.metas, delta, t, kind);
            if z.contains_meta() {
                return terr(
                    "ambiguous instantiation left in the term (add an explicit type application)",
                );
            }
            Ok(z)
        };
        Ok(match t {
            Term::Var(_) | Term::Global(_) | Term::Const(_) => t.clone(),
            Term::Lam(ty, b) => {
                Term::Lam(zt(ty, &Kind::Star, delta)?, Box::new(self.zonk_term(b, delta)?))
            }
            Term::App(f, a) => Term::app(self.zonk_term(f, delta)?, self.zonk_term(a, delta)?),
            Term::TyLam(k, b) => {
                delta.push(k.clone());
                let b = self.zonk_term(b, delta);
                delta.pop();
                Term::TyLam(k.clone(), Box::new(b?))
            }
            Term::TyApp(f, ty, k) => {
                Term::TyApp(Box::new(self.zonk_term(f, delta)?), zt(ty, k, delta)?, k.clone())
            }
            Term::EvLam(p, b) => {
                let zp = norm::renormalize_pred(&self.metas, delta, p);
                Term::EvLam(Box::new(zp), Box::new(self.zonk_term(b, delta)?))
            }
            Term::EvApp(f, q) => Term::EvApp(
                Box::new(self.zonk_term(f, delta)?),
                self.zonk_evidence(q, delta)?,
            ),
            Term::Sing(ty, k) => Term::Sing(zt(ty, k, delta)?, k.clone()),
            Term::Intro(fl, l, m, ann) => Term::Intro(
                *fl,
                Box::new(self.zonk_term(l, delta)?),
                Box::new(self.zonk_term(m, delta)?),
                zt(ann, &Kind::Star, delta)?,
            ),
            Term::Elim(fl, m, l) => Term::Elim(
                *fl,
                Box::new(self.zonk_term(m, delta)?),
                Box::new(self.zonk_term(l, delta)?),
            ),
            Term::RecordLit { row, fields } => Term::RecordLit {
                row: row
                    .iter()
                    .map(|(l, ty)| Ok((l.clone(), zt(ty, &Kind::Star, delta)?)))
                    .collect::<Result<_, TypeError>>()?,
                fields: fields
                    .iter()
                    .map(|f| self.zonk_term(f, delta))
                    .collect::<Result<_, _>>()?,
            },
            Term::VariantLit { row, tag, payload } => Term::VariantLit {
                row: row
                    .iter()
                    .map(|(l, ty)| Ok((l.clone(), zt(ty, &Kind::Star, delta)?)))
                    .collect::<Result<_, TypeError>>()?,
                tag: *tag,
                payload: Box::new(self.zonk_term(payload, delta)?),
            },
        })
    }

    /// Finish a declaration: solve goals, zonk, and reject leftovers.
    pub fn finish(&mut self, elab: Term, ty: NormalType) -> Result<(Term, NormalType), TypeError> {
        self.solve_goals()?;
        let term = self.zonk_term(&elab, &mut Vec::new())?;
        let ty = norm::renormalize(&self.metas, &[], &ty, &Kind::Star);
        if ty.contains_meta() {
            return terr("ambiguous type for declaration; add a signature");
        }
        Ok((term, ty))
    }
}

// ---------------------------------------------------------------------
// Checking whole declarations.

/// Check a definition against an optional signature scheme.
pub fn check_declaration(
    globals: &GlobalEnv,
    sig: Option<&NormalType>,
    body: &RTerm,
    cfg: EntailConfig,
) -> Result<(Term, NormalType), TypeError> {
    let mut ck = Checker::new(globals, cfg);
    match sig {
        Some(scheme) => {
            let elab = ck.check(body, scheme)?;
            ck.finish(elab, scheme.clone())
        }
        None => {
            let (elab, ty) = ck.infer(body)?;
            ck.finish(elab, ty)
        }
    }
}

// ---------------------------------------------------------------------
// No-inference re-checking of elaborated terms (the typing rules read
// literally; every node is fully annotated).

pub fn recheck(globals: &GlobalEnv, ctxs: &mut Contexts, t: &Term) -> Result<NormalType, String> {
    match t {
        Term::Var(i) => ctxs
            .lookup_type(*i)
            .cloned()
            .ok_or_else(|| "unbound term variable".to_string()),
        Term::Global(g) => globals
            .terms
            .get(*g)
            .and_then(|t| t.scheme.clone())
            .ok_or_else(|| "unknown global".to_string()),
        Term::Const(c) => {
            if matches!(c, Const::Syn | Const::Ana) {
                return Err(format!("bare {} cannot be re-checked", c.name()));
            }
            let globals_empty = GlobalEnv::new();
            let ck = Checker::new(&globals_empty, EntailConfig::default());
            Ok(ck.const_scheme(*c, &Kind::Star))
        }
        Term::Lam(ty, b) => {
            let mut ks = KindState::new();
            kind::elaborate_type(&mut ctxs.delta.clone(), &norm::embed(ty), Some(&Kind::Star), &mut ks)
                .map_err(|e| format!("lambda annotation: {}", e))?;
            ctxs.gamma.push(ty.clone());
            let cod = recheck(globals, ctxs, b);
            ctxs.gamma.pop();
            Ok(NormalType::Arrow(Box::new(ty.clone()), Box::new(cod?)))
        }
        Term::App(f, a) => {
            let ft = recheck(globals, ctxs, f)?;
            let at = recheck(globals, ctxs, a)?;
            match ft {
                NormalType::Arrow(dom, cod) => {
                    if *dom != at {
                        return Err(format!(
                            "argument type {} does not match domain {}",
                            crate::pretty::normal_type(&at),
                            crate::pretty::normal_type(&dom)
                        ));
                    }
                    Ok(*cod)
                }
                other => Err(format!(
                    "application of non-function type {}",
                    crate::pretty::normal_type(&other)
                )),
            }
        }
        Term::TyLam(k, b) => {
            ctxs.delta.push(k.clone());
            for p in &mut ctxs.phi {
                *p = shift_normal_pred(p, 0, 1);
            }
            for t in &mut ctxs.gamma {
                *t = shift_normal(t, 0, 1);
            }
            let body = recheck(globals, ctxs, b);
            ctxs.delta.pop();
            for p in &mut ctxs.phi {
                *p = shift_normal_pred(p, 0, -1);
            }
            for t in &mut ctxs.gamma {
                *t = shift_normal(t, 0, -1);
            }
            Ok(NormalType::Forall(k.clone(), Box::new(body?)))
        }
        Term::TyApp(f, ty, k) => {
            // Saturated syn/ana spines carry the kind index in their first
            // type argument's kind annotation.
            let ft = match &**f {
                Term::Const(c @ (Const::Syn | Const::Ana)) => {
                    let kappa = match k {
                        Kind::Arrow(dom, cod) if **cod == Kind::Star => (**dom).clone(),
                        _ => return Err(format!("bare {} cannot be re-checked", c.name())),
                    };
                    let globals_empty = GlobalEnv::new();
                    let ck = Checker::new(&globals_empty, EntailConfig::default());
                    ck.const_scheme(*c, &kappa)
                }
                _ => recheck(globals, ctxs, f)?,
            };
            let mut ks = KindState::new();
            kind::elaborate_type(&mut ctxs.delta.clone(), &norm::embed(ty), Some(k), &mut ks)
                .map_err(|e| format!("type argument: {}", e))?;
            match ft {
                NormalType::Forall(bk, body) => {
                    if bk != *k {
                        return Err("type application at wrong kind".into());
                    }
                    let arg = norm::eval_normal(&norm::NoMetas, &ctxs.delta, ty);
                    Ok(norm::instantiate_normal(
                        &norm::NoMetas,
                        &ctxs.delta,
                        &body,
                        &Kind::Star,
                        arg,
                    ))
                }
                other => Err(format!(
                    "type application to non-polymorphic type {}",
                    crate::pretty::normal_type(&other)
                )),
            }
        }
        Term::EvLam(p, b) => {
            ctxs.phi.push((**p).clone());
            let body = recheck(globals, ctxs, b);
            ctxs.phi.pop();
            Ok(NormalType::Qual(p.clone(), Box::new(body?)))
        }
        Term::EvApp(f, q) => {
            let ft = recheck(globals, ctxs, f)?;
            match ft {
                NormalType::Qual(p, body) => {
                    entail::check_evidence(&ctxs.delta, &ctxs.phi, q, &p)?;
                    Ok(*body)
                }
                other => Err(format!(
                    "evidence application to non-qualified type {}",
                    crate::pretty::normal_type(&other)
                )),
            }
        }
        Term::Sing(ty, k) => {
            let mut ks = KindState::new();
            kind::elaborate_type(&mut ctxs.delta.clone(), &norm::embed(ty), Some(k), &mut ks)
                .map_err(|e| format!("singleton annotation: {}", e))?;
            Ok(NormalType::Sing(Box::new(ty.clone()), k.clone()))
        }
        Term::Intro(fl, l, m, ann) => {
            let lt = recheck(globals, ctxs, l)?;
            let mt = recheck(globals, ctxs, m)?;
            if mt != *ann {
                return Err("intro payload type does not match annotation".into());
            }
            let xi = match lt {
                NormalType::Sing(inner, Kind::Label) => *inner,
                other => {
                    return Err(format!(
                        "intro label has non-singleton type {}",
                        crate::pretty::normal_type(&other)
                    ))
                }
            };
            let row = match xi {
                NormalType::Label(lab) => NormalType::Row(vec![(lab, mt)]),
                NormalType::Neutral(n) => NormalType::LabeledSingleton(n, Box::new(mt)),
                other => {
                    return Err(format!(
                        "invalid label type {}",
                        crate::pretty::normal_type(&other)
                    ))
                }
            };
            Ok(match fl {
                Flavor::Record => NormalType::Pi(Box::new(row)),
                Flavor::Variant => NormalType::Sigma(Box::new(row)),
            })
        }
        Term::Elim(fl, m, l) => {
            let mt = recheck(globals, ctxs, m)?;
            let lt = recheck(globals, ctxs, l)?;
            let row = match (fl, mt) {
                (Flavor::Record, NormalType::Pi(r)) => *r,
                (Flavor::Variant, NormalType::Sigma(r)) => *r,
                (_, other) => {
                    return Err(format!(
                        "elimination flavor does not match type {}",
                        crate::pretty::normal_type(&other)
                    ))
                }
            };
            let xi = match lt {
                NormalType::Sing(inner, Kind::Label) => *inner,
                _ => return Err("elimination label has non-singleton type".into()),
            };
            match (row, xi) {
                (NormalType::Row(es), NormalType::Label(lab)) if es.len() == 1 => {
                    if es[0].0 != lab {
                        return Err("elimination label does not match row".into());
                    }
                    Ok(es[0].1.clone())
                }
                (NormalType::LabeledSingleton(n, tau), NormalType::Neutral(n2)) => {
                    if n != n2 {
                        return Err("elimination label does not match row".into());
                    }
                    Ok(*tau)
                }
                _ => Err("elimination of a non-singleton row".into()),
            }
        }
        Term::RecordLit { row, fields } => {
            if row.len() != fields.len() {
                return Err("record literal arity mismatch".into());
            }
            for ((l, ty), f) in row.iter().zip(fields.iter()) {
                let ft = recheck(globals, ctxs, f)?;
                if ft != *ty {
                    return Err(format!("record field {} has wrong type", l));
                }
            }
            Ok(NormalType::Pi(Box::new(NormalType::Row(row.clone()))))
        }
        Term::VariantLit { row, tag, payload } => {
            let (_, ty) = row
                .get(*tag)
                .ok_or_else(|| "variant tag out of range".to_string())?;
            let pt = recheck(globals, ctxs, payload)?;
            if pt != *ty {
                return Err("variant payload has wrong type".into());
            }
            Ok(NormalType::Sigma(Box::new(NormalType::Row(row.clone()))))
        }
    }
}
