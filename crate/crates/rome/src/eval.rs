//! Small-step operational semantics.
//!
//! Call-by-name beta reduction with strict constant spines: applications
//! reduce their function position, while arguments are only evaluated
//! inside the spine of a fully applied constant (`S E` contexts). Record
//! fields evaluate left to right, variant payloads and label intro/elim
//! positions evaluate in place. Evidence arguments in spines reduce to
//! `incl`/`comb` values before the constant's delta rule fires. Type
//! arguments are already normal by construction, and type substitution
//! renormalizes every annotation it touches, so they stay normal.

use std::fmt;

use crate::entail::{self, pick, Picked};
use crate::norm;
use crate::resolve::GlobalEnv;
use crate::syntax::*;

#[derive(Debug, Clone)]
pub enum EvalError {
    OutOfFuel,
    Stuck(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            EvalError::OutOfFuel => write!(f, "out of fuel"),
            EvalError::Stuck(msg) => write!(f, "stuck term (internal error): {}", msg),
        }
    }
}

impl std::error::Error for EvalError {}

fn stuck<T>(msg: impl Into<String>) -> Result<T, EvalError> {
    Err(EvalError::Stuck(msg.into()))
}

// ---------------------------------------------------------------------
// Spine analysis.

#[derive(Debug, Clone)]
enum SpineItem {
    Ty(NormalType, Kind),
    Ev(Evidence),
    Tm(Term),
}

struct Spine {
    head: Const,
    items: Vec<SpineItem>,
}

impl Spine {
    fn rebuild(&self) -> Term {
        let mut t = Term::Const(self.head);
        for item in &self.items {
            t = match item {
                SpineItem::Ty(ty, k) => Term::TyApp(Box::new(t), ty.clone(), k.clone()),
                SpineItem::Ev(q) => Term::EvApp(Box::new(t), q.clone()),
                SpineItem::Tm(m) => Term::app(t, m.clone()),
            };
        }
        t
    }

    fn ty_args(&self) -> Vec<(&NormalType, &Kind)> {
        self.items
            .iter()
            .filter_map(|i| match i {
                SpineItem::Ty(t, k) => Some((t, k)),
                _ => None,
            })
            .collect()
    }

    fn ev_args(&self) -> Vec<&Evidence> {
        self.items
            .iter()
            .filter_map(|i| match i {
                SpineItem::Ev(q) => Some(q),
                _ => None,
            })
            .collect()
    }

    fn tm_args(&self) -> Vec<&Term> {
        self.items
            .iter()
            .filter_map(|i| match i {
                SpineItem::Tm(m) => Some(m),
                _ => None,
            })
            .collect()
    }
}

fn flatten_spine(t: &Term) -> Option<Spine> {
    let mut items = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            Term::App(f, a) => {
                items.push(SpineItem::Tm((**a).clone()));
                cur = f;
            }
            Term::TyApp(f, ty, k) => {
                items.push(SpineItem::Ty(ty.clone(), k.clone()));
                cur = f;
            }
            Term::EvApp(f, q) => {
                items.push(SpineItem::Ev(q.clone()));
                cur = f;
            }
            Term::Const(c) => {
                items.reverse();
                return Some(Spine { head: *c, items });
            }
            _ => return None,
        }
    }
}

/// A fully applied constant spine (term arguments match the arity).
fn full_spine(t: &Term) -> Option<Spine> {
    let s = flatten_spine(t)?;
    if s.tm_args().len() == s.head.term_arity() {
        Some(s)
    } else {
        None
    }
}

pub fn is_value(t: &Term) -> bool {
    match t {
        Term::Lam(_, _) | Term::TyLam(_, _) | Term::EvLam(_, _) | Term::Sing(_, _) => true,
        Term::RecordLit { fields, .. } => fields.iter().all(is_value),
        Term::VariantLit { payload, .. } => is_value(payload),
        Term::App(_, _) => {
            // Only a saturated `in` spine with value arguments is a value.
            let mut tm_args = 0usize;
            let mut cur = t;
            loop {
                match cur {
                    Term::App(f, a) => {
                        if !is_value(a) {
                            return false;
                        }
                        tm_args += 1;
                        cur = f;
                    }
                    Term::TyApp(f, _, _) => cur = f,
                    Term::EvApp(f, q) => {
                        if !q.is_value() {
                            return false;
                        }
                        cur = f;
                    }
                    Term::Const(Const::In) => return tm_args == 1,
                    _ => return false,
                }
            }
        }
        _ => false,
    }
}

// ---------------------------------------------------------------------
// Substitution of types and evidence into terms.

/// Substitute closed normal `arg` (at kind `k`) for type variable `j`
/// throughout a term, renormalizing every annotation. `ambient` collects
/// the kinds of enclosing type binders below the substitution point.
/// Does the normal type mention free variable `j`?
fn mentions_var(t: &NormalType, j: usize) -> bool {
    fn neu(n: &Neutral, j: usize) -> bool {
        matches!(n.head, Head::Var(ix) if ix == j) || n.args.iter().any(|a| go(a, j))
    }
    fn go(t: &NormalType, j: usize) -> bool {
        match t {
            NormalType::Neutral(n) => neu(n, j),
            NormalType::Arrow(a, b) | NormalType::Compl(a, b) => go(a, j) || go(b, j),
            NormalType::Forall(_, b) | NormalType::Lam(_, b) => go(b, j + 1),
            NormalType::Qual(p, b) => {
                p.components().iter().any(|c| go(c, j)) || go(b, j)
            }
            NormalType::Mu(b) | NormalType::Pi(b) | NormalType::Sigma(b) => go(b, j),
            NormalType::Row(es) => es.iter().any(|(_, t)| go(t, j)),
            NormalType::LabeledSingleton(n, t) => neu(n, j) || go(t, j),
            NormalType::Map(f, n) => go(f, j) || neu(n, j),
            NormalType::Label(_) => false,
            NormalType::Sing(t, _) => go(t, j),
        }
    }
    go(t, j)
}

fn subst_ty_term(
    t: &Term,
    j: usize,
    arg: &NormalType,
    arg_kind: &Kind,
    ambient: &mut Vec<Kind>,
) -> Term {
    let subst_nf = |ann: &NormalType, kind: &Kind, ambient: &[Kind]| -> NormalType {
        if !mentions_var(ann, j) {
            // Only the indices above j move; no redexes can appear.
            return shift_normal(ann, j, -1);
        }
        let core = subst_type_at(&norm::embed(ann), j, &norm::embed(arg));
        norm::normalize(&norm::NoMetas, ambient, &core, kind)
    };
    let subst_pred = |p: &NormalPred, ambient: &[Kind]| -> NormalPred {
        let core = crate::syntax::subst_pred_at(&norm::embed_pred(p), j, &norm::embed(arg));
        norm::normalize_pred(&norm::NoMetas, ambient, &core)
    };
    fn subst_row(
        row: &[(Label, NormalType)],
        j: usize,
        arg: &NormalType,
        ambient: &[Kind],
    ) -> Vec<(Label, NormalType)> {
        row.iter()
            .map(|(l, ty)| {
                if !mentions_var(ty, j) {
                    return (l.clone(), shift_normal(ty, j, -1));
                }
                let core = subst_type_at(&norm::embed(ty), j, &norm::embed(arg));
                (
                    l.clone(),
                    norm::normalize(&norm::NoMetas, ambient, &core, &Kind::Star),
                )
            })
            .collect()
    }
    fn subst_ev(
        q: &Evidence,
        j: usize,
        arg: &NormalType,
        ambient: &[Kind],
    ) -> Evidence {
        let snf = |ann: &NormalType, elem: &Kind| -> NormalType {
            if !mentions_var(ann, j) {
                return shift_normal(ann, j, -1);
            }
            let core = subst_type_at(&norm::embed(ann), j, &norm::embed(arg));
            norm::normalize(&norm::NoMetas, ambient, &core, &Kind::row(elem.clone()))
        };
        let spred = |p: &NormalPred| -> NormalPred {
            let core = crate::syntax::subst_pred_at(&norm::embed_pred(p), j, &norm::embed(arg));
            norm::normalize_pred(&norm::NoMetas, ambient, &core)
        };
        match q {
            Evidence::Var(_) | Evidence::Incl(_) | Evidence::Comb(_, _) | Evidence::Hole(_) => {
                q.clone()
            }
            Evidence::Trans(a, b, mid, k) => Evidence::Trans(
                Box::new(subst_ev(a, j, arg, ambient)),
                Box::new(subst_ev(b, j, arg, ambient)),
                snf(mid, k),
                k.clone(),
            ),
            Evidence::LeqRefl(r, k) => Evidence::LeqRefl(snf(r, k), k.clone()),
            Evidence::LeqMap { f, cod, inner_pred, inner } => {
                let ip = spred(inner_pred);
                let fcore = subst_type_at(&norm::embed(f), j, &norm::embed(arg));
                let fk = Kind::arrow(ip.kind().clone(), cod.clone());
                Evidence::LeqMap {
                    f: norm::normalize(&norm::NoMetas, ambient, &fcore, &fk),
                    cod: cod.clone(),
                    inner_pred: Box::new(ip),
                    inner: Box::new(subst_ev(inner, j, arg, ambient)),
                }
            }
            Evidence::PlusL(a, r, k) => Evidence::PlusL(
                Box::new(subst_ev(a, j, arg, ambient)),
                snf(r, k),
                k.clone(),
            ),
            Evidence::PlusR(a, l, k) => Evidence::PlusR(
                Box::new(subst_ev(a, j, arg, ambient)),
                snf(l, k),
                k.clone(),
            ),
            Evidence::PlusEmptyL(r, k) => Evidence::PlusEmptyL(snf(r, k), k.clone()),
            Evidence::PlusEmptyR(r, k) => Evidence::PlusEmptyR(snf(r, k), k.clone()),
            Evidence::PlusMap { f, cod, inner_pred, inner } => {
                let ip = spred(inner_pred);
                let fcore = subst_type_at(&norm::embed(f), j, &norm::embed(arg));
                let fk = Kind::arrow(ip.kind().clone(), cod.clone());
                Evidence::PlusMap {
                    f: norm::normalize(&norm::NoMetas, ambient, &fcore, &fk),
                    cod: cod.clone(),
                    inner_pred: Box::new(ip),
                    inner: Box::new(subst_ev(inner, j, arg, ambient)),
                }
            }
            Evidence::ComplL(a) => Evidence::ComplL(Box::new(subst_ev(a, j, arg, ambient))),
            Evidence::ComplR(a) => Evidence::ComplR(Box::new(subst_ev(a, j, arg, ambient))),
        }
    }

    match t {
        Term::Var(_) | Term::Global(_) | Term::Const(_) => t.clone(),
        Term::Lam(ty, b) => Term::Lam(
            subst_nf(ty, &Kind::Star, ambient),
            Box::new(subst_ty_term(b, j, arg, arg_kind, ambient)),
        ),
        Term::App(f, a) => Term::app(
            subst_ty_term(f, j, arg, arg_kind, ambient),
            subst_ty_term(a, j, arg, arg_kind, ambient),
        ),
        Term::TyLam(k, b) => {
            ambient.push(k.clone());
            let b = subst_ty_term(b, j + 1, arg, arg_kind, ambient);
            ambient.pop();
            Term::TyLam(k.clone(), Box::new(b))
        }
        Term::TyApp(f, ty, k) => Term::TyApp(
            Box::new(subst_ty_term(f, j, arg, arg_kind, ambient)),
            subst_nf(ty, k, ambient),
            k.clone(),
        ),
        Term::EvLam(p, b) => Term::EvLam(
            Box::new(subst_pred(p, ambient)),
            Box::new(subst_ty_term(b, j, arg, arg_kind, ambient)),
        ),
        Term::EvApp(f, q) => Term::EvApp(
            Box::new(subst_ty_term(f, j, arg, arg_kind, ambient)),
            subst_ev(q, j, arg, ambient),
        ),
        Term::Sing(ty, k) => Term::Sing(subst_nf(ty, k, ambient), k.clone()),
        Term::Intro(fl, l, m, ann) => Term::Intro(
            *fl,
            Box::new(subst_ty_term(l, j, arg, arg_kind, ambient)),
            Box::new(subst_ty_term(m, j, arg, arg_kind, ambient)),
            subst_nf(ann, &Kind::Star, ambient),
        ),
        Term::Elim(fl, m, l) => Term::Elim(
            *fl,
            Box::new(subst_ty_term(m, j, arg, arg_kind, ambient)),
            Box::new(subst_ty_term(l, j, arg, arg_kind, ambient)),
        ),
        Term::RecordLit { row, fields } => Term::RecordLit {
            row: subst_row(row, j, arg, ambient),
            fields: fields
                .iter()
                .map(|f| subst_ty_term(f, j, arg, arg_kind, ambient))
                .collect(),
        },
        Term::VariantLit { row, tag, payload } => Term::VariantLit {
            row: subst_row(row, j, arg, ambient),
            tag: *tag,
            payload: Box::new(subst_ty_term(payload, j, arg, arg_kind, ambient)),
        },
    }
}

/// Substitute evidence `q` for evidence variable `j` in a term.
fn subst_ev_term(t: &Term, j: usize, q: &Evidence) -> Term {
    fn in_ev(e: &Evidence, j: usize, q: &Evidence) -> Evidence {
        match e {
            Evidence::Var(i) => {
                if *i == j {
                    q.clone()
                } else if *i > j {
                    Evidence::Var(i - 1)
                } else {
                    Evidence::Var(*i)
                }
            }
            Evidence::Incl(_) | Evidence::Comb(_, _) | Evidence::Hole(_) => e.clone(),
            Evidence::Trans(a, b, mid, k) => Evidence::Trans(
                Box::new(in_ev(a, j, q)),
                Box::new(in_ev(b, j, q)),
                mid.clone(),
                k.clone(),
            ),
            Evidence::LeqRefl(_, _) | Evidence::PlusEmptyL(_, _) | Evidence::PlusEmptyR(_, _) => {
                e.clone()
            }
            Evidence::LeqMap { f, cod, inner_pred, inner } => Evidence::LeqMap {
                f: f.clone(),
                cod: cod.clone(),
                inner_pred: inner_pred.clone(),
                inner: Box::new(in_ev(inner, j, q)),
            },
            Evidence::PlusL(a, r, k) => {
                Evidence::PlusL(Box::new(in_ev(a, j, q)), r.clone(), k.clone())
            }
            Evidence::PlusR(a, l, k) => {
                Evidence::PlusR(Box::new(in_ev(a, j, q)), l.clone(), k.clone())
            }
            Evidence::PlusMap { f, cod, inner_pred, inner } => Evidence::PlusMap {
                f: f.clone(),
                cod: cod.clone(),
                inner_pred: inner_pred.clone(),
                inner: Box::new(in_ev(inner, j, q)),
            },
            Evidence::ComplL(a) => Evidence::ComplL(Box::new(in_ev(a, j, q))),
            Evidence::ComplR(a) => Evidence::ComplR(Box::new(in_ev(a, j, q))),
        }
    }
    match t {
        Term::Var(_) | Term::Global(_) | Term::Const(_) | Term::Sing(_, _) => t.clone(),
        Term::Lam(ty, b) => Term::Lam(ty.clone(), Box::new(subst_ev_term(b, j, q))),
        Term::App(f, a) => Term::app(subst_ev_term(f, j, q), subst_ev_term(a, j, q)),
        Term::TyLam(k, b) => Term::TyLam(k.clone(), Box::new(subst_ev_term(b, j, q))),
        Term::TyApp(f, ty, k) => {
            Term::TyApp(Box::new(subst_ev_term(f, j, q)), ty.clone(), k.clone())
        }
        Term::EvLam(p, b) => Term::EvLam(p.clone(), Box::new(subst_ev_term(b, j + 1, q))),
        Term::EvApp(f, e) => Term::EvApp(Box::new(subst_ev_term(f, j, q)), in_ev(e, j, q)),
        Term::Intro(fl, l, m, ann) => Term::Intro(
            *fl,
            Box::new(subst_ev_term(l, j, q)),
            Box::new(subst_ev_term(m, j, q)),
            ann.clone(),
        ),
        Term::Elim(fl, m, l) => Term::Elim(
            *fl,
            Box::new(subst_ev_term(m, j, q)),
            Box::new(subst_ev_term(l, j, q)),
        ),
        Term::RecordLit { row, fields } => Term::RecordLit {
            row: row.clone(),
            fields: fields.iter().map(|f| subst_ev_term(f, j, q)).collect(),
        },
        Term::VariantLit { row, tag, payload } => Term::VariantLit {
            row: row.clone(),
            tag: *tag,
            payload: Box::new(subst_ev_term(payload, j, q)),
        },
    }
}

// ---------------------------------------------------------------------
// Stepping.

/// Predicate proved by the evidence argument of a constant spine, read off
/// the constant and its type arguments.
fn spine_pred(s: &Spine) -> Result<NormalPred, EvalError> {
    let tys = s.ty_args();
    match s.head {
        Const::Prj | Const::Inj => {
            if tys.len() != 2 {
                return stuck("constant spine with missing type arguments");
            }
            Ok(NormalPred::Leq {
                lhs: tys[0].0.clone(),
                rhs: tys[1].0.clone(),
                kind: Kind::Star,
            })
        }
        Const::Concat | Const::Branch => {
            if tys.len() < 3 {
                return stuck("constant spine with missing type arguments");
            }
            Ok(NormalPred::Plus {
                left: tys[0].0.clone(),
                right: tys[1].0.clone(),
                total: tys[2].0.clone(),
                kind: Kind::Star,
            })
        }
        _ => stuck("constant has no evidence argument"),
    }
}

fn row_of(t: &NormalType) -> Result<Vec<(Label, NormalType)>, EvalError> {
    match t.as_row_lit() {
        Some(es) => Ok(es.to_vec()),
        None => stuck(format!(
            "non-literal row {} at runtime",
            crate::pretty::normal_type(t)
        )),
    }
}

fn step_spine(globals: &GlobalEnv, s: &Spine) -> Result<Option<(Term, &'static str)>, EvalError> {
    // Evidence arguments reduce first (rule xi-Q).
    let mut ev_positions = vec![];
    for (i, item) in s.items.iter().enumerate() {
        if let SpineItem::Ev(q) = item {
            ev_positions.push((i, q.clone()));
        }
    }
    for (i, q) in &ev_positions {
        if !q.is_value() {
            let pred = spine_pred(s)?;
            match entail::evidence_step(q, &pred) {
                Ok(Some((q2, rule))) => {
                    let mut items = s.items.clone();
                    items[*i] = SpineItem::Ev(q2);
                    return Ok(Some((
                        Spine { head: s.head, items }.rebuild(),
                        rule,
                    )));
                }
                Ok(None) => unreachable!("non-value evidence cannot be a value"),
                Err(e) => return stuck(e.to_string()),
            }
        }
    }
    // Term arguments reduce left to right (S E contexts).
    for (i, item) in s.items.iter().enumerate() {
        if let SpineItem::Tm(m) = item {
            if !is_value(m) {
                return match step(globals, m)? {
                    Some((m2, rule)) => {
                        let mut items = s.items.clone();
                        items[i] = SpineItem::Tm(m2);
                        Ok(Some((Spine { head: s.head, items }.rebuild(), rule)))
                    }
                    None => stuck("non-value argument does not step"),
                };
            }
        }
    }
    // Everything is a value: fire the constant's delta rule.
    delta_rule(s).map(Some)
}

fn delta_rule(s: &Spine) -> Result<(Term, &'static str), EvalError> {
    let tys = s.ty_args();
    let evs = s.ev_args();
    let tms = s.tm_args();
    match s.head {
        Const::Prj => {
            let y = row_of(tys[0].0)?;
            let p = match evs[0] {
                Evidence::Incl(p) => p,
                other => return stuck(format!("prj with non-inclusion {:?}", other)),
            };
            let fields = match tms[0] {
                Term::RecordLit { fields, .. } => fields,
                other => return stuck(format!("prj of non-record {:?}", other)),
            };
            let picked: Vec<Term> = (0..y.len()).map(|i| fields[p.get(i)].clone()).collect();
            Ok((Term::RecordLit { row: y, fields: picked }, "delta-prj"))
        }
        Const::Concat => {
            let z = row_of(tys[2].0)?;
            let (p, q) = match evs[0] {
                Evidence::Comb(p, q) => (p, q),
                other => return stuck(format!("concat with non-combination {:?}", other)),
            };
            let f1 = match tms[0] {
                Term::RecordLit { fields, .. } => fields,
                other => return stuck(format!("concat of non-record {:?}", other)),
            };
            let f2 = match tms[1] {
                Term::RecordLit { fields, .. } => fields,
                other => return stuck(format!("concat of non-record {:?}", other)),
            };
            let fields: Vec<Term> = (0..z.len())
                .map(|i| match pick(p, q, i) {
                    Picked::Left(j) => f1[j].clone(),
                    Picked::Right(j) => f2[j].clone(),
                })
                .collect();
            Ok((Term::RecordLit { row: z, fields }, "delta-concat"))
        }
        Const::Inj => {
            let z = row_of(tys[1].0)?;
            let p = match evs[0] {
                Evidence::Incl(p) => p,
                other => return stuck(format!("inj with non-inclusion {:?}", other)),
            };
            let (tag, payload) = match tms[0] {
                Term::VariantLit { tag, payload, .. } => (*tag, (**payload).clone()),
                other => return stuck(format!("inj of non-variant {:?}", other)),
            };
            Ok((
                Term::VariantLit { row: z, tag: p.get(tag), payload: Box::new(payload) },
                "delta-inj",
            ))
        }
        Const::Branch => {
            let x = row_of(tys[0].0)?;
            let y = row_of(tys[1].0)?;
            let (p, q) = match evs[0] {
                Evidence::Comb(p, q) => (p, q),
                other => return stuck(format!("branch with non-combination {:?}", other)),
            };
            let (tag, payload) = match tms[2] {
                Term::VariantLit { tag, payload, .. } => (*tag, (**payload).clone()),
                other => return stuck(format!("branch of non-variant {:?}", other)),
            };
            let stepped = match pick(p, q, tag) {
                Picked::Left(j) => Term::app(
                    tms[0].clone(),
                    Term::VariantLit { row: x, tag: j, payload: Box::new(payload) },
                ),
                Picked::Right(j) => Term::app(
                    tms[1].clone(),
                    Term::VariantLit { row: y, tag: j, payload: Box::new(payload) },
                ),
            };
            Ok((stepped, "delta-branch"))
        }
        Const::Syn => {
            // syn [f] [z] #f V over a literal z builds each field by
            // applying V at the entry's label, type, and inclusion.
            let (f_op, fk) = (tys[0].0.clone(), tys[0].1.clone());
            let z = row_of(tys[1].0)?;
            let kappa = match &fk {
                Kind::Arrow(dom, _) => (**dom).clone(),
                _ => return stuck("syn operator with non-arrow kind"),
            };
            let ann_row = norm::normalize(
                &norm::NoMetas,
                &[],
                &Type::MapApp(
                    Box::new(norm::embed(&f_op)),
                    Box::new(norm::embed(tys[1].0)),
                ),
                &Kind::row(Kind::Star),
            );
            let row = row_of(&ann_row)?;
            let body = tms[1];
            let fields: Vec<Term> = z
                .iter()
                .enumerate()
                .map(|(i, (l, tau))| {
                    let applied = Term::EvApp(
                        Box::new(Term::TyApp(
                            Box::new(Term::TyApp(
                                Box::new(body.clone()),
                                NormalType::Label(l.clone()),
                                Kind::Label,
                            )),
                            tau.clone(),
                            kappa.clone(),
                        )),
                        Evidence::Incl(IndexMap(vec![i])),
                    );
                    Term::app(
                        applied,
                        Term::Sing(NormalType::Label(l.clone()), Kind::Label),
                    )
                })
                .collect();
            Ok((Term::RecordLit { row, fields }, "delta-syn"))
        }
        Const::Ana => {
            let (f_op, fk) = (tys[0].0.clone(), tys[0].1.clone());
            let _ = f_op;
            let z = row_of(tys[1].0)?;
            let kappa = match &fk {
                Kind::Arrow(dom, _) => (**dom).clone(),
                _ => return stuck("ana operator with non-arrow kind"),
            };
            let (tag, payload) = match tms[2] {
                Term::VariantLit { tag, payload, .. } => (*tag, (**payload).clone()),
                other => return stuck(format!("ana of non-variant {:?}", other)),
            };
            let (l, tau) = &z[tag];
            let body = tms[1];
            let applied = Term::EvApp(
                Box::new(Term::TyApp(
                    Box::new(Term::TyApp(
                        Box::new(body.clone()),
                        NormalType::Label(l.clone()),
                        Kind::Label,
                    )),
                    tau.clone(),
                    kappa.clone(),
                )),
                Evidence::Incl(IndexMap(vec![tag])),
            );
            let applied = Term::app(
                applied,
                Term::Sing(NormalType::Label(l.clone()), Kind::Label),
            );
            Ok((Term::app(applied, payload), "delta-ana"))
        }
        Const::Out => {
            let inner = tms[0];
            match full_spine(inner) {
                Some(in_spine) if in_spine.head == Const::In => {
                    Ok((in_spine.tm_args()[0].clone(), "delta-mu"))
                }
                _ => stuck(format!(
                    "out of a non-in value: {:?}",
                    inner
                )),
            }
        }
        Const::Fix => {
            let f = tms[0].clone();
            Ok((Term::app(f, s.rebuild()), "delta-fix"))
        }
        Const::In => stuck("in is a value constructor"),
    }
}

/// One small step. `None` means the term is a value.
pub fn step(globals: &GlobalEnv, t: &Term) -> Result<Option<(Term, &'static str)>, EvalError> {
    if is_value(t) {
        return Ok(None);
    }
    match t {
        Term::Global(g) => match globals.terms.get(*g).and_then(|tg| tg.def.clone()) {
            Some(def) => Ok(Some((def, "delta-global"))),
            None => stuck(format!("global {} has no definition", g)),
        },
        Term::Var(_) => stuck("free term variable"),
        Term::Const(_) => stuck("bare constant"),
        Term::App(f, a) => {
            if let Some(s) = full_spine(t) {
                return step_spine(globals, &s);
            }
            if !is_value(f) {
                // A partial constant spine is not a value but steps inside
                // its arguments (S E); otherwise reduce the function.
                if let Some(s) = flatten_spine(f) {
                    let _ = s;
                    // fall through to stepping f as a term
                }
                return match step(globals, f)? {
                    Some((f2, rule)) => Ok(Some((Term::app(f2, (**a).clone()), rule))),
                    None => {
                        // f is a value after all (partial spine): step the
                        // argument per S E.
                        match step(globals, a)? {
                            Some((a2, rule)) => {
                                Ok(Some((Term::app((**f).clone(), a2), rule)))
                            }
                            None => stuck("application of a stuck partial spine"),
                        }
                    }
                };
            }
            match &**f {
                Term::Lam(_, body) => Ok(Some((subst_term(body, a), "beta"))),
                _ => {
                    // Partial constant spine with a non-value argument.
                    if flatten_spine(f).is_some() {
                        match step(globals, a)? {
                            Some((a2, rule)) => {
                                Ok(Some((Term::app((**f).clone(), a2), rule)))
                            }
                            None => stuck("partial constant spine is already saturated"),
                        }
                    } else {
                        stuck(format!("application of non-function value {:?}", f))
                    }
                }
            }
        }
        Term::TyApp(f, ty, k) => {
            if !is_value(f) {
                return match step(globals, f)? {
                    Some((f2, rule)) => {
                        Ok(Some((Term::TyApp(Box::new(f2), ty.clone(), k.clone()), rule)))
                    }
                    None => stuck("type application head does not step"),
                };
            }
            match &**f {
                Term::TyLam(_, body) => {
                    let mut ambient = Vec::new();
                    Ok(Some((
                        subst_ty_term(body, 0, ty, k, &mut ambient),
                        "beta-forall",
                    )))
                }
                _ => stuck("type application of a non-type-abstraction value"),
            }
        }
        Term::EvApp(f, q) => {
            if !is_value(f) {
                return match step(globals, f)? {
                    Some((f2, rule)) => Ok(Some((Term::EvApp(Box::new(f2), q.clone()), rule))),
                    None => stuck("evidence application head does not step"),
                };
            }
            match &**f {
                Term::EvLam(_, body) => Ok(Some((subst_ev_term(body, 0, q), "beta-pred"))),
                _ => stuck("evidence application of a non-evidence-abstraction value"),
            }
        }
        Term::Intro(fl, l, m, ann) => {
            if !is_value(l) {
                return match step(globals, l)? {
                    Some((l2, rule)) => Ok(Some((
                        Term::Intro(*fl, Box::new(l2), m.clone(), ann.clone()),
                        rule,
                    ))),
                    None => stuck("intro label does not step"),
                };
            }
            if !is_value(m) {
                return match step(globals, m)? {
                    Some((m2, rule)) => Ok(Some((
                        Term::Intro(*fl, l.clone(), Box::new(m2), ann.clone()),
                        rule,
                    ))),
                    None => stuck("intro payload does not step"),
                };
            }
            let label = match &**l {
                Term::Sing(NormalType::Label(lab), _) => lab.clone(),
                other => return stuck(format!("intro with non-label singleton {:?}", other)),
            };
            let row = vec![(label, ann.clone())];
            let lit = match fl {
                Flavor::Record => Term::RecordLit { row, fields: vec![(**m).clone()] },
                Flavor::Variant => {
                    Term::VariantLit { row, tag: 0, payload: Box::new((**m).clone()) }
                }
            };
            Ok(Some((lit, "delta-label")))
        }
        Term::Elim(fl, m, l) => {
            if !is_value(m) {
                return match step(globals, m)? {
                    Some((m2, rule)) => {
                        Ok(Some((Term::Elim(*fl, Box::new(m2), l.clone()), rule)))
                    }
                    None => stuck("elim target does not step"),
                };
            }
            if !is_value(l) {
                return match step(globals, l)? {
                    Some((l2, rule)) => {
                        Ok(Some((Term::Elim(*fl, m.clone(), Box::new(l2)), rule)))
                    }
                    None => stuck("elim label does not step"),
                };
            }
            let label = match &**l {
                Term::Sing(NormalType::Label(lab), _) => lab.clone(),
                other => return stuck(format!("elim with non-label singleton {:?}", other)),
            };
            match (&fl, &**m) {
                (Flavor::Record, Term::RecordLit { row, fields })
                    if row.len() == 1 && row[0].0 == label =>
                {
                    Ok(Some((fields[0].clone(), "delta-unlabel")))
                }
                (Flavor::Variant, Term::VariantLit { row, tag: 0, payload })
                    if row.len() == 1 && row[0].0 == label =>
                {
                    Ok(Some(((**payload).clone(), "delta-unlabel")))
                }
                (_, other) => stuck(format!("elim of non-singleton literal {:?}", other)),
            }
        }
        Term::RecordLit { row, fields } => {
            for (i, f) in fields.iter().enumerate() {
                if !is_value(f) {
                    return match step(globals, f)? {
                        Some((f2, rule)) => {
                            let mut fields = fields.clone();
                            fields[i] = f2;
                            Ok(Some((
                                Term::RecordLit { row: row.clone(), fields },
                                rule,
                            )))
                        }
                        None => stuck("record field does not step"),
                    };
                }
            }
            unreachable!("record of values is a value")
        }
        Term::VariantLit { row, tag, payload } => match step(globals, payload)? {
            Some((p2, rule)) => Ok(Some((
                Term::VariantLit { row: row.clone(), tag: *tag, payload: Box::new(p2) },
                rule,
            ))),
            None => unreachable!("variant of value is a value"),
        },
        Term::Lam(_, _) | Term::TyLam(_, _) | Term::EvLam(_, _) | Term::Sing(_, _) => {
            unreachable!("values handled above")
        }
    }
}

/// Iterate `step` until a value or the fuel runs out.
pub fn eval_to_value(globals: &GlobalEnv, t: &Term, fuel: usize) -> Result<Term, EvalError> {
    let mut cur = t.clone();
    for _ in 0..fuel {
        match step(globals, &cur)? {
            Some((next, _)) => cur = next,
            None => return Ok(cur),
        }
    }
    Err(EvalError::OutOfFuel)
}

/// Like [`eval_to_value`], invoking `on_step` with each reduct and the
/// rule that produced it.
pub fn eval_trace<F: FnMut(&Term, &str)>(
    globals: &GlobalEnv,
    t: &Term,
    fuel: usize,
    mut on_step: F,
) -> Result<Term, EvalError> {
    let mut cur = t.clone();
    for _ in 0..fuel {
        match step(globals, &cur)? {
            Some((next, rule)) => {
                on_step(&next, rule);
                cur = next;
            }
            None => return Ok(cur),
        }
    }
    Err(EvalError::OutOfFuel)
}

pub const DEFAULT_FUEL: usize = 1_000_000;

#[cfg(test)]
mod tests {
    use super::*;

    fn lbl(s: &str) -> Label {
        Label::new(s)
    }

    fn unit_ty() -> NormalType {
        NormalType::Sing(Box::new(NormalType::Label(lbl("Unit"))), Kind::Label)
    }

    fn unit_val() -> Term {
        Term::Sing(NormalType::Label(lbl("Unit")), Kind::Label)
    }

    fn globals() -> GlobalEnv {
        GlobalEnv::new()
    }

    #[test]
    fn beta_does_not_evaluate_argument() {
        // (\x. #'Unit) ((\y. y) #'Unit) steps by beta first: the argument
        // is untouched.
        let inner_redex = Term::app(Term::Lam(unit_ty(), Box::new(Term::Var(0))), unit_val());
        let t = Term::app(
            Term::Lam(unit_ty(), Box::new(unit_val())),
            inner_redex.clone(),
        );
        let (t2, rule) = step(&globals(), &t).unwrap().unwrap();
        assert_eq!(rule, "beta");
        assert_eq!(t2, unit_val());
    }

    #[test]
    fn out_in_cancels() {
        let phi = NormalType::Lam(Kind::Star, Box::new(unit_ty()));
        let fk = Kind::arrow(Kind::Star, Kind::Star);
        let inner = Term::app(
            Term::TyApp(Box::new(Term::Const(Const::In)), phi.clone(), fk.clone()),
            unit_val(),
        );
        assert!(is_value(&inner));
        let t = Term::app(
            Term::TyApp(Box::new(Term::Const(Const::Out)), phi, fk),
            inner,
        );
        let (t2, rule) = step(&globals(), &t).unwrap().unwrap();
        assert_eq!(rule, "delta-mu");
        assert_eq!(t2, unit_val());
    }

    #[test]
    fn fix_unfolds() {
        let ty = unit_ty();
        let f = Term::Lam(ty.clone(), Box::new(Term::Var(0)));
        let t = Term::app(
            Term::TyApp(Box::new(Term::Const(Const::Fix)), ty.clone(), Kind::Star),
            f.clone(),
        );
        let (t2, rule) = step(&globals(), &t).unwrap().unwrap();
        assert_eq!(rule, "delta-fix");
        assert_eq!(t2, Term::app(f, t));
    }

    #[test]
    fn diverging_fix_runs_out_of_fuel() {
        let ty = unit_ty();
        let f = Term::Lam(ty.clone(), Box::new(Term::Var(0)));
        let t = Term::app(
            Term::TyApp(Box::new(Term::Const(Const::Fix)), ty, Kind::Star),
            f,
        );
        match eval_to_value(&globals(), &t, 100) {
            Err(EvalError::OutOfFuel) => {}
            other => panic!("expected out of fuel, got {:?}", other),
        }
    }

    #[test]
    fn prj_picks_fields() {
        // prj [<'b>] [<'a,'b>] [incl {0->1}] <'a := x, 'b := y> -> <'b := y>
        let row_y = NormalType::Row(vec![(lbl("b"), unit_ty())]);
        let row_z = NormalType::Row(vec![(lbl("a"), unit_ty()), (lbl("b"), unit_ty())]);
        let record = Term::RecordLit {
            row: vec![(lbl("a"), unit_ty()), (lbl("b"), unit_ty())],
            fields: vec![
                Term::Sing(NormalType::Label(lbl("x")), Kind::Label),
                Term::Sing(NormalType::Label(lbl("y")), Kind::Label),
            ],
        };
        let t = Term::app(
            Term::EvApp(
                Box::new(Term::TyApp(
                    Box::new(Term::TyApp(
                        Box::new(Term::Const(Const::Prj)),
                        row_y,
                        Kind::row(Kind::Star),
                    )),
                    row_z,
                    Kind::row(Kind::Star),
                )),
                Evidence::Incl(IndexMap(vec![1])),
            ),
            record,
        );
        let (t2, rule) = step(&globals(), &t).unwrap().unwrap();
        assert_eq!(rule, "delta-prj");
        match t2 {
            Term::RecordLit { row, fields } => {
                assert_eq!(row.len(), 1);
                assert_eq!(row[0].0, lbl("b"));
                assert_eq!(
                    fields,
                    vec![Term::Sing(NormalType::Label(lbl("y")), Kind::Label)]
                );
            }
            other => panic!("expected record, got {:?}", other),
        }
    }

    #[test]
    fn branch_dispatches_by_pick() {
        // (f | g) over rows x = <'F>, y = <'T> with total <'F,'T>;
        // scrutinee tagged 'T goes right.
        let row_x = NormalType::Row(vec![(lbl("F"), unit_ty())]);
        let row_y = NormalType::Row(vec![(lbl("T"), unit_ty())]);
        let row_z = NormalType::Row(vec![(lbl("F"), unit_ty()), (lbl("T"), unit_ty())]);
        let f = Term::Lam(
            NormalType::Sigma(Box::new(row_x.clone())),
            Box::new(Term::Sing(NormalType::Label(lbl("left")), Kind::Label)),
        );
        let g = Term::Lam(
            NormalType::Sigma(Box::new(row_y.clone())),
            Box::new(Term::Sing(NormalType::Label(lbl("right")), Kind::Label)),
        );
        let scrutinee = Term::VariantLit {
            row: vec![(lbl("F"), unit_ty()), (lbl("T"), unit_ty())],
            tag: 1,
            payload: Box::new(unit_val()),
        };
        let head = Term::EvApp(
            Box::new(Term::TyApp(
                Box::new(Term::TyApp(
                    Box::new(Term::TyApp(
                        Box::new(Term::TyApp(
                            Box::new(Term::Const(Const::Branch)),
                            row_x,
                            Kind::row(Kind::Star),
                        )),
                        row_y,
                        Kind::row(Kind::Star),
                    )),
                    row_z,
                    Kind::row(Kind::Star),
                )),
                unit_ty(),
                Kind::Star,
            )),
            Evidence::Comb(IndexMap(vec![0]), IndexMap(vec![1])),
        );
        let t = Term::app(Term::app(Term::app(head, f), g.clone()), scrutinee);
        let (t2, rule) = step(&globals(), &t).unwrap().unwrap();
        assert_eq!(rule, "delta-branch");
        match t2 {
            Term::App(gf, arg) => {
                assert_eq!(*gf, g);
                match *arg {
                    Term::VariantLit { tag, row, .. } => {
                        assert_eq!(tag, 0);
                        assert_eq!(row.len(), 1);
                        assert_eq!(row[0].0, lbl("T"));
                    }
                    other => panic!("expected variant, got {:?}", other),
                }
            }
            other => panic!("expected application of g, got {:?}", other),
        }
    }

    #[test]
    fn intro_builds_singleton_literal() {
        let t = Term::Intro(
            Flavor::Variant,
            Box::new(Term::Sing(NormalType::Label(lbl("l")), Kind::Label)),
            Box::new(unit_val()),
            unit_ty(),
        );
        let (t2, rule) = step(&globals(), &t).unwrap().unwrap();
        assert_eq!(rule, "delta-label");
        match t2 {
            Term::VariantLit { row, tag, .. } => {
                assert_eq!(tag, 0);
                assert_eq!(row, vec![(lbl("l"), unit_ty())]);
            }
            other => panic!("expected variant literal, got {:?}", other),
        }
    }

    #[test]
    fn elim_unwraps_singleton() {
        let lit = Term::RecordLit {
            row: vec![(lbl("l"), unit_ty())],
            fields: vec![unit_val()],
        };
        let t = Term::Elim(
            Flavor::Record,
            Box::new(lit),
            Box::new(Term::Sing(NormalType::Label(lbl("l")), Kind::Label)),
        );
        let (t2, rule) = step(&globals(), &t).unwrap().unwrap();
        assert_eq!(rule, "delta-unlabel");
        assert_eq!(t2, unit_val());
    }
}
