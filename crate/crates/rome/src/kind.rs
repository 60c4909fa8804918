//! Kind checking and elaboration.
//!
//! Elaboration resolves the kind parameter of `Pi`/`Sigma` from their
//! argument (rejecting label kind), rewrites applications into map
//! applications where kinds demand it (including rows of operators applied
//! to a point, which become `Map (\f. f t) r`), validates row-literal
//! ordering, and records singleton kinds. Binder kinds omitted in surface
//! syntax arrive as kind metavariables and are solved by unification;
//! a kind left undetermined is an error, not a guess.

use std::collections::HashMap;
use std::fmt;

use crate::syntax::*;

#[derive(Debug, Clone)]
pub struct KindError(pub String);

impl fmt::Display for KindError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for KindError {}

/// Kind metavariable state, shared between the resolver (which allocates
/// metas for unannotated binders) and the checker (which solves them).
#[derive(Debug, Default)]
pub struct KindState {
    next: u32,
    solutions: HashMap<u32, Kind>,
}

impl KindState {
    pub fn new() -> KindState {
        KindState::default()
    }

    pub fn fresh(&mut self) -> Kind {
        let m = self.next;
        self.next += 1;
        Kind::Meta(m)
    }

    pub fn zonk(&self, k: &Kind) -> Kind {
        match k {
            Kind::Star | Kind::Label => k.clone(),
            Kind::Row(e) => Kind::row(self.zonk(e)),
            Kind::Arrow(a, b) => Kind::arrow(self.zonk(a), self.zonk(b)),
            Kind::Meta(m) => match self.solutions.get(m) {
                Some(k) => self.zonk(&k.clone()),
                None => Kind::Meta(*m),
            },
        }
    }

    fn occurs(&self, m: u32, k: &Kind) -> bool {
        match k {
            Kind::Star | Kind::Label => false,
            Kind::Row(e) => self.occurs(m, e),
            Kind::Arrow(a, b) => self.occurs(m, a) || self.occurs(m, b),
            Kind::Meta(n) => {
                if *n == m {
                    true
                } else if let Some(k) = self.solutions.get(n) {
                    self.occurs(m, &k.clone())
                } else {
                    false
                }
            }
        }
    }

    pub fn unify(&mut self, a: &Kind, b: &Kind) -> Result<(), KindError> {
        let a = self.zonk(a);
        let b = self.zonk(b);
        match (&a, &b) {
            (Kind::Meta(m), _) => {
                if b == Kind::Meta(*m) {
                    Ok(())
                } else if self.occurs(*m, &b) {
                    Err(KindError(format!("occurs check: ?{} in {:?}", m, b)))
                } else {
                    self.solutions.insert(*m, b);
                    Ok(())
                }
            }
            (_, Kind::Meta(_)) => self.unify(&b, &a),
            (Kind::Star, Kind::Star) | (Kind::Label, Kind::Label) => Ok(()),
            (Kind::Row(x), Kind::Row(y)) => self.unify(x, y),
            (Kind::Arrow(a1, a2), Kind::Arrow(b1, b2)) => {
                self.unify(a1, b1)?;
                self.unify(a2, b2)
            }
            _ => Err(KindError(format!(
                "kind mismatch: expected {}, found {}",
                crate::pretty::kind(&b),
                crate::pretty::kind(&a)
            ))),
        }
    }

    fn snapshot(&self) -> (u32, HashMap<u32, Kind>) {
        (self.next, self.solutions.clone())
    }

    fn restore(&mut self, snap: (u32, HashMap<u32, Kind>)) {
        self.next = snap.0;
        self.solutions = snap.1;
    }
}

/// A fully annotated type together with its kind. Re-checking a
/// `KindedType` yields the same kind and the same type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KindedType {
    pub ty: Type,
    pub kind: Kind,
}

/// Infer the kind of `ty` in `delta`, elaborating as described in the
/// module docs. The result may still contain kind metavariables; call
/// [`finalize`] once the enclosing declaration is fully constrained.
pub fn infer_kind(
    state: &mut KindState,
    delta: &mut Vec<Kind>,
    ty: &Type,
) -> Result<KindedType, KindError> {
    match ty {
        Type::Var(i) => {
            let pos = delta
                .len()
                .checked_sub(1 + i)
                .ok_or_else(|| KindError(format!("unbound type variable {}", i)))?;
            Ok(KindedType { ty: ty.clone(), kind: delta[pos].clone() })
        }
        Type::Meta(_) => Err(KindError("type metavariable during kinding".into())),
        Type::Arrow => Ok(KindedType {
            ty: ty.clone(),
            kind: Kind::arrow(Kind::Star, Kind::arrow(Kind::Star, Kind::Star)),
        }),
        Type::Mu => Ok(KindedType {
            ty: ty.clone(),
            kind: Kind::arrow(Kind::arrow(Kind::Star, Kind::Star), Kind::Star),
        }),
        Type::Pi(k) | Type::Sigma(k) => Ok(KindedType {
            ty: ty.clone(),
            kind: Kind::arrow(Kind::row(k.clone()), k.clone()),
        }),
        Type::Forall(k, b) => {
            delta.push(k.clone());
            let body = infer_kind(state, delta, b);
            delta.pop();
            let body = body?;
            state.unify(&body.kind, &Kind::Star)?;
            Ok(KindedType {
                ty: Type::Forall(k.clone(), Box::new(body.ty)),
                kind: Kind::Star,
            })
        }
        Type::Qual(p, b) => {
            let p = check_predicate(state, delta, p)?;
            let body = infer_kind(state, delta, b)?;
            state.unify(&body.kind, &Kind::Star)?;
            Ok(KindedType {
                ty: Type::Qual(Box::new(p), Box::new(body.ty)),
                kind: Kind::Star,
            })
        }
        Type::Lam(k, b) => {
            delta.push(k.clone());
            let body = infer_kind(state, delta, b);
            delta.pop();
            let body = body?;
            Ok(KindedType {
                ty: Type::Lam(k.clone(), Box::new(body.ty)),
                kind: Kind::arrow(k.clone(), body.kind),
            })
        }
        Type::App(f, a) => infer_app(state, delta, f, a),
        Type::Row(entries) => {
            for w in entries.windows(2) {
                if w[0].0 >= w[1].0 {
                    return Err(KindError(format!(
                        "row labels out of order or duplicated: {} then {}",
                        w[0].0, w[1].0
                    )));
                }
            }
            let elem = state.fresh();
            let mut out = Vec::with_capacity(entries.len());
            for (l, t) in entries {
                let kt = infer_kind(state, delta, t)?;
                state.unify(&kt.kind, &elem).map_err(|e| {
                    KindError(format!("row entry {} has mismatched kind: {}", l, e))
                })?;
                out.push((l.clone(), kt.ty));
            }
            Ok(KindedType { ty: Type::Row(out), kind: Kind::row(elem) })
        }
        Type::LabeledSingleton(xi, t) => {
            let kxi = infer_kind(state, delta, xi)?;
            state.unify(&kxi.kind, &Kind::Label)?;
            let kt = infer_kind(state, delta, t)?;
            Ok(KindedType {
                ty: Type::LabeledSingleton(Box::new(kxi.ty), Box::new(kt.ty)),
                kind: Kind::row(kt.kind),
            })
        }
        Type::Label(_) => Ok(KindedType { ty: ty.clone(), kind: Kind::Label }),
        Type::Sing(t, k) => {
            let kt = infer_kind(state, delta, t)?;
            if !matches!(k, Kind::Meta(_)) {
                state.unify(&kt.kind, k)?;
            }
            Ok(KindedType {
                ty: Type::Sing(Box::new(kt.ty), kt.kind),
                kind: Kind::Star,
            })
        }
        Type::MapApp(f, r) => {
            let kf = infer_kind(state, delta, f)?;
            let kr = infer_kind(state, delta, r)?;
            let k1 = state.fresh();
            let k2 = state.fresh();
            state.unify(&kf.kind, &Kind::arrow(k1.clone(), k2.clone()))?;
            state.unify(&kr.kind, &Kind::row(k1))?;
            Ok(KindedType {
                ty: Type::MapApp(Box::new(kf.ty), Box::new(kr.ty)),
                kind: Kind::row(k2),
            })
        }
        Type::Compl(a, b) => {
            let ka = infer_kind(state, delta, a)?;
            let kb = infer_kind(state, delta, b)?;
            let elem = state.fresh();
            state.unify(&ka.kind, &Kind::row(elem.clone()))?;
            state.unify(&kb.kind, &Kind::row(elem.clone()))?;
            Ok(KindedType {
                ty: Type::Compl(Box::new(ka.ty), Box::new(kb.ty)),
                kind: Kind::row(elem),
            })
        }
    }
}

fn infer_app(
    state: &mut KindState,
    delta: &mut Vec<Kind>,
    f: &Type,
    a: &Type,
) -> Result<KindedType, KindError> {
    let kf = infer_kind(state, delta, f)?;
    let ka = infer_kind(state, delta, a)?;
    let fk = state.zonk(&kf.kind);
    match fk {
        Kind::Arrow(dom, cod) => {
            // Plain application if the argument fits the domain; otherwise
            // try inserting an implicit map over a row argument.
            let snap = state.snapshot();
            if state.unify(&ka.kind, &dom).is_ok() {
                return Ok(KindedType { ty: Type::app(kf.ty, ka.ty), kind: *cod });
            }
            state.restore(snap);
            let snap = state.snapshot();
            if state.unify(&ka.kind, &Kind::row((*dom).clone())).is_ok() {
                return Ok(KindedType {
                    ty: Type::MapApp(Box::new(kf.ty), Box::new(ka.ty)),
                    kind: Kind::row(*cod),
                });
            }
            state.restore(snap);
            Err(KindError(format!(
                "cannot apply operator of kind {} to argument of kind {}",
                crate::pretty::kind(&state.zonk(&kf.kind)),
                crate::pretty::kind(&state.zonk(&ka.kind))
            )))
        }
        Kind::Row(elem) => {
            // A row of operators applied to a point: r t == Map (\f. f t) r.
            let elem = state.zonk(&elem);
            match elem {
                Kind::Arrow(dom, cod) => {
                    state.unify(&ka.kind, &dom)?;
                    let mapper = Type::lam(
                        Kind::arrow((*dom).clone(), (*cod).clone()),
                        Type::app(Type::Var(0), shift_type(&ka.ty, 0, 1)),
                    );
                    Ok(KindedType {
                        ty: Type::MapApp(Box::new(mapper), Box::new(kf.ty)),
                        kind: Kind::row(*cod),
                    })
                }
                other => Err(KindError(format!(
                    "cannot apply a row of kind R[{}]",
                    crate::pretty::kind(&other)
                ))),
            }
        }
        Kind::Meta(_) => {
            // An undetermined operator being applied defaults to a plain
            // arrow; later constraints refine the domain and codomain.
            let cod = state.fresh();
            state.unify(&kf.kind, &Kind::arrow(ka.kind.clone(), cod.clone()))?;
            Ok(KindedType { ty: Type::app(kf.ty, ka.ty), kind: cod })
        }
        other => Err(KindError(format!(
            "cannot apply a type of kind {}",
            crate::pretty::kind(&other)
        ))),
    }
}

/// Kind-check a predicate: all components must share one row kind.
pub fn check_predicate(
    state: &mut KindState,
    delta: &mut Vec<Kind>,
    p: &Pred,
) -> Result<Pred, KindError> {
    let elem = state.fresh();
    // Re-elaboration respects an already-resolved kind annotation.
    let declared = match p {
        Pred::Leq { kind, .. } | Pred::Plus { kind, .. } => kind,
    };
    if !matches!(declared, Kind::Meta(_)) {
        state.unify(&elem, declared)?;
    }
    let rk = Kind::row(elem.clone());
    match p {
        Pred::Leq { lhs, rhs, .. } => {
            let kl = infer_kind(state, delta, lhs)?;
            let kr = infer_kind(state, delta, rhs)?;
            state.unify(&kl.kind, &rk)?;
            state.unify(&kr.kind, &rk)?;
            Ok(Pred::Leq { lhs: kl.ty, rhs: kr.ty, kind: elem })
        }
        Pred::Plus { left, right, total, .. } => {
            let ka = infer_kind(state, delta, left)?;
            let kb = infer_kind(state, delta, right)?;
            let kc = infer_kind(state, delta, total)?;
            state.unify(&ka.kind, &rk)?;
            state.unify(&kb.kind, &rk)?;
            state.unify(&kc.kind, &rk)?;
            Ok(Pred::Plus { left: ka.ty, right: kb.ty, total: kc.ty, kind: elem })
        }
    }
}

/// Replace solved kind metavariables throughout an elaborated type and
/// reject any that remain, along with `Pi`/`Sigma` formed at label kind.
pub fn finalize(state: &KindState, ty: &Type) -> Result<Type, KindError> {
    fn zk(state: &KindState, k: &Kind, what: &str) -> Result<Kind, KindError> {
        let k = state.zonk(k);
        if k.has_meta() {
            return Err(KindError(format!(
                "cannot infer a unique kind for {}; add an annotation",
                what
            )));
        }
        Ok(k)
    }
    let res = match ty {
        Type::Var(_) | Type::Arrow | Type::Mu | Type::Label(_) => ty.clone(),
        Type::Meta(_) => return Err(KindError("type metavariable during kinding".into())),
        Type::Pi(k) => {
            let k = zk(state, k, "Pi")?;
            if k == Kind::Label {
                return Err(KindError("Pi may not be formed at label kind".into()));
            }
            Type::Pi(k)
        }
        Type::Sigma(k) => {
            let k = zk(state, k, "Sigma")?;
            if k == Kind::Label {
                return Err(KindError("Sigma may not be formed at label kind".into()));
            }
            Type::Sigma(k)
        }
        Type::Forall(k, b) => {
            Type::Forall(zk(state, k, "a forall binder")?, Box::new(finalize(state, b)?))
        }
        Type::Qual(p, b) => Type::Qual(
            Box::new(finalize_pred(state, p)?),
            Box::new(finalize(state, b)?),
        ),
        Type::Lam(k, b) => {
            Type::Lam(zk(state, k, "a type lambda binder")?, Box::new(finalize(state, b)?))
        }
        Type::App(f, a) => Type::app(finalize(state, f)?, finalize(state, a)?),
        Type::Row(es) => Type::Row(
            es.iter()
                .map(|(l, t)| Ok((l.clone(), finalize(state, t)?)))
                .collect::<Result<_, KindError>>()?,
        ),
        Type::LabeledSingleton(l, t) => Type::LabeledSingleton(
            Box::new(finalize(state, l)?),
            Box::new(finalize(state, t)?),
        ),
        Type::Sing(t, k) => {
            Type::Sing(Box::new(finalize(state, t)?), zk(state, k, "a singleton")?)
        }
        Type::MapApp(f, r) => {
            Type::MapApp(Box::new(finalize(state, f)?), Box::new(finalize(state, r)?))
        }
        Type::Compl(a, b) => {
            Type::Compl(Box::new(finalize(state, a)?), Box::new(finalize(state, b)?))
        }
    };
    Ok(res)
}

pub fn finalize_pred(state: &KindState, p: &Pred) -> Result<Pred, KindError> {
    fn zk(state: &KindState, k: &Kind) -> Result<Kind, KindError> {
        let k = state.zonk(k);
        if k.has_meta() {
            return Err(KindError(
                "cannot infer a unique kind for a predicate; add an annotation".into(),
            ));
        }
        Ok(k)
    }
    match p {
        Pred::Leq { lhs, rhs, kind } => Ok(Pred::Leq {
            lhs: finalize(state, lhs)?,
            rhs: finalize(state, rhs)?,
            kind: zk(state, kind)?,
        }),
        Pred::Plus { left, right, total, kind } => Ok(Pred::Plus {
            left: finalize(state, left)?,
            right: finalize(state, right)?,
            total: finalize(state, total)?,
            kind: zk(state, kind)?,
        }),
    }
}

/// Check a type against an expected kind, seeding lambda binder kinds
/// from arrow domains before descending into bodies.
fn check_kind(
    state: &mut KindState,
    delta: &mut Vec<Kind>,
    ty: &Type,
    expected: &Kind,
) -> Result<Type, KindError> {
    match (ty, state.zonk(expected)) {
        (Type::Lam(k, b), Kind::Arrow(dom, cod)) => {
            state.unify(k, &dom)?;
            delta.push(k.clone());
            let body = check_kind(state, delta, b, &cod);
            delta.pop();
            Ok(Type::Lam(k.clone(), Box::new(body?)))
        }
        _ => {
            let kt = infer_kind(state, delta, ty)?;
            state.unify(&kt.kind, expected)?;
            Ok(kt.ty)
        }
    }
}

/// Elaborate a `delta`-scoped type at an optional expected kind,
/// finalizing all kind metavariables.
pub fn elaborate_type(
    delta: &mut Vec<Kind>,
    ty: &Type,
    expected: Option<&Kind>,
    state: &mut KindState,
) -> Result<KindedType, KindError> {
    let (ty, kind) = match expected {
        Some(k) => (check_kind(state, delta, ty, k)?, k.clone()),
        None => {
            let kt = infer_kind(state, delta, ty)?;
            (kt.ty, kt.kind)
        }
    };
    let ty = finalize(state, &ty)?;
    let kind = state.zonk(&kind);
    if kind.has_meta() {
        return Err(KindError(
            "cannot infer a unique kind; add an annotation".into(),
        ));
    }
    Ok(KindedType { ty, kind })
}

/// Environment formation: every predicate in `phi` must kind-check and
/// every type in `gamma` must have kind `*`.
pub fn check_env(ctxs: &Contexts) -> Result<(), KindError> {
    let mut delta = ctxs.delta.clone();
    let mut state = KindState::new();
    for p in &ctxs.phi {
        let core = crate::norm::embed_pred(p);
        check_predicate(&mut state, &mut delta, &core)?;
    }
    for t in &ctxs.gamma {
        let core = crate::norm::embed(t);
        let kt = infer_kind(&mut state, &mut delta, &core)?;
        state.unify(&kt.kind, &Kind::Star).map_err(|_| {
            KindError(format!(
                "term context entry must have kind *, found {}",
                crate::pretty::kind(&state.zonk(&kt.kind))
            ))
        })?;
    }
    Ok(())
}

/// Kind of an already elaborated (meta-free) type.
pub fn kind_of(delta: &[Kind], ty: &Type) -> Result<Kind, KindError> {
    let mut state = KindState::new();
    let mut d = delta.to_vec();
    let kt = infer_kind(&mut state, &mut d, ty)?;
    let k = state.zonk(&kt.kind);
    if k.has_meta() {
        return Err(KindError("kind not determined".into()));
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm;

    fn star() -> Kind {
        Kind::Star
    }

    fn lbl(s: &str) -> Label {
        Label::new(s)
    }

    fn elab(delta: &[Kind], ty: &Type) -> Result<KindedType, KindError> {
        let mut state = KindState::new();
        elaborate_type(&mut delta.to_vec(), ty, None, &mut state)
    }

    #[test]
    fn pi_resolves_at_star() {
        // Pi {'x := Pi {}} : * with the Pi parameter fixed at *.
        let mut state = KindState::new();
        let inner = Type::app(Type::Pi(state.fresh()), Type::Row(vec![]));
        let row = Type::Row(vec![(lbl("x"), inner)]);
        let t = Type::app(Type::Pi(state.fresh()), row);
        let kt = elaborate_type(&mut vec![], &t, Some(&star()), &mut state).unwrap();
        assert_eq!(kt.kind, star());
        match &kt.ty {
            Type::App(f, _) => assert_eq!(**f, Type::Pi(star())),
            other => panic!("expected application, got {:?}", other),
        }
    }

    #[test]
    fn functor_over_row_inserts_map() {
        // F : (*->*)->*, z : R[*->*] |- F z elaborates to Map F z : R[*].
        let f_kind = Kind::arrow(Kind::arrow(star(), star()), star());
        let z_kind = Kind::row(Kind::arrow(star(), star()));
        let delta = vec![f_kind, z_kind];
        let t = Type::app(Type::Var(1), Type::Var(0));
        let kt = elab(&delta, &t).unwrap();
        assert!(matches!(kt.ty, Type::MapApp(_, _)));
        assert_eq!(kt.kind, Kind::row(star()));
    }

    #[test]
    fn row_of_operators_applied_to_point() {
        // valr : R[R[*->*] -> *], w : R[*->*] |- valr w : R[*].
        let valr_kind = Kind::row(Kind::arrow(Kind::row(Kind::arrow(star(), star())), star()));
        let w_kind = Kind::row(Kind::arrow(star(), star()));
        let delta = vec![valr_kind, w_kind];
        let t = Type::app(Type::Var(1), Type::Var(0));
        let kt = elab(&delta, &t).unwrap();
        match &kt.ty {
            Type::MapApp(f, r) => {
                assert!(matches!(**f, Type::Lam(_, _)));
                assert_eq!(**r, Type::Var(1));
            }
            other => panic!("expected map application, got {:?}", other),
        }
        assert_eq!(kt.kind, Kind::row(star()));
    }

    #[test]
    fn pi_at_label_kind_rejected() {
        // Pi {} : L is ill-kinded.
        let mut state = KindState::new();
        let t = Type::app(Type::Pi(state.fresh()), Type::Row(vec![]));
        let err = elaborate_type(&mut vec![], &t, Some(&Kind::Label), &mut state);
        assert!(err.is_err());
    }

    #[test]
    fn predicate_kinds_must_match() {
        let mut state = KindState::new();
        let mut delta = vec![Kind::row(star()), Kind::row(Kind::arrow(star(), star()))];
        // z1 : R[*] (idx 1), z2 : R[*->*] (idx 0); z1 < z2 is a kind error.
        let p = Pred::Leq { lhs: Type::Var(1), rhs: Type::Var(0), kind: Kind::Star };
        assert!(check_predicate(&mut state, &mut delta, &p).is_err());
    }

    #[test]
    fn predicate_leq_elaborates() {
        let mut state = KindState::new();
        let mut delta = vec![Kind::row(star())];
        let p = Pred::Leq {
            lhs: Type::Row(vec![(lbl("l"), Type::app(Type::Pi(star()), Type::Row(vec![])))]),
            rhs: Type::Var(0),
            kind: Kind::Star,
        };
        let p = check_predicate(&mut state, &mut delta, &p).unwrap();
        let p = finalize_pred(&state, &p).unwrap();
        match p {
            Pred::Leq { kind, .. } => assert_eq!(kind, star()),
            other => panic!("expected containment, got {:?}", other),
        }
    }

    #[test]
    fn unsorted_row_rejected() {
        let t = Type::Row(vec![
            (lbl("b"), Type::app(Type::Pi(star()), Type::Row(vec![]))),
            (lbl("a"), Type::app(Type::Pi(star()), Type::Row(vec![]))),
        ]);
        assert!(elab(&[], &t).is_err());
    }

    #[test]
    fn env_checks() {
        let ok = Contexts {
            delta: vec![],
            phi: vec![],
            gamma: vec![NormalType::unit_record()],
        };
        check_env(&ok).unwrap();
        let bad = Contexts {
            delta: vec![],
            phi: vec![],
            gamma: vec![NormalType::Label(lbl("x"))],
        };
        assert!(check_env(&bad).is_err());
    }

    #[test]
    fn elaboration_idempotent() {
        let f_kind = Kind::arrow(Kind::arrow(star(), star()), star());
        let z_kind = Kind::row(Kind::arrow(star(), star()));
        let delta = vec![f_kind, z_kind];
        let t = Type::app(Type::Var(1), Type::Var(0));
        let once = elab(&delta, &t).unwrap();
        let twice = elab(&delta, &once.ty).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn substitution_lemma_samples() {
        // If delta, k' |- t : k and delta |- u : k' then delta |- t[u] : k,
        // and normalization commutes with substitution.
        let delta = vec![Kind::row(star())];
        let cases: Vec<(Type, Type)> = vec![
            (
                Type::app(Type::Pi(star()), Type::Var(0)),
                Type::Row(vec![(lbl("a"), Type::app(Type::Pi(star()), Type::Row(vec![])))]),
            ),
            (
                Type::Compl(Box::new(Type::Var(0)), Box::new(Type::Var(1))),
                Type::Row(vec![(lbl("b"), Type::app(Type::Pi(star()), Type::Row(vec![])))]),
            ),
        ];
        for (t, u) in cases {
            let inner_kind = Kind::row(star());
            let mut d2 = delta.clone();
            d2.push(inner_kind.clone());
            let kt = elab(&d2, &t).unwrap();
            let ku = elab(&delta, &u).unwrap();
            assert_eq!(ku.kind, inner_kind);
            let substituted = subst_type(&kt.ty, &ku.ty);
            let ks = elab(&delta, &substituted).unwrap();
            assert_eq!(ks.kind, kt.kind);
            let n1 = norm::normalize(&norm::NoMetas, &delta, &substituted, &ks.kind);
            let env: Vec<norm::Sem> = {
                let mut e = norm::reflection_env(&delta);
                e.push(norm::eval_normal(
                    &norm::NoMetas,
                    &delta,
                    &norm::normalize(&norm::NoMetas, &delta, &ku.ty, &inner_kind),
                ));
                e
            };
            let n2 = norm::reify(
                &norm::NoMetas,
                delta.len(),
                &ks.kind,
                &norm::eval(&norm::NoMetas, &env, &kt.ty),
            );
            assert_eq!(n1, n2);
        }
    }
}
