//! Normalization by evaluation for types.
//!
//! Types are evaluated into a semantic domain and read back as normal
//! forms. Beta redexes reduce, arrow-kinded values eta-expand to lambdas,
//! maps compute over row literals and fuse over neutral rows, `Pi`/`Sigma`
//! lift over applications and push through rows of rows, and complements
//! of literal rows compute by `subtract`. Neutral rows are represented as
//! inert identity maps, matching the normal form grammar.

use std::rc::Rc;

use crate::syntax::*;

/// Lookup for type metavariables during normalization. Ground callers use
/// [`NoMetas`]; the type checker supplies its store.
pub trait MetaSource {
    fn lookup(&self, m: MetaId) -> Option<Sem>;
    fn kind_of(&self, m: MetaId) -> Kind;
}

/// Meta source for contexts where metavariables cannot occur.
pub struct NoMetas;

impl MetaSource for NoMetas {
    fn lookup(&self, _m: MetaId) -> Option<Sem> {
        None
    }
    fn kind_of(&self, m: MetaId) -> Kind {
        panic!("unexpected type metavariable ?{} in ground normalization", m)
    }
}

pub type Env = Vec<Sem>;

#[derive(Clone, Debug)]
pub struct Closure {
    pub env: Env,
    pub body: Rc<Type>,
}

#[derive(Clone, Debug)]
pub enum SemHead {
    Lvl(usize),
    Meta(MetaId),
}

/// Neutral spine; arguments carry their kinds for readback.
#[derive(Clone, Debug)]
pub struct SemNeutral {
    pub head: SemHead,
    pub args: Vec<(Sem, Kind)>,
}

impl SemNeutral {
    fn apply(&self, arg: Sem, kind: Kind) -> SemNeutral {
        let mut n = self.clone();
        n.args.push((arg, kind));
        n
    }
}

/// Semantic functions. `Closure` comes from syntax; the remaining forms
/// are the primitive operators normalization needs to defer: identity
/// (inert neutral rows), composition (map fusion), `\f. f a` (lifting
/// `Pi`/`Sigma` over application), the constructor constants, and stuck
/// applications of neutrals.
#[derive(Clone, Debug)]
pub enum SemFun {
    Closure(Kind, Closure),
    Neutral(SemNeutral, Kind, Kind),
    Id(Kind),
    Compose(Box<SemFun>, Box<SemFun>),
    /// `\f. f a` where `a : dom` and the result kind is `cod`.
    ApplyTo(Box<Sem>, Kind, Kind),
    Xi(Flavor, Kind),
    /// `Pi`/`Sigma` at arrow kind `k1 -> k2` applied to a row, waiting for
    /// its lifted argument: `(Xi r) t == Xi (Map (\f. f t) r)`.
    XiLift(Flavor, Kind, Kind, Box<SemRow>),
    MuCon,
    ArrowCon0,
    ArrowCon1(Box<Sem>),
}

#[derive(Clone, Debug)]
pub enum SemRow {
    Lit(Vec<(Label, Sem)>),
    /// Singleton row with a neutral label.
    Single(SemNeutral, Box<Sem>),
    /// Pending map over a neutral row; the kind is the source element kind.
    Map(Box<SemFun>, SemNeutral, Kind),
    Compl(Box<SemRow>, Box<SemRow>),
}

#[derive(Clone, Debug)]
pub enum SemPred {
    Leq(Box<Sem>, Box<Sem>, Kind),
    Plus(Box<Sem>, Box<Sem>, Box<Sem>, Kind),
}

#[derive(Clone, Debug)]
pub enum Sem {
    Fun(SemFun),
    Row(SemRow),
    Arrow(Box<Sem>, Box<Sem>),
    Forall(Kind, Closure),
    Qual(Box<SemPred>, Box<Sem>),
    Mu(Box<SemFun>),
    Pi(Box<Sem>),
    Sigma(Box<Sem>),
    Sing(Box<Sem>, Kind),
    Label(Label),
    Neutral(SemNeutral),
}

fn as_fun(v: Sem) -> SemFun {
    match v {
        Sem::Fun(f) => f,
        other => panic!("normalize: expected a type function, got {:?}", other),
    }
}

fn as_row(v: Sem) -> SemRow {
    match v {
        Sem::Row(r) => r,
        other => panic!("normalize: expected a row, got {:?}", other),
    }
}

/// Reflect a neutral at the given kind: functions become stuck
/// applications, rows become inert identity maps.
pub fn reflect(kind: &Kind, n: SemNeutral) -> Sem {
    match kind {
        Kind::Star | Kind::Label => Sem::Neutral(n),
        Kind::Arrow(k1, k2) => Sem::Fun(SemFun::Neutral(n, (**k1).clone(), (**k2).clone())),
        Kind::Row(k) => Sem::Row(SemRow::Map(
            Box::new(SemFun::Id((**k).clone())),
            n,
            (**k).clone(),
        )),
        Kind::Meta(m) => panic!("reflect at unsolved kind metavariable ?{}", m),
    }
}

pub fn apply_fun(ms: &dyn MetaSource, f: &SemFun, arg: Sem) -> Sem {
    match f {
        SemFun::Closure(_, cl) => {
            let mut env = cl.env.clone();
            env.push(arg);
            eval(ms, &env, &cl.body)
        }
        SemFun::Neutral(n, k1, k2) => reflect(k2, n.apply(arg, k1.clone())),
        SemFun::Id(_) => arg,
        SemFun::Compose(f, g) => {
            let inner = apply_fun(ms, g, arg);
            apply_fun(ms, f, inner)
        }
        SemFun::ApplyTo(a, _, _) => apply_fun(ms, &as_fun(arg), (**a).clone()),
        SemFun::Xi(fl, k) => make_xi(ms, *fl, k, arg),
        SemFun::XiLift(fl, k1, k2, row) => {
            let apply_arg = SemFun::ApplyTo(Box::new(arg), k1.clone(), k2.clone());
            let mapped = map_row(ms, &apply_arg, (**row).clone());
            make_xi(ms, *fl, k2, Sem::Row(mapped))
        }
        SemFun::MuCon => Sem::Mu(Box::new(as_fun(arg))),
        SemFun::ArrowCon0 => Sem::Fun(SemFun::ArrowCon1(Box::new(arg))),
        SemFun::ArrowCon1(a) => Sem::Arrow(a.clone(), Box::new(arg)),
    }
}

pub fn apply(ms: &dyn MetaSource, f: Sem, arg: Sem) -> Sem {
    apply_fun(ms, &as_fun(f), arg)
}

/// Map a semantic function across a semantic row: compute over literals
/// and label singletons, fuse over pending maps, push into complements.
fn map_row(ms: &dyn MetaSource, f: &SemFun, row: SemRow) -> SemRow {
    match row {
        SemRow::Lit(entries) => SemRow::Lit(
            entries
                .into_iter()
                .map(|(l, v)| (l, apply_fun(ms, f, v)))
                .collect(),
        ),
        SemRow::Single(n, v) => SemRow::Single(n, Box::new(apply_fun(ms, f, *v))),
        SemRow::Map(g, n, k) => {
            SemRow::Map(Box::new(SemFun::Compose(Box::new(f.clone()), g)), n, k)
        }
        SemRow::Compl(a, b) => SemRow::Compl(
            Box::new(map_row(ms, f, *a)),
            Box::new(map_row(ms, f, *b)),
        ),
    }
}

/// Apply `Pi`/`Sigma` at element kind `k` to `arg`. At kind `*` this is
/// the record/variant constructor; at arrow kinds the constructor lifts
/// over application; at row kinds it maps over a row of rows.
fn make_xi(ms: &dyn MetaSource, fl: Flavor, k: &Kind, arg: Sem) -> Sem {
    match k {
        Kind::Star => match fl {
            Flavor::Record => Sem::Pi(Box::new(arg)),
            Flavor::Variant => Sem::Sigma(Box::new(arg)),
        },
        Kind::Arrow(k1, k2) => {
            // (Xi^{k1->k2} r) t == Xi^{k2} (Map (\f. f t) r)
            let row = as_row(arg);
            Sem::Fun(SemFun::XiLift(fl, (**k1).clone(), (**k2).clone(), Box::new(row)))
        }
        Kind::Row(k1) => {
            let row = as_row(arg);
            Sem::Row(map_row(ms, &SemFun::Xi(fl, (**k1).clone()), row))
        }
        Kind::Label => panic!("normalize: Pi/Sigma formed at label kind"),
        Kind::Meta(m) => panic!("normalize: Pi/Sigma at unsolved kind ?{}", m),
    }
}

pub fn eval(ms: &dyn MetaSource, env: &Env, ty: &Type) -> Sem {
    match ty {
        Type::Var(i) => {
            let pos = env
                .len()
                .checked_sub(1 + i)
                .unwrap_or_else(|| panic!("eval: unbound type variable {}", i));
            env[pos].clone()
        }
        Type::Meta(m) => match ms.lookup(*m) {
            Some(v) => v,
            None => reflect(&ms.kind_of(*m), SemNeutral { head: SemHead::Meta(*m), args: vec![] }),
        },
        Type::Arrow => Sem::Fun(SemFun::ArrowCon0),
        Type::Mu => Sem::Fun(SemFun::MuCon),
        Type::Pi(k) => Sem::Fun(SemFun::Xi(Flavor::Record, k.clone())),
        Type::Sigma(k) => Sem::Fun(SemFun::Xi(Flavor::Variant, k.clone())),
        Type::Forall(k, b) => Sem::Forall(
            k.clone(),
            Closure { env: env.clone(), body: Rc::new((**b).clone()) },
        ),
        Type::Qual(p, b) => Sem::Qual(
            Box::new(eval_pred(ms, env, p)),
            Box::new(eval(ms, env, b)),
        ),
        Type::Lam(k, b) => Sem::Fun(SemFun::Closure(
            k.clone(),
            Closure { env: env.clone(), body: Rc::new((**b).clone()) },
        )),
        Type::App(f, a) => {
            let fv = eval(ms, env, f);
            let av = eval(ms, env, a);
            apply(ms, fv, av)
        }
        Type::Row(entries) => Sem::Row(SemRow::Lit(
            entries
                .iter()
                .map(|(l, t)| (l.clone(), eval(ms, env, t)))
                .collect(),
        )),
        Type::LabeledSingleton(xi, t) => {
            let lv = eval(ms, env, xi);
            let tv = eval(ms, env, t);
            match lv {
                Sem::Label(l) => Sem::Row(SemRow::Lit(vec![(l, tv)])),
                Sem::Neutral(n) => Sem::Row(SemRow::Single(n, Box::new(tv))),
                other => panic!("eval: non-label in labeled singleton: {:?}", other),
            }
        }
        Type::Label(l) => Sem::Label(l.clone()),
        Type::Sing(t, k) => Sem::Sing(Box::new(eval(ms, env, t)), k.clone()),
        Type::MapApp(f, r) => {
            let fv = as_fun(eval(ms, env, f));
            let rv = as_row(eval(ms, env, r));
            Sem::Row(map_row(ms, &fv, rv))
        }
        Type::Compl(a, b) => {
            let av = as_row(eval(ms, env, a));
            let bv = as_row(eval(ms, env, b));
            Sem::Row(SemRow::Compl(Box::new(av), Box::new(bv)))
        }
    }
}

fn eval_pred(ms: &dyn MetaSource, env: &Env, p: &Pred) -> SemPred {
    match p {
        Pred::Leq { lhs, rhs, kind } => SemPred::Leq(
            Box::new(eval(ms, env, lhs)),
            Box::new(eval(ms, env, rhs)),
            kind.clone(),
        ),
        Pred::Plus { left, right, total, kind } => SemPred::Plus(
            Box::new(eval(ms, env, left)),
            Box::new(eval(ms, env, right)),
            Box::new(eval(ms, env, total)),
            kind.clone(),
        ),
    }
}

/// Relative complement of sorted literal rows: entries of `minuend` not
/// present (same label and type) in `subtrahend`. An entry whose label
/// matches but whose type differs is kept, agreeing with set difference
/// on (label, type) pairs.
pub fn subtract(
    minuend: &[(Label, NormalType)],
    subtrahend: &[(Label, NormalType)],
) -> Vec<(Label, NormalType)> {
    let mut out = Vec::new();
    let mut i = 0;
    let mut j = 0;
    while i < minuend.len() && j < subtrahend.len() {
        let (l2, t2) = &minuend[i];
        let (l1, t1) = &subtrahend[j];
        if l2 == l1 {
            if t2 != t1 {
                out.push(minuend[i].clone());
            }
            i += 1;
            j += 1;
        } else if l2 < l1 {
            out.push(minuend[i].clone());
            i += 1;
        } else {
            j += 1;
        }
    }
    out.extend_from_slice(&minuend[i..]);
    out
}

fn rigid_closed(t: &NormalType) -> bool {
    fn neu(n: &Neutral, c: usize) -> bool {
        let head_ok = match n.head {
            Head::Var(ix) => ix < c,
            Head::Meta(_) => false,
        };
        head_ok && n.args.iter().all(|a| go(a, c))
    }
    fn go(t: &NormalType, c: usize) -> bool {
        match t {
            NormalType::Neutral(n) => neu(n, c),
            NormalType::Arrow(a, b) | NormalType::Compl(a, b) => go(a, c) && go(b, c),
            NormalType::Forall(_, b) | NormalType::Lam(_, b) => go(b, c + 1),
            NormalType::Qual(p, b) => {
                p.components().iter().all(|x| go(x, c)) && go(b, c)
            }
            NormalType::Mu(b) | NormalType::Pi(b) | NormalType::Sigma(b) => go(b, c),
            NormalType::Row(es) => es.iter().all(|(_, t)| go(t, c)),
            NormalType::LabeledSingleton(n, t) => neu(n, c) && go(t, c),
            NormalType::Map(f, n) => go(f, c) && neu(n, c),
            NormalType::Label(_) => true,
            NormalType::Sing(t, _) => go(t, c),
        }
    }
    go(t, 0)
}

/// Subtraction that only fires when its keep/drop decisions are stable
/// under substitution: a label-matched pair with different types must be
/// closed on both sides (a free variable could make them equal later).
/// Returns `None` when the complement has to stay inert.
fn subtract_stable(
    minuend: &[(Label, NormalType)],
    subtrahend: &[(Label, NormalType)],
) -> Option<Vec<(Label, NormalType)>> {
    let mut out = Vec::new();
    let mut i = 0;
    let mut j = 0;
    while i < minuend.len() && j < subtrahend.len() {
        let (l2, t2) = &minuend[i];
        let (l1, t1) = &subtrahend[j];
        if l2 == l1 {
            if t2 != t1 {
                if !(rigid_closed(t2) && rigid_closed(t1)) {
                    return None;
                }
                out.push(minuend[i].clone());
            }
            i += 1;
            j += 1;
        } else if l2 < l1 {
            out.push(minuend[i].clone());
            i += 1;
        } else {
            j += 1;
        }
    }
    out.extend_from_slice(&minuend[i..]);
    Some(out)
}

fn reify_neutral(ms: &dyn MetaSource, depth: usize, n: &SemNeutral) -> Neutral {
    let head = match &n.head {
        SemHead::Lvl(l) => {
            assert!(*l < depth, "reify: level {} out of scope at depth {}", l, depth);
            Head::Var(depth - 1 - l)
        }
        SemHead::Meta(m) => Head::Meta(*m),
    };
    Neutral {
        head,
        args: n.args.iter().map(|(v, k)| reify(ms, depth, k, v)).collect(),
    }
}

fn reify_row(ms: &dyn MetaSource, depth: usize, elem: &Kind, row: &SemRow) -> NormalType {
    match row {
        SemRow::Lit(entries) => NormalType::Row(
            entries
                .iter()
                .map(|(l, v)| (l.clone(), reify(ms, depth, elem, v)))
                .collect(),
        ),
        SemRow::Single(n, v) => NormalType::LabeledSingleton(
            reify_neutral(ms, depth, n),
            Box::new(reify(ms, depth, elem, v)),
        ),
        SemRow::Map(f, n, src) => {
            let fk = Kind::arrow(src.clone(), elem.clone());
            let fnf = reify(ms, depth, &fk, &Sem::Fun((**f).clone()));
            NormalType::Map(Box::new(fnf), reify_neutral(ms, depth, n))
        }
        SemRow::Compl(a, b) => {
            let an = reify_row(ms, depth, elem, a);
            let bn = reify_row(ms, depth, elem, b);
            match (&an, &bn) {
                (NormalType::Row(xs), NormalType::Row(ys)) => match subtract_stable(xs, ys) {
                    Some(out) => NormalType::Row(out),
                    None => NormalType::Compl(Box::new(an), Box::new(bn)),
                },
                _ => NormalType::Compl(Box::new(an), Box::new(bn)),
            }
        }
    }
}

pub fn reify(ms: &dyn MetaSource, depth: usize, kind: &Kind, v: &Sem) -> NormalType {
    match kind {
        Kind::Arrow(k1, k2) => {
            let f = match v {
                Sem::Fun(f) => f,
                other => panic!("reify: expected function at arrow kind, got {:?}", other),
            };
            let fresh = SemNeutral { head: SemHead::Lvl(depth), args: vec![] };
            let body = apply_fun(ms, f, reflect(k1, fresh));
            NormalType::Lam((**k1).clone(), Box::new(reify(ms, depth + 1, k2, &body)))
        }
        Kind::Row(elem) => match v {
            Sem::Row(r) => reify_row(ms, depth, elem, r),
            other => panic!("reify: expected row at row kind, got {:?}", other),
        },
        Kind::Label => match v {
            Sem::Label(l) => NormalType::Label(l.clone()),
            Sem::Neutral(n) => NormalType::Neutral(reify_neutral(ms, depth, n)),
            other => panic!("reify: expected label, got {:?}", other),
        },
        Kind::Star => match v {
            Sem::Arrow(a, b) => NormalType::Arrow(
                Box::new(reify(ms, depth, &Kind::Star, a)),
                Box::new(reify(ms, depth, &Kind::Star, b)),
            ),
            Sem::Forall(k, cl) => {
                let fresh = SemNeutral { head: SemHead::Lvl(depth), args: vec![] };
                let mut env = cl.env.clone();
                env.push(reflect(k, fresh));
                let body = eval(ms, &env, &cl.body);
                NormalType::Forall(
                    k.clone(),
                    Box::new(reify(ms, depth + 1, &Kind::Star, &body)),
                )
            }
            Sem::Qual(p, b) => NormalType::Qual(
                Box::new(reify_pred(ms, depth, p)),
                Box::new(reify(ms, depth, &Kind::Star, b)),
            ),
            Sem::Mu(f) => {
                let fk = Kind::arrow(Kind::Star, Kind::Star);
                NormalType::Mu(Box::new(reify(ms, depth, &fk, &Sem::Fun((**f).clone()))))
            }
            Sem::Pi(r) => NormalType::Pi(Box::new(reify(
                ms,
                depth,
                &Kind::row(Kind::Star),
                r,
            ))),
            Sem::Sigma(r) => NormalType::Sigma(Box::new(reify(
                ms,
                depth,
                &Kind::row(Kind::Star),
                r,
            ))),
            Sem::Sing(t, k) => {
                NormalType::Sing(Box::new(reify(ms, depth, k, t)), k.clone())
            }
            Sem::Neutral(n) => NormalType::Neutral(reify_neutral(ms, depth, n)),
            other => panic!("reify: unexpected value at kind *: {:?}", other),
        },
        Kind::Meta(m) => panic!("reify at unsolved kind metavariable ?{}", m),
    }
}

pub fn reify_pred(ms: &dyn MetaSource, depth: usize, p: &SemPred) -> NormalPred {
    match p {
        SemPred::Leq(a, b, k) => {
            let rk = Kind::row(k.clone());
            NormalPred::Leq {
                lhs: reify(ms, depth, &rk, a),
                rhs: reify(ms, depth, &rk, b),
                kind: k.clone(),
            }
        }
        SemPred::Plus(a, b, c, k) => {
            let rk = Kind::row(k.clone());
            NormalPred::Plus {
                left: reify(ms, depth, &rk, a),
                right: reify(ms, depth, &rk, b),
                total: reify(ms, depth, &rk, c),
                kind: k.clone(),
            }
        }
    }
}

/// Environment reflecting every variable of `delta` (outermost first).
pub fn reflection_env(delta: &[Kind]) -> Env {
    delta
        .iter()
        .enumerate()
        .map(|(lvl, k)| reflect(k, SemNeutral { head: SemHead::Lvl(lvl), args: vec![] }))
        .collect()
}

/// Normalize a well-kinded type.
pub fn normalize(ms: &dyn MetaSource, delta: &[Kind], ty: &Type, kind: &Kind) -> NormalType {
    let env = reflection_env(delta);
    reify(ms, delta.len(), kind, &eval(ms, &env, ty))
}

pub fn normalize_pred(ms: &dyn MetaSource, delta: &[Kind], p: &Pred) -> NormalPred {
    let env = reflection_env(delta);
    reify_pred(ms, delta.len(), &eval_pred(ms, &env, p))
}

/// Cast a normal type back to core syntax. Identity modulo tags:
/// `normalize . embed` is the identity on normal types.
pub fn embed(t: &NormalType) -> Type {
    fn embed_neutral(n: &Neutral) -> Type {
        let head = match &n.head {
            Head::Var(i) => Type::Var(*i),
            Head::Meta(m) => Type::Meta(*m),
        };
        n.args.iter().fold(head, |f, a| Type::app(f, embed(a)))
    }
    match t {
        NormalType::Neutral(n) => embed_neutral(n),
        NormalType::Arrow(a, b) => Type::arrow(embed(a), embed(b)),
        NormalType::Forall(k, b) => Type::Forall(k.clone(), Box::new(embed(b))),
        NormalType::Qual(p, b) => Type::Qual(Box::new(embed_pred(p)), Box::new(embed(b))),
        NormalType::Lam(k, b) => Type::Lam(k.clone(), Box::new(embed(b))),
        NormalType::Mu(f) => Type::app(Type::Mu, embed(f)),
        NormalType::Pi(r) => Type::app(Type::Pi(Kind::Star), embed(r)),
        NormalType::Sigma(r) => Type::app(Type::Sigma(Kind::Star), embed(r)),
        NormalType::Row(entries) => Type::Row(
            entries
                .iter()
                .map(|(l, t)| (l.clone(), embed(t)))
                .collect(),
        ),
        NormalType::LabeledSingleton(n, t) => {
            Type::LabeledSingleton(Box::new(embed_neutral(n)), Box::new(embed(t)))
        }
        NormalType::Map(f, n) => Type::MapApp(Box::new(embed(f)), Box::new(embed_neutral(n))),
        NormalType::Compl(a, b) => Type::Compl(Box::new(embed(a)), Box::new(embed(b))),
        NormalType::Label(l) => Type::Label(l.clone()),
        NormalType::Sing(t, k) => Type::Sing(Box::new(embed(t)), k.clone()),
    }
}

pub fn embed_pred(p: &NormalPred) -> Pred {
    match p {
        NormalPred::Leq { lhs, rhs, kind } => Pred::Leq {
            lhs: embed(lhs),
            rhs: embed(rhs),
            kind: kind.clone(),
        },
        NormalPred::Plus { left, right, total, kind } => Pred::Plus {
            left: embed(left),
            right: embed(right),
            total: embed(total),
            kind: kind.clone(),
        },
    }
}

/// Decidable type equality: equivalent types have identical normal forms.
pub fn type_equal(delta: &[Kind], t1: &Type, t2: &Type, kind: &Kind) -> bool {
    normalize(&NoMetas, delta, t1, kind) == normalize(&NoMetas, delta, t2, kind)
}

/// Instantiate the body of a binder (`Forall`/`Lam` at `body_kind`) with a
/// semantic argument, in context `delta`.
pub fn instantiate_normal(
    ms: &dyn MetaSource,
    delta: &[Kind],
    body: &NormalType,
    body_kind: &Kind,
    arg: Sem,
) -> NormalType {
    let mut env = reflection_env(delta);
    env.push(arg);
    reify(ms, delta.len(), body_kind, &eval(ms, &env, &embed(body)))
}

/// Evaluate a normal type back into the semantic domain under `delta`.
pub fn eval_normal(ms: &dyn MetaSource, delta: &[Kind], t: &NormalType) -> Sem {
    let env = reflection_env(delta);
    eval(ms, &env, &embed(t))
}

/// Renormalize a normal type (resolves any solved metavariables inside).
pub fn renormalize(
    ms: &dyn MetaSource,
    delta: &[Kind],
    t: &NormalType,
    kind: &Kind,
) -> NormalType {
    normalize(ms, delta, &embed(t), kind)
}

pub fn renormalize_pred(ms: &dyn MetaSource, delta: &[Kind], p: &NormalPred) -> NormalPred {
    normalize_pred(ms, delta, &embed_pred(p))
}

/// The eta-long identity function at kind `k -> k`, as a normal form.
pub fn identity_normal(k: &Kind) -> NormalType {
    reify(&NoMetas, 0, &Kind::arrow(k.clone(), k.clone()), &Sem::Fun(SemFun::Id(k.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star() -> Kind {
        Kind::Star
    }

    fn lbl(s: &str) -> Label {
        Label::new(s)
    }

    fn norm(delta: &[Kind], t: &Type, k: &Kind) -> NormalType {
        normalize(&NoMetas, delta, t, k)
    }

    #[test]
    fn beta_reduces() {
        // (\a. a) 'x  ==  'x
        let t = Type::app(Type::lam(Kind::Label, Type::Var(0)), Type::Label(lbl("x")));
        assert_eq!(norm(&[], &t, &Kind::Label), NormalType::Label(lbl("x")));
    }

    #[test]
    fn eta_expands_at_arrow_kind() {
        // A variable f : * -> * normalizes to \a. f a.
        let k = Kind::arrow(star(), star());
        let t = Type::Var(0);
        let nf = norm(&[k.clone()], &t, &k);
        match nf {
            NormalType::Lam(k1, body) => {
                assert_eq!(k1, star());
                match *body {
                    NormalType::Neutral(n) => {
                        assert_eq!(n.head, Head::Var(1));
                        assert_eq!(n.args.len(), 1);
                    }
                    other => panic!("expected neutral body, got {:?}", other),
                }
            }
            other => panic!("expected lambda, got {:?}", other),
        }
    }

    #[test]
    fn pi_of_lambda_row_eta_expands_over_pi() {
        // Pi {'l := \x. x} at kind * -> * reduces to \a. Pi {'l := a}.
        let row = Type::Row(vec![(lbl("l"), Type::lam(star(), Type::Var(0)))]);
        let t = Type::app(Type::Pi(Kind::arrow(star(), star())), row);
        let k = Kind::arrow(star(), star());
        let expected = NormalType::Lam(
            star(),
            Box::new(NormalType::Pi(Box::new(NormalType::Row(vec![(
                lbl("l"),
                NormalType::Neutral(Neutral::var(0)),
            )])))),
        );
        assert_eq!(norm(&[], &t, &k), expected);
    }

    #[test]
    fn nested_pi_sigma_pushes_inward() {
        // Pi (Sigma {'l1 := {'l2 := t}}) == Pi {'l1 := Sigma {'l2 := t}}
        // with t a * variable.
        let delta = vec![star()];
        let inner = Type::Row(vec![(lbl("l2"), Type::Var(0))]);
        let outer = Type::Row(vec![(lbl("l1"), inner)]);
        let sig = Type::app(Type::Sigma(Kind::row(star())), outer);
        let t = Type::app(Type::Pi(star()), sig);
        let expected = NormalType::Pi(Box::new(NormalType::Row(vec![(
            lbl("l1"),
            NormalType::Sigma(Box::new(NormalType::Row(vec![(
                lbl("l2"),
                NormalType::Neutral(Neutral::var(0)),
            )]))),
        )])));
        assert_eq!(norm(&delta, &t, &star()), expected);
    }

    #[test]
    fn map_computes_over_literal() {
        // Map (\a. a) {'a := t} == {'a := t}
        let delta = vec![star()];
        let id = Type::lam(star(), Type::Var(0));
        let row = Type::Row(vec![(lbl("a"), Type::Var(0))]);
        let t = Type::MapApp(Box::new(id), Box::new(row));
        let expected =
            NormalType::Row(vec![(lbl("a"), NormalType::Neutral(Neutral::var(0)))]);
        assert_eq!(norm(&delta, &t, &Kind::row(star())), expected);
    }

    #[test]
    fn map_stays_inert_over_neutral() {
        // Map (\a. a) r over a row variable stays an inert identity map.
        let delta = vec![Kind::row(star())];
        let id = Type::lam(star(), Type::Var(0));
        let t = Type::MapApp(Box::new(id), Box::new(Type::Var(0)));
        let nf = norm(&delta, &t, &Kind::row(star()));
        match &nf {
            NormalType::Map(f, n) => {
                assert_eq!(**f, identity_normal(&star()));
                assert_eq!(n.head, Head::Var(0));
            }
            other => panic!("expected inert map, got {:?}", other),
        }
        // A bare row variable normalizes the same way.
        assert_eq!(norm(&delta, &Type::Var(0), &Kind::row(star())), nf);
    }

    #[test]
    fn map_fusion_over_neutral() {
        // Map f (Map g r) == Map (f . g) r; both normalize identically.
        let delta = vec![
            Kind::row(star()),
            Kind::arrow(star(), star()),
            Kind::arrow(star(), star()),
        ];
        // delta: r at index 2, g at index 1, f at index 0 (innermost last).
        let f = Type::Var(0);
        let g = Type::Var(1);
        let r = Type::Var(2);
        let nested = Type::MapApp(
            Box::new(f.clone()),
            Box::new(Type::MapApp(Box::new(g.clone()), Box::new(r.clone()))),
        );
        let composed = Type::MapApp(
            Box::new(Type::lam(
                star(),
                Type::app(
                    shift_type(&f, 0, 1),
                    Type::app(shift_type(&g, 0, 1), Type::Var(0)),
                ),
            )),
            Box::new(r),
        );
        assert_eq!(
            norm(&delta, &nested, &Kind::row(star())),
            norm(&delta, &composed, &Kind::row(star()))
        );
    }

    #[test]
    fn subtract_empty_cases() {
        let t = NormalType::Label(lbl("t"));
        let row = vec![(lbl("a"), t.clone())];
        assert_eq!(subtract(&[], &row), vec![]);
        assert_eq!(subtract(&row, &[]), row);
    }

    #[test]
    fn subtract_drops_matching_entries() {
        let nat = NormalType::Pi(Box::new(NormalType::Row(vec![])));
        let boolish = NormalType::Sigma(Box::new(NormalType::Row(vec![])));
        let r2 = vec![(lbl("a"), nat.clone()), (lbl("b"), boolish.clone())];
        let r1 = vec![(lbl("a"), nat)];
        assert_eq!(subtract(&r2, &r1), vec![(lbl("b"), boolish)]);
    }

    #[test]
    fn complement_of_literals_computes() {
        let delta = vec![star(), star()];
        let r2 = Type::Row(vec![(lbl("a"), Type::Var(0)), (lbl("b"), Type::Var(1))]);
        let r1 = Type::Row(vec![(lbl("a"), Type::Var(0))]);
        let t = Type::Compl(Box::new(r2), Box::new(r1));
        let expected =
            NormalType::Row(vec![(lbl("b"), NormalType::Neutral(Neutral::var(1)))]);
        assert_eq!(norm(&delta, &t, &Kind::row(star())), expected);
    }

    #[test]
    fn complement_stays_inert_with_variable_side() {
        let delta = vec![Kind::row(star())];
        let r1 = Type::Row(vec![]);
        let t = Type::Compl(Box::new(Type::Var(0)), Box::new(r1));
        match norm(&delta, &t, &Kind::row(star())) {
            NormalType::Compl(a, b) => {
                assert!(matches!(*a, NormalType::Map(_, _)));
                assert_eq!(*b, NormalType::Row(vec![]));
            }
            other => panic!("expected inert complement, got {:?}", other),
        }
    }

    #[test]
    fn type_equal_eta() {
        // f == \a. f a at kind * -> *.
        let k = Kind::arrow(star(), star());
        let delta = vec![k.clone()];
        let f = Type::Var(0);
        let eta = Type::lam(star(), Type::app(Type::Var(1), Type::Var(0)));
        assert!(type_equal(&delta, &f, &eta, &k));
    }

    #[test]
    fn type_equal_beta() {
        let delta = vec![star()];
        let t = Type::app(Type::lam(star(), Type::Var(0)), Type::Var(0));
        assert!(type_equal(&delta, &t, &Type::Var(0), &star()));
    }

    #[test]
    fn rows_compare_sorted() {
        let delta = vec![star(), star()];
        let r1 = Type::Row(vec![(lbl("a"), Type::Var(0)), (lbl("b"), Type::Var(1))]);
        let r2 = Type::Row(vec![(lbl("a"), Type::Var(0)), (lbl("b"), Type::Var(1))]);
        assert!(type_equal(&delta, &r1, &r2, &Kind::row(star())));
    }

    #[test]
    fn stability_on_samples() {
        // normalize . embed is the identity on normal forms.
        let k = Kind::arrow(star(), star());
        let samples = vec![
            (NormalType::Lam(star(), Box::new(NormalType::Neutral(Neutral::var(0)))), k),
            (NormalType::Label(lbl("x")), Kind::Label),
            (
                NormalType::Pi(Box::new(NormalType::Row(vec![(
                    lbl("a"),
                    NormalType::Neutral(Neutral::var(0)),
                )]))),
                star(),
            ),
        ];
        for (nf, kind) in samples {
            let delta = vec![star()];
            assert_eq!(norm(&delta, &embed(&nf), &kind), nf);
        }
    }

    #[test]
    fn map_pushes_into_complement() {
        // Map f (r - {'a := t}) == Map f r - Map f {'a := t} for neutral r.
        let delta = vec![star(), Kind::arrow(star(), star()), Kind::row(star())];
        // innermost last: r idx 0, f idx 1, t idx 2
        let r = Type::Var(0);
        let f = Type::Var(1);
        let t = Type::Var(2);
        let lhs = Type::MapApp(
            Box::new(f.clone()),
            Box::new(Type::Compl(
                Box::new(r.clone()),
                Box::new(Type::Row(vec![(lbl("a"), t.clone())])),
            )),
        );
        let rhs = Type::Compl(
            Box::new(Type::MapApp(Box::new(f.clone()), Box::new(r))),
            Box::new(Type::MapApp(
                Box::new(f),
                Box::new(Type::Row(vec![(lbl("a"), t)])),
            )),
        );
        let k = Kind::row(star());
        assert_eq!(norm(&delta, &lhs, &k), norm(&delta, &rhs, &k));
    }
}
