//! Core syntax: kinds, types, normal types, predicates, terms, evidence,
//! index maps, and the contexts they live in.
//!
//! Type and term variables are de Bruijn indices. Contexts are vectors with
//! the innermost binder at the end, so `Var(i)` resolves to
//! `ctx[ctx.len() - 1 - i]`.

use std::fmt;
use std::rc::Rc;

/// Kinds classify types: the ground kinds `*` and `L`, row kinds `R[k]`,
/// and arrow kinds. `Meta` only appears during kind inference and never
/// survives elaboration.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Star,
    Label,
    Row(Box<Kind>),
    Arrow(Box<Kind>, Box<Kind>),
    Meta(u32),
}

impl Kind {
    pub fn row(elem: Kind) -> Kind {
        Kind::Row(Box::new(elem))
    }

    pub fn arrow(dom: Kind, cod: Kind) -> Kind {
        Kind::Arrow(Box::new(dom), Box::new(cod))
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, Kind::Star | Kind::Label)
    }

    pub fn has_meta(&self) -> bool {
        match self {
            Kind::Star | Kind::Label => false,
            Kind::Row(k) => k.has_meta(),
            Kind::Arrow(a, b) => a.has_meta() || b.has_meta(),
            Kind::Meta(_) => true,
        }
    }
}

/// A label literal. Ordering is lexicographic byte order on the text.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub Rc<str>);

impl Label {
    pub fn new(s: &str) -> Label {
        Label(Rc::from(s))
    }

    pub fn text(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "'{}", self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "'{}", self.0)
    }
}

/// Unification variable identifier (types).
pub type MetaId = u32;

/// Core types, as produced by elaboration. Binders are de Bruijn.
///
/// `Pi`/`Sigma` carry their element kind: `Pi(k) : R[k] -> k`. `MapApp` is
/// the kind-resolved application of a type operator across a row. `Meta`
/// is checker-internal and never escapes a checked declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Type {
    Var(usize),
    Arrow,
    Pi(Kind),
    Sigma(Kind),
    Mu,
    Forall(Kind, Box<Type>),
    Qual(Box<Pred>, Box<Type>),
    Lam(Kind, Box<Type>),
    App(Box<Type>, Box<Type>),
    /// Row literal; entries sorted strictly ascending by label.
    Row(Vec<(Label, Type)>),
    /// Singleton row whose label is a type (not necessarily a literal).
    LabeledSingleton(Box<Type>, Box<Type>),
    Label(Label),
    /// Singleton type `#t`; the kind of the inner type is recorded.
    Sing(Box<Type>, Kind),
    /// `Map f r`: map `f` pointwise across row `r`.
    MapApp(Box<Type>, Box<Type>),
    /// `r2 - r1`: relative complement (minuend, subtrahend).
    Compl(Box<Type>, Box<Type>),
    Meta(MetaId),
}

impl Type {
    pub fn app(f: Type, a: Type) -> Type {
        Type::App(Box::new(f), Box::new(a))
    }

    pub fn lam(k: Kind, body: Type) -> Type {
        Type::Lam(k, Box::new(body))
    }

    pub fn arrow(a: Type, b: Type) -> Type {
        Type::app(Type::app(Type::Arrow, a), b)
    }
}

/// Row predicates: containment and combination. The element kind of the
/// rows involved is recorded after elaboration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pred {
    Leq { lhs: Type, rhs: Type, kind: Kind },
    Plus { left: Type, right: Type, total: Type, kind: Kind },
}

/// Heads of neutral spines: a variable or an unsolved unification variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Head {
    Var(usize),
    Meta(MetaId),
}

/// A neutral type: a head applied to a spine of normal arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Neutral {
    pub head: Head,
    pub args: Vec<NormalType>,
}

impl Neutral {
    pub fn var(ix: usize) -> Neutral {
        Neutral { head: Head::Var(ix), args: vec![] }
    }
}

/// Beta-eta-map-normal types. Arrow-kinded normal types are lambdas;
/// neutral row-kinded types appear as inert identity maps; normal
/// complements have at least one non-literal side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormalType {
    /// Neutral at ground kind (or as a label).
    Neutral(Neutral),
    Arrow(Box<NormalType>, Box<NormalType>),
    Forall(Kind, Box<NormalType>),
    Qual(Box<NormalPred>, Box<NormalType>),
    Lam(Kind, Box<NormalType>),
    Mu(Box<NormalType>),
    /// Record type at kind `*`; argument is a normal row.
    Pi(Box<NormalType>),
    /// Variant type at kind `*`; argument is a normal row.
    Sigma(Box<NormalType>),
    /// Literal row, sorted strictly ascending by label.
    Row(Vec<(Label, NormalType)>),
    /// Singleton row labeled by a neutral label type.
    LabeledSingleton(Neutral, Box<NormalType>),
    /// Inert map over a neutral row.
    Map(Box<NormalType>, Neutral),
    /// Inert complement; at least one side non-literal.
    Compl(Box<NormalType>, Box<NormalType>),
    Label(Label),
    Sing(Box<NormalType>, Kind),
}

impl NormalType {
    pub fn unit_record() -> NormalType {
        NormalType::Pi(Box::new(NormalType::Row(vec![])))
    }

    pub fn as_row_lit(&self) -> Option<&[(Label, NormalType)]> {
        match self {
            NormalType::Row(es) => Some(es),
            _ => None,
        }
    }

    pub fn contains_meta(&self) -> bool {
        struct Found;
        fn neu(n: &Neutral) -> Result<(), Found> {
            if matches!(n.head, Head::Meta(_)) {
                return Err(Found);
            }
            n.args.iter().try_for_each(go)
        }
        fn go(t: &NormalType) -> Result<(), Found> {
            match t {
                NormalType::Neutral(n) => neu(n),
                NormalType::Arrow(a, b) | NormalType::Compl(a, b) => {
                    go(a)?;
                    go(b)
                }
                NormalType::Forall(_, b) | NormalType::Lam(_, b) => go(b),
                NormalType::Qual(p, b) => {
                    match &**p {
                        NormalPred::Leq { lhs, rhs, .. } => {
                            go(lhs)?;
                            go(rhs)?;
                        }
                        NormalPred::Plus { left, right, total, .. } => {
                            go(left)?;
                            go(right)?;
                            go(total)?;
                        }
                    }
                    go(b)
                }
                NormalType::Mu(b) | NormalType::Pi(b) | NormalType::Sigma(b) => go(b),
                NormalType::Row(es) => es.iter().try_for_each(|(_, t)| go(t)),
                NormalType::LabeledSingleton(n, t) => {
                    neu(n)?;
                    go(t)
                }
                NormalType::Map(f, n) => {
                    go(f)?;
                    neu(n)
                }
                NormalType::Label(_) => Ok(()),
                NormalType::Sing(t, _) => go(t),
            }
        }
        go(self).is_err()
    }
}

/// Predicates over normal types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormalPred {
    Leq { lhs: NormalType, rhs: NormalType, kind: Kind },
    Plus { left: NormalType, right: NormalType, total: NormalType, kind: Kind },
}

impl NormalPred {
    pub fn kind(&self) -> &Kind {
        match self {
            NormalPred::Leq { kind, .. } => kind,
            NormalPred::Plus { kind, .. } => kind,
        }
    }

    pub fn components(&self) -> Vec<&NormalType> {
        match self {
            NormalPred::Leq { lhs, rhs, .. } => vec![lhs, rhs],
            NormalPred::Plus { left, right, total, .. } => vec![left, right, total],
        }
    }
}

/// A strictly increasing partial map over naturals, stored as the vector of
/// target indices: entry `i` maps source position `i` to `map[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexMap(pub Vec<usize>);

impl IndexMap {
    pub fn identity(n: usize) -> IndexMap {
        IndexMap((0..n).collect())
    }

    pub fn empty() -> IndexMap {
        IndexMap(vec![])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.0.windows(2).all(|w| w[0] < w[1])
    }

    pub fn range_contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Position `j` with `self[j] = i`, if any.
    pub fn preimage(&self, i: usize) -> Option<usize> {
        self.0.binary_search(&i).ok()
    }

    /// Composition locating the source of `self` in the target of `outer`:
    /// `(outer . self)[i] = outer[self[i]]`.
    pub fn compose(&self, outer: &IndexMap) -> IndexMap {
        IndexMap(self.0.iter().map(|&i| outer.get(i)).collect())
    }
}

/// Term constants. `Syn`/`Ana` are kind-indexed families; the kind is fixed
/// at elaboration via their singleton argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Const {
    Prj,
    Concat,
    Inj,
    Branch,
    Syn,
    Ana,
    In,
    Out,
    Fix,
}

impl Const {
    pub fn name(self) -> &'static str {
        match self {
            Const::Prj => "prj",
            Const::Concat => "++",
            Const::Inj => "inj",
            Const::Branch => "|",
            Const::Syn => "syn",
            Const::Ana => "ana",
            Const::In => "in",
            Const::Out => "out",
            Const::Fix => "fix",
        }
    }

    pub fn from_name(s: &str) -> Option<Const> {
        Some(match s {
            "prj" => Const::Prj,
            "inj" => Const::Inj,
            "syn" => Const::Syn,
            "ana" => Const::Ana,
            "in" => Const::In,
            "out" => Const::Out,
            "fix" => Const::Fix,
            _ => return None,
        })
    }

    /// Number of term arguments in the constant's scheme.
    pub fn term_arity(self) -> usize {
        match self {
            Const::Prj | Const::Inj | Const::In | Const::Out | Const::Fix => 1,
            Const::Concat | Const::Syn => 2,
            Const::Branch | Const::Ana => 3,
        }
    }
}

/// Record (`Pi`) or variant (`Sigma`) flavor of label intro/elim forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    Record,
    Variant,
}

/// Evidence for row predicates. Constructors carry the row or predicate
/// annotations required to reduce and re-check them without a separate
/// derivation: `LeqRefl`/`PlusEmpty*` record the row whose size drives the
/// identity map, `Trans` records the middle row, `PlusL`/`PlusR` record the
/// dropped component, and the map rules record the operator and inner
/// predicate. Row annotations also carry their element kind so they can be
/// renormalized under type substitution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evidence {
    /// De Bruijn reference into the predicate context.
    Var(usize),
    Trans(Box<Evidence>, Box<Evidence>, NormalType, Kind),
    Incl(IndexMap),
    Comb(IndexMap, IndexMap),
    LeqRefl(NormalType, Kind),
    LeqMap { f: NormalType, cod: Kind, inner_pred: Box<NormalPred>, inner: Box<Evidence> },
    PlusL(Box<Evidence>, NormalType, Kind),
    PlusR(Box<Evidence>, NormalType, Kind),
    PlusEmptyL(NormalType, Kind),
    PlusEmptyR(NormalType, Kind),
    PlusMap { f: NormalType, cod: Kind, inner_pred: Box<NormalPred>, inner: Box<Evidence> },
    ComplL(Box<Evidence>),
    ComplR(Box<Evidence>),
    /// Unsolved hole; checker-internal, replaced during zonking.
    Hole(u32),
}

impl Evidence {
    pub fn is_value(&self) -> bool {
        matches!(self, Evidence::Incl(_) | Evidence::Comb(_, _))
    }
}

/// Elaborated terms, extended with the runtime record/variant literals.
/// All embedded types are normal. `Global` references a previously checked
/// top-level definition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(usize),
    Global(usize),
    Const(Const),
    Lam(NormalType, Box<Term>),
    App(Box<Term>, Box<Term>),
    TyLam(Kind, Box<Term>),
    TyApp(Box<Term>, NormalType, Kind),
    EvLam(Box<NormalPred>, Box<Term>),
    EvApp(Box<Term>, Evidence),
    /// Singleton value `#t`; carries the inner type's kind.
    Sing(NormalType, Kind),
    /// `lab := payload`; the payload's type is recorded for the row
    /// annotation of the literal it reduces to.
    Intro(Flavor, Box<Term>, Box<Term>, NormalType),
    /// `target / lab`.
    Elim(Flavor, Box<Term>, Box<Term>),
    RecordLit { row: Vec<(Label, NormalType)>, fields: Vec<Term> },
    VariantLit { row: Vec<(Label, NormalType)>, tag: usize, payload: Box<Term> },
}

impl Term {
    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }
}

/// The three contexts: kinds for type variables, predicate assumptions for
/// evidence variables, and types for term variables. Innermost binder last.
#[derive(Clone, Debug, Default)]
pub struct Contexts {
    pub delta: Vec<Kind>,
    pub phi: Vec<NormalPred>,
    pub gamma: Vec<NormalType>,
}

impl Contexts {
    pub fn new() -> Contexts {
        Contexts::default()
    }

    pub fn lookup_kind(&self, ix: usize) -> Option<&Kind> {
        self.delta.get(self.delta.len().checked_sub(1 + ix)?)
    }

    pub fn lookup_pred(&self, ix: usize) -> Option<&NormalPred> {
        self.phi.get(self.phi.len().checked_sub(1 + ix)?)
    }

    pub fn lookup_type(&self, ix: usize) -> Option<&NormalType> {
        self.gamma.get(self.gamma.len().checked_sub(1 + ix)?)
    }
}

/// Insert `(label, ty)` into a sorted row, keeping entries strictly
/// ascending. Duplicate labels are rejected: rows require distinct labels.
pub fn row_insert_sorted<T>(
    entries: &mut Vec<(Label, T)>,
    label: Label,
    ty: T,
) -> Result<(), Label> {
    match entries.binary_search_by(|(l, _)| l.cmp(&label)) {
        Ok(_) => Err(label),
        Err(pos) => {
            entries.insert(pos, (label, ty));
            Ok(())
        }
    }
}

/// Shift free type variables at or above `cutoff` by `amount`.
///
/// Panics if an index would drop below zero: that is an internal invariant
/// breach, never a user error.
pub fn shift_type(t: &Type, cutoff: usize, amount: isize) -> Type {
    fn adjust(ix: usize, cutoff: usize, amount: isize) -> usize {
        if ix < cutoff {
            ix
        } else {
            let shifted = ix as isize + amount;
            assert!(shifted >= cutoff as isize, "shift_type: index underflow");
            shifted as usize
        }
    }
    match t {
        Type::Var(ix) => Type::Var(adjust(*ix, cutoff, amount)),
        Type::Arrow | Type::Mu | Type::Label(_) | Type::Meta(_) => t.clone(),
        Type::Pi(k) => Type::Pi(k.clone()),
        Type::Sigma(k) => Type::Sigma(k.clone()),
        Type::Forall(k, b) => Type::Forall(k.clone(), Box::new(shift_type(b, cutoff + 1, amount))),
        Type::Qual(p, b) => Type::Qual(
            Box::new(shift_pred(p, cutoff, amount)),
            Box::new(shift_type(b, cutoff, amount)),
        ),
        Type::Lam(k, b) => Type::Lam(k.clone(), Box::new(shift_type(b, cutoff + 1, amount))),
        Type::App(f, a) => Type::app(shift_type(f, cutoff, amount), shift_type(a, cutoff, amount)),
        Type::Row(es) => Type::Row(
            es.iter()
                .map(|(l, t)| (l.clone(), shift_type(t, cutoff, amount)))
                .collect(),
        ),
        Type::LabeledSingleton(l, t) => Type::LabeledSingleton(
            Box::new(shift_type(l, cutoff, amount)),
            Box::new(shift_type(t, cutoff, amount)),
        ),
        Type::Sing(t, k) => Type::Sing(Box::new(shift_type(t, cutoff, amount)), k.clone()),
        Type::MapApp(f, r) => Type::MapApp(
            Box::new(shift_type(f, cutoff, amount)),
            Box::new(shift_type(r, cutoff, amount)),
        ),
        Type::Compl(a, b) => Type::Compl(
            Box::new(shift_type(a, cutoff, amount)),
            Box::new(shift_type(b, cutoff, amount)),
        ),
    }
}

pub fn shift_pred(p: &Pred, cutoff: usize, amount: isize) -> Pred {
    match p {
        Pred::Leq { lhs, rhs, kind } => Pred::Leq {
            lhs: shift_type(lhs, cutoff, amount),
            rhs: shift_type(rhs, cutoff, amount),
            kind: kind.clone(),
        },
        Pred::Plus { left, right, total, kind } => Pred::Plus {
            left: shift_type(left, cutoff, amount),
            right: shift_type(right, cutoff, amount),
            total: shift_type(total, cutoff, amount),
            kind: kind.clone(),
        },
    }
}

/// Substitute `arg` for type variable `j` in `body`, decrementing the free
/// variables above `j`. Capture-avoiding; total on well-formed input.
pub fn subst_type_at(body: &Type, j: usize, arg: &Type) -> Type {
    match body {
        Type::Var(ix) => {
            if *ix == j {
                shift_type(arg, 0, j as isize)
            } else if *ix > j {
                Type::Var(ix - 1)
            } else {
                Type::Var(*ix)
            }
        }
        Type::Arrow | Type::Mu | Type::Label(_) | Type::Meta(_) => body.clone(),
        Type::Pi(k) => Type::Pi(k.clone()),
        Type::Sigma(k) => Type::Sigma(k.clone()),
        Type::Forall(k, b) => Type::Forall(k.clone(), Box::new(subst_type_at(b, j + 1, arg))),
        Type::Qual(p, b) => Type::Qual(
            Box::new(subst_pred_at(p, j, arg)),
            Box::new(subst_type_at(b, j, arg)),
        ),
        Type::Lam(k, b) => Type::Lam(k.clone(), Box::new(subst_type_at(b, j + 1, arg))),
        Type::App(f, a) => Type::app(subst_type_at(f, j, arg), subst_type_at(a, j, arg)),
        Type::Row(es) => Type::Row(
            es.iter()
                .map(|(l, t)| (l.clone(), subst_type_at(t, j, arg)))
                .collect(),
        ),
        Type::LabeledSingleton(l, t) => Type::LabeledSingleton(
            Box::new(subst_type_at(l, j, arg)),
            Box::new(subst_type_at(t, j, arg)),
        ),
        Type::Sing(t, k) => Type::Sing(Box::new(subst_type_at(t, j, arg)), k.clone()),
        Type::MapApp(f, r) => Type::MapApp(
            Box::new(subst_type_at(f, j, arg)),
            Box::new(subst_type_at(r, j, arg)),
        ),
        Type::Compl(a, b) => Type::Compl(
            Box::new(subst_type_at(a, j, arg)),
            Box::new(subst_type_at(b, j, arg)),
        ),
    }
}

pub fn subst_pred_at(p: &Pred, j: usize, arg: &Type) -> Pred {
    match p {
        Pred::Leq { lhs, rhs, kind } => Pred::Leq {
            lhs: subst_type_at(lhs, j, arg),
            rhs: subst_type_at(rhs, j, arg),
            kind: kind.clone(),
        },
        Pred::Plus { left, right, total, kind } => Pred::Plus {
            left: subst_type_at(left, j, arg),
            right: subst_type_at(right, j, arg),
            total: subst_type_at(total, j, arg),
            kind: kind.clone(),
        },
    }
}

/// Substitute `arg` for type variable 0, decrementing outer indices.
pub fn subst_type(body: &Type, arg: &Type) -> Type {
    subst_type_at(body, 0, arg)
}

/// Shift free type variables in a normal type. Used to transport
/// metavariable solutions between depths; never creates redexes.
pub fn shift_normal(t: &NormalType, cutoff: usize, amount: isize) -> NormalType {
    fn neu(n: &Neutral, cutoff: usize, amount: isize) -> Neutral {
        let head = match &n.head {
            Head::Var(ix) => {
                if *ix < cutoff {
                    Head::Var(*ix)
                } else {
                    let shifted = *ix as isize + amount;
                    assert!(shifted >= cutoff as isize, "shift_normal: index underflow");
                    Head::Var(shifted as usize)
                }
            }
            Head::Meta(m) => Head::Meta(*m),
        };
        Neutral {
            head,
            args: n.args.iter().map(|a| shift_normal(a, cutoff, amount)).collect(),
        }
    }
    match t {
        NormalType::Neutral(n) => NormalType::Neutral(neu(n, cutoff, amount)),
        NormalType::Arrow(a, b) => NormalType::Arrow(
            Box::new(shift_normal(a, cutoff, amount)),
            Box::new(shift_normal(b, cutoff, amount)),
        ),
        NormalType::Forall(k, b) => {
            NormalType::Forall(k.clone(), Box::new(shift_normal(b, cutoff + 1, amount)))
        }
        NormalType::Qual(p, b) => NormalType::Qual(
            Box::new(shift_normal_pred(p, cutoff, amount)),
            Box::new(shift_normal(b, cutoff, amount)),
        ),
        NormalType::Lam(k, b) => {
            NormalType::Lam(k.clone(), Box::new(shift_normal(b, cutoff + 1, amount)))
        }
        NormalType::Mu(b) => NormalType::Mu(Box::new(shift_normal(b, cutoff, amount))),
        NormalType::Pi(b) => NormalType::Pi(Box::new(shift_normal(b, cutoff, amount))),
        NormalType::Sigma(b) => NormalType::Sigma(Box::new(shift_normal(b, cutoff, amount))),
        NormalType::Row(es) => NormalType::Row(
            es.iter()
                .map(|(l, t)| (l.clone(), shift_normal(t, cutoff, amount)))
                .collect(),
        ),
        NormalType::LabeledSingleton(n, t) => NormalType::LabeledSingleton(
            neu(n, cutoff, amount),
            Box::new(shift_normal(t, cutoff, amount)),
        ),
        NormalType::Map(f, n) => {
            NormalType::Map(Box::new(shift_normal(f, cutoff, amount)), neu(n, cutoff, amount))
        }
        NormalType::Compl(a, b) => NormalType::Compl(
            Box::new(shift_normal(a, cutoff, amount)),
            Box::new(shift_normal(b, cutoff, amount)),
        ),
        NormalType::Label(l) => NormalType::Label(l.clone()),
        NormalType::Sing(t, k) => {
            NormalType::Sing(Box::new(shift_normal(t, cutoff, amount)), k.clone())
        }
    }
}

pub fn shift_normal_pred(p: &NormalPred, cutoff: usize, amount: isize) -> NormalPred {
    match p {
        NormalPred::Leq { lhs, rhs, kind } => NormalPred::Leq {
            lhs: shift_normal(lhs, cutoff, amount),
            rhs: shift_normal(rhs, cutoff, amount),
            kind: kind.clone(),
        },
        NormalPred::Plus { left, right, total, kind } => NormalPred::Plus {
            left: shift_normal(left, cutoff, amount),
            right: shift_normal(right, cutoff, amount),
            total: shift_normal(total, cutoff, amount),
            kind: kind.clone(),
        },
    }
}

/// Shift free evidence variables at or above `cutoff` by `amount`.
pub fn shift_evidence(q: &Evidence, cutoff: usize, amount: isize) -> Evidence {
    match q {
        Evidence::Var(ix) => {
            if *ix < cutoff {
                Evidence::Var(*ix)
            } else {
                let shifted = *ix as isize + amount;
                assert!(shifted >= cutoff as isize, "shift_evidence: index underflow");
                Evidence::Var(shifted as usize)
            }
        }
        Evidence::Incl(_)
        | Evidence::Comb(_, _)
        | Evidence::LeqRefl(_, _)
        | Evidence::PlusEmptyL(_, _)
        | Evidence::PlusEmptyR(_, _)
        | Evidence::Hole(_) => q.clone(),
        Evidence::Trans(a, b, mid, k) => Evidence::Trans(
            Box::new(shift_evidence(a, cutoff, amount)),
            Box::new(shift_evidence(b, cutoff, amount)),
            mid.clone(),
            k.clone(),
        ),
        Evidence::LeqMap { f, cod, inner_pred, inner } => Evidence::LeqMap {
            f: f.clone(),
            cod: cod.clone(),
            inner_pred: inner_pred.clone(),
            inner: Box::new(shift_evidence(inner, cutoff, amount)),
        },
        Evidence::PlusL(a, r, k) => {
            Evidence::PlusL(Box::new(shift_evidence(a, cutoff, amount)), r.clone(), k.clone())
        }
        Evidence::PlusR(a, l, k) => {
            Evidence::PlusR(Box::new(shift_evidence(a, cutoff, amount)), l.clone(), k.clone())
        }
        Evidence::PlusMap { f, cod, inner_pred, inner } => Evidence::PlusMap {
            f: f.clone(),
            cod: cod.clone(),
            inner_pred: inner_pred.clone(),
            inner: Box::new(shift_evidence(inner, cutoff, amount)),
        },
        Evidence::ComplL(a) => {
            Evidence::ComplL(Box::new(shift_evidence(a, cutoff, amount)))
        }
        Evidence::ComplR(a) => {
            Evidence::ComplR(Box::new(shift_evidence(a, cutoff, amount)))
        }
    }
}

/// Shift free term variables at or above `cutoff` by `amount`.
pub fn shift_term(t: &Term, cutoff: usize, amount: isize) -> Term {
    match t {
        Term::Var(ix) => {
            if *ix < cutoff {
                Term::Var(*ix)
            } else {
                let shifted = *ix as isize + amount;
                assert!(shifted >= cutoff as isize, "shift_term: index underflow");
                Term::Var(shifted as usize)
            }
        }
        Term::Global(_) | Term::Const(_) | Term::Sing(_, _) => t.clone(),
        Term::Lam(ty, b) => Term::Lam(ty.clone(), Box::new(shift_term(b, cutoff + 1, amount))),
        Term::App(f, a) => Term::app(shift_term(f, cutoff, amount), shift_term(a, cutoff, amount)),
        Term::TyLam(k, b) => Term::TyLam(k.clone(), Box::new(shift_term(b, cutoff, amount))),
        Term::TyApp(f, ty, k) => {
            Term::TyApp(Box::new(shift_term(f, cutoff, amount)), ty.clone(), k.clone())
        }
        Term::EvLam(p, b) => Term::EvLam(p.clone(), Box::new(shift_term(b, cutoff, amount))),
        Term::EvApp(f, q) => Term::EvApp(Box::new(shift_term(f, cutoff, amount)), q.clone()),
        Term::Intro(fl, l, m, ann) => Term::Intro(
            *fl,
            Box::new(shift_term(l, cutoff, amount)),
            Box::new(shift_term(m, cutoff, amount)),
            ann.clone(),
        ),
        Term::Elim(fl, m, l) => Term::Elim(
            *fl,
            Box::new(shift_term(m, cutoff, amount)),
            Box::new(shift_term(l, cutoff, amount)),
        ),
        Term::RecordLit { row, fields } => Term::RecordLit {
            row: row.clone(),
            fields: fields.iter().map(|f| shift_term(f, cutoff, amount)).collect(),
        },
        Term::VariantLit { row, tag, payload } => Term::VariantLit {
            row: row.clone(),
            tag: *tag,
            payload: Box::new(shift_term(payload, cutoff, amount)),
        },
    }
}

/// Substitute `arg` for term variable `j` in `body`, decrementing outer
/// indices. Standard capture-avoiding substitution.
pub fn subst_term_at(body: &Term, j: usize, arg: &Term) -> Term {
    match body {
        Term::Var(ix) => {
            if *ix == j {
                shift_term(arg, 0, j as isize)
            } else if *ix > j {
                Term::Var(ix - 1)
            } else {
                Term::Var(*ix)
            }
        }
        Term::Global(_) | Term::Const(_) | Term::Sing(_, _) => body.clone(),
        Term::Lam(ty, b) => Term::Lam(ty.clone(), Box::new(subst_term_at(b, j + 1, arg))),
        Term::App(f, a) => Term::app(subst_term_at(f, j, arg), subst_term_at(a, j, arg)),
        Term::TyLam(k, b) => Term::TyLam(k.clone(), Box::new(subst_term_at(b, j, arg))),
        Term::TyApp(f, ty, k) => {
            Term::TyApp(Box::new(subst_term_at(f, j, arg)), ty.clone(), k.clone())
        }
        Term::EvLam(p, b) => Term::EvLam(p.clone(), Box::new(subst_term_at(b, j, arg))),
        Term::EvApp(f, q) => Term::EvApp(Box::new(subst_term_at(f, j, arg)), q.clone()),
        Term::Intro(fl, l, m, ann) => Term::Intro(
            *fl,
            Box::new(subst_term_at(l, j, arg)),
            Box::new(subst_term_at(m, j, arg)),
            ann.clone(),
        ),
        Term::Elim(fl, m, l) => Term::Elim(
            *fl,
            Box::new(subst_term_at(m, j, arg)),
            Box::new(subst_term_at(l, j, arg)),
        ),
        Term::RecordLit { row, fields } => Term::RecordLit {
            row: row.clone(),
            fields: fields.iter().map(|f| subst_term_at(f, j, arg)).collect(),
        },
        Term::VariantLit { row, tag, payload } => Term::VariantLit {
            row: row.clone(),
            tag: *tag,
            payload: Box::new(subst_term_at(payload, j, arg)),
        },
    }
}

pub fn subst_term(body: &Term, arg: &Term) -> Term {
    subst_term_at(body, 0, arg)
}
