//! Name resolution: surface declarations to de Bruijn core syntax.
//!
//! Type binders become indices immediately; top-level type names are
//! substituted by their elaborated definitions (they are closed and
//! non-recursive). Types embedded in terms stay in surface form until the
//! checker elaborates them, because implicit binders introduced while
//! checking would otherwise shift their indices; the checker resolves them
//! against its own scope, through [`resolve_type_in_scope`].

use std::collections::HashMap;
use std::fmt;

use crate::kind::KindState;
use crate::surface::{SKind, SPred, STerm, SType, Span};
use crate::syntax::*;

#[derive(Debug, Clone)]
pub struct ResolveError {
    pub span: Span,
    pub msg: String,
}

impl fmt::Display for ResolveError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}: error: {}", self.span, self.msg)
    }
}

impl std::error::Error for ResolveError {}

fn err<T>(span: Span, msg: impl Into<String>) -> Result<T, ResolveError> {
    Err(ResolveError { span, msg: msg.into() })
}

/// A checked top-level type definition.
#[derive(Debug, Clone)]
pub struct TypeGlobal {
    pub name: String,
    pub declared_kind: Option<Kind>,
    pub def: Option<crate::kind::KindedType>,
}

/// A checked top-level term definition.
#[derive(Debug, Clone)]
pub struct TermGlobal {
    pub name: String,
    pub scheme: Option<NormalType>,
    pub def: Option<Term>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlobalRef {
    Type(usize),
    Term(usize),
}

/// All checked top-level declarations, in order.
#[derive(Debug, Default)]
pub struct GlobalEnv {
    pub types: Vec<TypeGlobal>,
    pub terms: Vec<TermGlobal>,
    by_name: HashMap<String, GlobalRef>,
}

impl GlobalEnv {
    pub fn new() -> GlobalEnv {
        GlobalEnv::default()
    }

    pub fn lookup(&self, name: &str) -> Option<GlobalRef> {
        self.by_name.get(name).copied()
    }

    pub fn declare_type(&mut self, name: &str, kind: Kind) -> Result<usize, String> {
        match self.lookup(name) {
            Some(GlobalRef::Type(i)) if self.types[i].def.is_none() => {
                Err(format!("duplicate signature for type {}", name))
            }
            Some(_) => Err(format!("duplicate top-level name {}", name)),
            None => {
                let i = self.types.len();
                self.types.push(TypeGlobal {
                    name: name.to_string(),
                    declared_kind: Some(kind),
                    def: None,
                });
                self.by_name.insert(name.to_string(), GlobalRef::Type(i));
                Ok(i)
            }
        }
    }

    pub fn define_type(
        &mut self,
        name: &str,
        def: crate::kind::KindedType,
    ) -> Result<usize, String> {
        match self.lookup(name) {
            Some(GlobalRef::Type(i)) => {
                if self.types[i].def.is_some() {
                    return Err(format!("duplicate definition of type {}", name));
                }
                self.types[i].def = Some(def);
                Ok(i)
            }
            Some(GlobalRef::Term(_)) => Err(format!("{} is already a term name", name)),
            None => {
                let i = self.types.len();
                self.types.push(TypeGlobal {
                    name: name.to_string(),
                    declared_kind: None,
                    def: Some(def),
                });
                self.by_name.insert(name.to_string(), GlobalRef::Type(i));
                Ok(i)
            }
        }
    }

    pub fn declare_term(&mut self, name: &str, scheme: NormalType) -> Result<usize, String> {
        match self.lookup(name) {
            Some(_) => Err(format!("duplicate top-level name {}", name)),
            None => {
                let i = self.terms.len();
                self.terms.push(TermGlobal {
                    name: name.to_string(),
                    scheme: Some(scheme),
                    def: None,
                });
                self.by_name.insert(name.to_string(), GlobalRef::Term(i));
                Ok(i)
            }
        }
    }

    pub fn define_term(
        &mut self,
        name: &str,
        scheme: NormalType,
        def: Term,
    ) -> Result<usize, String> {
        match self.lookup(name) {
            Some(GlobalRef::Term(i)) => {
                if self.terms[i].def.is_some() {
                    return Err(format!("duplicate definition of {}", name));
                }
                self.terms[i].scheme = Some(scheme);
                self.terms[i].def = Some(def);
                Ok(i)
            }
            Some(GlobalRef::Type(_)) => Err(format!("{} is already a type name", name)),
            None => {
                let i = self.terms.len();
                self.terms.push(TermGlobal {
                    name: name.to_string(),
                    scheme: Some(scheme),
                    def: Some(def),
                });
                self.by_name.insert(name.to_string(), GlobalRef::Term(i));
                Ok(i)
            }
        }
    }

    pub fn term_names(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.name.clone()).collect()
    }
}

/// Resolved term: term variables are de Bruijn, globals and constants are
/// identified, operators are desugared to constant applications, and
/// embedded types remain surface syntax.
#[derive(Debug, Clone, PartialEq)]
pub enum RTerm {
    Var(usize),
    Global(usize),
    Const(Const),
    Lam(String, Box<RTerm>),
    App(Box<RTerm>, Box<RTerm>),
    TyLam(String, Box<RTerm>),
    TyApp(Box<RTerm>, SType),
    Sing(SType),
    Intro(Box<RTerm>, Box<RTerm>),
    Elim(Box<RTerm>, Box<RTerm>),
}

/// Convert a surface kind.
pub fn resolve_kind(k: &SKind) -> Kind {
    match k {
        SKind::Star => Kind::Star,
        SKind::Label => Kind::Label,
        SKind::Row(e) => Kind::row(resolve_kind(e)),
        SKind::Arrow(a, b) => Kind::arrow(resolve_kind(a), resolve_kind(b)),
    }
}

/// Resolve a surface type against a local scope of type binder names
/// (innermost last) plus top-level type definitions. Unannotated binders
/// get fresh kind metavariables from `kinds`.
pub fn resolve_type_in_scope(
    ty: &SType,
    scope: &mut Vec<String>,
    globals: &GlobalEnv,
    kinds: &mut KindState,
) -> Result<Type, ResolveError> {
    match ty {
        SType::Var(name, span) => {
            if let Some(pos) = scope.iter().rposition(|n| n == name) {
                return Ok(Type::Var(scope.len() - 1 - pos));
            }
            match globals.lookup(name) {
                Some(GlobalRef::Type(i)) => match &globals.types[i].def {
                    Some(def) => Ok(shift_type(&def.ty, 0, scope.len() as isize)),
                    None => err(*span, format!("type {} is declared but not defined", name)),
                },
                Some(GlobalRef::Term(_)) => {
                    err(*span, format!("{} is a term, not a type", name))
                }
                None => err(*span, format!("unbound type identifier {}", name)),
            }
        }
        SType::Pi => Ok(Type::Pi(kinds.fresh())),
        SType::Sigma => Ok(Type::Sigma(kinds.fresh())),
        SType::Mu => Ok(Type::Mu),
        SType::Forall(binders, k, body) => {
            let kind = k.as_ref().map(resolve_kind);
            for b in binders {
                scope.push(b.clone());
            }
            let body = resolve_type_in_scope(body, scope, globals, kinds);
            for _ in binders {
                scope.pop();
            }
            let mut out = body?;
            for _ in binders.iter().rev() {
                let bk = kind.clone().unwrap_or_else(|| kinds.fresh());
                out = Type::Forall(bk, Box::new(out));
            }
            Ok(out)
        }
        SType::Lam(binders, body) => {
            for b in binders {
                scope.push(b.clone());
            }
            let body = resolve_type_in_scope(body, scope, globals, kinds);
            for _ in binders {
                scope.pop();
            }
            let mut out = body?;
            for _ in binders.iter().rev() {
                out = Type::Lam(kinds.fresh(), Box::new(out));
            }
            Ok(out)
        }
        SType::Qual(preds, body) => {
            let mut out = resolve_type_in_scope(body, scope, globals, kinds)?;
            for p in preds.iter().rev() {
                let rp = resolve_pred_in_scope(p, scope, globals, kinds)?;
                out = Type::Qual(Box::new(rp), Box::new(out));
            }
            Ok(out)
        }
        SType::Arrow(a, b) => Ok(Type::arrow(
            resolve_type_in_scope(a, scope, globals, kinds)?,
            resolve_type_in_scope(b, scope, globals, kinds)?,
        )),
        SType::App(f, a) => Ok(Type::app(
            resolve_type_in_scope(f, scope, globals, kinds)?,
            resolve_type_in_scope(a, scope, globals, kinds)?,
        )),
        SType::Row(entries) => {
            // All-literal labels form a sorted row literal; a single entry
            // with a variable label is a labeled singleton; anything else
            // is malformed.
            let all_literal = entries.iter().all(|(l, _)| matches!(l, SType::Label(_)));
            if all_literal {
                let mut row: Vec<(Label, Type)> = Vec::new();
                for (l, t) in entries {
                    let name = match l {
                        SType::Label(s) => Label::new(s),
                        _ => unreachable!(),
                    };
                    let rt = resolve_type_in_scope(t, scope, globals, kinds)?;
                    if row_insert_sorted(&mut row, name.clone(), rt).is_err() {
                        return err(
                            Span::ZERO,
                            format!("duplicate label {} in row", name),
                        );
                    }
                }
                Ok(Type::Row(row))
            } else if entries.len() == 1 {
                let (l, t) = &entries[0];
                let lt = resolve_type_in_scope(l, scope, globals, kinds)?;
                let tt = resolve_type_in_scope(t, scope, globals, kinds)?;
                Ok(Type::LabeledSingleton(Box::new(lt), Box::new(tt)))
            } else {
                err(
                    Span::ZERO,
                    "a row with a variable label must have exactly one entry".to_string(),
                )
            }
        }
        SType::Label(l) => Ok(Type::Label(Label::new(l))),
        SType::Sing(inner) => {
            let t = resolve_type_in_scope(inner, scope, globals, kinds)?;
            Ok(Type::Sing(Box::new(t), kinds.fresh()))
        }
        SType::Compl(a, b) => Ok(Type::Compl(
            Box::new(resolve_type_in_scope(a, scope, globals, kinds)?),
            Box::new(resolve_type_in_scope(b, scope, globals, kinds)?),
        )),
    }
}

pub fn resolve_pred_in_scope(
    p: &SPred,
    scope: &mut Vec<String>,
    globals: &GlobalEnv,
    kinds: &mut KindState,
) -> Result<Pred, ResolveError> {
    match p {
        SPred::Leq(a, b) => Ok(Pred::Leq {
            lhs: resolve_type_in_scope(a, scope, globals, kinds)?,
            rhs: resolve_type_in_scope(b, scope, globals, kinds)?,
            kind: kinds.fresh(),
        }),
        SPred::Plus(a, b, c) => Ok(Pred::Plus {
            left: resolve_type_in_scope(a, scope, globals, kinds)?,
            right: resolve_type_in_scope(b, scope, globals, kinds)?,
            total: resolve_type_in_scope(c, scope, globals, kinds)?,
            kind: kinds.fresh(),
        }),
    }
}

/// Resolve a top-level type (no local binders in scope).
pub fn resolve_type(
    ty: &SType,
    globals: &GlobalEnv,
    kinds: &mut KindState,
) -> Result<Type, ResolveError> {
    resolve_type_in_scope(ty, &mut Vec::new(), globals, kinds)
}

/// Resolve a term: bind lambda variables, identify globals and constants,
/// desugar `++` and `|` to constant applications. Embedded types are left
/// surface.
pub fn resolve_term(
    t: &STerm,
    scope: &mut Vec<String>,
    globals: &GlobalEnv,
) -> Result<RTerm, ResolveError> {
    match t {
        STerm::Var(name, span) => {
            if let Some(pos) = scope.iter().rposition(|n| n == name) {
                return Ok(RTerm::Var(scope.len() - 1 - pos));
            }
            if let Some(c) = Const::from_name(name) {
                return Ok(RTerm::Const(c));
            }
            match globals.lookup(name) {
                Some(GlobalRef::Term(i)) => {
                    if globals.terms[i].def.is_none() && globals.terms[i].scheme.is_none() {
                        err(*span, format!("{} is declared but not defined", name))
                    } else {
                        Ok(RTerm::Global(i))
                    }
                }
                Some(GlobalRef::Type(_)) => {
                    err(*span, format!("{} is a type, not a term", name))
                }
                None => err(*span, format!("unbound identifier {}", name)),
            }
        }
        STerm::Lam(binders, body) => {
            for b in binders {
                scope.push(b.clone());
            }
            let body = resolve_term(body, scope, globals);
            for _ in binders {
                scope.pop();
            }
            let mut out = body?;
            for b in binders.iter().rev() {
                out = RTerm::Lam(b.clone(), Box::new(out));
            }
            Ok(out)
        }
        STerm::TyLam(binders, body) => {
            let mut out = resolve_term(body, scope, globals)?;
            for b in binders.iter().rev() {
                out = RTerm::TyLam(b.clone(), Box::new(out));
            }
            Ok(out)
        }
        STerm::App(f, a) => Ok(RTerm::App(
            Box::new(resolve_term(f, scope, globals)?),
            Box::new(resolve_term(a, scope, globals)?),
        )),
        STerm::TyApp(f, ty) => Ok(RTerm::TyApp(
            Box::new(resolve_term(f, scope, globals)?),
            ty.clone(),
        )),
        STerm::Sing(ty) => Ok(RTerm::Sing(ty.clone())),
        STerm::Intro(l, m) => Ok(RTerm::Intro(
            Box::new(resolve_term(l, scope, globals)?),
            Box::new(resolve_term(m, scope, globals)?),
        )),
        STerm::Elim(m, l) => Ok(RTerm::Elim(
            Box::new(resolve_term(m, scope, globals)?),
            Box::new(resolve_term(l, scope, globals)?),
        )),
        STerm::Concat(a, b) => Ok(RTerm::App(
            Box::new(RTerm::App(
                Box::new(RTerm::Const(Const::Concat)),
                Box::new(resolve_term(a, scope, globals)?),
            )),
            Box::new(resolve_term(b, scope, globals)?),
        )),
        STerm::Branch(a, b) => Ok(RTerm::App(
            Box::new(RTerm::App(
                Box::new(RTerm::Const(Const::Branch)),
                Box::new(resolve_term(a, scope, globals)?),
            )),
            Box::new(resolve_term(b, scope, globals)?),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface;

    fn resolve_str(src: &str) -> RTerm {
        let t = surface::parse_term(src).unwrap();
        resolve_term(&t, &mut Vec::new(), &GlobalEnv::new()).unwrap()
    }

    #[test]
    fn identity_lambda() {
        assert_eq!(
            resolve_str("\\x. x"),
            RTerm::Lam("x".into(), Box::new(RTerm::Var(0)))
        );
    }

    #[test]
    fn const_function() {
        assert_eq!(
            resolve_str("\\x y. x"),
            RTerm::Lam(
                "x".into(),
                Box::new(RTerm::Lam("y".into(), Box::new(RTerm::Var(1))))
            )
        );
    }

    #[test]
    fn constants_resolve() {
        match resolve_str("\\r. prj r") {
            RTerm::Lam(_, body) => match *body {
                RTerm::App(f, a) => {
                    assert_eq!(*f, RTerm::Const(Const::Prj));
                    assert_eq!(*a, RTerm::Var(0));
                }
                other => panic!("expected application, got {:?}", other),
            },
            other => panic!("expected lambda, got {:?}", other),
        }
    }

    #[test]
    fn branch_desugars_to_constant() {
        match resolve_str("\\f g. f | g") {
            RTerm::Lam(_, body) => match *body {
                RTerm::Lam(_, body) => match *body {
                    RTerm::App(fa, g) => {
                        assert_eq!(*g, RTerm::Var(0));
                        match *fa {
                            RTerm::App(c, f) => {
                                assert_eq!(*c, RTerm::Const(Const::Branch));
                                assert_eq!(*f, RTerm::Var(1));
                            }
                            other => panic!("expected branch head, got {:?}", other),
                        }
                    }
                    other => panic!("expected application, got {:?}", other),
                },
                other => panic!("expected lambda, got {:?}", other),
            },
            other => panic!("expected lambda, got {:?}", other),
        }
    }

    #[test]
    fn unbound_identifier_errors() {
        let t = surface::parse_term("nope").unwrap();
        assert!(resolve_term(&t, &mut Vec::new(), &GlobalEnv::new()).is_err());
    }

    #[test]
    fn rows_sort_on_resolution() {
        let ty = surface::parse_type("{ 'b := Pi {}, 'a := Pi {} }").unwrap();
        let mut kinds = KindState::new();
        let t = resolve_type(&ty, &GlobalEnv::new(), &mut kinds).unwrap();
        match t {
            Type::Row(entries) => {
                let labels: Vec<&str> = entries.iter().map(|(l, _)| l.text()).collect();
                assert_eq!(labels, vec!["a", "b"]);
            }
            other => panic!("expected row, got {:?}", other),
        }
    }

    #[test]
    fn duplicate_labels_rejected() {
        let ty = surface::parse_type("{ 'a := Pi {}, 'a := Pi {} }").unwrap();
        let mut kinds = KindState::new();
        assert!(resolve_type(&ty, &GlobalEnv::new(), &mut kinds).is_err());
    }
}
