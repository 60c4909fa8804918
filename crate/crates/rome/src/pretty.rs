//! Printers for kinds, normal types, predicates, terms, and evidence.
//! De Bruijn indices are rendered with generated source-like names; values
//! print as construction expressions.

use crate::syntax::*;

pub fn kind(k: &Kind) -> String {
    match k {
        Kind::Star => "*".into(),
        Kind::Label => "L".into(),
        Kind::Row(e) => format!("R[{}]", kind(e)),
        Kind::Arrow(a, b) => {
            let lhs = match **a {
                Kind::Arrow(_, _) => format!("({})", kind(a)),
                _ => kind(a),
            };
            format!("{} -> {}", lhs, kind(b))
        }
        Kind::Meta(m) => format!("?k{}", m),
    }
}

/// Is this normal operator the eta-long identity at its kind?
fn is_eta_identity(f: &NormalType) -> bool {
    match f {
        NormalType::Lam(k, _) => *f == crate::norm::identity_normal(k),
        _ => false,
    }
}

/// Name supply for binders: a, b, ..., z, a1, b1, ...
fn var_name(i: usize) -> String {
    let letter = (b'a' + (i % 26) as u8) as char;
    let suffix = i / 26;
    if suffix == 0 {
        letter.to_string()
    } else {
        format!("{}{}", letter, suffix)
    }
}

struct TypePrinter {
    names: Vec<String>,
}

impl TypePrinter {
    fn lookup(&self, ix: usize) -> String {
        match self.names.len().checked_sub(1 + ix) {
            Some(pos) => self.names[pos].clone(),
            None => format!("_t{}", ix),
        }
    }

    fn fresh(&mut self) -> String {
        let name = var_name(self.names.len());
        self.names.push(name.clone());
        name
    }

    // Precedence: 0 top (forall/lambda/qual), 1 arrow, 2 compl, 3 app, 4 atom.
    fn ty(&mut self, t: &NormalType, min: u8) -> String {
        let (prec, s) = match t {
            NormalType::Neutral(n) => return self.neutral(n, min),
            NormalType::Arrow(a, b) => {
                (1, format!("{} -> {}", self.ty(a, 2), self.ty(b, 1)))
            }
            NormalType::Forall(k, b) => {
                let name = self.fresh();
                let s = format!("forall {} : {}. {}", name, kind(k), self.ty(b, 0));
                self.names.pop();
                (0, s)
            }
            NormalType::Qual(p, b) => {
                (0, format!("{} => {}", self.pred(p), self.ty(b, 1)))
            }
            NormalType::Lam(k, b) => {
                let name = self.fresh();
                let s = format!("\\ {} : {}. {}", name, kind(k), self.ty(b, 0));
                self.names.pop();
                (0, s)
            }
            NormalType::Mu(f) => (3, format!("Mu {}", self.ty(f, 4))),
            NormalType::Pi(r) => (3, format!("Pi {}", self.ty(r, 4))),
            NormalType::Sigma(r) => (3, format!("Sigma {}", self.ty(r, 4))),
            NormalType::Row(es) => {
                if es.is_empty() {
                    (4, "{}".to_string())
                } else {
                    let entries: Vec<String> = es
                        .iter()
                        .map(|(l, t)| format!("{} := {}", l, self.ty(t, 1)))
                        .collect();
                    (4, format!("{{ {} }}", entries.join(", ")))
                }
            }
            NormalType::LabeledSingleton(n, t) => {
                let l = self.neutral(n, 4);
                (4, format!("{{ {} := {} }}", l, self.ty(t, 1)))
            }
            NormalType::Map(f, n) => {
                // Identity maps are the normal form of bare row variables;
                // print them as the variable itself.
                if is_eta_identity(f) {
                    return self.neutral(n, min);
                }
                let s = format!("Map {} {}", self.ty(f, 4), self.neutral_atom(n));
                (3, s)
            }
            NormalType::Compl(a, b) => {
                (2, format!("{} - {}", self.ty(a, 2), self.ty(b, 3)))
            }
            NormalType::Label(l) => (4, format!("{}", l)),
            NormalType::Sing(t, _) => {
                let inner = match &**t {
                    NormalType::Label(l) => format!("#{}", l),
                    NormalType::Neutral(n) if n.args.is_empty() => {
                        format!("#{}", self.neutral(n, 4))
                    }
                    other => format!("#({})", self.ty(other, 0)),
                };
                (4, inner)
            }
        };
        if prec < min {
            format!("({})", s)
        } else {
            s
        }
    }

    fn neutral(&mut self, n: &Neutral, min: u8) -> String {
        let head = match &n.head {
            Head::Var(ix) => self.lookup(*ix),
            Head::Meta(m) => format!("?{}", m),
        };
        if n.args.is_empty() {
            head
        } else {
            let args: Vec<String> = n.args.iter().map(|a| self.ty(a, 4)).collect();
            let s = format!("{} {}", head, args.join(" "));
            if min > 3 {
                format!("({})", s)
            } else {
                s
            }
        }
    }

    fn neutral_atom(&mut self, n: &Neutral) -> String {
        self.neutral(n, 4)
    }

    fn pred(&mut self, p: &NormalPred) -> String {
        match p {
            NormalPred::Leq { lhs, rhs, .. } => {
                format!("{} < {}", self.ty(lhs, 2), self.ty(rhs, 2))
            }
            NormalPred::Plus { left, right, total, .. } => format!(
                "{} + {} ~ {}",
                self.ty(left, 2),
                self.ty(right, 2),
                self.ty(total, 2)
            ),
        }
    }
}

/// Print a normal type whose free variables live in a context of `depth`
/// binders (they render as `_t<i>` placeholders).
pub fn normal_type(t: &NormalType) -> String {
    TypePrinter { names: vec![] }.ty(t, 0)
}

pub fn normal_type_in(names: Vec<String>, t: &NormalType) -> String {
    TypePrinter { names }.ty(t, 0)
}

pub fn normal_pred(p: &NormalPred) -> String {
    TypePrinter { names: vec![] }.pred(p)
}

pub fn index_map(m: &IndexMap) -> String {
    let entries: Vec<String> = m.0.iter().enumerate().map(|(i, j)| format!("{}->{}", i, j)).collect();
    format!("{{{}}}", entries.join(", "))
}

pub fn evidence(q: &Evidence) -> String {
    match q {
        Evidence::Var(i) => format!("v{}", i),
        Evidence::Trans(a, b, _, _) => format!("trans({}, {})", evidence(a), evidence(b)),
        Evidence::Incl(p) => format!("incl{}", index_map(p)),
        Evidence::Comb(p, r) => format!("comb{}{}", index_map(p), index_map(r)),
        Evidence::LeqRefl(_, _) => "refl".into(),
        Evidence::LeqMap { inner, .. } => format!("leqMap({})", evidence(inner)),
        Evidence::PlusL(q, _, _) => format!("plusL({})", evidence(q)),
        Evidence::PlusR(q, _, _) => format!("plusR({})", evidence(q)),
        Evidence::PlusEmptyL(_, _) => "emptyL".into(),
        Evidence::PlusEmptyR(_, _) => "emptyR".into(),
        Evidence::PlusMap { inner, .. } => format!("plusMap({})", evidence(inner)),
        Evidence::ComplL(q) => format!("complL({})", evidence(q)),
        Evidence::ComplR(q) => format!("complR({})", evidence(q)),
        Evidence::Hole(h) => format!("?q{}", h),
    }
}

struct TermPrinter {
    term_names: Vec<String>,
    globals: Vec<String>,
}

impl TermPrinter {
    fn fresh(&mut self) -> String {
        let name = format!("x{}", self.term_names.len());
        self.term_names.push(name.clone());
        name
    }

    // Precedence: 0 top (lam), 1 branch, 2 concat, 3 slash, 4 app, 5 atom.
    fn tm(&mut self, t: &Term, min: u8) -> String {
        let (prec, s) = match t {
            Term::Var(ix) => {
                let pos = self.term_names.len().checked_sub(1 + ix);
                let name = match pos {
                    Some(p) => self.term_names[p].clone(),
                    None => format!("_x{}", ix),
                };
                (5, name)
            }
            Term::Global(g) => (
                5,
                self.globals.get(*g).cloned().unwrap_or_else(|| format!("_g{}", g)),
            ),
            Term::Const(c) => {
                let s = c.name().to_string();
                if matches!(c, Const::Concat | Const::Branch) {
                    (5, format!("({})", s))
                } else {
                    (5, s)
                }
            }
            Term::Lam(_, b) => {
                let name = self.fresh();
                let s = format!("\\ {}. {}", name, self.tm(b, 0));
                self.term_names.pop();
                (0, s)
            }
            Term::App(f, a) => {
                // Render saturated concat/branch spines infix.
                if let Some(s) = self.infix_spine(t) {
                    return s;
                }
                (4, format!("{} {}", self.tm(f, 4), self.tm(a, 5)))
            }
            Term::TyLam(_, b) => {
                let s = format!("/\\ _. {}", self.tm(b, 0));
                (0, s)
            }
            Term::TyApp(f, ty, _) => {
                (4, format!("{} [{}]", self.tm(f, 4), normal_type(ty)))
            }
            Term::EvLam(_, b) => (0, self.tm(b, 0)),
            Term::EvApp(f, _) => return self.tm(f, min),
            Term::Sing(t, _) => {
                let s = match t {
                    NormalType::Label(l) => format!("#{}", l),
                    other => format!("#({})", normal_type(other)),
                };
                (5, s)
            }
            Term::Intro(_, l, m, _) => {
                (0, format!("{} := {}", self.tm(l, 1), self.tm(m, 0)))
            }
            Term::Elim(_, m, l) => (3, format!("{} / {}", self.tm(m, 3), self.tm(l, 4))),
            Term::RecordLit { row, fields } => {
                if fields.is_empty() {
                    (5, "{}".to_string())
                } else {
                    let parts: Vec<String> = row
                        .iter()
                        .zip(fields.iter())
                        .map(|((l, _), v)| format!("(#{} := {})", l, self.tm(v, 0)))
                        .collect();
                    (2, parts.join(" ++ "))
                }
            }
            Term::VariantLit { row, tag, payload } => {
                let label = row
                    .get(*tag)
                    .map(|(l, _)| format!("{}", l))
                    .unwrap_or_else(|| format!("#{}", tag));
                (0, format!("#{} := {}", label, self.tm(payload, 0)))
            }
        };
        if prec < min {
            format!("({})", s)
        } else {
            s
        }
    }

    fn infix_spine(&mut self, t: &Term) -> Option<String> {
        // (++) a b and (|) f g render infix once fully applied.
        if let Term::App(f1, b) = t {
            if let Term::App(f2, a) = &**f1 {
                let mut head = &**f2;
                loop {
                    match head {
                        Term::TyApp(f, _, _) | Term::EvApp(f, _) => head = f,
                        _ => break,
                    }
                }
                match head {
                    Term::Const(Const::Concat) => {
                        return Some(format!("{} ++ {}", self.tm(a, 2), self.tm(b, 3)));
                    }
                    _ => return None,
                }
            }
        }
        None
    }
}

/// Print an elaborated term or value as a construction expression. Type
/// and evidence applications are implicit in surface syntax and omitted,
/// except explicit type arguments on constants.
pub fn term(t: &Term, globals: &[String]) -> String {
    TermPrinter { term_names: vec![], globals: globals.to_vec() }.tm(t, 0)
}

/// Print a runtime value; records render as concatenations of labeled
/// singletons and variants as labeled intros.
pub fn value(t: &Term, globals: &[String]) -> String {
    fn go(p: &mut TermPrinter, t: &Term, min: u8) -> String {
        match t {
            Term::VariantLit { row, tag, payload } => {
                let label = row
                    .get(*tag)
                    .map(|(l, _)| format!("{}", l))
                    .unwrap_or_default();
                let s = format!("#{} := {}", label, go(p, payload, 0));
                if min > 0 {
                    format!("({})", s)
                } else {
                    s
                }
            }
            Term::RecordLit { row, fields } => {
                if fields.is_empty() {
                    "{}".to_string()
                } else {
                    let parts: Vec<String> = row
                        .iter()
                        .zip(fields.iter())
                        .map(|((l, _), v)| format!("(#{} := {})", l, go(p, v, 0)))
                        .collect();
                    let s = parts.join(" ++ ");
                    if min > 2 && fields.len() > 1 {
                        format!("({})", s)
                    } else {
                        s
                    }
                }
            }
            Term::App(f, a) => {
                // `in V` prints as in (...).
                let mut head = &**f;
                loop {
                    match head {
                        Term::TyApp(g, _, _) | Term::EvApp(g, _) => head = g,
                        _ => break,
                    }
                }
                if matches!(head, Term::Const(Const::In)) {
                    let s = format!("in ({})", go(p, a, 0));
                    return s;
                }
                p.tm(t, min)
            }
            other => p.tm(other, min),
        }
    }
    go(
        &mut TermPrinter { term_names: vec![], globals: globals.to_vec() },
        t,
        0,
    )
}
