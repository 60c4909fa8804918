//! Declaration processing: the driver that takes parsed declarations
//! through resolution, kind checking, normalization, and type checking,
//! accumulating checked globals.

use std::fmt;

use crate::check::{self, Checker};
use crate::entail::EntailConfig;
use crate::kind::{self, KindState};
use crate::norm;
use crate::resolve::{self, GlobalEnv, GlobalRef};
use crate::surface::{self, SDecl, Span};
use crate::syntax::*;

#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub file: String,
    pub span: Span,
    pub msg: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}:{}: error: {}", self.file, self.span, self.msg)
    }
}

impl std::error::Error for Diagnostic {}

/// Summary of a checked declaration, for `--dump-types` and the REPL.
#[derive(Debug, Clone)]
pub enum Checked {
    TypeSig { name: String, kind: Kind },
    TypeDef { name: String, kind: Kind },
    TermSig { name: String, scheme: NormalType },
    TermDef { name: String, scheme: NormalType },
}

impl Checked {
    pub fn render(&self) -> String {
        match self {
            Checked::TypeSig { name, kind } => {
                format!("type {} : {}", name, crate::pretty::kind(kind))
            }
            Checked::TypeDef { name, kind } => {
                format!("type {} : {}", name, crate::pretty::kind(kind))
            }
            Checked::TermSig { name, scheme } | Checked::TermDef { name, scheme } => {
                format!("{} : {}", name, crate::pretty::normal_type(scheme))
            }
        }
    }
}

pub struct Program {
    pub globals: GlobalEnv,
    pub entail_cfg: EntailConfig,
    /// Re-check every elaborated definition against the typing rules read
    /// literally; elaboration bugs become loud internal errors.
    pub verify_elaboration: bool,
}

impl Program {
    pub fn new(entail_cfg: EntailConfig) -> Program {
        Program {
            globals: GlobalEnv::new(),
            entail_cfg,
            verify_elaboration: true,
        }
    }

    /// A program with the standard prelude loaded.
    pub fn with_prelude(entail_cfg: EntailConfig) -> Result<Program, Diagnostic> {
        let mut p = Program::new(entail_cfg);
        p.load_source("<prelude>", crate::prelude::prelude())?;
        Ok(p)
    }

    pub fn load_source(&mut self, file: &str, src: &str) -> Result<Vec<Checked>, Diagnostic> {
        let decls = surface::parse_program(src).map_err(|e| Diagnostic {
            file: file.to_string(),
            span: e.span,
            msg: e.msg,
        })?;
        let mut out = Vec::with_capacity(decls.len());
        for d in &decls {
            out.push(self.process_decl(d).map_err(|msg| Diagnostic {
                file: file.to_string(),
                span: d.span(),
                msg,
            })?);
        }
        Ok(out)
    }

    fn process_decl(&mut self, d: &SDecl) -> Result<Checked, String> {
        match d {
            SDecl::TypeSig(name, k, _) => {
                let kind = resolve::resolve_kind(k);
                self.globals.declare_type(name, kind.clone())?;
                Ok(Checked::TypeSig { name: name.clone(), kind })
            }
            SDecl::TypeDef(name, sty, _) => {
                let mut kinds = KindState::new();
                let core = resolve::resolve_type(sty, &self.globals, &mut kinds)
                    .map_err(|e| e.msg)?;
                let declared = match self.globals.lookup(name) {
                    Some(GlobalRef::Type(i)) => self.globals.types[i].declared_kind.clone(),
                    _ => None,
                };
                let kt = kind::elaborate_type(
                    &mut Vec::new(),
                    &core,
                    declared.as_ref(),
                    &mut kinds,
                )
                .map_err(|e| e.to_string())?;
                let kind = kt.kind.clone();
                self.globals.define_type(name, kt)?;
                Ok(Checked::TypeDef { name: name.clone(), kind })
            }
            SDecl::TermSig(name, sty, _) => {
                let scheme = self.elaborate_scheme(sty)?;
                self.globals.declare_term(name, scheme.clone())?;
                Ok(Checked::TermSig { name: name.clone(), scheme })
            }
            SDecl::TermDef(name, stm, _) => {
                let sig = match self.globals.lookup(name) {
                    Some(GlobalRef::Term(i)) => {
                        if self.globals.terms[i].def.is_some() {
                            return Err(format!("duplicate definition of {}", name));
                        }
                        self.globals.terms[i].scheme.clone()
                    }
                    Some(GlobalRef::Type(_)) => {
                        return Err(format!("{} is already a type name", name))
                    }
                    None => None,
                };
                let rterm = resolve::resolve_term(stm, &mut Vec::new(), &self.globals)
                    .map_err(|e| e.msg)?;
                let (elab, scheme) = check::check_declaration(
                    &self.globals,
                    sig.as_ref(),
                    &rterm,
                    self.entail_cfg.clone(),
                )
                .map_err(|e| e.0)?;
                if self.verify_elaboration {
                    let mut ctxs = Contexts::new();
                    let got = check::recheck(&self.globals, &mut ctxs, &elab)
                        .map_err(|e| format!("internal: elaboration does not re-check: {}", e))?;
                    if got != scheme {
                        return Err(format!(
                            "internal: re-checked type {} differs from {}",
                            crate::pretty::normal_type(&got),
                            crate::pretty::normal_type(&scheme)
                        ));
                    }
                }
                self.globals.define_term(name, scheme.clone(), elab)?;
                Ok(Checked::TermDef { name: name.clone(), scheme })
            }
        }
    }

    fn elaborate_scheme(&self, sty: &surface::SType) -> Result<NormalType, String> {
        let mut kinds = KindState::new();
        let core =
            resolve::resolve_type(sty, &self.globals, &mut kinds).map_err(|e| e.msg)?;
        let kt = kind::elaborate_type(&mut Vec::new(), &core, Some(&Kind::Star), &mut kinds)
            .map_err(|e| e.to_string())?;
        Ok(norm::normalize(&norm::NoMetas, &[], &kt.ty, &Kind::Star))
    }

    /// Resolve, check, and elaborate a term for the REPL.
    pub fn check_term_str(&self, src: &str) -> Result<(Term, NormalType), String> {
        let stm = surface::parse_term(src).map_err(|e| e.to_string())?;
        let rterm =
            resolve::resolve_term(&stm, &mut Vec::new(), &self.globals).map_err(|e| e.msg)?;
        check::check_declaration(&self.globals, None, &rterm, self.entail_cfg.clone())
            .map_err(|e| e.0)
    }

    /// Kind of a type expression, for the REPL's `:k`.
    pub fn kind_of_str(&self, src: &str) -> Result<Kind, String> {
        let sty = surface::parse_type(src).map_err(|e| e.to_string())?;
        let mut kinds = KindState::new();
        let core =
            resolve::resolve_type(&sty, &self.globals, &mut kinds).map_err(|e| e.msg)?;
        let kt = kind::elaborate_type(&mut Vec::new(), &core, None, &mut kinds)
            .map_err(|e| e.to_string())?;
        Ok(kt.kind)
    }

    /// The scheme of a named global, for the REPL's `:t name` fast path.
    pub fn scheme_of(&self, name: &str) -> Option<NormalType> {
        match self.globals.lookup(name)? {
            GlobalRef::Term(i) => self.globals.terms[i].scheme.clone(),
            GlobalRef::Type(_) => None,
        }
    }

    /// The scheme of a constant, for `:t prj` and friends.
    pub fn const_scheme(&self, name: &str) -> Option<NormalType> {
        let c = Const::from_name(name)?;
        if matches!(c, Const::Syn | Const::Ana) {
            return None;
        }
        let ck = Checker::new(&self.globals, self.entail_cfg.clone());
        Some(ck.const_scheme(c, &Kind::Star))
    }

    pub fn term_names(&self) -> Vec<String> {
        self.globals.term_names()
    }
}
