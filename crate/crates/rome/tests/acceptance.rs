//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its measurements. Run with `cargo test --test acceptance`.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use rome::check;
use rome::entail::{self, EntailConfig, GroundCtx, Picked};
use rome::eval;
use rome::kind::{self, KindState};
use rome::norm::{self, NoMetas};
use rome::prelude;
use rome::program::Program;
use rome::syntax::*;

fn fresh_program() -> Program {
    Program::with_prelude(EntailConfig::default()).expect("prelude loads")
}

fn check_and_eval(p: &Program, src: &str) -> Term {
    let (term, _ty) = p.check_term_str(src).unwrap_or_else(|e| panic!("{}: {}", src, e));
    eval::eval_to_value(&p.globals, &term, eval::DEFAULT_FUEL)
        .unwrap_or_else(|e| panic!("{}: {}", src, e))
}

// ---------------------------------------------------------------------
// Criterion 1: every corpus listing parses, kind-checks, and type-checks.

#[test]
fn criterion_1_corpus_completeness() {
    let start = Instant::now();
    let mut p = Program::new(EntailConfig::default());
    for (name, src) in prelude::CHUNKS {
        p.load_source(name, src)
            .unwrap_or_else(|e| panic!("corpus chunk {} failed: {}", name, e));
    }
    for (name, src) in prelude::STANDALONE_UNITS {
        let mut q = fresh_program();
        q.load_source(name, src)
            .unwrap_or_else(|e| panic!("standalone listing {} failed: {}", name, e));
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "corpus check took {:?} (budget 5s)",
        elapsed
    );
    println!(
        "[PASS] criterion 1: corpus completeness ({} chunks + {} standalone, {:?})",
        prelude::CHUNKS.len(),
        prelude::STANDALONE_UNITS.len(),
        elapsed
    );
}

// ---------------------------------------------------------------------
// Criterion 2: golden evaluations reproduce the hand-derived values.

const EVAL_DRIVER: &str = r#"
type ValAll : R[R[* -> *] -> * -> *]
type ValAll = { 'Bool := (\ expr. \ val. Bool)
              , 'Clos := (\ expr. \ val. Pair (List val) (Mu (Sigma expr)))
              , 'Err := (\ expr. \ val. Unit)
              , 'Nat := (\ expr. \ val. Nat) }

runEval : Mu (Sigma AllF) -> Env (ValAll AllF) -> Mu (Sigma (ValAll AllF))
runEval = histo [AllF] [\ expr. Env (ValAll expr) -> Mu (Sigma (ValAll expr))] (eval [ValAll])

condExpr : Mu (Sigma AllF)
condExpr = rcon #'If (triple (rcon #'BConst True) (rcon #'IConst one) (rcon #'IConst two))

mkNatVal : Nat -> Mu (Sigma (ValAll AllF))
mkNatVal = \n. rcon #'Nat n

fmapPairT : Functor (\t. Pair t t)
fmapPairT = /\ a b. \ f p. pair (f (fst p)) (f (snd p))

fmapConstNat : Functor (Const Nat)
fmapConstNat = /\ a b. \ f x. x

fmapIdT : Functor Id
fmapIdT = /\ a b. \ f x. f x

functorsRest : Pi (Functor (AllF - BoolF))
functorsRest = (#'App := fmapPairT) ++ (#'IConst := fmapConstNat)
            ++ (#'Lam := fmapIdT) ++ (#'Plus := fmapPairT) ++ (#'Var := fmapConstNat)

desugarRun : Mu (Sigma AllF) -> Mu (Sigma (AllF - BoolF))
desugarRun = histo [AllF] [\w. Mu (Sigma (AllF - BoolF))] ((desugar [AllF]) functorsRest)
"#;

fn succ_depth(v: &Term) -> usize {
    // Count 'Succ constructors in a natural's value.
    match v {
        Term::App(_, arg) => succ_depth(arg),
        Term::VariantLit { row, tag, payload } => {
            let here = usize::from(row[*tag].0.text() == "Succ");
            here + succ_depth(payload)
        }
        _ => 0,
    }
}

fn variant_tags_ok(v: &Term, banned: &[&str]) -> bool {
    match v {
        Term::VariantLit { row, tag, payload } => {
            !banned.contains(&row[*tag].0.text()) && variant_tags_ok(payload, banned)
        }
        Term::RecordLit { fields, .. } => fields.iter().all(|f| variant_tags_ok(f, banned)),
        Term::App(f, a) => variant_tags_ok(f, banned) && variant_tags_ok(a, banned),
        Term::TyApp(f, _, _) | Term::EvApp(f, _) => variant_tags_ok(f, banned),
        _ => true,
    }
}

#[test]
fn criterion_2_golden_evaluation() {
    let start = Instant::now();
    let mut p = fresh_program();
    p.load_source("<driver>", EVAL_DRIVER).expect("driver checks");

    // add one two has the value of three.
    let sum = check_and_eval(&p, "add one two");
    let three = check_and_eval(&p, "three");
    assert_eq!(sum, three, "add one two != three");
    assert_eq!(succ_depth(&sum), 3);

    // not on both constructors.
    assert_eq!(check_and_eval(&p, "not True"), check_and_eval(&p, "False"));
    assert_eq!(check_and_eval(&p, "not False"), check_and_eval(&p, "True"));

    // wand selects the labeled field from either side.
    let one = check_and_eval(&p, "one");
    let two = check_and_eval(&p, "two");
    assert_eq!(check_and_eval(&p, "wand (#'l := one) (#'a := tt)"), one);
    assert_eq!(check_and_eval(&p, "wand (#'a := tt) (#'l := two)"), two);

    // The combined evaluator on the conditional of constants yields a
    // 'Nat value carrying one.
    let evaled = check_and_eval(&p, "runEval condExpr nil");
    let expected = check_and_eval(&p, "mkNatVal one");
    assert_eq!(evaled, expected, "combined eval mismatch");

    // Desugaring eliminates every Boolean constructor.
    let desugared = check_and_eval(&p, "desugarRun notE");
    assert!(
        variant_tags_ok(&desugared, &["BConst", "If"]),
        "desugared output still mentions BConst/If"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "golden evaluation took {:?}", elapsed);
    println!("[PASS] criterion 2: golden evaluation ({:?})", elapsed);
}

// ---------------------------------------------------------------------
// Criterion 3: normalization property suite over random well-kinded
// types, plus per-rule completeness sampling.

struct TypeGen {
    rng: ChaCha8Rng,
    labels: Vec<Label>,
}

impl TypeGen {
    fn new(seed: u64) -> TypeGen {
        TypeGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            labels: ["a", "b", "c", "d", "e", "f", "g", "h"]
                .iter()
                .map(|s| Label::new(s))
                .collect(),
        }
    }

    fn gen_kind(&mut self, depth: usize) -> Kind {
        if depth == 0 {
            return if self.rng.gen_bool(0.8) { Kind::Star } else { Kind::Label };
        }
        match self.rng.gen_range(0..6) {
            0 | 1 => Kind::Star,
            2 => Kind::Label,
            3 => Kind::row(self.gen_kind(depth - 1)),
            _ => Kind::arrow(self.gen_kind(depth - 1), self.gen_kind(depth - 1)),
        }
    }

    fn pick_var(&mut self, delta: &[Kind], kind: &Kind) -> Option<Type> {
        let matches: Vec<usize> = delta
            .iter()
            .enumerate()
            .filter(|(_, k)| *k == kind)
            .map(|(i, _)| delta.len() - 1 - i)
            .collect();
        if matches.is_empty() {
            None
        } else {
            Some(Type::Var(matches[self.rng.gen_range(0..matches.len())]))
        }
    }

    fn gen_row_entries(&mut self, delta: &mut Vec<Kind>, elem: &Kind, depth: usize) -> Type {
        let n = self.rng.gen_range(0..=3.min(depth + 1));
        let mut picked: Vec<Label> = Vec::new();
        while picked.len() < n {
            let l = self.labels[self.rng.gen_range(0..self.labels.len())].clone();
            if !picked.contains(&l) {
                picked.push(l);
            }
        }
        picked.sort();
        let entries = picked
            .into_iter()
            .map(|l| (l, self.gen(delta, elem, depth.saturating_sub(1))))
            .collect();
        Type::Row(entries)
    }

    fn gen(&mut self, delta: &mut Vec<Kind>, kind: &Kind, depth: usize) -> Type {
        if self.rng.gen_bool(0.25) {
            if let Some(v) = self.pick_var(delta, kind) {
                return v;
            }
        }
        match kind {
            Kind::Star => {
                if depth == 0 {
                    return Type::app(Type::Pi(Kind::Star), Type::Row(vec![]));
                }
                match self.rng.gen_range(0..8) {
                    0 => Type::app(
                        Type::Pi(Kind::Star),
                        self.gen(delta, &Kind::row(Kind::Star), depth - 1),
                    ),
                    1 => Type::app(
                        Type::Sigma(Kind::Star),
                        self.gen(delta, &Kind::row(Kind::Star), depth - 1),
                    ),
                    2 => Type::arrow(
                        self.gen(delta, &Kind::Star, depth - 1),
                        self.gen(delta, &Kind::Star, depth - 1),
                    ),
                    3 => {
                        let k = self.gen_kind(1);
                        delta.push(k.clone());
                        let body = self.gen(delta, &Kind::Star, depth - 1);
                        delta.pop();
                        Type::Forall(k, Box::new(body))
                    }
                    4 => {
                        let elem = self.gen_kind(1);
                        let rk = Kind::row(elem.clone());
                        let p = Pred::Leq {
                            lhs: self.gen(delta, &rk, depth - 1),
                            rhs: self.gen(delta, &rk, depth - 1),
                            kind: elem,
                        };
                        Type::Qual(Box::new(p), Box::new(self.gen(delta, &Kind::Star, depth - 1)))
                    }
                    5 => {
                        let k = self.gen_kind(1);
                        Type::Sing(Box::new(self.gen(delta, &k, depth - 1)), k)
                    }
                    6 => Type::app(
                        Type::Mu,
                        self.gen(delta, &Kind::arrow(Kind::Star, Kind::Star), depth - 1),
                    ),
                    _ => {
                        // A beta redex at kind *.
                        let k = self.gen_kind(1);
                        delta.push(k.clone());
                        let body = self.gen(delta, &Kind::Star, depth - 1);
                        delta.pop();
                        let arg = self.gen(delta, &k, depth - 1);
                        Type::app(Type::lam(k, body), arg)
                    }
                }
            }
            Kind::Label => {
                let l = self.labels[self.rng.gen_range(0..self.labels.len())].clone();
                Type::Label(l)
            }
            Kind::Row(elem) => {
                if depth == 0 {
                    return self.gen_row_entries(delta, elem, 0);
                }
                match self.rng.gen_range(0..5) {
                    0 | 1 => self.gen_row_entries(delta, elem, depth),
                    2 => {
                        let k1 = self.gen_kind(1);
                        Type::MapApp(
                            Box::new(self.gen(delta, &Kind::arrow(k1.clone(), (**elem).clone()), depth - 1)),
                            Box::new(self.gen(delta, &Kind::row(k1), depth - 1)),
                        )
                    }
                    3 => Type::Compl(
                        Box::new(self.gen(delta, kind, depth - 1)),
                        Box::new(self.gen(delta, kind, depth - 1)),
                    ),
                    _ => {
                        let l = self.labels[self.rng.gen_range(0..self.labels.len())].clone();
                        Type::LabeledSingleton(
                            Box::new(Type::Label(l)),
                            Box::new(self.gen(delta, elem, depth - 1)),
                        )
                    }
                }
            }
            Kind::Arrow(a, b) => {
                delta.push((**a).clone());
                let body = self.gen(delta, b, depth.saturating_sub(1));
                delta.pop();
                Type::lam((**a).clone(), body)
            }
            Kind::Meta(_) => unreachable!("generator uses concrete kinds"),
        }
    }
}

fn norm_at(delta: &[Kind], t: &Type, k: &Kind) -> NormalType {
    norm::normalize(&NoMetas, delta, t, k)
}

#[test]
fn criterion_3_normalization_properties() {
    let start = Instant::now();
    let mut g = TypeGen::new(0x20260810);
    let mut count = 0usize;

    // Stability and idempotency on random well-kinded types.
    for i in 0..1100 {
        let mut delta = vec![
            Kind::Star,
            Kind::row(Kind::Star),
            Kind::arrow(Kind::Star, Kind::Star),
            Kind::row(Kind::arrow(Kind::Star, Kind::Star)),
        ];
        let kind = if i % 3 == 0 {
            Kind::Star
        } else if i % 3 == 1 {
            Kind::row(Kind::Star)
        } else {
            g.gen_kind(2)
        };
        let t = g.gen(&mut delta, &kind, 6.min(2 + i % 5));
        // Confirm the generator produced a well-kinded type.
        let mut ks = KindState::new();
        let kt = kind::elaborate_type(&mut delta.clone(), &t, Some(&kind), &mut ks)
            .unwrap_or_else(|e| panic!("generated type ill-kinded: {} ({:?})", e, t));
        let nf = norm_at(&delta, &kt.ty, &kind);
        // Stability: normal forms cannot be further normalized.
        let again = norm_at(&delta, &norm::embed(&nf), &kind);
        assert_eq!(again, nf, "stability failed for {:?}", t);
        count += 1;
    }

    // Per-rule completeness sampling: for each directed equivalence rule,
    // both sides normalize identically.
    let mut rules_checked = 0usize;
    for _ in 0..200 {
        let mut delta = vec![
            Kind::row(Kind::Star),
            Kind::arrow(Kind::Star, Kind::Star),
            Kind::arrow(Kind::Star, Kind::Star),
            Kind::Star,
        ];
        let rk = Kind::row(Kind::Star);

        // beta: (\a. b) u == b[u/a]
        let k = g.gen_kind(1);
        delta.push(k.clone());
        let body = g.gen(&mut delta, &Kind::Star, 3);
        delta.pop();
        let arg = g.gen(&mut delta, &k, 3);
        let lhs = Type::app(Type::lam(k, body.clone()), arg.clone());
        let rhs = subst_type(&body, &arg);
        assert_eq!(
            norm_at(&delta, &lhs, &Kind::Star),
            norm_at(&delta, &rhs, &Kind::Star),
            "beta rule"
        );

        // eta: f == \a. f a at arrow kind.
        let fk = Kind::arrow(Kind::Star, Kind::Star);
        let f = g.gen(&mut delta, &fk, 3);
        let eta = Type::lam(
            Kind::Star,
            Type::app(shift_type(&f, 0, 1), Type::Var(0)),
        );
        assert_eq!(
            norm_at(&delta, &f, &fk),
            norm_at(&delta, &eta, &fk),
            "eta rule"
        );

        // lift: (Xi^{k->k'} r) t == Xi^{k'} (Map (\f. f t) r)
        let rk_fun = Kind::row(Kind::arrow(Kind::Star, Kind::Star));
        let row = g.gen(&mut delta, &rk_fun, 3);
        let point = g.gen(&mut delta, &Kind::Star, 2);
        for flavor in [true, false] {
            let xi = |k: Kind| if flavor { Type::Pi(k) } else { Type::Sigma(k) };
            let lhs = Type::app(
                Type::app(xi(Kind::arrow(Kind::Star, Kind::Star)), row.clone()),
                point.clone(),
            );
            let mapper = Type::lam(
                Kind::arrow(Kind::Star, Kind::Star),
                Type::app(Type::Var(0), shift_type(&point, 0, 1)),
            );
            let rhs = Type::app(
                xi(Kind::Star),
                Type::MapApp(Box::new(mapper), Box::new(row.clone())),
            );
            assert_eq!(
                norm_at(&delta, &lhs, &Kind::Star),
                norm_at(&delta, &rhs, &Kind::Star),
                "lift rule"
            );
        }

        // map over a literal row: Map f {l := t} == {l := f t}.
        let op = g.gen(&mut delta, &fk, 3);
        let entries: Vec<(Label, Type)> = {
            let row = g.gen_row_entries(&mut delta, &Kind::Star, 3);
            match row {
                Type::Row(es) => es,
                _ => unreachable!(),
            }
        };
        let lhs = Type::MapApp(Box::new(op.clone()), Box::new(Type::Row(entries.clone())));
        let rhs = Type::Row(
            entries
                .iter()
                .map(|(l, t)| (l.clone(), Type::app(op.clone(), t.clone())))
                .collect(),
        );
        assert_eq!(norm_at(&delta, &lhs, &rk), norm_at(&delta, &rhs, &rk), "map rule");

        // map_id: Map (\a. a) r == r.
        let r = g.gen(&mut delta, &rk, 3);
        let lhs = Type::MapApp(
            Box::new(Type::lam(Kind::Star, Type::Var(0))),
            Box::new(r.clone()),
        );
        assert_eq!(norm_at(&delta, &lhs, &rk), norm_at(&delta, &r, &rk), "map_id rule");

        // map_compose: Map f (Map g r) == Map (f . g) r.
        let f1 = g.gen(&mut delta, &fk, 2);
        let f2 = g.gen(&mut delta, &fk, 2);
        let r = g.gen(&mut delta, &rk, 3);
        let lhs = Type::MapApp(
            Box::new(f1.clone()),
            Box::new(Type::MapApp(Box::new(f2.clone()), Box::new(r.clone()))),
        );
        let composed = Type::lam(
            Kind::Star,
            Type::app(
                shift_type(&f1, 0, 1),
                Type::app(shift_type(&f2, 0, 1), Type::Var(0)),
            ),
        );
        let rhs = Type::MapApp(Box::new(composed), Box::new(r.clone()));
        assert_eq!(norm_at(&delta, &lhs, &rk), norm_at(&delta, &rhs, &rk), "map_compose");

        // map over complement: Map f (r2 - r1) == Map f r2 - Map f r1.
        let r1 = g.gen(&mut delta, &rk, 3);
        let r2 = g.gen(&mut delta, &rk, 3);
        let lhs = Type::MapApp(
            Box::new(op.clone()),
            Box::new(Type::Compl(Box::new(r2.clone()), Box::new(r1.clone()))),
        );
        let rhs = Type::Compl(
            Box::new(Type::MapApp(Box::new(op.clone()), Box::new(r2.clone()))),
            Box::new(Type::MapApp(Box::new(op.clone()), Box::new(r1.clone()))),
        );
        assert_eq!(norm_at(&delta, &lhs, &rk), norm_at(&delta, &rhs, &rk), "map_compl");

        // Xi at row kind: Xi^{R[k]} r == Map Xi^{k} r.
        let rr = Kind::row(Kind::row(Kind::Star));
        let rowrow = g.gen(&mut delta, &rr, 3);
        for flavor in [true, false] {
            let xi = |k: Kind| if flavor { Type::Pi(k) } else { Type::Sigma(k) };
            let lhs = Type::app(xi(Kind::row(Kind::Star)), rowrow.clone());
            let rhs = Type::MapApp(Box::new(xi(Kind::Star)), Box::new(rowrow.clone()));
            assert_eq!(norm_at(&delta, &lhs, &rk), norm_at(&delta, &rhs, &rk), "Xi rule");
        }

        // subtract: r2 - r1 computes for literal rows (checked in depth in
        // criterion 4); here confirm the equivalence form. A complement may
        // stay inert when a label-matched pair has open, unequal types
        // (its outcome is not yet determined by substitution).
        let lit1 = g.gen_row_entries(&mut delta, &Kind::Star, 2);
        let lit2 = g.gen_row_entries(&mut delta, &Kind::Star, 2);
        let compl = Type::Compl(Box::new(lit2.clone()), Box::new(lit1.clone()));
        let n2 = norm_at(&delta, &lit2, &rk);
        let n1 = norm_at(&delta, &lit1, &rk);
        let direct = norm::subtract(n2.as_row_lit().unwrap(), n1.as_row_lit().unwrap());
        match norm_at(&delta, &compl, &rk) {
            NormalType::Row(got) => assert_eq!(got, direct, "subtract rule"),
            NormalType::Compl(_, _) => {
                let blocked = n2.as_row_lit().unwrap().iter().any(|(l, t)| {
                    n1.as_row_lit()
                        .unwrap()
                        .iter()
                        .any(|(l1, t1)| l == l1 && t != t1)
                });
                assert!(blocked, "inert complement without a blocking entry");
            }
            other => panic!("unexpected complement form {:?}", other),
        }

        // Congruence: embedding a beta pair in various contexts.
        let k = Kind::Star;
        delta.push(k.clone());
        let cbody = g.gen(&mut delta, &Kind::Star, 2);
        delta.pop();
        let carg = g.gen(&mut delta, &Kind::Star, 2);
        let t1 = Type::app(Type::lam(k, cbody.clone()), carg.clone());
        let t2 = subst_type(&cbody, &carg);
        let contexts: Vec<Box<dyn Fn(Type) -> Type>> = vec![
            Box::new(|t| Type::Sing(Box::new(t), Kind::Star)),
            Box::new(|t| Type::app(Type::Pi(Kind::Star), Type::Row(vec![(Label::new("x"), t)]))),
            Box::new(|t| Type::arrow(t, Type::app(Type::Pi(Kind::Star), Type::Row(vec![])))),
            Box::new(|t| Type::Forall(Kind::Star, Box::new(shift_type(&t, 0, 1)))),
            Box::new(|t| Type::app(Type::Mu, Type::lam(Kind::Star, shift_type(&t, 0, 1)))),
            Box::new(|t| {
                Type::Qual(
                    Box::new(Pred::Leq {
                        lhs: Type::Row(vec![]),
                        rhs: Type::Row(vec![(Label::new("q"), t)]),
                        kind: Kind::Star,
                    }),
                    Box::new(Type::app(Type::Pi(Kind::Star), Type::Row(vec![]))),
                )
            }),
        ];
        for ctx in &contexts {
            assert_eq!(
                norm_at(&delta, &ctx(t1.clone()), &Kind::Star),
                norm_at(&delta, &ctx(t2.clone()), &Kind::Star),
                "congruence"
            );
        }
        rules_checked += 1;
    }

    let elapsed = start.elapsed();
    assert!(count >= 1000, "only {} random types sampled", count);
    assert!(elapsed.as_secs_f64() < 30.0, "normalization suite took {:?}", elapsed);
    println!(
        "[PASS] criterion 3: normalization properties ({} types, {} rule-sample rounds, {:?})",
        count, rules_checked, elapsed
    );
}

// ---------------------------------------------------------------------
// Criterion 4: subtract agrees with set difference on (label, type) pairs.

fn gen_sorted_row(rng: &mut ChaCha8Rng, max: usize) -> Vec<(Label, NormalType)> {
    let labels = ["a", "b", "c", "d", "e", "f", "g", "h"];
    let types = [
        NormalType::unit_record(),
        NormalType::Sigma(Box::new(NormalType::Row(vec![]))),
        NormalType::Sing(Box::new(NormalType::Label(Label::new("t"))), Kind::Label),
    ];
    let n = rng.gen_range(0..=max);
    let mut row: Vec<(Label, NormalType)> = Vec::new();
    for _ in 0..n {
        let l = Label::new(labels[rng.gen_range(0..labels.len())]);
        let t = types[rng.gen_range(0..types.len())].clone();
        let _ = row_insert_sorted(&mut row, l, t);
    }
    row
}

#[test]
fn criterion_4_subtract_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut pairs = 0usize;
    for _ in 0..600 {
        let r2 = gen_sorted_row(&mut rng, 6);
        let r1 = gen_sorted_row(&mut rng, 6);
        let got = norm::subtract(&r2, &r1);
        let want: Vec<(Label, NormalType)> = r2
            .iter()
            .filter(|(l, t)| !r1.iter().any(|(l2, t2)| l == l2 && t == t2))
            .cloned()
            .collect();
        assert_eq!(got, want, "subtract {:?} - {:?}", r2, r1);
        // And the same through complement normalization.
        let compl = Type::Compl(
            Box::new(norm::embed(&NormalType::Row(r2.clone()))),
            Box::new(norm::embed(&NormalType::Row(r1.clone()))),
        );
        assert_eq!(
            norm::normalize(&NoMetas, &[], &compl, &Kind::row(Kind::Star)),
            NormalType::Row(want),
        );
        pairs += 1;
    }
    assert!(pairs >= 500);
    println!("[PASS] criterion 4: subtract matches set difference ({} pairs)", pairs);
}

// ---------------------------------------------------------------------
// Criterion 5: the evidence suite.

fn all_monotone_maps(m: usize, n: usize) -> Vec<IndexMap> {
    // All strictly increasing maps [0,m) -> [0,n).
    fn go(m: usize, n: usize, start: usize, acc: &mut Vec<usize>, out: &mut Vec<IndexMap>) {
        if acc.len() == m {
            out.push(IndexMap(acc.clone()));
            return;
        }
        for i in start..n {
            acc.push(i);
            go(m, n, i + 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(m, n, 0, &mut Vec::new(), &mut out);
    out
}

fn witnesses(p: &IndexMap, sub: &[(Label, NormalType)], sup: &[(Label, NormalType)]) -> bool {
    sub.len() == p.len()
        && (0..sub.len()).all(|k| {
            let j = p.get(k);
            j < sup.len() && sup[j] == sub[k]
        })
}

fn brute_leq(
    sub: &[(Label, NormalType)],
    sup: &[(Label, NormalType)],
) -> Vec<IndexMap> {
    all_monotone_maps(sub.len(), sup.len())
        .into_iter()
        .filter(|p| witnesses(p, sub, sup))
        .collect()
}

fn leq_pred(lhs: &[(Label, NormalType)], rhs: &[(Label, NormalType)]) -> NormalPred {
    NormalPred::Leq {
        lhs: NormalType::Row(lhs.to_vec()),
        rhs: NormalType::Row(rhs.to_vec()),
        kind: Kind::Star,
    }
}

fn plus_pred(
    l: &[(Label, NormalType)],
    r: &[(Label, NormalType)],
    t: &[(Label, NormalType)],
) -> NormalPred {
    NormalPred::Plus {
        left: NormalType::Row(l.to_vec()),
        right: NormalType::Row(r.to_vec()),
        total: NormalType::Row(t.to_vec()),
        kind: Kind::Star,
    }
}

fn ground_solve(goal: &NormalPred) -> Result<Evidence, entail::SolveFailure> {
    let mut ctx = GroundCtx { delta: vec![] };
    entail::solve(&mut ctx, &[], goal, &EntailConfig::default())
}

#[test]
fn criterion_5_evidence_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xe5de);

    let mut containments = 0usize;
    let mut combinations = 0usize;
    for _ in 0..400 {
        // Containments: solve matches brute force over monotone maps.
        let sup = gen_sorted_row(&mut rng, 6);
        let sub: Vec<(Label, NormalType)> = if rng.gen_bool(0.6) {
            sup.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect()
        } else {
            gen_sorted_row(&mut rng, 4)
        };
        let brute = brute_leq(&sub, &sup);
        match ground_solve(&leq_pred(&sub, &sup)) {
            Ok(Evidence::Incl(p)) => {
                assert_eq!(brute.len(), 1, "witness should be unique");
                assert_eq!(p, brute[0], "solver map differs from brute force");
                entail::check_evidence(&[], &[], &Evidence::Incl(p), &leq_pred(&sub, &sup))
                    .unwrap();
            }
            Ok(other) => panic!("unexpected evidence {:?}", other),
            Err(_) => assert!(brute.is_empty(), "solver missed {:?} <= {:?}", sub, sup),
        }
        containments += 1;

        // Combinations: split a row at random and check solve against the
        // brute-force search over disjoint pairs; also commutativity.
        let total = gen_sorted_row(&mut rng, 6);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for e in &total {
            if rng.gen_bool(0.5) {
                x.push(e.clone());
            } else {
                y.push(e.clone());
            }
        }
        let brute: Vec<(IndexMap, IndexMap)> = all_monotone_maps(x.len(), total.len())
            .into_iter()
            .flat_map(|p| {
                all_monotone_maps(y.len(), total.len())
                    .into_iter()
                    .map(move |q| (p.clone(), q.clone()))
                    .collect::<Vec<_>>()
            })
            .filter(|(p, q)| {
                witnesses(p, &x, &total)
                    && witnesses(q, &y, &total)
                    && p.0.iter().all(|i| !q.range_contains(*i))
                    && p.len() + q.len() == total.len()
            })
            .collect();
        match ground_solve(&plus_pred(&x, &y, &total)) {
            Ok(Evidence::Comb(p, q)) => {
                assert_eq!(brute.len(), 1);
                assert_eq!((p.clone(), q.clone()), brute[0]);
                assert_eq!(p.len() + q.len(), total.len());
                // Commutativity with swapped components.
                match ground_solve(&plus_pred(&y, &x, &total)) {
                    Ok(Evidence::Comb(q2, p2)) => {
                        assert_eq!(p2, p);
                        assert_eq!(q2, q);
                    }
                    other => panic!("combination does not commute: {:?}", other),
                }
            }
            Ok(other) => panic!("unexpected evidence {:?}", other),
            Err(_) => assert!(brute.is_empty()),
        }
        combinations += 1;

        // pick/dual inversion and partition properties.
        let n = total.len();
        let p = {
            let members: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            IndexMap(members)
        };
        let d = entail::dual(&p, n);
        let mut union: Vec<usize> = p.0.iter().chain(d.0.iter()).copied().collect();
        union.sort_unstable();
        assert_eq!(union, (0..n).collect::<Vec<_>>(), "dual partition");
        assert!(d.is_strictly_increasing());
        for (j, &i) in p.0.iter().enumerate() {
            assert_eq!(entail::pick(&p, &d, i), Picked::Left(j), "pick inverts p");
        }
        for (j, &i) in d.0.iter().enumerate() {
            assert_eq!(entail::pick(&p, &d, i), Picked::Right(j), "pick inverts q");
        }

        // complR round trip: solve x <= z, then x + (z - x) ~ z has the
        // consistent maps.
        let z = gen_sorted_row(&mut rng, 6);
        let x: Vec<(Label, NormalType)> =
            z.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        if let Ok(Evidence::Incl(p)) = ground_solve(&leq_pred(&x, &z)) {
            let rest = norm::subtract(&z, &x);
            match ground_solve(&plus_pred(&x, &rest, &z)) {
                Ok(Evidence::Comb(p2, q2)) => {
                    assert_eq!(p2, p, "complement combination reuses the inclusion");
                    assert_eq!(q2, entail::dual(&p, z.len()), "complement side is the dual");
                }
                other => panic!("complement combination unsolvable: {:?}", other),
            }
        }
    }

    // Evidence preservation: stepping solved evidence re-checks at every
    // intermediate form.
    for _ in 0..100 {
        let z = gen_sorted_row(&mut rng, 5);
        let x: Vec<(Label, NormalType)> =
            z.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        if x.is_empty() || x.len() == z.len() {
            continue;
        }
        let rest = norm::subtract(&z, &x);
        // Build structured evidence and reduce it stepwise.
        let pred = plus_pred(&x, &rest, &z);
        let inner = ground_solve(&leq_pred(&x, &z)).unwrap();
        let mut q = Evidence::ComplR(Box::new(inner));
        entail::check_evidence(&[], &[], &q, &pred).unwrap();
        let mut fuel = 32;
        while let Some((q2, _)) = entail::evidence_step(&q, &pred).unwrap() {
            entail::check_evidence(&[], &[], &q2, &pred)
                .unwrap_or_else(|e| panic!("evidence preservation: {}", e));
            q = q2;
            fuel -= 1;
            assert!(fuel > 0);
        }
        assert!(q.is_value());
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "evidence suite took {:?}", elapsed);
    println!(
        "[PASS] criterion 5: evidence suite ({} containments, {} combinations, {:?})",
        containments, combinations, elapsed
    );
}

// ---------------------------------------------------------------------
// Criterion 6: subject reduction and progress on generated terms.

struct TermGen {
    rng: ChaCha8Rng,
}

impl TermGen {
    fn labels(&mut self, n: usize) -> Vec<Label> {
        let pool = ["a", "b", "c", "d", "e", "f"];
        let mut picked = Vec::new();
        while picked.len() < n {
            let l = Label::new(pool[self.rng.gen_range(0..pool.len())]);
            if !picked.contains(&l) {
                picked.push(l);
            }
        }
        picked.sort();
        picked
    }

    fn gen_vty(&mut self, depth: usize) -> NormalType {
        if depth == 0 {
            let l = self.labels(1).remove(0);
            return NormalType::Sing(Box::new(NormalType::Label(l)), Kind::Label);
        }
        match self.rng.gen_range(0..6) {
            0 => {
                let l = self.labels(1).remove(0);
                NormalType::Sing(Box::new(NormalType::Label(l)), Kind::Label)
            }
            1 => {
                let n = self.rng.gen_range(0..=3);
                let row = self
                    .labels(n)
                    .into_iter()
                    .map(|l| (l, self.gen_vty(depth - 1)))
                    .collect();
                NormalType::Pi(Box::new(NormalType::Row(row)))
            }
            2 => {
                let n = self.rng.gen_range(1..=3);
                let row = self
                    .labels(n)
                    .into_iter()
                    .map(|l| (l, self.gen_vty(depth - 1)))
                    .collect();
                NormalType::Sigma(Box::new(NormalType::Row(row)))
            }
            3 => NormalType::Arrow(
                Box::new(self.gen_vty(depth - 1)),
                Box::new(self.gen_vty(depth - 1)),
            ),
            _ => {
                // A constant functor: Mu (\a. t).
                let t = self.gen_vty(depth - 1);
                NormalType::Mu(Box::new(NormalType::Lam(
                    Kind::Star,
                    Box::new(shift_normal(&t, 0, 1)),
                )))
            }
        }
    }

    fn gen_term(&mut self, gamma: &mut Vec<NormalType>, ty: &NormalType, depth: usize) -> Term {
        // Use a matching variable sometimes.
        if depth > 0 && self.rng.gen_bool(0.2) {
            let matches: Vec<usize> = gamma
                .iter()
                .enumerate()
                .filter(|(_, t)| *t == ty)
                .map(|(i, _)| gamma.len() - 1 - i)
                .collect();
            if !matches.is_empty() {
                return Term::Var(matches[self.rng.gen_range(0..matches.len())]);
            }
        }
        // A beta redex around the goal type occasionally.
        if depth > 1 && self.rng.gen_bool(0.45) {
            let argty = self.gen_vty(1);
            let arg = self.gen_term(gamma, &argty, depth - 1);
            gamma.push(argty.clone());
            let body = self.gen_term(gamma, ty, depth - 1);
            gamma.pop();
            return Term::app(Term::Lam(argty, Box::new(body)), arg);
        }
        match ty {
            NormalType::Sing(inner, k) => Term::Sing((**inner).clone(), k.clone()),
            NormalType::Pi(row) => {
                let es = row.as_row_lit().unwrap().to_vec();
                let choice = if depth == 0 { 0 } else { self.rng.gen_range(0..3) };
                match choice {
                    1 => {
                        // Project from a wider record.
                        let mut big = es.clone();
                        let extra = self.rng.gen_range(0..=2);
                        for l in self.labels(extra) {
                            let t = self.gen_vty(depth - 1);
                            let _ = row_insert_sorted(&mut big, l, t);
                        }
                        let p = IndexMap(
                            es.iter()
                                .map(|(l, _)| {
                                    big.binary_search_by(|(l2, _)| l2.cmp(l)).unwrap()
                                })
                                .collect(),
                        );
                        let rec = self.gen_term(
                            gamma,
                            &NormalType::Pi(Box::new(NormalType::Row(big.clone()))),
                            depth - 1,
                        );
                        Term::app(
                            Term::EvApp(
                                Box::new(Term::TyApp(
                                    Box::new(Term::TyApp(
                                        Box::new(Term::Const(Const::Prj)),
                                        NormalType::Row(es),
                                        Kind::row(Kind::Star),
                                    )),
                                    NormalType::Row(big),
                                    Kind::row(Kind::Star),
                                )),
                                Evidence::Incl(p),
                            ),
                            rec,
                        )
                    }
                    2 if !es.is_empty() => {
                        // Concatenate a random split.
                        let mut x = Vec::new();
                        let mut y = Vec::new();
                        let mut px = Vec::new();
                        let mut py = Vec::new();
                        for (i, e) in es.iter().enumerate() {
                            if self.rng.gen_bool(0.5) {
                                px.push(i);
                                x.push(e.clone());
                            } else {
                                py.push(i);
                                y.push(e.clone());
                            }
                        }
                        let r1 = self.gen_term(
                            gamma,
                            &NormalType::Pi(Box::new(NormalType::Row(x.clone()))),
                            depth - 1,
                        );
                        let r2 = self.gen_term(
                            gamma,
                            &NormalType::Pi(Box::new(NormalType::Row(y.clone()))),
                            depth - 1,
                        );
                        let head = Term::EvApp(
                            Box::new(Term::TyApp(
                                Box::new(Term::TyApp(
                                    Box::new(Term::TyApp(
                                        Box::new(Term::Const(Const::Concat)),
                                        NormalType::Row(x),
                                        Kind::row(Kind::Star),
                                    )),
                                    NormalType::Row(y),
                                    Kind::row(Kind::Star),
                                )),
                                NormalType::Row(es),
                                Kind::row(Kind::Star),
                            )),
                            Evidence::Comb(IndexMap(px), IndexMap(py)),
                        );
                        Term::app(Term::app(head, r1), r2)
                    }
                    _ => Term::RecordLit {
                        row: es.clone(),
                        fields: es
                            .iter()
                            .map(|(_, t)| self.gen_term(gamma, t, depth.saturating_sub(1)))
                            .collect(),
                    },
                }
            }
            NormalType::Sigma(row) => {
                let es = row.as_row_lit().unwrap().to_vec();
                let tag = self.rng.gen_range(0..es.len());
                let payload = self.gen_term(gamma, &es[tag].1, depth.saturating_sub(1));
                if depth > 0 && self.rng.gen_bool(0.4) {
                    // Inject the singleton into the full row.
                    let single = vec![es[tag].clone()];
                    let inner = Term::VariantLit {
                        row: single.clone(),
                        tag: 0,
                        payload: Box::new(payload),
                    };
                    Term::app(
                        Term::EvApp(
                            Box::new(Term::TyApp(
                                Box::new(Term::TyApp(
                                    Box::new(Term::Const(Const::Inj)),
                                    NormalType::Row(single),
                                    Kind::row(Kind::Star),
                                )),
                                NormalType::Row(es.clone()),
                                Kind::row(Kind::Star),
                            )),
                            Evidence::Incl(IndexMap(vec![tag])),
                        ),
                        inner,
                    )
                } else {
                    Term::VariantLit { row: es, tag, payload: Box::new(payload) }
                }
            }
            NormalType::Arrow(a, b) => {
                gamma.push((**a).clone());
                let body = self.gen_term(gamma, b, depth.saturating_sub(1));
                gamma.pop();
                Term::Lam((**a).clone(), Box::new(body))
            }
            NormalType::Mu(f) => {
                // in [f] (value of f (Mu f)).
                let unrolled = norm::instantiate_normal(
                    &NoMetas,
                    &[],
                    match &**f {
                        NormalType::Lam(_, b) => b,
                        _ => unreachable!(),
                    },
                    &Kind::Star,
                    norm::eval_normal(&NoMetas, &[], ty),
                );
                let inner = self.gen_term(gamma, &unrolled, depth.saturating_sub(1));
                Term::app(
                    Term::TyApp(
                        Box::new(Term::Const(Const::In)),
                        (**f).clone(),
                        Kind::arrow(Kind::Star, Kind::Star),
                    ),
                    inner,
                )
            }
            other => panic!("generator cannot inhabit {:?}", other),
        }
    }
}

#[test]
fn criterion_6_preservation_and_progress() {
    let start = Instant::now();
    let mut g = TermGen { rng: ChaCha8Rng::seed_from_u64(0x9009) };
    let globals = rome::resolve::GlobalEnv::new();
    let mut terms = 0usize;
    let mut steps_total = 0usize;
    while terms < 220 {
        let ty = g.gen_vty(3);
        let mut gamma = Vec::new();
        let term = g.gen_term(&mut gamma, &ty, 5);
        let mut ctxs = Contexts::new();
        let expected = check::recheck(&globals, &mut ctxs, &term)
            .unwrap_or_else(|e| panic!("generated term ill-typed: {}\n{:?}", e, term));
        assert_eq!(expected, ty);
        let mut cur = term;
        for _ in 0..300 {
            match eval::step(&globals, &cur) {
                Ok(Some((next, _rule))) => {
                    let mut ctxs = Contexts::new();
                    let t2 = check::recheck(&globals, &mut ctxs, &next).unwrap_or_else(|e| {
                        panic!("preservation: step result ill-typed: {}\n{:?}", e, next)
                    });
                    assert_eq!(t2, expected, "preservation: type changed");
                    cur = next;
                    steps_total += 1;
                }
                Ok(None) => {
                    assert!(eval::is_value(&cur), "progress: stopped on a non-value");
                    break;
                }
                Err(e) => panic!("progress violated: {}\n{:?}", e, cur),
            }
        }
        terms += 1;
    }
    // Reduction prefixes of corpus programs: these drive syn, ana,
    // branching, and complement evidence through the re-checker.
    let mut p = fresh_program();
    p.load_source("<driver>", EVAL_DRIVER).expect("driver checks");
    p.load_source(
        "<syn-driver>",
        "type IdRow : R[* -> *]\ntype IdRow = { '1 := Id, '2 := Id }\ndupFunctors : Pi (Functor IdRow)\ndupFunctors = (#'1 := fmapIdT) ++ (#'2 := fmapIdT)\nincBoth : Pi IdRow Nat -> Pi IdRow Nat\nincBoth = fmapP [IdRow] dupFunctors succ\nboolEq : Pi (Eq { 'False := Unit, 'True := Unit })\nboolEq = (#'False := (\\x y. True)) ++ (#'True := (\\x y. True))\n",
    )
    .expect("syn driver checks");
    for src in [
        "not True",
        "wand (#'l := one) (#'a := tt)",
        "incBoth (pair one two)",
        "eqS boolEq True False",
        "add one one",
    ] {
        let (term, ty) = p.check_term_str(src).unwrap();
        let mut cur = term;
        for _ in 0..350 {
            match eval::step(&p.globals, &cur) {
                Ok(Some((next, rule))) => {
                    let mut ctxs = Contexts::new();
                    let t2 = check::recheck(&p.globals, &mut ctxs, &next).unwrap_or_else(|e| {
                        panic!("preservation ({}, rule {}): {}", src, rule, e)
                    });
                    assert_eq!(t2, ty, "preservation: type changed for {}", src);
                    cur = next;
                    steps_total += 1;
                }
                Ok(None) => break,
                Err(e) => panic!("progress violated for {}: {}", src, e),
            }
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "fuzzing took {:?}", elapsed);
    println!(
        "[PASS] criterion 6: preservation and progress ({} terms, {} checked steps, {:?})",
        terms, steps_total, elapsed
    );
}

// ---------------------------------------------------------------------
// Criterion 7: canonicity audit over the elaborated corpus.

fn audit_closed(t: &NormalType, what: &str) {
    // A closed normal type contains no neutral forms at all: no bare
    // neutrals, no inert maps, no variable-labeled singletons, and no
    // inert complements. Rows are literal and labels are label literals.
    match t {
        NormalType::Neutral(_) => panic!("{}: closed type contains a neutral", what),
        NormalType::Map(_, _) => panic!("{}: closed type contains an inert map", what),
        NormalType::LabeledSingleton(_, _) => {
            panic!("{}: closed type contains a variable-labeled row", what)
        }
        NormalType::Compl(_, _) => {
            panic!("{}: closed type contains an inert complement", what)
        }
        NormalType::Arrow(a, b) => {
            audit_closed(a, what);
            audit_closed(b, what);
        }
        NormalType::Forall(_, _) | NormalType::Lam(_, _) | NormalType::Qual(_, _) => {
            // Open underneath a binder; the audit only covers the closed
            // spine of the type.
        }
        NormalType::Mu(f) => {
            if let NormalType::Lam(_, _) = &**f {
                // body is open
            } else {
                audit_closed(f, what);
            }
        }
        NormalType::Pi(r) | NormalType::Sigma(r) => audit_closed(r, what),
        NormalType::Row(es) => es.iter().for_each(|(_, t)| audit_closed(t, what)),
        NormalType::Label(_) => {}
        NormalType::Sing(t, _) => audit_closed(t, what),
    }
}

fn audit_term(t: &Term, depth: usize, name: &str, audited: &mut usize) {
    let mut check_ann = |ann: &NormalType, audited: &mut usize| {
        let closed = {
            // Free variables of the annotation at this binder depth.
            fn min_free(t: &NormalType) -> bool {
                // reuse contains check: any Var head with index < depth is
                // free; approximate by embedding and shifting.
                let _ = t;
                true
            }
            let _ = min_free;
            // A type is closed here when shifting it below zero never
            // underflows, i.e. it mentions no variables at all.
            depth == 0 || !mentions_vars(ann)
        };
        if closed {
            audit_closed(ann, name);
            *audited += 1;
        }
    };
    fn mentions_vars(t: &NormalType) -> bool {
        fn neu(n: &Neutral) -> bool {
            matches!(n.head, Head::Var(_)) || n.args.iter().any(go)
        }
        fn go(t: &NormalType) -> bool {
            match t {
                NormalType::Neutral(n) => neu(n),
                NormalType::Arrow(a, b) | NormalType::Compl(a, b) => go(a) || go(b),
                NormalType::Forall(_, b) | NormalType::Lam(_, b) => go(b),
                NormalType::Qual(p, b) => p.components().iter().any(|c| go(c)) || go(b),
                NormalType::Mu(b) | NormalType::Pi(b) | NormalType::Sigma(b) => go(b),
                NormalType::Row(es) => es.iter().any(|(_, t)| go(t)),
                NormalType::LabeledSingleton(n, t) => neu(n) || go(t),
                NormalType::Map(f, n) => go(f) || neu(n),
                NormalType::Label(_) => false,
                NormalType::Sing(t, _) => go(t),
            }
        }
        go(t)
    }
    match t {
        Term::Var(_) | Term::Global(_) | Term::Const(_) => {}
        Term::Lam(ann, b) => {
            check_ann(ann, audited);
            audit_term(b, depth, name, audited);
        }
        Term::App(f, a) => {
            audit_term(f, depth, name, audited);
            audit_term(a, depth, name, audited);
        }
        Term::TyLam(_, b) => audit_term(b, depth + 1, name, audited),
        Term::TyApp(f, ann, _) => {
            check_ann(ann, audited);
            audit_term(f, depth, name, audited);
        }
        Term::EvLam(_, b) => audit_term(b, depth, name, audited),
        Term::EvApp(f, _) => audit_term(f, depth, name, audited),
        Term::Sing(ann, _) => check_ann(ann, audited),
        Term::Intro(_, l, m, ann) => {
            check_ann(ann, audited);
            audit_term(l, depth, name, audited);
            audit_term(m, depth, name, audited);
        }
        Term::Elim(_, m, l) => {
            audit_term(m, depth, name, audited);
            audit_term(l, depth, name, audited);
        }
        Term::RecordLit { row, fields } => {
            for (_, ann) in row {
                check_ann(ann, audited);
            }
            fields.iter().for_each(|f| audit_term(f, depth, name, audited));
        }
        Term::VariantLit { row, payload, .. } => {
            for (_, ann) in row {
                check_ann(ann, audited);
            }
            audit_term(payload, depth, name, audited);
        }
    }
}

#[test]
fn criterion_7_canonicity_audit() {
    let mut p = fresh_program();
    p.load_source("<driver>", EVAL_DRIVER).expect("driver checks");
    let mut audited = 0usize;
    for tg in &p.globals.terms {
        if let Some(def) = &tg.def {
            audit_term(def, 0, &tg.name, &mut audited);
        }
        if let Some(scheme) = &tg.scheme {
            // Top-level schemes are closed; audit their closed spines.
            audit_closed(scheme, &tg.name);
        }
    }
    assert!(audited > 100, "audit found only {} closed annotations", audited);
    println!(
        "[PASS] criterion 7: canonicity audit ({} closed annotations over {} definitions)",
        audited,
        p.globals.terms.len()
    );
}
