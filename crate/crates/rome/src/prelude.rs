//! The in-language standard library: the full example corpus shipped as
//! embedded `.rome` source, loaded ahead of user files (disable with
//! `--no-prelude`). Definitions marked "supplied" are not part of the
//! published listings but are required by them.

/// The prelude, split into named chunks so tests can check them one by
/// one; [`PRELUDE`] is their concatenation.
pub const CHUNKS: &[(&str, &str)] = &[
    (
        "combinators",
        r#"
-- supplied: basic type operators and combinators used by the listings
type Id : * -> *
type Id = \t. t

type Const : * -> * -> *
type Const = \t u. t

id : forall t. t -> t
id = \x. x

const : forall t u. t -> u -> t
const = \x y. x

o : forall t u v. (u -> v) -> (t -> u) -> t -> v
o = \f g x. f (g x)
"#,
    ),
    (
        "first-class-labels",
        r#"
sel : forall l t z. {l := t} < z => Pi z -> #l -> t
sel = \ r l. prj r / l

con : forall l t z. {l := t} < z => #l -> t -> Sigma z
con = \ l x. inj (l := x)

rcon : forall l f z. {l := f} < z => #l -> f (Mu (Sigma z)) -> Mu (Sigma z)
rcon = \ l x. in (con l x)

case : forall l t u. #l -> (t -> u) -> Sigma {l := t} -> u
case = \ l f x. f (x / l)

match : forall t u. t -> (t -> u) -> u
match = \ x f. f x
"#,
    ),
    (
        "unit",
        r#"
type Unit : *
type Unit = #'Unit

tt : Unit
tt = #'Unit
"#,
    ),
    (
        "tuples",
        r#"
type Pair : * -> * -> *
type Pair = \ t u. Pi {'1 := t, '2 := u}

pair : forall t u. t -> u -> Pair t u
pair = \x y. (#'1 := x) ++ (#'2 := y)

type Triple : * -> * -> * -> *
type Triple = \ t u v. Pi {'1 := t, '2 := u, '3 := v}

triple : forall t u v. t -> u -> v -> Triple t u v
triple = \x y z. pair x y ++ (#'3 := z)

-- supplied signatures: row-polymorphic so the projections apply to
-- pairs and triples alike
fst : forall t z. {'1 := t} < z => Pi z -> t
fst = \x. sel x #'1

snd : forall t z. {'2 := t} < z => Pi z -> t
snd = \x. sel x #'2

thd : forall t z. {'3 := t} < z => Pi z -> t
thd = \x. sel x #'3
"#,
    ),
    (
        "booleans",
        r#"
type Bool : *
type Bool = Sigma { 'True := Unit, 'False := Unit }

not : Bool -> Bool
not = \ b. match b
           ( case #'True (con #'False)
           | case #'False (con #'True))

-- supplied constructor aliases
True : Bool
True = con #'True tt

False : Bool
False = con #'False tt
"#,
    ),
    (
        "maybe",
        r#"
-- supplied
type Maybe : * -> *
type Maybe = \t. Sigma { 'Just := t, 'Nothing := Unit }

Just : forall t. t -> Maybe t
Just = con #'Just

Nothing : forall t. Maybe t
Nothing = con #'Nothing tt

fromMaybe : forall t. t -> Maybe t -> t
fromMaybe = \ d m. match m
            ( case #'Just id
            | case #'Nothing (const d))
"#,
    ),
    (
        "naturals",
        r#"
type NatF : * -> *
type NatF = \n. Sigma { 'Zero := Unit, 'Succ := n}

type Nat : *
type Nat = Mu NatF

zero : Nat
zero = in (inj (#'Zero := tt))

succ : Nat -> Nat
succ = \n. in (inj (#'Succ := n))

add : Nat -> Nat -> Nat
add = \m. fix (\add n.
                 (case #'Zero (\u. m)
               | case #'Succ (\nn. succ (add nn))) (out n))

one : Nat
one = succ zero

two : Nat
two = succ one

three : Nat
three = add one two
"#,
    ),
    (
        "lists",
        r#"
type ListF : * -> * -> *
type ListF = \a. Sigma { 'Nil := Const Unit, 'Cons := (\l. Pair a l) }

type List : * -> *
type List = \a. Mu (ListF a)

nil : forall a. List a
nil = rcon #'Nil tt

cons : forall a. a -> List a -> List a
cons = \hd tl. rcon #'Cons (pair hd tl)

head : forall a. List a -> Maybe a
head = \l. match (out l)
           ( case #'Nil (const Nothing)
           | case #'Cons (o Just fst)
           )

tail : forall a. List a -> List a
tail = \l. match (out l)
           ( case #'Nil (const nil)
           | case #'Cons snd
           )

nth : forall a. List a -> Nat -> Maybe a
nth = fix (\f l n.
            match (out n)
            ( case #'Zero (const (head l))
            | case #'Succ (f (tail l))
            ))
"#,
    ),
    (
        "wand",
        r#"
wand : forall x y z t. x + y ~ z, {'l := t} < z => Pi x -> Pi y -> t
wand = \ r s. prj (r ++ s) / #'l

dnaw : forall x y z t u. x + y ~ z, {'l := t} < z => (Sigma x -> u) -> (Sigma y -> u) -> t -> u
dnaw = \ f g x. (f | g) (inj (#'l := x))

dnawHO : forall x y z t u l. x + y ~ z, {l := t} < z =>
         (Sigma x u -> u) -> (Sigma y u -> u) -> #l -> t u -> u
dnawHO = \ f g l x. (f | g) (inj (l := x))
"#,
    ),
    (
        "modify",
        r#"
modify : forall l t u y z1 z2. {l := t} + y ~ z1, {l := u} + y ~ z2 =>
         #l -> (t -> u) -> Pi z1 -> Pi z2
modify = \ l f r. (l := f (sel r l)) ++ prj r
"#,
    ),
    (
        "functor",
        r#"
type Functor : (* -> *) -> *
type Functor = \f. forall a b. (a -> b) -> f a -> f b

fmapS : forall z : R[* -> *]. Pi (Functor z) -> Functor (Sigma z)
fmapS = \ d. /\ a b. \ f w.
        ana #(\x. x a) (\ l x. con l (sel d l f x)) w

fmapP : forall z : R[* -> *]. Pi (Functor z) -> Functor (Pi z)
fmapP = \ d. /\ a b. \f r.
        syn #(\x. x b) (\l. sel d l f (sel r l))
"#,
    ),
    (
        "eq",
        r#"
type Eq : * -> *
type Eq = \ t. t -> t -> Bool

eqS : forall z : R[*]. Pi (Eq z) -> Eq (Sigma z)
eqS = \ d v w. ana #(\ x. x)
                   (\ l y. match v
                           ( case l (\ x. sel d l x y)
                           | const False)) w
"#,
    ),
    (
        "algebras",
        r#"
type FAlg : (* -> *) -> * -> *
type FAlg = \ f a. f a -> a

cata : forall f a. Functor f -> FAlg f a -> Mu f -> a
cata = \ map a. fix (\ cata x. a (map cata (out x)))
"#,
    ),
    (
        "expression-rows",
        r#"
type ArithF : R[* -> *]
type ArithF = { 'IConst := Const Nat
              , 'Plus := (\ t. Pair t t) }

type BoolF : R[* -> *]
type BoolF = { 'BConst := Const Bool
             , 'If := (\ t. Triple t t t) }

type LamF : R[* -> *]
type LamF = { 'Var := Const Nat
            , 'Lam := Id
            , 'App := (\t. Pair t t) }

notE : forall z. LamF < z, BoolF < z => Mu (Sigma z)
notE = rcon #'Lam (rcon #'If (triple (rcon #'Var zero)
                                     (rcon #'BConst False)
                                     (rcon #'BConst True)))
"#,
    ),
    (
        "naive-evaluators",
        r#"
naiveA : Mu (Sigma ArithF) -> Nat
naiveA = fix (\ rec exp. match (out exp)
  ( case #'IConst id
  | case #'Plus (\ p. add (rec (sel p #'1)) (rec (sel p #'2)))))

naiveB : Mu (Sigma BoolF) -> Bool
naiveB = fix (\ rec exp. match (out exp)
  ( case #'BConst id
  | case #'If (\ t. match (rec (sel t #'1))
      ( case #'True (const (rec (sel t #'2)))
      | case #'False (const (rec (sel t #'3)))))))
"#,
    ),
    (
        "sizes",
        r#"
sizeA : FAlg (Sigma ArithF) Nat
sizeA = case #'IConst (\u. one)
       | case #'Plus (\t. succ (add (sel t #'1) (sel t #'2)))

sizeB : FAlg (Sigma BoolF) Nat
sizeB = case #'BConst (\u. one)
      | case #'If (\t. succ (add (sel t #'1) (add (sel t #'2) (sel t #'3))))
"#,
    ),
    (
        "extensible-histomorphisms",
        r#"
type Xh : R[* -> *] -> (R[* -> *] -> *) -> *
type Xh = \ z f. forall w. z < w => Sigma z (Mu (Sigma w)) -> (Mu (Sigma w) -> f w) -> f w

histo : forall z f. (Xh z f) -> Mu (Sigma z) -> f z
histo = \ a. fix (\ rec x. a (out x) rec)

orXh : forall x y z f. x + y ~ z => Xh x f -> Xh y f -> Xh z f
orXh = \ a b. /\ w. a [w] | b [w]
"#,
    ),
    (
        "big-step-env",
        r#"
type Env : R[* -> *] -> *
type Env = \z. List (Mu (Sigma z))

as : forall l f z. { l := f } < z, { 'Err := (\ w. Unit) } < z =>
     #l -> Mu (Sigma z) -> (f (Mu (Sigma z)) -> Mu (Sigma z)) -> Mu (Sigma z)
as = \ l w f. match (out w) ( case l f | const (rcon #'Err tt) )
"#,
    ),
    (
        "eval-arith",
        r#"
type ValA : R[R[* -> *] -> * -> *]
type ValA = { 'Nat := (\ expr. \ val. Nat), 'Err := (\ expr. \ val. Unit) }

evalA : forall valr. ValA < valr =>
        Xh ArithF (\ expr. Env (valr expr) -> Mu (Sigma (valr expr)))
evalA = \ exp rec env.
           match exp
           ( case #'IConst (rcon #'Nat)
           | case #'Plus (\ p.
               as #'Nat (rec (sel p #'1) env) (\ i.
               as #'Nat (rec (sel p #'2) env) (\ j.
                 rcon #'Nat (add i j)))))
"#,
    ),
    (
        "eval-bool",
        r#"
type ValB : R[R[* -> *] -> * -> *]
type ValB = { 'Bool := (\ expr. \ val. Bool), 'Err := (\ expr. \ val. Unit) }

evalB : forall valr. ValB < valr =>
        Xh BoolF (\ expr. Env (valr expr) -> Mu (Sigma (valr expr)))
evalB = \ exp rec env.
           match exp
           ( case #'BConst (rcon #'Bool)
           | case #'If (\ t.
               as #'Bool (rec (sel t #'1) env)
               ( case #'True (const (rec (sel t #'2) env))
               | case #'False (const (rec (sel t #'3) env)))))
"#,
    ),
    (
        "eval-lambda",
        r#"
type ValL : R[R[* -> *] -> * -> *]
type ValL = { 'Clos := (\ expr. \ val. Pair (List val) (Mu (Sigma expr)))
            , 'Err := (\ expr. \ val. Unit) }

evalL : forall valr. ValL < valr => Xh LamF (\ expr. Env (valr expr) -> Mu (Sigma (valr expr)))
evalL = \ exp rec env.
           match exp
           ( case #'Var (\ x. fromMaybe (rcon #'Err tt) (nth env x))
           | case #'Lam (\ e. rcon #'Clos (pair env e))
           | case #'App (\ p.
               as #'Clos (rec (sel p #'1) env) (\ clos.
                 (rec (sel clos #'2)) (cons (rec (sel p #'2) env) (sel clos #'1)))))
"#,
    ),
    (
        "eval-combined",
        r#"
type AllF : R[* -> *]
type AllF = { 'BConst := (\ t. Bool), 'If := (\ t. Triple t t t)
            , 'IConst := (\ t. Nat), 'Plus := (\ t. Pair t t)
            , 'Var := Const Nat, 'Lam := Id, 'App := (\ t. Pair t t) }

eval : forall valr. ValA < valr, ValB < valr, ValL < valr =>
       Xh AllF (\ expr. Env (valr expr) -> Mu (Sigma (valr expr)))
eval = evalA | evalB | evalL
"#,
    ),
    (
        "desugaring",
        r#"
app : forall z. LamF < z => Mu (Sigma z) -> Mu (Sigma z) -> Mu (Sigma z)
app = \ f e. rcon #'App (pair f e)

desugarB : forall z. LamF < z => Xh BoolF (\ w. Mu (Sigma z))
desugarB = \ exp rec.
            match exp
            ( case #'BConst
               ( case #'True (\ u. rcon #'Lam (rcon #'Lam (rcon #'Var one)))
               | case #'False (\ u. rcon #'Lam (rcon #'Lam (rcon #'Var zero))))
            | case #'If (\ t. app (app (rec (fst t)) (rec (snd t))) (rec (thd t))))

ext : forall z : R[* -> *]. Pi (Functor z) -> Xh z (\w. Mu (Sigma z))
ext = \ d v rec. in (fmapS d rec v)

desugar : forall y. BoolF < y, LamF < y - BoolF =>
          Pi (Functor (y - BoolF)) -> Xh y (\w. Mu (Sigma (y - BoolF)))
desugar = \ d. desugarB | ext d
"#,
    ),
];

/// Extra listings that reuse prelude names and are checked standalone on
/// top of the prelude, in a scratch namespace per unit.
pub const STANDALONE_UNITS: &[(&str, &str)] = &[
    (
        "not-point-free",
        r#"
notPF : Bool -> Bool
notPF = case #'True (con #'False) | case #'False (con #'True)
"#,
    ),
];

/// The whole prelude as one source file.
pub fn prelude() -> &'static str {
    use std::sync::OnceLock;
    static SRC: OnceLock<String> = OnceLock::new();
    SRC.get_or_init(|| {
        CHUNKS
            .iter()
            .map(|(_, s)| *s)
            .collect::<Vec<_>>()
            .join("\n")
    })
}
