fn main() {
    let cfg = rome::entail::EntailConfig::default();
    let mut p = rome::program::Program::new(cfg);
    for (name, src) in rome::prelude::CHUNKS {
        if *name == "eq" { break; }
        p.load_source(name, src).unwrap();
    }
    let steps: &[(&str, &str)] = &[
        ("eq-ty", "type Eq : * -> *\ntype Eq = \\ t. t -> t -> Bool\n"),
        ("branch2", "orElse : forall z t. Sigma { 'A := Unit } -> ((Sigma { 'A := Unit } -> t) -> (Sigma (z - { 'A := Unit }) -> t) -> Sigma z -> t)\norElse = \\s f g. f | g\n"),
        ("eqS", "eqS : forall z : R[*]. Pi (Eq z) -> Eq (Sigma z)\neqS = \\ d v w. ana #(\\ x. x)\n                   (\\ l y. match v\n                           ( case l (\\ x. sel d l x y)\n                           | const False)) w\n"),
    ];
    for (name, src) in steps {
        match p.load_source(name, src) {
            Ok(_) => println!("OK   {}", name),
            Err(e) => println!("FAIL {}: {}", name, e),
        }
    }
}
