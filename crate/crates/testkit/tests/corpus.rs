use testkit::corpus::CORPUS;
use testkit::interp::{run_main, Checks, Outcome};

#[test]
fn corpus_loads_with_small_input_spaces() {
    assert!(CORPUS.len() >= 20);
    for p in CORPUS {
        frontend::load_str(p.name, p.source).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        assert!(p.inputs.len() <= 3, "{}", p.name);
        assert!(p.inputs.iter().all(|(lo, hi)| hi - lo < 20), "{}", p.name);
    }
}

#[test]
fn every_program_has_valid_inputs_that_run() {
    for p in CORPUS {
        let ast = frontend::load_str(p.name, p.source).unwrap();
        let checks = Checks::new(&ast, []);
        let outcomes: Vec<Outcome> = p.tuples().iter().filter_map(|t| run_main(&ast, &checks, t, &mut ())).collect();
        assert!(!outcomes.is_empty(), "{}", p.name);
        assert!(outcomes.iter().any(|o| matches!(o, Outcome::Returned(_))), "{}: {outcomes:?}", p.name);
    }
}

#[test]
fn known_results() {
    let run = |name: &str, args: &[i64]| {
        let p = testkit::corpus::get(name).unwrap();
        let ast = frontend::load_str(p.name, p.source).unwrap();
        run_main(&ast, &Checks::new(&ast, []), args, &mut ())
    };
    assert_eq!(run("gcd", &[12, 18]), Some(Outcome::Returned(6)));
    assert_eq!(run("fib", &[10]), Some(Outcome::Returned(55)));
    assert_eq!(run("factorial", &[5]), Some(Outcome::Returned(120)));
    assert_eq!(run("even_odd", &[7]), Some(Outcome::Returned(0)));
    assert_eq!(run("binsearch", &[6]), Some(Outcome::Returned(3)));
    assert_eq!(run("binsearch", &[7]), Some(Outcome::Returned(-1)));
    assert_eq!(run("triangle", &[3, 4, 5]), Some(Outcome::Returned(1)));
    assert_eq!(run("gcd", &[0, 3]), None);
}
