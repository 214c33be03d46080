//! Sample programs with bounded inputs for exhaustive testing.

/// One program and the range of each `main` argument. Tuples outside
/// `main`'s precondition are skipped by the interpreter.
#[derive(Clone, Copy, Debug)]
pub struct Program {
    pub name: &'static str,
    pub source: &'static str,
    pub inputs: &'static [(i64, i64)],
}

macro_rules! program {
    ($name:literal, $inputs:expr) => {
        Program {
            name: $name,
            source: include_str!(concat!("../corpus/", $name, ".mc")),
            inputs: $inputs,
        }
    };
}

pub const CORPUS: &[Program] = &[
    program!("pipeline", &[(-2, 12)]),
    program!("abs_max", &[(-10, 9), (-10, 9)]),
    program!("nested_loops", &[(0, 12), (0, 5)]),
    program!("gcd", &[(1, 20), (1, 20)]),
    program!("fib", &[(0, 19)]),
    program!("array_sum", &[(0, 10), (-3, 12)]),
    program!("fnptr_select", &[(0, 1), (-8, 8)]),
    program!("factorial", &[(0, 10)]),
    program!("collatz", &[(1, 20)]),
    program!("binsearch", &[(-2, 17)]),
    program!("guarded_div", &[(-5, 5), (-5, 5)]),
    program!("short_circuit", &[(-6, 6)]),
    program!("deep_calls", &[(0, 9)]),
    program!("even_odd", &[(0, 15)]),
    program!("signs", &[(-10, 9)]),
    program!("first_above", &[(0, 19)]),
    program!("modulo_index", &[(0, 19)]),
    program!("apply", &[(-7, 7), (0, 1)]),
    program!("contracts", &[(0, 9)]),
    program!("countdown", &[(-10, 9)]),
    program!("min3", &[(-4, 4), (-4, 4), (-4, 4)]),
    program!("triangle", &[(1, 8), (1, 8), (1, 8)]),
    program!("power", &[(-3, 3), (0, 6)]),
    program!("loop_assert", &[(0, 19)]),
    program!("many_targets", &[(0, 19)]),
];

pub fn get(name: &str) -> Option<&'static Program> {
    CORPUS.iter().find(|p| p.name == name)
}

impl Program {
    /// Every argument tuple in the declared ranges.
    pub fn tuples(&self) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        for &(lo, hi) in self.inputs {
            out = out
                .into_iter()
                .flat_map(|t| {
                    (lo..=hi).map(move |v| {
                        let mut t = t.clone();
                        t.push(v);
                        t
                    })
                })
                .collect();
        }
        out
    }
}
