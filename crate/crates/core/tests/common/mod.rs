#![allow(dead_code)]

use cocycle_lab::algebra::{BasePoint, SampleGrid, SkewEvolutionSemiflow, StateVector};
use cocycle_lab::models::{build_model, ModelDescriptor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn model(desc: ModelDescriptor) -> SkewEvolutionSemiflow {
    build_model(&desc).unwrap()
}

pub fn pure(c: f64) -> SkewEvolutionSemiflow {
    model(ModelDescriptor::pure_exponential(c))
}

pub fn sin() -> SkewEvolutionSemiflow {
    model(ModelDescriptor::sin_scalar())
}

pub fn diag() -> SkewEvolutionSemiflow {
    model(ModelDescriptor::diag_integral(vec![1.0, -1.0]))
}

pub fn builtins() -> Vec<(&'static str, SkewEvolutionSemiflow)> {
    vec![("sin_scalar", sin()), ("diag_integral", diag()), ("pure_exponential", pure(3.0))]
}

pub fn vec1(x: f64) -> StateVector {
    StateVector::new(vec![x]).unwrap()
}

/// Times `0, step, ..., max` on the model's default base points and `{+-e_k} u {+-1}`.
pub fn grid_for(xi: &SkewEvolutionSemiflow, max: f64, step: f64) -> SampleGrid {
    let count = (max / step).round() as usize + 1;
    SampleGrid::new(
        SampleGrid::linspace(0.0, max, count).unwrap(),
        xi.default_base_points(),
        SampleGrid::canonical_vectors(xi.dimension()),
    )
    .unwrap()
}

pub fn scalar_grid(times: Vec<f64>) -> SampleGrid {
    SampleGrid::new(times, vec![BasePoint::trivial(0.0)], SampleGrid::canonical_vectors(1)).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Composite Simpson with `panels` equal panels.
pub fn composite_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * i as f64);
    }
    // panels counts subintervals; Simpson pairs them
    sum * h / 3.0
}

/// `x_n(u) = 1/(2n+1) + beta_n/2 e^{-u}`, `beta_n = 1/(2n(2n+1))`, written out independently.
pub fn generator_oracle(n: u32, u: f64) -> f64 {
    let n = n as f64;
    1.0 / (2.0 * n + 1.0) + 0.5 / (2.0 * n * (2.0 * n + 1.0)) * (-u).exp()
}

pub fn sin_margin_oracle(t: f64, s: f64) -> f64 {
    let q = std::f64::consts::FRAC_PI_4;
    2.0 * t * (1.0 - (q * t).sin()) + 2.0 * s * (1.0 + (q * s).sin())
}

pub fn cli(args: &[&str]) -> i32 {
    let mut argv = vec!["cocycle-lab"];
    argv.extend_from_slice(args);
    cocycle_lab::cli::run(argv)
}

pub fn write_file(dir: &std::path::Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

pub fn read_json(path: &std::path::Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Runs the built binary with its output captured and returns the exit code.
pub fn bin(args: &[&str]) -> i32 {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_cocycle-lab"))
        .args(args)
        .output()
        .expect("spawn cocycle-lab");
    out.status.code().unwrap_or(-1)
}
