//! Deterministic random program generation for the verification suites:
//! small ground normal programs (optionally with classical negation) and
//! stratified programs, driven by a self-contained PRNG so every run is
//! reproducible from a seed.

use crate::ast::{Atom, BodyLiteral, Literal, Program, Rule};

/// Splitmix64. Small, seedable, identical on every platform.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// True with probability `num/den`.
    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.next_u64() % den < num
    }
}

#[derive(Debug, Clone)]
pub struct CorpusConfig {
    /// Number of propositional atoms (`a0`, `a1`, ...).
    pub atoms: usize,
    pub max_rules: usize,
    pub max_body: usize,
    /// Allow classically negated literals.
    pub classical: bool,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            atoms: 8,
            max_rules: 12,
            max_body: 3,
            classical: false,
        }
    }
}

fn atom(i: usize) -> Atom {
    Atom::new(format!("a{i}"), Vec::new())
}

fn random_literal(rng: &mut Rng, cfg: &CorpusConfig) -> Literal {
    let a = atom(rng.below(cfg.atoms));
    if cfg.classical && rng.chance(1, 4) {
        Literal::negative(a)
    } else {
        Literal::positive(a)
    }
}

/// A random ground normal program: up to `max_rules` rules with bodies of
/// up to `max_body` literals, each independently naf-negated.
pub fn random_ground_program(rng: &mut Rng, cfg: &CorpusConfig) -> Program {
    let nrules = 1 + rng.below(cfg.max_rules);
    let mut rules = Vec::new();
    for _ in 0..nrules {
        let head = random_literal(rng, cfg);
        let nbody = rng.below(cfg.max_body + 1);
        let mut body = Vec::new();
        for _ in 0..nbody {
            let lit = random_literal(rng, cfg);
            let b = if rng.chance(1, 2) {
                BodyLiteral::naf(lit)
            } else {
                BodyLiteral::plain(lit)
            };
            if !body.contains(&b) {
                body.push(b);
            }
        }
        let rule = Rule::new(head, body);
        if !rules.contains(&rule) {
            rules.push(rule);
        }
    }
    Program::new(rules)
}

/// A random stratified ground program: every atom is assigned a stratum,
/// plain body literals come from the head's stratum or below, naf literals
/// strictly below. No classical negation.
pub fn random_stratified_program(rng: &mut Rng, cfg: &CorpusConfig) -> Program {
    let strata: Vec<usize> = (0..cfg.atoms).map(|_| rng.below(4)).collect();
    let nrules = 1 + rng.below(cfg.max_rules);
    let mut rules = Vec::new();
    for _ in 0..nrules {
        let h = rng.below(cfg.atoms);
        let hs = strata[h];
        let nbody = rng.below(cfg.max_body + 1);
        let mut body = Vec::new();
        for _ in 0..nbody {
            let candidates: Vec<usize> = if rng.chance(1, 2) && hs > 0 {
                // naf literal from a strictly lower stratum
                (0..cfg.atoms).filter(|&i| strata[i] < hs).collect()
            } else {
                Vec::new()
            };
            let b = if !candidates.is_empty() {
                BodyLiteral::naf(Literal::positive(atom(
                    candidates[rng.below(candidates.len())],
                )))
            } else {
                let lower: Vec<usize> = (0..cfg.atoms).filter(|&i| strata[i] <= hs).collect();
                BodyLiteral::plain(Literal::positive(atom(lower[rng.below(lower.len())])))
            };
            if !body.contains(&b) {
                body.push(b);
            }
        }
        let rule = Rule::new(Literal::positive(atom(h)), body);
        if !rules.contains(&rule) {
            rules.push(rule);
        }
    }
    Program::new(rules)
}

/// Every ground literal over the corpus alphabet (both signs when
/// `classical` is set).
pub fn all_literals(cfg: &CorpusConfig) -> Vec<Literal> {
    let mut out = Vec::new();
    for i in 0..cfg.atoms {
        out.push(Literal::positive(atom(i)));
        if cfg.classical {
            out.push(Literal::negative(atom(i)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    #[test]
    fn generation_is_deterministic() {
        let cfg = CorpusConfig::default();
        let p1 = random_ground_program(&mut Rng::new(7), &cfg);
        let p2 = random_ground_program(&mut Rng::new(7), &cfg);
        assert_eq!(p1.rules(), p2.rules());
    }

    #[test]
    fn stratified_generator_is_stratified() {
        let cfg = CorpusConfig::default();
        let mut rng = Rng::new(42);
        for _ in 0..100 {
            let p = random_stratified_program(&mut rng, &cfg);
            let g = oracle::ground(&p, 0, 1_000_000).unwrap();
            assert!(oracle::is_stratified_ground(&g), "{p}");
        }
    }
}
