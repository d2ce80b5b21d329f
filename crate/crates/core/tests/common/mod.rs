//! Shared fixtures and the seeded random-grammar generator.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tabprob::model::{first_sets, left_corner_closure, parse_pcfg, Pcfg, Sym};

pub const G0: &str = "s -> s s : 0.4\ns -> a : 0.3\ns -> b : 0.3\n";
pub const G0_CFG: &str = "s -> s s\ns -> a\ns -> b\n";
pub const CHAIN: &str = "trans s0 s0 0.5\ntrans s0 s3 0.3\ntrans s0 s4 0.2\n";

pub const PLANS: &str = "\
start S
S -> Pl : 0.1
S -> St : 0.4
S -> Cl : 0.3
S -> Mo : 0.2
Pl -> play : 0.5
Pl -> play Pl : 0.3
Pl -> Cl : 0.1
Pl -> Mo : 0.1
St -> study : 0.1
St -> study St : 0.3
St -> Pl St : 0.2
St -> Cl St : 0.4
Cl -> clean : 0.4
Cl -> clean Cl : 0.5
Cl -> Pl Cl : 0.1
Mo -> mow : 0.3
Mo -> mow Mo : 0.1
Mo -> Pl Mo : 0.4
Mo -> Cl Mo : 0.2
plan Pl
plan St
plan Cl
plan Mo
";

pub type Structure = BTreeMap<String, BTreeSet<BTreeSet<String>>>;

/// Goal -> set of disjuncts, each a set of atoms. Continuation lines are
/// joined first; order inside the dump does not matter.
pub fn structure(dump: &str) -> Structure {
    let mut joined: Vec<String> = Vec::new();
    for line in dump.lines().filter(|l| !l.trim().is_empty()) {
        if line.starts_with(' ') {
            let last = joined.last_mut().expect("continuation after a head");
            last.push(' ');
            last.push_str(line.trim());
        } else {
            joined.push(line.trim().to_string());
        }
    }
    joined
        .into_iter()
        .map(|line| match line.split_once(" <=> ") {
            None => (line, BTreeSet::from([BTreeSet::new()])),
            Some((head, body)) => {
                let alts = body
                    .split(" v ")
                    .map(|alt| alt.split(" & ").map(|a| a.trim().to_string()).collect())
                    .collect();
                (head.to_string(), alts)
            }
        })
        .collect()
}

pub const PREFIX_A_GRAPH: &str = "\
pre_pcfg([a]) <=> pre_pcfg([s],[a],[])
pre_pcfg([s],[a],[]) <=>
   pre_pcfg([s,s],[a],[]) & msw(s,[s,s]) v pre_pcfg([a],[a],[]) & msw(s,[a])
pre_pcfg([s,s],[a],[]) <=>
   pre_pcfg([a],[a],[]) & msw(s,[a]) v pre_pcfg([s,s],[a],[]) & msw(s,[s,s])
pre_pcfg([a],[a],[])
";

pub const PLCG_AB_GRAPH: &str = "\
pre_plcg([a,b]) <=> g_call([s],[a,b],[])
g_call([s],[a,b],[]) <=> lc_call(s,a,[b],[]) & msw(first(s),a)
lc_call(s,a,[b],[])
   <=> g_call([],[b],[b]) & att_or_pro(s,pro)
          & lc_call(s,s,[b],[]) & msw(lc(s,a),rule(s,[a]))
g_call([],[b],[b])
lc_call(s,s,[b],[])
   <=> g_call([s],[b],[]) & att_or_pro(s,att)
          & msw(lc(s,s),rule(s,[s,s]))
     v g_call([s],[b],[]) & att_or_pro(s,pro)
          & lc_call(s,s,[],[]) & msw(lc(s,s),rule(s,[s,s]))
g_call([s],[b],[]) <=> lc_call(s,b,[],[]) & msw(first(s),b)
lc_call(s,b,[],[])
   <=> att_or_pro(s,att) & msw(lc(s,b),rule(s,[b]))
     v att_or_pro(s,pro) & lc_call(s,s,[],[])
          & msw(lc(s,b),rule(s,[b]))
lc_call(s,s,[],[])
   <=> att_or_pro(s,att) & msw(lc(s,s),rule(s,[s,s]))
     v att_or_pro(s,pro) & lc_call(s,s,[],[])
          & msw(lc(s,s),rule(s,[s,s]))
att_or_pro(s,att) <=> msw(att(s),att)
att_or_pro(s,pro) <=> msw(att(s),pro)
";

pub const PLCG_AB_EQUATION_LINES: [&str; 6] = [
    "X(g_call([s],[a,b],[])) = 0.5*X(lc_call(s,a,[b],[]))",
    "X(g_call([s],[b],[])) = 0.5*X(lc_call(s,b,[],[]))",
    "X(g_call([],[b],[b])) = 1",
    "X(att_or_pro(s,att)) = 0.5",
    "X(att_or_pro(s,pro)) = 0.5",
    "X(lc_call(s,s,[],[])) = 1*X(att_or_pro(s,att)) + 1*X(att_or_pro(s,pro))*X(lc_call(s,s,[],[]))",
];

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// A random grammar with the prefixes drawn for it.
#[derive(Debug, Clone)]
pub struct Case {
    pub text: String,
    pub pcfg: Pcfg<f64>,
    pub lc_cyclic: bool,
    pub prefixes: Vec<Vec<String>>,
}

const NONTERMINALS: [&str; 4] = ["s", "x", "y", "z"];
const TERMINALS: [&str; 3] = ["a", "b", "c"];
const MAX_PREFIX: usize = 6;

/// `k` positive parts of 1000, as three-decimal probabilities.
fn split_mass(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let mut cuts: BTreeSet<u32> = BTreeSet::new();
    while cuts.len() < k - 1 {
        cuts.insert(rng.gen_range(1..1000));
    }
    let mut bounds = vec![0];
    bounds.extend(cuts);
    bounds.push(1000);
    bounds.windows(2).map(|w| f64::from(w[1] - w[0]) / 1000.0).collect()
}

fn random_text(rng: &mut ChaCha8Rng) -> String {
    let n_nt = rng.gen_range(1..=4);
    let n_t = rng.gen_range(1..=3);
    let mut text = String::new();
    for lhs in &NONTERMINALS[..n_nt] {
        let mut bodies: Vec<Vec<&str>> = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let len = rng.gen_range(1..=3);
            let body: Vec<&str> = (0..len)
                .map(|_| {
                    if rng.gen_bool(0.4) {
                        NONTERMINALS[rng.gen_range(0..n_nt)]
                    } else {
                        TERMINALS[rng.gen_range(0..n_t)]
                    }
                })
                .collect();
            if !bodies.contains(&body) {
                bodies.push(body);
            }
        }
        for (body, p) in bodies.iter().zip(split_mass(rng, bodies.len())) {
            text.push_str(&format!("{lhs} -> {} : {p}\n", body.join(" ")));
        }
    }
    text
}

/// Upper bound on the spectral radius of the expected-offspring matrix via
/// `||E^16||^(1/16)`; below 1 means the grammar is consistent.
fn offspring_radius_bound(pcfg: &Pcfg<f64>) -> f64 {
    let g = pcfg.grammar();
    let nts: Vec<Sym> = g.nonterminals().collect();
    let n = nts.len();
    let pos = |s: Sym| nts.iter().position(|&x| x == s);
    let mut e = vec![vec![0.0; n]; n];
    for (id, rule) in g.rules().iter().enumerate() {
        let row = pos(rule.lhs).unwrap();
        for &sym in &rule.rhs {
            if let Some(col) = pos(sym) {
                e[row][col] += pcfg.prob(id);
            }
        }
    }
    for _ in 0..4 {
        let mut sq = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    sq[i][j] += e[i][k] * e[k][j];
                }
            }
        }
        e = sq;
    }
    let norm = e.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    norm.powf(1.0 / 16.0)
}

/// Leftmost random derivation; `None` if it runs too long.
fn sample_sentence(pcfg: &Pcfg<f64>, rng: &mut ChaCha8Rng) -> Option<Vec<String>> {
    let g = pcfg.grammar();
    let mut stack = vec![g.start()];
    let mut out = Vec::new();
    let mut steps = 0;
    while let Some(top) = stack.pop() {
        steps += 1;
        if steps > 400 || out.len() > 40 {
            return None;
        }
        if !g.is_nonterminal(top) {
            out.push(g.name(top).to_string());
            continue;
        }
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let rules = g.rules_for(top);
        let mut chosen = *rules.last().unwrap();
        for &r in rules {
            acc += pcfg.prob(r);
            if u < acc {
                chosen = r;
                break;
            }
        }
        stack.extend(g.rule(chosen).rhs.iter().rev());
    }
    Some(out)
}

/// Shortest prefix `u t` that puts a left-recursive nonterminal `X` at the
/// left edge after `u`, with `t` a first terminal of `X`.
pub fn cycle_exercising_prefix(pcfg: &Pcfg<f64>) -> Option<Vec<String>> {
    let g = pcfg.grammar();
    let lc = left_corner_closure(g);
    let first = first_sets(g);
    let mut queue: VecDeque<(Vec<Sym>, Vec<Sym>)> = VecDeque::from([(vec![], vec![g.start()])]);
    let mut seen = BTreeSet::new();
    while let Some((u, stack)) = queue.pop_front() {
        let Some((&top, rest)) = stack.split_last() else {
            continue;
        };
        if !g.is_nonterminal(top) {
            if u.len() + 1 >= MAX_PREFIX {
                continue;
            }
            let mut u2 = u.clone();
            u2.push(top);
            if seen.insert((u2.clone(), rest.to_vec())) {
                queue.push_back((u2, rest.to_vec()));
            }
            continue;
        }
        if lc.contains(top, top) {
            let t = *first[&top].iter().next()?;
            let mut words: Vec<String> = u.iter().map(|&s| g.name(s).to_string()).collect();
            words.push(g.name(t).to_string());
            return Some(words);
        }
        for &r in g.rules_for(top) {
            let mut next = rest.to_vec();
            next.extend(g.rule(r).rhs.iter().rev());
            if next.len() <= 8 && seen.insert((u.clone(), next.clone())) {
                queue.push_back((u.clone(), next));
            }
        }
    }
    None
}

/// One accepted random grammar with up to three sampled prefixes, plus a
/// cycle-exercising prefix when the left-corner relation is cyclic.
pub fn random_case(rng: &mut ChaCha8Rng) -> Case {
    loop {
        let text = random_text(rng);
        let Ok(pcfg) = parse_pcfg::<f64>(&text) else {
            continue;
        };
        if offspring_radius_bound(&pcfg) >= 0.95 {
            continue;
        }
        let lc_cyclic = left_corner_closure(pcfg.grammar()).is_cyclic();
        let mut prefixes: Vec<Vec<String>> = Vec::new();
        if lc_cyclic {
            match cycle_exercising_prefix(&pcfg) {
                Some(p) => prefixes.push(p),
                None => continue,
            }
        }
        for _ in 0..12 {
            if prefixes.len() >= 4 {
                break;
            }
            if let Some(sentence) = sample_sentence(&pcfg, rng) {
                if sentence.is_empty() {
                    continue;
                }
                let len = rng.gen_range(1..=sentence.len().min(MAX_PREFIX));
                let p = sentence[..len].to_vec();
                if !prefixes.contains(&p) {
                    prefixes.push(p);
                }
            }
        }
        if prefixes.is_empty() {
            continue;
        }
        prefixes.shuffle(rng);
        return Case {
            text,
            pcfg,
            lc_cyclic,
            prefixes,
        };
    }
}

pub fn random_suite(seed: u64, count: usize) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_case(&mut rng)).collect()
}
