//! Exhaustive base-block search under line-regular groups.
//!
//! A `k`-subset `B` whose orbit under `G` is a linear space with `|G|`
//! lines must meet every orbit of `G` on unordered point pairs exactly
//! once. With every pair orbit regular and exactly `C(k,2)` of them, the
//! search grows sorted blocks `0 = b_1 < b_2 < ...` and keeps, for each
//! remaining candidate point, the set of pair orbits it would add; a
//! candidate dies as soon as one of those orbits repeats.
//!
//! Isomorph rejection keeps a block only if it is the lexicographically
//! least of its sorted images under `G`. That image always contains the
//! pair `{0, 1}` (some pair of `B` lies in the orbit of `{0, 1}`), so with
//! canonicity on the search is anchored at `b_2 = 1`.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::pairs;
use crate::canon::{canonical_form, canonical_form_until, Certificate};
use crate::designs::{verify_linear_space, Design};
use crate::error::{Error, Result};
use crate::groups::{pair_orbit_table, GroupAction, PairOrbitTable};

/// The orbit masks are `u128`, so at most this many pair orbits.
pub const MAX_PAIR_ORBITS: usize = 128;

pub const REASON_SHORT_PAIR_ORBIT: &str = "short-pair-orbit";
pub const REASON_ORBIT_COUNT: &str = "orbit-count-mismatch";
pub const PRUNE_COLLISION: &str = "pair-orbit-collision";
pub const PRUNE_ROOM: &str = "too-few-candidates";
pub const PRUNE_ANCHOR: &str = "anchor";
pub const PRUNE_NON_CANONICAL: &str = "non-canonical";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub k: usize,
    pub max_solutions: Option<usize>,
    pub time_budget: Option<Duration>,
    /// Number of free points chosen (below the anchor) before the tree is
    /// split into independent tasks.
    pub parallel_split_depth: usize,
    pub canonicity: bool,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl SearchConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            max_solutions: None,
            time_budget: None,
            parallel_split_depth: 1,
            canonicity: true,
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub k: usize,
    pub v: usize,
    pub group_order: usize,
    pub pair_orbits: usize,
    /// Sorted base blocks, each containing point 0.
    pub solutions: Vec<Vec<u32>>,
    pub complete: bool,
    /// The time budget ran out before the tree was exhausted.
    #[serde(default)]
    pub budget_exhausted: bool,
    /// Set when the instance cannot have solutions.
    pub infeasible: Option<String>,
    pub nodes_visited: u64,
    pub prunes_by_reason: BTreeMap<String, u64>,
    pub elapsed_secs: f64,
}

#[derive(Default)]
struct Counters {
    nodes: u64,
    collisions: u64,
    room: u64,
    non_canonical: u64,
}

impl Counters {
    fn merge(&mut self, o: &Counters) {
        self.nodes += o.nodes;
        self.collisions += o.collisions;
        self.room += o.room;
        self.non_canonical += o.non_canonical;
    }
}

struct Shared<'a> {
    g: &'a GroupAction,
    table: &'a PairOrbitTable,
    k: usize,
    canonicity: bool,
    deadline: Option<Instant>,
    stop: AtomicBool,
}

impl Shared<'_> {
    #[inline]
    fn bit(&self, a: u32, b: u32) -> u128 {
        1u128 << self.table.label(a, b)
    }

    /// Lexicographically least among all sorted images under the group.
    fn is_canonical(&self, block: &[u32]) -> bool {
        let mut img = vec![0u32; block.len()];
        for e in 1..self.g.order() {
            for (i, &x) in block.iter().enumerate() {
                img[i] = self.g.apply(e, x);
            }
            img.sort_unstable();
            if img.as_slice() < block {
                return false;
            }
        }
        true
    }
}

struct Worker<'s, 'a> {
    shared: &'s Shared<'a>,
    block: Vec<u32>,
    solutions: Vec<Vec<u32>>,
    cap: Option<usize>,
    capped: bool,
    timed_out: bool,
    /// Stop at this block length and record the prefix instead of descending.
    collect_at: Option<usize>,
    prefixes: Vec<Vec<u32>>,
    counters: Counters,
    /// A solution that failed re-verification (a bug, never expected).
    broken: Option<Vec<u32>>,
}

impl<'s, 'a> Worker<'s, 'a> {
    fn new(shared: &'s Shared<'a>, cap: Option<usize>, collect_at: Option<usize>) -> Self {
        Self {
            shared,
            block: Vec::with_capacity(shared.k),
            solutions: Vec::new(),
            cap,
            capped: false,
            timed_out: false,
            collect_at,
            prefixes: Vec::new(),
            counters: Counters::default(),
            broken: None,
        }
    }

    fn halted(&mut self) -> bool {
        if self.capped || self.timed_out {
            return true;
        }
        if self.counters.nodes & 0x3ff == 0 {
            if self.shared.stop.load(Ordering::Relaxed) {
                self.timed_out = true;
            } else if self.shared.deadline.is_some_and(|d| Instant::now() >= d) {
                self.shared.stop.store(true, Ordering::Relaxed);
                self.timed_out = true;
            }
        }
        self.timed_out
    }

    /// Rebuilds the search state for `prefix` and explores below it.
    /// Returns `false` if the prefix itself is inadmissible.
    fn run_from(&mut self, prefix: &[u32]) -> bool {
        let s = self.shared;
        let mut used = 0u128;
        for (i, &b) in prefix.iter().enumerate() {
            for &a in &prefix[..i] {
                let bit = s.bit(a, b);
                if used & bit != 0 {
                    return false;
                }
                used |= bit;
            }
        }
        let last = *prefix.last().expect("prefix holds point 0");
        let v = s.table.degree() as u32;
        let mut cands = Vec::new();
        'next: for q in last + 1..v {
            let mut mask = 0u128;
            for &b in prefix {
                let bit = s.bit(b, q);
                if (used | mask) & bit != 0 {
                    continue 'next;
                }
                mask |= bit;
            }
            cands.push((q, mask));
        }
        self.block.clear();
        self.block.extend_from_slice(prefix);
        self.dfs(used, &cands);
        true
    }

    fn dfs(&mut self, used: u128, cands: &[(u32, u128)]) {
        let s = self.shared;
        let len = self.block.len();
        if self.collect_at == Some(len) && len < s.k {
            self.prefixes.push(self.block.clone());
            return;
        }
        self.counters.nodes += 1;
        if self.halted() {
            return;
        }
        if len == s.k {
            self.leaf();
            return;
        }
        let need = s.k - len;
        if cands.len() < need {
            self.counters.room += 1;
            return;
        }
        let mut next = Vec::with_capacity(cands.len());
        for (i, &(p, mask_p)) in cands.iter().enumerate() {
            if cands.len() - i < need {
                break;
            }
            let used_p = used | mask_p;
            next.clear();
            for &(q, mask_q) in &cands[i + 1..] {
                let bit = s.bit(p, q);
                if mask_q & mask_p != 0 || (used_p | mask_q) & bit != 0 {
                    self.counters.collisions += 1;
                    continue;
                }
                next.push((q, mask_q | bit));
            }
            self.block.push(p);
            self.dfs(used_p, &next);
            self.block.pop();
            if self.capped || self.timed_out {
                return;
            }
        }
    }

    fn leaf(&mut self) {
        let s = self.shared;
        if s.canonicity && !s.is_canonical(&self.block) {
            self.counters.non_canonical += 1;
            return;
        }
        // every emitted orbit must be a linear space with |G| lines
        let d = Design::from_base_block(s.g, &self.block);
        if d.b() != s.g.order() || !verify_linear_space(&d).valid {
            self.broken.get_or_insert_with(|| self.block.clone());
            s.stop.store(true, Ordering::Relaxed);
            self.timed_out = true;
            return;
        }
        self.solutions.push(self.block.clone());
        if self.cap.is_some_and(|c| self.solutions.len() >= c) {
            self.capped = true;
        }
        if s.deadline.is_some_and(|d| Instant::now() >= d) {
            s.stop.store(true, Ordering::Relaxed);
            self.timed_out = true;
        }
    }
}

fn infeasible_report(
    g: &GroupAction,
    k: usize,
    orbits: usize,
    reason: &str,
    start: Instant,
) -> SearchReport {
    let mut prunes = BTreeMap::new();
    prunes.insert(reason.to_string(), 1);
    SearchReport {
        k,
        v: g.degree(),
        group_order: g.order(),
        pair_orbits: orbits,
        solutions: Vec::new(),
        complete: true,
        budget_exhausted: false,
        infeasible: Some(reason.to_string()),
        nodes_visited: 0,
        prunes_by_reason: prunes,
        elapsed_secs: start.elapsed().as_secs_f64(),
    }
}

/// Finds every base block (containing point 0) whose orbit under `g` is a
/// linear space on which `g` acts regularly on lines. With canonicity on,
/// exactly one block per distinct line orbit is returned.
pub fn find_line_regular_designs(g: &GroupAction, cfg: &SearchConfig) -> Result<SearchReport> {
    let start = Instant::now();
    let (v, k) = (g.degree(), cfg.k);
    if k < 2 || k >= v {
        return Err(Error::InvalidArgument(format!("need 2 <= k < v, got k = {k}, v = {v}")));
    }
    if !g.is_transitive() {
        return Err(Error::InvalidArgument("search needs a transitive group".into()));
    }
    let table = pair_orbit_table(g)?;
    if !table.is_regular() {
        return Ok(infeasible_report(g, k, table.num_orbits(), REASON_SHORT_PAIR_ORBIT, start));
    }
    if table.num_orbits() as u64 != pairs(k as u64) {
        return Ok(infeasible_report(g, k, table.num_orbits(), REASON_ORBIT_COUNT, start));
    }
    if table.num_orbits() > MAX_PAIR_ORBITS {
        return Err(Error::TooLarge(format!(
            "{} pair orbits (at most {MAX_PAIR_ORBITS} supported)",
            table.num_orbits()
        )));
    }

    let shared = Shared {
        g,
        table: &table,
        k,
        canonicity: cfg.canonicity,
        deadline: cfg.time_budget.map(|d| start + d),
        stop: AtomicBool::new(false),
    };
    let mut prunes = BTreeMap::new();
    let anchor: Vec<u32> = if cfg.canonicity {
        prunes.insert(PRUNE_ANCHOR.to_string(), v as u64 - 2);
        vec![0, 1]
    } else {
        vec![0]
    };

    // split the tree into prefixes of length anchor + split depth
    let mut splitter = Worker::new(&shared, None, Some(anchor.len() + cfg.parallel_split_depth));
    let mut counters = Counters::default();
    let mut tasks: Vec<Vec<u32>> = Vec::new();
    if splitter.run_from(&anchor) {
        tasks = std::mem::take(&mut splitter.prefixes);
    }
    counters.merge(&splitter.counters);
    let mut solutions = std::mem::take(&mut splitter.solutions);
    let mut capped = splitter.capped;
    let mut timed_out = splitter.timed_out;

    let mut broken = splitter.broken.take();
    let run_tasks = || -> Vec<(Vec<Vec<u32>>, Counters, bool, bool, Option<Vec<u32>>)> {
        tasks
            .par_iter()
            .map(|prefix| {
                let mut w = Worker::new(&shared, cfg.max_solutions, None);
                if shared.stop.load(Ordering::Relaxed)
                    || shared.deadline.is_some_and(|d| Instant::now() >= d)
                {
                    w.timed_out = true;
                } else {
                    w.run_from(prefix);
                }
                (w.solutions, w.counters, w.capped, w.timed_out, w.broken)
            })
            .collect()
    };
    let results = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(run_tasks),
        None => run_tasks(),
    };
    for (sols, c, cap, to, bad) in results {
        broken = broken.or(bad);
        solutions.extend(sols);
        counters.merge(&c);
        capped |= cap;
        timed_out |= to;
    }
    solutions.sort();
    if let Some(cap) = cfg.max_solutions {
        if solutions.len() > cap {
            solutions.truncate(cap);
            capped = true;
        }
    }

    if let Some(b) = broken {
        return Err(Error::InvalidArgument(format!(
            "internal error: base block {b:?} does not generate a line-regular linear space"
        )));
    }

    for (name, n) in [
        (PRUNE_COLLISION, counters.collisions),
        (PRUNE_ROOM, counters.room),
        (PRUNE_NON_CANONICAL, counters.non_canonical),
    ] {
        prunes.insert(name.to_string(), n);
    }
    Ok(SearchReport {
        k,
        v,
        group_order: g.order(),
        pair_orbits: table.num_orbits(),
        solutions,
        complete: !capped && !timed_out,
        budget_exhausted: timed_out,
        infeasible: None,
        nodes_visited: counters.nodes,
        prunes_by_reason: prunes,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

/// Largest `C(v, k)` the brute-force oracle accepts.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Every `k`-subset containing 0 whose orbit under `g` is a linear space,
/// checked directly against the axioms.
pub fn brute_force_designs(g: &GroupAction, k: usize) -> Result<Vec<Vec<u32>>> {
    let v = g.degree();
    if k < 2 || k > v {
        return Err(Error::InvalidArgument(format!("need 2 <= k <= v, got k = {k}, v = {v}")));
    }
    if binomial(v as u128, k as u128) > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge(format!("C({v}, {k}) exceeds {BRUTE_FORCE_LIMIT}")));
    }
    // all (k-1)-subsets of 1..v in lexicographic order
    let mut subsets = Vec::new();
    let mut idx: Vec<u32> = (1..k as u32).collect();
    loop {
        let mut block = vec![0u32];
        block.extend_from_slice(&idx);
        subsets.push(block);
        let m = idx.len();
        let Some(i) = (0..m).rev().find(|&i| idx[i] < (v - m + i) as u32) else {
            break;
        };
        idx[i] += 1;
        for j in i + 1..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
    let keep: Vec<Vec<u32>> = subsets
        .into_par_iter()
        .filter(|b| verify_linear_space(&Design::from_base_block(g, b)).valid)
        .collect();
    Ok(keep)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceClass {
    /// Lexicographically least base block generating a design in the class.
    pub representative: Vec<u32>,
    /// Number of input base blocks in the class.
    pub members: usize,
    pub certificate: Certificate,
}

/// Groups base blocks by isomorphism of the designs they generate, ordered by
/// representative.
pub fn reduce_to_equivalence_classes(
    solutions: &[Vec<u32>],
    g: &GroupAction,
) -> Result<Vec<EquivalenceClass>> {
    let certs: Vec<Certificate> = solutions
        .par_iter()
        .map(|b| canonical_form(&Design::from_base_block(g, b)))
        .collect::<Result<_>>()?;
    let mut classes: Vec<EquivalenceClass> = Vec::new();
    for (b, cert) in solutions.iter().zip(certs) {
        match classes.iter_mut().find(|c| c.certificate.same_class(&cert)) {
            Some(c) => {
                c.members += 1;
                if *b < c.representative {
                    c.representative = b.clone();
                    c.certificate = cert;
                }
            }
            None => classes.push(EquivalenceClass {
                representative: b.clone(),
                members: 1,
                certificate: cert,
            }),
        }
    }
    classes.sort_by(|a, b| a.representative.cmp(&b.representative));
    Ok(classes)
}

/// One isomorphism class of a design list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignClass {
    /// Index of the first input design in the class.
    pub representative: usize,
    pub members: usize,
    pub certificate: Certificate,
}

/// Groups designs (possibly from different groups) by isomorphism, in order
/// of first appearance. Returns `Ok(None)` if `deadline` passes first.
pub fn classify_designs(
    designs: &[Design],
    deadline: Option<Instant>,
) -> Result<Option<Vec<DesignClass>>> {
    classify_with(designs.len(), |i| designs[i].clone(), deadline)
}

/// As [`classify_designs`], building design `i` on demand with `make(i)` so
/// that only a few large designs are alive at once.
pub fn classify_with<F>(n: usize, make: F, deadline: Option<Instant>) -> Result<Option<Vec<DesignClass>>>
where
    F: Fn(usize) -> Design + Sync,
{
    const CHUNK: usize = 64;
    let mut classes: Vec<DesignClass> = Vec::new();
    let mut index: HashMap<(usize, usize, Vec<Vec<u32>>), usize> = HashMap::new();
    for lo in (0..n).step_by(CHUNK) {
        let certs: Vec<Option<Certificate>> = (lo..n.min(lo + CHUNK))
            .into_par_iter()
            .map(|i| {
                let d = make(i);
                match deadline {
                    Some(t) => canonical_form_until(&d, t),
                    None => canonical_form(&d).map(Some),
                }
            })
            .collect::<Result<_>>()?;
        for (off, cert) in certs.into_iter().enumerate() {
            let Some(cert) = cert else {
                return Ok(None);
            };
            let key = (cert.v, cert.k, cert.blocks.clone());
            match index.get(&key) {
                Some(&c) => classes[c].members += 1,
                None => {
                    index.insert(key, classes.len());
                    classes.push(DesignClass { representative: lo + off, members: 1, certificate: cert });
                }
            }
        }
    }
    Ok(Some(classes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{build_group, GroupSpec};

    #[test]
    fn z7_fano() {
        let g = build_group(&GroupSpec::cyclic(7)).unwrap();
        let rep = find_line_regular_designs(&g, &SearchConfig::new(3)).unwrap();
        assert!(rep.complete);
        assert_eq!(rep.solutions, vec![vec![0, 1, 3], vec![0, 1, 5]]);
        let classes = reduce_to_equivalence_classes(&rep.solutions, &g).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].members, 2);

        let mut raw_cfg = SearchConfig::new(3);
        raw_cfg.canonicity = false;
        let raw = find_line_regular_designs(&g, &raw_cfg).unwrap();
        // two difference-set designs, three blocks through 0 each
        assert_eq!(raw.solutions.len(), 6);
    }

    #[test]
    fn infeasible_instances() {
        let g = build_group(&GroupSpec::cyclic(8)).unwrap();
        let rep = find_line_regular_designs(&g, &SearchConfig::new(3)).unwrap();
        assert!(rep.complete && rep.solutions.is_empty());
        assert_eq!(rep.infeasible.as_deref(), Some(REASON_SHORT_PAIR_ORBIT));

        let g = build_group(&GroupSpec::cyclic(7)).unwrap();
        let rep = find_line_regular_designs(&g, &SearchConfig::new(4)).unwrap();
        assert_eq!(rep.infeasible.as_deref(), Some(REASON_ORBIT_COUNT));
        assert!(find_line_regular_designs(&g, &SearchConfig::new(7)).is_err());
    }

    #[test]
    fn brute_force_small() {
        let g = build_group(&GroupSpec::cyclic(7)).unwrap();
        assert_eq!(brute_force_designs(&g, 3).unwrap().len(), 6);
        assert!(brute_force_designs(&g, 4).unwrap().is_empty());
        let big = build_group(&GroupSpec::cyclic(91)).unwrap();
        assert!(matches!(brute_force_designs(&big, 10), Err(Error::TooLarge(_))));
    }

    #[test]
    fn max_solutions_caps() {
        let g = build_group(&GroupSpec::cyclic(21)).unwrap();
        let mut cfg = SearchConfig::new(5);
        cfg.canonicity = false;
        cfg.max_solutions = Some(1);
        let rep = find_line_regular_designs(&g, &cfg).unwrap();
        assert_eq!(rep.solutions.len(), 1);
        assert!(!rep.complete);
    }

    #[test]
    fn empty_class_reduction() {
        let g = build_group(&GroupSpec::cyclic(7)).unwrap();
        assert!(reduce_to_equivalence_classes(&[], &g).unwrap().is_empty());
    }
}
