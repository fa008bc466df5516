//! Finite permutation groups acting on `0..v`.
//!
//! Two kinds of group are supported. Affine semidirect products `M:⟨φ⟩`
//! act on the abelian group `M` itself, with `(j, m)` sending `x` to
//! `φ^j(x) + m`; explicit groups are closures of a list of generator
//! permutations. Elements of either kind are addressed by an index in
//! `0..order`, and all actions are on the right.
//!
//! Points of an affine group are elements of `M` in big-endian mixed radix:
//! cyclic components in listed order, then the vector coordinates
//! `0..e`. For `M = Z_53 × GF(3)^3` the point `z·27 + a0·9 + a1·3 + a2`
//! is `(z, (a0, a1, a2))`.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{self, Perm};

/// Upper bound on explicit group orders (full element enumeration).
pub const MAX_EXPLICIT_ORDER: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorComponent {
    pub p: u64,
    pub e: usize,
}

/// Declarative group description, serialized as tagged JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    AffineSemidirect {
        #[serde(default)]
        cyclic_moduli: Vec<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vector: Option<VectorComponent>,
        top_order: u64,
        #[serde(default)]
        multipliers: Vec<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<u64>>>,
    },
    Explicit {
        degree: usize,
        generators: Vec<Vec<u32>>,
    },
}

impl GroupSpec {
    /// The regular cyclic group `Z_n`.
    pub fn cyclic(n: u64) -> Self {
        GroupSpec::AffineSemidirect {
            cyclic_moduli: vec![n],
            vector: None,
            top_order: 1,
            multipliers: vec![1],
            matrix: None,
        }
    }

    /// `Z_n : Z_s` where the top generator multiplies by `t`.
    pub fn cyclic_with_multiplier(n: u64, s: u64, t: u64) -> Self {
        GroupSpec::AffineSemidirect {
            cyclic_moduli: vec![n],
            vector: None,
            top_order: s,
            multipliers: vec![t],
            matrix: None,
        }
    }

    pub fn explicit(degree: usize, generators: Vec<Vec<u32>>) -> Self {
        GroupSpec::Explicit { degree, generators }
    }
}

/// The affine realization of `M:⟨φ⟩` on the points of `M`.
#[derive(Clone, Debug)]
pub struct AffineGroup {
    radices: Vec<u64>,
    /// Number of leading radices that are cyclic components; the rest are
    /// vector coordinates over GF(p).
    n_cyclic: usize,
    digits: Vec<Vec<u32>>,
    weights: Vec<usize>,
    top_order: usize,
    /// `phi_pow[j][x] = φ^j(x)`.
    phi_pow: Vec<Vec<u32>>,
}

impl AffineGroup {
    pub fn size_of_m(&self) -> usize {
        self.digits.len()
    }

    pub fn top_order(&self) -> usize {
        self.top_order
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        let (da, db) = (&self.digits[a as usize], &self.digits[b as usize]);
        let mut x = 0;
        for i in 0..self.radices.len() {
            let s = (da[i] as u64 + db[i] as u64) % self.radices[i];
            x += s as usize * self.weights[i];
        }
        x as u32
    }

    pub fn neg(&self, a: u32) -> u32 {
        let da = &self.digits[a as usize];
        let mut x = 0;
        for i in 0..self.radices.len() {
            let s = (self.radices[i] - da[i] as u64) % self.radices[i];
            x += s as usize * self.weights[i];
        }
        x as u32
    }

    pub fn phi_pow(&self, j: usize, x: u32) -> u32 {
        self.phi_pow[j % self.top_order][x as usize]
    }

    /// Translation `x ↦ x + m` as a permutation.
    pub fn translation(&self, m: u32) -> Perm {
        (0..self.size_of_m() as u32).map(|x| self.add(x, m)).collect()
    }

    /// Generators of the translation subgroup `M` (one unit per digit).
    pub fn translation_generators(&self) -> Vec<Perm> {
        self.weights
            .iter()
            .map(|&w| self.translation(w as u32))
            .collect()
    }

    /// Generators of the subgroup of translations by multiples of `m`.
    pub fn subgroup_generated_by(&self, m: u32) -> Vec<Perm> {
        vec![self.translation(m)]
    }

    /// Cyclic components and vector coordinates of a point.
    pub fn digits(&self, x: u32) -> &[u32] {
        &self.digits[x as usize]
    }

    pub fn n_cyclic(&self) -> usize {
        self.n_cyclic
    }

    fn element_parts(&self, e: usize) -> (usize, u32) {
        (e / self.size_of_m(), (e % self.size_of_m()) as u32)
    }

    fn element_index(&self, j: usize, m: u32) -> usize {
        j * self.size_of_m() + m as usize
    }
}

#[derive(Clone, Debug)]
enum Repr {
    Affine(AffineGroup),
    Perms {
        elements: Vec<Perm>,
        index: HashMap<Perm, usize>,
        generators: Vec<Perm>,
    },
}

/// A finite group with its action on `0..v`.
#[derive(Clone, Debug)]
pub struct GroupAction {
    v: usize,
    order: usize,
    spec: GroupSpec,
    repr: Repr,
    transitive: bool,
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Multiplicative order of `t` modulo `n` (assumes `t` is a unit).
pub fn multiplicative_order(t: u64, n: u64) -> u64 {
    if n == 1 {
        return 1;
    }
    let mut x = t % n;
    let mut k = 1;
    while x != 1 {
        x = x * t % n;
        k += 1;
    }
    k
}

type Matrix = Vec<Vec<u64>>;

fn mat_mul(a: &Matrix, b: &Matrix, p: u64) -> Matrix {
    let n = a.len();
    let mut c = vec![vec![0; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..n {
                c[i][j] = (c[i][j] + a[i][k] * b[k][j]) % p;
            }
        }
    }
    c
}

fn mat_identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
        .collect()
}

/// Rank of a matrix over GF(p), `p` prime.
fn mat_rank(m: &Matrix, p: u64) -> usize {
    let mut a = m.clone();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| !a[r][col].is_multiple_of(p)) else {
            continue;
        };
        a.swap(rank, piv);
        let inv = pow_mod(a[rank][col], p - 2, p);
        for j in 0..cols {
            a[rank][j] = a[rank][j] * inv % p;
        }
        for r in 0..rows {
            if r != rank && a[r][col] != 0 {
                let f = a[r][col];
                for j in 0..cols {
                    a[r][j] = (a[r][j] + p * p - f * a[rank][j] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn mat_order(m: &Matrix, p: u64, limit: u64) -> Option<u64> {
    let id = mat_identity(m.len());
    let mut x = m.clone();
    for k in 1..=limit {
        if x == id {
            return Some(k);
        }
        x = mat_mul(&x, m, p);
    }
    None
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Smallest `t` in `2..n` of multiplicative order exactly `s` modulo `n`
/// such that `t - 1` is a unit, i.e. `x ↦ t·x` fixes only `0`.
pub fn smallest_fixed_point_free_multiplier(n: u64, s: u64) -> Option<u64> {
    (2..n).find(|&t| {
        crate::arith::gcd(t, n) == 1
            && crate::arith::gcd(t - 1, n) == 1
            && multiplicative_order(t, n) == s
    })
}

/// One generator per distinct subgroup `⟨t⟩` of order `s` acting
/// fixed-point-freely on `Z_n \ {0}`, each the least generator of its
/// subgroup, in increasing order. Distinct subgroups give non-isomorphic
/// groups `Z_n:Z_s` when `gcd(n, s) = 1`.
pub fn fixed_point_free_multiplier_subgroups(n: u64, s: u64) -> Vec<u64> {
    let mut seen = vec![false; n as usize];
    let mut reps = Vec::new();
    for t in 2..n {
        if seen[t as usize]
            || crate::arith::gcd(t, n) != 1
            || crate::arith::gcd(t - 1, n) != 1
            || multiplicative_order(t, n) != s
        {
            continue;
        }
        reps.push(t);
        for j in 1..s {
            if crate::arith::gcd(j, s) == 1 {
                seen[pow_mod(t, j, n) as usize] = true;
            }
        }
    }
    reps
}

/// First matrix over GF(p) of order exactly `s` with `A - I` invertible,
/// scanning entries as a row-major base-`p` number from zero.
pub fn smallest_fixed_point_free_matrix(p: u64, e: usize, s: u64) -> Option<Vec<Vec<u64>>> {
    let total = p.checked_pow((e * e) as u32)?;
    for code in 0..total {
        let mut a = vec![vec![0; e]; e];
        let mut c = code;
        for idx in (0..e * e).rev() {
            a[idx / e][idx % e] = c % p;
            c /= p;
        }
        if mat_rank(&a, p) != e {
            continue;
        }
        if mat_order(&a, p, s) != Some(s) {
            continue;
        }
        let mut a_minus_i = a.clone();
        for (i, row) in a_minus_i.iter_mut().enumerate() {
            row[i] = (row[i] + p - 1) % p;
        }
        if mat_rank(&a_minus_i, p) == e {
            return Some(a);
        }
    }
    None
}

/// Validates and realizes a group spec as a permutation action.
pub fn build_group(spec: &GroupSpec) -> Result<GroupAction> {
    match spec {
        GroupSpec::AffineSemidirect { cyclic_moduli, vector, top_order, multipliers, matrix } => {
            build_affine(spec, cyclic_moduli, vector, *top_order, multipliers, matrix.as_ref())
        }
        GroupSpec::Explicit { degree, generators } => build_explicit(spec, *degree, generators),
    }
}

fn build_affine(
    spec: &GroupSpec,
    moduli: &[u64],
    vector: &Option<VectorComponent>,
    s: u64,
    multipliers: &[u64],
    matrix: Option<&Matrix>,
) -> Result<GroupAction> {
    let bad = |m: String| Err(Error::InvalidGroup(m));
    if s == 0 {
        return bad("top order must be positive".into());
    }
    if moduli.is_empty() && vector.is_none() {
        return bad("base group M has no components".into());
    }
    if moduli.iter().any(|&n| n < 2) {
        return bad("cyclic moduli must be >= 2".into());
    }
    let multipliers: Vec<u64> = if multipliers.is_empty() {
        vec![1; moduli.len()]
    } else {
        multipliers.to_vec()
    };
    if multipliers.len() != moduli.len() {
        return bad(format!(
            "{} multipliers for {} cyclic components",
            multipliers.len(),
            moduli.len()
        ));
    }
    // order of φ on M, as the lcm over components
    let mut phi_order = 1u64;
    for (&t, &n) in multipliers.iter().zip(moduli) {
        if crate::arith::gcd(t, n) != 1 {
            return bad(format!("multiplier {t} is not a unit mod {n}"));
        }
        if pow_mod(t, s, n) != 1 {
            return bad(format!("multiplier {t}^{s} != 1 mod {n}"));
        }
        let o = multiplicative_order(t, n);
        phi_order = phi_order / crate::arith::gcd(phi_order, o) * o;
    }
    let mut radices: Vec<u64> = moduli.to_vec();
    let mat = match (vector, matrix) {
        (Some(vc), m) => {
            if !is_prime(vc.p) || vc.e == 0 {
                return bad(format!("vector component needs prime p and e >= 1, got {vc:?}"));
            }
            let m = m.cloned().unwrap_or_else(|| mat_identity(vc.e));
            if m.len() != vc.e || m.iter().any(|r| r.len() != vc.e) {
                return bad(format!("matrix must be {0}x{0}", vc.e));
            }
            let m: Matrix = m.iter().map(|r| r.iter().map(|x| x % vc.p).collect()).collect();
            if mat_rank(&m, vc.p) != vc.e {
                return bad("matrix is singular".into());
            }
            let mut pw = mat_identity(vc.e);
            for _ in 0..s {
                pw = mat_mul(&pw, &m, vc.p);
            }
            if pw != mat_identity(vc.e) {
                return bad(format!("matrix^{s} != identity"));
            }
            let o = mat_order(&m, vc.p, s).expect("A^s = I");
            phi_order = phi_order / crate::arith::gcd(phi_order, o) * o;
            radices.extend(std::iter::repeat_n(vc.p, vc.e));
            Some((vc.p, m))
        }
        (None, Some(_)) => return bad("matrix given without a vector component".into()),
        (None, None) => None,
    };
    if phi_order != s {
        return bad(format!("top generator has order {phi_order}, declared top order {s}"));
    }

    let n_cyclic = moduli.len();
    let mut weights = vec![1usize; radices.len()];
    for i in (0..radices.len().saturating_sub(1)).rev() {
        weights[i] = weights[i + 1] * radices[i + 1] as usize;
    }
    let size: usize = radices.iter().map(|&r| r as usize).product();
    if size > u32::MAX as usize / 2 {
        return Err(Error::TooLarge(format!("|M| = {size}")));
    }
    let digits: Vec<Vec<u32>> = (0..size)
        .map(|x| {
            radices
                .iter()
                .zip(&weights)
                .map(|(&r, &w)| ((x / w) as u64 % r) as u32)
                .collect()
        })
        .collect();
    let encode = |d: &[u64]| -> u32 {
        d.iter().zip(&weights).map(|(&x, &w)| x as usize * w).sum::<usize>() as u32
    };
    let phi = |x: usize| -> u32 {
        let dx = &digits[x];
        let mut out: Vec<u64> = Vec::with_capacity(radices.len());
        for i in 0..n_cyclic {
            out.push(dx[i] as u64 * multipliers[i] % moduli[i]);
        }
        if let Some((p, m)) = &mat {
            let vecpart = &dx[n_cyclic..];
            for row in m {
                let s: u64 = row.iter().zip(vecpart).map(|(&a, &b)| a * b as u64).sum();
                out.push(s % p);
            }
        }
        encode(&out)
    };
    let phi1: Vec<u32> = (0..size).map(phi).collect();
    let mut phi_pow = vec![perm::identity(size)];
    for j in 1..s as usize {
        let next = perm::compose(&phi_pow[j - 1], &phi1);
        phi_pow.push(next);
    }
    let affine = AffineGroup {
        radices,
        n_cyclic,
        digits,
        weights,
        top_order: s as usize,
        phi_pow,
    };
    Ok(GroupAction {
        v: size,
        order: size * s as usize,
        spec: spec.clone(),
        repr: Repr::Affine(affine),
        // translations alone are transitive
        transitive: true,
    })
}

fn build_explicit(spec: &GroupSpec, degree: usize, generators: &[Vec<u32>]) -> Result<GroupAction> {
    if degree == 0 {
        return Err(Error::InvalidGroup("degree must be positive".into()));
    }
    for g in generators {
        if !perm::is_permutation(g, degree) {
            return Err(Error::InvalidGroup(format!(
                "generator {g:?} is not a permutation of 0..{degree}"
            )));
        }
    }
    let gens: Vec<Perm> = generators.iter().filter(|g| !perm::is_identity(g)).cloned().collect();
    let elements = closure(degree, &gens, MAX_EXPLICIT_ORDER).ok_or_else(|| {
        Error::TooLarge(format!("group order exceeds {MAX_EXPLICIT_ORDER}"))
    })?;
    let index: HashMap<Perm, usize> =
        elements.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    let transitive = point_orbits(degree, &gens).len() == 1;
    Ok(GroupAction {
        v: degree,
        order: elements.len(),
        spec: spec.clone(),
        repr: Repr::Perms { elements, index, generators: gens },
        transitive,
    })
}

/// All elements of `⟨gens⟩`, identity first; `None` if more than `limit`.
pub fn closure(n: usize, gens: &[Perm], limit: usize) -> Option<Vec<Perm>> {
    let id = perm::identity(n);
    let mut seen: HashMap<Perm, ()> = HashMap::new();
    seen.insert(id.clone(), ());
    let mut elements = vec![id];
    let mut i = 0;
    while i < elements.len() {
        for g in gens {
            let p = perm::compose(&elements[i], g);
            if !seen.contains_key(&p) {
                if elements.len() >= limit {
                    return None;
                }
                seen.insert(p.clone(), ());
                elements.push(p);
            }
        }
        i += 1;
    }
    Some(elements)
}

/// Orbits of `⟨gens⟩` on `0..n`, each sorted, ordered by least element.
pub fn point_orbits(n: usize, gens: &[Perm]) -> Vec<Vec<u32>> {
    let mut seen = vec![false; n];
    let mut orbits = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut orbit = vec![start as u32];
        let mut i = 0;
        while i < orbit.len() {
            let x = orbit[i] as usize;
            for g in gens {
                let y = g[x] as usize;
                if !seen[y] {
                    seen[y] = true;
                    orbit.push(y as u32);
                }
            }
            i += 1;
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }
    orbits
}

impl GroupAction {
    pub fn degree(&self) -> usize {
        self.v
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn stabilizer_order(&self) -> usize {
        self.order / self.v
    }

    pub fn is_transitive(&self) -> bool {
        self.transitive
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn as_affine(&self) -> Option<&AffineGroup> {
        match &self.repr {
            Repr::Affine(a) => Some(a),
            Repr::Perms { .. } => None,
        }
    }

    pub fn identity(&self) -> usize {
        0
    }

    /// Image of `x` under element `e`.
    #[inline]
    pub fn apply(&self, e: usize, x: u32) -> u32 {
        match &self.repr {
            Repr::Affine(a) => {
                let (j, m) = a.element_parts(e);
                a.add(a.phi_pow[j][x as usize], m)
            }
            Repr::Perms { elements, .. } => elements[e][x as usize],
        }
    }

    /// Index of `g·h` (first `g`, then `h`).
    pub fn multiply(&self, g: usize, h: usize) -> usize {
        match &self.repr {
            Repr::Affine(a) => {
                let (j1, m1) = a.element_parts(g);
                let (j2, m2) = a.element_parts(h);
                let j = (j1 + j2) % a.top_order;
                let m = a.add(a.phi_pow[j2][m1 as usize], m2);
                a.element_index(j, m)
            }
            Repr::Perms { elements, index, .. } => {
                index[&perm::compose(&elements[g], &elements[h])]
            }
        }
    }

    pub fn inverse(&self, g: usize) -> usize {
        match &self.repr {
            Repr::Affine(a) => {
                let (j, m) = a.element_parts(g);
                let ji = (a.top_order - j) % a.top_order;
                // x = φ^j(y) + m  ⇒  y = φ^{-j}(x) - φ^{-j}(m)
                let mi = a.neg(a.phi_pow[ji][m as usize]);
                a.element_index(ji, mi)
            }
            Repr::Perms { elements, index, .. } => index[&perm::inverse(&elements[g])],
        }
    }

    pub fn element_perm(&self, e: usize) -> Perm {
        match &self.repr {
            Repr::Affine(_) => (0..self.v as u32).map(|x| self.apply(e, x)).collect(),
            Repr::Perms { elements, .. } => elements[e].clone(),
        }
    }

    /// Index of the element acting as `p`, if it belongs to the group.
    pub fn element_of(&self, p: &[u32]) -> Option<usize> {
        match &self.repr {
            Repr::Affine(a) => {
                // (j, m): m = image of 0, then φ^j(x) = p(x) - m
                let m = p[0];
                let negm = a.neg(m);
                (0..a.top_order).map(|j| a.element_index(j, m)).find(|&e| {
                    let (j, _) = a.element_parts(e);
                    (0..self.v as u32).all(|x| a.add(p[x as usize], negm) == a.phi_pow[j][x as usize])
                })
            }
            Repr::Perms { index, .. } => index.get(p).copied(),
        }
    }

    /// A generating set, as permutations.
    pub fn generators(&self) -> Vec<Perm> {
        match &self.repr {
            Repr::Affine(a) => {
                let mut gens = a.translation_generators();
                if a.top_order > 1 {
                    gens.push(a.phi_pow[1].clone());
                }
                gens
            }
            Repr::Perms { generators, .. } => generators.clone(),
        }
    }

    fn require_transitive(&self, what: &str) -> Result<()> {
        if self.transitive {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("{what} needs a transitive group")))
        }
    }
}

/// Orbit labels of the group on unordered pairs of distinct points.
#[derive(Clone, Debug)]
pub struct PairOrbitTable {
    v: usize,
    labels: Vec<u32>,
    orbit_sizes: Vec<usize>,
    regular: bool,
}

impl PairOrbitTable {
    pub fn num_orbits(&self) -> usize {
        self.orbit_sizes.len()
    }

    pub fn orbit_sizes(&self) -> &[usize] {
        &self.orbit_sizes
    }

    /// Every orbit has size equal to the group order.
    pub fn is_regular(&self) -> bool {
        self.regular
    }

    #[inline]
    pub fn label(&self, a: u32, b: u32) -> u32 {
        self.labels[a as usize * self.v + b as usize]
    }

    pub fn degree(&self) -> usize {
        self.v
    }

    /// A representative pair `(a, b)`, `a < b`, for each orbit (the
    /// lexicographically least pair).
    pub fn representatives(&self) -> Vec<(u32, u32)> {
        let mut reps = vec![None; self.num_orbits()];
        for a in 0..self.v as u32 {
            for b in a + 1..self.v as u32 {
                let l = self.label(a, b) as usize;
                if reps[l].is_none() {
                    reps[l] = Some((a, b));
                }
            }
        }
        reps.into_iter().map(|r| r.expect("every orbit is nonempty")).collect()
    }
}

/// Labels all `C(v,2)` pairs by their orbit under `g`. Orbit ids are
/// assigned in order of the least pair of each orbit.
pub fn pair_orbit_table(g: &GroupAction) -> Result<PairOrbitTable> {
    let v = g.degree();
    if v < 2 {
        return Err(Error::InvalidArgument("pair orbits need at least 2 points".into()));
    }
    if v.checked_mul(v).is_none_or(|n| n > 64_000_000) {
        return Err(Error::TooLarge(format!("pair table for {v} points")));
    }
    let gens = g.generators();
    let unset = u32::MAX;
    let mut labels = vec![unset; v * v];
    let mut sizes = Vec::new();
    let mut queue = Vec::new();
    for a in 0..v {
        for b in a + 1..v {
            if labels[a * v + b] != unset {
                continue;
            }
            let id = sizes.len() as u32;
            labels[a * v + b] = id;
            labels[b * v + a] = id;
            queue.clear();
            queue.push((a as u32, b as u32));
            let mut size = 0;
            while let Some((x, y)) = queue.pop() {
                size += 1;
                for p in &gens {
                    let (x2, y2) = (p[x as usize] as usize, p[y as usize] as usize);
                    if labels[x2 * v + y2] == unset {
                        labels[x2 * v + y2] = id;
                        labels[y2 * v + x2] = id;
                        queue.push((x2 as u32, y2 as u32));
                    }
                }
            }
            sizes.push(size);
        }
    }
    let regular = sizes.iter().all(|&s| s == g.order());
    Ok(PairOrbitTable { v, labels, orbit_sizes: sizes, regular })
}

/// Common fixed points of the stabilizer of `p`.
pub fn point_stabilizer_fixed_points(g: &GroupAction, p: u32) -> Vec<u32> {
    let v = g.degree();
    let mut fixed = vec![true; v];
    for e in 0..g.order() {
        if g.apply(e, p) != p {
            continue;
        }
        for x in 0..v {
            if fixed[x] && g.apply(e, x as u32) != x as u32 {
                fixed[x] = false;
            }
        }
    }
    (0..v as u32).filter(|&x| fixed[x as usize]).collect()
}

/// A partition of `0..v` into `d ≥ 2` classes of common size `c ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    classes: Vec<Vec<u32>>,
}

impl Partition {
    /// Validates and normalizes: classes sorted internally and by least element.
    pub fn new(v: usize, classes: Vec<Vec<u32>>) -> Result<Self> {
        let mut classes: Vec<Vec<u32>> = classes
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        classes.sort();
        let mut seen = vec![false; v];
        for class in &classes {
            for &x in class {
                let x = x as usize;
                if x >= v || seen[x] {
                    return Err(Error::InvalidArgument(format!(
                        "partition classes overlap or leave 0..{v} at point {x}"
                    )));
                }
                seen[x] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidArgument(format!("partition does not cover 0..{v}")));
        }
        let c = classes.first().map_or(0, Vec::len);
        if classes.iter().any(|cl| cl.len() != c) {
            return Err(Error::InvalidArgument("partition classes differ in size".into()));
        }
        if c < 2 || classes.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "partition must be nontrivial (c = {c}, d = {})",
                classes.len()
            )));
        }
        Ok(Self { classes })
    }

    pub fn classes(&self) -> &[Vec<u32>] {
        &self.classes
    }

    pub fn class_size(&self) -> usize {
        self.classes[0].len()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn degree(&self) -> usize {
        self.classes.len() * self.class_size()
    }

    /// `class_of[x]` = index of the class containing `x`.
    pub fn class_index(&self) -> Vec<u32> {
        let mut idx = vec![0; self.degree()];
        for (i, class) in self.classes.iter().enumerate() {
            for &x in class {
                idx[x as usize] = i as u32;
            }
        }
        idx
    }
}

fn uf_find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

/// Finest block system in which `a` and `b` share a block.
fn join_closure(v: usize, gens: &[Perm], a: u32, b: u32) -> Vec<u32> {
    let mut parent: Vec<u32> = (0..v as u32).collect();
    let mut queue = VecDeque::new();
    let (ra, rb) = (uf_find(&mut parent, a), uf_find(&mut parent, b));
    if ra != rb {
        parent[rb as usize] = ra;
        queue.push_back((a, b));
    }
    while let Some((x, y)) = queue.pop_front() {
        for g in gens {
            let (gx, gy) = (g[x as usize], g[y as usize]);
            let (rx, ry) = (uf_find(&mut parent, gx), uf_find(&mut parent, gy));
            if rx != ry {
                parent[ry as usize] = rx;
                queue.push_back((gx, gy));
            }
        }
    }
    (0..v as u32).map(|x| uf_find(&mut parent, x)).collect()
}

/// All minimal nontrivial block systems of a transitive group, ordered by
/// class size then by class list. Empty iff the action is primitive.
pub fn minimal_block_systems(g: &GroupAction) -> Result<Vec<Partition>> {
    g.require_transitive("block systems")?;
    let v = g.degree();
    let gens = g.generators();
    // block containing 0 -> partition
    let mut systems: Vec<(Vec<u32>, Partition)> = Vec::new();
    for beta in 1..v as u32 {
        let roots = join_closure(v, &gens, 0, beta);
        let r0 = roots[0];
        let block0: Vec<u32> = (0..v as u32).filter(|&x| roots[x as usize] == r0).collect();
        if block0.len() == v {
            continue;
        }
        if systems.iter().any(|(b, _)| *b == block0) {
            continue;
        }
        let mut classes: HashMap<u32, Vec<u32>> = HashMap::new();
        for x in 0..v as u32 {
            classes.entry(roots[x as usize]).or_default().push(x);
        }
        let part = Partition::new(v, classes.into_values().collect())?;
        systems.push((block0, part));
    }
    let mut minimal: Vec<Partition> = systems
        .iter()
        .filter(|(b, _)| {
            !systems
                .iter()
                .any(|(other, _)| other.len() < b.len() && other.iter().all(|x| b.binary_search(x).is_ok()))
        })
        .map(|(_, p)| p.clone())
        .collect();
    minimal.sort_by(|a, b| (a.class_size(), a.classes()).cmp(&(b.class_size(), b.classes())));
    Ok(minimal)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum FilterOutcome {
    Pass,
    Fail { witness: Perm },
}

impl FilterOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, FilterOutcome::Pass)
    }
}

/// Fails iff some involution of `g` moves every point.
pub fn involution_fixed_point_filter(g: &GroupAction) -> FilterOutcome {
    if g.order() % 2 == 1 {
        return FilterOutcome::Pass;
    }
    for e in 1..g.order() {
        let p = g.element_perm(e);
        let involution = p.iter().enumerate().all(|(x, &y)| p[y as usize] == x as u32);
        if involution && p.iter().enumerate().all(|(x, &y)| x as u32 != y) {
            return FilterOutcome::Fail { witness: p };
        }
    }
    FilterOutcome::Pass
}

/// Fails iff some element of `g` conjugates every element of the normal,
/// point-regular subgroup `⟨m⟩` to its inverse.
pub fn inversion_filter(g: &GroupAction, m: &[Perm]) -> Result<FilterOutcome> {
    let v = g.degree();
    for x in m {
        if !perm::is_permutation(x, v) {
            return Err(Error::InvalidArgument("subgroup generator is not a permutation".into()));
        }
    }
    let m_elems = closure(v, m, v.max(1))
        .ok_or_else(|| Error::InvalidArgument("subgroup is larger than the degree".into()))?;
    if m_elems.len() != v || point_orbits(v, m).len() != 1 {
        return Err(Error::InvalidArgument("subgroup is not regular on points".into()));
    }
    let m_set: HashMap<&[u32], ()> = m_elems.iter().map(|p| (p.as_slice(), ())).collect();
    for h in g.generators() {
        for x in m {
            if !m_set.contains_key(perm::conjugate(x, &h).as_slice()) {
                return Err(Error::InvalidArgument("subgroup is not normal".into()));
            }
        }
    }
    let inverses: Vec<Perm> = m.iter().map(|x| perm::inverse(x)).collect();
    for e in 0..g.order() {
        let h = g.element_perm(e);
        let on_gens = m.iter().zip(&inverses).all(|(x, xi)| perm::conjugate(x, &h) == *xi);
        if on_gens && m_elems.iter().all(|x| perm::conjugate(x, &h) == perm::inverse(x)) {
            return Ok(FilterOutcome::Fail { witness: h });
        }
    }
    Ok(FilterOutcome::Pass)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Faithfulness {
    Faithful,
    NotFaithful { kernel_witness: Perm },
}

/// Whether `⟨n⟩` acts faithfully on one of its orbits.
pub fn faithful_on_orbit(g: &GroupAction, n: &[Perm], orbit: &[u32]) -> Result<Faithfulness> {
    let v = g.degree();
    for x in n {
        if !perm::is_permutation(x, v) {
            return Err(Error::InvalidArgument("subgroup generator is not a permutation".into()));
        }
        if g.element_of(x).is_none() {
            return Err(Error::InvalidArgument("subgroup generator is not in the group".into()));
        }
    }
    let mut in_orbit = vec![false; v];
    for &p in orbit {
        if p as usize >= v {
            return Err(Error::InvalidArgument(format!("point {p} out of range")));
        }
        in_orbit[p as usize] = true;
    }
    for x in n {
        if orbit.iter().any(|&p| !in_orbit[x[p as usize] as usize]) {
            return Err(Error::InvalidArgument("orbit is not invariant under the subgroup".into()));
        }
    }
    let elems = closure(v, n, MAX_EXPLICIT_ORDER)
        .ok_or_else(|| Error::TooLarge("normal subgroup too large".into()))?;
    for e in elems.iter().skip(1) {
        if orbit.iter().all(|&p| e[p as usize] == p) {
            return Ok(Faithfulness::NotFaithful { kernel_witness: e.clone() });
        }
    }
    Ok(Faithfulness::Faithful)
}
