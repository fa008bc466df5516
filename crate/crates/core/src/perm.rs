//! Permutations of `0..n` stored as image vectors.
//!
//! Composition follows the right-action convention used throughout the
//! crate: `x^(gh) = (x^g)^h`, so `compose(g, h)[x] = h[g[x]]`.

pub type Perm = Vec<u32>;

pub fn identity(n: usize) -> Perm {
    (0..n as u32).collect()
}

pub fn is_identity(p: &[u32]) -> bool {
    p.iter().enumerate().all(|(i, &x)| i as u32 == x)
}

/// First `g`, then `h`.
pub fn compose(g: &[u32], h: &[u32]) -> Perm {
    g.iter().map(|&x| h[x as usize]).collect()
}

pub fn inverse(g: &[u32]) -> Perm {
    let mut inv = vec![0; g.len()];
    for (i, &x) in g.iter().enumerate() {
        inv[x as usize] = i as u32;
    }
    inv
}

/// `h^-1 x h`: the image of `x` under conjugation by `h`.
pub fn conjugate(x: &[u32], h: &[u32]) -> Perm {
    let mut out = vec![0; x.len()];
    for p in 0..x.len() {
        out[h[p] as usize] = h[x[p] as usize];
    }
    out
}

/// Checks that `p` is a bijection of `0..n`.
pub fn is_permutation(p: &[u32], n: usize) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &x in p {
        let x = x as usize;
        if x >= n || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_action_composition() {
        let g = vec![1, 2, 0];
        let h = vec![1, 0, 2];
        // 0 -g-> 1 -h-> 0
        assert_eq!(compose(&g, &h), vec![0, 2, 1]);
        assert!(is_identity(&compose(&g, &inverse(&g))));
    }

    #[test]
    fn conjugation_matches_definition() {
        let x = vec![1, 2, 0, 3];
        let h = vec![3, 1, 2, 0];
        let direct = compose(&compose(&inverse(&h), &x), &h);
        assert_eq!(conjugate(&x, &h), direct);
    }
}
