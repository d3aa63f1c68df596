//! Per-orientation lookup tables for the interval combinatorics. Hom
//! witnesses and Ext dimensions between indecomposables are queried in
//! every inner loop, so they are computed once per orientation and shared
//! behind a process-wide cache.

use crate::quiver::{all_intervals, ext_dim, hom, Interval, Orientation};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub struct Tables {
    pub q: Orientation,
    pub intervals: Vec<Interval>,
    index: HashMap<Interval, usize>,
    hom: Vec<Vec<Option<Interval>>>,
    ext: Vec<Vec<u8>>,
    /// Positions in a topological order of the Hom relation: if
    /// `Hom(X_K, X_L)` is nonzero and K != L then `pos[K] < pos[L]`.
    topo_pos: Vec<usize>,
}

impl Tables {
    fn build(q: &Orientation) -> Tables {
        let intervals: Vec<Interval> = all_intervals(q.n()).iter().copied().collect();
        let m = intervals.len();
        let index: HashMap<Interval, usize> =
            intervals.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let mut hom_t = vec![vec![None; m]; m];
        let mut ext_t = vec![vec![0u8; m]; m];
        for (i, k) in intervals.iter().enumerate() {
            for (j, l) in intervals.iter().enumerate() {
                hom_t[i][j] = hom(k, l, q);
                ext_t[i][j] = ext_dim(k, l, q).expect("ext dimension bound") as u8;
            }
        }
        // Kahn with canonical tie-break; the Hom relation on distinct
        // indecomposables of a representation-directed algebra is acyclic.
        let mut indeg = vec![0usize; m];
        for i in 0..m {
            for j in 0..m {
                if i != j && hom_t[i][j].is_some() {
                    indeg[j] += 1;
                }
            }
        }
        let mut order = Vec::with_capacity(m);
        let mut remaining: Vec<bool> = vec![true; m];
        while order.len() < m {
            let next = (0..m)
                .find(|&i| remaining[i] && indeg[i] == 0)
                .expect("Hom relation between indecomposables must be acyclic");
            remaining[next] = false;
            order.push(next);
            for j in 0..m {
                if j != next && remaining[j] && hom_t[next][j].is_some() {
                    indeg[j] -= 1;
                }
            }
        }
        let mut topo_pos = vec![0usize; m];
        for (pos, &i) in order.iter().enumerate() {
            topo_pos[i] = pos;
        }
        Tables { q: q.clone(), intervals, index, hom: hom_t, ext: ext_t, topo_pos }
    }

    pub fn idx(&self, k: &Interval) -> usize {
        self.index[k]
    }

    pub fn hom(&self, k: &Interval, l: &Interval) -> Option<Interval> {
        self.hom[self.idx(k)][self.idx(l)]
    }

    pub fn ext(&self, quot: &Interval, sub: &Interval) -> usize {
        self.ext[self.idx(quot)][self.idx(sub)] as usize
    }

    pub fn topo_pos(&self, k: &Interval) -> usize {
        self.topo_pos[self.idx(k)]
    }

    /// Intervals sorted so that nonzero Hom only points forward.
    pub fn topo_sorted(&self) -> Vec<Interval> {
        let mut v = self.intervals.clone();
        v.sort_by_key(|k| self.topo_pos(k));
        v
    }
}

pub fn tables(q: &Orientation) -> Arc<Tables> {
    static CACHE: OnceLock<Mutex<HashMap<Orientation, Arc<Tables>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("tables cache poisoned");
    guard.entry(q.clone()).or_insert_with(|| Arc::new(Tables::build(q))).clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::iv;

    #[test]
    fn topo_order_respects_hom() {
        let t = tables(&Orientation::parse("RLR").unwrap());
        for k in &t.intervals {
            for l in &t.intervals {
                if k != l && t.hom(k, l).is_some() {
                    assert!(t.topo_pos(k) < t.topo_pos(l), "{k} vs {l}");
                }
            }
        }
    }

    #[test]
    fn cached_matches_direct() {
        let q = Orientation::parse("RR").unwrap();
        let t = tables(&q);
        assert_eq!(t.hom(&iv(2, 3), &iv(1, 2)), Some(iv(2, 2)));
        assert_eq!(t.ext(&iv(1, 2), &iv(2, 3)), 1);
    }
}
