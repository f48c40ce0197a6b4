//! Multi-index bookkeeping for dense truncated Taylor coefficients.
//!
//! Coefficients are stored in *graded lexicographic* order: multi-indices are
//! sorted by total degree first, then lexicographically (ascending, leftmost
//! variable most significant) within each degree. For two variables at order 2
//! the layout is `(0,0), (0,1), (1,0), (0,2), (1,1), (2,0)`. Golden tests rely
//! on this ordering, so it must not change.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Hard cap on truncation order. The deepest consumer is the curvature
/// tensor, which reads second direction-derivatives of the spray curvature —
/// six derivatives below the metric generator.
pub const MAX_ORDER: usize = 6;

/// Shared coefficient layout for all jets with the same `(num_vars, order)`.
///
/// Construction enumerates every multi-index once and precomputes the pair
/// table used by truncated multiplication, so arithmetic on jets is a flat
/// scan with no index arithmetic in the inner loop.
pub(crate) struct JetShape {
    pub num_vars: usize,
    pub order: usize,
    /// Multi-indices in graded-lex order; position in this list is the
    /// coefficient's position in `Jet::coeffs`.
    pub indices: Vec<Box<[u8]>>,
    /// Packed multi-index -> coefficient position, `u32::MAX` when absent.
    pos: Vec<u32>,
    /// `(a, b, c)` triples with `indices[a] + indices[b] = indices[c]`,
    /// covering every product that survives truncation.
    pub mul_pairs: Vec<(u32, u32, u32)>,
    /// Number of coefficients of total degree `<= d`, for `d in 0..=order`.
    pub len_through_degree: Vec<usize>,
}

impl JetShape {
    /// Fetch (or build and cache) the shape for `(num_vars, order)`.
    pub fn get(num_vars: usize, order: usize) -> Arc<JetShape> {
        assert!(num_vars > 0, "jet needs at least one variable");
        assert!(order <= MAX_ORDER, "jet order {order} exceeds cap {MAX_ORDER}");
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetShape>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet shape cache poisoned");
        guard
            .entry((num_vars, order))
            .or_insert_with(|| Arc::new(JetShape::build(num_vars, order)))
            .clone()
    }

    fn build(num_vars: usize, order: usize) -> JetShape {
        let mut indices: Vec<Box<[u8]>> = Vec::new();
        let mut len_through_degree = Vec::with_capacity(order + 1);
        for degree in 0..=order {
            enumerate_degree(num_vars, degree, &mut indices);
            len_through_degree.push(indices.len());
        }

        let base = order + 2; // packing radix; components never exceed order
        let mut pos = vec![u32::MAX; base.pow(num_vars as u32)];
        for (i, m) in indices.iter().enumerate() {
            pos[pack(m, base)] = i as u32;
        }

        let mut mul_pairs = Vec::new();
        for (a, ma) in indices.iter().enumerate() {
            let da: usize = ma.iter().map(|&e| e as usize).sum();
            for (b, mb) in indices.iter().enumerate() {
                let db: usize = mb.iter().map(|&e| e as usize).sum();
                if da + db > order {
                    continue;
                }
                let sum: Box<[u8]> = ma.iter().zip(mb.iter()).map(|(x, y)| x + y).collect();
                let c = pos[pack(&sum, base)];
                mul_pairs.push((a as u32, b as u32, c));
            }
        }
        // Group by output coefficient so multiplication writes sequentially.
        mul_pairs.sort_unstable_by_key(|&(_, _, c)| c);

        JetShape { num_vars, order, indices, pos, mul_pairs, len_through_degree }
    }

    /// Coefficient position of `m`, if `|m| <= order`.
    pub fn position(&self, m: &[u8]) -> Option<usize> {
        let degree: usize = m.iter().map(|&e| e as usize).sum();
        if degree > self.order {
            return None;
        }
        let p = self.pos[pack(m, self.order + 2)];
        debug_assert_ne!(p, u32::MAX);
        Some(p as usize)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }
}

fn pack(m: &[u8], base: usize) -> usize {
    m.iter().fold(0usize, |acc, &e| acc * base + e as usize)
}

/// Append all multi-indices of exact total degree `degree` in ascending
/// lexicographic order.
fn enumerate_degree(num_vars: usize, degree: usize, out: &mut Vec<Box<[u8]>>) {
    let mut current = vec![0u8; num_vars];
    fill(&mut current, 0, degree, out);
}

fn fill(current: &mut [u8], var: usize, remaining: usize, out: &mut Vec<Box<[u8]>>) {
    if var + 1 == current.len() {
        current[var] = remaining as u8;
        out.push(current.to_vec().into_boxed_slice());
        return;
    }
    for e in 0..=remaining {
        current[var] = e as u8;
        fill(current, var + 1, remaining - e, out);
        current[var] = 0;
    }
}
