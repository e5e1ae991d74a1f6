//! Range-minimum structures used by the sweeps.
//!
//! [`StaticRmq`] and [`AppendableRmq`] share a blocked layout: the array is
//! cut into blocks of `b` elements, each block is identified by the shape of
//! its Cartesian tree, in-block queries are answered from a table shared by
//! all blocks of the same shape, and a sparse table over block minima covers
//! whole blocks. Minima are reported as `(value, index)` with the leftmost
//! index winning ties.

use std::collections::VecDeque;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest block size the shape catalog supports.
const MAX_BLOCK: usize = 8;
/// Block size of [`AppendableRmq`], whose final length is unknown.
pub const APPENDABLE_BLOCK: usize = 8;

/// Every Cartesian-tree shape on at most `MAX_BLOCK` elements, organised as a
/// trie over stack pop counts: pushing a value that pops `k` entries off the
/// right spine moves from state `s` to `next[s][k]`.
struct ShapeCatalog {
    len: Vec<u8>,
    next: Vec<Vec<u32>>,
    /// `argmin[s][l * MAX_BLOCK + r]` for `l <= r < len[s]`.
    argmin: Vec<[u8; MAX_BLOCK * MAX_BLOCK]>,
}

impl ShapeCatalog {
    fn build() -> Self {
        struct Node {
            depth: Vec<u8>,
            spine: Vec<u8>,
        }
        let mut nodes = vec![Node {
            depth: Vec::new(),
            spine: Vec::new(),
        }];
        let mut next: Vec<Vec<u32>> = vec![Vec::new()];
        let mut s = 0;
        while s < nodes.len() {
            let t = nodes[s].depth.len();
            if t < MAX_BLOCK {
                let spine_len = nodes[s].spine.len();
                for k in 0..=spine_len {
                    let mut spine = nodes[s].spine[..spine_len - k].to_vec();
                    let mut depth = nodes[s].depth.clone();
                    // The popped chain becomes the left subtree of the new node.
                    let (start, d) = match spine.last() {
                        Some(&top) => (top as usize + 1, nodes[s].depth[top as usize] + 1),
                        None => (0, 0),
                    };
                    for x in &mut depth[start..] {
                        *x += 1;
                    }
                    depth.push(d);
                    spine.push(t as u8);
                    next[s].push(nodes.len() as u32);
                    nodes.push(Node { depth, spine });
                    next.push(Vec::new());
                }
            }
            s += 1;
        }
        let argmin = nodes
            .iter()
            .map(|node| {
                let mut table = [0u8; MAX_BLOCK * MAX_BLOCK];
                for l in 0..node.depth.len() {
                    let mut best = l;
                    for r in l..node.depth.len() {
                        if node.depth[r] < node.depth[best] {
                            best = r;
                        }
                        table[l * MAX_BLOCK + r] = best as u8;
                    }
                }
                table
            })
            .collect();
        Self {
            len: nodes.iter().map(|n| n.depth.len() as u8).collect(),
            next,
            argmin,
        }
    }

    fn get() -> &'static ShapeCatalog {
        static CATALOG: OnceLock<ShapeCatalog> = OnceLock::new();
        CATALOG.get_or_init(ShapeCatalog::build)
    }
}

/// Shape identifier of a block, as used by the shared in-block tables.
pub fn block_fingerprint(values: &[f64]) -> u32 {
    assert!(values.len() <= MAX_BLOCK, "block longer than {MAX_BLOCK}");
    let cat = ShapeCatalog::get();
    let mut spine: Vec<f64> = Vec::with_capacity(values.len());
    let mut state = 0u32;
    for &x in values {
        let mut k = 0;
        while spine.last().is_some_and(|&top| top > x) {
            spine.pop();
            k += 1;
        }
        spine.push(x);
        state = cat.next[state as usize][k];
    }
    state
}

/// In-block argmin offset of `[l, r]` for a block of the given shape.
pub fn block_argmin(fingerprint: u32, l: usize, r: usize) -> usize {
    let cat = ShapeCatalog::get();
    debug_assert!(l <= r && r < cat.len[fingerprint as usize] as usize);
    cat.argmin[fingerprint as usize][l * MAX_BLOCK + r] as usize
}

#[derive(Debug, Clone)]
struct Blocked {
    b: usize,
    vals: Vec<f64>,
    shapes: Vec<u32>,
    /// `sparse[k][i]`: index of the minimum over blocks `i .. i + 2^k`.
    sparse: Vec<Vec<u32>>,
    open_shape: u32,
    open_spine: Vec<f64>,
    completions: usize,
}

impl Blocked {
    fn new(b: usize) -> Self {
        debug_assert!((1..=MAX_BLOCK).contains(&b));
        Self {
            b,
            vals: Vec::new(),
            shapes: Vec::new(),
            sparse: vec![Vec::new()],
            open_shape: 0,
            open_spine: Vec::with_capacity(b),
            completions: 0,
        }
    }

    #[inline]
    fn better(&self, a: usize, c: usize) -> usize {
        // Leftmost wins ties; callers pass `a < c`.
        if self.vals[c] < self.vals[a] {
            c
        } else {
            a
        }
    }

    fn push(&mut self, x: f64) {
        let cat = ShapeCatalog::get();
        let mut k = 0;
        while self.open_spine.last().is_some_and(|&top| top > x) {
            self.open_spine.pop();
            k += 1;
        }
        self.open_spine.push(x);
        self.open_shape = cat.next[self.open_shape as usize][k];
        self.vals.push(x);
        if self.vals.len().is_multiple_of(self.b) {
            self.complete_block();
        }
    }

    fn complete_block(&mut self) {
        let blk = self.shapes.len();
        let start = blk * self.b;
        let min = start + block_argmin(self.open_shape, 0, self.b - 1);
        self.shapes.push(self.open_shape);
        self.open_shape = 0;
        self.open_spine.clear();
        self.sparse[0].push(min as u32);
        let nb = blk + 1;
        let mut k = 1;
        while (1usize << k) <= nb {
            if self.sparse.len() == k {
                self.sparse.push(Vec::new());
            }
            let i = nb - (1 << k);
            let half = 1 << (k - 1);
            let a = self.sparse[k - 1][i] as usize;
            let c = self.sparse[k - 1][i + half] as usize;
            let m = self.better(a, c) as u32;
            debug_assert_eq!(self.sparse[k].len(), i);
            self.sparse[k].push(m);
            k += 1;
        }
        self.completions += 1;
    }

    #[inline]
    fn in_block(&self, l: usize, r: usize) -> usize {
        let blk = l / self.b;
        let start = blk * self.b;
        let shape = if blk < self.shapes.len() {
            self.shapes[blk]
        } else {
            self.open_shape
        };
        start + block_argmin(shape, l - start, r - start)
    }

    #[inline]
    fn argmin(&self, l: usize, r: usize) -> usize {
        let (bl, br) = (l / self.b, r / self.b);
        if bl == br {
            return self.in_block(l, r);
        }
        let mut best = self.in_block(l, (bl + 1) * self.b - 1);
        if bl + 1 < br {
            let (lo, hi) = (bl + 1, br - 1);
            let k = (usize::BITS - 1 - (hi - lo + 1).leading_zeros()) as usize;
            let a = self.sparse[k][lo] as usize;
            let c = self.sparse[k][hi + 1 - (1 << k)] as usize;
            best = self.better(best, self.better(a, c));
        }
        self.better(best, self.in_block(br * self.b, r))
    }

    fn check(&self, l: usize, r: usize) -> Result<()> {
        if l > r || r >= self.vals.len() {
            return Err(Error::Range {
                lo: l,
                hi: r,
                len: self.vals.len(),
            });
        }
        Ok(())
    }
}

/// Constant-time range minimum over a fixed array.
#[derive(Debug, Clone)]
pub struct StaticRmq {
    inner: Blocked,
}

impl StaticRmq {
    pub fn new(values: Vec<f64>) -> Self {
        let k = values.len().max(1).next_power_of_two();
        let b = (k.trailing_zeros() as usize / 4).clamp(1, MAX_BLOCK);
        let mut inner = Blocked::new(b);
        inner.vals.reserve_exact(values.len());
        for x in values {
            inner.push(x);
        }
        Self { inner }
    }

    pub fn len(&self) -> usize {
        self.inner.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.vals.is_empty()
    }

    pub fn block_size(&self) -> usize {
        self.inner.b
    }

    /// Minimum of `values[l..=r]` with its leftmost position.
    pub fn query(&self, l: usize, r: usize) -> Result<(f64, usize)> {
        self.inner.check(l, r)?;
        Ok(self.min(l, r))
    }

    #[inline]
    pub(crate) fn min(&self, l: usize, r: usize) -> (f64, usize) {
        let i = self.inner.argmin(l, r);
        (self.inner.vals[i], i)
    }
}

/// Range minimum over an array that grows at the end.
#[derive(Debug, Clone)]
pub struct AppendableRmq {
    inner: Blocked,
}

impl Default for AppendableRmq {
    fn default() -> Self {
        Self::new()
    }
}

impl AppendableRmq {
    pub fn new() -> Self {
        Self {
            inner: Blocked::new(APPENDABLE_BLOCK),
        }
    }

    pub fn push(&mut self, value: f64) {
        self.inner.push(value);
    }

    pub fn len(&self) -> usize {
        self.inner.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.vals.is_empty()
    }

    /// Number of times the block-minimum table was extended.
    pub fn rebuild_events(&self) -> usize {
        self.inner.completions
    }

    pub fn query(&self, l: usize, r: usize) -> Result<(f64, usize)> {
        self.inner.check(l, r)?;
        Ok(self.min(l, r))
    }

    #[inline]
    pub(crate) fn min(&self, l: usize, r: usize) -> (f64, usize) {
        let i = self.inner.argmin(l, r);
        (self.inner.vals[i], i)
    }
}

/// Prefix minima over columns `1..=m` under decrease-only updates.
#[derive(Debug, Clone)]
pub struct ColumnMinTree {
    m: usize,
    size: usize,
    tree: Vec<f64>,
}

impl ColumnMinTree {
    pub fn new(m: usize) -> Self {
        let size = m.max(1).next_power_of_two();
        Self {
            m,
            size,
            tree: vec![f64::INFINITY; 2 * size],
        }
    }

    pub fn columns(&self) -> usize {
        self.m
    }

    /// Lowers the key of column `col` to `min(current, key)`.
    pub fn decrease(&mut self, col: usize, key: f64) -> Result<()> {
        if col == 0 || col > self.m {
            return Err(Error::Range {
                lo: col,
                hi: col,
                len: self.m,
            });
        }
        self.lower(col, key);
        Ok(())
    }

    #[inline]
    pub(crate) fn lower(&mut self, col: usize, key: f64) {
        let mut v = self.size + col - 1;
        while v >= 1 && key < self.tree[v] {
            self.tree[v] = key;
            v /= 2;
        }
    }

    /// Minimum key over columns `1..=i`; `+∞` when none was set.
    pub fn prefix_min(&self, i: usize) -> Result<f64> {
        if i == 0 || i > self.m {
            return Err(Error::Range {
                lo: 1,
                hi: i,
                len: self.m,
            });
        }
        Ok(self.prefix(i))
    }

    #[inline]
    pub(crate) fn prefix(&self, i: usize) -> f64 {
        let mut lo = self.size;
        let mut hi = self.size + i; // exclusive
        let mut best = f64::INFINITY;
        while lo < hi {
            if lo & 1 == 1 {
                best = best.min(self.tree[lo]);
                lo += 1;
            }
            if hi & 1 == 1 {
                hi -= 1;
                best = best.min(self.tree[hi]);
            }
            lo /= 2;
            hi /= 2;
        }
        best
    }
}

/// Sliding-window minimum: entry `i` is the minimum of
/// `values[i + 1 - w ..= i]`, clipped at the start of the slice.
pub fn window_min(values: &[f64], w: usize) -> Vec<f64> {
    let w = w.max(1);
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut out = Vec::with_capacity(values.len());
    for (i, &x) in values.iter().enumerate() {
        while dq.back().is_some_and(|&j| values[j] >= x) {
            dq.pop_back();
        }
        dq.push_back(i);
        if dq[0] + w <= i {
            dq.pop_front();
        }
        out.push(values[dq[0]]);
    }
    out
}
