//! Ordered set of `u32` keys with rank selection.
//!
//! A treap with subtree sizes, stored in a slab. Node priorities are a hash of
//! the key, so the tree shape depends only on the key set and is reproducible.

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Node {
    key: u32,
    left: u32,
    right: u32,
    size: u32,
}

#[derive(Debug, Clone)]
pub struct RankSet {
    nodes: Vec<Node>,
    free: Vec<u32>,
    root: u32,
}

impl Default for RankSet {
    fn default() -> Self {
        Self::new()
    }
}

fn priority(key: u32) -> u64 {
    // splitmix64 finalizer
    let mut z = u64::from(key).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RankSet {
    pub fn new() -> Self {
        RankSet { nodes: Vec::new(), free: Vec::new(), root: NIL }
    }

    pub fn len(&self) -> usize {
        self.size(self.root) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.root == NIL
    }

    pub fn contains(&self, key: u32) -> bool {
        let mut cur = self.root;
        while cur != NIL {
            let node = &self.nodes[cur as usize];
            if key == node.key {
                return true;
            }
            cur = if key < node.key { node.left } else { node.right };
        }
        false
    }

    /// Inserts `key`; returns `false` if it was already present.
    pub fn insert(&mut self, key: u32) -> bool {
        if self.contains(key) {
            return false;
        }
        let node = self.alloc(key);
        let (lo, hi) = self.split(self.root, key);
        let left = self.merge(lo, node);
        self.root = self.merge(left, hi);
        true
    }

    /// Removes `key`; returns `false` if it was absent.
    pub fn remove(&mut self, key: u32) -> bool {
        let (root, removed) = self.remove_at(self.root, key);
        self.root = root;
        removed
    }

    /// Key of 0-based rank `rank` in ascending order.
    pub fn select(&self, mut rank: usize) -> Option<u32> {
        let mut cur = self.root;
        while cur != NIL {
            let node = &self.nodes[cur as usize];
            let left = self.size(node.left) as usize;
            if rank < left {
                cur = node.left;
            } else if rank == left {
                return Some(node.key);
            } else {
                rank -= left + 1;
                cur = node.right;
            }
        }
        None
    }

    /// Number of keys strictly smaller than `key`.
    pub fn rank_of(&self, key: u32) -> usize {
        let mut cur = self.root;
        let mut rank = 0;
        while cur != NIL {
            let node = &self.nodes[cur as usize];
            if key <= node.key {
                cur = node.left;
            } else {
                rank += self.size(node.left) as usize + 1;
                cur = node.right;
            }
        }
        rank
    }

    /// Keys in ascending order.
    pub fn to_vec(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = Vec::new();
        let mut cur = self.root;
        loop {
            while cur != NIL {
                stack.push(cur);
                cur = self.nodes[cur as usize].left;
            }
            let Some(top) = stack.pop() else { break };
            out.push(self.nodes[top as usize].key);
            cur = self.nodes[top as usize].right;
        }
        out
    }

    pub fn height(&self) -> usize {
        fn go(set: &RankSet, i: u32) -> usize {
            if i == NIL {
                0
            } else {
                let n = &set.nodes[i as usize];
                1 + go(set, n.left).max(go(set, n.right))
            }
        }
        go(self, self.root)
    }

    fn size(&self, i: u32) -> u32 {
        if i == NIL {
            0
        } else {
            self.nodes[i as usize].size
        }
    }

    fn fix(&mut self, i: u32) {
        let (l, r) = {
            let n = &self.nodes[i as usize];
            (n.left, n.right)
        };
        self.nodes[i as usize].size = 1 + self.size(l) + self.size(r);
    }

    fn alloc(&mut self, key: u32) -> u32 {
        let node = Node { key, left: NIL, right: NIL, size: 1 };
        match self.free.pop() {
            Some(i) => {
                self.nodes[i as usize] = node;
                i
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        }
    }

    /// Splits into keys `< key` and keys `>= key`.
    fn split(&mut self, t: u32, key: u32) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        let node = self.nodes[t as usize];
        if node.key < key {
            let (lo, hi) = self.split(node.right, key);
            self.nodes[t as usize].right = lo;
            self.fix(t);
            (t, hi)
        } else {
            let (lo, hi) = self.split(node.left, key);
            self.nodes[t as usize].left = hi;
            self.fix(t);
            (lo, t)
        }
    }

    /// Joins two treaps where every key of `a` precedes every key of `b`.
    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        let (ka, kb) = (self.nodes[a as usize].key, self.nodes[b as usize].key);
        if priority(ka) > priority(kb) {
            let r = self.nodes[a as usize].right;
            let merged = self.merge(r, b);
            self.nodes[a as usize].right = merged;
            self.fix(a);
            a
        } else {
            let l = self.nodes[b as usize].left;
            let merged = self.merge(a, l);
            self.nodes[b as usize].left = merged;
            self.fix(b);
            b
        }
    }

    fn remove_at(&mut self, t: u32, key: u32) -> (u32, bool) {
        if t == NIL {
            return (NIL, false);
        }
        let node = self.nodes[t as usize];
        if key == node.key {
            self.free.push(t);
            return (self.merge(node.left, node.right), true);
        }
        let removed = if key < node.key {
            let (sub, removed) = self.remove_at(node.left, key);
            self.nodes[t as usize].left = sub;
            removed
        } else {
            let (sub, removed) = self.remove_at(node.right, key);
            self.nodes[t as usize].right = sub;
            removed
        };
        if removed {
            self.fix(t);
        }
        (t, removed)
    }
}
