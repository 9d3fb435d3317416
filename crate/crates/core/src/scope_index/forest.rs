//! Arena of order-statistic treaps.
//!
//! Every element is a slot (`u32`) and owns exactly one node, so several trees
//! can share an arena as long as each slot sits in at most one of them. Keys
//! are not stored: callers pass a comparator over slots that reads whatever
//! external key table is current. A slot must be removed before its key
//! changes.

use std::cell::Cell;
use std::cmp::Ordering;

use crate::rng::splitmix64;

pub(crate) const NIL: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Node {
    left: u32,
    right: u32,
    size: u32,
    prio: u32,
}

#[derive(Debug, Default)]
pub(crate) struct Forest {
    nodes: Vec<Node>,
    comparisons: Cell<u64>,
}

impl Forest {
    pub(crate) fn new() -> Self {
        Forest::default()
    }

    pub(crate) fn comparisons(&self) -> u64 {
        self.comparisons.get()
    }

    fn ensure(&mut self, slot: u32) {
        let need = slot as usize + 1;
        while self.nodes.len() < need {
            let s = self.nodes.len() as u64;
            self.nodes.push(Node {
                left: NIL,
                right: NIL,
                size: 0,
                prio: (splitmix64(s ^ 0x5eed) >> 32) as u32,
            });
        }
    }

    #[inline]
    fn size_of(&self, t: u32) -> u32 {
        if t == NIL {
            0
        } else {
            self.nodes[t as usize].size
        }
    }

    #[inline]
    fn pull_up(&mut self, t: u32) {
        let n = self.nodes[t as usize];
        self.nodes[t as usize].size = 1 + self.size_of(n.left) + self.size_of(n.right);
    }

    #[inline]
    fn cmp<F: Fn(u32, u32) -> Ordering>(&self, cmp: &F, a: u32, b: u32) -> Ordering {
        self.comparisons.set(self.comparisons.get() + 1);
        cmp(a, b)
    }

    pub(crate) fn size(&self, root: u32) -> usize {
        self.size_of(root) as usize
    }

    pub(crate) fn insert<F: Fn(u32, u32) -> Ordering>(&mut self, root: &mut u32, slot: u32, cmp: &F) {
        self.ensure(slot);
        let node = &mut self.nodes[slot as usize];
        node.left = NIL;
        node.right = NIL;
        node.size = 1;
        *root = self.insert_at(*root, slot, cmp);
    }

    fn insert_at<F: Fn(u32, u32) -> Ordering>(&mut self, t: u32, slot: u32, cmp: &F) -> u32 {
        if t == NIL {
            return slot;
        }
        if self.nodes[slot as usize].prio > self.nodes[t as usize].prio {
            let (l, r) = self.split(t, slot, cmp);
            let node = &mut self.nodes[slot as usize];
            node.left = l;
            node.right = r;
            self.pull_up(slot);
            return slot;
        }
        if self.cmp(cmp, slot, t) == Ordering::Less {
            let l = self.nodes[t as usize].left;
            self.nodes[t as usize].left = self.insert_at(l, slot, cmp);
        } else {
            let r = self.nodes[t as usize].right;
            self.nodes[t as usize].right = self.insert_at(r, slot, cmp);
        }
        self.pull_up(t);
        t
    }

    /// Splits `t` into keys ordered before `pivot` and the rest.
    fn split<F: Fn(u32, u32) -> Ordering>(&mut self, t: u32, pivot: u32, cmp: &F) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        if self.cmp(cmp, t, pivot) == Ordering::Less {
            let r = self.nodes[t as usize].right;
            let (a, b) = self.split(r, pivot, cmp);
            self.nodes[t as usize].right = a;
            self.pull_up(t);
            (t, b)
        } else {
            let l = self.nodes[t as usize].left;
            let (a, b) = self.split(l, pivot, cmp);
            self.nodes[t as usize].left = b;
            self.pull_up(t);
            (a, t)
        }
    }

    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.nodes[a as usize].prio > self.nodes[b as usize].prio {
            let r = self.nodes[a as usize].right;
            self.nodes[a as usize].right = self.merge(r, b);
            self.pull_up(a);
            a
        } else {
            let l = self.nodes[b as usize].left;
            self.nodes[b as usize].left = self.merge(a, l);
            self.pull_up(b);
            b
        }
    }

    pub(crate) fn remove<F: Fn(u32, u32) -> Ordering>(&mut self, root: &mut u32, slot: u32, cmp: &F) {
        *root = self.remove_at(*root, slot, cmp);
    }

    fn remove_at<F: Fn(u32, u32) -> Ordering>(&mut self, t: u32, slot: u32, cmp: &F) -> u32 {
        assert!(t != NIL, "slot {slot} is not in the tree");
        if t == slot {
            let n = self.nodes[t as usize];
            return self.merge(n.left, n.right);
        }
        if self.cmp(cmp, slot, t) == Ordering::Less {
            let l = self.nodes[t as usize].left;
            self.nodes[t as usize].left = self.remove_at(l, slot, cmp);
        } else {
            let r = self.nodes[t as usize].right;
            self.nodes[t as usize].right = self.remove_at(r, slot, cmp);
        }
        self.pull_up(t);
        t
    }

    /// Number of keys ordered strictly before `slot`'s key.
    pub(crate) fn rank<F: Fn(u32, u32) -> Ordering>(&self, root: u32, slot: u32, cmp: &F) -> usize {
        let mut t = root;
        let mut before = 0usize;
        while t != NIL {
            let n = self.nodes[t as usize];
            if t == slot {
                return before + self.size_of(n.left) as usize;
            }
            if self.cmp(cmp, slot, t) == Ordering::Less {
                t = n.left;
            } else {
                before += self.size_of(n.left) as usize + 1;
                t = n.right;
            }
        }
        panic!("slot {slot} is not in the tree");
    }

    /// The slot with zero-based position `k`.
    pub(crate) fn select(&self, root: u32, mut k: usize) -> Option<u32> {
        let mut t = root;
        while t != NIL {
            let n = self.nodes[t as usize];
            let ls = self.size_of(n.left) as usize;
            match k.cmp(&ls) {
                Ordering::Less => t = n.left,
                Ordering::Equal => return Some(t),
                Ordering::Greater => {
                    k -= ls + 1;
                    t = n.right;
                }
            }
        }
        None
    }

    pub(crate) fn first(&self, root: u32) -> Option<u32> {
        if root == NIL {
            return None;
        }
        let mut t = root;
        loop {
            let l = self.nodes[t as usize].left;
            if l == NIL {
                return Some(t);
            }
            t = l;
        }
    }

    pub(crate) fn in_order(&self, root: u32, out: &mut Vec<u32>) {
        let mut stack = Vec::new();
        let mut t = root;
        while t != NIL || !stack.is_empty() {
            while t != NIL {
                stack.push(t);
                t = self.nodes[t as usize].left;
            }
            let top = stack.pop().expect("nonempty stack");
            out.push(top);
            t = self.nodes[top as usize].right;
        }
    }
}
