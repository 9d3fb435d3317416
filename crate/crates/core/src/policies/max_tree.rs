//! Growable segment tree answering prefix argmax queries.

const NIL: u32 = u32::MAX;

/// Values indexed by position. Ties go to the smaller position.
#[derive(Debug, Clone, Default)]
pub(crate) struct MaxTree {
    cap: usize,
    vals: Vec<f64>,
    best: Vec<u32>,
}

impl MaxTree {
    pub(crate) fn new() -> Self {
        MaxTree { cap: 0, vals: Vec::new(), best: Vec::new() }
    }

    pub(crate) fn len(&self) -> usize {
        self.vals.len()
    }

    #[inline]
    fn pick(&self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        let (va, vb) = (self.vals[a as usize], self.vals[b as usize]);
        if vb > va || (vb == va && b < a) {
            b
        } else {
            a
        }
    }

    fn rebuild(&mut self) {
        self.best = vec![NIL; 2 * self.cap];
        for i in 0..self.vals.len() {
            self.best[self.cap + i] = i as u32;
        }
        for v in (1..self.cap).rev() {
            self.best[v] = self.pick(self.best[2 * v], self.best[2 * v + 1]);
        }
    }

    pub(crate) fn push(&mut self, v: f64) {
        if self.vals.len() == self.cap {
            self.cap = (self.cap * 2).max(16);
            self.vals.push(v);
            self.rebuild();
            return;
        }
        let i = self.vals.len();
        self.vals.push(v);
        self.best[self.cap + i] = i as u32;
        self.fix(i);
    }

    pub(crate) fn set(&mut self, i: usize, v: f64) {
        self.vals[i] = v;
        self.fix(i);
    }

    fn fix(&mut self, i: usize) {
        let mut p = (self.cap + i) / 2;
        while p >= 1 {
            self.best[p] = self.pick(self.best[2 * p], self.best[2 * p + 1]);
            p /= 2;
        }
    }

    /// Position of the largest value among the first `z` positions.
    pub(crate) fn argmax_prefix(&self, z: usize) -> Option<usize> {
        let z = z.min(self.vals.len());
        if z == 0 {
            return None;
        }
        let (mut l, mut r) = (self.cap, self.cap + z);
        let mut acc = NIL;
        while l < r {
            if l & 1 == 1 {
                acc = self.pick(acc, self.best[l]);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                acc = self.pick(acc, self.best[r]);
            }
            l /= 2;
            r /= 2;
        }
        (acc != NIL).then_some(acc as usize)
    }

    pub(crate) fn argmax(&self) -> Option<usize> {
        self.argmax_prefix(self.vals.len())
    }
}
