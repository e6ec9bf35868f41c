//! Finite metric spaces as distance tables.

/// A finite metric space on points `0..len()`, with integer distances.
pub trait FiniteMetric {
    fn len(&self) -> usize;
    fn dist(&self, a: usize, b: usize) -> u32;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn diameter(&self) -> u32 {
        let n = self.len();
        let mut d = 0;
        for a in 0..n {
            for b in a + 1..n {
                d = d.max(self.dist(a, b));
            }
        }
        d
    }
}

/// Dense symmetric distance table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistTable {
    n: usize,
    d: Vec<u32>,
}

impl DistTable {
    pub fn new(n: usize) -> Self {
        DistTable {
            n,
            d: vec![0; n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> u32) -> Self {
        let mut t = DistTable::new(n);
        for a in 0..n {
            for b in a + 1..n {
                t.set(a, b, f(a, b));
            }
        }
        t
    }

    pub fn set(&mut self, a: usize, b: usize, v: u32) {
        self.d[a * self.n + b] = v;
        self.d[b * self.n + a] = v;
    }

    pub fn row(&self, a: usize) -> &[u32] {
        &self.d[a * self.n..(a + 1) * self.n]
    }

    /// Grow to `n` points; new entries are zero until set.
    pub fn grow(&mut self, n: usize) {
        if n <= self.n {
            return;
        }
        let mut d = vec![0; n * n];
        for a in 0..self.n {
            d[a * n..a * n + self.n].copy_from_slice(self.row(a));
        }
        self.n = n;
        self.d = d;
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        (0..self.n).map(|a| self.row(a).to_vec()).collect()
    }

    /// First violation of the metric axioms, if any.
    pub fn metric_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.n;
        for a in 0..n {
            if self.dist(a, a) != 0 {
                return Some((a, a, a));
            }
            for b in 0..n {
                if a != b && self.dist(a, b) == 0 {
                    return Some((a, b, b));
                }
                for c in 0..n {
                    if self.dist(a, c) > self.dist(a, b) + self.dist(b, c) {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }
}

impl FiniteMetric for DistTable {
    fn len(&self) -> usize {
        self.n
    }
    fn dist(&self, a: usize, b: usize) -> u32 {
        self.d[a * self.n + b]
    }
}

impl<M: FiniteMetric + ?Sized> FiniteMetric for &M {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn dist(&self, a: usize, b: usize) -> u32 {
        (**self).dist(a, b)
    }
}
