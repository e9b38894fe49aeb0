/// Membership bitmap over `0..n` with a cached cardinality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    words: Vec<u64>,
    universe: usize,
    len: usize,
}

impl VertexSet {
    pub fn empty(universe: usize) -> Self {
        VertexSet {
            words: vec![0; universe.div_ceil(64)],
            universe,
            len: 0,
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut set = VertexSet::empty(universe);
        for w in set.words.iter_mut() {
            *w = !0;
        }
        if !universe.is_multiple_of(64) {
            if let Some(last) = set.words.last_mut() {
                *last = (1u64 << (universe % 64)) - 1;
            }
        }
        set.len = universe;
        set
    }

    /// Panics if a vertex is outside the universe.
    pub fn from_vertices<I: IntoIterator<Item = u32>>(universe: usize, vertices: I) -> Self {
        let mut set = VertexSet::empty(universe);
        for v in vertices {
            set.insert(v);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        let v = v as usize;
        v < self.universe && self.words[v >> 6] & (1 << (v & 63)) != 0
    }

    /// Returns true if `v` was newly added.
    #[inline]
    pub fn insert(&mut self, v: u32) -> bool {
        let v = v as usize;
        assert!(
            v < self.universe,
            "vertex {v} outside universe {}",
            self.universe
        );
        let word = &mut self.words[v >> 6];
        let bit = 1u64 << (v & 63);
        if *word & bit == 0 {
            *word |= bit;
            self.len += 1;
            true
        } else {
            false
        }
    }

    /// Returns true if `v` was present.
    #[inline]
    pub fn remove(&mut self, v: u32) -> bool {
        let v = v as usize;
        if v >= self.universe {
            return false;
        }
        let word = &mut self.words[v >> 6];
        let bit = 1u64 << (v & 63);
        if *word & bit != 0 {
            *word &= !bit;
            self.len -= 1;
            true
        } else {
            false
        }
    }

    pub fn complement(&self) -> VertexSet {
        let mut out = VertexSet::full(self.universe);
        for (o, w) in out.words.iter_mut().zip(&self.words) {
            *o &= !w;
        }
        out.len = self.universe - self.len;
        out
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    /// Set bits in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let bit = w.trailing_zeros();
                    w &= w - 1;
                    Some((i as u32) * 64 + bit)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }
}
