/// A subset of at most 128 edges stored as a bit mask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSet(pub u128);

impl EdgeSet {
    pub const MAX_EDGES: usize = 128;

    pub fn empty() -> Self {
        EdgeSet(0)
    }

    pub fn singleton(e: usize) -> Self {
        EdgeSet(1u128 << e)
    }

    pub fn from_edges(edges: impl IntoIterator<Item = usize>) -> Self {
        let mut s = EdgeSet(0);
        for e in edges {
            s.toggle(e);
        }
        s
    }

    pub fn contains(self, e: usize) -> bool {
        (self.0 >> e) & 1 == 1
    }

    pub fn toggle(&mut self, e: usize) {
        self.0 ^= 1u128 << e;
    }

    pub fn xor(self, other: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 ^ other.0)
    }

    pub fn and(self, other: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 & other.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Parity of |self ∩ other|.
    pub fn meet_parity(self, other: EdgeSet) -> bool {
        (self.0 & other.0).count_ones() & 1 == 1
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let e = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(e)
            }
        })
    }
}

impl serde::Serialize for EdgeSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> serde::Deserialize<'de> for EdgeSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let edges = Vec::<usize>::deserialize(d)?;
        if let Some(&e) = edges.iter().find(|&&e| e >= Self::MAX_EDGES) {
            return Err(serde::de::Error::custom(format!(
                "edge id {e} out of range"
            )));
        }
        Ok(EdgeSet::from_edges(edges))
    }
}
