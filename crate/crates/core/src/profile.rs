use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

/// A set of global action ids stored as a growable bitset.
///
/// Ordering is lexicographic on the ascending id sequences, which is the
/// tie-break order used by demand and best-response queries.
#[derive(Clone, Default)]
pub struct ActionProfile {
    words: Vec<u64>,
}

impl ActionProfile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_ids<I: IntoIterator<Item = usize>>(ids: I) -> Self {
        let mut s = Self::new();
        for id in ids {
            s.insert(id);
        }
        s
    }

    /// Bit `k` of `mask` selects `ground[k]`.
    pub fn from_mask(mask: u64, ground: &[usize]) -> Self {
        let mut s = Self::new();
        let mut m = mask;
        while m != 0 {
            let k = m.trailing_zeros() as usize;
            s.insert(ground[k]);
            m &= m - 1;
        }
        s
    }

    /// Mask over the full id range `0..64`; `None` if some id is larger.
    pub fn to_mask(&self) -> Option<u64> {
        if self.words.iter().skip(1).any(|w| *w != 0) {
            return None;
        }
        Some(self.words.first().copied().unwrap_or(0))
    }

    pub fn insert(&mut self, id: usize) -> bool {
        let (w, b) = (id / 64, id % 64);
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        let had = self.words[w] & (1 << b) != 0;
        self.words[w] |= 1 << b;
        !had
    }

    pub fn remove(&mut self, id: usize) -> bool {
        let (w, b) = (id / 64, id % 64);
        if w >= self.words.len() {
            return false;
        }
        let had = self.words[w] & (1 << b) != 0;
        self.words[w] &= !(1 << b);
        had
    }

    pub fn contains(&self, id: usize) -> bool {
        let (w, b) = (id / 64, id % 64);
        w < self.words.len() && self.words[w] & (1 << b) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    /// Ascending ids.
    pub fn iter(&self) -> Iter<'_> {
        Iter { words: &self.words, word: 0, cur: self.words.first().copied().unwrap_or(0) }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union(&self, other: &Self) -> Self {
        let (long, short) = if self.words.len() >= other.words.len() { (self, other) } else { (other, self) };
        let mut words = long.words.clone();
        for (w, o) in words.iter_mut().zip(&short.words) {
            *w |= *o;
        }
        Self { words }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        Self { words }
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut words = self.words.clone();
        for (w, o) in words.iter_mut().zip(&other.words) {
            *w &= !*o;
        }
        Self { words }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().enumerate().all(|(i, w)| {
            let o = other.words.get(i).copied().unwrap_or(0);
            w & !o == 0
        })
    }

    pub fn max_id(&self) -> Option<usize> {
        for (i, w) in self.words.iter().enumerate().rev() {
            if *w != 0 {
                return Some(i * 64 + 63 - w.leading_zeros() as usize);
            }
        }
        None
    }

    pub fn extend<I: IntoIterator<Item = usize>>(&mut self, ids: I) {
        for id in ids {
            self.insert(id);
        }
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    word: usize,
    cur: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let b = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.word * 64 + b);
            }
            self.word += 1;
            if self.word >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.word];
        }
    }
}

impl<'a> IntoIterator for &'a ActionProfile {
    type Item = usize;
    type IntoIter = Iter<'a>;
    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

impl FromIterator<usize> for ActionProfile {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::from_ids(iter)
    }
}

impl PartialEq for ActionProfile {
    fn eq(&self, other: &Self) -> bool {
        let n = self.words.len().max(other.words.len());
        (0..n).all(|i| self.words.get(i).copied().unwrap_or(0) == other.words.get(i).copied().unwrap_or(0))
    }
}

impl Eq for ActionProfile {}

impl Ord for ActionProfile {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for ActionProfile {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl core::hash::Hash for ActionProfile {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        for id in self.iter() {
            id.hash(state);
        }
    }
}

impl fmt::Debug for ActionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Lexicographic comparison of two masks over the same ascending ground list.
pub fn mask_lex_cmp(a: u64, b: u64) -> Ordering {
    let x = a ^ b;
    if x == 0 {
        return Ordering::Equal;
    }
    let d = x.trailing_zeros();
    let above = if d == 63 { 0 } else { !0u64 << (d + 1) };
    let a_has = a & (1 << d) != 0;
    let lacking = if a_has { b } else { a };
    // The set holding `d` is smaller unless the other one stops before `d`.
    let holder_smaller = lacking & above != 0;
    if a_has == holder_smaller {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_set_ops() {
        let mut s = ActionProfile::from_ids([3, 70, 1]);
        assert_eq!(s.to_vec(), [1, 3, 70]);
        assert_eq!(s.len(), 3);
        assert!(s.contains(70) && !s.contains(2));
        s.remove(70);
        assert_eq!(s.to_mask(), Some(0b1010));
        assert_eq!(s.max_id(), Some(3));
        let t = ActionProfile::from_ids([3, 4]);
        assert_eq!(s.union(&t).to_vec(), [1, 3, 4]);
        assert_eq!(s.intersection(&t).to_vec(), [3]);
        assert_eq!(s.difference(&t).to_vec(), [1]);
        assert!(ActionProfile::from_ids([3]).is_subset(&s));
    }

    #[test]
    fn trailing_zero_words_do_not_matter() {
        let mut a = ActionProfile::from_ids([1, 200]);
        a.remove(200);
        assert_eq!(a, ActionProfile::from_ids([1]));
        assert_eq!(a.cmp(&ActionProfile::from_ids([1])), Ordering::Equal);
    }

    #[test]
    fn lex_order_matches_sequences() {
        let ground: Vec<usize> = (0..6).collect();
        for a in 0u64..64 {
            for b in 0u64..64 {
                let sa = ActionProfile::from_mask(a, &ground);
                let sb = ActionProfile::from_mask(b, &ground);
                assert_eq!(mask_lex_cmp(a, b), sa.cmp(&sb), "{a:b} vs {b:b}");
            }
        }
    }
}
