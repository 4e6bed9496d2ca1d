use std::cmp::Ordering;
use std::fmt;

/// Variables 0..64 fit into a single machine word.
const WORD_BITS: usize = 64;

/// Support `I` of a square-free monomial `x^I`.
///
/// Indices are 0-based internally. A support whose indices all lie below 64
/// is stored as a bitmask so that the cube multiplication rule
/// `x^I x^J = x^{I Δ J}` is a single XOR; anything wider falls back to a
/// strictly increasing index vector. The choice is canonical (it depends only
/// on the set), so derived equality and hashing are semantic.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MonomialSupport(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Word(u64),
    Wide(Box<[u32]>),
}

impl MonomialSupport {
    /// The empty support, i.e. the monomial `1`.
    pub const EMPTY: MonomialSupport = MonomialSupport(Repr::Word(0));

    /// Builds a support from 0-based indices in any order.
    ///
    /// Returns `None` if an index is repeated (the monomial would not be
    /// square-free).
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Option<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some(Self::from_sorted(v))
    }

    /// Builds a support from 1-based indices, the convention of the text formats.
    pub fn from_one_based<I: IntoIterator<Item = usize>>(indices: I) -> Option<Self> {
        let mut v = Vec::new();
        for i in indices {
            if i == 0 {
                return None;
            }
            v.push(i - 1);
        }
        Self::from_indices(v)
    }

    /// Support whose indices are the set bits of `w`.
    pub(crate) const fn from_word(w: u64) -> Self {
        MonomialSupport(Repr::Word(w))
    }

    /// Single-variable support `{i}` (0-based).
    pub fn singleton(i: usize) -> Self {
        Self::from_sorted(vec![i])
    }

    fn from_sorted(v: Vec<usize>) -> Self {
        match v.last() {
            None => Self::EMPTY,
            Some(&max) if max < WORD_BITS => {
                MonomialSupport(Repr::Word(v.iter().fold(0u64, |acc, &i| acc | (1u64 << i))))
            }
            Some(_) => MonomialSupport(Repr::Wide(v.into_iter().map(|i| i as u32).collect())),
        }
    }

    fn from_sorted_u32(v: Vec<u32>) -> Self {
        match v.last() {
            Some(&max) if max as usize >= WORD_BITS => MonomialSupport(Repr::Wide(v.into())),
            _ => MonomialSupport(Repr::Word(v.iter().fold(0u64, |acc, &i| acc | (1u64 << i)))),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.0, Repr::Word(0))
    }

    /// `|I|`, the degree of the monomial.
    pub fn len(&self) -> usize {
        match &self.0 {
            Repr::Word(w) => w.count_ones() as usize,
            Repr::Wide(v) => v.len(),
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        match &self.0 {
            Repr::Word(w) => i < WORD_BITS && (w >> i) & 1 == 1,
            Repr::Wide(v) => v.binary_search(&(i as u32)).is_ok(),
        }
    }

    /// Largest 0-based index, `None` for the empty support.
    pub fn max_index(&self) -> Option<usize> {
        match &self.0 {
            Repr::Word(0) => None,
            Repr::Word(w) => Some(WORD_BITS - 1 - w.leading_zeros() as usize),
            Repr::Wide(v) => v.last().map(|&i| i as usize),
        }
    }

    /// Iterates the 0-based indices in increasing order.
    pub fn iter(&self) -> SupportIter<'_> {
        match &self.0 {
            Repr::Word(w) => SupportIter::Word(*w),
            Repr::Wide(v) => SupportIter::Wide(v.iter()),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// The bitmask, when every index is below 64.
    pub fn as_word(&self) -> Option<u64> {
        match &self.0 {
            Repr::Word(w) => Some(*w),
            Repr::Wide(_) => None,
        }
    }

    /// Cube product `x^I x^J = x^{I Δ J}`.
    pub fn multiply(&self, other: &Self) -> Self {
        match (&self.0, &other.0) {
            (Repr::Word(a), Repr::Word(b)) => MonomialSupport(Repr::Word(a ^ b)),
            _ => {
                let a: Vec<u32> = self.iter().map(|i| i as u32).collect();
                let b: Vec<u32> = other.iter().map(|i| i as u32).collect();
                Self::from_sorted_u32(symmetric_difference(&a, &b))
            }
        }
    }

    /// `I ∖ {i}`; returns the support unchanged if `i ∉ I`.
    pub fn without(&self, i: usize) -> Self {
        match &self.0 {
            Repr::Word(w) if i < WORD_BITS => MonomialSupport(Repr::Word(w & !(1u64 << i))),
            Repr::Word(_) => self.clone(),
            Repr::Wide(v) => {
                let rest: Vec<u32> = v.iter().copied().filter(|&j| j as usize != i).collect();
                Self::from_sorted_u32(rest)
            }
        }
    }

    /// `true` when `I ∩ J = ∅`.
    pub fn is_disjoint(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Word(a), Repr::Word(b)) => a & b == 0,
            _ => !self.iter().any(|i| other.contains(i)),
        }
    }
}

fn symmetric_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl Default for MonomialSupport {
    fn default() -> Self {
        Self::EMPTY
    }
}

/// Graded order: by degree first, then lexicographically on the sorted
/// index lists. Term storage and all merges follow this order.
impl Ord for MonomialSupport {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Word(a), Repr::Word(b)) => {
                a.count_ones().cmp(&b.count_ones()).then_with(|| lex_words(*a, *b))
            }
            _ => self.len().cmp(&other.len()).then_with(|| self.iter().cmp(other.iter())),
        }
    }
}

impl PartialOrd for MonomialSupport {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic comparison of the index lists of two equal-weight masks.
fn lex_words(a: u64, b: u64) -> Ordering {
    let diff = a ^ b;
    if diff == 0 {
        return Ordering::Equal;
    }
    // The lowest differing index decides: whoever owns it sorts first.
    if (a >> diff.trailing_zeros()) & 1 == 1 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

pub enum SupportIter<'a> {
    Word(u64),
    Wide(std::slice::Iter<'a, u32>),
}

impl Iterator for SupportIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        match self {
            SupportIter::Word(w) => {
                if *w == 0 {
                    None
                } else {
                    let i = w.trailing_zeros() as usize;
                    *w &= *w - 1;
                    Some(i)
                }
            }
            SupportIter::Wide(it) => it.next().map(|&i| i as usize),
        }
    }
}

/// Prints the 1-based index set, e.g. `{1,3}`.
impl fmt::Debug for MonomialSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(ix: &[usize]) -> MonomialSupport {
        MonomialSupport::from_one_based(ix.iter().copied()).unwrap()
    }

    #[test]
    fn symmetric_difference_examples() {
        assert_eq!(s(&[1, 2]).multiply(&s(&[2, 3])), s(&[1, 3]));
        assert_eq!(s(&[4, 7]).multiply(&s(&[4, 7])), MonomialSupport::EMPTY);
        assert_eq!(MonomialSupport::EMPTY.multiply(&s(&[4])), s(&[4]));
    }

    #[test]
    fn wide_supports_normalize_back_to_words() {
        let a = s(&[3, 100]);
        let b = s(&[5, 100]);
        let p = a.multiply(&b);
        assert_eq!(p, s(&[3, 5]));
        assert!(p.as_word().is_some());
        assert!(a.as_word().is_none());
        assert_eq!(a.multiply(&s(&[3])), s(&[100]));
    }

    #[test]
    fn rejects_repeated_indices() {
        assert!(MonomialSupport::from_one_based([2, 2]).is_none());
        assert!(MonomialSupport::from_one_based([0]).is_none());
    }

    #[test]
    fn graded_order() {
        let mut v = vec![s(&[1, 2]), s(&[3]), MonomialSupport::EMPTY, s(&[1, 3]), s(&[1])];
        v.sort();
        assert_eq!(v, vec![MonomialSupport::EMPTY, s(&[1]), s(&[3]), s(&[1, 2]), s(&[1, 3])]);
        assert!(s(&[1, 70]) < s(&[2, 3, 4]));
        assert!(s(&[1, 70]) < s(&[2, 70]));
    }

    fn arb_support() -> impl Strategy<Value = MonomialSupport> {
        prop::collection::btree_set(0usize..130, 0..6)
            .prop_map(|set| MonomialSupport::from_indices(set).unwrap())
    }

    proptest! {
        #[test]
        fn boolean_group_laws(a in arb_support(), b in arb_support(), c in arb_support()) {
            prop_assert_eq!(a.multiply(&b), b.multiply(&a));
            prop_assert_eq!(a.multiply(&b).multiply(&c), a.multiply(&b.multiply(&c)));
            prop_assert_eq!(a.multiply(&MonomialSupport::EMPTY), a.clone());
            prop_assert!(a.multiply(&a).is_empty());
        }

        #[test]
        fn order_agrees_with_index_lists(a in arb_support(), b in arb_support()) {
            let key = |x: &MonomialSupport| (x.len(), x.to_vec());
            prop_assert_eq!(a.cmp(&b), key(&a).cmp(&key(&b)));
        }
    }
}
