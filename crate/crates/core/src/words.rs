//! Subsequence combinatorics of finite words over `[q]`.
//!
//! The central object is the universal decomposition `w = u_1 ... u_l u'`:
//! each block `u_i` is the shortest prefix of the remaining word that
//! contains all `q` symbols, and the tail `u'` misses at least one symbol.
//! The number of blocks is the universality index `nu(w)`, and `w` is
//! k-universal exactly when `nu(w) >= k`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::{Error, Result, ENUMERATION_LIMIT};

/// Alphabet `[q] = {1, ..., q}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet(u32);

impl Alphabet {
    pub fn new(q: u32) -> Result<Self> {
        if q == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Ok(Alphabet(q))
    }

    #[inline]
    pub fn size(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn contains(self, symbol: u32) -> bool {
        (1..=self.0).contains(&symbol)
    }

    pub fn check(self, symbol: u64) -> Result<u32> {
        if symbol >= 1 && symbol <= u64::from(self.0) {
            Ok(symbol as u32)
        } else {
            Err(Error::SymbolOutOfRange { symbol, q: self.0 })
        }
    }
}

/// A finite word over an [`Alphabet`]. May be empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    alphabet: Alphabet,
    symbols: Vec<u32>,
}

impl Word {
    pub fn new(alphabet: Alphabet, symbols: Vec<u32>) -> Result<Self> {
        if let Some(&bad) = symbols.iter().find(|&&s| !alphabet.contains(s)) {
            return Err(Error::SymbolOutOfRange {
                symbol: u64::from(bad),
                q: alphabet.size(),
            });
        }
        Ok(Word { alphabet, symbols })
    }

    /// Builds a word from symbols already known to lie in `[q]`.
    pub(crate) fn from_trusted(alphabet: Alphabet, symbols: Vec<u32>) -> Self {
        debug_assert!(symbols.iter().all(|&s| alphabet.contains(s)));
        Word { alphabet, symbols }
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        Word {
            alphabet,
            symbols: Vec::new(),
        }
    }

    /// Parses the text format: a digit string when `q <= 9`, otherwise
    /// comma-separated integers. The empty string is the empty word.
    pub fn parse(alphabet: Alphabet, text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Word::empty(alphabet));
        }
        let symbols = if alphabet.size() <= 9 && !text.contains(',') {
            text.chars()
                .map(|c| {
                    let digit = c
                        .to_digit(10)
                        .ok_or_else(|| Error::WordSyntax(text.to_string()))?;
                    alphabet.check(u64::from(digit))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            text.split(',')
                .map(|part| {
                    let value: u64 = part
                        .trim()
                        .parse()
                        .map_err(|_| Error::WordSyntax(text.to_string()))?;
                    alphabet.check(value)
                })
                .collect::<Result<Vec<_>>>()?
        };
        Ok(Word { alphabet, symbols })
    }

    #[inline]
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    #[inline]
    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn into_symbols(self) -> Vec<u32> {
        self.symbols
    }

    /// Concatenation; both words must share the alphabet.
    pub fn concat(&self, other: &Word) -> Result<Word> {
        same_alphabet(self, other)?;
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        Ok(Word::from_trusted(self.alphabet, symbols))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alphabet.size() <= 9 {
            for s in &self.symbols {
                write!(f, "{s}")?;
            }
        } else {
            for (i, s) in self.symbols.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

fn same_alphabet(a: &Word, b: &Word) -> Result<()> {
    if a.alphabet != b.alphabet {
        return Err(Error::AlphabetMismatch(
            a.alphabet.size(),
            b.alphabet.size(),
        ));
    }
    Ok(())
}

/// The unique greedy factorization `u_1 ... u_l u'` of a word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniversalDecomposition {
    pub blocks: Vec<Word>,
    pub tail: Word,
}

impl UniversalDecomposition {
    /// Number of complete blocks, i.e. the universality index.
    pub fn index(&self) -> usize {
        self.blocks.len()
    }

    /// Re-concatenates blocks and tail.
    pub fn concatenation(&self) -> Word {
        let mut symbols: Vec<u32> = self
            .blocks
            .iter()
            .flat_map(|b| b.symbols().iter().copied())
            .collect();
        symbols.extend_from_slice(self.tail.symbols());
        Word::from_trusted(self.tail.alphabet(), symbols)
    }
}

/// Tracks which symbols occur in the current block. Clearing is O(1) via
/// an epoch stamp per symbol.
struct BlockScanner {
    stamp: Vec<u32>,
    epoch: u32,
    seen: u32,
    q: u32,
}

impl BlockScanner {
    fn new(q: u32) -> Self {
        BlockScanner {
            stamp: vec![0; q as usize + 1],
            epoch: 1,
            seen: 0,
            q,
        }
    }

    /// Feeds one symbol; returns true if it completes the current block.
    #[inline]
    fn push(&mut self, symbol: u32) -> bool {
        let slot = &mut self.stamp[symbol as usize];
        if *slot != self.epoch {
            *slot = self.epoch;
            self.seen += 1;
            if self.seen == self.q {
                self.epoch += 1;
                self.seen = 0;
                return true;
            }
        }
        false
    }
}

pub fn decompose(w: &Word) -> UniversalDecomposition {
    let alphabet = w.alphabet();
    let mut scanner = BlockScanner::new(alphabet.size());
    let mut blocks = Vec::new();
    let mut start = 0;
    for (i, &s) in w.symbols().iter().enumerate() {
        if scanner.push(s) {
            blocks.push(Word::from_trusted(
                alphabet,
                w.symbols()[start..=i].to_vec(),
            ));
            start = i + 1;
        }
    }
    let tail = Word::from_trusted(alphabet, w.symbols()[start..].to_vec());
    UniversalDecomposition { blocks, tail }
}

/// `nu(w)`, counted in a single pass without materializing blocks.
pub fn universality_index(w: &Word) -> usize {
    universality_index_of(w.alphabet().size(), w.symbols())
}

pub(crate) fn universality_index_of(q: u32, symbols: &[u32]) -> usize {
    let mut scanner = BlockScanner::new(q);
    symbols.iter().filter(|&&s| scanner.push(s)).count()
}

pub fn is_k_universal(w: &Word, k: usize) -> Result<bool> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    Ok(universality_index(w) >= k)
}

pub fn contains_subword(w: &Word, u: &Word) -> Result<bool> {
    same_alphabet(w, u)?;
    Ok(is_subsequence(w.symbols(), u.symbols()))
}

pub(crate) fn is_subsequence(haystack: &[u32], needle: &[u32]) -> bool {
    let mut it = haystack.iter();
    needle.iter().all(|s| it.any(|h| h == s))
}

/// Leftmost-greedy embedding of `u` into `w`, as 1-based positions.
pub fn find_embedding(w: &Word, u: &Word) -> Result<Option<Vec<usize>>> {
    same_alphabet(w, u)?;
    let mut positions = Vec::with_capacity(u.len());
    let mut next = 0;
    for &s in u.symbols() {
        match w.symbols()[next..].iter().position(|&h| h == s) {
            Some(offset) => {
                next += offset + 1;
                positions.push(next);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(positions))
}

/// A word of length `nu(w) + 1 <= k` that `w` does not contain: the last
/// symbol of every block followed by the smallest symbol absent from the tail.
pub fn non_contained_witness(w: &Word, k: usize) -> Result<Word> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let decomposition = decompose(w);
    let nu = decomposition.index();
    if nu >= k {
        return Err(Error::AlreadyUniversal { nu, k });
    }
    let alphabet = w.alphabet();
    let mut symbols: Vec<u32> = decomposition
        .blocks
        .iter()
        .map(|b| *b.symbols().last().expect("blocks are non-empty"))
        .collect();
    let mut present = vec![false; alphabet.size() as usize + 1];
    for &s in decomposition.tail.symbols() {
        present[s as usize] = true;
    }
    let missing = (1..=alphabet.size())
        .find(|&s| !present[s as usize])
        .expect("tail misses at least one symbol");
    symbols.push(missing);
    Ok(Word::from_trusted(alphabet, symbols))
}

/// `(1 2 ... q)^k`, the shortest k-universal word.
pub fn minimal_universal_word(alphabet: Alphabet, k: usize) -> Word {
    let q = alphabet.size();
    let symbols = (0..k).flat_map(|_| 1..=q).collect();
    Word::from_trusted(alphabet, symbols)
}

/// `q^k` if it does not exceed the enumeration limit.
pub(crate) fn enumeration_size(q: u32, k: usize) -> Result<u64> {
    let mut total: u64 = 1;
    for _ in 0..k {
        total = total
            .checked_mul(u64::from(q))
            .filter(|&t| t <= ENUMERATION_LIMIT)
            .ok_or_else(|| {
                Error::InstanceTooLarge(format!(
                    "{q}^{k} targets exceed the limit of {ENUMERATION_LIMIT}"
                ))
            })?;
    }
    Ok(total)
}

/// All words of length `k` over `[q]` in lexicographic order.
pub struct AllWords {
    alphabet: Alphabet,
    current: Option<Vec<u32>>,
}

impl AllWords {
    pub fn new(alphabet: Alphabet, k: usize) -> Self {
        AllWords {
            alphabet,
            current: Some(vec![1; k]),
        }
    }
}

impl Iterator for AllWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let current = self.current.as_mut()?;
        let out = Word::from_trusted(self.alphabet, current.clone());
        let q = self.alphabet.size();
        let mut advanced = false;
        for slot in current.iter_mut().rev() {
            if *slot < q {
                *slot += 1;
                advanced = true;
                break;
            }
            *slot = 1;
        }
        if !advanced {
            self.current = None;
        }
        Some(out)
    }
}

/// Checks k-universality directly from the definition: every one of the
/// `q^k` words of length `k` must be a subsequence.
pub fn brute_force_is_k_universal(w: &Word, k: usize) -> Result<bool> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    enumeration_size(w.alphabet().size(), k)?;
    Ok(AllWords::new(w.alphabet(), k).all(|u| is_subsequence(w.symbols(), u.symbols())))
}

/// Number of strictly increasing index sequences embedding `u` into `w`.
pub fn count_subword_occurrences(w: &Word, u: &Word) -> Result<BigUint> {
    same_alphabet(w, u)?;
    let pattern = u.symbols();
    // ways[j] = embeddings of pattern[..j] into the prefix scanned so far
    let mut ways = vec![BigUint::zero(); pattern.len() + 1];
    ways[0] = BigUint::one();
    for &s in w.symbols() {
        for j in (0..pattern.len()).rev() {
            if pattern[j] == s && !ways[j].is_zero() {
                let add = ways[j].clone();
                ways[j + 1] += add;
            }
        }
    }
    Ok(ways.pop().expect("at least one entry"))
}

/// First word of length `k` (lexicographically) with at least two
/// occurrences in `w`, together with its occurrence count.
pub fn find_repeated_subword(w: &Word, k: usize) -> Result<(Word, BigUint)> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    enumeration_size(w.alphabet().size(), k)?;
    let two = BigUint::from(2u32);
    for u in AllWords::new(w.alphabet(), k) {
        let count = count_subword_occurrences(w, &u)?;
        if count >= two {
            return Ok((u, count));
        }
    }
    Err(Error::NoRepeatFound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(q: u32, s: &str) -> Word {
        Word::parse(Alphabet::new(q).unwrap(), s).unwrap()
    }

    fn texts(d: &UniversalDecomposition) -> (Vec<String>, String) {
        (
            d.blocks.iter().map(|b| b.to_string()).collect(),
            d.tail.to_string(),
        )
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(&w(2, "1122"));
        assert_eq!(texts(&d), (vec!["112".into()], "2".into()));
        assert_eq!(d.index(), 1);

        let d = decompose(&w(2, "112212"));
        assert_eq!(texts(&d), (vec!["112".into(), "21".into()], "2".into()));

        let d = decompose(&w(3, ""));
        assert_eq!(d.index(), 0);
        assert!(d.tail.is_empty());

        let d = decompose(&w(2, "1212"));
        assert_eq!(texts(&d), (vec!["12".into(), "12".into()], "".into()));
    }

    #[test]
    fn index_examples() {
        assert_eq!(universality_index(&w(2, "121212")), 3);
        assert_eq!(universality_index(&w(2, "111111")), 0);
        assert_eq!(universality_index(&w(2, "1122")), 1);
        assert_eq!(universality_index(&w(1, "1111")), 4);
    }

    #[test]
    fn k_universal_examples() {
        assert!(is_k_universal(&w(2, "1212"), 2).unwrap());
        assert!(!is_k_universal(&w(2, "1212"), 3).unwrap());
        assert!(is_k_universal(&w(2, "112212"), 2).unwrap());
        assert_eq!(is_k_universal(&w(2, "12"), 0), Err(Error::ZeroK));
    }

    #[test]
    fn containment_examples() {
        assert!(!contains_subword(&w(2, "1122"), &w(2, "21")).unwrap());
        assert!(contains_subword(&w(2, "1122"), &w(2, "12")).unwrap());
        assert!(contains_subword(&w(2, "1"), &w(2, "")).unwrap());
        assert!(contains_subword(&w(2, "12"), &w(3, "1")).is_err());
    }

    #[test]
    fn embedding_examples() {
        assert_eq!(
            find_embedding(&w(2, "112212"), &w(2, "22")).unwrap(),
            Some(vec![3, 4])
        );
        assert_eq!(find_embedding(&w(2, "12"), &w(2, "21")).unwrap(), None);
        assert_eq!(
            find_embedding(&w(1, "11"), &w(1, "1")).unwrap(),
            Some(vec![1])
        );
    }

    #[test]
    fn witness_examples() {
        assert_eq!(
            non_contained_witness(&w(2, "1122"), 2).unwrap().to_string(),
            "21"
        );
        assert_eq!(
            non_contained_witness(&w(2, ""), 1).unwrap().to_string(),
            "1"
        );
        let witness = non_contained_witness(&w(2, "1212"), 3).unwrap();
        assert_eq!(witness.to_string(), "221");
        assert!(!contains_subword(&w(2, "1212"), &witness).unwrap());
        assert!(matches!(
            non_contained_witness(&w(2, "1212"), 2),
            Err(Error::AlreadyUniversal { nu: 2, k: 2 })
        ));
    }

    #[test]
    fn minimal_word_examples() {
        let a = |q| Alphabet::new(q).unwrap();
        assert_eq!(minimal_universal_word(a(2), 3).to_string(), "121212");
        assert_eq!(minimal_universal_word(a(1), 5).to_string(), "11111");
        assert_eq!(minimal_universal_word(a(3), 2).to_string(), "123123");
    }

    #[test]
    fn brute_force_examples() {
        assert!(brute_force_is_k_universal(&w(2, "121212"), 3).unwrap());
        assert!(!brute_force_is_k_universal(&w(2, "12121"), 3).unwrap());
        assert!(brute_force_is_k_universal(&w(2, "112212"), 2).unwrap());
        assert!(matches!(
            brute_force_is_k_universal(&w(2, "12"), 24),
            Err(Error::InstanceTooLarge(_))
        ));
    }

    #[test]
    fn count_examples() {
        let c = |a: &str, b: &str| count_subword_occurrences(&w(2, a), &w(2, b)).unwrap();
        assert_eq!(c("112", "12"), BigUint::from(2u32));
        assert_eq!(c("1212", "12"), BigUint::from(3u32));
        assert_eq!(c("1212", ""), BigUint::one());
        assert_eq!(c("", "1"), BigUint::zero());
    }

    #[test]
    fn count_grows_beyond_u64() {
        // C(200, 100) embeddings of 1^100 into 1^200.
        let a = Alphabet::new(1).unwrap();
        let big = count_subword_occurrences(
            &minimal_universal_word(a, 200),
            &minimal_universal_word(a, 100),
        )
        .unwrap();
        assert_eq!(
            big.to_string(),
            "90548514656103281165404177077484163874504589675413336841320"
        );
    }

    #[test]
    fn repeat_examples() {
        let (u, count) = find_repeated_subword(&w(2, "1212"), 2).unwrap();
        assert_eq!(
            (u.to_string(), count),
            ("12".to_string(), BigUint::from(3u32))
        );
        let (u, count) = find_repeated_subword(&w(2, "121212"), 3).unwrap();
        assert!(count >= BigUint::from(2u32));
        assert_eq!(
            count,
            count_subword_occurrences(&w(2, "121212"), &u).unwrap()
        );
        let (u, count) = find_repeated_subword(&w(1, "11"), 1).unwrap();
        assert_eq!(
            (u.to_string(), count),
            ("1".to_string(), BigUint::from(2u32))
        );
        assert_eq!(
            find_repeated_subword(&w(2, "12"), 2),
            Err(Error::NoRepeatFound)
        );
    }

    #[test]
    fn text_format() {
        let a = Alphabet::new(12).unwrap();
        let word = Word::parse(a, "1,12,3").unwrap();
        assert_eq!(word.symbols(), &[1, 12, 3]);
        assert_eq!(word.to_string(), "1,12,3");
        assert!(Word::parse(a, "1,13").is_err());
        assert!(Word::parse(Alphabet::new(2).unwrap(), "123").is_err());
        assert!(Word::parse(Alphabet::new(2).unwrap(), "1x").is_err());
        assert!(Alphabet::new(0).is_err());
    }

    #[test]
    fn all_words_enumerates_q_pow_k() {
        let a = Alphabet::new(3).unwrap();
        let all: Vec<_> = AllWords::new(a, 2).map(|w| w.to_string()).collect();
        assert_eq!(all.len(), 9);
        assert_eq!(all.first().unwrap(), "11");
        assert_eq!(all.last().unwrap(), "33");
        assert_eq!(AllWords::new(a, 0).count(), 1);
    }
}
