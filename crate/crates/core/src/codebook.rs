//! Permutation codewords, multiweight codeword matrices and codebooks.
//!
//! A codeword of length L is a permutation of `1..=L`; symbol `c[i]` names the
//! column (time slot) holding the single 1 of row i (LED i). A weight-w
//! codeword matrix is the sum of w codewords that differ in every position, so
//! each row and column carries exactly w ones.
//!
//! Codebooks are kept in canonical order: ascending weight, then lexicographic
//! by the (sorted) component tuple. Labels are assigned in that order, with the
//! intensity level varying fastest.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::Mat;

/// Largest L for which exhaustive construction is attempted.
pub const MAX_ENUMERATION_LEN: usize = 6;

/// Largest L accepted by [`count_distance_l`].
pub const MAX_COUNT_LEN: usize = 20;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Codeword(Vec<u8>);

impl Codeword {
    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        let len = symbols.len();
        let mut seen = vec![false; len + 1];
        let ok = len > 0
            && symbols.iter().all(|&s| {
                let s = s as usize;
                (1..=len).contains(&s) && !std::mem::replace(&mut seen[s], true)
            });
        if ok {
            Ok(Self(symbols))
        } else {
            Err(Error::NotAPermutation { len, symbols })
        }
    }

    pub fn identity(len: usize) -> Self {
        Self((1..=len as u8).collect())
    }

    /// Builds a codeword from 0-based column indices.
    pub fn from_columns(cols: &[usize]) -> Result<Self> {
        Self::new(cols.iter().map(|&c| (c + 1) as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    /// 0-based column of the active element in row `i`.
    pub fn column(&self, i: usize) -> usize {
        self.0[i] as usize - 1
    }

    pub fn columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&s| s as usize - 1)
    }

    pub fn to_matrix(&self) -> CodewordMatrix {
        codeword_to_matrix(self)
    }

    /// Left cyclic shift by `k` positions.
    pub fn rotate(&self, k: usize) -> Self {
        let mut s = self.0.clone();
        if !s.is_empty() {
            let k = k % s.len();
            s.rotate_left(k);
        }
        Self(s)
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            write!(f, "{}", symbol_char(s))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Codeword({self})")
    }
}

fn symbol_char(s: u8) -> char {
    char::from_digit(s as u32, 36).unwrap_or('?')
}

impl FromStr for Codeword {
    type Err = Error;

    /// Parses a digit string such as `2314` (symbols above 9 use `a`, `b`, ...).
    fn from_str(s: &str) -> Result<Self> {
        let symbols = s
            .trim()
            .chars()
            .map(|ch| ch.to_digit(36).map(|d| d as u8))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::NotAPermutation { len: s.len(), symbols: vec![] })?;
        Self::new(symbols)
    }
}

/// Number of positions where two codewords differ.
pub fn hamming_distance(a: &Codeword, b: &Codeword) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), got: b.len() });
    }
    Ok(a.0.iter().zip(&b.0).filter(|(x, y)| x != y).count())
}

/// Number of permutations at Hamming distance L from a fixed one, i.e. the
/// derangement number `L! * sum_k (-1)^k / k!`, evaluated in exact integers.
pub fn count_distance_l(len: usize) -> Result<u128> {
    if !(2..=MAX_COUNT_LEN).contains(&len) {
        return Err(Error::LengthGuard { len, max: MAX_COUNT_LEN });
    }
    // L!/k! for k = L, L-1, ..., 0 accumulated as a running product.
    let mut total: i128 = 0;
    let mut ratio: i128 = 1;
    for k in (0..=len).rev() {
        let term = if k % 2 == 0 { ratio } else { -ratio };
        total += term;
        ratio *= k as i128;
    }
    Ok(total as u128)
}

/// The L cyclic shifts of `c0`; rows of the result form a Latin square.
pub fn cyclic_latin_codebook(c0: &Codeword) -> Vec<Codeword> {
    (0..c0.len()).map(|k| c0.rotate(k)).collect()
}

/// A {0,1} L x L matrix with w ones per row and column, together with the
/// w component codewords it decomposes into.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CodewordMatrix {
    len: usize,
    weight: usize,
    components: Vec<Codeword>,
    entries: Vec<u8>,
}

impl CodewordMatrix {
    /// Sums pairwise distance-L components. The stored components are the
    /// lexicographically smallest decomposition of the resulting matrix.
    pub fn from_components(mut components: Vec<Codeword>) -> Result<Self> {
        let first = components.first().ok_or(Error::EmptyCodebook)?;
        let len = first.len();
        if components.len() >= len.max(2) {
            return Err(Error::WeightOutOfRange {
                weight: components.len(),
                len,
                max: len.saturating_sub(1).max(1),
            });
        }
        for c in &components {
            if c.len() != len {
                return Err(Error::LengthMismatch { expected: len, got: c.len() });
            }
        }
        for (i, a) in components.iter().enumerate() {
            for b in &components[i + 1..] {
                if hamming_distance(a, b)? != len {
                    return Err(Error::ComponentsOverlap { a: a.to_string(), b: b.to_string() });
                }
            }
        }
        let mut entries = vec![0u8; len * len];
        for c in &components {
            for (i, j) in c.columns().enumerate() {
                entries[i * len + j] += 1;
            }
        }
        let weight = components.len();
        if weight > 1 {
            components = smallest_decomposition(len, &entries);
        }
        Ok(Self { len, weight, components, entries })
    }

    /// Rebuilds a matrix from its 0/1 entries (row-major), recovering the
    /// lexicographically smallest decomposition into permutations.
    pub fn from_entries(len: usize, entries: Vec<u8>) -> Result<Self> {
        if entries.len() != len * len {
            return Err(Error::LengthMismatch { expected: len * len, got: entries.len() });
        }
        if entries.iter().any(|&v| v > 1) {
            return Err(Error::Shape("entries must be 0 or 1".into()));
        }
        let weight = entries[..len].iter().map(|&v| v as usize).sum::<usize>();
        let regular = (0..len).all(|i| {
            let row: usize = (0..len).map(|j| entries[i * len + j] as usize).sum();
            let col: usize = (0..len).map(|j| entries[j * len + i] as usize).sum();
            row == weight && col == weight
        });
        if !regular {
            return Err(Error::Shape("row and column sums are not all equal".into()));
        }
        if weight == 0 || weight >= len.max(2) {
            return Err(Error::WeightOutOfRange { weight, len, max: len.saturating_sub(1).max(1) });
        }
        let components = smallest_decomposition(len, &entries);
        Ok(Self { len, weight, components, entries })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn components(&self) -> &[Codeword] {
        &self.components
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.len + j]
    }

    /// Active (row, column) positions in row-major order.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let len = self.len;
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(move |(k, _)| (k / len, k % len))
    }

    pub fn to_mat(&self) -> Mat {
        let data = self.entries.iter().map(|&v| v as f64).collect();
        Mat::from_vec(self.len, self.len, data).expect("square by construction")
    }

    fn canonical_key(&self) -> (usize, &[Codeword]) {
        (self.weight, &self.components)
    }
}

impl fmt::Display for CodewordMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("+"))
    }
}

impl fmt::Debug for CodewordMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CodewordMatrix(w={}, {self})", self.weight)
    }
}

impl FromStr for CodewordMatrix {
    type Err = Error;

    /// Parses `2314+3142` (or a single codeword).
    fn from_str(s: &str) -> Result<Self> {
        let comps = s.split('+').map(str::parse).collect::<Result<Vec<Codeword>>>()?;
        Self::from_components(comps)
    }
}

/// Weight-1 matrix of a codeword: row i has its single 1 at column c_i.
pub fn codeword_to_matrix(c: &Codeword) -> CodewordMatrix {
    CodewordMatrix::from_components(vec![c.clone()]).expect("a single codeword is always valid")
}

/// Greedy lexicographically smallest decomposition. After removing any perfect
/// matching from a regular bipartite graph the rest stays regular, so the
/// smallest matching of the remainder is always the next component.
fn smallest_decomposition(len: usize, entries: &[u8]) -> Vec<Codeword> {
    let mut rest: Vec<bool> = entries.iter().map(|&v| v != 0).collect();
    let weight = rest[..len].iter().filter(|&&b| b).count();
    let mut out = Vec::with_capacity(weight);
    for _ in 0..weight {
        let cols = smallest_matching(len, &rest).expect("regular bipartite graphs have perfect matchings");
        for (i, &j) in cols.iter().enumerate() {
            rest[i * len + j] = false;
        }
        out.push(Codeword::from_columns(&cols).expect("matching is a permutation"));
    }
    out
}

fn smallest_matching(len: usize, support: &[bool]) -> Option<Vec<usize>> {
    fn go(row: usize, len: usize, support: &[bool], used: &mut [bool], cols: &mut Vec<usize>) -> bool {
        if row == len {
            return true;
        }
        for j in 0..len {
            if support[row * len + j] && !used[j] {
                used[j] = true;
                cols.push(j);
                if go(row + 1, len, support, used, cols) {
                    return true;
                }
                cols.pop();
                used[j] = false;
            }
        }
        false
    }
    let mut used = vec![false; len];
    let mut cols = Vec::with_capacity(len);
    go(0, len, support, &mut used, &mut cols).then_some(cols)
}

/// An ordered, duplicate-free set of codeword matrices sharing one L.
#[derive(Clone, PartialEq, Eq)]
pub struct Codebook {
    len: usize,
    entries: Vec<CodewordMatrix>,
}

impl Codebook {
    /// Builds a codebook; entries are put in canonical order and duplicates
    /// (equal matrices) rejected.
    pub fn new(mut entries: Vec<CodewordMatrix>) -> Result<Self> {
        let len = entries.first().ok_or(Error::EmptyCodebook)?.len();
        if let Some(bad) = entries.iter().find(|e| e.len() != len) {
            return Err(Error::LengthMismatch { expected: len, got: bad.len() });
        }
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.entries.clone()) {
                return Err(Error::DuplicateEntry(e.to_string()));
            }
        }
        entries.sort_by(|a, b| a.canonical_key().cmp(&b.canonical_key()));
        Ok(Self { len, entries })
    }

    /// Convenience constructor from strings like `"1234"` or `"1234+2143"`.
    pub fn from_strs<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        let entries = items.iter().map(|s| s.as_ref().parse()).collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Number of entries Q.
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CodewordMatrix] {
        &self.entries
    }

    pub fn entry(&self, q: usize) -> &CodewordMatrix {
        &self.entries[q]
    }

    pub fn weights_present(&self) -> Vec<usize> {
        let mut w: Vec<usize> = self.entries.iter().map(CodewordMatrix::weight).collect();
        w.dedup();
        w
    }

    pub fn is_multiweight(&self) -> bool {
        self.weights_present().len() > 1
    }

    /// Index of the entry equal to `m`, if any.
    pub fn position(&self, m: &CodewordMatrix) -> Option<usize> {
        self.entries.iter().position(|e| e.entries == m.entries)
    }

    /// Entries of one weight class, keeping their canonical order.
    pub fn with_weight(&self, weight: usize) -> Option<Codebook> {
        let entries: Vec<_> = self.entries.iter().filter(|e| e.weight == weight).cloned().collect();
        (!entries.is_empty()).then_some(Codebook { len: self.len, entries })
    }

    /// The first `n` entries in canonical order.
    pub fn take_first(&self, n: usize) -> Codebook {
        Codebook { len: self.len, entries: self.entries.iter().take(n).cloned().collect() }
    }

    /// `floor(log2(Q * levels))`.
    pub fn bits_per_block(&self, levels: usize) -> u32 {
        let points = (self.entries.len() * levels.max(1)) as u64;
        63 - points.leading_zeros()
    }

    /// Number of (entry, level) pairs used for signaling: `2^bits_per_block`.
    pub fn signaling_points(&self, levels: usize) -> u64 {
        1u64 << self.bits_per_block(levels)
    }

    /// Maps a label in `0..signaling_points` to `(q, level)`, `q` 0-based and
    /// `level` in `1..=levels`.
    pub fn label_to_entry(&self, label: u64, levels: usize) -> Result<(usize, usize)> {
        let count = self.signaling_points(levels);
        if label >= count {
            return Err(Error::LabelOutOfRange { label, count });
        }
        let levels = levels.max(1) as u64;
        Ok(((label / levels) as usize, (label % levels) as usize + 1))
    }

    pub fn entry_to_label(&self, q: usize, level: usize, levels: usize) -> Result<u64> {
        if level == 0 || level > levels.max(1) {
            return Err(Error::LevelOutOfRange { level, levels });
        }
        let label = (q * levels.max(1) + level - 1) as u64;
        let count = self.signaling_points(levels);
        if label >= count {
            return Err(Error::LabelOutOfRange { label, count });
        }
        Ok(label)
    }

    /// Maps an MSB-first bit block to `(q, level)`.
    pub fn bits_to_entry(&self, bits: &[u8], levels: usize) -> Result<(usize, usize)> {
        let expected = self.bits_per_block(levels) as usize;
        if bits.len() != expected {
            return Err(Error::LengthMismatch { expected, got: bits.len() });
        }
        self.label_to_entry(bits_to_label(bits), levels)
    }

    pub fn entry_to_bits(&self, q: usize, level: usize, levels: usize) -> Result<Vec<u8>> {
        let label = self.entry_to_label(q, level, levels)?;
        Ok(label_to_bits(label, self.bits_per_block(levels)))
    }

    /// Whether entry `q` is reachable by some signaling label.
    pub fn is_signaling_entry(&self, q: usize, levels: usize) -> bool {
        (q * levels.max(1)) < self.signaling_points(levels) as usize
    }

    /// Levels usable with entry `q` under the power-of-two truncation.
    pub fn signaling_levels(&self, q: usize, levels: usize) -> usize {
        let m = levels.max(1);
        let points = self.signaling_points(levels) as usize;
        points.saturating_sub(q * m).min(m)
    }

    /// Plain-text export: one line per entry, `weight comp1 comp2 ...`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            s.push_str(&e.weight.to_string());
            for c in &e.components {
                s.push(' ');
                s.push_str(&c.to_string());
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let weight: usize = fields
                .next()
                .and_then(|w| w.parse().ok())
                .ok_or_else(|| Error::Scenario(format!("bad weight field in line `{line}`")))?;
            let comps = fields.map(str::parse).collect::<Result<Vec<Codeword>>>()?;
            if comps.len() != weight {
                return Err(Error::Scenario(format!(
                    "line `{line}` lists {} components for weight {weight}",
                    comps.len()
                )));
            }
            entries.push(CodewordMatrix::from_components(comps)?);
        }
        Self::new(entries)
    }
}

impl fmt::Debug for Codebook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Codebook")
            .field("len", &self.len)
            .field("size", &self.entries.len())
            .field("weights", &self.weights_present())
            .finish()
    }
}

pub fn bits_to_label(bits: &[u8]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b & 1))
}

pub fn label_to_bits(label: u64, nbits: u32) -> Vec<u8> {
    (0..nbits).rev().map(|k| ((label >> k) & 1) as u8).collect()
}

/// All permutations of `1..=len` in lexicographic order.
pub fn all_permutations(len: usize) -> Vec<Codeword> {
    let mut cur: Vec<u8> = (1..=len as u8).collect();
    let mut out = vec![Codeword(cur.clone())];
    while next_permutation(&mut cur) {
        out.push(Codeword(cur.clone()));
    }
    out
}

fn next_permutation(v: &mut [u8]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Every distinct weight-w codeword matrix of size L.
///
/// Each {0,1} matrix with all row and column sums equal to w is a sum of w
/// pairwise distance-L permutations, so the search walks those matrices
/// directly and stores each with its smallest decomposition.
pub fn enumerate_weight_w(len: usize, weight: usize) -> Result<Codebook> {
    if len > MAX_ENUMERATION_LEN {
        return Err(Error::LengthGuard { len, max: MAX_ENUMERATION_LEN });
    }
    if len < 2 || weight == 0 || weight >= len {
        return Err(Error::WeightOutOfRange { weight, len, max: len.saturating_sub(1) });
    }
    let row_patterns: Vec<Vec<usize>> = (0u32..(1 << len))
        .filter(|m| m.count_ones() as usize == weight)
        .map(|m| (0..len).filter(|&j| m & (1 << j) != 0).collect())
        .collect();

    let mut found = Vec::new();
    let mut grid = vec![0u8; len * len];
    let mut col_counts = vec![0usize; len];
    fill_rows(0, len, weight, &row_patterns, &mut grid, &mut col_counts, &mut found);

    let entries = found
        .into_iter()
        .map(|g| CodewordMatrix::from_entries(len, g))
        .collect::<Result<Vec<_>>>()?;
    Codebook::new(entries)
}

fn fill_rows(
    row: usize,
    len: usize,
    weight: usize,
    patterns: &[Vec<usize>],
    grid: &mut [u8],
    col_counts: &mut [usize],
    out: &mut Vec<Vec<u8>>,
) {
    if row == len {
        out.push(grid.to_vec());
        return;
    }
    let rows_left = len - row;
    for p in patterns {
        if p.iter().any(|&j| col_counts[j] >= weight) {
            continue;
        }
        for &j in p {
            col_counts[j] += 1;
            grid[row * len + j] = 1;
        }
        // every column must still be able to reach `weight`
        let feasible = col_counts.iter().all(|&c| weight - c < rows_left);
        if feasible {
            fill_rows(row + 1, len, weight, patterns, grid, col_counts, out);
        }
        for &j in p {
            col_counts[j] -= 1;
            grid[row * len + j] = 0;
        }
    }
}

/// Ordered union of codebooks with a common L.
pub fn combine_codebooks(parts: &[Codebook]) -> Result<Codebook> {
    let len = parts.first().ok_or(Error::EmptyCodebook)?.len;
    if let Some(bad) = parts.iter().find(|p| p.len != len) {
        return Err(Error::LengthMismatch { expected: len, got: bad.len });
    }
    Codebook::new(parts.iter().flat_map(|p| p.entries.iter().cloned()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cw(s: &str) -> Codeword {
        s.parse().unwrap()
    }

    #[test]
    fn identity_codeword_gives_identity_matrix() {
        let m = cw("1234").to_matrix();
        assert_eq!(m.to_mat(), Mat::identity(4));
        assert_eq!(m.weight(), 1);
    }

    #[test]
    fn codeword_matrix_rows_unrolled() {
        let m = cw("2314").to_matrix();
        let cols: Vec<usize> = (0..4).map(|i| (0..4).find(|&j| m.get(i, j) == 1).unwrap()).collect();
        assert_eq!(cols, vec![1, 2, 0, 3]);
    }

    #[test]
    fn concatenated_example_matrix() {
        let m: CodewordMatrix = "2314+3142".parse().unwrap();
        assert_eq!(&m.entries()[..4], &[0, 1, 1, 0]);
        assert_eq!(m.weight(), 2);
        // row i holds ones at columns c_i, so the column-wise reading of the
        // same pair is the transpose
        let by_columns = [0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0, 0, 0, 0, 1, 1];
        let t = m.to_mat().transpose();
        let t: Vec<u8> = t.as_slice().iter().map(|&v| v as u8).collect();
        assert_eq!(t, by_columns);
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(Codeword::new(vec![1, 1, 2]).is_err());
        assert!(Codeword::new(vec![0, 1, 2]).is_err());
        assert!(Codeword::new(vec![1, 2, 4]).is_err());
        assert!(Codeword::new(vec![]).is_err());
        assert!("12a".parse::<Codeword>().is_err());
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distance(&cw("1234"), &cw("1234")).unwrap(), 0);
        assert_eq!(hamming_distance(&cw("1234"), &cw("2341")).unwrap(), 4);
        assert_eq!(hamming_distance(&cw("2314"), &cw("3142")).unwrap(), 4);
        assert!(matches!(
            hamming_distance(&cw("123"), &cw("1234")),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn derangement_small_values() {
        assert_eq!(count_distance_l(2).unwrap(), 1);
        assert_eq!(count_distance_l(3).unwrap(), 2);
        assert_eq!(count_distance_l(4).unwrap(), 9);
        assert_eq!(count_distance_l(12).unwrap(), 176_214_841);
        assert!(count_distance_l(1).is_err());
    }

    #[test]
    fn cyclic_shift_example() {
        let shifts = cyclic_latin_codebook(&cw("2314"));
        assert_eq!(shifts[1], cw("3142"));
        assert_eq!(cyclic_latin_codebook(&cw("12")), vec![cw("12"), cw("21")]);
        for (i, a) in shifts.iter().enumerate() {
            for b in &shifts[i + 1..] {
                assert_eq!(hamming_distance(a, b).unwrap(), 4);
            }
        }
    }

    #[test]
    fn overlapping_components_rejected() {
        let err = "1234+1243".parse::<CodewordMatrix>().unwrap_err();
        assert!(matches!(err, Error::ComponentsOverlap { .. }));
    }

    #[test]
    fn weight_counts_for_four() {
        assert_eq!(enumerate_weight_w(4, 1).unwrap().size(), 24);
        assert_eq!(enumerate_weight_w(4, 2).unwrap().size(), 90);
        assert_eq!(enumerate_weight_w(4, 3).unwrap().size(), 24);
        assert!(enumerate_weight_w(4, 4).is_err());
        assert!(enumerate_weight_w(4, 0).is_err());
        assert!(matches!(enumerate_weight_w(7, 1), Err(Error::LengthGuard { .. })));
    }

    #[test]
    fn combined_codebook_sizes() {
        let w1 = enumerate_weight_w(4, 1).unwrap();
        let w2 = enumerate_weight_w(4, 2).unwrap();
        let w3 = enumerate_weight_w(4, 3).unwrap();
        let cb = combine_codebooks(&[w1.clone(), w2.take_first(8)]).unwrap();
        assert_eq!(cb.size(), 32);
        assert_eq!(cb.bits_per_block(1), 5);
        assert_eq!(cb.bits_per_block(2), 6);
        let all = combine_codebooks(&[w1.clone(), w2, w3]).unwrap();
        assert_eq!(all.size(), 138);
        assert_eq!(all.bits_per_block(1), 7);
        assert_eq!(combine_codebooks(std::slice::from_ref(&w1)).unwrap(), w1);
        let short = enumerate_weight_w(3, 1).unwrap();
        assert!(combine_codebooks(&[w1, short]).is_err());
    }

    #[test]
    fn canonical_order_starts_like_the_mapping_table() {
        let w1 = enumerate_weight_w(4, 1).unwrap();
        assert_eq!(w1.entry(0).to_string(), "1234");
        assert_eq!(w1.entry(1).to_string(), "1243");
        let w2 = enumerate_weight_w(4, 2).unwrap();
        assert_eq!(w2.entry(0).to_string(), "1234+2143");
    }

    #[test]
    fn smallest_decomposition_is_stored() {
        let m: CodewordMatrix = "3142+2314".parse().unwrap();
        assert_eq!(m.to_string(), "2314+3142");
        let alt: CodewordMatrix = "2134+1243".parse().unwrap();
        assert_eq!(alt.to_string(), "1234+2143");
        let rebuilt = CodewordMatrix::from_entries(4, alt.entries().to_vec()).unwrap();
        assert_eq!(rebuilt, alt);
    }

    #[test]
    fn first_bits_map_to_first_entry() {
        let cb = enumerate_weight_w(4, 1).unwrap();
        assert_eq!(cb.bits_to_entry(&[0, 0, 0, 0], 1).unwrap(), (0, 1));
        assert!(cb.bits_to_entry(&[0, 0, 0], 1).is_err());
        assert!(cb.entry_to_bits(17, 1, 1).is_err());
        assert_eq!(cb.signaling_levels(7, 3), 3);
    }

    #[test]
    fn text_roundtrip() {
        let cb = Codebook::from_strs(&["1234", "2143+1234", "3412"]).unwrap();
        let text = cb.to_text();
        assert_eq!(text, "1 1234\n1 3412\n2 1234 2143\n");
        assert_eq!(Codebook::from_text(&text).unwrap(), cb);
        assert!(Codebook::from_text("2 1234\n").is_err());
    }

    #[test]
    fn duplicates_rejected() {
        let err = Codebook::from_strs(&["1234+2143", "1243+2134"]).unwrap_err();
        assert!(matches!(err, Error::DuplicateEntry(_)));
    }
}
