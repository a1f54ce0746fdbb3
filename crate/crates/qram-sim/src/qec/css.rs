//! CSS code tooling: parity-check validation, codestate expansion, and
//! per-position excitation balance.
//!
//! Codewords and check rows are bit vectors over at most 64 positions,
//! stored LSB-first (bit i of the word is position i).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CssError {
    #[error("parity-check rows must have equal length ({0} vs {1})")]
    RowLength(usize, usize),
    #[error("codes over more than 64 positions are not supported (got {0})")]
    TooWide(usize),
    #[error("code must have at least one position")]
    Empty,
    #[error("X-check row {x_row} and Z-check row {z_row} are not orthogonal")]
    NotOrthogonal { x_row: usize, z_row: usize },
    #[error("{0:?} is not a Z-code codeword")]
    NotCodeword(u64),
    #[error("codestate expansion of 2^{0} terms exceeds the enumeration budget")]
    ExpansionBudget(usize),
    #[error("invalid parity-check character {0:?}")]
    BadChar(char),
    #[error("parity-check file must separate the X and Z blocks with a blank line")]
    MissingSeparator,
    #[error("unknown built-in code {0:?}")]
    UnknownCode(String),
}

pub type Result<T> = std::result::Result<T, CssError>;

const EXPANSION_BUDGET_BITS: usize = 20;

/// Rows of a binary matrix, all over `cols` positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMatrix {
    pub cols: usize,
    pub rows: Vec<u64>,
}

impl BinaryMatrix {
    pub fn new(cols: usize, rows: Vec<u64>) -> Result<Self> {
        if cols == 0 {
            return Err(CssError::Empty);
        }
        if cols > 64 {
            return Err(CssError::TooWide(cols));
        }
        let mask = ones(cols);
        if rows.iter().any(|&r| r & !mask != 0) {
            return Err(CssError::RowLength(cols, 65));
        }
        Ok(Self { cols, rows })
    }

    /// Parses rows of '0'/'1' characters; position 0 is the leftmost
    /// character.
    pub fn parse(lines: &[&str]) -> Result<Self> {
        let mut rows = Vec::new();
        let mut cols = None;
        for line in lines {
            let line = line.trim();
            let mut row = 0u64;
            let mut len = 0;
            for (i, ch) in line.chars().enumerate() {
                match ch {
                    '0' => len += 1,
                    '1' => {
                        row |= 1 << i;
                        len += 1;
                    }
                    c => return Err(CssError::BadChar(c)),
                }
            }
            match cols {
                None => cols = Some(len),
                Some(c) if c != len => return Err(CssError::RowLength(c, len)),
                _ => {}
            }
            rows.push(row);
        }
        BinaryMatrix::new(cols.ok_or(CssError::Empty)?, rows)
    }
}

fn ones(cols: usize) -> u64 {
    if cols == 64 {
        !0
    } else {
        (1u64 << cols) - 1
    }
}

fn parity(word: u64) -> u64 {
    (word.count_ones() & 1) as u64
}

/// Incremental GF(2) row basis in echelon form.
#[derive(Clone, Debug, Default)]
struct Gf2Basis {
    rows: Vec<u64>,
}

impl Gf2Basis {
    /// Reduces `v` against the basis; returns the residual.
    fn reduce(&self, mut v: u64) -> u64 {
        for &b in &self.rows {
            let pivot = 1u64 << (63 - b.leading_zeros());
            if v & pivot != 0 {
                v ^= b;
            }
        }
        v
    }

    /// Adds `v` if independent; returns whether the basis grew.
    fn insert(&mut self, v: u64) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        self.rows.push(r);
        self.rows.sort_by(|a, b| b.cmp(a));
        true
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    /// All 2^rank elements of the span, sorted.
    fn span(&self) -> Result<Vec<u64>> {
        if self.rank() > EXPANSION_BUDGET_BITS {
            return Err(CssError::ExpansionBudget(self.rank()));
        }
        let mut out = Vec::with_capacity(1 << self.rank());
        for combo in 0..1usize << self.rank() {
            let mut v = 0u64;
            for (i, &b) in self.rows.iter().enumerate() {
                if combo >> i & 1 == 1 {
                    v ^= b;
                }
            }
            out.push(v);
        }
        out.sort_unstable();
        Ok(out)
    }
}

/// Basis of the null space {v : every row of `m` is orthogonal to v}.
fn null_space(m: &BinaryMatrix) -> Vec<u64> {
    // Gaussian elimination on the rows, tracking pivot columns.
    let mut rows: Vec<u64> = m.rows.clone();
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..m.cols {
        let Some(pos) = (rank..rows.len()).find(|&r| rows[r] >> col & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pos);
        for r in 0..rows.len() {
            if r != rank && rows[r] >> col & 1 == 1 {
                rows[r] ^= rows[rank];
            }
        }
        pivots.push(col);
        rank += 1;
    }
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::with_capacity(free.len());
    for &f in &free {
        let mut v = 1u64 << f;
        for (i, &p) in pivots.iter().enumerate() {
            if rows[i] >> f & 1 == 1 {
                v |= 1 << p;
            }
        }
        basis.push(v);
    }
    basis
}

/// Validated CSS pair: every X-check row is orthogonal (mod 2) to every
/// Z-check row.
#[derive(Clone, Debug)]
pub struct CssCode {
    h_x: BinaryMatrix,
    h_z: BinaryMatrix,
    n_code: usize,
    k_x: usize,
    k_z: usize,
    /// Dependent input rows were dropped during validation.
    pub deduplicated: bool,
}

/// Checks mutual orthogonality and computes the classical code dimensions.
/// Rank-deficient inputs are reduced to independent rows with a warning
/// flag rather than rejected.
pub fn css_validate(h_x: BinaryMatrix, h_z: BinaryMatrix) -> Result<CssCode> {
    if h_x.cols != h_z.cols {
        return Err(CssError::RowLength(h_x.cols, h_z.cols));
    }
    let n_code = h_x.cols;
    for (xi, &xr) in h_x.rows.iter().enumerate() {
        for (zi, &zr) in h_z.rows.iter().enumerate() {
            if parity(xr & zr) != 0 {
                return Err(CssError::NotOrthogonal {
                    x_row: xi,
                    z_row: zi,
                });
            }
        }
    }
    let mut deduplicated = false;
    let reduce = |m: &BinaryMatrix, dedup: &mut bool| -> BinaryMatrix {
        let mut basis = Gf2Basis::default();
        let mut rows = Vec::new();
        for &r in &m.rows {
            if basis.insert(r) {
                rows.push(r);
            } else {
                *dedup = true;
            }
        }
        BinaryMatrix { cols: m.cols, rows }
    };
    let h_x = reduce(&h_x, &mut deduplicated);
    let h_z = reduce(&h_z, &mut deduplicated);
    let k_x = n_code - h_x.rows.len();
    let k_z = n_code - h_z.rows.len();
    Ok(CssCode {
        h_x,
        h_z,
        n_code,
        k_x,
        k_z,
        deduplicated,
    })
}

/// Expansion of one codestate: the orbit of a base codeword under the
/// X-stabilizer group, with uniform amplitude 1/√|terms|.
#[derive(Clone, Debug, PartialEq)]
pub struct CodestateExpansion {
    pub base: u64,
    pub terms: Vec<u64>,
    pub amplitude: f64,
}

/// Per-position excitation counts of one logical basis state.
#[derive(Clone, Debug)]
pub struct LogicalBalance {
    /// Representative Z-codeword of the coset.
    pub representative: u64,
    pub term_count: usize,
    /// For each position, the number of expansion terms with a 1 there.
    pub excitations: Vec<usize>,
}

/// Balance summary over all logical computational-basis states.
#[derive(Clone, Debug)]
pub struct BalanceReport {
    /// Positions touched by no X-check row; a phase error there is
    /// undetectable and the state carries a position-dependent excitation
    /// asymmetry.
    pub uncovered_positions: Vec<usize>,
    pub logicals: Vec<LogicalBalance>,
}

impl CssCode {
    pub fn n_code(&self) -> usize {
        self.n_code
    }

    pub fn k_x(&self) -> usize {
        self.k_x
    }

    pub fn k_z(&self) -> usize {
        self.k_z
    }

    /// Number of encoded qubits, k_x + k_z − n.
    pub fn logical_count(&self) -> usize {
        (self.k_x + self.k_z).saturating_sub(self.n_code)
    }

    pub fn h_x(&self) -> &BinaryMatrix {
        &self.h_x
    }

    pub fn h_z(&self) -> &BinaryMatrix {
        &self.h_z
    }

    fn x_row_basis(&self) -> Gf2Basis {
        let mut basis = Gf2Basis::default();
        for &r in &self.h_x.rows {
            basis.insert(r);
        }
        basis
    }

    pub fn is_z_codeword(&self, c: u64) -> bool {
        self.h_z.rows.iter().all(|&r| parity(r & c) == 0)
    }

    /// Expands the codestate for a Z-codeword `c`: terms are c ⊕ x over
    /// the row space of the X checks.
    pub fn codestate(&self, c: u64) -> Result<CodestateExpansion> {
        if c & !ones(self.n_code) != 0 || !self.is_z_codeword(c) {
            return Err(CssError::NotCodeword(c));
        }
        let span = self.x_row_basis().span()?;
        let mut terms: Vec<u64> = span.into_iter().map(|x| c ^ x).collect();
        terms.sort_unstable();
        let amplitude = 1.0 / (terms.len() as f64).sqrt();
        Ok(CodestateExpansion {
            base: c,
            terms,
            amplitude,
        })
    }

    /// One representative Z-codeword per logical computational-basis
    /// state (2^k cosets of the X-row space inside the Z code), starting
    /// with the zero coset.
    pub fn logical_representatives(&self) -> Result<Vec<u64>> {
        let mut span = self.x_row_basis();
        let mut generators = Vec::new();
        for v in null_space(&self.h_z) {
            if span.insert(v) {
                generators.push(v);
            }
        }
        if generators.len() > EXPANSION_BUDGET_BITS {
            return Err(CssError::ExpansionBudget(generators.len()));
        }
        let mut reps = Vec::with_capacity(1 << generators.len());
        for combo in 0..1usize << generators.len() {
            let mut c = 0u64;
            for (i, &g) in generators.iter().enumerate() {
                if combo >> i & 1 == 1 {
                    c ^= g;
                }
            }
            reps.push(c);
        }
        Ok(reps)
    }

    /// Brute-force excitation counts for every logical basis state.
    pub fn balance_report(&self) -> Result<BalanceReport> {
        let covered = self.h_x.rows.iter().fold(0u64, |acc, &r| acc | r);
        let uncovered_positions = (0..self.n_code)
            .filter(|&i| covered >> i & 1 == 0)
            .collect();
        let mut logicals = Vec::new();
        for rep in self.logical_representatives()? {
            let expansion = self.codestate(rep)?;
            let excitations = (0..self.n_code)
                .map(|pos| {
                    expansion
                        .terms
                        .iter()
                        .filter(|&&t| t >> pos & 1 == 1)
                        .count()
                })
                .collect();
            logicals.push(LogicalBalance {
                representative: rep,
                term_count: expansion.terms.len(),
                excitations,
            });
        }
        Ok(BalanceReport {
            uncovered_positions,
            logicals,
        })
    }
}

/// Length-d repetition code: no X checks, adjacent-pair Z parities.
pub fn repetition_code(d: usize) -> Result<CssCode> {
    let h_x = BinaryMatrix::new(d, vec![])?;
    let rows = (0..d.saturating_sub(1)).map(|i| 0b11u64 << i).collect();
    css_validate(h_x, BinaryMatrix::new(d, rows)?)
}

/// The 7-position code with identical X and Z checks (columns are the
/// binary numbers 1..7).
pub fn steane_code() -> CssCode {
    let rows = hamming_rows(3);
    let h = BinaryMatrix::new(7, rows).expect("static code");
    css_validate(h.clone(), h).expect("static code is a valid pair")
}

fn hamming_rows(bits: usize) -> Vec<u64> {
    let n = (1usize << bits) - 1;
    (0..bits)
        .map(|j| {
            let mut row = 0u64;
            for pos in 0..n {
                if (pos + 1) >> j & 1 == 1 {
                    row |= 1 << pos;
                }
            }
            row
        })
        .collect()
}

/// The 15-position Reed–Muller code: X checks are the four coordinate
/// rows, Z checks add all pairwise products.
pub fn reed_muller_15_code() -> CssCode {
    let coords = hamming_rows(4);
    let h_x = BinaryMatrix::new(15, coords.clone()).expect("static code");
    let mut z_rows = coords.clone();
    for j in 0..4 {
        for k in (j + 1)..4 {
            z_rows.push(coords[j] & coords[k]);
        }
    }
    let h_z = BinaryMatrix::new(15, z_rows).expect("static code");
    css_validate(h_x, h_z).expect("static code is a valid pair")
}

/// Looks up a built-in code by name.
pub fn builtin_code(name: &str) -> Result<CssCode> {
    match name {
        "rep3" => repetition_code(3),
        "rep5" => repetition_code(5),
        "steane" => Ok(steane_code()),
        "rm15" => Ok(reed_muller_15_code()),
        other => Err(CssError::UnknownCode(other.to_string())),
    }
}

/// Parses the parity-check file format: one row of '0'/'1' per line, a
/// blank line separating the X block from the Z block. An empty X block
/// (file starting with the blank separator) is allowed.
pub fn parse_parity_check_file(text: &str) -> Result<CssCode> {
    let lines: Vec<&str> = text.lines().collect();
    let split = lines
        .iter()
        .position(|l| l.trim().is_empty())
        .ok_or(CssError::MissingSeparator)?;
    let x_lines: Vec<&str> = lines[..split]
        .iter()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty())
        .collect();
    let z_lines: Vec<&str> = lines[split + 1..]
        .iter()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty())
        .collect();
    let h_z = BinaryMatrix::parse(&z_lines)?;
    let h_x = if x_lines.is_empty() {
        BinaryMatrix::new(h_z.cols, vec![])?
    } else {
        BinaryMatrix::parse(&x_lines)?
    };
    css_validate(h_x, h_z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn steane_dimensions() {
        let code = steane_code();
        assert_eq!(code.n_code(), 7);
        assert_eq!(code.k_x(), 4);
        assert_eq!(code.k_z(), 4);
        assert_eq!(code.logical_count(), 1);
        assert!(!code.deduplicated);
    }

    #[test]
    fn non_orthogonal_pair_is_rejected() {
        // A single weight-3 row has odd self-overlap, so it cannot serve
        // as both an X and a Z check.
        let h = BinaryMatrix::new(3, vec![0b111]).unwrap();
        assert!(matches!(
            css_validate(h.clone(), h),
            Err(CssError::NotOrthogonal { .. })
        ));
        // An even-weight row is self-orthogonal: the pair is a valid
        // zero-logical-qubit code.
        let h = BinaryMatrix::new(2, vec![0b11]).unwrap();
        let code = css_validate(h.clone(), h).unwrap();
        assert_eq!(code.logical_count(), 0);
    }

    #[test]
    fn empty_x_block_is_valid() {
        let code = repetition_code(3).unwrap();
        assert_eq!(code.k_x(), 3);
        assert_eq!(code.k_z(), 1);
        assert_eq!(code.logical_count(), 1);
    }

    #[test]
    fn dependent_rows_are_deduplicated() {
        let h_x = BinaryMatrix::new(4, vec![0b0011, 0b1100, 0b1111]).unwrap();
        let h_z = BinaryMatrix::new(4, vec![0b1111]).unwrap();
        let code = css_validate(h_x, h_z).unwrap();
        assert!(code.deduplicated);
        assert_eq!(code.h_x().rows.len(), 2);
    }

    #[test]
    fn trivial_code_expansion_is_a_single_term() {
        let h_x = BinaryMatrix::new(3, vec![]).unwrap();
        let h_z = BinaryMatrix::new(3, vec![]).unwrap();
        let code = css_validate(h_x, h_z).unwrap();
        let exp = code.codestate(0).unwrap();
        assert_eq!(exp.terms, vec![0]);
        assert_eq!(exp.amplitude, 1.0);
    }

    #[test]
    fn steane_zero_codestate_is_the_even_subcode() {
        let code = steane_code();
        let exp = code.codestate(0).unwrap();
        assert_eq!(exp.terms.len(), 8);
        // The row space of the checks: even-weight codewords only.
        for &t in &exp.terms {
            assert_eq!(t.count_ones() % 2, 0);
        }
        assert!((exp.amplitude - 1.0 / 8f64.sqrt()).abs() < 1e-15);

        // A non-codeword is rejected.
        assert!(code.codestate(0b0000001).is_err());
    }

    #[test]
    fn repetition_code_logicals() {
        let code = repetition_code(3).unwrap();
        let exp = code.codestate(0).unwrap();
        assert_eq!(exp.terms, vec![0]);
        let exp = code.codestate(0b111).unwrap();
        assert_eq!(exp.terms, vec![0b111]);

        let report = code.balance_report().unwrap();
        assert_eq!(report.uncovered_positions, vec![0, 1, 2]);
        assert_eq!(report.logicals.len(), 2);
        let zero = &report.logicals[0];
        let one = &report.logicals[1];
        assert_eq!(zero.excitations, vec![0, 0, 0]);
        assert_eq!(one.excitations, vec![1, 1, 1]);
        assert_eq!(one.excitations.iter().sum::<usize>(), 3);
    }

    #[test]
    fn steane_balance_is_half_the_terms_everywhere() {
        let report = steane_code().balance_report().unwrap();
        assert!(report.uncovered_positions.is_empty());
        assert_eq!(report.logicals.len(), 2);
        for logical in &report.logicals {
            assert_eq!(logical.term_count, 8);
            for (pos, &count) in logical.excitations.iter().enumerate() {
                assert_eq!(count, 4, "position {pos}");
            }
        }
    }

    #[test]
    fn reed_muller_balance_is_half_the_terms_everywhere() {
        let code = reed_muller_15_code();
        assert_eq!(code.n_code(), 15);
        assert_eq!(code.k_x(), 11);
        assert_eq!(code.k_z(), 5);
        assert_eq!(code.logical_count(), 1);
        let report = code.balance_report().unwrap();
        assert!(report.uncovered_positions.is_empty());
        assert_eq!(report.logicals.len(), 2);
        for logical in &report.logicals {
            assert_eq!(logical.term_count, 16);
            for &count in &logical.excitations {
                assert_eq!(count, 8);
            }
        }
    }

    #[test]
    fn covered_positions_balance_in_random_codes() {
        // Random valid CSS pairs over up to 10 positions: every position
        // covered by an X check is excited in exactly half the terms of
        // every logical basis state.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut checked = 0;
        while checked < 40 {
            let n = rng.random_range(3..=10usize);
            let x_rows: Vec<u64> = (0..rng.random_range(1..=3usize))
                .map(|_| rng.random_range(0..1u64 << n))
                .filter(|&r| r != 0)
                .collect();
            if x_rows.is_empty() {
                continue;
            }
            let h_x = BinaryMatrix::new(n, x_rows).unwrap();
            // Z rows drawn from the null space of the X rows.
            let candidates = null_space(&h_x);
            if candidates.is_empty() {
                continue;
            }
            let z_rows: Vec<u64> = (0..rng.random_range(1..=candidates.len()))
                .map(|_| candidates[rng.random_range(0..candidates.len())])
                .filter(|&r| r != 0)
                .collect();
            if z_rows.is_empty() {
                continue;
            }
            let Ok(code) = css_validate(h_x, BinaryMatrix::new(n, z_rows).unwrap()) else {
                continue;
            };
            let report = code.balance_report().unwrap();
            for logical in &report.logicals {
                for pos in 0..n {
                    if report.uncovered_positions.contains(&pos) {
                        continue;
                    }
                    assert_eq!(
                        logical.excitations[pos],
                        logical.term_count / 2,
                        "n={n} pos={pos}"
                    );
                }
            }
            checked += 1;
        }
    }

    #[test]
    fn parity_check_file_round_trip() {
        let text = "0001111\n0110011\n1010101\n\n0001111\n0110011\n1010101\n";
        let code = parse_parity_check_file(text).unwrap();
        assert_eq!(code.n_code(), 7);
        assert_eq!(code.logical_count(), 1);

        // Empty X block.
        let text = "\n110\n011\n";
        let code = parse_parity_check_file(text).unwrap();
        assert_eq!(code.k_x(), 3);

        assert!(parse_parity_check_file("11\n00").is_err());
        assert!(parse_parity_check_file("1x\n\n11").is_err());
    }

    #[test]
    fn builtin_lookup() {
        for name in ["rep3", "rep5", "steane", "rm15"] {
            assert!(builtin_code(name).is_ok());
        }
        assert!(matches!(
            builtin_code("nope"),
            Err(CssError::UnknownCode(_))
        ));
    }

    #[test]
    fn five_copy_repetition_shares_the_asymmetry() {
        let code = builtin_code("rep5").unwrap();
        assert_eq!(code.logical_count(), 1);
        let report = code.balance_report().unwrap();
        assert_eq!(report.uncovered_positions.len(), 5);
        let totals: Vec<usize> = report
            .logicals
            .iter()
            .map(|l| l.excitations.iter().sum())
            .collect();
        assert_eq!(totals, vec![0, 5]);
    }
}
