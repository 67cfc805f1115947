//! Binary linear block codes represented as explicit codeword sets.
//!
//! Codewords are stored as bitmasks with mode 1 in the least significant
//! bit, so `bit(w, j)` reads the bit transmitted on mode `j` (1-based, as
//! modes are measured in order). The text format used for user-supplied
//! codes is one codeword per line, most significant mode last, e.g. the
//! even-parity triples `000`, `011`, `101`, `110`.

use thiserror::Error;

/// Longest supported block length; joint outcome enumeration is exponential
/// in it.
pub const MAX_BLOCK_LENGTH: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum CodeError {
    #[error("code must contain at least one codeword")]
    Empty,
    #[error("line {0}: codeword may only contain '0' and '1'")]
    NonBinary(usize),
    #[error("line {0}: codeword length differs from the first codeword")]
    LengthMismatch(usize),
    #[error("duplicate codeword `{0}`")]
    Duplicate(String),
    #[error("codeword count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("block length {0} exceeds the supported maximum {MAX_BLOCK_LENGTH}")]
    BlockTooLong(usize),
    #[error("block length must be at least 1")]
    ZeroLength,
}

/// An (n, k) binary code given by its 2^k codewords of length n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCode {
    n: usize,
    k: usize,
    codewords: Vec<u16>,
}

impl LinearCode {
    /// The (3, 2) even-parity code: x3 = x1 ^ x2.
    pub fn parity_3_2() -> Self {
        let mut codewords: Vec<u16> = (0u16..4)
            .map(|m| {
                let (x1, x2) = (m & 1, (m >> 1) & 1);
                x1 | (x2 << 1) | ((x1 ^ x2) << 2)
            })
            .collect();
        codewords.sort_unstable();
        Self { n: 3, k: 2, codewords }
    }

    /// The (7, 4) Hamming code with parity bits
    /// x5 = x1^x2^x3, x6 = x1^x2^x4, x7 = x1^x3^x4.
    pub fn hamming_7_4() -> Self {
        let mut codewords: Vec<u16> = (0u16..16)
            .map(|m| {
                let b = |i: u16| (m >> i) & 1;
                let (x1, x2, x3, x4) = (b(0), b(1), b(2), b(3));
                x1 | (x2 << 1)
                    | (x3 << 2)
                    | (x4 << 3)
                    | ((x1 ^ x2 ^ x3) << 4)
                    | ((x1 ^ x2 ^ x4) << 5)
                    | ((x1 ^ x3 ^ x4) << 6)
            })
            .collect();
        codewords.sort_unstable();
        Self { n: 7, k: 4, codewords }
    }

    /// All 2^n strings: no code constraint.
    pub fn uncoded(n: usize) -> Result<Self, CodeError> {
        if n == 0 {
            return Err(CodeError::ZeroLength);
        }
        if n > MAX_BLOCK_LENGTH {
            return Err(CodeError::BlockTooLong(n));
        }
        Ok(Self { n, k: n, codewords: (0..1u32 << n).map(|w| w as u16).collect() })
    }

    /// Builds a code from an explicit codeword set. The set must be
    /// nonempty, duplicate-free, of uniform length, and of power-of-two
    /// cardinality.
    pub fn from_codewords<S: AsRef<str>>(words: &[S]) -> Result<Self, CodeError> {
        let mut n = 0;
        let mut codewords = Vec::with_capacity(words.len());
        for (i, line) in words.iter().enumerate() {
            let line = line.as_ref();
            let lineno = i + 1;
            if i == 0 {
                n = line.len();
                if n == 0 {
                    return Err(CodeError::ZeroLength);
                }
                if n > MAX_BLOCK_LENGTH {
                    return Err(CodeError::BlockTooLong(n));
                }
            } else if line.len() != n {
                return Err(CodeError::LengthMismatch(lineno));
            }
            let mut word = 0u16;
            for (j, c) in line.bytes().enumerate() {
                match c {
                    b'0' => {}
                    b'1' => word |= 1 << j,
                    _ => return Err(CodeError::NonBinary(lineno)),
                }
            }
            if codewords.contains(&word) {
                return Err(CodeError::Duplicate(line.to_string()));
            }
            codewords.push(word);
        }
        if codewords.is_empty() {
            return Err(CodeError::Empty);
        }
        if !codewords.len().is_power_of_two() {
            return Err(CodeError::NotPowerOfTwo(codewords.len()));
        }
        codewords.sort_unstable();
        let k = codewords.len().trailing_zeros() as usize;
        Ok(Self { n, k, codewords })
    }

    /// Parses the one-codeword-per-line text format. Blank lines and
    /// surrounding whitespace (including CR from CRLF files) are ignored.
    pub fn parse(text: &str) -> Result<Self, CodeError> {
        let words: Vec<&str> =
            text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        Self::from_codewords(&words)
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn message_bits(&self) -> usize {
        self.k
    }

    pub fn codewords(&self) -> &[u16] {
        &self.codewords
    }

    /// Bit transmitted on mode `j` (1-based) of codeword `word`.
    #[inline]
    pub fn mode_bit(word: u16, j: usize) -> u16 {
        (word >> (j - 1)) & 1
    }

    /// Codeword as a string, mode 1 first.
    pub fn word_string(&self, word: u16) -> String {
        (1..=self.n)
            .map(|j| if Self::mode_bit(word, j) == 1 { '1' } else { '0' })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_code_has_the_four_even_words() {
        let code = LinearCode::parity_3_2();
        assert_eq!(code.block_length(), 3);
        assert_eq!(code.message_bits(), 2);
        let mut words: Vec<String> =
            code.codewords().iter().map(|&w| code.word_string(w)).collect();
        words.sort();
        assert_eq!(words, ["000", "011", "101", "110"]);
    }

    #[test]
    fn uncoded_one_is_the_binary_alphabet() {
        let code = LinearCode::uncoded(1).unwrap();
        assert_eq!(code.codewords(), &[0, 1]);
        assert_eq!(code.message_bits(), 1);
        assert!(LinearCode::uncoded(0).is_err());
        assert_eq!(LinearCode::uncoded(17), Err(CodeError::BlockTooLong(17)));
    }

    #[test]
    fn hamming_words_satisfy_all_parity_checks() {
        let code = LinearCode::hamming_7_4();
        assert_eq!(code.codewords().len(), 16);
        // Exhaustive oracle: membership over all 2^7 vectors must coincide
        // with the three parity constraints.
        let b = |w: u16, j: usize| LinearCode::mode_bit(w, j);
        for w in 0u16..128 {
            let valid = b(w, 5) == (b(w, 1) ^ b(w, 2) ^ b(w, 3))
                && b(w, 6) == (b(w, 1) ^ b(w, 2) ^ b(w, 4))
                && b(w, 7) == (b(w, 1) ^ b(w, 3) ^ b(w, 4));
            assert_eq!(code.codewords().contains(&w), valid, "word {w:07b}");
        }
    }

    #[test]
    fn parse_accepts_wellformed_files() {
        let code = LinearCode::parse("000\n011\r\n101\n110\n\n").unwrap();
        assert_eq!(code, LinearCode::parity_3_2());
    }

    #[test]
    fn parse_rejects_malformed_files() {
        assert_eq!(LinearCode::parse(""), Err(CodeError::Empty));
        assert_eq!(LinearCode::parse("01\n0"), Err(CodeError::LengthMismatch(2)));
        assert_eq!(LinearCode::parse("01\n02"), Err(CodeError::NonBinary(2)));
        assert_eq!(
            LinearCode::parse("01\n01"),
            Err(CodeError::Duplicate("01".into()))
        );
        assert_eq!(LinearCode::parse("00\n01\n10"), Err(CodeError::NotPowerOfTwo(3)));
        assert_eq!(
            LinearCode::parse(&"0".repeat(17)),
            Err(CodeError::BlockTooLong(17))
        );
    }

    #[test]
    fn explicit_single_codeword_is_a_zero_bit_code() {
        let code = LinearCode::parse("0101").unwrap();
        assert_eq!(code.message_bits(), 0);
        assert_eq!(code.block_length(), 4);
    }
}
