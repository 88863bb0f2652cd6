use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// Alice's input `x ∈ {0,1}^n`, bit-packed. Positions are 1-based.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn zeros(n: usize) -> Result<Self> {
        check_len(n)?;
        Ok(BitString {
            words: vec![0; n.div_ceil(64)],
            len: n,
        })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut x = BitString::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            x.set(i + 1, b);
        }
        Ok(x)
    }

    /// Parses a string of `0`/`1` characters, first character is position 1.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::invalid(format!("bad bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        BitString::from_bits(&bits)
    }

    /// Uniformly random string of length `n`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_len(n)?;
        let mut words: Vec<u64> = (0..n.div_ceil(64)).map(|_| rng.random()).collect();
        let tail = n % 64;
        if tail != 0 {
            *words.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
        Ok(BitString { words, len: n })
    }

    /// Enumerates all `2^n` strings of length `n` in counting order.
    pub fn enumerate(n: usize) -> Result<impl Iterator<Item = BitString>> {
        check_len(n)?;
        if n > 24 {
            return Err(Error::invalid(format!(
                "refusing to enumerate 2^{n} inputs"
            )));
        }
        Ok((0u64..(1u64 << n)).map(move |v| BitString {
            words: vec![v],
            len: n,
        }))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at 1-based position `k`.
    #[inline]
    pub fn bit(&self, k: usize) -> bool {
        debug_assert!(k >= 1 && k <= self.len);
        let i = k - 1;
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, k: usize, value: bool) {
        assert!(k >= 1 && k <= self.len, "position {k} out of range");
        let i = k - 1;
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    /// `x_k ⊕ x_l`.
    #[inline]
    pub fn parity(&self, k: usize, l: usize) -> bool {
        self.bit(k) ^ self.bit(l)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (1..=self.len).map(|k| self.bit(k))
    }
}

fn check_len(n: usize) -> Result<()> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::invalid(format!(
            "input length must be even and >= 2, got {n}"
        )));
    }
    Ok(())
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}
