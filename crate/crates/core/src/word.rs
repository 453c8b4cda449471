//! Words in the free group on generators `x1..xn`.
//!
//! A letter is a non-zero `i32`: `k > 0` stands for `x_k`, `-k` for its
//! inverse `X_k`. Generators are numbered from one in text and letters, and
//! from zero everywhere a vector is indexed.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<i32>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Single generator `x_{k+1}`, inverted if `inv`.
    pub fn generator(k: usize, inv: bool) -> Self {
        let l = k as i32 + 1;
        Word(vec![if inv { -l } else { l }])
    }

    /// Builds a word from letters, reducing it freely.
    pub fn from_letters(letters: impl IntoIterator<Item = i32>) -> Self {
        let mut w = Word(Vec::new());
        for l in letters {
            assert!(l != 0, "letter 0 is not a generator");
            w.push(l);
        }
        w
    }

    fn push(&mut self, l: i32) {
        if self.0.last() == Some(&-l) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|l| -l).collect())
    }

    /// Concatenation followed by free reduction.
    pub fn concat(&self, other: &Word) -> Self {
        let mut w = self.clone();
        for &l in &other.0 {
            w.push(l);
        }
        w
    }

    /// Removes cancelling letters at the two ends.
    pub fn cyclically_reduced(&self) -> Self {
        let mut s = 0;
        let mut e = self.0.len();
        while e - s >= 2 && self.0[s] == -self.0[e - 1] {
            s += 1;
            e -= 1;
        }
        Word(self.0[s..e].to_vec())
    }

    /// Exponent sum of each generator.
    pub fn abelianization(&self, n_gens: usize) -> Vec<i64> {
        let mut v = vec![0; n_gens];
        for &l in &self.0 {
            let k = l.unsigned_abs() as usize - 1;
            v[k] += l.signum() as i64;
        }
        v
    }

    /// Shortens the word with Dehn's algorithm for a one-relator group:
    /// any subword that is more than half of a cyclic conjugate of the
    /// relator (or its inverse) is replaced by the inverse of the rest.
    pub fn dehn_reduce(&self, relator: &Word) -> Word {
        let n = relator.len();
        if n == 0 {
            return self.clone();
        }
        let mut rotations = Vec::with_capacity(2 * n);
        for r in [relator.clone(), relator.inverse()] {
            for i in 0..n {
                let mut v = r.0[i..].to_vec();
                v.extend_from_slice(&r.0[..i]);
                rotations.push(v);
            }
        }
        let mut w = self.clone();
        'outer: loop {
            for start in 0..w.0.len() {
                for rot in &rotations {
                    let m = rot
                        .iter()
                        .zip(&w.0[start..])
                        .take_while(|(a, b)| a == b)
                        .count();
                    if 2 * m > n {
                        let rest = Word(rot[m..].to_vec()).inverse();
                        let mut letters = w.0[..start].to_vec();
                        letters.extend_from_slice(&rest.0);
                        letters.extend_from_slice(&w.0[start + m..]);
                        w = Word::from_letters(letters);
                        continue 'outer;
                    }
                }
            }
            return w;
        }
    }

    /// Largest generator index (one-based) appearing in the word.
    pub fn max_generator(&self) -> usize {
        self.0.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            let c = if *l > 0 { 'x' } else { 'X' };
            write!(f, "{c}{}", l.unsigned_abs())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses whitespace separated tokens `x3`, `X3`; the result is reduced.
    fn from_str(s: &str) -> Result<Self, Error> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let (sign, rest) = match tok.as_bytes()[0] {
                b'x' => (1, &tok[1..]),
                b'X' => (-1, &tok[1..]),
                _ => return Err(Error::Domain(format!("bad letter {tok:?}"))),
            };
            let k: i32 = rest
                .parse()
                .ok()
                .filter(|k| *k > 0)
                .ok_or_else(|| Error::Domain(format!("bad letter {tok:?}")))?;
            letters.push(sign * k);
        }
        Ok(Word::from_letters(letters))
    }
}

/// `[a, b] = a b a^{-1} b^{-1}` for generator indices (zero-based).
pub fn commutator(a: usize, b: usize) -> Word {
    let (a, b) = (a as i32 + 1, b as i32 + 1);
    Word(vec![a, b, -a, -b])
}

/// `[x1,x2][x3,x4]...[x_{2g-1},x_{2g}]`.
pub fn standard_relator(genus: usize) -> Word {
    (0..genus).fold(Word::identity(), |w, m| w.concat(&commutator(2 * m, 2 * m + 1)))
}
