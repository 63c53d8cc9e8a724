//! Dirichlet characters modulo a prime via discrete logarithms.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{is_prime, pow_mod, prime_factors, CompensatedComplex};

pub const MAX_MODULUS: u64 = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct CharacterTable {
    q: u64,
    primitive_root: u64,
    /// `dlog[j]` with `g^dlog[j] = j (mod q)`; unused at `j = 0`.
    dlog: Vec<u64>,
}

fn smallest_primitive_root(q: u64) -> u64 {
    if q == 2 {
        return 1;
    }
    let order = q - 1;
    let factors = prime_factors(order);
    (2..q)
        .find(|&g| factors.iter().all(|&p| pow_mod(g, order / p, q) != 1))
        .expect("every prime has a primitive root")
}

impl CharacterTable {
    /// Builds the `q - 1` characters modulo the prime `q` and checks
    /// orthogonality over a full period.
    pub fn new(q: u64) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if q > MAX_MODULUS {
            return Err(Error::param(format!("modulus {q} exceeds {MAX_MODULUS}")));
        }
        let g = smallest_primitive_root(q);
        let mut dlog = vec![0u64; q as usize];
        let mut power = 1u64;
        for e in 0..q - 1 {
            dlog[power as usize] = e;
            power = power * g % q;
        }
        let table = CharacterTable {
            q,
            primitive_root: g,
            dlog,
        };
        table.check_orthogonality()?;
        Ok(table)
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn primitive_root(&self) -> u64 {
        self.primitive_root
    }

    /// Number of characters, `phi(q)`.
    pub fn len(&self) -> usize {
        (self.q - 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `chi_a(j) = exp(2 pi i a log_g(j) / (q - 1))`, zero when `q | j`.
    /// Character `0` is principal.
    pub fn value(&self, character: usize, j: u64) -> Complex64 {
        let r = j % self.q;
        if r == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let order = self.q - 1;
        let e = (character as u64 % order) * self.dlog[r as usize] % order;
        Complex64::cis(TAU * e as f64 / order as f64)
    }

    /// `sum_j chi_a(j) conj(chi_b(j)) = sum_j chi_{a-b}(j)`, so each
    /// character sum over a period must vanish except the principal one.
    fn check_orthogonality(&self) -> Result<()> {
        let phi = self.len();
        let bad = (0..phi).into_par_iter().find_any(|&c| {
            let mut acc = CompensatedComplex::default();
            for j in 1..self.q {
                acc.add(self.value(c, j));
            }
            let expected = if c == 0 { phi as f64 } else { 0.0 };
            (acc.value() - Complex64::new(expected, 0.0)).norm() > 1e-9 * phi as f64
        });
        match bad {
            Some(c) => Err(Error::param(format!(
                "character {c} modulo {} fails orthogonality",
                self.q
            ))),
            None => Ok(()),
        }
    }
}

pub fn dirichlet_characters(q: u64) -> Result<CharacterTable> {
    CharacterTable::new(q)
}
