//! GF(2^7) arithmetic modulo x^7 + x^3 + 1 using log/antilog tables.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign};

/// x^7 + x^3 + 1.
pub const PRIMITIVE_POLY: u32 = 0x89;
pub const ORDER: usize = 127;

const fn build_tables() -> ([u8; 2 * ORDER], [u8; 128]) {
    let mut exp = [0u8; 2 * ORDER];
    let mut log = [0u8; 128];
    let mut x: u32 = 1;
    let mut i = 0;
    while i < ORDER {
        exp[i] = x as u8;
        exp[i + ORDER] = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x80 != 0 {
            x ^= PRIMITIVE_POLY;
        }
        i += 1;
    }
    (exp, log)
}

const TABLES: ([u8; 2 * ORDER], [u8; 128]) = build_tables();
const EXP: [u8; 2 * ORDER] = TABLES.0;
const LOG: [u8; 128] = TABLES.1;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Gf128(u8);

impl Gf128 {
    pub const ZERO: Gf128 = Gf128(0);
    pub const ONE: Gf128 = Gf128(1);

    pub fn new(v: u8) -> Self {
        assert!(v < 128, "{v} is not a 7-bit field element");
        Gf128(v)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// α^e for any integer exponent.
    pub fn alpha_pow(e: i64) -> Self {
        Gf128(EXP[e.rem_euclid(ORDER as i64) as usize])
    }

    /// Discrete log base α; `None` for zero.
    pub fn log(self) -> Option<usize> {
        (self.0 != 0).then(|| LOG[self.0 as usize] as usize)
    }

    pub fn inv(self) -> Option<Self> {
        self.log().map(|l| Gf128(EXP[(ORDER - l) % ORDER]))
    }

    pub fn pow(self, e: i64) -> Self {
        match self.log() {
            None if e == 0 => Gf128::ONE,
            None => Gf128::ZERO,
            Some(l) => Gf128::alpha_pow(l as i64 * e),
        }
    }
}

impl Add for Gf128 {
    type Output = Gf128;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Gf128) -> Gf128 {
        Gf128(self.0 ^ rhs.0)
    }
}

// addition in characteristic 2 is XOR
#[allow(clippy::suspicious_op_assign_impl)]
impl AddAssign for Gf128 {
    fn add_assign(&mut self, rhs: Gf128) {
        self.0 ^= rhs.0;
    }
}

impl Mul for Gf128 {
    type Output = Gf128;
    fn mul(self, rhs: Gf128) -> Gf128 {
        if self.0 == 0 || rhs.0 == 0 {
            return Gf128::ZERO;
        }
        Gf128(EXP[LOG[self.0 as usize] as usize + LOG[rhs.0 as usize] as usize])
    }
}

impl MulAssign for Gf128 {
    fn mul_assign(&mut self, rhs: Gf128) {
        *self = *self * rhs;
    }
}

impl fmt::Debug for Gf128 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf128({:#04x})", self.0)
    }
}

/// Minimal polynomial of α^i over GF(2), as a bit mask (bit j = coefficient
/// of x^j).
pub fn minimal_polynomial(i: usize) -> u64 {
    let mut conjugates = vec![i % ORDER];
    loop {
        let next = (conjugates.last().unwrap() * 2) % ORDER;
        if next == conjugates[0] {
            break;
        }
        conjugates.push(next);
    }
    // product of (x + α^c) with coefficients in GF(128)
    let mut poly = vec![Gf128::ONE];
    for c in conjugates {
        let root = Gf128::alpha_pow(c as i64);
        let mut next = vec![Gf128::ZERO; poly.len() + 1];
        for (j, &coef) in poly.iter().enumerate() {
            next[j + 1] += coef;
            next[j] += coef * root;
        }
        poly = next;
    }
    poly.iter().enumerate().fold(0u64, |acc, (j, c)| {
        assert!(c.0 <= 1, "minimal polynomial has a non-binary coefficient");
        acc | ((c.0 as u64) << j)
    })
}

/// Carry-less product of two GF(2) polynomials.
pub fn poly_mul(a: u64, b: u64) -> u128 {
    let mut acc: u128 = 0;
    for j in 0..64 {
        if (b >> j) & 1 == 1 {
            acc ^= (a as u128) << j;
        }
    }
    acc
}
