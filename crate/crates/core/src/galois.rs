//! Arithmetic in GF(2^m) for m in 3..=6 and binary BCH code construction.
//!
//! Built-in primitive polynomials:
//!
//! | m | polynomial    |
//! |---|---------------|
//! | 3 | x^3 + x + 1   |
//! | 4 | x^4 + x + 1   |
//! | 5 | x^5 + x^2 + 1 |
//! | 6 | x^6 + x + 1   |

use std::fmt;

use crate::codes::BitRow;
use crate::error::{Error, Result};

/// Largest message dimension [`enumerate_codebook`] will expand.
pub const MAX_CODEBOOK_DIMENSION: usize = 16;

fn primitive_poly(m: u32) -> Option<u32> {
    match m {
        3 => Some(0b1011),
        4 => Some(0b1_0011),
        5 => Some(0b10_0101),
        6 => Some(0b100_0011),
        _ => None,
    }
}

/// GF(2^m) with elements as `m`-bit integers in the polynomial basis.
#[derive(Clone, Debug)]
pub struct GaloisField {
    m: u32,
    primitive_poly: u32,
    /// `antilog[i] = alpha^i` for `i` in `0..order`.
    antilog: Vec<u32>,
    /// `log[x]` for nonzero `x`; `log[0]` is unused.
    log: Vec<u32>,
}

impl GaloisField {
    pub fn new(m: u32) -> Result<Self> {
        let poly = primitive_poly(m)
            .ok_or_else(|| Error::UnsupportedSize(format!("GF(2^{m}) not supported; m must be in 3..=6")))?;
        let size = 1u32 << m;
        let order = (size - 1) as usize;
        let mut antilog = Vec::with_capacity(order);
        let mut log = vec![0u32; size as usize];
        let mut x = 1u32;
        for i in 0..order {
            antilog.push(x);
            log[x as usize] = i as u32;
            x <<= 1;
            if x & size != 0 {
                x ^= poly;
            }
        }
        // alpha must generate the whole multiplicative group.
        assert_eq!(x, 1, "polynomial for m={m} is not primitive");
        let mut seen = antilog.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), order, "polynomial for m={m} is not primitive");
        Ok(GaloisField {
            m,
            primitive_poly: poly,
            antilog,
            log,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn primitive_poly(&self) -> Gf2Poly {
        Gf2Poly::from_bits(self.primitive_poly as u64)
    }

    /// Multiplicative group order, `2^m - 1`.
    pub fn order(&self) -> usize {
        self.antilog.len()
    }

    /// `alpha^e`, with `e` taken modulo the group order.
    pub fn alpha_pow(&self, e: usize) -> u32 {
        self.antilog[e % self.order()]
    }

    pub fn log(&self, x: u32) -> Option<usize> {
        (x != 0).then(|| self.log[x as usize] as usize)
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let e = self.log[a as usize] as usize + self.log[b as usize] as usize;
        self.antilog[e % self.order()]
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        let l = self.log(a)?;
        Some(self.antilog[(self.order() - l) % self.order()])
    }

    /// Evaluate a binary polynomial at a field element (Horner).
    pub fn eval(&self, p: &Gf2Poly, x: u32) -> u32 {
        let mut acc = 0u32;
        for i in (0..=p.degree().unwrap_or(0)).rev() {
            acc = self.mul(acc, x);
            if p.coeff(i) {
                acc ^= 1;
            }
        }
        acc
    }

    /// Exponents `{e * 2^i mod (2^m - 1)}`, sorted.
    pub fn cyclotomic_coset(&self, e: usize) -> Vec<usize> {
        let order = self.order();
        let mut coset = Vec::new();
        let mut c = e % order;
        while !coset.contains(&c) {
            coset.push(c);
            c = (c * 2) % order;
        }
        coset.sort_unstable();
        coset
    }
}

/// Polynomial over GF(2), coefficient of `x^i` at bit `i`. Degree is at
/// most 63.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Gf2Poly(u64);

impl Gf2Poly {
    pub fn zero() -> Self {
        Gf2Poly(0)
    }

    pub fn one() -> Self {
        Gf2Poly(1)
    }

    pub fn from_bits(bits: u64) -> Self {
        Gf2Poly(bits)
    }

    /// Coefficients, lowest degree first.
    pub fn from_coeffs(coeffs: &[u8]) -> Self {
        assert!(coeffs.len() <= 64);
        Gf2Poly(
            coeffs
                .iter()
                .enumerate()
                .fold(0, |acc, (i, &c)| acc | (((c & 1) as u64) << i)),
        )
    }

    pub fn bits(&self) -> u64 {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == 0
    }

    pub fn degree(&self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    pub fn coeff(&self, i: usize) -> bool {
        i < 64 && (self.0 >> i) & 1 == 1
    }

    /// Carry-less product. Panics if the result would exceed degree 63.
    pub fn mul(&self, other: &Gf2Poly) -> Gf2Poly {
        if let (Some(a), Some(b)) = (self.degree(), other.degree()) {
            assert!(a + b < 64, "product degree {} exceeds 63", a + b);
        }
        let mut acc = 0u64;
        let mut a = self.0;
        let mut shift = 0;
        while a != 0 {
            if a & 1 == 1 {
                acc ^= other.0 << shift;
            }
            a >>= 1;
            shift += 1;
        }
        Gf2Poly(acc)
    }

    /// Quotient and remainder by repeated aligned XOR.
    pub fn div_rem(&self, divisor: &Gf2Poly) -> (Gf2Poly, Gf2Poly) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let mut rem = self.0;
        let mut quot = 0u64;
        while let Some(rd) = Gf2Poly(rem).degree() {
            if rd < dd {
                break;
            }
            let shift = rd - dd;
            quot |= 1 << shift;
            rem ^= divisor.0 << shift;
        }
        (Gf2Poly(quot), Gf2Poly(rem))
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Poly({self})")
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(deg) = self.degree() else {
            return f.write_str("0");
        };
        let mut first = true;
        for i in (0..=deg).rev().filter(|&i| self.coeff(i)) {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match i {
                0 => f.write_str("1")?,
                1 => f.write_str("x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Minimal polynomial of `alpha^e` over GF(2): the product of `(x - alpha^c)`
/// over the cyclotomic coset of `e`.
pub fn minimal_polynomial(field: &GaloisField, e: usize) -> Result<Gf2Poly> {
    if e == 0 || e >= field.order() {
        return Err(Error::invalid(format!(
            "exponent {e} outside 1..={}",
            field.order() - 1
        )));
    }
    // coefficients in GF(2^m), lowest degree first
    let mut coeffs: Vec<u32> = vec![1];
    for c in field.cyclotomic_coset(e) {
        let root = field.alpha_pow(c);
        let mut next = vec![0u32; coeffs.len() + 1];
        for (i, &a) in coeffs.iter().enumerate() {
            next[i + 1] ^= a;
            next[i] ^= field.mul(a, root);
        }
        coeffs = next;
    }
    let mut bits = 0u64;
    for (i, &c) in coeffs.iter().enumerate() {
        match c {
            0 => {}
            1 => bits |= 1 << i,
            _ => unreachable!("minimal polynomial coefficient outside GF(2)"),
        }
    }
    Ok(Gf2Poly(bits))
}

/// Generator of the narrow-sense binary BCH code of length `2^m - 1` with
/// designed distance `2t + 1`: lcm of the minimal polynomials of
/// `alpha^1 ..= alpha^(2t)`.
pub fn bch_generator(field: &GaloisField, t: usize) -> Result<Gf2Poly> {
    let n = field.order();
    if t == 0 || 2 * t + 1 > n {
        return Err(Error::InfeasibleDesign(format!(
            "designed distance {} impossible at length {n}",
            2 * t + 1
        )));
    }
    let mut covered = vec![false; n];
    let mut g = Gf2Poly::one();
    for e in 1..=2 * t {
        if covered[e % n] {
            continue;
        }
        for c in field.cyclotomic_coset(e) {
            covered[c] = true;
        }
        g = g.mul(&minimal_polynomial(field, e % n)?);
    }
    let deg = g.degree().unwrap_or(0);
    if deg >= n {
        return Err(Error::InfeasibleDesign(format!(
            "t={t} leaves no message bits at length {n}"
        )));
    }
    Ok(g)
}

/// Message dimension of the cyclic code of length `2^m - 1` generated by `g`.
pub fn code_dimension(field: &GaloisField, g: &Gf2Poly) -> usize {
    field.order() - g.degree().unwrap_or(0)
}

/// All `2^dim` codewords `msg(x) * g(x)`, each as a bit row whose position
/// `j` holds the coefficient of `x^j`, sorted lexicographically by their
/// `0`/`1` string.
pub fn enumerate_codebook(field: &GaloisField, g: &Gf2Poly) -> Result<Vec<BitRow>> {
    let n = field.order();
    let dim = code_dimension(field, g);
    if dim > MAX_CODEBOOK_DIMENSION {
        return Err(Error::UnsupportedSize(format!(
            "codebook dimension {dim} exceeds {MAX_CODEBOOK_DIMENSION}"
        )));
    }
    let mut words: Vec<BitRow> = (0u64..1 << dim)
        .map(|msg| {
            let c = Gf2Poly(msg).mul(g);
            let mut row = BitRow::zeros(n);
            for j in 0..n {
                row.set(j, c.coeff(j));
            }
            row
        })
        .collect();
    words.sort_by_cached_key(|w| w.to_string());
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unsupported_degree() {
        assert!(matches!(GaloisField::new(2), Err(Error::UnsupportedSize(_))));
        assert!(matches!(GaloisField::new(7), Err(Error::UnsupportedSize(_))));
    }

    #[test]
    fn gf16_alpha_powers() {
        let f = GaloisField::new(4).unwrap();
        // alpha^4 = alpha + 1 under x^4 + x + 1
        assert_eq!(f.alpha_pow(4), 0b0011);
        assert_eq!(f.alpha_pow(15), 1);
        for x in 1..16u32 {
            assert_eq!(f.alpha_pow(f.log(x).unwrap()), x);
        }
    }

    #[test]
    fn gf8_has_seven_distinct_powers() {
        let f = GaloisField::new(3).unwrap();
        let mut p: Vec<u32> = (0..7).map(|i| f.alpha_pow(i)).collect();
        p.sort_unstable();
        assert_eq!(p, (1..8).collect::<Vec<_>>());
    }

    #[test]
    fn group_order_identity() {
        for m in 3..=6 {
            let f = GaloisField::new(m).unwrap();
            assert_eq!(f.alpha_pow(f.order()), 1);
        }
    }

    #[test]
    fn minimal_polynomials_gf16() {
        let f = GaloisField::new(4).unwrap();
        let m1 = minimal_polynomial(&f, 1).unwrap();
        assert_eq!(m1, f.primitive_poly());
        let m3 = minimal_polynomial(&f, 3).unwrap();
        assert_eq!(m3.degree(), Some(4));
        assert_eq!(f.eval(&m3, f.alpha_pow(3)), 0);
        for e in 1..15 {
            assert_eq!(
                minimal_polynomial(&f, e).unwrap(),
                minimal_polynomial(&f, (2 * e) % 15).unwrap()
            );
        }
        assert!(minimal_polynomial(&f, 0).is_err());
        assert!(minimal_polynomial(&f, 15).is_err());
    }

    #[test]
    fn bch_generators_gf16() {
        let f = GaloisField::new(4).unwrap();
        let g1 = bch_generator(&f, 1).unwrap();
        assert_eq!(g1, Gf2Poly::from_bits(0b1_0011));
        assert_eq!(code_dimension(&f, &g1), 11);
        let g3 = bch_generator(&f, 3).unwrap();
        assert_eq!(g3.degree(), Some(10));
        assert_eq!(code_dimension(&f, &g3), 5);
        for t in 1..=3 {
            let g = bch_generator(&f, t).unwrap();
            for e in 1..=2 * t {
                assert_eq!(f.eval(&g, f.alpha_pow(e)), 0, "t={t} e={e}");
            }
        }
        assert!(matches!(bch_generator(&f, 8), Err(Error::InfeasibleDesign(_))));
    }

    #[test]
    fn codebook_contains_zero_and_is_sorted() {
        let f = GaloisField::new(4).unwrap();
        let g = bch_generator(&f, 3).unwrap();
        let book = enumerate_codebook(&f, &g).unwrap();
        assert_eq!(book.len(), 32);
        assert_eq!(book[0], BitRow::zeros(15));
        assert!(book.windows(2).all(|w| w[0].to_string() < w[1].to_string()));
    }

    #[test]
    fn codebook_dimension_cap() {
        let f = GaloisField::new(6).unwrap();
        let g = bch_generator(&f, 1).unwrap(); // dimension 57
        assert!(matches!(enumerate_codebook(&f, &g), Err(Error::UnsupportedSize(_))));
    }

    #[test]
    fn poly_division() {
        let a = Gf2Poly::from_coeffs(&[1, 0, 1, 1, 0, 1]);
        let b = Gf2Poly::from_coeffs(&[1, 1, 0, 1]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(Gf2Poly::from_bits(q.mul(&b).bits() ^ r.bits()), a);
        assert!(r.degree().is_none_or(|d| d < 3));
        assert_eq!(format!("{b}"), "x^3 + x + 1");
    }

    fn field_elems(m: u32) -> impl Strategy<Value = (u32, u32, u32)> {
        let size = 1u32 << m;
        (0..size, 0..size, 0..size)
    }

    proptest! {
        #[test]
        fn field_axioms(m in 3u32..=6, seed in any::<u64>()) {
            let f = GaloisField::new(m).unwrap();
            let size = 1u64 << m;
            let a = (seed % size) as u32;
            let b = ((seed >> 8) % size) as u32;
            let c = ((seed >> 16) % size) as u32;
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            if a != 0 {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }

        #[test]
        fn gf64_axioms((a, b, c) in field_elems(6)) {
            let f = GaloisField::new(6).unwrap();
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        }
    }
}
