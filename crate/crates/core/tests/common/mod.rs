//! Independent counting oracles. Each one performs the algorithm on a
//! value type that counts the arithmetic it is asked to do, so the counts
//! come from executing loops rather than from closed forms.
#![allow(
    dead_code,
    clippy::suspicious_arithmetic_impl,
    clippy::needless_range_loop
)]

use std::cell::Cell;
use std::ops::{Add, Div, Mul, Neg, Sub};

thread_local! {
    static ADDS: Cell<u64> = const { Cell::new(0) };
    static MULS: Cell<u64> = const { Cell::new(0) };
}

fn reset() {
    ADDS.with(|c| c.set(0));
    MULS.with(|c| c.set(0));
}

fn counts() -> (u64, u64) {
    (ADDS.with(Cell::get), MULS.with(Cell::get))
}

/// A real number that tallies additive and multiplicative operations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Counted(pub f64);

impl Add for Counted {
    type Output = Counted;
    fn add(self, o: Counted) -> Counted {
        ADDS.with(|c| c.set(c.get() + 1));
        Counted(self.0 + o.0)
    }
}

impl Sub for Counted {
    type Output = Counted;
    fn sub(self, o: Counted) -> Counted {
        ADDS.with(|c| c.set(c.get() + 1));
        Counted(self.0 - o.0)
    }
}

impl Mul for Counted {
    type Output = Counted;
    fn mul(self, o: Counted) -> Counted {
        MULS.with(|c| c.set(c.get() + 1));
        Counted(self.0 * o.0)
    }
}

impl Div for Counted {
    type Output = Counted;
    fn div(self, o: Counted) -> Counted {
        MULS.with(|c| c.set(c.get() + 1));
        Counted(self.0 / o.0)
    }
}

impl Neg for Counted {
    type Output = Counted;
    fn neg(self) -> Counted {
        Counted(-self.0)
    }
}

fn matrix(rows: usize, cols: usize, seed: usize) -> Vec<Vec<Counted>> {
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| Counted(((i * 31 + j * 17 + seed) % 13) as f64 + 1.0))
                .collect()
        })
        .collect()
}

/// Schoolbook `(m x k) * (k x n)` product. Returns `(muls, adds)`.
pub fn schoolbook_product(m: usize, k: usize, n: usize) -> (u64, u64) {
    let a = matrix(m, k, 1);
    let b = matrix(k, n, 2);
    reset();
    let mut out = vec![vec![Counted(0.0); n]; m];
    for i in 0..m {
        for j in 0..n {
            if k == 0 {
                continue;
            }
            let mut acc = a[i][0] * b[0][j];
            for l in 1..k {
                acc = acc + a[i][l] * b[l][j];
            }
            out[i][j] = acc;
        }
    }
    std::hint::black_box(&out);
    let (adds, muls) = counts();
    (muls, adds)
}

/// In-place Gauss-Jordan inversion of a diagonally dominant `n x n`
/// matrix. Returns the number of multiplications and divisions.
pub fn gauss_jordan_multiplicative_ops(n: usize) -> u64 {
    let mut a = matrix(n, n, 3);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = Counted(row[i].0 + 100.0 * n as f64);
    }
    reset();
    for k in 0..n {
        let pivot = Counted(1.0) / a[k][k];
        a[k][k] = pivot;
        for j in 0..n {
            if j != k {
                a[k][j] = a[k][j] * pivot;
            }
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let factor = a[i][k];
            for j in 0..n {
                if j != k {
                    a[i][j] = a[i][j] - factor * a[k][j];
                }
            }
            a[i][k] = -(factor * pivot);
        }
    }
    std::hint::black_box(&a);
    counts().1
}

#[derive(Clone, Copy, Debug)]
struct Complex {
    re: Counted,
    im: Counted,
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

fn fft(x: &[Complex]) -> Vec<Complex> {
    let n = x.len();
    if n == 1 {
        return x.to_vec();
    }
    let even: Vec<_> = x.iter().step_by(2).copied().collect();
    let odd: Vec<_> = x.iter().skip(1).step_by(2).copied().collect();
    let (e, o) = (fft(&even), fft(&odd));
    let mut out = vec![x[0]; n];
    for k in 0..n / 2 {
        let angle = -2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let w = Complex {
            re: Counted(angle.cos()),
            im: Counted(angle.sin()),
        };
        let t = w * o[k];
        out[k] = e[k] + t;
        out[k + n / 2] = e[k] - t;
    }
    out
}

/// Real operations of one recursive radix-2 transform of size `n`.
pub fn fft_real_ops(n: usize) -> u64 {
    assert!(n.is_power_of_two());
    let x: Vec<_> = (0..n)
        .map(|i| Complex {
            re: Counted(i as f64),
            im: Counted(0.5),
        })
        .collect();
    reset();
    std::hint::black_box(fft(&x));
    let (adds, muls) = counts();
    adds + muls
}

/// Runs a slice-by-`p` CRC loop over `bits` input bits and counts
/// `(and, xor, shift)`. A full step is five mask/shift/xor rounds (the
/// input fold and four table lookups). Leftover bits shorter than a step
/// are not read; one final round produces the output.
pub fn crc_loop_ops(bits: u64, p: u64) -> (u64, u64, u64) {
    let (mut and, mut xor, mut shift) = (0u64, 0u64, 0u64);
    let mut crc: u32 = 0xFFFF_FFFF;
    let mut remaining = bits;
    let mut word: u32 = 0x1234_5678;
    while remaining >= p {
        for _ in 0..5 {
            let byte = (crc >> 8) & 0xFF;
            shift += 1;
            and += 1;
            crc ^= byte.wrapping_mul(0x04C1_1DB7) ^ word;
            xor += 1;
        }
        word = word.rotate_left(3);
        remaining -= p;
    }
    crc = (crc >> 1) & 0x7FFF_FFFF;
    crc ^= 0xFFFF_FFFF;
    and += 1;
    shift += 1;
    xor += 1;
    std::hint::black_box(crc);
    (and, xor, shift)
}
