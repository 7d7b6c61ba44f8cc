mod common;

use common::{crc_loop_ops, fft_real_ops, gauss_jordan_multiplicative_ops, schoolbook_product};
use nr_energy_core::opcount::{
    count_crc, count_ldpc_encode, count_ls, fft_flops, ls_flops_per_pair, mmse_flops,
    LdpcEncodeDims,
};
use nr_energy_core::{DataClass, OpKind};
use proptest::prelude::*;

#[test]
fn schoolbook_matches_dot_product_closed_form() {
    assert_eq!(schoolbook_product(2, 3, 4), (24, 16));
    assert_eq!(schoolbook_product(1, 1, 1), (1, 0));
}

#[test]
fn gauss_jordan_is_cubic() {
    for n in 1..=8 {
        assert_eq!(gauss_jordan_multiplicative_ops(n), (n * n * n) as u64);
    }
}

#[test]
fn fft_oracle_known_sizes() {
    assert_eq!(fft_real_ops(1), 0);
    assert_eq!(fft_real_ops(2), 10);
    assert_eq!(fft_real_ops(8), 10 * 4 * 3);
    assert_eq!(14 * 4 * fft_real_ops(256), fft_flops(14, 4, 256).unwrap());
}

#[test]
fn fft_formula_matches_oracle_for_all_sizes() {
    for log2 in 1..=12 {
        let n = 1u64 << log2;
        assert_eq!(
            fft_flops(1, 1, n).unwrap(),
            fft_real_ops(n as usize),
            "N={n}"
        );
    }
}

#[test]
fn ldpc_example_product_matches_schoolbook() {
    // (46*2) x (68*2) base-graph expansion times the input vector.
    let (muls, adds) = schoolbook_product(92, 136, 1);
    assert_eq!(muls + adds, 24932);
}

#[test]
fn ls_example_matches_oracles() {
    let (n, s) = (4usize, 14 * 24usize);
    let gram = schoolbook_product(n, s, n);
    let inv = gauss_jordan_multiplicative_ops(n);
    let apply = schoolbook_product(n, n, s);
    let bracket = gram.0 + gram.1 + inv + apply.0 + apply.1;
    assert_eq!(bracket, 20208);
    assert_eq!(
        count_ls(2, 2, 2, 2, 14, 24).get(OpKind::Flop, DataClass::DoubleVector),
        4 * bracket
    );
}

#[test]
fn mmse_bracket_products_match_schoolbook() {
    for (nr, nt, g) in [(2usize, 2usize, 14usize), (4, 2, 14), (1, 1, 1), (3, 5, 2)] {
        let per_sc = 3 * nt as u64
            + {
                let (m, a) = schoolbook_product(nt, nt, nr);
                m + a
            }
            + {
                let (m, a) = schoolbook_product(nt, nr, nr);
                m + a
            }
            + {
                let (m, a) = schoolbook_product(nt, nr, g);
                m + a
            };
        let head = mmse_flops(nr as u64, nt as u64, 0, g as u64);
        assert_eq!(
            mmse_flops(nr as u64, nt as u64, 12, g as u64),
            head + 12 * per_sc
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ldpc_product_equals_schoolbook(rows in 1u64..=8, cols in 1u64..=8, z in 1u64..=8) {
        let dims = LdpcEncodeDims {
            info_bits: 2 * z,
            lifting: z,
            nonnull: 1,
            rows,
            cols,
            coded_bits: 0,
            code_blocks: 1,
        };
        let c = count_ldpc_encode(&dims).unwrap();
        let (m, a) = schoolbook_product((rows * z) as usize, (cols * z) as usize, 1);
        prop_assert_eq!(c.product_mul, m);
        prop_assert_eq!(c.product_add, a);
    }

    #[test]
    fn ls_bracket_equals_schoolbook(tx in 1u64..=4, l in 1u64..=2, g in 1u64..=4, kp in 1u64..=2) {
        let n = (tx * l) as usize;
        let s = (g * kp) as usize;
        prop_assume!(n <= 8 && s <= 8);
        let gram = schoolbook_product(n, s, n);
        let apply = schoolbook_product(s, n, n);
        let expected = gram.0 + gram.1 + gauss_jordan_multiplicative_ops(n) + apply.0 + apply.1;
        prop_assert_eq!(ls_flops_per_pair(tx, l, g, kp), expected);
    }

    #[test]
    fn crc_formula_equals_loop(bits in 0u64..=100_000, p in prop::sample::select(vec![1u64, 8, 16, 32, 64])) {
        let (and, xor, shift) = crc_loop_ops(bits, p);
        let t = count_crc(bits, p);
        prop_assert_eq!(t.get(OpKind::And, DataClass::LogicalScalar), and);
        prop_assert_eq!(t.get(OpKind::Xor, DataClass::LogicalScalar), xor);
        prop_assert_eq!(t.get(OpKind::Shift, DataClass::LogicalScalar), shift);
    }
}
