use dspc_core::kernels::{
    k_conv1d_full, k_dft_fused, k_dft_imag, k_dft_imag_symm, k_dft_real, k_dft_real_symm,
    k_fir_response, k_fir_symmetric, k_idft, k_reverse,
};
use proptest::collection::vec;
use proptest::prelude::*;

fn signal() -> impl Strategy<Value = Vec<f64>> {
    vec(-1.0f64..1.0, 2..=64)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parseval(x in signal()) {
        let n = x.len() as f64;
        let time: f64 = x.iter().map(|v| v * v).sum();
        let (re, im) = (k_dft_real(&x), k_dft_imag(&x));
        let freq: f64 = re.iter().zip(&im).map(|(r, i)| r * r + i * i).sum::<f64>() / n;
        prop_assert!(close(time, freq, 1e-9), "{time} vs {freq}");
    }

    #[test]
    fn conjugate_symmetry(x in signal()) {
        let n = x.len();
        let (re, im) = (k_dft_real(&x), k_dft_imag(&x));
        for k in 1..=(n - 1) / 2 {
            prop_assert!(close(re[k], re[n - k], 1e-9));
            prop_assert!(close(im[k], -im[n - k], 1e-9));
        }
    }

    #[test]
    fn dft_round_trip(x in signal()) {
        let back = k_idft(&k_dft_real(&x), &k_dft_imag(&x)).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!(close(*a, *b, 1e-9), "{a} vs {b}");
        }
    }

    #[test]
    fn autocorrelation_is_a_palindrome(x in signal()) {
        let y = k_conv1d_full(&x, &k_reverse(&x));
        let m = y.len();
        for i in 0..m {
            prop_assert!((y[i] - y[m - 1 - i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn fir_is_linear(x in signal(), seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let n = x.len();
        let z: Vec<f64> = x.iter().rev().enumerate().map(|(i, v)| v * ((i as u64 ^ seed) % 7) as f64 / 7.0).collect();
        let h: Vec<f64> = (0..=(seed as usize % n)).map(|i| ((i * 31 + seed as usize % 13) % 17) as f64 / 17.0 - 0.5).collect();
        let mixed: Vec<f64> = x.iter().zip(&z).map(|(p, q)| a * p + b * q).collect();
        let lhs = k_fir_response(&mixed, &h);
        let (fx, fz) = (k_fir_response(&x, &h), k_fir_response(&z, &h));
        for i in 0..n {
            prop_assert!((lhs[i] - (a * fx[i] + b * fz[i])).abs() <= 1e-12);
        }
    }

    #[test]
    fn symmetric_forms_match(x in signal(), half in vec(-1.0f64..1.0, 1..=16), odd in any::<bool>()) {
        let mut h = half.clone();
        let tail: Vec<f64> = half.iter().rev().skip(odd as usize).copied().collect();
        h.extend(tail);
        for (a, b) in k_fir_response(&x, &h).iter().zip(k_fir_symmetric(&x, &h)) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        let (re, im) = k_dft_fused(&x);
        prop_assert_eq!(re.len(), x.len());
        for (a, b) in k_dft_real(&x).iter().zip(k_dft_real_symm(&x)) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        for (a, b) in k_dft_imag(&x).iter().zip(k_dft_imag_symm(&x)) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        for (a, b) in k_dft_imag(&x).iter().zip(&im) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
