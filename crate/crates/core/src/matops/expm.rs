//! Matrix exponential by scaling and squaring with diagonal Padé approximants,
//! and the zero-order-hold integral `∫_0^h e^{Aτ} dτ`.

use nalgebra::DMatrix;

use super::{CMat, C64};
use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const THETA: [f64; 5] = [
    1.495_585_217_958_292e-2,
    2.539_398_330_063_230e-1,
    9.504_178_996_162_932e-1,
    2.097_847_961_257_068,
    5.371_920_351_148_152,
];

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const PADE9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn check_square(a: &CMat) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NonSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(())
}

/// Low-order approximant `r_m(A)` for `m ∈ {3,5,7,9}`.
fn pade_low(a: &CMat, b: &[f64]) -> (CMat, CMat) {
    let n = a.nrows();
    let a2 = a * a;
    let mut odd = CMat::identity(n, n) * C64::from(b[1]);
    let mut even = CMat::identity(n, n) * C64::from(b[0]);
    let mut pow = CMat::identity(n, n);
    for k in (2..b.len()).step_by(2) {
        pow = &pow * &a2;
        even += &pow * C64::from(b[k]);
        if k + 1 < b.len() {
            odd += &pow * C64::from(b[k + 1]);
        }
    }
    (a * odd, even)
}

fn pade13(a: &CMat) -> (CMat, CMat) {
    let n = a.nrows();
    let b = |k: usize| C64::from(PADE13[k]);
    let id = CMat::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u = a * (&a6 * inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let inner_v = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = &a6 * inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);
    (u, v)
}

/// `e^{A}` for a complex square matrix.
pub fn expm_raw(a: &CMat) -> Result<CMat> {
    check_square(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let norm = one_norm(a);
    let (u, v, squarings) = if norm <= THETA[0] {
        let (u, v) = pade_low(a, &PADE3);
        (u, v, 0)
    } else if norm <= THETA[1] {
        let (u, v) = pade_low(a, &PADE5);
        (u, v, 0)
    } else if norm <= THETA[2] {
        let (u, v) = pade_low(a, &PADE7);
        (u, v, 0)
    } else if norm <= THETA[3] {
        let (u, v) = pade_low(a, &PADE9);
        (u, v, 0)
    } else {
        let s = ((norm / THETA[4]).log2().ceil()).max(0.0) as i32;
        let scaled = a * C64::from(2f64.powi(-s));
        let (u, v) = pade13(&scaled);
        (u, v, s)
    };
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or(Error::NoConvergence("Padé denominator solve"))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NoConvergence("matrix exponential (overflow)"));
    }
    Ok(r)
}

/// `e^{A h}`.
pub fn expm(a: &CMat, h: f64) -> Result<CMat> {
    check_square(a)?;
    if h < 0.0 || !h.is_finite() {
        return Err(Error::Argument(format!(
            "sampling period must be >= 0, got {h}"
        )));
    }
    expm_raw(&(a * C64::from(h)))
}

/// `e^{Ah}` and `G(h) = ∫_0^h e^{Aτ} dτ`, read off the exponential of the
/// augmented matrix `[[A, I], [0, 0]]·h`. No inverse of `A` is formed, so
/// singular `A` is fine.
pub fn expm_and_zoh(a: &CMat, h: f64) -> Result<(CMat, CMat)> {
    check_square(a)?;
    if h < 0.0 || !h.is_finite() {
        return Err(Error::Argument(format!(
            "sampling period must be >= 0, got {h}"
        )));
    }
    let n = a.nrows();
    let mut aug = DMatrix::<C64>::zeros(2 * n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(a);
    aug.view_mut((0, n), (n, n)).fill_with_identity();
    let big = expm_raw(&(aug * C64::from(h)))?;
    Ok((
        big.view((0, 0), (n, n)).into_owned(),
        big.view((0, n), (n, n)).into_owned(),
    ))
}

/// `G(h) = ∫_0^h e^{Aτ} dτ`.
pub fn zoh_integral(a: &CMat, h: f64) -> Result<CMat> {
    expm_and_zoh(a, h).map(|(_, g)| g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::real;

    fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn zero_matrix_gives_identity_and_h_times_identity() {
        let z = CMat::zeros(3, 3);
        let (e, g) = expm_and_zoh(&z, 2.5).unwrap();
        assert!(close(&e, &CMat::identity(3, 3), 1e-15));
        assert!(close(&g, &(CMat::identity(3, 3) * C64::from(2.5)), 1e-14));
    }

    #[test]
    fn rotation_generator_at_pi() {
        let a = real(2, 2, &[1.0, 1.0, -1.0, 1.0]);
        let e = expm(&a, std::f64::consts::PI).unwrap();
        let want = -std::f64::consts::PI.exp();
        assert!((e[(0, 0)].re - want).abs() < 1e-10);
        assert!((e[(1, 1)].re - want).abs() < 1e-10);
        assert!(e[(0, 1)].norm() < 1e-10 && e[(1, 0)].norm() < 1e-10);
        assert!((e[(0, 0)].re + 23.1407).abs() < 5e-5);

        let g = zoh_integral(&a, std::f64::consts::PI).unwrap();
        let want = [-12.0703, 12.0703, -12.0703, -12.0703];
        for (i, w) in want.iter().enumerate() {
            assert!((g[(i / 2, i % 2)].re - w).abs() < 5e-5, "{g}");
        }
    }

    #[test]
    fn jordan_block_at_tenth() {
        let a = real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let e = expm(&a, 0.1).unwrap();
        assert!((e[(0, 0)].re - 1.1052).abs() < 5e-5);
        assert!((e[(0, 1)].re - 0.1105).abs() < 5e-5);
        assert!(e[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn zero_period() {
        let a = real(2, 2, &[3.0, -1.0, 2.0, 0.5]);
        let (e, g) = expm_and_zoh(&a, 0.0).unwrap();
        assert!(close(&e, &CMat::identity(2, 2), 0.0));
        assert!(g.norm() == 0.0);
    }

    #[test]
    fn rejects_non_square() {
        let a = CMat::zeros(2, 3);
        assert!(matches!(expm(&a, 1.0), Err(Error::NonSquare { .. })));
        assert!(matches!(
            zoh_integral(&a, 1.0),
            Err(Error::NonSquare { .. })
        ));
    }

    #[test]
    fn large_norm_uses_squaring() {
        // diagonal so the exact answer is known
        let a = real(2, 2, &[-30.0, 0.0, 0.0, 4.0]);
        let e = expm(&a, 1.0).unwrap();
        assert!((e[(0, 0)].re - (-30f64).exp()).abs() < 1e-25);
        assert!((e[(1, 1)].re / 4f64.exp() - 1.0).abs() < 1e-13);
    }
}
