use super::{Mat2, C64};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Haar-random d×d unitary from the QR decomposition of a complex Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let ph = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

pub fn haar_unitary_2<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let u = haar_unitary(2, rng);
    Mat2::new(u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)])
}

pub fn random_unit_vector3<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = haar_unitary(8, &mut rng);
        let dev = crate::channels::max_abs_c((u.adjoint() * &u - DMatrix::identity(8, 8)).iter());
        assert!(dev < 1e-13);
    }

    #[test]
    fn haar_trace_second_moment() {
        // E|tr U|² = 1 for Haar U(d).
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 4000;
        let m: f64 = (0..n).map(|_| haar_unitary(3, &mut rng).trace().norm_sqr()).sum::<f64>() / n as f64;
        assert!((m - 1.0).abs() < 0.1, "{m}");
    }
}
