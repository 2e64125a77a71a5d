//! Dense matrix helpers that nalgebra does not provide in the form we need.

use nalgebra::{ComplexField, DMatrix};

/// Padé coefficients b_k for degrees 3, 5, 7, 9 and 13.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norms for which the degree 3/5/7/9/13 approximants reach unit roundoff.
const THETA: [f64; 5] = [
    1.495585217958292e-2,
    2.539398330063230e-1,
    9.504178996162932e-1,
    2.097847961257068e0,
    5.371920351148152e0,
];

pub fn one_norm<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled_identity<T: ComplexField<RealField = f64>>(n: usize, c: f64) -> DMatrix<T> {
    DMatrix::from_diagonal_element(n, n, T::from_real(c))
}

fn lin_comb<T: ComplexField<RealField = f64>>(terms: &[(f64, &DMatrix<T>)], n: usize) -> DMatrix<T> {
    let mut out = DMatrix::<T>::zeros(n, n);
    for (c, m) in terms {
        out.zip_apply(*m, |o, x| *o += x * T::from_real(*c));
    }
    out
}

/// Matrix exponential by scaling and squaring with a diagonal Padé approximant
/// (Higham 2005). Works for real and complex element types.
pub fn expm<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> DMatrix<T> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = one_norm(a);
    let ident = scaled_identity::<T>(n, 1.0);

    let low: [&[f64]; 4] = [&PADE3, &PADE5, &PADE7, &PADE9];
    for (b, theta) in low.iter().zip(THETA.iter()) {
        if norm <= *theta {
            let a2 = a * a;
            let mut powers = vec![ident.clone(), a2.clone()];
            while powers.len() < b.len() / 2 {
                let next = powers.last().unwrap() * &a2;
                powers.push(next);
            }
            let mut u_inner = DMatrix::<T>::zeros(n, n);
            let mut v = DMatrix::<T>::zeros(n, n);
            for (k, p) in powers.iter().enumerate() {
                u_inner.zip_apply(p, |o, x| *o += x * T::from_real(b[2 * k + 1]));
                v.zip_apply(p, |o, x| *o += x * T::from_real(b[2 * k]));
            }
            let u = a * u_inner;
            return pade_solve(u, v);
        }
    }

    let s = (norm / THETA[4]).log2().ceil().max(0.0) as i32;
    let scale = 0.5f64.powi(s);
    let a1 = a.map(|x| x * T::from_real(scale));
    let a2 = &a1 * &a1;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;

    let u_tail = lin_comb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], n);
    let mut u_inner = &a6 * u_tail;
    u_inner += lin_comb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &ident)], n);
    let u = &a1 * u_inner;

    let v_tail = lin_comb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], n);
    let mut v = &a6 * v_tail;
    v += lin_comb(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &ident)], n);

    let mut r = pade_solve(u, v);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn pade_solve<T: ComplexField<RealField = f64>>(u: DMatrix<T>, v: DMatrix<T>) -> DMatrix<T> {
    let p = &v + &u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular for scaled arguments")
}

/// max |A - A^dagger| elementwise.
pub fn hermiticity_defect<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            let d = (a[(i, j)].clone() - a[(j, i)].clone().conjugate()).modulus();
            worst = worst.max(d);
        }
    }
    worst
}

pub fn max_abs_diff<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x.clone() - y.clone()).modulus())
        .fold(0.0, f64::max)
}
