//! Dense oracles built from scratch: Kronecker products of 2×2 matrices,
//! Taylor exponentials and power iteration. Nothing here calls the dense
//! paths of the library.
#![allow(dead_code)]

use fixdepth_core::pauli::{AlgebraElement, PauliString};
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type M = Array2<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn single(ch: char) -> M {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match ch {
        'I' => Array2::from_shape_vec((2, 2), vec![o, z, z, o]).unwrap(),
        'X' => Array2::from_shape_vec((2, 2), vec![z, o, o, z]).unwrap(),
        'Y' => Array2::from_shape_vec((2, 2), vec![z, -i, i, z]).unwrap(),
        'Z' => Array2::from_shape_vec((2, 2), vec![o, z, z, -o]).unwrap(),
        _ => panic!("bad letter {ch}"),
    }
}

pub fn kron(a: &M, b: &M) -> M {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[[i * rb + k, j * cb + l]] = a[[i, j]] * b[[k, l]];
                }
            }
        }
    }
    out
}

pub fn label_dense(label: &str) -> M {
    let mut chars = label.chars();
    let mut m = single(chars.next().unwrap());
    for ch in chars {
        m = kron(&m, &single(ch));
    }
    m
}

pub fn elem_dense(e: &AlgebraElement) -> M {
    let d = 1usize << e.n();
    let mut m = Array2::zeros((d, d));
    for (p, coeff) in e.iter() {
        m = m + label_dense(&p.label()).mapv(|x| x * coeff);
    }
    m
}

pub fn dagger(m: &M) -> M {
    m.t().mapv(|x| x.conj())
}

pub fn max_diff(a: &M, b: &M) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn eye(d: usize) -> M {
    Array2::from_diag_elem(d, c(1.0, 0.0))
}

pub fn fro(m: &M) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `e^{M}` by scaling and squaring with a 30-term Taylor series.
pub fn expm(m: &M) -> M {
    let norm = fro(m);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = m.mapv(|x| x / 2f64.powi(squarings as i32));
    let d = m.nrows();
    let mut term = eye(d);
    let mut sum = eye(d);
    for k in 1..30 {
        term = term.dot(&scaled).mapv(|x| x / k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = sum.dot(&sum);
    }
    sum
}

/// `e^{i·angle·E}` through the Taylor oracle.
pub fn exp_i(e: &AlgebraElement, angle: f64) -> M {
    expm(&elem_dense(e).mapv(|x| x * c(0.0, angle)))
}

/// Largest singular value by power iteration on `M†M`.
pub fn power_norm(m: &M, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = m.ncols();
    let mut v: ndarray::Array1<Complex64> = (0..d)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mh = dagger(m);
    let mut lambda = 0.0;
    for _ in 0..5000 {
        let w = mh.dot(&m.dot(&v));
        let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        v = w.mapv(|x| x / norm);
        if (norm - lambda).abs() <= 1e-15 * norm {
            lambda = norm;
            break;
        }
        lambda = norm;
    }
    lambda.sqrt()
}

pub fn random_string(rng: &mut ChaCha8Rng, n: usize) -> PauliString {
    let mask = (1u64 << n) - 1;
    PauliString::from_bits(n, rng.random::<u64>() & mask, rng.random::<u64>() & mask)
}

pub fn random_element(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> AlgebraElement {
    let mut e = AlgebraElement::zero(n);
    for _ in 0..terms {
        e.add_term(random_string(rng, n), rng.random_range(-1.0..1.0));
    }
    e
}

pub fn random_complex(rng: &mut ChaCha8Rng, d: usize) -> M {
    Array2::from_shape_fn((d, d), |_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Haar-ish random unitary from the exponential of a random Hermitian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> M {
    let a = random_complex(rng, d);
    let h = (&a + &dagger(&a)).mapv(|x| x * 0.5);
    expm(&h.mapv(|x| x * c(0.0, 1.0)))
}

pub fn all_strings(n: usize) -> Vec<PauliString> {
    let mut out = Vec::new();
    for x in 0..1u64 << n {
        for z in 0..1u64 << n {
            out.push(PauliString::from_bits(n, x, z));
        }
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
