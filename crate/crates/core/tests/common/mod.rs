#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rcmc::{build_from_laplacian, ContractionState, RateMatrix, SparseMatrix, Tolerances, Variant};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected symmetric Laplacian with a spanning tree plus extra edges
/// drawn with probability `density`. Weights are log-uniform over `10^±w_dec`.
pub fn random_laplacian(r: &mut ChaCha8Rng, n: usize, density: f64, w_dec: f64) -> SparseMatrix<f64> {
    let mut w = vec![vec![0.0; n]; n];
    for i in 1..n {
        let j = r.gen_range(0..i);
        let v = 10f64.powf(r.gen_range(-w_dec..=w_dec));
        w[i][j] = v;
        w[j][i] = v;
    }
    for i in 0..n {
        for j in 0..i {
            if w[i][j] == 0.0 && r.gen_bool(density.clamp(0.0, 1.0)) {
                let v = 10f64.powf(r.gen_range(-w_dec..=w_dec));
                w[i][j] = v;
                w[j][i] = v;
            }
        }
    }
    let mut trip = Vec::new();
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            if i != j && w[i][j] != 0.0 {
                trip.push((i, j, -w[i][j]));
                s += w[i][j];
            }
        }
        trip.push((i, i, s));
    }
    SparseMatrix::from_triplets(n, n, &trip)
}

/// Random interior point of the simplex with entries spanning `10^±pi_dec`.
pub fn random_pi(r: &mut ChaCha8Rng, n: usize, pi_dec: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 10f64.powf(r.gen_range(-pi_dec..=pi_dec))).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

pub fn random_system(r: &mut ChaCha8Rng, n: usize, density: f64) -> RateMatrix<f64> {
    let l = random_laplacian(r, n, density, 1.0);
    let pi = random_pi(r, n, 1.0);
    build_from_laplacian(&l, &pi, &Tolerances::default()).expect("random system validates")
}

pub fn random_simplex_point(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -r.gen_range(1e-12f64..1.0).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

pub fn dense(k: &RateMatrix<f64>) -> DMatrix<f64> {
    let rows = k.to_dense();
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

pub fn block(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

pub fn complement(n: usize, s: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| !s.contains(i)).collect()
}

/// `K_TT − K_TS K_SS⁻¹ K_ST`.
pub fn schur(k: &DMatrix<f64>, s: &[usize]) -> DMatrix<f64> {
    let t = complement(k.nrows(), s);
    let ktt = block(k, &t, &t);
    if s.is_empty() {
        return ktt;
    }
    let kss = block(k, s, s);
    let kst = block(k, s, &t);
    let kts = block(k, &t, s);
    ktt - kts * kss.lu().solve(&kst).expect("K_SS nonsingular")
}

/// `M = I_T + K_TS K_SS⁻² K_ST`.
pub fn m_matrix(k: &DMatrix<f64>, s: &[usize]) -> DMatrix<f64> {
    let t = complement(k.nrows(), s);
    let mut m = DMatrix::identity(t.len(), t.len());
    if s.is_empty() {
        return m;
    }
    let lu = block(k, s, s).lu();
    let x = lu.solve(&block(k, s, &t)).unwrap();
    let x2 = lu.solve(&x).unwrap();
    m += block(k, &t, s) * x2;
    m
}

/// The block form of `V` with `V_TT = diag(1ᵀM)⁻¹` (A) or `M⁻¹` (B), in
/// original state order.
pub fn v_matrix(k: &DMatrix<f64>, s: &[usize], variant: Variant) -> DMatrix<f64> {
    let n = k.nrows();
    let t = complement(n, s);
    let m = m_matrix(k, s);
    let vtt = match variant {
        Variant::TypeA => {
            let col_sums = DVector::from_fn(t.len(), |j, _| m.column(j).sum());
            DMatrix::from_diagonal(&col_sums.map(|v| 1.0 / v))
        }
        Variant::TypeB => m.clone().try_inverse().unwrap(),
    };
    let mut v = DMatrix::zeros(n, n);
    if s.is_empty() {
        for (a, &i) in t.iter().enumerate() {
            for (b, &j) in t.iter().enumerate() {
                v[(i, j)] = vtt[(a, b)];
            }
        }
        return v;
    }
    let lu = block(k, s, s).lu();
    let x = lu.solve(&block(k, s, &t)).unwrap(); // K_SS⁻¹ K_ST
    let kts = block(k, &t, s);
    let lu_t = block(k, s, s).transpose().lu();
    let y = lu_t.solve(&kts.transpose()).unwrap().transpose(); // K_TS K_SS⁻¹
    let vss = &x * &vtt * &y;
    let vst = -(&x * &vtt);
    let vts = -(&vtt * &y);
    for (a, &i) in s.iter().enumerate() {
        for (b, &j) in s.iter().enumerate() {
            v[(i, j)] = vss[(a, b)];
        }
        for (b, &j) in t.iter().enumerate() {
            v[(i, j)] = vst[(a, b)];
        }
    }
    for (a, &i) in t.iter().enumerate() {
        for (b, &j) in s.iter().enumerate() {
            v[(i, j)] = vts[(a, b)];
        }
        for (b, &j) in t.iter().enumerate() {
            v[(i, j)] = vtt[(a, b)];
        }
    }
    v
}

/// `e^{tK} p` through the symmetrization `Π^{-1/2} K Π^{1/2}`.
pub fn expm_apply(k: &DMatrix<f64>, pi: &[f64], p: &[f64], t: f64) -> Vec<f64> {
    let n = pi.len();
    let sq: Vec<f64> = pi.iter().map(|v| v.sqrt()).collect();
    let b = DMatrix::from_fn(n, n, |i, j| k[(i, j)] * sq[j] / sq[i]);
    let b = (&b + b.transpose()) * 0.5;
    let e = b.symmetric_eigen();
    let y = DVector::from_fn(n, |i, _| p[i] / sq[i]);
    let c = e.eigenvectors.transpose() * y;
    let c = DVector::from_fn(n, |i, _| c[i] * (t * e.eigenvalues[i].min(0.0)).exp());
    let z = &e.eigenvectors * c;
    (0..n).map(|i| z[i] * sq[i]).collect()
}

/// Eigenvalues of `Π^{-1/2} A Π^{1/2}` for an `A` self-adjoint in `π`.
pub fn sym_eigenvalues(a: &DMatrix<f64>, pi: &[f64]) -> Vec<f64> {
    let n = pi.len();
    let b = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * pi[j].sqrt() / pi[i].sqrt());
    let b = (&b + b.transpose()) * 0.5;
    b.symmetric_eigen().eigenvalues.iter().copied().collect()
}

pub fn pi_norm(v: &[f64], pi: &[f64]) -> f64 {
    v.iter().zip(pi).map(|(a, p)| a * a / p).sum::<f64>().sqrt()
}

/// π-induced operator norm of a square matrix: spectral norm of `Π^{-1/2} A Π^{1/2}`.
pub fn pi_op_norm(a: &DMatrix<f64>, pi: &[f64]) -> f64 {
    let n = pi.len();
    let b = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * pi[j].sqrt() / pi[i].sqrt());
    b.singular_values().max()
}

/// Contracts greedily by the library's own rule and returns the state after
/// `steps` steps (or at exhaustion).
pub fn contract(k: &RateMatrix<f64>, steps: usize) -> ContractionState<f64> {
    let mut st = ContractionState::new(k, &Tolerances::default());
    for _ in 0..steps {
        match st.select_steady() {
            rcmc::Steady::Pivot(j) => st.schur_step(j).unwrap(),
            rcmc::Steady::Exhausted => break,
        }
    }
    st
}

/// Dense `V` as produced by the library, column by column.
pub fn library_v(st: &ContractionState<f64>, variant: Variant) -> DMatrix<f64> {
    let n = st.n();
    let mut v = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = rcmc::apply_v(st, variant, &e).unwrap();
        for i in 0..n {
            v[(i, j)] = col[i];
        }
    }
    v
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `σ(K_SS)`, `ρ(D)` and `max_{i≠j} K_ij/π_i` from dense eigensolves.
pub fn bound_inputs(k: &DMatrix<f64>, pi: &[f64], s: &[usize]) -> (f64, f64, f64) {
    let n = pi.len();
    let t = complement(n, s);
    let pis: Vec<f64> = s.iter().map(|&i| pi[i]).collect();
    let pit: Vec<f64> = t.iter().map(|&i| pi[i]).collect();
    let sigma = sym_eigenvalues(&block(k, s, s), &pis).iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let rho = sym_eigenvalues(&schur(k, s), &pit).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut off = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = off.max(k[(i, j)] / pi[i]);
            }
        }
    }
    (sigma, rho, off)
}

/// Per-eigenvalue `min(1, α, β)` and the π-coefficients of `p`, computed from
/// a nalgebra eigensolve.
pub fn bound_terms(k: &DMatrix<f64>, pi: &[f64], s: &[usize], t: f64, p: &[f64], variant: Variant) -> (Vec<f64>, Vec<f64>) {
    let n = pi.len();
    let (sigma, rho, off) = bound_inputs(k, pi, s);
    let sq: Vec<f64> = pi.iter().map(|v| v.sqrt()).collect();
    let b = DMatrix::from_fn(n, n, |i, j| k[(i, j)] * sq[j] / sq[i]);
    let e = ((&b + b.transpose()) * 0.5).symmetric_eigen();
    // ⟨u_k, p⟩_π with u_k = Π^{1/2} v_k equals v_kᵀ Π^{-1/2} p
    let y = DVector::from_fn(n, |i, _| p[i] / sq[i]);
    let coef: Vec<f64> = (0..n).map(|c| e.eigenvectors.column(c).dot(&y)).collect();
    let lam_max = e.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let terms = (0..n)
        .map(|c| {
            let l = e.eigenvalues[c].min(0.0);
            let x = if l.abs() <= 1e-12 * lam_max { 0.0 } else { l.abs() };
            let ex = (-t * x).exp();
            let alpha = if x == 0.0 { f64::INFINITY } else { rho / x + ex };
            let head = match variant {
                Variant::TypeA => x + (2.0 * off * x).sqrt(),
                Variant::TypeB => x,
            };
            let beta = head / sigma + 1.0 - ex;
            1f64.min(alpha).min(beta)
        })
        .collect();
    (terms, coef)
}

pub fn bound_oracle(k: &DMatrix<f64>, pi: &[f64], s: &[usize], t: f64, p: &[f64], variant: Variant) -> f64 {
    let (terms, coef) = bound_terms(k, pi, s, t, p, variant);
    let pn = pi_norm(p, pi);
    terms.iter().zip(&coef).map(|(m, c)| c.abs() / pn * m).sum::<f64>().min(1.0)
}

pub fn expected_bound_oracle(k: &DMatrix<f64>, pi: &[f64], s: &[usize], t: f64, variant: Variant) -> f64 {
    let n = pi.len();
    let (terms, _) = bound_terms(k, pi, s, t, &vec![1.0 / n as f64; n], variant);
    (terms.iter().map(|m| m * m).sum::<f64>() / n as f64).sqrt().min(1.0)
}
