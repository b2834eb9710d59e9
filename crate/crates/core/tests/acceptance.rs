//! Acceptance criteria AC1–AC11, one PASS/FAIL line each.
//!
//! Run with `cargo test -p rcmc --test acceptance`; append `-- AC4 AC9` to run
//! a subset.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rcmc::analysis::{evaluate_record, OriginalOptions, record_inputs, ExactOracle, Precision, DENSE_LIMIT};
use rcmc::{
    build_canonical, build_from_laplacian, dense_eigendecompose, expected_error_bound, optimal_time, original_rcmc,
    project_pi, run, synthesize, validate, ContractionState, PiMetric, RateMatrix, RunOptions, SparseMatrix, Steady,
    SynthParams, TimeMethod, Tolerances, Variant,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn to_na(d: &rcmc::dense::DenseMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(d.n_rows(), d.n_cols(), |i, j| d[(i, j)])
}

fn opts(variant: Variant, time_method: TimeMethod) -> RunOptions {
    RunOptions { variant, time_method, ..RunOptions::default() }
}

fn check_reduced(k: &RateMatrix<f64>, st: &ContractionState<f64>, tol: f64) -> Result<(), String> {
    let (t, d) = st.schur_dense();
    for b in 0..t.len() {
        let mut sum = 0.0;
        let mut big = 0.0f64;
        for a in 0..t.len() {
            let v = d[(a, b)];
            sum += v;
            big = big.max(v.abs());
            if a != b {
                ensure(v >= 0.0, || format!("negative off-diagonal {v:e}"))?;
                let (x, y) = (v * k.pi()[t[b]], d[(b, a)] * k.pi()[t[a]]);
                ensure((x - y).abs() <= tol * x.abs().max(y.abs()), || format!("detailed balance {x:e} vs {y:e}"))?;
            }
        }
        ensure(d[(b, b)] <= 0.0, || "positive diagonal".into())?;
        ensure(sum.abs() <= tol * big.max(1e-300), || format!("column sum {sum:e} of column max {big:e}"))?;
    }
    Ok(())
}

fn ac1() -> Outcome {
    let mut r = common::rng(101);
    let tol = Tolerances::default();
    let mut steps = 0;
    for case in 0..200 {
        let n = r.gen_range(2..=50);
        let density = r.gen_range(0.1..1.0);
        let k = if case % 2 == 0 {
            let l = common::random_laplacian(&mut r, n, density, 2.0);
            let pi = common::random_pi(&mut r, n, 2.0);
            build_from_laplacian(&l, &pi, &tol).map_err(|e| format!("case {case}: {e}"))?
        } else {
            let params = SynthParams {
                n,
                edge_density: density,
                energy_spread_kjmol: 40.0,
                barrier_spread_kjmol: 60.0,
                temperature: 300.0,
                seed: r.gen(),
            };
            let net = synthesize(&params).map_err(|e| e.to_string())?;
            build_canonical(&net, &tol).map_err(|e| format!("case {case}: {e}"))?.rates
        };
        validate(&SparseMatrix::from_dense(&k.to_dense()), k.pi(), &tol).map_err(|e| format!("case {case}: {e}"))?;
        let mut st = ContractionState::new(&k, &tol);
        while let Steady::Pivot(j) = st.select_steady() {
            st.schur_step(j).map_err(|e| e.to_string())?;
            check_reduced(&k, &st, 1e-9).map_err(|e| format!("case {case} step {}: {e}", st.contracted().len()))?;
            steps += 1;
        }
    }
    Ok(format!("200 instances, {steps} Schur steps checked"))
}

fn ac2() -> Outcome {
    let mut r = common::rng(202);
    let mut worst = [0.0f64; 4];
    for case in 0..100 {
        let n = r.gen_range(2..=20);
        let density = r.gen_range(0.1..1.0);
        let k = common::random_system(&mut r, n, density);
        let kd = common::dense(&k);
        let knorm = common::max_abs(&kd);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        let s = &perm[..r.gen_range(0..n)];
        let mut st = ContractionState::new(&k, &Tolerances::default());
        let order: Vec<usize> = s.iter().copied().chain(common::complement(n, s)).collect();
        st.enable_m_factor(&order).map_err(|e| e.to_string())?;
        for &j in s {
            st.schur_step(j).map_err(|e| e.to_string())?;
        }
        let pinv = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, k.pi().iter().map(|p| 1.0 / p)));
        for variant in [Variant::TypeA, Variant::TypeB] {
            let v = common::library_v(&st, variant);
            let tag = || format!("case {case} {variant}");
            if variant == Variant::TypeA {
                ensure(v.min() >= -1e-12, || format!("{}: V1 min {:e}", tag(), v.min()))?;
            }
            for j in 0..n {
                let c = v.column(j).sum();
                ensure((c - 1.0).abs() <= 1e-10, || format!("{}: V2 column sum {c}", tag()))?;
            }
            let sa = &pinv * &v;
            let sa_res = (&sa - sa.transpose()).amax() / sa.amax();
            worst[0] = worst[0].max(sa_res);
            ensure(sa_res <= 1e-9, || format!("{}: V3 residual {sa_res:e}", tag()))?;
            if !s.is_empty() {
                let q = (common::block(&kd, s, &(0..n).collect::<Vec<_>>()) * &v).amax();
                worst[1] = worst[1].max(q / knorm);
                ensure(q <= 1e-9 * knorm, || format!("{}: V4 residual {q:e}", tag()))?;
            }
            let ev = common::sym_eigenvalues(&v, k.pi());
            ensure(ev.iter().all(|&l| (-1e-9..=1.0 + 1e-9).contains(&l)), || format!("{}: eigenvalues {ev:?}", tag()))?;
            if variant == Variant::TypeB {
                let idem = common::pi_op_norm(&(&v * &v - &v), k.pi());
                worst[2] = worst[2].max(idem);
                ensure(idem <= 1e-8, || format!("{}: idempotence {idem:e}", tag()))?;
            }
        }
    }
    Ok(format!("100 instances; worst self-adjoint {:.1e}, QSSA {:.1e}, idempotence {:.1e}", worst[0], worst[1], worst[2]))
}

fn ac3() -> Outcome {
    let mut r = common::rng(303);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let n = r.gen_range(2..=20);
        let density = r.gen_range(0.1..1.0);
        let k = common::random_system(&mut r, n, density);
        let p = common::random_simplex_point(&mut r, n);
        let traj = run(&k, &p, &opts(Variant::TypeA, TimeMethod::Diag)).map_err(|e| e.to_string())?;
        let orig = original_rcmc(&k, &p, f64::INFINITY, &OriginalOptions { forced_pivots: Some(&traj.pivots), keep_matrices: false })
            .map_err(|e| e.to_string())?;
        let m = k.metric();
        let pn = m.norm(&p);
        ensure(orig.steps.len() == traj.pivots.len(), || format!("case {case}: step counts differ"))?;
        for (snap, step) in traj.iterates().skip(1).zip(&orig.steps) {
            let d: Vec<f64> = snap.q.iter().zip(&step.q).map(|(a, b)| a - b).collect();
            let e = m.norm(&d) / pn;
            worst = worst.max(e);
            ensure(e <= 1e-10, || format!("case {case} k {}: discrepancy {e:e}", snap.k))?;
        }
    }
    Ok(format!("50 instances, max discrepancy {worst:.1e}"))
}

fn well_conditioned(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> RateMatrix<f64> {
    loop {
        let density = r.gen_range(0.1..1.0);
        let k = common::random_system(r, n, density);
        let eb = dense_eigendecompose(&k, DENSE_LIMIT).unwrap();
        if n < 2 || eb.lambdas[n - 1] / eb.lambdas[1] <= 1e12 {
            return k;
        }
    }
}

fn ac4() -> Outcome {
    let mut r = common::rng(404);
    let (mut checked, mut limited) = (0usize, 0usize);
    let methods = [TimeMethod::Diag, TimeMethod::Eigen, TimeMethod::Gershgorin];
    for case in 0..100 {
        let n = r.gen_range(2..=30);
        let k = well_conditioned(&mut r, n);
        let kd = common::dense(&k);
        let p = common::random_simplex_point(&mut r, n);
        let oracle = ExactOracle::new(&k, Precision::Double, DENSE_LIMIT).map_err(|e| e.to_string())?;
        let eb = oracle.basis_f64();
        for variant in [Variant::TypeA, Variant::TypeB] {
            let o = opts(variant, methods[case % 3]);
            let traj = run(&k, &p, &o).map_err(|e| e.to_string())?;
            for inp in record_inputs(&k, &traj, &o.tol).map_err(|e| e.to_string())? {
                let exact = common::expm_apply(&kd, k.pi(), &p, inp.t);
                let rec = evaluate_record(&eb, &inp, &p, &exact, k.max_scaled_offdiag(), variant);
                ensure(rec.bound_b <= 1.0 && rec.bound_a <= 1.0, || format!("case {case}: bound above 1"))?;
                if rec.precision_limited {
                    limited += 1;
                    continue;
                }
                checked += 1;
                ensure(rec.pi_err <= rec.bound_b + 1e-9, || {
                    format!("case {case} {variant} k {}: Err {:e} > boundB {:e}", rec.k, rec.pi_err, rec.bound_b)
                })?;
            }
        }
    }
    Ok(format!("{checked} snapshots dominated, {limited} precision-limited excluded"))
}

fn ac5() -> Outcome {
    let mut r = common::rng(505);
    let mut checked = 0;
    for case in 0..30 {
        let n = r.gen_range(2..=20);
        let density = r.gen_range(0.1..1.0);
        let k = common::random_system(&mut r, n, density);
        let kd = common::dense(&k);
        let eb = dense_eigendecompose(&k, DENSE_LIMIT).map_err(|e| e.to_string())?;
        let m = k.metric();
        for variant in [Variant::TypeA, Variant::TypeB] {
            for method in [TimeMethod::Diag, TimeMethod::Eigen] {
                let o = opts(variant, method);
                let vertex = |i: usize| {
                    let mut p = vec![0.0; n];
                    p[i] = 1.0;
                    p
                };
                let trajs: Vec<_> = (0..n).map(|i| run(&k, &vertex(i), &o).unwrap()).collect();
                let inputs = record_inputs(&k, &trajs[0], &o.tol).map_err(|e| e.to_string())?;
                for inp in &inputs {
                    let mut mean = 0.0;
                    for (i, traj) in trajs.iter().enumerate() {
                        let snap = traj.iterates().find(|s| s.k == inp.k).unwrap();
                        let p = vertex(i);
                        let x = common::expm_apply(&kd, k.pi(), &p, snap.t);
                        let d: Vec<f64> = snap.q.iter().zip(&x).map(|(a, b)| a - b).collect();
                        mean += m.norm(&d) / m.norm(&p) / n as f64;
                    }
                    let b = rcmc::analysis::BoundInputs {
                        sigma_kss: inp.spectra.sigma_kss,
                        rho_d: inp.spectra.rho_d,
                        offmax: k.max_scaled_offdiag(),
                    };
                    let bound = expected_error_bound(&eb, &b, inp.t, variant);
                    ensure(mean <= bound + 1e-9, || format!("case {case} {variant} {method} k {}: {mean:e} > {bound:e}", inp.k))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} snapshot means within the expected bound"))
}

fn ac6() -> Outcome {
    let mut r = common::rng(606);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a = 10f64.powf(r.gen_range(-6.0..6.0));
        let b = 10f64.powf(r.gen_range(-6.0..6.0));
        let ts = optimal_time(a, b);
        // independent objective: min over λ of max(α, β) is attained where they cross
        let f = |t: f64| {
            let (mut lo, mut hi) = (1e-300f64.ln(), 1e300f64.ln());
            let g = |x: f64| a / x + (-t * x).exp() - (x / b + 1.0 - (-t * x).exp());
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                if g(mid.exp()) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let x = (0.5 * (lo + hi)).exp();
            a / x + (-t * x).exp()
        };
        let decades = 4.0;
        let pts = (1e4 * decades) as usize;
        let (l0, l1) = ((ts * 1e-2).log10(), (ts * 1e2).log10());
        let best = (0..=pts)
            .map(|i| 10f64.powf(l0 + (l1 - l0) * i as f64 / pts as f64))
            .map(|t| (f(t), t))
            .fold((f64::INFINITY, 0.0), |m, v| if v.0 < m.0 { v } else { m });
        let rel = (best.1 / ts - 1.0).abs();
        worst = worst.max(rel);
        ensure(rel <= 0.01, || format!("a {a:e} b {b:e}: grid {:e} vs {ts:e}", best.1))?;
    }
    Ok(format!("20 pairs, worst relative gap {worst:.1e}"))
}

fn exhaustive_projection(w: &[f64], pi: &[f64]) -> Vec<f64> {
    let n = w.len();
    let mut best = (f64::INFINITY, vec![]);
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let mu = (1.0 - idx.iter().map(|&i| w[i]).sum::<f64>()) / idx.iter().map(|&i| pi[i]).sum::<f64>();
        let mut q = vec![0.0; n];
        if idx.iter().any(|&i| w[i] + pi[i] * mu < -1e-15) {
            continue;
        }
        for &i in &idx {
            q[i] = (w[i] + pi[i] * mu).max(0.0);
        }
        let d: f64 = (0..n).map(|i| (q[i] - w[i]).powi(2) / pi[i]).sum();
        if d < best.0 {
            best = (d, q);
        }
    }
    best.1
}

fn ac7() -> Outcome {
    let mut r = common::rng(707);
    let mut worst = 0.0f64;
    for case in 0..500 {
        let n = r.gen_range(1..=12);
        let pi = common::random_pi(&mut r, n, 1.5);
        let scale = 10f64.powf(r.gen_range(-1.0..1.0));
        let w: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0) * scale + 1.0 / n as f64).collect();
        let got = project_pi(&w, &PiMetric::new(pi.clone()).unwrap()).q;
        let oracle = exhaustive_projection(&w, &pi);
        let e = got.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(e);
        ensure(e <= 1e-12, || format!("case {case}: deviation {e:e}"))?;
    }
    for case in 0..10_000 {
        let n = r.gen_range(1..=10);
        let m = PiMetric::new(common::random_pi(&mut r, n, 1.0)).unwrap();
        let w: Vec<f64> = (0..n).map(|_| r.gen_range(-2.0..2.0)).collect();
        let a = common::random_simplex_point(&mut r, n);
        let q = project_pi(&w, &m).q;
        let d1: Vec<f64> = q.iter().zip(&a).map(|(x, y)| x - y).collect();
        let d2: Vec<f64> = w.iter().zip(&a).map(|(x, y)| x - y).collect();
        ensure(m.norm(&d1) <= m.norm(&d2) * (1.0 + 1e-12) + 1e-15, || format!("triple {case}: not contractive"))?;
    }
    Ok(format!("500 oracle cases (max deviation {worst:.1e}), 10000 contraction triples"))
}

fn ac8() -> Outcome {
    let mut r = common::rng(808);
    let (mut wc, mut wm) = (0.0f64, 0.0f64);
    for case in 0..50 {
        let n = r.gen_range(2..=20);
        let density = r.gen_range(0.1..1.0);
        let k = common::random_system(&mut r, n, density);
        let kd = common::dense(&k);
        let order = {
            let st = common::contract(&k, n);
            let mut o = st.contracted().to_vec();
            o.extend(st.uncontracted());
            o
        };
        let mut st = ContractionState::new(&k, &Tolerances::default());
        st.enable_m_factor(&order).map_err(|e| e.to_string())?;
        while let Steady::Pivot(j) = st.select_steady() {
            st.schur_step(j).map_err(|e| e.to_string())?;
            let s = st.contracted().to_vec();
            let c = to_na(&st.chol().to_dense());
            let css = DMatrix::from_fn(s.len(), s.len(), |a, b| c[(s[a], b)]);
            let pinv = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(s.len(), |a, _| 1.0 / k.pi()[s[a]]));
            let kss = common::block(&kd, &s, &s);
            let res = (&css * css.transpose() * pinv + &kss).amax() / kss.amax();
            wc = wc.max(res);
            ensure(res <= 1e-9, || format!("case {case} |S| {}: Cholesky residual {res:e}", s.len()))?;
            let g = st.m_factor().ok_or("M factor missing")?;
            let states = g.states().to_vec();
            if states.is_empty() {
                continue;
            }
            let t = common::complement(n, &s);
            let m = common::m_matrix(&kd, &s);
            let mp = DMatrix::from_fn(states.len(), states.len(), |a, b| {
                m[(t.iter().position(|&x| x == states[a]).unwrap(), t.iter().position(|&x| x == states[b]).unwrap())]
            });
            let res = (to_na(&g.product()) - &mp).amax() / mp.amax();
            wm = wm.max(res);
            ensure(res <= 1e-8, || format!("case {case} |S| {}: M residual {res:e}", s.len()))?;
        }
    }
    Ok(format!("50 instances; worst Cholesky {wc:.1e}, worst M {wm:.1e}"))
}

fn scale_instance() -> Result<RateMatrix<f64>, String> {
    let params = SynthParams {
        n: 2000,
        edge_density: 0.001,
        energy_spread_kjmol: 100.0,
        barrier_spread_kjmol: 150.0,
        temperature: 300.0,
        seed: 7,
    };
    let net = synthesize(&params).map_err(|e| e.to_string())?;
    Ok(build_canonical(&net, &Tolerances::default()).map_err(|e| e.to_string())?.rates)
}

fn timed_run(k: &RateMatrix<f64>, p: &[f64], variant: Variant, method: TimeMethod) -> Result<f64, String> {
    let started = Instant::now();
    let traj = run(k, p, &opts(variant, method)).map_err(|e| e.to_string())?;
    let secs = started.elapsed().as_secs_f64();
    let last = traj.entries.last().ok_or("empty trajectory")?;
    ensure((last.q.iter().sum::<f64>() - 1.0).abs() <= 1e-9, || "final snapshot not conserving".into())?;
    Ok(secs)
}

fn ac9() -> Outcome {
    let k = scale_instance()?;
    let n = k.n();
    let mut p = vec![0.0; n];
    p[0] = 1.0;
    let a_diag = timed_run(&k, &p, Variant::TypeA, TimeMethod::Diag)?;
    let a_gersh = timed_run(&k, &p, Variant::TypeA, TimeMethod::Gershgorin)?;
    let b_diag = timed_run(&k, &p, Variant::TypeB, TimeMethod::Diag)?;
    let a_eigen = timed_run(&k, &p, Variant::TypeA, TimeMethod::Eigen)?;
    let summary = format!(
        "n {n}, nnz {}: A/diag {a_diag:.1}s, A/gershgorin {a_gersh:.1}s, B/diag {b_diag:.1}s, A/eigen {a_eigen:.1}s",
        k.k().nnz()
    );
    let fast = a_diag.max(a_gersh);
    let ok = a_diag < 10.0
        && a_gersh < 10.0
        && b_diag < 30.0
        && a_eigen < 600.0
        && fast <= 3.0 * a_diag.min(a_gersh)
        && a_eigen >= 5.0 * fast;
    if ok {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn ac10() -> Outcome {
    let tol = Tolerances::default();
    let mut found = None;
    for seed in 0..50u64 {
        let params = SynthParams {
            n: 300,
            edge_density: 0.01,
            energy_spread_kjmol: 200.0,
            barrier_spread_kjmol: 250.0,
            temperature: 300.0,
            seed,
        };
        let k = build_canonical(&synthesize(&params).map_err(|e| e.to_string())?, &tol).map_err(|e| e.to_string())?.rates;
        let d: Vec<f64> = (0..k.n()).map(|i| k.get(i, i).abs()).filter(|&v| v > 0.0).collect();
        let range = d.iter().cloned().fold(0.0, f64::max) / d.iter().cloned().fold(f64::INFINITY, f64::min);
        if range >= 1e30 {
            found = Some((k, range));
            break;
        }
    }
    let (k, range) = found.ok_or("no instance with a 30-decade diagonal range")?;
    let mut p = vec![0.0; k.n()];
    p[k.n() - 1] = 1.0;
    let mut snaps = 0;
    for variant in [Variant::TypeA, Variant::TypeB] {
        for method in [TimeMethod::Diag, TimeMethod::Eigen, TimeMethod::Gershgorin] {
            let traj = run(&k, &p, &opts(variant, method)).map_err(|e| format!("{variant} {method}: {e}"))?;
            for s in &traj.entries {
                ensure(s.q.iter().all(|v| v.is_finite()), || format!("{variant} {method} k {}: non-finite", s.k))?;
                let sum: f64 = s.q.iter().sum();
                ensure((sum - 1.0).abs() <= 1e-9, || format!("{variant} {method} k {}: sum {sum}", s.k))?;
                snaps += 1;
            }
        }
    }
    Ok(format!("n {}, diagonal range {range:.1e}, {snaps} snapshots finite and conserving", k.n()))
}

fn ac11() -> Outcome {
    let mut r = common::rng(1111);
    for case in 0..50 {
        let n = r.gen_range(2..=8);
        let density = r.gen_range(0.1..1.0);
        let k = common::random_system(&mut r, n, density);
        let kd = common::dense(&k);
        let traj = run(&k, &vec![1.0 / n as f64; n], &RunOptions::default()).map_err(|e| e.to_string())?;
        let logdet = |idx: &[usize]| if idx.is_empty() { 0.0 } else { common::block(&kd, idx, idx).determinant().abs().ln() };
        let mut s: Vec<usize> = Vec::new();
        for (step, &pivot) in traj.pivots.iter().enumerate() {
            let base = logdet(&s);
            let best = common::complement(n, &s)
                .into_iter()
                .map(|j| {
                    let mut s2 = s.clone();
                    s2.push(j);
                    (logdet(&s2) - base, j)
                })
                .fold((f64::NEG_INFINITY, usize::MAX), |m, v| if v.0 > m.0 { v } else { m });
            ensure(best.1 == pivot, || format!("case {case} step {step}: greedy log-det picks {} but run picked {pivot}", best.1))?;
            s.push(pivot);
        }
    }
    Ok("50 instances, pivot sequences identical".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("AC1", ac1),
        ("AC2", ac2),
        ("AC3", ac3),
        ("AC4", ac4),
        ("AC5", ac5),
        ("AC6", ac6),
        ("AC7", ac7),
        ("AC8", ac8),
        ("AC9", ac9),
        ("AC10", ac10),
        ("AC11", ac11),
    ];
    let limits = [10.0, f64::INFINITY, 30.0, f64::INFINITY, f64::INFINITY, 5.0, f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY];
    // names given on the command line select a subset
    let only: Vec<String> = std::env::args().skip(1).filter(|a| a.starts_with("AC")).collect();
    let mut failed = 0;
    for ((name, f), limit) in criteria.iter().zip(limits) {
        if !only.is_empty() && !only.iter().any(|o| o == name) {
            continue;
        }
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(msg) if secs > limit => Err(format!("{msg}; took {secs:.1}s, limit {limit}s")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("{name} PASS ({secs:.2}s) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("{name} FAIL ({secs:.2}s) {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
