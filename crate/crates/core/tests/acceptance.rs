//! Acceptance suite: one PASS/FAIL line per criterion, oracles computed here.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use walklab::affine::{self, critical_model};
use walklab::fiber::{self, CoinCocycle};
use walklab::fields::PAdic;
use walklab::harmonic;
use walklab::linalg::growth::{Heisenberg, Lattice};
use walklab::linalg::{cayley_growth_degree, contraction_subgroup_padic, contraction_subgroup_real, SquareMatrix};
use walklab::markov::{Bins, MarkovSystem};
use walklab::measures::{total_variation, Binning, Zk};
use walklab::models;
use walklab::projective::{self, Bump, Mat, PointedVector, ProjPoint, Vect};
use walklab::transfer;
use walklab::walk::{chung_fuchs, recurrence_classifier, ClassifierConfig, Verdict, WalkConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

struct Checks(Vec<(bool, String)>);

impl Checks {
    fn new() -> Self {
        Checks(Vec::new())
    }
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.0.push((ok, what.into()));
    }
    fn done(self) -> Outcome {
        let pass = self.0.iter().all(|c| c.0);
        let detail = self.0.iter().map(|(ok, s)| format!("{}{}", if *ok { "" } else { "!! " }, s)).collect::<Vec<_>>().join("; ");
        Outcome { pass, detail }
    }
}

fn r2_log_fit(ns: &[usize], s: impl Fn(usize) -> f64) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|n| (*n as f64).ln()).collect();
    let ys: Vec<f64> = ns.iter().map(|n| s(*n)).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn log_grid(lo: usize, hi: usize, pts: usize) -> Vec<usize> {
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut g: Vec<usize> = (0..pts).map(|i| (a + (b - a) * i as f64 / (pts - 1) as f64).exp().round() as usize).collect();
    g.dedup();
    g
}

fn criterion_1() -> Outcome {
    let mut c = Checks::new();
    let n = 10_000;
    // Exact return probabilities: P(S_2m = 0) for ℤ and its square for ℤ² (rotated coordinates).
    let mut p1 = vec![0.0; n + 1];
    let mut r = 1.0;
    for k in 0..=n {
        if k % 2 == 0 {
            if k > 0 {
                let m = (k / 2) as f64;
                r *= (2.0 * m - 1.0) / (2.0 * m);
            }
            p1[k] = r;
        }
    }
    let exact = |d: i32, k: usize| -> f64 { (0..=k).map(|j| p1[j].powi(d)).sum() };
    let grid = log_grid(100, n, 24);

    let cfg1 = WalkConfig::new(Zk::<1>::simple_walk(), Zk([0]), n, 4000, 101).unwrap();
    let rows1 = chung_fuchs(&cfg1, &|x: &Zk<1>| x.0 == [0]);
    let z1 = &rows1[n];
    let e1 = exact(1, n);
    c.check((z1.running_sum - e1).abs() < 4.0 * z1.running_stderr, format!("Z1 S(1e4)={:.3}±{:.3} exact {:.3}", z1.running_sum, z1.running_stderr, e1));

    let cfg2 = WalkConfig::new(Zk::<2>::simple_walk(), Zk([0, 0]), n, 10_000, 102).unwrap();
    let rows2 = chung_fuchs(&cfg2, &|x: &Zk<2>| x.0 == [0, 0]);
    let r2 = r2_log_fit(&grid, |k| rows2[k].running_sum);
    let r2_exact = r2_log_fit(&grid, |k| exact(2, k));
    let z2 = &rows2[n];
    let e2 = exact(2, n);
    c.check(r2 > 0.98, format!("Z2 log-fit R²={r2:.4} (exact {r2_exact:.4})"));
    c.check((z2.running_sum - e2).abs() < 4.0 * z2.running_stderr, format!("Z2 S(1e4)={:.4}±{:.4} exact {:.4}", z2.running_sum, z2.running_stderr, e2));
    let cls = recurrence_classifier(&rows2, &ClassifierConfig::default());
    c.check(cls.verdict == Verdict::RecurrentConsistent, format!("Z2 verdict {:?}", cls.verdict));

    let n3 = 4000;
    let cfg3 = WalkConfig::new(Zk::<3>::simple_walk(), Zk([0, 0, 0]), n3, 20_000, 103).unwrap();
    let rows3 = chung_fuchs(&cfg3, &|x: &Zk<3>| x.0 == [0, 0, 0]);
    let tail = rows3.iter().skip(2000).map(|r| r.estimate).fold(0.0, f64::max);
    c.check(tail < 1e-3, format!("Z3 max P(X_k=0), k≥2000: {tail:.2e}"));
    // Green function at the origin minus the local-CLT tail beyond N.
    let green = 1.516_386_059_151_978;
    let m = (n3 / 2) as f64;
    let tail_sum = 4.0 * (3.0 / (4.0 * PI)).powf(1.5) / m.sqrt();
    let z3 = &rows3[n3];
    c.check(
        (z3.running_sum - (green - tail_sum)).abs() < 4.0 * z3.running_stderr + 2e-3,
        format!("Z3 S(4000)={:.4}±{:.4} oracle {:.4}", z3.running_sum, z3.running_stderr, green - tail_sum),
    );
    let cls3 = recurrence_classifier(&rows3, &ClassifierConfig::default());
    c.check(cls3.verdict == Verdict::TransientConsistent, format!("Z3 verdict {:?}", cls3.verdict));
    c.done()
}

fn heisenberg_balls(n_max: usize) -> Vec<u64> {
    let mut seen: HashSet<(i64, i64, i64)> = HashSet::new();
    let mut frontier = vec![(0i64, 0i64, 0i64)];
    seen.insert((0, 0, 0));
    let mut sizes = vec![1u64];
    for _ in 0..n_max {
        let mut next = Vec::new();
        for (a, b, cc) in frontier {
            for g in [(a + 1, b, cc), (a - 1, b, cc), (a, b + 1, cc + a), (a, b - 1, cc - a)] {
                if seen.insert(g) {
                    next.push(g);
                }
            }
        }
        sizes.push(seen.len() as u64);
        frontier = next;
    }
    sizes
}

fn criterion_2() -> Outcome {
    let mut c = Checks::new();
    let z2 = cayley_growth_degree(&Lattice(2), 40, walklab::linalg::growth::DEFAULT_BUDGET);
    let oracle: Vec<u64> = (0..=40u64).map(|n| 2 * n * n + 2 * n + 1).collect();
    c.check(z2.ball_sizes == oracle, "Z2 ball sizes equal 2n²+2n+1");
    c.check((z2.degree - 2.0).abs() <= 0.1, format!("Z2 degree {:.3}", z2.degree));
    let h = cayley_growth_degree(&Heisenberg, 40, walklab::linalg::growth::DEFAULT_BUDGET);
    c.check(!h.truncated && h.ball_sizes == heisenberg_balls(40), format!("Heisenberg balls match BFS oracle (|B_40|={})", h.ball_sizes.last().unwrap()));
    c.check((h.degree - 4.0).abs() <= 0.3, format!("Heisenberg degree {:.3}", h.degree));
    c.done()
}

fn frob(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn criterion_3() -> Outcome {
    let mut c = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut bad_iff, mut bad_delta, mut worst_orbit, mut nontrivial, mut lib_orbit) = (0, 0, 0.0f64, 0, 0.0f64);
    let trials = 240;
    for t in 0..trials {
        let d = 2 + t % 2;
        let equal_moduli = t % 5 == 0;
        let base = (rng.gen::<f64>() * 2.0 - 1.0).exp();
        let lam: Vec<f64> = (0..d)
            .map(|_| {
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                if equal_moduli { sign * base } else { sign * (rng.gen::<f64>() * 3.0 - 1.5).exp() }
            })
            .collect();
        let s = DMatrix::<f64>::from_fn(d, d, |i, j| if i == j { 2.0 } else { 0.0 } + rng.gen::<f64>() * 2.0 - 1.0);
        let s_inv = s.clone().try_inverse().unwrap();
        let g = &s * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(lam.clone())) * &s_inv;
        let rows: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| g[(i, j)]).collect()).collect();
        let data = contraction_subgroup_real(&SquareMatrix::from_rows(rows).unwrap(), 1e-9).unwrap();
        let mut oracle = 1.0;
        for a in &lam {
            for b in &lam {
                let r = a.abs() / b.abs();
                if r < 1.0 - 1e-9 {
                    oracle *= r;
                }
            }
        }
        if (!data.is_trivial()) != (data.delta < 1.0 - 1e-9) || (!data.is_trivial()) != (oracle < 1.0 - 1e-9) {
            bad_iff += 1;
        }
        if (data.delta - oracle).abs() > 1e-7 * oracle.max(1e-300) {
            bad_delta += 1;
        }
        if !data.is_trivial() {
            nontrivial += 1;
        }
        let g_inv = g.clone().try_inverse().unwrap();
        let spread = lam.iter().map(|x| x.abs()).fold(0.0, f64::max) / lam.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        if !data.is_trivial() {
            lib_orbit = lib_orbit.max(data.orbit_error);
        }
        for dir in &data.directions {
            // Floating-point rounding grows like ε·(spread/rate)ⁿ; stop before it reaches 1e-9.
            let steps = ((1e-9 / f64::EPSILON).ln() / (spread / dir.rate).ln()).floor().clamp(1.0, 20.0) as i32;
            let e = DMatrix::from_row_slice(d, d, dir.e.entries());
            let (mut gn, mut gn_inv) = (DMatrix::<f64>::identity(d, d), DMatrix::<f64>::identity(d, d));
            for n in 1..=steps {
                gn = &g * gn;
                gn_inv = gn_inv * &g_inv;
                let ratio = frob(&(&gn * &e * &gn_inv)) / frob(&e);
                let want = dir.rate.powi(n);
                worst_orbit = worst_orbit.max((ratio - want).abs() / want);
            }
        }
    }
    c.check(bad_iff == 0, format!("real: {trials} matrices, {nontrivial} nontrivial, iff violations {bad_iff}"));
    c.check(bad_delta == 0, format!("real: Δ mismatches vs eigenvalue oracle {bad_delta}"));
    c.check(worst_orbit < 1e-6, format!("real: worst orbit-rate relative error {worst_orbit:.2e}"));
    c.check(lib_orbit < 1e-6, format!("real: worst reported orbit error {lib_orbit:.2e}"));

    let (mut p_bad, mut p_total) = (0, 0);
    for p in [2u32, 5] {
        for _ in 0..100 {
            let v1 = rng.gen_range(0..4u32);
            let v2 = rng.gen_range(0..4u32);
            let unit = |r: &mut ChaCha8Rng| loop {
                let u = r.gen_range(1..20i64);
                if u % p as i64 != 0 {
                    break u * if r.gen::<bool>() { 1 } else { -1 };
                }
            };
            let (u1, u2) = (unit(&mut rng), unit(&mut rng));
            let (l1, l2) = ((p as i64).pow(v1) * u1, (p as i64).pow(v2) * u2);
            let (s, t) = (rng.gen_range(-4..=4i64), rng.gen_range(-4..=4i64));
            // S = [[1, s], [t, 1+st]] has det 1 and S⁻¹ = [[1+st, −s], [−t, 1]].
            let sm = [[1, s], [t, 1 + s * t]];
            let si = [[1 + s * t, -s], [-t, 1]];
            let dg = [l1, l2];
            let gm: Vec<Vec<PAdic>> = (0..2)
                .map(|i| (0..2).map(|j| PAdic::from_i64((0..2).map(|k| sm[i][k] * dg[k] * si[k][j]).sum(), p, 32)).collect())
                .collect();
            let data = contraction_subgroup_padic(&SquareMatrix::from_rows(gm).unwrap()).unwrap();
            let oracle = if v1 == v2 { 1.0 } else { (p as f64).powi(-(v1 as i32 - v2 as i32).abs()) };
            let ok = (!data.is_trivial()) == (data.delta < 1.0 - 1e-9) && (data.delta - oracle).abs() < 1e-12 && data.is_trivial() == (v1 == v2);
            if !ok {
                p_bad += 1;
            }
            p_total += 1;
        }
    }
    c.check(p_bad == 0, format!("p-adic (p=2,5): {p_total} matrices, violations {p_bad}"));
    c.done()
}

fn criterion_4() -> Outcome {
    let mut c = Checks::new();
    let mu = critical_model().real_measure().unwrap();
    let n = 10_000;
    let r = affine::affine_ratio_equidistribution(&mu, &[0.0, 3.0], 5.0, n, &[n / 10, n], 100_000, 41);
    let finals: Vec<f64> = r.ratios.iter().map(|rs| rs.last().copied().flatten().unwrap_or(f64::NAN)).collect();
    let agree = (finals[0] - finals[1]).abs() / finals[0].min(finals[1]);
    c.check(agree < 0.10, format!("ratio Σφ/Σu at n=1e4: {:.4} vs {:.4} (rel diff {:.3})", finals[0], finals[1], agree));
    let inv = affine::invariant_measure_affine(&mu, 0.0, &[10.0, 20.0], n, 2000, 42).unwrap();
    c.check(inv.defect < 0.05, format!("Cesàro defect {:.4}", inv.defect));
    c.done()
}

fn criterion_5() -> Outcome {
    let mut c = Checks::new();
    let law = critical_model();
    let mu = law.real_measure().unwrap();
    let (r, _) = affine::ladder_sample(&mu, 100_000, 1000, (10, 1000), 51);
    let (lo, hi) = r.m_tau.ci95();
    c.check(r.m_tau.mean < 0.0 && hi < 0.0, format!("m_tau {:.4} CI [{lo:.4}, {hi:.4}]", r.m_tau.mean));
    // τ = 2k+1 with probability Catalan(k) / 2^{2k+1}.
    let catalan = |k: u64| -> f64 { (0..k).fold(1.0, |acc, i| acc * (2.0 * (2 * i + 1) as f64) / (i + 2) as f64) };
    for (t, k) in [(1usize, 0u64), (3, 1)] {
        let oracle = catalan(k) / 2f64.powi(2 * k as i32 + 1);
        let e = r.p_tau(t);
        let sd = (oracle * (1.0 - oracle) / r.chains as f64).sqrt();
        c.check((e.mean - oracle).abs() < 3.0 * sd, format!("P(τ={t}) {:.4} vs {oracle:.4}", e.mean));
    }
    c.check(r.no_upward_trend(), format!("sup √t·P(τ>t) {:.3}, slope CI [{:.2e}, {:.2e}]", r.tail_sup, r.trend.slope_ci.0, r.trend.slope_ci.1));
    let inv = affine::invariant_measure_affine(&mu, 0.0, &[8.0, 16.0, 32.0], 20_000, 2000, 52).unwrap();
    let min_ratio = inv.growth_ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>();
    c.check(min_ratio >= 1.5, format!("window-mass growth per doubling {:?} (increments {:?})", fmt(&inv.growth_ratios), fmt(&inv.growth_increments)));
    c.done()
}

fn criterion_6() -> Outcome {
    let mut c = Checks::new();
    let pair = models::hyperbolic_pair(0.0);
    let seeds: Vec<_> = (0..4).map(|i| ProjPoint::from_angle(i as f64 * 0.7)).collect();
    let rho = projective::furstenberg_sample(&pair, &seeds, 60, 2000, 61, 32);
    let sys = fiber::NormCocycle { rho: rho.nu.points.iter().map(|a| ProjPoint::from_angle(*a)).collect() };
    let v = fiber::cocycle_violation(&sys, &pair, 5000, 62);
    c.check(v <= 1e-9, format!("norm-cocycle identity violation {v:.1e}"));
    let coin = CoinCocycle { integer: true };
    let fair = CoinCocycle::measure(0.0);
    let vc = fiber::cocycle_violation(&coin, &fair, 5000, 63);
    c.check(vc <= 1e-9, format!("coin cocycle violation {vc:.1e}"));
    let d = fiber::drift(&coin, &fair, 10_000, 64);
    c.check(d.mean.abs() <= 1.96 * d.stderr + 1e-15, format!("symmetric drift {:.2e} ± {:.2e}", d.mean, d.stderr));
    let horizon = 1_000_000;
    let r = fiber::birkhoff_recurrence(&coin, &fair, (-1.0, 1.0), 0.0, horizon, 1000, 65);
    let frac = r.fraction_with_at_least(100);
    c.check(frac >= 0.99, format!("zero drift: ≥100 visits to [-1,1] by 1e6 in {frac:.3} of chains"));
    // Brownian local-time oracle: three sites, visits ≈ 3·√n·|Z|.
    let oracle = 1.0 - libm::erf(100.0 / (3.0 * (horizon as f64).sqrt()) / 2f64.sqrt());
    let sd = (oracle * (1.0 - oracle) / 1000.0).sqrt();
    c.check((frac - oracle).abs() < 3.0 * sd + 0.005, format!("visit fraction vs local-time oracle {oracle:.4}"));
    let e = fiber::birkhoff_recurrence(&CoinCocycle::default(), &CoinCocycle::measure(0.1), (-1.0, 1.0), 0.0, horizon, 1000, 66);
    c.check(e.escape_fraction() >= 0.99, format!("drift 0.1 escape fraction {:.3}", e.escape_fraction()));
    c.done()
}

fn calibrated_pair() -> walklab::measures::FiniteMeasure<Mat<2>> {
    let l = projective::lyapunov_estimate(&models::hyperbolic_pair(0.0), &ProjPoint::from_angle(0.3), 2000, 20_000, 70);
    models::hyperbolic_pair(-l.furstenberg_integral.mean)
}

fn criterion_7() -> Outcome {
    let mut c = Checks::new();
    let mu = calibrated_pair();
    let x0 = ProjPoint::from_angle(0.3);
    let l = projective::lyapunov_estimate(&mu, &x0, 2000, 20_000, 71);
    c.check(l.lambda.mean.abs() < 1.96 * l.lambda.stderr, format!("λ̂ {:.2e} ± {:.2e}", l.lambda.mean, l.lambda.stderr));

    let s = transfer::variance_sigma2(&mu, 256, transfer::DEFAULT_H).unwrap();
    c.check(s.k_prime.abs() < 1e-3, format!("|k′(0)| {:.2e}", s.k_prime.abs()));
    let clt = projective::clt_variance(&mu, &x0, 2000, 20_000, 72);
    let rel = (s.sigma2 - clt.mean).abs() / clt.mean;
    c.check(rel < 0.10, format!("σ² operator {:.4} vs CLT {:.4}±{:.4}", s.sigma2, clt.mean, clt.stderr));

    let bump = Bump { t0: 0.0, width: 2.5, a: 0.5 };
    let psi = move |th: f64, t: f64| bump.eval(th, t);
    let starts = [PointedVector::from_vector(&Vect::<2>::new(1.0, 0.0)), PointedVector::from_vector(&Vect::<2>::new(0.6, 0.8))];
    let rows = projective::llt_scaled_estimate(&mu, &psi, &starts, &[1000, 2000], 200_000, 73).unwrap();
    let sc = |st: usize, n: usize| rows.iter().find(|r| r.start == st && r.n == n).unwrap().scaled;
    for st in 0..2 {
        let r = sc(st, 2000) / sc(st, 1000);
        c.check((r - 1.0).abs() < 0.10, format!("start {st}: √n Pⁿψ self-ratio {r:.3}"));
    }
    for n in [1000, 2000] {
        let r = sc(1, n) / sc(0, n);
        c.check((r - 1.0).abs() < 0.15, format!("n={n}: cross-start ratio {r:.3}"));
    }
    let seeds: Vec<_> = (0..8).map(|i| ProjPoint::from_angle(i as f64 * 0.39)).collect();
    let nu = projective::furstenberg_sample(&mu, &seeds, 60, 100_000, 74, 64);
    let target = projective::nu_l_integral(&nu.nu.points, &psi, -2.5, 2.5, 200);
    for r in &rows {
        let norm = s.sigma2.sqrt() * (2.0 * PI).sqrt() * r.scaled / target;
        c.check((norm - 1.0).abs() < 0.20, format!("start {} n={}: σ√(2πn)Pⁿψ/(ν⊗l)(ψ) {norm:.3}", r.start, r.n));
    }
    let o = projective::oscillation_stats(&mu, &starts[0], 100_000, 200, 75);
    let f = o.both_ways_fraction(5.0);
    c.check(f >= 0.95, format!("±5 excursions in {f:.3} of chains"));
    let k128 = transfer::spectral_radius_scan(&mu, 128, &[1.0]).unwrap()[0].modulus;
    let k256 = transfer::spectral_radius_scan(&mu, 256, &[1.0]).unwrap()[0].modulus;
    c.check(k128 < 0.999 && (k128 - k256).abs() < 0.01, format!("|k(1)| N=128 {k128:.4}, N=256 {k256:.4}"));

    let radial = transfer::variance_sigma2(&models::rotation_dilation(511), 128, transfer::DEFAULT_H).unwrap();
    let ln2sq = 2f64.ln().powi(2);
    c.check((radial.sigma2 / ln2sq - 1.0).abs() < 0.05, format!("radial σ² {:.5} vs (log 2)² {ln2sq:.5}", radial.sigma2));
    c.done()
}

fn criterion_8() -> Outcome {
    let mut c = Checks::new();
    let mu = calibrated_pair();
    let e = transfer::leading_eigen(&transfer::build_operator(&mu, 256, 0.0).unwrap()).unwrap();
    let dens = transfer::coarsen(&e.density.unwrap(), 64);
    let seeds: Vec<_> = (0..8).map(|i| ProjPoint::from_angle(i as f64 * 0.39)).collect();
    let f = projective::furstenberg_sample(&mu, &seeds, 60, 100_000, 81, 64);
    let grid = Binning::projective(64);
    let fh = f.nu.histogram(grid).normalized();
    let sys: MarkovSystem<Mat<2>, ProjPoint<2>> = MarkovSystem::new(mu.clone());
    let idx = move |x: &ProjPoint<2>| grid.index(x.angle());
    let bins = Bins { count: 64, index: &idx };
    let one = |_: &ProjPoint<2>| 1.0;
    let ces = sys.cesaro_invariant_measure(&one, &ProjPoint::from_angle(0.3), 2000, 500, 82, &bins).unwrap();
    let total: f64 = ces.masses.iter().sum();
    let cn: Vec<f64> = ces.masses.iter().map(|m| m / total).collect();
    let tv = |a: &[f64], b: &[f64]| 0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
    for (name, a, b) in [("density-Furstenberg", &dens, &fh), ("density-Cesàro", &dens, &cn), ("Furstenberg-Cesàro", &fh, &cn)] {
        let d = tv(a, b);
        c.check(d < 0.07, format!("TV {name} {d:.4}"));
        assert!((d - total_variation(a, b)).abs() < 1e-12);
    }
    c.done()
}

fn criterion_9() -> Outcome {
    let mut c = Checks::new();
    let mu = harmonic::uniform4();
    let ab = harmonic::abelianized_recurrence(&mu, 10_000, 10_000, 91, 1, &ClassifierConfig::default()).unwrap();
    let grid = log_grid(100, 10_000, 24);
    let r2 = r2_log_fit(&grid, |k| ab.rows[k].running_sum);
    c.check(ab.classification.verdict == Verdict::RecurrentConsistent && r2 > 0.98, format!("abelianized walk {:?}, R² {r2:.4}", ab.classification.verdict));
    let nu = harmonic::nu_sample(&mu, 200, 100_000, 92, 128);
    let col = nu.collapse_fraction(1e-6);
    c.check(col >= 0.99, format!("collapse < 1e-6 at n=200 in {col:.4} of chains"));
    c.check(nu.defect < 0.05, format!("ν̂ stationarity defect {:.4}", nu.defect));
    let scales = harmonic::log_scales(1e-3, 1e-1, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(93);
    let uniform: Vec<f64> = (0..100_000).map(|_| rng.gen::<f64>() * PI).collect();
    let leb = harmonic::singularity_diagnostics(&uniform, &scales, 2000, 10, 94).unwrap();
    c.check((leb.mean_local_dim - 1.0).abs() <= 0.02, format!("Lebesgue control dim {:.4}", leb.mean_local_dim));
    let dirac = harmonic::singularity_diagnostics(&vec![0.7; 1000], &scales, 100, 4, 95).unwrap();
    c.check(dirac.mean_local_dim.abs() < 0.02, format!("Dirac control dim {:.4}", dirac.mean_local_dim));
    let s = harmonic::singularity_diagnostics(&nu.nu.points, &scales, 2000, 12, 96).unwrap();
    c.check(s.mean_local_dim < 0.99 && s.ci.1 < 1.0, format!("ν̂ mean local dim {:.4} CI [{:.4}, {:.4}]", s.mean_local_dim, s.ci.0, s.ci.1));
    c.done()
}

fn cli(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = walklab::cli::run(std::iter::once("walklab").chain(args.iter().copied()), &mut out, &mut err);
    (code, out)
}

fn criterion_10() -> Outcome {
    let mut c = Checks::new();
    let cmds: Vec<Vec<&str>> = vec![
        vec!["recur", "--seed", "7", "--N", "300", "--chains", "500"],
        vec!["markov", "--seed", "7", "--horizon", "300", "--chains", "200"],
        vec!["markov", "--seed", "7", "--mode", "ratio", "--horizon", "300", "--chains", "200"],
        vec!["markov", "--seed", "7", "--mode", "property-r", "--horizon", "300", "--chains", "100"],
        vec!["furstenberg", "--seed", "7", "--chains", "500", "--lyapunov-n", "100"],
        vec!["llt", "--seed", "7", "--n", "50,100", "--chains", "500", "--nu-chains", "500", "--bins", "64", "--rescale", "auto", "--calib-chains", "200", "--calib-n", "200"],
        vec!["oscillate", "--seed", "7", "--horizon", "2000", "--chains", "70", "--rescale", "auto", "--calib-chains", "200", "--calib-n", "200"],
        vec!["spectrum", "--bins", "32", "--seed", "7", "--rescale", "auto", "--calib-chains", "200", "--calib-n", "200"],
        vec!["fiber", "--seed", "7", "--horizon", "3000", "--chains", "130"],
        vec!["fiber", "--seed", "7", "--system", "norm-pair", "--horizon", "2000", "--chains", "70"],
        vec!["affine", "--seed", "7", "--horizon", "3000", "--chains", "130"],
        vec!["affine", "--seed", "7", "--field", "padic:3", "--a-law", "3,1/3", "--horizon", "3000", "--chains", "130", "--window", "2"],
        vec!["affine", "--seed", "7", "--mode", "ladder", "--horizon", "300", "--chains", "500", "--trend-range", "10,300"],
        vec!["harmonic", "--seed", "7", "--chains", "3000", "--abel-horizon", "300", "--abel-chains", "200"],
        vec!["structure", "contraction", "--entries", "2,1;0,0.5"],
        vec!["structure", "eigen", "--field", "padic:5", "--entries", "5,1;0,1"],
        vec!["structure", "growth", "--group", "heisenberg", "--n-max", "12"],
    ];
    let mut bad = Vec::new();
    for args in &cmds {
        let mut outs = Vec::new();
        for w in ["1", "1", "3", "8"] {
            let mut full: Vec<&str> = args.clone();
            full.extend(["--workers", w]);
            outs.push(cli(&full));
        }
        let ok = outs[0].0 == 0 && outs.iter().all(|o| o == &outs[0]);
        if !ok {
            bad.push(args.join(" "));
        }
    }
    c.check(bad.is_empty(), format!("{} invocations × worker counts 1,1,3,8; mismatches: {:?}", cmds.len(), bad));
    c.done()
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("recurrence dichotomy", criterion_1),
        ("growth degrees", criterion_2),
        ("contraction data vs module", criterion_3),
        ("ratio equidistribution", criterion_4),
        ("ladder epochs and infinite mass", criterion_5),
        ("cocycles over compact bases", criterion_6),
        ("zero-exponent local limit suite", criterion_7),
        ("consistency triangle", criterion_8),
        ("free subgroup of SL(2,Z)", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = Vec::new();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name} ({:.1}s): {}", k + 1, t.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
