//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! fails. `ACCEPTANCE_ONLY=7,8` restricts the run to the listed criteria.

use std::collections::BTreeMap;
use std::time::Instant;

use dbtrain::array::{complex_normal, dictionary_matrix, steering_vector, transition_matrix};
use dbtrain::estimation::{greedy_map_estimate, greedy_map_update, omp_estimate, posterior_predict, JointTransition, PathPosterior};
use dbtrain::selection::{crlb_single_path, fisher_entries, select_dual_beams_1d, CostTable, DEFAULT_WINDOW};
use dbtrain::sim::{run_scenario, transmit_data_block};
use dbtrain::training::{schedule_frames, ScheduleParams};
use dbtrain::{
    sim_rng, AngleGrid, ArrayGeometry, BeamCodebook, CMatrix, CVector, EstimatorState, KroneckerSensing, MobilityModel,
    PosteriorMode, RMatrix, SensingOperator, SimConfig, SupportPosterior, C64,
};
use dbtrain_cli::runner::run_rows;
use dbtrain_cli::suite::builtin;
use dbtrain_cli::{run_suite, CsvRow, ExpandOptions, RunOptions};
use rand::Rng;
use statrs::function::erf::erfc;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

// ---------------------------------------------------------------- 1

fn conventional_overhead() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for t_c in [1000u64, 500, 200, 100] {
        let params = ScheduleParams { total_symbols: 1_000_000, common_period: t_c, num_common_beams: 32, dedicated: None };
        let s = schedule_frames(&params).expect("valid schedule");
        let overhead = s.training_slots() as f64 / s.total_symbols() as f64;
        let want = 32.0 / t_c as f64;
        pass &= overhead == want;
        parts.push(format!("T_c={t_c}: {:.1}%", 100.0 * overhead));
    }
    let sim = run_scenario(&SimConfig { t_c: 200, total_symbols: 10_000, ..SimConfig::default() }).expect("runs");
    pass &= sim.overhead == 0.16;
    verdict(pass, format!("{} (simulator at T_c=200: {:.1}%; 12.8% for T_c=200 would contradict N_c/T_c = 16%)", parts.join(", "), 100.0 * sim.overhead))
}

// ---------------------------------------------------------------- 2

fn dedicated_overhead() -> Verdict {
    let target = [(500u64, 3.4), (200, 4.1), (100, 5.0)];
    let rate = |burst: u64, t_d: u64| {
        let params = ScheduleParams {
            total_symbols: 1_000_000,
            common_period: 1000,
            num_common_beams: 32,
            dedicated: Some((t_d, burst)),
        };
        let s = schedule_frames(&params).expect("valid schedule");
        100.0 * s.training_slots() as f64 / s.total_symbols() as f64
    };
    let mut pass = true;
    let mut total = Vec::new();
    let mut per_path = Vec::new();
    for (t_d, want) in target {
        let got = rate(2, t_d);
        pass &= (got - want).abs() <= 0.6;
        total.push(format!("T_d={t_d}: {got:.1}% (ref {want}%)"));
        per_path.push(format!("{:.1}%", rate(6, t_d)));
    }
    verdict(
        pass,
        format!(
            "convention N_d=2 beams per burst in total, bursts colliding with cycling skipped: {}; the simulator's 2 beams per path for L=3 gives {}",
            total.join(", "),
            per_path.join("/")
        ),
    )
}

// ---------------------------------------------------------------- 3

fn sensing_oracle() -> Verdict {
    let mut rng = sim_rng(301, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n_b = rng.random_range(2..=16);
        let n_m = rng.random_range(2..=16);
        let m_b = rng.random_range(n_b..=2 * n_b);
        let m_m = rng.random_range(n_m..=2 * n_m);
        let beams = rng.random_range(1..=n_b);
        let combs = rng.random_range(1..=n_m);
        let geom_b = ArrayGeometry::half_wavelength(n_b);
        let geom_m = ArrayGeometry::half_wavelength(n_m);
        let a_b = dictionary_matrix(&geom_b, &AngleGrid::new(m_b).unwrap());
        let a_m = dictionary_matrix(&geom_m, &AngleGrid::new(m_m).unwrap());
        let f = CMatrix::from_fn(n_b, beams, |_, _| complex_normal(&mut rng, 1.0));
        let w = CMatrix::from_fn(n_m, combs, |_, _| complex_normal(&mut rng, 1.0));
        let mut hv = CMatrix::zeros(m_m, m_b);
        for _ in 0..3 {
            let (i, j) = (rng.random_range(0..m_m), rng.random_range(0..m_b));
            hv[(i, j)] = complex_normal(&mut rng, 1.0);
        }
        let phi = KroneckerSensing::new(&f, &w, &a_b, &a_m).unwrap();
        // column-major vec(H^(v)) puts (i, j) at j * M_m + i
        let mut lhs = CVector::zeros(phi.nrows());
        for (flat, h) in hv.iter().enumerate() {
            if h.norm_sqr() > 0.0 {
                lhs += phi.column(flat) * *h;
            }
        }
        let y = w.adjoint() * &a_m * &hv * a_b.adjoint() * &f;
        let rhs = CVector::from_iterator(y.len(), y.iter().copied());
        worst = worst.max((&lhs - &rhs).camax());
        let dense = phi.to_dense() * CVector::from_iterator(hv.len(), hv.iter().copied());
        worst = worst.max((&dense - &rhs).camax());
    }
    verdict(worst <= 1e-10, format!("100 random instances, max |difference| {worst:.2e} (tolerance 1e-10)"))
}

// ---------------------------------------------------------------- 4

fn numerical_fisher(f: &CMatrix, theta: f64, alpha: C64, s2: f64, geom: &ArrayGeometry) -> nalgebra::Matrix3<f64> {
    let mu = |p: [f64; 3]| f.transpose() * steering_vector(geom, p[2]).unwrap().conjugate() * C64::new(p[0], p[1]);
    let p0 = [alpha.re, alpha.im, theta];
    let mu0 = mu(p0);
    let nll = |p: [f64; 3]| (&mu0 - mu(p)).norm_squared() / s2;
    let h = [1e-4, 1e-4, 1e-5];
    let mut j = nalgebra::Matrix3::zeros();
    for a in 0..3 {
        for b in 0..3 {
            let at = |da: f64, db: f64| {
                let mut p = p0;
                p[a] += da;
                p[b] += db;
                nll(p)
            };
            j[(a, b)] = (at(h[a], h[b]) - at(h[a], -h[b]) - at(-h[a], h[b]) + at(-h[a], -h[b])) / (4.0 * h[a] * h[b]);
        }
    }
    j
}

fn crlb_validity() -> Verdict {
    let geom = ArrayGeometry::half_wavelength(16);
    let mut rng = sim_rng(401, 0);

    let mut single_inf = 0;
    for _ in 0..100 {
        let v = CMatrix::from_fn(16, 1, |_, _| complex_normal(&mut rng, 1.0)).normalize();
        let theta = rng.random_range(-0.95..0.95);
        if crlb_single_path(&v, theta, 0.01, 1.0, &geom).unwrap() == f64::INFINITY {
            single_inf += 1;
        }
    }

    let mut worst_rel: f64 = 0.0;
    for _ in 0..50 {
        let t0: f64 = rng.random_range(-0.8..0.8);
        let angles = [t0 + rng.random_range(0.02..0.1), t0 - rng.random_range(0.02..0.1), rng.random_range(-0.9..0.9)];
        let mut f = CMatrix::zeros(16, 3);
        for (k, &t) in angles.iter().enumerate() {
            f.set_column(k, &steering_vector(&geom, t.clamp(-1.0, 1.0)).unwrap());
        }
        let theta = t0 + rng.random_range(-0.03..0.03);
        let alpha = complex_normal(&mut rng, 1.0);
        let s2 = 0.05;
        let v = fisher_entries(&f, theta, alpha, s2, &geom).unwrap();
        let j = numerical_fisher(&f, theta, alpha, s2, &geom);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        let v31 = C64::new(j[(2, 0)], j[(2, 1)]) / 2.0;
        worst_rel = worst_rel.max(rel(v.v11, j[(0, 0)] / 2.0)).max(rel(v.v33, j[(2, 2)])).max((v.v31 - v31).norm() / v31.norm().max(1e-12));
    }

    // ML on a fine grid with the beams the search picks for a known angle
    let grid = AngleGrid::new(64).unwrap();
    let codebook = BeamCodebook::on_grid(&geom, &grid);
    let s2 = 1e-3;
    let table = CostTable::new(&codebook, &geom, &grid, s2).unwrap();
    let theta0 = grid.angle(32);
    let mut dist = vec![0.0; 64];
    dist[32] = 1.0;
    let sel = select_dual_beams_1d(&table, &dist, DEFAULT_WINDOW).unwrap();
    let f = codebook.beams(&sel.indices);
    let crlb = crlb_single_path(&f, theta0, s2, 1.0, &geom).unwrap();
    let resp = |t: f64| f.transpose() * steering_vector(&geom, t).unwrap().conjugate();
    let truth = resp(theta0);
    let score = |y: &CVector, t: f64| {
        let g = resp(t);
        g.dotc(y).norm_sqr() / g.norm_squared()
    };
    let trials = 2000;
    let mut sq = 0.0;
    for _ in 0..trials {
        let y = CVector::from_fn(truth.len(), |k, _| truth[k] + complex_normal(&mut rng, s2));
        let mut best = (theta0, f64::NEG_INFINITY);
        for k in -200..=200 {
            let t = theta0 + k as f64 * 1e-4;
            let s = score(&y, t);
            if s > best.1 {
                best = (t, s);
            }
        }
        let (mut lo, mut hi) = (best.0 - 1e-4, best.0 + 1e-4);
        for _ in 0..50 {
            let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if score(&y, m1) < score(&y, m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        sq += (0.5 * (lo + hi) - theta0).powi(2);
    }
    let ratio = sq / trials as f64 / crlb;

    let pass = single_inf == 100 && worst_rel < 1e-3 && (0.5..=2.0).contains(&ratio);
    verdict(
        pass,
        format!(
            "(a) {single_inf}/100 single beams give +inf; (b) worst relative Fisher error {worst_rel:.1e} over 50 points; (c) beams {:?}, ML variance / CRLB = {ratio:.3} over {trials} trials at 30 dB",
            sel.indices
        ),
    )
}

// ---------------------------------------------------------------- 5

fn estimator_equivalence() -> Verdict {
    let (mb, mm, rows, paths) = (5, 6, 14, 3);
    let mut same = 0;
    for seed in 0..200u64 {
        let mut rng = sim_rng(500 + seed, 0);
        let mut phi = CMatrix::from_fn(rows, mb * mm, |_, _| complex_normal(&mut rng, 1.0));
        for mut c in phi.column_iter_mut() {
            let n = c.norm();
            c /= C64::new(n, 0.0);
        }
        let mut y = CVector::zeros(rows);
        for _ in 0..paths {
            y += phi.column(rng.random_range(0..mb * mm)) * complex_normal(&mut rng, 1.0);
        }
        for v in y.iter_mut() {
            *v += complex_normal(&mut rng, 0.05);
        }
        let state = EstimatorState::new(
            SupportPosterior::uniform(paths, mb, mm, PosteriorMode::Joint),
            1e12,
            0.05,
            JointTransition::identity(mb, mm),
        )
        .unwrap();
        let (map, _) = greedy_map_estimate(&y, &phi, &state);
        if map.support == omp_estimate(&y, &phi, paths).support {
            same += 1;
        }
    }
    verdict(same == 200, format!("{same}/200 instances select the same supports in the same order"))
}

// ---------------------------------------------------------------- 6

fn random_posterior(rng: &mut impl Rng, paths: usize, mb: usize, mm: usize) -> SupportPosterior {
    let mut post = SupportPosterior::uniform(paths, mb, mm, PosteriorMode::Joint);
    for p in &mut post.paths {
        let mut v: Vec<f64> = (0..mb * mm).map(|_| rng.random::<f64>().powi(4)).collect();
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
        *p = PathPosterior::Joint(v);
    }
    post
}

fn joint_vector(post: &SupportPosterior, l: usize) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_iterator(post.num_bins(), (0..post.num_bins()).map(|s| post.prob(l, s)))
}

fn posterior_correctness() -> Verdict {
    let mut rng = sim_rng(601, 0);
    let (mb, mm) = (12, 10);
    let grid_b = AngleGrid::new(mb).unwrap();
    let grid_m = AngleGrid::new(mm).unwrap();

    let mut worst_norm: f64 = 0.0;
    let mut updates = 0;
    let geom_b = ArrayGeometry::half_wavelength(8);
    let geom_m = ArrayGeometry::half_wavelength(6);
    let a_b = dictionary_matrix(&geom_b, &grid_b);
    let a_m = dictionary_matrix(&geom_m, &grid_m);
    for (run, mode) in [PosteriorMode::Joint, PosteriorMode::Factored].into_iter().cycle().take(20).enumerate() {
        let trans = JointTransition::for_interval(&MobilityModel::new(0.01, 0.99).unwrap(), 50, &grid_b, &grid_m);
        let mut state = EstimatorState::new(SupportPosterior::uniform(2, mb, mm, mode), 1.0, 0.1, trans).unwrap();
        for step in 0..10 {
            let f = CMatrix::from_fn(8, 4, |_, _| complex_normal(&mut rng, 1.0));
            let w = CMatrix::from_fn(6, 3, |_, _| complex_normal(&mut rng, 1.0));
            let phi = KroneckerSensing::new(&f, &w, &a_b, &a_m).unwrap();
            let mut y = CVector::zeros(phi.nrows());
            for s in [(run * 7 + step) % (mb * mm), (run * 13 + 40) % (mb * mm)] {
                y += phi.column(s) * complex_normal(&mut rng, 1.0);
            }
            for v in y.iter_mut() {
                *v += complex_normal(&mut rng, 0.1);
            }
            let up = greedy_map_update(&y, &phi, &state);
            for post in [&up.posterior, &posterior_predict(&up.posterior, &state.transition)] {
                for l in 0..post.num_paths() {
                    worst_norm = worst_norm.max((post.mass(l) - 1.0).abs());
                }
                updates += 1;
            }
            let (_, next) = greedy_map_estimate(&y, &phi, &state);
            state = next;
        }
    }

    let mut worst_mv: f64 = 0.0;
    let mut worst_sq: f64 = 0.0;
    for _ in 0..20 {
        let trans = JointTransition {
            aod: transition_matrix(mb, rng.random_range(0.3..3.0)),
            aoa: transition_matrix(mm, rng.random_range(0.3..3.0)),
        };
        let t: RMatrix = trans.joint_matrix();
        let post = random_posterior(&mut rng, 2, mb, mm);
        let once = posterior_predict(&post, &trans);
        let twice = posterior_predict(&once, &trans);
        for l in 0..2 {
            let p = joint_vector(&post, l);
            worst_mv = worst_mv.max((&t * &p - joint_vector(&once, l)).amax());
            worst_sq = worst_sq.max((&t * &t * &p - joint_vector(&twice, l)).amax());
        }
    }
    let pass = worst_norm <= 1e-9 && worst_mv <= 1e-12 && worst_sq <= 1e-10;
    verdict(
        pass,
        format!(
            "{updates} posteriors checked, max |mass - 1| {worst_norm:.1e}; predict vs T p {worst_mv:.1e}; two predicts vs T^2 p {worst_sq:.1e}"
        ),
    )
}

// ---------------------------------------------------------------- 7

fn mean_by<K: Ord + Clone>(rows: &[CsvRow], key: impl Fn(&CsvRow) -> K, value: impl Fn(&CsvRow) -> f64) -> BTreeMap<K, (f64, usize)> {
    let mut acc: BTreeMap<K, (f64, usize)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.metrics.is_some()) {
        let e = acc.entry(key(r)).or_insert((0.0, 0));
        e.0 += value(r);
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (s, n))| (k, (s / n as f64, n))).collect()
}

fn nmse_ordering() -> Verdict {
    let suite = builtin("mse_vs_snr").expect("builtin suite");
    let mut configs = suite.expand(&ExpandOptions::default()).expect("expands");
    // one point past the sweep to see where the curves level off
    let extra: Vec<SimConfig> = configs.iter().filter(|c| c.snr_db == 20.0).map(|c| SimConfig { snr_db: 30.0, ..c.clone() }).collect();
    configs.extend(extra);
    let rows = run_rows(&suite.name, &configs, jobs(), |_| Ok(())).expect("runs");
    let failed = rows.iter().filter(|r| r.metrics.is_none()).count();
    let seeds = rows.iter().map(|r| r.seed).collect::<std::collections::BTreeSet<_>>().len();
    let nmse = mean_by(&rows, |r| (r.mode.clone(), (r.snr_db * 10.0) as i64), |r| r.metrics.unwrap().nmse);
    let at = |mode: &str, snr: f64| nmse[&(mode.to_string(), (snr * 10.0) as i64)].0;

    let snrs = [0.0, 5.0, 10.0, 15.0, 20.0];
    let ordered = snrs.iter().all(|&s| at("conventional_map", s) < at("conventional_omp", s));
    let gap = |s: f64| 10.0 * (at("conventional_omp", s) / at("conventional_map", s)).log10();
    let widening = gap(0.0) > gap(20.0);
    // a noise-limited estimator gains 10 dB per 10 dB of SNR; a floor means
    // less than half of that from 20 to 30 dB
    let drop = |m: &str| 10.0 * (at(m, 20.0) / at(m, 30.0)).log10();
    let floors = drop("conventional_omp") < 5.0 && drop("conventional_map") < 5.0;
    let in_sweep = |m: &str| at(m, 15.0) / at(m, 20.0);

    let curve = |m: &str| snrs.iter().chain([30.0].iter()).map(|&s| format!("{:.3}", at(m, s))).collect::<Vec<_>>().join("/");
    verdict(
        failed == 0 && seeds >= 20 && ordered && widening && floors,
        format!(
            "{seeds} seeds; NMSE at 0/5/10/15/20/30 dB: OMP {} MAP {}; MAP below OMP at every swept SNR: {ordered}; gap {:.1} dB at 0 dB vs {:.1} dB at 20 dB; drop 20->30 dB: OMP {:.1} dB, MAP {:.1} dB (floor if < 5 dB; inside the sweep NMSE(15)/NMSE(20) is {:.2} for OMP, {:.2} for MAP)",
            curve("conventional_omp"),
            curve("conventional_map"),
            gap(0.0),
            gap(20.0),
            drop("conventional_omp"),
            drop("conventional_map"),
            in_sweep("conventional_omp"),
            in_sweep("conventional_map"),
        ),
    )
}

// ---------------------------------------------------------------- 8

/// Wilson score interval for `k` successes out of `n` at 95%.
fn wilson(k: usize, n: usize) -> (f64, f64) {
    let z = 1.959964f64;
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let c = (p + z * z / (2.0 * n)) / (1.0 + z * z / n);
    let h = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / (1.0 + z * z / n);
    (c - h, c + h)
}

fn dedicated_vs_conventional() -> Verdict {
    let suite = builtin("overhead_dedicated").expect("builtin suite");
    let configs = suite.expand(&ExpandOptions::default()).expect("expands");
    let rows = run_rows(&suite.name, &configs, jobs(), |_| Ok(())).expect("runs");
    let failed = rows.iter().filter(|r| r.metrics.is_none()).count();

    // (mode, beta, period, seed) -> (ber, overhead); period is T_c for cycling, T_d otherwise
    let mut by: BTreeMap<(String, i64, u64, u64), (f64, f64)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.metrics.is_some()) {
        let period = if r.t_d.is_finite() { r.t_d as u64 } else { r.t_c };
        let m = r.metrics.unwrap();
        by.insert((r.mode.clone(), (r.beta * 1e6) as i64, period, r.seed), (m.ber, m.overhead));
    }
    let seeds: Vec<u64> = suite.seeds.clone();
    let mut pass = failed == 0;
    let mut lines = Vec::new();
    for beta in [1000i64, 2000] {
        for period in [500u64, 200, 100] {
            let get = |mode: &str, seed: u64| by[&(mode.to_string(), beta, period, seed)];
            let wins = seeds.iter().filter(|&&s| get("dedicated_dual", s).0 <= get("conventional_omp", s).0).count();
            let lower_overhead = seeds.iter().all(|&s| get("dedicated_dual", s).1 <= get("conventional_omp", s).1);
            let mean = |mode: &str| seeds.iter().map(|&s| get(mode, s).0).sum::<f64>() / seeds.len() as f64;
            let (dual, conv, single) = (mean("dedicated_dual"), mean("conventional_omp"), mean("dedicated_single"));
            let (lo, hi) = wilson(wins, seeds.len());
            let ok = wins * 10 >= 8 * seeds.len() && lower_overhead && single >= 10.0 * dual;
            pass &= ok;
            lines.push(format!(
                "beta={} T={period}: dual<=conv in {wins}/{} seeds (95% CI {lo:.2}-{hi:.2}), overhead {:.1}% vs {:.1}%, mean BER dual {dual:.2e} conv {conv:.2e} single {single:.2e} (single/dual {:.2})",
                beta as f64 / 1e6,
                seeds.len(),
                100.0 * get("dedicated_dual", seeds[0]).1,
                100.0 * get("conventional_omp", seeds[0]).1,
                single / dual
            ));
        }
    }
    verdict(pass, format!("\n      {}", lines.join("\n      ")))
}

// ---------------------------------------------------------------- 9

fn bpsk_sanity() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for (snr_db, seed) in [(4.0f64, 901u64), (8.0, 902)] {
        let snr = 10f64.powf(snr_db / 10.0);
        let mut rng = sim_rng(seed, 0);
        let (errors, bits) = transmit_data_block(&vec![C64::new(1.0, 0.0); 1_000_000], 1.0 / snr, &mut rng);
        let ber = errors as f64 / bits as f64;
        let want = 0.5 * erfc((2.0 * snr).sqrt() / std::f64::consts::SQRT_2);
        let rel = (ber / want - 1.0).abs();
        pass &= rel <= 0.15;
        parts.push(format!("{snr_db} dB: {ber:.3e} vs Q {want:.3e} ({:+.1}%)", 100.0 * (ber / want - 1.0)));
    }
    verdict(pass, parts.join(", "))
}

// ---------------------------------------------------------------- 10

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().expect("temp dir");
    let suite = builtin("smoke").expect("builtin suite");
    let body = |name: &str, jobs: usize| {
        let out = dir.path().join(name);
        run_suite(&suite, &RunOptions { jobs, out: Some(out.clone()), expand: ExpandOptions::default() }).expect("runs");
        std::fs::read(out).expect("csv written")
    };
    let a = body("a.csv", 1);
    let b = body("b.csv", jobs().max(2));
    let rows = a.iter().filter(|&&c| c == b'\n').count() - 1;
    verdict(a == b && rows > 0, format!("{rows} rows, {} bytes, identical across two runs with different job counts: {}", a.len(), a == b))
}

type Criterion = (u32, &'static str, f64, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "conventional overhead arithmetic", 1.0, conventional_overhead),
        (2, "dedicated overhead", 1.0, dedicated_overhead),
        (3, "sensing-matrix oracle", 60.0, sensing_oracle),
        (4, "CRLB validity", 120.0, crlb_validity),
        (5, "greedy MAP reduces to OMP", 60.0, estimator_equivalence),
        (6, "posterior correctness", 60.0, posterior_correctness),
        (7, "NMSE ordering vs SNR", 900.0, nmse_ordering),
        (8, "dedicated vs conventional BER", 1800.0, dedicated_vs_conventional),
        (9, "BPSK sanity", 60.0, bpsk_sanity),
        (10, "determinism of the smoke suite", 10.0, determinism),
    ];
    let only: Option<Vec<u32>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    // libtest-style arguments (filters, --nocapture) are accepted and ignored
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let clock = Instant::now();
        let v = run();
        let secs = clock.elapsed().as_secs_f64();
        let pass = v.pass && secs <= limit;
        failed += !pass as usize;
        println!(
            "criterion {id:>2} [{}] {name}: {} ({secs:.1} s, limit {limit} s)",
            if pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
