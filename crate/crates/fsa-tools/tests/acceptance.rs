//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. A criterion passes only if both its
//! numerical check and its runtime budget hold.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;
use std::time::{Duration, Instant};

use fsa_core::decoy::{
    binary_entropy, e1_upper, key_rate, q1_expansion, q1_expansion_term, q1_lower, y1_lower, DecoyBounds,
    SERIES_ORDER,
};
use fsa_core::faked_states::{p_arrive, p_click_det0, p_click_det1, p_error, FakedStateIntensities};
use fsa_core::model::{channel_transmittance, poisson_pmf};
use fsa_core::observables::{observables_baseline, observables_pnrd, observables_qnd, p_single};
use fsa_core::oracle;
use fsa_core::search::{self, max_positive_distance, KMIN_TOLERANCE};
use fsa_core::security::{r_absolute, table1_probs, Table1Probs};
use fsa_core::{AttackStrategy, Observables, SystemParams};
use fsa_tools::config::gys_with_detector_error;
use fsa_tools::parallel;
use fsa_tools::recipes::{PNRD_FIG6, QND_FIG3};
use fsa_tools::validate::{validate_point, SIGMA_THRESHOLD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BASELINE_CROSSING_KM: f64 = 140.0;
const QND_CROSSING_KM: f64 = 160.0;
const CROSSING_TOL_KM: f64 = 5.0;
const STEALTH_BAND: f64 = 0.10;
const K_MIN_TARGET: f64 = 35.0;
const K_MIN_TOL: f64 = 2.0;
const PNRD_SPLIT_KM: f64 = 30.0;
const ORACLE_POINTS: usize = 12;
const ORACLE_PULSES: u64 = 10_000_000;
const ORACLE_SEED: u64 = 20_240_611;
const SERIES_TOL: f64 = 1e-10;
const PNRD_QND_TOL: f64 = 1e-12;
const EXPANSION_DRAWS: usize = 1000;

struct Outcome {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail, notes: Vec::new() }
    }
}

fn rel_dev(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs()
}

fn steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn crossings(p: &SystemParams) -> (Option<f64>, Option<f64>) {
    let find = |s: &AttackStrategy| max_positive_distance(p, s, 0.0, 300.0, 1.0, 1e-3).unwrap();
    (find(&AttackStrategy::Baseline), find(&QND_FIG3))
}

fn fmt_km(x: Option<f64>) -> String {
    x.map_or("none".into(), |l| format!("{l:.2} km"))
}

fn zero_crossings() -> Outcome {
    let (base, qnd) = crossings(&SystemParams::gys());
    let ok = |x: Option<f64>, target: f64| x.is_some_and(|l| (l - target).abs() <= CROSSING_TOL_KM);
    let mut out = Outcome::new(
        ok(base, BASELINE_CROSSING_KM) && ok(qnd, QND_CROSSING_KM),
        format!(
            "baseline R=0 at {} (want {BASELINE_CROSSING_KM}±{CROSSING_TOL_KM}), qnd k=310 mu'=300 at {} (want {QND_CROSSING_KM}±{CROSSING_TOL_KM})",
            fmt_km(base),
            fmt_km(qnd)
        ),
    );
    let (base, qnd) = crossings(&gys_with_detector_error());
    out.notes.push(format!(
        "with e_detector=0.033: baseline {}, qnd {}",
        fmt_km(base),
        fmt_km(qnd)
    ));
    out
}

fn qnd_stealth_dev(p: &SystemParams) -> (f64, f64) {
    let distances = steps(40.0, 140.0, 1.0);
    let base = search::distance_scan(p, &AttackStrategy::Baseline, &distances).unwrap();
    let qnd = search::distance_scan(p, &QND_FIG3, &distances).unwrap();
    let (mut worst, mut at) = (0.0, 0.0);
    for (b, a) in base.iter().zip(&qnd) {
        let dev = rel_dev(a.q_mu, b.q_mu);
        if !(dev <= worst) {
            worst = dev;
            at = b.distance;
        }
    }
    (worst, at)
}

fn qnd_stealth() -> Outcome {
    let (worst, at) = qnd_stealth_dev(&SystemParams::gys());
    let mut out = Outcome::new(
        worst <= STEALTH_BAND,
        format!("max |Q_mu(qnd)/Q_mu(baseline) - 1| over [40, 140] km = {worst:.4} at {at} km (band {STEALTH_BAND})"),
    );
    let (worst, at) = qnd_stealth_dev(&gys_with_detector_error());
    out.notes.push(format!("with e_detector=0.033: {worst:.4} at {at} km"));
    out
}

/// Minimum k_min, k_min at the last distance, monotonicity, convergence.
fn k_min_summary(p: &SystemParams) -> (f64, f64, bool, bool) {
    let distances = steps(1.0, 140.0, 1.0);
    let rows = parallel::k_min_scan(p, &distances, KMIN_TOLERANCE).unwrap();
    let converged = rows.iter().all(|r| r.converged);
    let min = rows.iter().map(|r| r.k_min).fold(f64::INFINITY, f64::min);
    let monotone = rows.windows(2).all(|w| w[0].k_min <= w[1].k_min);
    (min, rows.last().unwrap().k_min, monotone, converged)
}

fn k_min_bound() -> Outcome {
    let (min, last, monotone, converged) = k_min_summary(&SystemParams::gys());
    let mut out = Outcome::new(
        converged && monotone && (min - K_MIN_TARGET).abs() <= K_MIN_TOL,
        format!(
            "min k_min over [1, 140] km = {min:.2} (want {K_MIN_TARGET}±{K_MIN_TOL}), k_min(140 km) = {last:.2}, monotone = {monotone}, converged = {converged}"
        ),
    );
    let (min, last, monotone, _) = k_min_summary(&gys_with_detector_error());
    out.notes.push(format!("with e_detector=0.033: min {min:.2}, k_min(140 km) = {last:.2}, monotone = {monotone}"));
    out
}

/// Worst deviation on (30, 140] km with its distance, and worst on (0, 30) km.
fn pnrd_devs(p: &SystemParams) -> (f64, f64, f64) {
    let distances = steps(0.5, 140.0, 0.5);
    let base = search::distance_scan(p, &AttackStrategy::Baseline, &distances).unwrap();
    let att = search::distance_scan(p, &PNRD_FIG6, &distances).unwrap();
    let (mut far_worst, mut far_at) = (0.0, 0.0);
    let mut near_worst: f64 = 0.0;
    for (b, a) in base.iter().zip(&att) {
        let dev = rel_dev(a.rate, b.rate).max(rel_dev(a.q_mu, b.q_mu));
        if b.distance > PNRD_SPLIT_KM {
            if !(dev <= far_worst) {
                far_worst = dev;
                far_at = b.distance;
            }
        } else if b.distance < PNRD_SPLIT_KM {
            near_worst = near_worst.max(dev);
        }
    }
    (far_worst, far_at, near_worst)
}

fn pnrd_closeness() -> Outcome {
    let (far, at, near) = pnrd_devs(&SystemParams::gys());
    let mut out = Outcome::new(
        far <= STEALTH_BAND && near > STEALTH_BAND,
        format!(
            "max relative deviation of R or Q_mu: {far:.4} on (30, 140] km at {at} km (band {STEALTH_BAND}), {near:.4} on (0, 30) km (must exceed band)"
        ),
    );
    let (far, at, near) = pnrd_devs(&gys_with_detector_error());
    out.notes.push(format!("with e_detector=0.033: {far:.4} at {at} km, {near:.4} below 30 km"));
    out
}

fn r_absolute_below_rate() -> Outcome {
    let p = SystemParams::gys();
    let rows = search::distance_scan(&p, &PNRD_FIG6, &steps(0.0, 200.0, 1.0)).unwrap();
    let positive: Vec<_> = rows.iter().filter(|r| r.rate > 0.0).collect();
    let violations = positive
        .iter()
        .filter(|r| !matches!(r.r_absolute, Some(ra) if ra < r.rate))
        .count();
    Outcome::new(
        !positive.is_empty() && violations == 0,
        format!("{} distances with R > 0, {violations} with R_absolute >= R", positive.len()),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    let mut compared = 0;
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..ORACLE_POINTS {
        let k = rng.gen_range(1.0..=1000.0);
        let mu_prime = rng.gen_range(0.0..=2000.0);
        let distance = rng.gen_range(10.0..=150.0);
        let strategy = if i % 2 == 0 {
            AttackStrategy::Qnd { mu_prime, k }
        } else {
            AttackStrategy::Pnrd { mu_prime, k, eta_e: rng.gen_range(0.05..=1.0) }
        };
        let p = SystemParams::gys().with_distance(distance);
        let (rows, _) = validate_point(&p, &strategy, i, ORACLE_PULSES, ORACLE_SEED + i as u64).unwrap();
        for r in &rows {
            compared += 1;
            worst = worst.max(r.z_score);
            if !r.pass {
                failures.push(format!("point {i} {} {}: z = {:.2}", strategy.name(), r.quantity, r.z_score));
            }
        }
    }
    let mut out = Outcome::new(
        failures.is_empty() && compared == ORACLE_POINTS * 10,
        format!(
            "{ORACLE_POINTS} points, n = {ORACLE_PULSES}, {compared} comparisons, max |z| = {worst:.2} (limit {SIGMA_THRESHOLD})"
        ),
    );
    out.notes = failures;
    out
}

#[derive(Default)]
struct Checks {
    total: usize,
    failed: Vec<String>,
}

impl Checks {
    fn check(&mut self, name: &str, ok: bool) {
        self.total += 1;
        if !ok {
            self.failed.push(name.to_string());
        }
    }
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut c = Checks::default();

    // Single-photon identity against the truncated series.
    let series = |mu: f64, eta: f64| -> f64 {
        (1..=SERIES_ORDER as u32)
            .map(|i| poisson_pmf(mu, i) * i as f64 * eta * (1.0 - eta).powi(i as i32 - 1))
            .sum()
    };
    let mut ok = (series(0.48, 0.1) - p_single(0.48, 0.1)).abs() <= SERIES_TOL;
    for _ in 0..200 {
        let (mu, eta) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
        ok &= (series(mu, eta) - p_single(mu, eta)).abs() <= SERIES_TOL;
    }
    c.check("p_single series identity", ok);

    // Perfect PNRD is QND.
    let mut ok = true;
    for _ in 0..200 {
        let p = SystemParams::gys().with_distance(rng.gen_range(0.0..=200.0));
        let (mu_prime, k) = (rng.gen_range(0.0..=2000.0), rng.gen_range(1.0..=1000.0));
        match (observables_pnrd(&p, mu_prime, k, 1.0), observables_qnd(&p, mu_prime, k)) {
            (Ok(a), Ok(b)) => {
                for (x, y) in [(a.q_mu, b.q_mu), (a.q_nu, b.q_nu), (a.emu_qmu, b.emu_qmu), (a.enu_qnu, b.enu_qnu)] {
                    ok &= (x - y).abs() <= PNRD_QND_TOL;
                }
            }
            (Err(a), Err(b)) => ok &= a == b,
            _ => ok = false,
        }
    }
    c.check("PNRD(eta_e=1) equals QND", ok);

    // Multi-photon terms of the Q1 expansion.
    let mut ok = true;
    for _ in 0..EXPANSION_DRAWS {
        let mu = rng.gen_range(0.01..=1.0);
        let nu = rng.gen_range(0.0..mu);
        let yields: Vec<f64> = (0..=SERIES_ORDER).map(|_| rng.gen_range(0.0..=1.0)).collect();
        ok &= (2..=SERIES_ORDER).all(|i| q1_expansion_term(i, yields[i], mu, nu) <= 0.0);
        let mut truncated = yields.clone();
        truncated[2..].fill(0.0);
        ok &= q1_expansion(&truncated, mu, nu) >= q1_expansion(&yields, mu, nu);
    }
    c.check("Q1 expansion multi-photon terms non-positive", ok);

    // Binary entropy.
    let h = |x: f64| binary_entropy(x).unwrap();
    let mut ok = h(0.0) == 0.0 && h(1.0) == 0.0 && (h(0.5) - 1.0).abs() <= 1e-15;
    for _ in 0..200 {
        let x: f64 = rng.gen_range(0.0..=1.0);
        ok &= (h(x) - h(1.0 - x)).abs() <= 1e-12;
    }
    c.check("binary entropy endpoints and symmetry", ok);

    // Trivial zeros and limits.
    let gys = SystemParams::gys();
    let vacuum = FakedStateIntensities::uniform(0.0).unwrap();
    let eff = gys.with_distance(50.0).efficiencies(200.0).unwrap();
    c.check("zero-length fiber", channel_transmittance(0.21, 0.0).unwrap() == 1.0);
    c.check(
        "vacuum faked states never click",
        [p_click_det0, p_click_det1, p_arrive, p_error].iter().all(|g| g(&vacuum, &eff, 0.0).abs() < 1e-15),
    );
    c.check(
        "certain dark count",
        (p_click_det0(&vacuum, &eff, 1.0) - 1.0).abs() < 1e-15 && (p_click_det1(&vacuum, &eff, 1.0) - 1.0).abs() < 1e-15,
    );
    let dark_free = SystemParams { dark_count: 0.0, ..gys };
    c.check("vacuum faked states give degenerate observables", observables_qnd(&dark_free, 0.0, 310.0).is_err());
    c.check("blind Eve gives degenerate observables", observables_pnrd(&dark_free, 300.0, 310.0, 0.0).is_err());
    c.check("p_single(0, eta) = 0", p_single(0.0, 0.3) == 0.0);
    let ideal = observables_baseline(&dark_free.with_distance(50.0)).unwrap();
    c.check("error-free baseline", ideal.e_mu == 0.0);
    let empty = Observables { q_mu: 0.0, q_nu: 0.0, emu_qmu: 0.0, enu_qnu: 0.0, e_mu: 0.0 };
    c.check("Y1 lower bound of empty gains", y1_lower(&empty, &dark_free).value == 0.0);
    c.check("Q1 lower bound of zero yield", q1_lower(0.0, 0.48) == 0.0);
    let nu = gys.nu;
    let obs = Observables::new(0.01, 0.001, 0.001, 0.5 * gys.dark_count * (-nu).exp()).unwrap();
    c.check("e1 numerator zero", e1_upper(&obs, 0.01, &gys).abs() < 1e-15);
    let obs = Observables::new(1e-3, 1e-4, 1e-5, 1e-6).unwrap();
    let zero_q1 = DecoyBounds { y1_lower: 0.0, q1_lower: 0.0, e1_upper: 0.0, y1_clamped: false };
    c.check("no single photons gives negative rate", key_rate(&obs, &zero_q1, &gys) < 0.0);
    let clean = Observables::new(1e-3, 1e-4, 0.0, 0.0).unwrap();
    let bounds = DecoyBounds { y1_lower: 1e-3, q1_lower: 4e-4, e1_upper: 0.0, y1_clamped: false };
    c.check("error-free ceiling", (key_rate(&clean, &bounds, &gys) - gys.q_sift * 4e-4).abs() < 1e-18);
    c.check("Q1 expansion of zero yields", q1_expansion(&[0.0; SERIES_ORDER + 1], 0.48, 0.05) == 0.0);
    let t = table1_probs(&vacuum, &eff);
    c.check("outcome probabilities for vacuum", t.r1 == 0.0 && t.s0 == 0.0 && t.loss_r == 1.0 && t.loss_s == 1.0);
    let blaze = table1_probs(&FakedStateIntensities::uniform(1e12).unwrap(), &eff);
    c.check("outcome probabilities in the bright limit", (blaze.r1 - 1.0).abs() < 1e-12 && blaze.loss_r < 1e-12);
    let none = Table1Probs { r0: 0.0, r1: 0.0, s0: 0.0, s1: 0.0, double_r: 0.0, double_s: 0.0, loss_r: 1.0, loss_s: 1.0 };
    c.check("R_absolute without useful clicks", r_absolute(&gys, &PNRD_FIG6, &none).unwrap() == 0.0);
    let dark_vacuum = SystemParams { mu: 0.0, nu: 0.0, dark_count: 0.0, ..gys };
    c.check("R_absolute at zero intensity", r_absolute(&dark_vacuum, &PNRD_FIG6, &t).unwrap() == 0.0);
    let run = oracle::simulate_pulses(&dark_vacuum, &AttackStrategy::Baseline, 10_000, 1).unwrap();
    c.check("oracle vacuum source", run.signal.clicks() == 0 && run.decoy.clicks() == 0);
    let run = oracle::simulate_pulses(&dark_free, &AttackStrategy::Qnd { mu_prime: 0.0, k: 310.0 }, 10_000, 1).unwrap();
    c.check("oracle vacuum faked states", run.signal.clicks() == 0 && run.decoy.clicks() == 0);

    Outcome {
        pass: c.failed.is_empty(),
        detail: format!("{} of {} property groups hold", c.total - c.failed.len(), c.total),
        notes: c.failed,
    }
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 zero crossings of R", Duration::from_secs(10), zero_crossings),
        ("2 QND attack stealth in Q_mu", Duration::from_secs(10), qnd_stealth),
        ("3 k_min bound and monotonicity", Duration::from_secs(120), k_min_bound),
        ("4 PNRD attack closeness to baseline", Duration::from_secs(10), pnrd_closeness),
        ("5 R_absolute below R", Duration::from_secs(10), r_absolute_below_rate),
        ("6 oracle equivalence", Duration::from_secs(300), oracle_equivalence),
        ("7 property suites", Duration::from_secs(30), property_suites),
    ];
    let mut all = true;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed < budget;
        all &= pass;
        println!(
            "{} [{name}] {} ({:.2} s, budget {} s)",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        for note in &outcome.notes {
            println!("       {note}");
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
