//! Seeded simulation of the infinite game, truncated exactly at a horizon.
//!
//! Two engines produce prefix counts. The player engine samples every hat up
//! to the horizon `H(N)` and evaluates every guess. The segment engine
//! applies to strategies built from even-odd blocks and pairs: it samples
//! only the parity of each even-odd block and is exact for `Z̄_k` at every
//! even `k`, which lets plans with billions of players be simulated.
//!
//! Run `r` of an experiment with seed `s` uses the hat stream of
//! [`RandomSource::for_run`]`(s, r)` and the private seed
//! [`RandomSource::private_seed`]`(s, r)`. Runs execute in parallel and are
//! collected in run order, so output does not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{
    sample_assignment, Color, DensityEstimate, Extreme, OutcomeTrajectory, PrefixCounts, RandomSource,
};
use crate::plan::{Play, TeamPlan};
use crate::rational::Rational;
use crate::segments::{HatParities, SampledParities, SegmentTrajectory};
use crate::strategies::{Private, Strategy};

/// Largest horizon the player engine will sample.
pub const HORIZON_LIMIT: u64 = 1 << 22;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.576;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Players,
    Segments,
    /// Players when the horizon fits, segments otherwise.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    Players(OutcomeTrajectory),
    Segments(SegmentTrajectory),
}

impl PrefixCounts for Trajectory {
    fn horizon(&self) -> u64 {
        match self {
            Trajectory::Players(t) => t.horizon(),
            Trajectory::Segments(t) => t.horizon(),
        }
    }

    fn count_at(&self, k: u64) -> Option<u64> {
        match self {
            Trajectory::Players(t) => t.count_at(k),
            Trajectory::Segments(t) => t.count_at(k),
        }
    }

    fn extremes(&self, k_min: u64, k_max: u64, even_only: bool) -> Option<(Extreme, Extreme)> {
        match self {
            Trajectory::Players(t) => t.extremes(k_min, k_max, even_only),
            Trajectory::Segments(t) => t.extremes(k_min, k_max, even_only),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedRun {
    pub run: u64,
    pub engine: Engine,
    pub trajectory: Trajectory,
    /// Event of each block or team (`None` for a team without gamblers).
    pub events: Vec<Option<bool>>,
    /// Continuum guesses exactly equal to the hat.
    pub exact_hits: u64,
}

impl SimulatedRun {
    pub fn n(&self) -> u64 {
        self.trajectory.horizon()
    }
}

/// One run with the player engine: hats for players `1..=H(N)`, guesses
/// and correctness bits for `1..=N`.
pub fn simulate_run(strategy: &Strategy, n: u64, rng: &mut RandomSource, private_seed: u64) -> Result<OutcomeTrajectory> {
    let h = strategy.horizon(n)?;
    if h > HORIZON_LIMIT {
        return Err(Error::SizeGuard { what: "horizon", size: u128::from(h), limit: u128::from(HORIZON_LIMIT) });
    }
    let hats = sample_assignment(&strategy.space(), h, rng)?;
    let guesses = strategy.guesses(&hats, n, Private::Seed(private_seed))?;
    let correct = guesses
        .iter()
        .enumerate()
        .map(|(i, g)| Ok(*g == hats.color(i as u64 + 1)?))
        .collect::<Result<Vec<bool>>>()?;
    Ok(OutcomeTrajectory::new(correct))
}

fn resolve(strategy: &Strategy, n: u64, engine: Engine) -> Result<Engine> {
    Ok(match engine {
        Engine::Auto => {
            let has_segments = matches!(strategy, Strategy::Pairs | Strategy::EvenOdd { .. } | Strategy::Blocks(_) | Strategy::Team(_));
            if has_segments && strategy.horizon(n)? > HORIZON_LIMIT {
                Engine::Segments
            } else {
                Engine::Players
            }
        }
        e => e,
    })
}

/// Run `run` of an experiment seeded with `seed`.
pub fn simulate(strategy: &Strategy, n: u64, seed: u64, run: u64, engine: Engine) -> Result<SimulatedRun> {
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let engine = resolve(strategy, n, engine)?;
    let mut rng = RandomSource::for_run(seed, run);
    match engine {
        Engine::Segments => {
            let seg = strategy
                .segments(n, &mut SampledParities(&mut rng))
                .ok_or_else(|| invalid(format!("{} has no segment form", strategy.name())))??;
            let events = seg.events.clone();
            Ok(SimulatedRun {
                run,
                engine,
                trajectory: Trajectory::Segments(SegmentTrajectory::new(seg, n)),
                events,
                exact_hits: 0,
            })
        }
        _ => {
            let h = strategy.horizon(n)?;
            if h > HORIZON_LIMIT {
                return Err(Error::SizeGuard { what: "horizon", size: u128::from(h), limit: u128::from(HORIZON_LIMIT) });
            }
            let private = RandomSource::private_seed(seed, run);
            let hats = sample_assignment(&strategy.space(), h, &mut rng)?;
            let guesses = strategy.guesses(&hats, n, Private::Seed(private))?;
            let mut exact_hits = 0;
            let mut correct = Vec::with_capacity(n as usize);
            for (i, g) in guesses.iter().enumerate() {
                let hat = hats.color(i as u64 + 1)?;
                let hit = *g == hat;
                if hit && matches!(hat, Color::Real(_)) {
                    exact_hits += 1;
                }
                correct.push(hit);
            }
            let events = match strategy.segments(n, &mut HatParities(&hats)) {
                Some(seg) => seg?.events,
                None => Vec::new(),
            };
            Ok(SimulatedRun {
                run,
                engine,
                trajectory: Trajectory::Players(OutcomeTrajectory::new(correct)),
                events,
                exact_hits,
            })
        }
    }
}

/// Runs `0..runs`, in parallel, returned in run order.
pub fn simulate_many(strategy: &Strategy, n: u64, seed: u64, runs: u64, engine: Engine) -> Result<Vec<SimulatedRun>> {
    (0..runs).into_par_iter().map(|r| simulate(strategy, n, seed, r, engine)).collect()
}

/// Smallest and largest `Z̄_k` over `k_min <= k <= N`; at even `k` only
/// when `even_only`.
pub fn density_estimate(traj: &dyn PrefixCounts, k_min: u64, even_only: bool) -> Result<DensityEstimate> {
    let n = traj.horizon();
    if k_min >= n {
        return Err(invalid(format!("k_min = {k_min} must be below N = {n}")));
    }
    let (mn, mx) = traj
        .extremes(k_min, n, even_only)
        .ok_or_else(|| invalid("no determined prefix mean in the window"))?;
    Ok(DensityEstimate::from_extremes(mn, mx, (k_min, n)))
}

/// Successes out of trials, with a 99% normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn estimate(&self) -> f64 {
        if self.trials == 0 {
            return f64::NAN;
        }
        self.successes as f64 / self.trials as f64
    }

    /// Half-width of the 99% interval `p̂ ± z sqrt(p̂(1 - p̂)/n)`.
    pub fn half_width(&self) -> f64 {
        let p = self.estimate();
        Z_99 * (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Within `tol` of `target`, with an interval no wider than `tol`.
    pub fn matches(&self, target: f64, tol: f64) -> bool {
        self.trials > 0 && (self.estimate() - target).abs() <= tol && self.half_width() <= tol
    }

    /// The whole 99% interval lies below `bound`.
    pub fn below(&self, bound: f64) -> bool {
        self.trials > 0 && self.estimate() + self.half_width() < bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventEstimate {
    /// Block `j` (1-based) or team `k` (0-based).
    pub index: u64,
    pub expected: f64,
    pub frequency: Proportion,
    pub estimate: f64,
    pub half_width: f64,
    pub passed: bool,
}

/// Frequency of each unit's event across runs, against `expected(index)`.
pub fn event_frequency(
    runs: &[SimulatedRun],
    first_index: u64,
    expected: impl Fn(u64) -> f64,
    tol: f64,
) -> Vec<EventEstimate> {
    let units = runs.iter().map(|r| r.events.len()).min().unwrap_or(0);
    (0..units)
        .filter_map(|u| {
            let observed: Vec<bool> = runs.iter().filter_map(|r| r.events[u]).collect();
            if observed.is_empty() {
                return None;
            }
            let p = Proportion { successes: observed.iter().filter(|&&e| e).count() as u64, trials: observed.len() as u64 };
            let index = first_index + u as u64;
            let target = expected(index);
            Some(EventEstimate {
                index,
                expected: target,
                frequency: p,
                estimate: p.estimate(),
                half_width: p.half_width(),
                passed: p.matches(target, tol),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub a: u64,
    pub b: u64,
    pub value: f64,
}

/// Pearson correlation of every pair of event indicators.
pub fn event_correlations(runs: &[SimulatedRun], first_index: u64) -> Vec<Correlation> {
    let units = runs.iter().map(|r| r.events.len()).min().unwrap_or(0);
    let usable: Vec<usize> = (0..units).filter(|&u| runs.iter().all(|r| r.events[u].is_some())).collect();
    let mut out = Vec::new();
    let m = runs.len() as f64;
    for (i, &a) in usable.iter().enumerate() {
        for &b in &usable[i + 1..] {
            let (mut sa, mut sb, mut sab) = (0f64, 0f64, 0f64);
            for r in runs {
                let x = f64::from(u8::from(r.events[a] == Some(true)));
                let y = f64::from(u8::from(r.events[b] == Some(true)));
                sa += x;
                sb += y;
                sab += x * y;
            }
            let (pa, pb) = (sa / m, sb / m);
            let cov = sab / m - pa * pb;
            let denom = (pa * (1.0 - pa) * pb * (1.0 - pb)).sqrt();
            let value = if denom > 0.0 { cov / denom } else { 0.0 };
            out.push(Correlation { a: first_index + a as u64, b: first_index + b as u64, value });
        }
    }
    out
}

/// Outcome of the sure inequalities evaluated on one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SureChecks {
    pub checked: u64,
    pub violations: Vec<String>,
}

impl SureChecks {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations.push(detail());
        }
    }
}

fn ratio(count: u64, k: u64) -> Rational {
    Rational::new(count, k).expect("k >= 1")
}

/// Every inequality that holds surely for the strategy, evaluated exactly.
pub fn sure_checks(strategy: &Strategy, run: &SimulatedRun) -> SureChecks {
    let mut out = SureChecks::default();
    let traj = &run.trajectory;
    let n = traj.horizon();
    match strategy {
        Strategy::Pairs => {
            if let Some((mn, mx)) = traj.extremes(1, n, true) {
                let half = Rational::half();
                out.check(mn.mean() == half && mx.mean() == half, || {
                    format!("pairs: Z̄_k ranges over [{}, {}] at even k", mn.mean(), mx.mean())
                });
            }
        }
        Strategy::ModKGroups { k } => {
            let mut j = *k;
            while j <= n {
                let c = traj.count_at(j);
                out.check(c == Some(j / k), || format!("mod-{k} groups: {c:?} correct among the first {j}"));
                j += k;
            }
        }
        Strategy::Blocks(b) => {
            for (idx, &last) in b.bounds().iter().enumerate() {
                if last > n {
                    break;
                }
                let j = idx + 1;
                if run.events.get(idx) == Some(&Some(true)) {
                    let (prev, cur) = b.ratio(j);
                    let bound = Rational::one() - ratio(prev, cur);
                    let c = traj.count_at(last);
                    out.check(c.is_some_and(|c| ratio(c, last) >= bound), || {
                        format!("block {j} won but Z̄_{last} = {c:?}/{last} < {bound}")
                    });
                }
            }
        }
        Strategy::Team(t) => team_checks(t.plan(), traj, &run.events, &mut out),
        _ => {}
    }
    out
}

/// Sure inequalities of a team plan: the sandwich at every `n_k`, the
/// gambler bounds over each team's range (even `i`), and the bound on `A_k`.
pub fn team_checks(plan: &TeamPlan, traj: &dyn PrefixCounts, events: &[Option<bool>], out: &mut SureChecks) {
    let n = traj.horizon();
    let half = Rational::half();
    for (idx, t) in plan.teams.iter().enumerate() {
        if t.n > n {
            break;
        }
        let eps = &t.epsilon;
        if t.n > 0 {
            let c = traj.count_at(t.n);
            out.check(
                c.is_some_and(|c| {
                    let z = ratio(c, t.n);
                    z > &half - eps && z < &half + eps
                }),
                || format!("team {}: Z̄_{} = {c:?}/{} outside 1/2 -+ {eps}", t.k, t.n, t.n),
            );
        }
        if t.n == 0 || t.g == 0 {
            continue;
        }
        let slack = eps / &(Rational::one() + &t.alpha);
        let drift = &ratio(t.s, t.n) + eps;
        let hi = t.last().min(n);
        if let Some((mn, mx)) = traj.extremes(t.first(), hi, true) {
            let (lo_bound, hi_bound) = match t.play {
                Play::Win => (&half - &drift, &t.u + &slack),
                Play::Lose => (&(Rational::one() - &t.u) - &slack, &half + &drift),
            };
            out.check(mx.mean() <= hi_bound, || {
                format!("team {}: max Z̄ = {} at {} exceeds {hi_bound}", t.k, mx.mean(), mx.k)
            });
            out.check(mn.mean() >= lo_bound, || {
                format!("team {}: min Z̄ = {} at {} below {lo_bound}", t.k, mn.mean(), mn.k)
            });
        }
        let peak = t.n + t.g;
        if peak <= n && events.get(idx) == Some(&Some(true)) {
            let c = traj.count_at(peak);
            let ok = c.is_some_and(|c| {
                let z = ratio(c, peak);
                match t.play {
                    Play::Win => z >= &t.u - &slack,
                    Play::Lose => z <= &(Rational::one() - &t.u) + &slack,
                }
            });
            out.check(ok, || format!("team {}: A_k occurred but Z̄_{peak} = {c:?}/{peak} misses u_k -+ {slack}", t.k));
        }
    }
}

/// Indices where checkpoints are recorded: a 1-2-5 grid, block or team
/// boundaries, and `N`.
pub fn checkpoint_grid(strategy: &Strategy, n: u64) -> Vec<u64> {
    let mut ks = Vec::new();
    let mut p = 1u64;
    while p <= n {
        for m in [1, 2, 5] {
            if let Some(k) = p.checked_mul(m) {
                ks.push(k);
            }
        }
        match p.checked_mul(10) {
            Some(q) => p = q,
            None => break,
        }
    }
    match strategy {
        Strategy::Blocks(b) => ks.extend(b.bounds().iter().copied()),
        Strategy::Team(t) => {
            for team in &t.plan().teams {
                ks.push(team.n);
                ks.push(team.n + team.g);
                for j in 1..=if team.s == 0 { 0 } else { team.b } {
                    ks.push(team.block(j).1);
                }
            }
            ks.push(t.plan().end());
        }
        _ => {}
    }
    ks.push(n);
    ks.retain(|&k| k >= 1 && k <= n);
    ks.sort_unstable();
    ks.dedup();
    ks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRow {
    pub k: u64,
    pub numerator: String,
    pub denominator: String,
}

/// `Z̄_k` at each determined checkpoint, as reduced fractions.
pub fn checkpoints(traj: &dyn PrefixCounts, ks: &[u64]) -> Vec<CheckpointRow> {
    ks.iter()
        .filter_map(|&k| {
            traj.count_at(k).map(|c| {
                let z = ratio(c, k);
                CheckpointRow { k, numerator: z.numer().to_string(), denominator: z.denom().to_string() }
            })
        })
        .collect()
}

pub fn checkpoints_csv(rows: &[(u64, CheckpointRow)]) -> String {
    let mut out = String::from("run,k,numerator,denominator\n");
    for (run, r) in rows {
        out.push_str(&format!("{run},{},{},{}\n", r.k, r.numerator, r.denominator));
    }
    out
}

/// One JSON line per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub strategy: String,
    pub run: u64,
    pub seed: u64,
    pub n: u64,
    pub engine: Engine,
    /// `Z̄_N`, absent when not determined by the segment engine.
    pub z_bar_n: Option<String>,
    pub lower: Option<String>,
    pub upper: Option<String>,
    pub window: (u64, u64),
    pub events: Vec<Option<bool>>,
    pub exact_hits: u64,
    pub sure: SureChecks,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub checkpoints: Vec<CheckpointRow>,
}

pub fn run_report(strategy: &Strategy, run: &SimulatedRun, seed: u64, k_min: u64, with_checkpoints: bool) -> RunReport {
    let n = run.n();
    let even_only = run.engine == Engine::Segments;
    let est = density_estimate(&run.trajectory, k_min.min(n.saturating_sub(1)), even_only).ok();
    RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        strategy: strategy.name().to_string(),
        run: run.run,
        seed,
        n,
        engine: run.engine,
        z_bar_n: run.trajectory.count_at(n).map(|c| ratio(c, n).to_string()),
        lower: est.as_ref().map(|e| e.lower.to_string()),
        upper: est.as_ref().map(|e| e.upper.to_string()),
        window: est.as_ref().map_or((k_min, n), |e| e.window),
        events: run.events.clone(),
        exact_hits: run.exact_hits,
        sure: sure_checks(strategy, run),
        checkpoints: if with_checkpoints {
            checkpoints(&run.trajectory, &checkpoint_grid(strategy, n))
        } else {
            Vec::new()
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub strategy: String,
    pub n: u64,
    pub runs: u64,
    pub k_min: u64,
    pub tol: String,
    /// Largest window minimum and smallest window maximum over all runs.
    pub max_lower: String,
    pub min_upper: String,
    pub failed_runs: Vec<u64>,
    pub passed: bool,
}

/// Over `runs` runs, every window minimum of `Z̄` is at most `1/2 + tol`
/// and every window maximum at least `1/2 - tol`.
pub fn verify_theorem_main(
    strategy: &Strategy,
    n: u64,
    runs: u64,
    tol: &Rational,
    k_min: u64,
    seed: u64,
    engine: Engine,
) -> Result<TheoremReport> {
    let half = Rational::half();
    let lo_limit = &half + tol;
    let hi_limit = &half - tol;
    let results: Vec<(u64, Rational, Rational)> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let run = simulate(strategy, n, seed, r, engine)?;
            let even_only = run.engine == Engine::Segments;
            let est = density_estimate(&run.trajectory, k_min, even_only)?;
            Ok((r, est.lower, est.upper))
        })
        .collect::<Result<_>>()?;
    let failed_runs: Vec<u64> =
        results.iter().filter(|(_, lo, hi)| *lo > lo_limit || *hi < hi_limit).map(|(r, _, _)| *r).collect();
    let max_lower = results.iter().map(|(_, lo, _)| lo.clone()).max().unwrap_or_else(Rational::zero);
    let min_upper = results.iter().map(|(_, _, hi)| hi.clone()).min().unwrap_or_else(Rational::one);
    Ok(TheoremReport {
        strategy: strategy.name().to_string(),
        n,
        runs,
        k_min,
        tol: tol.to_string(),
        max_lower: max_lower.to_string(),
        min_upper: min_upper.to_string(),
        passed: failed_runs.is_empty(),
        failed_runs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTargetReport {
    pub upper: String,
    pub lower: String,
    pub teams: usize,
    pub n: u64,
    pub runs: u64,
    pub sure_checks: u64,
    pub sure_violations: Vec<String>,
    pub events: Vec<EventEstimate>,
    pub max_abs_correlation: f64,
    pub correlation_tol: f64,
    pub passed: bool,
}

/// Sure team inequalities on every run, event frequencies against
/// `2^-b_k`, and pairwise correlations of the events, using the segment
/// engine over the whole plan.
pub fn verify_density_targets(plan: &TeamPlan, runs: u64, seed: u64, tol: f64, corr_tol: f64) -> Result<DensityTargetReport> {
    let strategy = Strategy::Team(crate::strategies::team::TeamStrategy::new(plan.clone())?);
    let n = plan.end();
    let sims = simulate_many(&strategy, n, seed, runs, Engine::Segments)?;
    let mut checks = SureChecks::default();
    for run in &sims {
        let c = sure_checks(&strategy, run);
        checks.checked += c.checked;
        for v in c.violations {
            if checks.violations.len() < 20 {
                checks.violations.push(format!("run {}: {v}", run.run));
            }
        }
    }
    let events = event_frequency(&sims, 0, |k| 0.5f64.powi(crate::plan::gambler_blocks(k) as i32), tol);
    let corr = event_correlations(&sims, 0);
    let max_abs = corr.iter().map(|c| c.value.abs()).fold(0.0, f64::max);
    let passed = checks.passed() && events.iter().all(|e| e.passed) && max_abs <= corr_tol;
    Ok(DensityTargetReport {
        upper: plan.upper.to_string(),
        lower: plan.lower.to_string(),
        teams: plan.teams.len(),
        n,
        runs,
        sure_checks: checks.checked,
        sure_violations: checks.violations,
        events,
        max_abs_correlation: max_abs,
        correlation_tol: corr_tol,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ColorSpace;

    #[test]
    fn pairs_exactly_half() {
        let run = simulate(&Strategy::Pairs, 10_000, 3, 0, Engine::Players).unwrap();
        assert_eq!(run.trajectory.count_at(10_000), Some(5_000));
        assert!(sure_checks(&Strategy::Pairs, &run).passed());
    }

    #[test]
    fn density_of_all_correct() {
        let t = OutcomeTrajectory::new(vec![true; 200]);
        let e = density_estimate(&t, 100, false).unwrap();
        assert_eq!((e.lower.clone(), e.upper.clone()), (Rational::one(), Rational::one()));
        assert!(density_estimate(&t, 200, false).is_err());
    }

    #[test]
    fn runs_are_reproducible() {
        let s = Strategy::Constant { color: 0, space: ColorSpace::Binary };
        let a = simulate(&s, 1000, 9, 4, Engine::Players).unwrap();
        let b = simulate(&s, 1000, 9, 4, Engine::Players).unwrap();
        let c = simulate(&s, 1000, 9, 5, Engine::Players).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn proportion_interval() {
        let p = Proportion { successes: 5000, trials: 10_000 };
        assert!((p.half_width() - 0.01288).abs() < 1e-4);
        assert!(p.matches(0.5, 0.02));
        assert!(!p.matches(0.53, 0.02));
        assert!(Proportion { successes: 3, trials: 10_000 }.below(0.1));
    }
}
