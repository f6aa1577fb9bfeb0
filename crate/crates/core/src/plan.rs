//! Team plans for strategies with prescribed lower/upper densities.
//!
//! Players are partitioned into teams `T_k = {n_k + 1, ..., n_{k+1}}`. The
//! first `g_k` members of a team form the gambler squad, split into `b_k`
//! blocks of `s_k` players; the remaining `r_k` members form the recovery
//! squad, which always plays pairs. All parameters are exact: `g_k`, `s_k`
//! and `r_k` are integers with `s_k` and `r_k` even.
//!
//! Default schedules (used when none is supplied):
//!
//! * `b_k = floor(log2(k + 2))`
//! * `eps_k = 1 / (k + 2)`
//! * `u_k = u - (u - 1/2) / (k + 2)` for `u < 1`
//! * `u_k = 1 - 16 / (32 + ceil(16 sqrt(b_k)))` for `u = 1`, so that
//!   `(1 - u_k) b_k` grows like `sqrt(b_k)`
//!
//! `u_0` is fixed at `1/2`, giving `alpha_0 = 0`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub const PLAN_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeamMode {
    PlayToWin,
    PlayToLose,
    /// Even-indexed teams play to win, odd-indexed teams play to lose.
    Alternating,
}

impl TeamMode {
    pub fn play_for(self, k: u64) -> Play {
        match self {
            TeamMode::PlayToWin => Play::Win,
            TeamMode::PlayToLose => Play::Lose,
            TeamMode::Alternating => {
                if k.is_multiple_of(2) {
                    Play::Win
                } else {
                    Play::Lose
                }
            }
        }
    }
}

/// What a gambler block waits for before playing even-odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Play {
    /// Every earlier block of the team had an even number of white hats.
    Win,
    /// Every earlier block of the team had an odd number of white hats.
    Lose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamParams {
    pub k: u64,
    pub n: u64,
    pub g: u64,
    pub r: u64,
    pub b: u64,
    pub s: u64,
    /// Gambling target of this team. For a losing team the density it drives
    /// toward is `1 - u`.
    pub u: Rational,
    pub alpha: Rational,
    pub epsilon: Rational,
    pub play: Play,
}

impl TeamParams {
    /// First player of the team.
    pub fn first(&self) -> u64 {
        self.n + 1
    }

    /// Last player of the team, `n_{k+1}`.
    pub fn last(&self) -> u64 {
        self.n + self.g + self.r
    }

    /// Players of gambler block `j` (1-based), inclusive.
    pub fn block(&self, j: u64) -> (u64, u64) {
        (self.n + (j - 1) * self.s + 1, self.n + j * self.s)
    }
}

/// Parameters of the team following the last one; they fix the closing
/// divisibility condition on `n_T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosingParams {
    pub k: u64,
    pub n: u64,
    pub b: u64,
    pub u: Rational,
    pub alpha: Rational,
    pub epsilon: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamPlan {
    pub version: u32,
    pub upper: Rational,
    pub lower: Rational,
    pub mode: TeamMode,
    pub teams: Vec<TeamParams>,
    pub closing: ClosingParams,
}

impl TeamPlan {
    /// `n_T`, the last player covered by the plan.
    pub fn end(&self) -> u64 {
        self.closing.n
    }

    /// Index of the team containing `player`.
    pub fn team_of(&self, player: u64) -> Option<usize> {
        if player == 0 || player > self.end() {
            return None;
        }
        let idx = self.teams.partition_point(|t| t.last() < player);
        Some(idx)
    }

    /// `eps_k` for `k = 0..=T`.
    pub fn epsilon(&self, k: usize) -> &Rational {
        if k < self.teams.len() {
            &self.teams[k].epsilon
        } else {
            &self.closing.epsilon
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// A user-supplied schedule indexed by `k` from 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule(pub Vec<Rational>);

impl Schedule {
    fn at(&self, k: u64, what: &str) -> Result<Rational> {
        self.0
            .get(k as usize)
            .cloned()
            .ok_or_else(|| Error::InvalidArgument(format!("{what} schedule has no entry for k = {k}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    /// `u_k` for the upper (winning) side; entry 0 is ignored.
    pub upper_schedule: Option<Schedule>,
    /// `u_k` for the mirrored lower (losing) side; entry 0 is ignored.
    pub lower_schedule: Option<Schedule>,
    /// `eps_k`, needs entries `0..=numTeams`.
    pub epsilon_schedule: Option<Schedule>,
}

/// `b_k = floor(log2(k + 2))`.
pub fn gambler_blocks(k: u64) -> u64 {
    let x = k.checked_add(2).expect("k + 2 overflows");
    u64::from(63 - x.leading_zeros())
}

pub fn default_epsilon(k: u64) -> Rational {
    Rational::new(1u64, k + 2).expect("positive")
}

fn ceil_sqrt(x: u64) -> u64 {
    let mut r = (x as f64).sqrt() as u64;
    while r * r > x {
        r -= 1;
    }
    while r * r < x {
        r += 1;
    }
    r
}

/// Default rational schedule `u_k` with `1/2 < u_k < u` converging to `u`.
pub fn default_u_schedule(u: &Rational, k: u64) -> Result<Rational> {
    let half = Rational::half();
    if *u <= half || *u > Rational::one() {
        return Err(Error::InvalidArgument(format!("u = {u} needs 1/2 < u <= 1 for a schedule")));
    }
    if *u == Rational::one() {
        let b = gambler_blocks(k);
        let root = ceil_sqrt(256 * b);
        return Ok(Rational::one() - Rational::new(16u64, 32 + root).expect("positive"));
    }
    Ok(u - &((u - &half) / Rational::integer(k + 2)))
}

/// `alpha = (u - 1/2) / (1 - u)`.
pub fn alpha_for(u: &Rational) -> Result<Rational> {
    let one_minus = Rational::one() - u;
    if one_minus.is_zero() || one_minus.is_negative() {
        return Err(Error::InvalidPlan(format!("u_k = {u} must be below 1")));
    }
    Ok(&(u - &Rational::half()) / &one_minus)
}

fn to_u64(x: &BigInt, what: &'static str) -> Result<u64> {
    x.to_u64().ok_or(Error::Overflow(what))
}

/// Side targets for team `k`: the gambling target `t` (upper, or `1 - lower`).
fn side_target(upper: &Rational, lower: &Rational, play: Play) -> Rational {
    match play {
        Play::Win => upper.clone(),
        Play::Lose => Rational::one() - lower,
    }
}

fn schedule_u(target: &Rational, k: u64, explicit: Option<&Schedule>) -> Result<Rational> {
    if k == 0 || *target == Rational::half() {
        return Ok(Rational::half());
    }
    let uk = match explicit {
        Some(s) => s.at(k, "u")?,
        None => default_u_schedule(target, k)?,
    };
    if uk <= Rational::half() || uk >= *target {
        return Err(Error::InvalidArgument(format!(
            "schedule violates 1/2 < u_k < {target} at k = {k}: u_k = {uk}"
        )));
    }
    Ok(uk)
}

struct TeamShape {
    u: Rational,
    alpha: Rational,
    b: u64,
    epsilon: Rational,
}

/// Generate the first `num_teams` teams of a plan with upper target `upper`
/// and lower target `lower`.
///
/// For [`TeamMode::PlayToWin`] pass `lower = 1/2`; for
/// [`TeamMode::PlayToLose`] pass `upper = 1/2`. Each `r_k` is the smallest
/// even integer satisfying the recovery sandwich and the divisibility
/// condition for the next team.
pub fn generate_plan_with(
    upper: &Rational,
    lower: &Rational,
    mode: TeamMode,
    num_teams: u64,
    options: &PlanOptions,
) -> Result<TeamPlan> {
    let half = Rational::half();
    if *upper < half || *upper > Rational::one() {
        return Err(Error::InvalidArgument(format!("u = {upper} is outside [1/2, 1]")));
    }
    if lower.is_negative() || *lower > half {
        return Err(Error::InvalidArgument(format!("l = {lower} is outside [0, 1/2]")));
    }
    if num_teams == 0 {
        return Err(Error::InvalidArgument("numTeams must be at least 1".into()));
    }
    match mode {
        TeamMode::PlayToWin if *lower != half => {
            return Err(Error::InvalidArgument("play-to-win plans have lower target 1/2".into()))
        }
        TeamMode::PlayToLose if *upper != half => {
            return Err(Error::InvalidArgument("play-to-lose plans have upper target 1/2".into()))
        }
        _ => {}
    }

    let shape = |k: u64| -> Result<TeamShape> {
        let play = mode.play_for(k);
        let target = side_target(upper, lower, play);
        let explicit = match play {
            Play::Win => options.upper_schedule.as_ref(),
            Play::Lose => options.lower_schedule.as_ref(),
        };
        let u = schedule_u(&target, k, explicit)?;
        let alpha = alpha_for(&u)?;
        let epsilon = match &options.epsilon_schedule {
            Some(s) => s.at(k, "epsilon")?,
            None => default_epsilon(k),
        };
        if epsilon.is_zero() || epsilon.is_negative() {
            return Err(Error::InvalidArgument(format!("eps_{k} must be positive")));
        }
        Ok(TeamShape { u, alpha, b: gambler_blocks(k), epsilon })
    };

    let mut teams = Vec::with_capacity(num_teams as usize);
    let mut n: u64 = 0;
    let mut current = shape(0)?;
    for k in 0..num_teams {
        let next = shape(k + 1)?;
        let g_exact = &current.alpha * &Rational::integer(n);
        if !g_exact.is_integer() {
            return Err(Error::InvalidPlan(format!("g_{k} = {g_exact} is not an integer")));
        }
        let g = to_u64(&g_exact.floor(), "g_k")?;
        let s_exact = &g_exact / &Rational::integer(current.b);
        if !s_exact.is_even_integer() {
            return Err(Error::InvalidPlan(format!("s_{k} = {s_exact} is not an even integer")));
        }
        let s = to_u64(&s_exact.floor(), "s_k")?;
        let m = n.checked_add(g).ok_or(Error::Overflow("n_k + g_k"))?;
        let r = minimal_recovery(m, &next.epsilon, &(&next.alpha / &Rational::integer(next.b)))?;
        teams.push(TeamParams {
            k,
            n,
            g,
            r,
            b: current.b,
            s,
            u: current.u.clone(),
            alpha: current.alpha.clone(),
            epsilon: current.epsilon.clone(),
            play: mode.play_for(k),
        });
        n = m.checked_add(r).ok_or(Error::Overflow("n_{k+1}"))?;
        current = next;
    }
    Ok(TeamPlan {
        version: PLAN_SCHEMA_VERSION,
        upper: upper.clone(),
        lower: lower.clone(),
        mode,
        teams,
        closing: ClosingParams {
            k: num_teams,
            n,
            b: current.b,
            u: current.u,
            alpha: current.alpha,
            epsilon: current.epsilon,
        },
    })
}

/// Play-to-win plan for upper density `u`.
pub fn generate_plan(u: &Rational, num_teams: u64) -> Result<TeamPlan> {
    generate_plan_with(u, &Rational::half(), TeamMode::PlayToWin, num_teams, &PlanOptions::default())
}

/// Plan realizing lower target `l` and upper target `u` with the mode implied
/// by the targets: win-only when `l = 1/2`, lose-only when `u = 1/2`, and
/// alternating otherwise.
pub fn generate_plan_for_targets(lower: &Rational, upper: &Rational, num_teams: u64) -> Result<TeamPlan> {
    let half = Rational::half();
    let mode = if *lower == half {
        TeamMode::PlayToWin
    } else if *upper == half {
        TeamMode::PlayToLose
    } else {
        TeamMode::Alternating
    };
    generate_plan_with(upper, lower, mode, num_teams, &PlanOptions::default())
}

/// Smallest even `r >= 2` with
/// `1/2 - eps < (r/2)/(m+r)` and `(r/2 + m)/(m+r) < 1/2 + eps`,
/// such that `(m + r) * ratio` is an even integer.
fn minimal_recovery(m: u64, eps: &Rational, ratio: &Rational) -> Result<u64> {
    let half = Rational::half();
    // Both sides reduce to r > m (1 - 2 eps) / (2 eps) when eps < 1/2.
    let two_eps = &Rational::integer(2) * eps;
    let lower_bound = if two_eps >= Rational::one() {
        Rational::zero()
    } else {
        &(&Rational::integer(m) * &(Rational::one() - &two_eps)) / &two_eps
    };
    let mut r_big = lower_bound.floor() + BigInt::one();
    // (m + r) must be a multiple of `modulus`, which is even.
    let modulus: BigInt = if ratio.is_zero() {
        BigInt::from(2)
    } else {
        let two_den = ratio.denom() * BigInt::from(2);
        let g = ratio.numer().abs().gcd(&two_den);
        let base = two_den / g;
        base.lcm(&BigInt::from(2))
    };
    let m_big = BigInt::from(m);
    if r_big < BigInt::from(2) {
        r_big = BigInt::from(2);
    }
    let rem = (&m_big + &r_big).mod_floor(&modulus);
    if !rem.is_zero() {
        r_big += &modulus - rem;
    }
    let sandwich = |r: &BigInt| {
        let total = Rational::integer(&m_big + r);
        let half_r = &Rational::integer(r.clone()) * &half;
        let lo = &half_r / &total;
        let hi = &(&half_r + &Rational::integer(m_big.clone())) / &total;
        lo > &half - eps && hi < &half + eps
    };
    while !sandwich(&r_big) {
        r_big += &modulus;
    }
    to_u64(&r_big, "r_k")
}

/// Outcome of [`validate_plan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub team: u64,
    pub check: String,
    pub detail: String,
}

impl PlanReport {
    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn has(&self, check: &str) -> bool {
        self.violations.iter().any(|v| v.check == check)
    }
}

/// Floor of log base 2 by repeated doubling.
fn floor_log2_by_doubling(x: u64) -> u64 {
    let mut e = 0;
    let mut p: u128 = 2;
    while p <= u128::from(x) {
        p *= 2;
        e += 1;
    }
    e
}

/// Re-verify every plan invariant from scratch with exact arithmetic.
///
/// Shares no code with the generator beyond the rational type.
pub fn validate_plan(plan: &TeamPlan) -> PlanReport {
    let mut violations = Vec::new();
    let mut flag = |team: u64, check: &str, detail: String| {
        violations.push(Violation { team, check: check.to_string(), detail })
    };
    let half = Rational::half();
    let one = Rational::one();
    let int = |x: u64| Rational::integer(BigInt::from(x));

    if plan.upper < half || plan.upper > one {
        flag(0, "upper target in [1/2, 1]", format!("u = {}", plan.upper));
    }
    if plan.lower.is_negative() || plan.lower > half {
        flag(0, "lower target in [0, 1/2]", format!("l = {}", plan.lower));
    }
    if plan.teams.is_empty() {
        flag(0, "at least one team", String::new());
    }
    if plan.teams.first().is_some_and(|t| t.n != 0) {
        flag(0, "n_0 = 0", format!("n_0 = {}", plan.teams[0].n));
    }

    // Per-team checks. `shapes` has one entry per team plus the closing team.
    let shapes: Vec<(u64, u64, &Rational, &Rational, &Rational)> = plan
        .teams
        .iter()
        .map(|t| (t.k, t.b, &t.u, &t.alpha, &t.epsilon))
        .chain(std::iter::once((
            plan.closing.k,
            plan.closing.b,
            &plan.closing.u,
            &plan.closing.alpha,
            &plan.closing.epsilon,
        )))
        .collect();

    // Previous u_k and (1 - u_k) b_k along each side (win, lose).
    let mut prev_u: [Option<Rational>; 2] = [None, None];
    let mut prev_growth: [Option<Rational>; 2] = [None, None];
    for (idx, &(k, b, u, alpha, eps)) in shapes.iter().enumerate() {
        if k != idx as u64 {
            flag(k, "team index", format!("expected k = {idx}, found {k}"));
        }
        let expected_b = floor_log2_by_doubling(k + 2);
        if b != expected_b {
            flag(k, "b_k = floor(log2(k+2))", format!("b_k = {b}, expected {expected_b}"));
        }
        if eps.is_zero() || eps.is_negative() {
            flag(k, "eps_k > 0", format!("eps_k = {eps}"));
        }
        let play = plan.mode.play_for(k);
        if let Some(t) = plan.teams.get(idx) {
            if t.play != play {
                flag(k, "play matches mode", format!("{:?} under {:?}", t.play, plan.mode));
            }
        }
        let target = match play {
            Play::Win => plan.upper.clone(),
            Play::Lose => &one - &plan.lower,
        };
        if k == 0 {
            if !alpha.is_zero() {
                flag(k, "alpha_0 = 0", format!("alpha_0 = {alpha}"));
            }
            continue;
        }
        if target == half {
            if *u != half {
                flag(k, "u_k = 1/2 for target 1/2", format!("u_k = {u}"));
            }
        } else if !(*u > half && *u < target) {
            flag(k, "1/2 < u_k < u", format!("u_k = {u}, target {target}"));
        }
        let one_minus = &one - u;
        if one_minus.is_zero() {
            flag(k, "alpha_k = (u_k - 1/2)/(1 - u_k)", "u_k = 1".into());
            continue;
        }
        let expected = &(u - &half) / &one_minus;
        if *alpha != expected {
            flag(k, "alpha_k = (u_k - 1/2)/(1 - u_k)", format!("alpha_k = {alpha}, expected {expected}"));
        }
        let side = match play {
            Play::Win => 0,
            Play::Lose => 1,
        };
        if let Some(p) = &prev_u[side] {
            if u < p {
                flag(k, "u_k non-decreasing", format!("u_k = {u} after {p}"));
            }
        }
        prev_u[side] = Some(u.clone());
        if target == one {
            let growth = &one_minus * &int(b);
            if let Some(pg) = &prev_growth[side] {
                if growth < *pg {
                    flag(k, "(1 - u_k) b_k non-decreasing", format!("{growth} after {pg}"));
                }
            }
            prev_growth[side] = Some(growth);
        }
    }

    for (idx, t) in plan.teams.iter().enumerate() {
        let k = t.k;
        let n = int(t.n);
        let g_expected = &t.alpha * &n;
        if !g_expected.is_integer() {
            flag(k, "g_k = alpha_k n_k integer", format!("alpha_k n_k = {g_expected}"));
        } else if g_expected != int(t.g) {
            flag(k, "g_k = alpha_k n_k integer", format!("g_k = {}, alpha_k n_k = {g_expected}", t.g));
        }
        if t.b == 0 || t.s.checked_mul(t.b) != Some(t.g) {
            flag(k, "g_k = b_k s_k", format!("g_k = {}, b_k = {}, s_k = {}", t.g, t.b, t.s));
        }
        if t.s % 2 != 0 {
            flag(k, "s_k even", format!("s_k = {}", t.s));
        }
        if t.r % 2 != 0 {
            flag(k, "r_k even", format!("r_k = {}", t.r));
        }
        let next_n = match plan.teams.get(idx + 1) {
            Some(nt) => nt.n,
            None => plan.closing.n,
        };
        let sum = t.n as u128 + t.g as u128 + t.r as u128;
        if sum != u128::from(next_n) {
            flag(k, "n_{k+1} = n_k + g_k + r_k", format!("{} + {} + {} != {next_n}", t.n, t.g, t.r));
        }
        let eps_next = shapes[idx + 1].4;
        let total = Rational::integer(BigInt::from(sum));
        if total.is_zero() {
            flag(k, "r_k sandwich", "empty team".into());
        } else {
            let half_r = &int(t.r) * &half;
            let lo = &half_r / &total;
            let hi = &(&half_r + &(&n + &int(t.g))) / &total;
            if !(lo > &half - eps_next && lo <= hi && hi < &half + eps_next) {
                flag(
                    k,
                    "r_k sandwich",
                    format!("need 1/2 - {eps_next} < {lo} <= {hi} < 1/2 + {eps_next}"),
                );
            }
        }
        let (_, b_next, _, alpha_next, _) = shapes[idx + 1];
        if b_next == 0 {
            flag(k + 1, "b_k > 0", String::new());
        } else {
            let x = &(&total * alpha_next) / &int(b_next);
            if !x.is_even_integer() {
                flag(k, "(n_k+g_k+r_k) alpha_{k+1}/b_{k+1} even integer", format!("value {x}"));
            }
        }
    }

    PlanReport { passed: violations.is_empty(), violations }
}
