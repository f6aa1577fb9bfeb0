//! Exhaustive analysis of finite games with exact rational results.
//!
//! Every assignment of a finite game has the same weight, so probabilities
//! are ratios of counts. Counts are kept as integers and turned into
//! [`Rational`]s only at the end.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{Color, ColorSpace, HatAssignment, Tail};
use crate::rational::Rational;
use crate::strategies::mixed::{active_index, is_inactive};
use crate::strategies::{HatView, Private, Strategy, View, Window};

/// Largest number of equally weighted outcomes enumerated in one analysis.
pub const ENUMERATION_LIMIT: u128 = 1 << 24;

fn guard(what: &'static str, size: u128) -> Result<()> {
    if size > ENUMERATION_LIMIT {
        return Err(Error::SizeGuard { what, size, limit: ENUMERATION_LIMIT });
    }
    Ok(())
}

/// Law of `Z̄_n`: `counts[c]` of `total` equally likely outcomes have exactly
/// `c` correct guesses among players `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDistribution {
    pub n: u64,
    pub total: u128,
    pub counts: Vec<u128>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: String,
    pub probability: String,
}

impl ExactDistribution {
    fn new(n: u64, total: u128, counts: Vec<u128>) -> Self {
        debug_assert_eq!(counts.iter().sum::<u128>(), total);
        ExactDistribution { n, total, counts }
    }

    pub fn probability_of_count(&self, c: u64) -> Rational {
        let hits = self.counts.get(c as usize).copied().unwrap_or(0);
        Rational::new(hits, self.total).expect("total > 0")
    }

    /// `P(Z̄ = value)`.
    pub fn probability(&self, value: &Rational) -> Rational {
        let scaled = value * &Rational::integer(self.n);
        if !scaled.is_integer() || scaled.is_negative() {
            return Rational::zero();
        }
        match scaled.to_u64() {
            Ok(c) => self.probability_of_count(c),
            Err(_) => Rational::zero(),
        }
    }

    /// Atoms `(Z̄ value, probability)` with positive probability.
    pub fn support(&self) -> Vec<(Rational, Rational)> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &h)| h > 0)
            .map(|(c, &h)| {
                (Rational::new(c as u64, self.n).expect("n > 0"), Rational::new(h, self.total).expect("total > 0"))
            })
            .collect()
    }

    pub fn total_probability(&self) -> Rational {
        self.support().into_iter().map(|(_, p)| p).sum()
    }

    pub fn mean(&self) -> Rational {
        let weighted: u128 = self.counts.iter().enumerate().map(|(c, &h)| c as u128 * h).sum();
        Rational::new(weighted, u128::from(self.n) * self.total).expect("positive")
    }

    /// `P(Z̄ >= alpha)`.
    pub fn at_least(&self, alpha: &Rational) -> Rational {
        self.support().into_iter().filter(|(v, _)| v >= alpha).map(|(_, p)| p).sum()
    }

    /// Markov's inequality `P(Z̄ >= a) <= E[Z̄]/a` at `a = 1/2 + j/n`.
    pub fn markov_holds(&self) -> bool {
        let mean = self.mean();
        let n = self.n as i64;
        (1..=n).all(|j| {
            let a = Rational::half() + Rational::frac(j, n);
            a > Rational::one() || self.at_least(&a) <= &mean / &a
        })
    }

    pub fn atoms(&self) -> Vec<Atom> {
        self.support()
            .into_iter()
            .map(|(v, p)| Atom { value: v.to_string(), probability: p.to_string() })
            .collect()
    }

    /// CSV with columns `value,numerator,denominator`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,numerator,denominator\n");
        for (v, p) in self.support() {
            out.push_str(&format!("{v},{},{}\n", p.numer(), p.denom()));
        }
        out
    }
}

/// Explicit strategy of a finite game: `tables[i][x]` is the guess of player
/// `i + 1` when the other players' colors, in increasing player order, are
/// the base-`k` digits of `x` (the lowest-numbered player is the least
/// significant digit).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteStrategyTable {
    pub n: u64,
    pub k: u64,
    pub tables: Vec<Vec<u64>>,
}

impl FiniteStrategyTable {
    pub fn new(n: u64, k: u64, tables: Vec<Vec<u64>>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("a game needs at least one player"));
        }
        if k < 2 {
            return Err(invalid("a game needs at least two colors"));
        }
        let size = (k as u128).checked_pow((n - 1) as u32).ok_or(Error::Overflow("table size"))?;
        guard("table size", size)?;
        if tables.len() as u64 != n {
            return Err(invalid(format!("{} tables for {n} players", tables.len())));
        }
        for (i, t) in tables.iter().enumerate() {
            if t.len() as u128 != size {
                return Err(invalid(format!("table of player {} has {} entries, expected {size}", i + 1, t.len())));
            }
            if t.iter().any(|&c| c >= k) {
                return Err(invalid(format!("table of player {} has a color outside 0..{k}", i + 1)));
            }
        }
        Ok(FiniteStrategyTable { n, k, tables })
    }

    /// Tabulate a deterministic strategy on `n` players whose windows stay
    /// inside `1..=n`.
    pub fn from_strategy(strategy: &Strategy, n: u64) -> Result<Self> {
        if strategy.is_randomized() {
            return Err(invalid("randomized strategies have no table"));
        }
        let k = finite_colors(strategy)?;
        for i in 1..=n {
            if strategy.window(i)?.max().is_some_and(|m| m > n) {
                return Err(invalid(format!("window of player {i} leaves the first {n} players")));
            }
        }
        let size = (k as u128).checked_pow((n - 1) as u32).ok_or(Error::Overflow("table size"))?;
        guard("table size", size)?;
        let tables = (1..=n)
            .map(|i| {
                (0..size as u64)
                    .map(|x| {
                        let mut colors = Vec::with_capacity(n as usize);
                        let mut rest = x;
                        for p in 1..=n {
                            if p == i {
                                colors.push(Color::Index(0));
                            } else {
                                colors.push(Color::Index(rest % k));
                                rest /= k;
                            }
                        }
                        let hats = HatAssignment::from_colors(ColorSpace::FiniteK { k }, colors, Tail::Unsampled)?;
                        index(strategy.guess(i, &View::new(&hats, Private::Seed(0)))?)
                    })
                    .collect::<Result<Vec<u64>>>()
            })
            .collect::<Result<_>>()?;
        FiniteStrategyTable::new(n, k, tables)
    }

    fn others_index(&self, player: usize, hats: &[u64]) -> usize {
        let mut x = 0usize;
        let mut scale = 1usize;
        for (p, &c) in hats.iter().enumerate() {
            if p != player {
                x += c as usize * scale;
                scale *= self.k as usize;
            }
        }
        x
    }

    /// Guess of player `player` (1-based) under `hats`.
    pub fn guess(&self, player: u64, hats: &[u64]) -> u64 {
        let i = (player - 1) as usize;
        self.tables[i][self.others_index(i, hats)]
    }

    pub fn correct_count(&self, hats: &[u64]) -> u64 {
        (1..=self.n).filter(|&p| self.guess(p, hats) == hats[(p - 1) as usize]).count() as u64
    }
}

fn index(c: Color) -> Result<u64> {
    c.index().ok_or_else(|| Error::ColorSpace("expected an indexed color".into()))
}

fn finite_colors(strategy: &Strategy) -> Result<u64> {
    match strategy.space() {
        ColorSpace::Binary => Ok(2),
        ColorSpace::FiniteK { k } => Ok(k),
        other => Err(Error::ColorSpace(format!("exact analysis needs finitely many colors, not {other:?}"))),
    }
}

fn digits(mut x: u64, k: u64, len: usize) -> Vec<u64> {
    let mut v = Vec::with_capacity(len);
    for _ in 0..len {
        v.push(x % k);
        x /= k;
    }
    v
}

/// Law of `Z̄_n` under a strategy table, by enumerating all `K^n` assignments.
pub fn exact_distribution(table: &FiniteStrategyTable) -> Result<ExactDistribution> {
    let total = (table.k as u128).checked_pow(table.n as u32).ok_or(Error::Overflow("K^n"))?;
    guard("K^n assignments", total)?;
    let counts = (0..total as u64)
        .into_par_iter()
        .fold(
            || vec![0u128; table.n as usize + 1],
            |mut acc, x| {
                let hats = digits(x, table.k, table.n as usize);
                acc[table.correct_count(&hats) as usize] += 1;
                acc
            },
        )
        .reduce(|| vec![0u128; table.n as usize + 1], add_counts);
    Ok(ExactDistribution::new(table.n, total, counts))
}

fn add_counts(mut a: Vec<u128>, b: Vec<u128>) -> Vec<u128> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

pub fn exact_mean(table: &FiniteStrategyTable) -> Result<Rational> {
    Ok(exact_distribution(table)?.mean())
}

/// Law of `Z̄_n` under a library strategy, enumerating every hat up to the
/// horizon `H(n)` and, for randomized rules, every private coin.
pub fn exact_distribution_of(strategy: &Strategy, n: u64) -> Result<ExactDistribution> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let k = finite_colors(strategy)?;
    let h = strategy.horizon(n)?;
    let hats_total = (k as u128).checked_pow(u32::try_from(h).map_err(|_| Error::Overflow("horizon"))?);
    let coin_total = if strategy.is_randomized() { (k as u128).checked_pow(n as u32) } else { Some(1) };
    let (hats_total, coin_total) = match (hats_total, coin_total) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::SizeGuard { what: "assignments", size: u128::MAX, limit: ENUMERATION_LIMIT }),
    };
    let total = hats_total.checked_mul(coin_total).ok_or(Error::Overflow("assignments"))?;
    guard("assignments", total)?;
    let counts = (0..hats_total as u64)
        .into_par_iter()
        .map(|x| -> Result<Vec<u128>> {
            let hat_digits = digits(x, k, h as usize);
            let mut acc = vec![0u128; n as usize + 1];
            for y in 0..coin_total as u64 {
                let coins: Vec<u8> = digits(y, k, n as usize).into_iter().map(|c| c as u8).collect();
                let private = Private::Coins(&coins);
                let guesses: Vec<u64> = if k == 2 {
                    let bits: Vec<u8> = hat_digits.iter().map(|&c| c as u8).collect();
                    strategy.bulk_bits(&bits, n, private)?.into_iter().map(u64::from).collect()
                } else {
                    let colors = hat_digits.iter().map(|&c| Color::Index(c)).collect();
                    let hats = HatAssignment::from_colors(strategy.space(), colors, Tail::Unsampled)?;
                    let view = View::new(&hats, private);
                    (1..=n).map(|p| index(strategy.guess(p, &view)?)).collect::<Result<_>>()?
                };
                let correct = guesses.iter().zip(&hat_digits).filter(|(g, c)| g == c).count();
                acc[correct] += 1;
            }
            Ok(acc)
        })
        .try_reduce(|| vec![0u128; n as usize + 1], |a, b| Ok(add_counts(a, b)))?;
    Ok(ExactDistribution::new(n, total, counts))
}

/// Hats of a fixed finite set of players; reading any other hat is an error.
struct LocalView<'a> {
    players: &'a [u64],
    colors: &'a [u64],
    coins: &'a [u8],
}

impl HatView for LocalView<'_> {
    fn color(&self, player: u64) -> Result<Color> {
        match self.players.binary_search(&player) {
            Ok(i) => Ok(Color::Index(self.colors[i])),
            Err(_) => Err(Error::InvalidArgument(format!("read hat {player} outside the declared window"))),
        }
    }

    fn private(&self) -> Private<'_> {
        Private::Coins(self.coins)
    }
}

/// Per-configuration conditional correct counts of `player`: for each
/// configuration of the window (in enumeration order) the number of
/// `(own hat, own coin)` outcomes in which the player is right, out of
/// `per_config`.
struct LocalTally {
    window: Window,
    window_contains_self: bool,
    per_config: u64,
    hits: Vec<u64>,
}

fn local_tally(strategy: &Strategy, player: u64, max_window: u64) -> Result<LocalTally> {
    let k = finite_colors(strategy)?;
    let window = strategy.window(player)?;
    let contains_self = window.contains(player);
    if window.size() > max_window {
        return Err(Error::SizeGuard {
            what: "window size",
            size: u128::from(window.size()),
            limit: u128::from(max_window),
        });
    }
    let mut players: Vec<u64> = window.iter().collect();
    let others = players.len();
    if !contains_self {
        players.push(player);
    }
    players.sort_unstable();
    let own_pos = players.binary_search(&player).expect("present");
    let coins_k = if strategy.is_randomized() { k } else { 1 };
    let configs = (k as u128).checked_pow(others as u32).ok_or(Error::Overflow("window configurations"))?;
    let own = if contains_self { 1 } else { k };
    guard("window configurations", configs * u128::from(own) * u128::from(coins_k))?;
    let hits = (0..configs as u64)
        .into_par_iter()
        .map(|x| -> Result<u64> {
            let cfg = digits(x, k, others);
            let mut hits = 0;
            for own_color in 0..own {
                let mut colors = Vec::with_capacity(players.len());
                let mut it = cfg.iter();
                for (idx, _) in players.iter().enumerate() {
                    if idx == own_pos && !contains_self {
                        colors.push(own_color);
                    } else {
                        colors.push(*it.next().expect("digit per window player"));
                    }
                }
                for coin in 0..coins_k {
                    let mut coins = vec![0u8; player as usize];
                    coins[(player - 1) as usize] = coin as u8;
                    let view = LocalView { players: &players, colors: &colors, coins: &coins };
                    if index(strategy.guess(player, &view)?)? == colors[own_pos] {
                        hits += 1;
                    }
                }
            }
            Ok(hits)
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(LocalTally { window, window_contains_self: contains_self, per_config: own * coins_k, hits })
}

/// `P(Z_i = 1)` by enumerating the window of `i`, its own hat and its coin.
pub fn correct_probability(strategy: &Strategy, player: u64) -> Result<Rational> {
    if let Strategy::Mixed(m) = strategy {
        if is_inactive(player) {
            return Ok(Rational::half());
        }
        let a = active_index(player);
        let mut acc = Rational::zero();
        for (arm, weight) in m.arms().iter().zip(m.dispatch_probabilities()) {
            acc = acc + &weight * &correct_probability(arm, a)?;
        }
        return Ok(acc);
    }
    let t = local_tally(strategy, player, 22)?;
    let hits: u64 = t.hits.iter().sum();
    Rational::new(hits, t.per_config * t.hits.len() as u64)
}

/// `E[Z̄_n]` by linearity over window-local enumerations.
pub fn exact_mean_of(strategy: &Strategy, n: u64) -> Result<Rational> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let mut acc = Rational::zero();
    for i in 1..=n {
        acc = acc + correct_probability(strategy, i)?;
    }
    Ok(&acc / &Rational::integer(n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub player: u64,
    pub window_size: u64,
    pub window_contains_self: bool,
    pub configurations: u64,
    /// Expected conditional probability, `1/K`.
    pub expected: String,
    /// Distinct conditional probabilities observed.
    pub observed: Vec<String>,
    pub passed: bool,
}

/// For every configuration of the window of `player`, the exact conditional
/// probability that the player is right. Passes iff every one equals `1/K`
/// and the window excludes the player.
pub fn verify_independence(strategy: &Strategy, player: u64) -> Result<IndependenceReport> {
    verify_independence_within(strategy, player, 22)
}

/// As [`verify_independence`], refusing windows larger than `max_window`.
pub fn verify_independence_within(strategy: &Strategy, player: u64, max_window: u64) -> Result<IndependenceReport> {
    let k = finite_colors(strategy)?;
    let t = local_tally(strategy, player, max_window)?;
    let expected = Rational::new(1u64, k)?;
    let mut observed: BTreeMap<Rational, ()> = BTreeMap::new();
    for &h in &t.hits {
        observed.insert(Rational::new(h, t.per_config)?, ());
    }
    let passed = !t.window_contains_self && observed.keys().all(|p| *p == expected);
    Ok(IndependenceReport {
        player,
        window_size: t.window.size(),
        window_contains_self: t.window_contains_self,
        configurations: t.hits.len() as u64,
        expected: expected.to_string(),
        observed: observed.keys().map(|r| r.to_string()).collect(),
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Maximize `P(Z̄ = 1)`.
    MaxAllCorrect,
    /// Maximize `min over assignments of Z̄`.
    MaxGuaranteedFraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub n: u64,
    pub objective: Objective,
    pub optimum: Rational,
    pub witness: FiniteStrategyTable,
    /// Strategy tuples scored, counting each pointwise-optimized last
    /// player once.
    pub examined: u64,
}

/// Guess of player `i` (0-based) with table `f` (bit `x` of `f` is the
/// guess on others-index `x`) under assignment `a` (bit `p` is player `p`).
fn table_guess(f: u32, i: usize, a: u32, n: usize) -> u32 {
    let mut x = 0u32;
    let mut t = 0;
    for p in 0..n {
        if p != i {
            x |= ((a >> p) & 1) << t;
            t += 1;
        }
    }
    (f >> x) & 1
}

fn correct_counts(fs: &[u32], n: usize) -> Vec<u32> {
    (0..1u32 << n)
        .map(|a| (0..n).filter(|&i| table_guess(fs[i], i, a, n) == (a >> i) & 1).count() as u32)
        .collect()
}

fn raw_score(objective: Objective, counts: &[u32], n: usize) -> u32 {
    match objective {
        Objective::MaxAllCorrect => counts.iter().filter(|&&c| c as usize == n).count() as u32,
        Objective::MaxGuaranteedFraction => *counts.iter().min().expect("nonempty"),
    }
}

fn to_table(fs: &[u32], n: usize) -> FiniteStrategyTable {
    let size = 1usize << (n - 1);
    let tables = fs.iter().map(|&f| (0..size).map(|x| u64::from((f >> x) & 1)).collect()).collect();
    FiniteStrategyTable { n: n as u64, k: 2, tables }
}

fn optimum_value(objective: Objective, best: u32, n: usize) -> Rational {
    match objective {
        Objective::MaxAllCorrect => Rational::new(best, 1u64 << n).expect("positive"),
        Objective::MaxGuaranteedFraction => Rational::new(best, n as u64).expect("positive"),
    }
}

/// Exact optimum of `objective` over all deterministic strategies of the
/// binary game with `n <= 4` players, with a witness attaining it.
///
/// For `n <= 3` every tuple is scored. For `n = 4` two reductions keep the
/// search exact. Renaming the colors of player 1's hat (negating its guesses
/// and letting everyone else read its hat flipped) permutes assignments and
/// keeps both scores, so player 1 may be assumed to guess black on the
/// all-black view. Both objectives separate over the views of the last
/// player, so its table is optimized one view at a time.
pub fn search_strategy_space(n: u64, objective: Objective) -> Result<SearchResult> {
    match n {
        0 => Err(invalid("n must be at least 1")),
        1..=3 => Ok(brute_force(n as usize, objective)),
        4 => Ok(search_four(objective)),
        _ => Err(Error::TooLarge(format!("n too large: exhaustive search supports n <= 4, got {n}"))),
    }
}

fn brute_force(n: usize, objective: Objective) -> SearchResult {
    let per = 1u64 << (1u32 << (n - 1));
    let tuples = per.pow(n as u32);
    let (best, idx) = (0..tuples)
        .into_par_iter()
        .map(|t| {
            let fs = unpack(t, per, n);
            (raw_score(objective, &correct_counts(&fs, n), n), t)
        })
        .reduce(|| (0, u64::MAX), pick_best);
    let fs = unpack(idx, per, n);
    SearchResult {
        n: n as u64,
        objective,
        optimum: optimum_value(objective, best, n),
        witness: to_table(&fs, n),
        examined: tuples,
    }
}

/// Higher score wins; ties go to the smaller tuple index so the result does
/// not depend on scheduling.
fn pick_best(a: (u32, u64), b: (u32, u64)) -> (u32, u64) {
    if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
        a
    } else {
        b
    }
}

fn unpack(mut t: u64, per: u64, n: usize) -> Vec<u32> {
    let mut fs = Vec::with_capacity(n);
    for _ in 0..n {
        fs.push((t % per) as u32);
        t /= per;
    }
    fs
}

fn search_four(objective: Objective) -> SearchResult {
    const N: usize = 4;
    let per = 256u64;
    // f_1 with f_1(000) = 0: even table indices only.
    let tuples = (per / 2) * per * per;
    let evaluate = |t: u64| -> (u32, u32) {
        let f1 = ((t % 128) * 2) as u32;
        let f2 = ((t / 128) % per) as u32;
        let f3 = ((t / 128 / per) % per) as u32;
        let fs = [f1, f2, f3];
        // For each view v of player 4 (hats of players 1..3) and each own
        // hat, count correct among players 1..3.
        let mut best_f4 = 0u32;
        let mut all = 0u32;
        let mut guaranteed = u32::MAX;
        for v in 0..8u32 {
            let mut c = [0u32; 2];
            for (own, slot) in c.iter_mut().enumerate() {
                let a = v | ((own as u32) << 3);
                *slot = (0..3).filter(|&i| table_guess(fs[i], i, a, N) == (a >> i) & 1).count() as u32;
            }
            // Guess g makes player 4 right exactly when its hat is g.
            let choice = match objective {
                Objective::MaxAllCorrect => {
                    let wins = |g: usize| u32::from(c[g] == 3);
                    if wins(1) > wins(0) {
                        1
                    } else {
                        0
                    }
                }
                Objective::MaxGuaranteedFraction => {
                    let worst = |g: usize| (c[g] + 1).min(c[1 - g]);
                    if worst(1) > worst(0) {
                        1
                    } else {
                        0
                    }
                }
            };
            best_f4 |= (choice as u32) << v;
            all += u32::from(c[choice] == 3);
            guaranteed = guaranteed.min((c[choice] + 1).min(c[1 - choice]));
        }
        let s = match objective {
            Objective::MaxAllCorrect => all,
            Objective::MaxGuaranteedFraction => guaranteed,
        };
        (s, best_f4)
    };
    let (best, idx) = (0..tuples).into_par_iter().map(|t| (evaluate(t).0, t)).reduce(|| (0, u64::MAX), pick_best);
    let f4 = evaluate(idx).1;
    let fs = [((idx % 128) * 2) as u32, ((idx / 128) % per) as u32, ((idx / 128 / per) % per) as u32, f4];
    let counts = correct_counts(&fs, N);
    debug_assert_eq!(raw_score(objective, &counts, N), best);
    SearchResult {
        n: N as u64,
        objective,
        optimum: optimum_value(objective, best, N),
        witness: to_table(&fs, N),
        examined: tuples,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialResult {
    pub n: u64,
    /// Lexicographically first prefix (player 1 first) maximizing the
    /// number of wrong guesses among players `1..=n`; every later hat black.
    pub witness: Vec<u8>,
    pub wrong: u64,
    /// `ceil(n/2)`, implied by the averaging argument.
    pub guaranteed: u64,
    /// Average number of wrong guesses over all prefixes.
    pub average_wrong: Rational,
    pub assignments: u64,
}

impl AdversarialResult {
    pub fn passed(&self) -> bool {
        self.wrong >= self.guaranteed
    }

    pub fn witness_assignment(&self) -> HatAssignment {
        HatAssignment::binary(self.witness.clone(), Tail::ConstantBlack).expect("binary witness")
    }
}

/// Search all `2^n` binary prefixes with every later hat black for one that
/// makes the most of players `1..=n` guess wrong. Randomized rules use the
/// private seed 0.
pub fn adversarial_tail_black_search(strategy: &Strategy, n: u64) -> Result<AdversarialResult> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    if n > 24 {
        return Err(Error::TooLarge(format!("n too large: prefix search supports n <= 24, got {n}")));
    }
    if !strategy.is_binary() {
        return Err(Error::ColorSpace("adversarial search needs binary hats".into()));
    }
    let h = strategy.horizon(n)?;
    let total = 1u64 << n;
    let wrong_of = |x: u64| -> Result<u64> {
        // Player 1 is the most significant bit, so increasing x is lexicographic order.
        let prefix: Vec<u8> = (0..n).map(|p| ((x >> (n - 1 - p)) & 1) as u8).collect();
        let guesses = if h <= 1 << 22 {
            let mut bits = prefix.clone();
            bits.resize(h as usize, 0);
            strategy.bulk_bits(&bits, n, Private::Seed(0))?
        } else {
            let hats = HatAssignment::binary(prefix.clone(), Tail::ConstantBlack)?;
            let view = View::new(&hats, Private::Seed(0));
            (1..=n).map(|p| Ok(index(strategy.guess(p, &view)?)? as u8)).collect::<Result<_>>()?
        };
        Ok(guesses.iter().zip(&prefix).filter(|(g, b)| g != b).count() as u64)
    };
    let wrongs: Vec<u64> = (0..total).into_par_iter().map(wrong_of).collect::<Result<_>>()?;
    let (mut best, mut at) = (0u64, 0u64);
    for (x, &w) in wrongs.iter().enumerate() {
        if w > best {
            best = w;
            at = x as u64;
        }
    }
    let witness = (0..n).map(|p| ((at >> (n - 1 - p)) & 1) as u8).collect();
    Ok(AdversarialResult {
        n,
        witness,
        wrong: best,
        guaranteed: n.div_ceil(2),
        average_wrong: Rational::new(wrongs.iter().sum::<u64>(), total)?,
        assignments: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn even_odd_table(n: u64) -> FiniteStrategyTable {
        FiniteStrategyTable::from_strategy(&Strategy::EvenOdd { group: n }, n).unwrap()
    }

    #[test]
    fn even_odd_distribution() {
        let d = exact_distribution(&even_odd_table(4)).unwrap();
        assert_eq!(d.probability(&Rational::one()), Rational::half());
        assert_eq!(d.probability(&Rational::zero()), Rational::half());
        assert_eq!(d.total_probability(), Rational::one());
        assert!(d.markov_holds());
    }

    #[test]
    fn naive_all_black() {
        let s = Strategy::Constant { color: 0, space: ColorSpace::Binary };
        let d = exact_distribution(&FiniteStrategyTable::from_strategy(&s, 3).unwrap()).unwrap();
        assert_eq!(d.probability(&Rational::one()), Rational::frac(1, 8));
    }

    #[test]
    fn mod_three_mean() {
        let s = Strategy::ModKSum { k: 3, residue: 0, group: 3 };
        assert_eq!(exact_mean(&FiniteStrategyTable::from_strategy(&s, 3).unwrap()).unwrap(), Rational::frac(1, 3));
        assert_eq!(exact_distribution_of(&s, 3).unwrap().mean(), Rational::frac(1, 3));
    }

    #[test]
    fn table_indexing() {
        // Player 2 of 3 sees players 1 and 3; player 1 is the low digit.
        let t = even_odd_table(3);
        assert_eq!(t.guess(2, &[1, 0, 0]), 1);
        assert_eq!(t.guess(2, &[0, 1, 1]), 1);
        assert_eq!(t.tables[1], vec![0, 1, 1, 0]);
    }

    #[test]
    fn cheat_fails_independence() {
        let r = verify_independence(&Strategy::Cheat, 1).unwrap();
        assert!(!r.passed);
        assert!(r.window_contains_self);
        let r = verify_independence(&Strategy::Pairs, 1).unwrap();
        assert!(r.passed);
        assert_eq!(r.configurations, 2);
    }

    #[test]
    fn search_small() {
        let r = search_strategy_space(2, Objective::MaxAllCorrect).unwrap();
        assert_eq!(r.optimum, Rational::half());
        assert_eq!(r.examined, 16);
        assert_eq!(exact_distribution(&r.witness).unwrap().probability(&Rational::one()), Rational::half());
        let r = search_strategy_space(2, Objective::MaxGuaranteedFraction).unwrap();
        assert_eq!(r.optimum, Rational::half());
        assert!(matches!(search_strategy_space(5, Objective::MaxAllCorrect), Err(Error::TooLarge(_))));
    }

    #[test]
    fn adversarial_pairs_and_even_odd() {
        let r = adversarial_tail_black_search(&Strategy::Pairs, 8).unwrap();
        assert_eq!(r.wrong, 4);
        assert_eq!(r.witness, vec![0; 8]);
        let r = adversarial_tail_black_search(&Strategy::EvenOdd { group: 8 }, 8).unwrap();
        assert_eq!(r.wrong, 8);
        assert_eq!(r.witness.iter().map(|&b| u32::from(b)).sum::<u32>() % 2, 1);
        assert_eq!(r.average_wrong, Rational::integer(4));
    }
}
