//! Association policies: pure decision rules over a network snapshot.
//!
//! Each policy assigns every mBS a preference score (higher preferred) and
//! the arriving user joins an argmax mBS; exact ties are broken uniformly
//! at random. The random policy skips scoring and picks uniformly.
//!
//! Every call to [`associate`] consumes exactly one uniform draw from the
//! supplied generator — used for the random policy's choice or for the
//! tie-break, and discarded otherwise. A fixed draw count keeps the
//! generator streams of different policies aligned under common random
//! numbers, so paired comparisons see identical arrival and service
//! randomness.

use crate::error::Error;
use crate::whittle::IndexTable;
use crate::Result;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use rand_core::RngCore;

/// Start-of-decision view of the network: per-mBS packet counts and rates,
/// plus index tables when the Whittle policy is in play.
#[derive(Debug, Clone, Copy)]
pub struct NetworkSnapshot<'a> {
    /// Total packets queued at each mBS.
    pub states: &'a [usize],
    /// Per-mini-slot service success probability of each mBS.
    pub rates: &'a [f64],
    /// Whittle index tables, one per mBS in order; required by
    /// [`PolicyKind::Whittle`] and ignored by every other policy.
    pub index_tables: Option<&'a [IndexTable]>,
}

/// The six association rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    /// Uniformly random mBS.
    Random,
    /// Least total packets queued (score `−X_i`).
    Load,
    /// Highest rate (score `r_i`), load-blind.
    Snr,
    /// Highest instantaneous per-packet service ratio (score `r_i/(X_i+1)`).
    Throughput,
    /// Weighted blend of rate and the throughput ratio
    /// (score `w·r_i + r_i/(X_i+1)`).
    Mixed,
    /// Lowest Whittle index at the current state (score `−index_i(X_i)`).
    Whittle,
}

impl PolicyKind {
    /// All policies, in canonical reporting order.
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Random,
        PolicyKind::Load,
        PolicyKind::Snr,
        PolicyKind::Throughput,
        PolicyKind::Mixed,
        PolicyKind::Whittle,
    ];

    /// Canonical lowercase name.
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Random => "random",
            PolicyKind::Load => "load",
            PolicyKind::Snr => "snr",
            PolicyKind::Throughput => "throughput",
            PolicyKind::Mixed => "mixed",
            PolicyKind::Whittle => "whittle",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(PolicyKind::Random),
            "load" => Ok(PolicyKind::Load),
            "snr" => Ok(PolicyKind::Snr),
            "throughput" => Ok(PolicyKind::Throughput),
            "mixed" => Ok(PolicyKind::Mixed),
            "whittle" => Ok(PolicyKind::Whittle),
            other => Err(Error::invalid(alloc::format!(
                "unknown policy '{other}' (expected one of random, load, snr, throughput, mixed, whittle)"
            ))),
        }
    }
}

/// Tunables of the scoring rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyOptions {
    /// Weight on the rate term in the mixed rule.
    pub mixed_weight: f64,
}

impl Default for PolicyOptions {
    fn default() -> Self {
        PolicyOptions { mixed_weight: 0.2 }
    }
}

fn validate_snapshot(snapshot: &NetworkSnapshot) -> Result<()> {
    let k = snapshot.states.len();
    if k == 0 {
        return Err(Error::invalid("snapshot must cover at least one mBS"));
    }
    if snapshot.rates.len() != k {
        return Err(Error::invalid(
            "snapshot rates and states must have the same length",
        ));
    }
    if let Some(tables) = snapshot.index_tables {
        if tables.len() != k {
            return Err(Error::invalid(
                "snapshot must carry one index table per mBS",
            ));
        }
        for (i, table) in tables.iter().enumerate() {
            if snapshot.states[i] >= table.len() {
                return Err(Error::invalid(alloc::format!(
                    "state {} of mBS {i} is outside its index table (len {})",
                    snapshot.states[i],
                    table.len()
                )));
            }
        }
    }
    Ok(())
}

/// Preference score of mBS `i` under `kind`, with default options.
///
/// Higher is better. The random policy has no score and is rejected here;
/// it is handled wholly inside [`associate`].
pub fn score(kind: PolicyKind, snapshot: &NetworkSnapshot, i: usize) -> Result<f64> {
    score_with(kind, snapshot, i, &PolicyOptions::default())
}

/// As [`score`] with explicit options.
pub fn score_with(
    kind: PolicyKind,
    snapshot: &NetworkSnapshot,
    i: usize,
    opts: &PolicyOptions,
) -> Result<f64> {
    validate_snapshot(snapshot)?;
    if i >= snapshot.states.len() {
        return Err(Error::invalid("mBS index out of range"));
    }
    score_unchecked(kind, snapshot, i, opts)
}

fn score_unchecked(
    kind: PolicyKind,
    snapshot: &NetworkSnapshot,
    i: usize,
    opts: &PolicyOptions,
) -> Result<f64> {
    let x = snapshot.states[i] as f64;
    let r = snapshot.rates[i];
    match kind {
        PolicyKind::Random => Err(Error::invalid(
            "the random policy has no score; use associate",
        )),
        PolicyKind::Load => Ok(-x),
        PolicyKind::Snr => Ok(r),
        PolicyKind::Throughput => Ok(r / (x + 1.0)),
        PolicyKind::Mixed => Ok(opts.mixed_weight * r + r / (x + 1.0)),
        PolicyKind::Whittle => {
            let tables = snapshot.index_tables.ok_or(Error::MissingIndexTables)?;
            Ok(-tables[i].index_at(snapshot.states[i]))
        }
    }
}

/// One uniform f64 in `[0, 1)` from the top 53 bits of a 64-bit draw.
pub(crate) fn uniform_f64(rng: &mut impl RngCore) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    (rng.next_u64() >> 11) as f64 * SCALE
}

fn pick(u: f64, n: usize) -> usize {
    (((u * n as f64) as usize).min(n - 1)).max(0)
}

/// Chooses the mBS for an arriving user under `kind`, with default options.
///
/// Non-random policies take an argmax of [`score`]; maximizers within a
/// relative tolerance of the best are treated as tied and one is chosen
/// uniformly. Exactly one uniform draw is consumed per call regardless of
/// policy or tie structure.
pub fn associate(
    kind: PolicyKind,
    snapshot: &NetworkSnapshot,
    rng: &mut impl RngCore,
) -> Result<usize> {
    associate_with(kind, snapshot, &PolicyOptions::default(), rng)
}

/// As [`associate`] with explicit options.
pub fn associate_with(
    kind: PolicyKind,
    snapshot: &NetworkSnapshot,
    opts: &PolicyOptions,
    rng: &mut impl RngCore,
) -> Result<usize> {
    validate_snapshot(snapshot)?;
    let k = snapshot.states.len();
    let u = uniform_f64(rng);
    if kind == PolicyKind::Random {
        return Ok(pick(u, k));
    }
    let mut scores = Vec::with_capacity(k);
    let mut best = f64::NEG_INFINITY;
    for i in 0..k {
        let s = score_unchecked(kind, snapshot, i, opts)?;
        if s > best {
            best = s;
        }
        scores.push(s);
    }
    let tol = 1e-12 * best.abs().max(1.0);
    let ties: Vec<usize> = (0..k).filter(|&i| scores[i] >= best - tol).collect();
    Ok(ties[pick(u, ties.len())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha12Rng;
    use rand_core::SeedableRng;

    fn snap<'a>(states: &'a [usize], rates: &'a [f64]) -> NetworkSnapshot<'a> {
        NetworkSnapshot {
            states,
            rates,
            index_tables: None,
        }
    }

    struct CountingRng {
        inner: ChaCha12Rng,
        draws: usize,
    }

    impl RngCore for CountingRng {
        fn next_u32(&mut self) -> u32 {
            self.draws += 1;
            self.inner.next_u32()
        }
        fn next_u64(&mut self) -> u64 {
            self.draws += 1;
            self.inner.next_u64()
        }
        fn fill_bytes(&mut self, dest: &mut [u8]) {
            self.draws += 1;
            self.inner.fill_bytes(dest)
        }
        fn try_fill_bytes(&mut self, dest: &mut [u8]) -> core::result::Result<(), rand_core::Error> {
            self.draws += 1;
            self.inner.try_fill_bytes(dest)
        }
    }

    fn equal_tables(k: usize, len: usize) -> Vec<IndexTable> {
        (0..k)
            .map(|i| {
                let values: Vec<f64> = (0..len).map(|x| x as f64).collect();
                IndexTable::from_parts(i, values, alloc::vec![true; len]).unwrap()
            })
            .collect()
    }

    #[test]
    fn load_prefers_the_least_loaded_mbs() {
        let states = [5usize, 3, 7];
        let rates = [0.5, 0.5, 0.5];
        let s = snap(&states, &rates);
        assert_eq!(score(PolicyKind::Load, &s, 0).unwrap(), -5.0);
        assert_eq!(score(PolicyKind::Load, &s, 1).unwrap(), -3.0);
        assert_eq!(score(PolicyKind::Load, &s, 2).unwrap(), -7.0);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            assert_eq!(associate(PolicyKind::Load, &s, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn snr_choice_is_independent_of_load() {
        let rates = [0.78, 0.65, 0.56, 0.50, 0.45];
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for states in [[0usize, 0, 0, 0, 0], [90, 0, 0, 0, 0], [3, 1, 4, 1, 5]] {
            let s = snap(&states, &rates);
            assert_eq!(associate(PolicyKind::Snr, &s, &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn mixed_score_blends_rate_and_ratio() {
        let states = [0usize];
        let rates = [0.78];
        let s = snap(&states, &rates);
        let got = score(PolicyKind::Mixed, &s, 0).unwrap();
        assert!((got - 0.936).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn throughput_ratio_beats_raw_rate_under_load() {
        let states = [0usize, 3];
        let rates = [0.5, 0.8];
        let s = snap(&states, &rates);
        assert_eq!(score(PolicyKind::Throughput, &s, 0).unwrap(), 0.5);
        assert_eq!(score(PolicyKind::Throughput, &s, 1).unwrap(), 0.2);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        assert_eq!(associate(PolicyKind::Throughput, &s, &mut rng).unwrap(), 0);
    }

    #[test]
    fn single_mbs_is_always_chosen() {
        let states = [4usize];
        let rates = [0.6];
        let tables = equal_tables(1, 10);
        let s = NetworkSnapshot {
            states: &states,
            rates: &rates,
            index_tables: Some(&tables),
        };
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        for kind in PolicyKind::ALL {
            assert_eq!(associate(kind, &s, &mut rng).unwrap(), 0, "{kind}");
        }
    }

    #[test]
    fn exact_ties_break_uniformly() {
        let states = [2usize, 2];
        let rates = [0.5, 0.5];
        let s = snap(&states, &rates);
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let trials = 100_000;
        let mut first = 0usize;
        for _ in 0..trials {
            if associate(PolicyKind::Load, &s, &mut rng).unwrap() == 0 {
                first += 1;
            }
        }
        let freq = first as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn random_policy_is_uniform_over_mbs() {
        let states = [1usize, 9, 3, 7];
        let rates = [0.9, 0.1, 0.5, 0.4];
        let s = snap(&states, &rates);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let trials = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..trials {
            counts[associate(PolicyKind::Random, &s, &mut rng).unwrap()] += 1;
        }
        for (i, c) in counts.iter().enumerate() {
            let freq = *c as f64 / trials as f64;
            assert!((freq - 0.25).abs() < 0.01, "mBS {i} frequency {freq}");
        }
    }

    #[test]
    fn every_policy_consumes_exactly_one_draw() {
        let states = [1usize, 2, 3];
        let rates = [0.7, 0.6, 0.5];
        let tables = equal_tables(3, 10);
        let s = NetworkSnapshot {
            states: &states,
            rates: &rates,
            index_tables: Some(&tables),
        };
        for kind in PolicyKind::ALL {
            let mut rng = CountingRng {
                inner: ChaCha12Rng::seed_from_u64(9),
                draws: 0,
            };
            associate(kind, &s, &mut rng).unwrap();
            assert_eq!(rng.draws, 1, "{kind} consumed {} draws", rng.draws);
        }
    }

    #[test]
    fn whittle_without_tables_is_a_missing_input() {
        let states = [0usize, 0];
        let rates = [0.5, 0.5];
        let s = snap(&states, &rates);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        assert!(matches!(
            associate(PolicyKind::Whittle, &s, &mut rng),
            Err(Error::MissingIndexTables)
        ));
    }

    #[test]
    fn whittle_with_equal_states_and_tables_ties_uniformly() {
        let states = [3usize, 3];
        let rates = [0.5, 0.5];
        let tables = equal_tables(2, 10);
        let s = NetworkSnapshot {
            states: &states,
            rates: &rates,
            index_tables: Some(&tables),
        };
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let trials = 100_000;
        let mut first = 0usize;
        for _ in 0..trials {
            if associate(PolicyKind::Whittle, &s, &mut rng).unwrap() == 0 {
                first += 1;
            }
        }
        let freq = first as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn scaling_all_rates_preserves_choices() {
        let states = [4usize, 1, 2];
        let rates = [0.9, 0.3, 0.6];
        let scaled: Vec<f64> = rates.iter().map(|r| r * 1000.0).collect();
        for kind in [PolicyKind::Snr, PolicyKind::Throughput, PolicyKind::Mixed] {
            let mut a = ChaCha12Rng::seed_from_u64(77);
            let mut b = ChaCha12Rng::seed_from_u64(77);
            for _ in 0..50 {
                let base = associate(kind, &snap(&states, &rates), &mut a).unwrap();
                let big = associate(kind, &snap(&states, &scaled), &mut b).unwrap();
                assert_eq!(base, big, "{kind}");
            }
        }
    }

    #[test]
    fn random_score_is_rejected() {
        let states = [0usize];
        let rates = [0.5];
        assert!(score(PolicyKind::Random, &snap(&states, &rates), 0).is_err());
    }

    #[test]
    fn names_round_trip() {
        for kind in PolicyKind::ALL {
            let name = kind.name();
            assert_eq!(name.parse::<PolicyKind>().unwrap(), kind);
            assert_eq!(alloc::format!("{kind}"), name);
        }
        assert!("bogus".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn mismatched_snapshot_lengths_are_rejected() {
        let states = [0usize, 1];
        let rates = [0.5];
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        assert!(associate(PolicyKind::Load, &snap(&states, &rates), &mut rng).is_err());
        let no_states: [usize; 0] = [];
        let no_rates: [f64; 0] = [];
        assert!(associate(PolicyKind::Load, &snap(&no_states, &no_rates), &mut rng).is_err());
    }
}
