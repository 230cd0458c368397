use super::{Mode, SimulationPlan};
use crate::error::Result;
use crate::state_space::{EnsembleParams, LatticeConfig, ProfileConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// One jump between rows `h` and `h + 1` (0-based `lower`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    /// Time after the jump.
    pub time: f64,
    pub waiting_time: f64,
    pub lower: usize,
    /// `true` when the particle moved from row `lower` to `lower + 1`.
    pub up: bool,
    /// `(from_stick, to_stick)` in lattice mode.
    pub sticks: Option<(usize, usize)>,
}

/// Event-driven simulator. Moves are aggregated per row pair: the rate of
/// an upward jump across `(h, h + 1)` is `(q/L)·ω_h (L − ω_{h+1})`, of a
/// downward jump `(1/(qL))·ω_{h+1} (L − ω_h)`; in lattice mode the two
/// sticks are then drawn uniformly among the admissible ones.
#[derive(Debug, Clone)]
pub struct Simulator {
    params: EnsembleParams,
    mode: Mode,
    rng: ChaCha8Rng,
    time: f64,
    profile: Vec<usize>,
    /// Row masks, lattice mode only.
    rows: Vec<u64>,
    /// `rates[2h]` up, `rates[2h + 1]` down across `(h, h + 1)`.
    rates: Vec<f64>,
    total: f64,
}

impl Simulator {
    /// Starts from the configuration filling the lowest rows first.
    pub fn new(params: &EnsembleParams, mode: Mode, seed: u64) -> Result<Self> {
        let plan = SimulationPlan::new(*params, mode, seed, 0.0, 1.0, 1.0)?;
        let (l, h) = (params.sticks, params.height);
        let mut profile = vec![0; h];
        let mut rows = vec![0u64; if mode == Mode::Lattice { h } else { 0 }];
        let mut left = params.particles;
        for r in 0..h {
            let k = left.min(l);
            profile[r] = k;
            if mode == Mode::Lattice {
                rows[r] = low_bits(k);
            }
            left -= k;
        }
        let mut sim = Simulator {
            params: plan.params,
            mode,
            rng: ChaCha8Rng::seed_from_u64(seed),
            time: 0.0,
            profile,
            rows,
            rates: vec![0.0; 2 * (h - 1)],
            total: 0.0,
        };
        for pair in 0..h - 1 {
            sim.update_pair(pair);
        }
        sim.total = sim.rates.iter().sum();
        Ok(sim)
    }

    fn update_pair(&mut self, pair: usize) {
        let l = self.params.sticks;
        let q = self.params.q;
        let (a, b) = (self.profile[pair], self.profile[pair + 1]);
        self.rates[2 * pair] = q / l as f64 * (a * (l - b)) as f64;
        self.rates[2 * pair + 1] = 1.0 / (q * l as f64) * (b * (l - a)) as f64;
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn profile(&self) -> &[usize] {
        &self.profile
    }

    pub fn particles(&self) -> usize {
        match self.mode {
            Mode::Lattice => self.rows.iter().map(|r| r.count_ones() as usize).sum(),
            Mode::Profile => self.profile.iter().sum(),
        }
    }

    /// Current configuration in lattice mode.
    pub fn lattice(&self) -> Option<LatticeConfig> {
        (self.mode == Mode::Lattice).then(|| {
            let sites: Vec<(usize, usize)> = self
                .rows
                .iter()
                .enumerate()
                .flat_map(|(r, &m)| (0..self.params.sticks).filter(move |i| m >> i & 1 == 1).map(move |i| (i, r)))
                .collect();
            LatticeConfig::from_sites(self.params.sticks, self.params.height, &sites)
        })
    }

    /// Total jump rate out of the current state.
    pub fn exit_rate(&self) -> f64 {
        self.total
    }

    /// Draw the waiting time and the next jump, and apply it.
    pub fn step(&mut self) -> Event {
        let u: f64 = self.rng.random();
        let dt = -(1.0 - u).ln() / self.total;
        let mut target = self.rng.random::<f64>() * self.total;
        let mut k = self.rates.len() - 1;
        for (i, &r) in self.rates.iter().enumerate() {
            if target < r {
                k = i;
                break;
            }
            target -= r;
        }
        // guard against rounding landing on a zero-rate tail entry
        while self.rates[k] == 0.0 {
            k -= 1;
        }
        let lower = k / 2;
        let up = k % 2 == 0;
        let (from, to) = if up { (lower, lower + 1) } else { (lower + 1, lower) };
        let sticks = if self.mode == Mode::Lattice {
            let full = low_bits(self.params.sticks);
            let src = self.rows[from];
            let dst = !self.rows[to] & full;
            let i = nth_set_bit(src, self.rng.random_range(0..src.count_ones() as usize));
            let j = nth_set_bit(dst, self.rng.random_range(0..dst.count_ones() as usize));
            self.rows[from] &= !(1u64 << i);
            self.rows[to] |= 1u64 << j;
            Some((i, j))
        } else {
            None
        };
        self.profile[from] -= 1;
        self.profile[to] += 1;
        for pair in lower.saturating_sub(1)..=(lower + 1).min(self.params.height - 2) {
            self.update_pair(pair);
        }
        self.total = self.rates.iter().sum();
        self.time += dt;
        Event {
            time: self.time,
            waiting_time: dt,
            lower,
            up,
            sticks,
        }
    }
}

fn low_bits(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

fn nth_set_bit(mut mask: u64, n: usize) -> usize {
    for _ in 0..n {
        mask &= mask - 1;
    }
    mask.trailing_zeros() as usize
}

/// Observable samples on the grid `t_burn + k·sample_dt ≤ t_run`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TimeSeries {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(k, &v)| (self.time(k), v))
    }
}

#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub plan: SimulationPlan,
    pub series: TimeSeries,
    pub events: u64,
    /// Fraction of `[t_burn, t_run]` spent in each profile.
    pub occupancy: BTreeMap<ProfileConfig, f64>,
    pub final_profile: ProfileConfig,
}

impl SimulationRun {
    pub fn occupancy_of(&self, omega: &[usize]) -> f64 {
        self.occupancy.get(&ProfileConfig(omega.to_vec())).copied().unwrap_or(0.0)
    }
}

/// Run one trajectory of `plan`. Deterministic in the seed.
pub fn gillespie_run(plan: &SimulationPlan) -> Result<SimulationRun> {
    plan.validate()?;
    let mut sim = Simulator::new(&plan.params, plan.mode, plan.seed)?;
    let n_samples = ((plan.t_run - plan.t_burn) / plan.sample_dt).floor() as usize + 1;
    let mut values = Vec::with_capacity(n_samples);
    let mut occupancy: BTreeMap<ProfileConfig, f64> = BTreeMap::new();
    let mut events = 0u64;
    let sample_time = |k: usize| plan.t_burn + k as f64 * plan.sample_dt;
    loop {
        let t = sim.time();
        let value = plan.observable.eval(sim.profile());
        let key = ProfileConfig(sim.profile().to_vec());
        let ev = sim.step();
        let t_next = ev.time;
        while values.len() < n_samples && sample_time(values.len()) < t_next {
            values.push(value);
        }
        let lo = t.max(plan.t_burn);
        let hi = t_next.min(plan.t_run);
        if hi > lo {
            *occupancy.entry(key).or_insert(0.0) += hi - lo;
        }
        if t_next >= plan.t_run {
            break;
        }
        events += 1;
    }
    let span = plan.t_run - plan.t_burn;
    occupancy.values_mut().for_each(|v| *v /= span);
    Ok(SimulationRun {
        plan: *plan,
        series: TimeSeries {
            t0: plan.t_burn,
            dt: plan.sample_dt,
            values,
        },
        events,
        occupancy,
        final_profile: ProfileConfig(sim.profile().to_vec()),
    })
}

/// Independent replicas of `plan` with the given seeds, on up to `jobs`
/// threads. Results follow the order of `seeds`.
pub fn run_replicas(plan: &SimulationPlan, seeds: &[u64], jobs: usize) -> Vec<Result<SimulationRun>> {
    let out: Mutex<Vec<Option<Result<SimulationRun>>>> = Mutex::new((0..seeds.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1).min(seeds.len().max(1)) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&seed) = seeds.get(k) else { break };
                let r = gillespie_run(&plan.with_seed(seed));
                out.lock().expect("replica results poisoned")[k] = Some(r);
            });
        }
    });
    out.into_inner()
        .expect("replica results poisoned")
        .into_iter()
        .map(|r| r.expect("every replica ran"))
        .collect()
}
