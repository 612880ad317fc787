use statrs::function::gamma::ln_gamma;

/// Normal-inverse-gamma prior over the per-run Gaussian's unknown mean and
/// variance; the resulting one-step predictive is a Student-t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NigPrior {
    pub mu: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl NigPrior {
    /// Default prior for a stream whose level is near `scale`. The mean
    /// weight is kept far below one observation: a heavier prior mean
    /// makes the mismatch term inflate the variance of any run that sits
    /// away from the initial level, masking later change-points. The
    /// resulting prior predictive spans roughly +-10% of the level, wide
    /// enough to rate plausible degraded regimes.
    pub fn for_level(scale: f64) -> Self {
        Self {
            mu: scale,
            kappa: 0.01,
            alpha: 1.0,
            beta: (0.01 * scale).powi(2).max(1e-12),
        }
    }
}

/// Welford-style sufficient statistics for one run length hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct SuffStats {
    n: f64,
    mean: f64,
    sum_sq: f64,
}

impl SuffStats {
    fn observe(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.sum_sq += delta * (x - self.mean);
    }
}

#[derive(Debug, Clone)]
struct RunEntry {
    run_length: usize,
    /// Natural-log posterior mass.
    ln_mass: f64,
    stats: SuffStats,
}

/// Behavioural knobs for the run-length filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BocdConfig {
    /// Expected iterations between change-points; hazard is its inverse.
    pub hazard_lambda: f64,
    /// Posterior mass at run length 0 above which a change-point is
    /// reported.
    pub threshold: f64,
    /// Posterior entries below this mass are dropped.
    pub prune_mass: f64,
    /// Hard cap on retained run lengths, as a multiple of `hazard_lambda`.
    pub cap_factor: f64,
}

impl Default for BocdConfig {
    fn default() -> Self {
        Self {
            hazard_lambda: 1000.0,
            threshold: 0.9,
            // Entries below decision-relevant mass are dropped. Keeping
            // near-zero-mass short-run hypotheses around lets their
            // heavy-tailed predictives absorb 20-40% level shifts and hold
            // the change-point probability just under the report
            // threshold.
            prune_mass: 5e-3,
            cap_factor: 10.0,
        }
    }
}

impl BocdConfig {
    pub fn cap(&self) -> usize {
        (self.hazard_lambda * self.cap_factor).max(8.0) as usize
    }
}

/// Online Bayesian change-point state: the run-length posterior plus one
/// sufficient-statistics block per retained run length.
#[derive(Debug, Clone)]
pub struct BocdState {
    config: BocdConfig,
    prior: Option<NigPrior>,
    entries: Vec<RunEntry>,
    observations: usize,
    // ln Gamma(alpha + n/2) - ln Gamma(alpha + (n-1)/2) style terms are the
    // hot path; cache the full t-density constant per run count instead.
    ln_norm_cache: Vec<f64>,
}

impl BocdState {
    /// A state whose prior is centered on the first observation.
    pub fn new(config: BocdConfig) -> Self {
        Self {
            config,
            prior: None,
            entries: Vec::new(),
            observations: 0,
            ln_norm_cache: Vec::new(),
        }
    }

    pub fn with_prior(config: BocdConfig, prior: NigPrior) -> Self {
        Self {
            config,
            prior: Some(prior),
            entries: Vec::new(),
            observations: 0,
            ln_norm_cache: Vec::new(),
        }
    }

    pub fn observations(&self) -> usize {
        self.observations
    }

    /// Run-length posterior as `(run_length, mass)` pairs.
    pub fn posterior(&self) -> Vec<(usize, f64)> {
        self.entries
            .iter()
            .map(|e| (e.run_length, e.ln_mass.exp()))
            .collect()
    }

    pub fn state_size(&self) -> usize {
        self.entries.len()
    }

    fn predictive_ln_pdf(&mut self, x: f64, stats: &SuffStats) -> f64 {
        let prior = self.prior.expect("prior fixed before first update");
        let n = stats.n;
        let kappa_n = prior.kappa + n;
        let mu_n = (prior.kappa * prior.mu + n * stats.mean) / kappa_n;
        let alpha_n = prior.alpha + n / 2.0;
        let beta_n = prior.beta
            + 0.5 * stats.sum_sq
            + prior.kappa * n * (stats.mean - prior.mu).powi(2) / (2.0 * kappa_n);
        let dof = 2.0 * alpha_n;
        let scale_sq = beta_n * (kappa_n + 1.0) / (alpha_n * kappa_n);

        let count = n as usize;
        while self.ln_norm_cache.len() <= count {
            let m = self.ln_norm_cache.len() as f64;
            let a = prior.alpha + m / 2.0;
            let d = 2.0 * a;
            self.ln_norm_cache
                .push(ln_gamma((d + 1.0) / 2.0) - ln_gamma(d / 2.0) - 0.5 * (d * std::f64::consts::PI).ln());
        }
        let ln_norm = self.ln_norm_cache[count];
        let z_sq = (x - mu_n).powi(2) / scale_sq;
        ln_norm - 0.5 * scale_sq.ln() - (dof + 1.0) / 2.0 * (1.0 + z_sq / dof).ln()
    }

    /// Feeds one observation through the joint run-length recursion and
    /// returns the posterior probability that this step is a change-point.
    pub fn update(&mut self, x: f64) -> f64 {
        if self.prior.is_none() {
            self.prior = Some(NigPrior::for_level(x.abs().max(1e-9)));
        }
        let hazard = 1.0 / self.config.hazard_lambda;
        let ln_hazard = hazard.ln();
        let ln_growth = (1.0 - hazard).ln();

        if self.entries.is_empty() {
            // First observation: it starts the initial run; probe the prior
            // predictive once so the cache warms deterministically.
            let _ = self.predictive_ln_pdf(x, &SuffStats::default());
            let mut stats = SuffStats::default();
            stats.observe(x);
            self.entries.push(RunEntry {
                run_length: 0,
                ln_mass: 0.0,
                stats,
            });
            self.observations = 1;
            return hazard;
        }

        // Growth masses; the change-point hypothesis is predicted by the
        // prior (a new run has seen no data).
        let empty = SuffStats::default();
        let ln_pp_prior = self.predictive_ln_pdf(x, &empty);
        let mut next: Vec<RunEntry> = Vec::with_capacity(self.entries.len() + 1);
        let mut ln_change_terms: Vec<f64> = Vec::with_capacity(self.entries.len());
        let entries = std::mem::take(&mut self.entries);
        for entry in &entries {
            let ln_pp = self.predictive_ln_pdf(x, &entry.stats);
            ln_change_terms.push(entry.ln_mass + ln_hazard + ln_pp_prior);
            let mut stats = entry.stats;
            stats.observe(x);
            next.push(RunEntry {
                run_length: entry.run_length + 1,
                ln_mass: entry.ln_mass + ln_growth + ln_pp,
                stats,
            });
        }
        let ln_p0 = log_sum_exp(&ln_change_terms);
        let mut stats0 = SuffStats::default();
        stats0.observe(x);
        next.push(RunEntry {
            run_length: 0,
            ln_mass: ln_p0,
            stats: stats0,
        });

        // Normalize in log space.
        let all: Vec<f64> = next.iter().map(|e| e.ln_mass).collect();
        let ln_total = log_sum_exp(&all);
        let cp_prob = if ln_total.is_finite() {
            for e in &mut next {
                e.ln_mass -= ln_total;
            }
            (ln_p0 - ln_total).exp()
        } else {
            // Every hypothesis underflowed: the observation is impossible
            // under all runs, which is a change-point by any reading.
            next.clear();
            let mut stats = SuffStats::default();
            stats.observe(x);
            next.push(RunEntry {
                run_length: 0,
                ln_mass: 0.0,
                stats,
            });
            1.0
        };

        // Prune tiny masses and enforce the cap, then renormalize.
        let ln_prune = self.config.prune_mass.ln();
        let mut pruned: Vec<RunEntry> = next
            .into_iter()
            .filter(|e| e.ln_mass >= ln_prune)
            .collect();
        let cap = self.config.cap();
        if pruned.len() > cap {
            pruned.sort_by(|a, b| b.ln_mass.total_cmp(&a.ln_mass));
            pruned.truncate(cap);
            pruned.sort_by_key(|e| e.run_length);
        }
        let all: Vec<f64> = pruned.iter().map(|e| e.ln_mass).collect();
        let ln_total = log_sum_exp(&all);
        for e in &mut pruned {
            e.ln_mass -= ln_total;
        }
        self.entries = pruned;
        self.observations += 1;
        cp_prob
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Runs raw BOCD over a series and returns every index whose change-point
/// probability crossed the threshold (after burn-in). This is the
/// unverified baseline.
pub fn bocd_fire_indices(durations: &[f64], config: &BocdConfig, burn_in: usize) -> Vec<usize> {
    let mut state = BocdState::new(*config);
    let mut fires = Vec::new();
    for (i, &x) in durations.iter().enumerate() {
        let p = state.update(x);
        if i >= burn_in && p >= config.threshold {
            fires.push(i);
        }
    }
    fires
}
