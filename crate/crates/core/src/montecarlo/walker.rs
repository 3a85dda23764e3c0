//! One Euler-Maruyama step followed by the phase update at the frozen position.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BoundaryPolicy, JumpScheme, SimConfig};
use crate::error::{invalid, Error, Result};
use crate::model::{classify_boundaries, BoundaryKind, BoundaryReport, SwitchingDiffusionModel, WrightFisherParams};

/// Positions are projected this far inside the interval by the clamp policy,
/// and `Q` is evaluated no closer than this to a finite endpoint.
pub const BOUNDARY_EPS: f64 = 1e-9;

/// Stream for path `path_index`: the user seed is scrambled once so that
/// nearby seeds do not map onto the same set of streams, then xor-ed with
/// the index.
pub(crate) fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed) ^ path_index)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Box-Muller pairs drawn from the path's own stream.
#[derive(Default)]
pub(crate) struct Normals {
    spare: Option<f64>,
}

impl Normals {
    pub fn next(&mut self, rng: &mut ChaCha8Rng) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// Local coefficients of phase `i` (1-based).
enum Local<'a> {
    WrightFisher(WrightFisherParams),
    Generic(&'a SwitchingDiffusionModel),
}

impl Local<'_> {
    fn drift_sigma(&self, x: f64, i: usize) -> (f64, f64) {
        match self {
            Local::WrightFisher(p) => (p.drift_entry(i, x), (2.0 * x * (1.0 - x)).max(0.0).sqrt()),
            Local::Generic(m) => {
                let a = m.diffusion(x)[(i - 1, i - 1)];
                (m.drift(x)[(i - 1, i - 1)], a.max(0.0).sqrt())
            }
        }
    }

    /// `Q_ii(x)` and a sampler for the target phase given `u` in `[0, 1)`.
    fn leave_rate(&self, x: f64, i: usize) -> f64 {
        match self {
            Local::WrightFisher(p) => -(p.lambda(i, x) + p.mu(i, x)),
            Local::Generic(m) => m.intensity(x)[(i - 1, i - 1)],
        }
    }

    fn target(&self, x: f64, i: usize, u: f64) -> usize {
        match self {
            Local::WrightFisher(p) => {
                let (l, m) = (p.lambda(i, x), p.mu(i, x));
                if u * (l + m) < l {
                    i + 1
                } else {
                    i - 1
                }
            }
            Local::Generic(m) => {
                let q = m.intensity(x);
                let row = crate::model::jump_distribution(&q, i - 1).unwrap_or_default();
                let mut acc = 0.0;
                let mut last = i;
                for (j, p) in row.iter().enumerate() {
                    if *p > 0.0 {
                        acc += p;
                        last = j + 1;
                        if u < acc {
                            return j + 1;
                        }
                    }
                }
                last
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct StepOutcome {
    pub jumped: bool,
    pub absorbed: bool,
}

pub(crate) struct Walker<'a> {
    local: Local<'a>,
    domain: (f64, f64),
    h: f64,
    sqrt_h: f64,
    policy: BoundaryPolicy,
    jumps: JumpScheme,
    boundaries: Option<BoundaryReport>,
    n_phases: usize,
}

impl<'a> Walker<'a> {
    pub fn new(m: &'a SwitchingDiffusionModel, cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let local = match m.wright_fisher_params() {
            Some(p) => Local::WrightFisher(*p),
            None => Local::Generic(m),
        };
        Ok(Self {
            local,
            domain: m.interval(),
            h: cfg.step,
            sqrt_h: cfg.step.sqrt(),
            policy: cfg.boundary_policy,
            jumps: cfg.jump_scheme,
            boundaries: m.wright_fisher_params().map(classify_boundaries),
            n_phases: m.n_phases(),
        })
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn check_start(&self, x0: f64, i0: usize) -> Result<()> {
        let (lo, hi) = self.domain;
        if !(x0 > lo && x0 < hi) {
            return Err(Error::OutOfDomain { x: x0, lo, hi });
        }
        if i0 == 0 || i0 > self.n_phases {
            return Err(invalid("i0", format!("phase must lie in 1..={}", self.n_phases)));
        }
        Ok(())
    }

    fn rate_point(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain;
        let mut xq = x;
        if hi.is_finite() {
            xq = xq.min(hi - BOUNDARY_EPS);
        }
        if lo.is_finite() {
            xq = xq.max(lo + BOUNDARY_EPS);
        }
        xq
    }

    /// `(drift, sigma)` at `x` in phase `i`.
    pub fn drift_sigma(&self, x: f64, i: usize) -> (f64, f64) {
        self.local.drift_sigma(x, i)
    }

    /// Advances `(x, i)` by one step; on absorption `x` is left at the
    /// boundary.
    pub fn advance(&self, x: &mut f64, i: &mut usize, rng: &mut ChaCha8Rng, normals: &mut Normals) -> StepOutcome {
        let x_old = *x;
        let (tau, sigma) = self.local.drift_sigma(x_old, *i);
        let z = normals.next(rng);
        let mut xn = x_old + tau * self.h + sigma * self.sqrt_h * z;

        let xq = self.rate_point(x_old);
        let qii = self.local.leave_rate(xq, *i);
        let mut jumped = false;
        if qii < 0.0 {
            // u < 1 - exp(Q_ii h) iff the first holding time -ln(1 - u) / |Q_ii| is below h
            let u: f64 = rng.random();
            if u < -(qii * self.h).exp_m1() {
                let start = *i;
                let mut t = -(1.0 - u).ln() / -qii;
                loop {
                    *i = self.local.target(xq, *i, rng.random());
                    if self.jumps == JumpScheme::Single {
                        break;
                    }
                    let r = -self.local.leave_rate(xq, *i);
                    if r <= 0.0 {
                        break;
                    }
                    t += -(1.0 - rng.random::<f64>()).ln() / r;
                    if t >= self.h {
                        break;
                    }
                }
                jumped = *i != start;
            }
        }

        let (lo, hi) = self.domain;
        let mut absorbed = false;
        if xn <= lo || xn >= hi {
            let at_low = xn <= lo;
            let policy = match self.policy {
                BoundaryPolicy::Classified => match &self.boundaries {
                    Some(b) => {
                        let kinds = if at_low { &b.at_zero } else { &b.at_one };
                        match kinds[*i - 1] {
                            BoundaryKind::Absorbing => BoundaryPolicy::Absorb,
                            BoundaryKind::Reflecting => BoundaryPolicy::Reflect,
                        }
                    }
                    None => BoundaryPolicy::Reflect,
                },
                p => p,
            };
            match policy {
                BoundaryPolicy::Absorb => {
                    xn = if at_low { lo } else { hi };
                    absorbed = true;
                }
                BoundaryPolicy::Reflect => {
                    if xn < lo {
                        xn = 2.0 * lo - xn;
                    }
                    if xn > hi {
                        xn = 2.0 * hi - xn;
                    }
                    xn = xn.clamp(lo, hi);
                }
                _ => xn = xn.clamp(lo + BOUNDARY_EPS, hi - BOUNDARY_EPS),
            }
        }
        *x = xn;
        StepOutcome { jumped, absorbed }
    }

    /// `max |Q_ii(x)| h` over a sample of interior points.
    pub fn stiffness(&self, samples: usize) -> f64 {
        let (lo, hi) = self.domain;
        let (lo, hi) = (if lo.is_finite() { lo } else { -10.0 }, if hi.is_finite() { hi } else { 10.0 });
        let mut worst: f64 = 0.0;
        for s in 1..samples {
            let x = lo + (hi - lo) * s as f64 / samples as f64;
            for i in 1..=self.n_phases {
                worst = worst.max(-self.local.leave_rate(x, i) * self.h);
            }
        }
        worst
    }
}
