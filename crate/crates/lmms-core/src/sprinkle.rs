//! Random generators: uniform sprinklings of a flat causal diamond and
//! random layered causets.
//!
//! The diamond of half-height T in dimension d (one time plus d−1 space
//! coordinates) is the set of events whose backward and forward light cones
//! both contain the diamond's tips (0 ± T on the time axis): |x⃗| < T − |t|.
//! Sampling is by rejection from the bounding box; the time separation of
//! two events is the Minkowski proper time when they are chronologically
//! related and zero otherwise, which makes every sprinkle a valid bounded
//! space of diameter at most 2T. Weights are uniform over the sampled
//! events (an empirical measure), and a zero-weight spacelike boundary
//! point is appended unless the configuration drops it.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::SolveError;
use crate::rng::DetRng;
use crate::space::{one_point_compactification, FiniteLmms, TimeMatrix};

/// Rejection-sampling attempt cap per event.
const MAX_REJECTION_ATTEMPTS: u64 = 1_000_000;

/// Retry cap for Poisson draws that produce zero events.
const MAX_EMPTY_REDRAWS: u64 = 1_000;

/// An event of d-dimensional flat spacetime: coordinates [t, x₁, …, x_{d−1}].
#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub coords: Vec<f64>,
}

impl Event {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Minkowski time separation: √(Δt² − |Δx⃗|²) when y is in the chronological
/// future of x, zero otherwise.
pub fn minkowski_tau(x: &Event, y: &Event) -> f64 {
    debug_assert_eq!(x.dim(), y.dim());
    let dt = y.coords[0] - x.coords[0];
    if dt <= 0.0 {
        return 0.0;
    }
    let mut s2 = dt * dt;
    for k in 1..x.dim() {
        let dx = y.coords[k] - x.coords[k];
        s2 -= dx * dx;
    }
    if s2 > 0.0 {
        libm::sqrt(s2)
    } else {
        0.0
    }
}

/// Volume of the unit ball in k dimensions (V₀ = 1, V₁ = 2, V_k =
/// V_{k−2}·2π/k).
pub fn unit_ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(k - 2) * 2.0 * core::f64::consts::PI / k as f64,
    }
}

/// Volume of the diamond of half-height t in dimension d: integrating the
/// spatial ball of radius t − |s| over time gives 2·V_{d−1}·t^d / d.
pub fn diamond_volume(dim: usize, t: f64) -> f64 {
    2.0 * unit_ball_volume(dim - 1) * libm::pow(t, dim as f64) / dim as f64
}

/// How many events to place.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SprinkleMode {
    /// Exactly this many iid uniform events.
    Iid(usize),
    /// A Poisson process of this intensity (events per unit volume); the
    /// count is Poisson with mean intensity × volume, redrawn (bounded
    /// times) if zero.
    Poisson(f64),
}

#[derive(Clone, Debug)]
pub struct SprinkleConfig {
    /// Spacetime dimension (1 = time only; 2, 3, 4 = usual diamonds).
    pub dim: usize,
    /// Half-height of the diamond.
    pub half_height: f64,
    pub mode: SprinkleMode,
    pub seed: u64,
    /// Skip the zero-weight spacelike boundary point.
    pub drop_boundary: bool,
}

/// A sprinkled space together with the event coordinates that produced it.
/// When the boundary point is kept it is the last index and has no event.
#[derive(Clone, Debug)]
pub struct Sprinkle {
    pub space: FiniteLmms,
    pub events: Vec<Event>,
}

fn sample_event(dim: usize, t: f64, rng: &mut DetRng) -> Result<Event, SolveError> {
    for _ in 0..MAX_REJECTION_ATTEMPTS {
        let mut coords = Vec::with_capacity(dim);
        for _ in 0..dim {
            coords.push(rng.range(-t, t));
        }
        let mut r2 = 0.0;
        for &x in &coords[1..] {
            r2 += x * x;
        }
        let slack = t - coords[0].abs();
        if slack > 0.0 && r2 < slack * slack {
            return Ok(Event { coords });
        }
    }
    Err(SolveError::EnumerationCap {
        needed: MAX_REJECTION_ATTEMPTS as u128 + 1,
        cap: MAX_REJECTION_ATTEMPTS as u128,
    })
}

/// Sprinkles the diamond according to the configuration.
pub fn sprinkle(config: &SprinkleConfig) -> Result<Sprinkle, SolveError> {
    if config.dim == 0 {
        return Err(SolveError::ParameterRange {
            what: "dimension",
            got: 0.0,
        });
    }
    if !config.half_height.is_finite() || config.half_height <= 0.0 {
        return Err(SolveError::ParameterRange {
            what: "half height",
            got: config.half_height,
        });
    }
    let mut rng = DetRng::substream(config.seed, 0);
    let count = match config.mode {
        SprinkleMode::Iid(n) => {
            if n == 0 {
                return Err(SolveError::ParameterRange {
                    what: "event count",
                    got: 0.0,
                });
            }
            n
        }
        SprinkleMode::Poisson(intensity) => {
            if !intensity.is_finite() || intensity <= 0.0 {
                return Err(SolveError::ParameterRange {
                    what: "intensity",
                    got: intensity,
                });
            }
            let mean = intensity * diamond_volume(config.dim, config.half_height);
            let mut draw = 0u64;
            for k in 0..=MAX_EMPTY_REDRAWS {
                draw = DetRng::substream(config.seed, 10 + k).poisson(mean);
                if draw > 0 {
                    break;
                }
            }
            if draw == 0 {
                return Err(SolveError::ParameterRange {
                    what: "poisson mean (kept drawing zero events)",
                    got: mean,
                });
            }
            draw as usize
        }
    };

    let mut events = Vec::with_capacity(count);
    for _ in 0..count {
        events.push(sample_event(config.dim, config.half_height, &mut rng)?);
    }

    let mut tau = TimeMatrix::zeros(count);
    for i in 0..count {
        for j in 0..count {
            if i != j {
                tau.set(i, j, minkowski_tau(&events[i], &events[j]));
            }
        }
    }
    let labels: Vec<_> = (0..count).map(|i| format!("e{i}")).collect();
    let weights = vec![1.0 / count as f64; count];
    let space = FiniteLmms::new(labels, tau, weights, None)
        .expect("sprinkled dimensions are consistent");
    let space = if config.drop_boundary {
        space
    } else {
        one_point_compactification(&space).expect("fresh sprinkle has no boundary yet")
    };
    Ok(Sprinkle { space, events })
}

/// Random layered causet: n events at sorted uniform times in (0, max_tau);
/// each increasing pair is causally linked with the given probability, and
/// related events are separated by their time difference (path
/// concatenation makes the relation transitive and the separations
/// additive, so the axioms hold by construction). Weights are uniform; no
/// boundary point is added.
pub fn random_causet(n: usize, density: f64, max_tau: f64, seed: u64) -> FiniteLmms {
    assert!(n > 0, "need at least one event");
    assert!((0.0..=1.0).contains(&density), "density is a probability");
    assert!(max_tau > 0.0 && max_tau.is_finite());
    let mut rng = DetRng::substream(seed, 0);
    let mut times: Vec<f64> = (0..n).map(|_| rng.range(0.0, max_tau)).collect();
    times.sort_by(f64::total_cmp);
    // Direct links.
    let mut linked = vec![false; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            linked[i * n + j] = rng.uniform() < density;
        }
    }
    // Transitive closure over the time order.
    for k in 0..n {
        for i in 0..k {
            if !linked[i * n + k] {
                continue;
            }
            for j in (k + 1)..n {
                if linked[k * n + j] {
                    linked[i * n + j] = true;
                }
            }
        }
    }
    let mut tau = TimeMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if linked[i * n + j] {
                tau.set(i, j, times[j] - times[i]);
            }
        }
    }
    let weights = vec![1.0 / n as f64; n];
    FiniteLmms::from_parts(tau, weights, None).expect("layered causet is well formed")
}
