//! Brownian-excursion numerics: sampling the excursion as a rescaled
//! conditioned walk (cycle-lemma rotation of a Poisson bridge), fragmenting
//! the tilted excursion above its running minimum, the limit-measure
//! functionals, their closed-form expectations, and the urn fluid-limit
//! check.

use rand::Rng;
use statrs::function::erf::erf;

use crate::policy::fluid_boundaries;
use crate::{Error, Result};

/// Discretized excursion on the grid `i/N`, `values[0] = values[N] = 0`.
#[derive(Debug, Clone)]
pub struct ExcursionGrid {
    pub values: Vec<f64>,
}

impl ExcursionGrid {
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn range(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Trapezoid integral of the path (`values` are the node heights).
    pub fn integral(&self) -> f64 {
        let n = self.n() as f64;
        self.values
            .windows(2)
            .map(|w| (w[0] + w[1]) / 2.0)
            .sum::<f64>()
            / n
    }
}

/// Sample the excursion: increments `Poisson(1) - 1` conditioned to first
/// hit `-1` at step `N`, rescaled by `sqrt(N)`.
///
/// Conditioned on their sum being `N - 1`, the Poisson variables are the box
/// counts of `N - 1` uniform balls in `N` boxes; the cycle lemma then picks
/// the unique rotation that turns the bridge into a first-passage path.
pub fn sample_excursion<R: Rng>(n: usize, rng: &mut R) -> Result<ExcursionGrid> {
    if n < 64 {
        return Err(Error::InvalidParameter("grid must be >= 64".into()));
    }
    let mut counts = vec![0i32; n];
    for _ in 0..n - 1 {
        counts[rng.gen_range(0..n)] += 1;
    }
    // bridge partial sums and first argmin
    let mut s = vec![0i32; n + 1];
    let mut min_v = i32::MAX;
    let mut argmin = 0usize;
    for j in 1..=n {
        s[j] = s[j - 1] + counts[j - 1] - 1;
        if s[j] < min_v {
            min_v = s[j];
            argmin = j;
        }
    }
    debug_assert_eq!(s[n], -1);
    let scale = (n as f64).sqrt();
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    for i in 1..n {
        let v = if i <= n - argmin {
            s[argmin + i] - s[argmin]
        } else {
            -1 - s[argmin] + s[i - (n - argmin)]
        };
        debug_assert!(v >= 0);
        values.push(v as f64 / scale);
    }
    values.push(0.0); // exact endpoint pinning
    Ok(ExcursionGrid { values })
}

/// Excursion intervals of `x -> e(x) - t x` above its running minimum, for
/// the piecewise-linear interpolation of the grid path.  An excursion closes
/// only when the path descends strictly below the running minimum (grid
/// touches do not split).  Returns `(start, end)` pairs.
pub fn tilted_excursion_intervals(e: &ExcursionGrid, t: f64) -> Vec<(f64, f64)> {
    let n = e.n();
    let dx = 1.0 / n as f64;
    let mut out = Vec::new();
    let mut m = 0.0f64; // running minimum
    let mut prev = 0.0f64;
    let mut start: Option<f64> = None;
    for j in 1..=n {
        let x = j as f64 * dx;
        let v = e.values[j] - t * x;
        match start {
            Some(s) => {
                if v < m {
                    // closes where the segment crosses the running min level
                    let frac = (prev - m) / (prev - v);
                    let end = x - dx + frac * dx;
                    out.push((s, end));
                    start = None;
                    m = v;
                }
            }
            None => {
                if v > m {
                    start = Some(x - dx);
                } else {
                    m = v;
                }
            }
        }
        prev = v;
    }
    if let Some(s) = start {
        out.push((s, 1.0));
    }
    out
}

/// Lengths of the tilted-excursion fragments, unsorted.
pub fn tilted_excursion_lengths(e: &ExcursionGrid, t: f64) -> Vec<f64> {
    tilted_excursion_intervals(e, t)
        .into_iter()
        .map(|(s, t)| t - s)
        .collect()
}

/// The `k` largest fragment lengths at tilt `lambda`, sorted descending and
/// zero-padded.
pub fn largest_excursions(e: &ExcursionGrid, lambda: f64, k: usize) -> Vec<f64> {
    let mut lens = tilted_excursion_lengths(e, lambda);
    lens.sort_by(|a, b| b.partial_cmp(a).unwrap());
    lens.resize(k.max(lens.len()), 0.0);
    lens.truncate(k);
    lens
}

/// `<g, M_lambda>` for one excursion sample: numerically integrates
/// `int_lambda^{t_max} sum_k g(l_t(k)) l_t(k) dt` with `g` supported in
/// `[eps, 1]`.  `t_max` follows the band bound `max(4 lambda, 8 range/eps)`,
/// after which no fragment reaches `eps` and the integrand vanishes.
pub fn m_lambda_functional(
    e: &ExcursionGrid,
    lambda: f64,
    eps: f64,
    g: impl Fn(f64) -> f64,
    t_grid: usize,
) -> Result<f64> {
    if eps <= 0.0 || lambda < 0.0 || t_grid < 8 {
        return Err(Error::InvalidParameter(
            "need eps > 0, lambda >= 0, t_grid >= 8".into(),
        ));
    }
    let t_max = (4.0 * lambda).max(8.0 * e.range() / eps).max(1.0);
    if let Some(&max_len) = tilted_excursion_lengths(e, t_max)
        .iter()
        .max_by(|a, b| a.partial_cmp(b).unwrap())
        .as_ref()
    {
        if *max_len >= eps {
            return Err(Error::InvalidParameter(format!(
                "t_max {t_max} too small: fragment of size {max_len} >= eps {eps}"
            )));
        }
    }

    let integrand = |t: f64| -> f64 {
        tilted_excursion_lengths(e, t)
            .iter()
            .filter(|&&l| l >= eps)
            .map(|&l| g(l) * l)
            .sum()
    };

    // geometric nodes on [t_lo, t_max]; a short linear head covers
    // [lambda, t_lo] when lambda is very small
    let t_lo = lambda.max(0.01);
    let mut nodes = Vec::with_capacity(t_grid + 33);
    if lambda < t_lo {
        for i in 0..32 {
            nodes.push(lambda + (t_lo - lambda) * i as f64 / 32.0);
        }
    }
    let ratio = (t_max / t_lo).powf(1.0 / (t_grid as f64 - 1.0));
    let mut t = t_lo;
    for _ in 0..t_grid {
        nodes.push(t);
        t *= ratio;
    }

    let mut total = 0.0;
    let mut prev_t = nodes[0];
    let mut prev_f = integrand(prev_t);
    for &t in &nodes[1..] {
        let f = integrand(t);
        total += (prev_f + f) / 2.0 * (t - prev_t);
        prev_t = t;
        prev_f = f;
    }
    Ok(total)
}

/// `E<Id, M_lambda> = sqrt(pi/2) e^{lambda^2/2} (1 - erf(lambda/sqrt(2)))`.
pub fn closed_form_mean_id(lambda: f64) -> f64 {
    (std::f64::consts::PI / 2.0).sqrt()
        * (lambda * lambda / 2.0).exp()
        * (1.0 - erf(lambda / std::f64::consts::SQRT_2))
}

/// `E<x^m, M_lambda> = E[exp(-lambda L_{m+1}) / L_{m+1}]`, where `L_{m+1}`
/// is the length spanned by `m+1` random points of the continuum tree, with
/// density `f(y) = y e^{-y^2/2} (y^2/2)^{m-1} / (m-1)!`.
///
/// The `1/L` arises from integrating `E[exp(-t L)]` (the probability that
/// all `m+1` points share a fragment at time `t`) over `t in [lambda, inf)`;
/// at `m = 1` this reduces to the erf closed form of [`closed_form_mean_id`].
pub fn closed_form_mean_power(m: u32, lambda: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::InvalidParameter("need m >= 1".into()));
    }
    // Simpson on [0, 12]; the e^{-lambda y}/y factor cancels against the
    // density's leading y, so the integrand is smooth at 0
    let steps = 4800usize;
    let h = 12.0 / steps as f64;
    let mut fact = 1.0;
    for i in 1..m {
        fact *= i as f64;
    }
    let f = |y: f64| -> f64 {
        let pow = if m == 1 {
            1.0
        } else if y <= 0.0 {
            0.0
        } else {
            (y * y / 2.0).powi(m as i32 - 1)
        };
        (-lambda * y).exp() * (-y * y / 2.0).exp() * pow / fact
    };
    let mut total = f(0.0) + f(12.0);
    for i in 1..steps {
        let y = i as f64 * h;
        total += f(y) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    Ok(total * h / 3.0)
}

/// Outcome of the urn fluid-limit comparison.
#[derive(Debug, Clone)]
pub struct FluidCheck {
    /// sup over checkpoints of `|b(tM)/M - fluid b(t)|`
    pub sup_error: f64,
    pub checkpoints: Vec<(f64, f64, f64)>,
}

/// Simulate the `[[0,1],[1,0]]` urn from `(M alpha0, M beta0)` balls and
/// compare the rescaled trajectory with the fluid boundary law.
pub fn polya_fluid_check<R: Rng>(
    alpha0: f64,
    beta0: f64,
    m_scale: u64,
    t_max: f64,
    rng: &mut R,
) -> Result<FluidCheck> {
    if alpha0 <= 0.0 || beta0 <= 0.0 || m_scale < 10 {
        return Err(Error::InvalidParameter(
            "need alpha0, beta0 > 0 and M >= 10".into(),
        ));
    }
    let mut a = (alpha0 * m_scale as f64).round() as u64;
    let mut b = (beta0 * m_scale as f64).round() as u64;
    let steps = (t_max * m_scale as f64).ceil() as u64;
    let stride = (m_scale / 100).max(1);
    let mut sup = 0.0;
    let mut checkpoints = Vec::new();
    for step in 1..=steps {
        let total = a + b;
        if rng.gen_range(0..total) < a {
            b += 1;
        } else {
            a += 1;
        }
        if step % stride == 0 || step == steps {
            let t = step as f64 / m_scale as f64;
            let (_, fluid_b) = fluid_boundaries(alpha0, beta0, t);
            let scaled = b as f64 / m_scale as f64;
            let err = (scaled - fluid_b).abs();
            if err > sup {
                sup = err;
            }
            checkpoints.push((t, scaled, fluid_b));
        }
    }
    Ok(FluidCheck {
        sup_error: sup,
        checkpoints,
    })
}

/// Exact mean recursion of the urn: `E[b(t)]` after `t` draws from integer
/// contents `(a0, b0)`.
pub fn polya_mean_exact(a0: u64, b0: u64, t: u64) -> f64 {
    let l0 = (a0 + b0) as f64;
    if t == 0 {
        return b0 as f64;
    }
    let m1 = b0 as f64 + a0 as f64 / l0;
    let tt = (t - 1) as f64;
    (l0 * m1 + tt * l0 + tt * (tt + 1.0) / 2.0) / (tt + l0)
}
