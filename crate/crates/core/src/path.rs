//! The collecting path: drift `-1` plus an upward jump of size `m_i` at each
//! arrival position `u_i`.  Rotated at its argmin, the excursion lengths of
//! the extended path above its running minimum are exactly the positive
//! occupied component lengths of the right diffusion driven by the same
//! events.

use crate::coord::Coord;
use crate::policy::MassEvent;
use crate::{Error, Result};

/// Càdlàg path `S_x = -x + sum of m_j over u_j <= x` on `[0, 1]`.
///
/// Jump positions are distinct (ties merged by summing), zero masses do not
/// register.
#[derive(Debug, Clone)]
pub struct CollectingPath<C: Coord> {
    /// sorted `(position, jump)` with positive jumps
    jumps: Vec<(C, C)>,
    total_mass: C,
}

/// Excursion decomposition of the rotated extended path.
#[derive(Debug, Clone)]
pub struct ExcursionDecomposition<C: Coord> {
    /// `(start position on the circle, length, level)` in traversal order
    pub excursions: Vec<(C, C, C)>,
    /// rotation point: first attainment of the minimum of `S` over `(0, 1]`
    pub argmin: C,
}

impl<C: Coord> CollectingPath<C> {
    pub fn build(events: &[MassEvent<C>]) -> Result<Self> {
        let mut total = C::zero();
        for e in events {
            total = total + e.m;
        }
        if total.to_f64() >= 1.0 {
            return Err(Error::MassOverflow(total.to_f64()));
        }
        let mut jumps: Vec<(C, C)> = Vec::new();
        let mut evs: Vec<(C, C)> = events
            .iter()
            .filter(|e| e.m > C::zero())
            .map(|e| (e.u.position(), e.m))
            .collect();
        evs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (u, m) in evs {
            match jumps.last_mut() {
                Some((pos, jm)) if *pos == u => *jm = *jm + m,
                _ => jumps.push((u, m)),
            }
        }
        Ok(CollectingPath {
            jumps,
            total_mass: total,
        })
    }

    pub fn jumps(&self) -> &[(C, C)] {
        &self.jumps
    }

    pub fn total_mass(&self) -> C {
        self.total_mass
    }

    /// `S(1) = W - 1`.
    pub fn terminal(&self) -> C {
        self.total_mass - C::one()
    }

    /// Right-continuous evaluation `S(x)`, exact for rational inputs.
    pub fn eval(&self, x: C) -> C {
        let mut s = C::zero() - x;
        for &(u, m) in &self.jumps {
            if u <= x {
                s = s + m;
            }
        }
        s
    }

    /// Left limit `S(x-)`.
    pub fn eval_left(&self, x: C) -> C {
        let mut s = C::zero() - x;
        for &(u, m) in &self.jumps {
            if u < x {
                s = s + m;
            }
        }
        s
    }

    /// First attainment of the minimum of `S` over `(0, 1]`, taken over left
    /// limits.  Candidates are the jump positions (value `S(u-)`) and the
    /// endpoint 1 (value `S(1)`); between jumps the path only descends.
    pub fn argmin(&self) -> (C, C) {
        let mut best_x = C::one();
        let mut best_v = self.terminal();
        // scan in reverse so earlier candidates win ties
        for &(u, _) in self.jumps.iter().rev() {
            let v = self.eval_left(u);
            if v <= best_v {
                best_v = v;
                best_x = u;
            }
        }
        (best_x, best_v)
    }

    /// Argmin of the bridge `x -> S(x) - x * S(1)` over `(0, 1]`, the
    /// alternate rotation point.
    pub fn argmin_bridge(&self) -> C {
        let s1 = self.terminal();
        let mut best_x = C::one();
        let mut best_v = C::zero(); // bridge value at 1 is 0
        for &(u, _) in self.jumps.iter().rev() {
            let v = self.eval_left(u) - u * s1;
            if v <= best_v {
                best_v = v;
                best_x = u;
            }
        }
        best_x
    }

    /// Accessor for the rotated path `Rot(a, S)(x) = S̄(a + x) - min S`,
    /// where `S̄` extends `S` by pasting copies head to tail.
    pub fn rotate_at_argmin(&self) -> (RotatedPath<'_, C>, C) {
        let (a, min) = self.argmin();
        (RotatedPath { path: self, a, min }, a)
    }

    /// Excursion decomposition of the extended path above its running
    /// minimum on `[a, a+1)`.  Traverses events cyclically from the argmin,
    /// tracking the height above the running minimum; an excursion closes
    /// when the path descends back to it.
    pub fn excursions_above_min(&self) -> ExcursionDecomposition<C> {
        let (a, min_v) = self.argmin();
        let mut excursions = Vec::new();
        if self.jumps.is_empty() {
            return ExcursionDecomposition {
                excursions,
                argmin: a,
            };
        }

        // events in cyclic order starting at a (a jump AT a comes first)
        let mut order: Vec<usize> = (0..self.jumps.len()).collect();
        order.sort_by(|&i, &j| {
            let di = (self.jumps[i].0 - a).wrap_unit();
            let dj = (self.jumps[j].0 - a).wrap_unit();
            di.partial_cmp(&dj).unwrap()
        });

        let mut h = C::zero(); // height above the running minimum
        let mut pos = C::zero(); // traversal coordinate in [0, 1)
        let mut level = min_v;
        let mut start: Option<(C, C)> = None; // (start coordinate, level)
        for &i in &order {
            let (u, m) = self.jumps[i];
            let d = (u - a).wrap_unit();
            let fall = d - pos;
            if h > C::zero() && h < fall {
                // the excursion closes strictly between events
                let (s, lv) = start.take().expect("open excursion");
                excursions.push(((a + s).wrap_unit(), pos + h - s, lv));
                level = level - (fall - h);
                h = C::zero();
            } else if h > C::zero() && h == fall {
                // the path touches the running minimum exactly at this jump:
                // the closed arcs share an endpoint, so the component (and
                // hence the excursion) continues
                h = C::zero();
            } else if h > C::zero() {
                h = h - fall;
            } else {
                level = level - fall;
            }
            pos = d;
            if h == C::zero() && start.is_none() {
                start = Some((pos, level));
            }
            h = h + m;
        }
        // final descent to a + 1, where the path returns exactly to the
        // running minimum level
        let fall = C::one() - pos;
        debug_assert!(
            h.to_f64() <= fall.to_f64() + 1e-9,
            "path must close at the argmin"
        );
        if h > C::zero() {
            let (s, lv) = start.take().expect("open excursion");
            let end = pos + h;
            // a block ending exactly at the rotation point merges with a
            // block starting there (shared endpoint across the wrap)
            if end == C::one()
                && excursions
                    .first()
                    .map(|e| e.0 == a.wrap_unit())
                    .unwrap_or(false)
            {
                let first = excursions.remove(0);
                excursions.push(((a + s).wrap_unit(), end - s + first.1, lv));
            } else {
                excursions.push(((a + s).wrap_unit(), end - s, lv));
            }
        }
        ExcursionDecomposition {
            excursions,
            argmin: a,
        }
    }

    /// Plot-ready event points of the path: `(x, S(x-), S(x))` at every jump
    /// plus the endpoints.
    pub fn points(&self) -> Vec<(C, C, C)> {
        let mut out = Vec::with_capacity(self.jumps.len() + 2);
        out.push((C::zero(), C::zero(), self.eval(C::zero())));
        for &(u, _) in &self.jumps {
            out.push((u, self.eval_left(u), self.eval(u)));
        }
        out.push((C::one(), self.terminal(), self.terminal()));
        out
    }

    /// Positive excursion lengths as a sorted multiset.
    pub fn excursion_lengths(&self) -> Vec<C> {
        let mut v: Vec<C> = self
            .excursions_above_min()
            .excursions
            .iter()
            .map(|e| e.1)
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }
}

impl CollectingPath<f64> {
    /// Reflected tilted path `x -> T(x) - min_{s<=x} T(s)` with
    /// `T(x) = S(x) - lambda * x`, sampled on `grid+1` equispaced points.
    pub fn reflected_profile(&self, lambda: f64, grid: usize) -> Result<Vec<f64>> {
        if grid < 2 {
            return Err(Error::InvalidParameter("grid must be >= 2".into()));
        }
        let slope = 1.0 + lambda;
        let mut out = Vec::with_capacity(grid + 1);
        let mut ji = 0usize;
        let mut v = 0.0_f64; // T at current scan position
        let mut runmin = 0.0_f64;
        let mut x = 0.0_f64;
        for g in 0..=grid {
            let xg = g as f64 / grid as f64;
            // advance through jumps in (x, xg]
            while ji < self.jumps.len() && self.jumps[ji].0 <= xg {
                let (u, m) = self.jumps[ji];
                let v_before = v - slope * (u - x);
                runmin = runmin.min(v_before);
                v = v_before + m;
                x = u;
                ji += 1;
            }
            let vg = v - slope * (xg - x);
            runmin = runmin.min(vg);
            v = vg;
            x = xg;
            out.push(v - runmin);
        }
        Ok(out)
    }

    /// Exact integral of the reflected tilted path over `[0, 1]`.
    ///
    /// Between jumps the reflected path descends at slope `1+lambda` until it
    /// hits zero and then stays there, so each inter-jump piece contributes a
    /// trapezoid or a cut triangle.
    pub fn reflected_integral(&self, lambda: f64) -> f64 {
        let slope = 1.0 + lambda;
        let mut total = 0.0;
        let mut r = 0.0; // reflected value at current position
        let mut x = 0.0;
        let piece = |r0: f64, d: f64| -> f64 {
            if d <= 0.0 {
                return 0.0;
            }
            let t0 = r0 / slope;
            if t0 >= d {
                (r0 + (r0 - slope * d)) * d / 2.0
            } else {
                r0 * t0 / 2.0
            }
        };
        for &(u, m) in &self.jumps {
            let d = u - x;
            total += piece(r, d);
            r = (r - slope * d).max(0.0) + m;
            x = u;
        }
        total += piece(r, 1.0 - x);
        total
    }
}

/// Evaluation view of `Rot(a, S)`.
pub struct RotatedPath<'a, C: Coord> {
    path: &'a CollectingPath<C>,
    a: C,
    min: C,
}

impl<'a, C: Coord> RotatedPath<'a, C> {
    /// `Rot(a,S)(x)` for `x` in `[0, 1]`.
    pub fn eval(&self, x: C) -> C {
        let one = C::one();
        if x <= one - self.a {
            self.path.eval(self.a + x) - self.min
        } else {
            self.path.terminal() - self.min + self.path.eval(x - (one - self.a))
        }
    }

    pub fn rotation_point(&self) -> C {
        self.a
    }
}
