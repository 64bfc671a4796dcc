//! Weight-system algebra: anisotropy parameter, ferroelectric classification,
//! gauge transformation, stochastic reduction, the phase hyperbolas and lens
//! region, slope projection onto the stochastic curve, and the sparsification
//! parameter schedule.

use crate::scalar::{Real, Scalar};
use num_traits::NumCast;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PhaseError {
    #[error("weights are not ferroelectric (need delta >= 1 and a1*a2 > b1*b2)")]
    NotFerroelectric,
    #[error("slope ({s}, {t}) violates 0 < s <= t <= phi(s)")]
    SlopeOutOfRange { s: f64, t: f64 },
    #[error("degenerate schedule: {0} rounds to zero (N too small for this delta)")]
    DegenerateSchedule(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// The six positive vertex weights `(a1, a2, b1, b2, c1, c2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSystem<T> {
    pub a1: T,
    pub a2: T,
    pub b1: T,
    pub b2: T,
    pub c1: T,
    pub c2: T,
}

/// Gauge freedom `(r, x, y, z)`, all strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeParams<T> {
    pub r: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

/// Stochastic specialization `(B1, B2)`, both in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticParams<T> {
    pub b1: T,
    pub b2: T,
}

/// Vertical/horizontal edge densities `(s, t)`, both in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopePair<T> {
    pub s: T,
    pub t: T,
}

/// Where a slope sits relative to the lens region between the two hyperbolas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeClass {
    InteriorLens,
    BoundaryH1,
    BoundaryH2,
    Exterior,
    FrozenBoundary,
}

impl std::fmt::Display for SlopeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SlopeClass::InteriorLens => "InteriorLens",
            SlopeClass::BoundaryH1 => "BoundaryH1",
            SlopeClass::BoundaryH2 => "BoundaryH2",
            SlopeClass::Exterior => "Exterior",
            SlopeClass::FrozenBoundary => "FrozenBoundary",
        };
        f.write_str(s)
    }
}

impl<T: Scalar> WeightSystem<T> {
    pub fn new(a1: T, a2: T, b1: T, b2: T, c1: T, c2: T) -> Result<Self, PhaseError> {
        let w = WeightSystem { a1, a2, b1, b2, c1, c2 };
        if w.as_array().iter().any(|v| **v <= T::zero()) {
            return Err(PhaseError::InvalidParameter("all six weights must be > 0"));
        }
        Ok(w)
    }

    /// The stochastic weight system `(1, 1, B1, B2, 1-B1, 1-B2)`.
    pub fn stochastic(p: &StochasticParams<T>) -> Self {
        WeightSystem {
            a1: T::one(),
            a2: T::one(),
            b1: p.b1.clone(),
            b2: p.b2.clone(),
            c1: T::one() - p.b1.clone(),
            c2: T::one() - p.b2.clone(),
        }
    }

    fn as_array(&self) -> [&T; 6] {
        [&self.a1, &self.a2, &self.b1, &self.b2, &self.c1, &self.c2]
    }

    /// Weight of the configuration with the given code (0..5 for the
    /// a1, a2, b1, b2, c1, c2 types).
    pub fn by_code(&self, code: u8) -> T {
        match code {
            0 => self.a1.clone(),
            1 => self.a2.clone(),
            2 => self.b1.clone(),
            3 => self.b2.clone(),
            4 => self.c1.clone(),
            5 => self.c2.clone(),
            _ => panic!("configuration code out of range: {code}"),
        }
    }

    /// Applies the gauge map `(r a1, rz a2, ryz b1, r y^-1 b2, rx c1, r x^-1 z c2)`.
    pub fn gauge_transform(&self, g: &GaugeParams<T>) -> Self {
        WeightSystem {
            a1: g.r.clone() * self.a1.clone(),
            a2: g.r.clone() * g.z.clone() * self.a2.clone(),
            b1: g.r.clone() * g.y.clone() * g.z.clone() * self.b1.clone(),
            b2: g.r.clone() * self.b2.clone() / g.y.clone(),
            c1: g.r.clone() * g.x.clone() * self.c1.clone(),
            c2: g.r.clone() * g.z.clone() * self.c2.clone() / g.x.clone(),
        }
    }

    /// Complements vertical edges: `(b1, b2, a1, a2, c1, c2)`; an involution.
    pub fn complement(&self) -> Self {
        WeightSystem {
            a1: self.b1.clone(),
            a2: self.b2.clone(),
            b1: self.a1.clone(),
            b2: self.a2.clone(),
            c1: self.c1.clone(),
            c2: self.c2.clone(),
        }
    }

    /// Reflects into the line y = x: `(a1, a2, b2, b1, c2, c1)`; an involution.
    pub fn reflect(&self) -> Self {
        WeightSystem {
            a1: self.a1.clone(),
            a2: self.a2.clone(),
            b1: self.b2.clone(),
            b2: self.b1.clone(),
            c1: self.c2.clone(),
            c2: self.c1.clone(),
        }
    }
}

impl<T: Real> WeightSystem<T> {
    /// Anisotropy parameter `(a1 a2 + b1 b2 - c1 c2) / (2 sqrt(a1 a2 b1 b2))`.
    pub fn delta(&self) -> T {
        let two = T::one() + T::one();
        let aa = self.a1 * self.a2;
        let bb = self.b1 * self.b2;
        let cc = self.c1 * self.c2;
        (aa + bb - cc) / (two * (aa * bb).sqrt())
    }

    /// Ferroelectric regime of this toolkit: `delta > 1` and `a1 a2 > b1 b2`.
    pub fn is_ferroelectric(&self) -> bool {
        self.delta() > T::one() && self.a1 * self.a2 > self.b1 * self.b2
    }

    /// Reduces ferroelectric weights to stochastic form, returning `(B1, B2)`
    /// together with the witness gauge mapping `self` to
    /// `(1, 1, B1, B2, 1-B1, 1-B2)`.
    ///
    /// Accepts `delta == 1` (then `B1 == B2`); samplers that need `B1 < B2`
    /// reject that case separately.
    pub fn to_stochastic(&self) -> Result<(StochasticParams<T>, GaugeParams<T>), PhaseError> {
        let delta = self.delta();
        let aa = self.a1 * self.a2;
        let bb = self.b1 * self.b2;
        if delta < T::one() || bb >= aa {
            return Err(PhaseError::NotFerroelectric);
        }
        let disc = (delta * delta - T::one()).max(T::zero()).sqrt();
        let ratio = (bb / aa).sqrt();
        let b1 = (delta - disc) * ratio;
        let b2 = (delta + disc) * ratio;
        let gauge = GaugeParams {
            r: T::one() / self.a1,
            x: self.a1 / self.c1 * (T::one() - b1),
            y: (delta - disc) * (self.a2 * self.b2 / (self.a1 * self.b1)).sqrt(),
            z: self.a1 / self.a2,
        };
        Ok((StochasticParams { b1, b2 }, gauge))
    }

    /// The hyperbola function of the phase diagram,
    /// `h(x, y) = 2xy sqrt(delta^2-1) - C1 x + C2 y` with
    /// `C1 = sqrt(a1 a2 / b1 b2) - delta + sqrt(delta^2-1)` and
    /// `C2 = sqrt(a1 a2 / b1 b2) - delta - sqrt(delta^2-1)`.
    ///
    /// Evaluated as `2xy S - D (x - y) - S (x + y)` with `D = sqrt(aa/bb) - delta`
    /// so that the corners (0,0) and (1,1) vanish exactly in floating point.
    pub fn h_value(&self, x: T, y: T) -> Result<T, PhaseError> {
        let (d, s) = self.h_coefficients()?;
        let two = T::one() + T::one();
        Ok(two * x * y * s - d * (x - y) - s * (x + y))
    }

    /// `(D, S)` with `D = sqrt(a1 a2 / b1 b2) - delta`, `S = sqrt(delta^2 - 1)`.
    fn h_coefficients(&self) -> Result<(T, T), PhaseError> {
        let delta = self.delta();
        if delta < T::one() {
            return Err(PhaseError::NotFerroelectric);
        }
        let s = (delta * delta - T::one()).max(T::zero()).sqrt();
        let d = (self.a1 * self.a2 / (self.b1 * self.b2)).sqrt() - delta;
        Ok((d, s))
    }

    /// Solves `h(x, t) = 0` for `t` at a given `x`; for stochastic weights this
    /// is the curve `t = phi(x)`. Written so both corners evaluate exactly.
    pub fn h1_curve(&self, x: T) -> Result<T, PhaseError> {
        let (d, s) = self.h_coefficients()?;
        let two = T::one() + T::one();
        // 2 x t S - (D + S) x + (D - S) t = 0  =>  t = (D + S) x / (S (2x - 1) + D)
        Ok((d + s) * x / (s * (two * x - T::one()) + d))
    }

    /// Solves `h(t, x) = 0` for `t` at a given `x` (the reflected hyperbola).
    pub fn h2_curve(&self, x: T) -> Result<T, PhaseError> {
        let (d, s) = self.h_coefficients()?;
        let two = T::one() + T::one();
        // 2 t x S - (D + S) t + (D - S) x = 0  =>  t = (S - D) x / (S (2x - 1) - D)
        Ok((s - d) * x / (s * (two * x - T::one()) - d))
    }

    /// Classifies a slope against the lens region bounded by the hyperbolas.
    ///
    /// The tolerance is rescaled by the largest coefficient magnitude of the
    /// hyperbola function, since `h` itself is not normalized. Ties between
    /// the two boundary branches resolve to `BoundaryH1`.
    pub fn classify_slope(&self, st: &SlopePair<T>, tol: T) -> Result<SlopeClass, PhaseError> {
        if tol <= T::zero() {
            return Err(PhaseError::InvalidParameter("tol must be > 0"));
        }
        let (d, s) = self.h_coefficients()?;
        let two = T::one() + T::one();
        let scale = T::one()
            .max((two * s).abs())
            .max((d + s).abs())
            .max((d - s).abs());
        let near = |v: T, target: T| (v - target).abs() <= tol;
        if near(st.s, T::zero()) || near(st.s, T::one()) || near(st.t, T::zero()) || near(st.t, T::one()) {
            return Ok(SlopeClass::FrozenBoundary);
        }
        let band = tol * scale;
        let h1 = self.h_value(st.s, st.t)?;
        let h2 = self.h_value(st.t, st.s)?;
        if h1.abs() <= band {
            Ok(SlopeClass::BoundaryH1)
        } else if h2.abs() <= band {
            Ok(SlopeClass::BoundaryH2)
        } else if h1.max(h2) < -band {
            Ok(SlopeClass::InteriorLens)
        } else {
            Ok(SlopeClass::Exterior)
        }
    }
}

impl<T: Scalar> GaugeParams<T> {
    pub fn new(r: T, x: T, y: T, z: T) -> Result<Self, PhaseError> {
        if r <= T::zero() || x <= T::zero() || y <= T::zero() || z <= T::zero() {
            return Err(PhaseError::InvalidParameter("gauge parameters must be > 0"));
        }
        Ok(GaugeParams { r, x, y, z })
    }

    pub fn identity() -> Self {
        GaugeParams { r: T::one(), x: T::one(), y: T::one(), z: T::one() }
    }
}

impl<T: Scalar> StochasticParams<T> {
    pub fn new(b1: T, b2: T) -> Result<Self, PhaseError> {
        if b1 <= T::zero() || b1 >= T::one() || b2 <= T::zero() || b2 >= T::one() {
            return Err(PhaseError::InvalidParameter("B1, B2 must lie in (0, 1)"));
        }
        Ok(StochasticParams { b1, b2 })
    }

    /// Requires the ferroelectric ordering `B1 < B2`.
    pub fn require_ordered(&self) -> Result<(), PhaseError> {
        if self.b1 < self.b2 {
            Ok(())
        } else {
            Err(PhaseError::InvalidParameter("operation requires B1 < B2"))
        }
    }

    /// `kappa = (1 - B1) / (1 - B2)`; exceeds 1 exactly when `B1 < B2`.
    pub fn kappa(&self) -> T {
        (T::one() - self.b1.clone()) / (T::one() - self.b2.clone())
    }

    /// `phi(z) = kappa z / ((kappa - 1) z + 1)`, the slope curve `t = phi(s)`.
    pub fn phi(&self, z: T) -> T {
        let k = self.kappa();
        k.clone() * z.clone() / ((k - T::one()) * z + T::one())
    }
}

impl<T: Real> StochasticParams<T> {
    /// Projects a slope `0 < s <= t <= phi(s)` along the ray through the
    /// origin onto the curve `t = phi(s)`, returning `(s0, t0)` and the
    /// contraction factor `vartheta = s/s0 = t/t0`.
    pub fn project_to_boundary(
        &self,
        st: &SlopePair<T>,
    ) -> Result<(SlopePair<T>, T), PhaseError> {
        self.require_ordered()?;
        let eps: T = NumCast::from(1e-12).unwrap();
        let out_of_range = || PhaseError::SlopeOutOfRange {
            s: st.s.to_f64().unwrap_or(f64::NAN),
            t: st.t.to_f64().unwrap_or(f64::NAN),
        };
        if st.s <= T::zero() || st.t < st.s - eps || st.t > self.phi(st.s) + eps {
            return Err(out_of_range());
        }
        let k = self.kappa();
        let num = k * st.s - st.t;
        if num <= T::zero() {
            return Err(out_of_range());
        }
        let s0 = num / ((k - T::one()) * st.t);
        let t0 = num / ((k - T::one()) * st.s);
        let vartheta = (k - T::one()) * st.s * st.t / num;
        Ok((SlopePair { s: s0.min(T::one()), t: t0.min(T::one()) }, vartheta.min(T::one())))
    }
}

impl<T: Real> SlopePair<T> {
    pub fn new(s: T, t: T) -> Result<Self, PhaseError> {
        if s < T::zero() || s > T::one() || t < T::zero() || t > T::one() {
            return Err(PhaseError::InvalidParameter("slope components must lie in [0, 1]"));
        }
        Ok(SlopePair { s, t })
    }
}

/// The derived parameter bundle of the sparsification argument.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule<T> {
    pub delta: T,
    pub eta: T,
    pub r: u64,
    pub s0: T,
    pub t0: T,
    pub vartheta: T,
    pub k: u64,
    pub l: u64,
    pub w: u64,
    pub m: u64,
    pub n: u64,
}

/// Computes `eta = s t B1 B2 (1-B1)(1-B2) delta / 650`, `R = floor(eta N / 3)`,
/// `K = floor(s0^2 t0^2 eta R / 16)`, `L = ceil(vartheta K)`,
/// `W = ceil(60 (1/s + 1/t) eta N)` and `M = ceil((N - 2W) / K)`.
pub fn derive_schedule<T: Real>(
    p: &StochasticParams<T>,
    st: &SlopePair<T>,
    delta: T,
    n: u64,
) -> Result<Schedule<T>, PhaseError> {
    if delta <= T::zero() || delta >= T::one() {
        return Err(PhaseError::InvalidParameter("delta must lie in (0, 1)"));
    }
    if n == 0 {
        return Err(PhaseError::InvalidParameter("N must be >= 1"));
    }
    let (st0, vartheta) = p.project_to_boundary(st)?;
    let one = T::one();
    let nf: T = NumCast::from(n).unwrap();
    let eta = st.s * st.t * p.b1 * p.b2 * (one - p.b1) * (one - p.b2) * delta
        / NumCast::from(650).unwrap();
    let r = (eta * nf / NumCast::from(3).unwrap()).floor();
    if r <= T::zero() {
        return Err(PhaseError::DegenerateSchedule("R"));
    }
    let k = (st0.s * st0.s * st0.t * st0.t * eta * r / NumCast::from(16).unwrap()).floor();
    if k <= T::zero() {
        return Err(PhaseError::DegenerateSchedule("K"));
    }
    let l = (vartheta * k).ceil();
    let sixty: T = NumCast::from(60).unwrap();
    let w = (sixty * (one / st.s + one / st.t) * eta * nf).ceil();
    let w_u: u64 = NumCast::from(w).unwrap();
    if n <= 2 * w_u {
        return Err(PhaseError::DegenerateSchedule("M"));
    }
    let k_u: u64 = NumCast::from(k).unwrap();
    let m = (n - 2 * w_u).div_ceil(k_u);
    Ok(Schedule {
        delta,
        eta,
        r: NumCast::from(r).unwrap(),
        s0: st0.s,
        t0: st0.t,
        vartheta,
        k: k_u,
        l: NumCast::from(l).unwrap(),
        w: w_u,
        m,
        n,
    })
}
