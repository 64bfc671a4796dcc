//! Seeded Markovian sampling of the (B1, B2)-stochastic six-vertex model on
//! rectangles, double-sided Bernoulli entrance data and mu(rho) windows, and
//! the explicit couplings used by the sparsification argument.
//!
//! Per-vertex randomness is a counter-based function of `(seed, x, y)`, so a
//! sample is a pure function of its spec: sweeps may run in any dependency-
//! respecting order and couplings can share or split randomness per vertex.

use crate::exact::Entrance;
use crate::lattice::{ArrowConfig, Ensemble, Rect};
use crate::restrict::{restrict_ensemble, RestrictionParams};
use crate::rng::{vertex_unit, Stream};
use crate::weights::{PhaseError, StochasticParams};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SamplerError {
    #[error("coupled specs must share domain, parameters and seed")]
    SpecMismatch,
    #[error("Bernoulli densities must lie in [0, 1], got ({0}, {1})")]
    BadDensity(f64, f64),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Exact(#[from] crate::exact::ExactError),
    #[error(transparent)]
    Restrict(#[from] crate::restrict::RestrictError),
}

/// How paths enter the domain.
#[derive(Debug, Clone, PartialEq)]
pub enum EntranceKind {
    /// Fixed entrance sites on the south and west boundaries.
    Explicit(Entrance),
    /// Independent entrances: west sites with density `rho1` (horizontal
    /// arrows), south sites with density `rho2` (vertical arrows).
    DoubleSidedBernoulli { rho1: f64, rho2: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerSpec {
    pub params: StochasticParams<f64>,
    pub domain: Rect,
    pub entrance: EntranceKind,
    pub seed: u64,
}

#[inline]
fn complete(i1: bool, j1: bool, b1: f64, b2: f64, u: f64) -> (bool, bool) {
    match (i1, j1) {
        (false, false) => (false, false),
        (true, true) => (true, true),
        (true, false) => {
            if u < b1 {
                (true, false)
            } else {
                (false, true)
            }
        }
        (false, true) => {
            if u < b2 {
                (false, true)
            } else {
                (true, false)
            }
        }
    }
}

/// Resolved entrance occupancy along the south and west boundaries.
fn resolve_entrance(spec: &SamplerSpec) -> Result<(Vec<bool>, Vec<bool>), SamplerError> {
    let d = spec.domain;
    let mut south = vec![false; d.width() as usize];
    let mut west = vec![false; d.height() as usize];
    match &spec.entrance {
        EntranceKind::Explicit(entrance) => {
            entrance.validate(d)?;
            for &x in &entrance.south {
                south[(x - d.x_min) as usize] = true;
            }
            for &y in &entrance.west {
                west[(y - d.y_min) as usize] = true;
            }
        }
        EntranceKind::DoubleSidedBernoulli { rho1, rho2 } => {
            if !(0.0..=1.0).contains(rho1) || !(0.0..=1.0).contains(rho2) {
                return Err(SamplerError::BadDensity(*rho1, *rho2));
            }
            for (k, s) in south.iter_mut().enumerate() {
                let x = d.x_min + k as i64;
                *s = vertex_unit(spec.seed, x, d.y_min - 1, Stream::Primary) < *rho2;
            }
            for (k, w) in west.iter_mut().enumerate() {
                let y = d.y_min + k as i64;
                *w = vertex_unit(spec.seed, d.x_min - 1, y, Stream::Primary) < *rho1;
            }
        }
    }
    Ok((south, west))
}

/// Draws one ensemble: each vertex's half-configuration is completed with the
/// stochastic weights, the per-vertex uniform being a pure function of
/// `(seed, x, y)`. Exit data is free.
pub fn sample(spec: &SamplerSpec) -> Result<Ensemble, SamplerError> {
    let d = spec.domain;
    let (south, west) = resolve_entrance(spec)?;
    let (b1, b2) = (spec.params.b1, spec.params.b2);
    let mut e = Ensemble::empty(d);
    let mut vin = south;
    for y in d.y_min..=d.y_max {
        let mut hin = west[(y - d.y_min) as usize];
        for x in d.x_min..=d.x_max {
            let xi = (x - d.x_min) as usize;
            let (i1, j1) = (vin[xi], hin);
            let (i2, j2) = if i1 != j1 {
                complete(i1, j1, b1, b2, vertex_unit(spec.seed, x, y, Stream::Primary))
            } else {
                (i1, j1)
            };
            e.set(x, y, ArrowConfig::from_bits(i1, j1, i2, j2));
            vin[xi] = i2;
            hin = j2;
        }
    }
    Ok(e)
}

/// Exact finite-window sample of the translation-invariant measure of
/// vertical density `rho`: the window restriction coincides in law with the
/// quadrant model with double-sided `(phi(rho), rho)`-Bernoulli entrance
/// data, whose dependency cone collapses onto the window itself because its
/// incoming edge indicators are independent Bernoulli fields.
pub fn sample_mu_window(
    params: &StochasticParams<f64>,
    rho: f64,
    window: Rect,
    seed: u64,
) -> Result<Ensemble, SamplerError> {
    params.require_ordered()?;
    if !(0.0..=1.0).contains(&rho) {
        return Err(SamplerError::BadDensity(rho, rho));
    }
    let spec = SamplerSpec {
        params: *params,
        domain: window,
        entrance: EntranceKind::DoubleSidedBernoulli { rho1: params.phi(rho), rho2: rho },
        seed,
    };
    sample(&spec)
}

/// Per-vertex agreement between two ensembles on a common domain.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementMask {
    domain: Rect,
    bits: Vec<bool>,
}

impl AgreementMask {
    fn of(a: &Ensemble, b: &Ensemble) -> Self {
        let domain = a.domain();
        let bits = domain.vertices().map(|(x, y)| a.get(x, y) == b.get(x, y)).collect();
        AgreementMask { domain, bits }
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn get(&self, x: i64, y: i64) -> bool {
        self.bits[((y - self.domain.y_min) * self.domain.width() + (x - self.domain.x_min)) as usize]
    }

    pub fn all(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    pub fn disagree_count_in(&self, window: Rect) -> usize {
        window.vertices().filter(|&(x, y)| !self.get(x, y)).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPair {
    pub primary: Ensemble,
    pub secondary: Ensemble,
    pub agreement: AgreementMask,
}

/// The grand coupling: both specs are driven by the same per-vertex uniforms,
/// so each marginal is bit-identical to its single-run sample and any vertex
/// with equal incoming data completes identically.
pub fn couple_grand(a: &SamplerSpec, b: &SamplerSpec) -> Result<CoupledPair, SamplerError> {
    if a.domain != b.domain || a.params != b.params || a.seed != b.seed {
        return Err(SamplerError::SpecMismatch);
    }
    let primary = sample(a)?;
    let secondary = sample(b)?;
    let agreement = AgreementMask::of(&primary, &secondary);
    Ok(CoupledPair { primary, secondary, agreement })
}

/// Diagnostics of the restriction coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouplingReport {
    /// Crossings of adjacent kept/removed path pairs that were checked.
    pub crossings_checked: usize,
    /// Whether every crossing resolved the kept path the way the restriction
    /// demands (the conjunction of the per-vertex events).
    pub upsilon_held: bool,
    /// On the event above, whether the secondary ensemble equals the
    /// restriction of the primary (must always hold when `upsilon_held`).
    pub restriction_agrees: Option<bool>,
}

/// Couples the model with entrance `u` to the model with the restricted
/// entrance: at vertices untouched by removed paths both runs share one
/// uniform (identical completions whenever their incoming data agree);
/// at vertices on a removed path the secondary draws fresh randomness.
pub fn couple_restriction(
    params: &StochasticParams<f64>,
    domain: Rect,
    entrance: &Entrance,
    rp: &RestrictionParams,
    seed: u64,
) -> Result<(CoupledPair, CouplingReport), SamplerError> {
    entrance.validate(domain)?;
    let d = domain;
    let (b1, b2) = (params.b1, params.b2);
    let w = d.width() as usize;

    // incoming vertical edges of the primary carry path indices
    let mut vin_idx: Vec<Option<i64>> = vec![None; w];
    let mut west_idx: Vec<Option<i64>> = vec![None; d.height() as usize];
    for (index, site) in entrance.indexed() {
        match site {
            crate::exact::EntranceSite::South(x) => vin_idx[(x - d.x_min) as usize] = Some(index),
            crate::exact::EntranceSite::West(y) => west_idx[(y - d.y_min) as usize] = Some(index),
        }
    }
    let mut s_vin: Vec<bool> =
        vin_idx.iter().map(|i| i.map_or(false, |i| rp.keeps(i))).collect();

    let mut primary = Ensemble::empty(d);
    let mut secondary = Ensemble::empty(d);
    let mut crossings_checked = 0usize;
    let mut upsilon_held = true;

    for y in d.y_min..=d.y_max {
        let mut hin_idx = west_idx[(y - d.y_min) as usize];
        let mut s_hin = hin_idx.map_or(false, |i| rp.keeps(i));
        for x in d.x_min..=d.x_max {
            let xi = (x - d.x_min) as usize;
            let (i1, j1) = (vin_idx[xi].is_some(), hin_idx.is_some());
            let u0 = vertex_unit(seed, x, y, Stream::Primary);
            let (i2, j2) = complete(i1, j1, b1, b2, u0);
            primary.set(x, y, ArrowConfig::from_bits(i1, j1, i2, j2));

            let on_removed = vin_idx[xi].is_some_and(|i| !rp.keeps(i))
                || hin_idx.is_some_and(|i| !rp.keeps(i));

            let (si1, sj1) = (s_vin[xi], s_hin);
            let us = if on_removed { vertex_unit(seed, x, y, Stream::Secondary) } else { u0 };
            let (si2, sj2) = complete(si1, sj1, b1, b2, us);
            secondary.set(x, y, ArrowConfig::from_bits(si1, sj1, si2, sj2));

            // crossing vertices of the primary host two paths with adjacent
            // indices: the south-entering one below the west-entering one
            if let (Some(lo), Some(hi)) = (vin_idx[xi], hin_idx) {
                debug_assert_eq!(hi, lo + 1, "paths crossing at a vertex must be adjacent");
                match (rp.keeps(lo), rp.keeps(hi)) {
                    (true, false) => {
                        // kept south path must keep exiting east without its
                        // removed upper neighbor: j2' >= i1'
                        crossings_checked += 1;
                        upsilon_held &= sj2 as u8 >= si1 as u8;
                    }
                    (false, true) => {
                        // kept west path must keep exiting north: i2' >= j1'
                        crossings_checked += 1;
                        upsilon_held &= si2 as u8 >= sj1 as u8;
                    }
                    _ => {}
                }
            }

            // path-index propagation; at crossings the south path turns east
            // and the west path turns north (corner-avoiding resolution)
            let (next_v, next_h) = match (vin_idx[xi], hin_idx, i2, j2) {
                (Some(v), Some(h), _, _) => (Some(h), Some(v)),
                (Some(v), None, true, false) => (Some(v), None),
                (Some(v), None, false, true) => (None, Some(v)),
                (None, Some(h), false, true) => (None, Some(h)),
                (None, Some(h), true, false) => (Some(h), None),
                (None, None, _, _) => (None, None),
                _ => unreachable!("completion preserved arrow conservation"),
            };
            vin_idx[xi] = next_v;
            hin_idx = next_h;
            s_vin[xi] = si2;
            s_hin = sj2;
        }
    }

    let restriction_agrees = if upsilon_held {
        Some(restrict_ensemble(&primary, rp)? == secondary)
    } else {
        None
    };
    let agreement = AgreementMask::of(&primary, &secondary);
    Ok((
        CoupledPair { primary, secondary, agreement },
        CouplingReport { crossings_checked, upsilon_held, restriction_agrees },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{free_exit_distribution, Caps};
    use crate::lattice::boundary_of;
    use crate::regularity::slope_estimate;

    fn params(b1: f64, b2: f64) -> StochasticParams<f64> {
        StochasticParams::new(b1, b2).unwrap()
    }

    #[test]
    fn reproducible_bit_for_bit() {
        let spec = SamplerSpec {
            params: params(0.2, 0.8),
            domain: Rect::of_size(40, 40),
            entrance: EntranceKind::DoubleSidedBernoulli { rho1: 0.8, rho2: 0.5 },
            seed: 99,
        };
        assert_eq!(sample(&spec).unwrap(), sample(&spec).unwrap());
        let other_seed = SamplerSpec { seed: 100, ..spec.clone() };
        assert_ne!(sample(&spec).unwrap(), sample(&other_seed).unwrap());
    }

    #[test]
    fn outputs_validate_and_match_entrance() {
        let entrance = Entrance { south: vec![2, 5, 11], west: vec![1, 7] };
        let spec = SamplerSpec {
            params: params(0.3, 0.6),
            domain: Rect::of_size(12, 9),
            entrance: EntranceKind::Explicit(entrance.clone()),
            seed: 1,
        };
        let e = sample(&spec).unwrap();
        assert!(e.validate().is_empty());
        let bd = boundary_of(&e).unwrap();
        let mut snorth: Vec<i64> = bd
            .entrance
            .iter()
            .filter_map(|&(x, y)| (y == 0).then_some(x))
            .collect();
        snorth.sort_unstable();
        assert_eq!(snorth, entrance.south);
        assert_eq!(bd.entrance.len(), 5);
        assert_eq!(bd.exit.len(), 5);
    }

    #[test]
    fn near_degenerate_weights_give_straight_or_staircase_paths() {
        // B1 = B2 ~ 1: straight rays; B1 = B2 ~ 0: a staircase that turns at
        // every vertex. Fixed seeds make these deterministic.
        let d = Rect::of_size(20, 20);
        let straight = sample(&SamplerSpec {
            params: params(1.0 - 1e-12, 1.0 - 1e-12),
            domain: d,
            entrance: EntranceKind::Explicit(Entrance { south: vec![3, 7], west: vec![5] }),
            seed: 5,
        })
        .unwrap();
        for y in 1..=20 {
            assert_eq!(straight.chi_v(3, y).unwrap(), 1);
            assert_eq!(straight.chi_v(7, y).unwrap(), 1);
            assert_eq!(straight.chi_h(5, 5).unwrap(), 1);
        }
        let stair = sample(&SamplerSpec {
            params: params(1e-12, 1e-12),
            domain: d,
            entrance: EntranceKind::Explicit(Entrance { south: vec![1], west: vec![] }),
            seed: 5,
        })
        .unwrap();
        // the path hugs the diagonal: east then north at every vertex
        for k in 0..20 {
            assert_eq!(stair.get(1 + k, 1 + k).code(), Some(4)); // turn east
            if k < 19 {
                assert_eq!(stair.get(2 + k, 1 + k).code(), Some(5)); // turn north
            }
        }
    }

    #[test]
    fn empirical_law_approaches_exact_law() {
        let p = params(0.2, 0.8);
        let domain = Rect::of_size(3, 3);
        let entrance = Entrance { south: vec![1, 3], west: vec![] };
        let exact = free_exit_distribution(domain, &p, &entrance, &Caps::default()).unwrap();
        let mut counts: std::collections::HashMap<String, usize> = Default::default();
        let reps = 20_000u64;
        for rep in 0..reps {
            let spec = SamplerSpec {
                params: p,
                domain,
                entrance: EntranceKind::Explicit(entrance.clone()),
                seed: crate::rng::replica_seed(7, rep),
            };
            let e = sample(&spec).unwrap();
            *counts.entry(e.to_text().unwrap()).or_default() += 1;
        }
        let mut tv = 0.0;
        for (e, pr) in &exact.items {
            let emp = counts.get(&e.to_text().unwrap()).copied().unwrap_or(0) as f64 / reps as f64;
            tv += (pr - emp).abs();
        }
        assert!(tv / 2.0 < 0.02, "TV distance {}", tv / 2.0);
    }

    #[test]
    fn mu_window_slopes_near_expectation() {
        // row/column correlations leave only ~window-width independent
        // samples, so the tolerance is a few sigma of 0.5/sqrt(256)
        let p = params(0.2, 0.8);
        let window = Rect::of_size(256, 256);
        let mut s_acc = 0.0;
        let mut t_acc = 0.0;
        for seed in 0..4 {
            let e = sample_mu_window(&p, 0.5, window, 31 + seed).unwrap();
            let st = slope_estimate(&e, window).unwrap();
            s_acc += st.s;
            t_acc += st.t;
        }
        let (s, t) = (s_acc / 4.0, t_acc / 4.0);
        assert!((s - 0.5).abs() < 0.03, "vertical density {s}");
        assert!((t - 0.8).abs() < 0.03, "horizontal density {t}");
        // rho = 0 gives the empty ensemble, rho = 1 the fully packed one
        let empty = sample_mu_window(&p, 0.0, window, 31).unwrap();
        assert_eq!(empty, Ensemble::empty(window));
        let packed = sample_mu_window(&p, 1.0, window, 31).unwrap();
        let st = slope_estimate(&packed, window).unwrap();
        assert_eq!((st.s, st.t), (1.0, 1.0));
    }

    #[test]
    fn mu_window_requires_ordered_params() {
        assert!(sample_mu_window(&params(0.8, 0.2), 0.5, Rect::of_size(4, 4), 0).is_err());
    }

    #[test]
    fn mu_window_law_is_exactly_translation_invariant() {
        // exact rational oracle: averaging the conditional exit-indicator
        // probabilities over the Bernoulli entrance masks must reproduce the
        // entrance densities at every vertex, exactly
        use num::{BigRational, One, Zero};
        let ratio = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let p = StochasticParams::new(ratio(1, 5), ratio(4, 5)).unwrap();
        let rho = ratio(1, 2);
        let rho1 = p.phi(rho.clone()); // 4/5
        assert_eq!(rho1, ratio(4, 5));
        for n in [1i64, 2] {
            let domain = Rect::of_size(n, n);
            let caps = crate::exact::Caps::default();
            let mut pv = BigRational::zero();
            let mut ph = BigRational::zero();
            let mut pjoint = BigRational::zero();
            for mask in 0u32..(1 << (2 * n)) {
                let south: Vec<i64> = (1..=n).filter(|x| mask >> (x - 1) & 1 == 1).collect();
                let west: Vec<i64> = (1..=n).filter(|y| mask >> (n + y - 1) & 1 == 1).collect();
                let mut weight = BigRational::one();
                for x in 1..=n {
                    let occ = south.contains(&x);
                    weight *= if occ { rho.clone() } else { BigRational::one() - rho.clone() };
                }
                for y in 1..=n {
                    let occ = west.contains(&y);
                    weight *=
                        if occ { rho1.clone() } else { BigRational::one() - rho1.clone() };
                }
                let entrance = Entrance { south, west };
                let cv = crate::exact::exact_event_probability(domain, &p, &entrance, &caps, |e| {
                    e.chi_v(n, n).unwrap() == 1
                })
                .unwrap();
                let ch = crate::exact::exact_event_probability(domain, &p, &entrance, &caps, |e| {
                    e.chi_h(n, n).unwrap() == 1
                })
                .unwrap();
                pv += weight.clone() * cv;
                ph += weight.clone() * ch;
                if n == 2 {
                    // adjacent exit indicators on the top row are independent
                    let joint =
                        crate::exact::exact_event_probability(domain, &p, &entrance, &caps, |e| {
                            e.chi_v(1, 2).unwrap() == 1 && e.chi_v(2, 2).unwrap() == 1
                        })
                        .unwrap();
                    pjoint += weight * joint;
                }
            }
            assert_eq!(pv, ratio(1, 2), "chi_v mean at ({n},{n})");
            assert_eq!(ph, ratio(4, 5), "chi_h mean at ({n},{n})");
            if n == 2 {
                assert_eq!(pjoint, ratio(1, 4), "adjacent chi_v independence");
            }
        }
    }

    #[test]
    fn grand_coupling_marginals_and_total_agreement() {
        let base = SamplerSpec {
            params: params(0.3, 0.7),
            domain: Rect::of_size(16, 16),
            entrance: EntranceKind::Explicit(Entrance { south: vec![2, 9], west: vec![4] }),
            seed: 77,
        };
        let pair = couple_grand(&base, &base).unwrap();
        assert!(pair.agreement.all());
        assert_eq!(pair.primary, sample(&base).unwrap());
        let differing = SamplerSpec {
            entrance: EntranceKind::Explicit(Entrance { south: vec![2], west: vec![4] }),
            ..base.clone()
        };
        let pair = couple_grand(&base, &differing).unwrap();
        assert_eq!(pair.secondary, sample(&differing).unwrap());
        assert!(!pair.agreement.all());
        let mismatched = SamplerSpec { seed: 78, ..differing };
        assert_eq!(couple_grand(&base, &mismatched).unwrap_err(), SamplerError::SpecMismatch);
    }

    #[test]
    fn grand_coupling_local_discrepancy_decays() {
        // entrance data differing only far to the west: agreement above a
        // distant interval improves with separation
        let p = params(0.2, 0.8);
        let d = Rect::of_size(96, 24);
        let mut close = 0usize;
        let mut far = 0usize;
        for seedling in 0..60u64 {
            let seed = crate::rng::replica_seed(1234, seedling);
            let all: Vec<i64> = (1..=20).collect();
            let a = SamplerSpec {
                params: p,
                domain: d,
                entrance: EntranceKind::Explicit(Entrance { south: all.clone(), west: vec![] }),
                seed,
            };
            let b = SamplerSpec {
                params: p,
                domain: d,
                entrance: EntranceKind::Explicit(Entrance { south: vec![], west: vec![] }),
                seed,
            };
            let pair = couple_grand(&a, &b).unwrap();
            close += pair.agreement.disagree_count_in(Rect::new(30, 40, 1, 24));
            far += pair.agreement.disagree_count_in(Rect::new(80, 90, 1, 24));
        }
        assert!(far < close, "far window disagreement {far} should be below near {close}");
    }

    #[test]
    fn restriction_coupling_degenerate_params() {
        let p = params(0.3, 0.6);
        let d = Rect::of_size(10, 10);
        let entrance = Entrance { south: vec![2, 4, 7], west: vec![3, 8] };
        let identity = RestrictionParams::new(2, 2).unwrap();
        let (pair, report) = couple_restriction(&p, d, &entrance, &identity, 3).unwrap();
        assert_eq!(pair.primary, pair.secondary);
        assert!(pair.agreement.all());
        assert!(report.upsilon_held);
        assert_eq!(report.restriction_agrees, Some(true));
        let nothing = RestrictionParams::new(0, 2).unwrap();
        let (pair, report) = couple_restriction(&p, d, &entrance, &nothing, 3).unwrap();
        assert_eq!(pair.secondary, Ensemble::empty(d));
        assert_eq!(report.restriction_agrees, Some(true));
    }

    #[test]
    fn restriction_coupling_marginal_matches_plain_sample() {
        let p = params(0.25, 0.65);
        let d = Rect::of_size(14, 11);
        let entrance = Entrance { south: vec![1, 4, 6, 9, 13], west: vec![2, 5, 10] };
        let rp = RestrictionParams::new(1, 2).unwrap();
        for seed in [0u64, 9, 1234] {
            let (pair, _) = couple_restriction(&p, d, &entrance, &rp, seed).unwrap();
            let direct = sample(&SamplerSpec {
                params: p,
                domain: d,
                entrance: EntranceKind::Explicit(entrance.clone()),
                seed,
            })
            .unwrap();
            assert_eq!(pair.primary, direct);
            assert!(pair.primary.validate().is_empty());
            assert!(pair.secondary.validate().is_empty());
        }
    }

    #[test]
    fn restriction_coupling_agrees_with_restriction_on_upsilon() {
        // small domain and gentle weights so the joint event has real mass
        let p = params(0.1, 0.2);
        let d = Rect::of_size(6, 6);
        let entrance = Entrance { south: vec![2, 5], west: vec![3] };
        let rp = RestrictionParams::new(1, 2).unwrap();
        let mut held = 0;
        for seed in 0..300u64 {
            let (_, report) = couple_restriction(&p, d, &entrance, &rp, seed).unwrap();
            if report.upsilon_held {
                held += 1;
                assert_eq!(report.restriction_agrees, Some(true), "seed {seed}");
            }
        }
        assert!(held > 0, "the coupling event should sometimes hold");
    }

    #[test]
    fn secondary_entrance_is_the_restriction() {
        let p = params(0.3, 0.6);
        let d = Rect::of_size(10, 10);
        let entrance = Entrance { south: vec![2, 4, 7], west: vec![3, 8] };
        let rp = RestrictionParams::new(1, 2).unwrap();
        let (pair, _) = couple_restriction(&p, d, &entrance, &rp, 42).unwrap();
        let bd = boundary_of(&pair.secondary).unwrap();
        // indices: south (7,4,2) -> (-2,-1,0), west (3,8) -> (1,2);
        // kept i = 1 mod 2: {-1, 1} -> south x=4, west y=3
        let mut got = bd.entrance.clone();
        got.sort_unstable();
        assert_eq!(got, vec![(0, 3), (4, 0)]);
    }
}
