//! (L; K)-restriction: sparsify boundary data and ensembles by keeping the
//! paths whose indices are congruent to 1..L modulo K, plus the checkable
//! regularity-transport bound for restricted boundary data.

use crate::lattice::{from_paths, to_paths, BoundaryData, Ensemble, LatticeError};
use crate::regularity::{regular_interval_scan, RectWitness, Side};
use crate::weights::SlopePair;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RestrictError {
    #[error("restriction parameters need K >= 1 and 0 <= L <= K, got L={0}, K={1}")]
    BadRestrictionParams(u64, u64),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// `(L; K)` with `K >= 1` and `0 <= L <= K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RestrictionParams {
    pub l: u64,
    pub k: u64,
}

impl RestrictionParams {
    pub fn new(l: u64, k: u64) -> Result<Self, RestrictError> {
        if k == 0 || l > k {
            return Err(RestrictError::BadRestrictionParams(l, k));
        }
        Ok(RestrictionParams { l, k })
    }

    /// Whether path index `i` is kept: `i = mK + r` for some integer `m` and
    /// `r` in `[1, L]`. Floored division keeps the rule exact for negative
    /// indices.
    pub fn keeps(&self, i: i64) -> bool {
        (i - 1).rem_euclid(self.k as i64) < self.l as i64
    }

    /// Ratio `L / K`, the slope contraction factor of the restriction.
    pub fn vartheta(&self) -> f64 {
        self.l as f64 / self.k as f64
    }
}

/// Keeps exactly the entrance/exit pairs with kept indices, re-indexed to the
/// boundary convention.
pub fn restrict_boundary(bd: &BoundaryData, p: &RestrictionParams) -> BoundaryData {
    let mut entrance = Vec::new();
    let mut exit = Vec::new();
    let mut south = 0i64;
    for i in bd.indices() {
        if p.keeps(i) {
            let u = bd.entrance_at(i);
            entrance.push(u);
            exit.push(bd.exit_at(i));
            if i <= 0 {
                south += 1;
            }
        }
    }
    let b = south - 1;
    let a = entrance.len() as i64 - south;
    BoundaryData { entrance, exit, a, b }
}

/// The kept original indices of a boundary datum, in increasing order.
pub fn kept_indices(bd: &BoundaryData, p: &RestrictionParams) -> Vec<i64> {
    bd.indices().filter(|&i| p.keeps(i)).collect()
}

/// Sparsifies an ensemble by keeping the paths with kept indices.
pub fn restrict_ensemble(e: &Ensemble, p: &RestrictionParams) -> Result<Ensemble, RestrictError> {
    let paths = to_paths(e)?;
    let mut kept = Vec::new();
    let mut south = 0i64;
    for (pos, path) in paths.paths.iter().enumerate() {
        let i = paths.index_of(pos);
        if p.keeps(i) {
            kept.push(path.clone());
            if i <= 0 {
                south += 1;
            }
        }
    }
    let restricted = crate::lattice::PathEnsemble { paths: kept, b: south - 1 };
    Ok(from_paths(&restricted, e.domain())?)
}

/// Report of the regularity-transport check for a restricted boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictionRegularityReport {
    /// Derived target slope `(s, t) = (L/K) (s0, t0)`.
    pub slope: SlopePair<f64>,
    /// Derived scan length `2K / (s0 t0 omega)`.
    pub r_out: f64,
    /// Derived tolerance `4 (eta + omega) / (s0 t0)`.
    pub eta_out: f64,
    /// Whether the input data was `(R; eta)`-regular with slope `(s0, t0)`.
    pub input_regular: bool,
    pub input_witness: Option<RectWitness>,
    /// Whether the restricted data passed the transported regularity check.
    pub restricted_regular: bool,
    pub restricted_witness: Option<RectWitness>,
}

/// Verifies, by exhaustive interval scan, that the `(L; K)`-restriction of
/// `(R; eta)`-regular slope-`(s0, t0)` data is
/// `(2K/(s0 t0 omega); 4(eta + omega)/(s0 t0))`-regular with slope
/// `(L/K)(s0, t0)`. A verifier for given finite data, not a prover.
#[allow(clippy::too_many_arguments)]
pub fn check_restriction_regularity(
    bd: &BoundaryData,
    domain: crate::lattice::Rect,
    p: &RestrictionParams,
    s0: f64,
    t0: f64,
    eta: f64,
    omega: f64,
    r: u64,
) -> Result<RestrictionRegularityReport, RestrictError> {
    if !(s0 > 0.0 && s0 <= 1.0 && t0 > 0.0 && t0 <= 1.0) {
        return Err(RestrictError::PreconditionViolated(format!(
            "(s0, t0) = ({s0}, {t0}) outside (0, 1]^2"
        )));
    }
    if eta >= s0 * t0 / 4.0 {
        return Err(RestrictError::PreconditionViolated(format!(
            "eta = {eta} must be below s0 t0 / 4 = {}",
            s0 * t0 / 4.0
        )));
    }
    if omega <= 0.0 {
        return Err(RestrictError::PreconditionViolated("omega must be > 0".into()));
    }
    if r > p.l {
        return Err(RestrictError::PreconditionViolated(format!(
            "R = {r} must not exceed L = {}",
            p.l
        )));
    }
    let vartheta = p.vartheta();
    let slope = SlopePair { s: vartheta * s0, t: vartheta * t0 };
    let r_out = 2.0 * p.k as f64 / (s0 * t0 * omega);
    let eta_out = 4.0 * (eta + omega) / (s0 * t0);

    let (input_regular, input_witness) =
        crate::regularity::is_regular_rect(bd, domain, r as f64, eta, &SlopePair { s: s0, t: t0 });
    let restricted = restrict_boundary(bd, p);
    let (restricted_regular, restricted_witness) =
        scan_rect(&restricted, domain, r_out, eta_out, &slope);
    Ok(RestrictionRegularityReport {
        slope,
        r_out,
        eta_out,
        input_regular,
        input_witness,
        restricted_regular,
        restricted_witness,
    })
}

// is_regular_rect with a fractional scan length: deviation bound is
// eta_out * r_out, interval lengths capped at floor(r_out).
fn scan_rect(
    bd: &BoundaryData,
    domain: crate::lattice::Rect,
    r: f64,
    eta: f64,
    st: &SlopePair<f64>,
) -> (bool, Option<RectWitness>) {
    let sides: [(Side, Box<dyn Fn(&(i64, i64)) -> Option<i64>>, &[(i64, i64)], (i64, i64), f64); 4] = [
        (
            Side::South,
            Box::new(move |&(x, y)| (y == domain.y_min - 1).then_some(x)),
            &bd.entrance,
            (domain.x_min, domain.x_max),
            st.s,
        ),
        (
            Side::North,
            Box::new(move |&(x, y)| (y == domain.y_max + 1).then_some(x)),
            &bd.exit,
            (domain.x_min, domain.x_max),
            st.s,
        ),
        (
            Side::West,
            Box::new(move |&(x, y)| (x == domain.x_min - 1).then_some(y)),
            &bd.entrance,
            (domain.y_min, domain.y_max),
            st.t,
        ),
        (
            Side::East,
            Box::new(move |&(x, y)| (x == domain.x_max + 1).then_some(y)),
            &bd.exit,
            (domain.y_min, domain.y_max),
            st.t,
        ),
    ];
    for (side, pick, from, j, rho) in sides {
        let mut occ: Vec<i64> = from.iter().filter_map(|v| pick(v)).collect();
        occ.sort_unstable();
        if let Some(interval) = regular_interval_scan(&occ, j, r, eta, rho) {
            return (false, Some(RectWitness { side, interval }));
        }
    }
    (true, None)
}

/// The index sets of the restriction coupling for entrance indices in
/// `[-B, A]`: `I` = kept indices, `R` = kept indices whose successor was
/// removed, `S` = kept indices whose predecessor was removed.
pub fn coupling_index_sets(
    a: i64,
    b: i64,
    p: &RestrictionParams,
) -> (Vec<i64>, Vec<i64>, Vec<i64>) {
    let kept: Vec<i64> = (-b..=a).filter(|&i| p.keeps(i)).collect();
    let upper: Vec<i64> = (-b..=a)
        .filter(|&i| p.keeps(i) && !p.keeps(i + 1))
        .collect();
    let lower: Vec<i64> = (-b..=a)
        .filter(|&i| p.keeps(i) && !p.keeps(i - 1))
        .collect();
    (kept, upper, lower)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{boundary_of, PathEnsemble, Rect};

    #[test]
    fn kept_index_rule_handles_negatives() {
        let p = RestrictionParams::new(2, 3).unwrap();
        let kept: Vec<i64> = (-3..=4).filter(|&i| p.keeps(i)).collect();
        assert_eq!(kept, vec![-2, -1, 1, 2, 4]);
        let full = RestrictionParams::new(3, 3).unwrap();
        assert!((-10..=10).all(|i| full.keeps(i)));
        let none = RestrictionParams::new(0, 3).unwrap();
        assert!(!(-10..=10).any(|i| none.keeps(i)));
    }

    #[test]
    fn coupling_sets_match_worked_example() {
        // (A, B) = (4, 3), (L, K) = (2, 3)
        let p = RestrictionParams::new(2, 3).unwrap();
        let (kept, upper, lower) = coupling_index_sets(4, 3, &p);
        assert_eq!(kept, vec![-2, -1, 1, 2, 4]);
        assert_eq!(upper, vec![-1, 2]);
        assert_eq!(lower, vec![-2, 1, 4]);
    }

    fn ladder_ensemble() -> Ensemble {
        // Eight straight vertical paths on a 10x10 grid: (A, B) = (4, 3).
        // South entrances at x = 2, 3, 5, 7 and west entrances at y = 2, 4, 6, 9.
        let d = Rect::of_size(10, 10);
        let mut paths: Vec<Vec<(i64, i64)>> = Vec::new();
        for x in [7i64, 5, 3, 2] {
            paths.push((0..=11).map(|y| (x, y)).collect());
        }
        for y in [2i64, 4, 6, 9] {
            paths.push((0..=11).map(|x| (x, y)).collect());
        }
        from_paths(&PathEnsemble { paths, b: 3 }, d).unwrap()
    }

    #[test]
    fn restrict_boundary_keeps_exactly_the_kept_indices() {
        let e = ladder_ensemble();
        let bd = boundary_of(&e).unwrap();
        assert_eq!((bd.a, bd.b), (4, 3));
        let p = RestrictionParams::new(2, 3).unwrap();
        let rbd = restrict_boundary(&bd, &p);
        assert_eq!(rbd.len(), 5);
        assert_eq!(
            rbd.entrance,
            vec![(5, 0), (3, 0), (0, 2), (0, 4), (0, 9)]
        );
        assert_eq!((rbd.a, rbd.b), (3, 1));
        // identity and empty restrictions
        assert_eq!(restrict_boundary(&bd, &RestrictionParams::new(3, 3).unwrap()), bd);
        assert!(restrict_boundary(&bd, &RestrictionParams::new(0, 3).unwrap()).is_empty());
    }

    #[test]
    fn restrict_ensemble_commutes_with_boundary() {
        let e = ladder_ensemble();
        let p = RestrictionParams::new(2, 3).unwrap();
        let re = restrict_ensemble(&e, &p).unwrap();
        assert!(re.validate().is_empty());
        let lhs = boundary_of(&re).unwrap();
        let rhs = restrict_boundary(&boundary_of(&e).unwrap(), &p);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn restrict_ensemble_identity_and_empty() {
        let e = ladder_ensemble();
        assert_eq!(restrict_ensemble(&e, &RestrictionParams::new(3, 3).unwrap()).unwrap(), e);
        let none = restrict_ensemble(&e, &RestrictionParams::new(0, 3).unwrap()).unwrap();
        assert_eq!(none, Ensemble::empty(e.domain()));
    }

    #[test]
    fn restriction_keeps_a_subset_of_edges() {
        let e = crate::lattice::fixtures::six_by_seven();
        let p = RestrictionParams::new(1, 2).unwrap();
        let re = restrict_ensemble(&e, &p).unwrap();
        for (x, y) in e.domain().vertices() {
            let full = e.get(x, y);
            let sub = re.get(x, y);
            assert!(sub.i2() <= full.i2() && sub.j2() <= full.j2(), "extra arrow at ({x},{y})");
        }
    }

    #[test]
    fn nested_restrictions_only_shrink() {
        let e = ladder_ensemble();
        let bd = boundary_of(&e).unwrap();
        let first = restrict_boundary(&bd, &RestrictionParams::new(2, 3).unwrap());
        let second = restrict_boundary(&first, &RestrictionParams::new(1, 2).unwrap());
        assert!(second.len() <= first.len());
        for u in &second.entrance {
            assert!(first.entrance.contains(u));
        }
    }

    #[test]
    fn path_count_arithmetic() {
        let p = RestrictionParams::new(2, 5).unwrap();
        for (a, b) in [(4i64, 3i64), (9, 0), (0, 6), (12, 12)] {
            let direct = (-b..=a).filter(|&i| p.keeps(i)).count() as i64;
            let mut by_blocks = 0i64;
            let lo = -b;
            let hi = a;
            // sum over m of |[mK+1, mK+L] intersect [-B, A]|
            let m_lo = (lo - p.k as i64).div_euclid(p.k as i64);
            let m_hi = hi.div_euclid(p.k as i64) + 1;
            for m in m_lo..=m_hi {
                let block_lo = m * p.k as i64 + 1;
                let block_hi = m * p.k as i64 + p.l as i64;
                by_blocks += (block_hi.min(hi) - block_lo.max(lo) + 1).max(0);
            }
            assert_eq!(direct, by_blocks, "a={a} b={b}");
        }
    }

    #[test]
    fn regularity_transport_on_periodic_fixture() {
        // exact period-2 boundary at density 1/2 on all four sides
        let d = Rect::of_size(40, 40);
        let evens: Vec<i64> = (1..=40).filter(|v| v % 2 == 0).collect();
        let entrance: Vec<(i64, i64)> = evens
            .iter()
            .map(|&x| (x, 0))
            .chain(evens.iter().map(|&y| (0, y)))
            .collect();
        let exit: Vec<(i64, i64)> = evens
            .iter()
            .map(|&y| (41, y))
            .chain(evens.iter().map(|&x| (x, 41)))
            .collect();
        let bd = BoundaryData::from_sets(d, &entrance, &exit).unwrap();
        let p = RestrictionParams::new(10, 10).unwrap();
        let report =
            check_restriction_regularity(&bd, d, &p, 0.5, 0.5, 0.05, 0.1, 10).unwrap();
        assert!(report.input_regular, "period-2 data is (10; 0.05)-regular");
        assert!(report.restricted_regular);
        assert_eq!(report.slope, SlopePair { s: 0.5, t: 0.5 });
    }

    #[test]
    fn regularity_transport_precondition_errors() {
        let d = Rect::of_size(10, 10);
        let bd = BoundaryData::from_sets(d, &[], &[]).unwrap();
        let p = RestrictionParams::new(2, 3).unwrap();
        assert!(matches!(
            check_restriction_regularity(&bd, d, &p, 0.5, 0.5, 0.2, 0.1, 2),
            Err(RestrictError::PreconditionViolated(_))
        ));
        assert!(matches!(
            check_restriction_regularity(&bd, d, &p, 0.5, 0.5, 0.05, 0.1, 5),
            Err(RestrictError::PreconditionViolated(_))
        ));
    }
}
