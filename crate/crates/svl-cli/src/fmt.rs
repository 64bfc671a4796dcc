//! Parsing and printing of the CLI's small text formats: boundary specs,
//! domain sizes, weight lists and exact rationals.

use anyhow::{anyhow, bail, Context, Result};
use num::BigRational;
use svl_core::exact::{Entrance, ExitData};
use svl_core::lattice::{BoundaryData, Rect};
use svl_core::weights::{StochasticParams, WeightSystem};

/// `WxH` into `[1, W] x [1, H]`.
pub fn parse_domain(s: &str) -> Result<Rect> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("domain must look like 8x8, got `{s}`"))?;
    let w: i64 = w.trim().parse().context("domain width")?;
    let h: i64 = h.trim().parse().context("domain height")?;
    if w < 1 || h < 1 {
        bail!("domain sides must be positive");
    }
    Ok(Rect::of_size(w, h))
}

pub fn parse_f64_list<const N: usize>(s: &str, what: &str) -> Result<[f64; N]> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("{what}: bad number `{p}`")))
        .collect::<Result<_>>()?;
    let n = parts.len();
    parts
        .try_into()
        .map_err(|_| anyhow!("{what}: expected {N} comma-separated numbers, got {n}"))
}

/// Exact rational from `p/q` or a terminating decimal string.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: num::BigInt = p.trim().parse().context("numerator")?;
        let q: num::BigInt = q.trim().parse().context("denominator")?;
        if q == 0.into() {
            bail!("zero denominator in `{s}`");
        }
        return Ok(BigRational::new(p, q));
    }
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    let digits: String = format!("{int_part}{frac_part}");
    let p: num::BigInt = digits.parse().with_context(|| format!("bad rational `{s}`"))?;
    let q = num::BigInt::from(10u8).pow(frac_part.len() as u32);
    Ok(BigRational::new(p, q))
}

/// Renders a rational as an exact decimal when the denominator divides a
/// power of ten, else as `p/q`.
pub fn rational_string(r: &BigRational) -> String {
    use num::{BigInt, One, Signed, Zero};
    let mut den = r.denom().abs();
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2u8);
    let five = BigInt::from(5u8);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let shift = twos.max(fives);
    let scaled = (r * BigRational::from_integer(BigInt::from(10u8).pow(shift))).to_integer();
    let neg = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let digits = format!("{:0>width$}", digits, width = shift as usize + 1);
    let split = digits.len() - shift as usize;
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&digits[..split]);
    if shift > 0 {
        out.push('.');
        out.push_str(&digits[split..]);
    }
    out
}

fn parse_side(spec: &str, tag: &str) -> Result<Vec<i64>> {
    let body = &spec[tag.len()..];
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|p| p.trim().parse::<i64>().with_context(|| format!("bad coordinate `{p}` in {spec}")))
        .collect()
}

/// Boundary spec `S:x1,x2 W:y1 N:x1 E:y1`; groups separated by whitespace or
/// `;`. Returns per-side sorted coordinate lists (south, west, north, east).
pub fn parse_boundary_spec(s: &str) -> Result<(Vec<i64>, Vec<i64>, Vec<i64>, Vec<i64>)> {
    let mut south = Vec::new();
    let mut west = Vec::new();
    let mut north = Vec::new();
    let mut east = Vec::new();
    for group in s.split([' ', ';', '\t']).filter(|g| !g.is_empty()) {
        if group.starts_with("S:") {
            south.extend(parse_side(group, "S:")?);
        } else if group.starts_with("W:") {
            west.extend(parse_side(group, "W:")?);
        } else if group.starts_with("N:") {
            north.extend(parse_side(group, "N:")?);
        } else if group.starts_with("E:") {
            east.extend(parse_side(group, "E:")?);
        } else {
            bail!("boundary group `{group}` must start with S:, W:, N: or E:");
        }
    }
    for v in [&mut south, &mut west, &mut north, &mut east] {
        v.sort_unstable();
    }
    Ok((south, west, north, east))
}

pub fn parse_entrance_spec(s: &str) -> Result<Entrance> {
    let (south, west, north, east) = parse_boundary_spec(s)?;
    if !north.is_empty() || !east.is_empty() {
        bail!("entrance data lives on the S and W sides only");
    }
    Ok(Entrance { south, west })
}

pub fn parse_exit_spec(s: &str) -> Result<ExitData> {
    let (south, west, north, east) = parse_boundary_spec(s)?;
    if !south.is_empty() || !west.is_empty() {
        bail!("exit data lives on the N and E sides only");
    }
    Ok(ExitData { north, east })
}

/// Full boundary data for a domain from one spec string.
pub fn parse_full_boundary(s: &str, domain: Rect) -> Result<BoundaryData> {
    let (south, west, north, east) = parse_boundary_spec(s)?;
    let mut entrance: Vec<(i64, i64)> =
        south.iter().map(|&x| (x, domain.y_min - 1)).collect();
    entrance.extend(west.iter().map(|&y| (domain.x_min - 1, y)));
    let mut exit: Vec<(i64, i64)> = north.iter().map(|&x| (x, domain.y_max + 1)).collect();
    exit.extend(east.iter().map(|&y| (domain.x_max + 1, y)));
    Ok(BoundaryData::from_sets(domain, &entrance, &exit)?)
}

/// Renders boundary data back into the spec syntax.
pub fn boundary_spec_string(bd: &BoundaryData, domain: Rect) -> String {
    let join = |v: &mut Vec<i64>| {
        v.sort_unstable();
        v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    };
    let mut south: Vec<i64> = bd
        .entrance
        .iter()
        .filter_map(|&(x, y)| (y == domain.y_min - 1).then_some(x))
        .collect();
    let mut west: Vec<i64> = bd
        .entrance
        .iter()
        .filter_map(|&(x, y)| (x == domain.x_min - 1).then_some(y))
        .collect();
    let mut north: Vec<i64> = bd
        .exit
        .iter()
        .filter_map(|&(x, y)| (y == domain.y_max + 1).then_some(x))
        .collect();
    let mut east: Vec<i64> = bd
        .exit
        .iter()
        .filter_map(|&(x, y)| (x == domain.x_max + 1).then_some(y))
        .collect();
    format!(
        "S:{} W:{} N:{} E:{}",
        join(&mut south),
        join(&mut west),
        join(&mut north),
        join(&mut east)
    )
}

pub fn parse_weights_f64(s: &str) -> Result<WeightSystem<f64>> {
    let [a1, a2, b1, b2, c1, c2] = parse_f64_list::<6>(s, "--weights")?;
    Ok(WeightSystem::new(a1, a2, b1, b2, c1, c2)?)
}

pub fn parse_weights_rational(s: &str) -> Result<WeightSystem<BigRational>> {
    let parts: Vec<BigRational> =
        s.split(',').map(parse_rational).collect::<Result<_>>()?;
    if parts.len() != 6 {
        bail!("--weights expects 6 comma-separated values");
    }
    let [a1, a2, b1, b2, c1, c2]: [BigRational; 6] = parts.try_into().unwrap();
    Ok(WeightSystem::new(a1, a2, b1, b2, c1, c2)?)
}

pub fn parse_stochastic(s: &str) -> Result<StochasticParams<f64>> {
    let [b1, b2] = parse_f64_list::<2>(s, "--stochastic")?;
    Ok(StochasticParams::new(b1, b2)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_and_lists() {
        assert_eq!(parse_domain("8x5").unwrap(), Rect::of_size(8, 5));
        assert!(parse_domain("8").is_err());
        assert_eq!(parse_f64_list::<2>("0.2, 0.8", "x").unwrap(), [0.2, 0.8]);
    }

    #[test]
    fn rationals_round_trip() {
        assert_eq!(parse_rational("0.3").unwrap(), BigRational::new(3.into(), 10.into()));
        assert_eq!(parse_rational("3/10").unwrap(), BigRational::new(3.into(), 10.into()));
        assert_eq!(rational_string(&parse_rational("0.28").unwrap()), "0.28");
        assert_eq!(rational_string(&parse_rational("1/3").unwrap()), "1/3");
        assert_eq!(rational_string(&parse_rational("7/25").unwrap()), "0.28");
        assert_eq!(rational_string(&BigRational::from_integer(5.into())), "5");
    }

    #[test]
    fn boundary_specs() {
        let (s, w, n, e) = parse_boundary_spec("S:1,3 W:2 N:2 E:1,3").unwrap();
        assert_eq!((s, w, n, e), (vec![1, 3], vec![2], vec![2], vec![1, 3]));
        let entrance = parse_entrance_spec("S:1,3;W:2").unwrap();
        assert_eq!(entrance, Entrance { south: vec![1, 3], west: vec![2] });
        assert!(parse_entrance_spec("N:1").is_err());
        let d = Rect::of_size(3, 3);
        let bd = parse_full_boundary("S:1,3 W:2 N:2,3 E:1", d).unwrap();
        assert_eq!(bd.len(), 3);
        assert_eq!(boundary_spec_string(&bd, d), "S:1,3 W:2 N:2,3 E:1");
    }
}
