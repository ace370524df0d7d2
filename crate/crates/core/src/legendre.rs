//! Canonical momenta, momentum inversion and Hamiltonians for the catalog
//! Lagrangians.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lagrange::{catalog_lagrangian, default_gauge, domain_sampler, Kind, VariationalPair, VariationalTag};
use crate::mechsys::Trajectory;
use crate::symkernel::ops::{cos, cot, exp, log, sin, sym, tan};
use crate::symkernel::{Bindings, Expr, Sampler};

/// `p(u2)` and its inverse `u2(p)` on a declared domain.
#[derive(Clone, Debug)]
pub struct MomentumMap {
    pub p_of_u2: Expr,
    pub u2_of_p: Expr,
    pub domain: &'static str,
}

/// `dL/du2`.
pub fn canonical_momentum(l: &VariationalPair) -> Expr {
    l.value.diff("u2")
}

fn domain_note(tag: VariationalTag) -> &'static str {
    match tag {
        VariationalTag::L12 => "all (t, u1, p)",
        VariationalTag::L13 => "cos kt != 0, k u1 sin kt + u2 cos kt > 0",
        VariationalTag::L23 => "sin kt != 0, u2 sin kt - k u1 cos kt > 0",
        VariationalTag::L34 => "u1 > 0, |k u1 (p - f1)| < pi/2 (principal branch)",
    }
}

/// The closed-form Hamiltonian for `tag` with its momentum map.
pub fn catalog_hamiltonian(
    tag: VariationalTag,
    k: f64,
    f1: Expr,
    f2: Expr,
    seed: u64,
) -> Result<(VariationalPair, MomentumMap)> {
    let l = catalog_lagrangian(tag, k, f1.clone(), f2.clone(), seed)?;
    let (u1, p) = (sym("u1"), sym("p"));
    let kt = k * sym("t");
    let w = &p - &f1;
    let (value, u2_of_p) = match tag {
        VariationalTag::L12 => (0.5 * p.powi(2) - &p * &f1 + 0.5 * f1.powi(2) - &f2, w.clone()),
        VariationalTag::L13 => {
            let e = exp(cos(&kt) * &w);
            (
                &e / cos(&kt).powi(2) - k * &u1 * tan(&kt) * &w - &f2,
                -k * &u1 * tan(&kt) + &e / cos(&kt),
            )
        }
        VariationalTag::L23 => {
            let e = exp(sin(&kt) * &w);
            (
                &e / sin(&kt).powi(2) + k * &u1 * cot(&kt) * &w - &f2,
                k * &u1 * cot(&kt) + &e / sin(&kt),
            )
        }
        VariationalTag::L34 => {
            let th = tan(k * &u1 * &w);
            (0.5 * log(th.powi(2) + 1.0) - &f2, k * &u1 * th)
        }
    };
    let map = MomentumMap {
        p_of_u2: canonical_momentum(&l),
        u2_of_p,
        domain: domain_note(tag),
    };
    let h = VariationalPair {
        kind: Kind::Hamiltonian,
        value,
        ..l
    };
    Ok((h, map))
}

pub fn default_hamiltonian(tag: VariationalTag, k: f64, seed: u64) -> Result<(VariationalPair, MomentumMap)> {
    let (f1, f2) = default_gauge(tag, k);
    catalog_hamiltonian(tag, k, f1, f2, seed)
}

/// Sampler over `(t, u1, p)` inside the tag's phase-space domain.
pub fn momentum_sampler(h: &VariationalPair, seed: u64) -> Sampler {
    let (tag, k) = (h.tag, h.k);
    let kt = k * sym("t");
    let s = Sampler::new(seed);
    match tag {
        VariationalTag::L12 => s,
        VariationalTag::L13 => s.range("p", -1.0, 1.0).nonzero(cos(&kt), 0.05),
        VariationalTag::L23 => s.range("p", -1.0, 1.0).nonzero(sin(&kt), 0.05),
        VariationalTag::L34 => s
            .range("u1", 0.5, 2.0)
            .range("p", -0.35 / k, 0.35 / k)
            .positive(cos(k * sym("u1") * (sym("p") - &h.f1)), 0.05),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LegendreCheck {
    pub hamiltonian: String,
    /// `p(u2(p)) = p`
    pub round_trip_p: bool,
    /// `u2(p(u2)) = u2`
    pub round_trip_u2: bool,
    /// `H + L = p u2`
    pub legendre_identity: bool,
}

/// Round trips and the Legendre identity under sampling.
pub fn legendre_check(
    h: &VariationalPair,
    l: &VariationalPair,
    map: &MomentumMap,
    seed: u64,
    tol: f64,
) -> Result<LegendreCheck> {
    let ps = momentum_sampler(h, seed);
    let us = domain_sampler(l.tag, l.k, seed);
    let p = sym("p");
    let p_back = map.p_of_u2.substitute("u2", &map.u2_of_p);
    let u2_back = map.u2_of_p.substitute("p", &map.p_of_u2);
    let l_of_p = l.value.substitute("u2", &map.u2_of_p);
    let identity = &h.value + l_of_p - &p * &map.u2_of_p;
    Ok(LegendreCheck {
        hamiltonian: h.name(),
        round_trip_p: ps.equiv(&p_back, &p, tol)?,
        round_trip_u2: us.equiv(&u2_back, &sym("u2"), tol)?,
        legendre_identity: ps.is_zero_rel(&identity, tol)?,
    })
}

/// Max over interior nodes of `|u1' - dH/dp|` and `|p' + dH/du1|`, with
/// time derivatives from fourth-order central differences on the trajectory
/// grid (the two nodes at each end are skipped).
pub fn hamilton_equations_residual(h: &VariationalPair, map: &MomentumMap, traj: &Trajectory) -> Result<f64> {
    if traj.len() < 5 {
        return Err(Error::InvalidParameter("need at least five nodes".into()));
    }
    let node_err = |i: usize| {
        move |e: Error| match e {
            Error::Pole { location } => Error::Pole {
                location: format!("node {i}: {location}"),
            },
            other => other,
        }
    };
    let mut p = Vec::with_capacity(traj.len());
    for i in 0..traj.len() {
        p.push(map.p_of_u2.eval_real(&traj.bindings(i), 1e-9).map_err(node_err(i))?);
    }
    let (dh_dp, dh_du1) = (h.value.diff("p"), h.value.diff("u1"));
    let mut worst: f64 = 0.0;
    let d = |f: &[f64], i: usize| (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * traj.dt);
    for i in 2..traj.len() - 2 {
        let (u1_dot, p_dot) = (d(&traj.u1, i), d(&p, i));
        let b = Bindings::from([("t", traj.time(i)), ("u1", traj.u1[i]), ("p", p[i])]);
        let r1 = (u1_dot - dh_dp.eval_real(&b, 1e-9).map_err(node_err(i))?).abs();
        let r2 = (p_dot + dh_du1.eval_real(&b, 1e-9).map_err(node_err(i))?).abs();
        worst = worst.max(r1).max(r2);
    }
    Ok(worst)
}

/// Relative spread of `H` along a trajectory.
pub fn conservation_spread(h: &VariationalPair, map: &MomentumMap, traj: &Trajectory) -> Result<f64> {
    let mut vals = Vec::with_capacity(traj.len());
    for i in 0..traj.len() {
        let mut b = traj.bindings(i);
        let p = map.p_of_u2.eval_real(&b, 1e-9)?;
        b.set("p", p);
        vals.push(h.value.eval_real(&b, 1e-9)?);
    }
    let h0 = vals[0];
    Ok(vals.iter().map(|v| (v - h0).abs()).fold(0.0, f64::max) / h0.abs().max(f64::MIN_POSITIVE))
}

#[derive(Clone, Debug, Serialize)]
pub struct GoldsteinReport {
    pub symbolic_identity: bool,
    pub spot_q: f64,
    pub spot_p: f64,
    pub spot_transformed: f64,
    pub spot_direct: f64,
    pub parity: bool,
    pub poisson_bracket_is_one: bool,
}

impl GoldsteinReport {
    pub fn pass(&self) -> bool {
        self.symbolic_identity
            && self.parity
            && self.poisson_bracket_is_one
            && (self.spot_transformed - self.spot_direct).abs() < 1e-12
    }
}

/// `q~ = -1/q`, `p~ = p q^2` carries `(p~^2 + q~^2)/2` to `(1/q^2 + p^2 q^4)/2`.
pub fn goldstein_transform_check(seed: u64, tol: f64) -> Result<GoldsteinReport> {
    let (q, p) = (sym("q"), sym("p"));
    let qt = -q.recip();
    let pt = &p * q.powi(2);
    let transformed = 0.5 * (pt.powi(2) + qt.powi(2));
    let direct = 0.5 * (q.powi(-2) + p.powi(2) * q.powi(4));
    let s = Sampler::new(seed)
        .range("q", -2.0, 2.0)
        .range("p", -2.0, 2.0)
        .nonzero(q.clone(), 0.1);
    let flip = |e: &Expr| e.substitute_all(&[("q", -&q), ("p", -&p)]);
    let bracket = qt.diff("q") * pt.diff("p") - qt.diff("p") * pt.diff("q");
    let spot = Bindings::from([("q", 2.0), ("p", 0.3)]);
    Ok(GoldsteinReport {
        symbolic_identity: s.equiv(&transformed, &direct, tol)?,
        spot_q: 2.0,
        spot_p: 0.3,
        spot_transformed: transformed.eval_real(&spot, 0.0)?,
        spot_direct: direct.eval_real(&spot, 0.0)?,
        parity: s.equiv(&flip(&transformed), &transformed, tol)? && s.equiv(&flip(&direct), &direct, tol)?,
        poisson_bracket_is_one: s.equiv(&bracket, &Expr::one(), tol)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h12_default_is_energy() {
        let (h, map) = default_hamiltonian(VariationalTag::L12, 2.0, 1).unwrap();
        assert_eq!(h.value, 0.5 * sym("p").powi(2) + 2.0 * sym("u1").powi(2));
        assert_eq!(map.p_of_u2, sym("u2"));
    }

    #[test]
    fn h34_generates_motion_on_positive_branch() {
        let sys = crate::mechsys::sho_system(1.0).unwrap();
        let traj = crate::mechsys::integrate(&sys, [1.5, 0.0], (0.0, 1.0), 1e-3).unwrap();
        let (h, map) = default_hamiltonian(VariationalTag::L34, 1.0, 2).unwrap();
        assert!(hamilton_equations_residual(&h, &map, &traj).unwrap() < 1e-5);
    }

    #[test]
    fn goldstein_spot_value() {
        let r = goldstein_transform_check(1, 1e-12).unwrap();
        assert!((r.spot_direct - 0.845).abs() < 1e-15);
        assert!(r.pass());
    }
}
