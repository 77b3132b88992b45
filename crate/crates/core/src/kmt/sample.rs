use std::fmt::Write as _;

use super::uniforms::{uniforms_from_bridge, DyadicCounts, DEFAULT_J_MAX};
use super::walk::{walk_from_bm, WalkFamily};
use crate::dist::{ArrivalModel, DistributionSpec};
use crate::error::{Error, Result};
use crate::paths::RefinableBrownianPath;
use crate::rng::{Role, StreamId};

/// Which arrival assumption a sample was built under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// `T_i` iid from a fixed `G`.
    Fixed,
    /// `T_i` iid from `G^{(n)}`, converging to `G`.
    Sequence,
}

/// One replication's jointly constructed inputs and their drivers.
///
/// `arrivals`, `zeta` and `uniforms` are indexed by customer. `service` is
/// indexed by service order: the `k`-th accepted customer (in arrival
/// order) receives `service[k]`.
#[derive(Clone, Debug)]
pub struct CoupledSample {
    pub n: usize,
    pub p: f64,
    pub arrivals: Vec<f64>,
    pub zeta: Vec<bool>,
    pub service: Vec<f64>,
    pub uniforms: Vec<f64>,
    pub bridge: RefinableBrownianPath,
    pub dropout_bm: RefinableBrownianPath,
    pub service_bm: RefinableBrownianPath,
    pub counts: DyadicCounts,
    pub branch: Branch,
    /// `r_n(G)`; zero for a fixed law.
    pub r_n: f64,
    pub warnings: Vec<String>,
}

/// Smallest `J` with `2^J >= n`.
pub fn walk_levels(n: usize) -> u32 {
    n.max(1).next_power_of_two().trailing_zeros()
}

/// Builds `(T_i, ζ_i, V_i)` for one replication.
///
/// * `T_i = G^{-1}(U_i)` with `U_i` from the dyadic construction on a
///   Brownian bridge.
/// * The dropout indicators are a Bernoulli(p) walk built from `B̂` with
///   time unit `1/n`; the customer with the `r`-th smallest epoch gets the
///   `r`-th walk increment, so the indicators summed in arrival order are
///   exactly the walk.
/// * Service times are a walk built from `B` with time unit `1/n`, consumed
///   in service order.
///
/// Walks are built at the next power of two and truncated to `n`.
pub fn build_coupled_sample(
    n: usize,
    p: f64,
    arrivals: &ArrivalModel,
    service: &DistributionSpec,
    master_seed: u64,
    rep: u64,
) -> Result<CoupledSample> {
    if n == 0 {
        return Err(Error::param("population size must be at least 1"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::param(format!("join probability {p} outside (0, 1]")));
    }
    let family = WalkFamily::from_spec(service)?;
    if service.support().0 < 0.0 {
        return Err(Error::param("service times must be non-negative"));
    }
    let key = StreamId::new(master_seed, n as u64, rep, Role::Bridge);
    let mut bridge = RefinableBrownianPath::bridge(key);
    let mut aux = key.with_role(Role::Placement).rng();
    let built = uniforms_from_bridge(n as u64, &mut bridge, &mut aux, DEFAULT_J_MAX)?;

    let g_n = arrivals.for_n(n as u64);
    let epochs: Vec<f64> = built
        .values
        .iter()
        .map(|&u| g_n.quantile_pq(u, 1.0 - u))
        .collect();

    let levels = walk_levels(n);
    let unit = 1.0 / n as f64;
    let mut dropout_bm = RefinableBrownianPath::new(key.with_role(Role::DropoutBm));
    let walk = walk_from_bm(levels, &mut dropout_bm, WalkFamily::Bernoulli { p }, unit)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| epochs[a].total_cmp(&epochs[b]).then(a.cmp(&b)));
    let mut zeta = vec![false; n];
    for (rank, &who) in order.iter().enumerate() {
        zeta[who] = walk[rank] > 0.5;
    }

    let mut service_bm = RefinableBrownianPath::new(key.with_role(Role::ServiceBm));
    let mut v = walk_from_bm(levels, &mut service_bm, family, unit)?;
    v.truncate(n);

    Ok(CoupledSample {
        n,
        p,
        arrivals: epochs,
        zeta,
        service: v,
        uniforms: built.values,
        bridge,
        dropout_bm,
        service_bm,
        counts: built.counts,
        branch: if arrivals.is_sequence() {
            Branch::Sequence
        } else {
            Branch::Fixed
        },
        r_n: arrivals.r_n(n as u64),
        warnings: built.warnings,
    })
}

/// One row of the sample CSV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleRow {
    pub i: usize,
    pub t: f64,
    pub zeta: bool,
    pub v: f64,
}

impl CoupledSample {
    /// Customer indices sorted by arrival epoch (ties by index).
    pub fn arrival_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| self.arrivals[a].total_cmp(&self.arrivals[b]).then(a.cmp(&b)));
        order
    }

    /// Stream identities of the bridge, `B̂` and `B`.
    pub fn driver_streams(&self) -> [StreamId; 3] {
        [
            self.bridge.stream(),
            self.dropout_bm.stream(),
            self.service_bm.stream(),
        ]
    }

    /// `(i, T_i, zeta_i, V_i)` rows; `V_i` is the service time of the `i`-th
    /// service slot.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,T_i,zeta_i,V_i\n");
        for i in 0..self.n {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                i + 1,
                self.arrivals[i],
                u8::from(self.zeta[i]),
                self.service[i]
            );
        }
        out
    }

    /// Parses the format written by [`CoupledSample::to_csv`].
    pub fn parse_csv(text: &str) -> Result<Vec<SampleRow>> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != 4 {
                return Err(Error::Parse(format!("expected 4 fields, got {}", rec.len())));
            }
            let field = |k: usize| -> Result<f64> {
                let x: f64 = rec[k]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad number {:?}", &rec[k])))?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(Error::Parse(format!("non-finite field {:?}", &rec[k])))
                }
            };
            let i: usize = rec[0]
                .parse()
                .map_err(|_| Error::Parse(format!("bad index {:?}", &rec[0])))?;
            let zeta = match &rec[2] {
                "0" => false,
                "1" => true,
                other => return Err(Error::Parse(format!("dropout flag {other:?} is not 0 or 1"))),
            };
            let row = SampleRow {
                i,
                t: field(1)?,
                zeta,
                v: field(3)?,
            };
            if row.t < 0.0 || row.v < 0.0 {
                return Err(Error::Parse("negative epoch or service time".into()));
            }
            if row.i != rows.len() + 1 {
                return Err(Error::Parse(format!("row index {} out of sequence", row.i)));
            }
            rows.push(row);
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed_uniform() -> ArrivalModel {
        ArrivalModel::Fixed(DistributionSpec::uniform01())
    }

    #[test]
    fn full_participation_when_p_is_one() {
        let s = build_coupled_sample(37, 1.0, &fixed_uniform(), &DistributionSpec::gamma(2.0, 1.0).unwrap(), 1, 0)
            .unwrap();
        assert!(s.zeta.iter().all(|&z| z));
        assert_eq!(s.service.len(), 37);
    }

    #[test]
    fn single_customer() {
        let s = build_coupled_sample(1, 0.5, &fixed_uniform(), &DistributionSpec::exponential(1.0).unwrap(), 4, 2)
            .unwrap();
        assert_eq!(s.arrivals.len(), 1);
        assert_eq!(s.arrivals[0], s.uniforms[0]);
    }

    #[test]
    fn zeta_in_arrival_order_is_the_walk() {
        let n = 50;
        let mut s = build_coupled_sample(n, 0.4, &fixed_uniform(), &DistributionSpec::gamma(2.0, 1.0).unwrap(), 9, 1)
            .unwrap();
        let walk = walk_from_bm(6, &mut s.dropout_bm, WalkFamily::Bernoulli { p: 0.4 }, 1.0 / n as f64).unwrap();
        for (rank, who) in s.arrival_order().into_iter().enumerate() {
            assert_eq!(s.zeta[who], walk[rank] == 1.0);
        }
    }

    #[test]
    fn csv_round_trip() {
        let s = build_coupled_sample(5, 0.7, &fixed_uniform(), &DistributionSpec::gamma(2.0, 1.0).unwrap(), 3, 0)
            .unwrap();
        let rows = CoupledSample::parse_csv(&s.to_csv()).unwrap();
        assert_eq!(rows.len(), 5);
        for (k, r) in rows.iter().enumerate() {
            assert_eq!(r.t, s.arrivals[k]);
            assert_eq!(r.zeta, s.zeta[k]);
            assert_eq!(r.v, s.service[k]);
        }
        assert!(CoupledSample::parse_csv("i,T_i,zeta_i,V_i\n1,0.5,2,1\n").is_err());
        assert!(CoupledSample::parse_csv("i,T_i,zeta_i,V_i\n2,0.5,1,1\n").is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = fixed_uniform();
        let v = DistributionSpec::gamma(2.0, 1.0).unwrap();
        assert!(build_coupled_sample(0, 0.5, &g, &v, 0, 0).is_err());
        assert!(build_coupled_sample(4, 0.0, &g, &v, 0, 0).is_err());
        assert!(matches!(
            build_coupled_sample(4, 0.5, &g, &DistributionSpec::uniform01(), 0, 0),
            Err(Error::Unsupported(_))
        ));
        assert!(build_coupled_sample(4, 0.5, &g, &DistributionSpec::gaussian(1.0, 1.0).unwrap(), 0, 0).is_err());
    }

    #[test]
    fn walk_levels_round_up() {
        assert_eq!(walk_levels(1), 0);
        assert_eq!(walk_levels(2), 1);
        assert_eq!(walk_levels(5), 3);
        assert_eq!(walk_levels(64), 6);
    }
}
