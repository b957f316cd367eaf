//! Translated coefficients `mu_hat(r n) e^(2 pi i gamma n)`.

use rayon::prelude::*;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use super::cluster::{self, PlaneCluster};
use crate::error::{Error, Result};
use crate::pisot::{FieldElement, PisotNumber};
use crate::real;
use crate::spectrum::synthesize_sequence;
use crate::transform::{self, Scale};

/// Angular sectors used by the coverage statistic.
pub const ANGULAR_BINS: usize = 64;

/// Which integers `n` are sampled.
#[derive(Debug, Clone)]
pub enum Sampling {
    /// `n_min <= n <= N`.
    Range { n_max: u64, n_min: u64 },
    /// `n_k = <(2r)^-1 (z_0 theta^((M+1)k) + ... + z_M theta^k)> + A` for
    /// `k_min <= k <= k_max`, along which `|mu_hat(r n_k)|` has a single limit.
    Sequence { z: Vec<FieldElement>, a: i64, k_min: u64, k_max: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslatedReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub r: String,
    pub gamma: String,
    pub gamma_kind: String,
    pub mode: String,
    pub samples: usize,
    pub eta: f64,
    pub gap: f64,
    pub retained: usize,
    pub clusters: Vec<PlaneCluster>,
    /// Modal modulus: center of the most populated gap-split cluster of `|value|`.
    pub dominant_radius: f64,
    /// Fraction of the 64 angular sectors hit by points at the dominant radius.
    pub coverage: f64,
}

impl TranslatedReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `gamma` as an exact field element or an arbitrary-precision real.
pub type Gamma = Scale;

fn gamma_float(p: &PisotNumber, gamma: &Gamma, prec: u32) -> Float {
    match gamma {
        Scale::Field(f) => {
            let hp = crate::pisot::build_pisot(
                &p.poly().d().iter().map(|c| c.to_i64().expect("small coefficients")).collect::<Vec<_>>(),
                prec,
            )
            .expect("already certified");
            hp.embed_field_real(f)
        }
        Scale::Real(x) => Float::with_val(prec, x),
    }
}

/// Samples `mu_hat(r n) e^(2 pi i gamma n)`, keeps points with modulus
/// `>= eta`, clusters them on a grid of side `gap` and measures how much of
/// the circle at the dominant radius they cover.
pub fn translated_sample(
    p: &PisotNumber,
    r: &Scale,
    gamma: &Gamma,
    sampling: &Sampling,
    eta: f64,
    gap: f64,
) -> Result<TranslatedReport> {
    if !(gap > 0.0) {
        return Err(Error::InvalidArgument(format!("gap must be positive, got {gap}")));
    }
    let (ns, mode): (Vec<Integer>, String) = match sampling {
        Sampling::Range { n_max, n_min } => {
            if n_min >= n_max {
                return Err(Error::InvalidArgument("n_min must be below N".into()));
            }
            ((n_min.max(&1).to_owned()..=*n_max).map(Integer::from).collect(), "range".into())
        }
        Sampling::Sequence { z, a, k_min, k_max } => {
            let Scale::Field(rf) = r else {
                return Err(Error::InvalidArgument("sequence sampling needs r in Q(theta)".into()));
            };
            let ks: Vec<u64> = (*k_min.max(&1)..=*k_max).collect();
            let ns = ks
                .par_iter()
                .map(|&k| synthesize_sequence(p, z, *a, rf, k))
                .collect::<Result<Vec<_>>>()?;
            (ns, "sequence".into())
        }
    };
    let bits = ns.iter().map(|n| n.significant_bits()).max().unwrap_or(1);
    let prec = p.precision_bits() + bits + real::GUARD_BITS;
    let rv = match r {
        Scale::Field(_) => gamma_float(p, r, prec),
        Scale::Real(x) => Float::with_val(prec, x),
    };
    if rv <= 0 {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    let g = gamma_float(p, gamma, prec);
    let theta = Float::with_val(prec, gamma_float(p, &Scale::Field(FieldElement::from(&p.theta_pow(1))), prec));

    let small = bits <= 40;
    let ev = transform::FastMuHat::new(&theta);
    let points: Vec<(u64, [f64; 2])> = ns
        .par_iter()
        .enumerate()
        .map(|(i, n)| {
            let modulus = if small {
                ev.eval(rv.to_f64() * n.to_f64()).0
            } else {
                let t = Float::with_val(prec, &rv * n);
                transform::mu_hat(&theta, &t, 1e-20).map(|m| m.value.to_f64())?
            };
            let phase = real::centered_fraction(&Float::with_val(prec, &g * n)).to_f64();
            let angle = std::f64::consts::TAU * phase;
            let id = n.to_u64().unwrap_or(i as u64);
            Ok((id, [modulus * angle.cos(), modulus * angle.sin()]))
        })
        .collect::<Result<Vec<_>>>()?;

    let kept: Vec<(u64, [f64; 2])> =
        points.iter().copied().filter(|(_, z)| z[0].hypot(z[1]) >= eta).collect();
    if kept.is_empty() {
        return Err(Error::EmptyRetention { eta });
    }
    let radial: Vec<(u64, f64)> = kept.iter().enumerate().map(|(i, (_, z))| (i as u64, z[0].hypot(z[1]))).collect();
    let rings = cluster::split_by_gaps(&radial, gap);
    let modal = rings
        .iter()
        .max_by(|a, b| a.count.cmp(&b.count).then(b.center.total_cmp(&a.center)))
        .expect("nonempty");
    let on_ring: Vec<[f64; 2]> = radial
        .iter()
        .filter(|(_, m)| *m >= modal.min && *m <= modal.max)
        .map(|(i, _)| kept[*i as usize].1)
        .collect();
    Ok(TranslatedReport {
        seed: None,
        r: r.label(),
        gamma: gamma.label(),
        gamma_kind: if gamma.is_real() { "real" } else { "field" }.into(),
        mode,
        samples: points.len(),
        eta,
        gap,
        retained: kept.len(),
        clusters: cluster::grid_clusters(&kept, gap),
        dominant_radius: modal.center,
        coverage: cluster::angular_coverage(&on_ring, ANGULAR_BINS),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pisot::build_pisot;

    #[test]
    fn zero_gamma_stays_on_the_real_axis() {
        let p = build_pisot(&[3], 128).unwrap();
        let one = Scale::Field(FieldElement::rational(1, 1));
        let zero = Scale::Field(FieldElement::zero(1));
        let rep = translated_sample(&p, &one, &zero, &Sampling::Range { n_max: 500, n_min: 250 }, 0.01, 1e-3).unwrap();
        for c in &rep.clusters {
            assert_eq!(c.center[1], 0.0);
        }
        assert!(rep.coverage <= 2.0 / 64.0);
    }

    #[test]
    fn golden_sequence_points_converge_to_the_limit_modulus() {
        let p = build_pisot(&[1, 1], 256).unwrap();
        let half = FieldElement::parse("1/2", 2).unwrap();
        let gamma = Scale::Field(FieldElement::parse("0,1/2", 2).unwrap());
        let seq = Sampling::Sequence { z: vec![p.one().to_field()], a: 0, k_min: 30, k_max: 60 };
        let rep = translated_sample(&p, &Scale::Field(half), &gamma, &seq, 1e-3, 1e-4).unwrap();
        assert!((rep.dominant_radius - 0.006_613_493_035_344).abs() < 1e-6);
        assert!(rep.clusters.len() <= 4);
    }
}
