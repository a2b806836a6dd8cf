use std::sync::atomic::{AtomicU64, Ordering};

use super::curve::{CurveRow, CurveSeries};
use crate::empirical::PairMeasure;
use crate::exact::{
    admissible_set, conditioned_event_probability, exact_statistic_distribution, size_law, statistic_key, Backend,
    StatKey, StatKind,
};
use crate::model::GWSpec;
use crate::sampler::{ExactSampler, RngHandle};
use crate::{Error, Result};

/// How finite-`n` probabilities are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdpMethod {
    Exact(Backend),
    /// Exact conditioned sampling with `samples` draws split over a fixed
    /// number of RNG streams.
    MonteCarlo { samples: u64, seed: u64 },
}

impl LdpMethod {
    pub fn name(&self) -> &'static str {
        match self {
            LdpMethod::Exact(_) => "exact",
            LdpMethod::MonteCarlo { .. } => "mc",
        }
    }
}

/// Number of RNG streams Monte Carlo work is split over; fixed so results do
/// not depend on the number of threads.
pub const MC_STREAMS: u64 = 16;

/// `r_n = -(1/n) log P{statistic in B | |T| = n}` for each `n`, with
/// `reference` (typically `inf_B I`) attached to every row.
///
/// Monte Carlo cells without a hit are reported as the lower bound
/// `log(samples) / n`, flagged `lower_bound`.
pub fn ldp_curve(
    spec: &GWSpec,
    kind: StatKind,
    event: &(dyn Fn(&StatKey) -> bool + Sync),
    n_list: &[usize],
    method: LdpMethod,
    reference: Option<f64>,
) -> Result<CurveSeries> {
    let n_top = n_list.iter().copied().max().unwrap_or(1);
    let table = size_law(spec, n_top)?;
    let adm = admissible_set(&table, spec.root_dist());
    let mut rows = Vec::new();
    for &n in n_list {
        if adm.contains(n) != Some(true) {
            return Err(Error::NotAdmissible(n));
        }
        let nf = n as f64;
        let mut row = match method {
            LdpMethod::Exact(backend) => {
                let dist = exact_statistic_distribution(spec, n, kind, backend)?;
                let p = conditioned_event_probability(&dist, event)?;
                if p > 0.0 {
                    CurveRow::new(nf, -p.ln() / nf)
                } else {
                    CurveRow::new(nf, f64::INFINITY).with_note("empty_event")
                }
            }
            LdpMethod::MonteCarlo { samples, seed } => {
                let hits = mc_hits(spec, &table, n, kind, event, samples, seed)?;
                if hits == 0 {
                    CurveRow::new(nf, (samples as f64).ln() / nf).with_note("lower_bound")
                } else {
                    let p = hits as f64 / samples as f64;
                    // Delta method: sd(log p_hat) ≈ sqrt((1 - p) / (samples p)).
                    let se = ((1.0 - p) / (samples as f64 * p)).sqrt() / nf;
                    CurveRow::new(nf, -p.ln() / nf).with_std_err(se)
                }
            }
        };
        if let Some(r) = reference {
            row = row.with_reference(r);
        }
        rows.push(row);
    }
    Ok(CurveSeries::new(format!("ldp_{}_{}", kind.name(), method.name()), rows))
}

fn mc_hits(
    spec: &GWSpec,
    table: &crate::exact::SizeLawTable,
    n: usize,
    kind: StatKind,
    event: &(dyn Fn(&StatKey) -> bool + Sync),
    samples: u64,
    seed: u64,
) -> Result<u64> {
    let sampler = ExactSampler::new(spec, table)?;
    let hits = AtomicU64::new(0);
    let threads = std::thread::available_parallelism().map(|t| t.get()).unwrap_or(1).min(MC_STREAMS as usize);
    let next = AtomicU64::new(0);
    let failure = std::sync::Mutex::new(None);
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let stream = next.fetch_add(1, Ordering::Relaxed);
                if stream >= MC_STREAMS {
                    break;
                }
                let share = samples / MC_STREAMS + u64::from(stream < samples % MC_STREAMS);
                let mut rng = RngHandle::new(seed, stream);
                let mut local = 0;
                for _ in 0..share {
                    match sampler.sample(n, &mut rng) {
                        Ok(t) => local += u64::from(event(&statistic_key(&t, kind, spec.num_types()))),
                        Err(e) => {
                            *failure.lock().unwrap() = Some(e);
                            return;
                        }
                    }
                }
                hits.fetch_add(local, Ordering::Relaxed);
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(hits.into_inner())
}

/// Result of [`grid_infimum_pair`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridInfimum {
    pub value: f64,
    pub argmin: Vec<f64>,
    pub grid_points: usize,
}

/// Minimum of `rate` over pair measures (row-major, `k^2` entries) in the
/// region `inside`, first over the simplex grid of step `1/steps` and then by
/// a compass search along the mass-preserving directions `e_i - e_j`.
pub fn grid_infimum_pair(
    k: usize,
    steps: usize,
    inside: impl Fn(&[f64]) -> bool,
    rate: impl Fn(&PairMeasure) -> f64,
) -> Result<GridInfimum> {
    let d = k * k;
    let eval = |w: &[f64]| -> f64 {
        if !inside(w) {
            return f64::INFINITY;
        }
        match PairMeasure::new(k, w.to_vec()) {
            Ok(mu) => rate(&mu),
            Err(_) => f64::INFINITY,
        }
    };
    let mut best = (f64::INFINITY, vec![0.0; d]);
    let mut counts = vec![0usize; d];
    let mut grid_points = 0;
    // Enumerate compositions of `steps` into `d` parts.
    fn rec(i: usize, left: usize, counts: &mut [usize], visit: &mut dyn FnMut(&[usize])) {
        if i + 1 == counts.len() {
            counts[i] = left;
            visit(counts);
            return;
        }
        for c in 0..=left {
            counts[i] = c;
            rec(i + 1, left - c, counts, visit);
        }
    }
    rec(0, steps, &mut counts, &mut |c| {
        grid_points += 1;
        let w: Vec<f64> = c.iter().map(|&x| x as f64 / steps as f64).collect();
        let v = eval(&w);
        if v < best.0 {
            best = (v, w);
        }
    });
    if !best.0.is_finite() {
        return Ok(GridInfimum { value: f64::INFINITY, argmin: best.1, grid_points });
    }
    let (mut value, mut point) = best;
    let mut h = 1.0 / steps as f64;
    while h > 1e-12 {
        let mut improved = false;
        for i in 0..d {
            for j in 0..d {
                if i == j || point[j] < h {
                    continue;
                }
                let mut trial = point.clone();
                trial[i] += h;
                trial[j] -= h;
                let v = eval(&trial);
                if v < value {
                    value = v;
                    point = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    Ok(GridInfimum { value, argmin: point, grid_points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{OffspringLaw, PairKernel, TypeAlphabet};
    use crate::rates::pair_rate;

    fn chain(s: f64) -> GWSpec {
        let pair = PairKernel::new(vec![vec![s, 1.0 - s], vec![1.0 - s, s]]).unwrap();
        let law = OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap();
        GWSpec::product(TypeAlphabet::indexed(2).unwrap(), vec![0.5, 0.5], law, pair).unwrap()
    }

    #[test]
    fn whole_space_has_zero_rate() {
        let c = ldp_curve(&chain(0.3), StatKind::PairCounts, &|_| true, &[5, 7], LdpMethod::Exact(Backend::Auto), None)
            .unwrap();
        assert!(c.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mc_is_reproducible_and_close_to_exact() {
        let event = |k: &StatKey| k.0[0] >= 3;
        let spec = chain(0.3);
        let mc = LdpMethod::MonteCarlo { samples: 20_000, seed: 5 };
        let a = ldp_curve(&spec, StatKind::PairCounts, &event, &[9], mc, None).unwrap();
        let b = ldp_curve(&spec, StatKind::PairCounts, &event, &[9], mc, None).unwrap();
        assert_eq!(a, b);
        let e = ldp_curve(&spec, StatKind::PairCounts, &event, &[9], LdpMethod::Exact(Backend::Auto), None).unwrap();
        let (r, se) = (a.rows()[0].value, a.rows()[0].std_err.unwrap());
        assert!((r - e.rows()[0].value).abs() < 5.0 * se, "{r} vs {}", e.rows()[0].value);
    }

    #[test]
    fn grid_infimum_finds_zero_of_rate() {
        let spec = chain(0.3);
        let (law, pair) = spec.product_parts().unwrap();
        let g = grid_infimum_pair(2, 40, |_| true, |mu| pair_rate(mu, law, pair).unwrap().value).unwrap();
        assert!(g.value < 1e-12, "{g:?}");
        assert!((g.argmin[0] - 0.15).abs() < 1e-5);
    }
}
