use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::MetricsError;

/// How the p-value of a correlation is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum PValueMode {
    /// Two-tailed Student's t with n−2 degrees of freedom.
    #[default]
    TDist,
    /// Share of shuffled pairings at least as extreme, for small samples.
    Permutation { rounds: u32, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

fn is_constant(xs: &[f64]) -> bool {
    xs.iter().all(|x| *x == xs[0])
}

fn r_of(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

fn t_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if 1.0 - r.abs() < 1e-15 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
    (2.0 * dist.cdf(-t.abs())).min(1.0)
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<Correlation, MetricsError> {
    pearson_with(xs, ys, PValueMode::TDist)
}

pub fn pearson_with(xs: &[f64], ys: &[f64], mode: PValueMode) -> Result<Correlation, MetricsError> {
    if xs.len() != ys.len() {
        return Err(MetricsError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(MetricsError::DegenerateInput(format!("{n} points, at least 3 needed")));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(MetricsError::DegenerateInput("non-finite value".into()));
    }
    if is_constant(xs) || is_constant(ys) {
        return Err(MetricsError::DegenerateInput("constant series".into()));
    }
    let r = r_of(xs, ys);
    let p = match mode {
        PValueMode::TDist => t_p_value(r, n),
        PValueMode::Permutation { rounds, seed } => {
            if rounds == 0 {
                return Err(MetricsError::DegenerateInput("zero permutation rounds".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut shuffled = ys.to_vec();
            let mut extreme = 0u32;
            for _ in 0..rounds {
                shuffled.shuffle(&mut rng);
                if r_of(xs, &shuffled).abs() >= r.abs() - 1e-12 {
                    extreme += 1;
                }
            }
            (extreme as f64 + 1.0) / (rounds as f64 + 1.0)
        }
    };
    Ok(Correlation { r, p, n })
}

/// Fleiss' kappa over a subjects × categories matrix of rater counts.
pub fn fleiss_kappa(counts: &[Vec<u32>]) -> Result<f64, MetricsError> {
    let first = counts.first().ok_or(MetricsError::Empty)?;
    let k = first.len();
    if k == 0 {
        return Err(MetricsError::Empty);
    }
    let n: u32 = first.iter().sum();
    for (i, row) in counts.iter().enumerate() {
        if row.len() != k {
            return Err(MetricsError::RaggedMatrix(i));
        }
        if row.iter().sum::<u32>() != n {
            return Err(MetricsError::UnequalRaterCounts(i));
        }
    }
    if n < 2 {
        return Err(MetricsError::DegenerateInput(format!("{n} rater(s) per subject")));
    }
    let subjects = counts.len() as f64;
    let nf = n as f64;
    let p_bar = counts
        .iter()
        .map(|row| {
            let sq: f64 = row.iter().map(|&c| (c as f64) * (c as f64)).sum();
            (sq - nf) / (nf * (nf - 1.0))
        })
        .sum::<f64>()
        / subjects;
    let p_e: f64 = (0..k)
        .map(|j| {
            let share = counts.iter().map(|row| row[j] as f64).sum::<f64>() / (subjects * nf);
            share * share
        })
        .sum();
    if (1.0 - p_e).abs() < 1e-12 {
        return if (1.0 - p_bar).abs() < 1e-12 {
            Ok(1.0)
        } else {
            Err(MetricsError::DegenerateAgreement)
        };
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}
