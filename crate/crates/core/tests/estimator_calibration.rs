//! Monte-Carlo entropy estimates against the exact enumeration, pooled over
//! many seeds: z-scores should look standard normal.

use statrs::distribution::{Binomial, DiscreteCDF};
use wbc_polar::channel::{ComponentChannel, Conditioning, DmsSpec};
use wbc_polar::sets::{compute_entropies, EntropyMethod};

#[test]
fn z_scores_are_standard() {
    let spec = DmsSpec {
        input_law: [0.712, 0.178, 0.022, 0.088],
        y1: ComponentChannel::Bsc { crossover: 0.05 },
        y2: ComponentChannel::Bsc { crossover: 0.1 },
        z: ComponentChannel::Bsc { crossover: 0.3 },
    };
    let mut zs = Vec::new();
    for n in [4usize, 8] {
        let exact = compute_entropies(&spec, n, EntropyMethod::Enumeration).unwrap();
        for seed in 0..20u64 {
            let mc = compute_entropies(&spec, n, EntropyMethod::MonteCarlo { samples: 20_000, seed }).unwrap();
            let se = mc.std_errors.as_ref().unwrap();
            for c in Conditioning::ALL {
                for j in 0..n {
                    let s = se[c.index()][j];
                    if s > 0.0 {
                        zs.push((mc.get(c)[j] - exact.get(c)[j]) / s);
                    } else {
                        assert!((mc.get(c)[j] - exact.get(c)[j]).abs() < 1e-12);
                    }
                }
            }
        }
    }
    let m = zs.len() as f64;
    let mean = zs.iter().sum::<f64>() / m;
    let var = zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let beyond = zs.iter().filter(|z| z.abs() > 3.0).count() as u64;
    let limit = (0..zs.len() as u64)
        .find(|&k| Binomial::new(0.0027, zs.len() as u64).unwrap().cdf(k) >= 0.999)
        .unwrap();
    assert!(mean.abs() < 0.2, "mean z {mean}");
    assert!((0.8..1.3).contains(&var), "var z {var}");
    assert!(beyond <= limit, "{beyond} beyond 3 SE, limit {limit}");
}
