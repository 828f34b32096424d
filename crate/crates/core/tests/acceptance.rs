//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dschain::birkhoff::{birkhoff_decompose, recompose, term_limit};
use dschain::dilation::{dilate, paper_reconstruction, reconstruction_ratio, reduce_dilation};
use dschain::entropy::{check_monotone, entropy_violation_witness, quantum_renyi_entropy, renyi_entropy, Alpha};
use dschain::kraus::{
    apply_channel, ds_to_kraus, kraus_to_ds, luders_dephase, random_trace_preserving_channel, random_unital_channel,
    ProjectorSet, ZeroOperators,
};
use dschain::linalg::{random_density_matrix, DensityMatrix};
use dschain::process::{
    chain_contraction, run_ensemble, run_trajectory, sample_reduction_times, total_history_probability, ChainSource,
    InitialState, ProcessConfig,
};
use dschain::rng::{derive_seed, rng_from_seed};
use dschain::simplex::{
    random_probability_vector, sample_ds, sample_stochastic, DsMethod, MatrixKind, NormOrder, ProbabilityVector,
};
use rand::Rng;

type Check = Result<String, String>;

/// Name, check and runtime target in seconds.
type Criterion = (&'static str, fn() -> Check, u64);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn method(k: u64) -> DsMethod {
    DsMethod::ALL[(k % 3) as usize]
}

fn alphas(values: &[f64]) -> Vec<Alpha> {
    values.iter().map(|&a| Alpha::new(a).unwrap()).collect()
}

/// Descending partial sums of `q` never exceed those of `p`.
fn majorizes(p: &[f64], q: &[f64], slack: f64) -> bool {
    let mut a = p.to_vec();
    let mut b = q.to_vec();
    a.sort_by(|x, y| y.total_cmp(x));
    b.sort_by(|x, y| y.total_cmp(x));
    let (mut sa, mut sb) = (0.0, 0.0);
    a.iter().zip(&b).all(|(x, y)| {
        sa += x;
        sb += y;
        sb <= sa + slack
    })
}

fn forward_monotonicity() -> Check {
    let orders = alphas(&[1.0, 2.0, 5.0, f64::INFINITY]);
    let mut worst = f64::INFINITY;
    for k in 0..1000u64 {
        let n = 2 + (k % 7) as usize;
        let m = sample_ds(n, method(k), k).map_err(err)?;
        let p0 = random_probability_vector(n, derive_seed(k, 1)).map_err(err)?;
        let r = check_monotone(&m, &p0, &orders, 50).map_err(err)?;
        worst = worst.min(r.min_delta);
        ensure(r.min_delta >= -1e-10, || format!("seed {k}: min_delta {:e}", r.min_delta))?;
    }
    Ok(format!("1000 matrices, min_delta {worst:e}"))
}

fn converse_witness() -> Check {
    let mut smallest = f64::INFINITY;
    for k in 0..1000u64 {
        let n = 2 + (k % 7) as usize;
        let m = sample_stochastic(n, k).map_err(err)?;
        ensure(m.kind() == MatrixKind::ColumnStochastic, || format!("seed {k}: sample is doubly stochastic"))?;
        let w = entropy_violation_witness(&m).ok_or_else(|| format!("seed {k}: no witness"))?;
        let uniform = ProbabilityVector::uniform(n).map_err(err)?;
        ensure(w == uniform, || format!("seed {k}: witness is not uniform"))?;
        let drop = renyi_entropy(&w, Alpha::SHANNON) - renyi_entropy(&m.apply(&w).map_err(err)?, Alpha::SHANNON);
        smallest = smallest.min(drop);
        ensure(drop > 1e-8, || format!("seed {k}: entropy drop {drop:e}"))?;
    }
    Ok(format!("1000 witnesses, smallest H_1 drop {smallest:e}"))
}

fn convergence() -> Check {
    let mut accepted = 0;
    let mut seed = 0u64;
    let mut max_k = 0;
    while accepted < 100 {
        let n = 2 + (seed % 7) as usize;
        let m = sample_ds(n, method(seed), seed).map_err(err)?;
        let tau = m.dobrushin_coefficient();
        seed += 1;
        if tau > 0.99 {
            continue;
        }
        accepted += 1;
        let mut p = random_probability_vector(n, derive_seed(seed, 1)).map_err(err)?;
        let d0 = p.l1_distance_to_uniform();
        let predicted = if tau == 0.0 { 1 } else { ((1e-8f64 / 2.0).ln() / tau.ln()).ceil() as usize };
        max_k = max_k.max(predicted);
        for k in 1..=predicted.max(200) {
            p = m.apply(&p).map_err(err)?;
            let d = p.l1_distance_to_uniform();
            if k <= 200 {
                ensure(d <= d0 * tau.powi(k as i32) + 1e-9, || format!("seed {}: k={k} distance {d:e}", seed - 1))?;
            }
            if k == predicted {
                ensure(d <= 1e-8, || format!("seed {}: distance {d:e} at predicted k={k}", seed - 1))?;
            }
        }
    }
    Ok(format!("100 generic matrices ({seed} sampled), largest predicted k {max_k}"))
}

fn descent() -> Check {
    for k in 0..200u64 {
        let n = 2 + (k % 5) as usize;
        let count = 1 + (k % 4) as usize;
        let m = kraus_to_ds(&random_unital_channel(n, count, k).map_err(err)?).map_err(err)?;
        ensure(m.kind() == MatrixKind::DoublyStochastic, || format!("unital seed {k}: not doubly stochastic"))?;
        let worst = m
            .row_sums()
            .iter()
            .chain(&(0..n).map(|j| m.column(j).iter().sum()).collect::<Vec<f64>>())
            .fold(0.0f64, |a, s| a.max((s - 1.0).abs()));
        ensure(worst <= 1e-10, || format!("unital seed {k}: sum deviation {worst:e}"))?;

        let ch = random_trace_preserving_channel(n, 1 + count, k).map_err(err)?;
        let m = kraus_to_ds(&ch).map_err(err)?;
        ensure(m.kind() == MatrixKind::ColumnStochastic, || format!("non-unital seed {k}: passes the row test"))?;
        let cols = (0..n).map(|j| (m.column(j).iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
        ensure(cols <= 1e-10, || format!("non-unital seed {k}: column deviation {cols:e}"))?;
    }
    Ok("200 unital and 200 non-unital channels".into())
}

fn kraus_round_trip() -> Check {
    let mut worst = 0.0f64;
    for k in 0..200u64 {
        let n = 1 + (k % 8) as usize;
        let m = sample_ds(n, method(k), k).map_err(err)?;
        let back = kraus_to_ds(&ds_to_kraus(&m, ZeroOperators::Keep).map_err(err)?).map_err(err)?;
        let d = m.as_row_major().iter().zip(back.as_row_major()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        worst = worst.max(d);
        ensure(d <= 1e-12, || format!("seed {k}: deviation {d:e}"))?;
    }
    Ok(format!("200 round trips, max deviation {worst:e}"))
}

fn dilation() -> Check {
    let mut worst = 0.0f64;
    for k in 0..100u64 {
        let n = 1 + (k % 4) as usize;
        let count = 1 + ((k / 4) % 4) as usize;
        let ch = random_unital_channel(n, count, k).map_err(err)?;
        let d = dilate(&ch).map_err(err)?;
        let unitarity = d.unitarity_residual();
        let action = d.diagonal_action_residual(&ch).map_err(err)?;
        ensure(unitarity <= 1e-9, || format!("seed {k}: unitarity residual {unitarity:e}"))?;
        ensure(action <= 1e-9, || format!("seed {k}: diagonal action residual {action:e}"))?;
        let m = kraus_to_ds(&ch).map_err(err)?;
        let r = reduce_dilation(&d).map_err(err)?;
        let rec = m.as_row_major().iter().zip(r.as_row_major()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        ensure(rec <= 1e-9, || format!("seed {k}: recovery deviation {rec:e}"))?;
        worst = worst.max(unitarity).max(action).max(rec);
        let expected = (count * count) as f64;
        let (lo, hi) = reconstruction_ratio(&m, &paper_reconstruction(&d), 1e-6)
            .ok_or_else(|| format!("seed {k}: no entries for the reconstruction ratio"))?;
        ensure((lo - expected).abs() <= 1e-6 * expected && (hi - expected).abs() <= 1e-6 * expected, || {
            format!("seed {k}: reconstruction ratio [{lo}, {hi}], expected {expected}")
        })?;
    }
    Ok(format!("100 dilations, max residual {worst:e}, averaged reconstruction = M/N^2"))
}

fn birkhoff() -> Check {
    let mut longest = 0;
    for k in 0..1000u64 {
        let n = 1 + (k % 8) as usize;
        let m = sample_ds(n, method(k), k).map_err(err)?;
        let d = birkhoff_decompose(&m, 1e-12).map_err(err)?;
        longest = longest.max(d.len());
        ensure(d.len() <= term_limit(n), || format!("seed {k}: {} terms for n={n}", d.len()))?;
        let back = recompose(&d).map_err(err)?;
        let dev = m.as_row_major().iter().zip(back.as_row_major()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        ensure(dev <= 1e-10, || format!("seed {k}: round trip deviation {dev:e}"))?;
        for order in NormOrder::ALL {
            let (norm, bound) = d.norm_check(order).map_err(err)?;
            ensure(norm <= bound + 1e-10 && bound <= 1.0 + 1e-10, || {
                format!("seed {k}: {order:?} norm {norm} against {bound}")
            })?;
        }
    }
    Ok(format!("1000 decompositions, longest {longest} terms"))
}

fn quantum() -> Check {
    let orders = [Alpha::SHANNON, Alpha::new(2.0).unwrap(), Alpha::INFINITY];
    for k in 0..500u64 {
        let n = 2 + (k % 5) as usize;
        let ch = random_unital_channel(n, 1 + (k % 4) as usize, k).map_err(err)?;
        let rho = DensityMatrix::new(random_density_matrix(n, &mut rng_from_seed(derive_seed(k, 1)))).map_err(err)?;
        let out = apply_channel(&ch, &rho).map_err(err)?;
        let (s_in, s_out) = (rho.spectrum().map_err(err)?, out.spectrum().map_err(err)?);
        ensure(majorizes(&s_in, &s_out, 1e-10), || format!("seed {k}: output spectrum not majorized"))?;
        for a in orders {
            let (h0, h1) = (quantum_renyi_entropy(&rho, a).map_err(err)?, quantum_renyi_entropy(&out, a).map_err(err)?);
            ensure(h1 >= h0 - 1e-10, || format!("seed {k}: H_{a} fell from {h0} to {h1}"))?;
        }

        let mut rng = rng_from_seed(derive_seed(k, 2));
        let mut ranks = Vec::new();
        let mut left = n;
        while left > 0 {
            let r = rng.random_range(1..=left);
            ranks.push(r);
            left -= r;
        }
        let projectors = ProjectorSet::random(n, &ranks, k).map_err(err)?;
        let once = luders_dephase(&rho, &projectors).map_err(err)?;
        let twice = luders_dephase(&once, &projectors).map_err(err)?;
        let trace = (once.matrix().trace().re - 1.0).abs();
        ensure(trace <= 1e-10, || format!("seed {k}: dephased trace deviation {trace:e}"))?;
        let idem = (once.matrix() - twice.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        ensure(idem <= 1e-10, || format!("seed {k}: dephasing not idempotent ({idem:e})"))?;
        for a in orders {
            let (h0, h1) =
                (quantum_renyi_entropy(&rho, a).map_err(err)?, quantum_renyi_entropy(&once, a).map_err(err)?);
            ensure(h1 >= h0 - 1e-10, || format!("seed {k}: dephasing lowered H_{a}"))?;
        }
    }
    Ok("500 channels and 500 dephasings".into())
}

fn chain_remark() -> Check {
    let mut tightest = f64::INFINITY;
    for k in 0..200u64 {
        let n = 2 + (k % 7) as usize;
        let len = 1 + (k % 10) as usize;
        let chain = (0..len as u64)
            .map(|i| sample_ds(n, method(k + i), derive_seed(k, i)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        let c = chain_contraction(&chain).map_err(err)?;
        tightest = tightest.min(c.coefficient_product - c.product_coefficient);
        ensure(c.product_coefficient <= c.coefficient_product + 1e-10, || {
            format!("seed {k}: {} > {}", c.product_coefficient, c.coefficient_product)
        })?;
    }
    Ok(format!("200 chains, smallest slack {tightest:e}"))
}

fn simulation() -> Check {
    let mut cases = 0;
    for n in 1..=4usize {
        for len in 1..=6usize {
            for rep in 0..3u64 {
                let seed = (n * 100 + len * 10) as u64 + rep;
                let chain = (0..len as u64)
                    .map(|i| {
                        let s = derive_seed(seed, i);
                        if rep == 2 && n > 1 {
                            sample_stochastic(n, s)
                        } else {
                            sample_ds(n, method(i), s)
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(err)?;
                let p0 = random_probability_vector(n, seed).map_err(err)?;
                let total = total_history_probability(&chain, &p0).map_err(err)?;
                ensure((total - 1.0).abs() <= 1e-10, || format!("n={n} len={len}: total {total}"))?;
                cases += 1;
            }
        }
    }

    let (rate, horizon) = (2.0, 1000.0);
    for seed in 0..5u64 {
        let times = sample_reduction_times(rate, horizon, seed);
        let expected = rate * horizon;
        let count = times.len() as f64;
        ensure((count - expected).abs() <= 3.0 * expected.sqrt(), || format!("seed {seed}: {count} events"))?;
        let gaps: Vec<f64> = std::iter::once(times[0]).chain(times.windows(2).map(|w| w[1] - w[0])).collect();
        let mean = gaps.iter().sum::<f64>() / count;
        let sigma = (1.0 / rate) / count.sqrt();
        ensure((mean - 1.0 / rate).abs() <= 3.0 * sigma, || format!("seed {seed}: mean gap {mean}"))?;
        ensure(times.windows(2).all(|w| w[0] < w[1]) && *times.last().unwrap() <= horizon, || {
            format!("seed {seed}: times not increasing within the horizon")
        })?;
    }

    let configs = [
        ProcessConfig {
            n: 4,
            chain_source: ChainSource::PerStepSampled(DsMethod::Sinkhorn),
            rate: 2.0,
            horizon: 20.0,
            initial_state: InitialState::Basis(0),
            seed: 11,
            alphas: Alpha::defaults(),
        },
        ProcessConfig {
            n: 3,
            chain_source: ChainSource::FixedMatrix(sample_ds(3, DsMethod::Unistochastic, 5).map_err(err)?),
            rate: 1.5,
            horizon: 30.0,
            initial_state: InitialState::Distribution(random_probability_vector(3, 9).map_err(err)?),
            seed: 12,
            alphas: Alpha::defaults(),
        },
    ];
    let pool = |threads| rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    for cfg in &configs {
        let single = pool(1).install(|| (run_trajectory(cfg), run_ensemble(cfg, 400)));
        let multi = pool(8).install(|| (run_trajectory(cfg), run_ensemble(cfg, 400)));
        let (t1, e1) = (single.0.map_err(err)?, single.1.map_err(err)?);
        let (t8, e8) = (multi.0.map_err(err)?, multi.1.map_err(err)?);
        ensure(t1 == t8 && e1 == e8, || format!("seed {}: records differ across thread counts", cfg.seed))?;
        ensure(format!("{t1:?}{e1:?}") == format!("{t8:?}{e8:?}"), || {
            format!("seed {}: debug dumps differ", cfg.seed)
        })?;
    }
    Ok(format!("{cases} exhaustive history sums, Poisson checks on 5 seeds, records identical on 1 and 8 threads"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 entropy monotone under doubly stochastic maps", forward_monotonicity, 30),
        ("2 non-doubly-stochastic maps lower entropy at uniform", converse_witness, 10),
        ("3 generic chains converge at the Dobrushin rate", convergence, 10),
        ("4 Kraus descent: unital iff doubly stochastic", descent, 10),
        ("5 doubly stochastic to Kraus round trip", kraus_round_trip, 5),
        ("6 unitary dilation recovers the descended matrix", dilation, 60),
        ("7 Birkhoff decomposition", birkhoff, 30),
        ("8 quantum majorization and dephasing", quantum, 30),
        ("9 chain contraction is submultiplicative", chain_remark, 5),
        ("10 histories, Poisson clock, parallel reproducibility", simulation, 20),
    ];
    let mut failed = 0;
    for (name, check, target) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let timing = format!("{:.2}s, target < {target}s", elapsed.as_secs_f64());
        let slow = if elapsed > Duration::from_secs(target) { " [over target]" } else { "" };
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail} ({timing}){slow}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} ({timing}){slow}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
