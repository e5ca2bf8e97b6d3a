use ampcap_core::audit::certified_lower_bounds;
use ampcap_core::distribution::{InputDistribution, PamConstellation};
use ampcap_core::lower_bounds::{jensen_bound_general, ow_pam_diag, pam_constellations};
use ampcap_core::oracle::{expectation_exp_quadratic, mutual_information_discrete, McBudget, McEstimate};
use ampcap_core::presets::random_channel;
use ampcap_core::svd_precoding::jensen_svd;
use ampcap_core::upper_bounds::all_upper_bounds;
use ampcap_core::{ChannelMatrix, InputSpace};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn pam_input(points: &[usize], amplitudes: &[f64]) -> InputDistribution {
    InputDistribution::pam_product(
        points
            .iter()
            .zip(amplitudes)
            .map(|(&n, &a)| PamConstellation::new(n, a).unwrap())
            .collect(),
    )
    .unwrap()
}

#[test]
fn std_error_shrinks_by_root_two_when_samples_double() {
    let h = ChannelMatrix::identity(1).unwrap();
    let d = pam_input(&[8], &[4.0]);
    let small = mutual_information_discrete(&d, &h, McBudget::new(20_000, 1)).unwrap();
    let large = mutual_information_discrete(&d, &h, McBudget::new(40_000, 2)).unwrap();
    let ratio = small.std_error / large.std_error;
    assert!((1.2..=1.8).contains(&ratio), "ratio {ratio}");
}

#[test]
fn estimates_are_bit_identical_across_pools() {
    let h = ChannelMatrix::diagonal(&[0.7, 0.4]).unwrap();
    let d = pam_input(&[5, 3], &[3.0, 2.0]);
    let run = |threads| {
        in_pool(threads, || {
            (
                mutual_information_discrete(&d, &h, McBudget::new(30_000, 9)).unwrap(),
                expectation_exp_quadratic(&d, &h, McBudget::new(50_000, 9)).unwrap(),
            )
        })
    };
    let (a, b) = run(1);
    let (c, e) = run(8);
    let bits = |m: &McEstimate| (m.value.to_bits(), m.std_error.to_bits());
    assert_eq!(bits(&a), bits(&c));
    assert_eq!(bits(&b), bits(&e));
    let again = mutual_information_discrete(&d, &h, McBudget::new(30_000, 9)).unwrap();
    assert_eq!(bits(&a), bits(&again));
    let other = mutual_information_discrete(&d, &h, McBudget::new(30_000, 10)).unwrap();
    assert_ne!(a.value.to_bits(), other.value.to_bits());
}

#[test]
fn precoded_sampling_reproduces_jensen_svd() {
    for seed in 0..4u64 {
        let h = random_channel(2, 3, 7000 + seed);
        let a = vec![3.0, 1.5, 0.7];
        let exact = jensen_svd(&h, &a).unwrap().value_bits;
        let d = InputDistribution::precoded_uniform(h.svd().v.clone(), a).unwrap();
        let mc = jensen_bound_general(&h, &d, McBudget::new(200_000, seed)).unwrap();
        let se = mc.param("std_error_bits").unwrap();
        assert!((mc.value_bits - exact).abs() <= 3.0 * se + 1e-12, "{} vs {exact} ± {se}", mc.value_bits);
    }
}

// Diagonal instances small enough for the MI oracle: every certified lower
// bound sits below the best tested PAM input, which sits below every upper
// bound, up to three standard errors.
#[test]
fn mutual_information_sandwich() {
    let instances = [
        (vec![1.0], InputSpace::cube(1, 1.0).unwrap()),
        (vec![1.0], InputSpace::cube(1, 10.0).unwrap()),
        (vec![0.3], InputSpace::cube(1, 100.0).unwrap()),
        (vec![0.3, 0.1], InputSpace::cube(2, 30.0).unwrap()),
        (vec![1.0, 0.5], InputSpace::ball(6.0, 2).unwrap()),
        (vec![2.0, 1.0], InputSpace::cube(2, 3.0).unwrap()),
    ];
    for (gains, x) in instances {
        let h = ChannelMatrix::diagonal(&gains).unwrap();
        let base: Vec<usize> = pam_constellations(&h, &x)
            .unwrap()
            .iter()
            .map(PamConstellation::points)
            .collect();
        let amps: Vec<f64> = pam_constellations(&h, &x)
            .unwrap()
            .iter()
            .map(PamConstellation::amplitude)
            .collect();
        let mut best: Option<McEstimate> = None;
        for factor in [1, 2, 4, 8] {
            let points: Vec<usize> = base.iter().map(|&n| (n * factor).max(2)).collect();
            if points.iter().product::<usize>() > 4096 {
                continue;
            }
            let d = pam_input(&points, &amps);
            let mi = mutual_information_discrete(&d, &h, McBudget::new(100_000, factor as u64)).unwrap();
            if factor == 1 {
                let ow = ow_pam_diag(&h, &x).unwrap().value_bits;
                if base.iter().all(|&n| n > 1) {
                    assert!(ow <= mi.value + 3.0 * mi.std_error, "ow {ow} > mi {}", mi.value);
                }
            }
            if best.is_none_or(|b| mi.value > b.value) {
                best = Some(mi);
            }
        }
        let best = best.unwrap();
        let slack = 3.0 * best.std_error;
        for lo in certified_lower_bounds(&h, &x).unwrap() {
            assert!(
                lo.value_bits <= best.value + slack,
                "{} = {} above MI {} for {gains:?} {x:?}",
                lo.name,
                lo.value_bits,
                best.value
            );
        }
        for up in all_upper_bounds(&h, &x).unwrap() {
            assert!(best.value <= up.value_bits + slack, "MI {} above {} = {}", best.value, up.name, up.value_bits);
        }
    }
}

#[test]
fn ow_is_below_mutual_information_for_mimo_pam() {
    use ampcap_core::distribution::DitherSpec;
    use ampcap_core::lower_bounds::{ow_bound, OwOptions};
    let h = ChannelMatrix::from_rows(&[vec![1.2, 0.4], vec![-0.3, 0.9]]).unwrap();
    let pams = vec![PamConstellation::new(6, 5.0).unwrap(), PamConstellation::new(4, 3.0).unwrap()];
    let d = InputDistribution::pam_product(pams.clone()).unwrap();
    let ow = ow_bound(&d, &h, &DitherSpec::matched(&pams).unwrap(), &OwOptions::default()).unwrap();
    let mi = mutual_information_discrete(&d, &h, McBudget::new(100_000, 4)).unwrap();
    assert!(ow.value_bits <= mi.value + 3.0 * mi.std_error, "{} > {}", ow.value_bits, mi.value);
    assert!(mi.value <= (24f64).log2() + 3.0 * mi.std_error);
}
