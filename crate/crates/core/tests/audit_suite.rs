use ampcap_core::audit::{
    audit_ensembles, certify_packing_gap, certify_pam_gap, default_ensembles, pam_gap_constant, sandwich_report,
    single_point_duality_bound, GapCertificate,
};
use ampcap_core::presets::{random_invertible, random_orthogonal};
use ampcap_core::specialfn::log_gamma;
use ampcap_core::{ChannelMatrix, InputSpace};

#[test]
fn shipped_ensembles_pass() {
    let ensembles = default_ensembles();
    let pairs: usize = ensembles.iter().map(|e| e.instances.len()).sum();
    assert!(pairs >= 200, "{pairs}");
    let certs = audit_ensembles(&ensembles, pam_gap_constant()).unwrap();
    let failing: Vec<&GapCertificate> = certs.iter().filter(|c| c.fails_audit()).collect();
    assert!(failing.is_empty(), "{}", failing.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("\n"));
    assert_eq!(certs.iter().filter(|c| c.check == "sandwich").count(), pairs);
    assert!(certs.iter().all(|c| c.slack.is_finite() || c.rhs_bits == f64::INFINITY));
}

#[test]
fn corrupted_constant_fails_the_audit() {
    // The largest per-dimension gap is just under 1 bit, so 0.5 must fail.
    let certs = audit_ensembles(&default_ensembles(), 0.5).unwrap();
    assert!(certs.iter().any(|c| c.check == "pam_gap" && c.fails_audit()));
}

#[test]
fn sandwich_reports_follow_input_order() {
    for e in default_ensembles().iter().take(2) {
        let report = sandwich_report(&e.instances).unwrap();
        assert_eq!(report.len(), e.instances.len());
        for (c, i) in report.iter().zip(&e.instances) {
            assert_eq!(c.instance, i.label);
            assert!(c.pass, "{c}");
            assert!(c.note.contains("lower=") && c.note.contains("upper="));
        }
    }
}

#[test]
fn fig2_sandwich_reports_reference_variants() {
    let h = ChannelMatrix::diagonal(&[0.3, 0.1]).unwrap();
    let inst = [ampcap_core::audit::Instance::new("fig2", h, InputSpace::cube(2, 500.0).unwrap())];
    let c = &sandwich_report(&inst).unwrap()[0];
    assert!(c.note.contains("ref epi_paper_vol=8.78"), "{}", c.note);
}

#[test]
fn packing_gap_for_identity_balls() {
    for n in 1..=3 {
        let h = ChannelMatrix::identity(n).unwrap();
        let rhs = 0.5 * (std::f64::consts::PI * n as f64).log2();
        for a in [1.0, 10.0, 100.0] {
            let rows = certify_packing_gap(&h, &InputSpace::ball(a, n).unwrap()).unwrap();
            let gate = rows.iter().find(|r| r.check == "packing_gap").unwrap();
            assert!(gate.pass && gate.gating, "{gate}");
            assert!((gate.rhs_bits - rhs).abs() < 1e-12);
            assert!(rows.iter().all(|r| r.check != "packing_p2_chain_estimate"));
        }
    }
}

// The moment/EPI chain exceeds the right-hand side by log2(Γ(n/2+1)/S(n/2))
// at high amplitude, S being Stirling's approximation of Γ(n/2+1).
#[test]
fn p2_chain_excess_matches_the_stirling_defect() {
    for n in 1..=3usize {
        let h = ChannelMatrix::identity(n).unwrap();
        let rows = certify_packing_gap(&h, &InputSpace::ball(1e5, n).unwrap()).unwrap();
        let chain = rows.iter().find(|r| r.check == "packing_p2_chain").unwrap();
        assert!(!chain.gating);
        let m = n as f64 / 2.0;
        let ln_stirling = 0.5 * (2.0 * std::f64::consts::PI * m).ln() + m * m.ln() - m;
        let defect = (log_gamma(m + 1.0).unwrap() - ln_stirling) / std::f64::consts::LN_2;
        assert!((-chain.slack - defect).abs() < 1e-3, "n={n}: {} vs {defect}", -chain.slack);
    }
}

#[test]
fn packing_gap_is_rotation_invariant() {
    for seed in 0..3u64 {
        let h = random_invertible(3, 50 + seed);
        for x in [InputSpace::cube(3, 7.0).unwrap(), InputSpace::ball(7.0, 3).unwrap()] {
            let base = certify_packing_gap(&h, &x).unwrap();
            for r in 0..5u64 {
                let q = random_orthogonal(3, 900 + 10 * seed + r);
                let rotated = ChannelMatrix::new(q * h.entries()).unwrap();
                let rows = certify_packing_gap(&rotated, &x).unwrap();
                assert_eq!(rows.len(), base.len());
                for (a, b) in base.iter().zip(&rows) {
                    assert!((a.slack - b.slack).abs() < 1e-9, "{} {} vs {}", a.check, a.slack, b.slack);
                }
            }
        }
    }
}

#[test]
fn degenerate_spaces() {
    let h = ChannelMatrix::diagonal(&[0.3, 0.1]).unwrap();
    let rows = certify_packing_gap(&h, &InputSpace::new_box(vec![0.0, 5.0]).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.pass && r.rhs_bits == f64::INFINITY));
    let rows = certify_packing_gap(&h, &InputSpace::ball(0.0, 2).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.pass && r.lhs_bits == 0.0));
    let singular = ChannelMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
    assert!(certify_packing_gap(&singular, &InputSpace::cube(2, 1.0).unwrap()).is_err());
}

#[test]
fn scalar_pam_gap_sweep() {
    let h = ChannelMatrix::identity(1).unwrap();
    let c = pam_gap_constant();
    for k in 0..=40 {
        let a = 10f64.powf(k as f64 / 10.0);
        let x = InputSpace::cube(1, a).unwrap();
        let cert = certify_pam_gap(&h, &x).unwrap();
        assert!(cert.pass, "{cert}");
        if let Some(d) = single_point_duality_bound(&h, &x).unwrap() {
            assert!(d <= c);
        }
        assert!(cert.lhs_bits < 1.0);
    }
}

#[test]
fn fig2_pam_gap_value() {
    let h = ChannelMatrix::diagonal(&[0.3, 0.1]).unwrap();
    let c = certify_pam_gap(&h, &InputSpace::cube(2, 500.0).unwrap()).unwrap();
    assert!((c.lhs_bits - 1.290_241_115_098_691).abs() < 1e-9, "{c}");
    assert!((c.rhs_bits - 3.277).abs() < 1e-3);
}
