use povmforge_core::dilation::{dilation_action, kraus_operators, with_ancillas};
use povmforge_core::povm::build_povm;
use povmforge_core::random::{random_state, seeded};
use povmforge_core::sim::run;
use povmforge_core::synth::compile_dilation;
use povmforge_core::{verify, CompileSource, PovmParams, Statevector, Tolerances, VerifyConfig};

#[test]
fn compiled_circuits_honor_the_contract_for_random_parameters() {
    let mut rng = seeded(2024);
    for _ in 0..4 {
        let params = PovmParams::random(&mut rng);
        let kraus = kraus_operators(&build_povm(&params)).unwrap();
        for source in [CompileSource::Oracle, CompileSource::PaperProduct] {
            let compiled = compile_dilation(&params, source).unwrap();
            assert!(compiled.circuit.gates.iter().all(|g| g.controls().len() <= 1));
            for _ in 0..25 {
                let psi = random_state(4, &mut rng);
                let input = Statevector::from_vector(5, &with_ancillas(&psi)).unwrap();
                let out = run(&compiled.circuit, &input).unwrap().to_vector();
                let want = dilation_action(&kraus, &psi).unwrap();
                let residual = out.max_abs_diff(&want);
                assert!(residual < 1e-7, "{source:?} {params:?}: residual {residual}");
            }
        }
    }
}

#[test]
fn verify_passes_for_random_parameters() {
    let mut rng = seeded(77);
    let config = VerifyConfig {
        samples: 10,
        shots: 4000,
        ..VerifyConfig::default()
    };
    for _ in 0..3 {
        let params = PovmParams::random(&mut rng);
        let report = verify(&params, &config).unwrap();
        assert!(report.passed(), "{params:?}: {report:?}");
    }
}

#[test]
fn verify_fails_under_an_impossible_tolerance() {
    let params = PovmParams::new(2.0, 2.0, 2.0, 2.0, 1.0).unwrap();
    let config = VerifyConfig {
        tolerances: Tolerances::uniform(0.0),
        samples: 5,
        shots: 1000,
        ..VerifyConfig::default()
    };
    assert!(!verify(&params, &config).unwrap().passed());
}
