use exomotion::dataset::{generate_preprocessed_corpus, CorpusSpec, ModalitySelection};
use exomotion::experiments::{run_modality_ablation, AblationOptions, ModelChoice};

/// Full-size modality ablation. Trains 20 CNNs, so it takes well over an
/// hour on one core: run with `cargo test --release -- --ignored`.
#[test]
#[ignore]
fn combined_sensors_match_or_beat_every_single_modality() {
    let trials = generate_preprocessed_corpus(&CorpusSpec {
        per_class: 100,
        subjects: 3,
        seed: 2024,
    })
    .unwrap();
    let opts = AblationOptions {
        models: vec![ModelChoice::cnn()],
        ..AblationOptions::default()
    };
    let reports = run_modality_ablation(&trials, &[0, 1, 2, 3, 4], &opts).unwrap();
    let mean = |m: ModalitySelection| {
        reports
            .iter()
            .find(|r| r.condition.modality == Some(m))
            .unwrap()
            .mean_accuracy
    };
    let all = mean(ModalitySelection::All);
    for m in ModalitySelection::ALL.into_iter().filter(|&m| m != ModalitySelection::All) {
        assert!(all >= mean(m), "{} {:.4} beats all {all:.4}", m.name(), mean(m));
    }
}
