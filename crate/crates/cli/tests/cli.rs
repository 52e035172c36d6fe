//! End-to-end tests of the `stadtbild` binary: exit-code contract,
//! offline mock runs, resume, reporting, and site emission.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_stadtbild")
}

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(binary())
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

/// Write a two-party corpus, mock script, and run config into `dir`.
fn write_fixtures(dir: &Path, failures: &[&str]) -> PathBuf {
    let texts = dir.join("texts");
    std::fs::create_dir_all(&texts).unwrap();
    for (id, program_topic, compass_topic) in
        [("alpha", "Radwege", "Parkgebühren"), ("beta", "Schulen", "Grünflächen")]
    {
        std::fs::write(
            texts.join(format!("{id}_program.txt")),
            format!(
                "Die Partei {id} fordert mehr {program_topic} in der Stadt. Unsere Schulen \
                 sollen saniert werden. Gemeinsam gestalten wir die Zukunft."
            ),
        )
        .unwrap();
        std::fs::write(
            texts.join(format!("{id}_compass.txt")),
            format!(
                "Die Partei {id} stimmt der Frage nach {compass_topic} zu. Sie lehnt höhere \
                 Abgaben ab. Der Schulsanierung stimmt sie zu."
            ),
        )
        .unwrap();
    }

    let mut corpus = String::new();
    for id in ["alpha", "beta"] {
        corpus.push_str(&format!(
            "[[party]]\nid = \"{id}\"\nname = \"Partei {}\"\nprogram = \"texts/{id}_program.txt\"\ncompass = \"texts/{id}_compass.txt\"\n\n",
            id.to_uppercase()
        ));
    }
    std::fs::write(dir.join("corpus.toml"), corpus).unwrap();

    let script = serde_json::json!({
        "responses": {
            "Translate the following sentences from German into English":
                "The party demands better cycling infrastructure and greener public spaces.",
            "Summarize the following political program":
                "A greener, bike-friendly city with modern schools.",
            "Identify five important visual aspects":
                "<think>The program focuses on cycling and greening measures.</think>\
                 Expanded Urban Green Spaces, Safer Bicycle Lane Network, \
                 Renovated Modern School Buildings, Clean Efficient Public Transport, \
                 Lively Central Market Squares",
            "Translate the following sentences from English into German: The program focuses":
                "Das Programm konzentriert sich auf Radverkehr und Begrünung.",
            "Expanded Urban Green Spaces":
                "Erweiterte Grünflächen, Sicheres Radwegenetz, Sanierte Schulgebäude, \
                 Sauberer Nahverkehr, Lebendige Marktplätze"
        },
        "failures": failures,
    });
    std::fs::write(
        dir.join("mock_script.json"),
        serde_json::to_string_pretty(&script).unwrap(),
    )
    .unwrap();

    let backend = |name: &str, model: &str, watts: f64| {
        format!(
            "[backends.{name}]\nname = \"{name}\"\nbase_url = \"http://127.0.0.1:18080\"\n\
             model_id = \"{model}\"\navg_power_w = {watts}\nsupports_seed = true\n"
        )
    };
    let config = format!(
        "corpus = \"corpus.toml\"\nout_dir = \"out\"\nbase_seed = 7\n\
         image_width = 32\nimage_height = 32\nmock_script = \"mock_script.json\"\n\n{}{}{}{}{}",
        backend("translate_de_en", "translate-model", 322.58),
        backend("summarize", "summarize-model", 238.10),
        backend("reason", "reason-model", 234.84),
        backend("translate_en_de", "translate-model", 316.46),
        backend("image_gen", "image-model", 320.71),
    );
    let config_path = dir.join("config.toml");
    std::fs::write(&config_path, config).unwrap();
    config_path
}

#[test]
fn validate_reports_counts_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path(), &[]);
    let output = run(&["validate", "corpus.toml"], dir.path());
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("alpha"));
    assert!(text.contains("program"));
    assert!(text.contains("compass_responses"));
}

#[test]
fn validate_names_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path(), &[]);
    std::fs::remove_file(dir.path().join("texts/beta_program.txt")).unwrap();
    let output = run(&["validate", "corpus.toml"], dir.path());
    assert_ne!(exit_code(&output), 0);
    assert!(stderr(&output).contains("beta_program.txt"));
}

#[test]
fn validate_chunk_counts_use_ceiling() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path(), &[]);
    let body: String = (0..25)
        .map(|i| format!("Satz Nummer {i} endet hier."))
        .collect::<Vec<_>>()
        .join(" ");
    std::fs::write(dir.path().join("texts/alpha_program.txt"), body).unwrap();
    let output = run(&["validate", "corpus.toml", "--chunk-size", "10"], dir.path());
    assert_eq!(exit_code(&output), 0);
    let row = stdout(&output)
        .lines()
        .find(|l| l.starts_with("alpha") && l.contains("program "))
        .map(str::to_string)
        .or_else(|| {
            stdout(&output)
                .lines()
                .find(|l| l.starts_with("alpha"))
                .map(str::to_string)
        })
        .unwrap();
    let fields: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(fields[2], "25", "sentences: {row}");
    assert_eq!(fields[3], "3", "chunks: {row}");
}

#[test]
fn mock_run_completes_and_prints_report() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path(), &[]);
    let output = run(&["run", "--config", "config.toml", "--mock"], dir.path());
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("Total"), "report printed: {text}");
    assert!(text.contains("manifest:"));

    let manifest_path = dir.path().join("out/manifest.json");
    assert!(manifest_path.is_file());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    let artifacts = manifest["artifacts"].as_array().unwrap();
    let image_count = artifacts
        .iter()
        .filter(|a| a["kind"] == "image")
        .count();
    assert_eq!(image_count, 20, "2 parties x 2 sources x 5 variants");
}

#[test]
fn scripted_failure_exits_one_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path(), &["Identify five important visual aspects"]);
    let output = run(&["run", "--config", "config.toml", "--mock"], dir.path());
    assert_eq!(exit_code(&output), 1);
    assert!(stderr(&output).contains("did not complete"));
    assert!(dir.path().join("out/manifest.json").is_file());
}

#[test]
fn resume_of_complete_run_exits_zero_and_keeps_records() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path(), &[]);
    let first = run(&["run", "--config", "config.toml", "--mock"], dir.path());
    assert_eq!(exit_code(&first), 0, "stderr: {}", stderr(&first));
    let before = std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap();

    let second = run(
        &["run", "--config", "config.toml", "--mock", "--resume"],
        dir.path(),
    );
    assert_eq!(exit_code(&second), 0, "stderr: {}", stderr(&second));
    let after = std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap();

    // Reused stages keep their original timestamps, so the records are
    // byte-identical across the resume.
    let json = |s: &str| -> serde_json::Value { serde_json::from_str(s).unwrap() };
    assert_eq!(json(&before)["stage_records"], json(&after)["stage_records"]);
    assert_eq!(json(&before)["run_id"], json(&after)["run_id"]);
}

#[test]
fn edited_corpus_forces_fresh_run_id_on_resume() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path(), &[]);
    let first = run(&["run", "--config", "config.toml", "--mock"], dir.path());
    assert_eq!(exit_code(&first), 0);
    let before = std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap();

    // Append a comment: corpus descriptor bytes change, hash goes stale.
    let corpus_path = dir.path().join("corpus.toml");
    let mut corpus = std::fs::read_to_string(&corpus_path).unwrap();
    corpus.push_str("\n# edited\n");
    std::fs::write(&corpus_path, corpus).unwrap();

    let second = run(
        &["run", "--config", "config.toml", "--mock", "--resume"],
        dir.path(),
    );
    assert_eq!(exit_code(&second), 0, "stderr: {}", stderr(&second));
    assert!(stderr(&second).contains("fresh run"));
    let after = std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap();
    let json = |s: &str| -> serde_json::Value { serde_json::from_str(s).unwrap() };
    assert_ne!(json(&before)["run_id"], json(&after)["run_id"]);
}

#[test]
fn report_prints_totals_and_applies_correction() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path(), &[]);
    let output = run(&["run", "--config", "config.toml", "--mock"], dir.path());
    assert_eq!(exit_code(&output), 0);

    // Replace the mock run's (microsecond) energy rows with realistic
    // measured figures so correction effects are visible at two decimals.
    let manifest_path = dir.path().join("out/manifest.json");
    let mut manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    let rows = [
        ("translate_de_en", 132.06, 322.58),
        ("summarize", 5.04, 238.10),
        ("reason", 360.24, 234.84),
        ("translate_en_de", 18.96, 316.46),
        ("image_gen", 22.45, 320.71),
    ];
    manifest["energy"] = serde_json::json!(rows
        .iter()
        .map(|(stage, minutes, watts)| {
            let energy = watts * minutes / 60.0 / 1000.0;
            serde_json::json!({
                "stage": stage,
                "duration_min": minutes,
                "avg_power_w": watts,
                "energy_kwh": energy,
                "emissions_kg": energy * 0.380,
            })
        })
        .collect::<Vec<_>>());
    std::fs::write(&manifest_path, manifest.to_string()).unwrap();

    let base = run(&["report", "out/manifest.json"], dir.path());
    assert_eq!(exit_code(&base), 0, "stderr: {}", stderr(&base));
    let base_text = stdout(&base);
    assert!(base_text.contains("Total"));
    assert!(base_text.contains("538.75"), "{base_text}");
    assert!(base_text.contains("0.90"), "{base_text}");

    let corrected = run(
        &["report", "out/manifest.json", "--correction", "1.25"],
        dir.path(),
    );
    assert_eq!(exit_code(&corrected), 0);
    let corrected_text = stdout(&corrected);
    assert!(corrected_text.contains("1.12"), "{corrected_text}");
    assert_ne!(base_text, corrected_text);
}

#[test]
fn report_rejects_corrupt_manifest() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("manifest.json"), "{ not json").unwrap();
    let output = run(&["report", "manifest.json"], dir.path());
    assert_eq!(exit_code(&output), 2);
    let missing = run(&["report", "absent.json"], dir.path());
    assert_eq!(exit_code(&missing), 2);
}

#[test]
fn site_emission_and_integrity_failure() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path(), &[]);
    let output = run(&["run", "--config", "config.toml", "--mock"], dir.path());
    assert_eq!(exit_code(&output), 0);

    let site = run(
        &["site", "out/manifest.json", "--out", "bundle"],
        dir.path(),
    );
    assert_eq!(exit_code(&site), 0, "stderr: {}", stderr(&site));
    assert!(dir.path().join("bundle/index.html").is_file());
    assert!(dir.path().join("bundle/data.json").is_file());
    assert!(dir.path().join("bundle/de/index.html").is_file());
    assert!(dir.path().join("bundle/en/party/alpha.html").is_file());

    // Repeated emission is byte-stable.
    let site2 = run(
        &["site", "out/manifest.json", "--out", "bundle2"],
        dir.path(),
    );
    assert_eq!(exit_code(&site2), 0);
    let digest = |root: &Path| {
        let mut files = Vec::new();
        fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
            let mut entries: Vec<_> =
                std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
            entries.sort();
            for path in entries {
                if path.is_dir() {
                    walk(root, &path, out);
                } else {
                    out.push((
                        path.strip_prefix(root).unwrap().display().to_string(),
                        std::fs::read(&path).unwrap(),
                    ));
                }
            }
        }
        walk(root, root, &mut files);
        files
    };
    assert_eq!(
        digest(&dir.path().join("bundle")),
        digest(&dir.path().join("bundle2"))
    );

    // Deleting a stored image makes emission fail, naming the invariant.
    let store_dir = dir.path().join("out/store");
    let png = std::fs::read_dir(&store_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "png"))
        .unwrap();
    std::fs::remove_file(&png).unwrap();
    let broken = run(
        &["site", "out/manifest.json", "--out", "bundle3"],
        dir.path(),
    );
    assert_eq!(exit_code(&broken), 1);
    assert!(stderr(&broken).contains("MissingArtifact"), "{}", stderr(&broken));
}

#[test]
fn prompts_show_dumps_templates() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&["prompts", "show"], dir.path());
    assert_eq!(exit_code(&output), 0);
    let text = stdout(&output);
    assert!(text.contains("Identify five important visual aspects"));
    assert!(text.contains("Translate the following sentences from German into English"));
    assert!(text.contains("version 1"));
}

#[test]
fn bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("config.toml"), "this is { not toml").unwrap();
    let output = run(&["run", "--config", "config.toml", "--mock"], dir.path());
    assert_eq!(exit_code(&output), 2);
}
