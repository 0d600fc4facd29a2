//! End-to-end tests of the `quadfuse` binary: flags, exit codes, output
//! shape and determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use quadfuse::model::Uri;
use quadfuse::nquads::parse_quads;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quadfuse"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("quadfuse-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("process terminated by signal")
}

const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
const GEO_LONG: &str = "http://www.w3.org/2003/01/geo/wgs84_pos#long";
const SKOS_PREF: &str = "http://www.w3.org/2004/02/skos/core#prefLabel";
const FB_LONG: &str = "http://rdf.freebase.com/ns/location.geocode.longitude";
const DB_BERLIN: &str = "http://dbpedia.org/resource/Berlin";
const FB_BERLIN: &str = "http://rdf.freebase.com/ns/en.berlin";
const NYT_BERLIN: &str = "http://data.nytimes.com/N50987";
const OWL_SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";
const ODCS_EQUIVALENT: &str = "http://opendata.cz/infrastructure/odcleanstore/equivalent";
const SCORE: &str = "http://opendata.cz/infrastructure/odcleanstore/score";

struct Example {
    dir: PathBuf,
    data: PathBuf,
    links: PathBuf,
    metadata: PathBuf,
    policy: PathBuf,
}

fn berlin_example(tag: &str) -> Example {
    let dir = temp_dir(tag);
    let data = write(
        &dir,
        "data.nq",
        &format!(
            "<{DB_BERLIN}> <{RDFS_LABEL}> \"Berlin\" <http://dbpedia.org> .\n\
             <{DB_BERLIN}> <{GEO_LONG}> \"13.399\" <http://dbpedia.org> .\n\
             <{FB_BERLIN}> <{RDFS_LABEL}> \"Berlin\" <http://rdf.freebase.com> .\n\
             <{FB_BERLIN}> <{FB_LONG}> \"13.383\" <http://rdf.freebase.com> .\n\
             <{NYT_BERLIN}> <{SKOS_PREF}> \"Berlin (Germany)\" <http://data.nytimes.com> .\n"
        ),
    );
    let links = write(
        &dir,
        "links.nt",
        &format!(
            "<{RDFS_LABEL}> <{ODCS_EQUIVALENT}> <{SKOS_PREF}> .\n\
             <{GEO_LONG}> <{ODCS_EQUIVALENT}> <{FB_LONG}> .\n\
             <{DB_BERLIN}> <{OWL_SAME_AS}> <{FB_BERLIN}> .\n\
             <{DB_BERLIN}> <{OWL_SAME_AS}> <{NYT_BERLIN}> .\n"
        ),
    );
    let metadata = write(
        &dir,
        "metadata.nt",
        &format!(
            "<http://dbpedia.org> <{SCORE}> \"0.9\" .\n\
             <http://rdf.freebase.com> <{SCORE}> \"0.8\" .\n\
             <http://data.nytimes.com> <{SCORE}> \"0.8\" .\n"
        ),
    );
    let policy = write(
        &dir,
        "policy.txt",
        &format!(
            "default function=ALL\n\
             property <{RDFS_LABEL}> function=BEST\n\
             property <{GEO_LONG}> function=AVG\n"
        ),
    );
    Example {
        dir,
        data,
        links,
        metadata,
        policy,
    }
}

fn run_example(example: &Example, out_name: &str, extra: &[&str]) -> Output {
    let out = example.dir.join(out_name);
    bin()
        .arg("--data")
        .arg(&example.data)
        .arg("--sameas")
        .arg(&example.links)
        .arg("--metadata")
        .arg(&example.metadata)
        .arg("--policy")
        .arg(&example.policy)
        .arg("--output")
        .arg(&out)
        .arg("--prefer-namespace")
        .arg("http://dbpedia.org/")
        .arg("--prefer-namespace")
        .arg("http://www.w3.org/")
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn berlin_example_produces_best_label_and_average_longitude() {
    let example = berlin_example("berlin");
    let output = run_example(&example, "out.nq", &[]);
    assert_eq!(
        code(&output),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );

    let text = fs::read_to_string(example.dir.join("out.nq")).unwrap();
    // 2 resolved quads, each: 1 data + 2 sources + 1 quality
    assert_eq!(text.lines().count(), 8, "unexpected output:\n{text}");

    let parsed = parse_quads(text.as_bytes(), &Uri::new("urn:d"), true).unwrap();
    let label = parsed
        .quads
        .iter()
        .find(|q| q.predicate.as_str() == RDFS_LABEL)
        .expect("label quad present");
    assert_eq!(label.subject, quadfuse::model::Node::uri(DB_BERLIN));
    assert_eq!(label.object.text(), "Berlin");

    let long = parsed
        .quads
        .iter()
        .find(|q| q.predicate.as_str() == GEO_LONG)
        .expect("longitude quad present");
    let value: f64 = long.object.text().parse().unwrap();
    assert!((value - 13.391).abs() < 1e-9, "longitude {value}");

    // provenance: both resolved quads name dbpedia and freebase
    let sources: Vec<&str> = parsed
        .quads
        .iter()
        .filter(|q| q.predicate.as_str() == "urn:quadfuse:sourceGraph")
        .map(|q| q.object.text())
        .collect();
    assert_eq!(sources.len(), 4);
    assert!(sources.contains(&"http://dbpedia.org"));
    assert!(sources.contains(&"http://rdf.freebase.com"));
    assert!(!sources.contains(&"http://data.nytimes.com"));

    // quality annotations are xsd:double literals in [0,1]
    for quad in parsed
        .quads
        .iter()
        .filter(|q| q.predicate.as_str() == "urn:quadfuse:quality")
    {
        let quality: f64 = quad.object.text().parse().unwrap();
        assert!((0.0..=1.0).contains(&quality));
    }
}

#[test]
fn output_is_byte_identical_across_runs_and_worker_counts() {
    let example = berlin_example("determinism");
    run_example(&example, "a.nq", &["--workers", "1"]);
    run_example(&example, "b.nq", &["--workers", "1"]);
    run_example(&example, "c.nq", &["--workers", "4"]);
    let a = fs::read(example.dir.join("a.nq")).unwrap();
    let b = fs::read(example.dir.join("b.nq")).unwrap();
    let c = fs::read(example.dir.join("c.nq")).unwrap();
    assert_eq!(a, b, "repeated runs differ");
    assert_eq!(a, c, "worker count changed the output");
}

#[test]
fn canonical_export_and_report() {
    let example = berlin_example("exports");
    let export = example.dir.join("canonical.nt");
    let report = example.dir.join("report.txt");
    let output = run_example(
        &example,
        "out.nq",
        &[
            "--export-canonical",
            export.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&output), 0);

    let export_text = fs::read_to_string(&export).unwrap();
    // preferred namespace makes the DBpedia URI canonical
    assert!(export_text.contains(&format!("<{FB_BERLIN}> <{OWL_SAME_AS}> <{DB_BERLIN}> .")));
    assert!(export_text.contains(&format!("<{NYT_BERLIN}> <{OWL_SAME_AS}> <{DB_BERLIN}> .")));
    // fixed points are not exported
    assert!(!export_text.contains(&format!("<{DB_BERLIN}> <{OWL_SAME_AS}> <{DB_BERLIN}>")));

    let report_text = fs::read_to_string(&report).unwrap();
    assert!(report_text.contains("all.ext_completeness=1.0000"));
    assert!(report_text.contains("fused.ext_conciseness=1.0000"));
    assert!(report_text.contains("fused.consistency=1.0000"));
}

#[test]
fn ntriples_input_gets_per_file_default_graph() {
    let dir = temp_dir("defaultgraph");
    let data = write(&dir, "plain.nt", "<urn:s> <urn:p> \"v\" .\n");
    let out = dir.join("out.nq");
    let output = bin()
        .arg("--data")
        .arg(&data)
        .arg("--output")
        .arg(&out)
        .arg("--default-graph-base")
        .arg("urn:source:")
        .output()
        .unwrap();
    assert_eq!(code(&output), 0);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("<urn:source:plain.nt>"), "output:\n{text}");
}

#[test]
fn missing_output_flag_exits_2_with_usage() {
    let output = bin().arg("--data").arg("/nonexistent.nq").output().unwrap();
    assert_eq!(code(&output), 2);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.to_lowercase().contains("usage"), "stderr: {stderr}");
}

#[test]
fn invalid_worker_count_exits_2() {
    let dir = temp_dir("workers");
    let output = bin()
        .arg("--output")
        .arg(dir.join("out.nq"))
        .arg("--workers")
        .arg("0")
        .output()
        .unwrap();
    assert_eq!(code(&output), 2);
}

#[test]
fn unreadable_data_exits_3() {
    let dir = temp_dir("io");
    let output = bin()
        .arg("--data")
        .arg("/nonexistent/missing.nq")
        .arg("--output")
        .arg(dir.join("out.nq"))
        .output()
        .unwrap();
    assert_eq!(code(&output), 3);
}

#[test]
fn bad_policy_exits_4() {
    let dir = temp_dir("policy");
    let policy = write(&dir, "bad.policy", "default function=NOSUCH\n");
    let output = bin()
        .arg("--policy")
        .arg(&policy)
        .arg("--output")
        .arg(dir.join("out.nq"))
        .output()
        .unwrap();
    assert_eq!(code(&output), 4);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("NOSUCH"), "stderr: {stderr}");
}

#[test]
fn strict_parse_failure_exits_5_and_failsoft_succeeds() {
    let dir = temp_dir("strict");
    let data = write(
        &dir,
        "broken.nq",
        "not a statement\n<urn:s> <urn:p> \"v\" <urn:g> .\n",
    );
    let strict = bin()
        .arg("--data")
        .arg(&data)
        .arg("--output")
        .arg(dir.join("strict-out.nq"))
        .arg("--strict")
        .output()
        .unwrap();
    assert_eq!(code(&strict), 5);

    let lenient = bin()
        .arg("--data")
        .arg(&data)
        .arg("--output")
        .arg(dir.join("failsoft-out.nq"))
        .output()
        .unwrap();
    assert_eq!(code(&lenient), 0);
    let stderr = String::from_utf8_lossy(&lenient.stderr);
    // skipped lines are accounted for in the summary
    assert!(stderr.contains("1 parse issues"), "stderr: {stderr}");
    assert!(stderr.contains("broken.nq:1"), "stderr: {stderr}");
}
