use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpt")).args(args).output().expect("spawn dpt")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn build_index(dir: &Path, corpus: &[u8], extra: &[&str]) -> (String, String) {
    let corpus_path = dir.join("corpus.txt");
    let index_path = dir.join("corpus.idx");
    fs::write(&corpus_path, corpus).unwrap();
    let mut args = vec![
        "build",
        corpus_path.to_str().unwrap(),
        "--out",
        index_path.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let out = dpt(&args);
    (stdout_of(&out), index_path.to_str().unwrap().to_string())
}

#[test]
fn build_then_count_queries_in_input_order() {
    let dir = tempfile::tempdir().unwrap();
    let (ledger, index) = build_index(dir.path(), b"banana", &["--pe-count", "2"]);
    assert!(ledger.starts_with("superstep\tw\th\tmode_breakdown\n"));
    assert!(ledger.lines().count() > 4, "build ledger lists every superstep");

    let queries = dir.path().join("q.txt");
    fs::write(&queries, "an\nna\nx\n").unwrap();
    let out = dpt(&["query", &index, queries.to_str().unwrap(), "--kind", "count"]);
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(&lines[..3], &["COUNT 2", "COUNT 2", "COUNT 0"]);
    assert!(text.contains("superstep\tw\th\tmode_breakdown"));
    assert!(text.contains("pe\treceived"));
}

#[test]
fn exists_enum_and_error_lines() {
    let dir = tempfile::tempdir().unwrap();
    let (_, index) = build_index(dir.path(), b"banana", &["--pe-count", "2"]);

    let queries = dir.path().join("q.txt");
    let long = "a".repeat(31);
    fs::write(&queries, format!("an\nzz\n{long}\n\nna\n")).unwrap();

    let out = dpt(&["query", &index, queries.to_str().unwrap(), "--kind", "exists"]);
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "EXISTS true");
    assert_eq!(lines[1], "EXISTS false");
    assert!(lines[2].starts_with("ERROR "), "overlong pattern: {}", lines[2]);
    assert!(lines[2].contains("31"));
    assert!(lines[3].starts_with("ERROR "), "empty line: {}", lines[3]);
    assert_eq!(lines[4], "EXISTS true");

    let out = dpt(&["query", &index, queries.to_str().unwrap(), "--kind", "enum"]);
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "ENUM 2,4");
    assert_eq!(lines[1], "ENUM");
    assert_eq!(lines[4], "ENUM 3,5");
}

#[test]
fn empty_query_file_runs_no_supersteps() {
    let dir = tempfile::tempdir().unwrap();
    let (_, index) = build_index(dir.path(), b"banana", &["--pe-count", "2"]);
    let queries = dir.path().join("q.txt");
    fs::write(&queries, "").unwrap();
    let out = dpt(&["query", &index, queries.to_str().unwrap()]);
    let text = stdout_of(&out);
    assert!(text.starts_with("superstep\tw\th\tmode_breakdown\npe\treceived\n"));
}

#[test]
fn query_output_is_seed_stable() {
    let dir = tempfile::tempdir().unwrap();
    let corpus: Vec<u8> = (0..4096u32).map(|i| b'a' + (i * i % 7) as u8).collect();
    let (_, index) = build_index(dir.path(), &corpus, &["--pe-count", "4", "--backing", "dfuds"]);
    let queries = dir.path().join("q.txt");
    fs::write(&queries, "ab\naba\ncag\nq\naaaa\n").unwrap();

    let args = ["query", &index, queries.to_str().unwrap(), "--kind", "count", "--seed", "7"];
    let first = stdout_of(&dpt(&args));
    let second = stdout_of(&dpt(&args));
    assert_eq!(first, second);

    let other = stdout_of(&dpt(&[
        "query",
        &index,
        queries.to_str().unwrap(),
        "--kind",
        "count",
        "--seed",
        "8",
    ]));
    // Different arrival draw, same answers.
    let counts = |s: &str| {
        s.lines().filter(|l| l.starts_with("COUNT")).map(str::to_owned).collect::<Vec<_>>()
    };
    assert_eq!(counts(&first), counts(&other));
}

#[test]
fn corpus_with_sentinel_byte_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("bad.bin");
    fs::write(&corpus, b"ab\0cd").unwrap();
    let out = dpt(&[
        "build",
        corpus.to_str().unwrap(),
        "--out",
        dir.path().join("x.idx").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sentinel"));
}

#[test]
fn bench_emits_both_index_rows_per_machine_size() {
    let dir = tempfile::tempdir().unwrap();
    let corpus: Vec<u8> = (0..2000u32).map(|i| b'a' + (i * 31 % 5) as u8).collect();
    let path = dir.path().join("corpus.txt");
    fs::write(&path, &corpus).unwrap();

    let args = [
        "bench",
        path.to_str().unwrap(),
        "--pe-counts",
        "1,2,4",
        "--q-per-pe",
        "8",
        "--seed",
        "3",
    ];
    let text = stdout_of(&dpt(&args));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "c,index,backing,supersteps,total_words,max_pe_words,remote_fetches,bits_per_char"
    );
    assert_eq!(lines.len(), 1 + 3 * 2);
    for (i, &c) in [1usize, 2, 4].iter().enumerate() {
        let dpt_row: Vec<&str> = lines[1 + 2 * i].split(',').collect();
        let dsa_row: Vec<&str> = lines[2 + 2 * i].split(',').collect();
        assert_eq!(dpt_row[..3], [&c.to_string(), "dpt", "louds"]);
        assert_eq!(dsa_row[..3], [&c.to_string(), "dsa", "sa"]);
        let dpt_ss: usize = dpt_row[3].parse().unwrap();
        let dsa_ss: usize = dsa_row[3].parse().unwrap();
        assert!(dpt_ss <= 4, "batch bound, got {dpt_ss}");
        assert!(dsa_ss > dpt_ss, "baseline binary search pays more barriers");
    }
    assert_eq!(text, stdout_of(&dpt(&args)), "byte-stable given the seed");

    let build_only = stdout_of(&dpt(&[
        "bench",
        path.to_str().unwrap(),
        "--pe-counts",
        "2",
        "--q-per-pe",
        "0",
    ]));
    assert_eq!(build_only.lines().count(), 3);
}
