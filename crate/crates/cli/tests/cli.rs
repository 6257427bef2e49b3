mod common;

use std::collections::HashMap;
use std::fs;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::FixtureServer;

use serde_json::Value;

fn corpuskit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corpuskit"))
        .args(args)
        .env_remove("CORPUSKIT_CONFIG")
        .output()
        .expect("run corpuskit")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn pashto_words(n: usize, salt: &str) -> String {
    (0..n).map(|i| format!("پښتو{salt}{i}")).collect::<Vec<_>>().join(" ")
}

fn record(id: &str, source: &str, text: &str) -> String {
    serde_json::json!({ "id": id, "source": source, "text": text }).to_string()
}

/// The pipeline module's 5-document corpus: one English, one duplicate pair
/// differing in whitespace, one short, one clean.
fn five_doc_config(dir: &Path) -> PathBuf {
    let dup = pashto_words(15, "b");
    let lines = [
        record("1", "s", "this document is written entirely in english words and nothing else"),
        record("2", "s", &dup),
        record("3", "s", &dup.replace(' ', "  ")),
        record("4", "s", &pashto_words(8, "c")),
        record("5", "s", &pashto_words(12, "a")),
    ];
    fs::write(dir.join("s.jsonl"), lines.join("\n") + "\n").unwrap();
    let cfg = dir.join("corpus.toml");
    fs::write(
        &cfg,
        "[pipeline]\noutput_dir = \"out\"\n\n[source.s]\ncategory = \"web_crawl\"\nkind = \"dump\"\ninput = \"s.jsonl\"\n",
    )
    .unwrap();
    cfg
}

fn shard_count(dir: &Path) -> usize {
    fs::read_dir(dir)
        .map(|rd| rd.filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".jsonl")).count())
        .unwrap_or(0)
}

#[test]
fn pipeline_prints_table_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = five_doc_config(dir.path());
    let o = corpuskit(&["--config", s(&cfg), "pipeline"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    for (stage, n, pct) in [("langid", 1, "20.0%"), ("dedup", 1, "20.0%"), ("min_tokens", 1, "20.0%")] {
        let line = out.lines().find(|l| l.starts_with(stage)).unwrap_or_else(|| panic!("no {stage} row:\n{out}"));
        assert!(line.contains(&format!(" {n} ")) && line.ends_with(pct), "{line}");
    }
    let total = out.lines().find(|l| l.starts_with("total rejected")).unwrap();
    assert!(total.contains(" 3 ") && total.ends_with("60.0%"), "{total}");
    let kept = out.lines().find(|l| l.starts_with("retained ")).unwrap();
    assert!(kept.contains(" 2 ") && kept.ends_with("40.0%"), "{kept}");

    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    let n = |k: &str| report[k].as_u64().unwrap();
    assert_eq!(n("raw_docs"), n("retained_docs") + n("removed_langid") + n("removed_dedup") + n("removed_min_tokens"));
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema_version"], 1);
    assert!(manifest["run_timestamp"].is_null());
    assert_eq!(shard_count(&dir.path().join("out")), 1);
}

#[test]
fn pipeline_dry_run_writes_no_shards() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = five_doc_config(dir.path());
    let o = corpuskit(&["--config", s(&cfg), "--dry-run", "pipeline"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("min_tokens"));
    assert_eq!(shard_count(&dir.path().join("out")), 0);
}

#[test]
fn pipeline_output_dir_and_jobs_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = five_doc_config(dir.path());
    let alt = dir.path().join("alt");
    let o = corpuskit(&["--config", s(&cfg), "--output-dir", s(&alt), "--jobs", "3", "pipeline"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(alt.join("report.json").is_file());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn config_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = five_doc_config(dir.path());
    let o = Command::new(env!("CARGO_BIN_EXE_corpuskit"))
        .arg("pipeline")
        .env("CORPUSKIT_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn missing_input_exits_2_naming_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = five_doc_config(dir.path());
    fs::remove_file(dir.path().join("s.jsonl")).unwrap();
    let o = corpuskit(&["--config", s(&cfg), "pipeline"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("s.jsonl"), "{}", stderr(&o));
}

#[test]
fn invalid_config_exits_2_naming_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[pipeline]\nmin_tokens = -3\n").unwrap();
    let o = corpuskit(&["--config", s(&cfg), "pipeline"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("min_tokens"), "{}", stderr(&o));

    fs::write(&cfg, "[pipeline]\nbogus_key = 1\n").unwrap();
    let o = corpuskit(&["--config", s(&cfg), "pipeline"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus_key"), "{}", stderr(&o));
}

#[test]
fn bad_selector_rejected_at_load() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "[source.w]\ncategory = \"news_radio\"\nkind = \"crawl\"\ninput = \"w.jsonl\"\n\
         start_urls = [\"http://127.0.0.1:9/pa/\"]\ncontent_selector = \"div > p\"\n",
    )
    .unwrap();
    let o = corpuskit(&["--config", s(&cfg), "pipeline"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("content_selector"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(corpuskit(&["pipeline", "--nope"]).status.code(), Some(2));
    assert_eq!(corpuskit(&["pipeline"]).status.code(), Some(2));
}

fn shard_line(source: &str, id: &str, text: &str) -> String {
    serde_json::json!({
        "id": id, "source": source, "text": text,
        "script_ratio": 1.0, "token_count": text.split_whitespace().count(),
        "content_hash": "0".repeat(64),
    })
    .to_string()
}

fn write_shard(dir: &Path, name: &str, lines: &[String]) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, lines.join("\n") + "\n").unwrap();
    p
}

#[test]
fn stats_zipf_on_exact_power_law() {
    let dir = tempfile::tempdir().unwrap();
    // 14400 / r^2 for ranks 1..4
    let text: Vec<String> = [("a", 14400), ("b", 3600), ("c", 1600), ("d", 900)]
        .iter()
        .map(|(w, f)| vec![*w; *f].join(" "))
        .collect();
    let shard = write_shard(dir.path(), "s-00000.jsonl", &[shard_line("s", "1", &text.join(" "))]);
    let out_dir = dir.path().join("stats");
    let o = corpuskit(&["--output-dir", s(&out_dir), "stats", s(&shard), "--zipf"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("alpha=2.000 r2=1.000"), "{}", stdout(&o));
    let z: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("zipf.json")).unwrap()).unwrap();
    assert_eq!(z["schema_version"], 1);
    assert_eq!(z["zipf"]["n_ranks"], 4);
}

#[test]
fn stats_zipf_degenerate_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let shard = write_shard(dir.path(), "s-00000.jsonl", &[shard_line("s", "1", "same same same")]);
    let o = corpuskit(&["--dry-run", "stats", s(&shard), "--zipf"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("degenerate fit"), "{}", stderr(&o));
}

fn abc_shards(dir: &Path) -> PathBuf {
    let shards = dir.join("shards");
    fs::create_dir_all(&shards).unwrap();
    write_shard(&shards, "A-00000.jsonl", &[shard_line("A", "a1", "x y"), shard_line("A", "a2", "x"), shard_line("A", "a3", "y")]);
    write_shard(&shards, "B-00000.jsonl", &[shard_line("B", "b1", "y z"), shard_line("B", "b2", "z")]);
    write_shard(&shards, "C-00000.jsonl", &[shard_line("C", "c1", "z")]);
    shards
}

#[test]
fn stats_marginal_and_growth() {
    let dir = tempfile::tempdir().unwrap();
    let shards = abc_shards(dir.path());
    let out_dir = dir.path().join("stats");
    let o = corpuskit(&["--output-dir", s(&out_dir), "stats", s(&shards), "--marginal", "--growth"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let marginal = |src: &str| -> u64 {
        let line = out.lines().rev().find(|l| l.split_whitespace().next() == Some(src)).unwrap();
        line.split_whitespace().last().unwrap().parse().unwrap()
    };
    assert_eq!((marginal("A"), marginal("B"), marginal("C")), (1, 0, 0));

    let tsv = fs::read_to_string(out_dir.join("growth.tsv")).unwrap();
    let rows: Vec<Vec<&str>> = tsv.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows, [vec!["A", "3", "2"], vec!["B", "2", "3"], vec!["C", "1", "3"]]);
    let m: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("marginal.json")).unwrap()).unwrap();
    assert_eq!(m["marginal"]["A"]["marginal"], 1);
}

#[test]
fn saved_index_round_trips_through_stats() {
    let dir = tempfile::tempdir().unwrap();
    let shards = abc_shards(dir.path());
    let idx = dir.path().join("vocab.tsv");
    let o = corpuskit(&["--dry-run", "stats", s(&shards), "--save-index", s(&idx)]);
    assert!(o.status.success());
    assert!(!idx.exists(), "dry run must not write");
    let o = corpuskit(&["--output-dir", s(dir.path()), "stats", s(&shards), "--save-index", s(&idx)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let from_shards = stdout(&o).lines().next().unwrap().to_owned();
    let o = corpuskit(&["--dry-run", "stats", s(&idx)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().next().unwrap(), from_shards);
    assert_eq!(from_shards, "sources=3 docs=6 tokens=8 types=3");
}

#[test]
fn stats_missing_input_exits_2() {
    let o = corpuskit(&["stats", "/definitely/not/here.jsonl"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/definitely/not/here.jsonl"));
}

fn ablation_rows(out: &str) -> HashMap<String, Vec<String>> {
    out.lines()
        .skip(1)
        .filter(|l| !l.starts_with("wrote"))
        .map(|l| {
            let cols: Vec<String> = l.split_whitespace().map(str::to_owned).collect();
            let n = cols.len();
            (cols[..n - 4].join(" "), cols[n - 4..].to_vec())
        })
        .collect()
}

#[test]
fn ablate_three_groups() {
    let dir = tempfile::tempdir().unwrap();
    let shards = abc_shards(dir.path());
    let groups = dir.path().join("groups.tsv");
    fs::write(&groups, "ga\tA\ngb\tB\ngc\tC\nempty\n").unwrap();
    let tokens = dir.path().join("tokens.tsv");
    fs::write(&tokens, "PER\tx\nPER\tq\nLOC\tz\n").unwrap();
    let o = corpuskit(&[
        "--output-dir", s(dir.path()), "ablate", s(&shards), "--groups", s(&groups), "--tokens", s(&tokens),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = ablation_rows(&stdout(&o));
    // docs, vocab remaining, lost, coverage of {x, q, z}
    assert_eq!(rows["(full corpus)"], ["0", "3", "0.0%", "66.7%"]);
    assert_eq!(rows["ga"], ["3", "2", "33.3%", "33.3%"]);
    assert_eq!(rows["gb"], ["2", "3", "0.0%", "66.7%"]);
    assert_eq!(rows["gc"], ["1", "3", "0.0%", "66.7%"]);
    assert_eq!(rows["empty"], ["0", "3", "0.0%", "66.7%"]);
    let j: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("ablation.json")).unwrap()).unwrap();
    assert_eq!(j["schema_version"], 1);
    assert_eq!(j["ablation"].as_array().unwrap().len(), 5);
}

#[test]
fn ablate_single_group_loses_everything() {
    let dir = tempfile::tempdir().unwrap();
    let shards = abc_shards(dir.path());
    let groups = dir.path().join("groups.tsv");
    fs::write(&groups, "all\tA\nall\tB\nall\tC\n").unwrap();
    let o = corpuskit(&["--dry-run", "ablate", s(&shards), "--groups", s(&groups)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(ablation_rows(&stdout(&o))["all"], ["6", "0", "100.0%", "-"]);
}

#[test]
fn ablate_overlapping_groups_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let shards = abc_shards(dir.path());
    let groups = dir.path().join("groups.tsv");
    fs::write(&groups, "g1\tA\ng1\tB\ng2\tB\ng2\tC\n").unwrap();
    let o = corpuskit(&["--dry-run", "ablate", s(&shards), "--groups", s(&groups)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`B`"), "{}", stderr(&o));
}

#[test]
fn coverage_all_tokens_row() {
    let dir = tempfile::tempdir().unwrap();
    let planted: Vec<String> = (0..2062).map(|i| format!("tok{i}")).collect();
    let shards = dir.path().join("shards");
    fs::create_dir_all(&shards).unwrap();
    write_shard(&shards, "s-00000.jsonl", &[shard_line("s", "1", &planted.join(" "))]);
    let mut lines = String::new();
    for i in 0..2151 {
        let cat = ["PER", "LOC", "ORG"][i % 3];
        lines.push_str(&format!("{cat}\ttok{i}\n"));
    }
    let tokens = dir.path().join("tokens.tsv");
    fs::write(&tokens, lines).unwrap();
    let o = corpuskit(&["--output-dir", s(dir.path()), "coverage", s(&shards), "--tokens", s(&tokens)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let all = out.lines().find(|l| l.starts_with("ALL")).unwrap();
    assert_eq!(all.split_whitespace().collect::<Vec<_>>(), ["ALL", "2062", "2151", "95.9%"]);
    assert!(dir.path().join("coverage.json").is_file());
}

fn page(text: &str, links: &[&str]) -> String {
    let a: String = links.iter().map(|l| format!("<a href=\"{l}\">l</a>")).collect();
    format!("<html><body><article><p>{text}</p></article>{a}</body></html>")
}

fn crawl_config(dir: &Path, start: &str) -> PathBuf {
    let cfg = dir.join("crawl.toml");
    fs::write(
        &cfg,
        format!(
            "[source.news]\ncategory = \"news_radio\"\nkind = \"crawl\"\ninput = \"news.jsonl\"\n\
             start_urls = [\"{start}\"]\nallow_patterns = [\"/archive/\"]\nurl_must_contain = \"/pa/\"\n\
             content_selector = \"article p::text\"\nmax_pages = 10\ntimeout_ms = 5000\n"
        ),
    )
    .unwrap();
    cfg
}

#[test]
fn crawl_fixture_server() {
    let server = FixtureServer::start(vec![
        ("/pa/", 200, page("seed", &["/pa/archive/1", "/pa/archive/2", "/en/archive/9"])),
        ("/pa/archive/1", 200, page("first", &["/pa/archive/2"])),
        ("/pa/archive/2", 200, page("second", &["/pa/archive/1"])),
    ]);
    let dir = tempfile::tempdir().unwrap();
    let cfg = crawl_config(dir.path(), &format!("{}/pa/", server.base));
    let o = corpuskit(&["--config", s(&cfg), "crawl", "--source", "news"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("pages_fetched=3 docs_emitted=3 errors=0"), "{}", stdout(&o));
    let body = fs::read_to_string(dir.path().join("news.jsonl")).unwrap();
    let texts: Vec<String> =
        body.lines().map(|l| serde_json::from_str::<Value>(l).unwrap()["text"].as_str().unwrap().to_owned()).collect();
    assert_eq!(texts, ["seed", "first", "second"]);
    let hits = server.hits.lock().unwrap();
    assert!(hits.iter().all(|(p, n)| *n == 1 || p == "/robots.txt"), "{hits:?}");
    assert!(!hits.contains_key("/en/archive/9"));
}

#[test]
fn crawl_max_pages_override() {
    let server = FixtureServer::start(vec![
        ("/pa/", 200, page("seed", &["/pa/archive/1"])),
        ("/pa/archive/1", 200, page("first", &[])),
    ]);
    let dir = tempfile::tempdir().unwrap();
    let cfg = crawl_config(dir.path(), &format!("{}/pa/", server.base));
    let o = corpuskit(&["--config", s(&cfg), "crawl", "--source", "news", "--max-pages", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("pages_fetched=1 "), "{}", stdout(&o));
    let hits = server.hits.lock().unwrap();
    assert_eq!(hits.iter().filter(|(p, _)| *p != "/robots.txt").count(), 1, "{hits:?}");
}

#[test]
fn crawl_unreachable_host_is_not_fatal() {
    let port = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let dir = tempfile::tempdir().unwrap();
    let cfg = crawl_config(dir.path(), &format!("http://127.0.0.1:{port}/pa/"));
    let o = corpuskit(&["--config", s(&cfg), "crawl", "--source", "news"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let errors: u64 = out.split("errors=").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!(errors > 0, "{out}");
}

#[test]
fn crawl_unknown_source_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = crawl_config(dir.path(), "http://127.0.0.1:9/pa/");
    let o = corpuskit(&["--config", s(&cfg), "crawl", "--source", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope"));
}
