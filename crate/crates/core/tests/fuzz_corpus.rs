//! Replays the checked-in fuzz corpus through every parser.

use std::fs;
use std::path::PathBuf;

use stokes_poisson::io;

fn corpus(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus for {target}");
    out
}

#[test]
fn stokes_documents() {
    let results: Vec<bool> = corpus("stokes_document").iter().map(|(_, t)| io::parse_stokes_document(t).is_ok()).collect();
    assert!(results.iter().any(|&ok| ok));
    assert!(results.iter().any(|&ok| !ok));
}

#[test]
fn skew_documents() {
    for (p, t) in corpus("skew_document") {
        let doc = io::parse_skew_document(&t).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(doc.v.n(), doc.u.n());
    }
}

#[test]
fn braid_words() {
    for (p, t) in corpus("braid_word") {
        let r = io::parse_braid_word(&t);
        assert_eq!(r.is_err(), p.ends_with("zero.txt"), "{}", p.display());
    }
}

#[test]
fn braid_documents() {
    for (p, t) in corpus("braid_document") {
        let r = io::parse_braid_document(&t);
        assert_eq!(r.is_err(), p.ends_with("out_of_range.json"), "{}", p.display());
    }
}

#[test]
fn flow_documents() {
    for (p, t) in corpus("flow_document") {
        io::parse_flow_document(&t).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}
