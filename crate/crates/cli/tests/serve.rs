mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::Stdio;

use cgforge::dataset::{read_jsonl, Candidate, Status};
use cgforge::review::{replay, ReviewStore};
use serde_json::{json, Value};
use tempfile::tempdir;

fn post(addr: &str, path: &str, body: &Value) -> String {
    let mut s = TcpStream::connect(addr).unwrap();
    let body = body.to_string();
    write!(
        s,
        "POST {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut resp = String::new();
    s.read_to_string(&mut resp).unwrap();
    resp
}

/// A decision acknowledged by the service survives the process being
/// killed outright.
#[test]
fn acknowledged_decisions_survive_a_kill() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("out");
    common::ok_json(&common::pipeline(&out, &[]));
    let store = out.join("review");
    let cands: Vec<Candidate> = read_jsonl(&out.join("candidates.jsonl")).unwrap();
    let id = cands[0].id.clone();

    let mut child = common::cgforge()
        .args(["review-serve", "--port", "0", "--store"])
        .arg(&store)
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let listening: Value = serde_json::from_str(&line).unwrap();
    let addr = listening["listening"].as_str().unwrap().to_string();

    let path = format!("/api/candidates/{id}/decisions");
    let r1 = post(
        &addr,
        &path,
        &json!({"reviewer": "ann", "action": "accept"}),
    );
    assert!(r1.starts_with("HTTP/1.1 200"), "{r1}");
    let r2 = post(&addr, &path, &json!({"reviewer": "bo", "action": "accept"}));
    assert!(r2.starts_with("HTTP/1.1 200"), "{r2}");
    child.kill().unwrap();
    child.wait().unwrap();

    assert_eq!(replay(&store).unwrap()[&id], Status::Accepted);
    let reopened = ReviewStore::open(&store).unwrap();
    assert_eq!(reopened.get(&id).unwrap().status, Status::Accepted);
    assert_eq!(reopened.len(), cands.len());
}
