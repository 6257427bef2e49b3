use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};

/// Minimal HTTP/1.1 server over a fixed path table; counts hits per path.
pub struct FixtureServer {
    pub base: String,
    pub hits: Arc<Mutex<HashMap<String, usize>>>,
}

impl FixtureServer {
    pub fn start(pages: Vec<(&'static str, u16, String)>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let hits: Arc<Mutex<HashMap<String, usize>>> = Arc::default();
        let table: HashMap<&str, (u16, String)> = pages.into_iter().map(|(p, c, b)| (p, (c, b))).collect();
        let counter = Arc::clone(&hits);
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request_line = String::new();
                if reader.read_line(&mut request_line).is_err() {
                    continue;
                }
                loop {
                    let mut h = String::new();
                    if reader.read_line(&mut h).map_or(true, |n| n == 0) || h == "\r\n" {
                        break;
                    }
                }
                let path = request_line.split_whitespace().nth(1).unwrap_or("/").to_owned();
                *counter.lock().unwrap().entry(path.clone()).or_default() += 1;
                let (code, body) = table.get(path.as_str()).cloned().unwrap_or((404, String::new()));
                let _ = write!(
                    stream,
                    "HTTP/1.1 {code} X\r\nContent-Type: text/html; charset=utf-8\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
            }
        });
        FixtureServer { base, hits }
    }
}
