use std::io::Write;

use sha2::{Digest, Sha256};

use crate::protocol::trace::{TraceEvent, TraceSink};

/// Writes one JSON object per line. The first write error is kept and
/// further events are dropped.
pub struct JsonlSink<W: Write> {
    out: W,
    error: Option<std::io::Error>,
}

impl<W: Write> JsonlSink<W> {
    pub fn new(out: W) -> Self {
        JsonlSink { out, error: None }
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> TraceSink for JsonlSink<W> {
    fn record(&mut self, event: &TraceEvent) {
        if self.error.is_some() {
            return;
        }
        let res = serde_json::to_writer(&mut self.out, event)
            .map_err(std::io::Error::from)
            .and_then(|_| self.out.write_all(b"\n"));
        if let Err(e) = res {
            self.error = Some(e);
        }
    }
}

/// SHA-256 over the JSON-lines encoding, without keeping the trace.
#[derive(Clone, Default)]
pub struct HashSink {
    hasher: Sha256,
    events: u64,
}

impl HashSink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn hex_digest(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

impl TraceSink for HashSink {
    fn record(&mut self, event: &TraceEvent) {
        let line = serde_json::to_vec(event).expect("trace events serialize");
        self.hasher.update(&line);
        self.hasher.update(b"\n");
        self.events += 1;
    }
}

/// Sends every event to two sinks.
pub struct TeeSink<A, B>(pub A, pub B);

impl<A: TraceSink, B: TraceSink> TraceSink for TeeSink<A, B> {
    fn enabled(&self) -> bool {
        self.0.enabled() || self.1.enabled()
    }
    fn record(&mut self, event: &TraceEvent) {
        if self.0.enabled() {
            self.0.record(event);
        }
        if self.1.enabled() {
            self.1.record(event);
        }
    }
}
