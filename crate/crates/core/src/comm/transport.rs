//! Paired synchronous swaps between workers.

use std::io::{self, Read, Write};
use std::net::{Ipv4Addr, TcpListener, TcpStream};
use std::sync::mpsc::{channel, Receiver, Sender};

use super::CommError;

/// Combined send-and-receive with one partner. Both directions complete
/// before the call returns.
pub trait Transport: Send {
    fn rank(&self) -> usize;
    fn sendrecv(&mut self, partner: usize, payload: Vec<u8>) -> io::Result<Vec<u8>>;
}

/// Endpoints of workers that are threads of one process. Messages are byte
/// buffers handed over unbounded channels, so a send never blocks.
pub struct InProcTransport {
    rank: usize,
    to: Vec<Option<Sender<Vec<u8>>>>,
    from: Vec<Option<Receiver<Vec<u8>>>>,
}

/// One connected endpoint per worker.
pub fn inproc_network(workers: usize) -> Vec<InProcTransport> {
    let mut ends: Vec<InProcTransport> = (0..workers)
        .map(|rank| InProcTransport {
            rank,
            to: (0..workers).map(|_| None).collect(),
            from: (0..workers).map(|_| None).collect(),
        })
        .collect();
    for a in 0..workers {
        for b in 0..workers {
            if a != b {
                let (tx, rx) = channel();
                ends[a].to[b] = Some(tx);
                ends[b].from[a] = Some(rx);
            }
        }
    }
    ends
}

fn no_link(partner: usize) -> io::Error {
    io::Error::new(io::ErrorKind::NotConnected, format!("no link to worker {partner}"))
}

impl Transport for InProcTransport {
    fn rank(&self) -> usize {
        self.rank
    }

    fn sendrecv(&mut self, partner: usize, payload: Vec<u8>) -> io::Result<Vec<u8>> {
        let tx = self.to.get(partner).and_then(Option::as_ref).ok_or_else(|| no_link(partner))?;
        tx.send(payload).map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "partner hung up"))?;
        let rx = self.from.get(partner).and_then(Option::as_ref).ok_or_else(|| no_link(partner))?;
        rx.recv().map_err(|_| io::Error::new(io::ErrorKind::UnexpectedEof, "partner hung up"))
    }
}

/// Endpoints connected pairwise by loopback TCP sockets. Frames are a
/// little-endian `u64` byte count followed by the payload.
pub struct TcpTransport {
    rank: usize,
    streams: Vec<Option<TcpStream>>,
}

pub fn tcp_network(workers: usize) -> io::Result<Vec<TcpTransport>> {
    let mut ends: Vec<TcpTransport> =
        (0..workers).map(|rank| TcpTransport { rank, streams: (0..workers).map(|_| None).collect() }).collect();
    for a in 0..workers {
        for b in (a + 1)..workers {
            let listener = TcpListener::bind((Ipv4Addr::LOCALHOST, 0))?;
            let client = TcpStream::connect(listener.local_addr()?)?;
            let (server, _) = listener.accept()?;
            client.set_nodelay(true)?;
            server.set_nodelay(true)?;
            ends[a].streams[b] = Some(server);
            ends[b].streams[a] = Some(client);
        }
    }
    Ok(ends)
}

impl Transport for TcpTransport {
    fn rank(&self) -> usize {
        self.rank
    }

    fn sendrecv(&mut self, partner: usize, payload: Vec<u8>) -> io::Result<Vec<u8>> {
        let stream = self.streams.get(partner).and_then(Option::as_ref).ok_or_else(|| no_link(partner))?;
        std::thread::scope(|s| {
            let writer = s.spawn(move || -> io::Result<()> {
                let mut w = stream;
                w.write_all(&(payload.len() as u64).to_le_bytes())?;
                w.write_all(&payload)?;
                w.flush()
            });
            let mut r = stream;
            let mut len = [0u8; 8];
            let read = r.read_exact(&mut len).and_then(|_| {
                let mut buf = vec![0u8; u64::from_le_bytes(len) as usize];
                r.read_exact(&mut buf)?;
                Ok(buf)
            });
            let wrote = writer.join().unwrap_or_else(|_| Err(io::Error::other("writer thread panicked")));
            wrote.and(read)
        })
    }
}

/// Header is `(step, stage, count)` as little-endian `u64`s.
pub const HEADER_BYTES: usize = 24;

pub fn encode_payload(step: u64, stage: u64, values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_BYTES + 8 * values.len());
    out.extend_from_slice(&step.to_le_bytes());
    out.extend_from_slice(&stage.to_le_bytes());
    out.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes a payload and checks its header against what the receiver
/// expects.
pub fn decode_payload(bytes: &[u8], step: u64, stage: u64, count: usize) -> Result<Vec<f64>, CommError> {
    let protocol = |message: String| CommError::Protocol { step, stage, message };
    if bytes.len() < HEADER_BYTES {
        return Err(protocol(format!("payload of {} bytes is shorter than the header", bytes.len())));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().unwrap());
    let (got_step, got_stage, got_count) = (word(0), word(1), word(2) as usize);
    if got_step != step || got_stage != stage {
        return Err(protocol(format!("header is step {got_step} stage {got_stage}")));
    }
    if got_count != count {
        return Err(protocol(format!("expected {count} values, header says {got_count}")));
    }
    if bytes.len() != HEADER_BYTES + 8 * count {
        return Err(protocol(format!("body has {} bytes for {count} values", bytes.len() - HEADER_BYTES)));
    }
    Ok(bytes[HEADER_BYTES..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}
