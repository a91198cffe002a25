//! TCP stream classifier: 3600-byte frames in, 2-byte replies out.

use std::io::{self, ErrorKind, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use crate::classifier::{FrameClassifier, RAW_FRAME_BYTES};

/// Accepts connections forever, one thread each.
pub fn serve(listener: TcpListener, classifier: Arc<FrameClassifier>) -> io::Result<()> {
    for conn in listener.incoming() {
        let stream = match conn {
            Ok(s) => s,
            Err(e) => {
                eprintln!("serve: accept failed: {e}");
                continue;
            }
        };
        let classifier = Arc::clone(&classifier);
        thread::spawn(move || {
            let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_else(|_| "?".into());
            match handle_connection(stream, &classifier) {
                Ok(n) => eprintln!("serve: {peer}: closed after {n} frames"),
                Err(e) => eprintln!("serve: {peer}: {e}"),
            }
        });
    }
    Ok(())
}

/// Processes frames in arrival order until the peer closes. Returns the
/// number of frames answered; a trailing partial frame is reported and
/// discarded.
pub fn handle_connection(mut stream: TcpStream, classifier: &FrameClassifier) -> io::Result<u64> {
    stream.set_nodelay(true)?;
    let mut buf = vec![0u8; RAW_FRAME_BYTES];
    let mut filled = 0;
    let mut frames = 0u64;
    loop {
        let n = match stream.read(&mut buf[filled..]) {
            Ok(n) => n,
            Err(e) if e.kind() == ErrorKind::Interrupted => continue,
            Err(e) => return Err(e),
        };
        if n == 0 {
            if filled > 0 {
                eprintln!("serve: dropping partial frame of {filled} bytes at connection close");
            }
            return Ok(frames);
        }
        filled += n;
        if filled == RAW_FRAME_BYTES {
            let c = classifier
                .classify_raw(&buf)
                .map_err(|e| io::Error::new(ErrorKind::InvalidData, e.to_string()))?;
            stream.write_all(&classifier.reply(&c))?;
            filled = 0;
            frames += 1;
        }
    }
}
