use crate::{Error, Result};

/// A two-byte start marker followed by a fixed-length payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameMarker {
    prefix: [u8; 2],
    payload_len: usize,
}

impl FrameMarker {
    pub fn new(prefix: [u8; 2], payload_len: usize) -> Result<Self> {
        if prefix[0] == prefix[1] {
            return Err(Error::invalid("marker.prefix", "marker bytes must differ"));
        }
        Ok(Self { prefix, payload_len })
    }

    pub fn prefix(&self) -> [u8; 2] {
        self.prefix
    }

    pub fn payload_len(&self) -> usize {
        self.payload_len
    }
}

impl Default for FrameMarker {
    /// `0, 255` followed by ten payload bytes.
    fn default() -> Self {
        Self {
            prefix: [0, 255],
            payload_len: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    /// Byte offset of the marker.
    pub offset: usize,
    pub payload: Vec<u8>,
}

impl Frame {
    /// Payload as text, with non-ASCII bytes replaced.
    pub fn text(&self) -> String {
        self.payload
            .iter()
            .map(|&b| if b.is_ascii() { b as char } else { '\u{FFFD}' })
            .collect()
    }
}

/// Scans left to right for the marker; each hit consumes its marker and
/// payload before the scan resumes. Frames whose payload would run past the
/// end are dropped.
pub fn detect_frames(bytes: &[u8], marker: &FrameMarker) -> Vec<Frame> {
    let frame_len = 2 + marker.payload_len;
    let mut frames = Vec::new();
    let mut i = 0;
    while i + frame_len <= bytes.len() {
        if bytes[i..i + 2] == marker.prefix {
            frames.push(Frame {
                offset: i,
                payload: bytes[i + 2..i + frame_len].to_vec(),
            });
            i += frame_len;
        } else {
            i += 1;
        }
    }
    frames
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SEQ2: [u8; 12] = [0, 255, 72, 101, 108, 108, 111, 87, 111, 114, 108, 100];

    #[test]
    fn hello_world_three_times() {
        let bytes: Vec<u8> = SEQ2.iter().cycle().take(36).copied().collect();
        let frames = detect_frames(&bytes, &FrameMarker::default());
        assert_eq!(frames.len(), 3);
        for f in &frames {
            assert_eq!(f.text(), "HelloWorld");
        }
    }

    #[test]
    fn empty_and_truncated() {
        assert!(detect_frames(&[], &FrameMarker::default()).is_empty());
        let bytes: Vec<u8> = SEQ2.iter().cycle().take(20).copied().collect();
        assert_eq!(detect_frames(&bytes, &FrameMarker::default()).len(), 1);
    }

    #[test]
    fn marker_must_have_distinct_bytes() {
        assert!(FrameMarker::new([7, 7], 3).is_err());
    }

    proptest! {
        #[test]
        fn frames_do_not_overlap(bytes in prop::collection::vec(prop::sample::select(vec![0u8, 255, 1]), 0..300), len in 0usize..6) {
            let marker = FrameMarker::new([0, 255], len).unwrap();
            let frames = detect_frames(&bytes, &marker);
            for w in frames.windows(2) {
                prop_assert!(w[0].offset + 2 + len <= w[1].offset);
            }
            for f in &frames {
                prop_assert_eq!(&bytes[f.offset..f.offset + 2], &[0u8, 255][..]);
            }
        }
    }
}
