//! Self-framing beep-string codes for integers and integer triples.
//!
//! Every bit becomes a pair of beeps, `0 -> (l s)` and `1 -> (s l)`. Frames are
//! delimited by `(l l)`, and triple components are separated by `(s s)`. Since
//! neither bit pair is `(l l)` or `(s s)`, a decoder that reads the stream in
//! aligned pairs finds the frame end and separators unambiguously.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Beep {
    Soft,
    Loud,
}

impl Beep {
    pub fn symbol(self) -> char {
        match self {
            Beep::Soft => 's',
            Beep::Loud => 'l',
        }
    }
}

impl fmt::Display for Beep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BeepString(pub Vec<Beep>);

impl BeepString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Beep> + '_ {
        self.0.iter().copied()
    }

    fn push_pair(&mut self, a: Beep, b: Beep) {
        self.0.push(a);
        self.0.push(b);
    }
}

impl fmt::Display for BeepString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for BeepString {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                'l' => Ok(Beep::Loud),
                's' => Ok(Beep::Soft),
                other => Err(CodecError::BadSymbol(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BeepString)
    }
}

/// A protocol message: the broadcast integer or a control triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Message {
    Int(u64),
    Triple(u64, u64, u64),
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Message::Int(k) => write!(f, "{k}"),
            Message::Triple(a, b, c) => write!(f, "[{a},{b},{c}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("malformed frame: {0}")]
    MalformedFrame(&'static str),
    #[error("unknown beep symbol {0:?}")]
    BadSymbol(char),
}

/// Number of bits in the binary representation of `k`; zero has one bit.
pub fn bit_len(k: u64) -> u32 {
    (64 - k.leading_zeros()).max(1)
}

/// `S(k)`: the bit pairs of `k`, most significant bit first.
pub fn encode_bits(k: u64) -> BeepString {
    let mut out = BeepString::default();
    push_bits(&mut out, k);
    out
}

fn push_bits(out: &mut BeepString, k: u64) {
    for i in (0..bit_len(k)).rev() {
        if (k >> i) & 1 == 1 {
            out.push_pair(Beep::Soft, Beep::Loud);
        } else {
            out.push_pair(Beep::Loud, Beep::Soft);
        }
    }
}

pub fn encode_message(msg: Message) -> BeepString {
    use Beep::*;
    let mut out = BeepString::default();
    out.push_pair(Loud, Loud);
    match msg {
        Message::Int(k) => push_bits(&mut out, k),
        Message::Triple(a, b, c) => {
            push_bits(&mut out, a);
            out.push_pair(Soft, Soft);
            push_bits(&mut out, b);
            out.push_pair(Soft, Soft);
            push_bits(&mut out, c);
        }
    }
    out.push_pair(Loud, Loud);
    out
}

/// Encoded length in beeps, without building the string.
pub fn frame_len(msg: Message) -> u64 {
    match msg {
        Message::Int(k) => 4 + 2 * bit_len(k) as u64,
        Message::Triple(a, b, c) => 8 + 2 * (bit_len(a) + bit_len(b) + bit_len(c)) as u64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pair {
    Zero,
    One,
    Separator,
}

/// Streaming frame decoder. Positions count heard beeps only.
#[derive(Debug, Clone, Default)]
pub struct Decoder {
    half: Option<Beep>,
    in_frame: bool,
    payload: Vec<Pair>,
}

impl Decoder {
    pub fn new() -> Self {
        Self::default()
    }

    /// True between the first beep of a frame and its last.
    pub fn mid_frame(&self) -> bool {
        self.in_frame || self.half.is_some()
    }

    /// Feeds one heard beep. Returns the message when this beep completes a
    /// frame. On error the decoder resets.
    pub fn feed(&mut self, beep: Beep) -> Result<Option<Message>, CodecError> {
        let result = self.feed_inner(beep);
        if result.is_err() {
            *self = Decoder::default();
        }
        result
    }

    fn feed_inner(&mut self, beep: Beep) -> Result<Option<Message>, CodecError> {
        use Beep::*;
        let Some(first) = self.half.take() else {
            self.half = Some(beep);
            return Ok(None);
        };
        if !self.in_frame {
            if (first, beep) != (Loud, Loud) {
                return Err(CodecError::MalformedFrame("stream does not start with (l l)"));
            }
            self.in_frame = true;
            return Ok(None);
        }
        match (first, beep) {
            (Loud, Soft) => self.payload.push(Pair::Zero),
            (Soft, Loud) => self.payload.push(Pair::One),
            (Soft, Soft) => self.payload.push(Pair::Separator),
            (Loud, Loud) => {
                let payload = std::mem::take(&mut self.payload);
                self.in_frame = false;
                return decode_payload(&payload).map(Some);
            }
        }
        Ok(None)
    }
}

fn decode_payload(payload: &[Pair]) -> Result<Message, CodecError> {
    let parts: Vec<&[Pair]> = payload.split(|p| *p == Pair::Separator).collect();
    let values = parts
        .iter()
        .map(|bits| bits_value(bits))
        .collect::<Result<Vec<_>, _>>()?;
    match values[..] {
        [k] => Ok(Message::Int(k)),
        [a, b, c] => Ok(Message::Triple(a, b, c)),
        _ => Err(CodecError::MalformedFrame("separator count is neither 0 nor 2")),
    }
}

fn bits_value(bits: &[Pair]) -> Result<u64, CodecError> {
    if bits.is_empty() {
        return Err(CodecError::MalformedFrame("empty component"));
    }
    let mut value: u64 = 0;
    for p in bits {
        value = value
            .checked_mul(2)
            .ok_or(CodecError::MalformedFrame("component exceeds 64 bits"))?;
        if *p == Pair::One {
            value += 1;
        }
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BeepString {
        s.parse().unwrap()
    }

    fn decode_all(s: &BeepString) -> Result<Vec<(usize, Message)>, CodecError> {
        let mut d = Decoder::new();
        let mut out = Vec::new();
        for (i, b) in s.iter().enumerate() {
            if let Some(m) = d.feed(b)? {
                out.push((i + 1, m));
            }
        }
        Ok(out)
    }

    #[test]
    fn bits() {
        assert_eq!(encode_bits(0), bs("ls"));
        assert_eq!(encode_bits(1), bs("sl"));
        assert_eq!(encode_bits(2), bs("slls"));
    }

    #[test]
    fn frames() {
        assert_eq!(encode_message(Message::Int(2)), bs("llsllsll"));
        assert_eq!(encode_message(Message::Int(1)), bs("llslll"));
        assert_eq!(
            encode_message(Message::Triple(1, 0, 0)),
            bs("llslsslssslsll")
        );
    }

    #[test]
    fn frame_lengths_match_encoding() {
        for m in [Message::Int(0), Message::Int(77), Message::Triple(5, 0, 1), Message::Triple(1023, 9, 0)] {
            assert_eq!(frame_len(m), encode_message(m).len() as u64);
        }
    }

    #[test]
    fn decoder_emits_on_last_beep() {
        assert_eq!(decode_all(&bs("llsllsll")).unwrap(), vec![(8, Message::Int(2))]);
        let t = encode_message(Message::Triple(1, 0, 0));
        assert_eq!(decode_all(&t).unwrap(), vec![(t.len(), Message::Triple(1, 0, 0))]);
    }

    #[test]
    fn one_separator_is_malformed() {
        assert!(matches!(
            decode_all(&bs("llslsslsll")),
            Err(CodecError::MalformedFrame(_))
        ));
    }

    #[test]
    fn bad_start_is_malformed() {
        assert!(decode_all(&bs("lsll")).is_err());
        assert!(decode_all(&bs("llll")).is_err());
    }

    #[test]
    fn decoder_resets_after_error() {
        let mut d = Decoder::new();
        assert!(d.feed(Beep::Soft).unwrap().is_none());
        assert!(d.feed(Beep::Soft).is_err());
        assert!(!d.mid_frame());
        let mut last = None;
        for b in encode_message(Message::Int(5)).iter() {
            last = d.feed(b).unwrap();
        }
        assert_eq!(last, Some(Message::Int(5)));
    }

    #[test]
    fn round_trip_small_ints_exhaustive() {
        for k in 0..4096 {
            let m = Message::Int(k);
            assert_eq!(decode_all(&encode_message(m)).unwrap(), vec![(frame_len(m) as usize, m)]);
        }
    }

    fn message() -> impl Strategy<Value = Message> {
        prop_oneof![
            (0u64..1 << 20).prop_map(Message::Int),
            (0u64..1024, 0u64..1024, 0u64..1024).prop_map(|(a, b, c)| Message::Triple(a, b, c)),
        ]
    }

    proptest! {
        #[test]
        fn end_marker_only_at_frame_edges(m in message()) {
            let s = encode_message(m);
            let odd_ll: Vec<usize> = s.0.chunks(2)
                .enumerate()
                .filter(|(_, p)| p == &[Beep::Loud, Beep::Loud])
                .map(|(i, _)| 2 * i + 1)
                .collect();
            prop_assert_eq!(odd_ll, vec![1, s.len() - 1]);
        }

        #[test]
        fn separators_per_frame_type(m in message()) {
            let s = encode_message(m);
            let payload = &s.0[2..s.len() - 2];
            let seps = payload.chunks(2).filter(|p| p == &[Beep::Soft, Beep::Soft]).count();
            prop_assert_eq!(seps, if matches!(m, Message::Int(_)) { 0 } else { 2 });
            prop_assert_eq!(s.len() % 2, 0);
        }

        #[test]
        fn concatenated_frames_decode_in_order(ms in proptest::collection::vec(message(), 0..12)) {
            let mut stream = BeepString::default();
            for m in &ms {
                stream.0.extend(encode_message(*m).0);
            }
            let got: Vec<Message> = decode_all(&stream).unwrap().into_iter().map(|(_, m)| m).collect();
            prop_assert_eq!(got, ms);
        }

        #[test]
        fn text_notation_round_trips(m in message()) {
            let s = encode_message(m);
            prop_assert_eq!(s.to_string().parse::<BeepString>().unwrap(), s);
        }
    }
}
