//! MIT-format annotation files (`.atr`).
//!
//! The stream is a sequence of little-endian 16-bit words: the high 6 bits
//! hold a code, the low 10 bits an interval (or a field value for pseudo-codes).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SKIP: u16 = 59;
const NUM: u16 = 60;
const SUB: u16 = 61;
const CHN: u16 = 62;
const AUX: u16 = 63;
const ACMAX: u16 = 49;

/// Annotation code to mnemonic symbol, indexed by code (WFDB `ecgcodes.h`).
const SYMBOLS: [&str; 42] = [
    " ", "N", "L", "R", "a", "V", "F", "J", "A", "S", "E", "j", "/", "Q", "~", "[15]", "|", "[17]",
    "s", "T", "*", "D", "\"", "=", "p", "B", "^", "t", "+", "u", "?", "!", "[", "]", "e", "n", "@",
    "x", "f", "(", ")", "r",
];

/// Mnemonic for an annotation code; unassigned codes render as `[code]`.
pub fn code_to_symbol(code: u8) -> String {
    SYMBOLS
        .get(usize::from(code))
        .map(|s| (*s).to_string())
        .unwrap_or_else(|| format!("[{code}]"))
}

/// Inverse of [`code_to_symbol`] for assigned codes.
pub fn symbol_to_code(symbol: &str) -> Option<u8> {
    SYMBOLS
        .iter()
        .position(|s| *s == symbol && !s.starts_with('['))
        .map(|i| i as u8)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    /// Absolute sample index at the source sampling rate.
    pub sample_index: u64,
    pub code: u8,
    pub symbol: String,
    pub subtype: i8,
    pub channel: u8,
    pub num: i8,
    pub aux: Option<Vec<u8>>,
}

/// Decodes an MIT annotation byte stream.
pub fn parse_annotations(bytes: &[u8]) -> Result<Vec<Annotation>> {
    let mut out: Vec<Annotation> = Vec::new();
    let mut time: u64 = 0;
    let mut pos = 0usize;
    let mut chan: u8 = 0;
    let mut num: i8 = 0;

    let read_word = |pos: usize| -> Option<u16> {
        bytes
            .get(pos..pos + 2)
            .map(|b| u16::from_le_bytes([b[0], b[1]]))
    };

    loop {
        let word = read_word(pos).ok_or_else(|| {
            Error::Annotation(format!("missing terminator (stream ends at byte {pos})"))
        })?;
        pos += 2;
        let code = word >> 10;
        let field = word & 0x03FF;
        match code {
            0 if field == 0 => break,
            SKIP => {
                let hi =
                    read_word(pos).ok_or_else(|| Error::Annotation("truncated SKIP".into()))?;
                let lo =
                    read_word(pos + 2).ok_or_else(|| Error::Annotation("truncated SKIP".into()))?;
                pos += 4;
                let skip = (u32::from(hi) << 16 | u32::from(lo)) as i32;
                time = time
                    .checked_add_signed(i64::from(skip))
                    .ok_or_else(|| Error::Annotation("interval sum overflow".into()))?;
            }
            NUM => {
                num = field as u8 as i8;
                if let Some(last) = out.last_mut() {
                    last.num = num;
                }
            }
            SUB => {
                if let Some(last) = out.last_mut() {
                    last.subtype = field as u8 as i8;
                }
            }
            CHN => {
                chan = field as u8;
                if let Some(last) = out.last_mut() {
                    last.channel = chan;
                }
            }
            AUX => {
                let len = usize::from(field);
                let data = bytes
                    .get(pos..pos + len)
                    .ok_or_else(|| Error::Annotation("truncated AUX payload".into()))?;
                pos += len + (len & 1);
                if let Some(last) = out.last_mut() {
                    last.aux = Some(data.to_vec());
                }
            }
            c if c <= ACMAX => {
                time = time
                    .checked_add(u64::from(field))
                    .ok_or_else(|| Error::Annotation("interval sum overflow".into()))?;
                out.push(Annotation {
                    sample_index: time,
                    code: c as u8,
                    symbol: code_to_symbol(c as u8),
                    subtype: 0,
                    channel: chan,
                    num,
                    aux: None,
                });
            }
            c => {
                return Err(Error::Annotation(format!(
                    "reserved code {c} at byte {}",
                    pos - 2
                )))
            }
        }
    }
    Ok(out)
}

/// Writes annotations in MIT format. Sample indices must be non-decreasing.
///
/// Used for fixtures; emits SKIP for gaps wider than 1023 samples and
/// SUB/CHN/NUM/AUX words where the fields differ from the running state.
pub fn encode_annotations(annotations: &[Annotation]) -> Vec<u8> {
    let mut out = Vec::new();
    let push = |out: &mut Vec<u8>, code: u16, field: u16| {
        out.extend_from_slice(&((code << 10) | (field & 0x3FF)).to_le_bytes());
    };
    let mut time = 0u64;
    let mut chan = 0u8;
    let mut num = 0i8;
    for a in annotations {
        let mut delta = a.sample_index - time;
        if delta > 1023 {
            push(&mut out, SKIP, 0);
            let d = delta as u32;
            out.extend_from_slice(&((d >> 16) as u16).to_le_bytes());
            out.extend_from_slice(&((d & 0xFFFF) as u16).to_le_bytes());
            delta = 0;
        }
        push(&mut out, u16::from(a.code), delta as u16);
        time = a.sample_index;
        if a.subtype != 0 {
            push(&mut out, SUB, u16::from(a.subtype as u8));
        }
        if a.channel != chan {
            push(&mut out, CHN, u16::from(a.channel));
            chan = a.channel;
        }
        if a.num != num {
            push(&mut out, NUM, u16::from(a.num as u8));
            num = a.num;
        }
        if let Some(aux) = &a.aux {
            push(&mut out, AUX, aux.len() as u16);
            out.extend_from_slice(aux);
            if aux.len() % 2 == 1 {
                out.push(0);
            }
        }
    }
    out.extend_from_slice(&[0, 0]);
    out
}

impl Annotation {
    /// A plain beat/event annotation with default auxiliary fields.
    pub fn new(sample_index: u64, symbol: &str) -> Option<Self> {
        let code = symbol_to_code(symbol)?;
        Some(Annotation {
            sample_index,
            code,
            symbol: symbol.to_string(),
            subtype: 0,
            channel: 0,
            num: 0,
            aux: None,
        })
    }
}
