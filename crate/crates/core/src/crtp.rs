//! CRTP packet, commander setpoint and radio URI codecs.
//!
//! A CRTP frame is one header byte followed by up to 31 payload bytes. The
//! header packs the port in bits 7-4, the (reserved) link field in bits 3-2
//! and the channel in bits 1-0.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

pub const MAX_PAYLOAD: usize = 31;
pub const MAX_FRAME: usize = MAX_PAYLOAD + 1;
pub const MAX_RADIO_CHANNEL: u8 = 125;

pub const PORT_CONSOLE: u8 = 0;
pub const PORT_COMMANDER: u8 = 3;
pub const PORT_LOGGING: u8 = 5;
pub const PORT_HIGH_LEVEL_COMMANDER: u8 = 8;
pub const PORT_LINK: u8 = 15;

pub const SETPOINT_LEN: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("payload of {0} bytes exceeds the 31 byte limit")]
    PayloadTooLong(usize),
    #[error("{field} = {value} is out of range")]
    FieldOutOfRange { field: &'static str, value: u8 },
    #[error("empty frame")]
    EmptyFrame,
    #[error("malformed uri: {0}")]
    MalformedUri(String),
    #[error("radio channel {0} is out of range 0..=125")]
    ChannelOutOfRange(u32),
    #[error("unknown datarate {0:?}")]
    UnknownDatarate(String),
    #[error("bad radio address {0:?}")]
    BadAddress(String),
    #[error("expected commander port 3, got port {0}")]
    WrongPort(u8),
    #[error("setpoint payload must be 14 bytes, got {0}")]
    BadLength(usize),
}

/// One CRTP packet. Fields are public; [`encode_packet`] enforces the ranges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CrtpPacket {
    pub port: u8,
    pub link: u8,
    pub channel: u8,
    pub payload: Vec<u8>,
}

impl CrtpPacket {
    pub fn new(port: u8, channel: u8, payload: Vec<u8>) -> Result<Self, CodecError> {
        let p = CrtpPacket {
            port,
            link: 0,
            channel,
            payload,
        };
        p.validate()?;
        Ok(p)
    }

    /// Empty link-control packet used to poll the downlink (header `0xFF`).
    pub fn null() -> Self {
        CrtpPacket {
            port: PORT_LINK,
            link: 3,
            channel: 3,
            payload: Vec::new(),
        }
    }

    pub fn is_null(&self) -> bool {
        self.port == PORT_LINK && self.channel == 3 && self.payload.is_empty()
    }

    pub fn header(&self) -> u8 {
        (self.port << 4) | (self.link << 2) | self.channel
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        if self.port > 15 {
            return Err(CodecError::FieldOutOfRange {
                field: "port",
                value: self.port,
            });
        }
        if self.link > 3 {
            return Err(CodecError::FieldOutOfRange {
                field: "link",
                value: self.link,
            });
        }
        if self.channel > 3 {
            return Err(CodecError::FieldOutOfRange {
                field: "channel",
                value: self.channel,
            });
        }
        if self.payload.len() > MAX_PAYLOAD {
            return Err(CodecError::PayloadTooLong(self.payload.len()));
        }
        Ok(())
    }
}

pub fn encode_packet(p: &CrtpPacket) -> Result<Vec<u8>, CodecError> {
    p.validate()?;
    let mut out = Vec::with_capacity(1 + p.payload.len());
    out.push(p.header());
    out.extend_from_slice(&p.payload);
    Ok(out)
}

pub fn decode_packet(bytes: &[u8]) -> Result<CrtpPacket, CodecError> {
    let (&header, payload) = bytes.split_first().ok_or(CodecError::EmptyFrame)?;
    if payload.len() > MAX_PAYLOAD {
        return Err(CodecError::PayloadTooLong(payload.len()));
    }
    Ok(CrtpPacket {
        port: header >> 4,
        link: (header >> 2) & 0x3,
        channel: header & 0x3,
        payload: payload.to_vec(),
    })
}

/// Roll/pitch in degrees, yaw rate in degrees per second, raw thrust.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Setpoint {
    pub roll: f32,
    pub pitch: f32,
    pub yaw: f32,
    pub thrust: u16,
}

impl Setpoint {
    pub fn new(roll: f32, pitch: f32, yaw: f32, thrust: u16) -> Self {
        Setpoint {
            roll,
            pitch,
            yaw,
            thrust,
        }
    }

    pub fn to_bytes(&self) -> [u8; SETPOINT_LEN] {
        let mut b = [0u8; SETPOINT_LEN];
        b[0..4].copy_from_slice(&self.roll.to_le_bytes());
        b[4..8].copy_from_slice(&self.pitch.to_le_bytes());
        b[8..12].copy_from_slice(&self.yaw.to_le_bytes());
        b[12..14].copy_from_slice(&self.thrust.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8; SETPOINT_LEN]) -> Self {
        let f = |i: usize| f32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]]);
        Setpoint {
            roll: f(0),
            pitch: f(4),
            yaw: f(8),
            thrust: u16::from_le_bytes([b[12], b[13]]),
        }
    }
}

impl fmt::Display for Setpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "roll={} pitch={} yaw={} thrust={}",
            self.roll, self.pitch, self.yaw, self.thrust
        )
    }
}

pub fn encode_setpoint(s: &Setpoint) -> CrtpPacket {
    CrtpPacket {
        port: PORT_COMMANDER,
        link: 0,
        channel: 0,
        payload: s.to_bytes().to_vec(),
    }
}

pub fn decode_setpoint(p: &CrtpPacket) -> Result<Setpoint, CodecError> {
    if p.port != PORT_COMMANDER {
        return Err(CodecError::WrongPort(p.port));
    }
    let bytes: &[u8; SETPOINT_LEN] = p
        .payload
        .as_slice()
        .try_into()
        .map_err(|_| CodecError::BadLength(p.payload.len()))?;
    Ok(Setpoint::from_bytes(bytes))
}

/// 5-byte ESB radio address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(pub [u8; 5]);

impl Address {
    pub const DEFAULT: Address = Address([0xE7; 5]);

    /// Ten upper-case hex digits, no separators.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(10);
        for b in self.0 {
            s.push_str(&format!("{b:02X}"));
        }
        s
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.0;
        write!(
            f,
            "{:02X}:{:02X}:{:02X}:{:02X}:{:02X}",
            b[0], b[1], b[2], b[3], b[4]
        )
    }
}

impl FromStr for Address {
    type Err = CodecError;

    /// Accepts `01E7E7E7E7` and `01:E7:E7:E7:E7`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CodecError::BadAddress(s.into());
        let digits: Vec<u8> = if s.contains(':') {
            let groups: Vec<&str> = s.split(':').collect();
            if groups.len() != 5 || groups.iter().any(|g| g.len() != 2) {
                return Err(bad());
            }
            groups.concat().into_bytes()
        } else {
            s.as_bytes().to_vec()
        };
        if digits.len() != 10 {
            return Err(bad());
        }
        let mut out = [0u8; 5];
        for (i, pair) in digits.chunks(2).enumerate() {
            let hi = hex_val(pair[0]).ok_or_else(bad)?;
            let lo = hex_val(pair[1]).ok_or_else(bad)?;
            out[i] = (hi << 4) | lo;
        }
        Ok(Address(out))
    }
}

fn hex_val(c: u8) -> Option<u8> {
    match c {
        b'0'..=b'9' => Some(c - b'0'),
        b'a'..=b'f' => Some(c - b'a' + 10),
        b'A'..=b'F' => Some(c - b'A' + 10),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Datarate {
    Rate250K,
    Rate1M,
    Rate2M,
}

impl Datarate {
    pub const ALL: [Datarate; 3] = [Datarate::Rate250K, Datarate::Rate1M, Datarate::Rate2M];

    pub fn as_str(&self) -> &'static str {
        match self {
            Datarate::Rate250K => "250K",
            Datarate::Rate1M => "1M",
            Datarate::Rate2M => "2M",
        }
    }
}

impl fmt::Display for Datarate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Datarate {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "250K" => Ok(Datarate::Rate250K),
            "1M" => Ok(Datarate::Rate1M),
            "2M" => Ok(Datarate::Rate2M),
            _ => Err(CodecError::UnknownDatarate(s.into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinkMedium {
    Radio,
    Serial,
}

impl LinkMedium {
    fn scheme(&self) -> &'static str {
        match self {
            LinkMedium::Radio => "radio",
            LinkMedium::Serial => "serial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RadioUri {
    pub medium: LinkMedium,
    pub index: u32,
    pub channel: u8,
    pub datarate: Datarate,
    pub address: Address,
}

/// Factory default link: `radio://0/80/2M/E7E7E7E7E7`.
impl Default for RadioUri {
    fn default() -> Self {
        RadioUri {
            medium: LinkMedium::Radio,
            index: 0,
            channel: 80,
            datarate: Datarate::Rate2M,
            address: Address::DEFAULT,
        }
    }
}

impl RadioUri {
    pub fn radio(channel: u8, datarate: Datarate, address: Address) -> Result<Self, CodecError> {
        if channel > MAX_RADIO_CHANNEL {
            return Err(CodecError::ChannelOutOfRange(channel as u32));
        }
        Ok(RadioUri {
            medium: LinkMedium::Radio,
            index: 0,
            channel,
            datarate,
            address,
        })
    }
}

/// Parses `radio://<index>/<channel>/<rate>/<address>`.
pub fn parse_uri(s: &str) -> Result<RadioUri, CodecError> {
    let malformed = || CodecError::MalformedUri(s.into());
    let (scheme, rest) = s.split_once("://").ok_or_else(malformed)?;
    let medium = match scheme {
        "radio" => LinkMedium::Radio,
        "serial" => LinkMedium::Serial,
        _ => return Err(malformed()),
    };
    let parts: Vec<&str> = rest.split('/').collect();
    if parts.len() != 4 {
        return Err(malformed());
    }
    let index = parse_decimal(parts[0]).ok_or_else(malformed)?;
    let channel = parse_decimal(parts[1]).ok_or_else(malformed)?;
    if channel > MAX_RADIO_CHANNEL as u32 {
        return Err(CodecError::ChannelOutOfRange(channel));
    }
    let datarate = parts[2].parse()?;
    let address = parts[3].parse()?;
    Ok(RadioUri {
        medium,
        index,
        channel: channel as u8,
        datarate,
        address,
    })
}

// Plain ASCII digits only: `u32::from_str` would also take a leading '+'.
fn parse_decimal(s: &str) -> Option<u32> {
    if s.is_empty() || s.len() > 9 || !s.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

pub fn format_uri(u: &RadioUri) -> String {
    format!(
        "{}://{}/{}/{}/{}",
        u.medium.scheme(),
        u.index,
        u.channel,
        u.datarate,
        u.address.to_hex()
    )
}

impl fmt::Display for RadioUri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_uri(self))
    }
}

impl FromStr for RadioUri {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_uri(s)
    }
}
