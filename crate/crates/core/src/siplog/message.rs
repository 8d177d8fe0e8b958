//! SIP message parsing, limited to the fields dialog reconstruction needs.

use chrono::{DateTime, Utc};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SipParseError {
    #[error("text does not start with a SIP request or status line")]
    NotSip,
    #[error("message has no Call-ID header")]
    MissingCallId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SipKind {
    Request,
    Response,
}

/// One parsed SIP message. `method_or_code` is the request method or the
/// three-digit status code; `body_summary` condenses an SDP body to its
/// media description lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SipMessage {
    pub kind: SipKind,
    pub method_or_code: String,
    pub call_id: String,
    pub from_uri: String,
    pub to_uri: String,
    pub cseq: String,
    pub ts: DateTime<Utc>,
    pub body_summary: Option<String>,
}

impl SipMessage {
    /// Status code as a number, `None` for requests.
    pub fn status_code(&self) -> Option<u16> {
        match self.kind {
            SipKind::Response => self.method_or_code.parse().ok(),
            SipKind::Request => None,
        }
    }
}

/// Parse a SIP fragment, stamping it with the enclosing record's timestamp.
///
/// Header names are matched case-insensitively and the compact forms
/// `i`, `f`, `t` are accepted. From/To values are reduced to the bare URI.
pub fn parse_sip(fragment: &str, ts: DateTime<Utc>) -> Result<SipMessage, SipParseError> {
    let mut lines = fragment.lines();
    let start = lines.next().ok_or(SipParseError::NotSip)?;
    let (kind, method_or_code) = parse_start_line(start).ok_or(SipParseError::NotSip)?;

    let mut call_id = None;
    let mut from_uri = String::new();
    let mut to_uri = String::new();
    let mut cseq = String::new();
    let mut media_lines: Vec<&str> = Vec::new();
    let mut in_body = false;

    for line in lines {
        if in_body {
            if line.starts_with("m=") {
                media_lines.push(line.trim_end());
            }
            continue;
        }
        if line.is_empty() {
            in_body = true;
            continue;
        }
        let Some((name, value)) = line.split_once(':') else { continue };
        let value = value.trim();
        match name.trim().to_ascii_lowercase().as_str() {
            "call-id" | "i" => call_id = Some(value.to_string()),
            "from" | "f" => from_uri = extract_uri(value),
            "to" | "t" => to_uri = extract_uri(value),
            "cseq" => cseq = value.to_string(),
            _ => {}
        }
    }

    let call_id = match call_id {
        Some(id) if !id.is_empty() => id,
        _ => return Err(SipParseError::MissingCallId),
    };
    let body_summary = if media_lines.is_empty() { None } else { Some(media_lines.join("; ")) };

    Ok(SipMessage { kind, method_or_code, call_id, from_uri, to_uri, cseq, ts, body_summary })
}

fn parse_start_line(line: &str) -> Option<(SipKind, String)> {
    if let Some(rest) = line.strip_prefix("SIP/2.0 ") {
        let code = rest.split(' ').next()?;
        if code.len() == 3 && code.bytes().all(|b| b.is_ascii_digit()) {
            return Some((SipKind::Response, code.to_string()));
        }
        return None;
    }
    let mut parts = line.split(' ');
    let method = parts.next()?;
    let _uri = parts.next()?;
    let version = parts.next()?;
    if parts.next().is_some() || version != "SIP/2.0" {
        return None;
    }
    if method.is_empty()
        || method.len() > 16
        || !method.bytes().all(|b| b.is_ascii_uppercase())
    {
        return None;
    }
    Some((SipKind::Request, method.to_string()))
}

/// Reduce a From/To header value to the URI itself: the angle-bracketed part
/// when present, otherwise everything before the first parameter.
fn extract_uri(value: &str) -> String {
    if let (Some(open), Some(close)) = (value.find('<'), value.rfind('>')) {
        if open < close {
            return value[open + 1..close].to_string();
        }
    }
    value.split(';').next().unwrap_or(value).trim().to_string()
}
