//! Per-call device and connectivity exports.
//!
//! The admin center shows, for each party of a call, the device, system, and
//! connectivity parameters. This module ingests the plain-text key-value
//! export of that view. A field the export does not carry stays `None`:
//! absence is itself evidence (some scenarios never populate certain
//! fields), so nothing is ever defaulted.

use std::collections::BTreeMap;

use thiserror::Error;

pub const CALL_DETAIL_SCHEMA: &str = "call-detail/v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("export is empty")]
    Empty,
    #[error("missing 'schema:' line")]
    MissingSchema,
    #[error("unsupported schema {0:?}")]
    UnsupportedSchema(String),
    #[error("line {0} is not 'key: value'")]
    BadLine(u64),
    #[error("export describes no parties")]
    NoParties,
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct PartyDetail {
    pub microphone_device_name: Option<String>,
    pub microphone_driver: Option<String>,
    pub speaker_device_name: Option<String>,
    pub speaker_driver: Option<String>,
    pub system_name: Option<String>,
    pub operating_system: Option<String>,
    pub network_connection_type: Option<String>,
    pub wifi_driver_description: Option<String>,
    pub wifi_driver_version: Option<String>,
    pub wifi_signal_strength: Option<String>,
}

impl PartyDetail {
    fn is_empty(&self) -> bool {
        self.fields().iter().all(|(_, v)| v.is_none())
    }

    /// Field labels and values, in the order the admin center lists them.
    pub fn fields(&self) -> [(&'static str, &Option<String>); 10] {
        [
            ("Microphone device name", &self.microphone_device_name),
            ("Microphone device driver", &self.microphone_driver),
            ("Speaker device name", &self.speaker_device_name),
            ("Speaker device driver", &self.speaker_driver),
            ("System name", &self.system_name),
            ("Operating System", &self.operating_system),
            ("Network connection type", &self.network_connection_type),
            ("Wi-Fi driver description", &self.wifi_driver_description),
            ("Wi-Fi driver version", &self.wifi_driver_version),
            ("Wi-Fi signal strength", &self.wifi_signal_strength),
        ]
    }

    pub fn missing_fields(&self) -> Vec<&'static str> {
        self.fields().iter().filter(|(_, v)| v.is_none()).map(|(k, _)| *k).collect()
    }

    fn set(&mut self, field: &str, value: String) -> bool {
        let slot = match field {
            "microphone.device_name" => &mut self.microphone_device_name,
            "microphone.device_driver" => &mut self.microphone_driver,
            "speaker.device_name" => &mut self.speaker_device_name,
            "speaker.device_driver" => &mut self.speaker_driver,
            "system.name" => &mut self.system_name,
            "system.operating_system" => &mut self.operating_system,
            "network.connection_type" => &mut self.network_connection_type,
            "wifi.driver_description" => &mut self.wifi_driver_description,
            "wifi.driver_version" => &mut self.wifi_driver_version,
            "wifi.signal_strength" => &mut self.wifi_signal_strength,
            _ => return false,
        };
        *slot = Some(value);
        true
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct CallDetailExport {
    pub start_ts: Option<String>,
    pub duration: Option<String>,
    pub audio_quality: Option<String>,
    pub caller: Option<PartyDetail>,
    pub callee: Option<PartyDetail>,
    /// Keys the schema does not define, preserved verbatim.
    pub extras: BTreeMap<String, String>,
}

/// Parse a `call-detail/v1` export. Values keep embedded colons (driver
/// strings contain them); only the first colon separates key from value.
pub fn ingest_call_detail(text: &str) -> Result<CallDetailExport, SchemaError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i as u64 + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let Some((first_no, first)) = lines.next() else {
        return Err(SchemaError::Empty);
    };
    let schema = first
        .split_once(':')
        .filter(|(k, _)| k.trim() == "schema")
        .map(|(_, v)| v.trim())
        .ok_or(SchemaError::MissingSchema)?;
    if schema != CALL_DETAIL_SCHEMA {
        return Err(SchemaError::UnsupportedSchema(schema.to_string()));
    }
    let _ = first_no;

    let mut export = CallDetailExport::default();
    for (no, line) in lines {
        let Some((key, value)) = line.split_once(':') else {
            return Err(SchemaError::BadLine(no));
        };
        let key = key.trim();
        let value = value.trim().to_string();
        match key {
            "call.start" => export.start_ts = Some(value),
            "call.duration" => export.duration = Some(value),
            "call.audio_quality" => export.audio_quality = Some(value),
            _ => {
                let (party, field) = match key.split_once('.') {
                    Some(("caller", rest)) => (export.caller.get_or_insert_default(), rest),
                    Some(("callee", rest)) => (export.callee.get_or_insert_default(), rest),
                    _ => {
                        export.extras.insert(key.to_string(), value);
                        continue;
                    }
                };
                if !party.set(field, value.clone()) {
                    export.extras.insert(key.to_string(), value);
                }
            }
        }
    }

    let empty = |p: &Option<PartyDetail>| p.as_ref().is_none_or(PartyDetail::is_empty);
    if empty(&export.caller) && empty(&export.callee) {
        return Err(SchemaError::NoParties);
    }
    Ok(export)
}

/// Human-readable report of one export, listing each party's fields and
/// calling out absent ones.
pub fn render_call_detail(export: &CallDetailExport) -> String {
    let mut out = String::new();
    for (label, value) in [
        ("Start", &export.start_ts),
        ("Duration", &export.duration),
        ("Audio quality", &export.audio_quality),
    ] {
        if let Some(v) = value {
            out.push_str(&format!("{label}: {v}\n"));
        }
    }
    for (name, party) in [("Caller", &export.caller), ("Callee", &export.callee)] {
        let Some(party) = party else { continue };
        out.push_str(&format!("{name}:\n"));
        for (label, value) in party.fields() {
            match value {
                Some(v) => out.push_str(&format!("  {label}: {v}\n")),
                None => out.push_str(&format!("  {label}: (absent)\n")),
            }
        }
        if party.wifi_driver_description.is_none() {
            out.push_str(
                "  note: Wi-Fi driver description absent; consistent with a PSTN or consumer-Skype party\n",
            );
        }
    }
    for (k, v) in &export.extras {
        out.push_str(&format!("extra {k}: {v}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
schema: call-detail/v1
call.start: Jul 16, 2021, 9:11 PM GMT+2
call.duration: 00:14:17
call.audio_quality: Good
caller.microphone.device_name: Tecnologia Intel\u{00ae} Smart Sound
caller.microphone.device_driver: Intel(R) Corporation: 10.25.0.3950
caller.speaker.device_name: Realtek(R) Audio
caller.speaker.device_driver: Realtek Semiconductor Corp.: 6.0.9045.1
caller.network.connection_type: Ethernet
caller.wifi.driver_description: Scheda virtuale Microsoft Wi-Fi Direct;Intel(R) Wi-Fi 6 AX201 160M Hz
caller.wifi.driver_version: Microsoft:10.0.19041.1;Intel:22.60.0.6
caller.wifi.signal_strength: 0
callee.system.name: DESKTOP-7RB0C4
callee.system.operating_system: Windows 10
";

    #[test]
    fn fields_arrive_verbatim_including_embedded_colons() {
        let export = ingest_call_detail(SAMPLE).unwrap();
        let caller = export.caller.as_ref().unwrap();
        assert_eq!(
            caller.microphone_device_name.as_deref(),
            Some("Tecnologia Intel\u{00ae} Smart Sound")
        );
        assert_eq!(caller.microphone_driver.as_deref(), Some("Intel(R) Corporation: 10.25.0.3950"));
        assert_eq!(caller.speaker_driver.as_deref(), Some("Realtek Semiconductor Corp.: 6.0.9045.1"));
        assert_eq!(
            caller.wifi_driver_version.as_deref(),
            Some("Microsoft:10.0.19041.1;Intel:22.60.0.6")
        );
        assert_eq!(export.duration.as_deref(), Some("00:14:17"));
        assert_eq!(export.callee.as_ref().unwrap().operating_system.as_deref(), Some("Windows 10"));
    }

    #[test]
    fn absent_fields_stay_absent() {
        let text = "schema: call-detail/v1\ncaller.microphone.device_name: USB Mic\n";
        let export = ingest_call_detail(text).unwrap();
        let caller = export.caller.as_ref().unwrap();
        assert_eq!(caller.wifi_driver_description, None);
        assert_eq!(caller.speaker_device_name, None);
        assert!(caller.missing_fields().contains(&"Wi-Fi driver description"));
        assert!(export.callee.is_none());

        let report = render_call_detail(&export);
        assert!(report.contains("Wi-Fi driver description: (absent)"));
        assert!(report.contains("consistent with a PSTN or consumer-Skype party"));
    }

    #[test]
    fn empty_or_unversioned_exports_are_schema_errors() {
        assert_eq!(ingest_call_detail(""), Err(SchemaError::Empty));
        assert_eq!(ingest_call_detail("   \n\n"), Err(SchemaError::Empty));
        assert_eq!(
            ingest_call_detail("caller.system.name: X\n"),
            Err(SchemaError::MissingSchema)
        );
        assert_eq!(
            ingest_call_detail("schema: call-detail/v9\ncaller.system.name: X\n"),
            Err(SchemaError::UnsupportedSchema("call-detail/v9".to_string()))
        );
        assert_eq!(
            ingest_call_detail("schema: call-detail/v1\ncall.duration: 00:01:00\n"),
            Err(SchemaError::NoParties)
        );
    }

    #[test]
    fn unknown_keys_are_preserved_not_dropped() {
        let text = "schema: call-detail/v1\n\
                    caller.system.name: HOST\n\
                    caller.badge.color: blue\n\
                    vendor.build: 1.2.3\n";
        let export = ingest_call_detail(text).unwrap();
        assert_eq!(export.extras["caller.badge.color"], "blue");
        assert_eq!(export.extras["vendor.build"], "1.2.3");
    }

    #[test]
    fn a_line_without_a_colon_is_rejected() {
        let text = "schema: call-detail/v1\ncaller.system.name HOST\n";
        assert_eq!(ingest_call_detail(text), Err(SchemaError::BadLine(2)));
    }
}
