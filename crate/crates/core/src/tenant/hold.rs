//! Legal-hold content-location reference.
//!
//! When placing Teams content on hold, each kind of content lives in a
//! different store. This table maps the six scenarios to the location an
//! investigator must preserve.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no hold location defined for scenario {0:?}")]
pub struct UnknownScenario(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum HoldScenario {
    UserChats,
    ChannelChats,
    TeamFileContent,
    PrivateChannelFiles,
    UserPrivateContent,
    CardContent,
}

impl HoldScenario {
    pub const ALL: [HoldScenario; 6] = [
        HoldScenario::UserChats,
        HoldScenario::ChannelChats,
        HoldScenario::TeamFileContent,
        HoldScenario::PrivateChannelFiles,
        HoldScenario::UserPrivateContent,
        HoldScenario::CardContent,
    ];

    /// The scenario as the admin documentation words it.
    pub fn description(self) -> &'static str {
        match self {
            HoldScenario::UserChats => {
                "Teams chats for a user (for example, 1:1 chats, 1:N group chats, and private channel conversations)"
            }
            HoldScenario::ChannelChats => "Teams channel chats (excluding private channels)",
            HoldScenario::TeamFileContent => {
                "Teams file content (for example, Wiki content and files)"
            }
            HoldScenario::PrivateChannelFiles => "Teams private channel files",
            HoldScenario::UserPrivateContent => "User's private content",
            HoldScenario::CardContent => "Card content in chats",
        }
    }

    /// Compact key accepted by `parse` and used in machine-readable output.
    pub fn short_name(self) -> &'static str {
        match self {
            HoldScenario::UserChats => "teams chats for a user",
            HoldScenario::ChannelChats => "teams channel chats",
            HoldScenario::TeamFileContent => "teams file content",
            HoldScenario::PrivateChannelFiles => "teams private channel files",
            HoldScenario::UserPrivateContent => "user's private content",
            HoldScenario::CardContent => "card content in chats",
        }
    }

    /// Accepts either the full documented wording or its short prefix,
    /// case-insensitively.
    pub fn parse(text: &str) -> Result<HoldScenario, UnknownScenario> {
        let norm = text.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|s| norm == s.short_name() || norm == s.description().to_ascii_lowercase())
            .ok_or_else(|| UnknownScenario(text.to_string()))
    }
}

impl fmt::Display for HoldScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.description())
    }
}

/// Where to place the hold for one scenario.
pub fn hold_location(scenario: HoldScenario) -> &'static str {
    match scenario {
        HoldScenario::UserChats => "User mailbox.",
        HoldScenario::ChannelChats => "Group mailbox used for the team.",
        HoldScenario::TeamFileContent => "SharePoint site used by the team.",
        HoldScenario::PrivateChannelFiles => "Dedicated SharePoint site for private channels.",
        HoldScenario::UserPrivateContent => "The user's OneDrive for Business account.",
        HoldScenario::CardContent => {
            "User mailbox for 1:1 chats, 1:N group chats, and private channel conversations or group mailbox for card content in channel messages."
        }
    }
}

/// The complete scenario→location table, in documentation order.
pub fn hold_map() -> [(HoldScenario, &'static str); 6] {
    HoldScenario::ALL.map(|s| (s, hold_location(s)))
}
