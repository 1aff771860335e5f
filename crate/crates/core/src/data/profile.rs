use serde::{Deserialize, Serialize};

/// Dataset layout conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    NslKdd,
    CicIds2017,
    Generic,
}

/// Canonical column names of the KDD / NSL-KDD files (41 features, the
/// attack label and the difficulty level).
pub const NSL_KDD_COLUMNS: [&str; 43] = [
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
    "label",
    "level",
];

const NSL_KDD_CATEGORICAL: [&str; 3] = ["protocol_type", "service", "flag"];

/// Attack names seen in KDDTrain+ / KDDTest+.
const NSL_KDD_ATTACKS: [&str; 39] = [
    "back",
    "buffer_overflow",
    "ftp_write",
    "guess_passwd",
    "imap",
    "ipsweep",
    "land",
    "loadmodule",
    "multihop",
    "neptune",
    "nmap",
    "perl",
    "phf",
    "pod",
    "portsweep",
    "rootkit",
    "satan",
    "smurf",
    "spy",
    "teardrop",
    "warezclient",
    "warezmaster",
    "apache2",
    "httptunnel",
    "mailbomb",
    "mscan",
    "named",
    "processtable",
    "ps",
    "saint",
    "sendmail",
    "snmpgetattack",
    "snmpguess",
    "sqlattack",
    "udpstorm",
    "worm",
    "xlock",
    "xsnoop",
    "xterm",
];

const CIC_ATTACKS: [&str; 13] = [
    "DDoS",
    "PortScan",
    "Bot",
    "Infiltration",
    "FTP-Patator",
    "SSH-Patator",
    "DoS slowloris",
    "DoS Slowhttptest",
    "DoS Hulk",
    "DoS GoldenEye",
    "Heartbleed",
    // The three web attacks carry a mis-encoded dash in the published files.
    "Web Attack",
    "WebAttack",
];

/// The eight CIC-IDS2017 daily captures in chronological order.
const CIC_DAY_ORDER: [&str; 8] = [
    "monday",
    "tuesday",
    "wednesday",
    "thursday-workinghours-morning",
    "thursday-workinghours-afternoon",
    "friday-workinghours-morning",
    "friday-workinghours-afternoon-portscan",
    "friday-workinghours-afternoon-ddos",
];

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::NslKdd => "nsl-kdd",
            Profile::CicIds2017 => "cic-ids2017",
            Profile::Generic => "generic",
        }
    }

    pub(crate) fn expected_columns(self) -> Option<usize> {
        match self {
            Profile::NslKdd => Some(NSL_KDD_COLUMNS.len()),
            Profile::CicIds2017 => Some(79),
            Profile::Generic => None,
        }
    }

    pub(crate) fn label_column(self) -> Option<&'static str> {
        match self {
            Profile::NslKdd => Some("label"),
            Profile::CicIds2017 => Some("Label"),
            Profile::Generic => None,
        }
    }

    pub(crate) fn forced_categorical(self, name: &str) -> bool {
        match self {
            Profile::NslKdd => NSL_KDD_CATEGORICAL.contains(&name),
            _ => false,
        }
    }

    /// Map a raw label to 0 (normal/benign) or 1 (attack).
    pub(crate) fn label_value(self, raw: &str) -> Option<f64> {
        let s = raw.trim();
        match self {
            Profile::NslKdd => {
                if s == "normal" {
                    Some(0.0)
                } else if NSL_KDD_ATTACKS.contains(&s) {
                    Some(1.0)
                } else {
                    None
                }
            }
            Profile::CicIds2017 => {
                if s == "BENIGN" {
                    Some(0.0)
                } else if CIC_ATTACKS.iter().any(|a| s == *a || (a.starts_with("Web") && s.starts_with(a))) {
                    Some(1.0)
                } else {
                    None
                }
            }
            Profile::Generic => match s.to_ascii_lowercase().as_str() {
                "0" | "normal" | "benign" => Some(0.0),
                "1" | "attack" | "malicious" | "anomaly" => Some(1.0),
                _ => None,
            },
        }
    }

    /// Sort key placing CIC-IDS2017 daily files in capture order.
    pub(crate) fn file_rank(self, file_name: &str) -> usize {
        if self != Profile::CicIds2017 {
            return 0;
        }
        let lower = file_name.to_ascii_lowercase();
        CIC_DAY_ORDER
            .iter()
            .enumerate()
            .rev()
            .find(|(_, day)| lower.starts_with(*day))
            .map_or(CIC_DAY_ORDER.len(), |(i, _)| i)
    }
}

impl std::str::FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "nsl-kdd" | "nslkdd" => Ok(Profile::NslKdd),
            "cic-ids2017" | "cicids2017" | "cic" => Ok(Profile::CicIds2017),
            "generic" => Ok(Profile::Generic),
            other => Err(format!("unknown profile {other:?}")),
        }
    }
}
