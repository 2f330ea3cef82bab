//! Scenarios shipped inside the binary.

pub struct Bundled {
    pub name: &'static str,
    pub description: &'static str,
    pub text: &'static str,
}

pub const BUNDLED: &[Bundled] = &[
    Bundled {
        name: "fig2",
        description: "secrecy-rate bounds versus blocklength at a fixed channel",
        text: include_str!("../scenarios/fig2.toml"),
    },
    Bundled {
        name: "fig3",
        description: "ergodic secrecy throughput versus blocklength, two secrecy levels",
        text: include_str!("../scenarios/fig3.toml"),
    },
    Bundled {
        name: "fig4",
        description: "effective secrecy throughput versus blocklength under an outage constraint",
        text: include_str!("../scenarios/fig4.toml"),
    },
    Bundled {
        name: "fig5",
        description: "on-off transmission with perfect, quantized and no CSI versus blocklength",
        text: include_str!("../scenarios/fig5.toml"),
    },
];

pub fn find(name: &str) -> Option<&'static Bundled> {
    BUNDLED.iter().find(|b| b.name == name)
}
