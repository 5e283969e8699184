//! Style families and the versioned color tables backing them.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub const SINGLE_COLOR_COUNT: usize = 40;
pub const PALETTE_COUNT: usize = 35;

const STYLES_JSON: &str = include_str!("../../assets/styles.json");

#[derive(Deserialize)]
struct StyleTables {
    #[allow(dead_code)]
    version: u32,
    single_colors: Vec<String>,
    palettes: Vec<Vec<String>>,
}

fn tables() -> &'static StyleTables {
    static TABLES: OnceLock<StyleTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let tables: StyleTables =
            serde_json::from_str(STYLES_JSON).expect("bundled styles.json is valid");
        assert_eq!(tables.single_colors.len(), SINGLE_COLOR_COUNT);
        assert_eq!(tables.palettes.len(), PALETTE_COUNT);
        tables
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StyleFamily {
    SingleColor,
    MultiColor,
    Default,
    BlackWhite,
}

impl StyleFamily {
    pub const ALL: [StyleFamily; 4] = [
        StyleFamily::SingleColor,
        StyleFamily::MultiColor,
        StyleFamily::Default,
        StyleFamily::BlackWhite,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StyleFamily::SingleColor => "single_color",
            StyleFamily::MultiColor => "multi_color",
            StyleFamily::Default => "default",
            StyleFamily::BlackWhite => "black_white",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|f| f.as_str() == text)
    }
}

/// Resolved style: family plus the concrete colors drawn from the
/// built-in tables by seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StyleSpec {
    pub family: StyleFamily,
    pub colors: Vec<String>,
    pub seed: u64,
}

impl StyleSpec {
    pub fn new(family: StyleFamily, seed: u64) -> Self {
        let tables = tables();
        let colors = match family {
            StyleFamily::SingleColor => {
                vec![tables.single_colors[(seed as usize) % SINGLE_COLOR_COUNT].clone()]
            }
            StyleFamily::MultiColor => tables.palettes[(seed as usize) % PALETTE_COUNT].clone(),
            StyleFamily::Default | StyleFamily::BlackWhite => Vec::new(),
        };
        StyleSpec {
            family,
            colors,
            seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_have_documented_sizes() {
        let t = tables();
        assert_eq!(t.single_colors.len(), 40);
        assert_eq!(t.palettes.len(), 35);
        assert!(t.palettes.iter().all(|p| (4..=5).contains(&p.len())));
    }

    #[test]
    fn single_color_seeded_reproducible() {
        let a = StyleSpec::new(StyleFamily::SingleColor, 7);
        let b = StyleSpec::new(StyleFamily::SingleColor, 7);
        assert_eq!(a, b);
        assert_eq!(a.colors.len(), 1);
    }

    #[test]
    fn multi_color_palette_size() {
        for seed in 0..35 {
            let spec = StyleSpec::new(StyleFamily::MultiColor, seed);
            assert!((4..=5).contains(&spec.colors.len()));
        }
    }

    #[test]
    fn family_names_roundtrip() {
        for family in StyleFamily::ALL {
            assert_eq!(StyleFamily::parse(family.as_str()), Some(family));
        }
    }
}
