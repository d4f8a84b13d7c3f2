use crate::model::Designation;

/// Stroke and fill for one designation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Swatch {
    pub stroke: &'static str,
    pub fill: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StyleConfig {
    /// One swatch per designation, in [`Designation::ALL`] order.
    pub palette: [Swatch; 8],
    pub life_line_color: &'static str,
    pub absolute_label_color: &'static str,
    pub relative_label_color: &'static str,
    pub grid_color: &'static str,
    pub boundary_color: &'static str,
    pub separator_color: &'static str,
    pub text_color: &'static str,
    pub muted_text_color: &'static str,
    pub background: &'static str,
    /// Smallest pixel distance between two grid lines.
    pub grid_base_spacing: f64,
    pub font_family: &'static str,
    pub title_font_size: f64,
    pub note_font_size: f64,
    pub axis_font_size: f64,
    pub header_font_size: f64,
    pub badge_font_size: f64,
    pub marker_radius: f64,
    pub line_width: f64,
}

impl Default for StyleConfig {
    fn default() -> Self {
        // Okabe-Ito hues with light tints for box fills.
        Self {
            palette: [
                // Symptom
                Swatch {
                    stroke: "#9C8D00",
                    fill: "#FBF8D5",
                },
                // Medication
                Swatch {
                    stroke: "#009E73",
                    fill: "#D4F0E7",
                },
                // Treatment
                Swatch {
                    stroke: "#E69F00",
                    fill: "#FBEFD4",
                },
                // Provider
                Swatch {
                    stroke: "#555555",
                    fill: "#EEEEEE",
                },
                // Test
                Swatch {
                    stroke: "#56B4E9",
                    fill: "#E0F1FB",
                },
                // Procedure
                Swatch {
                    stroke: "#0072B2",
                    fill: "#D6E6F2",
                },
                // Diagnosis
                Swatch {
                    stroke: "#D55E00",
                    fill: "#FBE3D6",
                },
                // LifeEvent
                Swatch {
                    stroke: "#CC79A7",
                    fill: "#F6E3EE",
                },
            ],
            life_line_color: "#7B3294",
            absolute_label_color: "#000000",
            relative_label_color: "#1B7837",
            grid_color: "#E3E3E3",
            boundary_color: "#7F7F7F",
            separator_color: "#BDBDBD",
            text_color: "#222222",
            muted_text_color: "#6B6B6B",
            background: "#FFFFFF",
            grid_base_spacing: 48.0,
            font_family: "Helvetica, Arial, sans-serif",
            title_font_size: 11.0,
            note_font_size: 9.5,
            axis_font_size: 10.0,
            header_font_size: 11.0,
            badge_font_size: 8.0,
            marker_radius: 5.0,
            line_width: 4.0,
        }
    }
}

impl StyleConfig {
    pub fn swatch(&self, designation: Designation) -> Swatch {
        let i = Designation::ALL
            .iter()
            .position(|&d| d == designation)
            .expect("ALL lists every designation");
        self.palette[i]
    }

    /// True when no two designations share a stroke or a fill.
    pub fn palette_is_distinct(&self) -> bool {
        let p = &self.palette;
        (0..p.len()).all(|i| (i + 1..p.len()).all(|j| p[i].stroke != p[j].stroke && p[i].fill != p[j].fill))
    }
}

/// Two-letter badge text.
pub fn badge(designation: Designation) -> &'static str {
    match designation {
        Designation::Symptom => "Sx",
        Designation::Medication => "Rx",
        Designation::Treatment => "Tx",
        Designation::Provider => "Pv",
        Designation::Test => "Ts",
        Designation::Procedure => "Px",
        Designation::Diagnosis => "Dx",
        Designation::LifeEvent => "LE",
    }
}
