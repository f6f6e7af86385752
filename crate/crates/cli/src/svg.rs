//! Minimal deterministic SVG plotting: axes, ticks, polylines, markers,
//! and reference lines. Curves are drawn from explicit sample arrays; the
//! caller samples interpolants at whatever density it wants.

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const ML: f64 = 72.0;
const MR: f64 = 24.0;
const MT: f64 = 42.0;
const MB: f64 = 54.0;

enum Shape {
    Line {
        xs: Vec<f64>,
        ys: Vec<f64>,
        color: String,
        width: f64,
        dash: Option<String>,
    },
    Markers {
        xs: Vec<f64>,
        ys: Vec<f64>,
        color: String,
        radius: f64,
    },
    HLine {
        y: f64,
        color: String,
        dash: Option<String>,
    },
    VLine {
        x: f64,
        color: String,
        dash: Option<String>,
    },
}

pub struct Plot {
    title: String,
    xlabel: String,
    ylabel: String,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    shapes: Vec<Shape>,
    legend: Vec<(String, String)>,
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        return format!("{v:.1e}");
    }
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn dash_attr(dash: &Option<String>) -> String {
    dash.as_ref()
        .map(|d| format!(" stroke-dasharray=\"{d}\""))
        .unwrap_or_default()
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn new(title: &str, xlabel: &str, ylabel: &str) -> Plot {
        Plot {
            title: title.into(),
            xlabel: xlabel.into(),
            ylabel: ylabel.into(),
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
            shapes: Vec::new(),
            legend: Vec::new(),
        }
    }

    /// Grow the data ranges; drawing calls do this implicitly, so this is
    /// only needed to force extra headroom (e.g. to include u = 0).
    pub fn include(&mut self, x: f64, y: f64) {
        self.x_min = self.x_min.min(x);
        self.x_max = self.x_max.max(x);
        self.y_min = self.y_min.min(y);
        self.y_max = self.y_max.max(y);
    }

    fn include_all(&mut self, xs: &[f64], ys: &[f64]) {
        for (&x, &y) in xs.iter().zip(ys.iter()) {
            self.include(x, y);
        }
    }

    pub fn line(&mut self, xs: &[f64], ys: &[f64], color: &str, width: f64, dash: Option<&str>) {
        self.include_all(xs, ys);
        self.shapes.push(Shape::Line {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            color: color.into(),
            width,
            dash: dash.map(String::from),
        });
    }

    pub fn markers(&mut self, xs: &[f64], ys: &[f64], color: &str, radius: f64) {
        self.include_all(xs, ys);
        self.shapes.push(Shape::Markers {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            color: color.into(),
            radius,
        });
    }

    pub fn hline(&mut self, y: f64, color: &str, dash: Option<&str>) {
        self.include(self.x_min, y);
        self.shapes.push(Shape::HLine {
            y,
            color: color.into(),
            dash: dash.map(String::from),
        });
    }

    pub fn vline(&mut self, x: f64, color: &str, dash: Option<&str>) {
        self.include(x, self.y_min);
        self.shapes.push(Shape::VLine {
            x,
            color: color.into(),
            dash: dash.map(String::from),
        });
    }

    pub fn legend_entry(&mut self, color: &str, label: &str) {
        self.legend.push((color.into(), label.into()));
    }

    /// Render to a standalone SVG document.
    pub fn render(&self) -> String {
        let (x0, x1) = pad_range(self.x_min, self.x_max);
        let (y0, y1) = pad_range(self.y_min, self.y_max);
        let sx = (WIDTH - ML - MR) / (x1 - x0);
        let sy = (HEIGHT - MT - MB) / (y1 - y0);
        let px = |x: f64| ML + (x - x0) * sx;
        let py = |y: f64| HEIGHT - MB - (y - y0) * sy;

        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        out.push_str(&format!(
            "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
            WIDTH / 2.0,
            xml_escape(&self.title)
        ));
        out.push_str(&format!(
            "<rect x=\"{ML}\" y=\"{MT}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
            WIDTH - ML - MR,
            HEIGHT - MT - MB
        ));

        for k in 0..=4 {
            let fx = x0 + (x1 - x0) * k as f64 / 4.0;
            let fy = y0 + (y1 - y0) * k as f64 / 4.0;
            let tx = px(fx);
            let ty = py(fy);
            out.push_str(&format!(
                "<line x1=\"{tx:.2}\" y1=\"{}\" x2=\"{tx:.2}\" y2=\"{}\" stroke=\"black\"/>\n",
                HEIGHT - MB,
                HEIGHT - MB + 5.0
            ));
            out.push_str(&format!(
                "<text x=\"{tx:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                HEIGHT - MB + 18.0,
                fmt_tick(fx)
            ));
            out.push_str(&format!(
                "<line x1=\"{}\" y1=\"{ty:.2}\" x2=\"{ML}\" y2=\"{ty:.2}\" stroke=\"black\"/>\n",
                ML - 5.0
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                ML - 8.0,
                ty + 4.0,
                fmt_tick(fy)
            ));
        }
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
            ML + (WIDTH - ML - MR) / 2.0,
            HEIGHT - 12.0,
            xml_escape(&self.xlabel)
        ));
        out.push_str(&format!(
            "<text x=\"18\" y=\"{mid}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 {mid})\">{}</text>\n",
            xml_escape(&self.ylabel),
            mid = MT + (HEIGHT - MT - MB) / 2.0,
        ));

        out.push_str(&format!(
            "<clipPath id=\"frame\"><rect x=\"{ML}\" y=\"{MT}\" width=\"{}\" height=\"{}\"/></clipPath>\n<g clip-path=\"url(#frame)\">\n",
            WIDTH - ML - MR,
            HEIGHT - MT - MB
        ));
        for shape in &self.shapes {
            match shape {
                Shape::Line {
                    xs,
                    ys,
                    color,
                    width,
                    dash,
                } => {
                    let pts = xs
                        .iter()
                        .zip(ys.iter())
                        .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
                        .collect::<Vec<_>>()
                        .join(" ");
                    out.push_str(&format!(
                        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\"{} points=\"{pts}\"/>\n",
                        dash_attr(dash)
                    ));
                }
                Shape::Markers {
                    xs,
                    ys,
                    color,
                    radius,
                } => {
                    out.push_str(&format!("<g fill=\"{color}\">"));
                    for (&x, &y) in xs.iter().zip(ys.iter()) {
                        out.push_str(&format!(
                            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{radius}\"/>",
                            px(x),
                            py(y)
                        ));
                    }
                    out.push_str("</g>\n");
                }
                Shape::HLine { y, color, dash } => {
                    out.push_str(&format!(
                        "<line x1=\"{ML}\" y1=\"{0:.2}\" x2=\"{1}\" y2=\"{0:.2}\" stroke=\"{color}\"{2}/>\n",
                        py(*y),
                        WIDTH - MR,
                        dash_attr(dash)
                    ));
                }
                Shape::VLine { x, color, dash } => {
                    out.push_str(&format!(
                        "<line x1=\"{0:.2}\" y1=\"{MT}\" x2=\"{0:.2}\" y2=\"{1}\" stroke=\"{color}\"{2}/>\n",
                        px(*x),
                        HEIGHT - MB,
                        dash_attr(dash)
                    ));
                }
            }
        }
        out.push_str("</g>\n");

        for (i, (color, label)) in self.legend.iter().enumerate() {
            let ly = MT + 16.0 + 18.0 * i as f64;
            out.push_str(&format!(
                "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                WIDTH - MR - 150.0,
                WIDTH - MR - 122.0
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
                WIDTH - MR - 116.0,
                ly + 4.0,
                xml_escape(label)
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

fn pad_range(lo: f64, hi: f64) -> (f64, f64) {
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let span = (hi - lo).max(1e-12 * hi.abs().max(1.0));
    (lo - 0.05 * span, hi + 0.05 * span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_document() {
        let mut p = Plot::new("demo & more", "x", "y");
        p.line(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.5], "steelblue", 1.5, None);
        p.markers(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.5], "black", 2.5);
        p.hline(0.0, "gray", Some("4 3"));
        p.vline(1.5, "firebrick", None);
        p.legend_entry("steelblue", "curve");
        let svg = p.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains("circle"));
        assert!(svg.contains("demo &amp; more"));
        assert!(svg.matches("<line").count() >= 10);
    }

    #[test]
    fn rendering_is_deterministic() {
        let build = || {
            let mut p = Plot::new("t", "x", "y");
            p.line(&[0.0, 0.5, 1.0], &[1.0, 0.25, 0.8], "black", 1.0, Some("2 2"));
            p.render()
        };
        assert_eq!(build(), build());
    }
}
