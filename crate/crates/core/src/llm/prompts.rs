//! Versioned prompt templates shipped as data files under `prompts/`.
//!
//! File layout:
//!
//! ```text
//! # id: plan
//! # version: 1
//! ## system
//! ...
//! ## user
//! ... {{claim}} ...
//! ```

use std::sync::OnceLock;

use super::Schema;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub id: String,
    pub version: u32,
    pub schema: Schema,
    pub system: String,
    pub user: String,
}

impl Template {
    /// `id@vN`, as recorded on requests.
    pub fn tag(&self) -> String {
        format!("{}@v{}", self.id, self.version)
    }

    /// Substitutes `{{name}}` placeholders. Unknown placeholders are left
    /// in place.
    pub fn render_user(&self, vars: &[(&str, &str)]) -> String {
        let mut out = self.user.clone();
        for (k, v) in vars {
            out = out.replace(&format!("{{{{{k}}}}}"), v);
        }
        out
    }

    pub fn parse(source: &str) -> Result<Template, String> {
        let mut id = None;
        let mut version = None;
        let mut schema = None;
        let mut system = String::new();
        let mut user = String::new();
        let mut section: Option<&str> = None;
        for line in source.lines() {
            if let Some(rest) = line.strip_prefix("## ") {
                section = Some(match rest.trim() {
                    "system" => "system",
                    "user" => "user",
                    other => return Err(format!("unknown section `{other}`")),
                });
                continue;
            }
            match section {
                None => {
                    let Some(header) = line.strip_prefix("# ") else {
                        continue;
                    };
                    let (k, v) = header
                        .split_once(':')
                        .ok_or_else(|| format!("bad header `{line}`"))?;
                    let v = v.trim();
                    match k.trim() {
                        "id" => id = Some(v.to_string()),
                        "version" => {
                            version = Some(v.parse::<u32>().map_err(|e| e.to_string())?)
                        }
                        "schema" => {
                            schema = Some(
                                Schema::parse(v).ok_or_else(|| format!("unknown schema `{v}`"))?,
                            )
                        }
                        other => return Err(format!("unknown header `{other}`")),
                    }
                }
                Some("system") => {
                    system.push_str(line);
                    system.push('\n');
                }
                Some(_) => {
                    user.push_str(line);
                    user.push('\n');
                }
            }
        }
        Ok(Template {
            id: id.ok_or("missing id")?,
            version: version.ok_or("missing version")?,
            schema: schema.ok_or("missing schema")?,
            system: system.trim().to_string(),
            user: user.trim().to_string(),
        })
    }
}

macro_rules! template {
    ($fn:ident, $file:literal) => {
        pub fn $fn() -> &'static Template {
            static CELL: OnceLock<Template> = OnceLock::new();
            CELL.get_or_init(|| {
                Template::parse(include_str!(concat!("../../prompts/", $file)))
                    .expect(concat!("bundled template ", $file, " is well-formed"))
            })
        }
    };
}

template!(plan, "plan.txt");
template!(stance, "stance.txt");
template!(reformulate, "reformulate.txt");
template!(numeric_extraction, "numeric_extraction.txt");
template!(reflect, "reflect.txt");
template!(narrative, "narrative.txt");
template!(model_only, "model_only.txt");
template!(judge, "judge.txt");
template!(rewrite, "rewrite.txt");

pub fn all() -> Vec<&'static Template> {
    vec![
        plan(),
        stance(),
        reformulate(),
        numeric_extraction(),
        reflect(),
        narrative(),
        model_only(),
        judge(),
        rewrite(),
    ]
}
