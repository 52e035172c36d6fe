//! Static results bundle: bilingual pages per party, an image grid with
//! per-image detail captions, project/tech pages, a machine-readable
//! data file, and the mandatory disclaimer on every page.
//!
//! Emission is a pure function of the run manifest and the locale string
//! tables: same inputs, byte-identical bundle (stable ordering, no
//! timestamps). Plain HTML, relative links only, no client scripting.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::SourceKind;
use crate::pipeline::{ArtifactKind, ContentStore, DocumentOutcome, RunManifest, StageStatus};
use crate::stage::StageKind;

pub const LOCALES: [&str; 2] = ["de", "en"];

/// Marker every page must carry; the bundle check greps for it.
pub const DISCLAIMER_MARKER: &str = "<aside class=\"disclaimer\">";

const REQUIRED_KEYS: [&str; 23] = [
    "site_title",
    "tagline",
    "disclaimer",
    "nav_home",
    "nav_about",
    "nav_tech",
    "about_title",
    "about_body",
    "tech_title",
    "tech_body",
    "parties_heading",
    "images_heading",
    "program_label",
    "compass_label",
    "descriptors_en_label",
    "descriptors_de_label",
    "reasoning_label",
    "violations_label",
    "none_label",
    "failed_label",
    "prev_label",
    "next_label",
    "switch_language_label",
];

#[derive(Debug, Error)]
pub enum SiteError {
    #[error("MissingArtifact: {path}")]
    MissingArtifact { path: String },
    #[error("LocaleGap: locale {locale} is missing key {key}")]
    LocaleGap { locale: String, key: String },
    #[error("manifest incomplete: {detail} (pass allow_incomplete to emit anyway)")]
    Incomplete { detail: String },
    #[error("ReferentialIntegrity: {detail}")]
    ReferentialIntegrity { detail: String },
    #[error("DisclaimerMissing: page {page} has no disclaimer block")]
    DisclaimerMissing { page: String },
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SiteError + '_ {
    move |source| SiteError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Locale string tables for "de" and "en".
#[derive(Debug, Clone, Serialize)]
pub struct LocaleStrings {
    pub tables: BTreeMap<String, BTreeMap<String, String>>,
}

impl LocaleStrings {
    /// Built-in tables; callers may load their own via [`Self::from_json_file`].
    pub fn builtin() -> Self {
        let mut tables = BTreeMap::new();
        tables.insert("de".to_string(), builtin_de());
        tables.insert("en".to_string(), builtin_en());
        LocaleStrings { tables }
    }

    pub fn from_json_file(path: &Path) -> Result<Self, SiteError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let tables: BTreeMap<String, BTreeMap<String, String>> = serde_json::from_str(&text)
            .map_err(|e| SiteError::Io {
                path: path.display().to_string(),
                source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
            })?;
        Ok(LocaleStrings { tables })
    }

    /// Both locales must exist, carry the same key set including every
    /// required key, and ship a non-empty disclaimer.
    pub fn validate(&self) -> Result<(), SiteError> {
        for locale in LOCALES {
            let table = self.tables.get(locale).ok_or_else(|| SiteError::LocaleGap {
                locale: locale.to_string(),
                key: "<entire table>".to_string(),
            })?;
            for key in REQUIRED_KEYS {
                match table.get(key) {
                    None => {
                        return Err(SiteError::LocaleGap {
                            locale: locale.to_string(),
                            key: key.to_string(),
                        })
                    }
                    Some(v) if key == "disclaimer" && v.trim().is_empty() => {
                        return Err(SiteError::LocaleGap {
                            locale: locale.to_string(),
                            key: key.to_string(),
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        let de: BTreeSet<_> = self.tables["de"].keys().collect();
        let en: BTreeSet<_> = self.tables["en"].keys().collect();
        if let Some(key) = de.symmetric_difference(&en).next() {
            let locale = if de.contains(*key) { "en" } else { "de" };
            return Err(SiteError::LocaleGap {
                locale: locale.to_string(),
                key: (*key).to_string(),
            });
        }
        Ok(())
    }

    fn get<'a>(&'a self, locale: &str, key: &str) -> &'a str {
        self.tables
            .get(locale)
            .and_then(|t| t.get(key))
            .map(String::as_str)
            .unwrap_or_default()
    }
}

/// Summary of an emitted bundle.
#[derive(Debug, Clone)]
pub struct SiteBundle {
    pub root: PathBuf,
    /// Bundle-relative page paths.
    pub pages: Vec<String>,
    /// Bundle-relative asset paths.
    pub assets: Vec<String>,
    pub data_file: String,
}

#[derive(Debug, Serialize)]
struct DataEntry {
    party_id: String,
    party_name: String,
    source_kind: SourceKind,
    status: String,
    english_descriptors: Vec<String>,
    german_descriptors: Vec<String>,
    german_reasoning: Option<String>,
    violations: BTreeMap<String, usize>,
    images: Vec<String>,
}

#[derive(Debug, Serialize)]
struct DataFile {
    schema_version: u32,
    run_id: String,
    city: String,
    results: Vec<DataEntry>,
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn slug(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
        .collect()
}

fn doc_sort_key(d: &DocumentOutcome) -> (String, SourceKind) {
    (d.party_id.clone(), d.source_kind)
}

/// Bundle-relative and store paths of one image variant.
type ImagePaths = (String, String);

/// Image asset bundle paths per (party, source), in variant order.
fn image_index(manifest: &RunManifest) -> BTreeMap<(String, SourceKind), Vec<ImagePaths>> {
    let mut index: BTreeMap<(String, SourceKind), Vec<(u32, ImagePaths)>> = BTreeMap::new();
    for artifact in manifest.artifacts.iter().filter(|a| a.kind == ArtifactKind::Image) {
        let file = artifact
            .path
            .rsplit('/')
            .next()
            .unwrap_or(&artifact.path)
            .to_string();
        index
            .entry((artifact.party_id.clone(), artifact.source_kind))
            .or_default()
            .push((artifact.variant, (format!("assets/{file}"), artifact.path.clone())));
    }
    index
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by_key(|(variant, _)| *variant);
            (k, v.into_iter().map(|(_, paths)| paths).collect())
        })
        .collect()
}

/// Build the machine-readable results document for a manifest.
pub fn emit_data_file(manifest: &RunManifest) -> serde_json::Value {
    let images = image_index(manifest);
    let mut documents = manifest.documents.clone();
    documents.sort_by_key(doc_sort_key);
    let results = documents
        .iter()
        .map(|doc| {
            let mut violations = BTreeMap::new();
            for v in &doc.violations {
                *violations.entry(v.kind.label().to_string()).or_insert(0) += 1;
            }
            let failed = doc.status == crate::pipeline::DocumentStatus::Failed;
            DataEntry {
                party_id: doc.party_id.clone(),
                party_name: doc.party_name.clone(),
                source_kind: doc.source_kind,
                status: if failed { "failed" } else { "ok" }.to_string(),
                english_descriptors: doc.english_descriptors.clone(),
                german_descriptors: doc.german_descriptors.clone(),
                german_reasoning: doc.german_reasoning.clone(),
                violations,
                images: if failed {
                    Vec::new()
                } else {
                    images
                        .get(&(doc.party_id.clone(), doc.source_kind))
                        .map(|v| v.iter().map(|(rel, _)| rel.clone()).collect())
                        .unwrap_or_default()
                },
            }
        })
        .collect();
    serde_json::to_value(DataFile {
        schema_version: 1,
        run_id: manifest.run_id.clone(),
        city: manifest.settings.city_name.clone(),
        results,
    })
    .expect("data file serializes")
}

struct PageWriter<'a> {
    out_dir: &'a Path,
    strings: &'a LocaleStrings,
    pages: Vec<String>,
}

impl<'a> PageWriter<'a> {
    fn write_page(
        &mut self,
        rel_path: &str,
        locale: &str,
        title: &str,
        body: &str,
        depth: usize,
    ) -> Result<(), SiteError> {
        let prefix = "../".repeat(depth);
        let s = |key: &str| escape(self.strings.get(locale, key));
        let other = if locale == "de" { "en" } else { "de" };
        let other_path = rel_path.replacen(&format!("{locale}/"), &format!("{other}/"), 1);
        let switch = format!("{prefix}{other_path}");
        let html = format!(
            "<!DOCTYPE html>\n<html lang=\"{locale}\">\n<head>\n<meta charset=\"utf-8\">\n\
             <meta name=\"viewport\" content=\"width=device-width, initial-scale=1\">\n\
             <title>{title} - {site_title}</title>\n\
             <style>{CSS}</style>\n</head>\n<body>\n\
             <header>\n<h1>{site_title}</h1>\n<p class=\"tagline\">{tagline}</p>\n\
             <nav><a href=\"{prefix}{locale}/index.html\">{nav_home}</a> | \
             <a href=\"{prefix}{locale}/about.html\">{nav_about}</a> | \
             <a href=\"{prefix}{locale}/tech.html\">{nav_tech}</a> | \
             <a href=\"{switch}\">{switch_label}</a></nav>\n</header>\n\
             <main>\n{body}\n</main>\n\
             {DISCLAIMER_MARKER}{disclaimer}</aside>\n\
             </body>\n</html>\n",
            title = escape(title),
            site_title = s("site_title"),
            tagline = s("tagline"),
            nav_home = s("nav_home"),
            nav_about = s("nav_about"),
            nav_tech = s("nav_tech"),
            switch_label = s("switch_language_label"),
            disclaimer = s("disclaimer"),
        );
        let path = self.out_dir.join(rel_path);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        std::fs::write(&path, html).map_err(io_err(&path))?;
        self.pages.push(rel_path.to_string());
        Ok(())
    }
}

const CSS: &str = "body{font-family:sans-serif;margin:0 auto;max-width:60rem;padding:1rem}\
figure{display:inline-block;margin:.5rem;max-width:18rem;vertical-align:top}\
figure img{width:100%;border-radius:4px}figcaption{font-size:.8rem;color:#444}\
.disclaimer{display:block;border:2px solid #b00;padding:.75rem;margin:2rem 0;background:#fff4f4}\
nav a{margin-right:.25rem}.tagline{color:#555}.violations{color:#833}";

fn source_label(strings: &LocaleStrings, locale: &str, kind: SourceKind) -> String {
    match kind {
        SourceKind::Program => strings.get(locale, "program_label").to_string(),
        SourceKind::CompassResponses => strings.get(locale, "compass_label").to_string(),
    }
}

fn figure_html(
    strings: &LocaleStrings,
    locale: &str,
    doc: &DocumentOutcome,
    asset_rel: &str,
    variant: usize,
    depth: usize,
) -> String {
    let descriptors = if locale == "de" && !doc.german_descriptors.is_empty() {
        doc.german_descriptors.join(", ")
    } else {
        doc.english_descriptors.join(", ")
    };
    let violations = if doc.violations.is_empty() {
        strings.get(locale, "none_label").to_string()
    } else {
        doc.violations
            .iter()
            .map(|v| v.kind.label().to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    format!(
        "<figure><img src=\"{prefix}{asset}\" alt=\"{party} {variant}\">\
         <figcaption><strong>{party}</strong> ({source}, #{variant})<br>\
         {den}: {en}<br>{dde}: {de}<br>\
         <span class=\"violations\">{dv}: {violations}</span></figcaption></figure>",
        prefix = "../".repeat(depth),
        asset = asset_rel,
        party = escape(&doc.party_name),
        source = escape(&source_label(strings, locale, doc.source_kind)),
        variant = variant,
        den = escape(strings.get(locale, "descriptors_en_label")),
        en = escape(&doc.english_descriptors.join(", ")),
        dde = escape(strings.get(locale, "descriptors_de_label")),
        de = escape(&descriptors),
        dv = escape(strings.get(locale, "violations_label")),
        violations = escape(&violations),
    )
}

/// Emit the complete static bundle for a manifest into `out_dir`.
///
/// `run_dir` is the directory holding the manifest's content store.
/// Unless `allow_incomplete` is set, every document must have reached
/// image generation successfully.
pub fn emit_site(
    manifest: &RunManifest,
    run_dir: &Path,
    strings: &LocaleStrings,
    out_dir: &Path,
    allow_incomplete: bool,
) -> Result<SiteBundle, SiteError> {
    strings.validate()?;

    if !allow_incomplete {
        for doc in &manifest.documents {
            let image_ok = manifest
                .records_for(&doc.party_id, doc.source_kind)
                .iter()
                .any(|r| r.stage == StageKind::ImageGen && r.status == StageStatus::Ok);
            if !image_ok {
                return Err(SiteError::Incomplete {
                    detail: format!(
                        "document {}/{} has no successful image generation",
                        doc.party_id, doc.source_kind
                    ),
                });
            }
        }
    }

    let store = ContentStore::open(run_dir).map_err(|e| SiteError::Io {
        path: run_dir.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    })?;

    // Copy image assets, verifying presence.
    let assets_dir = out_dir.join("assets");
    std::fs::create_dir_all(&assets_dir).map_err(io_err(&assets_dir))?;
    let images = image_index(manifest);
    let mut assets: Vec<String> = Vec::new();
    for entries in images.values() {
        for (rel, store_path) in entries {
            let bytes = store
                .read_bytes(store_path)
                .map_err(|_| SiteError::MissingArtifact {
                    path: store_path.clone(),
                })?;
            let target = out_dir.join(rel);
            std::fs::write(&target, bytes).map_err(io_err(&target))?;
            assets.push(rel.clone());
        }
    }
    assets.sort();
    assets.dedup();

    let mut documents = manifest.documents.clone();
    documents.sort_by_key(doc_sort_key);
    let mut party_ids: Vec<(String, String)> = Vec::new();
    for doc in &documents {
        if !party_ids.iter().any(|(id, _)| id == &doc.party_id) {
            party_ids.push((doc.party_id.clone(), doc.party_name.clone()));
        }
    }

    let mut writer = PageWriter {
        out_dir,
        strings,
        pages: Vec::new(),
    };

    // Root entry page: language chooser.
    {
        let body = "<ul>\n<li><a href=\"de/index.html\">Deutsch</a></li>\n\
                    <li><a href=\"en/index.html\">English</a></li>\n</ul>"
            .to_string();
        let de = escape(strings.get("de", "disclaimer"));
        let en = escape(strings.get("en", "disclaimer"));
        let html = format!(
            "<!DOCTYPE html>\n<html lang=\"de\">\n<head>\n<meta charset=\"utf-8\">\n\
             <title>{title}</title>\n<style>{CSS}</style>\n</head>\n<body>\n\
             <header><h1>{title}</h1></header>\n<main>\n{body}\n</main>\n\
             {DISCLAIMER_MARKER}{de}<hr>{en}</aside>\n</body>\n</html>\n",
            title = escape(strings.get("de", "site_title")),
        );
        let path = out_dir.join("index.html");
        std::fs::write(&path, html).map_err(io_err(&path))?;
        writer.pages.push("index.html".to_string());
    }

    for locale in LOCALES {
        // Locale index: party links plus the full image grid.
        let mut body = String::new();
        body.push_str(&format!(
            "<h2>{}</h2>\n<ul>\n",
            escape(strings.get(locale, "parties_heading"))
        ));
        for (id, name) in &party_ids {
            body.push_str(&format!(
                "<li><a href=\"party/{}.html\">{}</a></li>\n",
                slug(id),
                escape(name)
            ));
        }
        body.push_str("</ul>\n");
        body.push_str(&format!(
            "<h2>{}</h2>\n<section class=\"grid\">\n",
            escape(strings.get(locale, "images_heading"))
        ));
        for doc in &documents {
            if let Some(entries) = images.get(&(doc.party_id.clone(), doc.source_kind)) {
                for (variant, (rel, _)) in entries.iter().enumerate() {
                    body.push_str(&figure_html(strings, locale, doc, rel, variant, 1));
                    body.push('\n');
                }
            }
        }
        body.push_str("</section>");
        writer.write_page(
            &format!("{locale}/index.html"),
            locale,
            strings.get(locale, "nav_home"),
            &body,
            1,
        )?;

        // About / tech pages.
        writer.write_page(
            &format!("{locale}/about.html"),
            locale,
            strings.get(locale, "about_title"),
            &format!(
                "<h2>{}</h2>\n<p>{}</p>",
                escape(strings.get(locale, "about_title")),
                escape(strings.get(locale, "about_body"))
            ),
            1,
        )?;
        writer.write_page(
            &format!("{locale}/tech.html"),
            locale,
            strings.get(locale, "tech_title"),
            &format!(
                "<h2>{}</h2>\n<p>{}</p>",
                escape(strings.get(locale, "tech_title")),
                escape(strings.get(locale, "tech_body"))
            ),
            1,
        )?;

        // Party pages with prev/next navigation.
        for (i, (id, name)) in party_ids.iter().enumerate() {
            let mut body = format!("<h2>{}</h2>\n", escape(name));
            for doc in documents.iter().filter(|d| &d.party_id == id) {
                body.push_str(&format!(
                    "<h3>{}</h3>\n",
                    escape(&source_label(strings, locale, doc.source_kind))
                ));
                if doc.status == crate::pipeline::DocumentStatus::Failed {
                    body.push_str(&format!(
                        "<p class=\"violations\">{}</p>\n",
                        escape(strings.get(locale, "failed_label"))
                    ));
                }
                body.push_str(&format!(
                    "<p><strong>{}:</strong> {}</p>\n",
                    escape(strings.get(locale, "descriptors_en_label")),
                    escape(&doc.english_descriptors.join(", "))
                ));
                if !doc.german_descriptors.is_empty() {
                    body.push_str(&format!(
                        "<p><strong>{}:</strong> {}</p>\n",
                        escape(strings.get(locale, "descriptors_de_label")),
                        escape(&doc.german_descriptors.join(", "))
                    ));
                }
                if locale == "de" {
                    if let Some(reasoning) = &doc.german_reasoning {
                        body.push_str(&format!(
                            "<details><summary>{}</summary><p>{}</p></details>\n",
                            escape(strings.get(locale, "reasoning_label")),
                            escape(reasoning)
                        ));
                    }
                }
                if let Some(entries) = images.get(&(doc.party_id.clone(), doc.source_kind)) {
                    body.push_str("<section class=\"grid\">\n");
                    for (variant, (rel, _)) in entries.iter().enumerate() {
                        body.push_str(&figure_html(strings, locale, doc, rel, variant, 2));
                        body.push('\n');
                    }
                    body.push_str("</section>\n");
                }
            }
            let mut nav = String::from("<p>");
            if i > 0 {
                nav.push_str(&format!(
                    "<a href=\"{}.html\">&laquo; {}</a> ",
                    slug(&party_ids[i - 1].0),
                    escape(strings.get(locale, "prev_label"))
                ));
            }
            if i + 1 < party_ids.len() {
                nav.push_str(&format!(
                    "<a href=\"{}.html\">{} &raquo;</a>",
                    slug(&party_ids[i + 1].0),
                    escape(strings.get(locale, "next_label"))
                ));
            }
            nav.push_str("</p>");
            body.push_str(&nav);
            writer.write_page(
                &format!("{locale}/party/{}.html", slug(id)),
                locale,
                name,
                &body,
                2,
            )?;
        }
    }

    // Machine-readable results and the locale tables themselves.
    let data = emit_data_file(manifest);
    let data_path = out_dir.join("data.json");
    std::fs::write(
        &data_path,
        serde_json::to_string_pretty(&data).expect("data serializes"),
    )
    .map_err(io_err(&data_path))?;

    let locales_dir = out_dir.join("locales");
    std::fs::create_dir_all(&locales_dir).map_err(io_err(&locales_dir))?;
    for locale in LOCALES {
        let path = locales_dir.join(format!("{locale}.json"));
        std::fs::write(
            &path,
            serde_json::to_string_pretty(&strings.tables[locale]).expect("table serializes"),
        )
        .map_err(io_err(&path))?;
    }

    let mut pages = writer.pages;
    pages.sort();
    Ok(SiteBundle {
        root: out_dir.to_path_buf(),
        pages,
        assets,
        data_file: "data.json".to_string(),
    })
}

/// Re-validate an emitted bundle: disclaimer on every page, image links
/// resolve exactly to the asset files, and locale key parity.
pub fn check_bundle(bundle_dir: &Path) -> Result<(), SiteError> {
    let mut html_files = Vec::new();
    walk(bundle_dir, &mut |path| {
        if path.extension().is_some_and(|e| e == "html") {
            html_files.push(path.to_path_buf());
        }
    })
    .map_err(io_err(bundle_dir))?;
    if html_files.is_empty() {
        return Err(SiteError::ReferentialIntegrity {
            detail: "bundle contains no pages".into(),
        });
    }
    html_files.sort();

    let mut referenced: BTreeSet<PathBuf> = BTreeSet::new();
    for page in &html_files {
        let text = std::fs::read_to_string(page).map_err(io_err(page))?;
        if !text.contains(DISCLAIMER_MARKER) {
            return Err(SiteError::DisclaimerMissing {
                page: page.display().to_string(),
            });
        }
        let dir = page.parent().unwrap_or(bundle_dir);
        for src in extract_img_srcs(&text) {
            let mut resolved = dir.to_path_buf();
            for part in src.split('/') {
                match part {
                    ".." => {
                        resolved.pop();
                    }
                    "." => {}
                    p => resolved.push(p),
                }
            }
            referenced.insert(resolved);
        }
    }

    let assets_dir = bundle_dir.join("assets");
    let mut present: BTreeSet<PathBuf> = BTreeSet::new();
    if assets_dir.is_dir() {
        walk(&assets_dir, &mut |path| {
            present.insert(path.to_path_buf());
        })
        .map_err(io_err(&assets_dir))?;
    }
    if referenced != present {
        let missing: Vec<_> = referenced.difference(&present).collect();
        let orphaned: Vec<_> = present.difference(&referenced).collect();
        return Err(SiteError::ReferentialIntegrity {
            detail: format!("missing: {missing:?}, orphaned: {orphaned:?}"),
        });
    }

    let read_keys = |locale: &str| -> Result<BTreeSet<String>, SiteError> {
        let path = bundle_dir.join("locales").join(format!("{locale}.json"));
        let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
        let table: BTreeMap<String, String> =
            serde_json::from_str(&text).map_err(|e| SiteError::Io {
                path: path.display().to_string(),
                source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
            })?;
        Ok(table.into_keys().collect())
    };
    let de = read_keys("de")?;
    let en = read_keys("en")?;
    if let Some(key) = de.symmetric_difference(&en).next() {
        let locale = if de.contains(key) { "en" } else { "de" };
        return Err(SiteError::LocaleGap {
            locale: locale.to_string(),
            key: key.clone(),
        });
    }
    Ok(())
}

fn extract_img_srcs(html: &str) -> Vec<String> {
    let mut srcs = Vec::new();
    let mut rest = html;
    while let Some(pos) = rest.find("src=\"") {
        rest = &rest[pos + 5..];
        if let Some(end) = rest.find('"') {
            srcs.push(rest[..end].to_string());
            rest = &rest[end + 1..];
        } else {
            break;
        }
    }
    srcs
}

fn walk(dir: &Path, visit: &mut impl FnMut(&Path)) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            walk(&path, visit)?;
        } else {
            visit(&path);
        }
    }
    Ok(())
}

fn builtin_de() -> BTreeMap<String, String> {
    [
        ("site_title", "Wahlprogramm-Analyse"),
        ("tagline", "KI-gestützte Analyse und Visualisierung kommunaler Wahlprogramme"),
        (
            "disclaimer",
            "Hinweis: Dies ist ein experimentelles Projekt. Alle Analysen, Übersetzungen und \
             Bilder auf dieser Seite wurden automatisch von generativen KI-Modellen erzeugt. \
             Solche Modelle können Inhalte verkürzen, verfälschen oder politische Verzerrungen \
             aufweisen. Die Ergebnisse sind keine offiziellen Aussagen der Parteien und ersetzen \
             nicht die Lektüre der Originalprogramme.",
        ),
        ("nav_home", "Übersicht"),
        ("nav_about", "Über das Projekt"),
        ("nav_tech", "Technik"),
        ("about_title", "Über das Projekt"),
        (
            "about_body",
            "Dieses Projekt untersucht, wie generative KI politische Bildung unterstützen kann: \
             Wahlprogramme werden übersetzt, zusammengefasst und auf sichtbare Auswirkungen auf \
             das Stadtbild hin analysiert; zu jeder Analyse entstehen Bildvarianten.",
        ),
        ("tech_title", "Technische Umsetzung"),
        (
            "tech_body",
            "Die Pipeline verarbeitet jedes Dokument in fünf Schritten: Übersetzung ins \
             Englische in Blöcken von zehn Sätzen, Zusammenfassung, Ableitung von fünf visuellen \
             Aspekten über ein Reasoning-Modell, Rückübersetzung ins Deutsche und Bildgenerierung. \
             Energieverbrauch und Emissionen jedes Schritts werden protokolliert.",
        ),
        ("parties_heading", "Parteien"),
        ("images_heading", "Alle Bilder"),
        ("program_label", "Wahlprogramm"),
        ("compass_label", "Kommunalomat-Antworten"),
        ("descriptors_en_label", "Visuelle Aspekte (EN)"),
        ("descriptors_de_label", "Visuelle Aspekte (DE)"),
        ("reasoning_label", "KI-Begründung (übersetzt)"),
        ("violations_label", "Formatabweichungen"),
        ("none_label", "keine"),
        ("failed_label", "Die Verarbeitung dieses Dokuments ist fehlgeschlagen."),
        ("prev_label", "Vorherige Partei"),
        ("next_label", "Nächste Partei"),
        ("switch_language_label", "English"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

fn builtin_en() -> BTreeMap<String, String> {
    [
        ("site_title", "Election Program Analysis"),
        ("tagline", "AI-assisted analysis and visualization of municipal election programs"),
        (
            "disclaimer",
            "Note: This is an experimental project. All analyses, translations, and images on \
             this page were generated automatically by generative AI models. Such models can \
             shorten or distort content and may carry political bias. The results are not \
             official party statements and are no substitute for reading the original programs.",
        ),
        ("nav_home", "Overview"),
        ("nav_about", "About"),
        ("nav_tech", "Technology"),
        ("about_title", "About the project"),
        (
            "about_body",
            "This project explores how generative AI can support political education: election \
             programs are translated, summarized, and analyzed for visible effects on the city's \
             appearance; each analysis yields a set of image variants.",
        ),
        ("tech_title", "Technical realization"),
        (
            "tech_body",
            "The pipeline processes each document in five steps: translation to English in \
             chunks of ten sentences, summarization, derivation of five visual aspects via a \
             reasoning model, back-translation to German, and image generation. Energy use and \
             emissions of every step are recorded.",
        ),
        ("parties_heading", "Parties"),
        ("images_heading", "All images"),
        ("program_label", "Election program"),
        ("compass_label", "Election compass responses"),
        ("descriptors_en_label", "Visual aspects (EN)"),
        ("descriptors_de_label", "Visual aspects (DE)"),
        ("reasoning_label", "AI reasoning (translated)"),
        ("violations_label", "Format deviations"),
        ("none_label", "none"),
        ("failed_label", "Processing failed for this document."),
        ("prev_label", "Previous party"),
        ("next_label", "Next party"),
        ("switch_language_label", "Deutsch"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}
