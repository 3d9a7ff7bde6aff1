//! One check per acceptance criterion. Each returns a one-line summary on
//! success and a description of the first disagreement on failure.

use std::collections::BTreeSet;
use std::process::Command;

use keyframer::css::{parse_css, serialize_css, Item, Rgba, Stylesheet, TypedValue};
use keyframer::lint::{lint, lint_candidate, LintCode, LintReport};
use keyframer::prompting::{ReplayFixture, ReplayProvider};
use keyframer::property_sheet::{apply_edit, derive_sheet, with_transform_field, transform_fields, PropertyEntry, Widget};
use keyframer::session::{compute_stats, create_session, replay_session, IterationRequest, Session};
use keyframer::stream_parse::{parse_response, DesignCandidate, ParserState};
use keyframer::svg::{bake_transforms, parse_svg, preprocess, serialize, ElementIndex, SvgElement};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use super::bake_oracle::{self, Shape, ShapeKind, TransformKind};
use super::{bin, fixture, read, response_files, session_fixtures};

pub type Outcome = Result<String, String>;

pub fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap()
}

// ---------------------------------------------------------------- prompts

pub fn prompt_fidelity() -> Outcome {
    let specs: Vec<Value> = serde_json::from_str(&read("prompts/specs.json")).unwrap();
    for spec in &specs {
        let name = spec["name"].as_str().unwrap();
        let mut cmd = Command::new(bin());
        cmd.arg("prompt")
            .arg(fixture(spec["svg"].as_str().unwrap()))
            .args(["--text", spec["text"].as_str().unwrap()])
            .args(["--count", &spec["count"].to_string()])
            .args(["--dry-run", "--raw-svg"]);
        if let Some(css) = spec["extend"].as_str() {
            cmd.arg("--extend").arg(fixture(css));
        }
        let out = cmd.output().map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{name}: exit {:?}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
        }
        let golden = read(&format!("prompts/{name}.golden.txt"));
        let got = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
        if got != golden {
            let at = got.bytes().zip(golden.bytes()).position(|(a, b)| a != b).unwrap_or(got.len().min(golden.len()));
            return Err(format!("{name}: differs from golden at byte {at}"));
        }
    }
    Ok(format!("{} prompts byte-equal to golden", specs.len()))
}

// ---------------------------------------------------------------- lint

pub struct LintCase {
    pub row: String,
    pub file: String,
    pub svg: String,
    pub scope: u32,
    pub expected: BTreeSet<LintCode>,
}

pub fn lint_cases() -> Vec<LintCase> {
    let manifest: Vec<Value> = serde_json::from_str(&read("lint/cases.json")).unwrap();
    let mut out = Vec::new();
    for c in manifest {
        let expected: BTreeSet<LintCode> = serde_json::from_value(c["expected"].clone()).unwrap();
        for (side, codes) in [("positive", expected), ("negative", BTreeSet::new())] {
            out.push(LintCase {
                row: c["row"].as_str().unwrap().to_string(),
                file: c[side].as_str().unwrap().to_string(),
                svg: c["svg"].as_str().unwrap().to_string(),
                scope: c["scope"].as_u64().unwrap() as u32,
                expected: codes,
            });
        }
    }
    out
}

pub fn index_of(svg_fixture: &str) -> ElementIndex {
    preprocess(&read(&format!("svg/{svg_fixture}"))).unwrap().index
}

/// Lints a fixture the way the CLI does: response text is split into
/// candidates, anything else is linted as a stylesheet.
pub fn lint_fixture(text: &str, index: &ElementIndex, scope: u32) -> Vec<(Stylesheet, LintReport)> {
    if text.contains("<style") || text.contains("<stle") {
        parse_response(text)
            .1
            .iter()
            .map(|c| (parse_css(&c.css_text).sheet, lint_candidate(c, index, scope)))
            .collect()
    } else {
        let sheet = parse_css(text).sheet;
        let report = lint(&sheet, index, scope);
        vec![(sheet, report)]
    }
}

pub fn lint_taxonomy() -> Outcome {
    let cases = lint_cases();
    let mut fixed = 0;
    for case in &cases {
        let index = index_of(&case.svg);
        let text = read(&format!("lint/{}", case.file));
        for (_, report) in lint_fixture(&text, &index, case.scope) {
            if report.codes() != case.expected {
                return Err(format!("{} ({}): expected {:?}, got {:?}", case.row, case.file, case.expected, report.codes()));
            }
            let fixable: BTreeSet<LintCode> =
                report.findings.iter().filter(|f| f.fix.is_some()).map(|f| f.code).collect();
            if fixable.is_empty() {
                continue;
            }
            let repaired = report.fixed_sheet.clone().ok_or(format!("{}: fixable findings but no fix", case.file))?;
            let after = lint(&repaired, &index, case.scope);
            let before_errors: BTreeSet<LintCode> = report
                .findings
                .iter()
                .filter(|f| f.severity == keyframer::lint::Severity::Error)
                .map(|f| f.code)
                .collect();
            for f in &after.findings {
                if fixable.contains(&f.code) {
                    return Err(format!("{}: {:?} survives auto_fix", case.file, f.code));
                }
                if f.severity == keyframer::lint::Severity::Error && !before_errors.contains(&f.code) {
                    return Err(format!("{}: auto_fix introduced {:?}", case.file, f.code));
                }
            }
            fixed += 1;
        }
    }
    Ok(format!("{} cases classified exactly, {fixed} repaired cleanly", cases.len()))
}

// ---------------------------------------------------------------- streaming

pub fn random_chunks(text: &str, rng: &mut ChaCha8Rng) -> Vec<String> {
    let boundaries: Vec<usize> = text.char_indices().map(|(i, _)| i).skip(1).collect();
    let mut cuts: Vec<usize> = match rng.random_range(0..4) {
        // one character at a time
        0 => boundaries.clone(),
        1 => boundaries.iter().copied().filter(|_| rng.random_bool(0.05)).collect(),
        2 => boundaries.iter().copied().filter(|_| rng.random_bool(0.3)).collect(),
        _ => boundaries.iter().copied().filter(|_| rng.random_bool(0.01)).collect(),
    };
    cuts.push(text.len());
    let mut out = Vec::with_capacity(cuts.len());
    let mut start = 0;
    for cut in cuts {
        out.push(text[start..cut].to_string());
        start = cut;
    }
    out
}

pub fn feed_all(chunks: &[String]) -> Vec<DesignCandidate> {
    let mut state = ParserState::new();
    for chunk in chunks {
        state.feed(chunk);
    }
    state.finish();
    state.into_candidates()
}

pub fn chunking_equivalence() -> Outcome {
    let files = response_files();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c4a7);
    let mut runs = 0;
    for path in &files {
        let text = std::fs::read_to_string(path).unwrap();
        let whole = parse_response(&text).1;
        for k in 0..50 {
            let chunks = random_chunks(&text, &mut rng);
            let streamed = feed_all(&chunks);
            if streamed != whole {
                return Err(format!(
                    "{} chunking #{k} ({} chunks): {} candidates streamed vs {} whole",
                    path.file_name().unwrap().to_string_lossy(),
                    chunks.len(),
                    streamed.len(),
                    whole.len()
                ));
            }
            runs += 1;
        }
    }
    Ok(format!("{} responses x 50 chunkings, {runs} identical", files.len()))
}

// ---------------------------------------------------------------- css

/// Properties and transform functions every round-trip corpus must exercise.
pub const CORPUS_PROPERTIES: &[&str] = &[
    "animation-duration",
    "animation-timing-function",
    "animation-delay",
    "opacity",
    "fill",
    "visibility",
    "filter",
    "font-family",
    "animation-direction",
    "animation-play-state",
    "animation-fill-mode",
];

pub const CORPUS_TRANSFORMS: &[&str] = &[
    "scale", "scaleX", "scaleY", "translate", "translateX", "translateY", "rotate", "rotateX", "rotateY",
];

pub fn css_corpus() -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(fixture("css"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "css"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect()
}

fn collect_usage(sheet: &Stylesheet, props: &mut BTreeSet<String>, funcs: &mut BTreeSet<String>) -> Result<(), String> {
    for (_, decl) in sheet.declarations() {
        props.insert(decl.property.clone());
        if CORPUS_PROPERTIES.contains(&decl.property.as_str()) || decl.property == "transform" {
            if decl.value.is_raw() {
                return Err(format!("`{}: {}` was not typed", decl.property, decl.raw));
            }
        }
        if let TypedValue::TransformList(list) = &decl.value {
            funcs.extend(list.iter().map(|f| f.name.clone()));
        }
    }
    Ok(())
}

pub fn css_roundtrip() -> Outcome {
    let corpus = css_corpus();
    let mut props = BTreeSet::new();
    let mut funcs = BTreeSet::new();
    let mut declarations = 0;
    for (name, text) in &corpus {
        let first = parse_css(text);
        if let Some(d) = first.diagnostics.iter().find(|d| !d.message.contains("at-rule")) {
            return Err(format!("{name}: {d:?}"));
        }
        let printed = serialize_css(&first.sheet);
        let second = parse_css(&printed);
        if second.sheet != first.sheet {
            return Err(format!("{name}: structure changed after serialize\n{printed}"));
        }
        if serialize_css(&second.sheet) != printed {
            return Err(format!("{name}: serialization is not a fixed point"));
        }
        collect_usage(&first.sheet, &mut props, &mut funcs).map_err(|e| format!("{name}: {e}"))?;
        declarations += first.sheet.declarations().len();
    }
    for p in CORPUS_PROPERTIES {
        if !props.contains(*p) {
            return Err(format!("corpus lacks {p}"));
        }
    }
    for f in CORPUS_TRANSFORMS {
        if !funcs.contains(*f) {
            return Err(format!("corpus lacks transform {f}()"));
        }
    }
    Ok(format!("{} files, {declarations} declarations, 0 failures", corpus.len()))
}

// ---------------------------------------------------------------- baking

pub const BAKE_CASES_PER_PAIR: usize = 30;
pub const BAKE_TOLERANCE: f64 = 1e-6;

fn find<'a>(el: &'a SvgElement, id: &str) -> Option<&'a SvgElement> {
    if el.id() == Some(id) {
        return Some(el);
    }
    el.child_elements().find_map(|c| find(c, id))
}

fn any_transform(el: &SvgElement) -> bool {
    el.attr("transform").is_some() || el.child_elements().any(any_transform)
}

/// Bakes one generated case and returns the oracle's worst deviation.
pub fn bake_case(case: &bake_oracle::Case) -> Result<f64, String> {
    let doc = parse_svg(&case.svg).map_err(|e| e.to_string())?;
    let baked = bake_transforms(&doc);
    if !baked.warnings.is_empty() {
        return Err(format!("unexpected warnings {:?}", baked.warnings));
    }
    let text = serialize(&baked, false);
    let reread = parse_svg(&text).map_err(|e| e.to_string())?;
    if any_transform(&reread.root) {
        return Err(format!("transform left behind: {text}"));
    }
    let el = find(&reread.root, "target").ok_or("target lost")?;
    let shape = Shape::read(&el.name, |k| el.attr(k).map(str::to_string));
    Ok(bake_oracle::max_deviation(&case.shape, &case.total, &shape))
}

pub fn transform_baking() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xba4e);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for t in TransformKind::ALL {
        for s in ShapeKind::ALL {
            for k in 0..BAKE_CASES_PER_PAIR {
                let case = bake_oracle::random_case(t, s, &mut rng);
                let dev = bake_case(&case).map_err(|e| format!("{t:?}/{s:?} #{k}: {e}\n{}", case.svg))?;
                if dev > BAKE_TOLERANCE || dev.is_nan() {
                    return Err(format!("{t:?}/{s:?} #{k}: deviation {dev:e}\n{}", case.svg));
                }
                worst = worst.max(dev);
                count += 1;
            }
        }
    }
    Ok(format!(
        "{count} cases over {} pairs, worst deviation {worst:.1e}",
        TransformKind::ALL.len() * ShapeKind::ALL.len()
    ))
}

// ---------------------------------------------------------------- editing

/// A value the entry's widget could produce, or None when the widget has no
/// structured input for this value.
pub fn widget_value(entry: &PropertyEntry, rng: &mut ChaCha8Rng) -> Option<TypedValue> {
    if matches!(entry.value, TypedValue::List(_) | TypedValue::Raw(_)) {
        return None;
    }
    Some(match &entry.widget {
        Widget::ColorPicker => TypedValue::Color(Rgba::rgb(rng.random(), rng.random(), rng.random())),
        Widget::TimingCurve => {
            if rng.random_bool(0.5) {
                let preset = ["linear", "ease", "ease-in", "ease-out", "ease-in-out"].choose(rng).unwrap();
                TypedValue::Keyword(preset.to_string())
            } else {
                let x = |rng: &mut ChaCha8Rng| rng.random_range(0..=100) as f64 / 100.0;
                let y = |rng: &mut ChaCha8Rng| rng.random_range(-50..=150) as f64 / 100.0;
                TypedValue::Bezier([x(rng), y(rng), x(rng), y(rng)])
            }
        }
        Widget::DurationSeconds => TypedValue::Time(rng.random_range(1..=200) as f64 / 20.0),
        Widget::DelaySeconds => TypedValue::Time(rng.random_range(-40..=100) as f64 / 20.0),
        Widget::Number => TypedValue::Number(rng.random_range(0..=100) as f64 / 100.0),
        Widget::Percent => TypedValue::Percentage(rng.random_range(0..=100) as f64),
        Widget::KeywordChoice { options } => TypedValue::Keyword(options.choose(rng).unwrap().clone()),
        Widget::TransformFields => {
            let fields = transform_fields(&entry.value)?;
            let field = fields.choose(rng)?;
            let new = rng.random_range(-720..=720) as f64 / 4.0;
            with_transform_field(&entry.value, field.function_index, field.arg_index, new)?
        }
        Widget::Text => return None,
    })
}

/// The same edit made by reaching into the stylesheet directly.
pub fn direct_edit(sheet: &Stylesheet, entry: &PropertyEntry, value: &TypedValue) -> Stylesheet {
    let mut out = sheet.clone();
    let path = entry.source.path;
    let decl = match (&mut out.items[path.item], path.frame) {
        (Item::Style(rule), None) => &mut rule.declarations[path.declaration],
        (Item::Keyframes(k), Some(f)) => &mut k.frames[f].declarations[path.declaration],
        _ => panic!("entry path does not resolve"),
    };
    assert_eq!(decl.property, entry.property);
    decl.value = value.clone();
    decl.raw = value.to_string();
    out
}

pub fn editing_corpus() -> Vec<(Stylesheet, ElementIndex)> {
    let saturn = index_of("saturn.svg");
    let rocket = index_of("rocket.svg");
    let mut out: Vec<(Stylesheet, ElementIndex)> = css_corpus()
        .into_iter()
        .map(|(_, text)| (parse_css(&text).sheet, saturn.clone()))
        .collect();
    for path in response_files() {
        let text = std::fs::read_to_string(&path).unwrap();
        let index = if text.contains("#flame") || text.contains("#rocketship") || text.contains("#star") {
            rocket.clone()
        } else {
            saturn.clone()
        };
        for c in parse_response(&text).1 {
            let sheet = parse_css(&c.css_text).sheet;
            if !sheet.is_empty() {
                out.push((sheet, index.clone()));
            }
        }
    }
    out
}

pub const EDIT_COUNT: usize = 100;

pub fn bidirectional_editing() -> Outcome {
    let corpus = editing_corpus();
    let mut rng = ChaCha8Rng::seed_from_u64(0xed17);
    let mut done = 0;
    let mut attempts = 0;
    let mut widgets = BTreeSet::new();
    while done < EDIT_COUNT {
        attempts += 1;
        if attempts > 100 * EDIT_COUNT {
            return Err(format!("only {done} editable entries found"));
        }
        let (sheet, index) = corpus.choose(&mut rng).unwrap();
        let property_sheet = derive_sheet(sheet, index);
        let entries: Vec<&PropertyEntry> = property_sheet.entries().collect();
        let Some(entry) = entries.choose(&mut rng) else { continue };
        let Some(value) = widget_value(entry, &mut rng) else { continue };
        let via_sheet = apply_edit(sheet, &entry.source, &value).map_err(|e| format!("{}: {e}", entry.property))?;
        let direct = direct_edit(sheet, entry, &value);
        if via_sheet != direct {
            return Err(format!("edit #{done} of {} to `{value}` disagrees with the direct edit", entry.property));
        }
        let reparsed = parse_css(&serialize_css(&via_sheet)).sheet;
        if reparsed != direct {
            return Err(format!("edit #{done} of {} to `{value}` does not survive serialization", entry.property));
        }
        let rederived = derive_sheet(&via_sheet, index);
        let shown = rederived.entries().find(|e| e.source.path == entry.source.path).map(|e| &e.value);
        if shown != Some(&value) {
            return Err(format!("edit #{done}: property sheet shows {shown:?}, expected {value:?}"));
        }
        widgets.insert(format!("{:?}", entry.widget).split([' ', '{']).next().unwrap().to_string());
        done += 1;
    }
    Ok(format!("{done} edits equal to direct AST edits across {} widget kinds", widgets.len()))
}

// ---------------------------------------------------------------- sessions

pub fn load_fixtures(paths: &[std::path::PathBuf]) -> Vec<ReplayFixture> {
    paths.iter().map(|p| ReplayFixture::load(p).unwrap()).collect()
}

/// Five iterations over the saturn illustration: a new prompt, an extension,
/// a regeneration, a reprompt and another new prompt, then a code edit and a
/// favorite.
pub async fn five_iteration_session() -> Session {
    let provider = ReplayProvider::new(load_fixtures(&session_fixtures()));
    let mut s = create_session(&read("svg/saturn.svg")).unwrap();
    let first = s
        .run_iteration(&provider, IterationRequest::new("animate each sparkle to twinkle"))
        .await
        .unwrap();
    let base = first.designs[1].id;
    s.run_iteration(&provider, IterationRequest::new("make the planet spin").extending(base))
        .await
        .unwrap();
    s.regenerate(&provider, 1, None).await.unwrap();
    s.regenerate(&provider, 1, Some("make the planet spin faster")).await.unwrap();
    let last = s
        .run_iteration(&provider, IterationRequest::new("make the clouds drift"))
        .await
        .unwrap();
    let edited = last.designs[0].id;
    let css = last.designs[0].css_current.replace("6s", "9s");
    s.apply_code_edit(edited, &css).unwrap();
    s.toggle_favorite(base).unwrap();
    s
}

pub fn session_replay() -> Outcome {
    let mut s = runtime().block_on(five_iteration_session());
    let bytes = s.export_log();
    let imported = Session::import_log(&bytes).map_err(|e| e.to_string())?;
    if imported.to_document() != s.to_document() {
        return Err("import changed the session".into());
    }
    let report = runtime().block_on(replay_session(&imported)).map_err(|e| e.to_string())?;
    if !report.ok() {
        return Err(format!("replay problems: {:?}", report.problems));
    }
    let designs = imported.design_count();
    if report.designs.len() != designs || report.designs.iter().any(|d| !d.identical) {
        return Err(format!("{} of {designs} designs reproduced", report.designs.iter().filter(|d| d.identical).count()));
    }
    Ok(format!("{} iterations, {designs} designs byte-identical", report.iterations))
}

fn block(scope: u32, name: &str, error: bool) -> String {
    let prefix = if error { format!(".design-{scope} ") } else { String::new() };
    format!(
        "<style>\n.design-{scope} #sparkle-1 {{\n  animation-name: {name};\n  animation-duration: 2s;\n  animation-iteration-count: infinite;\n}}\n{prefix}@keyframes {name} {{\n  to {{ opacity: 0; }}\n}}\n</style>\n<explanation>Design {scope}.</explanation>\n-----\n"
    )
}

/// One step of a synthetic session.
pub enum Step {
    New(&'static str),
    Regenerate(usize),
    Reprompt(usize, &'static str),
}

/// Designs produced by a step; `true` marks one with a CSS error.
pub struct Planned {
    pub step: Step,
    pub designs: &'static [bool],
    pub elapsed: f64,
}

pub async fn synthetic_session(plan: Vec<Planned>, edits: &[usize]) -> Session {
    let mut s = create_session(&read("svg/saturn.svg")).unwrap();
    let mut scope = 0;
    for (i, p) in plan.iter().enumerate() {
        let text: String = p
            .designs
            .iter()
            .map(|&err| {
                let b = block(scope, &format!("a{scope}"), err);
                scope += 1;
                b
            })
            .collect();
        let mut fixture = ReplayFixture::from_chunks([text]);
        fixture.elapsed_seconds = Some(p.elapsed);
        let provider = ReplayProvider::new(vec![fixture]);
        let result = match p.step {
            Step::New(t) => s.run_iteration(&provider, IterationRequest::new(t)).await,
            Step::Regenerate(n) => s.regenerate(&provider, n, None).await,
            Step::Reprompt(n, t) => s.regenerate(&provider, n, Some(t)).await,
        };
        result.unwrap_or_else(|e| panic!("step {i}: {e}"));
    }
    let ids: Vec<_> = s.designs().map(|d| d.id).collect();
    for (k, &n) in edits.iter().enumerate() {
        let design = s.design(ids[n]).unwrap().clone();
        if k % 2 == 0 {
            s.apply_code_edit(design.id, &design.css_current.replace("2s", "3s")).unwrap();
        } else {
            let sheet = derive_sheet(&parse_css(&design.css_current).sheet, s.index());
            let entry = sheet.entries().find(|e| e.property == "animation-duration").unwrap().clone();
            s.apply_property_edit(design.id, &entry.source, &TypedValue::Time(4.0)).unwrap();
        }
    }
    s
}

/// The hand-counted corpus: 4, 5 and 3 unique prompts.
pub async fn stats_corpus() -> Vec<Session> {
    use Step::*;
    let p = |step, designs, elapsed| Planned { step, designs, elapsed };
    let a = synthetic_session(
        vec![
            p(New("animate each sparkle to twinkle"), &[false, false], 10.0),
            p(Regenerate(0), &[true, false], 12.0),
            p(Reprompt(0, "animate each sparkle to twinkle slowly"), &[false], 14.0),
            p(New("make the planet spin"), &[true], 16.0),
            p(New("remove exhaust"), &[false, false], 18.0),
        ],
        &[0, 4],
    );
    let b = synthetic_session(
        vec![
            p(New("Make the clouds drift to the right"), &[false], 20.0),
            p(New("Make the clouds   drift to the right"), &[true], 22.0),
            p(New("Make the rings glow"), &[false, false, false], 24.0),
            p(New("faster"), &[false], 26.0),
            p(Reprompt(3, "much faster please"), &[false], 28.0),
            p(New("Add a shooting star across the sky"), &[false, true], 30.0),
        ],
        &[2],
    );
    let c = synthetic_session(
        vec![
            p(New("sparkles pulse"), &[false], 32.0),
            p(Regenerate(0), &[false], 34.0),
            p(Reprompt(0, "sparkles pulse gently"), &[true, false], 36.0),
            p(New("Sparkles pulse"), &[false], 38.0),
        ],
        &[],
    );
    vec![a.await, b.await, c.await]
}

pub fn stats_oracle() -> Outcome {
    let sessions = runtime().block_on(stats_corpus());
    let stats = compute_stats(&sessions);
    let expect = |name: &str, got: f64, want: f64| {
        if got == want {
            Ok(())
        } else {
            Err(format!("{name}: got {got}, hand count {want}"))
        }
    };
    expect("unique prompts", stats.unique_prompt_count as f64, 12.0)?;
    expect("mean words", stats.mean_words_per_prompt, 46.0 / 12.0)?;
    expect("reprompt fraction", stats.reprompt_fraction, 3.0 / 12.0)?;
    expect("edit fraction", stats.fraction_code_instances_edited, 3.0 / 22.0)?;
    expect("css error rate", stats.css_error_rate, 5.0 / 22.0)?;
    expect("prompt error rate", stats.prompt_error_rate, 5.0 / 15.0)?;
    let two = runtime().block_on(synthetic_session(
        vec![Planned { step: Step::New("remove exhaust"), designs: &[false], elapsed: 1.0 }],
        &[],
    ));
    expect("\"remove exhaust\" words", compute_stats(&[two]).mean_words_per_prompt, 2.0)?;
    Ok("12 unique prompts, 46/12 words, 3/12 reprompts, 3/22 edited, 5/22 errors".into())
}

pub fn methodology() -> Outcome {
    let recorded: Vec<f64> = session_fixtures()
        .iter()
        .map(|p| {
            let v: Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
            v["elapsed_seconds"].as_f64().unwrap()
        })
        .collect();
    let fixture_mean = recorded.iter().sum::<f64>() / recorded.len() as f64;
    let session = runtime().block_on(five_iteration_session());
    let stats = compute_stats(&[session]);
    if stats.response_count != recorded.len() {
        return Err(format!("{} responses timed, {} recorded", stats.response_count, recorded.len()));
    }
    if (stats.mean_response_seconds - fixture_mean).abs() > 1e-9 {
        return Err(format!("mean {} vs fixture mean {fixture_mean}", stats.mean_response_seconds));
    }
    Ok(format!("mean_response_seconds {:.3} = fixture mean over {} responses", stats.mean_response_seconds, recorded.len()))
}
