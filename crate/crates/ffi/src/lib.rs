//! C interface to the keyframer pipeline.
//!
//! Structured results cross the boundary as UTF-8 JSON strings owned by the
//! caller and released with [`kf_string_free`]. Every fallible function
//! returns a [`KfStatus`]; on failure [`kf_last_error`] describes what went
//! wrong on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use keyframer::css::parse_css;
use keyframer::lint::lint;
use keyframer::prompting::{build_prompt, PromptSpec, ReplayFixture, ReplayProvider, TemplateVariant};
use keyframer::session::{compute_stats, create_session, IterationRequest, Session, SessionError};
use keyframer::stream_parse::{parse_response, ParserState};
use keyframer::svg::preprocess;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    NotFound = 4,
    InvalidArgument = 5,
    ProviderError = 6,
    SchemaError = 7,
    Panic = 8,
}

/// A design session. Not thread-safe; use one handle per thread or lock externally.
pub struct KfSession {
    inner: Session,
}

/// Incremental parser for a streamed model response.
pub struct KfStreamParser {
    inner: ParserState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(KfStatus, String);

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            KfStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            KfStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(KfStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(KfStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn optional_text<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, name).map(Some)
    }
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(KfStatus::NullArgument, "output pointer is null".into()));
    }
    let c = CString::new(s).map_err(|_| Failure(KfStatus::InvalidArgument, "result contains a nul byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn put_json(out: *mut *mut c_char, v: &impl serde::Serialize) -> Result<(), Failure> {
    put_string(out, serde_json::to_string(v).expect("serializable"))
}

unsafe fn session<'a>(s: *mut KfSession) -> Result<&'a mut Session, Failure> {
    s.as_mut()
        .map(|h| &mut h.inner)
        .ok_or_else(|| Failure(KfStatus::NullArgument, "session is null".into()))
}

fn session_failure(e: SessionError) -> Failure {
    let status = match &e {
        SessionError::Svg(_) => KfStatus::ParseError,
        SessionError::UnknownDesign(_) | SessionError::UnknownIteration(_) => KfStatus::NotFound,
        SessionError::Prompt(_) | SessionError::Edit(_) => KfStatus::InvalidArgument,
        SessionError::Schema(_) => KfStatus::SchemaError,
        SessionError::Provider { .. } | SessionError::NoCandidates { .. } => KfStatus::ProviderError,
    };
    Failure(status, e.to_string())
}

fn design_id(s: &str) -> Result<uuid::Uuid, Failure> {
    uuid::Uuid::parse_str(s).map_err(|_| Failure(KfStatus::InvalidArgument, format!("{s:?} is not a design id")))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn kf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static version string.
#[no_mangle]
pub extern "C" fn kf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Preprocesses an SVG; writes `{svg, index, stats, warnings}` as JSON.
///
/// # Safety
/// `svg` must be a NUL-terminated string; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kf_preprocess(svg: *const c_char, out_json: *mut *mut c_char) -> KfStatus {
    guard(|| {
        let result = preprocess(text(svg, "svg")?).map_err(|e| Failure(KfStatus::ParseError, e.to_string()))?;
        put_json(out_json, &result)
    })
}

/// Lints CSS against an SVG for the given design index; writes the report as JSON.
///
/// # Safety
/// `css` and `svg` must be NUL-terminated strings; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kf_lint(
    css: *const c_char,
    svg: *const c_char,
    scope: u32,
    out_json: *mut *mut c_char,
) -> KfStatus {
    guard(|| {
        let index = preprocess(text(svg, "svg")?)
            .map_err(|e| Failure(KfStatus::ParseError, e.to_string()))?
            .index;
        let report = lint(&parse_css(text(css, "css")?).sheet, &index, scope);
        put_json(out_json, &report)
    })
}

/// Assembles a prompt. `extension_css` may be NULL for an initial prompt.
///
/// # Safety
/// String arguments must be NUL-terminated; `out_prompt` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kf_build_prompt(
    user_text: *const c_char,
    svg_text: *const c_char,
    existing_design_count: u32,
    extension_css: *const c_char,
    corrected_template: bool,
    out_prompt: *mut *mut c_char,
) -> KfStatus {
    guard(|| {
        let spec = PromptSpec {
            user_text: text(user_text, "user_text")?.to_string(),
            svg_text: text(svg_text, "svg_text")?.to_string(),
            existing_design_count,
            extension_css: optional_text(extension_css, "extension_css")?.map(str::to_string),
        };
        let variant = if corrected_template {
            TemplateVariant::Corrected
        } else {
            TemplateVariant::Verbatim
        };
        let prompt = build_prompt(&spec, variant).map_err(|e| Failure(KfStatus::InvalidArgument, e.to_string()))?;
        put_string(out_prompt, prompt)
    })
}

/// Splits a complete response into design candidates; writes a JSON array.
///
/// # Safety
/// `response` must be NUL-terminated; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kf_parse_response(response: *const c_char, out_json: *mut *mut c_char) -> KfStatus {
    guard(|| {
        let (_, candidates) = parse_response(text(response, "response")?);
        put_json(out_json, &candidates)
    })
}

#[no_mangle]
pub extern "C" fn kf_stream_parser_new() -> *mut KfStreamParser {
    Box::into_raw(Box::new(KfStreamParser { inner: ParserState::new() }))
}

/// Feeds a chunk; writes the events it completed as a JSON array.
///
/// # Safety
/// `parser` must come from [`kf_stream_parser_new`]; `chunk` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn kf_stream_parser_feed(
    parser: *mut KfStreamParser,
    chunk: *const c_char,
    out_events_json: *mut *mut c_char,
) -> KfStatus {
    guard(|| {
        let p = parser
            .as_mut()
            .ok_or_else(|| Failure(KfStatus::NullArgument, "parser is null".into()))?;
        let events = p.inner.feed(text(chunk, "chunk")?);
        put_json(out_events_json, &events)
    })
}

/// Ends the stream; writes the final events.
///
/// # Safety
/// `parser` must come from [`kf_stream_parser_new`].
#[no_mangle]
pub unsafe extern "C" fn kf_stream_parser_finish(
    parser: *mut KfStreamParser,
    out_events_json: *mut *mut c_char,
) -> KfStatus {
    guard(|| {
        let p = parser
            .as_mut()
            .ok_or_else(|| Failure(KfStatus::NullArgument, "parser is null".into()))?;
        let events = p.inner.finish();
        put_json(out_events_json, &events)
    })
}

/// # Safety
/// `parser` must come from [`kf_stream_parser_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kf_stream_parser_free(parser: *mut KfStreamParser) {
    if !parser.is_null() {
        drop(Box::from_raw(parser));
    }
}

/// Opens a session on an SVG.
///
/// # Safety
/// `svg` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kf_session_new(svg: *const c_char, out: *mut *mut KfSession) -> KfStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(KfStatus::NullArgument, "output pointer is null".into()));
        }
        let inner = create_session(text(svg, "svg")?).map_err(session_failure)?;
        *out = Box::into_raw(Box::new(KfSession { inner }));
        Ok(())
    })
}

/// Restores a session from an exported log.
///
/// # Safety
/// `log_json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kf_session_import(log_json: *const c_char, out: *mut *mut KfSession) -> KfStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(KfStatus::NullArgument, "output pointer is null".into()));
        }
        let inner = Session::import_log(text(log_json, "log_json")?.as_bytes()).map_err(session_failure)?;
        *out = Box::into_raw(Box::new(KfSession { inner }));
        Ok(())
    })
}

/// # Safety
/// `session` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kf_session_free(session: *mut KfSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Logs an export and writes the session log document.
///
/// # Safety
/// `session` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kf_session_export(session: *mut KfSession, out_json: *mut *mut c_char) -> KfStatus {
    guard(|| {
        let s = self::session(session)?;
        let bytes = s.export_log();
        put_string(out_json, String::from_utf8(bytes).expect("json is utf-8"))
    })
}

/// Writes the current session state as JSON without logging anything.
///
/// # Safety
/// `session` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kf_session_snapshot(session: *mut KfSession, out_json: *mut *mut c_char) -> KfStatus {
    guard(|| {
        let s = self::session(session)?;
        put_json(out_json, s)
    })
}

/// Runs one iteration whose model response is supplied by the caller, for
/// hosts that talk to the model themselves. `base_design_id` may be NULL.
/// Writes the committed iteration as JSON.
///
/// # Safety
/// String arguments must be NUL-terminated; `session` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kf_session_run_with_response(
    session: *mut KfSession,
    prompt_text: *const c_char,
    base_design_id: *const c_char,
    response_text: *const c_char,
    elapsed_seconds: f64,
    out_json: *mut *mut c_char,
) -> KfStatus {
    guard(|| {
        let s = self::session(session)?;
        let mut request = IterationRequest::new(text(prompt_text, "prompt_text")?);
        if let Some(id) = optional_text(base_design_id, "base_design_id")? {
            request = request.extending(design_id(id)?);
        }
        let mut fixture = ReplayFixture::from_chunks([text(response_text, "response_text")?]);
        fixture.elapsed_seconds = Some(elapsed_seconds.max(0.0));
        let provider = ReplayProvider::new(vec![fixture]).with_model("external");
        let rt = tokio::runtime::Builder::new_current_thread()
            .enable_time()
            .build()
            .map_err(|e| Failure(KfStatus::Panic, e.to_string()))?;
        let iteration = rt.block_on(s.run_iteration(&provider, request)).map_err(session_failure)?;
        put_json(out_json, &iteration)
    })
}

/// Replaces a design's CSS; writes the updated design as JSON.
///
/// # Safety
/// String arguments must be NUL-terminated; `session` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kf_session_code_edit(
    session: *mut KfSession,
    design: *const c_char,
    css: *const c_char,
    out_json: *mut *mut c_char,
) -> KfStatus {
    guard(|| {
        let s = self::session(session)?;
        let id = design_id(text(design, "design")?)?;
        let d = s.apply_code_edit(id, text(css, "css")?).map_err(session_failure)?;
        put_json(out_json, &d)
    })
}

/// Stars or unstars a design; `out_favorite` receives the new state.
///
/// # Safety
/// `design` must be NUL-terminated; `session` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kf_session_toggle_favorite(
    session: *mut KfSession,
    design: *const c_char,
    out_favorite: *mut bool,
) -> KfStatus {
    guard(|| {
        let s = self::session(session)?;
        if out_favorite.is_null() {
            return Err(Failure(KfStatus::NullArgument, "output pointer is null".into()));
        }
        let id = design_id(text(design, "design")?)?;
        *out_favorite = s.toggle_favorite(id).map_err(session_failure)?;
        Ok(())
    })
}

/// Writes statistics for this one session as JSON.
///
/// # Safety
/// `session` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kf_session_stats(session: *mut KfSession, out_json: *mut *mut c_char) -> KfStatus {
    guard(|| {
        let s = self::session(session)?;
        put_json(out_json, &compute_stats(std::slice::from_ref(s)))
    })
}
