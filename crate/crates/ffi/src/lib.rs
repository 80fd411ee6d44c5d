//! C ABI over the `eden` library.
//!
//! Every fallible call returns an [`EdenStatus`]. On failure a message is
//! available from [`eden_last_error_message`] on the same thread. Strings
//! handed out by this library must be released with [`eden_string_free`];
//! engines with [`eden_engine_free`]. Structured requests and replies are
//! JSON strings.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use eden::llm::{MockProvider, MockScript};
use eden::metrics::{self, L2Row, PasRow, L2_ITEMS};
use eden::service::{CreateSession, Engine, EngineError, EngineOptions, MemoryStore, TurnRequest};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdenStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    NotFound = 4,
    Conflict = 5,
    Busy = 6,
    Upstream = 7,
    Internal = 8,
}

/// Opaque engine handle backed by an in-memory event store.
pub struct EdenEngine {
    engine: Engine,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(EdenStatus, String);

impl Failure {
    fn arg(msg: impl Into<String>) -> Self {
        Failure(EdenStatus::InvalidArgument, msg.into())
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let status = match &e {
            EngineError::BadRequest(_) => EdenStatus::InvalidArgument,
            EngineError::NotFound(_) => EdenStatus::NotFound,
            EngineError::Conflict(_) => EdenStatus::Conflict,
            EngineError::Busy(_) => EdenStatus::Busy,
            EngineError::Upstream(_) => EdenStatus::Upstream,
            EngineError::Store(_) | EngineError::ReplayDiverged { .. } => EdenStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `f`, records its error and turns panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EdenStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            EdenStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            EdenStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(EdenStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(EdenStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(EdenStatus::NullPointer, format!("{what} is null")))
}

fn to_c(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(EdenStatus::Internal, "string contains a NUL byte".into()))
}

fn json_out(text: serde_json::Result<String>, out: &mut *mut c_char) -> Result<(), Failure> {
    let text = text.map_err(|e| Failure(EdenStatus::Internal, e.to_string()))?;
    *out = to_c(text)?;
    Ok(())
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure(EdenStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Last error message for this thread, or null. Owned by the library and
/// valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn eden_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn eden_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Engine answering every provider call from a JSON mock script.
///
/// # Safety
/// `mock_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eden_engine_new_mock(mock_json: *const c_char, out: *mut *mut EdenEngine) -> EdenStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let script = MockScript::from_json(str_arg(mock_json, "mock_json")?).map_err(Failure::arg)?;
        let engine = Engine::new(
            Arc::new(MockProvider::new(script)),
            Box::new(MemoryStore::default()),
            EngineOptions::default(),
        )?;
        *out = Box::into_raw(Box::new(EdenEngine { engine }));
        Ok(())
    })
}

/// # Safety
/// `engine` must be null or a handle from [`eden_engine_new_mock`], freed once.
#[no_mangle]
pub unsafe extern "C" fn eden_engine_free(engine: *mut EdenEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

unsafe fn engine_ref<'a>(engine: *const EdenEngine) -> Result<&'a Engine, Failure> {
    engine
        .as_ref()
        .map(|e| &e.engine)
        .ok_or_else(|| Failure(EdenStatus::NullPointer, "engine is null".into()))
}

/// Creates a session from `{"participant_id": ..., "topic_area": ..., "prefs": {...}}`.
/// Writes `{"session_id": ..., "condition": ...}` to `out_json`.
///
/// # Safety
/// Pointers must be valid; `out_json` receives a string for [`eden_string_free`].
#[no_mangle]
pub unsafe extern "C" fn eden_session_start(
    engine: *const EdenEngine,
    request_json: *const c_char,
    out_json: *mut *mut c_char,
) -> EdenStatus {
    guard(|| {
        let engine = engine_ref(engine)?;
        let out = out_ptr(out_json, "out_json")?;
        let req: CreateSession =
            serde_json::from_str(str_arg(request_json, "request_json")?).map_err(|e| Failure::arg(e.to_string()))?;
        json_out(serde_json::to_string(&engine.create_session(req)?), out)
    })
}

/// Processes one user turn (`{"text": ..., "negative_affect": ..., "pause_durations": [...]}`)
/// and writes the outcome JSON.
///
/// # Safety
/// Pointers must be valid; `out_json` receives a string for [`eden_string_free`].
#[no_mangle]
pub unsafe extern "C" fn eden_session_turn(
    engine: *const EdenEngine,
    session_id: *const c_char,
    request_json: *const c_char,
    out_json: *mut *mut c_char,
) -> EdenStatus {
    guard(|| {
        let engine = engine_ref(engine)?;
        let id = str_arg(session_id, "session_id")?;
        let out = out_ptr(out_json, "out_json")?;
        let req: TurnRequest =
            serde_json::from_str(str_arg(request_json, "request_json")?).map_err(|e| Failure::arg(e.to_string()))?;
        json_out(serde_json::to_string(&engine.post_turn(id, &req)?), out)
    })
}

/// # Safety
/// Pointers must be valid; `out_json` receives a string for [`eden_string_free`].
#[no_mangle]
pub unsafe extern "C" fn eden_session_end_conversation(
    engine: *const EdenEngine,
    session_id: *const c_char,
    out_json: *mut *mut c_char,
) -> EdenStatus {
    guard(|| {
        let engine = engine_ref(engine)?;
        let id = str_arg(session_id, "session_id")?;
        let out = out_ptr(out_json, "out_json")?;
        json_out(serde_json::to_string(&engine.end_conversation(id)?), out)
    })
}

/// Renders a built-in prompt template with a JSON object of string bindings.
///
/// # Safety
/// Pointers must be valid; `out` receives a string for [`eden_string_free`].
#[no_mangle]
pub unsafe extern "C" fn eden_render_prompt(
    name: *const c_char,
    bindings_json: *const c_char,
    out: *mut *mut c_char,
) -> EdenStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let out = out_ptr(out, "out")?;
        let bindings: BTreeMap<String, String> = if bindings_json.is_null() {
            BTreeMap::new()
        } else {
            serde_json::from_str(str_arg(bindings_json, "bindings_json")?).map_err(|e| Failure::arg(e.to_string()))?
        };
        let text = eden::prompts::render_prompt(name, &bindings).map_err(|e| match e {
            eden::prompts::PromptError::UnknownTemplate(_) => Failure(EdenStatus::NotFound, e.to_string()),
            other => Failure::arg(other.to_string()),
        })?;
        *out = to_c(text)?;
        Ok(())
    })
}

/// Drops every sentence that ends in a question mark.
///
/// # Safety
/// Pointers must be valid; `out` receives a string for [`eden_string_free`].
#[no_mangle]
pub unsafe extern "C" fn eden_strip_questions(text: *const c_char, out: *mut *mut c_char) -> EdenStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let out = out_ptr(out, "out")?;
        *out = to_c(eden::transition::strip_questions(text))?;
        Ok(())
    })
}

/// Mean of the four attitude items, each on the 1 to 5 scale.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eden_metrics_pas(enc: f64, list: f64, care: f64, app: f64, out: *mut f64) -> EdenStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let row = PasRow { enc, list, care, app };
        row.validate().map_err(|e| Failure::arg(e.to_string()))?;
        *out = metrics::pas(&row);
        Ok(())
    })
}

/// Grit change from nine pre and nine post answers. `out_per_item` may be
/// null; otherwise it must hold nine values.
///
/// # Safety
/// `pre` and `post` must point to nine values each; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn eden_metrics_delta_l2(
    pre: *const f64,
    post: *const f64,
    out_total: *mut f64,
    out_per_item: *mut f64,
) -> EdenStatus {
    guard(|| {
        let row = |p: *const f64, what: &str| -> Result<L2Row, Failure> {
            let items: [f64; L2_ITEMS] = slice_arg(p, L2_ITEMS, what)?.try_into().expect("length checked");
            let row = L2Row { items };
            row.validate().map_err(|e| Failure::arg(e.to_string()))?;
            Ok(row)
        };
        let (pre, post) = (row(pre, "pre")?, row(post, "post")?);
        let total = out_ptr(out_total, "out_total")?;
        let d = metrics::delta_l2(&pre, &post);
        *total = d.total;
        if !out_per_item.is_null() {
            std::slice::from_raw_parts_mut(out_per_item, L2_ITEMS).copy_from_slice(&d.per_item);
        }
        Ok(())
    })
}

/// Pearson r with a two-sided t-distribution p-value.
///
/// # Safety
/// `xs` and `ys` must point to `n` values; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn eden_metrics_pearson(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    out_r: *mut f64,
    out_p: *mut f64,
) -> EdenStatus {
    guard(|| {
        let (xs, ys) = (slice_arg(xs, n, "xs")?, slice_arg(ys, n, "ys")?);
        let (r, p) = (out_ptr(out_r, "out_r")?, out_ptr(out_p, "out_p")?);
        let c = metrics::pearson(xs, ys).map_err(|e| Failure::arg(e.to_string()))?;
        *r = c.r;
        *p = c.p;
        Ok(())
    })
}

/// Fleiss' kappa over a row-major `items x categories` count matrix.
///
/// # Safety
/// `counts` must point to `items * categories` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eden_metrics_fleiss_kappa(
    counts: *const u32,
    items: usize,
    categories: usize,
    out: *mut f64,
) -> EdenStatus {
    guard(|| {
        let len = items
            .checked_mul(categories)
            .ok_or_else(|| Failure::arg("matrix size overflows"))?;
        let flat = slice_arg(counts, len, "counts")?;
        let out = out_ptr(out, "out")?;
        if categories == 0 {
            return Err(Failure::arg("no categories"));
        }
        let rows: Vec<Vec<u32>> = flat.chunks(categories).map(<[u32]>::to_vec).collect();
        *out = metrics::fleiss_kappa(&rows).map_err(|e| Failure::arg(e.to_string()))?;
        Ok(())
    })
}
