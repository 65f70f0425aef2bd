//! C ABI over the `intermo` crate.
//!
//! Every fallible function returns an [`IntermoStatus`]; on failure the message is
//! available from [`intermo_last_error`] on the same thread. Objects come back as
//! opaque handles or heap strings that the caller releases with the matching
//! `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use intermo::dialect::project;
use intermo::midi::{extend_pedoff, midi_to_amt, read_smf};
use intermo::text::{parse, render, validate};
use intermo::tokenizer::UnigramModel;
use intermo::train_utils::{smoothing_distribution, SmoothingSpec};
use intermo::{Dialect, ScoreDoc};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntermoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    Dialect = 5,
    Midi = 6,
    Tokenizer = 7,
    Panic = 8,
}

/// A parsed InterMo document.
pub struct IntermoDoc(ScoreDoc);

/// A loaded piece model.
pub struct IntermoTokenizer(UnigramModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

struct Failure(IntermoStatus, String);

type FfiResult = Result<(), Failure>;

fn fail(status: IntermoStatus, e: impl std::fmt::Display) -> Failure {
    Failure(status, e.to_string())
}

fn guard(f: impl FnOnce() -> FfiResult) -> IntermoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IntermoStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            IntermoStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(IntermoStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| fail(IntermoStatus::InvalidUtf8, e))
}

unsafe fn read_dialect(p: *const c_char) -> Result<Dialect, Failure> {
    read_str(p)?
        .parse()
        .map_err(|e| fail(IntermoStatus::InvalidArgument, e))
}

unsafe fn put<T>(out: *mut T, value: T) -> FfiResult {
    if out.is_null() {
        return Err(fail(IntermoStatus::NullPointer, "null output pointer"));
    }
    out.write(value);
    Ok(())
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

unsafe fn doc_ref<'a>(doc: *const IntermoDoc) -> Result<&'a ScoreDoc, Failure> {
    doc.as_ref()
        .map(|d| &d.0)
        .ok_or_else(|| fail(IntermoStatus::NullPointer, "null document handle"))
}

/// Message of the last failure on this thread, or NULL. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn intermo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn intermo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates `text` in `dialect` (e.g. "TAST", "a2s_lite").
///
/// # Safety
/// `text` and `dialect` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn intermo_doc_parse(
    text: *const c_char,
    dialect: *const c_char,
    out: *mut *mut IntermoDoc,
) -> IntermoStatus {
    guard(|| {
        let d = read_dialect(dialect)?;
        let doc = parse(read_str(text)?, d).map_err(|e| fail(IntermoStatus::Parse, e))?;
        put(out, Box::into_raw(Box::new(IntermoDoc(doc))))
    })
}

/// Reads a document from its JSON interchange form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn intermo_doc_from_json(json: *const c_char, out: *mut *mut IntermoDoc) -> IntermoStatus {
    guard(|| {
        let doc: ScoreDoc = serde_json::from_str(read_str(json)?).map_err(|e| fail(IntermoStatus::Parse, e))?;
        put(out, Box::into_raw(Box::new(IntermoDoc(doc))))
    })
}

/// # Safety
/// `doc` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn intermo_doc_free(doc: *mut IntermoDoc) {
    if !doc.is_null() {
        drop(Box::from_raw(doc));
    }
}

/// Renders the document as InterMo text.
///
/// # Safety
/// `doc` must be a live handle; `out` must be writable. Free the result with
/// `intermo_string_free`.
#[no_mangle]
pub unsafe extern "C" fn intermo_doc_render(doc: *const IntermoDoc, out: *mut *mut c_char) -> IntermoStatus {
    guard(|| put(out, to_c_string(render(doc_ref(doc)?))))
}

/// Document as JSON.
///
/// # Safety
/// As for `intermo_doc_render`.
#[no_mangle]
pub unsafe extern "C" fn intermo_doc_to_json(doc: *const IntermoDoc, out: *mut *mut c_char) -> IntermoStatus {
    guard(|| {
        let s = serde_json::to_string(doc_ref(doc)?).map_err(|e| fail(IntermoStatus::Parse, e))?;
        put(out, to_c_string(s))
    })
}

/// Validation report as JSON `{"errors": [...], "warnings": [...]}`.
///
/// # Safety
/// As for `intermo_doc_render`.
#[no_mangle]
pub unsafe extern "C" fn intermo_doc_validate_json(doc: *const IntermoDoc, out: *mut *mut c_char) -> IntermoStatus {
    guard(|| {
        let report = validate(doc_ref(doc)?);
        put(out, to_c_string(serde_json::to_string(&report).expect("report serializes")))
    })
}

/// Projects a document into `target`.
///
/// # Safety
/// `doc` must be a live handle, `target` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn intermo_doc_project(
    doc: *const IntermoDoc,
    target: *const c_char,
    out: *mut *mut IntermoDoc,
) -> IntermoStatus {
    guard(|| {
        let d = read_dialect(target)?;
        let p = project(doc_ref(doc)?, d).map_err(|e| fail(IntermoStatus::Dialect, e))?;
        put(out, Box::into_raw(Box::new(IntermoDoc(p))))
    })
}

/// Converts a Standard MIDI file image to AMT (or AMT_lite when `lite`), optionally
/// extending key releases to the pedal release first.
///
/// # Safety
/// `bytes` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn intermo_midi_to_amt(
    bytes: *const u8,
    len: usize,
    pedoff: bool,
    lite: bool,
    out: *mut *mut IntermoDoc,
) -> IntermoStatus {
    guard(|| {
        if bytes.is_null() {
            return Err(fail(IntermoStatus::NullPointer, "null byte buffer"));
        }
        let data = std::slice::from_raw_parts(bytes, len);
        let imp = read_smf(data).map_err(|e| fail(IntermoStatus::Midi, e))?;
        let perf = if pedoff {
            extend_pedoff(&imp.performance)
        } else {
            imp.performance
        };
        let doc = midi_to_amt(&perf, !lite).map_err(|e| fail(IntermoStatus::Midi, e))?;
        put(out, Box::into_raw(Box::new(IntermoDoc(doc))))
    })
}

/// Loads a tokenizer from the JSON model file contents.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn intermo_tokenizer_from_json(
    json: *const c_char,
    out: *mut *mut IntermoTokenizer,
) -> IntermoStatus {
    guard(|| {
        let m = UnigramModel::from_json(read_str(json)?).map_err(|e| fail(IntermoStatus::Tokenizer, e))?;
        put(out, Box::into_raw(Box::new(IntermoTokenizer(m))))
    })
}

/// # Safety
/// `tok` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn intermo_tokenizer_free(tok: *mut IntermoTokenizer) {
    if !tok.is_null() {
        drop(Box::from_raw(tok));
    }
}

/// Most likely segmentation of `text`. Release the ids with `intermo_ids_free`.
///
/// # Safety
/// `tok` must be a live handle, `text` a NUL-terminated string, the outputs writable.
#[no_mangle]
pub unsafe extern "C" fn intermo_tokenizer_encode(
    tok: *const IntermoTokenizer,
    text: *const c_char,
    out_ids: *mut *mut u32,
    out_len: *mut usize,
) -> IntermoStatus {
    guard(|| {
        let m = tok
            .as_ref()
            .ok_or_else(|| fail(IntermoStatus::NullPointer, "null tokenizer handle"))?;
        if out_len.is_null() {
            return Err(fail(IntermoStatus::NullPointer, "null length pointer"));
        }
        let ids = m.0.encode(read_str(text)?).into_boxed_slice();
        let n = ids.len();
        put(out_ids, Box::into_raw(ids).cast::<u32>())?;
        put(out_len, n)
    })
}

/// # Safety
/// `ids` and `len` must come from one `intermo_tokenizer_encode` call.
#[no_mangle]
pub unsafe extern "C" fn intermo_ids_free(ids: *mut u32, len: usize) {
    if !ids.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(ids, len)));
    }
}

/// Text of a token id sequence.
///
/// # Safety
/// `ids` must point to `len` readable ids; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn intermo_tokenizer_decode(
    tok: *const IntermoTokenizer,
    ids: *const u32,
    len: usize,
    out: *mut *mut c_char,
) -> IntermoStatus {
    guard(|| {
        let m = tok
            .as_ref()
            .ok_or_else(|| fail(IntermoStatus::NullPointer, "null tokenizer handle"))?;
        let slice = if len == 0 {
            &[][..]
        } else if ids.is_null() {
            return Err(fail(IntermoStatus::NullPointer, "null id buffer"));
        } else {
            std::slice::from_raw_parts(ids, len)
        };
        let text = m.0.decode(slice).map_err(|e| fail(IntermoStatus::Tokenizer, e))?;
        put(out, to_c_string(text))
    })
}

/// Fills `out[0..num_bins]` with the smoothed target distribution for bin `y`.
///
/// # Safety
/// `out` must point to `out_len` writable doubles, `out_len >= num_bins`.
#[no_mangle]
pub unsafe extern "C" fn intermo_smoothing_distribution(
    y: usize,
    p_center: f64,
    w: usize,
    num_bins: usize,
    out: *mut f64,
    out_len: usize,
) -> IntermoStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(IntermoStatus::NullPointer, "null output buffer"));
        }
        if out_len < num_bins {
            return Err(fail(IntermoStatus::InvalidArgument, "output buffer too short"));
        }
        let spec = SmoothingSpec { p_center, w, num_bins };
        let q = smoothing_distribution(y, &spec).map_err(|e| fail(IntermoStatus::InvalidArgument, e))?;
        std::slice::from_raw_parts_mut(out, num_bins).copy_from_slice(&q);
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn intermo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
