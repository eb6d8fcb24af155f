//! C ABI over the `ecie` library.
//!
//! Every fallible function returns an [`EcieStatus`]; on failure the message
//! is kept per thread and can be read with [`ecie_last_error_message`].
//! Strings handed out by the library must be released with
//! [`ecie_string_free`], corpora with [`ecie_corpus_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ecie::agreement::{cohen_kappa, AnnotationPair};
use ecie::corpus::{self, CorpusFormat, Document, Vocabulary};
use ecie::decoder::{decode_entity_centric, DecodeInput};
use ecie::metrics::coref::score_coref_corpus;
use ecie::metrics::ie::score_corpus;
use ecie::metrics::{Level, Prf, Task};
use ecie::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcieStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    InvalidArgument = 6,
    Undefined = 7,
    Rules = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcieTask {
    Ner = 0,
    Re = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcieLevel {
    Mention = 0,
    Hard = 1,
    Soft = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EciePrf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EcieCorefScores {
    pub muc: EciePrf,
    pub b3: EciePrf,
    pub ceafe: EciePrf,
    pub avg_f1: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EcieRuleReport {
    pub groundings: usize,
    pub violations: usize,
}

/// Opaque handle to a loaded, validated corpus.
pub struct EcieCorpus {
    docs: Vec<Document>,
}

impl From<Prf> for EciePrf {
    fn from(p: Prf) -> Self {
        EciePrf {
            precision: p.precision,
            recall: p.recall,
            f1: p.f1,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> EcieStatus {
    match err.kind() {
        "io" => EcieStatus::Io,
        "parse" => EcieStatus::Parse,
        "validation" | "mention_multi_cluster" => EcieStatus::Validation,
        "undefined" => EcieStatus::Undefined,
        "rule_syntax" | "fixpoint_cap" => EcieStatus::Rules,
        _ => EcieStatus::InvalidArgument,
    }
}

struct Fail(EcieStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EcieStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            EcieStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EcieStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(EcieStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(EcieStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(EcieStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| Fail(EcieStatus::NullPointer, format!("{name} is null")))
}

fn to_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(EcieStatus::Internal, "output contains a NUL byte".into()))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn ecie_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ecie_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads and validates a corpus file (`.jsonl` or a JSON array).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ecie_corpus_load(path: *const c_char, out: *mut *mut EcieCorpus) -> EcieStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = Path::new(str_arg(path, "path")?);
        let docs = corpus::parse_corpus(path, CorpusFormat::detect(path), &Vocabulary::builtin())?;
        *out = Box::into_raw(Box::new(EcieCorpus { docs }));
        Ok(())
    })
}

/// Parses and validates JSON Lines text held in memory.
///
/// # Safety
/// `jsonl` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ecie_corpus_from_jsonl(jsonl: *const c_char, out: *mut *mut EcieCorpus) -> EcieStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let docs = corpus::parse_jsonl(str_arg(jsonl, "jsonl")?)?;
        corpus::check_all(&docs, &Vocabulary::builtin()).into_result()?;
        *out = Box::into_raw(Box::new(EcieCorpus { docs }));
        Ok(())
    })
}

/// # Safety
/// `corpus` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ecie_corpus_free(corpus: *mut EcieCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Number of documents, 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ecie_corpus_len(corpus: *const EcieCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.docs.len())
}

/// Validates JSON Lines text and writes a JSON report with `errors` and
/// `warnings` arrays to `*out_json`. Findings are not failures; only
/// unreadable input is.
///
/// # Safety
/// `jsonl` must be a NUL-terminated string and `out_json` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ecie_validate_json(jsonl: *const c_char, out_json: *mut *mut c_char) -> EcieStatus {
    guard(|| {
        let out = out_arg(out_json, "out_json")?;
        *out = ptr::null_mut();
        let docs = corpus::parse_jsonl(str_arg(jsonl, "jsonl")?)?;
        let report = corpus::check_all(&docs, &Vocabulary::builtin());
        let json = serde_json::json!({
            "schema_version": ecie::SCHEMA_VERSION,
            "documents": docs.len(),
            "errors": report.errors,
            "warnings": report.warnings,
        });
        *out = to_c_string(json.to_string())?;
        Ok(())
    })
}

/// Micro-averaged NER or RE scores at one level. `task` takes an
/// `EcieTask` value and `level` an `EcieLevel` value.
///
/// # Safety
/// `gold` and `pred` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ecie_score(
    gold: *const EcieCorpus,
    pred: *const EcieCorpus,
    task: u32,
    level: u32,
    out: *mut EciePrf,
) -> EcieStatus {
    guard(|| {
        let gold = ref_arg(gold, "gold")?;
        let pred = ref_arg(pred, "pred")?;
        let out = out_arg(out, "out")?;
        let task = match task {
            t if t == EcieTask::Ner as u32 => Task::Ner,
            t if t == EcieTask::Re as u32 => Task::Re,
            t => return Err(Fail(EcieStatus::InvalidArgument, format!("unknown task {t}"))),
        };
        let level = match level {
            l if l == EcieLevel::Mention as u32 => Level::Mention,
            l if l == EcieLevel::Hard as u32 => Level::Hard,
            l if l == EcieLevel::Soft as u32 => Level::Soft,
            l => return Err(Fail(EcieStatus::InvalidArgument, format!("unknown level {l}"))),
        };
        *out = score_corpus(&gold.docs, &pred.docs, task)?.report(level).scores.into();
        Ok(())
    })
}

/// MUC, B-cubed, CEAF-e and their average F1.
///
/// # Safety
/// `gold` and `pred` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ecie_coref_score(
    gold: *const EcieCorpus,
    pred: *const EcieCorpus,
    out: *mut EcieCorefScores,
) -> EcieStatus {
    guard(|| {
        let gold = ref_arg(gold, "gold")?;
        let pred = ref_arg(pred, "pred")?;
        let out = out_arg(out, "out")?;
        let s = score_coref_corpus(&gold.docs, &pred.docs)?;
        *out = EcieCorefScores {
            muc: s.muc.into(),
            b3: s.b3.into(),
            ceafe: s.ceafe.into(),
            avg_f1: s.avg_f1,
        };
        Ok(())
    })
}

/// Checks the built-in consistency rules over a corpus.
///
/// # Safety
/// `corpus` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ecie_rules_check(corpus: *const EcieCorpus, out: *mut EcieRuleReport) -> EcieStatus {
    guard(|| {
        let corpus = ref_arg(corpus, "corpus")?;
        let out = out_arg(out, "out")?;
        let rules = ecie::rules::builtin_ruleset();
        let mut tally = std::collections::BTreeMap::new();
        let mut violations = 0;
        for d in &corpus.docs {
            violations += ecie::rules::check_with_tally(d, &rules, &mut tally).len();
        }
        *out = EcieRuleReport {
            groundings: tally.values().map(|t| t.groundings).sum(),
            violations,
        };
        Ok(())
    })
}

/// Cohen's kappa of two parallel label arrays of length `n`.
///
/// # Safety
/// `a` and `b` must point to `n` NUL-terminated strings each; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ecie_kappa(
    a: *const *const c_char,
    b: *const *const c_char,
    n: usize,
    out: *mut f64,
) -> EcieStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if n > 0 && (a.is_null() || b.is_null()) {
            return Err(Fail(EcieStatus::NullPointer, "label array is null".into()));
        }
        let mut items = Vec::with_capacity(n);
        for i in 0..n {
            let x = str_arg(*a.add(i), "label")?;
            let y = str_arg(*b.add(i), "label")?;
            items.push((x, y));
        }
        *out = cohen_kappa(&AnnotationPair::new(items)?)?.kappa;
        Ok(())
    })
}

/// Number of candidate spans of width at most `w_max` over `num_tokens`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecie_span_count(num_tokens: usize, w_max: usize, out: *mut u64) -> EcieStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ecie::kernels::span_count(num_tokens, w_max)?;
        Ok(())
    })
}

/// Decodes one JSON object of mention-level predictions (`p_cl`, `p_men`,
/// `p_rel`) into entity-level JSON.
///
/// # Safety
/// `input_json` must be a NUL-terminated string and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn ecie_decode_json(input_json: *const c_char, out_json: *mut *mut c_char) -> EcieStatus {
    guard(|| {
        let out = out_arg(out_json, "out_json")?;
        *out = ptr::null_mut();
        let text = str_arg(input_json, "input_json")?;
        let input: DecodeInput = serde_json::from_str(text).map_err(|e| {
            Fail(
                EcieStatus::Parse,
                format!("line {} column {}: {e}", e.line(), e.column()),
            )
        })?;
        let decoded = decode_entity_centric(&input)?;
        let json = serde_json::to_string(&decoded).map_err(|e| Fail(EcieStatus::Internal, e.to_string()))?;
        *out = to_c_string(json)?;
        Ok(())
    })
}
