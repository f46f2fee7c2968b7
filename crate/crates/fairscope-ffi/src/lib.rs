//! C ABI for the fairscope audit library.
//!
//! Every object crossing the boundary is an opaque handle created and
//! destroyed here; callers never see struct layouts. Functions return an
//! [`FsStatus`] and write results through out-pointers, which stay
//! untouched on failure. Strings returned to C are NUL-terminated and
//! must be released with [`fs_string_free`].
//!
//! The committed header `include/fairscope.h` is generated from this
//! file with cbindgen; see the README for the exact command.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use fairscope::fairness::{gaps, Aggregation, EqodCombine, FairnessDefinition, GapReport};
use fairscope::metrics::MetricTable;
use fairscope::records::Regime;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsStatus {
    /// The call succeeded and any out-pointer was written.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A numeric argument does not name a known variant.
    InvalidArgument = 2,
    /// The input bytes were not valid for the expected format.
    ParseError = 3,
    /// The computation rejected the input (for example a table missing
    /// one of the gender rows).
    ComputeError = 4,
    /// The named model is not part of the report.
    NotFound = 5,
    /// An unexpected internal failure; the library state is unchanged.
    InternalError = 6,
}

/// Fairness definition selector for [`fs_gap_report_compute`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsDefinition {
    Dp = 0,
    Eqop = 1,
    Eqod = 2,
}

/// Training regime selector for [`fs_gap_report_compute`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsRegime {
    Regular = 0,
    FemaleTrained = 1,
    MaleTrained = 2,
}

/// Per-model aggregation selector for [`fs_gap_report_compute`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsAggregation {
    Mean = 0,
    Max = 1,
}

/// TPR/FPR combination selector for the equalized-odds definition.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsEqodCombine {
    Mean = 0,
    Max = 1,
    Sum = 2,
}

/// Opaque metric table handle.
pub struct FsMetricTable {
    inner: MetricTable,
}

/// Opaque gap report handle.
pub struct FsGapReport {
    inner: GapReport,
}

fn decode_definition(value: u32) -> Option<FairnessDefinition> {
    match value {
        0 => Some(FairnessDefinition::DemographicParity),
        1 => Some(FairnessDefinition::EqualOpportunity),
        2 => Some(FairnessDefinition::EqualizedOdds),
        _ => None,
    }
}

fn decode_regime(value: u32) -> Option<Regime> {
    match value {
        0 => Some(Regime::Regular),
        1 => Some(Regime::FemaleTrained),
        2 => Some(Regime::MaleTrained),
        _ => None,
    }
}

fn decode_aggregation(value: u32) -> Option<Aggregation> {
    match value {
        0 => Some(Aggregation::Mean),
        1 => Some(Aggregation::Max),
        _ => None,
    }
}

fn decode_combine(value: u32) -> Option<EqodCombine> {
    match value {
        0 => Some(EqodCombine::Mean),
        1 => Some(EqodCombine::Max),
        2 => Some(EqodCombine::Sum),
        _ => None,
    }
}

unsafe fn hand_out<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Parses a metric CSV held in memory into a table handle.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` must be a valid
/// pointer. On `Ok` the handle written to `out` must eventually be
/// released with [`fs_metric_table_free`].
#[no_mangle]
pub unsafe extern "C" fn fs_metric_table_from_csv(
    data: *const u8,
    len: usize,
    out: *mut *mut FsMetricTable,
) -> FsStatus {
    if data.is_null() || out.is_null() {
        return FsStatus::NullArgument;
    }
    let bytes = slice::from_raw_parts(data, len);
    match catch_unwind(|| MetricTable::from_csv(bytes)) {
        Ok(Ok(inner)) => {
            hand_out(out, FsMetricTable { inner });
            FsStatus::Ok
        }
        Ok(Err(_)) => FsStatus::ParseError,
        Err(_) => FsStatus::InternalError,
    }
}

/// Loads the metric table bundled with the library.
///
/// # Safety
/// `out` must be a valid pointer. On `Ok` the handle written to `out`
/// must eventually be released with [`fs_metric_table_free`].
#[no_mangle]
pub unsafe extern "C" fn fs_fixture_table(out: *mut *mut FsMetricTable) -> FsStatus {
    if out.is_null() {
        return FsStatus::NullArgument;
    }
    match catch_unwind(fairscope::fixture_table) {
        Ok(Ok(inner)) => {
            hand_out(out, FsMetricTable { inner });
            FsStatus::Ok
        }
        Ok(Err(_)) => FsStatus::ParseError,
        Err(_) => FsStatus::InternalError,
    }
}

/// Writes the number of (regime, set, model, class) cells in the table.
///
/// # Safety
/// `table` must be a live handle from this library and `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_metric_table_cell_count(
    table: *const FsMetricTable,
    out: *mut usize,
) -> FsStatus {
    if table.is_null() || out.is_null() {
        return FsStatus::NullArgument;
    }
    *out = (*table).inner.len();
    FsStatus::Ok
}

/// Releases a table handle. NULL is ignored.
///
/// # Safety
/// `table` must be a handle from this library that has not been freed,
/// or NULL.
#[no_mangle]
pub unsafe extern "C" fn fs_metric_table_free(table: *mut FsMetricTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Computes a gap report over `table`.
///
/// The selector arguments take values of [`FsDefinition`], [`FsRegime`],
/// [`FsAggregation`] and [`FsEqodCombine`]; anything else returns
/// `InvalidArgument`. `eqod_combine` is consulted only when `definition`
/// is `Eqod` but must always be a valid value.
///
/// # Safety
/// `table` must be a live handle from this library and `out` must be a
/// valid pointer. On `Ok` the handle written to `out` must eventually be
/// released with [`fs_gap_report_free`].
#[no_mangle]
pub unsafe extern "C" fn fs_gap_report_compute(
    table: *const FsMetricTable,
    definition: u32,
    regime: u32,
    aggregation: u32,
    eqod_combine: u32,
    out: *mut *mut FsGapReport,
) -> FsStatus {
    if table.is_null() || out.is_null() {
        return FsStatus::NullArgument;
    }
    let (Some(definition), Some(regime), Some(aggregation), Some(combine)) = (
        decode_definition(definition),
        decode_regime(regime),
        decode_aggregation(aggregation),
        decode_combine(eqod_combine),
    ) else {
        return FsStatus::InvalidArgument;
    };
    let inner = &(*table).inner;
    match catch_unwind(AssertUnwindSafe(|| {
        gaps(inner, definition, regime, aggregation, combine)
    })) {
        Ok(Ok(report)) => {
            hand_out(out, FsGapReport { inner: report });
            FsStatus::Ok
        }
        Ok(Err(_)) => FsStatus::ComputeError,
        Err(_) => FsStatus::InternalError,
    }
}

/// Writes the aggregate gap of one model to `out`.
///
/// # Safety
/// `report` must be a live handle from this library, `model_id` must be
/// a NUL-terminated string and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_gap_report_aggregate(
    report: *const FsGapReport,
    model_id: *const c_char,
    out: *mut f64,
) -> FsStatus {
    if report.is_null() || model_id.is_null() || out.is_null() {
        return FsStatus::NullArgument;
    }
    let Ok(model_id) = CStr::from_ptr(model_id).to_str() else {
        return FsStatus::InvalidArgument;
    };
    match (*report).inner.aggregate_of(model_id) {
        Some(aggregate) => {
            *out = aggregate;
            FsStatus::Ok
        }
        None => FsStatus::NotFound,
    }
}

/// Serializes a gap report to a JSON string.
///
/// # Safety
/// `report` must be a live handle from this library and `out` must be a
/// valid pointer. On `Ok` the string written to `out` must eventually be
/// released with [`fs_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fs_gap_report_to_json(
    report: *const FsGapReport,
    out: *mut *mut c_char,
) -> FsStatus {
    if report.is_null() || out.is_null() {
        return FsStatus::NullArgument;
    }
    let Ok(json) = serde_json::to_string(&(*report).inner) else {
        return FsStatus::InternalError;
    };
    // Report ids come from CSV text and never contain NUL bytes, but a
    // checked conversion keeps the invariant local.
    let Ok(text) = CString::new(json) else {
        return FsStatus::InternalError;
    };
    *out = text.into_raw();
    FsStatus::Ok
}

/// Releases a gap report handle. NULL is ignored.
///
/// # Safety
/// `report` must be a handle from this library that has not been freed,
/// or NULL.
#[no_mangle]
pub unsafe extern "C" fn fs_gap_report_free(report: *mut FsGapReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `text` must be a string returned by this library that has not been
/// freed, or NULL.
#[no_mangle]
pub unsafe extern "C" fn fs_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn fixture() -> *mut FsMetricTable {
        let mut table = ptr::null_mut();
        let status = unsafe { fs_fixture_table(&mut table) };
        assert_eq!(status, FsStatus::Ok);
        assert!(!table.is_null());
        table
    }

    #[test]
    fn fixture_reports_expected_cell_count() {
        let table = fixture();
        let mut cells = 0usize;
        let status = unsafe { fs_metric_table_cell_count(table, &mut cells) };
        assert_eq!(status, FsStatus::Ok);
        assert_eq!(cells, 216);
        unsafe { fs_metric_table_free(table) };
    }

    #[test]
    fn gap_report_round_trip() {
        let table = fixture();
        let mut report = ptr::null_mut();
        let status = unsafe {
            fs_gap_report_compute(
                table,
                FsDefinition::Dp as u32,
                FsRegime::Regular as u32,
                FsAggregation::Mean as u32,
                FsEqodCombine::Mean as u32,
                &mut report,
            )
        };
        assert_eq!(status, FsStatus::Ok);

        let model = CString::new("vgg16").unwrap();
        let mut aggregate = 0.0f64;
        let status = unsafe { fs_gap_report_aggregate(report, model.as_ptr(), &mut aggregate) };
        assert_eq!(status, FsStatus::Ok);
        assert!((aggregate - 0.0375).abs() < 1e-9, "vgg16 aggregate {aggregate}");

        let missing = CString::new("nonesuch").unwrap();
        let status = unsafe { fs_gap_report_aggregate(report, missing.as_ptr(), &mut aggregate) };
        assert_eq!(status, FsStatus::NotFound);

        let mut json = ptr::null_mut();
        let status = unsafe { fs_gap_report_to_json(report, &mut json) };
        assert_eq!(status, FsStatus::Ok);
        let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap();
        let value: serde_json::Value = serde_json::from_str(text).unwrap();
        assert_eq!(value["definition"], "dp");
        assert_eq!(value["ranking"][0], serde_json::json!(["vgg16"]));
        unsafe { fs_string_free(json) };

        unsafe { fs_gap_report_free(report) };
        unsafe { fs_metric_table_free(table) };
    }

    #[test]
    fn csv_parsing_reports_errors_by_status() {
        let mut table = ptr::null_mut();
        let junk = b"not,a,metric,table\n1,2,3,4\n";
        let status = unsafe { fs_metric_table_from_csv(junk.as_ptr(), junk.len(), &mut table) };
        assert_eq!(status, FsStatus::ParseError);
        assert!(table.is_null(), "out-pointer untouched on failure");
    }

    #[test]
    fn null_and_invalid_arguments_are_rejected() {
        let status = unsafe { fs_fixture_table(ptr::null_mut()) };
        assert_eq!(status, FsStatus::NullArgument);

        let mut cells = 0usize;
        let status = unsafe { fs_metric_table_cell_count(ptr::null(), &mut cells) };
        assert_eq!(status, FsStatus::NullArgument);

        let table = fixture();
        let mut report = ptr::null_mut();
        let status = unsafe { fs_gap_report_compute(table, 9, 0, 0, 0, &mut report) };
        assert_eq!(status, FsStatus::InvalidArgument);
        assert!(report.is_null());
        unsafe { fs_metric_table_free(table) };

        // Freeing NULL must be a no-op, mirroring free(3).
        unsafe {
            fs_metric_table_free(ptr::null_mut());
            fs_gap_report_free(ptr::null_mut());
            fs_string_free(ptr::null_mut());
        }
    }

    #[test]
    fn incomplete_tables_are_compute_errors() {
        let csv = b"regime,test_set,model,class,metric,value\n\
                    regular,female,only,surprised,acc,0.5\n\
                    regular,female,only,surprised,tpr,0.5\n\
                    regular,female,only,surprised,fpr,0.5\n";
        let mut table = ptr::null_mut();
        let status = unsafe { fs_metric_table_from_csv(csv.as_ptr(), csv.len(), &mut table) };
        assert_eq!(status, FsStatus::Ok);

        let mut report = ptr::null_mut();
        let status = unsafe {
            fs_gap_report_compute(
                table,
                FsDefinition::Dp as u32,
                FsRegime::Regular as u32,
                FsAggregation::Mean as u32,
                FsEqodCombine::Mean as u32,
                &mut report,
            )
        };
        assert_eq!(status, FsStatus::ComputeError);
        assert!(report.is_null());
        unsafe { fs_metric_table_free(table) };
    }
}
