#![no_main]

use libfuzzer_sys::fuzz_target;
use retrodp::harness::{Summary, Trace};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(trace) = Trace::parse(text) {
            let again = Trace::parse(&trace.to_csv_string()).expect("round trip");
            assert_eq!(again.records.len(), trace.records.len());
            let _ = Summary::from_trace(&trace);
        }
    }
});
