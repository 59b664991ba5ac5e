//! Canonical JSON encodings.
//!
//! Canonical means: object keys in declaration order, no insignificant
//! whitespace, and arrays in schema order (frames by step, nodes and roots
//! ascending by id). Equal values always encode to identical bytes, so the
//! CLI's trace document and the HTTP responses can be compared byte for byte.

use serde::Serialize;

use crate::error::CompileError;
use crate::interpreter::{Frame, Trace};

/// Encodes any serializable value canonically.
pub fn to_canonical<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("in-memory JSON encoding cannot fail")
}

/// `{"frames":[...],"status":...,"error":...,"output":[...]}`
pub fn trace_document(trace: &Trace) -> String {
    to_canonical(trace)
}

#[derive(Serialize)]
struct FramesPage<'a> {
    frames: &'a [Frame],
}

/// `{"frames":[...]}`
pub fn frames_document(frames: &[Frame]) -> String {
    to_canonical(&FramesPage { frames })
}

#[derive(Serialize)]
struct ErrorList<'a> {
    errors: &'a [CompileError],
}

/// `{"errors":[...]}`
pub fn compile_errors_document(errors: &[CompileError]) -> String {
    to_canonical(&ErrorList { errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{compile, RunLimits};

    #[test]
    fn empty_program_trace() {
        let trace = compile("begin end").unwrap().run(RunLimits::default());
        assert_eq!(
            trace_document(&trace),
            r#"{"frames":[{"step":0,"line":0,"roots":[],"selected":null,"nodes":[]}],"status":"completed","error":null,"output":[]}"#
        );
    }

    #[test]
    fn frame_field_order() {
        let trace = compile("begin\n r := newNode(5)\n setLeft(r, newNode(3))\nend")
            .unwrap()
            .run(RunLimits::default());
        assert_eq!(
            frames_document(&trace.frames[2..]),
            r#"{"frames":[{"step":2,"line":0,"roots":[1],"selected":1,"nodes":[{"id":1,"value":5,"left":2,"right":null},{"id":2,"value":3,"left":null,"right":null}]}]}"#
        );
    }

    #[test]
    fn runtime_error_and_output() {
        let trace = compile("begin\n print(7)\n x := 1 / 0\nend")
            .unwrap()
            .run(RunLimits::default());
        let doc = trace_document(&trace);
        assert!(
            doc.ends_with(r#""status":"runtime_error","error":{"code":"R-6","message":"`/` by zero","line":3},"output":[{"step":0,"text":"7"}]}"#),
            "{doc}"
        );
    }

    #[test]
    fn error_list() {
        let errs = compile("begin @ end").unwrap_err();
        assert_eq!(
            compile_errors_document(&errs),
            r#"{"errors":[{"phase":"lexical","code":"E-LEX-1","line":1,"column":7,"message":"unknown character `@`"}]}"#
        );
    }
}
