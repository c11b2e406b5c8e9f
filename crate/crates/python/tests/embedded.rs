use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

const SCRIPT: &std::ffi::CStr = cr#"
xor = infopriv.Channel.xor(2)
assert abs(infopriv.capacity(xor)["value"] - 1.0) < 1e-6
assert abs(infopriv.capacity(xor, b=2.0)["value"]) < 1e-9
profile = infopriv.balance_profile(xor, points=3)
assert [p["b"] for p in profile["points"]] == [0.0, 1.0, 2.0]
try:
    infopriv.capacity(xor, b=3.0)
except ValueError:
    pass
else:
    raise AssertionError("b beyond log2 |X| accepted")
"#;

#[test]
fn module_works_inside_an_interpreter() {
    Python::initialize();
    Python::attach(|py| {
        let module = wrap_pymodule!(infopriv_py::infopriv_module)(py);
        let globals = PyDict::new(py);
        globals.set_item("infopriv", module).unwrap();
        py.run(SCRIPT, Some(&globals), None)
            .map_err(|e| e.to_string())
            .unwrap();
    });
}
