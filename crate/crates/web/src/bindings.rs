use wasm_bindgen::prelude::*;

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
pub fn couple(request: &str) -> Result<String, JsError> {
    crate::couple(request).map_err(js)
}

#[wasm_bindgen(js_name = sampleScript)]
pub fn sample_script(seed: u32) -> Result<String, JsError> {
    crate::sample_script(seed.into()).map_err(js)
}

#[wasm_bindgen]
pub struct Demo(crate::Demo);

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(dialogues: u32, noise: f64, seed: u32, structure: &str) -> Result<Demo, JsError> {
        crate::Demo::train(dialogues as usize, noise, seed.into(), structure)
            .map(Demo)
            .map_err(js)
    }

    pub fn summary(&self) -> Result<String, JsError> {
        self.0.summary().map_err(js)
    }

    pub fn classify(&self, script: &str, uniform_transitions: bool, strict_hierarchy: bool) -> Result<String, JsError> {
        self.0.classify(script, uniform_transitions, strict_hierarchy).map_err(js)
    }
}
