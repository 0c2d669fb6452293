use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub bound: f64,
}

impl Assertion {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Assertion { name: name.into(), pass: value <= bound, value, bound }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Assertion { name: name.into(), pass: value >= bound, value, bound }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub config: RunConfig,
    pub results: Vec<Value>,
    pub assertions: Vec<Assertion>,
    #[serde(skip)]
    pub table: Option<Vec<qcommit::oraclegame::ScalingRow>>,
}

impl Report {
    pub fn new(config: RunConfig) -> Self {
        Report { version: env!("CARGO_PKG_VERSION"), config, results: Vec::new(), assertions: Vec::new(), table: None }
    }

    pub fn result(&mut self, item: impl Serialize) {
        self.results.push(serde_json::to_value(item).expect("results serialize"));
    }

    pub fn check(&mut self, a: Assertion) {
        self.assertions.push(a);
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("d,m,n,estimate,std_error,envelope\n");
        for r in self.table.iter().flatten() {
            s.push_str(&format!("{},{},{},{},{},{}\n", r.d, r.m, r.n, r.estimate, r.std_error, r.envelope));
        }
        s
    }
}
