use std::path::Path;

use biharm_core::{builtin_example, ExperimentConfig};

#[test]
fn shipped_configs_equal_builtin_examples() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for n in 1..=4 {
        let file = ExperimentConfig::load(&dir.join(format!("example{n}.toml"))).unwrap();
        assert_eq!(file, builtin_example(n).unwrap(), "example {n}");
    }
}
