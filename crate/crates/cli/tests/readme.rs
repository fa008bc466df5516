//! Runs every `$ ltspace ...` line in the README's console blocks and
//! compares stdout with the text shown under it.

use std::path::PathBuf;
use std::process::Command;

fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

struct Example {
    args: Vec<String>,
    expected: String,
}

fn console_examples(readme: &str) -> Vec<Example> {
    let mut out = Vec::new();
    let mut in_block = false;
    let mut current: Option<Example> = None;
    for line in readme.lines() {
        if line.starts_with("```") {
            if in_block {
                out.extend(current.take());
            }
            in_block = line == "```console";
            continue;
        }
        if !in_block {
            continue;
        }
        if let Some(cmd) = line.strip_prefix("$ ltspace ") {
            out.extend(current.take());
            current = Some(Example {
                args: cmd.split_whitespace().map(String::from).collect(),
                expected: String::new(),
            });
        } else if let Some(ex) = current.as_mut() {
            ex.expected.push_str(line);
            ex.expected.push('\n');
        }
    }
    out
}

#[test]
fn readme_examples_match() {
    let root = workspace_root();
    let readme = std::fs::read_to_string(root.join("README.md")).unwrap();
    let examples = console_examples(&readme);
    assert!(examples.len() >= 6, "found only {} examples", examples.len());
    for ex in examples {
        let out = Command::new(env!("CARGO_BIN_EXE_ltspace"))
            .args(&ex.args)
            .current_dir(&root)
            .env_remove("LTSPACE_THREADS")
            .output()
            .unwrap();
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(out.status.success(), "ltspace {:?} exited with {:?}", ex.args, out.status);
        assert_eq!(stdout, ex.expected, "ltspace {}", ex.args.join(" "));
    }
}
