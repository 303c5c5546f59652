//! Seeded generation of synthetic projects inside the supported command
//! subset: boolean options, conditional sets and appends, targets, source
//! attachments, link chains, loops, and subdirectories. Used by the
//! cross-validation suites to compare symbolic analysis against concrete
//! per-configuration evaluation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A generated project: listfile texts plus the ground facts needed to
/// drive queries against it.
#[derive(Debug, Clone)]
pub struct SynthProject {
    /// (root-relative path, text) pairs; always includes `CMakeLists.txt`.
    pub files: Vec<(String, String)>,
    /// Names of the declared boolean options.
    pub options: Vec<String>,
    /// Normalized paths of every source file referenced anywhere.
    pub sources: Vec<String>,
}

struct Gen {
    rng: ChaCha8Rng,
    options: Vec<String>,
    targets: Vec<Target>,
    vars: Vec<String>,
    sources: Vec<String>,
    commands: usize,
    budget: usize,
}

#[derive(Clone)]
struct Target {
    name: String,
    /// Index of the segment that declared it; None = unconditional. Only
    /// same-segment or unconditional targets may be referenced later, so
    /// attachment guards never outrun existence guards.
    segment: Option<usize>,
    in_subdir: bool,
}

impl Gen {
    fn pick_option(&mut self) -> String {
        let i = self.rng.random_range(0..self.options.len());
        self.options[i].clone()
    }

    fn new_source(&mut self, dir: &str) -> String {
        let name = format!("{dir}src_{}.c", self.sources.len());
        self.sources.push(name.clone());
        name
    }

    fn existing_source(&mut self, dir_only: Option<&str>) -> Option<String> {
        let candidates: Vec<&String> = self
            .sources
            .iter()
            .filter(|s| match dir_only {
                Some(dir) => s.starts_with(dir),
                None => true,
            })
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let i = self.rng.random_range(0..candidates.len());
        Some(candidates[i].clone())
    }

    /// A source argument for a target in `dir`: mostly fresh files, with
    /// some reuse so changes hit several deliverables.
    fn source_arg(&mut self, dir: &str) -> String {
        if self.rng.random_bool(0.3) {
            if let Some(existing) = self.existing_source(Some(dir)) {
                return existing
                    .strip_prefix(dir)
                    .unwrap_or(&existing)
                    .to_string();
            }
        }
        let fresh = self.new_source(dir);
        fresh.strip_prefix(dir).unwrap_or(&fresh).to_string()
    }

    fn referencable_targets(&self, segment: Option<usize>, in_subdir: bool) -> Vec<String> {
        self.targets
            .iter()
            .filter(|t| t.in_subdir == in_subdir && (t.segment.is_none() || t.segment == segment))
            .map(|t| t.name.clone())
            .collect()
    }
}

/// Generate one project from a seed. Deterministic: identical seeds yield
/// identical projects.
pub fn generate_project(seed: u64) -> SynthProject {
    let mut gen = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        options: Vec::new(),
        targets: Vec::new(),
        vars: Vec::new(),
        sources: Vec::new(),
        commands: 0,
        budget: 40,
    };

    let n_options = gen.rng.random_range(1..=5usize);
    for i in 0..n_options {
        gen.options.push(format!("OPT_{i}"));
    }

    let mut root = String::new();
    root.push_str("cmake_minimum_required(VERSION 3.10)\n");
    root.push_str(&format!("project(synth_{seed} C)\n"));
    for (i, opt) in gen.options.clone().iter().enumerate() {
        let default = if gen.rng.random_bool(0.5) { "ON" } else { "OFF" };
        root.push_str(&format!("option({opt} \"generated option {i}\" {default})\n"));
        gen.commands += 1;
    }

    let with_subdir = gen.rng.random_bool(0.4);
    let mut subdir_text = String::new();
    if with_subdir {
        root.push_str("add_subdirectory(sub)\n");
        gen.commands += 1;
        emit_target(&mut gen, &mut subdir_text, None, "sub/", true);
        if gen.rng.random_bool(0.5) {
            emit_target(&mut gen, &mut subdir_text, None, "sub/", true);
        }
    }

    // A few unconditional targets first so links have stable endpoints.
    let n_plain = gen.rng.random_range(1..=2usize);
    for _ in 0..n_plain {
        emit_target(&mut gen, &mut root, None, "", false);
    }

    let n_segments = gen.rng.random_range(1..=3usize);
    for segment in 0..n_segments {
        if gen.commands >= gen.budget {
            break;
        }
        emit_segment(&mut gen, &mut root, segment);
    }

    let mut files = vec![("CMakeLists.txt".to_string(), root)];
    if with_subdir {
        files.push(("sub/CMakeLists.txt".to_string(), subdir_text));
    }
    SynthProject {
        files,
        options: gen.options.clone(),
        sources: gen.sources.clone(),
    }
}

/// One guarded block: if(...) body [else() body] endif().
fn emit_segment(gen: &mut Gen, out: &mut String, segment: usize) {
    let option = gen.pick_option();
    let negated = gen.rng.random_bool(0.25);
    let header = if negated {
        format!("if(NOT {option})\n")
    } else {
        format!("if({option})\n")
    };
    out.push_str(&header);
    gen.commands += 1;
    emit_body(gen, out, Some(segment), "  ");
    if gen.rng.random_bool(0.4) {
        out.push_str("else()\n");
        emit_body(gen, out, Some(segment), "  ");
    }
    out.push_str("endif()\n");
}

fn emit_body(gen: &mut Gen, out: &mut String, segment: Option<usize>, indent: &str) {
    let n = gen.rng.random_range(1..=3usize);
    for _ in 0..n {
        if gen.commands >= gen.budget {
            return;
        }
        match gen.rng.random_range(0..100u32) {
            0..=34 => emit_target(gen, &mut indented(out, indent), segment, "", false),
            35..=54 => emit_var_command(gen, &mut indented(out, indent), segment),
            55..=74 => emit_attach(gen, &mut indented(out, indent), segment),
            75..=89 => emit_link(gen, &mut indented(out, indent), segment),
            _ => emit_foreach(gen, &mut indented(out, indent), segment),
        }
    }
}

/// Writes commands through a small adapter that prefixes each line.
struct Indented<'a> {
    out: &'a mut String,
    prefix: &'a str,
}

fn indented<'a>(out: &'a mut String, prefix: &'a str) -> Indented<'a> {
    Indented { out, prefix }
}

impl Indented<'_> {
    fn push_line(&mut self, line: &str) {
        self.out.push_str(self.prefix);
        self.out.push_str(line);
        self.out.push('\n');
    }
}

trait Sink {
    fn line(&mut self, text: &str);
}

impl Sink for String {
    fn line(&mut self, text: &str) {
        self.push_str(text);
        self.push('\n');
    }
}

impl Sink for Indented<'_> {
    fn line(&mut self, text: &str) {
        self.push_line(text);
    }
}

fn emit_target(
    gen: &mut Gen,
    out: &mut impl Sink,
    segment: Option<usize>,
    dir: &str,
    in_subdir: bool,
) {
    let name = format!("t{}", gen.targets.len());
    let kind = gen.rng.random_range(0..3u32);
    let mut srcs = Vec::new();
    let n_srcs = gen.rng.random_range(1..=2usize);
    for _ in 0..n_srcs {
        srcs.push(gen.source_arg(dir));
    }
    if !gen.vars.is_empty() && gen.rng.random_bool(0.4) {
        let i = gen.rng.random_range(0..gen.vars.len());
        srcs.push(format!("${{{}}}", gen.vars[i]));
    }
    let line = match kind {
        0 => format!("add_executable({name} {})", srcs.join(" ")),
        1 => format!("add_library({name} STATIC {})", srcs.join(" ")),
        _ => format!("add_library({name} SHARED {})", srcs.join(" ")),
    };
    out.line(&line);
    gen.commands += 1;
    gen.targets.push(Target {
        name,
        segment,
        in_subdir,
    });
}

fn emit_var_command(gen: &mut Gen, out: &mut impl Sink, _segment: Option<usize>) {
    let reuse = !gen.vars.is_empty() && gen.rng.random_bool(0.5);
    let (var, append) = if reuse {
        let i = gen.rng.random_range(0..gen.vars.len());
        (gen.vars[i].clone(), gen.rng.random_bool(0.5))
    } else {
        let var = format!("SRCS_{}", gen.vars.len());
        gen.vars.push(var.clone());
        (var, false)
    };
    let mut items = Vec::new();
    for _ in 0..gen.rng.random_range(1..=2usize) {
        items.push(gen.source_arg(""));
    }
    let line = if append {
        format!("list(APPEND {var} {})", items.join(" "))
    } else {
        format!("set({var} {})", items.join(" "))
    };
    out.line(&line);
    gen.commands += 1;
}

fn emit_attach(gen: &mut Gen, out: &mut impl Sink, segment: Option<usize>) {
    let candidates = gen.referencable_targets(segment, false);
    if candidates.is_empty() {
        return emit_var_command(gen, out, segment);
    }
    let target = candidates[gen.rng.random_range(0..candidates.len())].clone();
    let src = gen.source_arg("");
    out.line(&format!("target_sources({target} PRIVATE {src})"));
    gen.commands += 1;
}

fn emit_link(gen: &mut Gen, out: &mut impl Sink, segment: Option<usize>) {
    let froms = gen.referencable_targets(segment, false);
    if froms.is_empty() || gen.targets.len() < 2 {
        return emit_var_command(gen, out, segment);
    }
    let from = froms[gen.rng.random_range(0..froms.len())].clone();
    let all: Vec<String> = gen
        .targets
        .iter()
        .map(|t| t.name.clone())
        .filter(|n| *n != from)
        .collect();
    let to = all[gen.rng.random_range(0..all.len())].clone();
    out.line(&format!("target_link_libraries({from} {to})"));
    gen.commands += 1;
}

fn emit_foreach(gen: &mut Gen, out: &mut impl Sink, segment: Option<usize>) {
    let candidates = gen.referencable_targets(segment, false);
    if candidates.is_empty() {
        return emit_var_command(gen, out, segment);
    }
    let target = candidates[gen.rng.random_range(0..candidates.len())].clone();
    let a = gen.source_arg("");
    let b = gen.source_arg("");
    out.line(&format!("foreach(item {a} {b})"));
    out.line(&format!("  target_sources({target} PRIVATE ${{item}})"));
    out.line("endforeach()");
    gen.commands += 2;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_source;

    #[test]
    fn generation_is_deterministic() {
        let a = generate_project(42);
        let b = generate_project(42);
        assert_eq!(a.files, b.files);
        assert_ne!(generate_project(43).files, a.files);
    }

    #[test]
    fn generated_projects_parse() {
        for seed in 0..50 {
            let project = generate_project(seed);
            for (path, text) in &project.files {
                parse_source(text, path)
                    .unwrap_or_else(|e| panic!("seed {seed}, {path}: {e}\n{text}"));
            }
        }
    }

    #[test]
    fn generated_projects_stay_in_budget() {
        for seed in 0..50 {
            let project = generate_project(seed);
            let total_commands: usize = project
                .files
                .iter()
                .map(|(_, text)| {
                    text.lines()
                        .filter(|l| {
                            let t = l.trim_start();
                            !t.is_empty() && !t.starts_with('#') && !t.starts_with("endif")
                                && !t.starts_with("else") && !t.starts_with("endforeach")
                        })
                        .count()
                })
                .sum();
            assert!(total_commands <= 60, "seed {seed}: {total_commands}");
            assert!(!project.options.is_empty());
            assert!(project.options.len() <= 8);
        }
    }
}
