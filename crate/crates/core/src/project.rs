//! Project loading: starting from the root `CMakeLists.txt`, follow
//! statically resolvable `include()` and `add_subdirectory()` references and
//! parse every reachable listfile.
//!
//! Resolution here is deliberately shallow — a reference is followed when its
//! argument is a literal or reduces to one through unconditional top-level
//! `set()`s and the built-in directory variables. The evaluator re-resolves
//! includes later with fully flattened variables; anything missed here is
//! reported, not fatal.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ast::{ArgumentKind, AstNode, CommandInvocation};
use crate::parse::{parse_source, FrontendError};
use crate::paths;
use crate::warn::{Warning, WarningCode};

/// Maximum nesting of include/add_subdirectory during loading.
pub const INCLUDE_DEPTH_CAP: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedProject {
    /// Absolute root directory as a normalized string.
    pub root_abs: String,
    /// Parsed listfiles keyed by root-relative normalized path.
    pub files: BTreeMap<String, Vec<AstNode>>,
    /// Root-relative path of the entry listfile.
    pub root_file: String,
    pub warnings: Vec<Warning>,
}

impl ParsedProject {
    /// Assemble a project from in-memory sources, without touching the
    /// filesystem. Intended for tests and embedders.
    pub fn from_sources<'a>(
        root_abs: &str,
        sources: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<ParsedProject, LoadError> {
        let mut files = BTreeMap::new();
        for (path, text) in sources {
            let rel = paths::normalize(path);
            let ast = parse_source(text, &rel).map_err(|source| LoadError::Frontend {
                path: rel.clone(),
                source,
            })?;
            files.insert(rel, ast);
        }
        if !files.contains_key("CMakeLists.txt") {
            return Err(LoadError::MissingRootListfile(PathBuf::from(root_abs)));
        }
        Ok(ParsedProject {
            root_abs: paths::normalize(root_abs),
            files,
            root_file: "CMakeLists.txt".to_string(),
            warnings: Vec::new(),
        })
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("no CMakeLists.txt found in {0}")]
    MissingRootListfile(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Frontend {
        path: String,
        source: FrontendError,
    },
}

/// Load and parse a project rooted at `root_dir`.
pub fn load_project(root_dir: &Path) -> Result<ParsedProject, LoadError> {
    let root_entry = root_dir.join("CMakeLists.txt");
    if !root_entry.is_file() {
        return Err(LoadError::MissingRootListfile(root_dir.to_path_buf()));
    }
    let root_abs = fs::canonicalize(root_dir)
        .map_err(|source| LoadError::Io {
            path: root_dir.display().to_string(),
            source,
        })?
        .to_string_lossy()
        .replace('\\', "/");

    let mut loader = Loader {
        root_abs: paths::normalize(&root_abs),
        files: BTreeMap::new(),
        warnings: Vec::new(),
        active: Vec::new(),
    };
    loader.visit("CMakeLists.txt", true)?;
    Ok(ParsedProject {
        root_abs: loader.root_abs,
        files: loader.files,
        root_file: "CMakeLists.txt".to_string(),
        warnings: loader.warnings,
    })
}

struct Loader {
    root_abs: String,
    files: BTreeMap<String, Vec<AstNode>>,
    warnings: Vec<Warning>,
    /// Stack of files currently being scanned, for cycle reporting.
    active: Vec<String>,
}

impl Loader {
    fn visit(&mut self, rel_path: &str, is_root: bool) -> Result<(), LoadError> {
        if self.files.contains_key(rel_path) {
            if self.active.iter().any(|p| p == rel_path) {
                self.warnings.push(Warning::new(
                    WarningCode::IncludeCycle,
                    format!("include cycle through {rel_path}; already parsed, skipping"),
                ));
            }
            return Ok(());
        }
        if self.active.len() >= INCLUDE_DEPTH_CAP {
            self.warnings.push(Warning::new(
                WarningCode::IncludeDepthExceeded,
                format!("include depth exceeds {INCLUDE_DEPTH_CAP} at {rel_path}; not descending"),
            ));
            return Ok(());
        }

        let disk_path = PathBuf::from(format!("{}/{rel_path}", self.root_abs));
        let bytes = match fs::read(&disk_path) {
            Ok(b) => b,
            Err(source) => {
                if is_root {
                    return Err(LoadError::Io {
                        path: rel_path.to_string(),
                        source,
                    });
                }
                self.warnings.push(Warning::new(
                    WarningCode::MissingInclude,
                    format!("cannot read {rel_path}: {source}"),
                ));
                return Ok(());
            }
        };
        let text = match String::from_utf8(bytes) {
            Ok(t) => t,
            Err(e) => {
                self.warnings.push(Warning::new(
                    WarningCode::InvalidUtf8,
                    format!("{rel_path} is not valid UTF-8; invalid sequences replaced"),
                ));
                String::from_utf8_lossy(e.as_bytes()).into_owned()
            }
        };
        let ast = match parse_source(&text, rel_path) {
            Ok(ast) => ast,
            Err(source) => {
                if is_root {
                    return Err(LoadError::Frontend {
                        path: rel_path.to_string(),
                        source,
                    });
                }
                self.warnings.push(Warning::new(
                    WarningCode::ParseFailure,
                    format!("cannot parse {rel_path}: {source}"),
                ));
                self.files.insert(rel_path.to_string(), Vec::new());
                return Ok(());
            }
        };

        self.files.insert(rel_path.to_string(), ast.clone());
        self.active.push(rel_path.to_string());
        let base_dir = paths::parent_dir(rel_path);
        let mut consts = builtin_consts(&self.root_abs, &base_dir);
        self.scan(&ast, &base_dir, &mut consts, true)?;
        self.active.pop();
        Ok(())
    }

    /// Walk a node list looking for include/add_subdirectory references and
    /// unconditional constant sets. `top_level` gates constant tracking:
    /// sets inside branches or loops are conditional and must not be folded.
    fn scan(
        &mut self,
        nodes: &[AstNode],
        base_dir: &str,
        consts: &mut BTreeMap<String, String>,
        top_level: bool,
    ) -> Result<(), LoadError> {
        for node in nodes {
            match node {
                AstNode::Command(cmd) => self.scan_command(cmd, base_dir, consts, top_level)?,
                AstNode::If(block) => {
                    for clause in &block.clauses {
                        self.scan(&clause.body, base_dir, consts, false)?;
                    }
                    self.scan(&block.else_body, base_dir, consts, false)?;
                }
                AstNode::Foreach(block) => self.scan(&block.body, base_dir, consts, false)?,
                AstNode::While(block) => self.scan(&block.body, base_dir, consts, false)?,
                AstNode::Routine(def) => self.scan(&def.body, base_dir, consts, false)?,
            }
        }
        Ok(())
    }

    fn scan_command(
        &mut self,
        cmd: &CommandInvocation,
        base_dir: &str,
        consts: &mut BTreeMap<String, String>,
        top_level: bool,
    ) -> Result<(), LoadError> {
        match cmd.name.as_str() {
            "set" if top_level => {
                if let [name, value] = cmd.args.as_slice() {
                    if name.kind == ArgumentKind::Unquoted && !name.raw_text.contains('$') {
                        if let Some(v) = substitute(&value.raw_text, consts) {
                            consts.insert(name.raw_text.clone(), v);
                        }
                    }
                }
            }
            "include" => {
                let Some(first) = cmd.args.first() else {
                    return Ok(());
                };
                match substitute(&first.raw_text, consts) {
                    Some(resolved) => self.follow_include(&resolved, base_dir, cmd)?,
                    None => self.warnings.push(Warning::at(
                        WarningCode::UnresolvedInclude,
                        format!(
                            "include({}) is not statically resolvable",
                            first.raw_text
                        ),
                        first.span.clone(),
                    )),
                }
            }
            "add_subdirectory" => {
                let Some(first) = cmd.args.first() else {
                    return Ok(());
                };
                match substitute(&first.raw_text, consts) {
                    Some(resolved) => {
                        let dir = paths::resolve(&self.root_abs, base_dir, &resolved);
                        if dir.starts_with('/') {
                            self.warnings.push(Warning::at(
                                WarningCode::UnresolvedInclude,
                                format!("add_subdirectory({dir}) is outside the project root"),
                                first.span.clone(),
                            ));
                        } else {
                            let listfile = if dir.is_empty() {
                                "CMakeLists.txt".to_string()
                            } else {
                                format!("{dir}/CMakeLists.txt")
                            };
                            self.visit(&listfile, false)?;
                        }
                    }
                    None => self.warnings.push(Warning::at(
                        WarningCode::UnresolvedInclude,
                        format!(
                            "add_subdirectory({}) is not statically resolvable",
                            first.raw_text
                        ),
                        first.span.clone(),
                    )),
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn follow_include(
        &mut self,
        resolved: &str,
        base_dir: &str,
        cmd: &CommandInvocation,
    ) -> Result<(), LoadError> {
        let optional = cmd
            .args
            .iter()
            .any(|a| a.raw_text.eq_ignore_ascii_case("OPTIONAL"));
        // Bare module names (no slash, no extension) live on the module
        // path, which this analysis does not model.
        if !resolved.contains('/') && !resolved.ends_with(".cmake") && !resolved.contains('.') {
            self.warnings.push(Warning::at(
                WarningCode::UnresolvedInclude,
                format!("include({resolved}) refers to a module outside the project"),
                cmd.span.clone(),
            ));
            return Ok(());
        }
        let rel = paths::resolve(&self.root_abs, base_dir, resolved);
        if rel.starts_with('/') || rel.starts_with("..") {
            self.warnings.push(Warning::at(
                WarningCode::UnresolvedInclude,
                format!("include({rel}) is outside the project root"),
                cmd.span.clone(),
            ));
            return Ok(());
        }
        let disk = PathBuf::from(format!("{}/{rel}", self.root_abs));
        if !disk.is_file() {
            if !optional {
                self.warnings.push(Warning::at(
                    WarningCode::MissingInclude,
                    format!("include({rel}): file not found"),
                    cmd.span.clone(),
                ));
            }
            return Ok(());
        }
        self.visit(&rel, false)
    }
}

/// Built-in directory variables usable during static include resolution.
fn builtin_consts(root_abs: &str, base_dir: &str) -> BTreeMap<String, String> {
    let current = if base_dir.is_empty() {
        root_abs.to_string()
    } else {
        format!("{root_abs}/{base_dir}")
    };
    let mut consts = BTreeMap::new();
    consts.insert("CMAKE_SOURCE_DIR".to_string(), root_abs.to_string());
    consts.insert("PROJECT_SOURCE_DIR".to_string(), root_abs.to_string());
    consts.insert("CMAKE_CURRENT_SOURCE_DIR".to_string(), current.clone());
    consts.insert("CMAKE_CURRENT_LIST_DIR".to_string(), current);
    consts
}

/// Substitute `${VAR}` references from `consts`; `None` when any reference
/// stays unresolved.
fn substitute(text: &str, consts: &BTreeMap<String, String>) -> Option<String> {
    let mut out = text.to_string();
    for _ in 0..8 {
        if !out.contains("${") {
            return Some(out);
        }
        let start = out.rfind("${")?;
        let end = out[start..].find('}')? + start;
        let name = &out[start + 2..end];
        let value = consts.get(name)?;
        out = format!("{}{}{}", &out[..start], value, &out[end + 1..]);
    }
    None
}
