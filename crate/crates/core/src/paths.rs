//! Lexical path normalization.
//!
//! The analysis keys every source file and listfile by its `/`-separated
//! path relative to the project root, with `.` and `..` collapsed. Changed
//! files in patches must normalize to the same strings, so everything funnels
//! through here.

/// Collapse `.` and `..` segments and normalize separators. Purely lexical;
/// never touches the filesystem. Leading `..` segments are preserved, as is
/// a leading `/`.
pub fn normalize(path: &str) -> String {
    let path = path.replace('\\', "/");
    let absolute = path.starts_with('/');
    let mut out: Vec<&str> = Vec::new();
    for seg in path.split('/') {
        match seg {
            "" | "." => {}
            ".." => match out.last() {
                Some(&s) if s != ".." => {
                    out.pop();
                }
                _ if absolute => {}
                _ => out.push(".."),
            },
            s => out.push(s),
        }
    }
    let joined = out.join("/");
    if absolute {
        format!("/{joined}")
    } else {
        joined
    }
}

/// Resolve `raw` against a project: absolute paths under `root_abs` become
/// root-relative, other absolute paths stay absolute, relative paths join
/// `base_rel_dir` (the directory of the declaring listfile, relative to the
/// root; empty string for the root itself).
pub fn resolve(root_abs: &str, base_rel_dir: &str, raw: &str) -> String {
    let raw = raw.replace('\\', "/");
    if raw.starts_with('/') {
        let abs = normalize(&raw);
        let root = normalize(root_abs);
        if abs == root {
            return String::new();
        }
        // Only strip at a path boundary: /proj must not claim /project/x.c.
        if let Some(rest) = abs.strip_prefix(&root) {
            if let Some(rest) = rest.strip_prefix('/') {
                return normalize(rest);
            }
        }
        return abs;
    }
    if base_rel_dir.is_empty() {
        normalize(&raw)
    } else {
        normalize(&format!("{base_rel_dir}/{raw}"))
    }
}

/// Directory part of a normalized relative path ("" for bare file names).
pub fn parent_dir(rel_path: &str) -> String {
    match rel_path.rfind('/') {
        Some(idx) => rel_path[..idx].to_string(),
        None => String::new(),
    }
}
