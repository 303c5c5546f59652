//! Unified diff ingestion. Hunk bodies are never interpreted — impact is
//! assessed at file granularity — so parsing extracts file sections only.

use thiserror::Error;

use crate::exposure::ChangeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileStatus {
    Modified,
    Added,
    Deleted,
    Renamed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileEntry {
    pub old_path: Option<String>,
    pub new_path: Option<String>,
    pub status: FileStatus,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiffDocument {
    pub entries: Vec<FileEntry>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("malformed diff at line {line}: {message}")]
pub struct MalformedDiff {
    pub line: usize,
    pub message: String,
}

/// Strip the conventional `a/` / `b/` prefix and any trailing tab-separated
/// timestamp.
fn clean_path(raw: &str, prefix: char) -> Option<String> {
    let raw = raw.split('\t').next().unwrap_or(raw).trim();
    if raw == "/dev/null" {
        return None;
    }
    let unprefixed = raw
        .strip_prefix(&format!("{prefix}/"))
        .unwrap_or(raw);
    Some(unprefixed.to_string())
}

/// Parse a unified diff (with or without version-control extended headers)
/// into file entries.
pub fn parse_unified_diff(text: &str) -> Result<DiffDocument, MalformedDiff> {
    if text.trim().is_empty() {
        return Err(MalformedDiff {
            line: 1,
            message: "empty diff".to_string(),
        });
    }

    struct Pending {
        old_path: Option<String>,
        new_path: Option<String>,
        status: Option<FileStatus>,
        saw_minus: bool,
    }
    impl Pending {
        fn finish(self) -> FileEntry {
            let status = self.status.unwrap_or(match (&self.old_path, &self.new_path) {
                (None, Some(_)) => FileStatus::Added,
                (Some(_), None) => FileStatus::Deleted,
                _ => FileStatus::Modified,
            });
            FileEntry {
                old_path: self.old_path,
                new_path: self.new_path,
                status,
            }
        }
    }

    let mut entries = Vec::new();
    let mut pending: Option<Pending> = None;

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if let Some(rest) = line.strip_prefix("diff --git ") {
            if let Some(p) = pending.take() {
                entries.push(p.finish());
            }
            // `a/<path> b/<path>`; paths with spaces split at ` b/`.
            let (old_raw, new_raw) = match rest.find(" b/") {
                Some(pos) => (&rest[..pos], &rest[pos + 1..]),
                None => {
                    let mut parts = rest.splitn(2, ' ');
                    (
                        parts.next().unwrap_or_default(),
                        parts.next().unwrap_or_default(),
                    )
                }
            };
            pending = Some(Pending {
                old_path: clean_path(old_raw, 'a'),
                new_path: clean_path(new_raw, 'b'),
                status: None,
                saw_minus: false,
            });
            continue;
        }
        if let Some(rest) = line.strip_prefix("rename from ") {
            if let Some(p) = pending.as_mut() {
                p.status = Some(FileStatus::Renamed);
                p.old_path = Some(rest.trim().to_string());
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("rename to ") {
            if let Some(p) = pending.as_mut() {
                p.status = Some(FileStatus::Renamed);
                p.new_path = Some(rest.trim().to_string());
            }
            continue;
        }
        if line.starts_with("new file mode") {
            if let Some(p) = pending.as_mut() {
                p.status = Some(FileStatus::Added);
                p.old_path = None;
            }
            continue;
        }
        if line.starts_with("deleted file mode") {
            if let Some(p) = pending.as_mut() {
                p.status = Some(FileStatus::Deleted);
                p.new_path = None;
            }
            continue;
        }
        if line.starts_with("Binary files ") || line.starts_with("GIT binary patch") {
            // Binary changes count as modifications at file granularity.
            continue;
        }
        if let Some(rest) = line.strip_prefix("--- ") {
            match pending.as_mut() {
                Some(p) if !p.saw_minus && p.status != Some(FileStatus::Renamed) => {
                    p.old_path = clean_path(rest, 'a');
                    p.saw_minus = true;
                }
                Some(_) => {}
                None => {
                    pending = Some(Pending {
                        old_path: clean_path(rest, 'a'),
                        new_path: None,
                        status: None,
                        saw_minus: true,
                    });
                }
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("+++ ") {
            match pending.as_mut() {
                Some(p) => {
                    if p.status != Some(FileStatus::Renamed) {
                        p.new_path = clean_path(rest, 'b');
                    }
                }
                None => {
                    return Err(MalformedDiff {
                        line: lineno,
                        message: "'+++' header without preceding '---' or file header"
                            .to_string(),
                    })
                }
            }
            continue;
        }
        // Hunk headers and content lines are not interpreted.
    }
    if let Some(p) = pending.take() {
        entries.push(p.finish());
    }
    if entries.is_empty() {
        return Err(MalformedDiff {
            line: 1,
            message: "no file sections found".to_string(),
        });
    }
    Ok(DiffDocument { entries })
}

/// Remove `count` leading path components.
fn strip_components(path: &str, count: usize) -> String {
    let mut rest = path;
    for _ in 0..count {
        match rest.split_once('/') {
            Some((_, tail)) => rest = tail,
            None => break,
        }
    }
    rest.to_string()
}

/// Turn a diff into a change set: new path for added/modified entries, old
/// path for deletions, and both paths for renames (a rename can detach one
/// deliverable and attach another).
pub fn to_changeset(doc: &DiffDocument, id: &str, strip: usize) -> ChangeSet {
    let mut files = Vec::new();
    for entry in &doc.entries {
        match entry.status {
            FileStatus::Added | FileStatus::Modified => {
                files.extend(entry.new_path.clone());
            }
            FileStatus::Deleted => files.extend(entry.old_path.clone()),
            FileStatus::Renamed => {
                files.extend(entry.old_path.clone());
                files.extend(entry.new_path.clone());
            }
        }
    }
    ChangeSet::new(
        id,
        files.into_iter().map(|f| strip_components(&f, strip)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_diff_single_file() {
        let text = "\
--- a/src/a.c
+++ b/src/a.c
@@ -1,2 +1,2 @@
-old
+new
";
        let doc = parse_unified_diff(text).unwrap();
        assert_eq!(doc.entries.len(), 1);
        assert_eq!(doc.entries[0].status, FileStatus::Modified);
        assert_eq!(doc.entries[0].new_path.as_deref(), Some("src/a.c"));
        let cs = to_changeset(&doc, "p", 0);
        assert_eq!(cs.changed_files, vec!["src/a.c"]);
    }

    #[test]
    fn rename_carries_both_paths() {
        let text = "\
diff --git a/old.c b/new.c
similarity index 98%
rename from old.c
rename to new.c
";
        let doc = parse_unified_diff(text).unwrap();
        assert_eq!(doc.entries[0].status, FileStatus::Renamed);
        let cs = to_changeset(&doc, "p", 0);
        assert_eq!(cs.changed_files, vec!["new.c", "old.c"]);
    }

    #[test]
    fn empty_input_is_malformed() {
        assert!(parse_unified_diff("").is_err());
        assert!(parse_unified_diff("  \n\n").is_err());
    }

    #[test]
    fn added_and_deleted_files() {
        let text = "\
diff --git a/added.c b/added.c
new file mode 100644
--- /dev/null
+++ b/added.c
@@ -0,0 +1 @@
+hello
diff --git a/gone.c b/gone.c
deleted file mode 100644
--- a/gone.c
+++ /dev/null
@@ -1 +0,0 @@
-bye
";
        let doc = parse_unified_diff(text).unwrap();
        assert_eq!(doc.entries[0].status, FileStatus::Added);
        assert_eq!(doc.entries[1].status, FileStatus::Deleted);
        let cs = to_changeset(&doc, "p", 0);
        assert_eq!(cs.changed_files, vec!["added.c", "gone.c"]);
    }

    #[test]
    fn git_diff_multiple_files_with_binary() {
        let text = "\
diff --git a/src/main.c b/src/main.c
index 111..222 100644
--- a/src/main.c
+++ b/src/main.c
@@ -1 +1 @@
-x
+y
diff --git a/assets/logo.png b/assets/logo.png
Binary files a/assets/logo.png and b/assets/logo.png differ
";
        let doc = parse_unified_diff(text).unwrap();
        assert_eq!(doc.entries.len(), 2);
        assert_eq!(doc.entries[1].status, FileStatus::Modified);
        let cs = to_changeset(&doc, "p", 0);
        assert_eq!(cs.changed_files, vec!["assets/logo.png", "src/main.c"]);
    }

    #[test]
    fn plain_unified_with_timestamps() {
        let text = "\
--- lib/util.c\t2024-01-01 10:00:00.000000000 +0000
+++ lib/util.c\t2024-01-02 10:00:00.000000000 +0000
@@ -5 +5 @@
-a
+b
";
        let doc = parse_unified_diff(text).unwrap();
        assert_eq!(doc.entries[0].new_path.as_deref(), Some("lib/util.c"));
    }

    #[test]
    fn strip_setting_removes_prefix_components() {
        let text = "\
--- project-1.0/src/a.c
+++ project-1.0/src/a.c
@@ -1 +1 @@
-x
+y
";
        let doc = parse_unified_diff(text).unwrap();
        let cs = to_changeset(&doc, "p", 1);
        assert_eq!(cs.changed_files, vec!["src/a.c"]);
    }

    #[test]
    fn lone_plus_header_is_malformed() {
        let err = parse_unified_diff("+++ b/x.c\n").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn extraction_is_idempotent() {
        let text = "\
--- a/x.c
+++ b/x.c
@@ -1 +1 @@
-a
+b
";
        let doc = parse_unified_diff(text).unwrap();
        let once = to_changeset(&doc, "p", 0);
        let twice = to_changeset(&doc, "p", 0);
        assert_eq!(once, twice);
    }

    #[test]
    fn entry_bound_on_changed_files() {
        let text = "\
diff --git a/a.c b/b.c
rename from a.c
rename to b.c
diff --git a/c.c b/c.c
--- a/c.c
+++ b/c.c
";
        let doc = parse_unified_diff(text).unwrap();
        let cs = to_changeset(&doc, "p", 0);
        assert!(cs.changed_files.len() <= 2 * doc.entries.len());
    }
}
