//! Interpretation of the supported command subset. Everything else warns
//! and is skipped.

use crate::ast::{Argument, ArgumentKind, CommandInvocation};
use crate::cond::{Condition, ConfigOption, OptionOrigin};
use crate::paths;
use crate::warn::{Warning, WarningCode};

use super::trace::{DeliverableKind, LibraryKind, TraceEvent};
use super::{Evaluator, FileFrame};

impl Evaluator<'_> {
    pub(crate) fn eval_command(
        &mut self,
        cmd: &CommandInvocation,
        frame: &FileFrame,
        pc: &Condition,
    ) {
        match cmd.name.as_str() {
            "set" => self.cmd_set(cmd, pc),
            "unset" => self.cmd_unset(cmd, pc),
            "option" => self.cmd_option(cmd, pc),
            "list" => self.cmd_list(cmd, pc),
            "include" => self.cmd_include(cmd, frame, pc),
            "add_subdirectory" => self.cmd_add_subdirectory(cmd, frame, pc),
            "add_executable" => self.cmd_add_target(cmd, frame, pc, true),
            "add_library" => self.cmd_add_target(cmd, frame, pc, false),
            "target_sources" => self.cmd_target_sources(cmd, frame, pc),
            "target_link_libraries" => self.cmd_target_link_libraries(cmd, pc),
            "project" => self.cmd_project(cmd, frame, pc),
            "cmake_minimum_required" => {}
            name => {
                if let Some(def) = self.env.find_routine(name) {
                    self.call_routine(&def, &cmd.args, frame, pc, &cmd.span);
                } else {
                    self.warn(Warning::at(
                        WarningCode::UnsupportedCommand,
                        format!("{name}() is not interpreted"),
                        cmd.span.clone(),
                    ));
                }
            }
        }
    }

    /// Expand an argument expected to name one thing (a variable, target, or
    /// option). Multi-valued or branch-dependent names are reported.
    fn single_name(&mut self, arg: &Argument, pc: &Condition, what: &str) -> Option<String> {
        let branches = self.expand(arg, pc);
        let mut names: Vec<&String> = branches
            .iter()
            .flat_map(|(_, items)| items.iter())
            .collect();
        names.dedup();
        match names.as_slice() {
            [one] => Some((*one).clone()),
            _ => {
                self.warn(Warning::at(
                    WarningCode::InvalidArguments,
                    format!("{what} `{}` does not name exactly one thing", arg.raw_text),
                    arg.span.clone(),
                ));
                None
            }
        }
    }

    fn cmd_set(&mut self, cmd: &CommandInvocation, pc: &Condition) {
        let Some((name_arg, rest)) = cmd.args.split_first() else {
            self.warn(Warning::at(
                WarningCode::InvalidArguments,
                "set() requires a variable name".to_string(),
                cmd.span.clone(),
            ));
            return;
        };
        let mut value_args: Vec<Argument> = Vec::new();
        let mut parent_scope = false;
        let mut cache_type: Option<String> = None;
        let mut iter = rest.iter().peekable();
        while let Some(arg) = iter.next() {
            if arg.kind == ArgumentKind::Unquoted {
                match arg.raw_text.as_str() {
                    "PARENT_SCOPE" if iter.peek().is_none() => {
                        parent_scope = true;
                        continue;
                    }
                    "CACHE" => {
                        cache_type = iter.next().map(|a| a.raw_text.clone());
                        // Remaining arguments are docstring and FORCE.
                        break;
                    }
                    _ => {}
                }
            }
            value_args.push(arg.clone());
        }

        let Some(name) = self.single_name(name_arg, pc, "set() variable") else {
            return;
        };

        if let Some(cache_type) = cache_type {
            // Cache entries are build-time configurable; register an option
            // instead of binding a normal variable.
            let branches = self.expand_args_joined(&value_args, pc);
            let default = match branches.as_slice() {
                [(_, items)] => Some(items.join(";")),
                _ => None,
            };
            let option = if cache_type.eq_ignore_ascii_case("BOOL") {
                ConfigOption::boolean(
                    &name,
                    Some(if default.as_deref().map(crate::cond::cmake_truthy) == Some(true) {
                        "ON"
                    } else {
                        "OFF"
                    }),
                    OptionOrigin::CacheOverride,
                )
            } else {
                ConfigOption::opaque(&name, default.as_deref(), OptionOrigin::CacheOverride)
            };
            self.env.register_option(option);
            return;
        }

        let branches = self.expand_args_joined(&value_args, pc);
        if parent_scope {
            if !self.env.set_var_parent(&name, pc, branches) {
                self.warn(Warning::at(
                    WarningCode::InvalidArguments,
                    format!("set({name} ... PARENT_SCOPE) at directory root"),
                    cmd.span.clone(),
                ));
            }
        } else {
            self.env.set_var(&name, pc, branches);
        }
    }

    fn cmd_unset(&mut self, cmd: &CommandInvocation, pc: &Condition) {
        let Some(name_arg) = cmd.args.first() else {
            return;
        };
        let Some(name) = self.single_name(name_arg, pc, "unset() variable") else {
            return;
        };
        let parent = cmd
            .args
            .iter()
            .any(|a| a.raw_text == "PARENT_SCOPE" && a.kind == ArgumentKind::Unquoted);
        let branches = vec![(pc.clone(), Vec::new())];
        if parent {
            self.env.set_var_parent(&name, pc, branches);
        } else {
            self.env.set_var(&name, pc, branches);
        }
    }

    fn cmd_option(&mut self, cmd: &CommandInvocation, pc: &Condition) {
        let Some(name_arg) = cmd.args.first() else {
            self.warn(Warning::at(
                WarningCode::InvalidArguments,
                "option() requires a name".to_string(),
                cmd.span.clone(),
            ));
            return;
        };
        let Some(name) = self.single_name(name_arg, pc, "option() name") else {
            return;
        };
        let default = match cmd.args.get(2) {
            Some(arg) => {
                let branches = self.expand(arg, pc);
                let truthy = matches!(
                    branches.as_slice(),
                    [(_, items)] if crate::cond::cmake_truthy(&items.join(";"))
                );
                if truthy {
                    "ON"
                } else {
                    "OFF"
                }
            }
            None => "OFF",
        };
        self.env.register_option(ConfigOption::boolean(
            &name,
            Some(default),
            OptionOrigin::OptionCommand,
        ));
    }

    fn cmd_list(&mut self, cmd: &CommandInvocation, pc: &Condition) {
        let sub = cmd.args.first().map(|a| a.raw_text.as_str()).unwrap_or("");
        match sub {
            "APPEND" | "REMOVE_ITEM" => {}
            other => {
                self.warn(Warning::at(
                    WarningCode::UnsupportedConstruct,
                    format!("list({other}) is not interpreted"),
                    cmd.span.clone(),
                ));
                return;
            }
        }
        let Some(name_arg) = cmd.args.get(1) else {
            return;
        };
        let Some(name) = self.single_name(name_arg, pc, "list() variable") else {
            return;
        };
        let item_branches = self.expand_args_joined(&cmd.args[2..], pc);
        let old = match self.env.get_var(&name) {
            Some(var) => var.alternatives.clone(),
            None => vec![(Condition::True, Vec::new())],
        };
        let mut branches = Vec::new();
        for (g_old, values) in &old {
            for (g_items, items) in &item_branches {
                let guard = g_old.clone().and(g_items.clone());
                if guard.is_false() {
                    continue;
                }
                let new_values = if sub == "APPEND" {
                    let mut v = values.clone();
                    v.extend(items.iter().cloned());
                    v
                } else {
                    values
                        .iter()
                        .filter(|v| !items.contains(v))
                        .cloned()
                        .collect()
                };
                branches.push((guard, new_values));
            }
        }
        self.env.set_var(&name, pc, branches);
    }

    fn cmd_include(&mut self, cmd: &CommandInvocation, frame: &FileFrame, pc: &Condition) {
        let Some(first) = cmd.args.first() else {
            return;
        };
        let optional = cmd
            .args
            .iter()
            .any(|a| a.raw_text.eq_ignore_ascii_case("OPTIONAL"));
        for (guard, items) in self.expand(first, pc) {
            let [target] = items.as_slice() else {
                continue;
            };
            // Bare names are modules on CMAKE_MODULE_PATH, outside this
            // analysis.
            if !target.contains('/') && !target.contains('.') {
                if !optional {
                    self.warn(Warning::at(
                        WarningCode::UnresolvedInclude,
                        format!("include({target}) refers to a module outside the project"),
                        cmd.span.clone(),
                    ));
                }
                continue;
            }
            let rel = paths::resolve(&self.project.root_abs, &frame.list_dir, target);
            if self.project.files.contains_key(&rel) {
                let child = FileFrame {
                    dir_scope: frame.dir_scope.clone(),
                    list_dir: paths::parent_dir(&rel),
                };
                self.eval_listfile(&rel, child, &guard, &cmd.span, false);
            } else if !optional {
                self.warn(Warning::at(
                    WarningCode::UnresolvedInclude,
                    format!("include({rel}): file was not loaded"),
                    cmd.span.clone(),
                ));
            }
        }
    }

    fn cmd_add_subdirectory(&mut self, cmd: &CommandInvocation, frame: &FileFrame, pc: &Condition) {
        let Some(first) = cmd.args.first() else {
            return;
        };
        for (guard, items) in self.expand(first, pc) {
            let [dir] = items.as_slice() else {
                continue;
            };
            let dir_rel = paths::resolve(&self.project.root_abs, &frame.dir_scope, dir);
            if dir_rel.starts_with('/') || dir_rel.starts_with("..") {
                self.warn(Warning::at(
                    WarningCode::UnresolvedInclude,
                    format!("add_subdirectory({dir_rel}) is outside the project root"),
                    cmd.span.clone(),
                ));
                continue;
            }
            let listfile = if dir_rel.is_empty() {
                "CMakeLists.txt".to_string()
            } else {
                format!("{dir_rel}/CMakeLists.txt")
            };
            if self.project.files.contains_key(&listfile) {
                let child = FileFrame {
                    dir_scope: dir_rel.clone(),
                    list_dir: dir_rel.clone(),
                };
                self.eval_listfile(&listfile, child, &guard, &cmd.span, true);
            } else {
                self.warn(Warning::at(
                    WarningCode::UnresolvedInclude,
                    format!("add_subdirectory({dir_rel}): listfile was not loaded"),
                    cmd.span.clone(),
                ));
            }
        }
    }

    fn cmd_project(&mut self, cmd: &CommandInvocation, frame: &FileFrame, pc: &Condition) {
        let Some(name_arg) = cmd.args.first() else {
            return;
        };
        let Some(name) = self.single_name(name_arg, pc, "project() name") else {
            return;
        };
        let dir = self.abs_dir(&frame.dir_scope);
        self.set_constant("PROJECT_NAME", name.clone());
        self.set_constant("PROJECT_SOURCE_DIR", dir.clone());
        self.set_constant(&format!("{name}_SOURCE_DIR"), dir);
    }

    fn cmd_add_target(
        &mut self,
        cmd: &CommandInvocation,
        frame: &FileFrame,
        pc: &Condition,
        executable: bool,
    ) {
        let Some((name_arg, rest)) = cmd.args.split_first() else {
            self.warn(Warning::at(
                WarningCode::InvalidArguments,
                format!("{}() requires a target name", cmd.name),
                cmd.span.clone(),
            ));
            return;
        };
        let Some(name) = self.single_name(name_arg, pc, "target name") else {
            return;
        };

        // Alias targets resolve to their real target in the graph.
        if rest.first().map(|a| a.raw_text.as_str()) == Some("ALIAS") {
            if let Some(real) = rest.get(1) {
                if self.guard_satisfiable(pc) {
                    self.trace.push(TraceEvent::DeclareAlias {
                        alias: name,
                        target: real.raw_text.clone(),
                        guard: pc.clone(),
                        span: cmd.span.clone(),
                    });
                }
            }
            return;
        }
        // Imported targets are prebuilt externals, not deliverables.
        if rest
            .iter()
            .take(3)
            .any(|a| a.kind == ArgumentKind::Unquoted && a.raw_text == "IMPORTED")
        {
            return;
        }

        let mut kind = if executable {
            DeliverableKind::Executable
        } else {
            DeliverableKind::Library(LibraryKind::Static)
        };
        let mut source_args: Vec<&Argument> = Vec::new();
        for (i, arg) in rest.iter().enumerate() {
            if arg.kind == ArgumentKind::Unquoted {
                match arg.raw_text.as_str() {
                    "WIN32" | "MACOSX_BUNDLE" | "EXCLUDE_FROM_ALL" if i <= 2 => continue,
                    "STATIC" if !executable && i == 0 => {
                        kind = DeliverableKind::Library(LibraryKind::Static);
                        continue;
                    }
                    "SHARED" if !executable && i == 0 => {
                        kind = DeliverableKind::Library(LibraryKind::Shared);
                        continue;
                    }
                    "MODULE" if !executable && i == 0 => {
                        kind = DeliverableKind::Library(LibraryKind::Module);
                        continue;
                    }
                    "OBJECT" if !executable && i == 0 => {
                        kind = DeliverableKind::Library(LibraryKind::Static);
                        continue;
                    }
                    "INTERFACE" if !executable && i == 0 => {
                        kind = DeliverableKind::Library(LibraryKind::Interface);
                        continue;
                    }
                    _ => {}
                }
            }
            source_args.push(arg);
        }

        if !self.guard_satisfiable(pc) {
            return;
        }
        self.trace.push(TraceEvent::DeclareDeliverable {
            name: name.clone(),
            kind,
            guard: pc.clone(),
            span: cmd.span.clone(),
        });
        let source_args: Vec<Argument> = source_args.into_iter().cloned().collect();
        self.attach_source_args(&name, &source_args, frame, pc, cmd);
    }

    fn attach_source_args(
        &mut self,
        target: &str,
        source_args: &[Argument],
        frame: &FileFrame,
        pc: &Condition,
        cmd: &CommandInvocation,
    ) {
        for arg in source_args {
            for (guard, items) in self.expand(arg, pc) {
                if items.is_empty() || !self.guard_satisfiable(&guard) {
                    continue;
                }
                let sources: Vec<String> = items
                    .iter()
                    .map(|item| {
                        if item.contains("$<") {
                            item.clone()
                        } else {
                            self.normalize_source(frame, item)
                        }
                    })
                    .collect();
                self.trace.push(TraceEvent::AttachSources {
                    target: target.to_string(),
                    sources,
                    guard,
                    span: cmd.span.clone(),
                });
            }
        }
    }

    fn cmd_target_sources(&mut self, cmd: &CommandInvocation, frame: &FileFrame, pc: &Condition) {
        let Some((target_arg, rest)) = cmd.args.split_first() else {
            return;
        };
        let Some(target) = self.single_name(target_arg, pc, "target_sources() target") else {
            return;
        };
        let mut source_args = Vec::new();
        let mut skip_next = false;
        let mut collecting = true;
        for arg in rest {
            if skip_next {
                skip_next = false;
                continue;
            }
            if arg.kind == ArgumentKind::Unquoted {
                match arg.raw_text.as_str() {
                    "PRIVATE" | "PUBLIC" | "INTERFACE" => {
                        collecting = true;
                        continue;
                    }
                    "FILE_SET" | "TYPE" => {
                        skip_next = true;
                        collecting = false;
                        continue;
                    }
                    "BASE_DIRS" => {
                        collecting = false;
                        continue;
                    }
                    "FILES" => {
                        collecting = true;
                        continue;
                    }
                    _ => {}
                }
            }
            if collecting {
                source_args.push(arg.clone());
            }
        }
        self.attach_source_args(&target, &source_args, frame, pc, cmd);
    }

    fn cmd_target_link_libraries(&mut self, cmd: &CommandInvocation, pc: &Condition) {
        let Some((target_arg, rest)) = cmd.args.split_first() else {
            return;
        };
        let Some(target) = self.single_name(target_arg, pc, "target_link_libraries() target")
        else {
            return;
        };
        const KEYWORDS: &[&str] = &[
            "PRIVATE",
            "PUBLIC",
            "INTERFACE",
            "LINK_PRIVATE",
            "LINK_PUBLIC",
            "LINK_INTERFACE_LIBRARIES",
            "debug",
            "optimized",
            "general",
        ];
        for arg in rest {
            if arg.kind == ArgumentKind::Unquoted && KEYWORDS.contains(&arg.raw_text.as_str()) {
                continue;
            }
            for (guard, items) in self.expand(arg, pc) {
                if !self.guard_satisfiable(&guard) {
                    continue;
                }
                for item in items {
                    self.trace.push(TraceEvent::LinkDependency {
                        from: target.clone(),
                        to: item,
                        guard: guard.clone(),
                        span: cmd.span.clone(),
                    });
                }
            }
        }
    }
}
