// SPDX-License-Identifier: Apache-2.0

//! Unified diff reading and writing.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::{
    count_lines, ChangeError, Changelist, FileChange, FileReader, Hunk, HunkLine, Operation,
};

const DEV_NULL: &str = "/dev/null";
const NO_NEWLINE: &str = "\\ No newline at end of file";

#[derive(Debug, Default)]
struct RawFile {
    old_path: Option<String>,
    new_path: Option<String>,
    git_paths: Option<(String, String)>,
    new_file: bool,
    deleted_file: bool,
    hunks: Vec<Hunk>,
    first_line: usize,
}

struct Parsed {
    id: Option<String>,
    author: String,
    description: String,
    files: Vec<RawFile>,
}

#[derive(Clone, Copy)]
enum Side {
    Base,
    Post,
}

/// Parses a unified diff whose pre-image is available through `base`.
pub fn parse_changelist(diff: &str, base: &dyn FileReader) -> Result<Changelist, ChangeError> {
    build(diff, base, Side::Base)
}

/// Parses a unified diff whose post-image is available through `post`; the
/// pre-image is reconstructed by reverse-applying the hunks.
pub fn parse_changelist_from_post(
    diff: &str,
    post: &dyn FileReader,
) -> Result<Changelist, ChangeError> {
    build(diff, post, Side::Post)
}

fn build(diff: &str, reader: &dyn FileReader, side: Side) -> Result<Changelist, ChangeError> {
    let parsed = parse(diff)?;
    if parsed.files.is_empty() {
        return Err(ChangeError::Empty);
    }
    let mut files = Vec::new();
    for raw in parsed.files {
        files.extend(resolve(raw, reader, side)?);
    }
    let id = parsed.id.unwrap_or_else(|| {
        let digest = Sha256::digest(diff.as_bytes());
        hex::encode(&digest[..6])
    });
    let cl = Changelist {
        id,
        description: parsed.description,
        author: parsed.author,
        files,
    };
    cl.validate()?;
    Ok(cl)
}

fn malformed(line: usize, message: impl Into<String>) -> ChangeError {
    ChangeError::Malformed {
        line,
        message: message.into(),
    }
}

fn parse(diff: &str) -> Result<Parsed, ChangeError> {
    let lines: Vec<&str> = diff.lines().collect();
    let mut out = Parsed {
        id: None,
        author: String::new(),
        description: String::new(),
        files: Vec::new(),
    };
    let mut cur: Option<RawFile> = None;
    let mut in_description = false;
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        let lineno = i + 1;
        let starts_file_pair =
            line.starts_with("--- ") && lines.get(i + 1).is_some_and(|n| n.starts_with("+++ "));
        if let Some(rest) = line.strip_prefix("diff --git ") {
            in_description = false;
            out.files.extend(cur.take());
            let mut f = RawFile {
                first_line: lineno,
                ..RawFile::default()
            };
            f.git_paths = split_git_paths(rest);
            cur = Some(f);
            i += 1;
            continue;
        }
        if starts_file_pair {
            in_description = false;
            let old = header_path(&line[4..]);
            let new = header_path(&lines[i + 1][4..]);
            // A ---/+++ pair opens a new file unless it completes a git header.
            let reuse = cur.as_ref().is_some_and(|f| {
                f.hunks.is_empty() && f.old_path.is_none() && f.new_path.is_none()
            });
            if !reuse {
                out.files.extend(cur.take());
                cur = Some(RawFile {
                    first_line: lineno,
                    ..RawFile::default()
                });
            }
            let f = cur.as_mut().unwrap();
            f.old_path = Some(old);
            f.new_path = Some(new);
            i += 2;
            continue;
        }
        if line.starts_with("@@") {
            let Some(f) = cur.as_mut() else {
                return Err(malformed(lineno, "hunk before any file header"));
            };
            let (hunk, consumed) = parse_hunk(&lines, i)?;
            f.hunks.push(hunk);
            i += consumed;
            continue;
        }
        match cur.as_mut() {
            Some(f) => {
                if line.starts_with("new file mode") {
                    f.new_file = true;
                } else if line.starts_with("deleted file mode") {
                    f.deleted_file = true;
                } else if line.starts_with("Binary files") || line.starts_with("GIT binary patch") {
                    return Err(malformed(lineno, "binary diffs are not supported"));
                }
                // rename/similarity/index/mode lines carry nothing we need:
                // paths come from the diff --git line or the ---/+++ pair.
            }
            None => {
                if let Some(v) = line.strip_prefix("Changelist-Id:") {
                    out.id = Some(v.trim().to_string());
                    in_description = false;
                } else if let Some(v) = line
                    .strip_prefix("Author:")
                    .or_else(|| line.strip_prefix("From:"))
                {
                    out.author = v.trim().to_string();
                    in_description = false;
                } else if let Some(v) = line
                    .strip_prefix("Description:")
                    .or_else(|| line.strip_prefix("Subject:"))
                {
                    out.description = v.trim().to_string();
                    in_description = true;
                } else if in_description && line.starts_with(' ') {
                    out.description.push('\n');
                    out.description.push_str(&line[1..]);
                } else {
                    in_description = false;
                }
            }
        }
        i += 1;
    }
    out.files.extend(cur.take());
    Ok(out)
}

fn split_git_paths(rest: &str) -> Option<(String, String)> {
    let idx = rest.find(" b/")?;
    let a = rest[..idx].strip_prefix("a/")?;
    let b = &rest[idx + 3..];
    Some((a.to_string(), b.to_string()))
}

fn header_path(raw: &str) -> String {
    // Drop a trailing "\t<timestamp>" as written by GNU diff.
    raw.split('\t').next().unwrap_or("").trim_end().to_string()
}

fn parse_range(s: &str, lineno: usize) -> Result<(usize, usize), ChangeError> {
    let (start, len) = match s.split_once(',') {
        Some((a, b)) => (a, Some(b)),
        None => (s, None),
    };
    let start = start
        .parse::<usize>()
        .map_err(|_| malformed(lineno, format!("bad hunk range {s:?}")))?;
    let len = match len {
        Some(l) => l
            .parse::<usize>()
            .map_err(|_| malformed(lineno, format!("bad hunk range {s:?}")))?,
        None => 1,
    };
    Ok((start, len))
}

fn parse_hunk(lines: &[&str], at: usize) -> Result<(Hunk, usize), ChangeError> {
    let lineno = at + 1;
    let header = lines[at];
    let body = header
        .strip_prefix("@@ ")
        .and_then(|r| r.split_once(" @@"))
        .map(|(ranges, _)| ranges)
        .ok_or_else(|| malformed(lineno, "malformed hunk header"))?;
    let mut parts = body.split_whitespace();
    let old = parts
        .next()
        .and_then(|p| p.strip_prefix('-'))
        .ok_or_else(|| malformed(lineno, "malformed hunk header"))?;
    let new = parts
        .next()
        .and_then(|p| p.strip_prefix('+'))
        .ok_or_else(|| malformed(lineno, "malformed hunk header"))?;
    if parts.next().is_some() {
        return Err(malformed(lineno, "malformed hunk header"));
    }
    let (old_start, old_len) = parse_range(old, lineno)?;
    let (new_start, new_len) = parse_range(new, lineno)?;
    let mut hunk = Hunk {
        old_start,
        old_len,
        new_start,
        new_len,
        lines: Vec::new(),
        old_no_newline: false,
        new_no_newline: false,
    };
    let (mut seen_old, mut seen_new) = (0, 0);
    let mut i = at + 1;
    while seen_old < old_len || seen_new < new_len {
        let Some(&line) = lines.get(i) else {
            return Err(malformed(i, "hunk ends early"));
        };
        let (tag, text) = match line.chars().next() {
            Some(c) => (c, &line[c.len_utf8()..]),
            None => (' ', ""),
        };
        match tag {
            ' ' => {
                hunk.lines.push(HunkLine::Context(text.to_string()));
                seen_old += 1;
                seen_new += 1;
            }
            '+' => {
                hunk.lines.push(HunkLine::Added(text.to_string()));
                seen_new += 1;
            }
            '-' => {
                hunk.lines.push(HunkLine::Removed(text.to_string()));
                seen_old += 1;
            }
            '\\' => mark_no_newline(&mut hunk),
            _ => {
                return Err(malformed(
                    i + 1,
                    format!("unexpected line in hunk: {line:?}"),
                ))
            }
        }
        if seen_old > old_len || seen_new > new_len {
            return Err(malformed(i + 1, "hunk longer than its header says"));
        }
        i += 1;
    }
    while lines.get(i).is_some_and(|l| l.starts_with('\\')) {
        mark_no_newline(&mut hunk);
        i += 1;
    }
    Ok((hunk, i - at))
}

fn mark_no_newline(hunk: &mut Hunk) {
    match hunk.lines.last() {
        Some(HunkLine::Context(_)) => {
            hunk.old_no_newline = true;
            hunk.new_no_newline = true;
        }
        Some(HunkLine::Removed(_)) => hunk.old_no_newline = true,
        Some(HunkLine::Added(_)) => hunk.new_no_newline = true,
        None => {}
    }
}

fn strip_side_prefix(path: &str, prefix: &str) -> String {
    path.strip_prefix(prefix).unwrap_or(path).to_string()
}

fn check_path(path: &str, line: usize) -> Result<(), ChangeError> {
    if path.is_empty() || path.starts_with('/') || path.split('/').any(|c| c == "..") {
        return Err(malformed(line, format!("unsafe or empty path {path:?}")));
    }
    Ok(())
}

/// Works out repo-relative old/new paths for one file section.
fn paths(raw: &RawFile) -> (Option<String>, Option<String>) {
    let old = raw.old_path.as_deref();
    let new = raw.new_path.as_deref();
    match (old, new) {
        (None, None) => match &raw.git_paths {
            Some((_, b)) if raw.new_file => (None, Some(b.clone())),
            Some((a, _)) if raw.deleted_file => (Some(a.clone()), None),
            Some((a, b)) => (Some(a.clone()), Some(b.clone())),
            None => (None, None),
        },
        (Some(o), Some(n)) => {
            let old = (o != DEV_NULL).then_some(o);
            let new = (n != DEV_NULL).then_some(n);
            match (old, new) {
                (Some(o), Some(n)) => {
                    if raw.git_paths.is_some() || (o.starts_with("a/") && n.starts_with("b/")) {
                        (
                            Some(strip_side_prefix(o, "a/")),
                            Some(strip_side_prefix(n, "b/")),
                        )
                    } else {
                        // `diff -ru base post`: drop differing leading components.
                        let (oh, ot) = o.split_once('/').unwrap_or(("", o));
                        let (nh, nt) = n.split_once('/').unwrap_or(("", n));
                        if !oh.is_empty() && !nh.is_empty() && oh != nh && ot == nt {
                            (Some(ot.to_string()), Some(nt.to_string()))
                        } else {
                            (Some(o.to_string()), Some(n.to_string()))
                        }
                    }
                }
                (None, Some(n)) => (None, Some(strip_side_prefix(n, "b/"))),
                (Some(o), None) => (Some(strip_side_prefix(o, "a/")), None),
                (None, None) => (None, None),
            }
        }
        _ => (None, None),
    }
}

fn resolve(
    raw: RawFile,
    reader: &dyn FileReader,
    side: Side,
) -> Result<Vec<FileChange>, ChangeError> {
    let line = raw.first_line;
    let (old, new) = paths(&raw);
    if let Some(p) = &old {
        check_path(p, line)?;
    }
    if let Some(p) = &new {
        check_path(p, line)?;
    }
    let only_inserts =
        !raw.hunks.is_empty() && raw.hunks.iter().all(|h| h.old_start == 0 && h.old_len == 0);
    let only_removes =
        !raw.hunks.is_empty() && raw.hunks.iter().all(|h| h.new_start == 0 && h.new_len == 0);
    match (old, new) {
        (None, None) => Err(malformed(line, "file section without paths")),
        (None, Some(path)) => Ok(vec![added(path, &raw.hunks, line)?]),
        (Some(path), None) => Ok(vec![deleted(path, &raw.hunks, reader, side)?]),
        (Some(o), Some(n)) if o == n => {
            if raw.new_file
                || (only_inserts && matches!(side, Side::Base) && reader.read(&n).is_none())
            {
                return Ok(vec![added(n, &raw.hunks, line)?]);
            }
            if raw.deleted_file
                || (only_removes && matches!(side, Side::Post) && reader.read(&o).is_none())
            {
                return Ok(vec![deleted(o, &raw.hunks, reader, side)?]);
            }
            let (base, new_content) = contents(&o, &n, &raw.hunks, reader, side)?;
            Ok(vec![FileChange {
                path: n,
                operation: Operation::Modify,
                base_content: Some(base),
                new_content: Some(new_content),
                changed_lines: changed_lines(&raw.hunks),
                hunks: raw.hunks,
            }])
        }
        (Some(o), Some(n)) => {
            // Rename: a delete of the old path plus an add of the new one.
            let (base, new_content) = contents(&o, &n, &raw.hunks, reader, side)?;
            Ok(vec![
                FileChange {
                    path: o,
                    operation: Operation::Delete,
                    hunks: whole_file_hunk(&base, false),
                    base_content: Some(base),
                    new_content: None,
                    changed_lines: BTreeSet::new(),
                },
                FileChange {
                    path: n,
                    operation: Operation::Add,
                    base_content: None,
                    changed_lines: (1..=count_lines(&new_content)).collect(),
                    hunks: whole_file_hunk(&new_content, true),
                    new_content: Some(new_content),
                },
            ])
        }
    }
}

fn contents(
    old: &str,
    new: &str,
    hunks: &[Hunk],
    reader: &dyn FileReader,
    side: Side,
) -> Result<(String, String), ChangeError> {
    match side {
        Side::Base => {
            let base = reader
                .read(old)
                .ok_or_else(|| ChangeError::MissingBase(old.to_string()))?;
            let post = apply_hunks(&base, hunks).map_err(|line| ChangeError::ContextMismatch {
                path: old.to_string(),
                line,
            })?;
            Ok((base, post))
        }
        Side::Post => {
            let post = reader
                .read(new)
                .ok_or_else(|| ChangeError::MissingBase(new.to_string()))?;
            let base = apply_hunks(&post, &reverse_hunks(hunks)).map_err(|line| {
                ChangeError::ContextMismatch {
                    path: new.to_string(),
                    line,
                }
            })?;
            Ok((base, post))
        }
    }
}

fn added(path: String, hunks: &[Hunk], line: usize) -> Result<FileChange, ChangeError> {
    let content = apply_hunks("", hunks)
        .map_err(|_| malformed(line, format!("{path}: added file hunk has removed lines")))?;
    Ok(FileChange {
        changed_lines: (1..=count_lines(&content)).collect(),
        path,
        operation: Operation::Add,
        base_content: None,
        new_content: Some(content),
        hunks: hunks.to_vec(),
    })
}

fn deleted(
    path: String,
    hunks: &[Hunk],
    reader: &dyn FileReader,
    side: Side,
) -> Result<FileChange, ChangeError> {
    let from_hunks = apply_hunks("", &reverse_hunks(hunks)).ok();
    let base = match side {
        Side::Base => reader.read(&path).or(from_hunks),
        Side::Post => from_hunks,
    }
    .ok_or_else(|| ChangeError::MissingBase(path.clone()))?;
    Ok(FileChange {
        path,
        operation: Operation::Delete,
        base_content: Some(base),
        new_content: None,
        changed_lines: BTreeSet::new(),
        hunks: hunks.to_vec(),
    })
}

fn whole_file_hunk(content: &str, add: bool) -> Vec<Hunk> {
    let n = count_lines(content);
    if n == 0 {
        return Vec::new();
    }
    let lines = content
        .lines()
        .map(|l| {
            if add {
                HunkLine::Added(l.to_string())
            } else {
                HunkLine::Removed(l.to_string())
            }
        })
        .collect();
    let no_nl = !content.ends_with('\n');
    vec![Hunk {
        old_start: if add { 0 } else { 1 },
        old_len: if add { 0 } else { n },
        new_start: if add { 1 } else { 0 },
        new_len: if add { n } else { 0 },
        lines,
        old_no_newline: !add && no_nl,
        new_no_newline: add && no_nl,
    }]
}

fn changed_lines(hunks: &[Hunk]) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for h in hunks {
        let mut n = h.new_start;
        for l in &h.lines {
            match l {
                HunkLine::Context(_) => n += 1,
                HunkLine::Added(_) => {
                    out.insert(n);
                    n += 1;
                }
                HunkLine::Removed(_) => {}
            }
        }
    }
    out
}

/// Swaps the sides of every hunk.
pub fn reverse_hunks(hunks: &[Hunk]) -> Vec<Hunk> {
    hunks
        .iter()
        .map(|h| Hunk {
            old_start: h.new_start,
            old_len: h.new_len,
            new_start: h.old_start,
            new_len: h.old_len,
            lines: h
                .lines
                .iter()
                .map(|l| match l {
                    HunkLine::Context(t) => HunkLine::Context(t.clone()),
                    HunkLine::Added(t) => HunkLine::Removed(t.clone()),
                    HunkLine::Removed(t) => HunkLine::Added(t.clone()),
                })
                .collect(),
            old_no_newline: h.new_no_newline,
            new_no_newline: h.old_no_newline,
        })
        .collect()
}

/// Applies hunks to `base`. On mismatch returns the 1-based base line.
pub fn apply_hunks(base: &str, hunks: &[Hunk]) -> Result<String, usize> {
    let old: Vec<&str> = base.lines().collect();
    let mut out: Vec<&str> = Vec::new();
    let mut ends_newline = base.is_empty() || base.ends_with('\n');
    let mut i = 0;
    for h in hunks {
        let start = if h.old_len == 0 {
            h.old_start
        } else {
            h.old_start.saturating_sub(1)
        };
        if start < i || start > old.len() {
            return Err(start + 1);
        }
        out.extend_from_slice(&old[i..start]);
        i = start;
        for l in &h.lines {
            match l {
                HunkLine::Context(t) => {
                    if old.get(i) != Some(&t.as_str()) {
                        return Err(i + 1);
                    }
                    out.push(t);
                    i += 1;
                }
                HunkLine::Removed(t) => {
                    if old.get(i) != Some(&t.as_str()) {
                        return Err(i + 1);
                    }
                    i += 1;
                }
                HunkLine::Added(t) => out.push(t),
            }
        }
        if i == old.len() {
            ends_newline = !h.new_no_newline;
        }
    }
    out.extend_from_slice(&old[i..]);
    if out.is_empty() {
        return Ok(String::new());
    }
    let mut text = out.join("\n");
    if ends_newline {
        text.push('\n');
    }
    Ok(text)
}

pub(super) fn write_changelist(cl: &Changelist) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Changelist-Id: {}", cl.id);
    if !cl.author.is_empty() {
        let _ = writeln!(s, "Author: {}", cl.author);
    }
    if !cl.description.is_empty() {
        let mut lines = cl.description.split('\n');
        let _ = writeln!(s, "Description: {}", lines.next().unwrap_or(""));
        for l in lines {
            let _ = writeln!(s, " {l}");
        }
    }
    for f in &cl.files {
        let (old, new) = match f.operation {
            Operation::Add => (DEV_NULL.to_string(), format!("b/{}", f.path)),
            Operation::Delete => (format!("a/{}", f.path), DEV_NULL.to_string()),
            Operation::Modify => (format!("a/{}", f.path), format!("b/{}", f.path)),
        };
        let _ = writeln!(s, "diff --git a/{p} b/{p}", p = f.path);
        match f.operation {
            Operation::Add => s.push_str("new file mode 100644\n"),
            Operation::Delete => s.push_str("deleted file mode 100644\n"),
            Operation::Modify => {}
        }
        let _ = writeln!(s, "--- {old}");
        let _ = writeln!(s, "+++ {new}");
        for h in &f.hunks {
            write_hunk(&mut s, h);
        }
    }
    s
}

fn write_hunk(s: &mut String, h: &Hunk) {
    let _ = writeln!(
        s,
        "@@ -{},{} +{},{} @@",
        h.old_start, h.old_len, h.new_start, h.new_len
    );
    let last_old = h
        .lines
        .iter()
        .rposition(|l| matches!(l, HunkLine::Context(_) | HunkLine::Removed(_)));
    let last_new = h
        .lines
        .iter()
        .rposition(|l| matches!(l, HunkLine::Context(_) | HunkLine::Added(_)));
    for (idx, l) in h.lines.iter().enumerate() {
        match l {
            HunkLine::Context(t) => {
                let _ = writeln!(s, " {t}");
            }
            HunkLine::Added(t) => {
                let _ = writeln!(s, "+{t}");
            }
            HunkLine::Removed(t) => {
                let _ = writeln!(s, "-{t}");
            }
        }
        let old_mark = h.old_no_newline && Some(idx) == last_old;
        let new_mark = h.new_no_newline && Some(idx) == last_new;
        if old_mark || new_mark {
            s.push_str(NO_NEWLINE);
            s.push('\n');
        }
    }
}
