# SPDX-License-Identifier: Apache-2.0
"""Builds the changelist corpus from the sources in src/.

Each changelist directory holds the unified diff, the post-image files it
touches under post/, and a JSON-lines coverage file. Odd-numbered
changelists add the last function of an existing file; the rest add whole
files. Coverage marks about 85% of non-blank lines with a per-file target.
"""
import difflib
import json
import os
import random
import shutil

HERE = os.path.dirname(os.path.abspath(__file__))
SRC = os.path.join(HERE, "src")
OUT = os.path.join(HERE, "changelists")


def last_function(lines, path):
    starts = []
    for i, line in enumerate(lines):
        if path.endswith(".py"):
            if line.lstrip().startswith("def ") and not line.lstrip().startswith("def __init__"):
                starts.append(i)
        elif line.endswith("{") and not line.startswith(" ") and not line.startswith("namespace"):
            starts.append(i)
    start = starts[-1]
    end = start + 1
    while end < len(lines):
        line = lines[end]
        if path.endswith(".py"):
            indent = len(lines[start]) - len(lines[start].lstrip())
            if line.strip() and len(line) - len(line.lstrip()) <= indent:
                break
        elif line == "}":
            end += 1
            break
        end += 1
    while start > 0 and not lines[start - 1].strip():
        start -= 1
    return start, end


def diff_for(path, base, post):
    if base is None:
        header = ["--- /dev/null\n", "+++ b/%s\n" % path, "@@ -0,0 +1,%d @@\n" % len(post)]
        return "".join(header + ["+" + l for l in post])
    return "".join(difflib.unified_diff(base, post, "a/" + path, "b/" + path))


def coverage_for(path, post, rng):
    stem = os.path.splitext(os.path.basename(path))[0]
    ext = os.path.splitext(path)[1][1:]
    target = "//%s:%s_%s_test" % (os.path.dirname(path) or "root", stem, ext)
    out = []
    for i, line in enumerate(post, start=1):
        text = line.strip()
        if not text or text.startswith(("#", "//")):
            continue
        if rng.random() < 0.85:
            targets = [target]
            if rng.random() < 0.2:
                targets.append("//%s:integration_test" % (os.path.dirname(path) or "root"))
            out.append({"path": path, "line": i, "targets": targets})
    return out


def main():
    shutil.rmtree(OUT, ignore_errors=True)
    sources = sorted(os.listdir(SRC))
    plans = [[s] for s in sources]
    plans.append(["rate_limiter.cc", "rate_limiter.py"])
    for n, files in enumerate(plans, start=1):
        cl_id = "cl-%02d-%s" % (n, os.path.splitext(files[0])[0].replace("_", "-"))
        cl_dir = os.path.join(OUT, cl_id)
        rng = random.Random(n)
        diffs, coverage = [], []
        for name in files:
            package = "cpp" if name.endswith(".cc") else "py"
            path = "%s/%s" % (package, name)
            with open(os.path.join(SRC, name)) as f:
                post = f.read().splitlines(True)
            base = None
            if n % 2 == 1 and len(files) == 1:
                s, e = last_function([l.rstrip("\n") for l in post], name)
                base = post[:s] + post[e:]
            diffs.append(diff_for(path, base, post))
            os.makedirs(os.path.join(cl_dir, "post", package), exist_ok=True)
            with open(os.path.join(cl_dir, "post", path), "w") as f:
                f.write("".join(post))
            coverage.extend(coverage_for(path, post, rng))
        header = "Changelist-Id: %s\nAuthor: corpus@example.com\nDescription: %s\n" % (
            cl_id,
            "Update " + ", ".join(files),
        )
        with open(os.path.join(cl_dir, "change.diff"), "w") as f:
            f.write(header + "".join(diffs))
        with open(os.path.join(cl_dir, "coverage.jsonl"), "w") as f:
            for rec in coverage:
                f.write(json.dumps(rec) + "\n")


if __name__ == "__main__":
    main()
