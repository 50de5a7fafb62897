"""Mining override method/comment pairs from Java source trees.

The parser is structural, not grammatical: one pass blanks comments and
string/char literals so that a second pass can track balanced braces and
recognize class/interface declarations and their members by shape.  That
is enough to recover, for every class, its simple and qualified name,
the name of the class it extends, and each method with the javadoc block
immediately above it.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field

from . import text as text_mod

SCHEMA_VERSION = 1

_MODIFIERS = {
    "public", "protected", "private", "static", "final", "abstract",
    "synchronized", "native", "strictfp", "default", "transient", "volatile",
}

_DECL_RE = re.compile(r"\b(class|interface)\s+([A-Za-z_$][\w$]*)")
_PACKAGE_RE = re.compile(r"^\s*package\s+([\w.$]+)\s*;", re.MULTILINE)
_EXTENDS_RE = re.compile(r"\bextends\s+([\w$.]+)")


class SchemaError(ValueError):
    """A data file does not match the expected record layout."""


@dataclass
class MethodRecord:
    name: str
    param_types: list[str]
    body_text: str
    javadoc_text: str | None
    modifiers: list[str]

    @property
    def arity(self) -> int:
        return len(self.param_types)


@dataclass
class RawJavaClass:
    qualified_name: str
    simple_name: str
    extends_name: str | None
    methods: list[MethodRecord]
    source_path: str
    project_id: str

    @property
    def package(self) -> str:
        prefix = self.qualified_name.rsplit(".", 1)[0] if "." in self.qualified_name else ""
        return prefix


@dataclass
class OverridePair:
    sub_class: RawJavaClass
    sub_method: MethodRecord
    sup_class: RawJavaClass
    sup_method: MethodRecord


@dataclass
class OverrideExample:
    id: str
    project_id: str
    sub_class_name: str
    sup_class_name: str
    sub_method_raw: str
    sup_method_raw: str
    sub_comment_first: str
    sub_comment_full: str
    sup_comment_first: str
    sup_comment_full: str

    _FIELDS = (
        "id", "project_id", "sub_class_name", "sup_class_name",
        "sub_method_raw", "sup_method_raw", "sub_comment_first",
        "sub_comment_full", "sup_comment_first", "sup_comment_full",
    )

    def to_dict(self) -> dict:
        d = {name: getattr(self, name) for name in self._FIELDS}
        d["schema_version"] = SCHEMA_VERSION
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "OverrideExample":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise SchemaError("expected schema_version %d, got %r"
                              % (SCHEMA_VERSION, d.get("schema_version")))
        missing = [name for name in cls._FIELDS if name not in d]
        if missing:
            raise SchemaError("missing fields: %s" % ", ".join(missing))
        extra = [k for k in d if k != "schema_version" and k not in cls._FIELDS]
        if extra:
            raise SchemaError("unknown fields: %s" % ", ".join(sorted(extra)))
        return cls(**{name: d[name] for name in cls._FIELDS})


@dataclass
class DatasetSplit:
    train: list[OverrideExample]
    valid: list[OverrideExample]
    test: list[OverrideExample]
    project_assignment: dict[str, str] = field(default_factory=dict)


def _blank_non_code(src: str):
    """Replace comments and string/char literals with spaces.

    Returns (blanked, javadocs) where javadocs is a list of
    (start, end, cleaned_text) for block comments opened with "/**".
    Newlines inside blanked regions are preserved.
    """
    out = list(src)
    javadocs = []
    i, n = 0, len(src)

    def blank(a, b):
        for k in range(a, b):
            if out[k] != "\n":
                out[k] = " "

    while i < n:
        c = src[i]
        nxt = src[i + 1] if i + 1 < n else ""
        if c == "/" and nxt == "/":
            j = src.find("\n", i)
            j = n if j < 0 else j
            blank(i, j)
            i = j
        elif c == "/" and nxt == "*":
            close = src.find("*/", i + 2)
            end = n if close < 0 else close + 2
            if src.startswith("/**", i) and end - i > 4:
                body = src[i + 3:end - 2]
                javadocs.append((i, end, _strip_javadoc_gutter(body)))
            blank(i, end)
            i = end
        elif c == '"' or c == "'":
            quote = c
            j = i + 1
            while j < n:
                if src[j] == "\\":
                    j += 2
                    continue
                if src[j] == quote:
                    break
                j += 1
            end = min(j + 1, n)
            blank(i, end)
            i = end
        else:
            i += 1
    return "".join(out), javadocs


def _strip_javadoc_gutter(body: str) -> str:
    lines = []
    for line in body.split("\n"):
        stripped = line.lstrip()
        if stripped.startswith("*"):
            stripped = stripped[1:]
            if stripped.startswith(" "):
                stripped = stripped[1:]
        lines.append(stripped.rstrip())
    return "\n".join(lines).strip("\n")


def _match_braces(blanked: str):
    """Map each '{' index to its matching '}' index, or None if unbalanced."""
    stack = []
    match = {}
    for i, c in enumerate(blanked):
        if c == "{":
            stack.append(i)
        elif c == "}":
            if not stack:
                return None
            match[stack.pop()] = i
    if stack:
        return None
    return match


def _skip_generics(blanked: str, i: int) -> int:
    """Advance past a balanced <...> section starting at i, if present."""
    n = len(blanked)
    while i < n and blanked[i].isspace():
        i += 1
    if i >= n or blanked[i] != "<":
        return i
    depth = 0
    while i < n:
        if blanked[i] == "<":
            depth += 1
        elif blanked[i] == ">":
            depth -= 1
            if depth == 0:
                return i + 1
        i += 1
    return i


def _find_body_open(blanked: str, i: int) -> int:
    """First '{' at paren depth 0 from position i, or -1."""
    depth = 0
    for j in range(i, len(blanked)):
        c = blanked[j]
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
        elif c == "{" and depth == 0:
            return j
    return -1


def _split_params(param_text: str) -> list[str]:
    """Split a parameter list into normalized type strings."""
    params = []
    depth = 0
    cur = []
    for c in param_text:
        if c in "<([":
            depth += 1
        elif c in ">)]":
            depth -= 1
        if c == "," and depth == 0:
            params.append("".join(cur))
            cur = []
        else:
            cur.append(c)
    params.append("".join(cur))
    types = []
    for p in params:
        toks = re.findall(r"[\w$.<>\[\],]+|\.\.\.", p)
        toks = [t for t in toks if not t.startswith("@") and t != "final"]
        if len(toks) >= 2:
            types.append(" ".join(toks[:-1]))
        elif len(toks) == 1 and toks[0]:
            types.append(toks[0])
    return types


def _scan_members(blanked, src, body_start, body_end, brace_match, javadocs, class_name):
    """Extract MethodRecords from one class body span (exclusive of braces)."""
    methods = []
    seen = set()
    seg_start = i = body_start
    while i < body_end:
        c = blanked[i]
        if c == "{":
            record = _member_from_segment(
                blanked, src, seg_start, i, brace_match[i], True, javadocs, class_name)
            if record:
                methods.append(record)
            i = brace_match[i] + 1
            seg_start = i
            continue
        if c == ";":
            record = _member_from_segment(
                blanked, src, seg_start, i, i, False, javadocs, class_name)
            if record:
                methods.append(record)
            seg_start = i + 1
        i += 1
    unique = []
    for m in methods:
        key = (m.name, m.arity)
        if key in seen:
            continue
        seen.add(key)
        unique.append(m)
    return unique


def _member_from_segment(blanked, src, seg_start, header_end, member_end,
                         has_body, javadocs, class_name):
    header = blanked[seg_start:header_end]
    sig = _find_method_signature(header)
    if sig is None:
        return None
    name_off, name, paren_off = sig
    if name == class_name:
        return None
    sig_rel = len(header) - len(header.lstrip())
    sig_start = seg_start + sig_rel
    param_close = _matching_paren(header, paren_off)
    if param_close is None:
        return None
    param_types = _split_params(header[paren_off + 1:param_close])
    modifiers = [w for w in re.findall(r"[a-z]+", header[:name_off]) if w in _MODIFIERS]
    body_text = src[sig_start:member_end + 1]
    javadoc = _attached_javadoc(blanked, javadocs, sig_start)
    return MethodRecord(name, param_types, body_text, javadoc, modifiers)


def _find_method_signature(header: str):
    """Locate the method name and its '(' in a member header.

    Returns (name_offset, name, paren_offset) or None.  Skips annotation
    argument lists and rejects segments with a top-level '=' before the
    parenthesis (field initializers).
    """
    depth = 0
    i = 0
    n = len(header)
    while i < n:
        c = header[i]
        if c == "(":
            j = i - 1
            while j >= 0 and header[j].isspace():
                j -= 1
            k = j
            while k >= 0 and (header[k].isalnum() or header[k] in "_$"):
                k -= 1
            name = header[k + 1:j + 1]
            if not name:
                return None
            m = k
            while m >= 0 and header[m].isspace():
                m -= 1
            if m >= 0 and header[m] == "@":
                close = _matching_paren(header, i)
                if close is None:
                    return None
                i = close + 1
                continue
            if "=" in _depth0_chars(header[:k + 1]):
                return None
            return (k + 1, name, i)
        i += 1
    return None


def _depth0_chars(s: str) -> str:
    out = []
    depth = 0
    for c in s:
        if c in "(<[":
            depth += 1
        elif c in ")>]":
            depth -= 1
        elif depth == 0:
            out.append(c)
    return "".join(out)


def _matching_paren(s: str, i: int):
    depth = 0
    for j in range(i, len(s)):
        if s[j] == "(":
            depth += 1
        elif s[j] == ")":
            depth -= 1
            if depth == 0:
                return j
    return None


def _attached_javadoc(blanked, javadocs, sig_start):
    best = None
    for start, end, cleaned in javadocs:
        if end <= sig_start and blanked[end:sig_start].strip() == "":
            best = cleaned
    return best


def parse_java_file(source_text: str, project_id: str,
                    source_path: str = "<memory>",
                    diagnostics: list | None = None) -> list[RawJavaClass]:
    """Parse one Java source file into RawJavaClass records.

    Files whose braces do not balance after comment/string blanking are
    skipped with a diagnostic record instead of raising.
    """
    blanked, javadocs = _blank_non_code(source_text)
    brace_match = _match_braces(blanked)
    if brace_match is None:
        if diagnostics is not None:
            diagnostics.append({
                "kind": "parse", "path": source_path, "project": project_id,
                "reason": "unbalanced braces",
            })
        return []

    pkg_match = _PACKAGE_RE.search(blanked)
    package = pkg_match.group(1) if pkg_match else ""

    decls = []
    for m in _DECL_RE.finditer(blanked):
        before = blanked[:m.start()].rstrip()
        if before.endswith(".") or before.endswith("@"):
            continue
        name = m.group(2)
        after = _skip_generics(blanked, m.end())
        body_open = _find_body_open(blanked, after)
        if body_open < 0 or body_open not in brace_match:
            continue
        header = blanked[after:body_open]
        ext = _EXTENDS_RE.search(header)
        decls.append({
            "name": name,
            "pos": m.start(),
            "extends": ext.group(1) if ext else None,
            "open": body_open,
            "close": brace_match[body_open],
        })

    classes = []
    for d in decls:
        chain = [d["name"]]
        cursor = d
        while True:
            parents = [e for e in decls
                       if e is not cursor and e["open"] < cursor["pos"] < e["close"]]
            if not parents:
                break
            cursor = max(parents, key=lambda e: e["open"])
            chain.append(cursor["name"])
        chain.reverse()
        qualified = ".".join(([package] if package else []) + chain)
        methods = _scan_members(blanked, source_text, d["open"] + 1, d["close"],
                                brace_match, javadocs, d["name"])
        classes.append(RawJavaClass(
            qualified_name=qualified,
            simple_name=d["name"],
            extends_name=d["extends"],
            methods=methods,
            source_path=source_path,
            project_id=project_id,
        ))
    return classes


def _common_prefix_len(a: str, b: str) -> int:
    pa = a.split(".") if a else []
    pb = b.split(".") if b else []
    n = 0
    for x, y in zip(pa, pb):
        if x != y:
            break
        n += 1
    return n


def _resolve_parent(cls: RawJavaClass, by_simple, by_qualified, diagnostics):
    target = cls.extends_name
    if not target:
        return None
    if "." in target:
        if target in by_qualified:
            return by_qualified[target]
        suffix = "." + target
        candidates = [c for c in by_qualified.values()
                      if c.qualified_name.endswith(suffix)]
        simple = target.rsplit(".", 1)[1]
    else:
        candidates = list(by_simple.get(target, []))
        simple = target
    candidates = [c for c in candidates if c is not cls]
    if not candidates:
        return None
    if len(candidates) == 1:
        return candidates[0]
    scored = [(_common_prefix_len(c.package, cls.package), c) for c in candidates]
    best = max(s for s, _ in scored)
    top = [c for s, c in scored if s == best]
    if len(top) > 1:
        if diagnostics is not None:
            diagnostics.append({
                "kind": "link", "class": cls.qualified_name,
                "reason": "ambiguous parent %r" % simple,
                "candidates": sorted(c.qualified_name for c in top),
            })
        return None
    return top[0]


def link_overrides(classes: list[RawJavaClass],
                   diagnostics: list | None = None) -> list[OverridePair]:
    """Pair each subclass method with the nearest ancestor method of the
    same name and arity, resolving `extends` by name within each project."""
    pairs = []
    by_project: dict[str, list[RawJavaClass]] = {}
    for c in classes:
        by_project.setdefault(c.project_id, []).append(c)

    for project_classes in by_project.values():
        by_simple: dict[str, list[RawJavaClass]] = {}
        by_qualified: dict[str, RawJavaClass] = {}
        for c in project_classes:
            by_simple.setdefault(c.simple_name, []).append(c)
            by_qualified[c.qualified_name] = c
        parent_of = {
            id(c): _resolve_parent(c, by_simple, by_qualified, diagnostics)
            for c in project_classes
        }
        for c in project_classes:
            for m in c.methods:
                ancestor = parent_of.get(id(c))
                visited = {id(c)}
                while ancestor is not None and id(ancestor) not in visited:
                    visited.add(id(ancestor))
                    hit = next(
                        (sm for sm in ancestor.methods
                         if sm.name == m.name and sm.arity == m.arity), None)
                    if hit is not None:
                        pairs.append(OverridePair(c, m, ancestor, hit))
                        break
                    ancestor = parent_of.get(id(ancestor))
    return pairs


_HTML_TAG_RE = re.compile(r"<[^>]+>")
_INLINE_TAG_RE = re.compile(r"\{@\w+\s*([^{}]*)\}")
_FIRST_SENTENCE_RE = re.compile(r"\.(?=\s|$)")


def extract_main_description(javadoc_text: str) -> tuple[str, str]:
    """Return (first_sentence, full_description) of a cleaned javadoc body.

    The description is the text before the first block-tag line (a line
    starting with '@'); HTML tags are removed and inline tags such as
    {@link X} and {@code X} are replaced by their payload.  The first
    sentence ends at the first '.' followed by whitespace or the end of
    the text, so "ASN.1" stays intact.
    """
    kept = []
    for line in javadoc_text.split("\n"):
        if line.lstrip().startswith("@"):
            break
        kept.append(line)
    desc = "\n".join(kept)
    desc = _HTML_TAG_RE.sub(" ", desc)
    desc = _INLINE_TAG_RE.sub(lambda m: m.group(1).strip(), desc)
    desc = " ".join(desc.split())
    m = _FIRST_SENTENCE_RE.search(desc)
    first = desc[:m.end()] if m else desc
    return first.strip(), desc


def _printable_ascii(tokens: list[str]) -> bool:
    return all(all(32 <= ord(ch) < 127 for ch in t) for t in tokens)


def filter_examples(pairs: list[OverridePair], mode: str = "first") -> list[OverrideExample]:
    """Turn linked pairs into dataset examples, applying corpus filters.

    Both methods must carry javadoc.  In the selected mode ("first" or
    "full") both comments must have at least 3 tokens, contain only
    printable ASCII, and differ from each other after tokenization.
    """
    if mode not in ("first", "full"):
        raise ValueError("mode must be 'first' or 'full', got %r" % mode)
    out = []
    for p in pairs:
        if not p.sub_method.javadoc_text or not p.sup_method.javadoc_text:
            continue
        sub_first, sub_full = extract_main_description(p.sub_method.javadoc_text)
        sup_first, sup_full = extract_main_description(p.sup_method.javadoc_text)
        sub_sel = sub_first if mode == "first" else sub_full
        sup_sel = sup_first if mode == "first" else sup_full
        sub_toks = text_mod.tokenize_comment(sub_sel)
        sup_toks = text_mod.tokenize_comment(sup_sel)
        if len(sub_toks) < 3 or len(sup_toks) < 3:
            continue
        if not _printable_ascii(sub_toks) or not _printable_ascii(sup_toks):
            continue
        if sub_toks == sup_toks:
            continue
        example_id = "%s:%s.%s/%d" % (
            p.sub_class.project_id, p.sub_class.qualified_name,
            p.sub_method.name, p.sub_method.arity)
        out.append(OverrideExample(
            id=example_id,
            project_id=p.sub_class.project_id,
            sub_class_name=p.sub_class.simple_name,
            sup_class_name=p.sup_class.simple_name,
            sub_method_raw=p.sub_method.body_text,
            sup_method_raw=p.sup_method.body_text,
            sub_comment_first=sub_first,
            sub_comment_full=sub_full,
            sup_comment_first=sup_first,
            sup_comment_full=sup_full,
        ))
    return out


def partition_by_project(examples: list[OverrideExample],
                         ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
                         seed: int = 0) -> DatasetSplit:
    """Split examples into train/valid/test keeping projects whole.

    Projects are shuffled with the seed and assigned greedily to the
    split with the largest remaining example deficit; when the number of
    projects left equals the number of still-empty splits, those splits
    are filled first so every split ends up nonempty.
    """
    if len(ratios) != 3 or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must be three values summing to 1")
    by_project: dict[str, list[OverrideExample]] = {}
    for ex in examples:
        by_project.setdefault(ex.project_id, []).append(ex)
    projects = sorted(by_project)
    if len(projects) < 3:
        raise ValueError("insufficient projects for cross-project split: "
                         "need at least 3, got %d" % len(projects))
    import numpy as np
    rng = np.random.default_rng(seed)
    order = [projects[i] for i in rng.permutation(len(projects))]

    total = len(examples)
    names = ("train", "valid", "test")
    buckets: dict[str, list[OverrideExample]] = {n: [] for n in names}
    assignment: dict[str, str] = {}
    for idx, proj in enumerate(order):
        remaining = len(order) - idx
        empty = [n for n in names if not buckets[n]]
        if empty and remaining <= len(empty):
            pick = empty[0]
        else:
            deficits = [ratios[k] * total - len(buckets[names[k]]) for k in range(3)]
            pick = names[max(range(3), key=lambda k: deficits[k])]
        buckets[pick].extend(by_project[proj])
        assignment[proj] = pick
    return DatasetSplit(buckets["train"], buckets["valid"], buckets["test"], assignment)


def write_examples(path: str, examples: list[OverrideExample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(ex.to_dict(), sort_keys=True) + "\n")


def read_examples(path: str) -> list[OverrideExample]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError("%s:%d: invalid JSON (%s)" % (path, lineno, e))
            if not isinstance(d, dict):
                raise SchemaError("%s:%d: expected an object" % (path, lineno))
            out.append(OverrideExample.from_dict(d))
    return out


def mine_tree(src_dir: str, diagnostics: list | None = None) -> list[OverridePair]:
    """Mine override pairs from a directory of projects.

    Immediate subdirectories of `src_dir` that contain .java files are
    treated as separate projects; .java files directly under `src_dir`
    form a project named after the directory itself.
    """
    classes: list[RawJavaClass] = []
    entries = sorted(os.listdir(src_dir))
    project_dirs = []
    root_files = []
    for name in entries:
        full = os.path.join(src_dir, name)
        if os.path.isdir(full):
            project_dirs.append((name, full))
        elif name.endswith(".java"):
            root_files.append(full)
    if root_files:
        project_dirs.append((os.path.basename(os.path.abspath(src_dir)), src_dir))
    for project_id, project_root in project_dirs:
        java_files = []
        for dirpath, dirnames, filenames in os.walk(project_root):
            dirnames.sort()
            for fn in sorted(filenames):
                if fn.endswith(".java"):
                    java_files.append(os.path.join(dirpath, fn))
        if project_root == src_dir:
            java_files = sorted(root_files)
        for path in java_files:
            with open(path, "r", encoding="utf-8", errors="replace") as fh:
                source = fh.read()
            classes.extend(parse_java_file(source, project_id, path, diagnostics))
    return link_overrides(classes, diagnostics)
