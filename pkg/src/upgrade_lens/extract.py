"""Reference call-graph extractor for Python source trees.

One node per named function definition (methods and nested functions get
dotted qualified names); one edge per resolved call site, with repeated
calls accumulating weight. Name resolution is purely lexical: bare names
resolve against the module's top-level functions and its imports,
dotted names against imported modules. Anything else (attribute
dispatch, undefined names, star imports) attaches to a synthetic node
under the path ``<external>``, one node per distinct callee name.

Richer semantic extraction is expected to come from external tooling via
the CSV edge import; this extractor exists so end-to-end runs need no
such tooling.
"""

from __future__ import annotations

import ast
import warnings
from pathlib import Path

from .graph import CallGraph, GraphBuilder

EXTERNAL_PATH = "<external>"


def _dotted_name(node: ast.expr) -> str | None:
    parts = []
    while isinstance(node, ast.Attribute):
        parts.append(node.attr)
        node = node.value
    if isinstance(node, ast.Name):
        parts.append(node.id)
        return ".".join(reversed(parts))
    return None


class _Module:
    def __init__(self, relpath: str):
        self.relpath = relpath
        self.defs: list[str] = []  # qualified names in definition order
        self.top_defs: set[str] = set()
        self.from_imports: dict[str, tuple[str | None, str]] = {}
        self.module_imports: dict[str, str] = {}  # dotted alias -> module relpath
        self.calls: list[tuple[str, ast.expr]] = []  # (caller qualname, callee expr)


def _module_candidates(base_parts: tuple[str, ...], dotted: str) -> list[str]:
    parts = base_parts + tuple(p for p in dotted.split(".") if p)
    stem = "/".join(parts)
    return [f"{stem}.py", f"{stem}/__init__.py"] if stem else []


def _resolve_module(
    files: set[str], file_relpath: str, dotted: str, level: int = 0
) -> str | None:
    if level == 0:
        base: tuple[str, ...] = ()
    else:
        pkg_dir = Path(file_relpath).parent.parts
        if level - 1 > len(pkg_dir):
            return None
        base = pkg_dir[: len(pkg_dir) - (level - 1)]
    for candidate in _module_candidates(base, dotted):
        if candidate in files:
            return candidate
    return None


def _scan(module: _Module, tree: ast.AST, files: set[str]) -> None:
    def handle_import(node: ast.stmt) -> None:
        if isinstance(node, ast.Import):
            for alias in node.names:
                resolved = _resolve_module(files, module.relpath, alias.name)
                if alias.asname:
                    if resolved:
                        module.module_imports[alias.asname] = resolved
                    continue
                if resolved:
                    module.module_imports[alias.name] = resolved
                # `import pkg.sub` also binds usable prefixes of the chain
                prefix_parts = alias.name.split(".")
                for cut in range(1, len(prefix_parts)):
                    prefix = ".".join(prefix_parts[:cut])
                    hit = _resolve_module(files, module.relpath, prefix)
                    if hit:
                        module.module_imports.setdefault(prefix, hit)
        elif isinstance(node, ast.ImportFrom):
            for alias in node.names:
                if alias.name == "*":
                    continue
                bound = alias.asname or alias.name
                sub = alias.name if node.module is None else f"{node.module}.{alias.name}"
                as_module = _resolve_module(files, module.relpath, sub, node.level)
                if as_module:
                    module.module_imports[bound] = as_module
                    continue
                origin = _resolve_module(files, module.relpath, node.module or "", node.level)
                module.from_imports[bound] = (origin, alias.name)

    def walk(node: ast.AST, stack: list[str], current: str | None) -> None:
        if isinstance(node, (ast.Import, ast.ImportFrom)):
            handle_import(node)
            return
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            qual = ".".join([*stack, node.name])
            module.defs.append(qual)
            if not stack:
                module.top_defs.add(node.name)
            # decorators and defaults evaluate in the enclosing scope
            for dec in node.decorator_list:
                walk(dec, stack, current)
            walk(node.args, stack, current)
            for stmt in node.body:
                walk(stmt, [*stack, node.name], qual)
            return
        if isinstance(node, ast.ClassDef):
            for dec in node.decorator_list:
                walk(dec, stack, current)
            for base in node.bases:
                walk(base, stack, current)
            for kw in node.keywords:
                walk(kw, stack, current)
            for stmt in node.body:
                walk(stmt, [*stack, node.name], current)
            return
        if isinstance(node, ast.Call) and current is not None:
            module.calls.append((current, node.func))
        for child in ast.iter_child_nodes(node):
            walk(child, stack, current)

    walk(tree, [], None)


def _resolve_call(
    module: _Module, expr: ast.expr, modules: dict[str, _Module]
) -> tuple[str, str] | None:
    if isinstance(expr, ast.Name):
        name = expr.id
        if name in module.top_defs:
            return (module.relpath, name)
        if name in module.from_imports:
            origin, original = module.from_imports[name]
            if origin is not None and original in modules[origin].top_defs:
                return (origin, original)
        return (EXTERNAL_PATH, name)
    dotted = _dotted_name(expr)
    if dotted is None:
        return None  # no stable name (call on a call, subscript, lambda)
    parts = dotted.split(".")
    for cut in range(len(parts) - 1, 0, -1):
        prefix = ".".join(parts[:cut])
        if prefix in module.module_imports:
            target = module.module_imports[prefix]
            rest = parts[cut:]
            if len(rest) == 1 and rest[0] in modules[target].top_defs:
                return (target, rest[0])
            break
    return (EXTERNAL_PATH, dotted)


def extract_call_graph(source_root: str | Path) -> CallGraph:
    """Extract the function-level call graph of a Python source tree.

    Files are processed in lexicographic path order, so the result is
    deterministic and idempotent. Unreadable or unparsable files are
    skipped with a warning.
    """
    root = Path(source_root)
    relpaths = sorted(
        p.relative_to(root).as_posix() for p in root.rglob("*.py") if p.is_file()
    )
    files = set(relpaths)
    modules: dict[str, _Module] = {}
    for relpath in relpaths:
        module = _Module(relpath)
        try:
            source = (root / relpath).read_text(encoding="utf-8")
            tree = ast.parse(source, filename=relpath)
        except (OSError, SyntaxError, ValueError) as exc:
            warnings.warn(f"skipping {relpath}: {exc}", stacklevel=2)
            continue
        _scan(module, tree, files)
        modules[relpath] = module

    builder = GraphBuilder()
    for relpath in relpaths:
        module = modules.get(relpath)
        if module is None:
            continue
        for qual in module.defs:
            if not builder.has_function(relpath, qual):  # redefinitions share a node
                builder.add_function(relpath, qual)

    def intern(path: str, name: str) -> int:
        if builder.has_function(path, name):
            return builder.id_of(path, name)
        return builder.add_function(path, name)

    for relpath in relpaths:
        module = modules.get(relpath)
        if module is None:
            continue
        for caller_qual, expr in module.calls:
            target = _resolve_call(module, expr, modules)
            if target is None:
                continue
            caller = builder.id_of(relpath, caller_qual)
            builder.add_call(caller, intern(*target))
    return builder.build()
