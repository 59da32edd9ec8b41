"""SBOM parsing, package-url handling, and vulnerability-to-fix mapping.

Accepts the CycloneDX JSON subset (components with name/version/purl)
and an SPDX tag-value subset (PackageName / PackageVersion / purl
ExternalRef). Components without a version are skipped with a warning;
no field is ever fabricated.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass, field

from .errors import DomainError, ParseError

# purl type -> OSV ecosystem name
_ECOSYSTEMS = {
    "pypi": "PyPI",
    "npm": "npm",
    "cargo": "crates.io",
    "gem": "RubyGems",
    "maven": "Maven",
    "golang": "Go",
    "nuget": "NuGet",
    "composer": "Packagist",
    "hex": "Hex",
    "pub": "Pub",
}


@dataclass(frozen=True)
class SbomPackage:
    name: str
    version: str
    ecosystem: str = ""
    purl: str | None = None

    def __post_init__(self):
        if not self.name or not self.version:
            raise DomainError("package name and version must be non-empty")
        if self.purl is not None:
            ptype, _, pname, pversion = parse_purl(self.purl)
            if pname != self.name or (pversion is not None and pversion != self.version):
                raise DomainError(
                    f"purl {self.purl!r} disagrees with name/version "
                    f"({self.name!r}, {self.version!r})"
                )

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.ecosystem, self.name, self.version)


@dataclass(frozen=True)
class VersionInterval:
    introduced: str | None = None
    fixed: str | None = None


@dataclass(frozen=True)
class VulnerabilityRecord:
    id: str
    affected_package: SbomPackage
    affected_ranges: tuple[VersionInterval, ...] = ()
    fixed_version: str | None = None
    summary: str = ""

    def __post_init__(self):
        if not self.id:
            raise DomainError("vulnerability id must be non-empty")


@dataclass(frozen=True)
class RemediationPlan:
    """A vulnerable package with the version that resolves all its advisories.

    ``target_version`` is the maximum fixed version across the package's
    vulnerabilities; it is None (with ``no_fix`` set) when no advisory
    publishes a fix. Version-ordering fallbacks are noted in diagnostics.
    """

    package: SbomPackage
    vulnerabilities: tuple[VulnerabilityRecord, ...]
    target_version: str | None = None
    no_fix: bool = False
    diagnostics: tuple[str, ...] = ()


def parse_purl(purl: str) -> tuple[str, str | None, str, str | None]:
    """Split a package url into (type, namespace, name, version)."""
    if not purl.startswith("pkg:"):
        raise DomainError(f"not a package url: {purl!r}")
    body = purl[4:]
    body = body.split("#", 1)[0].split("?", 1)[0]
    version = None
    if "@" in body:
        body, version = body.rsplit("@", 1)
    parts = [p for p in body.split("/") if p]
    if len(parts) < 2:
        raise DomainError(f"package url missing type or name: {purl!r}")
    ptype = parts[0]
    name = parts[-1]
    namespace = "/".join(parts[1:-1]) or None
    if not name:
        raise DomainError(f"package url missing name: {purl!r}")
    return ptype, namespace, name, version


def ecosystem_for_purl_type(ptype: str) -> str:
    return _ECOSYSTEMS.get(ptype.lower(), ptype)


def parse_sbom(document: str) -> list[SbomPackage]:
    """Parse a CycloneDX JSON or SPDX tag-value document into packages.

    Order follows the document. Components missing a version produce a
    warning and are skipped.
    """
    stripped = document.lstrip()
    if stripped.startswith("{"):
        return _parse_cyclonedx(document)
    if "SPDXVersion" in document or "PackageName" in document:
        return _parse_spdx(document)
    raise ParseError("unrecognized SBOM format (expected CycloneDX JSON or SPDX tag-value)")


def _package_from_fields(name, version, purl, where: str) -> SbomPackage | None:
    if not name:
        warnings.warn(f"{where}: component without a name skipped", stacklevel=3)
        return None
    if not version:
        warnings.warn(f"{where}: component {name!r} has no version, skipped", stacklevel=3)
        return None
    ecosystem = ""
    if purl:
        ptype, _, pname, pversion = parse_purl(purl)
        ecosystem = ecosystem_for_purl_type(ptype)
        if pname != name or (pversion is not None and pversion != version):
            warnings.warn(
                f"{where}: purl {purl!r} disagrees with {name!r}@{version!r}, purl dropped",
                stacklevel=3,
            )
            purl = None
            ecosystem = ""
    return SbomPackage(name=name, version=version, ecosystem=ecosystem, purl=purl)


def _parse_cyclonedx(document: str) -> list[SbomPackage]:
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid CycloneDX JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    if not isinstance(data, dict) or not isinstance(data.get("components", []), list):
        raise ParseError("CycloneDX document must be an object with a components list")
    packages = []
    for idx, comp in enumerate(data.get("components", [])):
        if not isinstance(comp, dict):
            raise ParseError(f"component {idx} is not an object")
        pkg = _package_from_fields(
            comp.get("name"), comp.get("version"), comp.get("purl"), f"component {idx}"
        )
        if pkg is not None:
            packages.append(pkg)
    return packages


_SPDX_TAG = re.compile(r"^([A-Za-z]+):\s*(.*)$")


def _parse_spdx(document: str) -> list[SbomPackage]:
    packages = []
    name = version = purl = None

    def flush(where: str):
        nonlocal name, version, purl
        if name is not None or version is not None or purl is not None:
            pkg = _package_from_fields(name, version, purl, where)
            if pkg is not None:
                packages.append(pkg)
        name = version = purl = None

    for lineno, raw in enumerate(document.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        match = _SPDX_TAG.match(line)
        if not match:
            continue
        tag, value = match.group(1), match.group(2).strip()
        if tag == "PackageName":
            flush(f"line {lineno}")
            name = value
        elif tag == "PackageVersion":
            version = value
        elif tag == "ExternalRef" and "purl" in value:
            purl = value.split()[-1]
    flush("end of document")
    return packages


_SEMVER = re.compile(
    r"^[vV]?(\d+)(?:\.(\d+))?(?:\.(\d+))?(?:-([0-9A-Za-z.-]+))?(?:\+[0-9A-Za-z.-]+)?$"
)


def parse_semver(version: str):
    """Parse into an orderable key, or None when not semver-shaped."""
    match = _SEMVER.match(version.strip())
    if not match:
        return None
    major, minor, patch, pre = match.groups()
    release = (int(major), int(minor or 0), int(patch or 0))
    if pre is None:
        # A release sorts after any of its pre-releases.
        return (release, 1, ())
    ids = []
    for part in pre.split("."):
        if part.isdigit():
            ids.append((0, int(part), ""))
        else:
            ids.append((1, 0, part))
    return (release, 0, tuple(ids))


def compare_versions(a: str, b: str) -> tuple[int, bool]:
    """Order two version strings.

    Returns (sign, semver) where sign is -1/0/1 and semver tells whether
    both parsed as semantic versions; otherwise plain string ordering was
    used as the fallback.
    """
    ka, kb = parse_semver(a), parse_semver(b)
    if ka is not None and kb is not None:
        return (ka > kb) - (ka < kb), True
    return (a > b) - (a < b), False


def map_vulnerabilities(
    sbom: list[SbomPackage],
    records: dict[tuple[str, str, str], list[VulnerabilityRecord]],
) -> list[RemediationPlan]:
    """One remediation plan per package with at least one vulnerability.

    The target version is the maximum fixed version across the package's
    advisories under semantic-version ordering; packages whose advisories
    publish no fix get a no-fix plan with an absent target.
    """
    plans = []
    for pkg in sbom:
        vulns = records.get(pkg.key, [])
        if not vulns:
            continue
        diagnostics: list[str] = []
        target: str | None = None
        for vuln in vulns:
            fixed = vuln.fixed_version
            if fixed is None:
                continue
            if parse_semver(fixed) is None:
                diagnostics.append(
                    f"{vuln.id}: fixed version {fixed!r} is not semver; string ordering used"
                )
            if target is None:
                target = fixed
            else:
                sign, _ = compare_versions(fixed, target)
                if sign > 0:
                    target = fixed
        plans.append(
            RemediationPlan(
                package=pkg,
                vulnerabilities=tuple(vulns),
                target_version=target,
                no_fix=target is None,
                diagnostics=tuple(diagnostics),
            )
        )
    return plans
