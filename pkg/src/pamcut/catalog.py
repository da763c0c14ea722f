"""G-set instance catalog: fetch, checksum, cache.

Instances are downloaded from the catalog URL on first use and cached.
The sha256 of a download is recorded next to the cached file the first
time its content validates (node/edge counts match the catalog), and
every later use is checked against that pin, so a cache survives URL rot
and corrupt re-downloads are caught. ``PAMCUT_CACHE`` overrides the cache
directory.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import requests

from .graph import Graph, parse_gset

CACHE_ENV = "PAMCUT_CACHE"

_GSET_BASE = "https://web.stanford.edu/~yyye/yyye/Gset"


class CatalogError(Exception):
    pass


class UnknownInstanceError(CatalogError):
    pass


class FetchError(CatalogError):
    pass


class ChecksumMismatchError(CatalogError):
    pass


class HeaderMismatchError(CatalogError):
    pass


@dataclass(frozen=True)
class InstanceCatalogEntry:
    name: str
    url: str
    expected_n: int
    expected_m: int
    # pinned once known; None means "record at first verified download"
    sha256: str | None = None


CATALOG: dict[str, InstanceCatalogEntry] = {
    e.name: e
    for e in (
        InstanceCatalogEntry("G1", f"{_GSET_BASE}/G1", 800, 19176),
        InstanceCatalogEntry("G11", f"{_GSET_BASE}/G11", 800, 1600),
        InstanceCatalogEntry("G14", f"{_GSET_BASE}/G14", 800, 4694),
        InstanceCatalogEntry("G63", f"{_GSET_BASE}/G63", 7000, 41459),
    )
}


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "pamcut" / "gset"


def _validate_content(entry: InstanceCatalogEntry, text: str) -> Graph:
    g = parse_gset(text)
    if (g.n, g.m) != (entry.expected_n, entry.expected_m):
        raise HeaderMismatchError(
            f"{entry.name}: file has n={g.n}, m={g.m}; "
            f"catalog expects n={entry.expected_n}, m={entry.expected_m}"
        )
    return g


def fetch_instance(
    name: str,
    cache_dir: str | os.PathLike | None = None,
    catalog: dict[str, InstanceCatalogEntry] | None = None,
) -> Path:
    """Return a verified local path for the named instance.

    Cache hits never touch the network. Downloads are validated (checksum
    when pinned, node/edge counts always) before being moved into place.
    """
    entries = catalog if catalog is not None else CATALOG
    if name not in entries:
        raise UnknownInstanceError(
            f"unknown instance {name!r}; catalog has {sorted(entries)}"
        )
    entry = entries[name]
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    cache.mkdir(parents=True, exist_ok=True)
    path = cache / entry.name
    sidecar = cache / f"{entry.name}.sha256"

    if path.exists():
        data = path.read_bytes()
        digest = hashlib.sha256(data).hexdigest()
        if entry.sha256 is not None and digest != entry.sha256:
            raise ChecksumMismatchError(
                f"{entry.name}: cached file sha256 {digest} != catalog {entry.sha256}"
            )
        if sidecar.exists():
            pinned = sidecar.read_text().strip()
            if digest != pinned:
                raise ChecksumMismatchError(
                    f"{entry.name}: cached file sha256 {digest} != recorded {pinned}"
                )
        else:
            _validate_content(entry, data.decode("ascii"))
            sidecar.write_text(digest + "\n")
        return path

    try:
        resp = requests.get(entry.url, timeout=60)
        resp.raise_for_status()
    except requests.RequestException as exc:
        raise FetchError(f"{entry.name}: download failed: {exc}") from exc
    data = resp.content
    digest = hashlib.sha256(data).hexdigest()
    if entry.sha256 is not None and digest != entry.sha256:
        raise ChecksumMismatchError(
            f"{entry.name}: downloaded sha256 {digest} != catalog {entry.sha256}; "
            "file discarded"
        )
    _validate_content(entry, data.decode("ascii"))
    fd, tmp_name = tempfile.mkstemp(dir=cache, prefix=f".{entry.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    sidecar.write_text(digest + "\n")
    return path


def load_instance(
    name_or_path: str,
    cache_dir: str | os.PathLike | None = None,
) -> tuple[str, Graph]:
    """Resolve a catalog name or a local file path to (name, Graph)."""
    if name_or_path in CATALOG:
        path = fetch_instance(name_or_path, cache_dir=cache_dir)
        return name_or_path, parse_gset(path.read_text())
    p = Path(name_or_path)
    if p.exists():
        return p.stem, parse_gset(p.read_text())
    raise UnknownInstanceError(
        f"{name_or_path!r} is neither a catalog instance ({sorted(CATALOG)}) nor a file"
    )
