"""Binary coefficient-table cache.

Layout: magic 'HZCO', little-endian header struct (format version u32,
D u64, char index u32, N u64), then r(1..N) as little-endian float64, then a
sha256 digest of everything before it.  Truncation or bit rot breaks the
digest; a header that does not match the requested (D, char, version) is
rejected rather than silently reused.
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from .class_field import FieldData, HeckeCharacter
from .coefficients import CoefficientTable, r_coefficients, theta_counts

MAGIC = b"HZCO"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<IQIQ")


class CacheError(ValueError):
    pass


def cache_key(d: int, char_index: int, version: int = FORMAT_VERSION) -> str:
    """Content-hash filename key for a (D, character, format) triple."""
    digest = hashlib.sha256(f"{d}:{char_index}:{version}".encode()).hexdigest()
    return f"coeffs-{digest[:16]}.bin"


def save_table(table: CoefficientTable, path: str | Path) -> None:
    payload = np.ascontiguousarray(table.r[1:], dtype="<f8").tobytes()
    head = MAGIC + _HEADER.pack(FORMAT_VERSION, table.D, table.char_index, table.N)
    digest = hashlib.sha256(head + payload).digest()
    Path(path).write_bytes(head + payload + digest)


def load_header(path: str | Path) -> tuple[int, int, int]:
    """(D, char_index, N) from a cache file, checksum verified."""
    blob = Path(path).read_bytes()
    if len(blob) < len(MAGIC) + _HEADER.size + 32 or blob[:4] != MAGIC:
        raise CacheError(f"{path}: not a coefficient cache file")
    version, d, ci, n = _HEADER.unpack_from(blob, 4)
    if version != FORMAT_VERSION:
        raise CacheError(f"{path}: format version {version} != {FORMAT_VERSION}")
    body, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CacheError(f"{path}: checksum failure (truncated or corrupt)")
    if len(body) != 4 + _HEADER.size + 8 * n:
        raise CacheError(f"{path}: payload length mismatch for N={n}")
    return d, ci, n


def load_table(path: str | Path, fld: FieldData, char: HeckeCharacter) -> CoefficientTable:
    """Load a table, verifying checksum and header identity."""
    d, ci, n = load_header(path)
    if d != fld.D or ci != char.index:
        raise CacheError(
            f"{path}: cached (D={d}, char={ci}) != requested (D={fld.D}, char={char.index})")
    blob = Path(path).read_bytes()
    r = np.empty(n + 1)
    r[0] = 0.0
    r[1:] = np.frombuffer(blob, dtype="<f8", count=n, offset=4 + _HEADER.size)
    from .coefficients import _chi_array
    return CoefficientTable(D=fld.D, char_index=char.index,
                            conjugate_index=char.conjugate_index,
                            is_principal=char.is_principal,
                            is_complex=char.is_complex,
                            N=n, r=r, chi=_chi_array(fld, min(n, 10**6)))


def extend_table(table: CoefficientTable, fld: FieldData, char: HeckeCharacter,
                 n_new: int) -> CoefficientTable:
    """Extend r(n) incrementally from max cached n, reusing existing entries."""
    if n_new <= table.N:
        return table
    vals = char.values
    acc = np.zeros(n_new + 1, dtype=complex)
    for i, form in enumerate(fld.forms):
        acc += vals[i] * theta_counts(form, n_new, fld.D, n_min=table.N + 1)
    acc /= fld.w
    resid = float(np.max(np.abs(acc.imag)))
    if resid >= 1e-10:
        raise CacheError(f"extension imaginary residue {resid:.3e} too large")
    r = np.empty(n_new + 1)
    r[: table.N + 1] = table.r
    r[table.N + 1:] = acc.real[table.N + 1:]
    from .coefficients import _chi_array
    return CoefficientTable(D=table.D, char_index=table.char_index,
                            conjugate_index=table.conjugate_index,
                            is_principal=table.is_principal,
                            is_complex=table.is_complex,
                            N=n_new, r=r, chi=_chi_array(fld, min(n_new, 10**6)))


def cached_coefficients(fld: FieldData, char: HeckeCharacter, n_max: int,
                        cache_dir: str | Path | None) -> CoefficientTable:
    """Fetch-or-build with incremental extension and write-back."""
    if cache_dir is None:
        return r_coefficients(fld, char, n_max)
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = cache_dir / cache_key(fld.D, char.index)
    if path.exists():
        table = load_table(path, fld, char)
        if table.N >= n_max:
            return table
        table = extend_table(table, fld, char, n_max)
    else:
        table = r_coefficients(fld, char, n_max)
    save_table(table, path)
    return table
