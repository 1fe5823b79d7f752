"""File formats: 8-bit PNG images and masks, PFM probability maps, box lists.

In memory an RGB image is a ``(H, W, 3) uint8`` array, a binary mask a
``(H, W) uint8`` array of 0/1, and a probability map a ``(H, W) float32``
array in [0, 1].
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

PFM_SLACK = 1e-6
_PNG_SIG = b"\x89PNG\r\n\x1a\n"


class FormatError(ValueError):
    """Raised when a file is structurally invalid for its format."""


def _png_bit_depth(raw: bytes) -> int:
    if len(raw) < 33 or raw[:8] != _PNG_SIG or raw[12:16] != b"IHDR":
        raise FormatError("unsupported or corrupt PNG")
    return raw[24]


def _load_png(path) -> Image.Image:
    raw = Path(path).read_bytes()
    depth = _png_bit_depth(raw)
    if depth != 8:
        raise FormatError(f"unsupported PNG bit depth {depth} (need 8-bit): {path}")
    try:
        img = Image.open(io.BytesIO(raw))
        img.load()
    except Exception as exc:  # PIL raises a zoo of types on truncation
        raise FormatError(f"unsupported or corrupt PNG: {path}") from exc
    if img.width < 1 or img.height < 1:
        raise FormatError(f"zero-sized PNG: {path}")
    return img


def read_png_image(path) -> np.ndarray:
    """Read an 8-bit gray/RGB/RGBA PNG as ``(H, W, 3) uint8``.

    Gray is replicated to three channels and alpha is dropped.
    """
    img = _load_png(path)
    if img.mode in ("L", "LA"):
        gray = np.asarray(img.convert("L"))
        return np.repeat(gray[:, :, None], 3, axis=2)
    return np.asarray(img.convert("RGB")).copy()


def write_png_image(image: np.ndarray, path) -> None:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise ValueError("image must be (H, W, 3) uint8")
    Image.fromarray(image, mode="RGB").save(path, format="PNG")


def read_mask_png(path) -> np.ndarray:
    """Foreground wherever any channel is >= 128."""
    img = _load_png(path)
    arr = np.asarray(img.convert("RGBA") if img.mode == "P" else img)
    if arr.ndim == 3:
        if img.mode in ("LA", "RGBA", "P"):
            arr = arr[:, :, :-1]
        arr = arr.max(axis=2)
    return (arr >= 128).astype(np.uint8)


def write_mask_png(mask: np.ndarray, path) -> None:
    mask = check_mask(mask)
    Image.fromarray((mask * 255).astype(np.uint8), mode="L").save(path, format="PNG")


def check_mask(mask) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 2 or 0 in mask.shape:
        raise ValueError(f"mask must be a non-empty 2-d array, got shape {mask.shape}")
    if not np.isin(mask, (0, 1)).all():
        raise ValueError("mask values must be exactly 0 or 1")
    return mask.astype(np.uint8)


def write_pfm(prob: np.ndarray, path) -> None:
    """Write a single-channel little-endian PFM (rows bottom-to-top)."""
    prob = np.asarray(prob)
    if prob.ndim != 2 or 0 in prob.shape:
        raise ValueError("probability map must be a non-empty 2-d array")
    data = prob.astype("<f4")
    if not np.isfinite(data).all():
        raise ValueError("probability map contains NaN or infinity")
    if data.min() < 0.0 or data.max() > 1.0:
        raise ValueError("probability map values outside [0, 1]")
    h, w = data.shape
    header = f"Pf\n{w} {h}\n-1.0\n".encode("ascii")
    Path(path).write_bytes(header + np.ascontiguousarray(data[::-1]).tobytes())


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    while pos < len(buf) and buf[pos : pos + 1].isspace():
        pos += 1
    start = pos
    while pos < len(buf) and not buf[pos : pos + 1].isspace():
        pos += 1
    # exactly one whitespace byte separates the header from the payload
    return buf[start:pos], pos + 1


def read_pfm(path) -> np.ndarray:
    """Read a "Pf" PFM into ``(H, W) float32`` validated into [0, 1]."""
    buf = Path(path).read_bytes()
    magic, pos = _read_token(buf, 0)
    if magic != b"Pf":
        raise FormatError(f"PFM header mismatch: expected 'Pf', got {magic!r}")
    try:
        w_tok, pos = _read_token(buf, pos)
        h_tok, pos = _read_token(buf, pos)
        s_tok, pos = _read_token(buf, pos)
        w, h, scale = int(w_tok), int(h_tok), float(s_tok)
    except ValueError as exc:
        raise FormatError("PFM header mismatch: malformed dimensions or scale") from exc
    if w < 1 or h < 1:
        raise FormatError("PFM header mismatch: zero dimension")
    if not scale < 0:
        raise FormatError("PFM header mismatch: only little-endian (negative scale) is supported")
    payload = buf[pos:]
    if len(payload) != 4 * w * h:
        raise FormatError(f"PFM payload has {len(payload)} bytes, expected {4 * w * h}")
    data = np.frombuffer(payload, dtype="<f4").reshape(h, w)[::-1].astype(np.float32)
    if not np.isfinite(data).all():
        raise FormatError("PFM contains NaN or infinity")
    if data.min() < -PFM_SLACK or data.max() > 1.0 + PFM_SLACK:
        raise FormatError("PFM value outside [0, 1]")
    return np.clip(data, 0.0, 1.0)


def read_boxes(path) -> list[tuple[int, int, int, int]]:
    """Parse "x_min y_min x_max y_max" lines; '#' lines and blanks are skipped."""
    boxes = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 4 or not all(p.lstrip("-").isdigit() for p in parts):
            raise FormatError(f"malformed box at line {lineno}: {line!r}")
        x0, y0, x1, y1 = (int(p) for p in parts)
        if x0 >= x1 or y0 >= y1:
            raise FormatError(f"empty box at line {lineno}")
        boxes.append((x0, y0, x1, y1))
    return boxes


def write_boxes(boxes, path) -> None:
    lines = []
    for box in boxes:
        x0, y0, x1, y1 = (int(v) for v in box)
        if x0 >= x1 or y0 >= y1:
            raise ValueError(f"empty box {box}")
        lines.append(f"{x0} {y0} {x1} {y1}\n")
    Path(path).write_text("".join(lines), encoding="utf-8", newline="\n")


def check_boxes(boxes, width: int, height: int) -> None:
    for box in boxes:
        x0, y0, x1, y1 = box
        if not (0 <= x0 < x1 <= width and 0 <= y0 < y1 <= height):
            raise ValueError(f"box {tuple(box)} outside {width}x{height} image")


def pfm_payload_bytes(path) -> bytes:
    """Raw float payload of a PFM (used for byte-level comparisons)."""
    buf = Path(path).read_bytes()
    pos = 0
    for _ in range(4):
        _, pos = _read_token(buf, pos)
    return buf[pos:]


__all__ = [
    "FormatError",
    "read_png_image",
    "write_png_image",
    "read_mask_png",
    "write_mask_png",
    "check_mask",
    "read_pfm",
    "write_pfm",
    "read_boxes",
    "write_boxes",
    "check_boxes",
    "pfm_payload_bytes",
]
