"""Block structure tables for QR versions 1-4 (shipped as ``tables.json``)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

EC_LEVELS = ("L", "M", "Q", "H")
VERSIONS = (1, 2, 3, 4)
# two-bit format indicator per level
EC_FORMAT_BITS = {"L": 1, "M": 0, "Q": 3, "H": 2}


@dataclass(frozen=True)
class BlockLayout:
    version: int
    ec_level: str
    ec_per_block: int
    data_lengths: tuple[int, ...]   # data codewords of each block, in block order
    total_codewords: int
    remainder_bits: int
    alignment: tuple[int, ...]

    @property
    def num_blocks(self) -> int:
        return len(self.data_lengths)

    @property
    def data_codewords(self) -> int:
        return sum(self.data_lengths)

    @property
    def correction_capacity(self) -> int:
        return self.ec_per_block // 2

    @property
    def byte_capacity(self) -> int:
        # 4-bit mode indicator + 8-bit count for versions 1-9
        return (8 * self.data_codewords - 12) // 8

    @property
    def size(self) -> int:
        return 17 + 4 * self.version


@lru_cache(maxsize=1)
def _raw() -> dict:
    text = resources.files(__package__).joinpath("tables.json").read_text()
    return json.loads(text)


def check_version_level(version: int, ec_level: str) -> None:
    if version not in VERSIONS:
        raise ValueError(f"unsupported QR version {version!r}; only 1-4")
    if ec_level not in EC_LEVELS:
        raise ValueError(f"unknown error correction level {ec_level!r}")


@lru_cache(maxsize=None)
def layout(version: int, ec_level: str) -> BlockLayout:
    check_version_level(version, ec_level)
    v = _raw()[str(version)]
    lv = v[ec_level]
    lengths = tuple(d for count, d in lv["blocks"] for _ in range(count))
    out = BlockLayout(version, ec_level, lv["ec_per_block"], lengths,
                      v["total_codewords"], v["remainder_bits"], tuple(v["alignment"]))
    if out.data_codewords + out.num_blocks * out.ec_per_block != out.total_codewords:
        raise AssertionError(f"inconsistent block table for {version}-{ec_level}")
    return out
